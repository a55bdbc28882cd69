//! Two-party wallet creation.
//!
//! Each party samples its share locally and publishes only `P_i = x_i·G`.
//! The wallet key is `x_1·x_2` (ECDSA) or `x_1 + x_2` (Schnorr); neither
//! party ever holds it. Both sides arrive at the same public key:
//!
//! * ECDSA: `P = x_own · P_peer`
//! * Schnorr: `P = P_own + P_peer`
//!
//! There is no commitment round, so the additive Schnorr combine is open to
//! rogue-key choices by a peer that sees `P_own` first; deployments that
//! cannot rule that out need an authenticated, commit-first exchange.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use rand::{CryptoRng, RngCore};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::group::{Curve, GroupPoint, GroupScalar, SecretScalar};
use crate::paillier::{self, PaillierCiphertext, PaillierKeypair};
use crate::Scheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Gateway,
    Core,
    /// Customer-held device standing in for the gateway.
    User,
}

impl Role {
    pub fn code(self) -> u8 {
        match self {
            Role::Gateway => 1,
            Role::Core => 2,
            Role::User => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(Role::Gateway),
            2 => Some(Role::Core),
            3 => Some(Role::User),
            _ => None,
        }
    }

    /// Gateway and user start and finish signing sessions; the core responds.
    pub fn is_initiator(self) -> bool {
        matches!(self, Role::Gateway | Role::User)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Gateway => "gateway",
            Role::Core => "core",
            Role::User => "user",
        })
    }
}

impl FromStr for Role {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "gateway" => Ok(Role::Gateway),
            "core" => Ok(Role::Core),
            "user" => Ok(Role::User),
            other => Err(format!("unknown role '{other}'")),
        }
    }
}

/// One party's key material.
#[derive(Debug, Clone)]
pub struct KeyShare<C: Curve> {
    scheme: Scheme,
    role: Role,
    secret: SecretScalar<C>,
    public: GroupPoint<C>,
    shared: Option<GroupPoint<C>>,
    paillier: Option<PaillierKeypair>,
    encrypted_secret: Option<PaillierCiphertext>,
    recoverable: bool,
}

impl<C: Curve> KeyShare<C> {
    /// Assembles a share from stored parts, checking every invariant.
    pub fn from_parts(
        scheme: Scheme,
        role: Role,
        secret: SecretScalar<C>,
        shared: Option<GroupPoint<C>>,
        paillier: Option<(PaillierKeypair, PaillierCiphertext)>,
        recoverable: bool,
    ) -> Result<Self> {
        check_curve::<C>(scheme)?;
        if secret.expose().is_zero() {
            return Err(Error::ZeroSecret);
        }
        if shared.is_some_and(|p| p.is_identity()) {
            return Err(Error::IdentityPoint("shared public key"));
        }
        let needs_paillier = scheme == Scheme::Ecdsa && role.is_initiator();
        if needs_paillier != paillier.is_some() {
            return Err(Error::MissingPaillier);
        }
        let (paillier, encrypted_secret) = match paillier {
            Some((kp, c_key)) => {
                let plain = paillier::decrypt(&kp.public, &kp.secret, &c_key)?;
                if plain != secret.expose().to_biguint() {
                    return Err(Error::InconsistentShare);
                }
                (Some(kp), Some(c_key))
            }
            None => (None, None),
        };
        Ok(KeyShare {
            scheme,
            role,
            public: secret.expose().mul_base(),
            secret,
            shared,
            paillier,
            encrypted_secret,
            recoverable,
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn secret_share(&self) -> &SecretScalar<C> {
        &self.secret
    }

    /// `P_i = x_i·G`.
    pub fn public_share(&self) -> GroupPoint<C> {
        self.public
    }

    pub fn shared_public(&self) -> Option<GroupPoint<C>> {
        self.shared
    }

    pub fn require_shared(&self) -> Result<GroupPoint<C>> {
        self.shared.ok_or(Error::SharedKeyNotSet)
    }

    pub fn paillier(&self) -> Option<&PaillierKeypair> {
        self.paillier.as_ref()
    }

    /// `C_key = Enc_pk(x_i)`, cached at generation time.
    pub fn encrypted_secret(&self) -> Option<&PaillierCiphertext> {
        self.encrypted_secret.as_ref()
    }

    /// Whether the secret was derived from an exchange-held master seed.
    pub fn is_recoverable(&self) -> bool {
        self.recoverable
    }

    /// Derives and stores the wallet public key from the peer's `P_j`.
    /// Repeating with the same peer point is a no-op.
    pub fn combine_public_key(&mut self, peer: &GroupPoint<C>) -> Result<GroupPoint<C>> {
        if peer.is_identity() {
            return Err(Error::IdentityPoint("peer public share"));
        }
        let combined = match self.scheme {
            Scheme::Ecdsa => *peer * *self.secret.expose(),
            Scheme::Schnorr => self.public + *peer,
        };
        if combined.is_identity() {
            return Err(Error::IdentityPoint("shared public key"));
        }
        match self.shared {
            Some(existing) if existing != combined => Err(Error::SharedKeyConflict),
            _ => {
                self.shared = Some(combined);
                Ok(combined)
            }
        }
    }

    pub fn keygen_message(&self) -> KeygenPublic<C> {
        KeygenPublic { scheme: self.scheme, public: self.public }
    }

    pub fn wallet(&self) -> Result<WalletDescriptor> {
        let shared = self.require_shared()?;
        Ok(WalletDescriptor::new(self.scheme, &shared))
    }
}

/// The only message of wallet creation: a party's public share.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeygenPublic<C: Curve> {
    pub scheme: Scheme,
    pub public: GroupPoint<C>,
}

#[derive(Debug, Clone, Copy)]
pub struct KeygenOptions {
    pub paillier_bits: u64,
}

impl Default for KeygenOptions {
    fn default() -> Self {
        KeygenOptions { paillier_bits: paillier::DEFAULT_MODULUS_BITS }
    }
}

fn check_curve<C: Curve>(scheme: Scheme) -> Result<()> {
    if scheme.curve_id() != C::ID {
        return Err(Error::InvalidEncoding("curve does not match scheme"));
    }
    Ok(())
}

/// A Paillier keypair large enough for signing on `C`.
fn paillier_for<C: Curve, R: RngCore + CryptoRng>(options: &KeygenOptions, rng: &mut R) -> Result<PaillierKeypair> {
    let required = crate::sign::min_paillier_bits::<C>();
    if options.paillier_bits < required {
        return Err(Error::ModulusTooSmall { bits: options.paillier_bits, required });
    }
    paillier::keygen(options.paillier_bits, rng)
}

/// Samples a fresh share. Initiator-side ECDSA shares also get a Paillier
/// keypair and the encryption of their secret under it.
pub fn generate_share<C: Curve, R: RngCore + CryptoRng>(
    scheme: Scheme,
    role: Role,
    options: &KeygenOptions,
    rng: &mut R,
) -> Result<KeyShare<C>> {
    check_curve::<C>(scheme)?;
    let paillier = if scheme == Scheme::Ecdsa && role.is_initiator() {
        Some(paillier_for::<C, R>(options, rng)?)
    } else {
        None
    };
    share_from_secret(scheme, role, SecretScalar::random_nonzero(rng), paillier, false, rng)
}

/// Builds a share around a given secret, encrypting it under `paillier`
/// when the role requires one.
pub fn share_from_secret<C: Curve, R: RngCore + CryptoRng>(
    scheme: Scheme,
    role: Role,
    secret: SecretScalar<C>,
    paillier: Option<PaillierKeypair>,
    recoverable: bool,
    rng: &mut R,
) -> Result<KeyShare<C>> {
    let paillier = match paillier {
        Some(kp) => {
            let c_key = paillier::encrypt(&kp.public, &secret.expose().to_biguint(), rng)?;
            Some((kp, c_key))
        }
        None => None,
    };
    KeyShare::from_parts(scheme, role, secret, None, paillier, recoverable)
}

/// `x_user = SHA-256(master_seed || account_id) mod q`, flagged recoverable.
pub fn recoverable_user_share<C: Curve, R: RngCore + CryptoRng>(
    scheme: Scheme,
    master_seed: &[u8],
    account_id: &str,
    options: &KeygenOptions,
    rng: &mut R,
) -> Result<KeyShare<C>> {
    check_curve::<C>(scheme)?;
    let mut h = Sha256::new();
    h.update(master_seed);
    h.update(account_id.as_bytes());
    let x = GroupScalar::<C>::from_biguint_reduced(&BigUint::from_bytes_be(&h.finalize()));
    if x.is_zero() {
        return Err(Error::ZeroSecret);
    }
    let paillier = match scheme {
        Scheme::Ecdsa => Some(paillier_for::<C, R>(options, rng)?),
        Scheme::Schnorr => None,
    };
    share_from_secret(scheme, Role::User, SecretScalar::new(x), paillier, true, rng)
}

/// `"cw1" || hex(SHA-256(encode(P)))[..40]`.
pub fn derive_address<C: Curve>(_scheme: Scheme, shared: &GroupPoint<C>) -> String {
    let digest = Sha256::digest(shared.encode());
    format!("cw1{}", &hex::encode(digest)[..40])
}

/// Public description of an established wallet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WalletDescriptor {
    pub scheme: Scheme,
    /// Hex encoding of the wallet public key.
    pub shared_public: String,
    pub address: String,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
}

impl WalletDescriptor {
    pub fn new<C: Curve>(scheme: Scheme, shared: &GroupPoint<C>) -> Self {
        let created_at = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        WalletDescriptor {
            scheme,
            shared_public: hex::encode(shared.encode()),
            address: derive_address(scheme, shared),
            created_at,
        }
    }
}
