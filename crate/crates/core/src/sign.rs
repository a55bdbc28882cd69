//! Two-round signing sessions.
//!
//! The initiator (gateway or user) opens a session and sends message 1; the
//! core answers with message 2; the initiator finalizes, verifying the
//! combined signature under the wallet key before releasing it.
//!
//! ECDSA (`x = x_1·x_2`, `k = k_1·k_2`):
//!
//! ```text
//! initiator                                  core
//!   k_1, R_1 = k_1·G
//!   m, pk, C_key = Enc(x_1), R_1  ───────▶
//!                                            k_2, R = k_2·R_1, r = R.x
//!                                            C_1 = Enc(ρ·q + k_2⁻¹·m)
//!                                            C_2 = C_key^(k_2⁻¹·r·x_2)
//!                      ◀───────  C_3 = C_1·C_2, R_2 = k_2·G
//!   s = min{k_1⁻¹·Dec(C_3), q - ...}
//!   r = (k_1·R_2).x
//! ```
//!
//! Schnorr (`x = x_1 + x_2`, `k = k_1 + k_2`): message 1 is the raw
//! transaction and `R_1`; the core returns `s_2 = k_2 + x_2·e` and `R_2`, and
//! the initiator adds its own `s_1 = k_1 + x_1·e`, where
//! `e = H(R_1 + R_2 || P || m)`.

use std::fmt;

use num_bigint::{BigUint, RandBigInt};
use rand::{CryptoRng, RngCore};

use crate::error::{Error, Result};
use crate::group::{Curve, EcdsaCurve, GroupPoint, GroupScalar, SecretScalar};
use crate::keygen::{KeyShare, Role};
use crate::paillier::{self, PaillierCiphertext, PaillierPublicKey};
use crate::signature::{
    ecdsa_r, ecdsa_verify, normalize_s, schnorr_challenge, schnorr_verify, Signature,
};
use crate::transaction::{Policy, Transaction};
use crate::Scheme;

/// Attempts before a degenerate `r` or `R` becomes a hard error.
pub const NONCE_ATTEMPTS: u32 = 3;

/// Smallest Paillier modulus that holds the core's response without
/// wrapping: `3·|q| + 64` bits.
pub fn min_paillier_bits<C: Curve>() -> u64 {
    3 * C::order().bits() + 64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SessionId(pub [u8; 16]);

impl SessionId {
    pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        let mut id = [0u8; 16];
        rng.fill_bytes(&mut id);
        SessionId(id)
    }
}

impl fmt::Display for SessionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Init,
    AwaitingPeer,
    Complete,
    Failed,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Init => "init",
            Phase::AwaitingPeer => "awaiting_peer",
            Phase::Complete => "complete",
            Phase::Failed => "failed",
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Phase::Init => 0,
            Phase::AwaitingPeer => 1,
            Phase::Complete => 2,
            Phase::Failed => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        [Phase::Init, Phase::AwaitingPeer, Phase::Complete, Phase::Failed]
            .into_iter()
            .find(|p| p.code() == code)
    }
}

/// Initiator-side state between sending message 1 and receiving message 2.
///
/// The nonce is taken out on the first finalize attempt, so a session can
/// never sign twice.
#[derive(Debug, Clone)]
pub struct SigningSession<C: Curve> {
    scheme: Scheme,
    role: Role,
    id: SessionId,
    phase: Phase,
    nonce: Option<SecretScalar<C>>,
    commitment: GroupPoint<C>,
    tx: Transaction,
    wallet_key: GroupPoint<C>,
}

impl<C: Curve> SigningSession<C> {
    /// Rebuilds a persisted session.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        scheme: Scheme,
        role: Role,
        id: SessionId,
        phase: Phase,
        nonce: Option<SecretScalar<C>>,
        commitment: GroupPoint<C>,
        tx: Transaction,
        wallet_key: GroupPoint<C>,
    ) -> Result<Self> {
        if phase == Phase::AwaitingPeer && nonce.is_none() {
            return Err(Error::NonceReuse);
        }
        if let Some(k) = &nonce {
            if k.expose().mul_base() != commitment {
                return Err(Error::InconsistentShare);
            }
        }
        tx.validate()?;
        Ok(SigningSession { scheme, role, id, phase, nonce, commitment, tx, wallet_key })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn id(&self) -> SessionId {
        self.id
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn nonce(&self) -> Option<&SecretScalar<C>> {
        self.nonce.as_ref()
    }

    /// `R_i = k_i·G`.
    pub fn commitment(&self) -> GroupPoint<C> {
        self.commitment
    }

    pub fn transaction(&self) -> &Transaction {
        &self.tx
    }

    pub fn wallet_key(&self) -> GroupPoint<C> {
        self.wallet_key
    }

    fn open<R: RngCore + CryptoRng>(
        share: &KeyShare<C>,
        tx: &Transaction,
        nonce: Option<SecretScalar<C>>,
        rng: &mut R,
    ) -> Result<Self> {
        if !share.role().is_initiator() {
            return Err(Error::RoleNotPermitted { role: share.role(), action: "open a signing session" });
        }
        tx.validate()?;
        let wallet_key = share.require_shared()?;
        let nonce = nonce.unwrap_or_else(|| SecretScalar::random_nonzero(rng));
        if nonce.expose().is_zero() {
            return Err(Error::ZeroNonce);
        }
        let mut session = SigningSession {
            scheme: share.scheme(),
            role: share.role(),
            id: SessionId::random(rng),
            phase: Phase::Init,
            commitment: nonce.expose().mul_base(),
            nonce: Some(nonce),
            tx: tx.clone(),
            wallet_key,
        };
        session.phase = Phase::AwaitingPeer;
        Ok(session)
    }

    /// Checks the phase and consumes the nonce.
    fn take_nonce(&mut self, share: &KeyShare<C>) -> Result<SecretScalar<C>> {
        match self.phase {
            Phase::AwaitingPeer => {}
            Phase::Complete | Phase::Failed => return Err(Error::NonceReuse),
            Phase::Init => {
                return Err(Error::WrongPhase { expected: "awaiting_peer", found: self.phase.name() })
            }
        }
        if share.scheme() != self.scheme {
            return Err(Error::SchemeMismatch { expected: self.scheme, found: share.scheme() });
        }
        if share.shared_public() != Some(self.wallet_key) {
            return Err(Error::SharedKeyConflict);
        }
        let nonce = self.nonce.take().ok_or(Error::NonceReuse)?;
        // Any outcome from here on leaves the session closed.
        self.phase = Phase::Failed;
        Ok(nonce)
    }
}

fn require_scheme<C: Curve>(share: &KeyShare<C>, scheme: Scheme) -> Result<()> {
    if share.scheme() != scheme {
        return Err(Error::SchemeMismatch { expected: scheme, found: share.scheme() });
    }
    Ok(())
}

fn require_core<C: Curve>(share: &KeyShare<C>) -> Result<()> {
    if share.role() != Role::Core {
        return Err(Error::RoleNotPermitted { role: share.role(), action: "answer a signing request" });
    }
    share.require_shared().map(|_| ())
}

fn check_request(policy: &Policy, tx: &Transaction) -> Result<()> {
    tx.validate()?;
    policy.check(tx).map_err(Error::PolicyViolation)
}

/// ECDSA message 1: `m`, `pk`, `C_key`, `R_1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EcdsaSignMsg1<C: Curve> {
    pub m: GroupScalar<C>,
    pub pk: PaillierPublicKey,
    pub c_key: PaillierCiphertext,
    pub r1: GroupPoint<C>,
}

impl<C: Curve> EcdsaSignMsg1<C> {
    pub fn validate(&self) -> Result<()> {
        if self.r1.is_identity() {
            return Err(Error::IdentityPoint("R1"));
        }
        let required = min_paillier_bits::<C>();
        if self.pk.bits() < required {
            return Err(Error::ModulusTooSmall { bits: self.pk.bits(), required });
        }
        PaillierCiphertext::new(&self.pk, self.c_key.value().clone())?;
        Ok(())
    }
}

/// ECDSA message 2: `C_3`, `R_2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EcdsaSignMsg2<C: Curve> {
    pub c3: PaillierCiphertext,
    pub r2: GroupPoint<C>,
}

/// Core-side randomness; injectable for equivalence tests.
#[derive(Debug, Clone)]
pub struct CoreEcdsaNonces<C: Curve> {
    pub k2: SecretScalar<C>,
    /// Mask multiplier, uniform in `[0, q^2)`.
    pub rho: BigUint,
}

pub fn ecdsa_gateway_init<C: EcdsaCurve, R: RngCore + CryptoRng>(
    share: &KeyShare<C>,
    tx: &Transaction,
    rng: &mut R,
) -> Result<(SigningSession<C>, EcdsaSignMsg1<C>)> {
    ecdsa_init_inner(share, tx, None, rng)
}

#[cfg(any(test, feature = "nonce-injection"))]
pub fn ecdsa_gateway_init_with_nonce<C: EcdsaCurve, R: RngCore + CryptoRng>(
    share: &KeyShare<C>,
    tx: &Transaction,
    k1: SecretScalar<C>,
    rng: &mut R,
) -> Result<(SigningSession<C>, EcdsaSignMsg1<C>)> {
    ecdsa_init_inner(share, tx, Some(k1), rng)
}

fn ecdsa_init_inner<C: EcdsaCurve, R: RngCore + CryptoRng>(
    share: &KeyShare<C>,
    tx: &Transaction,
    k1: Option<SecretScalar<C>>,
    rng: &mut R,
) -> Result<(SigningSession<C>, EcdsaSignMsg1<C>)> {
    require_scheme(share, Scheme::Ecdsa)?;
    let keypair = share.paillier().ok_or(Error::MissingPaillier)?;
    let c_key = share.encrypted_secret().ok_or(Error::MissingPaillier)?;
    let required = min_paillier_bits::<C>();
    if keypair.public.bits() < required {
        return Err(Error::ModulusTooSmall { bits: keypair.public.bits(), required });
    }
    let session = SigningSession::open(share, tx, k1, rng)?;
    let msg = EcdsaSignMsg1 {
        m: tx.hash()?,
        pk: keypair.public.clone(),
        c_key: c_key.clone(),
        r1: session.commitment,
    };
    Ok((session, msg))
}

pub fn ecdsa_core_respond<C: EcdsaCurve, R: RngCore + CryptoRng>(
    share: &KeyShare<C>,
    msg1: &EcdsaSignMsg1<C>,
    tx: &Transaction,
    policy: &Policy,
    rng: &mut R,
) -> Result<EcdsaSignMsg2<C>> {
    ecdsa_core_checks(share, msg1, tx, policy)?;
    for _ in 0..NONCE_ATTEMPTS {
        let k2 = SecretScalar::random_nonzero(rng);
        let q_sq = C::order() * C::order();
        let rho = rng.gen_biguint_below(&q_sq);
        match ecdsa_core_compute(share, msg1, &CoreEcdsaNonces { k2, rho }, rng)? {
            Some(msg2) => return Ok(msg2),
            None => continue,
        }
    }
    Err(Error::NonceRetriesExhausted(NONCE_ATTEMPTS))
}

#[cfg(any(test, feature = "nonce-injection"))]
pub fn ecdsa_core_respond_with_nonces<C: EcdsaCurve, R: RngCore + CryptoRng>(
    share: &KeyShare<C>,
    msg1: &EcdsaSignMsg1<C>,
    tx: &Transaction,
    policy: &Policy,
    nonces: &CoreEcdsaNonces<C>,
    rng: &mut R,
) -> Result<EcdsaSignMsg2<C>> {
    ecdsa_core_checks(share, msg1, tx, policy)?;
    ecdsa_core_compute(share, msg1, nonces, rng)?.ok_or(Error::DegenerateSignature("r"))
}

fn ecdsa_core_checks<C: EcdsaCurve>(
    share: &KeyShare<C>,
    msg1: &EcdsaSignMsg1<C>,
    tx: &Transaction,
    policy: &Policy,
) -> Result<()> {
    require_scheme(share, Scheme::Ecdsa)?;
    require_core(share)?;
    msg1.validate()?;
    if tx.hash::<C>()? != msg1.m {
        return Err(Error::HashMismatch);
    }
    check_request(policy, tx)
}

/// `None` when `r = 0` for this nonce.
fn ecdsa_core_compute<C: EcdsaCurve, R: RngCore + CryptoRng>(
    share: &KeyShare<C>,
    msg1: &EcdsaSignMsg1<C>,
    nonces: &CoreEcdsaNonces<C>,
    rng: &mut R,
) -> Result<Option<EcdsaSignMsg2<C>>> {
    let k2 = *nonces.k2.expose();
    let k2_inv = k2.invert().ok_or(Error::ZeroNonce)?;
    let big_r = msg1.r1 * k2;
    let r = match ecdsa_r(&big_r) {
        Some(r) if !r.is_zero() => r,
        _ => return Ok(None),
    };
    let q = C::order();
    let masked = &nonces.rho * q + (k2_inv * msg1.m).to_biguint();
    let c1 = paillier::encrypt(&msg1.pk, &masked, rng)?;
    let exponent = (k2_inv * r * *share.secret_share().expose()).to_biguint();
    let c2 = paillier::scalar_mul(&msg1.pk, &msg1.c_key, &exponent);
    Ok(Some(EcdsaSignMsg2 { c3: paillier::add(&msg1.pk, &c1, &c2), r2: k2.mul_base() }))
}

pub fn ecdsa_gateway_finalize<C: EcdsaCurve>(
    session: &mut SigningSession<C>,
    share: &KeyShare<C>,
    msg2: &EcdsaSignMsg2<C>,
) -> Result<Signature<C>> {
    if session.scheme != Scheme::Ecdsa {
        return Err(Error::SchemeMismatch { expected: Scheme::Ecdsa, found: session.scheme });
    }
    let k1 = session.take_nonce(share)?;
    if msg2.r2.is_identity() {
        return Err(Error::IdentityPoint("R2"));
    }
    let keypair = share.paillier().ok_or(Error::MissingPaillier)?;
    let plain = paillier::decrypt(&keypair.public, &keypair.secret, &msg2.c3)?;
    let s_prime = GroupScalar::<C>::from_biguint_reduced(&plain);
    let k1 = *k1.expose();
    let s = normalize_s(k1.invert().ok_or(Error::ZeroNonce)? * s_prime);
    let r = ecdsa_r(&(msg2.r2 * k1)).ok_or(Error::IdentityPoint("R"))?;
    let sig = Signature::new(Scheme::Ecdsa, r, s)?;
    let m = session.tx.hash()?;
    if !ecdsa_verify(&session.wallet_key, &m, &sig) {
        return Err(Error::VerificationFailed("combined ECDSA signature rejected by wallet key"));
    }
    session.phase = Phase::Complete;
    Ok(sig)
}

/// Schnorr message 1: raw transaction and `R_1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchnorrSignMsg1<C: Curve> {
    pub tx: Transaction,
    pub r1: GroupPoint<C>,
}

/// Schnorr message 2: `s_2`, `R_2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchnorrSignMsg2<C: Curve> {
    pub s2: GroupScalar<C>,
    pub r2: GroupPoint<C>,
}

pub fn schnorr_gateway_init<C: Curve, R: RngCore + CryptoRng>(
    share: &KeyShare<C>,
    tx: &Transaction,
    rng: &mut R,
) -> Result<(SigningSession<C>, SchnorrSignMsg1<C>)> {
    require_scheme(share, Scheme::Schnorr)?;
    let session = SigningSession::open(share, tx, None, rng)?;
    let msg = SchnorrSignMsg1 { tx: tx.clone(), r1: session.commitment };
    Ok((session, msg))
}

#[cfg(any(test, feature = "nonce-injection"))]
pub fn schnorr_gateway_init_with_nonce<C: Curve, R: RngCore + CryptoRng>(
    share: &KeyShare<C>,
    tx: &Transaction,
    k1: SecretScalar<C>,
    rng: &mut R,
) -> Result<(SigningSession<C>, SchnorrSignMsg1<C>)> {
    require_scheme(share, Scheme::Schnorr)?;
    let session = SigningSession::open(share, tx, Some(k1), rng)?;
    let msg = SchnorrSignMsg1 { tx: tx.clone(), r1: session.commitment };
    Ok((session, msg))
}

pub fn schnorr_core_respond<C: Curve, R: RngCore + CryptoRng>(
    share: &KeyShare<C>,
    msg1: &SchnorrSignMsg1<C>,
    policy: &Policy,
    rng: &mut R,
) -> Result<SchnorrSignMsg2<C>> {
    schnorr_core_checks(share, msg1, policy)?;
    for _ in 0..NONCE_ATTEMPTS {
        let k2 = SecretScalar::random_nonzero(rng);
        if let Some(msg2) = schnorr_core_compute(share, msg1, &k2)? {
            return Ok(msg2);
        }
    }
    Err(Error::NonceRetriesExhausted(NONCE_ATTEMPTS))
}

#[cfg(any(test, feature = "nonce-injection"))]
pub fn schnorr_core_respond_with_nonce<C: Curve>(
    share: &KeyShare<C>,
    msg1: &SchnorrSignMsg1<C>,
    policy: &Policy,
    k2: &SecretScalar<C>,
) -> Result<SchnorrSignMsg2<C>> {
    schnorr_core_checks(share, msg1, policy)?;
    schnorr_core_compute(share, msg1, k2)?.ok_or(Error::IdentityPoint("R"))
}

fn schnorr_core_checks<C: Curve>(
    share: &KeyShare<C>,
    msg1: &SchnorrSignMsg1<C>,
    policy: &Policy,
) -> Result<()> {
    require_scheme(share, Scheme::Schnorr)?;
    require_core(share)?;
    if msg1.r1.is_identity() {
        return Err(Error::IdentityPoint("R1"));
    }
    check_request(policy, &msg1.tx)
}

/// `None` when `R_1 + R_2` is the identity.
fn schnorr_core_compute<C: Curve>(
    share: &KeyShare<C>,
    msg1: &SchnorrSignMsg1<C>,
    k2: &SecretScalar<C>,
) -> Result<Option<SchnorrSignMsg2<C>>> {
    let k2 = *k2.expose();
    if k2.is_zero() {
        return Err(Error::ZeroNonce);
    }
    let r2 = k2.mul_base();
    let big_r = msg1.r1 + r2;
    if big_r.is_identity() {
        return Ok(None);
    }
    let message = msg1.tx.canonical_bytes()?;
    let e = schnorr_challenge(&big_r, &share.require_shared()?, &message);
    Ok(Some(SchnorrSignMsg2 { s2: k2 + *share.secret_share().expose() * e, r2 }))
}

pub fn schnorr_gateway_finalize<C: Curve>(
    session: &mut SigningSession<C>,
    share: &KeyShare<C>,
    msg2: &SchnorrSignMsg2<C>,
) -> Result<Signature<C>> {
    if session.scheme != Scheme::Schnorr {
        return Err(Error::SchemeMismatch { expected: Scheme::Schnorr, found: session.scheme });
    }
    let k1 = session.take_nonce(share)?;
    if msg2.r2.is_identity() {
        return Err(Error::IdentityPoint("R2"));
    }
    let big_r = session.commitment + msg2.r2;
    if big_r.is_identity() {
        return Err(Error::IdentityPoint("R"));
    }
    let message = session.tx.canonical_bytes()?;
    let e = schnorr_challenge(&big_r, &session.wallet_key, &message);
    // The core's public share is P - P_1.
    let core_public = session.wallet_key - share.public_share();
    if msg2.s2.mul_base() != msg2.r2 + core_public * e {
        return Err(Error::VerificationFailed("core partial signature invalid"));
    }
    let s1 = *k1.expose() + *share.secret_share().expose() * e;
    let sig = Signature::new(Scheme::Schnorr, e, s1 + msg2.s2)?;
    if !schnorr_verify(&session.wallet_key, &message, &sig) {
        return Err(Error::VerificationFailed("combined Schnorr signature rejected by wallet key"));
    }
    session.phase = Phase::Complete;
    Ok(sig)
}

/// `Dec(C_3)` as a full integer; exposed for masking analysis in tests.
#[doc(hidden)]
pub fn decrypt_response_plaintext<C: Curve>(share: &KeyShare<C>, msg2: &EcdsaSignMsg2<C>) -> Result<BigUint> {
    let kp = share.paillier().ok_or(Error::MissingPaillier)?;
    paillier::decrypt(&kp.public, &kp.secret, &msg2.c3)
}
