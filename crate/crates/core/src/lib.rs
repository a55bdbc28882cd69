//! Two-party signing for air-gapped cold wallets.
//!
//! A cold wallet is split between an online *gateway* (or a customer-held
//! *user* device) and an offline *core*. Wallet creation exchanges only
//! public shares, and each signature takes one message in each direction
//! across the air gap:
//!
//! * ECDSA over secp256k1: the gateway ships its share encrypted under its own
//!   Paillier key; the core folds its share and nonce in homomorphically.
//! * Schnorr over ristretto255: partial signatures are simply added.
//!
//! The resulting signatures verify under the ordinary single-party verifiers
//! in [`signature`], against the jointly derived public key. The combined
//! private key is never computed anywhere.
//!
//! Messages travel as checksummed binary envelopes ([`transport`]) that
//! carry public values only.

pub mod batch;
pub mod error;
pub mod group;
pub mod keygen;
pub mod opcount;
pub mod paillier;
pub mod sign;
pub mod signature;
pub mod sizes;
pub mod transaction;
pub mod transport;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

pub use error::{Error, ErrorClass, Result};
pub use group::{CurveId, GroupPoint, GroupScalar, Ristretto255, Secp256k1, SecretScalar};
pub use keygen::{KeyShare, Role, WalletDescriptor};
pub use signature::Signature;
pub use transaction::{Policy, Transaction};

/// Signature scheme; each is bound to one curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// ECDSA over secp256k1.
    Ecdsa,
    /// Schnorr over ristretto255.
    Schnorr,
}

impl Scheme {
    pub fn code(self) -> u8 {
        match self {
            Scheme::Ecdsa => 1,
            Scheme::Schnorr => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(Scheme::Ecdsa),
            2 => Some(Scheme::Schnorr),
            _ => None,
        }
    }

    pub fn curve_id(self) -> CurveId {
        match self {
            Scheme::Ecdsa => CurveId::Secp256k1,
            Scheme::Schnorr => CurveId::Ristretto255,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Ecdsa => "ecdsa",
            Scheme::Schnorr => "schnorr",
        })
    }
}

impl FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ecdsa" => Ok(Scheme::Ecdsa),
            "schnorr" => Ok(Scheme::Schnorr),
            other => Err(format!("unknown scheme '{other}'")),
        }
    }
}

/// Type aliases binding each scheme to its curve.
pub type EcdsaShare = KeyShare<Secp256k1>;
pub type SchnorrShare = KeyShare<Ristretto255>;
