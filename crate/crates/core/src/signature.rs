//! Single-party ECDSA and Schnorr.
//!
//! These are the building blocks of the two-party sessions and also the
//! verifiers their output must satisfy unchanged.

use num_bigint::BigUint;
use rand::{CryptoRng, RngCore};

use crate::error::{Error, Result};
use crate::group::{hash_to_scalar, Curve, EcdsaCurve, GroupPoint, GroupScalar, SecretScalar};
use crate::Scheme;

/// `(r, s)` for ECDSA, `(e, s)` for Schnorr.
///
/// ECDSA signatures are only constructible in low-s form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signature<C: Curve> {
    scheme: Scheme,
    first: GroupScalar<C>,
    second: GroupScalar<C>,
}

impl<C: Curve> Signature<C> {
    pub fn new(scheme: Scheme, first: GroupScalar<C>, second: GroupScalar<C>) -> Result<Self> {
        if first.is_zero() {
            return Err(Error::DegenerateSignature(first_name(scheme)));
        }
        if second.is_zero() {
            return Err(Error::DegenerateSignature("s"));
        }
        if scheme == Scheme::Ecdsa && !is_low_s(&second) {
            return Err(Error::NonCanonicalSignature);
        }
        Ok(Signature { scheme, first, second })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// `r` (ECDSA) or `e` (Schnorr).
    pub fn first(&self) -> GroupScalar<C> {
        self.first
    }

    pub fn s(&self) -> GroupScalar<C> {
        self.second
    }

    pub fn to_bytes(&self) -> [u8; 64] {
        let mut out = [0u8; 64];
        out[..32].copy_from_slice(&self.first.to_be_bytes());
        out[32..].copy_from_slice(&self.second.to_be_bytes());
        out
    }

    pub fn from_bytes(scheme: Scheme, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != 64 {
            return Err(Error::InvalidEncoding("signature"));
        }
        let first =
            GroupScalar::from_be_slice(&bytes[..32]).ok_or(Error::InvalidEncoding("signature"))?;
        let second =
            GroupScalar::from_be_slice(&bytes[32..]).ok_or(Error::InvalidEncoding("signature"))?;
        Signature::new(scheme, first, second)
    }
}

fn first_name(scheme: Scheme) -> &'static str {
    match scheme {
        Scheme::Ecdsa => "r",
        Scheme::Schnorr => "e",
    }
}

/// `s <= (q-1)/2`.
pub fn is_low_s<C: Curve>(s: &GroupScalar<C>) -> bool {
    s.to_biguint() << 1u8 < *C::order()
}

/// `min{s, q-s}`.
pub fn normalize_s<C: Curve>(s: GroupScalar<C>) -> GroupScalar<C> {
    if is_low_s(&s) {
        s
    } else {
        -s
    }
}

/// `R.x mod q`.
pub(crate) fn ecdsa_r<C: EcdsaCurve>(big_r: &GroupPoint<C>) -> Option<GroupScalar<C>> {
    let x = big_r.x_coordinate()?;
    Some(GroupScalar::from_biguint_reduced(&BigUint::from_bytes_be(&x)))
}

const SIGN_ATTEMPTS: u32 = 3;

/// ECDSA over a pre-hashed message scalar `m`, with a fresh random nonce.
pub fn ecdsa_sign<C: EcdsaCurve, R: RngCore + CryptoRng>(
    x: &SecretScalar<C>,
    m: &GroupScalar<C>,
    rng: &mut R,
) -> Result<Signature<C>> {
    if x.expose().is_zero() {
        return Err(Error::ZeroSecret);
    }
    for _ in 0..SIGN_ATTEMPTS {
        let k = SecretScalar::random_nonzero(rng);
        match ecdsa_sign_inner(x, m, &k) {
            Err(Error::DegenerateSignature(_)) => continue,
            other => return other,
        }
    }
    Err(Error::NonceRetriesExhausted(SIGN_ATTEMPTS))
}

/// ECDSA with a caller-chosen nonce. Degenerate `r` or `s` is an error.
#[cfg(any(test, feature = "nonce-injection"))]
pub fn ecdsa_sign_with_nonce<C: EcdsaCurve>(
    x: &SecretScalar<C>,
    m: &GroupScalar<C>,
    k: &SecretScalar<C>,
) -> Result<Signature<C>> {
    ecdsa_sign_inner(x, m, k)
}

fn ecdsa_sign_inner<C: EcdsaCurve>(
    x: &SecretScalar<C>,
    m: &GroupScalar<C>,
    k: &SecretScalar<C>,
) -> Result<Signature<C>> {
    if x.expose().is_zero() {
        return Err(Error::ZeroSecret);
    }
    let k = *k.expose();
    let k_inv = k.invert().ok_or(Error::ZeroNonce)?;
    let r = ecdsa_r(&k.mul_base()).ok_or(Error::ZeroNonce)?;
    if r.is_zero() {
        return Err(Error::DegenerateSignature("r"));
    }
    let s = k_inv * (*m + r * *x.expose());
    if s.is_zero() {
        return Err(Error::DegenerateSignature("s"));
    }
    Signature::new(Scheme::Ecdsa, r, normalize_s(s))
}

/// Verification on raw components; accepts both `s` and `q - s`.
pub fn ecdsa_verify_raw<C: EcdsaCurve>(
    public: &GroupPoint<C>,
    m: &GroupScalar<C>,
    r: &GroupScalar<C>,
    s: &GroupScalar<C>,
) -> bool {
    if public.is_identity() || r.is_zero() {
        return false;
    }
    let Some(s_inv) = s.invert() else {
        return false;
    };
    let u1 = *m * s_inv;
    let u2 = *r * s_inv;
    let candidate = u1.mul_base() + *public * u2;
    match ecdsa_r(&candidate) {
        Some(rx) => rx == *r,
        None => false,
    }
}

pub fn ecdsa_verify<C: EcdsaCurve>(
    public: &GroupPoint<C>,
    m: &GroupScalar<C>,
    sig: &Signature<C>,
) -> bool {
    sig.scheme == Scheme::Ecdsa && ecdsa_verify_raw(public, m, &sig.first, &sig.second)
}

/// `e = H(encode(R) || encode(P) || m)`.
pub fn schnorr_challenge<C: Curve>(
    big_r: &GroupPoint<C>,
    public: &GroupPoint<C>,
    message: &[u8],
) -> GroupScalar<C> {
    let mut buf = big_r.encode();
    buf.extend_from_slice(&public.encode());
    buf.extend_from_slice(message);
    hash_to_scalar(&buf)
}

pub fn schnorr_sign<C: Curve, R: RngCore + CryptoRng>(
    x: &SecretScalar<C>,
    public: &GroupPoint<C>,
    message: &[u8],
    rng: &mut R,
) -> Result<Signature<C>> {
    for _ in 0..SIGN_ATTEMPTS {
        let k = SecretScalar::random_nonzero(rng);
        match schnorr_sign_inner(x, public, message, &k) {
            Err(Error::DegenerateSignature(_)) => continue,
            other => return other,
        }
    }
    Err(Error::NonceRetriesExhausted(SIGN_ATTEMPTS))
}

#[cfg(any(test, feature = "nonce-injection"))]
pub fn schnorr_sign_with_nonce<C: Curve>(
    x: &SecretScalar<C>,
    public: &GroupPoint<C>,
    message: &[u8],
    k: &SecretScalar<C>,
) -> Result<Signature<C>> {
    schnorr_sign_inner(x, public, message, k)
}

fn schnorr_sign_inner<C: Curve>(
    x: &SecretScalar<C>,
    public: &GroupPoint<C>,
    message: &[u8],
    k: &SecretScalar<C>,
) -> Result<Signature<C>> {
    let x = *x.expose();
    if x.is_zero() {
        return Err(Error::ZeroSecret);
    }
    if x.mul_base() != *public {
        return Err(Error::InconsistentShare);
    }
    let big_r = k.expose().mul_base();
    if big_r.is_identity() {
        return Err(Error::IdentityPoint("nonce commitment R"));
    }
    let e = schnorr_challenge(&big_r, public, message);
    let s = *k.expose() + x * e;
    Signature::new(Scheme::Schnorr, e, s)
}

pub fn schnorr_verify<C: Curve>(public: &GroupPoint<C>, message: &[u8], sig: &Signature<C>) -> bool {
    if sig.scheme != Scheme::Schnorr || public.is_identity() {
        return false;
    }
    let big_r = sig.second.mul_base() - *public * sig.first;
    schnorr_challenge(&big_r, public, message) == sig.first
}
