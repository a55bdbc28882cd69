//! Prime-order group abstraction.
//!
//! Protocol code is written against [`Curve`]; two backends are provided:
//! [`Secp256k1`] (used for ECDSA) and [`Ristretto255`] (used for Schnorr).
//! Scalars travel as 32-byte big-endian integers and points use the curve's
//! canonical compressed encoding (33 bytes SEC1 for secp256k1, 32 bytes for
//! ristretto255).

mod ristretto;
mod secp256k1;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigUint;
use rand::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};

pub use ristretto::Ristretto255;
pub use secp256k1::Secp256k1;

/// Wire identifier of a supported group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurveId {
    Secp256k1,
    Ristretto255,
}

impl CurveId {
    pub fn name(self) -> &'static str {
        match self {
            CurveId::Secp256k1 => "secp256k1",
            CurveId::Ristretto255 => "ristretto255",
        }
    }
}

/// Backend operations for a prime-order group.
///
/// Implementations must reject non-canonical scalar encodings and any point
/// encoding that does not decode to a group element.
pub trait Curve: Copy + Clone + fmt::Debug + PartialEq + Eq + Send + Sync + 'static {
    type Scalar: Copy + Clone + PartialEq + Eq + Send + Sync;
    type Point: Copy + Clone + PartialEq + Eq + Send + Sync;

    const ID: CurveId;
    /// Length of an encoded non-identity point.
    const POINT_LEN: usize;

    /// Group order `q`.
    fn order() -> &'static BigUint;

    fn scalar_zero() -> Self::Scalar;
    fn scalar_one() -> Self::Scalar;
    fn scalar_from_be_bytes(bytes: &[u8; 32]) -> Option<Self::Scalar>;
    fn scalar_to_be_bytes(s: &Self::Scalar) -> [u8; 32];
    fn scalar_add(a: &Self::Scalar, b: &Self::Scalar) -> Self::Scalar;
    fn scalar_sub(a: &Self::Scalar, b: &Self::Scalar) -> Self::Scalar;
    fn scalar_mul(a: &Self::Scalar, b: &Self::Scalar) -> Self::Scalar;
    fn scalar_neg(a: &Self::Scalar) -> Self::Scalar;
    /// `None` for zero.
    fn scalar_invert(a: &Self::Scalar) -> Option<Self::Scalar>;
    fn scalar_random<R: RngCore + CryptoRng>(rng: &mut R) -> Self::Scalar;

    fn generator() -> Self::Point;
    fn identity() -> Self::Point;
    fn point_add(a: &Self::Point, b: &Self::Point) -> Self::Point;
    fn point_sub(a: &Self::Point, b: &Self::Point) -> Self::Point;
    fn point_mul(p: &Self::Point, s: &Self::Scalar) -> Self::Point;
    fn mul_base(s: &Self::Scalar) -> Self::Point;
    /// Canonical encoding; the identity encodes to a single zero byte.
    fn point_encode(p: &Self::Point) -> Vec<u8>;
    fn point_decode(bytes: &[u8]) -> Option<Self::Point>;
}

/// Curves whose points expose an affine x-coordinate, as ECDSA requires.
pub trait EcdsaCurve: Curve {
    /// Big-endian affine x-coordinate; `None` for the identity.
    fn x_coordinate(p: &Self::Point) -> Option<[u8; 32]>;
}

/// Public description of a group: identifier, order and generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupParams {
    pub curve_id: CurveId,
    pub q: BigUint,
    pub generator: Vec<u8>,
}

impl GroupParams {
    pub fn of<C: Curve>() -> Self {
        GroupParams {
            curve_id: C::ID,
            q: C::order().clone(),
            generator: C::point_encode(&C::generator()),
        }
    }

    pub fn order_bits(&self) -> u64 {
        self.q.bits()
    }
}

/// Element of `Z_q`.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct GroupScalar<C: Curve>(pub(crate) C::Scalar);

impl<C: Curve> GroupScalar<C> {
    pub fn zero() -> Self {
        GroupScalar(C::scalar_zero())
    }

    pub fn one() -> Self {
        GroupScalar(C::scalar_one())
    }

    pub fn from_u64(v: u64) -> Self {
        Self::from_biguint_reduced(&BigUint::from(v))
    }

    /// Uniform in `[0, q)`.
    pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        GroupScalar(C::scalar_random(rng))
    }

    /// Uniform in `[1, q)`.
    pub fn random_nonzero<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        loop {
            let s = Self::random(rng);
            if !s.is_zero() {
                return s;
            }
        }
    }

    /// Canonical decoding; rejects values `>= q`.
    pub fn from_be_bytes(bytes: &[u8; 32]) -> Option<Self> {
        C::scalar_from_be_bytes(bytes).map(GroupScalar)
    }

    pub fn from_be_slice(bytes: &[u8]) -> Option<Self> {
        let arr: &[u8; 32] = bytes.try_into().ok()?;
        Self::from_be_bytes(arr)
    }

    pub fn to_be_bytes(&self) -> [u8; 32] {
        C::scalar_to_be_bytes(&self.0)
    }

    pub fn from_biguint_reduced(v: &BigUint) -> Self {
        let reduced = v % C::order();
        let raw = reduced.to_bytes_be();
        let mut buf = [0u8; 32];
        buf[32 - raw.len()..].copy_from_slice(&raw);
        Self::from_be_bytes(&buf).expect("reduced value is canonical")
    }

    pub fn to_biguint(&self) -> BigUint {
        BigUint::from_bytes_be(&self.to_be_bytes())
    }

    pub fn is_zero(&self) -> bool {
        self.0 == C::scalar_zero()
    }

    pub fn invert(&self) -> Option<Self> {
        C::scalar_invert(&self.0).map(GroupScalar)
    }

    /// `self · G`.
    pub fn mul_base(&self) -> GroupPoint<C> {
        GroupPoint(C::mul_base(&self.0))
    }
}

impl<C: Curve> fmt::Debug for GroupScalar<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupScalar({})", hex::encode(self.to_be_bytes()))
    }
}

impl<C: Curve> Add for GroupScalar<C> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        GroupScalar(C::scalar_add(&self.0, &rhs.0))
    }
}

impl<C: Curve> Sub for GroupScalar<C> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        GroupScalar(C::scalar_sub(&self.0, &rhs.0))
    }
}

impl<C: Curve> Mul for GroupScalar<C> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        GroupScalar(C::scalar_mul(&self.0, &rhs.0))
    }
}

impl<C: Curve> Neg for GroupScalar<C> {
    type Output = Self;
    fn neg(self) -> Self {
        GroupScalar(C::scalar_neg(&self.0))
    }
}

impl<C: Curve> Mul<GroupPoint<C>> for GroupScalar<C> {
    type Output = GroupPoint<C>;
    fn mul(self, rhs: GroupPoint<C>) -> GroupPoint<C> {
        GroupPoint(C::point_mul(&rhs.0, &self.0))
    }
}

/// Group element.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct GroupPoint<C: Curve>(pub(crate) C::Point);

impl<C: Curve> GroupPoint<C> {
    pub fn generator() -> Self {
        GroupPoint(C::generator())
    }

    pub fn identity() -> Self {
        GroupPoint(C::identity())
    }

    pub fn is_identity(&self) -> bool {
        self.0 == C::identity()
    }

    pub fn encode(&self) -> Vec<u8> {
        C::point_encode(&self.0)
    }

    /// Decodes a non-identity point.
    pub fn decode(bytes: &[u8]) -> Option<Self> {
        if bytes.len() != C::POINT_LEN {
            return None;
        }
        C::point_decode(bytes).map(GroupPoint).filter(|p| !p.is_identity())
    }
}

impl<C: EcdsaCurve> GroupPoint<C> {
    pub fn x_coordinate(&self) -> Option<[u8; 32]> {
        C::x_coordinate(&self.0)
    }
}

impl<C: Curve> fmt::Debug for GroupPoint<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupPoint({})", hex::encode(self.encode()))
    }
}

impl<C: Curve> Add for GroupPoint<C> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        GroupPoint(C::point_add(&self.0, &rhs.0))
    }
}

impl<C: Curve> Sub for GroupPoint<C> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        GroupPoint(C::point_sub(&self.0, &rhs.0))
    }
}

impl<C: Curve> Mul<GroupScalar<C>> for GroupPoint<C> {
    type Output = Self;
    fn mul(self, rhs: GroupScalar<C>) -> Self {
        GroupPoint(C::point_mul(&self.0, &rhs.0))
    }
}

/// A scalar that must never leave its owner's device.
///
/// Has no serializer and a redacted `Debug`; the raw value is reachable only
/// through [`SecretScalar::expose`].
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct SecretScalar<C: Curve>(GroupScalar<C>);

impl<C: Curve> SecretScalar<C> {
    pub fn new(s: GroupScalar<C>) -> Self {
        SecretScalar(s)
    }

    pub fn random_nonzero<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        SecretScalar(GroupScalar::random_nonzero(rng))
    }

    pub fn expose(&self) -> &GroupScalar<C> {
        &self.0
    }
}

impl<C: Curve> fmt::Debug for SecretScalar<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SecretScalar(<redacted>)")
    }
}

/// `SHA-256(data)` read as a big-endian integer, reduced mod `q`.
pub fn hash_to_scalar<C: Curve>(data: &[u8]) -> GroupScalar<C> {
    let digest = Sha256::digest(data);
    GroupScalar::from_biguint_reduced(&BigUint::from_bytes_be(&digest))
}
