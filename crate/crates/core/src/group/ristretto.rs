use std::sync::LazyLock;

use curve25519_dalek::constants::{RISTRETTO_BASEPOINT_POINT, RISTRETTO_BASEPOINT_TABLE};
use curve25519_dalek::ristretto::{CompressedRistretto, RistrettoPoint};
use curve25519_dalek::scalar::Scalar;
use curve25519_dalek::traits::Identity;
use num_bigint::BigUint;
use rand::{CryptoRng, RngCore};

use super::{Curve, CurveId};

// l = 2^252 + 27742317777372353535851937790883648493
static ORDER: LazyLock<BigUint> = LazyLock::new(|| {
    BigUint::parse_bytes(
        b"1000000000000000000000000000000014def9dea2f79cd65812631a5cf5d3ed",
        16,
    )
    .unwrap()
});

/// ristretto255 backed by `curve25519-dalek`. Scalars are converted to
/// big-endian at the boundary; dalek stores them little-endian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ristretto255;

fn reversed(bytes: &[u8; 32]) -> [u8; 32] {
    let mut out = *bytes;
    out.reverse();
    out
}

impl Curve for Ristretto255 {
    type Scalar = Scalar;
    type Point = RistrettoPoint;

    const ID: CurveId = CurveId::Ristretto255;
    const POINT_LEN: usize = 32;

    fn order() -> &'static BigUint {
        &ORDER
    }

    fn scalar_zero() -> Scalar {
        Scalar::ZERO
    }

    fn scalar_one() -> Scalar {
        Scalar::ONE
    }

    fn scalar_from_be_bytes(bytes: &[u8; 32]) -> Option<Scalar> {
        Option::from(Scalar::from_canonical_bytes(reversed(bytes)))
    }

    fn scalar_to_be_bytes(s: &Scalar) -> [u8; 32] {
        reversed(s.as_bytes())
    }

    fn scalar_add(a: &Scalar, b: &Scalar) -> Scalar {
        a + b
    }

    fn scalar_sub(a: &Scalar, b: &Scalar) -> Scalar {
        a - b
    }

    fn scalar_mul(a: &Scalar, b: &Scalar) -> Scalar {
        a * b
    }

    fn scalar_neg(a: &Scalar) -> Scalar {
        -a
    }

    fn scalar_invert(a: &Scalar) -> Option<Scalar> {
        if *a == Scalar::ZERO {
            None
        } else {
            Some(a.invert())
        }
    }

    fn scalar_random<R: RngCore + CryptoRng>(rng: &mut R) -> Scalar {
        Scalar::random(rng)
    }

    fn generator() -> RistrettoPoint {
        RISTRETTO_BASEPOINT_POINT
    }

    fn identity() -> RistrettoPoint {
        RistrettoPoint::identity()
    }

    fn point_add(a: &RistrettoPoint, b: &RistrettoPoint) -> RistrettoPoint {
        a + b
    }

    fn point_sub(a: &RistrettoPoint, b: &RistrettoPoint) -> RistrettoPoint {
        a - b
    }

    fn point_mul(p: &RistrettoPoint, s: &Scalar) -> RistrettoPoint {
        p * s
    }

    fn mul_base(s: &Scalar) -> RistrettoPoint {
        s * RISTRETTO_BASEPOINT_TABLE
    }

    fn point_encode(p: &RistrettoPoint) -> Vec<u8> {
        if *p == RistrettoPoint::identity() {
            return vec![0];
        }
        p.compress().to_bytes().to_vec()
    }

    fn point_decode(bytes: &[u8]) -> Option<RistrettoPoint> {
        CompressedRistretto::from_slice(bytes).ok()?.decompress()
    }
}
