use std::sync::LazyLock;

use k256::elliptic_curve::group::Group;
use k256::elliptic_curve::point::AffineCoordinates;
use k256::elliptic_curve::sec1::{FromEncodedPoint, ToEncodedPoint};
use k256::elliptic_curve::{Field, PrimeField};
use k256::{AffinePoint, EncodedPoint, FieldBytes, ProjectivePoint, Scalar};
use num_bigint::BigUint;
use rand::{CryptoRng, RngCore};

use super::{Curve, CurveId, EcdsaCurve};

static ORDER: LazyLock<BigUint> = LazyLock::new(|| {
    BigUint::parse_bytes(
        b"fffffffffffffffffffffffffffffffebaaedce6af48a03bbfd25e8cd0364141",
        16,
    )
    .unwrap()
});

/// secp256k1 backed by `k256`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Secp256k1;

impl Curve for Secp256k1 {
    type Scalar = Scalar;
    type Point = ProjectivePoint;

    const ID: CurveId = CurveId::Secp256k1;
    const POINT_LEN: usize = 33;

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
        Option::from(Scalar::from_repr(FieldBytes::from(*bytes)))
    }

    fn scalar_to_be_bytes(s: &Scalar) -> [u8; 32] {
        s.to_bytes().into()
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
        Option::from(a.invert())
    }

    fn scalar_random<R: RngCore + CryptoRng>(rng: &mut R) -> Scalar {
        Scalar::random(rng)
    }

    fn generator() -> ProjectivePoint {
        ProjectivePoint::GENERATOR
    }

    fn identity() -> ProjectivePoint {
        ProjectivePoint::IDENTITY
    }

    fn point_add(a: &ProjectivePoint, b: &ProjectivePoint) -> ProjectivePoint {
        a + b
    }

    fn point_sub(a: &ProjectivePoint, b: &ProjectivePoint) -> ProjectivePoint {
        a - b
    }

    fn point_mul(p: &ProjectivePoint, s: &Scalar) -> ProjectivePoint {
        p * s
    }

    fn mul_base(s: &Scalar) -> ProjectivePoint {
        ProjectivePoint::GENERATOR * s
    }

    fn point_encode(p: &ProjectivePoint) -> Vec<u8> {
        p.to_affine().to_encoded_point(true).as_bytes().to_vec()
    }

    fn point_decode(bytes: &[u8]) -> Option<ProjectivePoint> {
        let encoded = EncodedPoint::from_bytes(bytes).ok()?;
        if encoded.is_compressed() {
            Option::<AffinePoint>::from(AffinePoint::from_encoded_point(&encoded))
                .map(ProjectivePoint::from)
        } else {
            None
        }
    }
}

impl EcdsaCurve for Secp256k1 {
    fn x_coordinate(p: &ProjectivePoint) -> Option<[u8; 32]> {
        if bool::from(p.is_identity()) {
            return None;
        }
        Some(p.to_affine().x().into())
    }
}
