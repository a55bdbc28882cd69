#![allow(dead_code)]

pub mod scenarios;

use coldsig::keygen::{share_from_secret, KeyShare, Role};
use coldsig::paillier::{self, PaillierKeypair};
use coldsig::{GroupScalar, Policy, Ristretto255, Scheme, Secp256k1, SecretScalar, Transaction};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub const HOT: &str = "hot-wallet-1";

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn tx(i: u64) -> Transaction {
    Transaction {
        version: 1,
        asset: "BTC".into(),
        source_address: "cold-wallet".into(),
        destination_address: HOT.into(),
        amount: 10_000 + i,
        nonce: i,
    }
}

pub fn policy() -> Policy {
    Policy::new([HOT], None).unwrap()
}

pub fn paillier_keypair(bits: u64, seed: u64) -> PaillierKeypair {
    paillier::keygen(bits, &mut rng(seed)).unwrap()
}

/// Gateway and core ECDSA shares with fixed secrets, keys combined.
pub fn ecdsa_pair(
    x1: GroupScalar<Secp256k1>,
    x2: GroupScalar<Secp256k1>,
    kp: PaillierKeypair,
    rng: &mut ChaCha20Rng,
) -> (KeyShare<Secp256k1>, KeyShare<Secp256k1>) {
    let mut g = share_from_secret(Scheme::Ecdsa, Role::Gateway, SecretScalar::new(x1), Some(kp), false, rng).unwrap();
    let mut c = share_from_secret(Scheme::Ecdsa, Role::Core, SecretScalar::new(x2), None, false, rng).unwrap();
    let (pg, pc) = (g.public_share(), c.public_share());
    g.combine_public_key(&pc).unwrap();
    c.combine_public_key(&pg).unwrap();
    (g, c)
}

pub fn schnorr_pair(
    x1: GroupScalar<Ristretto255>,
    x2: GroupScalar<Ristretto255>,
    rng: &mut ChaCha20Rng,
) -> (KeyShare<Ristretto255>, KeyShare<Ristretto255>) {
    let mut g = share_from_secret(Scheme::Schnorr, Role::Gateway, SecretScalar::new(x1), None, false, rng).unwrap();
    let mut c = share_from_secret(Scheme::Schnorr, Role::Core, SecretScalar::new(x2), None, false, rng).unwrap();
    let (pg, pc) = (g.public_share(), c.public_share());
    g.combine_public_key(&pc).unwrap();
    c.combine_public_key(&pg).unwrap();
    (g, c)
}

pub fn contains(hay: &[u8], needle: &[u8]) -> bool {
    !needle.is_empty() && hay.windows(needle.len()).any(|w| w == needle)
}

/// Textbook secp256k1 arithmetic on affine coordinates with plain big
/// integers. Shares no code with the library's curve backend.
pub mod oracle {
    use num_bigint::BigUint;
    use num_traits::Zero;
    use std::sync::LazyLock;

    fn hex(s: &str) -> BigUint {
        BigUint::parse_bytes(s.as_bytes(), 16).unwrap()
    }

    pub static P: LazyLock<BigUint> =
        LazyLock::new(|| hex("fffffffffffffffffffffffffffffffffffffffffffffffffffffffefffffc2f"));
    pub static N: LazyLock<BigUint> =
        LazyLock::new(|| hex("fffffffffffffffffffffffffffffffebaaedce6af48a03bbfd25e8cd0364141"));
    pub static G: LazyLock<Point> = LazyLock::new(|| {
        Some((
            hex("79be667ef9dcbbac55a06295ce870b07029bfcdb2dce28d959f2815b16f81798"),
            hex("483ada7726a3c4655da4fbfc0e1108a8fd17b448a68554199c47d08ffb10d4b8"),
        ))
    });

    /// `None` is the point at infinity.
    pub type Point = Option<(BigUint, BigUint)>;

    fn inv(a: &BigUint, m: &BigUint) -> BigUint {
        a.modpow(&(m - 2u8), m)
    }

    fn sub(a: &BigUint, b: &BigUint, m: &BigUint) -> BigUint {
        ((a + m) - (b % m)) % m
    }

    pub fn add(a: &Point, b: &Point) -> Point {
        let p = &*P;
        let ((x1, y1), (x2, y2)) = match (a, b) {
            (None, _) => return b.clone(),
            (_, None) => return a.clone(),
            (Some(a), Some(b)) => (a, b),
        };
        let lambda = if x1 == x2 {
            if (y1 + y2) % p == BigUint::zero() {
                return None;
            }
            (BigUint::from(3u8) * x1 * x1) % p * inv(&(BigUint::from(2u8) * y1), p) % p
        } else {
            sub(y2, y1, p) * inv(&sub(x2, x1, p), p) % p
        };
        let x3 = sub(&sub(&(&lambda * &lambda), x1, p), x2, p);
        let y3 = sub(&(&lambda * sub(x1, &x3, p)), y1, p);
        Some((x3, y3))
    }

    pub fn mul(k: &BigUint, pt: &Point) -> Point {
        let mut acc: Point = None;
        for i in (0..k.bits()).rev() {
            acc = add(&acc, &acc);
            if k.bit(i) {
                acc = add(&acc, pt);
            }
        }
        acc
    }

    /// SEC1 compressed encoding.
    pub fn encode(pt: &Point) -> Vec<u8> {
        let (x, y) = pt.as_ref().unwrap();
        let mut out = vec![if y.bit(0) { 3 } else { 2 }];
        let xb = x.to_bytes_be();
        out.extend(std::iter::repeat_n(0, 32 - xb.len()));
        out.extend_from_slice(&xb);
        out
    }

    /// `(r, s)` with `s` low-normalized, or `None` if degenerate.
    pub fn ecdsa_sign(x: &BigUint, m: &BigUint, k: &BigUint) -> Option<(BigUint, BigUint)> {
        let n = &*N;
        let (rx, _) = mul(k, &G)?;
        let r = rx % n;
        if r.is_zero() {
            return None;
        }
        let s = inv(k, n) * ((m + &r * x) % n) % n;
        if s.is_zero() {
            return None;
        }
        let s = if &s * 2u8 > *n { n - s } else { s };
        Some((r, s))
    }

    pub fn ecdsa_verify(public: &Point, m: &BigUint, r: &BigUint, s: &BigUint) -> bool {
        let n = &*N;
        if r.is_zero() || s.is_zero() || r >= n || s >= n {
            return false;
        }
        let w = inv(s, n);
        let u1 = m * &w % n;
        let u2 = r * &w % n;
        match add(&mul(&u1, &G), &mul(&u2, public)) {
            Some((x, _)) => (x % n) == *r,
            None => false,
        }
    }

}
