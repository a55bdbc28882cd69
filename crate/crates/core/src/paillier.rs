//! Paillier encryption over `Z*_{n^2}`.
//!
//! The variant used here fixes `g = n + 1` and `λ = (p-1)(q_p-1)` with
//! `μ = λ^{-1} mod n`. `q_p` names the second Paillier prime to keep it apart
//! from the curve order.
//!
//! Ciphertexts produced by [`scalar_mul`] are not re-randomized.

use std::fmt;

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{CryptoRng, RngCore};

use crate::error::{Error, Result};

/// Default modulus size for production keys.
pub const DEFAULT_MODULUS_BITS: u64 = 2048;
/// Smallest modulus accepted by [`keygen`].
pub const MIN_KEYGEN_BITS: u64 = 64;
/// Miller–Rabin rounds for generated primes (error below 2^-80).
pub const PRIME_ROUNDS: usize = 40;

#[derive(Clone, PartialEq, Eq)]
pub struct PaillierPublicKey {
    n: BigUint,
    g: BigUint,
    n_sq: BigUint,
}

impl PaillierPublicKey {
    /// Builds the public key for modulus `n`. Only structural checks are
    /// possible here; the size policy is enforced by callers.
    pub fn from_modulus(n: BigUint) -> Result<Self> {
        if n.bits() < 8 || n.is_even() {
            return Err(Error::InvalidEncoding("Paillier modulus"));
        }
        let g = &n + 1u8;
        let n_sq = &n * &n;
        Ok(PaillierPublicKey { n, g, n_sq })
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn g(&self) -> &BigUint {
        &self.g
    }

    pub fn n_squared(&self) -> &BigUint {
        &self.n_sq
    }

    pub fn bits(&self) -> u64 {
        self.n.bits()
    }
}

impl fmt::Debug for PaillierPublicKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PaillierPublicKey({} bits)", self.n.bits())
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct PaillierSecretKey {
    p: BigUint,
    q_p: BigUint,
    lambda: BigUint,
    mu: BigUint,
}

impl PaillierSecretKey {
    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn q_p(&self) -> &BigUint {
        &self.q_p
    }

    pub fn lambda(&self) -> &BigUint {
        &self.lambda
    }

    pub fn mu(&self) -> &BigUint {
        &self.mu
    }
}

impl fmt::Debug for PaillierSecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("PaillierSecretKey(<redacted>)")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaillierKeypair {
    pub public: PaillierPublicKey,
    pub secret: PaillierSecretKey,
}

impl PaillierKeypair {
    /// Assembles a keypair from two primes. Primality is checked with
    /// Miller–Rabin using a fixed internal witness stream.
    pub fn from_primes(p: BigUint, q_p: BigUint) -> Result<Self> {
        if p == q_p {
            return Err(Error::PaillierPrimesEqual);
        }
        let mut rng = witness_rng(&p, &q_p);
        if !is_probable_prime(&p, PRIME_ROUNDS, &mut rng)
            || !is_probable_prime(&q_p, PRIME_ROUNDS, &mut rng)
        {
            return Err(Error::PaillierNotPrime);
        }
        let n = &p * &q_p;
        let lambda = (&p - 1u8) * (&q_p - 1u8);
        if !n.gcd(&lambda).is_one() {
            return Err(Error::PaillierKeyMismatch);
        }
        let mu = lambda.modinv(&n).ok_or(Error::PaillierKeyMismatch)?;
        Ok(PaillierKeypair {
            public: PaillierPublicKey::from_modulus(n)?,
            secret: PaillierSecretKey { p, q_p, lambda, mu },
        })
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct PaillierCiphertext(BigUint);

impl PaillierCiphertext {
    /// Validates `0 < c < n^2` and `gcd(c, n) = 1`.
    pub fn new(pk: &PaillierPublicKey, c: BigUint) -> Result<Self> {
        if c.is_zero() || c >= pk.n_sq || !c.gcd(&pk.n).is_one() {
            return Err(Error::MalformedCiphertext);
        }
        Ok(PaillierCiphertext(c))
    }

    /// Wraps a value without validation; used for adversarial test inputs.
    #[doc(hidden)]
    pub fn from_raw_unchecked(c: BigUint) -> Self {
        PaillierCiphertext(c)
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }
}

impl fmt::Debug for PaillierCiphertext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PaillierCiphertext({} bits)", self.0.bits())
    }
}

/// Generates a keypair with a modulus of exactly `bits` bits.
pub fn keygen<R: RngCore + CryptoRng>(bits: u64, rng: &mut R) -> Result<PaillierKeypair> {
    if bits < MIN_KEYGEN_BITS {
        return Err(Error::ModulusTooSmall { bits, required: MIN_KEYGEN_BITS });
    }
    let p_bits = bits.div_ceil(2);
    let q_bits = bits / 2;
    loop {
        let p = generate_prime(p_bits, rng);
        let q_p = generate_prime(q_bits, rng);
        if p == q_p {
            continue;
        }
        let n = &p * &q_p;
        let lambda = (&p - 1u8) * (&q_p - 1u8);
        if !n.gcd(&lambda).is_one() {
            continue;
        }
        let mu = lambda.modinv(&n).expect("gcd(n, λ) = 1");
        debug_assert_eq!(n.bits(), bits);
        return Ok(PaillierKeypair {
            public: PaillierPublicKey::from_modulus(n)?,
            secret: PaillierSecretKey { p, q_p, lambda, mu },
        });
    }
}

/// `g^m · r^n mod n^2` with fresh `r ∈ Z*_n`.
pub fn encrypt<R: RngCore + CryptoRng>(
    pk: &PaillierPublicKey,
    m: &BigUint,
    rng: &mut R,
) -> Result<PaillierCiphertext> {
    let r = sample_unit(&pk.n, rng);
    encrypt_with_randomness(pk, m, &r)
}

pub fn encrypt_with_randomness(
    pk: &PaillierPublicKey,
    m: &BigUint,
    r: &BigUint,
) -> Result<PaillierCiphertext> {
    if m >= &pk.n {
        return Err(Error::PlaintextOutOfRange);
    }
    if r.is_zero() || r >= &pk.n || !r.gcd(&pk.n).is_one() {
        return Err(Error::RandomnessNotCoprime);
    }
    // (n+1)^m ≡ 1 + m·n (mod n^2)
    let g_m = (BigUint::one() + m * &pk.n) % &pk.n_sq;
    let r_n = r.modpow(&pk.n, &pk.n_sq);
    Ok(PaillierCiphertext((g_m * r_n) % &pk.n_sq))
}

/// `L(c^λ mod n^2) · μ mod n`, where `L(x) = (x-1)/n` must divide exactly.
pub fn decrypt(
    pk: &PaillierPublicKey,
    sk: &PaillierSecretKey,
    c: &PaillierCiphertext,
) -> Result<BigUint> {
    if &sk.p * &sk.q_p != pk.n {
        return Err(Error::PaillierKeyMismatch);
    }
    let c = &c.0;
    if c.is_zero() || c >= &pk.n_sq || !c.gcd(&pk.n).is_one() {
        return Err(Error::MalformedCiphertext);
    }
    let x = c.modpow(&sk.lambda, &pk.n_sq);
    let (l, rem) = (x - 1u8).div_rem(&pk.n);
    if !rem.is_zero() {
        return Err(Error::MalformedCiphertext);
    }
    Ok((l * &sk.mu) % &pk.n)
}

/// Homomorphic addition: decrypts to `(m1 + m2) mod n`.
pub fn add(
    pk: &PaillierPublicKey,
    c1: &PaillierCiphertext,
    c2: &PaillierCiphertext,
) -> PaillierCiphertext {
    PaillierCiphertext((&c1.0 * &c2.0) % &pk.n_sq)
}

/// Homomorphic scalar multiplication: decrypts to `a·m mod n`.
/// `a = 0` yields the ciphertext `1`, an encryption of zero with no
/// randomness left.
pub fn scalar_mul(pk: &PaillierPublicKey, c: &PaillierCiphertext, a: &BigUint) -> PaillierCiphertext {
    PaillierCiphertext(c.0.modpow(a, &pk.n_sq))
}

fn witness_rng(p: &BigUint, q_p: &BigUint) -> rand_chacha::ChaCha20Rng {
    use rand::SeedableRng;
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    h.update(p.to_bytes_be());
    h.update(q_p.to_bytes_be());
    rand_chacha::ChaCha20Rng::from_seed(h.finalize().into())
}

fn sample_unit<R: RngCore + CryptoRng>(n: &BigUint, rng: &mut R) -> BigUint {
    loop {
        let r = rng.gen_biguint_range(&BigUint::one(), n);
        if r.gcd(n).is_one() {
            return r;
        }
    }
}

const SMALL_PRIME_LIMIT: u32 = 2000;

fn small_primes() -> &'static [u32] {
    static PRIMES: std::sync::LazyLock<Vec<u32>> = std::sync::LazyLock::new(|| {
        let limit = SMALL_PRIME_LIMIT as usize;
        let mut sieve = vec![true; limit];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i < limit {
            if sieve[i] {
                let mut j = i * i;
                while j < limit {
                    sieve[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        (0..limit as u32).filter(|&k| sieve[k as usize]).collect()
    });
    &PRIMES
}

fn mod_small(n: &BigUint, p: u32) -> u32 {
    let p = p as u64;
    n.to_u32_digits()
        .iter()
        .rev()
        .fold(0u64, |acc, &d| ((acc << 32) | d as u64) % p) as u32
}

/// Miller–Rabin with `rounds` random bases, after trial division.
pub fn is_probable_prime<R: RngCore + ?Sized>(n: &BigUint, rounds: usize, rng: &mut R) -> bool {
    let two = BigUint::from(2u8);
    if n < &two {
        return false;
    }
    for &p in small_primes() {
        if n == &BigUint::from(p) {
            return true;
        }
        if mod_small(n, p) == 0 {
            return false;
        }
    }
    let n_minus_one = n - 1u8;
    let s = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> s;
    let upper = n - 2u8;
    'witness: for _ in 0..rounds {
        let a = rng.gen_biguint_range(&two, &upper);
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Random prime of exactly `bits` bits with the top two bits set.
pub fn generate_prime<R: RngCore + CryptoRng>(bits: u64, rng: &mut R) -> BigUint {
    assert!(bits >= 16, "prime size too small");
    const WINDOW: u32 = 1 << 14;
    let primes = small_primes();
    loop {
        let mut base = rng.gen_biguint(bits);
        base.set_bit(bits - 1, true);
        base.set_bit(bits - 2, true);
        base.set_bit(0, true);
        let residues: Vec<u32> = primes.iter().map(|&p| mod_small(&base, p)).collect();
        let mut delta = 0u32;
        while delta < WINDOW {
            let composite = primes
                .iter()
                .zip(&residues)
                .any(|(&p, &r)| (r + delta).is_multiple_of(p));
            if !composite {
                let candidate = &base + delta;
                if candidate.bits() == bits && is_probable_prime(&candidate, PRIME_ROUNDS, rng) {
                    return candidate;
                }
            }
            delta += 2;
        }
    }
}
