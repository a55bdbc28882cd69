//! Share and session files.
//!
//! ```text
//! magic [4] | version u8 | scheme u8 | role u8 | protection u8
//! protection 1: m_cost u32 | t_cost u32 | p_cost u32 | salt [16] | nonce [12]
//! body
//! ```
//!
//! With protection 0 the body is stored as is. With protection 1 it is
//! sealed with ChaCha20-Poly1305 under an Argon2id key derived from the
//! passphrase, and the whole header is bound as associated data. Files are
//! written to a temporary sibling and renamed into place.

use std::fs;
use std::io::{ErrorKind, Write};
use std::path::Path;

use argon2::{Algorithm, Argon2, Params, Version};
use chacha20poly1305::aead::{Aead, KeyInit, Payload};
use chacha20poly1305::{ChaCha20Poly1305, Key, Nonce};
use num_bigint::BigUint;
use rand::{CryptoRng, RngCore};

use super::codec::{put_bytes, Reader};
use crate::error::{Error, Result};
use crate::group::{Curve, GroupPoint, GroupScalar, SecretScalar};
use crate::keygen::{KeyShare, Role};
use crate::paillier::{PaillierCiphertext, PaillierKeypair};
use crate::sign::{Phase, SessionId, SigningSession};
use crate::transaction::Transaction;
use crate::Scheme;

pub const SHARE_MAGIC: [u8; 4] = *b"CWSK";
pub const SESSION_MAGIC: [u8; 4] = *b"CWSS";
const FILE_VERSION: u8 = 1;
const PLAIN: u8 = 0;
const SEALED: u8 = 1;
const SALT_LEN: usize = 16;
const NONCE_LEN: usize = 12;
/// Bound on any length-prefixed value inside a body.
const MAX_ITEM: usize = 1 << 16;

const FLAG_SHARED: u8 = 1;
const FLAG_RECOVERABLE: u8 = 2;
const FLAG_PAILLIER: u8 = 4;

/// Argon2id cost parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KdfParams {
    /// Memory in KiB.
    pub m_cost: u32,
    pub t_cost: u32,
    pub p_cost: u32,
}

impl Default for KdfParams {
    fn default() -> Self {
        KdfParams { m_cost: 19 * 1024, t_cost: 2, p_cost: 1 }
    }
}

impl KdfParams {
    /// Minimal costs, for tests only.
    pub fn insecure_fast() -> Self {
        KdfParams { m_cost: 64, t_cost: 1, p_cost: 1 }
    }

    fn derive(&self, passphrase: &str, salt: &[u8]) -> Result<Key> {
        let params = Params::new(self.m_cost, self.t_cost, self.p_cost, Some(32))
            .map_err(|e| Error::Kdf(e.to_string()))?;
        let mut key = Key::default();
        Argon2::new(Algorithm::Argon2id, Version::V0x13, params)
            .hash_password_into(passphrase.as_bytes(), salt, &mut key)
            .map_err(|e| Error::Kdf(e.to_string()))?;
        Ok(key)
    }
}

/// The unencrypted prefix of a share or session file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShareHeader {
    pub scheme: Scheme,
    pub role: Role,
    pub protected: bool,
}

struct Parsed<'a> {
    header: ShareHeader,
    header_bytes: &'a [u8],
    sealing: Option<(KdfParams, &'a [u8], &'a [u8])>,
    body: &'a [u8],
}

fn parse_file<'a>(bytes: &'a [u8], magic: [u8; 4]) -> Result<Parsed<'a>> {
    let mut r = Reader::new(bytes);
    if r.take(4).map_err(|_| Error::BadMagic)? != magic {
        return Err(Error::BadMagic);
    }
    let version = r.u8()?;
    if version != FILE_VERSION {
        return Err(Error::VersionMismatch(version));
    }
    let scheme_code = r.u8()?;
    let scheme = Scheme::from_code(scheme_code).ok_or(Error::UnknownScheme(scheme_code))?;
    let role = Role::from_code(r.u8()?).ok_or(Error::InvalidEncoding("role"))?;
    let sealing = match r.u8()? {
        PLAIN => None,
        SEALED => {
            let kdf = KdfParams { m_cost: r.u32()?, t_cost: r.u32()?, p_cost: r.u32()? };
            Some((kdf, r.take(SALT_LEN)?, r.take(NONCE_LEN)?))
        }
        _ => return Err(Error::InvalidEncoding("protection mode")),
    };
    let split = r.position();
    Ok(Parsed {
        header: ShareHeader { scheme, role, protected: sealing.is_some() },
        header_bytes: &bytes[..split],
        sealing,
        body: &bytes[split..],
    })
}

/// Reads only the header, so callers can pick the curve before loading.
pub fn read_share_header(path: &Path) -> Result<ShareHeader> {
    let bytes = read_file(path)?;
    Ok(parse_file(&bytes, SHARE_MAGIC)?.header)
}

fn seal<R: RngCore + CryptoRng>(
    magic: [u8; 4],
    scheme: Scheme,
    role: Role,
    body: &[u8],
    passphrase: Option<&str>,
    kdf: &KdfParams,
    rng: &mut R,
) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(body.len() + 64);
    out.extend_from_slice(&magic);
    out.extend_from_slice(&[FILE_VERSION, scheme.code(), role.code()]);
    let Some(passphrase) = passphrase else {
        out.push(PLAIN);
        out.extend_from_slice(body);
        return Ok(out);
    };
    let mut salt = [0u8; SALT_LEN];
    let mut nonce = [0u8; NONCE_LEN];
    rng.fill_bytes(&mut salt);
    rng.fill_bytes(&mut nonce);
    out.push(SEALED);
    for v in [kdf.m_cost, kdf.t_cost, kdf.p_cost] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(&salt);
    out.extend_from_slice(&nonce);
    let cipher = ChaCha20Poly1305::new(&kdf.derive(passphrase, &salt)?);
    let sealed = cipher
        .encrypt(Nonce::from_slice(&nonce), Payload { msg: body, aad: &out })
        .map_err(|_| Error::AuthenticationFailed)?;
    out.extend_from_slice(&sealed);
    Ok(out)
}

fn open(parsed: &Parsed<'_>, passphrase: Option<&str>) -> Result<Vec<u8>> {
    let Some((kdf, salt, nonce)) = parsed.sealing else {
        return Ok(parsed.body.to_vec());
    };
    let passphrase = passphrase.ok_or(Error::AuthenticationFailed)?;
    let cipher = ChaCha20Poly1305::new(&kdf.derive(passphrase, salt)?);
    cipher
        .decrypt(Nonce::from_slice(nonce), Payload { msg: parsed.body, aad: parsed.header_bytes })
        .map_err(|_| Error::AuthenticationFailed)
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| match e.kind() {
        ErrorKind::NotFound => Error::NotFound(path.display().to_string()),
        _ => Error::Io(e),
    })
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn scalar<C: Curve>(r: &mut Reader<'_>) -> Result<GroupScalar<C>> {
    GroupScalar::from_be_bytes(&r.array()?).ok_or(Error::InvalidEncoding("scalar"))
}

fn point<C: Curve>(r: &mut Reader<'_>) -> Result<GroupPoint<C>> {
    GroupPoint::decode(r.bytes(MAX_ITEM)?).ok_or(Error::InvalidEncoding("point"))
}

fn big(r: &mut Reader<'_>) -> Result<BigUint> {
    Ok(BigUint::from_bytes_be(r.bytes(MAX_ITEM)?))
}

fn check_header<C: Curve>(header: &ShareHeader) -> Result<()> {
    if header.scheme.curve_id() != C::ID {
        return Err(Error::SchemeMismatch {
            expected: header.scheme,
            found: match C::ID {
                crate::CurveId::Secp256k1 => Scheme::Ecdsa,
                crate::CurveId::Ristretto255 => Scheme::Schnorr,
            },
        });
    }
    Ok(())
}

/// Writes `share`, sealed if a passphrase is given. Overwrites `path`.
pub fn save_share<C: Curve, R: RngCore + CryptoRng>(
    path: &Path,
    share: &KeyShare<C>,
    passphrase: Option<&str>,
    kdf: &KdfParams,
    rng: &mut R,
) -> Result<()> {
    let mut body = Vec::new();
    body.extend_from_slice(&share.secret_share().expose().to_be_bytes());
    let mut flags = 0;
    if share.shared_public().is_some() {
        flags |= FLAG_SHARED;
    }
    if share.is_recoverable() {
        flags |= FLAG_RECOVERABLE;
    }
    if share.paillier().is_some() {
        flags |= FLAG_PAILLIER;
    }
    body.push(flags);
    if let Some(p) = share.shared_public() {
        put_bytes(&mut body, &p.encode());
    }
    if let (Some(kp), Some(c_key)) = (share.paillier(), share.encrypted_secret()) {
        put_bytes(&mut body, &kp.secret.p().to_bytes_be());
        put_bytes(&mut body, &kp.secret.q_p().to_bytes_be());
        put_bytes(&mut body, &c_key.value().to_bytes_be());
    }
    let file = seal(SHARE_MAGIC, share.scheme(), share.role(), &body, passphrase, kdf, rng)?;
    write_atomic(path, &file)
}

/// Loads and re-validates a share written by [`save_share`].
pub fn load_share<C: Curve>(path: &Path, passphrase: Option<&str>) -> Result<KeyShare<C>> {
    let bytes = read_file(path)?;
    let parsed = parse_file(&bytes, SHARE_MAGIC)?;
    check_header::<C>(&parsed.header)?;
    let body = open(&parsed, passphrase)?;
    let mut r = Reader::new(&body);
    let secret = SecretScalar::new(scalar::<C>(&mut r)?);
    let flags = r.u8()?;
    if flags & !(FLAG_SHARED | FLAG_RECOVERABLE | FLAG_PAILLIER) != 0 {
        return Err(Error::InvalidEncoding("share flags"));
    }
    let shared = if flags & FLAG_SHARED != 0 { Some(point::<C>(&mut r)?) } else { None };
    let paillier = if flags & FLAG_PAILLIER != 0 {
        let kp = PaillierKeypair::from_primes(big(&mut r)?, big(&mut r)?)?;
        let c_key = PaillierCiphertext::new(&kp.public, big(&mut r)?)?;
        Some((kp, c_key))
    } else {
        None
    };
    r.finish()?;
    KeyShare::from_parts(
        parsed.header.scheme,
        parsed.header.role,
        secret,
        shared,
        paillier,
        flags & FLAG_RECOVERABLE != 0,
    )
}

/// Writes an initiator's signing session. The nonce, if still present, is
/// secret, so sealing follows the same rules as for shares.
pub fn save_session<C: Curve, R: RngCore + CryptoRng>(
    path: &Path,
    session: &SigningSession<C>,
    passphrase: Option<&str>,
    kdf: &KdfParams,
    rng: &mut R,
) -> Result<()> {
    let mut body = Vec::new();
    body.extend_from_slice(&session.id().0);
    body.push(session.phase().code());
    match session.nonce() {
        Some(k) => {
            body.push(1);
            body.extend_from_slice(&k.expose().to_be_bytes());
        }
        None => body.push(0),
    }
    put_bytes(&mut body, &session.commitment().encode());
    put_bytes(&mut body, &session.wallet_key().encode());
    put_bytes(&mut body, &session.transaction().canonical_bytes()?);
    let file = seal(SESSION_MAGIC, session.scheme(), session.role(), &body, passphrase, kdf, rng)?;
    write_atomic(path, &file)
}

pub fn load_session<C: Curve>(path: &Path, passphrase: Option<&str>) -> Result<SigningSession<C>> {
    let bytes = read_file(path)?;
    let parsed = parse_file(&bytes, SESSION_MAGIC)?;
    check_header::<C>(&parsed.header)?;
    let body = open(&parsed, passphrase)?;
    let mut r = Reader::new(&body);
    let id = SessionId(r.array()?);
    let phase_code = r.u8()?;
    let phase = Phase::from_code(phase_code).ok_or(Error::InvalidEncoding("session phase"))?;
    let nonce = match r.u8()? {
        0 => None,
        1 => Some(SecretScalar::new(scalar::<C>(&mut r)?)),
        _ => return Err(Error::InvalidEncoding("session nonce flag")),
    };
    let commitment = point::<C>(&mut r)?;
    let wallet_key = point::<C>(&mut r)?;
    let tx = Transaction::from_canonical_bytes(r.bytes(MAX_ITEM * 4)?)?;
    r.finish()?;
    SigningSession::from_parts(
        parsed.header.scheme,
        parsed.header.role,
        id,
        phase,
        nonce,
        commitment,
        tx,
        wallet_key,
    )
}
