//! Air-gap envelope format and at-rest storage.
//!
//! Envelope layout (all integers big-endian):
//!
//! ```text
//! magic "CWv1" | version u8 | scheme u8 | msg_type u8 | session_id [16]
//! field_count u8 | { tag u8 | len u32 | value[len] } * field_count
//! checksum [4] = SHA-256(all preceding bytes)[..4]
//! ```
//!
//! Each `(scheme, msg_type)` pair admits exactly one set of tags, and every
//! tag in the set is mandatory. Values: scalars are 32-byte big-endian,
//! points use the curve's compressed encoding, Paillier integers are
//! minimal big-endian magnitudes, transactions are their canonical bytes.

mod codec;
mod store;

use std::io::Read;

use flate2::read::{DeflateDecoder, DeflateEncoder};
use flate2::Compression;
use num_bigint::BigUint;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::group::{Curve, GroupPoint, GroupScalar, Ristretto255, Secp256k1};
use crate::paillier::{PaillierCiphertext, PaillierPublicKey};
use crate::sign::{EcdsaSignMsg1, EcdsaSignMsg2, SchnorrSignMsg1, SchnorrSignMsg2, SessionId};
use crate::transaction::Transaction;
use crate::Scheme;

pub use store::{
    load_session, load_share, read_share_header, save_session, save_share, KdfParams,
    ShareHeader, SESSION_MAGIC, SHARE_MAGIC,
};

pub const MAGIC: [u8; 4] = *b"CWv1";
pub const PROTOCOL_VERSION: u8 = 1;
/// Cap on any single length field.
pub const MAX_FIELD_LEN: usize = 1 << 20;
/// magic + version + scheme + msg_type.
pub const HEADER_LEN: usize = 7;
pub const CHECKSUM_LEN: usize = 4;
/// Framing bytes excluding per-field TLV headers.
pub const FIXED_OVERHEAD: usize = HEADER_LEN + 16 + 1 + CHECKSUM_LEN;
/// Tag byte plus length word.
pub const FIELD_HEADER_LEN: usize = 5;

pub const COMPRESSED_MAGIC: [u8; 4] = *b"CWz1";
/// Bound on inflated size.
const MAX_INFLATED: u64 = 4 * MAX_FIELD_LEN as u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MsgType {
    KeygenPub,
    SignMsg1,
    SignMsg2,
}

impl MsgType {
    pub fn code(self) -> u8 {
        match self {
            MsgType::KeygenPub => 1,
            MsgType::SignMsg1 => 2,
            MsgType::SignMsg2 => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(MsgType::KeygenPub),
            2 => Some(MsgType::SignMsg1),
            3 => Some(MsgType::SignMsg2),
            _ => None,
        }
    }
}

/// Field tags.
pub mod tag {
    pub const PUBLIC_SHARE: u8 = 0x01;
    pub const TRANSACTION: u8 = 0x10;
    pub const MESSAGE_HASH: u8 = 0x11;
    pub const PAILLIER_MODULUS: u8 = 0x12;
    pub const ENCRYPTED_KEY: u8 = 0x13;
    pub const NONCE_POINT_1: u8 = 0x14;
    pub const C3: u8 = 0x20;
    pub const NONCE_POINT_2: u8 = 0x21;
    pub const PARTIAL_S: u8 = 0x22;
}

/// The exact tag set for a message kind, in encoding order.
pub fn allowed_tags(scheme: Scheme, msg_type: MsgType) -> &'static [u8] {
    use tag::*;
    match (scheme, msg_type) {
        (_, MsgType::KeygenPub) => &[PUBLIC_SHARE],
        (Scheme::Ecdsa, MsgType::SignMsg1) => {
            &[TRANSACTION, MESSAGE_HASH, PAILLIER_MODULUS, ENCRYPTED_KEY, NONCE_POINT_1]
        }
        (Scheme::Schnorr, MsgType::SignMsg1) => &[TRANSACTION, NONCE_POINT_1],
        (Scheme::Ecdsa, MsgType::SignMsg2) => &[C3, NONCE_POINT_2],
        (Scheme::Schnorr, MsgType::SignMsg2) => &[PARTIAL_S, NONCE_POINT_2],
    }
}

/// A protocol message, bound to its scheme's curve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    KeygenEcdsa(GroupPoint<Secp256k1>),
    KeygenSchnorr(GroupPoint<Ristretto255>),
    /// The raw transaction travels next to the four ECDSA items so the core
    /// can recompute `m`.
    EcdsaRequest { tx: Transaction, msg: EcdsaSignMsg1<Secp256k1> },
    EcdsaResponse(EcdsaSignMsg2<Secp256k1>),
    SchnorrRequest(SchnorrSignMsg1<Ristretto255>),
    SchnorrResponse(SchnorrSignMsg2<Ristretto255>),
}

impl Message {
    pub fn scheme(&self) -> Scheme {
        match self {
            Message::KeygenEcdsa(_) | Message::EcdsaRequest { .. } | Message::EcdsaResponse(_) => {
                Scheme::Ecdsa
            }
            Message::KeygenSchnorr(_)
            | Message::SchnorrRequest(_)
            | Message::SchnorrResponse(_) => Scheme::Schnorr,
        }
    }

    pub fn msg_type(&self) -> MsgType {
        match self {
            Message::KeygenEcdsa(_) | Message::KeygenSchnorr(_) => MsgType::KeygenPub,
            Message::EcdsaRequest { .. } | Message::SchnorrRequest(_) => MsgType::SignMsg1,
            Message::EcdsaResponse(_) | Message::SchnorrResponse(_) => MsgType::SignMsg2,
        }
    }

    fn fields(&self) -> Result<Vec<(u8, Vec<u8>)>> {
        use tag::*;
        Ok(match self {
            Message::KeygenEcdsa(p) => vec![(PUBLIC_SHARE, point(p)?)],
            Message::KeygenSchnorr(p) => vec![(PUBLIC_SHARE, point(p)?)],
            Message::EcdsaRequest { tx, msg } => vec![
                (TRANSACTION, tx.canonical_bytes()?),
                (MESSAGE_HASH, msg.m.to_be_bytes().to_vec()),
                (PAILLIER_MODULUS, msg.pk.n().to_bytes_be()),
                (ENCRYPTED_KEY, msg.c_key.value().to_bytes_be()),
                (NONCE_POINT_1, point(&msg.r1)?),
            ],
            Message::EcdsaResponse(msg) => vec![
                (C3, msg.c3.value().to_bytes_be()),
                (NONCE_POINT_2, point(&msg.r2)?),
            ],
            Message::SchnorrRequest(msg) => vec![
                (TRANSACTION, msg.tx.canonical_bytes()?),
                (NONCE_POINT_1, point(&msg.r1)?),
            ],
            Message::SchnorrResponse(msg) => vec![
                (PARTIAL_S, msg.s2.to_be_bytes().to_vec()),
                (NONCE_POINT_2, point(&msg.r2)?),
            ],
        })
    }
}

fn point<C: Curve>(p: &GroupPoint<C>) -> Result<Vec<u8>> {
    if p.is_identity() {
        return Err(Error::IdentityPoint("envelope point"));
    }
    Ok(p.encode())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Envelope {
    pub session_id: SessionId,
    pub message: Message,
}

impl Envelope {
    pub fn new(session_id: SessionId, message: Message) -> Self {
        Envelope { session_id, message }
    }

    pub fn encode(&self) -> Result<Vec<u8>> {
        encode_envelope(self)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        decode_envelope(bytes)
    }
}

/// Framed but untyped envelope; tags have been checked against the
/// whitelist for its `(scheme, msg_type)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawEnvelope {
    pub scheme: Scheme,
    pub msg_type: MsgType,
    pub session_id: SessionId,
    pub fields: Vec<(u8, Vec<u8>)>,
}

impl RawEnvelope {
    pub fn field(&self, tag: u8) -> Option<&[u8]> {
        self.fields.iter().find(|(t, _)| *t == tag).map(|(_, v)| v.as_slice())
    }

    pub fn value_len(&self) -> usize {
        self.fields.iter().map(|(_, v)| v.len()).sum()
    }

    /// Framing bytes: header, session id, count, TLV headers, checksum.
    pub fn framing_len(&self) -> usize {
        FIXED_OVERHEAD + FIELD_HEADER_LEN * self.fields.len()
    }

    pub fn encoded_len(&self) -> usize {
        self.framing_len() + self.value_len()
    }

    pub fn encode(&self) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(&MAGIC);
        out.push(PROTOCOL_VERSION);
        out.push(self.scheme.code());
        out.push(self.msg_type.code());
        out.extend_from_slice(&self.session_id.0);
        let count = u8::try_from(self.fields.len()).map_err(|_| Error::OversizeField(self.fields.len()))?;
        out.push(count);
        for (t, value) in &self.fields {
            if value.len() > MAX_FIELD_LEN {
                return Err(Error::OversizeField(value.len()));
            }
            out.push(*t);
            out.extend_from_slice(&(value.len() as u32).to_be_bytes());
            out.extend_from_slice(value);
        }
        let checksum = Sha256::digest(&out);
        out.extend_from_slice(&checksum[..CHECKSUM_LEN]);
        Ok(out)
    }
}

pub fn encode_envelope(envelope: &Envelope) -> Result<Vec<u8>> {
    RawEnvelope {
        scheme: envelope.message.scheme(),
        msg_type: envelope.message.msg_type(),
        session_id: envelope.session_id,
        fields: envelope.message.fields()?,
    }
    .encode()
}

/// Parses framing, verifies the checksum and enforces the tag whitelist.
///
/// Framing is walked before the checksum is checked so that a cut-off file
/// reports [`Error::Truncated`]. Corruption of the length or count bytes is
/// indistinguishable from truncation and may report that instead of
/// [`Error::BadChecksum`].
pub fn parse_raw(bytes: &[u8]) -> Result<RawEnvelope> {
    let mut r = codec::Reader::new(bytes);
    let magic = r.take(4)?;
    if magic != MAGIC {
        return Err(Error::BadMagic);
    }
    let version = r.u8()?;
    let scheme_code = r.u8()?;
    let type_code = r.u8()?;
    let session_id = SessionId(r.array::<16>()?);
    let count = r.u8()? as usize;
    let mut fields = Vec::with_capacity(count);
    for _ in 0..count {
        let t = r.u8()?;
        let len = r.u32()? as usize;
        if len > MAX_FIELD_LEN {
            return Err(Error::OversizeField(len));
        }
        fields.push((t, r.take(len)?.to_vec()));
    }
    let body_len = r.position();
    let checksum = r.take(CHECKSUM_LEN)?;
    if !r.is_empty() {
        return Err(Error::TrailingBytes);
    }
    if Sha256::digest(&bytes[..body_len])[..CHECKSUM_LEN] != *checksum {
        return Err(Error::BadChecksum);
    }
    if version != PROTOCOL_VERSION {
        return Err(Error::VersionMismatch(version));
    }
    let scheme = Scheme::from_code(scheme_code).ok_or(Error::UnknownScheme(scheme_code))?;
    let msg_type = MsgType::from_code(type_code).ok_or(Error::UnknownMessageType(type_code))?;
    let allowed = allowed_tags(scheme, msg_type);
    let mut seen = Vec::with_capacity(fields.len());
    for (t, _) in &fields {
        if !allowed.contains(t) {
            return Err(Error::UnknownTag(*t));
        }
        if seen.contains(t) {
            return Err(Error::DuplicateTag(*t));
        }
        seen.push(*t);
    }
    if let Some(missing) = allowed.iter().find(|t| !seen.contains(t)) {
        return Err(Error::MissingField(*missing));
    }
    Ok(RawEnvelope { scheme, msg_type, session_id, fields })
}

/// Decodes an envelope, inflating it first if it carries the compressed
/// wrapper.
pub fn decode_envelope(bytes: &[u8]) -> Result<Envelope> {
    if bytes.starts_with(&COMPRESSED_MAGIC) {
        let raw = decompress(bytes)?;
        return decode_plain(&raw);
    }
    decode_plain(bytes)
}

fn decode_plain(bytes: &[u8]) -> Result<Envelope> {
    let raw = parse_raw(bytes)?;
    let message = typed_message(&raw)?;
    Ok(Envelope { session_id: raw.session_id, message })
}

fn req(raw: &RawEnvelope, t: u8) -> Result<&[u8]> {
    raw.field(t).ok_or(Error::MissingField(t))
}

fn point_field<C: Curve>(raw: &RawEnvelope, t: u8) -> Result<GroupPoint<C>> {
    GroupPoint::decode(req(raw, t)?).ok_or(Error::InvalidEncoding("point"))
}

fn scalar_field<C: Curve>(raw: &RawEnvelope, t: u8) -> Result<GroupScalar<C>> {
    GroupScalar::from_be_slice(req(raw, t)?).ok_or(Error::InvalidEncoding("scalar"))
}

fn typed_message(raw: &RawEnvelope) -> Result<Message> {
    use tag::*;
    Ok(match (raw.scheme, raw.msg_type) {
        (Scheme::Ecdsa, MsgType::KeygenPub) => Message::KeygenEcdsa(point_field(raw, PUBLIC_SHARE)?),
        (Scheme::Schnorr, MsgType::KeygenPub) => {
            Message::KeygenSchnorr(point_field(raw, PUBLIC_SHARE)?)
        }
        (Scheme::Ecdsa, MsgType::SignMsg1) => {
            let tx = Transaction::from_canonical_bytes(req(raw, TRANSACTION)?)?;
            let pk = PaillierPublicKey::from_modulus(BigUint::from_bytes_be(req(raw, PAILLIER_MODULUS)?))?;
            let c_key = PaillierCiphertext::new(&pk, BigUint::from_bytes_be(req(raw, ENCRYPTED_KEY)?))?;
            let msg = EcdsaSignMsg1 {
                m: scalar_field(raw, MESSAGE_HASH)?,
                pk,
                c_key,
                r1: point_field(raw, NONCE_POINT_1)?,
            };
            Message::EcdsaRequest { tx, msg }
        }
        (Scheme::Schnorr, MsgType::SignMsg1) => Message::SchnorrRequest(SchnorrSignMsg1 {
            tx: Transaction::from_canonical_bytes(req(raw, TRANSACTION)?)?,
            r1: point_field(raw, NONCE_POINT_1)?,
        }),
        (Scheme::Ecdsa, MsgType::SignMsg2) => Message::EcdsaResponse(EcdsaSignMsg2 {
            // Range and unit checks need the gateway's key; decryption does them.
            c3: PaillierCiphertext::from_raw_unchecked(BigUint::from_bytes_be(req(raw, C3)?)),
            r2: point_field(raw, NONCE_POINT_2)?,
        }),
        (Scheme::Schnorr, MsgType::SignMsg2) => Message::SchnorrResponse(SchnorrSignMsg2 {
            s2: scalar_field(raw, PARTIAL_S)?,
            r2: point_field(raw, NONCE_POINT_2)?,
        }),
    })
}

/// Deflates an encoded envelope behind the `CWz1` marker. Returns the input
/// unchanged when compression would not shrink it.
pub fn compress(envelope: &[u8]) -> Vec<u8> {
    let mut deflated = Vec::new();
    DeflateEncoder::new(envelope, Compression::best())
        .read_to_end(&mut deflated)
        .expect("in-memory deflate");
    if COMPRESSED_MAGIC.len() + deflated.len() < envelope.len() {
        let mut out = COMPRESSED_MAGIC.to_vec();
        out.extend_from_slice(&deflated);
        out
    } else {
        envelope.to_vec()
    }
}

pub fn decompress(bytes: &[u8]) -> Result<Vec<u8>> {
    let body = bytes.strip_prefix(&COMPRESSED_MAGIC).ok_or(Error::BadMagic)?;
    let mut out = Vec::new();
    DeflateDecoder::new(body)
        .take(MAX_INFLATED + 1)
        .read_to_end(&mut out)
        .map_err(|_| Error::InvalidEncoding("compressed envelope"))?;
    if out.len() as u64 > MAX_INFLATED {
        return Err(Error::OversizeField(out.len()));
    }
    Ok(out)
}
