use thiserror::Error;

use crate::keygen::Role;
use crate::transaction::PolicyReport;
use crate::Scheme;

/// Coarse grouping used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad configuration, wrong role or scheme, missing prerequisites.
    Config,
    /// Integrity or policy refusal: tampered bytes, hash mismatch, whitelist.
    Integrity,
    /// A produced or presented signature failed verification.
    CryptoVerify,
    /// Filesystem failure.
    Io,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Config => 2,
            ErrorClass::Integrity => 3,
            ErrorClass::CryptoVerify => 4,
            ErrorClass::Io => 5,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("secret scalar must be nonzero")]
    ZeroSecret,
    #[error("nonce must be nonzero")]
    ZeroNonce,
    #[error("degenerate signature: {0} is zero")]
    DegenerateSignature(&'static str),
    #[error("public point does not match the secret share")]
    InconsistentShare,
    #[error("{0} must not be the identity point")]
    IdentityPoint(&'static str),
    #[error("ECDSA signature is not low-s normalized")]
    NonCanonicalSignature,
    #[error("invalid encoding of {0}")]
    InvalidEncoding(&'static str),

    #[error("Paillier primes must be distinct")]
    PaillierPrimesEqual,
    #[error("Paillier factor is not prime")]
    PaillierNotPrime,
    #[error("Paillier modulus has {bits} bits, at least {required} required")]
    ModulusTooSmall { bits: u64, required: u64 },
    #[error("Paillier plaintext out of range")]
    PlaintextOutOfRange,
    #[error("Paillier randomness is not a unit mod n")]
    RandomnessNotCoprime,
    #[error("malformed Paillier ciphertext")]
    MalformedCiphertext,
    #[error("Paillier secret key does not match public key")]
    PaillierKeyMismatch,

    #[error("scheme mismatch: expected {expected}, found {found}")]
    SchemeMismatch { expected: Scheme, found: Scheme },
    #[error("role {role} may not {action}")]
    RoleNotPermitted { role: Role, action: &'static str },
    #[error("gateway ECDSA share has no Paillier keypair")]
    MissingPaillier,
    #[error("shared public key has not been established")]
    SharedKeyNotSet,
    #[error("shared public key conflicts with the one already stored")]
    SharedKeyConflict,

    #[error("transaction hash does not match the presented message")]
    HashMismatch,
    #[error("policy violation: {0}")]
    PolicyViolation(PolicyReport),
    #[error("no usable nonce after {0} attempts")]
    NonceRetriesExhausted(u32),
    #[error("session is {found}, expected {expected}")]
    WrongPhase { expected: &'static str, found: &'static str },
    #[error("session nonce already consumed")]
    NonceReuse,
    #[error("signature verification failed: {0}")]
    VerificationFailed(&'static str),
    #[error("invalid transaction: {0}")]
    InvalidTransaction(&'static str),

    #[error("bad magic bytes")]
    BadMagic,
    #[error("checksum mismatch")]
    BadChecksum,
    #[error("unsupported version {0}")]
    VersionMismatch(u8),
    #[error("unknown message type {0}")]
    UnknownMessageType(u8),
    #[error("unknown scheme byte {0}")]
    UnknownScheme(u8),
    #[error("unknown field tag {0:#04x}")]
    UnknownTag(u8),
    #[error("duplicate field tag {0:#04x}")]
    DuplicateTag(u8),
    #[error("missing field tag {0:#04x}")]
    MissingField(u8),
    #[error("input truncated")]
    Truncated,
    #[error("trailing bytes after payload")]
    TrailingBytes,
    #[error("field of {0} bytes exceeds the size cap")]
    OversizeField(usize),
    #[error("authenticated decryption failed (wrong passphrase or corrupted file)")]
    AuthenticationFailed,
    #[error("key derivation failed: {0}")]
    Kdf(String),
    #[error("{0} already exists")]
    AlreadyExists(String),
    #[error("{0} not found")]
    NotFound(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            ZeroSecret | ZeroNonce | InconsistentShare | PaillierPrimesEqual | PaillierNotPrime
            | ModulusTooSmall { .. } | PlaintextOutOfRange | RandomnessNotCoprime
            | PaillierKeyMismatch | SchemeMismatch { .. } | RoleNotPermitted { .. }
            | MissingPaillier | SharedKeyNotSet | SharedKeyConflict | WrongPhase { .. }
            | InvalidTransaction(_) | Kdf(_) | AlreadyExists(_) => ErrorClass::Config,
            DegenerateSignature(_) | NonCanonicalSignature | VerificationFailed(_) => {
                ErrorClass::CryptoVerify
            }
            IdentityPoint(_) | InvalidEncoding(_) | MalformedCiphertext | HashMismatch
            | PolicyViolation(_) | NonceRetriesExhausted(_) | NonceReuse | BadMagic
            | BadChecksum | VersionMismatch(_) | UnknownMessageType(_) | UnknownScheme(_)
            | UnknownTag(_) | DuplicateTag(_) | MissingField(_) | Truncated | TrailingBytes
            | OversizeField(_) | AuthenticationFailed => ErrorClass::Integrity,
            NotFound(_) | Io(_) => ErrorClass::Io,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
