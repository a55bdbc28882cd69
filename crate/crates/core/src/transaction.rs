//! Minimal chain-agnostic transaction and the core's outflow policy.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{hash_to_scalar, Curve, GroupScalar};

/// Upper bound on a single text field in canonical form.
const MAX_TEXT_LEN: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transaction {
    pub version: u8,
    pub asset: String,
    #[serde(rename = "source")]
    pub source_address: String,
    #[serde(rename = "destination")]
    pub destination_address: String,
    pub amount: u64,
    pub nonce: u64,
}

impl Transaction {
    pub fn validate(&self) -> Result<()> {
        if self.amount == 0 {
            return Err(Error::InvalidTransaction("amount must be positive"));
        }
        if self.source_address.is_empty() || self.destination_address.is_empty() {
            return Err(Error::InvalidTransaction("addresses must be non-empty"));
        }
        if [&self.asset, &self.source_address, &self.destination_address]
            .iter()
            .any(|s| s.len() > MAX_TEXT_LEN)
        {
            return Err(Error::InvalidTransaction("text field too long"));
        }
        Ok(())
    }

    /// `version(1) || asset || source || destination || amount(8) || nonce(8)`,
    /// text fields as u32 big-endian length followed by UTF-8 bytes.
    pub fn canonical_bytes(&self) -> Result<Vec<u8>> {
        self.validate()?;
        let mut out = Vec::with_capacity(
            1 + 12 + self.asset.len() + self.source_address.len() + self.destination_address.len() + 16,
        );
        out.push(self.version);
        for text in [&self.asset, &self.source_address, &self.destination_address] {
            out.extend_from_slice(&(text.len() as u32).to_be_bytes());
            out.extend_from_slice(text.as_bytes());
        }
        out.extend_from_slice(&self.amount.to_be_bytes());
        out.extend_from_slice(&self.nonce.to_be_bytes());
        Ok(out)
    }

    /// Inverse of [`Transaction::canonical_bytes`]; rejects trailing bytes.
    pub fn from_canonical_bytes(bytes: &[u8]) -> Result<Self> {
        let malformed = Error::InvalidEncoding("transaction");
        let (&version, mut rest) = bytes.split_first().ok_or(Error::Truncated)?;
        let mut texts = Vec::with_capacity(3);
        for _ in 0..3 {
            if rest.len() < 4 {
                return Err(Error::Truncated);
            }
            let len = u32::from_be_bytes(rest[..4].try_into().unwrap()) as usize;
            rest = &rest[4..];
            if len > MAX_TEXT_LEN {
                return Err(malformed);
            }
            if rest.len() < len {
                return Err(Error::Truncated);
            }
            let text = std::str::from_utf8(&rest[..len]).map_err(|_| Error::InvalidEncoding("transaction"))?;
            texts.push(text.to_owned());
            rest = &rest[len..];
        }
        if rest.len() < 16 {
            return Err(Error::Truncated);
        }
        if rest.len() > 16 {
            return Err(Error::TrailingBytes);
        }
        let amount = u64::from_be_bytes(rest[..8].try_into().unwrap());
        let nonce = u64::from_be_bytes(rest[8..].try_into().unwrap());
        let mut texts = texts.into_iter();
        let tx = Transaction {
            version,
            asset: texts.next().unwrap(),
            source_address: texts.next().unwrap(),
            destination_address: texts.next().unwrap(),
            amount,
            nonce,
        };
        tx.validate()?;
        Ok(tx)
    }

    /// Message scalar `m = H(canonical bytes) mod q`.
    pub fn hash<C: Curve>(&self) -> Result<GroupScalar<C>> {
        Ok(hash_to_scalar(&self.canonical_bytes()?))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolicyRule {
    DestinationNotWhitelisted(String),
    AmountOverCap { amount: u64, cap: u64 },
}

impl fmt::Display for PolicyRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyRule::DestinationNotWhitelisted(addr) => {
                write!(f, "destination {addr} is not whitelisted")
            }
            PolicyRule::AmountOverCap { amount, cap } => {
                write!(f, "amount {amount} exceeds max_amount {cap}")
            }
        }
    }
}

/// Every rule a transaction failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyReport {
    pub violations: Vec<PolicyRule>,
}

impl fmt::Display for PolicyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Destination whitelist with an optional per-transaction cap.
///
/// Text form: one address per line, an optional `max_amount <n>` line,
/// blank lines and `#` comments ignored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy {
    whitelist: BTreeSet<String>,
    max_amount: Option<u64>,
}

impl Policy {
    pub fn new<I, S>(whitelist: I, max_amount: Option<u64>) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let whitelist: BTreeSet<String> = whitelist.into_iter().map(Into::into).collect();
        if whitelist.is_empty() {
            return Err(Error::InvalidTransaction("policy whitelist is empty"));
        }
        Ok(Policy { whitelist, max_amount })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut addresses = Vec::new();
        let mut max_amount = None;
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(value) = line.strip_prefix("max_amount") {
                let cap = value
                    .trim_start_matches([' ', '\t', '=', ':'])
                    .parse::<u64>()
                    .map_err(|_| Error::InvalidTransaction("bad max_amount line in policy"))?;
                max_amount = Some(cap);
            } else {
                addresses.push(line.to_owned());
            }
        }
        Policy::new(addresses, max_amount)
    }

    pub fn whitelist(&self) -> &BTreeSet<String> {
        &self.whitelist
    }

    pub fn max_amount(&self) -> Option<u64> {
        self.max_amount
    }

    pub fn check(&self, tx: &Transaction) -> Result<(), PolicyReport> {
        let mut violations = Vec::new();
        if !self.whitelist.contains(&tx.destination_address) {
            violations.push(PolicyRule::DestinationNotWhitelisted(tx.destination_address.clone()));
        }
        if let Some(cap) = self.max_amount {
            if tx.amount > cap {
                violations.push(PolicyRule::AmountOverCap { amount: tx.amount, cap });
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(PolicyReport { violations })
        }
    }
}
