//! Static operation counts per role and protocol step.
//!
//! These are bookkeeping, not measurements: each row names the function
//! that performs the operations so the numbers can be checked against the
//! code by reading it. Units:
//!
//! * `E_m`: big-integer modular exponentiation (Paillier)
//! * `M_s`: multiplication of scalars mod q
//! * `M_ec`: elliptic-curve scalar multiplication
//! * `I_m`: modular inversion mod q

use std::fmt;
use std::ops::Add;

use serde::Serialize;

use crate::keygen::Role;
use crate::Scheme;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct OpCount {
    pub exp_mod: u32,
    pub mul_scalar: u32,
    pub mul_ec: u32,
    pub inv_mod: u32,
}

impl OpCount {
    pub const fn new(exp_mod: u32, mul_scalar: u32, mul_ec: u32, inv_mod: u32) -> Self {
        OpCount { exp_mod, mul_scalar, mul_ec, inv_mod }
    }

    pub const ZERO: OpCount = OpCount::new(0, 0, 0, 0);

    pub const fn e_m(n: u32) -> Self {
        OpCount::new(n, 0, 0, 0)
    }

    pub const fn m_s(n: u32) -> Self {
        OpCount::new(0, n, 0, 0)
    }

    pub const fn m_ec(n: u32) -> Self {
        OpCount::new(0, 0, n, 0)
    }

    pub const fn i_m(n: u32) -> Self {
        OpCount::new(0, 0, 0, n)
    }

    pub const fn plus(self, o: OpCount) -> Self {
        OpCount::new(
            self.exp_mod + o.exp_mod,
            self.mul_scalar + o.mul_scalar,
            self.mul_ec + o.mul_ec,
            self.inv_mod + o.inv_mod,
        )
    }
}

impl Add for OpCount {
    type Output = OpCount;
    fn add(self, o: OpCount) -> OpCount {
        self.plus(o)
    }
}

impl std::iter::Sum for OpCount {
    fn sum<I: Iterator<Item = OpCount>>(iter: I) -> OpCount {
        iter.fold(OpCount::ZERO, Add::add)
    }
}

impl fmt::Display for OpCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (n, unit) in [
            (self.exp_mod, "E_m"),
            (self.mul_scalar, "M_s"),
            (self.mul_ec, "M_ec"),
            (self.inv_mod, "I_m"),
        ] {
            match n {
                0 => {}
                1 => terms.push(unit.to_string()),
                n => terms.push(format!("{n}{unit}")),
            }
        }
        if terms.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&terms.join(" + "))
        }
    }
}

/// Single-party ECDSA verification: `w = s^-1`, `u1 = m·w`, `u2 = r·w`,
/// `u1·G + u2·P`.
pub const ECDSA_VERIFY: OpCount = OpCount::i_m(1).plus(OpCount::m_s(2)).plus(OpCount::m_ec(2));
/// Single-party ECDSA signing: `k·G`, `k^-1`, `r·x` and `k^-1·(m + r·x)`.
pub const ECDSA_SIGN: OpCount = OpCount::m_ec(1).plus(OpCount::i_m(1)).plus(OpCount::m_s(2));
/// Single-party Schnorr verification: `s·G` and `e·P`.
pub const SCHNORR_VERIFY: OpCount = OpCount::m_ec(2);
/// Single-party Schnorr signing: `k·G` and `x·e`.
pub const SCHNORR_SIGN: OpCount = OpCount::m_ec(1).plus(OpCount::m_s(1));

/// One line of the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OpRow {
    pub scheme: Scheme,
    pub role: Role,
    pub step: &'static str,
    /// Function where the operations happen.
    pub site: &'static str,
    pub count: OpCount,
}

const fn row(scheme: Scheme, role: Role, step: &'static str, site: &'static str, count: OpCount) -> OpRow {
    OpRow { scheme, role, step, site, count }
}

/// Per-step rows. Summing a role's rows gives [`total`].
pub const TABLE: &[OpRow] = &[
    // Gateway step one: C_key = g^x1·r^n (two exponentiations), the
    // message scalar reduction and R1 = k1·G.
    row(
        Scheme::Ecdsa,
        Role::Gateway,
        "step one",
        "sign::ecdsa_gateway_init",
        OpCount::e_m(2).plus(OpCount::m_s(1)).plus(OpCount::m_ec(1)),
    ),
    // Gateway step three: Dec(C3) (one exponentiation and two products),
    // k1^-1, s1 = k1^-1·s', R = k1·R2.
    row(
        Scheme::Ecdsa,
        Role::Gateway,
        "step three",
        "sign::ecdsa_gateway_finalize",
        OpCount::e_m(1).plus(OpCount::m_s(3)).plus(OpCount::i_m(1)).plus(OpCount::m_ec(1)),
    ),
    row(Scheme::Ecdsa, Role::Gateway, "verify", "signature::ecdsa_verify", ECDSA_VERIFY),
    // Core part one: R = k2·R1, R2 = k2·G, k2^-1, k2^-1·m and k2^-1·r.
    row(
        Scheme::Ecdsa,
        Role::Core,
        "part one",
        "sign::ecdsa_core_respond_with_nonces",
        OpCount::m_ec(2).plus(OpCount::i_m(1)).plus(OpCount::m_s(2)),
    ),
    // Core part two: Enc(rho·q + k2^-1·m) (two exponentiations, one
    // product), C_key^(k2^-1·r·x2) (two products, one exponentiation) and
    // the homomorphic addition C1·C2.
    row(
        Scheme::Ecdsa,
        Role::Core,
        "part two",
        "sign::ecdsa_core_respond_with_nonces",
        OpCount::e_m(3).plus(OpCount::m_s(4)),
    ),
    row(Scheme::Schnorr, Role::Gateway, "step one", "sign::schnorr_gateway_init", OpCount::m_ec(1)),
    // Gateway step three: s1 = k1 + x1·e, then verification.
    row(
        Scheme::Schnorr,
        Role::Gateway,
        "step three",
        "sign::schnorr_gateway_finalize",
        OpCount::m_s(1),
    ),
    row(Scheme::Schnorr, Role::Gateway, "verify", "signature::schnorr_verify", SCHNORR_VERIFY),
    // Core: R2 = k2·G and s2 = k2 + x2·e.
    row(
        Scheme::Schnorr,
        Role::Core,
        "respond",
        "sign::schnorr_core_respond_with_nonce",
        OpCount::m_ec(1).plus(OpCount::m_s(1)),
    ),
];

/// Rows for one role; the user role signs exactly like the gateway.
pub fn rows(scheme: Scheme, role: Role) -> impl Iterator<Item = &'static OpRow> {
    let role = if role == Role::User { Role::Gateway } else { role };
    TABLE.iter().filter(move |r| r.scheme == scheme && r.role == role)
}

pub fn total(scheme: Scheme, role: Role) -> OpCount {
    rows(scheme, role).map(|r| r.count).sum()
}

/// Renders the table as aligned text.
pub fn render() -> String {
    let mut out = format!("{:<8} {:<8} {:<11} {:<38} {}\n", "scheme", "role", "step", "site", "count");
    for scheme in [Scheme::Ecdsa, Scheme::Schnorr] {
        for role in [Role::Gateway, Role::Core] {
            for r in rows(scheme, role) {
                out += &format!(
                    "{:<8} {:<8} {:<11} {:<38} {}\n",
                    scheme.to_string(),
                    role.to_string(),
                    r.step,
                    r.site,
                    r.count
                );
            }
            out += &format!(
                "{:<8} {:<8} {:<11} {:<38} {}\n",
                scheme.to_string(),
                role.to_string(),
                "total",
                "",
                total(scheme, role)
            );
        }
    }
    out += &format!("single-party ECDSA sign {ECDSA_SIGN}, verify {ECDSA_VERIFY}\n");
    out += &format!("single-party Schnorr sign {SCHNORR_SIGN}, verify {SCHNORR_VERIFY}\n");
    out
}
