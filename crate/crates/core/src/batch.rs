//! Many independent signing sessions at once.
//!
//! Every session draws from its own ChaCha20 stream, derived from a batch
//! seed and the session index, so results do not depend on how the work is
//! scheduled. With the `parallel` feature sessions are spread over the rayon
//! pool; without it [`Execution::Parallel`] falls back to a plain loop.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::Result;
use crate::group::{Curve, EcdsaCurve, GroupPoint};
use crate::keygen::KeyShare;
use crate::sign;
use crate::signature::{ecdsa_verify, schnorr_verify, Signature};
use crate::transaction::{Policy, Transaction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether [`Execution::Parallel`] actually runs on a thread pool.
    pub const fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// The RNG used for session `index` of a batch seeded with `seed`.
pub fn session_rng(seed: [u8; 32], index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::from_seed(seed);
    rng.set_stream(index);
    rng
}

fn map_indexed<T, U, F>(items: &[T], exec: Execution, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(usize, &T) -> U + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect()
        }
        _ => items.iter().enumerate().map(|(i, t)| f(i, t)).collect(),
    }
}

/// One full ECDSA round trip per transaction, gateway and core in-process.
pub fn ecdsa_sessions<C: EcdsaCurve>(
    gateway: &KeyShare<C>,
    core: &KeyShare<C>,
    policy: &Policy,
    txs: &[Transaction],
    seed: [u8; 32],
    exec: Execution,
) -> Vec<Result<Signature<C>>> {
    map_indexed(txs, exec, |i, tx| {
        let mut rng = session_rng(seed, i as u64);
        let (mut session, msg1) = sign::ecdsa_gateway_init(gateway, tx, &mut rng)?;
        let msg2 = sign::ecdsa_core_respond(core, &msg1, tx, policy, &mut rng)?;
        sign::ecdsa_gateway_finalize(&mut session, gateway, &msg2)
    })
}

/// One full Schnorr round trip per transaction.
pub fn schnorr_sessions<C: Curve>(
    gateway: &KeyShare<C>,
    core: &KeyShare<C>,
    policy: &Policy,
    txs: &[Transaction],
    seed: [u8; 32],
    exec: Execution,
) -> Vec<Result<Signature<C>>> {
    map_indexed(txs, exec, |i, tx| {
        let mut rng = session_rng(seed, i as u64);
        let (mut session, msg1) = sign::schnorr_gateway_init(gateway, tx, &mut rng)?;
        let msg2 = sign::schnorr_core_respond(core, &msg1, policy, &mut rng)?;
        sign::schnorr_gateway_finalize(&mut session, gateway, &msg2)
    })
}

/// Verifies `(tx, signature)` pairs against one wallet key.
pub fn verify_ecdsa<C: EcdsaCurve>(
    key: &GroupPoint<C>,
    items: &[(Transaction, Signature<C>)],
    exec: Execution,
) -> Vec<bool> {
    map_indexed(items, exec, |_, (tx, sig)| {
        tx.hash::<C>().is_ok_and(|m| ecdsa_verify(key, &m, sig))
    })
}

pub fn verify_schnorr<C: Curve>(
    key: &GroupPoint<C>,
    items: &[(Transaction, Signature<C>)],
    exec: Execution,
) -> Vec<bool> {
    map_indexed(items, exec, |_, (tx, sig)| {
        tx.canonical_bytes().is_ok_and(|bytes| schnorr_verify(key, &bytes, sig))
    })
}
