//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Built with `harness = false`.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use coldsig::group::Curve;
use coldsig::keygen::Role;
use coldsig::opcount::{self, OpCount};
use coldsig::paillier::{self, PaillierCiphertext, PaillierKeypair};
use coldsig::sign::{self, CoreEcdsaNonces};
use coldsig::signature::{ecdsa_sign_with_nonce, ecdsa_verify, schnorr_sign_with_nonce, schnorr_verify};
use coldsig::sizes;
use coldsig::transport::{decode_envelope, Envelope, Message};
use coldsig::{GroupScalar, Ristretto255, Scheme, Secp256k1, SecretScalar};
use common::{oracle, scenarios};
use num_bigint::{BigUint, RandBigInt};
use rand::Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration, label: &str) -> Result<Duration, String> {
    let took = start.elapsed();
    check(took < limit, || format!("{label} took {took:.2?}, limit {limit:?}"))?;
    Ok(took)
}

fn ecdsa_end_to_end(kp: &PaillierKeypair) -> Outcome {
    let start = Instant::now();
    let mut rng = common::rng(1001);
    let mut ok = 0;
    for i in 0..100 {
        let (g, c) = common::ecdsa_pair(
            GroupScalar::random_nonzero(&mut rng),
            GroupScalar::random_nonzero(&mut rng),
            kp.clone(),
            &mut rng,
        );
        let t = common::tx(i);
        let (mut session, msg1) = sign::ecdsa_gateway_init(&g, &t, &mut rng).map_err(|e| e.to_string())?;
        let msg2 = sign::ecdsa_core_respond(&c, &msg1, &t, &common::policy(), &mut rng).map_err(|e| e.to_string())?;
        let sig = sign::ecdsa_gateway_finalize(&mut session, &g, &msg2).map_err(|e| e.to_string())?;
        let key = g.shared_public().unwrap();
        check(ecdsa_verify(&key, &t.hash().unwrap(), &sig), || format!("session {i} rejected"))?;
        ok += 1;
    }
    let took = within(start, Duration::from_secs(60), "100 sessions")?;
    Ok(format!("{ok}/100 verified, {took:.2?}"))
}

fn ecdsa_equivalence(kp: &PaillierKeypair) -> Outcome {
    let mut rng = common::rng(1002);
    let q = <Secp256k1 as Curve>::order();
    for i in 0..50 {
        let x1 = GroupScalar::<Secp256k1>::random_nonzero(&mut rng);
        let x2 = GroupScalar::random_nonzero(&mut rng);
        let k1 = GroupScalar::random_nonzero(&mut rng);
        let k2 = GroupScalar::random_nonzero(&mut rng);
        let (g, c) = common::ecdsa_pair(x1, x2, kp.clone(), &mut rng);
        let t = common::tx(i);
        let (mut session, msg1) =
            sign::ecdsa_gateway_init_with_nonce(&g, &t, SecretScalar::new(k1), &mut rng).map_err(|e| e.to_string())?;
        let nonces = CoreEcdsaNonces { k2: SecretScalar::new(k2), rho: rng.gen_biguint_below(&(q * q)) };
        let msg2 = sign::ecdsa_core_respond_with_nonces(&c, &msg1, &t, &common::policy(), &nonces, &mut rng)
            .map_err(|e| e.to_string())?;
        let sig = sign::ecdsa_gateway_finalize(&mut session, &g, &msg2).map_err(|e| e.to_string())?;
        let m = t.hash::<Secp256k1>().unwrap();
        let direct = ecdsa_sign_with_nonce(&SecretScalar::new(x1 * x2), &m, &SecretScalar::new(k1 * k2))
            .map_err(|e| e.to_string())?;
        check(sig.to_bytes() == direct.to_bytes(), || format!("instance {i} differs from direct signing"))?;
        let (r, s) = oracle::ecdsa_sign(&(x1 * x2).to_biguint(), &m.to_biguint(), &(k1 * k2).to_biguint())
            .ok_or("oracle degenerate")?;
        check(sig.first().to_biguint() == r && sig.s().to_biguint() == s, || {
            format!("instance {i} differs from the bigint oracle")
        })?;
    }
    Ok("50/50 byte-identical to direct signing and to the bigint oracle".into())
}

fn schnorr_end_to_end() -> Outcome {
    let start = Instant::now();
    let mut rng = common::rng(1003);
    for i in 0..100 {
        let (g, c) = common::schnorr_pair(GroupScalar::random_nonzero(&mut rng), GroupScalar::random_nonzero(&mut rng), &mut rng);
        let t = common::tx(i);
        let (mut session, msg1) = sign::schnorr_gateway_init(&g, &t, &mut rng).map_err(|e| e.to_string())?;
        let msg2 = sign::schnorr_core_respond(&c, &msg1, &common::policy(), &mut rng).map_err(|e| e.to_string())?;
        let sig = sign::schnorr_gateway_finalize(&mut session, &g, &msg2).map_err(|e| e.to_string())?;
        let key = g.shared_public().unwrap();
        check(schnorr_verify(&key, &t.canonical_bytes().unwrap(), &sig), || format!("session {i} rejected"))?;
    }
    for i in 0..50 {
        let x1 = GroupScalar::<Ristretto255>::random_nonzero(&mut rng);
        let x2 = GroupScalar::random_nonzero(&mut rng);
        let k1 = GroupScalar::random_nonzero(&mut rng);
        let k2 = GroupScalar::random_nonzero(&mut rng);
        let (g, c) = common::schnorr_pair(x1, x2, &mut rng);
        let t = common::tx(i);
        let (mut session, msg1) =
            sign::schnorr_gateway_init_with_nonce(&g, &t, SecretScalar::new(k1), &mut rng).map_err(|e| e.to_string())?;
        let msg2 = sign::schnorr_core_respond_with_nonce(&c, &msg1, &common::policy(), &SecretScalar::new(k2))
            .map_err(|e| e.to_string())?;
        let sig = sign::schnorr_gateway_finalize(&mut session, &g, &msg2).map_err(|e| e.to_string())?;
        let key = g.shared_public().unwrap();
        let direct = schnorr_sign_with_nonce(
            &SecretScalar::new(x1 + x2),
            &key,
            &t.canonical_bytes().unwrap(),
            &SecretScalar::new(k1 + k2),
        )
        .map_err(|e| e.to_string())?;
        check(sig == direct, || format!("instance {i} differs from direct signing"))?;
    }
    let took = within(start, Duration::from_secs(10), "Schnorr runs")?;
    Ok(format!("100/100 verified, 50/50 equal to direct signing, {took:.2?}"))
}

fn paillier_suite() -> Outcome {
    let start = Instant::now();
    let toy = PaillierKeypair::from_primes(BigUint::from(11u8), BigUint::from(13u8)).map_err(|e| e.to_string())?;
    check(
        toy.public.n() == &BigUint::from(143u8)
            && toy.public.g() == &BigUint::from(144u8)
            && toy.secret.lambda() == &BigUint::from(120u8)
            && toy.secret.mu() == &BigUint::from(87u8),
        || "toy fixture parameters".into(),
    )?;
    let mut rng = common::rng(1004);
    let kp = paillier::keygen(512, &mut rng).map_err(|e| e.to_string())?;
    let (pk, sk) = (&kp.public, &kp.secret);
    check(pk.bits() == 512, || format!("modulus has {} bits", pk.bits()))?;
    let n = pk.n();
    let enc = |m: &BigUint, rng: &mut rand_chacha::ChaCha20Rng| paillier::encrypt(pk, m, rng).unwrap();
    let dec = |c: &PaillierCiphertext| paillier::decrypt(pk, sk, c).unwrap();
    for i in 0..1000 {
        let m = rng.gen_biguint_below(n);
        check(dec(&enc(&m, &mut rng)) == m, || format!("round trip {i}"))?;
    }
    for i in 0..1000 {
        let (a, b) = (rng.gen_biguint_below(n), rng.gen_biguint_below(n));
        let sum = paillier::add(pk, &enc(&a, &mut rng), &enc(&b, &mut rng));
        check(dec(&sum) == (a + b) % n, || format!("addition {i}"))?;
    }
    for i in 0..1000 {
        let (m, k) = (rng.gen_biguint_below(n), rng.gen_biguint_below(n));
        let prod = paillier::scalar_mul(pk, &enc(&m, &mut rng), &k);
        check(dec(&prod) == m * k % n, || format!("scalar multiplication {i}"))?;
    }
    let took = within(start, Duration::from_secs(30), "Paillier suite")?;
    Ok(format!("toy fixture ok, 3x1000 checks at 512 bits, {took:.2?}"))
}

fn integrity_gates(kp: &PaillierKeypair) -> Outcome {
    let parties = scenarios::parties(kp, 1005);
    let results = scenarios::all_gates(&parties);
    let passed = results.iter().filter(|(_, r)| r.is_ok()).count();
    let failures: Vec<String> =
        results.into_iter().filter_map(|(name, r)| r.err().map(|e| format!("{name}: {e}"))).collect();
    check(failures.is_empty(), || failures.join("; "))?;
    Ok(format!("{passed}/5 scenarios abort at their gate"))
}

fn transcript_hygiene(kp: &PaillierKeypair) -> Outcome {
    let transcript = scenarios::ceremony(kp)?;
    scenarios::check_schema(&transcript)?;
    scenarios::check_no_secrets(&transcript, &[])?;
    Ok(format!(
        "{} envelopes match the schema; {} secrets absent in 4 encodings",
        transcript.envelopes.len(),
        transcript.secrets.len()
    ))
}

fn size_benchmark(kp: &PaillierKeypair) -> Outcome {
    let mut rng = common::rng(1006);
    let t = common::tx(0);
    let (g, c) = common::ecdsa_pair(GroupScalar::random_nonzero(&mut rng), GroupScalar::random_nonzero(&mut rng), kp.clone(), &mut rng);
    let (session, msg1) = sign::ecdsa_gateway_init(&g, &t, &mut rng).map_err(|e| e.to_string())?;
    let msg2 = sign::ecdsa_core_respond(&c, &msg1, &t, &common::policy(), &mut rng).map_err(|e| e.to_string())?;
    let e1 = Envelope::new(session.id(), Message::EcdsaRequest { tx: t.clone(), msg: msg1 }).encode().unwrap();
    let e2 = Envelope::new(session.id(), Message::EcdsaResponse(msg2)).encode().unwrap();
    let (gs, cs) = common::schnorr_pair(GroupScalar::random_nonzero(&mut rng), GroupScalar::random_nonzero(&mut rng), &mut rng);
    let (session, msg1) = sign::schnorr_gateway_init(&gs, &t, &mut rng).map_err(|e| e.to_string())?;
    let msg2 = sign::schnorr_core_respond(&cs, &msg1, &common::policy(), &mut rng).map_err(|e| e.to_string())?;
    let s1 = Envelope::new(session.id(), Message::SchnorrRequest(msg1)).encode().unwrap();
    let s2 = Envelope::new(session.id(), Message::SchnorrResponse(msg2)).encode().unwrap();

    let n_bits = kp.public.bits();
    let rows = [
        sizes::measure(&e1, 256, n_bits),
        sizes::measure(&e2, 256, n_bits),
        sizes::measure(&s1, 256, n_bits),
        sizes::measure(&s2, 256, n_bits),
    ]
    .into_iter()
    .collect::<Result<Vec<_>, _>>()
    .map_err(|e| e.to_string())?;
    for line in sizes::render(&rows).lines() {
        println!("    {line}");
    }
    for r in &rows {
        check(r.compressed_bytes <= r.raw_bytes, || format!("{} step {} compressed larger", r.scheme, r.step))?;
    }
    let (ecdsa_one, schnorr_two) = (&rows[0], &rows[3]);
    for r in [ecdsa_one, schnorr_two] {
        check(r.deviation().abs() <= 0.10, || {
            format!("{} step {}: {} B vs theory {:.1} B", r.scheme, r.step, r.extra_bytes, r.theory_bytes)
        })?;
        check(r.framing_bytes <= 64, || format!("{} step {} framing {} B", r.scheme, r.step, r.framing_bytes))?;
    }
    Ok(format!(
        "ECDSA step one {} B vs {:.0} B ({:+.1}%), framing {} B; Schnorr step two {} B vs {:.0} B ({:+.1}%), framing {} B",
        ecdsa_one.extra_bytes,
        ecdsa_one.theory_bytes,
        100.0 * ecdsa_one.deviation(),
        ecdsa_one.framing_bytes,
        schnorr_two.extra_bytes,
        schnorr_two.theory_bytes,
        100.0 * schnorr_two.deviation(),
        schnorr_two.framing_bytes
    ))
}

fn operation_counts() -> Outcome {
    let expected = [
        (Scheme::Ecdsa, Role::Gateway, OpCount::new(3, 6, 4, 2)),
        (Scheme::Ecdsa, Role::Core, OpCount::new(3, 6, 2, 1)),
        (Scheme::Schnorr, Role::Gateway, OpCount::new(0, 1, 3, 0)),
        (Scheme::Schnorr, Role::Core, OpCount::new(0, 1, 1, 0)),
    ];
    for (scheme, role, want) in expected {
        let got = opcount::total(scheme, role);
        check(got == want, || format!("{scheme} {role}: {got} != {want}"))?;
    }
    check(opcount::ECDSA_VERIFY == OpCount::new(0, 2, 2, 1), || "ECDSA verify baseline".into())?;
    check(opcount::ECDSA_SIGN == OpCount::new(0, 2, 1, 1), || "ECDSA sign baseline".into())?;
    check(opcount::SCHNORR_VERIFY == OpCount::new(0, 0, 2, 0), || "Schnorr verify baseline".into())?;
    check(opcount::SCHNORR_SIGN == OpCount::new(0, 1, 1, 0), || "Schnorr sign baseline".into())?;
    Ok(format!("gateway ECDSA total {}", opcount::total(Scheme::Ecdsa, Role::Gateway)))
}

fn decoder_fuzz(kp: &PaillierKeypair) -> Outcome {
    let transcript = scenarios::ceremony(kp)?;
    let corpus = &transcript.envelopes;
    let mut rng = common::rng(1007);
    let mut rejected = 0;
    for i in 0..10_000 {
        let base = &corpus[i % corpus.len()];
        let mut b = base.clone();
        match i % 5 {
            0 => b.truncate(rng.gen_range(0..b.len())),
            1 => {
                let pos = rng.gen_range(0..b.len());
                b[pos] ^= rng.gen_range(1..=255u8);
            }
            2 => {
                for _ in 0..rng.gen_range(2..8) {
                    let pos = rng.gen_range(0..b.len());
                    b[pos] = rng.gen();
                }
            }
            3 => {
                let pos = rng.gen_range(0..=b.len());
                let extra: Vec<u8> = (0..rng.gen_range(1..16)).map(|_| rng.gen()).collect();
                b.splice(pos..pos, extra);
            }
            _ => {
                let from = rng.gen_range(0..b.len());
                let to = (from + rng.gen_range(1..32)).min(b.len());
                b.drain(from..to);
            }
        }
        if b == *base {
            continue;
        }
        match catch_unwind(AssertUnwindSafe(|| decode_envelope(&b))) {
            Err(_) => return Err(format!("mutation {i} panicked")),
            Ok(Ok(_)) => return Err(format!("mutation {i} decoded successfully")),
            Ok(Err(_)) => rejected += 1,
        }
    }
    Ok(format!("{rejected} mutated envelopes rejected with typed errors"))
}

type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn main() -> ExitCode {
    let start = Instant::now();
    let kp = paillier::keygen(2048, &mut common::rng(1000)).expect("2048-bit Paillier keygen");
    println!("setup: 2048-bit Paillier keypair in {:.2?}", start.elapsed());

    let criteria: Vec<(&str, Criterion)> = vec![
        ("ecdsa-end-to-end", Box::new(|| ecdsa_end_to_end(&kp))),
        ("ecdsa-oracle-equivalence", Box::new(|| ecdsa_equivalence(&kp))),
        ("schnorr-end-to-end", Box::new(schnorr_end_to_end)),
        ("paillier-properties", Box::new(paillier_suite)),
        ("integrity-gates", Box::new(|| integrity_gates(&kp))),
        ("transcript-hygiene", Box::new(|| transcript_hygiene(&kp))),
        ("size-benchmark", Box::new(|| size_benchmark(&kp))),
        ("operation-counts", Box::new(operation_counts)),
        ("decoder-fuzz", Box::new(|| decoder_fuzz(&kp))),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
