//! Scenario checks shared by the integration tests and the acceptance run.
//! Each returns `Err(reason)` on the first deviation.

use coldsig::keygen::KeyShare;
use coldsig::paillier::{self, PaillierKeypair};
use coldsig::sign::{self, CoreEcdsaNonces, Phase};
use coldsig::signature::{ecdsa_verify, schnorr_verify};
use coldsig::transport::{allowed_tags, parse_raw, tag, Envelope, Message, MsgType};
use coldsig::{Error, ErrorClass, GroupScalar, Ristretto255, Scheme, Secp256k1, SecretScalar};
use num_bigint::BigUint;

use super::{contains, policy, rng, tx};

pub type Check = Result<(), String>;

fn expect_err<T>(what: &str, r: coldsig::Result<T>, want: fn(&Error) -> bool, class: ErrorClass) -> Check {
    match r {
        Ok(_) => Err(format!("{what}: accepted")),
        Err(e) if !want(&e) => Err(format!("{what}: wrong error {e:?}")),
        Err(e) if e.class() != class => Err(format!("{what}: wrong class {:?}", e.class())),
        Err(_) => Ok(()),
    }
}

fn ensure(cond: bool, msg: &str) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg.to_string())
    }
}

pub struct Parties {
    pub ecdsa: (KeyShare<Secp256k1>, KeyShare<Secp256k1>),
    pub schnorr: (KeyShare<Ristretto255>, KeyShare<Ristretto255>),
}

pub fn parties(kp: &PaillierKeypair, seed: u64) -> Parties {
    let mut r = rng(seed);
    let ecdsa = super::ecdsa_pair(GroupScalar::random_nonzero(&mut r), GroupScalar::random_nonzero(&mut r), kp.clone(), &mut r);
    let schnorr = super::schnorr_pair(GroupScalar::random_nonzero(&mut r), GroupScalar::random_nonzero(&mut r), &mut r);
    Parties { ecdsa, schnorr }
}

/// The core refuses a request whose raw transaction does not hash to `m`.
pub fn gate_corrupted_transaction(p: &Parties) -> Check {
    let mut r = rng(100);
    let (g, c) = &p.ecdsa;
    let t = tx(1);
    let (_, msg1) = sign::ecdsa_gateway_init(g, &t, &mut r).map_err(|e| e.to_string())?;
    let mut forged = t.clone();
    forged.amount += 1_000_000;
    expect_err(
        "ecdsa corrupted tx",
        sign::ecdsa_core_respond(c, &msg1, &forged, &policy(), &mut r),
        |e| matches!(e, Error::HashMismatch),
        ErrorClass::Integrity,
    )
}

/// The core refuses destinations outside its whitelist, for both schemes.
pub fn gate_destination_not_whitelisted(p: &Parties) -> Check {
    let mut r = rng(101);
    let mut t = tx(2);
    t.destination_address = "attacker-wallet".into();
    let (g, c) = &p.ecdsa;
    let (_, msg1) = sign::ecdsa_gateway_init(g, &t, &mut r).map_err(|e| e.to_string())?;
    expect_err(
        "ecdsa whitelist",
        sign::ecdsa_core_respond(c, &msg1, &t, &policy(), &mut r),
        |e| matches!(e, Error::PolicyViolation(rep) if rep.to_string().contains("attacker-wallet")),
        ErrorClass::Integrity,
    )?;
    let (g, c) = &p.schnorr;
    let (_, msg1) = sign::schnorr_gateway_init(g, &t, &mut r).map_err(|e| e.to_string())?;
    expect_err(
        "schnorr whitelist",
        sign::schnorr_core_respond(c, &msg1, &policy(), &mut r),
        |e| matches!(e, Error::PolicyViolation(_)),
        ErrorClass::Integrity,
    )
}

/// A response ciphertext altered in transit yields no signature.
pub fn gate_tampered_c3(p: &Parties) -> Check {
    let mut r = rng(102);
    let (g, c) = &p.ecdsa;
    let t = tx(3);
    let (mut session, msg1) = sign::ecdsa_gateway_init(g, &t, &mut r).map_err(|e| e.to_string())?;
    let mut msg2 = sign::ecdsa_core_respond(c, &msg1, &t, &policy(), &mut r).map_err(|e| e.to_string())?;
    let one = paillier::encrypt(&msg1.pk, &BigUint::from(1u8), &mut r).map_err(|e| e.to_string())?;
    msg2.c3 = paillier::add(&msg1.pk, &msg2.c3, &one);
    expect_err(
        "tampered C3",
        sign::ecdsa_gateway_finalize(&mut session, g, &msg2),
        |e| matches!(e, Error::VerificationFailed(_)),
        ErrorClass::CryptoVerify,
    )?;
    ensure(session.phase() == Phase::Failed, "tampered C3: session not failed")
}

/// A partial Schnorr signature altered in transit yields no signature.
pub fn gate_tampered_s2(p: &Parties) -> Check {
    let mut r = rng(103);
    let (g, c) = &p.schnorr;
    let t = tx(4);
    let (mut session, msg1) = sign::schnorr_gateway_init(g, &t, &mut r).map_err(|e| e.to_string())?;
    let mut msg2 = sign::schnorr_core_respond(c, &msg1, &policy(), &mut r).map_err(|e| e.to_string())?;
    msg2.s2 = msg2.s2 + GroupScalar::one();
    expect_err(
        "tampered s2",
        sign::schnorr_gateway_finalize(&mut session, g, &msg2),
        |e| matches!(e, Error::VerificationFailed(_)),
        ErrorClass::CryptoVerify,
    )?;
    ensure(session.phase() == Phase::Failed, "tampered s2: session not failed")
}

/// A gateway presenting `C_key = Enc(0)` or `Enc(1)` gets a well-formed
/// response, but it never combines into a valid signature.
pub fn gate_adversarial_c_key(p: &Parties) -> Check {
    let mut r = rng(104);
    let (g, c) = &p.ecdsa;
    for value in [0u8, 1] {
        let t = tx(5 + value as u64);
        let (mut session, mut msg1) = sign::ecdsa_gateway_init(g, &t, &mut r).map_err(|e| e.to_string())?;
        msg1.c_key = paillier::encrypt(&msg1.pk, &BigUint::from(value), &mut r).map_err(|e| e.to_string())?;
        let msg2 = sign::ecdsa_core_respond(c, &msg1, &t, &policy(), &mut r)
            .map_err(|e| format!("Enc({value}): core should still answer, got {e}"))?;
        ensure(!msg2.r2.is_identity(), "adversarial C_key: malformed response")?;
        expect_err(
            &format!("C_key=Enc({value})"),
            sign::ecdsa_gateway_finalize(&mut session, g, &msg2),
            |e| matches!(e, Error::VerificationFailed(_)),
            ErrorClass::CryptoVerify,
        )?;
        ensure(session.phase() == Phase::Failed, "adversarial C_key: session not failed")?;
    }
    Ok(())
}

pub fn all_gates(p: &Parties) -> Vec<(&'static str, Check)> {
    vec![
        ("corrupted transaction", gate_corrupted_transaction(p)),
        ("destination not whitelisted", gate_destination_not_whitelisted(p)),
        ("tampered C3", gate_tampered_c3(p)),
        ("tampered s2", gate_tampered_s2(p)),
        ("adversarial C_key", gate_adversarial_c_key(p)),
    ]
}

/// Byte patterns under which a scalar might appear.
fn encodings(bytes: [u8; 32]) -> Vec<Vec<u8>> {
    let mut le = bytes;
    le.reverse();
    vec![bytes.to_vec(), le.to_vec(), hex::encode(bytes).into_bytes(), hex::encode(le).into_bytes()]
}

pub struct Transcript {
    pub envelopes: Vec<Vec<u8>>,
    pub secrets: Vec<(String, [u8; 32])>,
}

/// A full ceremony for both schemes with known injected secrets; every
/// message goes through encode and decode as it would across the gap.
pub fn ceremony(kp: &PaillierKeypair) -> Result<Transcript, String> {
    let mut r = rng(200);
    let mut envelopes = Vec::new();
    let mut secrets = Vec::new();
    let err = |e: Error| e.to_string();
    let mut cross = |env: Envelope| -> Result<Message, String> {
        let bytes = env.encode().map_err(err)?;
        let back = Envelope::decode(&bytes).map_err(err)?;
        envelopes.push(bytes);
        Ok(back.message)
    };

    let (x1, x2, k1, k2) = (
        GroupScalar::<Secp256k1>::random_nonzero(&mut r),
        GroupScalar::random_nonzero(&mut r),
        GroupScalar::random_nonzero(&mut r),
        GroupScalar::random_nonzero(&mut r),
    );
    for (name, v) in [("x1", x1), ("x2", x2), ("k1", k1), ("k2", k2), ("x1*x2", x1 * x2), ("k1*k2", k1 * k2)] {
        secrets.push((format!("ecdsa {name}"), v.to_be_bytes()));
    }
    let (g, c) = super::ecdsa_pair(x1, x2, kp.clone(), &mut r);
    let sid = coldsig::sign::SessionId::random(&mut r);
    cross(Envelope::new(sid, Message::KeygenEcdsa(g.public_share())))?;
    cross(Envelope::new(sid, Message::KeygenEcdsa(c.public_share())))?;
    let t = tx(9);
    let (mut session, msg1) = sign::ecdsa_gateway_init_with_nonce(&g, &t, SecretScalar::new(k1), &mut r).map_err(err)?;
    let Message::EcdsaRequest { tx: t_core, msg: msg1_core } =
        cross(Envelope::new(session.id(), Message::EcdsaRequest { tx: t.clone(), msg: msg1 }))?
    else {
        return Err("wrong message kind".into());
    };
    let q = <Secp256k1 as coldsig::group::Curve>::order();
    let nonces = CoreEcdsaNonces { k2: SecretScalar::new(k2), rho: q - 1u8 };
    let msg2 = sign::ecdsa_core_respond_with_nonces(&c, &msg1_core, &t_core, &policy(), &nonces, &mut r).map_err(err)?;
    let Message::EcdsaResponse(msg2) = cross(Envelope::new(session.id(), Message::EcdsaResponse(msg2)))? else {
        return Err("wrong message kind".into());
    };
    let sig = sign::ecdsa_gateway_finalize(&mut session, &g, &msg2).map_err(err)?;
    ensure(ecdsa_verify(&g.shared_public().unwrap(), &t.hash().unwrap(), &sig), "ecdsa ceremony signature")?;

    let (y1, y2, j1, j2) = (
        GroupScalar::<Ristretto255>::random_nonzero(&mut r),
        GroupScalar::random_nonzero(&mut r),
        GroupScalar::random_nonzero(&mut r),
        GroupScalar::random_nonzero(&mut r),
    );
    for (name, v) in [("x1", y1), ("x2", y2), ("k1", j1), ("k2", j2), ("x1+x2", y1 + y2), ("k1+k2", j1 + j2)] {
        secrets.push((format!("schnorr {name}"), v.to_be_bytes()));
    }
    let (g, c) = super::schnorr_pair(y1, y2, &mut r);
    cross(Envelope::new(sid, Message::KeygenSchnorr(g.public_share())))?;
    cross(Envelope::new(sid, Message::KeygenSchnorr(c.public_share())))?;
    let (mut session, msg1) = sign::schnorr_gateway_init_with_nonce(&g, &t, SecretScalar::new(j1), &mut r).map_err(err)?;
    let Message::SchnorrRequest(msg1) = cross(Envelope::new(session.id(), Message::SchnorrRequest(msg1)))? else {
        return Err("wrong message kind".into());
    };
    let msg2 = sign::schnorr_core_respond_with_nonce(&c, &msg1, &policy(), &SecretScalar::new(j2)).map_err(err)?;
    let Message::SchnorrResponse(msg2) = cross(Envelope::new(session.id(), Message::SchnorrResponse(msg2)))? else {
        return Err("wrong message kind".into());
    };
    let sig = sign::schnorr_gateway_finalize(&mut session, &g, &msg2).map_err(err)?;
    ensure(
        schnorr_verify(&g.shared_public().unwrap(), &t.canonical_bytes().unwrap(), &sig),
        "schnorr ceremony signature",
    )?;
    Ok(Transcript { envelopes, secrets })
}

/// Every envelope carries exactly the whitelisted field set for its kind,
/// and the whitelists are exactly the protocol's message contents.
pub fn check_schema(t: &Transcript) -> Check {
    use tag::*;
    let expected: [(Scheme, MsgType, &[u8]); 6] = [
        (Scheme::Ecdsa, MsgType::KeygenPub, &[PUBLIC_SHARE]),
        (Scheme::Schnorr, MsgType::KeygenPub, &[PUBLIC_SHARE]),
        (Scheme::Ecdsa, MsgType::SignMsg1, &[TRANSACTION, MESSAGE_HASH, PAILLIER_MODULUS, ENCRYPTED_KEY, NONCE_POINT_1]),
        (Scheme::Schnorr, MsgType::SignMsg1, &[TRANSACTION, NONCE_POINT_1]),
        (Scheme::Ecdsa, MsgType::SignMsg2, &[C3, NONCE_POINT_2]),
        (Scheme::Schnorr, MsgType::SignMsg2, &[PARTIAL_S, NONCE_POINT_2]),
    ];
    for (scheme, ty, tags) in expected {
        ensure(allowed_tags(scheme, ty) == tags, &format!("whitelist for {scheme} {ty:?}"))?;
    }
    let mut kinds = Vec::new();
    for bytes in &t.envelopes {
        let raw = parse_raw(bytes).map_err(|e| e.to_string())?;
        let mut got: Vec<u8> = raw.fields.iter().map(|(t, _)| *t).collect();
        let mut want = allowed_tags(raw.scheme, raw.msg_type).to_vec();
        got.sort();
        want.sort();
        ensure(got == want, "envelope field set")?;
        kinds.push((raw.scheme, raw.msg_type));
    }
    for (scheme, ty, _) in expected {
        ensure(kinds.contains(&(scheme, ty)), "ceremony misses a message kind")?;
    }
    Ok(())
}

/// No secret appears in any envelope, in any of several encodings.
pub fn check_no_secrets(t: &Transcript, extra: &[Vec<u8>]) -> Check {
    for (name, secret) in &t.secrets {
        for pattern in encodings(*secret) {
            for blob in t.envelopes.iter().chain(extra) {
                ensure(!contains(blob, &pattern), &format!("{name} found in transcript"))?;
            }
        }
    }
    Ok(())
}
