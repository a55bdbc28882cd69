use std::path::{Path, PathBuf};

use coldsig::group::Curve;
use coldsig::keygen::{generate_share, recoverable_user_share, KeyShare, KeygenOptions, Role};
use coldsig::sign::{self, SessionId, SigningSession};
use coldsig::signature::{ecdsa_verify, schnorr_verify, Signature};
use coldsig::transport::{
    compress, load_session, load_share, read_share_header, save_session, save_share, Envelope, KdfParams,
    Message, ShareHeader,
};
use coldsig::{opcount, sizes, Error, GroupPoint, Policy, Ristretto255, Scheme, Secp256k1, Transaction};
use rand::thread_rng;
use serde::Serialize;

use crate::workdir::{self, passphrase, SessionLock, Workdir};
use crate::{Cli, CliError, CliResult, Command};

/// Ties each curve to its envelope message variants.
trait WireCurve: Curve {
    const SCHEME: Scheme;
    fn keygen_message(p: GroupPoint<Self>) -> Message;
    fn keygen_point(m: Message) -> Option<GroupPoint<Self>>;
}

impl WireCurve for Secp256k1 {
    const SCHEME: Scheme = Scheme::Ecdsa;
    fn keygen_message(p: GroupPoint<Self>) -> Message {
        Message::KeygenEcdsa(p)
    }
    fn keygen_point(m: Message) -> Option<GroupPoint<Self>> {
        match m {
            Message::KeygenEcdsa(p) => Some(p),
            _ => None,
        }
    }
}

impl WireCurve for Ristretto255 {
    const SCHEME: Scheme = Scheme::Schnorr;
    fn keygen_message(p: GroupPoint<Self>) -> Message {
        Message::KeygenSchnorr(p)
    }
    fn keygen_point(m: Message) -> Option<GroupPoint<Self>> {
        match m {
            Message::KeygenSchnorr(p) => Some(p),
            _ => None,
        }
    }
}

pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Keygen { out, recover_seed, account } => {
            let seed = recover_seed.as_deref().map(hex::decode).transpose().map_err(|_| {
                CliError::Config("--recover-seed must be hex".into())
            })?;
            let recovery = seed.zip(account.clone());
            match required(cli.scheme, "--scheme")? {
                Scheme::Ecdsa => keygen::<Secp256k1>(cli, out.as_deref(), recovery),
                Scheme::Schnorr => keygen::<Ristretto255>(cli, out.as_deref(), recovery),
            }
        }
        Command::KeygenFinish { peer } => match share_header(cli)?.scheme {
            Scheme::Ecdsa => keygen_finish::<Secp256k1>(cli, peer),
            Scheme::Schnorr => keygen_finish::<Ristretto255>(cli, peer),
        },
        Command::SignInit { tx, out } => sign_init(cli, tx, out.as_deref()),
        Command::SignRespond { request, out } => sign_respond(cli, request, out.as_deref()),
        Command::SignFinalize { response } => sign_finalize(cli, response),
        Command::Verify { pubkey, tx, signature } => verify(cli, pubkey, tx, signature),
        Command::BenchSizes => bench_sizes(cli),
        Command::Opcounts => {
            print!("{}", opcount::render());
            Ok(())
        }
    }
}

fn required<T>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::Config(format!("{flag} is required")))
}

fn workdir(cli: &Cli) -> CliResult<Workdir> {
    Workdir::new(&cli.workdir, cli.share.as_deref())
}

/// Reads the share header and checks it against any `--role`/`--scheme`.
fn share_header(cli: &Cli) -> CliResult<ShareHeader> {
    let header = read_share_header(&workdir(cli)?.share())?;
    if let Some(scheme) = cli.scheme {
        if scheme != header.scheme {
            return Err(Error::SchemeMismatch { expected: scheme, found: header.scheme }.into());
        }
    }
    if let Some(role) = cli.role {
        if role != header.role {
            return Err(CliError::Config(format!("share belongs to role {}, not {role}", header.role)));
        }
    }
    Ok(header)
}

fn load<C: Curve>(cli: &Cli) -> CliResult<(Workdir, KeyShare<C>, String)> {
    let wd = workdir(cli)?;
    let pass = passphrase()?;
    let share = load_share::<C>(&wd.share(), Some(&pass))?;
    Ok((wd, share, pass))
}

fn emit(cli: &Cli, path: &Path, envelope: &Envelope) -> CliResult<()> {
    let bytes = envelope.encode()?;
    let bytes = if cli.compress { compress(&bytes) } else { bytes };
    workdir::write(path, &bytes)?;
    println!("envelope: {} ({} bytes)", path.display(), bytes.len());
    Ok(())
}

fn read_envelope(path: &Path) -> CliResult<Envelope> {
    Ok(Envelope::decode(&workdir::read(path)?)?)
}

fn read_tx(path: &Path) -> CliResult<Transaction> {
    let tx: Transaction = serde_json::from_str(&workdir::read_text(path)?)?;
    tx.validate()?;
    Ok(tx)
}

fn keygen<C: WireCurve>(cli: &Cli, out: Option<&Path>, recovery: Option<(Vec<u8>, String)>) -> CliResult<()> {
    let role = required(cli.role, "--role")?;
    let wd = workdir(cli)?;
    let path = wd.share();
    if path.exists() && !cli.force {
        return Err(Error::AlreadyExists(path.display().to_string()).into());
    }
    let pass = passphrase()?;
    let mut rng = thread_rng();
    let opts = KeygenOptions { paillier_bits: cli.paillier_bits };
    let share = match recovery {
        Some(_) if role != Role::User => {
            return Err(CliError::Config("--recover-seed is only for the user role".into()));
        }
        Some((seed, account)) => recoverable_user_share::<C, _>(C::SCHEME, &seed, &account, &opts, &mut rng)?,
        None => generate_share::<C, _>(C::SCHEME, role, &opts, &mut rng)?,
    };
    save_share(&path, &share, Some(&pass), &KdfParams::default(), &mut rng)?;
    println!("share: {}", path.display());
    println!("public_share: {}", hex::encode(share.public_share().encode()));
    let out = out.map(PathBuf::from).unwrap_or_else(|| wd.file(&format!("keygen-{role}.cwe")));
    emit(cli, &out, &Envelope::new(SessionId::random(&mut rng), C::keygen_message(share.public_share())))
}

fn keygen_finish<C: WireCurve>(cli: &Cli, peer: &Path) -> CliResult<()> {
    let (wd, mut share, pass) = load::<C>(cli)?;
    let envelope = read_envelope(peer)?;
    let found = envelope.message.scheme();
    let point = C::keygen_point(envelope.message)
        .ok_or(Error::SchemeMismatch { expected: C::SCHEME, found })?;
    share.combine_public_key(&point)?;
    save_share(&wd.share(), &share, Some(&pass), &KdfParams::default(), &mut thread_rng())?;
    let wallet = share.wallet()?;
    let path = wd.file("wallet.json");
    workdir::write(&path, serde_json::to_string_pretty(&wallet)?.as_bytes())?;
    println!("scheme: {}", wallet.scheme);
    println!("shared_public: {}", wallet.shared_public);
    println!("address: {}", wallet.address);
    println!("wallet: {}", path.display());
    Ok(())
}

fn sign_init(cli: &Cli, tx_path: &Path, out: Option<&Path>) -> CliResult<()> {
    let header = share_header(cli)?;
    let tx = read_tx(tx_path)?;
    let mut rng = thread_rng();
    let (wd, pass, id, message) = match header.scheme {
        Scheme::Ecdsa => {
            let (wd, share, pass) = load::<Secp256k1>(cli)?;
            let (session, msg) = sign::ecdsa_gateway_init(&share, &tx, &mut rng)?;
            save_session(&wd.session(session.id())?, &session, Some(&pass), &KdfParams::default(), &mut rng)?;
            (wd, pass, session.id(), Message::EcdsaRequest { tx: tx.clone(), msg })
        }
        Scheme::Schnorr => {
            let (wd, share, pass) = load::<Ristretto255>(cli)?;
            let (session, msg) = sign::schnorr_gateway_init(&share, &tx, &mut rng)?;
            save_session(&wd.session(session.id())?, &session, Some(&pass), &KdfParams::default(), &mut rng)?;
            (wd, pass, session.id(), Message::SchnorrRequest(msg))
        }
    };
    drop(pass);
    println!("session: {id}");
    let out = out.map(PathBuf::from).unwrap_or_else(|| wd.file(&format!("sign-request-{id}.cwe")));
    emit(cli, &out, &Envelope::new(id, message))
}

fn sign_respond(cli: &Cli, request: &Path, out: Option<&Path>) -> CliResult<()> {
    let header = share_header(cli)?;
    if header.role != Role::Core {
        return Err(Error::RoleNotPermitted { role: header.role, action: "answer a signing request" }.into());
    }
    let policy_path = cli
        .policy
        .as_deref()
        .ok_or_else(|| CliError::Config("--policy is required for the core role".into()))?;
    let policy = Policy::parse(&workdir::read_text(policy_path)?)?;
    let envelope = read_envelope(request)?;
    let id = envelope.session_id;
    let mut rng = thread_rng();
    let (wd, tx, result) = match (header.scheme, envelope.message) {
        (Scheme::Ecdsa, Message::EcdsaRequest { tx, msg }) => {
            let (wd, share, _) = load::<Secp256k1>(cli)?;
            let r = sign::ecdsa_core_respond(&share, &msg, &tx, &policy, &mut rng).map(Message::EcdsaResponse);
            (wd, tx, r)
        }
        (Scheme::Schnorr, Message::SchnorrRequest(msg)) => {
            let (wd, share, _) = load::<Ristretto255>(cli)?;
            let tx = msg.tx.clone();
            let r = sign::schnorr_core_respond(&share, &msg, &policy, &mut rng).map(Message::SchnorrResponse);
            (wd, tx, r)
        }
        (scheme, other) if other.scheme() != scheme => {
            return Err(Error::SchemeMismatch { expected: scheme, found: other.scheme() }.into());
        }
        (_, other) => return Err(CliError::Config(format!("expected a signing request, got {:?}", other.msg_type()))),
    };
    println!("request: {} {} from {} to {} (nonce {})", tx.amount, tx.asset, tx.source_address, tx.destination_address, tx.nonce);
    let message = match result {
        Ok(m) => m,
        Err(Error::PolicyViolation(report)) => {
            let path = wd.file(&format!("refusal-{id}.txt"));
            let text = format!(
                "REFUSED session {id}\ntransaction: {} {} from {} to {} (nonce {})\n{report}\n",
                tx.amount, tx.asset, tx.source_address, tx.destination_address, tx.nonce
            );
            workdir::write(&path, text.as_bytes())?;
            println!("refusal: {}", path.display());
            return Err(Error::PolicyViolation(report).into());
        }
        Err(e) => return Err(e.into()),
    };
    let out = out.map(PathBuf::from).unwrap_or_else(|| wd.file(&format!("sign-response-{id}.cwe")));
    emit(cli, &out, &Envelope::new(id, message))
}

#[derive(Serialize)]
struct SignatureRecord {
    scheme: Scheme,
    session: String,
    public_key: String,
    signature: String,
    transaction: Transaction,
}

fn finalize_with<C: Curve>(
    cli: &Cli,
    id: SessionId,
    finish: impl FnOnce(&mut SigningSession<C>, &KeyShare<C>) -> coldsig::Result<Signature<C>>,
) -> CliResult<()> {
    let (wd, share, pass) = load::<C>(cli)?;
    let path = wd.session(id)?;
    let _lock = SessionLock::acquire(&path)?;
    let mut session = load_session::<C>(&path, Some(&pass))?;
    let outcome = finish(&mut session, &share);
    // The nonce is spent whatever the outcome, so the new phase is stored.
    save_session(&path, &session, Some(&pass), &KdfParams::default(), &mut thread_rng())?;
    let sig = match outcome {
        Ok(sig) => sig,
        Err(e) => {
            println!("session: {id} {}", session.phase().name());
            println!("verified: false");
            return Err(e.into());
        }
    };
    let record = SignatureRecord {
        scheme: share.scheme(),
        session: id.to_string(),
        public_key: hex::encode(session.wallet_key().encode()),
        signature: hex::encode(sig.to_bytes()),
        transaction: session.transaction().clone(),
    };
    let out = wd.file(&format!("signature-{id}.json"));
    workdir::write(&out, serde_json::to_string_pretty(&record)?.as_bytes())?;
    println!("session: {id} {}", session.phase().name());
    println!("public_key: {}", record.public_key);
    println!("signature: {}", record.signature);
    println!("verified: true");
    println!("record: {}", out.display());
    Ok(())
}

fn sign_finalize(cli: &Cli, response: &Path) -> CliResult<()> {
    let header = share_header(cli)?;
    let envelope = read_envelope(response)?;
    let id = envelope.session_id;
    match (header.scheme, envelope.message) {
        (Scheme::Ecdsa, Message::EcdsaResponse(msg)) => {
            finalize_with::<Secp256k1>(cli, id, |s, share| sign::ecdsa_gateway_finalize(s, share, &msg))
        }
        (Scheme::Schnorr, Message::SchnorrResponse(msg)) => {
            finalize_with::<Ristretto255>(cli, id, |s, share| sign::schnorr_gateway_finalize(s, share, &msg))
        }
        (scheme, other) if other.scheme() != scheme => {
            Err(Error::SchemeMismatch { expected: scheme, found: other.scheme() }.into())
        }
        (_, other) => Err(CliError::Config(format!("expected a signing response, got {:?}", other.msg_type()))),
    }
}

fn verify(cli: &Cli, pubkey: &str, tx_path: &Path, signature: &str) -> CliResult<()> {
    let scheme = required(cli.scheme, "--scheme")?;
    let tx = read_tx(tx_path)?;
    let key = hex::decode(pubkey).map_err(|_| CliError::Config("--pubkey must be hex".into()))?;
    let sig = hex::decode(signature).map_err(|_| CliError::Config("--signature must be hex".into()))?;
    let ok = match scheme {
        Scheme::Ecdsa => {
            let key = GroupPoint::<Secp256k1>::decode(&key).ok_or(Error::InvalidEncoding("public key"))?;
            let sig = Signature::from_bytes(scheme, &sig)?;
            ecdsa_verify(&key, &tx.hash()?, &sig)
        }
        Scheme::Schnorr => {
            let key = GroupPoint::<Ristretto255>::decode(&key).ok_or(Error::InvalidEncoding("public key"))?;
            let sig = Signature::from_bytes(scheme, &sig)?;
            schnorr_verify(&key, &tx.canonical_bytes()?, &sig)
        }
    };
    println!("verified: {ok}");
    if ok {
        Ok(())
    } else {
        Err(CliError::Rejected)
    }
}

fn bench_sizes(cli: &Cli) -> CliResult<()> {
    let mut rng = thread_rng();
    let opts = KeygenOptions { paillier_bits: cli.paillier_bits };
    let policy = Policy::new(["bench-destination"], None)?;
    let tx = Transaction {
        version: 1,
        asset: "BTC".into(),
        source_address: "bench-source".into(),
        destination_address: "bench-destination".into(),
        amount: 1,
        nonce: 0,
    };
    let mut envelopes = Vec::new();

    let mut g = generate_share::<Secp256k1, _>(Scheme::Ecdsa, Role::Gateway, &opts, &mut rng)?;
    let mut c = generate_share::<Secp256k1, _>(Scheme::Ecdsa, Role::Core, &opts, &mut rng)?;
    g.combine_public_key(&c.public_share())?;
    c.combine_public_key(&g.public_share())?;
    let (session, msg1) = sign::ecdsa_gateway_init(&g, &tx, &mut rng)?;
    let msg2 = sign::ecdsa_core_respond(&c, &msg1, &tx, &policy, &mut rng)?;
    envelopes.push(Envelope::new(session.id(), Message::EcdsaRequest { tx: tx.clone(), msg: msg1 }).encode()?);
    envelopes.push(Envelope::new(session.id(), Message::EcdsaResponse(msg2)).encode()?);

    let mut g = generate_share::<Ristretto255, _>(Scheme::Schnorr, Role::Gateway, &opts, &mut rng)?;
    let mut c = generate_share::<Ristretto255, _>(Scheme::Schnorr, Role::Core, &opts, &mut rng)?;
    g.combine_public_key(&c.public_share())?;
    c.combine_public_key(&g.public_share())?;
    let (session, msg1) = sign::schnorr_gateway_init(&g, &tx, &mut rng)?;
    let msg2 = sign::schnorr_core_respond(&c, &msg1, &policy, &mut rng)?;
    envelopes.push(Envelope::new(session.id(), Message::SchnorrRequest(msg1)).encode()?);
    envelopes.push(Envelope::new(session.id(), Message::SchnorrResponse(msg2)).encode()?);

    let rows = envelopes
        .iter()
        .map(|e| sizes::measure(e, 256, cli.paillier_bits))
        .collect::<Result<Vec<_>, _>>()?;
    println!("paillier modulus: {} bits; sizes in bytes; extra = values other than the raw tx", cli.paillier_bits);
    print!("{}", sizes::render(&rows));
    println!("published columns: figures as printed (raw/compressed), then the same figures read as bits");
    Ok(())
}
