#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const PASSPHRASE: &str = "correct horse";
pub const BITS: &str = "1024";

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Run {
    fn from(out: Output) -> Self {
        Run {
            code: out.status.code().unwrap_or(-1),
            stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
            stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
        }
    }

    #[track_caller]
    pub fn ok(self) -> Self {
        assert_eq!(self.code, 0, "stdout:\n{}\nstderr:\n{}", self.stdout, self.stderr);
        self
    }

    #[track_caller]
    pub fn fails_with(self, code: i32) -> Self {
        assert_eq!(self.code, code, "stdout:\n{}\nstderr:\n{}", self.stdout, self.stderr);
        self
    }

    /// Value of the first `key: value` line on stdout.
    pub fn field(&self, key: &str) -> String {
        let prefix = format!("{key}: ");
        self.stdout
            .lines()
            .find_map(|l| l.strip_prefix(&prefix))
            .unwrap_or_else(|| panic!("no {key} in:\n{}", self.stdout))
            .to_owned()
    }

    /// Path printed on an `envelope:` line, without the size suffix.
    pub fn envelope(&self) -> PathBuf {
        let line = self.field("envelope");
        PathBuf::from(line.rsplit_once(" (").map_or(line.as_str(), |(p, _)| p))
    }
}

pub fn coldsig(args: &[&str]) -> Run {
    Run::from(
        Command::new(env!("CARGO_BIN_EXE_coldsig"))
            .args(args)
            .env("CW_PASSPHRASE", PASSPHRASE)
            .output()
            .expect("spawn coldsig"),
    )
}

pub fn coldsig_without_passphrase(args: &[&str]) -> Run {
    Run::from(
        Command::new(env!("CARGO_BIN_EXE_coldsig"))
            .args(args)
            .env_remove("CW_PASSPHRASE")
            .output()
            .expect("spawn coldsig"),
    )
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Two working directories with nothing in common but the envelopes copied between them.
pub struct AirGap {
    _root: tempfile::TempDir,
    pub gateway: PathBuf,
    pub core: PathBuf,
    pub scheme: &'static str,
}

impl AirGap {
    pub fn new(scheme: &'static str) -> Self {
        let root = tempfile::tempdir().unwrap();
        let gateway = root.path().join("gateway");
        let core = root.path().join("core");
        fs::create_dir(&gateway).unwrap();
        fs::create_dir(&core).unwrap();
        fs::write(core.join("policy.txt"), "# cold storage\ncold-vault-1\ncold-vault-2\nmax_amount = 1000\n").unwrap();
        AirGap { _root: root, gateway, core, scheme }
    }

    /// Copies an envelope across the gap into `to`.
    pub fn carry(&self, file: &Path, to: &Path) -> PathBuf {
        let dest = to.join(file.file_name().unwrap());
        fs::copy(file, &dest).unwrap();
        dest
    }

    pub fn at(&self, dir: &Path, args: &[&str]) -> Run {
        let mut all = vec!["--workdir", s(dir)];
        all.extend_from_slice(args);
        coldsig(&all)
    }

    pub fn keygen(&self, dir: &Path, role: &str) -> Run {
        self.at(dir, &["--role", role, "--scheme", self.scheme, "--paillier-bits", BITS, "keygen"])
    }

    /// Runs both keygens and both finishes; returns the shared public key hex.
    pub fn establish(&self) -> String {
        let g = self.keygen(&self.gateway, "gateway").ok().envelope();
        let c = self.keygen(&self.core, "core").ok().envelope();
        let c_in = self.carry(&c, &self.gateway);
        let g_in = self.carry(&g, &self.core);
        let a = self.at(&self.gateway, &["keygen-finish", s(&c_in)]).ok();
        let b = self.at(&self.core, &["keygen-finish", s(&g_in)]).ok();
        assert_eq!(a.field("shared_public"), b.field("shared_public"));
        assert_eq!(a.field("address"), b.field("address"));
        a.field("shared_public")
    }

    pub fn write_tx(&self, name: &str, destination: &str, amount: u64, nonce: u64) -> PathBuf {
        let path = self.gateway.join(name);
        let json = format!(
            r#"{{"version":1,"asset":"BTC","source":"hot-wallet-1","destination":"{destination}","amount":{amount},"nonce":{nonce}}}"#
        );
        fs::write(&path, json).unwrap();
        path
    }

    pub fn sign_init(&self, tx: &Path) -> Run {
        self.at(&self.gateway, &["sign-init", s(tx)])
    }

    pub fn respond(&self, request: &Path) -> Run {
        let request = self.carry(request, &self.core);
        let policy = self.core.join("policy.txt");
        self.at(&self.core, &["--policy", s(&policy), "sign-respond", s(&request)])
    }

    pub fn finalize(&self, response: &Path) -> Run {
        let response = self.carry(response, &self.gateway);
        self.at(&self.gateway, &["sign-finalize", s(&response)])
    }

    pub fn verify(&self, pubkey: &str, tx: &Path, sig: &str) -> Run {
        coldsig(&["--scheme", self.scheme, "verify", "--pubkey", pubkey, "--tx", s(tx), "--signature", sig])
    }
}
