//! File layout inside a working directory, passphrase lookup and session
//! locking.

use std::fs::{self, OpenOptions};
use std::io::ErrorKind;
use std::path::{Path, PathBuf};

use coldsig::sign::SessionId;
use coldsig::Error;

use crate::{CliError, CliResult};

pub const PASSPHRASE_VAR: &str = "CW_PASSPHRASE";

pub struct Workdir {
    root: PathBuf,
    share: Option<PathBuf>,
}

impl Workdir {
    pub fn new(root: &Path, share: Option<&Path>) -> CliResult<Self> {
        fs::create_dir_all(root).map_err(Error::from)?;
        Ok(Workdir { root: root.to_path_buf(), share: share.map(Path::to_path_buf) })
    }

    pub fn share(&self) -> PathBuf {
        self.share.clone().unwrap_or_else(|| self.root.join("share.cws"))
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn session(&self, id: SessionId) -> CliResult<PathBuf> {
        let dir = self.root.join("sessions");
        fs::create_dir_all(&dir).map_err(Error::from)?;
        Ok(dir.join(format!("{id}.session")))
    }
}

/// The share passphrase. Shares and sessions are always sealed, so a
/// missing passphrase is a configuration error.
pub fn passphrase() -> CliResult<String> {
    match std::env::var(PASSPHRASE_VAR) {
        Ok(p) if !p.is_empty() => Ok(p),
        _ => Err(CliError::Config(format!("{PASSPHRASE_VAR} must hold the share passphrase"))),
    }
}

pub fn read(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| match e.kind() {
        ErrorKind::NotFound => Error::NotFound(path.display().to_string()).into(),
        _ => Error::Io(e).into(),
    })
}

pub fn read_text(path: &Path) -> CliResult<String> {
    String::from_utf8(read(path)?).map_err(|_| CliError::Config(format!("{} is not UTF-8", path.display())))
}

pub fn write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|e| Error::Io(e).into())
}

/// Exclusive lock on a session file, released on drop.
pub struct SessionLock {
    path: PathBuf,
}

impl SessionLock {
    pub fn acquire(session: &Path) -> CliResult<Self> {
        let path = session.with_extension("lock");
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(SessionLock { path }),
            Err(e) if e.kind() == ErrorKind::AlreadyExists => {
                Err(Error::AlreadyExists(format!("lock {}", path.display())).into())
            }
            Err(e) => Err(Error::Io(e).into()),
        }
    }
}

impl Drop for SessionLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}
