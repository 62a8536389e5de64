//! On-disk cache of equilibrium measures and transport maps.
//!
//! Entries are JSON files named by a hash of their key. Writes go to a temporary file in the
//! same directory and are renamed into place; existing entries are never rewritten.

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::equilibrium::{solve_equilibrium, EquilibriumMeasure, Method, Potential};
use crate::error::{Error, Result};
use crate::fluctuations::TestFunction;
use crate::transport::{solve_transport, TransportMap, TransportState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryKind {
    Equilibrium,
    Transport,
}

impl EntryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EntryKind::Equilibrium => "equilibrium",
            EntryKind::Transport => "transport",
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Stored<T> {
    kind: EntryKind,
    key: String,
    /// Solver residual: Euler-Lagrange for measures, master-equation for maps.
    residual: f64,
    payload: T,
}

/// Header-only view used by [`cache_inspect`].
#[derive(Deserialize)]
struct Header {
    kind: EntryKind,
    key: String,
    residual: f64,
}

/// One line of a cache listing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub file: String,
    pub kind: Option<EntryKind>,
    pub key: String,
    pub residual: Option<f64>,
    /// Set when the file cannot be parsed; such entries are skipped, not fatal.
    pub corrupt: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

fn file_name(kind: EntryKind, key: &str) -> String {
    let digest = Sha256::digest(key.as_bytes());
    let hex: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
    format!("{}-{hex}.json", kind.as_str())
}

pub fn equilibrium_key(potential: &Potential, grid_size: usize, method: Method) -> String {
    let coeffs = potential.coefficients().map(|c| format!("{c:?}")).unwrap_or_default();
    format!("{}|{coeffs}|{grid_size}|{}", potential.label(), method.as_str())
}

pub fn transport_key(eq_key: &str, xi: &TestFunction) -> String {
    format!("{eq_key}|{}", xi.descriptor())
}

impl Cache {
    pub fn new(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Cache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn load<T: DeserializeOwned>(&self, kind: EntryKind, key: &str) -> Option<T> {
        let path = self.dir.join(file_name(kind, key));
        let bytes = fs::read(path).ok()?;
        let s: Stored<T> = serde_json::from_slice(&bytes).ok()?;
        (s.kind == kind && s.key == key).then_some(s.payload)
    }

    fn store<T: Serialize>(&self, kind: EntryKind, key: &str, residual: f64, payload: &T) -> Result<()> {
        let name = file_name(kind, key);
        let target = self.dir.join(&name);
        if target.exists() {
            return Ok(());
        }
        let stored = Stored { kind, key: key.to_string(), residual, payload };
        let bytes = serde_json::to_vec(&stored)?;
        let tmp = self.dir.join(format!(".{name}.{}.tmp", std::process::id()));
        let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(&bytes).and_then(|_| f.sync_all()).map_err(|e| Error::io(&tmp, e))?;
        drop(f);
        fs::rename(&tmp, &target).map_err(|e| Error::io(&target, e))
    }

    /// Cached equilibrium measure, solving and storing on a miss.
    pub fn equilibrium(&self, potential: &Potential, grid_size: usize, method: Method) -> Result<EquilibriumMeasure> {
        let key = equilibrium_key(potential, grid_size, method);
        if let Some(eq) = self.load(EntryKind::Equilibrium, &key) {
            return Ok(eq);
        }
        let eq = solve_equilibrium(potential, grid_size, method)?;
        if potential.coefficients().is_some() {
            self.store(EntryKind::Equilibrium, &key, eq.tolerances.el_residual_bulk, &eq)?;
        }
        Ok(eq)
    }

    /// Cached transport map for `xi` against a measure stored under `eq_key`.
    pub fn transport(
        &self,
        eq_key: &str,
        xi: &TestFunction,
        eq: &EquilibriumMeasure,
        potential: &Potential,
    ) -> Result<TransportMap> {
        let key = transport_key(eq_key, xi);
        if let Some(state) = self.load::<TransportState>(EntryKind::Transport, &key) {
            return TransportMap::from_state(state);
        }
        let map = solve_transport(xi, eq, potential)?;
        if let Some(state) = map.state() {
            self.store(EntryKind::Transport, &key, map.residual, &state)?;
        }
        Ok(map)
    }
}

/// Lists cache entries sorted by file name. A missing directory lists as empty.
pub fn cache_inspect(dir: impl AsRef<Path>) -> Result<Vec<CacheEntry>> {
    let dir = dir.as_ref();
    let rd = match fs::read_dir(dir) {
        Ok(rd) => rd,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(Error::io(dir, e)),
    };
    let mut out = Vec::new();
    for ent in rd {
        let ent = ent.map_err(|e| Error::io(dir, e))?;
        let file = ent.file_name().to_string_lossy().into_owned();
        if file.starts_with('.') || !file.ends_with(".json") {
            continue;
        }
        let entry = match fs::read(ent.path()).map_err(|e| e.to_string()).and_then(|b| {
            serde_json::from_slice::<Header>(&b).map_err(|e| e.to_string())
        }) {
            Ok(h) => CacheEntry { file, kind: Some(h.kind), key: h.key, residual: Some(h.residual), corrupt: None },
            Err(msg) => CacheEntry { file, kind: None, key: String::new(), residual: None, corrupt: Some(msg) },
        };
        out.push(entry);
    }
    out.sort_by(|a, b| a.file.cmp(&b.file));
    Ok(out)
}
