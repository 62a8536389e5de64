use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

use crate::electrostatics::validate_points;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"LGCF";
const FORMAT_VERSION: u32 = 1;

/// Where a configuration came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub sampler: String,
    pub seed: u64,
    /// Sweeps for MCMC, 1 for direct samplers.
    pub steps: usize,
    pub acceptance_rate: Option<f64>,
}

/// A sorted point configuration `X_N` at inverse temperature `beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    points: Vec<f64>,
    pub beta: f64,
    pub provenance: Provenance,
}

impl Configuration {
    /// Sorts the points and rejects coincidences.
    pub fn new(mut points: Vec<f64>, beta: f64, provenance: Provenance) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidBeta { beta });
        }
        points.sort_by(|a, b| a.total_cmp(b));
        validate_points(&points)?;
        Ok(Configuration { points, beta, provenance })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    /// Points in blown-up coordinates `x' = N x`.
    pub fn blown_up(&self) -> Vec<f64> {
        let n = self.n() as f64;
        self.points.iter().map(|x| n * x).collect()
    }

    /// One point per row under a `x` header.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path.as_ref())?;
        w.write_record(["x"])?;
        for x in &self.points {
            w.write_record([format!("{x:.17e}")])?;
        }
        w.flush().map_err(|e| Error::io(path.as_ref(), e))
    }

    /// Reads points written by [`Configuration::write_csv`]; metadata is supplied by the caller.
    pub fn read_csv(path: impl AsRef<Path>, beta: f64, provenance: Provenance) -> Result<Self> {
        let mut r = csv::Reader::from_path(path.as_ref())?;
        let mut pts = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let v: f64 = rec
                .get(0)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::invalid("points", format!("bad row in {}", path.as_ref().display())))?;
            pts.push(v);
        }
        Configuration::new(pts, beta, provenance)
    }

    /// Little-endian binary container: magic, version, n, beta, seed, steps, sampler id, points.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(48 + 8 * self.n());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.n() as u64).to_le_bytes());
        out.extend_from_slice(&self.beta.to_le_bytes());
        out.extend_from_slice(&self.provenance.seed.to_le_bytes());
        out.extend_from_slice(&(self.provenance.steps as u64).to_le_bytes());
        out.extend_from_slice(&self.provenance.acceptance_rate.unwrap_or(f64::NAN).to_le_bytes());
        let id = self.provenance.sampler.as_bytes();
        out.extend_from_slice(&(id.len() as u32).to_le_bytes());
        out.extend_from_slice(id);
        for x in &self.points {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::invalid("binary", m.to_string());
        let mut cur = bytes;
        let mut take = |k: usize| -> Result<&[u8]> {
            if cur.len() < k {
                return Err(bad("truncated container"));
            }
            let (a, b) = cur.split_at(k);
            cur = b;
            Ok(a)
        };
        if take(4)? != MAGIC {
            return Err(bad("bad magic"));
        }
        let version = u32::from_le_bytes(take(4)?.try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(bad("unsupported version"));
        }
        let n = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
        let beta = f64::from_le_bytes(take(8)?.try_into().unwrap());
        let seed = u64::from_le_bytes(take(8)?.try_into().unwrap());
        let steps = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
        let acc = f64::from_le_bytes(take(8)?.try_into().unwrap());
        let id_len = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
        let sampler = String::from_utf8(take(id_len)?.to_vec()).map_err(|_| bad("sampler id is not UTF-8"))?;
        let mut points = Vec::with_capacity(n);
        for _ in 0..n {
            points.push(f64::from_le_bytes(take(8)?.try_into().unwrap()));
        }
        let acceptance_rate = if acc.is_nan() { None } else { Some(acc) };
        Configuration::new(points, beta, Provenance { sampler, seed, steps, acceptance_rate })
    }

    pub fn write_binary(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::fs::File::create(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        f.write_all(&self.to_bytes()).map_err(|e| Error::io(path.as_ref(), e))
    }

    pub fn read_binary(path: impl AsRef<Path>) -> Result<Self> {
        let mut buf = Vec::new();
        std::fs::File::open(path.as_ref())
            .and_then(|mut f| f.read_to_end(&mut buf))
            .map_err(|e| Error::io(path.as_ref(), e))?;
        Configuration::from_bytes(&buf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prov() -> Provenance {
        Provenance { sampler: "test".into(), seed: 7, steps: 1, acceptance_rate: Some(0.3) }
    }

    #[test]
    fn new_sorts_and_rejects_duplicates() {
        let c = Configuration::new(vec![0.3, -1.0, 0.1], 2.0, prov()).unwrap();
        assert_eq!(c.points(), &[-1.0, 0.1, 0.3]);
        assert!(matches!(
            Configuration::new(vec![0.0, 0.0, 1.0], 2.0, prov()),
            Err(Error::CoincidentPoints { .. })
        ));
        assert!(matches!(Configuration::new(vec![0.0], 0.0, prov()), Err(Error::InvalidBeta { .. })));
    }

    #[test]
    fn binary_round_trip() {
        let c = Configuration::new(vec![-0.5, 0.25, 0.75], 4.0, prov()).unwrap();
        let back = Configuration::from_bytes(&c.to_bytes()).unwrap();
        assert_eq!(c, back);
        assert!(Configuration::from_bytes(&c.to_bytes()[..20]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.csv");
        let c = Configuration::new(vec![-0.123456789012345, 0.5, 1.0 / 3.0], 1.0, prov()).unwrap();
        c.write_csv(&p).unwrap();
        let back = Configuration::read_csv(&p, 1.0, prov()).unwrap();
        assert_eq!(c.points(), back.points());
    }
}
