//! Content-addressed cache of reference solutions: raw little-endian
//! complex doubles plus a JSON sidecar carrying the grid, the producing
//! configuration, and its hash.

use super::config::{GridSpec, RunConfig};
use crate::error::{Error, Result};
use crate::grid::SpinorField;
use crate::linalg::C64;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Sidecar {
    version: u32,
    hash: String,
    grid: GridSpec,
    config: RunConfig,
}

pub struct ReferenceStore {
    dir: PathBuf,
}

impl ReferenceStore {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(ReferenceStore { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn bin_path(&self, hash: &str) -> PathBuf {
        self.dir.join(format!("{hash}.bin"))
    }

    fn json_path(&self, hash: &str) -> PathBuf {
        self.dir.join(format!("{hash}.json"))
    }

    pub fn contains(&self, cfg: &RunConfig) -> bool {
        let h = cfg.hash();
        self.bin_path(&h).exists() && self.json_path(&h).exists()
    }

    pub fn save(&self, cfg: &RunConfig, field: &SpinorField) -> Result<()> {
        let hash = cfg.hash();
        let sidecar = Sidecar {
            version: FORMAT_VERSION,
            hash: hash.clone(),
            grid: cfg.grid,
            config: cfg.clone(),
        };
        let json =
            serde_json::to_string_pretty(&sidecar).map_err(|e| Error::Reference(e.to_string()))?;
        fs::write(self.json_path(&hash), json)?;

        let mut buf = Vec::with_capacity(field.grid.node_count() * 2 * 16);
        for comp in &field.comps {
            for z in comp {
                buf.extend_from_slice(&z.re.to_le_bytes());
                buf.extend_from_slice(&z.im.to_le_bytes());
            }
        }
        let mut f = fs::File::create(self.bin_path(&hash))?;
        f.write_all(&buf)?;
        Ok(())
    }

    pub fn load(&self, cfg: &RunConfig) -> Result<Option<SpinorField>> {
        let hash = cfg.hash();
        let (bp, jp) = (self.bin_path(&hash), self.json_path(&hash));
        if !bp.exists() || !jp.exists() {
            return Ok(None);
        }
        let sidecar: Sidecar = serde_json::from_str(&fs::read_to_string(&jp)?)
            .map_err(|e| Error::Reference(format!("sidecar {}: {e}", jp.display())))?;
        if sidecar.version != FORMAT_VERSION {
            return Err(Error::Reference(format!(
                "unsupported reference version {}",
                sidecar.version
            )));
        }
        if sidecar.hash != hash || sidecar.grid != cfg.grid {
            return Err(Error::Reference(format!(
                "sidecar mismatch for {}",
                jp.display()
            )));
        }
        let grid = cfg.grid.build()?;
        let n = grid.node_count();
        let mut bytes = Vec::new();
        fs::File::open(&bp)?.read_to_end(&mut bytes)?;
        if bytes.len() != n * 2 * 16 {
            return Err(Error::Reference(format!(
                "reference {} has {} bytes, expected {}",
                bp.display(),
                bytes.len(),
                n * 2 * 16
            )));
        }
        let mut field = SpinorField::zeros(grid);
        let mut off = 0;
        for comp in field.comps.iter_mut() {
            for z in comp.iter_mut() {
                let re = f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
                let im = f64::from_le_bytes(bytes[off + 8..off + 16].try_into().unwrap());
                *z = C64::new(re, im);
                off += 16;
            }
        }
        Ok(Some(field))
    }

    /// Loads the cached field or computes and stores it. Returns the field
    /// and whether it came from the cache.
    pub fn get_or_compute(
        &self,
        cfg: &RunConfig,
        compute: impl FnOnce() -> Result<SpinorField>,
    ) -> Result<(SpinorField, bool)> {
        if let Some(f) = self.load(cfg)? {
            return Ok((f, true));
        }
        let f = compute()?;
        self.save(cfg, &f)?;
        Ok((f, false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{InitialData, PhysParams};

    #[test]
    fn save_load_round_trip_is_bit_exact() {
        let tmp = tempfile::tempdir().unwrap();
        let store = ReferenceStore::new(tmp.path()).unwrap();
        let mut cfg = RunConfig::paper_1d();
        cfg.grid.m = 64;
        let grid = cfg.grid.build().unwrap();
        let field = InitialData::Gaussian1d
            .sample(&grid, &PhysParams::classical())
            .unwrap();

        assert!(!store.contains(&cfg));
        store.save(&cfg, &field).unwrap();
        assert!(store.contains(&cfg));
        let loaded = store.load(&cfg).unwrap().unwrap();
        for c in 0..2 {
            assert_eq!(field.comps[c], loaded.comps[c]);
        }
    }

    #[test]
    fn get_or_compute_uses_the_cache() {
        let tmp = tempfile::tempdir().unwrap();
        let store = ReferenceStore::new(tmp.path()).unwrap();
        let mut cfg = RunConfig::paper_1d();
        cfg.grid.m = 32;
        let grid = cfg.grid.build().unwrap();
        let field = InitialData::Gaussian1d
            .sample(&grid, &PhysParams::classical())
            .unwrap();

        let (first, cached) = store.get_or_compute(&cfg, || Ok(field.clone())).unwrap();
        assert!(!cached);
        let (second, cached) = store
            .get_or_compute(&cfg, || panic!("must not recompute"))
            .unwrap();
        assert!(cached);
        assert_eq!(first.comps[0], second.comps[0]);
    }
}
