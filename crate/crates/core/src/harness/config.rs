//! Run configuration: a TOML file with sections [grid], [params],
//! [potential], [initial], [scheme], and [study], with identity round trips
//! and a content hash used to address cached reference solutions.

use crate::error::{Error, Result};
use crate::grid::{build_grid, Grid, SpinorField};
use crate::model::{sample_potentials, InitialData, PhysParams, PotentialSamples, PotentialSpec};
use crate::scheme::SchemeId;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub a: f64,
    pub b: f64,
    pub m: usize,
    pub dim: usize,
}

impl GridSpec {
    pub fn build(&self) -> Result<Arc<Grid>> {
        build_grid(self.a, self.b, self.m, self.dim)
    }

    /// Mesh size h = (b-a)/M.
    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.m as f64
    }

    /// The grid with mesh size `h` on the same domain; h must divide b-a
    /// into an even number of cells.
    pub fn with_h(&self, h: f64) -> Result<GridSpec> {
        let m_real = (self.b - self.a) / h;
        let m = m_real.round() as usize;
        if (m_real - m as f64).abs() > 1e-9 * m_real || m % 2 != 0 || m < 4 {
            return Err(Error::InvalidGrid(format!(
                "mesh size {h} does not give an even node count on ({}, {})",
                self.a, self.b
            )));
        }
        Ok(GridSpec { m, ..*self })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialSection {
    pub preset: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialSection {
    pub preset: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeSection {
    pub id: SchemeId,
    pub tau: f64,
    pub t_final: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observer_stride: Option<u64>,
}

/// How the reference solution for error measurement is produced.
/// `generate` runs S4c on a finer mesh/step (cached by config hash),
/// `load` requires a cached reference, `analytic` uses the exact
/// constant-potential plane-wave superposition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSpec {
    #[serde(default = "default_policy")]
    pub policy: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
}

fn default_policy() -> String {
    "generate".into()
}

impl Default for ReferenceSpec {
    fn default() -> Self {
        ReferenceSpec {
            policy: default_policy(),
            m: None,
            tau: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StudySection {
    #[serde(default)]
    pub reference: ReferenceSpec,
    /// Dyadic ladder of mesh sizes or time steps, strictly decreasing.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ladder: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub param_ladder: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub params: PhysParams,
    pub potential: PotentialSection,
    pub initial: InitialSection,
    pub scheme: SchemeSection,
    #[serde(default)]
    pub study: StudySection,
}

impl RunConfig {
    /// The 1D comparison setup: Omega = (-32,32), classical parameters,
    /// the rational potential pair, Gaussian data.
    pub fn paper_1d() -> Self {
        RunConfig {
            grid: GridSpec {
                a: -32.0,
                b: 32.0,
                m: 1024,
                dim: 1,
            },
            params: PhysParams::classical(),
            potential: PotentialSection {
                preset: "paper-1d".into(),
            },
            initial: InitialSection {
                preset: "gaussian-1d".into(),
            },
            scheme: SchemeSection {
                id: SchemeId::S4c,
                tau: 0.1,
                t_final: 6.0,
                observer_stride: None,
            },
            study: StudySection::default(),
        }
    }

    /// The 2D honeycomb setup: Omega = (-10,10)^2, classical parameters,
    /// zero magnetic potential, Gaussian data.
    pub fn honeycomb_2d() -> Self {
        RunConfig {
            grid: GridSpec {
                a: -10.0,
                b: 10.0,
                m: 320,
                dim: 2,
            },
            params: PhysParams::classical(),
            potential: PotentialSection {
                preset: "honeycomb-2d".into(),
            },
            initial: InitialSection {
                preset: "gaussian-2d".into(),
            },
            scheme: SchemeSection {
                id: SchemeId::S4c,
                tau: 1e-3,
                t_final: 2.0,
                observer_stride: None,
            },
            study: StudySection::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.grid.build()?;
        self.potential_spec()?;
        self.initial_data()?;
        if !(self.scheme.tau.is_finite() && self.scheme.tau != 0.0) {
            return Err(Error::Config(format!("tau = {}", self.scheme.tau)));
        }
        Ok(())
    }

    pub fn potential_spec(&self) -> Result<PotentialSpec> {
        PotentialSpec::preset(&self.potential.preset, self.grid.dim)
    }

    pub fn initial_data(&self) -> Result<InitialData> {
        InitialData::parse(&self.initial.preset)
    }

    /// Grid, sampled potentials, and sampled initial data.
    pub fn materialize(&self) -> Result<(Arc<Grid>, PotentialSamples, SpinorField)> {
        self.validate()?;
        let grid = self.grid.build()?;
        let samples = sample_potentials(&self.potential_spec()?, &grid)?;
        let phi0 = self.initial_data()?.sample(&grid, &self.params)?;
        Ok((grid, samples, phi0))
    }

    /// The S4c configuration that produces this run's reference solution.
    pub fn reference_config(&self) -> Result<RunConfig> {
        let r = &self.study.reference;
        let mut cfg = self.clone();
        cfg.scheme.id = SchemeId::S4c;
        if let Some(m) = r.m {
            cfg.grid.m = m;
        }
        if let Some(tau) = r.tau {
            cfg.scheme.tau = tau;
        }
        cfg.scheme.observer_stride = None;
        cfg.study = StudySection {
            reference: ReferenceSpec {
                policy: "self".into(),
                m: None,
                tau: None,
            },
            ..Default::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?)?;
        Ok(())
    }

    /// Content hash over the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(json.as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
