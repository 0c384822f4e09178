//! Study drivers: single runs with observers, cached or analytic reference
//! solutions, convergence ladders, regime sweeps with resolution-diagonal
//! flags, and long-time error evolution.

use super::config::{ReferenceSpec, RunConfig};
use super::reference::ReferenceStore;
use super::report::{LongTimeReport, StudyReport, StudyRow};
use crate::error::{Error, Result};
use crate::grid::{dft_forward, dft_inverse, SpinorField};
use crate::linalg::exp_hermitian_2;
use crate::model::PotentialSamples;
use crate::observables::{energy, error_metrics, mass, ObservableRecord};
use crate::scheme::{auto_stride, step_count, Evolution, Observer, SchemeId};
use rayon::prelude::*;
use std::sync::Arc;
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Space,
    Time,
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "space" | "spatial" | "h" => Ok(Axis::Space),
            "time" | "temporal" | "tau" => Ok(Axis::Time),
            other => Err(Error::Config(format!("unknown axis '{other}'"))),
        }
    }
}

/// Result of one evolution: final field, sampled observables, timing split
/// into setup (grid, sampling, propagator caches) and the step loop.
pub struct RunOutput {
    pub field: SpinorField,
    pub records: Vec<ObservableRecord>,
    pub steps: u64,
    pub wall_s: f64,
    pub setup_s: f64,
}

fn drive(
    cfg: &RunConfig,
    mut on_sample: impl FnMut(u64, f64, &SpinorField, &PotentialSamples) -> Result<()>,
) -> Result<RunOutput> {
    let t0 = Instant::now();
    let (_grid, samples, phi0) = cfg.materialize()?;
    let n_steps = step_count(cfg.scheme.tau, cfg.scheme.t_final);
    let stride = cfg
        .scheme
        .observer_stride
        .unwrap_or_else(|| auto_stride(n_steps))
        .max(1);
    let mut ev = Evolution::new(cfg.scheme.id, &cfg.params, &samples, phi0, cfg.scheme.tau)?;
    let setup_s = t0.elapsed().as_secs_f64();

    if !ev.field.is_finite() {
        return Err(Error::NonFinite("initial data".into()));
    }
    on_sample(0, 0.0, &ev.field, &samples)?;
    let t1 = Instant::now();
    for n in 1..=n_steps {
        ev.advance();
        if n <= 100 || n % stride == 0 || n == n_steps {
            if !ev.field.is_finite() {
                return Err(Error::NonFinite(format!("field at step {n}")));
            }
            on_sample(n, ev.t(), &ev.field, &samples)?;
        }
    }
    let wall_s = t1.elapsed().as_secs_f64();
    Ok(RunOutput {
        field: ev.field,
        records: Vec::new(),
        steps: n_steps,
        wall_s,
        setup_s,
    })
}

/// Runs one configuration, recording mass and energy on the observer stride.
pub fn run_single(cfg: &RunConfig) -> Result<RunOutput> {
    let mut records = Vec::new();
    let mut out = drive(cfg, |_n, t, field, samples| {
        records.push(ObservableRecord {
            t,
            mass: mass(field),
            energy: energy(field, samples, &cfg.params)?,
            e_phi: None,
            e_phi_rel: None,
        });
        Ok(())
    })?;
    out.records = records;
    Ok(out)
}

/// Runs one configuration without observers; fastest path for studies.
pub fn run_to_final(cfg: &RunConfig) -> Result<RunOutput> {
    let mut leaner = cfg.clone();
    leaner.scheme.observer_stride = Some(u64::MAX);
    drive(&leaner, |_, _, _, _| Ok(()))
}

/// Exact solution at t_final for constant potentials: every Fourier mode is
/// advanced by the closed-form 2x2 unitary of its symbol. Errors out if the
/// sampled potentials are not constant.
pub fn analytic_constant_reference(cfg: &RunConfig) -> Result<SpinorField> {
    let (grid, samples, phi0) = cfg.materialize()?;
    let spread = |plane: &[f64]| -> f64 {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &x in plane {
            lo = lo.min(x);
            hi = hi.max(x);
        }
        hi - lo
    };
    if spread(&samples.v) > 1e-12 || samples.a.iter().any(|p| spread(p) > 1e-12) {
        return Err(Error::Unsupported(
            "analytic reference requires constant potentials".into(),
        ));
    }
    let v0 = samples.v[0];
    let a0: Vec<f64> = samples.a.iter().map(|p| p[0]).collect();
    let p = &cfg.params;
    let t = cfg.scheme.t_final;
    let mass_h = p.nu / (p.epsilon * p.epsilon);

    let mut hat = dft_forward(&phi0);
    let m = grid.m;
    for idx in 0..grid.node_count() {
        let (k1, k2) = match grid.dim {
            1 => (grid.mu(idx), 0.0),
            _ => (grid.mu(idx / m), grid.mu(idx % m)),
        };
        let mut h = [p.delta * k1 / p.epsilon - a0[0], 0.0, mass_h];
        if grid.dim == 2 {
            h[1] = p.delta * k2 / p.epsilon - a0[1];
        }
        // i delta d_t = (h.sigma + v0) in Fourier space
        let u = exp_hermitian_2(t / p.delta, v0, h, 1e-300);
        let vin = [hat.coeffs[0][idx], hat.coeffs[1][idx]];
        let vout = u.matvec(&vin);
        hat.coeffs[0][idx] = vout[0];
        hat.coeffs[1][idx] = vout[1];
    }
    Ok(dft_inverse(&hat))
}

/// Produces the reference solution for `base` according to its reference
/// policy. Returns the field and whether it was loaded from the cache.
pub fn compute_reference(base: &RunConfig, store: &ReferenceStore) -> Result<(SpinorField, bool)> {
    match base.study.reference.policy.as_str() {
        "analytic" => {
            let ref_cfg = base.reference_config()?;
            Ok((analytic_constant_reference(&ref_cfg)?, false))
        }
        "load" => {
            let ref_cfg = base.reference_config()?;
            store.load(&ref_cfg)?.map(|f| (f, true)).ok_or_else(|| {
                Error::Reference(format!(
                    "no cached reference for hash {} in {}",
                    ref_cfg.hash(),
                    store.dir().display()
                ))
            })
        }
        "generate" => {
            let ref_cfg = base.reference_config()?;
            store.get_or_compute(&ref_cfg, || run_to_final(&ref_cfg).map(|out| out.field))
        }
        other => Err(Error::Config(format!("unknown reference policy '{other}'"))),
    }
}

fn validate_ladder(ladder: &[f64]) -> Result<()> {
    if ladder.is_empty() {
        return Err(Error::Config("empty ladder".into()));
    }
    for w in ladder.windows(2) {
        let ratio = w[0] / w[1];
        if !(ratio > 1.0) {
            return Err(Error::Config(format!(
                "ladder must be strictly decreasing, got {} then {}",
                w[0], w[1]
            )));
        }
        let k = ratio.log2().round();
        if k < 1.0 || (ratio.log2() - k).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "ladder must be dyadic, got ratio {ratio}"
            )));
        }
    }
    if ladder.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
        return Err(Error::Config("ladder entries must be positive".into()));
    }
    Ok(())
}

fn point_config(base: &RunConfig, axis: Axis, value: f64, scheme: SchemeId) -> Result<RunConfig> {
    let mut cfg = base.clone();
    cfg.scheme.id = scheme;
    match axis {
        Axis::Time => cfg.scheme.tau = value,
        Axis::Space => cfg.grid = cfg.grid.with_h(value)?,
    }
    Ok(cfg)
}

fn check_reference_finer(base: &RunConfig, axis: Axis, ladder: &[f64]) -> Result<()> {
    let r = &base.study.reference;
    if r.policy == "analytic" {
        return Ok(());
    }
    match axis {
        Axis::Time => {
            let ref_tau = r.tau.unwrap_or(base.scheme.tau);
            let finest = *ladder.last().unwrap();
            if !(ref_tau < finest) {
                return Err(Error::Config(format!(
                    "reference tau {ref_tau} is not finer than the finest ladder point {finest}"
                )));
            }
        }
        Axis::Space => {
            let ref_m = r.m.unwrap_or(base.grid.m);
            let finest_m = base.grid.with_h(*ladder.last().unwrap())?.m;
            if !(ref_m > finest_m) {
                return Err(Error::Config(format!(
                    "reference grid M={ref_m} is not finer than the finest ladder point M={finest_m}"
                )));
            }
        }
    }
    Ok(())
}

/// Runs a dyadic refinement ladder for several schemes against one shared
/// reference and tabulates errors, rates, and timings. Ladder points execute
/// concurrently.
pub fn comparison_study(
    base: &RunConfig,
    axis: Axis,
    ladder: &[f64],
    schemes: &[SchemeId],
    store: &ReferenceStore,
) -> Result<StudyReport> {
    validate_ladder(ladder)?;
    check_reference_finer(base, axis, ladder)?;
    let (reference, loaded) = compute_reference(base, store)
        .map_err(|e| Error::Reference(format!("reference generation failed: {e}")))?;
    let reference = Arc::new(reference);

    let jobs: Vec<(SchemeId, f64)> = schemes
        .iter()
        .flat_map(|&s| ladder.iter().map(move |&x| (s, x)))
        .collect();
    let rows: Result<Vec<StudyRow>> = jobs
        .par_iter()
        .map(|&(scheme, value)| {
            let cfg = point_config(base, axis, value, scheme)?;
            let out = run_to_final(&cfg)?;
            let m = error_metrics(&out.field, &reference, &cfg.params)?;
            Ok(StudyRow {
                scheme: scheme.to_string(),
                h: cfg.grid.h(),
                tau: cfg.scheme.tau,
                param: None,
                e_phi: m.e_phi,
                e_phi_rel: m.e_phi_rel,
                e_rho: m.e_rho,
                e_rho_rel: m.e_rho_rel,
                e_j: m.e_j,
                e_j_rel: m.e_j_rel,
                rate: None,
                diag: false,
                steps: out.steps,
                wall_s: out.wall_s,
                setup_s: out.setup_s,
            })
        })
        .collect();

    let mut report = StudyReport::new(
        format!("convergence-{axis:?}").to_lowercase(),
        base.hash(),
        loaded,
    );
    report.rows = rows?;
    match axis {
        Axis::Time => report.fill_rates(|r| r.tau),
        Axis::Space => report.fill_rates(|r| r.h),
    }
    Ok(report)
}

/// Single-scheme convergence study along one axis (the scheme comes from
/// the base configuration).
pub fn convergence_study(
    base: &RunConfig,
    axis: Axis,
    ladder: &[f64],
    store: &ReferenceStore,
) -> Result<StudyReport> {
    comparison_study(base, axis, ladder, &[base.scheme.id], store)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// delta = nu = 1, epsilon -> 0; temporal oscillation O(eps^2).
    Nonrelativistic,
    /// epsilon = nu = 1, delta -> 0; spatial and temporal oscillation O(delta).
    Semiclassical,
    /// delta = 1, nu = eps -> 0; temporal oscillation O(eps).
    SimultaneousLimit,
}

impl std::str::FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nr" | "nonrelativistic" => Ok(Regime::Nonrelativistic),
            "sc" | "semiclassical" => Ok(Regime::Semiclassical),
            "nrml" | "simultaneous" => Ok(Regime::SimultaneousLimit),
            other => Err(Error::Config(format!("unknown regime '{other}'"))),
        }
    }
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Nonrelativistic => "nr",
            Regime::Semiclassical => "sc",
            Regime::SimultaneousLimit => "nrml",
        }
    }

    /// Couples the regime parameter into (epsilon, delta, nu).
    pub fn couple(&self, param: f64) -> crate::model::PhysParams {
        match self {
            Regime::Nonrelativistic => crate::model::PhysParams {
                epsilon: param,
                delta: 1.0,
                nu: 1.0,
            },
            Regime::Semiclassical => crate::model::PhysParams {
                epsilon: 1.0,
                delta: param,
                nu: 1.0,
            },
            Regime::SimultaneousLimit => crate::model::PhysParams {
                epsilon: param,
                delta: 1.0,
                nu: param,
            },
        }
    }

    /// Base configuration of the regime's study protocol (domain, data,
    /// horizon, fine mesh). The tau on the scheme section is the fixed time
    /// step used by spatial sweeps.
    pub fn base_config(&self) -> RunConfig {
        let mut cfg = RunConfig::paper_1d();
        match self {
            Regime::Nonrelativistic => {
                // Omega = (-32,32), h = 1/16, t = 6, Gaussian data
                cfg.scheme.t_final = 6.0;
            }
            Regime::Semiclassical => {
                cfg.grid.a = -16.0;
                cfg.grid.b = 16.0;
                cfg.grid.m = 4096; // h = 1/128
                cfg.initial.preset = "wkb-1d".into();
                cfg.scheme.t_final = 2.0;
            }
            Regime::SimultaneousLimit => {
                cfg.grid.a = -128.0;
                cfg.grid.b = 128.0;
                cfg.grid.m = 4096; // h = 1/16
                cfg.scheme.t_final = 2.0;
            }
        }
        cfg.scheme.tau = 1e-4;
        cfg.study.reference = ReferenceSpec {
            policy: "generate".into(),
            m: Some(cfg.grid.m),
            tau: Some(1e-4),
        };
        cfg
    }

    /// The resolution-law position of the bold diagonal cell.
    pub fn diag_value(&self, axis: Axis, param: f64) -> f64 {
        match (self, axis) {
            (Regime::Nonrelativistic, Axis::Time) => param * param / 4.0,
            (Regime::Semiclassical, Axis::Space) => param,
            (Regime::Semiclassical, Axis::Time) => param / 2.0,
            (Regime::SimultaneousLimit, Axis::Time) => param,
            (r, a) => {
                debug_assert!(false, "no diagonal law for {r:?}/{a:?}");
                param
            }
        }
    }
}

/// Regime sweep: for each parameter value, run the refinement ladder of the
/// chosen axis against a per-parameter reference, flagging the resolution
/// diagonal.
pub fn regime_sweep(
    regime: Regime,
    axis: Axis,
    param_ladder: &[f64],
    ladder: &[f64],
    store: &ReferenceStore,
) -> Result<StudyReport> {
    validate_ladder(ladder)?;
    if param_ladder.is_empty() {
        return Err(Error::Config("empty parameter ladder".into()));
    }
    if regime != Regime::Semiclassical && axis == Axis::Space {
        return Err(Error::Config(format!(
            "{} resolution is studied on the time axis (space is uniformly spectral)",
            regime.name()
        )));
    }
    let base = regime.base_config();

    // references first, in parallel over parameter values
    let refs: Result<Vec<(f64, Arc<SpinorField>, bool)>> = param_ladder
        .par_iter()
        .map(|&param| {
            let mut cfg = base.clone();
            cfg.params = regime.couple(param);
            check_reference_finer(&cfg, axis, ladder)?;
            let (field, loaded) = compute_reference(&cfg, store)?;
            Ok((param, Arc::new(field), loaded))
        })
        .collect();
    let refs = refs?;
    let any_loaded = refs.iter().all(|(_, _, l)| *l);

    let mut jobs = Vec::new();
    for (param, reference, _) in &refs {
        for &value in ladder {
            jobs.push((*param, reference.clone(), value));
        }
    }
    let rows: Result<Vec<StudyRow>> = jobs
        .par_iter()
        .map(|(param, reference, value)| {
            let mut cfg = base.clone();
            cfg.params = regime.couple(*param);
            let cfg = point_config(&cfg, axis, *value, base.scheme.id)?;
            let out = run_to_final(&cfg)?;
            let m = error_metrics(&out.field, reference, &cfg.params)?;
            let law = regime.diag_value(axis, *param);
            let diag = (value / law).log2().abs() < 0.5;
            Ok(StudyRow {
                scheme: cfg.scheme.id.to_string(),
                h: cfg.grid.h(),
                tau: cfg.scheme.tau,
                param: Some(*param),
                e_phi: m.e_phi,
                e_phi_rel: m.e_phi_rel,
                e_rho: m.e_rho,
                e_rho_rel: m.e_rho_rel,
                e_j: m.e_j,
                e_j_rel: m.e_j_rel,
                rate: None,
                diag,
                steps: out.steps,
                wall_s: out.wall_s,
                setup_s: out.setup_s,
            })
        })
        .collect();

    let mut report = StudyReport::new(
        format!("regime-{}-{axis:?}", regime.name()).to_lowercase(),
        base.hash(),
        any_loaded,
    );
    report.rows = rows?;
    match axis {
        Axis::Time => report.fill_rates(|r| r.tau),
        Axis::Space => report.fill_rates(|r| r.h),
    }
    Ok(report)
}

struct Snapshots {
    every: u64,
    fields: Vec<SpinorField>,
}

impl Observer for Snapshots {
    fn observe(&mut self, n: u64, _t: f64, field: &SpinorField) -> Result<()> {
        if n % self.every == 0 {
            self.fields.push(field.clone());
        }
        Ok(())
    }
}

/// Error time series e_Phi(t) for several schemes against an S4c reference
/// trajectory sampled every `sample_dt`.
pub fn long_time_study(
    base: &RunConfig,
    schemes: &[SchemeId],
    sample_dt: f64,
    store: &ReferenceStore,
) -> Result<LongTimeReport> {
    let _ = store; // trajectories are not cached; only final fields are
    let ref_cfg = base.reference_config()?;
    let ref_every = step_count(ref_cfg.scheme.tau, sample_dt);
    let run_every = step_count(base.scheme.tau, sample_dt);
    if ref_every == 0 || run_every == 0 {
        return Err(Error::Config(
            "sample_dt must be a multiple of both tau and the reference tau".into(),
        ));
    }

    let mut snaps = Snapshots {
        every: ref_every,
        fields: Vec::new(),
    };
    {
        let mut cfg = ref_cfg.clone();
        cfg.scheme.observer_stride = Some(ref_every);
        drive(&cfg, |n, _t, field, _| {
            snaps.observe(n, 0.0, field)?;
            Ok(())
        })?;
    }
    let trajectory = Arc::new(snaps.fields);
    let n_samples = trajectory.len();
    let times: Vec<f64> = (0..n_samples).map(|i| i as f64 * sample_dt).collect();

    let series: Result<Vec<(String, Vec<f64>)>> = schemes
        .par_iter()
        .map(|&scheme| {
            let mut cfg = base.clone();
            cfg.scheme.id = scheme;
            cfg.scheme.observer_stride = Some(run_every);
            let mut errs = Vec::with_capacity(n_samples);
            let traj = trajectory.clone();
            drive(&cfg, |n, _t, field, _| {
                if n % run_every == 0 {
                    let i = (n / run_every) as usize;
                    if i < traj.len() {
                        errs.push(crate::observables::l2_error(field, &traj[i])?);
                    }
                }
                Ok(())
            })?;
            Ok((scheme.to_string(), errs))
        })
        .collect();

    Ok(LongTimeReport {
        config_hash: base.hash(),
        times,
        series: series?,
    })
}
