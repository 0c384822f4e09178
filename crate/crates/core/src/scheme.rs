//! The five time-stepping schemes as compositions of exact flows, the
//! propagator cache, and the evolution driver.

use crate::error::{Error, Result};
use crate::grid::SpinorField;
use crate::model::{PhysParams, PotentialSamples};
use crate::propagator::{
    apply_mats_in_place, apply_symbol_in_place, build_t_propagator, build_w_propagator,
    build_what_propagator, PointwisePropagator, SymbolPropagator, WhatPropagator,
};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchemeId {
    S1,
    S2,
    S4,
    #[serde(rename = "S4RK")]
    S4rk,
    #[serde(rename = "S4c")]
    S4c,
}

impl SchemeId {
    pub const ALL: [SchemeId; 5] = [
        SchemeId::S1,
        SchemeId::S2,
        SchemeId::S4,
        SchemeId::S4rk,
        SchemeId::S4c,
    ];

    /// Nominal global order of accuracy in time.
    pub fn order(&self) -> u32 {
        match self {
            SchemeId::S1 => 1,
            SchemeId::S2 => 2,
            _ => 4,
        }
    }

    /// Time-symmetric compositions invert exactly under tau -> -tau.
    pub fn symmetric(&self) -> bool {
        !matches!(self, SchemeId::S1)
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SchemeId::S1 => "S1",
            SchemeId::S2 => "S2",
            SchemeId::S4 => "S4",
            SchemeId::S4rk => "S4RK",
            SchemeId::S4c => "S4c",
        };
        f.write_str(s)
    }
}

impl FromStr for SchemeId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "S1" | "s1" => Ok(SchemeId::S1),
            "S2" | "s2" => Ok(SchemeId::S2),
            "S4" | "s4" => Ok(SchemeId::S4),
            "S4RK" | "S4rk" | "s4rk" => Ok(SchemeId::S4rk),
            "S4c" | "S4C" | "s4c" => Ok(SchemeId::S4c),
            other => Err(Error::Config(format!("unknown scheme '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flow {
    W,
    T,
    WHat,
}

/// Partitioned Runge-Kutta coefficients of the 13-factor composition.
pub mod s4rk {
    pub const A1: f64 = 0.0792036964311957;
    pub const A2: f64 = 0.353172906049774;
    pub const A3: f64 = -0.0420650803577195;
    pub fn a4() -> f64 {
        1.0 - 2.0 * (A1 + A2 + A3)
    }
    pub const B1: f64 = 0.209515106613362;
    pub const B2: f64 = -0.143851773179818;
    pub fn b3() -> f64 {
        0.5 - (B1 + B2)
    }
}

/// Forest-Ruth / Yoshida coefficients of the triple-jump composition.
pub mod s4 {
    pub fn w1() -> f64 {
        1.0 / (2.0 - 2f64.cbrt())
    }
    /// Equals -2^{1/3}/(2 - 2^{1/3}).
    pub fn w2() -> f64 {
        1.0 - 2.0 * w1()
    }
}

/// An ordered list of flows with coefficients, stored in application order
/// (the rightmost factor of the operator product comes first).
#[derive(Clone, Debug)]
pub struct CompositionPlan {
    pub scheme: SchemeId,
    pub tau: f64,
    pub dim: usize,
    pub magnetic: bool,
    pub factors: Vec<(Flow, f64)>,
}

pub fn build_plan(
    scheme: SchemeId,
    tau: f64,
    dim: usize,
    magnetic: bool,
) -> Result<CompositionPlan> {
    if !(tau.is_finite() && tau != 0.0) {
        return Err(Error::InvalidParams(format!(
            "tau must be nonzero, got {tau}"
        )));
    }
    if dim != 1 && dim != 2 {
        return Err(Error::Unsupported(format!("stepping dim {dim}")));
    }
    if dim == 2 && magnetic {
        return Err(Error::Unsupported(
            "2D stepping with magnetic potential would need the nonuniform-FFT \
             W-hat flow, which is out of scope; set A = 0"
                .into(),
        ));
    }
    let factors: Vec<(Flow, f64)> = match scheme {
        SchemeId::S1 => vec![(Flow::W, 1.0), (Flow::T, 1.0)],
        SchemeId::S2 => vec![(Flow::W, 0.5), (Flow::T, 1.0), (Flow::W, 0.5)],
        SchemeId::S4 => {
            let (w1, w2) = (s4::w1(), s4::w2());
            // adjacent half-W factors of the composed Strang blocks merged
            let mid = (w1 + w2) / 2.0;
            vec![
                (Flow::W, w1 / 2.0),
                (Flow::T, w1),
                (Flow::W, mid),
                (Flow::T, w2),
                (Flow::W, mid),
                (Flow::T, w1),
                (Flow::W, w1 / 2.0),
            ]
        }
        SchemeId::S4rk => {
            use s4rk::*;
            let (a4, b3) = (a4(), b3());
            vec![
                (Flow::W, A1),
                (Flow::T, B1),
                (Flow::W, A2),
                (Flow::T, B2),
                (Flow::W, A3),
                (Flow::T, b3),
                (Flow::W, a4),
                (Flow::T, b3),
                (Flow::W, A3),
                (Flow::T, B2),
                (Flow::W, A2),
                (Flow::T, B1),
                (Flow::W, A1),
            ]
        }
        SchemeId::S4c => {
            let hat = if magnetic { Flow::WHat } else { Flow::W };
            vec![
                (Flow::W, 1.0 / 6.0),
                (Flow::T, 0.5),
                (hat, 2.0 / 3.0),
                (Flow::T, 0.5),
                (Flow::W, 1.0 / 6.0),
            ]
        }
    };
    let plan = CompositionPlan {
        scheme,
        tau,
        dim,
        magnetic,
        factors,
    };
    let (tw, tt) = plan.coefficient_sums();
    if (tw - 1.0).abs() > 1e-12 || (tt - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParams(format!(
            "inconsistent composition for {scheme}: W sum {tw}, T sum {tt}"
        )));
    }
    Ok(plan)
}

impl CompositionPlan {
    /// (sum of W and W-hat coefficients, sum of T coefficients).
    pub fn coefficient_sums(&self) -> (f64, f64) {
        let mut w = 0.0;
        let mut t = 0.0;
        for (flow, c) in &self.factors {
            match flow {
                Flow::T => t += c,
                _ => w += c,
            }
        }
        (w, t)
    }

    /// (T applications, W-family applications) per step.
    pub fn flow_counts(&self) -> (usize, usize) {
        let t = self.factors.iter().filter(|(f, _)| *f == Flow::T).count();
        (t, self.factors.len() - t)
    }
}

/// Propagators for every distinct (flow, coefficient) pair of a plan,
/// reusable across steps while tau is unchanged.
pub struct PropagatorSet {
    w: Vec<(u64, PointwisePropagator)>,
    t: Vec<(u64, SymbolPropagator)>,
    what: Option<WhatPropagator>,
}

pub fn build_propagator_set(
    plan: &CompositionPlan,
    params: &PhysParams,
    samples: &PotentialSamples,
) -> Result<PropagatorSet> {
    if samples.grid.dim != plan.dim {
        return Err(Error::GridMismatch("plan dim vs samples dim".into()));
    }
    let mut set = PropagatorSet {
        w: Vec::new(),
        t: Vec::new(),
        what: None,
    };
    for (flow, coeff) in &plan.factors {
        let key = coeff.to_bits();
        match flow {
            Flow::W => {
                if !set.w.iter().any(|(k, _)| *k == key) {
                    set.w
                        .push((key, build_w_propagator(samples, params, coeff * plan.tau)?));
                }
            }
            Flow::T => {
                if !set.t.iter().any(|(k, _)| *k == key) {
                    set.t.push((
                        key,
                        build_t_propagator(&samples.grid, params, coeff * plan.tau),
                    ));
                }
            }
            Flow::WHat => {
                if set.what.is_none() {
                    set.what = Some(build_what_propagator(samples, params, plan.tau)?);
                }
            }
        }
    }
    Ok(set)
}

/// Advances the field by one composition step.
pub fn step(plan: &CompositionPlan, props: &PropagatorSet, field: &mut SpinorField) {
    for (flow, coeff) in &plan.factors {
        let key = coeff.to_bits();
        match flow {
            Flow::W => {
                let p = &props.w.iter().find(|(k, _)| *k == key).expect("W cache").1;
                apply_mats_in_place(&p.mats, field);
            }
            Flow::T => {
                let p = &props.t.iter().find(|(k, _)| *k == key).expect("T cache").1;
                apply_symbol_in_place(p, field);
            }
            Flow::WHat => {
                let p = props.what.as_ref().expect("W-hat cache");
                apply_mats_in_place(&p.mats, field);
            }
        }
    }
}

/// A running evolution: plan, cached propagators, current field and step
/// index. The l2 norm of the field is conserved by construction.
pub struct Evolution {
    pub plan: CompositionPlan,
    props: PropagatorSet,
    pub field: SpinorField,
    pub n: u64,
}

impl Evolution {
    pub fn new(
        scheme: SchemeId,
        params: &PhysParams,
        samples: &PotentialSamples,
        phi0: SpinorField,
        tau: f64,
    ) -> Result<Self> {
        if !samples.grid.same_as(&phi0.grid) {
            return Err(Error::GridMismatch("initial data vs samples".into()));
        }
        if !phi0.is_finite() {
            return Err(Error::NonFinite("initial data".into()));
        }
        let plan = build_plan(scheme, tau, samples.grid.dim, samples.magnetic())?;
        let props = build_propagator_set(&plan, params, samples)?;
        Ok(Evolution {
            plan,
            props,
            field: phi0,
            n: 0,
        })
    }

    pub fn t(&self) -> f64 {
        self.n as f64 * self.plan.tau
    }

    pub fn advance(&mut self) {
        step(&self.plan, &self.props, &mut self.field);
        self.n += 1;
    }
}

/// Callback sampled on the observation stride during [`evolve`].
pub trait Observer {
    fn observe(&mut self, n: u64, t: f64, field: &SpinorField) -> Result<()>;
}

/// Default stride: every step while n <= 100, then ~1000 samples total.
pub fn auto_stride(n_steps: u64) -> u64 {
    n_steps.div_ceil(1000).max(1)
}

/// Number of steps for a horizon; warns and truncates when t_final/tau is
/// not an integer to within 1e-9.
pub fn step_count(tau: f64, t_final: f64) -> u64 {
    let r = (t_final / tau).abs();
    let n = r.round();
    if (r - n).abs() > 1e-9 * r.max(1.0) {
        let floor = r.floor();
        eprintln!("warning: t_final/tau = {r} is not an integer; truncating to {floor} steps");
        return floor as u64;
    }
    n as u64
}

/// Runs n = t_final/tau steps of the scheme, sampling the observers on the
/// stride (always including step 0 and the final step) and aborting on
/// non-finite field values with the offending step index.
#[allow(clippy::too_many_arguments)]
pub fn evolve(
    scheme: SchemeId,
    params: &PhysParams,
    samples: &PotentialSamples,
    phi0: SpinorField,
    tau: f64,
    t_final: f64,
    observer_stride: Option<u64>,
    observers: &mut [&mut dyn Observer],
) -> Result<SpinorField> {
    let n_steps = step_count(tau, t_final);
    let stride = observer_stride
        .unwrap_or_else(|| auto_stride(n_steps))
        .max(1);
    let mut ev = Evolution::new(scheme, params, samples, phi0, tau)?;

    let mut notify = |n: u64, t: f64, field: &SpinorField| -> Result<()> {
        if !field.is_finite() {
            return Err(Error::NonFinite(format!("field at step {n}")));
        }
        for obs in observers.iter_mut() {
            obs.observe(n, t, field)?;
        }
        Ok(())
    };

    notify(0, 0.0, &ev.field)?;
    for n in 1..=n_steps {
        ev.advance();
        if n <= 100 || n % stride == 0 || n == n_steps {
            notify(n, ev.t(), &ev.field)?;
        }
    }
    Ok(ev.field)
}
