//! The dimensionless model: physical parameters, electromagnetic potential
//! specification and sampling, the split operators W and T as matrices, and
//! analytic reference solutions (plane waves, constant gauge shifts).

use crate::error::{Error, Result};
use crate::grid::{Grid, SpinorField};
use crate::linalg::{CMat, Mat2, Mat4, ALPHA, BETA, C64, IDENTITY_2, IDENTITY_4, PAULI};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// The dimensionless triple (epsilon, delta, nu). epsilon and delta are
/// strictly positive and at most 1; nu = 0 is allowed for the massless
/// limit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    pub epsilon: f64,
    pub delta: f64,
    pub nu: f64,
}

impl PhysParams {
    pub fn new(epsilon: f64, delta: f64, nu: f64) -> Result<Self> {
        let p = PhysParams { epsilon, delta, nu };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0 && v <= 1.0;
        if !ok(self.epsilon) || !ok(self.delta) {
            return Err(Error::InvalidParams(format!(
                "epsilon and delta must lie in (0,1], got epsilon={}, delta={}",
                self.epsilon, self.delta
            )));
        }
        if !(self.nu.is_finite() && (0.0..=1.0).contains(&self.nu)) {
            return Err(Error::InvalidParams(format!(
                "nu must lie in [0,1], got {}",
                self.nu
            )));
        }
        Ok(())
    }

    /// Classical scaling epsilon = delta = nu = 1.
    pub fn classical() -> Self {
        PhysParams {
            epsilon: 1.0,
            delta: 1.0,
            nu: 1.0,
        }
    }
}

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Electric potential V, magnetic potentials A_k, and (optionally) their
/// analytic first partials. Up to three A components are accepted so the
/// 3D commutator formulas can be evaluated pointwise.
#[derive(Clone)]
pub struct PotentialSpec {
    pub dim: usize,
    v: ScalarFn,
    a: Vec<ScalarFn>,
    grad_v: Option<Vec<ScalarFn>>,
    grad_a: Option<Vec<Vec<ScalarFn>>>,
    /// Preset name if constructed from one; kept for config round trips.
    pub name: Option<String>,
}

fn zero_fn() -> ScalarFn {
    Arc::new(|_| 0.0)
}

impl PotentialSpec {
    pub fn new(
        dim: usize,
        v: ScalarFn,
        a: Vec<ScalarFn>,
        grad_v: Option<Vec<ScalarFn>>,
        grad_a: Option<Vec<Vec<ScalarFn>>>,
    ) -> Result<Self> {
        if dim == 0 || dim > 3 {
            return Err(Error::InvalidParams(format!("potential dim {dim}")));
        }
        if a.len() != dim {
            return Err(Error::InvalidParams(format!(
                "expected {dim} magnetic components, got {}",
                a.len()
            )));
        }
        if let Some(g) = &grad_v {
            if g.len() != dim {
                return Err(Error::InvalidParams("grad_v arity".into()));
            }
        }
        if let Some(g) = &grad_a {
            if g.len() != dim || g.iter().any(|r| r.len() != dim) {
                return Err(Error::InvalidParams("grad_a arity".into()));
            }
        }
        Ok(PotentialSpec {
            dim,
            v,
            a,
            grad_v,
            grad_a,
            name: None,
        })
    }

    pub fn zero(dim: usize) -> Self {
        let mut s = Self::new(
            dim,
            zero_fn(),
            (0..dim).map(|_| zero_fn()).collect(),
            Some((0..dim).map(|_| zero_fn()).collect()),
            Some(
                (0..dim)
                    .map(|_| (0..dim).map(|_| zero_fn()).collect())
                    .collect(),
            ),
        )
        .expect("zero potential");
        s.name = Some("zero".into());
        s
    }

    pub fn constant(dim: usize, v0: f64, a0: &[f64]) -> Result<Self> {
        if a0.len() != dim {
            return Err(Error::InvalidParams(format!(
                "constant potential: expected {dim} magnetic components, got {}",
                a0.len()
            )));
        }
        let a = a0
            .iter()
            .map(|&c| -> ScalarFn { Arc::new(move |_| c) })
            .collect();
        let mut s = Self::new(
            dim,
            Arc::new(move |_| v0),
            a,
            Some((0..dim).map(|_| zero_fn()).collect()),
            Some(
                (0..dim)
                    .map(|_| (0..dim).map(|_| zero_fn()).collect())
                    .collect(),
            ),
        )?;
        let args: Vec<String> = std::iter::once(v0)
            .chain(a0.iter().copied())
            .map(|x| format!("{x}"))
            .collect();
        s.name = Some(format!("constant({})", args.join(",")));
        Ok(s)
    }

    /// V(x) = (1-x)/(1+x^2), A_1(x) = (x+1)^2/(1+x^2), with analytic
    /// derivatives.
    pub fn paper_1d() -> Self {
        let v: ScalarFn = Arc::new(|x| (1.0 - x[0]) / (1.0 + x[0] * x[0]));
        let a1: ScalarFn = Arc::new(|x| {
            let t = x[0] + 1.0;
            t * t / (1.0 + x[0] * x[0])
        });
        let dv: ScalarFn = Arc::new(|x| {
            let d = 1.0 + x[0] * x[0];
            (x[0] * x[0] - 2.0 * x[0] - 1.0) / (d * d)
        });
        let da1: ScalarFn = Arc::new(|x| {
            let d = 1.0 + x[0] * x[0];
            2.0 * (1.0 - x[0] * x[0]) / (d * d)
        });
        let mut s = Self::new(1, v, vec![a1], Some(vec![dv]), Some(vec![vec![da1]]))
            .expect("paper 1d potential");
        s.name = Some("paper-1d".into());
        s
    }

    /// Honeycomb lattice electric potential, no magnetic potential.
    pub fn honeycomb_2d() -> Self {
        let c = 4.0 * std::f64::consts::PI / 3.0f64.sqrt();
        let e: [[f64; 2]; 3] = [
            [-1.0, 0.0],
            [0.5, 3.0f64.sqrt() / 2.0],
            [0.5, -3.0f64.sqrt() / 2.0],
        ];
        let v: ScalarFn = Arc::new(move |x| {
            e.iter()
                .map(|ei| (c * (ei[0] * x[0] + ei[1] * x[1])).cos())
                .sum()
        });
        let dv = |axis: usize| -> ScalarFn {
            Arc::new(move |x: &[f64]| {
                -e.iter()
                    .map(|ei| c * ei[axis] * (c * (ei[0] * x[0] + ei[1] * x[1])).sin())
                    .sum::<f64>()
            })
        };
        let mut s = Self::new(
            2,
            v,
            vec![zero_fn(), zero_fn()],
            Some(vec![dv(0), dv(1)]),
            Some(vec![vec![zero_fn(), zero_fn()], vec![zero_fn(), zero_fn()]]),
        )
        .expect("honeycomb potential");
        s.name = Some("honeycomb-2d".into());
        s
    }

    /// Parses a preset name: `zero`, `paper-1d`, `honeycomb-2d`, or
    /// `constant(V0)` / `constant(V0, A1, ...)`.
    pub fn preset(name: &str, dim: usize) -> Result<Self> {
        let name = name.trim();
        match name {
            "zero" => Ok(Self::zero(dim)),
            "paper-1d" => {
                if dim != 1 {
                    return Err(Error::Config("paper-1d potential is 1D".into()));
                }
                Ok(Self::paper_1d())
            }
            "honeycomb-2d" => {
                if dim != 2 {
                    return Err(Error::Config("honeycomb-2d potential is 2D".into()));
                }
                Ok(Self::honeycomb_2d())
            }
            _ => {
                if let Some(rest) = name
                    .strip_prefix("constant(")
                    .and_then(|r| r.strip_suffix(')'))
                {
                    let vals: Vec<f64> = rest
                        .split([',', ';'])
                        .map(|s| s.trim().parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|e| Error::Config(format!("constant(..): {e}")))?;
                    if vals.is_empty() {
                        return Err(Error::Config("constant(..) needs at least V0".into()));
                    }
                    let mut a0 = vec![0.0; dim];
                    for (k, v) in vals.iter().skip(1).enumerate() {
                        if k >= dim {
                            return Err(Error::Config(format!(
                                "constant(..): {} magnetic components for dim {dim}",
                                vals.len() - 1
                            )));
                        }
                        a0[k] = *v;
                    }
                    Self::constant(dim, vals[0], &a0)
                } else {
                    Err(Error::Config(format!("unknown potential preset '{name}'")))
                }
            }
        }
    }

    pub fn v_at(&self, x: &[f64]) -> f64 {
        (self.v)(x)
    }

    pub fn a_at(&self, k: usize, x: &[f64]) -> f64 {
        (self.a[k])(x)
    }

    pub fn has_analytic_gradients(&self) -> bool {
        self.grad_v.is_some() && self.grad_a.is_some()
    }

    pub fn dv_at(&self, axis: usize, x: &[f64]) -> Option<f64> {
        self.grad_v.as_ref().map(|g| (g[axis])(x))
    }

    pub fn da_at(&self, k: usize, axis: usize, x: &[f64]) -> Option<f64> {
        self.grad_a.as_ref().map(|g| (g[k][axis])(x))
    }
}

/// Nodewise samples of a [`PotentialSpec`] on a grid, plus derivative
/// samples when the dimension needs them (2D commutator coefficients).
#[derive(Clone, Debug)]
pub struct PotentialSamples {
    pub grid: Arc<Grid>,
    pub v: Vec<f64>,
    /// a[k][node]
    pub a: Vec<Vec<f64>>,
    /// grad_v[axis][node]
    pub grad_v: Option<Vec<Vec<f64>>>,
    /// grad_a[k][axis][node]
    pub grad_a: Option<Vec<Vec<Vec<f64>>>>,
}

impl PotentialSamples {
    pub fn magnetic(&self) -> bool {
        self.a.iter().any(|plane| plane.iter().any(|&x| x != 0.0))
    }

    pub fn dim(&self) -> usize {
        self.grid.dim
    }
}

pub fn sample_potentials(spec: &PotentialSpec, grid: &Arc<Grid>) -> Result<PotentialSamples> {
    if spec.dim != grid.dim {
        return Err(Error::GridMismatch(format!(
            "potential dim {} vs grid dim {}",
            spec.dim, grid.dim
        )));
    }
    let n = grid.node_count();
    let sample = |f: &dyn Fn(&[f64]) -> f64, what: &str| -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(n);
        for idx in 0..n {
            let x = grid.coords(idx);
            let val = f(&x[..grid.dim]);
            if !val.is_finite() {
                return Err(Error::NonFinite(format!(
                    "{what} at node {idx} (x = {:?})",
                    &x[..grid.dim]
                )));
            }
            out.push(val);
        }
        Ok(out)
    };

    let v = sample(&*spec.v, "V")?;
    let mut a = Vec::with_capacity(grid.dim);
    for k in 0..grid.dim {
        a.push(sample(&*spec.a[k], &format!("A_{}", k + 1))?);
    }

    let (grad_v, grad_a) = if grid.dim >= 2 {
        if spec.has_analytic_gradients() {
            let mut gv = Vec::new();
            for axis in 0..grid.dim {
                gv.push(sample(
                    &*spec.grad_v.as_ref().unwrap()[axis],
                    &format!("dV/dx_{}", axis + 1),
                )?);
            }
            let mut ga = Vec::new();
            for k in 0..grid.dim {
                let mut per_axis = Vec::new();
                for axis in 0..grid.dim {
                    per_axis.push(sample(
                        &*spec.grad_a.as_ref().unwrap()[k][axis],
                        &format!("dA_{}/dx_{}", k + 1, axis + 1),
                    )?);
                }
                ga.push(per_axis);
            }
            (Some(gv), Some(ga))
        } else {
            // spectral differentiation of the sampled arrays
            let mut gv = Vec::new();
            for axis in 0..grid.dim {
                gv.push(crate::grid::spectral_derivative_real(grid, &v, axis)?);
            }
            let mut ga = Vec::new();
            for plane in &a {
                let mut per_axis = Vec::new();
                for axis in 0..grid.dim {
                    per_axis.push(crate::grid::spectral_derivative_real(grid, plane, axis)?);
                }
                ga.push(per_axis);
            }
            (Some(gv), Some(ga))
        }
    } else {
        (None, None)
    };

    Ok(PotentialSamples {
        grid: grid.clone(),
        v,
        a,
        grad_v,
        grad_a,
    })
}

/// W(x) = -(i/delta)(V I - sum_k A_k sigma_k) as a 2x2 matrix.
pub fn w_matrix_2c(v: f64, a: &[f64], delta: f64) -> Mat2 {
    let mut m = IDENTITY_2.scale(C64::new(v, 0.0));
    for (k, &ak) in a.iter().enumerate() {
        m = m - PAULI[k].scale(C64::new(ak, 0.0));
    }
    m.scale(C64::new(0.0, -1.0 / delta))
}

/// 4-component version of [`w_matrix_2c`] with alpha matrices.
pub fn w_matrix_4c(v: f64, a: &[f64], delta: f64) -> Mat4 {
    let mut m = IDENTITY_4.scale(C64::new(v, 0.0));
    for (k, &ak) in a.iter().enumerate() {
        m = m - ALPHA[k].scale(C64::new(ak, 0.0));
    }
    m.scale(C64::new(0.0, -1.0 / delta))
}

/// Fourier symbol of T at wavevector k:
/// -(i/epsilon) sum_j k_j sigma_j - i nu/(delta epsilon^2) sigma_3.
pub fn t_symbol_2c(k: &[f64], p: &PhysParams) -> Mat2 {
    let mut m = PAULI[2].scale(C64::new(0.0, -p.nu / (p.delta * p.epsilon * p.epsilon)));
    for (j, &kj) in k.iter().enumerate() {
        m = m + PAULI[j].scale(C64::new(0.0, -kj / p.epsilon));
    }
    m
}

/// 4-component T symbol with alpha matrices and beta mass term.
pub fn t_symbol_4c(k: &[f64], p: &PhysParams) -> Mat4 {
    let mut m = BETA.scale(C64::new(0.0, -p.nu / (p.delta * p.epsilon * p.epsilon)));
    for (j, &kj) in k.iter().enumerate() {
        m = m + ALPHA[j].scale(C64::new(0.0, -kj / p.epsilon));
    }
    m
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

/// Dispersion relation omega(k) = V0 +- (1/eps^2) sqrt(nu^2 + eps^2 |delta k - eps A0|^2).
pub fn dispersion_omega(k: &[f64], v0: f64, a0: &[f64], p: &PhysParams, branch: Branch) -> f64 {
    let mut q = 0.0;
    for (j, &kj) in k.iter().enumerate() {
        let d = p.delta * kj - p.epsilon * a0[j];
        q += d * d;
    }
    let root = (p.nu * p.nu + p.epsilon * p.epsilon * q).sqrt();
    match branch {
        Branch::Plus => v0 + root / (p.epsilon * p.epsilon),
        Branch::Minus => v0 - root / (p.epsilon * p.epsilon),
    }
}

/// Unit eigenvector of the plane-wave symbol for the chosen branch, with the
/// first component of non-negligible modulus rotated real-positive so test
/// fixtures are deterministic.
pub fn plane_wave_amplitude(k: &[f64], a0: &[f64], p: &PhysParams, branch: Branch) -> [C64; 2] {
    // symbol = sum_j h_j sigma_j + h3 sigma_3 + V0 I; the eigenvector does
    // not depend on V0.
    let mut h = [0.0f64; 3];
    for (j, &kj) in k.iter().enumerate() {
        h[j] = p.delta * kj / p.epsilon - a0[j];
    }
    h[2] += p.nu / (p.epsilon * p.epsilon);
    let norm = (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]).sqrt();
    let lambda = match branch {
        Branch::Plus => norm,
        Branch::Minus => -norm,
    };
    // (lambda + h3, h1 + i h2) is an eigenvector unless it vanishes
    let mut v = [C64::new(lambda + h[2], 0.0), C64::new(h[0], h[1])];
    let len = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    if len < 1e-300 {
        // h1 = h2 = 0 and lambda = -h3: the eigenvector is (0,1)
        return [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
    }
    v[0] /= len;
    v[1] /= len;
    // rotate the first significant component real-positive
    let lead = if v[0].norm() > 1e-12 { v[0] } else { v[1] };
    let phase = lead.conj() / lead.norm();
    [v[0] * phase, v[1] * phase]
}

/// Exact plane-wave solution B exp(i(k.x - omega t / delta)) under constant
/// potentials. k must lie on the grid's wavenumber lattice.
pub fn plane_wave_solution(
    k: &[f64],
    v0: f64,
    a0: &[f64],
    p: &PhysParams,
    branch: Branch,
    t: f64,
    grid: &Arc<Grid>,
) -> Result<SpinorField> {
    if k.len() != grid.dim || a0.len() != grid.dim {
        return Err(Error::InvalidParams(
            "plane wave: k and A0 must match the grid dimension".into(),
        ));
    }
    let base = 2.0 * std::f64::consts::PI / (grid.b - grid.a);
    for &kj in k {
        let l = (kj / base).round();
        if (kj - l * base).abs() > 1e-9 * base.max(kj.abs()) {
            return Err(Error::InvalidParams(format!(
                "wavevector component {kj} is not on the grid lattice (spacing {base})"
            )));
        }
    }
    let omega = dispersion_omega(k, v0, a0, p, branch);
    let amp = plane_wave_amplitude(k, a0, p, branch);
    let phase_t = -omega * t / p.delta;
    Ok(SpinorField::from_fn(grid.clone(), |_, x| {
        let mut kx = 0.0;
        for (j, &kj) in k.iter().enumerate() {
            kx += kj * x[j];
        }
        let ph = C64::from_polar(1.0, kx + phase_t);
        [amp[0] * ph, amp[1] * ph]
    }))
}

/// Global gauge phase exp(-i V0 t / delta) applied to a field; the solution
/// map for a constant shift of the electric potential.
pub fn gauge_shift_reference(f: &SpinorField, v0: f64, t: f64, p: &PhysParams) -> SpinorField {
    let phase = C64::from_polar(1.0, -v0 * t / p.delta);
    let mut out = f.clone();
    for cplane in out.comps.iter_mut() {
        for z in cplane.iter_mut() {
            *z *= phase;
        }
    }
    out
}

/// Initial data presets used by the study harness.
///
/// The two-component reduction takes Phi = (psi_1, psi_4) of the
/// four-component spinor; the alternative pairing (psi_2, psi_3) satisfies
/// the same equation, so nothing here depends on the choice.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitialData {
    /// phi_1 = exp(-x^2/2), phi_2 = exp(-(x-1)^2/2)
    #[serde(rename = "gaussian-1d")]
    Gaussian1d,
    /// phi_1 = exp(-|x|^2/2), phi_2 = exp(-((x-1)^2+y^2)/2)
    #[serde(rename = "gaussian-2d")]
    Gaussian2d,
    /// WKB data exp(i S0(x)/delta) with S0 = (1 + cos 2 pi x)/40
    #[serde(rename = "wkb-1d")]
    Wkb1d,
}

impl InitialData {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "gaussian-1d" => Ok(InitialData::Gaussian1d),
            "gaussian-2d" => Ok(InitialData::Gaussian2d),
            "wkb-1d" => Ok(InitialData::Wkb1d),
            _ => Err(Error::Config(format!(
                "unknown initial data preset '{name}'"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            InitialData::Gaussian1d => "gaussian-1d",
            InitialData::Gaussian2d => "gaussian-2d",
            InitialData::Wkb1d => "wkb-1d",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            InitialData::Gaussian2d => 2,
            _ => 1,
        }
    }

    pub fn sample(&self, grid: &Arc<Grid>, p: &PhysParams) -> Result<SpinorField> {
        if self.dim() != grid.dim {
            return Err(Error::GridMismatch(format!(
                "initial data '{}' is {}D but grid is {}D",
                self.name(),
                self.dim(),
                grid.dim
            )));
        }
        Ok(match self {
            InitialData::Gaussian1d => SpinorField::from_fn(grid.clone(), |_, x| {
                [
                    C64::new((-x[0] * x[0] / 2.0).exp(), 0.0),
                    C64::new((-(x[0] - 1.0) * (x[0] - 1.0) / 2.0).exp(), 0.0),
                ]
            }),
            InitialData::Gaussian2d => SpinorField::from_fn(grid.clone(), |_, x| {
                let r2 = x[0] * x[0] + x[1] * x[1];
                let s2 = (x[0] - 1.0) * (x[0] - 1.0) + x[1] * x[1];
                [
                    C64::new((-r2 / 2.0).exp(), 0.0),
                    C64::new((-s2 / 2.0).exp(), 0.0),
                ]
            }),
            InitialData::Wkb1d => {
                let delta = p.delta;
                SpinorField::from_fn(grid.clone(), |_, x| {
                    let s0 = (1.0 + (2.0 * std::f64::consts::PI * x[0]).cos()) / 40.0;
                    let ds0 =
                        -std::f64::consts::PI * (2.0 * std::f64::consts::PI * x[0]).sin() / 20.0;
                    let env = 0.5 * (-4.0 * x[0] * x[0]).exp();
                    let osc = C64::from_polar(env, s0 / delta);
                    [
                        osc * C64::new(1.0 + (1.0 + ds0 * ds0).sqrt(), 0.0),
                        osc * C64::new(ds0, 0.0),
                    ]
                })
            }
        })
    }
}

/// Numeric check of the matrix algebra relations; used by the test suites
/// at startup and by `commutator-check`.
pub fn matrix_constants_defect() -> f64 {
    let mut worst = 0.0f64;
    let mut upd = |d: f64| worst = worst.max(d);
    let i = C64::new(0.0, 1.0);
    for j in 0..3 {
        upd((PAULI[j] * PAULI[j]).max_abs_diff(&IDENTITY_2));
        upd((ALPHA[j] * ALPHA[j]).max_abs_diff(&IDENTITY_4));
        upd((BETA * ALPHA[j] + ALPHA[j] * BETA).max_abs());
        upd((crate::linalg::GAMMA * ALPHA[j]).max_abs_diff(&(ALPHA[j] * crate::linalg::GAMMA)));
        for l in 0..3 {
            if j != l {
                upd((PAULI[j] * PAULI[l] + PAULI[l] * PAULI[j]).max_abs());
                upd((ALPHA[j] * ALPHA[l] + ALPHA[l] * ALPHA[j]).max_abs());
            }
        }
    }
    upd((PAULI[0] * PAULI[1]).max_abs_diff(&PAULI[2].scale(i)));
    upd((ALPHA[0] * ALPHA[1]).max_abs_diff(&(crate::linalg::GAMMA * ALPHA[2]).scale(i)));
    upd((BETA * BETA).max_abs_diff(&IDENTITY_4));
    worst
}

/// Helper for building an identity-scaled matrix out of a CMat constant.
pub fn cmat_scaled<const N: usize>(m: CMat<N>, s: C64) -> CMat<N> {
    m.scale(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;

    #[test]
    fn params_validation() {
        assert!(PhysParams::new(1.0, 1.0, 1.0).is_ok());
        assert!(PhysParams::new(0.25, 1.0, 0.0).is_ok());
        assert!(PhysParams::new(0.0, 1.0, 1.0).is_err());
        assert!(PhysParams::new(1.0, 1.5, 1.0).is_err());
        assert!(PhysParams::new(1.0, 1.0, -0.1).is_err());
    }

    #[test]
    fn paper_1d_preset_at_origin() {
        let s = PotentialSpec::paper_1d();
        assert_eq!(s.v_at(&[0.0]), 1.0);
        assert_eq!(s.a_at(0, &[0.0]), 1.0);
        // analytic derivatives vs central differences
        let h = 1e-6;
        for x in [-2.0, -0.3, 0.0, 0.7, 5.0] {
            let dv_fd = (s.v_at(&[x + h]) - s.v_at(&[x - h])) / (2.0 * h);
            let da_fd = (s.a_at(0, &[x + h]) - s.a_at(0, &[x - h])) / (2.0 * h);
            assert!((s.dv_at(0, &[x]).unwrap() - dv_fd).abs() < 1e-8);
            assert!((s.da_at(0, 0, &[x]).unwrap() - da_fd).abs() < 1e-8);
        }
    }

    #[test]
    fn honeycomb_at_origin_is_three() {
        let s = PotentialSpec::honeycomb_2d();
        assert_eq!(s.v_at(&[0.0, 0.0]), 3.0);
        assert_eq!(s.a_at(0, &[0.3, -0.4]), 0.0);
        // derivative sanity at a generic point
        let h = 1e-6;
        let x = [0.23, -0.71];
        for axis in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[axis] += h;
            xm[axis] -= h;
            let fd = (s.v_at(&xp) - s.v_at(&xm)) / (2.0 * h);
            assert!((s.dv_at(axis, &x).unwrap() - fd).abs() < 1e-7);
        }
    }

    #[test]
    fn preset_parsing() {
        assert!(PotentialSpec::preset("zero", 1).is_ok());
        assert!(PotentialSpec::preset("paper-1d", 1).is_ok());
        assert!(PotentialSpec::preset("paper-1d", 2).is_err());
        assert!(PotentialSpec::preset("honeycomb-2d", 2).is_ok());
        let c = PotentialSpec::preset("constant(0.5, 1.25)", 1).unwrap();
        assert_eq!(c.v_at(&[3.0]), 0.5);
        assert_eq!(c.a_at(0, &[3.0]), 1.25);
        assert!(PotentialSpec::preset("constant()", 1).is_err());
        assert!(PotentialSpec::preset("bogus", 1).is_err());
    }

    #[test]
    fn sampling_zero_spec_gives_zero_arrays() {
        let g = build_grid(-4.0, 4.0, 16, 1).unwrap();
        let s = sample_potentials(&PotentialSpec::zero(1), &g).unwrap();
        assert!(s.v.iter().all(|&x| x == 0.0));
        assert!(s.a[0].iter().all(|&x| x == 0.0));
        assert!(!s.magnetic());
    }

    #[test]
    fn sampling_rejects_non_finite() {
        let g = build_grid(-1.0, 1.0, 8, 1).unwrap();
        let bad = PotentialSpec::new(
            1,
            Arc::new(|x: &[f64]| 1.0 / x[0]),
            vec![Arc::new(|_: &[f64]| 0.0)],
            None,
            None,
        )
        .unwrap();
        let err = sample_potentials(&bad, &g).unwrap_err();
        let msg = format!("{err}");
        assert!(
            msg.contains("node"),
            "diagnostic should name the node: {msg}"
        );
    }

    #[test]
    fn dispersion_and_amplitude_examples() {
        let p = PhysParams::classical();
        // k = 0, zero potentials: omega = nu/eps^2, B = (1,0)
        let w = dispersion_omega(&[0.0], 0.0, &[0.0], &p, Branch::Plus);
        assert_eq!(w, 1.0);
        let b = plane_wave_amplitude(&[0.0], &[0.0], &p, Branch::Plus);
        assert!((b[0] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(b[1].norm() < 1e-15);

        let g = build_grid(-32.0, 32.0, 64, 1).unwrap();
        let mu1 = g.mu(1);
        let w = dispersion_omega(&[mu1], 0.0, &[0.0], &p, Branch::Plus);
        assert!((w - (1.0 + mu1 * mu1).sqrt()).abs() < 1e-15);

        // minus branch at k=0 picks the lower spinor
        let bm = plane_wave_amplitude(&[0.0], &[0.0], &p, Branch::Minus);
        assert!(bm[0].norm() < 1e-15);
        assert!((bm[1] - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn plane_wave_off_lattice_is_rejected() {
        let p = PhysParams::classical();
        let g = build_grid(-32.0, 32.0, 64, 1).unwrap();
        assert!(plane_wave_solution(&[0.05], 0.0, &[0.0], &p, Branch::Plus, 0.0, &g).is_err());
        assert!(plane_wave_solution(&[g.mu(3)], 0.0, &[0.0], &p, Branch::Plus, 0.0, &g).is_ok());
    }

    #[test]
    fn gauge_shift_degenerate_cases() {
        let p = PhysParams::classical();
        let g = build_grid(-2.0, 2.0, 8, 1).unwrap();
        let f = InitialData::Gaussian1d.sample(&g, &p).unwrap();
        let same = gauge_shift_reference(&f, 0.0, 1.7, &p);
        assert!(f.l2_distance(&same).unwrap() == 0.0);
        // full revolution: V0 = 2 pi delta / t
        let t = 0.8;
        let v0 = 2.0 * std::f64::consts::PI * p.delta / t;
        let full = gauge_shift_reference(&f, v0, t, &p);
        assert!(f.l2_distance(&full).unwrap() < 1e-14);
    }

    #[test]
    fn matrix_constants_hold_exactly() {
        assert_eq!(matrix_constants_defect(), 0.0);
    }
}
