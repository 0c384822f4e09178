//! Closed-form evaluation of the double commutator [W,[T,W]] in 1D/2D/3D for
//! the two- and four-component models, together with a brute-force operator
//! oracle built from 2WTW - WWT - TWW. The two routes are independent: the
//! closed forms transcribe the per-dimension coefficient formulas, the brute
//! force applies the raw operators with spectral derivatives.

use crate::error::{Error, Result};
use crate::grid::{spectral_derivative, Grid, MultiField};
use crate::linalg::{CMat, Mat2, Mat4, ALPHA, BETA, C64, PAULI, SIGMA_3};
use crate::model::{
    t_symbol_2c, t_symbol_4c, w_matrix_2c, w_matrix_4c, PhysParams, PotentialSamples,
};
use std::sync::Arc;

/// Potential data at a single point; `da[k][m]` is the m-th partial of A_{k+1}.
#[derive(Clone, Copy, Debug, Default)]
pub struct PotentialPoint {
    pub v: f64,
    pub a: [f64; 3],
    pub dv: [f64; 3],
    pub da: [[f64; 3]; 3],
}

fn commutator<const N: usize>(a: CMat<N>, b: CMat<N>) -> CMat<N> {
    a * b - b * a
}

/// Generic closed-form coefficients from the operator identity. With
/// P := V I - sum_k A_k S_k (so W = -(i/delta) P), Q_j := d_j P, S_j the
/// kinetic matrices and M the mass matrix:
///
///   [W,[S_j d_j, W]] = -(1/delta^2) ( [P,[S_j,P]] d_j + S_j [P,Q_j] + 2 [P,S_j] Q_j )
///   [W,[M, W]]       = -(1/delta^2)   [P,[M,P]]
///
/// so that [W,[T,W]] = F_0 + sum_j F_j d_j with
///   F_j = (1/(delta^2 eps)) [P,[S_j,P]]
///   F_0 = sum_j (1/(delta^2 eps)) ( S_j [P,Q_j] + 2 [P,S_j] Q_j )
///         + (i nu/(delta^3 eps^2)) [P,[M,P]].
///
/// Every electric-potential contribution to the commutators cancels
/// entrywise (V multiplies the identity), so the result is bit-independent
/// of V wherever the derivative terms vanish.
fn coeffs_generic<const N: usize>(
    pt: &PotentialPoint,
    p: &PhysParams,
    dim: usize,
    sig: &[CMat<N>],
    mass_mat: &CMat<N>,
) -> (CMat<N>, Vec<CMat<N>>) {
    let pot = |v: f64, a: &[f64]| -> CMat<N> {
        let mut m = CMat::<N>::identity().scale(C64::new(v, 0.0));
        for (k, &ak) in a.iter().enumerate() {
            m = m - sig[k].scale(C64::new(ak, 0.0));
        }
        m
    };
    let pm = pot(pt.v, &pt.a[..dim]);
    let kin_scale = C64::new(1.0 / (p.delta * p.delta * p.epsilon), 0.0);
    let mass_scale = C64::new(0.0, p.nu / (p.delta.powi(3) * p.epsilon * p.epsilon));

    let mut f0 = commutator(pm, commutator(*mass_mat, pm)).scale(mass_scale);
    let mut fk = Vec::with_capacity(dim);
    for j in 0..dim {
        let da_j: Vec<f64> = (0..dim).map(|k| pt.da[k][j]).collect();
        let qj = pot(pt.dv[j], &da_j);
        f0 = f0
            + (sig[j] * commutator(pm, qj) + commutator(pm, sig[j]).scale(C64::new(2.0, 0.0)) * qj)
                .scale(kin_scale);
        fk.push(commutator(pm, commutator(sig[j], pm)).scale(kin_scale));
    }
    (f0, fk)
}

/// Derivative-free coefficient and per-axis first-order coefficients of
/// [W,[T,W]] for the two-component model. 1D and 2D only.
pub fn coeffs_2c(pt: &PotentialPoint, p: &PhysParams, dim: usize) -> Result<(Mat2, Vec<Mat2>)> {
    if dim == 0 || dim > 2 {
        return Err(Error::Unsupported(
            "the two-component model exists in 1D and 2D only".into(),
        ));
    }
    Ok(coeffs_generic(pt, p, dim, &PAULI, &SIGMA_3))
}

/// Four-component coefficients with the alpha/beta matrices; valid in 1D,
/// 2D, and 3D.
pub fn coeffs_4c(pt: &PotentialPoint, p: &PhysParams, dim: usize) -> Result<(Mat4, Vec<Mat4>)> {
    if dim == 0 || dim > 3 {
        return Err(Error::Unsupported(format!("commutator dim {dim}")));
    }
    Ok(coeffs_generic(pt, p, dim, &ALPHA, &BETA))
}

fn point_from_samples(samples: &PotentialSamples, idx: usize) -> Result<PotentialPoint> {
    let dim = samples.dim();
    let mut pt = PotentialPoint {
        v: samples.v[idx],
        ..Default::default()
    };
    for k in 0..dim {
        pt.a[k] = samples.a[k][idx];
    }
    if dim >= 2 {
        let gv = samples
            .grad_v
            .as_ref()
            .ok_or_else(|| Error::InvalidParams("missing derivative samples for V".into()))?;
        let ga = samples
            .grad_a
            .as_ref()
            .ok_or_else(|| Error::InvalidParams("missing derivative samples for A".into()))?;
        for m in 0..dim {
            pt.dv[m] = gv[m][idx];
            for k in 0..dim {
                pt.da[k][m] = ga[k][m][idx];
            }
        }
    }
    Ok(pt)
}

/// Grid-sampled closed form of [W,[T,W]]: a derivative-free coefficient per
/// node plus one coefficient per axis multiplying the spectral derivative.
#[derive(Clone, Debug)]
pub struct ClosedFormCommutator<const N: usize> {
    pub grid: Arc<Grid>,
    pub f0: Vec<CMat<N>>,
    /// fk[axis][node]
    pub fk: Vec<Vec<CMat<N>>>,
}

fn build_closed_form<const N: usize>(
    samples: &PotentialSamples,
    coeffs: impl Fn(&PotentialPoint) -> Result<(CMat<N>, Vec<CMat<N>>)>,
) -> Result<ClosedFormCommutator<N>> {
    let grid = samples.grid.clone();
    let n = grid.node_count();
    let mut f0 = Vec::with_capacity(n);
    let mut fk: Vec<Vec<CMat<N>>> = Vec::new();
    for idx in 0..n {
        let pt = point_from_samples(samples, idx)?;
        let (c0, ck) = coeffs(&pt)?;
        f0.push(c0);
        if idx == 0 {
            fk = ck.iter().map(|_| Vec::with_capacity(n)).collect();
        }
        for (axis, c) in ck.into_iter().enumerate() {
            fk[axis].push(c);
        }
    }
    Ok(ClosedFormCommutator { grid, f0, fk })
}

pub fn closed_form_commutator_2c(
    samples: &PotentialSamples,
    p: &PhysParams,
) -> Result<ClosedFormCommutator<2>> {
    let dim = samples.dim();
    build_closed_form(samples, |pt| coeffs_2c(pt, p, dim))
}

pub fn closed_form_commutator_4c(
    samples: &PotentialSamples,
    p: &PhysParams,
) -> Result<ClosedFormCommutator<4>> {
    let dim = samples.dim();
    build_closed_form(samples, |pt| coeffs_4c(pt, p, dim))
}

fn pointwise_apply<const N: usize>(mats: &[CMat<N>], f: &MultiField<N>) -> MultiField<N> {
    let mut out = f.clone();
    for idx in 0..f.grid.node_count() {
        out.set(idx, mats[idx].matvec(&f.value(idx)));
    }
    out
}

fn add_assign<const N: usize>(dst: &mut MultiField<N>, src: &MultiField<N>) {
    for c in 0..N {
        for (d, s) in dst.comps[c].iter_mut().zip(&src.comps[c]) {
            *d += s;
        }
    }
}

/// Applies the closed form: F0 f + sum_k F_k (d_k f).
pub fn apply_commutator<const N: usize>(
    cf: &ClosedFormCommutator<N>,
    f: &MultiField<N>,
) -> Result<MultiField<N>> {
    if !cf.grid.same_as(&f.grid) {
        return Err(Error::GridMismatch("apply_commutator".into()));
    }
    let mut out = pointwise_apply(&cf.f0, f);
    for (axis, coeffs) in cf.fk.iter().enumerate() {
        // identically vanishing coefficient planes (1D) contribute nothing
        if coeffs.iter().all(|m| m.max_abs() == 0.0) {
            continue;
        }
        let df = spectral_derivative(f, axis)?;
        add_assign(&mut out, &pointwise_apply(coeffs, &df));
    }
    Ok(out)
}

/// W f = -(i/delta)(V I - sum_k A_k S_k) f applied nodewise.
fn apply_w_generic<const N: usize>(
    samples: &PotentialSamples,
    delta: f64,
    sig: &[CMat<N>],
    f: &MultiField<N>,
) -> MultiField<N> {
    let dim = samples.dim();
    let mut out = f.clone();
    let minus_i_over_d = C64::new(0.0, -1.0 / delta);
    for idx in 0..f.grid.node_count() {
        let mut m = CMat::<N>::identity().scale(C64::new(samples.v[idx], 0.0));
        for k in 0..dim {
            m = m - sig[k].scale(C64::new(samples.a[k][idx], 0.0));
        }
        out.set(idx, m.scale(minus_i_over_d).matvec(&f.value(idx)));
    }
    out
}

/// Weighted T: deriv_w * (-(1/eps) sum_j S_j d_j f) + mass_w * (-(i nu/(delta eps^2)) M f).
fn apply_t_generic<const N: usize>(
    f: &MultiField<N>,
    p: &PhysParams,
    sig: &[CMat<N>],
    mass_mat: &CMat<N>,
    deriv_w: f64,
    mass_w: f64,
) -> Result<MultiField<N>> {
    let dim = f.grid.dim;
    let mut out = MultiField::<N>::zeros(f.grid.clone());
    if deriv_w != 0.0 {
        for axis in 0..dim {
            let df = spectral_derivative(f, axis)?;
            let m = sig[axis].scale(C64::new(-deriv_w / p.epsilon, 0.0));
            add_assign(&mut out, &pointwise_apply_const(&m, &df));
        }
    }
    if mass_w != 0.0 {
        let m = mass_mat.scale(C64::new(
            0.0,
            -mass_w * p.nu / (p.delta * p.epsilon * p.epsilon),
        ));
        add_assign(&mut out, &pointwise_apply_const(&m, f));
    }
    Ok(out)
}

fn pointwise_apply_const<const N: usize>(m: &CMat<N>, f: &MultiField<N>) -> MultiField<N> {
    let mut out = f.clone();
    for idx in 0..f.grid.node_count() {
        out.set(idx, m.matvec(&f.value(idx)));
    }
    out
}

fn brute_force_generic<const N: usize>(
    samples: &PotentialSamples,
    p: &PhysParams,
    sig: &[CMat<N>],
    mass_mat: &CMat<N>,
    f: &MultiField<N>,
    deriv_w: f64,
    mass_w: f64,
) -> Result<MultiField<N>> {
    if !samples.grid.same_as(&f.grid) {
        return Err(Error::GridMismatch("brute_force_commutator".into()));
    }
    let w = |g: &MultiField<N>| apply_w_generic(samples, p.delta, sig, g);
    let t = |g: &MultiField<N>| apply_t_generic(g, p, sig, mass_mat, deriv_w, mass_w);

    let wf = w(f);
    let twf = t(&wf)?;
    let wtwf = w(&twf); // W T W f

    let tf = t(f)?;
    let wtf = w(&tf);
    let wwtf = w(&wtf); // W W T f

    let wwf = w(&wf);
    let twwf = t(&wwf)?; // T W W f

    let mut out = wtwf;
    for c in 0..N {
        for ((o, x), y) in out.comps[c]
            .iter_mut()
            .zip(&wwtf.comps[c])
            .zip(&twwf.comps[c])
        {
            *o = *o + *o - x - y;
        }
    }
    Ok(out)
}

/// W applied to a two-component field: -(i/delta)(V I - sum A_k sigma_k) f.
pub fn apply_w_2c(samples: &PotentialSamples, p: &PhysParams, f: &MultiField<2>) -> MultiField<2> {
    apply_w_generic(samples, p.delta, &PAULI, f)
}

/// T applied to a two-component field with spectral derivatives:
/// -(1/eps) sum_j sigma_j d_j f - (i nu/(delta eps^2)) sigma_3 f.
pub fn apply_t_2c(f: &MultiField<2>, p: &PhysParams) -> Result<MultiField<2>> {
    apply_t_generic(f, p, &PAULI, &SIGMA_3, 1.0, 1.0)
}

/// [W,[T,W]] f via 2WTW - WWT - TWW with spectral derivatives, two-component.
pub fn brute_force_commutator_2c(
    samples: &PotentialSamples,
    p: &PhysParams,
    f: &MultiField<2>,
) -> Result<MultiField<2>> {
    brute_force_generic(samples, p, &PAULI, &SIGMA_3, f, 1.0, 1.0)
}

/// Weighted variant [W,[a1 T1 + a2 T2, W]] f with T1 the derivative part and
/// T2 the mass part.
pub fn brute_force_commutator_weighted_2c(
    samples: &PotentialSamples,
    p: &PhysParams,
    f: &MultiField<2>,
    a1: f64,
    a2: f64,
) -> Result<MultiField<2>> {
    brute_force_generic(samples, p, &PAULI, &SIGMA_3, f, a1, a2)
}

/// Four-component brute force.
pub fn brute_force_commutator_4c(
    samples: &PotentialSamples,
    p: &PhysParams,
    f: &MultiField<4>,
) -> Result<MultiField<4>> {
    brute_force_generic(samples, p, &ALPHA, &BETA, f, 1.0, 1.0)
}

/// Linearity of the double commutator in T, checked by brute force.
#[derive(Clone, Copy, Debug)]
pub struct LinearityReport {
    pub a1: f64,
    pub a2: f64,
    /// norm of [W,[a1 T1 + a2 T2, W]] f
    pub combined_norm: f64,
    /// norm of [W,[T1,W]] f (derivative part alone)
    pub derivative_part_norm: f64,
    /// norm of [W,[T2,W]] f (mass part alone)
    pub mass_part_norm: f64,
    /// norm of combined - a1 (derivative part) - a2 (mass part)
    pub residual: f64,
    pub residual_rel: f64,
}

pub fn verify_commutator_linearity(
    samples: &PotentialSamples,
    p: &PhysParams,
    f: &MultiField<2>,
    a1: f64,
    a2: f64,
) -> Result<LinearityReport> {
    let combined = brute_force_commutator_weighted_2c(samples, p, f, a1, a2)?;
    let part1 = brute_force_commutator_weighted_2c(samples, p, f, 1.0, 0.0)?;
    let part2 = brute_force_commutator_weighted_2c(samples, p, f, 0.0, 1.0)?;
    let mut resid = combined.clone();
    for c in 0..2 {
        for ((r, x), y) in resid.comps[c]
            .iter_mut()
            .zip(&part1.comps[c])
            .zip(&part2.comps[c])
        {
            *r -= a1 * x + a2 * y;
        }
    }
    let combined_norm = combined.l2_norm();
    Ok(LinearityReport {
        a1,
        a2,
        combined_norm,
        derivative_part_norm: part1.l2_norm(),
        mass_part_norm: part2.l2_norm(),
        residual: resid.l2_norm(),
        residual_rel: resid.l2_norm() / combined_norm.max(1e-300),
    })
}

/// Symbol-level brute force: the operator identity applied to a plane wave
/// e^{ik.x} v, with W(x) and its gradient frozen at one point. Returns the
/// matrix acting on v.
fn brute_force_symbol<const N: usize>(
    w: CMat<N>,
    wj: &[CMat<N>],
    dj: &[CMat<N>],
    t_hat: CMat<N>,
) -> CMat<N> {
    let mut dw = CMat::<N>::zero();
    let mut dww = CMat::<N>::zero();
    for (d, wjm) in dj.iter().zip(wj) {
        dw = dw + *d * *wjm;
        dww = dww + *d * (*wjm * w + w * *wjm);
    }
    (w * dw).scale(C64::new(2.0, 0.0)) + (w * t_hat * w).scale(C64::new(2.0, 0.0))
        - w * w * t_hat
        - dww
        - t_hat * w * w
}

/// Four-component symbol-level brute force at a point and wavevector.
pub fn brute_force_symbol_4c(pt: &PotentialPoint, p: &PhysParams, dim: usize, k: &[f64]) -> Mat4 {
    let w = w_matrix_4c(pt.v, &pt.a[..dim], p.delta);
    let wj: Vec<Mat4> = (0..dim)
        .map(|m| {
            let da_m: Vec<f64> = (0..dim).map(|kk| pt.da[kk][m]).collect();
            w_matrix_4c(pt.dv[m], &da_m, p.delta)
        })
        .collect();
    let dj: Vec<Mat4> = (0..dim)
        .map(|m| ALPHA[m].scale(C64::new(-1.0 / p.epsilon, 0.0)))
        .collect();
    brute_force_symbol(w, &wj, &dj, t_symbol_4c(k, p))
}

/// Closed-form symbol F_last + sum_j i k_j F_j at a point, four-component.
pub fn closed_form_symbol_4c(
    pt: &PotentialPoint,
    p: &PhysParams,
    dim: usize,
    k: &[f64],
) -> Result<Mat4> {
    let (f0, fk) = coeffs_4c(pt, p, dim)?;
    let mut out = f0;
    for (j, fj) in fk.iter().enumerate() {
        out = out + fj.scale(C64::new(0.0, k[j]));
    }
    Ok(out)
}

/// Two-component symbol-level brute force (1D/2D).
pub fn brute_force_symbol_2c(pt: &PotentialPoint, p: &PhysParams, dim: usize, k: &[f64]) -> Mat2 {
    let w = w_matrix_2c(pt.v, &pt.a[..dim], p.delta);
    let wj: Vec<Mat2> = (0..dim)
        .map(|m| {
            let da_m: Vec<f64> = (0..dim).map(|kk| pt.da[kk][m]).collect();
            w_matrix_2c(pt.dv[m], &da_m, p.delta)
        })
        .collect();
    let dj: Vec<Mat2> = (0..dim)
        .map(|m| PAULI[m].scale(C64::new(-1.0 / p.epsilon, 0.0)))
        .collect();
    brute_force_symbol(w, &wj, &dj, t_symbol_2c(k, p))
}

pub fn closed_form_symbol_2c(
    pt: &PotentialPoint,
    p: &PhysParams,
    dim: usize,
    k: &[f64],
) -> Result<Mat2> {
    let (f0, fk) = coeffs_2c(pt, p, dim)?;
    let mut out = f0;
    for (j, fj) in fk.iter().enumerate() {
        out = out + fj.scale(C64::new(0.0, k[j]));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use crate::model::{sample_potentials, PotentialSpec};

    #[test]
    fn coeff_examples_1d() {
        // A1 = 1, classical params: coefficient is -4 i sigma_3
        let pt = PotentialPoint {
            v: 0.3,
            a: [1.0, 0.0, 0.0],
            ..Default::default()
        };
        let p = PhysParams::classical();
        let (f0, fk) = coeffs_2c(&pt, &p, 1).unwrap();
        // the derivative coefficient vanishes identically in 1D
        assert_eq!(fk.len(), 1);
        assert_eq!(fk[0].max_abs(), 0.0);
        let expect = SIGMA_3.scale(C64::new(0.0, -4.0));
        assert!(f0.max_abs_diff(&expect) < 1e-15);

        // independent of V
        let pt2 = PotentialPoint {
            v: -7.5,
            a: [1.0, 0.0, 0.0],
            ..Default::default()
        };
        let (f0b, _) = coeffs_2c(&pt2, &p, 1).unwrap();
        assert_eq!(f0, f0b);
    }

    #[test]
    fn coeff_examples_2d_constant_a1() {
        // A1 = 1, A2 = 0, V = 0, classical: F1 = 0, F2 = -4 sigma_2, F0 = -4i sigma_3
        let pt = PotentialPoint {
            a: [1.0, 0.0, 0.0],
            ..Default::default()
        };
        let p = PhysParams::classical();
        let (f0, fk) = coeffs_2c(&pt, &p, 2).unwrap();
        assert!(fk[0].max_abs() < 1e-15);
        assert!(fk[1].max_abs_diff(&PAULI[1].scale(C64::new(-4.0, 0.0))) < 1e-15);
        assert!(f0.max_abs_diff(&SIGMA_3.scale(C64::new(0.0, -4.0))) < 1e-15);
    }

    #[test]
    fn vanishes_without_magnetic_potential() {
        let pt = PotentialPoint {
            v: 2.0,
            dv: [1.0, -0.5, 0.25],
            ..Default::default()
        };
        let p = PhysParams::new(0.5, 0.5, 1.0).unwrap();
        for dim in 1..=2 {
            let (f0, fk) = coeffs_2c(&pt, &p, dim).unwrap();
            assert_eq!(f0.max_abs(), 0.0);
            assert!(fk.iter().all(|m| m.max_abs() == 0.0));
        }
        for dim in 1..=3 {
            let (f0, fk) = coeffs_4c(&pt, &p, dim).unwrap();
            assert_eq!(f0.max_abs(), 0.0);
            assert!(fk.iter().all(|m| m.max_abs() == 0.0));
        }
    }

    #[test]
    fn apply_on_constant_field_1d() {
        let g = build_grid(-4.0, 4.0, 32, 1).unwrap();
        let spec = PotentialSpec::constant(1, 0.0, &[1.0]).unwrap();
        let s = sample_potentials(&spec, &g).unwrap();
        let p = PhysParams::classical();
        let cf = closed_form_commutator_2c(&s, &p).unwrap();
        let f = MultiField::<2>::from_fn(g, |_, _| [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let out = apply_commutator(&cf, &f).unwrap();
        for idx in 0..out.grid.node_count() {
            let v = out.value(idx);
            assert!((v[0] - C64::new(0.0, -4.0)).norm() < 1e-14);
            assert!(v[1].norm() < 1e-14);
        }

        let zero = MultiField::<2>::zeros(out.grid.clone());
        let z = apply_commutator(&cf, &zero).unwrap();
        assert_eq!(z.sum_sq(), 0.0);
    }

    #[test]
    fn two_component_3d_is_rejected() {
        let pt = PotentialPoint::default();
        assert!(coeffs_2c(&pt, &PhysParams::classical(), 3).is_err());
    }
}
