//! Mass, probability density, current density, energy, and the l2 error
//! metrics used by the study tables.

use crate::error::{Error, Result};
use crate::grid::{spectral_derivative, Grid, SpinorField};
use crate::linalg::C64;
use crate::model::{PhysParams, PotentialSamples};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Total probability h^dim sum_j |Phi_j|^2; conserved by every scheme here.
pub fn mass(f: &SpinorField) -> f64 {
    f.grid.h.powi(f.grid.dim as i32) * f.sum_sq()
}

/// Nodewise probability density |phi_1|^2 + |phi_2|^2.
pub fn density(f: &SpinorField) -> Vec<f64> {
    f.comps[0]
        .iter()
        .zip(&f.comps[1])
        .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
        .collect()
}

const CURRENT_IMAG_TOL: f64 = 1e-14;

/// Current densities J_l = (1/eps) Phi^* sigma_l Phi, one plane per axis.
/// The quadratic form is real up to roundoff; the imaginary residual is
/// checked against 1e-14 * max|Phi|^2 before being discarded.
pub fn current(f: &SpinorField, p: &PhysParams) -> Vec<Vec<f64>> {
    let max_sq = f
        .comps
        .iter()
        .flat_map(|c| c.iter())
        .map(|z| z.norm_sqr())
        .fold(0.0f64, f64::max);
    let bound = CURRENT_IMAG_TOL * max_sq.max(1e-300);
    let mut out = Vec::with_capacity(f.grid.dim);
    for axis in 0..f.grid.dim {
        let plane = f.comps[0]
            .iter()
            .zip(&f.comps[1])
            .map(|(a, b)| {
                // Phi^* sigma_1 Phi = 2 Re(conj(a) b),
                // Phi^* sigma_2 Phi = 2 Im(conj(a) b)
                let z = a.conj() * b;
                let form = match axis {
                    0 => C64::new(2.0 * z.re, 0.0),
                    _ => C64::new(2.0 * z.im, 0.0),
                };
                debug_assert!(form.im.abs() <= bound);
                form.re / p.epsilon
            })
            .collect();
        out.push(plane);
    }
    out
}

/// Discrete energy with spectral derivatives; the imaginary residual of the
/// quadrature must stay below 1e-10 (1 + |E|).
pub fn energy(f: &SpinorField, samples: &PotentialSamples, p: &PhysParams) -> Result<f64> {
    if !f.grid.same_as(&samples.grid) {
        return Err(Error::GridMismatch("energy".into()));
    }
    let dim = f.grid.dim;
    let mut deriv = Vec::with_capacity(dim);
    for axis in 0..dim {
        deriv.push(spectral_derivative(f, axis)?);
    }
    let kin = C64::new(0.0, -p.delta / p.epsilon);
    let mass_w = p.nu / (p.epsilon * p.epsilon);
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..f.grid.node_count() {
        let a = f.comps[0][j];
        let b = f.comps[1][j];
        let rho = a.norm_sqr() + b.norm_sqr();
        // sigma_j quadratic forms against the derivative fields
        for (axis, df) in deriv.iter().enumerate() {
            let (da, db) = (df.comps[0][j], df.comps[1][j]);
            let form = match axis {
                0 => a.conj() * db + b.conj() * da,
                _ => (a.conj() * db - b.conj() * da) * C64::new(0.0, -1.0),
            };
            acc += kin * form;
        }
        acc += C64::new(mass_w * (a.norm_sqr() - b.norm_sqr()), 0.0);
        acc += C64::new(samples.v[j] * rho, 0.0);
        for (axis, a_plane) in samples.a.iter().enumerate() {
            let z = a.conj() * b;
            let form = match axis {
                0 => 2.0 * z.re,
                _ => 2.0 * z.im,
            };
            acc -= C64::new(a_plane[j] * form, 0.0);
        }
    }
    let e = acc * f.grid.h.powi(dim as i32);
    if e.im.abs() > 1e-10 * (1.0 + e.re.abs()) {
        return Err(Error::NonFinite(format!(
            "energy imaginary residual {} exceeds tolerance",
            e.im
        )));
    }
    Ok(e.re)
}

/// Restricts a field on a finer nesting grid to the coarse grid by index
/// stride. Grids must share (a,b) and dimensions, with M_ref a multiple of
/// M_coarse.
pub fn downsample(fine: &SpinorField, coarse: &Arc<Grid>) -> Result<SpinorField> {
    let fg = &fine.grid;
    if fg.a != coarse.a || fg.b != coarse.b || fg.dim != coarse.dim {
        return Err(Error::GridMismatch(
            "downsample: domains or dimensions differ".into(),
        ));
    }
    if fg.m % coarse.m != 0 {
        return Err(Error::GridMismatch(format!(
            "downsample: {} does not nest into {}",
            coarse.m, fg.m
        )));
    }
    let stride = fg.m / coarse.m;
    if stride == 1 {
        return Ok(SpinorField {
            grid: coarse.clone(),
            comps: fine.comps.clone(),
        });
    }
    let mut out = SpinorField::zeros(coarse.clone());
    match coarse.dim {
        1 => {
            for c in 0..2 {
                for j in 0..coarse.m {
                    out.comps[c][j] = fine.comps[c][j * stride];
                }
            }
        }
        _ => {
            for c in 0..2 {
                for j1 in 0..coarse.m {
                    for j2 in 0..coarse.m {
                        out.comps[c][j1 * coarse.m + j2] =
                            fine.comps[c][j1 * stride * fg.m + j2 * stride];
                    }
                }
            }
        }
    }
    Ok(out)
}

fn l2_of_planes(h: f64, dim: usize, planes: &[&[f64]]) -> f64 {
    let s: f64 = planes
        .iter()
        .map(|p| p.iter().map(|x| x * x).sum::<f64>())
        .sum();
    (h.powi(dim as i32) * s).sqrt()
}

/// Absolute and relative error metrics of a run against a reference that
/// lives on the same grid or on a finer nesting grid.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ErrorMetrics {
    pub e_phi: f64,
    pub e_phi_rel: f64,
    pub e_rho: f64,
    pub e_rho_rel: f64,
    pub e_j: f64,
    pub e_j_rel: f64,
}

/// l2 error of the wave function only.
pub fn l2_error(num: &SpinorField, reference: &SpinorField) -> Result<f64> {
    let r = downsample(reference, &num.grid)?;
    num.l2_distance(&r)
}

pub fn relative_l2_error(num: &SpinorField, reference: &SpinorField) -> Result<f64> {
    let r = downsample(reference, &num.grid)?;
    Ok(num.l2_distance(&r)? / r.l2_norm())
}

/// All three error metrics (wave function, density, current) in one pass.
pub fn error_metrics(
    num: &SpinorField,
    reference: &SpinorField,
    p: &PhysParams,
) -> Result<ErrorMetrics> {
    let r = downsample(reference, &num.grid)?;
    let (h, dim) = (num.grid.h, num.grid.dim);
    let e_phi = num.l2_distance(&r)?;
    let ref_norm = r.l2_norm();

    let rho_n = density(num);
    let rho_r = density(&r);
    let rho_diff: Vec<f64> = rho_n.iter().zip(&rho_r).map(|(a, b)| a - b).collect();
    let e_rho = l2_of_planes(h, dim, &[&rho_diff]);
    let rho_norm = l2_of_planes(h, dim, &[&rho_r]);

    let j_n = current(num, p);
    let j_r = current(&r, p);
    let j_diff: Vec<Vec<f64>> = j_n
        .iter()
        .zip(&j_r)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
        .collect();
    let diff_refs: Vec<&[f64]> = j_diff.iter().map(|v| v.as_slice()).collect();
    let ref_refs: Vec<&[f64]> = j_r.iter().map(|v| v.as_slice()).collect();
    let e_j = l2_of_planes(h, dim, &diff_refs);
    let j_norm = l2_of_planes(h, dim, &ref_refs);

    Ok(ErrorMetrics {
        e_phi,
        e_phi_rel: e_phi / ref_norm,
        e_rho,
        e_rho_rel: e_rho / rho_norm,
        e_j,
        e_j_rel: e_j / j_norm,
    })
}

/// Spectral divergence of a nodal vector field, sum_d d_d J_d.
pub fn spectral_divergence(planes: &[Vec<f64>], grid: &Arc<Grid>) -> Result<Vec<f64>> {
    let mut out = vec![0.0; grid.node_count()];
    for (axis, plane) in planes.iter().enumerate() {
        let d = crate::grid::spectral_derivative_real(grid, plane, axis)?;
        for (o, v) in out.iter_mut().zip(d) {
            *o += v;
        }
    }
    Ok(out)
}

/// One observation row: time, conserved quantities, optional errors versus
/// a reference.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ObservableRecord {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub e_phi: Option<f64>,
    pub e_phi_rel: Option<f64>,
}
