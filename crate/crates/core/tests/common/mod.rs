//! Shared test oracles, independent of the library's solver paths.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use tsdirac::grid::{dft_inverse, Grid, MultiField, MultiSpectral};
use tsdirac::linalg::{CMat, C64};

/// Matrix exponential by scaling and squaring with a Taylor series; used as
/// an oracle against the closed-form propagators.
pub fn expm<const N: usize>(a: CMat<N>) -> CMat<N> {
    let norm = a.max_abs() * N as f64;
    let k = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a.scale(C64::new(1.0 / 2f64.powi(k as i32), 0.0));
    // Taylor series sum_j scaled^j / j!
    let mut result = CMat::<N>::identity();
    let mut term = CMat::<N>::identity();
    for j in 1..=30 {
        term = term * scaled;
        term = term.scale(C64::new(1.0 / j as f64, 0.0));
        result = result + term;
        if term.max_abs() < 1e-20 {
            break;
        }
    }
    for _ in 0..k {
        result = result * result;
    }
    result
}

/// Direct O(M^2) evaluation of the forward transform with the solver's
/// normalization, independent of the FFT path.
pub fn direct_dft_forward<const N: usize>(f: &MultiField<N>) -> MultiSpectral<N> {
    let grid = f.grid.clone();
    assert_eq!(grid.dim, 1, "direct oracle is 1D");
    let m = grid.m;
    let mut out = MultiSpectral::<N>::zeros(grid);
    for c in 0..N {
        for p in 0..m {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..m {
                let phase = -2.0 * std::f64::consts::PI * (j as f64) * (p as f64) / m as f64;
                acc += f.comps[c][j] * C64::from_polar(1.0, phase);
            }
            out.coeffs[c][p] = acc / m as f64;
        }
    }
    out
}

/// Random band-limited field: Gaussian-decaying random Fourier coefficients
/// supported on |l| <= band, so spectral operations on it stay resolved.
pub fn random_smooth_field<const N: usize>(
    grid: &Arc<Grid>,
    seed: u64,
    band: usize,
) -> MultiField<N> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hat = MultiSpectral::<N>::zeros(grid.clone());
    let m = grid.m;
    let mut fill = |coeffs: &mut Vec<C64>| match grid.dim {
        1 => {
            for p in 0..m {
                let l = grid.mode(p).unsigned_abs() as usize;
                if l <= band {
                    let decay = (-((l * l) as f64) / (band.max(1) as f64)).exp();
                    coeffs[p] =
                        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * decay;
                }
            }
        }
        _ => {
            for p1 in 0..m {
                let l1 = grid.mode(p1).unsigned_abs() as usize;
                for p2 in 0..m {
                    let l2 = grid.mode(p2).unsigned_abs() as usize;
                    if l1 <= band && l2 <= band {
                        let decay = (-(((l1 * l1 + l2 * l2) as f64) / band.max(1) as f64)).exp();
                        coeffs[p1 * m + p2] =
                            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * decay;
                    }
                }
            }
        }
    };
    for c in 0..N {
        fill(&mut hat.coeffs[c]);
    }
    dft_inverse(&hat)
}

pub fn rel_l2_diff<const N: usize>(a: &MultiField<N>, b: &MultiField<N>) -> f64 {
    a.l2_distance(b).unwrap() / b.l2_norm().max(1e-300)
}

/// Random smooth field damped by a Gaussian envelope so that products with
/// non-periodic potentials stay effectively periodic on the domain.
pub fn random_localized_field<const N: usize>(
    grid: &Arc<Grid>,
    seed: u64,
    band: usize,
) -> MultiField<N> {
    let mut f = random_smooth_field::<N>(grid, seed, band);
    let center = 0.5 * (grid.a + grid.b);
    // reaches ~1e-14 at the boundary, so seams of non-periodic potentials
    // cannot leak into spectral derivatives of W f products
    let width = (grid.b - grid.a) / 16.0;
    for c in 0..N {
        for idx in 0..grid.node_count() {
            let x = grid.coords(idx);
            let mut r2 = (x[0] - center) * (x[0] - center);
            if grid.dim == 2 {
                r2 += (x[1] - center) * (x[1] - center);
            }
            f.comps[c][idx] *= (-r2 / (2.0 * width * width)).exp();
        }
    }
    f
}
