//! Periodic grids, discrete Fourier transforms with the solver's
//! normalization (1/M on the forward transform), and spectral
//! differentiation.
//!
//! Conventions: grid nodes x_j = a + j h with h = (b-a)/M, wavenumbers
//! mu_l = 2 pi l / (b-a) for l = -M/2 .. M/2-1. Spectral coefficients are
//! stored in FFT layout (l = 0..M/2-1 first, then l = -M/2..-1). The
//! unpaired mode l = -M/2 is kept as-is in all transforms and in the
//! spectral derivative. 2D fields are stored row major with the second
//! coordinate varying fastest.

use crate::error::{Error, Result};
use crate::linalg::C64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::sync::{Arc, Mutex, OnceLock};

/// Uniform periodic grid on (a,b) or (a,b)^2 with M nodes per dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub a: f64,
    pub b: f64,
    pub m: usize,
    pub dim: usize,
    pub h: f64,
}

/// Grids below 4 modes cannot represent the unpaired mode convention.
const MIN_MODES: usize = 4;

pub fn build_grid(a: f64, b: f64, m: usize, dim: usize) -> Result<Arc<Grid>> {
    if !(b > a) {
        return Err(Error::InvalidGrid(format!("need b > a, got a={a}, b={b}")));
    }
    if m % 2 != 0 || m < MIN_MODES {
        return Err(Error::InvalidGrid(format!(
            "M must be even and >= {MIN_MODES}, got {m}"
        )));
    }
    if dim != 1 && dim != 2 {
        return Err(Error::InvalidGrid(format!("dim must be 1 or 2, got {dim}")));
    }
    Ok(Arc::new(Grid {
        a,
        b,
        m,
        dim,
        h: (b - a) / m as f64,
    }))
}

impl Grid {
    pub fn node_count(&self) -> usize {
        self.m.pow(self.dim as u32)
    }

    /// Node coordinate along one axis.
    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        self.a + j as f64 * self.h
    }

    /// Coordinates of the node with linear index `idx`. The second entry is
    /// zero in 1D.
    #[inline]
    pub fn coords(&self, idx: usize) -> [f64; 2] {
        match self.dim {
            1 => [self.x(idx), 0.0],
            _ => [self.x(idx / self.m), self.x(idx % self.m)],
        }
    }

    /// Signed mode number l for FFT bin p: 0..M/2-1 map to themselves,
    /// M/2..M-1 map to p - M (so bin M/2 is the unpaired mode -M/2).
    #[inline]
    pub fn mode(&self, p: usize) -> i64 {
        if p < self.m / 2 {
            p as i64
        } else {
            p as i64 - self.m as i64
        }
    }

    /// Wavenumber mu_l = 2 pi l / (b-a) for FFT bin p.
    #[inline]
    pub fn mu(&self, p: usize) -> f64 {
        2.0 * std::f64::consts::PI * self.mode(p) as f64 / (self.b - self.a)
    }

    /// FFT bin for a signed mode number.
    pub fn bin(&self, l: i64) -> Option<usize> {
        let half = self.m as i64 / 2;
        if l >= 0 && l < half {
            Some(l as usize)
        } else if l >= -half && l < 0 {
            Some((l + self.m as i64) as usize)
        } else {
            None
        }
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self == other
    }
}

/// Complex grid function with N spinor components stored as separate planes.
#[derive(Clone, Debug)]
pub struct MultiField<const N: usize> {
    pub grid: Arc<Grid>,
    pub comps: [Vec<C64>; N],
}

pub type SpinorField = MultiField<2>;
pub type Spinor4Field = MultiField<4>;

/// Fourier coefficients of a [`MultiField`], FFT bin layout.
#[derive(Clone, Debug)]
pub struct MultiSpectral<const N: usize> {
    pub grid: Arc<Grid>,
    pub coeffs: [Vec<C64>; N],
}

pub type SpectralField = MultiSpectral<2>;

impl<const N: usize> MultiField<N> {
    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.node_count();
        MultiField {
            grid,
            comps: std::array::from_fn(|_| vec![C64::new(0.0, 0.0); n]),
        }
    }

    /// Samples componentwise functions of the node coordinates.
    pub fn from_fn(grid: Arc<Grid>, mut f: impl FnMut(usize, [f64; 2]) -> [C64; N]) -> Self {
        let n = grid.node_count();
        let mut out = Self::zeros(grid);
        for idx in 0..n {
            let v = f(idx, out.grid.coords(idx));
            for c in 0..N {
                out.comps[c][idx] = v[c];
            }
        }
        out
    }

    #[inline]
    pub fn value(&self, idx: usize) -> [C64; N] {
        std::array::from_fn(|c| self.comps[c][idx])
    }

    #[inline]
    pub fn set(&mut self, idx: usize, v: [C64; N]) {
        for c in 0..N {
            self.comps[c][idx] = v[c];
        }
    }

    /// Unweighted sum of squared moduli over all nodes and components.
    pub fn sum_sq(&self) -> f64 {
        self.comps
            .iter()
            .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum()
    }

    /// h^dim-weighted discrete l2 norm.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.h.powi(self.grid.dim as i32) * self.sum_sq()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.comps
            .iter()
            .all(|c| c.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    /// h^dim-weighted l2 norm of the difference; grids must match.
    pub fn l2_distance(&self, other: &Self) -> Result<f64> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch("l2_distance".into()));
        }
        let mut acc = 0.0;
        for c in 0..N {
            for (x, y) in self.comps[c].iter().zip(&other.comps[c]) {
                acc += (x - y).norm_sqr();
            }
        }
        Ok((self.grid.h.powi(self.grid.dim as i32) * acc).sqrt())
    }
}

impl<const N: usize> MultiSpectral<N> {
    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.node_count();
        MultiSpectral {
            grid,
            coeffs: std::array::from_fn(|_| vec![C64::new(0.0, 0.0); n]),
        }
    }

    /// Unweighted sum of squared coefficient moduli.
    pub fn sum_sq(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum()
    }
}

fn plan(len: usize, dir: FftDirection) -> Arc<dyn Fft<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    let planner = PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()));
    planner.lock().unwrap().plan_fft(len, dir)
}

/// Grid sizes above this run the 2D row passes on the rayon pool.
const PAR_THRESHOLD: usize = 1 << 14;

pub(crate) fn transform_plane(data: &mut [C64], grid: &Grid, dir: FftDirection) {
    let m = grid.m;
    match grid.dim {
        1 => {
            plan(m, dir).process(data);
        }
        _ => {
            let fft = plan(m, dir);
            let par = data.len() >= PAR_THRESHOLD;
            // rows: second coordinate is contiguous
            if par {
                data.par_chunks_mut(m).for_each(|row| {
                    fft.process(row);
                });
            } else {
                for row in data.chunks_mut(m) {
                    fft.process(row);
                }
            }
            // columns via transpose, row pass, transpose back
            let mut scratch = vec![C64::new(0.0, 0.0); data.len()];
            transpose(data, &mut scratch, m);
            if par {
                scratch.par_chunks_mut(m).for_each(|row| {
                    fft.process(row);
                });
            } else {
                for row in scratch.chunks_mut(m) {
                    fft.process(row);
                }
            }
            transpose(&scratch, data, m);
        }
    }
}

fn transpose(src: &[C64], dst: &mut [C64], m: usize) {
    const BLOCK: usize = 32;
    for ib in (0..m).step_by(BLOCK) {
        for jb in (0..m).step_by(BLOCK) {
            for i in ib..(ib + BLOCK).min(m) {
                for j in jb..(jb + BLOCK).min(m) {
                    dst[j * m + i] = src[i * m + j];
                }
            }
        }
    }
}

/// Forward transform carrying the 1/M (1/M^2 in 2D) normalization.
pub fn dft_forward<const N: usize>(f: &MultiField<N>) -> MultiSpectral<N> {
    let scale = 1.0 / f.grid.node_count() as f64;
    let mut out = MultiSpectral::<N> {
        grid: f.grid.clone(),
        coeffs: f.comps.clone(),
    };
    for c in out.coeffs.iter_mut() {
        transform_plane(c, &f.grid, FftDirection::Forward);
        for z in c.iter_mut() {
            *z *= scale;
        }
    }
    out
}

/// Inverse transform; exact round trip with [`dft_forward`] up to roundoff.
pub fn dft_inverse<const N: usize>(f: &MultiSpectral<N>) -> MultiField<N> {
    let mut out = MultiField::<N> {
        grid: f.grid.clone(),
        comps: f.coeffs.clone(),
    };
    for c in out.comps.iter_mut() {
        transform_plane(c, &f.grid, FftDirection::Inverse);
    }
    out
}

/// Componentwise spectral derivative along `axis` (0 or 1): multiply mode l
/// by i mu_l and transform back. Exact for resolved trigonometric
/// polynomials; the unpaired mode is differentiated like any other.
pub fn spectral_derivative<const N: usize>(
    f: &MultiField<N>,
    axis: usize,
) -> Result<MultiField<N>> {
    if axis >= f.grid.dim {
        return Err(Error::Unsupported(format!(
            "axis {axis} on a {}D grid",
            f.grid.dim
        )));
    }
    let mut hat = dft_forward(f);
    let m = hat.grid.m;
    let grid = hat.grid.clone();
    for c in hat.coeffs.iter_mut() {
        match (grid.dim, axis) {
            (1, _) => {
                for (p, z) in c.iter_mut().enumerate() {
                    *z *= C64::new(0.0, grid.mu(p));
                }
            }
            (_, 0) => {
                for p1 in 0..m {
                    let w = C64::new(0.0, grid.mu(p1));
                    for z in c[p1 * m..(p1 + 1) * m].iter_mut() {
                        *z *= w;
                    }
                }
            }
            _ => {
                for row in c.chunks_mut(m) {
                    for (p2, z) in row.iter_mut().enumerate() {
                        *z *= C64::new(0.0, grid.mu(p2));
                    }
                }
            }
        }
    }
    Ok(dft_inverse(&hat))
}

/// Spectral derivative of a real-valued nodal array; returns the real part.
pub fn spectral_derivative_real(grid: &Arc<Grid>, values: &[f64], axis: usize) -> Result<Vec<f64>> {
    let field = MultiField::<1> {
        grid: grid.clone(),
        comps: [values.iter().map(|&v| C64::new(v, 0.0)).collect()],
    };
    let d = spectral_derivative(&field, axis)?;
    Ok(d.comps[0].iter().map(|z| z.re).collect())
}
