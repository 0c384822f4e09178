//! Small dense complex matrices and the constant matrices of the model:
//! Pauli matrices, the 4x4 Dirac representation matrices and their algebra.

use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};

pub type C64 = Complex64;

pub const C_ZERO: C64 = C64::new(0.0, 0.0);
pub const C_ONE: C64 = C64::new(1.0, 0.0);
pub const C_I: C64 = C64::new(0.0, 1.0);

/// Dense N x N complex matrix, row major. Only N = 2 and N = 4 are used.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CMat<const N: usize>(pub [[C64; N]; N]);

pub type Mat2 = CMat<2>;
pub type Mat4 = CMat<4>;

impl<const N: usize> CMat<N> {
    pub const fn zero() -> Self {
        CMat([[C_ZERO; N]; N])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for i in 0..N {
            m.0[i][i] = C_ONE;
        }
        m
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = Self::zero();
        for i in 0..N {
            for j in 0..N {
                out.0[i][j] = self.0[i][j] * s;
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for i in 0..N {
            for j in 0..N {
                out.0[i][j] = self.0[j][i].conj();
            }
        }
        out
    }

    #[inline]
    pub fn matvec(&self, v: &[C64; N]) -> [C64; N] {
        let mut out = [C_ZERO; N];
        for i in 0..N {
            let mut acc = C_ZERO;
            for j in 0..N {
                acc += self.0[i][j] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for row in &self.0 {
            for e in row {
                m = m.max(e.norm());
            }
        }
        m
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (*self - *other).max_abs()
    }

    /// Deviation from unitarity, max |(A* A - I)_{ij}|.
    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * *self - Self::identity()).max_abs()
    }
}

impl<const N: usize> Add for CMat<N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = Self::zero();
        for i in 0..N {
            for j in 0..N {
                out.0[i][j] = self.0[i][j] + rhs.0[i][j];
            }
        }
        out
    }
}

impl<const N: usize> Sub for CMat<N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut out = Self::zero();
        for i in 0..N {
            for j in 0..N {
                out.0[i][j] = self.0[i][j] - rhs.0[i][j];
            }
        }
        out
    }
}

impl<const N: usize> Mul for CMat<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zero();
        for i in 0..N {
            for j in 0..N {
                let mut acc = C_ZERO;
                for k in 0..N {
                    acc += self.0[i][k] * rhs.0[k][j];
                }
                out.0[i][j] = acc;
            }
        }
        out
    }
}

impl<const N: usize> Mul<C64> for CMat<N> {
    type Output = Self;
    fn mul(self, s: C64) -> Self {
        self.scale(s)
    }
}

pub const SIGMA_1: Mat2 = CMat([[C_ZERO, C_ONE], [C_ONE, C_ZERO]]);
pub const SIGMA_2: Mat2 = CMat([[C_ZERO, C64::new(0.0, -1.0)], [C_I, C_ZERO]]);
pub const SIGMA_3: Mat2 = CMat([[C_ONE, C_ZERO], [C_ZERO, C64::new(-1.0, 0.0)]]);
pub const IDENTITY_2: Mat2 = CMat([[C_ONE, C_ZERO], [C_ZERO, C_ONE]]);

/// Pauli matrices indexed 1..=3.
pub const PAULI: [Mat2; 3] = [SIGMA_1, SIGMA_2, SIGMA_3];

/// Embeds 2x2 blocks into a 4x4 matrix [[a, b], [c, d]].
const fn block4(a: Mat2, b: Mat2, c: Mat2, d: Mat2) -> Mat4 {
    let mut m = [[C_ZERO; 4]; 4];
    let mut i = 0;
    while i < 2 {
        let mut j = 0;
        while j < 2 {
            m[i][j] = a.0[i][j];
            m[i][j + 2] = b.0[i][j];
            m[i + 2][j] = c.0[i][j];
            m[i + 2][j + 2] = d.0[i][j];
            j += 1;
        }
        i += 1;
    }
    CMat(m)
}

const ZERO_2: Mat2 = CMat([[C_ZERO, C_ZERO], [C_ZERO, C_ZERO]]);
const NEG_IDENTITY_2: Mat2 = CMat([[C64::new(-1.0, 0.0), C_ZERO], [C_ZERO, C64::new(-1.0, 0.0)]]);

pub const BETA: Mat4 = block4(IDENTITY_2, ZERO_2, ZERO_2, NEG_IDENTITY_2);
pub const ALPHA_1: Mat4 = block4(ZERO_2, SIGMA_1, SIGMA_1, ZERO_2);
pub const ALPHA_2: Mat4 = block4(ZERO_2, SIGMA_2, SIGMA_2, ZERO_2);
pub const ALPHA_3: Mat4 = block4(ZERO_2, SIGMA_3, SIGMA_3, ZERO_2);
pub const GAMMA: Mat4 = block4(ZERO_2, IDENTITY_2, IDENTITY_2, ZERO_2);
pub const IDENTITY_4: Mat4 = block4(IDENTITY_2, ZERO_2, ZERO_2, IDENTITY_2);

/// Dirac alpha matrices indexed 1..=3.
pub const ALPHA: [Mat4; 3] = [ALPHA_1, ALPHA_2, ALPHA_3];

/// Exact unitary exp(-i t (h0 I + h . sigma)) for real h0 and real h.
///
/// Uses cos/sin on the eigenphases: exp(-i t h.sigma) =
/// cos(t|h|) I - i sin(t|h|) (h/|h|).sigma, with the |h| -> 0 limit
/// returning exp(-i t h0) I. `tol` guards the normalization of h.
pub fn exp_hermitian_2(t: f64, h0: f64, h: [f64; 3], tol: f64) -> Mat2 {
    let norm = (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]).sqrt();
    let phase = C64::from_polar(1.0, -t * h0);
    if norm < tol {
        return IDENTITY_2.scale(phase);
    }
    let (s, c) = (t * norm).sin_cos();
    let n = [h[0] / norm, h[1] / norm, h[2] / norm];
    // cos I - i sin (n.sigma), expanded entrywise
    let m = CMat([
        [C64::new(c, -s * n[2]), C64::new(-s * n[1], -s * n[0])],
        [C64::new(s * n[1], -s * n[0]), C64::new(c, s * n[2])],
    ]);
    m.scale(phase)
}
