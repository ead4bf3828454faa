//! Fixed-shape real and Hermitian matrix arithmetic for single modes (2×2)
//! and mode pairs (4×4).
//!
//! Units are ħ = 2 throughout, so the vacuum covariance is the identity and
//! the canonical commutator is `[x_j, x_k] = 2i Ω_jk`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

/// Default tolerance for positivity tests. Scaled by `max(1, ‖M‖²_max)`.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Single-mode symplectic form `Ω = [[0, 1], [-1, 0]]`.
pub const OMEGA: Mat2 = Mat2([[0.0, 1.0], [-1.0, 0.0]]);

/// Momentum reflection `Z = diag(1, -1)`.
pub const Z: Mat2 = Mat2([[1.0, 0.0], [0.0, -1.0]]);

/// General real 2×2 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub const fn identity() -> Self {
        Mat2::new(1.0, 0.0, 0.0, 1.0)
    }

    pub const fn zero() -> Self {
        Mat2::new(0.0, 0.0, 0.0, 0.0)
    }

    pub const fn diag(a: f64, d: f64) -> Self {
        Mat2::new(a, 0.0, 0.0, d)
    }

    /// Counter-clockwise phase-space rotation by `theta`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Mat2::new(c, -s, s, c)
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Mat2::new(m[0][0], m[1][0], m[0][1], m[1][1])
    }

    pub fn scale(&self, k: f64) -> Self {
        let m = &self.0;
        Mat2::new(k * m[0][0], k * m[0][1], k * m[1][0], k * m[1][1])
    }

    /// Inverse by the adjugate formula; `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let m = &self.0;
        Some(Mat2::new(m[1][1], -m[0][1], -m[1][0], m[0][0]).scale(1.0 / det))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }

    /// Symmetric part `(M + Mᵀ)/2`.
    pub fn sym_part(&self) -> Sym2 {
        let m = &self.0;
        Sym2::new(m[0][0], 0.5 * (m[0][1] + m[1][0]), m[1][1])
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (self.0, rhs.0);
        Mat2::new(a[0][0] + b[0][0], a[0][1] + b[0][1], a[1][0] + b[1][0], a[1][1] + b[1][1])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        self + (-rhs)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-1.0)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (self.0, rhs.0);
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

/// Real symmetric 2×2 matrix, stored as its upper triangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sym2 {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl Sym2 {
    pub const fn new(a11: f64, a12: f64, a22: f64) -> Self {
        Sym2 { a11, a12, a22 }
    }

    pub const fn identity() -> Self {
        Sym2::new(1.0, 0.0, 1.0)
    }

    pub const fn zero() -> Self {
        Sym2::new(0.0, 0.0, 0.0)
    }

    pub const fn diag(a11: f64, a22: f64) -> Self {
        Sym2::new(a11, 0.0, a22)
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a12
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn scale(&self, k: f64) -> Self {
        Sym2::new(k * self.a11, k * self.a12, k * self.a22)
    }

    pub fn to_mat2(&self) -> Mat2 {
        Mat2::new(self.a11, self.a12, self.a12, self.a22)
    }

    pub fn max_abs(&self) -> f64 {
        self.a11.abs().max(self.a12.abs()).max(self.a22.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a22.is_finite()
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        self.a12.abs() <= tol
    }

    /// Eigenvalues `(larger, smaller)` in closed form.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * self.trace();
        let half_gap = (0.5 * (self.a11 - self.a22)).hypot(self.a12);
        (mean + half_gap, mean - half_gap)
    }

    /// Congruence `M S Mᵀ`, re-symmetrized.
    pub fn congruence(&self, m: &Mat2) -> Sym2 {
        (*m * self.to_mat2() * m.transpose()).sym_part()
    }

    /// 2×2 positive-semidefiniteness test; the boundary counts as PSD.
    ///
    /// True iff `trace ≥ -tol`, `a11 ≥ -tol` and `det ≥ -tol·scale` with
    /// `scale = max(1, ‖M‖²_max)`.
    pub fn is_psd(&self, tol: f64) -> bool {
        let scale = self.max_abs().powi(2).max(1.0);
        self.trace() >= -tol && self.a11 >= -tol && self.det() >= -tol * scale
    }
}

impl Add for Sym2 {
    type Output = Sym2;
    fn add(self, rhs: Sym2) -> Sym2 {
        Sym2::new(self.a11 + rhs.a11, self.a12 + rhs.a12, self.a22 + rhs.a22)
    }
}

impl Sub for Sym2 {
    type Output = Sym2;
    fn sub(self, rhs: Sym2) -> Sym2 {
        Sym2::new(self.a11 - rhs.a11, self.a12 - rhs.a12, self.a22 - rhs.a22)
    }
}

/// Complex Hermitian 2×2 matrix `[[d1, z], [z̄, d2]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Herm2 {
    pub d1: f64,
    pub d2: f64,
    pub z: Complex64,
}

impl Herm2 {
    pub fn new(d1: f64, d2: f64, z: Complex64) -> Self {
        Herm2 { d1, d2, z }
    }

    /// `N + iωΩ`, the reduced form of the atemporality matrix.
    pub fn noise_plus_i_omega(noise: &Sym2, omega: f64) -> Self {
        Herm2::new(noise.a11, noise.a22, Complex64::new(noise.a12, omega))
    }

    /// `S + iA` for real symmetric `S` and real antisymmetric `A`. Only the
    /// upper entry of `A` is read.
    pub fn from_parts(sym: &Sym2, antisym: &Mat2) -> Self {
        Herm2::new(sym.a11, sym.a22, Complex64::new(sym.a12, antisym.0[0][1]))
    }

    pub fn trace(&self) -> f64 {
        self.d1 + self.d2
    }

    pub fn det(&self) -> f64 {
        self.d1 * self.d2 - self.z.norm_sqr()
    }

    /// Eigenvalues `(larger, smaller)`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * self.trace();
        let half_gap = (0.5 * (self.d1 - self.d2)).hypot(self.z.norm());
        (mean + half_gap, mean - half_gap)
    }

    pub fn max_abs(&self) -> f64 {
        self.d1.abs().max(self.d2.abs()).max(self.z.norm())
    }

    /// PSD test via trace and determinant; the boundary counts as PSD.
    pub fn is_psd(&self, tol: f64) -> bool {
        let scale = self.max_abs().powi(2).max(1.0);
        self.trace() >= -tol && self.det() >= -tol * scale
    }
}

/// Real 4×4 matrix, row-major, ordered `(q_A, p_A, q_B, p_B)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat4(pub [[f64; 4]; 4]);

impl Mat4 {
    pub const fn zero() -> Self {
        Mat4([[0.0; 4]; 4])
    }

    pub fn identity() -> Self {
        Mat4::direct_sum(&Mat2::identity(), &Mat2::identity())
    }

    /// Two-mode symplectic form `Ω ⊕ Ω`.
    pub fn omega2() -> Self {
        Mat4::direct_sum(&OMEGA, &OMEGA)
    }

    /// `[[tl, tr], [bl, br]]`.
    pub fn from_blocks(tl: &Mat2, tr: &Mat2, bl: &Mat2, br: &Mat2) -> Self {
        let mut out = Mat4::zero();
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] = tl.0[i][j];
                out.0[i][j + 2] = tr.0[i][j];
                out.0[i + 2][j] = bl.0[i][j];
                out.0[i + 2][j + 2] = br.0[i][j];
            }
        }
        out
    }

    pub fn direct_sum(a: &Mat2, b: &Mat2) -> Self {
        Mat4::from_blocks(a, &Mat2::zero(), &Mat2::zero(), b)
    }

    /// Block `(row, col)` with `row, col ∈ {0, 1}`.
    pub fn block(&self, row: usize, col: usize) -> Mat2 {
        let (r, c) = (2 * row, 2 * col);
        let m = &self.0;
        Mat2::new(m[r][c], m[r][c + 1], m[r + 1][c], m[r + 1][c + 1])
    }

    pub fn transpose(&self) -> Self {
        let mut out = Mat4::zero();
        for i in 0..4 {
            for j in 0..4 {
                out.0[i][j] = self.0[j][i];
            }
        }
        out
    }

    /// `(M + Mᵀ)/2`.
    pub fn symmetrized(&self) -> Self {
        let mut out = *self;
        for i in 0..4 {
            for j in (i + 1)..4 {
                let avg = 0.5 * (self.0[i][j] + self.0[j][i]);
                out.0[i][j] = avg;
                out.0[j][i] = avg;
            }
        }
        out
    }

    pub fn scale(&self, k: f64) -> Self {
        let mut out = *self;
        out.0.iter_mut().flatten().for_each(|x| *x *= k);
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Mat4) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
    }

    /// Determinant by Laplace expansion along the first two rows.
    pub fn det(&self) -> f64 {
        let m = &self.0;
        let s0 = m[0][0] * m[1][1] - m[1][0] * m[0][1];
        let s1 = m[0][0] * m[1][2] - m[1][0] * m[0][2];
        let s2 = m[0][0] * m[1][3] - m[1][0] * m[0][3];
        let s3 = m[0][1] * m[1][2] - m[1][1] * m[0][2];
        let s4 = m[0][1] * m[1][3] - m[1][1] * m[0][3];
        let s5 = m[0][2] * m[1][3] - m[1][2] * m[0][3];

        let c5 = m[2][2] * m[3][3] - m[3][2] * m[2][3];
        let c4 = m[2][1] * m[3][3] - m[3][1] * m[2][3];
        let c3 = m[2][1] * m[3][2] - m[3][1] * m[2][2];
        let c2 = m[2][0] * m[3][3] - m[3][0] * m[2][3];
        let c1 = m[2][0] * m[3][2] - m[3][0] * m[2][2];
        let c0 = m[2][0] * m[3][1] - m[3][0] * m[2][1];

        s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }
}

impl Mul for Mat4 {
    type Output = Mat4;
    fn mul(self, rhs: Mat4) -> Mat4 {
        let mut out = Mat4::zero();
        for i in 0..4 {
            for j in 0..4 {
                out.0[i][j] = (0..4).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        out
    }
}

impl Add for Mat4 {
    type Output = Mat4;
    fn add(self, rhs: Mat4) -> Mat4 {
        let mut out = self;
        for i in 0..4 {
            for j in 0..4 {
                out.0[i][j] += rhs.0[i][j];
            }
        }
        out
    }
}

impl Sub for Mat4 {
    type Output = Mat4;
    fn sub(self, rhs: Mat4) -> Mat4 {
        self + rhs.scale(-1.0)
    }
}

/// `S V Sᵀ`, re-symmetrized to remove round-off asymmetry.
pub fn apply_symplectic(s: &Mat4, v: &Mat4) -> Mat4 {
    (*s * *v * s.transpose()).symmetrized()
}

/// Two-mode squeezer `[[cosh r·I, sinh r·Z], [sinh r·Z, cosh r·I]]`.
pub fn two_mode_squeezer(r: f64) -> Mat4 {
    let (c, s) = (r.cosh(), r.sinh());
    let diag = Mat2::identity().scale(c);
    let off = Z.scale(s);
    Mat4::from_blocks(&diag, &off, &off, &diag)
}

/// Beam splitter `[[√t·I, √(1-t)·I], [-√(1-t)·I, √t·I]]`.
pub fn beam_splitter(t: f64) -> Mat4 {
    let (a, b) = (t.sqrt(), (1.0 - t).sqrt());
    let id = Mat2::identity();
    Mat4::from_blocks(&id.scale(a), &id.scale(b), &id.scale(-b), &id.scale(a))
}
