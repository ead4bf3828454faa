//! Symplectic spectra, the PPT test and logarithmic negativity for two
//! modes, plus the closed-form thresholds of the two-mode squeezed thermal
//! family.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{Mat2, Mat4, Z, DEFAULT_TOL};
use crate::numeric::golden_section_max;
use crate::states::SpaceTimeCM;

/// Symplectic eigenvalues of a two-mode covariance matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymplecticSpectrum {
    pub nu_minus: f64,
    pub nu_plus: f64,
}

/// Partial transpose on mode B: conjugation by `I ⊕ Z`.
pub fn partial_transpose(v: &SpaceTimeCM) -> Mat4 {
    partial_transpose_mat(&v.to_mat4())
}

pub(crate) fn partial_transpose_mat(m: &Mat4) -> Mat4 {
    let flip = Mat4::direct_sum(&Mat2::identity(), &Z);
    flip * *m * flip
}

/// Local symplectic invariants `(Δ, det V)` with
/// `Δ = det A + det B + 2 det C = ν₊² + ν₋²` and `det V = ν₊²ν₋²`.
pub fn symplectic_invariants(v: &Mat4) -> (f64, f64) {
    let delta = v.block(0, 0).det() + v.block(1, 1).det() + 2.0 * v.block(0, 1).det();
    (delta, v.det())
}

/// Both symplectic eigenvalues from the invariants
/// `Δ = det A + det B + 2 det C` and `det V`:
/// `ν±² = (Δ ± √(Δ² − 4 det V)) / 2`.
///
/// `ν⁻²` is taken as `det V / ν⁺²`, which avoids the cancellation in the
/// minus branch. Radicands within `1e-12·max(1, Δ²)` of zero are clamped.
///
/// Near a degenerate spectrum (pure states have `ν₋ = ν₊ = 1`) the square
/// root of the radicand amplifies rounding to about `1e-8`; threshold tests
/// that must be exact there use [`symplectic_invariants`] instead.
pub fn symplectic_min(v: &Mat4) -> Result<SymplecticSpectrum> {
    let (delta, det) = symplectic_invariants(v);
    let scale = delta.powi(2).max(1.0);

    let mut radicand = delta * delta - 4.0 * det;
    if radicand < -1e-12 * scale {
        return Err(Error::NegativeRadicand(radicand));
    }
    radicand = radicand.max(0.0);

    let nu_plus_sq = 0.5 * (delta + radicand.sqrt());
    if nu_plus_sq <= 0.0 {
        return Err(Error::IndefiniteMatrix(nu_plus_sq));
    }
    let mut nu_minus_sq = det / nu_plus_sq;
    if nu_minus_sq < -1e-12 * scale {
        return Err(Error::IndefiniteMatrix(nu_minus_sq));
    }
    nu_minus_sq = nu_minus_sq.max(0.0);
    Ok(SymplecticSpectrum {
        nu_minus: nu_minus_sq.sqrt(),
        nu_plus: nu_plus_sq.sqrt(),
    })
}

/// Smaller symplectic eigenvalue of the partial transpose, `ṽ⁻`.
pub fn pt_nu_minus(v: &SpaceTimeCM) -> Result<f64> {
    Ok(symplectic_min(&partial_transpose(v))?.nu_minus)
}

fn require_spatial(v: &SpaceTimeCM) -> Result<()> {
    if v.is_physical_spatial(DEFAULT_TOL) {
        Ok(())
    } else {
        Err(Error::NotASpatialState)
    }
}

/// PPT test, exact for two modes: entangled iff `ṽ⁻ < 1 − tol`.
pub fn is_entangled(v: &SpaceTimeCM, tol: f64) -> Result<bool> {
    require_spatial(v)?;
    Ok(pt_nu_minus(v)? < 1.0 - tol)
}

/// `max(0, −ln ṽ⁻)`, natural logarithm.
pub fn log_negativity(v: &SpaceTimeCM) -> Result<f64> {
    require_spatial(v)?;
    Ok((-pt_nu_minus(v)?.ln()).max(0.0))
}

/// Squeezing thresholds of the two-mode squeezed thermal family at thermal
/// variance `v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Example1Thresholds {
    /// Entangled iff `r > r_ent = ½ ln v`.
    pub r_ent: f64,
    /// Atemporal iff `r > r_atemp = ½ arccosh((v + √(v² + 8)) / 4)`.
    pub r_atemp: f64,
}

pub fn example1_thresholds(v: f64) -> Result<Example1Thresholds> {
    if !(v >= 1.0) || !v.is_finite() {
        return Err(Error::BadVariance(v));
    }
    let zeta = (v + (v * v + 8.0).sqrt()) / 4.0;
    Ok(Example1Thresholds {
        r_ent: 0.5 * v.ln(),
        r_atemp: 0.5 * zeta.acosh(),
    })
}

/// Largest log-negativity among temporally compatible two-mode squeezed
/// thermal states.
///
/// Along the boundary `v = cosh 4r / cosh 2r` the log-negativity is
/// `g(r) = 2r − ln(cosh 4r / cosh 2r)`; this maximizes `g` on `[0, 1]` by
/// golden-section search to `1e-8`. Returns `(r, g(r))`.
pub fn max_temporal_log_negativity() -> (f64, f64) {
    golden_section_max(
        |r| 2.0 * r - ((4.0 * r).cosh() / (2.0 * r).cosh()).ln(),
        0.0,
        1.0,
        1e-8,
    )
}
