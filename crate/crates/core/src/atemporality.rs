//! Pseudo-channel retrieval, Gaussian atemporality robustness and causal
//! classification of space-time covariance matrices.
//!
//! Every space-time CM with an invertible `V_A` is reproduced by exactly one
//! pseudo-channel `(T, N)` from A to B. The correlations are compatible with
//! a forward temporal mechanism iff that pseudo-channel is completely
//! positive; the robustness `f = max(0, |ω| − √det N)` measures how much
//! noise on the receiving side is missing for that.

use serde::Serialize;

use crate::channels::GaussianChannel;
use crate::error::{Error, Party, Result};
use crate::linalg::{Herm2, Mat2, Sym2, DEFAULT_TOL, OMEGA};
use crate::numeric::{bisect_threshold, golden_section_max};
use crate::states::SpaceTimeCM;

const BISECT_TOL: f64 = 1e-10;
const BISECT_MAX_ITER: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// A → B.
    Forward,
    /// B → A.
    Reverse,
}

impl Direction {
    fn orient(self, v: &SpaceTimeCM) -> SpaceTimeCM {
        match self {
            Direction::Forward => *v,
            Direction::Reverse => v.swapped(),
        }
    }

    fn sender(self) -> Party {
        match self {
            Direction::Forward => Party::Alice,
            Direction::Reverse => Party::Bob,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    BothTemporal,
    ForwardOnlyTemporal,
    ReverseOnlyTemporal,
    Atemporal,
}

impl Classification {
    pub fn from_robustness(forward_f: f64, reverse_f: f64) -> Self {
        match (forward_f > 0.0, reverse_f > 0.0) {
            (false, false) => Classification::BothTemporal,
            (false, true) => Classification::ForwardOnlyTemporal,
            (true, false) => Classification::ReverseOnlyTemporal,
            (true, true) => Classification::Atemporal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtemporalityReport {
    pub forward_f: f64,
    pub reverse_f: f64,
    /// `min(forward_f, reverse_f)`.
    pub total_f: f64,
    pub omega_fwd: f64,
    pub omega_rev: f64,
    pub spatially_physical: bool,
    pub classification: Classification,
}

fn retrieve_oriented(v: &SpaceTimeCM, sender: Party) -> Result<GaussianChannel> {
    let va = v.va();
    if !va.is_diagonal(DEFAULT_TOL * va.max_abs().max(1.0)) {
        return Err(Error::NotStandardForm {
            party: sender,
            off_diagonal: va.a12,
        });
    }
    if !(va.a11 > 0.0 && va.a22 > 0.0) {
        return Err(Error::LocalUncertaintyViolation {
            party: sender,
            det: va.det(),
            psd: va.is_psd(DEFAULT_TOL),
        });
    }
    let inv = Mat2::diag(1.0 / va.a11, 1.0 / va.a22);
    let c = *v.cross();
    let t = c.transpose() * inv;
    let n = *v.vb() - (t * c).sym_part();
    Ok(GaussianChannel::new(t, n))
}

/// The unique pseudo-channel `T = Cᵀ V_A⁻¹`, `N = V_B − Cᵀ V_A⁻¹ C`
/// reproducing `v` from `V_A`. Requires a diagonal `V_A`.
pub fn retrieve_forward(v: &SpaceTimeCM) -> Result<GaussianChannel> {
    retrieve_oriented(v, Party::Alice)
}

/// Pseudo-channel from B to A, i.e. [`retrieve_forward`] on `{V_B, V_A, Cᵀ}`.
pub fn retrieve_reverse(v: &SpaceTimeCM) -> Result<GaussianChannel> {
    retrieve_oriented(&v.swapped(), Party::Bob)
}

pub fn retrieve(v: &SpaceTimeCM, dir: Direction) -> Result<GaussianChannel> {
    retrieve_oriented(&dir.orient(v), dir.sender())
}

/// Closed-form robustness of a (pseudo-)channel.
///
/// Returns 0 whenever `N + iωΩ` passes the PSD test, so the zero set agrees
/// exactly with [`GaussianChannel::is_cp`]. If the retrieved `N` is not
/// itself PSD the closed form does not apply and the thermal-noise
/// bisection is used instead.
pub fn channel_robustness(ch: &GaussianChannel) -> f64 {
    if !ch.n.is_psd(DEFAULT_TOL) {
        return thermal_noise_bisection(ch);
    }
    if ch.atemporality_matrix().is_psd(DEFAULT_TOL) {
        return 0.0;
    }
    (ch.omega().abs() - ch.n.det().max(0.0).sqrt()).max(0.0)
}

/// `→f = max(0, |ω| − √det N)` with `ω = 1 − det C / det V_A`.
pub fn forward_robustness(v: &SpaceTimeCM) -> Result<f64> {
    Ok(channel_robustness(&retrieve_forward(v)?))
}

/// `←f`, the forward robustness of the swapped CM.
pub fn reverse_robustness(v: &SpaceTimeCM) -> Result<f64> {
    Ok(channel_robustness(&retrieve_reverse(v)?))
}

pub fn robustness(v: &SpaceTimeCM, dir: Direction) -> Result<f64> {
    Ok(channel_robustness(&retrieve(v, dir)?))
}

/// Smallest `μ ≥ 0` making `N + μI + i(Ω − TΩTᵀ)` PSD, by bisection.
fn thermal_noise_bisection(ch: &GaussianChannel) -> f64 {
    let m = OMEGA - ch.t * OMEGA * ch.t.transpose();
    let omega = m.0[0][1];
    let hi = omega.abs() + 2.0 * ch.n.max_abs() + 1.0;
    bisect_threshold(
        |mu| Herm2::from_parts(&(ch.n + Sym2::identity().scale(mu)), &m).is_psd(DEFAULT_TOL),
        0.0,
        hi,
        BISECT_TOL,
        BISECT_MAX_ITER,
    )
}

/// Minimal thermal noise `μ·I` on the receiving side that makes the
/// retrieved pseudo-channel CP, found by bisection on the atemporality
/// matrix built directly from `Ω − TΩTᵀ`.
///
/// For isotropic retrieved noise this coincides with the closed form. For
/// anisotropic `N` it is smaller: it solves `(n₁ + μ)(n₂ + μ) = ω²` rather
/// than `√(n₁n₂) + μ = |ω|`.
pub fn robustness_oracle(v: &SpaceTimeCM, dir: Direction) -> Result<f64> {
    Ok(thermal_noise_bisection(&retrieve(v, dir)?))
}

/// Optimum of the general-noise problem: the largest `√det E` over
/// positive noise `E` on the CP boundary `det(N + E) = ω²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseOptimum {
    pub value: f64,
    /// Optimal noise, in the eigenbasis of `N`.
    pub eps1: f64,
    pub eps2: f64,
    /// Eigenvalues of the retrieved `N`.
    pub n1: f64,
    pub n2: f64,
    pub omega: f64,
}

/// Largest `det E` along the boundary `det(N + E) = ω² + ε₃²` for
/// `N = diag(n1, n2)` and noise with off-diagonal `eps3`, i.e.
/// `E = [[a − n1, ε₃], [ε₃, b − n2]]` with `ab = ω² + ε₃²`.
///
/// Parametrizes `a = K eˢ`, `b = K e⁻ˢ` over the range where both diagonal
/// entries of `E` are non-negative, scans a grid and refines the best cell
/// by golden-section search. Returns `(s, det E)` at the optimum.
pub fn boundary_noise_optimum(n1: f64, n2: f64, omega: f64, eps3: f64) -> Result<(f64, f64)> {
    if !(n1 > 0.0 && n2 > 0.0) {
        return Err(Error::NotApplicable);
    }
    let k = (omega * omega + eps3 * eps3).sqrt();
    let (lo, hi) = ((n1 / k).ln(), (k / n2).ln());
    if !(hi > lo) {
        return Err(Error::NotApplicable);
    }
    let det_e = |s: f64| (k * s.exp() - n1) * (k * (-s).exp() - n2) - eps3 * eps3;

    const GRID: usize = 2000;
    let step = (hi - lo) / GRID as f64;
    let best = (0..=GRID)
        .map(|i| lo + step * i as f64)
        .max_by(|a, b| det_e(*a).total_cmp(&det_e(*b)))
        .expect("grid is non-empty");
    let a = (best - step).max(lo);
    let b = (best + step).min(hi);
    Ok(golden_section_max(det_e, a, b, 1e-13))
}

/// Numerical solution of the general-noise robustness problem for one
/// direction. Requires a strictly atemporal direction with full-rank `N`.
pub fn general_noise_oracle(v: &SpaceTimeCM, dir: Direction) -> Result<NoiseOptimum> {
    let ch = retrieve(v, dir)?;
    if channel_robustness(&ch) <= 0.0 || !ch.n.is_psd(DEFAULT_TOL) {
        return Err(Error::NotApplicable);
    }
    let (n1, n2) = ch.n.eigenvalues();
    let omega = ch.omega();
    let (s, det_e) = boundary_noise_optimum(n1, n2, omega, 0.0)?;
    let w = omega.abs();
    Ok(NoiseOptimum {
        value: det_e.max(0.0).sqrt(),
        eps1: w * s.exp() - n1,
        eps2: w * (-s).exp() - n2,
        n1,
        n2,
        omega,
    })
}

/// Full causal report. The input is brought to standard form first and all
/// quantities refer to the standardized matrix.
pub fn classify(v: &SpaceTimeCM) -> Result<AtemporalityReport> {
    let (std, _) = v.to_standard_form();
    let fwd = retrieve_forward(&std)?;
    let rev = retrieve_reverse(&std)?;
    let forward_f = channel_robustness(&fwd);
    let reverse_f = channel_robustness(&rev);
    Ok(AtemporalityReport {
        forward_f,
        reverse_f,
        total_f: forward_f.min(reverse_f),
        omega_fwd: fwd.omega(),
        omega_rev: rev.omega(),
        spatially_physical: std.is_physical_spatial(DEFAULT_TOL),
        classification: Classification::from_robustness(forward_f, reverse_f),
    })
}
