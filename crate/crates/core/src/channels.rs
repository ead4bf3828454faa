//! Displacement-free Gaussian channels `V ↦ T V Tᵀ + N` and the temporal
//! mechanism that turns an input state and a channel into a space-time CM.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Party, Result};
use crate::linalg::{Herm2, Mat2, Sym2, DEFAULT_TOL};
use crate::states::{check_locally_physical, symmetric_from_rows, SpaceTimeCM};

/// A channel or pseudo-channel `(T, N)`. `N` is symmetric but need not be
/// positive, and `(T, N)` need not be completely positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianChannel {
    pub t: Mat2,
    pub n: Sym2,
}

/// Outcome of the complete-positivity test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CpVerdict {
    pub is_cp: bool,
    /// Smaller eigenvalue of the atemporality matrix `N + iωΩ`.
    pub min_eigenvalue: f64,
}

impl GaussianChannel {
    pub fn new(t: Mat2, n: Sym2) -> Self {
        GaussianChannel { t, n }
    }

    pub fn identity() -> Self {
        GaussianChannel::new(Mat2::identity(), Sym2::zero())
    }

    /// Pure-loss channel of transmissivity `eta`: `T = √η·I`, `N = (1 − η)·I`.
    pub fn loss(eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::BadTransmissivity(eta));
        }
        Ok(GaussianChannel::new(
            Mat2::identity().scale(eta.sqrt()),
            Sym2::identity().scale(1.0 - eta),
        ))
    }

    /// Phase rotation `T = R(θ)`, `N = 0`.
    pub fn phase(theta: f64) -> Self {
        GaussianChannel::new(Mat2::rotation(theta), Sym2::zero())
    }

    /// Output covariance `T V Tᵀ + N`. Physicality of the result is not
    /// checked.
    pub fn apply(&self, v: &Sym2) -> Sym2 {
        v.congruence(&self.t) + self.n
    }

    /// `ω = 1 − det T`.
    pub fn omega(&self) -> f64 {
        1.0 - self.t.det()
    }

    /// `X(T, N) = N + iΩ − iTΩTᵀ`, reduced to `N + iωΩ`.
    pub fn atemporality_matrix(&self) -> Herm2 {
        Herm2::noise_plus_i_omega(&self.n, self.omega())
    }

    pub fn is_cp(&self, tol: f64) -> CpVerdict {
        let x = self.atemporality_matrix();
        CpVerdict {
            is_cp: x.is_psd(tol),
            min_eigenvalue: x.eigenvalues().1,
        }
    }

    /// `next ∘ self`: `(T₂T₁, T₂N₁T₂ᵀ + N₂)`.
    pub fn then(&self, next: &GaussianChannel) -> GaussianChannel {
        GaussianChannel::new(next.t * self.t, self.n.congruence(&next.t) + next.n)
    }
}

/// Space-time CM produced by sending `V_A` through `ch`:
/// `{V_A, T V_A Tᵀ + N, V_A Tᵀ}`.
///
/// `V_A` must be diagonal. The channel is not required to be CP, so the
/// output block `V_B` is not checked.
pub fn temporal_mechanism(va: &Sym2, ch: &GaussianChannel) -> Result<SpaceTimeCM> {
    check_locally_physical(Party::Alice, va)?;
    if !va.is_diagonal(DEFAULT_TOL * va.max_abs().max(1.0)) {
        return Err(Error::NotStandardForm {
            party: Party::Alice,
            off_diagonal: va.a12,
        });
    }
    Ok(SpaceTimeCM::from_blocks_unchecked(
        *va,
        ch.apply(va),
        va.to_mat2() * ch.t.transpose(),
    ))
}

/// JSON channel descriptor: `{"T": [[..]], "N": [[..]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelDescriptor {
    #[serde(rename = "T")]
    pub t: [[f64; 2]; 2],
    #[serde(rename = "N")]
    pub n: [[f64; 2]; 2],
}

impl ChannelDescriptor {
    pub fn to_channel(&self) -> Result<GaussianChannel> {
        let t = Mat2(self.t);
        if !t.is_finite() {
            return Err(Error::InvalidDescriptor("T has non-finite entries".into()));
        }
        Ok(GaussianChannel::new(t, symmetric_from_rows("N", &self.n)?))
    }

    pub fn from_channel(ch: &GaussianChannel) -> Self {
        ChannelDescriptor {
            t: ch.t.0,
            n: ch.n.to_mat2().0,
        }
    }
}
