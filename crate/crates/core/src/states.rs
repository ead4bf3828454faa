//! Space-time covariance matrices and the named state families.
//!
//! A [`SpaceTimeCM`] collects the quadrature statistics of two parties
//! regardless of the causal mechanism behind them. Only the local blocks are
//! required to be physical; the assembled 4×4 matrix may fail to be a
//! bipartite covariance matrix (temporal correlations typically do).

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::entanglement::symplectic_invariants;
use crate::error::{Error, Party, Result};
use crate::linalg::{apply_symplectic, beam_splitter, Mat2, Mat4, Sym2, DEFAULT_TOL, Z};

/// Off-diagonal magnitude below which a local block is treated as already
/// diagonal when choosing the standard-form rotation.
const ANGLE_TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpaceTimeCM {
    va: Sym2,
    vb: Sym2,
    c: Mat2,
    mean: [f64; 4],
}

/// Local frame changes applied by [`SpaceTimeCM::to_standard_form`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StandardFormRecord {
    /// Rotation applied to mode A, in `[-π/2, π/2)`.
    pub theta_a: f64,
    /// Rotation applied to mode B, in `[-π/2, π/2)`.
    pub theta_b: f64,
    /// Means that were removed.
    pub subtracted_mean: [f64; 4],
}

fn check_local(party: Party, v: &Sym2, tol: f64) -> Result<()> {
    let det = v.det();
    let psd = v.is_psd(tol);
    if !v.is_finite() || !psd || det < 1.0 - tol {
        return Err(Error::LocalUncertaintyViolation { party, det, psd });
    }
    Ok(())
}

/// Checks `det V ≥ 1` and `V ≥ 0` for a single-mode covariance matrix.
pub fn check_locally_physical(party: Party, v: &Sym2) -> Result<()> {
    check_local(party, v, DEFAULT_TOL)
}

impl SpaceTimeCM {
    /// Builds a space-time CM from its blocks. Both local blocks must obey
    /// the uncertainty relation; no global positivity is required.
    pub fn assemble(va: Sym2, vb: Sym2, c: Mat2) -> Result<Self> {
        check_local(Party::Alice, &va, DEFAULT_TOL)?;
        check_local(Party::Bob, &vb, DEFAULT_TOL)?;
        if !c.is_finite() {
            return Err(Error::InvalidDescriptor("cross-correlation block is not finite".into()));
        }
        Ok(Self::from_blocks_unchecked(va, vb, c))
    }

    /// Builds a space-time CM without checking the local uncertainty
    /// relation. Used for pseudo-channel outputs and finite-sample estimates,
    /// whose local blocks may dip below the vacuum level.
    pub fn from_blocks_unchecked(va: Sym2, vb: Sym2, c: Mat2) -> Self {
        SpaceTimeCM { va, vb, c, mean: [0.0; 4] }
    }

    /// Reads blocks out of a 4×4 matrix. The lower-left block is ignored
    /// in favour of the transpose of the upper-right one.
    pub fn from_mat4(m: &Mat4) -> Result<Self> {
        Self::assemble(m.block(0, 0).sym_part(), m.block(1, 1).sym_part(), m.block(0, 1))
    }

    pub fn with_mean(mut self, mean: [f64; 4]) -> Self {
        self.mean = mean;
        self
    }

    pub fn va(&self) -> &Sym2 {
        &self.va
    }

    pub fn vb(&self) -> &Sym2 {
        &self.vb
    }

    /// Cross-correlation block `C`.
    pub fn cross(&self) -> &Mat2 {
        &self.c
    }

    pub fn mean(&self) -> &[f64; 4] {
        &self.mean
    }

    pub fn to_mat4(&self) -> Mat4 {
        Mat4::from_blocks(&self.va.to_mat2(), &self.c, &self.c.transpose(), &self.vb.to_mat2())
    }

    pub fn det(&self) -> f64 {
        self.to_mat4().det()
    }

    /// Exchanges the roles of A and B: `{V_B, V_A, Cᵀ}`.
    pub fn swapped(&self) -> Self {
        let m = self.mean;
        SpaceTimeCM {
            va: self.vb,
            vb: self.va,
            c: self.c.transpose(),
            mean: [m[2], m[3], m[0], m[1]],
        }
    }

    /// True when both local blocks are diagonal (within `tol`, scaled) and
    /// the means vanish.
    pub fn is_standard_form(&self, tol: f64) -> bool {
        let diag = |v: &Sym2| v.is_diagonal(tol * v.max_abs().max(1.0));
        diag(&self.va) && diag(&self.vb) && self.mean.iter().all(|&x| x == 0.0)
    }

    /// Rotates each party's phase-space frame so the local blocks become
    /// diagonal with the larger variance on `q`, and drops the means.
    pub fn to_standard_form(&self) -> (SpaceTimeCM, StandardFormRecord) {
        let theta_a = standard_angle(&self.va);
        let theta_b = standard_angle(&self.vb);
        let ra = Mat2::rotation(theta_a);
        let rb = Mat2::rotation(theta_b);

        let diagonalize = |v: &Sym2, r: &Mat2| {
            let rotated = v.congruence(r);
            Sym2::diag(rotated.a11, rotated.a22)
        };
        let out = SpaceTimeCM {
            va: diagonalize(&self.va, &ra),
            vb: diagonalize(&self.vb, &rb),
            c: ra * self.c * rb.transpose(),
            mean: [0.0; 4],
        };
        let record = StandardFormRecord {
            theta_a,
            theta_b,
            subtracted_mean: self.mean,
        };
        (out, record)
    }

    /// Whether the correlations admit a bipartite quantum state: the 4×4
    /// matrix is positive definite and its smaller symplectic eigenvalue is
    /// at least 1 (within `tol`).
    ///
    /// `ν₋ ≥ 1` is tested as `(ν₊² − 1)(ν₋² − 1) = 1 − Δ + det V ≥ 0`
    /// together with `Δ = ν₊² + ν₋² ≥ 2`, which stays accurate when the
    /// spectrum is degenerate.
    pub fn is_physical_spatial(&self, tol: f64) -> bool {
        let m = self.to_mat4();
        if !leading_minors_positive(&m) {
            return false;
        }
        let (delta, det) = symplectic_invariants(&m);
        let scale = delta.abs().max(1.0).powi(2);
        1.0 - delta + det >= -tol * scale && delta >= 2.0 - tol * scale
    }
}

/// Rotation angle that diagonalizes `v` with its larger eigenvalue first.
fn standard_angle(v: &Sym2) -> f64 {
    let axis = if v.a12.abs() < ANGLE_TIE_TOL {
        if v.a11 >= v.a22 {
            0.0
        } else {
            FRAC_PI_2
        }
    } else {
        0.5 * (2.0 * v.a12).atan2(v.a11 - v.a22)
    };
    // axis ∈ (-π/2, π/2], so the applied rotation lies in [-π/2, π/2)
    let theta = -axis;
    if theta == 0.0 {
        0.0
    } else {
        theta
    }
}

/// Sylvester's criterion for positive definiteness.
fn leading_minors_positive(m: &Mat4) -> bool {
    let a = &m.0;
    let m1 = a[0][0];
    let m2 = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let m3 = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    m1 > 0.0 && m2 > 0.0 && m3 > 0.0 && m.det() > 0.0
}

/// Thermal state `v·I`.
pub fn thermal(v: f64) -> Result<Sym2> {
    if !(v >= 1.0) {
        return Err(Error::BadVariance(v));
    }
    Ok(Sym2::identity().scale(v))
}

/// Squeezed vacuum `R(θ)·diag(e^{2r}, e^{-2r})·R(θ)ᵀ`.
pub fn squeezed(r: f64, theta: f64) -> Sym2 {
    Sym2::diag((2.0 * r).exp(), (-2.0 * r).exp()).congruence(&Mat2::rotation(theta))
}

/// Two thermal modes of variance `v` through a two-mode squeezer `r`:
/// local blocks `v·cosh 2r·I`, cross block `v·sinh 2r·Z`.
pub fn two_mode_squeezed_thermal(v: f64, r: f64) -> Result<SpaceTimeCM> {
    thermal(v)?;
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter { name: "r", value: r });
    }
    let local = Sym2::identity().scale(v * (2.0 * r).cosh());
    SpaceTimeCM::assemble(local, local, Z.scale(v * (2.0 * r).sinh()))
}

/// Mixes two uncorrelated modes on a beam splitter of transmissivity `t`.
pub fn beam_splitter_mix(va: &Sym2, vb: &Sym2, t: f64) -> Result<SpaceTimeCM> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::BadTransmissivity(t));
    }
    check_locally_physical(Party::Alice, va)?;
    check_locally_physical(Party::Bob, vb)?;
    let input = Mat4::direct_sum(&va.to_mat2(), &vb.to_mat2());
    SpaceTimeCM::from_mat4(&apply_symplectic(&beam_splitter(t), &input))
}

/// Parameters of one random interference experiment: squeezed vacua
/// `r1` (angle 0) and `r2` (angle `phi`) mixed at transmissivity `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RandomInterference {
    pub r1: f64,
    pub r2: f64,
    pub phi: f64,
    pub t: f64,
}

impl RandomInterference {
    /// Draws `r1, r2 ~ U(0,1)`, `phi ~ U(0, 2π)`, `t ~ U(0,1)`.
    pub fn draw(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        RandomInterference {
            r1: rng.random_range(0.0..1.0),
            r2: rng.random_range(0.0..1.0),
            phi: rng.random_range(0.0..2.0 * PI),
            t: rng.random_range(0.0..=1.0),
        }
    }

    /// The interfered state in standard form, with both inputs scaled by
    /// the thermal variance `v` (`v = 1` gives a pure state).
    pub fn state(&self, v: f64) -> Result<SpaceTimeCM> {
        thermal(v)?;
        let a = squeezed(self.r1, 0.0).scale(v);
        let b = squeezed(self.r2, self.phi).scale(v);
        let mixed = beam_splitter_mix(&a, &b, self.t)?;
        Ok(mixed.to_standard_form().0)
    }
}

/// Random pure two-mode state, `det V = 1`.
pub fn random_pure_state(seed: u64) -> SpaceTimeCM {
    RandomInterference::draw(seed)
        .state(1.0)
        .expect("squeezed vacua are locally physical")
}

/// Random mixed two-mode state with fixed mixedness, `det V = v⁴`.
pub fn random_mixed_state(seed: u64, v: f64) -> Result<SpaceTimeCM> {
    RandomInterference::draw(seed).state(v)
}

/// JSON state descriptor: `{"V_A": [[..]], "V_B": [[..]], "C": [[..]], "mean": [..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDescriptor {
    #[serde(rename = "V_A")]
    pub va: [[f64; 2]; 2],
    #[serde(rename = "V_B")]
    pub vb: [[f64; 2]; 2],
    #[serde(rename = "C")]
    pub c: [[f64; 2]; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<[f64; 4]>,
}

/// Reads a symmetric 2×2 block, rejecting asymmetric or non-finite input.
pub fn symmetric_from_rows(name: &str, rows: &[[f64; 2]; 2]) -> Result<Sym2> {
    let m = Mat2(*rows);
    if !m.is_finite() {
        return Err(Error::InvalidDescriptor(format!("{name} has non-finite entries")));
    }
    let asym = (rows[0][1] - rows[1][0]).abs();
    if asym > 1e-12 * m.max_abs().max(1.0) {
        return Err(Error::InvalidDescriptor(format!("{name} is not symmetric")));
    }
    Ok(m.sym_part())
}

impl StateDescriptor {
    pub fn to_state(&self) -> Result<SpaceTimeCM> {
        let va = symmetric_from_rows("V_A", &self.va)?;
        let vb = symmetric_from_rows("V_B", &self.vb)?;
        let mut state = SpaceTimeCM::assemble(va, vb, Mat2(self.c))?;
        if let Some(mean) = self.mean {
            if mean.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidDescriptor("mean has non-finite entries".into()));
            }
            state = state.with_mean(mean);
        }
        Ok(state)
    }

    pub fn from_state(state: &SpaceTimeCM) -> Self {
        let mean = state.mean;
        StateDescriptor {
            va: state.va.to_mat2().0,
            vb: state.vb.to_mat2().0,
            c: state.c.0,
            mean: mean.iter().any(|&x| x != 0.0).then_some(mean),
        }
    }
}
