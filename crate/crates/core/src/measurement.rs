//! Monte-Carlo simulation of the homodyne procedure and estimation of the
//! space-time CM from finite samples.
//!
//! In each round Alice and Bob independently either do nothing or measure
//! `q` or `p`. Only one quadrature per party is observed per round, so each
//! setting pair is sampled from its own bivariate marginal; the full 4×4
//! matrix is never sampled jointly (it need not be positive).

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::atemporality::{channel_robustness, classify, retrieve, AtemporalityReport, Classification, Direction};
use crate::error::{Error, Result};
use crate::linalg::{Mat2, Mat4, Sym2, DEFAULT_TOL};
use crate::numeric::derive_seed;
use crate::states::SpaceTimeCM;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    Q,
    P,
}

impl Quadrature {
    fn index(self) -> usize {
        match self {
            Quadrature::Q => 0,
            Quadrature::P => 1,
        }
    }
}

/// Setting of one party in one round; `None` means "do nothing".
pub type Setting = Option<Quadrature>;

pub fn setting_name(s: Setting) -> &'static str {
    match s {
        Some(Quadrature::Q) => "q",
        Some(Quadrature::P) => "p",
        None => "none",
    }
}

/// All nine setting pairs, in the order used for seeding and export.
pub const ALL_SETTINGS: [(Setting, Setting); 9] = {
    use Quadrature::{P, Q};
    [
        (None, None),
        (None, Some(Q)),
        (None, Some(P)),
        (Some(Q), None),
        (Some(Q), Some(Q)),
        (Some(Q), Some(P)),
        (Some(P), None),
        (Some(P), Some(Q)),
        (Some(P), Some(P)),
    ]
};

/// Outcomes of `count` rounds with a fixed setting pair, stored column-wise.
/// A column is empty when its party did nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub quad_a: Setting,
    pub quad_b: Setting,
    pub count: usize,
    xa: Vec<f64>,
    xb: Vec<f64>,
}

impl SampleBatch {
    pub fn new(quad_a: Setting, quad_b: Setting, count: usize, xa: Vec<f64>, xb: Vec<f64>) -> Result<Self> {
        let expect = |s: Setting| if s.is_some() { count } else { 0 };
        if xa.len() != expect(quad_a) || xb.len() != expect(quad_b) {
            return Err(Error::InvalidDescriptor(format!(
                "batch ({}, {}) has {} / {} outcomes for count {count}",
                setting_name(quad_a),
                setting_name(quad_b),
                xa.len(),
                xb.len()
            )));
        }
        Ok(SampleBatch { quad_a, quad_b, count, xa, xb })
    }

    pub fn xa(&self) -> &[f64] {
        &self.xa
    }

    pub fn xb(&self) -> &[f64] {
        &self.xb
    }

    pub fn outcome(&self, i: usize) -> (Option<f64>, Option<f64>) {
        (self.xa.get(i).copied(), self.xb.get(i).copied())
    }

    fn mean_product(&self) -> f64 {
        match (self.xa.is_empty(), self.xb.is_empty()) {
            (false, false) => self.xa.iter().zip(&self.xb).map(|(a, b)| a * b).sum::<f64>() / self.count as f64,
            (false, true) => self.xa.iter().map(|a| a * a).sum::<f64>() / self.count as f64,
            (true, false) => self.xb.iter().map(|b| b * b).sum::<f64>() / self.count as f64,
            (true, true) => 0.0,
        }
    }
}

/// Lower Cholesky factor `(l11, l21, l22)` of a 2×2 covariance, with
/// `l22 = 0` on rank-deficient marginals.
fn cholesky_2x2(s: &Sym2) -> Option<(f64, f64, f64)> {
    let tol = DEFAULT_TOL * s.max_abs().max(1.0);
    if s.eigenvalues().1 < -tol {
        return None;
    }
    let l11 = s.a11.max(0.0).sqrt();
    let l21 = if l11 > 0.0 { s.a12 / l11 } else { 0.0 };
    let rest = s.a22 - l21 * l21;
    let l22 = if rest.abs() <= tol { 0.0 } else { rest.max(0.0).sqrt() };
    Some((l11, l21, l22))
}

/// Draws `n` rounds of the setting pair `(quad_a, quad_b)` from the zero-mean
/// Gaussian with the corresponding marginal of `v`.
pub fn sample_setting(v: &SpaceTimeCM, quad_a: Setting, quad_b: Setting, n: usize, seed: u64) -> Result<SampleBatch> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let va = v.va().to_mat2();
    let vb = v.vb().to_mat2();
    let (xa, xb) = match (quad_a, quad_b) {
        (None, None) => (Vec::new(), Vec::new()),
        (Some(a), None) => {
            let sd = va.0[a.index()][a.index()].max(0.0).sqrt();
            ((0..n).map(|_| sd * normal()).collect(), Vec::new())
        }
        (None, Some(b)) => {
            let sd = vb.0[b.index()][b.index()].max(0.0).sqrt();
            (Vec::new(), (0..n).map(|_| sd * normal()).collect())
        }
        (Some(a), Some(b)) => {
            let marginal = Sym2::new(
                va.0[a.index()][a.index()],
                v.cross().0[a.index()][b.index()],
                vb.0[b.index()][b.index()],
            );
            let (l11, l21, l22) = cholesky_2x2(&marginal).ok_or(Error::UnsamplableMarginal {
                a: setting_name(quad_a),
                b: setting_name(quad_b),
                min_eigenvalue: marginal.eigenvalues().1,
            })?;
            let mut xa = Vec::with_capacity(n);
            let mut xb = Vec::with_capacity(n);
            for _ in 0..n {
                let (z1, z2) = (normal(), normal());
                xa.push(l11 * z1);
                xb.push(l21 * z1 + l22 * z2);
            }
            (xa, xb)
        }
    };
    SampleBatch::new(quad_a, quad_b, n, xa, xb)
}

/// Samples all nine setting pairs with `n` rounds each. Setting `k` of
/// [`ALL_SETTINGS`] uses the seed `derive_seed(seed, k)`, so the result does
/// not depend on scheduling.
pub fn sample_all_settings(v: &SpaceTimeCM, n: usize, seed: u64) -> Result<Vec<SampleBatch>> {
    ALL_SETTINGS
        .par_iter()
        .enumerate()
        .map(|(k, &(a, b))| sample_setting(v, a, b, n, derive_seed(seed, k as u64)))
        .collect()
}

/// Point estimate of the space-time CM with per-entry standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CMEstimate {
    pub estimate: SpaceTimeCM,
    /// Standard error of each entry of the 4×4 matrix, ordered
    /// `(q_A, p_A, q_B, p_B)`.
    pub standard_errors: Mat4,
    pub n_per_setting: usize,
}

fn find<'a>(batches: &'a [SampleBatch], a: Setting, b: Setting) -> Result<&'a SampleBatch> {
    let batch = batches
        .iter()
        .find(|x| x.quad_a == a && x.quad_b == b)
        .ok_or(Error::MissingSetting {
            a: setting_name(a),
            b: setting_name(b),
        })?;
    if batch.count < 2 {
        return Err(Error::InsufficientSamples(batch.count));
    }
    Ok(batch)
}

/// Estimates the space-time CM from sampled batches, assuming zero means
/// and a standard basis.
///
/// Local variances come from the single-party settings and cross entries
/// from the paired settings, each as an empirical second moment. Local
/// `q`–`p` covariances cannot be observed and are taken to be 0. Standard
/// errors use the Gaussian moment variance `(VᵢᵢVⱼⱼ + Vᵢⱼ²)/n` evaluated at
/// the estimate.
pub fn estimate_cm(batches: &[SampleBatch]) -> Result<CMEstimate> {
    use Quadrature::{P, Q};
    let mut m = Mat4::zero();
    let mut counts = [[0usize; 4]; 4];
    let slot = |s: Quadrature, party_b: bool| s.index() + if party_b { 2 } else { 0 };

    for q in [Q, P] {
        let a = find(batches, Some(q), None)?;
        let i = slot(q, false);
        m.0[i][i] = a.mean_product();
        counts[i][i] = a.count;
        let b = find(batches, None, Some(q))?;
        let j = slot(q, true);
        m.0[j][j] = b.mean_product();
        counts[j][j] = b.count;
    }
    for qa in [Q, P] {
        for qb in [Q, P] {
            let batch = find(batches, Some(qa), Some(qb))?;
            let (i, j) = (slot(qa, false), slot(qb, true));
            m.0[i][j] = batch.mean_product();
            m.0[j][i] = m.0[i][j];
            counts[i][j] = batch.count;
            counts[j][i] = batch.count;
        }
    }

    let mut se = Mat4::zero();
    for i in 0..4 {
        for j in 0..4 {
            if counts[i][j] > 0 {
                let var = (m.0[i][i] * m.0[j][j] + m.0[i][j] * m.0[i][j]) / counts[i][j] as f64;
                se.0[i][j] = var.max(0.0).sqrt();
            }
        }
    }
    let n_per_setting = counts.iter().flatten().copied().filter(|&c| c > 0).min().unwrap_or(0);

    let estimate = SpaceTimeCM::from_blocks_unchecked(
        Sym2::diag(m.0[0][0], m.0[1][1]),
        Sym2::diag(m.0[2][2], m.0[3][3]),
        m.block(0, 1),
    );
    Ok(CMEstimate {
        estimate,
        standard_errors: se,
        n_per_setting,
    })
}

pub const BOOTSTRAP_RESAMPLES: usize = 200;

/// Classification of an estimated CM that accounts for sampling error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfidenceReport {
    /// Report on the point estimate.
    pub report: AtemporalityReport,
    /// Bootstrap standard deviations of the robustness in each direction.
    pub forward_se: f64,
    pub reverse_se: f64,
    /// Set when either robustness is below three standard errors, i.e. the
    /// data cannot tell that direction apart from the CP boundary.
    pub boundary_uncertain: bool,
    /// Classification that only counts a direction as atemporal when its
    /// robustness exceeds three standard errors.
    pub classification: Classification,
}

fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 || xs.iter().all(|&x| x == xs[0]) {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Classifies the point estimate and propagates sampling error to the
/// robustness values by a parametric bootstrap: each of the eight estimated
/// entries is redrawn from its asymptotic Gaussian, [`BOOTSTRAP_RESAMPLES`]
/// times, with resample `b` seeded by `derive_seed(seed, b)`.
pub fn classify_with_confidence(est: &CMEstimate, seed: u64) -> Result<ConfidenceReport> {
    let report = classify(&est.estimate)?;
    let base = est.estimate.to_mat4();
    let se = &est.standard_errors;

    let draws: Vec<(f64, f64)> = (0..BOOTSTRAP_RESAMPLES)
        .into_par_iter()
        .filter_map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, b as u64));
            let mut noise = |i: usize, j: usize| -> f64 {
                let z: f64 = StandardNormal.sample(&mut rng);
                base.0[i][j] + se.0[i][j] * z
            };
            let va = Sym2::diag(noise(0, 0), noise(1, 1));
            let vb = Sym2::diag(noise(2, 2), noise(3, 3));
            let c = Mat2::new(noise(0, 2), noise(0, 3), noise(1, 2), noise(1, 3));
            let s = SpaceTimeCM::from_blocks_unchecked(va, vb, c);
            let f = |d| retrieve(&s, d).ok().map(|ch| channel_robustness(&ch));
            Some((f(Direction::Forward)?, f(Direction::Reverse)?))
        })
        .collect();
    let fwd: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let rev: Vec<f64> = draws.iter().map(|d| d.1).collect();
    let (forward_se, reverse_se) = (std_dev(&fwd), std_dev(&rev));

    let fwd_significant = report.forward_f > 3.0 * forward_se;
    let rev_significant = report.reverse_f > 3.0 * reverse_se;
    let as_f = |significant: bool| if significant { 1.0 } else { 0.0 };
    Ok(ConfidenceReport {
        report,
        forward_se,
        reverse_se,
        boundary_uncertain: report.forward_f < 3.0 * forward_se || report.reverse_f < 3.0 * reverse_se,
        classification: Classification::from_robustness(as_f(fwd_significant), as_f(rev_significant)),
    })
}

/// Writes all outcomes as CSV with columns `setting_a,setting_b,x_a,x_b`.
/// Columns of a party that did nothing are left empty.
pub fn write_samples_csv<W: Write>(batches: &[SampleBatch], out: &mut W) -> Result<()> {
    writeln!(out, "setting_a,setting_b,x_a,x_b")?;
    for batch in batches {
        let (a, b) = (setting_name(batch.quad_a), setting_name(batch.quad_b));
        for i in 0..batch.count {
            let (xa, xb) = batch.outcome(i);
            let cell = |x: Option<f64>| x.map(crate::experiments::fmt_g12).unwrap_or_default();
            writeln!(out, "{a},{b},{},{}", cell(xa), cell(xb))?;
        }
    }
    Ok(())
}
