//! Parameter scans over the named state families and random ensembles,
//! written as CSV.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::atemporality::classify;
use crate::entanglement::{log_negativity, pt_nu_minus, symplectic_min};
use crate::error::{Error, Result};
use crate::linalg::{Mat2, Sym2, Z};
use crate::numeric::{derive_seed, linspace};
use crate::states::{beam_splitter_mix, two_mode_squeezed_thermal, RandomInterference, SpaceTimeCM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Two-mode squeezed thermal states over `(v, r)`.
    Example1,
    /// Asymmetric squeezed inputs `diag(u, v)`, `diag(v, u)` on a balanced
    /// beam splitter.
    Example2,
    /// `diag(v1, v2)` sent through a loss channel of transmissivity `eta`.
    Example3,
    /// Two-mode squeezed vacuum over `r`.
    TmsvCurve,
    RandomPure,
    RandomMixed,
}

pub const FAMILIES: [Family; 6] = [
    Family::Example1,
    Family::Example2,
    Family::Example3,
    Family::TmsvCurve,
    Family::RandomPure,
    Family::RandomMixed,
];

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Example1 => "example1",
            Family::Example2 => "example2",
            Family::Example3 => "example3",
            Family::TmsvCurve => "tmsv-curve",
            Family::RandomPure => "random-pure",
            Family::RandomMixed => "random-mixed",
        }
    }

    fn is_random(self) -> bool {
        matches!(self, Family::RandomPure | Family::RandomMixed)
    }

    /// Grid parameters and their default ranges, in output-column order.
    pub fn default_ranges(self) -> Vec<(&'static str, Range)> {
        let r = Range::new;
        match self {
            Family::Example1 => vec![("v", r(1.0, 3.0, 21)), ("r", r(0.0, 1.0, 101))],
            Family::Example2 => vec![("u", r(0.2, 3.0, 200)), ("v", r(0.2, 3.0, 200))],
            Family::Example3 => vec![
                ("eta", r(0.3, 0.9, 4)),
                ("v1", r(0.1, 3.0, 59)),
                ("v2", r(0.1, 3.0, 59)),
            ],
            Family::TmsvCurve => vec![("v", r(1.0, 1.0, 1)), ("r", r(0.01, 1.0, 100))],
            Family::RandomPure => vec![],
            Family::RandomMixed => vec![("v", r(1.5, 1.5, 1))],
        }
    }

    /// Parameters of a single representative member, used by the `sample`
    /// command.
    pub fn point_defaults(self) -> Vec<(&'static str, f64)> {
        match self {
            Family::Example1 | Family::TmsvCurve => vec![("v", 1.0), ("r", 0.5)],
            Family::Example2 => vec![("u", 0.5), ("v", 2.5)],
            Family::Example3 => vec![("eta", 0.5), ("v1", 0.5), ("v2", 2.0)],
            Family::RandomPure => vec![],
            Family::RandomMixed => vec![("v", 1.5)],
        }
    }

    /// Default number of random samples.
    pub fn default_samples(self) -> usize {
        match self {
            Family::RandomPure => 5000,
            Family::RandomMixed => 20000,
            _ => 0,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FAMILIES
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidDescriptor(format!("unknown family {s:?}")))
    }
}

/// Inclusive grid `min..=max` with `steps` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Range {
    pub fn new(min: f64, max: f64, steps: usize) -> Self {
        Range { min, max, steps }
    }

    pub fn single(value: f64) -> Self {
        Range::new(value, value, 1)
    }

    pub fn points(&self) -> Vec<f64> {
        linspace(self.min, self.max, self.steps)
    }
}

impl FromStr for Range {
    type Err = Error;
    /// `value` or `min:max:steps`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidDescriptor(format!("bad range {s:?}, expected VALUE or MIN:MAX:STEPS"));
        let num = |x: &str| x.trim().parse::<f64>().ok().filter(|x| x.is_finite());
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [v] => Ok(Range::single(num(v).ok_or_else(bad)?)),
            [lo, hi, n] => {
                let steps: usize = n.trim().parse().map_err(|_| bad())?;
                let (lo, hi) = (num(lo).ok_or_else(bad)?, num(hi).ok_or_else(bad)?);
                if steps < 2 || hi < lo {
                    return Err(bad());
                }
                Ok(Range::new(lo, hi, steps))
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSpec {
    pub family: Family,
    pub ranges: Vec<(&'static str, Range)>,
    pub seed: u64,
    /// Number of random states (random families only).
    pub samples: usize,
    /// Emit rows for points outside the family's physical domain.
    pub include_unphysical: bool,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl ScanSpec {
    pub fn new(family: Family) -> Self {
        ScanSpec {
            family,
            ranges: family.default_ranges(),
            seed: 0,
            samples: family.default_samples(),
            include_unphysical: false,
            workers: None,
        }
    }

    /// Overrides the range of a grid parameter.
    pub fn set_range(&mut self, key: &str, range: Range) -> Result<()> {
        match self.ranges.iter_mut().find(|(k, _)| *k == key) {
            Some((_, r)) => {
                *r = range;
                Ok(())
            }
            None => Err(Error::InvalidDescriptor(format!(
                "family {} has no parameter {key:?}",
                self.family
            ))),
        }
    }

    /// Names of the leading parameter columns.
    pub fn param_names(&self) -> Vec<&'static str> {
        let mut names: Vec<&'static str> = Vec::new();
        if self.family.is_random() {
            names.push("index");
        }
        names.extend(self.ranges.iter().map(|(k, _)| *k));
        if self.family.is_random() {
            names.extend(["r1", "r2", "phi", "t"]);
        }
        names
    }
}

/// One evaluated scan point. Metric columns are `None` where undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub params: Vec<f64>,
    pub forward_f: Option<f64>,
    pub reverse_f: Option<f64>,
    pub total_f: Option<f64>,
    pub log_negativity: Option<f64>,
    pub nu_minus: Option<f64>,
    pub nu_minus_pt: Option<f64>,
    pub physical: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanTable {
    pub param_names: Vec<&'static str>,
    pub rows: Vec<ScanRow>,
}

pub const METRIC_COLUMNS: [&str; 7] = [
    "forward_f",
    "reverse_f",
    "total_f",
    "log_negativity",
    "nu_minus",
    "nu_minus_pt",
    "physical",
];

/// Builds a family member as `(Some(state), None)`. Points outside the
/// family's physical domain give `(None, raw)`, where `raw` is the matrix
/// the family's formulas produce without validation.
fn build(family: Family, p: &BTreeMap<&str, f64>) -> Result<(Option<SpaceTimeCM>, Option<SpaceTimeCM>)> {
    let get = |k: &str| p[k];
    Ok(match family {
        Family::Example1 | Family::TmsvCurve => {
            let (v, r) = (get("v"), get("r"));
            if v >= 1.0 && r >= 0.0 {
                (Some(two_mode_squeezed_thermal(v, r)?), None)
            } else {
                let local = Sym2::identity().scale(v * (2.0 * r).cosh());
                (None, Some(SpaceTimeCM::from_blocks_unchecked(local, local, Z.scale(v * (2.0 * r).sinh()))))
            }
        }
        Family::Example2 => {
            let (u, v) = (get("u"), get("v"));
            if u > 0.0 && v > 0.0 && u * v >= 1.0 {
                (Some(beam_splitter_mix(&Sym2::diag(u, v), &Sym2::diag(v, u), 0.5)?), None)
            } else {
                let local = Sym2::identity().scale(0.5 * (u + v));
                let c = Mat2::diag(-0.5 * (u - v), 0.5 * (u - v));
                (None, Some(SpaceTimeCM::from_blocks_unchecked(local, local, c)))
            }
        }
        Family::Example3 => {
            let (eta, v1, v2) = (get("eta"), get("v1"), get("v2"));
            if !(0.0..=1.0).contains(&eta) {
                return Err(Error::BadTransmissivity(eta));
            }
            let va = Sym2::diag(v1, v2);
            let ch = crate::channels::GaussianChannel::loss(eta)?;
            if v1 > 0.0 && v2 > 0.0 && v1 * v2 >= 1.0 {
                (Some(crate::channels::temporal_mechanism(&va, &ch)?), None)
            } else {
                let raw = SpaceTimeCM::from_blocks_unchecked(va, ch.apply(&va), va.to_mat2() * ch.t.transpose());
                (None, Some(raw))
            }
        }
        Family::RandomPure | Family::RandomMixed => unreachable!("random families are drawn, not built"),
    })
}

/// A single member of `family` at the given parameters (missing ones take
/// [`Family::point_defaults`]). Random families draw from `seed`.
pub fn family_state(family: Family, overrides: &[(String, f64)], seed: u64) -> Result<SpaceTimeCM> {
    let mut params: BTreeMap<&str, f64> = family.point_defaults().into_iter().collect();
    for (k, v) in overrides {
        match params.get_mut(k.as_str()) {
            Some(slot) => *slot = *v,
            None => {
                return Err(Error::InvalidDescriptor(format!("family {family} has no parameter {k:?}")));
            }
        }
    }
    match family {
        Family::RandomPure => RandomInterference::draw(seed).state(1.0),
        Family::RandomMixed => RandomInterference::draw(seed).state(params["v"]),
        _ => match build(family, &params)? {
            (Some(s), _) => Ok(s),
            _ => Err(Error::InvalidDescriptor(format!(
                "parameters lie outside the physical domain of {family}"
            ))),
        },
    }
}

fn evaluate(state: &SpaceTimeCM, params: Vec<f64>) -> ScanRow {
    let report = classify(state).ok();
    let physical = report.is_some_and(|r| r.spatially_physical);
    ScanRow {
        params,
        forward_f: report.map(|r| r.forward_f),
        reverse_f: report.map(|r| r.reverse_f),
        total_f: report.map(|r| r.total_f),
        log_negativity: physical.then(|| log_negativity(state).ok()).flatten(),
        nu_minus: symplectic_min(&state.to_mat4()).ok().map(|s| s.nu_minus),
        nu_minus_pt: physical.then(|| pt_nu_minus(state).ok()).flatten(),
        physical,
    }
}

fn evaluate_unphysical(raw: Option<SpaceTimeCM>, params: Vec<f64>) -> ScanRow {
    let report = raw.and_then(|s| classify(&s).ok());
    ScanRow {
        params,
        forward_f: report.map(|r| r.forward_f),
        reverse_f: report.map(|r| r.reverse_f),
        total_f: report.map(|r| r.total_f),
        log_negativity: None,
        nu_minus: raw.and_then(|s| symplectic_min(&s.to_mat4()).ok()).map(|s| s.nu_minus),
        nu_minus_pt: None,
        physical: false,
    }
}

fn grid(ranges: &[(&'static str, Range)]) -> Vec<Vec<f64>> {
    ranges.iter().fold(vec![Vec::new()], |acc, (_, r)| {
        let pts = r.points();
        acc.into_iter()
            .flat_map(|prefix| {
                pts.iter().map(move |&x| {
                    let mut p = prefix.clone();
                    p.push(x);
                    p
                })
            })
            .collect()
    })
}

fn scan_point(spec: &ScanSpec, index: usize, point: &[f64]) -> Result<Option<ScanRow>> {
    if spec.family.is_random() {
        let draw = RandomInterference::draw(derive_seed(spec.seed, index as u64));
        let v = point.first().copied().unwrap_or(1.0);
        let state = draw.state(v)?;
        let mut params = vec![index as f64];
        params.extend_from_slice(point);
        params.extend([draw.r1, draw.r2, draw.phi, draw.t]);
        return Ok(Some(evaluate(&state, params)));
    }
    let named: BTreeMap<&str, f64> = spec.ranges.iter().map(|(k, _)| *k).zip(point.iter().copied()).collect();
    Ok(match build(spec.family, &named)? {
        (Some(state), _) => Some(evaluate(&state, point.to_vec())),
        (None, raw) if spec.include_unphysical => Some(evaluate_unphysical(raw, point.to_vec())),
        (None, _) => None,
    })
}

/// Evaluates every point of the scan. Rows come out in grid order (last
/// parameter fastest) or sample-index order, independent of the number of
/// workers.
pub fn run_scan(spec: &ScanSpec) -> Result<ScanTable> {
    let points: Vec<Vec<f64>> = if spec.family.is_random() {
        let base = grid(&spec.ranges).pop().unwrap_or_default();
        vec![base; spec.samples]
    } else {
        grid(&spec.ranges)
    };
    let work = || -> Result<Vec<ScanRow>> {
        let rows: Vec<Option<ScanRow>> = points
            .par_iter()
            .enumerate()
            .map(|(i, p)| scan_point(spec, i, p))
            .collect::<Result<_>>()?;
        Ok(rows.into_iter().flatten().collect())
    };
    let rows = match spec.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(std::io::Error::other)?
            .install(work)?,
        None => work()?,
    };
    Ok(ScanTable {
        param_names: spec.param_names(),
        rows,
    })
}

/// `printf("%.12g")`.
pub fn fmt_g12(x: f64) -> String {
    const P: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if exp < -4 || exp >= P {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    } else {
        trim(&format!("{:.*}", (P - 1 - exp) as usize, x))
    }
}

impl ScanTable {
    pub fn header(&self) -> Vec<&str> {
        self.param_names.iter().copied().chain(METRIC_COLUMNS).collect()
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "{}", self.header().join(","))?;
        let cell = |x: Option<f64>| x.map(fmt_g12).unwrap_or_default();
        for row in &self.rows {
            let mut fields: Vec<String> = row.params.iter().map(|&x| fmt_g12(x)).collect();
            fields.extend(
                [
                    row.forward_f,
                    row.reverse_f,
                    row.total_f,
                    row.log_negativity,
                    row.nu_minus,
                    row.nu_minus_pt,
                ]
                .map(cell),
            );
            fields.push(row.physical.to_string());
            writeln!(out, "{}", fields.join(","))?;
        }
        Ok(())
    }
}

/// Rows where total atemporality is present but the PPT test sees no
/// entanglement. Always empty on the shipped scans.
pub fn atemporal_but_separable(table: &ScanTable) -> Vec<&ScanRow> {
    table
        .rows
        .iter()
        .filter(|r| r.physical && r.total_f.is_some_and(|f| f > 1e-9))
        .filter(|r| r.nu_minus_pt.is_some_and(|nu| nu >= 1.0 - 1e-9))
        .collect()
}
