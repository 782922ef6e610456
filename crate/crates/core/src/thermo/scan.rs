use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{b_of, critical_temperature};
use crate::boundary_law::{self, Regime, DEFAULT_TOL};
use crate::error::{Result, ZipperError};
use crate::model::{Coupling, ModelParams, TransferParams};

pub const CSV_COLUMNS: [&str; 11] =
    ["T", "beta", "theta", "eta", "eta_c", "n_tigm", "z_minus", "z_plus", "f_minus", "f_plus", "t_cr_flag"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TcrFlag {
    Below,
    At,
    Above,
    None,
}

impl TcrFlag {
    fn as_str(self) -> &'static str {
        match self {
            TcrFlag::Below => "below",
            TcrFlag::At => "at",
            TcrFlag::Above => "above",
            TcrFlag::None => "none",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "below" => TcrFlag::Below,
            "at" => TcrFlag::At,
            "above" => TcrFlag::Above,
            "none" => TcrFlag::None,
            other => return Err(ZipperError::Parse(format!("unknown t_cr_flag {other:?}"))),
        })
    }
}

/// One scan row. Temperature columns are `None` in fixed-θ scans.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    #[serde(rename = "T")]
    pub t: Option<f64>,
    pub beta: Option<f64>,
    pub theta: f64,
    pub eta: f64,
    pub eta_c: Option<f64>,
    pub n_tigm: usize,
    /// Smaller root; equal to `z_plus` at a double root.
    pub z_minus: Option<f64>,
    pub z_plus: Option<f64>,
    pub f_minus: Option<f64>,
    pub f_plus: Option<f64>,
    pub t_cr_flag: TcrFlag,
}

impl PhasePoint {
    pub fn is_double(&self) -> bool {
        self.n_tigm == 1 && self.z_minus.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "axis")]
pub enum ScanAxis {
    /// Temperatures lo..=hi at fixed (k, q, ε, J).
    Temperature { q: u32, epsilon: f64, j: f64, lo: f64, hi: f64 },
    /// η over lo..=hi at fixed θ.
    Eta { theta: f64, lo: f64, hi: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub k: usize,
    pub axis: ScanAxis,
    pub points: usize,
}

impl ScanSpec {
    fn grid(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        if self.points == 0 || !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(ZipperError::Domain("empty scan range".into()));
        }
        if self.points == 1 {
            return Ok(vec![lo]);
        }
        let step = (hi - lo) / (self.points - 1) as f64;
        Ok((0..self.points).map(|i| if i + 1 == self.points { hi } else { lo + step * i as f64 }).collect())
    }
}

fn point(k: usize, q: u32, theta: f64, eta: f64, t: Option<f64>, t_cr: Option<f64>) -> Result<PhasePoint> {
    let w = TransferParams::new(k, q, theta, eta)?;
    let s = boundary_law::solve_constant(&w, DEFAULT_TOL)?;
    let (z_minus, z_plus) = match s.roots.as_slice() {
        [] => (None, None),
        [z] if s.regime == Regime::Critical => (Some(*z), Some(*z)),
        [z] => (None, Some(*z)),
        [a, b, ..] => (Some(*a), Some(*b)),
    };
    let t_cr_flag = match (t, t_cr) {
        (Some(t), Some(c)) if (t - c).abs() <= 1e-12 * c.max(1.0) => TcrFlag::At,
        (Some(t), Some(c)) if t < c => TcrFlag::Below,
        (Some(_), Some(_)) => TcrFlag::Above,
        _ => TcrFlag::None,
    };
    Ok(PhasePoint {
        t,
        beta: t.map(|t| 1.0 / t),
        theta,
        eta,
        eta_c: s.eta_c,
        n_tigm: s.count,
        z_minus,
        z_plus,
        f_minus: z_minus.map(|z| b_of(z, theta, eta)),
        f_plus: z_plus.map(|z| b_of(z, theta, eta)),
        t_cr_flag,
    })
}

fn thread_cap() -> Option<usize> {
    std::env::var("ZIPPER_THREADS").ok()?.parse().ok().filter(|&n| n > 0)
}

/// Evaluates every grid point, in parallel, in grid order.
pub fn phase_scan(spec: &ScanSpec) -> Result<Vec<PhasePoint>> {
    let k = spec.k;
    let run = || -> Result<Vec<PhasePoint>> {
        match spec.axis {
            ScanAxis::Temperature { q, epsilon, j, lo, hi } => {
                if !(lo > 0.0) {
                    return Err(ZipperError::Domain("temperatures must be positive".into()));
                }
                let t_cr = critical_temperature(k, q, epsilon, Coupling::Finite(j))?.value;
                spec.grid(lo, hi)?
                    .into_par_iter()
                    .map(|t| {
                        let p = ModelParams::from_temperature(k, q, epsilon, Coupling::Finite(j), t)?;
                        point(k, q, p.theta(), p.eta(), Some(t), t_cr)
                    })
                    .collect()
            }
            ScanAxis::Eta { theta, lo, hi } => {
                if !(lo > 0.0) {
                    return Err(ZipperError::Domain("eta must be positive".into()));
                }
                spec.grid(lo, hi)?.into_par_iter().map(|eta| point(k, 1, theta, eta, None, None)).collect()
            }
        }
    };
    match thread_cap() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| ZipperError::Numeric(e.to_string()))?
            .install(run),
        None => run(),
    }
}

/// k = 2, q = 8, ε = 2 ln 2, J = ln 2 over T ∈ [1, 3], 201 points.
pub fn fig4_scan() -> ScanSpec {
    let ln2 = std::f64::consts::LN_2;
    ScanSpec { k: 2, axis: ScanAxis::Temperature { q: 8, epsilon: 2.0 * ln2, j: ln2, lo: 1.0, hi: 3.0 }, points: 201 }
}

/// k = 4, θ = 2 across η_c = 3/8.
pub fn fig3_scan() -> ScanSpec {
    ScanSpec { k: 4, axis: ScanAxis::Eta { theta: 2.0, lo: 0.05, hi: 0.75 }, points: 201 }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchOrdering {
    /// f(z_−) ≥ f(z_+) wherever both exist.
    MinusAbove,
    PlusAbove,
    Mixed,
    /// No point with two roots.
    Empty,
}

/// Free-energy branches against temperature (or η for fixed-θ scans).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FreeEnergyCurve {
    pub grid: Vec<f64>,
    pub f_minus: Vec<Option<f64>>,
    pub f_plus: Vec<Option<f64>>,
    /// "z_+/z_-", "double" or "none" per grid point.
    pub labels: Vec<&'static str>,
}

impl FreeEnergyCurve {
    pub fn from_scan(points: &[PhasePoint]) -> Self {
        Self {
            grid: points.iter().map(|p| p.t.unwrap_or(p.eta)).collect(),
            f_minus: points.iter().map(|p| p.f_minus).collect(),
            f_plus: points.iter().map(|p| p.f_plus).collect(),
            labels: points
                .iter()
                .map(|p| match (p.is_double(), p.n_tigm) {
                    (true, _) => "double",
                    (false, 0) => "none",
                    _ => "z_+/z_-",
                })
                .collect(),
        }
    }

    pub fn ordering(&self) -> BranchOrdering {
        let mut minus_above = false;
        let mut plus_above = false;
        for (m, p) in self.f_minus.iter().zip(&self.f_plus) {
            if let (Some(m), Some(p)) = (m, p) {
                if m > p {
                    minus_above = true;
                } else if p > m {
                    plus_above = true;
                }
            }
        }
        match (minus_above, plus_above) {
            (true, false) => BranchOrdering::MinusAbove,
            (false, true) => BranchOrdering::PlusAbove,
            (true, true) => BranchOrdering::Mixed,
            (false, false) => BranchOrdering::Empty,
        }
    }
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_string(), |x| format!("{x:e}"))
}

/// CSV text with '#' comment lines before the column header.
pub fn to_csv(points: &[PhasePoint], comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    out.push_str(&CSV_COLUMNS.join(","));
    out.push('\n');
    for p in points {
        let row = [
            cell(p.t),
            cell(p.beta),
            cell(Some(p.theta)),
            cell(Some(p.eta)),
            cell(p.eta_c),
            p.n_tigm.to_string(),
            cell(p.z_minus),
            cell(p.z_plus),
            cell(p.f_minus),
            cell(p.f_plus),
            p.t_cr_flag.as_str().to_string(),
        ];
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn parse_cell(s: &str) -> Result<Option<f64>> {
    if s == "nan" {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| ZipperError::Parse(format!("bad number {s:?}")))
}

fn required(s: &str) -> Result<f64> {
    parse_cell(s)?.ok_or_else(|| ZipperError::Parse("missing required value".into()))
}

/// Parses text produced by [`to_csv`].
pub fn read_csv(text: &str) -> Result<Vec<PhasePoint>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| ZipperError::Parse("missing header".into()))?;
    if header.split(',').ne(CSV_COLUMNS) {
        return Err(ZipperError::Parse(format!("unexpected header {header:?}")));
    }
    lines
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != CSV_COLUMNS.len() {
                return Err(ZipperError::Parse(format!("expected {} fields in {line:?}", CSV_COLUMNS.len())));
            }
            Ok(PhasePoint {
                t: parse_cell(f[0])?,
                beta: parse_cell(f[1])?,
                theta: required(f[2])?,
                eta: required(f[3])?,
                eta_c: parse_cell(f[4])?,
                n_tigm: f[5].parse().map_err(|_| ZipperError::Parse(format!("bad n_tigm {:?}", f[5])))?,
                z_minus: parse_cell(f[6])?,
                z_plus: parse_cell(f[7])?,
                f_minus: parse_cell(f[8])?,
                f_plus: parse_cell(f[9])?,
                t_cr_flag: TcrFlag::parse(f[10])?,
            })
        })
        .collect()
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.persist(path).map_err(|e| ZipperError::Io(e.error))?;
    Ok(())
}

pub fn write_csv(path: &Path, points: &[PhasePoint], comments: &[String]) -> Result<()> {
    write_atomic(path, to_csv(points, comments).as_bytes())
}

pub fn write_json(path: &Path, points: &[PhasePoint]) -> Result<()> {
    write_atomic(path, serde_json::to_string_pretty(points)?.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig4_rows() {
        let points = phase_scan(&fig4_scan()).unwrap();
        assert_eq!(points.len(), 201);
        let first = &points[0];
        assert_eq!(first.t, Some(1.0));
        assert!(first.is_double());
        assert_eq!(first.t_cr_flag, TcrFlag::At);
        assert!((first.z_plus.unwrap() - 1.0).abs() < 1e-4);
        for p in &points[1..] {
            assert_eq!(p.n_tigm, 2);
            assert_eq!(p.t_cr_flag, TcrFlag::Above);
            assert!(p.z_minus.unwrap() < p.z_plus.unwrap());
        }
        assert_eq!(points[200].t, Some(3.0));
        assert_eq!(FreeEnergyCurve::from_scan(&points).ordering(), BranchOrdering::MinusAbove);
    }

    #[test]
    fn fig3_crosses_three_eighths() {
        let points = phase_scan(&fig3_scan()).unwrap();
        for p in &points {
            let expected = if p.eta < 0.375 - 1e-9 { 2 } else if p.eta > 0.375 + 1e-9 { 0 } else { 1 };
            assert_eq!(p.n_tigm, expected, "eta = {}", p.eta);
        }
    }

    #[test]
    fn csv_round_trip() {
        let points = phase_scan(&ScanSpec { points: 15, ..fig4_scan() }).unwrap();
        let text = to_csv(&points, &["k=2".into()]);
        assert!(text.starts_with("# k=2\nT,beta,"));
        assert_eq!(read_csv(&text).unwrap(), points);
        let json: Vec<PhasePoint> = serde_json::from_str(&serde_json::to_string(&points).unwrap()).unwrap();
        assert_eq!(json, points);
    }

    #[test]
    fn empty_range_is_rejected() {
        let spec = ScanSpec { points: 0, ..fig4_scan() };
        assert!(phase_scan(&spec).is_err());
        let spec = ScanSpec { k: 2, axis: ScanAxis::Eta { theta: 1.0, lo: 2.0, hi: 1.0 }, points: 3 };
        assert!(phase_scan(&spec).is_err());
    }

    #[test]
    fn all_above_critical() {
        let spec = ScanSpec { k: 3, axis: ScanAxis::Eta { theta: 2.0, lo: 1.0, hi: 5.0 }, points: 9 };
        assert!(phase_scan(&spec).unwrap().iter().all(|p| p.n_tigm == 0));
    }
}
