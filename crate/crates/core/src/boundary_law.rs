//! Boundary laws: positive solutions z_x of z_x = ∏_{y∈S(x)} (θ z_y + η).
//!
//! The module covers the residual of the functional equation, the complete
//! classification of constant solutions (z = (θz + η)^k), and the two
//! explicit families that exist at J = +∞ (η = 0).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ZipperError};
use crate::model::TransferParams;
use crate::numeric::{bisect_threshold, safeguarded_newton};
use crate::tree::{self, VertexId};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const MAX_ITER: usize = 200;
/// |η − η_c| ≤ CRITICAL_BAND · max(1, η_c) is reported as critical.
pub const CRITICAL_BAND: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum LawRepr {
    Constant { z: f64 },
    /// `levels[d - 1]` is the value on every vertex at depth `d`.
    LevelDependent {
        levels: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tail: Option<f64>,
    },
    Explicit { horizon: usize, values: BTreeMap<VertexId, f64> },
}

/// A positive field on the non-root vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LawRepr", into = "LawRepr")]
pub struct BoundaryLaw {
    repr: LawRepr,
}

impl TryFrom<LawRepr> for BoundaryLaw {
    type Error = ZipperError;

    fn try_from(repr: LawRepr) -> Result<Self> {
        match repr {
            LawRepr::Constant { z } => Self::constant(z),
            LawRepr::LevelDependent { levels, tail } => Self::level_dependent(levels, tail),
            LawRepr::Explicit { horizon, values } => Self::explicit(horizon, values),
        }
    }
}

impl From<BoundaryLaw> for LawRepr {
    fn from(law: BoundaryLaw) -> Self {
        law.repr
    }
}

fn check_positive(z: f64) -> Result<()> {
    if z > 0.0 && z.is_finite() {
        Ok(())
    } else {
        Err(ZipperError::Domain(format!("boundary law values must be positive and finite, got {z}")))
    }
}

impl BoundaryLaw {
    pub fn constant(z: f64) -> Result<Self> {
        check_positive(z)?;
        Ok(Self { repr: LawRepr::Constant { z } })
    }

    pub fn level_dependent(levels: Vec<f64>, tail: Option<f64>) -> Result<Self> {
        levels.iter().try_for_each(|&z| check_positive(z))?;
        if let Some(t) = tail {
            check_positive(t)?;
        }
        Ok(Self { repr: LawRepr::LevelDependent { levels, tail } })
    }

    pub fn explicit(horizon: usize, values: BTreeMap<VertexId, f64>) -> Result<Self> {
        for (x, &z) in &values {
            check_positive(z)?;
            if x.is_root() || x.depth() > horizon {
                return Err(ZipperError::Domain(format!("explicit law value at {x} outside depths 1..={horizon}")));
            }
        }
        Ok(Self { repr: LawRepr::Explicit { horizon, values } })
    }

    pub fn repr(&self) -> &LawRepr {
        &self.repr
    }

    /// Deepest level with materialized values; `None` when unbounded.
    pub fn horizon(&self) -> Option<usize> {
        match &self.repr {
            LawRepr::Constant { .. } => None,
            LawRepr::LevelDependent { tail: Some(_), .. } => None,
            LawRepr::LevelDependent { levels, tail: None } => Some(levels.len()),
            LawRepr::Explicit { horizon, .. } => Some(*horizon),
        }
    }

    pub fn is_depth_uniform(&self) -> bool {
        !matches!(self.repr, LawRepr::Explicit { .. })
    }

    /// Value shared by every vertex at `depth ≥ 1` (depth-uniform laws only).
    pub fn level_value(&self, depth: usize) -> Result<f64> {
        if depth == 0 {
            return Err(ZipperError::Domain("boundary laws live on non-root vertices".into()));
        }
        match &self.repr {
            LawRepr::Constant { z } => Ok(*z),
            LawRepr::LevelDependent { levels, tail } => match levels.get(depth - 1) {
                Some(&z) => Ok(z),
                None => tail.ok_or_else(|| ZipperError::HorizonExceeded {
                    vertex: VertexId::from_path(vec![0; depth]),
                    horizon: levels.len(),
                }),
            },
            LawRepr::Explicit { .. } => Err(ZipperError::Domain("explicit laws are not depth-uniform".into())),
        }
    }

    pub fn value_at(&self, x: &VertexId) -> Result<f64> {
        if x.is_root() {
            return Err(ZipperError::Domain("boundary laws live on non-root vertices".into()));
        }
        match &self.repr {
            LawRepr::Explicit { horizon, values } => values
                .get(x)
                .copied()
                .ok_or_else(|| ZipperError::HorizonExceeded { vertex: x.clone(), horizon: *horizon }),
            _ => self.level_value(x.depth()).map_err(|e| match e {
                ZipperError::HorizonExceeded { horizon, .. } => {
                    ZipperError::HorizonExceeded { vertex: x.clone(), horizon }
                }
                other => other,
            }),
        }
    }

    /// Multiplies every value at `depth` by `factor`, materialising a
    /// level-dependent law up to that depth when needed.
    pub fn scale_generation(&self, k: usize, depth: usize, factor: f64) -> Result<Self> {
        if depth == 0 {
            return Err(ZipperError::Domain("cannot scale the root generation".into()));
        }
        match &self.repr {
            LawRepr::Explicit { horizon, values } => {
                let mut values = values.clone();
                for x in tree::generation(k, depth) {
                    if let Some(z) = values.get_mut(&x) {
                        *z *= factor;
                    }
                }
                Self::explicit(*horizon, values)
            }
            _ => {
                let mut levels = (1..=depth).map(|d| self.level_value(d)).collect::<Result<Vec<_>>>()?;
                let tail = match &self.repr {
                    LawRepr::Constant { z } => Some(*z),
                    LawRepr::LevelDependent { levels: old, tail } => {
                        levels.extend(old.iter().skip(depth));
                        *tail
                    }
                    LawRepr::Explicit { .. } => unreachable!(),
                };
                levels[depth - 1] *= factor;
                Self::level_dependent(levels, tail)
            }
        }
    }
}

/// |z_x − ∏_{y∈S(x)} (θ z_y + η)|.
pub fn residual(law: &BoundaryLaw, x: &VertexId, w: &TransferParams) -> Result<f64> {
    let zx = law.value_at(x)?;
    let mut product = 1.0;
    for y in x.children(w.k)? {
        product *= w.theta * law.value_at(&y)? + w.eta;
    }
    Ok((zx - product).abs())
}

/// Largest residual over all vertices at depths `1..=max_depth`.
pub fn max_residual(law: &BoundaryLaw, w: &TransferParams, max_depth: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    if law.is_depth_uniform() {
        for d in 1..=max_depth {
            let x = VertexId::from_path(vec![0; d]);
            worst = worst.max(residual(law, &x, w)?);
        }
    } else {
        for d in 1..=max_depth {
            for x in tree::generation(w.k, d) {
                worst = worst.max(residual(law, &x, w)?);
            }
        }
    }
    Ok(worst)
}

/// f_k(z) = (θz + η)^k − z and its derivative.
pub fn constant_equation(k: usize, theta: f64, eta: f64, z: f64) -> (f64, f64) {
    let base = theta * z + eta;
    let f = base.powi(k as i32) - z;
    let df = k as f64 * theta * base.powi(k as i32 - 1) - 1.0;
    (f, df)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    AboveCritical,
    Critical,
    BelowCritical,
}

/// Positive constant solutions at one parameter point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionSet {
    pub count: usize,
    /// Ascending.
    pub roots: Vec<f64>,
    pub eta: f64,
    /// `None` for k = 1, where no critical η exists.
    pub eta_c: Option<f64>,
    pub regime: Regime,
}

/// η_c(k, θ) = (k − 1) / (k · (kθ)^{1/(k−1)}), for k ≥ 2.
pub fn eta_critical(k: usize, theta: f64) -> Result<f64> {
    if k < 2 {
        return Err(ZipperError::Domain("the critical eta is defined for k ≥ 2".into()));
    }
    if !(theta > 0.0) {
        return Err(ZipperError::Domain("theta must be positive".into()));
    }
    let km1 = (k - 1) as f64;
    Ok(km1 / (k as f64 * (k as f64 * theta).powf(1.0 / km1)))
}

/// Minimiser of f_k(·; θ, η) on z ≥ 0 from the stationarity condition
/// kθ(θz + η)^{k−1} = 1; clamps to 0 when the stationary point is negative.
fn analytic_minimizer(k: usize, theta: f64, eta: f64) -> f64 {
    let km1 = (k - 1) as f64;
    ((k as f64 * theta).powf(-1.0 / km1) - eta).max(0.0) / theta
}

fn grow_until_positive(k: usize, theta: f64, eta: f64, from: f64) -> Result<f64> {
    let mut b = from.max(1.0);
    for _ in 0..MAX_ITER {
        if constant_equation(k, theta, eta, b).0 > 0.0 {
            return Ok(b);
        }
        b *= 2.0;
    }
    Err(ZipperError::Numeric("could not bracket the upper root".into()))
}

fn root_in(k: usize, theta: f64, eta: f64, lo: f64, hi: f64) -> Result<f64> {
    safeguarded_newton(|z| constant_equation(k, theta, eta, z), lo, hi, MAX_ITER)
}

fn check_roots(k: usize, theta: f64, eta: f64, roots: &[f64], tol: f64) -> Result<()> {
    for &z in roots {
        let (f, _) = constant_equation(k, theta, eta, z);
        if f.abs() > tol * z.max(1.0) {
            return Err(ZipperError::Numeric(format!("root {z} has residual {f:e} above tolerance {tol:e}")));
        }
    }
    Ok(())
}

/// Classifies and solves z = (θz + η)^k over z > 0.
///
/// For k ≥ 2 and η > 0, f_k is decreasing up to its stationary point and
/// increasing after it, so each side holds at most one root. Residuals are
/// checked against `tol · max(1, z)`.
pub fn solve_constant(w: &TransferParams, tol: f64) -> Result<SolutionSet> {
    let (k, theta, eta) = (w.k, w.theta, w.eta);
    if !(tol > 0.0) {
        return Err(ZipperError::Domain("tolerance must be positive".into()));
    }
    if k == 1 {
        // linear fixed point z = θz + η
        if eta == 0.0 {
            if theta == 1.0 {
                return Err(ZipperError::Domain("k = 1, η = 0, θ = 1: every positive constant is a solution".into()));
            }
            return Ok(SolutionSet { count: 0, roots: vec![], eta, eta_c: None, regime: Regime::AboveCritical });
        }
        if theta < 1.0 {
            let z = eta / (1.0 - theta);
            return Ok(SolutionSet { count: 1, roots: vec![z], eta, eta_c: None, regime: Regime::BelowCritical });
        }
        return Ok(SolutionSet { count: 0, roots: vec![], eta, eta_c: None, regime: Regime::AboveCritical });
    }

    let eta_c = eta_critical(k, theta)?;
    if eta == 0.0 {
        let z = j_infinite_fixed_point(k, theta)?;
        return Ok(SolutionSet { count: 1, roots: vec![z], eta, eta_c: Some(eta_c), regime: Regime::BelowCritical });
    }

    let regime = classify(eta, eta_c);
    let z_star = analytic_minimizer(k, theta, eta);
    let roots = match regime {
        Regime::AboveCritical => vec![],
        Regime::Critical => vec![z_star],
        Regime::BelowCritical => {
            let small = root_in(k, theta, eta, 0.0, z_star)?;
            let upper = grow_until_positive(k, theta, eta, 2.0 * z_star)?;
            let large = root_in(k, theta, eta, z_star, upper)?;
            vec![small, large]
        }
    };
    if regime != Regime::Critical {
        check_roots(k, theta, eta, &roots, tol)?;
    }
    Ok(SolutionSet { count: roots.len(), roots, eta, eta_c: Some(eta_c), regime })
}

fn classify(eta: f64, eta_c: f64) -> Regime {
    if (eta - eta_c).abs() <= CRITICAL_BAND * eta_c.max(1.0) {
        Regime::Critical
    } else if eta > eta_c {
        Regime::AboveCritical
    } else {
        Regime::BelowCritical
    }
}

/// Number of positive constant solutions for k ≥ 2, η > 0: 0, 1 or 2.
pub fn count_solutions(k: usize, theta: f64, eta: f64) -> Result<usize> {
    if k < 2 || !(eta > 0.0) {
        return Err(ZipperError::Domain("count_solutions needs k ≥ 2 and η > 0".into()));
    }
    Ok(match classify(eta, eta_critical(k, theta)?) {
        Regime::AboveCritical => 0,
        Regime::Critical => 1,
        Regime::BelowCritical => 2,
    })
}

/// Minimum of f_k over z ≥ 0, located from f_k' alone: `(argmin, min)`.
pub fn constant_equation_minimum(k: usize, theta: f64, eta: f64) -> Result<(f64, f64)> {
    let slope = |z: f64| constant_equation(k, theta, eta, z).1;
    if k == 1 || slope(0.0) >= 0.0 {
        return Ok((0.0, constant_equation(k, theta, eta, 0.0).0));
    }
    let mut hi = 1.0;
    let mut grown = 0;
    while slope(hi) <= 0.0 {
        hi *= 2.0;
        grown += 1;
        if grown > MAX_ITER {
            return Err(ZipperError::Numeric("slope of f_k never turns positive".into()));
        }
    }
    let z = bisect_threshold(|z| slope(z) <= 0.0, 0.0, hi, 2 * MAX_ITER);
    Ok((z, constant_equation(k, theta, eta, z).0))
}

/// η_c located as the largest η with min_z f_k(z; θ, η) ≤ 0.
///
/// Uses no closed form: min f_k is increasing in η because ∂f_k/∂η > 0.
pub fn eta_critical_numeric(k: usize, theta: f64) -> Result<f64> {
    if k < 2 {
        return Err(ZipperError::Domain("the critical eta is defined for k ≥ 2".into()));
    }
    let min_f = |eta: f64| constant_equation_minimum(k, theta, eta).map(|(_, f)| f);
    let mut hi = 1.0;
    while min_f(hi)? <= 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(ZipperError::Numeric("no upper bracket for eta_c".into()));
        }
    }
    Ok(bisect_threshold(|eta| min_f(eta).map(|f| f <= 0.0).unwrap_or(false), 0.0, hi, 4 * MAX_ITER))
}

/// All positive roots found by bracketing around the numerically located
/// minimum, with no critical band: a tangential double root shows up as two
/// nearly coincident roots.
pub fn bracket_roots(k: usize, theta: f64, eta: f64) -> Result<Vec<f64>> {
    let (z_min, f_min) = constant_equation_minimum(k, theta, eta)?;
    if f_min > 0.0 {
        return Ok(vec![]);
    }
    if f_min == 0.0 {
        return Ok(vec![z_min]);
    }
    let upper = grow_until_positive(k, theta, eta, 2.0 * z_min)?;
    let large = root_in(k, theta, eta, z_min, upper)?;
    if z_min == 0.0 {
        return Ok(vec![large]);
    }
    let small = root_in(k, theta, eta, 0.0, z_min)?;
    Ok(vec![small, large])
}

/// Both roots for k = 2 from the quadratic formula, `(z_-, z_+)`, when 4θη < 1.
pub fn k2_explicit_roots(theta: f64, eta: f64) -> Option<(f64, f64)> {
    let disc = 1.0 - 4.0 * theta * eta;
    if disc < 0.0 {
        return None;
    }
    let s = disc.sqrt();
    let denom = 2.0 * theta * theta;
    Some(((1.0 - 2.0 * theta * eta - s) / denom, (1.0 - 2.0 * theta * eta + s) / denom))
}

/// Constant solution z* = θ^{−k/(k−1)} of z = θ^k z^k (η = 0, k ≥ 2).
pub fn j_infinite_fixed_point(k: usize, theta: f64) -> Result<f64> {
    if k < 2 {
        return Err(ZipperError::Domain("the η = 0 constant solution needs k ≥ 2".into()));
    }
    Ok(theta.powf(-(k as f64) / (k - 1) as f64))
}

/// Exponents α_1, ..., α_{n_max} of the level-dependent η = 0 family.
///
/// The exponent at depth n is (1/k^n)(seed − k(k^n − 1)/(k − 1)); the seed
/// acts as the exponent one level above depth 1, so α_1 = seed/k − 1 and
/// α_{n+1} = α_n/k − 1 at every depth. Values are produced by that recursion.
pub fn level_exponents(k: usize, seed: f64, n_max: usize) -> Vec<f64> {
    let kf = k as f64;
    let mut out = Vec::with_capacity(n_max);
    let mut alpha = seed;
    for _ in 0..n_max {
        alpha = alpha / kf - 1.0;
        out.push(alpha);
    }
    out
}

/// Closed form of the exponent at depth `n` (see [`level_exponents`]).
pub fn level_exponent_closed_form(k: usize, seed: f64, n: usize) -> f64 {
    let kf = k as f64;
    let kn = kf.powi(n as i32);
    (seed - kf * (kn - 1.0) / (kf - 1.0)) / kn
}

/// z at depth n equal to θ^{α_n} (η = 0, k ≥ 2, θ ≠ 1), tail z* = θ^{−k/(k−1)}.
pub fn j_infinite_level_family(w: &TransferParams, seed: f64, n_max: usize) -> Result<BoundaryLaw> {
    if w.eta != 0.0 {
        return Err(ZipperError::Domain("the level family needs J = +∞ (η = 0)".into()));
    }
    if w.k < 2 {
        return Err(ZipperError::Domain("the level family needs k ≥ 2".into()));
    }
    if w.theta == 1.0 {
        return Err(ZipperError::Domain("θ = 1: all level-family members coincide".into()));
    }
    let levels = level_exponents(w.k, seed, n_max).into_iter().map(|a| w.theta.powf(a)).collect();
    BoundaryLaw::level_dependent(levels, Some(j_infinite_fixed_point(w.k, w.theta)?))
}

/// The general k = 1, η = 0 solution z_n = θ^{−(n−1)} z_1, materialised to depth `n`.
pub fn j_infinite_1d_family(theta: f64, z1: f64, n: usize) -> Result<BoundaryLaw> {
    if !(theta > 0.0) {
        return Err(ZipperError::Domain("theta must be positive".into()));
    }
    check_positive(z1)?;
    let levels = (1..=n).map(|d| z1 * theta.powi(-(d as i32 - 1))).collect();
    BoundaryLaw::level_dependent(levels, None)
}
