//! Free energies of boundary-law states, the finite-volume reduced free
//! energy, Kittel's 1D chain, critical temperatures and TIGM counts.

pub mod scan;

pub use scan::{
    fig3_scan, fig4_scan, phase_scan, read_csv, write_csv, write_json, BranchOrdering, FreeEnergyCurve, PhasePoint,
    ScanAxis, ScanSpec, TcrFlag,
};

use serde::Serialize;

use crate::boundary_law::{self, BoundaryLaw};
use crate::error::{Result, ZipperError};
use crate::gibbs::{self, BoundaryFields};
use crate::model::{Coupling, ModelParams, TransferParams};
use crate::numeric::bisect_threshold;
use crate::tree::{self, VertexId};

/// b(z) = ½ ln((θz + η) / (θ²z)).
pub fn b_of(z: f64, theta: f64, eta: f64) -> f64 {
    0.5 * ((theta * z + eta) / (theta * theta * z)).ln()
}

/// Free energy b(z) of the state built from the constant law z.
pub fn free_energy_constant(w: &TransferParams, z: f64) -> f64 {
    b_of(z, w.theta, w.eta)
}

/// −¼ ln(θ⁴z), valid for k = 2 roots where θz + η = √z.
pub fn free_energy_k2(theta: f64, z: f64) -> f64 {
    -0.25 * (theta.powi(4) * z).ln()
}

/// (1/|V_n|) ln Z_n for law-induced fields, with its exact offset from the
/// per-vertex sum of b.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiniteVolumeFreeEnergy {
    pub n: usize,
    pub volume: u64,
    pub ln_z: f64,
    /// (1/|V_n|) ln Z_n
    pub reduced: f64,
    /// (1/(|V_n| − 1)) Σ_{x ≠ root} b(x)
    pub b_average: f64,
    /// ln Z_n − Σ_{x ≠ root} b(x), which for a solution is
    /// Σ_{x∈W_1} [ln(θz_x + 1) − ½ ln(θz_x + η)], independent of n.
    pub boundary_correction: f64,
    /// Σ_{x ≠ root} b(x) + boundary_correction − ln Z_n
    pub identity_error: f64,
}

/// Evaluates the reduced free energy at volume n.
///
/// For a solution of the boundary-law equation Z_n = A_{n−1} Z_{n−1} telescopes
/// to Z_1 ∏_{x∈V_n∖V_1} e^{b(x)}; the Z_1 seed contributes the correction
/// instead of ∏_{x∈W_1} e^{b(x)}.
pub fn free_energy_finite_volume(w: &TransferParams, law: &BoundaryLaw, n: usize) -> Result<FiniteVolumeFreeEnergy> {
    let fields = gibbs::fields_from_law(law, w.k, n)?;
    let ln_z = gibbs::ln_partition_function(w, &fields, n)?;
    let volume = tree::volume(w.k, n);
    let b_sum: f64 = if law.is_depth_uniform() {
        (1..=n).map(|d| Ok(tree::generation_size(w.k, d) as f64 * b_of(law.level_value(d)?, w.theta, w.eta))).sum::<Result<f64>>()?
    } else {
        tree::vertices(w.k, n)
            .skip(1)
            .map(|x| Ok(b_of(law.value_at(&x)?, w.theta, w.eta)))
            .sum::<Result<f64>>()?
    };
    let mut correction = 0.0;
    for x in tree::generation(w.k, 1) {
        let z = law.value_at(&x)?;
        correction += (w.theta * z + 1.0).ln() - 0.5 * (w.theta * z + w.eta).ln();
    }
    Ok(FiniteVolumeFreeEnergy {
        n,
        volume,
        ln_z,
        reduced: ln_z / volume as f64,
        b_average: b_sum / (volume - 1) as f64,
        boundary_correction: correction,
        identity_error: b_sum + correction - ln_z,
    })
}

/// Partial free energy of an η = 0 law: average of b over V_n ∖ {root}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LevelFreeEnergy {
    pub partial: f64,
    /// −½ ln θ
    pub limit: f64,
}

pub fn free_energy_level(w: &TransferParams, law: &BoundaryLaw, n: usize) -> Result<LevelFreeEnergy> {
    if w.eta != 0.0 {
        return Err(ZipperError::Domain("free_energy_level needs J = +∞".into()));
    }
    if w.k < 2 || w.theta == 1.0 {
        return Err(ZipperError::Domain("free_energy_level needs k ≥ 2 and θ ≠ 1".into()));
    }
    if n == 0 {
        return Err(ZipperError::Domain("free_energy_level needs n ≥ 1".into()));
    }
    let mut total = 0.0;
    for d in 1..=n {
        total += tree::generation_size(w.k, d) as f64 * b_of(law.level_value(d)?, w.theta, 0.0);
    }
    Ok(LevelFreeEnergy { partial: total / (tree::volume(w.k, n) - 1) as f64, limit: -0.5 * w.theta.ln() })
}

/// a = q e^{−βε}.
pub fn kittel_activity(q: u32, beta: f64, epsilon: f64) -> f64 {
    q as f64 * (-beta * epsilon).exp()
}

/// ln Z_N with Z_N = 1 + a + ... + a^{N−1} = (1 − a^N)/(1 − a).
pub fn ln_kittel_1d_partition(q: u32, beta: f64, epsilon: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(ZipperError::Domain("the chain needs N ≥ 1".into()));
    }
    let la = (q as f64).ln() - beta * epsilon;
    let nf = n as f64;
    Ok(if la == 0.0 {
        nf.ln()
    } else if la < 0.0 {
        (-(nf * la).exp_m1()).ln() - (-la.exp_m1()).ln()
    } else {
        (nf - 1.0) * la + (-(-nf * la).exp_m1()).ln() - (-(-la).exp_m1()).ln()
    })
}

pub fn kittel_1d_partition(q: u32, beta: f64, epsilon: f64, n: usize) -> Result<f64> {
    ln_kittel_1d_partition(q, beta, epsilon, n).map(f64::exp)
}

/// (1/N) ln Z_N.
pub fn kittel_1d_free_energy(q: u32, beta: f64, epsilon: f64, n: usize) -> Result<f64> {
    Ok(ln_kittel_1d_partition(q, beta, epsilon, n)? / n as f64)
}

/// lim (1/N) ln Z_N = max(0, ln a).
pub fn kittel_1d_free_energy_limit(q: u32, beta: f64, epsilon: f64) -> f64 {
    ((q as f64).ln() - beta * epsilon).max(0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalReason {
    Positive,
    NonPositive,
    DenominatorZero,
    /// k ≥ 2 with J = +∞: η ≡ 0 never crosses η_c.
    InfiniteCoupling,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CriticalTemperature {
    pub value: Option<f64>,
    pub reason: CriticalReason,
    /// Whether (k, q, ε, J) lies in A = {T_cr > 0}.
    pub in_set_a: bool,
}

/// ln(q (k−1)^{k−1} / k^k), with 0⁰ = 1 at k = 1.
pub fn critical_denominator(k: usize, q: u32) -> f64 {
    let (kf, km1) = (k as f64, (k - 1) as f64);
    let ratio = q as f64 * km1.powi(k as i32 - 1) / kf.powi(k as i32);
    if ratio.is_finite() && ratio > 0.0 {
        return ratio.ln();
    }
    (q as f64).ln() + km1 * km1.ln() - kf * kf.ln()
}

/// T_cr = (ε − (k−1)J) / ln(q (k−1)^{k−1} / k^k); at k = 1 this is ε / ln q.
pub fn critical_temperature(k: usize, q: u32, epsilon: f64, coupling: Coupling) -> Result<CriticalTemperature> {
    if k < 1 || q < 1 {
        return Err(ZipperError::Domain("k and q must be at least 1".into()));
    }
    let numerator = match (k, coupling) {
        (1, _) => epsilon,
        (_, Coupling::Infinite) => {
            return Ok(CriticalTemperature { value: None, reason: CriticalReason::InfiniteCoupling, in_set_a: false })
        }
        (_, Coupling::Finite(j)) => epsilon - (k - 1) as f64 * j,
    };
    let denominator = critical_denominator(k, q);
    if denominator == 0.0 {
        return Ok(CriticalTemperature { value: None, reason: CriticalReason::DenominatorZero, in_set_a: false });
    }
    let t = numerator / denominator;
    Ok(if t > 0.0 {
        CriticalTemperature { value: Some(t), reason: CriticalReason::Positive, in_set_a: true }
    } else {
        CriticalTemperature { value: None, reason: CriticalReason::NonPositive, in_set_a: false }
    })
}

/// Temperatures at which two constant laws exist, relative to T_cr.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NonUniquenessSide {
    AboveTcr,
    BelowTcr,
}

/// η < η_c(θ) is equivalent to β (ε − (k−1)J) < ln(q (k−1)^{k−1}/k^k), so the
/// side is set by the sign of the denominator of T_cr.
pub fn nonuniqueness_side(k: usize, q: u32) -> Option<NonUniquenessSide> {
    let l = critical_denominator(k, q);
    if k < 2 || l == 0.0 {
        None
    } else if l > 0.0 {
        Some(NonUniquenessSide::AboveTcr)
    } else {
        Some(NonUniquenessSide::BelowTcr)
    }
}

/// Whether two constant laws exist at temperature t, using the numeric η_c.
pub fn nonunique_at(k: usize, q: u32, epsilon: f64, j: f64, t: f64) -> Result<bool> {
    let p = ModelParams::from_temperature(k, q, epsilon, Coupling::Finite(j), t)?;
    Ok(p.eta() < boundary_law::eta_critical_numeric(k, p.theta())?)
}

/// Locates T_cr in [lo, hi] by bisection on η(T) < η_c(θ(T)) with the
/// numerically located η_c; errors when the regime does not change.
pub fn critical_temperature_numeric(k: usize, q: u32, epsilon: f64, j: f64, lo: f64, hi: f64) -> Result<f64> {
    if k < 2 || !(0.0 < lo && lo < hi) {
        return Err(ZipperError::Domain("need k ≥ 2 and 0 < lo < hi".into()));
    }
    let at_lo = nonunique_at(k, q, epsilon, j, lo)?;
    if nonunique_at(k, q, epsilon, j, hi)? == at_lo {
        return Err(ZipperError::Numeric(format!("no regime change in [{lo}, {hi}]")));
    }
    Ok(bisect_threshold(|t| nonunique_at(k, q, epsilon, j, t).map(|s| s == at_lo).unwrap_or(false), lo, hi, 200))
}

/// Number of translation-invariant Gibbs measures for k ≥ 2, η > 0.
pub fn n_tigm(k: usize, theta: f64, eta: f64) -> Result<usize> {
    boundary_law::count_solutions(k, theta, eta)
}

/// The η = 0 free energy two ways at one θ.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroCouplingFreeEnergies {
    pub theta: f64,
    /// b = −½ ln θ for every boundary law
    pub boundary_law: f64,
    /// (1/|V_n|) ln Z_n with h ≡ 0
    pub zero_field_finite: f64,
    /// max(0, −ln θ)
    pub zero_field_limit: f64,
}

/// Boundary-law free energy next to the zero-field finite-volume one at η = 0.
pub fn zero_coupling_free_energies(k: usize, q: u32, theta: f64, n: usize) -> Result<ZeroCouplingFreeEnergies> {
    let w = TransferParams::new(k, q, theta, 0.0)?;
    let ln_z = gibbs::ln_partition_function(&w, &BoundaryFields::zero(n), n)?;
    Ok(ZeroCouplingFreeEnergies {
        theta,
        boundary_law: -0.5 * theta.ln(),
        zero_field_finite: ln_z / tree::volume(k, n) as f64,
        zero_field_limit: (-theta.ln()).max(0.0),
    })
}

/// b at every depth 1..=n of a law; at η = 0 these all equal −½ ln θ.
pub fn b_profile(w: &TransferParams, law: &BoundaryLaw, n: usize) -> Result<Vec<f64>> {
    (1..=n).map(|d| Ok(b_of(law.value_at(&VertexId::from_path(vec![0; d]))?, w.theta, w.eta))).collect()
}
