//! Model parameters, zipper-admissible configurations and the Hamiltonian.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Result, ZipperError};
use crate::tree::{self, VertexId};

/// Default cap on |Ω_n| for anything that enumerates configurations.
pub const ENUMERATION_GUARD: u128 = 2_000_000;

/// The coupling J, which may take the distinguished value +∞.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coupling {
    Finite(f64),
    Infinite,
}

impl Coupling {
    pub fn is_infinite(self) -> bool {
        matches!(self, Coupling::Infinite)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Coupling::Finite(j) => Some(j),
            Coupling::Infinite => None,
        }
    }
}

impl fmt::Display for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coupling::Finite(j) => write!(f, "{j}"),
            Coupling::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Coupling {
    type Err = ZipperError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "+inf" | "infinity" | "+infinity" => Ok(Coupling::Infinite),
            other => {
                let j: f64 = other.parse().map_err(|_| ZipperError::Parse(format!("bad coupling {s:?}")))?;
                if j.is_nan() || j == f64::NEG_INFINITY {
                    return Err(ZipperError::Parse(format!("bad coupling {s:?}")));
                }
                if j == f64::INFINITY {
                    Ok(Coupling::Infinite)
                } else {
                    Ok(Coupling::Finite(j))
                }
            }
        }
    }
}

impl Serialize for Coupling {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Coupling::Finite(j) => serializer.serialize_f64(*j),
            Coupling::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Coupling {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(j) => Ok(Coupling::Finite(j)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Physical parameters (k, q, ε, J, β).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    k: usize,
    q: u32,
    epsilon: f64,
    coupling: Coupling,
    beta: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    k: usize,
    q: u32,
    epsilon: f64,
    #[serde(rename = "J")]
    coupling: Coupling,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(default, rename = "T", skip_serializing_if = "Option::is_none")]
    temperature: Option<f64>,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = ZipperError;

    fn try_from(raw: RawParams) -> Result<Self> {
        let beta = match (raw.beta, raw.temperature) {
            (Some(b), None) => b,
            (None, Some(t)) => 1.0 / t,
            (Some(_), Some(_)) => return Err(ZipperError::Parse("give either beta or T, not both".into())),
            (None, None) => return Err(ZipperError::Parse("missing beta or T".into())),
        };
        ModelParams::new(raw.k, raw.q, raw.epsilon, raw.coupling, beta)
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams { k: p.k, q: p.q, epsilon: p.epsilon, coupling: p.coupling, beta: Some(p.beta), temperature: None }
    }
}

impl ModelParams {
    pub fn new(k: usize, q: u32, epsilon: f64, coupling: Coupling, beta: f64) -> Result<Self> {
        if k < 1 {
            return Err(ZipperError::Domain("k must be at least 1".into()));
        }
        if q < 1 {
            return Err(ZipperError::Domain("q must be at least 1".into()));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(ZipperError::Domain(format!("beta must be positive and finite, got {beta}")));
        }
        if !epsilon.is_finite() {
            return Err(ZipperError::Domain("epsilon must be finite".into()));
        }
        if let Coupling::Finite(j) = coupling {
            if !j.is_finite() {
                return Err(ZipperError::Domain("finite J must be a finite number".into()));
            }
        }
        Ok(Self { k, q, epsilon, coupling, beta })
    }

    pub fn from_temperature(k: usize, q: u32, epsilon: f64, coupling: Coupling, temperature: f64) -> Result<Self> {
        if !(temperature > 0.0) {
            return Err(ZipperError::Domain(format!("temperature must be positive, got {temperature}")));
        }
        Self::new(k, q, epsilon, coupling, 1.0 / temperature)
    }

    pub fn k(&self) -> usize {
        self.k
    }
    pub fn q(&self) -> u32 {
        self.q
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn coupling(&self) -> Coupling {
        self.coupling
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn temperature(&self) -> f64 {
        1.0 / self.beta
    }

    /// θ = e^{βε} / q.
    pub fn theta(&self) -> f64 {
        (self.beta * self.epsilon - (self.q as f64).ln()).exp()
    }

    /// η = e^{-βJ}; exactly zero for J = +∞.
    pub fn eta(&self) -> f64 {
        match self.coupling {
            Coupling::Finite(j) => (-self.beta * j).exp(),
            Coupling::Infinite => 0.0,
        }
    }

    pub fn transfer(&self) -> TransferParams {
        TransferParams { k: self.k, q: self.q, theta: self.theta(), eta: self.eta() }
    }
}

/// The reduced parameterisation (k, q, θ, η) that every weight depends on.
///
/// A single open vertex carries Boltzmann factor e^{-βε} = 1/(qθ), summed
/// over its q open states 1/θ; an open vertex below depth 1 whose parent is
/// closed carries the extra factor η.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferParams {
    pub k: usize,
    pub q: u32,
    pub theta: f64,
    pub eta: f64,
}

impl TransferParams {
    pub fn new(k: usize, q: u32, theta: f64, eta: f64) -> Result<Self> {
        if k < 1 || q < 1 {
            return Err(ZipperError::Domain("k and q must be at least 1".into()));
        }
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(ZipperError::Domain(format!("theta must be positive, got {theta}")));
        }
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(ZipperError::Domain(format!("eta must be non-negative, got {eta}")));
        }
        Ok(Self { k, q, theta, eta })
    }

    /// ln e^{-βε} for one open state.
    pub fn ln_open_state(&self) -> f64 {
        -(self.q as f64).ln() - self.theta.ln()
    }

    /// ln of the open weight summed over all q states, ln(1/θ).
    pub fn ln_open_all_states(&self) -> f64 {
        -self.theta.ln()
    }

    /// ln η, or -∞ at J = +∞.
    pub fn ln_wall(&self) -> f64 {
        if self.eta == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.eta.ln()
        }
    }
}

/// Spin assignment on V_n stored in level order. Spin 0 is closed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    k: usize,
    q: u32,
    n: usize,
    values: Vec<u32>,
}

impl Configuration {
    /// Builds a configuration from level-ordered spins.
    pub fn new(k: usize, q: u32, n: usize, values: Vec<u32>) -> Result<Self> {
        let expected = tree::volume(k, n);
        if values.len() as u64 != expected {
            return Err(ZipperError::MalformedConfiguration(format!(
                "expected {expected} spins for k={k}, n={n}, got {}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|&&s| s > q) {
            return Err(ZipperError::MalformedConfiguration(format!("spin {bad} outside 0..={q}")));
        }
        Ok(Self { k, q, n, values })
    }

    /// Builds a configuration from a vertex map; every vertex of V_n must appear.
    pub fn from_map(k: usize, q: u32, n: usize, map: &BTreeMap<VertexId, u32>) -> Result<Self> {
        let values = tree::vertices(k, n)
            .map(|x| {
                map.get(&x)
                    .copied()
                    .ok_or_else(|| ZipperError::MalformedConfiguration(format!("no spin assigned to {x}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if map.len() != values.len() {
            return Err(ZipperError::MalformedConfiguration("assignment to vertices outside V_n".into()));
        }
        Self::new(k, q, n, values)
    }

    pub fn all_closed(k: usize, q: u32, n: usize) -> Self {
        Self { k, q, n, values: vec![0; tree::volume(k, n) as usize] }
    }

    pub fn k(&self) -> usize {
        self.k
    }
    pub fn q(&self) -> u32 {
        self.q
    }
    pub fn depth(&self) -> usize {
        self.n
    }
    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn spin(&self, x: &VertexId) -> Option<u32> {
        if x.depth() > self.n || !x.is_valid_for(self.k) {
            return None;
        }
        self.values.get(x.level_index(self.k) as usize).copied()
    }

    pub fn to_map(&self) -> BTreeMap<VertexId, u32> {
        tree::vertices(self.k, self.n).zip(self.values.iter().copied()).collect()
    }

    /// Restriction to V_{m}, m ≤ n.
    pub fn restrict(&self, m: usize) -> Configuration {
        let len = tree::volume(self.k, m) as usize;
        Configuration { k: self.k, q: self.q, n: m.min(self.n), values: self.values[..len].to_vec() }
    }

    /// Number of open vertices at each depth 0..=n.
    pub fn open_counts(&self) -> Vec<u64> {
        (0..=self.n)
            .map(|d| {
                let lo = tree::level_offset(self.k, d) as usize;
                let hi = tree::volume(self.k, d) as usize;
                self.values[lo..hi].iter().filter(|&&s| s != 0).count() as u64
            })
            .collect()
    }
}

impl Serialize for Configuration {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_map().serialize(serializer)
    }
}

/// Zipper-admissibility: the root is closed and every closed vertex has an
/// all-closed path to the root (equivalently, no open vertex has a closed child).
pub fn is_admissible(c: &Configuration) -> bool {
    if c.values[0] != 0 {
        return false;
    }
    (1..c.values.len()).all(|i| !(c.values[i] == 0 && c.values[tree::parent_index(c.k, i)] != 0))
}

/// H_n(σ) = ε Σ_{W_1} 1[open] + Σ_{V_n∖V_1} (ε + J·1[parent closed])·1[open].
///
/// With J = +∞ a wall below depth 1 gives `f64::INFINITY`.
pub fn hamiltonian(c: &Configuration, p: &ModelParams) -> Result<f64> {
    if !is_admissible(c) {
        return Err(ZipperError::NotAdmissible);
    }
    let mut energy = 0.0;
    for i in 1..c.values.len() {
        if c.values[i] == 0 {
            continue;
        }
        energy += p.epsilon();
        let parent = tree::parent_index(c.k, i);
        if parent != 0 && c.values[parent] == 0 {
            match p.coupling() {
                Coupling::Finite(j) => energy += j,
                Coupling::Infinite => return Ok(f64::INFINITY),
            }
        }
    }
    Ok(energy)
}

/// ln of the Boltzmann factor e^{-βH_n(σ)} in terms of (q, θ, η).
pub fn log_weight(c: &Configuration, w: &TransferParams) -> Result<f64> {
    if !is_admissible(c) {
        return Err(ZipperError::NotAdmissible);
    }
    let mut log_w = 0.0;
    for i in 1..c.values.len() {
        if c.values[i] == 0 {
            continue;
        }
        log_w += w.ln_open_state();
        let parent = tree::parent_index(c.k, i);
        if parent != 0 && c.values[parent] == 0 {
            log_w += w.ln_wall();
        }
    }
    Ok(log_w)
}

/// |Ω_n|, counted through the closed-set recursion. Saturates at `u128::MAX`.
pub fn admissible_count(k: usize, q: u32, n: usize) -> u128 {
    // closed[d]: admissible fillings of a depth-d subtree whose top vertex is closed
    // open[d]: fillings with the top vertex open (the whole subtree is then open)
    let q = q as u128;
    let mut closed: u128 = 1;
    let mut open: u128 = q;
    let mut size: u32 = 1;
    for _ in 0..n {
        let per_child = closed.saturating_add(open);
        closed = (0..k).fold(1u128, |acc, _| acc.saturating_mul(per_child));
        size = size.saturating_mul(k as u32).saturating_add(1);
        open = q.saturating_pow(size);
    }
    // the root is always closed
    closed
}

/// Streams Ω_n in lexicographic order of (level-ordered vertex, spin).
pub struct AdmissibleIter {
    k: usize,
    q: u32,
    n: usize,
    current: Option<Vec<u32>>,
}

impl Iterator for AdmissibleIter {
    type Item = Configuration;

    fn next(&mut self) -> Option<Configuration> {
        let values = self.current.take()?;
        let out = Configuration { k: self.k, q: self.q, n: self.n, values: values.clone() };
        self.current = advance(self.k, self.q, values);
        Some(out)
    }
}

fn min_spin(k: usize, values: &[u32], i: usize) -> u32 {
    if i > 0 && values[tree::parent_index(k, i)] != 0 {
        1
    } else {
        0
    }
}

fn advance(k: usize, q: u32, mut values: Vec<u32>) -> Option<Vec<u32>> {
    // odometer over positions 1..len; parents precede children in level order
    let len = values.len();
    let mut pos = len;
    while pos > 1 {
        pos -= 1;
        if values[pos] < q {
            values[pos] += 1;
            for j in pos + 1..len {
                values[j] = min_spin(k, &values, j);
            }
            return Some(values);
        }
    }
    None
}

/// All zipper-admissible configurations on V_n, guarded by [`ENUMERATION_GUARD`].
pub fn enumerate_admissible(k: usize, q: u32, n: usize) -> Result<AdmissibleIter> {
    enumerate_admissible_with_guard(k, q, n, ENUMERATION_GUARD)
}

pub fn enumerate_admissible_with_guard(k: usize, q: u32, n: usize, guard: u128) -> Result<AdmissibleIter> {
    if k < 1 || q < 1 {
        return Err(ZipperError::Domain("k and q must be at least 1".into()));
    }
    let count = admissible_count(k, q, n);
    if count > guard {
        return Err(ZipperError::EnumerationGuard { count, limit: guard });
    }
    let start = vec![0; tree::volume(k, n) as usize];
    Ok(AdmissibleIter { k, q, n, current: Some(start) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(k: usize, q: u32, n: usize, open: &[(&[u32], u32)]) -> Configuration {
        let mut map: BTreeMap<VertexId, u32> = tree::vertices(k, n).map(|x| (x, 0)).collect();
        for (path, s) in open {
            map.insert(VertexId::from_path(path.to_vec()), *s);
        }
        Configuration::from_map(k, q, n, &map).unwrap()
    }

    #[test]
    fn admissibility_examples() {
        assert!(is_admissible(&Configuration::all_closed(2, 3, 3)));
        let mut root_open = Configuration::all_closed(2, 1, 1);
        root_open.values[0] = 1;
        assert!(!is_admissible(&root_open));
        assert!(is_admissible(&cfg(2, 1, 2, &[(&[0, 0], 1)])));
        assert!(!is_admissible(&cfg(2, 1, 2, &[(&[0], 1)])));
    }

    #[test]
    fn missing_vertex_is_malformed() {
        let mut map: BTreeMap<VertexId, u32> = tree::vertices(2, 2).map(|x| (x, 0)).collect();
        map.remove(&VertexId::from_path(vec![1, 0]));
        assert!(matches!(
            Configuration::from_map(2, 1, 2, &map),
            Err(ZipperError::MalformedConfiguration(_))
        ));
        assert!(Configuration::new(2, 1, 2, vec![0; 6]).is_err());
        assert!(Configuration::new(1, 1, 1, vec![0, 2]).is_err());
    }

    #[test]
    fn hamiltonian_examples() {
        let p = ModelParams::new(2, 2, 1.5, Coupling::Finite(0.7), 1.0).unwrap();
        assert_eq!(hamiltonian(&Configuration::all_closed(2, 2, 2), &p).unwrap(), 0.0);
        let all_open = Configuration::new(2, 2, 2, vec![0, 1, 2, 1, 1, 2, 2]).unwrap();
        assert!((hamiltonian(&all_open, &p).unwrap() - 6.0 * 1.5).abs() < 1e-12);
        // open child of a closed depth-1 vertex pays ε + J
        let wall = cfg(2, 2, 2, &[(&[1, 0], 2)]);
        assert!((hamiltonian(&wall, &p).unwrap() - 2.2).abs() < 1e-12);
        let inf = ModelParams::new(2, 2, 1.5, Coupling::Infinite, 1.0).unwrap();
        assert_eq!(hamiltonian(&wall, &inf).unwrap(), f64::INFINITY);
        // depth-1 vertices never pay J
        let level1 = cfg(2, 2, 2, &[(&[1], 1), (&[1, 0], 1), (&[1, 1], 1)]);
        assert!((hamiltonian(&level1, &inf).unwrap() - 4.5).abs() < 1e-12);
        assert!(hamiltonian(&cfg(2, 1, 2, &[(&[0], 1)]), &p).is_err());
    }

    #[test]
    fn log_weight_matches_hamiltonian() {
        for c in enumerate_admissible(3, 2, 1).unwrap().chain(enumerate_admissible(2, 2, 2).unwrap()) {
            let p = ModelParams::new(c.k(), 2, 0.8, Coupling::Finite(-0.3), 1.7).unwrap();
            let lw = log_weight(&c, &p.transfer()).unwrap();
            assert!((lw + p.beta() * hamiltonian(&c, &p).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_admissible(1, 1, 2).unwrap().count(), 3);
        assert_eq!(enumerate_admissible(2, 2, 1).unwrap().count(), 9);
        for q in 2..5u32 {
            for n in 0..6 {
                let geometric = ((q as u128).pow(n as u32 + 1) - 1) / (q as u128 - 1);
                assert_eq!(enumerate_admissible(1, q, n).unwrap().count() as u128, geometric);
                assert_eq!(admissible_count(1, q, n), geometric);
            }
        }
        for (k, q, n) in [(2, 1, 3), (2, 2, 2), (3, 2, 2), (2, 3, 2)] {
            let listed: Vec<_> = enumerate_admissible(k, q, n).unwrap().collect();
            assert_eq!(listed.len() as u128, admissible_count(k, q, n));
            assert!(listed.iter().all(is_admissible));
            let distinct: std::collections::HashSet<_> = listed.iter().collect();
            assert_eq!(distinct.len(), listed.len());
        }
    }

    #[test]
    fn enumeration_is_lexicographic() {
        let listed: Vec<_> = enumerate_admissible(2, 2, 2).unwrap().map(|c| c.values).collect();
        assert!(listed.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn enumeration_guard() {
        assert!(matches!(
            enumerate_admissible(3, 8, 4),
            Err(ZipperError::EnumerationGuard { .. })
        ));
    }

    #[test]
    fn params_derive_theta_eta() {
        let p = ModelParams::new(2, 8, 2.0 * 2f64.ln(), Coupling::Finite(2f64.ln()), 1.0).unwrap();
        assert!((p.theta() - 0.5).abs() < 1e-15);
        assert!((p.eta() - 0.5).abs() < 1e-15);
        let inf = ModelParams::new(2, 8, 1.0, Coupling::Infinite, 1.0).unwrap();
        assert_eq!(inf.eta(), 0.0);
        assert!(ModelParams::new(2, 8, 1.0, Coupling::Infinite, 0.0).is_err());
        assert!(ModelParams::new(0, 8, 1.0, Coupling::Infinite, 1.0).is_err());
    }

    #[test]
    fn params_json_and_toml() {
        let p: ModelParams = serde_json::from_str(r#"{"k":2,"q":8,"epsilon":1.0,"J":"inf","T":2.0}"#).unwrap();
        assert!(p.coupling().is_infinite());
        assert_eq!(p.beta(), 0.5);
        let p: ModelParams = toml::from_str("k = 3\nq = 2\nepsilon = 0.5\nJ = -1.0\nbeta = 2.0\n").unwrap();
        assert_eq!(p.coupling(), Coupling::Finite(-1.0));
        let back: ModelParams = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<ModelParams>(r#"{"k":2,"q":8,"epsilon":1.0,"J":1,"T":2.0,"beta":1}"#).is_err());
    }
}
