//! Finite-volume Gibbs distributions μ_n induced by boundary fields on W_n,
//! their partition functions by tree dynamic programming, the compatibility
//! check between consecutive volumes, and an exact sampler.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::boundary_law::BoundaryLaw;
use crate::error::{Result, ZipperError};
use crate::model::{self, Configuration, TransferParams};
use crate::numeric::{log_add_exp, log_sum_exp};
use crate::tree::{self, VertexId};

/// Largest |V_n| the per-vertex code paths will materialise.
pub const VERTEX_LIMIT: u64 = 1 << 22;
/// Largest |W_{n-1}| for the closed-count dynamic program.
pub const COUNT_DP_LIMIT: u64 = 4096;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
enum FieldValues {
    Uniform { closed: f64, open: f64 },
    PerVertex(BTreeMap<VertexId, (f64, f64)>),
}

/// Fields h_{a,x} on the outer generation W_n.
///
/// Open spins share one value: h_{1,x} = ... = h_{q,x}.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryFields {
    n: usize,
    values: FieldValues,
}

impl BoundaryFields {
    /// h ≡ 0 on W_n.
    pub fn zero(n: usize) -> Self {
        Self::uniform(n, 0.0, 0.0)
    }

    pub fn uniform(n: usize, closed: f64, open: f64) -> Self {
        Self { n, values: FieldValues::Uniform { closed, open } }
    }

    pub fn per_vertex(k: usize, n: usize, values: BTreeMap<VertexId, (f64, f64)>) -> Result<Self> {
        for x in tree::generation(k, n) {
            if !values.contains_key(&x) {
                return Err(ZipperError::Domain(format!("no field given at {x}")));
            }
        }
        Ok(Self { n, values: FieldValues::PerVertex(values) })
    }

    pub fn depth(&self) -> usize {
        self.n
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.values, FieldValues::Uniform { .. })
    }

    /// `(h_{0,x}, h_{1,x})` for x ∈ W_n.
    pub fn pair(&self, x: &VertexId) -> Result<(f64, f64)> {
        if x.depth() != self.n {
            return Err(ZipperError::Domain(format!("fields live on W_{}, not at {x}", self.n)));
        }
        match &self.values {
            FieldValues::Uniform { closed, open } => Ok((*closed, *open)),
            FieldValues::PerVertex(map) => {
                map.get(x).copied().ok_or_else(|| ZipperError::Domain(format!("no field given at {x}")))
            }
        }
    }

    /// h_{spin,x}.
    pub fn h(&self, spin: u32, x: &VertexId) -> Result<f64> {
        let (closed, open) = self.pair(x)?;
        Ok(if spin == 0 { closed } else { open })
    }
}

/// h_{0,x} = ½ ln z_x and h_{i,x} = −½ ln z_x on W_n, so that
/// exp(h_0 − h_i) = z_x and h_0 + h_1 = 0.
pub fn fields_from_law(law: &BoundaryLaw, k: usize, n: usize) -> Result<BoundaryFields> {
    if n == 0 {
        return Err(ZipperError::Domain("fields need n ≥ 1".into()));
    }
    if law.is_depth_uniform() {
        let half = 0.5 * law.level_value(n)?.ln();
        return Ok(BoundaryFields::uniform(n, half, -half));
    }
    let values = tree::generation(k, n)
        .map(|x| {
            let half = 0.5 * law.value_at(&x)?.ln();
            Ok((x, (half, -half)))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;
    BoundaryFields::per_vertex(k, n, values)
}

/// ln of the total weight of the subtree hanging from a vertex, given that
/// the vertex's parent is closed or open.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SubtreeWeight {
    pub ln_closed: f64,
    pub ln_open: f64,
}

/// Subtree weights of every vertex of V_n ∖ {root}.
#[derive(Clone, Debug)]
pub enum SubtreeTable {
    /// Entry `d - 1` serves every vertex at depth `d`.
    ByDepth(Vec<SubtreeWeight>),
    /// Level-ordered; entry 0 (the root) is unused.
    ByVertex(Vec<SubtreeWeight>),
}

impl SubtreeTable {
    fn at(&self, depth: usize, index: usize) -> SubtreeWeight {
        match self {
            SubtreeTable::ByDepth(v) => v[depth - 1],
            SubtreeTable::ByVertex(v) => v[index],
        }
    }
}

fn ln_wall(w: &TransferParams, depth: usize) -> f64 {
    if depth >= 2 {
        w.ln_wall()
    } else {
        0.0
    }
}

fn leaf_weight(w: &TransferParams, depth: usize, (h0, h1): (f64, f64)) -> SubtreeWeight {
    let open = w.ln_open_all_states() + h1;
    SubtreeWeight { ln_closed: log_add_exp(h0, open + ln_wall(w, depth)), ln_open: open }
}

fn interior_weight(w: &TransferParams, depth: usize, closed_children: f64, open_children: f64) -> SubtreeWeight {
    let open = w.ln_open_all_states() + open_children;
    SubtreeWeight { ln_closed: log_add_exp(closed_children, open + ln_wall(w, depth)), ln_open: open }
}

/// Bottom-up transfer recursion over V_n.
pub fn subtree_table(w: &TransferParams, fields: &BoundaryFields, n: usize) -> Result<SubtreeTable> {
    if n == 0 {
        return Err(ZipperError::Domain("no configuration space at n = 0".into()));
    }
    if fields.depth() != n {
        return Err(ZipperError::Domain(format!("fields on W_{} used at volume {n}", fields.depth())));
    }
    let k = w.k;
    if let FieldValues::Uniform { closed, open } = fields.values {
        let mut by_depth = vec![leaf_weight(w, n, (closed, open)); n];
        for d in (1..n).rev() {
            let below = by_depth[d];
            by_depth[d - 1] = interior_weight(w, d, k as f64 * below.ln_closed, k as f64 * below.ln_open);
        }
        return Ok(SubtreeTable::ByDepth(by_depth));
    }
    let size = tree::volume(k, n);
    if size > VERTEX_LIMIT {
        return Err(ZipperError::Domain(format!("|V_n| = {size} too large for per-vertex fields")));
    }
    let size = size as usize;
    let first_leaf = tree::level_offset(k, n) as usize;
    let mut table = vec![SubtreeWeight { ln_closed: 0.0, ln_open: 0.0 }; size];
    for (i, x) in (first_leaf..size).zip(tree::generation(k, n)) {
        table[i] = leaf_weight(w, n, fields.pair(&x)?);
    }
    for d in (1..n).rev() {
        let lo = tree::level_offset(k, d) as usize;
        let hi = tree::volume(k, d) as usize;
        for i in lo..hi {
            let children = (k * i + 1)..(k * i + k + 1);
            let closed: f64 = children.clone().map(|c| table[c].ln_closed).sum();
            let open: f64 = children.map(|c| table[c].ln_open).sum();
            table[i] = interior_weight(w, d, closed, open);
        }
    }
    Ok(SubtreeTable::ByVertex(table))
}

/// ln Z_n(β, h) by dynamic programming.
pub fn ln_partition_function(w: &TransferParams, fields: &BoundaryFields, n: usize) -> Result<f64> {
    let table = subtree_table(w, fields, n)?;
    Ok((1..=w.k).map(|i| table.at(1, i).ln_closed).sum())
}

/// Z_n(β, h); may overflow to +∞ where [`ln_partition_function`] does not.
pub fn partition_function_dp(w: &TransferParams, fields: &BoundaryFields, n: usize) -> Result<f64> {
    ln_partition_function(w, fields, n).map(f64::exp)
}

fn check_shape(w: &TransferParams, c: &Configuration, n: usize) -> Result<()> {
    if c.k() != w.k || c.q() != w.q || c.depth() != n {
        return Err(ZipperError::MalformedConfiguration(format!(
            "configuration has (k, q, n) = ({}, {}, {}), expected ({}, {}, {n})",
            c.k(),
            c.q(),
            c.depth(),
            w.k,
            w.q
        )));
    }
    Ok(())
}

/// ln of the unnormalised weight exp(−βH_n(σ) + Σ_{y∈W_n} h_{σ(y),y}).
pub fn ln_unnormalized(w: &TransferParams, fields: &BoundaryFields, c: &Configuration) -> Result<f64> {
    let n = c.depth();
    let mut total = model::log_weight(c, w)?;
    let first_leaf = tree::level_offset(w.k, n) as usize;
    for (x, &s) in tree::generation(w.k, n).zip(&c.values()[first_leaf..]) {
        total += fields.h(s, &x)?;
    }
    Ok(total)
}

/// μ_n(σ).
pub fn mu_n(w: &TransferParams, fields: &BoundaryFields, n: usize, c: &Configuration) -> Result<f64> {
    check_shape(w, c, n)?;
    Ok((ln_unnormalized(w, fields, c)? - ln_partition_function(w, fields, n)?).exp())
}

/// Deviation of the marginal of μ_n on V_{n−1} from μ_{n−1}.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompatibilityReport {
    pub n: usize,
    /// max_σ |Σ_ω μ_n(σ∨ω) − μ_{n−1}(σ)|
    pub max_abs: f64,
    /// max over σ with μ_{n−1}(σ) > 0 of |Σ_ω μ_n(σ∨ω) / μ_{n−1}(σ) − 1|
    pub max_rel: f64,
    pub total_variation: f64,
    pub method: &'static str,
}

/// Compatibility of (μ_{n−1}, μ_n) built from `law`.
///
/// Depth-uniform laws use a dynamic program over the number of closed
/// vertices in W_{n−1}, which is all the marginal ratio depends on. Explicit
/// laws fall back to exhaustive enumeration.
pub fn compatibility_error(w: &TransferParams, law: &BoundaryLaw, n: usize) -> Result<CompatibilityReport> {
    if n < 2 {
        return Err(ZipperError::Domain("compatibility needs n ≥ 2".into()));
    }
    if law.is_depth_uniform() && tree::generation_size(w.k, n - 1) <= COUNT_DP_LIMIT {
        compatibility_by_count(w, law, n)
    } else {
        compatibility_error_exhaustive(w, law, n)
    }
}

#[derive(Clone, Copy)]
enum Semiring {
    Sum,
    Max,
}

impl Semiring {
    fn add(self, a: f64, b: f64) -> f64 {
        match self {
            Semiring::Sum => log_add_exp(a, b),
            Semiring::Max => a.max(b),
        }
    }
}

fn convolve(s: Semiring, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![f64::NEG_INFINITY; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == f64::NEG_INFINITY {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            if y == f64::NEG_INFINITY {
                continue;
            }
            out[i + j] = s.add(out[i + j], x + y);
        }
    }
    out
}

fn convolve_power(s: Semiring, a: &[f64], k: usize) -> Vec<f64> {
    let mut out = vec![0.0];
    for _ in 0..k {
        out = convolve(s, &out, a);
    }
    out
}

/// Entry m: ln of the sum (or max) of single-configuration weights of μ_{L}
/// (unnormalised) over configurations with exactly m closed vertices in W_L.
fn closed_count_profile(w: &TransferParams, s: Semiring, leaf: (f64, f64), depth: usize) -> Vec<f64> {
    let k = w.k;
    let ln_open = match s {
        Semiring::Sum => w.ln_open_all_states(),
        Semiring::Max => w.ln_open_state(),
    };
    let (h0, h1) = leaf;
    // parent closed: indexed by m; parent open: the subtree is all open
    let mut closed_parent = vec![ln_open + ln_wall(w, depth) + h1, h0];
    let mut open_parent = ln_open + h1;
    for d in (1..depth).rev() {
        let x_closed = convolve_power(s, &closed_parent, k);
        let x_open = ln_open + k as f64 * open_parent;
        let mut table = x_closed;
        table[0] = s.add(table[0], x_open + ln_wall(w, d));
        closed_parent = table;
        open_parent = x_open;
    }
    convolve_power(s, &closed_parent, k)
}

fn compatibility_by_count(w: &TransferParams, law: &BoundaryLaw, n: usize) -> Result<CompatibilityReport> {
    let k = w.k;
    let inner = n - 1;
    let fields_inner = fields_from_law(law, k, inner)?;
    let fields_outer = fields_from_law(law, k, n)?;
    let ln_z_inner = ln_partition_function(w, &fields_inner, inner)?;
    let ln_z_outer = ln_partition_function(w, &fields_outer, n)?;
    let x = VertexId::from_path(vec![0; inner]);
    let (h0, h1) = fields_inner.pair(&x)?;
    let leaf = leaf_weight(w, n, fields_outer.pair(&x.child(0))?);
    // per vertex of W_{n-1}: ln of its children's summed weight minus its own field
    let gain_closed = k as f64 * leaf.ln_closed - h0;
    let gain_open = k as f64 * leaf.ln_open - h1;
    let size = tree::generation_size(k, inner) as usize;

    let sums = closed_count_profile(w, Semiring::Sum, (h0, h1), inner);
    let maxes = closed_count_profile(w, Semiring::Max, (h0, h1), inner);
    let mut report = CompatibilityReport { n, max_abs: 0.0, max_rel: 0.0, total_variation: 0.0, method: "closed-count dp" };
    for m in 0..=size {
        if sums[m] == f64::NEG_INFINITY {
            continue;
        }
        let ln_ratio = m as f64 * gain_closed + (size - m) as f64 * gain_open + ln_z_inner - ln_z_outer;
        let dev = ln_ratio.exp_m1().abs();
        report.max_rel = report.max_rel.max(dev);
        report.max_abs = report.max_abs.max((maxes[m] - ln_z_inner).exp() * dev);
        report.total_variation += 0.5 * (sums[m] - ln_z_inner).exp() * dev;
    }
    Ok(report)
}

/// Compatibility by enumerating Ω_n and Ω_{n−1}.
pub fn compatibility_error_exhaustive(w: &TransferParams, law: &BoundaryLaw, n: usize) -> Result<CompatibilityReport> {
    if n < 2 {
        return Err(ZipperError::Domain("compatibility needs n ≥ 2".into()));
    }
    let fields_outer = fields_from_law(law, w.k, n)?;
    let fields_inner = fields_from_law(law, w.k, n - 1)?;
    let ln_z_outer = ln_partition_function(w, &fields_outer, n)?;
    let ln_z_inner = ln_partition_function(w, &fields_inner, n - 1)?;
    let mut marginal: HashMap<Vec<u32>, f64> = HashMap::new();
    for c in model::enumerate_admissible(w.k, w.q, n)? {
        let p = (ln_unnormalized(w, &fields_outer, &c)? - ln_z_outer).exp();
        *marginal.entry(c.restrict(n - 1).values().to_vec()).or_default() += p;
    }
    let mut report = CompatibilityReport { n, max_abs: 0.0, max_rel: 0.0, total_variation: 0.0, method: "exhaustive" };
    for c in model::enumerate_admissible(w.k, w.q, n - 1)? {
        let p = (ln_unnormalized(w, &fields_inner, &c)? - ln_z_inner).exp();
        let m = marginal.get(c.values()).copied().unwrap_or(0.0);
        report.max_abs = report.max_abs.max((m - p).abs());
        if p > 0.0 {
            report.max_rel = report.max_rel.max((m / p - 1.0).abs());
        }
        report.total_variation += 0.5 * (m - p).abs();
    }
    Ok(report)
}

/// ln a(x) = −k ln θ + ½ Σ_{y∈S(x)} ln((θ z_y + η) / z_y).
pub fn ln_a_of(w: &TransferParams, law: &BoundaryLaw, x: &VertexId) -> Result<f64> {
    let mut total = -(w.k as f64) * w.theta.ln();
    for y in x.children(w.k)? {
        let z = law.value_at(&y)?;
        total += 0.5 * ((w.theta * z + w.eta) / z).ln();
    }
    Ok(total)
}

pub fn a_of(w: &TransferParams, law: &BoundaryLaw, x: &VertexId) -> Result<f64> {
    ln_a_of(w, law, x).map(f64::exp)
}

/// ln A_m = Σ_{x∈W_m} ln a(x).
pub fn ln_generation_a(w: &TransferParams, law: &BoundaryLaw, m: usize) -> Result<f64> {
    if law.is_depth_uniform() {
        let x = VertexId::from_path(vec![0; m]);
        return Ok(tree::generation_size(w.k, m) as f64 * ln_a_of(w, law, &x)?);
    }
    tree::generation(w.k, m).map(|x| ln_a_of(w, law, &x)).sum()
}

/// |Z_n − A_{n−1} Z_{n−1}| / Z_n for the law-induced fields.
pub fn z_recursion_error(w: &TransferParams, law: &BoundaryLaw, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(ZipperError::Domain("the recursion starts at n = 2".into()));
    }
    let ln_zn = ln_partition_function(w, &fields_from_law(law, w.k, n)?, n)?;
    let ln_zprev = ln_partition_function(w, &fields_from_law(law, w.k, n - 1)?, n - 1)?;
    Ok((ln_generation_a(w, law, n - 1)? + ln_zprev - ln_zn).exp_m1().abs())
}

/// Exact sampler for μ_n, descending the tree in level order.
///
/// A vertex below an open parent is open; below a closed parent it is
/// closed with probability proportional to the closed branch of its subtree
/// weight. Open vertices draw their state uniformly from 1..=q.
#[derive(Clone, Debug)]
pub struct Sampler {
    w: TransferParams,
    n: usize,
    /// Level-ordered P(closed | parent closed); entry 0 unused.
    p_closed: Vec<f64>,
}

impl Sampler {
    pub fn new(w: &TransferParams, law: &BoundaryLaw, n: usize) -> Result<Self> {
        Self::from_fields(w, &fields_from_law(law, w.k, n)?, n)
    }

    pub fn from_fields(w: &TransferParams, fields: &BoundaryFields, n: usize) -> Result<Self> {
        let size = tree::volume(w.k, n);
        if size > VERTEX_LIMIT {
            return Err(ZipperError::Domain(format!("|V_n| = {size} too large to sample")));
        }
        let table = subtree_table(w, fields, n)?;
        let k = w.k;
        let first_leaf = tree::level_offset(k, n) as usize;
        let mut p_closed = vec![1.0; size as usize];
        let mut leaves = tree::generation(k, n);
        for (i, slot) in p_closed.iter_mut().enumerate().skip(1) {
            let depth = depth_of(k, i);
            let own = table.at(depth, i);
            let closed_branch = if i >= first_leaf {
                let x = leaves.next().expect("leaf count");
                fields.pair(&x)?.0
            } else {
                (k * i + 1..k * i + k + 1).map(|c| table.at(depth + 1, c).ln_closed).sum()
            };
            *slot = (closed_branch - own.ln_closed).exp();
        }
        Ok(Self { w: *w, n, p_closed })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Configuration {
        let k = self.w.k;
        let mut values = vec![0u32; self.p_closed.len()];
        for i in 1..values.len() {
            let parent_open = values[tree::parent_index(k, i)] != 0;
            if parent_open || rng.gen::<f64>() >= self.p_closed[i] {
                values[i] = rng.gen_range(1..=self.w.q);
            }
        }
        Configuration::new(k, self.w.q, self.n, values).expect("sampler produces well-formed configurations")
    }
}

fn depth_of(k: usize, index: usize) -> usize {
    let mut d = 0;
    while tree::volume(k, d) as usize <= index {
        d += 1;
    }
    d
}

/// One exact draw from μ_n; deterministic in `seed` (ChaCha8, stream 0).
pub fn sample(w: &TransferParams, law: &BoundaryLaw, n: usize, seed: u64) -> Result<Configuration> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(Sampler::new(w, law, n)?.sample(&mut rng))
}

/// P(x open) for a vertex x ∈ W_1 under the law-induced μ_n.
pub fn level_one_open_probability(w: &TransferParams, law: &BoundaryLaw, n: usize) -> Result<f64> {
    let fields = fields_from_law(law, w.k, n)?;
    let table = subtree_table(w, &fields, n)?;
    let own = table.at(1, 1);
    Ok((own.ln_open - own.ln_closed).exp())
}

/// Total variation distance between two μ_n by enumeration of Ω_n.
pub fn total_variation(w: &TransferParams, a: &BoundaryFields, b: &BoundaryFields, n: usize) -> Result<f64> {
    let ln_za = ln_partition_function(w, a, n)?;
    let ln_zb = ln_partition_function(w, b, n)?;
    let mut tv = 0.0;
    for c in model::enumerate_admissible(w.k, w.q, n)? {
        let pa = (ln_unnormalized(w, a, &c)? - ln_za).exp();
        let pb = (ln_unnormalized(w, b, &c)? - ln_zb).exp();
        tv += (pa - pb).abs();
    }
    Ok(0.5 * tv)
}

/// ln Σ over an explicit list of log-weights; exposed for the oracle.
pub fn ln_total(weights: impl IntoIterator<Item = f64>) -> f64 {
    log_sum_exp(weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary_law::{self, BoundaryLaw, DEFAULT_TOL};

    fn tp(k: usize, q: u32, theta: f64, eta: f64) -> TransferParams {
        TransferParams::new(k, q, theta, eta).unwrap()
    }

    fn brute_ln_z(w: &TransferParams, fields: &BoundaryFields, n: usize) -> f64 {
        log_sum_exp(
            model::enumerate_admissible(w.k, w.q, n).unwrap().map(|c| ln_unnormalized(w, fields, &c).unwrap()),
        )
    }

    #[test]
    fn fields_from_law_examples() {
        let f = fields_from_law(&BoundaryLaw::constant(1.0).unwrap(), 2, 2).unwrap();
        assert_eq!(f.pair(&VertexId::from_path(vec![0, 1])).unwrap(), (0.0, -0.0));
        let f = fields_from_law(&BoundaryLaw::constant(1f64.exp().powi(2)).unwrap(), 2, 1).unwrap();
        let (h0, h1) = f.pair(&VertexId::from_path(vec![1])).unwrap();
        assert!((h0 - 1.0).abs() < 1e-15 && (h1 + 1.0).abs() < 1e-15);
        for q in 1..4 {
            assert_eq!(f.h(q, &VertexId::from_path(vec![0])).unwrap(), h1);
        }
    }

    #[test]
    fn dp_matches_brute_force_k2_q2_n3() {
        let w = tp(2, 2, 0.7, 0.4);
        let law = BoundaryLaw::constant(1.3).unwrap();
        let fields = fields_from_law(&law, 2, 3).unwrap();
        let dp = ln_partition_function(&w, &fields, 3).unwrap();
        let brute = brute_ln_z(&w, &fields, 3);
        assert!((dp - brute).abs() < 1e-12 * brute.abs().max(1.0));
    }

    #[test]
    fn per_vertex_fields_match_uniform() {
        let w = tp(3, 2, 0.9, 0.2);
        let uniform = BoundaryFields::uniform(2, 0.3, -0.1);
        let map = tree::generation(3, 2).map(|x| (x, (0.3, -0.1))).collect();
        let per_vertex = BoundaryFields::per_vertex(3, 2, map).unwrap();
        let a = ln_partition_function(&w, &uniform, 2).unwrap();
        let b = ln_partition_function(&w, &per_vertex, 2).unwrap();
        assert!((a - b).abs() < 1e-13);
    }

    #[test]
    fn zero_temperature_weights_count_configurations() {
        // β = 0: θ = 1/q, η = 1
        for (k, q, n) in [(1, 3, 4), (2, 2, 2), (3, 1, 2)] {
            let w = tp(k, q, 1.0 / q as f64, 1.0);
            let z = partition_function_dp(&w, &BoundaryFields::zero(n), n).unwrap();
            assert!((z - model::admissible_count(k, q, n) as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn n_zero_is_rejected() {
        assert!(ln_partition_function(&tp(2, 2, 1.0, 1.0), &BoundaryFields::zero(0), 0).is_err());
    }

    #[test]
    fn mu_normalises() {
        let w = tp(2, 3, 0.8, 0.3);
        let fields = BoundaryFields::uniform(2, 0.2, -0.2);
        let total: f64 = model::enumerate_admissible(2, 3, 2).unwrap().map(|c| mu_n(&w, &fields, 2, &c).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn compatibility_for_root_vs_off_root() {
        let w = tp(2, 2, 0.5, 0.25);
        let s = boundary_law::solve_constant(&w, DEFAULT_TOL).unwrap();
        for &z in &s.roots {
            let law = BoundaryLaw::constant(z).unwrap();
            for n in 2..4 {
                let dp = compatibility_error(&w, &law, n).unwrap();
                let ex = compatibility_error_exhaustive(&w, &law, n).unwrap();
                assert!(dp.max_abs < 1e-12 && ex.max_abs < 1e-12);
            }
        }
        let bad = BoundaryLaw::constant(1.0).unwrap();
        let dp = compatibility_error(&w, &bad, 3).unwrap();
        let ex = compatibility_error_exhaustive(&w, &bad, 3).unwrap();
        assert!(dp.max_abs > 1e-3);
        assert!((dp.max_abs - ex.max_abs).abs() < 1e-12);
        assert!((dp.max_rel - ex.max_rel).abs() < 1e-10);
        assert!((dp.total_variation - ex.total_variation).abs() < 1e-12);
    }

    #[test]
    fn a_matches_recursion() {
        let w = tp(3, 2, 0.5, 0.05);
        let s = boundary_law::solve_constant(&w, DEFAULT_TOL).unwrap();
        let law = BoundaryLaw::constant(s.roots[1]).unwrap();
        for n in 2..5 {
            assert!(z_recursion_error(&w, &law, n).unwrap() < 1e-10);
        }
        let a1 = a_of(&w, &law, &VertexId::from_path(vec![0])).unwrap();
        let a2 = a_of(&w, &law, &VertexId::from_path(vec![2, 1])).unwrap();
        assert_eq!(a1, a2);
    }

    #[test]
    fn sampler_is_seed_deterministic_and_admissible() {
        let w = tp(2, 3, 0.5, 0.25);
        let law = BoundaryLaw::constant(boundary_law::k2_explicit_roots(0.5, 0.25).unwrap().1).unwrap();
        let a = sample(&w, &law, 4, 17).unwrap();
        let b = sample(&w, &law, 4, 17).unwrap();
        assert_eq!(a, b);
        let sampler = Sampler::new(&w, &law, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            assert!(model::is_admissible(&sampler.sample(&mut rng)));
        }
    }

    #[test]
    fn low_temperature_samples_close() {
        // ε = 5, J = 5, q = 2 at β = 10
        let w = tp(2, 2, (50.0f64).exp() / 2.0, (-50.0f64).exp());
        let law = BoundaryLaw::constant(1.0).unwrap();
        for seed in 0..20 {
            let c = sample(&w, &law, 3, seed).unwrap();
            assert!(c.values().iter().all(|&s| s == 0));
        }
    }
}
