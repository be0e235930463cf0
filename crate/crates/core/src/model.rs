//! Model specification, primitive sampling, and latent-index evaluation.
//!
//! The data-generating process: nodes carry positions X_i uniform on the
//! unit cube and attribute panels Z_it; each unordered pair carries i.i.d.
//! shocks zeta_ij,t. A link forms in period t when the latent index
//!
//! ```text
//! V(delta, s, z_i, z_j, zeta) = beta_s . s + beta_z . (z_i + z_j)
//!                               + intercept - delta + zeta
//! ```
//!
//! is strictly positive, where delta = r^{-1} ||X_i - X_j|| is the scaled
//! distance at sparsity scale r = (kappa / n_ref)^{1/d} and s is a bounded
//! strategic statistic of last period's network (or of the contemporaneous
//! network in the period-0 stability condition, see the formation module).
//!
//! All randomness is keyed per node id and per unordered pair (see [`crate::rng`]),
//! so primitives restricted to a node subset coincide bit-exactly with
//! primitives sampled for that subset.

use crate::error::{CoreError, Result};
use crate::net::Net;
use crate::rng::{keyed_uniform, Stream};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

// ==== Shock, position, and attribute laws ====================================

/// Distribution of the pairwise shocks zeta_ij,t.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ShockLaw {
    /// Standard logistic.
    Logistic,
    /// Centered normal with standard deviation `sigma`.
    Normal { sigma: f64 },
    /// Centered Laplace with scale `b`.
    Laplace { b: f64 },
    /// Unit-rate exponential on [0, infinity): survival exp(-z) for z >= 0.
    /// A diagnostic law: it makes the sparsity-limit integral closed-form.
    Exponential,
}

impl ShockLaw {
    /// P(zeta > z).
    pub fn survival(self, z: f64) -> f64 {
        match self {
            ShockLaw::Logistic => 1.0 / (1.0 + z.exp()),
            ShockLaw::Normal { sigma } => 1.0 - crate::numeric::normal_cdf(z / sigma),
            ShockLaw::Laplace { b } => {
                if z >= 0.0 {
                    0.5 * (-z / b).exp()
                } else {
                    1.0 - 0.5 * (z / b).exp()
                }
            }
            ShockLaw::Exponential => {
                if z <= 0.0 {
                    1.0
                } else {
                    (-z).exp()
                }
            }
        }
    }

    /// Quantile function on u in (0, 1).
    pub fn inverse_cdf(self, u: f64) -> f64 {
        debug_assert!(u > 0.0 && u < 1.0);
        match self {
            ShockLaw::Logistic => (u / (1.0 - u)).ln(),
            ShockLaw::Normal { sigma } => sigma * inverse_normal_cdf(u),
            ShockLaw::Laplace { b } => {
                if u < 0.5 {
                    b * (2.0 * u).ln()
                } else {
                    -b * (2.0 * (1.0 - u)).ln()
                }
            }
            ShockLaw::Exponential => -(-u).ln_1p(),
        }
    }

    fn validate(self) -> Result<()> {
        match self {
            ShockLaw::Normal { sigma } if !(sigma > 0.0 && sigma.is_finite()) => Err(
                CoreError::InvalidSpec(format!("normal shock sigma must be positive, got {sigma}")),
            ),
            ShockLaw::Laplace { b } if !(b > 0.0 && b.is_finite()) => Err(CoreError::InvalidSpec(
                format!("laplace shock scale must be positive, got {b}"),
            )),
            _ => Ok(()),
        }
    }
}

/// Standard normal quantile function.
pub fn probit(p: f64) -> f64 {
    inverse_normal_cdf(p)
}

/// Acklam's rational approximation to the standard normal quantile,
/// polished by one Halley step; relative error below 1e-13.
fn inverse_normal_cdf(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let x = if p < 0.02425 {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 0.97575 {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    // One Halley refinement against the forward CDF.
    let e = crate::numeric::normal_cdf(x) - p;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (x * x / 2.0).exp();
    x - u / (1.0 + x * u / 2.0)
}

/// Position law for X_i.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PositionLaw {
    /// Uniform on the unit cube [0,1]^d (density f = 1, so f_bar = 1).
    UniformUnitCube,
}

/// Attribute law for the panels Z_it (i.i.d. across nodes, periods, dims).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum AttributeLaw {
    /// Each component is Bernoulli(p).
    IidBernoulli { p: f64 },
    /// Each component is Uniform(0,1).
    IidUniform,
    /// No attributes (requires d_z = 0).
    None,
}

// ==== Strategic statistics ====================================================

/// Registry of built-in strategic statistics S_ij,t computed from last
/// period's network. All kinds depend on the network only through links
/// incident to i or j, and all are nondecreasing in links.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SKind {
    /// No strategic statistic (dimension 0).
    None,
    /// (A_ij,t-1): did the pair link last period.
    LaggedLink,
    /// (max_k A_ik,t-1 A_jk,t-1): any common neighbor last period.
    CommonNeighborMax,
    /// (sum_k A_ik,t-1 A_jk,t-1): number of common neighbors, clamped to the
    /// declared upper bound so the statistic stays inside s_bounds.
    CommonNeighborCount,
    /// (lagged link, common-neighbor max).
    LaggedLinkAndCommonMax,
    /// (lagged link, common-neighbor count): the transitivity panel used by
    /// the conditional-logit estimator.
    LaggedLinkAndCommonCount,
}

impl SKind {
    /// Number of components of S.
    pub fn dim(self) -> usize {
        match self {
            SKind::None => 0,
            SKind::LaggedLink | SKind::CommonNeighborMax | SKind::CommonNeighborCount => 1,
            SKind::LaggedLinkAndCommonMax | SKind::LaggedLinkAndCommonCount => 2,
        }
    }
}

/// Evaluate the strategic statistic for pair (i, j) on last period's network.
///
/// Outputs are clamped into the declared `s_bounds` (this only binds for the
/// count kinds when a node has more common neighbors than the declared cap).
pub fn eval_s(spec: &ModelSpec, a_prev: &Net, i: usize, j: usize) -> Vec<f64> {
    debug_assert!(i != j);
    let clamp = |v: f64, comp: usize| -> f64 {
        let (lo, hi) = spec.s_bounds[comp];
        v.clamp(lo, hi)
    };
    match spec.s_kind {
        SKind::None => Vec::new(),
        SKind::LaggedLink => vec![clamp(a_prev.has_edge(i, j) as u8 as f64, 0)],
        SKind::CommonNeighborMax => {
            vec![clamp(common_neighbor_max(a_prev, i, j), 0)]
        }
        SKind::CommonNeighborCount => {
            vec![clamp(common_neighbor_count(a_prev, i, j), 0)]
        }
        SKind::LaggedLinkAndCommonMax => vec![
            clamp(a_prev.has_edge(i, j) as u8 as f64, 0),
            clamp(common_neighbor_max(a_prev, i, j), 1),
        ],
        SKind::LaggedLinkAndCommonCount => vec![
            clamp(a_prev.has_edge(i, j) as u8 as f64, 0),
            clamp(common_neighbor_count(a_prev, i, j), 1),
        ],
    }
}

fn common_neighbor_max(net: &Net, i: usize, j: usize) -> f64 {
    let (small, other) = if net.degree(i) <= net.degree(j) { (i, j) } else { (j, i) };
    for &k in net.neighbors(small) {
        if k as usize != other && net.has_edge(k as usize, other) {
            return 1.0;
        }
    }
    0.0
}

fn common_neighbor_count(net: &Net, i: usize, j: usize) -> f64 {
    let (small, other) = if net.degree(i) <= net.degree(j) { (i, j) } else { (j, i) };
    let mut count = 0.0;
    for &k in net.neighbors(small) {
        if k as usize != other && net.has_edge(k as usize, other) {
            count += 1.0;
        }
    }
    count
}

// ==== Model specification ======================================================

/// Coefficient block of a latent index (used for both V and V0).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatentParams {
    /// Coefficients on the strategic statistic S (length = s_kind dimension).
    pub beta_s: Vec<f64>,
    /// Coefficients on the symmetric attribute feature z_i + z_j (length d_z).
    pub beta_z: Vec<f64>,
    /// Intercept.
    pub intercept: f64,
}

impl LatentParams {
    /// True when the block carries no strategic interaction.
    pub fn is_nonstrategic(&self) -> bool {
        self.beta_s.iter().all(|&b| b == 0.0)
    }
}

/// Which latent index to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    /// Dynamic index V (periods t >= 1).
    V,
    /// Period-0 index V0.
    V0,
}

/// Full parametric description of the data-generating process.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    /// Position dimension d >= 1.
    pub d: usize,
    /// Attribute dimension (0 allowed).
    pub d_z: usize,
    /// Last period T (T = 0 means a static, period-0-only model).
    #[serde(rename = "T")]
    pub t_max: usize,
    /// Sparsity constant kappa > 0.
    pub kappa: f64,
    /// Coefficients of the dynamic index V.
    pub v_params: LatentParams,
    /// Coefficients of the period-0 index V0.
    pub v0_params: LatentParams,
    /// Shock law (shared by all periods).
    pub shock_law: ShockLaw,
    /// Strategic statistic kind (shared by V and V0).
    pub s_kind: SKind,
    /// Position law.
    pub position_law: PositionLaw,
    /// Attribute law.
    pub attribute_law: AttributeLaw,
    /// Per-component (lo, hi) range of S; finite so sup/inf over s exist.
    pub s_bounds: Vec<(f64, f64)>,
}

impl ModelSpec {
    /// Validate all structural invariants; every public entry point that
    /// accepts a spec assumes this has passed.
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(CoreError::InvalidSpec("d must be >= 1".into()));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(CoreError::InvalidSpec(format!(
                "kappa must be positive, got {}",
                self.kappa
            )));
        }
        self.shock_law.validate()?;
        let s_dim = self.s_kind.dim();
        if self.s_bounds.len() != s_dim {
            return Err(CoreError::InvalidSpec(format!(
                "s_bounds has {} entries but s_kind has dimension {s_dim}",
                self.s_bounds.len()
            )));
        }
        for &(lo, hi) in &self.s_bounds {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(CoreError::InvalidSpec(format!(
                    "s_bounds entries must be finite with lo <= hi, got ({lo}, {hi})"
                )));
            }
        }
        for (name, block) in [("v_params", &self.v_params), ("v0_params", &self.v0_params)] {
            if block.beta_s.len() != s_dim {
                return Err(CoreError::InvalidSpec(format!(
                    "{name}.beta_s has {} entries but s_kind has dimension {s_dim}",
                    block.beta_s.len()
                )));
            }
            if block.beta_z.len() != self.d_z {
                return Err(CoreError::InvalidSpec(format!(
                    "{name}.beta_z has {} entries but d_z = {}",
                    block.beta_z.len(),
                    self.d_z
                )));
            }
            if !block.intercept.is_finite()
                || block.beta_s.iter().any(|b| !b.is_finite())
                || block.beta_z.iter().any(|b| !b.is_finite())
            {
                return Err(CoreError::InvalidSpec(format!("{name} has non-finite entries")));
            }
        }
        if matches!(self.attribute_law, AttributeLaw::None) && self.d_z != 0 {
            return Err(CoreError::InvalidSpec(
                "attribute_law none requires d_z = 0".into(),
            ));
        }
        if let AttributeLaw::IidBernoulli { p } = self.attribute_law {
            if !(0.0..=1.0).contains(&p) {
                return Err(CoreError::InvalidSpec(format!(
                    "bernoulli attribute p must be in [0,1], got {p}"
                )));
            }
        }
        Ok(())
    }

    /// Coefficient block for the requested index.
    pub fn params(&self, which: Which) -> &LatentParams {
        match which {
            Which::V => &self.v_params,
            Which::V0 => &self.v0_params,
        }
    }

    /// True when period 0 has no strategic interactions, i.e. the initial
    /// condition is dyadic and the equilibrium is unique.
    pub fn dyadic_initial(&self) -> bool {
        self.s_kind == SKind::None || self.v0_params.is_nonstrategic()
    }

    /// (inf_s beta_s.s, sup_s beta_s.s) over the declared bounds, by
    /// component-wise corner selection on the coefficient sign.
    pub fn strategic_range(&self, which: Which) -> (f64, f64) {
        let block = self.params(which);
        let mut lo_acc = 0.0;
        let mut hi_acc = 0.0;
        for (b, &(lo, hi)) in block.beta_s.iter().zip(&self.s_bounds) {
            let (a, c) = (b * lo, b * hi);
            lo_acc += a.min(c);
            hi_acc += a.max(c);
        }
        (lo_acc, hi_acc)
    }

    /// (inf, sup) of beta_z.(z_i + z_j) over the attribute support. Both
    /// built-in laws have per-component support inside [0, 1].
    pub fn attribute_range(&self, which: Which) -> (f64, f64) {
        let block = self.params(which);
        let mut lo_acc = 0.0;
        let mut hi_acc = 0.0;
        for &b in &block.beta_z {
            let (a, c) = (0.0f64, 2.0 * b);
            lo_acc += a.min(c);
            hi_acc += a.max(c);
        }
        (lo_acc, hi_acc)
    }
}

/// Sparsity scale r = (kappa / n_ref)^{1/d}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparsityScale {
    /// Reference node count used to set the scale.
    pub n_ref: usize,
    /// The scale itself.
    pub r: f64,
}

impl SparsityScale {
    /// Build the scale from a spec's kappa and dimension.
    pub fn new(spec: &ModelSpec, n_ref: usize) -> Result<Self> {
        if n_ref == 0 {
            return Err(CoreError::InvalidSpec("n_ref must be >= 1".into()));
        }
        Ok(Self {
            n_ref,
            r: (spec.kappa / n_ref as f64).powf(1.0 / spec.d as f64),
        })
    }
}

// ==== Primitives ================================================================

/// Source of the pairwise shocks: keyed on demand (the normal mode, O(1)
/// memory) or pinned explicitly (for hand-built scenarios).
#[derive(Clone, Debug)]
enum ZetaSource {
    Keyed { seed: u64, law: ShockLaw },
    Explicit(HashMap<(u64, u64, usize), f64>),
}

/// One realized draw of positions, attribute panels, and pair shocks on an
/// ordered node set. Immutable; subsettable by node set with bit-exact
/// shared randomness.
#[derive(Clone, Debug)]
pub struct Primitives {
    node_ids: Vec<u64>,
    d: usize,
    d_z: usize,
    t_max: usize,
    /// Row-major positions: x[i * d + k].
    x: Vec<f64>,
    /// Row-major attributes: z[(i * (t_max+1) + t) * d_z + k].
    z: Vec<f64>,
    zeta: ZetaSource,
    master_seed: u64,
}

impl Primitives {
    /// Number of nodes.
    pub fn n(&self) -> usize {
        self.node_ids.len()
    }

    /// The ordered (ascending) node ids.
    pub fn ids(&self) -> &[u64] {
        &self.node_ids
    }

    /// Master seed the draw was keyed on.
    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Last period.
    pub fn t_max(&self) -> usize {
        self.t_max
    }

    /// Position of the node at local index `i`.
    pub fn x(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    /// Attribute vector of node `i` in period `t`.
    pub fn z(&self, i: usize, t: usize) -> &[f64] {
        let base = (i * (self.t_max + 1) + t) * self.d_z;
        &self.z[base..base + self.d_z]
    }

    /// Shock for the unordered pair of local indices (i, j) in period t.
    pub fn zeta(&self, i: usize, j: usize, t: usize) -> f64 {
        debug_assert!(i != j);
        let (a, b) = (self.node_ids[i], self.node_ids[j]);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        match &self.zeta {
            ZetaSource::Keyed { seed, law } => {
                law.inverse_cdf(keyed_uniform(*seed, Stream::Shock, lo, hi, t as u64))
            }
            ZetaSource::Explicit(map) => *map
                .get(&(lo, hi, t))
                .unwrap_or_else(|| panic!("explicit zeta missing for pair ({lo},{hi}) period {t}")),
        }
    }

    /// Euclidean distance between nodes i and j (unscaled).
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        let (xi, xj) = (self.x(i), self.x(j));
        xi.iter()
            .zip(xj)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Restriction to a subset of ids: exactly the sub-rows of the full draw.
    pub fn subset(&self, ids: &[u64]) -> Primitives {
        let mut keep: Vec<u64> = ids.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let zw = (self.t_max + 1) * self.d_z;
        let mut x = Vec::with_capacity(keep.len() * self.d);
        let mut z = Vec::with_capacity(keep.len() * zw);
        for &id in &keep {
            let i = self
                .node_ids
                .binary_search(&id)
                .unwrap_or_else(|_| panic!("subset id {id} not present"));
            x.extend_from_slice(&self.x[i * self.d..(i + 1) * self.d]);
            z.extend_from_slice(&self.z[i * zw..(i + 1) * zw]);
        }
        Primitives {
            node_ids: keep,
            d: self.d,
            d_z: self.d_z,
            t_max: self.t_max,
            x,
            z,
            zeta: self.zeta.clone(),
            master_seed: self.master_seed,
        }
    }

    /// Hand-built primitives for pinned scenarios: explicit positions,
    /// attributes, and a complete shock table keyed by (min id, max id, t).
    pub fn from_parts(
        spec: &ModelSpec,
        node_ids: Vec<u64>,
        x: Vec<Vec<f64>>,
        z: Vec<Vec<Vec<f64>>>,
        zeta: HashMap<(u64, u64, usize), f64>,
    ) -> Result<Primitives> {
        spec.validate()?;
        let n = node_ids.len();
        if x.len() != n || (spec.d_z > 0 && z.len() != n) {
            return Err(CoreError::ContractViolation(
                "positions/attributes must have one row per node".into(),
            ));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| node_ids[i]);
        let mut ids = Vec::with_capacity(n);
        let mut xf = Vec::with_capacity(n * spec.d);
        let mut zf = Vec::with_capacity(n * (spec.t_max + 1) * spec.d_z);
        for &i in &order {
            ids.push(node_ids[i]);
            if x[i].len() != spec.d {
                return Err(CoreError::ContractViolation("position dimension mismatch".into()));
            }
            xf.extend_from_slice(&x[i]);
            for t in 0..=spec.t_max {
                if spec.d_z > 0 {
                    if z[i].len() != spec.t_max + 1 || z[i][t].len() != spec.d_z {
                        return Err(CoreError::ContractViolation(
                            "attribute panel shape mismatch".into(),
                        ));
                    }
                    zf.extend_from_slice(&z[i][t]);
                }
            }
        }
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(CoreError::ContractViolation("node ids must be distinct".into()));
        }
        Ok(Primitives {
            node_ids: ids,
            d: spec.d,
            d_z: spec.d_z,
            t_max: spec.t_max,
            x: xf,
            z: zf,
            zeta: ZetaSource::Explicit(zeta),
            master_seed: 0,
        })
    }
}

/// Sample primitives for the given ids. Deterministic in (spec, ids, seed);
/// values attached to an id or an unordered pair of ids do not depend on
/// which other ids are present.
pub fn sample_primitives(spec: &ModelSpec, node_ids: &[u64], seed: u64) -> Result<Primitives> {
    spec.validate()?;
    if node_ids.is_empty() {
        return Err(CoreError::ContractViolation("node_ids must be nonempty".into()));
    }
    let mut ids: Vec<u64> = node_ids.to_vec();
    ids.sort_unstable();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        return Err(CoreError::ContractViolation("node_ids must be distinct".into()));
    }
    let n = ids.len();
    let mut x = Vec::with_capacity(n * spec.d);
    for &id in &ids {
        for k in 0..spec.d {
            x.push(keyed_uniform(seed, Stream::Position, id, k as u64, 0));
        }
    }
    let mut z = Vec::with_capacity(n * (spec.t_max + 1) * spec.d_z);
    for &id in &ids {
        for t in 0..=spec.t_max {
            for k in 0..spec.d_z {
                let u = keyed_uniform(seed, Stream::Attribute, id, t as u64, k as u64);
                let v = match spec.attribute_law {
                    AttributeLaw::IidBernoulli { p } => (u < p) as u8 as f64,
                    AttributeLaw::IidUniform => u,
                    AttributeLaw::None => unreachable!("d_z = 0 under attribute_law none"),
                };
                z.push(v);
            }
        }
    }
    Ok(Primitives {
        node_ids: ids,
        d: spec.d,
        d_z: spec.d_z,
        t_max: spec.t_max,
        x,
        z,
        zeta: ZetaSource::Keyed { seed, law: spec.shock_law },
        master_seed: seed,
    })
}

// ==== Latent-index evaluation ===================================================

/// Evaluate the latent index. `s` must lie within the declared bounds.
pub fn eval_latent(
    spec: &ModelSpec,
    which: Which,
    dist_scaled: f64,
    s: &[f64],
    z_i: &[f64],
    z_j: &[f64],
    zeta: f64,
) -> Result<f64> {
    if s.len() != spec.s_kind.dim() {
        return Err(CoreError::ContractViolation(format!(
            "s has {} components, expected {}",
            s.len(),
            spec.s_kind.dim()
        )));
    }
    for (k, (&v, &(lo, hi))) in s.iter().zip(&spec.s_bounds).enumerate() {
        if v < lo || v > hi {
            return Err(CoreError::ContractViolation(format!(
                "s[{k}] = {v} outside declared bounds [{lo}, {hi}]"
            )));
        }
    }
    Ok(eval_latent_unchecked(spec, which, dist_scaled, s, z_i, z_j, zeta))
}

/// Latent index without the bounds check (hot path; formation calls this
/// with statistics produced by [`eval_s`], which are in-bounds by clamping).
#[inline]
pub fn eval_latent_unchecked(
    spec: &ModelSpec,
    which: Which,
    dist_scaled: f64,
    s: &[f64],
    z_i: &[f64],
    z_j: &[f64],
    zeta: f64,
) -> f64 {
    let block = spec.params(which);
    let mut idx = block.intercept - dist_scaled + zeta;
    for (b, v) in block.beta_s.iter().zip(s) {
        idx += b * v;
    }
    for (k, b) in block.beta_z.iter().enumerate() {
        idx += b * (z_i[k] + z_j[k]);
    }
    idx
}

/// Latent index at the s-corners minimizing/maximizing beta_s.s:
/// returns (inf over s, sup over s). Always inf <= sup.
pub fn eval_latent_extremes(
    spec: &ModelSpec,
    which: Which,
    dist_scaled: f64,
    z_i: &[f64],
    z_j: &[f64],
    zeta: f64,
) -> (f64, f64) {
    let block = spec.params(which);
    let mut base = block.intercept - dist_scaled + zeta;
    for (k, b) in block.beta_z.iter().enumerate() {
        base += b * (z_i[k] + z_j[k]);
    }
    let (lo, hi) = spec.strategic_range(which);
    (base + lo, base + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basic_spec() -> ModelSpec {
        ModelSpec {
            d: 1,
            d_z: 0,
            t_max: 1,
            kappa: 1.0,
            v_params: LatentParams { beta_s: vec![1.0], beta_z: vec![], intercept: 0.0 },
            v0_params: LatentParams { beta_s: vec![0.0], beta_z: vec![], intercept: 0.0 },
            shock_law: ShockLaw::Logistic,
            s_kind: SKind::CommonNeighborMax,
            position_law: PositionLaw::UniformUnitCube,
            attribute_law: AttributeLaw::None,
            s_bounds: vec![(0.0, 1.0)],
        }
    }

    #[test]
    fn validate_accepts_basic_spec() {
        basic_spec().validate().unwrap();
    }

    #[test]
    fn validate_rejects_bad_bounds() {
        let mut spec = basic_spec();
        spec.s_bounds = vec![(1.0, 0.0)];
        assert!(spec.validate().is_err());
        spec.s_bounds = vec![(0.0, f64::INFINITY)];
        assert!(spec.validate().is_err());
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let json = r#"{
            "d": 1, "d_z": 0, "T": 0, "kappa": 1.0,
            "v_params": {"beta_s": [], "beta_z": [], "intercept": 0.0},
            "v0_params": {"beta_s": [], "beta_z": [], "intercept": 0.0},
            "shock_law": "logistic", "s_kind": "none",
            "position_law": "uniform_unit_cube", "attribute_law": "none",
            "s_bounds": [], "mystery_key": 3
        }"#;
        assert!(serde_json::from_str::<ModelSpec>(json).is_err());
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec = basic_spec();
        let text = serde_json::to_string(&spec).unwrap();
        let back: ModelSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn shock_quantiles_invert_survival() {
        for law in [
            ShockLaw::Logistic,
            ShockLaw::Normal { sigma: 1.7 },
            ShockLaw::Laplace { b: 0.8 },
            ShockLaw::Exponential,
        ] {
            for &u in &[0.01, 0.2, 0.5, 0.8, 0.99] {
                let z = law.inverse_cdf(u);
                let s = law.survival(z);
                assert!((s - (1.0 - u)).abs() < 1e-9, "{law:?} u={u}: survival {s}");
            }
        }
    }

    #[test]
    fn exponential_survival_is_exp_of_minus_delta() {
        let law = ShockLaw::Exponential;
        assert_eq!(law.survival(-1.0), 1.0);
        assert_eq!(law.survival(0.0), 1.0);
        assert!((law.survival(2.0) - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn eval_latent_identity_case() {
        // All coefficients zero, distance zero, shock 0.5 -> 0.5.
        let mut spec = basic_spec();
        spec.v_params.beta_s = vec![0.0];
        let v = eval_latent(&spec, Which::V, 0.0, &[0.0], &[], &[], 0.5).unwrap();
        assert_eq!(v, 0.5);
    }

    #[test]
    fn eval_latent_linear_arithmetic() {
        // beta_s = (1), s = (1), dist = 2, everything else zero -> -1.
        let spec = basic_spec();
        let v = eval_latent(&spec, Which::V, 2.0, &[1.0], &[], &[], 0.0).unwrap();
        assert_eq!(v, -1.0);
    }

    #[test]
    fn eval_latent_rejects_out_of_bounds_s() {
        let spec = basic_spec();
        assert!(eval_latent(&spec, Which::V, 0.0, &[2.0], &[], &[], 0.0).is_err());
    }

    #[test]
    fn extremes_bracket_and_enumerate_corners() {
        // beta_s = (1, -1), bounds [0,1]^2: sup at s = (1,0), inf at (0,1).
        let mut spec = basic_spec();
        spec.s_kind = SKind::LaggedLinkAndCommonMax;
        spec.s_bounds = vec![(0.0, 1.0), (0.0, 1.0)];
        spec.v_params.beta_s = vec![1.0, -1.0];
        spec.v0_params.beta_s = vec![0.0, 0.0];
        spec.validate().unwrap();
        let (inf, sup) = eval_latent_extremes(&spec, Which::V, 0.0, &[], &[], 0.0);
        let at = |s: &[f64]| eval_latent(&spec, Which::V, 0.0, s, &[], &[], 0.0).unwrap();
        assert_eq!(sup, at(&[1.0, 0.0]));
        assert_eq!(inf, at(&[0.0, 1.0]));
        // Brackets every corner.
        for s in [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]] {
            let v = at(&s);
            assert!(inf <= v && v <= sup);
        }
    }

    #[test]
    fn extremes_collapse_without_strategic_terms() {
        let spec = basic_spec();
        let (inf, sup) = eval_latent_extremes(&spec, Which::V0, 1.0, &[], &[], 0.3);
        assert_eq!(inf, sup);
    }

    #[test]
    fn keyed_randomness_subset_identity() {
        let spec = basic_spec();
        let full = sample_primitives(&spec, &[1, 2, 3], 99).unwrap();
        let sub = sample_primitives(&spec, &[1, 3], 99).unwrap();
        assert_eq!(full.x(0), sub.x(0)); // node 1
        assert_eq!(full.x(2), sub.x(1)); // node 3
        // Pair (1,3) shock identical in both draws, every period.
        for t in 0..=1 {
            assert_eq!(full.zeta(0, 2, t), sub.zeta(0, 1, t));
        }
        // And subsetting the full draw matches resampling exactly.
        let restricted = full.subset(&[1, 3]);
        assert_eq!(restricted.x(1), sub.x(1));
        assert_eq!(restricted.zeta(0, 1, 1), sub.zeta(0, 1, 1));
    }

    #[test]
    fn degenerate_attribute_case() {
        let spec = basic_spec(); // d_z = 0, attribute_law none
        let prims = sample_primitives(&spec, &[5, 9], 1).unwrap();
        assert!(prims.z(0, 0).is_empty());
        // Shocks still populated.
        let _ = prims.zeta(0, 1, 0);
    }

    #[test]
    fn uniform_position_mean_centers() {
        let mut spec = basic_spec();
        spec.d = 2;
        let ids: Vec<u64> = (0..100_000).collect();
        let prims = sample_primitives(&spec, &ids, 7).unwrap();
        for k in 0..2 {
            let m = (0..prims.n()).map(|i| prims.x(i)[k]).sum::<f64>() / prims.n() as f64;
            assert!((m - 0.5).abs() < 0.005, "dim {k}: {m}");
        }
    }

    #[test]
    fn zeta_is_symmetric_in_the_pair() {
        let spec = basic_spec();
        let prims = sample_primitives(&spec, &[3, 8], 4).unwrap();
        assert_eq!(prims.zeta(0, 1, 0), prims.zeta(1, 0, 0));
    }

    #[test]
    fn inverse_normal_cdf_is_accurate() {
        for &p in &[1e-6, 0.01, 0.3, 0.5, 0.7, 0.99, 1.0 - 1e-6] {
            let z = inverse_normal_cdf(p);
            assert!((crate::numeric::normal_cdf(z) - p).abs() < 1e-12, "p={p}");
        }
    }
}
