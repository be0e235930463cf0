//! Node statistics and network moments.
//!
//! Every moment handled by the toolkit is an average of per-node statistics
//! psi_i computed from the network series (and, for some kinds, the node
//! attributes). All built-in statistics are permutation-equivariant in node
//! labels and local: psi_i depends on the series only through a bounded
//! graph neighborhood of i (see [`StatKind::locality`]), which is what makes
//! counterfactual regrowth on the stabilization sets exact.

use crate::error::{CoreError, Result};
use crate::formation::run_pipeline;
use crate::model::{eval_s, ModelSpec, Primitives, SparsityScale};
use crate::net::{Net, NetSeries};
use crate::numeric::{binomial, pairwise_sum};
use serde::{Deserialize, Serialize};

// ==== Count statistics =========================================================

/// Built-in per-node subnetwork counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CountKind {
    /// Period-t degree: sum_j A_ij,t.
    Degree { t: usize },
    /// Node share of the period-t link count: degree / 2, so the aggregate
    /// equals the number of links.
    Dyad { t: usize },
    /// Ordered-pair triangle incidences at period t:
    /// sum_{j != k, both != i} A_ij A_jk A_ik = 2 x (triangles containing i).
    Triangle { t: usize },
    /// Number of k-subsets of i's period-t neighbors: C(degree_i, k).
    KStar { k: usize, t: usize },
    /// Size of the K-neighborhood of i at period t (self included).
    KNeighSize { k: usize, t: usize },
}

impl CountKind {
    fn period(self) -> usize {
        match self {
            CountKind::Degree { t }
            | CountKind::Dyad { t }
            | CountKind::Triangle { t }
            | CountKind::KStar { t, .. }
            | CountKind::KNeighSize { t, .. } => t,
        }
    }

    fn validate(self, series: &NetSeries) -> Result<()> {
        let t = self.period();
        if t > series.t_max() {
            return Err(CoreError::ContractViolation(format!(
                "period {t} out of range (series has T = {})",
                series.t_max()
            )));
        }
        match self {
            CountKind::KStar { k, .. } | CountKind::KNeighSize { k, .. } if k == 0 => {
                Err(CoreError::ContractViolation("k must be >= 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// Graph-distance locality of the statistic.
    pub fn locality(self) -> usize {
        match self {
            CountKind::KNeighSize { k, .. } => k,
            _ => 1,
        }
    }
}

/// Per-node value of a count statistic.
pub fn count_stat(series: &NetSeries, kind: CountKind) -> Result<Vec<f64>> {
    kind.validate(series)?;
    let net = series.at(kind.period());
    let n = net.n();
    let out = (0..n)
        .map(|i| match kind {
            CountKind::Degree { .. } => net.degree(i) as f64,
            CountKind::Dyad { .. } => net.degree(i) as f64 / 2.0,
            CountKind::Triangle { .. } => {
                let nbrs = net.neighbors(i);
                let mut pairs = 0usize;
                for (a, &j) in nbrs.iter().enumerate() {
                    for &k in &nbrs[a + 1..] {
                        if net.has_edge(j as usize, k as usize) {
                            pairs += 1;
                        }
                    }
                }
                2.0 * pairs as f64
            }
            CountKind::KStar { k, .. } => binomial(net.degree(i), k),
            CountKind::KNeighSize { k, .. } => net.k_neighborhood(i, k).len() as f64,
        })
        .collect();
    Ok(out)
}

/// Dynamic K-neighborhood of node i: union over periods t of the
/// K-neighborhoods (at every period t') of i's period-t K-neighbors.
/// Always contains i; sorted ascending.
pub fn dynamic_kneigh(series: &NetSeries, i: usize, k: usize) -> Vec<u32> {
    let mut out: Vec<u32> = vec![i as u32];
    for t in 0..=series.t_max() {
        for j in series.at(t).k_neighborhood(i, k) {
            for tp in 0..=series.t_max() {
                out.extend(series.at(tp).k_neighborhood(j as usize, k));
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

// ==== Conditional-logit panel estimator ========================================

/// Per-dyad panel pieces of the conditional likelihood: the stable-dyad
/// indicator I, the transition sign G in {-1, +1}, and the regressor
/// difference H = (A_3 - A_0, common-neighbor count at 1 - at 0).
fn graham_pieces(series: &NetSeries, i: usize, j: usize) -> (bool, f64, [f64; 2]) {
    let (a0, a1, a2, a3) = (series.at(0), series.at(1), series.at(2), series.at(3));
    let informative = (a1.has_edge(i, j) as u8 + a2.has_edge(i, j) as u8) == 1;
    if !informative {
        return (false, 0.0, [0.0, 0.0]);
    }
    let g = a2.has_edge(i, j) as i8 as f64 - a1.has_edge(i, j) as i8 as f64;
    let common = |net: &Net| {
        let (small, other) = if net.degree(i) <= net.degree(j) { (i, j) } else { (j, i) };
        net.neighbors(small)
            .iter()
            .filter(|&&k| k as usize != other && net.has_edge(k as usize, other))
            .count() as f64
    };
    let h = [
        a3.has_edge(i, j) as i8 as f64 - a0.has_edge(i, j) as i8 as f64,
        common(a1) - common(a0),
    ];
    (true, g, h)
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn require_four_periods(series: &NetSeries) -> Result<()> {
    if series.t_max() < 3 {
        return Err(CoreError::ContractViolation(format!(
            "conditional-logit panel needs periods 0..3, series has T = {}",
            series.t_max()
        )));
    }
    Ok(())
}

/// Per-node score of the conditional log-likelihood at theta:
/// psi_i = sum_{j != i} grad_theta l_ij(theta), with
/// l_ij = I_ij (G H'theta - log(1 + exp(G H'theta))).
pub fn graham_score(series: &NetSeries, theta: &[f64]) -> Result<Vec<[f64; 2]>> {
    require_four_periods(series)?;
    if theta.len() != 2 {
        return Err(CoreError::ContractViolation("theta must have 2 components".into()));
    }
    let n = series.n();
    let mut out = vec![[0.0f64; 2]; n];
    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            let (informative, g, h) = graham_pieces(series, i, j);
            if !informative {
                continue;
            }
            let lin = g * (h[0] * theta[0] + h[1] * theta[1]);
            let w = g * (1.0 - sigmoid(lin));
            out[i][0] += w * h[0];
            out[i][1] += w * h[1];
        }
    }
    Ok(out)
}

/// Log-likelihood, gradient, and (negated) Hessian over unordered dyads.
fn graham_objective(series: &NetSeries, theta: &[f64; 2]) -> (f64, [f64; 2], [[f64; 2]; 2]) {
    let n = series.n();
    let mut ll = 0.0;
    let mut grad = [0.0f64; 2];
    let mut hess = [[0.0f64; 2]; 2];
    for i in 0..n {
        for j in (i + 1)..n {
            let (informative, g, h) = graham_pieces(series, i, j);
            if !informative {
                continue;
            }
            let lin = g * (h[0] * theta[0] + h[1] * theta[1]);
            let p = sigmoid(lin);
            ll += lin - (1.0 + lin.exp()).ln();
            let w = g * (1.0 - p);
            grad[0] += w * h[0];
            grad[1] += w * h[1];
            let q = p * (1.0 - p); // g^2 = 1 on informative dyads
            hess[0][0] -= q * h[0] * h[0];
            hess[0][1] -= q * h[0] * h[1];
            hess[1][0] -= q * h[1] * h[0];
            hess[1][1] -= q * h[1] * h[1];
        }
    }
    (ll, grad, hess)
}

/// Maximize the conditional log-likelihood by damped Newton steps.
///
/// Fails with [`CoreError::Degenerate`] when no informative dyad carries a
/// nonzero regressor, and with [`CoreError::Separation`] when the likelihood
/// is unbounded along some direction (iterates diverge).
pub fn graham_fit(series: &NetSeries) -> Result<Vec<f64>> {
    require_four_periods(series)?;
    let n = series.n();
    let mut any_signal = false;
    'outer: for i in 0..n {
        for j in (i + 1)..n {
            let (informative, _, h) = graham_pieces(series, i, j);
            if informative && (h[0] != 0.0 || h[1] != 0.0) {
                any_signal = true;
                break 'outer;
            }
        }
    }
    if !any_signal {
        return Err(CoreError::Degenerate);
    }
    let mut theta = [0.0f64; 2];
    let (mut ll, mut grad, mut hess) = graham_objective(series, &theta);
    for _ in 0..100 {
        let gnorm = (grad[0] * grad[0] + grad[1] * grad[1]).sqrt();
        if gnorm < 1e-8 {
            return Ok(theta.to_vec());
        }
        // Newton direction: solve (-H) d = grad; ridge the (negated) Hessian
        // if a direction is flat so the step stays finite.
        let (a, b, c, d) = (-hess[0][0], -hess[0][1], -hess[1][0], -hess[1][1]);
        let det = a * d - b * c;
        let (dir0, dir1) = if det > 1e-12 {
            ((d * grad[0] - b * grad[1]) / det, (-c * grad[0] + a * grad[1]) / det)
        } else {
            let ridge = 1e-6 + a.max(d);
            (grad[0] / ridge, grad[1] / ridge)
        };
        // Damping: halve until the likelihood increases.
        let mut step = 1.0f64;
        loop {
            let cand = [theta[0] + step * dir0, theta[1] + step * dir1];
            let (cll, cgrad, chess) = graham_objective(series, &cand);
            // Tolerate fp-noise-sized decreases: near the optimum the true
            // gain is below summation noise and the full Newton step must
            // still be taken.
            if cll >= ll - 1e-9 * (1.0 + ll.abs()) || step < 1e-12 {
                theta = cand;
                ll = cll;
                grad = cgrad;
                hess = chess;
                break;
            }
            step *= 0.5;
        }
        if theta[0].abs() > 1e3 || theta[1].abs() > 1e3 {
            return Err(CoreError::Separation);
        }
    }
    Err(CoreError::Separation)
}

// ==== Average structural function ==============================================

/// Target value for the ASF partition, laid out as (S, Z_i, Z_j).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsfInput {
    /// Target vector of length s_dim + 2 * d_z.
    pub s_target: Vec<f64>,
}

/// Tolerance for "equals the target" on continuous components; discrete
/// components are integers, so this never misclassifies them.
const ASF_EQ_TOL: f64 = 1e-9;

fn asf_hit(spec: &ModelSpec, prims: &Primitives, series: &NetSeries, target: &[f64], i: usize, j: usize, t: usize) -> bool {
    let s = eval_s(spec, series.at(t - 1), i, j);
    let s_dim = s.len();
    for (k, &v) in s.iter().enumerate() {
        if (v - target[k]).abs() > ASF_EQ_TOL {
            return false;
        }
    }
    let (zi, zj) = (prims.z(i, t), prims.z(j, t));
    for k in 0..spec.d_z {
        if (zi[k] - target[s_dim + k]).abs() > ASF_EQ_TOL
            || (zj[k] - target[s_dim + spec.d_z + k]).abs() > ASF_EQ_TOL
        {
            return false;
        }
    }
    true
}

/// Per-node ASF statistic: for each node i, the three sums over j != i of
/// (first-hit linked indicator, never-hit indicator, initial link), where the
/// first-hit period is the first t in 1..=T at which (S_ij,t, Z_it, Z_jt)
/// equals the target. Both first components are gated on A_ij,0 = 1.
pub fn asf_stats(
    spec: &ModelSpec,
    prims: &Primitives,
    series: &NetSeries,
    input: &AsfInput,
) -> Result<Vec<[f64; 3]>> {
    if series.t_max() < 1 {
        return Err(CoreError::ContractViolation("ASF needs T >= 1".into()));
    }
    let expect = spec.s_kind.dim() + 2 * spec.d_z;
    if input.s_target.len() != expect {
        return Err(CoreError::ContractViolation(format!(
            "s_target has {} components, expected {expect} (S, Z_i, Z_j)",
            input.s_target.len()
        )));
    }
    let n = series.n();
    let a0 = series.at(0);
    let mut out = vec![[0.0f64; 3]; n];
    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            if !a0.has_edge(i, j) {
                continue; // all three components carry the A_ij,0 factor
            }
            out[i][2] += 1.0;
            let first_hit = (1..=series.t_max())
                .find(|&t| asf_hit(spec, prims, series, &input.s_target, i, j, t));
            match first_hit {
                Some(t) => out[i][0] += series.at(t).has_edge(i, j) as u8 as f64,
                None => out[i][1] += 1.0,
            }
        }
    }
    Ok(out)
}

/// Bounds on the conditional ASF from aggregated per-node statistics:
/// mu_lower = sum psi1 / sum psi3, mu_upper = (sum psi1 + sum psi2) / sum psi3.
pub fn asf_bounds(stats: &[[f64; 3]]) -> Result<(f64, f64)> {
    let s1 = pairwise_sum(&stats.iter().map(|s| s[0]).collect::<Vec<_>>());
    let s2 = pairwise_sum(&stats.iter().map(|s| s[1]).collect::<Vec<_>>());
    let s3 = pairwise_sum(&stats.iter().map(|s| s[2]).collect::<Vec<_>>());
    if s3 == 0.0 {
        return Err(CoreError::ZeroDenominator("no initial links".into()));
    }
    Ok((s1 / s3, (s1 + s2) / s3))
}

// ==== Unified statistic registry ===============================================

/// Every per-node statistic the pipeline-level tools (stabilization
/// verification, CLT replication, add-one costs) can compute.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StatKind {
    /// A subnetwork count.
    Count(CountKind),
    /// Conditional-logit score at a fixed theta.
    GrahamScore { theta: Vec<f64> },
    /// ASF components at a fixed target.
    Asf(AsfInput),
}

impl StatKind {
    /// Number of components per node.
    pub fn dim(&self) -> usize {
        match self {
            StatKind::Count(_) => 1,
            StatKind::GrahamScore { .. } => 2,
            StatKind::Asf(_) => 3,
        }
    }

    /// Declared graph-distance locality K.
    pub fn locality(&self) -> usize {
        match self {
            StatKind::Count(kind) => kind.locality(),
            StatKind::GrahamScore { .. } | StatKind::Asf(_) => 1,
        }
    }
}

/// Per-node statistic matrix (n rows, `kind.dim()` columns).
pub fn node_stats(
    spec: &ModelSpec,
    prims: &Primitives,
    series: &NetSeries,
    kind: &StatKind,
) -> Result<Vec<Vec<f64>>> {
    match kind {
        StatKind::Count(ck) => {
            Ok(count_stat(series, *ck)?.into_iter().map(|v| vec![v]).collect())
        }
        StatKind::GrahamScore { theta } => {
            Ok(graham_score(series, theta)?.into_iter().map(|v| v.to_vec()).collect())
        }
        StatKind::Asf(input) => {
            Ok(asf_stats(spec, prims, series, input)?.into_iter().map(|v| v.to_vec()).collect())
        }
    }
}

/// Componentwise aggregate sum_i psi_i.
pub fn aggregate(stats: &[Vec<f64>]) -> Vec<f64> {
    if stats.is_empty() {
        return Vec::new();
    }
    let dim = stats[0].len();
    (0..dim)
        .map(|k| pairwise_sum(&stats.iter().map(|row| row[k]).collect::<Vec<_>>()))
        .collect()
}

// ==== Add-one cost =============================================================

/// Aggregate counterfactual impact of inserting one extra node: the extended
/// primitives contain the original nodes plus one more (the largest id);
/// the cost is the new node's own statistic plus the induced change in every
/// incumbent's statistic, computed by two full pipeline runs that share
/// primitives.
pub fn add_one_cost(
    spec: &ModelSpec,
    prims_extended: &Primitives,
    scale: SparsityScale,
    kind: &StatKind,
) -> Result<Vec<f64>> {
    let n_ext = prims_extended.n();
    if n_ext < 2 {
        return Err(CoreError::ContractViolation(
            "extended primitives must contain at least two nodes".into(),
        ));
    }
    let base_ids: Vec<u64> = prims_extended.ids()[..n_ext - 1].to_vec();
    let prims_base = prims_extended.subset(&base_ids);
    let series_ext = run_pipeline(spec, prims_extended, scale)?;
    let series_base = run_pipeline(spec, &prims_base, scale)?;
    let stats_ext = node_stats(spec, prims_extended, &series_ext, kind)?;
    let stats_base = node_stats(spec, &prims_base, &series_base, kind)?;
    let dim = kind.dim();
    let mut xi = stats_ext[n_ext - 1].clone();
    for i in 0..n_ext - 1 {
        for k in 0..dim {
            xi[k] += stats_ext[i][k] - stats_base[i][k];
        }
    }
    Ok(xi)
}

// ==== Moment inequalities ======================================================

/// Node-level moment G_i - H_i for one-sided moment-inequality testing:
/// G_i is a built-in count statistic, H_i a user-supplied per-node function
/// (typically a model-implied expectation at a candidate parameter).
pub fn moment_inequality_stat<H>(
    series: &NetSeries,
    g_kind: CountKind,
    h: H,
) -> Result<Vec<f64>>
where
    H: Fn(usize) -> f64,
{
    let g = count_stat(series, g_kind)?;
    Ok(g.iter().enumerate().map(|(i, &gi)| gi - h(i)).collect())
}
