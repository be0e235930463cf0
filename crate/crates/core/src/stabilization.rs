//! Stabilization sets: the node sets J_i on which regrowing the whole
//! pipeline reproduces psi_i exactly, their radii, the verification oracle,
//! exponential-tail diagnostics, and the sparsity check.
//!
//! The construction works on "possible" networks M_t (links that could form
//! for some value of the strategic statistic). Influence on psi_i can only
//! travel through possible links, so chasing possible links backward in time
//! from i's K-neighborhood — and closing under strategic neighborhoods at
//! period 0 — yields a set whose regrown subnetwork agrees with the full
//! network on everything psi_i can see.

use crate::error::{CoreError, Result};
use crate::formation::{classify_robustness, pair_rest, run_pipeline, scan_pairs, strategic_neighborhoods};
use crate::model::{ModelSpec, Primitives, SparsityScale, Which};
use crate::moments::{node_stats, StatKind};
use crate::net::Net;
use crate::numeric::{mean, ols_line, pairwise_sum, quantile};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeSet;

/// Per-node stabilization record.
#[derive(Clone, Debug, Serialize)]
pub struct StabRecord {
    /// Node id.
    pub node: u64,
    /// Stabilization set (node ids, ascending; contains `node`).
    pub j: Vec<u64>,
    /// |J|.
    pub j_size: usize,
    /// Scaled radius max_{j in J} r^{-1} ||X_node - X_j||.
    pub radius: f64,
    /// Whether counterfactual regrowth reproduced psi exactly.
    pub verified: bool,
}

/// Build the per-period "possible" networks M_t (sup-corner indices > 0)
/// and their union. Realized networks always satisfy A_t subseteq M_t.
pub fn build_m_networks(
    spec: &ModelSpec,
    prims: &Primitives,
    scale: SparsityScale,
) -> (Vec<Net>, Net) {
    let n = prims.n();
    let mut nets = Vec::with_capacity(prims.t_max() + 1);
    let (_, s_hi_0) = spec.strategic_range(Which::V0);
    nets.push(scan_pairs(n, |i, j| {
        pair_rest(spec, Which::V0, prims, scale, i, j, 0) + s_hi_0 > 0.0
    }));
    let (_, s_hi) = spec.strategic_range(Which::V);
    for t in 1..=prims.t_max() {
        nets.push(scan_pairs(n, |i, j| {
            pair_rest(spec, Which::V, prims, scale, i, j, t) + s_hi > 0.0
        }));
    }
    let mut union = nets[0].clone();
    for net in &nets[1..] {
        union = union.union(net);
    }
    (nets, union)
}

/// Cached context for building many J_i on one instance: the possible
/// networks and the period-0 strategic neighborhoods C_j^+.
pub struct StabContext<'a> {
    prims: &'a Primitives,
    /// M_t for t = 0..=T.
    pub m_nets: Vec<Net>,
    /// Componentwise union of the M_t.
    pub m_union: Net,
    /// C_j^+ per node (local indices, sorted).
    pub cplus: Vec<Vec<u32>>,
}

impl<'a> StabContext<'a> {
    /// Precompute the possible networks and strategic neighborhoods.
    pub fn new(spec: &'a ModelSpec, prims: &'a Primitives, scale: SparsityScale) -> Self {
        let (m_nets, m_union) = build_m_networks(spec, prims, scale);
        let decomp = classify_robustness(spec, prims, scale);
        let cplus = strategic_neighborhoods(&decomp);
        StabContext { prims, m_nets, m_union, cplus }
    }

    /// Per-node, per-period influence set: the nodes whose primitives can
    /// affect j's period-t links. Built by chasing possible links backward
    /// in time from j's period-t K-neighborhood, one step per period, and
    /// closing under strategic neighborhoods at period 0.
    fn influence_set(&self, j: usize, t: usize, k: usize) -> BTreeSet<u32> {
        let mut acc: BTreeSet<u32> = BTreeSet::new();
        if t == 0 {
            acc.extend(self.cplus[j].iter().copied());
            return acc;
        }
        let mut cur: Vec<u32> = self.m_nets[t].k_neighborhood(j, k);
        acc.extend(cur.iter().copied());
        for s in (1..t).rev() {
            let mut next = BTreeSet::new();
            for &u in &cur {
                next.extend(self.m_nets[s].k_neighborhood(u as usize, 1));
            }
            acc.extend(next.iter().copied());
            cur = next.into_iter().collect();
        }
        // cur now holds the period-1 layer; period 0 closes under C^+.
        for &u in &cur {
            acc.extend(self.cplus[u as usize].iter().copied());
        }
        acc
    }

    /// The stabilization set J_i for a statistic with locality K
    /// (local indices, ascending; always contains i).
    pub fn construct_ji(&self, i: usize, k: usize) -> Vec<u32> {
        let t_max = self.prims.t_max();
        let mut j_set: BTreeSet<u32> = BTreeSet::new();
        j_set.insert(i as u32);
        for t in 0..=t_max {
            for j in self.m_nets[t].k_neighborhood(i, k) {
                for tp in 0..=t_max {
                    j_set.extend(self.influence_set(j as usize, tp, k));
                }
            }
        }
        j_set.into_iter().collect()
    }
}

/// One-shot J_i construction (builds a fresh context; prefer
/// [`StabContext`] when constructing many sets on one instance).
pub fn construct_ji(
    spec: &ModelSpec,
    prims: &Primitives,
    scale: SparsityScale,
    i: usize,
    k: usize,
) -> Vec<u32> {
    StabContext::new(spec, prims, scale).construct_ji(i, k)
}

/// Scaled radius of a node set around i: max_{j in set} r^{-1}||X_i - X_j||.
pub fn radius(prims: &Primitives, scale: SparsityScale, i: usize, set: &[u32]) -> f64 {
    set.iter()
        .map(|&j| prims.dist(i, j as usize) / scale.r)
        .fold(0.0, f64::max)
}

/// Regrow the pipeline on the subsetted primitives of J_i and compare psi_i
/// with the full-network value. Returns (psi_full, psi_regrown, equal).
/// Equality is exact: the theory promises almost-sure agreement, so any
/// mismatch is reported, never smoothed over.
pub fn verify_stabilization(
    spec: &ModelSpec,
    prims: &Primitives,
    scale: SparsityScale,
    i: usize,
    k: usize,
    kind: &StatKind,
) -> Result<(Vec<f64>, Vec<f64>, bool)> {
    let ctx = StabContext::new(spec, prims, scale);
    let ji = ctx.construct_ji(i, k);
    verify_on_subset(spec, prims, scale, i, &ji, kind)
}

/// Compare psi_i on the full instance against regrowth on an explicit node
/// subset (local indices; must contain i).
pub fn verify_on_subset(
    spec: &ModelSpec,
    prims: &Primitives,
    scale: SparsityScale,
    i: usize,
    subset: &[u32],
    kind: &StatKind,
) -> Result<(Vec<f64>, Vec<f64>, bool)> {
    let series = run_pipeline(spec, prims, scale)?;
    let psi_full = node_stats(spec, prims, &series, kind)?[i].clone();
    let ids: Vec<u64> = subset.iter().map(|&v| prims.ids()[v as usize]).collect();
    let sub_prims = prims.subset(&ids);
    let sub_series = run_pipeline(spec, &sub_prims, scale)?;
    let local = sub_prims
        .ids()
        .binary_search(&prims.ids()[i])
        .map_err(|_| CoreError::ContractViolation("subset must contain node i".into()))?;
    let psi_sub = node_stats(spec, &sub_prims, &sub_series, kind)?[local].clone();
    let equal = psi_full == psi_sub;
    Ok((psi_full, psi_sub, equal))
}

/// Build stabilization records (J, size, radius, verified) for every node,
/// in parallel.
pub fn stab_report(
    spec: &ModelSpec,
    prims: &Primitives,
    scale: SparsityScale,
    k: usize,
    kind: &StatKind,
) -> Result<Vec<StabRecord>> {
    let ctx = StabContext::new(spec, prims, scale);
    let series = run_pipeline(spec, prims, scale)?;
    let full_stats = node_stats(spec, prims, &series, kind)?;
    (0..prims.n())
        .into_par_iter()
        .map(|i| {
            let ji = ctx.construct_ji(i, k);
            let rad = radius(prims, scale, i, &ji);
            let ids: Vec<u64> = ji.iter().map(|&v| prims.ids()[v as usize]).collect();
            let sub_prims = prims.subset(&ids);
            let sub_series = run_pipeline(spec, &sub_prims, scale)?;
            let local = sub_prims.ids().binary_search(&prims.ids()[i]).expect("i in J_i");
            let psi_sub = node_stats(spec, &sub_prims, &sub_series, kind)?[local].clone();
            Ok(StabRecord {
                node: prims.ids()[i],
                j: ids,
                j_size: ji.len(),
                radius: rad,
                verified: psi_sub == full_stats[i],
            })
        })
        .collect()
}

// ==== Exponential-tail diagnostics =============================================

/// Exponential tail fit of nonnegative samples: log empirical survival
/// regressed on a percentile-spanning threshold grid.
#[derive(Clone, Debug, Serialize)]
pub struct TailFit {
    /// Threshold grid (50th-99th percentile span, deduplicated).
    pub thresholds: Vec<f64>,
    /// log empirical survival at each threshold.
    pub log_survival: Vec<f64>,
    /// Fitted slope (exponential rate; negative under exponential tails).
    pub slope: f64,
    /// 95% confidence interval for the slope.
    pub slope_ci: (f64, f64),
    /// Number of samples.
    pub n_samples: usize,
    /// True when the sample carries too little threshold variation to fit
    /// (e.g. constant samples).
    pub degenerate: bool,
}

impl TailFit {
    /// Negative slope with CI excluding 0: consistent with exponential tails.
    pub fn exponential_tail_consistent(&self) -> bool {
        !self.degenerate && self.slope < 0.0 && self.slope_ci.1 < 0.0
    }
}

/// Fit an exponential tail to nonnegative samples (needs >= 500).
pub fn tail_fit(samples: &[f64]) -> Result<TailFit> {
    const NEED: usize = 500;
    if samples.len() < NEED {
        return Err(CoreError::InsufficientData { need: NEED, got: samples.len() });
    }
    let n = samples.len();
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    const GRID: usize = 20;
    let mut thresholds: Vec<f64> = (0..GRID)
        .map(|k| quantile(&sorted, 0.50 + 0.49 * k as f64 / (GRID - 1) as f64))
        .collect();
    thresholds.dedup();
    let log_survival: Vec<f64> = thresholds
        .iter()
        .map(|&w| {
            // Strict survival count via binary search on the sorted sample.
            let above = n - sorted.partition_point(|&x| x <= w);
            (above.max(1) as f64 / n as f64).ln()
        })
        .collect();
    if thresholds.len() < 3 || thresholds.last() == thresholds.first() {
        return Ok(TailFit {
            thresholds,
            log_survival,
            slope: 0.0,
            slope_ci: (0.0, 0.0),
            n_samples: n,
            degenerate: true,
        });
    }
    let (_, slope, se) = ols_line(&thresholds, &log_survival);
    Ok(TailFit {
        thresholds,
        log_survival,
        slope,
        slope_ci: (slope - 1.96 * se, slope + 1.96 * se),
        n_samples: n,
        degenerate: false,
    })
}

// ==== Sparsity diagnostic ======================================================

/// Monte Carlo mean degrees across a grid of network sizes, with the
/// analytic limiting expected degree when the model admits one in closed
/// form (pure-distance model with Exp(1) shocks in d = 1: limit 2 kappa).
#[derive(Clone, Debug, Serialize)]
pub struct SparsityReport {
    /// (n, per-period mean degree) per grid point.
    pub per_n: Vec<(usize, Vec<f64>)>,
    /// Closed-form limit of the expected degree, when available.
    pub analytic_limit: Option<f64>,
}

/// True when the model is the pure-distance one whose limiting expected
/// degree is exactly 2 kappa: d = 1, no strategic or attribute terms, zero
/// intercepts, Exp(1) shocks (survival e^{-delta}), uniform positions.
fn pure_distance_limit(spec: &ModelSpec) -> Option<f64> {
    let dyadic = spec.v_params.is_nonstrategic() && spec.v0_params.is_nonstrategic();
    let plain = |p: &crate::model::LatentParams| {
        p.intercept == 0.0 && p.beta_z.iter().all(|&b| b == 0.0)
    };
    if spec.d == 1
        && dyadic
        && plain(&spec.v_params)
        && plain(&spec.v0_params)
        && spec.shock_law == crate::model::ShockLaw::Exponential
    {
        // P(link) = P(zeta > delta) = e^{-delta}; kappa * int e^{-|u|} du = 2 kappa.
        Some(2.0 * spec.kappa)
    } else {
        None
    }
}

/// Monte Carlo sparsity check over ascending n.
pub fn sparsity_check(
    spec: &ModelSpec,
    n_grid: &[usize],
    reps: usize,
    seed: u64,
) -> Result<SparsityReport> {
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CoreError::ContractViolation("n_grid must be strictly ascending".into()));
    }
    let mut per_n = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        // Per-rep, per-period mean degree; reps independent and seeded apart.
        let rep_rows: Vec<Vec<f64>> = (0..reps as u64)
            .into_par_iter()
            .map(|rep| {
                let (_, series, _) =
                    crate::formation::simulate(spec, n, n, false, seed ^ (rep.wrapping_mul(0x9E37) + 1))?;
                Ok((0..=series.t_max())
                    .map(|t| 2.0 * series.at(t).edge_count() as f64 / n as f64)
                    .collect())
            })
            .collect::<Result<_>>()?;
        let means: Vec<f64> = (0..=spec.t_max)
            .map(|t| mean(&rep_rows.iter().map(|r| r[t]).collect::<Vec<_>>()))
            .collect();
        per_n.push((n, means));
    }
    Ok(SparsityReport { per_n, analytic_limit: pure_distance_limit(spec) })
}

/// Aggregate mean degree across periods and grid points (no-trend check
/// helper: slope of mean degree against log n).
pub fn degree_trend(report: &SparsityReport) -> f64 {
    let x: Vec<f64> = report.per_n.iter().map(|(n, _)| (*n as f64).ln()).collect();
    let y: Vec<f64> = report
        .per_n
        .iter()
        .map(|(_, degs)| pairwise_sum(degs) / degs.len() as f64)
        .collect();
    if x.len() < 2 {
        return 0.0;
    }
    if x.len() == 2 {
        return (y[1] - y[0]) / (x[1] - x[0]);
    }
    let (_, slope, _) = ols_line(&x, &y);
    slope
}
