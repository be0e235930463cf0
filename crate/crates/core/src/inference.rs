//! Inference tools: Monte Carlo verification of the normal limit of
//! aggregated node statistics, the Poissonization variance decomposition,
//! and finite-group tests (sign-flip randomization and the robust t-test
//! on per-network means).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{CoreError, Result};
use crate::formation::simulate;
use crate::model::{sample_primitives, ModelSpec, SparsityScale};
use crate::moments::{add_one_cost, aggregate, node_stats, StatKind};
use crate::numeric::{ks_distance, ks_pvalue, mean, normal_cdf, variance};
use crate::rng::{keyed_u64, Stream, StreamRng};

/// Variance below this (relative to the squared mean) marks a component as
/// degenerate: the statistic is constant across replications and has no
/// nontrivial normal limit to compare against.
const DEGENERATE_VAR: f64 = 1e-18;

fn rep_seed(seed: u64, tag: u64, rep: u64) -> u64 {
    keyed_u64(seed, Stream::Diagnostic, tag, rep, 0)
}

// ==== Monte Carlo CLT check ====================================================

/// Cross-replication summary of the scaled aggregate statistic
/// n^{-1/2} sum_i psi_i.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct McReport {
    pub stat_kind: StatKind,
    pub n: usize,
    pub reps: usize,
    /// Per-rep aggregated moment vectors (reps rows, dim columns).
    pub moment_draws: Vec<Vec<f64>>,
    /// Draws studentized by the cross-replication mean and standard
    /// deviation (zero for degenerate components).
    pub standardized: Vec<Vec<f64>>,
    /// Cross-replication covariance matrix of the draws (dim x dim).
    pub variance_estimate: Vec<Vec<f64>>,
    /// KS distance to the standard normal per component (NaN if degenerate).
    pub ks_stat: Vec<f64>,
    /// Asymptotic KS p-value per component (NaN if degenerate).
    pub ks_pvalue: Vec<f64>,
    /// Zero-variance flag per component.
    pub degenerate: Vec<bool>,
}

impl McReport {
    /// (theoretical quantile, empirical quantile) pairs for a component,
    /// suitable for external Q-Q plotting.
    pub fn qq_pairs(&self, comp: usize) -> Vec<(f64, f64)> {
        let mut emp: Vec<f64> = self.standardized.iter().map(|row| row[comp]).collect();
        emp.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let m = emp.len() as f64;
        emp.iter()
            .enumerate()
            .map(|(r, &q)| (crate::model::probit((r as f64 + 0.5) / m), q))
            .collect()
    }
}

/// Simulates `reps` independent networks, aggregates the statistic into
/// n^{-1/2} sum_i psi_i per replication, studentizes across replications,
/// and compares each component to the standard normal by a
/// Kolmogorov-Smirnov distance.
pub fn mc_clt(
    spec: &ModelSpec,
    n: usize,
    reps: usize,
    kind: &StatKind,
    seed: u64,
) -> Result<McReport> {
    if reps < 2 {
        return Err(CoreError::InsufficientData { need: 2, got: reps });
    }
    let dim = kind.dim();
    let scale_inv = 1.0 / (n as f64).sqrt();
    let moment_draws: Vec<Vec<f64>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let (prims, series, _) = simulate(spec, n, n, false, rep_seed(seed, 0xC17, rep as u64))?;
            let stats = node_stats(spec, &prims, &series, kind)?;
            Ok(aggregate(&stats).iter().map(|v| v * scale_inv).collect())
        })
        .collect::<Result<_>>()?;

    let col = |k: usize| moment_draws.iter().map(|row| row[k]).collect::<Vec<f64>>();
    let means: Vec<f64> = (0..dim).map(|k| mean(&col(k))).collect();
    let mut variance_estimate = vec![vec![0.0; dim]; dim];
    for a in 0..dim {
        for b in a..dim {
            let cov = moment_draws
                .iter()
                .map(|row| (row[a] - means[a]) * (row[b] - means[b]))
                .sum::<f64>()
                / (reps - 1) as f64;
            variance_estimate[a][b] = cov;
            variance_estimate[b][a] = cov;
        }
    }
    let degenerate: Vec<bool> = (0..dim)
        .map(|k| variance_estimate[k][k] <= DEGENERATE_VAR * (1.0 + means[k] * means[k]))
        .collect();
    let standardized: Vec<Vec<f64>> = moment_draws
        .iter()
        .map(|row| {
            (0..dim)
                .map(|k| {
                    if degenerate[k] {
                        0.0
                    } else {
                        (row[k] - means[k]) / variance_estimate[k][k].sqrt()
                    }
                })
                .collect()
        })
        .collect();
    let mut ks_stat = vec![f64::NAN; dim];
    let mut ks_pv = vec![f64::NAN; dim];
    for k in 0..dim {
        if !degenerate[k] {
            let z: Vec<f64> = standardized.iter().map(|row| row[k]).collect();
            ks_stat[k] = ks_distance(&z, normal_cdf);
            ks_pv[k] = ks_pvalue(ks_stat[k], reps);
        }
    }
    Ok(McReport {
        stat_kind: kind.clone(),
        n,
        reps,
        moment_draws,
        standardized,
        variance_estimate,
        ks_stat,
        ks_pvalue: ks_pv,
        degenerate,
    })
}

// ==== Poissonization variance decomposition ====================================

/// Comparison of the fixed-n variance of n^{-1/2} sum_i psi_i with the
/// Poissonized variance minus the squared mean add-one cost.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PoissonDecomp {
    pub stat_kind: StatKind,
    pub n: usize,
    pub reps: usize,
    /// Fixed-n variance per component.
    pub sigma2_binomial: Vec<f64>,
    /// Poissonized variance per component.
    pub sigma2_poisson: Vec<f64>,
    /// Mean add-one cost per component, at Poisson(n) node counts.
    pub alpha: Vec<f64>,
    /// sigma2_poisson - alpha^2 * s2_N / n, clamped at zero, where s2_N is
    /// the sample variance of the Poisson node counts. The factor s2_N / n
    /// converges to 1 and makes the constant-statistic identity exact.
    pub corrected: Vec<f64>,
    /// |sigma2_binomial - corrected| / sigma2_binomial per component
    /// (absolute difference when the fixed-n variance is ~0).
    pub rel_gap: Vec<f64>,
}

/// Estimates both sides of the variance decomposition
/// sigma^2 = sigma_tilde^2 - alpha^2 by Monte Carlo: fixed-n replications
/// for the left side, Poissonized replications plus add-one costs at the
/// realized Poisson sizes for the right side.
pub fn poisson_variance_decomp(
    spec: &ModelSpec,
    n: usize,
    reps: usize,
    kind: &StatKind,
    seed: u64,
) -> Result<PoissonDecomp> {
    if reps < 2 {
        return Err(CoreError::InsufficientData { need: 2, got: reps });
    }
    let dim = kind.dim();
    let scale_inv = 1.0 / (n as f64).sqrt();
    let scale = SparsityScale::new(spec, n)?;

    let binom: Vec<Vec<f64>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let (prims, series, _) = simulate(spec, n, n, false, rep_seed(seed, 0xB10, rep as u64))?;
            let stats = node_stats(spec, &prims, &series, kind)?;
            Ok(aggregate(&stats).iter().map(|v| v * scale_inv).collect())
        })
        .collect::<Result<_>>()?;

    // Each Poissonized rep yields the scaled aggregate, the realized node
    // count, and the add-one cost from inserting node id N on top of the
    // same primitives.
    let pois: Vec<(Vec<f64>, f64, Vec<f64>)> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let rs = rep_seed(seed, 0xF01, rep as u64);
            let (prims, series, _) = simulate(spec, n, n, true, rs)?;
            let count = prims.n();
            let stats = node_stats(spec, &prims, &series, kind)?;
            let draw: Vec<f64> = aggregate(&stats).iter().map(|v| v * scale_inv).collect();
            let ids_ext: Vec<u64> = (0..=count as u64).collect();
            let prims_ext = sample_primitives(spec, &ids_ext, rs)?;
            let xi = add_one_cost(spec, &prims_ext, scale, kind)?;
            Ok((draw, count as f64, xi))
        })
        .collect::<Result<_>>()?;

    let counts: Vec<f64> = pois.iter().map(|(_, c, _)| *c).collect();
    let s2_n = variance(&counts);
    let mut sigma2_binomial = Vec::with_capacity(dim);
    let mut sigma2_poisson = Vec::with_capacity(dim);
    let mut alpha = Vec::with_capacity(dim);
    let mut corrected = Vec::with_capacity(dim);
    let mut rel_gap = Vec::with_capacity(dim);
    for k in 0..dim {
        let b: Vec<f64> = binom.iter().map(|row| row[k]).collect();
        let p: Vec<f64> = pois.iter().map(|(d, _, _)| d[k]).collect();
        let x: Vec<f64> = pois.iter().map(|(_, _, xi)| xi[k]).collect();
        let s2b = variance(&b);
        let s2p = variance(&p);
        let a = mean(&x);
        let corr = (s2p - a * a * s2_n / n as f64).max(0.0);
        let gap = if s2b > 1e-12 {
            (s2b - corr).abs() / s2b
        } else {
            (s2b - corr).abs()
        };
        sigma2_binomial.push(s2b);
        sigma2_poisson.push(s2p);
        alpha.push(a);
        corrected.push(corr);
        rel_gap.push(gap);
    }
    Ok(PoissonDecomp {
        stat_kind: kind.clone(),
        n,
        reps,
        sigma2_binomial,
        sigma2_poisson,
        alpha,
        corrected,
        rel_gap,
    })
}

// ==== Finite-group tests =======================================================

/// Which deviations from the null a test counts against it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    /// Statistic is the max over components of |t|.
    TwoSided,
    /// Statistic is the max over components of t clamped below at 0, for
    /// one-sided moment-inequality testing.
    Upper,
}

/// Centered per-group sums and squared sums, enough to evaluate the max-t
/// statistic for any sign assignment in O(groups * dim).
struct FlipState {
    centered: Vec<Vec<f64>>, // groups x dim
    sq_sum: Vec<f64>,        // dim
    tail: Tail,
}

impl FlipState {
    fn new(network_means: &[Vec<f64>], mu0: &[f64], tail: Tail) -> Self {
        let dim = mu0.len();
        let centered: Vec<Vec<f64>> = network_means
            .iter()
            .map(|row| (0..dim).map(|k| row[k] - mu0[k]).collect())
            .collect();
        let sq_sum = (0..dim)
            .map(|k| centered.iter().map(|row| row[k] * row[k]).sum())
            .collect();
        FlipState { centered, sq_sum, tail }
    }

    /// Max-t statistic for the sign assignment encoded in the closure.
    fn statistic<S: Fn(usize) -> f64>(&self, sign: S) -> f64 {
        let g = self.centered.len() as f64;
        let mut best = f64::NEG_INFINITY;
        for k in 0..self.sq_sum.len() {
            let m = self
                .centered
                .iter()
                .enumerate()
                .map(|(i, row)| sign(i) * row[k])
                .sum::<f64>()
                / g;
            // Signs leave sum of squares unchanged, so the sample variance
            // depends on the assignment only through the mean.
            let s2 = ((self.sq_sum[k] - g * m * m) / (g - 1.0)).max(0.0);
            let t = if s2 > 0.0 {
                m / (s2 / g).sqrt()
            } else if m == 0.0 {
                0.0
            } else {
                f64::INFINITY * m.signum()
            };
            let v = match self.tail {
                Tail::TwoSided => t.abs(),
                Tail::Upper => t.max(0.0),
            };
            best = best.max(v);
        }
        best
    }
}

/// Exact enumeration is used whenever 2^groups sign patterns fit this cap.
const EXACT_FLIP_CAP: usize = 14;

/// Sign-flip randomization test on per-network mean vectors: centers each
/// mean at `mu0`, evaluates the max-t statistic over sign assignments, and
/// returns the permutation p-value. All 2^G assignments are enumerated when
/// G <= 14; otherwise `draws` random assignments are used (plus the
/// identity, which is always in the reference set).
pub fn randomization_test(
    network_means: &[Vec<f64>],
    mu0: &[f64],
    draws: usize,
    tail: Tail,
    seed: u64,
) -> Result<f64> {
    let g = network_means.len();
    if g < 2 {
        return Err(CoreError::TooFewNetworks { need: 2, got: g });
    }
    if network_means.iter().any(|row| row.len() != mu0.len()) || mu0.is_empty() {
        return Err(CoreError::ContractViolation(
            "network means and mu0 must share a positive dimension".into(),
        ));
    }
    let state = FlipState::new(network_means, mu0, tail);
    let observed = state.statistic(|_| 1.0);
    // Ties are counted as at least as extreme; the epsilon guards against
    // summation-order noise between identical assignments.
    let thresh = observed - 1e-12 * (1.0 + observed.abs());
    if g <= EXACT_FLIP_CAP {
        let total = 1usize << g;
        let hits = (0..total as u64)
            .into_par_iter()
            .filter(|&mask| {
                state.statistic(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 }) >= thresh
            })
            .count();
        Ok(hits as f64 / total as f64)
    } else {
        if draws < 1000 {
            return Err(CoreError::InsufficientData { need: 1000, got: draws });
        }
        let hits = (0..draws as u64)
            .into_par_iter()
            .filter(|&d| {
                let mut rng = StreamRng::new(seed, Stream::Diagnostic, 0xF11F, d);
                let signs: Vec<f64> = (0..g)
                    .map(|_| if rng.next_u64() & 1 == 1 { -1.0 } else { 1.0 })
                    .collect();
                state.statistic(|i| signs[i]) >= thresh
            })
            .count();
        Ok((1 + hits) as f64 / (draws + 1) as f64)
    }
}

/// Robust t-test on per-network scalar means: treats the G group estimates
/// as approximately independent Gaussians and compares the classic
/// t-statistic against mu0 with G - 1 degrees of freedom. Returns the
/// two-sided p-value.
pub fn im_t_test(network_means: &[f64], mu0: f64) -> Result<f64> {
    let g = network_means.len();
    if g < 2 {
        return Err(CoreError::TooFewNetworks { need: 2, got: g });
    }
    let m = mean(network_means);
    let s2 = variance(network_means);
    if s2 <= 0.0 {
        return Ok(if m == mu0 { 1.0 } else { 0.0 });
    }
    let t = (m - mu0) / (s2 / g as f64).sqrt();
    let dist = StudentsT::new(0.0, 1.0, (g - 1) as f64)
        .map_err(|e| CoreError::ContractViolation(e.to_string()))?;
    Ok(2.0 * (1.0 - dist.cdf(t.abs())))
}
