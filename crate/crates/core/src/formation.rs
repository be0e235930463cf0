//! Network formation: dyadic and pairwise-stable initial conditions,
//! dynamic roll-forward, and the full simulation pipeline.
//!
//! Period 0 solves a simultaneous stability condition: A_ij,0 = 1 iff
//! V0(delta_ij, S_ij(A_0), z_i0, z_j0, zeta_ij,0) > 0, where S is evaluated
//! on A_0 itself. Links whose condition holds for every feasible s are
//! "robust"; links that fail for every s are robustly absent; the remainder
//! ("non-robust" pairs, network D) are settled by myopic best response
//! inside each strategic neighborhood independently — a decentralized
//! selection, so the subnetwork on a neighborhood equals the solve on its
//! subsetted primitives bit-exactly.

use crate::error::{CoreError, Result};
use crate::model::{eval_s, sample_primitives, ModelSpec, Primitives, SparsityScale, Which};
use crate::net::{Net, NetSeries};
use crate::numeric::UnionFind;
use crate::rng::{Stream, StreamRng};
use rayon::prelude::*;

/// Cap on free pairs in one neighborhood for the enumeration fallback
/// (2^20 candidate subnetworks).
const ENUM_PAIR_CAP: usize = 20;

/// Period-0 "possible", robust, and non-robust link structures.
#[derive(Clone, Debug)]
pub struct RobustnessDecomposition {
    /// M0: pairs with sup_s V0 > 0 (links that can possibly form).
    pub m0: Net,
    /// Pairs with inf_s V0 > 0 (form regardless of the ambient network).
    pub robust: Net,
    /// Non-robust pairs: M0 minus robust.
    pub d: Net,
}

/// Latent index for pair (i, j) in period t, excluding the strategic term:
/// intercept + beta_z.(z_it + z_jt) - delta_ij + zeta_ij,t.
#[inline]
pub(crate) fn pair_rest(
    spec: &ModelSpec,
    which: Which,
    prims: &Primitives,
    scale: SparsityScale,
    i: usize,
    j: usize,
    t: usize,
) -> f64 {
    let block = spec.params(which);
    let mut v = block.intercept - prims.dist(i, j) / scale.r + prims.zeta(i, j, t);
    if !block.beta_z.is_empty() {
        let (zi, zj) = (prims.z(i, t), prims.z(j, t));
        for (k, b) in block.beta_z.iter().enumerate() {
            v += b * (zi[k] + zj[k]);
        }
    }
    v
}

/// Parallel scan over all unordered pairs: `link(i, j)` decides each pair;
/// rows are computed independently and committed in index order, so the
/// result is identical at any thread count.
pub(crate) fn scan_pairs<F>(n: usize, link: F) -> Net
where
    F: Fn(usize, usize) -> bool + Sync,
{
    let upper: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = Vec::new();
            for j in (i + 1)..n {
                if link(i, j) {
                    row.push(j as u32);
                }
            }
            row
        })
        .collect();
    Net::from_upper_rows(upper)
}

/// Dyadic (non-strategic) initial condition: A_ij,0 = 1{V0 at s = 0 > 0}.
pub fn form_dyadic_initial(spec: &ModelSpec, prims: &Primitives, scale: SparsityScale) -> Net {
    // With s = 0 the strategic term vanishes, so only the rest matters.
    scan_pairs(prims.n(), |i, j| pair_rest(spec, Which::V0, prims, scale, i, j, 0) > 0.0)
}

/// Classify every pair as possible / robust / non-robust from the corner
/// values of the period-0 index.
pub fn classify_robustness(
    spec: &ModelSpec,
    prims: &Primitives,
    scale: SparsityScale,
) -> RobustnessDecomposition {
    let n = prims.n();
    let (s_lo, s_hi) = spec.strategic_range(Which::V0);
    let m0 = scan_pairs(n, |i, j| {
        pair_rest(spec, Which::V0, prims, scale, i, j, 0) + s_hi > 0.0
    });
    let robust = scan_pairs(n, |i, j| {
        pair_rest(spec, Which::V0, prims, scale, i, j, 0) + s_lo > 0.0
    });
    let d = scan_pairs(n, |i, j| m0.has_edge(i, j) && !robust.has_edge(i, j));
    RobustnessDecomposition { m0, robust, d }
}

/// Strategic neighborhood of each node: C_i (i's component in D) plus every
/// node robustly linked to some member of C_i. Returned sorted, one per node.
pub fn strategic_neighborhoods(decomp: &RobustnessDecomposition) -> Vec<Vec<u32>> {
    let n = decomp.d.n();
    let mut uf = UnionFind::new(n);
    for (i, j) in decomp.d.edges() {
        uf.union(i, j);
    }
    // Group members by component root, extend by robust partners once per
    // component, then hand each node its component's closure.
    let mut members: std::collections::HashMap<u32, Vec<u32>> = std::collections::HashMap::new();
    for i in 0..n as u32 {
        members.entry(uf.find(i)).or_default().push(i);
    }
    let mut closure: std::collections::HashMap<u32, Vec<u32>> = std::collections::HashMap::new();
    for (&root, comp) in &members {
        let mut set: Vec<u32> = comp.clone();
        for &i in comp {
            set.extend_from_slice(decomp.robust.neighbors(i as usize));
        }
        set.sort_unstable();
        set.dedup();
        closure.insert(root, set);
    }
    (0..n as u32).map(|i| closure[&uf.find(i)].clone()).collect()
}

/// Distinct components of D, each sorted, ordered by smallest member.
fn d_components(d: &Net) -> Vec<Vec<u32>> {
    let n = d.n();
    let mut uf = UnionFind::new(n);
    for (i, j) in d.edges() {
        uf.union(i, j);
    }
    let mut by_root: std::collections::BTreeMap<u32, Vec<u32>> = std::collections::BTreeMap::new();
    for i in 0..n as u32 {
        if d.degree(i as usize) > 0 {
            by_root.entry(uf.find(i)).or_default().push(i);
        }
    }
    let mut comps: Vec<Vec<u32>> = by_root.into_values().collect();
    for c in &mut comps {
        c.sort_unstable();
    }
    comps.sort_by_key(|c| c[0]);
    comps
}

/// Non-robust pairs inside one component, ascending (min id, max id).
fn component_pairs(d: &Net, comp: &[u32]) -> Vec<(u32, u32)> {
    let mut pairs = Vec::new();
    for (a, &i) in comp.iter().enumerate() {
        for &j in &comp[a + 1..] {
            if d.has_edge(i as usize, j as usize) {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

/// Pairwise-stable period-0 network with decentralized selection.
///
/// Robust links are fixed on, robustly absent pairs off; each D-component's
/// non-robust pairs are settled by myopic best response from the robust
/// network in ascending pair order (monotone configurations), or by
/// lexicographic-first exhaustive enumeration otherwise.
pub fn solve_pairwise_stable(
    spec: &ModelSpec,
    prims: &Primitives,
    scale: SparsityScale,
) -> Result<Net> {
    if spec.dyadic_initial() {
        return Ok(form_dyadic_initial(spec, prims, scale));
    }
    let decomp = classify_robustness(spec, prims, scale);
    let mut a = decomp.robust.clone();
    let monotone = spec.v0_params.beta_s.iter().all(|&b| b >= 0.0);
    for comp in d_components(&decomp.d) {
        let pairs = component_pairs(&decomp.d, &comp);
        if pairs.is_empty() {
            continue;
        }
        // Cache the non-strategic part of each pair's index.
        let rests: Vec<f64> = pairs
            .iter()
            .map(|&(i, j)| pair_rest(spec, Which::V0, prims, scale, i as usize, j as usize, 0))
            .collect();
        if monotone {
            solve_component_best_response(spec, &mut a, &pairs, &rests)?;
        } else {
            solve_component_enumerate(spec, &mut a, &pairs, &rests)?;
        }
    }
    Ok(a)
}

/// Myopic best response from below. With nonnegative beta_s and the
/// link-monotone built-in S kinds, indices only rise as links appear, so
/// sweeps are link-nondecreasing and terminate within #pairs + 1 sweeps.
fn solve_component_best_response(
    spec: &ModelSpec,
    a: &mut Net,
    pairs: &[(u32, u32)],
    rests: &[f64],
) -> Result<()> {
    let beta_s = &spec.v0_params.beta_s;
    let cap = pairs.len() + 2;
    for _ in 0..cap {
        let mut changed = false;
        for (&(i, j), &rest) in pairs.iter().zip(rests) {
            let (i, j) = (i as usize, j as usize);
            let s = eval_s(spec, a, i, j);
            let idx = rest + beta_s.iter().zip(&s).map(|(b, v)| b * v).sum::<f64>();
            let want = idx > 0.0;
            if a.has_edge(i, j) != want {
                a.set_edge(i, j, want);
                changed = true;
            }
        }
        if !changed {
            return Ok(());
        }
    }
    Err(CoreError::NonConvergence { sweeps: cap })
}

/// Exhaustive fallback: try every on/off pattern of the component's
/// non-robust pairs in ascending bitmask order and keep the first stable one.
/// The canonical order makes the selection invariant to subsetting.
fn solve_component_enumerate(
    spec: &ModelSpec,
    a: &mut Net,
    pairs: &[(u32, u32)],
    rests: &[f64],
) -> Result<()> {
    let p = pairs.len();
    if p > ENUM_PAIR_CAP {
        return Err(CoreError::NeighborhoodTooLarge { pairs: p });
    }
    let beta_s = &spec.v0_params.beta_s;
    for mask in 0u64..(1u64 << p) {
        for (b, &(i, j)) in pairs.iter().enumerate() {
            a.set_edge(i as usize, j as usize, mask >> b & 1 == 1);
        }
        let stable = pairs.iter().zip(rests).all(|(&(i, j), &rest)| {
            let (i, j) = (i as usize, j as usize);
            let s = eval_s(spec, a, i, j);
            let idx = rest + beta_s.iter().zip(&s).map(|(b, v)| b * v).sum::<f64>();
            (idx > 0.0) == a.has_edge(i, j)
        });
        if stable {
            return Ok(());
        }
    }
    // No stable pattern: clear the trial links and report.
    for &(i, j) in pairs {
        a.set_edge(i as usize, j as usize, false);
    }
    Err(CoreError::NonConvergence { sweeps: 1 << p })
}

/// Brute-force oracle: every pairwise-stable network on at most 6 nodes.
pub fn enumerate_pairwise_stable(
    spec: &ModelSpec,
    prims: &Primitives,
    scale: SparsityScale,
) -> Result<Vec<Net>> {
    let n = prims.n();
    const CAP: usize = 6;
    if n > CAP {
        return Err(CoreError::TooLarge { n, cap: CAP });
    }
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i as u32, j as u32));
        }
    }
    let rests: Vec<f64> = pairs
        .iter()
        .map(|&(i, j)| pair_rest(spec, Which::V0, prims, scale, i as usize, j as usize, 0))
        .collect();
    let beta_s = &spec.v0_params.beta_s;
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << pairs.len()) {
        let edges: Vec<(u32, u32)> = pairs
            .iter()
            .enumerate()
            .filter(|(b, _)| mask >> b & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        let net = Net::from_edges(n, &edges);
        let stable = pairs.iter().zip(&rests).all(|(&(i, j), &rest)| {
            let (i, j) = (i as usize, j as usize);
            let s = eval_s(spec, &net, i, j);
            let idx = rest + beta_s.iter().zip(&s).map(|(b, v)| b * v).sum::<f64>();
            (idx > 0.0) == net.has_edge(i, j)
        });
        if stable {
            out.push(net);
        }
    }
    Ok(out)
}

/// Roll the dynamics forward from A0: for t in 1..=T, each pair links iff
/// V(delta, S_ij,t(A_{t-1}), z_it, z_jt, zeta_ij,t) > 0.
pub fn roll_forward(
    spec: &ModelSpec,
    prims: &Primitives,
    scale: SparsityScale,
    a0: Net,
) -> NetSeries {
    let n = prims.n();
    let beta_s = &spec.v_params.beta_s;
    let strategic = !spec.v_params.is_nonstrategic();
    let mut nets = Vec::with_capacity(prims.t_max() + 1);
    nets.push(a0);
    for t in 1..=prims.t_max() {
        let prev = nets.last().unwrap();
        let next = scan_pairs(n, |i, j| {
            let mut idx = pair_rest(spec, Which::V, prims, scale, i, j, t);
            if strategic {
                let s = eval_s(spec, prev, i, j);
                idx += beta_s.iter().zip(&s).map(|(b, v)| b * v).sum::<f64>();
            }
            idx > 0.0
        });
        nets.push(next);
    }
    NetSeries::new(nets)
}

/// Initial condition + roll-forward on existing primitives.
pub fn run_pipeline(
    spec: &ModelSpec,
    prims: &Primitives,
    scale: SparsityScale,
) -> Result<NetSeries> {
    let a0 = solve_pairwise_stable(spec, prims, scale)?;
    Ok(roll_forward(spec, prims, scale, a0))
}

/// Full simulation: sample primitives for node ids 0..count and run the
/// pipeline. The scale is set from `scale_from` (which may differ from n, as
/// when regrowing subnetworks at the original scale). In Poissonized mode
/// the node count is a Poisson(n) draw from its own seed stream, so the
/// first min(N, n) nodes share primitives with the binomial mode.
pub fn simulate(
    spec: &ModelSpec,
    n: usize,
    scale_from: usize,
    poissonized: bool,
    seed: u64,
) -> Result<(Primitives, NetSeries, SparsityScale)> {
    if n == 0 {
        return Err(CoreError::ContractViolation("n must be >= 1".into()));
    }
    let scale = SparsityScale::new(spec, scale_from)?;
    let count = if poissonized {
        let mut rng = StreamRng::new(seed, Stream::PoissonCount, n as u64, 0);
        rng.next_poisson(n as f64).max(1) as usize
    } else {
        n
    };
    let ids: Vec<u64> = (0..count as u64).collect();
    let prims = sample_primitives(spec, &ids, seed)?;
    let series = run_pipeline(spec, &prims, scale)?;
    Ok((prims, series, scale))
}
