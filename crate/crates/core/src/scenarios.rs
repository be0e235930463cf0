//! Pinned hand-built scenarios used in documentation and verification.

use crate::model::{
    AttributeLaw, LatentParams, ModelSpec, PositionLaw, Primitives, SKind, ShockLaw, SparsityScale,
};
use std::collections::HashMap;

/// The four-node "common friend" scenario.
///
/// Period 0 links exactly {1–3, 2–3}; in period 1 the pair (1, 2) links if
/// and only if it had a common neighbor in period 0, and every other pair's
/// index is pinned negative. So the realized period-1 network is {1–2}, and
/// node 1's period-1 degree is 1.
///
/// The scenario illustrates why stabilization sets must reach beyond
/// realized neighborhoods: regrowing the pipeline on the naive set {1, 2}
/// (node 1's period-1 neighborhood) loses the common friend 3, the pair
/// (1, 2) no longer links, and the regrown degree is 0. Regrowing on
/// {1, 2, 3} reproduces the statistic exactly.
pub fn four_node_common_friend() -> (ModelSpec, Primitives, SparsityScale) {
    let spec = ModelSpec {
        d: 1,
        d_z: 0,
        t_max: 1,
        kappa: 1.0,
        // Dynamics: only the common-neighbor indicator matters (weight 1).
        v_params: LatentParams { beta_s: vec![0.0, 1.0], beta_z: vec![], intercept: 0.0 },
        // Dyadic initial condition.
        v0_params: LatentParams { beta_s: vec![0.0, 0.0], beta_z: vec![], intercept: 0.0 },
        shock_law: ShockLaw::Logistic,
        s_kind: SKind::LaggedLinkAndCommonMax,
        position_law: PositionLaw::UniformUnitCube,
        attribute_law: AttributeLaw::None,
        s_bounds: vec![(0.0, 1.0), (0.0, 1.0)],
    };
    // r = (kappa / 4)^{1/1} = 0.25; scaled distances:
    // (1,2) -> 0.4, (1,3) -> 0.2, (2,3) -> 0.2, pairs with 4 -> ~3.
    let x = vec![vec![0.10], vec![0.20], vec![0.15], vec![0.90]];
    let mut zeta: HashMap<(u64, u64, usize), f64> = HashMap::new();
    // Period 0: links 1-3 and 2-3 only (scaled distance 0.2 < shock 1.0).
    for (pair, v) in [
        (((1u64, 3u64)), 1.0),
        ((2, 3), 1.0),
        ((1, 2), -1.0),
        ((1, 4), -10.0),
        ((2, 4), -10.0),
        ((3, 4), -10.0),
    ] {
        zeta.insert((pair.0, pair.1, 0), v);
    }
    // Period 1: pair (1,2) sits on the knife edge decided by the common
    // friend: index = common_max - 0.4, positive only when 3 is present.
    for (pair, v) in [
        (((1u64, 2u64)), 0.0),
        ((1, 3), -10.0),
        ((2, 3), -10.0),
        ((1, 4), -10.0),
        ((2, 4), -10.0),
        ((3, 4), -10.0),
    ] {
        zeta.insert((pair.0, pair.1, 1), v);
    }
    let prims =
        Primitives::from_parts(&spec, vec![1, 2, 3, 4], x, vec![], zeta).expect("pinned scenario");
    let scale = SparsityScale::new(&spec, 4).expect("n_ref = 4");
    (spec, prims, scale)
}
