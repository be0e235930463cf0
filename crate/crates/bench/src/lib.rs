//! Shared fixtures for the criterion benchmarks.

use stabnet_core::{AttributeLaw, LatentParams, ModelSpec, PositionLaw, SKind, ShockLaw};

/// Distance-plus-shock model with no strategic terms.
pub fn dyadic_spec() -> ModelSpec {
    ModelSpec {
        d: 2,
        d_z: 0,
        t_max: 1,
        kappa: 2.0,
        v_params: LatentParams { beta_s: vec![], beta_z: vec![], intercept: 0.0 },
        v0_params: LatentParams { beta_s: vec![], beta_z: vec![], intercept: 0.0 },
        shock_law: ShockLaw::Logistic,
        s_kind: SKind::None,
        position_law: PositionLaw::UniformUnitCube,
        attribute_law: AttributeLaw::None,
        s_bounds: vec![],
    }
}

/// Subcritical strategic model (lagged link + common-neighbor indicator).
pub fn strategic_spec() -> ModelSpec {
    ModelSpec {
        d: 1,
        d_z: 0,
        t_max: 2,
        kappa: 1.5,
        v_params: LatentParams { beta_s: vec![0.4], beta_z: vec![], intercept: -0.5 },
        v0_params: LatentParams { beta_s: vec![0.5], beta_z: vec![], intercept: -1.0 },
        shock_law: ShockLaw::Logistic,
        s_kind: SKind::CommonNeighborMax,
        position_law: PositionLaw::UniformUnitCube,
        attribute_law: AttributeLaw::None,
        s_bounds: vec![(0.0, 1.0)],
    }
}
