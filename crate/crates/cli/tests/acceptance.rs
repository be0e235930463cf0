//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line (visible with `--nocapture`; always shown on failure).

use stabnet_core::branching::{
    branching_sizes, compare_domination, h_d_norm, h_d_norm_mc, BranchingConfig, IntensityKind,
    OffspringLaw,
};
use stabnet_core::formation::{
    classify_robustness, enumerate_pairwise_stable, simulate, solve_pairwise_stable,
    strategic_neighborhoods,
};
use stabnet_core::inference::{im_t_test, mc_clt, poisson_variance_decomp, randomization_test, Tail};
use stabnet_core::moments::{asf_bounds, asf_stats, graham_fit, AsfInput, CountKind, StatKind};
use stabnet_core::numeric::{mean, variance};
use stabnet_core::rng::{Stream, StreamRng};
use stabnet_core::scenarios::four_node_common_friend;
use stabnet_core::stabilization::{sparsity_check, stab_report, tail_fit, verify_on_subset};
use stabnet_core::{
    sample_primitives, AttributeLaw, LatentParams, ModelSpec, PositionLaw, SKind, ShockLaw,
    SparsityScale,
};

fn verdict(num: usize, name: &str, pass: bool, detail: &str) {
    println!("criterion {num:02} ({name}): {} — {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {num:02} ({name}) failed: {detail}");
}

// ==== Shared model specs =======================================================

fn base_spec() -> ModelSpec {
    ModelSpec {
        d: 1,
        d_z: 0,
        t_max: 1,
        kappa: 1.0,
        v_params: LatentParams { beta_s: vec![], beta_z: vec![], intercept: 0.0 },
        v0_params: LatentParams { beta_s: vec![], beta_z: vec![], intercept: 0.0 },
        shock_law: ShockLaw::Logistic,
        s_kind: SKind::None,
        position_law: PositionLaw::UniformUnitCube,
        attribute_law: AttributeLaw::None,
        s_bounds: vec![],
    }
}

/// Distance-plus-shock model, no strategic terms.
fn dyadic_spec() -> ModelSpec {
    base_spec()
}

/// Subcritical strategic model (common-neighbor indicator in both the
/// initial condition and the dynamics).
fn strategic_spec() -> ModelSpec {
    let mut spec = base_spec();
    spec.v_params = LatentParams { beta_s: vec![0.5], beta_z: vec![], intercept: -1.0 };
    spec.v0_params = LatentParams { beta_s: vec![0.5], beta_z: vec![], intercept: -1.0 };
    spec.s_kind = SKind::CommonNeighborMax;
    spec.s_bounds = vec![(0.0, 1.0)];
    spec
}

/// Pure-distance model with Exp(1) shocks: limiting mean degree 2 kappa.
fn pure_distance_spec() -> ModelSpec {
    let mut spec = base_spec();
    spec.t_max = 0;
    spec.shock_law = ShockLaw::Exponential;
    spec
}

/// Dynamic transitivity panel: dyadic initial condition, transitions driven
/// by (lagged link, common-neighbor count) with coefficients theta0.
fn graham_spec(theta0: [f64; 2]) -> ModelSpec {
    let mut spec = base_spec();
    spec.t_max = 3;
    spec.kappa = 2.0;
    spec.v_params =
        LatentParams { beta_s: theta0.to_vec(), beta_z: vec![], intercept: -1.2 };
    spec.v0_params = LatentParams { beta_s: vec![0.0, 0.0], beta_z: vec![], intercept: -0.6 };
    spec.s_kind = SKind::LaggedLinkAndCommonCount;
    // The count clamp never binds at these densities but keeps the
    // sup-corner "possible" networks sparse.
    spec.s_bounds = vec![(0.0, 1.0), (0.0, 12.0)];
    spec
}

/// ASF panel: dyadic initial condition, dynamics driven by the
/// common-neighbor indicator; target s = 1 (a common friend).
fn asf_spec() -> ModelSpec {
    let mut spec = base_spec();
    spec.t_max = 2;
    spec.kappa = 2.0;
    spec.v_params = LatentParams { beta_s: vec![0.8], beta_z: vec![], intercept: -0.8 };
    spec.v0_params = LatentParams { beta_s: vec![0.0], beta_z: vec![], intercept: 0.0 };
    spec.s_kind = SKind::CommonNeighborMax;
    spec.s_bounds = vec![(0.0, 1.0)];
    spec
}

// ==== Criteria =================================================================

#[test]
fn criterion_01_figure_reproduction() {
    let (spec, prims, scale) = four_node_common_friend();
    let kind = StatKind::Count(CountKind::Degree { t: 1 });
    // Naive regrowth on node 1's realized period-1 neighborhood {1, 2}
    // (local indices {0, 1}) loses the common friend and changes psi.
    let (full, naive, naive_equal) =
        verify_on_subset(&spec, &prims, scale, 0, &[0, 1], &kind).unwrap();
    let ctx = stabnet_core::stabilization::StabContext::new(&spec, &prims, scale);
    let ji = ctx.construct_ji(0, 1);
    let (_, regrown, ji_equal) = verify_on_subset(&spec, &prims, scale, 0, &ji, &kind).unwrap();
    let pass = full == vec![1.0]
        && naive == vec![0.0]
        && !naive_equal
        && ji == vec![0, 1, 2]
        && regrown == vec![1.0]
        && ji_equal;
    verdict(
        1,
        "figure reproduction",
        pass,
        &format!("full={full:?} naive={naive:?} J_1={ji:?} regrown={regrown:?}"),
    );
}

#[test]
fn criterion_02_stabilization_exactness() {
    let mut total = 0usize;
    let mut failed = 0usize;
    for inst in 0..200u64 {
        let mut rng = StreamRng::new(0xACC2, Stream::Diagnostic, inst, 0);
        let n = 20 + (rng.next_u64() % 181) as usize; // 20..=200
        let seed = rng.next_u64();
        let (spec, kind) = match inst % 4 {
            0 => (strategic_spec(), StatKind::Count(CountKind::Degree { t: 1 })),
            1 => (strategic_spec(), StatKind::Count(CountKind::Triangle { t: 1 })),
            2 => (graham_spec([0.5, 0.25]), StatKind::GrahamScore { theta: vec![0.5, 0.25] }),
            _ => (asf_spec(), StatKind::Asf(AsfInput { s_target: vec![1.0] })),
        };
        let (prims, _, scale) = simulate(&spec, n, n, false, seed).unwrap();
        let records = stab_report(&spec, &prims, scale, kind.locality(), &kind).unwrap();
        total += records.len();
        failed += records.iter().filter(|r| !r.verified).count();
    }
    verdict(
        2,
        "stabilization exactness",
        failed == 0,
        &format!("{failed} of {total} node-instance pairs mismatched"),
    );
}

#[test]
fn criterion_03_equilibrium_oracle() {
    let mut member_fail = 0usize;
    let mut decen_fail = 0usize;
    for inst in 0..500u64 {
        let mut rng = StreamRng::new(0xACC3, Stream::Diagnostic, inst, 0);
        let n = 2 + (rng.next_u64() % 5) as usize; // 2..=6
        let seed = rng.next_u64();
        let mut spec = strategic_spec();
        spec.v0_params.beta_s = vec![[0.5, 0.9, -0.5, 0.0][(inst % 4) as usize]];
        spec.v0_params.intercept = [0.0, -0.5][(inst % 2) as usize];
        let prims = sample_primitives(&spec, &(0..n as u64).collect::<Vec<_>>(), seed).unwrap();
        let scale = SparsityScale::new(&spec, n).unwrap();
        let solved = solve_pairwise_stable(&spec, &prims, scale).unwrap();
        let all = enumerate_pairwise_stable(&spec, &prims, scale).unwrap();
        if !all.iter().any(|net| net.edges() == solved.edges()) {
            member_fail += 1;
            continue;
        }
        // Decentralization: re-solving on each strategic neighborhood
        // reproduces the full network's restriction bit-exactly.
        let decomp = classify_robustness(&spec, &prims, scale);
        let hoods = strategic_neighborhoods(&decomp);
        'nodes: for hood in &hoods {
            let ids: Vec<u64> = hood.iter().map(|&v| v as u64).collect();
            let sub = prims.subset(&ids);
            let sub_a = solve_pairwise_stable(&spec, &sub, scale).unwrap();
            for (a, &gi) in hood.iter().enumerate() {
                for (b, &gj) in hood.iter().enumerate().skip(a + 1) {
                    if sub_a.has_edge(a, b) != solved.has_edge(gi as usize, gj as usize) {
                        decen_fail += 1;
                        break 'nodes;
                    }
                }
            }
        }
    }
    verdict(
        3,
        "equilibrium oracle",
        member_fail == 0 && decen_fail == 0,
        &format!("{member_fail} non-members, {decen_fail} decentralization mismatches of 500"),
    );
}

#[test]
fn criterion_04_sparsity_limit() {
    let spec = pure_distance_spec();
    let report = sparsity_check(&spec, &[250, 1000, 4000], 200, 0xACC4).unwrap();
    let limit = report.analytic_limit.unwrap();
    let worst = report
        .per_n
        .iter()
        .map(|(_, degs)| (degs[0] - limit).abs() / limit)
        .fold(0.0f64, f64::max);
    verdict(
        4,
        "sparsity limit",
        limit == 2.0 && worst < 0.10,
        &format!("mean degrees {:?} vs limit {limit} (worst rel dev {worst:.4})", report.per_n),
    );
}

#[test]
fn criterion_05_branching_calibration() {
    let spec = pure_distance_spec();
    let d_config = BranchingConfig {
        spec: &spec,
        kind: IntensityKind::DProcess,
        offspring: OffspringLaw::ConstantMean { mu: 0.5 },
        slack: 0.0,
        population_cap: 1_000_000,
        seed: 0xACC5,
    };
    let d_samples = branching_sizes(&d_config, 100_000).unwrap();
    let d_sizes: Vec<f64> = d_samples.iter().map(|s| s.total_size as f64).collect();
    let d_mean = mean(&d_sizes);
    let m_config = BranchingConfig { kind: IntensityKind::MProcess { depth: 2 }, ..d_config };
    let m_sizes: Vec<f64> = branching_sizes(&m_config, 100_000)
        .unwrap()
        .iter()
        .map(|s| s.total_size as f64)
        .collect();
    let m_mean = mean(&m_sizes);
    let m_want = 1.0 + 0.5 + 0.25;
    let fit = tail_fit(&d_sizes).unwrap();
    let pass = (d_mean - 2.0).abs() / 2.0 < 0.02
        && (m_mean - m_want).abs() / m_want < 0.02
        && fit.exponential_tail_consistent();
    verdict(
        5,
        "branching calibration",
        pass,
        &format!(
            "D mean {d_mean:.4} (want 2.0), M mean {m_mean:.4} (want {m_want}), tail slope {:.3} CI ({:.3},{:.3})",
            fit.slope, fit.slope_ci.0, fit.slope_ci.1
        ),
    );
}

#[test]
fn criterion_06_subcriticality_norm() {
    // Closed forms for the strategic spec (d = 1, coefficient 0.5 on a
    // {0,1} statistic, intercept -1).
    let logistic = strategic_spec();
    let want_logistic = 2.0 * ((1.0 + (-0.5f64).exp()).ln() - (1.0 + (-1.0f64).exp()).ln());
    let got_logistic = h_d_norm(&logistic).unwrap();
    let mut exponential = strategic_spec();
    exponential.shock_law = ShockLaw::Exponential;
    let want_exp = 2.0 * ((-0.5f64).exp() - (-1.0f64).exp());
    let got_exp = h_d_norm(&exponential).unwrap();
    let (mc, se) = h_d_norm_mc(&logistic, 300_000, 0xACC6).unwrap();
    let pass = (got_logistic - want_logistic).abs() < 1e-4
        && (got_exp - want_exp).abs() < 1e-4
        && (mc - got_logistic).abs() < 3.0 * se;
    verdict(
        6,
        "subcriticality norm",
        pass,
        &format!(
            "logistic {got_logistic:.6} vs {want_logistic:.6}; exponential {got_exp:.6} vs {want_exp:.6}; MC {mc:.6} ± {se:.6}"
        ),
    );
}

#[test]
fn criterion_07_stochastic_domination() {
    // 5 networks of n = 2000 give 10^4 component samples, against 10^4
    // branching replications.
    let spec = strategic_spec();
    let report = compare_domination(&spec, 2000, 5, 10_000, 1, 0xACC7).unwrap();
    let pass = report.d_violations <= 1 && report.m_violations <= 1;
    verdict(
        7,
        "stochastic domination",
        pass,
        &format!(
            "D violations {}/20, M violations {}/20, means {:?}",
            report.d_violations, report.m_violations, report.means
        ),
    );
}

#[test]
fn criterion_08_clt_check() {
    // Denser variants of the two reference models: at kappa = 1 the
    // per-network triangle total is a small skewed count and n = 500 is not
    // yet in the normal regime, so the KS check would measure pre-asymptotic
    // skew rather than correctness of the limit.
    let mut dyadic = dyadic_spec();
    dyadic.kappa = 3.0;
    let mut strategic = base_spec();
    strategic.kappa = 2.5;
    strategic.v_params = LatentParams { beta_s: vec![0.3], beta_z: vec![], intercept: 0.0 };
    strategic.v0_params = LatentParams { beta_s: vec![0.3], beta_z: vec![], intercept: 0.0 };
    strategic.s_kind = SKind::CommonNeighborMax;
    strategic.s_bounds = vec![(0.0, 1.0)];
    let norm = h_d_norm(&strategic).unwrap();
    assert!(norm < 1.0, "strategic CLT config must be subcritical, norm = {norm}");
    let cases = [
        (dyadic.clone(), StatKind::Count(CountKind::Degree { t: 0 }), "dyadic degree"),
        (dyadic, StatKind::Count(CountKind::Triangle { t: 0 }), "dyadic triangle"),
        (strategic.clone(), StatKind::Count(CountKind::Degree { t: 1 }), "strategic degree"),
        (strategic, StatKind::Count(CountKind::Triangle { t: 1 }), "strategic triangle"),
    ];
    let mut detail = String::new();
    let mut pass = true;
    for (i, (spec, kind, name)) in cases.iter().enumerate() {
        let report = mc_clt(spec, 500, 2000, kind, 0xACC8 + i as u64).unwrap();
        let ks = report.ks_stat[0];
        pass &= !report.degenerate[0] && ks < 0.04;
        detail.push_str(&format!("{name} KS {ks:.4}; "));
    }
    verdict(8, "CLT check", pass, detail.trim_end_matches("; "));
}

#[test]
fn criterion_09_poissonization_identity() {
    let spec = dyadic_spec();
    let kind = StatKind::Count(CountKind::Degree { t: 0 });
    let report = poisson_variance_decomp(&spec, 500, 4000, &kind, 0xACC9).unwrap();
    let gap = report.rel_gap[0];
    // Degenerate constant statistic: exact identity.
    let mut empty = dyadic_spec();
    empty.v_params.intercept = -60.0;
    empty.v0_params.intercept = -60.0;
    let const_kind = StatKind::Count(CountKind::KNeighSize { k: 1, t: 0 });
    let dreport = poisson_variance_decomp(&empty, 40, 500, &const_kind, 0xACC9).unwrap();
    let pass = gap <= 0.15 && dreport.corrected[0].abs() < 1e-12 && dreport.sigma2_binomial[0] < 1e-24;
    verdict(
        9,
        "Poissonization identity",
        pass,
        &format!(
            "rel gap {gap:.4} (sigma2 {:.4} vs corrected {:.4}); degenerate corrected {:.2e}",
            report.sigma2_binomial[0], report.corrected[0], dreport.corrected[0]
        ),
    );
}

#[test]
fn criterion_10_estimator_recovery() {
    // Conditional-logit recovery.
    let theta0 = [0.5, 0.25];
    let spec = graham_spec(theta0);
    let reps = 200usize;
    let fits: Vec<Vec<f64>> = (0..reps)
        .map(|rep| {
            let (_, series, _) = simulate(&spec, 2000, 2000, false, 0xAC10 + rep as u64).unwrap();
            graham_fit(&series).unwrap()
        })
        .collect();
    let mut graham_pass = true;
    let mut detail = String::new();
    for k in 0..2 {
        let col: Vec<f64> = fits.iter().map(|f| f[k]).collect();
        let m = mean(&col);
        let se = (variance(&col) / reps as f64).sqrt();
        graham_pass &= (m - theta0[k]).abs() < 3.0 * se;
        detail.push_str(&format!("theta{k} {m:.4} ± {se:.4} (true {}); ", theta0[k]));
    }

    // ASF bounds: coverage of the Monte Carlo truth.
    let aspec = asf_spec();
    let input = AsfInput { s_target: vec![1.0] };
    let sims = 500usize;
    let mut bounds = Vec::with_capacity(sims);
    let mut truth_num = 0.0;
    let mut truth_den = 0.0;
    for rep in 0..sims {
        let (prims, series, scale) = simulate(&aspec, 1000, 1000, false, 0xA5F0 + rep as u64).unwrap();
        let stats = asf_stats(&aspec, &prims, &series, &input).unwrap();
        bounds.push(asf_bounds(&stats).unwrap());
        // Truth mu(s) = P(V(alpha, s, zeta) > 0 | A_0 = 1): average the
        // structural linking probability at the target over initially
        // linked pairs. With beta_s * 1 + intercept = 0 the index is
        // -delta, so the probability is the shock survival at delta.
        let a0 = series.at(0);
        for (i, j) in a0.edges() {
            let delta = prims.dist(i as usize, j as usize) / scale.r;
            truth_num += 2.0 * aspec.shock_law.survival(delta);
            truth_den += 2.0;
        }
    }
    let truth = truth_num / truth_den;
    let ordered = bounds.iter().all(|&(l, u)| l <= u);
    let covered = bounds.iter().filter(|&&(l, u)| l <= truth && truth <= u).count();
    let asf_pass = ordered && covered as f64 >= 0.90 * sims as f64;
    detail.push_str(&format!(
        "ASF truth {truth:.4}, coverage {covered}/{sims}, ordered={ordered}"
    ));
    verdict(10, "estimator recovery", graham_pass && asf_pass, &detail);
}

#[test]
fn criterion_11_inference_size() {
    let spec = dyadic_spec();
    let sim_mean = |seed: u64| -> f64 {
        let (prims, series, _) = simulate(&spec, 30, 30, false, seed).unwrap();
        2.0 * series.at(0).edge_count() as f64 / prims.n() as f64
    };
    // Pool a large sample to pin the per-network mean degree under the null.
    let trials = 2000usize;
    let g_rand = 20usize;
    let rand_draws: Vec<f64> = (0..trials * g_rand).map(|k| sim_mean(0xE110 + k as u64)).collect();
    let g_t = 8usize;
    let t_draws: Vec<f64> = (0..trials * g_t).map(|k| sim_mean(0xE220 + k as u64)).collect();
    let mut pooled = rand_draws.clone();
    pooled.extend_from_slice(&t_draws);
    let mu0 = mean(&pooled);

    let mut rand_rej = 0usize;
    for trial in 0..trials {
        let means: Vec<Vec<f64>> =
            rand_draws[trial * g_rand..(trial + 1) * g_rand].iter().map(|&v| vec![v]).collect();
        let p = randomization_test(&means, &[mu0], 2000, Tail::TwoSided, 0xE330 + trial as u64)
            .unwrap();
        if p <= 0.05 {
            rand_rej += 1;
        }
    }
    let mut t_rej = 0usize;
    for trial in 0..trials {
        let means = &t_draws[trial * g_t..(trial + 1) * g_t];
        if im_t_test(means, mu0).unwrap() <= 0.05 {
            t_rej += 1;
        }
    }
    let rand_rate = rand_rej as f64 / trials as f64;
    let t_rate = t_rej as f64 / trials as f64;
    let pass = (0.03..=0.07).contains(&rand_rate) && (0.03..=0.07).contains(&t_rate);
    verdict(
        11,
        "inference size",
        pass,
        &format!("randomization rate {rand_rate:.4} (G=20), t-test rate {t_rate:.4} (G=8)"),
    );
}

#[test]
fn criterion_12_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let config = r#"{
        "model": {
            "d": 1, "d_z": 0, "T": 1, "kappa": 1.0,
            "v_params": {"beta_s": [0.5], "beta_z": [], "intercept": -1.0},
            "v0_params": {"beta_s": [0.5], "beta_z": [], "intercept": -1.0},
            "shock_law": "logistic",
            "s_kind": "common_neighbor_max",
            "position_law": "uniform_unit_cube",
            "attribute_law": "none",
            "s_bounds": [[0.0, 1.0]]
        },
        "seed": 17, "n": 200, "reps": 80,
        "stat_kind": {"count": {"triangle": {"t": 1}}}
    }"#;
    let cfg = tmp.path().join("config.json");
    std::fs::write(&cfg, config).unwrap();
    let mut outputs: Vec<Vec<String>> = Vec::new();
    for (run, threads) in [("t1", "1"), ("t8", "8"), ("t1b", "1")] {
        let out = tmp.path().join(run);
        for sub in ["simulate", "clt"] {
            let status = std::process::Command::new(env!("CARGO_BIN_EXE_stabnet"))
                .args([sub, "--config"])
                .arg(&cfg)
                .args(["--threads", threads, "--out"])
                .arg(out.join(sub))
                .status()
                .unwrap();
            assert!(status.success(), "{sub} run failed");
        }
        outputs.push(
            [
                ("simulate", "edges.csv"),
                ("clt", "draws.csv"),
                ("clt", "qq.csv"),
                ("clt", "report.txt"),
            ]
            .iter()
            .map(|(sub, name)| std::fs::read_to_string(out.join(sub).join(name)).unwrap())
            .collect(),
        );
    }
    let pass = outputs[0] == outputs[1] && outputs[0] == outputs[2];
    verdict(
        12,
        "determinism",
        pass,
        "edge lists, draws, Q-Q data, and reports byte-identical at thread counts 1 and 8",
    );
}
