//! Dominating multi-type branching processes and the subcriticality norm.
//!
//! Strategic-interaction chains in the sparse network are stochastically
//! dominated by Galton-Watson processes whose offspring are Poisson point
//! processes with radial intensities built from the link kernels:
//! the D-process (driven by the non-robustness gap p1) dominates strategic
//! neighborhoods, the fixed-depth M-process (driven by the possible-link
//! kernel pbar) dominates K-neighborhoods in the possible network, and the
//! hybrid process composes the two. Subcriticality of the D-process is
//! certified by the mixed norm of h_D being below 1.

use crate::error::{CoreError, Result};
use crate::model::{AttributeLaw, ModelSpec, ShockLaw, Which};
use crate::numeric::{mean, simpson_adaptive, variance};
use crate::rng::{Stream, StreamRng};
use rayon::prelude::*;
use serde::Serialize;

// ==== Kernels ==================================================================

/// Non-shock part of the latent index other than the strategic term and the
/// distance: intercept + beta_z.(z + z').
fn attr_part(spec: &ModelSpec, which: Which, z: &[f64], z_prime: &[f64]) -> f64 {
    let block = spec.params(which);
    let mut c = block.intercept;
    for (k, b) in block.beta_z.iter().enumerate() {
        c += b * (z[k] + z_prime[k]);
    }
    c
}

/// Gap kernel p1: probability that a period-0 link at scaled distance
/// `delta` between types (z, z') is possible but not robust,
/// P(sup_s V0 > 0) - P(inf_s V0 > 0). In [0, 1], decreasing to 0 in delta.
pub fn p1_kernel(spec: &ModelSpec, delta: f64, z: &[f64], z_prime: &[f64]) -> f64 {
    let c = attr_part(spec, Which::V0, z, z_prime);
    let (s_lo, s_hi) = spec.strategic_range(Which::V0);
    (spec.shock_law.survival(delta - c - s_hi) - spec.shock_law.survival(delta - c - s_lo))
        .max(0.0)
}

/// Possible-link kernel pbar: probability that a pair at scaled distance
/// `delta` is linked in some period of the possible network, with all
/// non-distance arguments at their sup corner and shocks independent across
/// periods: 1 - prod_t (1 - Phi_bar(delta - M_t)).
pub fn pbar_kernel(spec: &ModelSpec, delta: f64) -> f64 {
    let sup_v0 = spec.v0_params.intercept
        + spec.strategic_range(Which::V0).1
        + spec.attribute_range(Which::V0).1;
    let mut miss = 1.0 - spec.shock_law.survival(delta - sup_v0);
    if spec.t_max >= 1 {
        let sup_v = spec.v_params.intercept
            + spec.strategic_range(Which::V).1
            + spec.attribute_range(Which::V).1;
        let p = spec.shock_law.survival(delta - sup_v);
        miss *= (1.0 - p).powi(spec.t_max as i32);
    }
    1.0 - miss
}

/// Surface area of the unit sphere in R^d.
fn sphere_surface(d: usize) -> f64 {
    use std::f64::consts::PI;
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        d => {
            // 2 pi^{d/2} / Gamma(d/2)
            let half = d as f64 / 2.0;
            2.0 * PI.powf(half) / statrs::function::gamma::gamma(half)
        }
    }
}

/// Upper integration limit for a radial kernel: doubles until the kernel is
/// numerically extinct.
fn radial_cutoff<F: Fn(f64) -> f64>(kernel: F) -> f64 {
    let mut u = 8.0f64;
    while kernel(u) > 1e-18 && u < 1e6 {
        u *= 2.0;
    }
    u
}

/// Integral over R^d of a radial kernel g(||u||):
/// S_{d-1} int_0^inf u^{d-1} g(u) du.
fn radial_mass(spec: &ModelSpec, g: impl Fn(f64) -> f64 + Copy) -> Result<f64> {
    let d = spec.d;
    let cut = radial_cutoff(g);
    let integrand = |u: f64| u.powi(d as i32 - 1) * g(u);
    let val = simpson_adaptive(integrand, 0.0, cut, 1e-12)?;
    Ok(sphere_surface(d) * val)
}

// ==== Offspring machinery ======================================================

/// Inverse-CDF table for the radial density proportional to u^{d-1} g(u).
struct RadialSampler {
    grid: Vec<f64>,
    cdf: Vec<f64>,
}

impl RadialSampler {
    fn build(d: usize, g: impl Fn(f64) -> f64, cut: f64) -> Self {
        const N: usize = 4096;
        let h = cut / N as f64;
        let mut grid = Vec::with_capacity(N + 1);
        let mut cdf = Vec::with_capacity(N + 1);
        let mut acc = 0.0;
        let mut prev = 0.0;
        grid.push(0.0);
        cdf.push(0.0);
        for k in 1..=N {
            let u = k as f64 * h;
            let f = u.powi(d as i32 - 1) * g(u);
            acc += 0.5 * (prev + f) * h;
            prev = f;
            grid.push(u);
            cdf.push(acc);
        }
        let total = acc.max(f64::MIN_POSITIVE);
        for c in &mut cdf {
            *c /= total;
        }
        RadialSampler { grid, cdf }
    }

    fn sample(&self, u01: f64) -> f64 {
        let idx = self.cdf.partition_point(|&c| c < u01);
        if idx == 0 {
            return self.grid[0];
        }
        if idx >= self.cdf.len() {
            return *self.grid.last().unwrap();
        }
        let (c0, c1) = (self.cdf[idx - 1], self.cdf[idx]);
        let w = if c1 > c0 { (u01 - c0) / (c1 - c0) } else { 0.0 };
        self.grid[idx - 1] + w * (self.grid[idx] - self.grid[idx - 1])
    }
}

/// Draw one attribute vector from Phi* (the marginal law of Z_i0).
fn draw_type(spec: &ModelSpec, rng: &mut StreamRng) -> Vec<f64> {
    (0..spec.d_z)
        .map(|_| {
            let u = rng.next_uniform();
            match spec.attribute_law {
                AttributeLaw::IidBernoulli { p } => (u < p) as u8 as f64,
                AttributeLaw::IidUniform => u,
                AttributeLaw::None => unreachable!("d_z = 0 under attribute_law none"),
            }
        })
        .collect()
}

// ==== Process configuration ====================================================

/// Which dominating process to simulate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntensityKind {
    /// Strategic-gap process: Poisson offspring with intensity
    /// kappa f_bar (1+r) p1, every generation.
    DProcess,
    /// Possible-link process with intensity kappa f_bar (1+r) pbar,
    /// stopping after `depth` rounds of reproduction (depth + 1 generations).
    MProcess { depth: usize },
    /// Hybrid: M-process of depth 2K + T + 1, then a D-process from each of
    /// its particles, then an M-process of depth 1 from each D-particle.
    Hybrid { k: usize },
}

/// Offspring law: the model-driven kernels, or a constant mean (single-type
/// Galton-Watson reduction used for calibration).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OffspringLaw {
    /// Kernel intensities derived from the model spec.
    Model,
    /// Poisson(mu) offspring regardless of type (calibration mode).
    ConstantMean { mu: f64 },
}

/// Branching-simulation configuration.
#[derive(Clone, Debug)]
pub struct BranchingConfig<'a> {
    /// Model whose kernels drive the intensities.
    pub spec: &'a ModelSpec,
    /// Process topology.
    pub kind: IntensityKind,
    /// Offspring law.
    pub offspring: OffspringLaw,
    /// The (1 + r) slack factor's r (typically the active sparsity scale).
    pub slack: f64,
    /// Hard cap on the total population; hitting it flags truncation.
    pub population_cap: usize,
    /// Master seed.
    pub seed: u64,
}

/// One simulated branching realization.
#[derive(Clone, Debug, Serialize)]
pub struct BranchingSample {
    /// Number of particles ultimately generated (root included).
    pub total_size: usize,
    /// Whether the population cap was hit.
    pub truncated: bool,
    /// Number of generations realized.
    pub generations: usize,
}

/// Precomputed per-config sampling tables.
struct Engine<'a> {
    spec: &'a ModelSpec,
    /// Dominating Poisson mean for D offspring and its radial sampler,
    /// plus the dominating offset c_max (p1(delta) <= survival(delta - c_max)).
    d_mass: f64,
    d_sampler: Option<RadialSampler>,
    d_cmax: f64,
    /// Poisson mean for M offspring (pbar is type-free, no thinning).
    m_mass: f64,
}

impl<'a> Engine<'a> {
    fn new(spec: &'a ModelSpec, slack: f64) -> Result<Self> {
        // f_bar = 1 for the uniform cube.
        let kappa_eff = spec.kappa * (1.0 + slack);
        let c_max = spec.v0_params.intercept
            + spec.strategic_range(Which::V0).1
            + spec.attribute_range(Which::V0).1;
        let dom = move |u: f64| {
            let law: ShockLaw = spec.shock_law;
            let (s_lo, s_hi) = spec.strategic_range(Which::V0);
            // Type-free upper bound on p1: gap at the most favorable types.
            (law.survival(u - c_max) - law.survival(u - c_max + (s_hi - s_lo))).max(0.0)
        };
        let d_raw = radial_mass(spec, dom)?;
        let d_mass = kappa_eff * d_raw;
        let d_sampler = if d_raw > 0.0 {
            Some(RadialSampler::build(spec.d, dom, radial_cutoff(dom)))
        } else {
            None
        };
        let pbar = |u: f64| pbar_kernel(spec, u);
        let m_mass = kappa_eff * radial_mass(spec, pbar)?;
        Ok(Engine { spec, d_mass, d_sampler, d_cmax: c_max, m_mass })
    }

    /// Offspring types of one D-particle of type `z`: dominating Poisson
    /// draw thinned by the exact type-dependent kernel ratio.
    fn d_offspring(&self, z: &[f64], rng: &mut StreamRng, out: &mut Vec<Vec<f64>>) {
        if self.d_mass == 0.0 {
            return;
        }
        let sampler = self.d_sampler.as_ref().expect("positive mass has a sampler");
        let count = rng.next_poisson(self.d_mass);
        let (s_lo, s_hi) = self.spec.strategic_range(Which::V0);
        for _ in 0..count {
            let delta = sampler.sample(rng.next_uniform());
            let z_prime = draw_type(self.spec, rng);
            let dom = (self.spec.shock_law.survival(delta - self.d_cmax)
                - self.spec.shock_law.survival(delta - self.d_cmax + (s_hi - s_lo)))
            .max(0.0);
            let p1 = p1_kernel(self.spec, delta, z, &z_prime);
            if dom > 0.0 && rng.next_uniform() < p1 / dom {
                out.push(z_prime);
            }
        }
    }
}

/// Simulate one branching realization; `rep` indexes the replication (it
/// keys the random stream together with the config seed).
pub fn simulate_branching(config: &BranchingConfig, rep: u64) -> Result<BranchingSample> {
    let mut rng = StreamRng::new(config.seed, Stream::Branching, rep, 0);
    match config.offspring {
        OffspringLaw::ConstantMean { mu } => {
            if !(mu >= 0.0) || !mu.is_finite() {
                return Err(CoreError::ContractViolation("offspring mean must be >= 0".into()));
            }
            Ok(run_single_type(config, mu, &mut rng))
        }
        OffspringLaw::Model => {
            let engine = Engine::new(config.spec, config.slack)?;
            Ok(run_typed(config, &engine, &mut rng))
        }
    }
}

/// Single-type run: offspring counts only.
fn run_single_type(config: &BranchingConfig, mu: f64, rng: &mut StreamRng) -> BranchingSample {
    let cap = config.population_cap;
    let reproduce = |gens: Option<usize>, rng: &mut StreamRng| -> BranchingSample {
        let mut total = 1usize;
        let mut current = 1u64;
        let mut g = 0usize;
        loop {
            if let Some(limit) = gens {
                if g >= limit {
                    break;
                }
            }
            if current == 0 {
                break;
            }
            let next: u64 = (0..current).map(|_| rng.next_poisson(mu)).sum();
            total += next as usize;
            current = next;
            g += 1;
            if total >= cap {
                return BranchingSample { total_size: cap, truncated: true, generations: g };
            }
        }
        BranchingSample { total_size: total, truncated: false, generations: g }
    };
    match config.kind {
        IntensityKind::DProcess => reproduce(None, rng),
        IntensityKind::MProcess { depth } => reproduce(Some(depth), rng),
        IntensityKind::Hybrid { k } => {
            // Compose the three phases on counts alone.
            let depth1 = 2 * k + config.spec.t_max + 1;
            let phase1 = reproduce(Some(depth1), rng);
            if phase1.truncated {
                return phase1;
            }
            let mut total = phase1.total_size;
            for _ in 0..phase1.total_size {
                let dpart = reproduce(None, rng);
                total += dpart.total_size - 1; // the D root is the M particle
                if dpart.truncated || total >= cap {
                    return BranchingSample { total_size: cap.min(total), truncated: true, generations: phase1.generations };
                }
                for _ in 0..dpart.total_size {
                    let m1 = reproduce(Some(1), rng);
                    total += m1.total_size - 1;
                    if total >= cap {
                        return BranchingSample { total_size: cap, truncated: true, generations: phase1.generations };
                    }
                }
            }
            BranchingSample { total_size: total, truncated: false, generations: phase1.generations }
        }
    }
}

/// Typed run with model kernels.
fn run_typed(config: &BranchingConfig, engine: &Engine, rng: &mut StreamRng) -> BranchingSample {
    let cap = config.population_cap;
    match config.kind {
        IntensityKind::DProcess => {
            let root = draw_type(config.spec, rng);
            run_d_from(engine, vec![root], cap, rng)
        }
        IntensityKind::MProcess { depth } => run_m(engine, depth, cap, rng),
        IntensityKind::Hybrid { k } => {
            let depth1 = 2 * k + config.spec.t_max + 1;
            let phase1 = run_m(engine, depth1, cap, rng);
            if phase1.truncated {
                return phase1;
            }
            let mut total = phase1.total_size;
            for _ in 0..phase1.total_size {
                let root = draw_type(config.spec, rng);
                let dpart = run_d_from(engine, vec![root], cap, rng);
                total += dpart.total_size - 1;
                if dpart.truncated || total >= cap {
                    return BranchingSample { total_size: cap.min(total), truncated: true, generations: phase1.generations };
                }
                for _ in 0..dpart.total_size {
                    let m1 = run_m(engine, 1, cap, rng);
                    total += m1.total_size - 1;
                    if total >= cap {
                        return BranchingSample { total_size: cap, truncated: true, generations: phase1.generations };
                    }
                }
            }
            BranchingSample { total_size: total, truncated: false, generations: phase1.generations }
        }
    }
}

/// D-process from given root types, running to extinction or the cap.
fn run_d_from(
    engine: &Engine,
    roots: Vec<Vec<f64>>,
    cap: usize,
    rng: &mut StreamRng,
) -> BranchingSample {
    let mut total = roots.len();
    let mut current = roots;
    let mut generations = 0usize;
    while !current.is_empty() {
        let mut next = Vec::new();
        for z in &current {
            engine.d_offspring(z, rng, &mut next);
        }
        total += next.len();
        generations += 1;
        if total >= cap {
            return BranchingSample { total_size: cap, truncated: true, generations };
        }
        current = next;
    }
    BranchingSample { total_size: total, truncated: false, generations }
}

/// M-process (type-free: pbar's corner bound already maximizes over types).
fn run_m(engine: &Engine, depth: usize, cap: usize, rng: &mut StreamRng) -> BranchingSample {
    let mut total = 1usize;
    let mut current = 1u64;
    let mut g = 0usize;
    while g < depth && current > 0 {
        let next: u64 = (0..current).map(|_| rng.next_poisson(engine.m_mass)).sum();
        total += next as usize;
        current = next;
        g += 1;
        if total >= cap {
            return BranchingSample { total_size: cap, truncated: true, generations: g };
        }
    }
    BranchingSample { total_size: total, truncated: false, generations: g }
}

/// Simulate many replications in parallel; errors with
/// [`CoreError::SupercriticalSuspected`] when more than half hit the cap.
pub fn branching_sizes(config: &BranchingConfig, reps: usize) -> Result<Vec<BranchingSample>> {
    let samples: Vec<BranchingSample> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| simulate_branching(config, rep))
        .collect::<Result<_>>()?;
    let hit = samples.iter().filter(|s| s.truncated).count();
    if 2 * hit > reps {
        return Err(CoreError::SupercriticalSuspected {
            frac: 100.0 * hit as f64 / reps as f64,
        });
    }
    Ok(samples)
}

// ==== Subcriticality norm ======================================================

/// Enumerate the support of Phi* with weights (exact for Bernoulli/none;
/// fixed quadrature grid for uniform attributes).
fn type_support(spec: &ModelSpec) -> Vec<(Vec<f64>, f64)> {
    match spec.attribute_law {
        AttributeLaw::None => vec![(vec![], 1.0)],
        AttributeLaw::IidBernoulli { p } => {
            let mut out = vec![(vec![], 1.0)];
            for _ in 0..spec.d_z {
                let mut next = Vec::with_capacity(out.len() * 2);
                for (z, w) in &out {
                    let mut z0 = z.clone();
                    z0.push(0.0);
                    next.push((z0, w * (1.0 - p)));
                    let mut z1 = z.clone();
                    z1.push(1.0);
                    next.push((z1, w * p));
                }
                out = next;
            }
            out
        }
        AttributeLaw::IidUniform => {
            // Midpoint grid per dimension (16 points), tensorized.
            const G: usize = 16;
            let pts: Vec<f64> = (0..G).map(|k| (k as f64 + 0.5) / G as f64).collect();
            let mut out = vec![(vec![], 1.0)];
            for _ in 0..spec.d_z {
                let mut next = Vec::with_capacity(out.len() * G);
                for (z, w) in &out {
                    for &p in &pts {
                        let mut zp = z.clone();
                        zp.push(p);
                        next.push((zp, w / G as f64));
                    }
                }
                out = next;
            }
            out
        }
    }
}

/// h_D at one type z: kappa f_bar S_{d-1} int u^{d-1} sqrt(E_{z'} p1^2) du.
fn h_d_at(spec: &ModelSpec, z: &[f64], support: &[(Vec<f64>, f64)]) -> Result<f64> {
    let rms = |u: f64| {
        let mut acc = 0.0;
        for (zp, w) in support {
            let p = p1_kernel(spec, u, z, zp);
            acc += w * p * p;
        }
        acc.sqrt()
    };
    radial_mass(spec, &rms).map(|m| spec.kappa * m)
}

/// Mixed subcriticality norm of h_D: position-free by translation
/// invariance, root-mean-square over the type distribution Phi*.
/// A value below 1 certifies the configured model subcritical.
pub fn h_d_norm(spec: &ModelSpec) -> Result<f64> {
    let support = type_support(spec);
    let mut acc = 0.0;
    for (z, w) in &support {
        let h = h_d_at(spec, z, &support)?;
        acc += w * h * h;
    }
    Ok(acc.sqrt())
}

/// Monte Carlo cross-check of the radial integral in [`h_d_norm`] for
/// attribute-free models: importance sampling with an Exp(1) radial
/// proposal. Returns (estimate, standard error).
pub fn h_d_norm_mc(spec: &ModelSpec, draws: usize, seed: u64) -> Result<(f64, f64)> {
    if spec.d_z != 0 {
        return Err(CoreError::ContractViolation(
            "Monte Carlo norm cross-check supports attribute-free models only".into(),
        ));
    }
    if draws < 2 {
        return Err(CoreError::InsufficientData { need: 2, got: draws });
    }
    let s = sphere_surface(spec.d);
    let weights: Vec<f64> = (0..draws as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = StreamRng::new(seed, Stream::Diagnostic, k, 1);
            let u = -rng.next_uniform().ln(); // Exp(1) proposal, density e^{-u}
            let f = u.powi(spec.d as i32 - 1) * p1_kernel(spec, u, &[], &[]);
            f * u.exp()
        })
        .collect();
    let m = mean(&weights);
    let se = (variance(&weights) / draws as f64).sqrt();
    Ok((spec.kappa * s * m, spec.kappa * s * se))
}

// ==== Stochastic-domination diagnostic =========================================

/// Empirical survival comparison between network quantities and their
/// dominating branching processes.
#[derive(Clone, Debug, Serialize)]
pub struct DominationReport {
    /// Integer thresholds of the survival grid.
    pub thresholds: Vec<usize>,
    /// P(|C_i| > w): strategic-component sizes from simulated networks.
    pub net_component_survival: Vec<f64>,
    /// P(|X^D| > w): D-process total sizes.
    pub branching_d_survival: Vec<f64>,
    /// P(|N_M(i, K)| > w): possible-network K-neighborhood sizes.
    pub net_kneigh_survival: Vec<f64>,
    /// P(|X^M| > w): depth-K M-process total sizes.
    pub branching_m_survival: Vec<f64>,
    /// Thresholds where the D-process survival falls below the component
    /// survival by more than Monte Carlo slack.
    pub d_violations: usize,
    /// Same for the M side.
    pub m_violations: usize,
    /// Mean sizes (component, D-process, K-neighborhood, M-process).
    pub means: [f64; 4],
}

fn survival_curve(samples: &[usize], thresholds: &[usize]) -> Vec<f64> {
    let n = samples.len().max(1) as f64;
    thresholds
        .iter()
        .map(|&w| samples.iter().filter(|&&x| x > w).count() as f64 / n)
        .collect()
}

/// Simulate strategic-component and possible-K-neighborhood sizes from
/// `net_reps` networks of size n, against `branch_reps` replications of the
/// dominating D- and M-processes.
pub fn compare_domination(
    spec: &ModelSpec,
    n: usize,
    net_reps: usize,
    branch_reps: usize,
    k: usize,
    seed: u64,
) -> Result<DominationReport> {
    let scale = crate::model::SparsityScale::new(spec, n)?;
    let mut comp_sizes: Vec<usize> = Vec::with_capacity(n * net_reps);
    let mut kneigh_sizes: Vec<usize> = Vec::with_capacity(n * net_reps);
    for rep in 0..net_reps as u64 {
        let ids: Vec<u64> = (0..n as u64).collect();
        let prims = crate::model::sample_primitives(spec, &ids, seed ^ (rep + 1))?;
        let decomp = crate::formation::classify_robustness(spec, &prims, scale);
        for i in 0..n {
            comp_sizes.push(decomp.d.component(i).len());
        }
        let (_, m_union) = crate::stabilization::build_m_networks(spec, &prims, scale);
        for i in 0..n {
            kneigh_sizes.push(m_union.k_neighborhood(i, k).len());
        }
    }
    let d_config = BranchingConfig {
        spec,
        kind: IntensityKind::DProcess,
        offspring: OffspringLaw::Model,
        slack: scale.r,
        population_cap: 1_000_000,
        seed: seed ^ 0xD0,
    };
    let d_sizes: Vec<usize> = branching_sizes(&d_config, branch_reps)?
        .into_iter()
        .map(|s| s.total_size)
        .collect();
    let m_config = BranchingConfig {
        kind: IntensityKind::MProcess { depth: k },
        seed: seed ^ 0xA1,
        ..d_config
    };
    let m_sizes: Vec<usize> = branching_sizes(&m_config, branch_reps)?
        .into_iter()
        .map(|s| s.total_size)
        .collect();
    let thresholds: Vec<usize> = (1..=20).collect();
    let net_c = survival_curve(&comp_sizes, &thresholds);
    let br_d = survival_curve(&d_sizes, &thresholds);
    let net_k = survival_curve(&kneigh_sizes, &thresholds);
    let br_m = survival_curve(&m_sizes, &thresholds);
    let slack_net = 3.0 / (comp_sizes.len() as f64).sqrt();
    let slack_br = 3.0 / (branch_reps as f64).sqrt();
    let slack = slack_net + slack_br;
    let d_violations = net_c.iter().zip(&br_d).filter(|(nc, bd)| **bd < *nc - slack).count();
    let m_violations = net_k.iter().zip(&br_m).filter(|(nk, bm)| **bm < *nk - slack).count();
    let means = [
        mean(&comp_sizes.iter().map(|&v| v as f64).collect::<Vec<_>>()),
        mean(&d_sizes.iter().map(|&v| v as f64).collect::<Vec<_>>()),
        mean(&kneigh_sizes.iter().map(|&v| v as f64).collect::<Vec<_>>()),
        mean(&m_sizes.iter().map(|&v| v as f64).collect::<Vec<_>>()),
    ];
    Ok(DominationReport {
        thresholds,
        net_component_survival: net_c,
        branching_d_survival: br_d,
        net_kneigh_survival: net_k,
        branching_m_survival: br_m,
        d_violations,
        m_violations,
        means,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LatentParams, PositionLaw, SKind};

    fn strategic_spec(shock: ShockLaw) -> ModelSpec {
        ModelSpec {
            d: 1,
            d_z: 0,
            t_max: 1,
            kappa: 1.0,
            v_params: LatentParams { beta_s: vec![0.5], beta_z: vec![], intercept: -1.0 },
            v0_params: LatentParams { beta_s: vec![0.5], beta_z: vec![], intercept: -1.0 },
            shock_law: shock,
            s_kind: SKind::CommonNeighborMax,
            position_law: PositionLaw::UniformUnitCube,
            attribute_law: AttributeLaw::None,
            s_bounds: vec![(0.0, 1.0)],
        }
    }

    #[test]
    fn p1_spot_values_match_direct_cdf_arithmetic() {
        let spec = strategic_spec(ShockLaw::Logistic);
        let lam = |x: f64| 1.0 / (1.0 + (-x).exp());
        for delta in [0.0, 0.5, 1.3, 4.0] {
            let want = lam(-0.5 - delta) - lam(-1.0 - delta);
            let got = p1_kernel(&spec, delta, &[], &[]);
            assert!((got - want).abs() < 1e-14, "delta {delta}: {got} vs {want}");
        }
        // Monotone decreasing to 0.
        let mut prev = f64::INFINITY;
        for k in 0..40 {
            let v = p1_kernel(&spec, k as f64 * 0.5, &[], &[]);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
        assert!(prev < 1e-6);
    }

    #[test]
    fn p1_vanishes_without_strategic_terms() {
        let mut spec = strategic_spec(ShockLaw::Logistic);
        spec.v0_params.beta_s = vec![0.0];
        for delta in [0.0, 1.0, 2.0] {
            assert_eq!(p1_kernel(&spec, delta, &[], &[]), 0.0);
        }
    }

    #[test]
    fn pbar_reduces_to_independence_arithmetic() {
        // Identical V across periods: 1 - (1-p)^{T+1}.
        let mut spec = strategic_spec(ShockLaw::Logistic);
        spec.t_max = 2;
        spec.v_params = spec.v0_params.clone();
        for delta in [0.2, 1.0, 3.0] {
            let p = spec.shock_law.survival(delta - (-1.0 + 0.5));
            let want = 1.0 - (1.0 - p).powi(3);
            assert!((pbar_kernel(&spec, delta) - want).abs() < 1e-14);
        }
        // T = 0: single-period sup-corner survival.
        spec.t_max = 0;
        let delta = 0.7;
        assert!(
            (pbar_kernel(&spec, delta) - spec.shock_law.survival(delta + 0.5)).abs() < 1e-14
        );
    }

    #[test]
    fn h_d_matches_the_exponential_closed_form() {
        // Exp(1) shocks: p1(u) = e^{-u}(e^{-1/2} - e^{-1}), so
        // h_D = 2 kappa (e^{-1/2} - e^{-1}).
        let spec = strategic_spec(ShockLaw::Exponential);
        let want = 2.0 * ((-0.5f64).exp() - (-1.0f64).exp());
        let got = h_d_norm(&spec).unwrap();
        assert!((got - want).abs() < 1e-4, "{got} vs {want}");
    }

    #[test]
    fn h_d_matches_the_logistic_closed_form() {
        // int_R Lambda(c - |u|) du = 2 ln(1 + e^c).
        let spec = strategic_spec(ShockLaw::Logistic);
        let want = 2.0 * ((1.0 + (-0.5f64).exp()).ln() - (1.0 + (-1.0f64).exp()).ln());
        let got = h_d_norm(&spec).unwrap();
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }

    #[test]
    fn h_d_is_zero_without_strategic_terms() {
        let mut spec = strategic_spec(ShockLaw::Logistic);
        spec.v0_params.beta_s = vec![0.0];
        assert_eq!(h_d_norm(&spec).unwrap(), 0.0);
    }

    #[test]
    fn h_d_monte_carlo_agrees_with_quadrature() {
        let spec = strategic_spec(ShockLaw::Logistic);
        let quad = h_d_norm(&spec).unwrap();
        let (mc, se) = h_d_norm_mc(&spec, 200_000, 31).unwrap();
        assert!((mc - quad).abs() < 3.0 * se, "mc {mc} quad {quad} se {se}");
    }

    #[test]
    fn h_d_is_monotone_in_the_strategic_coefficient() {
        let mut prev = 0.0;
        for &b in &[0.1, 0.3, 0.6, 1.0] {
            let mut spec = strategic_spec(ShockLaw::Logistic);
            spec.v0_params.beta_s = vec![b];
            let h = h_d_norm(&spec).unwrap();
            assert!(h > prev, "beta {b}: {h} <= {prev}");
            prev = h;
        }
    }

    #[test]
    fn zero_kernel_processes_stay_at_the_root() {
        let mut spec = strategic_spec(ShockLaw::Logistic);
        spec.v0_params.beta_s = vec![0.0];
        spec.v0_params.intercept = -1e9;
        spec.v_params.intercept = -1e9;
        let config = BranchingConfig {
            spec: &spec,
            kind: IntensityKind::DProcess,
            offspring: OffspringLaw::Model,
            slack: 0.0,
            population_cap: 1000,
            seed: 7,
        };
        for rep in 0..50 {
            let s = simulate_branching(&config, rep).unwrap();
            assert_eq!(s.total_size, 1);
            assert!(!s.truncated);
        }
    }

    #[test]
    fn single_type_gw_mean_size_matches_theory() {
        // Subcritical GW with Poisson(mu) offspring: E|X| = 1/(1-mu).
        let spec = strategic_spec(ShockLaw::Logistic);
        let mu = 0.5;
        let config = BranchingConfig {
            spec: &spec,
            kind: IntensityKind::DProcess,
            offspring: OffspringLaw::ConstantMean { mu },
            slack: 0.0,
            population_cap: 1_000_000,
            seed: 11,
        };
        let reps = 20_000;
        let sizes = branching_sizes(&config, reps).unwrap();
        let m = mean(&sizes.iter().map(|s| s.total_size as f64).collect::<Vec<_>>());
        assert!((m - 2.0).abs() < 0.06, "mean {m}");
    }

    #[test]
    fn fixed_depth_means_match_generationwise_expectation() {
        let spec = strategic_spec(ShockLaw::Logistic);
        let mu = 0.6;
        for (depth, want) in [(1usize, 1.0 + mu), (2, 1.0 + mu + mu * mu)] {
            let config = BranchingConfig {
                spec: &spec,
                kind: IntensityKind::MProcess { depth },
                offspring: OffspringLaw::ConstantMean { mu },
                slack: 0.0,
                population_cap: 1_000_000,
                seed: 13 + depth as u64,
            };
            let sizes = branching_sizes(&config, 20_000).unwrap();
            let m = mean(&sizes.iter().map(|s| s.total_size as f64).collect::<Vec<_>>());
            assert!((m - want).abs() < 0.05, "depth {depth}: mean {m} vs {want}");
        }
    }

    #[test]
    fn model_d_process_mean_matches_offspring_mass() {
        // Subcritical single-type model (d_z = 0): offspring mean is
        // kappa (1+r) int p1, and E|X| = 1/(1 - mean).
        let spec = strategic_spec(ShockLaw::Logistic);
        let mu = h_d_norm(&spec).unwrap(); // = kappa int p1 for d_z = 0
        let config = BranchingConfig {
            spec: &spec,
            kind: IntensityKind::DProcess,
            offspring: OffspringLaw::Model,
            slack: 0.0,
            population_cap: 1_000_000,
            seed: 17,
        };
        let sizes = branching_sizes(&config, 20_000).unwrap();
        let m = mean(&sizes.iter().map(|s| s.total_size as f64).collect::<Vec<_>>());
        let want = 1.0 / (1.0 - mu);
        assert!((m - want).abs() < 0.05, "mean {m} vs {want} (mu = {mu})");
    }

    #[test]
    fn supercritical_configurations_are_flagged() {
        let spec = strategic_spec(ShockLaw::Logistic);
        let config = BranchingConfig {
            spec: &spec,
            kind: IntensityKind::DProcess,
            offspring: OffspringLaw::ConstantMean { mu: 1.5 },
            slack: 0.0,
            population_cap: 500,
            seed: 19,
        };
        assert!(matches!(
            branching_sizes(&config, 200),
            Err(CoreError::SupercriticalSuspected { .. })
        ));
    }

    #[test]
    fn domination_holds_on_a_small_instance() {
        let spec = strategic_spec(ShockLaw::Logistic);
        let report = compare_domination(&spec, 300, 3, 3000, 1, 23).unwrap();
        assert_eq!(report.d_violations, 0, "D survival: {:?}", report);
        assert_eq!(report.m_violations, 0, "M survival: {:?}", report);
        assert!(report.means[1] >= report.means[0]);
        // The M-side gap is only the (1+r) slack plus boundary effects, so
        // allow Monte Carlo noise around equality.
        assert!(report.means[3] >= report.means[2] - 0.1, "means {:?}", report.means);
    }

    #[test]
    fn d_process_sizes_have_exponential_tails() {
        let spec = strategic_spec(ShockLaw::Logistic);
        let config = BranchingConfig {
            spec: &spec,
            kind: IntensityKind::DProcess,
            offspring: OffspringLaw::ConstantMean { mu: 0.7 },
            slack: 0.0,
            population_cap: 1_000_000,
            seed: 29,
        };
        let sizes: Vec<f64> = branching_sizes(&config, 30_000)
            .unwrap()
            .iter()
            .map(|s| s.total_size as f64)
            .collect();
        let fit = crate::stabilization::tail_fit(&sizes).unwrap();
        assert!(fit.exponential_tail_consistent(), "fit {fit:?}");
    }
}
