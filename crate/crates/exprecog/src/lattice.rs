//! Finite generator sets for dense additive subgroups of ℝ^d inside a given
//! ball, and a constructive density check.
//!
//! ℤ^d + θℤ is dense in ℝ^d when {1, θ_1, …, θ_d} is ℚ-linearly
//! independent; square roots of distinct primes are a classical such choice.
//! Scaling by 1/N shrinks the generators into any ball around the origin,
//! and the off-center construction {x_0, x_0+h_1, …} reduces to the centered
//! one through differences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Generators of a (dense, unless degenerate) additive subgroup, all lying
/// strictly inside the recorded ball.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    dim: usize,
    /// x_0; the origin for the centered construction.
    center: Vec<f64>,
    /// The 1/N factor applied to the coordinate and θ generators.
    scale: f64,
    /// θ vector, or None for a degenerate set without the irrational
    /// generator (useful as a negative control: the group is not dense).
    theta: Option<Vec<f64>>,
    /// Whether x_0 itself is a generator (the off-center construction).
    include_center: bool,
    /// Ball (center, radius) the set was built inside.
    ball: (Vec<f64>, f64),
    generators: Vec<Vec<f64>>,
}

impl GeneratorSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn theta(&self) -> Option<&[f64]> {
        self.theta.as_deref()
    }

    pub fn ball(&self) -> (&[f64], f64) {
        (&self.ball.0, self.ball.1)
    }

    pub fn generators(&self) -> &[Vec<f64>] {
        &self.generators
    }

    fn rebuild_generators(&mut self) {
        let mut gens = Vec::new();
        if self.include_center {
            gens.push(self.center.clone());
        }
        for i in 0..self.dim {
            let mut g = if self.include_center { self.center.clone() } else { vec![0.0; self.dim] };
            g[i] += self.scale;
            gens.push(g);
        }
        if let Some(theta) = &self.theta {
            let mut g = if self.include_center { self.center.clone() } else { vec![0.0; self.dim] };
            for (gi, &ti) in g.iter_mut().zip(theta) {
                *gi += self.scale * ti;
            }
            gens.push(g);
        }
        self.generators = gens;
    }

    /// Degenerate set spanning scale·ℤ^d only (no θ generator). Not dense;
    /// exists so density probes have a negative control.
    pub fn integer_lattice(dim: usize, scale: f64) -> Result<Self> {
        if dim == 0 || scale <= 0.0 {
            return Err(Error::invalid("dimension and scale must be positive"));
        }
        let mut set = Self {
            dim,
            center: vec![0.0; dim],
            scale,
            theta: None,
            include_center: false,
            ball: (vec![0.0; dim], scale * 2.0),
            generators: Vec::new(),
        };
        set.rebuild_generators();
        Ok(set)
    }
}

/// Square roots of the first d primes; {1, √p_1, …, √p_d} is ℚ-linearly
/// independent (classical).
pub fn default_theta(dim: usize) -> Vec<f64> {
    let mut primes = Vec::with_capacity(dim);
    let mut candidate = 2u64;
    while primes.len() < dim {
        if (2..candidate).all(|k| candidate % k != 0) {
            primes.push(candidate);
        }
        candidate += 1;
    }
    primes.into_iter().map(|p| (p as f64).sqrt()).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Generators of a dense subgroup inside the ball B(x0, eps).
///
/// At x0 = 0 these are (1/N)e_1, …, (1/N)e_d, (1/N)θ with the smallest N
/// placing all of them strictly inside the ball. Elsewhere the set is
/// {x_0, x_0+h_1, …, x_0+h_{d+1}} with the h_i the centered construction at
/// radius eps/2; the differences recover the centered generators, so the
/// spanned group is still dense.
pub fn generators_in_ball(x0: &[f64], eps: f64) -> Result<GeneratorSet> {
    let dim = x0.len();
    if dim == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if eps <= 0.0 {
        return Err(Error::invalid("ball radius must be positive"));
    }
    let theta = default_theta(dim);
    let centered = x0.iter().all(|&c| c == 0.0);
    let radius = if centered { eps } else { eps / 2.0 };
    // |θ| > 1 ≥ |e_i| always, so θ governs the choice of N.
    let n = (norm(&theta) / radius).floor() as u64 + 1;
    let scale = 1.0 / n as f64;
    let mut set = GeneratorSet {
        dim,
        center: x0.to_vec(),
        scale,
        theta: Some(theta),
        include_center: !centered,
        ball: (x0.to_vec(), eps),
        generators: Vec::new(),
    };
    set.rebuild_generators();
    debug_assert!(set
        .generators
        .iter()
        .all(|g| norm(&g.iter().zip(x0).map(|(a, b)| a - b).collect::<Vec<_>>()) < eps));
    Ok(set)
}

/// An integer combination of the generators approximating a target.
#[derive(Debug, Clone)]
pub struct ApproximationResult {
    /// One integer per generator, in `generators()` order.
    pub coefficients: Vec<i64>,
    /// Σ coefficients[i] · generators[i].
    pub achieved: Vec<f64>,
    /// Sup-norm distance to the target.
    pub error: f64,
}

#[derive(Debug, Clone)]
pub enum ApproximateOutcome {
    /// First combination found with error ≤ eps, in sweep order.
    Hit(ApproximationResult),
    /// Best combination found within the budget.
    BudgetExhausted(ApproximationResult),
}

impl ApproximateOutcome {
    pub fn result(&self) -> &ApproximationResult {
        match self {
            ApproximateOutcome::Hit(r) | ApproximateOutcome::BudgetExhausted(r) => r,
        }
    }

    pub fn is_hit(&self) -> bool {
        matches!(self, ApproximateOutcome::Hit(_))
    }
}

/// Sweep order 0, 1, −1, 2, −2, … up to |m| ≤ bound.
fn sweep(bound: i64) -> impl Iterator<Item = i64> {
    (0..=bound).flat_map(|m| {
        if m == 0 {
            vec![0].into_iter()
        } else {
            vec![m, -m].into_iter()
        }
    })
}

/// Coefficient range searched for the x_0 generator in off-center sets.
const CENTER_COEFF_BUDGET: i64 = 8;

/// Search integer coefficients approximating `target` in sup-norm.
///
/// The θ coefficient m is swept over |m| ≤ budget; for each m (and each
/// x_0 multiplier t for off-center sets) the coordinate coefficients are
/// the componentwise rounding of (target − t·x_0 − m·scale·θ)/scale, which
/// is exact for this group. Returns the first hit with error ≤ eps, or the
/// best found when the budget runs out.
pub fn approximate(
    target: &[f64],
    set: &GeneratorSet,
    eps: f64,
    budget: i64,
) -> Result<ApproximateOutcome> {
    if target.len() != set.dim {
        return Err(Error::DimensionMismatch { expected: set.dim, got: target.len() });
    }
    if eps <= 0.0 || budget < 1 {
        return Err(Error::invalid("eps must be positive and budget at least 1"));
    }
    let dim = set.dim;
    let theta_budget = if set.theta.is_some() { budget } else { 0 };
    let center_budget = if set.include_center { CENTER_COEFF_BUDGET } else { 0 };

    // achieved = t·x0 + scale·k + m·scale·θ, reassembled from the stored
    // generator vectors so the reported combination is bit-exact.
    let combine = |t: i64, k: &[i64], m: i64| -> (Vec<i64>, Vec<f64>) {
        let mut coefficients = Vec::with_capacity(set.generators.len());
        if set.include_center {
            let k_sum: i64 = k.iter().sum();
            coefficients.push(t - k_sum - if set.theta.is_some() { m } else { 0 });
        }
        coefficients.extend_from_slice(k);
        if set.theta.is_some() {
            coefficients.push(m);
        }
        let mut achieved = vec![0.0; dim];
        for (c, g) in coefficients.iter().zip(&set.generators) {
            for (a, gi) in achieved.iter_mut().zip(g) {
                *a += *c as f64 * gi;
            }
        }
        (coefficients, achieved)
    };

    let mut best: Option<ApproximationResult> = None;
    for t in sweep(center_budget) {
        for m in sweep(theta_budget) {
            let mut k = Vec::with_capacity(dim);
            for i in 0..dim {
                let mut r = target[i] - t as f64 * set.center[i];
                if let Some(theta) = &set.theta {
                    r -= m as f64 * set.scale * theta[i];
                }
                k.push((r / set.scale).round() as i64);
            }
            let (coefficients, achieved) = combine(t, &k, m);
            let error = achieved
                .iter()
                .zip(target)
                .map(|(a, t)| (a - t).abs())
                .fold(0.0, f64::max);
            let result = ApproximationResult { coefficients, achieved, error };
            if error <= eps {
                return Ok(ApproximateOutcome::Hit(result));
            }
            if best.as_ref().map(|b| error < b.error).unwrap_or(true) {
                best = Some(result);
            }
        }
    }
    Ok(ApproximateOutcome::BudgetExhausted(best.expect("sweep is non-empty")))
}

/// Statistical spot-check of density over seeded uniform targets in [0,1]^d.
#[derive(Debug, Clone)]
pub struct DensityReport {
    pub hit_rate: f64,
    pub worst_error: f64,
    pub num_targets: usize,
}

pub fn density_probe(
    set: &GeneratorSet,
    num_targets: usize,
    eps: f64,
    budget: i64,
    seed: u64,
) -> Result<DensityReport> {
    if num_targets == 0 {
        return Ok(DensityReport { hit_rate: 1.0, worst_error: 0.0, num_targets: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    let mut worst_error: f64 = 0.0;
    for _ in 0..num_targets {
        let target: Vec<f64> = (0..set.dim).map(|_| rng.gen_range(0.0..1.0)).collect();
        let outcome = approximate(&target, set, eps, budget)?;
        if outcome.is_hit() {
            hits += 1;
        }
        worst_error = worst_error.max(outcome.result().error);
    }
    Ok(DensityReport {
        hit_rate: hits as f64 / num_targets as f64,
        worst_error,
        num_targets,
    })
}
