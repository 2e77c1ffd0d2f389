//! Finite verification of the Montel-type span conditions at dense-subgroup
//! generators, the Radó relation check, and the combined certificate.
//!
//! A span test at generator h and order n samples the n+1 translates
//! f(· + kh) on a point grid and passes when the sampled rank stays ≤ n.
//! Certification is numerical evidence, not proof: it reports what finitely
//! many rank tests established. Refutation requires the rank excess to
//! survive a doubled grid so one ill-conditioned grid cannot refute a true
//! exponential polynomial.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::GeneratorSet;
use crate::linalg::numerical_rank;
use crate::oracle::{line_restriction, FunctionOracle};
use crate::recurrence::{recover_1d, RecoveryConfig, RecoveryOutcome};

/// Hypothesis data for the finite Montel check: generators, one order per
/// generator, a sample grid, and the rank tolerance.
#[derive(Debug, Clone)]
pub struct MontelHypothesis {
    pub generators: GeneratorSet,
    pub orders: Vec<usize>,
    pub sample_grid: Vec<Vec<f64>>,
    pub rank_tol: f64,
}

impl MontelHypothesis {
    pub fn new(
        generators: GeneratorSet,
        orders: Vec<usize>,
        sample_grid: Vec<Vec<f64>>,
        rank_tol: f64,
    ) -> Result<Self> {
        if orders.len() != generators.generators().len() {
            return Err(Error::invalid(format!(
                "need one order per generator: {} orders for {} generators",
                orders.len(),
                generators.generators().len()
            )));
        }
        if orders.iter().any(|&n| n < 1) {
            return Err(Error::invalid("every order must be at least 1"));
        }
        let max_n = orders.iter().copied().max().unwrap_or(1);
        if sample_grid.len() < max_n + 5 {
            return Err(Error::invalid(format!(
                "sample grid needs at least {} points for order {max_n}",
                max_n + 5
            )));
        }
        if rank_tol <= 0.0 {
            return Err(Error::invalid("rank tolerance must be positive"));
        }
        Ok(Self { generators, orders, sample_grid, rank_tol })
    }

    /// Hypothesis with a seeded uniform grid in [−2,2]^dim and a uniform
    /// order for every generator.
    pub fn with_default_grid(
        generators: GeneratorSet,
        order: usize,
        seed: u64,
        rank_tol: f64,
    ) -> Result<Self> {
        let dim = generators.dim();
        let count = generators.generators().len();
        let grid = default_sample_grid(dim, order, seed);
        Self::new(generators, vec![order; count], grid, rank_tol)
    }
}

fn default_sample_grid(dim: usize, order: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = (order + 5).max(40);
    (0..count)
        .map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect()
}

#[derive(Debug, Clone)]
pub struct SpanTest {
    pub observed_rank: usize,
    pub pass: bool,
}

/// Rank of the (n+1)×|grid| matrix whose row k samples f(· + k·h).
pub fn span_dimension_test(
    f: &FunctionOracle,
    h: &[f64],
    n: usize,
    grid: &[Vec<f64>],
    rank_tol: f64,
) -> Result<SpanTest> {
    if h.len() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: h.len() });
    }
    if n < 1 {
        return Err(Error::invalid("order must be at least 1"));
    }
    if grid.len() < n + 5 {
        return Err(Error::invalid(format!(
            "grid needs at least {} points for order {n}",
            n + 5
        )));
    }
    let mut m = DMatrix::from_element(n + 1, grid.len(), Complex64::new(0.0, 0.0));
    for (j, x) in grid.iter().enumerate() {
        for k in 0..=n {
            let point: Vec<f64> = x
                .iter()
                .zip(h)
                .map(|(&xi, &hi)| xi + k as f64 * hi)
                .collect();
            m[(k, j)] = f.eval(&point)?;
        }
    }
    let observed_rank = numerical_rank(&m, rank_tol)?;
    Ok(SpanTest { observed_rank, pass: observed_rank <= n })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conclusion {
    CertifiedExponentialPolynomial,
    Refuted,
    Inconclusive,
}

impl Conclusion {
    pub fn as_str(self) -> &'static str {
        match self {
            Conclusion::CertifiedExponentialPolynomial => "certified-exponential-polynomial",
            Conclusion::Refuted => "refuted",
            Conclusion::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone)]
pub struct GeneratorCheck {
    pub generator: Vec<f64>,
    pub order: usize,
    pub observed_rank: usize,
    pub pass: bool,
    /// For failing generators: whether the rank excess survived the doubled
    /// grid.
    pub robust_failure: bool,
}

#[derive(Debug, Clone)]
pub struct MontelReport {
    pub per_generator: Vec<GeneratorCheck>,
    pub conclusion: Conclusion,
}

/// Extend a grid to twice its size with seeded points from its bounding box.
fn doubled_grid(grid: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let dim = grid.first().map(|p| p.len()).unwrap_or(0);
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in grid {
        for (i, &c) in p.iter().enumerate() {
            lo[i] = lo[i].min(c);
            hi[i] = hi[i].max(c);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x4d6f_6e74);
    let mut out = grid.to_vec();
    for _ in 0..grid.len() {
        let p: Vec<f64> = (0..dim)
            .map(|i| {
                if hi[i] > lo[i] {
                    rng.gen_range(lo[i]..hi[i])
                } else {
                    lo[i]
                }
            })
            .collect();
        out.push(p);
    }
    out
}

/// Run the span test at every generator and combine the verdicts.
pub fn montel_verify(f: &FunctionOracle, hyp: &MontelHypothesis) -> Result<MontelReport> {
    if hyp.generators.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: hyp.generators.dim() });
    }
    let mut per_generator = Vec::with_capacity(hyp.orders.len());
    let mut any_robust_failure = false;
    let mut all_pass = true;
    for (g, &n) in hyp.generators.generators().iter().zip(&hyp.orders) {
        let test = span_dimension_test(f, g, n, &hyp.sample_grid, hyp.rank_tol)?;
        let mut robust_failure = false;
        if !test.pass {
            all_pass = false;
            let bigger = doubled_grid(&hyp.sample_grid);
            let retest = span_dimension_test(f, g, n, &bigger, hyp.rank_tol)?;
            robust_failure = retest.observed_rank >= n + 1;
            any_robust_failure |= robust_failure;
        }
        per_generator.push(GeneratorCheck {
            generator: g.clone(),
            order: n,
            observed_rank: test.observed_rank,
            pass: test.pass,
            robust_failure,
        });
    }
    let conclusion = if all_pass {
        Conclusion::CertifiedExponentialPolynomial
    } else if any_robust_failure {
        Conclusion::Refuted
    } else {
        Conclusion::Inconclusive
    };
    Ok(MontelReport { per_generator, conclusion })
}

#[derive(Debug, Clone)]
pub struct RadoReport {
    pub pass: bool,
    /// Largest residual relative to the largest term magnitude.
    pub worst_residual: f64,
    /// The (x, h) pair realizing the worst residual.
    pub witness: (Vec<f64>, Vec<f64>),
}

/// Check Σ_k a_k(h) f(x + kh) = 0 over x_grid × steps, given the sampled
/// coefficient functions a(h).
///
/// The coefficient data must be nonzero at some step; an identically zero
/// family satisfies the relation vacuously and violates the hypothesis.
pub fn rado_test(
    f: &FunctionOracle,
    coefficient_samples: &[(Vec<f64>, Vec<Complex64>)],
    x_grid: &[Vec<f64>],
    tol: f64,
) -> Result<RadoReport> {
    if coefficient_samples.is_empty() || x_grid.is_empty() {
        return Err(Error::invalid("need at least one step and one base point"));
    }
    if tol <= 0.0 {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let all_zero = coefficient_samples
        .iter()
        .all(|(_, a)| a.iter().all(|c| c.norm() == 0.0));
    if all_zero {
        return Err(Error::HypothesisViolation(
            "coefficient data vanishes at every step".into(),
        ));
    }
    let mut worst_residual: f64 = -1.0;
    let mut witness = (x_grid[0].clone(), coefficient_samples[0].0.clone());
    for (h, a) in coefficient_samples {
        if h.len() != f.dim() {
            return Err(Error::DimensionMismatch { expected: f.dim(), got: h.len() });
        }
        for x in x_grid {
            let mut sum = Complex64::new(0.0, 0.0);
            let mut max_term: f64 = 0.0;
            for (k, coeff) in a.iter().enumerate() {
                let point: Vec<f64> = x
                    .iter()
                    .zip(h)
                    .map(|(&xi, &hi)| xi + k as f64 * hi)
                    .collect();
                let term = coeff * f.eval(&point)?;
                sum += term;
                max_term = max_term.max(term.norm());
            }
            let rel = if max_term > 0.0 { sum.norm() / max_term } else { 0.0 };
            if rel > worst_residual {
                worst_residual = rel;
                witness = (x.clone(), h.clone());
            }
        }
    }
    Ok(RadoReport { pass: worst_residual <= tol, worst_residual, witness })
}

/// Everything `certify` establishes: the Montel report plus recovered
/// models as supporting evidence.
#[derive(Debug, Clone)]
pub struct CertificateBundle {
    pub montel: MontelReport,
    /// For 1-D certified functions: the recovered model.
    pub recovered: Option<RecoveryOutcome>,
    /// For multivariate certified functions: recovered 1-D models along
    /// each generator line through the origin.
    pub line_models: Vec<(Vec<f64>, RecoveryOutcome)>,
}

/// Montel verification plus recovery evidence along generator lines.
pub fn certify(
    f: &FunctionOracle,
    hyp: &MontelHypothesis,
    recovery: &RecoveryConfig,
) -> Result<CertificateBundle> {
    let montel = montel_verify(f, hyp)?;
    let n_max = hyp.orders.iter().copied().max().unwrap_or(1).max(1);
    let mut recovered = None;
    let mut line_models = Vec::new();
    if montel.conclusion == Conclusion::CertifiedExponentialPolynomial {
        if f.dim() == 1 {
            recovered = Some(recover_1d(f, n_max, recovery)?);
        } else {
            let origin = vec![0.0; f.dim()];
            for g in hyp.generators.generators() {
                if g.iter().all(|&c| c == 0.0) {
                    continue;
                }
                let line = line_restriction(f, &origin, g)?;
                let outcome = recover_1d(&line, n_max, recovery)?;
                line_models.push((g.clone(), outcome));
            }
        }
    }
    Ok(CertificateBundle { montel, recovered, line_models })
}
