//! Seeded random exponential polynomials with a translation-space dimension
//! known by construction, for property tests and calibration runs.
//!
//! Shapes are chosen so the Hankel order equals the translation dimension:
//! each term's polynomial depends on a single axis (a full univariate
//! polynomial of degree q spans q+1 derivatives, and restricts to degree q
//! along a generic line). Mixed monomials like x1·x2 would break that tie —
//! their translates span (a+1)(b+1) dimensions but every line restriction
//! has degree a+b, so the determinant test saturates one order early.
//!
//! Exponents share a narrow real band and separate mostly in the imaginary
//! direction: real spread across terms makes the far window samples of one
//! term exponentially dominate the others, crushing the below-order
//! determinants that order estimation relies on.

use num_complex::Complex64;
use rand::Rng;

use crate::exppoly::ExpPoly;
use crate::poly::MultivariatePolynomial;

#[derive(Debug, Clone)]
pub struct FixtureConfig {
    pub dim: usize,
    /// Translation dimension is drawn uniformly from 1..=max.
    pub max_translation_dim: usize,
    pub re_bound: f64,
    pub im_bound: f64,
    pub coeff_bound: f64,
    /// Minimum pairwise distance between exponent vectors.
    pub exponent_separation: f64,
    /// Width of the per-fixture real band the exponents share.
    pub re_spread: f64,
    /// Largest number of distinct exponents per fixture.
    pub max_parts: usize,
}

impl FixtureConfig {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            max_translation_dim: 6,
            re_bound: 1.0,
            im_bound: 2.0,
            coeff_bound: 5.0,
            exponent_separation: 1.1,
            re_spread: 0.6,
            max_parts: 4,
        }
    }
}

/// A generated fixture: the function plus its translation dimension as
/// determined by the construction (independently of
/// `translation_space_dimension`).
#[derive(Debug, Clone)]
pub struct Fixture {
    pub exppoly: ExpPoly,
    pub translation_dimension: usize,
}

fn random_coeff(rng: &mut impl Rng, bound: f64) -> Complex64 {
    Complex64::new(rng.gen_range(-bound..bound), rng.gen_range(-bound..bound))
}

/// Magnitude in [0.5, bound] with random sign and a random imaginary part;
/// keeps the structurally load-bearing coefficients away from zero.
fn leading_coeff(rng: &mut impl Rng, bound: f64) -> Complex64 {
    let mag = rng.gen_range(0.5..bound.max(1.0));
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    Complex64::new(sign * mag, rng.gen_range(-1.0..1.0))
}

fn random_exponent(
    rng: &mut impl Rng,
    cfg: &FixtureConfig,
    re_center: f64,
    taken: &[Vec<Complex64>],
) -> Vec<Complex64> {
    // Rejection sampling; the requirement relaxes slowly if the box fills up.
    let mut separation = cfg.exponent_separation;
    let mut attempts = 0u32;
    let half = cfg.re_spread / 2.0;
    loop {
        attempts += 1;
        if attempts % 200 == 0 {
            separation *= 0.9;
        }
        let candidate: Vec<Complex64> = (0..cfg.dim)
            .map(|_| {
                let re = (re_center + rng.gen_range(-half..half))
                    .clamp(-cfg.re_bound, cfg.re_bound);
                Complex64::new(re, rng.gen_range(-cfg.im_bound..cfg.im_bound))
            })
            .collect();
        let far_enough = taken.iter().all(|t| {
            let d: f64 = t
                .iter()
                .zip(&candidate)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            d >= separation
        });
        if far_enough {
            return candidate;
        }
    }
}

/// A polynomial in `dim` variables, univariate along `axis`, with
/// derivative-span dimension exactly `span`.
fn poly_with_span(
    rng: &mut impl Rng,
    dim: usize,
    axis: usize,
    span: usize,
    coeff_bound: f64,
) -> MultivariatePolynomial {
    debug_assert!(span >= 1);
    let degree = span - 1;
    let terms = (0..=degree).map(|j| {
        let mut alpha = vec![0u32; dim];
        alpha[axis] = j as u32;
        let c = if j == degree {
            leading_coeff(rng, coeff_bound)
        } else {
            random_coeff(rng, coeff_bound)
        };
        (alpha, c)
    });
    MultivariatePolynomial::from_terms(dim, terms).expect("valid axis polynomial")
}

/// Draw a fixture with translation dimension uniform in
/// 1..=max_translation_dim.
pub fn random_exppoly(rng: &mut impl Rng, cfg: &FixtureConfig) -> Fixture {
    let target = rng.gen_range(1..=cfg.max_translation_dim);
    random_exppoly_with_dimension(rng, cfg, target)
}

/// Draw a fixture with the given translation dimension.
pub fn random_exppoly_with_dimension(
    rng: &mut impl Rng,
    cfg: &FixtureConfig,
    target: usize,
) -> Fixture {
    assert!(target >= 1);
    // Partition the target into at most max_parts per-term spans.
    let parts = loop {
        let mut parts = Vec::new();
        let mut remaining = target;
        while remaining > 0 {
            let part = rng.gen_range(1..=remaining);
            parts.push(part);
            remaining -= part;
        }
        if parts.len() <= cfg.max_parts.max(1) {
            break parts;
        }
    };
    let half = cfg.re_spread / 2.0;
    let re_center = rng.gen_range(-(cfg.re_bound - half)..(cfg.re_bound - half));
    let mut exponents: Vec<Vec<Complex64>> = Vec::new();
    let mut terms = Vec::new();
    for &span in &parts {
        let exponent = random_exponent(rng, cfg, re_center, &exponents);
        exponents.push(exponent.clone());
        let axis = rng.gen_range(0..cfg.dim);
        let poly = poly_with_span(rng, cfg.dim, axis, span, cfg.coeff_bound);
        terms.push((poly, exponent));
    }
    let exppoly = ExpPoly::from_terms(cfg.dim, terms).expect("fixture terms are well-formed");
    Fixture { exppoly, translation_dimension: target }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constructed_dimension_matches_computed_1d() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cfg = FixtureConfig::new(1);
        for _ in 0..100 {
            let fx = random_exppoly(&mut rng, &cfg);
            assert_eq!(
                fx.exppoly.translation_space_dimension(),
                fx.translation_dimension
            );
        }
    }

    #[test]
    fn constructed_dimension_matches_computed_2d() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cfg = FixtureConfig::new(2);
        for _ in 0..100 {
            let fx = random_exppoly(&mut rng, &cfg);
            assert_eq!(
                fx.exppoly.translation_space_dimension(),
                fx.translation_dimension
            );
        }
    }

    #[test]
    fn exponents_stay_in_their_box() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dim in [1usize, 2] {
            let cfg = FixtureConfig::new(dim);
            for _ in 0..50 {
                let fx = random_exppoly(&mut rng, &cfg);
                for t in fx.exppoly.terms() {
                    for l in &t.exponent {
                        assert!(l.re.abs() <= cfg.re_bound + 1e-12);
                        assert!(l.im.abs() <= cfg.im_bound + 1e-12);
                    }
                }
            }
        }
    }
}
