//! Exponential polynomials Σ_k P_k(x)·e^{λ_k·x} with multivariate polynomial
//! coefficients and constant complex exponent vectors.
//!
//! Terms are kept canonical: exponent vectors are pairwise distinct (terms
//! with equal exponents merge by polynomial addition) and terms whose
//! polynomial vanishes are removed.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::MultivariatePolynomial;

/// Two exponent vectors are merged when every component is closer than this.
pub const EXPONENT_MERGE_TOL: f64 = 1e-12;

/// One term P(x)·e^{λ·x}.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpPolyTerm {
    pub poly: MultivariatePolynomial,
    pub exponent: Vec<Complex64>,
}

/// A finite sum of terms P_k(x)·e^{λ_k·x}.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpPoly {
    dim: usize,
    terms: Vec<ExpPolyTerm>,
}

fn exponents_equal(a: &[Complex64], b: &[Complex64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).norm() < EXPONENT_MERGE_TOL)
}

impl ExpPoly {
    /// The zero function (empty term list).
    pub fn zero(dim: usize) -> Self {
        assert!(dim >= 1);
        Self { dim, terms: Vec::new() }
    }

    /// Build from (polynomial, exponent) pairs, merging equal exponents.
    pub fn from_terms(
        dim: usize,
        terms: impl IntoIterator<Item = (MultivariatePolynomial, Vec<Complex64>)>,
    ) -> Result<Self> {
        let mut out = Self::zero(dim);
        for (poly, exponent) in terms {
            if poly.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: poly.dim() });
            }
            if exponent.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: exponent.len() });
            }
            out.push_term(poly, exponent);
        }
        out.canonicalize();
        Ok(out)
    }

    /// Single-term constructor.
    pub fn term(poly: MultivariatePolynomial, exponent: Vec<Complex64>) -> Result<Self> {
        let dim = poly.dim();
        Self::from_terms(dim, vec![(poly, exponent)])
    }

    /// The constant function c.
    pub fn constant(dim: usize, c: Complex64) -> Self {
        let poly = MultivariatePolynomial::constant(dim, c);
        let zero = vec![Complex64::new(0.0, 0.0); dim];
        Self::from_terms(dim, vec![(poly, zero)]).expect("constant is well-formed")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[ExpPolyTerm] {
        &self.terms
    }

    fn push_term(&mut self, poly: MultivariatePolynomial, exponent: Vec<Complex64>) {
        if let Some(t) = self
            .terms
            .iter_mut()
            .find(|t| exponents_equal(&t.exponent, &exponent))
        {
            t.poly = t.poly.add(&poly).expect("merged terms share dim");
        } else {
            self.terms.push(ExpPolyTerm { poly, exponent });
        }
    }

    fn canonicalize(&mut self) {
        self.terms.retain(|t| !t.poly.is_zero());
        // Deterministic term order: lexicographic on exponent (re, im) parts.
        self.terms.sort_by(|a, b| {
            for (x, y) in a.exponent.iter().zip(&b.exponent) {
                match x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)) {
                    std::cmp::Ordering::Equal => continue,
                    ord => return ord,
                }
            }
            std::cmp::Ordering::Equal
        });
    }

    /// Evaluate Σ_k P_k(x)·exp(λ_k·x) at a real point.
    pub fn evaluate(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            let dot: Complex64 = t
                .exponent
                .iter()
                .zip(x)
                .map(|(l, &xi)| l * xi)
                .sum();
            acc += t.poly.eval(x)? * dot.exp();
        }
        Ok(acc)
    }

    /// The exact exponential polynomial for x ↦ p(x + h).
    ///
    /// Each term becomes e^{λ·h}·P(x+h)·e^{λ·x}; the exponent set is
    /// unchanged.
    pub fn shift(&self, h: &[f64]) -> Result<Self> {
        if h.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: h.len() });
        }
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let dot: Complex64 = t.exponent.iter().zip(h).map(|(l, &hi)| l * hi).sum();
            let poly = t.poly.shift(h)?.scale(dot.exp());
            terms.push((poly, t.exponent.clone()));
        }
        Self::from_terms(self.dim, terms)
    }

    /// dim span{τ_h p : h ∈ ℝ^d}.
    ///
    /// The translates of P(x)e^{λ·x} span P's full derivative span times
    /// e^{λ·x}, and distinct exponents contribute independently, so the
    /// total is Σ_k dim span{∂^α P_k}.
    pub fn translation_space_dimension(&self) -> usize {
        self.terms
            .iter()
            .map(|t| t.poly.derivative_span_dimension())
            .sum()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let terms = self
            .terms
            .iter()
            .chain(&other.terms)
            .map(|t| (t.poly.clone(), t.exponent.clone()));
        Self::from_terms(self.dim, terms)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| (t.poly.scale(c), t.exponent.clone()));
        Self::from_terms(self.dim, terms).expect("scaling preserves shape")
    }

    /// Product: polynomials multiply, exponent vectors add pairwise.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &other.terms {
                let poly = a.poly.mul(&b.poly)?;
                let exponent: Vec<Complex64> = a
                    .exponent
                    .iter()
                    .zip(&b.exponent)
                    .map(|(x, y)| x + y)
                    .collect();
                terms.push((poly, exponent));
            }
        }
        Self::from_terms(self.dim, terms)
    }

    /// Exact symbolic restriction to the line x0 + t·h0: a 1-D exponential
    /// polynomial in t with exponents λ_k·h0.
    pub fn restrict_line(&self, x0: &[f64], h0: &[f64]) -> Result<ExpPoly> {
        if x0.len() != self.dim || h0.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x0.len().max(h0.len()),
            });
        }
        if h0.iter().all(|&c| c == 0.0) {
            return Err(Error::invalid("line direction must be nonzero"));
        }
        let mut terms = Vec::new();
        for t in &self.terms {
            let coeffs = t.poly.restrict_line(x0, h0)?;
            let at_x0: Complex64 = t.exponent.iter().zip(x0).map(|(l, &xi)| l * xi).sum();
            let along: Complex64 = t.exponent.iter().zip(h0).map(|(l, &hi)| l * hi).sum();
            let factor = at_x0.exp();
            let poly = MultivariatePolynomial::from_terms(
                1,
                coeffs
                    .into_iter()
                    .enumerate()
                    .map(|(j, c)| (vec![j as u32], c * factor)),
            )?;
            terms.push((poly, vec![along]));
        }
        ExpPoly::from_terms(1, terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// e^x in one variable.
    fn exp_x() -> ExpPoly {
        ExpPoly::term(MultivariatePolynomial::constant(1, re(1.0)), vec![re(1.0)]).unwrap()
    }

    /// 3·2^x + 1 encoded as 3e^{(ln 2)x} + 1.
    fn three_pow2_plus_one() -> ExpPoly {
        ExpPoly::from_terms(
            1,
            vec![
                (
                    MultivariatePolynomial::constant(1, re(3.0)),
                    vec![re(2.0f64.ln())],
                ),
                (MultivariatePolynomial::constant(1, re(1.0)), vec![re(0.0)]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn evaluate_exp_at_zero() {
        assert!((exp_x().evaluate(&[0.0]).unwrap() - re(1.0)).norm() < 1e-15);
    }

    #[test]
    fn evaluate_x_squared() {
        let p = ExpPoly::term(
            MultivariatePolynomial::from_terms(1, vec![(vec![2], re(1.0))]).unwrap(),
            vec![re(0.0)],
        )
        .unwrap();
        assert!((p.evaluate(&[3.0]).unwrap() - re(9.0)).norm() < 1e-14);
    }

    #[test]
    fn evaluate_geometric_closed_form() {
        // 3·2^4 + 1 = 49
        let p = three_pow2_plus_one();
        assert!((p.evaluate(&[4.0]).unwrap() - re(49.0)).norm() < 1e-12);
    }

    #[test]
    fn shift_exp_picks_up_scalar() {
        // e^{x+1} = e·e^x
        let s = exp_x().shift(&[1.0]).unwrap();
        assert_eq!(s.terms().len(), 1);
        let coeff = s.terms()[0].poly.eval(&[0.0]).unwrap();
        assert!((coeff - re(std::f64::consts::E)).norm() < 1e-14);
    }

    #[test]
    fn shift_linear() {
        // x shifted by 2 is x + 2
        let p = ExpPoly::term(MultivariatePolynomial::variable(1, 0), vec![re(0.0)]).unwrap();
        let s = p.shift(&[2.0]).unwrap();
        assert!((s.evaluate(&[0.0]).unwrap() - re(2.0)).norm() < 1e-15);
        assert!((s.evaluate(&[1.0]).unwrap() - re(3.0)).norm() < 1e-15);
    }

    #[test]
    fn shift_xexp_symbolic() {
        // x e^x shifted by 1 is e·(x+1)e^x
        let p = ExpPoly::term(MultivariatePolynomial::variable(1, 0), vec![re(1.0)]).unwrap();
        let s = p.shift(&[1.0]).unwrap();
        let e = std::f64::consts::E;
        let expected = ExpPoly::term(
            MultivariatePolynomial::from_terms(
                1,
                vec![(vec![1], re(e)), (vec![0], re(e))],
            )
            .unwrap(),
            vec![re(1.0)],
        )
        .unwrap();
        assert_eq!(s.terms().len(), 1);
        for t in 0..5 {
            let x = [t as f64 * 0.3 - 0.7];
            let diff = (s.evaluate(&x).unwrap() - expected.evaluate(&x).unwrap()).norm();
            assert!(diff < 1e-12, "diff {diff} at {x:?}");
        }
    }

    #[test]
    fn translation_dimension_examples() {
        // x^2 e^{λx} has translation dimension 3
        let p = ExpPoly::term(
            MultivariatePolynomial::from_terms(1, vec![(vec![2], re(1.0))]).unwrap(),
            vec![c(0.4, -0.3)],
        )
        .unwrap();
        assert_eq!(p.translation_space_dimension(), 3);
        assert_eq!(ExpPoly::zero(1).translation_space_dimension(), 0);
        // x1 x2 in two variables: span {x1x2, x1, x2, 1}
        let q = ExpPoly::term(
            MultivariatePolynomial::from_terms(2, vec![(vec![1, 1], re(1.0))]).unwrap(),
            vec![re(0.0), re(0.0)],
        )
        .unwrap();
        assert_eq!(q.translation_space_dimension(), 4);
    }

    #[test]
    fn add_cancels_to_zero() {
        let p = exp_x();
        let sum = p.add(&p.scale(re(-1.0))).unwrap();
        assert!(sum.is_zero());
    }

    #[test]
    fn multiply_adds_exponents() {
        // e^x · e^{2x} = e^{3x}
        let e1 = exp_x();
        let e2 = ExpPoly::term(MultivariatePolynomial::constant(1, re(1.0)), vec![re(2.0)])
            .unwrap();
        let prod = e1.multiply(&e2).unwrap();
        assert_eq!(prod.terms().len(), 1);
        assert!((prod.terms()[0].exponent[0] - re(3.0)).norm() < 1e-14);
    }

    #[test]
    fn multiply_polynomial_parts() {
        // x · (x e^x) = x^2 e^x
        let x = ExpPoly::term(MultivariatePolynomial::variable(1, 0), vec![re(0.0)]).unwrap();
        let xex = ExpPoly::term(MultivariatePolynomial::variable(1, 0), vec![re(1.0)]).unwrap();
        let prod = x.multiply(&xex).unwrap();
        assert!((prod.evaluate(&[2.0]).unwrap() - re(4.0) * re(2.0f64.exp())).norm() < 1e-12);
        assert_eq!(prod.terms().len(), 1);
        assert_eq!(prod.terms()[0].poly.total_degree(), 2);
    }

    #[test]
    fn restrict_line_merges_colliding_exponents() {
        // e^{x1} + e^{x2} along h0=(1,1): both exponents become 1 -> 2e^t
        let p = ExpPoly::from_terms(
            2,
            vec![
                (
                    MultivariatePolynomial::constant(2, re(1.0)),
                    vec![re(1.0), re(0.0)],
                ),
                (
                    MultivariatePolynomial::constant(2, re(1.0)),
                    vec![re(0.0), re(1.0)],
                ),
            ],
        )
        .unwrap();
        let line = p.restrict_line(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(line.terms().len(), 1);
        assert!((line.evaluate(&[1.0]).unwrap() - re(2.0 * std::f64::consts::E)).norm() < 1e-12);
    }

    #[test]
    fn restrict_line_rejects_zero_direction() {
        let p = exp_x();
        let q = ExpPoly::from_terms(
            1,
            p.terms().iter().map(|t| (t.poly.clone(), t.exponent.clone())),
        )
        .unwrap();
        assert!(q.restrict_line(&[0.0], &[0.0]).is_err());
    }
}
