//! Ronkin forms: sums Σ_k P_k(x)·e^{λ_k(x)} whose exponents λ_k are
//! polynomials linear in each variable (a constant plus one coefficient per
//! nonempty variable subset). Exponential polynomials are exactly the Ronkin
//! forms whose exponents all have total degree ≤ 1; `ronkin_to_exppoly`
//! decides that and converts or reports a witness direction.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exppoly::ExpPoly;
use crate::poly::MultivariatePolynomial;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Exponent α_0 + Σ_S c_S·Π_{i∈S} x_i over nonempty subsets S of {1..dim}.
///
/// Subsets are 1-based, strictly increasing index tuples.
#[derive(Debug, Clone, PartialEq)]
pub struct RonkinExponent {
    dim: usize,
    pub constant: Complex64,
    coefficients: BTreeMap<Vec<usize>, Complex64>,
}

impl RonkinExponent {
    pub fn new(dim: usize, constant: Complex64) -> Self {
        assert!(dim >= 1);
        Self { dim, constant, coefficients: BTreeMap::new() }
    }

    /// Multilinear exponent λ·x (total degree ≤ 1, zero constant).
    pub fn linear(lambda: &[Complex64]) -> Self {
        let mut e = Self::new(lambda.len(), ZERO);
        for (i, &c) in lambda.iter().enumerate() {
            e.set_subset(vec![i + 1], c).expect("singleton subsets are valid");
        }
        e
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Set the coefficient of Π_{i∈subset} x_i; `subset` is 1-based and must
    /// be strictly increasing within 1..=dim.
    pub fn set_subset(&mut self, subset: Vec<usize>, c: Complex64) -> Result<()> {
        if subset.is_empty() {
            return Err(Error::invalid("subset must be nonempty; use `constant`"));
        }
        if subset.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!("subset {subset:?} is not strictly increasing")));
        }
        if subset[0] < 1 || *subset.last().unwrap() > self.dim {
            return Err(Error::invalid(format!(
                "subset {subset:?} out of range for dimension {}",
                self.dim
            )));
        }
        if c.norm() == 0.0 {
            self.coefficients.remove(&subset);
        } else {
            self.coefficients.insert(subset, c);
        }
        Ok(())
    }

    pub fn subsets(&self) -> impl Iterator<Item = (&[usize], Complex64)> {
        self.coefficients.iter().map(|(s, c)| (s.as_slice(), *c))
    }

    /// Largest subset size with a nonzero coefficient (0 if none).
    pub fn total_degree(&self) -> usize {
        self.coefficients
            .iter()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(s, _)| s.len())
            .max()
            .unwrap_or(0)
    }

    /// Evaluate λ(x) at a real point.
    pub fn eval(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        let mut acc = self.constant;
        for (subset, c) in &self.coefficients {
            let prod: f64 = subset.iter().map(|&i| x[i - 1]).product();
            acc += c * prod;
        }
        Ok(acc)
    }
}

/// A sum of terms P_k(x)·e^{λ_k(x)} with Ronkin exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct RonkinForm {
    dim: usize,
    terms: Vec<(MultivariatePolynomial, RonkinExponent)>,
}

/// Outcome of attempting the exponential-polynomial conversion.
#[derive(Debug, Clone)]
pub enum RonkinConversion {
    /// All exponents have total degree ≤ 1; the equivalent exponential
    /// polynomial, with each constant part absorbed as an e^{α_0} factor.
    ExpPoly(ExpPoly),
    /// Some exponent has total degree ≥ 2.
    Rejected {
        /// Indices of terms whose exponent violates the degree bound.
        offending_terms: Vec<usize>,
        /// Direction with 1 on the variables of a maximal violating
        /// monomial and 0 elsewhere; f restricted to t ↦ f(t·h0) is not a
        /// 1-D exponential polynomial along it.
        witness_direction: Vec<f64>,
    },
}

impl RonkinForm {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1);
        Self { dim, terms: Vec::new() }
    }

    pub fn from_terms(
        dim: usize,
        terms: impl IntoIterator<Item = (MultivariatePolynomial, RonkinExponent)>,
    ) -> Result<Self> {
        let mut form = Self::new(dim);
        for (poly, exponent) in terms {
            form.push(poly, exponent)?;
        }
        Ok(form)
    }

    pub fn push(&mut self, poly: MultivariatePolynomial, exponent: RonkinExponent) -> Result<()> {
        if poly.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: poly.dim() });
        }
        if exponent.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: exponent.dim() });
        }
        if !poly.is_zero() {
            self.terms.push((poly, exponent));
        }
        Ok(())
    }

    /// Embed an exponential polynomial (every exponent becomes the
    /// multilinear form with singleton coefficients).
    pub fn from_exppoly(p: &ExpPoly) -> Self {
        let mut form = Self::new(p.dim());
        for t in p.terms() {
            let exponent = RonkinExponent::linear(&t.exponent);
            form.push(t.poly.clone(), exponent).expect("dims match by construction");
        }
        form
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(MultivariatePolynomial, RonkinExponent)] {
        &self.terms
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        let mut acc = ZERO;
        for (poly, exponent) in &self.terms {
            acc += poly.eval(x)? * exponent.eval(x)?.exp();
        }
        Ok(acc)
    }

    /// Total degree of each term's exponent, in term order.
    pub fn total_degrees(&self) -> Vec<usize> {
        self.terms.iter().map(|(_, e)| e.total_degree()).collect()
    }

    /// Convert to an exponential polynomial when every exponent has total
    /// degree ≤ 1, or reject with the offending terms and a witness
    /// direction.
    pub fn to_exppoly(&self) -> RonkinConversion {
        let offending: Vec<usize> = self
            .terms
            .iter()
            .enumerate()
            .filter(|(_, (_, e))| e.total_degree() > 1)
            .map(|(i, _)| i)
            .collect();
        if let Some(&first) = offending.first() {
            let exponent = &self.terms[first].1;
            let max_size = exponent.total_degree();
            let monomial = exponent
                .subsets()
                .filter(|(s, c)| s.len() == max_size && c.norm() > 0.0)
                .map(|(s, _)| s.to_vec())
                .next()
                .expect("a maximal monomial exists when degree > 1");
            let mut witness = vec![0.0; self.dim];
            for i in monomial {
                witness[i - 1] = 1.0;
            }
            return RonkinConversion::Rejected {
                offending_terms: offending,
                witness_direction: witness,
            };
        }
        let terms = self.terms.iter().map(|(poly, e)| {
            let mut lambda = vec![ZERO; self.dim];
            for (subset, c) in e.subsets() {
                debug_assert_eq!(subset.len(), 1);
                lambda[subset[0] - 1] = c;
            }
            (poly.scale(e.constant.exp()), lambda)
        });
        let p = ExpPoly::from_terms(self.dim, terms).expect("dims are consistent");
        RonkinConversion::ExpPoly(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn exp_subset(dim: usize, vars: &[usize]) -> RonkinExponent {
        let mut e = RonkinExponent::new(dim, ZERO);
        e.set_subset(vars.to_vec(), re(1.0)).unwrap();
        e
    }

    #[test]
    fn total_degrees_examples() {
        // e^{x1 x2} -> [2]
        let f = RonkinForm::from_terms(
            2,
            vec![(MultivariatePolynomial::constant(2, re(1.0)), exp_subset(2, &[1, 2]))],
        )
        .unwrap();
        assert_eq!(f.total_degrees(), vec![2]);

        // x1 e^{x1+x2} -> [1]
        let mut lin = RonkinExponent::new(2, ZERO);
        lin.set_subset(vec![1], re(1.0)).unwrap();
        lin.set_subset(vec![2], re(1.0)).unwrap();
        let g = RonkinForm::from_terms(2, vec![(MultivariatePolynomial::variable(2, 0), lin)])
            .unwrap();
        assert_eq!(g.total_degrees(), vec![1]);

        // e^{x1 x2 x3} + e^{x1} in three variables -> [3, 1]
        let h = RonkinForm::from_terms(
            3,
            vec![
                (MultivariatePolynomial::constant(3, re(1.0)), exp_subset(3, &[1, 2, 3])),
                (MultivariatePolynomial::constant(3, re(1.0)), exp_subset(3, &[1])),
            ],
        )
        .unwrap();
        assert_eq!(h.total_degrees(), vec![3, 1]);
    }

    #[test]
    fn conversion_of_linear_exponent() {
        // e^{x1 + 2 x2} -> ExpPoly with λ = (1, 2)
        let mut e = RonkinExponent::new(2, ZERO);
        e.set_subset(vec![1], re(1.0)).unwrap();
        e.set_subset(vec![2], re(2.0)).unwrap();
        let f = RonkinForm::from_terms(2, vec![(MultivariatePolynomial::constant(2, re(1.0)), e)])
            .unwrap();
        match f.to_exppoly() {
            RonkinConversion::ExpPoly(p) => {
                assert_eq!(p.terms().len(), 1);
                assert!((p.terms()[0].exponent[0] - re(1.0)).norm() < 1e-15);
                assert!((p.terms()[0].exponent[1] - re(2.0)).norm() < 1e-15);
            }
            RonkinConversion::Rejected { .. } => panic!("linear exponent must convert"),
        }
    }

    #[test]
    fn conversion_rejects_bilinear_with_witness() {
        let f = RonkinForm::from_terms(
            2,
            vec![(MultivariatePolynomial::constant(2, re(1.0)), exp_subset(2, &[1, 2]))],
        )
        .unwrap();
        match f.to_exppoly() {
            RonkinConversion::Rejected { offending_terms, witness_direction } => {
                assert_eq!(offending_terms, vec![0]);
                assert_eq!(witness_direction, vec![1.0, 1.0]);
            }
            RonkinConversion::ExpPoly(_) => panic!("e^(x1 x2) is not an exponential polynomial"),
        }
    }

    #[test]
    fn conversion_of_constant() {
        // The constant 5 (exponent has no subsets at all).
        let f = RonkinForm::from_terms(
            1,
            vec![(MultivariatePolynomial::constant(1, re(5.0)), RonkinExponent::new(1, ZERO))],
        )
        .unwrap();
        match f.to_exppoly() {
            RonkinConversion::ExpPoly(p) => {
                assert!((p.evaluate(&[0.3]).unwrap() - re(5.0)).norm() < 1e-15);
                assert_eq!(p.terms().len(), 1);
            }
            RonkinConversion::Rejected { .. } => panic!("constants are exponential polynomials"),
        }
    }

    #[test]
    fn constant_part_absorbed_via_exp_factor() {
        // e^{1 + x1}: α_0 = 1 absorbed as factor e.
        let mut e = RonkinExponent::new(1, re(1.0));
        e.set_subset(vec![1], re(1.0)).unwrap();
        let f = RonkinForm::from_terms(1, vec![(MultivariatePolynomial::constant(1, re(1.0)), e)])
            .unwrap();
        match f.to_exppoly() {
            RonkinConversion::ExpPoly(p) => {
                let got = p.evaluate(&[0.5]).unwrap();
                let want = re((1.5f64).exp());
                assert!((got - want).norm() < 1e-14);
            }
            RonkinConversion::Rejected { .. } => panic!("degree-1 exponent must convert"),
        }
    }

    #[test]
    fn subset_validation() {
        let mut e = RonkinExponent::new(2, ZERO);
        assert!(e.set_subset(vec![], re(1.0)).is_err());
        assert!(e.set_subset(vec![2, 1], re(1.0)).is_err());
        assert!(e.set_subset(vec![0], re(1.0)).is_err());
        assert!(e.set_subset(vec![3], re(1.0)).is_err());
        assert!(e.set_subset(vec![1, 2], re(1.0)).is_ok());
    }
}
