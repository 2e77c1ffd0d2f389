//! Sparse multivariate polynomials with complex coefficients.
//!
//! Monomials are multi-indices α ∈ ℕ^d stored in a `BTreeMap` so term order
//! is deterministic. Coefficients whose magnitude falls below
//! `COEFF_DROP_REL` times the largest coefficient are dropped on
//! normalization, which keeps objects canonical after floating arithmetic.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative magnitude below which a coefficient is treated as zero.
pub const COEFF_DROP_REL: f64 = 1e-14;

/// A sparse polynomial in `dim` real variables with complex coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariatePolynomial {
    dim: usize,
    terms: BTreeMap<Vec<u32>, Complex64>,
}

impl MultivariatePolynomial {
    /// The zero polynomial in `dim` variables.
    pub fn zero(dim: usize) -> Self {
        assert!(dim >= 1, "polynomial needs at least one variable");
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    /// Constant polynomial.
    pub fn constant(dim: usize, c: Complex64) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(vec![0; dim], c);
        p.normalize();
        p
    }

    /// The monomial x_i (0-based variable index).
    pub fn variable(dim: usize, i: usize) -> Self {
        assert!(i < dim, "variable index out of range");
        let mut alpha = vec![0u32; dim];
        alpha[i] = 1;
        let mut p = Self::zero(dim);
        p.add_term(alpha, Complex64::new(1.0, 0.0));
        p
    }

    /// Build from explicit (multi-index, coefficient) pairs.
    pub fn from_terms(
        dim: usize,
        terms: impl IntoIterator<Item = (Vec<u32>, Complex64)>,
    ) -> Result<Self> {
        let mut p = Self::zero(dim);
        for (alpha, c) in terms {
            if alpha.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: alpha.len(),
                });
            }
            p.add_term(alpha, c);
        }
        p.normalize();
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Iterate (multi-index, coefficient) pairs in deterministic order.
    pub fn terms(&self) -> impl Iterator<Item = (&[u32], Complex64)> {
        self.terms.iter().map(|(a, c)| (a.as_slice(), *c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Largest total degree among terms, 0 for the zero polynomial.
    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|a| a.iter().sum())
            .max()
            .unwrap_or(0)
    }

    /// Largest coefficient magnitude, 0 for the zero polynomial.
    pub fn max_coeff_magnitude(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn add_term(&mut self, alpha: Vec<u32>, c: Complex64) {
        let entry = self.terms.entry(alpha).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
    }

    /// Drop coefficients below `COEFF_DROP_REL` × the largest magnitude.
    pub fn normalize(&mut self) {
        let max = self.max_coeff_magnitude();
        if max == 0.0 {
            self.terms.clear();
            return;
        }
        let cut = COEFF_DROP_REL * max;
        self.terms.retain(|_, c| c.norm() >= cut);
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut out = self.clone();
        for (alpha, c) in &other.terms {
            out.add_term(alpha.clone(), *c);
        }
        out.normalize();
        Ok(out)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.dim);
        for (alpha, v) in &self.terms {
            out.add_term(alpha.clone(), v * c);
        }
        out.normalize();
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut out = Self::zero(self.dim);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let alpha: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.add_term(alpha, ca * cb);
            }
        }
        out.normalize();
        Ok(out)
    }

    /// Evaluate at a real point.
    pub fn eval(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (alpha, c) in &self.terms {
            let mut m = 1.0;
            for (&a, &xi) in alpha.iter().zip(x) {
                m *= xi.powi(a as i32);
            }
            acc += c * m;
        }
        Ok(acc)
    }

    /// The polynomial x ↦ p(x + h), expanded exactly via binomials.
    pub fn shift(&self, h: &[f64]) -> Result<Self> {
        if h.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: h.len(),
            });
        }
        let mut out = Self::zero(self.dim);
        for (alpha, c) in &self.terms {
            // Expand Π_i (x_i + h_i)^{α_i} term by term.
            let mut expansion: Vec<(Vec<u32>, f64)> = vec![(Vec::new(), 1.0)];
            for (&a, &hi) in alpha.iter().zip(h) {
                let mut next = Vec::new();
                for (beta, coef) in &expansion {
                    for b in 0..=a {
                        let mut nb = beta.clone();
                        nb.push(b);
                        next.push((nb, coef * binomial(a, b) * hi.powi((a - b) as i32)));
                    }
                }
                expansion = next;
            }
            for (beta, coef) in expansion {
                out.add_term(beta, c * coef);
            }
        }
        out.normalize();
        Ok(out)
    }

    /// Partial derivative with respect to variable `i`.
    pub fn derivative(&self, i: usize) -> Self {
        assert!(i < self.dim);
        let mut out = Self::zero(self.dim);
        for (alpha, c) in &self.terms {
            if alpha[i] == 0 {
                continue;
            }
            let mut beta = alpha.clone();
            beta[i] -= 1;
            out.add_term(beta, c * alpha[i] as f64);
        }
        out.normalize();
        out
    }

    /// Substitute x = x0 + t·h0 and return the resulting univariate
    /// polynomial in t (as coefficients of t^0, t^1, ...).
    pub fn restrict_line(&self, x0: &[f64], h0: &[f64]) -> Result<Vec<Complex64>> {
        if x0.len() != self.dim || h0.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x0.len().max(h0.len()),
            });
        }
        let deg = self.total_degree() as usize;
        let mut out = vec![Complex64::new(0.0, 0.0); deg + 1];
        for (alpha, c) in &self.terms {
            // Π_i (x0_i + t h0_i)^{α_i} as a polynomial in t.
            let mut factor = vec![1.0f64];
            for (&a, (&xi, &hi)) in alpha.iter().zip(x0.iter().zip(h0)) {
                for _ in 0..a {
                    factor = poly1_mul_linear(&factor, xi, hi);
                }
            }
            for (j, f) in factor.iter().enumerate() {
                out[j] += c * *f;
            }
        }
        // Trim trailing numerically-zero coefficients.
        let max = out.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let cut = COEFF_DROP_REL * max;
        while out.len() > 1 && out.last().map(|c| c.norm() < cut).unwrap_or(false) {
            out.pop();
        }
        Ok(out)
    }

    /// Dimension of span{∂^α p : α ∈ ℕ^d}, computed by enumerating all
    /// distinct partial derivatives and row-reducing their coefficient
    /// vectors with a relative pivot threshold.
    pub fn derivative_span_dimension(&self) -> usize {
        if self.is_zero() {
            return 0;
        }
        // BFS over derivative orders; degree strictly drops, so this ends.
        let mut derivatives: Vec<MultivariatePolynomial> = Vec::new();
        let mut frontier = vec![self.clone()];
        while let Some(p) = frontier.pop() {
            if p.is_zero() {
                continue;
            }
            if derivatives.iter().any(|q| q.terms == p.terms) {
                continue;
            }
            for i in 0..self.dim {
                frontier.push(p.derivative(i));
            }
            derivatives.push(p);
        }
        // Row space over the union of monomials.
        let mut monomials: Vec<Vec<u32>> = Vec::new();
        for p in &derivatives {
            for a in p.terms.keys() {
                if !monomials.contains(a) {
                    monomials.push(a.clone());
                }
            }
        }
        monomials.sort();
        let rows: Vec<Vec<Complex64>> = derivatives
            .iter()
            .map(|p| {
                monomials
                    .iter()
                    .map(|m| p.terms.get(m).copied().unwrap_or(Complex64::new(0.0, 0.0)))
                    .collect()
            })
            .collect();
        row_rank(rows, 1e-10)
    }
}

/// Gaussian-elimination rank with a pivot threshold relative to the largest
/// entry of the original row set.
fn row_rank(mut rows: Vec<Vec<Complex64>>, rel_tol: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let ncols = rows[0].len();
    let scale = rows
        .iter()
        .flat_map(|r| r.iter().map(|c| c.norm()))
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let threshold = rel_tol * scale;
    let mut rank = 0;
    for col in 0..ncols {
        // Largest remaining pivot in this column.
        let Some((idx, mag)) = rows
            .iter()
            .enumerate()
            .skip(rank)
            .map(|(i, r)| (i, r[col].norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
        else {
            break;
        };
        if mag < threshold {
            continue;
        }
        rows.swap(rank, idx);
        let pivot = rows[rank][col];
        for i in (rank + 1)..rows.len() {
            let factor = rows[i][col] / pivot;
            if factor.norm() == 0.0 {
                continue;
            }
            for j in col..ncols {
                let upper = rows[rank][j];
                rows[i][j] -= factor * upper;
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Multiply a univariate coefficient vector by (a + b·t).
fn poly1_mul_linear(p: &[f64], a: f64, b: f64) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + 1];
    for (i, &c) in p.iter().enumerate() {
        out[i] += c * a;
        out[i + 1] += c * b;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn eval_square() {
        // x^2 at 3 -> 9
        let x = MultivariatePolynomial::variable(1, 0);
        let p = x.mul(&x).unwrap();
        assert_eq!(p.eval(&[3.0]).unwrap(), re(9.0));
    }

    #[test]
    fn shift_univariate() {
        // (x + 2) from x shifted by 2
        let x = MultivariatePolynomial::variable(1, 0);
        let s = x.shift(&[2.0]).unwrap();
        assert_eq!(s.eval(&[1.0]).unwrap(), re(3.0));
        assert_eq!(s.num_terms(), 2);
    }

    #[test]
    fn shift_expands_binomially() {
        // (x+1)^2 = x^2 + 2x + 1
        let x = MultivariatePolynomial::variable(1, 0);
        let p = x.mul(&x).unwrap();
        let s = p.shift(&[1.0]).unwrap();
        let expected = MultivariatePolynomial::from_terms(
            1,
            vec![(vec![2], re(1.0)), (vec![1], re(2.0)), (vec![0], re(1.0))],
        )
        .unwrap();
        assert_eq!(s, expected);
    }

    #[test]
    fn cancellation_removes_terms() {
        let x = MultivariatePolynomial::variable(1, 0);
        let sum = x.add(&x.scale(re(-1.0))).unwrap();
        assert!(sum.is_zero());
    }

    #[test]
    fn derivative_span_of_bilinear() {
        // span{x1 x2, x1, x2, 1} has dimension 4
        let p = MultivariatePolynomial::from_terms(2, vec![(vec![1, 1], re(1.0))]).unwrap();
        assert_eq!(p.derivative_span_dimension(), 4);
    }

    #[test]
    fn derivative_span_of_quadratic() {
        // x^2 -> {x^2, 2x, 2}
        let p = MultivariatePolynomial::from_terms(1, vec![(vec![2], re(1.0))]).unwrap();
        assert_eq!(p.derivative_span_dimension(), 3);
    }

    #[test]
    fn derivative_span_zero() {
        assert_eq!(MultivariatePolynomial::zero(2).derivative_span_dimension(), 0);
    }

    #[test]
    fn line_restriction_of_product() {
        // x1*x2 along x0=(1,0), h0=(0,1): (1)(t) = t
        let p = MultivariatePolynomial::from_terms(2, vec![(vec![1, 1], re(1.0))]).unwrap();
        let c = p.restrict_line(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!(c.len(), 2);
        assert!((c[0].norm()) < 1e-15);
        assert!((c[1] - re(1.0)).norm() < 1e-15);
    }

    #[test]
    fn dim_mismatch_rejected() {
        let p = MultivariatePolynomial::variable(2, 0);
        assert!(p.eval(&[1.0]).is_err());
        let q = MultivariatePolynomial::variable(1, 0);
        assert!(p.add(&q).is_err());
    }
}
