//! Uniform evaluation interface over closed-form expressions, sampled data,
//! exponential polynomials, Ronkin forms, and line restrictions.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::exppoly::ExpPoly;
use crate::ronkin::RonkinForm;
use crate::samples::{SampleLattice, SampleSet};

/// Where an oracle's values come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ClosedForm,
    SampledData,
    ExpPoly,
    Ronkin,
    LineRestriction,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::ClosedForm => "closed-form",
            Provenance::SampledData => "sampled-data",
            Provenance::ExpPoly => "exppoly",
            Provenance::Ronkin => "ronkin",
            Provenance::LineRestriction => "line-restriction",
        }
    }
}

#[derive(Debug, Clone)]
enum Backend {
    Expr(Expression),
    Lattice(SampleLattice),
    Symbolic(ExpPoly),
    Ronkin(RonkinForm),
    Line {
        inner: Box<FunctionOracle>,
        x0: Vec<f64>,
        h0: Vec<f64>,
    },
    Counting {
        inner: Box<FunctionOracle>,
        count: Arc<AtomicUsize>,
    },
}

/// Deterministic point-in-ℝ^d → complex evaluation.
#[derive(Debug, Clone)]
pub struct FunctionOracle {
    dim: usize,
    provenance: Provenance,
    backend: Backend,
}

impl FunctionOracle {
    pub fn from_expression(expr: Expression) -> Self {
        Self {
            dim: expr.dim(),
            provenance: Provenance::ClosedForm,
            backend: Backend::Expr(expr),
        }
    }

    /// Build a sampled-data oracle; the samples must form a complete uniform
    /// grid (see [`SampleLattice::detect`]).
    pub fn from_samples(samples: &SampleSet) -> Result<Self> {
        let lattice = SampleLattice::detect(samples)?;
        Ok(Self {
            dim: samples.dim,
            provenance: Provenance::SampledData,
            backend: Backend::Lattice(lattice),
        })
    }

    pub fn from_exppoly(p: ExpPoly) -> Self {
        Self {
            dim: p.dim(),
            provenance: Provenance::ExpPoly,
            backend: Backend::Symbolic(p),
        }
    }

    pub fn from_ronkin(r: RonkinForm) -> Self {
        Self {
            dim: r.dim(),
            provenance: Provenance::Ronkin,
            backend: Backend::Ronkin(r),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn eval(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        match &self.backend {
            Backend::Expr(e) => e.eval(x),
            Backend::Lattice(l) => l.eval(x),
            Backend::Symbolic(p) => p.evaluate(x),
            Backend::Ronkin(r) => r.evaluate(x),
            Backend::Line { inner, x0, h0 } => {
                let t = x[0];
                let point: Vec<f64> = x0.iter().zip(h0).map(|(&a, &d)| a + t * d).collect();
                inner.eval(&point)
            }
            Backend::Counting { inner, count } => {
                count.fetch_add(1, Ordering::Relaxed);
                inner.eval(x)
            }
        }
    }

    /// Wrap an oracle so every evaluation increments the returned counter.
    pub fn counting(inner: FunctionOracle) -> (FunctionOracle, Arc<AtomicUsize>) {
        let count = Arc::new(AtomicUsize::new(0));
        let wrapped = FunctionOracle {
            dim: inner.dim,
            provenance: inner.provenance,
            backend: Backend::Counting { inner: Box::new(inner), count: Arc::clone(&count) },
        };
        (wrapped, count)
    }

    /// The exact symbolic representation, when this oracle is backed by one.
    pub fn as_exppoly(&self) -> Option<&ExpPoly> {
        match &self.backend {
            Backend::Symbolic(p) => Some(p),
            Backend::Counting { inner, .. } => inner.as_exppoly(),
            _ => None,
        }
    }

    /// The sample lattice, when this oracle is backed by sampled data.
    pub fn lattice(&self) -> Option<&SampleLattice> {
        match &self.backend {
            Backend::Lattice(l) => Some(l),
            Backend::Counting { inner, .. } => inner.lattice(),
            _ => None,
        }
    }
}

/// The 1-D oracle t ↦ f(x0 + t·h0).
///
/// When `f` is symbolically backed the restriction stays symbolic, so the
/// result supports exact downstream algebra; otherwise evaluation delegates
/// to `f` along the line.
pub fn line_restriction(
    f: &FunctionOracle,
    x0: &[f64],
    h0: &[f64],
) -> Result<FunctionOracle> {
    if x0.len() != f.dim() || h0.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: x0.len().max(h0.len()),
        });
    }
    if h0.iter().all(|&c| c == 0.0) {
        return Err(Error::invalid("line direction must be nonzero"));
    }
    if let Some(p) = f.as_exppoly() {
        let restricted = p.restrict_line(x0, h0)?;
        return Ok(FunctionOracle {
            dim: 1,
            provenance: Provenance::LineRestriction,
            backend: Backend::Symbolic(restricted),
        });
    }
    Ok(FunctionOracle {
        dim: 1,
        provenance: Provenance::LineRestriction,
        backend: Backend::Line {
            inner: Box::new(f.clone()),
            x0: x0.to_vec(),
            h0: h0.to_vec(),
        },
    })
}
