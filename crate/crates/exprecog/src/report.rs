//! JSON report schema: serde types shared by the CLI and the C API.
//!
//! Reports are machine-readable and diff-friendly; everything serializes
//! through ordered structs and vectors so identical runs produce identical
//! bytes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exppoly::ExpPoly;
use crate::hankel::HankelWindow;
use crate::poly::MultivariatePolynomial;
use crate::ronkin::{RonkinExponent, RonkinForm};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexJson {
    fn from(c: Complex64) -> Self {
        Self { re: c.re, im: c.im }
    }
}

impl From<ComplexJson> for Complex64 {
    fn from(c: ComplexJson) -> Self {
        Complex64::new(c.re, c.im)
    }
}

/// 1-D model as {terms: [{exponent_re, exponent_im, coefficients: [...]}]};
/// coefficients[j] multiplies x^j.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelJson {
    pub terms: Vec<ModelTermJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelTermJson {
    pub exponent_re: f64,
    pub exponent_im: f64,
    pub coefficients: Vec<ComplexJson>,
}

impl ModelJson {
    pub fn from_exppoly_1d(p: &ExpPoly) -> Result<Self> {
        if p.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: p.dim() });
        }
        let mut terms = Vec::with_capacity(p.terms().len());
        for t in p.terms() {
            let degree = t.poly.total_degree() as usize;
            let mut coefficients = vec![ComplexJson { re: 0.0, im: 0.0 }; degree + 1];
            for (alpha, c) in t.poly.terms() {
                coefficients[alpha[0] as usize] = c.into();
            }
            terms.push(ModelTermJson {
                exponent_re: t.exponent[0].re,
                exponent_im: t.exponent[0].im,
                coefficients,
            });
        }
        Ok(Self { terms })
    }

    pub fn to_exppoly(&self) -> Result<ExpPoly> {
        let terms = self.terms.iter().map(|t| {
            let poly = MultivariatePolynomial::from_terms(
                1,
                t.coefficients
                    .iter()
                    .enumerate()
                    .map(|(j, c)| (vec![j as u32], Complex64::from(*c))),
            )
            .expect("univariate term");
            (poly, vec![Complex64::new(t.exponent_re, t.exponent_im)])
        });
        ExpPoly::from_terms(1, terms)
    }
}

/// Multivariate model: one entry per term, exponent vector plus sparse
/// polynomial.
#[derive(Debug, Clone, Serialize)]
pub struct MultiModelJson {
    pub dim: usize,
    pub terms: Vec<MultiModelTermJson>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiModelTermJson {
    pub exponent: Vec<ComplexJson>,
    pub monomials: Vec<MonomialJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonomialJson {
    /// Per-variable powers.
    pub powers: Vec<u32>,
    pub coeff: ComplexJson,
}

impl MultiModelJson {
    pub fn from_exppoly(p: &ExpPoly) -> Self {
        let terms = p
            .terms()
            .iter()
            .map(|t| MultiModelTermJson {
                exponent: t.exponent.iter().map(|&c| c.into()).collect(),
                monomials: t
                    .poly
                    .terms()
                    .map(|(alpha, c)| MonomialJson { powers: alpha.to_vec(), coeff: c.into() })
                    .collect(),
            })
            .collect();
        Self { dim: p.dim(), terms }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowJson {
    pub x: Vec<f64>,
    pub h: Vec<f64>,
    pub order: usize,
    /// The 2n+1 shifted samples the window is built from.
    pub samples: Vec<ComplexJson>,
}

impl From<&HankelWindow> for WindowJson {
    fn from(w: &HankelWindow) -> Self {
        Self {
            x: w.base().to_vec(),
            h: w.step().to_vec(),
            order: w.order(),
            samples: w.samples().iter().map(|&c| c.into()).collect(),
        }
    }
}

/// Ronkin form input schema.
///
/// ```json
/// {
///   "dim": 2,
///   "terms": [{
///     "poly": [{"powers": [0, 0], "coeff": {"re": 1.0, "im": 0.0}}],
///     "exponent": {
///       "constant": {"re": 0.0, "im": 0.0},
///       "subsets": [{"vars": [1, 2], "coeff": {"re": 1.0, "im": 0.0}}]
///     }
///   }]
/// }
/// ```
#[derive(Debug, Clone, Deserialize)]
pub struct RonkinJson {
    pub dim: usize,
    pub terms: Vec<RonkinTermJson>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct RonkinTermJson {
    pub poly: Vec<MonomialJson>,
    pub exponent: RonkinExponentJson,
}

#[derive(Debug, Clone, Deserialize)]
pub struct RonkinExponentJson {
    #[serde(default)]
    pub constant: Option<ComplexJson>,
    #[serde(default)]
    pub subsets: Vec<SubsetJson>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SubsetJson {
    /// 1-based variable indices, strictly increasing.
    pub vars: Vec<usize>,
    pub coeff: ComplexJson,
}

impl RonkinJson {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::MalformedInput {
            line: Some(e.line()),
            message: e.to_string(),
        })
    }

    pub fn to_form(&self) -> Result<RonkinForm> {
        if self.dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        let mut form = RonkinForm::new(self.dim);
        for term in &self.terms {
            let poly = MultivariatePolynomial::from_terms(
                self.dim,
                term.poly
                    .iter()
                    .map(|m| (m.powers.clone(), Complex64::from(m.coeff))),
            )?;
            let constant = term
                .exponent
                .constant
                .map(Complex64::from)
                .unwrap_or_else(|| Complex64::new(0.0, 0.0));
            let mut exponent = RonkinExponent::new(self.dim, constant);
            for s in &term.exponent.subsets {
                exponent.set_subset(s.vars.clone(), s.coeff.into())?;
            }
            form.push(poly, exponent)?;
        }
        Ok(form)
    }
}

/// Common envelope around every CLI report.
#[derive(Debug, Clone, Serialize)]
pub struct Envelope<T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: ConfigJson,
    /// Exit-status word: pass/fail, found/not-found, recovered/…
    pub status: String,
    pub result: T,
}

pub const TOOL_NAME: &str = "exprecog";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Resolved run configuration echoed into the report.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ConfigJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    pub tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accept_tol: Option<f64>,
    pub grid_size: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confirm_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub targets: Option<usize>,
}

pub fn render<T: Serialize>(envelope: &Envelope<T>) -> String {
    let mut text = serde_json::to_string_pretty(envelope).expect("report serializes");
    text.push('\n');
    text
}
