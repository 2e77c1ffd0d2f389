//! Numerical tests for the Hankel-determinant functional equation and
//! recovery of exponential polynomials.
//!
//! A continuous function satisfying the vanishing of all (n+1)×(n+1)
//! determinants det[f(x+(i+j)h)] is an exponential polynomial
//! Σ_k P_k(x)e^{λ_k·x}. This crate provides, at desk scale:
//!
//! - exact algebra of exponential polynomials and Ronkin forms
//!   ([`exppoly`], [`ronkin`]),
//! - the determinant test, order estimation and rank kernels ([`hankel`],
//!   [`linalg`]),
//! - recurrence fitting and Prony-style 1-D recovery ([`recurrence`]),
//! - dense-subgroup generator construction and a constructive density
//!   probe ([`lattice`]),
//! - finite verification of the Montel-type span conditions and the Radó
//!   relation ([`montel`]),
//! - an expression mini-language, sample ingestion and a JSON-reporting
//!   CLI ([`expr`], [`samples`], [`cli`]).

pub mod cli;
pub mod error;
pub mod expr;
pub mod exppoly;
pub mod fixtures;
pub mod hankel;
pub mod lattice;
pub mod linalg;
pub mod montel;
pub mod oracle;
pub mod poly;
pub mod recurrence;
pub mod report;
pub mod ronkin;
pub mod samples;

pub use error::{Error, Result};
