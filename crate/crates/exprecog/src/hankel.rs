//! Hankel windows of shifted samples and the Popoviciu determinant test.
//!
//! The (n+1)×(n+1) window at base point x and step h has entry (i,j) equal
//! to f(x+(i+j)h), built from the 2n+1 evaluations f(x+kh). The function
//! satisfies the functional equation at order n when every such determinant
//! vanishes; numerically we scale each row to unit sup-norm first so a
//! single tolerance works across magnitudes and orders.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{all_finite, lu_determinant};
pub use crate::linalg::numerical_rank;
use crate::oracle::FunctionOracle;
use crate::samples::SampleLattice;

/// Entry magnitudes above this trigger a whole-window rescale before
/// elimination; the row-scaled verdict is unaffected.
const OVERFLOW_GUARD: f64 = 1e100;

/// Hankel window of shifted samples; entry (i,j) = f(x + (i+j)h).
#[derive(Debug, Clone)]
pub struct HankelWindow {
    x: Vec<f64>,
    h: Vec<f64>,
    order: usize,
    /// The 2n+1 evaluations f(x+kh), k = 0..=2n.
    samples: Vec<Complex64>,
}

impl HankelWindow {
    pub fn base(&self) -> &[f64] {
        &self.x
    }

    pub fn step(&self) -> &[f64] {
        &self.h
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.samples[i + j]
    }

    pub fn matrix(&self) -> DMatrix<Complex64> {
        let n = self.order + 1;
        DMatrix::from_fn(n, n, |i, j| self.entry(i, j))
    }

    /// Build a window directly from the 2n+1 shifted samples.
    pub fn from_samples(x: Vec<f64>, h: Vec<f64>, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() % 2 == 0 || samples.is_empty() {
            return Err(Error::invalid("a window of order n needs 2n+1 samples"));
        }
        let order = (samples.len() - 1) / 2;
        Ok(Self { x, h, order, samples })
    }
}

/// Evaluate the 2n+1 samples f(x+kh) and assemble the window.
pub fn build_hankel(
    f: &FunctionOracle,
    x: &[f64],
    h: &[f64],
    n: usize,
) -> Result<HankelWindow> {
    if x.len() != f.dim() || h.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: x.len().max(h.len()),
        });
    }
    let mut samples = Vec::with_capacity(2 * n + 1);
    for k in 0..=(2 * n) {
        let point: Vec<f64> = x
            .iter()
            .zip(h)
            .map(|(&xi, &hi)| xi + k as f64 * hi)
            .collect();
        samples.push(f.eval(&point)?);
    }
    Ok(HankelWindow { x: x.to_vec(), h: h.to_vec(), order: n, samples })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Vanishing,
    NonVanishing,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Vanishing => "vanishing",
            Verdict::NonVanishing => "non-vanishing",
        }
    }
}

/// Raw and row-scaled determinant of one window.
#[derive(Debug, Clone)]
pub struct DeterminantReport {
    pub raw_det: Complex64,
    /// |det| after every row is scaled to unit sup-norm; 0 if a row is
    /// all-zero. Bounded by (n+1)^((n+1)/2).
    pub row_scaled_det_magnitude: f64,
    pub verdict: Verdict,
}

/// Decide vanishing of one window at the given tolerance.
pub fn determinant_report(w: &HankelWindow, tol: f64) -> Result<DeterminantReport> {
    if tol <= 0.0 {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let m = w.matrix();
    if !all_finite(&m) {
        return Err(Error::NonFiniteInput(format!(
            "window at x={:?}, h={:?} has non-finite entries",
            w.x, w.h
        )));
    }
    let n = m.nrows();
    let max_entry = m.iter().map(|c| c.norm()).fold(0.0, f64::max);

    let raw_det = if max_entry > OVERFLOW_GUARD {
        let scaled = m.map(|c| c / max_entry);
        lu_determinant(&scaled) * max_entry.powi(n as i32)
    } else {
        lu_determinant(&m)
    };

    let mut scaled = m;
    let mut zero_row = false;
    for i in 0..n {
        let sup = (0..n).map(|j| scaled[(i, j)].norm()).fold(0.0, f64::max);
        if sup == 0.0 {
            zero_row = true;
            break;
        }
        for j in 0..n {
            scaled[(i, j)] /= sup;
        }
    }
    let row_scaled_det_magnitude = if zero_row { 0.0 } else { lu_determinant(&scaled).norm() };
    let verdict = if row_scaled_det_magnitude <= tol {
        Verdict::Vanishing
    } else {
        Verdict::NonVanishing
    };
    Ok(DeterminantReport { raw_det, row_scaled_det_magnitude, verdict })
}

/// Discretization of "for all x, h": a product of base points and steps.
#[derive(Debug, Clone)]
pub struct TestGrid {
    pub base_points: Vec<Vec<f64>>,
    pub steps: Vec<Vec<f64>>,
    pub seed: u64,
    pub tol: f64,
}

impl TestGrid {
    /// Seeded default grid: `grid_size` base points and steps drawn
    /// uniformly from [−1,1]^dim; steps with norm < 1e−3 are re-drawn.
    pub fn default_for(dim: usize, seed: u64, tol: f64, grid_size: usize) -> Result<Self> {
        if tol <= 0.0 {
            return Err(Error::invalid("tolerance must be positive"));
        }
        if grid_size < 1 {
            return Err(Error::invalid("grid size must be at least 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw_point =
            |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect() };
        let base_points: Vec<Vec<f64>> = (0..grid_size).map(|_| draw_point(&mut rng)).collect();
        let mut steps = Vec::with_capacity(grid_size);
        while steps.len() < grid_size {
            let s = draw_point(&mut rng);
            let norm = s.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm >= 1e-3 {
                steps.push(s);
            }
        }
        Ok(Self { base_points, steps, seed, tol })
    }

    /// Lattice-aligned grid for sampled oracles: steps are integer multiples
    /// of the sample spacing and base points are lattice points chosen so
    /// that x + 2·n_max·h stays inside the sampled range for every grid
    /// pairing.
    pub fn lattice_for(
        lat: &SampleLattice,
        n_max: usize,
        seed: u64,
        tol: f64,
        grid_size: usize,
    ) -> Result<Self> {
        if tol <= 0.0 {
            return Err(Error::invalid("tolerance must be positive"));
        }
        let dim = lat.dim();
        let reach = 2 * n_max.max(1) as i64;
        // Per axis: either symmetric multiples in [−M, M] with bases pulled
        // in from both edges, or (when the range is tight) forward-only
        // multiples {0, 1} with bases at the low edge. Windows with a
        // reversed step are index-flipped copies of forward ones, so
        // forward-only sampling loses no determinant information.
        struct AxisPlan {
            max_mult: i64,
            two_sided: bool,
            base_lo: i64,
            base_hi: i64,
        }
        let mut plans = Vec::with_capacity(dim);
        for &count in lat.counts() {
            let span = count as i64 - 1;
            if span >= 4 * reach {
                let m = span / (4 * reach);
                plans.push(AxisPlan {
                    max_mult: m,
                    two_sided: true,
                    base_lo: reach * m,
                    base_hi: span - reach * m,
                });
            } else if span >= reach + 3 {
                plans.push(AxisPlan {
                    max_mult: 1,
                    two_sided: false,
                    base_lo: 0,
                    base_hi: span - reach,
                });
            } else {
                return Err(Error::MalformedInput {
                    line: None,
                    message: format!(
                        "sampled range too small for order {n_max}: axis has {count} points, \
                         needs at least {}",
                        reach + 4
                    ),
                });
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut steps: Vec<Vec<f64>> = Vec::new();
        let mut guard = 0;
        while steps.len() < grid_size && guard < 10_000 {
            guard += 1;
            let mult: Vec<i64> = plans
                .iter()
                .map(|p| {
                    if p.two_sided {
                        rng.gen_range(-p.max_mult..=p.max_mult)
                    } else {
                        rng.gen_range(0..=p.max_mult)
                    }
                })
                .collect();
            if mult.iter().all(|&m| m == 0) {
                continue;
            }
            let step: Vec<f64> = mult
                .iter()
                .enumerate()
                .map(|(a, &m)| m as f64 * lat.spacing()[a])
                .collect();
            if steps.len() < 4 || !steps.contains(&step) {
                steps.push(step);
            }
        }
        if steps.is_empty() {
            return Err(Error::invalid("could not build lattice steps"));
        }
        let mut base_points = Vec::new();
        let mut guard = 0;
        while base_points.len() < grid_size && guard < 10_000 {
            guard += 1;
            let idx: Vec<i64> = plans
                .iter()
                .map(|p| rng.gen_range(p.base_lo..=p.base_hi))
                .collect();
            base_points.push(lat.point(&idx));
        }
        Ok(Self { base_points, steps, seed, tol })
    }

    /// Default or lattice grid depending on the oracle's backing.
    pub fn for_oracle(
        f: &FunctionOracle,
        n_max: usize,
        seed: u64,
        tol: f64,
        grid_size: usize,
    ) -> Result<Self> {
        match f.lattice() {
            Some(lat) => Self::lattice_for(lat, n_max, seed, tol, grid_size),
            None => Self::default_for(f.dim(), seed, tol, grid_size),
        }
    }

    pub fn dim(&self) -> Option<usize> {
        self.base_points.first().map(|p| p.len())
    }
}

/// Result of sweeping the grid at one order.
#[derive(Debug, Clone)]
pub struct PopoviciuReport {
    pub pass: bool,
    pub worst_window: HankelWindow,
    pub worst_magnitude: f64,
    pub worst_raw_det: Complex64,
    pub windows_tested: usize,
}

/// Check the determinant condition at order n over the whole grid product.
pub fn popoviciu_test(
    f: &FunctionOracle,
    n: usize,
    grid: &TestGrid,
) -> Result<PopoviciuReport> {
    if let Some(d) = grid.dim() {
        if d != f.dim() {
            return Err(Error::DimensionMismatch { expected: f.dim(), got: d });
        }
    }
    if grid.base_points.is_empty() || grid.steps.is_empty() {
        return Err(Error::invalid("grid must contain base points and steps"));
    }
    let mut pass = true;
    let mut worst: Option<(f64, HankelWindow, Complex64)> = None;
    let mut windows_tested = 0;
    for x in &grid.base_points {
        for h in &grid.steps {
            let window = build_hankel(f, x, h, n)?;
            let report = determinant_report(&window, grid.tol)?;
            windows_tested += 1;
            if report.verdict == Verdict::NonVanishing {
                pass = false;
            }
            let is_worse = worst
                .as_ref()
                .map(|(m, _, _)| report.row_scaled_det_magnitude > *m)
                .unwrap_or(true);
            if is_worse {
                worst = Some((report.row_scaled_det_magnitude, window, report.raw_det));
            }
        }
    }
    let (worst_magnitude, worst_window, worst_raw_det) = worst.expect("non-empty grid");
    Ok(PopoviciuReport { pass, worst_window, worst_magnitude, worst_raw_det, windows_tested })
}

/// Outcome of the minimal-order search.
#[derive(Debug, Clone)]
pub struct OrderEstimate {
    /// Smallest passing order, if any.
    pub order: Option<usize>,
    /// Worst row-scaled magnitude per probed order, in probe order.
    pub probes: Vec<OrderProbe>,
}

#[derive(Debug, Clone)]
pub struct OrderProbe {
    pub order: usize,
    pub pass: bool,
    pub worst_magnitude: f64,
}

/// Find the smallest n ≤ n_max at which the grid-wide test passes.
pub fn estimate_order(
    f: &FunctionOracle,
    n_max: usize,
    grid: &TestGrid,
) -> Result<OrderEstimate> {
    let mut probes = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let report = popoviciu_test(f, n, grid)?;
        probes.push(OrderProbe {
            order: n,
            pass: report.pass,
            worst_magnitude: report.worst_magnitude,
        });
        if report.pass {
            return Ok(OrderEstimate { order: Some(n), probes });
        }
    }
    Ok(OrderEstimate { order: None, probes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use crate::exppoly::ExpPoly;
    use crate::poly::MultivariatePolynomial;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn oracle(text: &str, dim: usize) -> FunctionOracle {
        FunctionOracle::from_expression(parse_expression(text, dim).unwrap())
    }

    #[test]
    fn window_entries_exp() {
        let f = oracle("exp(x1)", 1);
        let w = build_hankel(&f, &[0.0], &[1.0], 1).unwrap();
        let e = std::f64::consts::E;
        assert!((w.entry(0, 0) - re(1.0)).norm() < 1e-15);
        assert!((w.entry(0, 1) - re(e)).norm() < 1e-14);
        assert!((w.entry(1, 0) - re(e)).norm() < 1e-14);
        assert!((w.entry(1, 1) - re(e * e)).norm() < 1e-13);
    }

    #[test]
    fn window_entries_linear() {
        let f = oracle("x1", 1);
        let w = build_hankel(&f, &[0.0], &[1.0], 1).unwrap();
        let m = w.matrix();
        assert_eq!(m[(0, 0)], re(0.0));
        assert_eq!(m[(0, 1)], re(1.0));
        assert_eq!(m[(1, 0)], re(1.0));
        assert_eq!(m[(1, 1)], re(2.0));
    }

    #[test]
    fn order_zero_window_is_single_sample() {
        let f = oracle("cos(x1)", 1);
        let w = build_hankel(&f, &[0.3], &[0.7], 0).unwrap();
        assert_eq!(w.samples().len(), 1);
        assert_eq!(w.matrix().nrows(), 1);
    }

    #[test]
    fn exp_window_vanishes() {
        let f = oracle("exp(x1)", 1);
        let w = build_hankel(&f, &[0.0], &[1.0], 1).unwrap();
        let rep = determinant_report(&w, 1e-8).unwrap();
        assert!(rep.raw_det.norm() < 1e-12);
        assert_eq!(rep.verdict, Verdict::Vanishing);
    }

    #[test]
    fn linear_window_determinant() {
        // x(x+2h) − (x+h)^2 = −h^2; at x=0, h=1 the raw determinant is −1.
        let f = oracle("x1", 1);
        let w = build_hankel(&f, &[0.0], &[1.0], 1).unwrap();
        let rep = determinant_report(&w, 1e-8).unwrap();
        assert!((rep.raw_det - re(-1.0)).norm() < 1e-14);
        assert_eq!(rep.verdict, Verdict::NonVanishing);
    }

    #[test]
    fn gaussian_window_determinant() {
        // f(t) = e^{t^2}: raw determinant e^4 − e^2 at x=0, h=1, n=1.
        let f = oracle("exp(x1^2)", 1);
        let w = build_hankel(&f, &[0.0], &[1.0], 1).unwrap();
        let rep = determinant_report(&w, 1e-8).unwrap();
        let expected = 4.0f64.exp() - 2.0f64.exp();
        assert!((rep.raw_det - re(expected)).norm() < 1e-10 * expected);
        assert_eq!(rep.verdict, Verdict::NonVanishing);
    }

    #[test]
    fn zero_step_window_is_singular() {
        let f = oracle("exp(x1)+x1", 1);
        let w = build_hankel(&f, &[0.4], &[0.0], 2).unwrap();
        let rep = determinant_report(&w, 1e-8).unwrap();
        assert_eq!(rep.row_scaled_det_magnitude, 0.0);
        assert_eq!(rep.verdict, Verdict::Vanishing);
    }

    #[test]
    fn non_finite_window_rejected() {
        // 1/x1 at x = 0 is infinite.
        let f = oracle("1/x1", 1);
        let w = build_hankel(&f, &[0.0], &[1.0], 1).unwrap();
        assert!(matches!(determinant_report(&w, 1e-8), Err(Error::NonFiniteInput(_))));
    }

    #[test]
    fn verdict_is_scale_invariant() {
        let f = oracle("exp(x1^2)", 1);
        let g = oracle("1000000*exp(x1^2)", 1);
        let wf = build_hankel(&f, &[0.2], &[0.6], 2).unwrap();
        let wg = build_hankel(&g, &[0.2], &[0.6], 2).unwrap();
        let rf = determinant_report(&wf, 1e-8).unwrap();
        let rg = determinant_report(&wg, 1e-8).unwrap();
        let diff = (rf.row_scaled_det_magnitude - rg.row_scaled_det_magnitude).abs();
        assert!(diff <= 1e-12 * rf.row_scaled_det_magnitude.max(1.0));
        assert_eq!(rf.verdict, rg.verdict);
    }

    #[test]
    fn affine_passes_in_two_variables() {
        let f = oracle("x1 + x2", 2);
        let grid = TestGrid::default_for(2, 42, 1e-8, 8).unwrap();
        let rep = popoviciu_test(&f, 2, &grid).unwrap();
        assert!(rep.pass, "worst magnitude {}", rep.worst_magnitude);
    }

    #[test]
    fn product_exponential_fails_with_explicit_window() {
        let f = oracle("exp(x1*x2)", 2);
        let grid = TestGrid {
            base_points: vec![vec![0.0, 0.0]],
            steps: vec![vec![1.0, 1.0]],
            seed: 0,
            tol: 1e-8,
        };
        let rep = popoviciu_test(&f, 1, &grid).unwrap();
        assert!(!rep.pass);
        let expected = 4.0f64.exp() - 2.0f64.exp();
        assert!((rep.worst_raw_det - re(expected)).norm() < 1e-10 * expected);
    }

    #[test]
    fn zero_function_passes_any_order() {
        let f = oracle("0", 1);
        let grid = TestGrid::default_for(1, 7, 1e-8, 6).unwrap();
        for n in 0..4 {
            assert!(popoviciu_test(&f, n, &grid).unwrap().pass);
        }
    }

    #[test]
    fn build_hankel_uses_exactly_2n_plus_1_evaluations() {
        use std::sync::atomic::Ordering;

        for n in 0..6 {
            let (f, count) = FunctionOracle::counting(oracle("exp(x1)", 1));
            let w = build_hankel(&f, &[0.1], &[0.3], n).unwrap();
            assert_eq!(w.samples().len(), 2 * n + 1);
            assert_eq!(count.load(Ordering::Relaxed), 2 * n + 1);
        }
    }

    #[test]
    fn estimate_order_examples() {
        // 3·2^x + 1 has translation dimension 2.
        let f = oracle("3*2^x1 + 1", 1);
        let grid = TestGrid::default_for(1, 42, 1e-8, 12).unwrap();
        let est = estimate_order(&f, 5, &grid).unwrap();
        assert_eq!(est.order, Some(2));

        // A constant needs order 1.
        let c7 = oracle("7", 1);
        let est = estimate_order(&c7, 3, &grid).unwrap();
        assert_eq!(est.order, Some(1));

        // e^{t^2} never passes.
        let g = oracle("exp(x1^2)", 1);
        let est = estimate_order(&g, 4, &grid).unwrap();
        assert_eq!(est.order, None);
    }

    #[test]
    fn estimate_order_bounded_by_translation_dimension() {
        let p = ExpPoly::from_terms(
            1,
            vec![
                (
                    MultivariatePolynomial::from_terms(1, vec![(vec![1], re(2.0))]).unwrap(),
                    vec![re(0.5)],
                ),
                (MultivariatePolynomial::constant(1, re(-1.0)), vec![re(-0.25)]),
            ],
        )
        .unwrap();
        let n = p.translation_space_dimension();
        assert_eq!(n, 3);
        let f = FunctionOracle::from_exppoly(p);
        let grid = TestGrid::default_for(1, 11, 1e-8, 12).unwrap();
        let est = estimate_order(&f, 6, &grid).unwrap();
        assert!(est.order.unwrap() <= n);
    }
}
