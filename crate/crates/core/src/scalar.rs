//! Constructive factorization of invertible scalar functions on T^q.
//!
//! An invertible trigonometric polynomial a splits as
//!
//!   a = e^{b_-} e^{u_-} ⟨c,·⟩ e^{b_+} e^{u_+}
//!
//! where c is the vector of winding numbers of a along the coordinate
//! loops, b = log|a| comes from the functional calculus applied to a·ā,
//! and u is a continuous logarithm of the unimodular part a|a|^{-1}⟨-c,·⟩.
//! The plus/minus parts are the lexicographic splittings, so each factor
//! lives in the declared spectral cone coefficient-exactly.

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

use crate::calculus::{functional_calc, AnalyticFn};
use crate::error::Error;
use crate::grid::{evaluate, project_series, Grid, SampledMap};
use crate::index::MultiIndex;
use crate::series::{MatrixSeries, ScalarSeries};
use crate::Result;

/// Default invertibility margin on verification grids.
pub const DEFAULT_MARGIN: f64 = 1e-6;

/// Largest allowed phase step between adjacent samples when winding or
/// unwrapping; beyond this the grid cannot be trusted.
pub const MAX_PHASE_STEP: f64 = PI / 2.0;

/// Gap within which a raw winding must sit next to an integer.
pub const ROUNDING_GAP: f64 = 0.1;

/// Scalar factorization data; see the module docs for the normal form.
#[derive(Clone, Debug)]
pub struct ScalarFactorization {
    /// Topological index vector c (coordinate-loop windings).
    pub index: MultiIndex,
    pub b_minus: ScalarSeries,
    pub u_minus: ScalarSeries,
    pub b_plus: ScalarSeries,
    pub u_plus: ScalarSeries,
    /// Sup-norm reconstruction error on the verification grid.
    pub residual: f64,
}

impl ScalarFactorization {
    /// Evaluates the reconstructed product at a point.
    pub fn reconstruct_at(&self, x: &[f64]) -> Complex64 {
        let phase = TAU * self.index.dot(x);
        let character = Complex64::new(phase.cos(), phase.sin());
        (self.b_minus.eval_at(x) + self.u_minus.eval_at(x)).exp()
            * character
            * (self.b_plus.eval_at(x) + self.u_plus.eval_at(x)).exp()
    }
}

/// Total phase increment (in turns) around a closed loop of nonzero values.
///
/// Returns Err if two adjacent samples differ in phase by more than
/// [`MAX_PHASE_STEP`].
pub(crate) fn loop_phase_turns(values: &[Complex64], axis: usize) -> Result<f64> {
    let mut total = 0.0;
    let n = values.len();
    for t in 0..n {
        let ratio = values[(t + 1) % n] / values[t];
        let step = ratio.arg();
        if step.abs() > MAX_PHASE_STEP {
            return Err(Error::PhaseJumpTooLarge {
                jump: step.abs(),
                limit: MAX_PHASE_STEP,
            });
        }
        total += step;
    }
    let _ = axis;
    Ok(total / TAU)
}

fn round_winding(raw: f64, axis: usize) -> Result<i32> {
    let rounded = raw.round();
    let gap = (raw - rounded).abs();
    if gap > ROUNDING_GAP {
        return Err(Error::AmbiguousWinding { axis, raw, gap });
    }
    Ok(rounded as i32)
}

/// Winding number of a scalar series along each coordinate loop
/// x_i ↦ (0, …, x_i, …, 0), by the discrete argument principle.
///
/// Fails with NearSingular if |a| dips below `margin` anywhere on the grid.
pub fn winding_vector(a: &ScalarSeries, grid: &Grid, margin: f64) -> Result<MultiIndex> {
    assert_eq!(a.dim(), grid.dim(), "series/grid dimension mismatch");
    let samples = evaluate(&MatrixSeries::from_scalar(a.clone()), grid);
    let min_mod = (0..grid.len())
        .map(|idx| samples.entry(idx, 0, 0).norm())
        .fold(f64::INFINITY, f64::min);
    if min_mod <= margin {
        return Err(Error::NearSingular {
            context: "winding_vector",
            margin: min_mod,
            threshold: margin,
        });
    }
    let k = grid.dim();
    let mut w = Vec::with_capacity(k);
    for axis in 0..k {
        let mut coords = vec![0usize; k];
        let vals: Vec<Complex64> = (0..grid.dims()[axis])
            .map(|t| {
                coords[axis] = t;
                samples.entry(grid.flat(&coords), 0, 0)
            })
            .collect();
        let raw = loop_phase_turns(&vals, axis)?;
        w.push(round_winding(raw, axis)?);
    }
    Ok(MultiIndex::new(w))
}

/// Continuous logarithm of a nonvanishing scalar sampled map with zero
/// winding along every coordinate loop.
///
/// The branch at the origin node is the one closest to `base` (the
/// principal branch when `base` is None); exp of the output reproduces the
/// input exactly at every node. Wrap-around consistency of the unwrapped
/// phase is verified on every grid edge to 1e-9.
pub fn continuous_log(f: &SampledMap, base: Option<Complex64>) -> Result<SampledMap> {
    assert_eq!(f.size(), 1, "continuous_log expects a 1x1 sampled map");
    let grid = f.grid().clone();
    let total = grid.len();
    let k = grid.dim();

    for idx in 0..total {
        if f.entry(idx, 0, 0).norm() == 0.0 {
            return Err(Error::SingularSample {
                node: grid.coords(idx),
                sigma_min: 0.0,
            });
        }
    }

    // reject nonzero winding up front, scanning the origin loops
    let mut winding = Vec::with_capacity(k);
    for axis in 0..k {
        let mut coords = vec![0usize; k];
        let vals: Vec<Complex64> = (0..grid.dims()[axis])
            .map(|t| {
                coords[axis] = t;
                f.entry(grid.flat(&coords), 0, 0)
            })
            .collect();
        let raw = loop_phase_turns(&vals, axis)?;
        winding.push(round_winding(raw, axis)?);
    }
    if winding.iter().any(|&w| w != 0) {
        return Err(Error::NonzeroWinding { winding });
    }

    // unwrap the phase along a lexicographic spanning tree: the predecessor
    // of a node is found by decrementing its last nonzero coordinate
    let mut theta = vec![0.0f64; total];
    let origin_val = f.entry(0, 0, 0);
    let base_phase = base.map(|b| b.im).unwrap_or(0.0);
    let principal = origin_val.arg();
    theta[0] = principal + TAU * ((base_phase - principal) / TAU).round();

    for idx in 1..total {
        let coords = grid.coords(idx);
        let axis = coords
            .iter()
            .rposition(|&c| c > 0)
            .expect("nonzero flat index has a nonzero coordinate");
        let mut prev = coords.clone();
        prev[axis] -= 1;
        let pidx = grid.flat(&prev);
        let step = (f.entry(idx, 0, 0) / f.entry(pidx, 0, 0)).arg();
        if step.abs() > MAX_PHASE_STEP {
            return Err(Error::PhaseJumpTooLarge {
                jump: step.abs(),
                limit: MAX_PHASE_STEP,
            });
        }
        theta[idx] = theta[pidx] + step;
    }

    // verify single-valuedness across every edge, including the wrap edges
    for idx in 0..total {
        let coords = grid.coords(idx);
        for axis in 0..k {
            let mut next = coords.clone();
            next[axis] = (next[axis] + 1) % grid.dims()[axis];
            let nidx = grid.flat(&next);
            let step = (f.entry(nidx, 0, 0) / f.entry(idx, 0, 0)).arg();
            let defect = theta[nidx] - theta[idx] - step;
            let whole = (defect / TAU).round();
            if (defect - TAU * whole).abs() > 1e-9 {
                return Err(Error::PhaseJumpTooLarge {
                    jump: defect.abs(),
                    limit: 1e-9,
                });
            }
            if whole != 0.0 {
                return Err(Error::NonzeroWinding {
                    winding: winding.clone(),
                });
            }
        }
    }

    let mut out = f.clone();
    for idx in 0..total {
        let v = f.entry(idx, 0, 0);
        *out.entry_mut(idx, 0, 0) = Complex64::new(v.norm().ln(), theta[idx]);
    }
    Ok(out)
}

/// Factorizes an invertible scalar series as
/// e^{b_-}e^{u_-}⟨c,·⟩e^{b_+}e^{u_+}; see the module docs.
pub fn scalar_factorize(a: &ScalarSeries, grid: &Grid, tol: f64) -> Result<ScalarFactorization> {
    scalar_factorize_with_margin(a, grid, tol, DEFAULT_MARGIN)
}

pub fn scalar_factorize_with_margin(
    a: &ScalarSeries,
    grid: &Grid,
    tol: f64,
    margin: f64,
) -> Result<ScalarFactorization> {
    let k = a.dim();
    assert_eq!(k, grid.dim(), "series/grid dimension mismatch");
    let index = winding_vector(a, grid, margin)?;

    // b = log|a| = (1/2) log(a·ā), certified by the functional calculus
    let aa = a.mul(&a.conj());
    let sub_tol = (tol * 0.05).max(1e-13);
    let log_abs = functional_calc(AnalyticFn::Log, &MatrixSeries::from_scalar(aa), grid, sub_tol)?;
    let b = log_abs.series.entry(0, 0).scale(Complex64::new(0.5, 0.0));

    // unimodular part a|a|^{-1}⟨-c,·⟩ has zero winding by construction
    let samples = evaluate(&MatrixSeries::from_scalar(a.clone()), grid);
    let mut unimodular = samples.clone();
    for idx in 0..grid.len() {
        let x = grid.point(idx);
        let v = samples.entry(idx, 0, 0);
        let phase = -TAU * index.dot(&x);
        let character = Complex64::new(phase.cos(), phase.sin());
        *unimodular.entry_mut(idx, 0, 0) = v / v.norm() * character;
    }
    let u_samples = continuous_log(&unimodular, None)?;

    // grow the projection degree of u until the reconstruction meets tol
    let vgrid = grid.refine(2);
    let target = evaluate(&MatrixSeries::from_scalar(a.clone()), &vgrid);
    let max_degree = grid.dims().iter().map(|&n| (n - 1) / 2).min().unwrap();
    let mut degree = a.degree().into_iter().max().unwrap_or(0).max(1) as usize;
    degree = degree.min(max_degree);
    let mut best: Option<(ScalarFactorization, f64)> = None;
    loop {
        let (u_mat, _) = project_series(&u_samples, degree)?;
        let u = u_mat.entry(0, 0).clone();
        let fact = assemble(&index, &b, &u);

        // residual on the verification grid
        let bsamp = evaluate(&MatrixSeries::from_scalar(b.clone()), &vgrid);
        let usamp = evaluate(&MatrixSeries::from_scalar(u.clone()), &vgrid);
        let mut residual: f64 = 0.0;
        for idx in 0..vgrid.len() {
            let x = vgrid.point(idx);
            let phase = TAU * index.dot(&x);
            let character = Complex64::new(phase.cos(), phase.sin());
            let recon =
                (bsamp.entry(idx, 0, 0) + usamp.entry(idx, 0, 0)).exp() * character;
            residual = residual.max((recon - target.entry(idx, 0, 0)).norm());
        }

        if residual <= tol {
            let mut fact = fact;
            fact.residual = residual;
            return Ok(fact);
        }
        if best.as_ref().map_or(true, |(_, r)| residual < *r) {
            let mut fact = fact;
            fact.residual = residual;
            best = Some((fact, residual));
        }
        if degree == max_degree {
            return Err(Error::NoConvergence {
                context: "scalar_factorize degree cap",
                achieved: best.map(|(_, r)| r).unwrap_or(f64::INFINITY),
                requested: tol,
            });
        }
        degree = (degree * 2).min(max_degree);
    }
}

/// Splits b and u into the lex cones; the constants (including the mean of
/// u) are merged into b_plus so each piece has an unambiguous home.
fn assemble(index: &MultiIndex, b: &ScalarSeries, u: &ScalarSeries) -> ScalarFactorization {
    let k = b.dim();
    let mean = u.coefficient(&MultiIndex::zero(k));
    let mut u_centered = u.clone();
    u_centered.add_term(MultiIndex::zero(k), -mean);

    let bs = b.split_pm();
    let us = u_centered.split_pm();
    let mut b_plus = bs.plus;
    b_plus.add_term(MultiIndex::zero(k), bs.zero + mean);

    debug_assert!(bs.minus.is_minus() && us.minus.is_minus());
    debug_assert!(b_plus.is_plus() && us.plus.is_plus());

    ScalarFactorization {
        index: index.clone(),
        b_minus: bs.minus,
        u_minus: us.minus,
        b_plus,
        u_plus: us.plus,
        residual: f64::NAN,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn winding_of_character() {
        let a = ScalarSeries::character(MultiIndex::new(vec![3, -2]));
        let grid = Grid::new(vec![32, 32]);
        let w = winding_vector(&a, &grid, 1e-6).unwrap();
        assert_eq!(w, MultiIndex::new(vec![3, -2]));
    }

    #[test]
    fn winding_of_constant() {
        let a = ScalarSeries::constant(2, c(5.0, 0.0));
        let grid = Grid::new(vec![16, 16]);
        let w = winding_vector(&a, &grid, 1e-6).unwrap();
        assert_eq!(w, MultiIndex::zero(2));
    }

    #[test]
    fn winding_of_dominated_product() {
        // (2 + <e1>) * <-e2>: the first factor never winds since |2| > 1
        let mut f1 = ScalarSeries::constant(2, c(2.0, 0.0));
        f1.add_term(MultiIndex::new(vec![1, 0]), c(1.0, 0.0));
        let a = f1.mul(&ScalarSeries::character(MultiIndex::new(vec![0, -1])));
        let grid = Grid::new(vec![32, 32]);
        let w = winding_vector(&a, &grid, 1e-6).unwrap();
        assert_eq!(w, MultiIndex::new(vec![0, -1]));
    }

    #[test]
    fn winding_is_additive_and_exp_invariant() {
        let mut h = ScalarSeries::constant(2, c(0.2, -0.1));
        h.add_term(MultiIndex::new(vec![1, 1]), c(0.3, 0.4));
        h.add_term(MultiIndex::new(vec![0, -2]), c(-0.2, 0.1));
        let grid = Grid::new(vec![48, 48]);

        let a = ScalarSeries::character(MultiIndex::new(vec![2, -1]));
        let b = ScalarSeries::character(MultiIndex::new(vec![-1, 3]));
        let wa = winding_vector(&a, &grid, 1e-6).unwrap();
        let wb = winding_vector(&b, &grid, 1e-6).unwrap();
        let wab = winding_vector(&a.mul(&b), &grid, 1e-6).unwrap();
        assert_eq!(&wa + &wb, wab);

        // multiplying by e^h does not change the winding (h a trig poly)
        let eh_samples = evaluate(&MatrixSeries::from_scalar(h.clone()), &grid);
        let mut prod = evaluate(&MatrixSeries::from_scalar(a.clone()), &grid);
        for idx in 0..grid.len() {
            let v = prod.entry(idx, 0, 0) * eh_samples.entry(idx, 0, 0).exp();
            *prod.entry_mut(idx, 0, 0) = v;
        }
        // winding of the sampled product along the origin loops
        let mut coords = vec![0usize; 2];
        for axis in 0..2 {
            coords = vec![0, 0];
            let vals: Vec<Complex64> = (0..48)
                .map(|t| {
                    coords[axis] = t;
                    prod.entry(grid.flat(&coords), 0, 0)
                })
                .collect();
            let raw = loop_phase_turns(&vals, axis).unwrap();
            assert_eq!(raw.round() as i32, wa.entries()[axis]);
        }
    }

    #[test]
    fn continuous_log_of_constant() {
        let grid = Grid::new(vec![8, 8]);
        let f = SampledMap::new_fill(1, grid, c(std::f64::consts::E, 0.0));
        let u = continuous_log(&f, None).unwrap();
        for idx in 0..u.grid().len() {
            assert!((u.entry(idx, 0, 0) - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn continuous_log_recovers_planted_exponent() {
        let mut u = ScalarSeries::constant(2, c(0.1, 0.2));
        u.add_term(MultiIndex::new(vec![1, 0]), c(0.4, -0.3));
        u.add_term(MultiIndex::new(vec![-1, 2]), c(-0.1, 0.25));
        let grid = Grid::new(vec![24, 24]);
        let usamp = evaluate(&MatrixSeries::from_scalar(u.clone()), &grid);
        let mut f = usamp.clone();
        for idx in 0..grid.len() {
            *f.entry_mut(idx, 0, 0) = usamp.entry(idx, 0, 0).exp();
        }
        let got = continuous_log(&f, None).unwrap();
        // difference to the planted exponent must be a constant 2 pi i k
        let diff0 = got.entry(0, 0, 0) - usamp.entry(0, 0, 0);
        let k = (diff0.im / TAU).round();
        for idx in 0..grid.len() {
            let diff = got.entry(idx, 0, 0) - usamp.entry(idx, 0, 0);
            assert!((diff - c(0.0, TAU * k)).norm() < 1e-9);
        }
    }

    #[test]
    fn continuous_log_rejects_winding() {
        let a = ScalarSeries::character(MultiIndex::new(vec![1, 0]));
        let grid = Grid::new(vec![16, 16]);
        let f = evaluate(&MatrixSeries::from_scalar(a), &grid);
        let err = continuous_log(&f, None).unwrap_err();
        assert!(matches!(err, Error::NonzeroWinding { .. }));
    }

    #[test]
    fn factorize_pure_character() {
        let cidx = MultiIndex::new(vec![2, -1]);
        let a = ScalarSeries::character(cidx.clone());
        let grid = Grid::new(vec![16, 16]);
        let f = scalar_factorize(&a, &grid, 1e-10).unwrap();
        assert_eq!(f.index, cidx);
        assert!(f.b_minus.wiener_norm() < 1e-10);
        assert!(f.u_minus.wiener_norm() < 1e-10);
        assert!(f.b_plus.wiener_norm() < 1e-10);
        assert!(f.u_plus.wiener_norm() < 1e-10);
        assert!(f.residual < 1e-10);
    }

    #[test]
    fn factorize_constant_two() {
        let a = ScalarSeries::constant(2, c(2.0, 0.0));
        let grid = Grid::new(vec![8, 8]);
        let f = scalar_factorize(&a, &grid, 1e-10).unwrap();
        assert_eq!(f.index, MultiIndex::zero(2));
        assert!(f.u_minus.wiener_norm() < 1e-10 && f.u_plus.wiener_norm() < 1e-10);
        assert!(f.b_minus.wiener_norm() < 1e-10);
        let b0 = f.b_plus.coefficient(&MultiIndex::zero(2));
        assert!((b0 - c(2.0f64.ln(), 0.0)).norm() < 1e-10);
    }

    #[test]
    fn factor_spectra_live_in_their_cones() {
        // planted a = e^b <c> e^u with degree-2 b, u
        let b = ScalarSeries::from_terms(
            2,
            vec![
                (MultiIndex::new(vec![1, 1]), c(0.21, 0.11)),
                (MultiIndex::new(vec![0, -2]), c(-0.13, 0.05)),
                (MultiIndex::new(vec![0, 0]), c(0.4, 0.0)),
            ],
        );
        let u = ScalarSeries::from_terms(
            2,
            vec![
                (MultiIndex::new(vec![-1, 0]), c(0.17, -0.2)),
                (MultiIndex::new(vec![2, 0]), c(0.05, 0.12)),
            ],
        );
        let cidx = MultiIndex::new(vec![1, -2]);
        let grid = Grid::new(vec![32, 32]);
        // build a as exact samples, then factor the projected series
        let eb = functional_calc(AnalyticFn::Exp, &MatrixSeries::from_scalar(b.clone()), &grid, 1e-11)
            .unwrap()
            .series;
        let eu = functional_calc(AnalyticFn::Exp, &MatrixSeries::from_scalar(u.clone()), &grid, 1e-11)
            .unwrap()
            .series;
        let a = eb
            .entry(0, 0)
            .mul(&ScalarSeries::character(cidx.clone()))
            .mul(eu.entry(0, 0));

        let f = scalar_factorize(&a, &grid, 1e-8).unwrap();
        assert_eq!(f.index, cidx);
        assert!(f.residual <= 1e-8, "residual {}", f.residual);
        assert!(f.b_minus.is_minus() && f.u_minus.is_minus());
        assert!(f.b_plus.is_plus() && f.u_plus.is_plus());
        // strictness: the minus parts have no zero-frequency coefficient
        assert_eq!(f.b_minus.coefficient(&MultiIndex::zero(2)), Complex64::default());
        assert_eq!(f.u_minus.coefficient(&MultiIndex::zero(2)), Complex64::default());
        assert_eq!(f.u_plus.coefficient(&MultiIndex::zero(2)), Complex64::default());
    }
}
