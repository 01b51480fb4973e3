//! Uniform grids on T^k, sampled matrix maps, and the DFT bridge between
//! samples and trigonometric-polynomial series.
//!
//! Sampling a series on an N-point axis and reading the coefficients back is
//! exact as long as the degree stays below N/2: the grid characters
//! e^{2πi k i/N} only see k mod N, and the scatter/gather below uses exactly
//! that wrapping, so evaluation through the FFT agrees with pointwise
//! evaluation to rounding error.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::Error;
use crate::index::MultiIndex;
use crate::series::{MatrixSeries, ScalarSeries};
use crate::Result;

/// Uniform sampling grid with N_i nodes on axis i; node coordinates are
/// x = (i_1/N_1, ..., i_k/N_k).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Grid {
    dims: Vec<usize>,
}

impl Grid {
    pub fn new(dims: Vec<usize>) -> Self {
        assert!(!dims.is_empty(), "grid must have at least one axis");
        assert!(dims.iter().all(|&n| n >= 2), "grid sizes must be at least 2");
        Grid { dims }
    }

    /// Cubic grid with `n` nodes on each of `k` axes.
    pub fn cubic(k: usize, n: usize) -> Self {
        Self::new(vec![n; k])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid with every axis refined by `factor`.
    pub fn refine(&self, factor: usize) -> Grid {
        Grid::new(self.dims.iter().map(|&n| n * factor).collect())
    }

    /// Flat index of a node given per-axis indices (last axis fastest).
    pub fn flat(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.dims.len());
        let mut idx = 0;
        for (i, &c) in coords.iter().enumerate() {
            debug_assert!(c < self.dims[i]);
            idx = idx * self.dims[i] + c;
        }
        idx
    }

    /// Per-axis indices of a flat node index.
    pub fn coords(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for axis in (0..self.dims.len()).rev() {
            out[axis] = idx % self.dims[axis];
            idx /= self.dims[axis];
        }
        out
    }

    /// Node coordinates in [0,1)^k.
    pub fn point(&self, idx: usize) -> Vec<f64> {
        self.coords(idx)
            .iter()
            .zip(&self.dims)
            .map(|(&i, &n)| i as f64 / n as f64)
            .collect()
    }
}

/// Matrix-valued samples on a grid: one complex n×n matrix per node.
#[derive(Clone, Debug)]
pub struct SampledMap {
    n: usize,
    grid: Grid,
    data: Vec<Complex64>, // node-major, then row-major within each matrix
}

impl SampledMap {
    pub fn new_fill(n: usize, grid: Grid, value: Complex64) -> Self {
        let total = grid.len() * n * n;
        SampledMap {
            n,
            grid,
            data: vec![value; total],
        }
    }

    /// Identity at every node.
    pub fn new_identity(n: usize, grid: Grid) -> Self {
        let mut m = Self::new_fill(n, grid, Complex64::default());
        for idx in 0..m.grid.len() {
            for i in 0..n {
                *m.entry_mut(idx, i, i) = Complex64::new(1.0, 0.0);
            }
        }
        m
    }

    /// Samples `f` at every node, in parallel, in a fixed node order.
    pub fn from_fn<F>(n: usize, grid: Grid, f: F) -> Self
    where
        F: Fn(&[f64]) -> DMatrix<Complex64> + Sync,
    {
        let mut data = vec![Complex64::default(); grid.len() * n * n];
        data.par_chunks_mut(n * n).enumerate().for_each(|(idx, chunk)| {
            let m = f(&grid.point(idx));
            debug_assert_eq!((m.nrows(), m.ncols()), (n, n));
            for r in 0..n {
                for c in 0..n {
                    chunk[r * n + c] = m[(r, c)];
                }
            }
        });
        SampledMap { n, grid, data }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn entry(&self, node: usize, row: usize, col: usize) -> Complex64 {
        self.data[(node * self.n + row) * self.n + col]
    }

    pub fn entry_mut(&mut self, node: usize, row: usize, col: usize) -> &mut Complex64 {
        &mut self.data[(node * self.n + row) * self.n + col]
    }

    pub fn sample(&self, node: usize) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.n, self.n, |r, c| self.entry(node, r, c))
    }

    pub fn set_sample(&mut self, node: usize, m: &DMatrix<Complex64>) {
        debug_assert_eq!((m.nrows(), m.ncols()), (self.n, self.n));
        for r in 0..self.n {
            for c in 0..self.n {
                *self.entry_mut(node, r, c) = m[(r, c)];
            }
        }
    }

    /// Largest entrywise distance to another map on the same grid.
    pub fn sup_distance(&self, other: &SampledMap) -> f64 {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        assert_eq!(self.n, other.n, "matrix size mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest deviation of XᴴX from the identity over all nodes.
    pub fn unitary_defect(&self) -> f64 {
        let n = self.n;
        (0..self.grid.len())
            .into_par_iter()
            .map(|idx| {
                let x = self.sample(idx);
                let h = x.adjoint() * &x;
                let mut worst: f64 = 0.0;
                for r in 0..n {
                    for c in 0..n {
                        let target = if r == c {
                            Complex64::new(1.0, 0.0)
                        } else {
                            Complex64::default()
                        };
                        worst = worst.max((h[(r, c)] - target).norm());
                    }
                }
                worst
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Pointwise product of two maps on the same grid.
    pub fn mul(&self, other: &SampledMap) -> SampledMap {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        assert_eq!(self.n, other.n, "matrix size mismatch");
        let mut out = self.clone();
        out.data
            .par_chunks_mut(self.n * self.n)
            .enumerate()
            .for_each(|(idx, chunk)| {
                let p = self.sample(idx) * other.sample(idx);
                for r in 0..self.n {
                    for c in 0..self.n {
                        chunk[r * self.n + c] = p[(r, c)];
                    }
                }
            });
        out
    }

    /// Smallest singular value over all nodes.
    pub fn min_singular_value(&self) -> f64 {
        (0..self.grid.len())
            .into_par_iter()
            .map(|idx| {
                let sv = self.sample(idx).singular_values();
                sv.iter().copied().fold(f64::INFINITY, f64::min)
            })
            .reduce(|| f64::INFINITY, f64::min)
    }

    /// Determinant samples along the full grid.
    pub fn det_at(&self, node: usize) -> Complex64 {
        self.sample(node).determinant()
    }
}

/// Unnormalized multi-dimensional FFT over the node-major layout used by
/// [`SampledMap`]. `inverse` selects the e^{+2πi...} kernel.
fn fft_nd(data: &mut [Complex64], dims: &[usize], inverse: bool) {
    let total: usize = dims.iter().product();
    debug_assert_eq!(data.len(), total);
    let mut planner = FftPlanner::new();
    // stride of the axis in the flat layout; last axis is contiguous
    for axis in 0..dims.len() {
        let len = dims[axis];
        let fft = if inverse {
            planner.plan_fft_inverse(len)
        } else {
            planner.plan_fft_forward(len)
        };
        let inner: usize = dims[axis + 1..].iter().product();
        let outer: usize = dims[..axis].iter().product();
        let mut line = vec![Complex64::default(); len];
        for o in 0..outer {
            for i in 0..inner {
                let base = o * len * inner + i;
                for j in 0..len {
                    line[j] = data[base + j * inner];
                }
                fft.process(&mut line);
                for j in 0..len {
                    data[base + j * inner] = line[j];
                }
            }
        }
    }
}

fn wrap(j: i32, n: usize) -> usize {
    (j.rem_euclid(n as i32)) as usize
}

/// Evaluates a matrix series at every node of `grid`.
///
/// Exact (to rounding) for any degree: coefficients are accumulated into
/// their aliased bins before the transform, which is precisely how the grid
/// characters behave.
pub fn evaluate(series: &MatrixSeries, grid: &Grid) -> SampledMap {
    assert_eq!(series.dim(), grid.dim(), "series/grid dimension mismatch");
    let n = series.size();
    let total = grid.len();
    let mut out = SampledMap::new_fill(n, grid.clone(), Complex64::default());
    let mut bins = vec![Complex64::default(); total];
    for r in 0..n {
        for c in 0..n {
            bins.fill(Complex64::default());
            for (j, coef) in series.entry(r, c).terms() {
                let coords: Vec<usize> = j
                    .entries()
                    .iter()
                    .zip(grid.dims())
                    .map(|(&e, &nn)| wrap(e, nn))
                    .collect();
                bins[grid.flat(&coords)] += coef;
            }
            fft_nd(&mut bins, grid.dims(), true);
            for idx in 0..total {
                *out.entry_mut(idx, r, c) = bins[idx];
            }
        }
    }
    out
}

/// Truncated discrete Fourier projection of a sampled map: returns the series
/// with all coefficients of degree at most `degree` per axis, together with
/// the sup-error of the projection measured on the sampling grid.
///
/// Requires every axis to resolve the requested band, N_i > 2·degree.
pub fn project_series(map: &SampledMap, degree: usize) -> Result<(MatrixSeries, f64)> {
    let grid = map.grid();
    if grid.dims().iter().any(|&n| n <= 2 * degree) {
        return Err(Error::GridTooCoarse {
            grid: grid.dims().to_vec(),
            degree,
        });
    }
    let n = map.size();
    let total = grid.len();
    let scale = 1.0 / total as f64;
    let d = degree as i32;
    let k = grid.dim();

    let mut series = MatrixSeries::zero(n, k);
    let mut bins = vec![Complex64::default(); total];
    for r in 0..n {
        for c in 0..n {
            for idx in 0..total {
                bins[idx] = map.entry(idx, r, c);
            }
            fft_nd(&mut bins, grid.dims(), false);
            let mut out = ScalarSeries::zero(k);
            let mut j = vec![-d; k];
            loop {
                let coords: Vec<usize> = j
                    .iter()
                    .zip(grid.dims())
                    .map(|(&e, &nn)| wrap(e, nn))
                    .collect();
                let coef = bins[grid.flat(&coords)] * scale;
                if coef.norm() > 1e-300 {
                    out.add_term(MultiIndex::new(j.clone()), coef);
                }
                // advance the multi-index counter over [-d, d]^k
                let mut axis = k;
                loop {
                    if axis == 0 {
                        break;
                    }
                    axis -= 1;
                    if j[axis] < d {
                        j[axis] += 1;
                        break;
                    }
                    j[axis] = -d;
                }
                if axis == 0 && j[0] == -d {
                    break;
                }
            }
            *series.entry_mut(r, c) = out;
        }
    }

    let back = evaluate(&series, grid);
    let sup_error = back.sup_distance(map);
    Ok((series, sup_error))
}

/// Pointwise unitary (polar) factor X(XᴴX)^{-1/2} of an invertible sampled map.
///
/// The eigen route is followed by Newton–Schulz polishing so every output
/// sample is unitary to 1e-12 even for moderately ill-conditioned inputs.
pub fn unitarize(map: &SampledMap) -> Result<SampledMap> {
    let total = map.grid().len();
    let results: Vec<std::result::Result<DMatrix<Complex64>, f64>> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let x = map.sample(idx);
            polar_factor(&x)
        })
        .collect();
    let mut out = map.clone();
    for (idx, res) in results.into_iter().enumerate() {
        match res {
            Ok(u) => out.set_sample(idx, &u),
            Err(sigma_min) => {
                return Err(Error::SingularSample {
                    node: map.grid().coords(idx),
                    sigma_min,
                })
            }
        }
    }
    Ok(out)
}

/// Unitary polar factor of a single matrix, or Err(σ_min) if singular.
pub(crate) fn polar_factor(x: &DMatrix<Complex64>) -> std::result::Result<DMatrix<Complex64>, f64> {
    let n = x.nrows();
    let h = x.adjoint() * x;
    let eig = nalgebra::SymmetricEigen::new(h);
    let max_ev = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let min_ev = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min_ev > max_ev * 1e-28 && min_ev > 0.0) {
        return Err(min_ev.max(0.0).sqrt());
    }
    let inv_sqrt = DMatrix::from_diagonal(
        &eig.eigenvalues
            .map(|ev| Complex64::new(1.0 / ev.sqrt(), 0.0)),
    );
    let mut u = x * &eig.eigenvectors * inv_sqrt * eig.eigenvectors.adjoint();
    // Newton–Schulz polish: quadratic convergence to the unitary factor
    let id = DMatrix::<Complex64>::identity(n, n);
    for _ in 0..3 {
        let e = &id - u.adjoint() * &u;
        let defect = e.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if defect < 1e-15 {
            break;
        }
        u = &u + (&u * e).scale(0.5);
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn evaluate_constant_matrix() {
        let mut m = MatrixSeries::zero(2, 2);
        *m.entry_mut(0, 0) = ScalarSeries::constant(2, c(1.0, -2.0));
        *m.entry_mut(1, 0) = ScalarSeries::constant(2, c(0.5, 0.0));
        let grid = Grid::new(vec![4, 6]);
        let s = evaluate(&m, &grid);
        for idx in 0..grid.len() {
            assert!((s.entry(idx, 0, 0) - c(1.0, -2.0)).norm() < 1e-12);
            assert!((s.entry(idx, 1, 0) - c(0.5, 0.0)).norm() < 1e-12);
            assert!(s.entry(idx, 0, 1).norm() < 1e-12);
        }
    }

    #[test]
    fn evaluate_matches_pointwise() {
        let a = ScalarSeries::from_terms(
            2,
            vec![
                (MultiIndex::new(vec![1, 2]), c(1.0, 0.3)),
                (MultiIndex::new(vec![-2, 0]), c(0.0, -1.0)),
                (MultiIndex::new(vec![0, 0]), c(2.0, 0.0)),
            ],
        );
        let m = MatrixSeries::from_scalar(a.clone());
        let grid = Grid::new(vec![8, 6]);
        let s = evaluate(&m, &grid);
        for idx in 0..grid.len() {
            let x = grid.point(idx);
            assert!((s.entry(idx, 0, 0) - a.eval_at(&x)).norm() < 1e-11);
        }
    }

    #[test]
    fn project_recovers_planted_series() {
        let a = ScalarSeries::from_terms(
            2,
            vec![
                (MultiIndex::new(vec![1, -3]), c(0.7, 0.1)),
                (MultiIndex::new(vec![-2, 2]), c(-0.4, 0.9)),
                (MultiIndex::new(vec![0, 0]), c(1.0, 0.0)),
            ],
        );
        let m = MatrixSeries::from_scalar(a.clone());
        let grid = Grid::new(vec![8, 8]);
        let s = evaluate(&m, &grid);
        let (back, sup) = project_series(&s, 3).unwrap();
        assert!(sup < 1e-10, "sup error {sup}");
        let diff = back.sub(&m);
        assert!(diff.wiener_norm() < 1e-10, "coef error {}", diff.wiener_norm());
    }

    #[test]
    fn project_rejects_coarse_grid() {
        let grid = Grid::new(vec![8, 8]);
        let s = SampledMap::new_identity(1, grid);
        let err = project_series(&s, 4).unwrap_err();
        assert!(matches!(err, Error::GridTooCoarse { .. }));
    }

    #[test]
    fn unitarize_scaled_identity() {
        let grid = Grid::new(vec![3, 3]);
        let mut s = SampledMap::new_identity(2, grid);
        for idx in 0..s.grid().len() {
            for i in 0..2 {
                *s.entry_mut(idx, i, i) = c(2.0, 0.0);
            }
        }
        let u = unitarize(&s).unwrap();
        let id = SampledMap::new_identity(2, Grid::new(vec![3, 3]));
        assert!(u.sup_distance(&id) < 1e-12);
    }

    #[test]
    fn unitarize_reports_singular_node() {
        let grid = Grid::new(vec![2, 2]);
        let mut s = SampledMap::new_identity(2, grid);
        *s.entry_mut(3, 0, 0) = Complex64::default();
        *s.entry_mut(3, 1, 1) = Complex64::default();
        let err = unitarize(&s).unwrap_err();
        assert!(matches!(err, Error::SingularSample { .. }));
    }
}
