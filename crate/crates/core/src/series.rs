//! Finitely supported Fourier series on T^k.
//!
//! A scalar series is a finite map j ↦ a_j representing the trigonometric
//! polynomial a(x) = Σ a_j e^{2πi j·x}. Products are exact coefficient
//! convolutions, so the ℓ¹ (Wiener) norm is submultiplicative by
//! construction. Matrix series are n×n arrays of scalar series sharing the
//! same torus dimension.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::index::MultiIndex;

/// Trigonometric polynomial on T^k with complex coefficients.
///
/// Invariants: every stored exponent has length `dim` and no stored
/// coefficient is exactly zero.
#[derive(Clone, PartialEq, Debug)]
pub struct ScalarSeries {
    dim: usize,
    terms: BTreeMap<MultiIndex, Complex64>,
}

/// Splitting of a series along the lexicographic order of its spectrum.
///
/// `minus + zero + plus` reproduces the input coefficient-exactly; the
/// spectra of the outer parts lie strictly inside the open cones.
#[derive(Clone, Debug)]
pub struct LexSplit {
    pub minus: ScalarSeries,
    pub zero: Complex64,
    pub plus: ScalarSeries,
}

impl ScalarSeries {
    pub fn zero(dim: usize) -> Self {
        ScalarSeries {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, value: Complex64) -> Self {
        let mut s = Self::zero(dim);
        s.add_term(MultiIndex::zero(dim), value);
        s
    }

    /// The character e^{2πi j·x}.
    pub fn character(j: MultiIndex) -> Self {
        let mut s = Self::zero(j.dim());
        s.add_term(j, Complex64::new(1.0, 0.0));
        s
    }

    pub fn from_terms<I>(dim: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        let mut s = Self::zero(dim);
        for (j, c) in terms {
            s.add_term(j, c);
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, j: &MultiIndex) -> Complex64 {
        self.terms.get(j).copied().unwrap_or_default()
    }

    /// Adds `value` to the coefficient at `j`, dropping exact zeros.
    pub fn add_term(&mut self, j: MultiIndex, value: Complex64) {
        assert_eq!(j.dim(), self.dim, "index dimension mismatch");
        if value == Complex64::default() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(j) {
            Entry::Vacant(e) => {
                e.insert(value);
            }
            Entry::Occupied(mut e) => {
                let sum = *e.get() + value;
                if sum == Complex64::default() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    /// Bohr-Fourier spectrum: the set of exponents with nonzero coefficient.
    pub fn spectrum(&self) -> BTreeSet<MultiIndex> {
        self.terms.keys().cloned().collect()
    }

    /// Wiener norm Σ_j |a_j|.
    pub fn wiener_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    /// Largest |j_i| over the spectrum, per axis.
    pub fn degree(&self) -> Vec<i32> {
        let mut deg = vec![0; self.dim];
        for j in self.terms.keys() {
            for (d, &e) in deg.iter_mut().zip(j.entries()) {
                *d = (*d).max(e.abs());
            }
        }
        deg
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -*c;
        }
        out
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        if factor == Complex64::default() {
            return Self::zero(self.dim);
        }
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= factor;
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "series dimension mismatch");
        let mut out = self.clone();
        for (j, c) in &rhs.terms {
            out.add_term(j.clone(), *c);
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    /// Exact coefficient convolution.
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "series dimension mismatch");
        let mut out = Self::zero(self.dim);
        for (ja, ca) in &self.terms {
            for (jb, cb) in &rhs.terms {
                out.add_term(ja + jb, ca * cb);
            }
        }
        out
    }

    /// Series of the complex conjugate function: coefficients conjugated,
    /// exponents negated.
    pub fn conj(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for (j, c) in &self.terms {
            out.add_term(-j, c.conj());
        }
        out
    }

    /// Multiplication by the character with exponent `j`.
    pub fn shift(&self, j: &MultiIndex) -> Self {
        assert_eq!(j.dim(), self.dim, "index dimension mismatch");
        let mut out = Self::zero(self.dim);
        for (k, c) in &self.terms {
            out.add_term(k + j, *c);
        }
        out
    }

    /// Drops coefficients with modulus at most `tol`.
    pub fn prune(&self, tol: f64) -> Self {
        let mut out = Self::zero(self.dim);
        for (j, c) in &self.terms {
            if c.norm() > tol {
                out.add_term(j.clone(), *c);
            }
        }
        out
    }

    /// Direct evaluation at a single point of [0,1)^k.
    pub fn eval_at(&self, x: &[f64]) -> Complex64 {
        assert_eq!(x.len(), self.dim, "point dimension mismatch");
        let mut acc = Complex64::default();
        for (j, c) in &self.terms {
            let phase = TAU * j.dot(x);
            acc += c * Complex64::new(phase.cos(), phase.sin());
        }
        acc
    }

    /// Lexicographic splitting into strictly negative, zero and strictly
    /// positive parts of the spectrum.
    pub fn split_pm(&self) -> LexSplit {
        let mut minus = Self::zero(self.dim);
        let mut plus = Self::zero(self.dim);
        let mut zero = Complex64::default();
        for (j, c) in &self.terms {
            match j.lex_sign() {
                Ordering::Less => minus.add_term(j.clone(), *c),
                Ordering::Equal => zero = *c,
                Ordering::Greater => plus.add_term(j.clone(), *c),
            }
        }
        LexSplit { minus, zero, plus }
    }

    /// True if the spectrum lies in the closed nonnegative lex cone.
    pub fn is_plus(&self) -> bool {
        self.terms.keys().all(|j| j.lex_sign() != Ordering::Less)
    }

    /// True if the spectrum lies in the closed nonpositive lex cone.
    pub fn is_minus(&self) -> bool {
        self.terms.keys().all(|j| j.lex_sign() != Ordering::Greater)
    }
}

impl LexSplit {
    /// Reassembles the original series.
    pub fn total(&self) -> ScalarSeries {
        let mut s = self.minus.add(&self.plus);
        s.add_term(MultiIndex::zero(s.dim()), self.zero);
        s
    }
}

/// n×n matrix of scalar series on a common torus.
#[derive(Clone, PartialEq, Debug)]
pub struct MatrixSeries {
    n: usize,
    dim: usize,
    entries: Vec<ScalarSeries>, // row-major
}

impl MatrixSeries {
    pub fn zero(n: usize, dim: usize) -> Self {
        MatrixSeries {
            n,
            dim,
            entries: vec![ScalarSeries::zero(dim); n * n],
        }
    }

    pub fn identity(n: usize, dim: usize) -> Self {
        let mut m = Self::zero(n, dim);
        for i in 0..n {
            *m.entry_mut(i, i) = ScalarSeries::constant(dim, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_entries(n: usize, dim: usize, entries: Vec<ScalarSeries>) -> Self {
        assert_eq!(entries.len(), n * n, "entry count mismatch");
        assert!(
            entries.iter().all(|e| e.dim() == dim),
            "series dimension mismatch"
        );
        MatrixSeries { n, dim, entries }
    }

    /// 1×1 wrapper around a scalar series.
    pub fn from_scalar(s: ScalarSeries) -> Self {
        let dim = s.dim();
        MatrixSeries {
            n: 1,
            dim,
            entries: vec![s],
        }
    }

    /// Diagonal matrix from scalar series.
    pub fn from_diagonal(diag: &[ScalarSeries]) -> Self {
        let n = diag.len();
        assert!(n > 0, "empty diagonal");
        let dim = diag[0].dim();
        let mut m = Self::zero(n, dim);
        for (i, d) in diag.iter().enumerate() {
            *m.entry_mut(i, i) = d.clone();
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> &ScalarSeries {
        &self.entries[row * self.n + col]
    }

    pub fn entry_mut(&mut self, row: usize, col: usize) -> &mut ScalarSeries {
        &mut self.entries[row * self.n + col]
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n, "matrix size mismatch");
        assert_eq!(self.dim, rhs.dim, "series dimension mismatch");
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a.add(b))
            .collect();
        MatrixSeries {
            n: self.n,
            dim: self.dim,
            entries,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let entries = self.entries.iter().map(|e| e.scale(factor)).collect();
        MatrixSeries {
            n: self.n,
            dim: self.dim,
            entries,
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n, "matrix size mismatch");
        assert_eq!(self.dim, rhs.dim, "series dimension mismatch");
        let mut out = Self::zero(self.n, self.dim);
        for r in 0..self.n {
            for c in 0..self.n {
                let mut acc = ScalarSeries::zero(self.dim);
                for k in 0..self.n {
                    acc = acc.add(&self.entry(r, k).mul(rhs.entry(k, c)));
                }
                *out.entry_mut(r, c) = acc;
            }
        }
        out
    }

    /// Series of the pointwise conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.n, self.dim);
        for r in 0..self.n {
            for c in 0..self.n {
                *out.entry_mut(r, c) = self.entry(c, r).conj();
            }
        }
        out
    }

    /// Multiplication of every entry by the character with exponent `j`.
    pub fn shift(&self, j: &MultiIndex) -> Self {
        let entries = self.entries.iter().map(|e| e.shift(j)).collect();
        MatrixSeries {
            n: self.n,
            dim: self.dim,
            entries,
        }
    }

    pub fn prune(&self, tol: f64) -> Self {
        let entries = self.entries.iter().map(|e| e.prune(tol)).collect();
        MatrixSeries {
            n: self.n,
            dim: self.dim,
            entries,
        }
    }

    /// Exact determinant by cofactor expansion along the first row.
    pub fn det_series(&self) -> ScalarSeries {
        match self.n {
            1 => self.entry(0, 0).clone(),
            _ => {
                let mut acc = ScalarSeries::zero(self.dim);
                for c in 0..self.n {
                    let minor = self.minor(0, c).det_series();
                    let term = self.entry(0, c).mul(&minor);
                    if c % 2 == 0 {
                        acc = acc.add(&term);
                    } else {
                        acc = acc.sub(&term);
                    }
                }
                acc
            }
        }
    }

    fn minor(&self, row: usize, col: usize) -> MatrixSeries {
        let mut entries = Vec::with_capacity((self.n - 1) * (self.n - 1));
        for r in 0..self.n {
            if r == row {
                continue;
            }
            for c in 0..self.n {
                if c == col {
                    continue;
                }
                entries.push(self.entry(r, c).clone());
            }
        }
        MatrixSeries {
            n: self.n - 1,
            dim: self.dim,
            entries,
        }
    }

    /// Union of the entry spectra.
    pub fn spectrum(&self) -> BTreeSet<MultiIndex> {
        let mut s = BTreeSet::new();
        for e in &self.entries {
            s.extend(e.spectrum());
        }
        s
    }

    /// Wiener norm of the matrix: the maximum of the entry norms.
    pub fn wiener_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.wiener_norm())
            .fold(0.0, f64::max)
    }

    pub fn degree(&self) -> Vec<i32> {
        let mut deg = vec![0; self.dim];
        for e in &self.entries {
            for (d, g) in deg.iter_mut().zip(e.degree()) {
                *d = (*d).max(g);
            }
        }
        deg
    }

    /// True if every entry spectrum lies in the closed nonnegative cone.
    pub fn is_plus(&self) -> bool {
        self.entries.iter().all(ScalarSeries::is_plus)
    }

    /// True if every entry spectrum lies in the closed nonpositive cone.
    pub fn is_minus(&self) -> bool {
        self.entries.iter().all(ScalarSeries::is_minus)
    }

    /// Direct evaluation at a single point, as a dense matrix.
    pub fn eval_at(&self, x: &[f64]) -> nalgebra::DMatrix<Complex64> {
        nalgebra::DMatrix::from_fn(self.n, self.n, |r, c| self.entry(r, c).eval_at(x))
    }
}
