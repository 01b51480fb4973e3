//! Character exponents on the k-torus.
//!
//! A character of T^k is x ↦ e^{2πi j·x} with j ∈ Z^k. The exponents are
//! ordered lexicographically, which turns Z^k into a linearly ordered group
//! and fixes the plus/minus splitting used throughout the crate.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

/// Exponent of a character on T^k: an element of Z^k under lexicographic order.
///
/// The derived `Ord` on the underlying vector is exactly the lexicographic
/// order as long as both sides have the same length; all arithmetic asserts
/// matching dimensions.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct MultiIndex(Vec<i32>);

impl MultiIndex {
    pub fn new(entries: Vec<i32>) -> Self {
        MultiIndex(entries)
    }

    /// The zero exponent (constant character) in dimension `dim`.
    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    /// The standard basis exponent e_axis in dimension `dim`.
    pub fn unit(dim: usize, axis: usize) -> Self {
        assert!(axis < dim, "axis {axis} out of range for dimension {dim}");
        let mut e = vec![0; dim];
        e[axis] = 1;
        MultiIndex(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[i32] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Lexicographic sign: where this exponent sits relative to zero.
    pub fn lex_sign(&self) -> Ordering {
        for &e in &self.0 {
            match e.cmp(&0) {
                Ordering::Equal => continue,
                other => return other,
            }
        }
        Ordering::Equal
    }

    /// Value of the pairing j·x for a point x of [0,1)^k.
    pub fn dot(&self, x: &[f64]) -> f64 {
        assert_eq!(self.0.len(), x.len(), "point dimension mismatch");
        self.0.iter().zip(x).map(|(&j, &xi)| j as f64 * xi).sum()
    }
}

impl Add for &MultiIndex {
    type Output = MultiIndex;
    fn add(self, rhs: &MultiIndex) -> MultiIndex {
        assert_eq!(self.0.len(), rhs.0.len(), "index dimension mismatch");
        MultiIndex(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &MultiIndex {
    type Output = MultiIndex;
    fn sub(self, rhs: &MultiIndex) -> MultiIndex {
        assert_eq!(self.0.len(), rhs.0.len(), "index dimension mismatch");
        MultiIndex(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &MultiIndex {
    type Output = MultiIndex;
    fn neg(self) -> MultiIndex {
        MultiIndex(self.0.iter().map(|a| -a).collect())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<i32>> for MultiIndex {
    fn from(entries: Vec<i32>) -> Self {
        MultiIndex(entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lex_order_is_first_difference() {
        let a = MultiIndex::new(vec![-1, 5]);
        let b = MultiIndex::new(vec![0, -3]);
        let c = MultiIndex::new(vec![2, 0]);
        assert!(a < b && b < c);
        assert_eq!(a.lex_sign(), Ordering::Less);
        assert_eq!(b.lex_sign(), Ordering::Less);
        assert_eq!(c.lex_sign(), Ordering::Greater);
        assert_eq!(MultiIndex::zero(2).lex_sign(), Ordering::Equal);
    }

    #[test]
    fn group_arithmetic() {
        let a = MultiIndex::new(vec![1, -2, 3]);
        let b = MultiIndex::new(vec![0, 4, -1]);
        assert_eq!(&a + &b, MultiIndex::new(vec![1, 2, 2]));
        assert_eq!(&a - &a, MultiIndex::zero(3));
        assert_eq!(-&a, MultiIndex::new(vec![-1, 2, -3]));
    }
}
