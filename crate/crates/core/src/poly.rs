//! Univariate polynomials with complex coefficients.
//!
//! Small dense polynomials in z, used for Smith reduction of matrix
//! polynomials, root classification relative to the unit circle, and
//! characteristic polynomials of small matrices. Root finding is
//! Durand–Kerner (simultaneous Weierstrass iteration) with exact deflation
//! of z = 0 roots and a Newton polish per root.

use num_complex::Complex64;

/// Dense polynomial Σ c_j z^j; the coefficient list is kept trimmed so that
/// the leading stored coefficient of a nonzero polynomial is nonzero.
#[derive(Clone, PartialEq, Debug)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last() == Some(&Complex64::default()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(Complex64::new(1.0, 0.0))
    }

    pub fn constant(c: Complex64) -> Self {
        Poly::new(vec![c])
    }

    /// The monomial z.
    pub fn z() -> Self {
        Poly::new(vec![Complex64::default(), Complex64::new(1.0, 0.0)])
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut p = Poly::one();
        for &r in roots {
            p = p.mul(&Poly::new(vec![-r, Complex64::new(1.0, 0.0)]));
        }
        p
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coefficient(&self, j: usize) -> Complex64 {
        self.coeffs.get(j).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; zero polynomial reports None.
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or_default()
    }

    /// Largest coefficient modulus.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::default();
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, &c)| c * (i + 1) as f64)
                .collect(),
        )
    }

    pub fn add(&self, rhs: &Poly) -> Poly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new(
            (0..len)
                .map(|i| self.coefficient(i) + rhs.coefficient(i))
                .collect(),
        )
    }

    pub fn sub(&self, rhs: &Poly) -> Poly {
        self.add(&rhs.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, factor: Complex64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&c| c * factor).collect())
    }

    pub fn mul(&self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Complex64::default(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// Multiplication by z^k.
    pub fn shift_up(&self, k: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Complex64::default(); k];
        out.extend_from_slice(&self.coeffs);
        Poly::new(out)
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        self.scale(Complex64::new(1.0, 0.0) / self.leading())
    }

    /// Euclidean division: self = q·rhs + r with deg r < deg rhs.
    pub fn div_rem(&self, rhs: &Poly) -> (Poly, Poly) {
        assert!(!rhs.is_zero(), "division by zero polynomial");
        let db = rhs.coeffs.len() - 1;
        if self.coeffs.len() <= db {
            return (Poly::zero(), self.clone());
        }
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Complex64::default(); self.coeffs.len() - db];
        let lead = rhs.leading();
        for i in (db..rem.len()).rev() {
            let q = rem[i] / lead;
            quot[i - db] = q;
            if q != Complex64::default() {
                for (j, &b) in rhs.coeffs.iter().enumerate() {
                    rem[i - db + j] -= q * b;
                }
            }
            rem[i] = Complex64::default();
        }
        (Poly::new(quot), Poly::new(rem))
    }

    /// Truncates coefficients with modulus at most `tol`.
    pub fn prune(&self, tol: f64) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .map(|&c| if c.norm() <= tol { Complex64::default() } else { c })
                .collect(),
        )
    }

    /// Monic greatest common divisor computed by the Euclidean algorithm with
    /// a relative remainder cutoff.
    pub fn gcd(&self, rhs: &Poly, rel_tol: f64) -> Poly {
        let mut a = self.clone();
        let mut b = rhs.clone();
        if a.is_zero() {
            return b.monic();
        }
        if b.is_zero() {
            return a.monic();
        }
        let scale = a.max_coeff().max(b.max_coeff());
        loop {
            if b.is_zero() || b.max_coeff() <= rel_tol * scale {
                return a.monic();
            }
            let (_, r) = a.div_rem(&b);
            let r = r.prune(rel_tol * scale.max(r.max_coeff() * 1e-3));
            a = b;
            b = r;
        }
    }

    /// All roots with multiplicity (z = 0 roots deflated exactly first).
    ///
    /// Durand–Kerner iteration followed by a Newton polish; accurate to
    /// roughly 1e-12 relative for well-separated roots of the degrees used
    /// here.
    pub fn roots(&self) -> Vec<Complex64> {
        let mut p = self.clone();
        let mut roots = Vec::new();
        if p.is_zero() {
            return roots;
        }
        // exact deflation of zero roots (very common for shifted symbols)
        let scale = p.max_coeff();
        let mut low = 0;
        while low < p.coeffs.len() && p.coeffs[low].norm() <= 1e-14 * scale {
            low += 1;
        }
        if low > 0 && low < p.coeffs.len() {
            roots.extend(std::iter::repeat(Complex64::default()).take(low));
            p = Poly::new(p.coeffs[low..].to_vec());
        }
        let deg = p.coeffs.len() - 1;
        if deg == 0 {
            return roots;
        }
        let monic = p.monic();
        if deg == 1 {
            roots.push(-monic.coeffs[0]);
            return roots;
        }

        // Cauchy bound for initial radius
        let bound = 1.0
            + monic.coeffs[..deg]
                .iter()
                .map(|c| c.norm())
                .fold(0.0, f64::max);
        let radius = bound.min(1e6).max(0.5);
        let mut ws: Vec<Complex64> = (0..deg)
            .map(|i| {
                let angle = std::f64::consts::TAU * (i as f64 / deg as f64) + 0.41;
                Complex64::from_polar(radius * (0.9 + 0.01 * i as f64 / deg as f64), angle)
            })
            .collect();

        for _ in 0..400 {
            let mut delta: f64 = 0.0;
            for i in 0..deg {
                let mut denom = Complex64::new(1.0, 0.0);
                for j in 0..deg {
                    if i != j {
                        denom *= ws[i] - ws[j];
                    }
                }
                if denom.norm() == 0.0 {
                    ws[i] += Complex64::new(1e-8, 1e-8);
                    continue;
                }
                let step = monic.eval(ws[i]) / denom;
                ws[i] -= step;
                delta = delta.max(step.norm());
            }
            if delta < 1e-14 * radius.max(1.0) {
                break;
            }
        }

        // Newton polish against the original (non-deflated) polynomial part
        let dp = monic.derivative();
        for w in ws.iter_mut() {
            for _ in 0..4 {
                let d = dp.eval(*w);
                if d.norm() < 1e-300 {
                    break;
                }
                let step = monic.eval(*w) / d;
                if !step.re.is_finite() || !step.im.is_finite() {
                    break;
                }
                *w -= step;
                if step.norm() < 1e-15 * (1.0 + w.norm()) {
                    break;
                }
            }
        }
        roots.extend(ws);
        roots
    }
}

impl std::fmt::Display for Poly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if *c == Complex64::default() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "({:.4}{:+.4}i)z^{j}", c.re, c.im)?;
            first = false;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn div_rem_reconstructs() {
        let a = Poly::new(vec![c(1.0, 0.0), c(-2.0, 1.0), c(0.0, 0.0), c(3.0, -1.0)]);
        let b = Poly::new(vec![c(0.5, 0.5), c(1.0, 0.0)]);
        let (q, r) = a.div_rem(&b);
        let back = q.mul(&b).add(&r);
        assert!(back.sub(&a).max_coeff() < 1e-12);
        assert!(r.degree().map_or(true, |d| d < 1));
    }

    #[test]
    fn roots_of_planted_polynomial() {
        let planted = [c(0.5, 0.2), c(-1.5, 0.0), c(0.0, 2.0), c(3.0, -1.0)];
        let p = Poly::from_roots(&planted).scale(c(2.0, 1.0));
        let mut roots = p.roots();
        for target in planted {
            let (best, dist) = roots
                .iter()
                .enumerate()
                .map(|(i, r)| (i, (r - target).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            assert!(dist < 1e-9, "root {target} missed by {dist}");
            roots.remove(best);
        }
    }

    #[test]
    fn zero_roots_deflated_exactly() {
        // z^2 (z - 2)
        let p = Poly::from_roots(&[c(2.0, 0.0)]).shift_up(2);
        let roots = p.roots();
        assert_eq!(roots.len(), 3);
        let zeros = roots.iter().filter(|r| r.norm() == 0.0).count();
        assert_eq!(zeros, 2);
    }

    #[test]
    fn gcd_of_products() {
        let g = Poly::from_roots(&[c(1.0, 1.0), c(-0.5, 0.0)]);
        let a = g.mul(&Poly::from_roots(&[c(2.0, 0.0)]));
        let b = g.mul(&Poly::from_roots(&[c(0.0, -3.0)]));
        let d = a.gcd(&b, 1e-10);
        assert_eq!(d.degree(), Some(2));
        assert!(d.sub(&g.monic()).max_coeff() < 1e-9);
    }

    #[test]
    fn gcd_of_coprime_is_constant() {
        let a = Poly::from_roots(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let b = Poly::from_roots(&[c(-1.0, 0.5)]);
        let d = a.gcd(&b, 1e-10);
        assert_eq!(d.degree(), Some(0));
    }
}
