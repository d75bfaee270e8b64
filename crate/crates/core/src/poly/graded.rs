use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::homogeneous::HomogeneousPolynomial;
use super::multi_index::{factorial, monomials_up_to, MultiIndex};
use crate::error::{Error, Result};

/// A polynomial in centered coordinates `X = x - x0`, stored as its unique
/// decomposition into homogeneous layers. `layers[n]` has degree `n`;
/// trailing zero layers are trimmed so equal polynomials compare equal.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedPolynomial {
    dim: usize,
    layers: Vec<HomogeneousPolynomial>,
}

impl GradedPolynomial {
    pub fn zero(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        GradedPolynomial { dim, layers: Vec::new() }
    }

    pub fn constant(dim: usize, c: Complex64) -> Self {
        GradedPolynomial::monomial(MultiIndex::zero(dim), c)
    }

    /// The coordinate polynomial `X_axis`.
    pub fn variable(dim: usize, axis: usize) -> Self {
        GradedPolynomial::monomial(MultiIndex::axis(dim, axis, 1), Complex64::new(1.0, 0.0))
    }

    pub fn monomial(j: MultiIndex, c: Complex64) -> Self {
        let mut p = GradedPolynomial::zero(j.dim());
        p.add_term(j, c);
        p
    }

    /// Linear form `sum_i a_i X_i`.
    pub fn linear(coeffs: &[Complex64]) -> Self {
        let dim = coeffs.len();
        let mut p = GradedPolynomial::zero(dim);
        for (axis, c) in coeffs.iter().enumerate() {
            p.add_term(MultiIndex::axis(dim, axis, 1), *c);
        }
        p
    }

    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        let mut p = GradedPolynomial::zero(dim);
        for (j, c) in terms {
            if j.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: j.dim() });
            }
            p.add_term(j, c);
        }
        Ok(p)
    }

    /// Reassembles a polynomial from homogeneous pieces of any degrees.
    pub fn from_layers<I>(dim: usize, layers: I) -> Result<Self>
    where
        I: IntoIterator<Item = HomogeneousPolynomial>,
    {
        let mut p = GradedPolynomial::zero(dim);
        for layer in layers {
            if layer.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: layer.dim() });
            }
            p.add_homogeneous(&layer);
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Highest degree with a nonzero layer; 0 for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.layers.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn layers(&self) -> &[HomogeneousPolynomial] {
        &self.layers
    }

    /// The projection onto the homogeneous layer of degree `n`.
    pub fn project_layer(&self, n: usize) -> HomogeneousPolynomial {
        self.layers.get(n).cloned().unwrap_or_else(|| HomogeneousPolynomial::zero(self.dim, n))
    }

    /// Lowest degree carrying a nonzero coefficient.
    pub fn min_degree(&self) -> Option<usize> {
        self.layers.iter().position(|l| !l.is_zero())
    }

    pub fn coeff(&self, j: &MultiIndex) -> Complex64 {
        self.layers.get(j.degree()).map(|l| l.coeff(j)).unwrap_or_default()
    }

    /// All nonzero terms in graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.layers.iter().flat_map(|l| l.terms())
    }

    pub fn num_terms(&self) -> usize {
        self.layers.iter().map(|l| l.len()).sum()
    }

    pub fn add_term(&mut self, j: MultiIndex, c: Complex64) {
        assert_eq!(j.dim(), self.dim, "dimension mismatch");
        let n = j.degree();
        self.ensure_layer(n);
        self.layers[n].add_term(j, c);
        self.trim();
    }

    pub fn add_homogeneous(&mut self, layer: &HomogeneousPolynomial) {
        assert_eq!(layer.dim(), self.dim, "dimension mismatch");
        if layer.is_zero() {
            return;
        }
        self.ensure_layer(layer.degree());
        self.layers[layer.degree()].add_assign(layer);
        self.trim();
    }

    fn ensure_layer(&mut self, n: usize) {
        while self.layers.len() <= n {
            let d = self.layers.len();
            self.layers.push(HomogeneousPolynomial::zero(self.dim, d));
        }
    }

    fn trim(&mut self) {
        while self.layers.last().is_some_and(|l| l.is_zero()) {
            self.layers.pop();
        }
    }

    fn check_dim(&self, other: &GradedPolynomial) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &GradedPolynomial) -> Result<GradedPolynomial> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for layer in &other.layers {
            out.add_homogeneous(layer);
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &GradedPolynomial) -> Result<GradedPolynomial> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for layer in &other.layers {
            out.add_homogeneous(&layer.scale(Complex64::new(-1.0, 0.0)));
        }
        Ok(out)
    }

    pub fn scale(&self, s: Complex64) -> GradedPolynomial {
        let mut out = GradedPolynomial::zero(self.dim);
        for layer in &self.layers {
            out.add_homogeneous(&layer.scale(s));
        }
        out
    }

    pub fn scale_real(&self, s: f64) -> GradedPolynomial {
        self.scale(Complex64::new(s, 0.0))
    }

    /// Exact product restricted to layers of degree `<= bound`.
    pub fn mul_truncated(&self, other: &GradedPolynomial, bound: usize) -> Result<GradedPolynomial> {
        self.check_dim(other)?;
        Ok(self.product(other, Some(bound)))
    }

    /// Untruncated product.
    pub fn checked_mul(&self, other: &GradedPolynomial) -> Result<GradedPolynomial> {
        self.check_dim(other)?;
        Ok(self.product(other, None))
    }

    fn product(&self, other: &GradedPolynomial, bound: Option<usize>) -> GradedPolynomial {
        let top = self.layers.len() + other.layers.len();
        let top = match bound {
            Some(b) => top.min(b + 1),
            None => top,
        };
        let mut acc: Vec<HomogeneousPolynomial> =
            (0..top).map(|n| HomogeneousPolynomial::zero(self.dim, n)).collect();
        for a in &self.layers {
            for b in &other.layers {
                let n = a.degree() + b.degree();
                if n >= top || a.is_zero() || b.is_zero() {
                    continue;
                }
                for (ja, ca) in a.terms() {
                    for (jb, cb) in b.terms() {
                        acc[n].add_term(ja.add(jb), ca * cb);
                    }
                }
            }
        }
        let mut out = GradedPolynomial { dim: self.dim, layers: acc };
        out.trim();
        out
    }

    /// Taylor truncation `T_q`: keeps layers `0..=q`.
    pub fn truncate(&self, q: usize) -> GradedPolynomial {
        let mut out = GradedPolynomial { dim: self.dim, layers: self.layers.iter().take(q + 1).cloned().collect() };
        out.trim();
        out
    }

    /// Mixed partial derivative `d^j`.
    pub fn derive(&self, j: &MultiIndex) -> GradedPolynomial {
        assert_eq!(j.dim(), self.dim, "dimension mismatch");
        let mut out = GradedPolynomial::zero(self.dim);
        for (e, c) in self.terms() {
            if let Some(rest) = e.checked_sub(j) {
                let factor: f64 = e
                    .components()
                    .iter()
                    .zip(j.components())
                    .map(|(&ei, &ji)| factorial(ei) / factorial(ei - ji))
                    .product();
                out.add_term(rest, c * factor);
            }
        }
        out
    }

    pub fn partial(&self, axis: usize) -> GradedPolynomial {
        self.derive(&MultiIndex::axis(self.dim, axis, 1))
    }

    pub fn gradient(&self) -> Vec<GradedPolynomial> {
        (0..self.dim).map(|i| self.partial(i)).collect()
    }

    pub fn laplacian(&self) -> GradedPolynomial {
        let mut out = GradedPolynomial::zero(self.dim);
        for i in 0..self.dim {
            let d2 = self.derive(&MultiIndex::axis(self.dim, i, 2));
            for layer in &d2.layers {
                out.add_homogeneous(layer);
            }
        }
        out
    }

    /// Evaluation at a point of the centered coordinates.
    pub fn evaluate(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.len() });
        }
        let deg = self.degree();
        let powers: Vec<Vec<f64>> = x
            .iter()
            .map(|&xi| {
                let mut p = Vec::with_capacity(deg + 1);
                let mut v = 1.0;
                for _ in 0..=deg {
                    p.push(v);
                    v *= xi;
                }
                p
            })
            .collect();
        let mut sum = Complex64::new(0.0, 0.0);
        for (j, c) in self.terms() {
            let m: f64 = j.components().iter().enumerate().map(|(i, &e)| powers[i][e as usize]).product();
            sum += c * m;
        }
        Ok(sum)
    }

    /// Truncated exponential `T_q exp(P)`.
    pub fn exp_truncated(&self, q: usize) -> GradedPolynomial {
        let c0 = self.coeff(&MultiIndex::zero(self.dim));
        let mut shifted = self.clone();
        shifted.add_term(MultiIndex::zero(self.dim), -c0);
        let one = Complex64::new(1.0, 0.0);
        let mut power = GradedPolynomial::constant(self.dim, one);
        let mut sum = power.clone();
        for m in 1..=q {
            power = power.product(&shifted, Some(q)).scale_real(1.0 / m as f64);
            if power.is_zero() {
                break;
            }
            sum = &sum + &power;
        }
        sum.scale(c0.exp())
    }

    /// Re-expands `P` about a shifted center: returns `Q(X) = P(X + shift)`.
    pub fn recenter(&self, shift: &[f64]) -> Result<GradedPolynomial> {
        if shift.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: shift.len() });
        }
        let one = Complex64::new(1.0, 0.0);
        let factors: Vec<GradedPolynomial> = shift
            .iter()
            .enumerate()
            .map(|(i, &s)| &GradedPolynomial::variable(self.dim, i) + &GradedPolynomial::constant(self.dim, Complex64::new(s, 0.0)))
            .collect();
        let mut out = GradedPolynomial::zero(self.dim);
        for (j, c) in self.terms() {
            let mut term = GradedPolynomial::constant(self.dim, one);
            for (i, &e) in j.components().iter().enumerate() {
                for _ in 0..e {
                    term = term.product(&factors[i], None);
                }
            }
            out = &out + &term.scale(*c);
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.layers.iter().map(|l| l.max_abs()).fold(0.0, f64::max)
    }

    /// Largest coefficient-wise difference `max_j |a_j - b_j|`.
    pub fn max_abs_diff(&self, other: &GradedPolynomial) -> f64 {
        (self - other).max_abs()
    }

    /// Coefficients over all monomials of degree `<= p` in graded-lex order.
    pub fn dense(&self, p: usize) -> Vec<Complex64> {
        monomials_up_to(self.dim, p).iter().map(|j| self.coeff(j)).collect()
    }

    /// Sum of `|c_j| |x|^{|j|}`, the natural scale for evaluation error.
    pub fn evaluation_scale(&self, x: &[f64]) -> f64 {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.terms().map(|(j, c)| c.norm() * r.powi(j.degree() as i32)).sum()
    }
}

impl Add for &GradedPolynomial {
    type Output = GradedPolynomial;

    /// Panics on dimension mismatch; see [`GradedPolynomial::checked_add`].
    fn add(self, rhs: &GradedPolynomial) -> GradedPolynomial {
        self.checked_add(rhs).expect("polynomial addition")
    }
}

impl Sub for &GradedPolynomial {
    type Output = GradedPolynomial;

    fn sub(self, rhs: &GradedPolynomial) -> GradedPolynomial {
        self.checked_sub(rhs).expect("polynomial subtraction")
    }
}

impl Mul for &GradedPolynomial {
    type Output = GradedPolynomial;

    fn mul(self, rhs: &GradedPolynomial) -> GradedPolynomial {
        self.checked_mul(rhs).expect("polynomial multiplication")
    }
}

impl Neg for &GradedPolynomial {
    type Output = GradedPolynomial;

    fn neg(self) -> GradedPolynomial {
        self.scale_real(-1.0)
    }
}
