use std::collections::BTreeMap;

use num_complex::Complex64;

use super::multi_index::{monomials_of_degree, MultiIndex};
use crate::error::{Error, Result};

/// One graded layer: complex coefficients over monomials of a single total
/// degree. Exact zeros are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousPolynomial {
    dim: usize,
    degree: usize,
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl HomogeneousPolynomial {
    pub fn zero(dim: usize, degree: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        HomogeneousPolynomial { dim, degree, coeffs: BTreeMap::new() }
    }

    /// Builds a layer from `(multi-index, coefficient)` pairs; repeated
    /// indices accumulate.
    pub fn from_terms<I>(dim: usize, degree: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        let mut out = HomogeneousPolynomial::zero(dim, degree);
        for (j, c) in terms {
            if j.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: j.dim() });
            }
            if j.degree() != degree {
                return Err(Error::InvalidInput(format!(
                    "monomial {j:?} has degree {} in a degree-{degree} layer",
                    j.degree()
                )));
            }
            out.add_term(j, c);
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, j: &MultiIndex) -> Complex64 {
        self.coeffs.get(j).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.coeffs.iter()
    }

    pub(crate) fn add_term(&mut self, j: MultiIndex, c: Complex64) {
        debug_assert_eq!(j.degree(), self.degree);
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        let entry = self.coeffs.entry(j);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = *o.get() + c;
                if sum == Complex64::new(0.0, 0.0) {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &HomogeneousPolynomial) {
        self.check_compatible(other);
        for (j, c) in &other.coeffs {
            self.add_term(j.clone(), *c);
        }
    }

    pub fn sub_assign(&mut self, other: &HomogeneousPolynomial) {
        self.check_compatible(other);
        for (j, c) in &other.coeffs {
            self.add_term(j.clone(), -*c);
        }
    }

    pub fn scale(&self, s: Complex64) -> HomogeneousPolynomial {
        let mut out = HomogeneousPolynomial::zero(self.dim, self.degree);
        for (j, c) in &self.coeffs {
            out.add_term(j.clone(), c * s);
        }
        out
    }

    /// Coefficient vector over the full graded-lex monomial basis of this
    /// degree (zeros included).
    pub fn dense(&self) -> Vec<Complex64> {
        monomials_of_degree(self.dim, self.degree).iter().map(|j| self.coeff(j)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Keeps only the monomials selected by `keep`.
    pub fn filter<F: Fn(&MultiIndex) -> bool>(&self, keep: F) -> HomogeneousPolynomial {
        HomogeneousPolynomial {
            dim: self.dim,
            degree: self.degree,
            coeffs: self.coeffs.iter().filter(|(j, _)| keep(j)).map(|(j, c)| (j.clone(), *c)).collect(),
        }
    }

    fn check_compatible(&self, other: &HomogeneousPolynomial) {
        assert_eq!(self.dim, other.dim, "dimension mismatch between layers");
        assert_eq!(self.degree, other.degree, "degree mismatch between layers");
    }
}
