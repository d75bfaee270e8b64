use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::{GradedPolynomial, MultiIndex};

pub type FieldFn = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;

/// Taylor data of a scalar coefficient at a center `x0`: layer `n` holds
/// `d^j c(x0) / j!` for `|j| = n`, in centered coordinates.
///
/// `known_order` is the degree through which the data is valid; `None`
/// means the coefficient *is* this polynomial. An optional callback gives
/// the untruncated field at global points, for residual studies.
#[derive(Clone)]
pub struct CoefficientJet {
    center: Vec<f64>,
    taylor: GradedPolynomial,
    known_order: Option<usize>,
    field: Option<FieldFn>,
}

impl fmt::Debug for CoefficientJet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientJet")
            .field("center", &self.center)
            .field("taylor", &self.taylor)
            .field("known_order", &self.known_order)
            .field("field", &self.field.as_ref().map(|_| "<fn>"))
            .finish()
    }
}

impl CoefficientJet {
    /// A coefficient that equals `poly(x - center)` everywhere.
    pub fn polynomial(center: Vec<f64>, poly: GradedPolynomial) -> Result<Self> {
        if center.len() != poly.dim() {
            return Err(Error::DimensionMismatch { expected: poly.dim(), found: center.len() });
        }
        Ok(CoefficientJet { center, taylor: poly, known_order: None, field: None })
    }

    /// A coefficient given as a polynomial in global coordinates `x`; the
    /// jet is the same polynomial re-expanded about `center`.
    pub fn from_global_polynomial(center: Vec<f64>, global: &GradedPolynomial) -> Result<Self> {
        let taylor = global.recenter(&center)?;
        CoefficientJet::polynomial(center, taylor)
    }

    pub fn constant(center: Vec<f64>, value: Complex64) -> Self {
        let dim = center.len();
        CoefficientJet { center, taylor: GradedPolynomial::constant(dim, value), known_order: None, field: None }
    }

    /// Taylor data valid only through degree `order`.
    pub fn truncated(center: Vec<f64>, taylor: GradedPolynomial, order: usize) -> Result<Self> {
        if center.len() != taylor.dim() {
            return Err(Error::DimensionMismatch { expected: taylor.dim(), found: center.len() });
        }
        if !taylor.is_zero() && taylor.degree() > order {
            return Err(Error::DegreeBound { degree: taylor.degree(), bound: order });
        }
        Ok(CoefficientJet { center, taylor, known_order: Some(order), field: None })
    }

    /// Attaches the untruncated field, evaluated at global points.
    pub fn with_field(mut self, field: FieldFn) -> Self {
        self.field = Some(field);
        self
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn taylor(&self) -> &GradedPolynomial {
        &self.taylor
    }

    pub fn known_order(&self) -> Option<usize> {
        self.known_order
    }

    pub fn is_exact(&self) -> bool {
        self.known_order.is_none()
    }

    /// Value at the center.
    pub fn value(&self) -> Complex64 {
        self.taylor.coeff(&MultiIndex::zero(self.dim()))
    }

    /// `T_q c`, failing when the jet is not known to order `q`.
    pub fn truncate(&self, q: usize) -> Result<GradedPolynomial> {
        if let Some(order) = self.known_order {
            if order < q {
                return Err(Error::InsufficientJet { required: q, available: order });
            }
        }
        Ok(self.taylor.truncate(q))
    }

    /// Untruncated field value at a global point, when available.
    pub fn evaluate_field(&self, x: &[f64]) -> Option<Complex64> {
        if let Some(f) = &self.field {
            return Some(f(x));
        }
        if self.is_exact() && x.len() == self.dim() {
            let local: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
            return self.taylor.evaluate(&local).ok();
        }
        None
    }

    /// Field callback: the attached one, or the exact polynomial.
    pub fn field_fn(&self) -> Option<FieldFn> {
        if let Some(f) = &self.field {
            return Some(f.clone());
        }
        if self.is_exact() {
            let taylor = self.taylor.clone();
            let center = self.center.clone();
            return Some(Arc::new(move |x: &[f64]| {
                let local: Vec<f64> = x.iter().zip(&center).map(|(a, b)| a - b).collect();
                taylor.evaluate(&local).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
            }));
        }
        None
    }
}

/// Principal square root with non-negative real part; on the imaginary
/// axis the root with non-negative imaginary part is taken.
pub fn principal_sqrt(v: Complex64) -> Complex64 {
    let r = v.sqrt();
    if r.re < 0.0 || (r.re == 0.0 && r.im < 0.0) {
        -r
    } else if r.re == 0.0 {
        Complex64::new(0.0, r.im.abs())
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_branch_convention() {
        assert_eq!(principal_sqrt(Complex64::new(4.0, 0.0)), Complex64::new(2.0, 0.0));
        assert_eq!(principal_sqrt(Complex64::new(-4.0, 0.0)), Complex64::new(0.0, 2.0));
        assert_eq!(principal_sqrt(Complex64::new(-4.0, -0.0)), Complex64::new(0.0, 2.0));
        let r = principal_sqrt(Complex64::new(0.0, -2.0));
        assert!(r.re > 0.0 && (r * r - Complex64::new(0.0, -2.0)).norm() < 1e-15);
    }

    #[test]
    fn truncation_guard() {
        let jet = CoefficientJet::truncated(vec![0.0, 0.0], GradedPolynomial::variable(2, 0), 1).unwrap();
        assert!(jet.truncate(1).is_ok());
        assert_eq!(jet.truncate(2), Err(Error::InsufficientJet { required: 2, available: 1 }));
        let exact = CoefficientJet::polynomial(vec![0.0, 0.0], GradedPolynomial::variable(2, 0)).unwrap();
        assert!(exact.truncate(10).is_ok());
    }

    #[test]
    fn global_polynomial_is_recentered() {
        // c(x) = x_1^2 about (1, 0): c = 1 + 2X + X^2
        let global = GradedPolynomial::monomial(MultiIndex::new(vec![2, 0]), Complex64::new(1.0, 0.0));
        let jet = CoefficientJet::from_global_polynomial(vec![1.0, 0.0], &global).unwrap();
        assert_eq!(jet.value(), Complex64::new(1.0, 0.0));
        assert_eq!(jet.taylor().coeff(&MultiIndex::new(vec![1, 0])), Complex64::new(2.0, 0.0));
        assert_eq!(jet.evaluate_field(&[3.0, 5.0]), Some(Complex64::new(9.0, 0.0)));
    }
}
