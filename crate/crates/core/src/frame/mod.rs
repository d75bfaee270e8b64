//! Graded counterimage construction for split nonlinear operators.
//!
//! A quasi-Trefftz operator `T: A -> B` is handled through a split
//! `T = T* + R` where `A = F + sum_n A_n`, `B = sum_n B_n` (`n = 0..=s`),
//! `A_n` is the homogeneous space of degree `n + gamma`, `B_n` the one of
//! degree `n`, and `F` the polynomials of degree below `gamma`. `T*` is
//! linear and maps `A_n` into `B_n`; `R` only ever lands strictly above the
//! lowest layer it is fed. Solving layer by layer then gives every
//! counterimage.

mod hypotheses;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::{polynomial_dimension, GradedPolynomial, HomogeneousPolynomial, MultiIndex};

pub use hypotheses::{
    verify_split_hypotheses, verify_with_sampler, HypothesisCheck, HypothesisId, HypothesisReport, PolySampler,
    SeededSampler, ZeroSampler, HYPOTHESIS_TOLERANCE, NILPOTENCY_TOLERANCE,
};

pub type PolyMap = Arc<dyn Fn(&GradedPolynomial) -> GradedPolynomial + Send + Sync>;
pub type LayerSolver = Arc<dyn Fn(&HomogeneousPolynomial) -> Result<HomogeneousPolynomial> + Send + Sync>;
pub type FreeBasis = Arc<dyn Fn(usize) -> Vec<MultiIndex> + Send + Sync>;
pub type PhaseGradient = Arc<dyn Fn(&[Complex64]) -> Result<Vec<Complex64>> + Send + Sync>;

/// The data a split operator must register: `T*`, `R`, the right-hand side
/// `y`, the layer solvers `S_n` and the free monomials of each `U_n`.
///
/// `phase_gradient` maps a propagation direction to the linear part of the
/// plane-wave-like phase used to seed basis functions.
#[derive(Clone)]
pub struct OperatorSplit {
    label: String,
    dim: usize,
    degree: usize,
    order: usize,
    principal: PolyMap,
    remainder: PolyMap,
    rhs: GradedPolynomial,
    layer_solver: LayerSolver,
    free_basis: FreeBasis,
    phase_gradient: Option<PhaseGradient>,
}

impl fmt::Debug for OperatorSplit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorSplit")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("degree", &self.degree)
            .field("order", &self.order)
            .field("rhs", &self.rhs)
            .finish_non_exhaustive()
    }
}

impl OperatorSplit {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        label: impl Into<String>,
        dim: usize,
        degree: usize,
        order: usize,
        principal: PolyMap,
        remainder: PolyMap,
        rhs: GradedPolynomial,
        layer_solver: LayerSolver,
        free_basis: FreeBasis,
    ) -> Result<Self> {
        if order == 0 || degree < order {
            return Err(Error::InvalidParameters(format!("degree {degree} must be at least the operator order {order}")));
        }
        if rhs.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: rhs.dim() });
        }
        if !rhs.is_zero() && rhs.degree() > degree - order {
            return Err(Error::DegreeBound { degree: rhs.degree(), bound: degree - order });
        }
        Ok(OperatorSplit {
            label: label.into(),
            dim,
            degree,
            order,
            principal,
            remainder,
            rhs,
            layer_solver,
            free_basis,
            phase_gradient: None,
        })
    }

    pub fn with_phase_gradient(mut self, f: PhaseGradient) -> Self {
        self.phase_gradient = Some(f);
        self
    }

    /// Replaces `R`, keeping everything else.
    pub fn with_remainder(mut self, remainder: PolyMap) -> Self {
        self.remainder = remainder;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Polynomial degree `p` of the phases.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Operator order `gamma`.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Index of the last layer, `s = p - gamma`.
    pub fn top_layer(&self) -> usize {
        self.degree - self.order
    }

    pub fn rhs(&self) -> &GradedPolynomial {
        &self.rhs
    }

    pub fn apply_principal(&self, x: &GradedPolynomial) -> GradedPolynomial {
        (self.principal)(x)
    }

    pub fn apply_remainder(&self, x: &GradedPolynomial) -> GradedPolynomial {
        (self.remainder)(x)
    }

    /// `T(x) = T*(x) + R(x)`.
    pub fn apply(&self, x: &GradedPolynomial) -> GradedPolynomial {
        &self.apply_principal(x) + &self.apply_remainder(x)
    }

    /// `T*` restricted to a single layer of `A`.
    pub fn apply_principal_layer(&self, x: &HomogeneousPolynomial) -> HomogeneousPolynomial {
        let n = x.degree().saturating_sub(self.order);
        let full = GradedPolynomial::from_layers(self.dim, [x.clone()]).expect("layer dimension");
        self.apply_principal(&full).project_layer(n)
    }

    /// `S_n`, mapping `B_n` into `V_n`.
    pub fn solve_layer(&self, b: &HomogeneousPolynomial) -> Result<HomogeneousPolynomial> {
        let q = (self.layer_solver)(b)?;
        if q.degree() != b.degree() + self.order {
            return Err(Error::LayerSolve {
                layer: b.degree(),
                reason: format!("solver returned degree {} instead of {}", q.degree(), b.degree() + self.order),
            });
        }
        Ok(q)
    }

    /// `S*(w) = sum_n S_n(w_n)`.
    pub fn apply_layer_inverse(&self, w: &GradedPolynomial) -> Result<GradedPolynomial> {
        let mut out = GradedPolynomial::zero(self.dim);
        for n in 0..=self.top_layer() {
            let wn = w.project_layer(n);
            if !wn.is_zero() {
                out.add_homogeneous(&self.solve_layer(&wn)?);
            }
        }
        Ok(out)
    }

    /// Monomial basis of `U_n`.
    pub fn free_basis(&self, n: usize) -> Vec<MultiIndex> {
        (self.free_basis)(n)
    }

    /// Linear part of the seed phase for a propagation direction.
    pub fn phase_gradient(&self, direction: &[Complex64]) -> Result<Vec<Complex64>> {
        match &self.phase_gradient {
            Some(f) => f(direction),
            None => Err(Error::InvalidParameters(format!("split '{}' has no phase initialization", self.label))),
        }
    }

    /// `dim F + sum_n dim U_n`.
    pub fn free_parameter_count(&self) -> usize {
        polynomial_dimension(self.dim, self.order - 1)
            + (0..=self.top_layer()).map(|n| self.free_basis(n).len()).sum::<usize>()
    }

    /// `T(x) - y`.
    pub fn residual(&self, x: &GradedPolynomial) -> GradedPolynomial {
        &self.apply(x) - &self.rhs
    }

    /// `||T(x) - y||_inf` relative to the largest of `||y||`, `||T* x||`, `||R x||`.
    pub fn relative_residual(&self, x: &GradedPolynomial) -> f64 {
        let t_star = self.apply_principal(x);
        let r = self.apply_remainder(x);
        let res = &(&t_star + &r) - &self.rhs;
        let scale = self.rhs.max_abs().max(t_star.max_abs()).max(r.max_abs());
        relative(res.max_abs(), scale)
    }
}

pub(crate) fn relative(value: f64, scale: f64) -> f64 {
    if value == 0.0 {
        0.0
    } else if scale > 0.0 {
        value / scale
    } else {
        f64::INFINITY
    }
}

/// The free data of one counterimage: `z` in `F` and `u_n` in each `U_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct FreeParameters {
    pub z: GradedPolynomial,
    pub u: Vec<HomogeneousPolynomial>,
}

impl FreeParameters {
    pub fn zero(split: &OperatorSplit) -> Self {
        FreeParameters { z: GradedPolynomial::zero(split.dim()), u: Vec::new() }
    }

    pub fn with_z(z: GradedPolynomial) -> Self {
        FreeParameters { z, u: Vec::new() }
    }

    /// Checks the shape against a split. Missing trailing `u_n` count as zero.
    pub fn validate(&self, split: &OperatorSplit) -> Result<()> {
        if self.z.dim() != split.dim() {
            return Err(Error::DimensionMismatch { expected: split.dim(), found: self.z.dim() });
        }
        if !self.z.is_zero() && self.z.degree() >= split.order() {
            return Err(Error::InvalidParameters(format!(
                "z has degree {} but F only holds degrees below {}",
                self.z.degree(),
                split.order()
            )));
        }
        if self.u.len() > split.top_layer() + 1 {
            return Err(Error::InvalidParameters(format!("{} free layers given, split has {}", self.u.len(), split.top_layer() + 1)));
        }
        for (n, un) in self.u.iter().enumerate() {
            if un.dim() != split.dim() {
                return Err(Error::DimensionMismatch { expected: split.dim(), found: un.dim() });
            }
            if un.is_zero() {
                continue;
            }
            if un.degree() != n + split.order() {
                return Err(Error::InvalidParameters(format!("u_{n} has degree {} instead of {}", un.degree(), n + split.order())));
            }
            let basis = split.free_basis(n);
            if let Some((j, _)) = un.terms().find(|(j, _)| !basis.contains(j)) {
                return Err(Error::InvalidParameters(format!("u_{n} uses monomial {j:?} outside U_{n}")));
            }
        }
        Ok(())
    }

    fn layer(&self, split: &OperatorSplit, n: usize) -> HomogeneousPolynomial {
        self.u
            .get(n)
            .filter(|u| !u.is_zero())
            .cloned()
            .unwrap_or_else(|| HomogeneousPolynomial::zero(split.dim(), n + split.order()))
    }
}

/// Builds `x = z + sum_k x_k` with `T(x) = y`, one layer at a time:
///
/// `x_k = u_k + S_k(y_k - proj_k R(z + x_0 + ... + x_{k-1}) - T*(u_k))`.
pub fn construct_counterimage(
    split: &OperatorSplit,
    y: &GradedPolynomial,
    params: &FreeParameters,
) -> Result<GradedPolynomial> {
    if y.dim() != split.dim() {
        return Err(Error::DimensionMismatch { expected: split.dim(), found: y.dim() });
    }
    if !y.is_zero() && y.degree() > split.top_layer() {
        return Err(Error::DegreeBound { degree: y.degree(), bound: split.top_layer() });
    }
    params.validate(split)?;

    let mut x = params.z.clone();
    for k in 0..=split.top_layer() {
        let uk = params.layer(split, k);
        let mut rhs = y.project_layer(k);
        rhs.sub_assign(&split.apply_remainder(&x).project_layer(k));
        rhs.sub_assign(&split.apply_principal_layer(&uk));
        let mut xk = split.solve_layer(&rhs)?;
        xk.add_assign(&uk);
        x.add_homogeneous(&xk);
    }
    Ok(x)
}

/// Right inverse `S = S* o sum_{k=0}^{s} (-R o S*)^k`.
///
/// `R` is nonlinear, so the series is evaluated in nested form:
/// `w_0 = y`, `w_{j+1} = y - R(S* w_j)`, returning `S*(w_s)`. For a linear
/// `R` this is exactly the partial sum above. Termination after `s` steps
/// follows from `(R o S*)^{s+1} = 0`.
pub fn neumann_right_inverse(split: &OperatorSplit, y: &GradedPolynomial) -> Result<GradedPolynomial> {
    if y.dim() != split.dim() {
        return Err(Error::DimensionMismatch { expected: split.dim(), found: y.dim() });
    }
    if !y.is_zero() && y.degree() > split.top_layer() {
        return Err(Error::DegreeBound { degree: y.degree(), bound: split.top_layer() });
    }
    let mut w = y.clone();
    for _ in 0..split.top_layer() {
        let r = split.apply_remainder(&split.apply_layer_inverse(&w)?);
        w = y - &r.truncate(split.top_layer());
    }
    split.apply_layer_inverse(&w)
}
