use std::sync::Arc;

use num_complex::Complex64;

use super::jet::{principal_sqrt, CoefficientJet};
use crate::error::{Error, Result};
use crate::frame::OperatorSplit;
use crate::layer::Order2PrincipalPart;
use crate::poly::GradedPolynomial;

/// `T_q |grad P|^2`, with the complex bilinear square `sum_i (d_i P)^2`.
pub fn gradient_square(p: &GradedPolynomial, q: usize) -> GradedPolynomial {
    let mut out = GradedPolynomial::zero(p.dim());
    for g in p.gradient() {
        out = &out + &g.mul_truncated(&g, q).expect("same dimension");
    }
    out
}

/// `T_q N(P) = Delta P + T_q |grad P|^2 + T_q kappa^2`, where
/// `L e^P = N(P) e^P` for `L = Delta + kappa^2`.
pub fn helmholtz_apply_n(p: &GradedPolynomial, kappa2: &GradedPolynomial, q: usize) -> Result<GradedPolynomial> {
    if p.dim() != kappa2.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: kappa2.dim() });
    }
    if !p.is_zero() && p.degree() > q + 2 {
        return Err(Error::DegreeBound { degree: p.degree(), bound: q + 2 });
    }
    let lap = p.laplacian();
    Ok(&(&lap + &gradient_square(p, q)) + &kappa2.truncate(q))
}

/// Split of the Helmholtz quasi-Trefftz operator:
/// `T*(P) = Delta P`, `R(P) = T_{p-2} |grad P|^2`, `y = -T_{p-2} kappa^2`.
#[derive(Clone, Debug)]
pub struct HelmholtzSplit {
    kappa2: CoefficientJet,
    degree: usize,
    rhs: GradedPolynomial,
    part: Order2PrincipalPart,
}

impl HelmholtzSplit {
    pub fn new(kappa2: CoefficientJet, degree: usize) -> Result<Self> {
        if degree < 2 {
            return Err(Error::InvalidParameters(format!("Helmholtz phases need degree >= 2, got {degree}")));
        }
        let rhs = -&kappa2.truncate(degree - 2)?;
        let part = Order2PrincipalPart::laplacian(kappa2.dim());
        Ok(HelmholtzSplit { kappa2, degree, rhs, part })
    }

    pub fn dim(&self) -> usize {
        self.kappa2.dim()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn kappa2(&self) -> &CoefficientJet {
        &self.kappa2
    }

    /// `kappa0 = sqrt(kappa^2(x0))` on the principal branch.
    pub fn kappa0(&self) -> Complex64 {
        principal_sqrt(self.kappa2.value())
    }

    pub fn rhs(&self) -> &GradedPolynomial {
        &self.rhs
    }

    pub fn apply_principal(&self, p: &GradedPolynomial) -> GradedPolynomial {
        p.laplacian()
    }

    pub fn apply_remainder(&self, p: &GradedPolynomial) -> GradedPolynomial {
        gradient_square(p, self.degree - 2)
    }

    pub fn to_split(&self) -> OperatorSplit {
        let q = self.degree - 2;
        let part = Arc::new(self.part.clone());
        let solver_part = part.clone();
        let kappa0 = self.kappa0();
        OperatorSplit::new(
            "helmholtz",
            self.dim(),
            self.degree,
            2,
            Arc::new(|p: &GradedPolynomial| p.laplacian()),
            Arc::new(move |p: &GradedPolynomial| gradient_square(p, q)),
            self.rhs.clone(),
            Arc::new(move |b| solver_part.solve_layer(b)),
            Arc::new(move |n| part.split_layer(n).free),
        )
        .expect("validated in HelmholtzSplit::new")
        .with_phase_gradient(Arc::new(move |d: &[Complex64]| {
            Ok(d.iter().map(|di| Complex64::i() * kappa0 * di).collect())
        }))
    }
}

/// Helmholtz split for a `kappa^2` jet, phase degree `p` and dimension `d`.
pub fn make_helmholtz_split(kappa2: CoefficientJet, p: usize, d: usize) -> Result<OperatorSplit> {
    if kappa2.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: kappa2.dim() });
    }
    Ok(HelmholtzSplit::new(kappa2, p)?.to_split())
}
