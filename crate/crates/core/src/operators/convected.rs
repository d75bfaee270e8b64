use std::sync::Arc;

use num_complex::Complex64;

use super::jet::CoefficientJet;
use crate::error::{Error, Result};
use crate::frame::OperatorSplit;
use crate::layer::Order2PrincipalPart;
use crate::poly::{GradedPolynomial, MultiIndex};

fn mach_norm(mach0: &[Complex64]) -> f64 {
    mach0.iter().map(|m| m.norm_sqr()).sum::<f64>().sqrt()
}

/// `T* P = rho0 Delta P - rho0 M0^T Hess(P) M0`.
///
/// Only supersonic flows (`|M0| > 1`) are rejected here; the sonic case is a
/// valid algebraic identity even though no split exists for it.
pub fn convected_apply_tstar(p: &GradedPolynomial, rho0: Complex64, mach0: &[Complex64]) -> Result<GradedPolynomial> {
    if mach0.len() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: mach0.len() });
    }
    let m = mach_norm(mach0);
    if m > 1.0 {
        return Err(Error::Supersonic(m));
    }
    if rho0 == Complex64::new(0.0, 0.0) {
        return Err(Error::ZeroDensity);
    }
    let dim = p.dim();
    let mut out = p.laplacian();
    for i in 0..dim {
        for j in 0..dim {
            let hij = p.derive(&MultiIndex::axis(dim, i, 1).add(&MultiIndex::axis(dim, j, 1)));
            out = &out - &hij.scale(mach0[i] * mach0[j]);
        }
    }
    Ok(out.scale(rho0))
}

/// Scalar factor multiplying `M . grad P` in the convected operator:
/// `div(rho M) - 2 i kappa rho`, truncated to degree `q`.
///
/// `div(rho M)` is the scalar divergence. Reading it as a Jacobian would only
/// change this function.
fn advection_factor(rho: &GradedPolynomial, mach: &[GradedPolynomial], kappa: Complex64, q: usize) -> GradedPolynomial {
    let mut div = GradedPolynomial::zero(rho.dim());
    for (i, m) in mach.iter().enumerate() {
        let flux = rho.mul_truncated(m, q + 1).expect("same dimension");
        div = &div + &flux.partial(i);
    }
    &div.truncate(q) - &rho.scale(Complex64::new(0.0, 2.0) * kappa).truncate(q)
}

/// Split of the convected Helmholtz quasi-Trefftz operator for
/// `div(rho (grad u - (M . grad u) M + i kappa u M)) + rho (kappa^2 u + i kappa M . grad u) = 0`.
///
/// After substituting `u = e^P`, the truncated operator is
/// `T(P) = T_q[ b . grad P + sum_ij A_ij (d_ij P + d_i P d_j P) ]` with
/// `A = rho (I - M M^T)` and the drift `b` assembled term by term from the
/// expanded flux. `T*` freezes `A` at `x0`, `R = T - T*`, and
/// `y = -T_q[i kappa div(rho M) + rho kappa^2]`.
#[derive(Clone, Debug)]
pub struct ConvectedSplit {
    dim: usize,
    degree: usize,
    kappa: Complex64,
    rho0: Complex64,
    mach0: Vec<Complex64>,
    diffusion: Vec<Vec<GradedPolynomial>>,
    drift: Vec<GradedPolynomial>,
    rhs: GradedPolynomial,
    part: Order2PrincipalPart,
}

impl ConvectedSplit {
    /// `rho` and `mach` must be known to degree `p - 1`: the operator
    /// differentiates them once before truncating at `p - 2`.
    pub fn new(rho: &CoefficientJet, mach: &[CoefficientJet], kappa: Complex64, degree: usize) -> Result<Self> {
        let dim = rho.dim();
        if degree < 2 {
            return Err(Error::InvalidParameters(format!("convected phases need degree >= 2, got {degree}")));
        }
        if mach.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: mach.len() });
        }
        if let Some(m) = mach.iter().find(|m| m.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: m.dim() });
        }
        if !kappa.re.is_finite() || !kappa.im.is_finite() {
            return Err(Error::InvalidParameters("wavenumber must be finite".into()));
        }
        let q = degree - 2;
        let rho_t = rho.truncate(q + 1)?;
        let mach_t: Vec<GradedPolynomial> = mach.iter().map(|m| m.truncate(q + 1)).collect::<Result<_>>()?;
        let rho0 = rho.value();
        let mach0: Vec<Complex64> = mach.iter().map(|m| m.value()).collect();
        if rho0 == Complex64::new(0.0, 0.0) {
            return Err(Error::ZeroDensity);
        }
        let m = mach_norm(&mach0);
        if m >= 1.0 {
            return Err(Error::Supersonic(m));
        }
        let part = Order2PrincipalPart::convected(rho0, &mach0)?;

        let rho_q = rho_t.truncate(q);
        let mul = |a: &GradedPolynomial, b: &GradedPolynomial| a.mul_truncated(b, q).expect("same dimension");

        let mut diffusion = vec![vec![GradedPolynomial::zero(dim); dim]; dim];
        for i in 0..dim {
            for j in 0..dim {
                let mm = mul(&mach_t[i], &mach_t[j]);
                let mut a = -&mul(&rho_q, &mm);
                if i == j {
                    a = &a + &rho_q;
                }
                diffusion[i][j] = a;
            }
        }

        let advection = advection_factor(&rho_t, &mach_t, kappa, q);
        let drift = (0..dim)
            .map(|l| {
                // grad rho
                let mut b = rho_t.partial(l).truncate(q);
                // - rho ((M . grad) M)_l
                let mut convective = GradedPolynomial::zero(dim);
                for i in 0..dim {
                    convective = &convective + &mul(&mach_t[i], &mach_t[l].partial(i));
                }
                b = &b - &mul(&rho_q, &convective);
                // - (div(rho M) - 2 i kappa rho) M_l
                &b - &mul(&advection, &mach_t[l])
            })
            .collect();

        let mut div_flux = GradedPolynomial::zero(dim);
        for (i, m) in mach_t.iter().enumerate() {
            div_flux = &div_flux + &rho_t.mul_truncated(m, q + 1)?.partial(i);
        }
        let source = &div_flux.truncate(q).scale(Complex64::i() * kappa) + &rho_q.scale(kappa * kappa);
        let rhs = -&source;

        Ok(ConvectedSplit { dim, degree, kappa, rho0, mach0, diffusion, drift, rhs, part })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn kappa(&self) -> Complex64 {
        self.kappa
    }

    pub fn rho0(&self) -> Complex64 {
        self.rho0
    }

    pub fn mach0(&self) -> &[Complex64] {
        &self.mach0
    }

    pub fn rhs(&self) -> &GradedPolynomial {
        &self.rhs
    }

    /// Full truncated operator `T(P)`.
    pub fn apply(&self, p: &GradedPolynomial) -> GradedPolynomial {
        let q = self.degree - 2;
        let dim = self.dim;
        let grad = p.gradient();
        let mut out = GradedPolynomial::zero(dim);
        for (b, g) in self.drift.iter().zip(&grad) {
            out = &out + &b.mul_truncated(g, q).expect("dim");
        }
        for i in 0..dim {
            for j in 0..dim {
                let second = &grad[i].partial(j) + &grad[i].mul_truncated(&grad[j], q).expect("dim");
                out = &out + &self.diffusion[i][j].mul_truncated(&second, q).expect("dim");
            }
        }
        out
    }

    pub fn apply_principal(&self, p: &GradedPolynomial) -> GradedPolynomial {
        self.part.apply(p)
    }

    pub fn apply_remainder(&self, p: &GradedPolynomial) -> GradedPolynomial {
        &self.apply(p) - &self.apply_principal(p)
    }

    /// Wavenumber `k` such that `exp(i k d . x)` solves the frozen
    /// constant-coefficient equation: `k = kappa / (1 + M0 . d)`.
    pub fn dispersion_root(&self, direction: &[Complex64]) -> Result<Complex64> {
        dispersion_root(self.kappa, &self.mach0, direction)
    }

    pub fn to_split(&self) -> OperatorSplit {
        let this = Arc::new(self.clone());
        let (a, b, c, d, e) = (this.clone(), this.clone(), this.clone(), this.clone(), this.clone());
        OperatorSplit::new(
            "convected_helmholtz",
            self.dim,
            self.degree,
            2,
            Arc::new(move |p: &GradedPolynomial| a.apply_principal(p)),
            Arc::new(move |p: &GradedPolynomial| b.apply_remainder(p)),
            self.rhs.clone(),
            Arc::new(move |rhs| c.part.solve_layer(rhs)),
            Arc::new(move |n| d.part.split_layer(n).free),
        )
        .expect("validated in ConvectedSplit::new")
        .with_phase_gradient(Arc::new(move |dir: &[Complex64]| {
            let k = e.dispersion_root(dir)?;
            Ok(dir.iter().map(|di| Complex64::i() * k * di).collect())
        }))
    }
}

/// Root of `-k^2 (1 - m^2) - 2 kappa k m + kappa^2 = 0` with `m = M0 . d`
/// that tends to `kappa` as the flow vanishes.
pub fn dispersion_root(kappa: Complex64, mach0: &[Complex64], direction: &[Complex64]) -> Result<Complex64> {
    if mach0.len() != direction.len() {
        return Err(Error::DimensionMismatch { expected: mach0.len(), found: direction.len() });
    }
    let m: Complex64 = mach0.iter().zip(direction).map(|(a, b)| a * b).sum();
    let denom = Complex64::new(1.0, 0.0) + m;
    if denom.norm() == 0.0 {
        return Err(Error::InvalidParameters("direction is sonic for this flow".into()));
    }
    Ok(kappa / denom)
}

/// Convected split for density and Mach-number jets.
pub fn make_convected_split(rho: &CoefficientJet, mach: &[CoefficientJet], kappa: Complex64, p: usize, d: usize) -> Result<OperatorSplit> {
    if rho.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: rho.dim() });
    }
    Ok(ConvectedSplit::new(rho, mach, kappa, p)?.to_split())
}
