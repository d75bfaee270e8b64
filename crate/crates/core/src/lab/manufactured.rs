use num_complex::Complex64;
use rand::Rng;

use crate::error::Result;
use crate::poly::{monomials_up_to, GradedPolynomial};

/// `u = exp(g)` and `kappa^2 = -(Delta g + grad g . grad g)`, so that
/// `Delta u + kappa^2 u = 0` everywhere. Both are in global coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct ManufacturedHelmholtz {
    g: GradedPolynomial,
    kappa2: GradedPolynomial,
}

impl ManufacturedHelmholtz {
    pub fn g(&self) -> &GradedPolynomial {
        &self.g
    }

    pub fn kappa2(&self) -> &GradedPolynomial {
        &self.kappa2
    }

    pub fn solution(&self, x: &[f64]) -> Result<Complex64> {
        Ok(self.g.evaluate(x)?.exp())
    }
}

pub fn manufactured_helmholtz(g: &GradedPolynomial) -> ManufacturedHelmholtz {
    let mut kappa2 = g.laplacian();
    for d in g.gradient() {
        kappa2 = &kappa2 + &d.checked_mul(&d).expect("same dimension");
    }
    ManufacturedHelmholtz { g: g.clone(), kappa2: -&kappa2 }
}

/// Real polynomial `kappa0^2 + sum_{1 <= |j| <= degree} c_j X^j` with
/// `c_j` uniform in `[-1, 1] * kappa0^2 / (2 |j|!)`.
pub fn random_kappa2<R: Rng>(rng: &mut R, dim: usize, degree: usize, kappa0_sq: f64) -> GradedPolynomial {
    let mut out = GradedPolynomial::constant(dim, Complex64::new(kappa0_sq, 0.0));
    for j in monomials_up_to(dim, degree).into_iter().filter(|j| j.degree() > 0) {
        let scale = kappa0_sq / (2.0 * crate::poly::factorial_f64(j.degree() as u32));
        out.add_term(j, Complex64::new(rng.gen_range(-1.0..1.0) * scale, 0.0));
    }
    out
}

/// Phase `g = i kappa d . x + i sum_{2 <= |j| <= degree} c_j x^j` with a
/// random unit `d` and real `c_j` uniform in `[-amplitude, amplitude]`.
/// The resulting `kappa^2` is real.
pub fn random_phase<R: Rng>(rng: &mut R, dim: usize, degree: usize, kappa: f64, amplitude: f64) -> GradedPolynomial {
    let mut d: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let n = d.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-3);
    d.iter_mut().for_each(|v| *v /= n);
    let mut g = GradedPolynomial::linear(&d.iter().map(|v| Complex64::new(0.0, kappa * v)).collect::<Vec<_>>());
    for j in monomials_up_to(dim, degree).into_iter().filter(|j| j.degree() >= 2) {
        g.add_term(j, Complex64::new(0.0, rng.gen_range(-amplitude..amplitude)));
    }
    g
}
