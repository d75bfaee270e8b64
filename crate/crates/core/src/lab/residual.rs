use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use super::fit::{adjacent_slopes, log_log_slope, sphere_points, validate_radii, StudyMeta, SLOPE_BAND};
use crate::basis::GpwFunction;
use crate::error::{Error, Result};
use crate::frame::OperatorSplit;
use crate::operators::FieldFn;
use crate::poly::GradedPolynomial;

/// `T*(P) + R(P) - y`.
pub fn qt_residual(split: &OperatorSplit, p: &GradedPolynomial) -> Result<GradedPolynomial> {
    if p.dim() != split.dim() {
        return Err(Error::DimensionMismatch { expected: split.dim(), found: p.dim() });
    }
    if !p.is_zero() && p.degree() > split.degree() {
        return Err(Error::DegreeBound { degree: p.degree(), bound: split.degree() });
    }
    Ok(split.residual(p))
}

/// A variable-coefficient wave operator evaluated pointwise in global
/// coordinates, with fields given as true functions rather than jets.
#[derive(Clone)]
pub enum PointOperator {
    /// `L u = Delta u + kappa^2(x) u`.
    Helmholtz { kappa2: FieldFn },
    /// `L u = div(rho (grad u - (M . grad u) M + i kappa u M)) + rho (kappa^2 u + i kappa M . grad u)`
    /// with polynomial `rho` and `M`.
    Convected { rho: GradedPolynomial, mach: Vec<GradedPolynomial>, kappa: Complex64 },
}

impl std::fmt::Debug for PointOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PointOperator::Helmholtz { .. } => f.write_str("PointOperator::Helmholtz"),
            PointOperator::Convected { rho, mach, kappa } => {
                f.debug_struct("PointOperator::Convected").field("rho", rho).field("mach", mach).field("kappa", kappa).finish()
            }
        }
    }
}

impl PointOperator {
    pub fn helmholtz_polynomial(kappa2: GradedPolynomial) -> Self {
        PointOperator::Helmholtz { kappa2: Arc::new(move |x| kappa2.evaluate(x).unwrap_or(Complex64::new(f64::NAN, f64::NAN))) }
    }

    /// `(L e^P) / e^P` as a polynomial in global coordinates, for a
    /// polynomial-coefficient operator and a global phase `P`.
    fn convected_factor(rho: &GradedPolynomial, mach: &[GradedPolynomial], kappa: Complex64, phase: &GradedPolynomial) -> Result<GradedPolynomial> {
        let dim = phase.dim();
        let v = phase.gradient();
        let ik = Complex64::i() * kappa;
        let mut m_dot_v = GradedPolynomial::zero(dim);
        for (m, vi) in mach.iter().zip(&v) {
            m_dot_v = &m_dot_v + &m.checked_mul(vi)?;
        }
        // e^{-P} div(F e^P) = div F + F . v, with F = rho (v - (M.v) M + i kappa M)
        let mut out = GradedPolynomial::zero(dim);
        for i in 0..dim {
            let inner = &(&v[i] - &m_dot_v.checked_mul(&mach[i])?) + &mach[i].scale(ik);
            let flux = rho.checked_mul(&inner)?;
            out = &out + &flux.partial(i);
            out = &out + &flux.checked_mul(&v[i])?;
        }
        let source = &GradedPolynomial::constant(dim, kappa * kappa) + &m_dot_v.scale(ik);
        Ok(&out + &rho.checked_mul(&source)?)
    }

    /// `L phi` at `x`, using exact derivatives of the polynomial phase.
    pub fn apply_exact(&self, phi: &GpwFunction, x: &[f64]) -> Result<Complex64> {
        let local: Vec<f64> = x.iter().zip(phi.x0()).map(|(a, b)| a - b).collect();
        let value = phi.evaluate(x)?;
        match self {
            PointOperator::Helmholtz { kappa2 } => {
                let p = phi.phase();
                let mut factor = p.laplacian().evaluate(&local)?;
                for g in p.gradient() {
                    let gi = g.evaluate(&local)?;
                    factor += gi * gi;
                }
                Ok((factor + kappa2(x)) * value)
            }
            PointOperator::Convected { rho, mach, kappa } => {
                let shift: Vec<f64> = phi.x0().iter().map(|v| -v).collect();
                let global = phi.phase().recenter(&shift)?;
                Ok(Self::convected_factor(rho, mach, *kappa, &global)?.evaluate(x)? * value)
            }
        }
    }

    /// `L u` at `x` by second-order central differences with step `step`.
    pub fn apply_fd(&self, u: &dyn Fn(&[f64]) -> Result<Complex64>, x: &[f64], step: f64) -> Result<Complex64> {
        let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        if !(step > 1e-7 * scale) {
            return Err(Error::InvalidParameters(format!("finite-difference step {step:e} underflows at |x| = {scale:e}")));
        }
        let dim = x.len();
        let shifted = |y: &[f64], i: usize, s: f64| {
            let mut z = y.to_vec();
            z[i] += s;
            z
        };
        let grad = |y: &[f64]| -> Result<Vec<Complex64>> {
            (0..dim).map(|i| Ok((u(&shifted(y, i, step))? - u(&shifted(y, i, -step))?) / (2.0 * step))).collect()
        };
        let u0 = u(x)?;
        match self {
            PointOperator::Helmholtz { kappa2 } => {
                let mut lap = Complex64::new(0.0, 0.0);
                for i in 0..dim {
                    lap += (u(&shifted(x, i, step))? + u(&shifted(x, i, -step))? - u0 * 2.0) / (step * step);
                }
                Ok(lap + kappa2(x) * u0)
            }
            PointOperator::Convected { rho, mach, kappa } => {
                let ik = Complex64::i() * *kappa;
                let flux = |y: &[f64], i: usize| -> Result<Complex64> {
                    let g = grad(y)?;
                    let m: Vec<Complex64> = mach.iter().map(|m| m.evaluate(y)).collect::<Result<_>>()?;
                    let mg: Complex64 = m.iter().zip(&g).map(|(a, b)| a * b).sum();
                    Ok(rho.evaluate(y)? * (g[i] - mg * m[i] + ik * u(y)? * m[i]))
                };
                let mut div = Complex64::new(0.0, 0.0);
                for i in 0..dim {
                    div += (flux(&shifted(x, i, step), i)? - flux(&shifted(x, i, -step), i)?) / (2.0 * step);
                }
                let g = grad(x)?;
                let mg: Complex64 = mach.iter().zip(&g).map(|(m, gi)| Ok(m.evaluate(x)? * gi)).sum::<Result<Complex64>>()?;
                Ok(div + rho.evaluate(x)? * (kappa * kappa * u0 + ik * mg))
            }
        }
    }
}

/// `kappa^2(x) = (omega / c)^2 (1 - omega_p^2(x) / omega^2)` with
/// `omega_p^2 = omega^2 x_1 / x_cut`, i.e. a cut-off at `x_1 = x_cut`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OModePreset {
    pub omega: f64,
    pub c: f64,
    pub x_cut: f64,
}

impl Default for OModePreset {
    fn default() -> Self {
        OModePreset { omega: 5.0, c: 1.0, x_cut: 1.0 }
    }
}

impl OModePreset {
    pub fn validate(&self) -> Result<()> {
        let ok = [self.omega, self.c, self.x_cut].iter().all(|v| v.is_finite() && *v != 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameters("O-mode parameters must be finite and nonzero".into()))
        }
    }

    /// Global `kappa^2` polynomial.
    pub fn kappa2(&self, dim: usize) -> GradedPolynomial {
        let k2 = (self.omega / self.c).powi(2);
        let mut p = GradedPolynomial::constant(dim, Complex64::new(k2, 0.0));
        p.add_term(crate::poly::MultiIndex::axis(dim, 0, 1), Complex64::new(-k2 / self.x_cut, 0.0));
        p
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualOrderReport {
    pub meta: StudyMeta,
    pub hs: Vec<f64>,
    /// `max |L phi|` on the sphere of each radius.
    pub residuals: Vec<f64>,
    pub adjacent_slopes: Vec<f64>,
    pub slope: Option<f64>,
    pub target: f64,
    pub exact: bool,
    pub accepted: bool,
}

impl ResidualOrderReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,residual,slope\n");
        for (i, (h, r)) in self.hs.iter().zip(&self.residuals).enumerate() {
            let slope = if i == 0 { String::new() } else { format!("{:.16e}", self.adjacent_slopes[i - 1]) };
            writeln!(out, "{h:.16e},{r:.16e},{slope}").expect("string write");
        }
        out
    }
}

/// How `L` is applied in a residual-order study.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Differentiation {
    Exact,
    /// Central differences with step `h * 1e-3`.
    FiniteDifference,
}

/// Points on each sphere of a residual-order study.
pub const SPHERE_SAMPLES: usize = 64;

/// Residuals at or below this are treated as exact zeros.
pub const RESIDUAL_FLOOR: f64 = 1e-12;

/// `max |L phi|` on spheres of decreasing radius about `x0`, with the
/// acceptance slope `p - 1 - 0.25`.
pub fn residual_order_study(
    phi: &GpwFunction,
    op: &PointOperator,
    hs: &[f64],
    mode: Differentiation,
    meta: StudyMeta,
) -> Result<ResidualOrderReport> {
    validate_radii(hs)?;
    let mut residuals = Vec::with_capacity(hs.len());
    for &h in hs {
        let mut worst: f64 = 0.0;
        for x in sphere_points(phi.x0(), h, SPHERE_SAMPLES) {
            let r = match mode {
                Differentiation::Exact => op.apply_exact(phi, &x)?,
                Differentiation::FiniteDifference => op.apply_fd(&|y| phi.evaluate(y), &x, h * 1e-3)?,
            };
            worst = worst.max(r.norm());
        }
        residuals.push(worst);
    }
    let target = phi.degree() as f64 - 1.0 - SLOPE_BAND;
    let exact = residuals.iter().all(|&r| r <= RESIDUAL_FLOOR);
    let (slope, adjacent) = if exact {
        (None, vec![f64::NAN; hs.len() - 1])
    } else {
        (Some(log_log_slope(hs, &residuals)), adjacent_slopes(hs, &residuals))
    };
    Ok(ResidualOrderReport {
        meta,
        hs: hs.to_vec(),
        residuals,
        adjacent_slopes: adjacent,
        accepted: exact || slope.is_some_and(|s| s >= target),
        slope,
        target,
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_gpw, directions_2d, Direction};
    use crate::lab::{manufactured_helmholtz, random_phase};
    use crate::operators::{helmholtz_apply_n, make_convected_split, make_helmholtz_split, CoefficientJet};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    const HS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

    #[test]
    fn residual_of_built_gpws_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for p in 2..=6 {
            let kappa2 = crate::lab::random_kappa2(&mut rng, 2, p, 9.0);
            let split = make_helmholtz_split(CoefficientJet::polynomial(vec![0.0; 2], kappa2.clone()).unwrap(), p, 2).unwrap();
            let phi = build_gpw(&split, &directions_2d(3)[1], &[0.0, 0.0]).unwrap();
            let r = qt_residual(&split, phi.phase()).unwrap();
            // independent route through the substituted operator
            let n = helmholtz_apply_n(phi.phase(), &kappa2, p - 2).unwrap();
            assert!(r.max_abs() <= 1e-11 * kappa2.max_abs());
            assert!(n.max_abs() <= 1e-11 * kappa2.max_abs());
        }
    }

    #[test]
    fn residual_of_zero_phase_is_kappa_squared() {
        let split = make_helmholtz_split(CoefficientJet::constant(vec![0.0; 2], c(7.0)), 3, 2).unwrap();
        let r = qt_residual(&split, &GradedPolynomial::zero(2)).unwrap();
        assert_eq!(r, GradedPolynomial::constant(2, c(7.0)));
        let plane = GradedPolynomial::linear(&[Complex64::i() * 7f64.sqrt() * 0.6, Complex64::i() * 7f64.sqrt() * 0.8]);
        assert!(qt_residual(&split, &plane).unwrap().max_abs() < 1e-14);
        let cubic = GradedPolynomial::monomial(crate::poly::MultiIndex::new(vec![4, 0]), c(1.0));
        assert!(qt_residual(&split, &cubic).is_err());
    }

    #[test]
    fn plane_wave_has_zero_pointwise_residual() {
        let x0 = [0.3, 0.4];
        let phi = GpwFunction::plane_wave(&x0, c(3.0), &Direction::real(&[1.0, 2.0]).unwrap(), 2).unwrap();
        let op = PointOperator::helmholtz_polynomial(GradedPolynomial::constant(2, c(9.0)));
        let r = residual_order_study(&phi, &op, &HS, Differentiation::Exact, StudyMeta::default()).unwrap();
        assert!(r.exact && r.accepted, "{r:?}");
    }

    #[test]
    fn omode_residual_order() {
        let preset = OModePreset::default();
        let x0 = [0.4, -0.1];
        let kappa2 = preset.kappa2(2);
        let op = PointOperator::helmholtz_polynomial(kappa2.clone());
        for p in [3, 4] {
            let split = make_helmholtz_split(CoefficientJet::from_global_polynomial(x0.to_vec(), &kappa2).unwrap(), p, 2).unwrap();
            for d in directions_2d(4) {
                let phi = build_gpw(&split, &d, &x0).unwrap();
                let r = residual_order_study(&phi, &op, &HS, Differentiation::Exact, StudyMeta::default()).unwrap();
                assert!(r.accepted, "p={p}: {r:?}");
            }
        }
    }

    #[test]
    fn manufactured_residual_order_by_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x0 = [0.1, 0.2];
        let m = manufactured_helmholtz(&random_phase(&mut rng, 2, 3, 2.0, 0.4));
        let op = PointOperator::helmholtz_polynomial(m.kappa2().clone());
        let split = make_helmholtz_split(CoefficientJet::from_global_polynomial(x0.to_vec(), m.kappa2()).unwrap(), 3, 2).unwrap();
        let phi = build_gpw(&split, &directions_2d(5)[2], &x0).unwrap();
        let exact = residual_order_study(&phi, &op, &HS, Differentiation::Exact, StudyMeta::default()).unwrap();
        let fd = residual_order_study(&phi, &op, &HS, Differentiation::FiniteDifference, StudyMeta::default()).unwrap();
        assert!(exact.accepted && fd.accepted, "{exact:?} {fd:?}");
        for (a, b) in exact.residuals.iter().zip(&fd.residuals) {
            assert!((a - b).abs() <= 1e-2 * a, "{a} {b}");
        }
    }

    #[test]
    fn fd_step_guard() {
        let op = PointOperator::helmholtz_polynomial(GradedPolynomial::constant(2, c(1.0)));
        assert!(op.apply_fd(&|_| Ok(c(1.0)), &[1.0, 1.0], 1e-9).is_err());
    }

    #[test]
    fn convected_constant_plane_waves_solve_the_full_operator() {
        let x0 = [0.0, 0.0];
        let (rho0, m) = (1.2, [0.4, 0.25]);
        let rho = CoefficientJet::constant(x0.to_vec(), c(rho0));
        let mach = [CoefficientJet::constant(x0.to_vec(), c(m[0])), CoefficientJet::constant(x0.to_vec(), c(m[1]))];
        let kappa = c(4.0);
        let split = make_convected_split(&rho, &mach, kappa, 4, 2).unwrap();
        let op = PointOperator::Convected {
            rho: GradedPolynomial::constant(2, c(rho0)),
            mach: m.iter().map(|&v| GradedPolynomial::constant(2, c(v))).collect(),
            kappa,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in directions_2d(6) {
            let phi = build_gpw(&split, &d, &x0).unwrap();
            for _ in 0..20 {
                use rand::Rng;
                let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                assert!(op.apply_exact(&phi, &x).unwrap().norm() <= 1e-12);
                assert!(op.apply_fd(&|y| phi.evaluate(y), &x, 1e-3).unwrap().norm() <= 1e-3);
            }
        }
    }

    #[test]
    fn convected_variable_residual_order() {
        let x0 = [0.1, 0.0];
        let rho_g = GradedPolynomial::from_terms(2, [
            (crate::poly::MultiIndex::new(vec![0, 0]), c(1.0)),
            (crate::poly::MultiIndex::new(vec![1, 0]), c(0.3)),
            (crate::poly::MultiIndex::new(vec![0, 2]), c(-0.2)),
        ])
        .unwrap();
        let m1 = GradedPolynomial::from_terms(2, [
            (crate::poly::MultiIndex::new(vec![0, 0]), c(0.3)),
            (crate::poly::MultiIndex::new(vec![0, 1]), c(0.1)),
        ])
        .unwrap();
        let m2 = GradedPolynomial::from_terms(2, [
            (crate::poly::MultiIndex::new(vec![0, 0]), c(-0.1)),
            (crate::poly::MultiIndex::new(vec![1, 1]), c(0.2)),
        ])
        .unwrap();
        let kappa = c(3.0);
        let rho = CoefficientJet::from_global_polynomial(x0.to_vec(), &rho_g).unwrap();
        let mach = [
            CoefficientJet::from_global_polynomial(x0.to_vec(), &m1).unwrap(),
            CoefficientJet::from_global_polynomial(x0.to_vec(), &m2).unwrap(),
        ];
        let op = PointOperator::Convected { rho: rho_g, mach: vec![m1, m2], kappa };
        for p in [3, 4] {
            let split = make_convected_split(&rho, &mach, kappa, p, 2).unwrap();
            let phi = build_gpw(&split, &directions_2d(3)[1], &x0).unwrap();
            let r = residual_order_study(&phi, &op, &HS, Differentiation::Exact, StudyMeta::default()).unwrap();
            assert!(r.accepted, "p={p}: {r:?}");
        }
    }
}
