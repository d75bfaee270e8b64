use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::basis::GpwFunction;
use crate::error::{Error, Result};

/// Singular values below this fraction of the largest are dropped in fits.
pub const FIT_TRUNCATION: f64 = 1e-12;

/// Slack below the theoretical order still accepted by slope checks.
pub const SLOPE_BAND: f64 = 0.25;

/// Errors below this fraction of the sampled `|u|` are at the rounding floor.
pub const EXACT_FLOOR: f64 = 1e-11;

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;
// Inverse plastic number, second axis of the 2D Kronecker sequence.
const PLASTIC_INV: f64 = 0.754_877_666_246_693;

/// Sample counts per family member.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SamplingConfig {
    pub boundary_per_member: usize,
    pub interior_per_member: usize,
    pub evaluation_factor: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig { boundary_per_member: 4, interior_per_member: 2, evaluation_factor: 10 }
    }
}

/// `count` quasi-uniform points on the sphere of radius `r` about `x0`.
pub fn sphere_points(x0: &[f64], r: f64, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|i| {
            let unit = match x0.len() {
                2 => {
                    let t = std::f64::consts::TAU * (i as f64 + 0.5) / count as f64;
                    vec![t.cos(), t.sin()]
                }
                _ => {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                    let s = (1.0 - z * z).max(0.0).sqrt();
                    let a = GOLDEN_ANGLE * i as f64;
                    vec![s * a.cos(), s * a.sin(), z]
                }
            };
            x0.iter().zip(unit).map(|(c, u)| c + r * u).collect()
        })
        .collect()
}

/// `count` quasi-uniform points in the open ball of radius `r` about `x0`.
pub fn ball_points(x0: &[f64], r: f64, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|i| {
            let t = (i as f64 + 0.5) / count as f64;
            let unit = match x0.len() {
                2 => {
                    let a = GOLDEN_ANGLE * i as f64;
                    let rr = t.sqrt();
                    vec![rr * a.cos(), rr * a.sin()]
                }
                _ => {
                    let z = 1.0 - 2.0 * ((i as f64 + 0.5) * PLASTIC_INV).fract();
                    let s = (1.0 - z * z).max(0.0).sqrt();
                    let a = GOLDEN_ANGLE * i as f64;
                    let rr = t.cbrt();
                    vec![rr * s * a.cos(), rr * s * a.sin(), rr * z]
                }
            };
            x0.iter().zip(unit).map(|(c, u)| c + r * u).collect()
        })
        .collect()
}

fn sample_set(x0: &[f64], h: f64, boundary: usize, interior: usize) -> Vec<Vec<f64>> {
    let mut pts = sphere_points(x0, h, boundary);
    pts.extend(ball_points(x0, h, interior));
    pts
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitReport {
    pub h: f64,
    /// `max |u - sum c_l phi_l|` over the evaluation set.
    pub error: f64,
    /// Root-mean-square residual on the fit set.
    pub fit_rms: f64,
    /// `max |u|` over the evaluation set.
    pub scale: f64,
    pub rank: usize,
    pub members: usize,
    pub rank_deficient: bool,
    pub fit_points: usize,
    pub evaluation_points: usize,
}

/// Least-squares fit of `u` by the family on the ball of radius `h`.
///
/// Columns are normalized before a truncated SVD solve; the discarded
/// directions are reported through `rank` and `rank_deficient`.
pub fn best_approx_error(
    u: &dyn Fn(&[f64]) -> Result<Complex64>,
    family: &[GpwFunction],
    x0: &[f64],
    h: f64,
    config: &SamplingConfig,
) -> Result<FitReport> {
    if family.is_empty() {
        return Err(Error::InvalidInput("empty family".into()));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameters(format!("radius must be positive, got {h}")));
    }
    if !matches!(x0.len(), 2 | 3) {
        return Err(Error::InvalidParameters(format!("sampling is defined for d = 2 or 3, got {}", x0.len())));
    }
    let n = family.len();
    let fit = sample_set(x0, h, config.boundary_per_member * n, config.interior_per_member * n);
    let f = config.evaluation_factor.max(1);
    let eval = sample_set(x0, h, f * config.boundary_per_member * n, f * config.interior_per_member * n);
    let mut report = fit_on_points(u, family, &fit, &eval)?;
    report.h = h;
    Ok(report)
}

/// Least-squares fit on explicit point sets. `h` is left at zero.
pub fn fit_on_points(
    u: &dyn Fn(&[f64]) -> Result<Complex64>,
    family: &[GpwFunction],
    fit: &[Vec<f64>],
    eval: &[Vec<f64>],
) -> Result<FitReport> {
    let n = family.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty family".into()));
    }
    if fit.len() < n {
        return Err(Error::DegenerateSampling(format!("{} fit points for {n} members", fit.len())));
    }
    let mut a = DMatrix::<Complex64>::zeros(fit.len(), n);
    for (i, x) in fit.iter().enumerate() {
        for (j, phi) in family.iter().enumerate() {
            a[(i, j)] = phi.evaluate(x)?;
        }
    }
    let b = DVector::from_iterator(fit.len(), fit.iter().map(|x| u(x)).collect::<Result<Vec<_>>>()?);
    let norms: Vec<f64> = (0..n).map(|j| a.column(j).norm()).collect();
    if norms.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return Err(Error::DegenerateSampling("family member vanishes or overflows on the sample set".into()));
    }
    for (j, s) in norms.iter().enumerate() {
        a.column_mut(j).scale_mut(1.0 / s);
    }
    let a_scaled = a.clone();
    let svd = a.svd(true, true);
    let sigma_max = svd.singular_values.max();
    let eps = FIT_TRUNCATION * sigma_max;
    let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
    let c = svd.solve(&b, eps).map_err(|e| Error::DegenerateSampling(e.to_string()))?;
    let coeffs: Vec<Complex64> = c.iter().zip(&norms).map(|(c, s)| c / s).collect();
    let fit_rms = (&a_scaled * &c - &b).norm() / (fit.len() as f64).sqrt();

    let mut error: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for x in eval {
        let target = u(x)?;
        let mut approx = Complex64::new(0.0, 0.0);
        for (phi, c) in family.iter().zip(&coeffs) {
            approx += c * phi.evaluate(x)?;
        }
        error = error.max((target - approx).norm());
        scale = scale.max(target.norm());
    }
    Ok(FitReport {
        h: 0.0,
        error,
        fit_rms,
        scale,
        rank,
        members: n,
        rank_deficient: rank < n,
        fit_points: fit.len(),
        evaluation_points: eval.len(),
    })
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub(crate) fn adjacent_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.windows(2).zip(y.windows(2)).map(|(a, b)| (b[0] / b[1]).ln() / (a[0] / a[1]).ln()).collect()
}

pub(crate) fn validate_radii(hs: &[f64]) -> Result<()> {
    if hs.len() < 4 {
        return Err(Error::InvalidParameters(format!("need at least 4 radii, got {}", hs.len())));
    }
    if hs.iter().any(|h| !(*h > 0.0) || !h.is_finite()) || hs.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameters("radii must be positive and strictly decreasing".into()));
    }
    Ok(())
}

/// Metadata carried into serialized reports.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StudyMeta {
    pub operator: String,
    pub dim: usize,
    pub degree: usize,
    pub members: usize,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub meta: StudyMeta,
    pub fits: Vec<FitReport>,
    pub adjacent_slopes: Vec<f64>,
    /// Global least-squares slope; `None` when every error is at the floor.
    pub slope: Option<f64>,
    pub target: f64,
    pub exact: bool,
    pub monotone: bool,
    pub rank_deficient: bool,
    pub accepted: bool,
}

impl ConvergenceReport {
    pub fn hs(&self) -> Vec<f64> {
        self.fits.iter().map(|f| f.h).collect()
    }

    pub fn errors(&self) -> Vec<f64> {
        self.fits.iter().map(|f| f.error).collect()
    }

    /// Columns `h,error,slope`; the slope of a row is taken against the
    /// previous row and is empty on the first.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,error,slope\n");
        for (i, f) in self.fits.iter().enumerate() {
            let slope = if i == 0 { String::new() } else { format!("{:.16e}", self.adjacent_slopes[i - 1]) };
            writeln!(out, "{:.16e},{:.16e},{}", f.h, f.error, slope).expect("string write");
        }
        out
    }
}

/// Best-approximation errors over decreasing radii with the acceptance
/// slope `p + 1 - 0.25`.
pub fn convergence_study(
    u: &dyn Fn(&[f64]) -> Result<Complex64>,
    family: &[GpwFunction],
    x0: &[f64],
    hs: &[f64],
    degree: usize,
    config: &SamplingConfig,
    meta: StudyMeta,
) -> Result<ConvergenceReport> {
    validate_radii(hs)?;
    let fits = hs.iter().map(|&h| best_approx_error(u, family, x0, h, config)).collect::<Result<Vec<_>>>()?;
    let errors: Vec<f64> = fits.iter().map(|f| f.error).collect();
    let target = degree as f64 + 1.0 - SLOPE_BAND;
    let exact = fits.iter().all(|f| f.error <= EXACT_FLOOR * f.scale.max(1.0));
    let monotone = errors.windows(2).all(|w| w[1] < w[0]);
    let (slope, adjacent) = if exact {
        (None, vec![f64::NAN; hs.len() - 1])
    } else {
        (Some(log_log_slope(hs, &errors)), adjacent_slopes(hs, &errors))
    };
    let accepted = exact || (monotone && slope.is_some_and(|s| s >= target));
    Ok(ConvergenceReport {
        meta,
        rank_deficient: fits.iter().any(|f| f.rank_deficient),
        fits,
        adjacent_slopes: adjacent,
        slope,
        target,
        exact,
        monotone,
        accepted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_family, directions_2d, Direction};
    use crate::lab::{manufactured_helmholtz, plane_wave_family, random_phase};
    use crate::operators::{make_helmholtz_split, CoefficientJet};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn sample_points_lie_where_claimed() {
        for x0 in [vec![0.5, -1.0], vec![0.0, 1.0, 2.0]] {
            for p in sphere_points(&x0, 0.3, 17) {
                let r: f64 = p.iter().zip(&x0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                assert!((r - 0.3).abs() < 1e-14);
            }
            for p in ball_points(&x0, 0.3, 40) {
                let r: f64 = p.iter().zip(&x0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                assert!(r < 0.3);
            }
        }
    }

    #[test]
    fn member_is_fitted_exactly() {
        let x0 = [0.2, 0.1];
        let family = plane_wave_family(&x0, c(5.0), &directions_2d(5), 2).unwrap();
        let target = family[2].clone();
        let u = move |x: &[f64]| target.evaluate(x);
        let r = best_approx_error(&u, &family, &x0, 0.1, &SamplingConfig::default()).unwrap();
        assert!(r.error <= 1e-12, "{}", r.error);
        assert!(!r.rank_deficient);
        assert_eq!((r.fit_points, r.evaluation_points), (30, 300));
    }

    #[test]
    fn error_decreases_with_radius() {
        let x0 = [0.0, 0.0];
        let family = plane_wave_family(&x0, c(3.0), &directions_2d(5), 2).unwrap();
        let d = Direction::real(&[0.3, 0.7]).unwrap();
        let target = crate::basis::GpwFunction::plane_wave(&x0, c(3.0), &d, 2).unwrap();
        let u = move |x: &[f64]| target.evaluate(x);
        let coarse = best_approx_error(&u, &family, &x0, 0.1, &SamplingConfig::default()).unwrap();
        let fine = best_approx_error(&u, &family, &x0, 0.05, &SamplingConfig::default()).unwrap();
        assert!(fine.error < coarse.error);
    }

    #[test]
    fn enlarging_the_family_does_not_increase_the_fit_residual() {
        let x0 = [0.0, 0.0];
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = manufactured_helmholtz(&random_phase(&mut rng, 2, 3, 3.0, 0.5));
        let u = |x: &[f64]| m.solution(x);
        let fit = sample_set(&x0, 0.3, 60, 30);
        let eval = sample_set(&x0, 0.3, 600, 300);
        let mut family = plane_wave_family(&x0, c(3.0), &directions_2d(5), 2).unwrap();
        let mut last = f64::INFINITY;
        for extra in [[1.0, 1.0], [-1.0, 2.0], [0.2, -1.0]] {
            let r = fit_on_points(&u, &family, &fit, &eval).unwrap();
            assert!(r.fit_rms <= last + 1e-12, "{} > {last}", r.fit_rms);
            last = r.fit_rms;
            family.extend(plane_wave_family(&x0, c(3.0), &[Direction::real(&extra).unwrap()], 2).unwrap());
        }
    }

    #[test]
    fn manufactured_convergence_rates() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x0 = [0.0, 0.0];
        let hs = [0.4, 0.2, 0.1, 0.05];
        for p in 2..=3 {
            let g = random_phase(&mut rng, 2, 3, 2.0, 0.3);
            let m = manufactured_helmholtz(&g);
            let split = make_helmholtz_split(CoefficientJet::from_global_polynomial(x0.to_vec(), m.kappa2()).unwrap(), p, 2).unwrap();
            let family = build_family(&split, &directions_2d(2 * p + 1), &x0).unwrap();
            let u = |x: &[f64]| m.solution(x);
            let report = convergence_study(&u, &family, &x0, &hs, p, &SamplingConfig::default(), StudyMeta::default()).unwrap();
            assert!(report.accepted, "p={p}: {report:#?}");
        }
    }

    #[test]
    fn exact_representation_is_flagged() {
        let x0 = [0.0, 0.0];
        let family = plane_wave_family(&x0, c(2.0), &directions_2d(3), 1).unwrap();
        let t = family[0].clone();
        let u = move |x: &[f64]| t.evaluate(x);
        let r = convergence_study(&u, &family, &x0, &[0.4, 0.2, 0.1, 0.05], 1, &SamplingConfig::default(), StudyMeta::default()).unwrap();
        assert!(r.exact && r.accepted && r.slope.is_none());
        assert!(r.to_csv().starts_with("h,error,slope\n4.0000000000000002e-1,"));
    }

    #[test]
    fn radii_are_validated() {
        let family = plane_wave_family(&[0.0, 0.0], c(1.0), &directions_2d(3), 1).unwrap();
        let u = |_: &[f64]| Ok(c(1.0));
        let cfg = SamplingConfig::default();
        for hs in [&[0.4, 0.2, 0.1][..], &[0.4, 0.2, 0.2, 0.1], &[0.4, 0.2, 0.1, -0.05]] {
            assert!(convergence_study(&u, &family, &[0.0, 0.0], hs, 1, &cfg, StudyMeta::default()).is_err());
        }
        let sparse = SamplingConfig { boundary_per_member: 0, interior_per_member: 0, evaluation_factor: 1 };
        assert!(matches!(best_approx_error(&u, &family, &[0.0, 0.0], 0.1, &sparse), Err(Error::DegenerateSampling(_))));
    }

    #[test]
    fn slopes() {
        let h = [0.4, 0.2, 0.1, 0.05];
        let e: Vec<f64> = h.iter().map(|v: &f64| 3.0 * v.powi(3)).collect();
        assert!((log_log_slope(&h, &e) - 3.0).abs() < 1e-12);
        assert!(adjacent_slopes(&h, &e).iter().all(|s| (s - 3.0).abs() < 1e-12));
    }
}
