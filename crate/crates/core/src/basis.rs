//! Direction sets and GPW families.
//!
//! A GPW is seeded with the linear phase `i k d . X`, zero constant term and
//! all other free coefficients zero, then completed by the counterimage
//! construction. Every built function carries its own residual certificate.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{construct_counterimage, FreeParameters, OperatorSplit};
use crate::poly::{GradedPolynomial, TermRecord};

/// Relative residual a built GPW must meet.
pub const CERTIFICATE_TOLERANCE: f64 = 1e-11;

/// Propagation direction with `sum_i d_i^2 = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Direction(Vec<Complex64>);

impl Direction {
    /// Normalized real direction.
    pub fn real(components: &[f64]) -> Result<Self> {
        let norm = components.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidInput("direction must be finite and nonzero".into()));
        }
        Ok(Direction(components.iter().map(|c| Complex64::new(c / norm, 0.0)).collect()))
    }

    /// Complex (evanescent) direction. Not normalized: `sum d_i^2 = 1` must
    /// already hold to 1e-12.
    pub fn complex(components: Vec<Complex64>) -> Result<Self> {
        let s: Complex64 = components.iter().map(|c| c * c).sum();
        if (s - 1.0).norm() > 1e-12 {
            return Err(Error::InvalidInput(format!("complex direction has d.d = {s}, expected 1")));
        }
        Ok(Direction(components))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[Complex64] {
        &self.0
    }

    pub fn is_real(&self) -> bool {
        self.0.iter().all(|c| c.im == 0.0)
    }
}

/// `L` directions at angles `2 pi l / L`.
pub fn directions_2d(count: usize) -> Vec<Direction> {
    (0..count)
        .map(|l| {
            let t = std::f64::consts::TAU * l as f64 / count as f64;
            Direction(vec![Complex64::new(t.cos(), 0.0), Complex64::new(t.sin(), 0.0)])
        })
        .collect()
}

/// `L` points of the Fibonacci sphere, from the north pole downwards.
pub fn directions_3d(count: usize) -> Vec<Direction> {
    if count == 1 {
        return vec![Direction(vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)])];
    }
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * i as f64 / (count - 1) as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let a = golden * i as f64;
            Direction::real(&[r * a.cos(), r * a.sin(), z]).expect("unit by construction")
        })
        .collect()
}

/// Quasi-uniform directions in dimension 2 or 3.
pub fn directions(dim: usize, count: usize) -> Result<Vec<Direction>> {
    match dim {
        2 => Ok(directions_2d(count)),
        3 => Ok(directions_3d(count)),
        _ => Err(Error::InvalidParameters(format!("directions are defined for d = 2 or 3, got {dim}"))),
    }
}

/// `exp(P(x - x0))` with `P(0) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct GpwFunction {
    x0: Vec<f64>,
    phase: GradedPolynomial,
    degree: usize,
    direction: Direction,
    operator: String,
    residual: f64,
}

impl GpwFunction {
    /// Exact plane wave `exp(i k d . (x - x0))`, reported at phase degree `degree`.
    pub fn plane_wave(x0: &[f64], wavenumber: Complex64, direction: &Direction, degree: usize) -> Result<Self> {
        if direction.dim() != x0.len() {
            return Err(Error::DimensionMismatch { expected: x0.len(), found: direction.dim() });
        }
        let grad: Vec<Complex64> = direction.0.iter().map(|d| Complex64::i() * wavenumber * d).collect();
        Ok(GpwFunction {
            x0: x0.to_vec(),
            phase: GradedPolynomial::linear(&grad),
            degree,
            direction: direction.clone(),
            operator: "plane_wave".into(),
            residual: 0.0,
        })
    }

    /// Reassembles a function from stored parts, e.g. a basis file entry.
    /// The residual is taken as recorded.
    pub fn from_parts(x0: Vec<f64>, phase: GradedPolynomial, degree: usize, direction: Direction, operator: String, residual: f64) -> Result<Self> {
        if phase.dim() != x0.len() || direction.dim() != x0.len() {
            return Err(Error::DimensionMismatch { expected: x0.len(), found: phase.dim() });
        }
        Ok(GpwFunction { x0, phase, degree, direction, operator, residual })
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    pub fn phase(&self) -> &GradedPolynomial {
        &self.phase
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn direction(&self) -> &Direction {
        &self.direction
    }

    pub fn operator(&self) -> &str {
        &self.operator
    }

    /// Relative quasi-Trefftz residual recorded at build time.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.x0.len() {
            return Err(Error::DimensionMismatch { expected: self.x0.len(), found: x.len() });
        }
        let local: Vec<f64> = x.iter().zip(&self.x0).map(|(a, b)| a - b).collect();
        Ok(self.phase.evaluate(&local)?.exp())
    }

    /// Taylor polynomial of `exp(P)` to degree `q`, in centered coordinates.
    pub fn taylor(&self, q: usize) -> GradedPolynomial {
        self.phase.exp_truncated(q)
    }

    pub fn to_record(&self) -> BasisRecord {
        BasisRecord {
            operator: self.operator.clone(),
            direction: self.direction.clone(),
            x0: self.x0.clone(),
            p: self.degree,
            phase: self.phase.to_records(),
            residual_norm: self.residual,
        }
    }

    pub fn from_record(record: &BasisRecord) -> Result<Self> {
        let dim = record.x0.len();
        let phase = GradedPolynomial::from_records(dim, &record.phase)?;
        GpwFunction::from_parts(record.x0.clone(), phase, record.p, record.direction.clone(), record.operator.clone(), record.residual_norm)
    }
}

/// Basis file entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisRecord {
    pub operator: String,
    pub direction: Direction,
    pub x0: Vec<f64>,
    pub p: usize,
    pub phase: Vec<TermRecord>,
    pub residual_norm: f64,
}

/// Seeds `z = i k d . X` from the split's phase initialization and completes
/// it with zero free coefficients.
pub fn build_gpw(split: &OperatorSplit, direction: &Direction, x0: &[f64]) -> Result<GpwFunction> {
    if direction.dim() != split.dim() {
        return Err(Error::DimensionMismatch { expected: split.dim(), found: direction.dim() });
    }
    if x0.len() != split.dim() {
        return Err(Error::DimensionMismatch { expected: split.dim(), found: x0.len() });
    }
    let z = GradedPolynomial::linear(&split.phase_gradient(direction.components())?);
    let phase = construct_counterimage(split, split.rhs(), &FreeParameters::with_z(z))?;
    let residual = split.relative_residual(&phase);
    if !(residual <= CERTIFICATE_TOLERANCE) {
        return Err(Error::Certificate { residual, tolerance: CERTIFICATE_TOLERANCE });
    }
    Ok(GpwFunction {
        x0: x0.to_vec(),
        phase,
        degree: split.degree(),
        direction: direction.clone(),
        operator: split.label().to_string(),
        residual,
    })
}

/// One GPW per direction.
pub fn build_family(split: &OperatorSplit, directions: &[Direction], x0: &[f64]) -> Result<Vec<GpwFunction>> {
    directions.iter().map(|d| build_gpw(split, d, x0)).collect()
}

/// `exp(P(x - x0))`.
pub fn evaluate_gpw(phi: &GpwFunction, x: &[f64]) -> Result<Complex64> {
    phi.evaluate(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{make_convected_split, make_helmholtz_split, CoefficientJet};
    use crate::poly::MultiIndex;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    fn constant_split(k0: f64, p: usize, dim: usize, x0: &[f64]) -> OperatorSplit {
        let jet = CoefficientJet::constant(x0.to_vec(), c(k0 * k0));
        make_helmholtz_split(jet, p, dim).unwrap()
    }

    fn assert_unit_and_distinct(dirs: &[Direction]) {
        for d in dirs {
            let n: f64 = d.components().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() <= 1e-14);
            assert!(d.is_real());
        }
        for (i, a) in dirs.iter().enumerate() {
            for b in &dirs[i + 1..] {
                let gap: f64 = a.components().iter().zip(b.components()).map(|(x, y)| (x - y).norm()).sum();
                assert!(gap > 1e-6);
            }
        }
    }

    #[test]
    fn planar_direction_sets() {
        let four = directions_2d(4);
        let expect = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
        for (d, (x, y)) in four.iter().zip(expect) {
            assert!((d.components()[0] - c(x)).norm() < 1e-15);
            assert!((d.components()[1] - c(y)).norm() < 1e-15);
        }
        assert_eq!(directions_2d(1)[0].components(), &[c(1.0), c(0.0)]);
        let five = directions_2d(5);
        assert_eq!(five.len(), 5);
        assert_unit_and_distinct(&five);
    }

    #[test]
    fn spherical_direction_sets() {
        assert_eq!(directions_3d(1)[0].components(), &[c(0.0), c(0.0), c(1.0)]);
        let two = directions_3d(2);
        assert_unit_and_distinct(&two);
        let nine = directions_3d(9);
        assert_eq!(nine.len(), 9);
        assert_unit_and_distinct(&nine);
        assert_eq!(directions_3d(9), nine);
        assert!(directions(4, 3).is_err());
    }

    #[test]
    fn direction_validation() {
        assert!(Direction::real(&[0.0, 0.0]).is_err());
        let d = Direction::real(&[3.0, 4.0]).unwrap();
        assert_eq!(d.components(), &[c(0.6), c(0.8)]);
        let evanescent = Direction::complex(vec![Complex64::new(0.0, 1.0), c(2f64.sqrt())]).unwrap();
        assert!(!evanescent.is_real());
        assert!(Direction::complex(vec![c(1.0), c(1.0)]).is_err());
    }

    #[test]
    fn constant_wavenumber_gives_plane_waves() {
        let x0 = [0.3, -0.2];
        for p in 2..=6 {
            let split = constant_split(5.0, p, 2, &x0);
            for d in directions_2d(7) {
                let phi = build_gpw(&split, &d, &x0).unwrap();
                let expected = GradedPolynomial::linear(&[Complex64::i() * 5.0 * d.components()[0], Complex64::i() * 5.0 * d.components()[1]]);
                assert!(phi.phase().max_abs_diff(&expected) <= 1e-13);
                assert!(phi.phase().layers().iter().skip(2).all(|l| l.max_abs() <= 1e-13));
            }
        }
    }

    #[test]
    fn linear_wavenumber_gpw_matches_hand_computation() {
        let (k0, a, b) = (2.0, 0.5, 0.25);
        let kappa2 = GradedPolynomial::from_terms(
            2,
            [
                (MultiIndex::new(vec![0, 0]), c(k0 * k0)),
                (MultiIndex::new(vec![1, 0]), c(a)),
                (MultiIndex::new(vec![0, 1]), c(b)),
            ],
        )
        .unwrap();
        let split = make_helmholtz_split(CoefficientJet::polynomial(vec![0.0, 0.0], kappa2).unwrap(), 3, 2).unwrap();
        let d = Direction::real(&[1.0, 2.0]).unwrap();
        let phi = build_gpw(&split, &d, &[0.0, 0.0]).unwrap();
        let dc = d.components();
        let expected = GradedPolynomial::from_terms(
            2,
            [
                (MultiIndex::new(vec![1, 0]), Complex64::i() * k0 * dc[0]),
                (MultiIndex::new(vec![0, 1]), Complex64::i() * k0 * dc[1]),
                (MultiIndex::new(vec![3, 0]), c(-a / 6.0)),
                (MultiIndex::new(vec![2, 1]), c(-b / 2.0)),
            ],
        )
        .unwrap();
        assert!(phi.phase().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn evaluation() {
        let x0 = [1.0, 2.0];
        let split = constant_split(4.0, 3, 2, &x0);
        let d = Direction::real(&[1.0, 1.0]).unwrap();
        let phi = build_gpw(&split, &d, &x0).unwrap();
        assert_eq!(evaluate_gpw(&phi, &x0).unwrap(), c(1.0));
        let dr: Vec<f64> = d.components().iter().map(|c| c.re).collect();
        let at = [x0[0] + dr[0] / 4.0, x0[1] + dr[1] / 4.0];
        assert!((evaluate_gpw(&phi, &at).unwrap() - Complex64::i().exp()).norm() < 1e-15);
        for i in 0..20 {
            let t = i as f64 * 0.37;
            let x = [x0[0] + t.cos() * t, x0[1] - t.sin()];
            assert!((evaluate_gpw(&phi, &x).unwrap().norm() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn convected_seed_uses_dispersion_root() {
        let x0 = [0.0, 0.0];
        let rho = CoefficientJet::constant(x0.to_vec(), c(1.3));
        let mach = [CoefficientJet::constant(x0.to_vec(), c(0.3)), CoefficientJet::constant(x0.to_vec(), c(-0.2))];
        let split = make_convected_split(&rho, &mach, c(6.0), 4, 2).unwrap();
        for d in directions_2d(5) {
            let phi = build_gpw(&split, &d, &x0).unwrap();
            let m = 0.3 * d.components()[0].re - 0.2 * d.components()[1].re;
            let k = 6.0 / (1.0 + m);
            let expected = GradedPolynomial::linear(&[Complex64::i() * k * d.components()[0], Complex64::i() * k * d.components()[1]]);
            assert!(phi.phase().max_abs_diff(&expected) < 1e-12);
            assert_eq!(phi.operator(), "convected_helmholtz");
        }
    }

    #[test]
    fn dimension_mismatches() {
        let split = constant_split(1.0, 2, 2, &[0.0, 0.0]);
        assert!(build_gpw(&split, &directions_3d(1)[0], &[0.0, 0.0]).is_err());
        assert!(build_gpw(&split, &directions_2d(1)[0], &[0.0]).is_err());
    }

    #[test]
    fn records_round_trip() {
        let x0 = [0.1, 0.2];
        let split = constant_split(2.0, 3, 2, &x0);
        let phi = build_gpw(&split, &directions_2d(3)[1], &x0).unwrap();
        let back = GpwFunction::from_record(&phi.to_record()).unwrap();
        assert_eq!(back, phi);
    }
}
