use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::basis::{Direction, GpwFunction};
use crate::error::{Error, Result};
use crate::frame::OperatorSplit;
use crate::poly::{monomials_up_to, polynomial_dimension, GradedPolynomial};

/// Default relative cut-off for numerical rank.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Degree-`p` Taylor coefficients of a family, one row per member, columns in
/// graded-lex monomial order.
#[derive(Clone, Debug, PartialEq)]
pub struct TaylorMatrix {
    dim: usize,
    degree: usize,
    rows: Vec<Vec<Complex64>>,
}

impl TaylorMatrix {
    pub fn new(family: &[GpwFunction], degree: usize) -> Result<Self> {
        let first = family.first().ok_or_else(|| Error::InvalidInput("empty family".into()))?;
        let dim = first.x0().len();
        if let Some(f) = family.iter().find(|f| f.x0().len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: f.x0().len() });
        }
        let rows = family.iter().map(|f| f.taylor(degree).dense(degree)).collect();
        Ok(TaylorMatrix { dim, degree, rows })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn rows(&self) -> &[Vec<Complex64>] {
        &self.rows
    }

    pub fn ncols(&self) -> usize {
        polynomial_dimension(self.dim, self.degree)
    }

    fn matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows.len(), self.ncols(), |i, j| self.rows[i][j])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankReport {
    pub rank: usize,
    pub tolerance: f64,
    pub singular_values: Vec<f64>,
}

/// Number of singular values above `tol * sigma_max`, with the full
/// descending spectrum.
pub fn matrix_rank(m: &DMatrix<Complex64>, tol: f64) -> RankReport {
    let mut singular_values: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    let cutoff = tol * singular_values.first().copied().unwrap_or(0.0);
    let rank = singular_values.iter().filter(|&&s| s > cutoff && s > 0.0).count();
    RankReport { rank, tolerance: tol, singular_values }
}

pub fn taylor_rank(family: &[GpwFunction], degree: usize, tol: f64) -> Result<RankReport> {
    Ok(matrix_rank(&TaylorMatrix::new(family, degree)?.matrix(), tol))
}

/// `D_d`: `2p + 1` in 2D and `(p + 1)^2` in 3D.
pub fn plane_wave_dimension(dim: usize, degree: usize) -> Result<usize> {
    match dim {
        2 => Ok(2 * degree + 1),
        3 => Ok((degree + 1) * (degree + 1)),
        _ => Err(Error::InvalidParameters(format!("D_d is defined for d = 2 or 3, got {dim}"))),
    }
}

/// Plane waves `exp(i k d . (x - x0))` of one real wavenumber.
pub fn plane_wave_family(x0: &[f64], wavenumber: Complex64, directions: &[Direction], degree: usize) -> Result<Vec<GpwFunction>> {
    directions.iter().map(|d| GpwFunction::plane_wave(x0, wavenumber, d, degree)).collect()
}

/// Plane waves seeded by the split's own phase initialization, so that the
/// GPW built from the same direction shares its linear part.
pub fn seed_plane_waves(split: &OperatorSplit, directions: &[Direction], x0: &[f64]) -> Result<Vec<GpwFunction>> {
    directions
        .iter()
        .map(|d| {
            let phase = GradedPolynomial::linear(&split.phase_gradient(d.components())?);
            GpwFunction::from_parts(x0.to_vec(), phase, split.degree(), d.clone(), "plane_wave".into(), 0.0)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimensionReport {
    pub dim: usize,
    pub degree: usize,
    pub directions: usize,
    pub expected: usize,
    pub plane_wave: RankReport,
    pub gpw: RankReport,
    pub equal: bool,
}

/// Taylor ranks of the GPW family and its seed plane waves on one
/// direction set.
pub fn gpw_dimension_check(split: &OperatorSplit, directions: &[Direction], x0: &[f64], tol: f64) -> Result<DimensionReport> {
    let degree = split.degree();
    let gpws = crate::basis::build_family(split, directions, x0)?;
    let waves = seed_plane_waves(split, directions, x0)?;
    let gpw = taylor_rank(&gpws, degree, tol)?;
    let plane_wave = taylor_rank(&waves, degree, tol)?;
    Ok(DimensionReport {
        dim: split.dim(),
        degree,
        directions: directions.len(),
        expected: plane_wave_dimension(split.dim(), degree)?,
        equal: gpw.rank == plane_wave.rank,
        plane_wave,
        gpw,
    })
}

/// `dim ker Delta` on polynomials of degree `<= p`, from the numerical rank
/// of the dense Laplacian matrix.
pub fn laplacian_kernel_dimension(dim: usize, degree: usize) -> usize {
    let cols = monomials_up_to(dim, degree);
    let rows_dim = if degree >= 2 { polynomial_dimension(dim, degree - 2) } else { 0 };
    if rows_dim == 0 {
        return cols.len();
    }
    let images: Vec<Vec<Complex64>> = cols
        .iter()
        .map(|j| GradedPolynomial::monomial(j.clone(), Complex64::new(1.0, 0.0)).laplacian().dense(degree - 2))
        .collect();
    let m = DMatrix::from_fn(rows_dim, cols.len(), |i, j| images[j][i]);
    cols.len() - matrix_rank(&m, 1e-12).rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_family, directions_2d, directions_3d};
    use crate::lab::random_kappa2;
    use crate::operators::{make_helmholtz_split, CoefficientJet};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn waves(dim: usize, l: usize, p: usize) -> Vec<GpwFunction> {
        let dirs = if dim == 2 { directions_2d(l) } else { directions_3d(l) };
        plane_wave_family(&vec![0.0; dim], Complex64::new(2.0, 0.0), &dirs, p).unwrap()
    }

    #[test]
    fn plane_wave_ranks() {
        assert_eq!(taylor_rank(&waves(2, 5, 2), 2, RANK_TOLERANCE).unwrap().rank, 5);
        assert_eq!(taylor_rank(&waves(2, 10, 2), 2, RANK_TOLERANCE).unwrap().rank, 5);
        assert_eq!(taylor_rank(&waves(2, 1, 2), 2, RANK_TOLERANCE).unwrap().rank, 1);
        assert_eq!(taylor_rank(&waves(3, 9, 2), 2, RANK_TOLERANCE).unwrap().rank, 9);
        assert!(taylor_rank(&[], 2, RANK_TOLERANCE).is_err());
    }

    #[test]
    fn rank_saturates() {
        for dim in [2, 3] {
            for p in 1..=4 {
                let cap = plane_wave_dimension(dim, p).unwrap();
                let mut last = 0;
                for l in [cap, cap + 1, cap + 3, 2 * cap] {
                    let r = taylor_rank(&waves(dim, l, p), p, RANK_TOLERANCE).unwrap().rank;
                    assert!(r >= last && r <= cap, "d={dim} p={p} l={l}: {r}");
                    last = r;
                }
                assert_eq!(last, cap, "d={dim} p={p}");
            }
        }
    }

    #[test]
    fn matrix_shape_and_order() {
        let family = waves(2, 3, 2);
        let m = TaylorMatrix::new(&family, 2).unwrap();
        assert_eq!(m.ncols(), 6);
        assert_eq!(m.rows().len(), 3);
        // first direction is (1, 0): exp(2iX) = 1 + 2iX - 2X^2
        let row = &m.rows()[0];
        assert_eq!(row[0], Complex64::new(1.0, 0.0));
        assert!((row[1] - Complex64::new(0.0, 2.0)).norm() < 1e-15);
        assert!((row[3] + 2.0).norm() < 1e-15);
    }

    #[test]
    fn gpw_ranks_match_plane_waves() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for p in 2..=4 {
            for _ in 0..5 {
                let kappa2 = random_kappa2(&mut rng, 2, p, 9.0);
                let split = make_helmholtz_split(CoefficientJet::polynomial(vec![0.0; 2], kappa2).unwrap(), p, 2).unwrap();
                let dirs = directions_2d(2 * p + 1);
                let report = gpw_dimension_check(&split, &dirs, &[0.0, 0.0], RANK_TOLERANCE).unwrap();
                assert!(report.equal, "{report:?}");
                assert_eq!(report.gpw.rank, 2 * p + 1);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let kappa2 = random_kappa2(&mut rng, 3, 2, 4.0);
        let split = make_helmholtz_split(CoefficientJet::polynomial(vec![0.0; 3], kappa2).unwrap(), 2, 3).unwrap();
        let report = gpw_dimension_check(&split, &directions_3d(9), &[0.0; 3], RANK_TOLERANCE).unwrap();
        assert_eq!((report.gpw.rank, report.plane_wave.rank), (9, 9));
    }

    #[test]
    fn constant_coefficient_families_coincide() {
        let split = make_helmholtz_split(CoefficientJet::constant(vec![0.0; 2], Complex64::new(4.0, 0.0)), 3, 2).unwrap();
        let dirs = directions_2d(7);
        let g = build_family(&split, &dirs, &[0.0, 0.0]).unwrap();
        let w = seed_plane_waves(&split, &dirs, &[0.0, 0.0]).unwrap();
        for (a, b) in g.iter().zip(&w) {
            assert!(a.phase().max_abs_diff(b.phase()) < 1e-15);
        }
    }

    #[test]
    fn harmonic_kernel_dimension() {
        for p in 0..=6 {
            assert_eq!(laplacian_kernel_dimension(2, p), 2 * p + 1);
        }
        for p in 0..=4 {
            assert_eq!(laplacian_kernel_dimension(3, p), (p + 1) * (p + 1));
        }
    }
}
