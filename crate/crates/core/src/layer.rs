//! Inversion of an order-2 principal part on homogeneous layers.
//!
//! For `L* = sum_{|j|=2} c_j d^j` with `c_{2 e_k} != 0`, each homogeneous
//! space of degree `n + 2` splits into `U_n` (monomials with `j_k` in
//! `{0, 1}`) and `V_n` (monomials with `j_k >= 2`). `L*` maps `V_n`
//! bijectively onto the homogeneous polynomials of degree `n`, and the
//! inverse is a forward substitution in powers of the distinguished
//! variable `X_k`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::{monomials_of_degree, GradedPolynomial, HomogeneousPolynomial, MultiIndex};

/// Frozen second-order coefficients `c_j(x0)`, `|j| = 2`, plus the index of
/// the distinguished variable.
#[derive(Clone, Debug, PartialEq)]
pub struct Order2PrincipalPart {
    dim: usize,
    coeffs: BTreeMap<MultiIndex, Complex64>,
    distinguished: usize,
}

impl Order2PrincipalPart {
    /// Picks the distinguished variable maximizing `|c_{2 e_k}|`; the first
    /// such index wins ties.
    pub fn new<I>(dim: usize, coeffs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        let mut map = BTreeMap::new();
        for (j, c) in coeffs {
            if j.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: j.dim() });
            }
            if j.degree() != 2 {
                return Err(Error::InvalidInput(format!("principal part term {j:?} is not of order 2")));
            }
            *map.entry(j).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        map.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        let mut best: Option<(usize, f64)> = None;
        for k in 0..dim {
            let m = map.get(&MultiIndex::axis(dim, k, 2)).map_or(0.0, |c| c.norm());
            if m > 0.0 && best.is_none_or(|(_, b)| m > b) {
                best = Some((k, m));
            }
        }
        let (distinguished, _) = best.ok_or(Error::SingularPrincipalPart)?;
        Ok(Order2PrincipalPart { dim, coeffs: map, distinguished })
    }

    /// `L* = Delta`.
    pub fn laplacian(dim: usize) -> Self {
        let one = Complex64::new(1.0, 0.0);
        Order2PrincipalPart::new(dim, (0..dim).map(|i| (MultiIndex::axis(dim, i, 2), one)))
            .expect("the Laplacian has nonzero diagonal")
    }

    /// `L* = rho0 (Delta - (M0 . grad)^2)`, the frozen convected principal part.
    pub fn convected(rho0: Complex64, mach0: &[Complex64]) -> Result<Self> {
        let dim = mach0.len();
        let mut terms = Vec::new();
        for i in 0..dim {
            terms.push((MultiIndex::axis(dim, i, 2), rho0 * (Complex64::new(1.0, 0.0) - mach0[i] * mach0[i])));
            for j in (i + 1)..dim {
                let e = MultiIndex::axis(dim, i, 1).add(&MultiIndex::axis(dim, j, 1));
                terms.push((e, -rho0 * mach0[i] * mach0[j] * 2.0));
            }
        }
        Order2PrincipalPart::new(dim, terms)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn distinguished(&self) -> usize {
        self.distinguished
    }

    pub fn coeff(&self, j: &MultiIndex) -> Complex64 {
        self.coeffs.get(j).copied().unwrap_or_default()
    }

    /// `L* P` on a full polynomial.
    pub fn apply(&self, p: &GradedPolynomial) -> GradedPolynomial {
        let mut out = GradedPolynomial::zero(self.dim);
        for (j, c) in &self.coeffs {
            out = &out + &p.derive(j).scale(*c);
        }
        out
    }

    /// `L* P` on one layer; the result has degree `deg P - 2`.
    pub fn apply_homogeneous(&self, p: &HomogeneousPolynomial) -> HomogeneousPolynomial {
        let degree = p.degree().saturating_sub(2);
        if p.degree() < 2 {
            return HomogeneousPolynomial::zero(self.dim, 0);
        }
        let full = GradedPolynomial::from_layers(self.dim, [p.clone()]).expect("same dimension");
        self.apply(&full).project_layer(degree)
    }

    /// Solves `L* q = b` for `q` in `V_n`, `n = deg b`.
    pub fn solve_layer(&self, b: &HomogeneousPolynomial) -> Result<HomogeneousPolynomial> {
        if b.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: b.dim() });
        }
        let k = self.distinguished;
        let n = b.degree();
        let pivot = self.coeff(&MultiIndex::axis(self.dim, k, 2));
        if pivot == Complex64::new(0.0, 0.0) {
            return Err(Error::SingularPrincipalPart);
        }

        // The other coefficients grouped by their power of X_k, with that
        // power stripped: j = j_k e_k + j'.
        let mut with_one: Vec<(MultiIndex, Complex64)> = Vec::new();
        let mut with_zero: Vec<(MultiIndex, Complex64)> = Vec::new();
        for (j, c) in &self.coeffs {
            match j.get(k) {
                1 => with_one.push((j.with_component(k, 0), *c)),
                0 => with_zero.push((j.clone(), *c)),
                _ => {}
            }
        }

        // slices[i] holds q_i, the coefficient polynomial of X_k^i (no X_k in it).
        let zero = GradedPolynomial::zero(self.dim);
        let mut slices: Vec<GradedPolynomial> = vec![zero.clone(), zero.clone()];
        let b_slices = split_by_power(b, k);
        for i in 0..=n {
            let mut rhs = b_slices.get(i).cloned().unwrap_or_else(|| zero.clone());
            for (jp, c) in &with_one {
                rhs = &rhs - &slices[i + 1].derive(jp).scale(*c * (i as f64 + 1.0));
            }
            for (jp, c) in &with_zero {
                rhs = &rhs - &slices[i].derive(jp).scale(*c);
            }
            let denom = pivot * ((i as f64 + 2.0) * (i as f64 + 1.0));
            slices.push(rhs.scale(denom.inv()));
        }

        let mut q = HomogeneousPolynomial::zero(self.dim, n + 2);
        for (i, slice) in slices.iter().enumerate().skip(2) {
            for (jp, c) in slice.terms() {
                let j = jp.with_component(k, i as u32);
                if j.degree() != n + 2 {
                    return Err(Error::LayerSolve { layer: n, reason: format!("stray monomial {j:?}") });
                }
                q.add_term(j, *c);
            }
        }
        Ok(q)
    }

    /// The `U_n` / `V_n` monomial bases of degree `n + 2`.
    pub fn split_layer(&self, n: usize) -> LayerSplit {
        let k = self.distinguished;
        let (free, solved): (Vec<_>, Vec<_>) =
            monomials_of_degree(self.dim, n + 2).into_iter().partition(|j| j.get(k) <= 1);
        LayerSplit { n, free, solved }
    }
}

/// Disjoint monomial bases of the degree-`n + 2` homogeneous space.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerSplit {
    pub n: usize,
    /// `U_n`: distinguished exponent 0 or 1.
    pub free: Vec<MultiIndex>,
    /// `V_n`: distinguished exponent at least 2.
    pub solved: Vec<MultiIndex>,
}

fn split_by_power(b: &HomogeneousPolynomial, k: usize) -> Vec<GradedPolynomial> {
    let mut out: Vec<GradedPolynomial> = Vec::new();
    for (j, c) in b.terms() {
        let i = j.get(k) as usize;
        while out.len() <= i {
            out.push(GradedPolynomial::zero(b.dim()));
        }
        out[i].add_term(j.with_component(k, 0), *c);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::homogeneous_dimension;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    fn mono(e: &[u32]) -> MultiIndex {
        MultiIndex::new(e.to_vec())
    }

    fn homog(dim: usize, degree: usize, terms: &[(&[u32], f64)]) -> HomogeneousPolynomial {
        HomogeneousPolynomial::from_terms(dim, degree, terms.iter().map(|(e, v)| (mono(e), c(*v)))).unwrap()
    }

    #[test]
    fn split_layer_enumerations() {
        let lap2 = Order2PrincipalPart::laplacian(2);
        let s = lap2.split_layer(0);
        assert_eq!(s.free, vec![mono(&[1, 1]), mono(&[0, 2])]);
        assert_eq!(s.solved, vec![mono(&[2, 0])]);
        let s = lap2.split_layer(1);
        assert_eq!(s.free, vec![mono(&[1, 2]), mono(&[0, 3])]);
        assert_eq!(s.solved, vec![mono(&[3, 0]), mono(&[2, 1])]);
        let s = Order2PrincipalPart::laplacian(3).split_layer(0);
        assert_eq!(s.free, vec![mono(&[1, 1, 0]), mono(&[1, 0, 1]), mono(&[0, 2, 0]), mono(&[0, 1, 1]), mono(&[0, 0, 2])]);
        assert_eq!(s.solved, vec![mono(&[2, 0, 0])]);
    }

    #[test]
    fn split_sizes_cover_the_layer() {
        for dim in 2..=3 {
            let part = Order2PrincipalPart::laplacian(dim);
            for n in 0..8 {
                let s = part.split_layer(n);
                assert_eq!(s.free.len() + s.solved.len(), homogeneous_dimension(dim, n + 2));
                assert!(s.free.iter().all(|j| !s.solved.contains(j)));
                if dim == 2 {
                    assert_eq!(s.free.len(), 2);
                }
            }
        }
    }

    #[test]
    fn laplacian_solves() {
        let lap = Order2PrincipalPart::laplacian(2);
        let q = lap.solve_layer(&homog(2, 0, &[(&[0, 0], 1.0)])).unwrap();
        assert_eq!(q, homog(2, 2, &[(&[2, 0], 0.5)]));
        let q = lap.solve_layer(&homog(2, 1, &[(&[0, 1], 1.0)])).unwrap();
        assert_eq!(q, homog(2, 3, &[(&[2, 1], 0.5)]));
        let q = lap.solve_layer(&homog(2, 1, &[(&[1, 0], 1.0)])).unwrap();
        assert!((q.coeff(&mono(&[3, 0])) - c(1.0 / 6.0)).norm() < 1e-16);
        assert_eq!(q.len(), 1);
    }

    #[test]
    fn singular_part_rejected() {
        let cross = Order2PrincipalPart::new(2, [(mono(&[1, 1]), c(1.0))]);
        assert_eq!(cross, Err(Error::SingularPrincipalPart));
    }

    #[test]
    fn pivot_choice_maximizes_diagonal() {
        let part = Order2PrincipalPart::new(3, [(mono(&[2, 0, 0]), c(0.5)), (mono(&[0, 0, 2]), c(-2.0))]).unwrap();
        assert_eq!(part.distinguished(), 2);
        let conv = Order2PrincipalPart::convected(c(1.0), &[c(0.9), c(0.1)]).unwrap();
        assert_eq!(conv.distinguished(), 1);
    }

    fn random_layer(rng: &mut ChaCha8Rng, dim: usize, degree: usize) -> HomogeneousPolynomial {
        HomogeneousPolynomial::from_terms(
            dim,
            degree,
            monomials_of_degree(dim, degree)
                .into_iter()
                .map(|j| (j, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))),
        )
        .unwrap()
    }

    #[test]
    fn exact_right_inverse_on_random_layers() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let parts = [
            Order2PrincipalPart::laplacian(2),
            Order2PrincipalPart::laplacian(3),
            Order2PrincipalPart::convected(c(1.3), &[c(0.4), c(-0.3)]).unwrap(),
            Order2PrincipalPart::convected(c(0.7), &[c(0.2), c(0.5), c(-0.1)]).unwrap(),
        ];
        for trial in 0..200 {
            let part = &parts[trial % parts.len()];
            let n = trial % 9;
            let b = random_layer(&mut rng, part.dim(), n);
            let q = part.solve_layer(&b).unwrap();
            let back = part.apply_homogeneous(&q);
            let mut diff = back.clone();
            diff.sub_assign(&b);
            assert!(diff.max_abs() <= 1e-12 * b.max_abs(), "trial {trial}: {}", diff.max_abs());
            let split = part.split_layer(n);
            assert!(q.terms().all(|(j, _)| split.solved.contains(j)));
        }
    }
}
