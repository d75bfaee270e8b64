use std::cmp::Ordering;
use std::fmt;

/// Exponent tuple `j` of a monomial `X^j = X_1^{j_1} ... X_d^{j_d}`.
///
/// Ordering is graded lexicographic: total degree first, then the exponent of
/// the first variable in decreasing order, so degree-2 monomials in two
/// variables come out as `X^2, XY, Y^2`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(components: Vec<u32>) -> Self {
        assert!(!components.is_empty(), "multi-index needs at least one component");
        MultiIndex(components)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex::new(vec![0; dim])
    }

    /// The unit multi-index `e_axis` scaled by `power`.
    pub fn axis(dim: usize, axis: usize, power: u32) -> Self {
        let mut c = vec![0; dim];
        c[axis] = power;
        MultiIndex::new(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&c| c as usize).sum()
    }

    pub fn components(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, axis: usize) -> u32 {
        self.0[axis]
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.dim(), other.dim());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self - other`, or `None` when some component would go negative.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(MultiIndex)
    }

    pub fn with_component(&self, axis: usize, value: u32) -> MultiIndex {
        let mut c = self.0.clone();
        c[axis] = value;
        MultiIndex(c)
    }

    /// `j!` = product of component factorials.
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&c| factorial(c)).product()
    }
}

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// All multi-indices of total degree `degree` in `dim` variables, in
/// graded-lex order.
pub fn monomials_of_degree(dim: usize, degree: usize) -> Vec<MultiIndex> {
    assert!(dim >= 1);
    let mut out = Vec::new();
    let mut current = vec![0u32; dim];
    fill(&mut out, &mut current, 0, degree as u32);
    out
}

fn fill(out: &mut Vec<MultiIndex>, current: &mut [u32], axis: usize, remaining: u32) {
    if axis + 1 == current.len() {
        current[axis] = remaining;
        out.push(MultiIndex(current.to_vec()));
        return;
    }
    for e in (0..=remaining).rev() {
        current[axis] = e;
        fill(out, current, axis + 1, remaining - e);
    }
}

/// All multi-indices of total degree at most `degree`, in graded-lex order.
pub fn monomials_up_to(dim: usize, degree: usize) -> Vec<MultiIndex> {
    (0..=degree).flat_map(|n| monomials_of_degree(dim, n)).collect()
}

/// `dim P~^n = C(n + d - 1, d - 1)`.
pub fn homogeneous_dimension(dim: usize, degree: usize) -> usize {
    binomial(degree + dim - 1, dim - 1)
}

/// `dim P^p = C(p + d, d)`.
pub fn polynomial_dimension(dim: usize, degree: usize) -> usize {
    binomial(degree + dim, dim)
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}
