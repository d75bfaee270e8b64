use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{relative, OperatorSplit};
use crate::poly::{monomials_of_degree, GradedPolynomial, HomogeneousPolynomial};

/// Relative tolerance for every "equals" check in the report.
pub const HYPOTHESIS_TOLERANCE: f64 = 1e-12;
/// `(R o S*)^{s+1}` must vanish to this level after normalizing the input.
pub const NILPOTENCY_TOLERANCE: f64 = 1e-13;

/// Source of test polynomials for hypothesis checks.
pub trait PolySampler {
    fn homogeneous(&mut self, dim: usize, degree: usize) -> HomogeneousPolynomial;

    /// Sum of sampled layers of degrees `lo..=hi`.
    fn graded(&mut self, dim: usize, lo: usize, hi: usize) -> GradedPolynomial {
        let layers: Vec<_> = (lo..=hi).map(|n| self.homogeneous(dim, n)).collect();
        GradedPolynomial::from_layers(dim, layers).expect("sampled layers share the dimension")
    }

    fn scalar(&mut self) -> Complex64;
}

/// Coefficients uniform in the complex unit square `[-1, 1] x [-1, 1]`.
pub struct SeededSampler {
    rng: ChaCha8Rng,
}

impl SeededSampler {
    pub fn new(seed: u64) -> Self {
        SeededSampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl PolySampler for SeededSampler {
    fn homogeneous(&mut self, dim: usize, degree: usize) -> HomogeneousPolynomial {
        let terms: Vec<_> = monomials_of_degree(dim, degree)
            .into_iter()
            .map(|j| (j, Complex64::new(self.rng.gen_range(-1.0..1.0), self.rng.gen_range(-1.0..1.0))))
            .collect();
        HomogeneousPolynomial::from_terms(dim, degree, terms).expect("enumerated monomials")
    }

    fn scalar(&mut self) -> Complex64 {
        Complex64::new(self.rng.gen_range(-1.0..1.0), self.rng.gen_range(-1.0..1.0))
    }
}

/// Always samples zero; every check passes vacuously.
pub struct ZeroSampler;

impl PolySampler for ZeroSampler {
    fn homogeneous(&mut self, dim: usize, degree: usize) -> HomogeneousPolynomial {
        HomogeneousPolynomial::zero(dim, degree)
    }

    fn scalar(&mut self) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisId {
    /// `T*(a + c b) = T*(a) + c T*(b)`.
    PrincipalLinearity,
    /// `T*(A_n)` lies in `B_n`.
    PrincipalLayerAction,
    /// `T*(S_n b) = b` with `S_n b` in `V_n`.
    LayerRightInverse,
    /// `T*(F) = {0}`.
    PrincipalAnnihilatesF,
    /// `R(A_n + ... + A_s)` lies in `B_{n+1} + ... + B_s`.
    RemainderDegreeShift,
    /// `R(A_s) = {0}`.
    RemainderTopLayer,
    /// `proj_n R(x) = proj_n R(z + x_0 + ... + x_{n-1})`.
    ProjectionLocality,
    /// `(R o S*)^{s+1} = 0`.
    Nilpotency,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisCheck {
    pub hypothesis: HypothesisId,
    pub trials: usize,
    pub max_violation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub split: String,
    pub seed: Option<u64>,
    pub trials: usize,
    pub checks: Vec<HypothesisCheck>,
    pub passed: bool,
}

impl HypothesisReport {
    pub fn check(&self, id: HypothesisId) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.hypothesis == id)
    }
}

/// Runs every split hypothesis on `trials` seeded random samples.
pub fn verify_split_hypotheses(split: &OperatorSplit, trials: usize, seed: u64) -> HypothesisReport {
    let mut report = verify_with_sampler(split, trials, &mut SeededSampler::new(seed));
    report.seed = Some(seed);
    report
}

struct Tally {
    id: HypothesisId,
    tolerance: f64,
    worst: f64,
    trials: usize,
}

impl Tally {
    fn new(id: HypothesisId, tolerance: f64) -> Self {
        Tally { id, tolerance, worst: 0.0, trials: 0 }
    }

    fn record(&mut self, violation: f64) {
        // NaN counts as a failure
        self.worst = if violation.is_nan() { f64::INFINITY } else { self.worst.max(violation) };
    }

    fn finish(self) -> HypothesisCheck {
        HypothesisCheck {
            hypothesis: self.id,
            trials: self.trials,
            max_violation: self.worst,
            tolerance: self.tolerance,
            passed: self.worst <= self.tolerance,
        }
    }
}

fn layers_outside(p: &GradedPolynomial, keep: impl Fn(usize) -> bool) -> f64 {
    p.layers().iter().filter(|l| !keep(l.degree())).map(|l| l.max_abs()).fold(0.0, f64::max)
}

pub fn verify_with_sampler(split: &OperatorSplit, trials: usize, sampler: &mut dyn PolySampler) -> HypothesisReport {
    let trials = trials.max(1);
    let dim = split.dim();
    let gamma = split.order();
    let p = split.degree();
    let s = split.top_layer();

    let mut linearity = Tally::new(HypothesisId::PrincipalLinearity, HYPOTHESIS_TOLERANCE);
    let mut layer_action = Tally::new(HypothesisId::PrincipalLayerAction, HYPOTHESIS_TOLERANCE);
    let mut right_inverse = Tally::new(HypothesisId::LayerRightInverse, HYPOTHESIS_TOLERANCE);
    let mut annihilation = Tally::new(HypothesisId::PrincipalAnnihilatesF, HYPOTHESIS_TOLERANCE);
    let mut degree_shift = Tally::new(HypothesisId::RemainderDegreeShift, HYPOTHESIS_TOLERANCE);
    let mut top_layer = Tally::new(HypothesisId::RemainderTopLayer, HYPOTHESIS_TOLERANCE);
    let mut locality = Tally::new(HypothesisId::ProjectionLocality, HYPOTHESIS_TOLERANCE);
    let mut nilpotency = Tally::new(HypothesisId::Nilpotency, NILPOTENCY_TOLERANCE);

    for _ in 0..trials {
        // (1a) linearity of T* on all of A
        let a = sampler.graded(dim, 0, p);
        let b = sampler.graded(dim, 0, p);
        let c = sampler.scalar();
        let lhs = split.apply_principal(&(&a + &b.scale(c)));
        let rhs = &split.apply_principal(&a) + &split.apply_principal(&b).scale(c);
        let scale = lhs.max_abs().max(rhs.max_abs());
        linearity.record(relative(lhs.max_abs_diff(&rhs), scale));
        linearity.trials += 1;

        for n in 0..=s {
            // (1b) T*(A_n) in B_n
            let an = sampler.homogeneous(dim, n + gamma);
            let full = GradedPolynomial::from_layers(dim, [an.clone()]).expect("dim");
            let image = split.apply_principal(&full);
            layer_action.record(relative(layers_outside(&image, |d| d == n), image.max_abs().max(an.max_abs())));
            layer_action.trials += 1;

            // (1d) + S_n lands in V_n
            let bn = sampler.homogeneous(dim, n);
            match split.solve_layer(&bn) {
                Ok(q) => {
                    let mut back = split.apply_principal_layer(&q);
                    back.sub_assign(&bn);
                    let free = split.free_basis(n);
                    let leak = q.terms().filter(|(j, _)| free.contains(j)).map(|(_, c)| c.norm()).fold(0.0, f64::max);
                    right_inverse.record(relative(back.max_abs(), bn.max_abs()).max(relative(leak, q.max_abs())));
                }
                Err(_) => right_inverse.record(f64::INFINITY),
            }
            right_inverse.trials += 1;
        }

        // T*(F) = 0
        let z = sampler.graded(dim, 0, gamma - 1);
        annihilation.record(relative(split.apply_principal(&z).max_abs(), z.max_abs()));
        annihilation.trials += 1;

        // (2b) R(A_n + ... + A_s) has no layer at or below n
        for n in 0..s {
            let x = sampler.graded(dim, n + gamma, p);
            let r = split.apply_remainder(&x);
            degree_shift.record(relative(layers_outside(&r, |d| d > n), x.max_abs().max(r.max_abs())));
            degree_shift.trials += 1;
        }

        // (2c) R(A_s) = 0
        let xs = sampler.graded(dim, p, p);
        top_layer.record(relative(split.apply_remainder(&xs).max_abs(), xs.max_abs()));
        top_layer.trials += 1;

        // projection locality, including the F-component
        let z = sampler.graded(dim, 0, gamma - 1);
        let parts: Vec<HomogeneousPolynomial> = (0..=s).map(|k| sampler.homogeneous(dim, k + gamma)).collect();
        let mut x = z.clone();
        for part in &parts {
            x.add_homogeneous(part);
        }
        let full = split.apply_remainder(&x);
        let mut prefix = z;
        let mut worst: f64 = 0.0;
        for (n, part) in parts.iter().enumerate() {
            let local = split.apply_remainder(&prefix);
            let mut diff = full.project_layer(n);
            diff.sub_assign(&local.project_layer(n));
            worst = worst.max(relative(diff.max_abs(), full.max_abs().max(local.max_abs())));
            prefix.add_homogeneous(part);
        }
        locality.record(worst);
        locality.trials += 1;

        // nilpotency of R o S*, with the input normalized to unit size
        let mut w = sampler.graded(dim, 0, s);
        let norm = w.max_abs();
        if norm > 0.0 {
            w = w.scale_real(1.0 / norm);
        }
        let mut failed = false;
        for _ in 0..=s {
            match split.apply_layer_inverse(&w) {
                Ok(v) => w = split.apply_remainder(&v),
                Err(_) => {
                    failed = true;
                    break;
                }
            }
        }
        nilpotency.record(if failed { f64::INFINITY } else { w.max_abs() });
        nilpotency.trials += 1;
    }

    let checks: Vec<HypothesisCheck> = [
        linearity,
        layer_action,
        right_inverse,
        annihilation,
        degree_shift,
        top_layer,
        locality,
        nilpotency,
    ]
    .into_iter()
    .map(Tally::finish)
    .collect();
    let passed = checks.iter().all(|c| c.passed);
    HypothesisReport { split: split.label().to_string(), seed: None, trials, checks, passed }
}
