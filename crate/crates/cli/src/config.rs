use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use gpw_core::frame::OperatorSplit;
use gpw_core::lab::{manufactured_helmholtz, random_kappa2, OModePreset};
use gpw_core::operators::{make_convected_split, make_helmholtz_split, CoefficientJet};
use gpw_core::poly::{GradedPolynomial, TermRecord};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const CONFIG_VERSION: u32 = 1;

pub type ExactSolution = Box<dyn Fn(&[f64]) -> gpw_core::Result<Complex64>>;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub dimension: usize,
    pub degree: usize,
    pub center: Vec<f64>,
    pub directions: usize,
    #[serde(default)]
    pub h: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub operator: OperatorConfig,
}

fn default_trials() -> usize {
    50
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorConfig {
    Helmholtz { kappa2: HelmholtzCoefficient },
    /// `rho` and each Mach component as global polynomials.
    Convected { kappa: f64, rho: Vec<TermRecord>, mach: Vec<Vec<TermRecord>> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum HelmholtzCoefficient {
    ConstantKappa { kappa: f64 },
    OmodeLinear {
        #[serde(default = "omode_omega")]
        omega: f64,
        #[serde(default = "one")]
        c: f64,
        #[serde(default = "one")]
        x_cut: f64,
    },
    /// Exact solution `exp(g)` with `g` a global polynomial.
    Manufactured { g: Vec<TermRecord> },
    /// Global polynomial `kappa^2`.
    Polynomial { kappa2: Vec<TermRecord> },
    /// Taylor data of `kappa^2` about the center, known to `order`.
    Jet { taylor: Vec<TermRecord>, order: Option<usize> },
    /// Seeded random real jet about the center.
    RandomJet { kappa0_sq: f64, degree: usize },
}

fn omode_omega() -> f64 {
    OModePreset::default().omega
}

fn one() -> f64 {
    1.0
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let config: RunConfig = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.version == CONFIG_VERSION, "unsupported config version {}, expected {CONFIG_VERSION}", self.version);
        ensure!(matches!(self.dimension, 2 | 3), "dimension must be 2 or 3, got {}", self.dimension);
        ensure!(self.degree >= 2, "degree must be at least 2, got {}", self.degree);
        ensure!(self.directions >= 1, "need at least one direction");
        ensure!(self.center.len() == self.dimension, "center has {} coordinates for dimension {}", self.center.len(), self.dimension);
        ensure!(self.center.iter().all(|v| v.is_finite()), "center must be finite");
        ensure!(self.h.iter().all(|h| h.is_finite() && *h > 0.0), "radii must be positive");
        ensure!(self.h.windows(2).all(|w| w[1] < w[0]), "radii must be strictly decreasing");
        if let OperatorConfig::Convected { mach, kappa, .. } = &self.operator {
            ensure!(mach.len() == self.dimension, "{} Mach components for dimension {}", mach.len(), self.dimension);
            ensure!(kappa.is_finite(), "kappa must be finite");
        }
        Ok(())
    }

    fn global(&self, records: &[TermRecord]) -> Result<GradedPolynomial> {
        GradedPolynomial::from_records(self.dimension, records).map_err(Into::into)
    }

    fn global_jet(&self, records: &[TermRecord]) -> Result<CoefficientJet> {
        Ok(CoefficientJet::from_global_polynomial(self.center.clone(), &self.global(records)?)?)
    }

    /// `kappa^2` about the center.
    fn helmholtz_kappa2(&self, coefficient: &HelmholtzCoefficient, seed: u64) -> Result<CoefficientJet> {
        let d = self.dimension;
        let from_global = |g: GradedPolynomial| -> Result<CoefficientJet> {
            Ok(CoefficientJet::from_global_polynomial(self.center.clone(), &g)?)
        };
        match coefficient {
            HelmholtzCoefficient::ConstantKappa { kappa } => {
                ensure!(kappa.is_finite(), "kappa must be finite");
                from_global(GradedPolynomial::constant(d, Complex64::new(kappa * kappa, 0.0)))
            }
            HelmholtzCoefficient::OmodeLinear { omega, c, x_cut } => {
                let preset = OModePreset { omega: *omega, c: *c, x_cut: *x_cut };
                preset.validate()?;
                from_global(preset.kappa2(d))
            }
            HelmholtzCoefficient::Manufactured { g } => from_global(manufactured_helmholtz(&self.global(g)?).kappa2().clone()),
            HelmholtzCoefficient::Polynomial { kappa2 } => from_global(self.global(kappa2)?),
            HelmholtzCoefficient::Jet { taylor, order } => {
                let t = self.global(taylor)?;
                let jet = match order {
                    Some(k) => CoefficientJet::truncated(self.center.clone(), t, *k)?,
                    None => CoefficientJet::polynomial(self.center.clone(), t)?,
                };
                Ok(jet)
            }
            HelmholtzCoefficient::RandomJet { kappa0_sq, degree } => {
                ensure!(kappa0_sq.is_finite(), "kappa0_sq must be finite");
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let t = random_kappa2(&mut rng, d, *degree, *kappa0_sq);
                Ok(CoefficientJet::truncated(self.center.clone(), t, *degree)?)
            }
        }
    }

    pub fn split(&self, seed: u64) -> Result<OperatorSplit> {
        match &self.operator {
            OperatorConfig::Helmholtz { kappa2 } => {
                let jet = self.helmholtz_kappa2(kappa2, seed)?;
                Ok(make_helmholtz_split(jet, self.degree, self.dimension)?)
            }
            OperatorConfig::Convected { kappa, rho, mach } => {
                let rho = self.global_jet(rho)?;
                let mach = mach.iter().map(|m| self.global_jet(m)).collect::<Result<Vec<_>>>()?;
                Ok(make_convected_split(&rho, &mach, Complex64::new(*kappa, 0.0), self.degree, self.dimension)?)
            }
        }
    }

    /// Exact solution for convergence studies.
    pub fn exact_solution(&self) -> Result<ExactSolution> {
        match &self.operator {
            OperatorConfig::Helmholtz { kappa2: HelmholtzCoefficient::Manufactured { g } } => {
                let m = manufactured_helmholtz(&self.global(g)?);
                Ok(Box::new(move |x| m.solution(x)))
            }
            OperatorConfig::Helmholtz { kappa2: HelmholtzCoefficient::ConstantKappa { kappa } } => {
                // plane wave halfway between the first two family directions
                let t = std::f64::consts::PI / self.directions as f64;
                let mut d = vec![0.0; self.dimension];
                d[0] = t.cos();
                d[1] = t.sin();
                let k = *kappa;
                let x0 = self.center.clone();
                Ok(Box::new(move |x| {
                    let phase: f64 = x.iter().zip(&x0).zip(&d).map(|((a, b), di)| (a - b) * di).sum();
                    Ok((Complex64::i() * k * phase).exp())
                }))
            }
            _ => bail!("converge needs an exact solution: use the manufactured or constant_kappa preset"),
        }
    }
}
