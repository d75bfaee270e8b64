use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use gpw_core::basis::{build_family, directions, BasisRecord, GpwFunction, CERTIFICATE_TOLERANCE};
use gpw_core::frame::{verify_split_hypotheses, HypothesisReport, OperatorSplit};
use gpw_core::lab::{convergence_study, gpw_dimension_check, qt_residual, SamplingConfig, StudyMeta, RANK_TOLERANCE};
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{write_json, write_text};

pub const BASIS_FILE: &str = "basis.json";

/// Outcome of a command that ran to completion.
pub struct Outcome {
    pub passed: bool,
    pub summary: String,
}

/// Setup problems, reported with exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub anyhow::Error);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_error<T>(r: Result<T>) -> Result<T> {
    r.map_err(|e| ConfigError(e).into())
}

pub struct RunContext {
    pub config: RunConfig,
    pub seed: u64,
    pub out: PathBuf,
}

fn split(ctx: &RunContext) -> Result<OperatorSplit> {
    config_error(ctx.config.split(ctx.seed))
}

fn direction_set(ctx: &RunContext) -> Result<Vec<gpw_core::basis::Direction>> {
    config_error(directions(ctx.config.dimension, ctx.config.directions).map_err(Into::into))
}

pub fn build(ctx: &RunContext) -> Result<Outcome> {
    let split = split(ctx)?;
    let dirs = direction_set(ctx)?;
    let family = build_family(&split, &dirs, &ctx.config.center).context("building the GPW family")?;
    let records: Vec<BasisRecord> = family.iter().map(GpwFunction::to_record).collect();
    write_json(&ctx.out.join(BASIS_FILE), &records)?;
    let worst = family.iter().map(GpwFunction::residual).fold(0.0, f64::max);
    Ok(Outcome { passed: true, summary: format!("built {} GPWs, max relative residual {worst:.3e}", family.len()) })
}

#[derive(Serialize)]
struct FunctionCheck {
    index: usize,
    direction: gpw_core::basis::Direction,
    recorded_residual: f64,
    residual: f64,
    passed: bool,
    reason: Option<String>,
}

#[derive(Serialize)]
struct VerifyReport {
    operator: String,
    tolerance: f64,
    hypotheses: HypothesisReport,
    functions: Vec<FunctionCheck>,
    failing: Vec<usize>,
    passed: bool,
}

fn check_function(ctx: &RunContext, split: &OperatorSplit, index: usize, record: &BasisRecord) -> FunctionCheck {
    let mut check = FunctionCheck {
        index,
        direction: record.direction.clone(),
        recorded_residual: record.residual_norm,
        residual: f64::INFINITY,
        passed: false,
        reason: None,
    };
    let phi = match GpwFunction::from_record(record) {
        Ok(phi) => phi,
        Err(e) => {
            check.reason = Some(e.to_string());
            return check;
        }
    };
    if phi.x0() != ctx.config.center.as_slice() || phi.degree() != split.degree() || phi.operator() != split.label() {
        check.reason = Some("center, degree or operator differs from the configuration".into());
        return check;
    }
    let constant = phi.phase().coeff(&gpw_core::poly::MultiIndex::zero(split.dim()));
    if constant.norm() != 0.0 {
        check.reason = Some("phase has a nonzero constant term".into());
        return check;
    }
    match qt_residual(split, phi.phase()) {
        Ok(_) => {
            check.residual = split.relative_residual(phi.phase());
            check.passed = check.residual <= CERTIFICATE_TOLERANCE;
            if !check.passed {
                check.reason = Some("quasi-Trefftz residual above tolerance".into());
            }
        }
        Err(e) => check.reason = Some(e.to_string()),
    }
    check
}

pub fn verify(ctx: &RunContext, basis: &Path) -> Result<Outcome> {
    let split = split(ctx)?;
    let text = config_error(std::fs::read_to_string(basis).with_context(|| format!("reading {}", basis.display())))?;
    let records: Vec<BasisRecord> = config_error(serde_json::from_str(&text).with_context(|| format!("parsing {}", basis.display())))?;
    let hypotheses = verify_split_hypotheses(&split, ctx.config.trials, ctx.seed);
    let functions: Vec<FunctionCheck> = records.iter().enumerate().map(|(i, r)| check_function(ctx, &split, i, r)).collect();
    let failing: Vec<usize> = functions.iter().filter(|f| !f.passed).map(|f| f.index).collect();
    for f in functions.iter().filter(|f| !f.passed) {
        eprintln!("function {} (direction {:?}): {}", f.index, f.direction.components(), f.reason.as_deref().unwrap_or(""));
    }
    for c in hypotheses.checks.iter().filter(|c| !c.passed) {
        eprintln!("hypothesis {:?} violated: {:.3e} > {:.1e}", c.hypothesis, c.max_violation, c.tolerance);
    }
    let passed = hypotheses.passed && failing.is_empty() && !records.is_empty();
    let report = VerifyReport {
        operator: split.label().to_string(),
        tolerance: CERTIFICATE_TOLERANCE,
        hypotheses,
        functions,
        failing,
        passed,
    };
    write_json(&ctx.out.join("verify.json"), &report)?;
    Ok(Outcome { passed, summary: format!("verified {} functions: {}", records.len(), if passed { "pass" } else { "FAIL" }) })
}

pub fn rank(ctx: &RunContext) -> Result<Outcome> {
    let split = split(ctx)?;
    let dirs = direction_set(ctx)?;
    let report = gpw_dimension_check(&split, &dirs, &ctx.config.center, RANK_TOLERANCE).context("rank study")?;
    write_json(&ctx.out.join("rank.json"), &report)?;
    Ok(Outcome {
        passed: report.equal,
        summary: format!(
            "plane-wave rank {}, GPW rank {}, D_d = {}",
            report.plane_wave.rank, report.gpw.rank, report.expected
        ),
    })
}

pub fn converge(ctx: &RunContext) -> Result<Outcome> {
    let split = split(ctx)?;
    let dirs = direction_set(ctx)?;
    let u = config_error(ctx.config.exact_solution())?;
    let family = build_family(&split, &dirs, &ctx.config.center).context("building the GPW family")?;
    let meta = StudyMeta {
        operator: split.label().to_string(),
        dim: split.dim(),
        degree: split.degree(),
        members: family.len(),
        seed: Some(ctx.seed),
    };
    let report = config_error(
        convergence_study(&*u, &family, &ctx.config.center, &ctx.config.h, split.degree(), &SamplingConfig::default(), meta)
            .map_err(Into::into),
    )?;
    write_text(&ctx.out.join("convergence.csv"), &report.to_csv())?;
    write_json(&ctx.out.join("convergence.json"), &report)?;
    let slope = report.slope.map_or("exact".to_string(), |s| format!("{s:.3}"));
    Ok(Outcome { passed: report.accepted, summary: format!("slope {slope}, target {:.2}", report.target) })
}
