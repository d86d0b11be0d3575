//! Operations shared by the `vga` subcommands and the HTTP service.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use vga_core::report::{to_json_string, to_rounded_value, SCHEMA_VERSION};
use vga_core::sbm::{compare_sbm_vga, solve_sbm};
use vga_core::{assess, AssessmentReport, Dataset, Phase4Session, ProgramKind, Result, VgaError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Program {
    Pte,
    Ste,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_REJECTED: u8 = 3;

pub fn exit_code(e: &VgaError) -> u8 {
    if e.is_validation() || matches!(e, VgaError::Io(_) | VgaError::UnknownDmu(_)) {
        EXIT_VALIDATION
    } else if e.is_rejection() {
        EXIT_REJECTED
    } else {
        EXIT_FAILURE
    }
}

pub fn program_kind(program: Program, kappa: Option<f64>) -> Result<ProgramKind> {
    match (program, kappa) {
        (Program::Pte, _) => Ok(ProgramKind::Pte),
        (Program::Ste, Some(k)) => ProgramKind::ste(k),
        (Program::Ste, None) => Err(VgaError::InvalidKappa(f64::NAN)),
    }
}

pub fn assessment_report(d: &Dataset, dmu: &str, kind: ProgramKind) -> Result<AssessmentReport> {
    let a = assess(d, dmu, kind)?;
    Ok(AssessmentReport::build(d, &a))
}

pub fn render_report(report: &AssessmentReport, format: Format) -> Result<String> {
    match format {
        Format::Json => report.to_json_string(),
        Format::Csv => report.to_csv_string(),
    }
}

/// Phases 1 to 3, an optional exclusion round and an optional final scalar. On a
/// rejected target the snapshot without a final block is returned with the error.
pub fn run_phases(
    d: &Dataset,
    dmu: &str,
    exclude: &BTreeSet<String>,
    kappa_target: Option<f64>,
) -> Result<(Value, Option<VgaError>)> {
    let mut session = Phase4Session::start(d, dmu)?.exclude_and_rerun(exclude)?;
    let err = match kappa_target {
        Some(k) => session.finalize(k).err(),
        None => None,
    };
    Ok((session.snapshot()?, err))
}

pub fn sbm_comparison(d: &Dataset, dmu: &str) -> Result<Value> {
    let cmp = compare_sbm_vga(d, dmu)?;
    let detail = solve_sbm(d, dmu)?;
    to_rounded_value(&json!({
        "schema_version": SCHEMA_VERSION,
        "dmu": dmu,
        "rho": cmp.rho,
        "e_rel": cmp.e_rel,
        "e_pte": cmp.e_pte,
        "goal_ratio": cmp.goal_ratio,
        "flagged": cmp.flagged,
        "reasons": cmp.reasons,
        "sbm": detail,
    }))
}

pub fn to_pretty(v: &Value) -> Result<String> {
    to_json_string(v)
}
