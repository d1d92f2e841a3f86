use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::config::ToleranceBlock;
use super::experiment::Experiment;
use super::sweep::ComparisonReport;
use crate::dns::StepperConfig;
use crate::error::{Error, Result};
use crate::model::FluxConfig;
use crate::reduction::Stability;

fn stability_name(s: Stability) -> &'static str {
    match s {
        Stability::Stable => "stable",
        Stability::Unstable => "unstable",
    }
}

/// `branch.csv`: for each `|mu|` of the report a row at `-|mu|` and `+|mu|`, sorted by `mu`.
///
/// `rBranch` is zero (and its stability empty) where no branch exists.
pub fn branch_csv(report: &ComparisonReport) -> Result<String> {
    if report.rows.is_empty() {
        return Err(Error::InvalidParameter("empty report".into()));
    }
    let mut mus: Vec<f64> = report.rows.iter().flat_map(|r| [-r.mu.abs(), r.mu.abs()]).collect();
    mus.sort_by(f64::total_cmp);
    mus.dedup();
    let v = &report.verdict;
    let mut out = String::from("mu,rTrivialStability,rBranch,rBranchStability\n");
    for mu in mus {
        let (r, st) = match v.predicted_amplitude(mu) {
            Some(r) => (r, stability_name(v.branch_stability)),
            None => (0.0, ""),
        };
        writeln!(out, "{mu:e},{},{r:.17e},{st}", stability_name(v.trivial_stability(mu))).expect("string write");
    }
    Ok(out)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Provenance<'a> {
    k0: u32,
    a_c: f64,
    delta_c: f64,
    flux: FluxConfig,
    n: usize,
    stepper: StepperConfig,
    seed: u64,
    noise: f64,
    tolerances: &'a ToleranceBlock,
    report: &'a ComparisonReport,
}

pub fn runs_json(exp: &Experiment, report: &ComparisonReport) -> Result<String> {
    let p = Provenance {
        k0: exp.cfg.k0(),
        a_c: exp.cfg.a_c(),
        delta_c: exp.cfg.delta_c(),
        flux: FluxConfig::from(&exp.flux),
        n: exp.n,
        stepper: exp.stepper,
        seed: exp.seed,
        noise: exp.noise,
        tolerances: &exp.tol,
        report,
    };
    serde_json::to_string_pretty(&p).map_err(|e| Error::Io(e.to_string()))
}

/// Write `branch.csv` and `runs.json` into `dir` (created if missing).
pub fn emit_diagram(exp: &Experiment, report: &ComparisonReport, dir: &Path) -> Result<()> {
    let csv = branch_csv(report)?;
    let json = runs_json(exp, report)?;
    fs::create_dir_all(dir)?;
    fs::write(dir.join("branch.csv"), csv)?;
    fs::write(dir.join("runs.json"), json)?;
    Ok(())
}
