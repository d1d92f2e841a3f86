use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use wavebif::amplitude::{integrate_radial_with, AmplitudeState};
use wavebif::dns::{evolve, write_checkpoint, FieldState, ObserverConfig, Stepper};
use wavebif::error::Error;
use wavebif::harness::{
    emit_diagram, run_bifurcation_sweep, run_symmetry_audit, Experiment, ExperimentConfig, ReduceConfig, RunConfig,
    ToleranceBlock,
};
use wavebif::reduction::{classify_bifurcation, BifurcationVerdict};
use wavebif::spectral::{admissibility_report, dispersion_roots, AdmissibilityReport};
use wavebif::{
    amplitude_equation, build_basis, predicted_wave, second_order_correction, AmplitudeEquation, Complex64, FluxModel,
};

#[derive(Parser, Debug)]
#[command(
    name = "wavebif",
    version,
    about = "Stationary wave bifurcation analysis and simulation"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// JSON configuration file for the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write outputs into this directory instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON tolerance block; missing fields keep their defaults.
    #[arg(long = "tol-block", global = true)]
    tol_block: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dispersion roots for k = 1..kmax as CSV.
    Spectrum {
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        delta: f64,
        #[arg(long, allow_hyphen_values = true)]
        sigma1: f64,
        #[arg(long, default_value_t = 32)]
        kmax: u32,
    },
    /// Check a critical configuration and print the per-condition verdict as JSON.
    Admissible {
        #[arg(long)]
        k0: u32,
        #[arg(long, allow_hyphen_values = true)]
        ac: f64,
        #[arg(long, allow_hyphen_values = true)]
        deltac: f64,
        #[arg(long, allow_hyphen_values = true)]
        sigma1: f64,
        #[arg(long)]
        kmax: Option<u32>,
    },
    /// Reduction basis, amplitude coefficients and verdict as JSON (`--config` = {k0, ac, deltac, flux}).
    Reduce,
    /// Sampled bifurcated wave as CSV (`--config` as for reduce).
    Predict {
        #[arg(long, allow_hyphen_values = true)]
        mu: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, default_value_t = 64)]
        n: usize,
        /// Include the second-harmonic correction.
        #[arg(long)]
        second_order: bool,
    },
    /// Truncated amplitude dynamics as CSV.
    Amplitude {
        #[arg(long = "aCoef", alias = "a-coef", allow_hyphen_values = true)]
        a_coef: f64,
        #[arg(long = "bCoef", alias = "b-coef", allow_hyphen_values = true)]
        b_coef: f64,
        #[arg(long, allow_hyphen_values = true)]
        mu: f64,
        #[arg(long)]
        r0: f64,
        #[arg(long)]
        tend: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
    },
    /// Direct simulation with observer records as CSV (`--config` = run description).
    Simulate {
        /// Also write the final state as a binary checkpoint.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// DNS sweep against the predicted branch (`--config` = experiment description).
    Sweep {
        /// Allow |mu| above the perturbative limit.
        #[arg(long)]
        allow_large_mu: bool,
    },
    /// Symmetry audit table as CSV (`--config` = experiment description).
    Audit,
}

/// Failure classes with their exit codes.
enum Failure {
    Usage(anyhow::Error),
    Rejected(anyhow::Error),
    Numerical(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Rejected(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Usage(e) | Failure::Rejected(e) | Failure::Numerical(e) => e,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<Error>() {
            Some(Error::NotAdmissible(_)) => Failure::Rejected(e),
            Some(
                Error::Blowup { .. } | Error::NotConverged { .. } | Error::Resonance { .. } | Error::Degenerate { .. },
            ) => Failure::Numerical(e),
            _ => Failure::Usage(e),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let g = &cli.global;
    let tol = match &g.tol_block {
        Some(p) => ToleranceBlock::load(p)?,
        None => ToleranceBlock::default(),
    };
    match &cli.command {
        Command::Spectrum { a, delta, sigma1, kmax } => spectrum(g, *a, *delta, *sigma1, *kmax),
        Command::Admissible {
            k0,
            ac,
            deltac,
            sigma1,
            kmax,
        } => admissible(g, &tol, *k0, *ac, *deltac, *sigma1, *kmax),
        Command::Reduce => reduce(g, &tol),
        Command::Predict {
            mu,
            theta,
            n,
            second_order,
        } => predict(g, &tol, *mu, *theta, *n, *second_order),
        Command::Amplitude {
            a_coef,
            b_coef,
            mu,
            r0,
            tend,
            dt,
        } => amplitude(g, *a_coef, *b_coef, *mu, *r0, *tend, *dt),
        Command::Simulate { checkpoint } => simulate(g, checkpoint.as_deref()),
        Command::Sweep { allow_large_mu } => sweep(g, &tol, *allow_large_mu),
        Command::Audit => audit(g, &tol),
    }
}

fn read_config<T: DeserializeOwned>(g: &Global) -> anyhow::Result<T> {
    let Some(path) = &g.config else {
        bail!("this subcommand needs --config PATH");
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Print `body`, or write it to `<out>/<name>` when `--out` is given.
fn emit(g: &Global, name: &str, body: &str) -> anyhow::Result<()> {
    match &g.out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(name);
            fs::write(&path, body).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn spectrum(g: &Global, a: f64, delta: f64, sigma1: f64, kmax: u32) -> Outcome {
    let f = FluxModel::new(sigma1, 0.0, 0.0);
    let mut out = String::from("k,ReLambdaPlus,ImLambdaPlus,ReLambdaMinus,ImLambdaMinus\n");
    for k in 1..=kmax as i64 {
        let r = dispersion_roots(k, a, delta, &f)?;
        let (p, m) = (r.lambda_plus, r.lambda_minus);
        writeln!(out, "{k},{:e},{:e},{:e},{:e}", p.re, p.im, m.re, m.im).expect("string write");
    }
    emit(g, "spectrum.csv", &out)?;
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct AdmissibleOutput<'a> {
    admissible: bool,
    first_failure: Option<&'a wavebif::spectral::ConditionCheck>,
    #[serde(flatten)]
    report: &'a AdmissibilityReport,
}

fn admissible(
    g: &Global,
    tol: &ToleranceBlock,
    k0: u32,
    ac: f64,
    deltac: f64,
    sigma1: f64,
    kmax: Option<u32>,
) -> Outcome {
    let f = FluxModel::new(sigma1, 0.0, 0.0);
    let report = admissibility_report(k0, ac, deltac, &f, kmax.unwrap_or(tol.k_max), tol.spectral())?;
    let out = AdmissibleOutput {
        admissible: report.admissible(),
        first_failure: report.first_failure(),
        report: &report,
    };
    emit(g, "admissible.json", &to_json(&out)?)?;
    match report.first_failure() {
        None => Ok(()),
        Some(c) => Err(Failure::Rejected(anyhow::anyhow!(
            "not admissible: {:?} fails (witness k = {:?})",
            c.condition,
            c.witness
        ))),
    }
}

fn load_reduction(
    g: &Global,
    tol: &ToleranceBlock,
) -> anyhow::Result<(ReduceConfig, FluxModel, wavebif::CriticalConfiguration)> {
    let rc: ReduceConfig = read_config(g)?;
    let flux = FluxModel::try_from(rc.flux.clone())?;
    let cfg = rc.critical.certify(&flux, tol).map_err(Error::from)?;
    Ok((rc, flux, cfg))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ReduceOutput {
    kappa: Complex64,
    xi: wavebif::reduction::Harmonic,
    eta: wavebif::reduction::Harmonic,
    a_coef: f64,
    b_coef: f64,
    second_harmonic_coef: f64,
    verdict: BifurcationVerdict,
}

fn reduce(g: &Global, tol: &ToleranceBlock) -> Outcome {
    let (_, flux, cfg) = load_reduction(g, tol)?;
    let basis = build_basis(&cfg)?;
    let eq: AmplitudeEquation = amplitude_equation(&cfg, &flux)?;
    let verdict = classify_bifurcation(&eq, tol.degeneracy_tol)?;
    let corr = second_order_correction(&cfg, &flux)?;
    let out = ReduceOutput {
        kappa: basis.kappa,
        xi: basis.xi(),
        eta: basis.eta(),
        a_coef: eq.a_coef,
        b_coef: eq.b_coef,
        second_harmonic_coef: corr.tau_harmonic_ratio(),
        verdict,
    };
    emit(g, "reduce.json", &to_json(&out)?)?;
    Ok(())
}

fn predict(g: &Global, tol: &ToleranceBlock, mu: f64, theta: f64, n: usize, second_order: bool) -> Outcome {
    let (_, flux, cfg) = load_reduction(g, tol)?;
    let basis = build_basis(&cfg)?;
    let eq = amplitude_equation(&cfg, &flux)?;
    let corr = second_order_correction(&cfg, &flux)?;
    let wave = predicted_wave(&eq, &basis, second_order.then_some(&corr), mu, theta, n)?;
    let mut out = String::from("x,tau,u\n");
    for x in FieldState::grid(n) {
        let (t, u) = wave.eval(x);
        writeln!(out, "{x:e},{t:e},{u:e}").expect("string write");
    }
    emit(g, "predict.csv", &out)?;
    Ok(())
}

fn amplitude(g: &Global, a_coef: f64, b_coef: f64, mu: f64, r0: f64, tend: f64, dt: f64) -> Outcome {
    let traj = integrate_radial_with(a_coef * mu, b_coef, AmplitudeState::new(r0, 0.0)?, tend, dt, None)?;
    let mut out = String::from("t,r,theta\n");
    for p in traj {
        writeln!(out, "{:e},{:e},{:e}", p.t, p.r, p.theta).expect("string write");
    }
    emit(g, "amplitude.csv", &out)?;
    Ok(())
}

fn simulate(g: &Global, checkpoint: Option<&Path>) -> Outcome {
    let mut rc: RunConfig = read_config(g)?;
    if let Some(seed) = g.seed {
        rc.initial.seed = seed;
    }
    let flux = FluxModel::try_from(rc.flux.clone())?;
    let n = rc.grid.n;
    let mut state = FieldState::zeros(n)?;
    let ic = rc.initial;
    let k0 = ic.k0;
    let tau = Complex64::new(ic.amplitude, 0.0);
    let u = if ic.along_kernel {
        Complex64::new(0.0, -rc.params.a * (k0 as f64).powi(3) * ic.amplitude)
    } else {
        Complex64::new(0.0, 0.0)
    };
    state.set_mode(k0, tau, u)?;
    if ic.noise > 0.0 {
        state.add_noise(ic.seed, ic.noise, n / 4);
    }
    let mut stepper = Stepper::new(n, rc.params(), flux, rc.stepper)?;
    let obs = ObserverConfig {
        stride: rc.observers.stride,
        k0,
    };
    let ev = evolve(state, &mut stepper, rc.t_end, &obs)?;
    let mut out = String::from("t,absTauK0,argTauK0,absTauK2,meanTau,meanU\n");
    for r in &ev.records {
        writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e},{:e}",
            r.t, r.abs_tau_k0, r.arg_tau_k0, r.abs_tau_k2, r.mean_tau, r.mean_u
        )
        .expect("string write");
    }
    emit(g, "simulate.csv", &out)?;
    if let Some(path) = checkpoint {
        let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_checkpoint(&ev.state, std::io::BufWriter::new(file))?;
    }
    Ok(())
}

fn load_experiment(g: &Global, tol: &ToleranceBlock, allow_large_mu: bool) -> anyhow::Result<Experiment> {
    let mut ec: ExperimentConfig = read_config(g)?;
    if let Some(seed) = g.seed {
        ec.seed = seed;
    }
    ec.allow_large_mu |= allow_large_mu;
    Ok(Experiment::from_config(&ec, tol.clone())?)
}

fn sweep(g: &Global, tol: &ToleranceBlock, allow_large_mu: bool) -> Outcome {
    let exp = load_experiment(g, tol, allow_large_mu)?;
    let report = run_bifurcation_sweep(&exp)?;
    match &g.out {
        Some(dir) => {
            emit_diagram(&exp, &report, dir)?;
            emit(g, "report.json", &to_json(&report)?)?;
        }
        None => print!("{}", to_json(&report)?),
    }
    let stuck: Vec<f64> = report.rows.iter().filter(|r| !r.converged).map(|r| r.mu).collect();
    if stuck.is_empty() {
        Ok(())
    } else {
        Err(Failure::Numerical(anyhow::anyhow!(
            "no quasi-steady state for mu = {stuck:?}"
        )))
    }
}

fn audit(g: &Global, tol: &ToleranceBlock) -> Outcome {
    let exp = load_experiment(g, tol, false)?;
    let table = run_symmetry_audit(&exp)?;
    let mut out = String::from("check,residual,tol,expectViolation,passed\n");
    for r in &table.rows {
        writeln!(
            out,
            "{},{:e},{:e},{},{}",
            r.name, r.residual, r.tol, r.expect_violation, r.passed
        )
        .expect("string write");
    }
    emit(g, "audit.csv", &out)?;
    if table.passed() {
        Ok(())
    } else {
        Err(Failure::Numerical(anyhow::anyhow!("symmetry audit failed")))
    }
}
