//! Command-line front end. Exit codes: 0 success, 2 misuse or invalid input,
//! 3 numerical fault or failed verification.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::dispersion::{curve_csv, double_root_certificate, sample_curve};
use crate::error::{Error, Result};
use crate::output::to_json;
use crate::params::{nondim_with, Alpha0Mode, PhysicalParams};
use crate::profile::{leading_order, ProfileOutcome};
use crate::reduced_dynamics::{homoclinic, integrate, reduced_hamiltonian, ReducedSystem, Trajectory};
use crate::spectral::{eigenfunction_csv, limiting_spectrum, qc0_spectrum, MIN_DOMAIN, MIN_MODES};
use crate::stability::{classify_with, regime_sweep, sweep_csv, Regime, SweepGrid, SweepSummary};
use crate::verify::{run_suite, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

const SCHEMA: &str = "\
Config file (JSON, unknown keys rejected):
  {
    \"params\": {
      \"rho_plus\": ρ₊, \"rho_minus\": ρ₋ (ρ₋ ≥ ρ₊ > 0),
      \"d_plus\": d₊, \"d_minus\": d₋ (> 0),
      \"omega_plus\": ω₊, \"omega_minus\": ω₋,
      \"sigma\": σ (> 0), \"g\": g (> 0), \"c\": c (≠ 0)
    },
    \"alpha0_mode\": {\"mode\": \"pointwise\"} | {\"mode\": \"frozen\", \"c_ref\": c*}   (optional)
    \"sweep\": {\"n_varrho\", \"n_depth\", \"n_vorticity\", \"beta_excess\": [..],
              \"epsilon\", \"vorticity_cap\"}   (optional, any subset)
  }
The config path is given positionally or with --config.
IWAVE_THREADS caps the worker threads (used by the dprime verification).
Exit codes: 0 success, 2 invalid input, 3 numerical fault or failed check.";

#[derive(Debug, Parser)]
#[command(name = "iwave", version, about = "Internal capillary-gravity solitary waves with layer-wise constant vorticity", after_help = SCHEMA)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Config file.
    config: Option<PathBuf>,
    #[arg(long = "config", value_name = "PATH", conflicts_with = "config")]
    config_flag: Option<PathBuf>,
    /// Destination of the primary output; `-` is stdout.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Nondimensional and critical parameters.
    Critical(Common),
    /// Dispersion residual curve (CSV to --out) and real roots (JSON).
    Dispersion {
        #[command(flatten)]
        common: Common,
        /// Largest nondimensional wavenumber sampled.
        #[arg(long, default_value_t = 20.0)]
        kmax: f64,
        #[arg(long, default_value_t = 2001)]
        samples: usize,
        /// Destination of the JSON summary when --out is a file; `-` is stdout.
        #[arg(long)]
        meta: Option<String>,
    },
    /// Leading-order wave profile (CSV to --out) and its metadata (JSON).
    Profile {
        #[command(flatten)]
        common: Common,
        /// Override ε by setting α = α₀ + ε² at fixed β.
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        meta: Option<String>,
    },
    /// Stability verdict from the sign of m′(c).
    Classify(Common),
    /// Flat-state or limiting-operator spectrum.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Operator::Limiting)]
        operator: Operator,
        /// Periodic domain length for the limiting operator.
        #[arg(long = "L", default_value_t = MIN_DOMAIN)]
        domain_length: f64,
        /// Collocation points for the limiting operator.
        #[arg(long = "M", default_value_t = MIN_MODES)]
        modes: usize,
        /// Write the bound-state eigenfunctions as CSV.
        #[arg(long, value_name = "PATH")]
        eigenfunctions: Option<String>,
    },
    /// Reduced planar system: closed-form homoclinic or RK4 trajectory.
    Reduce {
        #[command(flatten)]
        common: Common,
        #[arg(long, conflicts_with = "homoclinic", required_unless_present = "homoclinic")]
        integrate: bool,
        #[arg(long)]
        homoclinic: bool,
        #[arg(long, default_value_t = -15.0, allow_hyphen_values = true)]
        x_min: f64,
        #[arg(long, default_value_t = 15.0, allow_hyphen_values = true)]
        x_max: f64,
        /// Grid spacing; defaults to 0.0075 (4001 points on [−15, 15]) for
        /// --homoclinic and 1e-3 for --integrate.
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        meta: Option<String>,
    },
    /// Self-verification ledger.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
    },
    /// Verdict tables over the single-layer-vorticity regimes.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// JSON file with a sweep grid; overrides the config's `sweep`.
        #[arg(long, value_name = "PATH")]
        grid: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = RegimeChoice::All)]
        regime: RegimeChoice,
        #[arg(long)]
        meta: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Operator {
    Qc0,
    Limiting,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RegimeChoice {
    StableElevation,
    StableDepression,
    UnstableElevation,
    UnstableDepression,
    All,
}

impl RegimeChoice {
    fn regimes(self) -> Vec<Regime> {
        match self {
            RegimeChoice::StableElevation => vec![Regime::StableElevation],
            RegimeChoice::StableDepression => vec![Regime::StableDepression],
            RegimeChoice::UnstableElevation => vec![Regime::UnstableElevation],
            RegimeChoice::UnstableDepression => vec![Regime::UnstableDepression],
            RegimeChoice::All => Regime::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: PhysicalParams,
    #[serde(default)]
    pub alpha0_mode: Alpha0Mode,
    #[serde(default)]
    pub sweep: SweepGrid,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: RunConfig = serde_path_to_error::deserialize(de)
            .map_err(|e| Error::invalid(format!("config at `{}`: {}", e.path(), e.inner())))?;
        config.params.validate().map_err(|e| Error::invalid(format!("config at `params`: {e}")))?;
        if let Alpha0Mode::Frozen { c_ref } = config.alpha0_mode {
            if !c_ref.is_finite() || c_ref == 0.0 {
                return Err(Error::invalid("config at `alpha0_mode.c_ref`: must be finite and nonzero"));
            }
        }
        Ok(config)
    }

    pub fn load(path: &PathBuf) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::invalid(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

impl Common {
    fn path(&self) -> Option<&PathBuf> {
        self.config.as_ref().or(self.config_flag.as_ref())
    }

    fn load(&self) -> Result<RunConfig> {
        let path = self.path().ok_or_else(|| Error::invalid("a config file is required"))?;
        RunConfig::load(path)
    }

    fn load_optional(&self) -> Result<Option<RunConfig>> {
        self.path().map(RunConfig::load).transpose()
    }
}

#[derive(Debug, Serialize)]
struct CriticalOutput {
    alpha: f64,
    beta: f64,
    alpha0: f64,
    beta0: f64,
    beta_star: f64,
    #[serde(rename = "frak_A")]
    frak_a: f64,
    #[serde(rename = "frak_B")]
    frak_b: f64,
    #[serde(rename = "K")]
    coeff_k: Option<f64>,
    epsilon: Option<f64>,
}

#[derive(Debug, Serialize)]
struct ReduceSummary {
    mode: &'static str,
    coeff_k: f64,
    n_points: usize,
    energy_drift: f64,
    max_deviation_from_homoclinic: f64,
}

/// Where a command's CSV and JSON go, given --out and --meta.
struct Sinks {
    csv: Option<String>,
    json: Option<String>,
}

fn sinks(out: &Option<String>, meta: &Option<String>) -> Sinks {
    match out.as_deref() {
        Some("-") => Sinks { csv: Some("-".into()), json: meta.clone() },
        Some(path) => Sinks { csv: Some(path.into()), json: Some(meta.clone().unwrap_or_else(|| "-".into())) },
        None => Sinks { csv: None, json: Some(meta.clone().unwrap_or_else(|| "-".into())) },
    }
}

fn emit(dest: &str, content: &str, stdout: &mut dyn Write) -> Result<()> {
    if dest == "-" {
        stdout.write_all(content.as_bytes())?;
        if !content.ends_with('\n') {
            stdout.write_all(b"\n")?;
        }
    } else {
        std::fs::write(dest, content)
            .map_err(|e| Error::invalid(format!("cannot write {dest}: {e}")))?;
    }
    Ok(())
}

fn emit_pair(sinks: &Sinks, csv: &str, json: &str, stdout: &mut dyn Write) -> Result<()> {
    if let Some(dest) = &sinks.csv {
        emit(dest, csv, stdout)?;
    }
    if let Some(dest) = &sinks.json {
        emit(dest, json, stdout)?;
    }
    Ok(())
}

fn primary_dest(common: &Common) -> &str {
    common.out.as_deref().unwrap_or("-")
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("IWAVE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::invalid(format!("IWAVE_THREADS must be a positive integer, got {raw:?}")))?;
    // A second call in the same process (tests) finds the pool already built.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `args` (program name first) and runs the command. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    let name = command_name(&cli.command);
    match configure_threads().and_then(|_| execute(cli.command, stdout)) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "iwave {name}: {e}");
            match e {
                Error::Numerical(_) => EXIT_NUMERICAL,
                _ => EXIT_INVALID,
            }
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Critical(_) => "critical",
        Command::Dispersion { .. } => "dispersion",
        Command::Profile { .. } => "profile",
        Command::Classify(_) => "classify",
        Command::Spectrum { .. } => "spectrum",
        Command::Reduce { .. } => "reduce",
        Command::Verify { .. } => "verify",
        Command::Sweep { .. } => "sweep",
    }
}

fn execute(command: Command, stdout: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Critical(common) => {
            let config = common.load()?;
            let np = nondim_with(&config.params, config.alpha0_mode)?;
            let out = CriticalOutput {
                alpha: np.alpha,
                beta: np.beta,
                alpha0: np.alpha0,
                beta0: np.beta0,
                beta_star: np.beta_star,
                frak_a: np.frak_a,
                frak_b: np.frak_b,
                coeff_k: np.coeff_k,
                epsilon: np.epsilon,
            };
            emit(primary_dest(&common), &to_json(&out)?, stdout)?;
        }
        Command::Dispersion { common, kmax, samples, meta } => {
            let config = common.load()?;
            let np = nondim_with(&config.params, config.alpha0_mode)?;
            let curve = sample_curve(&np, kmax, samples)?;
            let certificate = double_root_certificate(&np.with_alpha(np.alpha0))?;
            let summary = serde_json::json!({
                "alpha": np.alpha,
                "alpha0": np.alpha0,
                "roots": curve.roots,
                "critical_certificate": certificate,
            });
            emit_pair(&sinks(&common.out, &meta), &curve_csv(&curve), &to_json(&summary)?, stdout)?;
        }
        Command::Profile { common, epsilon, meta } => {
            let config = common.load()?;
            let mut p = config.params;
            if let Some(eps) = epsilon {
                if !(eps > 0.0) || !eps.is_finite() {
                    return Err(Error::invalid(format!("--epsilon must be positive, got {eps}")));
                }
                let np = nondim_with(&p, config.alpha0_mode)?;
                p = PhysicalParams::from_alpha_beta(&p, np.alpha0 + eps * eps, np.beta)?;
            }
            let outcome = leading_order(&p, None)?;
            let (csv, summary) = match &outcome {
                ProfileOutcome::Wave(w) => {
                    let mut csv = String::from("x,eta\n");
                    for (x, e) in w.x_grid.iter().zip(&w.eta) {
                        csv.push_str(&format!("{},{}\n", crate::fmt_f64(*x), crate::fmt_f64(*e)));
                    }
                    let summary = serde_json::json!({
                        "outcome": "wave",
                        "epsilon": w.epsilon,
                        "amplitude": w.amplitude,
                        "decay_scale": w.decay_scale,
                        "polarity": w.polarity,
                        "n_points": w.x_grid.len(),
                    });
                    (csv, summary)
                }
                ProfileOutcome::Degenerate { frak_b } => {
                    ("x,eta\n".to_string(), serde_json::json!({ "outcome": "degenerate", "frak_b": frak_b }))
                }
            };
            emit_pair(&sinks(&common.out, &meta), &csv, &to_json(&summary)?, stdout)?;
        }
        Command::Classify(common) => {
            let config = common.load()?;
            let report = classify_with(&config.params, config.alpha0_mode)?;
            emit(primary_dest(&common), &to_json(&report)?, stdout)?;
        }
        Command::Spectrum { common, operator, domain_length, modes, eigenfunctions } => {
            let result = match operator {
                Operator::Qc0 => qc0_spectrum(&common.load()?.params)?,
                Operator::Limiting => {
                    common.load_optional()?;
                    limiting_spectrum(domain_length, modes)?
                }
            };
            if let Some(dest) = eigenfunctions {
                emit(&dest, &eigenfunction_csv(&result), stdout)?;
            }
            emit(primary_dest(&common), &to_json(&result)?, stdout)?;
        }
        Command::Reduce { common, integrate: run_rk4, homoclinic: _, x_min, x_max, step, meta } => {
            let config = common.load()?;
            let np = nondim_with(&config.params, config.alpha0_mode)?;
            let sys = ReducedSystem::from_params(&np)?;
            if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
                return Err(Error::invalid("need finite --x-min < --x-max"));
            }
            let step = step.unwrap_or(if run_rk4 { 1e-3 } else { 0.0075 });
            let trajectory = if run_rk4 {
                integrate(homoclinic(x_min, &sys)?, &sys, x_max, step)?
            } else {
                if !(step > 0.0) || !step.is_finite() {
                    return Err(Error::invalid("--step must be positive"));
                }
                let n = ((x_max - x_min) / step).round() as usize + 1;
                let states = (0..n)
                    .map(|i| homoclinic(x_min + (x_max - x_min) * i as f64 / (n - 1).max(1) as f64, &sys))
                    .collect::<Result<Vec<_>>>()?;
                let energies = states.iter().map(|s| reduced_hamiltonian(s, &sys)).collect();
                Trajectory { states, energies }
            };
            let mut deviation = 0.0f64;
            for s in &trajectory.states {
                let exact = homoclinic(s.x, &sys)?;
                deviation = deviation.max((s.q - exact.q).abs().max((s.p - exact.p).abs()));
            }
            let summary = ReduceSummary {
                mode: if run_rk4 { "integrate" } else { "homoclinic" },
                coeff_k: sys.coeff_k,
                n_points: trajectory.states.len(),
                energy_drift: trajectory.energy_drift(),
                max_deviation_from_homoclinic: deviation,
            };
            emit_pair(&sinks(&common.out, &meta), &trajectory.to_csv(), &to_json(&summary)?, stdout)?;
        }
        Command::Verify { common, suite } => {
            let config = common.load()?;
            let ledger = run_suite(suite, &config.params)?;
            emit(primary_dest(&common), &to_json(&ledger)?, stdout)?;
            if !ledger.all_passed {
                return Ok(EXIT_NUMERICAL);
            }
        }
        Command::Sweep { common, grid, regime, meta } => {
            let config = common.load_optional()?;
            let sweep_grid = match grid {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| Error::invalid(format!("cannot read grid {}: {e}", path.display())))?;
                    let de = &mut serde_json::Deserializer::from_str(&text);
                    serde_path_to_error::deserialize(de)
                        .map_err(|e| Error::invalid(format!("grid at `{}`: {}", e.path(), e.inner())))?
                }
                None => config.map(|c| c.sweep).unwrap_or_default(),
            };
            let mut rows = Vec::new();
            let mut summaries: Vec<SweepSummary> = Vec::new();
            for r in regime.regimes() {
                let (summary, mut regime_rows) = regime_sweep(r, &sweep_grid)?;
                summaries.push(summary);
                rows.append(&mut regime_rows);
            }
            let summary = serde_json::json!({ "grid": sweep_grid, "summaries": summaries });
            emit_pair(&sinks(&common.out, &meta), &sweep_csv(&rows), &to_json(&summary)?, stdout)?;
        }
    }
    Ok(EXIT_OK)
}
