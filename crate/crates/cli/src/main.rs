mod config;
mod error;
mod model;
mod output;
mod presets;
mod scenarios;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Kind, ScenarioConfig};
use error::CliError;
use output::Run;

/// Scenario runner for Kerr Bragg gratings in an EIT medium.
#[derive(Parser)]
#[command(name = "eitbragg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Susceptibility spectra (chi_a, chi3, full) against probe detuning.
    Susceptibility(Common),
    /// Transfer-matrix reflectivity and Bloch dispersion.
    Bandstructure(Common),
    /// Coupled-mode coefficients and validity ratios.
    Coefficients(Common),
    /// Analytic Bragg soliton profile.
    Soliton(Common),
    /// Split-step propagation of the coupled-mode equations.
    Propagate(Common),
    /// Launch power, soliton period and workable velocity regions.
    DesignMap(Common),
    /// Check a configuration and preview derived constants; writes nothing.
    Validate(Common),
    /// Run the scenario named by `scenario.kind`.
    Run(Common),
    /// List the built-in presets.
    Presets,
}

#[derive(Args)]
struct Common {
    /// TOML scenario file; merged over --preset when both are given.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: scenario.out_dir, then "out").
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for parallel sweeps.
    #[arg(long)]
    threads: Option<usize>,
    /// Built-in preset: fig2, fig3, fig4, soliton-demo.
    #[arg(long)]
    preset: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, kind) = match cli.command {
        Command::Presets => {
            for name in presets::names() {
                println!("{name}");
            }
            return ExitCode::SUCCESS;
        }
        Command::Validate(c) => return finish(validate(&c)),
        Command::Susceptibility(c) => (c, Some(Kind::Susceptibility)),
        Command::Bandstructure(c) => (c, Some(Kind::Bandstructure)),
        Command::Coefficients(c) => (c, Some(Kind::Coefficients)),
        Command::Soliton(c) => (c, Some(Kind::Soliton)),
        Command::Propagate(c) => (c, Some(Kind::Propagate)),
        Command::DesignMap(c) => (c, Some(Kind::DesignMap)),
        Command::Run(c) => (c, None),
    };
    finish(execute(&common, kind))
}

fn finish(r: Result<(), CliError>) -> ExitCode {
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("eitbragg: {e}");
            e.exit_code()
        }
    }
}

fn setup(common: &Common) -> Result<ScenarioConfig, CliError> {
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    config::load(common.config.as_deref(), common.preset.as_deref())
}

fn validate(common: &Common) -> Result<(), CliError> {
    let cfg = setup(common)?;
    let m = model::build(&cfg)?;
    println!("configuration valid");
    let preview = m.summary();
    for key in ["k0_scale", "k0_rad_per_s", "n_bar", "kappa_per_m", "v_g_m_per_s", "gamma_w_per_m", "kappa_l", "gap_width_cme_gamma_a"] {
        println!("  {key} = {}", preview[key]);
    }
    for w in m.warnings() {
        println!("  warning: {w}");
    }
    Ok(())
}

fn execute(common: &Common, kind: Option<Kind>) -> Result<(), CliError> {
    let cfg = setup(common)?;
    let kind = kind
        .or(cfg.scenario.kind)
        .ok_or_else(|| CliError::Config("scenario.kind is required for `run`".into()))?;
    let model = model::build(&cfg)?;
    let dir = common
        .out
        .clone()
        .or_else(|| cfg.scenario.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let mut run = Run::new(&dir, kind.name(), common.preset.as_deref(), &cfg)?;
    run.manifest.derived = model.summary();
    run.manifest.warnings = model.warnings();
    run.result("validity", model.coeffs.validity);
    run.result("variant_selection", model.variant_selection()?);
    for w in &run.manifest.warnings {
        eprintln!("eitbragg: warning: {w}");
    }
    let outcome = match kind {
        Kind::Susceptibility => scenarios::susceptibility(&cfg, &model, &mut run),
        Kind::Bandstructure => scenarios::bandstructure(&cfg, &model, &mut run),
        Kind::Coefficients => scenarios::coefficients(&cfg, &model, &mut run),
        Kind::Soliton => scenarios::soliton(&cfg, &model, &mut run),
        Kind::Propagate => scenarios::propagate(&cfg, &model, &mut run),
        Kind::DesignMap => scenarios::design_map(&cfg, &model, &mut run),
    };
    let path = run.finish(outcome.as_ref().map(|_| ()))?;
    eprintln!("eitbragg: manifest written to {}", path.display());
    outcome
}
