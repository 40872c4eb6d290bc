use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use kgpovm_cli::config::{ConfigError, RunConfig};
use kgpovm_cli::report::{self, Report};
use kgpovm_core::fields::{current, slice_field, write_current_csv, write_field_csv};
use kgpovm_core::harness::{run_suite, Suite, Verdict};
use kgpovm_core::mantle::{mantle_flux, MantleSpec};
use kgpovm_core::observables::{m_povm_probability, nw_probability, terno_probability};
use kgpovm_core::MassShellState;

/// Exit codes.
const SUITE_FAILED: u8 = 1;
const CONFIG_ERROR: u8 = 2;
const MISSING_FILE: u8 = 3;
const RUNTIME_ERROR: u8 = 4;

#[derive(Parser)]
#[command(
    name = "kgpovm",
    version,
    about = "Localization observables of a Klein-Gordon particle"
)]
struct Cli {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one suite, or `all`, and write the report.
    Suite {
        name: String,
        /// Report directory, overriding `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Localization probability of the `[prob]` state and region.
    Prob { observable: Observable },
    /// Demonstrations.
    Demo {
        which: Demo,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write field, current or mantle-flux data as CSV.
    Export {
        what: Export,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Observable {
    Q,
    A,
    M,
}

#[derive(Clone, Copy, ValueEnum)]
enum Demo {
    NwViolation,
}

#[derive(Clone, Copy, ValueEnum)]
enum Export {
    Field,
    Current,
    Mantle,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("KGPOVM_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = match e.downcast_ref::<ConfigError>() {
                Some(ConfigError::Missing(_)) => MISSING_FILE,
                Some(_) => CONFIG_ERROR,
                None => RUNTIME_ERROR,
            };
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let cfg = RunConfig::load_or_default(cli.config.as_deref())?;
    match cli.command {
        Command::Suite { name, out } => {
            let suites = if name == "all" {
                Suite::ALL.to_vec()
            } else {
                let suite = name.parse::<Suite>().map_err(|e| match e {
                    kgpovm_core::Error::InvalidParameter(m) => {
                        ConfigError::Invalid(format!("suite: {m}, or all"))
                    }
                    other => ConfigError::Invalid(other.to_string()),
                })?;
                vec![suite]
            };
            run_suites(&cfg, &suites, out)
        }
        Command::Demo {
            which: Demo::NwViolation,
            out,
        } => run_suites(&cfg, &[Suite::NwViolation], out),
        Command::Prob { observable } => {
            prob(&cfg, observable)?;
            Ok(0)
        }
        Command::Export { what, out } => {
            export(&cfg, what, out.as_deref())?;
            Ok(0)
        }
    }
}

fn run_suites(cfg: &RunConfig, suites: &[Suite], out: Option<PathBuf>) -> Result<u8> {
    let mut verdicts = Vec::with_capacity(suites.len());
    for s in suites {
        log::info!("running {s}");
        verdicts.push(run_suite(*s, &cfg.harness)?);
    }
    let report = Report::new(&cfg.harness, verdicts);
    print!("{}", report::summary(&report));
    let dir = out.unwrap_or_else(|| cfg.output.dir.clone());
    let written = report::write_report(&dir, &report, cfg.output.json, cfg.output.csv)?;
    for p in written.json.iter().chain(&written.csv) {
        println!("wrote {}", p.display());
    }
    if let Some(v) = report.suites.iter().find(|v| v.suite == Suite::NwViolation) {
        if v.verdict == Verdict::Pass {
            println!(
                "Newton-Wigner leakage found in {} of {} scenarios",
                v.violations_found, v.cases_run
            );
        }
    }
    Ok(if report.passed() { 0 } else { SUITE_FAILED })
}

fn build_state(cfg: &RunConfig) -> Result<MassShellState> {
    let grid = cfg.prob_grid().build()?;
    Ok(cfg.prob.state.build(&grid, cfg.prob.state_frame()?)?)
}

fn prob(cfg: &RunConfig, which: Observable) -> Result<()> {
    let psi = build_state(cfg)?;
    let slice = cfg.prob.slice()?;
    let region = &cfg.prob.region;
    let text = match which {
        Observable::Q => serde_json::to_string_pretty(&nw_probability(
            &psi.in_frame(&slice.frame)?,
            &slice,
            region,
        )?)?,
        Observable::A => serde_json::to_string_pretty(&terno_probability(
            &psi.in_frame(&slice.frame)?,
            &slice,
            region,
        )?)?,
        Observable::M => serde_json::to_string_pretty(&m_povm_probability(
            &psi,
            &cfg.prob.generator()?,
            &slice,
            region,
        )?)?,
    };
    println!("{text}");
    Ok(())
}

fn export(cfg: &RunConfig, what: Export, out: Option<&Path>) -> Result<()> {
    let psi = build_state(cfg)?;
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout().lock()),
    };
    match what {
        Export::Field | Export::Current => {
            let slab = slice_field(&psi, &cfg.prob.slice()?, &cfg.prob.generator()?)?;
            if matches!(what, Export::Field) {
                write_field_csv(&slab, sink)?;
            } else {
                write_current_csv(&current(&slab, &psi.frame()), sink)?;
            }
        }
        Export::Mantle => {
            let p = &cfg.prob;
            let m = &cfg.harness.mantle_flux;
            let mut w = csv::Writer::from_writer(sink);
            w.write_record([
                "radius",
                "flux",
                "flux_err",
                "p_source",
                "p_target",
                "balance_residual",
                "combined_err",
                "causal_fraction",
            ])?;
            for r in &p.mantle_radii {
                let spec = MantleSpec {
                    n_u: m.n_u,
                    n_theta: m.n_theta,
                    n_phi: m.n_phi,
                    ..MantleSpec::ball(p.mantle_center, *r, p.t1, p.t2)
                };
                let rep = mantle_flux(&psi, &spec)?;
                w.serialize((
                    r,
                    rep.flux,
                    rep.flux_err,
                    rep.p_source.value,
                    rep.p_target.value,
                    rep.balance_residual,
                    rep.combined_err,
                    rep.causality.fraction,
                ))?;
            }
            w.flush()?;
        }
    }
    Ok(())
}
