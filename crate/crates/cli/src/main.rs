use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context as _, Result};
use clap::{Parser, Subcommand, ValueEnum};
use hgauge::harness::{self, GroupDraw, Mode, SuiteConfig};
use hgauge::{fixture, golden, symmetrized_trace_pairing, validate_crossed_module, validate_lie_algebra, validate_pairing};

#[derive(Parser)]
#[command(name = "hgauge", version, about = "Exact checks for strict higher gauge theory identities")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Numeric,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the Lie algebra, crossed-module and pairing axioms of a fixture.
    Validate {
        /// Named fixture or path to a module JSON file.
        fixture: String,
        /// Pairing degrees to check.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        n: Vec<usize>,
    },
    /// Run seeded residual suites.
    Run {
        #[arg(long, default_value = "adjoint:sl2")]
        fixture: String,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        dim: usize,
        #[arg(long, default_value_t = 25)]
        instances: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_enum, default_value = "exact")]
        mode: ModeArg,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
        /// Jet order used in numeric mode.
        #[arg(long, default_value_t = 3)]
        jet_order: i16,
        /// `all` or a comma-separated list of suites.
        #[arg(long, default_value = "all")]
        suites: String,
        #[arg(long, default_value_t = 2)]
        degree_cap: u32,
        #[arg(long, default_value_t = 3)]
        sparsity_cap: usize,
        /// Largest number of terms in a random form.
        #[arg(long, default_value_t = 6)]
        form_terms: usize,
        /// Group kinds to draw: identity, constant, unipotent.
        #[arg(long, value_delimiter = ',', default_value = "identity,constant,unipotent")]
        groups: Vec<String>,
        #[arg(long)]
        only_instance: Option<usize>,
        /// Report file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for failing-instance dumps.
        #[arg(long, default_value = "failures")]
        dump_dir: PathBuf,
    },
    /// Print a worked example: cs, wzw or gwzw.
    ShowExample { name: String },
}

fn group_draw(s: &str) -> Result<GroupDraw> {
    match s {
        "identity" => Ok(GroupDraw::Identity),
        "constant" => Ok(GroupDraw::Constant),
        "unipotent" => Ok(GroupDraw::Unipotent),
        other => anyhow::bail!("unknown group kind `{other}`"),
    }
}

fn validate(name: &str, degrees: &[usize]) -> Result<bool> {
    let xm = Arc::new(fixture::load_module(name)?);
    let mut ok = true;
    let mut reports = vec![validate_lie_algebra(xm.g())?, validate_lie_algebra(xm.h())?, validate_crossed_module(&xm)?];
    for &n in degrees {
        reports.push(validate_pairing(&symmetrized_trace_pairing(&xm, n)?)?);
    }
    for r in reports {
        ok &= r.is_valid();
        print!("{r}");
    }
    println!("{}", if ok { "valid" } else { "INVALID" });
    Ok(ok)
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run() -> Result<bool> {
    match Cli::parse().cmd {
        Cmd::Validate { fixture, n } => validate(&fixture, &n),
        Cmd::ShowExample { name } => {
            print!("{}", golden::show(&name)?);
            Ok(true)
        }
        Cmd::Run {
            fixture,
            n,
            dim,
            instances,
            seed,
            mode,
            tolerance,
            jet_order,
            suites,
            degree_cap,
            sparsity_cap,
            form_terms,
            groups,
            only_instance,
            out,
            dump_dir,
        } => {
            let cfg = SuiteConfig {
                fixture,
                n,
                dim,
                degree_cap,
                sparsity_cap,
                form_terms,
                instances,
                seed,
                mode: match mode {
                    ModeArg::Exact => Mode::Exact,
                    ModeArg::Numeric => Mode::Numeric { tolerance, order: jet_order },
                },
                suites: harness::parse_suites(&suites)?,
                group_draws: groups.iter().map(|g| group_draw(g)).collect::<Result<_>>()?,
                only_instance,
                dump_dir: Some(dump_dir),
            };
            let report = harness::run_suites(&cfg)?;
            print!("{report}");
            if let Some(path) = out {
                std::fs::write(&path, report.to_json()).with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(report.all_passed())
        }
    }
}
