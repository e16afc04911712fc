use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use wavegal::assembly::Normalization;
use wavegal::harness::{
    run_checks, run_study, table_csv, BasisKind, CondSetting, SolverKind, StudyConfig, EXAMPLES,
};

#[derive(Parser)]
#[command(
    name = "wavegal",
    version,
    about = "Wavelet Galerkin solver for elliptic interface problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convergence study over a range of levels.
    Run(RunArgs),
    /// Registered benchmark problems.
    ListExamples,
    /// Filter bank, moment, span and geometry checks.
    Verify,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Direct,
    Gmres,
}

#[derive(Clone, Copy, ValueEnum)]
enum CondArg {
    Off,
    Dense,
    Iter,
}

#[derive(Clone, Copy, ValueEnum)]
enum BasisArg {
    Augmented,
    Standard,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormalizationArg {
    Energy,
    Dyadic,
}

/// Flags override the values read from `--config`.
#[derive(Args)]
struct RunArgs {
    /// Key-value (TOML) file with any of the settings below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    example: Option<String>,
    #[arg(long)]
    jmin: Option<u32>,
    #[arg(long)]
    jmax: Option<u32>,
    #[arg(long)]
    coarse_level: Option<u32>,
    /// The errors are sampled on the 2^-level grid.
    #[arg(long)]
    error_grid: Option<u32>,
    #[arg(long)]
    quad_order: Option<usize>,
    #[arg(long, value_enum)]
    solver: Option<SolverArg>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long, value_enum)]
    cond: Option<CondArg>,
    #[arg(long, value_enum)]
    normalization: Option<NormalizationArg>,
    /// Level of the reference solution for examples without an exact one.
    #[arg(long)]
    reference_level: Option<u32>,
    /// Largest level assembly accepts.
    #[arg(long)]
    level_guard: Option<u32>,
    /// Blocks to compute; repeat or separate by commas.
    #[arg(long, value_enum, value_delimiter = ',')]
    basis: Vec<BasisArg>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn config(self) -> Result<StudyConfig> {
        let mut c = match &self.config {
            Some(p) => {
                StudyConfig::from_file(p).with_context(|| format!("reading {}", p.display()))?
            }
            None => StudyConfig::default(),
        };
        if let Some(v) = self.example {
            c.example = v;
        }
        if let Some(v) = self.jmin {
            c.j_min = v;
        }
        if let Some(v) = self.jmax {
            c.j_max = v;
        }
        if let Some(v) = self.coarse_level {
            c.coarse_level = v;
        }
        if let Some(v) = self.error_grid {
            c.error_grid_level = v;
        }
        if let Some(v) = self.quad_order {
            c.quad_order = v;
        }
        if let Some(v) = self.solver {
            c.solver = match v {
                SolverArg::Direct => SolverKind::Direct,
                SolverArg::Gmres => SolverKind::Gmres,
            };
        }
        if let Some(v) = self.tol {
            c.tol = v;
        }
        if let Some(v) = self.max_iter {
            c.max_iter = v;
        }
        if let Some(v) = self.cond {
            c.cond = match v {
                CondArg::Off => CondSetting::Off,
                CondArg::Dense => CondSetting::Dense,
                CondArg::Iter => CondSetting::Iter,
            };
        }
        if let Some(v) = self.normalization {
            c.normalization = match v {
                NormalizationArg::Energy => Normalization::Energy,
                NormalizationArg::Dyadic => Normalization::Dyadic,
            };
        }
        if let Some(v) = self.reference_level {
            c.reference_level = v;
        }
        if let Some(v) = self.level_guard {
            c.level_guard = v;
        }
        if !self.basis.is_empty() {
            c.bases = self
                .basis
                .iter()
                .map(|b| match b {
                    BasisArg::Augmented => BasisKind::Augmented,
                    BasisArg::Standard => BasisKind::Standard,
                })
                .collect();
        }
        if self.out.is_some() {
            c.out = self.out;
        }
        Ok(c)
    }
}

fn run(args: RunArgs) -> Result<ExitCode> {
    let cfg = args.config()?;
    let outcome = run_study(&cfg).with_context(|| format!("study of '{}'", cfg.example))?;
    print!("{}", table_csv(&outcome.rows)?);
    if let Some(level) = outcome.reference_level {
        eprintln!("errors measured against the level-{level} reference solution");
    }
    for r in outcome.rows.iter().filter(|r| r.failure.is_some()) {
        eprintln!(
            "J={} {}: {}",
            r.level,
            r.basis,
            r.failure.as_deref().unwrap_or_default()
        );
    }
    if let Some(dir) = &cfg.out {
        eprintln!("wrote {}", dir.display());
    }
    let failed = outcome.rows.iter().any(|r| r.failure.is_some());
    Ok(if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    })
}

fn main() -> Result<ExitCode> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::ListExamples => {
            for e in EXAMPLES {
                let exact = if e.exact_known { "exact" } else { "reference" };
                println!("{:<16} {:<9} {}", e.name, exact, e.summary);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify => {
            let mut ok = true;
            for c in run_checks() {
                println!(
                    "{} {:<12} {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
                ok &= c.passed;
            }
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}
