use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pathgap::config::{ExperimentConfig, Overrides, Scenario};
use pathgap::output::{write_csv, write_json, CONSTANTS_HEADER, REPORT_HEADER};
use pathgap::{svg, CliError, Parallel, ReportRow, EXIT_ERROR, EXIT_OK, EXIT_VIOLATED};

// Sampling stores a point, a frame and an increment per step; the system
// allocator dominates the step cost.
#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;

#[derive(Parser)]
#[command(name = "pathgap", version, about = "Monte Carlo checks of functional inequalities on reflecting path space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the closed-form constants over the [constants] grid.
    Constants(Common),
    /// Run one verification scenario (or a constants table).
    Verify(Common),
    /// Run the scenario once per cell of the [sweep] grid.
    Sweep(Common),
    /// Write the sampled paths of the scenario as CSV.
    DumpPaths(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, value_enum)]
    factor2: Option<Switch>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        cfg.apply(&Overrides {
            seed: self.seed,
            n_paths: self.paths,
            n_steps: self.steps,
            factor2: self.factor2.map(|s| matches!(s, Switch::On)),
        });
        std::fs::create_dir_all(&self.out)?;
        Ok(cfg)
    }
}

fn constants(cfg: &ExperimentConfig, out: &Path) -> Result<i32, CliError> {
    let rows = pathgap::run_constants(cfg)?;
    write_csv(&out.join(&cfg.output.csv), CONSTANTS_HEADER, &rows)?;
    write_json(&out.join(&cfg.output.json), &rows)?;
    if let Some(name) = &cfg.output.svg {
        std::fs::write(out.join(name), svg::constants_curves(&rows))?;
    }
    eprintln!("{} rows written to {}", rows.len(), out.join(&cfg.output.csv).display());
    Ok(EXIT_OK)
}

fn verify(cfg: &ExperimentConfig, out: &Path) -> Result<i32, CliError> {
    if cfg.scenario == Scenario::ConstantsTable {
        return constants(cfg, out);
    }
    let resolved = cfg.resolve()?;
    let report = pathgap::run_verify(&resolved, &Parallel)?;
    write_json(&out.join(&cfg.output.json), &report)?;
    write_csv(&out.join(&cfg.output.csv), REPORT_HEADER, &[ReportRow::new(0, cfg, Ok(&report))])?;
    if let Some(name) = &cfg.output.svg {
        std::fs::write(out.join(name), svg::report_bars(&report))?;
    }
    for l in &report.links {
        eprintln!(
            "{:<40} lhs {:>12.6} rhs {:>12.6} margin {:>12.6} ± {:.2e}  {:?}{}",
            l.name,
            l.lhs.value,
            l.rhs.value,
            l.margin,
            l.combined_se,
            l.verdict,
            if l.binding { "" } else { " (info)" }
        );
    }
    Ok(pathgap::exit_code([&report]))
}

fn sweep(cfg: &ExperimentConfig, out: &Path) -> Result<i32, CliError> {
    if cfg.scenario == Scenario::ConstantsTable {
        return constants(cfg, out);
    }
    let cells = pathgap::run_sweep(cfg)?;
    let rows: Vec<ReportRow> = cells.iter().map(|c| c.row.clone()).collect();
    write_csv(&out.join(&cfg.output.csv), REPORT_HEADER, &rows)?;
    let reports: Vec<_> = cells.iter().map(|c| c.outcome.as_ref().ok()).collect();
    write_json(&out.join(&cfg.output.json), &reports)?;
    eprintln!("{} cells written to {}", rows.len(), out.join(&cfg.output.csv).display());
    if cells.iter().any(|c| c.outcome.is_err()) {
        for c in cells.iter().filter(|c| c.outcome.is_err()) {
            eprintln!("cell {}: {}", c.index, c.row.status);
        }
        return Ok(EXIT_ERROR);
    }
    Ok(pathgap::exit_code(cells.iter().filter_map(|c| c.outcome.as_ref().ok())))
}

fn dump(cfg: &ExperimentConfig, out: &Path) -> Result<i32, CliError> {
    let r = cfg.resolve()?;
    let path = pathgap::dump_paths(&r, &out.join("paths.csv"))?;
    eprintln!("{} paths written to {}", r.sampler.n_paths, path.display());
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, run): (&Common, fn(&ExperimentConfig, &Path) -> Result<i32, CliError>) = match &cli.command {
        Command::Constants(c) => (c, constants),
        Command::Verify(c) => (c, verify),
        Command::Sweep(c) => (c, sweep),
        Command::DumpPaths(c) => (c, dump),
    };
    let code = common.load().and_then(|cfg| run(&cfg, &common.out)).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        EXIT_ERROR
    });
    if code == EXIT_VIOLATED {
        eprintln!("violated");
    }
    ExitCode::from(code as u8)
}
