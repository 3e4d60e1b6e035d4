use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use uncert::error::{Error, Result};
use uncert::hermitian::Tolerance;
use uncert::lab::{self, CampaignConfig, CampaignReport, Drop, InstanceSpec, SearchConfig};
use uncert::maps::MapFamily;
use uncert::verify::{Mode, TheoremId};

/// Numerical verification of uncertainty relations for tracial positive maps.
#[derive(Parser)]
#[command(name = "uncert", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification campaign.
    Verify(VerifyArgs),
    /// Look for a counterexample after dropping one hypothesis.
    Search(SearchArgs),
    /// Re-run a serialized instance.
    Replay(ReplayArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Campaign config JSON; replaces all other options except --out.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Theorem ids, comma separated, or `all`.
    #[arg(long, value_delimiter = ',')]
    theorem: Vec<String>,
    /// Block dimensions, e.g. 2,3.
    #[arg(long, value_delimiter = ',')]
    blocks: Vec<usize>,
    #[arg(long, default_value = "center-expectation")]
    map: MapFamily,
    /// Rows of a scaled block trace or targets of a composite map.
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Relative tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 1e-10)]
    abs_tol: f64,
    #[arg(long, default_value = "relaxed")]
    mode: Mode,
    /// Report path; a CSV summary and argmin instances are written beside it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    target: TheoremId,
    /// Hypothesis to drop, or `none`.
    #[arg(long, default_value = "none")]
    drop: Drop,
    #[arg(long, default_value_t = 10000)]
    budget: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value = "relaxed")]
    mode: Mode,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Defaults to the theorem recorded in the instance.
    #[arg(long)]
    theorem: Option<TheoremId>,
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 1e-10)]
    abs_tol: f64,
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn emit(json: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, json).map_err(|e| io_err(p, e)),
        None => {
            use std::io::Write;
            match writeln!(std::io::stdout().lock(), "{json}") {
                // a closed pipe (`uncert ... | head`) is not an error
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::Io(e.to_string())),
                _ => Ok(()),
            }
        }
    }
}

fn parse_theorems(ids: &[String]) -> Result<Vec<TheoremId>> {
    if ids.iter().any(|s| s == "all") {
        return Ok(TheoremId::ALL.to_vec());
    }
    ids.iter().map(|s| s.parse()).collect()
}

fn campaign_config(args: &VerifyArgs) -> Result<CampaignConfig> {
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        return CampaignConfig::from_json_str(&text);
    }
    if args.theorem.is_empty() {
        return Err(Error::InvalidArgument("either --config or --theorem is required".into()));
    }
    let blocks = if args.blocks.is_empty() { vec![2] } else { args.blocks.clone() };
    let spec = InstanceSpec::new(blocks, args.map, args.trials, args.seed).with_k(args.k);
    let mut c = CampaignConfig::new(parse_theorems(&args.theorem)?, spec);
    c.tolerance = Tolerance { rel: args.tol, abs: args.abs_tol };
    c.mode = args.mode;
    c.output_path = args.out.clone();
    c.validate()?;
    Ok(c)
}

/// `<stem>.<theorem>.argmin.json` next to the report.
fn write_argmin_instances(report: &CampaignReport, out: &Path) -> Result<()> {
    let dir = out.parent().unwrap_or(Path::new("."));
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    for t in &report.theorems {
        if let Some(trial) = t.argmin_trial {
            let inst = lab::generate(t.theorem, &report.config.spec, trial, report.config.mode)?;
            let path = dir.join(format!("{stem}.{}.argmin.json", t.theorem));
            std::fs::write(&path, inst.to_json_pretty()?).map_err(|e| io_err(&path, e))?;
        }
    }
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<i32> {
    let config = campaign_config(&args)?;
    let report = lab::run_campaign(&config)?;
    for t in report.theorems.iter().filter(|t| t.applicable) {
        let margin = t.min_margin.map_or("-".to_string(), |m| format!("{m:.3e}"));
        eprintln!(
            "{:<36} trials {:>6} pass {:>6} fail {:>4} unmet {:>6} min margin {margin}",
            t.theorem.as_str(),
            t.trials,
            t.passes,
            t.failures,
            t.hypothesis_unmet
        );
    }
    let out = args.out.clone().or_else(|| config.output_path.clone());
    match &out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
            }
            report.write_json(path)?;
            report.write_csv(&path.with_extension("csv"))?;
            write_argmin_instances(&report, path)?;
        }
        None => emit(&serde_json::to_string_pretty(&report)?, None)?,
    }
    Ok(report.exit_code())
}

fn search(args: SearchArgs) -> Result<i32> {
    let mut config = SearchConfig::new(args.target, args.drop, args.budget, args.seed);
    config.mode = args.mode;
    let report = lab::counterexample_search(&config)?;
    eprintln!("{}", report.message);
    emit(&serde_json::to_string_pretty(&report)?, args.out.as_deref())?;
    Ok(report.exit_code())
}

fn replay(args: ReplayArgs) -> Result<i32> {
    let tol = Tolerance { rel: args.tol, abs: args.abs_tol };
    let report = lab::replay(&args.instance, args.theorem, args.mode, &tol)?;
    emit(&report.to_json_pretty()?, None)?;
    Ok(if report.pass { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(a) => verify(a),
        Command::Search(a) => search(a),
        Command::Replay(a) => replay(a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
