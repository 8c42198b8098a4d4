use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ncval_qrf::config::{OutputFormat, ScenarioConfig};
use ncval_qrf::report::ScenarioReport;
use ncval_qrf::verify::{default_seed, verify, VerifyParams};
use ncval_qrf::{runner, QrfError};

/// Run quantum reference frame scenarios and property suites.
#[derive(Parser)]
#[command(name = "ncval-qrf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario config and emit its report.
    Run {
        config: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// json or csv-summary; overrides the config's output.format.
        #[arg(long)]
        format: Option<String>,
    },
    /// Run a property suite: ncvalue-core, qubit, grid, appendix or all.
    Verify {
        suite: String,
        /// Inclusive dimension range for random draws, e.g. 2..16.
        #[arg(long)]
        dims: Option<String>,
        #[arg(long)]
        draws: Option<usize>,
        /// Defaults to $NCVAL_QRF_SEED, then 42.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long = "grid-n")]
        grid_n: Option<usize>,
        /// Print the summary as JSON.
        #[arg(long)]
        json: bool,
    },
}

fn fail(err: &QrfError, context: &[(&str, String)]) -> ExitCode {
    let mut obj = serde_json::Map::new();
    obj.insert("error".into(), err.kind().into());
    obj.insert("message".into(), err.to_string().into());
    if let QrfError::ConfigInvalid { field, .. } = err {
        obj.insert("field".into(), field.clone().into());
    }
    for (k, v) in context {
        obj.insert((*k).into(), v.clone().into());
    }
    eprintln!("{}", serde_json::Value::Object(obj));
    ExitCode::from(2)
}

fn parse_dims(s: &str) -> Result<(usize, usize), QrfError> {
    let bad = || QrfError::BadParameters(format!("--dims `{s}` is not of the form LO..HI"));
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    let hi = hi.strip_prefix('=').unwrap_or(hi);
    Ok((lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?))
}

fn emit(report: &ScenarioReport, format: OutputFormat, out: Option<&Path>) -> Result<(), QrfError> {
    let text = match format {
        OutputFormat::Json => report.to_json(),
        OutputFormat::CsvSummary => report.to_csv_summary(),
    };
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| QrfError::IoFailure(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(config: &Path, out: Option<&Path>, format: Option<&str>) -> ExitCode {
    let ctx = [("config", config.display().to_string())];
    let format_override = match format.map(|f| OutputFormat::parse(f).ok_or(f)) {
        None => None,
        Some(Ok(f)) => Some(f),
        Some(Err(f)) => {
            let err = QrfError::ConfigInvalid {
                field: "format".into(),
                message: format!("`{f}` is not json or csv-summary"),
            };
            return fail(&err, &ctx);
        }
    };
    let cfg = match ScenarioConfig::from_path(config) {
        Ok(c) => c,
        Err(e) => return fail(&e, &ctx),
    };
    let report = match runner::run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            let id = cfg.scenario_id.clone().unwrap_or_else(|| format!("{:?}-{}", cfg.system, cfg.case).to_lowercase());
            return fail(&e, &[ctx[0].clone(), ("scenario_id", id)]);
        }
    };
    if let Err(e) = emit(&report, format_override.unwrap_or(cfg.output.format), out) {
        return fail(&e, &ctx);
    }
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        for c in report.failures() {
            eprintln!("FAIL {}: error {:e} > tolerance {:e}", c.name, c.error, c.tolerance);
        }
        for k in report.ranks.iter().filter(|k| k.rank != k.expected) {
            eprintln!("FAIL rank {} ({}): {} != {}", k.name, k.bipartition, k.rank, k.expected);
        }
        ExitCode::FAILURE
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, out, format } => run(&config, out.as_deref(), format.as_deref()),
        Command::Verify { suite, dims, draws, seed, grid_n, json } => {
            let mut params = VerifyParams {
                seed: seed.unwrap_or_else(default_seed),
                grid_n,
                ..VerifyParams::default()
            };
            if let Some(d) = dims {
                match parse_dims(&d) {
                    Ok(r) => params.dims = r,
                    Err(e) => return fail(&e, &[]),
                }
            }
            if let Some(n) = draws {
                params.draws = n;
            }
            match verify(&suite, &params) {
                Ok(summary) => {
                    if json {
                        print!("{}", summary.to_json());
                    } else {
                        print!("{}", summary.render_text());
                    }
                    if summary.all_pass() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::FAILURE
                    }
                }
                Err(e) => fail(&e, &[("suite", suite)]),
            }
        }
    }
}
