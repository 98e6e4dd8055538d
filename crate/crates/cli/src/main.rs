//! Batch front end: loads a run configuration, dispatches to the named
//! suite, and writes JSON-lines and CSV reports with bit-stable contents.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use riesz_core::lacunary::LacunarySeq;
use riesz_core::trigpoly::ENorm;
use riesz_verify::suites::{run_suite, Suite, SuiteConfig, SuiteOutcome};
use riesz_verify::theorem::{check_main_theorem, formula_candidates};
use riesz_verify::{summarize, write_reports, CheckResult};

#[derive(Parser)]
#[command(
    name = "rieszlab",
    about = "Builds finite Riesz products over lacunary sequences and certifies their moment inequalities",
    version
)]
struct Cli {
    /// JSON run configuration; command-line flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every randomized instance family.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for the quadrature grids (0 = library default).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Relative tolerance handed to the adaptive integrators.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Wall-clock budget in milliseconds, checkpointed between units.
    #[arg(long, global = true)]
    budget_ms: Option<u64>,
    /// Output directory for the report files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Structural scan of the products: term counts, dyadic coefficients.
    Riesz,
    /// Moment-ratio scan against the closed-form constants.
    Norms,
    /// Run one certified statement by id, or every registered statement.
    Verify {
        /// Statement id, or "all".
        statement: Option<String>,
    },
    /// Search for empirical envelope constants and write the ledger.
    EstimateConstants,
    /// Exact paired-power counterexample battery.
    Counterexample,
    /// Monte Carlo twin with independent factors.
    Montecarlo,
    /// Phase convolution identity and L1 contraction battery.
    Transfer,
}

impl Command {
    fn suite(&self) -> Suite {
        match self {
            Command::Riesz => Suite::Riesz,
            Command::Norms => Suite::Norms,
            Command::Verify { statement } => Suite::Verify(match statement.as_deref() {
                None | Some("all") => None,
                Some(id) => Some(id.to_string()),
            }),
            Command::EstimateConstants => Suite::EstimateConstants,
            Command::Counterexample => Suite::Counterexample,
            Command::Montecarlo => Suite::Montecarlo,
            Command::Transfer => Suite::Transfer,
        }
    }
}

/// Run configuration: everything has a default except the command, which may
/// come from the command line instead. Unknown fields are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RunConfig {
    command: Option<String>,
    statement: Option<String>,
    seed: u64,
    tol: f64,
    budget_ms: Option<u64>,
    mc_samples: u64,
    threads: Option<usize>,
    out: PathBuf,
    scan: Option<ScanConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            statement: None,
            seed: 0,
            tol: 1e-9,
            budget_ms: None,
            mc_samples: 100_000,
            threads: None,
            out: PathBuf::from("results"),
            scan: None,
        }
    }
}

/// Custom instance family for the norms command.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ScanConfig {
    base: i64,
    ratio: i64,
    length: usize,
    n_upper: usize,
    p_list: Vec<f64>,
    e_norm: String,
    coefficients: CoeffSpec,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            base: 3,
            ratio: 3,
            length: 5,
            n_upper: 4,
            p_list: vec![1.0, 1.5, 2.0, 3.0, 4.0],
            e_norm: "l2".to_string(),
            coefficients: CoeffSpec::SignSweep,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum CoeffSpec {
    /// Every sign vector in {+1,-1}^(N+1), scalar coefficients.
    SignSweep,
    /// Explicit list of coefficient sets, one vector per partial product.
    Explicit(Vec<Vec<Vec<f64>>>),
    /// Seeded uniform draws from [-1,1]^dim.
    Random { dim: usize, count: usize },
}

fn parse_e_norm(label: &str) -> Result<ENorm, String> {
    match label {
        "l1" => Ok(ENorm::L1),
        "l2" => Ok(ENorm::L2),
        "linf" => Ok(ENorm::Linf),
        other => Err(format!("unknown norm {other:?}; expected l1, l2, or linf")),
    }
}

fn suite_from_name(name: &str, statement: Option<&str>) -> Result<Suite, String> {
    Ok(match name {
        "riesz" => Suite::Riesz,
        "norms" => Suite::Norms,
        "verify" => Suite::Verify(match statement {
            None | Some("all") => None,
            Some(id) => Some(id.to_string()),
        }),
        "estimate-constants" => Suite::EstimateConstants,
        "counterexample" => Suite::Counterexample,
        "montecarlo" => Suite::Montecarlo,
        "transfer" => Suite::Transfer,
        other => return Err(format!("unknown command {other:?}")),
    })
}

fn load_config(path: &PathBuf) -> Result<RunConfig, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
}

/// Coefficient sets for a scan, labeled for the instance column.
type LabeledCoeffSets = Vec<(String, Vec<Vec<f64>>)>;

fn scan_coefficient_sets(
    spec: &CoeffSpec,
    n_upper: usize,
    seed: u64,
) -> Result<LabeledCoeffSets, String> {
    match spec {
        CoeffSpec::SignSweep => {
            if n_upper > 11 {
                return Err(format!("sign sweep over N={n_upper} is too large"));
            }
            Ok((0..(1u32 << (n_upper + 1)))
                .map(|code| {
                    let coeffs: Vec<Vec<f64>> = (0..=n_upper)
                        .map(|k| vec![if code >> k & 1 == 1 { -1.0 } else { 1.0 }])
                        .collect();
                    (format!("signs={code:b}"), coeffs)
                })
                .collect())
        }
        CoeffSpec::Explicit(sets) => Ok(sets
            .iter()
            .enumerate()
            .map(|(i, set)| (format!("explicit#{i}"), set.clone()))
            .collect()),
        CoeffSpec::Random { dim, count } => {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(50);
            Ok((0..*count)
                .map(|i| {
                    let coeffs: Vec<Vec<f64>> = (0..=n_upper)
                        .map(|_| (0..*dim).map(|_| rng.gen_range(-1.0..=1.0)).collect())
                        .collect();
                    (format!("random#{i}"), coeffs)
                })
                .collect())
        }
    }
}

/// Norms scan over a configured instance family; instance failures become
/// failing rows instead of aborting the run.
fn scan_rows(scan: &ScanConfig, cfg: &SuiteConfig) -> Result<Vec<CheckResult>, String> {
    let ctx = cfg.ctx();
    let seq = LacunarySeq::make(scan.base, Ratio::from_integer(scan.ratio), scan.length, None)
        .map_err(|e| format!("invalid scan sequence: {e}"))?;
    if scan.n_upper > scan.length {
        return Err(format!(
            "scan order {} exceeds sequence length {}",
            scan.n_upper, scan.length
        ));
    }
    let e_norm = parse_e_norm(&scan.e_norm)?;
    let sets = scan_coefficient_sets(&scan.coefficients, scan.n_upper, cfg.seed)?;
    let mut rows = Vec::new();
    for &p in &scan.p_list {
        let cands = formula_candidates(p);
        for (label, coeffs) in &sets {
            match check_main_theorem(
                &seq,
                coeffs,
                e_norm,
                p,
                &cands,
                &format!("scan p={p} {label}"),
                &ctx,
            ) {
                Ok(pair) => rows.extend(pair),
                Err(e) => rows.push(CheckResult::with_slack(
                    "scan-error",
                    &format!("p={p} {label}: {e}"),
                    0.0,
                    0.0,
                    -1.0,
                    0.0,
                    "error",
                    cfg.seed,
                )),
            }
        }
    }
    Ok(rows)
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let mut config = match &cli.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(tol) = cli.tol {
        config.tol = tol;
    }
    if cli.budget_ms.is_some() {
        config.budget_ms = cli.budget_ms;
    }
    if let Some(out) = cli.out {
        config.out = out;
    }
    if cli.threads.is_some() {
        config.threads = cli.threads;
    }
    if !(config.tol.is_finite() && config.tol > 0.0) {
        return Err(format!("tolerance {} out of range", config.tol));
    }
    if config.mc_samples == 0 {
        return Err("mc_samples must be >= 1".to_string());
    }
    let suite = match &cli.command {
        Some(command) => command.suite(),
        None => match &config.command {
            Some(name) => suite_from_name(name, config.statement.as_deref())?,
            None => return Err("no command given on the command line or in the config".to_string()),
        },
    };
    if let Some(threads) = config.threads.filter(|t| *t > 0) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| format!("thread pool: {e}"))?;
    }
    let suite_cfg = SuiteConfig {
        seed: config.seed,
        tol: config.tol,
        budget_ms: config.budget_ms,
        mc_samples: config.mc_samples,
    };
    let outcome = match config.scan.as_ref().filter(|_| suite == Suite::Norms) {
        Some(scan) => SuiteOutcome {
            rows: scan_rows(scan, &suite_cfg)?,
            ledger_json: None,
            truncated: false,
        },
        None => run_suite(&suite, &suite_cfg).map_err(|e| e.to_string())?,
    };
    let label = suite.label();
    let (jsonl_path, csv_path) = write_reports(&config.out, label, &outcome.rows)
        .map_err(|e| format!("writing reports to {}: {e}", config.out.display()))?;
    if let Some(ledger) = &outcome.ledger_json {
        let path = config.out.join("ledger.json");
        fs::write(&path, ledger).map_err(|e| format!("writing {}: {e}", path.display()))?;
        println!("wrote {}", path.display());
    }
    let (total, failures, worst) = summarize(&outcome.rows);
    println!("wrote {} and {}", jsonl_path.display(), csv_path.display());
    println!(
        "{label}: {}/{total} checks passed (worst margin {worst:.3e}){}",
        total - failures,
        if outcome.truncated {
            "; wall-clock budget reached, suite truncated"
        } else {
            ""
        }
    );
    Ok(if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
