//! `ferisk`: entropy-based risk scores, rankings and validation from the
//! command line.
//!
//! Every subcommand is a pure function of its flags and input files: given
//! the same seed and inputs, repeated runs write byte-identical outputs.
//! Exit codes: 0 on success, 1 on a domain or ingestion error, 2 on a usage
//! error (clap's default).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use ferisk::market::{self, CsvFormat, PricePanel};
use ferisk::ml::{build_features, fit_model, ModelKind, ModelSpec, SplitPlan};
use ferisk::report::{self, Report, RunMetadata, ValidationEntry};
use ferisk::sweep::SweepGrid;
use ferisk::{
    fractional_entropy, normalized_fractional_entropy, rank, Distribution, EntropyParams, Measure,
    Prospect, Ranking, RiskConfig, SupportRule,
};

#[derive(Parser)]
#[command(
    name = "ferisk",
    version,
    about = "Rank risky prospects by fractional-entropy risk measures",
    after_help = "Lower scores mean lower risk; rankings list the safest prospect first."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Directory for generated files, created if missing
    #[arg(
        long,
        global = true,
        env = "FERISK_OUT_DIR",
        default_value = "out",
        value_name = "DIR"
    )]
    out_dir: PathBuf,

    /// Cap on worker threads for sweeps and forest fits; 0 means one per core
    #[arg(long, global = true, default_value_t = 0, value_name = "N")]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Rank prospects by one risk measure, safest first
    Rank(RankArgs),
    /// Score every (q, lambda) grid point and write a heatmap CSV
    Sweep(SweepArgs),
    /// Fit reference regressors to the risk surface and report fit quality
    Validate(ValidateArgs),
    /// Write a synthetic closing-price panel as CSV
    Synth(SynthArgs),
    /// Print the fractional entropy of an inline distribution
    Entropy(EntropyArgs),
}

/// Where the price panel comes from: exactly one of --input or --synth.
#[derive(Args)]
struct SourceArgs {
    /// Closing-price CSV to read (layout set by --csv-format)
    #[arg(long, value_name = "PATH", group = "source")]
    input: Option<PathBuf>,

    /// Input layout: long (date,ticker,close rows) or wide (one column per ticker)
    #[arg(long, value_enum, default_value_t = FormatArg::Long, requires = "input")]
    csv_format: FormatArg,

    /// Generate a synthetic price panel instead of reading a file
    #[arg(long, group = "source")]
    synth: bool,

    /// Seed for every random draw in the run
    #[arg(long, default_value_t = 7)]
    seed: u64,

    /// Ticker count for the synthetic panel (at least 1)
    #[arg(long, default_value_t = 48, requires = "synth")]
    tickers: usize,

    /// Trading-day count for the synthetic panel (at least 2)
    #[arg(long, default_value_t = 246, requires = "synth")]
    days: usize,

    /// Daily volatility of the synthetic panel (positive)
    #[arg(long, default_value_t = 0.02, requires = "synth")]
    vol: f64,

    /// Keep only tickers listed in this file (one per line), or "nifty50" for the built-in set
    #[arg(long, value_name = "PATH|nifty50")]
    allowlist: Option<String>,
}

impl SourceArgs {
    fn load(&self) -> ferisk::Result<PricePanel> {
        let allow = self.allow_tickers()?;
        if self.synth {
            let panel = market::synth_panel(self.seed, self.tickers, self.days, self.vol)?;
            match &allow {
                Some(keep) => panel.restrict(keep),
                None => Ok(panel),
            }
        } else {
            let path = self.input.as_ref().expect("clap enforces one source");
            market::load_price_csv(path, self.csv_format.into(), allow.as_deref())
        }
    }

    fn allow_tickers(&self) -> ferisk::Result<Option<Vec<String>>> {
        let Some(spec) = &self.allowlist else {
            return Ok(None);
        };
        if spec == "nifty50" {
            return Ok(Some(
                market::nifty50_tickers()
                    .iter()
                    .map(|t| t.to_string())
                    .collect(),
            ));
        }
        let text = std::fs::read_to_string(spec)
            .map_err(|e| ferisk::Error::Ingestion(format!("{spec}: {e}")))?;
        let tickers: Vec<String> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(String::from)
            .collect();
        if tickers.is_empty() {
            return Err(ferisk::Error::Ingestion(format!(
                "{spec}: allowlist names no tickers"
            )));
        }
        Ok(Some(tickers))
    }
}

/// How returns are histogrammed and how entropy counts its support.
#[derive(Args)]
struct GridArgs {
    /// Return-histogram bin count J (at least 1)
    #[arg(long, default_value_t = 15)]
    bins: usize,

    /// Entropy support count: fixed uses all J bins, nonzero only the occupied ones
    #[arg(long, value_enum, default_value_t = SupportArg::Fixed)]
    support_rule: SupportArg,
}

impl GridArgs {
    fn entropy_params(&self, q: f64) -> ferisk::Result<EntropyParams> {
        let rule = match self.support_rule {
            SupportArg::Fixed => SupportRule::FixedBinCount(self.bins),
            SupportArg::Nonzero => SupportRule::NonzeroSupport,
        };
        EntropyParams::new(q, rule)
    }

    fn config(&self, measure: Measure, lambda: f64, q: f64) -> ferisk::Result<RiskConfig> {
        RiskConfig::new(measure, lambda, self.entropy_params(q)?)
    }
}

#[derive(Args)]
struct RankArgs {
    #[command(flatten)]
    source: SourceArgs,

    #[command(flatten)]
    grid: GridArgs,

    /// Risk measure: eu-fe, eu-fev, neu-fe or neu-fev
    #[arg(long, default_value = "neu-fev", value_parser = parse_measure)]
    measure: Measure,

    /// Entropy order q in [0, 1]
    #[arg(long, default_value_t = 0.5)]
    q: f64,

    /// Entropy weight lambda in [0, 1]; 0 ranks by expected utility alone
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,

    /// Rows of the ranking to print (the CSV always holds all of them)
    #[arg(long, default_value_t = 5)]
    k: usize,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    source: SourceArgs,

    #[command(flatten)]
    grid: GridArgs,

    /// Risk measure: eu-fe, eu-fev, neu-fe or neu-fev
    #[arg(long, default_value = "neu-fev", value_parser = parse_measure)]
    measure: Measure,

    /// Entropy orders to sweep, each in [0, 1]; default 0.05..=1.00 step 0.05
    #[arg(long, value_delimiter = ',', value_name = "Q1,Q2,...")]
    q_grid: Option<Vec<f64>>,

    /// Entropy weights to sweep, each in [0, 1]; default 0,0.25,0.5,0.75,1
    #[arg(long, value_delimiter = ',', value_name = "L1,L2,...")]
    lambda_grid: Option<Vec<f64>>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    source: SourceArgs,

    #[command(flatten)]
    grid: GridArgs,

    /// Risk-measure targets to fit (default: all four)
    #[arg(long, value_delimiter = ',', value_parser = parse_measure, value_name = "M1,M2,...")]
    measures: Option<Vec<Measure>>,

    /// Models to fit: ridge, lasso, random_forest, ann (default: all four)
    #[arg(long, value_delimiter = ',', value_parser = parse_model, value_name = "M1,M2,...")]
    models: Option<Vec<ModelKind>>,

    /// Entropy order q of the target scores, in [0, 1]
    #[arg(long, default_value_t = 0.5)]
    q: f64,

    /// Entropy weight lambda of the target scores, in [0, 1]
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,

    /// Bootstrap replications behind the entropy-stability feature (at least 10)
    #[arg(long, default_value_t = 50)]
    bootstrap_reps: usize,

    /// Seed for the train/test shuffle and model initialization
    #[arg(long, default_value_t = 7)]
    split_seed: u64,

    /// Fraction of rows held out for testing, in (0, 1)
    #[arg(long, default_value_t = 0.2)]
    test_frac: f64,

    /// Leave-one-out evaluation instead of a single shuffled split
    #[arg(long)]
    loo: bool,
}

#[derive(Args)]
struct SynthArgs {
    /// Seed for the price paths
    #[arg(long, default_value_t = 7)]
    seed: u64,

    /// Ticker count (at least 1)
    #[arg(long, default_value_t = 48)]
    tickers: usize,

    /// Trading-day count (at least 2)
    #[arg(long, default_value_t = 246)]
    days: usize,

    /// Daily volatility (positive)
    #[arg(long, default_value_t = 0.02)]
    vol: f64,

    /// Output layout: long (date,ticker,close rows) or wide (one column per ticker)
    #[arg(long, value_enum, default_value_t = FormatArg::Long)]
    csv_format: FormatArg,

    /// Output file; defaults to prices.csv inside --out-dir
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EntropyArgs {
    /// Probabilities of the distribution, comma separated; must sum to 1
    #[arg(long, value_delimiter = ',', required = true, value_name = "P1,P2,...")]
    probs: Vec<f64>,

    /// Entropy order q in [0, 1]
    #[arg(long, default_value_t = 0.5)]
    q: f64,

    /// Support count: nonzero (positive entries) or fixed (the full vector length)
    #[arg(long, value_enum, default_value_t = SupportArg::Nonzero)]
    support_rule: SupportArg,

    /// Print the raw fractional entropy S_q instead of the normalized value
    #[arg(long)]
    raw: bool,
}

#[derive(ValueEnum, Clone, Copy)]
enum FormatArg {
    Long,
    Wide,
}

impl From<FormatArg> for CsvFormat {
    fn from(f: FormatArg) -> CsvFormat {
        match f {
            FormatArg::Long => CsvFormat::Long,
            FormatArg::Wide => CsvFormat::Wide,
        }
    }
}

#[derive(ValueEnum, Clone, Copy)]
enum SupportArg {
    Fixed,
    Nonzero,
}

fn parse_measure(text: &str) -> Result<Measure, String> {
    Measure::parse(text).map_err(|e| e.to_string())
}

fn parse_model(text: &str) -> Result<ModelKind, String> {
    ModelKind::parse(text).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    require_source(&cli);
    if cli.threads > 0 {
        // Only this binary configures the global pool, so this cannot race.
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("error: setting --threads failed: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

/// --input/--synth form a clap group, which enforces mutual exclusion; the
/// group cannot also be marked required because it lives in a flattened
/// struct, so the presence check happens here (still a usage error).
fn require_source(cli: &Cli) {
    let source = match &cli.command {
        Command::Rank(a) => &a.source,
        Command::Sweep(a) => &a.source,
        Command::Validate(a) => &a.source,
        Command::Synth(_) | Command::Entropy(_) => return,
    };
    if !source.synth && source.input.is_none() {
        Cli::command()
            .error(
                ErrorKind::MissingRequiredArgument,
                "pass one of --input <PATH> or --synth",
            )
            .exit();
    }
}

fn run(cli: &Cli) -> ferisk::Result<()> {
    match &cli.command {
        Command::Rank(a) => cmd_rank(a, &cli.out_dir),
        Command::Sweep(a) => cmd_sweep(a, &cli.out_dir),
        Command::Validate(a) => cmd_validate(a, &cli.out_dir),
        Command::Synth(a) => cmd_synth(a, &cli.out_dir),
        Command::Entropy(a) => cmd_entropy(a),
    }
}

/// Panel -> log returns -> shared bin grid -> one prospect per ticker.
fn prospects_from(panel: &PricePanel, bins: usize) -> ferisk::Result<Vec<Prospect>> {
    let returns = panel.log_returns()?;
    let grid = returns.grid(bins)?;
    returns.prospects(&grid)
}

fn cmd_rank(args: &RankArgs, out_dir: &std::path::Path) -> ferisk::Result<()> {
    let panel = args.source.load()?;
    let prospects = prospects_from(&panel, args.grid.bins)?;
    let cfg = args.grid.config(args.measure, args.lambda, args.q)?;
    let ranking = rank(&prospects, &cfg)?;
    print_ranking(&ranking, args.k);

    report::ensure_dir(out_dir)?;
    let csv_path = report::write_ranking_csv(out_dir, cfg.measure.name(), &ranking)?;
    let mut meta = RunMetadata::new("rank", cfg);
    meta.seed = Some(args.source.seed);
    meta.bins = Some(args.grid.bins);
    let mut rep = Report::new(meta);
    rep.rankings.insert(cfg.measure.name().to_string(), ranking);
    rep.record_output(&csv_path);
    let json_path = report::write_report_json(out_dir, &rep)?;
    println!("wrote {}", csv_path.display());
    println!("wrote {}", json_path.display());
    Ok(())
}

fn print_ranking(ranking: &Ranking, k: usize) {
    println!("{:>4}  {:<10}  {:>14}", "rank", "stock", "total");
    for entry in ranking.entries().iter().take(k) {
        println!(
            "{:>4}  {:<10}  {:>14.6}",
            entry.rank, entry.label, entry.score.total
        );
    }
}

fn cmd_sweep(args: &SweepArgs, out_dir: &std::path::Path) -> ferisk::Result<()> {
    let panel = args.source.load()?;
    let prospects = prospects_from(&panel, args.grid.bins)?;
    let default = SweepGrid::default_grid();
    let grid = SweepGrid::new(
        args.q_grid
            .clone()
            .unwrap_or_else(|| default.q_values().to_vec()),
        args.lambda_grid
            .clone()
            .unwrap_or_else(|| default.lambda_values().to_vec()),
    )?;
    // The grid supplies q and lambda per point; the base config only
    // contributes the measure and the support rule.
    let base = args.grid.config(args.measure, 0.0, 0.5)?;
    let heatmap = ferisk::sweep::sweep(&prospects, &grid, &base)?;

    report::ensure_dir(out_dir)?;
    let csv_path = report::write_heatmap_csv(out_dir, &heatmap)?;
    let mut meta = RunMetadata::new("sweep", base);
    meta.seed = Some(args.source.seed);
    meta.bins = Some(args.grid.bins);
    meta.notes
        .push(format!("q grid: {} points", grid.q_values().len()));
    meta.notes.push(format!(
        "lambda grid: {} points",
        grid.lambda_values().len()
    ));
    let mut rep = Report::new(meta);
    rep.record_output(&csv_path);
    let json_path = report::write_report_json(out_dir, &rep)?;
    println!(
        "swept {} stocks over {} grid points",
        heatmap.stocks().len(),
        grid.q_values().len() * grid.lambda_values().len()
    );
    println!("wrote {}", csv_path.display());
    println!("wrote {}", json_path.display());
    Ok(())
}

fn cmd_validate(args: &ValidateArgs, out_dir: &std::path::Path) -> ferisk::Result<()> {
    let panel = args.source.load()?;
    let prospects = prospects_from(&panel, args.grid.bins)?;
    let measures = args
        .measures
        .clone()
        .unwrap_or_else(|| Measure::ALL.to_vec());
    let models = args
        .models
        .clone()
        .unwrap_or_else(|| ModelKind::ALL.to_vec());
    let plan = if args.loo {
        SplitPlan::LeaveOneOut {
            seed: args.split_seed,
        }
    } else {
        SplitPlan::Shuffled {
            test_frac: args.test_frac,
            seed: args.split_seed,
        }
    };

    let mut entries = Vec::new();
    let mut feature_names = Vec::new();
    for &measure in &measures {
        let cfg = args.grid.config(measure, args.lambda, args.q)?;
        let features = build_features(&prospects, &cfg, args.bootstrap_reps, args.source.seed)?;
        feature_names = features.feature_names().to_vec();
        for &model in &models {
            let fit = fit_model(&features, &ModelSpec::default_for(model), &plan)?;
            entries.push(ValidationEntry::from_fit(measure, &fit));
        }
    }
    print_validation(&entries);

    report::ensure_dir(out_dir)?;
    let summary_path = report::write_validation_summary(out_dir, &entries)?;
    let long_path = report::write_r2_long(out_dir, &entries)?;
    let first_cfg = args.grid.config(measures[0], args.lambda, args.q)?;
    let mut meta = RunMetadata::new("validate", first_cfg);
    meta.seed = Some(args.source.seed);
    meta.split_seed = Some(args.split_seed);
    meta.bins = Some(args.grid.bins);
    meta.features = feature_names;
    meta.notes.push(format!(
        "measures: {}",
        measures
            .iter()
            .map(|m| m.name())
            .collect::<Vec<_>>()
            .join(",")
    ));
    meta.notes.push(format!(
        "models: {}",
        models
            .iter()
            .map(|m| m.name())
            .collect::<Vec<_>>()
            .join(",")
    ));
    meta.notes
        .push(format!("bootstrap_reps: {}", args.bootstrap_reps));
    meta.notes.push(if args.loo {
        "split: leave-one-out".to_string()
    } else {
        format!("split: shuffled, test_frac {}", args.test_frac)
    });
    let mut rep = Report::new(meta);
    rep.validation = entries;
    rep.record_output(&summary_path);
    rep.record_output(&long_path);
    let json_path = report::write_report_json(out_dir, &rep)?;
    println!("wrote {}", summary_path.display());
    println!("wrote {}", long_path.display());
    println!("wrote {}", json_path.display());
    Ok(())
}

fn print_validation(entries: &[ValidationEntry]) {
    println!(
        "{:<14}  {:<8}  {:>12}  {:>10}",
        "model", "measure", "test_mse", "test_r2"
    );
    for e in entries {
        println!(
            "{:<14}  {:<8}  {:>12.4e}  {:>10.6}",
            e.model.name(),
            e.measure.name(),
            e.mse,
            e.r2
        );
    }
}

fn cmd_synth(args: &SynthArgs, out_dir: &std::path::Path) -> ferisk::Result<()> {
    let panel = market::synth_panel(args.seed, args.tickers, args.days, args.vol)?;
    let path = match &args.out {
        Some(p) => p.clone(),
        None => {
            report::ensure_dir(out_dir)?;
            out_dir.join("prices.csv")
        }
    };
    market::write_price_csv(&panel, &path, args.csv_format.into())?;
    println!(
        "wrote {} ({} tickers x {} days)",
        path.display(),
        panel.tickers().len(),
        panel.dates().len()
    );
    Ok(())
}

fn cmd_entropy(args: &EntropyArgs) -> ferisk::Result<()> {
    let dist = Distribution::new(args.probs.clone())?;
    let value = if args.raw {
        fractional_entropy(&dist, args.q)?
    } else {
        let rule = match args.support_rule {
            SupportArg::Fixed => SupportRule::FixedBinCount(args.probs.len()),
            SupportArg::Nonzero => SupportRule::NonzeroSupport,
        };
        normalized_fractional_entropy(&dist, &EntropyParams::new(args.q, rule)?)?
    };
    println!("{value}");
    Ok(())
}
