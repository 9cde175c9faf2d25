use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rctgan::dataset::{check_referential_integrity, load_database, write_database, Database};
use rctgan::detection::{evaluate, DetectionReport, DEFAULT_FOLDS};
use rctgan::rctgan::GanError;
use rctgan::schema::{topological_order, RelationalSchema};
use rctgan::synthesizer::{fit_database, load_model, sample_database, save_model, SynthError};

mod config;

use config::RunConfig;

#[derive(Parser)]
#[command(name = "rctgan", version, about = "Fit, sample and evaluate relational database synthesizers")]
struct Cli {
    /// Cap on worker threads (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one model per table and write the model file.
    Fit(FitArgs),
    /// Generate a synthetic database from a model file.
    Sample(SampleArgs),
    /// Score a synthetic database against the real one.
    Eval(EvalArgs),
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    metadata: PathBuf,
    /// Directory holding one `<table>.csv` per table.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// JSON file with training settings plus `seed` and `folds`.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// 1 conditions on parents, 2 also on grandparents.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    depth: Option<u8>,
    /// Per-epoch losses as JSON lines (default: `<out>.log.jsonl`).
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Multiplier on the row counts of root tables.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    metadata: PathBuf,
    #[arg(long)]
    real: PathBuf,
    #[arg(long)]
    synth: PathBuf,
    #[arg(long)]
    report: PathBuf,
    #[arg(long, default_value_t = DEFAULT_FOLDS)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Failure of a command, split by exit code.
enum Failure {
    /// Bad input: metadata, data, config or model file.
    Input(String),
    /// Training or output failure.
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

fn load_checked(schema: &RelationalSchema, dir: &Path) -> Result<Database, Failure> {
    let db = load_database(schema, dir).map_err(|e| Failure::Input(e.to_string()))?;
    let violations = check_referential_integrity(&db);
    if let Some(v) = violations.first() {
        return Err(Failure::Input(format!(
            "{}: {} referential-integrity violations, first: table `{}`, row {}, column `{}` = {:?}",
            dir.display(),
            violations.len(),
            v.table,
            v.row,
            v.column,
            v.value
        )));
    }
    Ok(db)
}

fn fit(args: FitArgs) -> Result<(), Failure> {
    let mut run = match &args.config {
        Some(path) => RunConfig::from_json(&read_text(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?,
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        run.seed = seed;
    }
    if let Some(depth) = args.depth {
        run.train.max_depth = depth.into();
    }
    run.train.validate().map_err(|e| Failure::Input(format!("invalid configuration: {e}")))?;

    let schema = RelationalSchema::from_json(&read_text(&args.metadata)?)
        .map_err(|e| Failure::Input(format!("{}: {e}", args.metadata.display())))?;
    let db = load_checked(&schema, &args.data)?;
    log::info!("loaded {} tables from {}", schema.table_names().count(), args.data.display());

    let model = fit_database(&db, &run.train, run.seed).map_err(|e| match e {
        SynthError::Gan { source: GanError::InvalidConfig(m), .. } => Failure::Input(format!("invalid configuration: {m}")),
        SynthError::Gan { .. } => Failure::Runtime(format!("training failed: {e}")),
        other => Failure::Input(other.to_string()),
    })?;
    save_model(&model, &args.out).map_err(|e| Failure::Runtime(e.to_string()))?;

    let log_path = args.log.unwrap_or_else(|| PathBuf::from(format!("{}.log.jsonl", args.out.display())));
    write_training_log(&model, &log_path).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", log_path.display())))?;
    log::info!("model written to {}, training log to {}", args.out.display(), log_path.display());
    Ok(())
}

fn write_training_log(model: &rctgan::synthesizer::DatabaseModel, path: &Path) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    for table in topological_order(&model.schema) {
        let Some(m) = &model.tables[&table] else { continue };
        for s in &m.history {
            let line = serde_json::json!({
                "table": table,
                "epoch": s.epoch,
                "critic_loss": s.critic_loss,
                "gen_loss": s.gen_loss,
                "penalty": s.penalty,
            });
            writeln!(out, "{line}")?;
        }
    }
    out.flush()
}

fn sample(args: SampleArgs) -> Result<(), Failure> {
    if !(args.scale > 0.0 && args.scale.is_finite()) {
        return Err(Failure::Input(format!("--scale must be a positive number, got {}", args.scale)));
    }
    let model = load_model(&args.model).map_err(|e| Failure::Input(e.to_string()))?;
    let db = sample_database(&model, args.scale, args.seed).map_err(|e| Failure::Runtime(e.to_string()))?;
    write_database(&db, &args.out).map_err(|e| Failure::Runtime(e.to_string()))?;
    for (table, n) in db.row_counts() {
        log::info!("{table}: {n} rows");
    }
    Ok(())
}

fn eval(args: EvalArgs) -> Result<(), Failure> {
    if args.folds < 2 {
        return Err(Failure::Input(format!("--folds must be at least 2, got {}", args.folds)));
    }
    let schema = RelationalSchema::from_json(&read_text(&args.metadata)?)
        .map_err(|e| Failure::Input(format!("{}: {e}", args.metadata.display())))?;
    let real = load_checked(&schema, &args.real)?;
    let synth = load_checked(&schema, &args.synth)?;
    let report = evaluate(&real, &synth, args.folds, args.seed).map_err(|e| Failure::Input(e.to_string()))?;
    let json = serde_json::to_string_pretty(&report).expect("report serialises");
    fs::write(&args.report, json + "\n").map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", args.report.display())))?;
    print!("{}", render(&report));
    Ok(())
}

/// Aligned plain-text view of a report.
fn render(report: &DetectionReport) -> String {
    let mut rows: Vec<[String; 4]> = vec![["kind".into(), "name".into(), "score".into(), "auc".into()]];
    for (name, t) in &report.tables {
        rows.push(["LD".into(), name.clone(), format!("{:.4}", t.ld), format!("{:.4}", t.auc)]);
    }
    for r in &report.relationships {
        rows.push(["P-C LD".into(), r.child.clone(), format!("{:.4}", r.pc_ld), format!("{:.4}", r.auc)]);
    }
    let widths: Vec<usize> = (0..4).map(|i| rows.iter().map(|r| r[i].len()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for r in &rows {
        let line = format!("{:<w0$}  {:<w1$}  {:>w2$}  {:>w3$}", r[0], r[1], r[2], r[3], w0 = widths[0], w1 = widths[1], w2 = widths[2], w3 = widths[3]);
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out.push_str(&format!("average LD: {:.4}\n", report.avg_ld));
    match report.avg_pc_ld {
        Some(v) => out.push_str(&format!("average P-C LD: {v:.4}\n")),
        None => out.push_str("average P-C LD: n/a (no relationships)\n"),
    }
    out.push_str(&format!("folds: {}, seed: {}\n", report.folds, report.seed));
    out
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RCTGAN_LOG", "error")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().expect("thread pool is configured once");
    }
    let result = match cli.command {
        Command::Fit(a) => fit(a),
        Command::Sample(a) => sample(a),
        Command::Eval(a) => eval(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Input(m) | Failure::Runtime(m)) = &f;
            eprintln!("error: {m}");
            ExitCode::from(f.code())
        }
    }
}
