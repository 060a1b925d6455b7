use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use boostcde::TrainConfig;
use clap::{Parser, Subcommand};
use tacbid::harness::{
    eval_predictor_rmse, parse_kv, play_game, run_tournament, verify, AgentSpec, Models, TournamentConfig, Verdict,
};
use tacbid::market::GameRecord;
use tacbid::predictors::features::{bank_key_name, feature_names};
use tacbid::predictors::{extract_training_set, PredictorVariant};
use tacbid::TacError;

#[derive(Parser)]
#[command(name = "tacbid", version, about = "Simulated travel auctions and bidding agents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play one game and write its record as JSON Lines.
    Simulate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Roster file of `agent.<name> = <description>` lines, or inline
        /// descriptions separated by `;`.
        #[arg(long)]
        roster: String,
        /// Directory of trained models.
        #[arg(long)]
        models: Option<PathBuf>,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a tournament from a config file.
    Tournament {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        models: Option<PathBuf>,
    },
    /// Train predictor models from game records.
    Train {
        /// Record files or directories of `.jsonl` records.
        #[arg(long, num_args = 1.., required = true)]
        logs: Vec<PathBuf>,
        #[arg(long, default_value_t = 50)]
        k: usize,
        #[arg(long, default_value_t = 1000)]
        rounds: usize,
        /// Threshold candidates per feature; 0 searches every one.
        #[arg(long, default_value_t = 64)]
        max_thresholds: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Root mean squared error of a predictor's point estimates.
    EvalPredictor {
        #[arg(long, num_args = 1.., required = true)]
        logs: Vec<PathBuf>,
        #[arg(long)]
        variant: String,
        #[arg(long)]
        models: Option<PathBuf>,
    },
    /// Write the hotel training rows as one CSV per model key.
    ExtractFeatures {
        #[arg(long, num_args = 1.., required = true)]
        logs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-simulate a record and compare it with the log.
    Replay {
        #[arg(long)]
        record: PathBuf,
    },
}

fn read_record(path: &Path) -> Result<GameRecord> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    GameRecord::read_jsonl(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

fn read_logs(paths: &[PathBuf]) -> Result<Vec<GameRecord>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut inner: Vec<PathBuf> = fs::read_dir(p)?
                .map(|e| e.map(|e| e.path()))
                .collect::<io::Result<_>>()?;
            inner.retain(|f| f.extension().is_some_and(|x| x == "jsonl"));
            inner.sort();
            files.extend(inner);
        } else {
            files.push(p.clone());
        }
    }
    if files.is_empty() {
        bail!(TacError::Config("no record files found".into()));
    }
    files.iter().map(|f| read_record(f)).collect()
}

fn load_models(dir: &Option<PathBuf>) -> Result<Models> {
    match dir {
        Some(d) => Models::load(d).with_context(|| format!("loading models from {}", d.display())),
        None => Ok(Models::default()),
    }
}

fn parse_roster(text: &str) -> Result<Vec<(String, AgentSpec)>> {
    let path = Path::new(text);
    if path.is_file() {
        let mut roster = Vec::new();
        for (k, v) in parse_kv(&fs::read_to_string(path)?)? {
            let name = k
                .strip_prefix("agent.")
                .ok_or_else(|| TacError::Config(format!("unexpected roster key {k:?}")))?;
            roster.push((name.to_string(), AgentSpec::parse(&v)?));
        }
        return Ok(roster);
    }
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .enumerate()
        .map(|(k, d)| Ok((format!("agent{k}"), AgentSpec::parse(d)?)))
        .collect()
}

fn write_record(record: &GameRecord, out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(p) => record.write_jsonl(BufWriter::new(File::create(p)?))?,
        None => record.write_jsonl(io::stdout().lock())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Simulate {
            seed,
            roster,
            models,
            out,
        } => {
            let roster = parse_roster(&roster)?;
            if roster.is_empty() || roster.len() > tacbid::market::MAX_AGENTS {
                bail!(TacError::Config(format!("roster has {} agents", roster.len())));
            }
            let outcome = play_game(seed, &roster, &load_models(&models)?)?;
            write_record(&outcome.record, &out)?;
            for ((name, _), (u, e, s)) in roster.iter().zip(outcome.record.scores()) {
                eprintln!("{name}: score {s:.0} (utility {u:.0}, expenditure {e:.0})");
            }
        }
        Command::Tournament { config, out_dir, models } => {
            let text = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let config = TournamentConfig::parse(&text)?;
            let initial = models.as_deref().map(Models::load).transpose()?;
            let result = run_tournament(&config, initial)?;
            let games = out_dir.join("games");
            fs::create_dir_all(&games)?;
            for (i, r) in result.records.iter().enumerate() {
                r.write_jsonl(BufWriter::new(File::create(games.join(format!("game_{i:05}.jsonl")))?))?;
            }
            result.report.write_csv(File::create(out_dir.join("report.csv"))?)?;
            result.models.save(&out_dir.join("models"))?;
            result.report.write_csv(io::stdout().lock())?;
            let c = &result.counters;
            eprintln!(
                "{} games, {} voided, {} assertion checks, {} violations",
                result.records.len(),
                result.voided.len(),
                c.checks,
                c.violations()
            );
        }
        Command::Train {
            logs,
            k,
            rounds,
            max_thresholds,
            out,
        } => {
            let records = read_logs(&logs)?;
            let config = TrainConfig {
                k,
                rounds,
                max_thresholds: (max_thresholds > 0).then_some(max_thresholds),
                ..Default::default()
            };
            let tag = out.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            let models = Models::train(&records, &config, true, &tag)?;
            models.save(&out)?;
            eprintln!("trained on {} games into {}", records.len(), out.display());
        }
        Command::EvalPredictor { logs, variant, models } => {
            let records = read_logs(&logs)?;
            let variant: PredictorVariant = variant.parse()?;
            let models = load_models(&models)?;
            if variant.needs_bank() && models.bank.is_none() {
                bail!(TacError::Config(format!("{variant} needs trained models (--models)")));
            }
            println!("{variant},{:.4}", eval_predictor_rmse(&records, &models.predictor(variant)));
        }
        Command::ExtractFeatures { logs, out } => {
            let records = read_logs(&logs)?;
            fs::create_dir_all(&out)?;
            let names = feature_names();
            for (key, rows) in extract_training_set(&records).iter().enumerate() {
                let path = out.join(format!("{}.csv", bank_key_name(key)));
                boostcde::write_csv(BufWriter::new(File::create(&path)?), &names, rows)?;
                eprintln!("{}: {} rows", path.display(), rows.len());
            }
        }
        Command::Replay { record } => match verify(&read_record(&record)?)? {
            Verdict::Pass => println!("ok"),
            Verdict::Mismatch {
                line,
                original,
                regenerated,
            } => {
                let mut err = io::stderr().lock();
                writeln!(err, "mismatch at line {line}")?;
                writeln!(err, "logged:      {original}")?;
                writeln!(err, "regenerated: {regenerated}")?;
                return Ok(ExitCode::from(2));
            }
        },
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
