//! Command-line interface. One binary hosts every role: experiment
//! orchestration, mutant maintenance, the built-in harness the driver
//! spawns as a child, analysis, charts, and cross-language corpora.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analysis::{AnalysisConfig, Analysis, BucketScheme};
use crate::driver::{self, RunOptions};
use crate::harness;
use crate::mutation::{self, Choice};
use crate::report::{self, BucketRow};
use crate::schema::{self, ExperimentLayout, Task};
use crate::trial::{TrialResult, TrialStatus};
use crate::workloads;

#[derive(Parser)]
#[command(
    name = "crucible",
    version,
    about = "Evaluate property-based testing strategies with ground-truth mutation testing"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Manage experiments and run tests
    Experiment {
        #[command(subcommand)]
        command: ExperimentCommand,
    },
    /// Add workloads to an experiment
    Workload {
        #[command(subcommand)]
        command: WorkloadCommand,
    },
    /// Inspect and toggle mutants embedded in source files
    Mutant {
        #[command(subcommand)]
        command: MutantCommand,
    },
    /// Aggregate a results log into summaries and comparisons
    Analyze(AnalyzeArgs),
    /// Render bucket charts and tables from an analysis summary
    Report(ReportArgs),
    /// The built-in strategy runner (spawned by the driver)
    Harness {
        #[command(subcommand)]
        command: HarnessCommand,
    },
    /// Generate and replay cross-language input corpora
    Corpus {
        #[command(subcommand)]
        command: CorpusCommand,
    },
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Create an experiment directory skeleton
    New { name: PathBuf },
    /// Run a test: stage each task's mutant, execute every strategy trial,
    /// and append raw records to the results log
    Run {
        /// Test name, e.g. bst/default (resolves to tests/<name>.json)
        #[arg(long)]
        tests: String,
        #[arg(long, default_value = ".")]
        experiment: PathBuf,
        /// Concurrent (task, strategy) units; trials stay serial within one
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Override the per-trial timeout in seconds
        #[arg(long)]
        timeout: Option<f64>,
        /// Override the trial count
        #[arg(long)]
        trials: Option<u32>,
        /// Experiment seed; per-trial seeds derive from it
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum WorkloadCommand {
    /// Copy a built-in workload into an experiment and write its default test
    Add {
        #[arg(long, default_value = ".")]
        experiment: PathBuf,
        workload: String,
    },
}

#[derive(Subcommand)]
enum MutantCommand {
    /// List every mutant under a directory
    List { dir: PathBuf },
    /// Activate one alternative of a variation, rewriting the file atomically
    Toggle {
        file: PathBuf,
        #[arg(long)]
        variation: usize,
        /// `base` or a mutant name
        #[arg(long)]
        select: String,
    },
    /// Parse all files and exit nonzero on the first grammar violation
    Validate { dir: PathBuf },
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    results: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Comma-separated ascending thresholds in seconds
    #[arg(long, default_value = "0.1,1,10,60")]
    buckets: String,
    /// Bucket by mean over found trials for any task found at least once
    #[arg(long)]
    partial: bool,
    /// Defaults to the experiment's analysis/ directory
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    summary: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Also write the summary table as CSV
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Hatch a strategy's bar (repeatable)
    #[arg(long)]
    hatch: Vec<String>,
    /// Map a strategy to a palette color, e.g. --color bespoke=black
    #[arg(long)]
    color: Vec<String>,
}

#[derive(Subcommand)]
enum HarnessCommand {
    /// Run one trial and print the child-protocol JSON line
    Run {
        #[arg(long)]
        workload: String,
        #[arg(long)]
        property: String,
        #[arg(long)]
        strategy: String,
        /// Cross-checked against the staged sources
        #[arg(long)]
        mutant: Option<String>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        timeout_s: Option<f64>,
        #[arg(long, default_value_t = schema::DEFAULT_MAX_TESTS)]
        max_tests: u64,
        #[arg(long)]
        max_discards: Option<u64>,
        #[arg(long, default_value_t = harness::DEFAULT_SIZE)]
        size: u64,
        /// Staged workload directory
        #[arg(long, default_value = ".")]
        dir: PathBuf,
    },
    /// Validate a staged workload directory (the build step)
    Check {
        #[arg(long)]
        workload: String,
        #[arg(long, default_value = ".")]
        dir: PathBuf,
    },
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// Generate serialized inputs with per-input generation times
    Gen {
        #[arg(long)]
        workload: String,
        #[arg(long)]
        strategy: String,
        #[arg(long)]
        property: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        count: u64,
        #[arg(long, default_value_t = harness::DEFAULT_SIZE)]
        size: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Replay a corpus against a staged mutant, reporting decoupled
    /// generation and execution times
    Run {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        workload: String,
        #[arg(long)]
        property: String,
        #[arg(long)]
        mutant: String,
        #[arg(long, default_value_t = schema::DEFAULT_TIMEOUT_S)]
        timeout_s: f64,
        /// Already-staged workload directory; a scratch staging of the
        /// built-in workload is used when omitted
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

/// Run the CLI; the return value is the process exit code.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

type DynError = Box<dyn std::error::Error>;

fn dispatch(cli: Cli) -> Result<i32, DynError> {
    match cli.command {
        Command::Experiment { command } => experiment(command),
        Command::Workload { command } => workload(command),
        Command::Mutant { command } => mutant(command),
        Command::Analyze(args) => analyze(args),
        Command::Report(args) => report_cmd(args),
        Command::Harness { command } => harness_cmd(command),
        Command::Corpus { command } => corpus(command),
    }
}

fn experiment(command: ExperimentCommand) -> Result<i32, DynError> {
    match command {
        ExperimentCommand::New { name } => {
            let layout = ExperimentLayout::new(&name);
            layout.create()?;
            println!(
                "created experiment at {} (tests/, workloads/, results/, analysis/)",
                name.display()
            );
            Ok(0)
        }
        ExperimentCommand::Run {
            tests,
            experiment,
            jobs,
            timeout,
            trials,
            seed,
        } => {
            let layout = ExperimentLayout::new(&experiment);
            let opts = RunOptions {
                exe: std::env::current_exe()?,
                jobs,
                experiment_seed: seed,
                trials_override: trials,
                timeout_override: timeout,
            };
            let report = driver::run_experiment(&layout, &tests, &opts)?;
            println!(
                "{}: {} unit(s), {} new record(s), {} skipped, {} error(s)",
                report.log_path.display(),
                report.units,
                report.new_records,
                report.skipped,
                report.errors
            );
            Ok(if report.errors > 0 { 1 } else { 0 })
        }
    }
}

fn workload(command: WorkloadCommand) -> Result<i32, DynError> {
    match command {
        WorkloadCommand::Add {
            experiment,
            workload,
        } => {
            let layout = ExperimentLayout::new(&experiment);
            layout.create()?;
            let dir = workloads::install_builtin(&workload, &layout.workloads_dir())?;
            let spec = schema::default_test_spec(&workload);
            let test_path = layout.test_file(&spec.name);
            if let Some(parent) = test_path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(&test_path, serde_json::to_string_pretty(&spec)? + "\n")?;
            println!("added workload at {}", dir.display());
            println!("wrote default test {}", test_path.display());
            Ok(0)
        }
    }
}

fn mutant(command: MutantCommand) -> Result<i32, DynError> {
    let styles = mutation::default_styles();
    match command {
        MutantCommand::List { dir } => {
            let entries = mutation::enumerate_mutants(&dir, &styles)?;
            for e in &entries {
                let marker = if e.active { "  [active]" } else { "" };
                println!("{}\t#{}\t{}{}", e.file.display(), e.variation, e.name, marker);
            }
            println!("{} mutant(s)", entries.len());
            Ok(0)
        }
        MutantCommand::Toggle {
            file,
            variation,
            select,
        } => {
            let ext = file
                .extension()
                .and_then(|e| e.to_str())
                .unwrap_or_default();
            let style = styles
                .get(ext)
                .ok_or_else(|| format!("no comment style for extension `.{ext}`"))?;
            let text = std::fs::read_to_string(&file)?;
            let parsed = mutation::parse_variations(&text, style)?;
            let choice = if select == "base" {
                Choice::Base
            } else {
                Choice::Mutant(select.clone())
            };
            let rendered = parsed.render(&BTreeMap::from([(variation, choice)]))?;
            mutation::write_atomic(&file, &rendered)?;
            println!("{}: variation {} -> {}", file.display(), variation, select);
            Ok(0)
        }
        MutantCommand::Validate { dir } => match mutation::enumerate_mutants(&dir, &styles) {
            Ok(entries) => {
                println!("ok: {} mutant(s)", entries.len());
                Ok(0)
            }
            Err(e) => {
                eprintln!("{e}");
                Ok(1)
            }
        },
    }
}

fn parse_buckets(spec: &str) -> Result<BucketScheme, DynError> {
    let thresholds: Result<Vec<f64>, _> = spec.split(',').map(|s| s.trim().parse()).collect();
    Ok(BucketScheme::new(thresholds?)?)
}

/// The experiment root is the parent of the results/ directory; analysis
/// artifacts default to its analysis/ sibling.
fn default_analysis_dir(results: &Path) -> PathBuf {
    for ancestor in results.ancestors() {
        if ancestor.file_name().and_then(|n| n.to_str()) == Some("results") {
            if let Some(root) = ancestor.parent() {
                return root.join("analysis");
            }
        }
    }
    results
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join("analysis")
}

fn analyze(args: AnalyzeArgs) -> Result<i32, DynError> {
    let config = AnalysisConfig {
        alpha: args.alpha,
        scheme: parse_buckets(&args.buckets)?,
        partial_mode: args.partial,
    };
    config.validate()?;
    let records = driver::read_records(&args.results)?;
    let analysis = crate::analysis::summarize(&records, &config);

    let out_dir = args
        .out_dir
        .unwrap_or_else(|| default_analysis_dir(&args.results));
    std::fs::create_dir_all(&out_dir)?;
    let summary_path = out_dir.join("summary.json");
    std::fs::write(&summary_path, serde_json::to_string_pretty(&analysis)? + "\n")?;
    let comparisons = serde_json::json!({
        "alpha": analysis.alpha,
        "pairs": analysis.comparisons,
        "tests_per_second": analysis.tests_per_second,
    });
    let comparisons_path = out_dir.join("comparisons.json");
    std::fs::write(
        &comparisons_path,
        serde_json::to_string_pretty(&comparisons)? + "\n",
    )?;

    let (_, text) = report::export_table(&analysis.summaries);
    print!("{text}");
    println!("wrote {}", summary_path.display());
    println!("wrote {}", comparisons_path.display());
    Ok(0)
}

fn default_color_assignment(strategies: &[String]) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    let mut next = 0usize;
    for s in strategies {
        let color = if s == "bespoke" {
            "black".to_string()
        } else {
            let mut pick;
            loop {
                pick = report::PALETTE[next % report::PALETTE.len()].0.to_string();
                next += 1;
                if pick != "black" {
                    break;
                }
            }
            pick
        };
        out.insert(s.clone(), color);
    }
    out
}

fn report_cmd(args: ReportArgs) -> Result<i32, DynError> {
    let text = std::fs::read_to_string(&args.summary)?;
    let analysis: Analysis = serde_json::from_str(&text)?;
    let scheme = BucketScheme::new(analysis.buckets.clone())?;

    // group summaries by workload (the first component of the task id)
    let mut by_workload: BTreeMap<String, Vec<crate::analysis::TaskSummary>> = BTreeMap::new();
    for s in &analysis.summaries {
        let workload = s.task.split('/').next().unwrap_or("?").to_string();
        by_workload.entry(workload).or_default().push(s.clone());
    }
    if by_workload.is_empty() {
        return Err("summary contains no tasks".into());
    }

    let mut colors = BTreeMap::new();
    for spec in &args.color {
        let (strategy, color) = spec
            .split_once('=')
            .ok_or_else(|| format!("--color expects strategy=name, got `{spec}`"))?;
        if report::palette_color(color).is_none() {
            return Err(format!("unknown palette color `{color}`").into());
        }
        colors.insert(strategy.to_string(), color.to_string());
    }

    let multiple = by_workload.len() > 1;
    for (workload, summaries) in &by_workload {
        let counts = crate::analysis::bucket_counts(summaries, &scheme);
        let strategies: Vec<String> = counts.keys().cloned().collect();
        let defaults = default_color_assignment(&strategies);
        let rows: Vec<BucketRow> = counts
            .iter()
            .map(|(strategy, counts)| BucketRow {
                label: strategy.clone(),
                counts: counts.clone(),
                color: colors
                    .get(strategy)
                    .unwrap_or_else(|| &defaults[strategy])
                    .clone(),
                hatch: args.hatch.contains(strategy),
            })
            .collect();
        let svg = report::bucket_chart_svg(&rows, &scheme, &format!("{workload} tasks"))?;
        let path = if multiple {
            let stem = args.out.file_stem().and_then(|s| s.to_str()).unwrap_or("chart");
            args.out
                .with_file_name(format!("{stem}-{workload}.svg"))
        } else {
            args.out.clone()
        };
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, &svg)?;
        println!("wrote {}", path.display());
    }

    let (csv, text) = report::export_table(&analysis.summaries);
    if let Some(csv_path) = &args.csv {
        std::fs::write(csv_path, &csv)?;
        println!("wrote {}", csv_path.display());
    }
    print!("{text}");
    Ok(0)
}

fn harness_cmd(command: HarnessCommand) -> Result<i32, DynError> {
    match command {
        HarnessCommand::Run {
            workload,
            property,
            strategy,
            mutant,
            seed,
            timeout_s,
            max_tests,
            max_discards,
            size,
            dir,
        } => {
            let spec = harness::RunSpec {
                dir,
                workload,
                property,
                strategy,
                mutant,
                seed,
                timeout_s,
                size,
                max_tests,
                max_discards: max_discards.unwrap_or(max_tests.saturating_mul(10)),
            };
            match harness::harness_run(&spec) {
                Ok(result) => {
                    println!("{}", result.to_protocol_line());
                    Ok(match result.status {
                        TrialStatus::Found | TrialStatus::GaveUp => 0,
                        _ => 1,
                    })
                }
                Err(e) => {
                    // protocol-conformant error line so the driver can record it
                    println!("{}", TrialResult::error(e.to_string(), 0.0).to_protocol_line());
                    Ok(1)
                }
            }
        }
        HarnessCommand::Check { workload, dir } => match harness::check_staged(&dir, &workload) {
            Ok(mutants) => {
                println!("ok: {} mutant(s), sources parse, registry complete", mutants.len());
                Ok(0)
            }
            Err(e) => {
                eprintln!("check failed: {e}");
                Ok(1)
            }
        },
    }
}

fn builtin_config(workload: &str) -> Result<schema::WorkloadConfig, DynError> {
    let files = workloads::builtin_workloads();
    let files = files
        .get(workload)
        .ok_or_else(|| format!("unknown built-in workload `{workload}`"))?;
    let config = files
        .iter()
        .find(|f| f.rel_path == "config.json")
        .expect("built-in workloads carry config.json");
    Ok(serde_json::from_str(config.contents)?)
}

fn corpus(command: CorpusCommand) -> Result<i32, DynError> {
    match command {
        CorpusCommand::Gen {
            workload,
            strategy,
            property,
            seed,
            count,
            size,
            out,
        } => {
            let config = builtin_config(&workload)?;
            let kind = config
                .strategies
                .iter()
                .find(|s| s.name == strategy)
                .map(|s| s.kind.clone())
                .ok_or_else(|| format!("workload `{workload}` has no strategy `{strategy}`"))?;
            harness::generate_corpus(&out, &workload, &property, &strategy, kind, seed, size, count)?;
            println!("wrote {} ({count} entries)", out.display());
            Ok(0)
        }
        CorpusCommand::Run {
            corpus,
            workload,
            property,
            mutant,
            timeout_s,
            dir,
        } => {
            // resolve the active mutant from a staged directory, staging the
            // built-in workload into scratch when none is given
            let scratch;
            let staged = match dir {
                Some(d) => d,
                None => {
                    scratch = tempfile::tempdir()?;
                    let wl = workloads::install_builtin(&workload, scratch.path())?;
                    let config = schema::load_workload_config(&wl.join("config.json"))?;
                    let staged = scratch.path().join("staged");
                    driver::apply_mutant(&wl, &config, &mutant, &staged)?;
                    staged
                }
            };
            let config = schema::load_workload_config(&staged.join("config.json"))?;
            let active = harness::staged_active_mutants(&staged, &config)?;
            if active != [mutant.clone()] {
                return Err(format!(
                    "staged directory activates {active:?}, expected [{mutant}]"
                )
                .into());
            }
            let sem = workloads::semantics_for(&active)?;
            let replay =
                crate::crosslang::corpus_run(&corpus, &workload, &property, &sem, timeout_s)?;
            println!("{}", replay.result.to_protocol_line());
            Ok(match replay.result.status {
                TrialStatus::Found | TrialStatus::GaveUp => 0,
                _ => 1,
            })
        }
    }
}

// used by integration tests to resolve tasks
pub fn parse_task(id: &str) -> Option<Task> {
    Task::parse_id(id)
}
