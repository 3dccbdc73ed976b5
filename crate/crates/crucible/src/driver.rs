//! Experiment orchestration: stage a mutant into a scratch copy of its
//! workload, build once per (task, strategy), execute trials as child
//! processes with an external wall-clock timeout, and append
//! protocol-conformant records to the results log.
//!
//! The results log is JSON Lines, one record per trial, append-only. A run
//! is resumable: (task, strategy, trial, seed) tuples already in the log
//! are skipped, so interrupting and restarting an experiment never
//! duplicates or rewrites records.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Stdio;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::mutation::{self, Choice};
use crate::rng::derive_seed;
use crate::schema::{
    expand_tasks, load_test_spec, ExperimentLayout, RunUnit, SchemaError, Task, WorkloadConfig,
};
use crate::trial::{parse_trial_output, TrialResult, TrialStatus};

/// Wall-clock slack past the timeout before the driver kills the child.
/// Children that honor their own soft limit get to report; stalled ones are
/// terminated. Records never report found/gave_up past the honesty bound.
pub const KILL_GRACE_S: f64 = 0.2;

/// Slack allowed on a child-reported time before the trial is reclassified
/// as a timeout.
pub const HONESTY_SLACK_S: f64 = 0.05;

#[derive(Debug, thiserror::Error)]
pub enum DriverError {
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Enumerate(#[from] mutation::EnumerateError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("mutant `{mutant}` not found in workload `{workload}`")]
    MutantNotFound { workload: String, mutant: String },
    #[error("mutant `{name}` appears in more than one variation of workload `{workload}`")]
    DuplicateMutant { workload: String, name: String },
    #[error("results log {path} line {line}: {message}")]
    MalformedRecord {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("failed to spawn `{command}`: {source}")]
    SpawnFailure {
        command: String,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DriverError + '_ {
    move |source| DriverError::Io {
        path: path.to_path_buf(),
        source,
    }
}

// ---------------------------------------------------------------------------
// raw result records

/// One line in the results log. Never mutated once written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawResultRecord {
    pub task: String,
    pub strategy: String,
    pub trial: u32,
    pub seed: u64,
    pub status: TrialStatus,
    pub time_s: f64,
    pub tests: u64,
    pub discards: u64,
    pub counterexample: Option<String>,
    pub gen_time_s: Option<f64>,
    pub exec_time_s: Option<f64>,
    pub started_at: String,
    pub build_id: String,
    /// Captured output, present only on error records.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RawResultRecord {
    pub fn resume_key(&self) -> (String, String, u32, u64) {
        (
            self.task.clone(),
            self.strategy.clone(),
            self.trial,
            self.seed,
        )
    }
}

/// Read and validate every record in a results log.
pub fn read_records(path: &Path) -> Result<Vec<RawResultRecord>, DriverError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: RawResultRecord =
            serde_json::from_str(line).map_err(|e| DriverError::MalformedRecord {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })?;
        out.push(record);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// seeds and templates

/// Per-trial seed: a hash of (experiment seed, task id, strategy, trial),
/// so trials are independent yet reproducible from the experiment seed.
pub fn derive_trial_seed(experiment_seed: u64, task_id: &str, strategy: &str, trial: u32) -> u64 {
    derive_seed(
        experiment_seed,
        &[
            task_id.as_bytes(),
            strategy.as_bytes(),
            trial.to_string().as_bytes(),
        ],
    )
}

/// Identifier for the staged build shared by a (task, strategy) pair's
/// trials.
pub fn build_id(task_id: &str, strategy: &str) -> String {
    format!(
        "{:016x}",
        derive_seed(0, &[b"build", task_id.as_bytes(), strategy.as_bytes()])
    )
}

/// Substitute `{name}` placeholders. Unknown placeholders are left intact;
/// config validation rejects them before a run gets here.
pub fn substitute_template(template: &str, vars: &BTreeMap<&str, String>) -> String {
    let mut out = template.to_string();
    for (name, value) in vars {
        out = out.replace(&format!("{{{name}}}"), value);
    }
    out
}

/// Command lines are split on whitespace; there is no shell and no quoting.
pub fn split_command(command: &str) -> Vec<String> {
    command.split_whitespace().map(str::to_string).collect()
}

// ---------------------------------------------------------------------------
// staging

fn copy_tree(from: &Path, to: &Path) -> Result<(), DriverError> {
    std::fs::create_dir_all(to).map_err(io_err(to))?;
    for entry in std::fs::read_dir(from).map_err(io_err(from))? {
        let entry = entry.map_err(io_err(from))?;
        let src = entry.path();
        let dst = to.join(entry.file_name());
        if src.is_dir() {
            copy_tree(&src, &dst)?;
        } else {
            std::fs::copy(&src, &dst).map_err(io_err(&src))?;
        }
    }
    Ok(())
}

/// Stage a scratch copy of the workload with exactly the task's mutant
/// active and every other variation at base. The original sources are
/// untouched.
pub fn apply_mutant(
    workload_dir: &Path,
    config: &WorkloadConfig,
    mutant: &str,
    dest: &Path,
) -> Result<(), DriverError> {
    if dest.exists() {
        std::fs::remove_dir_all(dest).map_err(io_err(dest))?;
    }
    copy_tree(workload_dir, dest)?;

    let mut found_in = 0usize;
    for root in &config.source_roots {
        let root = dest.join(root);
        let entries = mutation::enumerate_mutants(&root, &config.comment_styles)?;
        let files: BTreeSet<PathBuf> = entries.iter().map(|e| e.file.clone()).collect();
        for file in files {
            let text = std::fs::read_to_string(&file).map_err(io_err(&file))?;
            let style = config
                .comment_styles
                .get(
                    file.extension()
                        .and_then(|e| e.to_str())
                        .unwrap_or_default(),
                )
                .expect("enumerated file has a style");
            let parsed = mutation::parse_variations(&text, style)
                .expect("enumerated file parsed once already");
            let mut selection = BTreeMap::new();
            for (vi, variation) in parsed.variations.iter().enumerate() {
                if variation.mutant(mutant).is_some() {
                    found_in += 1;
                    selection.insert(vi, Choice::Mutant(mutant.to_string()));
                } else {
                    selection.insert(vi, Choice::Base);
                }
            }
            let rendered = parsed.render(&selection).expect("selection is valid");
            mutation::write_atomic(&file, &rendered).map_err(io_err(&file))?;
        }
    }
    match found_in {
        0 => Err(DriverError::MutantNotFound {
            workload: config.name.clone(),
            mutant: mutant.to_string(),
        }),
        1 => Ok(()),
        _ => Err(DriverError::DuplicateMutant {
            workload: config.name.clone(),
            name: mutant.to_string(),
        }),
    }
}

// ---------------------------------------------------------------------------
// running one trial

fn drain_pipe(pipe: Option<impl std::io::Read + Send + 'static>) -> impl FnOnce() -> Vec<u8> {
    let handle = pipe.map(|mut p| {
        std::thread::spawn(move || {
            let mut buf = Vec::new();
            let _ = std::io::Read::read_to_end(&mut p, &mut buf);
            buf
        })
    });
    move || {
        handle
            .map(|h| h.join().unwrap_or_default())
            .unwrap_or_default()
    }
}

#[cfg(unix)]
fn kill_process_group(child: &std::process::Child) {
    // the child was spawned as its own process group leader
    unsafe {
        libc::kill(-(child.id() as i32), libc::SIGKILL);
    }
}

struct ChildOutcome {
    wall_s: f64,
    killed: bool,
    exit_ok: bool,
    stdout: Vec<u8>,
    stderr: Vec<u8>,
}

/// Spawn a command with `cwd`, enforcing `timeout_s` externally: if the
/// child outlives the timeout plus the kill grace, its process group is
/// terminated.
fn run_child(
    argv: &[String],
    cwd: &Path,
    timeout_s: Option<f64>,
) -> Result<ChildOutcome, DriverError> {
    let command_text = argv.join(" ");
    let mut command = std::process::Command::new(&argv[0]);
    command
        .args(&argv[1..])
        .current_dir(cwd)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    #[cfg(unix)]
    {
        use std::os::unix::process::CommandExt;
        command.process_group(0);
    }
    let start = Instant::now();
    let mut child = command.spawn().map_err(|source| DriverError::SpawnFailure {
        command: command_text,
        source,
    })?;
    let stdout = drain_pipe(child.stdout.take());
    let stderr = drain_pipe(child.stderr.take());

    let deadline = timeout_s.map(|t| t + KILL_GRACE_S);
    let mut killed = false;
    let status = loop {
        if let Some(status) = child.try_wait().ok().flatten() {
            break status;
        }
        if let Some(deadline) = deadline {
            if start.elapsed().as_secs_f64() >= deadline {
                kill_process_group(&child);
                killed = true;
                let status = child.wait().expect("child reaped after kill");
                break status;
            }
        }
        std::thread::sleep(Duration::from_millis(2));
    };

    Ok(ChildOutcome {
        wall_s: start.elapsed().as_secs_f64(),
        killed,
        exit_ok: status.success(),
        stdout: stdout(),
        stderr: stderr(),
    })
}

/// Run one trial from an already substituted command line. Timeout
/// enforcement is external: a child that exceeds the wall-clock budget is
/// killed and recorded as `timeout` regardless of what it printed.
pub fn run_trial(argv: &[String], cwd: &Path, timeout_s: f64) -> Result<TrialResult, DriverError> {
    let outcome = run_child(argv, cwd, Some(timeout_s))?;

    if outcome.killed {
        return Ok(TrialResult {
            status: TrialStatus::Timeout,
            time_s: outcome.wall_s,
            tests: 0,
            discards: 0,
            counterexample: None,
            gen_time_s: None,
            exec_time_s: None,
            error: None,
        });
    }

    match parse_trial_output(&outcome.stdout) {
        Ok(mut result) => {
            match result.status {
                TrialStatus::Found | TrialStatus::GaveUp
                    if result.time_s > timeout_s + HONESTY_SLACK_S =>
                {
                    // the child overran its budget before reporting
                    Ok(TrialResult {
                        status: TrialStatus::Timeout,
                        time_s: result.time_s.max(outcome.wall_s),
                        tests: result.tests,
                        discards: result.discards,
                        counterexample: None,
                        gen_time_s: result.gen_time_s,
                        exec_time_s: result.exec_time_s,
                        error: None,
                    })
                }
                TrialStatus::Error => {
                    if result.error.is_none() {
                        result.error = Some(String::from_utf8_lossy(&outcome.stderr).into_owned());
                    }
                    Ok(result)
                }
                _ => Ok(result),
            }
        }
        Err(violation) => {
            let mut detail = format!("{violation}\n--- stdout ---\n");
            detail.push_str(&String::from_utf8_lossy(&outcome.stdout));
            detail.push_str("\n--- stderr ---\n");
            detail.push_str(&String::from_utf8_lossy(&outcome.stderr));
            if !outcome.exit_ok {
                detail.push_str("\n(exit status nonzero)");
            }
            Ok(TrialResult::error(detail, outcome.wall_s))
        }
    }
}

// ---------------------------------------------------------------------------
// running an experiment

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Binary substituted for `{exe}` in command templates.
    pub exe: PathBuf,
    /// Concurrent (task, strategy) units; trials within a unit stay serial.
    pub jobs: usize,
    pub experiment_seed: u64,
    pub trials_override: Option<u32>,
    pub timeout_override: Option<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            exe: std::env::current_exe().unwrap_or_else(|_| PathBuf::from("crucible")),
            jobs: 1,
            experiment_seed: 0,
            trials_override: None,
            timeout_override: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunReport {
    pub log_path: PathBuf,
    pub units: usize,
    pub new_records: usize,
    pub skipped: usize,
    pub errors: usize,
}

#[derive(Debug, Serialize)]
struct BuildRecord {
    task: String,
    strategy: String,
    build_id: String,
    build_time_s: f64,
    ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<String>,
}

struct LogWriter {
    file: std::fs::File,
}

impl LogWriter {
    fn append(&mut self, record: &RawResultRecord) -> std::io::Result<()> {
        let mut line = serde_json::to_string(record).expect("record serializes");
        line.push('\n');
        self.file.write_all(line.as_bytes())
    }
}

fn now_rfc3339() -> String {
    chrono::Utc::now()
        .to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Enumerate the mutants of every workload in the experiment, in
/// deterministic order.
pub fn enumerate_workload_mutants(
    layout: &ExperimentLayout,
    workloads: &BTreeMap<String, WorkloadConfig>,
) -> Result<BTreeMap<String, Vec<String>>, DriverError> {
    let mut out = BTreeMap::new();
    for (name, config) in workloads {
        let mut names = Vec::new();
        for root in &config.source_roots {
            let root = layout.workload_dir(name).join(root);
            for entry in mutation::enumerate_mutants(&root, &config.comment_styles)? {
                names.push(entry.name);
            }
        }
        out.insert(name.clone(), names);
    }
    Ok(out)
}

/// Run every (task, strategy) unit of a test spec, appending one record per
/// trial. Already-recorded (task, strategy, trial, seed) tuples are
/// skipped. Build failures are recorded per task-strategy and do not abort
/// other units.
pub fn run_experiment(
    layout: &ExperimentLayout,
    test_name: &str,
    opts: &RunOptions,
) -> Result<RunReport, DriverError> {
    let spec = load_test_spec(&layout.test_file(test_name))?;
    let workloads = layout.load_workloads()?;
    let mutants = enumerate_workload_mutants(layout, &workloads)?;
    let mut units = expand_tasks(&spec, &workloads, &mutants)?;
    for unit in &mut units {
        if let Some(trials) = opts.trials_override {
            unit.trials = trials;
        }
        if let Some(timeout) = opts.timeout_override {
            unit.timeout_s = timeout;
        }
    }

    let log_path = layout.results_log(test_name);
    if let Some(parent) = log_path.parent() {
        std::fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let resume: BTreeSet<(String, String, u32, u64)> = if log_path.exists() {
        read_records(&log_path)?
            .iter()
            .map(RawResultRecord::resume_key)
            .collect()
    } else {
        BTreeSet::new()
    };

    let file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&log_path)
        .map_err(io_err(&log_path))?;
    let writer = Mutex::new(LogWriter { file });
    let build_log = Mutex::new(Vec::<BuildRecord>::new());

    let scratch = layout.scratch_dir().join(test_name);
    std::fs::create_dir_all(&scratch).map_err(io_err(&scratch))?;

    let queue = Mutex::new(std::collections::VecDeque::from(units.clone()));
    let counters = Mutex::new((0usize, 0usize, 0usize)); // new, skipped, errors
    let first_error: Mutex<Option<DriverError>> = Mutex::new(None);

    std::thread::scope(|scope| {
        for _ in 0..opts.jobs.max(1) {
            scope.spawn(|| loop {
                let Some(unit) = queue.lock().unwrap().pop_front() else {
                    return;
                };
                if let Err(e) = run_unit(
                    layout, &unit, opts, &scratch, &resume, &writer, &build_log, &counters,
                    &workloads,
                ) {
                    let mut slot = first_error.lock().unwrap();
                    if slot.is_none() {
                        *slot = Some(e);
                    }
                    return;
                }
            });
        }
    });

    if let Some(e) = first_error.into_inner().unwrap() {
        return Err(e);
    }

    let builds = build_log.into_inner().unwrap();
    if !builds.is_empty() {
        let path = log_path.with_extension("builds.jsonl");
        let mut out = String::new();
        for b in &builds {
            out.push_str(&serde_json::to_string(b).expect("build record serializes"));
            out.push('\n');
        }
        std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .and_then(|mut f| f.write_all(out.as_bytes()))
            .map_err(io_err(&path))?;
    }

    let (new_records, skipped, errors) = counters.into_inner().unwrap();
    Ok(RunReport {
        log_path,
        units: units.len(),
        new_records,
        skipped,
        errors,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_unit(
    layout: &ExperimentLayout,
    unit: &RunUnit,
    opts: &RunOptions,
    scratch: &Path,
    resume: &BTreeSet<(String, String, u32, u64)>,
    writer: &Mutex<LogWriter>,
    build_log: &Mutex<Vec<BuildRecord>>,
    counters: &Mutex<(usize, usize, usize)>,
    workloads: &BTreeMap<String, WorkloadConfig>,
) -> Result<(), DriverError> {
    let task = &unit.task;
    let task_id = task.id();
    let config = &workloads[&task.workload];
    let bid = build_id(&task_id, &unit.strategy.name);

    // one staged copy per (task, strategy); its trials run serially here
    let stage_name = format!("{}__{}", task_id.replace('/', "_"), unit.strategy.name);
    let staged = scratch.join(stage_name);

    let pending: Vec<(u32, u64)> = (0..unit.trials)
        .map(|trial| {
            let seed =
                derive_trial_seed(opts.experiment_seed, &task_id, &unit.strategy.name, trial);
            (trial, seed)
        })
        .filter(|(trial, seed)| {
            !resume.contains(&(
                task_id.clone(),
                unit.strategy.name.clone(),
                *trial,
                *seed,
            ))
        })
        .collect();
    {
        let mut c = counters.lock().unwrap();
        c.1 += unit.trials as usize - pending.len();
    }
    if pending.is_empty() {
        return Ok(());
    }

    apply_mutant(
        &layout.workload_dir(&task.workload),
        config,
        &task.mutant,
        &staged,
    )?;

    let mut vars: BTreeMap<&str, String> = BTreeMap::new();
    vars.insert("exe", opts.exe.display().to_string());
    vars.insert("property", task.property.clone());
    vars.insert("mutant", task.mutant.clone());
    vars.insert("strategy", unit.strategy.name.clone());
    vars.insert("timeout_s", format_float(unit.timeout_s));
    vars.insert("max_tests", unit.max_tests.to_string());
    vars.insert("max_discards", unit.max_discards.to_string());

    // one build per (task, strategy), reused by all its trials; build time
    // is recorded separately and never counted as trial time
    let mut build_failed: Option<String> = None;
    if let Some(build_template) = &config.build {
        let argv = split_command(&substitute_template(build_template, &vars));
        let b0 = Instant::now();
        let outcome = run_child(&argv, &staged, Some(300.0))?;
        let build_time_s = b0.elapsed().as_secs_f64();
        let ok = outcome.exit_ok && !outcome.killed;
        let output = if ok {
            None
        } else {
            Some(format!(
                "{}\n{}",
                String::from_utf8_lossy(&outcome.stdout),
                String::from_utf8_lossy(&outcome.stderr)
            ))
        };
        build_log.lock().unwrap().push(BuildRecord {
            task: task_id.clone(),
            strategy: unit.strategy.name.clone(),
            build_id: bid.clone(),
            build_time_s,
            ok,
            output: output.clone(),
        });
        if !ok {
            build_failed = Some(output.unwrap_or_default());
        }
    }

    for (trial, seed) in pending {
        let started_at = now_rfc3339();
        let result = match &build_failed {
            Some(output) => TrialResult::error(format!("build failed:\n{output}"), 0.0),
            None => {
                let mut vars = vars.clone();
                vars.insert("seed", seed.to_string());
                let mut argv = split_command(&substitute_template(&config.run, &vars));
                argv.extend(unit.strategy.extra_args.iter().cloned());
                run_trial(&argv, &staged, unit.timeout_s)?
            }
        };
        let record = RawResultRecord {
            task: task_id.clone(),
            strategy: unit.strategy.name.clone(),
            trial,
            seed,
            status: result.status,
            time_s: result.time_s,
            tests: result.tests,
            discards: result.discards,
            counterexample: result.counterexample,
            gen_time_s: result.gen_time_s,
            exec_time_s: result.exec_time_s,
            started_at,
            build_id: bid.clone(),
            error: result.error,
        };
        {
            let mut w = writer.lock().unwrap();
            w.append(&record).map_err(io_err(&layout.root))?;
        }
        let mut c = counters.lock().unwrap();
        c.0 += 1;
        if record.status == TrialStatus::Error {
            c.2 += 1;
        }
    }
    Ok(())
}

fn format_float(x: f64) -> String {
    if x == x.trunc() {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

/// Stage a task's mutant for ad-hoc use (the `corpus run` path and manual
/// reproduction); returns the staged directory.
pub fn stage_task(
    layout: &ExperimentLayout,
    task: &Task,
    label: &str,
) -> Result<PathBuf, DriverError> {
    let workloads = layout.load_workloads()?;
    let config = workloads
        .get(&task.workload)
        .ok_or_else(|| SchemaError::UnknownWorkload(task.workload.clone()))?;
    let staged = layout
        .scratch_dir()
        .join(label)
        .join(task.id().replace('/', "_"));
    apply_mutant(
        &layout.workload_dir(&task.workload),
        config,
        &task.mutant,
        &staged,
    )?;
    Ok(staged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workloads;

    #[test]
    fn seed_derivation_is_deterministic_and_distinct() {
        let s1 = derive_trial_seed(0, "bst/InsertValid/m", "bespoke", 0);
        assert_eq!(s1, derive_trial_seed(0, "bst/InsertValid/m", "bespoke", 0));
        assert_ne!(s1, derive_trial_seed(0, "bst/InsertValid/m", "bespoke", 1));
        assert_ne!(s1, derive_trial_seed(0, "bst/InsertValid/m", "typebased", 0));
        assert_ne!(s1, derive_trial_seed(1, "bst/InsertValid/m", "bespoke", 0));
    }

    #[test]
    fn template_substitution_and_split() {
        let vars = BTreeMap::from([("exe", "/bin/run".to_string()), ("seed", "7".to_string())]);
        let cmd = substitute_template("{exe} go --seed {seed}", &vars);
        assert_eq!(cmd, "/bin/run go --seed 7");
        assert_eq!(split_command(&cmd), ["/bin/run", "go", "--seed", "7"]);
    }

    fn staged_bst(mutant: &str) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let wl = workloads::install_builtin("bst", dir.path()).unwrap();
        let config = crate::schema::load_workload_config(&wl.join("config.json")).unwrap();
        let staged = dir.path().join("staged");
        apply_mutant(&wl, &config, mutant, &staged).unwrap();
        (dir, staged)
    }

    #[test]
    fn apply_mutant_activates_exactly_one() {
        let (_dir, staged) = staged_bst("insert_duplicate_entries");
        let config = crate::schema::load_workload_config(&staged.join("config.json")).unwrap();
        let active = crate::harness::staged_active_mutants(&staged, &config).unwrap();
        assert_eq!(active, ["insert_duplicate_entries"]);
    }

    #[test]
    fn apply_mutant_diff_is_localized() {
        let (_d1, a) = staged_bst("insert_duplicate_entries");
        let (_d2, b) = staged_bst("delete_root_only");
        // files untouched by either mutant are identical; files touched
        // differ only in their variation spans
        let a_union = std::fs::read_to_string(a.join("src/union.impl")).unwrap();
        let b_union = std::fs::read_to_string(b.join("src/union.impl")).unwrap();
        assert_eq!(a_union, b_union);
        let a_ins = std::fs::read_to_string(a.join("src/insert.impl")).unwrap();
        let b_ins = std::fs::read_to_string(b.join("src/insert.impl")).unwrap();
        assert_ne!(a_ins, b_ins);
    }

    #[test]
    fn apply_mutant_unknown_name() {
        let dir = tempfile::tempdir().unwrap();
        let wl = workloads::install_builtin("bst", dir.path()).unwrap();
        let config = crate::schema::load_workload_config(&wl.join("config.json")).unwrap();
        let staged = dir.path().join("staged");
        assert!(matches!(
            apply_mutant(&wl, &config, "no_such_mutant", &staged),
            Err(DriverError::MutantNotFound { .. })
        ));
    }

    #[test]
    fn run_trial_times_out_sleeping_child() {
        let dir = tempfile::tempdir().unwrap();
        let argv = vec!["sleep".to_string(), "30".to_string()];
        let r = run_trial(&argv, dir.path(), 0.3).unwrap();
        assert_eq!(r.status, TrialStatus::Timeout);
        assert!(r.time_s >= 0.3);
        assert!(r.time_s < 1.5);
    }

    #[test]
    fn run_trial_unparseable_output_is_error() {
        let dir = tempfile::tempdir().unwrap();
        let argv = vec!["echo".to_string(), "garbage".to_string()];
        let r = run_trial(&argv, dir.path(), 5.0).unwrap();
        assert_eq!(r.status, TrialStatus::Error);
        assert!(r.error.as_deref().unwrap().contains("garbage"));
    }

    #[test]
    fn run_trial_accepts_protocol_line() {
        let dir = tempfile::tempdir().unwrap();
        let line = r#"{"status":"gave_up","time_s":0.1,"tests":5,"discards":1}"#;
        let argv = vec!["echo".to_string(), line.to_string()];
        let r = run_trial(&argv, dir.path(), 5.0).unwrap();
        assert_eq!(r.status, TrialStatus::GaveUp);
        assert_eq!(r.tests, 5);
    }

    #[test]
    fn run_trial_reclassifies_overrun_as_timeout() {
        let dir = tempfile::tempdir().unwrap();
        // child claims found but reports a time past the budget
        let line = r#"{"status":"found","time_s":9.4,"tests":5,"discards":0,"counterexample":"x"}"#;
        let argv = vec!["echo".to_string(), line.to_string()];
        let r = run_trial(&argv, dir.path(), 5.0).unwrap();
        assert_eq!(r.status, TrialStatus::Timeout);
        assert!(r.counterexample.is_none());
        assert!(r.time_s >= 9.4);
    }

    #[test]
    fn records_round_trip_through_log() {
        let record = RawResultRecord {
            task: "bst/InsertValid/insert_duplicate_entries".into(),
            strategy: "bespoke".into(),
            trial: 3,
            seed: 42,
            status: TrialStatus::Found,
            time_s: 0.5,
            tests: 10,
            discards: 0,
            counterexample: Some("((T E 1 0 E) 1 0)".into()),
            gen_time_s: Some(0.2),
            exec_time_s: Some(0.3),
            started_at: "2026-01-01T00:00:00.000Z".into(),
            build_id: "abc".into(),
            error: None,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        std::fs::write(&path, format!("{}\n", serde_json::to_string(&record).unwrap())).unwrap();
        assert_eq!(read_records(&path).unwrap(), vec![record]);
    }

    #[test]
    fn malformed_record_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        std::fs::write(&path, "{}\n").unwrap();
        match read_records(&path) {
            Err(DriverError::MalformedRecord { line: 1, .. }) => {}
            other => panic!("expected malformed record error, got {other:?}"),
        }
    }
}
