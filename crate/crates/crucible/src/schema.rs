//! Experiment, workload-adapter, and test-specification data model.
//!
//! On-disk formats are JSON: `workloads/<name>/config.json` describes a
//! workload (comment styles, properties, strategies, command templates, and
//! the explicit task manifest), `tests/<name>.json` describes which tasks
//! and strategies to run. Validation is total: a file either loads into a
//! value satisfying every invariant or produces the full list of
//! violations, not just the first.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::mutation::CommentStyle;

/// Placeholders a command template may reference. `{exe}` resolves to the
/// orchestrating binary so built-in workloads stay self-contained.
pub const KNOWN_PLACEHOLDERS: &[&str] = &[
    "exe",
    "property",
    "mutant",
    "strategy",
    "seed",
    "timeout_s",
    "max_tests",
    "max_discards",
    "size",
];

pub const DEFAULT_TRIALS: u32 = 10;
pub const DEFAULT_TIMEOUT_S: f64 = 60.0;
pub const DEFAULT_MAX_TESTS: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    Bespoke,
    TypeBased,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySpec {
    pub name: String,
    pub kind: StrategyKind,
    /// Extra arguments appended to the run template's command line.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_args: Vec<String>,
}

/// An explicit (property, mutant) pair in the workload's task manifest.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TaskPair {
    pub property: String,
    pub mutant: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadConfig {
    pub name: String,
    pub language: String,
    pub comment_styles: BTreeMap<String, CommentStyle>,
    pub source_roots: Vec<PathBuf>,
    pub properties: Vec<String>,
    pub strategies: Vec<StrategySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub build: Option<String>,
    pub run: String,
    /// Explicit task manifest. When absent, the full property x mutant
    /// cross product is used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tasks: Option<Vec<TaskPair>>,
}

/// A mutant-property pair within a workload; the unit of evaluation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Task {
    pub workload: String,
    pub property: String,
    pub mutant: String,
}

impl Task {
    /// Stable identity used in filenames and reports.
    pub fn id(&self) -> String {
        format!("{}/{}/{}", self.workload, self.property, self.mutant)
    }

    pub fn parse_id(id: &str) -> Option<Task> {
        let mut parts = id.splitn(3, '/');
        Some(Task {
            workload: parts.next()?.to_string(),
            property: parts.next()?.to_string(),
            mutant: parts.next()?.to_string(),
        })
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id())
    }
}

fn default_globs() -> Vec<String> {
    vec!["*".to_string()]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestEntry {
    pub workload: String,
    #[serde(default = "default_globs")]
    pub strategies: Vec<String>,
    #[serde(default = "default_globs")]
    pub properties: Vec<String>,
    #[serde(default = "default_globs")]
    pub mutants: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timeout_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_tests: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_discards: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSpec {
    pub name: String,
    pub entries: Vec<TestEntry>,
}

/// One scheduled (task, strategy) run with its resolved limits.
#[derive(Debug, Clone, PartialEq)]
pub struct RunUnit {
    pub task: Task,
    pub strategy: StrategySpec,
    pub trials: u32,
    pub timeout_s: f64,
    pub max_tests: u64,
    pub max_discards: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub problem: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.problem)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SchemaError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: invalid JSON: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {} violation(s):\n{}", .violations.len(),
            .violations.iter().map(|v| format!("  - {v}")).collect::<Vec<_>>().join("\n"))]
    Invalid {
        path: PathBuf,
        violations: Vec<Violation>,
    },
    #[error("test spec expands to zero (task, strategy) runs")]
    EmptyExpansion,
    #[error("unknown workload `{0}` referenced by test spec")]
    UnknownWorkload(String),
}

// ---------------------------------------------------------------------------
// glob matching

/// Minimal glob matcher: `*` matches any run, `?` any single character.
pub fn glob_match(pattern: &str, text: &str) -> bool {
    fn inner(p: &[u8], t: &[u8]) -> bool {
        match p.split_first() {
            None => t.is_empty(),
            Some((b'*', rest)) => (0..=t.len()).any(|i| inner(rest, &t[i..])),
            Some((b'?', rest)) => !t.is_empty() && inner(rest, &t[1..]),
            Some((c, rest)) => t.first() == Some(c) && inner(rest, &t[1..]),
        }
    }
    inner(pattern.as_bytes(), text.as_bytes())
}

fn matches_any(globs: &[String], text: &str) -> bool {
    globs.iter().any(|g| glob_match(g, text))
}

// ---------------------------------------------------------------------------
// template validation

/// Placeholder names referenced by a `{name}` template.
pub fn template_placeholders(template: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        let after = &rest[open + 1..];
        match after.find('}') {
            Some(close) => {
                out.push(after[..close].to_string());
                rest = &after[close + 1..];
            }
            None => break,
        }
    }
    out
}

fn check_template(field: &str, template: &str, violations: &mut Vec<Violation>) {
    for name in template_placeholders(template) {
        if !KNOWN_PLACEHOLDERS.contains(&name.as_str()) {
            violations.push(Violation {
                field: field.to_string(),
                problem: format!("unknown placeholder `{{{name}}}`"),
            });
        }
    }
}

// ---------------------------------------------------------------------------
// loading

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, SchemaError> {
    let text = std::fs::read_to_string(path).map_err(|source| SchemaError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| SchemaError::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Load and fully validate a workload config, reporting every violation.
pub fn load_workload_config(path: &Path) -> Result<WorkloadConfig, SchemaError> {
    let config: WorkloadConfig = read_json(path)?;
    let violations = validate_workload_config(&config);
    if violations.is_empty() {
        Ok(config)
    } else {
        Err(SchemaError::Invalid {
            path: path.to_path_buf(),
            violations,
        })
    }
}

pub fn validate_workload_config(config: &WorkloadConfig) -> Vec<Violation> {
    let mut violations = Vec::new();
    let mut push = |field: &str, problem: String| {
        violations.push(Violation {
            field: field.to_string(),
            problem,
        })
    };

    if config.name.is_empty() {
        push("name", "must be non-empty".into());
    }
    if config.source_roots.is_empty() {
        push("source_roots", "must list at least one directory".into());
    }
    for (ext, style) in &config.comment_styles {
        if let Err(problem) = style.validate() {
            push(&format!("comment_styles.{ext}"), problem);
        }
    }

    let mut seen = BTreeSet::new();
    for p in &config.properties {
        if !seen.insert(p.clone()) {
            push("properties", format!("duplicate name `{p}`"));
        }
    }
    let mut seen = BTreeSet::new();
    for s in &config.strategies {
        if !seen.insert(s.name.clone()) {
            push("strategies", format!("duplicate name `{}`", s.name));
        }
    }

    if let Some(build) = &config.build {
        check_template("build", build, &mut violations);
    }
    check_template("run", &config.run, &mut violations);

    if let Some(tasks) = &config.tasks {
        let props: BTreeSet<&str> = config.properties.iter().map(|s| s.as_str()).collect();
        let mut seen = BTreeSet::new();
        for pair in tasks {
            if !props.contains(pair.property.as_str()) {
                violations.push(Violation {
                    field: "tasks".into(),
                    problem: format!("unknown property `{}`", pair.property),
                });
            }
            if !seen.insert(pair.clone()) {
                violations.push(Violation {
                    field: "tasks".into(),
                    problem: format!("duplicate pair {}/{}", pair.property, pair.mutant),
                });
            }
        }
    }
    violations
}

/// Load and validate a test spec; trials default to 10 and the timeout to
/// 60 seconds when omitted.
pub fn load_test_spec(path: &Path) -> Result<TestSpec, SchemaError> {
    let spec: TestSpec = read_json(path)?;
    let violations = validate_test_spec(&spec);
    if violations.is_empty() {
        Ok(spec)
    } else {
        Err(SchemaError::Invalid {
            path: path.to_path_buf(),
            violations,
        })
    }
}

pub fn validate_test_spec(spec: &TestSpec) -> Vec<Violation> {
    let mut violations = Vec::new();
    if spec.entries.is_empty() {
        violations.push(Violation {
            field: "entries".into(),
            problem: "must list at least one entry".into(),
        });
    }
    for (i, entry) in spec.entries.iter().enumerate() {
        let field = |name: &str| format!("entries[{i}].{name}");
        if entry.workload.is_empty() {
            violations.push(Violation {
                field: field("workload"),
                problem: "must be non-empty".into(),
            });
        }
        if entry.trials == Some(0) {
            violations.push(Violation {
                field: field("trials"),
                problem: "must be at least 1".into(),
            });
        }
        if let Some(t) = entry.timeout_s {
            if t <= 0.0 {
                violations.push(Violation {
                    field: field("timeout_s"),
                    problem: "must be positive".into(),
                });
            }
        }
        if entry.max_tests == Some(0) {
            violations.push(Violation {
                field: field("max_tests"),
                problem: "must be at least 1".into(),
            });
        }
    }
    violations
}

// ---------------------------------------------------------------------------
// task expansion

/// Expand a test spec against loaded workloads into the deterministic list
/// of (task, strategy) runs. `available_mutants` maps workload name to the
/// mutants enumerated from its sources, in enumeration order.
pub fn expand_tasks(
    spec: &TestSpec,
    workloads: &BTreeMap<String, WorkloadConfig>,
    available_mutants: &BTreeMap<String, Vec<String>>,
) -> Result<Vec<RunUnit>, SchemaError> {
    let mut units: Vec<RunUnit> = Vec::new();
    let mut seen: BTreeSet<(Task, String)> = BTreeSet::new();

    for entry in &spec.entries {
        let config = workloads
            .get(&entry.workload)
            .ok_or_else(|| SchemaError::UnknownWorkload(entry.workload.clone()))?;
        let mutants = available_mutants
            .get(&entry.workload)
            .ok_or_else(|| SchemaError::UnknownWorkload(entry.workload.clone()))?;

        let pairs: Vec<TaskPair> = match &config.tasks {
            Some(manifest) => manifest.clone(),
            None => {
                // no manifest: full cross product, property-major
                let mut out = Vec::new();
                for property in &config.properties {
                    for mutant in mutants {
                        out.push(TaskPair {
                            property: property.clone(),
                            mutant: mutant.clone(),
                        });
                    }
                }
                out
            }
        };

        let trials = entry.trials.unwrap_or(DEFAULT_TRIALS);
        let timeout_s = entry.timeout_s.unwrap_or(DEFAULT_TIMEOUT_S);
        let max_tests = entry.max_tests.unwrap_or(DEFAULT_MAX_TESTS);
        let max_discards = entry.max_discards.unwrap_or(max_tests.saturating_mul(10));

        for pair in pairs {
            if !matches_any(&entry.properties, &pair.property)
                || !matches_any(&entry.mutants, &pair.mutant)
            {
                continue;
            }
            let task = Task {
                workload: entry.workload.clone(),
                property: pair.property,
                mutant: pair.mutant,
            };
            for strategy in &config.strategies {
                if !matches_any(&entry.strategies, &strategy.name) {
                    continue;
                }
                if !seen.insert((task.clone(), strategy.name.clone())) {
                    continue;
                }
                units.push(RunUnit {
                    task: task.clone(),
                    strategy: strategy.clone(),
                    trials,
                    timeout_s,
                    max_tests,
                    max_discards,
                });
            }
        }
    }

    if units.is_empty() {
        return Err(SchemaError::EmptyExpansion);
    }
    Ok(units)
}

// ---------------------------------------------------------------------------
// experiment layout

/// An experiment directory: tests/, workloads/, results/, analysis/.
/// Results are append-only; analysis is regenerable from results.
#[derive(Debug, Clone)]
pub struct ExperimentLayout {
    pub root: PathBuf,
}

impl ExperimentLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        ExperimentLayout { root: root.into() }
    }

    pub fn tests_dir(&self) -> PathBuf {
        self.root.join("tests")
    }

    pub fn workloads_dir(&self) -> PathBuf {
        self.root.join("workloads")
    }

    pub fn results_dir(&self) -> PathBuf {
        self.root.join("results")
    }

    pub fn analysis_dir(&self) -> PathBuf {
        self.root.join("analysis")
    }

    pub fn scratch_dir(&self) -> PathBuf {
        self.root.join(".scratch")
    }

    /// Create the directory skeleton.
    pub fn create(&self) -> std::io::Result<()> {
        for dir in [
            self.root.clone(),
            self.tests_dir(),
            self.workloads_dir(),
            self.results_dir(),
            self.analysis_dir(),
        ] {
            std::fs::create_dir_all(dir)?;
        }
        Ok(())
    }

    pub fn results_log(&self, test_name: &str) -> PathBuf {
        self.results_dir().join(format!("{test_name}.jsonl"))
    }

    pub fn test_file(&self, test_name: &str) -> PathBuf {
        self.tests_dir().join(format!("{test_name}.json"))
    }

    /// Load every workload config under workloads/.
    pub fn load_workloads(&self) -> Result<BTreeMap<String, WorkloadConfig>, SchemaError> {
        let mut out = BTreeMap::new();
        let dir = self.workloads_dir();
        let entries = std::fs::read_dir(&dir).map_err(|source| SchemaError::Io {
            path: dir.clone(),
            source,
        })?;
        let mut paths: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_dir())
            .collect();
        paths.sort();
        for path in paths {
            let config_path = path.join("config.json");
            if config_path.exists() {
                let config = load_workload_config(&config_path)?;
                out.insert(config.name.clone(), config);
            }
        }
        Ok(out)
    }

    pub fn workload_dir(&self, name: &str) -> PathBuf {
        self.workloads_dir().join(name)
    }
}

/// The default test written by `workload add`: every task against every
/// strategy at the default trial count and timeout.
pub fn default_test_spec(workload: &str) -> TestSpec {
    TestSpec {
        name: format!("{workload}/default"),
        entries: vec![TestEntry {
            workload: workload.to_string(),
            strategies: default_globs(),
            properties: default_globs(),
            mutants: default_globs(),
            trials: None,
            timeout_s: None,
            max_tests: None,
            max_discards: None,
        }],
    }
}
