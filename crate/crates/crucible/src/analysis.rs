//! Aggregate raw trial records into per-(strategy, task) summaries: solve
//! status, bucket labels, throughput, and pairwise Mann-Whitney U
//! comparisons.
//!
//! A task is *solved* by a strategy when the bug is found in every trial,
//! *partially solved* when found in some trial but not all, and *unsolved*
//! otherwise. Error trials count as not-found, so broken strategies surface
//! as unsolved rather than disappearing. Means are arithmetic means over
//! found trials only.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::driver::RawResultRecord;
use crate::stats::{mann_whitney_u, MwuMethod};
use crate::trial::TrialStatus;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveLabel {
    Solved,
    Partial,
    Unsolved,
}

/// Found/total trial counts with the derived label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveStatus {
    pub label: SolveLabel,
    pub found_trials: u32,
    pub total_trials: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("no trials to aggregate")]
pub struct EmptyInput;

/// Classify a task's trials. Solved means found in all trials; error and
/// timeout trials count as not-found.
pub fn solve_status(statuses: &[TrialStatus]) -> Result<SolveStatus, EmptyInput> {
    if statuses.is_empty() {
        return Err(EmptyInput);
    }
    let total = statuses.len() as u32;
    let found = statuses
        .iter()
        .filter(|s| **s == TrialStatus::Found)
        .count() as u32;
    let label = if found == total {
        SolveLabel::Solved
    } else if found > 0 {
        SolveLabel::Partial
    } else {
        SolveLabel::Unsolved
    };
    Ok(SolveStatus {
        label,
        found_trials: found,
        total_trials: total,
    })
}

/// Ascending time thresholds in seconds plus the implicit Unsolved bucket.
/// The last threshold is the run timeout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketScheme {
    pub thresholds: Vec<f64>,
}

pub const UNSOLVED_BUCKET: &str = "Unsolved";

impl Default for BucketScheme {
    fn default() -> Self {
        BucketScheme {
            thresholds: vec![0.1, 1.0, 10.0, 60.0],
        }
    }
}

impl BucketScheme {
    pub fn new(thresholds: Vec<f64>) -> Result<Self, String> {
        let scheme = BucketScheme { thresholds };
        scheme.validate()?;
        Ok(scheme)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.thresholds.is_empty() {
            return Err("bucket scheme needs at least one threshold".into());
        }
        if self.thresholds.iter().any(|t| *t <= 0.0) {
            return Err("bucket thresholds must be positive".into());
        }
        if self.thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err("bucket thresholds must be strictly ascending".into());
        }
        Ok(())
    }

    fn threshold_label(t: f64) -> String {
        format!("\u{2264}{t}s")
    }

    /// All bucket labels, fastest first, Unsolved last.
    pub fn labels(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .thresholds
            .iter()
            .map(|t| Self::threshold_label(*t))
            .collect();
        out.push(UNSOLVED_BUCKET.to_string());
        out
    }

    fn label_for_time(&self, mean_time: f64) -> String {
        for t in &self.thresholds {
            if mean_time <= *t {
                return Self::threshold_label(*t);
            }
        }
        // a solved task slower than the last threshold still solved: the
        // slowest bucket holds it
        Self::threshold_label(*self.thresholds.last().expect("non-empty"))
    }
}

/// Assign a bucket label. In the default mode only Solved tasks are
/// bucketed by mean time over found trials and everything else is Unsolved;
/// in partial mode any task found at least once is bucketed by its mean
/// over found trials.
pub fn bucket(
    status: SolveStatus,
    mean_time: Option<f64>,
    scheme: &BucketScheme,
    partial_mode: bool,
) -> String {
    let bucketable = if partial_mode {
        status.found_trials > 0
    } else {
        status.label == SolveLabel::Solved
    };
    match (bucketable, mean_time) {
        (true, Some(t)) => scheme.label_for_time(t),
        _ => UNSOLVED_BUCKET.to_string(),
    }
}

/// Per-(strategy, task) aggregate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSummary {
    pub task: String,
    pub strategy: String,
    pub status: SolveLabel,
    pub found_trials: u32,
    pub total_trials: u32,
    /// Means over found trials; absent when nothing was found.
    pub mean_time_s: Option<f64>,
    pub mean_tests: Option<f64>,
    pub mean_discards: Option<f64>,
    pub bucket: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub alpha: f64,
    pub scheme: BucketScheme,
    pub partial_mode: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            alpha: 0.05,
            scheme: BucketScheme::default(),
            partial_mode: false,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err("alpha must be strictly between 0 and 1".into());
        }
        self.scheme.validate()
    }
}

/// Head-to-head comparison of two strategies over the tasks both solved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyComparison {
    pub strategy_a: String,
    pub strategy_b: String,
    pub common_solved_tasks: usize,
    /// Tasks where a's per-trial times are significantly lower at alpha.
    pub a_lower_time: usize,
    pub b_lower_time: usize,
    /// Same question asked of per-trial test counts.
    pub a_lower_tests: usize,
    pub b_lower_tests: usize,
    /// Total tests divided by total time over the commonly solved tasks.
    pub tests_per_second_a: f64,
    pub tests_per_second_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub alpha: f64,
    pub buckets: Vec<f64>,
    pub partial_mode: bool,
    pub summaries: Vec<TaskSummary>,
    pub comparisons: Vec<StrategyComparison>,
    /// Per-strategy throughput over tasks solved by every strategy.
    pub tests_per_second: BTreeMap<String, f64>,
}

fn mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        None
    } else {
        Some(xs.iter().sum::<f64>() / xs.len() as f64)
    }
}

/// Significantly lower at `alpha`: two-sided p below alpha and the U
/// statistic favoring smaller values in `a`.
fn significantly_lower(a: &[f64], b: &[f64], alpha: f64) -> bool {
    match mann_whitney_u(a, b) {
        Ok(r) => r.p_value < alpha && r.u_statistic > (a.len() * b.len()) as f64 / 2.0,
        Err(_) => false,
    }
}

/// Aggregate a results log into summaries and pairwise comparisons.
pub fn summarize(records: &[RawResultRecord], config: &AnalysisConfig) -> Analysis {
    // group by (task, strategy)
    let mut groups: BTreeMap<(String, String), Vec<&RawResultRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.task.clone(), r.strategy.clone()))
            .or_default()
            .push(r);
    }

    let mut summaries = Vec::new();
    let mut solved: BTreeMap<String, BTreeSet<String>> = BTreeMap::new(); // strategy -> solved tasks
    let mut times: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    let mut tests: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();

    for ((task, strategy), trials) in &groups {
        let statuses: Vec<TrialStatus> = trials.iter().map(|r| r.status).collect();
        let status = solve_status(&statuses).expect("group is non-empty");
        let found: Vec<&&RawResultRecord> = trials
            .iter()
            .filter(|r| r.status == TrialStatus::Found)
            .collect();
        let mean_time_s = mean(&found.iter().map(|r| r.time_s).collect::<Vec<_>>());
        let mean_tests = mean(&found.iter().map(|r| r.tests as f64).collect::<Vec<_>>());
        let mean_discards = mean(&found.iter().map(|r| r.discards as f64).collect::<Vec<_>>());
        let label = bucket(status, mean_time_s, &config.scheme, config.partial_mode);

        if status.label == SolveLabel::Solved {
            solved
                .entry(strategy.clone())
                .or_default()
                .insert(task.clone());
            times.insert(
                (strategy.clone(), task.clone()),
                trials.iter().map(|r| r.time_s).collect(),
            );
            tests.insert(
                (strategy.clone(), task.clone()),
                trials.iter().map(|r| r.tests as f64).collect(),
            );
        }

        summaries.push(TaskSummary {
            task: task.clone(),
            strategy: strategy.clone(),
            status: status.label,
            found_trials: status.found_trials,
            total_trials: status.total_trials,
            mean_time_s,
            mean_tests,
            mean_discards,
            bucket: label,
        });
    }
    summaries.sort_by(|a, b| (&a.task, &a.strategy).cmp(&(&b.task, &b.strategy)));

    // pairwise comparisons over commonly solved tasks
    let strategies: Vec<String> = {
        let mut s: BTreeSet<String> = groups.keys().map(|(_, s)| s.clone()).collect();
        std::mem::take(&mut s).into_iter().collect()
    };
    let empty = BTreeSet::new();
    let mut comparisons = Vec::new();
    for (i, a) in strategies.iter().enumerate() {
        for b in strategies.iter().skip(i + 1) {
            let sa = solved.get(a).unwrap_or(&empty);
            let sb = solved.get(b).unwrap_or(&empty);
            let common: Vec<&String> = sa.intersection(sb).collect();
            let mut cmp = StrategyComparison {
                strategy_a: a.clone(),
                strategy_b: b.clone(),
                common_solved_tasks: common.len(),
                a_lower_time: 0,
                b_lower_time: 0,
                a_lower_tests: 0,
                b_lower_tests: 0,
                tests_per_second_a: 0.0,
                tests_per_second_b: 0.0,
            };
            let (mut tests_a, mut time_a, mut tests_b, mut time_b) = (0.0, 0.0, 0.0, 0.0);
            for task in &common {
                let ta = &times[&(a.clone(), (*task).clone())];
                let tb = &times[&(b.clone(), (*task).clone())];
                if significantly_lower(ta, tb, config.alpha) {
                    cmp.a_lower_time += 1;
                }
                if significantly_lower(tb, ta, config.alpha) {
                    cmp.b_lower_time += 1;
                }
                let na = &tests[&(a.clone(), (*task).clone())];
                let nb = &tests[&(b.clone(), (*task).clone())];
                if significantly_lower(na, nb, config.alpha) {
                    cmp.a_lower_tests += 1;
                }
                if significantly_lower(nb, na, config.alpha) {
                    cmp.b_lower_tests += 1;
                }
                tests_a += na.iter().sum::<f64>();
                time_a += ta.iter().sum::<f64>();
                tests_b += nb.iter().sum::<f64>();
                time_b += tb.iter().sum::<f64>();
            }
            if time_a > 0.0 {
                cmp.tests_per_second_a = tests_a / time_a;
            }
            if time_b > 0.0 {
                cmp.tests_per_second_b = tests_b / time_b;
            }
            comparisons.push(cmp);
        }
    }

    // global throughput over tasks solved by every strategy
    let mut tests_per_second = BTreeMap::new();
    if !strategies.is_empty() {
        let mut common: Option<BTreeSet<String>> = None;
        for s in &strategies {
            let set = solved.get(s).unwrap_or(&empty).clone();
            common = Some(match common {
                None => set,
                Some(prev) => prev.intersection(&set).cloned().collect(),
            });
        }
        let common = common.unwrap_or_default();
        for s in &strategies {
            let (mut total_tests, mut total_time) = (0.0, 0.0);
            for task in &common {
                total_tests += tests[&(s.clone(), task.clone())].iter().sum::<f64>();
                total_time += times[&(s.clone(), task.clone())].iter().sum::<f64>();
            }
            if total_time > 0.0 {
                tests_per_second.insert(s.clone(), total_tests / total_time);
            }
        }
    }

    Analysis {
        alpha: config.alpha,
        buckets: config.scheme.thresholds.clone(),
        partial_mode: config.partial_mode,
        summaries,
        comparisons,
        tests_per_second,
    }
}

/// Per-strategy bucket counts in scheme order, for chart rows. Counts per
/// strategy always sum to that strategy's task count.
pub fn bucket_counts(
    summaries: &[TaskSummary],
    scheme: &BucketScheme,
) -> BTreeMap<String, Vec<usize>> {
    let labels = scheme.labels();
    let mut out: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for s in summaries {
        let counts = out
            .entry(s.strategy.clone())
            .or_insert_with(|| vec![0; labels.len()]);
        let idx = labels
            .iter()
            .position(|l| *l == s.bucket)
            .expect("bucket label comes from the scheme");
        counts[idx] += 1;
    }
    out
}

/// The method the comparison used at these sample sizes; exposed so
/// reports can annotate p-values.
pub fn comparison_method(n_a: usize, n_b: usize) -> MwuMethod {
    if n_a + n_b <= crate::stats::EXACT_LIMIT {
        MwuMethod::Exact
    } else {
        MwuMethod::NormalApprox
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn statuses(found: u32, total: u32) -> Vec<TrialStatus> {
        (0..total)
            .map(|i| {
                if i < found {
                    TrialStatus::Found
                } else {
                    TrialStatus::GaveUp
                }
            })
            .collect()
    }

    #[test]
    fn solve_status_examples() {
        assert_eq!(
            solve_status(&statuses(10, 10)).unwrap().label,
            SolveLabel::Solved
        );
        assert_eq!(
            solve_status(&statuses(3, 10)).unwrap().label,
            SolveLabel::Partial
        );
        assert_eq!(
            solve_status(&statuses(0, 10)).unwrap().label,
            SolveLabel::Unsolved
        );
        assert_eq!(solve_status(&[]), Err(EmptyInput));
    }

    #[test]
    fn error_trials_count_as_not_found() {
        let mut s = statuses(9, 9);
        s.push(TrialStatus::Error);
        assert_eq!(solve_status(&s).unwrap().label, SolveLabel::Partial);
    }

    #[test]
    fn bucket_examples() {
        let scheme = BucketScheme::default();
        let solved = SolveStatus {
            label: SolveLabel::Solved,
            found_trials: 10,
            total_trials: 10,
        };
        assert_eq!(bucket(solved, Some(0.05), &scheme, false), "\u{2264}0.1s");
        assert_eq!(bucket(solved, Some(59.0), &scheme, false), "\u{2264}60s");

        let partial = SolveStatus {
            label: SolveLabel::Partial,
            found_trials: 9,
            total_trials: 10,
        };
        // all-trials definition: partial is unsolved in the default mode
        assert_eq!(bucket(partial, Some(0.05), &scheme, false), "Unsolved");
        // partial mode buckets anything found at least once
        assert_eq!(bucket(partial, Some(0.05), &scheme, true), "\u{2264}0.1s");
    }

    #[test]
    fn scheme_validation() {
        assert!(BucketScheme::new(vec![0.1, 1.0, 10.0, 60.0]).is_ok());
        assert!(BucketScheme::new(vec![]).is_err());
        assert!(BucketScheme::new(vec![1.0, 1.0]).is_err());
        assert!(BucketScheme::new(vec![-1.0, 1.0]).is_err());
    }

    fn record(task: &str, strategy: &str, trial: u32, status: TrialStatus, time_s: f64, tests: u64) -> RawResultRecord {
        RawResultRecord {
            task: task.into(),
            strategy: strategy.into(),
            trial,
            seed: u64::from(trial),
            status,
            time_s,
            tests,
            discards: 0,
            counterexample: None,
            gen_time_s: None,
            exec_time_s: None,
            started_at: String::new(),
            build_id: String::new(),
            error: None,
        }
    }

    #[test]
    fn single_strategy_no_comparisons() {
        let records: Vec<RawResultRecord> = (0..10)
            .map(|i| record("w/P/m", "s", i, TrialStatus::Found, 0.01, 5))
            .collect();
        let analysis = summarize(&records, &AnalysisConfig::default());
        assert_eq!(analysis.summaries.len(), 1);
        assert_eq!(analysis.summaries[0].status, SolveLabel::Solved);
        assert_eq!(analysis.summaries[0].mean_tests, Some(5.0));
        assert!(analysis.comparisons.is_empty());
    }

    #[test]
    fn disjoint_solves_have_empty_comparison_set() {
        let mut records = Vec::new();
        for task in ["w/P/m1", "w/P/m2"] {
            for i in 0..10 {
                records.push(record(task, "a", i, TrialStatus::Found, 0.01, 5));
                records.push(record(task, "b", i, TrialStatus::GaveUp, 1.0, 100));
            }
        }
        let analysis = summarize(&records, &AnalysisConfig::default());
        assert_eq!(analysis.comparisons.len(), 1);
        assert_eq!(analysis.comparisons[0].common_solved_tasks, 0);
        assert_eq!(analysis.comparisons[0].a_lower_time, 0);
    }

    #[test]
    fn uniformly_faster_strategy_wins_everywhere() {
        // a's times are one tenth of b's across 10 trials on 5 common tasks
        let mut records = Vec::new();
        for t in 0..5 {
            let task = format!("w/P/m{t}");
            for i in 0..10 {
                let tb = 0.2 + f64::from(i) * 0.1;
                records.push(record(&task, "a", i, TrialStatus::Found, tb / 10.0, 5));
                records.push(record(&task, "b", i, TrialStatus::Found, tb, 30));
            }
        }
        let analysis = summarize(&records, &AnalysisConfig::default());
        let cmp = &analysis.comparisons[0];
        assert_eq!(cmp.common_solved_tasks, 5);
        assert_eq!(cmp.a_lower_time, 5);
        assert_eq!(cmp.b_lower_time, 0);
        assert_eq!(cmp.a_lower_tests, 5);
        // throughput over common tasks: same totals every task
        assert!(analysis.tests_per_second["a"] > analysis.tests_per_second["b"]);
    }

    #[test]
    fn bucket_counts_partition_tasks() {
        let mut records = Vec::new();
        let times = [0.05, 0.5, 5.0, 50.0];
        for (t, time) in times.iter().enumerate() {
            let task = format!("w/P/m{t}");
            for i in 0..3 {
                records.push(record(&task, "s", i, TrialStatus::Found, *time, 1));
            }
        }
        for i in 0..3 {
            records.push(record("w/P/unsolved", "s", i, TrialStatus::GaveUp, 60.0, 1));
        }
        let config = AnalysisConfig::default();
        let analysis = summarize(&records, &config);
        let counts = bucket_counts(&analysis.summaries, &config.scheme);
        assert_eq!(counts["s"], vec![1, 1, 1, 1, 1]);
        assert_eq!(counts["s"].iter().sum::<usize>(), 5);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // every (strategy, task) lands in exactly one bucket and the
            // counts sum to the task count
            #[test]
            fn partition(
                outcomes in proptest::collection::vec(
                    (0u32..4, 1u32..20, 0u32..=10), 1..30
                )
            ) {
                let mut records = Vec::new();
                for (i, (strategy, time_ds, found_of_10)) in outcomes.iter().enumerate() {
                    let task = format!("w/P/m{i}");
                    let strategy = format!("s{strategy}");
                    for trial in 0..10u32 {
                        let status = if trial < *found_of_10 {
                            TrialStatus::Found
                        } else {
                            TrialStatus::GaveUp
                        };
                        records.push(record(
                            &task, &strategy, trial, status,
                            f64::from(*time_ds) / 10.0, 1,
                        ));
                    }
                }
                let config = AnalysisConfig::default();
                let analysis = summarize(&records, &config);
                let counts = bucket_counts(&analysis.summaries, &config.scheme);
                let mut per_strategy_tasks: BTreeMap<String, usize> = BTreeMap::new();
                for s in &analysis.summaries {
                    *per_strategy_tasks.entry(s.strategy.clone()).or_default() += 1;
                }
                for (strategy, counts) in counts {
                    prop_assert_eq!(
                        counts.iter().sum::<usize>(),
                        per_strategy_tasks[&strategy]
                    );
                }
            }

            // slowing every found trial down can only move a task to a
            // lighter (slower) bucket
            #[test]
            fn monotonicity(base_time in 0.01f64..80.0, slowdown in 1.0f64..10.0) {
                let scheme = BucketScheme::default();
                let solved = SolveStatus {
                    label: SolveLabel::Solved,
                    found_trials: 10,
                    total_trials: 10,
                };
                let labels = scheme.labels();
                let before = bucket(solved, Some(base_time), &scheme, false);
                let after = bucket(solved, Some(base_time * slowdown), &scheme, false);
                let pos = |l: &str| labels.iter().position(|x| x == l).unwrap();
                prop_assert!(pos(&after) >= pos(&before));
            }
        }
    }
}
