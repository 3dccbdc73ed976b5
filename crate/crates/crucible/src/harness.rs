//! A minimal embedded property-based testing framework: sized random
//! generation with preconditions and discards, and a deterministic test
//! loop. It serves as the reference adapter for the driver's child
//! protocol; external frameworks can replace it by implementing the same
//! protocol in their own runners.
//!
//! The harness learns which mutant is active by parsing the staged sources
//! it is pointed at, so toggling a variation in the workload directory is
//! what changes the behavior under test.

use std::panic::AssertUnwindSafe;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::mutation;
use crate::rng::Rng;
use crate::schema::{StrategyKind, WorkloadConfig};
use crate::trial::{TrialResult, TrialStatus};
use crate::workloads::rbt::{Ctree, RbtInsertVariant};
use crate::workloads::tree::{InsertVariant, Tree};
use crate::workloads::{self, Kind, Semantics, Value, Verdict};

pub const DEFAULT_SIZE: u64 = 10;
pub const DEFAULT_VALUE_MAX: i64 = 9;

/// Generation parameters: the size parameter `n`, with keys drawn from
/// `[1, 2n]`, and the loop's stopping limits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenConfig {
    pub size: u64,
    pub max_tests: u64,
    pub max_discards: u64,
}

impl GenConfig {
    pub fn new(size: u64) -> GenConfig {
        GenConfig {
            size,
            max_tests: crate::schema::DEFAULT_MAX_TESTS,
            max_discards: crate::schema::DEFAULT_MAX_TESTS * 10,
        }
    }

    /// Inclusive key range `[1, 2n]`.
    pub fn key_range(&self) -> (i64, i64) {
        (1, 2 * self.size.max(1) as i64)
    }
}

/// One property evaluation: pass, fail with a printable counterexample, or
/// a discarded input whose precondition failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TestOutcome {
    Pass,
    Fail(String),
    Discard,
}

// ---------------------------------------------------------------------------
// test loop

/// Run the generate-evaluate loop and also return the per-input verdict
/// sequence, which cross-language replay must reproduce exactly.
pub fn run_property_traced<I>(
    mut property: impl FnMut(&I) -> TestOutcome,
    mut generator: impl FnMut(&mut Rng, &GenConfig) -> I,
    rng: &mut Rng,
    config: &GenConfig,
    timeout_s: Option<f64>,
) -> (TrialResult, Vec<Verdict>) {
    let start = Instant::now();
    let mut tests = 0u64;
    let mut discards = 0u64;
    let mut gen_time = 0.0f64;
    let mut exec_time = 0.0f64;
    let mut verdicts = Vec::new();
    let mut counterexample = None;

    let status = loop {
        if tests >= config.max_tests || discards >= config.max_discards {
            break TrialStatus::GaveUp;
        }
        if let Some(limit) = timeout_s {
            if start.elapsed().as_secs_f64() >= limit {
                break TrialStatus::GaveUp;
            }
        }

        let g0 = Instant::now();
        let input = generator(rng, config);
        gen_time += g0.elapsed().as_secs_f64();

        let e0 = Instant::now();
        let outcome = std::panic::catch_unwind(AssertUnwindSafe(|| property(&input)));
        exec_time += e0.elapsed().as_secs_f64();

        match outcome {
            Err(panic) => {
                let message = panic
                    .downcast_ref::<&str>()
                    .map(|s| s.to_string())
                    .or_else(|| panic.downcast_ref::<String>().cloned())
                    .unwrap_or_else(|| "property panicked".to_string());
                let mut result = TrialResult::error(message, start.elapsed().as_secs_f64());
                result.tests = tests;
                result.discards = discards;
                return (result, verdicts);
            }
            Ok(TestOutcome::Pass) => {
                tests += 1;
                verdicts.push(Verdict::Pass);
            }
            Ok(TestOutcome::Discard) => {
                discards += 1;
                verdicts.push(Verdict::Discard);
            }
            Ok(TestOutcome::Fail(ce)) => {
                // the failing input counts as an executed test
                tests += 1;
                verdicts.push(Verdict::Fail);
                counterexample = Some(ce);
                break TrialStatus::Found;
            }
        }
    };

    let result = TrialResult {
        status,
        time_s: start.elapsed().as_secs_f64(),
        tests,
        discards,
        counterexample,
        gen_time_s: Some(gen_time),
        exec_time_s: Some(exec_time),
        error: None,
    };
    (result, verdicts)
}

/// Generate inputs until the property fails, the test or discard budget is
/// exhausted, or the optional wall-clock limit passes.
pub fn run_property<I>(
    property: impl FnMut(&I) -> TestOutcome,
    generator: impl FnMut(&mut Rng, &GenConfig) -> I,
    rng: &mut Rng,
    config: &GenConfig,
    timeout_s: Option<f64>,
) -> TrialResult {
    run_property_traced(property, generator, rng, config, timeout_s).0
}

// ---------------------------------------------------------------------------
// generators

fn gen_key(rng: &mut Rng, config: &GenConfig) -> i64 {
    let (lo, hi) = config.key_range();
    rng.int_in_range(lo, hi)
}

fn gen_value(rng: &mut Rng) -> i64 {
    // small naturals so value collisions stay reachable
    rng.int_in_range(0, DEFAULT_VALUE_MAX)
}

/// Type-based tree generation: constructors chosen uniformly at each step,
/// size decreasing on recursive calls, forced `Leaf` at size zero.
pub fn gen_tree_typebased(rng: &mut Rng, config: &GenConfig) -> Tree {
    fn go(rng: &mut Rng, size: u64, config: &GenConfig) -> Tree {
        if size == 0 || rng.bool() {
            return Tree::Leaf;
        }
        let left = go(rng, size - 1, config);
        let key = gen_key(rng, config);
        let value = gen_value(rng);
        let right = go(rng, size - 1, config);
        Tree::node(left, key, value, right)
    }
    go(rng, config.size, config)
}

/// Type-based colored tree generation; node colors are uniform too.
pub fn gen_ctree_typebased(rng: &mut Rng, config: &GenConfig) -> Ctree {
    fn go(rng: &mut Rng, size: u64, config: &GenConfig) -> Ctree {
        if size == 0 || rng.bool() {
            return Ctree::Leaf;
        }
        let color = if rng.bool() {
            crate::workloads::rbt::Color::Red
        } else {
            crate::workloads::rbt::Color::Black
        };
        let left = go(rng, size - 1, config);
        let key = gen_key(rng, config);
        let value = gen_value(rng);
        let right = go(rng, size - 1, config);
        Ctree::node(color, left, key, value, right)
    }
    go(rng, config.size, config)
}

/// Bespoke BST generation: draw a list of keys and insert each with the
/// correct insert, so every output satisfies the invariant by construction.
pub fn gen_bst_bespoke(rng: &mut Rng, config: &GenConfig) -> Tree {
    let mut t = Tree::Leaf;
    for _ in 0..config.size {
        let k = gen_key(rng, config);
        let v = gen_value(rng);
        t = crate::workloads::tree::insert(InsertVariant::Base, k, v, &t);
    }
    t
}

/// Bespoke RBT generation via repeated self-balancing insertion.
pub fn gen_rbt_bespoke(rng: &mut Rng, config: &GenConfig) -> Ctree {
    let mut t = Ctree::Leaf;
    for _ in 0..config.size {
        let k = gen_key(rng, config);
        let v = gen_value(rng);
        t = crate::workloads::rbt::insert(RbtInsertVariant::Base, k, v, &t);
    }
    t
}

/// Generate one input tuple for a property signature. Each component draws
/// from its own split stream, so multi-input properties stay reproducible
/// regardless of how much randomness each component consumes.
pub fn gen_inputs(
    rng: &mut Rng,
    config: &GenConfig,
    strategy: StrategyKind,
    signature: &[Kind],
) -> Vec<Value> {
    signature
        .iter()
        .map(|kind| {
            let mut sub = rng.split();
            match kind {
                Kind::Key => Value::Int(gen_key(&mut sub, config)),
                Kind::Val => Value::Int(gen_value(&mut sub)),
                Kind::Tree => Value::Tree(match strategy {
                    StrategyKind::Bespoke => gen_bst_bespoke(&mut sub, config),
                    _ => gen_tree_typebased(&mut sub, config),
                }),
                Kind::Ctree => Value::Ctree(match strategy {
                    StrategyKind::Bespoke => gen_rbt_bespoke(&mut sub, config),
                    _ => gen_ctree_typebased(&mut sub, config),
                }),
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// staged-directory plumbing

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Schema(#[from] crate::schema::SchemaError),
    #[error(transparent)]
    Enumerate(#[from] mutation::EnumerateError),
    #[error(transparent)]
    Workload(#[from] workloads::WorkloadError),
    #[error("staged sources have {0} active mutants; at most one is allowed")]
    MultipleActiveMutants(usize),
    #[error("expected active mutant {expected:?} but staged sources activate {found:?}")]
    MutantMismatch {
        expected: Option<String>,
        found: Vec<String>,
    },
    #[error("workload `{workload}` has no strategy named `{strategy}`")]
    UnknownStrategy { workload: String, strategy: String },
    #[error("source mutant `{0}` has no compiled implementation")]
    UnregisteredMutant(String),
}

/// Mutant names found active in the staged sources.
pub fn staged_active_mutants(
    dir: &Path,
    config: &WorkloadConfig,
) -> Result<Vec<String>, HarnessError> {
    let mut active = Vec::new();
    for root in &config.source_roots {
        let root = dir.join(root);
        for entry in mutation::enumerate_mutants(&root, &config.comment_styles)? {
            if entry.active {
                active.push(entry.name);
            }
        }
    }
    Ok(active)
}

/// Validate a staged workload directory: sources parse, every embedded
/// mutant has a compiled twin, and at most one mutant is active. This is
/// the build step of the built-in workloads.
pub fn check_staged(dir: &Path, workload: &str) -> Result<Vec<String>, HarnessError> {
    let config = crate::schema::load_workload_config(&dir.join("config.json"))?;
    if config.name != workload {
        return Err(HarnessError::MutantMismatch {
            expected: Some(workload.to_string()),
            found: vec![config.name],
        });
    }
    let mut all = Vec::new();
    for root in &config.source_roots {
        let root = dir.join(root);
        for entry in mutation::enumerate_mutants(&root, &config.comment_styles)? {
            let mut sem = Semantics::default();
            if workloads::apply_mutant_name(&mut sem, &entry.name).is_err() {
                return Err(HarnessError::UnregisteredMutant(entry.name));
            }
            all.push(entry.name);
        }
    }
    let active = staged_active_mutants(dir, &config)?;
    if active.len() > 1 {
        return Err(HarnessError::MultipleActiveMutants(active.len()));
    }
    Ok(all)
}

/// Everything `harness run` needs.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub dir: PathBuf,
    pub workload: String,
    pub property: String,
    pub strategy: String,
    /// Cross-checked against the staged sources when present.
    pub mutant: Option<String>,
    pub seed: u64,
    pub timeout_s: Option<f64>,
    pub size: u64,
    pub max_tests: u64,
    pub max_discards: u64,
}

/// Run one trial against the staged workload directory: parse the staged
/// sources to find the active mutant, resolve the strategy, and drive the
/// test loop. The returned result is what the child protocol line carries.
pub fn harness_run(spec: &RunSpec) -> Result<TrialResult, HarnessError> {
    let config = crate::schema::load_workload_config(&spec.dir.join("config.json"))?;
    let strategy = config
        .strategies
        .iter()
        .find(|s| s.name == spec.strategy)
        .ok_or_else(|| HarnessError::UnknownStrategy {
            workload: spec.workload.clone(),
            strategy: spec.strategy.clone(),
        })?;

    let active = staged_active_mutants(&spec.dir, &config)?;
    if active.len() > 1 {
        return Err(HarnessError::MultipleActiveMutants(active.len()));
    }
    if let Some(expected) = &spec.mutant {
        if active != [expected.clone()] {
            return Err(HarnessError::MutantMismatch {
                expected: Some(expected.clone()),
                found: active,
            });
        }
    }
    let sem = workloads::semantics_for(&active)?;
    let signature = workloads::property_signature(&spec.property)?;

    let gen_config = GenConfig {
        size: spec.size,
        max_tests: spec.max_tests,
        max_discards: spec.max_discards,
    };
    let kind = strategy.kind.clone();
    let property_name = spec.property.clone();

    let mut rng = Rng::new(spec.seed);
    let result = run_property(
        |inputs: &Vec<Value>| match workloads::evaluate_property(&property_name, inputs, &sem) {
            Ok(Verdict::Pass) => TestOutcome::Pass,
            Ok(Verdict::Discard) => TestOutcome::Discard,
            Ok(Verdict::Fail) => TestOutcome::Fail(crate::crosslang::serialize_inputs(inputs)),
            Err(e) => panic!("{e}"),
        },
        |rng, config| gen_inputs(rng, config, kind.clone(), signature),
        &mut rng,
        &gen_config,
        spec.timeout_s,
    );
    Ok(result)
}

/// Generate a corpus file: `count` serialized inputs, each with its own
/// generation time. Values are deterministic for a fixed seed; times vary.
pub fn generate_corpus(
    path: &Path,
    workload: &str,
    property: &str,
    strategy_name: &str,
    strategy_kind: StrategyKind,
    seed: u64,
    size: u64,
    count: u64,
) -> Result<(), crate::crosslang::CrosslangError> {
    use crate::crosslang::{CorpusEntry, CorpusHeader, CorpusWriter};
    let signature = workloads::property_signature(property)?;
    let header = CorpusHeader::new(workload, property, strategy_name, seed, size);
    let mut writer = CorpusWriter::create(path, &header)?;
    let config = GenConfig::new(size);
    let mut rng = Rng::new(seed);
    for _ in 0..count {
        let g0 = Instant::now();
        let inputs = gen_inputs(&mut rng, &config, strategy_kind.clone(), signature);
        let gen_time_s = g0.elapsed().as_secs_f64();
        writer.append(&CorpusEntry {
            gen_time_s,
            value: crate::crosslang::serialize_inputs(&inputs),
        })?;
    }
    writer.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workloads::tree::is_bst;

    #[test]
    fn constant_pass_gives_up_at_max_tests() {
        let config = GenConfig {
            size: 5,
            max_tests: 100,
            max_discards: 1000,
        };
        let mut rng = Rng::new(1);
        let r = run_property(
            |_: &u64| TestOutcome::Pass,
            |rng, _| rng.next_u64(),
            &mut rng,
            &config,
            None,
        );
        assert_eq!(r.status, TrialStatus::GaveUp);
        assert_eq!(r.tests, 100);
        assert_eq!(r.discards, 0);
    }

    #[test]
    fn constant_fail_stops_at_first_input() {
        let config = GenConfig::new(5);
        let mut rng = Rng::new(1);
        let r = run_property(
            |_: &u64| TestOutcome::Fail("boom".into()),
            |rng, _| rng.next_u64(),
            &mut rng,
            &config,
            None,
        );
        assert_eq!(r.status, TrialStatus::Found);
        assert_eq!(r.tests, 1);
        assert_eq!(r.counterexample.as_deref(), Some("boom"));
    }

    #[test]
    fn never_satisfied_precondition_exhausts_discards() {
        let config = GenConfig {
            size: 5,
            max_tests: 10,
            max_discards: 1000,
        };
        let mut rng = Rng::new(1);
        let r = run_property(
            |_: &u64| TestOutcome::Discard,
            |rng, _| rng.next_u64(),
            &mut rng,
            &config,
            None,
        );
        assert_eq!(r.status, TrialStatus::GaveUp);
        assert_eq!(r.tests, 0);
        assert_eq!(r.discards, 1000);
    }

    #[test]
    fn panicking_property_reports_error() {
        let config = GenConfig::new(5);
        let mut rng = Rng::new(1);
        let r = run_property(
            |_: &u64| -> TestOutcome { panic!("bad property") },
            |rng, _| rng.next_u64(),
            &mut rng,
            &config,
            None,
        );
        assert_eq!(r.status, TrialStatus::Error);
        assert!(r.error.as_deref().unwrap().contains("bad property"));
    }

    #[test]
    fn discard_accounting_adds_up() {
        // tests + discards equals total inputs generated
        let config = GenConfig {
            size: 5,
            max_tests: 50,
            max_discards: 500,
        };
        let mut rng = Rng::new(7);
        let mut generated = 0u64;
        let r = run_property(
            |x: &u64| {
                if x % 3 == 0 {
                    TestOutcome::Discard
                } else {
                    TestOutcome::Pass
                }
            },
            |rng, _| {
                generated += 1;
                rng.next_u64()
            },
            &mut rng,
            &config,
            None,
        );
        assert_eq!(r.tests + r.discards, generated);
    }

    #[test]
    fn typebased_size_zero_is_leaf() {
        let config = GenConfig::new(0);
        for seed in 0..50 {
            let mut rng = Rng::new(seed);
            assert_eq!(gen_tree_typebased(&mut rng, &config), Tree::Leaf);
        }
    }

    #[test]
    fn typebased_depth_bounded_by_size() {
        let config = GenConfig::new(3);
        for seed in 0..500 {
            let mut rng = Rng::new(seed);
            let t = gen_tree_typebased(&mut rng, &config);
            assert!(t.depth() <= 3);
        }
    }

    #[test]
    fn typebased_validity_fraction_at_size_10() {
        // Monte Carlo measurement, seed-pinned. Uniform constructor choice
        // puts half the mass on the empty tree, so the unconditional
        // fraction sits near one half plus the small-tree mass; among trees
        // with two or more nodes validity is rare.
        let config = GenConfig::new(10);
        let mut rng = Rng::new(0xB57);
        let n = 1000;
        let mut valid = 0u32;
        let mut nontrivial = 0u32;
        let mut nontrivial_valid = 0u32;
        for _ in 0..n {
            let t = gen_tree_typebased(&mut rng, &config);
            let ok = is_bst(&t);
            if ok {
                valid += 1;
            }
            if t.size() >= 2 {
                nontrivial += 1;
                if ok {
                    nontrivial_valid += 1;
                }
            }
        }
        // frozen oracle values for this pinned seed
        assert_eq!(valid, 681);
        assert_eq!(nontrivial, 354);
        assert_eq!(nontrivial_valid, 35);
    }

    #[test]
    fn bespoke_bst_always_valid_and_bounded() {
        let config = GenConfig::new(30);
        let (lo, hi) = config.key_range();
        assert_eq!((lo, hi), (1, 60));
        for seed in 0..2000 {
            let mut rng = Rng::new(seed);
            let t = gen_bst_bespoke(&mut rng, &config);
            assert!(is_bst(&t));
            assert!(t.size() <= 30);
            for (k, _) in crate::workloads::tree::to_list(&t) {
                assert!((1..=60).contains(&k));
            }
        }
    }

    #[test]
    fn bespoke_bst_size_zero_is_leaf() {
        let config = GenConfig::new(0);
        let mut rng = Rng::new(3);
        assert_eq!(gen_bst_bespoke(&mut rng, &config), Tree::Leaf);
    }

    #[test]
    fn bespoke_rbt_always_valid() {
        let config = GenConfig::new(20);
        for seed in 0..2000 {
            let mut rng = Rng::new(seed);
            let t = gen_rbt_bespoke(&mut rng, &config);
            assert!(crate::workloads::rbt::is_rbt(&t));
        }
    }

    #[test]
    fn identical_seed_identical_run() {
        let config = GenConfig {
            size: 10,
            max_tests: 500,
            max_discards: 5000,
        };
        let run = || {
            let sem = workloads::semantics_for(&["insert_duplicate_entries".into()]).unwrap();
            let sig = workloads::property_signature("InsertValid").unwrap();
            let mut rng = Rng::new(99);
            run_property_traced(
                |inputs: &Vec<Value>| {
                    match workloads::evaluate_property("InsertValid", inputs, &sem).unwrap() {
                        Verdict::Pass => TestOutcome::Pass,
                        Verdict::Discard => TestOutcome::Discard,
                        Verdict::Fail => {
                            TestOutcome::Fail(crate::crosslang::serialize_inputs(inputs))
                        }
                    }
                },
                |rng, config| gen_inputs(rng, config, StrategyKind::Bespoke, sig),
                &mut rng,
                &config,
                None,
            )
        };
        let (a, va) = run();
        let (b, vb) = run();
        assert_eq!(a.status, b.status);
        assert_eq!(a.tests, b.tests);
        assert_eq!(a.discards, b.discards);
        assert_eq!(a.counterexample, b.counterexample);
        assert_eq!(va, vb);
        assert_eq!(a.status, TrialStatus::Found);
        // bespoke generation never discards
        assert_eq!(a.discards, 0);
    }

    #[test]
    fn staged_workload_checks_and_runs() {
        let dir = tempfile::tempdir().unwrap();
        let wl = workloads::install_builtin("bst", dir.path()).unwrap();
        let all = check_staged(&wl, "bst").unwrap();
        assert_eq!(all.len(), workloads::BST_MUTANTS.len());

        // activate a mutant by toggling the staged file, then run a trial
        let insert_file = wl.join("src/insert.impl");
        let style = mutation::CommentStyle::new("{-", "-}");
        let text = std::fs::read_to_string(&insert_file).unwrap();
        let parsed = mutation::parse_variations(&text, &style).unwrap();
        let sel = std::collections::BTreeMap::from([(
            1usize,
            mutation::Choice::Mutant("insert_duplicate_entries".into()),
        )]);
        std::fs::write(&insert_file, parsed.render(&sel).unwrap()).unwrap();

        let spec = RunSpec {
            dir: wl.clone(),
            workload: "bst".into(),
            property: "InsertValid".into(),
            strategy: "bespoke".into(),
            mutant: Some("insert_duplicate_entries".into()),
            seed: 5,
            timeout_s: Some(30.0),
            size: DEFAULT_SIZE,
            max_tests: 100_000,
            max_discards: 1_000_000,
        };
        let r = harness_run(&spec).unwrap();
        assert_eq!(r.status, TrialStatus::Found);
        assert_eq!(r.discards, 0);
        assert!(r.counterexample.is_some());

        // mutant cross-check failure
        let bad = RunSpec {
            mutant: Some("delete_root_only".into()),
            ..spec
        };
        assert!(matches!(
            harness_run(&bad),
            Err(HarnessError::MutantMismatch { .. })
        ));
    }
}
