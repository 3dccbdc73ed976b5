//! Built-in BST and RBT workloads: data types, base implementations,
//! property specifications, and the ground-truth mutant catalog.
//!
//! Mutants are embedded in the shipped `.impl` sources via the mutation
//! grammar; the harness parses the staged sources to learn which mutant is
//! active and dispatches to the matching compiled variant here. A task is a
//! (property, mutant) pair listed in the workload's manifest; every listed
//! pair is falsifiable, which the acceptance suite verifies by exhaustive
//! search over small trees.

pub mod rbt;
pub mod tree;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rbt::{Ctree, RbtDeleteVariant, RbtInsertVariant};
use tree::{DeleteVariant, InsertVariant, Tree, UnionVariant};

/// A workload input value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Int(i64),
    Tree(Tree),
    Ctree(Ctree),
}

/// Input value kinds, forming a property's signature. Keys and values are
/// both integers on the wire but are generated from different ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Key,
    Val,
    Tree,
    Ctree,
}

/// Property evaluation outcome before the harness attaches the
/// counterexample text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Discard,
}

#[derive(Debug, thiserror::Error)]
pub enum WorkloadError {
    #[error("unknown workload `{0}`")]
    UnknownWorkload(String),
    #[error("unknown property `{0}`")]
    UnknownProperty(String),
    #[error("unknown mutant `{0}`")]
    UnknownMutant(String),
    #[error("property `{property}` expects {expected} inputs, got {got}")]
    SignatureMismatch {
        property: String,
        expected: usize,
        got: usize,
    },
}

/// The buggy-variant selection the active mutants induce. Defaults to all
/// base implementations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Semantics {
    pub insert: InsertVariant,
    pub delete: DeleteVariant,
    pub union: UnionVariant,
    pub rbt_insert: RbtInsertVariant,
    pub rbt_delete: RbtDeleteVariant,
}

/// BST mutant names, matching the variations in the shipped sources.
pub const BST_MUTANTS: &[&str] = &[
    "insert_duplicate_entries",
    "insert_no_overwrite",
    "insert_flip_gt",
    "insert_discard_left",
    "insert_leaf_noop",
    "delete_root_only",
    "delete_flip_comparison",
    "delete_drop_left",
    "delete_swap_join",
    "union_wrong_value",
];

/// RBT mutant names, matching the variations in the shipped sources.
pub const RBT_MUTANTS: &[&str] = &[
    "rbt_insert_duplicate_entries",
    "rbt_insert_no_overwrite",
    "rbt_insert_black_leaf",
    "rbt_insert_skip_blacken",
    "rbt_balance_skip_ll",
    "rbt_balance_wrong_recolor",
    "rbt_delete_skip_rebalance",
    "rbt_delete_no_redden",
];

pub const BST_PROPERTIES: &[&str] = &[
    "InsertValid",
    "DeleteValid",
    "UnionValid",
    "InsertPost",
    "DeletePost",
    "InsertModel",
    "DeleteDeleteOrder",
    "UnionPost",
];

pub const RBT_PROPERTIES: &[&str] = &["InsertValidRBT", "DeleteValidRBT", "InsertPostRBT"];

/// Apply a mutant name to the semantics. Unknown names are errors so a
/// staged directory with an unexpected active mutant fails loudly.
pub fn apply_mutant_name(sem: &mut Semantics, name: &str) -> Result<(), WorkloadError> {
    match name {
        "insert_duplicate_entries" => sem.insert = InsertVariant::DuplicateEntries,
        "insert_no_overwrite" => sem.insert = InsertVariant::NoOverwrite,
        "insert_flip_gt" => sem.insert = InsertVariant::FlipGt,
        "insert_discard_left" => sem.insert = InsertVariant::DiscardLeft,
        "insert_leaf_noop" => sem.insert = InsertVariant::LeafNoop,
        "delete_root_only" => sem.delete = DeleteVariant::RootOnly,
        "delete_flip_comparison" => sem.delete = DeleteVariant::FlipComparison,
        "delete_drop_left" => sem.delete = DeleteVariant::DropLeft,
        "delete_swap_join" => sem.delete = DeleteVariant::SwapJoin,
        "union_wrong_value" => sem.union = UnionVariant::WrongValue,
        "rbt_insert_duplicate_entries" => sem.rbt_insert = RbtInsertVariant::DuplicateEntries,
        "rbt_insert_no_overwrite" => sem.rbt_insert = RbtInsertVariant::NoOverwrite,
        "rbt_insert_black_leaf" => sem.rbt_insert = RbtInsertVariant::BlackLeaf,
        "rbt_insert_skip_blacken" => sem.rbt_insert = RbtInsertVariant::SkipBlacken,
        "rbt_balance_skip_ll" => sem.rbt_insert = RbtInsertVariant::BalanceSkipLl,
        "rbt_balance_wrong_recolor" => sem.rbt_insert = RbtInsertVariant::BalanceWrongRecolor,
        "rbt_delete_skip_rebalance" => sem.rbt_delete = RbtDeleteVariant::SkipRebalance,
        "rbt_delete_no_redden" => sem.rbt_delete = RbtDeleteVariant::NoRedden,
        other => return Err(WorkloadError::UnknownMutant(other.to_string())),
    }
    Ok(())
}

/// Build semantics from a list of active mutant names.
pub fn semantics_for(mutants: &[String]) -> Result<Semantics, WorkloadError> {
    let mut sem = Semantics::default();
    for name in mutants {
        apply_mutant_name(&mut sem, name)?;
    }
    Ok(sem)
}

pub fn property_signature(property: &str) -> Result<&'static [Kind], WorkloadError> {
    use Kind::*;
    Ok(match property {
        "InsertValid" => &[Tree, Key, Val],
        "DeleteValid" => &[Tree, Key],
        "UnionValid" => &[Tree, Tree],
        "InsertPost" => &[Tree, Key, Key, Val],
        "DeletePost" => &[Tree, Key, Key],
        "InsertModel" => &[Tree, Key, Val],
        "DeleteDeleteOrder" => &[Tree, Key, Key],
        "UnionPost" => &[Tree, Tree, Key],
        "InsertValidRBT" => &[Ctree, Key, Val],
        "DeleteValidRBT" => &[Ctree, Key],
        "InsertPostRBT" => &[Ctree, Key, Key, Val],
        other => return Err(WorkloadError::UnknownProperty(other.to_string())),
    })
}

fn arity_error(property: &str, expected: usize, got: usize) -> WorkloadError {
    WorkloadError::SignatureMismatch {
        property: property.to_string(),
        expected,
        got,
    }
}

macro_rules! take {
    ($inputs:expr, $idx:expr, $prop:expr, $want:expr, Value::$kind:ident) => {
        match $inputs.get($idx) {
            Some(Value::$kind(x)) => x,
            _ => return Err(arity_error($prop, $want, $inputs.len())),
        }
    };
}

/// Evaluate a catalog property on `inputs` under `sem`. Discard encodes an
/// unmet precondition; the property is vacuously true there.
pub fn evaluate_property(
    property: &str,
    inputs: &[Value],
    sem: &Semantics,
) -> Result<Verdict, WorkloadError> {
    use tree::{delete, find, insert, is_bst, to_list, union};
    let want = property_signature(property)?.len();
    if inputs.len() != want {
        return Err(arity_error(property, want, inputs.len()));
    }
    let pass = |ok: bool| if ok { Verdict::Pass } else { Verdict::Fail };

    let verdict = match property {
        "InsertValid" => {
            let t = take!(inputs, 0, property, want, Value::Tree);
            let k = *take!(inputs, 1, property, want, Value::Int);
            let v = *take!(inputs, 2, property, want, Value::Int);
            if !is_bst(t) {
                return Ok(Verdict::Discard);
            }
            pass(is_bst(&insert(sem.insert, k, v, t)))
        }
        "DeleteValid" => {
            let t = take!(inputs, 0, property, want, Value::Tree);
            let k = *take!(inputs, 1, property, want, Value::Int);
            if !is_bst(t) {
                return Ok(Verdict::Discard);
            }
            pass(is_bst(&delete(sem.delete, k, t)))
        }
        "UnionValid" => {
            let t1 = take!(inputs, 0, property, want, Value::Tree);
            let t2 = take!(inputs, 1, property, want, Value::Tree);
            if !is_bst(t1) || !is_bst(t2) {
                return Ok(Verdict::Discard);
            }
            pass(is_bst(&union(sem.union, sem.insert, t1, t2)))
        }
        "InsertPost" => {
            let t = take!(inputs, 0, property, want, Value::Tree);
            let k = *take!(inputs, 1, property, want, Value::Int);
            let kp = *take!(inputs, 2, property, want, Value::Int);
            let v = *take!(inputs, 3, property, want, Value::Int);
            if !is_bst(t) {
                return Ok(Verdict::Discard);
            }
            let expected = if kp == k { Some(v) } else { find(kp, t) };
            pass(find(kp, &insert(sem.insert, k, v, t)) == expected)
        }
        "DeletePost" => {
            let t = take!(inputs, 0, property, want, Value::Tree);
            let k = *take!(inputs, 1, property, want, Value::Int);
            let kp = *take!(inputs, 2, property, want, Value::Int);
            if !is_bst(t) {
                return Ok(Verdict::Discard);
            }
            let expected = if kp == k { None } else { find(kp, t) };
            pass(find(kp, &delete(sem.delete, k, t)) == expected)
        }
        "InsertModel" => {
            let t = take!(inputs, 0, property, want, Value::Tree);
            let k = *take!(inputs, 1, property, want, Value::Int);
            let v = *take!(inputs, 2, property, want, Value::Int);
            if !is_bst(t) {
                return Ok(Verdict::Discard);
            }
            pass(to_list(&insert(sem.insert, k, v, t)) == tree::model_insert(k, v, &to_list(t)))
        }
        "DeleteDeleteOrder" => {
            let t = take!(inputs, 0, property, want, Value::Tree);
            let k = *take!(inputs, 1, property, want, Value::Int);
            let kp = *take!(inputs, 2, property, want, Value::Int);
            if !is_bst(t) {
                return Ok(Verdict::Discard);
            }
            let a = delete(sem.delete, kp, &delete(sem.delete, k, t));
            let b = delete(sem.delete, k, &delete(sem.delete, kp, t));
            pass(a == b)
        }
        "UnionPost" => {
            let t1 = take!(inputs, 0, property, want, Value::Tree);
            let t2 = take!(inputs, 1, property, want, Value::Tree);
            let k = *take!(inputs, 2, property, want, Value::Int);
            if !is_bst(t1) || !is_bst(t2) {
                return Ok(Verdict::Discard);
            }
            let expected = find(k, t1).or(find(k, t2));
            pass(find(k, &union(sem.union, sem.insert, t1, t2)) == expected)
        }
        "InsertValidRBT" => {
            let t = take!(inputs, 0, property, want, Value::Ctree);
            let k = *take!(inputs, 1, property, want, Value::Int);
            let v = *take!(inputs, 2, property, want, Value::Int);
            if !rbt::is_rbt(t) {
                return Ok(Verdict::Discard);
            }
            pass(rbt::is_rbt(&rbt::insert(sem.rbt_insert, k, v, t)))
        }
        "DeleteValidRBT" => {
            let t = take!(inputs, 0, property, want, Value::Ctree);
            let k = *take!(inputs, 1, property, want, Value::Int);
            if !rbt::is_rbt(t) {
                return Ok(Verdict::Discard);
            }
            pass(rbt::is_rbt(&rbt::delete(sem.rbt_delete, k, t)))
        }
        "InsertPostRBT" => {
            let t = take!(inputs, 0, property, want, Value::Ctree);
            let k = *take!(inputs, 1, property, want, Value::Int);
            let kp = *take!(inputs, 2, property, want, Value::Int);
            let v = *take!(inputs, 3, property, want, Value::Int);
            if !rbt::is_rbt(t) {
                return Ok(Verdict::Discard);
            }
            let expected = if kp == k { Some(v) } else { rbt::find(kp, t) };
            pass(rbt::find(kp, &rbt::insert(sem.rbt_insert, k, v, t)) == expected)
        }
        other => return Err(WorkloadError::UnknownProperty(other.to_string())),
    };
    Ok(verdict)
}

// ---------------------------------------------------------------------------
// exhaustive input space

/// Drive `f` over every input tuple for `property` built from
/// precondition-satisfying trees with at most `max_nodes` nodes, key
/// arguments from `keys`, and value arguments from `values`. `f` returns
/// `false` to stop early. This is the exhaustive ground-truth input space:
/// a (property, mutant) pair is a valid task iff some tuple here fails
/// under the mutant and none fails under base code.
pub fn for_each_exhaustive_input(
    property: &str,
    max_nodes: usize,
    keys: &[i64],
    values: &[i64],
    mut f: impl FnMut(&[Value]) -> bool,
) -> Result<(), WorkloadError> {
    let sig = property_signature(property)?;
    let uses_ctree = sig.contains(&Kind::Ctree);
    let trees: Vec<Value> = if uses_ctree {
        rbt::all_ctrees(max_nodes, keys, values)
            .into_iter()
            .filter(rbt::is_rbt_ref)
            .map(Value::Ctree)
            .collect()
    } else {
        tree::all_trees(max_nodes, keys, values)
            .into_iter()
            .filter(tree::is_bst_ref)
            .map(Value::Tree)
            .collect()
    };
    let key_pool: Vec<Value> = keys.iter().map(|k| Value::Int(*k)).collect();
    let val_pool: Vec<Value> = values.iter().map(|v| Value::Int(*v)).collect();

    fn rec(
        sig: &[Kind],
        trees: &[Value],
        keys: &[Value],
        values: &[Value],
        buf: &mut Vec<Value>,
        f: &mut impl FnMut(&[Value]) -> bool,
    ) -> bool {
        let Some((kind, rest)) = sig.split_first() else {
            return f(buf);
        };
        let pool = match kind {
            Kind::Tree | Kind::Ctree => trees,
            Kind::Key => keys,
            Kind::Val => values,
        };
        for v in pool {
            buf.push(v.clone());
            let keep_going = rec(rest, trees, keys, values, buf, f);
            buf.pop();
            if !keep_going {
                return false;
            }
        }
        true
    }

    let mut buf = Vec::with_capacity(sig.len());
    rec(sig, &trees, &key_pool, &val_pool, &mut buf, &mut f);
    Ok(())
}

/// First exhaustive input on which `property` fails under `sem`, if any.
pub fn find_failing_input(
    property: &str,
    sem: &Semantics,
    max_nodes: usize,
    keys: &[i64],
    values: &[i64],
) -> Result<Option<Vec<Value>>, WorkloadError> {
    let mut found = None;
    for_each_exhaustive_input(property, max_nodes, keys, values, |inputs| {
        match evaluate_property(property, inputs, sem) {
            Ok(Verdict::Fail) => {
                found = Some(inputs.to_vec());
                false
            }
            _ => true,
        }
    })?;
    Ok(found)
}

// ---------------------------------------------------------------------------
// built-in workload files

/// One file of a built-in workload, with its path relative to the workload
/// directory.
#[derive(Debug, Clone, Copy)]
pub struct BuiltinFile {
    pub rel_path: &'static str,
    pub contents: &'static str,
}

pub fn builtin_workloads() -> BTreeMap<&'static str, Vec<BuiltinFile>> {
    let mut map = BTreeMap::new();
    map.insert(
        "bst",
        vec![
            BuiltinFile {
                rel_path: "config.json",
                contents: include_str!("../../assets/workloads/bst/config.json"),
            },
            BuiltinFile {
                rel_path: "src/insert.impl",
                contents: include_str!("../../assets/workloads/bst/src/insert.impl"),
            },
            BuiltinFile {
                rel_path: "src/delete.impl",
                contents: include_str!("../../assets/workloads/bst/src/delete.impl"),
            },
            BuiltinFile {
                rel_path: "src/union.impl",
                contents: include_str!("../../assets/workloads/bst/src/union.impl"),
            },
        ],
    );
    map.insert(
        "rbt",
        vec![
            BuiltinFile {
                rel_path: "config.json",
                contents: include_str!("../../assets/workloads/rbt/config.json"),
            },
            BuiltinFile {
                rel_path: "src/insert.impl",
                contents: include_str!("../../assets/workloads/rbt/src/insert.impl"),
            },
            BuiltinFile {
                rel_path: "src/delete.impl",
                contents: include_str!("../../assets/workloads/rbt/src/delete.impl"),
            },
        ],
    );
    map
}

/// Copy a built-in workload into `dest/<name>/`. Returns the workload
/// directory path.
pub fn install_builtin(name: &str, dest: &Path) -> Result<PathBuf, WorkloadError> {
    let files = builtin_workloads()
        .remove(name)
        .ok_or_else(|| WorkloadError::UnknownWorkload(name.to_string()))?;
    let dir = dest.join(name);
    for file in files {
        let path = dir.join(file.rel_path);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).expect("create workload directory");
        }
        std::fs::write(&path, file.contents).expect("write workload file");
    }
    Ok(dir)
}
