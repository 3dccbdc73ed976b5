//! Binary search trees: base operations, buggy variants, and the sorted
//! association-list model they are checked against.

/// `Leaf`, or `Node(left, key, value, right)`. The type itself carries no
/// ordering invariant; `is_bst` is the semantic predicate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Tree {
    Leaf,
    Node(Box<Tree>, i64, i64, Box<Tree>),
}

impl Tree {
    pub fn node(l: Tree, k: i64, v: i64, r: Tree) -> Tree {
        Tree::Node(Box::new(l), k, v, Box::new(r))
    }

    pub fn size(&self) -> usize {
        match self {
            Tree::Leaf => 0,
            Tree::Node(l, _, _, r) => 1 + l.size() + r.size(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Tree::Leaf => 0,
            Tree::Node(l, _, _, r) => 1 + l.depth().max(r.depth()),
        }
    }
}

/// Strict BST order: every key greater than everything to its left and less
/// than everything to its right.
pub fn is_bst(t: &Tree) -> bool {
    fn within(t: &Tree, lo: Option<i64>, hi: Option<i64>) -> bool {
        match t {
            Tree::Leaf => true,
            Tree::Node(l, k, _, r) => {
                lo.is_none_or(|lo| *k > lo)
                    && hi.is_none_or(|hi| *k < hi)
                    && within(l, lo, Some(*k))
                    && within(r, Some(*k), hi)
            }
        }
    }
    within(t, None, None)
}

pub fn is_bst_ref(t: &Tree) -> bool {
    is_bst(t)
}

pub fn find(k: i64, t: &Tree) -> Option<i64> {
    match t {
        Tree::Leaf => None,
        Tree::Node(l, k2, v, r) => {
            if k < *k2 {
                find(k, l)
            } else if k > *k2 {
                find(k, r)
            } else {
                Some(*v)
            }
        }
    }
}

pub fn to_list(t: &Tree) -> Vec<(i64, i64)> {
    fn walk(t: &Tree, out: &mut Vec<(i64, i64)>) {
        if let Tree::Node(l, k, v, r) = t {
            walk(l, out);
            out.push((*k, *v));
            walk(r, out);
        }
    }
    let mut out = Vec::new();
    walk(t, &mut out);
    out
}

// ---------------------------------------------------------------------------
// insert

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InsertVariant {
    #[default]
    Base,
    /// Equal keys fall through to the right branch, inserting a duplicate
    /// entry instead of overwriting.
    DuplicateEntries,
    /// Equal keys keep the old value.
    NoOverwrite,
    /// Comparison flipped: smaller keys go right, larger keys go left.
    FlipGt,
    /// Recursing left returns only the rebuilt left subtree, discarding the
    /// node and everything to its right.
    DiscardLeft,
    /// Inserting into an empty tree does nothing.
    LeafNoop,
}

pub fn insert(variant: InsertVariant, k: i64, v: i64, t: &Tree) -> Tree {
    use InsertVariant::*;
    match t {
        Tree::Leaf => match variant {
            LeafNoop => Tree::Leaf,
            _ => Tree::node(Tree::Leaf, k, v, Tree::Leaf),
        },
        Tree::Node(l, k2, v2, r) => match variant {
            Base | NoOverwrite | LeafNoop => {
                if k < *k2 {
                    Tree::node(insert(variant, k, v, l), *k2, *v2, (**r).clone())
                } else if k > *k2 {
                    Tree::node((**l).clone(), *k2, *v2, insert(variant, k, v, r))
                } else if variant == NoOverwrite {
                    t.clone()
                } else {
                    Tree::node((**l).clone(), *k2, v, (**r).clone())
                }
            }
            DuplicateEntries => {
                if k < *k2 {
                    Tree::node(insert(variant, k, v, l), *k2, *v2, (**r).clone())
                } else {
                    Tree::node((**l).clone(), *k2, *v2, insert(variant, k, v, r))
                }
            }
            FlipGt => {
                if k < *k2 {
                    Tree::node((**l).clone(), *k2, *v2, insert(variant, k, v, r))
                } else if k > *k2 {
                    Tree::node(insert(variant, k, v, l), *k2, *v2, (**r).clone())
                } else {
                    Tree::node((**l).clone(), *k2, v, (**r).clone())
                }
            }
            DiscardLeft => {
                if k < *k2 {
                    insert(variant, k, v, l)
                } else if k > *k2 {
                    Tree::node((**l).clone(), *k2, *v2, insert(variant, k, v, r))
                } else {
                    Tree::node((**l).clone(), *k2, v, (**r).clone())
                }
            }
        },
    }
}

// ---------------------------------------------------------------------------
// delete

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeleteVariant {
    #[default]
    Base,
    /// Removes a key only when it happens to be the root; anything deeper is
    /// left untouched.
    RootOnly,
    /// Comparison flipped, so the recursion walks into the wrong subtree.
    FlipComparison,
    /// Removing a node keeps only its right subtree, dropping the left.
    DropLeft,
    /// Removing a node joins its subtrees in the wrong order.
    SwapJoin,
}

/// Join two BSTs where everything in `l` is below everything in `r`, by
/// lifting the minimum of `r`.
fn join(l: &Tree, r: &Tree) -> Tree {
    fn take_min(t: &Tree) -> Option<(i64, i64, Tree)> {
        match t {
            Tree::Leaf => None,
            Tree::Node(l, k, v, r) => match take_min(l) {
                None => Some((*k, *v, (**r).clone())),
                Some((mk, mv, l2)) => Some((mk, mv, Tree::node(l2, *k, *v, (**r).clone()))),
            },
        }
    }
    match take_min(r) {
        None => l.clone(),
        Some((mk, mv, r2)) => Tree::node(l.clone(), mk, mv, r2),
    }
}

pub fn delete(variant: DeleteVariant, k: i64, t: &Tree) -> Tree {
    use DeleteVariant::*;
    match t {
        Tree::Leaf => Tree::Leaf,
        Tree::Node(l, k2, v2, r) => match variant {
            Base => {
                if k < *k2 {
                    Tree::node(delete(variant, k, l), *k2, *v2, (**r).clone())
                } else if k > *k2 {
                    Tree::node((**l).clone(), *k2, *v2, delete(variant, k, r))
                } else {
                    join(l, r)
                }
            }
            RootOnly => {
                if k == *k2 {
                    join(l, r)
                } else {
                    t.clone()
                }
            }
            FlipComparison => {
                if k < *k2 {
                    Tree::node((**l).clone(), *k2, *v2, delete(variant, k, r))
                } else if k > *k2 {
                    Tree::node(delete(variant, k, l), *k2, *v2, (**r).clone())
                } else {
                    join(l, r)
                }
            }
            DropLeft => {
                if k < *k2 {
                    Tree::node(delete(variant, k, l), *k2, *v2, (**r).clone())
                } else if k > *k2 {
                    Tree::node((**l).clone(), *k2, *v2, delete(variant, k, r))
                } else {
                    (**r).clone()
                }
            }
            SwapJoin => {
                if k < *k2 {
                    Tree::node(delete(variant, k, l), *k2, *v2, (**r).clone())
                } else if k > *k2 {
                    Tree::node((**l).clone(), *k2, *v2, delete(variant, k, r))
                } else {
                    join(r, l)
                }
            }
        },
    }
}

// ---------------------------------------------------------------------------
// union

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnionVariant {
    #[default]
    Base,
    /// On key collision the right tree's value wins instead of the left's.
    WrongValue,
}

/// Left-biased union: keys from both trees, `t1`'s value on collisions.
pub fn union(variant: UnionVariant, insert_variant: InsertVariant, t1: &Tree, t2: &Tree) -> Tree {
    let mut acc = t1.clone();
    for (k, v) in to_list(t2) {
        match variant {
            UnionVariant::Base => {
                if find(k, &acc).is_none() {
                    acc = insert(insert_variant, k, v, &acc);
                }
            }
            UnionVariant::WrongValue => {
                acc = insert(insert_variant, k, v, &acc);
            }
        }
    }
    acc
}

// ---------------------------------------------------------------------------
// sorted association-list model

pub fn model_insert(k: i64, v: i64, list: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut out: Vec<(i64, i64)> = list.iter().copied().filter(|(k2, _)| *k2 != k).collect();
    out.push((k, v));
    out.sort_by_key(|(k2, _)| *k2);
    out
}

pub fn model_delete(k: i64, list: &[(i64, i64)]) -> Vec<(i64, i64)> {
    list.iter().copied().filter(|(k2, _)| *k2 != k).collect()
}

pub fn model_union(l1: &[(i64, i64)], l2: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut out = l1.to_vec();
    for (k, v) in l2 {
        if !l1.iter().any(|(k1, _)| k1 == k) {
            out.push((*k, *v));
        }
    }
    out.sort_by_key(|(k2, _)| *k2);
    out
}

/// Enumerate every tree with at most `max_nodes` nodes, keys drawn from
/// `keys`, values from `values`. The exhaustive input space for ground-truth
/// checks.
pub fn all_trees(max_nodes: usize, keys: &[i64], values: &[i64]) -> Vec<Tree> {
    fn exactly(n: usize, keys: &[i64], values: &[i64]) -> Vec<Tree> {
        if n == 0 {
            return vec![Tree::Leaf];
        }
        let mut out = Vec::new();
        for left_n in 0..n {
            let lefts = exactly(left_n, keys, values);
            let rights = exactly(n - 1 - left_n, keys, values);
            for l in &lefts {
                for r in &rights {
                    for &k in keys {
                        for &v in values {
                            out.push(Tree::node(l.clone(), k, v, r.clone()));
                        }
                    }
                }
            }
        }
        out
    }
    let mut out = Vec::new();
    for n in 0..=max_nodes {
        out.extend(exactly(n, keys, values));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf() -> Tree {
        Tree::Leaf
    }

    #[test]
    fn is_bst_examples() {
        assert!(is_bst(&leaf()));
        let good = Tree::node(
            Tree::node(leaf(), 1, 0, leaf()),
            2,
            0,
            Tree::node(leaf(), 3, 0, leaf()),
        );
        assert!(is_bst(&good));
        let bad = Tree::node(Tree::node(leaf(), 3, 0, leaf()), 2, 0, leaf());
        assert!(!is_bst(&bad));
    }

    #[test]
    fn insert_base_examples() {
        assert_eq!(
            insert(InsertVariant::Base, 1, 10, &leaf()),
            Tree::node(leaf(), 1, 10, leaf())
        );
        // overwrite on duplicate key
        let t = Tree::node(leaf(), 2, 9, leaf());
        assert_eq!(
            insert(InsertVariant::Base, 2, 5, &t),
            Tree::node(leaf(), 2, 5, leaf())
        );
    }

    #[test]
    fn insert_duplicate_entries_trace() {
        // hand-trace of the two-guard body: equal key falls through to the
        // right branch
        let t = Tree::node(leaf(), 2, 9, leaf());
        assert_eq!(
            insert(InsertVariant::DuplicateEntries, 2, 5, &t),
            Tree::node(leaf(), 2, 9, Tree::node(leaf(), 2, 5, leaf()))
        );
    }

    #[test]
    fn delete_base_examples() {
        assert_eq!(delete(DeleteVariant::Base, 1, &leaf()), leaf());
        assert_eq!(
            delete(DeleteVariant::Base, 2, &Tree::node(leaf(), 2, 0, leaf())),
            leaf()
        );
    }

    #[test]
    fn delete_root_only_trace() {
        // 1 is not the root, so the mutant leaves the tree unchanged
        let t = Tree::node(Tree::node(leaf(), 1, 0, leaf()), 2, 0, leaf());
        assert_eq!(delete(DeleteVariant::RootOnly, 1, &t), t);
        // but the root itself still works
        assert_eq!(
            delete(DeleteVariant::RootOnly, 2, &t),
            Tree::node(leaf(), 1, 0, leaf())
        );
    }

    #[test]
    fn union_examples() {
        let t = Tree::node(leaf(), 1, 10, leaf());
        assert_eq!(union(UnionVariant::Base, InsertVariant::Base, &leaf(), &t), t);
        let t2 = Tree::node(leaf(), 1, 20, leaf());
        // left bias
        assert_eq!(
            union(UnionVariant::Base, InsertVariant::Base, &t, &t2),
            Tree::node(leaf(), 1, 10, leaf())
        );
        // the mutant prefers the wrong value
        assert_eq!(
            union(UnionVariant::WrongValue, InsertVariant::Base, &t, &t2),
            Tree::node(leaf(), 1, 20, leaf())
        );
    }

    #[test]
    fn model_agreement_exhaustive_small() {
        let keys = [1, 2, 3];
        let values = [0, 1];
        for t in all_trees(3, &keys, &values) {
            if !is_bst(&t) {
                continue;
            }
            let model = to_list(&t);
            for k in 1..=3 {
                for v in values {
                    assert_eq!(
                        to_list(&insert(InsertVariant::Base, k, v, &t)),
                        model_insert(k, v, &model)
                    );
                }
                assert_eq!(to_list(&delete(DeleteVariant::Base, k, &t)), model_delete(k, &model));
            }
        }
    }

    #[test]
    fn union_model_agreement_exhaustive_small() {
        let keys = [1, 2];
        let values = [0, 1];
        let trees: Vec<Tree> = all_trees(2, &keys, &values)
            .into_iter()
            .filter(is_bst_ref)
            .collect();
        for t1 in &trees {
            for t2 in &trees {
                assert_eq!(
                    to_list(&union(UnionVariant::Base, InsertVariant::Base, t1, t2)),
                    model_union(&to_list(t1), &to_list(t2))
                );
            }
        }
    }

    #[test]
    fn all_trees_counts() {
        // Catalan(n) shapes times |keys|^n * |values|^n labeled variants
        let ts = all_trees(2, &[1, 2], &[0]);
        // n=0: 1, n=1: 1*2, n=2: 2 shapes * 4 keyings = 8 -> 11
        assert_eq!(ts.len(), 1 + 2 + 8);
    }
}
