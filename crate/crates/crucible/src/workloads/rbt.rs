//! Red-black trees: self-balancing insertion (Okasaki) and deletion
//! (Kahrs), with buggy variants targeting the balancing and recoloring
//! steps.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Color {
    Red,
    Black,
}

/// `Leaf`, or `Node(color, left, key, value, right)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Ctree {
    Leaf,
    Node(Color, Box<Ctree>, i64, i64, Box<Ctree>),
}

use Color::{Black, Red};

impl Ctree {
    pub fn node(c: Color, l: Ctree, k: i64, v: i64, r: Ctree) -> Ctree {
        Ctree::Node(c, Box::new(l), k, v, Box::new(r))
    }

    pub fn size(&self) -> usize {
        match self {
            Ctree::Leaf => 0,
            Ctree::Node(_, l, _, _, r) => 1 + l.size() + r.size(),
        }
    }

    fn is_red(&self) -> bool {
        matches!(self, Ctree::Node(Red, ..))
    }

    fn is_black_node(&self) -> bool {
        matches!(self, Ctree::Node(Black, ..))
    }
}

/// The three validity conditions, reportable separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RbtCheck {
    pub ordered: bool,
    pub no_red_red: bool,
    pub black_height: bool,
}

pub fn check_rbt(t: &Ctree) -> RbtCheck {
    fn within(t: &Ctree, lo: Option<i64>, hi: Option<i64>) -> bool {
        match t {
            Ctree::Leaf => true,
            Ctree::Node(_, l, k, _, r) => {
                lo.is_none_or(|lo| *k > lo)
                    && hi.is_none_or(|hi| *k < hi)
                    && within(l, lo, Some(*k))
                    && within(r, Some(*k), hi)
            }
        }
    }
    fn red_red(t: &Ctree) -> bool {
        match t {
            Ctree::Leaf => false,
            Ctree::Node(c, l, _, _, r) => {
                (*c == Red && (l.is_red() || r.is_red())) || red_red(l) || red_red(r)
            }
        }
    }
    /// Black nodes on every root-to-leaf path, or `None` if paths disagree.
    fn bh(t: &Ctree) -> Option<usize> {
        match t {
            Ctree::Leaf => Some(0),
            Ctree::Node(c, l, _, _, r) => {
                let hl = bh(l)?;
                let hr = bh(r)?;
                if hl != hr {
                    return None;
                }
                Some(hl + usize::from(*c == Black))
            }
        }
    }
    RbtCheck {
        ordered: within(t, None, None),
        no_red_red: !red_red(t),
        black_height: bh(t).is_some(),
    }
}

/// Order + no red node with a red child + equal black-height everywhere.
pub fn is_rbt(t: &Ctree) -> bool {
    let c = check_rbt(t);
    c.ordered && c.no_red_red && c.black_height
}

pub fn is_rbt_ref(t: &Ctree) -> bool {
    is_rbt(t)
}

pub fn find(k: i64, t: &Ctree) -> Option<i64> {
    match t {
        Ctree::Leaf => None,
        Ctree::Node(_, l, k2, v, r) => {
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

pub fn to_list(t: &Ctree) -> Vec<(i64, i64)> {
    fn walk(t: &Ctree, out: &mut Vec<(i64, i64)>) {
        if let Ctree::Node(_, l, k, v, r) = t {
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
// insertion

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RbtInsertVariant {
    #[default]
    Base,
    /// Equal keys are inserted again to the right instead of overwriting.
    DuplicateEntries,
    /// Equal keys keep the old value.
    NoOverwrite,
    /// Fresh nodes are colored black instead of red.
    BlackLeaf,
    /// The root is not repainted black after insertion.
    SkipBlacken,
    /// The left-left rotation case of rebalancing is skipped.
    BalanceSkipLl,
    /// The left-left rotation leaves the lifted child red.
    BalanceWrongRecolor,
}

fn balance_ins(variant: RbtInsertVariant, c: Color, l: Ctree, k: i64, v: i64, r: Ctree) -> Ctree {
    use Ctree::Node;
    if c == Black {
        // left-left
        if let Node(Red, ll, lk, lv, lr) = &l {
            if let Node(Red, a, xk, xv, b) = &**ll {
                match variant {
                    RbtInsertVariant::BalanceSkipLl => {}
                    RbtInsertVariant::BalanceWrongRecolor => {
                        return Ctree::node(
                            Red,
                            Ctree::node(Red, (**a).clone(), *xk, *xv, (**b).clone()),
                            *lk,
                            *lv,
                            Ctree::node(Black, (**lr).clone(), k, v, r),
                        );
                    }
                    _ => {
                        return Ctree::node(
                            Red,
                            Ctree::node(Black, (**a).clone(), *xk, *xv, (**b).clone()),
                            *lk,
                            *lv,
                            Ctree::node(Black, (**lr).clone(), k, v, r),
                        );
                    }
                }
            }
        }
        // left-right
        if let Node(Red, a, xk, xv, lr) = &l {
            if let Node(Red, b, yk, yv, c2) = &**lr {
                return Ctree::node(
                    Red,
                    Ctree::node(Black, (**a).clone(), *xk, *xv, (**b).clone()),
                    *yk,
                    *yv,
                    Ctree::node(Black, (**c2).clone(), k, v, r),
                );
            }
        }
        // right-left
        if let Node(Red, rl, zk, zv, d) = &r {
            if let Node(Red, b, yk, yv, c2) = &**rl {
                return Ctree::node(
                    Red,
                    Ctree::node(Black, l, k, v, (**b).clone()),
                    *yk,
                    *yv,
                    Ctree::node(Black, (**c2).clone(), *zk, *zv, (**d).clone()),
                );
            }
        }
        // right-right
        if let Node(Red, b, yk, yv, rr) = &r {
            if let Node(Red, c2, zk, zv, d) = &**rr {
                return Ctree::node(
                    Red,
                    Ctree::node(Black, l, k, v, (**b).clone()),
                    *yk,
                    *yv,
                    Ctree::node(Black, (**c2).clone(), *zk, *zv, (**d).clone()),
                );
            }
        }
    }
    Ctree::node(c, l, k, v, r)
}

pub fn insert(variant: RbtInsertVariant, k: i64, v: i64, t: &Ctree) -> Ctree {
    fn ins(variant: RbtInsertVariant, k: i64, v: i64, t: &Ctree) -> Ctree {
        match t {
            Ctree::Leaf => {
                let c = if variant == RbtInsertVariant::BlackLeaf {
                    Black
                } else {
                    Red
                };
                Ctree::node(c, Ctree::Leaf, k, v, Ctree::Leaf)
            }
            Ctree::Node(c, l, k2, v2, r) => {
                if k < *k2 {
                    balance_ins(variant, *c, ins(variant, k, v, l), *k2, *v2, (**r).clone())
                } else if k > *k2 {
                    balance_ins(variant, *c, (**l).clone(), *k2, *v2, ins(variant, k, v, r))
                } else {
                    match variant {
                        RbtInsertVariant::DuplicateEntries => balance_ins(
                            variant,
                            *c,
                            (**l).clone(),
                            *k2,
                            *v2,
                            ins(variant, k, v, r),
                        ),
                        RbtInsertVariant::NoOverwrite => t.clone(),
                        _ => Ctree::node(*c, (**l).clone(), *k2, v, (**r).clone()),
                    }
                }
            }
        }
    }
    let out = ins(variant, k, v, t);
    if variant == RbtInsertVariant::SkipBlacken {
        return out;
    }
    match out {
        Ctree::Leaf => Ctree::Leaf,
        Ctree::Node(_, l, k2, v2, r) => Ctree::Node(Black, l, k2, v2, r),
    }
}

// ---------------------------------------------------------------------------
// deletion

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RbtDeleteVariant {
    #[default]
    Base,
    /// Deleting below a black child skips the rebalancing pass.
    SkipRebalance,
    /// Rebalancing forgets to repaint the sibling red before rotating.
    NoRedden,
}

/// Five-clause rebalance used by deletion; blackens at the fallthrough.
fn balance_del(l: Ctree, k: i64, v: i64, r: Ctree) -> Ctree {
    use Ctree::Node;
    if l.is_red() && r.is_red() {
        if let (Node(_, a, xk, xv, b), Node(_, c, yk, yv, d)) = (&l, &r) {
            return Ctree::node(
                Red,
                Ctree::node(Black, (**a).clone(), *xk, *xv, (**b).clone()),
                k,
                v,
                Ctree::node(Black, (**c).clone(), *yk, *yv, (**d).clone()),
            );
        }
    }
    if let Node(Red, ll, lk, lv, lr) = &l {
        if let Node(Red, a, xk, xv, b) = &**ll {
            return Ctree::node(
                Red,
                Ctree::node(Black, (**a).clone(), *xk, *xv, (**b).clone()),
                *lk,
                *lv,
                Ctree::node(Black, (**lr).clone(), k, v, r),
            );
        }
        if let Node(Red, b, yk, yv, c) = &**lr {
            return Ctree::node(
                Red,
                Ctree::node(Black, (**ll).clone(), *lk, *lv, (**b).clone()),
                *yk,
                *yv,
                Ctree::node(Black, (**c).clone(), k, v, r),
            );
        }
    }
    if let Node(Red, rl, rk, rv, rr) = &r {
        if let Node(Red, b, yk, yv, c) = &**rl {
            return Ctree::node(
                Red,
                Ctree::node(Black, l, k, v, (**b).clone()),
                *yk,
                *yv,
                Ctree::node(Black, (**c).clone(), *rk, *rv, (**rr).clone()),
            );
        }
        if let Node(Red, c, zk, zv, d) = &**rr {
            return Ctree::node(
                Red,
                Ctree::node(Black, l, k, v, (**rl).clone()),
                *rk,
                *rv,
                Ctree::node(Black, (**c).clone(), *zk, *zv, (**d).clone()),
            );
        }
    }
    Ctree::node(Black, l, k, v, r)
}

/// Repaint a black root red. Total: reachable only on black-rooted subtrees
/// when the tree is valid, so anything else passes through unchanged.
fn sub1(t: Ctree) -> Ctree {
    match t {
        Ctree::Node(Black, l, k, v, r) => Ctree::Node(Red, l, k, v, r),
        other => other,
    }
}

fn balleft(variant: RbtDeleteVariant, l: Ctree, k: i64, v: i64, r: Ctree) -> Ctree {
    use Ctree::Node;
    if let Node(Red, a, xk, xv, b) = &l {
        return Ctree::node(
            Red,
            Ctree::node(Black, (**a).clone(), *xk, *xv, (**b).clone()),
            k,
            v,
            r,
        );
    }
    if let Node(Black, a, yk, yv, b) = &r {
        // NoRedden forgets to repaint the sibling before rebalancing
        let sibling_color = if variant == RbtDeleteVariant::NoRedden {
            Black
        } else {
            Red
        };
        return balance_del(
            l,
            k,
            v,
            Ctree::node(sibling_color, (**a).clone(), *yk, *yv, (**b).clone()),
        );
    }
    if let Node(Red, rl, zk, zv, c) = &r {
        if let Node(Black, a, yk, yv, b) = &**rl {
            return Ctree::node(
                Red,
                Ctree::node(Black, l, k, v, (**a).clone()),
                *yk,
                *yv,
                balance_del((**b).clone(), *zk, *zv, sub1((**c).clone())),
            );
        }
    }
    Ctree::node(Black, l, k, v, r)
}

fn balright(_variant: RbtDeleteVariant, l: Ctree, k: i64, v: i64, r: Ctree) -> Ctree {
    use Ctree::Node;
    if let Node(Red, b, yk, yv, c) = &r {
        return Ctree::node(
            Red,
            l,
            k,
            v,
            Ctree::node(Black, (**b).clone(), *yk, *yv, (**c).clone()),
        );
    }
    if let Node(Black, a, xk, xv, b) = &l {
        return balance_del(
            Ctree::node(Red, (**a).clone(), *xk, *xv, (**b).clone()),
            k,
            v,
            r,
        );
    }
    if let Node(Red, a, xk, xv, lr) = &l {
        if let Node(Black, b, yk, yv, c) = &**lr {
            return Ctree::node(
                Red,
                balance_del(sub1((**a).clone()), *xk, *xv, (**b).clone()),
                *yk,
                *yv,
                Ctree::node(Black, (**c).clone(), k, v, r),
            );
        }
    }
    Ctree::node(Black, l, k, v, r)
}

/// Fuse two subtrees whose keys are separated by a deleted element.
fn app(variant: RbtDeleteVariant, l: &Ctree, r: &Ctree) -> Ctree {
    use Ctree::Node;
    match (l, r) {
        (Ctree::Leaf, x) => x.clone(),
        (x, Ctree::Leaf) => x.clone(),
        (Node(Red, a, xk, xv, b), Node(Red, c, yk, yv, d)) => {
            let m = app(variant, b, c);
            if let Node(Red, b2, zk, zv, c2) = m {
                Ctree::node(
                    Red,
                    Ctree::node(Red, (**a).clone(), *xk, *xv, (*b2).clone()),
                    zk,
                    zv,
                    Ctree::node(Red, (*c2).clone(), *yk, *yv, (**d).clone()),
                )
            } else {
                Ctree::node(
                    Red,
                    (**a).clone(),
                    *xk,
                    *xv,
                    Ctree::node(Red, m, *yk, *yv, (**d).clone()),
                )
            }
        }
        (Node(Black, a, xk, xv, b), Node(Black, c, yk, yv, d)) => {
            let m = app(variant, b, c);
            if let Node(Red, b2, zk, zv, c2) = m {
                Ctree::node(
                    Red,
                    Ctree::node(Black, (**a).clone(), *xk, *xv, (*b2).clone()),
                    zk,
                    zv,
                    Ctree::node(Black, (*c2).clone(), *yk, *yv, (**d).clone()),
                )
            } else {
                balleft(
                    variant,
                    (**a).clone(),
                    *xk,
                    *xv,
                    Ctree::node(Black, m, *yk, *yv, (**d).clone()),
                )
            }
        }
        (x, Node(Red, b, yk, yv, c)) => {
            Ctree::node(Red, app(variant, x, b), *yk, *yv, (**c).clone())
        }
        (Node(Red, a, xk, xv, b), c) => {
            Ctree::node(Red, (**a).clone(), *xk, *xv, app(variant, b, c))
        }
    }
}

pub fn delete(variant: RbtDeleteVariant, k: i64, t: &Ctree) -> Ctree {
    fn del(variant: RbtDeleteVariant, k: i64, t: &Ctree) -> Ctree {
        match t {
            Ctree::Leaf => Ctree::Leaf,
            Ctree::Node(_, a, yk, yv, b) => {
                if k < *yk {
                    // rebalance when descending below a black child;
                    // SkipRebalance omits this pass on the left side
                    if a.is_black_node() && variant != RbtDeleteVariant::SkipRebalance {
                        balleft(variant, del(variant, k, a), *yk, *yv, (**b).clone())
                    } else {
                        Ctree::node(Red, del(variant, k, a), *yk, *yv, (**b).clone())
                    }
                } else if k > *yk {
                    if b.is_black_node() {
                        balright(variant, (**a).clone(), *yk, *yv, del(variant, k, b))
                    } else {
                        Ctree::node(Red, (**a).clone(), *yk, *yv, del(variant, k, b))
                    }
                } else {
                    app(variant, a, b)
                }
            }
        }
    }
    match del(variant, k, t) {
        Ctree::Leaf => Ctree::Leaf,
        Ctree::Node(_, l, k2, v2, r) => Ctree::Node(Black, l, k2, v2, r),
    }
}

/// Enumerate every colored tree with at most `max_nodes` nodes.
pub fn all_ctrees(max_nodes: usize, keys: &[i64], values: &[i64]) -> Vec<Ctree> {
    fn exactly(n: usize, keys: &[i64], values: &[i64]) -> Vec<Ctree> {
        if n == 0 {
            return vec![Ctree::Leaf];
        }
        let mut out = Vec::new();
        for left_n in 0..n {
            let lefts = exactly(left_n, keys, values);
            let rights = exactly(n - 1 - left_n, keys, values);
            for l in &lefts {
                for r in &rights {
                    for &k in keys {
                        for &v in values {
                            for c in [Red, Black] {
                                out.push(Ctree::node(c, l.clone(), k, v, r.clone()));
                            }
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
