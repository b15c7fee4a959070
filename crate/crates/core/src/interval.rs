//! Discrete intervals of `[1, n]`, the penalty coefficients attached to
//! nested interval pairs, and the dyadified interval families built on the
//! binary tree of dyadic intervals.
//!
//! All indices are 1-based and intervals are inclusive on both ends.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{MtfError, Result};

/// Inclusive index range `[start, end]` with `1 <= start <= end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Interval {
    start: usize,
    end: usize,
}

impl Interval {
    pub fn new(start: usize, end: usize) -> Result<Self> {
        if start == 0 || start > end {
            return Err(MtfError::InvalidInterval { start, end });
        }
        Ok(Interval { start, end })
    }

    /// Caller guarantees `1 <= start <= end`.
    pub(crate) const fn new_unchecked(start: usize, end: usize) -> Self {
        Interval { start, end }
    }

    pub fn singleton(i: usize) -> Result<Self> {
        Self::new(i, i)
    }

    /// The whole range `[1, n]`.
    pub fn full(n: usize) -> Result<Self> {
        Self::new(1, n)
    }

    pub const fn start(&self) -> usize {
        self.start
    }

    pub const fn end(&self) -> usize {
        self.end
    }

    #[allow(clippy::len_without_is_empty)]
    pub const fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub const fn contains(&self, i: usize) -> bool {
        self.start <= i && i <= self.end
    }

    /// `other ⊆ self`.
    pub const fn contains_interval(&self, other: &Interval) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    /// Checks that the interval fits in `[1, n]`.
    pub fn check_within(&self, n: usize) -> Result<()> {
        if self.end > n {
            return Err(MtfError::IndexOutOfRange { index: self.end, n });
        }
        Ok(())
    }

    pub fn intersection(&self, other: &Interval) -> Option<Interval> {
        let start = self.start.max(other.start);
        let end = self.end.min(other.end);
        (start <= end).then_some(Interval { start, end })
    }

    /// Zero-based range for slicing a series.
    pub fn range(&self) -> std::ops::Range<usize> {
        self.start - 1..self.end
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start, self.end)
    }
}

/// Penalty weight of a subinterval `inner ⊆ outer` for interior indices.
///
/// `+1` when `inner` avoids both endpoints of `outer`, `-1` when the two are
/// equal and `0` when `inner` touches exactly one endpoint.
pub fn penalty_coefficient(inner: &Interval, outer: &Interval) -> Result<i8> {
    if !outer.contains_interval(inner) {
        return Err(MtfError::NotNested {
            inner: *inner,
            outer: *outer,
        });
    }
    Ok(coefficient_unchecked(inner, outer))
}

#[inline]
pub(crate) fn coefficient_unchecked(inner: &Interval, outer: &Interval) -> i8 {
    let touches_left = inner.start == outer.start;
    let touches_right = inner.end == outer.end;
    match (touches_left, touches_right) {
        (true, true) => -1,
        (false, false) => 1,
        _ => 0,
    }
}

/// Penalty weight used by the last-point estimator: both intervals must
/// contain `n`, and the weight is `-1` for `inner == outer`, `+1` otherwise.
pub fn boundary_penalty_coefficient(inner: &Interval, outer: &Interval, n: usize) -> Result<i8> {
    if !outer.contains_interval(inner) {
        return Err(MtfError::NotNested {
            inner: *inner,
            outer: *outer,
        });
    }
    if !inner.contains(n) {
        return Err(MtfError::IndexOutside {
            index: n,
            interval: *inner,
        });
    }
    Ok(if inner == outer { -1 } else { 1 })
}

/// `min(i - start + 1, end - i + 1)`.
pub fn dist_to_boundary(i: usize, interval: &Interval) -> Result<usize> {
    if !interval.contains(i) {
        return Err(MtfError::IndexOutside {
            index: i,
            interval: *interval,
        });
    }
    Ok((i - interval.start + 1).min(interval.end - i + 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeNode {
    pub interval: Interval,
    pub depth: usize,
    pub parent: Option<usize>,
    pub children: Option<(usize, usize)>,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

/// Complete binary tree of dyadic intervals over `[1, n]`.
///
/// A node `[a, b]` with `a < b` splits at `m = a + (b - a) / 2` into
/// `[a, m]` and `[m + 1, b]`. Node 0 is the root.
#[derive(Debug, Clone)]
pub struct DyadicTree {
    n: usize,
    nodes: Vec<TreeNode>,
    leaf_of: Vec<usize>,
}

impl DyadicTree {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(MtfError::EmptySeries);
        }
        let mut nodes = Vec::with_capacity(2 * n - 1);
        let mut leaf_of = vec![usize::MAX; n];
        nodes.push(TreeNode {
            interval: Interval::new_unchecked(1, n),
            depth: 0,
            parent: None,
            children: None,
        });
        let mut stack = vec![0usize];
        while let Some(idx) = stack.pop() {
            let TreeNode {
                interval, depth, ..
            } = nodes[idx];
            let (a, b) = (interval.start, interval.end);
            if a == b {
                leaf_of[a - 1] = idx;
                continue;
            }
            let m = a + (b - a) / 2;
            let left = nodes.len();
            nodes.push(TreeNode {
                interval: Interval::new_unchecked(a, m),
                depth: depth + 1,
                parent: Some(idx),
                children: None,
            });
            let right = nodes.len();
            nodes.push(TreeNode {
                interval: Interval::new_unchecked(m + 1, b),
                depth: depth + 1,
                parent: Some(idx),
                children: None,
            });
            nodes[idx].children = Some((left, right));
            stack.push(right);
            stack.push(left);
        }
        Ok(DyadicTree { n, nodes, leaf_of })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, idx: usize) -> &TreeNode {
        &self.nodes[idx]
    }

    pub fn leaf(&self, i: usize) -> usize {
        self.leaf_of[i - 1]
    }

    pub fn height(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    fn is_left_child(&self, idx: usize) -> bool {
        match self.nodes[idx].parent {
            Some(p) => matches!(self.nodes[p].children, Some((l, _)) if l == idx),
            None => false,
        }
    }

    /// Deepest node containing `pos` whose depth does not exceed `max_depth`.
    fn descend_to(&self, pos: usize, max_depth: usize) -> usize {
        let mut idx = 0;
        while self.nodes[idx].depth < max_depth {
            match self.nodes[idx].children {
                Some((l, r)) => {
                    idx = if self.nodes[l].interval.contains(pos) { l } else { r };
                }
                None => break,
            }
        }
        idx
    }

    /// Node ids whose disjoint union is `interval`, left to right.
    pub fn decompose(&self, interval: &Interval) -> Vec<usize> {
        let mut out = Vec::new();
        self.decompose_into(0, interval, &mut out);
        out
    }

    fn decompose_into(&self, idx: usize, target: &Interval, out: &mut Vec<usize>) {
        let node = &self.nodes[idx];
        if target.contains_interval(&node.interval) {
            out.push(idx);
            return;
        }
        if node.interval.intersection(target).is_none() {
            return;
        }
        if let Some((l, r)) = node.children {
            self.decompose_into(l, target, out);
            self.decompose_into(r, target, out);
        }
    }

    /// Node id whose interval is exactly `interval`, if any.
    pub fn find(&self, interval: &Interval) -> Option<usize> {
        let mut idx = 0;
        loop {
            let node = &self.nodes[idx];
            if node.interval == *interval {
                return Some(idx);
            }
            let (l, r) = node.children?;
            idx = if self.nodes[l].interval.contains_interval(interval) {
                l
            } else if self.nodes[r].interval.contains_interval(interval) {
                r
            } else {
                return None;
            };
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Left,
    Right,
}

/// Endpoint sequence grown from the leaf of `i` towards one end of the series.
///
/// Walking right: a left child hands over to its parent; a right child jumps
/// to the right neighbour (same depth) of its parent. Walking left mirrors
/// both rules. The walk stops once the endpoint reaches `1` or `n`. When the
/// neighbour's branch ends above the parent's depth, the leaf reached on that
/// branch is used.
fn endpoint_walk(tree: &DyadicTree, i: usize, dir: Direction) -> Vec<usize> {
    let n = tree.n;
    let edge = |iv: &Interval| match dir {
        Direction::Right => iv.end,
        Direction::Left => iv.start,
    };
    let stop = match dir {
        Direction::Right => n,
        Direction::Left => 1,
    };
    let mut node = tree.leaf(i);
    let mut out = vec![i];
    while edge(&tree.nodes[node].interval) != stop {
        // Only the root reaches both ends, so a parent exists here.
        let parent = tree.nodes[node]
            .parent
            .expect("non-root node on the walk path");
        let toward_parent = match dir {
            Direction::Right => tree.is_left_child(node),
            Direction::Left => !tree.is_left_child(node),
        };
        node = if toward_parent {
            parent
        } else {
            let p = &tree.nodes[parent];
            let pos = match dir {
                Direction::Right => p.interval.end + 1,
                Direction::Left => p.interval.start - 1,
            };
            tree.descend_to(pos, p.depth)
        };
        out.push(edge(&tree.nodes[node].interval));
    }
    out
}

/// Per-index left/right endpoint sets `L_i`, `R_i`; the dyadified intervals of
/// `i` are all `[l, r]` with `l ∈ L_i`, `r ∈ R_i`.
#[derive(Debug, Clone)]
pub struct DyadifiedFamily {
    n: usize,
    left_ends: Vec<Vec<usize>>,
    right_ends: Vec<Vec<usize>>,
}

pub fn build_dyadified(n: usize) -> Result<DyadifiedFamily> {
    let tree = DyadicTree::new(n)?;
    Ok(DyadifiedFamily::from_tree(&tree))
}

impl DyadifiedFamily {
    pub fn from_tree(tree: &DyadicTree) -> Self {
        let n = tree.n();
        let left_ends = (1..=n)
            .map(|i| endpoint_walk(tree, i, Direction::Left))
            .collect();
        let right_ends = (1..=n)
            .map(|i| endpoint_walk(tree, i, Direction::Right))
            .collect();
        DyadifiedFamily {
            n,
            left_ends,
            right_ends,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `L_i`, strictly decreasing from `i`.
    pub fn left_ends(&self, i: usize) -> &[usize] {
        &self.left_ends[i - 1]
    }

    /// `R_i`, strictly increasing from `i`.
    pub fn right_ends(&self, i: usize) -> &[usize] {
        &self.right_ends[i - 1]
    }

    pub fn family_size(&self, i: usize) -> usize {
        self.left_ends(i).len() * self.right_ends(i).len()
    }

    /// All members of `D_i`, left endpoint major.
    pub fn intervals(&self, i: usize) -> impl Iterator<Item = Interval> + '_ {
        let rights = self.right_ends(i);
        self.left_ends(i)
            .iter()
            .flat_map(move |&l| rights.iter().map(move |&r| Interval::new_unchecked(l, r)))
    }

    pub fn contains(&self, i: usize, interval: &Interval) -> bool {
        i >= 1
            && i <= self.n
            && self.left_ends(i).contains(&interval.start())
            && self.right_ends(i).contains(&interval.end())
    }

    /// Whether some `r ∈ R_i` with `r <= b` reaches at least a fifth of the
    /// way from `i` to `b`.
    pub fn covering_factor_check(&self, i: usize, b: usize) -> bool {
        self.right_ends(i)
            .iter()
            .any(|&r| r <= b && 5 * (r - i) >= b - i)
    }

    /// Mirror image of [`covering_factor_check`](Self::covering_factor_check)
    /// on the left endpoints.
    pub fn left_covering_factor_check(&self, i: usize, a: usize) -> bool {
        self.left_ends(i)
            .iter()
            .any(|&l| l >= a && 5 * (i - l) >= i - a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(a: usize, b: usize) -> Interval {
        Interval::new(a, b).unwrap()
    }

    #[test]
    fn penalty_cases() {
        assert_eq!(penalty_coefficient(&iv(3, 5), &iv(2, 8)).unwrap(), 1);
        assert_eq!(penalty_coefficient(&iv(2, 8), &iv(2, 8)).unwrap(), -1);
        assert_eq!(penalty_coefficient(&iv(2, 5), &iv(2, 8)).unwrap(), 0);
        assert_eq!(penalty_coefficient(&iv(4, 8), &iv(2, 8)).unwrap(), 0);
        assert!(penalty_coefficient(&iv(1, 5), &iv(2, 8)).is_err());
    }

    #[test]
    fn boundary_penalty_cases() {
        assert_eq!(boundary_penalty_coefficient(&iv(6, 8), &iv(4, 8), 8).unwrap(), 1);
        assert_eq!(boundary_penalty_coefficient(&iv(4, 8), &iv(4, 8), 8).unwrap(), -1);
        assert_eq!(boundary_penalty_coefficient(&iv(8, 8), &iv(8, 8), 8).unwrap(), -1);
        assert!(boundary_penalty_coefficient(&iv(4, 7), &iv(4, 8), 8).is_err());
        assert!(boundary_penalty_coefficient(&iv(3, 8), &iv(4, 8), 8).is_err());
    }

    #[test]
    fn distance_to_boundary() {
        assert_eq!(dist_to_boundary(5, &iv(1, 9)).unwrap(), 5);
        assert_eq!(dist_to_boundary(1, &iv(1, 9)).unwrap(), 1);
        assert_eq!(dist_to_boundary(7, &iv(4, 12)).unwrap(), 4);
        assert!(dist_to_boundary(13, &iv(4, 12)).is_err());
    }

    #[test]
    fn rejects_bad_intervals() {
        assert!(Interval::new(0, 3).is_err());
        assert!(Interval::new(4, 3).is_err());
        assert!(iv(2, 9).check_within(8).is_err());
    }

    #[test]
    fn coefficient_is_minus_one_only_on_equality() {
        for n in 1..=64usize {
            for a in 1..=n {
                for b in a..=n {
                    let outer = iv(a, b);
                    for c in a..=b {
                        for d in c..=b {
                            let inner = iv(c, d);
                            let k = penalty_coefficient(&inner, &outer).unwrap();
                            assert_eq!(k == -1, inner == outer);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn small_families() {
        let fam = build_dyadified(8).unwrap();
        assert_eq!(fam.right_ends(1), &[1, 2, 4, 8]);
        assert_eq!(fam.left_ends(1), &[1]);
        assert_eq!(fam.right_ends(3), &[3, 4, 8]);
        assert_eq!(fam.left_ends(3), &[3, 1]);

        let one = build_dyadified(1).unwrap();
        assert_eq!(one.right_ends(1), &[1]);
        assert_eq!(one.left_ends(1), &[1]);
    }

    #[test]
    fn covering_examples() {
        let fam = build_dyadified(8).unwrap();
        assert!(fam.covering_factor_check(1, 8));
        assert!(fam.covering_factor_check(3, 3));
        assert!(fam.covering_factor_check(3, 7));
    }

    #[test]
    fn tree_shape_for_odd_length() {
        let tree = DyadicTree::new(7).unwrap();
        let root = tree.node(0);
        let (l, r) = root.children.unwrap();
        assert_eq!(tree.node(l).interval, iv(1, 4));
        assert_eq!(tree.node(r).interval, iv(5, 7));
        assert_eq!(tree.nodes().len(), 13);
        for i in 1..=7 {
            assert_eq!(tree.node(tree.leaf(i)).interval, iv(i, i));
        }
    }

    #[test]
    fn decomposition_covers_exactly() {
        let tree = DyadicTree::new(37).unwrap();
        for a in 1..=37 {
            for b in a..=37 {
                let parts = tree.decompose(&iv(a, b));
                let mut next = a;
                for p in &parts {
                    let node = tree.node(*p).interval;
                    assert_eq!(node.start(), next);
                    next = node.end() + 1;
                }
                assert_eq!(next, b + 1);
                assert!(parts.len() <= 2 * (tree.height() + 1));
            }
        }
    }

    #[test]
    fn family_membership() {
        let fam = build_dyadified(8).unwrap();
        assert!(fam.contains(3, &iv(1, 8)));
        assert!(fam.contains(3, &iv(3, 4)));
        assert!(!fam.contains(3, &iv(2, 4)));
        assert_eq!(fam.intervals(3).count(), fam.family_size(3));
    }
}
