//! Dyadic minmax trend filtering.
//!
//! The outer and inner optimizations run over the dyadified family `D_i`
//! only. Normal equations for every node of the dyadic tree are built bottom
//! up by merging children, and each member of `D_i` is assembled from
//! `O(log n)` node contributions.

use rayon::prelude::*;

use crate::error::{MtfError, Result};
use crate::boundary::BoundaryFit;
use crate::estimator::{check_inputs, product_minmax, FitBand, FitConfig, PointRule, Variant};
use crate::interval::{DyadicTree, DyadifiedFamily, Interval};
use crate::polyfit::{GramSystem, IntervalMoments, LocalFit, LocalFrame};

/// Per-node normal equations of the dyadic tree.
///
/// Node moments live in the node's own local frame; a parent's moments are
/// the sum of its children's after moving them into the parent frame.
#[derive(Debug, Clone)]
pub struct TreeGramCache {
    tree: DyadicTree,
    degree: usize,
    moments: Vec<IntervalMoments>,
    fits: Vec<LocalFit>,
}

pub fn build_tree_cache(y: &[f64], degree: usize) -> Result<TreeGramCache> {
    let tree = DyadicTree::new(y.len())?;
    Ok(TreeGramCache::with_tree(tree, y, degree))
}

impl TreeGramCache {
    pub fn with_tree(tree: DyadicTree, y: &[f64], degree: usize) -> Self {
        let count = tree.nodes().len();
        let mut moments: Vec<Option<IntervalMoments>> = vec![None; count];
        // Children always have larger ids than their parent.
        for idx in (0..count).rev() {
            let node = tree.node(idx);
            let frame = LocalFrame::for_interval(&node.interval);
            let m = match node.children {
                None => IntervalMoments::from_samples(y, &node.interval, degree, frame),
                Some((l, r)) => {
                    let mut acc = IntervalMoments::zeros(frame, degree);
                    acc.add_recentered(moments[l].as_ref().expect("child built first"));
                    acc.add_recentered(moments[r].as_ref().expect("child built first"));
                    acc
                }
            };
            moments[idx] = Some(m);
        }
        let moments: Vec<IntervalMoments> = moments.into_iter().map(Option::unwrap).collect();
        let fits = moments
            .iter()
            .zip(tree.nodes())
            .map(|(m, node)| GramSystem::from_moments(node.interval, m).solve())
            .collect();
        TreeGramCache {
            tree,
            degree,
            moments,
            fits,
        }
    }

    pub fn tree(&self) -> &DyadicTree {
        &self.tree
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn node_moments(&self, idx: usize) -> &IntervalMoments {
        &self.moments[idx]
    }

    pub fn node_gram(&self, idx: usize) -> GramSystem {
        GramSystem::from_moments(self.tree.node(idx).interval, &self.moments[idx])
    }

    pub fn node_fit(&self, idx: usize) -> &LocalFit {
        &self.fits[idx]
    }

    /// Moments of an arbitrary interval in its own local frame, summed over
    /// its canonical node decomposition.
    pub fn interval_moments(&self, interval: &Interval) -> IntervalMoments {
        self.sum_into(interval, LocalFrame::for_interval(interval))
    }

    fn sum_into(&self, interval: &Interval, frame: LocalFrame) -> IntervalMoments {
        let mut acc = IntervalMoments::zeros(frame, self.degree);
        for idx in self.tree.decompose(interval) {
            acc.add_recentered(&self.moments[idx]);
        }
        acc
    }

    pub fn gram_system(&self, interval: &Interval) -> GramSystem {
        GramSystem::from_moments(*interval, &self.interval_moments(interval))
    }

    pub fn fit(&self, interval: &Interval) -> LocalFit {
        match self.tree.find(interval) {
            Some(idx) => self.fits[idx].clone(),
            None => self.gram_system(interval).solve(),
        }
    }
}

/// Normal equations of `[left, right] ∈ D_i`, merged from the pieces between
/// consecutive endpoints of `L_i` and `R_i`.
pub fn assemble_interval_system(
    i: usize,
    left: usize,
    right: usize,
    cache: &TreeGramCache,
    family: &DyadifiedFamily,
) -> Result<GramSystem> {
    let target = Interval::new(left, right)?;
    if i == 0 || i > family.n() || !family.contains(i, &target) {
        return Err(MtfError::NotInFamily {
            index: i,
            interval: target,
        });
    }
    let frame = LocalFrame::for_interval(&target);
    let mut acc = IntervalMoments::zeros(frame, cache.degree());
    let rights = family.right_ends(i);
    let mut prev = i - 1;
    for &r in rights.iter().take_while(|&&r| r <= right) {
        acc.add_recentered(&cache.sum_into(&Interval::new_unchecked(prev + 1, r), frame));
        prev = r;
    }
    let lefts = family.left_ends(i);
    let mut prev = i;
    for &l in lefts.iter().skip(1).take_while(|&&l| l >= left) {
        acc.add_recentered(&cache.sum_into(&Interval::new_unchecked(l, prev - 1), frame));
        prev = l;
    }
    Ok(GramSystem::from_moments(target, &acc))
}

/// Fitted values `(P y_I)_i` for every `I ∈ D_i`, precomputed once so that
/// the band can be evaluated for many penalties.
#[derive(Debug, Clone)]
pub struct DyadicProblem {
    family: DyadifiedFamily,
    degree: usize,
    /// Per index, row-major over `(k, j)` for `[L_i[k], R_i[j]]`.
    fitted: Vec<Vec<f64>>,
}

impl DyadicProblem {
    pub fn new(y: &[f64], degree: usize) -> Result<Self> {
        if y.is_empty() {
            return Err(MtfError::EmptySeries);
        }
        let tree = DyadicTree::new(y.len())?;
        let family = DyadifiedFamily::from_tree(&tree);
        let cache = TreeGramCache::with_tree(tree, y, degree);
        let fitted = (1..=y.len())
            .into_par_iter()
            .map(|i| index_table(i, y, &cache, &family))
            .collect();
        Ok(DyadicProblem {
            family,
            degree,
            fitted,
        })
    }

    pub fn n(&self) -> usize {
        self.family.n()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn family(&self) -> &DyadifiedFamily {
        &self.family
    }

    /// Fitted values at `i`, row-major over `(L_i, R_i)`.
    pub fn fitted(&self, i: usize) -> &[f64] {
        &self.fitted[i - 1]
    }

    pub fn upper_at(&self, i: usize, lambda: f64) -> f64 {
        product_minmax(
            self.fitted(i),
            self.family.left_ends(i),
            self.family.right_ends(i),
            lambda,
            1.0,
        )
    }

    pub fn lower_at(&self, i: usize, lambda: f64) -> f64 {
        -product_minmax(
            self.fitted(i),
            self.family.left_ends(i),
            self.family.right_ends(i),
            lambda,
            -1.0,
        )
    }

    pub fn band(&self, lambda: f64, rule: PointRule) -> FitBand {
        let (lower, upper): (Vec<f64>, Vec<f64>) = (1..=self.n())
            .into_par_iter()
            .map(|i| (self.lower_at(i, lambda), self.upper_at(i, lambda)))
            .unzip();
        FitBand::from_bounds(lower, upper, rule)
    }

    /// Last-point estimator over `D_n = {[l, n] : l ∈ L_n}`.
    pub fn boundary_right(&self, lambda: f64, rule: PointRule) -> BoundaryFit {
        let n = self.n();
        let lens: Vec<usize> = self.family.left_ends(n).iter().map(|l| n - l + 1).collect();
        let values = self.fitted(n);
        BoundaryFit::from_values(values, &lens, lambda, rule)
    }

    /// First-point estimator over `D_1 = {[1, r] : r ∈ R_1}`.
    pub fn boundary_left(&self, lambda: f64, rule: PointRule) -> BoundaryFit {
        let lens: Vec<usize> = self.family.right_ends(1).to_vec();
        BoundaryFit::from_values(self.fitted(1), &lens, lambda, rule)
    }
}

fn index_table(i: usize, y: &[f64], cache: &TreeGramCache, family: &DyadifiedFamily) -> Vec<f64> {
    let lefts = family.left_ends(i);
    let rights = family.right_ends(i);
    let degree = cache.degree();

    // [i, r_j] grown piece by piece, each kept in its own frame.
    let mut right_acc: Vec<IntervalMoments> = Vec::with_capacity(rights.len());
    let mut prev = i - 1;
    for &r in rights {
        let iv = Interval::new_unchecked(i, r);
        let frame = LocalFrame::for_interval(&iv);
        let mut acc = match right_acc.last() {
            Some(m) => m.recentered(frame),
            None => IntervalMoments::zeros(frame, degree),
        };
        acc.add_recentered(&cache.sum_into(&Interval::new_unchecked(prev + 1, r), frame));
        right_acc.push(acc);
        prev = r;
    }
    // [l_k, i - 1] for k >= 1.
    let mut left_acc: Vec<IntervalMoments> = Vec::with_capacity(lefts.len().saturating_sub(1));
    let mut prev = i;
    for &l in lefts.iter().skip(1) {
        let iv = Interval::new_unchecked(l, i - 1);
        let frame = LocalFrame::for_interval(&iv);
        let mut acc = match left_acc.last() {
            Some(m) => m.recentered(frame),
            None => IntervalMoments::zeros(frame, degree),
        };
        acc.add_recentered(&cache.sum_into(&Interval::new_unchecked(l, prev - 1), frame));
        left_acc.push(acc);
        prev = l;
    }

    let mut out = Vec::with_capacity(lefts.len() * rights.len());
    for (k, &l) in lefts.iter().enumerate() {
        for (j, &r) in rights.iter().enumerate() {
            let iv = Interval::new_unchecked(l, r);
            let value = if iv.len() <= degree + 1 {
                y[i - 1]
            } else {
                let frame = LocalFrame::for_interval(&iv);
                let mut m = right_acc[j].recentered(frame);
                if k > 0 {
                    m.add_recentered(&left_acc[k - 1]);
                }
                GramSystem::from_moments(iv, &m).solve().value_at(i, y)
            };
            out.push(value);
        }
    }
    out
}

/// Dyadic band at every index.
pub fn fit_dyadic(y: &[f64], config: &FitConfig) -> Result<FitBand> {
    check_inputs(y, config)?;
    if !matches!(config.variant, Variant::Dyadic | Variant::BoundaryDyadic) {
        return Err(MtfError::invalid("fit_dyadic needs a dyadic variant"));
    }
    let problem = DyadicProblem::new(y, config.degree)?;
    let mut band = problem.band(config.penalty, config.point_rule);
    if config.variant == Variant::BoundaryDyadic {
        band.set_endpoint(1, &problem.boundary_left(config.penalty, config.point_rule));
        band.set_endpoint(y.len(), &problem.boundary_right(config.penalty, config.point_rule));
    }
    Ok(band)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyfit::build_moments;
    use approx::assert_relative_eq;

    fn wiggly(n: usize) -> Vec<f64> {
        (1..=n)
            .map(|t| {
                let x = t as f64 / n as f64;
                (7.0 * x).sin() + 0.3 * (31.0 * x).cos()
            })
            .collect()
    }

    #[test]
    fn degree_zero_nodes_hold_counts_and_sums() {
        let y = wiggly(13);
        let cache = build_tree_cache(&y, 0).unwrap();
        for (idx, node) in cache.tree().nodes().iter().enumerate() {
            let sys = cache.node_gram(idx);
            assert_eq!(sys.gram[0], node.interval.len() as f64);
            let sum: f64 = y[node.interval.range()].iter().sum();
            assert_relative_eq!(sys.moment[0], sum, epsilon = 1e-12);
        }
    }

    #[test]
    fn leaves_are_unit_grams() {
        let y = wiggly(8);
        let cache = build_tree_cache(&y, 0).unwrap();
        for i in 1..=8 {
            let sys = cache.node_gram(cache.tree().leaf(i));
            assert_eq!(sys.gram, vec![1.0]);
            assert_eq!(sys.moment, vec![y[i - 1]]);
        }
    }

    #[test]
    fn root_matches_prefix_sums() {
        for &(n, r) in &[(64usize, 2usize), (100, 3), (37, 1)] {
            let y = wiggly(n);
            let cache = build_tree_cache(&y, r).unwrap();
            let root = cache.node_moments(0).recentered(LocalFrame::global(n));
            let acc = build_moments(&y, r).unwrap();
            let global = acc.interval_moments(&Interval::full(n).unwrap()).unwrap();
            for (a, b) in root.power_sums().iter().zip(global.power_sums()) {
                assert_relative_eq!(a, b, max_relative = 1e-10);
            }
            for (a, b) in root.response_sums().iter().zip(global.response_sums()) {
                assert_relative_eq!(a, b, epsilon = 1e-10, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn assembled_singleton_and_root() {
        let y = wiggly(16);
        let cache = build_tree_cache(&y, 2).unwrap();
        let fam = DyadifiedFamily::from_tree(cache.tree());
        let s = assemble_interval_system(5, 5, 5, &cache, &fam).unwrap();
        assert_relative_eq!(s.gram[0], 1.0);
        assert_relative_eq!(s.moment[0], y[4]);
        let root = assemble_interval_system(1, 1, 16, &cache, &fam).unwrap();
        let direct = GramSystem::direct(&y, &Interval::full(16).unwrap(), 2);
        for (a, b) in root.gram.iter().zip(&direct.gram) {
            assert_relative_eq!(a, b, epsilon = 1e-10, max_relative = 1e-10);
        }
        assert!(assemble_interval_system(3, 2, 4, &cache, &fam).is_err());
    }

    #[test]
    fn zero_penalty_collapses_to_data() {
        let y = wiggly(50);
        let p = DyadicProblem::new(&y, 2).unwrap();
        let band = p.band(0.0, PointRule::Midpoint);
        for i in 0..50 {
            assert_relative_eq!(band.lower[i], y[i], epsilon = 1e-12);
            assert_relative_eq!(band.upper[i], y[i], epsilon = 1e-12);
        }
    }
}
