use std::collections::HashMap;

use super::{merge_votes, pair_direction, resolve_cycles, Constraint, MergedTable, OrderingError};
use crate::bdd::VariableOrder;
use crate::features::{triplet_features, FeatureExtractor, FeatureSchema, FeatureVector};
use crate::learning::{DecisionTree, TreeKind};
use crate::model::VarId;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum CycleMode {
    /// Remove every cycle before ordering starts.
    Upfront,
    /// Remove cycles among unordered variables only when ordering stalls.
    #[default]
    OnDemand,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PpoOutcome {
    pub order: VariableOrder,
    /// Constraints in force at the end; the order honours all of them.
    pub kept: Vec<Constraint>,
    pub dropped: Vec<Constraint>,
}

/// Narrows the minimal candidates given the variables ordered so far.
type CandidateFilter<'a> = dyn FnMut(&[VarId], Vec<VarId>) -> Vec<VarId> + 'a;

struct Graph {
    edges: Vec<Constraint>,
    alive: Vec<bool>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
}

impl Graph {
    fn new(n: usize, edges: Vec<Constraint>) -> Self {
        let mut succ = vec![Vec::new(); n];
        let mut pred = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            succ[e.before].push(i);
            pred[e.after].push(i);
        }
        Self {
            alive: vec![true; edges.len()],
            edges,
            succ,
            pred,
        }
    }

    fn live_succ(&self, v: VarId) -> impl Iterator<Item = VarId> + '_ {
        self.succ[v].iter().filter(|&&i| self.alive[i]).map(|&i| self.edges[i].after)
    }

    fn live_pred(&self, v: VarId) -> impl Iterator<Item = VarId> + '_ {
        self.pred[v].iter().filter(|&&i| self.alive[i]).map(|&i| self.edges[i].before)
    }

    fn live_neighbours(&self, v: VarId) -> impl Iterator<Item = VarId> + '_ {
        self.live_succ(v).chain(self.live_pred(v))
    }

    /// Greedy resolution restricted to live edges whose endpoints both
    /// satisfy `scope`; returns the edges removed.
    fn resolve(&mut self, n: usize, scope: impl Fn(VarId) -> bool) -> Vec<Constraint> {
        let idx: Vec<usize> = (0..self.edges.len())
            .filter(|&i| self.alive[i] && scope(self.edges[i].before) && scope(self.edges[i].after))
            .collect();
        let subset: Vec<Constraint> = idx.iter().map(|&i| self.edges[i]).collect();
        let r = resolve_cycles(n, &subset);
        for d in &r.dropped {
            let pos = subset.iter().position(|e| e == d).expect("dropped edge came from the subset");
            self.alive[idx[pos]] = false;
        }
        r.dropped
    }
}

/// Pair-precedence ordering over `merged`, breaking choices by fan-out.
pub fn ppo(merged: &MergedTable, fanout: &[usize], mode: CycleMode) -> PpoOutcome {
    run(merged, fanout, mode, &mut |_, c| c)
}

/// [`ppo`] with the candidate set narrowed by context precedence before
/// each fan-out choice.
pub fn ppo_cpf(
    merged: &MergedTable,
    fanout: &[usize],
    trees: &[DecisionTree],
    fx: &FeatureExtractor<'_>,
    mode: CycleMode,
) -> Result<PpoOutcome, OrderingError> {
    let mut cache = ContextCache::new(trees, fx)?;
    Ok(run(merged, fanout, mode, &mut |ordered, cands| cache.filter(ordered, cands)))
}

fn pick(cands: &[VarId], fanout: &[usize]) -> VarId {
    *cands
        .iter()
        .min_by_key(|&&v| (std::cmp::Reverse(fanout[v]), v))
        .expect("nonempty candidate set")
}

fn run(
    merged: &MergedTable,
    fanout: &[usize],
    mode: CycleMode,
    filter: &mut CandidateFilter<'_>,
) -> PpoOutcome {
    let n = merged.num_vars();
    assert_eq!(fanout.len(), n, "fan-out map covers every variable");
    let mut g = Graph::new(n, merged.constraints());
    let mut dropped = Vec::new();
    if mode == CycleMode::Upfront {
        dropped.extend(g.resolve(n, |_| true));
    }

    let mut ordered = vec![false; n];
    let mut order: Vec<VarId> = Vec::with_capacity(n);
    while order.len() < n {
        let minimal = |g: &Graph, ordered: &[bool]| -> Vec<VarId> {
            (0..n)
                .filter(|&v| !ordered[v] && g.live_pred(v).all(|u| ordered[u]))
                .collect()
        };
        let mut cands = minimal(&g, &ordered);
        if cands.is_empty() {
            let snapshot = ordered.clone();
            dropped.extend(g.resolve(n, |v| !snapshot[v]));
            cands = minimal(&g, &ordered);
            debug_assert!(!cands.is_empty(), "resolution leaves a minimal variable");
        }
        let cands = filter(&order, cands);
        let v_add = pick(&cands, fanout);
        ordered[v_add] = true;
        order.push(v_add);

        // unordered transitive successors of v_add
        let mut in_s = vec![false; n];
        let mut stack = vec![v_add];
        while let Some(x) = stack.pop() {
            for y in g.live_succ(x) {
                if !ordered[y] && !in_s[y] {
                    in_s[y] = true;
                    stack.push(y);
                }
            }
        }
        loop {
            let eligible: Vec<VarId> = (0..n)
                .filter(|&s| {
                    in_s[s]
                        && !ordered[s]
                        && g.live_pred(s).all(|u| ordered[u])
                        && g.live_neighbours(s).all(|x| ordered[x] || in_s[x])
                })
                .collect();
            if eligible.is_empty() {
                break;
            }
            let s = pick(&eligible, fanout);
            ordered[s] = true;
            order.push(s);
        }
    }
    let kept = g
        .edges
        .iter()
        .zip(&g.alive)
        .filter(|(_, &a)| a)
        .map(|(e, _)| *e)
        .collect();
    PpoOutcome {
        order: VariableOrder::new(order, n).expect("each variable placed once"),
        kept,
        dropped,
    }
}

/// Memoized context-precedence answers merged across triplet classifiers.
pub struct ContextCache<'t, 'f, 'g> {
    trees: &'t [DecisionTree],
    fx: &'f FeatureExtractor<'g>,
    schema: FeatureSchema,
    pair_vectors: HashMap<(VarId, VarId), FeatureVector>,
    answers: HashMap<(VarId, VarId, VarId), Option<(VarId, VarId)>>,
}

impl<'t, 'f, 'g> ContextCache<'t, 'f, 'g> {
    pub fn new(trees: &'t [DecisionTree], fx: &'f FeatureExtractor<'g>) -> Result<Self, OrderingError> {
        if let Some(t) = trees.iter().find(|t| t.kind() != TreeKind::Triplet) {
            return Err(OrderingError::WrongKind {
                expected: "triplet",
                got: t.kind().name(),
            });
        }
        Ok(Self {
            trees,
            fx,
            schema: FeatureSchema::triplet(),
            pair_vectors: HashMap::new(),
            answers: HashMap::new(),
        })
    }

    fn pv(&mut self, a: VarId, b: VarId) -> FeatureVector {
        let fx = self.fx;
        *self.pair_vectors.entry((a, b)).or_insert_with(|| fx.pair_features(a, b))
    }

    /// `(before, after)` for `vj`, `vk` given that `c` precedes both, or
    /// `None` when unknown. Only contexts forming an interacting pair with
    /// both variables are put to the classifiers.
    pub fn query(&mut self, c: VarId, vj: VarId, vk: VarId) -> Option<(VarId, VarId)> {
        assert!(c != vj && c != vk && vj != vk, "context query needs three distinct variables");
        let (lo, hi) = (vj.min(vk), vj.max(vk));
        if let Some(&a) = self.answers.get(&(c, lo, hi)) {
            return a;
        }
        // outside the triplet universe the classifiers have no evidence
        if !(self.fx.is_interacting_pair(c, lo) && self.fx.is_interacting_pair(c, hi)) {
            self.answers.insert((c, lo, hi), None);
            return None;
        }
        let p_lo = self.pv(c, lo);
        let p_hi = self.pv(c, hi);
        let t_lo_hi = triplet_features(&p_lo, &p_hi, &self.schema).expect("subtraction schema");
        let t_hi_lo = triplet_features(&p_hi, &p_lo, &self.schema).expect("subtraction schema");
        let votes: Vec<(bool, f64)> = self
            .trees
            .iter()
            .filter_map(|t| {
                let (a, ka) = t.classify(&t_lo_hi).expect("schema length");
                let (b, kb) = t.classify(&t_hi_lo).expect("schema length");
                pair_direction(a, b).map(|lo_first| (lo_first, (ka + kb) / 2.0))
            })
            .collect();
        let answer = merge_votes(&votes).map(|(lo_first, _)| if lo_first { (lo, hi) } else { (hi, lo) });
        self.answers.insert((c, lo, hi), answer);
        answer
    }

    /// Removes candidates that some ordered context places after another
    /// candidate, most recent context first, until nothing changes. At
    /// least one candidate always survives.
    pub fn filter(&mut self, ordered: &[VarId], mut cands: Vec<VarId>) -> Vec<VarId> {
        if self.trees.is_empty() {
            return cands;
        }
        'restart: while cands.len() > 1 {
            for &c in ordered.iter().rev() {
                for i in 0..cands.len() {
                    for j in i + 1..cands.len() {
                        if let Some((_, after)) = self.query(c, cands[i], cands[j]) {
                            cands.retain(|&x| x != after);
                            continue 'restart;
                        }
                    }
                }
            }
            break;
        }
        cands
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::{Class, TreeNode};
    use crate::model::build_connectivity_graph;
    use crate::model::tests::counter;

    fn c(before: VarId, after: VarId, confidence: f64) -> Constraint {
        Constraint {
            before,
            after,
            confidence,
        }
    }

    #[test]
    fn hand_traced_example() {
        // a=0, b=1, c=2
        let m = MergedTable::from_constraints(3, &[c(0, 1, 0.9), c(0, 2, 0.5)]);
        let out = ppo(&m, &[2, 3, 1], CycleMode::OnDemand);
        assert_eq!(out.order.as_slice(), &[0, 1, 2]);
    }

    #[test]
    fn empty_table_is_fan_out_order() {
        let m = MergedTable::empty(4);
        let out = ppo(&m, &[1, 4, 4, 2], CycleMode::Upfront);
        assert_eq!(out.order.as_slice(), &[1, 2, 3, 0]);
    }

    #[test]
    fn cycles_resolved_on_demand() {
        let m = MergedTable::from_constraints(3, &[c(0, 1, 0.9), c(1, 2, 0.8), c(2, 0, 0.7)]);
        for mode in [CycleMode::Upfront, CycleMode::OnDemand] {
            let out = ppo(&m, &[1, 1, 1], mode);
            assert_eq!(out.dropped, vec![c(2, 0, 0.7)]);
            let pos = out.order.positions();
            assert!(out.kept.iter().all(|k| pos[k.before] < pos[k.after]));
        }
    }

    #[test]
    fn successors_follow_v_add() {
        // 0 -> 1 with 2 unconstrained but of higher fan-out than 1
        let m = MergedTable::from_constraints(3, &[c(0, 1, 0.9)]);
        let out = ppo(&m, &[5, 0, 3], CycleMode::OnDemand);
        assert_eq!(out.order.as_slice(), &[0, 1, 2]);
    }

    /// A triplet tree answering `+` when component 0 is at most 0 and `-`
    /// otherwise.
    fn threshold_tree() -> DecisionTree {
        DecisionTree::from_parts(
            TreeKind::Triplet,
            FeatureSchema::triplet(),
            vec![
                TreeNode::Split {
                    component: 0,
                    threshold: 0.0,
                    left: 1,
                    right: 2,
                },
                TreeNode::Leaf {
                    class: Class::Plus,
                    confidence: 1.0,
                },
                TreeNode::Leaf {
                    class: Class::Minus,
                    confidence: 1.0,
                },
            ],
            0,
        )
    }

    #[test]
    fn no_trees_behaves_like_ppo() {
        let m = counter();
        let g = build_connectivity_graph(&m);
        let fx = FeatureExtractor::new(&m, &g);
        let merged = MergedTable::empty(3);
        let fan: Vec<usize> = (0..3).map(|v| g.fan_out(v)).collect();
        let a = ppo(&merged, &fan, CycleMode::OnDemand);
        let b = ppo_cpf(&merged, &fan, &[], &fx, CycleMode::OnDemand).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn context_answers_are_memoized_and_filter_keeps_one() {
        let m = counter();
        let g = build_connectivity_graph(&m);
        let fx = FeatureExtractor::new(&m, &g);
        let trees = [threshold_tree()];
        let mut cache = ContextCache::new(&trees, &fx).unwrap();
        let first = cache.query(0, 1, 2);
        assert_eq!(cache.query(0, 2, 1), first);
        let kept = cache.filter(&[0], vec![1, 2]);
        assert_eq!(kept.len(), if first.is_some() { 1 } else { 2 });
        assert!(ContextCache::new(&[DecisionTree::leaf(TreeKind::Pair, Class::Plus, 1.0)], &fx).is_err());
    }
}
