//! From classifiers to a total order: per-classifier precedence tables,
//! vote merging, greedy cycle removal, and the pair-precedence ordering
//! loop with optional context filtering.

mod cycles;
mod ppo;

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

pub use cycles::{resolve_cycles, Resolution};
pub use ppo::{ppo, ppo_cpf, ContextCache, CycleMode, PpoOutcome};

use crate::features::FeatureExtractor;
use crate::learning::{Class, DecisionTree, TreeKind};
use crate::model::{build_connectivity_graph, Model, VarId};

/// Resolved directions carry at least this much confidence after merging.
pub const CONFIDENCE_FLOOR: f64 = 0.1;

/// `before` should precede `after`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constraint {
    pub before: VarId,
    pub after: VarId,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrderingError {
    #[error("expected a {expected} classifier, got a {got} classifier")]
    WrongKind { expected: &'static str, got: &'static str },
    #[error("tables cover different variable sets")]
    VariableSetMismatch,
    #[error("no tables to merge")]
    NoTables,
}

/// Combines the answers to "should i precede j?" and "should j precede i?".
/// Only a Yes/No disagreement-free pair yields a direction: `Some(true)`
/// for `i` first, `Some(false)` for `j` first.
pub fn pair_direction(i_before_j: Class, j_before_i: Class) -> Option<bool> {
    match (i_before_j, j_before_i) {
        (Class::Plus, Class::Minus) => Some(true),
        (Class::Minus, Class::Plus) => Some(false),
        _ => None,
    }
}

/// One classifier's view of every queried pair. Keys are `(u, w)` with
/// `u < w`; `None` records an unknown relation.
#[derive(Clone, Debug, PartialEq)]
pub struct PrecedenceTable {
    num_vars: usize,
    entries: BTreeMap<(VarId, VarId), Option<Constraint>>,
}

impl PrecedenceTable {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            entries: BTreeMap::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn insert(&mut self, a: VarId, b: VarId, relation: Option<Constraint>) {
        let key = if a < b { (a, b) } else { (b, a) };
        self.entries.insert(key, relation);
    }

    pub fn get(&self, a: VarId, b: VarId) -> Option<Option<Constraint>> {
        let key = if a < b { (a, b) } else { (b, a) };
        self.entries.get(&key).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = ((VarId, VarId), Option<Constraint>)> + '_ {
        self.entries.iter().map(|(k, v)| (*k, *v))
    }
}

/// Classifies both orientations of each pair and resolves them with [`pair_direction`].
/// A resolved direction's confidence is the mean of the two leaf confidences.
pub fn build_pair_table(
    tree: &DecisionTree,
    pairs: &[(VarId, VarId)],
    fx: &FeatureExtractor<'_>,
) -> Result<PrecedenceTable, OrderingError> {
    if tree.kind() != TreeKind::Pair {
        return Err(OrderingError::WrongKind {
            expected: "pair",
            got: tree.kind().name(),
        });
    }
    let answers: Vec<_> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let (c_ab, k_ab) = tree.classify(&fx.pair_features(a, b)).expect("schema length checked");
            let (c_ba, k_ba) = tree.classify(&fx.pair_features(b, a)).expect("schema length checked");
            let rel = pair_direction(c_ab, c_ba).map(|a_first| {
                let (before, after) = if a_first { (a, b) } else { (b, a) };
                Constraint {
                    before,
                    after,
                    confidence: (k_ab + k_ba) / 2.0,
                }
            });
            (a, b, rel)
        })
        .collect();
    let mut t = PrecedenceTable::new(fx.num_vars());
    for (a, b, rel) in answers {
        t.insert(a, b, rel);
    }
    Ok(t)
}

/// Majority vote over directed answers about one pair `(u, w)`, `u < w`.
/// `votes` holds `(u_first, confidence)`; unknown answers are omitted.
/// Returns `(u_first, merged confidence)` for a strict majority.
pub fn merge_votes(votes: &[(bool, f64)]) -> Option<(bool, f64)> {
    let (mut n_u, mut n_w, mut c_u, mut c_w) = (0usize, 0usize, 0.0, 0.0);
    for &(u_first, c) in votes {
        if u_first {
            n_u += 1;
            c_u += c;
        } else {
            n_w += 1;
            c_w += c;
        }
    }
    if n_u == n_w {
        return None;
    }
    let (u_first, win, lose) = if n_u > n_w { (true, c_u, c_w) } else { (false, c_w, c_u) };
    let conf = ((win - lose) / (n_u + n_w) as f64).max(CONFIDENCE_FLOOR);
    Some((u_first, conf))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MergedEntry {
    pub relation: Option<Constraint>,
    /// Tables voting for the lower-index variable first.
    pub votes_low_first: usize,
    pub votes_high_first: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MergedTable {
    num_vars: usize,
    entries: BTreeMap<(VarId, VarId), MergedEntry>,
}

impl MergedTable {
    pub fn empty(num_vars: usize) -> Self {
        Self {
            num_vars,
            entries: BTreeMap::new(),
        }
    }

    /// A table holding exactly `constraints`, one per unordered pair.
    pub fn from_constraints(num_vars: usize, constraints: &[Constraint]) -> Self {
        let mut t = Self::empty(num_vars);
        for c in constraints {
            let key = (c.before.min(c.after), c.before.max(c.after));
            let low_first = c.before < c.after;
            t.entries.insert(
                key,
                MergedEntry {
                    relation: Some(*c),
                    votes_low_first: low_first as usize,
                    votes_high_first: (!low_first) as usize,
                },
            );
        }
        t
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn get(&self, a: VarId, b: VarId) -> Option<&MergedEntry> {
        self.entries.get(&(a.min(b), a.max(b)))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(VarId, VarId), &MergedEntry)> {
        self.entries.iter()
    }

    /// Known relations as directed edges, in key order.
    pub fn constraints(&self) -> Vec<Constraint> {
        self.entries.values().filter_map(|e| e.relation).collect()
    }
}

pub fn merge_tables(tables: &[PrecedenceTable]) -> Result<MergedTable, OrderingError> {
    let first = tables.first().ok_or(OrderingError::NoTables)?;
    if tables.iter().any(|t| t.num_vars != first.num_vars) {
        return Err(OrderingError::VariableSetMismatch);
    }
    let mut votes: BTreeMap<(VarId, VarId), Vec<(bool, f64)>> = BTreeMap::new();
    for t in tables {
        for (key, rel) in t.entries() {
            let v = votes.entry(key).or_default();
            if let Some(c) = rel {
                v.push((c.before == key.0, c.confidence));
            }
        }
    }
    let mut merged = MergedTable::empty(first.num_vars);
    for (key, v) in votes {
        let relation = merge_votes(&v).map(|(low_first, confidence)| {
            let (before, after) = if low_first { key } else { (key.1, key.0) };
            Constraint {
                before,
                after,
                confidence,
            }
        });
        merged.entries.insert(
            key,
            MergedEntry {
                relation,
                votes_low_first: v.iter().filter(|x| x.0).count(),
                votes_high_first: v.iter().filter(|x| !x.0).count(),
            },
        );
    }
    Ok(merged)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Ppo,
    PpoCpf,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ppo => "ppo",
            Algorithm::PpoCpf => "ppo-cpf",
        }
    }
}

/// Full ordering pipeline for `m`: one table per pair tree, merged, then
/// PPO or PPO^CPF with fan-out taken from the connectivity graph.
pub fn order_model(
    m: &Model,
    pair_trees: &[DecisionTree],
    triplet_trees: &[DecisionTree],
    algo: Algorithm,
    mode: CycleMode,
) -> Result<(PpoOutcome, MergedTable), OrderingError> {
    let g = build_connectivity_graph(m);
    let fx = FeatureExtractor::new(m, &g);
    let pairs: Vec<(VarId, VarId)> = m.interacting_pairs().into_iter().collect();
    let tables = pair_trees
        .iter()
        .map(|t| build_pair_table(t, &pairs, &fx))
        .collect::<Result<Vec<_>, _>>()?;
    let merged = merge_tables(&tables)?;
    let fanout: Vec<usize> = (0..m.num_vars()).map(|v| g.fan_out(v)).collect();
    let out = match algo {
        Algorithm::Ppo => ppo(&merged, &fanout, mode),
        Algorithm::PpoCpf => ppo_cpf(&merged, &fanout, triplet_trees, &fx, mode)?,
    };
    Ok((out, merged))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(before: VarId, after: VarId, confidence: f64) -> Option<Constraint> {
        Some(Constraint {
            before,
            after,
            confidence,
        })
    }

    #[test]
    fn pair_direction_rows() {
        use Class::*;
        let rows = [
            (Minus, Minus, None),
            (Minus, Plus, Some(false)),
            (Minus, Unknown, None),
            (Plus, Minus, Some(true)),
            (Plus, Plus, None),
            (Plus, Unknown, None),
            (Unknown, Minus, None),
            (Unknown, Plus, None),
            (Unknown, Unknown, None),
        ];
        for (a, b, want) in rows {
            assert_eq!(pair_direction(a, b), want, "{a:?} {b:?}");
        }
    }

    #[test]
    fn weighted_majority() {
        let mk = |rel| {
            let mut t = PrecedenceTable::new(2);
            t.insert(0, 1, rel);
            t
        };
        let m = merge_tables(&[mk(c(0, 1, 0.9)), mk(c(0, 1, 0.8)), mk(c(1, 0, 0.6))]).unwrap();
        let r = m.get(0, 1).unwrap().relation.unwrap();
        assert_eq!((r.before, r.after), (0, 1));
        assert!((r.confidence - 1.1 / 3.0).abs() < 1e-12);

        let m = merge_tables(&[mk(c(0, 1, 0.5)), mk(c(1, 0, 0.5))]).unwrap();
        assert_eq!(m.get(0, 1).unwrap().relation, None);

        let m = merge_tables(&[mk(c(1, 0, 0.52)), mk(c(1, 0, 0.5)), mk(c(0, 1, 0.9))]).unwrap();
        let r = m.get(0, 1).unwrap().relation.unwrap();
        assert_eq!((r.before, r.confidence), (1, CONFIDENCE_FLOOR));
    }

    #[test]
    fn floor_applies_to_small_margins() {
        assert_eq!(merge_votes(&[(true, 0.62), (true, 0.5), (false, 1.0)]), Some((true, 0.1)));
        assert_eq!(merge_votes(&[]), None);
    }

    #[test]
    fn mismatched_tables() {
        assert_eq!(
            merge_tables(&[PrecedenceTable::new(2), PrecedenceTable::new(3)]),
            Err(OrderingError::VariableSetMismatch)
        );
        assert_eq!(merge_tables(&[]), Err(OrderingError::NoTables));
    }
}
