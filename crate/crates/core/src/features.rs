//! Variable, pair and triplet attributes over the connectivity graph.
//!
//! Notation: `dep(v)` is the support of `NS(v)` (empty for inputs),
//! `dependents(v)` the state variables whose support contains `v`, and
//! `interact(v)` their union. A variable that reads itself counts itself in
//! all three. Distances are edge counts on the undirected graph; ratios
//! with a zero denominator and undefined distances are [`SENTINEL`].

use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

use crate::model::{ConnectivityGraph, GateOp, Model, VarId, VertexId, VertexKind};

/// Components in every pair and triplet vector.
pub const FEATURE_DIM: usize = 38;

pub type FeatureVector = [f64; FEATURE_DIM];

/// Value of undefined distances and zero-denominator ratios.
pub const SENTINEL: f64 = -1.0;

/// Shortest-path multiplicities saturate here.
pub const PATH_COUNT_CAP: u64 = 1 << 20;

const VARIABLE_ATTRS: [&str; 9] = [
    "variable-dependence",
    "variable-dependency",
    "variable-dependency-size",
    "variable-dependency-average-size",
    "variable-dependence-dependency-ratio",
    "variable-interaction",
    "variable-dependence-percentage",
    "variable-dependency-percentage",
    "variable-interaction-percentage",
];

const SYMMETRIC_ATTRS: [&str; 14] = [
    "pair-minimal-distance",
    "pair-minimal-distance-eval",
    "pair-minimal-dependency",
    "pair-minimal-dependency-eval",
    "pair-minimal-connection-class",
    "pair-minimal-maximal",
    "pair-minimal-maximal-eval",
    "pair-sum-distance",
    "pair-dependency-ns-size",
    "pair-sum-distance-dependency-ratio",
    "pair-mutual-dependence",
    "pair-mutual-dependency",
    "pair-mutual-interaction",
    "pair-mutual-ns-dependency",
];

const DIRECTED_ATTRS: [&str; 6] = [
    "pair-ns-distance",
    "pair-dependence-ratio",
    "pair-dependency-ratio",
    "pair-interaction-ratio",
    "pair-dependence-flag",
    "pair-interaction-flag",
];

/// Index of the first symmetric pair component.
pub const SYMMETRIC_START: usize = 18;
/// Index of the first component computed relative to the first variable.
pub const DIRECTED_START: usize = 32;

/// Component names and whether each can be zero (or negative), which
/// decides subtraction over division when forming triplet vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureSchema {
    names: Vec<String>,
    zero_capable: Vec<bool>,
}

impl FeatureSchema {
    pub fn new(names: Vec<String>, zero_capable: Vec<bool>) -> Self {
        assert_eq!(names.len(), zero_capable.len());
        Self { names, zero_capable }
    }

    pub fn pair() -> Self {
        let mut names = Vec::with_capacity(FEATURE_DIM);
        for side in ["i", "j"] {
            names.extend(VARIABLE_ATTRS.iter().map(|a| format!("{side}.{a}")));
        }
        names.extend(SYMMETRIC_ATTRS.iter().map(|a| a.to_string()));
        names.extend(DIRECTED_ATTRS.iter().map(|a| a.to_string()));
        // every attribute is zero or the sentinel on some degenerate model
        Self::new(names, vec![true; FEATURE_DIM])
    }

    /// Names of the combined components; the prefix records the operator.
    pub fn triplet() -> Self {
        let pair = Self::pair();
        let names = pair
            .names
            .iter()
            .zip(&pair.zero_capable)
            .map(|(n, &z)| format!("{}.{n}", if z { "diff" } else { "ratio" }))
            .collect();
        Self::new(names, pair.zero_capable)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn zero_capable(&self) -> &[bool] {
        &self.zero_capable
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeatureError {
    #[error("component `{0}` is marked nonzero but its divisor is zero")]
    ZeroDivisor(String),
    #[error("schema has {got} components, expected {expected}")]
    SchemaLength { expected: usize, got: usize },
}

/// Combines the vectors of `(vi, vj)` and `(vi, vk)` component by component.
pub fn triplet_features(
    pv_ij: &FeatureVector,
    pv_ik: &FeatureVector,
    schema: &FeatureSchema,
) -> Result<FeatureVector, FeatureError> {
    if schema.len() != FEATURE_DIM {
        return Err(FeatureError::SchemaLength {
            expected: FEATURE_DIM,
            got: schema.len(),
        });
    }
    let mut out = [0.0; FEATURE_DIM];
    for l in 0..FEATURE_DIM {
        out[l] = if schema.zero_capable[l] {
            pv_ij[l] - pv_ik[l]
        } else {
            if pv_ik[l] == 0.0 {
                return Err(FeatureError::ZeroDivisor(schema.names[l].clone()));
            }
            pv_ij[l] / pv_ik[l]
        };
    }
    Ok(out)
}

/// The nine per-variable attributes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VariableAttrs(pub [f64; 9]);

impl VariableAttrs {
    pub fn dependence(&self) -> f64 {
        self.0[0]
    }

    pub fn dependency(&self) -> f64 {
        self.0[1]
    }

    pub fn interaction(&self) -> f64 {
        self.0[5]
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        SENTINEL
    } else {
        num / den
    }
}

/// Operator class of a gate: and/nand 1, or/nor 2, xor/xnor 3, not/buff 4.
pub fn connection_class(op: GateOp) -> u8 {
    match op {
        GateOp::And | GateOp::Nand => 1,
        GateOp::Or | GateOp::Nor => 2,
        GateOp::Xor | GateOp::Xnor => 3,
        GateOp::Not | GateOp::Buff => 4,
    }
}

/// Precomputed per-model tables; cheap to query per pair and shareable
/// across threads.
pub struct FeatureExtractor<'a> {
    g: &'a ConnectivityGraph,
    n: usize,
    dep: Vec<BTreeSet<VarId>>,
    dependents: Vec<BTreeSet<VarId>>,
    interact: Vec<BTreeSet<VarId>>,
    partners: Vec<BTreeSet<VarId>>,
    /// Undirected BFS distance from each variable to every vertex.
    dist: Vec<Vec<u32>>,
    /// Shortest-path multiplicity from each variable to every variable.
    paths: Vec<Vec<u64>>,
    /// `ns_depth[i][j]`: depth of `vj` below the root of `NS(vi)`.
    ns_depth: Vec<Vec<i64>>,
    attrs: Vec<VariableAttrs>,
}

const UNREACHED: u32 = u32::MAX;

impl<'a> FeatureExtractor<'a> {
    pub fn new(m: &Model, g: &'a ConnectivityGraph) -> Self {
        let n = m.num_vars();
        let dep = m.supports();
        let mut dependents = vec![BTreeSet::new(); n];
        for (u, s) in dep.iter().enumerate() {
            for &x in s {
                dependents[x].insert(u);
            }
        }
        let interact: Vec<BTreeSet<VarId>> = (0..n).map(|v| dep[v].union(&dependents[v]).copied().collect()).collect();
        let mut partners = vec![BTreeSet::new(); n];
        for (a, b) in m.interacting_pairs() {
            partners[a].insert(b);
            partners[b].insert(a);
        }

        let mut dist = Vec::with_capacity(n);
        let mut paths = Vec::with_capacity(n);
        for v in 0..n {
            let (d, p) = bfs_counts(g, v, n);
            dist.push(d);
            paths.push(p);
        }

        let mut ns_depth = vec![vec![-1i64; n]; n];
        for v in m.state_vars() {
            if let Some(r) = g.root(v) {
                let mut depth = vec![UNREACHED; g.num_vertices()];
                depth[r] = 0;
                let mut q = VecDeque::from([r]);
                while let Some(x) = q.pop_front() {
                    for &p in g.predecessors(x) {
                        if depth[p] == UNREACHED {
                            depth[p] = depth[x] + 1;
                            q.push_back(p);
                        }
                    }
                }
                for (j, slot) in ns_depth[v].iter_mut().enumerate() {
                    if depth[j] != UNREACHED {
                        *slot = depth[j] as i64;
                    }
                }
            }
        }

        let total = n as f64;
        let attrs = (0..n)
            .map(|v| {
                let dependence = dep[v].len() as f64;
                let dependency = dependents[v].len() as f64;
                let size: usize = dependents[v].iter().map(|&u| dep[u].len()).sum();
                let size = size as f64;
                let inter = interact[v].len() as f64;
                VariableAttrs([
                    dependence,
                    dependency,
                    size,
                    ratio(size, dependency),
                    ratio(dependence, dependency),
                    inter,
                    dependence / total,
                    dependency / total,
                    inter / total,
                ])
            })
            .collect();

        Self {
            g,
            n,
            dep,
            dependents,
            interact,
            partners,
            dist,
            paths,
            ns_depth,
            attrs,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn variable_attrs(&self, v: VarId) -> VariableAttrs {
        self.attrs[v]
    }

    /// Variables `v` depends on or that depend on `v`.
    pub fn interact_set(&self, v: VarId) -> &BTreeSet<VarId> {
        &self.interact[v]
    }

    /// Whether `a` and `b` share the support of some next-state function.
    pub fn is_interacting_pair(&self, a: VarId, b: VarId) -> bool {
        self.partners[a].contains(&b)
    }

    /// Variables forming an interacting pair with `v`.
    pub fn partners(&self, v: VarId) -> &BTreeSet<VarId> {
        &self.partners[v]
    }

    /// Undirected distance in edges, if connected.
    pub fn distance(&self, a: VarId, b: VarId) -> Option<u32> {
        match self.dist[a][b] {
            UNREACHED => None,
            d => Some(d),
        }
    }

    /// The lexicographically smallest shortest path from the lower-index
    /// endpoint to the higher-index one, as vertex ids.
    pub fn canonical_path(&self, a: VarId, b: VarId) -> Option<Vec<VertexId>> {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let to_hi = &self.dist[hi];
        if to_hi[lo] == UNREACHED {
            return None;
        }
        let mut path = vec![lo];
        let mut x = lo;
        while x != hi {
            let want = to_hi[x] - 1;
            x = *self
                .g
                .neighbours(x)
                .iter()
                .find(|&&y| to_hi[y] == want)
                .expect("a neighbour one step closer exists");
            path.push(x);
        }
        Some(path)
    }

    /// State variables whose next-state gates contain every gate of the
    /// canonical shortest path between `a` and `b`.
    pub fn minimal_dependents(&self, a: VarId, b: VarId) -> Vec<VarId> {
        let Some(path) = self.canonical_path(a, b) else {
            return Vec::new();
        };
        let gates: Vec<VertexId> = path.into_iter().filter(|&x| self.g.is_gate(x)).collect();
        (0..self.n)
            .filter(|&u| {
                let ns = self.g.ns_gates(u);
                !ns.is_empty() && gates.iter().all(|x| ns.contains(x))
            })
            .collect()
    }

    /// Sum over functions reading both variables of their distance inside
    /// that function's gates.
    fn sum_distance(&self, a: VarId, b: VarId, common: &BTreeSet<VarId>) -> f64 {
        let mut total = 0u64;
        for &u in common {
            let ns = self.g.ns_gates(u);
            let mut d = vec![UNREACHED; self.g.num_vertices()];
            d[a] = 0;
            let mut q = VecDeque::from([a]);
            while let Some(x) = q.pop_front() {
                if x == b {
                    break;
                }
                for &y in self.g.neighbours(x) {
                    if d[y] == UNREACHED && (y == b || ns.contains(&y)) {
                        d[y] = d[x] + 1;
                        q.push_back(y);
                    }
                }
            }
            if d[b] != UNREACHED {
                total += d[b] as u64;
            }
        }
        total as f64
    }

    /// The full 38-component vector of the ordered pair `(vi, vj)`.
    pub fn pair_features(&self, vi: VarId, vj: VarId) -> FeatureVector {
        assert_ne!(vi, vj, "pair features need distinct variables");
        let mut f = [0.0; FEATURE_DIM];
        f[..9].copy_from_slice(&self.attrs[vi].0);
        f[9..18].copy_from_slice(&self.attrs[vj].0);

        let d = self.distance(vi, vj);
        let dv = d.map_or(SENTINEL, f64::from);
        let min_deps = self.minimal_dependents(vi, vj);
        let max_size = min_deps.iter().map(|&u| self.dep[u].len()).max().unwrap_or(0) as f64;
        let class = match self.canonical_path(vi, vj) {
            Some(p) => match self.g.kind(p[p.len() - 2]) {
                VertexKind::Gate(op) => f64::from(connection_class(op)),
                VertexKind::Variable(_) => unreachable!("variables are only adjacent to gates"),
            },
            None => SENTINEL,
        };
        let common: BTreeSet<VarId> = self.dependents[vi].intersection(&self.dependents[vj]).copied().collect();
        let sum_dist = self.sum_distance(vi, vj, &common);
        let ns_size: usize = common.iter().map(|&u| self.dep[u].len()).sum();
        let ns_size = ns_size as f64;
        let eval = |den: f64| if d.is_none() { SENTINEL } else { ratio(dv, den) };

        let s = SYMMETRIC_START;
        f[s] = dv;
        f[s + 1] = eval(self.paths[vi][vj] as f64);
        f[s + 2] = min_deps.len() as f64;
        f[s + 3] = eval(min_deps.len() as f64);
        f[s + 4] = class;
        f[s + 5] = max_size;
        f[s + 6] = eval(max_size);
        f[s + 7] = sum_dist;
        f[s + 8] = ns_size;
        f[s + 9] = ratio(sum_dist, ns_size);
        f[s + 10] = self.dep[vi].intersection(&self.dep[vj]).count() as f64;
        f[s + 11] = common.len() as f64;
        f[s + 12] = self.interact[vi].intersection(&self.interact[vj]).count() as f64;
        f[s + 13] = f64::from(self.dep[vi].contains(&vj) && self.dep[vj].contains(&vi));

        let t = DIRECTED_START;
        let (dep_i, dep_j) = (self.dep[vi].len() as f64, self.dep[vj].len() as f64);
        let (dy_i, dy_j) = (self.dependents[vi].len() as f64, self.dependents[vj].len() as f64);
        let (in_i, in_j) = (self.interact[vi].len() as f64, self.interact[vj].len() as f64);
        f[t] = self.ns_depth[vi][vj] as f64;
        f[t + 1] = ratio(dep_i, dep_j);
        f[t + 2] = ratio(dy_i, dy_j);
        f[t + 3] = ratio(in_i, in_j);
        f[t + 4] = f64::from(dep_i >= dep_j);
        f[t + 5] = f64::from(in_i >= in_j);
        f
    }

    /// Ordered interacting pairs `(vi, vj)`, `vi != vj`, ascending.
    pub fn ordered_interacting_pairs(&self, m: &Model) -> Vec<(VarId, VarId)> {
        let mut out = Vec::new();
        for (a, b) in m.interacting_pairs() {
            out.push((a, b));
            out.push((b, a));
        }
        out.sort_unstable();
        out
    }
}

/// Undirected BFS from variable `src`: distances to every vertex and capped
/// shortest-path counts to every variable.
fn bfs_counts(g: &ConnectivityGraph, src: VertexId, n: usize) -> (Vec<u32>, Vec<u64>) {
    let mut dist = vec![UNREACHED; g.num_vertices()];
    let mut count = vec![0u64; g.num_vertices()];
    dist[src] = 0;
    count[src] = 1;
    let mut q = VecDeque::from([src]);
    while let Some(x) = q.pop_front() {
        for &y in g.neighbours(x) {
            if dist[y] == UNREACHED {
                dist[y] = dist[x] + 1;
                q.push_back(y);
            }
            if dist[y] == dist[x] + 1 {
                count[y] = (count[y] + count[x]).min(PATH_COUNT_CAP);
            }
        }
    }
    count.truncate(n);
    (dist, count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::counter;
    use crate::model::{build_connectivity_graph, parse_native};

    #[test]
    fn counter_variable_attrs() {
        let m = counter();
        let g = build_connectivity_graph(&m);
        let fx = FeatureExtractor::new(&m, &g);
        let v2 = fx.variable_attrs(2);
        assert_eq!(v2.dependence(), 3.0);
        assert_eq!(v2.dependency(), 1.0);
        assert_eq!(v2.0[6], 1.0);
        assert_eq!(fx.variable_attrs(0).dependency(), 3.0);
    }

    #[test]
    fn isolated_input_is_all_zero_with_sentinel_ratios() {
        let m = parse_native("var s\ninput i\nnext s := s\n").unwrap();
        let g = build_connectivity_graph(&m);
        let fx = FeatureExtractor::new(&m, &g);
        let a = fx.variable_attrs(1).0;
        assert_eq!(a, [0.0, 0.0, 0.0, SENTINEL, SENTINEL, 0.0, 0.0, 0.0, 0.0]);
        let f = fx.pair_features(0, 1);
        assert_eq!(f[SYMMETRIC_START], SENTINEL);
    }

    #[test]
    fn counter_mutual_counts() {
        let m = counter();
        let g = build_connectivity_graph(&m);
        let fx = FeatureExtractor::new(&m, &g);
        let f = fx.pair_features(0, 1);
        assert_eq!(f[SYMMETRIC_START + 11], 2.0);
        assert_eq!(f[SYMMETRIC_START + 10], 1.0);
    }

    #[test]
    fn symmetric_block_is_symmetric() {
        let m = counter();
        let g = build_connectivity_graph(&m);
        let fx = FeatureExtractor::new(&m, &g);
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            let x = fx.pair_features(a, b);
            let y = fx.pair_features(b, a);
            assert_eq!(x[SYMMETRIC_START..DIRECTED_START], y[SYMMETRIC_START..DIRECTED_START]);
        }
    }

    #[test]
    fn adjacency_through_one_gate_is_distance_two() {
        let m = parse_native("var x\ninput y z\nnext x := y & z\n").unwrap();
        let g = build_connectivity_graph(&m);
        let fx = FeatureExtractor::new(&m, &g);
        let f = fx.pair_features(1, 2);
        assert_eq!(f[SYMMETRIC_START], 2.0);
        assert_eq!(f[SYMMETRIC_START + 4], 1.0);
        assert_eq!(f[SYMMETRIC_START + 2], 1.0);
        assert_eq!(f[SYMMETRIC_START + 7], 2.0);
        // y is an input, so it has no next-state function to measure in
        assert_eq!(f[DIRECTED_START], SENTINEL);
        assert_eq!(fx.pair_features(0, 1)[DIRECTED_START], 1.0);
    }

    #[test]
    fn identical_vectors_subtract_to_zero() {
        let m = counter();
        let g = build_connectivity_graph(&m);
        let fx = FeatureExtractor::new(&m, &g);
        let p = fx.pair_features(0, 2);
        let t = triplet_features(&p, &p, &FeatureSchema::triplet()).unwrap();
        assert!(t.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn division_components_and_zero_divisors() {
        let mut z = vec![true; FEATURE_DIM];
        z[0] = false;
        let schema = FeatureSchema::new((0..FEATURE_DIM).map(|i| format!("c{i}")).collect(), z);
        let mut a = [0.0; FEATURE_DIM];
        let mut b = [0.0; FEATURE_DIM];
        a[0] = 3.0;
        b[0] = 2.0;
        a[SYMMETRIC_START] = 2.0;
        b[SYMMETRIC_START] = 4.0;
        let t = triplet_features(&a, &b, &schema).unwrap();
        assert_eq!(t[0], 1.5);
        assert_eq!(t[SYMMETRIC_START], -2.0);
        b[0] = 0.0;
        assert_eq!(triplet_features(&a, &b, &schema), Err(FeatureError::ZeroDivisor("c0".into())));
    }

    #[test]
    fn schema_layout() {
        let s = FeatureSchema::pair();
        assert_eq!(s.len(), FEATURE_DIM);
        assert_eq!(s.names()[0], "i.variable-dependence");
        assert_eq!(s.names()[9], "j.variable-dependence");
        assert_eq!(s.names()[SYMMETRIC_START], "pair-minimal-distance");
        assert_eq!(s.names()[DIRECTED_START], "pair-ns-distance");
        assert_eq!(FeatureSchema::triplet().names()[0], "diff.i.variable-dependence");
    }
}
