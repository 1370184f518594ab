//! The model connectivity graph.
//!
//! Vertex numbering is fixed: variables occupy `0..n` (vertex id equals the
//! variable index), gate vertices follow in ascending expression-id order, and
//! any synthetic buffers for bare-variable or constant roots come last in
//! state-variable order. Constant operands produce no vertex and no edge.

use std::collections::{BTreeSet, HashMap};

use super::{ExprId, ExprNode, Model, VarId};

pub type VertexId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateOp {
    And,
    Or,
    Nand,
    Nor,
    Xor,
    Xnor,
    Not,
    Buff,
}

impl GateOp {
    fn of(node: &ExprNode) -> Option<GateOp> {
        Some(match node {
            ExprNode::And(_) => GateOp::And,
            ExprNode::Or(_) => GateOp::Or,
            ExprNode::Nand(_) => GateOp::Nand,
            ExprNode::Nor(_) => GateOp::Nor,
            ExprNode::Xor(_) => GateOp::Xor,
            ExprNode::Xnor(_) => GateOp::Xnor,
            ExprNode::Not(_) => GateOp::Not,
            ExprNode::Buff(_) => GateOp::Buff,
            ExprNode::Const(_) | ExprNode::Var(_) => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexKind {
    Variable(VarId),
    Gate(GateOp),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectivityGraph {
    num_vars: usize,
    kinds: Vec<VertexKind>,
    succ: Vec<Vec<VertexId>>,
    pred: Vec<Vec<VertexId>>,
    undirected: Vec<Vec<VertexId>>,
    root: Vec<Option<VertexId>>,
    ns_gates: Vec<BTreeSet<VertexId>>,
}

impl ConnectivityGraph {
    pub fn num_vertices(&self) -> usize {
        self.kinds.len()
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_edges(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn kind(&self, x: VertexId) -> VertexKind {
        self.kinds[x]
    }

    pub fn is_gate(&self, x: VertexId) -> bool {
        x >= self.num_vars
    }

    /// Vertices that `x` feeds, ascending.
    pub fn successors(&self, x: VertexId) -> &[VertexId] {
        &self.succ[x]
    }

    /// Immediate operands of `x`, ascending.
    pub fn predecessors(&self, x: VertexId) -> &[VertexId] {
        &self.pred[x]
    }

    /// Neighbours ignoring direction, ascending.
    pub fn neighbours(&self, x: VertexId) -> &[VertexId] {
        &self.undirected[x]
    }

    pub fn fan_out(&self, x: VertexId) -> usize {
        self.succ[x].len()
    }

    /// Root gate of `NS(v)`; `None` for inputs.
    pub fn root(&self, v: VarId) -> Option<VertexId> {
        self.root[v]
    }

    /// Gate vertices belonging to `NS(v)`; empty for inputs.
    pub fn ns_gates(&self, v: VarId) -> &BTreeSet<VertexId> {
        &self.ns_gates[v]
    }

    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(a, bs)| bs.iter().map(move |&b| (a, b)))
    }
}

pub fn build_connectivity_graph(m: &Model) -> ConnectivityGraph {
    let n = m.num_vars();
    let pool = m.pool();

    let mut reachable: BTreeSet<ExprId> = BTreeSet::new();
    let mut per_state: Vec<Vec<ExprId>> = vec![Vec::new(); n];
    for v in m.state_vars() {
        let ids = pool.reachable(m.next(v).expect("state variable"));
        reachable.extend(ids.iter().copied());
        per_state[v] = ids;
    }

    let mut kinds: Vec<VertexKind> = (0..n).map(VertexKind::Variable).collect();
    let mut vertex_of: HashMap<ExprId, VertexId> = HashMap::new();
    for &id in &reachable {
        match pool.get(id) {
            ExprNode::Var(x) => {
                vertex_of.insert(id, *x);
            }
            ExprNode::Const(_) => {}
            node => {
                vertex_of.insert(id, kinds.len());
                kinds.push(VertexKind::Gate(GateOp::of(node).expect("operator")));
            }
        }
    }

    let mut edges: BTreeSet<(VertexId, VertexId)> = BTreeSet::new();
    for &id in &reachable {
        let node = pool.get(id);
        if !node.is_operator() {
            continue;
        }
        let to = vertex_of[&id];
        for c in node.operands() {
            if let Some(&from) = vertex_of.get(c) {
                edges.insert((from, to));
            }
        }
    }

    let mut root = vec![None; n];
    let mut ns_gates = vec![BTreeSet::new(); n];
    for v in m.state_vars() {
        let r = m.next(v).expect("state variable");
        ns_gates[v] = per_state[v]
            .iter()
            .filter(|id| pool.get(**id).is_operator())
            .map(|id| vertex_of[id])
            .collect();
        if pool.get(r).is_operator() {
            root[v] = Some(vertex_of[&r]);
        } else {
            let b = kinds.len();
            kinds.push(VertexKind::Gate(GateOp::Buff));
            if let ExprNode::Var(x) = pool.get(r) {
                edges.insert((*x, b));
            }
            ns_gates[v].insert(b);
            root[v] = Some(b);
        }
    }

    let total = kinds.len();
    let mut succ = vec![Vec::new(); total];
    let mut pred = vec![Vec::new(); total];
    let mut undirected = vec![BTreeSet::new(); total];
    for &(a, b) in &edges {
        succ[a].push(b);
        pred[b].push(a);
        undirected[a].insert(b);
        undirected[b].insert(a);
    }
    for list in pred.iter_mut() {
        list.sort_unstable();
    }

    ConnectivityGraph {
        num_vars: n,
        kinds,
        succ,
        pred,
        undirected: undirected.into_iter().map(|s| s.into_iter().collect()).collect(),
        root,
        ns_gates,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_native;
    use crate::model::tests::counter;

    #[test]
    fn counter_v0_feeds_every_next_state_function() {
        let m = counter();
        let g = build_connectivity_graph(&m);
        for v in 0..3 {
            let hit = g.successors(0).iter().any(|x| g.ns_gates(v).contains(x));
            assert!(hit, "v0 does not feed NS(v{v})");
        }
        assert!(g.edges().all(|(_, b)| g.is_gate(b)));
    }

    #[test]
    fn identity_model_gets_a_buffer() {
        let m = parse_native("var a\nnext a := a\n").unwrap();
        let g = build_connectivity_graph(&m);
        assert_eq!(g.num_vertices(), 2);
        assert_eq!(g.kind(1), VertexKind::Gate(GateOp::Buff));
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        assert_eq!(g.root(0), Some(1));
    }

    #[test]
    fn constant_root_is_an_isolated_buffer() {
        let m = parse_native("var a\nnext a := 1\n").unwrap();
        let g = build_connectivity_graph(&m);
        assert_eq!(g.num_vertices(), 2);
        assert_eq!(g.num_edges(), 0);
    }

    #[test]
    fn shared_gate_is_one_vertex() {
        let m = crate::model::parse_bench(
            "INPUT(x)\nINPUT(y)\na = DFF(ga)\nb = DFF(gb)\ns = AND(x, y)\nga = OR(s, a)\ngb = XOR(s, b)\n",
        )
        .unwrap();
        let g = build_connectivity_graph(&m);
        let ands: Vec<_> = (0..g.num_vertices())
            .filter(|&x| g.kind(x) == VertexKind::Gate(GateOp::And))
            .collect();
        assert_eq!(ands.len(), 1);
        assert_eq!(g.fan_out(ands[0]), 2);
    }

    #[test]
    fn numbering_is_deterministic() {
        let src = "var p q\ninput r\nnext p := (p & r) | q\nnext q := !(p ^ r)\n";
        let a = build_connectivity_graph(&parse_native(src).unwrap());
        let b = build_connectivity_graph(&parse_native(src).unwrap());
        assert_eq!(a, b);
    }
}
