use rustc_hash::FxHashMap;

use super::{BddError, SlotAssignment, DEFAULT_NODE_CAP};
use crate::model::{ExprId, ExprNode, ExprPool, VarId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    pub const ZERO: NodeId = NodeId(0);
    pub const ONE: NodeId = NodeId(1);

    pub fn is_terminal(self) -> bool {
        self.0 < 2
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

const TERMINAL_SLOT: u32 = u32::MAX;

#[derive(Clone, Copy, Debug)]
struct Node {
    slot: u32,
    low: NodeId,
    high: NodeId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Op {
    And,
    Or,
    Xor,
    Xnor,
}

/// How variable references are mapped to slots while building an
/// expression.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Env {
    Present,
    /// Present slots, except the named state variable which maps to its
    /// primed slot.
    NextOf(VarId),
}

/// Memo of expression nodes already built under [`Env::Present`], so that
/// next-state functions sharing sub-expressions are built once.
#[derive(Clone, Debug, Default)]
pub struct ExprMemo {
    built: FxHashMap<ExprId, NodeId>,
}

/// Unique table and apply cache for one slot assignment. Terminals are
/// nodes 0 and 1; there is no garbage collection.
pub struct BddManager {
    slots: SlotAssignment,
    nodes: Vec<Node>,
    unique: FxHashMap<(u32, NodeId, NodeId), NodeId>,
    cache: FxHashMap<(Op, NodeId, NodeId), NodeId>,
    not_cache: FxHashMap<NodeId, NodeId>,
    cap: usize,
}

impl BddManager {
    pub fn new(slots: SlotAssignment) -> Self {
        Self::with_cap(slots, DEFAULT_NODE_CAP)
    }

    pub fn with_cap(slots: SlotAssignment, cap: usize) -> Self {
        let terminal = Node {
            slot: TERMINAL_SLOT,
            low: NodeId::ZERO,
            high: NodeId::ZERO,
        };
        Self {
            slots,
            nodes: vec![terminal, terminal],
            unique: FxHashMap::default(),
            cache: FxHashMap::default(),
            not_cache: FxHashMap::default(),
            cap,
        }
    }

    pub fn slots(&self) -> &SlotAssignment {
        &self.slots
    }

    /// Non-terminal nodes allocated so far, reachable or not.
    pub fn allocated(&self) -> usize {
        self.nodes.len() - 2
    }

    /// `(slot, low, high)` of a non-terminal node.
    pub fn node(&self, id: NodeId) -> Option<(u32, NodeId, NodeId)> {
        if id.is_terminal() {
            return None;
        }
        let n = self.nodes[id.index()];
        Some((n.slot, n.low, n.high))
    }

    /// Unique-table lookup without insertion.
    pub fn lookup(&self, slot: u32, low: NodeId, high: NodeId) -> Option<NodeId> {
        self.unique.get(&(slot, low, high)).copied()
    }

    fn slot_of(&self, id: NodeId) -> u32 {
        self.nodes[id.index()].slot
    }

    fn mk(&mut self, slot: u32, low: NodeId, high: NodeId) -> Result<NodeId, BddError> {
        if low == high {
            return Ok(low);
        }
        if let Some(&id) = self.unique.get(&(slot, low, high)) {
            return Ok(id);
        }
        if self.allocated() >= self.cap {
            return Err(BddError::NodeCap(self.cap));
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node { slot, low, high });
        self.unique.insert((slot, low, high), id);
        Ok(id)
    }

    /// The projection function of `slot`.
    pub fn ith_var(&mut self, slot: u32) -> Result<NodeId, BddError> {
        self.mk(slot, NodeId::ZERO, NodeId::ONE)
    }

    pub fn not(&mut self, f: NodeId) -> Result<NodeId, BddError> {
        match f {
            NodeId::ZERO => return Ok(NodeId::ONE),
            NodeId::ONE => return Ok(NodeId::ZERO),
            _ => {}
        }
        if let Some(&r) = self.not_cache.get(&f) {
            return Ok(r);
        }
        let Node { slot, low, high } = self.nodes[f.index()];
        let l = self.not(low)?;
        let h = self.not(high)?;
        let r = self.mk(slot, l, h)?;
        self.not_cache.insert(f, r);
        Ok(r)
    }

    pub fn and(&mut self, f: NodeId, g: NodeId) -> Result<NodeId, BddError> {
        self.apply(Op::And, f, g)
    }

    pub fn or(&mut self, f: NodeId, g: NodeId) -> Result<NodeId, BddError> {
        self.apply(Op::Or, f, g)
    }

    pub fn xor(&mut self, f: NodeId, g: NodeId) -> Result<NodeId, BddError> {
        self.apply(Op::Xor, f, g)
    }

    pub fn xnor(&mut self, f: NodeId, g: NodeId) -> Result<NodeId, BddError> {
        self.apply(Op::Xnor, f, g)
    }

    fn apply(&mut self, op: Op, f: NodeId, g: NodeId) -> Result<NodeId, BddError> {
        use NodeId as N;
        match op {
            Op::And => {
                if f == N::ZERO || g == N::ZERO {
                    return Ok(N::ZERO);
                }
                if f == N::ONE || f == g {
                    return Ok(g);
                }
                if g == N::ONE {
                    return Ok(f);
                }
            }
            Op::Or => {
                if f == N::ONE || g == N::ONE {
                    return Ok(N::ONE);
                }
                if f == N::ZERO || f == g {
                    return Ok(g);
                }
                if g == N::ZERO {
                    return Ok(f);
                }
            }
            Op::Xor => {
                if f == g {
                    return Ok(N::ZERO);
                }
                if f == N::ZERO {
                    return Ok(g);
                }
                if g == N::ZERO {
                    return Ok(f);
                }
                if f == N::ONE {
                    return self.not(g);
                }
                if g == N::ONE {
                    return self.not(f);
                }
            }
            Op::Xnor => {
                if f == g {
                    return Ok(N::ONE);
                }
                if f == N::ONE {
                    return Ok(g);
                }
                if g == N::ONE {
                    return Ok(f);
                }
                if f == N::ZERO {
                    return self.not(g);
                }
                if g == N::ZERO {
                    return self.not(f);
                }
            }
        }
        // every op here is commutative
        let (f, g) = if f <= g { (f, g) } else { (g, f) };
        if let Some(&r) = self.cache.get(&(op, f, g)) {
            return Ok(r);
        }
        let sf = self.slot_of(f);
        let sg = self.slot_of(g);
        let top = sf.min(sg);
        let (f0, f1) = if sf == top {
            let n = self.nodes[f.index()];
            (n.low, n.high)
        } else {
            (f, f)
        };
        let (g0, g1) = if sg == top {
            let n = self.nodes[g.index()];
            (n.low, n.high)
        } else {
            (g, g)
        };
        let low = self.apply(op, f0, g0)?;
        let high = self.apply(op, f1, g1)?;
        let r = self.mk(top, low, high)?;
        self.cache.insert((op, f, g), r);
        Ok(r)
    }

    fn fold(&mut self, op: Op, cs: &[NodeId]) -> Result<NodeId, BddError> {
        let mut acc = cs[0];
        for &c in &cs[1..] {
            acc = self.apply(op, acc, c)?;
        }
        Ok(acc)
    }

    fn var_slot(&self, x: VarId, env: Env) -> Result<u32, BddError> {
        if x >= self.slots.num_vars() {
            return Err(BddError::Unassigned(x));
        }
        match env {
            Env::NextOf(v) if v == x => self.slots.next(x).ok_or(BddError::Unassigned(x)),
            _ => Ok(self.slots.present(x)),
        }
    }

    /// Builds the ROBDD of `root` without a persistent memo.
    pub fn build_expr(&mut self, pool: &ExprPool, root: ExprId, env: Env) -> Result<NodeId, BddError> {
        let mut memo = ExprMemo::default();
        self.build_expr_memo(pool, root, env, &mut memo)
    }

    /// Builds the ROBDD of `root`. The memo is consulted and filled only
    /// under [`Env::Present`]; other environments use a private memo.
    pub fn build_expr_memo(
        &mut self,
        pool: &ExprPool,
        root: ExprId,
        env: Env,
        memo: &mut ExprMemo,
    ) -> Result<NodeId, BddError> {
        let mut private = ExprMemo::default();
        let memo = if env == Env::Present { memo } else { &mut private };
        if let Some(&r) = memo.built.get(&root) {
            return Ok(r);
        }
        // ascending ids are a topological order of the sub-DAG
        for id in pool.reachable(root) {
            if memo.built.contains_key(&id) {
                continue;
            }
            let get = |c: &ExprId| memo.built[c];
            let r = match pool.get(id) {
                ExprNode::Const(false) => NodeId::ZERO,
                ExprNode::Const(true) => NodeId::ONE,
                ExprNode::Var(x) => {
                    let slot = self.var_slot(*x, env)?;
                    self.ith_var(slot)?
                }
                ExprNode::Not(c) => self.not(get(c))?,
                ExprNode::Buff(c) => get(c),
                ExprNode::And(cs) => {
                    let cs: Vec<_> = cs.iter().map(get).collect();
                    self.fold(Op::And, &cs)?
                }
                ExprNode::Or(cs) => {
                    let cs: Vec<_> = cs.iter().map(get).collect();
                    self.fold(Op::Or, &cs)?
                }
                ExprNode::Nand(cs) => {
                    let cs: Vec<_> = cs.iter().map(get).collect();
                    let a = self.fold(Op::And, &cs)?;
                    self.not(a)?
                }
                ExprNode::Nor(cs) => {
                    let cs: Vec<_> = cs.iter().map(get).collect();
                    let o = self.fold(Op::Or, &cs)?;
                    self.not(o)?
                }
                ExprNode::Xor([a, b]) => self.apply(Op::Xor, get(a), get(b))?,
                ExprNode::Xnor([a, b]) => self.apply(Op::Xnor, get(a), get(b))?,
            };
            memo.built.insert(id, r);
        }
        Ok(memo.built[&root])
    }

    /// Distinct non-terminal nodes reachable from any of `roots`.
    pub fn count_reachable(&self, roots: &[NodeId]) -> usize {
        self.reachable(roots).len()
    }

    /// Non-terminal nodes reachable from `roots`, ascending by id.
    pub fn reachable(&self, roots: &[NodeId]) -> Vec<NodeId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<NodeId> = roots.iter().copied().filter(|r| !r.is_terminal()).collect();
        for r in &stack {
            seen[r.index()] = true;
        }
        while let Some(id) = stack.pop() {
            let n = self.nodes[id.index()];
            for c in [n.low, n.high] {
                if !c.is_terminal() && !seen[c.index()] {
                    seen[c.index()] = true;
                    stack.push(c);
                }
            }
        }
        seen.iter()
            .enumerate()
            .filter(|(_, s)| **s)
            .map(|(i, _)| NodeId(i as u32))
            .collect()
    }

    /// Value of `f` under a total slot assignment.
    pub fn eval(&self, mut f: NodeId, slot_value: &dyn Fn(u32) -> bool) -> bool {
        while !f.is_terminal() {
            let n = self.nodes[f.index()];
            f = if slot_value(n.slot) { n.high } else { n.low };
        }
        f == NodeId::ONE
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bdd::VariableOrder;

    fn manager(n: usize) -> BddManager {
        BddManager::new(SlotAssignment::inputs_only(&VariableOrder::identity(n)))
    }

    #[test]
    fn conjunction_has_two_nodes() {
        let mut pool = ExprPool::new();
        let x = pool.var(0);
        let y = pool.var(1);
        let e = pool.and(vec![x, y]);
        let mut m = manager(2);
        let r = m.build_expr(&pool, e, Env::Present).unwrap();
        assert_eq!(m.count_reachable(&[r]), 2);
    }

    #[test]
    fn self_xor_reduces_to_zero() {
        let mut pool = ExprPool::new();
        let x = pool.var(0);
        let e = pool.xor(x, x);
        let mut m = manager(1);
        assert_eq!(m.build_expr(&pool, e, Env::Present).unwrap(), NodeId::ZERO);
    }

    #[test]
    fn shared_roots_counted_once() {
        let mut m = manager(2);
        let a = m.ith_var(0).unwrap();
        let b = m.ith_var(1).unwrap();
        let f = m.or(a, b).unwrap();
        assert_eq!(m.count_reachable(&[f, f]), 2);
        assert_eq!(m.count_reachable(&[NodeId::ONE, NodeId::ZERO]), 0);
    }

    #[test]
    fn cap_is_enforced() {
        let mut m = BddManager::with_cap(SlotAssignment::inputs_only(&VariableOrder::identity(4)), 3);
        let vs: Vec<_> = (0..3).map(|s| m.ith_var(s).unwrap()).collect();
        assert_eq!(m.ith_var(3), Err(BddError::NodeCap(3)));
        assert!(m.and(vs[0], vs[1]).is_err());
    }

    #[test]
    fn next_of_maps_only_its_variable() {
        let order = VariableOrder::identity(2);
        let m = crate::model::parse_native("var a b\nnext a := b\nnext b := a\n").unwrap();
        let slots = crate::bdd::expand_order(&order, &m).unwrap();
        let mut mgr = BddManager::new(slots);
        let mut pool = ExprPool::new();
        let a = pool.var(0);
        let b = pool.var(1);
        let e = pool.and(vec![a, b]);
        let r = mgr.build_expr(&pool, e, Env::NextOf(0)).unwrap();
        let (slot, _, _) = mgr.node(r).unwrap();
        assert_eq!(slot, 1);
    }
}
