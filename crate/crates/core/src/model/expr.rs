//! Next-state expressions stored as a hash-free arena DAG.
//!
//! Children always carry smaller ids than their parents, so the pool is
//! acyclic by construction and ascending id order is a topological order.

use std::fmt;

use super::VarId;

/// Handle into an [`ExprPool`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExprId(pub(crate) u32);

impl ExprId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ExprId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExprNode {
    Const(bool),
    Var(VarId),
    Not(ExprId),
    And(Vec<ExprId>),
    Or(Vec<ExprId>),
    Nand(Vec<ExprId>),
    Nor(Vec<ExprId>),
    Xor([ExprId; 2]),
    Xnor([ExprId; 2]),
    Buff(ExprId),
}

impl ExprNode {
    /// Immediate operands in left-to-right order.
    pub fn operands(&self) -> &[ExprId] {
        match self {
            ExprNode::Const(_) | ExprNode::Var(_) => &[],
            ExprNode::Not(c) | ExprNode::Buff(c) => std::slice::from_ref(c),
            ExprNode::And(cs) | ExprNode::Or(cs) | ExprNode::Nand(cs) | ExprNode::Nor(cs) => cs,
            ExprNode::Xor(ab) | ExprNode::Xnor(ab) => ab,
        }
    }

    pub fn is_operator(&self) -> bool {
        !matches!(self, ExprNode::Const(_) | ExprNode::Var(_))
    }
}

/// Append-only store of expression nodes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExprPool {
    nodes: Vec<ExprNode>,
}

impl ExprPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn get(&self, id: ExprId) -> &ExprNode {
        &self.nodes[id.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (ExprId, &ExprNode)> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (ExprId(i as u32), n))
    }

    /// Pushes a node. Panics if an operand does not already exist, which
    /// would break the children-before-parents invariant.
    pub fn push(&mut self, node: ExprNode) -> ExprId {
        let id = self.nodes.len() as u32;
        for c in node.operands() {
            assert!(c.0 < id, "operand {c} must precede its consumer");
        }
        match &node {
            ExprNode::And(cs) | ExprNode::Or(cs) | ExprNode::Nand(cs) | ExprNode::Nor(cs) => {
                assert!(cs.len() >= 2, "n-ary gates need at least two operands")
            }
            _ => {}
        }
        self.nodes.push(node);
        ExprId(id)
    }

    pub fn constant(&mut self, value: bool) -> ExprId {
        self.push(ExprNode::Const(value))
    }

    pub fn var(&mut self, v: VarId) -> ExprId {
        self.push(ExprNode::Var(v))
    }

    pub fn not(&mut self, e: ExprId) -> ExprId {
        self.push(ExprNode::Not(e))
    }

    pub fn buff(&mut self, e: ExprId) -> ExprId {
        self.push(ExprNode::Buff(e))
    }

    pub fn and(&mut self, cs: Vec<ExprId>) -> ExprId {
        self.push(ExprNode::And(cs))
    }

    pub fn or(&mut self, cs: Vec<ExprId>) -> ExprId {
        self.push(ExprNode::Or(cs))
    }

    pub fn nand(&mut self, cs: Vec<ExprId>) -> ExprId {
        self.push(ExprNode::Nand(cs))
    }

    pub fn nor(&mut self, cs: Vec<ExprId>) -> ExprId {
        self.push(ExprNode::Nor(cs))
    }

    pub fn xor(&mut self, a: ExprId, b: ExprId) -> ExprId {
        self.push(ExprNode::Xor([a, b]))
    }

    pub fn xnor(&mut self, a: ExprId, b: ExprId) -> ExprId {
        self.push(ExprNode::Xnor([a, b]))
    }

    /// Ids reachable from `root` (inclusive), ascending.
    pub fn reachable(&self, root: ExprId) -> Vec<ExprId> {
        let mut seen = vec![false; root.index() + 1];
        let mut stack = vec![root];
        seen[root.index()] = true;
        while let Some(id) = stack.pop() {
            for &c in self.get(id).operands() {
                if !seen[c.index()] {
                    seen[c.index()] = true;
                    stack.push(c);
                }
            }
        }
        seen.iter()
            .enumerate()
            .filter(|(_, s)| **s)
            .map(|(i, _)| ExprId(i as u32))
            .collect()
    }

    /// Evaluates `root` under `assignment` (indexed by variable).
    pub fn eval(&self, root: ExprId, assignment: &dyn Fn(VarId) -> bool) -> bool {
        let ids = self.reachable(root);
        let mut val = vec![false; root.index() + 1];
        for id in ids {
            let v = match self.get(id) {
                ExprNode::Const(b) => *b,
                ExprNode::Var(x) => assignment(*x),
                ExprNode::Not(c) => !val[c.index()],
                ExprNode::Buff(c) => val[c.index()],
                ExprNode::And(cs) => cs.iter().all(|c| val[c.index()]),
                ExprNode::Or(cs) => cs.iter().any(|c| val[c.index()]),
                ExprNode::Nand(cs) => !cs.iter().all(|c| val[c.index()]),
                ExprNode::Nor(cs) => !cs.iter().any(|c| val[c.index()]),
                ExprNode::Xor([a, b]) => val[a.index()] ^ val[b.index()],
                ExprNode::Xnor([a, b]) => val[a.index()] == val[b.index()],
            };
            val[id.index()] = v;
        }
        val[root.index()]
    }

    /// Copies the sub-DAG rooted at `root` from `other` into `self`,
    /// remapping variables with `map_var`. Sharing inside the copied
    /// region is preserved.
    pub fn import(
        &mut self,
        other: &ExprPool,
        root: ExprId,
        map_var: &dyn Fn(VarId) -> VarId,
    ) -> ExprId {
        let mut remap = std::collections::HashMap::new();
        for id in other.reachable(root) {
            let m = |c: &ExprId| remap[c];
            let node = match other.get(id) {
                ExprNode::Const(b) => ExprNode::Const(*b),
                ExprNode::Var(v) => ExprNode::Var(map_var(*v)),
                ExprNode::Not(c) => ExprNode::Not(m(c)),
                ExprNode::Buff(c) => ExprNode::Buff(m(c)),
                ExprNode::And(cs) => ExprNode::And(cs.iter().map(m).collect()),
                ExprNode::Or(cs) => ExprNode::Or(cs.iter().map(m).collect()),
                ExprNode::Nand(cs) => ExprNode::Nand(cs.iter().map(m).collect()),
                ExprNode::Nor(cs) => ExprNode::Nor(cs.iter().map(m).collect()),
                ExprNode::Xor([a, b]) => ExprNode::Xor([m(a), m(b)]),
                ExprNode::Xnor([a, b]) => ExprNode::Xnor([m(a), m(b)]),
            };
            let new_id = self.push(node);
            remap.insert(id, new_id);
        }
        remap[&root]
    }
}

/// Owned tree form of an expression, used for structural comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprTree {
    Const(bool),
    Var(VarId),
    Not(Box<ExprTree>),
    And(Vec<ExprTree>),
    Or(Vec<ExprTree>),
    Nand(Vec<ExprTree>),
    Nor(Vec<ExprTree>),
    Xor(Box<ExprTree>, Box<ExprTree>),
    Xnor(Box<ExprTree>, Box<ExprTree>),
    Buff(Box<ExprTree>),
}

impl ExprTree {
    pub fn from_pool(pool: &ExprPool, id: ExprId) -> Self {
        let rec = |c: &ExprId| ExprTree::from_pool(pool, *c);
        match pool.get(id) {
            ExprNode::Const(b) => ExprTree::Const(*b),
            ExprNode::Var(v) => ExprTree::Var(*v),
            ExprNode::Not(c) => ExprTree::Not(Box::new(rec(c))),
            ExprNode::Buff(c) => ExprTree::Buff(Box::new(rec(c))),
            ExprNode::And(cs) => ExprTree::And(cs.iter().map(rec).collect()),
            ExprNode::Or(cs) => ExprTree::Or(cs.iter().map(rec).collect()),
            ExprNode::Nand(cs) => ExprTree::Nand(cs.iter().map(rec).collect()),
            ExprNode::Nor(cs) => ExprTree::Nor(cs.iter().map(rec).collect()),
            ExprNode::Xor([a, b]) => ExprTree::Xor(Box::new(rec(a)), Box::new(rec(b))),
            ExprNode::Xnor([a, b]) => ExprTree::Xnor(Box::new(rec(a)), Box::new(rec(b))),
        }
    }

    /// Inserts the tree into a pool without sharing.
    pub fn into_pool(&self, pool: &mut ExprPool) -> ExprId {
        match self {
            ExprTree::Const(b) => pool.constant(*b),
            ExprTree::Var(v) => pool.var(*v),
            ExprTree::Not(c) => {
                let c = c.into_pool(pool);
                pool.not(c)
            }
            ExprTree::Buff(c) => {
                let c = c.into_pool(pool);
                pool.buff(c)
            }
            ExprTree::And(cs) => {
                let cs = cs.iter().map(|c| c.into_pool(pool)).collect();
                pool.and(cs)
            }
            ExprTree::Or(cs) => {
                let cs = cs.iter().map(|c| c.into_pool(pool)).collect();
                pool.or(cs)
            }
            ExprTree::Nand(cs) => {
                let cs = cs.iter().map(|c| c.into_pool(pool)).collect();
                pool.nand(cs)
            }
            ExprTree::Nor(cs) => {
                let cs = cs.iter().map(|c| c.into_pool(pool)).collect();
                pool.nor(cs)
            }
            ExprTree::Xor(a, b) => {
                let a = a.into_pool(pool);
                let b = b.into_pool(pool);
                pool.xor(a, b)
            }
            ExprTree::Xnor(a, b) => {
                let a = a.into_pool(pool);
                let b = b.into_pool(pool);
                pool.xnor(a, b)
            }
        }
    }
}
