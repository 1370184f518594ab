//! Boolean state-machine models: variables, next-state functions and the
//! initial state, plus the two textual front ends and the connectivity graph
//! every ordering algorithm works from.

mod bench;
mod expr;
mod graph;
mod native;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

pub use bench::parse_bench;
pub use expr::{ExprId, ExprNode, ExprPool, ExprTree};
pub use graph::{build_connectivity_graph, ConnectivityGraph, GateOp, VertexId, VertexKind};
pub use native::{parse_native, print_native};

use thiserror::Error;

/// Dense variable ordinal, `0..n`.
pub type VarId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarKind {
    State,
    Input,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub index: VarId,
}

impl Variable {
    pub fn is_state(&self) -> bool {
        self.kind == VarKind::State
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("variable name must be nonempty")]
    EmptyName,
    #[error("duplicate declaration of `{0}`")]
    Duplicate(String),
    #[error("state variable `{0}` has no next-state function")]
    MissingNext(String),
    #[error("input `{0}` cannot carry a next-state function")]
    NextOnInput(String),
    #[error("expression references undeclared variable index {0}")]
    UnknownVariable(VarId),
    #[error("expression id {0} is outside the expression pool")]
    UnknownExpr(usize),
    #[error("`{0}` is not a state variable")]
    NotState(String),
}

/// Location-annotated parse failure shared by both text formats.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("undeclared variable `{0}`")]
    Undeclared(String),
    #[error("duplicate declaration of `{0}`")]
    Duplicate(String),
    #[error("state variable `{0}` is missing a `next` clause")]
    MissingNext(String),
    #[error("combinational cycle through `{0}`")]
    CombinationalCycle(String),
    #[error("signal `{0}` is used but never defined")]
    Dangling(String),
    #[error("flip-flop `{dff}` is fed by undefined signal `{signal}`")]
    DffUndefined { dff: String, signal: String },
    #[error("{0}")]
    Model(ModelError),
}

impl ParseError {
    pub(crate) fn new(line: usize, column: usize, kind: ParseErrorKind) -> Self {
        Self { line, column, kind }
    }
}

/// A validated boolean model. Immutable once built.
#[derive(Clone, Debug)]
pub struct Model {
    name: String,
    variables: Vec<Variable>,
    pool: ExprPool,
    next: Vec<Option<ExprId>>,
    init: Vec<bool>,
    by_name: HashMap<String, VarId>,
}

impl Model {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn variable(&self, v: VarId) -> &Variable {
        &self.variables[v]
    }

    pub fn lookup(&self, name: &str) -> Option<VarId> {
        self.by_name.get(name).copied()
    }

    pub fn pool(&self) -> &ExprPool {
        &self.pool
    }

    /// Root of `NS(v)`; `None` for inputs.
    pub fn next(&self, v: VarId) -> Option<ExprId> {
        self.next[v]
    }

    /// Initial value of `v`. Inputs report `false` and are never constrained.
    pub fn init(&self, v: VarId) -> bool {
        self.init[v]
    }

    pub fn state_vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.variables
            .iter()
            .filter(|v| v.is_state())
            .map(|v| v.index)
    }

    pub fn num_state_vars(&self) -> usize {
        self.state_vars().count()
    }

    /// Variables with a varref occurrence in `NS(v)`.
    pub fn support(&self, v: VarId) -> Result<BTreeSet<VarId>, ModelError> {
        let root = self.next[v].ok_or_else(|| ModelError::NotState(self.variables[v].name.clone()))?;
        Ok(self
            .pool
            .reachable(root)
            .into_iter()
            .filter_map(|id| match self.pool.get(id) {
                ExprNode::Var(x) => Some(*x),
                _ => None,
            })
            .collect())
    }

    /// Supports of every state variable, indexed by variable (empty for inputs).
    pub fn supports(&self) -> Vec<BTreeSet<VarId>> {
        (0..self.num_vars())
            .map(|v| self.support(v).unwrap_or_default())
            .collect()
    }

    /// Unordered pairs `(u, w)`, `u < w`, that share the support of some
    /// single next-state function.
    pub fn interacting_pairs(&self) -> BTreeSet<(VarId, VarId)> {
        let mut out = BTreeSet::new();
        for s in self.supports() {
            let vs: Vec<_> = s.into_iter().collect();
            for (i, &a) in vs.iter().enumerate() {
                for &b in &vs[i + 1..] {
                    out.insert((a, b));
                }
            }
        }
        out
    }

    /// Structural equality with expressions compared as trees, so two
    /// models that differ only in pool layout or sharing compare equal.
    pub fn structurally_eq(&self, other: &Model) -> bool {
        if self.name != other.name || self.variables != other.variables {
            return false;
        }
        self.variables.iter().all(|v| {
            let i = v.index;
            if v.is_state() && self.init[i] != other.init[i] {
                return false;
            }
            match (self.next[i], other.next[i]) {
                (None, None) => true,
                (Some(a), Some(b)) => {
                    ExprTree::from_pool(&self.pool, a) == ExprTree::from_pool(&other.pool, b)
                }
                _ => false,
            }
        })
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_native(self))
    }
}

/// Incremental construction of a [`Model`].
#[derive(Clone, Debug, Default)]
pub struct ModelBuilder {
    name: String,
    variables: Vec<Variable>,
    pool: ExprPool,
    next: Vec<Option<ExprId>>,
    init: Vec<bool>,
}

impl ModelBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    fn declare(&mut self, name: impl Into<String>, kind: VarKind) -> VarId {
        let index = self.variables.len();
        self.variables.push(Variable {
            name: name.into(),
            kind,
            index,
        });
        self.next.push(None);
        self.init.push(false);
        index
    }

    pub fn state(&mut self, name: impl Into<String>) -> VarId {
        self.declare(name, VarKind::State)
    }

    pub fn input(&mut self, name: impl Into<String>) -> VarId {
        self.declare(name, VarKind::Input)
    }

    pub fn pool(&mut self) -> &mut ExprPool {
        &mut self.pool
    }

    pub fn kind(&self, v: VarId) -> VarKind {
        self.variables[v].kind
    }

    pub fn set_next(&mut self, v: VarId, e: ExprId) -> &mut Self {
        self.next[v] = Some(e);
        self
    }

    pub fn set_init(&mut self, v: VarId, value: bool) -> &mut Self {
        self.init[v] = value;
        self
    }

    pub fn build(self) -> Result<Model, ModelError> {
        let mut by_name = HashMap::new();
        for v in &self.variables {
            if v.name.is_empty() {
                return Err(ModelError::EmptyName);
            }
            if by_name.insert(v.name.clone(), v.index).is_some() {
                return Err(ModelError::Duplicate(v.name.clone()));
            }
        }
        for v in &self.variables {
            match (v.kind, self.next[v.index]) {
                (VarKind::State, None) => return Err(ModelError::MissingNext(v.name.clone())),
                (VarKind::Input, Some(_)) => return Err(ModelError::NextOnInput(v.name.clone())),
                (_, Some(e)) if e.index() >= self.pool.len() => {
                    return Err(ModelError::UnknownExpr(e.index()))
                }
                _ => {}
            }
        }
        for (_, node) in self.pool.iter() {
            if let ExprNode::Var(x) = node {
                if *x >= self.variables.len() {
                    return Err(ModelError::UnknownVariable(*x));
                }
            }
        }
        let mut init = self.init;
        for v in &self.variables {
            if !v.is_state() {
                init[v.index] = false;
            }
        }
        Ok(Model {
            name: self.name,
            variables: self.variables,
            pool: self.pool,
            next: self.next,
            init,
            by_name,
        })
    }
}
