use super::{expand_order, BddError, BddManager, Env, ExprMemo, NodeId, VariableOrder, DEFAULT_NODE_CAP};
use crate::model::Model;

/// The shared multi-rooted BDD of the initial-state predicate and every
/// per-variable transition relation `T_i = (v_i' == NS_i)`.
pub struct MBdd {
    manager: BddManager,
    /// Init predicate first, then `T_i` for each state variable in index order.
    roots: Vec<NodeId>,
    node_count: usize,
}

impl MBdd {
    pub fn manager(&self) -> &BddManager {
        &self.manager
    }

    pub fn roots(&self) -> &[NodeId] {
        &self.roots
    }

    pub fn init_root(&self) -> NodeId {
        self.roots[0]
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }
}

pub fn build_mbdd(m: &Model, order: &VariableOrder, cap: usize) -> Result<MBdd, BddError> {
    let slots = expand_order(order, m)?;
    let mut mgr = BddManager::with_cap(slots, cap);
    let mut memo = ExprMemo::default();

    let mut init = NodeId::ONE;
    // conjoin bottom-up so each step only adds one node above the rest
    let mut state: Vec<_> = m.state_vars().collect();
    state.sort_by_key(|&v| std::cmp::Reverse(mgr.slots().present(v)));
    for v in state {
        let x = mgr.ith_var(mgr.slots().present(v))?;
        let lit = if m.init(v) { x } else { mgr.not(x)? };
        init = mgr.and(lit, init)?;
    }

    let mut roots = vec![init];
    for v in m.state_vars() {
        let ns = mgr.build_expr_memo(m.pool(), m.next(v).expect("state variable"), Env::Present, &mut memo)?;
        let primed = mgr.ith_var(mgr.slots().next(v).expect("state variable"))?;
        roots.push(mgr.xnor(primed, ns)?);
    }
    let node_count = mgr.count_reachable(&roots);
    Ok(MBdd {
        manager: mgr,
        roots,
        node_count,
    })
}

/// One scored order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvaluatedOrder {
    pub order: VariableOrder,
    pub node_count: usize,
}

impl EvaluatedOrder {
    /// `1 / node_count`; an all-terminal M-BDD scores infinity.
    pub fn utility(&self) -> f64 {
        if self.node_count == 0 {
            f64::INFINITY
        } else {
            1.0 / self.node_count as f64
        }
    }
}

pub fn evaluate_order(m: &Model, order: &VariableOrder) -> Result<EvaluatedOrder, BddError> {
    evaluate_order_with_cap(m, order, DEFAULT_NODE_CAP)
}

pub fn evaluate_order_with_cap(m: &Model, order: &VariableOrder, cap: usize) -> Result<EvaluatedOrder, BddError> {
    let b = build_mbdd(m, order, cap)?;
    Ok(EvaluatedOrder {
        order: order.clone(),
        node_count: b.node_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_native;
    use crate::model::tests::counter;

    #[test]
    fn identity_relation_has_three_nodes() {
        let m = parse_native("var a\nnext a := a\n").unwrap();
        let b = build_mbdd(&m, &VariableOrder::identity(1), DEFAULT_NODE_CAP).unwrap();
        // without complement edges a' and !a' are distinct children of a
        let t = b.roots()[1];
        assert_eq!(b.manager().count_reachable(&[t]), 3);
        let (slot, _, _) = b.manager().node(t).unwrap();
        assert_eq!(slot, 0);
    }

    #[test]
    fn counter_t0_has_three_nodes() {
        let m = counter();
        let b = build_mbdd(&m, &VariableOrder::new(vec![2, 1, 0], 3).unwrap(), DEFAULT_NODE_CAP).unwrap();
        assert_eq!(b.roots().len(), 4);
        assert_eq!(b.manager().count_reachable(&[b.roots()[1]]), 3);
    }

    #[test]
    fn evaluation_is_deterministic() {
        let m = counter();
        let o = VariableOrder::new(vec![0, 2, 1], 3).unwrap();
        assert_eq!(evaluate_order(&m, &o).unwrap(), evaluate_order(&m, &o).unwrap());
    }

    #[test]
    fn cap_failure_is_reported() {
        let m = counter();
        let o = VariableOrder::identity(3);
        assert_eq!(evaluate_order_with_cap(&m, &o, 2), Err(BddError::NodeCap(2)));
    }

    #[test]
    fn constant_model_scores_infinity() {
        let m = parse_native("input i\n").unwrap();
        let e = evaluate_order(&m, &VariableOrder::identity(1)).unwrap();
        assert_eq!(e.node_count, 0);
        assert!(e.utility().is_infinite());
    }
}
