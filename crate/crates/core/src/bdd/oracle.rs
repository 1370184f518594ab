//! Reference node counter that never touches the apply path.
//!
//! Each root is evaluated into an explicit truth table (one bit per total
//! assignment, slot 0 as the most significant index bit), the complete
//! decision tree over that table is reduced bottom-up into a private unique
//! table, and the count is the size of that table.

use std::collections::HashMap;

use super::{BddError, VariableOrder};
use crate::model::{ExprId, ExprNode, ExprPool, Model, VarId};

pub const MAX_SLOTS: usize = 24;

/// Counts distinct non-terminals of the shared reduced DAG of `roots`.
/// Variable `x` in `pool` is interpreted as slot `x`; `num_slots` bounds them.
pub fn truth_table_oracle(pool: &ExprPool, roots: &[ExprId], num_slots: usize) -> Result<usize, BddError> {
    if num_slots > MAX_SLOTS {
        return Err(BddError::TooManySlots(num_slots));
    }
    let mut table: HashMap<(usize, u32, u32), u32> = HashMap::new();
    for &r in roots {
        let bits = truth_table(pool, r, num_slots);
        reduce(&bits, num_slots, &mut table);
    }
    Ok(table.len())
}

type Bits = Vec<u64>;

fn words(num_slots: usize) -> usize {
    (1usize << num_slots).div_ceil(64)
}

fn get_bit(bits: &Bits, i: usize) -> bool {
    bits[i / 64] >> (i % 64) & 1 == 1
}

/// Truth table of `root` as a bit vector indexed by assignment.
fn truth_table(pool: &ExprPool, root: ExprId, k: usize) -> Bits {
    let w = words(k);
    let rows = 1usize << k;
    let mut val: HashMap<ExprId, Bits> = HashMap::new();
    for id in pool.reachable(root) {
        let bits: Bits = match pool.get(id) {
            ExprNode::Const(b) => vec![if *b { u64::MAX } else { 0 }; w],
            ExprNode::Var(x) => {
                assert!(*x < k, "variable {x} outside {k} slots");
                let shift = k - 1 - *x;
                let mut out = vec![0u64; w];
                for i in 0..rows {
                    if (i >> shift) & 1 == 1 {
                        out[i / 64] |= 1 << (i % 64);
                    }
                }
                out
            }
            ExprNode::Not(c) => val[c].iter().map(|x| !x).collect(),
            ExprNode::Buff(c) => val[c].clone(),
            ExprNode::And(cs) => fold(&val, cs, u64::MAX, |a, b| a & b),
            ExprNode::Or(cs) => fold(&val, cs, 0, |a, b| a | b),
            ExprNode::Nand(cs) => fold(&val, cs, u64::MAX, |a, b| a & b).into_iter().map(|x| !x).collect(),
            ExprNode::Nor(cs) => fold(&val, cs, 0, |a, b| a | b).into_iter().map(|x| !x).collect(),
            ExprNode::Xor([a, b]) => val[a].iter().zip(&val[b]).map(|(x, y)| x ^ y).collect(),
            ExprNode::Xnor([a, b]) => val[a].iter().zip(&val[b]).map(|(x, y)| !(x ^ y)).collect(),
        };
        val.insert(id, bits);
    }
    val.remove(&root).expect("root evaluated")
}

fn fold(val: &HashMap<ExprId, Bits>, cs: &[ExprId], unit: u64, f: impl Fn(u64, u64) -> u64) -> Bits {
    let w = val[&cs[0]].len();
    let mut acc = vec![unit; w];
    for c in cs {
        for (a, b) in acc.iter_mut().zip(&val[c]) {
            *a = f(*a, *b);
        }
    }
    acc
}

/// Reduces the complete tree of `bits` into `table`. Terminal ids are 0 and
/// 1; internal ids start at 2.
fn reduce(bits: &Bits, k: usize, table: &mut HashMap<(usize, u32, u32), u32>) -> u32 {
    let mut level: Vec<u32> = (0..1usize << k).map(|i| get_bit(bits, i) as u32).collect();
    for slot in (0..k).rev() {
        let mut up = Vec::with_capacity(level.len() / 2);
        for pair in level.chunks(2) {
            let (low, high) = (pair[0], pair[1]);
            if low == high {
                up.push(low);
            } else {
                let next = table.len() as u32 + 2;
                up.push(*table.entry((slot, low, high)).or_insert(next));
            }
        }
        level = up;
    }
    level[0]
}

/// Oracle count of a model's M-BDD under `order`, with its own slot
/// layout and its own encoding of the init predicate and `T_i`.
pub fn mbdd_count(m: &Model, order: &VariableOrder) -> Result<usize, BddError> {
    let mut present = vec![usize::MAX; m.num_vars()];
    let mut primed = vec![usize::MAX; m.num_vars()];
    let mut k = 0;
    for &v in order.as_slice() {
        present[v] = k;
        k += 1;
        if m.variable(v).is_state() {
            primed[v] = k;
            k += 1;
        }
    }
    let mut pool = ExprPool::new();
    let mut roots = Vec::new();
    let mut lits = Vec::new();
    for v in m.state_vars() {
        let x = pool.var(present[v]);
        lits.push(if m.init(v) { x } else { pool.not(x) });
    }
    roots.push(match lits.len() {
        0 => pool.constant(true),
        1 => lits[0],
        _ => pool.and(lits),
    });
    for v in m.state_vars() {
        let map = |x: VarId| present[x];
        let ns = pool.import(m.pool(), m.next(v).expect("state variable"), &map);
        let p = pool.var(primed[v]);
        roots.push(pool.xnor(p, ns));
    }
    truth_table_oracle(&pool, &roots, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjunction() {
        let mut p = ExprPool::new();
        let x = p.var(0);
        let y = p.var(1);
        let e = p.and(vec![x, y]);
        assert_eq!(truth_table_oracle(&p, &[e], 2).unwrap(), 2);
    }

    #[test]
    fn single_variable_functions() {
        let mut p = ExprPool::new();
        let x = p.var(0);
        let nx = p.not(x);
        let t = p.constant(true);
        for e in [x, nx, t] {
            assert!(truth_table_oracle(&p, &[e], 1).unwrap() <= 1);
        }
    }

    #[test]
    fn slot_limit() {
        let mut p = ExprPool::new();
        let t = p.constant(true);
        assert_eq!(truth_table_oracle(&p, &[t], 25), Err(BddError::TooManySlots(25)));
    }
}
