use rayon::prelude::*;

use super::{LearnError, TrainConfig};
use crate::baselines::random_order;
use crate::bdd::{evaluate_order_with_cap, BddError, EvaluatedOrder};
use crate::model::{Model, VarId};
use crate::seed::derive_labeled;

/// Evaluated orders of one model, with per-order variable positions cached
/// for partitioning.
#[derive(Clone, Debug)]
pub struct OrderSample {
    orders: Vec<EvaluatedOrder>,
    positions: Vec<Vec<usize>>,
}

impl OrderSample {
    pub fn new(orders: Vec<EvaluatedOrder>) -> Self {
        let positions = orders.iter().map(|e| e.order.positions()).collect();
        Self { orders, positions }
    }

    pub fn orders(&self) -> &[EvaluatedOrder] {
        &self.orders
    }

    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }

    /// The first `k` orders, as used by learning curves.
    pub fn prefix(&self, k: usize) -> OrderSample {
        let k = k.min(self.orders.len());
        Self {
            orders: self.orders[..k].to_vec(),
            positions: self.positions[..k].to_vec(),
        }
    }

    pub fn counts(&self) -> Vec<f64> {
        self.orders.iter().map(|e| e.node_count as f64).collect()
    }

    pub fn position(&self, order_index: usize, v: VarId) -> usize {
        self.positions[order_index][v]
    }

    /// Node counts of orders with `a` before `b`, and with `b` before `a`.
    pub fn partition(&self, a: VarId, b: VarId) -> (Vec<f64>, Vec<f64>) {
        let mut first = Vec::new();
        let mut second = Vec::new();
        for (e, pos) in self.orders.iter().zip(&self.positions) {
            if pos[a] < pos[b] {
                first.push(e.node_count as f64);
            } else {
                second.push(e.node_count as f64);
            }
        }
        (first, second)
    }

    /// Within orders where `f` precedes both `p` and `q`, the node counts
    /// split by `p` before `q` versus `q` before `p`.
    pub fn partition_given_first(&self, f: VarId, p: VarId, q: VarId) -> (Vec<f64>, Vec<f64>) {
        let mut pq = Vec::new();
        let mut qp = Vec::new();
        for (e, pos) in self.orders.iter().zip(&self.positions) {
            if pos[f] < pos[p] && pos[f] < pos[q] {
                if pos[p] < pos[q] {
                    pq.push(e.node_count as f64);
                } else {
                    qp.push(e.node_count as f64);
                }
            }
        }
        (pq, qp)
    }
}

/// Evaluates `cfg.orders` seeded random orders in parallel. A slot whose
/// order exceeds the node cap is retried with a fresh order.
pub fn generate_and_evaluate(m: &Model, cfg: &TrainConfig) -> Result<OrderSample, LearnError> {
    let evaluated: Vec<Result<EvaluatedOrder, LearnError>> = (0..cfg.orders)
        .into_par_iter()
        .map(|i| {
            for attempt in 0..cfg.retry_cap.max(1) {
                let seed = derive_labeled(cfg.seed, "train-order", &[i as u64, attempt as u64]);
                let order = random_order(m, seed);
                match evaluate_order_with_cap(m, &order, cfg.node_cap) {
                    Ok(e) => return Ok(e),
                    Err(BddError::NodeCap(cap)) => {
                        log::warn!("{}: training order {i} attempt {attempt} exceeded {cap} nodes", m.name());
                    }
                    Err(e) => unreachable!("random orders are permutations: {e}"),
                }
            }
            Err(LearnError::RetryExhausted(i))
        })
        .collect();
    // collect sequentially so the reported failure is always the lowest slot
    let orders = evaluated.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(OrderSample::new(orders))
}
