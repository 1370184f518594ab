use std::collections::HashSet;

use super::BddError;
use crate::model::{Model, VarId};

/// A permutation of a model's variables, earliest first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VariableOrder(Vec<VarId>);

impl VariableOrder {
    /// Checks that `vars` is a permutation of `0..n`.
    pub fn new(vars: Vec<VarId>, n: usize) -> Result<Self, BddError> {
        if vars.len() != n {
            return Err(BddError::WrongLength {
                expected: n,
                got: vars.len(),
            });
        }
        let mut seen = vec![false; n];
        for &v in &vars {
            if v >= n {
                return Err(BddError::OutOfRange(v));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(BddError::DuplicateInOrder(v));
            }
        }
        Ok(Self(vars))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn as_slice(&self) -> &[VarId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<VarId> {
        self.0
    }

    /// `position[v]` is the index of `v` in the order.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.0.len()];
        for (i, &v) in self.0.iter().enumerate() {
            pos[v] = i;
        }
        pos
    }

    pub fn reversed(&self) -> Self {
        Self(self.0.iter().rev().copied().collect())
    }
}

/// Present and next-state slots of every variable under one order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotAssignment {
    present: Vec<u32>,
    next: Vec<Option<u32>>,
    total: u32,
}

impl SlotAssignment {
    pub fn present(&self, v: VarId) -> u32 {
        self.present[v]
    }

    pub fn next(&self, v: VarId) -> Option<u32> {
        self.next[v]
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn num_vars(&self) -> usize {
        self.present.len()
    }

    /// One slot per variable in order, for expressions without primed twins.
    pub fn inputs_only(order: &VariableOrder) -> Self {
        let n = order.len();
        let mut present = vec![0; n];
        for (slot, &v) in order.as_slice().iter().enumerate() {
            present[v] = slot as u32;
        }
        Self {
            present,
            next: vec![None; n],
            total: n as u32,
        }
    }
}

pub fn expand_order(order: &VariableOrder, m: &Model) -> Result<SlotAssignment, BddError> {
    let n = m.num_vars();
    if order.len() != n {
        return Err(BddError::WrongLength {
            expected: n,
            got: order.len(),
        });
    }
    let mut present = vec![0; n];
    let mut next = vec![None; n];
    let mut slot = 0u32;
    for &v in order.as_slice() {
        present[v] = slot;
        slot += 1;
        if m.variable(v).is_state() {
            next[v] = Some(slot);
            slot += 1;
        }
    }
    Ok(SlotAssignment {
        present,
        next,
        total: slot,
    })
}

/// Reads an order file: one present-state variable name per line, blank
/// lines and `#` comments ignored.
pub fn parse_order(text: &str, m: &Model) -> Result<VariableOrder, BddError> {
    let mut vars = Vec::with_capacity(m.num_vars());
    let mut seen = HashSet::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v = m
            .lookup(line)
            .ok_or_else(|| BddError::UnknownName(line.to_string()))?;
        if !seen.insert(v) {
            return Err(BddError::DuplicateInOrder(v));
        }
        vars.push(v);
    }
    if let Some(missing) = m.variables().iter().find(|v| !seen.contains(&v.index)) {
        return Err(BddError::MissingName(missing.name.clone()));
    }
    VariableOrder::new(vars, m.num_vars())
}

pub fn format_order(order: &VariableOrder, m: &Model) -> String {
    let mut out = String::new();
    for &v in order.as_slice() {
        out.push_str(&m.variable(v).name);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_native;
    use crate::model::tests::counter;

    #[test]
    fn counter_slots_pair_present_and_next() {
        let m = counter();
        let o = VariableOrder::new(vec![2, 1, 0], 3).unwrap();
        let s = expand_order(&o, &m).unwrap();
        assert_eq!((s.present(2), s.next(2)), (0, Some(1)));
        assert_eq!((s.present(1), s.next(1)), (2, Some(3)));
        assert_eq!((s.present(0), s.next(0)), (4, Some(5)));
        assert_eq!(s.total(), 6);
    }

    #[test]
    fn inputs_take_one_slot() {
        let m = parse_native("var s\ninput i\nnext s := s & i\n").unwrap();
        let o = VariableOrder::new(vec![1, 0], 2).unwrap();
        let s = expand_order(&o, &m).unwrap();
        assert_eq!(s.present(1), 0);
        assert_eq!(s.next(1), None);
        assert_eq!((s.present(0), s.next(0)), (1, Some(2)));
    }

    #[test]
    fn non_permutations_rejected() {
        assert_eq!(
            VariableOrder::new(vec![0, 0, 1], 3),
            Err(BddError::DuplicateInOrder(0))
        );
        assert!(VariableOrder::new(vec![0, 1], 3).is_err());
        assert_eq!(VariableOrder::new(vec![0, 3, 1], 3), Err(BddError::OutOfRange(3)));
    }

    #[test]
    fn order_file_round_trip() {
        let m = counter();
        let o = VariableOrder::new(vec![1, 2, 0], 3).unwrap();
        let text = format_order(&o, &m);
        assert_eq!(text, "v1\nv2\nv0\n");
        assert_eq!(parse_order(&format!("# header\n{text}\n"), &m).unwrap(), o);
        assert!(matches!(parse_order("v1\nv2\n", &m), Err(BddError::MissingName(_))));
        assert!(matches!(parse_order("v1\nv1\nv0\nv2\n", &m), Err(BddError::DuplicateInOrder(1))));
    }
}
