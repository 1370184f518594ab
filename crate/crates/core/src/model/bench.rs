//! ISCAS89-style `.bench` netlists.
//!
//! Flip-flop outputs become state variables whose next-state function is the
//! combinational cone feeding the flip-flop; `INPUT` lines become input
//! variables. `OUTPUT` lines are checked for dangling references and
//! otherwise ignored. Netlist gates map one-to-one onto shared expression
//! nodes.

use std::collections::HashMap;

use super::{ExprId, ExprPool, Model, ModelBuilder, ParseError, ParseErrorKind, VarId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Gate {
    And,
    Or,
    Nand,
    Nor,
    Xor,
    Xnor,
    Not,
    Buff,
    Dff,
}

impl Gate {
    fn parse(name: &str) -> Option<Gate> {
        Some(match name.to_ascii_uppercase().as_str() {
            "AND" => Gate::And,
            "OR" => Gate::Or,
            "NAND" => Gate::Nand,
            "NOR" => Gate::Nor,
            "XOR" => Gate::Xor,
            "XNOR" => Gate::Xnor,
            "NOT" => Gate::Not,
            "BUFF" | "BUF" => Gate::Buff,
            "DFF" => Gate::Dff,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug)]
struct Def {
    gate: Gate,
    fanin: Vec<String>,
    line: usize,
    col: usize,
}

#[derive(Clone, Copy, Debug)]
enum Signal {
    Input(VarId),
    State(VarId),
    Gate(usize),
}

fn is_signal_char(c: char) -> bool {
    !c.is_whitespace() && !matches!(c, '(' | ')' | ',' | '=' | '#')
}

struct Line<'a> {
    no: usize,
    text: &'a str,
}

impl Line<'_> {
    fn err(&self, col: usize, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.no, col, ParseErrorKind::Syntax(msg.into()))
    }

    fn col_of(&self, sub: &str) -> usize {
        // sub is always a slice of self.text
        let offset = sub.as_ptr() as usize - self.text.as_ptr() as usize;
        self.text[..offset].chars().count() + 1
    }

    fn signal<'s>(&self, s: &'s str) -> Result<&'s str, ParseError> {
        let t = s.trim();
        if t.is_empty() || !t.chars().all(is_signal_char) {
            return Err(self.err(self.col_of(s), format!("invalid signal name `{t}`")));
        }
        Ok(t)
    }

    /// Splits `NAME(args)` into the name and the comma-separated arguments.
    fn call<'s>(&self, s: &'s str) -> Result<(&'s str, Vec<&'s str>), ParseError> {
        let open = s
            .find('(')
            .ok_or_else(|| self.err(self.col_of(s), "expected `(`"))?;
        let close = s
            .rfind(')')
            .ok_or_else(|| self.err(self.col_of(s) + s.len(), "expected `)`"))?;
        if close < open || !s[close + 1..].trim().is_empty() {
            return Err(self.err(self.col_of(&s[close..]), "unexpected text after `)`"));
        }
        let head = s[..open].trim();
        let inner = &s[open + 1..close];
        let args = if inner.trim().is_empty() {
            Vec::new()
        } else {
            inner.split(',').collect()
        };
        Ok((head, args))
    }
}

/// Parses a `.bench` netlist. Variables are numbered in order of their
/// `INPUT` and `DFF` lines; the initial state is all-zero.
pub fn parse_bench(text: &str) -> Result<Model, ParseError> {
    let mut order: Vec<(String, bool, usize, usize)> = Vec::new(); // (name, is_state, line, col)
    let mut defs: HashMap<String, Def> = HashMap::new();
    let mut gate_order: Vec<String> = Vec::new();
    let mut outputs: Vec<(String, usize, usize)> = Vec::new();
    let mut inputs_seen: HashMap<String, (usize, usize)> = HashMap::new();
    let mut name = String::from("bench");

    for (idx, raw) in text.lines().enumerate() {
        let line = Line { no: idx + 1, text: raw };
        let body = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        if idx == 0 {
            if let Some(p) = raw.find('#') {
                let comment = raw[p + 1..].trim();
                if !comment.is_empty() && comment.chars().all(is_signal_char) {
                    name = comment.to_string();
                }
            }
        }
        if body.trim().is_empty() {
            continue;
        }
        if let Some(eq) = body.find('=') {
            let lhs = line.signal(&body[..eq])?;
            let rhs = &body[eq + 1..];
            let (head, args) = line.call(rhs)?;
            let gate = Gate::parse(head)
                .ok_or_else(|| line.err(line.col_of(rhs.trim_start()), format!("unknown gate `{head}`")))?;
            let fanin = args
                .iter()
                .map(|a| line.signal(a).map(str::to_string))
                .collect::<Result<Vec<_>, _>>()?;
            let col = line.col_of(body.trim_start());
            let arity_ok = match gate {
                Gate::Dff | Gate::Not | Gate::Buff => fanin.len() == 1,
                _ => !fanin.is_empty(),
            };
            if !arity_ok {
                return Err(line.err(col, format!("wrong number of operands for {head}")));
            }
            if defs.contains_key(lhs) || inputs_seen.contains_key(lhs) {
                return Err(ParseError::new(line.no, col, ParseErrorKind::Duplicate(lhs.to_string())));
            }
            if gate == Gate::Dff {
                order.push((lhs.to_string(), true, line.no, col));
            } else {
                gate_order.push(lhs.to_string());
            }
            defs.insert(
                lhs.to_string(),
                Def {
                    gate,
                    fanin,
                    line: line.no,
                    col,
                },
            );
        } else {
            let (head, args) = line.call(body)?;
            let col = line.col_of(body.trim_start());
            if args.len() != 1 {
                return Err(line.err(col, "expected exactly one signal"));
            }
            let sig = line.signal(args[0])?.to_string();
            match head.to_ascii_uppercase().as_str() {
                "INPUT" => {
                    if defs.contains_key(&sig) || inputs_seen.contains_key(&sig) {
                        return Err(ParseError::new(line.no, col, ParseErrorKind::Duplicate(sig)));
                    }
                    inputs_seen.insert(sig.clone(), (line.no, col));
                    order.push((sig, false, line.no, col));
                }
                "OUTPUT" => outputs.push((sig, line.no, col)),
                other => return Err(line.err(col, format!("unknown directive `{other}`"))),
            }
        }
    }

    let mut builder = ModelBuilder::new(name);
    let mut signals: HashMap<String, Signal> = HashMap::new();
    for (n, is_state, _, _) in &order {
        let v = if *is_state {
            builder.state(n.clone())
        } else {
            builder.input(n.clone())
        };
        signals.insert(n.clone(), if *is_state { Signal::State(v) } else { Signal::Input(v) });
    }
    for (i, g) in gate_order.iter().enumerate() {
        signals.insert(g.clone(), Signal::Gate(i));
    }

    // every reference must resolve
    for (n, is_state, _, _) in &order {
        if !*is_state {
            continue;
        }
        let d = &defs[n];
        if !signals.contains_key(&d.fanin[0]) {
            return Err(ParseError::new(
                d.line,
                d.col,
                ParseErrorKind::DffUndefined {
                    dff: n.clone(),
                    signal: d.fanin[0].clone(),
                },
            ));
        }
    }
    for g in &gate_order {
        let d = &defs[g];
        if let Some(missing) = d.fanin.iter().find(|f| !signals.contains_key(*f)) {
            return Err(ParseError::new(d.line, d.col, ParseErrorKind::Dangling(missing.clone())));
        }
    }
    for (o, line, col) in &outputs {
        if !signals.contains_key(o) {
            return Err(ParseError::new(*line, *col, ParseErrorKind::Dangling(o.clone())));
        }
    }

    // combinational cycle check over all gates, iterative three-colour DFS
    let gate_fanin: Vec<Vec<usize>> = gate_order
        .iter()
        .map(|g| {
            defs[g]
                .fanin
                .iter()
                .filter_map(|f| match signals[f] {
                    Signal::Gate(j) => Some(j),
                    _ => None,
                })
                .collect()
        })
        .collect();
    let topo = topological_gates(&gate_fanin).map_err(|g| {
        let d = &defs[&gate_order[g]];
        ParseError::new(d.line, d.col, ParseErrorKind::CombinationalCycle(gate_order[g].clone()))
    })?;

    // lower gates in topological order so operands precede consumers; only
    // gates in some flip-flop's cone are materialized
    let mut needed = vec![false; gate_order.len()];
    let mut stack: Vec<usize> = order
        .iter()
        .filter(|o| o.1)
        .filter_map(|(n, _, _, _)| match signals[&defs[n].fanin[0]] {
            Signal::Gate(j) => Some(j),
            _ => None,
        })
        .collect();
    while let Some(g) = stack.pop() {
        if !needed[g] {
            needed[g] = true;
            stack.extend(gate_fanin[g].iter().copied());
        }
    }

    let mut var_expr: HashMap<VarId, ExprId> = HashMap::new();
    let mut gate_expr: Vec<Option<ExprId>> = vec![None; gate_order.len()];
    let operand = |pool: &mut ExprPool,
                   var_expr: &mut HashMap<VarId, ExprId>,
                   gate_expr: &[Option<ExprId>],
                   sig: &str|
     -> ExprId {
        match signals[sig] {
            Signal::Input(v) | Signal::State(v) => *var_expr.entry(v).or_insert_with(|| pool.var(v)),
            Signal::Gate(j) => gate_expr[j].expect("topological order"),
        }
    };
    for g in topo {
        if !needed[g] {
            continue;
        }
        let d = &defs[&gate_order[g]];
        let ops: Vec<ExprId> = d
            .fanin
            .iter()
            .map(|f| operand(builder.pool(), &mut var_expr, &gate_expr, f))
            .collect();
        let pool = builder.pool();
        let id = match (d.gate, ops.len()) {
            (Gate::Not, _) => pool.not(ops[0]),
            (Gate::Buff, _) => pool.buff(ops[0]),
            (Gate::And | Gate::Or | Gate::Xor, 1) => pool.buff(ops[0]),
            (Gate::Nand | Gate::Nor | Gate::Xnor, 1) => pool.not(ops[0]),
            (Gate::And, _) => pool.and(ops),
            (Gate::Or, _) => pool.or(ops),
            (Gate::Nand, _) => pool.nand(ops),
            (Gate::Nor, _) => pool.nor(ops),
            (Gate::Xor, _) => {
                let mut acc = ops[0];
                for &o in &ops[1..] {
                    acc = pool.xor(acc, o);
                }
                acc
            }
            (Gate::Xnor, _) => {
                // xnor(a, b, c) = !(a ^ b ^ c); binary case maps directly
                let mut acc = ops[0];
                for &o in &ops[1..ops.len() - 1] {
                    acc = pool.xor(acc, o);
                }
                pool.xnor(acc, ops[ops.len() - 1])
            }
            (Gate::Dff, _) => unreachable!("flip-flops are not combinational gates"),
        };
        gate_expr[g] = Some(id);
    }
    for (n, is_state, _, _) in &order {
        if !*is_state {
            continue;
        }
        let v = match signals[n] {
            Signal::State(v) => v,
            _ => unreachable!(),
        };
        let root = operand(builder.pool(), &mut var_expr, &gate_expr, &defs[n].fanin[0]);
        builder.set_next(v, root);
    }
    builder
        .build()
        .map_err(|e| ParseError::new(0, 0, ParseErrorKind::Model(e)))
}

/// Kahn-free DFS topological sort; `Err(g)` names a gate on a cycle.
fn topological_gates(fanin: &[Vec<usize>]) -> Result<Vec<usize>, usize> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        White,
        Grey,
        Black,
    }
    let mut mark = vec![Mark::White; fanin.len()];
    let mut out = Vec::with_capacity(fanin.len());
    for start in 0..fanin.len() {
        if mark[start] != Mark::White {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        mark[start] = Mark::Grey;
        while let Some(&mut (g, ref mut next)) = stack.last_mut() {
            if *next < fanin[g].len() {
                let c = fanin[g][*next];
                *next += 1;
                match mark[c] {
                    Mark::White => {
                        mark[c] = Mark::Grey;
                        stack.push((c, 0));
                    }
                    Mark::Grey => return Err(c),
                    Mark::Black => {}
                }
            } else {
                mark[g] = Mark::Black;
                out.push(g);
                stack.pop();
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ExprNode, ExprTree, VarKind};

    #[test]
    fn one_gate_netlist() {
        let m = parse_bench("INPUT(i)\ns = DFF(g)\ng = AND(i, s)\n").unwrap();
        assert_eq!(m.num_vars(), 2);
        assert_eq!(m.variable(0).kind, VarKind::Input);
        assert_eq!(m.variable(1).kind, VarKind::State);
        let t = ExprTree::from_pool(m.pool(), m.next(1).unwrap());
        assert_eq!(t, ExprTree::And(vec![ExprTree::Var(0), ExprTree::Var(1)]));
    }

    #[test]
    fn self_loop_is_a_cycle() {
        let err = parse_bench("INPUT(a)\ns = DFF(g)\ng = AND(a, g)\n").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::CombinationalCycle(_)));
    }

    #[test]
    fn longer_cycle_detected() {
        let err = parse_bench("INPUT(a)\ns = DFF(x)\nx = OR(a, y)\ny = NOT(x)\n").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::CombinationalCycle(_)));
    }

    #[test]
    fn dangling_and_undefined_dff() {
        let err = parse_bench("INPUT(a)\ns = DFF(g)\ng = AND(a, q)\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Dangling("q".into()));
        let err = parse_bench("INPUT(a)\ns = DFF(nowhere)\n").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::DffUndefined { .. }));
        let err = parse_bench("INPUT(a)\nOUTPUT(z)\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Dangling("z".into()));
    }

    #[test]
    fn case_whitespace_and_comments() {
        let text = "# tiny\n  input( a )\nINPUT(b)\nOUTPUT(g)\n s1 = dff( g )  # latch\n g = nand(a , b, s1)\n";
        let m = parse_bench(text).unwrap();
        assert_eq!(m.name(), "tiny");
        assert_eq!(m.num_vars(), 3);
        let root = m.next(2).unwrap();
        assert!(matches!(m.pool().get(root), ExprNode::Nand(cs) if cs.len() == 3));
    }

    #[test]
    fn counts_equal_dff_plus_input_lines() {
        let text = "INPUT(a)\nINPUT(b)\nOUTPUT(o)\nq0 = DFF(n0)\nq1 = DFF(n1)\nq2 = DFF(q0)\nn0 = XOR(a, q2)\nn1 = OR(n0, b, q1)\no = AND(n1, q0)\n";
        let m = parse_bench(text).unwrap();
        assert_eq!(m.num_vars(), 5);
        assert_eq!(m.num_state_vars(), 3);
    }

    #[test]
    fn shared_gate_is_one_node() {
        let m = parse_bench("INPUT(a)\nINPUT(b)\np = DFF(g)\nq = DFF(h)\ng = AND(a, b)\nh = OR(g, q)\n").unwrap();
        let g_root = m.next(2).unwrap();
        let h_root = m.next(3).unwrap();
        assert!(m.pool().get(h_root).operands().contains(&g_root));
    }

    #[test]
    fn nary_xor_folds_left() {
        let m = parse_bench("INPUT(a)\nINPUT(b)\nINPUT(c)\ns = DFF(x)\nx = XOR(a, b, c)\n").unwrap();
        let t = ExprTree::from_pool(m.pool(), m.next(3).unwrap());
        let v = |i| Box::new(ExprTree::Var(i));
        assert_eq!(t, ExprTree::Xor(Box::new(ExprTree::Xor(v(0), v(1))), v(2)));
    }
}
