//! Small synthetic model families with known ordering structure.

use std::fmt::Write;

use crate::model::{parse_native, Model};

/// `units` four-variable blocks plus `links` parity variables tying
/// neighbouring blocks together; `4 * units + links` variables.
///
/// In block `i`, `g{i}` tracks `(g{i} == p{i}) & (d{i} == q{i})` and guards
/// the load of `d{i}` from `q{i}`, so `g{i}` wants to precede `d{i}`.
pub fn equality_chain(units: usize, links: usize) -> Model {
    assert!(units >= 1, "at least one block");
    let mut s = format!("model eqchain_{units}_{links}\nvar");
    for i in 0..units {
        let _ = write!(s, " g{i} d{i} p{i} q{i}");
    }
    for j in 0..links {
        let _ = write!(s, " l{j}");
    }
    s.push('\n');
    for i in 0..units {
        let _ = writeln!(s, "next g{i} := (g{i} == p{i}) & (d{i} == q{i})");
        let _ = writeln!(s, "next d{i} := (g{i} & q{i}) | (!g{i} & d{i})");
        let _ = writeln!(s, "next p{i} := d{i} ^ (p{i} & q{i})");
        let _ = writeln!(s, "next q{i} := d{i} ^ (p{i} & q{i})");
    }
    for j in 0..links {
        let (a, b) = (j % units, (j + 1) % units);
        let _ = writeln!(s, "next l{j} := l{j} ^ (g{a} == g{b})");
    }
    parse_native(&s).expect("generated model parses")
}

/// Two words `a`, `b` of `bits` bits compared through overlapping windows:
/// `c{j}` holds `(a{j} == b{j}) & (a{j+1} == b{j+1})`. Variables are
/// declared word by word, so index order separates every bit from its
/// partner; `3 * bits - 1` variables.
pub fn comparator_windows(bits: usize) -> Model {
    assert!(bits >= 2, "a window needs two bits");
    let mut s = format!("model windows_{bits}\nvar");
    for w in ["a", "b"] {
        for i in 0..bits {
            let _ = write!(s, " {w}{i}");
        }
    }
    for j in 0..bits - 1 {
        let _ = write!(s, " c{j}");
    }
    s.push('\n');
    for i in 0..bits {
        let _ = writeln!(s, "next a{i} := a{i} ^ b{i}");
        let _ = writeln!(s, "next b{i} := !b{i}");
    }
    for j in 0..bits - 1 {
        let k = j + 1;
        let _ = writeln!(s, "next c{j} := (a{j} == b{j}) & (a{k} == b{k})");
    }
    parse_native(&s).expect("generated model parses")
}
