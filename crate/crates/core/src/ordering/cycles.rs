use super::Constraint;

/// Outcome of greedy cycle removal.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolution {
    pub kept: Vec<Constraint>,
    /// Edges that would have closed a cycle, in the order they were met.
    pub dropped: Vec<Constraint>,
}

/// Keeps edges in decreasing confidence (ties by `(before, after)`)
/// unless the edge would close a cycle among the edges already kept.
pub fn resolve_cycles(num_vars: usize, edges: &[Constraint]) -> Resolution {
    let mut sorted = edges.to_vec();
    sorted.sort_by(|a, b| {
        b.confidence
            .total_cmp(&a.confidence)
            .then((a.before, a.after).cmp(&(b.before, b.after)))
    });
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); num_vars];
    let mut kept = Vec::with_capacity(sorted.len());
    let mut dropped = Vec::new();
    let mut mark = vec![0u32; num_vars];
    let mut epoch = 0u32;
    let mut stack = Vec::new();
    for e in sorted {
        // does `after` already reach `before`?
        epoch += 1;
        stack.clear();
        stack.push(e.after);
        mark[e.after] = epoch;
        let mut closes = e.before == e.after;
        while let Some(x) = stack.pop() {
            if x == e.before {
                closes = true;
                break;
            }
            for &y in &adj[x] {
                if mark[y] != epoch {
                    mark[y] = epoch;
                    stack.push(y);
                }
            }
        }
        if closes {
            dropped.push(e);
        } else {
            adj[e.before].push(e.after);
            kept.push(e);
        }
    }
    Resolution { kept, dropped }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(before: usize, after: usize, confidence: f64) -> Constraint {
        Constraint {
            before,
            after,
            confidence,
        }
    }

    #[test]
    fn triangle_drops_weakest() {
        let r = resolve_cycles(3, &[e(0, 1, 0.9), e(1, 2, 0.8), e(2, 0, 0.7)]);
        assert_eq!(r.dropped, vec![e(2, 0, 0.7)]);
        assert_eq!(r.kept.len(), 2);
    }

    #[test]
    fn acyclic_input_is_kept() {
        let input = [e(0, 1, 0.5), e(1, 2, 0.5), e(0, 2, 0.2)];
        let r = resolve_cycles(3, &input);
        assert!(r.dropped.is_empty());
        assert_eq!(r.kept.len(), 3);
    }

    #[test]
    fn two_two_cycles_sharing_a_node() {
        let r = resolve_cycles(3, &[e(0, 1, 0.9), e(1, 0, 0.3), e(1, 2, 0.8), e(2, 1, 0.4)]);
        let mut d = r.dropped.clone();
        d.sort_by(|a, b| a.confidence.total_cmp(&b.confidence));
        assert_eq!(d, vec![e(1, 0, 0.3), e(2, 1, 0.4)]);
    }
}
