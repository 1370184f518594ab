//! Versioned line-oriented classifier files.
//!
//! ```text
//! ordermill-tree v1
//! kind pair
//! schema 38 <name0> ... <name37>
//! node 0 split 3 1.5000000000000000e0 1 2
//! node 1 leaf + 1.0000000000000000e0
//! node 2 leaf - 7.5000000000000000e-1
//! root 0
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::{Class, DecisionTree, TreeKind, TreeNode};
use crate::features::FEATURE_DIM;

const MAGIC: &str = "ordermill-tree";
const VERSION: &str = "v1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeFormatError {
    #[error("line {0}: {1}")]
    Malformed(usize, String),
    #[error("unsupported classifier version `{0}`")]
    Version(String),
    #[error("schema does not match the {0} feature schema")]
    Schema(String),
}

pub fn serialize_tree(t: &DecisionTree) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {VERSION}");
    let _ = writeln!(out, "kind {}", t.kind.name());
    let _ = writeln!(out, "schema {} {}", t.schema.len(), t.schema.names().join(" "));
    // nodes are written in preorder from the root, numbered as the reader
    // numbers them, so equal trees always produce equal files
    let mut order = Vec::with_capacity(t.nodes.len());
    let mut stack = vec![t.root];
    while let Some(id) = stack.pop() {
        order.push(id);
        if let TreeNode::Split { left, right, .. } = t.nodes[id] {
            stack.push(right);
            stack.push(left);
        }
    }
    let mut renum = vec![usize::MAX; t.nodes.len()];
    for (new, &old) in order.iter().enumerate() {
        renum[old] = new;
    }
    for (id, &old) in order.iter().enumerate() {
        match &t.nodes[old] {
            TreeNode::Split {
                component,
                threshold,
                left,
                right,
            } => {
                let (l, r) = (renum[*left], renum[*right]);
                let _ = writeln!(out, "node {id} split {component} {threshold:.16e} {l} {r}");
            }
            TreeNode::Leaf { class, confidence } => {
                let _ = writeln!(out, "node {id} leaf {class} {confidence:.16e}");
            }
        }
    }
    let _ = writeln!(out, "root 0");
    out
}

pub fn deserialize_tree(text: &str) -> Result<DecisionTree, TreeFormatError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let bad = |line: usize, msg: &str| TreeFormatError::Malformed(line, msg.to_string());

    let (ln, header) = lines.next().ok_or_else(|| bad(1, "empty file"))?;
    let mut h = header.split_whitespace();
    if h.next() != Some(MAGIC) {
        return Err(bad(ln, "missing classifier header"));
    }
    match h.next() {
        Some(VERSION) if h.next().is_none() => {}
        Some(v) => return Err(TreeFormatError::Version(v.to_string())),
        None => return Err(bad(ln, "missing version")),
    }

    let (ln, kind_line) = lines.next().ok_or_else(|| bad(ln + 1, "missing kind line"))?;
    let kind = match kind_line.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["kind", "pair"] => TreeKind::Pair,
        ["kind", "triplet"] => TreeKind::Triplet,
        _ => return Err(bad(ln, "expected `kind pair|triplet`")),
    };

    let (ln, schema_line) = lines.next().ok_or_else(|| bad(ln + 1, "missing schema line"))?;
    let parts: Vec<&str> = schema_line.split_whitespace().collect();
    if parts.first() != Some(&"schema") || parts.len() < 2 {
        return Err(bad(ln, "expected `schema <n> <names...>`"));
    }
    let count: usize = parts[1].parse().map_err(|_| bad(ln, "bad schema length"))?;
    if count != parts.len() - 2 {
        return Err(bad(ln, "schema length does not match the name count"));
    }
    let schema = kind.schema();
    if parts[2..] != schema.names().iter().map(String::as_str).collect::<Vec<_>>()[..] {
        return Err(TreeFormatError::Schema(kind.name().to_string()));
    }

    let mut nodes: HashMap<usize, (usize, TreeNode)> = HashMap::new();
    let mut root = None;
    for (ln, line) in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad(ln, &format!("bad integer `{s}`")));
        let real = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| bad(ln, &format!("bad number `{s}`")))
        };
        match f.as_slice() {
            ["node", id, "split", c, thr, l, r] => {
                let component = num(c)?;
                if component >= FEATURE_DIM {
                    return Err(bad(ln, "component out of range"));
                }
                let node = TreeNode::Split {
                    component,
                    threshold: real(thr)?,
                    left: num(l)?,
                    right: num(r)?,
                };
                if nodes.insert(num(id)?, (ln, node)).is_some() {
                    return Err(bad(ln, "duplicate node id"));
                }
            }
            ["node", id, "leaf", cls, conf] => {
                let class = Class::from_token(cls).ok_or_else(|| bad(ln, &format!("unknown class `{cls}`")))?;
                let confidence = real(conf)?;
                if !(confidence > 0.0 && confidence <= 1.0) {
                    return Err(bad(ln, "confidence outside (0, 1]"));
                }
                if nodes.insert(num(id)?, (ln, TreeNode::Leaf { class, confidence })).is_some() {
                    return Err(bad(ln, "duplicate node id"));
                }
            }
            ["root", id] if root.is_none() => root = Some((ln, num(id)?)),
            _ => return Err(bad(ln, "unrecognised line")),
        }
    }
    let (root_line, root) = root.ok_or_else(|| bad(0, "missing root line"))?;

    // renumber in preorder from the root; every node must be used exactly once
    let mut remap: HashMap<usize, usize> = HashMap::new();
    let mut order = Vec::new();
    let mut stack = vec![(root, root_line)];
    while let Some((id, ref_line)) = stack.pop() {
        let (ln, node) = nodes.get(&id).ok_or_else(|| bad(ref_line, &format!("reference to missing node {id}")))?;
        if remap.insert(id, order.len()).is_some() {
            return Err(bad(*ln, "node reachable twice"));
        }
        order.push(id);
        if let TreeNode::Split { left, right, .. } = node {
            stack.push((*right, *ln));
            stack.push((*left, *ln));
        }
    }
    if order.len() != nodes.len() {
        return Err(bad(0, "unreachable nodes"));
    }
    let out = order
        .iter()
        .map(|id| match &nodes[id].1 {
            TreeNode::Split {
                component,
                threshold,
                left,
                right,
            } => TreeNode::Split {
                component: *component,
                threshold: *threshold,
                left: remap[left],
                right: remap[right],
            },
            leaf => leaf.clone(),
        })
        .collect();
    Ok(DecisionTree::from_parts(kind, schema, out, 0))
}
