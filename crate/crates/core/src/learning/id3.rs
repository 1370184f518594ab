use super::{Class, LearnError};
use crate::features::{FeatureSchema, FeatureVector, FEATURE_DIM};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TreeKind {
    Pair,
    Triplet,
}

impl TreeKind {
    pub fn name(self) -> &'static str {
        match self {
            TreeKind::Pair => "pair",
            TreeKind::Triplet => "triplet",
        }
    }

    pub fn schema(self) -> FeatureSchema {
        match self {
            TreeKind::Pair => FeatureSchema::pair(),
            TreeKind::Triplet => FeatureSchema::triplet(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TreeNode {
    /// Values `<= threshold` go left.
    Split {
        component: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        class: Class,
        confidence: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecisionTree {
    pub(crate) kind: TreeKind,
    pub(crate) schema: FeatureSchema,
    pub(crate) nodes: Vec<TreeNode>,
    pub(crate) root: usize,
}

impl DecisionTree {
    /// Assembles a tree from parts; structure is validated by the reader.
    pub fn from_parts(kind: TreeKind, schema: FeatureSchema, nodes: Vec<TreeNode>, root: usize) -> Self {
        Self {
            kind,
            schema,
            nodes,
            root,
        }
    }

    /// A single-leaf tree.
    pub fn leaf(kind: TreeKind, class: Class, confidence: f64) -> Self {
        Self::from_parts(kind, kind.schema(), vec![TreeNode::Leaf { class, confidence }], 0)
    }

    pub fn kind(&self) -> TreeKind {
        self.kind
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(self.root, 0usize)];
        while let Some((id, d)) = stack.pop() {
            best = best.max(d);
            if let TreeNode::Split { left, right, .. } = self.nodes[id] {
                stack.push((left, d + 1));
                stack.push((right, d + 1));
            }
        }
        best
    }

    pub fn classify(&self, v: &[f64]) -> Result<(Class, f64), LearnError> {
        if v.len() != self.schema.len() {
            return Err(LearnError::LengthMismatch {
                expected: self.schema.len(),
                got: v.len(),
            });
        }
        let mut id = self.root;
        loop {
            match self.nodes[id] {
                TreeNode::Leaf { class, confidence } => return Ok((class, confidence)),
                TreeNode::Split {
                    component,
                    threshold,
                    left,
                    right,
                } => id = if v[component] <= threshold { left } else { right },
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledVector {
    pub features: FeatureVector,
    pub class: Class,
}

fn entropy(counts: &[usize; 3]) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / t;
            -p * p.log2()
        })
        .sum()
}

fn class_counts(examples: &[LabeledVector], idx: &[usize]) -> [usize; 3] {
    let mut c = [0; 3];
    for &i in idx {
        c[examples[i].class.index()] += 1;
    }
    c
}

fn leaf_of(counts: &[usize; 3]) -> TreeNode {
    let total: usize = counts.iter().sum();
    let max = *counts.iter().max().expect("three classes");
    let winners: Vec<Class> = Class::ALL.iter().copied().filter(|c| counts[c.index()] == max).collect();
    let class = if winners.len() == 1 { winners[0] } else { Class::Unknown };
    TreeNode::Leaf {
        class,
        confidence: max as f64 / total as f64,
    }
}

/// Gains closer than this are treated as ties.
const GAIN_EPS: f64 = 1e-12;

/// Best `(component, threshold, gain)` over midpoints between distinct
/// sorted values; `None` when every vector in `idx` is identical.
fn best_split(examples: &[LabeledVector], idx: &[usize], parent: f64) -> Option<(usize, f64, f64)> {
    let n = idx.len() as f64;
    let total = class_counts(examples, idx);
    let mut best: Option<(usize, f64, f64)> = None;
    let mut column: Vec<(f64, usize)> = Vec::with_capacity(idx.len());
    for c in 0..FEATURE_DIM {
        column.clear();
        column.extend(idx.iter().map(|&i| (examples[i].features[c], examples[i].class.index())));
        column.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut left = [0usize; 3];
        for k in 0..column.len() - 1 {
            left[column[k].1] += 1;
            let (a, b) = (column[k].0, column[k + 1].0);
            if a == b {
                continue;
            }
            let right = [total[0] - left[0], total[1] - left[1], total[2] - left[2]];
            let nl = (k + 1) as f64;
            let gain = parent - (nl / n) * entropy(&left) - ((n - nl) / n) * entropy(&right);
            let mut thr = a + (b - a) / 2.0;
            if thr >= b {
                thr = a;
            }
            if best.is_none_or(|(_, _, g)| gain > g + GAIN_EPS) {
                best = Some((c, thr, gain));
            }
        }
    }
    best
}

/// Numeric-threshold ID3 over three classes.
///
/// An impure node is split on its best test even when that test has zero
/// gain, so that label-consistent data is always fit exactly; growth stops
/// at purity, at indistinguishable vectors, or at `max_depth`.
pub fn id3_train(examples: &[LabeledVector], kind: TreeKind, max_depth: usize) -> Result<DecisionTree, LearnError> {
    if examples.is_empty() {
        return Err(LearnError::NoExamples);
    }
    let mut nodes: Vec<TreeNode> = vec![TreeNode::Leaf {
        class: Class::Unknown,
        confidence: 1.0,
    }];
    let mut work: Vec<(usize, Vec<usize>, usize)> = vec![(0, (0..examples.len()).collect(), 0)];
    while let Some((id, idx, depth)) = work.pop() {
        let counts = class_counts(examples, &idx);
        let pure = counts.iter().filter(|&&c| c > 0).count() == 1;
        let split = if pure || depth >= max_depth {
            None
        } else {
            best_split(examples, &idx, entropy(&counts))
        };
        let Some((component, threshold, _)) = split else {
            nodes[id] = leaf_of(&counts);
            continue;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| examples[i].features[component] <= threshold);
        let left = nodes.len();
        let right = left + 1;
        let placeholder = TreeNode::Leaf {
            class: Class::Unknown,
            confidence: 1.0,
        };
        nodes.push(placeholder.clone());
        nodes.push(placeholder);
        nodes[id] = TreeNode::Split {
            component,
            threshold,
            left,
            right,
        };
        work.push((right, r, depth + 1));
        work.push((left, l, depth + 1));
    }
    Ok(DecisionTree::from_parts(kind, kind.schema(), nodes, 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(vals: &[(usize, f64)], class: Class) -> LabeledVector {
        let mut f = [0.0; FEATURE_DIM];
        for &(i, v) in vals {
            f[i] = v;
        }
        LabeledVector { features: f, class }
    }

    #[test]
    fn single_class_is_one_leaf() {
        let xs = vec![ex(&[(0, 1.0)], Class::Plus), ex(&[(0, 2.0)], Class::Plus)];
        let t = id3_train(&xs, TreeKind::Pair, 25).unwrap();
        assert_eq!(t.nodes().len(), 1);
        assert_eq!(t.classify(&[5.0; FEATURE_DIM]).unwrap(), (Class::Plus, 1.0));
    }

    #[test]
    fn clean_split_on_component_three() {
        let xs = vec![
            ex(&[(3, 0.0), (5, 1.0)], Class::Plus),
            ex(&[(3, 1.0), (5, 0.0)], Class::Plus),
            ex(&[(3, 2.0), (5, 1.0)], Class::Minus),
            ex(&[(3, 3.0), (5, 0.0)], Class::Minus),
        ];
        let t = id3_train(&xs, TreeKind::Pair, 25).unwrap();
        match t.nodes()[t.root()] {
            TreeNode::Split { component, threshold, .. } => {
                assert_eq!(component, 3);
                assert_eq!(threshold, 1.5);
            }
            _ => panic!("expected a split"),
        }
        assert_eq!(t.depth(), 1);
        for x in &xs {
            assert_eq!(t.classify(&x.features).unwrap().0, x.class);
        }
    }

    #[test]
    fn threshold_value_goes_left() {
        let xs = vec![ex(&[(0, 1.0)], Class::Plus), ex(&[(0, 3.0)], Class::Minus)];
        let t = id3_train(&xs, TreeKind::Pair, 25).unwrap();
        let mut v = [0.0; FEATURE_DIM];
        v[0] = 2.0;
        assert_eq!(t.classify(&v).unwrap().0, Class::Plus);
    }

    #[test]
    fn xor_labels_need_a_zero_gain_split() {
        let xs = vec![
            ex(&[(0, 0.0), (1, 0.0)], Class::Plus),
            ex(&[(0, 0.0), (1, 1.0)], Class::Minus),
            ex(&[(0, 1.0), (1, 0.0)], Class::Minus),
            ex(&[(0, 1.0), (1, 1.0)], Class::Plus),
        ];
        let t = id3_train(&xs, TreeKind::Pair, usize::MAX).unwrap();
        for x in &xs {
            assert_eq!(t.classify(&x.features).unwrap().0, x.class);
        }
    }

    #[test]
    fn contradictory_duplicates_make_an_unknown_leaf() {
        let xs = vec![ex(&[], Class::Plus), ex(&[], Class::Minus)];
        let t = id3_train(&xs, TreeKind::Pair, 25).unwrap();
        assert_eq!(t.classify(&[0.0; FEATURE_DIM]).unwrap(), (Class::Unknown, 0.5));
    }

    #[test]
    fn errors() {
        assert_eq!(id3_train(&[], TreeKind::Pair, 25), Err(LearnError::NoExamples));
        let t = DecisionTree::leaf(TreeKind::Pair, Class::Unknown, 1.0);
        assert!(matches!(t.classify(&[0.0; 3]), Err(LearnError::LengthMismatch { .. })));
    }
}
