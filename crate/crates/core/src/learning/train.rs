use super::{
    generate_and_evaluate, id3_train, tag_pairs, tag_triplets, triplet_universe, Class, DecisionTree, LabeledVector,
    LearnError, OrderSample, TrainConfig, TreeKind,
};
use crate::features::FeatureExtractor;
use crate::model::{build_connectivity_graph, Model, VarId};

/// Classifiers learned from one training model.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainedClassifiers {
    pub pair: DecisionTree,
    pub triplet: Option<DecisionTree>,
    pub pair_examples: usize,
    pub triplet_examples: usize,
}

fn fit(examples: Vec<LabeledVector>, kind: TreeKind, max_depth: usize) -> Result<DecisionTree, LearnError> {
    if examples.is_empty() {
        // no evidence at all
        return Ok(DecisionTree::leaf(kind, Class::Unknown, 1.0));
    }
    id3_train(&examples, kind, max_depth)
}

/// Tags `sample` and fits the pair tree, plus the triplet tree when asked.
pub fn train_from_sample(
    m: &Model,
    sample: &OrderSample,
    cfg: &TrainConfig,
    triplets: bool,
) -> Result<TrainedClassifiers, LearnError> {
    cfg.validate()?;
    let g = build_connectivity_graph(m);
    let fx = FeatureExtractor::new(m, &g);
    let pairs: Vec<(VarId, VarId)> = m.interacting_pairs().into_iter().collect();
    let pair_examples: Vec<LabeledVector> = tag_pairs(sample, &pairs, &fx, cfg)?
        .into_iter()
        .map(|e| LabeledVector {
            features: e.features,
            class: e.class,
        })
        .collect();
    let n_pair = pair_examples.len();
    let pair = fit(pair_examples, TreeKind::Pair, cfg.max_depth)?;
    let (triplet, n_triplet) = if triplets {
        let universe = triplet_universe(&fx, cfg.triplet_cap, cfg.seed);
        let ex: Vec<LabeledVector> = tag_triplets(sample, &universe, &fx, cfg)?
            .into_iter()
            .map(|e| LabeledVector {
                features: e.features,
                class: e.class,
            })
            .collect();
        let n = ex.len();
        (Some(fit(ex, TreeKind::Triplet, cfg.max_depth)?), n)
    } else {
        (None, 0)
    };
    Ok(TrainedClassifiers {
        pair,
        triplet,
        pair_examples: n_pair,
        triplet_examples: n_triplet,
    })
}

/// Samples `cfg.orders` random orders of `m` and trains on them.
pub fn train(m: &Model, cfg: &TrainConfig, triplets: bool) -> Result<TrainedClassifiers, LearnError> {
    cfg.validate()?;
    let sample = generate_and_evaluate(m, cfg)?;
    train_from_sample(m, &sample, cfg, triplets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::counter;

    #[test]
    fn no_orders_gives_unknown_leaf() {
        let cfg = TrainConfig {
            orders: 0,
            ..TrainConfig::default()
        };
        let t = train(&counter(), &cfg, true).unwrap();
        assert_eq!(t.pair, DecisionTree::leaf(TreeKind::Pair, Class::Unknown, 1.0));
        assert_eq!(t.triplet.unwrap().kind(), TreeKind::Triplet);
    }

    #[test]
    fn deterministic() {
        let cfg = TrainConfig {
            orders: 6,
            min_samples: 2,
            ..TrainConfig::default()
        };
        let a = train(&counter(), &cfg, true).unwrap();
        let b = train(&counter(), &cfg, true).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.pair_examples, 6);
    }
}
