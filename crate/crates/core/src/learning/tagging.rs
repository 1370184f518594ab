use std::collections::BTreeSet;

use super::{t_test, Class, LearnError, OrderSample, TrainConfig};
use crate::features::{triplet_features, FeatureExtractor, FeatureSchema, FeatureVector};
use crate::model::VarId;
use crate::seed::derive;

#[derive(Clone, Debug, PartialEq)]
pub struct TaggedPairExample {
    pub pair: (VarId, VarId),
    pub class: Class,
    pub features: FeatureVector,
    /// Statistic of `first-before-second` counts against the reverse; NaN
    /// when the test was not run.
    pub t: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaggedTripletExample {
    pub triplet: (VarId, VarId, VarId),
    pub class: Class,
    pub features: FeatureVector,
    pub t: f64,
}

/// Whether the placement with mean node count `mean_first` beats the one
/// with `mean_second`. Smaller BDDs are preferred.
pub fn preferred_first(mean_first: f64, mean_second: f64) -> bool {
    mean_first < mean_second
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Tests `first` against `second` counts; `Some((class of first, t))` when
/// both sides meet the sample threshold.
fn compare(first: &[f64], second: &[f64], cfg: &TrainConfig) -> Result<Option<(Class, f64)>, LearnError> {
    if first.len() < cfg.min_samples.max(2) || second.len() < cfg.min_samples.max(2) {
        return Ok(None);
    }
    let r = t_test(first, second, cfg.confidence)?;
    let class = if !r.significant {
        Class::Unknown
    } else if preferred_first(mean(first), mean(second)) {
        Class::Plus
    } else {
        Class::Minus
    };
    Ok(Some((class, r.t)))
}

/// Tags both orientations of every unordered pair in `pairs`.
pub fn tag_pairs(
    sample: &OrderSample,
    pairs: &[(VarId, VarId)],
    fx: &FeatureExtractor<'_>,
    cfg: &TrainConfig,
) -> Result<Vec<TaggedPairExample>, LearnError> {
    let mut out = Vec::with_capacity(pairs.len() * 2);
    for &(a, b) in pairs {
        let (ab, ba) = sample.partition(a, b);
        let (class, t) = compare(&ab, &ba, cfg)?.unwrap_or((Class::Unknown, f64::NAN));
        out.push(TaggedPairExample {
            pair: (a, b),
            class,
            features: fx.pair_features(a, b),
            t,
        });
        out.push(TaggedPairExample {
            pair: (b, a),
            class: class.mirror(),
            features: fx.pair_features(b, a),
            t: -t,
        });
    }
    Ok(out)
}

/// Unordered triples, ascending, in which some member forms an interacting
/// pair with both others. Beyond `cap` the triples with the smallest seeded hash are kept.
pub fn triplet_universe(fx: &FeatureExtractor<'_>, cap: usize, seed: u64) -> Vec<[VarId; 3]> {
    let mut all = BTreeSet::new();
    for i in 0..fx.num_vars() {
        let partners: Vec<VarId> = fx.partners(i).iter().copied().collect();
        for (a, &j) in partners.iter().enumerate() {
            for &k in &partners[a + 1..] {
                let mut t = [i, j, k];
                t.sort_unstable();
                all.insert(t);
            }
        }
    }
    let mut all: Vec<[VarId; 3]> = all.into_iter().collect();
    if all.len() > cap {
        let key = |t: &[VarId; 3]| derive(seed, &[t[0] as u64, t[1] as u64, t[2] as u64]);
        all.sort_by_key(|t| (key(t), *t));
        all.truncate(cap);
        all.sort_unstable();
    }
    all
}

/// Tags each triple by its most significant first-variable partition.
pub fn tag_triplets(
    sample: &OrderSample,
    triplets: &[[VarId; 3]],
    fx: &FeatureExtractor<'_>,
    cfg: &TrainConfig,
) -> Result<Vec<TaggedTripletExample>, LearnError> {
    let schema = FeatureSchema::triplet();
    let mut out = Vec::new();
    for &[x, y, z] in triplets {
        let mut best: Option<(VarId, VarId, VarId, Class, f64)> = None;
        for (f, p, q) in [(x, y, z), (y, x, z), (z, x, y)] {
            let (pq, qp) = sample.partition_given_first(f, p, q);
            if let Some((class, t)) = compare(&pq, &qp, cfg)? {
                if best.as_ref().is_none_or(|b| t.abs() > b.4.abs()) {
                    best = Some((f, p, q, class, t));
                }
            }
        }
        let Some((f, p, q, class, t)) = best else {
            continue;
        };
        // orient so the emitted first triplet is the winner, or (f, p, q)
        // when there is none
        let (w, l, t) = if class == Class::Minus { (q, p, -t) } else { (p, q, t) };
        let c = if class == Class::Unknown { Class::Unknown } else { Class::Plus };
        let pv_w = fx.pair_features(f, w);
        let pv_l = fx.pair_features(f, l);
        out.push(TaggedTripletExample {
            triplet: (f, w, l),
            class: c,
            features: triplet_features(&pv_w, &pv_l, &schema)?,
            t,
        });
        out.push(TaggedTripletExample {
            triplet: (f, l, w),
            class: c.mirror(),
            features: triplet_features(&pv_l, &pv_w, &schema)?,
            t: -t,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bdd::{EvaluatedOrder, VariableOrder};
    use crate::model::tests::counter;
    use crate::model::build_connectivity_graph;

    fn sample_from(rows: &[(Vec<VarId>, usize)]) -> OrderSample {
        let n = rows[0].0.len();
        OrderSample::new(
            rows.iter()
                .map(|(o, c)| EvaluatedOrder {
                    order: VariableOrder::new(o.clone(), n).unwrap(),
                    node_count: *c,
                })
                .collect(),
        )
    }

    fn cfg(min: usize) -> TrainConfig {
        TrainConfig {
            min_samples: min,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn planted_pair_is_tagged_plus() {
        let m = counter();
        let g = build_connectivity_graph(&m);
        let fx = FeatureExtractor::new(&m, &g);
        let s = sample_from(&[
            (vec![0, 1, 2], 9),
            (vec![0, 2, 1], 10),
            (vec![2, 0, 1], 11),
            (vec![1, 0, 2], 29),
            (vec![1, 2, 0], 30),
            (vec![2, 1, 0], 31),
        ]);
        let tagged = tag_pairs(&s, &[(0, 1)], &fx, &cfg(3)).unwrap();
        assert_eq!(tagged[0].pair, (0, 1));
        assert_eq!(tagged[0].class, Class::Plus);
        assert_eq!(tagged[1].class, Class::Minus);
        assert_eq!(tagged[0].t, -tagged[1].t);
    }

    #[test]
    fn thin_side_is_unknown() {
        let m = counter();
        let g = build_connectivity_graph(&m);
        let fx = FeatureExtractor::new(&m, &g);
        let s = sample_from(&[
            (vec![0, 1, 2], 9),
            (vec![0, 2, 1], 10),
            (vec![2, 0, 1], 11),
            (vec![1, 0, 2], 29),
            (vec![1, 2, 0], 30),
            (vec![2, 1, 0], 31),
        ]);
        let tagged = tag_pairs(&s, &[(0, 1)], &fx, &cfg(5)).unwrap();
        assert!(tagged.iter().all(|e| e.class == Class::Unknown));
    }

    #[test]
    fn thin_partitions_emit_no_triplets() {
        let m = counter();
        let g = build_connectivity_graph(&m);
        let fx = FeatureExtractor::new(&m, &g);
        let s = sample_from(&[(vec![0, 1, 2], 9), (vec![1, 0, 2], 12)]);
        assert!(tag_triplets(&s, &[[0, 1, 2]], &fx, &cfg(5)).unwrap().is_empty());
    }

    #[test]
    fn counter_universe() {
        let m = counter();
        let g = build_connectivity_graph(&m);
        let fx = FeatureExtractor::new(&m, &g);
        assert_eq!(triplet_universe(&fx, 10, 1), vec![[0, 1, 2]]);
        assert!(triplet_universe(&fx, 0, 1).is_empty());
    }
}
