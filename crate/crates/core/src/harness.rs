//! Algorithm suites, node-count aggregates and learning curves.

use std::io;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::baselines::{
    dfs_append_order, interleave_order, malik_level_order, random_order, randomized_tiebreak_variant, DfsHeuristic,
};
use crate::bdd::{evaluate_order_with_cap, BddError, VariableOrder, DEFAULT_NODE_CAP};
use crate::learning::{generate_and_evaluate, train_from_sample, DecisionTree, LearnError, TrainConfig};
use crate::model::{build_connectivity_graph, Model};
use crate::ordering::{order_model, Algorithm, CycleMode, OrderingError};
use crate::seed::derive_labeled;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("budgets must be ascending and start at 0")]
    Budgets,
    #[error("no successful results for `{0}`")]
    EmptyGroup(String),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Ordering(#[from] OrderingError),
    #[error(transparent)]
    Bdd(#[from] BddError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub random: usize,
    /// Runs of each DFS heuristic; run 0 is deterministic, later runs
    /// randomize tie-breaks.
    pub runs: usize,
    pub malik: bool,
    pub seed: u64,
    pub node_cap: usize,
    /// Fresh random orders tried for a random entry that exceeds the cap.
    pub retry_cap: usize,
    pub mode: CycleMode,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            random: 200,
            runs: 10,
            malik: true,
            seed: 1,
            node_cap: DEFAULT_NODE_CAP,
            retry_cap: 16,
            mode: CycleMode::OnDemand,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Classifiers {
    pub pair: Vec<DecisionTree>,
    pub triplet: Vec<DecisionTree>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchResult {
    pub algorithm: String,
    pub run: usize,
    pub seed: u64,
    pub order: Option<VariableOrder>,
    pub node_count: Option<usize>,
    pub millis: f64,
    pub error: Option<String>,
}

#[derive(Clone, Copy, Debug)]
enum Entry {
    Random,
    Dfs(DfsHeuristic),
    Malik,
    Learned(Algorithm),
}

impl Entry {
    fn name(self) -> &'static str {
        match self {
            Entry::Random => "random",
            Entry::Dfs(DfsHeuristic::Append) => "dfs-append",
            Entry::Dfs(DfsHeuristic::Interleave) => "interleave",
            Entry::Malik => "malik",
            Entry::Learned(a) => a.name(),
        }
    }
}

fn factorial_at_most(n: usize, limit: usize) -> Option<usize> {
    let mut f: usize = 1;
    for k in 2..=n {
        f = f.checked_mul(k).filter(|&x| x <= limit)?;
    }
    Some(f)
}

/// The `k`-th permutation of `0..n` in lexicographic order.
fn nth_permutation(n: usize, mut k: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    let mut fact = vec![1usize; n + 1];
    for i in 1..=n {
        fact[i] = fact[i - 1] * i;
    }
    let mut out = Vec::with_capacity(n);
    for i in (0..n).rev() {
        let q = k / fact[i];
        k %= fact[i];
        out.push(pool.remove(q));
    }
    out
}

/// Runs the configured suite. Rows come back in (entry, run) order no
/// matter how the work was scheduled. When the model has no more than
/// `cfg.random` orders, the random entry enumerates all of them instead.
pub fn run_bench(m: &Model, cfg: &SuiteConfig, classifiers: &Classifiers) -> Vec<BenchResult> {
    let g = build_connectivity_graph(m);
    let n = m.num_vars();
    let exhaustive = factorial_at_most(n, cfg.random.max(1)).filter(|_| cfg.random > 0);
    let mut jobs: Vec<(Entry, usize)> = Vec::new();
    jobs.extend((0..exhaustive.unwrap_or(cfg.random)).map(|r| (Entry::Random, r)));
    for h in [DfsHeuristic::Append, DfsHeuristic::Interleave] {
        jobs.extend((0..cfg.runs).map(|r| (Entry::Dfs(h), r)));
    }
    if cfg.malik {
        jobs.push((Entry::Malik, 0));
    }
    if !classifiers.pair.is_empty() {
        jobs.push((Entry::Learned(Algorithm::Ppo), 0));
        if !classifiers.triplet.is_empty() {
            jobs.push((Entry::Learned(Algorithm::PpoCpf), 0));
        }
    }

    jobs.par_iter()
        .map(|&(entry, run)| {
            let seed = derive_labeled(cfg.seed, entry.name(), &[run as u64]);
            let start = Instant::now();
            let outcome: Result<(VariableOrder, usize), String> = (|| match entry {
                Entry::Random if exhaustive.is_some() => {
                    let order = VariableOrder::new(nth_permutation(n, run), n).map_err(|e| e.to_string())?;
                    let e = evaluate_order_with_cap(m, &order, cfg.node_cap).map_err(|e| e.to_string())?;
                    Ok((e.order, e.node_count))
                }
                Entry::Random => {
                    let mut last = String::new();
                    for attempt in 0..cfg.retry_cap.max(1) {
                        let s = if attempt == 0 {
                            seed
                        } else {
                            derive_labeled(seed, "retry", &[attempt as u64])
                        };
                        match evaluate_order_with_cap(m, &random_order(m, s), cfg.node_cap) {
                            Ok(e) => return Ok((e.order, e.node_count)),
                            Err(e) => last = e.to_string(),
                        }
                    }
                    Err(last)
                }
                Entry::Dfs(_) | Entry::Malik | Entry::Learned(_) => {
                    let order = match entry {
                        Entry::Dfs(h) if run == 0 => match h {
                            DfsHeuristic::Append => dfs_append_order(&g, m),
                            DfsHeuristic::Interleave => interleave_order(&g, m),
                        },
                        Entry::Dfs(h) => randomized_tiebreak_variant(h, &g, m, seed),
                        Entry::Malik => malik_level_order(&g),
                        Entry::Learned(a) => {
                            order_model(m, &classifiers.pair, &classifiers.triplet, a, cfg.mode)
                                .map_err(|e| e.to_string())?
                                .0
                                .order
                        }
                        Entry::Random => unreachable!(),
                    };
                    let e = evaluate_order_with_cap(m, &order, cfg.node_cap).map_err(|e| e.to_string())?;
                    Ok((e.order, e.node_count))
                }
            })();
            let millis = start.elapsed().as_secs_f64() * 1e3;
            let (order, node_count, error) = match outcome {
                Ok((o, c)) => (Some(o), Some(c), None),
                Err(e) => (None, None, Some(e)),
            };
            BenchResult {
                algorithm: entry.name().to_string(),
                run,
                seed,
                order,
                node_count,
                millis,
                error,
            }
        })
        .collect()
}

/// Writes the result CSV. Wall time is left empty unless `timing` is set,
/// which keeps repeat runs byte-identical.
pub fn write_bench_csv<W: io::Write>(w: W, results: &[BenchResult], timing: bool) -> Result<(), HarnessError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["algorithm", "run", "seed", "node_count", "millis", "error"])?;
    for r in results {
        out.write_record([
            r.algorithm.clone(),
            r.run.to_string(),
            r.seed.to_string(),
            r.node_count.map(|c| c.to_string()).unwrap_or_default(),
            if timing { format!("{:.3}", r.millis) } else { String::new() },
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    pub algorithm: String,
    pub mean: f64,
    /// Sample deviation (n - 1 denominator); 0 when n = 1.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

/// Mean and sample deviation of `xs`, or `None` for an empty slice.
pub fn mean_std(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let std = if xs.len() < 2 {
        0.0
    } else {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Some((mean, std))
}

impl Aggregate {
    pub fn of(algorithm: &str, counts: &[f64]) -> Result<Self, HarnessError> {
        let (mean, std) = mean_std(counts).ok_or_else(|| HarnessError::EmptyGroup(algorithm.to_string()))?;
        Ok(Self {
            algorithm: algorithm.to_string(),
            mean,
            std,
            min: counts.iter().copied().fold(f64::INFINITY, f64::min),
            max: counts.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            n: counts.len(),
        })
    }
}

/// Per-algorithm statistics over successful rows, in first-appearance order.
pub fn aggregate(results: &[BenchResult]) -> Result<Vec<Aggregate>, HarnessError> {
    let mut names: Vec<&str> = Vec::new();
    for r in results {
        if !names.contains(&r.algorithm.as_str()) {
            names.push(&r.algorithm);
        }
    }
    names
        .into_iter()
        .map(|name| {
            let counts: Vec<f64> = results
                .iter()
                .filter(|r| r.algorithm == name)
                .filter_map(|r| r.node_count)
                .map(|c| c as f64)
                .collect();
            Aggregate::of(name, &counts)
        })
        .collect()
}

pub fn write_aggregate_csv<W: io::Write>(w: W, aggs: &[Aggregate]) -> Result<(), HarnessError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["algorithm", "mean", "std", "min", "max", "n"])?;
    for a in aggs {
        out.write_record([
            a.algorithm.clone(),
            a.mean.to_string(),
            a.std.to_string(),
            a.min.to_string(),
            a.max.to_string(),
            a.n.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurveConfig {
    pub budgets: Vec<usize>,
    pub train: TrainConfig,
    /// Random orders behind the budget-0 point.
    pub random: usize,
    /// Independent training repetitions per budget.
    pub repeats: usize,
    pub mode: CycleMode,
}

impl Default for CurveConfig {
    fn default() -> Self {
        Self {
            budgets: (0..=10).map(|k| k * 20).collect(),
            train: TrainConfig::default(),
            random: 200,
            repeats: 1,
            mode: CycleMode::OnDemand,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearningCurvePoint {
    pub budget: usize,
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

/// Random-order node counts of `m` under the suite's seeding.
pub fn random_counts(m: &Model, n: usize, seed: u64, node_cap: usize) -> Result<Vec<f64>, HarnessError> {
    let rows: Vec<Result<f64, HarnessError>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let s = derive_labeled(seed, "random", &[i as u64]);
            Ok(evaluate_order_with_cap(m, &random_order(m, s), node_cap)?.node_count as f64)
        })
        .collect();
    rows.into_iter().collect()
}

/// For each budget, retrains on the first `budget` orders sampled from every
/// training model, orders `test` with PPO^CPF and evaluates it. Budget 0
/// is the random baseline.
pub fn learning_curve(
    train_models: &[Model],
    test: &Model,
    cfg: &CurveConfig,
) -> Result<Vec<LearningCurvePoint>, HarnessError> {
    if cfg.budgets.first() != Some(&0) || cfg.budgets.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HarnessError::Budgets);
    }
    let max_budget = *cfg.budgets.last().expect("nonempty");
    let repeats = cfg.repeats.max(1);

    // one nested sample per (repeat, model); budgets take prefixes
    let mut samples = Vec::with_capacity(repeats);
    for r in 0..repeats {
        let mut per_model = Vec::with_capacity(train_models.len());
        for (k, m) in train_models.iter().enumerate() {
            let tc = TrainConfig {
                orders: max_budget,
                seed: derive_labeled(cfg.train.seed, "curve-sample", &[r as u64, k as u64]),
                ..cfg.train.clone()
            };
            per_model.push(generate_and_evaluate(m, &tc)?);
        }
        samples.push(per_model);
    }

    let mut points = Vec::with_capacity(cfg.budgets.len());
    for &b in &cfg.budgets {
        if b == 0 {
            let counts = random_counts(test, cfg.random, cfg.train.seed, cfg.train.node_cap)?;
            let (mean, std) = mean_std(&counts).ok_or_else(|| HarnessError::EmptyGroup("random".into()))?;
            points.push(LearningCurvePoint {
                budget: 0,
                mean,
                std,
                n: counts.len(),
            });
            continue;
        }
        let mut counts = Vec::with_capacity(repeats);
        for per_model in &samples {
            let mut pair = Vec::new();
            let mut triplet = Vec::new();
            for (m, s) in train_models.iter().zip(per_model) {
                let t = train_from_sample(m, &s.prefix(b), &cfg.train, true)?;
                pair.push(t.pair);
                triplet.extend(t.triplet);
            }
            let (out, _) = order_model(test, &pair, &triplet, Algorithm::PpoCpf, cfg.mode)?;
            counts.push(evaluate_order_with_cap(test, &out.order, cfg.train.node_cap)?.node_count as f64);
        }
        let (mean, std) = mean_std(&counts).expect("at least one repeat");
        points.push(LearningCurvePoint {
            budget: b,
            mean,
            std,
            n: counts.len(),
        });
    }
    Ok(points)
}

pub fn write_curve_csv<W: io::Write>(w: W, points: &[LearningCurvePoint]) -> Result<(), HarnessError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["budget", "mean", "std", "n"])?;
    for p in points {
        out.write_record([p.budget.to_string(), p.mean.to_string(), p.std.to_string(), p.n.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bdd::oracle::mbdd_count;
    use crate::model::tests::counter;

    #[test]
    fn counter_suite_random_mean_is_exhaustive_mean() {
        let m = counter();
        let cfg = SuiteConfig {
            random: 6,
            runs: 1,
            ..SuiteConfig::default()
        };
        let rows = run_bench(&m, &cfg, &Classifiers::default());
        let random: Vec<f64> = rows
            .iter()
            .filter(|r| r.algorithm == "random")
            .map(|r| r.node_count.unwrap() as f64)
            .collect();
        let mut oracle = 0.0;
        for k in 0..6 {
            let o = VariableOrder::new(nth_permutation(3, k), 3).unwrap();
            oracle += mbdd_count(&m, &o).unwrap() as f64;
        }
        let agg = aggregate(&rows).unwrap();
        assert_eq!(random.len(), 6);
        assert!((agg[0].mean - oracle / 6.0).abs() < 1e-12);
        for name in ["dfs-append", "interleave", "malik"] {
            assert_eq!(rows.iter().filter(|r| r.algorithm == name).count(), 1);
        }
        for r in &rows {
            let o = r.order.as_ref().unwrap();
            assert_eq!(r.node_count, Some(mbdd_count(&m, o).unwrap()));
        }
    }

    #[test]
    fn csv_is_repeatable() {
        let m = counter();
        let cfg = SuiteConfig {
            random: 4,
            runs: 3,
            ..SuiteConfig::default()
        };
        let render = || {
            let mut buf = Vec::new();
            write_bench_csv(&mut buf, &run_bench(&m, &cfg, &Classifiers::default()), false).unwrap();
            String::from_utf8(buf).unwrap()
        };
        let a = render();
        assert_eq!(a, render());
        assert!(a.starts_with("algorithm,run,seed,node_count,millis,error\n"));
    }

    #[test]
    fn aggregate_statistics() {
        let a = Aggregate::of("x", &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((a.mean, a.std, a.min, a.max, a.n), (2.0, 1.0, 1.0, 3.0, 3));
        let one = Aggregate::of("x", &[5.0]).unwrap();
        assert_eq!((one.std, one.n), (0.0, 1));
        assert!(matches!(Aggregate::of("x", &[]), Err(HarnessError::EmptyGroup(_))));
    }

    #[test]
    fn large_counts_format_plainly() {
        let aggs = [
            Aggregate::of("random", &[1234567.0]).unwrap(),
            Aggregate::of("ppo", &[456789.0]).unwrap(),
        ];
        let mut buf = Vec::new();
        write_aggregate_csv(&mut buf, &aggs).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.contains("random,1234567,0,1234567,1234567,1"));
        assert!(s.contains("ppo,456789,0,456789,456789,1"));
    }

    #[test]
    fn budgets_validated() {
        let m = counter();
        for budgets in [vec![20, 40], vec![0, 40, 20], vec![0, 0]] {
            let cfg = CurveConfig {
                budgets,
                ..CurveConfig::default()
            };
            assert!(matches!(
                learning_curve(std::slice::from_ref(&m), &m, &cfg),
                Err(HarnessError::Budgets)
            ));
        }
    }

    #[test]
    fn budget_zero_is_random_mean() {
        let m = counter();
        let cfg = CurveConfig {
            budgets: vec![0, 6],
            random: 30,
            train: TrainConfig {
                min_samples: 2,
                ..TrainConfig::default()
            },
            ..CurveConfig::default()
        };
        let pts = learning_curve(std::slice::from_ref(&m), &m, &cfg).unwrap();
        let counts = random_counts(&m, 30, cfg.train.seed, cfg.train.node_cap).unwrap();
        assert_eq!(pts[0].mean, mean_std(&counts).unwrap().0);
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[1].n, 1);
    }

    #[test]
    fn permutations_are_lexicographic() {
        assert_eq!(nth_permutation(3, 0), vec![0, 1, 2]);
        assert_eq!(nth_permutation(3, 3), vec![1, 2, 0]);
        assert_eq!(nth_permutation(3, 5), vec![2, 1, 0]);
        assert_eq!(factorial_at_most(4, 24), Some(24));
        assert_eq!(factorial_at_most(5, 24), None);
    }
}
