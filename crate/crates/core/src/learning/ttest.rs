use statrs::distribution::{ContinuousCDF, StudentsT};

use super::LearnError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TTestResult {
    pub t: f64,
    pub df: usize,
    pub significant: bool,
}

/// Two-sided pooled-variance Student's t-test of `mean(a) - mean(b)`.
///
/// When both samples have zero variance the statistic is 0 for equal means
/// and signed infinity otherwise.
pub fn t_test(a: &[f64], b: &[f64], confidence: f64) -> Result<TTestResult, LearnError> {
    let (n1, n2) = (a.len(), b.len());
    if n1 < 2 || n2 < 2 {
        return Err(LearnError::SampleTooSmall(n1, n2));
    }
    let df = n1 + n2 - 2;
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let (m1, m2) = (mean(a), mean(b));
    let ss = |xs: &[f64], m: f64| xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>();
    let pooled = (ss(a, m1) + ss(b, m2)) / df as f64;
    let diff = m1 - m2;
    if pooled == 0.0 {
        return Ok(if diff == 0.0 {
            TTestResult {
                t: 0.0,
                df,
                significant: false,
            }
        } else {
            TTestResult {
                t: diff.signum() * f64::INFINITY,
                df,
                significant: true,
            }
        });
    }
    let se = (pooled * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    let t = diff / se;
    Ok(TTestResult {
        t,
        df,
        significant: t.abs() > critical_value(df, confidence),
    })
}

/// Two-sided critical value of Student's t with `df` degrees of freedom.
pub fn critical_value(df: usize, confidence: f64) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("df >= 1");
    dist.inverse_cdf(1.0 - (1.0 - confidence) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples() {
        let r = t_test(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], 0.95).unwrap();
        assert_eq!(r.t, 0.0);
        assert!(!r.significant);
    }

    #[test]
    fn textbook_shift() {
        let r = t_test(&[10.0, 11.0, 12.0], &[20.0, 21.0, 22.0], 0.95).unwrap();
        assert_eq!(r.df, 4);
        assert!((r.t - (-10.0 / (2.0f64 / 3.0).sqrt())).abs() < 1e-12);
        assert!(r.significant);
    }

    #[test]
    fn zero_variance_branches() {
        let r = t_test(&[5.0, 5.0], &[5.0, 5.0], 0.95).unwrap();
        assert!(!r.significant && r.t == 0.0);
        let r = t_test(&[4.0, 4.0], &[5.0, 5.0], 0.95).unwrap();
        assert!(r.significant && r.t == f64::NEG_INFINITY);
    }

    #[test]
    fn too_small() {
        assert_eq!(t_test(&[1.0], &[1.0, 2.0], 0.95), Err(LearnError::SampleTooSmall(1, 2)));
    }

    #[test]
    fn critical_value_df4() {
        // two-sided 95% quantile for four degrees of freedom
        assert!((critical_value(4, 0.95) - 2.776_445_105_197_799).abs() < 1e-9);
    }
}
