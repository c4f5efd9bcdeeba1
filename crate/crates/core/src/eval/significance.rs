use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PairedTest {
    pub n: usize,
    pub mean_difference: f64,
    /// Infinite (serialized as null) when the differences have no variance.
    pub t: f64,
    pub p_value: f64,
    pub adjusted_p_value: f64,
    pub comparisons: usize,
    pub significant: bool,
    /// Differences had zero variance; p is 0 or 1 by convention.
    pub degenerate: bool,
}

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

/// Two-sided paired t-test with Bonferroni correction over `comparisons`.
pub fn paired_bonferroni(a: &[f64], b: &[f64], comparisons: usize) -> Result<PairedTest> {
    if a.len() != b.len() {
        return Err(Error::Invalid(format!("paired samples differ in length: {} vs {}", a.len(), b.len())));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::Invalid(format!("paired test needs at least 2 pairs, got {n}")));
    }
    let m = comparisons.max(1);
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    // rounding leaves a constant shift with spread near machine epsilon
    let flat = sd <= 1e-12 * mean.abs().max(1.0);

    let (t, p, degenerate) = if flat || !sd.is_finite() {
        if mean == 0.0 {
            (0.0, 1.0, true)
        } else {
            (f64::INFINITY.copysign(mean), 0.0, true)
        }
    } else {
        let t = mean / (sd / (n as f64).sqrt());
        let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("positive degrees of freedom");
        (t, (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0), false)
    };
    let adjusted = (p * m as f64).min(1.0);
    Ok(PairedTest {
        n,
        mean_difference: mean,
        t,
        p_value: p,
        adjusted_p_value: adjusted,
        comparisons: m,
        significant: adjusted < SIGNIFICANCE_LEVEL,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples() {
        let a = [0.1, 0.5, 0.9];
        let r = paired_bonferroni(&a, &a, 3).unwrap();
        assert_eq!(r.p_value, 1.0);
        assert!(!r.significant);
    }

    #[test]
    fn constant_shift() {
        let b: Vec<f64> = (0..30).map(|i| i as f64 / 40.0).collect();
        let a: Vec<f64> = b.iter().map(|x| x + 0.1).collect();
        let r = paired_bonferroni(&a, &b, 3).unwrap();
        assert!(r.significant && r.degenerate);
    }

    #[test]
    fn known_p_value() {
        // d = [1, 2, 3, 4]: mean 2.5, sd √(5/3), t = 3.872983, df 3, p = 0.030466
        let a = [1.0, 2.0, 3.0, 4.0];
        let r = paired_bonferroni(&a, &[0.0; 4], 1).unwrap();
        assert!((r.t - 3.872983346207417).abs() < 1e-12);
        assert!((r.p_value - 0.030466).abs() < 1e-5, "{}", r.p_value);
        let r2 = paired_bonferroni(&a, &[0.0; 4], 2).unwrap();
        assert!((r2.adjusted_p_value - 2.0 * r.p_value).abs() < 1e-15);
        assert!(!r2.significant);
    }

    #[test]
    fn too_few() {
        assert!(paired_bonferroni(&[1.0], &[0.0], 1).is_err());
        assert!(paired_bonferroni(&[1.0, 2.0], &[0.0], 1).is_err());
    }
}
