//! Small statistics helpers shared by the Monte Carlo routines.

use serde::{Deserialize, Serialize};

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    /// Mean and standard error of i.i.d. samples (summed in index order).
    pub fn from_samples(xs: &[f64]) -> Estimate {
        let m = xs.len();
        if m == 0 {
            return Estimate { mean: f64::NAN, se: f64::NAN };
        }
        let mean = xs.iter().sum::<f64>() / m as f64;
        if m == 1 {
            return Estimate { mean, se: f64::INFINITY };
        }
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
        Estimate {
            mean,
            se: (var / m as f64).sqrt(),
        }
    }

    /// Mean of a correlated series with a batch-means standard error.
    pub fn batch_means(xs: &[f64], batches: usize) -> Estimate {
        let batches = batches.max(2).min(xs.len().max(1));
        let len = xs.len() / batches;
        if len == 0 {
            return Estimate::from_samples(xs);
        }
        let means: Vec<f64> = xs[..len * batches]
            .chunks(len)
            .map(|c| c.iter().sum::<f64>() / len as f64)
            .collect();
        let mut est = Estimate::from_samples(&means);
        est.mean = xs.iter().sum::<f64>() / xs.len() as f64;
        est
    }

    /// `|self - other|` in units of the combined standard error.
    pub fn z_against(&self, other: &Estimate) -> f64 {
        let se = (self.se * self.se + other.se * other.se).sqrt();
        let d = (self.mean - other.mean).abs();
        if se == 0.0 {
            if d == 0.0 { 0.0 } else { f64::INFINITY }
        } else {
            d / se
        }
    }

    /// `|self - value|` in units of the standard error.
    pub fn z_value(&self, value: f64) -> f64 {
        self.z_against(&Estimate { mean: value, se: 0.0 })
    }
}

/// Plain sample variance (denominator `m - 1`).
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_se() {
        let e = Estimate::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.mean, 2.5);
        assert!((e.se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(e.z_value(2.5), 0.0);
    }

    #[test]
    fn batch_means_of_constant_blocks() {
        let xs: Vec<f64> = (0..100).map(|i| (i / 25) as f64).collect();
        let e = Estimate::batch_means(&xs, 4);
        assert_eq!(e.mean, 1.5);
        assert!(e.se > 0.5);
    }

    #[test]
    fn slope() {
        assert!((ls_slope(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]) - 2.0).abs() < 1e-15);
    }
}
