use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sample mean and its unbiased standard error.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanSem {
    pub mean: f64,
    pub sem: f64,
}

/// Mean and `s / sqrt(k)` with the `k - 1` sample variance; the error of a
/// single value is 0.
pub fn mean_sem(values: &[f64]) -> MeanSem {
    let k = values.len();
    if k == 0 {
        return MeanSem {
            mean: f64::NAN,
            sem: f64::NAN,
        };
    }
    let mean = values.iter().sum::<f64>() / k as f64;
    if k == 1 {
        return MeanSem { mean, sem: 0.0 };
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    MeanSem {
        mean,
        sem: (var / k as f64).sqrt(),
    }
}

/// Percentile `q` in `[0, 100]` with linear interpolation between order
/// statistics (position `q/100 * (k - 1)`).
pub fn percentile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = (q / 100.0).clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

pub fn median(values: &[f64]) -> f64 {
    percentile(values, 50.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub l: u32,
    pub median: f64,
    pub p25: f64,
    pub p75: f64,
}

impl ScalingPoint {
    pub fn from_median(l: u32, median: f64) -> Self {
        ScalingPoint {
            l,
            median,
            p25: median,
            p75: median,
        }
    }
}

/// Least-squares line `log2(median) = exponent * l + intercept`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub intercept: f64,
    /// Euclidean norm of the log2 residuals.
    pub residual_norm: f64,
    pub points: Vec<ScalingPoint>,
    /// `l` values left out of the fit because their median is zero.
    pub excluded: Vec<u32>,
}

impl ScalingFit {
    pub fn predict(&self, l: f64) -> f64 {
        (self.exponent * l + self.intercept).exp2()
    }
}

/// Fits `median ~ 2^(b l + c)` over the points with a positive median.
pub fn fit_scaling(points: &[ScalingPoint]) -> Result<ScalingFit> {
    let used: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.median > 0.0)
        .map(|p| (p.l as f64, p.median.log2()))
        .collect();
    let excluded = points
        .iter()
        .filter(|p| !(p.median > 0.0))
        .map(|p| p.l)
        .collect();
    let k = used.len() as f64;
    let (mx, my) = (
        used.iter().map(|p| p.0).sum::<f64>() / k,
        used.iter().map(|p| p.1).sum::<f64>() / k,
    );
    let sxx: f64 = used.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if used.len() < 2 || sxx == 0.0 {
        return Err(Error::InsufficientFitPoints(used.len()));
    }
    let sxy: f64 = used.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let residual_norm = used
        .iter()
        .map(|p| (p.1 - exponent * p.0 - intercept).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(ScalingFit {
        exponent,
        intercept,
        residual_norm,
        points: points.to_vec(),
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mean_and_error() {
        let m = mean_sem(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        // s^2 = 5/3, sem = sqrt(5/12)
        assert!((m.sem - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert_eq!(
            mean_sem(&[7.0]),
            MeanSem {
                mean: 7.0,
                sem: 0.0
            }
        );
    }

    #[test]
    fn percentiles_interpolate() {
        let v = [4.0, 1.0, 3.0, 2.0];
        assert_eq!(median(&v), 2.5);
        assert_eq!(percentile(&v, 25.0), 1.75);
        assert_eq!(percentile(&v, 75.0), 3.25);
        assert_eq!(percentile(&v, 0.0), 1.0);
        assert_eq!(percentile(&v, 100.0), 4.0);
        assert_eq!(median(&[5.0, 1.0, 3.0]), 3.0);
    }

    #[test]
    fn planted_exponents() {
        for b in [-0.5, -1.0, -1.1] {
            let pts: Vec<ScalingPoint> = (4..=20)
                .map(|l| ScalingPoint::from_median(l, (b * l as f64).exp2()))
                .collect();
            let fit = fit_scaling(&pts).unwrap();
            assert!((fit.exponent - b).abs() < 1e-9, "{b}: {}", fit.exponent);
            assert!(fit.intercept.abs() < 1e-9 && fit.residual_norm < 1e-9);
        }
    }

    #[test]
    fn zero_medians_are_excluded() {
        let pts = [
            ScalingPoint::from_median(2, 0.25),
            ScalingPoint::from_median(4, 0.0),
            ScalingPoint::from_median(6, 2f64.powi(-3)),
        ];
        let fit = fit_scaling(&pts).unwrap();
        assert_eq!(fit.excluded, vec![4]);
        assert!((fit.exponent + 0.25).abs() < 1e-12);
        assert!(matches!(
            fit_scaling(&pts[..2]),
            Err(Error::InsufficientFitPoints(1))
        ));
        let same = [
            ScalingPoint::from_median(3, 0.5),
            ScalingPoint::from_median(3, 0.25),
        ];
        assert!(fit_scaling(&same).is_err());
    }

    proptest! {
        #[test]
        fn exact_log_linear_data_is_recovered(b in -3.0f64..0.5, c in -4.0f64..4.0, start in 1u32..10, k in 2u32..12) {
            let pts: Vec<ScalingPoint> = (start..start + k).map(|l| ScalingPoint::from_median(l, (b * l as f64 + c).exp2())).collect();
            let fit = fit_scaling(&pts).unwrap();
            prop_assert!((fit.exponent - b).abs() <= 1e-6);
            prop_assert!((fit.intercept - c).abs() <= 1e-6);
        }

        #[test]
        fn percentile_is_monotone(v in proptest::collection::vec(-1e3f64..1e3, 1..40), a in 0.0f64..100.0, d in 0.0f64..100.0) {
            let hi = (a + d).min(100.0);
            prop_assert!(percentile(&v, a) <= percentile(&v, hi));
            let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
            let top = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(percentile(&v, a) >= lo && percentile(&v, a) <= top);
        }
    }
}
