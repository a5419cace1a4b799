//! Summary statistics for experiment rows.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

/// 95% normal quantile.
pub const Z95: f64 = 1.96;

/// Mean with a `mean +- 1.96 * stderr` interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanCi {
    pub mean: f64,
    pub low: f64,
    pub high: f64,
    pub n: usize,
}

/// Sample mean and normal 95% interval; the interval collapses to the mean
/// for fewer than two samples, and everything is zero without samples.
pub fn mean_ci(xs: &[f64]) -> MeanCi {
    let n = xs.len();
    if n == 0 {
        return MeanCi { mean: 0.0, low: 0.0, high: 0.0, n };
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return MeanCi { mean, low: mean, high: mean, n };
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let half = Z95 * (var / n as f64).sqrt();
    MeanCi { mean, low: mean - half, high: mean + half, n }
}

/// Interval for a rate of `hits` out of `trials` Bernoulli indicators.
pub fn proportion_ci(hits: u64, trials: u64) -> MeanCi {
    if trials == 0 {
        return MeanCi { mean: 0.0, low: 0.0, high: 0.0, n: 0 };
    }
    let r = hits as f64 / trials as f64;
    let half = if trials > 1 {
        Z95 * (r * (1.0 - r) / (trials - 1) as f64).sqrt()
    } else {
        0.0
    };
    MeanCi { mean: r, low: r - half, high: r + half, n: trials as usize }
}

/// Ordinary least squares `y = intercept + slope x` with a two-sided t test
/// on the slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Regression {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub p_value: f64,
}

pub fn linear_regression(x: &[f64], y: &[f64]) -> Option<Regression> {
    let n = x.len();
    if n != y.len() || n < 3 {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let dof = nf - 2.0;
    let slope_stderr = (sse / dof / sxx).sqrt();
    let p_value = if slope_stderr == 0.0 {
        if slope == 0.0 { 1.0 } else { 0.0 }
    } else {
        let t = StudentsT::new(0.0, 1.0, dof).ok()?;
        2.0 * (1.0 - t.cdf((slope / slope_stderr).abs()))
    };
    Some(Regression { slope, intercept, slope_stderr, p_value })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_ci_known_values() {
        let c = mean_ci(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(c.mean, 2.5);
        // sd = sqrt(5/3), stderr = sd / 2
        let half = 1.96 * (5.0f64 / 3.0).sqrt() / 2.0;
        assert!((c.high - 2.5 - half).abs() < 1e-12);
        assert_eq!(mean_ci(&[7.0]).low, 7.0);
    }

    #[test]
    fn proportion_matches_indicator_mean() {
        let xs: Vec<f64> = (0..10).map(|i| f64::from(u8::from(i < 3))).collect();
        let a = mean_ci(&xs);
        let b = proportion_ci(3, 10);
        assert!((a.mean - b.mean).abs() < 1e-12);
        assert!((a.low - b.low).abs() < 1e-12);
    }

    #[test]
    fn regression_recovers_exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [3.0, 1.0, -1.0, -3.0];
        let r = linear_regression(&x, &y).unwrap();
        assert!((r.slope + 2.0).abs() < 1e-12);
        assert!((r.intercept - 5.0).abs() < 1e-12);
        assert_eq!(r.p_value, 0.0);
    }

    #[test]
    fn regression_p_value_against_tabulated_t() {
        // t = 2.447 is the 0.975 quantile with 6 degrees of freedom
        let x: Vec<f64> = (0..8).map(f64::from).collect();
        let noise = [1.0, -1.0, -1.0, 1.0, 1.0, -1.0, -1.0, 1.0];
        let sxx: f64 = x.iter().map(|a| (a - 3.5f64).powi(2)).sum();
        let se = (8.0f64 / 6.0 / sxx).sqrt();
        let slope = 2.447 * se;
        let y: Vec<f64> = x.iter().zip(noise).map(|(a, e)| slope * a + e).collect();
        let r = linear_regression(&x, &y).unwrap();
        assert!((r.p_value - 0.05).abs() < 1e-3, "{}", r.p_value);
    }
}
