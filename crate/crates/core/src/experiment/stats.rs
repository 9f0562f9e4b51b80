//! Descriptive statistics, least-squares fits and rank correlation.
//!
//! Sums are taken over sorted inputs so every result is invariant under
//! permutation of the input, bit for bit.

use serde::Serialize;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.96;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("regression needs at least two distinct x values")]
    RegressionUndefined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator); 0 for a single value.
    pub std: f64,
    /// Half-width of the normal-approximation 95% confidence interval.
    pub ci: f64,
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn sum(values: &[f64]) -> f64 {
    sorted(values).iter().sum()
}

pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| sum(values) / values.len() as f64)
}

pub fn summarize(values: &[f64]) -> Option<Summary> {
    let n = values.len();
    let mean = mean(values)?;
    let std = if n > 1 {
        let squares: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
        (sum(&squares) / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Some(Summary {
        n,
        mean,
        std,
        ci: Z_95 * std / (n as f64).sqrt(),
    })
}

pub fn median(values: &[f64]) -> Option<f64> {
    let v = sorted(values);
    let n = v.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(v[n / 2]),
        _ => Some((v[n / 2 - 1] + v[n / 2]) / 2.0),
    }
}

/// `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Regression {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `ys` on `xs`.
pub fn ols(xs: &[f64], ys: &[f64]) -> Result<Regression, StatsError> {
    assert_eq!(xs.len(), ys.len(), "paired samples");
    let mut pairs: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let (Some(mx), Some(my)) = (mean(&xs), mean(&ys)) else {
        return Err(StatsError::RegressionUndefined);
    };
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(StatsError::RegressionUndefined);
    }
    let sxy: f64 = pairs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(Regression {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// Ranks starting at 1; tied values share the mean of their ranks.
pub fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation. `None` when either side is constant or fewer
/// than two samples are given.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    assert_eq!(xs.len(), ys.len(), "paired samples");
    if xs.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = rx.len() as f64;
    let m = (n + 1.0) / 2.0;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - m) * (b - m)).sum();
    let vx: f64 = rx.iter().map(|a| (a - m).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - m).powi(2)).sum();
    (vx > 0.0 && vy > 0.0).then(|| cov / (vx * vy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_sample() {
        let s = summarize(&[4.0; 5]).unwrap();
        assert_eq!((s.mean, s.std, s.ci), (4.0, 0.0, 0.0));
    }

    #[test]
    fn sample_std_uses_n_minus_one() {
        // Deviations from mean 5 are -3,-1,1,3: squares sum to 20, over 3.
        let s = summarize(&[2.0, 4.0, 6.0, 8.0]).unwrap();
        assert!((s.std - (20.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((s.ci - 1.96 * s.std / 2.0).abs() < 1e-12);
    }

    #[test]
    fn exact_line() {
        let xs: Vec<f64> = (1..=10).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let r = ols(&xs, &ys).unwrap();
        assert_eq!((r.slope, r.intercept), (2.0, 1.0));
    }

    #[test]
    fn single_x_is_undefined() {
        assert_eq!(ols(&[3.0, 3.0], &[1.0, 2.0]), Err(StatsError::RegressionUndefined));
    }

    #[test]
    fn tied_ranks_are_averaged() {
        assert_eq!(ranks(&[10.0, 20.0, 20.0, 5.0]), vec![2.0, 3.5, 3.5, 1.0]);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[1.0, 4.0, 9.0]), Some(1.0));
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), Some(-1.0));
        assert_eq!(spearman(&[1.0, 2.0], &[5.0, 5.0]), None);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }
}
