//! Return statistics: non-overlapping log returns, excess kurtosis,
//! squared-return autocorrelation and return volatility.

use thiserror::Error;

use crate::market::PriceSeries;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("series of {len} ticks is too short for window {window} after burn-in {burn_in}")]
    TooShort { len: usize, window: u64, burn_in: u64 },
    #[error("window must be at least 1 tick")]
    ZeroWindow,
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("sample variance is zero")]
    ZeroVariance,
}

/// `ln(P_t / P_{t-window})` for `t = b + window, b + 2*window, ...` where
/// `b = max(burn_in, 1)` (tick 1 is the first recorded price).
pub fn log_returns(series: &PriceSeries, window: u64, burn_in: u64) -> Result<Vec<f64>, StatsError> {
    if window == 0 {
        return Err(StatsError::ZeroWindow);
    }
    let len = series.len() as u64;
    if len <= burn_in + window {
        return Err(StatsError::TooShort {
            len: series.len(),
            window,
            burn_in,
        });
    }
    let base = burn_in.max(1);
    let mut out = Vec::with_capacity(((len - base) / window) as usize);
    let mut t = base + window;
    while t <= len {
        let a = series.at(t - window).0 as f64;
        let b = series.at(t).0 as f64;
        // the tick size cancels in the ratio
        out.push((b / a).ln());
        t += window;
    }
    Ok(out)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// `m4 / m2^2 - 3` with population central moments.
pub fn excess_kurtosis(xs: &[f64]) -> Result<f64, StatsError> {
    if xs.len() < 4 {
        return Err(StatsError::TooFewSamples { need: 4, got: xs.len() });
    }
    let mu = mean(xs);
    let (mut m2, mut m4) = (0.0, 0.0);
    for &x in xs {
        let d = (x - mu) * (x - mu);
        m2 += d;
        m4 += d * d;
    }
    let n = xs.len() as f64;
    m2 /= n;
    m4 /= n;
    if m2 == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok(m4 / (m2 * m2) - 3.0)
}

/// Pearson correlation between `xs[..n-lag]` and `xs[lag..]`.
pub fn autocorr(xs: &[f64], lag: usize) -> Result<f64, StatsError> {
    if xs.len() < lag + 2 {
        return Err(StatsError::TooFewSamples {
            need: lag + 2,
            got: xs.len(),
        });
    }
    let a = &xs[..xs.len() - lag];
    let b = &xs[lag..];
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Population standard deviation of the log returns.
pub fn return_stdev(series: &PriceSeries, window: u64, burn_in: u64) -> Result<f64, StatsError> {
    Ok(stdev(&log_returns(series, window, burn_in)?))
}

pub fn stdev(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mu = mean(xs);
    (xs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Fat-tail and volatility-clustering panel for one series.
#[derive(Clone, Debug, PartialEq)]
pub struct StylizedFacts {
    pub samples: usize,
    pub kurtosis: f64,
    /// Squared-return autocorrelation at lags 1..=5.
    pub sq_autocorr: [f64; 5],
    pub return_stdev: f64,
}

pub fn stylized_facts(series: &PriceSeries, window: u64, burn_in: u64) -> Result<StylizedFacts, StatsError> {
    let r = log_returns(series, window, burn_in)?;
    let sq: Vec<f64> = r.iter().map(|x| x * x).collect();
    let mut ac = [0.0; 5];
    for (i, a) in ac.iter_mut().enumerate() {
        *a = autocorr(&sq, i + 1)?;
    }
    Ok(StylizedFacts {
        samples: r.len(),
        kurtosis: excess_kurtosis(&r)?,
        sq_autocorr: ac,
        return_stdev: stdev(&r),
    })
}
