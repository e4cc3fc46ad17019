use thiserror::Error;

use crate::orderbook::{Price, Tick};

/// How `sigma_eps` is interpreted when drawing the noise term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum NoiseScale {
    /// `sigma_eps` is the standard deviation.
    #[default]
    StdDev,
    /// `sigma_eps` is the variance; the draw uses its square root.
    Variance,
}

/// Market and agent parameters for one simulation run.
#[derive(Clone, Debug, PartialEq)]
pub struct SimParams {
    /// Number of normal agents.
    pub n: u32,
    /// Minimum price increment.
    pub delta_p: f64,
    /// Fundamental value.
    pub p_f: f64,
    /// Upper bounds of the three expectation weights.
    pub w_max: [f64; 3],
    pub tau_max: u64,
    pub sigma_eps: f64,
    pub noise_scale: NoiseScale,
    /// Half-width of the order price scatter.
    pub p_d: f64,
    /// Order lifetime, also the end of the warm-up side rule.
    pub t_c: Tick,
    /// Position size held by technical agents.
    pub s: u32,
    /// Final tick.
    pub t_e: Tick,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            n: 1000,
            delta_p: 0.01,
            p_f: 10_000.0,
            w_max: [1.0, 100.0, 1.0],
            tau_max: 10_000,
            sigma_eps: 0.03,
            noise_scale: NoiseScale::StdDev,
            p_d: 1000.0,
            t_c: 10_000,
            s: 100,
            t_e: 20_000_000,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("{name} must be positive, got {value}")]
    NotPositive { name: &'static str, value: String },
    #[error("t_c ({t_c}) must not exceed t_e ({t_e})")]
    CancelAfterEnd { t_c: Tick, t_e: Tick },
    #[error("fundamental value {0} is below one tick")]
    SubTickFundamental(f64),
}

fn positive_f(name: &'static str, v: f64) -> Result<(), ParamError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ParamError::NotPositive {
            name,
            value: v.to_string(),
        })
    }
}

fn positive_u(name: &'static str, v: u64) -> Result<(), ParamError> {
    if v > 0 {
        Ok(())
    } else {
        Err(ParamError::NotPositive {
            name,
            value: v.to_string(),
        })
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        positive_u("n", u64::from(self.n))?;
        positive_f("delta_p", self.delta_p)?;
        positive_f("p_f", self.p_f)?;
        positive_f("w1_max", self.w_max[0])?;
        positive_f("w2_max", self.w_max[1])?;
        positive_f("w3_max", self.w_max[2])?;
        positive_u("tau_max", self.tau_max)?;
        positive_f("sigma_eps", self.sigma_eps)?;
        positive_f("p_d", self.p_d)?;
        positive_u("t_c", self.t_c)?;
        positive_u("s", u64::from(self.s))?;
        positive_u("t_e", self.t_e)?;
        if self.t_c > self.t_e {
            return Err(ParamError::CancelAfterEnd {
                t_c: self.t_c,
                t_e: self.t_e,
            });
        }
        if self.p_f_ticks().0 < 1 {
            return Err(ParamError::SubTickFundamental(self.p_f));
        }
        Ok(())
    }

    /// The fundamental value on the tick grid (nearest tick).
    pub fn p_f_ticks(&self) -> Price {
        Price((self.p_f / self.delta_p).round() as i64)
    }

    /// Standard deviation of the noise term.
    pub fn eps_std(&self) -> f64 {
        match self.noise_scale {
            NoiseScale::StdDev => self.sigma_eps,
            NoiseScale::Variance => self.sigma_eps.sqrt(),
        }
    }
}
