//! Fading-channel models and thermal-noise sampling.
//!
//! Gains are real and strictly positive; fading is drawn i.i.d. per client
//! and per round from the streams in [`crate::rng`]. Each family exposes its
//! closed-form mean/variance and the two-sided tail probability
//! `P(|c - mean| > nu)` used by the concentration bound.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal, Open01};
use statrs::function::gamma::{gamma, gamma_lr};

use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// Fading distribution over strictly positive gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelModel {
    /// Point mass at `value`; useful for noiseless-channel oracles.
    Degenerate { value: f64 },
    /// Rayleigh with scale `sigma`.
    Rayleigh { sigma: f64 },
    /// Nakagami-m with shape `m >= 0.5` and spread `omega`.
    Nakagami { m: f64, omega: f64 },
}

impl ChannelModel {
    pub fn degenerate(value: f64) -> Result<Self> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::InvalidParam {
                name: "value",
                reason: format!("must be a positive finite gain, got {value}"),
            });
        }
        Ok(Self::Degenerate { value })
    }

    pub fn rayleigh(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParam {
                name: "sigma",
                reason: format!("must be a positive finite scale, got {sigma}"),
            });
        }
        Ok(Self::Rayleigh { sigma })
    }

    pub fn nakagami(m: f64, omega: f64) -> Result<Self> {
        if !(m >= 0.5) || !m.is_finite() {
            return Err(Error::InvalidParam {
                name: "m",
                reason: format!("shape must be >= 0.5, got {m}"),
            });
        }
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::InvalidParam {
                name: "omega",
                reason: format!("spread must be positive, got {omega}"),
            });
        }
        Ok(Self::Nakagami { m, omega })
    }

    /// Rayleigh scaled so the mean gain is exactly 1.
    pub fn rayleigh_unit_mean() -> Self {
        Self::Rayleigh {
            sigma: (2.0 / std::f64::consts::PI).sqrt(),
        }
    }

    /// Nakagami-m with spread chosen so the mean gain is exactly 1.
    /// Defaults to shape m = 2 when no shape is requested.
    pub fn nakagami_unit_mean(m: f64) -> Result<Self> {
        if !(m >= 0.5) || !m.is_finite() {
            return Err(Error::InvalidParam {
                name: "m",
                reason: format!("shape must be >= 0.5, got {m}"),
            });
        }
        // mean = Gamma(m + 1/2)/Gamma(m) * sqrt(omega/m) == 1
        let ratio = gamma(m + 0.5) / gamma(m);
        Ok(Self::Nakagami {
            m,
            omega: m / (ratio * ratio),
        })
    }

    /// Closed-form (mean, variance) of the gain.
    pub fn moments(&self) -> (f64, f64) {
        match *self {
            Self::Degenerate { value } => (value, 0.0),
            Self::Rayleigh { sigma } => {
                let mean = sigma * (std::f64::consts::PI / 2.0).sqrt();
                let var = (2.0 - std::f64::consts::PI / 2.0) * sigma * sigma;
                (mean, var)
            }
            Self::Nakagami { m, omega } => {
                let mean = gamma(m + 0.5) / gamma(m) * (omega / m).sqrt();
                (mean, omega - mean * mean)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        self.moments().0
    }

    /// Cumulative distribution function of the gain.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match *self {
            Self::Degenerate { value } => {
                if x >= value {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Rayleigh { sigma } => 1.0 - (-x * x / (2.0 * sigma * sigma)).exp(),
            // F(x) = P(m, m x^2 / omega), the regularized lower incomplete gamma.
            Self::Nakagami { m, omega } => gamma_lr(m, m * x * x / omega),
        }
    }

    /// Two-sided tail probability `P(|c - mean| > nu)` for `nu > 0`.
    pub fn tail_prob(&self, nu: f64) -> Result<f64> {
        if !(nu > 0.0) {
            return Err(Error::InvalidParam {
                name: "nu",
                reason: format!("must be positive, got {nu}"),
            });
        }
        let (mean, _) = self.moments();
        let lower = if mean - nu > 0.0 {
            self.cdf(mean - nu)
        } else {
            0.0
        };
        let upper = 1.0 - self.cdf(mean + nu);
        Ok((lower + upper).clamp(0.0, 1.0))
    }

    /// Gain threshold `c_th` such that `P(c > c_th) = p_keep`.
    pub fn survival_quantile(&self, p_keep: f64) -> Result<f64> {
        if !(0.0 < p_keep && p_keep < 1.0) {
            return Err(Error::InvalidParam {
                name: "p_keep",
                reason: format!("must lie in (0, 1), got {p_keep}"),
            });
        }
        match *self {
            Self::Degenerate { .. } => Err(Error::InvalidParam {
                name: "p_keep",
                reason: "degenerate channel has no continuous quantile".into(),
            }),
            Self::Rayleigh { sigma } => Ok(sigma * (-2.0 * p_keep.ln()).sqrt()),
            Self::Nakagami { .. } => {
                // Bisection on the CDF; the survival function is smooth and
                // strictly decreasing on (0, inf).
                let target = 1.0 - p_keep;
                let mut lo = 0.0f64;
                let mut hi = 1.0f64;
                while self.cdf(hi) < target {
                    hi *= 2.0;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.cdf(mid) < target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(0.5 * (lo + hi))
            }
        }
    }

    /// Draws one gain. Always strictly positive.
    pub fn sample_one(&self, stream: &mut RandomStream) -> f64 {
        match *self {
            Self::Degenerate { value } => value,
            Self::Rayleigh { sigma } => {
                // Inverse survival transform with u in (0, 1) keeps the draw
                // strictly positive and finite.
                let u: f64 = stream.sample(Open01);
                sigma * (-2.0 * u.ln()).sqrt()
            }
            Self::Nakagami { m, omega } => {
                // c^2 ~ Gamma(shape = m, scale = omega/m)
                let g = Gamma::new(m, omega / m).expect("validated at construction");
                loop {
                    let x = g.sample(stream).sqrt();
                    if x > 0.0 {
                        return x;
                    }
                }
            }
        }
    }

    /// Draws `count` i.i.d. gains.
    pub fn sample(&self, stream: &mut RandomStream, count: usize) -> Vec<f64> {
        (0..count).map(|_| self.sample_one(stream)).collect()
    }
}

/// Additive white Gaussian noise applied to the aggregated signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma_z_sq: f64,
    pub dim: usize,
}

impl NoiseSpec {
    pub fn new(sigma_z_sq: f64, dim: usize) -> Result<Self> {
        if !(sigma_z_sq >= 0.0) || !sigma_z_sq.is_finite() {
            return Err(Error::InvalidParam {
                name: "sigma_z_sq",
                reason: format!("must be a non-negative variance, got {sigma_z_sq}"),
            });
        }
        if dim == 0 {
            return Err(Error::InvalidParam {
                name: "dim",
                reason: "must be at least 1".into(),
            });
        }
        Ok(Self { sigma_z_sq, dim })
    }
}

/// Samples one noise vector; zero variance yields the exact zero vector.
pub fn sample_awgn(spec: &NoiseSpec, stream: &mut RandomStream) -> DVector<f64> {
    if spec.sigma_z_sq == 0.0 {
        return DVector::zeros(spec.dim);
    }
    let normal = Normal::new(0.0, spec.sigma_z_sq.sqrt()).expect("validated at construction");
    DVector::from_iterator(spec.dim, (0..spec.dim).map(|_| normal.sample(stream)))
}
