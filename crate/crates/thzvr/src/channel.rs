//! THz link budget: spreading and absorption loss, noise, interference
//! moments, SINR and LoS rate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Boltzmann constant in J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelParams {
    /// Carrier frequency in Hz.
    pub f: f64,
    /// Molecular absorption coefficient in 1/m.
    pub k: f64,
    /// Bandwidth in Hz.
    pub w: f64,
    /// Tagged SBS transmit power in W.
    pub p0: f64,
    /// Interferer transmit power in W.
    pub p: f64,
    /// Temperature in K.
    pub t0: f64,
    /// User to serving SBS distance in m.
    pub r0: f64,
    /// Radius of non-negligible interference in m.
    pub omega: f64,
    /// Hard-core distance in m.
    pub epsilon: f64,
    /// SBS intensity in 1/m².
    pub eta: f64,
}

impl Default for ChannelParams {
    /// Indoor 1 THz deployment.
    fn default() -> Self {
        ChannelParams {
            f: 1e12,
            k: 0.0016,
            w: 15e9,
            p0: 1.0,
            p: 1.0,
            t0: 300.0,
            r0: 1.25,
            omega: 3.0,
            epsilon: 1.0,
            eta: 0.25,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("f", self.f),
            ("W", self.w),
            ("p0", self.p0),
            ("p", self.p),
            ("T0", self.t0),
            ("r0", self.r0),
            ("Omega", self.omega),
            ("epsilon", self.epsilon),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("K", self.k), ("eta", self.eta)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "{name} must be nonnegative, got {v}"
                )));
            }
        }
        if self.r0 > self.omega {
            return Err(Error::Config(format!(
                "r0 = {} must not exceed Omega = {}",
                self.r0, self.omega
            )));
        }
        if self.epsilon >= self.omega {
            return Err(Error::Config(format!(
                "Omega = {} must exceed epsilon = {}",
                self.omega, self.epsilon
            )));
        }
        Ok(())
    }

    /// `c² / (16 π² f²)`.
    pub fn a0(&self) -> f64 {
        a0(self.f)
    }

    /// Power received from the serving SBS in W.
    pub fn received_power(&self) -> f64 {
        self.p0 * self.a0() / (self.r0 * self.r0) * (-self.k * self.r0).exp()
    }
}

/// Deterministic per-link quantities evaluated at the mean interference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkBudget {
    pub path_loss: f64,
    pub n0: f64,
    pub mu_i: f64,
    pub sigma2_i: f64,
    /// Power received from the serving SBS in W.
    pub p_rx: f64,
    pub sinr: f64,
    /// Rate with LoS at interference `mu_i`, bits/s.
    pub rate_los: f64,
}

pub fn a0(f: f64) -> f64 {
    let x = SPEED_OF_LIGHT / (4.0 * std::f64::consts::PI * f);
    x * x
}

/// Spreading loss times inverse transmittance: `(4π f r / c)² e^{K r}`.
pub fn path_loss(f: f64, k: f64, r: f64) -> f64 {
    let s = 4.0 * std::f64::consts::PI * f * r / SPEED_OF_LIGHT;
    s * s * (k * r).exp()
}

/// Johnson–Nyquist term `(W λ² / 4π) k_B T0`.
pub fn thermal_noise(params: &ChannelParams) -> f64 {
    let lambda = SPEED_OF_LIGHT / params.f;
    params.w * lambda * lambda / (4.0 * std::f64::consts::PI) * BOLTZMANN * params.t0
}

/// Thermal noise plus molecular re-radiation from the serving link.
pub fn noise_floor(params: &ChannelParams) -> f64 {
    let r0 = params.r0;
    thermal_noise(params) + params.p0 * params.a0() / (r0 * r0) * (-(-params.k * r0).exp_m1())
}

/// Noise including molecular re-radiation from each interferer.
pub fn noise_power(params: &ChannelParams, interferer_distances: &[f64]) -> Result<f64> {
    let pa = params.p * params.a0();
    let mut n = noise_floor(params);
    for &r in interferer_distances {
        if !(r > 0.0) {
            return Err(Error::Domain(format!(
                "interferer distance must be positive, got {r}"
            )));
        }
        n += pa / (r * r) * (-(-params.k * r).exp_m1());
    }
    Ok(n)
}

/// Mean and variance of the Gaussian interference model.
pub fn interference_moments(params: &ChannelParams) -> Result<(f64, f64)> {
    let (om, eps) = (params.omega, params.epsilon);
    if !(om > eps) {
        return Err(Error::Config(format!(
            "Omega = {om} must exceed epsilon = {eps}"
        )));
    }
    let pa = params.p * params.a0();
    let active = std::f64::consts::PI * om * om * params.eta / 2.0;
    let mu = pa * (om.ln() - eps.ln()) / (om * om - eps * eps) * active;
    let s2 = pa * pa * active / (2.0 * eps * eps * om * om);
    Ok((mu, s2))
}

/// Aggregate interference `Σ p A0 r⁻² e^{-K r}` from explicit distances.
pub fn aggregate_interference(params: &ChannelParams, distances: &[f64]) -> f64 {
    let pa = params.p * params.a0();
    distances
        .iter()
        .map(|&r| pa / (r * r) * (-params.k * r).exp())
        .sum()
}

/// SINR and LoS rate for a given interference level.
pub fn los_rate(params: &ChannelParams, interference: f64) -> (f64, f64) {
    let sinr = params.received_power() / (noise_floor(params) + interference);
    (sinr, params.w * sinr.ln_1p() / std::f64::consts::LN_2)
}

/// Rate discounted by LoS availability. NLoS rate is neglected.
pub fn total_rate(rate_los: f64, p_los: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_los) {
        return Err(Error::Domain(format!(
            "p_los must lie in [0, 1], got {p_los}"
        )));
    }
    Ok(p_los * rate_los)
}

pub fn link_budget(params: &ChannelParams) -> Result<LinkBudget> {
    params.validate()?;
    let (mu_i, sigma2_i) = interference_moments(params)?;
    let (sinr, rate_los) = los_rate(params, mu_i);
    Ok(LinkBudget {
        path_loss: path_loss(params.f, params.k, params.r0),
        n0: noise_floor(params),
        mu_i,
        sigma2_i,
        p_rx: params.received_power(),
        sinr,
        rate_los,
    })
}
