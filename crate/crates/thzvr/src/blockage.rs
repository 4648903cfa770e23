//! Self- and dynamic-blockage probabilities and the LoS probability.
//!
//! A link is self-blocked when the serving SBS falls inside the sector of
//! width ω shadowed by the user's own body. Dynamic blockers cross a link of
//! length r at rate Δ·r and each stays for an exponential time of rate ν.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this value of ΔΩ/ν the series form of ℵ is used.
const ALEPH_SERIES_CUTOFF: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockageParams {
    /// Self-blockage angle in radians.
    pub omega_self: f64,
    /// Blocker density in 1/m².
    pub iota_b: f64,
    /// Blocker speed in m/s.
    pub v_b: f64,
    /// Blockage departure rate in 1/s.
    pub nu: f64,
    pub h_b: f64,
    pub h_r: f64,
    pub h_t: f64,
    /// Radius of the disc holding candidate SBSs, in m.
    pub omega_radius: f64,
    /// Intensity of the equivalent Poisson SBS process in 1/m².
    pub eta_p: f64,
}

impl BlockageParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=2.0 * PI).contains(&self.omega_self) {
            return Err(Error::Config(format!(
                "self-blockage angle must lie in [0, 2pi], got {}",
                self.omega_self
            )));
        }
        if !(self.h_t > self.h_r) {
            return Err(Error::Config(format!(
                "SBS height {} must exceed receiver height {}",
                self.h_t, self.h_r
            )));
        }
        if !(self.h_b > self.h_r) {
            return Err(Error::Config(format!(
                "blocker height {} must exceed receiver height {}",
                self.h_b, self.h_r
            )));
        }
        if !(self.nu > 0.0) {
            return Err(Error::Config(format!(
                "nu must be positive, got {}",
                self.nu
            )));
        }
        for (name, v) in [
            ("iota_B", self.iota_b),
            ("v_B", self.v_b),
            ("eta_P", self.eta_p),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "{name} must be nonnegative, got {v}"
                )));
            }
        }
        if !(self.omega_radius > 0.0) {
            return Err(Error::Config(format!(
                "Omega must be positive, got {}",
                self.omega_radius
            )));
        }
        Ok(())
    }

    /// Probability that a given SBS is not self-blocked, `1 - ω/2π`.
    pub fn kappa(&self) -> f64 {
        1.0 - self.omega_self / (2.0 * PI)
    }
}

/// Blockage rate coefficient `Δ = (2/π) ι_B v_B (h_B - h_R)/(h_T - h_R)`.
pub fn delta_coeff(params: &BlockageParams) -> Result<f64> {
    if !(params.h_t > params.h_r) {
        return Err(Error::Config(format!(
            "SBS height {} must exceed receiver height {}",
            params.h_t, params.h_r
        )));
    }
    Ok(
        2.0 / PI * params.iota_b * params.v_b * (params.h_b - params.h_r)
            / (params.h_t - params.h_r),
    )
}

pub fn self_block_prob(omega: f64) -> Result<f64> {
    if !(0.0..=2.0 * PI).contains(&omega) {
        return Err(Error::Domain(format!(
            "self-blockage angle must lie in [0, 2pi], got {omega}"
        )));
    }
    Ok(omega / (2.0 * PI))
}

/// `Δr / (Δr + ν)`.
pub fn dynamic_block_prob(r: f64, delta: f64, nu: f64) -> f64 {
    let k = delta * r;
    if nu.is_infinite() {
        return 0.0;
    }
    if k == 0.0 {
        return 0.0;
    }
    k / (k + nu)
}

/// Probability that every listed link is blocked, self or dynamic.
pub fn all_blocked_prob(distances: &[f64], kappa: f64, delta: f64, nu: f64) -> Result<f64> {
    if distances.is_empty() {
        return Err(Error::Domain(
            "all_blocked_prob is undefined without any SBS".into(),
        ));
    }
    if !(0.0..=1.0).contains(&kappa) {
        return Err(Error::Domain(format!(
            "kappa must lie in [0, 1], got {kappa}"
        )));
    }
    let mut prod = 1.0;
    for &r in distances {
        if !(r >= 0.0) {
            return Err(Error::Domain(format!(
                "distance must be nonnegative, got {r}"
            )));
        }
        prod *= 1.0 - kappa / (1.0 + delta / nu * r);
    }
    Ok(prod)
}

/// `ℵ(Δ, ν, Ω)`, the disc average of `-1/(1 + Δr/ν)` under density `2r/Ω²`.
pub fn aleph(delta: f64, nu: f64, omega_radius: f64) -> f64 {
    let x = delta * omega_radius / nu;
    if x < ALEPH_SERIES_CUTOFF {
        return -1.0 + 2.0 / 3.0 * x - 0.5 * x * x;
    }
    2.0 * x.ln_1p() / (x * x) - 2.0 / x
}

/// Exponent `ϰ ℵ η_P π Ω²` of the LoS probability; nonpositive when valid.
pub fn los_exponent(params: &BlockageParams) -> Result<f64> {
    let delta = delta_coeff(params)?;
    let a = aleph(delta, params.nu, params.omega_radius);
    Ok(params.kappa() * a * params.eta_p * PI * params.omega_radius * params.omega_radius)
}

/// Probability that at least one SBS in the disc has an unblocked LoS link.
pub fn p_los(params: &BlockageParams) -> Result<f64> {
    let e = los_exponent(params)?;
    if e > 0.0 {
        log::warn!("LoS exponent {e} is positive; clamping probability");
    }
    Ok((-e.exp_m1()).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum LinkState {
    Los,
    Blocked,
}

/// One dwell of a blockage timeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub state: LinkState,
    pub dwell: f64,
}

/// Blockage timeline of a single link, from a caller-owned generator.
///
/// Blocker occupancy starts from its stationary Poisson law.
pub fn simulate_blockage_timeline_with<R: Rng + ?Sized>(
    rng: &mut R,
    r: f64,
    delta: f64,
    nu: f64,
    omega_user: f64,
    duration: f64,
) -> Result<Vec<Segment>> {
    if !(duration > 0.0) {
        return Err(Error::Domain(format!(
            "duration must be positive, got {duration}"
        )));
    }
    let p_self = self_block_prob(omega_user)?;
    if p_self > 0.0 && rng.random::<f64>() < p_self {
        return Ok(vec![Segment {
            state: LinkState::Blocked,
            dwell: duration,
        }]);
    }
    let intervals = blocker_intervals(rng, delta * r, nu, duration);
    let mut out = Vec::new();
    let mut t = 0.0;
    for (s, e) in intervals {
        if s > t {
            push_segment(&mut out, LinkState::Los, s - t);
        }
        push_segment(&mut out, LinkState::Blocked, e - s.max(t));
        t = e;
    }
    if t < duration {
        push_segment(&mut out, LinkState::Los, duration - t);
    }
    Ok(out)
}

/// Blockage timeline of a single link for a fixed seed.
pub fn simulate_blockage_timeline(
    r: f64,
    delta: f64,
    nu: f64,
    omega_user: f64,
    duration: f64,
    seed: u64,
) -> Result<Vec<Segment>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    simulate_blockage_timeline_with(&mut rng, r, delta, nu, omega_user, duration)
}

fn push_segment(out: &mut Vec<Segment>, state: LinkState, dwell: f64) {
    if dwell <= 0.0 {
        return;
    }
    match out.last_mut() {
        Some(last) if last.state == state => last.dwell += dwell,
        _ => out.push(Segment { state, dwell }),
    }
}

/// Merged intervals in `[0, duration]` during which at least one blocker is present.
pub fn blocker_intervals<R: Rng + ?Sized>(
    rng: &mut R,
    arrival_rate: f64,
    nu: f64,
    duration: f64,
) -> Vec<(f64, f64)> {
    if !(arrival_rate > 0.0) {
        return Vec::new();
    }
    let hold = Exp::new(nu).expect("nu validated positive");
    let mut spans: Vec<(f64, f64)> = Vec::new();
    let initial = Poisson::new(arrival_rate / nu)
        .map(|d| d.sample(rng) as usize)
        .unwrap_or(0);
    for _ in 0..initial {
        spans.push((0.0, hold.sample(rng)));
    }
    let gap = Exp::new(arrival_rate).expect("arrival rate positive");
    let mut t = gap.sample(rng);
    while t < duration {
        spans.push((t, t + hold.sample(rng)));
        t += gap.sample(rng);
    }
    spans.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (s, e) in spans {
        let e = e.min(duration);
        match merged.last_mut() {
            Some(last) if s <= last.1 => last.1 = last.1.max(e),
            _ => merged.push((s, e)),
        }
    }
    merged
}
