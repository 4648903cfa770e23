//! Closed-form moments of the transmission delay and of the end-to-end delay
//! through the tandem queue (M/M/1 at the edge server, M/G/1 at the SBS).
//!
//! The LoS probability seen by a request depends on the user's orientation.
//! Averaging `P = 1 - e^{πZϰ}` over a uniform `ϰ` gives its first three
//! moments in closed form, which drive the transmission-delay moments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::LinkBudget;
use crate::error::{Error, Result};

const SMALL_PIZ: f64 = 0.05;
const VA_FALLBACK_DRAWS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QueueParams {
    /// Request arrival rate at the edge server, 1/s.
    pub lambda1: f64,
    /// Edge-server service rate, 1/s.
    pub mu1: f64,
    /// Arrival rate at the SBS queue, 1/s.
    pub lambda2: f64,
    /// Content size in bits.
    pub l_bits: f64,
    /// Constant beam-tracking delay added to every request, s.
    pub beam_tracking_delay: f64,
}

impl Default for QueueParams {
    fn default() -> Self {
        QueueParams {
            lambda1: 0.1,
            mu1: 700.1,
            lambda2: 0.1,
            l_bits: 10e6,
            beam_tracking_delay: 0.0,
        }
    }
}

impl QueueParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lambda1", self.lambda1),
            ("mu1", self.mu1),
            ("lambda2", self.lambda2),
            ("L", self.l_bits),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.beam_tracking_delay >= 0.0) {
            return Err(Error::Config(format!(
                "beam_tracking_delay must be nonnegative, got {}",
                self.beam_tracking_delay
            )));
        }
        if !(self.mu1 > self.lambda1) {
            return Err(Error::Config(format!(
                "stability requires mu1 > lambda1, got mu1 = {} and lambda1 = {}",
                self.mu1, self.lambda1
            )));
        }
        Ok(())
    }

    /// Mean sojourn time at the edge server.
    pub fn e_t1(&self) -> f64 {
        1.0 / (self.mu1 - self.lambda1)
    }
}

/// Whether LoS is always available or subject to blockage with parameter `Z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Availability {
    Guaranteed,
    Blockage { z: f64 },
}

/// Which expression feeds `C²_α` into the Pollaczek–Khinchine mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum C2Form {
    /// `Vₐ / rate²`, as printed alongside the mean delay.
    #[default]
    Printed,
    /// `Vₐ` alone, which is dimensionless.
    Normalized,
}

/// Which expression gives the second moment of the SBS sojourn time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SecondMomentForm {
    /// Second derivative of the M/G/1 sojourn-time transform.
    #[default]
    Transform,
    /// The published expression, kept for comparison.
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DelayOptions {
    pub c2_form: C2Form,
    pub second_moment_form: SecondMomentForm,
}

/// Transmission-delay moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TxMoments {
    pub e_alpha: f64,
    pub e_alpha2: f64,
    pub e_alpha3: f64,
    pub c2_alpha: f64,
    pub va: f64,
    /// True when `va` came from sampling because the closed forms disagreed.
    pub va_fallback: bool,
}

impl TxMoments {
    /// Moments of an exponential service time with rate `mu2`.
    pub fn exponential(mu2: f64) -> Self {
        TxMoments {
            e_alpha: 1.0 / mu2,
            e_alpha2: 2.0 / (mu2 * mu2),
            e_alpha3: 6.0 / (mu2 * mu2 * mu2),
            c2_alpha: 1.0,
            va: 1.0,
            va_fallback: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DelayMoments {
    pub e_alpha: f64,
    pub e_alpha2: f64,
    pub e_alpha3: f64,
    pub c2_alpha: f64,
    pub e_t1: f64,
    pub e_t2: f64,
    pub mean_e2e: f64,
    pub second_moment_e2e: f64,
    pub var_e2e: f64,
}

/// `Z = ℵ η_P Ω²`.
pub fn z_param(aleph: f64, eta_p: f64, omega_radius: f64) -> f64 {
    aleph * eta_p * omega_radius * omega_radius
}

fn check_z(z: f64, what: &str) -> Result<f64> {
    if !(z < 0.0) {
        return Err(Error::model(
            what,
            format!("Z = {z} must be negative; a nonnegative Z has no LoS interpretation"),
        ));
    }
    Ok(std::f64::consts::PI * z)
}

/// `E[P(Λ)] = 1 - (e^{πZ} - 1)/(πZ)`.
pub fn mean_plos_over_orientation(z: f64) -> Result<f64> {
    let a = check_z(z, "E[P(Lambda)]")?;
    if a.abs() < SMALL_PIZ {
        let t = 1.0 / 5040.0 + a * (1.0 / 40320.0 + a / 362_880.0);
        let t = 1.0 / 24.0 + a * (1.0 / 120.0 + a * (1.0 / 720.0 + a * t));
        return Ok(-a * (0.5 + a * (1.0 / 6.0 + a * t)));
    }
    Ok(1.0 - a.exp_m1() / a)
}

/// `E[P(Λ)²] = 1 + (e^{2πZ} - 4e^{πZ} + 3)/(2πZ)`.
pub fn second_moment_plos(z: f64) -> Result<f64> {
    let a = check_z(z, "E[P(Lambda)^2]")?;
    if a.abs() < SMALL_PIZ {
        let t = 31.0 / 2520.0 + a * (1.0 / 320.0 + a * 127.0 / 181_440.0);
        return Ok(a * a * (1.0 / 3.0 + a * (0.25 + a * (7.0 / 60.0 + a * (1.0 / 24.0 + a * t)))));
    }
    Ok(1.0 + ((2.0 * a).exp() - 4.0 * a.exp() + 3.0) / (2.0 * a))
}

/// Denominator `2e^{3πZ} - 9e^{2πZ} + 18e^{πZ} - 6πZ - 11` of the third moment.
pub fn third_moment_denominator(z: f64) -> Result<f64> {
    let a = check_z(z, "third-moment denominator")?;
    if a.abs() < SMALL_PIZ {
        // Taylor expansion; the constant and linear parts cancel.
        let t = 5.0 / 4.0 + a * (9.0 / 14.0 + a * 43.0 / 160.0);
        return Ok(a.powi(4) * (1.5 + a * (1.8 + a * t)));
    }
    Ok(2.0 * (3.0 * a).exp() - 9.0 * (2.0 * a).exp() + 18.0 * a.exp() - 6.0 * a - 11.0)
}

/// `E[P(Λ)³] = -D / (6πZ)` with `D` the third-moment denominator.
pub fn third_moment_plos(z: f64) -> Result<f64> {
    let a = check_z(z, "E[P(Lambda)^3]")?;
    if a.abs() < SMALL_PIZ {
        let t = 3.0 / 28.0 + a * (43.0 / 960.0 + a * 23.0 / 1440.0);
        return Ok(-a * a * a * (0.25 + a * (0.3 + a * (5.0 / 24.0 + a * t))));
    }
    Ok(-third_moment_denominator(z)? / (6.0 * a))
}

/// `Vₐ = (E[P²] - E[P]²) / E[P]²` from the two closed-form moments.
pub fn va(z: f64) -> Result<f64> {
    let m1 = mean_plos_over_orientation(z)?;
    if m1 == 0.0 {
        return Err(Error::model("V_a(Z)", "E[P(Lambda)] is zero"));
    }
    let m2 = second_moment_plos(z)?;
    Ok((m2 - m1 * m1) / (m1 * m1))
}

/// `Vₐ` estimated by sampling the orientation.
pub fn va_monte_carlo(z: f64, draws: usize, seed: u64) -> Result<f64> {
    let a = check_z(z, "V_a(Z) sampling")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut s1, mut s2) = (0.0, 0.0);
    for _ in 0..draws {
        let p = -(a * rng.random::<f64>()).exp_m1();
        s1 += p;
        s2 += p * p;
    }
    let n = draws as f64;
    let (m1, m2) = (s1 / n, s2 / n);
    if m1 == 0.0 {
        return Err(Error::model(
            "V_a(Z) sampling",
            "sampled E[P(Lambda)] is zero",
        ));
    }
    Ok((m2 - m1 * m1) / (m1 * m1))
}

/// `Vₐ` with a sampled substitute wherever the closed form goes negative.
pub fn va_checked(z: f64) -> Result<(f64, bool)> {
    let v = va(z)?;
    if v >= 0.0 {
        return Ok((v, false));
    }
    let mc = va_monte_carlo(z, VA_FALLBACK_DRAWS, 0x5eed)?;
    log::warn!("V_a closed form is negative ({v:e}) at Z = {z}; using sampled value {mc:e}");
    Ok((mc, true))
}

/// Moments of `α = L / (P(Λ) C_L)` with the rate taken at the mean interference.
pub fn tx_delay_moments(
    link: &LinkBudget,
    queue: &QueueParams,
    availability: Availability,
    c2_form: C2Form,
) -> Result<TxMoments> {
    let rate = link.rate_los;
    if !(rate > 0.0) {
        return Err(Error::model(
            "rate_los",
            format!("rate must be positive, got {rate}"),
        ));
    }
    let l = queue.l_bits;
    let (m1, m2, m3, va_value, fallback) = match availability {
        Availability::Guaranteed => (1.0, 1.0, 1.0, 0.0, false),
        Availability::Blockage { z } => {
            let m1 = mean_plos_over_orientation(z)?;
            let m2 = second_moment_plos(z)?;
            let d = third_moment_denominator(z)?;
            if !(d > 0.0) {
                return Err(Error::model(
                    "2e^{3piZ} - 9e^{2piZ} + 18e^{piZ} - 6piZ - 11",
                    format!("denominator is {d:e}"),
                ));
            }
            let m3 = third_moment_plos(z)?;
            let (v, fb) = va_checked(z)?;
            (m1, m2, m3, v, fb)
        }
    };
    for (name, m) in [("E[P]", m1), ("E[P^2]", m2), ("E[P^3]", m3)] {
        if !(m > 0.0) {
            return Err(Error::model(
                name,
                format!("moment is {m:e}, must be positive"),
            ));
        }
    }
    let c2 = match c2_form {
        C2Form::Printed => va_value / (rate * rate),
        C2Form::Normalized => va_value,
    };
    Ok(TxMoments {
        e_alpha: l / (m1 * rate),
        e_alpha2: l * l / (m2 * rate * rate),
        e_alpha3: l * l * l / (m3 * rate * rate * rate),
        c2_alpha: c2,
        va: va_value,
        va_fallback: fallback,
    })
}

fn rho2(tx: &TxMoments, queue: &QueueParams) -> Result<f64> {
    let rho = queue.lambda2 * tx.e_alpha;
    if !(rho < 1.0) {
        return Err(Error::Unstable { queue: "Q2", rho });
    }
    Ok(rho)
}

fn check_q1(queue: &QueueParams) -> Result<()> {
    if !(queue.mu1 > queue.lambda1) {
        return Err(Error::Unstable {
            queue: "Q1",
            rho: queue.lambda1 / queue.mu1,
        });
    }
    Ok(())
}

/// Mean sojourn at the SBS queue from the Pollaczek–Khinchine formula.
pub fn mean_t2(tx: &TxMoments, queue: &QueueParams) -> Result<f64> {
    let rho = rho2(tx, queue)?;
    Ok((rho / (2.0 * (1.0 - rho)) * (tx.c2_alpha + 1.0) + 1.0) * tx.e_alpha)
}

/// Mean end-to-end delay including the beam-tracking offset.
pub fn mean_e2e(tx: &TxMoments, queue: &QueueParams) -> Result<f64> {
    check_q1(queue)?;
    Ok(queue.e_t1() + mean_t2(tx, queue)? + queue.beam_tracking_delay)
}

/// Second moment of the SBS sojourn time.
pub fn second_moment_t2(
    tx: &TxMoments,
    queue: &QueueParams,
    form: SecondMomentForm,
) -> Result<f64> {
    let rho = rho2(tx, queue)?;
    let wait = rho / (2.0 * (1.0 - rho)) * tx.e_alpha2 / tx.e_alpha;
    Ok(match form {
        SecondMomentForm::Transform => {
            tx.e_alpha2
                + queue.lambda2 * tx.e_alpha3 / (3.0 * (1.0 - rho))
                + rho * tx.e_alpha2 / (1.0 - rho)
                + 2.0 * wait * wait
        }
        SecondMomentForm::Printed => {
            tx.e_alpha2
                + rho * tx.e_alpha3 / (3.0 * (1.0 - rho))
                + rho * tx.e_alpha2 / (2.0 * (1.0 - rho))
                + wait * wait
        }
    })
}

/// Second moment of the end-to-end delay including the beam-tracking offset.
pub fn second_moment_e2e(
    tx: &TxMoments,
    queue: &QueueParams,
    form: SecondMomentForm,
) -> Result<f64> {
    check_q1(queue)?;
    let t1 = queue.e_t1();
    let t2 = mean_t2(tx, queue)?;
    let raw = 2.0 * t1 * t2 + 2.0 * t1 * t1 + second_moment_t2(tx, queue, form)?;
    let b = queue.beam_tracking_delay;
    Ok(raw + 2.0 * b * (t1 + t2) + b * b)
}

/// Full moment set for a link, queue and availability model.
pub fn delay_moments(
    link: &LinkBudget,
    queue: &QueueParams,
    availability: Availability,
    options: DelayOptions,
) -> Result<DelayMoments> {
    let tx = tx_delay_moments(link, queue, availability, options.c2_form)?;
    moments_from_tx(&tx, queue, options.second_moment_form)
}

pub fn moments_from_tx(
    tx: &TxMoments,
    queue: &QueueParams,
    form: SecondMomentForm,
) -> Result<DelayMoments> {
    let mean = mean_e2e(tx, queue)?;
    let second = second_moment_e2e(tx, queue, form)?;
    let var = second - mean * mean;
    if var < 0.0 {
        return Err(Error::model(
            "Var[T1 + T2]",
            format!(
                "second moment {second:e} is below the squared mean {:e}",
                mean * mean
            ),
        ));
    }
    Ok(DelayMoments {
        e_alpha: tx.e_alpha,
        e_alpha2: tx.e_alpha2,
        e_alpha3: tx.e_alpha3,
        c2_alpha: tx.c2_alpha,
        e_t1: queue.e_t1(),
        e_t2: mean_t2(tx, queue)?,
        mean_e2e: mean,
        second_moment_e2e: second,
        var_e2e: var,
    })
}
