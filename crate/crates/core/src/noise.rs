//! Noise laws: detection loss and a thermal environment both act on the
//! quasiprobability function as a change of the order parameter.
//!
//! * loss with efficiency `eta`: `1 - s' = (1 - s) / eta`, `W_eta = W(.; s') / eta`
//! * thermal channel `(r, nbar)`: `s' = (s - r^2 (1 + 2 nbar)) / t^2`,
//!   `W(alpha; s; tau) = W(alpha / t; s') / t^2`
//!
//! Both modes of a two-mode state always see identical noise.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::order::{OrderKind, OrderParam, PhaseSpacePoint};
use crate::qp::{self, PhotonDistribution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionNoise {
    eta: f64,
}

impl DetectionNoise {
    pub fn new(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::param("eta", eta, "detection efficiency must lie in (0, 1]"));
        }
        Ok(Self { eta })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
}

/// Thermal environment after dimensionless time `r = sqrt(1 - exp(-gamma tau))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalNoise {
    r: f64,
    nbar: f64,
}

impl ThermalNoise {
    pub fn new(r: f64, nbar: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::param("r", r, "reflectivity must lie in [0, 1)"));
        }
        if !(nbar.is_finite() && nbar >= 0.0) {
            return Err(Error::param("nbar", nbar, "must be finite and non-negative"));
        }
        Ok(Self { r, nbar })
    }

    /// Channel after decay `gamma * tau`.
    pub fn from_decay(gamma_tau: f64, nbar: f64) -> Result<Self> {
        if !(gamma_tau.is_finite() && gamma_tau >= 0.0) {
            return Err(Error::param("gamma_tau", gamma_tau, "must be finite and non-negative"));
        }
        Self::new((1.0 - (-gamma_tau).exp()).sqrt(), nbar)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// `t = sqrt(1 - r^2)`.
    pub fn t(&self) -> f64 {
        (1.0 - self.r * self.r).sqrt()
    }

    pub fn nbar(&self) -> f64 {
        self.nbar
    }
}

/// `1 - s' = (1 - s) / eta`. Also covers the complex d-outcome order.
pub fn rescale_detection(s: &OrderParam, noise: &DetectionNoise) -> OrderParam {
    let eta = noise.eta();
    match s.kind() {
        OrderKind::RealWitness => {
            let v = s.as_real().expect("witness orders are real");
            // keep eta = 1 bit-exact; 1 - (1 - s) rounds
            let mapped = if eta == 1.0 { v } else { 1.0 - (1.0 - v) / eta };
            OrderParam::rescaled(mapped).expect("s < 1 maps to s' < 1")
        }
        OrderKind::DOutcome { d } => {
            OrderParam::rescaled_complex(Complex64::new(1.0, 0.0) - (1.0 - s.value()) / eta, d)
        }
    }
}

/// Bernoulli thinning `p_eta(m) = sum_{n>=m} C(n,m) (1-eta)^(n-m) eta^m p(n)`.
///
/// The untabulated mass of `p` may land on any count after thinning, so the
/// result's tail starts at zero.
pub fn bernoulli_detect(p: &PhotonDistribution, noise: &DetectionNoise) -> PhotonDistribution {
    let eta = noise.eta();
    if eta == 1.0 {
        return p.clone();
    }
    let probs = p.probs();
    let mut out = vec![0.0; probs.len()];
    // row n of the binomial(n, eta) pmf, built by Pascal's rule
    let mut row = vec![0.0; probs.len()];
    row[0] = 1.0;
    for (n, &pn) in probs.iter().enumerate() {
        if n > 0 {
            for m in (1..=n).rev() {
                row[m] = (1.0 - eta) * row[m] + eta * row[m - 1];
            }
            row[0] *= 1.0 - eta;
        }
        if pn != 0.0 {
            for m in 0..=n {
                out[m] += row[m] * pn;
            }
        }
    }
    let tail_start = if p.tail_bound() > 0.0 { 0 } else { out.len() };
    PhotonDistribution::with_tail_start(out, p.tail_bound(), tail_start)
        .expect("thinning preserves normalization")
}

/// Quasiprobability reconstructed with inefficient detectors, by two routes:
/// the series over the thinned statistics, and `W(alpha; s') / eta` from the
/// ideal statistics. Returns the former; fails if they disagree beyond `tol`.
pub fn lossy_w(p: &PhotonDistribution, s: &OrderParam, noise: &DetectionNoise, tol: f64) -> Result<f64> {
    let v = s.require_real()?;
    if v > 0.0 {
        return Err(Error::OrderOutOfDomain {
            value: v.to_string(),
            domain: "s <= 0",
        });
    }
    let thinned = bernoulli_detect(p, noise);
    let direct = qp::w_from_distribution(&thinned, s, tol)?.re;
    let rescaled = rescale_detection(s, noise);
    let closed = qp::w_from_distribution(p, &rescaled, tol)?.re / noise.eta();
    let residual = (direct - closed).abs();
    if residual > tol {
        return Err(Error::Consistency {
            what: "lossy quasiprobability",
            residual,
            tol,
        });
    }
    Ok(direct)
}

/// The d-outcome function measured with efficiency `eta`:
/// `(2/(pi (1 - s_d))) sum_n (1 - eta + eta omega)^n p(n)`.
pub fn lossy_w_d_outcome(p: &PhotonDistribution, d: u32, noise: &DetectionNoise, tol: f64) -> Result<Complex64> {
    let s = OrderParam::d_outcome(d)?;
    let omega = s.omega().expect("d-outcome order carries omega");
    let eta = noise.eta();
    let base = Complex64::new(1.0 - eta, 0.0) + omega * eta;
    let prefactor = 2.0 / (PI * (1.0 - s.value()));
    let bound = prefactor.norm() * base.norm().powi(p.tail_start() as i32) * p.tail_bound();
    if bound >= tol {
        return Err(Error::SeriesUnconverged {
            bound,
            tol,
            n_max: p.n_max(),
        });
    }
    let mut power = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for &pn in p.probs() {
        sum += power * pn;
        power *= base;
    }
    Ok(prefactor * sum)
}

/// `s'(tau) = (s - r^2 (1 + 2 nbar)) / t^2`.
pub fn rescale_thermal(s: &OrderParam, noise: &ThermalNoise) -> Result<OrderParam> {
    let v = s.require_real()?;
    if v > 0.0 {
        return Err(Error::OrderOutOfDomain {
            value: v.to_string(),
            domain: "s <= 0",
        });
    }
    let r2 = noise.r() * noise.r();
    OrderParam::rescaled((v - r2 * (1.0 + 2.0 * noise.nbar())) / (1.0 - r2))
}

/// Single-mode evolution `W(alpha; s; tau) = W(alpha/t; s'(tau); 0) / t^2`.
/// `base_w(point, order)` evaluates the initial state at any order.
pub fn evolve_thermal_w<F>(base_w: F, s: &OrderParam, noise: &ThermalNoise, alpha: PhaseSpacePoint) -> Result<f64>
where
    F: Fn(Complex64, f64) -> f64,
{
    let s_prime = rescale_thermal(s, noise)?.as_real().expect("real order");
    let t = noise.t();
    Ok(base_w(alpha.alpha() / t, s_prime) / (t * t))
}

/// Two-mode evolution with identical independent channels on both modes:
/// `W(alpha, beta; s; tau) = W(alpha/t, beta/t; s'(tau); 0) / t^4`.
pub fn evolve_thermal_w2<F>(
    base_w2: F,
    s: &OrderParam,
    noise: &ThermalNoise,
    alpha: PhaseSpacePoint,
    beta: PhaseSpacePoint,
) -> Result<f64>
where
    F: Fn(Complex64, Complex64, f64) -> f64,
{
    let s_prime = rescale_thermal(s, noise)?.as_real().expect("real order");
    let t = noise.t();
    let t2 = t * t;
    Ok(base_w2(alpha.alpha() / t, beta.alpha() / t, s_prime) / (t2 * t2))
}
