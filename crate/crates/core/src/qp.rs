//! Generalized parity weights, the photon-number series for `W(alpha; s)`,
//! and the two convolution laws (Gaussian smoothing and beam-splitter mixing).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::order::{OrderParam, PhaseSpacePoint};
use crate::quad;

/// Normalization slack allowed on a photon-number distribution.
pub const NORM_EPS: f64 = 1e-10;

/// Default absolute tolerance for phase-space quadrature.
pub const DEFAULT_QUAD_TOL: f64 = 1e-8;

/// Weight of `|alpha, n><alpha, n|` in the generalized parity operator:
/// `((s+1)/(s-1))^n / (1-s)`.
pub fn parity_coefficient(n: u32, s: &OrderParam) -> Result<Complex64> {
    let ratio = s.ratio()?;
    Ok(ratio.powu(n) / (1.0 - s.value()))
}

/// Photon-number probabilities `p(0..=N)` plus a bound on the mass that was
/// not tabulated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonDistribution {
    probs: Vec<f64>,
    tail_bound: f64,
    /// Smallest photon number the untabulated mass may sit at.
    tail_start: usize,
    warning: bool,
}

/// Tail mass above which a distribution is flagged.
pub const TAIL_WARNING: f64 = 1e-6;

impl PhotonDistribution {
    /// Distribution whose untabulated mass lies beyond the last entry.
    pub fn new(probs: Vec<f64>, tail_bound: f64) -> Result<Self> {
        let start = probs.len();
        Self::with_tail_start(probs, tail_bound, start)
    }

    pub(crate) fn with_tail_start(probs: Vec<f64>, tail_bound: f64, tail_start: usize) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("no probabilities".into()));
        }
        if let Some((n, p)) = probs.iter().enumerate().find(|(_, p)| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidDistribution(format!("p({n}) = {p} is not a non-negative number")));
        }
        if !(tail_bound.is_finite() && tail_bound >= 0.0) {
            return Err(Error::InvalidDistribution(format!("tail bound {tail_bound} is negative")));
        }
        let total: f64 = probs.iter().sum::<f64>() + tail_bound;
        if (total - 1.0).abs() > NORM_EPS {
            return Err(Error::InvalidDistribution(format!(
                "total mass {total} is not 1 within {NORM_EPS:e}"
            )));
        }
        Ok(Self {
            probs,
            tail_bound,
            tail_start,
            warning: tail_bound > TAIL_WARNING,
        })
    }

    /// Build from a truncated table of a normalized distribution, taking the
    /// missing mass as the tail bound.
    pub fn from_truncated(probs: Vec<f64>) -> Result<Self> {
        let tail = (1.0 - probs.iter().sum::<f64>()).max(0.0);
        Self::new(probs, tail)
    }

    /// `p(n) = delta_{n,k}`.
    pub fn fock(k: usize) -> Self {
        let mut probs = vec![0.0; k + 1];
        probs[k] = 1.0;
        Self::new(probs, 0.0).expect("delta distribution is normalized")
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn tail_start(&self) -> usize {
        self.tail_start
    }

    /// Set when the untabulated mass exceeds [`TAIL_WARNING`].
    pub fn warning(&self) -> bool {
        self.warning
    }

    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }
}

/// `(2/pi) sum_n parity_coefficient(n, s) p(n)`, with the truncation error
/// bounded rigorously by the tail mass of `p`.
pub fn w_from_distribution(p: &PhotonDistribution, s: &OrderParam, tol: f64) -> Result<Complex64> {
    if !(tol > 0.0) {
        return Err(Error::param("tol", tol, "must be positive"));
    }
    let ratio = s.ratio()?;
    let prefactor = 2.0 / (PI * (1.0 - s.value()));
    let ratio_abs = ratio.norm();
    if ratio_abs > 1.0 && p.tail_bound() > 0.0 {
        return Err(Error::DivergentSeries { ratio_abs });
    }
    let bound = prefactor.norm() * ratio_abs.powi(p.tail_start() as i32) * p.tail_bound();
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
        power *= ratio;
    }
    let value = prefactor * sum;
    if s.as_real().is_some() {
        Ok(Complex64::new(value.re, 0.0))
    } else {
        Ok(value)
    }
}

/// A phase-space function `W(alpha; s)` at a fixed order, given as a callable.
pub trait Field: Sync {
    fn value(&self, alpha: Complex64) -> f64;

    /// Radius of a disk about the origin outside of which the integral of
    /// `|W|` is below `eps`.
    fn mass_radius(&self, eps: f64) -> f64;
}

/// Largest `|W(alpha; s)|` any density operator can reach for real `s <= 0`.
pub fn physical_sup(s: f64) -> f64 {
    2.0 / (PI * (1.0 - s))
}

fn real_order(s: &OrderParam, name: &'static str) -> Result<f64> {
    let v = s.require_real()?;
    if v > 0.0 {
        return Err(Error::OrderOutOfDomain {
            value: format!("{name} = {v}"),
            domain: "s <= 0",
        });
    }
    Ok(v)
}

/// Smooth `W(.; s)` into `W(alpha; s')` for `s > s'`:
/// `(2/(pi (s-s'))) int d^2 beta W(beta; s) exp(-2|alpha-beta|^2/(s-s'))`.
pub fn gaussian_smooth<W>(
    w: W,
    s: &OrderParam,
    s_prime: &OrderParam,
    alpha: PhaseSpacePoint,
    quad_tol: f64,
) -> Result<f64>
where
    W: Fn(Complex64) -> f64,
{
    let from = real_order(s, "s")?;
    let to = s_prime.require_real()?;
    if !(from > to) {
        return Err(Error::param("s_prime", to, "smoothing requires s > s'"));
    }
    if !(quad_tol > 0.0) {
        return Err(Error::param("quad_tol", quad_tol, "must be positive"));
    }
    let width = from - to;
    // normalized kernel mass beyond R is exp(-2 R^2 / width)
    let sup = physical_sup(from);
    let excluded = 0.1 * quad_tol / sup;
    let radius = (0.5 * width * (1.0 / excluded).ln()).sqrt();
    let center = alpha.alpha();
    let norm = 2.0 / (PI * width);
    let est = quad::disk(
        |beta| w(beta) * norm * (-2.0 * (center - beta).norm_sqr() / width).exp(),
        center,
        radius,
        0.9 * quad_tol,
    )?;
    Ok(est.value)
}

/// Output-port quasiprobability of a beam splitter with amplitude
/// reflectivity `r` and transmissivity `t`:
/// `(1/t^2) int d^2 beta W_a(beta; s) W_b((alpha - r beta)/t; s)`.
pub fn beamsplitter_convolve<A, B>(
    w_a: &A,
    w_b: B,
    r: f64,
    t: f64,
    s: &OrderParam,
    alpha: PhaseSpacePoint,
    quad_tol: f64,
) -> Result<f64>
where
    A: Field + ?Sized,
    B: Fn(Complex64) -> f64,
{
    if !(0.0..=1.0).contains(&r) || !(t > 0.0 && t <= 1.0) || (r * r + t * t - 1.0).abs() > 1e-12 {
        return Err(Error::NonUnitaryBeamSplitter { r, t });
    }
    let order = real_order(s, "s")?;
    if !(quad_tol > 0.0) {
        return Err(Error::param("quad_tol", quad_tol, "must be positive"));
    }
    let alpha = alpha.alpha();
    if r == 0.0 {
        // W_a integrates to one, leaving W_b(alpha / t) / t^2 with t = 1
        return Ok(w_b(alpha / t) / (t * t));
    }
    let sup_b = physical_sup(order) / (t * t);
    let radius = w_a.mass_radius(0.1 * quad_tol / sup_b);
    let inv_t2 = 1.0 / (t * t);
    let est = quad::disk(
        |beta| w_a.value(beta) * w_b((alpha - r * beta) / t) * inv_t2,
        Complex64::new(0.0, 0.0),
        radius,
        0.9 * quad_tol,
    )?;
    Ok(est.value)
}
