//! Closed-form quasiprobability functions and photon statistics of the test
//! states: the two-mode squeezed vacuum and the single-mode vacuum, coherent,
//! thermal and Fock states.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::order::{OrderParam, PhaseSpacePoint};
use crate::qp::{self, Field, PhotonDistribution};

/// Largest table the adaptive series evaluation will build.
pub const N_MAX_CAP: usize = 4096;

fn nonpositive_order(s: &OrderParam) -> Result<f64> {
    let v = s.require_real()?;
    if v > 0.0 {
        return Err(Error::OrderOutOfDomain {
            value: v.to_string(),
            domain: "s <= 0",
        });
    }
    Ok(v)
}

/// Two-mode squeezed vacuum `sum_n tanh^n(xi)/cosh(xi) |n, n>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TmsvSpec {
    xi: f64,
    cosh2: f64,
    sinh2: f64,
}

impl TmsvSpec {
    pub fn new(xi: f64) -> Result<Self> {
        if !(xi.is_finite() && xi >= 0.0) {
            return Err(Error::param("xi", xi, "squeezing must be finite and non-negative"));
        }
        Ok(Self {
            xi,
            cosh2: (2.0 * xi).cosh(),
            sinh2: (2.0 * xi).sinh(),
        })
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// `R(s) = s^2 - 2 s cosh(2 xi) + 1`.
    #[inline]
    pub fn big_r(&self, s: f64) -> f64 {
        s * s - 2.0 * s * self.cosh2 + 1.0
    }

    /// `S(s) = cosh(2 xi) - s`.
    #[inline]
    pub fn big_s(&self, s: f64) -> f64 {
        self.cosh2 - s
    }

    /// Two-mode `W(alpha, beta; s)` without domain checks.
    #[inline]
    pub fn w2_at(&self, alpha: Complex64, beta: Complex64, s: f64) -> f64 {
        let r = self.big_r(s);
        let quad = self.big_s(s) * (alpha.norm_sqr() + beta.norm_sqr()) + self.sinh2 * 2.0 * (alpha * beta).re;
        4.0 / (PI * PI * r) * (-2.0 * quad / r).exp()
    }

    /// Single-mode marginal `W(alpha; s)` without domain checks.
    #[inline]
    pub fn w1_at(&self, alpha: Complex64, s: f64) -> f64 {
        let width = self.big_s(s);
        2.0 / (PI * width) * (-2.0 * alpha.norm_sqr() / width).exp()
    }

    /// Mean photon number of either marginal, `sinh^2(xi)`.
    pub fn marginal_nbar(&self) -> f64 {
        0.5 * (self.cosh2 - 1.0)
    }
}

pub fn tmsv_w2(spec: &TmsvSpec, alpha: PhaseSpacePoint, beta: PhaseSpacePoint, s: &OrderParam) -> Result<f64> {
    let s = nonpositive_order(s)?;
    Ok(spec.w2_at(alpha.alpha(), beta.alpha(), s))
}

pub fn tmsv_w1(spec: &TmsvSpec, alpha: PhaseSpacePoint, s: &OrderParam) -> Result<f64> {
    let s = nonpositive_order(s)?;
    Ok(spec.w1_at(alpha.alpha(), s))
}

/// Thermal state `W(beta; s) = 2/(pi D) exp(-2|beta|^2/D)` with `D = 1 + 2 nbar - s`.
pub fn thermal_w(nbar: f64, beta: PhaseSpacePoint, s: &OrderParam) -> Result<f64> {
    if !(nbar.is_finite() && nbar >= 0.0) {
        return Err(Error::param("nbar", nbar, "must be finite and non-negative"));
    }
    let s = nonpositive_order(s)?;
    let width = 1.0 + 2.0 * nbar - s;
    Ok(2.0 / (PI * width) * (-2.0 * beta.alpha().norm_sqr() / width).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SingleModeState {
    Vacuum,
    Coherent(Complex64),
    Thermal(f64),
    Fock(u32),
}

impl SingleModeState {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SingleModeState::Coherent(z) if !(z.re.is_finite() && z.im.is_finite()) => {
                Err(Error::param("z", z, "coherent amplitude must be finite"))
            }
            SingleModeState::Thermal(nbar) if !(nbar.is_finite() && nbar >= 0.0) => {
                Err(Error::param("nbar", nbar, "must be finite and non-negative"))
            }
            _ => Ok(()),
        }
    }

    /// Closed-form `W(alpha; s)` for real `s < 1`.
    pub fn analytic_w(&self, alpha: Complex64, s: f64) -> f64 {
        match *self {
            SingleModeState::Vacuum => gaussian(alpha, 1.0 - s),
            SingleModeState::Coherent(z) => gaussian(alpha - z, 1.0 - s),
            SingleModeState::Thermal(nbar) => gaussian(alpha, 1.0 + 2.0 * nbar - s),
            SingleModeState::Fock(n) => fock_w(n, alpha.norm_sqr(), s),
        }
    }

    /// The state's closed form bound to an order, usable as a convolution input.
    pub fn field(self, s: f64) -> StateField {
        StateField { state: self, s }
    }
}

fn gaussian(delta: Complex64, width: f64) -> f64 {
    2.0 / (PI * width) * (-2.0 * delta.norm_sqr() / width).exp()
}

/// Coefficients `c_k` of `((s+1)/(s-1))^n L_n(4x/(1-s^2)) = sum_k c_k x^k`,
/// written so `s = -1` needs no limit.
fn fock_poly(n: u32, s: f64) -> Vec<f64> {
    let n = n as i32;
    let mut coeffs = Vec::with_capacity(n as usize + 1);
    let mut binom = 1.0;
    let mut kfact = 1.0;
    for k in 0..=n {
        if k > 0 {
            binom *= (n - k + 1) as f64 / k as f64;
            kfact *= k as f64;
        }
        let sign = if (n + k) % 2 == 0 { 1.0 } else { -1.0 };
        let c = sign * binom * (1.0 + s).powi(n - k) * 4f64.powi(k) / ((1.0 - s).powi(n + k) * kfact);
        coeffs.push(c);
    }
    coeffs
}

fn fock_w(n: u32, x: f64, s: f64) -> f64 {
    let poly = fock_poly(n, s).iter().rev().fold(0.0, |acc, c| acc * x + c);
    2.0 / (PI * (1.0 - s)) * (-2.0 * x / (1.0 - s)).exp() * poly
}

/// A single-mode state's closed-form `W` at a fixed order.
#[derive(Debug, Clone, Copy)]
pub struct StateField {
    pub state: SingleModeState,
    pub s: f64,
}

impl Field for StateField {
    fn value(&self, alpha: Complex64) -> f64 {
        self.state.analytic_w(alpha, self.s)
    }

    fn mass_radius(&self, eps: f64) -> f64 {
        let gaussian_radius = |width: f64| (0.5 * width * (1.0 / eps).ln().max(0.0)).sqrt();
        match self.state {
            SingleModeState::Vacuum => gaussian_radius(1.0 - self.s),
            SingleModeState::Coherent(z) => z.norm() + gaussian_radius(1.0 - self.s),
            SingleModeState::Thermal(nbar) => gaussian_radius(1.0 + 2.0 * nbar - self.s),
            SingleModeState::Fock(n) => fock_mass_radius(n, self.s, eps),
        }
    }
}

/// Upper bound on the `|W|` mass of a Fock state outside radius `sqrt(x0)`:
/// `(2/(1-s)) sum_k |c_k| Gamma(k+1, a x0) / a^(k+1)` with `a = 2/(1-s)`.
fn fock_tail_mass(n: u32, s: f64, x0: f64) -> f64 {
    let a = 2.0 / (1.0 - s);
    let y = a * x0;
    let mut total = 0.0;
    for (k, c) in fock_poly(n, s).iter().enumerate() {
        // Gamma(k+1, y) = k! e^-y sum_{j<=k} y^j/j!
        let mut term = 1.0;
        let mut partial = 1.0;
        for j in 1..=k {
            term *= y / j as f64;
            partial += term;
        }
        let kfact: f64 = (1..=k).map(|j| j as f64).product();
        total += c.abs() * kfact * (-y).exp() * partial / a.powi(k as i32 + 1);
    }
    2.0 / (1.0 - s) * total
}

fn fock_mass_radius(n: u32, s: f64, eps: f64) -> f64 {
    let mut radius: f64 = 1.0;
    while fock_tail_mass(n, s, radius * radius) > eps {
        radius *= 1.25;
    }
    radius
}

/// `p_alpha(n) = <alpha, n| rho |alpha, n>` for `n <= n_max`, with the
/// untabulated mass as tail bound.
pub fn photon_distribution(
    state: &SingleModeState,
    displacement: PhaseSpacePoint,
    n_max: usize,
) -> Result<PhotonDistribution> {
    if n_max < 1 {
        return Err(Error::param("n_max", n_max, "must be at least 1"));
    }
    state.validate()?;
    let alpha = displacement.alpha();
    let probs = match *state {
        SingleModeState::Vacuum => poisson((alpha).norm_sqr(), n_max),
        SingleModeState::Coherent(z) => poisson((z - alpha).norm_sqr(), n_max),
        SingleModeState::Thermal(nbar) => displaced_thermal(nbar, alpha.norm_sqr(), n_max),
        SingleModeState::Fock(k) => displaced_fock(k as usize, alpha.norm_sqr(), n_max),
    };
    PhotonDistribution::from_truncated(probs)
}

fn poisson(mean: f64, n_max: usize) -> Vec<f64> {
    let mut probs = Vec::with_capacity(n_max + 1);
    let mut p = (-mean).exp();
    for n in 0..=n_max {
        probs.push(p);
        p *= mean / (n + 1) as f64;
    }
    probs
}

/// Laguerre-weighted statistics of a thermal state seen from displacement
/// `|alpha|^2 = x`: `nbar^n/(1+nbar)^(n+1) e^(-x/(1+nbar)) L_n(-x/(nbar(1+nbar)))`,
/// generated by the scaled three-term recurrence (finite at `nbar = 0`).
fn displaced_thermal(nbar: f64, x: f64, n_max: usize) -> Vec<f64> {
    let c = nbar / (1.0 + nbar);
    let y = x / ((1.0 + nbar) * (1.0 + nbar));
    let mut probs = Vec::with_capacity(n_max + 1);
    let q0 = (-x / (1.0 + nbar)).exp() / (1.0 + nbar);
    probs.push(q0);
    let mut prev = 0.0;
    let mut cur = q0;
    for n in 0..n_max {
        let nf = n as f64;
        let next = (((2.0 * nf + 1.0) * c + y) * cur - nf * c * c * prev) / (nf + 1.0);
        probs.push(next.max(0.0));
        prev = cur;
        cur = next;
    }
    probs
}

/// Generalized Laguerre `L_k^(a)(x)` by upward recurrence in the degree.
fn laguerre(k: usize, a: f64, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 + a - x;
    for j in 1..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + a - x) * cur - (jf + a) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `|<n| D(alpha) |k>|^2 = (k!/n!) x^(n-k) e^-x [L_k^(n-k)(x)]^2` for `n >= k`
/// (and with `n`, `k` exchanged otherwise), `x = |alpha|^2`.
fn displaced_fock(k: usize, x: f64, n_max: usize) -> Vec<f64> {
    let mut probs = Vec::with_capacity(n_max + 1);
    for n in 0..k.min(n_max + 1) {
        // n!/k! x^(k-n) e^-x
        let mut pre = (-x).exp();
        for j in (n + 1)..=k {
            pre *= x / j as f64;
        }
        let l = laguerre(n, (k - n) as f64, x);
        probs.push(pre * l * l);
    }
    let mut pre = (-x).exp();
    for n in k..=n_max {
        let l = laguerre(k, (n - k) as f64, x);
        probs.push(pre * l * l);
        pre *= x / (n + 1) as f64;
    }
    probs
}

/// `W(alpha; s)` of a single-mode state from its photon statistics, growing
/// the table until the truncation bound is below `tol`.
pub fn w_series(state: &SingleModeState, alpha: PhaseSpacePoint, s: &OrderParam, tol: f64) -> Result<f64> {
    let mut n_max = 32;
    loop {
        let p = photon_distribution(state, alpha, n_max)?;
        match qp::w_from_distribution(&p, s, tol) {
            Ok(w) => return Ok(w.re),
            Err(Error::SeriesUnconverged { .. }) if n_max < N_MAX_CAP => {
                n_max = (n_max * 2).min(N_MAX_CAP);
            }
            Err(e) => return Err(e),
        }
    }
}
