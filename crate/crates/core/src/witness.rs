//! The bounded observable `O(alpha; s) = (1-s)^2 Pi(alpha; s) + s` and the
//! CHSH-shaped witness built from it:
//!
//! ```text
//! B(s) = pi^2 (1-s)^4 / 4 [W(a1,b1) + W(a1,b2) + W(a2,b1) - W(a2,b2)]
//!      + pi s (1-s)^2 [W(a1) + W(b1)] + 2 s^2
//! ```
//!
//! Separable states satisfy `|B| <= 2` for `s` in `[-1, 0]`. Under noise the
//! witness is evaluated at the rescaled order `s'`; when `s' < -1` the
//! clamping rule ([`ClampRule`]) decides which bounded observable is used.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{self, DetectionNoise, ThermalNoise};
use crate::order::{OrderParam, PhaseSpacePoint};
use crate::states::TmsvSpec;

/// Agreement required between the two algebraic forms of a noisy witness.
pub const FORM_TOL: f64 = 1e-10;

/// Eigenvalue `e_n(s) = (1-s) ((s+1)/(s-1))^n + s` of the bounded observable.
pub fn observable_eigenvalue(n: u32, s: f64) -> f64 {
    (1.0 - s) * ((s + 1.0) / (s - 1.0)).powi(n as i32) + s
}

/// How the witness is formed once noise pushes the order below `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClampRule {
    /// `B(-1)` of the equivalent lossy state: the on/off observable
    /// `2 (1-s') Pi(alpha; s') - 1` with eigenvalues `2 q^n - 1`,
    /// `q = (s'+1)/(s'-1)`.
    #[default]
    LossChannel,
    /// Coefficients frozen at `s = -1` with the distributions left at `s'`:
    /// `4 Pi(alpha; s') - 1`.
    FrozenCoefficients,
}

impl ClampRule {
    pub fn name(&self) -> &'static str {
        match self {
            ClampRule::LossChannel => "loss-channel",
            ClampRule::FrozenCoefficients => "frozen",
        }
    }
}

/// Eigenvalues of the observable actually measured at rescaled order `s'`.
pub fn effective_eigenvalue(n: u32, s_prime: f64, rule: ClampRule) -> f64 {
    if s_prime >= -1.0 {
        return observable_eigenvalue(n, s_prime);
    }
    let q = (s_prime + 1.0) / (s_prime - 1.0);
    match rule {
        ClampRule::LossChannel => 2.0 * q.powi(n as i32) - 1.0,
        ClampRule::FrozenCoefficients => 4.0 * q.powi(n as i32) / (1.0 - s_prime) - 1.0,
    }
}

/// Weights of the witness: `B = correlation * chsh + marginal * (W(a1) + W(b1)) + constant`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellCoefficients {
    pub correlation: f64,
    pub marginal: f64,
    pub constant: f64,
}

impl BellCoefficients {
    /// Coefficients of the observable `X Pi + Y`.
    fn from_observable(x: f64, y: f64) -> Self {
        Self {
            correlation: x * x * PI * PI / 4.0,
            marginal: x * y * PI,
            constant: 2.0 * y * y,
        }
    }

    /// The unclamped witness at order `s`.
    pub fn at(s: f64) -> Self {
        Self::from_observable((1.0 - s) * (1.0 - s), s)
    }

    /// Coefficients at a rescaled order, and whether clamping applied.
    pub fn for_rescaled(s_prime: f64, rule: ClampRule) -> (Self, bool) {
        if s_prime >= -1.0 {
            return (Self::at(s_prime), false);
        }
        let coeffs = match rule {
            ClampRule::LossChannel => Self::from_observable(2.0 * (1.0 - s_prime), -1.0),
            ClampRule::FrozenCoefficients => Self::at(-1.0),
        };
        (coeffs, true)
    }

    /// Fold measured-data scale factors into the weights.
    pub fn scaled(&self, two_mode: f64, single_mode: f64) -> Self {
        Self {
            correlation: self.correlation * two_mode,
            marginal: self.marginal * single_mode,
            constant: self.constant,
        }
    }

    pub fn combine(&self, sums: &WitnessSums) -> f64 {
        self.correlation * sums.chsh + self.marginal * sums.marginals + self.constant
    }
}

/// The four displacement settings `(alpha_1, alpha_2, beta_1, beta_2)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BellSettings {
    pub a1: Complex64,
    pub a2: Complex64,
    pub b1: Complex64,
    pub b2: Complex64,
}

impl BellSettings {
    pub fn new(a1: Complex64, a2: Complex64, b1: Complex64, b2: Complex64) -> Result<Self> {
        let s = Self { a1, a2, b1, b2 };
        for (name, z) in [("a1", a1), ("a2", a2), ("b1", b1), ("b2", b2)] {
            PhaseSpacePoint::new(z).map_err(|_| Error::param(name, z, "setting must be finite"))?;
        }
        Ok(s)
    }

    /// Settings from `[a1_re, a1_im, a2_re, a2_im, b1_re, b1_im, b2_re, b2_im]`.
    pub fn from_coords(x: &[f64; 8]) -> Self {
        Self {
            a1: Complex64::new(x[0], x[1]),
            a2: Complex64::new(x[2], x[3]),
            b1: Complex64::new(x[4], x[5]),
            b2: Complex64::new(x[6], x[7]),
        }
    }

    pub fn coords(&self) -> [f64; 8] {
        [
            self.a1.re, self.a1.im, self.a2.re, self.a2.im, self.b1.re, self.b1.im, self.b2.re, self.b2.im,
        ]
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            a1: self.a1 * factor,
            a2: self.a2 * factor,
            b1: self.b1 * factor,
            b2: self.b2 * factor,
        }
    }
}

/// The state-dependent parts of the witness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessSums {
    /// `W(a1,b1) + W(a1,b2) + W(a2,b1) - W(a2,b2)`
    pub chsh: f64,
    /// `W(a1) + W(b1)`
    pub marginals: f64,
}

impl WitnessSums {
    pub fn evaluate<W2, WA, WB>(w2: W2, w1a: WA, w1b: WB, settings: &BellSettings) -> Self
    where
        W2: Fn(Complex64, Complex64) -> f64,
        WA: Fn(Complex64) -> f64,
        WB: Fn(Complex64) -> f64,
    {
        let BellSettings { a1, a2, b1, b2 } = *settings;
        Self {
            chsh: w2(a1, b1) + w2(a1, b2) + w2(a2, b1) - w2(a2, b2),
            marginals: w1a(a1) + w1b(b1),
        }
    }
}

/// `B(s)` from a two-mode evaluator and the two marginals, all at order `s`.
/// Only `s` in `[-1, 0]` is accepted; see [`bell_value_with`] for diagnostics.
pub fn bell_value<W2, WA, WB>(w2: W2, w1a: WA, w1b: WB, settings: &BellSettings, s: &OrderParam) -> Result<f64>
where
    W2: Fn(Complex64, Complex64) -> f64,
    WA: Fn(Complex64) -> f64,
    WB: Fn(Complex64) -> f64,
{
    let v = s.require_real()?;
    if !(-1.0..=0.0).contains(&v) {
        return Err(Error::OrderOutOfDomain {
            value: v.to_string(),
            domain: "[-1, 0]",
        });
    }
    Ok(bell_value_with(&BellCoefficients::at(v), w2, w1a, w1b, settings))
}

/// Unchecked witness with explicit coefficients.
pub fn bell_value_with<W2, WA, WB>(
    coeffs: &BellCoefficients,
    w2: W2,
    w1a: WA,
    w1b: WB,
    settings: &BellSettings,
) -> f64
where
    W2: Fn(Complex64, Complex64) -> f64,
    WA: Fn(Complex64) -> f64,
    WB: Fn(Complex64) -> f64,
{
    coeffs.combine(&WitnessSums::evaluate(w2, w1a, w1b, settings))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub settings: BellSettings,
    /// Order of the witness form, `max(s', -1)`.
    pub s_effective: f64,
    /// Order at which the distributions were evaluated.
    pub s_rescaled: f64,
    pub bell_value: f64,
    pub bell_abs: f64,
    pub violated: bool,
    pub clamped: bool,
}

impl WitnessReport {
    pub fn new(settings: BellSettings, s_rescaled: f64, bell_value: f64, clamped: bool) -> Self {
        let bell_abs = bell_value.abs();
        Self {
            settings,
            s_effective: s_rescaled.max(-1.0),
            s_rescaled,
            bell_value,
            bell_abs,
            violated: bell_abs > 2.0,
            clamped,
        }
    }
}

fn witness_order(s: &OrderParam) -> Result<OrderParam> {
    let v = s.require_real()?;
    OrderParam::real(v)
}

fn agree(what: &'static str, a: f64, b: f64) -> Result<()> {
    let residual = (a - b).abs();
    if residual > FORM_TOL {
        return Err(Error::Consistency {
            what,
            residual,
            tol: FORM_TOL,
        });
    }
    Ok(())
}

/// TMSV witness measured with detectors of efficiency `eta`.
pub fn bell_value_detection(
    spec: &TmsvSpec,
    settings: &BellSettings,
    s: &OrderParam,
    noise: &DetectionNoise,
) -> Result<WitnessReport> {
    bell_value_detection_with(spec, settings, s, noise, ClampRule::default())
}

pub fn bell_value_detection_with(
    spec: &TmsvSpec,
    settings: &BellSettings,
    s: &OrderParam,
    noise: &DetectionNoise,
    rule: ClampRule,
) -> Result<WitnessReport> {
    let s = witness_order(s)?;
    let sp = noise::rescale_detection(&s, noise).as_real().expect("real order");
    let eta = noise.eta();
    let (coeffs, clamped) = BellCoefficients::for_rescaled(sp, rule);

    let ideal = WitnessSums::evaluate(
        |a, b| spec.w2_at(a, b, sp),
        |a| spec.w1_at(a, sp),
        |b| spec.w1_at(b, sp),
        settings,
    );
    let rescaled_form = coeffs.combine(&ideal);

    // what lossy detectors record: W_eta(.,.; s) = W(.,.; s')/eta^2, W_eta(.; s) = W(.; s')/eta
    let measured = WitnessSums::evaluate(
        |a, b| spec.w2_at(a, b, sp) / (eta * eta),
        |a| spec.w1_at(a, sp) / eta,
        |b| spec.w1_at(b, sp) / eta,
        settings,
    );
    let measured_form = coeffs.scaled(eta * eta, eta).combine(&measured);
    agree("detection witness forms", rescaled_form, measured_form)?;

    Ok(WitnessReport::new(*settings, sp, rescaled_form, clamped))
}

/// TMSV witness after both modes spent time `r(tau)` in a thermal bath.
/// `settings` are in the measured frame; the rescaled form uses `alpha / t`.
pub fn bell_value_thermal(
    spec: &TmsvSpec,
    settings: &BellSettings,
    s: &OrderParam,
    noise: &ThermalNoise,
) -> Result<WitnessReport> {
    bell_value_thermal_with(spec, settings, s, noise, ClampRule::default())
}

pub fn bell_value_thermal_with(
    spec: &TmsvSpec,
    settings: &BellSettings,
    s: &OrderParam,
    noise: &ThermalNoise,
    rule: ClampRule,
) -> Result<WitnessReport> {
    let s = witness_order(s)?;
    let sp = noise::rescale_thermal(&s, noise)?.as_real().expect("real order");
    let t = noise.t();
    let t2 = t * t;
    let (coeffs, clamped) = BellCoefficients::for_rescaled(sp, rule);

    let primed = settings.scaled(1.0 / t);
    let ideal = WitnessSums::evaluate(
        |a, b| spec.w2_at(a, b, sp),
        |a| spec.w1_at(a, sp),
        |b| spec.w1_at(b, sp),
        &primed,
    );
    let rescaled_form = coeffs.combine(&ideal);

    let point = |z: Complex64| PhaseSpacePoint::new(z).expect("finite setting");
    let evolved = WitnessSums::evaluate(
        |a, b| {
            noise::evolve_thermal_w2(|x, y, o| spec.w2_at(x, y, o), &s, noise, point(a), point(b))
                .expect("validated order")
        },
        |a| noise::evolve_thermal_w(|x, o| spec.w1_at(x, o), &s, noise, point(a)).expect("validated order"),
        |b| noise::evolve_thermal_w(|x, o| spec.w1_at(x, o), &s, noise, point(b)).expect("validated order"),
        settings,
    );
    let measured_form = coeffs.scaled(t2 * t2, t2).combine(&evolved);
    agree("thermal witness forms", rescaled_form, measured_form)?;

    Ok(WitnessReport::new(*settings, sp, rescaled_form, clamped))
}
