//! The quasiprobability order parameter `s` and phase-space points.
//!
//! `s = 0` is the Wigner function and `s = -1` the Husimi Q function. The
//! witness only admits real `s` in `[-1, 0]`; noise maps push the order below
//! `-1`, and such values are carried with a `rescaled` tag so callers can see
//! they came out of a noise law rather than from user input. The d-outcome
//! generalization uses the complex order `s_d = -i cot(pi/d)`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrderKind {
    RealWitness,
    /// Complex order for binning photon counts into `d` phases `omega^n`.
    DOutcome { d: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderParam {
    value: Complex64,
    kind: OrderKind,
    rescaled: bool,
}

impl OrderParam {
    /// A real order in the witness domain `[-1, 0]`.
    pub fn real(s: f64) -> Result<Self> {
        if !s.is_finite() || !(-1.0..=0.0).contains(&s) {
            return Err(Error::OrderOutOfDomain {
                value: s.to_string(),
                domain: "[-1, 0]",
            });
        }
        Ok(Self {
            value: Complex64::new(s, 0.0),
            kind: OrderKind::RealWitness,
            rescaled: false,
        })
    }

    /// A real order produced by a noise law; may lie below `-1`.
    pub fn rescaled(s: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::OrderOutOfDomain {
                value: s.to_string(),
                domain: "finite reals",
            });
        }
        if s == 1.0 {
            return Err(Error::SingularOrder);
        }
        Ok(Self {
            value: Complex64::new(s, 0.0),
            kind: OrderKind::RealWitness,
            rescaled: true,
        })
    }

    /// `s_d = -i cot(pi/d)`; exactly `0` for `d = 2`.
    pub fn d_outcome(d: u32) -> Result<Self> {
        if d < 2 {
            return Err(Error::param("d", d, "number of outcomes must be at least 2"));
        }
        let im = if d == 2 {
            0.0
        } else {
            -1.0 / (PI / d as f64).tan()
        };
        Ok(Self {
            value: Complex64::new(0.0, im),
            kind: OrderKind::DOutcome { d },
            rescaled: false,
        })
    }

    /// Complex order derived from `s_d` by a noise law.
    pub(crate) fn rescaled_complex(value: Complex64, d: u32) -> Self {
        Self {
            value,
            kind: OrderKind::DOutcome { d },
            rescaled: true,
        }
    }

    pub fn value(&self) -> Complex64 {
        self.value
    }

    pub fn kind(&self) -> OrderKind {
        self.kind
    }

    pub fn is_rescaled(&self) -> bool {
        self.rescaled
    }

    /// The real value, if the order is real.
    pub fn as_real(&self) -> Option<f64> {
        (self.value.im == 0.0).then_some(self.value.re)
    }

    /// Real value or an error naming the operation's requirement.
    pub(crate) fn require_real(&self) -> Result<f64> {
        self.as_real().ok_or_else(|| Error::OrderOutOfDomain {
            value: format!("{}", self.value),
            domain: "real orders",
        })
    }

    /// The geometric ratio `(s+1)/(s-1)` of the generalized parity operator.
    pub fn ratio(&self) -> Result<Complex64> {
        if self.value == Complex64::new(1.0, 0.0) {
            return Err(Error::SingularOrder);
        }
        Ok((self.value + 1.0) / (self.value - 1.0))
    }

    /// `omega = exp(2 pi i / d)` for d-outcome orders.
    pub fn omega(&self) -> Option<Complex64> {
        match self.kind {
            OrderKind::DOutcome { d } => Some(Complex64::from_polar(1.0, 2.0 * PI / d as f64)),
            OrderKind::RealWitness => None,
        }
    }
}

impl fmt::Display for OrderParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_real() {
            Some(s) => write!(f, "{s}"),
            None => write!(f, "{}", self.value),
        }
    }
}

/// A displacement amplitude in the phase space of one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpacePoint(Complex64);

impl PhaseSpacePoint {
    pub fn new(alpha: Complex64) -> Result<Self> {
        if !(alpha.re.is_finite() && alpha.im.is_finite()) {
            return Err(Error::param("alpha", alpha, "must be finite"));
        }
        Ok(Self(alpha))
    }

    pub fn alpha(&self) -> Complex64 {
        self.0
    }
}

impl From<PhaseSpacePoint> for Complex64 {
    fn from(p: PhaseSpacePoint) -> Self {
        p.0
    }
}
