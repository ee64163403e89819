//! Adaptive quadrature over intervals and phase-space disks.
//!
//! Radial integrals use globally adaptive 7/15-point Gauss-Kronrod; the
//! angular integral of a disk is periodic, so the trapezoid rule converges
//! spectrally and is refined by doubling.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights on XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 400;
const MIN_ANGULAR: usize = 16;
const MAX_ANGULAR: usize = 8192;

/// A quadrature value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Globally adaptive Gauss-Kronrod integration of `f` over `[a, b]` to an
/// absolute tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let mut heap = BinaryHeap::new();
    let first = gk15(&f, a, b);
    let mut error = first.error;
    heap.push(first);
    while error > tol && heap.len() < MAX_INTERVALS {
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let left = gk15(&f, worst.a, mid);
        let right = gk15(&f, mid, worst.b);
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // re-sum to drop accumulated cancellation from the running updates
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    if error > tol {
        return Err(Error::QuadratureUnconverged { estimate: error, tol });
    }
    Ok(Estimate { value, error })
}

/// Periodic trapezoid rule over a circle, refined by doubling until two
/// successive levels agree to `tol`. Returns the integral over `[0, 2 pi)`.
fn circle<F: Fn(Complex64) -> f64>(f: &F, center: Complex64, rho: f64, tol: f64) -> (f64, bool) {
    if rho == 0.0 {
        return (2.0 * PI * f(center), true);
    }
    let point = |phi: f64| center + Complex64::from_polar(rho, phi);
    let mut n = MIN_ANGULAR;
    let mut sum: f64 = (0..n).map(|k| f(point(2.0 * PI * k as f64 / n as f64))).sum();
    let mut estimate = 2.0 * PI * sum / n as f64;
    while n < MAX_ANGULAR {
        let h = 2.0 * PI / (2 * n) as f64;
        let odd: f64 = (0..n).map(|k| f(point(h * (2 * k + 1) as f64))).sum();
        sum += odd;
        n *= 2;
        let refined = 2.0 * PI * sum / n as f64;
        let done = (refined - estimate).abs() <= tol;
        estimate = refined;
        if done {
            return (estimate, true);
        }
    }
    (estimate, false)
}

/// Integral of `f` over the disk `|beta - center| <= radius`, with the
/// absolute error estimate bounded by `tol`.
pub fn disk<F: Fn(Complex64) -> f64>(f: F, center: Complex64, radius: f64, tol: f64) -> Result<Estimate> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::param("radius", radius, "disk radius must be positive and finite"));
    }
    // angular error delta at every ring costs at most radius^2/2 * delta overall
    let ring_tol = 0.5 * tol / (radius * radius);
    let unresolved = std::cell::Cell::new(false);
    let radial = integrate(
        |rho| {
            let (ring, ok) = circle(&f, center, rho, ring_tol);
            if !ok {
                unresolved.set(true);
            }
            rho * ring
        },
        0.0,
        radius,
        0.5 * tol,
    )?;
    if unresolved.get() {
        return Err(Error::QuadratureUnconverged {
            estimate: f64::INFINITY,
            tol,
        });
    }
    Ok(Estimate {
        value: radial.value,
        error: radial.error + 0.25 * tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let est = integrate(|x| x.powi(5) - 3.0 * x * x + 1.0, -1.0, 2.0, 1e-13).unwrap();
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0) + 3.0;
        assert!((est.value - exact).abs() < 1e-12);
    }

    #[test]
    fn peaked_integrand_converges() {
        let est = integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-9).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((est.value - exact).abs() < 1e-8, "{} vs {exact}", est.value);
    }

    #[test]
    fn unit_gaussian_over_disk() {
        // 2/pi exp(-2|b|^2) integrates to 1 - exp(-2 R^2) over radius R
        let r = 3.0;
        let c = Complex64::new(0.4, -0.3);
        let est = disk(
            |b| 2.0 / PI * (-2.0 * (b - c).norm_sqr()).exp(),
            c,
            r,
            1e-10,
        )
        .unwrap();
        assert!((est.value - (1.0 - (-2.0 * r * r).exp())).abs() < 1e-10);
    }

    #[test]
    fn off_center_gaussian_over_disk() {
        let est = disk(
            |b| 2.0 / PI * (-2.0 * (b - Complex64::new(1.5, 0.5)).norm_sqr()).exp(),
            Complex64::new(0.0, 0.0),
            8.0,
            1e-10,
        )
        .unwrap();
        assert!((est.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_radius() {
        assert!(disk(|_| 1.0, Complex64::new(0.0, 0.0), 0.0, 1e-8).is_err());
    }
}
