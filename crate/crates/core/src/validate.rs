//! Self-check suites run by `phasewitness validate`.
//!
//! Each suite compares two independent computations and reports its worst
//! residual against a fixed tolerance.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::noise::{self, DetectionNoise, ThermalNoise};
use crate::order::{OrderParam, PhaseSpacePoint};
use crate::qp;
use crate::states::{self, SingleModeState, TmsvSpec};
use crate::witness::{self, BellCoefficients, BellSettings, ClampRule};

#[derive(Debug, Clone, Copy, Default)]
pub struct ValidateOptions {
    /// Smaller grids and sample counts.
    pub quick: bool,
    /// Perturbs a reference constant so that a suite must fail.
    pub inject_fault: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub worst_residual: f64,
    pub tolerance: f64,
    pub checks: usize,
    /// Set when a computation errored instead of producing a residual.
    pub error: Option<String>,
}

struct Tally {
    worst: f64,
    checks: usize,
}

impl Tally {
    fn new() -> Self {
        Self { worst: 0.0, checks: 0 }
    }

    fn add(&mut self, a: f64, b: f64) {
        let r = (a - b).abs();
        self.worst = if r.is_nan() { f64::INFINITY } else { self.worst.max(r) };
        self.checks += 1;
    }

    /// Records how far `x` exceeds `bound`.
    fn excess(&mut self, x: f64, bound: f64) {
        self.add((x - bound).max(0.0), 0.0);
    }
}

fn finish(name: &'static str, tolerance: f64, run: Result<Tally>) -> SuiteResult {
    match run {
        Ok(t) => SuiteResult {
            name,
            passed: t.worst <= tolerance,
            worst_residual: t.worst,
            tolerance,
            checks: t.checks,
            error: None,
        },
        Err(e) => SuiteResult {
            name,
            passed: false,
            worst_residual: f64::INFINITY,
            tolerance,
            checks: 0,
            error: Some(e.to_string()),
        },
    }
}

/// States used by the series suites.
pub fn test_states() -> Vec<SingleModeState> {
    vec![
        SingleModeState::Vacuum,
        SingleModeState::Coherent(Complex64::new(0.5, -0.3)),
        SingleModeState::Coherent(Complex64::new(-1.2, 1.6)),
        SingleModeState::Thermal(0.5),
        SingleModeState::Thermal(2.0),
        SingleModeState::Fock(1),
        SingleModeState::Fock(2),
        SingleModeState::Fock(3),
    ]
}

pub const SERIES_ORDERS: [f64; 4] = [0.0, -0.25, -0.5, -1.0];
pub const SERIES_ETAS: [f64; 4] = [0.3, 0.5, 0.8, 1.0];

fn probe_points(quick: bool) -> Vec<PhaseSpacePoint> {
    let pts: &[(f64, f64)] = if quick {
        &[(0.0, 0.0), (0.7, -0.4)]
    } else {
        &[(0.0, 0.0), (0.7, -0.4), (-1.1, 0.9), (2.0, 0.5)]
    };
    pts.iter()
        .map(|&(re, im)| PhaseSpacePoint::new(Complex64::new(re, im)).expect("finite"))
        .collect()
}

fn distribution_for(state: &SingleModeState, alpha: PhaseSpacePoint) -> Result<qp::PhotonDistribution> {
    states::photon_distribution(state, alpha, 160)
}

/// Lossy reconstruction: thinned series against `W(alpha; s') / eta`.
fn lossy_identity(opts: &ValidateOptions) -> Result<Tally> {
    let mut t = Tally::new();
    let fault = if opts.inject_fault { 1.0 + 1e-6 } else { 1.0 };
    for state in test_states() {
        for alpha in probe_points(opts.quick) {
            let p = distribution_for(&state, alpha)?;
            for &s in &SERIES_ORDERS {
                for &eta in &SERIES_ETAS {
                    let o = OrderParam::real(s)?;
                    let noise = DetectionNoise::new(eta)?;
                    let series = noise::lossy_w(&p, &o, &noise, 1e-8)?;
                    let sp = noise::rescale_detection(&o, &noise).as_real().expect("real");
                    let closed = fault * state.analytic_w(alpha.alpha(), sp) / eta;
                    t.add(series, closed);
                }
            }
        }
    }
    Ok(t)
}

/// Series over photon statistics against the closed forms at `s` and `s'`.
fn series_closed_form(opts: &ValidateOptions) -> Result<Tally> {
    let mut t = Tally::new();
    for state in test_states() {
        for alpha in probe_points(opts.quick) {
            let p = distribution_for(&state, alpha)?;
            for &s in &SERIES_ORDERS {
                for &eta in &SERIES_ETAS {
                    let o = noise::rescale_detection(&OrderParam::real(s)?, &DetectionNoise::new(eta)?);
                    let sp = o.as_real().expect("real");
                    let series = qp::w_from_distribution(&p, &o, 1e-8)?.re;
                    t.add(series, state.analytic_w(alpha.alpha(), sp));
                }
            }
        }
    }
    Ok(t)
}

/// Smoothing `0 -> -0.4 -> -1` against `0 -> -1` and the closed form.
fn smoothing_semigroup(opts: &ValidateOptions) -> Result<Tally> {
    let mut t = Tally::new();
    let tol = 1e-9;
    let states = if opts.quick {
        vec![SingleModeState::Fock(1)]
    } else {
        vec![SingleModeState::Fock(1), SingleModeState::Fock(2), SingleModeState::Thermal(0.5)]
    };
    let (s0, s1, s2) = (OrderParam::real(0.0)?, OrderParam::real(-0.4)?, OrderParam::real(-1.0)?);
    for state in states {
        for alpha in probe_points(true) {
            let direct = qp::gaussian_smooth(|b| state.analytic_w(b, 0.0), &s0, &s2, alpha, tol)?;
            let two_step = qp::gaussian_smooth(
                |b| {
                    let p = PhaseSpacePoint::new(b).expect("finite");
                    qp::gaussian_smooth(|c| state.analytic_w(c, 0.0), &s0, &s1, p, tol).unwrap_or(f64::NAN)
                },
                &s1,
                &s2,
                alpha,
                tol,
            )?;
            t.add(direct, two_step);
            t.add(direct, state.analytic_w(alpha.alpha(), -1.0));
        }
    }
    Ok(t)
}

/// Beam-splitter mixing with a thermal bath against the order rescaling.
fn thermal_convolution(opts: &ValidateOptions) -> Result<Tally> {
    let mut t = Tally::new();
    let system = SingleModeState::Fock(1);
    let s = OrderParam::real(0.0)?;
    let grid = [-0.6, 0.0, 0.6];
    let r2s: &[f64] = if opts.quick { &[0.25] } else { &[0.25, 0.5] };
    for &r2 in r2s {
        for &nbar in &[0.0, 0.5] {
            let noise = ThermalNoise::new(r2.sqrt(), nbar)?;
            let bath = SingleModeState::Thermal(nbar).field(0.0);
            for &x in &grid {
                for &y in &grid {
                    let alpha = PhaseSpacePoint::new(Complex64::new(x, y))?;
                    let conv = qp::beamsplitter_convolve(
                        &bath,
                        |b| system.analytic_w(b, 0.0),
                        noise.r(),
                        noise.t(),
                        &s,
                        alpha,
                        1e-9,
                    )?;
                    let scaled = noise::evolve_thermal_w(|a, o| system.analytic_w(a, o), &s, &noise, alpha)?;
                    t.add(conv, scaled);
                }
            }
        }
    }
    Ok(t)
}

fn sample_settings(rng: &mut ChaCha8Rng, radius: f64) -> BellSettings {
    let mut c = [0.0; 8];
    for v in c.iter_mut() {
        *v = rng.gen_range(-radius..=radius);
    }
    BellSettings::from_coords(&c)
}

/// The witness against the term-by-term operator expansion, and the noisy
/// witness forms against each other.
fn witness_forms(opts: &ValidateOptions) -> Result<Tally> {
    let mut t = Tally::new();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let spec = TmsvSpec::new(0.3)?;
    let samples = if opts.quick { 50 } else { 500 };
    for _ in 0..samples {
        let x = sample_settings(&mut rng, 1.5);
        for &s in &[0.0, -0.3, -1.0] {
            let o = OrderParam::real(s)?;
            let b = witness::bell_value(
                |a, b| spec.w2_at(a, b, s),
                |a| spec.w1_at(a, s),
                |b| spec.w1_at(b, s),
                &x,
                &o,
            )?;
            t.add(b, expansion(&spec, &x, s));

            let eta = rng.gen_range(0.2..=1.0);
            let det = witness::bell_value_detection(&spec, &x, &o, &DetectionNoise::new(eta)?)?;
            let th = ThermalNoise::new((1.0 - eta).sqrt(), 0.0)?;
            let thermal = witness::bell_value_thermal(&spec, &x.scaled(th.t()), &o, &th)?;
            t.add(det.bell_value, thermal.bell_value);
        }
    }
    Ok(t)
}

/// `sum +-<A (x) B>` with `A = X Pi + Y`, `<Pi (x) Pi> = pi^2/4 W2` and
/// `<Pi> = pi/2 W1`.
pub fn expansion(spec: &TmsvSpec, x: &BellSettings, s: f64) -> f64 {
    let big_x = (1.0 - s) * (1.0 - s);
    let y = s;
    let corr = |a: Complex64, b: Complex64| {
        big_x * big_x * PI * PI / 4.0 * spec.w2_at(a, b, s)
            + big_x * y * PI / 2.0 * (spec.w1_at(a, s) + spec.w1_at(b, s))
            + y * y
    };
    corr(x.a1, x.b1) + corr(x.a1, x.b2) + corr(x.a2, x.b1) - corr(x.a2, x.b2)
}

/// `|e_n| <= 1` on `[-1, 0]`, and the clamped spectra stay in `[-1, 1]`.
fn eigenvalue_bounds(_opts: &ValidateOptions) -> Result<Tally> {
    let mut t = Tally::new();
    for k in 0..=100 {
        let s = -(k as f64) / 100.0;
        for n in 0..=512 {
            t.excess(witness::observable_eigenvalue(n, s).abs(), 1.0);
        }
    }
    for &sp in &[-1.2, -1.8, -3.0] {
        for rule in [ClampRule::LossChannel, ClampRule::FrozenCoefficients] {
            for n in 0..=512 {
                t.excess(witness::effective_eigenvalue(n, sp, rule).abs(), 1.0);
            }
        }
    }
    Ok(t)
}

/// `|B| <= 2` for product coherent and product thermal states.
fn separable_bounds(opts: &ValidateOptions) -> Result<Tally> {
    let mut t = Tally::new();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let samples = if opts.quick { 1000 } else { 10_000 };
    let pairs = [
        (SingleModeState::Coherent(Complex64::new(0.4, 0.2)), SingleModeState::Coherent(Complex64::new(-0.3, 0.5))),
        (SingleModeState::Thermal(0.3), SingleModeState::Thermal(1.0)),
    ];
    for (ma, mb) in pairs {
        for k in 0..=10 {
            let s = -(k as f64) / 10.0;
            let coeffs = BellCoefficients::at(s);
            for _ in 0..samples / 10 {
                let x = sample_settings(&mut rng, 2.0);
                let b = witness::bell_value_with(
                    &coeffs,
                    |a, b| ma.analytic_w(a, s) * mb.analytic_w(b, s),
                    |a| ma.analytic_w(a, s),
                    |b| mb.analytic_w(b, s),
                    &x,
                );
                t.excess(b.abs(), 2.0);
            }
        }
    }
    Ok(t)
}

/// `1 - s_d' = (1 - s_d)/eta` and `(s_d'+1)/(s_d'-1) = 1 - eta + eta omega`.
fn d_outcome_rescale(_opts: &ValidateOptions) -> Result<Tally> {
    let mut t = Tally::new();
    for d in 2..=5 {
        let s = OrderParam::d_outcome(d)?;
        let omega = s.omega().expect("d-outcome order");
        for &eta in &[0.3, 0.7, 1.0] {
            let sp = noise::rescale_detection(&s, &DetectionNoise::new(eta)?);
            let lhs = sp.ratio()?;
            let rhs = Complex64::new(1.0 - eta, 0.0) + omega * eta;
            t.add((lhs - rhs).norm(), 0.0);
            t.add(((1.0 - sp.value()) * eta - (1.0 - s.value())).norm(), 0.0);
        }
    }
    Ok(t)
}

pub fn run(opts: &ValidateOptions) -> Vec<SuiteResult> {
    vec![
        finish("lossy_identity", 1e-8, lossy_identity(opts)),
        finish("series_closed_form", 1e-8, series_closed_form(opts)),
        finish("eigenvalue_bounds", 1e-15, eigenvalue_bounds(opts)),
        finish("separable_bounds", 1e-9, separable_bounds(opts)),
        finish("witness_forms", 1e-10, witness_forms(opts)),
        finish("d_outcome_rescale", 1e-14, d_outcome_rescale(opts)),
        finish("thermal_convolution", 1e-6, thermal_convolution(opts)),
        finish("smoothing_semigroup", 1e-6, smoothing_semigroup(opts)),
    ]
}
