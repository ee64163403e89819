//! Maximization of `|B|` over the four complex settings.
//!
//! Local search is a bounded Nelder-Mead simplex with adaptive coefficients,
//! restarted from its own optimum until a restart stops paying off. Starts
//! are drawn from a ChaCha stream keyed by `(seed, stream)`, so a sweep cell
//! gives the same answer whether cells run serially or on a pool.

use std::cmp::Ordering;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{DetectionNoise, ThermalNoise};
use crate::order::OrderParam;
use crate::states::TmsvSpec;
use crate::witness::{self, BellSettings, ClampRule, WitnessReport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub n_starts: usize,
    /// Half-width of the box on every real coordinate.
    pub box_radius: f64,
    /// Convergence tolerance on `|B|` across the simplex.
    pub ftol: f64,
    /// Convergence tolerance on simplex coordinates.
    pub xtol: f64,
    pub seed: u64,
    /// Search only real settings (a 4-D problem).
    pub restrict_real: bool,
    /// Objective evaluations allowed per start.
    pub max_evals: usize,
    pub clamp_rule: ClampRule,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            n_starts: 16,
            box_radius: 2.0,
            ftol: 1e-10,
            xtol: 1e-8,
            seed: 0,
            restrict_real: false,
            max_evals: 2000,
            clamp_rule: ClampRule::LossChannel,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_starts < 1 {
            return Err(Error::param("n_starts", self.n_starts, "at least one start is required"));
        }
        if !(self.box_radius > 0.0) || !self.box_radius.is_finite() {
            return Err(Error::param("box_radius", self.box_radius, "must be positive and finite"));
        }
        if !(self.ftol > 0.0) {
            return Err(Error::param("ftol", self.ftol, "must be positive"));
        }
        if !(self.xtol > 0.0) {
            return Err(Error::param("xtol", self.xtol, "must be positive"));
        }
        if self.max_evals < 10 {
            return Err(Error::param("max_evals", self.max_evals, "must be at least 10"));
        }
        Ok(())
    }

    fn dim(&self) -> usize {
        if self.restrict_real {
            4
        } else {
            8
        }
    }
}

/// Best report of a multi-start search plus bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub report: WitnessReport,
    pub evaluations: usize,
    /// Starts that stopped on the evaluation cap rather than on tolerance.
    pub capped_starts: usize,
}

/// `true` when `a` beats `b`: larger `|B|`, ties to the lexicographically
/// smaller settings vector.
pub fn better(a: &WitnessReport, b: &WitnessReport) -> bool {
    match a.bell_abs.total_cmp(&b.bell_abs) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => lex_cmp(&a.settings.coords(), &b.settings.coords()) == Ordering::Less,
    }
}

fn lex_cmp(a: &[f64; 8], b: &[f64; 8]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

fn pick(a: WitnessReport, b: WitnessReport) -> WitnessReport {
    if better(&b, &a) {
        b
    } else {
        a
    }
}

fn to_settings(x: &[f64], restrict_real: bool) -> BellSettings {
    let mut c = [0.0; 8];
    if restrict_real {
        for (k, v) in x.iter().enumerate() {
            c[2 * k] = *v;
        }
    } else {
        c.copy_from_slice(x);
    }
    BellSettings::from_coords(&c)
}

struct Local {
    best: WitnessReport,
    evaluations: usize,
    capped: bool,
}

struct Simplex<'a, F> {
    objective: &'a F,
    cfg: &'a SearchConfig,
    evaluations: usize,
    best: Option<WitnessReport>,
}

impl<F> Simplex<'_, F>
where
    F: Fn(&BellSettings) -> Result<WitnessReport>,
{
    fn project(&self, x: &mut [f64]) {
        let r = self.cfg.box_radius;
        for v in x.iter_mut() {
            *v = v.clamp(-r, r);
        }
    }

    /// Minimizes `-|B|`.
    fn eval(&mut self, x: &[f64]) -> Result<f64> {
        let report = (self.objective)(&to_settings(x, self.cfg.restrict_real))?;
        self.evaluations += 1;
        self.best = Some(match self.best {
            Some(b) => pick(b, report),
            None => report,
        });
        Ok(-report.bell_abs)
    }

    fn budget_left(&self) -> bool {
        self.evaluations < self.cfg.max_evals
    }

    /// One simplex descent from `x0`. Returns the best vertex, its value,
    /// whether it stopped on tolerance, and the iteration count.
    fn descend(&mut self, x0: &[f64], step: f64) -> Result<(Vec<f64>, f64, bool, usize)> {
        let n = x0.len();
        let nf = n as f64;
        let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);

        let mut verts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        let mut base = x0.to_vec();
        self.project(&mut base);
        verts.push(base.clone());
        for i in 0..n {
            let mut v = base.clone();
            // step inward when the vertex would leave the box
            v[i] += if v[i] + step <= self.cfg.box_radius { step } else { -step };
            self.project(&mut v);
            verts.push(v);
        }
        let mut vals = Vec::with_capacity(n + 1);
        for v in &verts {
            vals.push(self.eval(v)?);
        }

        let mut iterations = 0;
        loop {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
            verts = order.iter().map(|&i| verts[i].clone()).collect();
            vals = order.iter().map(|&i| vals[i]).collect();

            let f_spread = vals[n] - vals[0];
            let x_spread = verts[1..]
                .iter()
                .flat_map(|v| v.iter().zip(&verts[0]).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if f_spread <= self.cfg.ftol || x_spread <= self.cfg.xtol {
                return Ok((verts.swap_remove(0), vals[0], true, iterations));
            }
            if !self.budget_left() {
                return Ok((verts.swap_remove(0), vals[0], false, iterations));
            }

            iterations += 1;
            let mut centroid = vec![0.0; n];
            for v in &verts[..n] {
                for (c, x) in centroid.iter_mut().zip(v) {
                    *c += x / nf;
                }
            }
            let along = |coef: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&verts[n])
                    .map(|(c, w)| c + coef * (c - w))
                    .collect()
            };

            let mut xr = along(alpha);
            self.project(&mut xr);
            let fr = self.eval(&xr)?;
            if fr < vals[0] {
                let mut xe = along(alpha * gamma);
                self.project(&mut xe);
                let fe = self.eval(&xe)?;
                if fe < fr {
                    verts[n] = xe;
                    vals[n] = fe;
                } else {
                    verts[n] = xr;
                    vals[n] = fr;
                }
                continue;
            }
            if fr < vals[n - 1] {
                verts[n] = xr;
                vals[n] = fr;
                continue;
            }
            let (mut xc, outside) = if fr < vals[n] {
                (along(alpha * rho), true)
            } else {
                (along(-rho), false)
            };
            self.project(&mut xc);
            let fc = self.eval(&xc)?;
            let accept = if outside { fc <= fr } else { fc < vals[n] };
            if accept {
                verts[n] = xc;
                vals[n] = fc;
                continue;
            }
            for i in 1..=n {
                let shrunk: Vec<f64> = verts[0]
                    .iter()
                    .zip(&verts[i])
                    .map(|(b, x)| b + sigma * (x - b))
                    .collect();
                vals[i] = self.eval(&shrunk)?;
                verts[i] = shrunk;
            }
        }
    }
}

fn local_search<F>(objective: &F, cfg: &SearchConfig, x0: &[f64]) -> Result<Local>
where
    F: Fn(&BellSettings) -> Result<WitnessReport>,
{
    let mut sx = Simplex {
        objective,
        cfg,
        evaluations: 0,
        best: None,
    };
    let mut step = 0.25 * cfg.box_radius;
    let (mut x, mut f, mut converged, iterations) = sx.descend(x0, step)?;
    // restart from the optimum to escape a collapsed simplex
    let mut moved = iterations > 0;
    while moved && converged && sx.budget_left() {
        step = (0.5 * step).max(10.0 * cfg.xtol);
        let (x1, f1, c1, it1) = sx.descend(&x, step)?;
            moved = it1 > 0;
        let gained = f - f1;
        x = x1;
        f = f1;
        converged = c1;
        if gained <= cfg.ftol {
            break;
        }
    }
    Ok(Local {
        best: sx.best.expect("at least one evaluation"),
        evaluations: sx.evaluations,
        capped: !converged,
    })
}

fn start_points(cfg: &SearchConfig, stream: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    let r = cfg.box_radius;
    let n = cfg.dim();
    (0..cfg.n_starts)
        .map(|k| {
            let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-r..=r)).collect();
            // the box center seeds the first start; wall-hugging local maxima
            // attract most uniform draws
            if k == 0 {
                x.iter_mut().for_each(|v| *v = 0.0);
            }
            // first half of the starts sit on the real axis
            if !cfg.restrict_real && k < cfg.n_starts.div_ceil(2) {
                for im in x.iter_mut().skip(1).step_by(2) {
                    *im = 0.0;
                }
            }
            x
        })
        .collect()
}

/// Multi-start maximization of `|B|`. `stream` selects the random stream;
/// sweeps pass the cell index.
pub fn maximize_bell<F>(objective: F, config: &SearchConfig, stream: u64) -> Result<SearchOutcome>
where
    F: Fn(&BellSettings) -> Result<WitnessReport>,
{
    config.validate()?;
    let mut best: Option<WitnessReport> = None;
    let mut evaluations = 0;
    let mut capped_starts = 0;
    for x0 in start_points(config, stream) {
        let local = local_search(&objective, config, &x0)?;
        evaluations += local.evaluations;
        capped_starts += usize::from(local.capped);
        best = Some(match best {
            Some(b) => pick(b, local.best),
            None => local.best,
        });
    }
    Ok(SearchOutcome {
        report: best.expect("n_starts >= 1"),
        evaluations,
        capped_starts,
    })
}

/// Exhaustive search over an evenly spaced grid, real settings (4-D) unless
/// `full` asks for all 8 coordinates.
pub fn grid_oracle<F>(objective: F, box_radius: f64, points_per_axis: usize, full: bool) -> Result<WitnessReport>
where
    F: Fn(&BellSettings) -> Result<WitnessReport> + Sync,
{
    if points_per_axis < 3 {
        return Err(Error::param("points_per_axis", points_per_axis, "at least 3 points are required"));
    }
    if !(box_radius >= 0.0) || !box_radius.is_finite() {
        return Err(Error::param("box_radius", box_radius, "must be non-negative and finite"));
    }
    if box_radius == 0.0 {
        return objective(&BellSettings::default());
    }
    let axis: Vec<f64> = (0..points_per_axis)
        .map(|i| -box_radius + 2.0 * box_radius * i as f64 / (points_per_axis - 1) as f64)
        .collect();
    let dim = if full { 8 } else { 4 };
    let total = (points_per_axis as u64)
        .checked_pow(dim as u32)
        .ok_or_else(|| Error::param("points_per_axis", points_per_axis, "grid is too large"))?;
    let m = points_per_axis as u64;
    (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut x = [0.0; 8];
            for d in 0..dim {
                x[d] = axis[(idx % m) as usize];
                idx /= m;
            }
            objective(&to_settings(&x[..dim], !full))
        })
        .try_reduce_with(|a, b| Ok(pick(a, b)))
        .expect("grid is non-empty")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMode {
    EtaS,
    Thermal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    /// `eta` or `r`.
    pub axis1: f64,
    /// `s`.
    pub axis2: f64,
    pub nbar: Option<f64>,
    pub outcome: SearchOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub mode: SweepMode,
    pub xi: f64,
    pub axis1: Vec<f64>,
    pub axis2: Vec<f64>,
    pub nbar_list: Vec<f64>,
    /// Row-major: `nbar` outermost, then `axis1`, then `axis2`.
    pub cells: Vec<SweepCell>,
    pub wall_time_s: f64,
}

impl SweepResult {
    pub fn peak(&self) -> Option<&SweepCell> {
        self.cells.iter().reduce(|a, b| {
            if better(&b.outcome.report, &a.outcome.report) {
                b
            } else {
                a
            }
        })
    }

    /// Cells with the given `axis2` value (and `nbar`, for thermal sweeps),
    /// in `axis1` order.
    pub fn column(&self, axis2: f64, nbar: Option<f64>) -> Vec<&SweepCell> {
        self.cells
            .iter()
            .filter(|c| c.axis2 == axis2 && c.nbar == nbar)
            .collect()
    }
}

/// Walks `points` in order and returns the last value before the first
/// non-violating one, or `None` if the first point does not violate.
pub fn violation_edge(points: impl IntoIterator<Item = (f64, bool)>) -> Option<f64> {
    let mut edge = None;
    for (x, violated) in points {
        if !violated {
            break;
        }
        edge = Some(x);
    }
    edge
}

fn check_monotone(name: &'static str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::param(name, "[]", "grid must not be empty"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param(name, format!("{grid:?}"), "grid must be strictly increasing"));
    }
    Ok(())
}

fn check_s_grid(s_grid: &[f64]) -> Result<()> {
    check_monotone("s", s_grid)?;
    if s_grid.iter().any(|s| !(-1.0..=0.0).contains(s)) {
        return Err(Error::param("s", format!("{s_grid:?}"), "orders must lie in [-1, 0]"));
    }
    Ok(())
}

/// Maximum `|B|` with detection loss on every `(eta, s)` cell.
pub fn sweep_eta_s(spec: &TmsvSpec, eta_grid: &[f64], s_grid: &[f64], config: &SearchConfig) -> Result<SweepResult> {
    config.validate()?;
    check_monotone("eta", eta_grid)?;
    check_s_grid(s_grid)?;
    let noises = eta_grid
        .iter()
        .map(|&e| DetectionNoise::new(e))
        .collect::<Result<Vec<_>>>()?;
    let started = Instant::now();
    let jobs: Vec<(usize, usize)> = (0..eta_grid.len())
        .flat_map(|i| (0..s_grid.len()).map(move |j| (i, j)))
        .collect();
    let cells = jobs
        .par_iter()
        .enumerate()
        .map(|(k, &(i, j))| {
            let s = OrderParam::real(s_grid[j])?;
            let noise = noises[i];
            let outcome = maximize_bell(
                |x| witness::bell_value_detection_with(spec, x, &s, &noise, config.clamp_rule),
                config,
                k as u64,
            )?;
            Ok(SweepCell {
                axis1: eta_grid[i],
                axis2: s_grid[j],
                nbar: None,
                outcome,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        mode: SweepMode::EtaS,
        xi: spec.xi(),
        axis1: eta_grid.to_vec(),
        axis2: s_grid.to_vec(),
        nbar_list: Vec::new(),
        cells,
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

/// Maximum `|B|` after thermal decoherence on every `(nbar, r, s)` cell.
pub fn sweep_thermal(
    spec: &TmsvSpec,
    r_grid: &[f64],
    s_grid: &[f64],
    nbar_list: &[f64],
    config: &SearchConfig,
) -> Result<SweepResult> {
    config.validate()?;
    check_monotone("r", r_grid)?;
    check_s_grid(s_grid)?;
    if nbar_list.is_empty() {
        return Err(Error::param("nbar", "[]", "at least one bath occupation is required"));
    }
    let mut noises = Vec::with_capacity(nbar_list.len() * r_grid.len());
    for &nbar in nbar_list {
        for &r in r_grid {
            noises.push(ThermalNoise::new(r, nbar)?);
        }
    }
    let started = Instant::now();
    let (nr, ns) = (r_grid.len(), s_grid.len());
    let cells = (0..noises.len() * ns)
        .into_par_iter()
        .map(|k| {
            let noise = noises[k / ns];
            let s = OrderParam::real(s_grid[k % ns])?;
            let outcome = maximize_bell(
                |x| witness::bell_value_thermal_with(spec, x, &s, &noise, config.clamp_rule),
                config,
                k as u64,
            )?;
            Ok(SweepCell {
                axis1: r_grid[(k / ns) % nr],
                axis2: s_grid[k % ns],
                nbar: Some(nbar_list[k / (ns * nr)]),
                outcome,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        mode: SweepMode::Thermal,
        xi: spec.xi(),
        axis1: r_grid.to_vec(),
        axis2: s_grid.to_vec(),
        nbar_list: nbar_list.to_vec(),
        cells,
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}
