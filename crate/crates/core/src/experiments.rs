//! Finite-time, finite-box checks of the long-time results: boundedness,
//! convergence to the constant equilibrium, spreading speed bounds, the
//! exponential envelope ahead of the front, and the drift/coercivity bounds.
//!
//! Each check runs the stepper and returns an [`ExperimentReport`] whose
//! `passed` flag is computed only from its measured values, its bounds and
//! the constants in [`tolerances`].

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use rayon::prelude::*;
use thiserror::Error;

use crate::comparison::envelope_pair;
use crate::grid::{front_radius, make_initial, Field, Grid, GridError, InitialSpec};
use crate::regime::{
    classify, coercivity, speeds, sup_bound, thresholds, Bound, ModelParams, Unmet,
};
use crate::stepper::{
    run, Diagnostics, RunConfig, RunMode, RunOutput, SchemeConfig, SchemeError, SimState,
};

pub mod tolerances {
    /// Slack on the a priori bound max sup u ≤ C0 = max{sup u0, a/denom}.
    pub const BOUND_SLACK: f64 = 1.01;
    /// Slack on the long-run bound sup u ≤ a/denom.
    pub const LIMSUP_SLACK: f64 = 1.05;
    /// Equilibrium error allowed at T, relative to the equilibrium value.
    pub const EQUILIBRIUM_ERROR: f64 = 1e-2;
    /// Below this the decay requirement e_u(T) < e_u(T/2) is roundoff noise.
    pub const NOISE_FLOOR: f64 = 1e-10;
    /// Speed tolerance as a fraction of 2√a.
    pub const SPEED_FRACTION: f64 = 0.05;
    /// Outside probe speed as a multiple of c_plus.
    pub const OUTSIDE_PROBE: f64 = 1.05;
    /// Inside probe speed as a multiple of c_minus.
    pub const INSIDE_PROBE: f64 = 0.95;
    /// sup u beyond the outside probe, relative to a/b.
    pub const OUTSIDE_SUP: f64 = 1e-3;
    /// sup |u − a/b| within the inside probe, relative to a/b.
    pub const INSIDE_ERROR: f64 = 5e-2;
    /// Slack on the exponential supersolution.
    pub const ENVELOPE_SLACK: f64 = 1.05;
    /// Required tail decay rate as a fraction of √a.
    pub const TAIL_RATE: f64 = 0.9;
    /// Far field starts this far beyond the front radius.
    pub const FAR_FIELD_GAP: f64 = 2.0;
    /// Relative slack on the drift bound D.
    pub const GRADIENT_SLACK: f64 = 0.05;
    /// Relative slack on the coercivity margin.
    pub const COERCIVITY_SLACK: f64 = 0.1;
    /// Extra half length beyond c_plus·T required by spreading runs.
    pub const BOX_MARGIN: f64 = 10.0;
    /// Number of post-transient states kept for the drift checks.
    pub const SAMPLE_COUNT: usize = 8;
}

use tolerances::*;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("not applicable: {0}")]
    NotApplicable(Unmet),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("half_length {have} is below c_plus*T + {margin} = {need}; enlarge the box", margin = BOX_MARGIN)]
    BoxTooSmall { need: f64, have: f64 },
    #[error("front radius undefined at t={0} (field lost mirror symmetry)")]
    FrontUndefined(f64),
    #[error("{0} needs dim = 1")]
    OneDimensionalOnly(&'static str),
}

impl ExperimentError {
    /// Numerical aborts (blow-up, positivity loss, boundary contamination).
    pub fn is_numerical(&self) -> bool {
        match self {
            ExperimentError::Scheme(e) => e.is_numerical(),
            ExperimentError::FrontUndefined(_) => true,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub name: String,
    pub params: ModelParams,
    pub measured: BTreeMap<String, f64>,
    pub bounds: BTreeMap<String, f64>,
    pub passed: bool,
    pub artifacts: Vec<PathBuf>,
    pub notes: Vec<String>,
    /// Time series of the main run (written out by the CLI).
    pub series: Vec<Diagnostics>,
}

impl ExperimentReport {
    fn new(name: &str, params: ModelParams) -> Self {
        ExperimentReport {
            name: name.to_string(),
            params,
            measured: BTreeMap::new(),
            bounds: BTreeMap::new(),
            passed: false,
            artifacts: Vec::new(),
            notes: Vec::new(),
            series: Vec::new(),
        }
    }

    fn measure(&mut self, key: impl Into<String>, v: f64) {
        self.measured.insert(key.into(), v);
    }

    fn bound(&mut self, key: impl Into<String>, v: f64) {
        self.bounds.insert(key.into(), v);
    }

    pub fn measured(&self, key: &str) -> Option<f64> {
        self.measured.get(key).copied()
    }

    pub fn bound_value(&self, key: &str) -> Option<f64> {
        self.bounds.get(key).copied()
    }
}

impl fmt::Display for ExperimentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "experiment={}", self.name)?;
        writeln!(f, "passed={}", self.passed)?;
        let p = &self.params;
        for (k, v) in [
            ("chi1", p.chi1),
            ("chi2", p.chi2),
            ("mu1", p.mu1),
            ("mu2", p.mu2),
            ("lam1", p.lam1),
            ("lam2", p.lam2),
            ("a", p.a),
            ("b", p.b),
        ] {
            writeln!(f, "param.{k}={v}")?;
        }
        writeln!(f, "param.dim={}", p.dim)?;
        for (k, v) in &self.measured {
            writeln!(f, "measured.{k}={v}")?;
        }
        for (k, v) in &self.bounds {
            writeln!(f, "bound.{k}={v}")?;
        }
        for a in &self.artifacts {
            writeln!(f, "artifact={}", a.display())?;
        }
        for n in &self.notes {
            writeln!(f, "note={n}")?;
        }
        Ok(())
    }
}

/// Scheme and output cadence shared by every run of an experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    pub scheme: SchemeConfig,
    pub output_dt: f64,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            scheme: SchemeConfig::default(),
            output_dt: 0.5,
        }
    }
}

fn require_existence(p: &ModelParams) -> Result<(), ExperimentError> {
    if classify(p).global_existence {
        Ok(())
    } else {
        Err(ExperimentError::NotApplicable(Unmet::GlobalExistence))
    }
}

/// Adds the sup-norm bound quantities of a finished run; returns whether both hold.
fn record_sup_bounds(
    r: &mut ExperimentReport,
    p: &ModelParams,
    u0_sup: f64,
    out: &RunOutput,
) -> bool {
    let th = thresholds(p);
    let c0 = sup_bound(p, u0_sup).unwrap_or(f64::INFINITY);
    let final_sup = out.state.u().sup();
    r.measure("max_sup_u", out.max_sup_u);
    r.measure("final_sup_u", final_sup);
    r.bound("sup_bound_c0", c0);
    let mut ok = out.max_sup_u <= BOUND_SLACK * c0;
    if th.denom > 0.0 {
        let limsup = p.a / th.denom;
        r.bound("limsup_bound", limsup);
        ok &= final_sup <= LIMSUP_SLACK * limsup;
    }
    ok
}

/// Sup of u over the run stays below the a priori bound C0, and sup u(T) below the
/// long-run bound a/denom.
pub fn boundedness_check(
    p: &ModelParams,
    grid: Grid,
    init: InitialSpec,
    t_end: f64,
    settings: RunSettings,
) -> Result<ExperimentReport, ExperimentError> {
    require_existence(p)?;
    let u0 = make_initial(grid, init)?;
    let u0_sup = u0.sup();
    let out = run(
        p,
        u0,
        settings.scheme,
        RunConfig::new(t_end, settings.output_dt),
        &mut [],
    )?;
    let mut r = ExperimentReport::new("boundedness", *p);
    r.passed = record_sup_bounds(&mut r, p, u0_sup, &out);
    r.series = out.series;
    Ok(r)
}

/// Initial datum for the stability check: positive floor plus an off-centre bump.
pub fn stability_initial(p: &ModelParams, grid: Grid, h_floor: f64) -> InitialSpec {
    let x = grid.half_length();
    let ue = if p.b > 0.0 { p.a / p.b } else { 1.0 };
    InitialSpec::FloorBump {
        h_min: h_floor,
        h: ue,
        rho: x / 8.0,
        center: if grid.dim() == 1 {
            [x / 10.0, 0.0]
        } else {
            [x / 10.0, -x / 20.0]
        },
    }
}

/// Convergence of (u, λ1v1, λ2v2) to (a/b, μ1a/b, μ2a/b) from positive data.
pub fn stability_check(
    p: &ModelParams,
    grid: Grid,
    h_floor: f64,
    t_end: f64,
    settings: RunSettings,
) -> Result<ExperimentReport, ExperimentError> {
    stability_check_from(
        p,
        stability_initial(p, grid, h_floor),
        grid,
        t_end,
        settings,
    )
}

pub fn stability_check_from(
    p: &ModelParams,
    init: InitialSpec,
    grid: Grid,
    t_end: f64,
    settings: RunSettings,
) -> Result<ExperimentReport, ExperimentError> {
    require_existence(p)?;
    if !classify(p).stability {
        return Err(ExperimentError::NotApplicable(Unmet::Stability));
    }
    let u0 = make_initial(grid, init)?;
    let u0_sup = u0.sup();
    let out = run(
        p,
        u0,
        settings.scheme,
        RunConfig::new(t_end, settings.output_dt),
        &mut [],
    )?;
    let mut r = ExperimentReport::new("stability", *p);
    let sup_ok = record_sup_bounds(&mut r, p, u0_sup, &out);
    r.notes.push(format!("sup_bounds_hold={sup_ok}"));

    let last = *out.series.last().expect("series holds t=0");
    let half = *out
        .series
        .iter()
        .min_by(|x, y| {
            (x.t - t_end / 2.0)
                .abs()
                .total_cmp(&(y.t - t_end / 2.0).abs())
        })
        .expect("series holds t=0");
    let ue = p.a / p.b;
    r.measure("e_u", last.e_u);
    r.measure("e_1", last.e_1);
    r.measure("e_2", last.e_2);
    r.measure("e_u_half", half.e_u);
    r.measure("t_half", half.t);
    r.bound("e_u", EQUILIBRIUM_ERROR * ue);
    r.bound("e_1", EQUILIBRIUM_ERROR * ue * p.mu1);
    r.bound("e_2", EQUILIBRIUM_ERROR * ue * p.mu2);

    // informational: the comparison bracket built from (inf u, sup u) shrinks
    for (key, d) in [("half", half), ("final", last)] {
        if let Ok((lo, hi)) = envelope_pair(p, d.inf_u.max(0.0), d.sup_u.max(d.inf_u.max(0.0))) {
            r.measure(format!("envelope_width_{key}"), hi - lo);
        }
    }

    let decays = last.e_u < half.e_u || last.e_u <= NOISE_FLOOR;
    r.passed = last.e_u < r.bounds["e_u"]
        && last.e_1 < r.bounds["e_1"]
        && last.e_2 < r.bounds["e_2"]
        && decays;
    r.series = out.series;
    Ok(r)
}

/// Least-squares slope of y against t.
pub fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (st, sy) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), (t, y)| (a + t, b + y));
    let (mt, my) = (st / n, sy / n);
    let (num, den) = points.iter().fold((0.0, 0.0), |(a, b), (t, y)| {
        (a + (t - mt) * (y - my), b + (t - mt) * (t - mt))
    });
    num / den
}

/// Front speed fitted over the second half of the run.
pub fn fitted_speed(series: &[Diagnostics], t_end: f64) -> Result<f64, ExperimentError> {
    let window: Vec<(f64, f64)> = series
        .iter()
        .filter(|d| d.t >= t_end / 2.0)
        .map(|d| {
            if d.front_radius.is_nan() {
                Err(ExperimentError::FrontUndefined(d.t))
            } else {
                Ok((d.t, d.front_radius))
            }
        })
        .collect::<Result<_, _>>()?;
    Ok(fit_slope(&window))
}

/// Sup of `f(value)` over lattice points whose radius satisfies `keep`.
fn region_sup(field: &Field, keep: impl Fn(f64) -> bool, f: impl Fn(f64) -> f64) -> f64 {
    let g = field.grid();
    field
        .values()
        .iter()
        .enumerate()
        .filter(|(i, _)| keep(g.radius(*i)))
        .fold(0.0, |m: f64, (_, &v)| m.max(f(v)))
}

/// Front level used throughout: half the equilibrium density.
pub fn front_level(p: &ModelParams) -> f64 {
    p.a / (2.0 * p.b)
}

/// The spreading initial datum: a compact cos² bump of equilibrium height.
pub fn spreading_initial(p: &ModelParams) -> InitialSpec {
    InitialSpec::CompactBump {
        h: if p.b > 0.0 { p.a / p.b } else { 1.0 },
        rho: 5.0,
    }
}

#[derive(Debug, Clone)]
pub struct SpreadingOutcome {
    pub report: ExperimentReport,
    /// States at t ≥ T/2, for [`gradient_coercivity_check`].
    pub samples: Vec<SimState>,
    /// Front speed and samples on the refined grid, when requested.
    pub refined_speed: Option<f64>,
    pub refined_samples: Vec<SimState>,
}

struct SpreadingRun {
    out: RunOutput,
    u0_sup: f64,
    c_hat: f64,
    samples: Vec<SimState>,
}

fn spreading_run(
    p: &ModelParams,
    grid: Grid,
    bump: InitialSpec,
    t_end: f64,
    settings: RunSettings,
) -> Result<SpreadingRun, ExperimentError> {
    let u0 = make_initial(grid, bump)?;
    let u0_sup = u0.sup();
    let window_outputs = (t_end / 2.0 / settings.output_dt).ceil().max(1.0) as usize;
    let stride = window_outputs.div_ceil(SAMPLE_COUNT).max(1);
    let mut samples = Vec::new();
    let mut k = 0usize;
    let mut keep = |s: &SimState, _: &Diagnostics| {
        if s.t() >= t_end / 2.0 {
            if k.is_multiple_of(stride) {
                samples.push(s.clone());
            }
            k += 1;
        }
    };
    let cfg = RunConfig::new(t_end, settings.output_dt)
        .mode(RunMode::Spreading)
        .front_level(front_level(p));
    let out = run(p, u0, settings.scheme, cfg, &mut [&mut keep])?;
    let c_hat = fitted_speed(&out.series, t_end)?;
    Ok(SpreadingRun {
        out,
        u0_sup,
        c_hat,
        samples,
    })
}

/// Measures the spreading speed and probes sup u outside |x| = cT and
/// |u − a/b| inside it. With `refine`, also reruns at dx/2 and requires the
/// two fitted speeds to agree.
pub fn spreading_check(
    p: &ModelParams,
    grid: Grid,
    bump: InitialSpec,
    t_end: f64,
    probes: &[f64],
    refine: bool,
    settings: RunSettings,
) -> Result<SpreadingOutcome, ExperimentError> {
    require_existence(p)?;
    let sp = speeds(p);
    let c_plus = sp.c_plus.get().map_err(ExperimentError::NotApplicable)?;
    let need = c_plus * t_end + BOX_MARGIN;
    if grid.half_length() < need {
        return Err(ExperimentError::BoxTooSmall {
            need,
            have: grid.half_length(),
        });
    }

    let (coarse, fine) = if refine {
        let (c, f) = rayon::join(
            || spreading_run(p, grid, bump, t_end, settings),
            || spreading_run(p, grid.refined(), bump, t_end, settings),
        );
        (c?, Some(f?))
    } else {
        (spreading_run(p, grid, bump, t_end, settings)?, None)
    };

    let mut r = ExperimentReport::new("spreading", *p);
    let sup_ok = record_sup_bounds(&mut r, p, coarse.u0_sup, &coarse.out);
    r.notes.push(format!("sup_bounds_hold={sup_ok}"));
    let fisher = sp.fisher;
    let dc = SPEED_FRACTION * fisher;
    let ue = p.a / p.b;
    let ve = [p.mu1 * ue / p.lam1, p.mu2 * ue / p.lam2];
    r.measure("c_hat", coarse.c_hat);
    r.bound("c_plus", c_plus);
    r.bound("speed_tolerance", dc);
    let mut passed = coarse.c_hat <= c_plus + dc;
    let c_minus = sp.c_minus.value();
    match sp.c_minus {
        Bound::Value(cm) => {
            r.bound("c_minus", cm);
            passed &= coarse.c_hat >= cm - dc;
        }
        Bound::NotApplicable(why) => r.notes.push(format!("c_minus=n/a ({why})")),
    }
    if let Some(f) = &fine {
        let gap = (coarse.c_hat - f.c_hat).abs();
        r.measure("c_hat_refined", f.c_hat);
        r.measure("refinement_gap", gap);
        r.bound("refinement_gap", dc);
        passed &= gap < dc;
    }

    let state = &coarse.out.state;
    let radius_at = |c: f64| c * t_end;
    let mut all_probes: Vec<(f64, &str)> = probes.iter().map(|&c| (c, "probe")).collect();
    all_probes.push((OUTSIDE_PROBE * c_plus, "outside"));
    if let Some(cm) = c_minus {
        all_probes.push((INSIDE_PROBE * cm, "inside"));
    }
    for (c, role) in all_probes {
        let rad = radius_at(c);
        let out_u = region_sup(state.u(), |x| x >= rad, f64::abs);
        let out_v1 = region_sup(state.v1(), |x| x >= rad, f64::abs);
        let out_v2 = region_sup(state.v2(), |x| x >= rad, f64::abs);
        r.measure(format!("outside_sup_u@{c}"), out_u);
        r.measure(format!("outside_sup_v1@{c}"), out_v1);
        r.measure(format!("outside_sup_v2@{c}"), out_v2);
        let u_ok = out_u < OUTSIDE_SUP * ue;
        if role == "outside" {
            r.bound("outside_sup_u", OUTSIDE_SUP * ue);
            r.bound("outside_sup_v1", OUTSIDE_SUP * ve[0]);
            r.bound("outside_sup_v2", OUTSIDE_SUP * ve[1]);
            passed &= u_ok;
        }
        // v follows u wherever u is small
        if u_ok {
            passed &= out_v1 < OUTSIDE_SUP * ve[0] && out_v2 < OUTSIDE_SUP * ve[1];
        }
        if c_minus.is_some_and(|cm| c < cm) {
            let inside = region_sup(state.u(), |x| x <= rad, |v| (v - ue).abs());
            r.measure(format!("inside_error_u@{c}"), inside);
            if role == "inside" {
                r.bound("inside_error_u", INSIDE_ERROR * ue);
                passed &= inside < INSIDE_ERROR * ue;
            }
        }
    }
    r.passed = passed;
    let (refined_speed, refined_samples) = match fine {
        Some(f) => (Some(f.c_hat), f.samples),
        None => (None, Vec::new()),
    };
    r.series = coarse.out.series;
    Ok(SpreadingOutcome {
        report: r,
        samples: coarse.samples,
        refined_speed,
        refined_samples,
    })
}

/// Exponential supersolution ahead of the front (1D), and the tail decay rate
/// of u at T.
pub fn envelope_check(
    p: &ModelParams,
    grid: Grid,
    bump: InitialSpec,
    t_end: f64,
    settings: RunSettings,
) -> Result<ExperimentReport, ExperimentError> {
    if grid.dim() != 1 {
        return Err(ExperimentError::OneDimensionalOnly("envelope_check"));
    }
    require_existence(p)?;
    let s = speeds(p)
        .c_plus
        .get()
        .map_err(ExperimentError::NotApplicable)?;
    let sa = p.a.sqrt();
    let u0 = make_initial(grid, bump)?;
    let c = u0
        .values()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0)
        .fold(0.0, |m: f64, (i, &v)| {
            m.max(v * (sa * grid.radius(i)).exp())
        });
    let level = front_level(p);

    let mut excess = f64::NEG_INFINITY;
    let mut undefined_at = None;
    let mut watch = |st: &SimState, _: &Diagnostics| {
        let Ok(front) = front_radius(st.u(), level) else {
            undefined_at.get_or_insert(st.t());
            return;
        };
        for (i, &v) in st.u().values().iter().enumerate() {
            let x = grid.radius(i);
            if x > front + FAR_FIELD_GAP {
                let env = c * (-sa * (x - s * st.t())).exp();
                excess = excess.max(v - ENVELOPE_SLACK * env);
            }
        }
    };
    let cfg = RunConfig::new(t_end, settings.output_dt).mode(RunMode::Spreading);
    let out = run(p, u0, settings.scheme, cfg, &mut [&mut watch])?;
    if let Some(t) = undefined_at {
        return Err(ExperimentError::FrontUndefined(t));
    }

    let mut r = ExperimentReport::new("envelope", *p);
    r.measure("envelope_constant", c);
    // no far-field points at all counts as no violation
    r.measure("max_excess", if excess.is_finite() { excess } else { 0.0 });
    r.bound("max_excess", 0.0);
    r.bound("envelope_speed", s);
    let mut passed = r.measured["max_excess"] <= 0.0;

    let ue = p.a / p.b;
    let tail: Vec<(f64, f64)> = out
        .state
        .u()
        .values()
        .iter()
        .enumerate()
        .filter(|(i, &v)| grid.coord(*i) > 0.0 && v <= 1e-3 * ue && v >= 1e-12 * ue)
        .map(|(i, &v)| (grid.coord(i), v.ln()))
        .collect();
    if tail.len() >= 2 {
        let rate = -fit_slope(&tail);
        r.measure("tail_rate", rate);
        r.bound("tail_rate", TAIL_RATE * sa);
        passed &= rate >= TAIL_RATE * sa;
    } else {
        r.notes
            .push("tail_rate=n/a (no points in the fit window)".into());
    }
    r.passed = passed;
    r.series = out.series;
    Ok(r)
}

/// Drift bound and far-field coercivity on post-transient states.
///
/// `eps_dx` is the discretization allowance on the drift bound; the harness
/// uses the grid spacing.
pub fn gradient_coercivity_check(
    p: &ModelParams,
    samples: &[SimState],
    eps_dx: f64,
) -> ExperimentReport {
    let th = thresholds(p);
    let level = front_level(p);
    let mut ratio: f64 = 0.0;
    let mut coerc = f64::INFINITY;
    for st in samples {
        let sup = st.u().sup();
        if sup > 0.0 {
            ratio = ratio.max(st.drift_sup() / sup);
        }
        let grid = st.u().grid();
        let front = front_radius(st.u(), level).unwrap_or(f64::INFINITY);
        for i in 0..grid.len() {
            if grid.radius(i) >= front + FAR_FIELD_GAP {
                let grad2: f64 = st.drift().iter().map(|c| c[i] * c[i]).sum();
                coerc = coerc.min(4.0 * (p.a + st.growth()[i]) - grad2);
            }
        }
    }
    let mut r = ExperimentReport::new("gradient_coercivity", *p);
    r.measure("gradient_ratio", ratio);
    r.measure("far_field_coercivity", coerc);
    let grad_bound = th.d * (1.0 + GRADIENT_SLACK) + eps_dx;
    r.bound("gradient_ratio", grad_bound);
    r.bound("d", th.d);
    r.bound("eps_dx", eps_dx);
    let mut passed = ratio <= grad_bound;
    match coercivity(p, &th) {
        Some(c) => {
            let b = (1.0 - COERCIVITY_SLACK) * c;
            r.bound("far_field_coercivity", b);
            passed &= coerc >= b;
        }
        None => r
            .notes
            .push(format!("coercivity=n/a ({})", Unmet::GlobalExistence)),
    }
    r.passed = passed;
    r
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scale: f64,
    pub c_minus: Bound,
    pub c_plus: Bound,
    /// None when the row was skipped.
    pub c_hat: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub base: ModelParams,
    /// Sorted by decreasing scale.
    pub rows: Vec<SweepRow>,
    pub c_plus_decreasing: bool,
    pub c_minus_increasing: bool,
    pub c_hat_approaching: bool,
    pub passed: bool,
}

impl fmt::Display for SweepTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scale,c_minus,c_plus,c_hat")?;
        for row in &self.rows {
            let show = |b: &Bound| b.value().map_or("nan".to_string(), |v| v.to_string());
            let c_hat = row.c_hat.map_or("nan".to_string(), |v| v.to_string());
            writeln!(
                f,
                "{},{},{},{}",
                row.scale,
                show(&row.c_minus),
                show(&row.c_plus),
                c_hat
            )?;
        }
        writeln!(f, "c_plus_decreasing={}", self.c_plus_decreasing)?;
        writeln!(f, "c_minus_increasing={}", self.c_minus_increasing)?;
        writeln!(f, "c_hat_approaching={}", self.c_hat_approaching)?;
        write!(f, "passed={}", self.passed)
    }
}

/// Runs the spreading experiment for (χ1, χ2) scaled by each entry of
/// `scales`, in parallel, and checks the trend toward the no-taxis speed.
pub fn chi_sweep(
    base: &ModelParams,
    scales: &[f64],
    grid: Grid,
    t_end: f64,
    settings: RunSettings,
) -> SweepTable {
    let mut scales = scales.to_vec();
    scales.sort_by(|a, b| b.total_cmp(a));
    let rows: Vec<SweepRow> = scales
        .par_iter()
        .map(|&scale| {
            let p = base.with_chi_scaled(scale);
            let sp = speeds(&p);
            let (c_hat, note) = if !classify(&p).global_existence {
                (None, Some(format!("skipped: {}", Unmet::GlobalExistence)))
            } else {
                match spreading_check(&p, grid, spreading_initial(&p), t_end, &[], false, settings)
                {
                    Ok(o) => (o.report.measured("c_hat"), None),
                    Err(e) => (None, Some(format!("skipped: {e}"))),
                }
            };
            SweepRow {
                scale,
                c_minus: sp.c_minus,
                c_plus: sp.c_plus,
                c_hat,
                note,
            }
        })
        .collect();

    let fisher = 2.0 * base.a.sqrt();
    let pairs = |f: &dyn Fn(&SweepRow) -> Option<f64>, ok: &dyn Fn(f64, f64) -> bool| {
        let vals: Vec<Option<f64>> = rows.iter().map(f).collect();
        vals.iter().all(Option::is_some)
            && vals.windows(2).all(|w| ok(w[0].unwrap(), w[1].unwrap()))
    };
    let c_plus_decreasing = pairs(&|r| r.c_plus.value(), &|a, b| b < a);
    let c_minus_increasing = pairs(&|r| r.c_minus.value(), &|a, b| b > a);
    let c_hat_approaching = pairs(&|r| r.c_hat, &|a, b| {
        (b - fisher).abs() <= (a - fisher).abs() + SPEED_FRACTION
    });
    let ends_at_fisher = rows.last().is_some_and(|r| {
        r.scale != 0.0 || (r.c_plus.value() == Some(fisher) && r.c_minus.value() == Some(fisher))
    });
    SweepTable {
        base: *base,
        passed: c_plus_decreasing && c_minus_increasing && c_hat_approaching && ends_at_fisher,
        rows,
        c_plus_decreasing,
        c_minus_increasing,
        c_hat_approaching,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings() -> RunSettings {
        RunSettings::default()
    }

    #[test]
    fn slope_of_line() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 3.0 * i as f64 - 1.0)).collect();
        assert!((fit_slope(&pts) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn fisher_boundedness() {
        let g = Grid::new(1, 128, 16.0).unwrap();
        let p = ModelParams::fisher(1.0, 1.0, 1);
        let r = boundedness_check(
            &p,
            g,
            InitialSpec::CompactBump { h: 0.5, rho: 3.0 },
            20.0,
            settings(),
        )
        .unwrap();
        assert!(r.passed, "{r}");
        assert!(r.measured("max_sup_u").unwrap() <= 1.01);
        let f = r.measured("final_sup_u").unwrap();
        assert!((0.99..=1.01).contains(&f));
    }

    #[test]
    fn equilibrium_boundedness_and_stability() {
        let g = Grid::new(1, 64, 8.0).unwrap();
        let p = ModelParams::new(0.1, 0.2, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1).unwrap();
        let r =
            boundedness_check(&p, g, InitialSpec::Constant { h: 1.0 }, 2.0, settings()).unwrap();
        assert!(r.passed);
        let r =
            stability_check_from(&p, InitialSpec::Constant { h: 1.0 }, g, 2.0, settings()).unwrap();
        assert!(r.passed, "{r}");
        assert!(r.measured("e_u").unwrap() < 1e-10);
    }

    #[test]
    fn failing_hypothesis_is_not_applicable() {
        let g = Grid::new(1, 64, 8.0).unwrap();
        let p = ModelParams::new(10.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1).unwrap();
        let e = boundedness_check(&p, g, InitialSpec::Constant { h: 1.0 }, 1.0, settings())
            .unwrap_err();
        assert_eq!(e, ExperimentError::NotApplicable(Unmet::GlobalExistence));
        assert!(e.to_string().starts_with("not applicable"));
    }

    #[test]
    fn fisher_stability_from_floor() {
        let g = Grid::new(1, 128, 16.0).unwrap();
        let p = ModelParams::fisher(1.0, 1.0, 1);
        let r = stability_check(&p, g, 0.3, 40.0, settings()).unwrap();
        assert!(r.passed, "{r}");
        assert!(r.measured("e_u").unwrap() < 1e-2);
    }

    #[test]
    fn small_box_rejected() {
        let g = Grid::new(1, 256, 20.0).unwrap();
        let p = ModelParams::fisher(1.0, 1.0, 1);
        let e = spreading_check(&p, g, spreading_initial(&p), 10.0, &[], false, settings())
            .unwrap_err();
        assert!(matches!(e, ExperimentError::BoxTooSmall { .. }));
    }

    #[test]
    fn zero_data_envelope_passes() {
        let g = Grid::new(1, 128, 32.0).unwrap();
        let p = ModelParams::fisher(1.0, 1.0, 1);
        let r = envelope_check(
            &p,
            g,
            InitialSpec::CompactBump { h: 0.0, rho: 2.0 },
            2.0,
            settings(),
        )
        .unwrap();
        assert!(r.passed, "{r}");
    }

    #[test]
    fn short_fisher_spreading_and_envelope() {
        let g = Grid::new(1, 1024, 64.0).unwrap();
        let p = ModelParams::fisher(1.0, 1.0, 1);
        let o = spreading_check(
            &p,
            g,
            spreading_initial(&p),
            15.0,
            &[1.0],
            false,
            settings(),
        )
        .unwrap();
        let c = o.report.measured("c_hat").unwrap();
        assert!(c > 1.6 && c < 2.1, "{c}");
        assert!(!o.samples.is_empty());
        let r = gradient_coercivity_check(&p, &o.samples, g.dx());
        assert!(r.passed, "{r}");
        assert_eq!(r.measured("gradient_ratio"), Some(0.0));
        assert_eq!(r.measured("far_field_coercivity"), Some(4.0));

        let r = envelope_check(&p, g, spreading_initial(&p), 15.0, settings()).unwrap();
        assert!(r.passed, "{r}");
    }

    #[test]
    fn sweep_skips_rows_without_existence() {
        let g = Grid::new(1, 256, 30.0).unwrap();
        let base = ModelParams::new(2.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1).unwrap();
        let t = chi_sweep(&base, &[1.0, 0.0], g, 5.0, settings());
        assert!(t.rows[0].c_hat.is_none());
        assert!(t.rows[0].note.as_deref().unwrap().starts_with("skipped"));
        assert!(t.rows[1].c_hat.is_some());
        assert!(!t.passed);
    }

    #[test]
    fn report_renders_key_values() {
        let p = ModelParams::fisher(1.0, 1.0, 1);
        let mut r = ExperimentReport::new("demo", p);
        r.measure("x", 1.5);
        r.bound("x", 2.0);
        r.passed = true;
        let text = r.to_string();
        assert!(text.contains("experiment=demo\n"));
        assert!(text.contains("measured.x=1.5\n"));
        assert!(text.contains("bound.x=2\n"));
        assert!(text.contains("passed=true\n"));
    }
}
