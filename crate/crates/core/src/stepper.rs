//! Explicit time stepping for u with v1, v2 slaved to u through the elliptic
//! solves.
//!
//! The taxis term is discretized in divergence form,
//! ∂t u = Δu − ∇·(u w) + u(a − bu) with w = ∇(χ1v1 − χ2v2),
//! using donor-cell fluxes on the cell faces. v1 and v2 are re-solved after
//! each u update, so every exposed state is quasi-statically consistent.

use thiserror::Error;

use crate::elliptic::{Coupling, Spectral};
use crate::grid::{front_radius, Field, Grid, GridError};
use crate::regime::{classify, ModelParams, ParamError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchemeError {
    #[error("cfl_safety must be in (0, 1], got {0}")]
    Safety(f64),
    #[error("output_dt must be > 0, got {0}")]
    OutputDt(f64),
    #[error("T must be >= 0, got {0}")]
    Horizon(f64),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("grid dim {grid} does not match model dim {model}")]
    DimMismatch { grid: usize, model: usize },
    #[error("global-existence hypothesis b > chi1*mu1 - chi2*mu2 + M fails")]
    Hypothesis,
    #[error("blow-up at t={t} after {steps} steps (sup u = {sup})")]
    BlowUp { t: f64, steps: u64, sup: f64 },
    #[error("positivity lost at t={t}: min u = {min} with sup u = {sup}")]
    Negative { t: f64, min: f64, sup: f64 },
    #[error("boundary contamination at t={t}: sup u = {strip_sup:e} in the outer strip; enlarge half_length")]
    Boundary { t: f64, strip_sup: f64 },
}

impl SchemeError {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            SchemeError::BlowUp { .. }
                | SchemeError::Negative { .. }
                | SchemeError::Boundary { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub cfl_safety: f64,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig { cfl_safety: 0.8 }
    }
}

impl SchemeConfig {
    pub fn new(cfl_safety: f64) -> Result<Self, SchemeError> {
        let c = SchemeConfig { cfl_safety };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), SchemeError> {
        if self.cfl_safety > 0.0 && self.cfl_safety <= 1.0 {
            Ok(())
        } else {
            Err(SchemeError::Safety(self.cfl_safety))
        }
    }
}

/// Undershoot below zero tolerated per step, relative to sup u.
pub const POSITIVITY_TOL: f64 = 1e-10;
/// Largest value allowed in the outer strip during spreading runs.
pub const BOUNDARY_TOL: f64 = 1e-10;
/// Width of the outer strip as a fraction of the half length.
pub const BOUNDARY_STRIP: f64 = 0.05;
/// sup u at which watch mode declares blow-up.
pub const BLOWUP_LEVEL: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    t: f64,
    u: Field,
    step_count: u64,
    coupling: Coupling,
}

impl SimState {
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn u(&self) -> &Field {
        &self.u
    }

    pub fn v1(&self) -> &Field {
        &self.coupling.v1
    }

    pub fn v2(&self) -> &Field {
        &self.coupling.v2
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// Components of ∇(χ1v1 − χ2v2). The drift bound D is stated for its
    /// negative, which has the same magnitude.
    pub fn drift(&self) -> &[Vec<f64>] {
        &self.coupling.drift
    }

    /// χ2λ2v2 − χ1λ1v1
    pub fn growth(&self) -> &[f64] {
        &self.coupling.growth
    }

    /// max over components and points of |∇(χ1v1 − χ2v2)|
    pub fn drift_sup(&self) -> f64 {
        self.coupling
            .drift
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0, |m, w| m.max(w.abs()))
    }

    pub fn diagnostics(&self, p: &ModelParams, front_level: Option<f64>) -> Diagnostics {
        let sup_u = self.u.sup();
        let inf_u = self.u.inf();
        let front_radius = front_level
            .and_then(|theta| front_radius(&self.u, theta).ok())
            .unwrap_or(f64::NAN);
        let (e_u, e_1, e_2) = if p.b > 0.0 {
            let ue = p.a / p.b;
            let dev = |f: &Field, lam: f64, target: f64| {
                f.values()
                    .iter()
                    .fold(0.0, |m: f64, v| m.max((lam * v - target).abs()))
            };
            (
                dev(&self.u, 1.0, ue),
                dev(&self.coupling.v1, p.lam1, p.mu1 * ue),
                dev(&self.coupling.v2, p.lam2, p.mu2 * ue),
            )
        } else {
            (f64::NAN, f64::NAN, f64::NAN)
        };
        Diagnostics {
            t: self.t,
            sup_u,
            inf_u,
            front_radius,
            e_u,
            e_1,
            e_2,
        }
    }
}

/// One row of a run's time series. Undefined entries are NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub t: f64,
    pub sup_u: f64,
    pub inf_u: f64,
    pub front_radius: f64,
    /// sup |u − a/b|
    pub e_u: f64,
    /// sup |λ1v1 − μ1a/b|
    pub e_1: f64,
    /// sup |λ2v2 − μ2a/b|
    pub e_2: f64,
}

/// Owns the transform plans and work buffers for one run.
#[derive(Debug)]
pub struct Stepper {
    params: ModelParams,
    scheme: SchemeConfig,
    spectral: Spectral,
    flux: Vec<f64>,
    next: Vec<f64>,
}

impl Stepper {
    pub fn new(params: ModelParams, grid: Grid, scheme: SchemeConfig) -> Result<Self, SchemeError> {
        params.validate()?;
        scheme.validate()?;
        if params.dim != grid.dim() {
            return Err(SchemeError::DimMismatch {
                grid: grid.dim(),
                model: params.dim,
            });
        }
        Ok(Stepper {
            params,
            scheme,
            spectral: Spectral::new(grid),
            flux: vec![0.0; grid.len()],
            next: vec![0.0; grid.len()],
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid {
        self.spectral.grid()
    }

    pub fn init(&mut self, u0: Field) -> SimState {
        let coupling = self.spectral.couple(&u0, &self.params);
        SimState {
            t: 0.0,
            u: u0,
            step_count: 0,
            coupling,
        }
    }

    /// Largest explicit step keeping the update a convex combination
    /// (positivity) with a bounded reaction factor.
    ///
    /// dt = safety / (2N/dx² + 2N·A/dx + a + sup(g)₊ + b·sup u), where A bounds
    /// the face velocities and g = χ2λ2v2 − χ1λ1v1.
    pub fn cfl_dt(&self, s: &SimState) -> f64 {
        let g = self.grid();
        let dx = g.dx();
        let n = g.dim() as f64;
        let p = &self.params;
        let growth_sup = s.coupling.growth.iter().fold(0.0, |m: f64, &v| m.max(v));
        let rate = 2.0 * n / (dx * dx)
            + 2.0 * n * s.drift_sup() / dx
            + p.a
            + growth_sup
            + p.b * s.u.sup().max(0.0)
            + 1e-12;
        self.scheme.cfl_safety / rate
    }

    /// Advances `s` by `dt` in place.
    pub fn step(&mut self, s: &mut SimState, dt: f64) -> Result<(), SchemeError> {
        let grid = *self.grid();
        let n = grid.n();
        let dx = grid.dx();
        let inv_dx2 = 1.0 / (dx * dx);
        let (a, b) = (self.params.a, self.params.b);
        let u = s.u.values();

        for (o, &ui) in self.next.iter_mut().zip(u) {
            *o = ui * (a - b * ui);
        }

        for axis in 0..grid.dim() {
            let stride = if grid.dim() == 1 || axis == 1 { 1 } else { n };
            let w = &s.coupling.drift[axis];
            let plus = |idx: usize| -> usize {
                let i = (idx / stride) % n;
                if i + 1 == n {
                    idx + stride - n * stride
                } else {
                    idx + stride
                }
            };
            // flux[idx] lives on the face between idx and its + neighbour
            for idx in 0..grid.len() {
                let r = plus(idx);
                let wf = 0.5 * (w[idx] + w[r]);
                let donor = if wf > 0.0 { u[idx] } else { u[r] };
                self.flux[idx] = wf * donor;
            }
            for idx in 0..grid.len() {
                let r = plus(idx);
                // lattice is periodic, so the − neighbour of r is idx
                let lap = (u[r] - u[idx]) * inv_dx2;
                let div = self.flux[idx] / dx;
                self.next[idx] += lap - div;
                self.next[r] += -lap + div;
            }
        }

        let mut sup = f64::NEG_INFINITY;
        let mut min = f64::INFINITY;
        let mut finite = true;
        for (o, &ui) in self.next.iter_mut().zip(u) {
            *o = ui + dt * *o;
            finite &= o.is_finite();
            sup = sup.max(*o);
            min = min.min(*o);
        }
        let t = s.t + dt;
        if !finite {
            return Err(SchemeError::BlowUp {
                t,
                steps: s.step_count + 1,
                sup: f64::INFINITY,
            });
        }
        if min < -POSITIVITY_TOL * sup.max(0.0) {
            return Err(SchemeError::Negative { t, min, sup });
        }

        std::mem::swap(s.u.values_mut_vec(), &mut self.next);
        s.coupling = self.spectral.couple(&s.u, &self.params);
        s.t = t;
        s.step_count += 1;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Normal,
    /// Also fails when mass reaches the outer strip of the box.
    Spreading,
    /// Allowed when global existence is not guaranteed; stops at blow-up
    /// instead of failing.
    BlowupWatch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub t_end: f64,
    pub output_dt: f64,
    pub mode: RunMode,
    /// Level whose outermost radius is recorded as the front.
    pub front_level: Option<f64>,
}

impl RunConfig {
    pub fn new(t_end: f64, output_dt: f64) -> Self {
        RunConfig {
            t_end,
            output_dt,
            mode: RunMode::Normal,
            front_level: None,
        }
    }

    pub fn mode(self, mode: RunMode) -> Self {
        RunConfig { mode, ..self }
    }

    pub fn front_level(self, level: f64) -> Self {
        RunConfig {
            front_level: Some(level),
            ..self
        }
    }
}

/// Called at t = 0 and at every multiple of the output cadence.
pub trait Observer {
    fn observe(&mut self, state: &SimState, diag: &Diagnostics);
}

impl<F: FnMut(&SimState, &Diagnostics)> Observer for F {
    fn observe(&mut self, state: &SimState, diag: &Diagnostics) {
        self(state, diag)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub series: Vec<Diagnostics>,
    pub state: SimState,
    /// max over every step (including t = 0) of sup u
    pub max_sup_u: f64,
    /// max over every step of sup v1
    pub max_sup_v1: f64,
    /// Set in watch mode when the run stopped at blow-up.
    pub blowup_time: Option<f64>,
}

pub fn run(
    p: &ModelParams,
    u0: Field,
    scheme: SchemeConfig,
    cfg: RunConfig,
    observers: &mut [&mut dyn Observer],
) -> Result<RunOutput, SchemeError> {
    if !(cfg.output_dt > 0.0) {
        return Err(SchemeError::OutputDt(cfg.output_dt));
    }
    if !(cfg.t_end >= 0.0) {
        return Err(SchemeError::Horizon(cfg.t_end));
    }
    let watch = cfg.mode == RunMode::BlowupWatch;
    if !watch && !classify(p).global_existence {
        return Err(SchemeError::Hypothesis);
    }
    let grid = *u0.grid();
    let mut stepper = Stepper::new(*p, grid, scheme)?;
    let mut state = stepper.init(u0);

    let strip_start = grid.half_length() * (1.0 - BOUNDARY_STRIP);
    let strip: Vec<usize> = if cfg.mode == RunMode::Spreading {
        (0..grid.len())
            .filter(|&i| grid.box_distance(i) >= strip_start)
            .collect()
    } else {
        Vec::new()
    };
    let check_strip = |s: &SimState| -> Result<(), SchemeError> {
        let strip_sup = strip
            .iter()
            .fold(0.0, |m: f64, &i| m.max(s.u.values()[i].abs()));
        if strip_sup > BOUNDARY_TOL {
            Err(SchemeError::Boundary { t: s.t, strip_sup })
        } else {
            Ok(())
        }
    };

    let mut series = Vec::new();
    let emit = |s: &SimState, series: &mut Vec<Diagnostics>, obs: &mut [&mut dyn Observer]| {
        let d = s.diagnostics(p, cfg.front_level);
        for o in obs.iter_mut() {
            o.observe(s, &d);
        }
        series.push(d);
    };

    check_strip(&state)?;
    emit(&state, &mut series, observers);
    let mut max_sup_u = state.u.sup();
    let mut max_sup_v1 = state.coupling.v1.sup();
    let mut blowup_time = None;

    let mut k_out: u64 = 1;
    while state.t < cfg.t_end {
        let t_out = (k_out as f64 * cfg.output_dt).min(cfg.t_end);
        let cfl = stepper.cfl_dt(&state);
        let (dt, lands) = if state.t + cfl >= t_out {
            (t_out - state.t, true)
        } else {
            (cfl, false)
        };
        match stepper.step(&mut state, dt) {
            Ok(()) => {}
            Err(SchemeError::BlowUp { t, .. }) if watch => {
                blowup_time = Some(t);
                break;
            }
            Err(e) => return Err(e),
        }
        if lands {
            state.t = t_out;
        }
        let sup = state.u.sup();
        max_sup_u = max_sup_u.max(sup);
        max_sup_v1 = max_sup_v1.max(state.coupling.v1.sup());
        if watch && sup > BLOWUP_LEVEL {
            blowup_time = Some(state.t);
            break;
        }
        check_strip(&state)?;
        if lands {
            emit(&state, &mut series, observers);
            k_out += 1;
        }
    }

    Ok(RunOutput {
        series,
        state,
        max_sup_u,
        max_sup_v1,
        blowup_time,
    })
}
