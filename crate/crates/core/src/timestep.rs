//! SSPRK3 time integration with CFL step control.

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::models::{Model, SimState, StateRate};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub t_end: f64,
    pub cfl: f64,
    /// Times at which [`RunObserver::on_output`] fires; sorted, within
    /// `[0, t_end]`.
    pub output_times: Vec<f64>,
    pub max_steps: usize,
    /// Record diagnostics every this many steps (0 disables periodic
    /// sampling; outputs are always sampled).
    pub diagnostics_every: usize,
    pub spike_window: Option<(f64, f64)>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            t_end: 0.5,
            cfl: 0.95,
            output_times: vec![0.125, 0.25, 0.375, 0.5],
            max_steps: 1_000_000,
            diagnostics_every: 10,
            spike_window: None,
        }
    }
}

impl RunConfig {
    pub fn new(t_end: f64, cfl: f64) -> Result<Self> {
        let c = Self {
            t_end,
            cfl,
            output_times: Vec::new(),
            ..Self::default()
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_outputs(mut self, times: Vec<f64>) -> Result<Self> {
        self.output_times = times;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return bad(format!("t_end must be non-negative, got {}", self.t_end));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad(format!("cfl must lie in (0, 1], got {}", self.cfl));
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive".into());
        }
        for w in self.output_times.windows(2) {
            if !(w[0] < w[1]) {
                return bad("output times must be strictly increasing".into());
            }
        }
        if let Some(&t) = self.output_times.iter().find(|&&t| !(t >= 0.0 && t <= self.t_end)) {
            return bad(format!("output time {t} outside [0, {}]", self.t_end));
        }
        Ok(())
    }
}

/// `cfl·h/((2p+1)λ)` with `λ` the maximum wave speed and `p` the polynomial
/// degree. The `2p+1` factor is the usual DG scaling of the cell width; with
/// it, `cfl ≤ 1` stays inside the SSPRK3 stability region for `p = 1`.
pub fn cfl_dt(model: &Model, state: &SimState, cfl: f64) -> Result<f64> {
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "cfl must lie in (0, 1], got {cfl}"
        )));
    }
    let lam = model.max_wave_speed(state)?;
    if !(lam > 0.0) || !lam.is_finite() {
        return Err(Error::ZeroWaveSpeed(lam));
    }
    let p = model.params().penalty.poly_order as f64;
    Ok(cfl * model.mesh().h() / ((2.0 * p + 1.0) * lam))
}

/// Shorten `dt` so that `t + dt` does not pass `target`.
pub fn clip_dt(t: f64, dt: f64, target: f64) -> f64 {
    if t + dt >= target {
        target - t
    } else {
        dt
    }
}

/// One Shu–Osher SSPRK3 step.
pub fn ssprk3_step<F>(state: &SimState, dt: f64, mut rhs: F) -> Result<SimState>
where
    F: FnMut(&SimState) -> Result<StateRate>,
{
    let stage = |k: usize| move |e: Error| Error::Stage {
        stage: k,
        source: Box::new(e),
    };
    let l0 = rhs(state).map_err(stage(1))?;
    let u1 = state.advanced(&l0, dt);
    let l1 = rhs(&u1).map_err(stage(2))?;
    let u2 = SimState::combine(0.75, state, 0.25, &u1.advanced(&l1, dt));
    let l2 = rhs(&u2).map_err(stage(3))?;
    let mut out = SimState::combine(1.0 / 3.0, state, 2.0 / 3.0, &u2.advanced(&l2, dt));
    out.time = state.time + dt;
    Ok(out)
}

/// Hooks invoked by [`run`]. Observers see the state but cannot change it.
pub trait RunObserver {
    fn on_output(&mut self, _state: &SimState, _record: &DiagnosticsRecord) -> Result<()> {
        Ok(())
    }

    fn on_diagnostics(&mut self, _record: &DiagnosticsRecord) -> Result<()> {
        Ok(())
    }
}

/// Observer that does nothing.
pub struct NoObserver;

impl RunObserver for NoObserver {}

/// Collects every output state.
#[derive(Default)]
pub struct SnapshotCollector {
    pub snapshots: Vec<SimState>,
}

impl RunObserver for SnapshotCollector {
    fn on_output(&mut self, state: &SimState, _record: &DiagnosticsRecord) -> Result<()> {
        self.snapshots.push(state.clone());
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: SimState,
    pub diagnostics: Vec<DiagnosticsRecord>,
    pub steps: usize,
}

/// Integrate from `state.time` to `config.t_end`.
pub fn run(
    model: &Model,
    initial: SimState,
    config: &RunConfig,
    observer: &mut dyn RunObserver,
) -> Result<RunOutcome> {
    config.validate()?;
    let mut state = initial;
    let mut diagnostics = Vec::new();
    let mut steps = 0usize;
    let mut outputs = config.output_times.iter().copied().peekable();

    let sample = |state: &SimState, steps: usize, diagnostics: &mut Vec<DiagnosticsRecord>| {
        let r = DiagnosticsRecord::sample(model, state, steps, config.spike_window)?;
        diagnostics.push(r);
        Ok::<_, Error>(r)
    };

    let r0 = sample(&state, 0, &mut diagnostics)?;
    observer.on_diagnostics(&r0)?;
    while let Some(&t) = outputs.peek() {
        if t <= state.time {
            observer.on_output(&state, &r0)?;
            outputs.next();
        } else {
            break;
        }
    }

    while state.time < config.t_end {
        if steps >= config.max_steps {
            return Err(Error::MaxSteps(config.max_steps));
        }
        let target = outputs.peek().copied().unwrap_or(config.t_end).min(config.t_end);
        let dt = clip_dt(state.time, cfl_dt(model, &state, config.cfl)?, target);
        state = ssprk3_step(&state, dt, |s| model.semidiscrete_rhs(s))?;
        steps += 1;
        let landed = state.time >= target;
        if landed {
            state.time = target;
        }
        let hit_output = landed && outputs.peek().is_some_and(|&t| t == target);
        let periodic = config.diagnostics_every > 0 && steps % config.diagnostics_every == 0;
        let at_end = state.time >= config.t_end;
        if hit_output || periodic || at_end {
            let r = sample(&state, steps, &mut diagnostics)?;
            observer.on_diagnostics(&r)?;
            if hit_output {
                observer.on_output(&state, &r)?;
                outputs.next();
            }
        }
    }
    Ok(RunOutcome {
        state,
        diagnostics,
        steps,
    })
}
