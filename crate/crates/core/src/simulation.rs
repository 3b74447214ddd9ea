//! Fixed-step closed-loop simulation.
//!
//! The plant state, both weight layers, the memory contents and the state
//! keys are integrated together with RK4. Attention selection and the number
//! of active locations are discrete: they are computed once at the start of
//! every step and held through its four stages, and reallocation is checked
//! after the step completes. Mass jumps land on the nearest grid time.
//!
//! Light links under a large feedback gain make the filtered-error mode
//! faster than RK4 can follow at the nominal step. When
//! [`SimConfig::stiffness_limit`] is set, each step is split into equal
//! substeps so that the fastest mode times the substep stays below the
//! limit; the discrete states remain on the nominal grid.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::dynamics::{self, ArmParams, PlantState, ReferenceSample};
use crate::integrator::{OdeState, Rk4};
use crate::linalg::Vec2;
use crate::memory::{AttentionConfig, AttentionWeights, KeyDesign, Query, WorkingMemory};
use crate::metrics::{self, RunSummary};
use crate::neurocontroller::{self as nc, ErrorState, NetworkParams, OUTPUT_DIM};
use crate::scenario::ScenarioSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Record every this many integration steps.
    pub sample_every: usize,
    /// Abort once `‖x‖ + ‖ẋ‖` exceeds this.
    pub divergence_bound: f64,
    pub seed: u64,
    /// Bound on `dt·λ` for the fastest closed-loop mode; `None` integrates
    /// with exactly one RK4 step per grid step.
    pub stiffness_limit: Option<f64>,
}

impl SimConfig {
    pub const DEFAULT_DT: f64 = 1e-3;
    pub const DEFAULT_SAMPLE_EVERY: usize = 10;
    pub const DEFAULT_DIVERGENCE_BOUND: f64 = 1e3;
    pub const DEFAULT_STIFFNESS_LIMIT: f64 = 2.0;

    pub fn from_scenario(spec: &ScenarioSpec) -> Self {
        Self {
            dt: Self::DEFAULT_DT,
            t_end: spec.duration,
            sample_every: Self::DEFAULT_SAMPLE_EVERY,
            divergence_bound: Self::DEFAULT_DIVERGENCE_BOUND,
            seed: spec.seed,
            stiffness_limit: Some(Self::DEFAULT_STIFFNESS_LIMIT),
        }
    }

    pub fn steps(&self) -> usize {
        libm::round(self.t_end / self.dt) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Invalid(alloc::format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Invalid(alloc::format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if self.sample_every == 0 {
            return Err(Error::Invalid("sample_every must be at least 1".into()));
        }
        if !(self.divergence_bound > 0.0) {
            return Err(Error::Invalid("divergence bound must be positive".into()));
        }
        if let Some(limit) = self.stiffness_limit {
            if !(limit > 0.0 && limit.is_finite()) {
                return Err(Error::Invalid(alloc::format!(
                    "stiffness limit must be positive, got {limit}"
                )));
            }
        }
        Ok(())
    }
}

/// Everything integrated by RK4. Memory is absent for the plain network.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoopState {
    pub plant: PlantState,
    pub net: NetworkParams,
    pub memory: Option<WorkingMemory>,
}

impl OdeState for ClosedLoopState {
    fn scaled_add(&mut self, k: f64, other: &Self) {
        self.plant.x.scaled_add(k, &other.plant.x);
        self.plant.xdot.scaled_add(k, &other.plant.xdot);
        self.net.scaled_add(k, &other.net);
        if let (Some(m), Some(d)) = (self.memory.as_mut(), other.memory.as_ref()) {
            m.scaled_add(k, d);
        }
    }
}

impl ClosedLoopState {
    pub fn zeros_like(&self) -> Self {
        let mut net = self.net.clone();
        net.fill_zero();
        Self {
            plant: PlantState::default(),
            net,
            memory: self.memory.as_ref().map(WorkingMemory::zeros_like),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.plant.is_finite() && self.net.is_finite() && self.memory.as_ref().is_none_or(WorkingMemory::is_finite)
    }
}

/// Controller signals at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerOutputs {
    pub reference: ReferenceSample,
    pub err: ErrorState,
    /// Hidden pre-activation `V̂ᵀx̃ + b̂_v`.
    pub z: Vec<f64>,
    /// Hidden activation, also the memory write vector.
    pub sigma: Vec<f64>,
    pub h_o: Vec<f64>,
    pub u_ad: Vec2,
    pub u_bl: Vec2,
    pub v: Vec2,
    pub tau: Vec2,
}

/// Static inputs to the closed-loop vector field over one step.
#[derive(Debug, Clone, Copy)]
pub struct LoopInputs<'a> {
    pub arm: &'a ArmParams,
    pub spec: &'a ScenarioSpec,
    /// Held attention; `None` for the plain network.
    pub weights: Option<&'a AttentionWeights>,
}

/// Hidden pre-activation and activation at the current input.
fn hidden(net: &NetworkParams, err: &ErrorState) -> (Vec<f64>, Vec<f64>) {
    let z = nc::pre_activation(net, &err.x_tilde);
    let sigma = z.iter().map(|v| crate::linalg::sigmoid(*v)).collect();
    (z, sigma)
}

pub fn controller_outputs(state: &ClosedLoopState, t: f64, inputs: &LoopInputs<'_>) -> ControllerOutputs {
    let spec = inputs.spec;
    let reference = dynamics::reference_eval(&spec.reference, t);
    let err = nc::error_state(&state.plant, &reference, &spec.gains);
    let (z, sigma) = hidden(&state.net, &err);
    let (h_o, memory_norm) = match (&state.memory, inputs.weights) {
        (Some(mem), Some(w)) => (mem.memory_read(w), mem.frobenius_norm()),
        _ => (vec![0.0; state.net.hidden()], 0.0),
    };
    let u_ad = nc::nn_output_from_hidden(&state.net, &sigma, &h_o);
    let u_bl = nc::baseline_term(&err.r, &spec.gains);
    let v = nc::robustifying_term(&state.net, memory_norm, &err.r, &spec.gains);
    let tau = nc::total_torque(&u_bl, &u_ad, &v);
    ControllerOutputs {
        reference,
        err,
        z,
        sigma,
        h_o,
        u_ad,
        u_bl,
        v,
        tau,
    }
}

/// Writes the derivative of every continuous state into `out` and returns
/// the controller signals it was computed from.
pub fn closed_loop_derivative_into(
    state: &ClosedLoopState,
    t: f64,
    inputs: &LoopInputs<'_>,
    out: &mut ClosedLoopState,
) -> Result<ControllerOutputs> {
    let outputs = controller_outputs(state, t, inputs);
    out.plant = dynamics::plant_derivative(inputs.arm, &state.plant, &outputs.tau)?;
    nc::weight_derivatives_into(
        &state.net,
        &outputs.err,
        &outputs.sigma,
        &outputs.z,
        &inputs.spec.gains,
        &mut out.net,
    );
    if let (Some(mem), Some(w), Some(dmem)) = (&state.memory, inputs.weights, out.memory.as_mut()) {
        // Ŵ·h_eᵀ
        let r = outputs.err.h_e();
        let correction: Vec<f64> = (0..state.net.hidden())
            .map(|k| (0..OUTPUT_DIM).map(|c| state.net.w(k, c) * r[c]).sum())
            .collect();
        mem.memory_write_derivative(w, &outputs.sigma, &correction, dmem);
        mem.key_derivative_state(w, &state.plant.x, dmem);
    }
    Ok(outputs)
}

pub fn closed_loop_derivative(state: &ClosedLoopState, t: f64, inputs: &LoopInputs<'_>) -> Result<ClosedLoopState> {
    let mut out = state.zeros_like();
    closed_loop_derivative_into(state, t, inputs, &mut out)?;
    Ok(out)
}

/// Attention over the active locations at `(state, t)` together with the
/// key distances it was computed from.
pub fn select_attention(
    state: &ClosedLoopState,
    t: f64,
    spec: &ScenarioSpec,
    config: &AttentionConfig,
) -> Option<(AttentionWeights, Vec<f64>)> {
    let mem = state.memory.as_ref()?;
    let query_sigma;
    let query = match mem.key_design() {
        KeyDesign::State => Query::State(state.plant.x),
        KeyDesign::Representation => {
            query_sigma = current_hidden(state, t, spec);
            Query::Representation(&query_sigma)
        }
    };
    let weights = mem.attention(config.mode, config.beta, query);
    Some((weights, mem.distances(query)))
}

fn current_hidden(state: &ClosedLoopState, t: f64, spec: &ScenarioSpec) -> Vec<f64> {
    let reference = dynamics::reference_eval(&spec.reference, t);
    let err = nc::error_state(&state.plant, &reference, &spec.gains);
    hidden(&state.net, &err).1
}

/// Rate of the filtered-error mode, `(K_v + k_v·(…)) / λ_min(M)`.
pub fn fast_mode_rate(
    state: &ClosedLoopState,
    arm: &ArmParams,
    gains: &crate::neurocontroller::ControllerGains,
) -> f64 {
    let memory_norm = state.memory.as_ref().map_or(0.0, WorkingMemory::frobenius_norm);
    let gain = gains.kv + nc::robust_gain(&state.net, memory_norm, gains);
    let m = dynamics::mass_matrix(arm, &state.plant.x);
    let lambda_min = crate::linalg::sym_eigenvalues(&m)[0];
    gain / lambda_min
}

/// Number of RK4 substeps for one grid step.
pub fn substeps(rate: f64, dt: f64, limit: Option<f64>) -> usize {
    match limit {
        Some(limit) if rate.is_finite() && rate > 0.0 => (libm::ceil(rate * dt / limit) as usize).max(1),
        _ => 1,
    }
}

/// The closed-loop state at `t = 0`: plant on the reference unless the
/// scenario overrides it, freshly seeded weights, and memory initialised
/// for the controller kind.
pub fn initial_state(spec: &ScenarioSpec, seed: u64) -> ClosedLoopState {
    let reference = dynamics::reference_eval(&spec.reference, 0.0);
    let plant = match spec.initial {
        Some(init) => PlantState {
            x: init.x,
            xdot: init.xdot,
        },
        None => PlantState {
            x: reference.s,
            xdot: reference.sdot,
        },
    };
    let net = NetworkParams::seeded(spec.controller.hidden, seed);
    let mut state = ClosedLoopState {
        plant,
        net,
        memory: None,
    };
    if let Some(att) = spec.controller.attention() {
        let n = spec.controller.hidden;
        let mem = match spec.controller.kind {
            crate::scenario::ControllerKind::MannProposed => {
                let sigma0 = current_hidden(&state, 0.0, spec);
                WorkingMemory::growing(n, spec.memory, att.key, &sigma0, plant.x)
            }
            _ => WorkingMemory::full(n, spec.memory, att.key, plant.x),
        };
        state.memory = Some(mem);
    }
    state
}

/// One sampled instant of the closed loop.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub x: Vec2,
    pub xdot: Vec2,
    pub s: Vec2,
    pub e: Vec2,
    pub r: Vec2,
    pub tau: Vec2,
    pub u_ad: Vec2,
    /// Link masses in force at `t`.
    pub masses: Vec2,
    pub sigma: Vec<f64>,
    pub h_o: Vec<f64>,
    /// Attention over the active locations; empty without memory.
    pub w_r: Vec<f64>,
    /// Key distances behind `w_r`.
    pub dist: Vec<f64>,
    pub n_s: usize,
    /// Attended location (largest factor); `None` without memory.
    pub i_star: Option<usize>,
    /// Whether a reallocation fired since the previous record.
    pub a_r_fired: bool,
}

fn record(
    t: f64,
    state: &ClosedLoopState,
    arm: &ArmParams,
    outputs: &ControllerOutputs,
    attention: Option<&(AttentionWeights, Vec<f64>)>,
    fired: bool,
) -> TraceRecord {
    TraceRecord {
        t,
        x: state.plant.x,
        xdot: state.plant.xdot,
        s: outputs.reference.s,
        e: outputs.err.e,
        r: outputs.err.r,
        tau: outputs.tau,
        u_ad: outputs.u_ad,
        masses: arm.masses(),
        sigma: outputs.sigma.clone(),
        h_o: outputs.h_o.clone(),
        w_r: attention.map(|a| a.0.w.clone()).unwrap_or_default(),
        dist: attention.map(|a| a.1.clone()).unwrap_or_default(),
        n_s: state.memory.as_ref().map_or(0, WorkingMemory::active),
        i_star: attention.map(|a| a.0.selected()),
        a_r_fired: fired,
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: Vec<TraceRecord>,
    pub summary: RunSummary,
    /// Grid times at which jumps were applied.
    pub jump_times: Vec<f64>,
    /// Number of reallocations over the run.
    pub reallocations: usize,
    pub final_state: ClosedLoopState,
}

/// A failed run with the last record taken before the failure.
#[derive(Debug, Clone)]
pub struct RunFailure {
    pub error: Error,
    pub last_record: Option<Box<TraceRecord>>,
}

impl fmt::Display for RunFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.error)?;
        if let Some(rec) = &self.last_record {
            write!(f, " (last sample at t = {}, x = {:?}, e = {:?})", rec.t, rec.x, rec.e)?;
        }
        Ok(())
    }
}

impl core::error::Error for RunFailure {}

impl From<Error> for RunFailure {
    fn from(error: Error) -> Self {
        Self {
            error,
            last_record: None,
        }
    }
}

/// Integrates the scenario from 0 to `config.t_end`.
pub fn run_scenario(spec: &ScenarioSpec, config: &SimConfig) -> core::result::Result<RunOutput, RunFailure> {
    run(spec, config, None)
}

/// Like [`run_scenario`], but also hands every grid step to `observer`
/// together with the full state. The record's `a_r_fired` then refers to
/// the step that led to it.
pub fn run_scenario_observed<F>(
    spec: &ScenarioSpec,
    config: &SimConfig,
    mut observer: F,
) -> core::result::Result<RunOutput, RunFailure>
where
    F: FnMut(&TraceRecord, &ClosedLoopState),
{
    run(spec, config, Some(&mut observer))
}

type Observer<'a> = dyn FnMut(&TraceRecord, &ClosedLoopState) + 'a;

fn run(
    spec: &ScenarioSpec,
    config: &SimConfig,
    mut observer: Option<&mut Observer<'_>>,
) -> core::result::Result<RunOutput, RunFailure> {
    spec.validate()?;
    config.validate()?;
    let steps = config.steps();
    let schedule = spec.jump_schedule();
    let jump_steps: Vec<usize> = schedule
        .events
        .iter()
        .map(|e| libm::round(e.time / config.dt) as usize)
        .collect();
    if jump_steps.iter().any(|s| *s >= steps) {
        return Err(Error::Invalid("a jump falls at or after the end of the run".into()).into());
    }

    let attention_config = spec.controller.attention();
    let mut arm = spec.arm()?;
    let mut state = initial_state(spec, config.seed);
    // Memory buffers span the full capacity, so growth never reshapes them.
    let mut rk = Rk4::new(&state.zeros_like());
    let mut trace = Vec::with_capacity(steps / config.sample_every + 1);
    let mut jump_times = Vec::with_capacity(jump_steps.len());
    let mut next_jump = 0;
    let mut fired_since_sample = false;
    let mut fired_last_step = false;
    let mut reallocations = 0;

    for step in 0..=steps {
        let t = step as f64 * config.dt;
        while next_jump < jump_steps.len() && jump_steps[next_jump] == step {
            arm = dynamics::apply_jump(&arm, &schedule.events[next_jump])?;
            jump_times.push(t);
            next_jump += 1;
        }

        let attention = attention_config
            .as_ref()
            .and_then(|cfg| select_attention(&state, t, spec, cfg));
        let inputs = LoopInputs {
            arm: &arm,
            spec,
            weights: attention.as_ref().map(|a| &a.0),
        };

        let sampled = step % config.sample_every == 0;
        if sampled || observer.is_some() {
            let outputs = controller_outputs(&state, t, &inputs);
            if let Some(f) = observer.as_mut() {
                f(
                    &record(t, &state, &arm, &outputs, attention.as_ref(), fired_last_step),
                    &state,
                );
            }
            if sampled {
                trace.push(record(
                    t,
                    &state,
                    &arm,
                    &outputs,
                    attention.as_ref(),
                    fired_since_sample,
                ));
                fired_since_sample = false;
            }
        }
        fired_last_step = false;
        if step == steps {
            break;
        }

        let mut system = |tt: f64, y: &ClosedLoopState, out: &mut ClosedLoopState| -> Result<()> {
            closed_loop_derivative_into(y, tt, &inputs, out).map(|_| ())
        };
        let n = substeps(
            fast_mode_rate(&state, &arm, &spec.gains),
            config.dt,
            config.stiffness_limit,
        );
        let h = config.dt / n as f64;
        for k in 0..n {
            if let Err(error) = rk.step(&mut system, t + k as f64 * h, &mut state, h) {
                return Err(RunFailure {
                    error,
                    last_record: trace.last().cloned().map(Box::new),
                });
            }
        }
        let t_next = t + config.dt;
        let norm = state.plant.magnitude();
        if !state.is_finite() || !(norm <= config.divergence_bound) {
            return Err(RunFailure {
                error: Error::Diverged { time: t_next, norm },
                last_record: trace.last().cloned().map(Box::new),
            });
        }

        if let Some(cfg) = &attention_config {
            let enabled = state
                .memory
                .as_ref()
                .is_some_and(|m| m.reallocation_enabled(cfg.reallocation));
            if enabled {
                let sigma = current_hidden(&state, t_next, spec);
                let x = state.plant.x;
                let mem = state
                    .memory
                    .as_mut()
                    .expect("memory present when attention is configured");
                if mem.reallocation_check(&sigma) {
                    mem.reallocate(&sigma, x);
                    fired_since_sample = true;
                    fired_last_step = true;
                    reallocations += 1;
                }
            }
        }
    }

    let summary = metrics::summarize(&trace, &jump_times).map_err(RunFailure::from)?;
    Ok(RunOutput {
        trace,
        summary,
        jump_times,
        reallocations,
        final_state: state,
    })
}
