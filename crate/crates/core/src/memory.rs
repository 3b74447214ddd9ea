//! Continuous-time working memory.
//!
//! Contents `h` are stored column-major with `capacity` columns of length
//! `hidden`; only the first `active` columns exist for reading, writing and
//! attention. Columns past `active` stay zero until growth activates them.
//!
//! Two key designs are supported. State keys are points in joint space with
//! their own first-order dynamics. Representation keys are the memory
//! columns themselves, compared against the hidden activation after undoing
//! the write gain `c_w`.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::linalg::{self, Vec2};
use crate::{Error, Result};

/// Offset between neighbouring state keys when every location starts active.
pub const KEY_SPACING: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttentionMode {
    Soft,
    Hard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeyDesign {
    State,
    Representation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reallocation {
    Off,
    /// Active while the memory is still growing; off for good once full.
    InitialPhase,
    Always,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttentionConfig {
    pub mode: AttentionMode,
    pub key: KeyDesign,
    pub reallocation: Reallocation,
    /// Sharpness of the soft baseline; unused by hard attention.
    pub beta: f64,
}

impl Default for AttentionConfig {
    fn default() -> Self {
        Self {
            mode: AttentionMode::Hard,
            key: KeyDesign::Representation,
            reallocation: Reallocation::InitialPhase,
            beta: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemoryParams {
    /// Maximum number of locations `n_max`.
    pub capacity: usize,
    /// Write gain `c_w`.
    pub c_w: f64,
    /// State-key rate `c_k`.
    pub c_k: f64,
    /// Reallocation threshold `θ`.
    pub theta: f64,
}

impl Default for MemoryParams {
    fn default() -> Self {
        Self {
            capacity: 5,
            c_w: 0.75,
            c_k: 1.0,
            theta: 0.2,
        }
    }
}

impl MemoryParams {
    pub fn validate(&self) -> Result<()> {
        if self.capacity == 0 {
            return Err(Error::Invalid("memory capacity must be at least 1".into()));
        }
        if !(self.c_w > 0.0) || !(self.c_k > 0.0) || !(self.theta > 0.0) {
            return Err(Error::Invalid("c_w, c_k and theta must be positive".into()));
        }
        Ok(())
    }
}

/// Read/write factors over the active locations.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionWeights {
    pub w: Vec<f64>,
}

impl AttentionWeights {
    pub fn one_hot(len: usize, index: usize) -> Self {
        let mut w = vec![0.0; len];
        w[index] = 1.0;
        Self { w }
    }

    /// Index of the largest factor, lowest index on ties.
    pub fn selected(&self) -> usize {
        argmin_by(&self.w, |a, b| a > b)
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }
}

/// First index whose value beats every earlier one under `better`.
fn argmin_by(values: &[f64], better: impl Fn(f64, f64) -> bool) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if better(*v, values[best]) {
            best = i;
        }
    }
    best
}

/// `exp(aᵢ) / Σⱼ exp(aⱼ)` with the maximum subtracted first.
pub fn softmax(a: &[f64]) -> Vec<f64> {
    let max = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = a.iter().map(|v| libm::exp(v - max)).collect();
    let sum: f64 = out.iter().sum();
    out.iter_mut().for_each(|v| *v /= sum);
    out
}

/// What the controller compares against the keys.
#[derive(Debug, Clone, Copy)]
pub enum Query<'a> {
    /// Position sub-vector of the plant state.
    State(Vec2),
    /// Current hidden activation `σ(V̂ᵀx̃ + b̂_v)`.
    Representation(&'a [f64]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkingMemory {
    hidden: usize,
    active: usize,
    key: KeyDesign,
    params: MemoryParams,
    /// Column-major contents, `capacity` columns.
    pub h: Vec<f64>,
    /// Column-major state keys (2 per location); empty for representation keys.
    pub keys: Vec<f64>,
}

impl WorkingMemory {
    fn empty(hidden: usize, params: MemoryParams, key: KeyDesign) -> Self {
        let keys = match key {
            KeyDesign::State => vec![0.0; 2 * params.capacity],
            KeyDesign::Representation => Vec::new(),
        };
        Self {
            hidden,
            active: 0,
            key,
            params,
            h: vec![0.0; hidden * params.capacity],
            keys,
        }
    }

    /// A single active location holding `c_w·σ₀`, keyed at `x₀` when keys are
    /// state based. Further locations are added by reallocation.
    pub fn growing(hidden: usize, params: MemoryParams, key: KeyDesign, sigma0: &[f64], x0: Vec2) -> Self {
        let mut mem = Self::empty(hidden, params, key);
        mem.active = 1;
        mem.set_location(0, sigma0, x0);
        mem
    }

    /// Every location active with zero contents; state keys start at `x₀`
    /// shifted by `i·KEY_SPACING` in both coordinates.
    pub fn full(hidden: usize, params: MemoryParams, key: KeyDesign, x0: Vec2) -> Self {
        let mut mem = Self::empty(hidden, params, key);
        mem.active = params.capacity;
        if key == KeyDesign::State {
            for i in 0..params.capacity {
                let off = i as f64 * KEY_SPACING;
                mem.keys[2 * i] = x0[0] + off;
                mem.keys[2 * i + 1] = x0[1] + off;
            }
        }
        mem
    }

    /// Zero-valued memory with the same shape, used as a derivative buffer.
    pub fn zeros_like(&self) -> Self {
        let mut out = self.clone();
        out.h.fill(0.0);
        out.keys.fill(0.0);
        out
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn active(&self) -> usize {
        self.active
    }

    pub fn capacity(&self) -> usize {
        self.params.capacity
    }

    pub fn params(&self) -> &MemoryParams {
        &self.params
    }

    pub fn key_design(&self) -> KeyDesign {
        self.key
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.h[i * self.hidden..(i + 1) * self.hidden]
    }

    pub fn key(&self, i: usize) -> Option<Vec2> {
        match self.key {
            KeyDesign::State => Some([self.keys[2 * i], self.keys[2 * i + 1]]),
            KeyDesign::Representation => None,
        }
    }

    /// Frobenius norm over the active columns.
    pub fn frobenius_norm(&self) -> f64 {
        linalg::norm2(&self.h[..self.active * self.hidden])
    }

    pub fn is_finite(&self) -> bool {
        self.h.iter().chain(&self.keys).all(|v| v.is_finite())
    }

    pub fn fill_zero(&mut self) {
        self.h.fill(0.0);
        self.keys.fill(0.0);
    }

    /// Adds `k·other` to the continuous parts (contents and state keys).
    pub fn scaled_add(&mut self, k: f64, other: &Self) {
        for (a, b) in self.h.iter_mut().zip(&other.h) {
            *a += k * b;
        }
        for (a, b) in self.keys.iter_mut().zip(&other.keys) {
            *a += k * b;
        }
    }

    /// `‖σ − μᵢ/c_w‖_∞` for each active location, evaluated as
    /// `‖c_w·σ − μᵢ‖_∞ / c_w` so a column written as `c_w·σ` is at distance
    /// exactly zero.
    pub fn representation_distances(&self, sigma: &[f64]) -> Vec<f64> {
        let c_w = self.params.c_w;
        (0..self.active)
            .map(|i| linalg::scaled_dist_inf(c_w, sigma, self.column(i)) / c_w)
            .collect()
    }

    /// `‖q − kᵢ‖_∞` for each active state key.
    pub fn state_distances(&self, q: &Vec2) -> Vec<f64> {
        (0..self.active)
            .map(|i| {
                let k = [self.keys[2 * i], self.keys[2 * i + 1]];
                linalg::norm_inf(&linalg::sub(q, &k))
            })
            .collect()
    }

    /// Key distances for whichever key design this memory uses.
    pub fn distances(&self, query: Query<'_>) -> Vec<f64> {
        match (self.key, query) {
            (KeyDesign::State, Query::State(q)) => self.state_distances(&q),
            (KeyDesign::Representation, Query::Representation(q)) => self.representation_distances(q),
            (KeyDesign::State, Query::Representation(_)) => {
                panic!("state-keyed memory queried with a hidden activation")
            }
            (KeyDesign::Representation, Query::State(_)) => {
                panic!("representation-keyed memory queried with a joint position")
            }
        }
    }

    /// Hard attention with state keys: one-hot at `argmin ‖q − kᵢ‖_∞`.
    pub fn attention_hard_state(&self, q: &Vec2) -> AttentionWeights {
        let d = self.state_distances(q);
        AttentionWeights::one_hot(self.active, argmin_by(&d, |a, b| a < b))
    }

    /// Hard attention with representation keys: one-hot at `argmin ‖q − hᵢ/c_w‖_∞`.
    pub fn attention_hard_rep(&self, q: &[f64]) -> AttentionWeights {
        let d = self.representation_distances(q);
        AttentionWeights::one_hot(self.active, argmin_by(&d, |a, b| a < b))
    }

    /// Soft baseline: `softmax(−β·dᵢ)` over the key distances.
    pub fn attention_soft(&self, query: Query<'_>, beta: f64) -> AttentionWeights {
        let scores: Vec<f64> = self.distances(query).iter().map(|d| -beta * d).collect();
        AttentionWeights { w: softmax(&scores) }
    }

    pub fn attention(&self, mode: AttentionMode, beta: f64, query: Query<'_>) -> AttentionWeights {
        match (mode, query) {
            (AttentionMode::Soft, q) => self.attention_soft(q, beta),
            (AttentionMode::Hard, Query::State(q)) => self.attention_hard_state(&q),
            (AttentionMode::Hard, Query::Representation(q)) => self.attention_hard_rep(q),
        }
    }

    /// `ḣᵢ = w_r(i)·(−hᵢ + c_w·h_w + correction)` into `out.h`; inactive
    /// columns get zero.
    pub fn memory_write_derivative(&self, w_r: &AttentionWeights, h_w: &[f64], correction: &[f64], out: &mut Self) {
        let n = self.hidden;
        out.h.fill(0.0);
        for (i, wi) in w_r.w.iter().enumerate().take(self.active) {
            if *wi == 0.0 {
                continue;
            }
            let col = self.column(i);
            let dst = &mut out.h[i * n..(i + 1) * n];
            for k in 0..n {
                dst[k] = wi * (-col[k] + self.params.c_w * h_w[k] + correction[k]);
            }
        }
    }

    /// `k̇ᵢ = −c_k·w_r(i)·(kᵢ − x̲)` into `out.keys`; a no-op for
    /// representation keys.
    pub fn key_derivative_state(&self, w_r: &AttentionWeights, x_under: &Vec2, out: &mut Self) {
        out.keys.fill(0.0);
        if self.key != KeyDesign::State {
            return;
        }
        for (i, wi) in w_r.w.iter().enumerate().take(self.active) {
            let rate = -self.params.c_k * wi;
            out.keys[2 * i] = rate * (self.keys[2 * i] - x_under[0]);
            out.keys[2 * i + 1] = rate * (self.keys[2 * i + 1] - x_under[1]);
        }
    }

    /// `h_o = h·w_r`.
    pub fn memory_read(&self, w_r: &AttentionWeights) -> Vec<f64> {
        let mut out = vec![0.0; self.hidden];
        for (i, wi) in w_r.w.iter().enumerate().take(self.active) {
            if *wi == 0.0 {
                continue;
            }
            for (o, c) in out.iter_mut().zip(self.column(i)) {
                *o += wi * c;
            }
        }
        out
    }

    pub fn reallocation_enabled(&self, policy: Reallocation) -> bool {
        match policy {
            Reallocation::Off => false,
            Reallocation::Always => true,
            Reallocation::InitialPhase => self.active < self.params.capacity,
        }
    }

    /// `a_r`: `false` when some location is strictly within `θ` of `σ`.
    pub fn reallocation_check(&self, sigma: &[f64]) -> bool {
        !self
            .representation_distances(sigma)
            .iter()
            .any(|d| *d < self.params.theta)
    }

    /// Moves attention to a location re-initialised at `c_w·σ`. Grows the
    /// memory while below capacity, otherwise overwrites the location
    /// furthest from `σ`. Returns the index attention moved to.
    pub fn reallocate(&mut self, sigma: &[f64], x_under: Vec2) -> usize {
        let target = if self.active < self.params.capacity {
            self.active += 1;
            self.active - 1
        } else {
            let d = self.representation_distances(sigma);
            argmin_by(&d, |a, b| a > b)
        };
        self.set_location(target, sigma, x_under);
        target
    }

    fn set_location(&mut self, i: usize, sigma: &[f64], x_under: Vec2) {
        let n = self.hidden;
        let c_w = self.params.c_w;
        for (dst, s) in self.h[i * n..(i + 1) * n].iter_mut().zip(sigma) {
            *dst = c_w * s;
        }
        if self.key == KeyDesign::State {
            self.keys[2 * i] = x_under[0];
            self.keys[2 * i + 1] = x_under[1];
        }
    }
}

impl crate::integrator::OdeState for WorkingMemory {
    fn scaled_add(&mut self, k: f64, other: &Self) {
        WorkingMemory::scaled_add(self, k, other);
    }
}
