//! Two-layer sigmoidal network, its continuous-time tuning laws and the
//! torque composition `τ = −u_bl − u_ad − v` for the two-link arm.
//!
//! Weight layout: the output layer is stored augmented as `[Ŵ; b̂_wᵀ]`, an
//! `(N+1)×2` row-major block, and the input layer as `[V̂; b̂_vᵀ]`, an
//! `11×N` row-major block. Both update laws are written directly against
//! these augmented blocks.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{PlantState, ReferenceSample};
use crate::linalg::{self, Mat2, Vec2};
use crate::{Error, Result};

/// Length of the network input `[e, ė, s, ṡ, s̈]` for a two-link arm.
pub const INPUT_DIM: usize = 10;
pub const OUTPUT_DIM: usize = 2;

/// Half-width of the uniform distribution used for `V̂` and `b̂_v`.
pub const INIT_SCALE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    hidden: usize,
    /// `[Ŵ; b̂_wᵀ]`, `(N+1)×2` row-major.
    pub w_aug: Vec<f64>,
    /// `[V̂; b̂_vᵀ]`, `(INPUT_DIM+1)×N` row-major.
    pub v_aug: Vec<f64>,
}

impl NetworkParams {
    pub fn zeros(hidden: usize) -> Self {
        Self {
            hidden,
            w_aug: vec![0.0; (hidden + 1) * OUTPUT_DIM],
            v_aug: vec![0.0; (INPUT_DIM + 1) * hidden],
        }
    }

    /// Output layer at zero, input layer and hidden bias i.i.d. uniform on
    /// `[-INIT_SCALE, INIT_SCALE]` from a ChaCha8 stream seeded with `seed`.
    pub fn seeded(hidden: usize, seed: u64) -> Self {
        let mut net = Self::zeros(hidden);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in net.v_aug.iter_mut() {
            *v = rng.gen_range(-INIT_SCALE..=INIT_SCALE);
        }
        net
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    #[inline]
    pub fn w(&self, k: usize, c: usize) -> f64 {
        self.w_aug[k * OUTPUT_DIM + c]
    }

    pub fn b_w(&self) -> Vec2 {
        let base = self.hidden * OUTPUT_DIM;
        [self.w_aug[base], self.w_aug[base + 1]]
    }

    #[inline]
    pub fn v(&self, j: usize, k: usize) -> f64 {
        self.v_aug[j * self.hidden + k]
    }

    pub fn b_v(&self) -> &[f64] {
        &self.v_aug[INPUT_DIM * self.hidden..]
    }

    /// Frobenius norm of `Ŵ` (biases excluded).
    pub fn w_norm(&self) -> f64 {
        linalg::norm2(&self.w_aug[..self.hidden * OUTPUT_DIM])
    }

    /// Frobenius norm of `V̂` (biases excluded).
    pub fn v_norm(&self) -> f64 {
        linalg::norm2(&self.v_aug[..INPUT_DIM * self.hidden])
    }

    pub fn is_finite(&self) -> bool {
        self.w_aug.iter().chain(&self.v_aug).all(|v| v.is_finite())
    }

    pub fn fill_zero(&mut self) {
        self.w_aug.fill(0.0);
        self.v_aug.fill(0.0);
    }

    pub fn scaled_add(&mut self, k: f64, other: &Self) {
        for (a, b) in self.w_aug.iter_mut().zip(&other.w_aug) {
            *a += k * b;
        }
        for (a, b) in self.v_aug.iter_mut().zip(&other.v_aug) {
            *a += k * b;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerGains {
    /// Proportional gain on the filtered error, `u_bl = −K_v·r`.
    pub kv: f64,
    /// Robustifying gain `k_v`.
    pub kv_robust: f64,
    /// Weight-decay gain `κ`.
    pub kappa: f64,
    /// Output-layer learning rate.
    pub cw: f64,
    /// Input-layer learning rate.
    pub cv: f64,
    /// Filter gain in `r = ė + Λe`.
    pub lambda: Mat2,
    /// Bound on the ideal weights used by the robustifying term.
    pub zm: f64,
}

impl Default for ControllerGains {
    fn default() -> Self {
        Self {
            kv: 20.0,
            kv_robust: 10.0,
            kappa: 0.0,
            cw: 10.0,
            cv: 10.0,
            lambda: [[5.0, 0.0], [0.0, 5.0]],
            zm: 10.0,
        }
    }
}

impl ControllerGains {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("kv", self.kv),
            ("kv_robust", self.kv_robust),
            ("cw", self.cw),
            ("cv", self.cv),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::Invalid(alloc::format!("{name} must be positive, got {value}")));
            }
        }
        if !(self.kappa >= 0.0) || !(self.zm >= 0.0) {
            return Err(Error::Invalid("kappa and zm must be non-negative".into()));
        }
        let l = &self.lambda;
        if l[0][1] != l[1][0] || !(linalg::sym_eigenvalues(l)[0] > 0.0) {
            return Err(Error::Invalid("lambda must be symmetric positive definite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorState {
    pub e: Vec2,
    pub edot: Vec2,
    pub r: Vec2,
    /// `[e, ė, s, ṡ, s̈]`.
    pub x_tilde: [f64; INPUT_DIM],
}

impl ErrorState {
    /// The row vector `h_e`, equal to `rᵀ` for the arm.
    pub fn h_e(&self) -> Vec2 {
        self.r
    }
}

pub fn error_state(plant: &PlantState, reference: &ReferenceSample, gains: &ControllerGains) -> ErrorState {
    let e = linalg::sub(&reference.s, &plant.x);
    let edot = linalg::sub(&reference.sdot, &plant.xdot);
    let r = linalg::add(&edot, &linalg::mat_vec(&gains.lambda, &e));
    let mut x_tilde = [0.0; INPUT_DIM];
    for (block, v) in [e, edot, reference.s, reference.sdot, reference.sddot]
        .iter()
        .enumerate()
    {
        x_tilde[2 * block] = v[0];
        x_tilde[2 * block + 1] = v[1];
    }
    ErrorState { e, edot, r, x_tilde }
}

/// `V̂ᵀx̃ + b̂_v`.
pub fn pre_activation(net: &NetworkParams, x_tilde: &[f64; INPUT_DIM]) -> Vec<f64> {
    let n = net.hidden;
    let mut z = net.b_v().to_vec();
    for (j, xj) in x_tilde.iter().enumerate() {
        let row = &net.v_aug[j * n..(j + 1) * n];
        for (zk, vjk) in z.iter_mut().zip(row) {
            *zk += vjk * xj;
        }
    }
    z
}

pub fn hidden_layer(net: &NetworkParams, x_tilde: &[f64; INPUT_DIM]) -> Vec<f64> {
    let mut z = pre_activation(net, x_tilde);
    z.iter_mut().for_each(|v| *v = linalg::sigmoid(*v));
    z
}

/// `σ̂ = [σ; 1]`.
pub fn sigma_hat(net: &NetworkParams, x_tilde: &[f64; INPUT_DIM]) -> Vec<f64> {
    let mut s = hidden_layer(net, x_tilde);
    s.push(1.0);
    s
}

/// `σ̂′ = [diag(σ⊙(1−σ)); 0ᵀ]` as an `(N+1)×N` row-major block.
pub fn sigma_hat_prime(net: &NetworkParams, x_tilde: &[f64; INPUT_DIM]) -> Vec<f64> {
    let sigma = hidden_layer(net, x_tilde);
    let n = sigma.len();
    let mut out = vec![0.0; (n + 1) * n];
    for (k, s) in sigma.iter().enumerate() {
        out[k * n + k] = s * (1.0 - s);
    }
    out
}

/// `u_ad = −Ŵᵀ(σ + h_o) − b̂_w` given the hidden activations.
pub fn nn_output_from_hidden(net: &NetworkParams, sigma: &[f64], h_o: &[f64]) -> Vec2 {
    debug_assert_eq!(sigma.len(), net.hidden);
    let mut out = net.b_w();
    for k in 0..net.hidden {
        let a = sigma[k] + h_o.get(k).copied().unwrap_or(0.0);
        out[0] += net.w(k, 0) * a;
        out[1] += net.w(k, 1) * a;
    }
    [-out[0], -out[1]]
}

/// `u_ad = −Ŵᵀ(σ(V̂ᵀx̃ + b̂_v) + h_o) − b̂_w`. Pass an empty or zero `h_o`
/// for a network without memory.
pub fn nn_output(net: &NetworkParams, x_tilde: &[f64; INPUT_DIM], h_o: &[f64]) -> Vec2 {
    nn_output_from_hidden(net, &hidden_layer(net, x_tilde), h_o)
}

/// Time derivative of both augmented weight blocks, written into `out`.
///
/// `sigma` and `z` are the hidden activations and pre-activations at the
/// current input; they are passed in because the caller already has them.
pub fn weight_derivatives_into(
    net: &NetworkParams,
    err: &ErrorState,
    sigma: &[f64],
    z: &[f64],
    gains: &ControllerGains,
    out: &mut NetworkParams,
) {
    let n = net.hidden;
    let h_e = err.h_e();
    let decay = gains.kappa * linalg::norm2(&err.e);

    // Output layer: C_w (σ̂ − σ̂′z) h_e − κ C_w ‖e‖ [Ŵ; b̂_wᵀ]
    for k in 0..=n {
        let a = if k < n {
            let s = sigma[k];
            s - s * (1.0 - s) * z[k]
        } else {
            1.0
        };
        for c in 0..OUTPUT_DIM {
            let idx = k * OUTPUT_DIM + c;
            out.w_aug[idx] = gains.cw * (a * h_e[c] - decay * net.w_aug[idx]);
        }
    }

    // Input layer: C_v [x̃; 1] h_e [Ŵ; b̂_wᵀ]ᵀ σ̂′ − κ C_v ‖e‖ [V̂; b̂_vᵀ]
    // h_e·[Ŵ; b̂_wᵀ]ᵀ·σ̂′ keeps only the first N columns, and the b̂_w row
    // meets the zero row of σ̂′.
    let mut back = vec![0.0; n];
    for (k, b) in back.iter_mut().enumerate() {
        let s = sigma[k];
        *b = (h_e[0] * net.w(k, 0) + h_e[1] * net.w(k, 1)) * s * (1.0 - s);
    }
    for j in 0..=INPUT_DIM {
        let xj = if j < INPUT_DIM { err.x_tilde[j] } else { 1.0 };
        for k in 0..n {
            let idx = j * n + k;
            out.v_aug[idx] = gains.cv * (xj * back[k] - decay * net.v_aug[idx]);
        }
    }
}

pub fn weight_derivatives(net: &NetworkParams, err: &ErrorState, gains: &ControllerGains) -> NetworkParams {
    let z = pre_activation(net, &err.x_tilde);
    let sigma: Vec<f64> = z.iter().map(|v| linalg::sigmoid(*v)).collect();
    let mut out = NetworkParams::zeros(net.hidden);
    weight_derivatives_into(net, err, &sigma, &z, gains, &mut out);
    out
}

/// `v = −k_v(‖Ŵ‖_F + ‖V̂‖_F + ‖μ‖_F + Z_m)·r`.
/// Scalar gain of the robustifying term.
pub fn robust_gain(net: &NetworkParams, memory_norm: f64, gains: &ControllerGains) -> f64 {
    gains.kv_robust * (net.w_norm() + net.v_norm() + memory_norm + gains.zm)
}

pub fn robustifying_term(net: &NetworkParams, memory_norm: f64, r: &Vec2, gains: &ControllerGains) -> Vec2 {
    linalg::scale(-robust_gain(net, memory_norm, gains), r)
}

/// `u_bl = −K_v·r`.
pub fn baseline_term(r: &Vec2, gains: &ControllerGains) -> Vec2 {
    linalg::scale(-gains.kv, r)
}

/// `τ = −u = −u_bl − u_ad − v`.
pub fn total_torque(u_bl: &Vec2, u_ad: &Vec2, v: &Vec2) -> Vec2 {
    [-u_bl[0] - u_ad[0] - v[0], -u_bl[1] - u_ad[1] - v[1]]
}
