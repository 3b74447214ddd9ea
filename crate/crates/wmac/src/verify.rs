//! Property and oracle checks behind `wmac verify`.
//!
//! Every check compares the library against an independent reference:
//! a closed-form solution, a finite difference, or a structural identity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wmac_core::dynamics::{self, ArmParams, PlantState};
use wmac_core::integrator::Rk4;
use wmac_core::linalg::{self, Mat2, Vec2};
use wmac_core::memory::{AttentionWeights, KeyDesign, MemoryParams, WorkingMemory};
use wmac_core::neurocontroller::{self as nc, NetworkParams, INPUT_DIM};
use wmac_core::scenario::{preset, ControllerKind};
use wmac_core::simulation::{run_scenario_observed, SimConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

/// Seed used by the randomized checks.
pub const SEED: u64 = 2024;

/// `Ṁ − 2V_m` is skew-symmetric, with `Ṁ` differentiated by hand from the
/// entries of `M`.
pub fn skew_symmetry(samples: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let masses = [rng.gen_range(0.1..5.0), rng.gen_range(0.1..5.0)];
        let lengths = [rng.gen_range(0.3..2.5), rng.gen_range(0.3..2.5)];
        let arm = ArmParams::new(masses, lengths).expect("positive parameters");
        let x: Vec2 = [rng.gen_range(-3.2..3.2), rng.gen_range(-3.2..3.2)];
        let xdot = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
        let psi = masses[1] * lengths[0] * lengths[1];
        let d = -psi * x[1].sin() * xdot[1];
        let mdot: Mat2 = [[2.0 * d, d], [d, 0.0]];
        let v = dynamics::coriolis_matrix(&arm, &x, &xdot);
        let s = [
            [mdot[0][0] - 2.0 * v[0][0], mdot[0][1] - 2.0 * v[0][1]],
            [mdot[1][0] - 2.0 * v[1][0], mdot[1][1] - 2.0 * v[1][1]],
        ];
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            worst = worst.max((s[i][j] + s[j][i]).abs());
        }
    }
    Check::new(
        "skew_symmetry",
        worst <= 1e-10,
        format!("max |S + Sᵀ| = {worst:.3e} over {samples} random states (tolerance 1e-10)"),
    )
}

/// Every entry of `σ̂′ = ∂σ̂/∂z` against central differences of `σ̂` taken
/// by nudging the hidden biases, which enter `z` with unit weight.
pub fn sigma_prime_finite_difference(samples: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-5;
    let hidden = 10;
    let mut worst: f64 = 0.0;
    for s in 0..samples {
        let net = NetworkParams::seeded(hidden, seed.wrapping_add(s as u64));
        let mut x = [0.0; INPUT_DIM];
        x.iter_mut().for_each(|v| *v = rng.gen_range(-2.0..2.0));
        let analytic = nc::sigma_hat_prime(&net, &x);
        for k in 0..hidden {
            let bias = INPUT_DIM * hidden + k;
            let (mut up, mut down) = (net.clone(), net.clone());
            up.v_aug[bias] += h;
            down.v_aug[bias] -= h;
            let (a, b) = (nc::sigma_hat(&up, &x), nc::sigma_hat(&down, &x));
            for row in 0..=hidden {
                let numeric = (a[row] - b[row]) / (2.0 * h);
                worst = worst.max((analytic[row * hidden + k] - numeric).abs());
            }
        }
    }
    Check::new(
        "sigma_prime_finite_difference",
        worst <= 1e-6,
        format!("max deviation {worst:.3e} over {samples} inputs (tolerance 1e-6)"),
    )
}

fn integrate_scalar(lambda: f64, dt: f64, t_end: f64) -> f64 {
    let mut rk = Rk4::new(&0.0);
    let mut y = 1.0;
    let steps = (t_end / dt).round() as usize;
    let mut f = |_t: f64, y: &f64, out: &mut f64| -> Result<(), ()> {
        *out = lambda * y;
        Ok(())
    };
    for i in 0..steps {
        rk.step(&mut f, i as f64 * dt, &mut y, dt).expect("infallible");
    }
    y
}

/// `y′ = −y` from `y(0) = 1` to `t = 1` at `dt = 1e-3`.
pub fn rk4_exponential() -> Check {
    let err = (integrate_scalar(-1.0, 1e-3, 1.0) - (-1.0f64).exp()).abs();
    Check::new(
        "rk4_exponential",
        err <= 1e-10,
        format!("|y(1) − e⁻¹| = {err:.3e} (tolerance 1e-10)"),
    )
}

/// Global error of a harmonic oscillator (`ω = 20`) at `t = 1` for each step.
pub fn oscillator_errors(dts: &[f64]) -> Vec<f64> {
    let omega = 20.0;
    dts.iter()
        .map(|dt| {
            let mut rk = Rk4::new(&[0.0; 2]);
            let mut y = [1.0, 0.0];
            let mut f = |_t: f64, y: &[f64; 2], out: &mut [f64; 2]| -> Result<(), ()> {
                *out = [y[1], -omega * omega * y[0]];
                Ok(())
            };
            let steps = (1.0 / dt).round() as usize;
            for i in 0..steps {
                rk.step(&mut f, i as f64 * dt, &mut y, *dt).expect("infallible");
            }
            let exact = [omega.cos(), -omega * omega.sin()];
            ((y[0] - exact[0]).powi(2) + ((y[1] - exact[1]) / omega).powi(2)).sqrt()
        })
        .collect()
}

pub fn rk4_order() -> Check {
    let dts = [4e-3, 2e-3, 1e-3];
    let errs = oscillator_errors(&dts);
    let orders: Vec<f64> = errs.windows(2).map(|e| (e[0] / e[1]).log2()).collect();
    let min = orders.iter().cloned().fold(f64::INFINITY, f64::min);
    let errs_text = errs.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(", ");
    Check::new(
        "rk4_order",
        min >= 3.9,
        format!("errors [{errs_text}] at dt {dts:?}, observed orders {orders:.3?} (minimum 3.9)"),
    )
}

/// One location written toward a constant vector under a constant weight
/// relaxes as `h(t) = c_w·h_w + (h(0) − c_w·h_w)·e^{−w t}`.
pub fn write_equilibrium() -> Check {
    let params = MemoryParams::default();
    let n = 4;
    let h_w = [0.9, 0.1, 0.5, 0.3];
    let h0 = [0.0, 1.0, -0.5, 0.2];
    let weight = 0.6;
    let mut mem = WorkingMemory::growing(n, params, KeyDesign::Representation, &h0, [0.0; 2]);
    mem.h[..n].copy_from_slice(&h0);
    let w = AttentionWeights { w: vec![weight] };
    let correction = [0.0; 4];
    let (dt, t_end) = (1e-3, 5.0);
    let mut rk = Rk4::new(&mem.zeros_like());
    let mut f = |_t: f64, m: &WorkingMemory, out: &mut WorkingMemory| -> Result<(), ()> {
        m.memory_write_derivative(&w, &h_w, &correction, out);
        out.keys.fill(0.0);
        Ok(())
    };
    let steps = (t_end / dt) as usize;
    let mut worst: f64 = 0.0;
    for i in 0..steps {
        rk.step(&mut f, i as f64 * dt, &mut mem, dt).expect("infallible");
        let t = (i + 1) as f64 * dt;
        for k in 0..n {
            let target = params.c_w * h_w[k];
            let exact = target + (h0[k] - target) * (-weight * t).exp();
            worst = worst.max((mem.column(0)[k] - exact).abs());
        }
    }
    Check::new(
        "write_equilibrium",
        worst <= 1e-6,
        format!("max deviation from the closed form {worst:.3e} over {t_end} s (tolerance 1e-6)"),
    )
}

/// A state key pulled toward a fixed state follows
/// `k(t) = x + (k(0) − x)·e^{−c_k w t}`.
pub fn key_closed_form() -> Check {
    let params = MemoryParams::default();
    let x0 = [0.3, -0.2];
    let target: Vec2 = [1.0, 0.5];
    let weight = 0.8;
    let mut mem = WorkingMemory::full(3, params, KeyDesign::State, x0);
    let k0: Vec<Vec2> = (0..params.capacity).map(|i| mem.key(i).expect("state keys")).collect();
    let mut w = vec![0.0; params.capacity];
    w[1] = weight;
    let w = AttentionWeights { w };
    let (dt, t_end) = (1e-3, 5.0);
    let mut rk = Rk4::new(&mem.zeros_like());
    let mut f = |_t: f64, m: &WorkingMemory, out: &mut WorkingMemory| -> Result<(), ()> {
        m.key_derivative_state(&w, &target, out);
        out.h.fill(0.0);
        Ok(())
    };
    let steps = (t_end / dt) as usize;
    let mut worst: f64 = 0.0;
    for i in 0..steps {
        rk.step(&mut f, i as f64 * dt, &mut mem, dt).expect("infallible");
        let t = (i + 1) as f64 * dt;
        for (loc, start) in k0.iter().enumerate() {
            let rate = params.c_k * w.w[loc];
            let key = mem.key(loc).expect("state keys");
            for j in 0..2 {
                let exact = target[j] + (start[j] - target[j]) * (-rate * t).exp();
                worst = worst.max((key[j] - exact).abs());
            }
        }
    }
    Check::new(
        "key_closed_form",
        worst <= 1e-6,
        format!("max deviation from the closed form {worst:.3e} over {t_end} s (tolerance 1e-6)"),
    )
}

/// Kinetic energy `½ẋᵀMẋ` of the unforced, gravity-free arm stays constant.
pub fn energy_conservation() -> Check {
    let arm = ArmParams::new([0.8, 2.3], [1.0, 1.0]).expect("positive parameters");
    let energy = |s: &PlantState| {
        let m = dynamics::mass_matrix(&arm, &s.x);
        let mx = linalg::mat_vec(&m, &s.xdot);
        0.5 * (s.xdot[0] * mx[0] + s.xdot[1] * mx[1])
    };
    let mut y = [0.4, -0.7, 1.5, -2.0];
    let e0 = energy(&PlantState {
        x: [y[0], y[1]],
        xdot: [y[2], y[3]],
    });
    let mut rk = Rk4::new(&[0.0; 4]);
    let mut f = |_t: f64, y: &[f64; 4], out: &mut [f64; 4]| -> Result<(), ()> {
        let (x, xdot) = ([y[0], y[1]], [y[2], y[3]]);
        let m = dynamics::mass_matrix(&arm, &x);
        let vx = linalg::mat_vec(&dynamics::coriolis_matrix(&arm, &x, &xdot), &xdot);
        let acc = linalg::solve2(&m, &[-vx[0], -vx[1]]).ok_or(())?;
        *out = [xdot[0], xdot[1], acc[0], acc[1]];
        Ok(())
    };
    let dt = 1e-3;
    let mut drift: f64 = 0.0;
    for i in 0..10_000 {
        rk.step(&mut f, i as f64 * dt, &mut y, dt).expect("regular mass matrix");
        let e = energy(&PlantState {
            x: [y[0], y[1]],
            xdot: [y[2], y[3]],
        });
        drift = drift.max((e - e0).abs() / e0);
    }
    Check::new(
        "energy_conservation",
        drift <= 1e-6,
        format!("max relative energy drift {drift:.3e} over 10 s (tolerance 1e-6)"),
    )
}

/// Full scenario-1 run of `kind`, checking at every grid step that hard
/// attention is one-hot and that every column not attended during the
/// previous step, and not reallocated, kept its exact bits.
pub fn full_run_attention(kind: ControllerKind) -> (Check, Check) {
    let spec = preset(1).expect("preset 1").with_controller(kind);
    let config = SimConfig::from_scenario(&spec);
    let mut steps = 0usize;
    let mut bad_one_hot = 0usize;
    let mut changed = 0usize;
    let mut frozen_column_steps = 0usize;
    let mut longest_frozen = 0.0f64;
    let mut frozen_since: Vec<Option<f64>> = Vec::new();
    let mut prev: Option<(Vec<f64>, Option<usize>, usize)> = None;
    let result = run_scenario_observed(&spec, &config, |rec, state| {
        steps += 1;
        let ones = rec.w_r.iter().filter(|w| **w == 1.0).count();
        let zeros = rec.w_r.iter().filter(|w| **w == 0.0).count();
        if ones != 1 || ones + zeros != rec.w_r.len() {
            bad_one_hot += 1;
        }
        let mem = state.memory.as_ref().expect("memory controller");
        if frozen_since.len() != mem.capacity() {
            frozen_since = vec![None; mem.capacity()];
        }
        if let Some((h, attended, active)) = &prev {
            for i in 0..*active {
                let col = &h[i * mem.hidden()..(i + 1) * mem.hidden()];
                if Some(i) == *attended || rec.a_r_fired {
                    frozen_since[i] = None;
                    continue;
                }
                frozen_column_steps += 1;
                let same = col.iter().zip(mem.column(i)).all(|(a, b)| a.to_bits() == b.to_bits());
                if !same {
                    changed += 1;
                    frozen_since[i] = None;
                    continue;
                }
                let start = *frozen_since[i].get_or_insert(rec.t - config.dt);
                longest_frozen = longest_frozen.max(rec.t - start);
            }
        }
        prev = Some((mem.h.clone(), rec.i_star, mem.active()));
    });
    let name = kind.name();
    match result {
        Ok(_) => (
            Check::new(
                "hard_attention_one_hot",
                bad_one_hot == 0,
                format!("{name}: {bad_one_hot} of {steps} steps not one-hot over {} s", spec.duration),
            ),
            Check::new(
                "frozen_column_retention",
                changed == 0 && longest_frozen >= 10.0,
                format!(
                    "{name}: {changed} of {frozen_column_steps} unattended column-steps changed; longest frozen span {longest_frozen:.1} s"
                ),
            ),
        ),
        Err(e) => (
            Check::new("hard_attention_one_hot", false, format!("{name}: {e}")),
            Check::new("frozen_column_retention", false, format!("{name}: {e}")),
        ),
    }
}

/// All checks in a fixed order; `include_long` adds the full scenario runs.
pub fn run_all(include_long: bool) -> Vec<Check> {
    let mut checks = vec![
        skew_symmetry(1000, SEED),
        sigma_prime_finite_difference(200, SEED),
        rk4_exponential(),
        rk4_order(),
        write_equilibrium(),
        key_closed_form(),
        energy_conservation(),
    ];
    if include_long {
        let (one_hot, retention) = full_run_attention(ControllerKind::MannProposed);
        checks.push(one_hot);
        checks.push(retention);
        let (one_hot, retention) = full_run_attention(ControllerKind::MannHard);
        checks.push(one_hot);
        checks.push(retention);
    }
    checks
}
