//! Two-link planar arm: inertia, Coriolis/centripetal and gravity terms, the
//! forward dynamics under an applied torque, abrupt mass changes and the
//! analytic joint references.
//!
//! Friction is not modelled; the nonlinear term is gravity only.

use serde::{Deserialize, Serialize};

use crate::linalg::{self, Mat2, Vec2};
use crate::{Error, Result};

pub const GRAVITY: f64 = 9.8;

/// Condition-number ceiling for the inertia matrix before a solve is refused.
pub const MAX_MASS_CONDITION: f64 = 1e12;

/// Physical constants of the arm. The lumped coefficients are always derived
/// from the masses and lengths, never set independently.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmParams {
    pub m1: f64,
    pub m2: f64,
    pub l1: f64,
    pub l2: f64,
    pub phi: f64,
    pub rho: f64,
    pub psi: f64,
    pub gamma: f64,
}

impl ArmParams {
    pub fn new(masses: Vec2, lengths: Vec2) -> Result<Self> {
        let [m1, m2] = masses;
        let [l1, l2] = lengths;
        if !(m1 > 0.0 && m2 > 0.0) {
            return Err(Error::NonPositiveMass { m1, m2 });
        }
        if !(l1 > 0.0 && l2 > 0.0 && l1.is_finite() && l2.is_finite()) {
            return Err(Error::Invalid(alloc::format!(
                "link lengths must be positive, got ({l1}, {l2})"
            )));
        }
        Ok(Self {
            m1,
            m2,
            l1,
            l2,
            phi: (m1 + m2) * l1 * l1,
            rho: m2 * l2 * l2,
            psi: m2 * l1 * l2,
            gamma: GRAVITY / l1,
        })
    }

    pub fn masses(&self) -> Vec2 {
        [self.m1, self.m2]
    }

    pub fn lengths(&self) -> Vec2 {
        [self.l1, self.l2]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlantState {
    pub x: Vec2,
    pub xdot: Vec2,
}

impl PlantState {
    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.xdot).all(|v| v.is_finite())
    }

    /// `‖x‖ + ‖ẋ‖`, the quantity checked against the divergence bound.
    pub fn magnitude(&self) -> f64 {
        linalg::norm2(&self.x) + linalg::norm2(&self.xdot)
    }
}

pub fn mass_matrix(p: &ArmParams, x: &Vec2) -> Mat2 {
    let c2 = libm::cos(x[1]);
    let off = p.rho + p.psi * c2;
    [[p.phi + p.rho + 2.0 * p.psi * c2, off], [off, p.rho]]
}

pub fn coriolis_matrix(p: &ArmParams, x: &Vec2, xdot: &Vec2) -> Mat2 {
    let s2 = libm::sin(x[1]);
    [
        [-p.psi * xdot[1] * s2, -p.psi * (xdot[0] + xdot[1]) * s2],
        [p.psi * xdot[0] * s2, 0.0],
    ]
}

pub fn gravity_vector(p: &ArmParams, x: &Vec2) -> Vec2 {
    let c12 = libm::cos(x[0] + x[1]);
    [
        p.phi * p.gamma * libm::cos(x[0]) + p.psi * p.gamma * c12,
        p.psi * p.gamma * c12,
    ]
}

/// Returns `(ẋ, ẍ)` with `ẍ = M⁻¹(τ − V_m·ẋ − N)`.
pub fn plant_derivative(p: &ArmParams, state: &PlantState, tau: &Vec2) -> Result<PlantState> {
    let m = mass_matrix(p, &state.x);
    let [lo, hi] = linalg::sym_eigenvalues(&m);
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition <= MAX_MASS_CONDITION) {
        return Err(Error::SingularMass { condition });
    }
    let vm = coriolis_matrix(p, &state.x, &state.xdot);
    let rhs = linalg::sub(
        &linalg::sub(tau, &linalg::mat_vec(&vm, &state.xdot)),
        &gravity_vector(p, &state.x),
    );
    let xddot = linalg::solve2(&m, &rhs).ok_or(Error::SingularMass { condition })?;
    Ok(PlantState {
        x: state.xdot,
        xdot: xddot,
    })
}

/// An abrupt change of the link masses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MassTransform {
    /// `mᵢ → factor·mᵢ` for both links.
    Scale { factor: f64 },
    /// `mᵢ² → mᵢ² + delta[i]`.
    SquaredIncrement { delta: Vec2 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpEvent {
    pub time: f64,
    pub transform: MassTransform,
}

/// Ordered list of mass changes.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct JumpSchedule {
    pub events: alloc::vec::Vec<JumpEvent>,
}

impl JumpSchedule {
    /// Checks ordering and that replaying the schedule from `initial` keeps
    /// every mass positive.
    pub fn validate(&self, initial: &ArmParams) -> Result<()> {
        let mut params = *initial;
        let mut last = f64::NEG_INFINITY;
        for event in &self.events {
            if !(event.time > last) || !event.time.is_finite() {
                return Err(Error::Invalid(alloc::format!(
                    "jump times must be strictly increasing (got {} after {})",
                    event.time,
                    last
                )));
            }
            last = event.time;
            params = apply_jump(&params, event)?;
        }
        Ok(())
    }
}

/// Applies one mass change; lengths and `gamma` are untouched and the lumped
/// coefficients are recomputed from the new masses.
pub fn apply_jump(p: &ArmParams, event: &JumpEvent) -> Result<ArmParams> {
    let [m1, m2] = match event.transform {
        MassTransform::Scale { factor } => [factor * p.m1, factor * p.m2],
        MassTransform::SquaredIncrement { delta } => {
            let sq = [p.m1 * p.m1 + delta[0], p.m2 * p.m2 + delta[1]];
            if sq[0] <= 0.0 || sq[1] <= 0.0 {
                return Err(Error::NonPositiveMass { m1: sq[0], m2: sq[1] });
            }
            [libm::sqrt(sq[0]), libm::sqrt(sq[1])]
        }
    };
    if !(m1 > 0.0 && m2 > 0.0) || !m1.is_finite() || !m2.is_finite() {
        return Err(Error::NonPositiveMass { m1, m2 });
    }
    ArmParams::new([m1, m2], p.lengths())
}

/// Analytic reference for one joint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum JointReference {
    Constant {
        value: f64,
    },
    /// `amplitude·sin(omega·t)`.
    Sine {
        amplitude: f64,
        omega: f64,
    },
}

impl JointReference {
    /// `(s, ṡ, s̈)` at time `t`.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        match *self {
            JointReference::Constant { value } => (value, 0.0, 0.0),
            JointReference::Sine { amplitude, omega } => {
                let (sn, cs) = (libm::sin(omega * t), libm::cos(omega * t));
                (amplitude * sn, amplitude * omega * cs, -amplitude * omega * omega * sn)
            }
        }
    }
}

/// Reference value and its first two derivatives for both joints.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReferenceSample {
    pub s: Vec2,
    pub sdot: Vec2,
    pub sddot: Vec2,
}

pub type ReferenceSignal = [JointReference; 2];

pub fn reference_eval(reference: &ReferenceSignal, t: f64) -> ReferenceSample {
    let (s1, d1, dd1) = reference[0].eval(t);
    let (s2, d2, dd2) = reference[1].eval(t);
    ReferenceSample {
        s: [s1, s2],
        sdot: [d1, d2],
        sddot: [dd1, dd2],
    }
}
