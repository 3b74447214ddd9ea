//! Scenario descriptions and the built-in presets.
//!
//! Preset 0 is the reallocation case study; presets 1–6 are the tracking
//! scenarios. Every preset uses the proposed controller (representation
//! keys, reallocation during the growth phase only); use
//! [`ScenarioSpec::with_controller`] to switch variants.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dynamics::{ArmParams, JointReference, JumpEvent, JumpSchedule, MassTransform, ReferenceSignal};
use crate::linalg::Vec2;
use crate::memory::{AttentionConfig, AttentionMode, KeyDesign, MemoryParams, Reallocation};
use crate::neurocontroller::ControllerGains;
use crate::{Error, Result};

/// Hidden width of the memory-augmented controllers.
pub const MANN_HIDDEN: usize = 10;

/// Hidden width of the plain network with the same parameter budget as a
/// memory-augmented controller with `MANN_HIDDEN` units and 5 locations.
///
/// With input width 10 and output width 2 the network has `13·N + 2`
/// parameters (weights and biases). Adding `5·N` memory entries gives
/// `18·10 + 2 = 182`, and `13·14 + 2 = 184` is the closest plain width.
pub const EQUIVALENT_NN_HIDDEN: usize = 14;

pub const PRESET_IDS: [u32; 7] = [0, 1, 2, 3, 4, 5, 6];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControllerKind {
    /// Plain two-layer network, no memory.
    Nn,
    /// Soft attention over all locations.
    MannSoft,
    /// Hard attention over all locations, no reallocation.
    MannHard,
    /// Hard attention with reallocation and growth.
    MannProposed,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 4] = [
        ControllerKind::Nn,
        ControllerKind::MannSoft,
        ControllerKind::MannHard,
        ControllerKind::MannProposed,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ControllerKind::Nn => "nn",
            ControllerKind::MannSoft => "mann-soft",
            ControllerKind::MannHard => "mann-hard",
            ControllerKind::MannProposed => "mann-proposed",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn has_memory(&self) -> bool {
        *self != ControllerKind::Nn
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSpec {
    pub kind: ControllerKind,
    /// Hidden-layer width `N`.
    pub hidden: usize,
    pub key: KeyDesign,
    /// Only consulted by [`ControllerKind::MannProposed`].
    pub reallocation: Reallocation,
    /// Soft-attention sharpness.
    pub beta: f64,
}

impl Default for ControllerSpec {
    fn default() -> Self {
        Self {
            kind: ControllerKind::MannProposed,
            hidden: MANN_HIDDEN,
            key: KeyDesign::Representation,
            reallocation: Reallocation::InitialPhase,
            beta: 10.0,
        }
    }
}

impl ControllerSpec {
    /// Attention settings implied by the controller kind; `None` without memory.
    pub fn attention(&self) -> Option<AttentionConfig> {
        let (mode, reallocation) = match self.kind {
            ControllerKind::Nn => return None,
            ControllerKind::MannSoft => (AttentionMode::Soft, Reallocation::Off),
            ControllerKind::MannHard => (AttentionMode::Hard, Reallocation::Off),
            ControllerKind::MannProposed => (AttentionMode::Hard, self.reallocation),
        };
        Some(AttentionConfig {
            mode,
            key: self.key,
            reallocation,
            beta: self.beta,
        })
    }
}

/// How the mass changes of a scenario are generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum JumpPlan {
    Explicit {
        events: Vec<JumpEvent>,
    },
    /// `mᵢ² → mᵢ² + fraction·mᵢ²(0)` every `period` seconds, strictly before the end of the run.
    PeriodicSquaredIncrement {
        period: f64,
        fraction: f64,
    },
}

impl Default for JumpPlan {
    fn default() -> Self {
        JumpPlan::Explicit { events: Vec::new() }
    }
}

impl JumpPlan {
    pub fn schedule(&self, initial_masses: Vec2, duration: f64) -> JumpSchedule {
        match self {
            JumpPlan::Explicit { events } => JumpSchedule { events: events.clone() },
            JumpPlan::PeriodicSquaredIncrement { period, fraction } => {
                let delta = [
                    fraction * initial_masses[0] * initial_masses[0],
                    fraction * initial_masses[1] * initial_masses[1],
                ];
                let mut events = Vec::new();
                if *period > 0.0 {
                    let mut k = 1u32;
                    while (k as f64) * period < duration {
                        events.push(JumpEvent {
                            time: k as f64 * period,
                            transform: MassTransform::SquaredIncrement { delta },
                        });
                        k += 1;
                    }
                }
                JumpSchedule { events }
            }
        }
    }
}

/// Initial plant state; when absent the plant starts on the reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    pub x: Vec2,
    pub xdot: Vec2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub id: String,
    pub masses: Vec2,
    pub lengths: Vec2,
    pub reference: ReferenceSignal,
    pub jumps: JumpPlan,
    pub gains: ControllerGains,
    pub memory: MemoryParams,
    pub controller: ControllerSpec,
    /// Simulated time in seconds.
    pub duration: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialState>,
}

impl ScenarioSpec {
    /// Switches the controller variant, resetting the hidden width to the
    /// one used for that variant.
    pub fn with_controller(mut self, kind: ControllerKind) -> Self {
        self.controller.kind = kind;
        self.controller.hidden = match kind {
            ControllerKind::Nn => EQUIVALENT_NN_HIDDEN,
            _ => MANN_HIDDEN,
        };
        self
    }

    /// Shortens the run to `duration`, dropping explicit jumps at or after it.
    pub fn truncated(mut self, duration: f64) -> Self {
        self.duration = duration;
        if let JumpPlan::Explicit { events } = &mut self.jumps {
            events.retain(|e| e.time < duration);
        }
        self
    }

    pub fn arm(&self) -> Result<ArmParams> {
        ArmParams::new(self.masses, self.lengths)
    }

    pub fn jump_schedule(&self) -> JumpSchedule {
        self.jumps.schedule(self.masses, self.duration)
    }

    pub fn validate(&self) -> Result<()> {
        let arm = self.arm()?;
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::Invalid("duration must be positive".to_string()));
        }
        if let JumpPlan::PeriodicSquaredIncrement { period, .. } = self.jumps {
            if !(period > 0.0) {
                return Err(Error::Invalid("jump period must be positive".to_string()));
            }
        }
        let schedule = self.jump_schedule();
        schedule.validate(&arm)?;
        if let Some(last) = schedule.events.last() {
            if !(last.time < self.duration) || schedule.events[0].time < 0.0 {
                return Err(Error::Invalid(alloc::format!(
                    "jump times must lie in [0, {}), got {}",
                    self.duration,
                    last.time
                )));
            }
        }
        for r in &self.reference {
            let ok = match *r {
                JointReference::Constant { value } => value.is_finite(),
                JointReference::Sine { amplitude, omega } => amplitude.is_finite() && omega.is_finite(),
            };
            if !ok {
                return Err(Error::Invalid("reference parameters must be finite".to_string()));
            }
        }
        self.gains.validate()?;
        self.memory.validate()?;
        if self.controller.hidden == 0 {
            return Err(Error::Invalid("hidden width must be at least 1".to_string()));
        }
        if !(self.controller.beta >= 0.0) {
            return Err(Error::Invalid("beta must be non-negative".to_string()));
        }
        Ok(())
    }
}

fn scale(time: f64, factor: f64) -> JumpEvent {
    JumpEvent {
        time,
        transform: MassTransform::Scale { factor },
    }
}

/// The sixteen mass changes shared by scenarios 1, 2, 4, 5 and 6.
pub fn standard_jumps() -> Vec<JumpEvent> {
    let s = libm::sqrt;
    alloc::vec![
        scale(5.0, s(2.0)),
        scale(25.0, s(2.0)),
        scale(50.0, s(2.5)),
        scale(75.0, 0.63),
        scale(90.0, s(0.5)),
        scale(110.0, s(0.5)),
        scale(130.0, s(0.1)),
        scale(150.0, s(10.0)),
        scale(170.0, s(2.0)),
        scale(190.0, s(5.0)),
        scale(210.0, s(0.2)),
        scale(230.0, s(0.5)),
        scale(250.0, s(0.1)),
        scale(270.0, s(10.0)),
        scale(290.0, s(2.0)),
        scale(310.0, s(5.0)),
    ]
}

const SINE: JointReference = JointReference::Sine {
    amplitude: 1.0,
    omega: 0.5,
};

const fn constant(value: f64) -> JointReference {
    JointReference::Constant { value }
}

fn base(id: &str) -> ScenarioSpec {
    ScenarioSpec {
        id: id.to_string(),
        masses: [0.8, 2.3],
        lengths: [1.0, 1.0],
        reference: [SINE, constant(0.0)],
        jumps: JumpPlan::Explicit {
            events: standard_jumps(),
        },
        gains: ControllerGains::default(),
        memory: MemoryParams::default(),
        controller: ControllerSpec::default(),
        duration: 330.0,
        seed: 0,
        initial: None,
    }
}

/// Built-in scenario by number, `None` outside `0..=6`.
pub fn preset(id: u32) -> Option<ScenarioSpec> {
    let mut spec = base(&alloc::format!("{id}"));
    match id {
        0 => {
            spec.lengths = [1.0, 2.0];
            spec.jumps = JumpPlan::Explicit {
                events: alloc::vec![
                    scale(10.0, 2.0),
                    scale(20.0, libm::sqrt(2.0)),
                    scale(40.0, 1.0 / libm::sqrt(2.0)),
                ],
            };
            spec.duration = 60.0;
        }
        1 => {}
        2 => spec.reference[1] = constant(0.1),
        3 => {
            spec.jumps = JumpPlan::PeriodicSquaredIncrement {
                period: 20.0,
                fraction: 0.2,
            }
        }
        4 => spec.masses = [3.0, 2.0],
        5 => {
            spec.lengths = [1.0, 2.0];
            spec.reference = [constant(0.0), SINE];
        }
        6 => {
            spec.lengths = [1.0, 2.0];
            spec.reference = [constant(0.0), constant(0.1)];
            spec.memory.theta = 0.25;
        }
        _ => return None,
    }
    Some(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for id in PRESET_IDS {
            let spec = preset(id).unwrap();
            spec.validate().unwrap();
            for kind in ControllerKind::ALL {
                spec.clone().with_controller(kind).validate().unwrap();
            }
        }
        assert!(preset(7).is_none());
    }

    #[test]
    fn scenario_one_schedule() {
        let spec = preset(1).unwrap();
        let events = spec.jump_schedule().events;
        assert_eq!(events.len(), 16);
        let times: Vec<f64> = events.iter().map(|e| e.time).collect();
        assert_eq!(
            times,
            [
                5.0, 25.0, 50.0, 75.0, 90.0, 110.0, 130.0, 150.0, 170.0, 190.0, 210.0, 230.0, 250.0, 270.0, 290.0,
                310.0
            ]
        );
        let squared: Vec<f64> = events
            .iter()
            .map(|e| match e.transform {
                MassTransform::Scale { factor } => factor * factor,
                _ => panic!("scale expected"),
            })
            .collect();
        let expect = [
            2.0,
            2.0,
            2.5,
            0.63 * 0.63,
            0.5,
            0.5,
            0.1,
            10.0,
            2.0,
            5.0,
            0.2,
            0.5,
            0.1,
            10.0,
            2.0,
            5.0,
        ];
        for (a, b) in squared.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn scenario_three_increments_every_twenty_seconds() {
        let spec = preset(3).unwrap();
        let events = spec.jump_schedule().events;
        assert_eq!(events.len(), 16);
        assert_eq!(events[0].time, 20.0);
        assert_eq!(events.last().unwrap().time, 320.0);
        match events[0].transform {
            MassTransform::SquaredIncrement { delta } => {
                assert!((delta[0] - 0.2 * 0.64).abs() < 1e-15);
                assert!((delta[1] - 0.2 * 2.3 * 2.3).abs() < 1e-15);
            }
            _ => panic!("increment expected"),
        }
    }

    #[test]
    fn preset_details() {
        let p0 = preset(0).unwrap();
        assert_eq!(p0.lengths, [1.0, 2.0]);
        assert_eq!(p0.duration, 60.0);
        assert_eq!(preset(2).unwrap().reference[1], constant(0.1));
        assert_eq!(preset(4).unwrap().masses, [3.0, 2.0]);
        let p6 = preset(6).unwrap();
        assert_eq!(p6.memory.theta, 0.25);
        assert_eq!(p6.reference, [constant(0.0), constant(0.1)]);
        let p1 = preset(1).unwrap();
        assert_eq!(
            p1.memory,
            MemoryParams {
                capacity: 5,
                c_w: 0.75,
                c_k: 1.0,
                theta: 0.2
            }
        );
        assert_eq!(p1.gains.kv, 20.0);
        assert_eq!(p1.gains.kv_robust, 10.0);
        assert_eq!(p1.gains.kappa, 0.0);
        assert_eq!((p1.gains.cw, p1.gains.cv), (10.0, 10.0));
    }

    #[test]
    fn controller_variants() {
        let nn = preset(1).unwrap().with_controller(ControllerKind::Nn);
        assert_eq!(nn.controller.hidden, 14);
        assert!(nn.controller.attention().is_none());
        let soft = preset(1).unwrap().with_controller(ControllerKind::MannSoft);
        assert_eq!(soft.controller.attention().unwrap().mode, AttentionMode::Soft);
        assert_eq!(soft.controller.hidden, 10);
        let hard = preset(1).unwrap().with_controller(ControllerKind::MannHard);
        assert_eq!(hard.controller.attention().unwrap().reallocation, Reallocation::Off);
        for kind in ControllerKind::ALL {
            assert_eq!(ControllerKind::from_name(kind.name()), Some(kind));
        }
    }

    #[test]
    fn equivalent_width_budget() {
        let params = |n: usize| 13 * n + 2;
        let mann = params(MANN_HIDDEN) + 5 * MANN_HIDDEN;
        let best = (1..40).min_by_key(|n| (params(*n) as i64 - mann as i64).abs()).unwrap();
        assert_eq!(best, EQUIVALENT_NN_HIDDEN);
    }

    #[test]
    fn validation_failures() {
        let mut s = preset(1).unwrap();
        s.duration = 300.0;
        assert!(s.validate().is_err());
        let mut s = preset(1).unwrap();
        s.masses = [0.0, 1.0];
        assert!(s.validate().is_err());
        let mut s = preset(1).unwrap();
        s.controller.hidden = 0;
        assert!(s.validate().is_err());
    }
}
