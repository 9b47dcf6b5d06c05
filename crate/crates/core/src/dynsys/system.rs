use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, L2cdsError, Result};
use crate::rng::Rng;

/// One state vector of a simulated system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct State(pub Vec<f64>);

impl State {
    pub fn new(values: Vec<f64>) -> Self {
        State(values)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl From<Vec<f64>> for State {
    fn from(v: Vec<f64>) -> Self {
        State(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    /// Inverted pendulum whose PD controller tracks a periodic target.
    /// State `(cos φ, sin φ, θ, θ̇)`.
    PendulumPd,
    /// Inverted two-link arm with per-joint PD tracking of periodic targets.
    /// State `(cos φ, sin φ, θ₁, θ₂, θ̇₁, θ̇₂)`.
    TwoLinkPd,
    /// Particles contracting towards a point from a wedge left of the y axis.
    WedgeLeft,
    /// Exact mirror image (x ↦ -x) of [`SystemKind::WedgeLeft`].
    WedgeRight,
}

impl SystemKind {
    pub const ALL: [SystemKind; 4] = [
        SystemKind::PendulumPd,
        SystemKind::TwoLinkPd,
        SystemKind::WedgeLeft,
        SystemKind::WedgeRight,
    ];

    pub fn state_dim(self) -> usize {
        match self {
            SystemKind::PendulumPd => 4,
            SystemKind::TwoLinkPd => 6,
            SystemKind::WedgeLeft | SystemKind::WedgeRight => 2,
        }
    }

    /// Number of actuated joints receiving torque noise.
    pub fn action_dim(self) -> usize {
        match self {
            SystemKind::PendulumPd => 1,
            SystemKind::TwoLinkPd => 2,
            SystemKind::WedgeLeft | SystemKind::WedgeRight => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SystemKind::PendulumPd => "pendulum",
            SystemKind::TwoLinkPd => "two-link",
            SystemKind::WedgeLeft => "wedge-left",
            SystemKind::WedgeRight => "wedge-right",
        }
    }

    /// Index of the joint angular velocity used as the "velocity" coordinate
    /// in perturbation analyses (the first joint for the arm).
    pub fn velocity_index(self) -> usize {
        match self {
            SystemKind::PendulumPd => 3,
            SystemKind::TwoLinkPd => 4,
            SystemKind::WedgeLeft | SystemKind::WedgeRight => 1,
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SystemKind {
    type Err = L2cdsError;

    fn from_str(s: &str) -> Result<Self> {
        SystemKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                L2cdsError::InvalidArgument(format!(
                    "unknown system '{s}' (expected one of: pendulum, two-link, wedge-left, wedge-right)"
                ))
            })
    }
}

/// A system kind plus its named physical parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub kind: SystemKind,
    pub params: BTreeMap<String, f64>,
}

const PENDULUM_DEFAULTS: &[(&str, f64)] = &[
    ("mass", 1.0),
    ("length", 1.0),
    ("gravity", 9.81),
    ("kp", 40.0),
    ("kd", 8.0),
    ("amplitude", 0.5),
    ("period", 2.0),
    ("dt", 0.01),
];

const TWO_LINK_DEFAULTS: &[(&str, f64)] = &[
    ("mass1", 1.0),
    ("mass2", 1.0),
    ("length1", 0.5),
    ("length2", 0.5),
    ("gravity", 9.81),
    ("kp", 50.0),
    ("kd", 5.0),
    ("amplitude1", 0.4),
    ("amplitude2", 0.3),
    ("phase_offset", 1.0),
    ("period", 2.0),
    ("dt", 0.01),
];

const WEDGE_DEFAULTS: &[(&str, f64)] = &[
    ("rate", 0.1),
    ("swirl_deg", 0.0),
    ("center_x", 0.0),
    ("center_y", 0.0),
    ("wedge_direction_deg", 180.0),
    ("wedge_width_deg", 60.0),
    ("radius_min", 0.2),
    ("radius_max", 1.0),
    ("dt", 1.0),
];

impl SystemSpec {
    /// The default parameterisation of `kind`.
    pub fn new(kind: SystemKind) -> Self {
        let defaults = match kind {
            SystemKind::PendulumPd => PENDULUM_DEFAULTS,
            SystemKind::TwoLinkPd => TWO_LINK_DEFAULTS,
            SystemKind::WedgeLeft | SystemKind::WedgeRight => WEDGE_DEFAULTS,
        };
        SystemSpec {
            kind,
            params: defaults.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
        }
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn state_dim(&self) -> usize {
        self.kind.state_dim()
    }

    pub fn param(&self, name: &str) -> Result<f64> {
        self.params.get(name).copied().ok_or_else(|| {
            L2cdsError::InvalidArgument(format!("system {} is missing parameter '{name}'", self.kind))
        })
    }

    pub fn dt(&self) -> Result<f64> {
        self.param("dt")
    }

    /// Number of integration steps in one drive period, for periodic systems.
    pub fn period_steps(&self) -> Option<f64> {
        match self.kind {
            SystemKind::PendulumPd | SystemKind::TwoLinkPd => {
                Some(self.params.get("period")? / self.params.get("dt")?)
            }
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let required = match self.kind {
            SystemKind::PendulumPd => PENDULUM_DEFAULTS,
            SystemKind::TwoLinkPd => TWO_LINK_DEFAULTS,
            SystemKind::WedgeLeft | SystemKind::WedgeRight => WEDGE_DEFAULTS,
        };
        for (name, _) in required {
            let v = self.param(name)?;
            if !v.is_finite() {
                return Err(L2cdsError::InvalidArgument(format!("parameter '{name}' is not finite")));
            }
        }
        if self.dt()? <= 0.0 {
            return Err(L2cdsError::InvalidArgument("timestep must be positive".into()));
        }
        if matches!(self.kind, SystemKind::PendulumPd | SystemKind::TwoLinkPd) && self.param("period")? <= 0.0 {
            return Err(L2cdsError::InvalidArgument("drive period must be positive".into()));
        }
        if matches!(self.kind, SystemKind::WedgeLeft | SystemKind::WedgeRight) {
            let (lo, hi) = (self.param("radius_min")?, self.param("radius_max")?);
            if lo < 0.0 || hi <= lo {
                return Err(L2cdsError::InvalidArgument("wedge radii must satisfy 0 <= min < max".into()));
            }
        }
        Ok(())
    }

    /// Deterministic reference state trajectories reset to.
    pub fn reference_state(&self) -> State {
        match self.kind {
            SystemKind::PendulumPd => State(vec![1.0, 0.0, 0.0, 0.0]),
            SystemKind::TwoLinkPd => State(vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
            SystemKind::WedgeLeft | SystemKind::WedgeRight => {
                let dir = self.params["wedge_direction_deg"].to_radians();
                let r = 0.5 * (self.params["radius_min"] + self.params["radius_max"]);
                let s = State(vec![r * dir.cos(), r * dir.sin()]);
                self.side_adjust(s)
            }
        }
    }

    /// Draws a reset state. Periodic systems perturb the joint angles and
    /// velocities of the reference state with N(0, `reset_noise`²); wedge
    /// systems ignore `reset_noise` and sample their annular wedge uniformly
    /// by area.
    pub fn sample_reset(&self, reset_noise: f64, rng: &mut Rng) -> State {
        let mut s = self.reference_state();
        match self.kind {
            SystemKind::PendulumPd | SystemKind::TwoLinkPd => {
                for v in &mut s.0[2..] {
                    *v += reset_noise * rng.gaussian();
                }
                s
            }
            SystemKind::WedgeLeft | SystemKind::WedgeRight => {
                let dir = self.params["wedge_direction_deg"].to_radians();
                let half = 0.5 * self.params["wedge_width_deg"].to_radians();
                let (r0, r1) = (self.params["radius_min"], self.params["radius_max"]);
                let angle = dir - half + 2.0 * half * rng.uniform();
                let r = (r0 * r0 + rng.uniform() * (r1 * r1 - r0 * r0)).sqrt();
                self.side_adjust(State(vec![r * angle.cos(), r * angle.sin()]))
            }
        }
    }

    fn side_adjust(&self, s: State) -> State {
        if self.kind == SystemKind::WedgeRight {
            mirror(&s)
        } else {
            s
        }
    }

    /// One timestep of the autonomous dynamics.
    pub fn step(&self, s: &State) -> Result<State> {
        self.step_with_torque_noise(s, &[])
    }

    /// One timestep with `torque_noise` added to the controller output of each
    /// actuated joint (missing entries count as zero).
    pub fn step_with_torque_noise(&self, s: &State, torque_noise: &[f64]) -> Result<State> {
        check_dim("system state", self.state_dim(), s.dim())?;
        if !s.is_finite() {
            return Err(L2cdsError::InvalidArgument("state contains non-finite entries".into()));
        }
        let noise = |i: usize| torque_noise.get(i).copied().unwrap_or(0.0);
        let next = match self.kind {
            SystemKind::PendulumPd => self.step_pendulum(&s.0, noise(0))?,
            SystemKind::TwoLinkPd => self.step_two_link(&s.0, [noise(0), noise(1)])?,
            SystemKind::WedgeLeft => self.step_wedge(&s.0, 1.0)?,
            SystemKind::WedgeRight => self.step_wedge(&s.0, -1.0)?,
        };
        let next = State(next);
        if !next.is_finite() {
            return Err(L2cdsError::NumericalBlowup(format!("{} produced a non-finite state", self.kind)));
        }
        Ok(next)
    }

    fn step_pendulum(&self, s: &[f64], torque_noise: f64) -> Result<Vec<f64>> {
        let p = |k| self.param(k);
        let (m, l, g) = (p("mass")?, p("length")?, p("gravity")?);
        let (kp, kd, amp) = (p("kp")?, p("kd")?, p("amplitude")?);
        let (period, dt) = (p("period")?, p("dt")?);
        let omega = 2.0 * PI / period;

        let phase = s[1].atan2(s[0]);
        let (theta, theta_dot) = (s[2], s[3]);
        let target = amp * phase.sin();
        let target_rate = amp * omega * phase.cos();
        let torque = kp * (target - theta) + kd * (target_rate - theta_dot) + torque_noise;
        // Upright equilibrium: gravity pushes away from θ = 0.
        let accel = (torque + m * g * l * theta.sin()) / (m * l * l);

        let theta_dot_next = theta_dot + dt * accel;
        let theta_next = theta + dt * theta_dot_next;
        let phase_next = phase + omega * dt;
        Ok(vec![phase_next.cos(), phase_next.sin(), theta_next, theta_dot_next])
    }

    fn step_two_link(&self, s: &[f64], torque_noise: [f64; 2]) -> Result<Vec<f64>> {
        let p = |k| self.param(k);
        let (m1, m2, l1, l2, g) = (p("mass1")?, p("mass2")?, p("length1")?, p("length2")?, p("gravity")?);
        let (kp, kd) = (p("kp")?, p("kd")?);
        let (a1, a2, offset) = (p("amplitude1")?, p("amplitude2")?, p("phase_offset")?);
        let (period, dt) = (p("period")?, p("dt")?);
        let omega = 2.0 * PI / period;

        let phase = s[1].atan2(s[0]);
        let (q1, q2, qd1, qd2) = (s[2], s[3], s[4], s[5]);

        let targets = [a1 * phase.sin(), a2 * (phase + offset).sin()];
        let target_rates = [a1 * omega * phase.cos(), a2 * omega * (phase + offset).cos()];
        let tau = [
            kp * (targets[0] - q1) + kd * (target_rates[0] - qd1) + torque_noise[0],
            kp * (targets[1] - q2) + kd * (target_rates[1] - qd2) + torque_noise[1],
        ];

        // Manipulator equation M(q) q̈ + c(q, q̇) + G(q) = τ, angles from the
        // upward vertical, second joint relative to the first.
        let c2 = q2.cos();
        let m11 = m1 * l1 * l1 + m2 * (l1 * l1 + 2.0 * l1 * l2 * c2 + l2 * l2);
        let m12 = m2 * (l1 * l2 * c2 + l2 * l2);
        let m22 = m2 * l2 * l2;
        let h = m2 * l1 * l2 * q2.sin();
        let coriolis = [-h * (2.0 * qd1 * qd2 + qd2 * qd2), h * qd1 * qd1];
        let s12 = (q1 + q2).sin();
        let gravity = [
            -((m1 + m2) * g * l1 * q1.sin() + m2 * g * l2 * s12),
            -(m2 * g * l2 * s12),
        ];
        let rhs = [
            tau[0] - coriolis[0] - gravity[0],
            tau[1] - coriolis[1] - gravity[1],
        ];
        let det = m11 * m22 - m12 * m12;
        if det.abs() < 1e-12 {
            return Err(L2cdsError::NumericalBlowup("singular two-link mass matrix".into()));
        }
        let qdd1 = (m22 * rhs[0] - m12 * rhs[1]) / det;
        let qdd2 = (-m12 * rhs[0] + m11 * rhs[1]) / det;

        let qd1n = qd1 + dt * qdd1;
        let qd2n = qd2 + dt * qdd2;
        let q1n = q1 + dt * qd1n;
        let q2n = q2 + dt * qd2n;
        let phase_next = phase + omega * dt;
        Ok(vec![phase_next.cos(), phase_next.sin(), q1n, q2n, qd1n, qd2n])
    }

    fn step_wedge(&self, s: &[f64], side: f64) -> Result<Vec<f64>> {
        let rate = self.param("rate")?;
        let cx = side * self.param("center_x")?;
        let cy = self.param("center_y")?;
        let swirl = self.param("swirl_deg")?.to_radians();
        if swirl == 0.0 {
            return Ok(vec![s[0] + rate * (cx - s[0]), s[1] + rate * (cy - s[1])]);
        }
        // Contract, then rotate about the centre; the right wedge turns the
        // other way so that it stays the exact mirror image.
        let dx = (1.0 - rate) * (s[0] - cx);
        let dy = (1.0 - rate) * (s[1] - cy);
        let (sin, cos) = swirl.sin_cos();
        Ok(vec![cx + (cos * dx - side * sin * dy), cy + (side * sin * dx + cos * dy)])
    }
}

/// Mirror across the y axis: negates the first coordinate.
pub fn mirror(s: &State) -> State {
    let mut v = s.0.clone();
    if let Some(x) = v.first_mut() {
        *x = -*x;
    }
    State(v)
}

/// The standalone form of [`SystemSpec::step`].
pub fn step(system: &SystemSpec, s: &State) -> Result<State> {
    system.step(s)
}
