//! Deterministic evolution of the hidden pointer positions `λ = (r_A(0), r_B(0))`
//! to definite outcomes.
//!
//! [`evolve_exact`] exploits the piecewise-constant velocity field of square
//! packets and jumps from one region change to the next in closed form.
//! [`evolve_numeric`] is a plain fixed-step integrator of the sampled field and
//! exists only as an independent cross-check.

mod exact;
mod numeric;
mod single;

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

pub use exact::{evolve_exact, evolve_exact_until, EVENT_TOLERANCE};
pub use numeric::{evolve_numeric, evolve_numeric_until, outcome_numeric};
pub use single::{evolve_single_exact, single_spin_outcome, SpinBreakpoint, SpinTrajectory};

use crate::error::Result;
use crate::packet::{PilotWave, SquarePacket};
use crate::spin::Branch;

/// Initial pointer positions; the hidden variable of the pilot-wave model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HiddenVariable {
    pub r_a: f64,
    pub r_b: f64,
}

impl HiddenVariable {
    pub fn new(r_a: f64, r_b: f64) -> Self {
        HiddenVariable { r_a, r_b }
    }

    /// Membership of the half-open initial square.
    pub fn inside(&self, packet: &SquarePacket) -> bool {
        packet.contains(self.r_a) && packet.contains(self.r_b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub fn value(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    pub fn from_sign(x: f64) -> Outcome {
        if x >= 0.0 {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OutcomePair {
    pub a: Outcome,
    pub b: Outcome,
}

impl OutcomePair {
    pub fn new(a: Outcome, b: Outcome) -> Self {
        OutcomePair { a, b }
    }

    pub fn of_branch(branch: Branch) -> Self {
        let (sa, sb) = branch.signs();
        OutcomePair::new(Outcome::from_sign(sa), Outcome::from_sign(sb))
    }

    pub fn values(&self) -> (i8, i8) {
        (self.a.value(), self.b.value())
    }
}

/// A vertex of the piecewise-linear trajectory. `region` is the bitmask of
/// branches (bit `i` for [`Branch::ALL`]`[i]`) covering the point on the
/// segment that starts here.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Breakpoint {
    pub t: f64,
    pub r_a: f64,
    pub r_b: f64,
    pub region: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub points: Vec<Breakpoint>,
    /// Velocity on the segment following the last breakpoint.
    pub final_velocity: (f64, f64),
    /// Set once the run reached full branch separation.
    pub outcome: Option<OutcomePair>,
}

impl Trajectory {
    pub fn start(&self) -> &Breakpoint {
        &self.points[0]
    }

    pub fn end(&self) -> &Breakpoint {
        self.points
            .last()
            .expect("trajectory has at least one point")
    }

    /// Interpolated position; extrapolated with the final velocity past the
    /// last breakpoint and clamped to the start before `t = 0`.
    pub fn position_at(&self, t: f64) -> (f64, f64) {
        let first = self.start();
        if t <= first.t {
            return (first.r_a, first.r_b);
        }
        let idx = self.points.partition_point(|p| p.t <= t);
        if idx == self.points.len() {
            let last = self.end();
            let dt = t - last.t;
            return (
                last.r_a + self.final_velocity.0 * dt,
                last.r_b + self.final_velocity.1 * dt,
            );
        }
        let (p, q) = (&self.points[idx - 1], &self.points[idx]);
        let s = (t - p.t) / (q.t - p.t);
        (p.r_a + s * (q.r_a - p.r_a), p.r_b + s * (q.r_b - p.r_b))
    }

    /// CSV dump with columns `t,r_A,r_B,region_id`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,r_A,r_B,region_id")?;
        for p in &self.points {
            writeln!(out, "{},{},{},{}", p.t, p.r_a, p.r_b, p.region)?;
        }
        Ok(())
    }
}

/// Final outcome pair of `λ` under `wave`, from the exact integrator.
pub fn classify_outcome(lambda: HiddenVariable, wave: &PilotWave) -> Result<OutcomePair> {
    exact::outcome_exact(lambda, wave)
}
