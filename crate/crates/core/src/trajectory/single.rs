//! One pointer coupled to a single spin: the two-branch analogue of the
//! pair engine, used to study settings that differ by `π`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::packet::{SingleSpinWave, SquarePacket};
use crate::spin::QubitState;

use super::exact::{exit_time, inside_window, EVENT_TOLERANCE};
use super::Outcome;

const MAX_EVENTS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinBreakpoint {
    pub t: f64,
    pub r: f64,
    /// Bit 0: up branch, bit 1: down branch.
    pub region: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinTrajectory {
    pub points: Vec<SpinBreakpoint>,
    pub final_velocity: f64,
    pub outcome: Outcome,
}

impl SpinTrajectory {
    pub fn position_at(&self, t: f64) -> f64 {
        let first = &self.points[0];
        if t <= first.t {
            return first.r;
        }
        let idx = self.points.partition_point(|p| p.t <= t);
        if idx == self.points.len() {
            let last = self.points.last().unwrap();
            return last.r + self.final_velocity * (t - last.t);
        }
        let (p, q) = (&self.points[idx - 1], &self.points[idx]);
        p.r + (t - p.t) / (q.t - p.t) * (q.r - p.r)
    }
}

fn mask_velocity(wave: &SingleSpinWave, mask: u8) -> Option<f64> {
    let w = wave.weights();
    let g = wave.coupling();
    match mask {
        0b01 => Some(g),
        0b10 => Some(-g),
        0b11 => Some(g * (w[0] - w[1]) / (w[0] + w[1])),
        _ => None,
    }
}

/// Exact event-driven trajectory of the single-spin pointer up to branch
/// separation.
pub fn evolve_single_exact(r0: f64, wave: &SingleSpinWave) -> Result<SpinTrajectory> {
    let packet = wave.packet();
    if !packet.contains(r0) {
        return Err(Error::invalid(
            "r0",
            format!("{r0} lies outside the initial packet"),
        ));
    }
    let half = packet.half();
    let g = wave.coupling();
    let tol = EVENT_TOLERANCE * packet.width / g;
    let t_end = wave.separation_time();
    let active: u8 = (0..2)
        .filter(|&k| wave.weights()[k] > 0.0)
        .fold(0, |m, k| m | (1 << k));

    let mut t = 0.0;
    let mut r = r0;
    let mut mask = active;
    let mut points = vec![SpinBreakpoint { t, r, region: mask }];

    for _ in 0..MAX_EVENTS {
        let v = mask_velocity(wave, mask).ok_or(Error::UndefinedVelocity {
            r_a: r,
            r_b: f64::NAN,
            t,
        })?;
        let mut taus = [f64::INFINITY; 2];
        for (k, tau) in taus.iter_mut().enumerate() {
            if active & (1 << k) == 0 {
                continue;
            }
            let vk = SingleSpinWave::branch_sign(k) * g;
            let p = r - vk * t;
            let u = v - vk;
            *tau = if mask & (1 << k) != 0 {
                exit_time(p, u, half)
            } else {
                let (lo, hi) = inside_window(p, u, half);
                let start = lo.max(0.0);
                if hi - start > tol {
                    start
                } else {
                    f64::INFINITY
                }
            };
        }
        let next = taus[0].min(taus[1]);
        let remaining = t_end - t;
        if next >= remaining {
            r += v * remaining;
            t = t_end;
            points.push(SpinBreakpoint { t, r, region: mask });
            if mask.count_ones() != 1 {
                return Err(Error::Stall {
                    events: points.len(),
                    t,
                });
            }
            return Ok(SpinTrajectory {
                points,
                final_velocity: v,
                outcome: Outcome::from_sign(r),
            });
        }
        r += v * next;
        t += next;
        for (k, tau) in taus.iter().enumerate() {
            if *tau <= next + tol {
                mask ^= 1 << k;
            }
        }
        match points.last_mut() {
            Some(last) if last.t == t => last.region = mask,
            _ => points.push(SpinBreakpoint { t, r, region: mask }),
        }
    }
    Err(Error::Stall {
        events: MAX_EVENTS,
        t,
    })
}

/// Sign of the pointer position at large times.
pub fn single_spin_outcome(
    r0: f64,
    state: &QubitState,
    theta: f64,
    coupling: f64,
    packet: SquarePacket,
) -> Result<Outcome> {
    let wave = SingleSpinWave::new(state, theta, coupling, packet)?;
    Ok(evolve_single_exact(r0, &wave)?.outcome)
}
