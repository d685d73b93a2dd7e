use crate::error::{Error, Result};
use crate::packet::PilotWave;
use crate::spin::Branch;

use super::{Breakpoint, HiddenVariable, OutcomePair, Trajectory};

/// Events closer than `EVENT_TOLERANCE · Δ / a` are coalesced.
pub const EVENT_TOLERANCE: f64 = 1e-12;

// Each event changes one branch membership and every branch can be entered
// and left at most a few times before separation.
const MAX_EVENTS: usize = 256;

/// Time until a point at relative offset `p`, moving with relative speed `u`,
/// leaves the interval `[−half, half)`.
pub(crate) fn exit_time(p: f64, u: f64, half: f64) -> f64 {
    if u > 0.0 {
        ((half - p) / u).max(0.0)
    } else if u < 0.0 {
        ((p + half) / -u).max(0.0)
    } else {
        f64::INFINITY
    }
}

/// Time window during which the offset lies inside `[−half, half)`.
pub(crate) fn inside_window(p: f64, u: f64, half: f64) -> (f64, f64) {
    if u > 0.0 {
        ((-half - p) / u, (half - p) / u)
    } else if u < 0.0 {
        ((half - p) / u, (-half - p) / u)
    } else if p >= -half && p < half {
        (f64::NEG_INFINITY, f64::INFINITY)
    } else {
        (f64::INFINITY, f64::NEG_INFINITY)
    }
}

pub(crate) struct ExactEnd {
    pub t: f64,
    pub mask: u8,
    pub velocity: (f64, f64),
}

/// A scheduled membership change. `key` orders events that coincide to
/// within tolerance: it is the first-order shift of the event time when the
/// start point is displaced to `λ + (η, η²)`, so ties are broken the way the
/// lower-inclusive edge convention would break them.
#[derive(Clone, Copy)]
struct Event {
    tau: f64,
    key: (f64, f64),
}

impl Event {
    const NEVER: Event = Event {
        tau: f64::INFINITY,
        key: (0.0, 0.0),
    };

    fn on_axis(tau: f64, u: f64, axis: usize) -> Event {
        let k = if u != 0.0 { -1.0 / u } else { 0.0 };
        Event {
            tau,
            key: if axis == 0 { (k, 0.0) } else { (0.0, k) },
        }
    }

    fn earlier(self, other: Event, tol: f64) -> bool {
        if (self.tau - other.tau).abs() <= tol {
            self.key < other.key
        } else {
            self.tau < other.tau
        }
    }
}

/// Event-driven core. Branch membership is tracked as a bitmask and flipped
/// at computed crossing times rather than re-derived from positions, so the
/// half-open boundary convention is applied once, at `t = 0`.
pub(crate) fn run_exact(
    lambda: HiddenVariable,
    wave: &PilotWave,
    t_end: f64,
    mut record: impl FnMut(Breakpoint),
) -> Result<ExactEnd> {
    let packet = wave.packet();
    if !lambda.inside(packet) {
        return Err(Error::invalid(
            "lambda",
            format!(
                "({}, {}) lies outside the initial square",
                lambda.r_a, lambda.r_b
            ),
        ));
    }
    if !(t_end >= 0.0) {
        return Err(Error::invalid("t_end", "must be nonnegative"));
    }
    let half = packet.half();
    let coupling = wave.coupling();
    let speed = [coupling.a_a, coupling.a_b];
    let tol = EVENT_TOLERANCE * packet.width / speed[0].max(speed[1]);
    let active = wave.active_mask();

    let mut t = 0.0;
    let mut r = [lambda.r_a, lambda.r_b];
    // Every branch covers the initial square at t = 0.
    let mut mask = active;
    record(Breakpoint {
        t,
        r_a: r[0],
        r_b: r[1],
        region: mask,
    });

    for _ in 0..MAX_EVENTS {
        let v = wave.mask_velocity(mask).ok_or(Error::UndefinedVelocity {
            r_a: r[0],
            r_b: r[1],
            t,
        })?;
        let v = [v.0, v.1];

        let mut events = [Event::NEVER; 4];
        for (k, branch) in Branch::ALL.iter().enumerate() {
            if active & (1 << k) == 0 {
                continue;
            }
            let (sa, sb) = branch.signs();
            let vk = [sa * speed[0], sb * speed[1]];
            let p = [r[0] - vk[0] * t, r[1] - vk[1] * t];
            let u = [v[0] - vk[0], v[1] - vk[1]];
            events[k] = if mask & (1 << k) != 0 {
                let ea = Event::on_axis(exit_time(p[0], u[0], half), u[0], 0);
                let eb = Event::on_axis(exit_time(p[1], u[1], half), u[1], 1);
                if ea.earlier(eb, tol) {
                    ea
                } else {
                    eb
                }
            } else {
                let (lo_a, hi_a) = inside_window(p[0], u[0], half);
                let (lo_b, hi_b) = inside_window(p[1], u[1], half);
                let ea = Event::on_axis(lo_a.max(0.0), u[0], 0);
                let eb = Event::on_axis(lo_b.max(0.0), u[1], 1);
                let start = if ea.earlier(eb, tol) { eb } else { ea };
                if hi_a.min(hi_b) - start.tau > tol {
                    start
                } else {
                    Event::NEVER
                }
            };
        }

        let first = (0..4).fold(None::<usize>, |best, k| match best {
            Some(b) if !events[k].earlier(events[b], tol) => Some(b),
            _ if events[k].tau.is_finite() => Some(k),
            _ => best,
        });
        let next = first.map_or(f64::INFINITY, |k| events[k].tau);
        let remaining = t_end - t;
        if next >= remaining {
            r[0] += v[0] * remaining;
            r[1] += v[1] * remaining;
            t = t_end;
            record(Breakpoint {
                t,
                r_a: r[0],
                r_b: r[1],
                region: mask,
            });
            return Ok(ExactEnd {
                t,
                mask,
                velocity: (v[0], v[1]),
            });
        }

        r[0] += v[0] * next;
        r[1] += v[1] * next;
        t += next;
        // Coinciding events are applied one at a time; the rest are
        // recomputed under the new velocity and may no longer happen.
        mask ^= 1 << first.expect("finite event");
        record(Breakpoint {
            t,
            r_a: r[0],
            r_b: r[1],
            region: mask,
        });
    }
    Err(Error::Stall {
        events: MAX_EVENTS,
        t,
    })
}

fn separated_outcome(end: &ExactEnd) -> Result<OutcomePair> {
    if end.mask.count_ones() != 1 {
        return Err(Error::Stall {
            events: 0,
            t: end.t,
        });
    }
    Ok(OutcomePair::of_branch(Branch::from_index(
        end.mask.trailing_zeros() as usize,
    )))
}

pub(crate) fn outcome_exact(lambda: HiddenVariable, wave: &PilotWave) -> Result<OutcomePair> {
    let end = run_exact(lambda, wave, wave.separation_time(), |_| {})?;
    separated_outcome(&end)
}

/// Exact trajectory up to full branch separation.
pub fn evolve_exact(lambda: HiddenVariable, wave: &PilotWave) -> Result<Trajectory> {
    let mut tr = evolve_exact_until(lambda, wave, wave.separation_time())?;
    let last = *tr.end();
    let mask = last.region;
    if mask.count_ones() != 1 {
        return Err(Error::Stall {
            events: tr.points.len(),
            t: last.t,
        });
    }
    tr.outcome = Some(OutcomePair::of_branch(Branch::from_index(
        mask.trailing_zeros() as usize,
    )));
    Ok(tr)
}

/// Exact trajectory on `[0, t_end]`; the outcome is left unset.
pub fn evolve_exact_until(
    lambda: HiddenVariable,
    wave: &PilotWave,
    t_end: f64,
) -> Result<Trajectory> {
    let mut points = Vec::new();
    let merge = EVENT_TOLERANCE * wave.separation_time();
    let end = run_exact(lambda, wave, t_end, |bp| {
        // zero-length segments come from coalesced or simultaneous events
        match points.last_mut() {
            Some(Breakpoint { t, region, .. }) if (bp.t - *t).abs() <= merge => *region = bp.region,
            _ => points.push(bp),
        }
    })?;
    Ok(Trajectory {
        points,
        final_velocity: end.velocity,
        outcome: None,
    })
}
