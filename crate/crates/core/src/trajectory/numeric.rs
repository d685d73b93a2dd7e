use crate::error::{Error, Result};
use crate::packet::{PhasePoint, PilotWave};

use super::{Breakpoint, HiddenVariable, Outcome, OutcomePair, Trajectory};

// Steps are halved at most this many times when they would leave the support.
const MAX_HALVINGS: u32 = 40;

/// Explicit Euler on the pointwise-sampled guidance field. Breakpoints are
/// recorded only where the sampled region changes.
fn run_numeric(
    lambda: HiddenVariable,
    wave: &PilotWave,
    dt: f64,
    t_end: f64,
    mut record: impl FnMut(Breakpoint),
) -> Result<((f64, f64), (f64, f64))> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid("dt", format!("must be positive, got {dt}")));
    }
    if !lambda.inside(wave.packet()) {
        return Err(Error::invalid(
            "lambda",
            format!(
                "({}, {}) lies outside the initial square",
                lambda.r_a, lambda.r_b
            ),
        ));
    }
    let mut t = 0.0;
    let (mut ra, mut rb) = (lambda.r_a, lambda.r_b);
    let mut region = wave.region(&PhasePoint::new(ra, rb, t));
    record(Breakpoint {
        t,
        r_a: ra,
        r_b: rb,
        region,
    });
    let mut v = wave.velocity(&PhasePoint::new(ra, rb, t))?;

    let mut step_index: u64 = 0;
    while t < t_end {
        let full = dt.min(t_end - t);
        let mut h = full;
        let mut halvings = 0;
        loop {
            let next = PhasePoint::new(ra + v.0 * h, rb + v.1 * h, t + h);
            if wave.equilibrium_density(&next) > 0.0 {
                ra = next.r_a;
                rb = next.r_b;
                break;
            }
            halvings += 1;
            if halvings > MAX_HALVINGS {
                return Err(Error::UndefinedVelocity {
                    r_a: next.r_a,
                    r_b: next.r_b,
                    t: next.t,
                });
            }
            h *= 0.5;
        }
        // recompute time from the step count on full steps to avoid drift
        if h == dt {
            step_index += 1;
            t = (step_index as f64 * dt).min(t_end);
        } else {
            t += h;
            step_index = (t / dt).floor() as u64;
        }
        let p = PhasePoint::new(ra, rb, t);
        v = wave.velocity(&p)?;
        let now = wave.region(&p);
        if now != region || t >= t_end {
            region = now;
            record(Breakpoint {
                t,
                r_a: ra,
                r_b: rb,
                region,
            });
        }
    }
    Ok(((ra, rb), v))
}

/// Fixed-step trajectory up to full branch separation; the outcome is the
/// sign of the final pointer positions.
pub fn evolve_numeric(lambda: HiddenVariable, wave: &PilotWave, dt: f64) -> Result<Trajectory> {
    let mut tr = evolve_numeric_until(lambda, wave, dt, wave.separation_time())?;
    let end = *tr.end();
    tr.outcome = Some(OutcomePair::new(
        Outcome::from_sign(end.r_a),
        Outcome::from_sign(end.r_b),
    ));
    Ok(tr)
}

pub fn evolve_numeric_until(
    lambda: HiddenVariable,
    wave: &PilotWave,
    dt: f64,
    t_end: f64,
) -> Result<Trajectory> {
    let mut points = Vec::new();
    let (_, v) = run_numeric(lambda, wave, dt, t_end, |bp| points.push(bp))?;
    Ok(Trajectory {
        points,
        final_velocity: v,
        outcome: None,
    })
}

/// Outcome only, without recording the path.
pub fn outcome_numeric(lambda: HiddenVariable, wave: &PilotWave, dt: f64) -> Result<OutcomePair> {
    let ((ra, rb), _) = run_numeric(lambda, wave, dt, wave.separation_time(), |_| {})?;
    Ok(OutcomePair::new(
        Outcome::from_sign(ra),
        Outcome::from_sign(rb),
    ))
}
