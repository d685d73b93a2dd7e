//! WebAssembly bindings for the browser demo in `www/`.
//!
//! All three entry points use a unit-width packet and the singlet state.
//! Angles arrive in degrees.

use subquantum::ensemble::Method;
use subquantum::nonlocality::{joint_transitions, Angles, Setup, Shift, Wing};
use subquantum::packet::Coupling;
use subquantum::trajectory::{classify_outcome, evolve_exact, HiddenVariable, Outcome};
use wasm_bindgen::prelude::*;

/// Largest grid the page may request, per axis.
pub const MAX_RESOLUTION: u32 = 600;

fn setup(a_a: f64, a_b: f64) -> Result<Setup, String> {
    Coupling::new(a_a, a_b)
        .map(Setup::singlet)
        .map_err(|e| e.to_string())
}

/// Outcome codes on a `resolution × resolution` grid of initial
/// configurations, row-major from the lowest `r_B`: 0 = (+,+), 1 = (+,−),
/// 2 = (−,+), 3 = (−,−).
pub fn outcome_codes(
    theta_a: f64,
    theta_b: f64,
    a_a: f64,
    a_b: f64,
    resolution: u32,
) -> Result<Vec<u8>, String> {
    if resolution == 0 || resolution > MAX_RESOLUTION {
        return Err(format!("resolution must be 1 to {MAX_RESOLUTION}"));
    }
    let s = setup(a_a, a_b)?;
    let wave = s
        .wave(Angles::new(theta_a.to_radians(), theta_b.to_radians()))
        .map_err(|e| e.to_string())?;
    let k = resolution as usize;
    let h = s.packet.half();
    let cell = s.packet.width / k as f64;
    let mut out = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            let l = HiddenVariable::new(-h + (j as f64 + 0.5) * cell, -h + (i as f64 + 0.5) * cell);
            let o = classify_outcome(l, &wave).map_err(|e| e.to_string())?;
            out.push(2 * u8::from(o.a == Outcome::Minus) + u8::from(o.b == Outcome::Minus));
        }
    }
    Ok(out)
}

/// Breakpoints `[t, r_A, r_B, t, r_A, r_B, …]` up to full separation,
/// followed by one extrapolated point at twice the separation time.
pub fn trajectory_points(
    theta_a: f64,
    theta_b: f64,
    a_a: f64,
    a_b: f64,
    r_a: f64,
    r_b: f64,
) -> Result<Vec<f64>, String> {
    let s = setup(a_a, a_b)?;
    let wave = s
        .wave(Angles::new(theta_a.to_radians(), theta_b.to_radians()))
        .map_err(|e| e.to_string())?;
    let tr = evolve_exact(HiddenVariable::new(r_a, r_b), &wave).map_err(|e| e.to_string())?;
    let mut out: Vec<f64> = tr.points.iter().flat_map(|p| [p.t, p.r_a, p.r_b]).collect();
    let t = 2.0 * wave.separation_time();
    let (x, y) = tr.position_at(t);
    out.extend([t, x, y]);
    Ok(out)
}

/// `[δ, α(0,0,δ), β̃(0,0,δ), …]` for `points` values of `δ` on `[0, π]`,
/// each from an `m × m` grid.
pub fn alpha_curve_values(a_a: f64, a_b: f64, points: u32, m: u32) -> Result<Vec<f64>, String> {
    if !(2..=361).contains(&points) {
        return Err("points must be 2 to 361".into());
    }
    if m == 0 || m > MAX_RESOLUTION {
        return Err(format!("m must be 1 to {MAX_RESOLUTION}"));
    }
    let s = setup(a_a, a_b)?;
    let eq = s.equilibrium();
    let mut out = Vec::with_capacity(3 * points as usize);
    for i in 0..points {
        let delta = std::f64::consts::PI * f64::from(i) / f64::from(points - 1);
        let j = joint_transitions(
            &s,
            Shift::at_b(0.0, 0.0, delta),
            &eq,
            Method::Grid { m: m as usize },
        )
        .map_err(|e| e.to_string())?;
        out.extend([
            delta,
            j.report(Wing::A).alpha.value,
            j.report(Wing::B).alpha.value,
        ]);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn outcome_map(
    theta_a: f64,
    theta_b: f64,
    a_a: f64,
    a_b: f64,
    resolution: u32,
) -> Result<Vec<u8>, JsValue> {
    outcome_codes(theta_a, theta_b, a_a, a_b, resolution).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn trajectory(
    theta_a: f64,
    theta_b: f64,
    a_a: f64,
    a_b: f64,
    r_a: f64,
    r_b: f64,
) -> Result<Vec<f64>, JsValue> {
    trajectory_points(theta_a, theta_b, a_a, a_b, r_a, r_b).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn alpha_curve(a_a: f64, a_b: f64, points: u32, m: u32) -> Result<Vec<f64>, JsValue> {
    alpha_curve_values(a_a, a_b, points, m).map_err(|e| JsValue::from_str(&e))
}
