use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::ensemble::{Estimate, Method};
use crate::error::{Error, Result};
use crate::spin::{PairState, PerturbationParams};

use super::bounds::{evaluate_bound, BoundCheck, BoundInputs};
use super::{joint_transitions, Setup, Shift, Wing};

/// Mean of the bound-5 right-hand side `¼(1 − cos δ)` over `δ ∈ [lo, hi]`,
/// read as a lower bound on nonlocal information in bits per pair.
pub fn nonlocal_bits(lo: f64, hi: f64) -> Result<f64> {
    if !(lo.is_finite() && hi.is_finite()) || hi < lo {
        return Err(Error::invalid(
            "bits.range",
            format!("need finite lo ≤ hi, got ({lo}, {hi})"),
        ));
    }
    let mean_cos = if hi - lo < 1e-12 {
        (0.5 * (lo + hi)).cos()
    } else {
        (hi.sin() - lo.sin()) / (hi - lo)
    };
    Ok(0.25 * (1.0 - mean_cos))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub delta: f64,
    /// `α(0, 0, δ)`.
    pub alpha: Estimate,
    /// `β̃(0, 0, δ)`.
    pub beta_tilde: Estimate,
    pub bound: BoundCheck,
}

/// `α(0,0,δ)` and `β̃(0,0,δ)` over a grid of `δ`, each row checked against
/// bound `bound_id` at `θ_A = θ_B = 0`.
pub fn sweep(setup: &Setup, deltas: &[f64], bound_id: u8, method: Method) -> Result<Vec<SweepRow>> {
    let eq = setup.equilibrium();
    deltas
        .iter()
        .map(|&delta| {
            let j = joint_transitions(setup, Shift::at_b(0.0, 0.0, delta), &eq, method)?;
            let alpha = j.report(Wing::A).alpha;
            let beta_tilde = j.report(Wing::B).alpha;
            let beta = if bound_id == 2 || bound_id == 3 {
                let k = joint_transitions(setup, Shift::at_a(0.0, 0.0, -delta), &eq, method)?;
                Some(k.report(Wing::B).alpha)
            } else {
                None
            };
            let inputs = BoundInputs {
                alpha,
                beta_tilde: Some(beta_tilde),
                beta,
            };
            let bound = evaluate_bound(
                bound_id,
                0.0,
                0.0,
                delta,
                inputs,
                setup.coupling.is_symmetric(),
            )?;
            Ok(SweepRow {
                delta,
                alpha,
                beta_tilde,
                bound,
            })
        })
        .collect()
}

/// Least-squares `c0 + c1 x + c2 x²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFit {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    /// Root-mean-square residual.
    pub rms: f64,
}

impl QuadraticFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.c0 + x * (self.c1 + x * self.c2)
    }
}

pub fn fit_quadratic(xs: &[f64], ys: &[f64]) -> Result<QuadraticFit> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::invalid("fit", "need at least three (x, y) pairs"));
    }
    let a = DMatrix::from_fn(xs.len(), 3, |i, j| xs[i].powi(j as i32));
    let b = DVector::from_column_slice(ys);
    let c = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::invalid("fit", e.to_string()))?;
    let r = &a * &c - &b;
    Ok(QuadraticFit {
        c0: c[0],
        c1: c[1],
        c2: c[2],
        rms: (r.norm_squared() / xs.len() as f64).sqrt(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntanglementRow {
    pub epsilon: f64,
    pub delta: f64,
    /// `α(0, 0, δ)` for the perturbed singlet.
    pub alpha: Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntanglementSweep {
    pub rows: Vec<EntanglementRow>,
    /// Fit of `α(0,0,π; ε)` against `ε`, when `π` is on the δ grid and at
    /// least three ε values are given.
    pub fit_at_pi: Option<QuadraticFit>,
}

/// `α(0,0,δ)` for singlets perturbed by `ε_+- = ε_-+ = ε/(2√2)`.
pub fn entanglement_sweep(
    setup: &Setup,
    epsilons: &[f64],
    deltas: &[f64],
    method: Method,
) -> Result<EntanglementSweep> {
    let eq = setup.equilibrium();
    let mut rows = Vec::with_capacity(epsilons.len() * deltas.len());
    for &epsilon in epsilons {
        let s = setup.with_state(PairState::PerturbedSinglet(
            PerturbationParams::from_epsilon(epsilon)?,
        ));
        for &delta in deltas {
            let j = joint_transitions(&s, Shift::at_b(0.0, 0.0, delta), &eq, method)?;
            rows.push(EntanglementRow {
                epsilon,
                delta,
                alpha: j.report(Wing::A).alpha,
            });
        }
    }
    let at_pi: Vec<&EntanglementRow> = rows
        .iter()
        .filter(|r| (r.delta - std::f64::consts::PI).abs() < 1e-12)
        .collect();
    let fit_at_pi = if at_pi.len() >= 3 {
        let xs: Vec<f64> = at_pi.iter().map(|r| r.epsilon).collect();
        let ys: Vec<f64> = at_pi.iter().map(|r| r.alpha.value).collect();
        Some(fit_quadratic(&xs, &ys)?)
    } else {
        None
    };
    Ok(EntanglementSweep { rows, fit_at_pi })
}
