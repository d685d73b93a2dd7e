//! Lower bounds on transition fractions.
//!
//! All bounds are parametrized by `(θ_A, θ_B, δ)`:
//!
//! | id | lhs | rhs |
//! |----|-----|-----|
//! | 1 | `α(θ_A,θ_B,θ_B+δ) + β̃(θ_A,θ_B,θ_B+δ)` | `½|cos(θ_A−θ_B−δ) − cos(θ_A−θ_B)|` |
//! | 2 | `α(θ_A,θ_B,θ_B+δ) + β(θ_A,θ_B,θ_A−δ)` | same as 1 |
//! | 3 | bound 2 at `θ_A = θ_B = 0` | `½(1 − cos δ)` |
//! | 4 | `α(θ_A,θ_B,θ_B+δ)` | half of 1 |
//! | 5 | bound 4 at `θ_A = θ_B = 0` | `¼(1 − cos δ)` |
//!
//! Bounds 2 to 5 rely on rotational and exchange symmetry between the wings.

use serde::{Deserialize, Serialize};

use crate::ensemble::{Estimate, Method};
use crate::error::{Error, Result};

use super::{joint_transitions, Setup, Shift, Wing};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub id: u8,
    pub theta_a: f64,
    pub theta_b: f64,
    pub delta: f64,
    pub lhs: Estimate,
    pub rhs: f64,
    pub satisfied: bool,
    /// `lhs − rhs`; zero when saturated.
    pub gap: f64,
    /// Set when the symmetry the bound presumes is absent.
    pub symmetry_warning: bool,
}

/// Measured fractions entering the left-hand side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    /// `α(θ_A, θ_B, θ_B+δ)`.
    pub alpha: Estimate,
    /// `β̃(θ_A, θ_B, θ_B+δ)`; needed by bound 1.
    pub beta_tilde: Option<Estimate>,
    /// `β(θ_A, θ_B, θ_A−δ)`; needed by bounds 2 and 3.
    pub beta: Option<Estimate>,
}

fn check_id(id: u8) -> Result<()> {
    if (1..=5).contains(&id) {
        Ok(())
    } else {
        Err(Error::invalid(
            "bound.id",
            format!("must be 1 to 5, got {id}"),
        ))
    }
}

/// Right-hand side of bound `id`; bounds 3 and 5 ignore the angles.
pub fn bound_rhs(id: u8, theta_a: f64, theta_b: f64, delta: f64) -> Result<f64> {
    check_id(id)?;
    let (ta, tb) = if id == 3 || id == 5 {
        (0.0, 0.0)
    } else {
        (theta_a, theta_b)
    };
    let full = 0.5 * ((ta - tb - delta).cos() - (ta - tb).cos()).abs();
    Ok(if id >= 4 { 0.5 * full } else { full })
}

/// Compare already measured fractions against bound `id`. The bound counts
/// as satisfied when `lhs ≥ rhs − 3·error`.
pub fn evaluate_bound(
    id: u8,
    theta_a: f64,
    theta_b: f64,
    delta: f64,
    inputs: BoundInputs,
    symmetric_couplings: bool,
) -> Result<BoundCheck> {
    let rhs = bound_rhs(id, theta_a, theta_b, delta)?;
    let partner = match id {
        1 => Some(
            inputs
                .beta_tilde
                .ok_or(Error::invalid("bound.beta_tilde", "bound 1 needs β̃"))?,
        ),
        2 | 3 => Some(
            inputs
                .beta
                .ok_or(Error::invalid("bound.beta", "bounds 2 and 3 need β"))?,
        ),
        _ => None,
    };
    let lhs = match partner {
        Some(p) => Estimate {
            value: inputs.alpha.value + p.value,
            error: inputs.alpha.error + p.error,
        },
        None => inputs.alpha,
    };
    Ok(BoundCheck {
        id,
        theta_a,
        theta_b,
        delta,
        lhs,
        rhs,
        satisfied: lhs.value >= rhs - 3.0 * lhs.error,
        gap: lhs.value - rhs,
        symmetry_warning: id >= 2 && !symmetric_couplings,
    })
}

/// Measure the fractions bound `id` needs under equilibrium and check it.
pub fn bound_check(
    setup: &Setup,
    id: u8,
    theta_a: f64,
    theta_b: f64,
    delta: f64,
    method: Method,
) -> Result<BoundCheck> {
    check_id(id)?;
    let (ta, tb) = if id == 3 || id == 5 {
        (0.0, 0.0)
    } else {
        (theta_a, theta_b)
    };
    let eq = setup.equilibrium();
    let at_b = joint_transitions(setup, Shift::at_b(ta, tb, tb + delta), &eq, method)?;
    let beta = if id == 2 || id == 3 {
        let at_a = joint_transitions(setup, Shift::at_a(ta, tb, ta - delta), &eq, method)?;
        Some(at_a.report(Wing::B).alpha)
    } else {
        None
    };
    let inputs = BoundInputs {
        alpha: at_b.report(Wing::A).alpha,
        beta_tilde: Some(at_b.report(Wing::B).alpha),
        beta,
    };
    evaluate_bound(id, ta, tb, delta, inputs, setup.coupling.is_symmetric())
}
