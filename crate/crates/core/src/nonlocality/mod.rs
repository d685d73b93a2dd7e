//! Outcome statistics and transition analysis over ensembles of hidden
//! variables.
//!
//! A [`Shift`] changes one setting; every `λ` is classified before and after
//! and the four transition sets `T_X(±,∓)` at both wings are accumulated in a
//! single pass. The degrees of nonlocality `α`, `β` and the local `α̃`, `β̃`
//! differ only in which wing is observed and which setting moves.

mod bounds;
mod circle;
mod info;
mod search;

use serde::{Deserialize, Serialize};

pub use bounds::{bound_check, bound_rhs, evaluate_bound, BoundCheck, BoundInputs};
pub use circle::{circle_model_run, CircleReport, DiscDistribution};
pub use info::{
    entanglement_sweep, fit_quadratic, nonlocal_bits, sweep, EntanglementRow, EntanglementSweep,
    QuadraticFit, SweepRow,
};
pub use search::{balanced_distribution_search, SearchFamily, SearchResult};

use crate::ensemble::{
    equilibrium_distribution, expectation, EnsembleDistribution, Estimate, Method,
};
use crate::error::Result;
use crate::packet::{Coupling, PilotWave, SquarePacket};
use crate::spin::{InteractionMode, MeasurementSettings, PairState};
use crate::trajectory::{classify_outcome, HiddenVariable, Outcome, OutcomePair};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Wing {
    A,
    B,
}

impl Wing {
    pub fn other(self) -> Wing {
        match self {
            Wing::A => Wing::B,
            Wing::B => Wing::A,
        }
    }

    fn of(self, pair: &OutcomePair) -> Outcome {
        match self {
            Wing::A => pair.a,
            Wing::B => pair.b,
        }
    }
}

/// Name of a transition fraction by observed and shifted wing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Degree {
    /// Change at A caused by a shift at B.
    Alpha,
    /// Change at B caused by a shift at A.
    Beta,
    /// Change at A caused by a shift at A.
    AlphaTilde,
    /// Change at B caused by a shift at B.
    BetaTilde,
}

impl Degree {
    pub fn of(observed: Wing, shifted: Wing) -> Degree {
        match (observed, shifted) {
            (Wing::A, Wing::B) => Degree::Alpha,
            (Wing::B, Wing::A) => Degree::Beta,
            (Wing::A, Wing::A) => Degree::AlphaTilde,
            (Wing::B, Wing::B) => Degree::BetaTilde,
        }
    }

    pub fn is_local(self) -> bool {
        matches!(self, Degree::AlphaTilde | Degree::BetaTilde)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Angles {
    pub theta_a: f64,
    pub theta_b: f64,
}

impl Angles {
    pub fn new(theta_a: f64, theta_b: f64) -> Self {
        Angles { theta_a, theta_b }
    }
}

/// A change of one setting: `(θ_A, θ_B) → (θ_A′, θ_B)` or `(θ_A, θ_B′)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Shift {
    pub before: Angles,
    pub shifted: Wing,
    pub theta_shifted: f64,
}

impl Shift {
    pub fn at_b(theta_a: f64, theta_b: f64, theta_b_prime: f64) -> Self {
        Shift {
            before: Angles::new(theta_a, theta_b),
            shifted: Wing::B,
            theta_shifted: theta_b_prime,
        }
    }

    pub fn at_a(theta_a: f64, theta_b: f64, theta_a_prime: f64) -> Self {
        Shift {
            before: Angles::new(theta_a, theta_b),
            shifted: Wing::A,
            theta_shifted: theta_a_prime,
        }
    }

    pub fn after(&self) -> Angles {
        match self.shifted {
            Wing::A => Angles::new(self.theta_shifted, self.before.theta_b),
            Wing::B => Angles::new(self.before.theta_a, self.theta_shifted),
        }
    }
}

/// Everything except the settings: state, couplings, packet and interaction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Setup {
    pub state: PairState,
    pub coupling: Coupling,
    pub packet: SquarePacket,
    pub mode: InteractionMode,
}

impl Default for Setup {
    fn default() -> Self {
        Setup {
            state: PairState::Singlet,
            coupling: Coupling::default(),
            packet: SquarePacket::default(),
            mode: InteractionMode::VonNeumann,
        }
    }
}

impl Setup {
    pub fn singlet(coupling: Coupling) -> Self {
        Setup {
            coupling,
            ..Setup::default()
        }
    }

    pub fn with_state(mut self, state: PairState) -> Self {
        self.state = state;
        self
    }

    pub fn equilibrium(&self) -> EnsembleDistribution {
        equilibrium_distribution(self.packet)
    }

    pub fn settings(&self, angles: Angles) -> MeasurementSettings {
        MeasurementSettings::new(angles.theta_a, angles.theta_b).with_mode(self.mode)
    }

    pub fn wave(&self, angles: Angles) -> Result<PilotWave> {
        let settings = self.settings(angles);
        settings.validate()?;
        Ok(PilotWave::new(
            self.state.amplitudes(&settings),
            self.coupling,
            self.packet,
        ))
    }
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeStatistics {
    pub p_a_plus: Estimate,
    pub p_b_plus: Estimate,
    pub correlation: Estimate,
}

impl OutcomeStatistics {
    pub fn p_a_minus(&self) -> f64 {
        1.0 - self.p_a_plus.value
    }
    pub fn p_b_minus(&self) -> f64 {
        1.0 - self.p_b_plus.value
    }
}

/// Marginals `P(σ_X = +1)` and the correlation `E[σ_A σ_B]` under `dist`.
pub fn outcome_statistics(
    setup: &Setup,
    angles: Angles,
    dist: &EnsembleDistribution,
    method: Method,
) -> Result<OutcomeStatistics> {
    let wave = setup.wave(angles)?;
    let [pa, pb, e] = expectation(
        dist,
        |l| {
            let o = classify_outcome(l, &wave)?;
            let (sa, sb) = o.values();
            Ok([indicator(sa > 0), indicator(sb > 0), f64::from(sa * sb)])
        },
        method,
    )?;
    Ok(OutcomeStatistics {
        p_a_plus: pa,
        p_b_plus: pb,
        correlation: e,
    })
}

/// Transition statistics at one wing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WingTransitions {
    pub p_plus_before: Estimate,
    pub p_plus_after: Estimate,
    /// Mass of `T(+,−)`: outcome `+1` before, `−1` after.
    pub nu_plus_minus: Estimate,
    pub nu_minus_plus: Estimate,
    /// Mass of `T(+,−) ∪ T(−,+)`.
    pub changed: Estimate,
    /// `ν(−,+) − ν(+,−)`, with the standard error of the difference.
    pub signal: Estimate,
}

/// Both wings' transitions under one shift, from one classification pass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointTransitions {
    pub shift: Shift,
    pub a: WingTransitions,
    pub b: WingTransitions,
}

impl JointTransitions {
    pub fn wing(&self, wing: Wing) -> &WingTransitions {
        match wing {
            Wing::A => &self.a,
            Wing::B => &self.b,
        }
    }

    pub fn report(&self, observed: Wing) -> TransitionReport {
        let w = self.wing(observed);
        TransitionReport {
            degree: Degree::of(observed, self.shift.shifted),
            observed,
            shift: self.shift,
            nu_plus_minus: w.nu_plus_minus,
            nu_minus_plus: w.nu_minus_plus,
            alpha: Estimate {
                value: w.nu_plus_minus.value + w.nu_minus_plus.value,
                error: w.changed.error,
            },
        }
    }
}

/// Transition sets at both wings for λ drawn from `dist`.
pub fn joint_transitions(
    setup: &Setup,
    shift: Shift,
    dist: &EnsembleDistribution,
    method: Method,
) -> Result<JointTransitions> {
    let before = setup.wave(shift.before)?;
    let after = setup.wave(shift.after())?;
    let per_wing = |o0: Outcome, o1: Outcome| -> [f64; 6] {
        let (p0, p1) = (o0 == Outcome::Plus, o1 == Outcome::Plus);
        let pm = indicator(p0 && !p1);
        let mp = indicator(!p0 && p1);
        [indicator(p0), indicator(p1), pm, mp, pm + mp, mp - pm]
    };
    let est: [Estimate; 12] = expectation(
        dist,
        |l: HiddenVariable| {
            let o0 = classify_outcome(l, &before)?;
            let o1 = classify_outcome(l, &after)?;
            let a = per_wing(Wing::A.of(&o0), Wing::A.of(&o1));
            let b = per_wing(Wing::B.of(&o0), Wing::B.of(&o1));
            Ok(std::array::from_fn(|k| if k < 6 { a[k] } else { b[k - 6] }))
        },
        method,
    )?;
    let wing = |e: &[Estimate]| WingTransitions {
        p_plus_before: e[0],
        p_plus_after: e[1],
        nu_plus_minus: e[2],
        nu_minus_plus: e[3],
        changed: e[4],
        signal: e[5],
    };
    Ok(JointTransitions {
        shift,
        a: wing(&est[..6]),
        b: wing(&est[6..]),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionReport {
    pub degree: Degree,
    pub observed: Wing,
    pub shift: Shift,
    pub nu_plus_minus: Estimate,
    pub nu_minus_plus: Estimate,
    /// `ν(+,−) + ν(−,+)`; named for `α` but holds whichever degree applies.
    /// Numerically also the nonlocal information in bits per pair.
    pub alpha: Estimate,
}

/// Fraction of outcomes at `observed` that change under `shift`.
pub fn transition_fractions(
    setup: &Setup,
    observed: Wing,
    shift: Shift,
    dist: &EnsembleDistribution,
    method: Method,
) -> Result<TransitionReport> {
    Ok(joint_transitions(setup, shift, dist, method)?.report(observed))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetailedBalance {
    pub nu_plus_minus: Estimate,
    pub nu_minus_plus: Estimate,
    /// `|ν(+,−) − ν(−,+)|` with the standard error of the paired difference.
    pub difference: Estimate,
}

impl DetailedBalance {
    pub fn balanced(&self, k: f64) -> bool {
        self.difference.value <= k * self.difference.error
    }
}

/// Equilibrium transition fractions `ν^eq(+,−)` and `ν^eq(−,+)` at `observed`.
pub fn detailed_balance_check(
    setup: &Setup,
    observed: Wing,
    shift: Shift,
    method: Method,
) -> Result<DetailedBalance> {
    let j = joint_transitions(setup, shift, &setup.equilibrium(), method)?;
    let w = j.wing(observed);
    Ok(DetailedBalance {
        nu_plus_minus: w.nu_plus_minus,
        nu_minus_plus: w.nu_minus_plus,
        difference: Estimate {
            value: w.signal.value.abs(),
            error: w.signal.error,
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalReport {
    pub observed: Wing,
    pub shift: Shift,
    pub p_plus_before: Estimate,
    pub p_plus_after: Estimate,
    /// `P_after(+) − P_before(+) = ν(−,+) − ν(+,−)`.
    pub signal: Estimate,
}

/// Change in the outcome distribution at `observed` caused by `shift`.
pub fn signal(
    setup: &Setup,
    observed: Wing,
    shift: Shift,
    dist: &EnsembleDistribution,
    method: Method,
) -> Result<SignalReport> {
    let j = joint_transitions(setup, shift, dist, method)?;
    let w = j.wing(observed);
    Ok(SignalReport {
        observed,
        shift,
        p_plus_before: w.p_plus_before,
        p_plus_after: w.p_plus_after,
        signal: w.signal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{DistributionKind, Side};
    use std::f64::consts::{FRAC_PI_2, PI};

    const GRID: Method = Method::Grid { m: 200 };

    #[test]
    fn symmetric_right_angle_shift() {
        let setup = Setup::default();
        let j = joint_transitions(
            &setup,
            Shift::at_b(0.0, 0.0, FRAC_PI_2),
            &setup.equilibrium(),
            GRID,
        )
        .unwrap();
        let a = j.report(Wing::A);
        assert_eq!(a.degree, Degree::Alpha);
        // midpoints on the diagonal divider bias each fraction by up to 1/(2m)
        assert!((a.alpha.value - 0.25).abs() < 3e-3, "{a:?}");
        assert!((a.nu_plus_minus.value - 0.125).abs() < 3e-3);
        assert!((a.nu_minus_plus.value - 0.125).abs() < 3e-3);
        let b = j.report(Wing::B);
        assert_eq!(b.degree, Degree::BetaTilde);
        assert!((b.alpha.value - 0.25).abs() < 3e-3);
        assert_eq!(a.alpha.value, a.nu_plus_minus.value + a.nu_minus_plus.value);
    }

    #[test]
    fn no_shift_changes_nothing() {
        let setup = Setup::default();
        let r = transition_fractions(
            &setup,
            Wing::A,
            Shift::at_b(0.3, 0.3, 0.3),
            &setup.equilibrium(),
            GRID,
        )
        .unwrap();
        assert_eq!(r.alpha.value, 0.0);
    }

    #[test]
    fn asymmetric_couplings() {
        let setup = Setup::singlet(Coupling::new(2.0, 1.0).unwrap());
        let j = joint_transitions(
            &setup,
            Shift::at_b(0.0, 0.0, FRAC_PI_2),
            &setup.equilibrium(),
            GRID,
        )
        .unwrap();
        assert!((j.a.changed.value - 0.125).abs() < 2e-3);
        assert!((j.b.changed.value - 0.375).abs() < 2e-3);
    }

    #[test]
    fn equilibrium_statistics() {
        let setup = Setup::default();
        let s =
            outcome_statistics(&setup, Angles::new(0.4, 1.5), &setup.equilibrium(), GRID).unwrap();
        assert!((s.correlation.value + (1.1f64).cos()).abs() < 1e-2);
        assert!((s.p_a_plus.value - 0.5).abs() < 1e-3);
        assert!((s.p_b_plus.value - 0.5).abs() < 1e-3);
    }

    #[test]
    fn point_mass_is_degenerate() {
        let setup = Setup::default();
        let d = EnsembleDistribution::new(
            DistributionKind::PointMass(HiddenVariable::new(0.1, 0.3)),
            setup.packet,
        )
        .unwrap();
        let s = outcome_statistics(&setup, Angles::new(0.0, 0.0), &d, GRID).unwrap();
        assert_eq!(
            (s.p_a_plus.value, s.p_b_plus.value, s.correlation.value),
            (0.0, 1.0, -1.0)
        );
        assert_eq!(s.correlation.error, 0.0);
    }

    #[test]
    fn stern_gerlach_identifies_pi_shift() {
        let setup = Setup {
            mode: InteractionMode::SternGerlach,
            ..Setup::default()
        };
        let r = transition_fractions(
            &setup,
            Wing::A,
            Shift::at_b(0.0, 0.0, PI),
            &setup.equilibrium(),
            GRID,
        )
        .unwrap();
        assert_eq!(r.alpha.value, 0.0);
    }

    #[test]
    fn half_square_signal_and_flip_set() {
        let setup = Setup::default();
        let shift = Shift::at_b(0.0, 0.0, FRAC_PI_2);
        let right = EnsembleDistribution::new(
            DistributionKind::HalfSquare { side: Side::Right },
            setup.packet,
        )
        .unwrap();
        let s = signal(&setup, Wing::A, shift, &right, Method::Grid { m: 400 }).unwrap();
        assert!(s.signal.value.abs() > 0.05, "{s:?}");
        assert!((s.signal.value - (s.p_plus_after.value - s.p_plus_before.value)).abs() < 1e-12);

        // all the mass in T_A(+,−): the band r_B < r_A < 0... pick a point there
        let l = HiddenVariable::new(0.1, 0.05);
        let before = classify_outcome(l, &setup.wave(shift.before).unwrap()).unwrap();
        let after = classify_outcome(l, &setup.wave(shift.after()).unwrap()).unwrap();
        assert_eq!((before.a, after.a), (Outcome::Plus, Outcome::Plus));
        let l = HiddenVariable::new(-0.1, -0.3);
        let before = classify_outcome(l, &setup.wave(shift.before).unwrap()).unwrap();
        let after = classify_outcome(l, &setup.wave(shift.after()).unwrap()).unwrap();
        assert_eq!((before.a, after.a), (Outcome::Plus, Outcome::Minus));
        let atom = EnsembleDistribution::new(DistributionKind::PointMass(l), setup.packet).unwrap();
        let s = signal(&setup, Wing::A, shift, &atom, GRID).unwrap();
        assert_eq!(s.signal.value, -1.0);
    }
}
