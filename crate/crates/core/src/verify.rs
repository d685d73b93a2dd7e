//! Acceptance suite: one check per reproduced result, each returning the
//! measured quantities with their targets and tolerances.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ensemble::{DistributionKind, EnsembleDistribution, Estimate, Method, Side};
use crate::error::Result;
use crate::nonlocality::{
    bound_check, circle_model_run, detailed_balance_check, entanglement_sweep, joint_transitions,
    nonlocal_bits, outcome_statistics, signal, Angles, DiscDistribution, Setup, Shift, Wing,
};
use crate::packet::{Coupling, PilotWave, SingleSpinWave, SquarePacket};
use crate::spin::{
    singlet_amplitudes, MeasurementSettings, PairState, PerturbationParams, QubitState,
};
use crate::trajectory::{
    classify_outcome, evolve_exact, evolve_single_exact, outcome_numeric, single_spin_outcome,
    HiddenVariable, Outcome,
};

/// Seed shared by every Monte Carlo estimate in the suite.
pub const SEED: u64 = 42;
const MC: Method = Method::MonteCarlo {
    n: 1_000_000,
    seed: SEED,
};
const GRID: Method = Method::Grid { m: 1000 };
const FRACTION_TOL: f64 = 5e-3;

/// Signal at A for the right half-square ensemble under `(0,0) → (0,π/2)`,
/// measured once with grid quadrature at `m = 2000`.
pub const HALF_SQUARE_SIGNAL: f64 = 0.24975;

/// The `δ` grid of the symmetric-case identities.
pub const DELTA_GRID: [f64; 6] = [
    FRAC_PI_6,
    FRAC_PI_4,
    FRAC_PI_3,
    FRAC_PI_2,
    2.0 * FRAC_PI_3,
    PI,
];

pub const CHECK_COUNT: u8 = 15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// `|value − expected| ≤ tolerance`
    Within,
    /// `value ≤ expected + tolerance`
    AtMost,
    /// `value ≥ expected − tolerance`
    AtLeast,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Measurement {
    pub label: String,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub passed: bool,
}

impl Measurement {
    fn new(
        label: impl Into<String>,
        value: f64,
        expected: f64,
        tolerance: f64,
        comparison: Comparison,
    ) -> Self {
        let passed = match comparison {
            Comparison::Within => (value - expected).abs() <= tolerance,
            Comparison::AtMost => value <= expected + tolerance,
            Comparison::AtLeast => value >= expected - tolerance,
        };
        Measurement {
            label: label.into(),
            value,
            expected,
            tolerance,
            comparison,
            passed,
        }
    }

    fn within(label: impl Into<String>, value: f64, expected: f64, tolerance: f64) -> Self {
        Self::new(label, value, expected, tolerance, Comparison::Within)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    /// Wall time; left out of serialized reports so they stay reproducible.
    #[serde(skip_serializing)]
    pub seconds: f64,
    pub measurements: Vec<Measurement>,
}

impl CheckReport {
    /// First failing measurement, or the worst-placed one when all pass.
    pub fn summary(&self) -> String {
        let failing = self.measurements.iter().find(|m| !m.passed);
        match failing.or(self.measurements.first()) {
            Some(m) => format!(
                "{}: {:.6} vs {:.6} (tol {:.2e}){}",
                m.label,
                m.value,
                m.expected,
                m.tolerance,
                if self.measurements.len() > 1 {
                    format!(" [{} measurements]", self.measurements.len())
                } else {
                    String::new()
                }
            ),
            None => "no measurements".into(),
        }
    }
}

pub fn title(id: u8) -> &'static str {
    match id {
        1 => "singlet correlation",
        2 => "equilibrium marginals",
        3 => "right-angle shift, equal couplings",
        4 => "symmetric-case identities",
        5 => "opposite-setting shift",
        6 => "asymmetric couplings",
        7 => "extreme coupling ratios",
        8 => "detailed balancing",
        9 => "equilibrium no-signaling",
        10 => "nonequilibrium signaling",
        11 => "bound saturation",
        12 => "perturbation expansion",
        13 => "bits averages",
        14 => "single-spin suite",
        15 => "property suite",
        _ => "unknown",
    }
}

/// Run acceptance check `id` (1 to 15).
pub fn run_check(id: u8) -> Result<CheckReport> {
    let start = Instant::now();
    let measurements = match id {
        1 => singlet_correlation()?,
        2 => equilibrium_marginals()?,
        3 => right_angle_shift()?,
        4 => symmetric_identities()?,
        5 => opposite_setting()?,
        6 => asymmetric_couplings()?,
        7 => extreme_ratios()?,
        8 => detailed_balancing()?,
        9 => no_signaling()?,
        10 => nonequilibrium_signal()?,
        11 => bound_saturation()?,
        12 => perturbation_expansion()?,
        13 => bits_averages()?,
        14 => single_spin_suite()?,
        15 => property_suite()?,
        _ => {
            return Err(crate::Error::invalid(
                "verify.id",
                format!("no acceptance check {id}; valid ids are 1 to {CHECK_COUNT}"),
            ))
        }
    };
    Ok(CheckReport {
        id,
        title: title(id),
        passed: measurements.iter().all(|m| m.passed),
        seconds: start.elapsed().as_secs_f64(),
        measurements,
    })
}

fn symmetric() -> Setup {
    Setup::default()
}

fn coupled(a_a: f64, a_b: f64) -> Setup {
    Setup::singlet(Coupling::new(a_a, a_b).expect("positive couplings"))
}

fn sigma3(e: Estimate) -> f64 {
    // identical outcomes everywhere give a zero standard error
    3.0 * e.error + 1e-12
}

fn angle_grid() -> Vec<Angles> {
    (0..12)
        .map(|k| {
            let theta_a = 0.25 * k as f64;
            Angles::new(theta_a, theta_a + k as f64 * FRAC_PI_6)
        })
        .collect()
}

/// `n` shifts at B with every angle uniform on `(−π, π)`.
pub fn random_triples(n: usize, seed: u64) -> Vec<Shift> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut angle = || rng.random_range(-PI..PI);
            Shift::at_b(angle(), angle(), angle())
        })
        .collect()
}

fn singlet_correlation() -> Result<Vec<Measurement>> {
    let setup = symmetric();
    angle_grid()
        .into_iter()
        .map(|a| {
            let s = outcome_statistics(&setup, a, &setup.equilibrium(), MC)?;
            let delta = a.theta_a - a.theta_b;
            Ok(Measurement::within(
                format!("E[σAσB] at δ = {:.4}", -delta),
                s.correlation.value,
                -delta.cos(),
                sigma3(s.correlation),
            ))
        })
        .collect()
}

fn equilibrium_marginals() -> Result<Vec<Measurement>> {
    let mut out = Vec::new();
    for setup in [symmetric(), coupled(2.0, 1.0)] {
        for a in angle_grid() {
            let s = outcome_statistics(&setup, a, &setup.equilibrium(), MC)?;
            let tag = format!(
                "({:.3}, {:.3}), aA/aB = {}",
                a.theta_a,
                a.theta_b,
                setup.coupling.a_a / setup.coupling.a_b
            );
            out.push(Measurement::within(
                format!("P(σA=+1) {tag}"),
                s.p_a_plus.value,
                0.5,
                sigma3(s.p_a_plus),
            ));
            out.push(Measurement::within(
                format!("P(σB=+1) {tag}"),
                s.p_b_plus.value,
                0.5,
                sigma3(s.p_b_plus),
            ));
        }
    }
    Ok(out)
}

/// `α(0,0,δ)` and `β̃(0,0,δ)` on the grid.
fn alpha_beta_tilde(setup: &Setup, delta: f64, method: Method) -> Result<(Estimate, Estimate)> {
    let j = joint_transitions(
        setup,
        Shift::at_b(0.0, 0.0, delta),
        &setup.equilibrium(),
        method,
    )?;
    Ok((j.report(Wing::A).alpha, j.report(Wing::B).alpha))
}

fn right_angle_shift() -> Result<Vec<Measurement>> {
    let (a, b) = alpha_beta_tilde(&symmetric(), FRAC_PI_2, GRID)?;
    Ok(vec![
        Measurement::within("α(0,0,π/2)", a.value, 0.25, FRACTION_TOL),
        Measurement::within("β̃(0,0,π/2)", b.value, 0.25, FRACTION_TOL),
    ])
}

fn symmetric_identities() -> Result<Vec<Measurement>> {
    let mut out = Vec::new();
    for delta in DELTA_GRID {
        let (a, b) = alpha_beta_tilde(&symmetric(), delta, GRID)?;
        let target = 0.25 * (1.0 - delta.cos());
        out.push(Measurement::within(
            format!("α(0,0,{delta:.4})"),
            a.value,
            target,
            FRACTION_TOL,
        ));
        out.push(Measurement::within(
            format!("β̃(0,0,{delta:.4})"),
            b.value,
            target,
            FRACTION_TOL,
        ));
    }
    Ok(out)
}

fn opposite_setting() -> Result<Vec<Measurement>> {
    let (a, _) = alpha_beta_tilde(&symmetric(), PI, GRID)?;
    Ok(vec![Measurement::within(
        "α(0,0,π)",
        a.value,
        0.5,
        FRACTION_TOL,
    )])
}

fn asymmetric_couplings() -> Result<Vec<Measurement>> {
    let (a, b) = alpha_beta_tilde(&coupled(2.0, 1.0), FRAC_PI_2, GRID)?;
    Ok(vec![
        Measurement::within("α(0,0,π/2), aA = 2aB", a.value, 0.125, FRACTION_TOL),
        Measurement::within("β̃(0,0,π/2), aA = 2aB", b.value, 0.375, FRACTION_TOL),
    ])
}

fn extreme_ratios() -> Result<Vec<Measurement>> {
    let (a, b) = alpha_beta_tilde(&coupled(100.0, 1.0), FRAC_PI_2, GRID)?;
    let (a_swapped, _) = alpha_beta_tilde(&coupled(1.0, 100.0), FRAC_PI_2, GRID)?;
    Ok(vec![
        Measurement::new(
            "α(0,0,π/2), aA/aB = 100",
            a.value,
            0.01,
            0.0,
            Comparison::AtMost,
        ),
        Measurement::within("β̃(0,0,π/2), aA/aB = 100", b.value, 0.5, 0.01),
        Measurement::within("α(0,0,π/2), aB/aA = 100", a_swapped.value, 0.5, 0.01),
    ])
}

/// Paired Monte Carlo sample size for the 20-triple sweeps.
const TRIPLE_MC: Method = Method::MonteCarlo {
    n: 250_000,
    seed: SEED,
};

fn detailed_balancing() -> Result<Vec<Measurement>> {
    let mut out = Vec::new();
    for setup in [symmetric(), coupled(2.0, 1.0)] {
        for (i, shift) in random_triples(20, SEED).into_iter().enumerate() {
            let d = detailed_balance_check(&setup, Wing::A, shift, TRIPLE_MC)?;
            out.push(Measurement::new(
                format!(
                    "|ν(+,−) − ν(−,+)| triple {i}, aA/aB = {}",
                    setup.coupling.a_a / setup.coupling.a_b
                ),
                d.difference.value,
                0.0,
                sigma3(d.difference),
                Comparison::AtMost,
            ));
        }
    }
    Ok(out)
}

fn no_signaling() -> Result<Vec<Measurement>> {
    let mut out = Vec::new();
    for setup in [symmetric(), coupled(2.0, 1.0)] {
        let eq = setup.equilibrium();
        for (i, shift) in random_triples(20, SEED).into_iter().enumerate() {
            let j = joint_transitions(&setup, shift, &eq, TRIPLE_MC)?;
            let ratio = setup.coupling.a_a / setup.coupling.a_b;
            for (wing, w) in [("A", &j.a), ("B", &j.b)] {
                out.push(Measurement::within(
                    format!("signal at {wing} triple {i}, aA/aB = {ratio}"),
                    w.signal.value,
                    0.0,
                    sigma3(w.signal),
                ));
            }
        }
    }
    Ok(out)
}

fn nonequilibrium_signal() -> Result<Vec<Measurement>> {
    let setup = symmetric();
    let right = EnsembleDistribution::new(
        DistributionKind::HalfSquare { side: Side::Right },
        setup.packet,
    )?;
    let s = signal(
        &setup,
        Wing::A,
        Shift::at_b(0.0, 0.0, FRAC_PI_2),
        &right,
        MC,
    )?;
    Ok(vec![
        Measurement::new(
            "|signal| / SE",
            s.signal.value.abs() / s.signal.error,
            10.0,
            0.0,
            Comparison::AtLeast,
        ),
        Measurement::within("signal", s.signal.value, HALF_SQUARE_SIGNAL, FRACTION_TOL),
    ])
}

fn bound_saturation() -> Result<Vec<Measurement>> {
    let mut out = Vec::new();
    for setup in [symmetric(), coupled(2.0, 1.0)] {
        let c = bound_check(&setup, 1, 0.0, 0.0, FRAC_PI_2, GRID)?;
        out.push(Measurement::within(
            format!(
                "bound 1 gap, aA/aB = {}",
                setup.coupling.a_a / setup.coupling.a_b
            ),
            c.gap,
            0.0,
            1e-2,
        ));
    }
    for delta in DELTA_GRID {
        let c = bound_check(&symmetric(), 5, 0.0, 0.0, delta, GRID)?;
        out.push(Measurement::within(
            format!("bound 5 gap at δ = {delta:.4}"),
            c.gap,
            0.0,
            1e-2,
        ));
    }
    Ok(out)
}

/// Values of `ε` for the quadratic fit of `α(0,0,π; ε)`.
pub const EPSILON_GRID: [f64; 5] = [0.01, 0.02, 0.03, 0.04, 0.05];

fn perturbation_expansion() -> Result<Vec<Measurement>> {
    let sweep = entanglement_sweep(&symmetric(), &EPSILON_GRID, &[PI], GRID)?;
    let fit = sweep.fit_at_pi.expect("five ε values at δ = π");
    Ok(vec![
        Measurement::within("quadratic coefficient", fit.c2, -1.25, 0.07),
        Measurement::within("intercept", fit.c0, 0.5, 1e-3),
    ])
}

fn bits_averages() -> Result<Vec<Measurement>> {
    Ok(vec![
        Measurement::within("bits over (−π, π)", nonlocal_bits(-PI, PI)?, 0.25, 1e-9),
        Measurement::within(
            "bits over (−π/2, π/2)",
            nonlocal_bits(-FRAC_PI_2, FRAC_PI_2)?,
            0.25 * (1.0 - 2.0 / PI),
            1e-9,
        ),
    ])
}

fn single_spin_suite() -> Result<Vec<Measurement>> {
    let packet = SquarePacket::default();
    let grid: Vec<f64> = (0..100).map(|i| -0.5 + (i as f64 + 0.5) / 100.0).collect();
    let fraction = |state: QubitState, theta: f64, want: &dyn Fn(f64) -> Outcome| -> Result<f64> {
        let mut hits = 0;
        for &r0 in &grid {
            if single_spin_outcome(r0, &state, theta, 1.0, packet)? == want(r0) {
                hits += 1;
            }
        }
        Ok(hits as f64 / grid.len() as f64)
    };
    let mut out = vec![
        Measurement::within(
            "|z+⟩, θ = 0: fraction +1",
            fraction(QubitState::z_plus(), 0.0, &|_| Outcome::Plus)?,
            1.0,
            0.0,
        ),
        Measurement::within(
            "|z+⟩, θ = π: fraction −1",
            fraction(QubitState::z_plus(), PI, &|_| Outcome::Minus)?,
            1.0,
            0.0,
        ),
        Measurement::within(
            "|x+⟩, θ = 0: fraction sign(r0)",
            fraction(QubitState::x_plus(), 0.0, &Outcome::from_sign)?,
            1.0,
            0.0,
        ),
        Measurement::within(
            "|x+⟩, θ = π: fraction sign(r0)",
            fraction(QubitState::x_plus(), PI, &Outcome::from_sign)?,
            1.0,
            0.0,
        ),
    ];
    // ordered initial positions stay ordered at every sampled time
    let states = [
        ("|x+⟩", QubitState::x_plus(), 0.0),
        ("|z+⟩ at θ = 1", QubitState::z_plus(), 1.0),
        ("|x+⟩ at θ = 2.5", QubitState::x_plus(), 2.5),
    ];
    for (name, state, theta) in states {
        let wave = SingleSpinWave::new(&state, theta, 1.0, packet)?;
        let trajectories = grid
            .iter()
            .map(|&r0| evolve_single_exact(r0, &wave))
            .collect::<Result<Vec<_>>>()?;
        let mut crossings = 0;
        for k in 0..=60 {
            let t = 1.5 * k as f64 / 60.0;
            let r: Vec<f64> = trajectories.iter().map(|tr| tr.position_at(t)).collect();
            crossings += r.windows(2).filter(|w| w[0] > w[1]).count();
        }
        out.push(Measurement::within(
            format!("crossings, {name}"),
            crossings as f64,
            0.0,
            0.0,
        ));
    }
    Ok(out)
}

fn oracle_scenarios() -> Vec<(String, PilotWave)> {
    let packet = SquarePacket::default();
    let singlet = |delta: f64, a_a: f64, a_b: f64| {
        PilotWave::new(
            singlet_amplitudes(&MeasurementSettings::new(0.0, delta)),
            Coupling::new(a_a, a_b).expect("positive couplings"),
            packet,
        )
    };
    let perturbed =
        PairState::PerturbedSinglet(PerturbationParams::from_epsilon(0.05).expect("small ε"));
    vec![
        ("singlet δ = 0".into(), singlet(0.0, 1.0, 1.0)),
        ("singlet δ = π/3".into(), singlet(FRAC_PI_3, 1.0, 1.0)),
        ("singlet δ = π/2".into(), singlet(FRAC_PI_2, 1.0, 1.0)),
        (
            "singlet δ = π/2, aA = 2aB".into(),
            singlet(FRAC_PI_2, 2.0, 1.0),
        ),
        ("singlet δ = 2, aB = 1.7aA".into(), singlet(2.0, 1.0, 1.7)),
        (
            "perturbed ε = 0.05, δ = π".into(),
            PilotWave::new(
                perturbed.amplitudes(&MeasurementSettings::new(0.0, PI)),
                Coupling::default(),
                packet,
            ),
        ),
    ]
}

fn property_suite() -> Result<Vec<Measurement>> {
    let mut out = Vec::new();
    let eq = crate::ensemble::equilibrium_distribution(SquarePacket::default());
    let samples = eq.sample(SEED, 10_000)?.samples;

    for (name, wave) in oracle_scenarios() {
        let a = wave.coupling().a_a.max(wave.coupling().a_b);
        let dt = wave.packet().width / (1000.0 * a);
        let mut agree = 0usize;
        for &l in &samples {
            if classify_outcome(l, &wave)? == outcome_numeric(l, &wave, dt)? {
                agree += 1;
            }
        }
        out.push(Measurement::new(
            format!("oracle agreement, {name}"),
            agree as f64 / samples.len() as f64,
            0.999,
            0.0,
            Comparison::AtLeast,
        ));
    }

    // scaling Δ, a_A, a_B and λ together leaves outcomes and times unchanged
    for k in [0.5, 3.7] {
        let base = PilotWave::new(
            singlet_amplitudes(&MeasurementSettings::new(0.3, 1.6)),
            Coupling::new(1.0, 1.4).expect("positive couplings"),
            SquarePacket::default(),
        );
        let scaled = PilotWave::new(
            *base.amplitudes(),
            Coupling::new(k, 1.4 * k).expect("positive couplings"),
            SquarePacket::new(k).expect("positive width"),
        );
        let mut mismatches = 0usize;
        for l in samples.iter().take(2000) {
            let t0 = evolve_exact(*l, &base)?;
            let t1 = evolve_exact(HiddenVariable::new(k * l.r_a, k * l.r_b), &scaled)?;
            let same_points = t0.points.len() == t1.points.len()
                && t0.points.iter().zip(&t1.points).all(|(p, q)| {
                    p.region == q.region
                        && (p.t - q.t).abs() <= 1e-9
                        && (k * p.r_a - q.r_a).abs() <= 1e-9 * k
                        && (k * p.r_b - q.r_b).abs() <= 1e-9 * k
                });
            if t0.outcome != t1.outcome || !same_points {
                mismatches += 1;
            }
        }
        out.push(Measurement::within(
            format!("scale equivariance mismatches, k = {k}"),
            mismatches as f64,
            0.0,
            0.0,
        ));
    }

    for gamma in [PI / 12.0, FRAC_PI_6, FRAC_PI_4] {
        let r = circle_model_run(gamma, &DiscDistribution::Uniform, GRID)?;
        let nu = gamma / (2.0 * PI);
        out.push(Measurement::within(
            format!("circle ν(+,−), γ = {gamma:.4}"),
            r.nu_plus_minus.value,
            nu,
            r.nu_plus_minus.error,
        ));
        out.push(Measurement::within(
            format!("circle ν(−,+), γ = {gamma:.4}"),
            r.nu_minus_plus.value,
            nu,
            r.nu_minus_plus.error,
        ));
        out.push(Measurement::within(
            format!("circle ratio after, γ = {gamma:.4}"),
            r.ratio_after,
            1.0,
            4.0 * r.p_plus_after.error,
        ));
    }
    Ok(out)
}

/// Run every check in order.
pub fn run_all() -> Result<Vec<CheckReport>> {
    (1..=CHECK_COUNT).map(run_check).collect()
}
