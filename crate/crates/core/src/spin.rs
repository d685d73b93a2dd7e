//! Two-qubit spin amplitudes in rotated measurement bases.
//!
//! Measurement axes lie in the x–z plane at angle `theta` from the z-axis.
//! The basis vectors along such an axis, written in the z basis, are
//!
//! ```text
//! |θ+⟩ =  cos(θ/2)|z+⟩ + sin(θ/2)|z−⟩
//! |θ−⟩ = −sin(θ/2)|z+⟩ + cos(θ/2)|z−⟩
//! ```
//!
//! so a shift of the setting by `π` swaps the two outcomes (up to sign).

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the unit-norm invariant of [`SpinAmplitudes`].
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Largest perturbation amplitude accepted by [`PerturbationParams`].
pub const MAX_PERTURBATION: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn sign(self) -> f64 {
        match self {
            Spin::Up => 1.0,
            Spin::Down => -1.0,
        }
    }
}

/// One of the four product components `ψ_ij` of the two-pointer wavefunction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Branch {
    pub a: Spin,
    pub b: Spin,
}

impl Branch {
    pub const PP: Branch = Branch {
        a: Spin::Up,
        b: Spin::Up,
    };
    pub const PM: Branch = Branch {
        a: Spin::Up,
        b: Spin::Down,
    };
    pub const MP: Branch = Branch {
        a: Spin::Down,
        b: Spin::Up,
    };
    pub const MM: Branch = Branch {
        a: Spin::Down,
        b: Spin::Down,
    };

    /// Index order used throughout the crate: `++, +−, −+, −−`.
    pub const ALL: [Branch; 4] = [Branch::PP, Branch::PM, Branch::MP, Branch::MM];

    pub fn index(self) -> usize {
        match (self.a, self.b) {
            (Spin::Up, Spin::Up) => 0,
            (Spin::Up, Spin::Down) => 1,
            (Spin::Down, Spin::Up) => 2,
            (Spin::Down, Spin::Down) => 3,
        }
    }

    pub fn from_index(i: usize) -> Branch {
        Branch::ALL[i]
    }

    pub fn signs(self) -> (f64, f64) {
        (self.a.sign(), self.b.sign())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InteractionMode {
    /// Pointer coupling `g(t) σ_θ (−i ∂/∂r)`: settings differing by `π` are
    /// distinct experiments.
    #[default]
    VonNeumann,
    /// Particle position as pointer: rotating the magnet by `π` leaves the
    /// arrangement unchanged, so angles are identified modulo `π`.
    SternGerlach,
}

/// Reduce an angle to the representative used by `mode`.
///
/// Von Neumann settings are returned untouched. Stern-Gerlach settings are
/// reduced modulo `π` into `(−π/2, π/2]`.
pub fn canonicalize_angle(theta: f64, mode: InteractionMode) -> f64 {
    match mode {
        InteractionMode::VonNeumann => theta,
        InteractionMode::SternGerlach => {
            let k = ((theta - FRAC_PI_2) / PI).ceil();
            theta - k * PI
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSettings {
    pub theta_a: f64,
    pub theta_b: f64,
    pub mode: InteractionMode,
}

impl MeasurementSettings {
    pub fn new(theta_a: f64, theta_b: f64) -> Self {
        MeasurementSettings {
            theta_a,
            theta_b,
            mode: InteractionMode::VonNeumann,
        }
    }

    pub fn with_mode(mut self, mode: InteractionMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.theta_a.is_finite() {
            return Err(Error::invalid("settings.theta_a", "angle must be finite"));
        }
        if !self.theta_b.is_finite() {
            return Err(Error::invalid("settings.theta_b", "angle must be finite"));
        }
        Ok(())
    }

    /// Angles after identification of physically equivalent settings.
    pub fn effective(&self) -> (f64, f64) {
        (
            canonicalize_angle(self.theta_a, self.mode),
            canonicalize_angle(self.theta_b, self.mode),
        )
    }
}

/// Components `⟨θ i | z k⟩` of the rotated basis, rows indexed by `i = +, −`.
pub fn basis_projector(theta: f64) -> [[f64; 2]; 2] {
    let (s, c) = (theta / 2.0).sin_cos();
    [[c, s], [-s, c]]
}

/// Amplitudes `a_ij` of a two-qubit pure state in the `(θ_A, θ_B)` basis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinAmplitudes {
    amps: [Complex64; 4],
}

impl SpinAmplitudes {
    /// Checked constructor; the amplitudes must already have unit norm.
    pub fn new(pp: Complex64, pm: Complex64, mp: Complex64, mm: Complex64) -> Result<Self> {
        let out = SpinAmplitudes {
            amps: [pp, pm, mp, mm],
        };
        let n = out.norm_sqr();
        if (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::invalid(
                "amplitudes",
                format!("squared norm is {n}, expected 1"),
            ));
        }
        Ok(out)
    }

    pub fn from_real(pp: f64, pm: f64, mp: f64, mm: f64) -> Result<Self> {
        Self::new(pp.into(), pm.into(), mp.into(), mm.into())
    }

    /// Scale arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(amps: [Complex64; 4]) -> Result<Self> {
        let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::invalid(
                "amplitudes",
                "state has zero or non-finite norm",
            ));
        }
        Ok(SpinAmplitudes {
            amps: amps.map(|a| a / n),
        })
    }

    pub fn get(&self, branch: Branch) -> Complex64 {
        self.amps[branch.index()]
    }

    pub fn as_array(&self) -> [Complex64; 4] {
        self.amps
    }

    pub fn pp(&self) -> Complex64 {
        self.amps[0]
    }
    pub fn pm(&self) -> Complex64 {
        self.amps[1]
    }
    pub fn mp(&self) -> Complex64 {
        self.amps[2]
    }
    pub fn mm(&self) -> Complex64 {
        self.amps[3]
    }

    /// Branch weights `|a_ij|²`.
    pub fn weights(&self) -> [f64; 4] {
        self.amps.map(|a| a.norm_sqr())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.weights().iter().sum()
    }

    /// Quantum expectation `Σ σ_i σ_j |a_ij|²`.
    pub fn correlation(&self) -> f64 {
        Branch::ALL
            .iter()
            .zip(self.weights())
            .map(|(b, w)| {
                let (sa, sb) = b.signs();
                sa * sb * w
            })
            .sum()
    }

    /// Multiply by a global phase `e^{iφ}`.
    pub fn with_global_phase(&self, phi: f64) -> Self {
        let p = Complex64::from_polar(1.0, phi);
        SpinAmplitudes {
            amps: self.amps.map(|a| a * p),
        }
    }
}

/// Singlet amplitudes in the basis `(θ_A, θ_B)`; they depend only on
/// `δ = θ_B − θ_A` of the effective (mode-canonical) angles.
pub fn singlet_amplitudes(settings: &MeasurementSettings) -> SpinAmplitudes {
    let (ta, tb) = settings.effective();
    let (s, c) = ((tb - ta) / 2.0).sin_cos();
    let s = FRAC_1_SQRT_2 * s;
    let c = FRAC_1_SQRT_2 * c;
    SpinAmplitudes {
        amps: [s.into(), c.into(), (-c).into(), s.into()],
    }
}

/// Real perturbation of the singlet, specified in the `(0, 0)` basis.
///
/// The `+−` and `−+` perturbations share one value so that
/// `ε = √2(ε_{+−} + ε_{+−}*) = √2(ε_{−+} + ε_{−+}*)` holds identically.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PerturbationParams {
    eps_pp: f64,
    eps_cross: f64,
    eps_mm: f64,
}

impl PerturbationParams {
    pub fn new(eps_pp: f64, eps_cross: f64, eps_mm: f64) -> Result<Self> {
        for (name, v) in [
            ("perturbation.eps_pp", eps_pp),
            ("perturbation.eps_cross", eps_cross),
            ("perturbation.eps_mm", eps_mm),
        ] {
            if !v.is_finite() || v.abs() > MAX_PERTURBATION {
                return Err(Error::invalid(
                    name,
                    format!("|{v}| exceeds the perturbative bound {MAX_PERTURBATION}"),
                ));
            }
        }
        Ok(PerturbationParams {
            eps_pp,
            eps_cross,
            eps_mm,
        })
    }

    /// Perturbation with only `ε_{+−} = ε_{−+}` nonzero and the given `ε`.
    pub fn from_epsilon(epsilon: f64) -> Result<Self> {
        Self::new(0.0, epsilon / (2.0 * SQRT_2), 0.0)
    }

    pub fn eps_pp(&self) -> f64 {
        self.eps_pp
    }
    pub fn eps_pm(&self) -> f64 {
        self.eps_cross
    }
    pub fn eps_mp(&self) -> f64 {
        self.eps_cross
    }
    pub fn eps_mm(&self) -> f64 {
        self.eps_mm
    }

    pub fn epsilon(&self) -> f64 {
        2.0 * SQRT_2 * self.eps_cross
    }

    pub fn is_zero(&self) -> bool {
        self.eps_pp == 0.0 && self.eps_cross == 0.0 && self.eps_mm == 0.0
    }
}

/// Express z-basis two-qubit amplitudes in the `(θ_A, θ_B)` basis.
pub fn rotate_amplitudes(z_amps: &[Complex64; 4], theta_a: f64, theta_b: f64) -> [Complex64; 4] {
    let pa = basis_projector(theta_a);
    let pb = basis_projector(theta_b);
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..2 {
                for l in 0..2 {
                    acc += z_amps[2 * k + l] * (pa[i][k] * pb[j][l]);
                }
            }
            out[2 * i + j] = acc;
        }
    }
    out
}

/// Perturbed singlet `(ε_{++}, 1/√2 + ε_{+−}, −1/√2 + ε_{−+}, ε_{−−})` in the
/// `(0, 0)` basis, re-expressed in the basis of `settings` and renormalized.
pub fn perturbed_singlet(
    params: &PerturbationParams,
    settings: &MeasurementSettings,
) -> SpinAmplitudes {
    let base = singlet_amplitudes(settings);
    if params.is_zero() {
        return base;
    }
    let (ta, tb) = settings.effective();
    let eps = [
        params.eps_pp.into(),
        params.eps_cross.into(),
        params.eps_cross.into(),
        params.eps_mm.into(),
    ];
    let d = rotate_amplitudes(&eps, ta, tb);
    let mut amps = base.as_array();
    for (a, e) in amps.iter_mut().zip(d) {
        *a += e;
    }
    // Nonzero for |ε_ij| ≤ 0.2.
    SpinAmplitudes::normalized(amps).expect("perturbed singlet has nonzero norm")
}

/// A two-qubit pure state, from which amplitudes in any setting follow.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PairState {
    Singlet,
    PerturbedSinglet(PerturbationParams),
    /// Unit-norm amplitudes in the z basis (`θ_A = θ_B = 0`).
    Custom([Complex64; 4]),
}

impl PairState {
    pub fn amplitudes(&self, settings: &MeasurementSettings) -> SpinAmplitudes {
        match self {
            PairState::Singlet => singlet_amplitudes(settings),
            PairState::PerturbedSinglet(p) => perturbed_singlet(p, settings),
            PairState::Custom(z) => {
                let (ta, tb) = settings.effective();
                SpinAmplitudes::normalized(rotate_amplitudes(z, ta, tb))
                    .expect("custom state has nonzero norm")
            }
        }
    }
}

/// Single-qubit pure state in the z basis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitState {
    pub up: Complex64,
    pub down: Complex64,
}

impl QubitState {
    pub fn z_plus() -> Self {
        QubitState {
            up: 1.0.into(),
            down: 0.0.into(),
        }
    }

    pub fn x_plus() -> Self {
        QubitState {
            up: FRAC_1_SQRT_2.into(),
            down: FRAC_1_SQRT_2.into(),
        }
    }

    /// Amplitudes `(⟨θ+|ψ⟩, ⟨θ−|ψ⟩)`.
    pub fn in_basis(&self, theta: f64) -> [Complex64; 2] {
        let p = basis_projector(theta);
        [
            self.up * p[0][0] + self.down * p[0][1],
            self.up * p[1][0] + self.down * p[1][1],
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EPS: f64 = 1e-12;

    fn close(a: Complex64, b: f64) -> bool {
        (a - Complex64::new(b, 0.0)).norm() < EPS
    }

    #[test]
    fn singlet_at_origin() {
        let a = singlet_amplitudes(&MeasurementSettings::new(0.0, 0.0));
        assert!(close(a.pp(), 0.0));
        assert!(close(a.pm(), FRAC_1_SQRT_2));
        assert!(close(a.mp(), -FRAC_1_SQRT_2));
        assert!(close(a.mm(), 0.0));
    }

    #[test]
    fn singlet_at_right_angle() {
        let a = singlet_amplitudes(&MeasurementSettings::new(0.0, FRAC_PI_2));
        assert!(close(a.pp(), 0.5));
        assert!(close(a.pm(), 0.5));
        assert!(close(a.mp(), -0.5));
        assert!(close(a.mm(), 0.5));
    }

    #[test]
    fn singlet_equal_angles_is_origin() {
        for theta in [-2.0, 0.3, 1.7, 5.0] {
            let a = singlet_amplitudes(&MeasurementSettings::new(theta, theta));
            assert_eq!(a, singlet_amplitudes(&MeasurementSettings::new(0.0, 0.0)));
        }
    }

    #[test]
    fn closed_form_matches_basis_rotation() {
        let z = [
            0.0.into(),
            FRAC_1_SQRT_2.into(),
            (-FRAC_1_SQRT_2).into(),
            0.0.into(),
        ];
        for (ta, tb) in [(0.0, 0.4), (0.7, -1.1), (2.0, 3.0), (-0.5, 2.5)] {
            let rotated = rotate_amplitudes(&z, ta, tb);
            let closed = singlet_amplitudes(&MeasurementSettings::new(ta, tb));
            for (r, c) in rotated.iter().zip(closed.as_array()) {
                assert!((r - c).norm() < EPS);
            }
        }
    }

    #[test]
    fn zero_perturbation_is_singlet_bitwise() {
        let p = PerturbationParams::new(0.0, 0.0, 0.0).unwrap();
        for (ta, tb) in [(0.0, 0.0), (0.0, PI), (0.3, 1.2)] {
            let s = MeasurementSettings::new(ta, tb);
            assert_eq!(perturbed_singlet(&p, &s), singlet_amplitudes(&s));
        }
    }

    #[test]
    fn epsilon_from_cross_perturbation() {
        let x = 0.05 / (2.0 * SQRT_2);
        let p = PerturbationParams::new(0.0, x, 0.0).unwrap();
        assert!((p.epsilon() - 0.05).abs() < EPS);
        assert_eq!(p.eps_pm(), p.eps_mp());
    }

    #[test]
    fn perturbed_origin_and_opposite_settings() {
        let x = 0.03;
        let p = PerturbationParams::new(0.0, x, 0.0).unwrap();
        let n = (1.0 + 2.0 * x * x).sqrt();
        let a = perturbed_singlet(&p, &MeasurementSettings::new(0.0, 0.0));
        assert!(close(a.pm(), (FRAC_1_SQRT_2 + x) / n));
        assert!(close(a.mp(), (-FRAC_1_SQRT_2 + x) / n));
        let b = perturbed_singlet(&p, &MeasurementSettings::new(0.0, PI));
        assert!(close(b.pp(), (FRAC_1_SQRT_2 + x) / n));
        assert!(close(b.pm(), 0.0));
        assert!(close(b.mp(), 0.0));
        assert!(close(b.mm(), (FRAC_1_SQRT_2 - x) / n));
    }

    #[test]
    fn opposite_setting_with_diagonal_perturbations() {
        let p = PerturbationParams::new(0.02, 0.01, -0.03).unwrap();
        let n = (0.02f64.powi(2)
            + (FRAC_1_SQRT_2 + 0.01).powi(2)
            + (-FRAC_1_SQRT_2 + 0.01).powi(2)
            + 0.03f64.powi(2))
        .sqrt();
        let b = perturbed_singlet(&p, &MeasurementSettings::new(0.0, PI));
        assert!(close(b.pp(), (FRAC_1_SQRT_2 + 0.01) / n));
        assert!(close(b.pm(), -0.02 / n));
        assert!(close(b.mp(), -0.03 / n));
        assert!(close(b.mm(), (FRAC_1_SQRT_2 - 0.01) / n));
    }

    #[test]
    fn perturbation_bound_enforced() {
        assert!(PerturbationParams::new(0.25, 0.0, 0.0).is_err());
        assert!(PerturbationParams::new(0.0, -0.21, 0.0).is_err());
        assert!(PerturbationParams::from_epsilon(0.5).is_ok());
        assert!(PerturbationParams::from_epsilon(0.6).is_err());
    }

    #[test]
    fn canonicalization() {
        let sg = InteractionMode::SternGerlach;
        assert_eq!(canonicalize_angle(PI, sg), 0.0);
        assert_eq!(canonicalize_angle(PI, InteractionMode::VonNeumann), PI);
        assert!((canonicalize_angle(3.0 * PI / 4.0, sg) + PI / 4.0).abs() < EPS);
        assert_eq!(canonicalize_angle(FRAC_PI_2, sg), FRAC_PI_2);
        assert_eq!(canonicalize_angle(-FRAC_PI_2, sg), FRAC_PI_2);
    }

    #[test]
    fn stern_gerlach_identifies_opposite_settings() {
        let sg = MeasurementSettings::new(0.0, PI).with_mode(InteractionMode::SternGerlach);
        assert_eq!(
            singlet_amplitudes(&sg),
            singlet_amplitudes(&MeasurementSettings::new(0.0, 0.0))
        );
    }

    #[test]
    fn unnormalized_amplitudes_rejected() {
        assert!(SpinAmplitudes::from_real(1.0, 1.0, 0.0, 0.0).is_err());
        assert!(SpinAmplitudes::from_real(0.0, 0.0, 0.0, 1.0).is_ok());
    }

    #[test]
    fn single_qubit_projections() {
        let z = QubitState::z_plus();
        let at_pi = z.in_basis(PI);
        assert!(at_pi[0].norm() < EPS);
        assert!((at_pi[1].norm() - 1.0).abs() < EPS);
        let x = QubitState::x_plus().in_basis(0.0);
        assert!((x[0].norm_sqr() - 0.5).abs() < EPS);
    }

    proptest! {
        #[test]
        fn singlet_normalized_and_correlated(ta in -10.0f64..10.0, tb in -10.0f64..10.0) {
            let a = singlet_amplitudes(&MeasurementSettings::new(ta, tb));
            prop_assert!((a.norm_sqr() - 1.0).abs() < NORM_TOLERANCE);
            prop_assert!((a.correlation() + (ta - tb).cos()).abs() < 1e-12);
        }

        #[test]
        fn singlet_depends_only_on_difference(ta in -10.0f64..10.0, tb in -10.0f64..10.0) {
            let a = singlet_amplitudes(&MeasurementSettings::new(ta, tb));
            let b = singlet_amplitudes(&MeasurementSettings::new(0.0, tb - ta));
            prop_assert_eq!(a, b);
        }

        #[test]
        fn perturbed_is_normalized(
            pp in -0.2f64..0.2, x in -0.2f64..0.2, mm in -0.2f64..0.2,
            ta in -4.0f64..4.0, tb in -4.0f64..4.0,
        ) {
            let p = PerturbationParams::new(pp, x, mm).unwrap();
            let a = perturbed_singlet(&p, &MeasurementSettings::new(ta, tb));
            prop_assert!((a.norm_sqr() - 1.0).abs() < NORM_TOLERANCE);
        }

        #[test]
        fn stern_gerlach_range(theta in -50.0f64..50.0) {
            let c = canonicalize_angle(theta, InteractionMode::SternGerlach);
            prop_assert!(c > -FRAC_PI_2 - 1e-12 && c <= FRAC_PI_2 + 1e-12);
            let k = ((theta - c) / PI).round();
            prop_assert!((theta - c - k * PI).abs() < 1e-9);
        }
    }
}
