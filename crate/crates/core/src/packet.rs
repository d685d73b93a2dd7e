//! Square pointer packets translated rigidly by step-function couplings, the
//! resulting branch densities, and the de Broglie guidance field.
//!
//! With couplings `g_X(t) = a_X θ(t)` the branch `ψ_ij` is the initial packet
//! product displaced to `(s_i h_A(t), s_j h_B(t))`, `h_X(t) = a_X t`. Every
//! branch therefore moves with constant velocity `(s_i a_A, s_j a_B)`, and
//! since all packets have the same height the guidance velocity at a point is
//! the `|a_ij|²`-weighted mean of the velocities of the branches covering it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::{Branch, QubitState, SpinAmplitudes};

/// Branch weights below this are trigonometric round-off (e.g. `cos(π/2)²`)
/// and are treated as absent branches.
pub const WEIGHT_FLOOR: f64 = 1e-20;

/// Step-function coupling strengths `a_A`, `a_B`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub a_a: f64,
    pub a_b: f64,
}

impl Coupling {
    pub fn new(a_a: f64, a_b: f64) -> Result<Self> {
        if !(a_a.is_finite() && a_a > 0.0) {
            return Err(Error::invalid(
                "coupling.a_a",
                format!("must be positive, got {a_a}"),
            ));
        }
        if !(a_b.is_finite() && a_b > 0.0) {
            return Err(Error::invalid(
                "coupling.a_b",
                format!("must be positive, got {a_b}"),
            ));
        }
        Ok(Coupling { a_a, a_b })
    }

    pub fn equal(a: f64) -> Result<Self> {
        Self::new(a, a)
    }

    /// `(h_A(t), h_B(t))`; zero for `t ≤ 0`.
    pub fn displacement(&self, t: f64) -> (f64, f64) {
        let t = t.max(0.0);
        (self.a_a * t, self.a_b * t)
    }

    pub fn is_symmetric(&self) -> bool {
        self.a_a == self.a_b
    }
}

impl Default for Coupling {
    fn default() -> Self {
        Coupling { a_a: 1.0, a_b: 1.0 }
    }
}

/// Square packet `|φ(r)|² = 1/Δ` on the half-open interval `[−Δ/2, Δ/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquarePacket {
    pub width: f64,
}

impl SquarePacket {
    pub fn new(width: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::invalid(
                "packet.width",
                format!("must be positive, got {width}"),
            ));
        }
        Ok(SquarePacket { width })
    }

    pub fn half(&self) -> f64 {
        0.5 * self.width
    }

    pub fn contains(&self, r: f64) -> bool {
        let h = self.half();
        r >= -h && r < h
    }

    pub fn density(&self, r: f64) -> f64 {
        if self.contains(r) {
            1.0 / self.width
        } else {
            0.0
        }
    }
}

impl Default for SquarePacket {
    fn default() -> Self {
        SquarePacket { width: 1.0 }
    }
}

/// A point `(r_A, r_B)` of configuration space at time `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub r_a: f64,
    pub r_b: f64,
    pub t: f64,
}

impl PhasePoint {
    pub fn new(r_a: f64, r_b: f64, t: f64) -> Self {
        PhasePoint { r_a, r_b, t }
    }
}

/// The four displaced branches of the two-pointer wavefunction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PilotWave {
    amplitudes: SpinAmplitudes,
    weights: [f64; 4],
    coupling: Coupling,
    packet: SquarePacket,
}

impl PilotWave {
    pub fn new(amplitudes: SpinAmplitudes, coupling: Coupling, packet: SquarePacket) -> Self {
        let weights = amplitudes
            .weights()
            .map(|w| if w < WEIGHT_FLOOR { 0.0 } else { w });
        PilotWave {
            amplitudes,
            weights,
            coupling,
            packet,
        }
    }

    pub fn amplitudes(&self) -> &SpinAmplitudes {
        &self.amplitudes
    }
    pub fn coupling(&self) -> &Coupling {
        &self.coupling
    }
    pub fn packet(&self) -> &SquarePacket {
        &self.packet
    }
    pub fn weights(&self) -> [f64; 4] {
        self.weights
    }

    /// Bitmask of branches with nonzero amplitude.
    pub fn active_mask(&self) -> u8 {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .fold(0, |m, (i, _)| m | (1 << i))
    }

    pub fn branch_center(&self, branch: Branch, t: f64) -> (f64, f64) {
        let (ha, hb) = self.coupling.displacement(t);
        let (sa, sb) = branch.signs();
        (sa * ha, sb * hb)
    }

    pub fn branch_velocity(&self, branch: Branch) -> (f64, f64) {
        let (sa, sb) = branch.signs();
        (sa * self.coupling.a_a, sb * self.coupling.a_b)
    }

    /// Whether `point` lies in the (half-open) support of a nonzero branch.
    pub fn in_branch(&self, branch: Branch, point: &PhasePoint) -> bool {
        if self.weights[branch.index()] == 0.0 {
            return false;
        }
        let (ca, cb) = self.branch_center(branch, point.t);
        self.packet.contains(point.r_a - ca) && self.packet.contains(point.r_b - cb)
    }

    /// Mask of branches whose support contains `point`.
    pub fn region(&self, point: &PhasePoint) -> u8 {
        Branch::ALL
            .iter()
            .filter(|b| self.in_branch(**b, point))
            .fold(0, |m, b| m | (1 << b.index()))
    }

    /// `|ψ_ij(r_A, r_B, t)|²`.
    pub fn branch_density(&self, point: &PhasePoint, branch: Branch) -> f64 {
        let (ca, cb) = self.branch_center(branch, point.t);
        self.weights[branch.index()]
            * self.packet.density(point.r_a - ca)
            * self.packet.density(point.r_b - cb)
    }

    /// `ρ_eq = Σ_ij |ψ_ij|²`.
    pub fn equilibrium_density(&self, point: &PhasePoint) -> f64 {
        Branch::ALL
            .iter()
            .map(|b| self.branch_density(point, *b))
            .sum()
    }

    /// Guidance velocity `(j_A / ρ_eq, j_B / ρ_eq)`.
    pub fn velocity(&self, point: &PhasePoint) -> Result<(f64, f64)> {
        let mut rho = 0.0;
        let mut ja = 0.0;
        let mut jb = 0.0;
        for b in Branch::ALL {
            let d = self.branch_density(point, b);
            let (sa, sb) = b.signs();
            rho += d;
            ja += sa * d;
            jb += sb * d;
        }
        if rho <= 0.0 {
            return Err(Error::UndefinedVelocity {
                r_a: point.r_a,
                r_b: point.r_b,
                t: point.t,
            });
        }
        Ok((self.coupling.a_a * ja / rho, self.coupling.a_b * jb / rho))
    }

    /// Velocity on the region covered exactly by the branches in `mask`;
    /// `None` for the empty region.
    pub fn mask_velocity(&self, mask: u8) -> Option<(f64, f64)> {
        if mask.count_ones() == 1 {
            return Some(self.branch_velocity(Branch::from_index(mask.trailing_zeros() as usize)));
        }
        let mut rho = 0.0;
        let mut ja = 0.0;
        let mut jb = 0.0;
        for (i, b) in Branch::ALL.iter().enumerate() {
            if mask & (1 << i) != 0 {
                let w = self.weights[i];
                let (sa, sb) = b.signs();
                rho += w;
                ja += sa * w;
                jb += sb * w;
            }
        }
        (rho > 0.0).then(|| (self.coupling.a_a * ja / rho, self.coupling.a_b * jb / rho))
    }

    /// First time at which `h_A` and `h_B` both reach `Δ`; all branch
    /// supports are then pairwise disjoint on both axes.
    pub fn separation_time(&self) -> f64 {
        self.packet.width / self.coupling.a_a.min(self.coupling.a_b)
    }
}

/// Single spin measured along `theta` with pointer Hamiltonian
/// `g θ(t) σ_θ (−i ∂/∂r)`: two branches displaced to `±g t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleSpinWave {
    amplitudes: [Complex64; 2],
    weights: [f64; 2],
    coupling: f64,
    packet: SquarePacket,
}

impl SingleSpinWave {
    pub fn new(
        state: &QubitState,
        theta: f64,
        coupling: f64,
        packet: SquarePacket,
    ) -> Result<Self> {
        if !(coupling.is_finite() && coupling > 0.0) {
            return Err(Error::invalid(
                "coupling.g",
                format!("must be positive, got {coupling}"),
            ));
        }
        let amplitudes = state.in_basis(theta);
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !(norm > 0.0) {
            return Err(Error::invalid("state", "zero norm"));
        }
        let weights = amplitudes.map(|a| {
            let w = a.norm_sqr() / norm;
            if w < WEIGHT_FLOOR {
                0.0
            } else {
                w
            }
        });
        Ok(SingleSpinWave {
            amplitudes,
            weights,
            coupling,
            packet,
        })
    }

    pub fn amplitudes(&self) -> [Complex64; 2] {
        self.amplitudes
    }
    pub fn weights(&self) -> [f64; 2] {
        self.weights
    }
    pub fn coupling(&self) -> f64 {
        self.coupling
    }
    pub fn packet(&self) -> &SquarePacket {
        &self.packet
    }

    /// Branch `0` is spin up (moving to `+∞`), branch `1` spin down.
    pub fn branch_sign(branch: usize) -> f64 {
        if branch == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn in_branch(&self, branch: usize, r: f64, t: f64) -> bool {
        self.weights[branch] > 0.0
            && self
                .packet
                .contains(r - Self::branch_sign(branch) * self.coupling * t.max(0.0))
    }

    pub fn density(&self, r: f64, t: f64) -> f64 {
        (0..2)
            .filter(|&k| self.in_branch(k, r, t))
            .map(|k| self.weights[k] / self.packet.width)
            .sum()
    }

    pub fn velocity(&self, r: f64, t: f64) -> Result<f64> {
        let (mut rho, mut j) = (0.0, 0.0);
        for k in 0..2 {
            if self.in_branch(k, r, t) {
                let d = self.weights[k] / self.packet.width;
                rho += d;
                j += Self::branch_sign(k) * d;
            }
        }
        if rho <= 0.0 {
            return Err(Error::UndefinedVelocity {
                r_a: r,
                r_b: f64::NAN,
                t,
            });
        }
        Ok(self.coupling * j / rho)
    }

    pub fn separation_time(&self) -> f64 {
        self.packet.width / self.coupling
    }
}

/// One-dimensional guidance velocity of the single-spin pointer.
pub fn single_spin_velocity(
    r: f64,
    t: f64,
    state: &QubitState,
    theta: f64,
    coupling: f64,
    packet: SquarePacket,
) -> Result<f64> {
    SingleSpinWave::new(state, theta, coupling, packet)?.velocity(r, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{singlet_amplitudes, MeasurementSettings};
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn wave(delta: f64, a_a: f64, a_b: f64) -> PilotWave {
        PilotWave::new(
            singlet_amplitudes(&MeasurementSettings::new(0.0, delta)),
            Coupling::new(a_a, a_b).unwrap(),
            SquarePacket::default(),
        )
    }

    #[test]
    fn branch_densities_at_origin() {
        let w = wave(0.0, 1.0, 1.0);
        let p = PhasePoint::new(0.0, 0.0, 0.0);
        assert!((w.branch_density(&p, Branch::PM) - 0.5).abs() < 1e-15);
        assert_eq!(w.branch_density(&p, Branch::PP), 0.0);
        let far = PhasePoint::new(3.0, -3.0, 0.0);
        assert_eq!(w.branch_density(&far, Branch::PM), 0.0);
    }

    #[test]
    fn equilibrium_density_initial_square() {
        let w = PilotWave::new(
            singlet_amplitudes(&MeasurementSettings::new(0.0, 1.0)),
            Coupling::default(),
            SquarePacket::new(2.0).unwrap(),
        );
        for (ra, rb) in [(0.0, 0.0), (-1.0, -1.0), (0.9, -0.3)] {
            let d = w.equilibrium_density(&PhasePoint::new(ra, rb, 0.0));
            assert!((d - 0.25).abs() < 1e-14);
        }
        // upper edges are excluded
        assert_eq!(w.equilibrium_density(&PhasePoint::new(1.0, 0.0, 0.0)), 0.0);
        assert_eq!(w.equilibrium_density(&PhasePoint::new(2.0, 2.0, 0.0)), 0.0);
    }

    #[test]
    fn late_time_density_is_four_squares() {
        let w = wave(FRAC_PI_2, 1.0, 1.0);
        let t = 5.0;
        for b in Branch::ALL {
            let (ca, cb) = w.branch_center(b, t);
            let d = w.equilibrium_density(&PhasePoint::new(ca, cb, t));
            assert!((d - 0.25).abs() < 1e-14);
        }
        assert_eq!(w.equilibrium_density(&PhasePoint::new(0.0, 0.0, t)), 0.0);
    }

    #[test]
    fn singlet_overlap_velocities() {
        let w = wave(0.0, 1.0, 1.0);
        // inside both ψ+- and ψ-+
        assert_eq!(
            w.velocity(&PhasePoint::new(0.0, 0.0, 0.1)).unwrap(),
            (0.0, 0.0)
        );
        // inside ψ+- only: centre (0.8, -0.8)
        assert_eq!(
            w.velocity(&PhasePoint::new(0.8, -0.8, 0.8)).unwrap(),
            (1.0, -1.0)
        );
        assert!(matches!(
            w.velocity(&PhasePoint::new(0.0, 0.0, 2.0)),
            Err(Error::UndefinedVelocity { .. })
        ));
    }

    #[test]
    fn tilted_velocity_where_two_branches_overlap() {
        let delta = 1.0;
        let w = wave(delta, 1.0, 1.0);
        // t = 0.3: ψ++ centred (0.3, 0.3), ψ+- centred (0.3, -0.3); both cover
        // (0.6, 0) while ψ-+ and ψ-- do not.
        let p = PhasePoint::new(0.6, 0.0, 0.3);
        assert_eq!(w.region(&p), 0b0011);
        let (va, vb) = w.velocity(&p).unwrap();
        assert!((va - 1.0).abs() < 1e-14);
        assert!((vb + delta.cos()).abs() < 1e-14);
    }

    #[test]
    fn velocity_matches_mask_velocity() {
        let w = wave(0.7, 2.0, 1.0);
        for (ra, rb, t) in [(0.1, 0.2, 0.05), (0.5, -0.4, 0.3), (-0.9, 0.3, 0.4)] {
            let p = PhasePoint::new(ra, rb, t);
            let (va, vb) = w.velocity(&p).unwrap();
            let (ma, mb) = w.mask_velocity(w.region(&p)).unwrap();
            assert!((va - ma).abs() < 1e-14 && (vb - mb).abs() < 1e-14);
        }
    }

    #[test]
    fn density_integrates_to_one() {
        let w = wave(1.2, 1.0, 0.5);
        for t in [0.0, 0.3, 0.7, 2.5] {
            // midpoint rule on cells aligned with every packet edge
            let n = 560;
            let half = 3.5;
            let h = 2.0 * half / n as f64;
            let mut total = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let ra = -half + (i as f64 + 0.5) * h;
                    let rb = -half + (j as f64 + 0.5) * h;
                    total += w.equilibrium_density(&PhasePoint::new(ra, rb, t));
                }
            }
            assert!(
                (total * h * h - 1.0).abs() < 1e-6,
                "t = {t}: {}",
                total * h * h
            );
        }
    }

    #[test]
    fn single_spin_velocities() {
        let packet = SquarePacket::default();
        let z = QubitState::z_plus();
        assert_eq!(
            single_spin_velocity(0.2, 0.1, &z, 0.0, 1.5, packet).unwrap(),
            1.5
        );
        assert_eq!(
            single_spin_velocity(-0.2, 0.1, &z, PI, 1.5, packet).unwrap(),
            -1.5
        );
        let x = QubitState::x_plus();
        let v = single_spin_velocity(0.0, 0.1, &x, 0.0, 1.0, packet).unwrap();
        assert!(v.abs() < 1e-15);
        assert!(single_spin_velocity(5.0, 0.1, &x, 0.0, 1.0, packet).is_err());
    }

    #[test]
    fn invalid_parameters() {
        assert!(Coupling::new(0.0, 1.0).is_err());
        assert!(Coupling::new(1.0, -2.0).is_err());
        assert!(SquarePacket::new(-1.0).is_err());
        assert!(SquarePacket::new(f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn velocity_phase_independent(
            delta in -3.0f64..3.0, phi in 0.0f64..6.3,
            ra in -0.5f64..0.5, rb in -0.5f64..0.5, t in 0.0f64..0.9,
        ) {
            let amps = singlet_amplitudes(&MeasurementSettings::new(0.0, delta));
            let c = Coupling::new(1.0, 1.3).unwrap();
            let w1 = PilotWave::new(amps, c, SquarePacket::default());
            let w2 = PilotWave::new(amps.with_global_phase(phi), c, SquarePacket::default());
            let p = PhasePoint::new(ra, rb, t);
            match (w1.velocity(&p), w2.velocity(&p)) {
                (Ok(a), Ok(b)) => {
                    prop_assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
                }
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "support differs under a global phase"),
            }
        }

        #[test]
        fn velocity_is_bounded_by_couplings(
            delta in -3.0f64..3.0, ra in -1.5f64..1.5, rb in -1.5f64..1.5, t in 0.0f64..1.0,
        ) {
            let w = wave(delta, 2.0, 0.7);
            if let Ok((va, vb)) = w.velocity(&PhasePoint::new(ra, rb, t)) {
                prop_assert!(va.abs() <= 2.0 + 1e-12);
                prop_assert!(vb.abs() <= 0.7 + 1e-12);
            }
        }
    }
}
