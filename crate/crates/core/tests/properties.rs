use std::f64::consts::{FRAC_PI_2, PI};

use subquantum::ensemble::{equilibrium_distribution, Method};
use subquantum::nonlocality::{
    bound_check, joint_transitions, outcome_statistics, Angles, Setup, Shift, Wing,
};
use subquantum::packet::{Coupling, SquarePacket};
use subquantum::spin::InteractionMode;
use subquantum::verify::random_triples;

const GRID: Method = Method::Grid { m: 300 };

#[test]
fn equilibrium_sampler_passes_chi_square() {
    let eq = equilibrium_distribution(SquarePacket::default());
    let n = 100_000;
    let mut bins = [0usize; 100];
    for l in eq.sample(11, n).unwrap().samples {
        let i = ((l.r_a + 0.5) * 10.0) as usize;
        let j = ((l.r_b + 0.5) * 10.0) as usize;
        bins[i * 10 + j] += 1;
    }
    let expected = n as f64 / 100.0;
    let chi2: f64 = bins
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    // upper 0.001 quantile of χ² with 99 degrees of freedom
    assert!(chi2 < 148.23, "χ² = {chi2}");
}

#[test]
fn monte_carlo_and_grid_agree() {
    let setup = Setup::singlet(Coupling::new(1.0, 1.6).unwrap());
    let shift = Shift::at_b(0.4, -0.3, 1.2);
    let eq = setup.equilibrium();
    let mc = joint_transitions(
        &setup,
        shift,
        &eq,
        Method::MonteCarlo {
            n: 200_000,
            seed: 3,
        },
    )
    .unwrap();
    let grid = joint_transitions(&setup, shift, &eq, GRID).unwrap();
    for wing in [Wing::A, Wing::B] {
        let (a, b) = (mc.report(wing).alpha, grid.report(wing).alpha);
        assert!(
            (a.value - b.value).abs() <= 4.0 * a.error + 1e-3,
            "{wing:?}: {a:?} vs {b:?}"
        );
    }
}

#[test]
fn bound_one_holds_for_random_triples() {
    for setup in [
        Setup::default(),
        Setup::singlet(Coupling::new(2.0, 1.0).unwrap()),
    ] {
        for shift in random_triples(50, 17) {
            let delta = shift.theta_shifted - shift.before.theta_b;
            let c = bound_check(
                &setup,
                1,
                shift.before.theta_a,
                shift.before.theta_b,
                delta,
                GRID,
            )
            .unwrap();
            assert!(c.satisfied, "{c:?}");
        }
    }
}

#[test]
fn bounds_three_and_five_hold_on_delta_grid() {
    let setup = Setup::default();
    for k in 0..=12 {
        let delta = PI * k as f64 / 12.0;
        for id in [3, 5] {
            let c = bound_check(&setup, id, 0.0, 0.0, delta, GRID).unwrap();
            assert!(c.satisfied && !c.symmetry_warning, "{c:?}");
        }
    }
}

#[test]
fn exchange_symmetry_with_equal_couplings() {
    let setup = Setup::default();
    let eq = setup.equilibrium();
    for delta in [0.3, FRAC_PI_2, 2.5] {
        let alpha = joint_transitions(&setup, Shift::at_b(0.0, 0.0, delta), &eq, GRID).unwrap();
        let beta = joint_transitions(&setup, Shift::at_a(0.0, 0.0, -delta), &eq, GRID).unwrap();
        let (a, b) = (alpha.report(Wing::A).alpha, beta.report(Wing::B).alpha);
        assert!(
            (a.value - b.value).abs() <= a.error,
            "δ = {delta}: {a:?} vs {b:?}"
        );
    }
}

#[test]
fn estimates_are_reproducible() {
    let setup = Setup::default();
    let eq = setup.equilibrium();
    let m = Method::MonteCarlo {
        n: 50_000,
        seed: 99,
    };
    let a = outcome_statistics(&setup, Angles::new(0.2, 1.1), &eq, m).unwrap();
    let b = outcome_statistics(&setup, Angles::new(0.2, 1.1), &eq, m).unwrap();
    assert_eq!(a, b);
}

#[test]
fn stern_gerlach_identifies_opposite_settings() {
    let setup = Setup {
        mode: InteractionMode::SternGerlach,
        ..Setup::default()
    };
    let eq = setup.equilibrium();
    let j = joint_transitions(
        &setup,
        Shift::at_b(0.0, 0.3, 0.3 + PI),
        &eq,
        Method::Grid { m: 100 },
    )
    .unwrap();
    assert_eq!(j.report(Wing::A).alpha.value, 0.0);
    assert_eq!(j.report(Wing::B).alpha.value, 0.0);
}
