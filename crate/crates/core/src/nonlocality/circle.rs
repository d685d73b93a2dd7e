//! Toy model: `λ = (p, q)` in the unit disc, `σ_A = +1` on the right of a
//! diameter that starts vertical and is rotated by `γ` about the origin when
//! the distant setting changes. The rotation angle is taken equal to the
//! setting shift.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ensemble::{integrate, Density, Estimate, Method};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DiscDistribution {
    Uniform,
    /// Uniform on `q ≥ 0`.
    UpperHalf,
    /// `ρ ∝ 1 + slope · q`, `|slope| ≤ 1`.
    Tilt {
        slope: f64,
    },
}

impl DiscDistribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DiscDistribution::Tilt { slope } if !(slope.abs() <= 1.0) => Err(Error::invalid(
                "circle.slope",
                format!("|slope| must not exceed 1, got {slope}"),
            )),
            _ => Ok(()),
        }
    }
}

impl Density for DiscDistribution {
    fn half_width(&self) -> f64 {
        1.0
    }

    fn density_at(&self, p: f64, q: f64) -> f64 {
        if p * p + q * q > 1.0 {
            return 0.0;
        }
        match *self {
            DiscDistribution::Uniform => 1.0,
            DiscDistribution::UpperHalf => f64::from(u8::from(q >= 0.0)),
            DiscDistribution::Tilt { slope } => 1.0 + slope * q,
        }
    }

    fn sample_point(&self, seed: u64, index: u64) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let disc = |rng: &mut ChaCha8Rng, span: f64| {
            let r = rng.random::<f64>().sqrt();
            let phi = span * rng.random::<f64>();
            (r * phi.cos(), r * phi.sin())
        };
        match *self {
            DiscDistribution::Uniform => disc(&mut rng, 2.0 * PI),
            DiscDistribution::UpperHalf => disc(&mut rng, PI),
            DiscDistribution::Tilt { slope } => loop {
                let (p, q) = disc(&mut rng, 2.0 * PI);
                if rng.random::<f64>() * (1.0 + slope.abs()) < 1.0 + slope * q {
                    break (p, q);
                }
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleReport {
    pub gamma: f64,
    pub p_plus_before: Estimate,
    pub p_plus_after: Estimate,
    /// `P(+) / P(−)`.
    pub ratio_before: f64,
    pub ratio_after: f64,
    pub nu_plus_minus: Estimate,
    pub nu_minus_plus: Estimate,
    pub changed: Estimate,
    /// `P_after(+) − P_before(+)`.
    pub signal: Estimate,
}

pub fn circle_model_run(
    gamma: f64,
    dist: &DiscDistribution,
    method: Method,
) -> Result<CircleReport> {
    if !(gamma.abs() <= PI) {
        return Err(Error::invalid(
            "circle.gamma",
            format!("|γ| must not exceed π, got {gamma}"),
        ));
    }
    dist.validate()?;
    let (s, c) = gamma.sin_cos();
    let [b, a, pm, mp, ch, sig] = integrate(
        dist,
        |p, q| {
            let before = p >= 0.0;
            let after = p * c + q * s >= 0.0;
            let pm = f64::from(u8::from(before && !after));
            let mp = f64::from(u8::from(!before && after));
            Ok([
                f64::from(u8::from(before)),
                f64::from(u8::from(after)),
                pm,
                mp,
                pm + mp,
                mp - pm,
            ])
        },
        method,
    )?;
    let ratio = |e: Estimate| e.value / (1.0 - e.value);
    Ok(CircleReport {
        gamma,
        p_plus_before: b,
        p_plus_after: a,
        ratio_before: ratio(b),
        ratio_after: ratio(a),
        nu_plus_minus: pm,
        nu_minus_plus: mp,
        changed: ch,
        signal: sig,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_wedges() {
        for gamma in [PI / 12.0, PI / 6.0, PI / 4.0, -0.3] {
            let r = circle_model_run(gamma, &DiscDistribution::Uniform, Method::Grid { m: 1000 })
                .unwrap();
            let nu = gamma.abs() / (2.0 * PI);
            assert!((r.nu_plus_minus.value - nu).abs() < 2e-3, "{r:?}");
            assert!((r.nu_minus_plus.value - nu).abs() < 2e-3);
            assert!((r.ratio_before - 1.0).abs() < 1e-2 && (r.ratio_after - 1.0).abs() < 1e-2);
        }
    }

    #[test]
    fn upper_half_disc_signals() {
        // after: P(+) = ½ + γ/π for 0 ≤ γ ≤ π/2
        let gamma = 0.2;
        let r = circle_model_run(
            gamma,
            &DiscDistribution::UpperHalf,
            Method::MonteCarlo {
                n: 200_000,
                seed: 5,
            },
        )
        .unwrap();
        assert!(r.p_plus_before.within(0.5, 4.0));
        assert!(r.p_plus_after.within(0.5 + gamma / PI, 4.0), "{r:?}");
        assert!(r.ratio_after > 1.0);
    }

    #[test]
    fn tilt_sampling_mean() {
        // E[q] = slope / 4 for ρ ∝ 1 + slope q on the unit disc
        let d = DiscDistribution::Tilt { slope: 0.8 };
        let [m] = integrate(
            &d,
            |_, q| Ok([q]),
            Method::MonteCarlo {
                n: 100_000,
                seed: 9,
            },
        )
        .unwrap();
        assert!(m.within(0.2, 4.0), "{m:?}");
    }

    #[test]
    fn invalid_inputs() {
        assert!(circle_model_run(4.0, &DiscDistribution::Uniform, Method::Grid { m: 10 }).is_err());
        assert!(circle_model_run(
            0.1,
            &DiscDistribution::Tilt { slope: 1.5 },
            Method::Grid { m: 10 }
        )
        .is_err());
    }
}
