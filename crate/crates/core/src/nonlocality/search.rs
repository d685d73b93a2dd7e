//! Exploratory search for nonequilibrium ensembles whose transition sets at
//! A stay balanced, `ν(+,−) = ν(−,+)`, for every supplied shift.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::ensemble::{DistributionKind, EnsembleDistribution, GridWeights, Method};
use crate::error::{Error, Result};
use crate::trajectory::{classify_outcome, HiddenVariable, Outcome};

use super::{signal, Setup, Shift, SignalReport, Wing};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum SearchFamily {
    /// Piecewise-constant weights on `cells × cells` blocks.
    GridWeights { cells: usize },
    /// `ρ ∝ 1 + c r_A` for `c` on a grid of `2·candidates` nonzero values.
    LinearTilt { candidates: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub family: SearchFamily,
    pub distribution: EnsembleDistribution,
    /// Total-variation distance of the candidate from equilibrium.
    pub tv_distance: f64,
    /// Whether the family contains an exactly balanced nonequilibrium member
    /// (up to the resolution of the search grid).
    pub exact_balance: bool,
    /// Signal at A for each shift under the candidate, measured with the
    /// caller's method.
    pub residuals: Vec<SignalReport>,
    pub max_residual: f64,
}

/// `d(λ) = 1[T(−,+)] − 1[T(+,−)]` at A on an `m × m` midpoint grid, one row
/// per shift.
fn signal_fields(setup: &Setup, shifts: &[Shift], m: usize) -> Result<Vec<Vec<f64>>> {
    let h = setup.packet.half();
    let cell = 2.0 * h / m as f64;
    shifts
        .iter()
        .map(|shift| {
            let before = setup.wave(shift.before)?;
            let after = setup.wave(shift.after())?;
            (0..m * m)
                .map(|idx| {
                    let (i, j) = (idx / m, idx % m);
                    let l = HiddenVariable::new(
                        -h + (j as f64 + 0.5) * cell,
                        -h + (i as f64 + 0.5) * cell,
                    );
                    let o0 = classify_outcome(l, &before)?.a == Outcome::Plus;
                    let o1 = classify_outcome(l, &after)?.a == Outcome::Plus;
                    Ok(f64::from(i8::from(o1) - i8::from(o0)))
                })
                .collect()
        })
        .collect()
}

fn grid_weights_candidate(
    setup: &Setup,
    shifts: &[Shift],
    k: usize,
    budget: usize,
) -> Result<(GridWeights, bool)> {
    let s = budget.div_ceil(k).max(1);
    let m = k * s;
    let fields = signal_fields(setup, shifts, m)?;
    let n = k * k;
    // rows: per-block mean signal for each shift, then the normalization row
    let mut a = DMatrix::<f64>::zeros(shifts.len() + 1, n);
    for (t, field) in fields.iter().enumerate() {
        for (idx, d) in field.iter().enumerate() {
            let (i, j) = (idx / m, idx % m);
            a[(t, (i / s) * k + j / s)] += d / (s * s) as f64;
        }
    }
    a.row_mut(shifts.len()).fill(1.0);
    let mut b = DVector::<f64>::zeros(shifts.len() + 1);
    b[shifts.len()] = 1.0;

    // nearest balanced point to uniform, then as far along the most
    // balanced free direction as positivity allows
    let u = DVector::from_element(n, 1.0 / n as f64);
    let correction = a
        .clone()
        .svd(true, true)
        .solve(&(&b - &a * &u), 1e-12)
        .map_err(|e| Error::invalid("search", e.to_string()))?;
    let w0 = u + correction;
    let eig = SymmetricEigen::new(a.transpose() * &a);
    let (imin, lmin) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold(
            (0, f64::INFINITY),
            |b, (i, &l)| if l < b.1 { (i, l) } else { b },
        );
    let z = eig.eigenvectors.column(imin);
    let step = z
        .iter()
        .zip(w0.iter())
        .filter(|(zc, _)| **zc < 0.0)
        .map(|(zc, wc)| wc.max(0.0) / -zc)
        .fold(f64::INFINITY, f64::min);
    if !step.is_finite() {
        return Err(Error::invalid("search", "degenerate search direction"));
    }
    let w = (w0 + z * step).map(|x| x.max(0.0));
    let scale = eig
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, l| acc.max(l.abs()));
    let balanced = (&a * &w - &b).amax() <= 1e-9;
    Ok((
        GridWeights::new(k, k, w.iter().copied().collect())?,
        balanced && lmin <= 1e-12 * scale,
    ))
}

fn tilt_candidate(
    setup: &Setup,
    shifts: &[Shift],
    candidates: usize,
    budget: usize,
) -> Result<f64> {
    let m = budget.max(1);
    let h = setup.packet.half();
    let cell = 2.0 * h / m as f64;
    let fields = signal_fields(setup, shifts, m)?;
    // s_t(c) = s0_t + c g_t, with ρ = (1 + c r_A)/Δ²
    let area = (m * m) as f64;
    let lin: Vec<(f64, f64)> = fields
        .iter()
        .map(|f| {
            f.iter().enumerate().fold((0.0, 0.0), |(s0, g), (idx, d)| {
                let ra = -h + ((idx % m) as f64 + 0.5) * cell;
                (s0 + d / area, g + d * ra / area)
            })
        })
        .collect();
    let c_max = 1.0 / h;
    let k = candidates.max(1) as i64;
    let mut best = (f64::INFINITY, c_max);
    for j in (-k..=k).filter(|j| *j != 0) {
        let c = c_max * j as f64 / k as f64;
        let rms =
            (lin.iter().map(|(s0, g)| (s0 + c * g).powi(2)).sum::<f64>() / lin.len() as f64).sqrt();
        let score = rms / (c.abs() * setup.packet.width / 8.0);
        if score < best.0 {
            best = (score, c);
        }
    }
    Ok(best.1)
}

/// Search `family` for `ρ ≠ ρ_eq` that balances `T_A(+,−)` against
/// `T_A(−,+)` for every shift. `budget` is the resolution per axis of the
/// internal quadrature; residuals are re-measured with `method`.
pub fn balanced_distribution_search(
    setup: &Setup,
    shifts: &[Shift],
    family: SearchFamily,
    budget: usize,
    method: Method,
) -> Result<SearchResult> {
    if budget == 0 {
        return Err(Error::invalid("search.budget", "must be at least 1"));
    }
    if shifts.is_empty() {
        return Ok(SearchResult {
            family,
            distribution: setup.equilibrium(),
            tv_distance: 0.0,
            exact_balance: true,
            residuals: Vec::new(),
            max_residual: 0.0,
        });
    }
    let (kind, tv, exact) = match family {
        SearchFamily::GridWeights { cells } => {
            if cells < 2 {
                return Err(Error::invalid(
                    "search.cells",
                    "need at least 2 cells per axis",
                ));
            }
            let (g, exact) = grid_weights_candidate(setup, shifts, cells, budget)?;
            let u = 1.0 / (cells * cells) as f64;
            let tv = 0.5 * g.weights().iter().map(|w| (w - u).abs()).sum::<f64>();
            (DistributionKind::GridWeights(g), tv, exact)
        }
        SearchFamily::LinearTilt { candidates } => {
            let c = tilt_candidate(setup, shifts, candidates, budget)?;
            (
                DistributionKind::LinearTilt { slope: c },
                c.abs() * setup.packet.width / 8.0,
                false,
            )
        }
    };
    let distribution = EnsembleDistribution::new(kind, setup.packet)?;
    let residuals = shifts
        .iter()
        .map(|s| signal(setup, Wing::A, *s, &distribution, method))
        .collect::<Result<Vec<_>>>()?;
    let max_residual = residuals
        .iter()
        .fold(0.0f64, |m, r| m.max(r.signal.value.abs()));
    Ok(SearchResult {
        family,
        distribution,
        tv_distance: tv,
        exact_balance: exact,
        residuals,
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn empty_list_returns_equilibrium() {
        let setup = Setup::default();
        let r = balanced_distribution_search(
            &setup,
            &[],
            SearchFamily::LinearTilt { candidates: 4 },
            64,
            Method::Grid { m: 10 },
        )
        .unwrap();
        assert!(r.distribution.is_equilibrium() && r.residuals.is_empty());
    }

    #[test]
    fn single_shift_is_balanced_by_grid_weights() {
        let setup = Setup::default();
        let shift = Shift::at_b(0.0, 0.0, FRAC_PI_2);
        let r = balanced_distribution_search(
            &setup,
            &[shift],
            SearchFamily::GridWeights { cells: 8 },
            128,
            Method::Grid { m: 128 },
        )
        .unwrap();
        assert!(r.exact_balance);
        assert!(r.tv_distance > 0.05, "{r:?}");
        assert!(r.max_residual < 1e-9, "{r:?}");
    }

    #[test]
    fn tilt_family_reports_residuals() {
        let setup = Setup::default();
        let shifts = [Shift::at_b(0.0, 0.3, 1.4), Shift::at_b(0.5, -0.2, 0.9)];
        let r = balanced_distribution_search(
            &setup,
            &shifts,
            SearchFamily::LinearTilt { candidates: 4 },
            64,
            Method::Grid { m: 128 },
        )
        .unwrap();
        assert_eq!(r.residuals.len(), 2);
        assert!(!r.distribution.is_equilibrium() && r.tv_distance > 0.0);
    }
}
