use std::fmt::Write as _;
use std::io::Write as _;

use serde::Serialize;
use serde_json::{json, Map, Value};
use subquantum::ensemble::{Estimate, Method};
use subquantum::nonlocality::{
    balanced_distribution_search, circle_model_run, entanglement_sweep, joint_transitions,
    nonlocal_bits, outcome_statistics, signal, sweep, Degree, Wing,
};
use subquantum::trajectory::{
    classify_outcome, evolve_exact, evolve_numeric, HiddenVariable, Outcome,
};
use subquantum::verify;

use crate::config::{ConfigError, Format, RunConfig};
use crate::{Command, Failure};

pub fn name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Trajectory { .. } => "trajectory",
        Command::Outcomes { .. } => "outcomes",
        Command::Correlation => "correlation",
        Command::Nonlocality => "nonlocality",
        Command::Signal { .. } => "signal",
        Command::Sweep { .. } => "sweep",
        Command::Entanglement { .. } => "entanglement",
        Command::Circle { .. } => "circle",
        Command::Bits { .. } => "bits",
        Command::SearchBalanced { .. } => "search-balanced",
        Command::Verify { .. } => "verify",
        Command::Keys => "keys",
    }
}

/// Report body in both shapes; `csv` is `None` where a table makes no sense.
struct Output<T: Serialize> {
    json: T,
    csv: Option<String>,
    default: Format,
}

fn emit<T: Serialize>(cfg: &RunConfig, command: &str, out: Output<T>) -> Result<(), Failure> {
    let text = match cfg.output.format.unwrap_or(out.default) {
        Format::Json => {
            let envelope = json!({
                "command": command,
                "version": subquantum::VERSION,
                "config": cfg,
                "result": out.json,
            });
            let mut s = serde_json::to_string_pretty(&envelope)
                .map_err(|e| Failure::Internal(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Csv => out.csv.ok_or_else(|| {
            Failure::from(ConfigError::new(
                "output.format",
                format!("`{command}` has no CSV form"),
            ))
        })?,
    };
    match &cfg.output.path {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Validation(format!("`output.path`: cannot write {path}: {e}"))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Internal(e.to_string())),
    }
}

fn csv(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = format!("{header}\n");
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

fn est(e: Estimate) -> [String; 2] {
    [e.value.to_string(), e.error.to_string()]
}

fn degree_key(d: Degree) -> &'static str {
    match d {
        Degree::Alpha => "alpha",
        Degree::Beta => "beta",
        Degree::AlphaTilde => "alpha_tilde",
        Degree::BetaTilde => "beta_tilde",
    }
}

fn wing_name(w: Wing) -> &'static str {
    match w {
        Wing::A => "A",
        Wing::B => "B",
    }
}

fn sign(o: Outcome) -> &'static str {
    match o {
        Outcome::Plus => "+1",
        Outcome::Minus => "-1",
    }
}

pub fn dispatch(cmd: &Command, name: &str, cfg: &RunConfig) -> Result<(), Failure> {
    let setup = cfg.setup();
    match cmd {
        Command::Trajectory { .. } => {
            let wave = setup.wave(cfg.angles())?;
            let lambda = cfg.lambda();
            let traj = match cfg.trajectory.dt {
                Some(dt) => evolve_numeric(lambda, &wave, dt)?,
                None => evolve_exact(lambda, &wave)?,
            };
            let mut buf = Vec::new();
            traj.write_csv(&mut buf)
                .map_err(|e| Failure::Internal(e.to_string()))?;
            let table = String::from_utf8(buf).map_err(|e| Failure::Internal(e.to_string()))?;
            emit(
                cfg,
                name,
                Output {
                    json: json!({ "lambda": lambda, "trajectory": traj }),
                    csv: Some(table),
                    default: Format::Csv,
                },
            )
        }
        Command::Outcomes { .. } => {
            let wave = setup.wave(cfg.angles())?;
            let k = cfg.outcomes_resolution;
            let h = cfg.packet.half();
            let cell = cfg.packet.width / k as f64;
            let mut rows = Vec::with_capacity(k * k);
            let mut counts = [0usize; 4];
            for i in 0..k {
                for j in 0..k {
                    let l = HiddenVariable::new(
                        -h + (j as f64 + 0.5) * cell,
                        -h + (i as f64 + 0.5) * cell,
                    );
                    let o = classify_outcome(l, &wave)?;
                    counts[usize::from(o.a == Outcome::Minus) * 2
                        + usize::from(o.b == Outcome::Minus)] += 1;
                    rows.push((l, o));
                }
            }
            let total = (k * k) as f64;
            let mut map = Vec::with_capacity(k);
            for row in rows.chunks(k) {
                let mut line = String::with_capacity(3 * k);
                for (_, o) in row {
                    let _ = write!(
                        line,
                        "{}{} ",
                        sign(o.a).chars().next().unwrap(),
                        sign(o.b).chars().next().unwrap()
                    );
                }
                map.push(line.trim_end().to_string());
            }
            let table = csv(
                "r_A,r_B,sigma_A,sigma_B",
                rows.iter().map(|(l, o)| {
                    vec![
                        l.r_a.to_string(),
                        l.r_b.to_string(),
                        sign(o.a).into(),
                        sign(o.b).into(),
                    ]
                }),
            );
            emit(
                cfg,
                name,
                Output {
                    json: json!({
                        "resolution": k,
                        "fractions": {
                            "plus_plus": counts[0] as f64 / total,
                            "plus_minus": counts[1] as f64 / total,
                            "minus_plus": counts[2] as f64 / total,
                            "minus_minus": counts[3] as f64 / total,
                        },
                        "map_rows_from_lowest_r_B": map,
                    }),
                    csv: Some(table),
                    default: Format::Json,
                },
            )
        }
        Command::Correlation => {
            let dist = cfg.distribution()?;
            let angles = cfg.angles();
            let s = outcome_statistics(&setup, angles, &dist, cfg.method)?;
            let quantum = setup.wave(angles)?.amplitudes().correlation();
            let row: Vec<String> = [est(s.p_a_plus), est(s.p_b_plus), est(s.correlation)]
                .concat()
                .into_iter()
                .chain([quantum.to_string()])
                .collect();
            emit(
                cfg,
                name,
                Output {
                    json: json!({ "statistics": s, "quantum_correlation": quantum }),
                    csv: Some(csv(
                        "p_a_plus,p_a_plus_err,p_b_plus,p_b_plus_err,correlation,correlation_err,quantum_correlation",
                        [row],
                    )),
                    default: Format::Json,
                },
            )
        }
        Command::Nonlocality => {
            let shift = cfg.require_shift()?;
            let dist = cfg.distribution()?;
            let j = joint_transitions(&setup, shift, &dist, cfg.method)?;
            let mut result = Map::new();
            result.insert("shift".into(), json!(shift));
            let mut rows = Vec::new();
            for wing in [Wing::A, Wing::B] {
                let r = j.report(wing);
                result.insert(degree_key(r.degree).into(), json!(r.alpha));
                rows.push(
                    [
                        degree_key(r.degree).to_string(),
                        wing_name(wing).to_string(),
                    ]
                    .into_iter()
                    .chain(est(r.alpha))
                    .chain(est(r.nu_plus_minus))
                    .chain(est(r.nu_minus_plus))
                    .collect(),
                );
            }
            result.insert("transitions".into(), json!(j));
            emit(
                cfg,
                name,
                Output {
                    json: Value::Object(result),
                    csv: Some(csv(
                        "degree,observed,value,error,nu_plus_minus,nu_plus_minus_err,nu_minus_plus,nu_minus_plus_err",
                        rows,
                    )),
                    default: Format::Json,
                },
            )
        }
        Command::Signal { .. } => {
            let shift = cfg.require_shift()?;
            let observed = if cfg.signal_observed == "a" {
                Wing::A
            } else {
                Wing::B
            };
            let s = signal(&setup, observed, shift, &cfg.distribution()?, cfg.method)?;
            let row = [est(s.p_plus_before), est(s.p_plus_after), est(s.signal)]
                .concat()
                .to_vec();
            emit(
                cfg,
                name,
                Output {
                    json: json!(s),
                    csv: Some(csv(
                        "p_plus_before,p_plus_before_err,p_plus_after,p_plus_after_err,signal,signal_err",
                        [row],
                    )),
                    default: Format::Json,
                },
            )
        }
        Command::Sweep { .. } => {
            let rows = sweep(
                &setup,
                &cfg.delta_grid()?,
                cfg.sweep.check_bound,
                cfg.method,
            )?;
            let table = csv(
                "delta_rad,alpha,alpha_err,beta_tilde,beta_tilde_err,bound_rhs,gap",
                rows.iter().map(|r| {
                    [r.delta.to_string()]
                        .into_iter()
                        .chain(est(r.alpha))
                        .chain(est(r.beta_tilde))
                        .chain([r.bound.rhs.to_string(), r.bound.gap.to_string()])
                        .collect()
                }),
            );
            emit(
                cfg,
                name,
                Output {
                    json: json!({ "rows": rows }),
                    csv: Some(table),
                    default: Format::Csv,
                },
            )
        }
        Command::Entanglement { .. } => {
            let deltas: Vec<f64> = cfg
                .entanglement
                .deltas
                .iter()
                .map(|d| cfg.rad(*d))
                .collect();
            let s = entanglement_sweep(&setup, &cfg.entanglement.epsilons, &deltas, cfg.method)?;
            let table = csv(
                "epsilon,delta_rad,alpha,alpha_err",
                s.rows.iter().map(|r| {
                    [r.epsilon.to_string(), r.delta.to_string()]
                        .into_iter()
                        .chain(est(r.alpha))
                        .collect()
                }),
            );
            emit(
                cfg,
                name,
                Output {
                    json: json!(s),
                    csv: Some(table),
                    default: Format::Json,
                },
            )
        }
        Command::Circle { .. } => {
            let gamma = match (cfg.circle.gamma, cfg.shift()) {
                (Some(g), _) => cfg.rad(g),
                (None, Some(shift)) => {
                    let before = match shift.shifted {
                        Wing::A => shift.before.theta_a,
                        Wing::B => shift.before.theta_b,
                    };
                    shift.theta_shifted - before
                }
                (None, None) => {
                    return Err(ConfigError::new(
                        "circle.gamma",
                        "set it, or configure a shifted setting",
                    )
                    .into())
                }
            };
            let r = circle_model_run(gamma, &cfg.circle.distribution, cfg.method)?;
            let row = [gamma.to_string()]
                .into_iter()
                .chain(est(r.p_plus_before))
                .chain(est(r.p_plus_after))
                .chain(est(r.nu_plus_minus))
                .chain(est(r.nu_minus_plus))
                .chain(est(r.signal))
                .collect();
            emit(
                cfg,
                name,
                Output {
                    json: json!({ "gamma_equals": if cfg.circle.gamma.is_some() { "circle.gamma" } else { "setting shift" }, "report": r }),
                    csv: Some(csv(
                        "gamma_rad,p_plus_before,p_plus_before_err,p_plus_after,p_plus_after_err,nu_plus_minus,nu_plus_minus_err,nu_minus_plus,nu_minus_plus_err,signal,signal_err",
                        [row],
                    )),
                    default: Format::Json,
                },
            )
        }
        Command::Bits { .. } => {
            let (lo, hi) = (cfg.rad(cfg.bits.lo), cfg.rad(cfg.bits.hi));
            let bits = nonlocal_bits(lo, hi)?;
            emit(
                cfg,
                name,
                Output {
                    json: json!({ "lo_rad": lo, "hi_rad": hi, "bits_per_pair": bits }),
                    csv: Some(csv(
                        "lo_rad,hi_rad,bits_per_pair",
                        [vec![lo.to_string(), hi.to_string(), bits.to_string()]],
                    )),
                    default: Format::Json,
                },
            )
        }
        Command::SearchBalanced { .. } => {
            let seed = match cfg.method {
                Method::MonteCarlo { seed, .. } => seed,
                Method::Grid { .. } => verify::SEED,
            };
            let shifts: Vec<_> = cfg
                .shift()
                .into_iter()
                .chain(verify::random_triples(cfg.search.random, seed))
                .collect();
            let r = balanced_distribution_search(
                &setup,
                &shifts,
                cfg.search.family,
                cfg.search.budget,
                cfg.method,
            )?;
            let table = csv(
                "theta_a,theta_b,shifted_wing,theta_shifted,signal,signal_err",
                r.residuals.iter().map(|s| {
                    [
                        s.shift.before.theta_a.to_string(),
                        s.shift.before.theta_b.to_string(),
                        wing_name(s.shift.shifted).to_string(),
                        s.shift.theta_shifted.to_string(),
                    ]
                    .into_iter()
                    .chain(est(s.signal))
                    .collect()
                }),
            );
            emit(
                cfg,
                name,
                Output {
                    json: json!(r),
                    csv: Some(table),
                    default: Format::Json,
                },
            )
        }
        Command::Verify { .. } => {
            let mut reports = Vec::new();
            for &id in &cfg.verify_ids {
                let r = verify::run_check(id)?;
                eprintln!(
                    "criterion {id:>2} {} {:<36} {:>6.2}s  {}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.title,
                    r.seconds,
                    r.summary()
                );
                reports.push(r);
            }
            let passed = reports.iter().all(|r| r.passed);
            let table = csv(
                "id,title,measurement,value,expected,tolerance,passed",
                reports.iter().flat_map(|r| {
                    r.measurements.iter().map(move |m| {
                        vec![
                            r.id.to_string(),
                            r.title.to_string(),
                            format!("\"{}\"", m.label.replace('"', "\"\"")),
                            m.value.to_string(),
                            m.expected.to_string(),
                            m.tolerance.to_string(),
                            m.passed.to_string(),
                        ]
                    })
                }),
            );
            emit(
                cfg,
                name,
                Output {
                    json: json!({ "passed": passed, "checks": reports }),
                    csv: Some(table),
                    default: Format::Json,
                },
            )?;
            if passed {
                Ok(())
            } else {
                Err(Failure::Acceptance)
            }
        }
        Command::Keys => Ok(()),
    }
}
