//! Flat `section.key = value` configuration, layered as built-in defaults,
//! then the `SUBQUANTUM_SEED` environment variable, then a config file, then
//! command-line flags.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use subquantum::ensemble::{DistributionKind, EnsembleDistribution, GridWeights, Method, Side};
use subquantum::nonlocality::{DiscDistribution, SearchFamily, Setup, Shift};
use subquantum::packet::{Coupling, SquarePacket};
use subquantum::spin::{InteractionMode, PairState, PerturbationParams};
use subquantum::trajectory::HiddenVariable;

pub const SEED_ENV: &str = "SUBQUANTUM_SEED";

/// Every recognised key, its default (empty when unset) and a one-line
/// description. `subquantum keys` prints this table.
pub const KEYS: &[(&str, &str, &str)] = &[
    (
        "settings.units",
        "deg",
        "angle units for every angle key: deg or rad",
    ),
    ("settings.theta_a", "0", "setting at wing A"),
    ("settings.theta_b", "0", "setting at wing B"),
    (
        "settings.theta_a_prime",
        "",
        "shifted setting at A (mutually exclusive with theta_b_prime)",
    ),
    ("settings.theta_b_prime", "", "shifted setting at B"),
    ("coupling.a_a", "1", "pointer coupling strength at A"),
    ("coupling.a_b", "1", "pointer coupling strength at B"),
    ("packet.width", "1", "square packet width"),
    (
        "state.epsilon",
        "0",
        "singlet perturbation; eps_+- = eps_-+ = epsilon/(2 sqrt 2)",
    ),
    (
        "experiment.mode",
        "von-neumann",
        "von-neumann or stern-gerlach",
    ),
    (
        "ensemble.kind",
        "equilibrium",
        "equilibrium, sub-rectangle, half-square, quadrant, linear-tilt, grid-weights, point-mass",
    ),
    (
        "ensemble.side",
        "right",
        "half-square side: left, right, bottom, top",
    ),
    ("ensemble.rect", "", "sub-rectangle a_min,a_max,b_min,b_max"),
    ("ensemble.quadrant", "++", "quadrant signs of r_A and r_B"),
    (
        "ensemble.slope",
        "0",
        "linear-tilt slope c in rho ~ 1 + c r_A",
    ),
    ("ensemble.point", "0,0", "point-mass r_A,r_B"),
    ("ensemble.file", "", "grid-weights file"),
    ("method.kind", "mc", "mc or grid"),
    ("method.n", "1000000", "Monte Carlo sample count"),
    (
        "method.seed",
        "42",
        "Monte Carlo seed (default overridable by SUBQUANTUM_SEED)",
    ),
    ("method.m", "1000", "grid cells per axis"),
    (
        "output.format",
        "",
        "csv or json; each subcommand has its own default",
    ),
    ("output.path", "", "write here instead of stdout"),
    ("trajectory.r_a", "0.1", "initial r_A"),
    ("trajectory.r_b", "-0.2", "initial r_B"),
    (
        "trajectory.dt",
        "",
        "use the fixed-step integrator with this step",
    ),
    ("outcomes.resolution", "40", "outcome map cells per axis"),
    (
        "signal.observed",
        "a",
        "wing whose outcome distribution is compared: a or b",
    ),
    (
        "sweep.delta_grid",
        "0:180:15",
        "start:stop:step, inclusive, in settings.units",
    ),
    (
        "sweep.check_bound",
        "5",
        "bound id 1 to 5 evaluated on each row",
    ),
    (
        "entanglement.epsilons",
        "0.01,0.02,0.03,0.04,0.05",
        "comma-separated epsilon values",
    ),
    (
        "entanglement.deltas",
        "180",
        "comma-separated delta values, in settings.units",
    ),
    (
        "circle.gamma",
        "",
        "diameter rotation; defaults to the configured shift",
    ),
    (
        "circle.distribution",
        "uniform",
        "uniform, upper-half or tilt",
    ),
    ("circle.slope", "0", "tilt slope in rho ~ 1 + slope q"),
    (
        "bits.lo",
        "-180",
        "lower end of the delta range, in settings.units",
    ),
    ("bits.hi", "180", "upper end of the delta range"),
    (
        "search.family",
        "grid-weights",
        "grid-weights or linear-tilt",
    ),
    ("search.cells", "8", "grid-weights blocks per axis"),
    (
        "search.candidates",
        "16",
        "linear-tilt slopes tried on each side of zero",
    ),
    ("search.budget", "128", "internal quadrature cells per axis"),
    (
        "search.random",
        "0",
        "random setting triples added to the configured shift",
    ),
    (
        "verify.ids",
        "all",
        "comma-separated acceptance ids, or all",
    ),
];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`: {}", self.key, self.message)
    }
}

/// Raw `key = value` lines; `#` starts a comment.
pub fn parse_file(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            ConfigError::new(format!("line {}", i + 1), "expected `section.key = value`")
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Default)]
pub struct Layers {
    values: BTreeMap<String, String>,
}

impl Layers {
    pub fn with_defaults() -> Self {
        let values = KEYS
            .iter()
            .map(|(k, v, _)| (k.to_string(), v.to_string()))
            .collect();
        Layers { values }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match self.values.get_mut(key) {
            Some(slot) => {
                *slot = value.to_string();
                Ok(())
            }
            None => Err(ConfigError::new(
                key,
                "unknown key; run `subquantum keys` for the list",
            )),
        }
    }

    fn raw(&self, key: &str) -> &str {
        self.values
            .get(key)
            .map(String::as_str)
            .expect("key is in the table")
    }

    fn opt(&self, key: &str) -> Option<&str> {
        Some(self.raw(key)).filter(|v| !v.is_empty())
    }

    fn num<T: std::str::FromStr>(&self, key: &str) -> Result<T, ConfigError> {
        let v = self.raw(key);
        v.parse()
            .map_err(|_| ConfigError::new(key, format!("cannot parse `{v}` as a number")))
    }

    fn list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        self.raw(key)
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| ConfigError::new(key, format!("cannot parse `{s}` as a number")))
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Deg,
    Rad,
}

impl Units {
    pub fn to_rad(self, x: f64) -> f64 {
        match self {
            Units::Deg => x.to_radians(),
            Units::Rad => x,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Angles are stored in `units`, as given.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SettingsConfig {
    pub units: Units,
    pub theta_a: f64,
    pub theta_b: f64,
    pub theta_a_prime: Option<f64>,
    pub theta_b_prime: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EnsembleConfig {
    Equilibrium,
    SubRectangle {
        a_min: f64,
        a_max: f64,
        b_min: f64,
        b_max: f64,
    },
    HalfSquare {
        side: Side,
    },
    Quadrant {
        a_positive: bool,
        b_positive: bool,
    },
    LinearTilt {
        slope: f64,
    },
    GridWeights {
        file: String,
    },
    PointMass {
        r_a: f64,
        r_b: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutputConfig {
    pub format: Option<Format>,
    pub path: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryConfig {
    pub r_a: f64,
    pub r_b: f64,
    pub dt: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepConfig {
    pub delta_grid: String,
    pub check_bound: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntanglementConfig {
    pub epsilons: Vec<f64>,
    pub deltas: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CircleConfig {
    pub gamma: Option<f64>,
    pub distribution: DiscDistribution,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BitsConfig {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchConfig {
    pub family: SearchFamily,
    pub budget: usize,
    pub random: usize,
}

/// Fully resolved and validated configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub settings: SettingsConfig,
    pub coupling: Coupling,
    pub packet: SquarePacket,
    pub epsilon: f64,
    pub mode: InteractionMode,
    pub ensemble: EnsembleConfig,
    pub method: Method,
    pub output: OutputConfig,
    pub trajectory: TrajectoryConfig,
    pub outcomes_resolution: usize,
    pub signal_observed: String,
    pub sweep: SweepConfig,
    pub entanglement: EntanglementConfig,
    pub circle: CircleConfig,
    pub bits: BitsConfig,
    pub search: SearchConfig,
    pub verify_ids: Vec<u8>,
}

fn core<T>(key: &str, r: subquantum::Result<T>) -> Result<T, ConfigError> {
    r.map_err(|e| ConfigError::new(key, e.to_string()))
}

fn finite(key: &str, x: f64) -> Result<f64, ConfigError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(ConfigError::new(key, format!("must be finite, got {x}")))
    }
}

fn pair(l: &Layers, key: &str) -> Result<(f64, f64), ConfigError> {
    match l.list(key)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(ConfigError::new(
            key,
            "expected two comma-separated numbers",
        )),
    }
}

impl RunConfig {
    pub fn resolve(l: &Layers) -> Result<RunConfig, ConfigError> {
        let units = match l.raw("settings.units") {
            "deg" => Units::Deg,
            "rad" => Units::Rad,
            other => {
                return Err(ConfigError::new(
                    "settings.units",
                    format!("expected deg or rad, got `{other}`"),
                ))
            }
        };
        let angle = |key: &str| -> Result<Option<f64>, ConfigError> {
            l.opt(key).map(|_| finite(key, l.num(key)?)).transpose()
        };
        let settings = SettingsConfig {
            units,
            theta_a: angle("settings.theta_a")?.unwrap_or(0.0),
            theta_b: angle("settings.theta_b")?.unwrap_or(0.0),
            theta_a_prime: angle("settings.theta_a_prime")?,
            theta_b_prime: angle("settings.theta_b_prime")?,
        };
        if settings.theta_a_prime.is_some() && settings.theta_b_prime.is_some() {
            return Err(ConfigError::new(
                "settings.theta_a_prime",
                "only one wing's setting may be shifted",
            ));
        }
        let a_a: f64 = l.num("coupling.a_a")?;
        let a_b: f64 = l.num("coupling.a_b")?;
        let coupling = core(
            if a_a > 0.0 {
                "coupling.a_b"
            } else {
                "coupling.a_a"
            },
            Coupling::new(a_a, a_b),
        )?;
        let packet = core("packet.width", SquarePacket::new(l.num("packet.width")?))?;
        let epsilon: f64 = l.num("state.epsilon")?;
        core("state.epsilon", PerturbationParams::from_epsilon(epsilon))?;
        let mode = match l.raw("experiment.mode") {
            "von-neumann" => InteractionMode::VonNeumann,
            "stern-gerlach" => InteractionMode::SternGerlach,
            other => {
                return Err(ConfigError::new(
                    "experiment.mode",
                    format!("expected von-neumann or stern-gerlach, got `{other}`"),
                ))
            }
        };

        let ensemble = match l.raw("ensemble.kind") {
            "equilibrium" => EnsembleConfig::Equilibrium,
            "sub-rectangle" => match l.list("ensemble.rect")?.as_slice() {
                [a_min, a_max, b_min, b_max] => EnsembleConfig::SubRectangle {
                    a_min: *a_min,
                    a_max: *a_max,
                    b_min: *b_min,
                    b_max: *b_max,
                },
                _ => {
                    return Err(ConfigError::new(
                        "ensemble.rect",
                        "expected a_min,a_max,b_min,b_max",
                    ))
                }
            },
            "half-square" => EnsembleConfig::HalfSquare {
                side: match l.raw("ensemble.side") {
                    "left" => Side::Left,
                    "right" => Side::Right,
                    "bottom" => Side::Bottom,
                    "top" => Side::Top,
                    other => {
                        return Err(ConfigError::new(
                            "ensemble.side",
                            format!("unknown side `{other}`"),
                        ))
                    }
                },
            },
            "quadrant" => {
                let q = l.raw("ensemble.quadrant");
                let sign = |c: Option<char>| match c {
                    Some('+') => Ok(true),
                    Some('-') => Ok(false),
                    _ => Err(ConfigError::new(
                        "ensemble.quadrant",
                        format!("expected two signs like +-, got `{q}`"),
                    )),
                };
                if q.chars().count() != 2 {
                    sign(None)?;
                }
                EnsembleConfig::Quadrant {
                    a_positive: sign(q.chars().next())?,
                    b_positive: sign(q.chars().nth(1))?,
                }
            }
            "linear-tilt" => EnsembleConfig::LinearTilt {
                slope: l.num("ensemble.slope")?,
            },
            "grid-weights" => EnsembleConfig::GridWeights {
                file: l
                    .opt("ensemble.file")
                    .ok_or_else(|| ConfigError::new("ensemble.file", "required for grid-weights"))?
                    .to_string(),
            },
            "point-mass" => {
                let (r_a, r_b) = pair(l, "ensemble.point")?;
                EnsembleConfig::PointMass { r_a, r_b }
            }
            other => {
                return Err(ConfigError::new(
                    "ensemble.kind",
                    format!("unknown ensemble `{other}`"),
                ))
            }
        };

        let method = match l.raw("method.kind") {
            "mc" => Method::MonteCarlo {
                n: l.num("method.n")?,
                seed: l.num("method.seed")?,
            },
            "grid" => Method::Grid {
                m: l.num("method.m")?,
            },
            other => {
                return Err(ConfigError::new(
                    "method.kind",
                    format!("expected mc or grid, got `{other}`"),
                ))
            }
        };
        let method_key = if matches!(method, Method::Grid { .. }) {
            "method.m"
        } else {
            "method.n"
        };
        core(method_key, method.validate())?;

        let format = match l.opt("output.format") {
            None => None,
            Some("csv") => Some(Format::Csv),
            Some("json") => Some(Format::Json),
            Some(other) => {
                return Err(ConfigError::new(
                    "output.format",
                    format!("expected csv or json, got `{other}`"),
                ))
            }
        };

        let dt = l
            .opt("trajectory.dt")
            .map(|_| l.num::<f64>("trajectory.dt"))
            .transpose()?;
        if dt.is_some_and(|d| !(d > 0.0 && d.is_finite())) {
            return Err(ConfigError::new("trajectory.dt", "must be positive"));
        }
        let resolution: usize = l.num("outcomes.resolution")?;
        if resolution == 0 {
            return Err(ConfigError::new(
                "outcomes.resolution",
                "must be at least 1",
            ));
        }
        let observed = l.raw("signal.observed").to_string();
        if observed != "a" && observed != "b" {
            return Err(ConfigError::new("signal.observed", "expected a or b"));
        }

        let check_bound: u8 = l.num("sweep.check_bound")?;
        if !(1..=5).contains(&check_bound) {
            return Err(ConfigError::new(
                "sweep.check_bound",
                format!("must be 1 to 5, got {check_bound}"),
            ));
        }
        let sweep = SweepConfig {
            delta_grid: l.raw("sweep.delta_grid").to_string(),
            check_bound,
        };
        let epsilons = l.list("entanglement.epsilons")?;
        for &e in &epsilons {
            core("entanglement.epsilons", PerturbationParams::from_epsilon(e))?;
        }
        let entanglement = EntanglementConfig {
            epsilons,
            deltas: l.list("entanglement.deltas")?,
        };

        let slope: f64 = l.num("circle.slope")?;
        let distribution = match l.raw("circle.distribution") {
            "uniform" => DiscDistribution::Uniform,
            "upper-half" => DiscDistribution::UpperHalf,
            "tilt" => DiscDistribution::Tilt { slope },
            other => {
                return Err(ConfigError::new(
                    "circle.distribution",
                    format!("unknown disc distribution `{other}`"),
                ))
            }
        };
        core("circle.slope", distribution.validate())?;
        let circle = CircleConfig {
            gamma: angle("circle.gamma")?,
            distribution,
        };
        let bits = BitsConfig {
            lo: finite("bits.lo", l.num("bits.lo")?)?,
            hi: finite("bits.hi", l.num("bits.hi")?)?,
        };
        if bits.hi < bits.lo {
            return Err(ConfigError::new("bits.hi", "must not be below bits.lo"));
        }

        let family = match l.raw("search.family") {
            "grid-weights" => SearchFamily::GridWeights {
                cells: l.num("search.cells")?,
            },
            "linear-tilt" => SearchFamily::LinearTilt {
                candidates: l.num("search.candidates")?,
            },
            other => {
                return Err(ConfigError::new(
                    "search.family",
                    format!("unknown family `{other}`"),
                ))
            }
        };
        if let SearchFamily::GridWeights { cells } = family {
            if cells < 2 {
                return Err(ConfigError::new(
                    "search.cells",
                    "need at least 2 cells per axis",
                ));
            }
        }
        let budget: usize = l.num("search.budget")?;
        if budget == 0 {
            return Err(ConfigError::new("search.budget", "must be at least 1"));
        }
        let search = SearchConfig {
            family,
            budget,
            random: l.num("search.random")?,
        };

        let verify_ids = match l.raw("verify.ids") {
            "all" => (1..=subquantum::verify::CHECK_COUNT).collect(),
            list => list
                .split(',')
                .map(|s| match s.trim().parse::<u8>() {
                    Ok(id) if (1..=subquantum::verify::CHECK_COUNT).contains(&id) => Ok(id),
                    _ => Err(ConfigError::new(
                        "verify.ids",
                        format!("`{s}` is not an acceptance id"),
                    )),
                })
                .collect::<Result<_, _>>()?,
        };

        let cfg = RunConfig {
            settings,
            coupling,
            packet,
            epsilon,
            mode,
            ensemble,
            method,
            output: OutputConfig {
                format,
                path: l.opt("output.path").map(str::to_string),
            },
            trajectory: TrajectoryConfig {
                r_a: finite("trajectory.r_a", l.num("trajectory.r_a")?)?,
                r_b: finite("trajectory.r_b", l.num("trajectory.r_b")?)?,
                dt,
            },
            outcomes_resolution: resolution,
            signal_observed: observed,
            sweep,
            entanglement,
            circle,
            bits,
            search,
            verify_ids,
        };
        cfg.delta_grid()?;
        cfg.distribution()?;
        Ok(cfg)
    }

    pub fn rad(&self, x: f64) -> f64 {
        self.settings.units.to_rad(x)
    }

    pub fn setup(&self) -> Setup {
        let state = if self.epsilon == 0.0 {
            PairState::Singlet
        } else {
            PairState::PerturbedSinglet(
                PerturbationParams::from_epsilon(self.epsilon).expect("validated"),
            )
        };
        Setup {
            state,
            coupling: self.coupling,
            packet: self.packet,
            mode: self.mode,
        }
    }

    pub fn angles(&self) -> subquantum::nonlocality::Angles {
        subquantum::nonlocality::Angles::new(
            self.rad(self.settings.theta_a),
            self.rad(self.settings.theta_b),
        )
    }

    /// The configured setting change, if any.
    pub fn shift(&self) -> Option<Shift> {
        let (a, b) = (
            self.rad(self.settings.theta_a),
            self.rad(self.settings.theta_b),
        );
        match (self.settings.theta_a_prime, self.settings.theta_b_prime) {
            (Some(ap), _) => Some(Shift::at_a(a, b, self.rad(ap))),
            (_, Some(bp)) => Some(Shift::at_b(a, b, self.rad(bp))),
            _ => None,
        }
    }

    pub fn require_shift(&self) -> Result<Shift, ConfigError> {
        self.shift().ok_or_else(|| {
            ConfigError::new(
                "settings.theta_b_prime",
                "a shifted setting (theta_a_prime or theta_b_prime) is required",
            )
        })
    }

    pub fn lambda(&self) -> HiddenVariable {
        HiddenVariable::new(self.trajectory.r_a, self.trajectory.r_b)
    }

    /// `sweep.delta_grid` expanded to radians.
    pub fn delta_grid(&self) -> Result<Vec<f64>, ConfigError> {
        const KEY: &str = "sweep.delta_grid";
        let parts: Vec<f64> = self
            .sweep
            .delta_grid
            .split(':')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| ConfigError::new(KEY, "expected start:stop:step"))?;
        let [start, stop, step] = parts[..] else {
            return Err(ConfigError::new(KEY, "expected start:stop:step"));
        };
        if step.is_nan()
            || step <= 0.0
            || stop.is_nan()
            || stop < start
            || !start.is_finite()
            || !stop.is_finite()
        {
            return Err(ConfigError::new(
                KEY,
                "need finite start ≤ stop and a positive step",
            ));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if count > 100_000 {
            return Err(ConfigError::new(KEY, "more than 100000 grid points"));
        }
        Ok((0..count)
            .map(|i| self.rad(start + i as f64 * step))
            .collect())
    }

    pub fn distribution(&self) -> Result<EnsembleDistribution, ConfigError> {
        let kind = match &self.ensemble {
            EnsembleConfig::Equilibrium => DistributionKind::Equilibrium,
            EnsembleConfig::SubRectangle {
                a_min,
                a_max,
                b_min,
                b_max,
            } => DistributionKind::SubRectangle {
                a_min: *a_min,
                a_max: *a_max,
                b_min: *b_min,
                b_max: *b_max,
            },
            EnsembleConfig::HalfSquare { side } => DistributionKind::HalfSquare { side: *side },
            EnsembleConfig::Quadrant {
                a_positive,
                b_positive,
            } => DistributionKind::Quadrant {
                a_positive: *a_positive,
                b_positive: *b_positive,
            },
            EnsembleConfig::LinearTilt { slope } => DistributionKind::LinearTilt { slope: *slope },
            EnsembleConfig::GridWeights { file } => {
                let text = std::fs::read_to_string(file).map_err(|e| {
                    ConfigError::new("ensemble.file", format!("cannot read {file}: {e}"))
                })?;
                let (grid, width) = core("ensemble.file", GridWeights::parse(&text))?;
                if (width - self.packet.width).abs() > 1e-12 * self.packet.width {
                    return Err(ConfigError::new(
                        "ensemble.file",
                        format!(
                            "grid width {width} differs from packet.width {}",
                            self.packet.width
                        ),
                    ));
                }
                DistributionKind::GridWeights(grid)
            }
            EnsembleConfig::PointMass { r_a, r_b } => {
                DistributionKind::PointMass(HiddenVariable::new(*r_a, *r_b))
            }
        };
        let key = match self.ensemble {
            EnsembleConfig::SubRectangle { .. } => "ensemble.rect",
            EnsembleConfig::LinearTilt { .. } => "ensemble.slope",
            EnsembleConfig::PointMass { .. } => "ensemble.point",
            _ => "ensemble.kind",
        };
        core(key, EnsembleDistribution::new(kind, self.packet))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(pairs: &[(&str, &str)]) -> Result<RunConfig, ConfigError> {
        let mut l = Layers::with_defaults();
        for (k, v) in pairs {
            l.set(k, v)?;
        }
        RunConfig::resolve(&l)
    }

    #[test]
    fn defaults() {
        let c = resolve(&[]).unwrap();
        assert_eq!(c.packet.width, 1.0);
        assert_eq!((c.coupling.a_a, c.coupling.a_b), (1.0, 1.0));
        assert_eq!(
            c.method,
            Method::MonteCarlo {
                n: 1_000_000,
                seed: 42
            }
        );
        assert_eq!(c.mode, InteractionMode::VonNeumann);
        assert_eq!(c.verify_ids.len(), 15);
        assert!(c.shift().is_none());
    }

    #[test]
    fn file_then_flag() {
        let mut l = Layers::with_defaults();
        for (k, v) in parse_file("# couplings\ncoupling.a_b = 0.5\n\n").unwrap() {
            l.set(&k, &v).unwrap();
        }
        assert_eq!(RunConfig::resolve(&l).unwrap().coupling.a_b, 0.5);
        l.set("coupling.a_b", "1").unwrap();
        assert_eq!(RunConfig::resolve(&l).unwrap().coupling.a_b, 1.0);
    }

    #[test]
    fn errors_name_the_key() {
        assert_eq!(
            resolve(&[("packet.width", "-1")]).unwrap_err().key,
            "packet.width"
        );
        assert_eq!(
            resolve(&[("coupling.a_a", "0")]).unwrap_err().key,
            "coupling.a_a"
        );
        assert_eq!(
            resolve(&[("method.kind", "grid"), ("method.m", "0")])
                .unwrap_err()
                .key,
            "method.m"
        );
        assert_eq!(resolve(&[("bogus.key", "1")]).unwrap_err().key, "bogus.key");
        assert_eq!(
            resolve(&[("sweep.delta_grid", "0:10")]).unwrap_err().key,
            "sweep.delta_grid"
        );
        assert!(parse_file("no equals sign").is_err());
    }

    #[test]
    fn degree_grid() {
        let c = resolve(&[]).unwrap();
        let g = c.delta_grid().unwrap();
        assert_eq!(g.len(), 13);
        assert!((g[12] - std::f64::consts::PI).abs() < 1e-15);
        let r = resolve(&[("settings.units", "rad"), ("settings.theta_b_prime", "1.5")]).unwrap();
        assert_eq!(r.shift().unwrap().theta_shifted, 1.5);
    }
}
