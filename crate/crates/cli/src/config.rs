//! Run configuration: a TOML file with a `[run]` section and one
//! `[sweep.<name>]` section per sweep. Sweep sections are flat key-value
//! tables; which keys are required depends on `kind`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use rwdre::env::{SpinFlipSpec, Window};
use rwdre::estimators::{
    auto_half_width, DiscreteSweep, Domain, EnvKind, ExperimentPlan, JamMethod, JamPlan,
};
use rwdre::walker::WalkerParams;
use rwdre::Seed;

use crate::CliError;

pub const DEFAULT_REPLICAS: u64 = 1000;
pub const DEFAULT_STEPS: u64 = 10_000;
pub const DEFAULT_RANGE_REPLICAS: u64 = 100_000;

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub run: RunSection,
    #[serde(default)]
    pub sweep: BTreeMap<String, SweepConfig>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    /// Relative paths are resolved against the config file's directory.
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    /// Exit with code 4 when any estimate has zero hits.
    #[serde(default)]
    pub fatal_zero_hits: bool,
}

fn default_output_dir() -> String {
    "results".into()
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    SpeedVsP,
    SpeedVsRho,
    Speed,
    RateGrid,
    Slowdown,
    TrafficJam,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Annealed,
    Quenched,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum EnvName {
    Frozen,
    Sse,
    Spinflip,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum FlipName {
    Independent,
    Voter,
    AntiVoter,
    Contact,
    Glauber,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    #[default]
    Graphical,
    Direct,
}

/// One `[sweep.<name>]` section.
#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub kind: Option<SweepKind>,
    pub seed: Option<u64>,
    pub replicas: Option<u64>,
    /// Discrete-time steps.
    pub steps: Option<u64>,
    pub p: Option<f64>,
    pub p_values: Option<Vec<f64>>,
    pub rho: Option<f64>,
    pub rho_values: Option<Vec<f64>>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub env: Option<EnvName>,
    pub flip: Option<FlipName>,
    pub gamma: Option<f64>,
    pub lambda: Option<f64>,
    pub coupling: Option<f64>,
    /// Rate table file, relative to the config file.
    pub flip_table: Option<String>,
    pub horizons: Option<Vec<f64>>,
    pub thetas: Option<Vec<f64>>,
    pub mode: Option<Mode>,
    pub env_seeds: Option<Vec<u64>>,
    pub sites: Option<Vec<i64>>,
    pub method: Option<MethodName>,
    pub range_replicas: Option<u64>,
    pub half_width: Option<usize>,
    pub torus: Option<usize>,
}

/// A sweep with every field checked and defaults applied.
#[derive(Clone, Debug)]
pub enum Resolved {
    Fig {
        sweep: DiscreteSweep,
        /// Swept parameter: `"p"` or `"rho"`.
        key: &'static str,
    },
    Speed(ExperimentPlan),
    Rates {
        plan: ExperimentPlan,
        thetas: Vec<f64>,
        mode: Mode,
        env_seeds: Vec<u64>,
    },
    Slowdown(ExperimentPlan),
    Jam {
        plan: JamPlan,
        horizons: Vec<f64>,
        sites: Vec<i64>,
        method: JamMethod,
        range_replicas: u64,
    },
}

impl Resolved {
    pub fn kind(&self) -> &'static str {
        match self {
            Resolved::Fig { key: "p", .. } => "speed-vs-p",
            Resolved::Fig { .. } => "speed-vs-rho",
            Resolved::Speed(_) => "speed",
            Resolved::Rates { .. } => "rate-grid",
            Resolved::Slowdown(_) => "slowdown",
            Resolved::Jam { .. } => "traffic-jam",
        }
    }

    /// Window the simulation runs on, as recorded in the manifest.
    pub fn window(&self) -> Window {
        match self {
            Resolved::Fig { sweep, .. } => sweep.window(),
            Resolved::Speed(plan) | Resolved::Rates { plan, .. } | Resolved::Slowdown(plan) => {
                plan.window()
            }
            Resolved::Jam {
                plan,
                horizons,
                sites,
                ..
            } => {
                let reach = sites.iter().map(|s| s.unsigned_abs()).max().unwrap_or(0);
                let t_max = horizons.last().copied().unwrap_or(0.0);
                plan.window(reach, t_max).expect("validated domain")
            }
        }
    }

    pub fn points(&self) -> usize {
        match self {
            Resolved::Fig { sweep, .. } => sweep.points.len(),
            Resolved::Speed(plan) | Resolved::Slowdown(plan) => plan.horizons.len(),
            Resolved::Jam { horizons, .. } => horizons.len(),
            Resolved::Rates { plan, thetas, .. } => plan.horizons.len() * thetas.len(),
        }
    }

    pub fn curves(&self) -> usize {
        match self {
            Resolved::Fig { .. } => 4,
            Resolved::Speed(plan) => 1 + matches!(plan.env, EnvKind::Frozen { .. }) as usize,
            Resolved::Jam { .. } => 2,
            Resolved::Rates { .. } | Resolved::Slowdown(_) => 1,
        }
    }

    /// Total number of simulated replicas, walkers or environments.
    pub fn replica_budget(&self) -> u64 {
        match self {
            Resolved::Fig { sweep, .. } => {
                let groups = {
                    let mut rhos: Vec<u64> = sweep.points.iter().map(|p| p.1.to_bits()).collect();
                    rhos.sort_unstable();
                    rhos.dedup();
                    rhos.len() as u64
                };
                sweep.replicas * groups
            }
            Resolved::Speed(plan) | Resolved::Slowdown(plan) => plan.replicas,
            Resolved::Rates {
                plan,
                mode,
                env_seeds,
                ..
            } => match mode {
                Mode::Annealed => plan.replicas,
                Mode::Quenched => plan.replicas * env_seeds.len() as u64,
            },
            Resolved::Jam {
                plan,
                horizons,
                range_replicas,
                ..
            } => plan.replicas * horizons.len() as u64 + range_replicas,
        }
    }
}

fn bad(name: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("sweep '{name}': {msg}"))
}

fn need<T: Clone>(name: &str, field: &str, v: &Option<T>) -> Result<T, CliError> {
    v.clone()
        .ok_or_else(|| bad(name, format!("missing required key '{field}'")))
}

fn forbid(name: &str, kind: &str, fields: &[(&str, bool)]) -> Result<(), CliError> {
    for (field, present) in fields {
        if *present {
            return Err(bad(
                name,
                format!("key '{field}' does not apply to kind '{kind}'"),
            ));
        }
    }
    Ok(())
}

fn check_rho(name: &str, rho: f64) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(bad(name, format!("rho must lie in [0, 1], got {rho}")));
    }
    Ok(())
}

impl SweepConfig {
    fn walker(&self, name: &str) -> Result<WalkerParams, CliError> {
        let (alpha, beta) = (
            need(name, "alpha", &self.alpha)?,
            need(name, "beta", &self.beta)?,
        );
        WalkerParams::continuous(alpha, beta).map_err(|_| {
            bad(
                name,
                format!(
                    "walker rates must satisfy 0 < beta < alpha, got alpha={alpha} beta={beta}"
                ),
            )
        })
    }

    fn env_kind(&self, name: &str, base: &Path) -> Result<EnvKind, CliError> {
        let rho = need(name, "rho", &self.rho)?;
        check_rho(name, rho)?;
        let env = need(name, "env", &self.env)?;
        let flip_keys = [
            ("flip", self.flip.is_some()),
            ("gamma", self.gamma.is_some()),
            ("lambda", self.lambda.is_some()),
            ("coupling", self.coupling.is_some()),
            ("flip_table", self.flip_table.is_some()),
        ];
        Ok(match env {
            EnvName::Frozen => {
                forbid(name, "frozen", &flip_keys)?;
                EnvKind::Frozen { rho }
            }
            EnvName::Sse => {
                forbid(name, "sse", &flip_keys)?;
                EnvKind::Sse { rho }
            }
            EnvName::Spinflip => {
                let spec = match (&self.flip_table, self.flip) {
                    (Some(_), Some(_)) => {
                        return Err(bad(name, "give either 'flip' or 'flip_table'"))
                    }
                    (Some(path), None) => {
                        let full = base.join(path);
                        let text = std::fs::read_to_string(&full).map_err(|e| {
                            bad(name, format!("cannot read {}: {e}", full.display()))
                        })?;
                        SpinFlipSpec::parse_table(&text)
                    }
                    (None, Some(FlipName::Independent)) => SpinFlipSpec::independent_with_density(
                        need(name, "gamma", &self.gamma)?,
                        rho,
                    ),
                    (None, Some(FlipName::Voter)) => Ok(SpinFlipSpec::voter()),
                    (None, Some(FlipName::AntiVoter)) => Ok(SpinFlipSpec::anti_voter()),
                    (None, Some(FlipName::Contact)) => {
                        SpinFlipSpec::contact(need(name, "lambda", &self.lambda)?)
                    }
                    (None, Some(FlipName::Glauber)) => {
                        SpinFlipSpec::glauber(need(name, "coupling", &self.coupling)?)
                    }
                    (None, None) => return Err(bad(name, "spinflip needs 'flip' or 'flip_table'")),
                }
                .map_err(|e| bad(name, e))?;
                EnvKind::SpinFlip { spec, rho }
            }
        })
    }

    fn domain(&self, name: &str) -> Result<Domain, CliError> {
        match (self.half_width, self.torus) {
            (Some(_), Some(_)) => Err(bad(name, "give at most one of 'half_width' and 'torus'")),
            (Some(h), None) => Ok(Domain::HalfWidth(h)),
            (None, Some(l)) => Ok(Domain::PeriodicTorus(l)),
            (None, None) => Ok(Domain::Auto),
        }
    }

    fn plan(&self, name: &str, master: u64, base: &Path) -> Result<ExperimentPlan, CliError> {
        let plan = ExperimentPlan {
            env: self.env_kind(name, base)?,
            walker: self.walker(name)?,
            horizons: need(name, "horizons", &self.horizons)?,
            replicas: self.replicas.unwrap_or(DEFAULT_REPLICAS),
            seed: Seed(self.seed.unwrap_or(master)),
            domain: self.domain(name)?,
        };
        plan.validate().map_err(|e| bad(name, e))?;
        Ok(plan)
    }

    fn fig(
        &self,
        name: &str,
        master: u64,
        points: Vec<(f64, f64)>,
        key: &'static str,
    ) -> Result<Resolved, CliError> {
        let sweep = DiscreteSweep {
            points,
            replicas: self.replicas.unwrap_or(DEFAULT_REPLICAS),
            n_steps: self.steps.unwrap_or(DEFAULT_STEPS),
            seed: Seed(self.seed.unwrap_or(master)),
        };
        sweep.validate().map_err(|e| bad(name, e))?;
        Ok(Resolved::Fig { sweep, key })
    }

    pub fn resolve(&self, name: &str, master: u64, base: &Path) -> Result<Resolved, CliError> {
        let kind = need(name, "kind", &self.kind)?;
        let continuous_only = [
            ("alpha", self.alpha.is_some()),
            ("beta", self.beta.is_some()),
            ("env", self.env.is_some()),
            ("horizons", self.horizons.is_some()),
        ];
        match kind {
            SweepKind::SpeedVsP => {
                forbid(name, "speed-vs-p", &continuous_only)?;
                forbid(
                    name,
                    "speed-vs-p",
                    &[
                        ("p", self.p.is_some()),
                        ("rho_values", self.rho_values.is_some()),
                    ],
                )?;
                let rho = need(name, "rho", &self.rho)?;
                check_rho(name, rho)?;
                let ps = need(name, "p_values", &self.p_values)?;
                self.fig(
                    name,
                    master,
                    ps.into_iter().map(|p| (p, rho)).collect(),
                    "p",
                )
            }
            SweepKind::SpeedVsRho => {
                forbid(name, "speed-vs-rho", &continuous_only)?;
                forbid(
                    name,
                    "speed-vs-rho",
                    &[
                        ("rho", self.rho.is_some()),
                        ("p_values", self.p_values.is_some()),
                    ],
                )?;
                let p = need(name, "p", &self.p)?;
                let rhos = need(name, "rho_values", &self.rho_values)?;
                self.fig(
                    name,
                    master,
                    rhos.into_iter().map(|r| (p, r)).collect(),
                    "rho",
                )
            }
            SweepKind::Speed => Ok(Resolved::Speed(self.plan(name, master, base)?)),
            SweepKind::Slowdown => Ok(Resolved::Slowdown(self.plan(name, master, base)?)),
            SweepKind::RateGrid => {
                let plan = self.plan(name, master, base)?;
                let thetas = need(name, "thetas", &self.thetas)?;
                if thetas.is_empty() {
                    return Err(bad(name, "'thetas' is empty"));
                }
                let mode = self.mode.unwrap_or_default();
                let env_seeds = match mode {
                    Mode::Annealed => {
                        forbid(
                            name,
                            "annealed rate-grid",
                            &[("env_seeds", self.env_seeds.is_some())],
                        )?;
                        Vec::new()
                    }
                    Mode::Quenched => {
                        let seeds = self.env_seeds.clone().ok_or_else(|| {
                            bad(name, "a quenched rate-grid needs an 'env_seeds' list")
                        })?;
                        if seeds.is_empty() {
                            return Err(bad(name, "'env_seeds' is empty"));
                        }
                        seeds
                    }
                };
                Ok(Resolved::Rates {
                    plan,
                    thetas,
                    mode,
                    env_seeds,
                })
            }
            SweepKind::TrafficJam => {
                forbid(
                    name,
                    "traffic-jam",
                    &[
                        ("alpha", self.alpha.is_some()),
                        ("beta", self.beta.is_some()),
                        ("thetas", self.thetas.is_some()),
                    ],
                )?;
                if need(name, "env", &self.env)? != EnvName::Sse {
                    return Err(bad(name, "traffic-jam sweeps need env = \"sse\""));
                }
                let rho = need(name, "rho", &self.rho)?;
                check_rho(name, rho)?;
                let horizons = need(name, "horizons", &self.horizons)?;
                if horizons.is_empty()
                    || horizons.iter().any(|t| !(*t > 0.0 && t.is_finite()))
                    || horizons.windows(2).any(|w| w[1] <= w[0])
                {
                    return Err(bad(
                        name,
                        "horizons must be positive, finite and strictly increasing",
                    ));
                }
                let sites = need(name, "sites", &self.sites)?;
                if sites.is_empty() {
                    return Err(bad(name, "'sites' is empty"));
                }
                let replicas = self.replicas.unwrap_or(DEFAULT_REPLICAS);
                let range_replicas = self.range_replicas.unwrap_or(DEFAULT_RANGE_REPLICAS);
                if replicas == 0 || range_replicas == 0 {
                    return Err(bad(name, "replica counts must be at least 1"));
                }
                let domain = self.domain(name)?;
                if let Domain::PeriodicTorus(0) | Domain::HalfWidth(0) = domain {
                    return Err(bad(name, "empty domain"));
                }
                let plan = JamPlan {
                    rho,
                    replicas,
                    seed: Seed(self.seed.unwrap_or(master)),
                    domain,
                };
                let reach = sites.iter().map(|s| s.unsigned_abs()).max().unwrap_or(0);
                let window = plan
                    .window(reach, *horizons.last().expect("nonempty"))
                    .map_err(|e| bad(name, e))?;
                if let Some(s) = sites.iter().find(|&&s| !window.contains(s)) {
                    return Err(bad(name, format!("site {s} lies outside the window")));
                }
                Ok(Resolved::Jam {
                    plan,
                    horizons,
                    sites,
                    method: match self.method.unwrap_or_default() {
                        MethodName::Graphical => JamMethod::Graphical,
                        MethodName::Direct => JamMethod::Direct,
                    },
                    range_replicas,
                })
            }
        }
    }
}

/// A parsed config together with the directory its relative paths refer to.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub config: Config,
    pub text: String,
    pub base: PathBuf,
    pub sweeps: Vec<(String, Resolved)>,
}

pub fn parse(text: &str, base: &Path) -> Result<Loaded, CliError> {
    let config: Config = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    if config.sweep.is_empty() {
        return Err(CliError::Config(
            "config defines no [sweep.<name>] section".into(),
        ));
    }
    let sweeps = config
        .sweep
        .iter()
        .map(|(name, s)| Ok((name.clone(), s.resolve(name, config.run.seed, base)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Loaded {
        config,
        text: text.to_string(),
        base: base.to_path_buf(),
        sweeps,
    })
}

pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse(&text, &base)
}

/// Half-width the automatic window would use for a continuous plan.
pub fn auto_window_note(plan: &ExperimentPlan) -> Option<usize> {
    matches!(plan.domain, Domain::Auto).then(|| auto_half_width(&plan.walker, plan.t_max()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_str(text: &str) -> Result<Loaded, CliError> {
        parse(text, Path::new("."))
    }

    #[test]
    fn equal_rates_rejected() {
        let err = parse_str(
            "[run]\nseed = 1\n[sweep.s]\nkind = \"speed\"\nenv = \"sse\"\nrho = 0.5\nalpha = 2.0\nbeta = 2.0\nhorizons = [1.0]\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("0 < beta < alpha"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(parse_str("[run]\nseed = 1\n[sweep.s]\nkind = \"speed\"\nbogus = 1\n").is_err());
        assert!(parse_str("[run]\nseed = 1\n").is_err());
    }

    #[test]
    fn quenched_needs_env_seeds() {
        let base = "[run]\nseed = 1\n[sweep.q]\nkind = \"rate-grid\"\nmode = \"quenched\"\nenv = \"sse\"\nrho = 0.5\nalpha = 2.0\nbeta = 1.0\nhorizons = [1.0]\nthetas = [0.5]\n";
        let err = parse_str(base).unwrap_err();
        assert!(err.to_string().contains("env_seeds"), "{err}");
        assert!(parse_str(&format!("{base}env_seeds = [1, 2]\n")).is_ok());
    }

    #[test]
    fn fig_defaults() {
        let l = parse_str(
            "[run]\nseed = 3\n[sweep.f]\nkind = \"speed-vs-p\"\nrho = 0.8\np_values = [0.6, 0.7]\n",
        )
        .unwrap();
        match &l.sweeps[0].1 {
            Resolved::Fig { sweep, key } => {
                assert_eq!(*key, "p");
                assert_eq!(sweep.replicas, DEFAULT_REPLICAS);
                assert_eq!(sweep.n_steps, DEFAULT_STEPS);
                assert_eq!(sweep.seed, Seed(3));
            }
            other => panic!("{other:?}"),
        }
    }
}
