use rayon::prelude::*;

use crate::env::{
    bernoulli_init, Boundary, Occupancy, SpinFlipDynamics, SpinFlipSpec, SseDynamics, Window,
};
use crate::error::{invalid, Result};
use crate::rng::{stream, Seed, SimRng};
use crate::walker::{run_ct, CtSummary, Environment, FrozenEnv, WalkerParams};

/// Environment law of a replica: Bernoulli(`rho`) initial configuration,
/// then no dynamics, exclusion, or a spin-flip system.
#[derive(Clone, Debug, PartialEq)]
pub enum EnvKind {
    Frozen { rho: f64 },
    Sse { rho: f64 },
    SpinFlip { spec: SpinFlipSpec, rho: f64 },
}

impl EnvKind {
    pub fn rho(&self) -> f64 {
        match self {
            EnvKind::Frozen { rho } | EnvKind::Sse { rho } | EnvKind::SpinFlip { rho, .. } => *rho,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EnvKind::Frozen { .. } => "frozen",
            EnvKind::Sse { .. } => "sse",
            EnvKind::SpinFlip { .. } => "spinflip",
        }
    }
}

/// Where the environment lives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    /// Torus `[-h, h]` with `h` from [`auto_half_width`]; leaving it is an error.
    Auto,
    /// Torus `[-h, h]`; leaving it is an error.
    HalfWidth(usize),
    /// Torus `{0, ..., L-1}` read periodically by the walker, for comparisons
    /// with exact finite-torus computations.
    PeriodicTorus(usize),
}

/// Half-width that contains the walker up to `t_max` except with negligible
/// probability: drift bound `(α − β) t`, ten standard deviations of the jump
/// noise, and the `4 √(t log t)` margin for the environment.
pub fn auto_half_width(walker: &WalkerParams, t_max: f64) -> usize {
    let t = t_max.max(0.0);
    let spread = 10.0 * (walker.total_rate() * t).sqrt();
    let margin = 4.0 * (t * t.ln().max(0.0)).sqrt();
    ((walker.alpha - walker.beta) * t + spread + margin).ceil() as usize + 16
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentPlan {
    pub env: EnvKind,
    pub walker: WalkerParams,
    /// Strictly increasing observation times.
    pub horizons: Vec<f64>,
    pub replicas: u64,
    pub seed: Seed,
    pub domain: Domain,
}

impl ExperimentPlan {
    pub fn new(
        env: EnvKind,
        walker: WalkerParams,
        horizons: Vec<f64>,
        replicas: u64,
        seed: u64,
    ) -> Self {
        ExperimentPlan {
            env,
            walker,
            horizons,
            replicas,
            seed: Seed(seed),
            domain: Domain::Auto,
        }
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.walker.validate_continuous()?;
        let rho = self.env.rho();
        if !(0.0..=1.0).contains(&rho) {
            return Err(invalid(format!("rho must lie in [0, 1], got {rho}")));
        }
        if self.horizons.is_empty() {
            return Err(invalid("horizon grid is empty"));
        }
        if !(self.horizons[0] > 0.0 && self.horizons.iter().all(|t| t.is_finite())) {
            return Err(invalid("horizons must be positive and finite"));
        }
        if self.horizons.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("horizon grid must be strictly increasing"));
        }
        if self.replicas == 0 {
            return Err(invalid("need at least one replica"));
        }
        if let (EnvKind::SpinFlip { spec, .. }, Domain::PeriodicTorus(len)) =
            (&self.env, self.domain)
        {
            if len < spec.width() {
                return Err(invalid("torus shorter than the flip neighbourhood"));
            }
        }
        if let Domain::PeriodicTorus(0) | Domain::HalfWidth(0) = self.domain {
            return Err(invalid("empty domain"));
        }
        Ok(())
    }

    pub fn t_max(&self) -> f64 {
        *self.horizons.last().expect("validated plans have horizons")
    }

    pub fn window(&self) -> Window {
        match self.domain {
            Domain::Auto => {
                Window::centered(auto_half_width(&self.walker, self.t_max()), Boundary::Torus)
            }
            Domain::HalfWidth(h) => Window::centered(h, Boundary::Torus),
            Domain::PeriodicTorus(len) => Window::torus(len).expect("validated length"),
        }
    }

    pub fn periodic(&self) -> bool {
        matches!(self.domain, Domain::PeriodicTorus(_))
    }

    /// Initial configuration of replica `i`.
    pub fn initial(&self, i: u64) -> Result<Occupancy> {
        self.initial_from(self.seed.replica(i))
    }

    pub(crate) fn initial_from(&self, replica: Seed) -> Result<Occupancy> {
        bernoulli_init(
            self.env.rho(),
            self.window(),
            replica.derive(stream::ENVIRONMENT),
        )
    }

    /// Environment of replica `i`, started at time 0.
    pub fn replica_env(&self, i: u64) -> Result<ReplicaEnv> {
        let replica = self.seed.replica(i);
        let occ = self.initial_from(replica)?;
        let dyn_seed = replica.derive(stream::DYNAMICS);
        let inner = match &self.env {
            EnvKind::Frozen { .. } => Inner::Frozen(FrozenEnv::new(occ)),
            EnvKind::Sse { .. } => Inner::Sse(SseDynamics::new(occ, dyn_seed)),
            EnvKind::SpinFlip { spec, .. } => {
                Inner::SpinFlip(SpinFlipDynamics::new(occ, spec.clone(), dyn_seed)?)
            }
        };
        Ok(ReplicaEnv {
            inner,
            periodic: self.periodic(),
        })
    }

    pub(crate) fn walker_rng(&self, i: u64) -> SimRng {
        self.seed.replica(i).derive(stream::WALKER).rng()
    }

    /// Runs replica `i` and returns its positions at the horizons.
    pub fn run_replica(&self, i: u64, track_occupation: bool) -> Result<(Vec<i64>, CtSummary)> {
        let mut env = self.replica_env(i)?;
        let mut rng = self.walker_rng(i);
        let mut out = Vec::with_capacity(self.horizons.len());
        let summary = run_ct(
            &mut env,
            &self.walker,
            &self.horizons,
            &mut rng,
            track_occupation,
            &mut out,
        )?;
        Ok((out, summary))
    }

    /// Positions of every replica at every horizon, in replica order.
    pub fn positions(&self) -> Result<Vec<Vec<i64>>> {
        self.validate()?;
        (0..self.replicas)
            .into_par_iter()
            .map(|i| self.run_replica(i, false).map(|(x, _)| x))
            .collect()
    }

    /// Number of replicas for which `event(k, x)` holds, for every `k` in
    /// `0..n_events`, where `x` holds the positions at the horizons. Integer
    /// counts make the reduction independent of scheduling.
    pub fn count_events<F>(&self, n_events: usize, event: F) -> Result<Vec<u64>>
    where
        F: Fn(usize, &[i64]) -> bool + Sync,
    {
        self.validate()?;
        count_parallel(self.replicas, n_events, |i| {
            let (x, _) = self.run_replica(i, false)?;
            Ok((0..n_events).map(|k| event(k, &x)).collect())
        })
    }
}

/// Sums per-item indicator vectors over `0..n` in parallel.
pub(crate) fn count_parallel<F>(n: u64, width: usize, f: F) -> Result<Vec<u64>>
where
    F: Fn(u64) -> Result<Vec<bool>> + Sync,
{
    (0..n)
        .into_par_iter()
        .map(|i| f(i).map(|hits| hits.into_iter().map(u64::from).collect::<Vec<u64>>()))
        .try_reduce(
            || vec![0; width],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )
}

#[derive(Clone, Debug)]
enum Inner {
    Frozen(FrozenEnv),
    Sse(SseDynamics),
    SpinFlip(SpinFlipDynamics),
}

/// The environment of one replica, as built by [`ExperimentPlan::replica_env`].
#[derive(Clone, Debug)]
pub struct ReplicaEnv {
    inner: Inner,
    periodic: bool,
}

impl ReplicaEnv {
    pub fn occupancy(&self) -> &Occupancy {
        match &self.inner {
            Inner::Frozen(e) => e.occupancy(),
            Inner::Sse(e) => e.occupancy(),
            Inner::SpinFlip(e) => e.occupancy(),
        }
    }
}

impl Environment for ReplicaEnv {
    fn window(&self) -> Window {
        self.occupancy().window()
    }

    fn time(&self) -> f64 {
        self.occupancy().time()
    }

    fn advance(&mut self, t: f64, watch: &[usize], acc: &mut [f64]) -> Result<()> {
        match &mut self.inner {
            Inner::Frozen(e) => e.advance(t, watch, acc),
            Inner::Sse(e) => e.advance_watching(t, watch, acc),
            Inner::SpinFlip(e) => e.advance_watching(t, watch, acc),
        }
    }

    #[inline]
    fn cell(&self, i: usize) -> bool {
        self.occupancy().cells()[i] == 1
    }

    #[inline]
    fn locate(&self, site: i64) -> Result<usize> {
        let w = self.occupancy().window();
        if self.periodic {
            Ok(w.wrapped_index(site))
        } else {
            w.index(site)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan() -> ExperimentPlan {
        ExperimentPlan::new(
            EnvKind::Sse { rho: 0.5 },
            WalkerParams::continuous(2.0, 1.0).unwrap(),
            vec![1.0, 2.0],
            20,
            9,
        )
    }

    #[test]
    fn validation() {
        assert!(plan().validate().is_ok());
        let mut p = plan();
        p.horizons = vec![2.0, 2.0];
        assert!(p.validate().is_err());
        let mut p = plan();
        p.replicas = 0;
        assert!(p.validate().is_err());
        let mut p = plan();
        p.env = EnvKind::Frozen { rho: 1.5 };
        assert!(p.validate().is_err());
    }

    #[test]
    fn replicas_are_reproducible_and_distinct() {
        let p = plan();
        let a = p.positions().unwrap();
        assert_eq!(a, p.positions().unwrap());
        assert_eq!(a[3], p.run_replica(3, false).unwrap().0);
        assert!(a.iter().any(|x| x != &a[0]));
    }

    #[test]
    fn counts_match_positions() {
        let p = plan();
        let xs = p.positions().unwrap();
        let counts = p.count_events(2, |k, x| x[k] > 0).unwrap();
        for k in 0..2 {
            assert_eq!(counts[k], xs.iter().filter(|x| x[k] > 0).count() as u64);
        }
    }

    #[test]
    fn periodic_domain_wraps() {
        let p = plan().with_domain(Domain::PeriodicTorus(3));
        assert_eq!(p.window().len, 3);
        let env = p.replica_env(0).unwrap();
        assert_eq!(env.locate(-1).unwrap(), 2);
        assert!(plan().replica_env(0).unwrap().locate(1 << 40).is_err());
    }
}
