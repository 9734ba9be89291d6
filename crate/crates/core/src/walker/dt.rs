use super::{WalkerParams, WalkerPath};
use crate::env::{DiscreteExclusion, Occupancy};
use crate::error::{invalid, Result};
use crate::rng::{unit, Seed, SimRng};

/// A discrete-time environment sequence `ξ_0, ξ_1, ...`.
pub trait DiscreteEnvironment {
    /// State of `site` in the current configuration. Environments that resample
    /// on every query draw from `rng`.
    fn occupied(&mut self, site: i64, rng: &mut SimRng) -> Result<bool>;

    /// Moves to the next configuration.
    fn step(&mut self);
}

/// The initial configuration held fixed.
#[derive(Clone, Debug)]
pub struct StaticDiscrete(pub Occupancy);

impl DiscreteEnvironment for StaticDiscrete {
    #[inline]
    fn occupied(&mut self, site: i64, _rng: &mut SimRng) -> Result<bool> {
        self.0.get(site)
    }

    fn step(&mut self) {}
}

impl DiscreteEnvironment for DiscreteExclusion {
    #[inline]
    fn occupied(&mut self, site: i64, _rng: &mut SimRng) -> Result<bool> {
        DiscreteExclusion::occupied(self, site)
    }

    fn step(&mut self) {
        DiscreteExclusion::step(self)
    }
}

/// Fresh Bernoulli(`rho`) state at every query: the averaged environment.
#[derive(Clone, Copy, Debug)]
pub struct AveragedEnvironment {
    pub rho: f64,
}

impl DiscreteEnvironment for AveragedEnvironment {
    #[inline]
    fn occupied(&mut self, _site: i64, rng: &mut SimRng) -> Result<bool> {
        Ok(unit(rng) < self.rho)
    }

    fn step(&mut self) {}
}

/// Position after `n_steps` steps: the walker reads `ξ_n(X_n)`, jumps, then
/// the environment moves to `ξ_{n+1}`.
pub fn run_dt<E: DiscreteEnvironment + ?Sized>(
    env: &mut E,
    params: &WalkerParams,
    n_steps: u64,
    rng: &mut SimRng,
) -> Result<i64> {
    let mut x = 0i64;
    for _ in 0..n_steps {
        let occ = env.occupied(x, rng)?;
        x += if unit(rng) < params.step_prob(occ) {
            1
        } else {
            -1
        };
        env.step();
    }
    Ok(x)
}

/// Several walkers sharing one environment sequence, one walker per entry of
/// `ps`, each with its own random stream from `seeds`.
pub fn run_dt_lockstep<E: DiscreteEnvironment + ?Sized>(
    env: &mut E,
    ps: &[f64],
    n_steps: u64,
    seeds: &[Seed],
) -> Result<Vec<i64>> {
    if ps.len() != seeds.len() {
        return Err(invalid("one seed per walker is required"));
    }
    let params = ps
        .iter()
        .map(|&p| WalkerParams::discrete(p))
        .collect::<Result<Vec<_>>>()?;
    let mut rngs: Vec<SimRng> = seeds.iter().map(|s| s.rng()).collect();
    let mut xs = vec![0i64; ps.len()];
    for _ in 0..n_steps {
        for ((x, w), rng) in xs.iter_mut().zip(&params).zip(rngs.iter_mut()) {
            let occ = env.occupied(*x, rng)?;
            *x += if unit(rng) < w.step_prob(occ) { 1 } else { -1 };
        }
        env.step();
    }
    Ok(xs)
}

/// Recorded discrete-time trajectory; step `n` happens at time `n + 1`.
pub fn simulate_dt<E: DiscreteEnvironment + ?Sized>(
    env: &mut E,
    params: &WalkerParams,
    n_steps: u64,
    seed: Seed,
) -> Result<WalkerPath> {
    params.validate_discrete()?;
    let mut rng = seed.rng();
    let mut x = 0i64;
    let first = env.occupied(0, &mut rng)?;
    let mut path = WalkerPath::start(0.0, first);
    let mut occ = first;
    for n in 0..n_steps {
        path.occupied_time += occ as u8 as f64;
        x += if unit(&mut rng) < params.step_prob(occ) {
            1
        } else {
            -1
        };
        env.step();
        occ = env.occupied(x, &mut rng)?;
        path.push((n + 1) as f64, x, occ);
    }
    path.t_end = n_steps as f64;
    Ok(path)
}
