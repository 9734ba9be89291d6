//! Quenched estimators: one environment path, many walkers on it.

use super::plan::{count_parallel, EnvKind, ExperimentPlan};
use super::DeviationEstimate;
use crate::env::{build_sse_schedule, spinflip_schedule, EnvHistory, EventSchedule, Occupancy};
use crate::error::Result;
use crate::rng::{stream, Seed};
use crate::theory::{quenched_symmetry_offset, ModelParams};
use crate::walker::{run_ct, HistoryView, Periodic};

/// Environment path selected by `env_seed`, recorded up to the largest horizon.
pub fn quenched_history(plan: &ExperimentPlan, env_seed: u64) -> Result<EnvHistory> {
    let (env0, schedule) = quenched_schedule(plan, env_seed)?;
    EnvHistory::from_schedule(&env0, &schedule)
}

/// Initial configuration and event schedule behind [`quenched_history`].
pub fn quenched_schedule(
    plan: &ExperimentPlan,
    env_seed: u64,
) -> Result<(Occupancy, EventSchedule)> {
    plan.validate()?;
    let seed = Seed(env_seed);
    let env0 = plan.initial_from(seed)?;
    let (window, t_max) = (plan.window(), plan.t_max());
    let dyn_seed = seed.derive(stream::DYNAMICS);
    let schedule = match &plan.env {
        EnvKind::Frozen { .. } => EventSchedule::empty(window, t_max),
        EnvKind::Sse { .. } => build_sse_schedule(window, t_max, dyn_seed)?,
        EnvKind::SpinFlip { spec, .. } => spinflip_schedule(&env0, spec, t_max, dyn_seed)?,
    };
    Ok((env0, schedule))
}

/// `−(1/t) log P^ξ(X_t = ⌊θ t⌋)` at every horizon for one environment path.
pub fn estimate_quenched_rate(
    plan: &ExperimentPlan,
    theta: f64,
    env_seed: u64,
) -> Result<Vec<DeviationEstimate>> {
    estimate_quenched_rates(plan, &[theta], env_seed)
}

/// Quenched rates for several `θ` from the same walkers, `θ`-major.
/// `plan.replicas` walkers share the path; their seeds come from `plan.seed`.
pub fn estimate_quenched_rates(
    plan: &ExperimentPlan,
    thetas: &[f64],
    env_seed: u64,
) -> Result<Vec<DeviationEstimate>> {
    let hist = quenched_history(plan, env_seed)?;
    let nh = plan.horizons.len();
    let targets: Vec<i64> = thetas
        .iter()
        .flat_map(|&th| plan.horizons.iter().map(move |&t| (th * t).floor() as i64))
        .collect();
    let periodic = plan.periodic();
    let counts = count_parallel(plan.replicas, targets.len(), |i| {
        let mut rng = plan.walker_rng(i);
        let mut out = Vec::with_capacity(nh);
        let mut view = HistoryView::new(&hist);
        if periodic {
            run_ct(
                &mut Periodic(view),
                &plan.walker,
                &plan.horizons,
                &mut rng,
                false,
                &mut out,
            )?;
        } else {
            run_ct(
                &mut view,
                &plan.walker,
                &plan.horizons,
                &mut rng,
                false,
                &mut out,
            )?;
        }
        Ok(targets
            .iter()
            .enumerate()
            .map(|(k, &target)| out[k % nh] == target)
            .collect())
    })?;
    Ok(counts
        .iter()
        .enumerate()
        .map(|(k, &hits)| {
            DeviationEstimate::from_counts(
                thetas[k / nh],
                plan.horizons[k % nh],
                hits,
                plan.replicas,
            )
        })
        .collect())
}

/// `Î(−θ) − Î(θ) − θ (2ρ − 1) log(α/β)` at one horizon.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryResidual {
    pub t: f64,
    pub rate_minus: DeviationEstimate,
    pub rate_plus: DeviationEstimate,
    pub offset: f64,
    /// `±∞` when either rate has no hits.
    pub residual: f64,
    /// Sum of the two rate half-widths.
    pub ci_half_width: f64,
}

impl SymmetryResidual {
    pub fn is_infinite(&self) -> bool {
        self.rate_minus.is_infinite() || self.rate_plus.is_infinite()
    }
}

/// Symmetry residual at every horizon, both signs of `θ` on the same path
/// and the same walkers.
pub fn symmetry_residual(
    plan: &ExperimentPlan,
    theta: f64,
    env_seed: u64,
) -> Result<Vec<SymmetryResidual>> {
    let m = ModelParams::new(plan.walker.alpha, plan.walker.beta, plan.env.rho())?;
    let offset = quenched_symmetry_offset(theta, &m)?;
    let est = estimate_quenched_rates(plan, &[-theta, theta], env_seed)?;
    let nh = plan.horizons.len();
    Ok((0..nh)
        .map(|h| {
            let (minus, plus) = (est[h].clone(), est[nh + h].clone());
            let residual = if minus.is_infinite() {
                f64::INFINITY
            } else if plus.is_infinite() {
                f64::NEG_INFINITY
            } else {
                minus.rate_hat - plus.rate_hat - offset
            };
            SymmetryResidual {
                t: plan.horizons[h],
                ci_half_width: minus.ci_half_width() + plus.ci_half_width(),
                rate_minus: minus,
                rate_plus: plus,
                offset,
                residual,
            }
        })
        .collect())
}
