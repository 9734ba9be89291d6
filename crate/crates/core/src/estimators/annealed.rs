//! Annealed estimators: every replica draws a fresh environment and walker.

use rayon::prelude::*;

use super::plan::ExperimentPlan;
use super::{mean_stderr, DeviationEstimate, SpeedEstimate};
use crate::error::Result;

/// Speed `X_t / t` at the largest horizon.
pub fn estimate_speed(plan: &ExperimentPlan) -> Result<SpeedEstimate> {
    Ok(*estimate_speed_curve(plan)?
        .last()
        .expect("validated plans have horizons"))
}

/// Speed estimate at every horizon from the same replicas.
pub fn estimate_speed_curve(plan: &ExperimentPlan) -> Result<Vec<SpeedEstimate>> {
    let xs = plan.positions()?;
    Ok(plan
        .horizons
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let v: Vec<f64> = xs.iter().map(|x| x[k] as f64 / t).collect();
            let (v_hat, stderr) = mean_stderr(&v);
            SpeedEstimate {
                v_hat,
                stderr,
                t,
                n_replicas: plan.replicas,
            }
        })
        .collect())
}

/// `−(1/t) log P(X_t ≥ θ t)` at every horizon.
pub fn estimate_upper_rate(plan: &ExperimentPlan, theta: f64) -> Result<Vec<DeviationEstimate>> {
    estimate_upper_rates(plan, &[theta])
}

/// Upper rates for several `θ` from shared replicas, `θ`-major. For a fixed
/// horizon the hit set shrinks as `θ` grows, so the estimates are monotone.
pub fn estimate_upper_rates(
    plan: &ExperimentPlan,
    thetas: &[f64],
) -> Result<Vec<DeviationEstimate>> {
    let nh = plan.horizons.len();
    let counts = plan.count_events(thetas.len() * nh, |k, x| {
        let (j, h) = (k / nh, k % nh);
        x[h] as f64 >= thetas[j] * plan.horizons[h]
    })?;
    Ok(counts
        .iter()
        .enumerate()
        .map(|(k, &hits)| {
            let (j, h) = (k / nh, k % nh);
            DeviationEstimate::from_counts(thetas[j], plan.horizons[h], hits, plan.replicas)
        })
        .collect())
}

/// `2 √(t log t)`, or 0 for `t ≤ 1`.
pub fn slowdown_radius(t: f64) -> f64 {
    2.0 * (t * t.ln().max(0.0)).sqrt()
}

/// Rate of the event `|X_t| ≤ 2 √(t log t)` at every horizon; `theta` is 0.
pub fn estimate_slowdown(plan: &ExperimentPlan) -> Result<Vec<DeviationEstimate>> {
    let counts = plan.count_events(plan.horizons.len(), |k, x| {
        (x[k].unsigned_abs() as f64) <= slowdown_radius(plan.horizons[k])
    })?;
    Ok(counts
        .iter()
        .zip(&plan.horizons)
        .map(|(&hits, &t)| DeviationEstimate::from_counts(0.0, t, hits, plan.replicas))
        .collect())
}

/// Mean occupation fraction `A_t / t` at the largest horizon, with its
/// standard error.
pub fn estimate_rho_tilde(plan: &ExperimentPlan) -> Result<(f64, f64)> {
    plan.validate()?;
    let t = plan.t_max();
    let fractions = (0..plan.replicas)
        .into_par_iter()
        .map(|i| plan.run_replica(i, true).map(|(_, s)| s.occupied_time / t))
        .collect::<Result<Vec<f64>>>()?;
    Ok(mean_stderr(&fractions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::EnvKind;
    use crate::walker::WalkerParams;

    fn frozen_ones(horizons: Vec<f64>, n: u64) -> ExperimentPlan {
        ExperimentPlan::new(
            EnvKind::Frozen { rho: 1.0 },
            WalkerParams::continuous(7.0, 3.0).unwrap(),
            horizons,
            n,
            1,
        )
    }

    #[test]
    fn all_ones_speed_and_occupation() {
        let p = frozen_ones(vec![5.0, 10.0], 400);
        let v = estimate_speed(&p).unwrap();
        assert!((v.v_hat - 4.0).abs() < 3.0 * v.stderr, "{v:?}");
        assert_eq!(estimate_rho_tilde(&p).unwrap(), (1.0, 0.0));
    }

    #[test]
    fn far_left_threshold_is_always_hit() {
        let p = frozen_ones(vec![2.0], 200);
        let est = estimate_upper_rate(&p, -5.0).unwrap();
        assert_eq!(est[0].hits, 200);
        assert_eq!(est[0].rate_hat, 0.0);
    }

    #[test]
    fn rates_monotone_in_theta() {
        let p = frozen_ones(vec![1.0, 3.0], 300);
        let thetas = [3.0, 4.0, 5.0, 6.0];
        let est = estimate_upper_rates(&p, &thetas).unwrap();
        for h in 0..2 {
            for j in 1..thetas.len() {
                assert!(est[j * 2 + h].hits <= est[(j - 1) * 2 + h].hits);
            }
        }
    }

    #[test]
    fn slowdown_radius_small_t() {
        assert_eq!(slowdown_radius(0.5), 0.0);
        assert!((slowdown_radius(100.0) - 2.0 * (100.0f64 * 100f64.ln()).sqrt()).abs() < 1e-12);
    }
}
