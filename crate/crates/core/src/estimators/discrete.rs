//! Discrete-time speed sweeps: static, dynamic (parallel-update exclusion)
//! and averaged environments, with the static closed form alongside.
//! Static and dynamic walkers start from the same initial configurations and
//! use the same walker streams.

use rayon::prelude::*;

use super::{mean_stderr, SpeedEstimate};
use crate::env::{bernoulli_init, Boundary, DiscreteExclusion, Window};
use crate::error::{invalid, Result};
use crate::rng::{stream, Seed};
use crate::theory::{static_speed_mirrored, ModelParams};
use crate::walker::{run_dt, run_dt_lockstep, AveragedEnvironment, StaticDiscrete, WalkerParams};

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteSweep {
    /// `(p, ρ)` pairs. Points with equal `ρ` share initial configurations.
    pub points: Vec<(f64, f64)>,
    pub replicas: u64,
    pub n_steps: u64,
    pub seed: Seed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteSweepPoint {
    pub p: f64,
    pub rho: f64,
    pub theory_static: f64,
    pub static_speed: SpeedEstimate,
    pub dynamic_speed: SpeedEstimate,
    pub averaged_speed: SpeedEstimate,
    /// Per-replica `X_n / n`, in replica order, for paired comparisons.
    pub static_samples: Vec<f64>,
    pub dynamic_samples: Vec<f64>,
    pub averaged_samples: Vec<f64>,
}

impl DiscreteSweep {
    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(invalid("sweep has no points"));
        }
        for &(p, rho) in &self.points {
            if !(p > 0.5 && p < 1.0) {
                return Err(invalid(format!("sweep needs 1/2 < p < 1, got p={p}")));
            }
            if !(0.0..=1.0).contains(&rho) {
                return Err(invalid(format!("rho must lie in [0, 1], got {rho}")));
            }
        }
        if self.replicas == 0 || self.n_steps == 0 {
            return Err(invalid("need at least one replica and one step"));
        }
        Ok(())
    }

    /// Torus `[-(n+1), n]`: an even length that no walker can leave.
    pub fn window(&self) -> Window {
        let n = self.n_steps as i64;
        Window::new(-(n + 1), 2 * self.n_steps as usize + 2, Boundary::Torus)
            .expect("nonempty window")
    }
}

/// Final positions of one replica: static, dynamic, averaged.
type ReplicaEnds = (Vec<i64>, Vec<i64>, Vec<i64>);

fn estimate(samples: &[f64], t: f64) -> SpeedEstimate {
    let (v_hat, stderr) = mean_stderr(samples);
    SpeedEstimate {
        v_hat,
        stderr,
        t,
        n_replicas: samples.len() as u64,
    }
}

/// Runs every sweep point and returns them in input order.
pub fn discrete_speed_sweep(sweep: &DiscreteSweep) -> Result<Vec<DiscreteSweepPoint>> {
    sweep.validate()?;
    let window = sweep.window();
    let n = sweep.n_steps;
    let nf = n as f64;
    let mut out: Vec<Option<DiscreteSweepPoint>> = vec![None; sweep.points.len()];
    let mut rhos: Vec<f64> = Vec::new();
    for &(_, rho) in &sweep.points {
        if !rhos.iter().any(|r| r.to_bits() == rho.to_bits()) {
            rhos.push(rho);
        }
    }
    for rho in rhos {
        let members: Vec<usize> = (0..sweep.points.len())
            .filter(|&k| sweep.points[k].1.to_bits() == rho.to_bits())
            .collect();
        let ps: Vec<f64> = members.iter().map(|&k| sweep.points[k].0).collect();
        let per_replica = (0..sweep.replicas)
            .into_par_iter()
            .map(|i| {
                let replica = sweep.seed.replica(i);
                let occ = bernoulli_init(rho, window, replica.derive(stream::ENVIRONMENT))?;
                let walker_seeds: Vec<Seed> = ps
                    .iter()
                    .map(|p| replica.derive(stream::WALKER).derive(p.to_bits()))
                    .collect();
                let stat =
                    run_dt_lockstep(&mut StaticDiscrete(occ.clone()), &ps, n, &walker_seeds)?;
                let mut dynamic = DiscreteExclusion::new(&occ, replica.derive(stream::DYNAMICS))?;
                let dyn_x = run_dt_lockstep(&mut dynamic, &ps, n, &walker_seeds)?;
                let avg = ps
                    .iter()
                    .map(|&p| {
                        let mut rng = replica.derive(stream::AUX).derive(p.to_bits()).rng();
                        run_dt(
                            &mut AveragedEnvironment { rho },
                            &WalkerParams::discrete(p)?,
                            n,
                            &mut rng,
                        )
                    })
                    .collect::<Result<Vec<i64>>>()?;
                Ok((stat, dyn_x, avg))
            })
            .collect::<Result<Vec<_>>>()?;
        for (j, &k) in members.iter().enumerate() {
            let p = ps[j];
            let column = |f: &dyn Fn(&ReplicaEnds) -> i64| -> Vec<f64> {
                per_replica.iter().map(|r| f(r) as f64 / nf).collect()
            };
            let static_samples = column(&|r| r.0[j]);
            let dynamic_samples = column(&|r| r.1[j]);
            let averaged_samples = column(&|r| r.2[j]);
            out[k] = Some(DiscreteSweepPoint {
                p,
                rho,
                theory_static: static_speed_mirrored(&ModelParams::discrete(p, rho)?)?,
                static_speed: estimate(&static_samples, nf),
                dynamic_speed: estimate(&dynamic_samples, nf),
                averaged_speed: estimate(&averaged_samples, nf),
                static_samples,
                dynamic_samples,
                averaged_samples,
            });
        }
    }
    Ok(out
        .into_iter()
        .map(|p| p.expect("every point belongs to a group"))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn averaged_speed_matches_mean_environment() {
        let sweep = DiscreteSweep {
            points: vec![(0.7, 0.8), (0.9, 0.8), (0.7, 0.3)],
            replicas: 200,
            n_steps: 400,
            seed: Seed(2),
        };
        let pts = discrete_speed_sweep(&sweep).unwrap();
        assert_eq!(pts.len(), 3);
        for pt in &pts {
            let expect = (2.0 * pt.rho - 1.0) * (2.0 * pt.p - 1.0);
            let a = pt.averaged_speed;
            assert!((a.v_hat - expect).abs() < 4.0 * a.stderr, "{pt:?}");
        }
        assert_eq!(pts[0].static_samples.len(), 200);
        assert_eq!(pts, discrete_speed_sweep(&sweep).unwrap());
    }

    #[test]
    fn rejects_degenerate_p() {
        let sweep = DiscreteSweep {
            points: vec![(1.0, 0.8)],
            replicas: 1,
            n_steps: 1,
            seed: Seed(0),
        };
        assert!(sweep.validate().is_err());
    }
}
