//! Monte Carlo estimators of speeds, deviation rates, slow-down and
//! traffic-jam probabilities. Replicas run in parallel on derived seeds and
//! are merged in replica order, so results do not depend on the worker count.

mod annealed;
mod discrete;
mod jam;
mod plan;
mod quenched;

use std::io::{self, Write};

pub use annealed::{
    estimate_rho_tilde, estimate_slowdown, estimate_speed, estimate_speed_curve,
    estimate_upper_rate, estimate_upper_rates, slowdown_radius,
};
pub use discrete::{discrete_speed_sweep, DiscreteSweep, DiscreteSweepPoint};
pub use jam::{
    estimate_traffic_jam, estimate_two_block, jam_window_half_width, traffic_jam_bound, JamMethod,
    JamPlan, SurvivalEstimate,
};
pub use plan::{auto_half_width, Domain, EnvKind, ExperimentPlan, ReplicaEnv};
pub use quenched::{
    estimate_quenched_rate, estimate_quenched_rates, quenched_history, quenched_schedule,
    symmetry_residual, SymmetryResidual,
};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(hits: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = hits as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    let lo = if hits == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if hits == n {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lo, hi)
}

/// Estimate of `−(1/t) log P(event)` from `hits` out of `n` replicas.
#[derive(Clone, Debug, PartialEq)]
pub struct DeviationEstimate {
    pub theta: f64,
    pub t: f64,
    pub n_replicas: u64,
    pub hits: u64,
    /// `+∞` when no replica hit the event.
    pub rate_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Delta-method standard error on the rate scale; `+∞` without hits.
    pub stderr: f64,
}

impl DeviationEstimate {
    /// The rate interval is the Wilson interval on `hits/n` mapped through
    /// `−(1/t) log`. Without hits the upper probability end is the
    /// rule-of-three bound `3/n` and the rate interval is open to `+∞`.
    pub fn from_counts(theta: f64, t: f64, hits: u64, n: u64) -> Self {
        assert!(hits <= n && n > 0, "need 0 <= hits <= n and n > 0");
        let to_rate = |p: f64| if p <= 0.0 { f64::INFINITY } else { -p.ln() / t };
        let nf = n as f64;
        let p_hat = hits as f64 / nf;
        let (lo, hi) = if hits == 0 {
            (0.0, (3.0 / nf).min(1.0))
        } else {
            wilson_interval(hits, n, Z95)
        };
        let stderr = if hits == 0 {
            f64::INFINITY
        } else {
            ((1.0 - p_hat) / (nf * p_hat)).sqrt() / t
        };
        DeviationEstimate {
            theta,
            t,
            n_replicas: n,
            hits,
            rate_hat: to_rate(p_hat),
            ci_low: to_rate(hi),
            ci_high: to_rate(lo),
            stderr,
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.hits == 0
    }

    pub fn p_hat(&self) -> f64 {
        self.hits as f64 / self.n_replicas as f64
    }

    /// Half-width of the rate interval, `+∞` when the interval is open.
    pub fn ci_half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpeedEstimate {
    pub v_hat: f64,
    pub stderr: f64,
    pub t: f64,
    pub n_replicas: u64,
}

/// Mean and standard error of the mean, summed in index order.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// One line of the estimates CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateRow {
    pub estimator: String,
    /// θ value or event name.
    pub key: String,
    pub t: f64,
    pub n: u64,
    pub hits: u64,
    pub rate_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

pub const ESTIMATE_HEADER: &str = "estimator,key,t,n,hits,rate_hat,ci_low,ci_high,seed,flag";

/// Writes a float, spelling infinities as `inf`; NaN is never written.
pub fn fmt_value(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else if x.is_nan() {
        "inf".into()
    } else {
        format!("{x}")
    }
}

impl EstimateRow {
    pub fn from_deviation(estimator: &str, key: String, d: &DeviationEstimate, seed: u64) -> Self {
        EstimateRow {
            estimator: estimator.into(),
            key,
            t: d.t,
            n: d.n_replicas,
            hits: d.hits,
            rate_hat: d.rate_hat,
            ci_low: d.ci_low,
            ci_high: d.ci_high,
            seed,
        }
    }

    pub fn flag(&self) -> &'static str {
        if self.rate_hat.is_infinite() || self.ci_high.is_infinite() {
            "zero_hits"
        } else {
            "ok"
        }
    }

    pub fn write<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            self.estimator,
            self.key,
            fmt_value(self.t),
            self.n,
            self.hits,
            fmt_value(self.rate_hat),
            fmt_value(self.ci_low),
            fmt_value(self.ci_high),
            self.seed,
            self.flag()
        )
    }
}

pub fn write_estimates_csv<W: Write>(rows: &[EstimateRow], mut w: W) -> io::Result<()> {
    writeln!(w, "{ESTIMATE_HEADER}")?;
    for r in rows {
        r.write(&mut w)?;
    }
    Ok(())
}
