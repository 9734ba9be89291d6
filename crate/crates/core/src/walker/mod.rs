//! The random walk driven by an environment: continuous time with rates
//! `α ξ + β (1 − ξ)` to the right and `β ξ + α (1 − ξ)` to the left, and the
//! discrete-time analogue with right-probability `p` or `q = 1 − p`.

mod coupled;
mod ct;
mod dt;
mod source;

use std::io::{self, Write};

pub use coupled::{simulate_coupled_pair, CoupledPair};
pub use ct::{run_ct, simulate_ct, CtSummary};
pub use dt::{
    run_dt, run_dt_lockstep, simulate_dt, AveragedEnvironment, DiscreteEnvironment, StaticDiscrete,
};
pub use source::{Environment, FrozenEnv, HistoryView, Periodic};

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WalkerParams {
    pub alpha: f64,
    pub beta: f64,
    pub p: f64,
}

impl WalkerParams {
    /// Continuous-time walker with `0 < β < α`; the matching jump-chain
    /// right-probability `α/(α+β)` is stored in `p`.
    pub fn continuous(alpha: f64, beta: f64) -> Result<Self> {
        let w = WalkerParams {
            alpha,
            beta,
            p: alpha / (alpha + beta),
        };
        w.validate_continuous()?;
        Ok(w)
    }

    /// Discrete-time walker with `1/2 < p <= 1`. `p = 1` is the degenerate
    /// deterministic walker on occupied sites.
    pub fn discrete(p: f64) -> Result<Self> {
        let w = WalkerParams {
            alpha: p,
            beta: 1.0 - p,
            p,
        };
        w.validate_discrete()?;
        Ok(w)
    }

    pub fn validate_continuous(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < self.alpha && self.alpha.is_finite()) {
            return Err(invalid(format!(
                "walker rates need 0 < beta < alpha < inf, got alpha={} beta={}",
                self.alpha, self.beta
            )));
        }
        Ok(())
    }

    pub fn validate_discrete(&self) -> Result<()> {
        if !(self.p > 0.5 && self.p <= 1.0) {
            return Err(invalid(format!("need 1/2 < p <= 1, got p={}", self.p)));
        }
        Ok(())
    }

    #[inline]
    pub fn total_rate(&self) -> f64 {
        self.alpha + self.beta
    }

    /// Probability that a continuous-time jump goes right.
    #[inline]
    pub fn right_prob(&self, occupied: bool) -> f64 {
        if occupied {
            self.alpha / (self.alpha + self.beta)
        } else {
            self.beta / (self.alpha + self.beta)
        }
    }

    /// Right-probability of a discrete-time step.
    #[inline]
    pub fn step_prob(&self, occupied: bool) -> f64 {
        if occupied {
            self.p
        } else {
            1.0 - self.p
        }
    }
}

/// A recorded trajectory. Entry `k` holds the time of the `k`-th jump (entry 0
/// is the start), the position right after it and whether that site was
/// occupied at that instant.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkerPath {
    pub times: Vec<f64>,
    pub positions: Vec<i64>,
    pub occupied: Vec<bool>,
    /// `∫ ξ_s(X_s) ds` over `[0, t_end]`.
    pub occupied_time: f64,
    pub t_end: f64,
}

impl WalkerPath {
    pub(crate) fn start(t0: f64, occupied: bool) -> Self {
        WalkerPath {
            times: vec![t0],
            positions: vec![0],
            occupied: vec![occupied],
            occupied_time: 0.0,
            t_end: t0,
        }
    }

    pub(crate) fn push(&mut self, t: f64, x: i64, occupied: bool) {
        self.times.push(t);
        self.positions.push(x);
        self.occupied.push(occupied);
    }

    pub fn jumps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn final_position(&self) -> i64 {
        *self.positions.last().expect("path starts with one entry")
    }

    /// Position at time `t` (right-continuous).
    pub fn position_at(&self, t: f64) -> i64 {
        let k = self.times.partition_point(|&s| s <= t);
        self.positions[k.saturating_sub(1)]
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "time,position,occupied_flag")?;
        for ((t, x), o) in self.times.iter().zip(&self.positions).zip(&self.occupied) {
            writeln!(w, "{t},{x},{}", *o as u8)?;
        }
        Ok(())
    }
}

/// `A_t / t` for the recorded path.
pub fn occupation_fraction(path: &WalkerPath) -> Result<f64> {
    let t = path.t_end - path.times[0];
    if t <= 0.0 {
        return Err(invalid("occupation fraction needs a positive horizon"));
    }
    Ok(path.occupied_time / t)
}
