//! Exact walker law in one fixed environment path. Between environment events
//! the walker is a homogeneous chain whose jumps arrive at rate `α + β`, so
//! each interval is integrated by uniformization with the jump kernel itself.

use super::annealed::{poisson_quantile, poisson_weights};
use super::ExactDistribution;
use crate::env::{EventKind, EventSchedule};
use crate::env::{Occupancy, Window};
use crate::error::{invalid, Error, Result};
use crate::walker::WalkerParams;

/// Leaked mass above this level makes the result unusable.
pub const LEAK_LIMIT: f64 = 1e-12;
const STEP_TOL: f64 = 1e-18;

/// Resumable exact propagation of the walker's probability vector.
#[derive(Clone, Debug)]
pub struct QuenchedPropagator<'a> {
    schedule: &'a EventSchedule,
    cells: Vec<u8>,
    window: Window,
    next_event: usize,
    time: f64,
    half: usize,
    cell_of: Vec<usize>,
    probs: Vec<f64>,
    scratch: Vec<f64>,
    acc: Vec<f64>,
    leaked: f64,
    poisson_tail: f64,
    params: WalkerParams,
}

impl<'a> QuenchedPropagator<'a> {
    /// Walker displacements are kept in `[−half_width, half_width]`. With
    /// `periodic` the walker reads the environment modulo the window length,
    /// otherwise that range has to fit inside the window.
    pub fn new(
        schedule: &'a EventSchedule,
        env0: &Occupancy,
        params: &WalkerParams,
        half_width: usize,
        periodic: bool,
    ) -> Result<Self> {
        params.validate_continuous()?;
        let window = env0.window();
        if window != schedule.window {
            return Err(invalid(
                "schedule and configuration live on different windows",
            ));
        }
        let h = half_width as i64;
        let cell_of = (-h..=h)
            .map(|k| {
                if periodic {
                    Ok(window.wrapped_index(k))
                } else {
                    window.index(k)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let width = 2 * half_width + 1;
        let mut probs = vec![0.0; width];
        probs[half_width] = 1.0;
        Ok(QuenchedPropagator {
            schedule,
            cells: env0.cells().to_vec(),
            window,
            next_event: schedule.first_after(env0.time()),
            time: env0.time(),
            half: half_width,
            cell_of,
            scratch: vec![0.0; width],
            acc: vec![0.0; width],
            probs,
            leaked: 0.0,
            poisson_tail: 0.0,
            params: *params,
        })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn leaked(&self) -> f64 {
        self.leaked
    }

    /// Runs to time `t`, applying environment events at their times.
    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        if t < self.time {
            return Err(Error::TimeReversed {
                requested: t,
                now: self.time,
            });
        }
        if t > self.schedule.horizon {
            return Err(Error::HorizonExceeded {
                requested: t,
                horizon: self.schedule.horizon,
            });
        }
        while let Some(ev) = self.schedule.events.get(self.next_event) {
            if ev.time > t {
                break;
            }
            self.propagate(ev.time - self.time)?;
            self.time = ev.time;
            match ev.kind {
                EventKind::Link => {
                    let (a, b) = self.window.edge(ev.target);
                    self.cells.swap(a, b);
                }
                EventKind::Flip => self.cells[ev.target] ^= 1,
            }
            self.next_event += 1;
        }
        self.propagate(t - self.time)?;
        self.time = t;
        Ok(())
    }

    fn propagate(&mut self, dt: f64) -> Result<()> {
        if dt <= 0.0 {
            return Ok(());
        }
        let (weights, tail) = poisson_weights(self.params.total_rate() * dt, STEP_TOL, 10_000_000)?;
        let (p_occ, p_vac) = (self.params.right_prob(true), self.params.right_prob(false));
        let width = self.probs.len();
        let (mut lo, mut hi) = match (
            self.probs.iter().position(|&p| p != 0.0),
            self.probs.iter().rposition(|&p| p != 0.0),
        ) {
            (Some(a), Some(b)) => (a, b),
            _ => return Ok(()),
        };
        self.acc[lo..=hi].iter_mut().for_each(|x| *x = 0.0);
        let mut leak_so_far = 0.0;
        let mut leak_mix = 0.0;
        for (n, &w) in weights.iter().enumerate() {
            if n > 0 {
                let (nlo, nhi) = (lo.saturating_sub(1), (hi + 1).min(width - 1));
                self.scratch[nlo..=nhi].iter_mut().for_each(|x| *x = 0.0);
                for k in lo..=hi {
                    let m = self.probs[k];
                    if m == 0.0 {
                        continue;
                    }
                    let pr = if self.cells[self.cell_of[k]] == 1 {
                        p_occ
                    } else {
                        p_vac
                    };
                    if k + 1 < width {
                        self.scratch[k + 1] += m * pr;
                    } else {
                        leak_so_far += m * pr;
                    }
                    if k > 0 {
                        self.scratch[k - 1] += m * (1.0 - pr);
                    } else {
                        leak_so_far += m * (1.0 - pr);
                    }
                }
                std::mem::swap(&mut self.probs, &mut self.scratch);
                lo = nlo;
                hi = nhi;
            }
            for k in lo..=hi {
                self.acc[k] += w * self.probs[k];
            }
            leak_mix += w * leak_so_far;
        }
        let mass: f64 = self.probs[lo..=hi].iter().sum::<f64>() + leak_so_far;
        self.probs.iter_mut().for_each(|x| *x = 0.0);
        self.probs[lo..=hi].copy_from_slice(&self.acc[lo..=hi]);
        self.acc[lo..=hi].iter_mut().for_each(|x| *x = 0.0);
        self.leaked += leak_mix;
        self.poisson_tail += tail * mass;
        Ok(())
    }

    /// Current law; fails if more than [`LEAK_LIMIT`] left the displacement range.
    pub fn distribution(&self) -> Result<ExactDistribution> {
        if self.leaked > LEAK_LIMIT {
            return Err(Error::MassLeak {
                leaked: self.leaked,
            });
        }
        Ok(ExactDistribution::from_range(
            -(self.half as i64),
            self.probs.clone(),
            self.leaked + self.poisson_tail,
        ))
    }
}

/// Displacement law at time `t` of a walker started at the origin at
/// `env0.time()`, in the environment path given by `env0` and `schedule`.
pub fn quenched_exact(
    schedule: &EventSchedule,
    env0: &Occupancy,
    params: &WalkerParams,
    t: f64,
) -> Result<ExactDistribution> {
    let window = env0.window();
    let needed = poisson_quantile(params.total_rate() * (t - env0.time()).max(0.0), 1e-15);
    let fits = (-window.leftmost()).min(window.rightmost()).max(0) as usize;
    let mut prop = QuenchedPropagator::new(schedule, env0, params, needed.min(fits), false)?;
    prop.advance_to(t)?;
    prop.distribution()
}
