//! Simple symmetric exclusion through its graphical representation: every
//! nearest-neighbour edge carries a rate-1 Poisson process of links, and a
//! link exchanges the states of its two endpoints.

use rand_distr::{Beta, Distribution, Poisson};

use super::occupancy::{Occupancy, Window};
use crate::error::{invalid, Error, Result};
use crate::rng::{exp_gap, index, unit, Seed, SimRng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EventKind {
    /// Exchange the two endpoints of edge `target`.
    Link,
    /// Toggle cell `target`.
    Flip,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    pub time: f64,
    pub target: usize,
    pub kind: EventKind,
}

/// Time-ordered events on a window over `[0, horizon]`.
#[derive(Clone, Debug, PartialEq)]
pub struct EventSchedule {
    pub window: Window,
    pub horizon: f64,
    pub seed: u64,
    pub events: Vec<Event>,
}

impl EventSchedule {
    pub fn empty(window: Window, horizon: f64) -> Self {
        EventSchedule {
            window,
            horizon,
            seed: 0,
            events: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Index of the first event strictly after `t`.
    pub fn first_after(&self, t: f64) -> usize {
        self.events.partition_point(|e| e.time <= t)
    }
}

/// Materialised link schedule: one independent rate-1 Poisson process per
/// edge, generated from exponential gaps on a per-edge seed stream, then
/// merged. Ties are ordered by (time, edge, draw order).
pub fn build_sse_schedule(window: Window, t_max: f64, seed: Seed) -> Result<EventSchedule> {
    if !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(invalid(format!("horizon {t_max} must be finite and >= 0")));
    }
    let mut keyed = Vec::new();
    for e in 0..window.n_edges() {
        let mut rng = seed.derive(e as u64).rng();
        let mut t = 0.0;
        let mut draw = 0u32;
        loop {
            t += exp_gap(&mut rng, 1.0);
            if t > t_max {
                break;
            }
            keyed.push((t, e, draw));
            draw += 1;
        }
    }
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    Ok(EventSchedule {
        window,
        horizon: t_max,
        seed: seed.0,
        events: keyed
            .into_iter()
            .map(|(time, target, _)| Event {
                time,
                target,
                kind: EventKind::Link,
            })
            .collect(),
    })
}

#[inline]
pub(crate) fn apply_event(cells: &mut [u8], window: &Window, ev: &Event) {
    match ev.kind {
        EventKind::Link => {
            let (a, b) = window.edge(ev.target);
            cells.swap(a, b);
        }
        EventKind::Flip => cells[ev.target] ^= 1,
    }
}

/// Applies every event with time in `(env.time, t]` in place.
pub fn apply_schedule(env: &mut Occupancy, schedule: &EventSchedule, t: f64) -> Result<()> {
    if env.window() != schedule.window {
        return Err(invalid(
            "schedule and configuration live on different windows",
        ));
    }
    if t > schedule.horizon {
        return Err(Error::HorizonExceeded {
            requested: t,
            horizon: schedule.horizon,
        });
    }
    if t < env.time() {
        return Err(Error::TimeReversed {
            requested: t,
            now: env.time(),
        });
    }
    let window = env.window();
    let start = schedule.first_after(env.time());
    let cells = env.cells_mut();
    for ev in schedule.events[start..].iter().take_while(|e| e.time <= t) {
        apply_event(cells, &window, ev);
    }
    env.set_time(t);
    Ok(())
}

/// Returns the configuration at time `t` obtained by replaying `schedule`.
pub fn sse_evolve(env: &Occupancy, schedule: &EventSchedule, t: f64) -> Result<Occupancy> {
    let mut out = env.clone();
    apply_schedule(&mut out, schedule, t)?;
    Ok(out)
}

/// Streaming exclusion dynamics for long horizons.
///
/// The superposition of the per-edge link processes is a Poisson process of
/// rate `n_edges` whose marks are uniform edges, so advancing over an interval
/// draws a Poisson count and that many uniform edges in order. Event times are
/// only materialised (as order statistics) for links that change a watched
/// cell, which keeps occupation integrals exact.
#[derive(Clone, Debug)]
pub struct SseDynamics {
    occ: Occupancy,
    rng: SimRng,
    n_edges: usize,
}

impl SseDynamics {
    pub fn new(occ: Occupancy, seed: Seed) -> Self {
        let n_edges = occ.window().n_edges();
        SseDynamics {
            occ,
            rng: seed.rng(),
            n_edges,
        }
    }

    pub fn occupancy(&self) -> &Occupancy {
        &self.occ
    }

    pub fn into_occupancy(self) -> Occupancy {
        self.occ
    }

    fn link_count(&mut self, dt: f64) -> u64 {
        let mean = self.n_edges as f64 * dt;
        if mean <= 0.0 {
            return 0;
        }
        Poisson::new(mean)
            .map(|p| p.sample(&mut self.rng) as u64)
            .unwrap_or(0)
    }

    pub fn advance(&mut self, t: f64) -> Result<()> {
        self.advance_watching(t, &[], &mut [])
    }

    /// Advances the clock to `t`. For every cell index in `watch`, adds the
    /// time that cell spent occupied during `[now, t)` to the matching entry
    /// of `acc`.
    pub fn advance_watching(&mut self, t: f64, watch: &[usize], acc: &mut [f64]) -> Result<()> {
        let now = self.occ.time();
        if t < now {
            return Err(Error::TimeReversed { requested: t, now });
        }
        let dt = t - now;
        let k = self.link_count(dt);
        let window = self.occ.window();
        if watch.is_empty() {
            let n = self.n_edges;
            let cells = self.occ.cells_mut();
            for _ in 0..k {
                let (a, b) = window.edge(index(&mut self.rng, n));
                cells.swap(a, b);
            }
        } else {
            let mut last = [0.0f64; 4];
            assert!(watch.len() <= last.len(), "at most four watched cells");
            // position (1-based order index, fraction) of the latest sampled order statistic
            let (mut j_prev, mut u_prev) = (0u64, 0.0f64);
            for j in 1..=k {
                let (a, b) = window.edge(index(&mut self.rng, self.n_edges));
                let cells = self.occ.cells_mut();
                if cells[a] == cells[b] {
                    continue;
                }
                if watch.iter().any(|&w| w == a || w == b) {
                    let frac = Beta::new((j - j_prev) as f64, (k - j + 1) as f64)
                        .map(|d| d.sample(&mut self.rng))
                        .unwrap_or_else(|_| unit(&mut self.rng));
                    let u = u_prev + (1.0 - u_prev) * frac;
                    for (w, &cell) in watch.iter().enumerate() {
                        if cell == a || cell == b {
                            acc[w] += cells[cell] as f64 * (u - last[w]) * dt;
                            last[w] = u;
                        }
                    }
                    j_prev = j;
                    u_prev = u;
                }
                cells.swap(a, b);
            }
            let cells = self.occ.cells();
            for (w, &cell) in watch.iter().enumerate() {
                acc[w] += cells[cell] as f64 * (1.0 - last[w]) * dt;
            }
        }
        self.occ.set_time(t);
        Ok(())
    }
}
