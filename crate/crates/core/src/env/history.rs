//! A recorded environment path: initial cells plus the sorted toggle times of
//! every cell. Lookups use left limits, so a toggle at exactly `s` is not yet
//! visible at time `s`.

use super::occupancy::{Occupancy, Window};
use super::sse::{apply_event, EventKind, EventSchedule};
use crate::error::{invalid, Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct EnvHistory {
    window: Window,
    initial: Vec<u8>,
    starts: Vec<usize>,
    toggles: Vec<f64>,
    horizon: f64,
}

impl EnvHistory {
    /// Replays `schedule` from `env0` and records when each cell changes.
    pub fn from_schedule(env0: &Occupancy, schedule: &EventSchedule) -> Result<Self> {
        if env0.window() != schedule.window {
            return Err(invalid(
                "schedule and configuration live on different windows",
            ));
        }
        let window = env0.window();
        let mut cells = env0.cells().to_vec();
        let mut per_cell: Vec<Vec<f64>> = vec![Vec::new(); cells.len()];
        let start = schedule.first_after(env0.time());
        for ev in &schedule.events[start..] {
            let before: Option<(usize, usize, u8, u8)> = match ev.kind {
                EventKind::Link => {
                    let (a, b) = window.edge(ev.target);
                    Some((a, b, cells[a], cells[b]))
                }
                EventKind::Flip => None,
            };
            apply_event(&mut cells, &window, ev);
            match before {
                Some((a, b, sa, sb)) => {
                    if sa != sb {
                        per_cell[a].push(ev.time);
                        per_cell[b].push(ev.time);
                    }
                }
                None => per_cell[ev.target].push(ev.time),
            }
        }
        let mut starts = Vec::with_capacity(cells.len() + 1);
        let mut toggles = Vec::new();
        for list in per_cell {
            starts.push(toggles.len());
            toggles.extend(list);
        }
        starts.push(toggles.len());
        Ok(EnvHistory {
            window,
            initial: env0.cells().to_vec(),
            starts,
            toggles,
            horizon: schedule.horizon,
        })
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn initial(&self) -> &[u8] {
        &self.initial
    }

    pub fn toggle_count(&self) -> usize {
        self.toggles.len()
    }

    #[inline]
    pub fn cell_toggles(&self, i: usize) -> &[f64] {
        &self.toggles[self.starts[i]..self.starts[i + 1]]
    }

    /// State of cell `i` just before time `s`.
    #[inline]
    pub fn state(&self, i: usize, s: f64) -> bool {
        let list = self.cell_toggles(i);
        let n = list.partition_point(|&x| x < s);
        (self.initial[i] as usize + n) % 2 == 1
    }

    /// Occupied time of cell `i` during `[a, b]`.
    pub fn occupied_time(&self, i: usize, a: f64, b: f64) -> f64 {
        let list = self.cell_toggles(i);
        let mut k = list.partition_point(|&x| x < a);
        let mut state = (self.initial[i] as usize + k) % 2 == 1;
        let mut last = a;
        let mut total = 0.0;
        while k < list.len() && list[k] < b {
            if state {
                total += list[k] - last;
            }
            last = list[k];
            state = !state;
            k += 1;
        }
        if state {
            total += b - last;
        }
        total
    }

    /// Configuration at time `t` (right limit: toggles at or before `t` applied).
    pub fn snapshot(&self, t: f64) -> Result<Occupancy> {
        if t > self.horizon {
            return Err(Error::HorizonExceeded {
                requested: t,
                horizon: self.horizon,
            });
        }
        let cells = (0..self.initial.len())
            .map(|i| {
                let n = self.cell_toggles(i).partition_point(|&x| x <= t);
                ((self.initial[i] as usize + n) % 2) as u8
            })
            .collect();
        let mut occ = Occupancy::from_cells(self.window.offset, self.window.boundary, cells)?;
        occ.set_time(t);
        Ok(occ)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::occupancy::{bernoulli_init, Boundary};
    use crate::env::spinflip::{spinflip_schedule, SpinFlipSpec};
    use crate::env::sse::{build_sse_schedule, sse_evolve};
    use crate::rng::Seed;

    #[test]
    fn snapshots_match_replay() {
        let w = Window::centered(12, Boundary::Torus);
        let env0 = bernoulli_init(0.4, w, Seed(1)).unwrap();
        let sched = build_sse_schedule(w, 5.0, Seed(2)).unwrap();
        let hist = EnvHistory::from_schedule(&env0, &sched).unwrap();
        for t in [0.0, 0.7, 2.5, 5.0] {
            assert_eq!(
                hist.snapshot(t).unwrap(),
                sse_evolve(&env0, &sched, t).unwrap()
            );
        }
        assert!(hist.snapshot(6.0).is_err());
    }

    #[test]
    fn left_limits_and_integrals() {
        let w = Window::centered(3, Boundary::Frozen);
        let env0 = Occupancy::filled(w, false);
        let spec = SpinFlipSpec::independent(1.0, 1.0).unwrap();
        let sched = spinflip_schedule(&env0, &spec, 4.0, Seed(3)).unwrap();
        let hist = EnvHistory::from_schedule(&env0, &sched).unwrap();
        let list = hist.cell_toggles(3).to_vec();
        if let Some(&t0) = list.first() {
            assert!(!hist.state(3, t0));
            assert!(hist.state(3, t0 + 1e-12) || list.get(1).is_some_and(|&t1| t1 <= t0 + 1e-12));
        }
        let mut exact = 0.0;
        let mut prev = 0.0;
        let mut on = false;
        for &x in &list {
            if on {
                exact += x - prev;
            }
            prev = x;
            on = !on;
        }
        if on {
            exact += 4.0 - prev;
        }
        assert!((hist.occupied_time(3, 0.0, 4.0) - exact).abs() < 1e-12);
        let split = hist.occupied_time(3, 0.0, 1.3) + hist.occupied_time(3, 1.3, 4.0);
        assert!((split - exact).abs() < 1e-12);
    }
}
