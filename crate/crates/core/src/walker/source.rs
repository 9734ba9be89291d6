use crate::env::{EnvHistory, Occupancy, SpinFlipDynamics, SseDynamics, Window};
use crate::error::{Error, Result};

/// An environment path that a walker can query while it is being generated.
pub trait Environment {
    fn window(&self) -> Window;

    fn time(&self) -> f64;

    /// Moves the clock forward to `t`. For each cell index in `watch` the
    /// occupied time during `[time, t)` is added to `acc`.
    fn advance(&mut self, t: f64, watch: &[usize], acc: &mut [f64]) -> Result<()>;

    /// State of cell `i` at the current clock, as a left limit.
    fn cell(&self, i: usize) -> bool;

    /// Cell holding walker position `site`.
    #[inline]
    fn locate(&self, site: i64) -> Result<usize> {
        self.window().index(site)
    }
}

/// A configuration that never changes.
#[derive(Clone, Debug)]
pub struct FrozenEnv {
    occ: Occupancy,
}

impl FrozenEnv {
    pub fn new(occ: Occupancy) -> Self {
        FrozenEnv { occ }
    }

    pub fn occupancy(&self) -> &Occupancy {
        &self.occ
    }
}

fn check_forward(t: f64, now: f64) -> Result<()> {
    if t < now {
        return Err(Error::TimeReversed { requested: t, now });
    }
    Ok(())
}

impl Environment for FrozenEnv {
    fn window(&self) -> Window {
        self.occ.window()
    }

    fn time(&self) -> f64 {
        self.occ.time()
    }

    fn advance(&mut self, t: f64, watch: &[usize], acc: &mut [f64]) -> Result<()> {
        check_forward(t, self.occ.time())?;
        let dt = t - self.occ.time();
        for (a, &w) in acc.iter_mut().zip(watch) {
            *a += self.occ.cells()[w] as f64 * dt;
        }
        self.occ.set_time(t);
        Ok(())
    }

    #[inline]
    fn cell(&self, i: usize) -> bool {
        self.occ.cells()[i] == 1
    }
}

impl Environment for SseDynamics {
    fn window(&self) -> Window {
        self.occupancy().window()
    }

    fn time(&self) -> f64 {
        self.occupancy().time()
    }

    fn advance(&mut self, t: f64, watch: &[usize], acc: &mut [f64]) -> Result<()> {
        self.advance_watching(t, watch, acc)
    }

    #[inline]
    fn cell(&self, i: usize) -> bool {
        self.occupancy().cells()[i] == 1
    }
}

impl Environment for SpinFlipDynamics {
    fn window(&self) -> Window {
        self.occupancy().window()
    }

    fn time(&self) -> f64 {
        self.occupancy().time()
    }

    fn advance(&mut self, t: f64, watch: &[usize], acc: &mut [f64]) -> Result<()> {
        self.advance_watching(t, watch, acc)
    }

    #[inline]
    fn cell(&self, i: usize) -> bool {
        self.occupancy().cells()[i] == 1
    }
}

/// Read-only cursor into a recorded path; many walkers can share one history.
#[derive(Clone, Copy, Debug)]
pub struct HistoryView<'a> {
    hist: &'a EnvHistory,
    time: f64,
}

impl<'a> HistoryView<'a> {
    pub fn new(hist: &'a EnvHistory) -> Self {
        HistoryView { hist, time: 0.0 }
    }
}

impl Environment for HistoryView<'_> {
    fn window(&self) -> Window {
        self.hist.window()
    }

    fn time(&self) -> f64 {
        self.time
    }

    fn advance(&mut self, t: f64, watch: &[usize], acc: &mut [f64]) -> Result<()> {
        check_forward(t, self.time)?;
        if t > self.hist.horizon() {
            return Err(Error::HorizonExceeded {
                requested: t,
                horizon: self.hist.horizon(),
            });
        }
        for (a, &w) in acc.iter_mut().zip(watch) {
            *a += self.hist.occupied_time(w, self.time, t);
        }
        self.time = t;
        Ok(())
    }

    #[inline]
    fn cell(&self, i: usize) -> bool {
        self.hist.state(i, self.time)
    }
}

/// Reads walker positions modulo the window length, for walks on a small
/// torus that are compared against exact finite-torus computations.
#[derive(Clone, Debug)]
pub struct Periodic<E>(pub E);

impl<E: Environment> Environment for Periodic<E> {
    fn window(&self) -> Window {
        self.0.window()
    }

    fn time(&self) -> f64 {
        self.0.time()
    }

    fn advance(&mut self, t: f64, watch: &[usize], acc: &mut [f64]) -> Result<()> {
        self.0.advance(t, watch, acc)
    }

    #[inline]
    fn cell(&self, i: usize) -> bool {
        self.0.cell(i)
    }

    #[inline]
    fn locate(&self, site: i64) -> Result<usize> {
        Ok(self.0.window().wrapped_index(site))
    }
}
