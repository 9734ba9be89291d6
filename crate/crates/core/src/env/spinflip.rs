//! Finite-range spin-flip systems: rate tables, structural checks and an
//! event-driven (Gillespie) simulator with local rate updates.

use std::fmt::Write as _;

use super::occupancy::{Boundary, Occupancy};
use super::sse::{Event, EventKind, EventSchedule};
use crate::error::{invalid, Error, Result};
use crate::rng::{exp_gap, unit, Seed, SimRng};

const MAX_RADIUS: usize = 8;

/// Flip rates `c(x, η)` as a function of the pattern `η(x-R) .. η(x+R)`.
///
/// Patterns are indexed by reading the window as a binary number with the
/// leftmost site as the most significant bit, so the centre is bit `R`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinFlipSpec {
    radius: usize,
    rates: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StructureReport {
    pub m: f64,
    pub epsilon: f64,
    pub attractive: bool,
}

impl SpinFlipSpec {
    pub fn new(radius: usize, rates: Vec<f64>) -> Result<Self> {
        if radius > MAX_RADIUS {
            return Err(invalid(format!("radius {radius} exceeds {MAX_RADIUS}")));
        }
        let expected = 1usize << (2 * radius + 1);
        if rates.len() != expected {
            return Err(invalid(format!(
                "radius {radius} needs {expected} rates, got {}",
                rates.len()
            )));
        }
        if let Some(r) = rates.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
            return Err(invalid(format!("rate {r} is not finite and non-negative")));
        }
        Ok(SpinFlipSpec { radius, rates })
    }

    /// Builds a table by evaluating `f` on every pattern (slice of length `2R+1`).
    pub fn from_fn(radius: usize, f: impl Fn(&[u8]) -> f64) -> Result<Self> {
        let width = 2 * radius + 1;
        let mut pattern = vec![0u8; width];
        let rates = (0..1usize << width)
            .map(|idx| {
                for (k, p) in pattern.iter_mut().enumerate() {
                    *p = ((idx >> (width - 1 - k)) & 1) as u8;
                }
                f(&pattern)
            })
            .collect();
        SpinFlipSpec::new(radius, rates)
    }

    /// Sites flip independently: `0 -> 1` at rate `up`, `1 -> 0` at rate `down`.
    pub fn independent(up: f64, down: f64) -> Result<Self> {
        SpinFlipSpec::new(0, vec![up, down])
    }

    /// Independent flips with stationary density `rho`, normalised so that
    /// `rho = 1/2` gives flip rate `gamma` in both directions.
    pub fn independent_with_density(gamma: f64, rho: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(invalid(format!("density {rho} outside [0, 1]")));
        }
        SpinFlipSpec::independent(2.0 * gamma * rho, 2.0 * gamma * (1.0 - rho))
    }

    /// Nearest-neighbour voter model: rate = fraction of disagreeing neighbours.
    pub fn voter() -> Self {
        SpinFlipSpec::from_fn(1, |p| {
            ((p[0] != p[1]) as u8 + (p[2] != p[1]) as u8) as f64 / 2.0
        })
        .expect("static table")
    }

    /// Anti-voter model: rate = fraction of agreeing neighbours.
    pub fn anti_voter() -> Self {
        SpinFlipSpec::from_fn(1, |p| {
            ((p[0] == p[1]) as u8 + (p[2] == p[1]) as u8) as f64 / 2.0
        })
        .expect("static table")
    }

    /// Contact process with recovery rate 1 and infection rate `lambda` per
    /// occupied neighbour.
    pub fn contact(lambda: f64) -> Result<Self> {
        SpinFlipSpec::from_fn(1, |p| {
            if p[1] == 1 {
                1.0
            } else {
                lambda * (p[0] + p[2]) as f64
            }
        })
    }

    /// Heat-bath Glauber dynamics of the nearest-neighbour Ising chain at
    /// coupling `k = βJ`.
    pub fn glauber(k: f64) -> Result<Self> {
        if !k.is_finite() {
            return Err(invalid("coupling must be finite"));
        }
        SpinFlipSpec::from_fn(1, |p| {
            let s = |b: u8| 2.0 * b as f64 - 1.0;
            1.0 / (1.0 + (2.0 * k * s(p[1]) * (s(p[0]) + s(p[2]))).exp())
        })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn width(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    #[inline]
    pub fn rate(&self, pattern: usize) -> f64 {
        self.rates[pattern]
    }

    #[inline]
    fn center_bit(&self) -> usize {
        1 << self.radius
    }

    pub fn max_rate(&self) -> f64 {
        self.rates.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_frozen(&self) -> bool {
        self.rates.iter().all(|&r| r == 0.0)
    }

    /// Rate table as text: one `<pattern> <rate>` line per pattern.
    pub fn to_table(&self) -> String {
        let w = self.width();
        let mut out = String::new();
        for (idx, r) in self.rates.iter().enumerate() {
            let _ = writeln!(out, "{:0w$b} {}", idx, r, w = w);
        }
        out
    }

    pub fn parse_table(text: &str) -> Result<Self> {
        let mut width: Option<usize> = None;
        let mut entries: Vec<Option<f64>> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let perr = |msg: String| Error::Parse { line: n + 1, msg };
            let mut parts = line.split_whitespace();
            let (Some(pat), Some(rate), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(perr("expected `<pattern> <rate>`".into()));
            };
            if pat.is_empty() || !pat.chars().all(|c| c == '0' || c == '1') {
                return Err(perr(format!("pattern {pat:?} is not a binary string")));
            }
            match width {
                None => {
                    if pat.len() % 2 == 0 || pat.len() > 2 * MAX_RADIUS + 1 {
                        return Err(perr(format!(
                            "pattern width {} must be odd and at most {}",
                            pat.len(),
                            2 * MAX_RADIUS + 1
                        )));
                    }
                    width = Some(pat.len());
                    entries = vec![None; 1 << pat.len()];
                }
                Some(w) if w != pat.len() => {
                    return Err(perr(format!(
                        "pattern width {} differs from {w}",
                        pat.len()
                    )));
                }
                _ => {}
            }
            let idx = usize::from_str_radix(pat, 2).map_err(|e| perr(e.to_string()))?;
            let r: f64 = rate
                .parse()
                .map_err(|e| perr(format!("bad rate {rate:?}: {e}")))?;
            if entries[idx].replace(r).is_some() {
                return Err(perr(format!("pattern {pat} listed twice")));
            }
        }
        let Some(w) = width else {
            return Err(Error::Parse {
                line: 0,
                msg: "empty rate table".into(),
            });
        };
        let rates = entries
            .into_iter()
            .enumerate()
            .map(|(idx, r)| {
                r.ok_or_else(|| Error::Parse {
                    line: 0,
                    msg: format!("pattern {:0w$b} missing", idx, w = w),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        SpinFlipSpec::new((w - 1) / 2, rates)
    }

    /// First pair `(η, ζ)` with `η <= ζ`, equal centres, violating attractiveness.
    pub fn attractiveness_violation(&self) -> Option<(usize, usize)> {
        let c = self.center_bit();
        for zeta in 0..self.rates.len() {
            let mut eta = zeta;
            loop {
                if eta & c == zeta & c {
                    let (re, rz) = (self.rates[eta], self.rates[zeta]);
                    let bad = if zeta & c == 0 { re > rz } else { re < rz };
                    if bad {
                        return Some((eta, zeta));
                    }
                }
                if eta == 0 {
                    break;
                }
                eta = (eta - 1) & zeta;
            }
        }
        None
    }

    pub fn check_attractive(&self) -> bool {
        self.attractiveness_violation().is_none()
    }

    /// Maximal single-site dependence `M` and minimal flip activity `ε`,
    /// enumerated over all patterns.
    pub fn compute_m_epsilon(&self) -> StructureReport {
        let w = self.width();
        let c = self.center_bit();
        let mut m = 0.0;
        for bit in (0..w).filter(|&b| 1 << b != c) {
            let sup = (0..self.rates.len())
                .map(|p| (self.rates[p] - self.rates[p ^ (1 << bit)]).abs())
                .fold(0.0, f64::max);
            m += sup;
        }
        let epsilon = (0..self.rates.len())
            .map(|p| (self.rates[p] + self.rates[p ^ c]).abs())
            .fold(f64::INFINITY, f64::min);
        StructureReport {
            m,
            epsilon,
            attractive: self.check_attractive(),
        }
    }
}

/// Sum tree over per-cell rates supporting O(log n) updates and selection.
#[derive(Clone, Debug)]
struct RateTree {
    cap: usize,
    nodes: Vec<f64>,
}

impl RateTree {
    fn new(rates: &[f64]) -> Self {
        let cap = rates.len().next_power_of_two().max(1);
        let mut nodes = vec![0.0; 2 * cap];
        nodes[cap..cap + rates.len()].copy_from_slice(rates);
        for i in (1..cap).rev() {
            nodes[i] = nodes[2 * i] + nodes[2 * i + 1];
        }
        RateTree { cap, nodes }
    }

    #[inline]
    fn total(&self) -> f64 {
        self.nodes[1]
    }

    fn set(&mut self, i: usize, rate: f64) {
        let mut k = self.cap + i;
        self.nodes[k] = rate;
        while k > 1 {
            k /= 2;
            self.nodes[k] = self.nodes[2 * k] + self.nodes[2 * k + 1];
        }
    }

    fn select(&self, mut u: f64) -> usize {
        let mut k = 1;
        while k < self.cap {
            let left = self.nodes[2 * k];
            if u < left || self.nodes[2 * k + 1] <= 0.0 {
                k *= 2;
            } else {
                u -= left;
                k = 2 * k + 1;
            }
        }
        k - self.cap
    }
}

/// Event-driven spin-flip dynamics on a window.
#[derive(Clone, Debug)]
pub struct SpinFlipDynamics {
    occ: Occupancy,
    spec: SpinFlipSpec,
    tree: RateTree,
    rng: SimRng,
}

impl SpinFlipDynamics {
    pub fn new(occ: Occupancy, spec: SpinFlipSpec, seed: Seed) -> Result<Self> {
        if occ.boundary() == Boundary::Torus && occ.len() < spec.width() {
            return Err(invalid(format!(
                "torus of length {} is shorter than the rate window {}",
                occ.len(),
                spec.width()
            )));
        }
        let rates: Vec<f64> = (0..occ.len())
            .map(|i| spec.rate(pattern_at(&occ, spec.radius, i)))
            .collect();
        Ok(SpinFlipDynamics {
            tree: RateTree::new(&rates),
            occ,
            spec,
            rng: seed.rng(),
        })
    }

    pub fn occupancy(&self) -> &Occupancy {
        &self.occ
    }

    pub fn into_occupancy(self) -> Occupancy {
        self.occ
    }

    pub fn spec(&self) -> &SpinFlipSpec {
        &self.spec
    }

    fn refresh_around(&mut self, i: usize) {
        let r = self.spec.radius as i64;
        let n = self.occ.len() as i64;
        for d in -r..=r {
            let j = i as i64 + d;
            let j = match self.occ.boundary() {
                Boundary::Torus => j.rem_euclid(n),
                Boundary::Frozen if (0..n).contains(&j) => j,
                Boundary::Frozen => continue,
            } as usize;
            let rate = self.spec.rate(pattern_at(&self.occ, self.spec.radius, j));
            self.tree.set(j, rate);
        }
    }

    /// Next flip strictly before `t_limit`, applied in place; `None` once the
    /// clock has been moved to `t_limit`.
    pub fn next_flip(&mut self, t_limit: f64) -> Option<(f64, usize)> {
        let total = self.tree.total();
        let now = self.occ.time();
        if total <= 0.0 {
            self.occ.set_time(t_limit.max(now));
            return None;
        }
        let t = now + exp_gap(&mut self.rng, total);
        if t >= t_limit {
            self.occ.set_time(t_limit.max(now));
            return None;
        }
        let i = self.tree.select(unit(&mut self.rng) * total);
        self.occ.cells_mut()[i] ^= 1;
        self.occ.set_time(t);
        self.refresh_around(i);
        Some((t, i))
    }

    pub fn advance(&mut self, t: f64) -> Result<()> {
        self.advance_watching(t, &[], &mut [])
    }

    /// Runs the dynamics up to `t`, adding the occupied time of each watched
    /// cell during `[now, t)` into `acc`.
    pub fn advance_watching(&mut self, t: f64, watch: &[usize], acc: &mut [f64]) -> Result<()> {
        let start = self.occ.time();
        if t < start {
            return Err(Error::TimeReversed {
                requested: t,
                now: start,
            });
        }
        let mut last = start;
        let mut prev_state: Vec<u8> = watch.iter().map(|&w| self.occ.cells()[w]).collect();
        while let Some((time, i)) = self.next_flip(t) {
            if watch.contains(&i) {
                for (a, &s) in acc.iter_mut().zip(&prev_state) {
                    *a += s as f64 * (time - last);
                }
                last = time;
                for (s, _) in prev_state.iter_mut().zip(watch).filter(|(_, &w)| w == i) {
                    *s ^= 1;
                }
            }
        }
        for (a, &s) in acc.iter_mut().zip(&prev_state) {
            *a += s as f64 * (t - last);
        }
        Ok(())
    }
}

/// Pattern index of the neighbourhood of cell `i`.
pub(crate) fn pattern_at(occ: &Occupancy, radius: usize, i: usize) -> usize {
    let cells = occ.cells();
    let n = cells.len() as i64;
    let mut idx = 0usize;
    for d in -(radius as i64)..=radius as i64 {
        let j = i as i64 + d;
        let bit = match occ.boundary() {
            Boundary::Torus => cells[j.rem_euclid(n) as usize],
            Boundary::Frozen if (0..n).contains(&j) => cells[j as usize],
            Boundary::Frozen => 0,
        };
        idx = (idx << 1) | bit as usize;
    }
    idx
}

/// Configuration at time `t` under the flip dynamics `spec`.
pub fn spinflip_evolve(
    env: &Occupancy,
    spec: &SpinFlipSpec,
    t: f64,
    seed: Seed,
) -> Result<Occupancy> {
    let mut dynamics = SpinFlipDynamics::new(env.clone(), spec.clone(), seed)?;
    dynamics.advance(t)?;
    Ok(dynamics.into_occupancy())
}

/// Records one realisation of the flip dynamics on `[env.time, t_max]` as a
/// schedule of `Flip` events.
pub fn spinflip_schedule(
    env: &Occupancy,
    spec: &SpinFlipSpec,
    t_max: f64,
    seed: Seed,
) -> Result<EventSchedule> {
    let mut dynamics = SpinFlipDynamics::new(env.clone(), spec.clone(), seed)?;
    let mut events = Vec::new();
    while let Some((time, target)) = dynamics.next_flip(t_max) {
        events.push(Event {
            time,
            target,
            kind: EventKind::Flip,
        });
    }
    Ok(EventSchedule {
        window: env.window(),
        horizon: t_max,
        seed: seed.0,
        events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::occupancy::{bernoulli_init, Window};

    #[test]
    fn independent_structure() {
        let spec = SpinFlipSpec::independent(1.5, 1.5).unwrap();
        let rep = spec.compute_m_epsilon();
        assert_eq!(rep.m, 0.0);
        assert_eq!(rep.epsilon, 3.0);
        assert!(rep.attractive);
    }

    #[test]
    fn voter_is_attractive_anti_voter_is_not() {
        assert!(SpinFlipSpec::voter().check_attractive());
        let anti = SpinFlipSpec::anti_voter();
        let (eta, zeta) = anti.attractiveness_violation().expect("violation");
        assert_eq!(eta & !zeta, 0, "eta <= zeta");
        assert_eq!(eta & 0b010, zeta & 0b010, "same centre");
        assert!(!anti.check_attractive());
        assert!(SpinFlipSpec::contact(2.0).unwrap().check_attractive());
        assert!(SpinFlipSpec::glauber(0.4).unwrap().check_attractive());
        assert!(!SpinFlipSpec::glauber(-0.4).unwrap().check_attractive());
    }

    #[test]
    fn table_round_trip_and_errors() {
        let spec = SpinFlipSpec::voter();
        let text = spec.to_table();
        assert!(text.starts_with("000 0\n001 0.5\n"));
        assert_eq!(SpinFlipSpec::parse_table(&text).unwrap(), spec);
        assert!(
            SpinFlipSpec::parse_table("0 1\n").is_err(),
            "missing pattern"
        );
        assert!(
            SpinFlipSpec::parse_table("00 1\n01 1\n10 1\n11 1\n").is_err(),
            "even width"
        );
        assert!(
            SpinFlipSpec::parse_table("0 1\n1 -2\n").is_err(),
            "negative rate"
        );
        assert!(
            SpinFlipSpec::parse_table("0 1\n0 1\n1 1\n").is_err(),
            "duplicate"
        );
        assert!(SpinFlipSpec::parse_table("# only a comment\n").is_err());
        let parsed = SpinFlipSpec::parse_table("# independent\n0 2 # up\n1 0.5\n").unwrap();
        assert_eq!(parsed, SpinFlipSpec::independent(2.0, 0.5).unwrap());
    }

    #[test]
    fn all_zero_rates_freeze() {
        let spec = SpinFlipSpec::new(1, vec![0.0; 8]).unwrap();
        let occ = bernoulli_init(0.5, Window::centered(20, Boundary::Torus), Seed(1)).unwrap();
        let out = spinflip_evolve(&occ, &spec, 100.0, Seed(2)).unwrap();
        assert_eq!(out.cells(), occ.cells());
        assert_eq!(out.time(), 100.0);
    }

    #[test]
    fn rates_track_local_changes() {
        let occ = bernoulli_init(0.5, Window::centered(15, Boundary::Frozen), Seed(4)).unwrap();
        let mut dynamics = SpinFlipDynamics::new(occ, SpinFlipSpec::voter(), Seed(5)).unwrap();
        for _ in 0..200 {
            if dynamics.next_flip(f64::INFINITY).is_none() {
                break;
            }
            let expect: f64 = (0..dynamics.occ.len())
                .map(|i| dynamics.spec.rate(pattern_at(&dynamics.occ, 1, i)))
                .sum();
            assert!((dynamics.tree.total() - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn watched_integral_bounded_by_elapsed_time() {
        let occ = bernoulli_init(0.5, Window::centered(10, Boundary::Torus), Seed(6)).unwrap();
        let spec = SpinFlipSpec::independent(1.0, 1.0).unwrap();
        let mut dynamics = SpinFlipDynamics::new(occ, spec, Seed(7)).unwrap();
        let mut acc = [0.0, 0.0];
        dynamics.advance_watching(5.0, &[0, 3], &mut acc).unwrap();
        assert!(acc.iter().all(|&a| (0.0..=5.0 + 1e-12).contains(&a)));
    }
}
