//! Survival of vacant (and occupied) blocks under exclusion, through the
//! stirring representation: the content of every site is a label that moves
//! along the links, so a block stays vacant on `[0, t]` exactly when every
//! label that visits it during `[0, t]` started vacant.

use std::ops::RangeInclusive;

use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use super::annealed::slowdown_radius;
use super::plan::Domain;
use super::{mean_stderr, wilson_interval, Z95};
use crate::env::{Boundary, Window};
use crate::error::{invalid, Result};
use crate::rng::{index, stream, unit, Seed, SimRng};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JamMethod {
    /// Samples the initial states of the visiting labels: a 0/1 outcome.
    Direct,
    /// Averages the initial states out: weight `Π ρ^{|H_Q|} (1−ρ)^{|H_Q'|}`.
    Graphical,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurvivalEstimate {
    pub t: f64,
    pub n_replicas: u64,
    /// Replicas with a nonzero outcome.
    pub hits: u64,
    pub p_hat: f64,
    pub stderr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub method: JamMethod,
}

/// `(1 − ρ)^{|Q| · E|R_t|}`.
pub fn traffic_jam_bound(rho: f64, q_size: usize, range_mean: f64) -> f64 {
    (1.0 - rho).powf(q_size as f64 * range_mean)
}

/// Half-width that keeps labels from further out away from the blocks: twelve
/// standard deviations of a label's displacement.
pub fn jam_window_half_width(max_abs_site: u64, t: f64) -> usize {
    max_abs_site as usize + (12.0 * (2.0 * t.max(0.0)).sqrt()).ceil() as usize + 8
}

/// Survival experiment on the exclusion process started from Bernoulli(`rho`).
/// `Domain::Auto` picks [`jam_window_half_width`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JamPlan {
    pub rho: f64,
    pub replicas: u64,
    pub seed: Seed,
    pub domain: Domain,
}

impl JamPlan {
    pub fn new(rho: f64, replicas: u64, seed: u64) -> Self {
        JamPlan {
            rho,
            replicas,
            seed: Seed(seed),
            domain: Domain::Auto,
        }
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    /// Window used for blocks reaching out to `max_abs_site` at time `t`.
    pub fn window(&self, max_abs_site: u64, t: f64) -> Result<Window> {
        Ok(match self.domain {
            Domain::Auto => {
                Window::centered(jam_window_half_width(max_abs_site, t), Boundary::Torus)
            }
            Domain::HalfWidth(h) => Window::centered(h, Boundary::Torus),
            Domain::PeriodicTorus(len) => Window::torus(len)?,
        })
    }
}

struct Block {
    cells: Vec<usize>,
    occupied: bool,
}

fn checked_window(plan: &JamPlan, max_abs_site: u64, t: f64) -> Result<Window> {
    if !(0.0..=1.0).contains(&plan.rho) {
        return Err(invalid(format!("rho must lie in [0, 1], got {}", plan.rho)));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid("survival time must be finite and nonnegative"));
    }
    if plan.replicas == 0 {
        return Err(invalid("need at least one replica"));
    }
    plan.window(max_abs_site, t)
}

/// Marks every label that visits a block during `[0, t]`; returns one bit
/// mask per label.
fn stir(window: Window, block_of: &[u8], t: f64, rng: &mut SimRng) -> Vec<u8> {
    let len = window.len;
    let mut label: Vec<u32> = (0..len as u32).collect();
    let mut visited: Vec<u8> = block_of.to_vec();
    let n_edges = window.n_edges();
    let mean = n_edges as f64 * t;
    let links = if mean > 0.0 {
        Poisson::new(mean).expect("positive mean").sample(rng) as u64
    } else {
        0
    };
    // Only the order of the links matters for the labels, and in that order
    // the edges are i.i.d. uniform.
    for _ in 0..links {
        let (a, b) = window.edge(index(rng, n_edges));
        label.swap(a, b);
        visited[label[a] as usize] |= block_of[a];
        visited[label[b] as usize] |= block_of[b];
    }
    visited
}

fn survival(
    plan: &JamPlan,
    window: Window,
    blocks: &[Block],
    t: f64,
    method: JamMethod,
) -> Result<SurvivalEstimate> {
    let rho = plan.rho;
    let mut block_of = vec![0u8; window.len];
    let mut need = 0u8;
    for (k, b) in blocks.iter().enumerate() {
        for &c in &b.cells {
            block_of[c] |= 1 << k;
        }
        if b.occupied {
            need |= 1 << k;
        }
    }
    let outcomes = (0..plan.replicas)
        .into_par_iter()
        .map(|i| {
            let replica = plan.seed.replica(i);
            let visited = stir(
                window,
                &block_of,
                t,
                &mut replica.derive(stream::DYNAMICS).rng(),
            );
            let mut state_rng = replica.derive(stream::ENVIRONMENT).rng();
            let mut weight = 1.0;
            for &mask in visited.iter().filter(|&&m| m != 0) {
                let wants_occupied = mask & need != 0;
                if wants_occupied && mask & !need != 0 {
                    return 0.0;
                }
                match method {
                    JamMethod::Graphical => weight *= if wants_occupied { rho } else { 1.0 - rho },
                    JamMethod::Direct => {
                        if (unit(&mut state_rng) < rho) != wants_occupied {
                            return 0.0;
                        }
                    }
                }
            }
            weight
        })
        .collect::<Vec<f64>>();
    let n = plan.replicas;
    let hits = outcomes.iter().filter(|&&w| w > 0.0).count() as u64;
    let (p_hat, stderr) = mean_stderr(&outcomes);
    let (ci_low, ci_high) = match method {
        JamMethod::Direct => wilson_interval(hits, n, Z95),
        JamMethod::Graphical => (
            (p_hat - Z95 * stderr).max(0.0),
            (p_hat + Z95 * stderr).min(1.0),
        ),
    };
    Ok(SurvivalEstimate {
        t,
        n_replicas: n,
        hits,
        p_hat,
        stderr,
        ci_low,
        ci_high,
        method,
    })
}

fn cells_of(window: Window, sites: impl IntoIterator<Item = i64>) -> Result<Vec<usize>> {
    let mut cells = sites
        .into_iter()
        .map(|s| window.index(s))
        .collect::<Result<Vec<_>>>()?;
    cells.sort_unstable();
    cells.dedup();
    Ok(cells)
}

/// Probability that every site of `q` stays vacant through `[0, t]`, for the
/// exclusion process started from Bernoulli(`ρ`).
pub fn estimate_traffic_jam(
    plan: &JamPlan,
    q: &[i64],
    t: f64,
    method: JamMethod,
) -> Result<SurvivalEstimate> {
    if q.is_empty() {
        return Err(invalid("site set Q is empty"));
    }
    let reach = q.iter().map(|s| s.unsigned_abs()).max().unwrap_or(0);
    let window = checked_window(plan, reach, t)?;
    let block = Block {
        cells: cells_of(window, q.iter().copied())?,
        occupied: false,
    };
    survival(plan, window, &[block], t, method)
}

/// Probability that `q` stays occupied and `qp` stays vacant through `[0, t]`.
/// The blocks must be at distance at least `2 √(t log t)`.
pub fn estimate_two_block(
    plan: &JamPlan,
    q: RangeInclusive<i64>,
    qp: RangeInclusive<i64>,
    t: f64,
    method: JamMethod,
) -> Result<SurvivalEstimate> {
    if q.is_empty() || qp.is_empty() {
        return Err(invalid("blocks must be nonempty"));
    }
    let gap = if q.end() < qp.start() {
        qp.start() - q.end()
    } else if qp.end() < q.start() {
        q.start() - qp.end()
    } else {
        return Err(invalid("blocks overlap"));
    };
    if (gap as f64) < slowdown_radius(t) {
        return Err(invalid(format!(
            "blocks at distance {gap}, need at least {:.3} = 2 sqrt(t log t)",
            slowdown_radius(t)
        )));
    }
    let reach = [*q.start(), *q.end(), *qp.start(), *qp.end()]
        .iter()
        .map(|s| s.unsigned_abs())
        .max()
        .unwrap_or(0);
    let window = checked_window(plan, reach, t)?;
    let blocks = [
        Block {
            cells: cells_of(window, q)?,
            occupied: true,
        },
        Block {
            cells: cells_of(window, qp)?,
            occupied: false,
        },
    ];
    survival(plan, window, &blocks, t, method)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(rho: f64, n: u64) -> JamPlan {
        JamPlan::new(rho, n, 17)
    }

    #[test]
    fn time_zero_is_product_measure() {
        let est =
            estimate_traffic_jam(&plan(0.3, 50), &[0, 1, 2], 0.0, JamMethod::Graphical).unwrap();
        assert!((est.p_hat - 0.7f64.powi(3)).abs() < 1e-15);
        assert_eq!(est.stderr, 0.0);
        let est =
            estimate_two_block(&plan(0.3, 50), 0..=1, 5..=6, 0.0, JamMethod::Graphical).unwrap();
        assert!((est.p_hat - 0.09 * 0.49).abs() < 1e-15);
    }

    #[test]
    fn direct_and_graphical_agree() {
        let p = plan(0.5, 20_000);
        let d = estimate_traffic_jam(&p, &[0], 1.0, JamMethod::Direct).unwrap();
        let g = estimate_traffic_jam(&p, &[0], 1.0, JamMethod::Graphical).unwrap();
        let tol = 3.0 * (d.stderr.powi(2) + g.stderr.powi(2)).sqrt();
        assert!((d.p_hat - g.p_hat).abs() < tol, "{d:?} {g:?}");
    }

    #[test]
    fn two_block_separation_is_enforced() {
        let p = plan(0.5, 10);
        assert!(estimate_two_block(&p, 0..=2, 3..=5, 16.0, JamMethod::Graphical).is_err());
        assert!(estimate_two_block(&p, 0..=2, 1..=5, 0.0, JamMethod::Graphical).is_err());
        assert!(estimate_two_block(&p, 0..=2, 30..=32, 16.0, JamMethod::Graphical).is_ok());
    }

    #[test]
    fn bound_formula() {
        assert!((traffic_jam_bound(0.5, 2, 3.0) - 0.5f64.powi(6)).abs() < 1e-15);
        assert_eq!(traffic_jam_bound(0.0, 3, 10.0), 1.0);
    }
}
