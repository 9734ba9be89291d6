//! Transient laws of finite-state chains by uniformization: the joint
//! environment–walker chain on a small torus, the environment alone, and the
//! environment killed when it violates a set of site constraints.

use super::ExactDistribution;
use crate::env::{SpinFlipSpec, Window};
use crate::error::{invalid, Error, Result};
use crate::walker::WalkerParams;

/// Environment dynamics on a torus of `L` sites, state `η` encoded with cell
/// `i` in bit `i`.
#[derive(Clone, Debug, PartialEq)]
pub enum OracleEnv {
    Frozen,
    Sse,
    SpinFlip(SpinFlipSpec),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleOptions {
    /// Target for the neglected Poisson tail of the uniformization.
    pub tol: f64,
    pub max_steps: usize,
    pub max_states: usize,
    pub max_len: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            tol: 1e-14,
            max_steps: 1_000_000,
            max_states: 1 << 22,
            max_len: 10,
        }
    }
}

/// Outgoing environment transitions of every configuration.
pub(crate) struct EnvChain {
    pub out: Vec<Vec<(usize, f64)>>,
    pub max_rate: f64,
}

impl EnvChain {
    pub fn new(len: usize, kind: &OracleEnv, opts: &OracleOptions) -> Result<Self> {
        if len == 0 || len > opts.max_len {
            return Err(Error::StateSpaceTooLarge {
                states: 1usize.checked_shl(len as u32).unwrap_or(usize::MAX),
                cap: 1 << opts.max_len,
            });
        }
        let n = 1usize << len;
        let mut out = vec![Vec::new(); n];
        match kind {
            OracleEnv::Frozen => {}
            OracleEnv::Sse => {
                let w = Window::torus(len)?;
                for (eta, list) in out.iter_mut().enumerate() {
                    for e in 0..w.n_edges() {
                        let (a, b) = w.edge(e);
                        if (eta >> a) & 1 != (eta >> b) & 1 {
                            list.push((eta ^ (1 << a) ^ (1 << b), 1.0));
                        }
                    }
                }
            }
            OracleEnv::SpinFlip(spec) => {
                let r = spec.radius();
                if len < spec.width() {
                    return Err(invalid(format!(
                        "torus of length {len} is shorter than the rate window {}",
                        spec.width()
                    )));
                }
                for (eta, list) in out.iter_mut().enumerate() {
                    for x in 0..len {
                        let mut pat = 0usize;
                        for d in -(r as i64)..=r as i64 {
                            let j = (x as i64 + d).rem_euclid(len as i64) as usize;
                            pat = (pat << 1) | ((eta >> j) & 1);
                        }
                        let c = spec.rate(pat);
                        if c > 0.0 {
                            list.push((eta ^ (1 << x), c));
                        }
                    }
                }
            }
        }
        let max_rate = out
            .iter()
            .map(|l| l.iter().map(|&(_, r)| r).sum::<f64>())
            .fold(0.0, f64::max);
        Ok(EnvChain { out, max_rate })
    }
}

/// Product Bernoulli(`rho`) law on `{0,1}^L`.
pub fn bernoulli_law(len: usize, rho: f64) -> Vec<f64> {
    (0..1usize << len)
        .map(|eta| {
            let k = eta.count_ones() as i32;
            rho.powi(k) * (1.0 - rho).powi(len as i32 - k)
        })
        .collect()
}

/// Upper bound on `P(Poisson(m) > n)` given `log P(Poisson(m) = n)`, valid
/// for `n + 2 > m`.
fn poisson_tail_bound(m: f64, n: usize, log_term: f64) -> f64 {
    let next = log_term + m.ln() - ((n + 1) as f64).ln();
    next.exp() / (1.0 - m / (n + 2) as f64)
}

/// Poisson weights up to the point where the neglected tail is at most `tol`,
/// and a bound on that tail.
pub(crate) fn poisson_weights(m: f64, tol: f64, max_steps: usize) -> Result<(Vec<f64>, f64)> {
    if m == 0.0 {
        return Ok((vec![1.0], 0.0));
    }
    let mut weights = Vec::new();
    let mut log_w = -m;
    let ln_m = m.ln();
    for n in 0..=max_steps {
        if n > 0 {
            log_w += ln_m - (n as f64).ln();
        }
        weights.push(log_w.exp());
        if (n as f64) + 1.0 > m {
            let tail = poisson_tail_bound(m, n, log_w);
            if tail <= tol {
                return Ok((weights, tail));
            }
        }
    }
    Err(Error::TruncationUnreachable {
        target: tol,
        steps: max_steps,
    })
}

/// `Σ_n Pois(n; Λ t_j) Pⁿ v0` for every `t_j`, with `step` computing `P v`.
fn uniformize(
    v0: Vec<f64>,
    lambda: f64,
    times: &[f64],
    opts: &OracleOptions,
    mut step: impl FnMut(&[f64], &mut [f64]),
) -> Result<Vec<(Vec<f64>, f64)>> {
    let mut plans = Vec::with_capacity(times.len());
    for &t in times {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(invalid(format!("time {t} must be finite and >= 0")));
        }
        plans.push(poisson_weights(lambda * t, opts.tol, opts.max_steps)?);
    }
    let n_max = plans.iter().map(|(w, _)| w.len()).max().unwrap_or(0);
    let mut results: Vec<Vec<f64>> = vec![vec![0.0; v0.len()]; times.len()];
    let mut v = v0;
    let mut next = vec![0.0; v.len()];
    for n in 0..n_max {
        for (res, (w, _)) in results.iter_mut().zip(&plans) {
            if let Some(&wn) = w.get(n) {
                for (r, &x) in res.iter_mut().zip(&v) {
                    *r += wn * x;
                }
            }
        }
        if n + 1 < n_max {
            next.iter_mut().for_each(|x| *x = 0.0);
            step(&v, &mut next);
            std::mem::swap(&mut v, &mut next);
        }
    }
    Ok(results
        .into_iter()
        .zip(plans)
        .map(|(r, (_, tail))| (r, tail))
        .collect())
}

/// Joint law of (environment, displacement) on `{0,1}^L × [−W, W]`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    pub len: usize,
    pub half_width: usize,
    /// Index `η · (2W + 1) + (k + W)`.
    pub probs: Vec<f64>,
    /// Mass carried out of `[−W, W]` by the walker.
    pub leaked: f64,
    pub truncation_error: f64,
}

impl JointDistribution {
    pub fn displacement(&self) -> ExactDistribution {
        let w = 2 * self.half_width + 1;
        let mut probs = vec![0.0; w];
        for chunk in self.probs.chunks(w) {
            for (p, &x) in probs.iter_mut().zip(chunk) {
                *p += x;
            }
        }
        ExactDistribution::from_range(
            -(self.half_width as i64),
            probs,
            self.truncation_error + self.leaked,
        )
    }

    /// Law of the environment alone, not counting leaked mass.
    pub fn env_marginal(&self) -> Vec<f64> {
        let w = 2 * self.half_width + 1;
        self.probs.chunks(w).map(|c| c.iter().sum()).collect()
    }
}

/// Smallest `W` with `P(Poisson(m) > W) <= eps` (up to the tail bound).
pub(crate) fn poisson_quantile(m: f64, eps: f64) -> usize {
    if m == 0.0 {
        return 0;
    }
    let mut log_w = -m;
    let mut n = 0usize;
    loop {
        if (n as f64) + 1.0 > m && poisson_tail_bound(m, n, log_w) <= eps {
            return n;
        }
        n += 1;
        log_w += m.ln() - (n as f64).ln();
    }
}

/// Joint laws at each time in `times` for the walker on the torus (positions
/// read modulo `L`), started from the environment law `init` and displacement 0.
pub fn annealed_joint(
    len: usize,
    kind: &OracleEnv,
    init: &[f64],
    params: &WalkerParams,
    times: &[f64],
    opts: &OracleOptions,
) -> Result<Vec<JointDistribution>> {
    params.validate_continuous()?;
    let chain = EnvChain::new(len, kind, opts)?;
    if init.len() != chain.out.len() {
        return Err(invalid("initial law has the wrong number of states"));
    }
    let rate = params.total_rate();
    let t_max = times.iter().copied().fold(0.0, f64::max);
    let half = poisson_quantile(rate * t_max, opts.tol * 1e-2).max(1);
    let width = 2 * half + 1;
    let states = chain.out.len() * width;
    if states > opts.max_states {
        return Err(Error::StateSpaceTooLarge {
            states,
            cap: opts.max_states,
        });
    }
    let lambda = chain.max_rate + rate;
    let (pr_occ, pr_vac) = (params.right_prob(true), params.right_prob(false));
    let sink = states;
    let mut v0 = vec![0.0; states + 1];
    for (eta, &w) in init.iter().enumerate() {
        v0[eta * width + half] = w;
    }
    let step = |v: &[f64], out: &mut [f64]| {
        out[sink] += v[sink];
        for (eta, trans) in chain.out.iter().enumerate() {
            let env_out: f64 = trans.iter().map(|&(_, r)| r).sum();
            let stay = 1.0 - (env_out + rate) / lambda;
            let base = eta * width;
            for k in 0..width {
                let m = v[base + k];
                if m == 0.0 {
                    continue;
                }
                out[base + k] += m * stay;
                for &(to, r) in trans {
                    out[to * width + k] += m * r / lambda;
                }
                let site = (k as i64 - half as i64).rem_euclid(len as i64) as usize;
                let pr = if (eta >> site) & 1 == 1 {
                    pr_occ
                } else {
                    pr_vac
                };
                let jump = m * rate / lambda;
                if k + 1 < width {
                    out[base + k + 1] += jump * pr;
                } else {
                    out[sink] += jump * pr;
                }
                if k > 0 {
                    out[base + k - 1] += jump * (1.0 - pr);
                } else {
                    out[sink] += jump * (1.0 - pr);
                }
            }
        }
    };
    let res = uniformize(v0, lambda, times, opts, step)?;
    Ok(res
        .into_iter()
        .map(|(mut v, tail)| {
            let leaked = v.pop().unwrap_or(0.0);
            JointDistribution {
                len,
                half_width: half,
                probs: v,
                leaked,
                truncation_error: tail,
            }
        })
        .collect())
}

/// Displacement law at time `t` from a Bernoulli(`rho`) start.
pub fn annealed_exact(
    len: usize,
    kind: &OracleEnv,
    rho: f64,
    params: &WalkerParams,
    t: f64,
) -> Result<ExactDistribution> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(invalid(format!("density {rho} outside [0, 1]")));
    }
    let opts = OracleOptions::default();
    let joint = annealed_joint(len, kind, &bernoulli_law(len, rho), params, &[t], &opts)?;
    Ok(joint[0].displacement())
}

/// Law of the environment alone at each time, with its truncation error.
pub fn evolve_env_law(
    len: usize,
    kind: &OracleEnv,
    init: &[f64],
    times: &[f64],
    opts: &OracleOptions,
) -> Result<Vec<(Vec<f64>, f64)>> {
    killed_evolution(len, kind, init, &[], times, opts)
}

/// Probability that the environment satisfies every `(cell, value)`
/// constraint throughout `[0, t]`, with the truncation error.
pub fn survival_exact(
    len: usize,
    kind: &OracleEnv,
    init: &[f64],
    constraints: &[(usize, bool)],
    t: f64,
    opts: &OracleOptions,
) -> Result<(f64, f64)> {
    let res = killed_evolution(len, kind, init, constraints, &[t], opts)?;
    let (v, tail) = &res[0];
    Ok((v.iter().sum(), *tail))
}

fn killed_evolution(
    len: usize,
    kind: &OracleEnv,
    init: &[f64],
    constraints: &[(usize, bool)],
    times: &[f64],
    opts: &OracleOptions,
) -> Result<Vec<(Vec<f64>, f64)>> {
    let chain = EnvChain::new(len, kind, opts)?;
    if init.len() != chain.out.len() {
        return Err(invalid("initial law has the wrong number of states"));
    }
    if let Some(&(c, _)) = constraints.iter().find(|&&(c, _)| c >= len) {
        return Err(invalid(format!("constraint on cell {c} outside the torus")));
    }
    let alive = |eta: usize| constraints.iter().all(|&(c, v)| ((eta >> c) & 1 == 1) == v);
    let n = chain.out.len();
    let v0: Vec<f64> = (0..n)
        .map(|eta| if alive(eta) { init[eta] } else { 0.0 })
        .collect();
    let lambda = chain.max_rate.max(1e-300);
    let step = |v: &[f64], out: &mut [f64]| {
        for (eta, trans) in chain.out.iter().enumerate() {
            let m = v[eta];
            if m == 0.0 {
                continue;
            }
            let env_out: f64 = trans.iter().map(|&(_, r)| r).sum();
            out[eta] += m * (1.0 - env_out / lambda);
            for &(to, r) in trans {
                if alive(to) {
                    out[to] += m * r / lambda;
                }
            }
        }
    };
    if chain.max_rate == 0.0 {
        return Ok(times.iter().map(|_| (v0.clone(), 0.0)).collect());
    }
    uniformize(v0, lambda, times, opts, step)
}
