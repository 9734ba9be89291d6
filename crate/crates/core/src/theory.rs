//! Closed-form reference values: critical density, speeds, the rate function
//! of the homogeneous biased walk and the quenched symmetry offset.

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta: f64,
    pub rho: f64,
    /// Right-probability of the discrete-time walk on an occupied site.
    pub p: f64,
}

impl ModelParams {
    /// Continuous-time parameters; `p` is set to the jump-chain value `α/(α+β)`.
    pub fn new(alpha: f64, beta: f64, rho: f64) -> Result<Self> {
        let m = ModelParams {
            alpha,
            beta,
            rho,
            p: alpha / (alpha + beta),
        };
        m.validate()?;
        Ok(m)
    }

    /// Discrete-time parameters, mapped to rates `α = p`, `β = 1 − p`.
    pub fn discrete(p: f64, rho: f64) -> Result<Self> {
        if !(p > 0.5 && p < 1.0) {
            return Err(invalid(format!("need 1/2 < p < 1, got {p}")));
        }
        ModelParams::new(p, 1.0 - p, rho)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < self.alpha && self.alpha.is_finite()) {
            return Err(invalid(format!(
                "need 0 < beta < alpha < inf, got alpha={} beta={}",
                self.alpha, self.beta
            )));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(invalid(format!("density {} outside [0, 1]", self.rho)));
        }
        Ok(())
    }
}

/// `α / (α + β)`.
pub fn rho_c(m: &ModelParams) -> f64 {
    m.alpha / (m.alpha + m.beta)
}

/// Speed of the walk in a static Bernoulli environment for `ρ ∈ [1/2, 1]`:
/// zero up to `ρ_c`, then `(α−β)(ρ−ρ_c) / (ρ(1−ρ_c) + ρ_c(1−ρ))`.
pub fn static_speed(m: &ModelParams) -> Result<f64> {
    if !(0.5..=1.0).contains(&m.rho) {
        return Err(invalid(format!(
            "static speed is stated for rho in [1/2, 1], got {}; use the mirrored form",
            m.rho
        )));
    }
    let rc = rho_c(m);
    if m.rho <= rc {
        return Ok(0.0);
    }
    Ok((m.alpha - m.beta) * (m.rho - rc) / (m.rho * (1.0 - rc) + rc * (1.0 - m.rho)))
}

/// Static speed on all of `[0, 1]` through `v(ρ) = −v(1−ρ)`.
pub fn static_speed_mirrored(m: &ModelParams) -> Result<f64> {
    if m.rho >= 0.5 {
        static_speed(m)
    } else {
        let flipped = ModelParams {
            rho: 1.0 - m.rho,
            ..*m
        };
        static_speed(&flipped).map(|v| -v)
    }
}

/// `(2ρ − 1)(2p − 1)`.
pub fn mean_env_speed(m: &ModelParams) -> f64 {
    (2.0 * m.rho - 1.0) * (2.0 * m.p - 1.0)
}

/// `(2ρ̃ − 1)(α − β)`.
pub fn perturbative_speed(rho_tilde: f64, m: &ModelParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&rho_tilde) {
        return Err(invalid(format!("rho_tilde {rho_tilde} outside [0, 1]")));
    }
    Ok((2.0 * rho_tilde - 1.0) * (m.alpha - m.beta))
}

/// Cumulant `α(e^λ − 1) + β(e^{−λ} − 1)` of the walk jumping right at rate
/// `α` and left at rate `β`.
pub fn homogeneous_cumulant(lambda: f64, alpha: f64, beta: f64) -> f64 {
    alpha * lambda.exp_m1() + beta * (-lambda).exp_m1()
}

/// Upper-deviation rate of the homogeneous walk, the Legendre transform of
/// the cumulant restricted to `θ > α − β`:
/// `θ log((θ + s)/(2α)) − s + α + β` with `s = √(θ² + 4αβ)`.
pub fn homogeneous_rate(theta: f64, alpha: f64, beta: f64) -> f64 {
    if theta <= alpha - beta {
        return 0.0;
    }
    let s = (theta * theta + 4.0 * alpha * beta).sqrt();
    (theta * ((theta + s) / (2.0 * alpha)).ln() - s + alpha + beta).max(0.0)
}

/// `θ (2ρ − 1) log(α/β)`.
pub fn quenched_symmetry_offset(theta: f64, m: &ModelParams) -> Result<f64> {
    if theta < 0.0 {
        return Err(invalid("symmetry offset needs theta >= 0"));
    }
    Ok(theta * (2.0 * m.rho - 1.0) * (m.alpha / m.beta).ln())
}

/// `P(Y_t = k)` for the walk jumping right at rate `α` and left at rate `β`:
/// `e^{−(α+β)t} (α/β)^{k/2} I_{|k|}(2t√(αβ))`, summed in log space.
pub fn biased_walk_pmf(k: i64, alpha: f64, beta: f64, t: f64) -> f64 {
    biased_walk_log_pmf(k, alpha, beta, t).exp()
}

/// `log P(Y_t = k)`; stays finite where the probability underflows.
pub fn biased_walk_log_pmf(k: i64, alpha: f64, beta: f64, t: f64) -> f64 {
    if t == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if beta == 0.0 {
        // pure birth process
        if k < 0 {
            return f64::NEG_INFINITY;
        }
        let lt = alpha * t;
        let ln_fact: f64 = (1..=k).map(|j| (j as f64).ln()).sum();
        return k as f64 * lt.ln() - lt - ln_fact;
    }
    let n = k.unsigned_abs();
    let z2 = t * (alpha * beta).sqrt();
    let ln_z2 = z2.ln();
    let ln_n_fact: f64 = (1..=n).map(|j| (j as f64).ln()).sum();
    // log of (z/2)^{2m+n} / (m! (m+n)!) at m = 0
    let mut log_term = n as f64 * ln_z2 - ln_n_fact;
    let mut terms = vec![log_term];
    let mut peak = log_term;
    let mut m = 0u64;
    loop {
        m += 1;
        log_term += 2.0 * ln_z2 - (m as f64).ln() - ((m + n) as f64).ln();
        terms.push(log_term);
        peak = peak.max(log_term);
        if log_term < peak - 60.0 && (m as f64) > z2 {
            break;
        }
    }
    let log_bessel = peak + terms.iter().map(|&l| (l - peak).exp()).sum::<f64>().ln();
    -(alpha + beta) * t + 0.5 * k as f64 * (alpha / beta).ln() + log_bessel
}
