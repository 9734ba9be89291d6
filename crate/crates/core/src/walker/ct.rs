use super::{Environment, WalkerParams, WalkerPath};
use crate::error::{invalid, Result};
use crate::rng::{exp_gap, unit, Seed, SimRng};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CtSummary {
    pub jumps: u64,
    /// `∫ ξ_s(X_s) ds` up to the last checkpoint; zero unless requested.
    pub occupied_time: f64,
}

fn check_checkpoints(start: f64, checkpoints: &[f64]) -> Result<()> {
    let mut prev = start;
    for &c in checkpoints {
        if !(c >= prev && c.is_finite()) {
            return Err(invalid(
                "checkpoints must be finite, increasing and not before the clock",
            ));
        }
        prev = c;
    }
    Ok(())
}

/// Runs one walker from the origin at the environment's current clock and
/// writes its position at each checkpoint into `out`.
///
/// Jump attempts arrive at rate `α + β` whatever the environment does; at an
/// attempt the walker reads its site just before the attempt time.
pub fn run_ct<E: Environment + ?Sized>(
    env: &mut E,
    params: &WalkerParams,
    checkpoints: &[f64],
    rng: &mut SimRng,
    track_occupation: bool,
    out: &mut Vec<i64>,
) -> Result<CtSummary> {
    let start = env.time();
    check_checkpoints(start, checkpoints)?;
    let rate = params.total_rate();
    let (p_occ, p_vac) = (params.right_prob(true), params.right_prob(false));
    let mut x = 0i64;
    let mut idx = env.locate(0)?;
    let mut acc = [0.0];
    let mut jumps = 0u64;
    let mut next = start + exp_gap(rng, rate);
    for &cp in checkpoints {
        while next <= cp {
            let watch = [idx];
            env.advance(next, if track_occupation { &watch } else { &[] }, &mut acc)?;
            let pr = if env.cell(idx) { p_occ } else { p_vac };
            x += if unit(rng) < pr { 1 } else { -1 };
            idx = env.locate(x)?;
            jumps += 1;
            next += exp_gap(rng, rate);
        }
        let watch = [idx];
        env.advance(cp, if track_occupation { &watch } else { &[] }, &mut acc)?;
        out.push(x);
    }
    Ok(CtSummary {
        jumps,
        occupied_time: acc[0],
    })
}

/// Full trajectory of one walker on `[env.time(), t_max]`.
pub fn simulate_ct<E: Environment + ?Sized>(
    env: &mut E,
    params: &WalkerParams,
    t_max: f64,
    seed: Seed,
) -> Result<WalkerPath> {
    params.validate_continuous()?;
    let start = env.time();
    check_checkpoints(start, &[t_max])?;
    let mut rng = seed.rng();
    let rate = params.total_rate();
    let mut x = 0i64;
    let mut idx = env.locate(0)?;
    let mut path = WalkerPath::start(start, env.cell(idx));
    let mut acc = [0.0];
    let mut t = start + exp_gap(&mut rng, rate);
    while t <= t_max {
        env.advance(t, &[idx], &mut acc)?;
        let pr = params.right_prob(env.cell(idx));
        x += if unit(&mut rng) < pr { 1 } else { -1 };
        idx = env.locate(x)?;
        path.push(t, x, env.cell(idx));
        t += exp_gap(&mut rng, rate);
    }
    env.advance(t_max, &[idx], &mut acc)?;
    path.occupied_time = acc[0];
    path.t_end = t_max;
    Ok(path)
}
