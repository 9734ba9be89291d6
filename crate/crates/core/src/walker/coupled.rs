use super::{Environment, WalkerParams, WalkerPath};
use crate::error::{invalid, Result};
use crate::rng::{exp_gap, unit, Seed};

/// Two walkers on one environment realisation, coupled so that `lower`
/// never overtakes `upper`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoupledPair {
    pub lower: WalkerPath,
    pub upper: WalkerPath,
    /// Events after which `lower > upper`; zero for a correct coupling.
    pub violations: u64,
    /// Time from which the two walkers move together, if they met.
    pub glued_at: Option<f64>,
}

/// Runs the monotone coupling on `[env.time(), t_max]`.
///
/// While the gap is even both walkers share one proposal clock and one
/// uniform mark per proposal; a walker steps right iff the mark is below its
/// own right-probability. The gap then changes by 0 or ±2 and cannot change
/// sign without first closing. With an odd initial gap a shared step could
/// swap the walkers, so they run on independent clocks (moving one at a time)
/// until they meet and share the clock from then on.
pub fn simulate_coupled_pair<E: Environment + ?Sized>(
    env: &mut E,
    params: &WalkerParams,
    x0_lower: i64,
    x0_upper: i64,
    t_max: f64,
    seed: Seed,
) -> Result<CoupledPair> {
    params.validate_continuous()?;
    if x0_lower > x0_upper {
        return Err(invalid("need x0_lower <= x0_upper"));
    }
    let start = env.time();
    if t_max < start {
        return Err(invalid("horizon precedes the environment clock"));
    }
    let rate = params.total_rate();
    let mut shared = seed.derive(0).rng();
    let mut own = [seed.derive(1).rng(), seed.derive(2).rng()];
    let mut x = [x0_lower, x0_upper];
    let mut idx = [env.locate(x[0])?, env.locate(x[1])?];
    let mut paths = [
        WalkerPath::start(start, env.cell(idx[0])),
        WalkerPath::start(start, env.cell(idx[1])),
    ];
    paths[0].positions[0] = x[0];
    paths[1].positions[0] = x[1];
    let mut acc = [0.0, 0.0];
    let mut violations = 0u64;
    let mut glued = (x[1] - x[0]) % 2 == 0;
    let mut glued_at = (x[0] == x[1]).then_some(start);

    if !glued {
        let mut next = [
            start + exp_gap(&mut own[0], rate),
            start + exp_gap(&mut own[1], rate),
        ];
        loop {
            let k = if next[0] <= next[1] { 0 } else { 1 };
            let t = next[k];
            if t > t_max {
                break;
            }
            env.advance(t, &idx, &mut acc)?;
            let pr = params.right_prob(env.cell(idx[k]));
            x[k] += if unit(&mut own[k]) < pr { 1 } else { -1 };
            idx[k] = env.locate(x[k])?;
            paths[k].push(t, x[k], env.cell(idx[k]));
            violations += (x[0] > x[1]) as u64;
            next[k] = t + exp_gap(&mut own[k], rate);
            if x[0] == x[1] {
                glued = true;
                glued_at = Some(t);
                break;
            }
        }
    }

    if glued {
        let mut t = env.time() + exp_gap(&mut shared, rate);
        while t <= t_max {
            env.advance(t, &idx, &mut acc)?;
            let u = unit(&mut shared);
            for k in 0..2 {
                let pr = params.right_prob(env.cell(idx[k]));
                x[k] += if u < pr { 1 } else { -1 };
            }
            for k in 0..2 {
                idx[k] = env.locate(x[k])?;
                paths[k].push(t, x[k], env.cell(idx[k]));
            }
            violations += (x[0] > x[1]) as u64;
            if glued_at.is_none() && x[0] == x[1] {
                glued_at = Some(t);
            }
            t += exp_gap(&mut shared, rate);
        }
    }

    env.advance(t_max, &idx, &mut acc)?;
    let [mut lower, mut upper] = paths;
    lower.occupied_time = acc[0];
    upper.occupied_time = acc[1];
    lower.t_end = t_max;
    upper.t_end = t_max;
    Ok(CoupledPair {
        lower,
        upper,
        violations,
        glued_at,
    })
}
