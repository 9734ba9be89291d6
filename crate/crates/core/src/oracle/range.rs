//! Range of the rate-1 continuous-time simple symmetric random walk.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::rng::{exp_gap, Seed};

/// Monte Carlo mean of `|R_t|`, the number of distinct sites visited by time
/// `t`, with its standard error.
pub fn srw_range_mean(t: f64, n: usize, seed: Seed) -> Result<(f64, f64)> {
    let curve = srw_range_curve(&[t], n, seed)?;
    Ok(curve[0])
}

/// Mean range at each of the increasing `times`, all read off the same paths.
pub fn srw_range_curve(times: &[f64], n: usize, seed: Seed) -> Result<Vec<(f64, f64)>> {
    if n == 0 {
        return Err(invalid("need at least one path"));
    }
    if times.iter().any(|&t| !(t >= 0.0 && t.is_finite())) || times.windows(2).any(|w| w[1] < w[0])
    {
        return Err(invalid("times must be finite, non-negative and increasing"));
    }
    let k = times.len();
    let sums = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.replica(i).rng();
            let (mut x, mut lo, mut hi) = (0i64, 0i64, 0i64);
            let mut t = exp_gap(&mut rng, 1.0);
            let mut out = vec![0.0f64; 2 * k];
            for (j, &tj) in times.iter().enumerate() {
                while t <= tj {
                    x += if rand::Rng::random::<bool>(&mut rng) {
                        1
                    } else {
                        -1
                    };
                    lo = lo.min(x);
                    hi = hi.max(x);
                    t += exp_gap(&mut rng, 1.0);
                }
                let r = (hi - lo + 1) as f64;
                out[j] = r;
                out[k + j] = r * r;
            }
            out
        })
        .reduce(
            || vec![0.0; 2 * k],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let nf = n as f64;
    Ok((0..k)
        .map(|j| {
            let mean = sums[j] / nf;
            let var = if n > 1 {
                ((sums[k + j] - nf * mean * mean) / (nf - 1.0)).max(0.0)
            } else {
                0.0
            };
            (mean, (var / nf).sqrt())
        })
        .collect())
}
