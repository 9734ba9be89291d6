use std::io::{self, Write};

/// Exact law of the walker displacement, with the mass that the computation
/// could not account for (Poisson truncation plus leakage out of the
/// displacement window).
#[derive(Clone, Debug, PartialEq)]
pub struct ExactDistribution {
    pub support: Vec<i64>,
    pub probs: Vec<f64>,
    pub truncation_error: f64,
}

impl ExactDistribution {
    /// Distribution on the contiguous range starting at `lo`.
    pub fn from_range(lo: i64, probs: Vec<f64>, truncation_error: f64) -> Self {
        ExactDistribution {
            support: (lo..lo + probs.len() as i64).collect(),
            probs,
            truncation_error,
        }
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn prob(&self, k: i64) -> f64 {
        match self.support.binary_search(&k) {
            Ok(i) => self.probs[i],
            Err(_) => 0.0,
        }
    }

    /// `P(X >= k)`.
    pub fn tail_ge(&self, k: i64) -> f64 {
        let start = self.support.partition_point(|&x| x < k);
        self.probs[start..].iter().sum()
    }

    /// Reflected law `k -> -k`.
    pub fn reflected(&self) -> Self {
        let mut pairs: Vec<(i64, f64)> = self
            .support
            .iter()
            .zip(&self.probs)
            .map(|(&k, &p)| (-k, p))
            .collect();
        pairs.sort_by_key(|&(k, _)| k);
        ExactDistribution {
            support: pairs.iter().map(|&(k, _)| k).collect(),
            probs: pairs.iter().map(|&(_, p)| p).collect(),
            truncation_error: self.truncation_error,
        }
    }

    /// Largest pointwise difference over the union of the supports.
    pub fn max_abs_diff(&self, other: &ExactDistribution) -> f64 {
        self.union_support(other)
            .into_iter()
            .map(|k| (self.prob(k) - other.prob(k)).abs())
            .fold(0.0, f64::max)
    }

    pub fn total_variation(&self, other: &ExactDistribution) -> f64 {
        0.5 * self
            .union_support(other)
            .into_iter()
            .map(|k| (self.prob(k) - other.prob(k)).abs())
            .sum::<f64>()
    }

    fn union_support(&self, other: &ExactDistribution) -> Vec<i64> {
        let mut keys: Vec<i64> = self.support.iter().chain(&other.support).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        keys
    }

    /// CSV rows `value,probability` preceded by a comment carrying the
    /// truncation error.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# truncation_error={:e}", self.truncation_error)?;
        writeln!(w, "value,probability")?;
        for (k, p) in self.support.iter().zip(&self.probs) {
            writeln!(w, "{k},{p:e}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookups_and_reflection() {
        let d = ExactDistribution::from_range(-1, vec![0.25, 0.5, 0.25], 0.0);
        assert_eq!(d.prob(0), 0.5);
        assert_eq!(d.prob(7), 0.0);
        assert_eq!(d.tail_ge(0), 0.75);
        assert_eq!(d.tail_ge(-5), 1.0);
        let skew = ExactDistribution::from_range(0, vec![0.5, 0.5], 0.0);
        assert_eq!(skew.reflected().support, vec![-1, 0]);
        assert_eq!(skew.total_variation(&skew.reflected()), 0.5);
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# truncation_error=0e0\nvalue,probability\n-1,2.5e-1\n"));
    }
}
