//! Deterministic reductions.
//!
//! All cell sums in the crate go through [`pairwise_sum`] so results do not
//! depend on how work is scheduled.

const BLOCK: usize = 32;

/// Pairwise (cascade) summation with a fixed split order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Pairwise sum of `f(i)` for `i in 0..len`, without materializing the terms
/// for short inputs.
pub fn pairwise_sum_by<F: Fn(usize) -> f64>(len: usize, f: F) -> f64 {
    fn rec<F: Fn(usize) -> f64>(lo: usize, hi: usize, f: &F) -> f64 {
        if hi - lo <= BLOCK {
            return (lo..hi).map(f).sum();
        }
        let mid = lo + (hi - lo) / 2;
        rec(lo, mid, f) + rec(mid, hi, f)
    }
    rec(0, len, &f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_naive_on_exact_values() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499_500.0);
        assert_eq!(pairwise_sum_by(1000, |i| i as f64), 499_500.0);
    }

    #[test]
    fn both_forms_agree_bitwise() {
        let xs: Vec<f64> = (0..777).map(|i| (i as f64 * 0.37).sin()).collect();
        assert_eq!(
            pairwise_sum(&xs).to_bits(),
            pairwise_sum_by(xs.len(), |i| xs[i]).to_bits()
        );
    }

    #[test]
    fn empty_is_zero() {
        assert_eq!(pairwise_sum(&[]), 0.0);
    }
}
