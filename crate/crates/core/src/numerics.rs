/// Pairwise (cascade) summation; error grows as O(log n) instead of O(n).
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 64;
    if values.len() <= BLOCK {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

/// Pairwise sum of `f(i)` for `i in 0..len`.
pub fn pairwise_sum_by(len: usize, f: &impl Fn(usize) -> f64) -> f64 {
    fn go(lo: usize, hi: usize, f: &impl Fn(usize) -> f64) -> f64 {
        if hi - lo <= 64 {
            (lo..hi).map(f).sum()
        } else {
            let mid = lo + (hi - lo) / 2;
            go(lo, mid, f) + go(mid, hi, f)
        }
    }
    go(0, len, f)
}

/// `count` evenly spaced samples from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (count - 1) as f64;
            (0..count)
                .map(|i| if i + 1 == count { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_exact_small_sums() {
        let v: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 500500.0);
        assert_eq!(pairwise_sum_by(1000, &|i| (i + 1) as f64), 500500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn pairwise_beats_naive_on_tiny_increments() {
        let mut v = vec![1.0];
        v.extend(std::iter::repeat_n(1e-16, 1 << 16));
        let exact = 1.0 + (1 << 16) as f64 * 1e-16;
        let naive: f64 = v.iter().sum();
        assert!((pairwise_sum(&v) - exact).abs() < 1e-2 * (naive - exact).abs());
    }

    #[test]
    fn linspace_endpoints() {
        let l = linspace(-0.12, 0.35, 200);
        assert_eq!(l.len(), 200);
        assert_eq!(l[0], -0.12);
        assert_eq!(l[199], 0.35);
        assert_eq!(linspace(1.0, 2.0, 1), vec![1.0]);
    }
}
