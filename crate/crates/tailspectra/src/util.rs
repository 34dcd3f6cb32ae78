//! Small shared helpers.

/// Formats an `f64` with 17 significant digits, enough for an exact
/// decimal round-trip.
pub(crate) fn format_f64_17(v: f64) -> String {
    format!("{:.16e}", v)
}

/// Exact binomial coefficient in `f64`, returning `None` once the running
/// product exceeds `cap`.
pub(crate) fn binomial_capped(n: usize, k: usize, cap: f64) -> Option<f64> {
    if k > n {
        return Some(0.0);
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
        if acc > cap {
            return None;
        }
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_round_trips() {
        for v in [0.1, -3.5e300, 1.0 / 3.0, 2.2250738585072014e-308] {
            let parsed: f64 = format_f64_17(v).parse().unwrap();
            assert_eq!(parsed.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial_capped(6, 2, 1e9), Some(15.0));
        assert_eq!(binomial_capped(5, 2, 1e9), Some(10.0));
        assert_eq!(binomial_capped(4, 6, 1e9), Some(0.0));
        assert_eq!(binomial_capped(100, 5, 1e5), None);
    }
}
