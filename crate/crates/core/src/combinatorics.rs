//! Binomial coefficients and factorials for the series expansions.
//!
//! Small arguments use exact integer arithmetic; large arguments fall back to
//! log-factorials so that series terms of order several hundred can still be
//! formed without overflow. The switch point is covered by a consistency test.

use std::sync::OnceLock;

/// Largest top index for which `binomial` uses the exact integer path.
pub const EXACT_BINOMIAL_LIMIT: u64 = 30;

/// Exact binomial coefficient. The running product stays divisible at every
/// step, so the division below is exact.
pub fn binomial_u128(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc * (n - k + i) as u128 / i as u128;
    }
    acc
}

fn ln_factorial_table() -> &'static Vec<f64> {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(2048);
        t.push(0.0);
        let mut acc = 0.0f64;
        for i in 1..2048u64 {
            acc += (i as f64).ln();
            t.push(acc);
        }
        t
    })
}

/// Natural log of `n!`.
pub fn ln_factorial(n: u64) -> f64 {
    let table = ln_factorial_table();
    if (n as usize) < table.len() {
        table[n as usize]
    } else {
        // Stirling with the leading correction term; not reached by the
        // series code, which caps orders far below the table size.
        let x = n as f64;
        x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + 1.0 / (12.0 * x)
    }
}

/// Natural log of the binomial coefficient.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Binomial coefficient as `f64`: exact integers up to
/// [`EXACT_BINOMIAL_LIMIT`], log-gamma beyond.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    if n <= EXACT_BINOMIAL_LIMIT {
        binomial_u128(n, k) as f64
    } else {
        ln_binomial(n, k).exp()
    }
}

/// Factorial in `f64` (exact through 22!, representable through 170!).
pub fn factorial(n: u64) -> f64 {
    let mut acc = 1.0f64;
    for i in 2..=n {
        acc *= i as f64;
    }
    acc
}
