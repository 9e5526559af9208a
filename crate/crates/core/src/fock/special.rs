//! Special functions used by the oscillator and Wigner code.

use std::f64::consts::PI;

/// Dawson's integral `D(z) = exp(-z²) ∫₀ᶻ exp(t²) dt`.
///
/// Small arguments use the Maclaurin series. Elsewhere Rybicki's sampling
/// sum `D(z) = π^{-1/2} Σ_{n odd} exp(-(z - n h)²) / n` is used with a step
/// small enough that its aliasing error (`~exp(-(π/2h)²)`) sits far below
/// double precision.
pub fn dawson(z: f64) -> f64 {
    const STEP: f64 = 0.2;
    const HALF_TERMS: i64 = 37;

    let a = z.abs();
    if a < 0.2 {
        // D(z) = Σ (-1)^k 2^k z^{2k+1} / (2k+1)!!
        let z2 = z * z;
        let mut term = z;
        let mut sum = z;
        for k in 1..20 {
            term *= -2.0 * z2 / (2 * k + 1) as f64;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        return sum;
    }
    if a > 1e6 {
        let inv = 1.0 / (2.0 * z * z);
        return (1.0 + inv * (1.0 + 3.0 * inv)) / (2.0 * z);
    }

    // Shift to the nearest even multiple of the step so the surviving terms
    // are centred on the argument.
    let n0 = 2 * (0.5 * a / STEP).round() as i64;
    let offset = a - n0 as f64 * STEP;
    let mut sum = 0.0;
    let mut k = -HALF_TERMS;
    while k <= HALF_TERMS {
        let d = offset - k as f64 * STEP;
        sum += (-d * d).exp() / (k + n0) as f64;
        k += 2;
    }
    sum / PI.sqrt() * z.signum()
}

/// Generalized Laguerre polynomial `L_n^{(alpha)}(x)` by the three-term recurrence.
pub fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Binomial coefficient as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `n!` as a float.
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// exp(-z²) ∫₀ᶻ exp(t²) dt by composite Simpson, written as
    /// ∫₀ᶻ exp((t-z)(t+z)) dt so nothing overflows.
    fn dawson_oracle(z: f64) -> f64 {
        let n = 400_000;
        let h = z / n as f64;
        let f = |t: f64| ((t - z) * (t + z)).exp();
        let mut s = f(0.0) + f(z);
        for i in 1..n {
            let t = i as f64 * h;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(t);
        }
        s * h / 3.0
    }

    #[test]
    fn dawson_matches_quadrature() {
        for &z in &[0.0, 0.05, 0.19, 0.21, 0.5, 0.9241388730, 1.0, 2.0, 3.7, 6.0, 8.5, 12.0] {
            let expect = if z == 0.0 { 0.0 } else { dawson_oracle(z) };
            let got = dawson(z);
            assert!((got - expect).abs() < 1e-13, "z={z}: {got} vs {expect}");
            assert!((dawson(-z) + got).abs() < 1e-15);
        }
        // Maximum of D(z) sits at z ≈ 0.9241388730 with value ≈ 0.5410442246.
        assert!((dawson(0.9241388730) - 0.5410442246).abs() < 1e-9);
    }

    #[test]
    fn dawson_tail_is_one_over_two_z() {
        let z = 50.0;
        assert!((dawson(z) * 2.0 * z - 1.0).abs() < 3e-4);
        let z = 2e6;
        assert!((dawson(z) * 2.0 * z - 1.0).abs() < 1e-12);
    }

    #[test]
    fn laguerre_low_orders() {
        let x = 0.7;
        assert_eq!(laguerre(0, 1.0, x), 1.0);
        assert!((laguerre(1, 0.0, x) - (1.0 - x)).abs() < 1e-15);
        assert!((laguerre(2, 0.0, x) - (x * x - 4.0 * x + 2.0) / 2.0).abs() < 1e-15);
        // L_2^{(1)}(x) = (x² - 6x + 6)/2
        assert!((laguerre(2, 1.0, x) - (x * x - 6.0 * x + 6.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn combinatorics() {
        assert_eq!(binomial(4, 2), 6.0);
        assert_eq!(binomial(2, 3), 0.0);
        assert_eq!(factorial(5), 120.0);
        assert_eq!(factorial(0), 1.0);
    }
}
