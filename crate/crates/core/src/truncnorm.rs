//! Normal draws restricted to an interval.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erfc;

/// Standardized bound beyond which the inverse-CDF route loses precision.
const TAIL_START: f64 = 3.0;

#[inline]
fn std_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn std_inverse_cdf(u: f64) -> f64 {
    Normal::standard().inverse_cdf(u)
}

/// Standard normal restricted to `[a, b]` with `a >= TAIL_START`.
fn upper_tail<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    if b - a < 1.0 / a {
        // narrow interval: uniform proposal, acceptance exp((a^2 - z^2) / 2)
        loop {
            let z = a + (b - a) * rng.random::<f64>();
            if rng.random::<f64>().ln() <= 0.5 * (a * a - z * z) {
                return z;
            }
        }
    }
    // Robert's translated exponential proposal
    let rate = 0.5 * (a + (a * a + 4.0).sqrt());
    loop {
        let e: f64 = Exp1.sample(rng);
        let z = a + e / rate;
        if z > b {
            continue;
        }
        let d = z - rate;
        if rng.random::<f64>().ln() <= -0.5 * d * d {
            return z;
        }
    }
}

/// Draws from `N(mean, sd^2)` restricted to `[lo, hi]`; either bound may be infinite.
pub fn sample<R: Rng + ?Sized>(mean: f64, sd: f64, lo: f64, hi: f64, rng: &mut R) -> f64 {
    debug_assert!(sd > 0.0 && lo <= hi);
    let a = (lo - mean) / sd;
    let b = (hi - mean) / sd;
    if a == f64::NEG_INFINITY && b == f64::INFINITY {
        let z: f64 = StandardNormal.sample(rng);
        return mean + sd * z;
    }
    let z = if a >= TAIL_START {
        upper_tail(a, b, rng)
    } else if b <= -TAIL_START {
        -upper_tail(-b, -a, rng)
    } else if a > 0.0 {
        // work in the lower tail where the CDF keeps its relative precision
        let (fa, fb) = (std_cdf(-b), std_cdf(-a));
        -std_inverse_cdf(fa + (fb - fa) * rng.random::<f64>())
    } else {
        let (fa, fb) = (std_cdf(a), std_cdf(b));
        std_inverse_cdf(fa + (fb - fa) * rng.random::<f64>())
    };
    (mean + sd * z).clamp(lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    /// Mean of a standard normal truncated to `[a, b]`.
    fn truncated_mean(a: f64, b: f64) -> f64 {
        let pdf = |x: f64| {
            if x.is_infinite() {
                0.0
            } else {
                (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
            }
        };
        (pdf(a) - pdf(b)) / (std_cdf(b) - std_cdf(a))
    }

    #[test]
    fn draws_respect_bounds_far_in_tail() {
        let mut rng = seeded(1);
        for _ in 0..10_000 {
            let x = sample(-5.0, 1.0, 0.0, f64::INFINITY, &mut rng);
            assert!(x > 0.0);
        }
    }

    #[test]
    fn means_match_closed_form() {
        let cases = [
            (0.0, 1.0, -1.0, 2.0),
            (0.0, 1.0, 1.0, f64::INFINITY),
            (0.0, 1.0, 3.5, f64::INFINITY),
            (0.0, 1.0, 4.0, 4.2),
            (0.0, 1.0, f64::NEG_INFINITY, -3.2),
            (2.0, 0.5, 0.0, f64::INFINITY),
        ];
        let n = 40_000;
        for (i, &(mu, sd, lo, hi)) in cases.iter().enumerate() {
            let mut rng = seeded(100 + i as u64);
            let draws: Vec<f64> = (0..n).map(|_| sample(mu, sd, lo, hi, &mut rng)).collect();
            assert!(draws.iter().all(|&x| x >= lo && x <= hi));
            let m = draws.iter().sum::<f64>() / n as f64;
            let v = draws.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n as f64;
            let expect = mu + sd * truncated_mean((lo - mu) / sd, (hi - mu) / sd);
            assert!(
                (m - expect).abs() < 4.0 * (v / n as f64).sqrt() + 1e-9,
                "case {i}: {m} vs {expect}"
            );
        }
    }
}
