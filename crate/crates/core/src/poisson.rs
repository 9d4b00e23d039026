//! Bit-reproducible Poisson variates.
//!
//! Means below [`INVERSION_LIMIT`] use sequential inversion of the CDF; larger
//! means use Hörmann's transformed rejection with squeeze (PTRS, 1993). Both
//! routines consume only uniform `f64` draws and `libm` functions, so a given
//! generator state yields the same variate on every platform.

use rand::Rng;

pub const INVERSION_LIMIT: f64 = 30.0;

/// Draws one Poisson variate with the given mean. Non-positive means give 0.
pub fn sample_poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    if !(mean > 0.0) {
        return 0;
    }
    if mean < INVERSION_LIMIT {
        inversion(rng, mean)
    } else {
        ptrs(rng, mean)
    }
}

fn inversion<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    let u: f64 = rng.random();
    let mut k = 0u64;
    let mut p = libm::exp(-mean);
    let mut cdf = p;
    // The tail beyond k = 200 has probability far below 1e-100 for mean < 30;
    // the cap only guards against cdf saturating below u through rounding.
    while u > cdf && k < 200 {
        k += 1;
        p *= mean / k as f64;
        cdf += p;
    }
    k
}

fn ptrs<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    let smu = libm::sqrt(mean);
    let b = 0.931 + 2.53 * smu;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    let log_mean = libm::log(mean);
    loop {
        let u: f64 = rng.random::<f64>() - 0.5;
        let v: f64 = rng.random();
        let us = 0.5 - u.abs();
        let k = libm::floor((2.0 * a / us + b) * u + mean + 0.43);
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = libm::log(v) + libm::log(inv_alpha) - libm::log(a / (us * us) + b);
        let rhs = -mean + k * log_mean - libm::lgamma(k + 1.0);
        if lhs <= rhs {
            return k as u64;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn moments(mean: f64, n: usize, seed: u64) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs: Vec<f64> = (0..n).map(|_| sample_poisson(&mut rng, mean) as f64).collect();
        let m = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n as f64 - 1.0);
        (m, var)
    }

    #[test]
    fn moments_match_on_both_branches() {
        for &(mean, seed) in &[(0.5, 1), (7.0, 2), (29.9, 3), (30.0, 4), (250.0, 5), (1e5, 6)] {
            let n = 100_000;
            let (m, var) = moments(mean, n, seed);
            assert!(
                (m - mean).abs() < 4.0 * libm::sqrt(mean / n as f64),
                "mean {mean}: sample mean {m}"
            );
            let ratio = var / m;
            assert!((0.95..=1.05).contains(&ratio), "mean {mean}: var/mean {ratio}");
        }
    }

    #[test]
    fn tiny_mean_is_almost_always_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let total: u64 = (0..1_000_000).map(|_| sample_poisson(&mut rng, 1e-9)).sum();
        assert!((total as f64) / 1e6 < 1e-6);
        assert_eq!(sample_poisson(&mut rng, 0.0), 0);
        assert_eq!(sample_poisson(&mut rng, -3.0), 0);
    }

    #[test]
    fn frequencies_match_pmf() {
        // chi-square goodness of fit on the rejection branch at mean 40
        let mean = 40.0;
        let n = 200_000usize;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut hist = [0u64; 100];
        for _ in 0..n {
            let k = sample_poisson(&mut rng, mean) as usize;
            hist[k.min(99)] += 1;
        }
        let mut chi2 = 0.0;
        let mut bins = 0;
        for (k, &obs) in hist.iter().enumerate().take(99) {
            let logp = -mean + k as f64 * libm::log(mean) - libm::lgamma(k as f64 + 1.0);
            let expected = n as f64 * libm::exp(logp);
            if expected > 20.0 {
                chi2 += (obs as f64 - expected) * (obs as f64 - expected) / expected;
                bins += 1;
            }
        }
        // mean + 5 sd of a chi-square with `bins` degrees of freedom
        let bound = bins as f64 + 5.0 * libm::sqrt(2.0 * bins as f64);
        assert!(chi2 < bound, "chi2 = {chi2} over {bins} bins");
    }
}
