//! The binomial guessing game: draw `N` uniforms on `[0, n_range]`, win when
//! exactly `g` of them fall below the chosen threshold `s`.

use rand::Rng;

pub fn binomial_guess_game<R: Rng + ?Sized>(s: f64, g: u64, samples: u64, n_range: f64, rng: &mut R) -> bool {
    if g > samples {
        return false;
    }
    let mut below = 0;
    for _ in 0..samples {
        if rng.random::<f64>() * n_range < s {
            below += 1;
            if below > g {
                return false;
            }
        }
    }
    below == g
}

/// Threshold making `g` the expected count: `s = g n_range / N`.
pub fn mode_threshold(g: u64, samples: u64, n_range: f64) -> f64 {
    g as f64 * n_range / samples as f64
}

/// `lambda^g e^{-lambda} / g!`, evaluated in log space.
pub fn poisson_pmf(lambda: f64, g: u64) -> f64 {
    if lambda == 0.0 {
        return if g == 0 { 1.0 } else { 0.0 };
    }
    let ln_fact: f64 = (2..=g).map(|i| (i as f64).ln()).sum();
    (g as f64 * lambda.ln() - lambda - ln_fact).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn trivial_games() {
        let mut rng = seeded(0);
        assert!(!binomial_guess_game(5.0, 11, 10, 10.0, &mut rng));
        for _ in 0..100 {
            assert!(binomial_guess_game(0.0, 0, 50, 10.0, &mut rng));
        }
    }

    #[test]
    fn pmf_values() {
        assert!((poisson_pmf(4.0, 4) - 0.195_366_814_813_165).abs() < 1e-12);
        assert_eq!(poisson_pmf(0.0, 0), 1.0);
        let total: f64 = (0..60).map(|g| poisson_pmf(7.5, g)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(mode_threshold(4, 10_000, 400.0), 0.16);
    }
}
