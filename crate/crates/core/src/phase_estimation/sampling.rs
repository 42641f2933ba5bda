use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use super::OutcomeDistribution;

/// Multinomial shot counts per bin, drawn as a chain of conditional
/// binomials from a ChaCha8 stream seeded with `seed`.
pub fn sample_outcomes(distribution: &OutcomeDistribution, shots: u64, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probs = &distribution.probabilities;
    let mut counts = vec![0u64; probs.len()];
    let mut remaining_shots = shots;
    let mut remaining_mass: f64 = probs.iter().sum();
    for (j, &p) in probs.iter().enumerate() {
        if remaining_shots == 0 {
            break;
        }
        if j + 1 == probs.len() {
            counts[j] = remaining_shots;
            break;
        }
        let q = if remaining_mass > 0.0 {
            (p / remaining_mass).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let drawn = Binomial::new(remaining_shots, q)
            .expect("probability clamped to [0, 1]")
            .sample(&mut rng);
        counts[j] = drawn;
        remaining_shots -= drawn;
        remaining_mass -= p;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass() {
        let d = OutcomeDistribution::new(vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(sample_outcomes(&d, 1234, 7), vec![0, 0, 1234, 0]);
    }

    #[test]
    fn deterministic_given_seed() {
        let d = OutcomeDistribution::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(sample_outcomes(&d, 5000, 99), sample_outcomes(&d, 5000, 99));
        assert_ne!(sample_outcomes(&d, 5000, 99), sample_outcomes(&d, 5000, 100));
    }

    #[test]
    fn uniform_within_five_sigma() {
        let d = OutcomeDistribution::new(vec![0.25; 4]).unwrap();
        let shots = 40_000u64;
        let counts = sample_outcomes(&d, shots, 2024);
        assert_eq!(counts.iter().sum::<u64>(), shots);
        let sigma = (shots as f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!((c as f64 - 10_000.0).abs() <= 5.0 * sigma, "count {c}");
        }
    }
}
