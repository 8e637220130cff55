//! Swap-test estimation of `tr{ρσ}` with seeded shot noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::DensityMatrix;
use crate::witness::ApproxWitness;

/// Confidence level used when none is given.
pub const DEFAULT_LEVEL: f64 = 0.95;

/// Ancilla outcome `0` probability `(1 + tr{ρσ})/2`.
pub fn swap_test_probability(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::domain(format!(
            "swap test on states of dimension {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    Ok((1.0 + rho.op().trace_product(sigma.op()).re) / 2.0)
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain(format!(
            "confidence level {level} not in (0, 1)"
        )));
    }
    Ok(())
}

/// Two-sided Hoeffding half-width on `p(|0⟩)`: `√(ln(2/α)/(2n))`, `α = 1 − level`.
pub fn hoeffding_half_width(shots: u64, level: f64) -> Result<f64> {
    check_level(level)?;
    if shots == 0 {
        return Err(Error::domain("shots must be at least 1"));
    }
    Ok(((2.0 / (1.0 - level)).ln() / (2.0 * shots as f64)).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShotResult {
    pub shots: u64,
    pub zeros: u64,
    /// `2·zeros/shots − 1`.
    pub estimate: f64,
    pub std_error: f64,
    /// Hoeffding interval on `tr{ρσ}`, clipped to `[−1, 1]`.
    pub confidence_interval: (f64, f64),
    pub level: f64,
}

impl ShotResult {
    pub fn p0(&self) -> f64 {
        self.zeros as f64 / self.shots as f64
    }

    pub fn p1(&self) -> f64 {
        1.0 - self.p0()
    }
}

pub fn sample_overlap(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    shots: u64,
    seed: u64,
) -> Result<ShotResult> {
    sample_overlap_at(rho, sigma, shots, seed, DEFAULT_LEVEL)
}

/// Draws `zeros ~ Binomial(shots, p(|0⟩))` and builds the estimate at `level`.
pub fn sample_overlap_at(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    shots: u64,
    seed: u64,
    level: f64,
) -> Result<ShotResult> {
    if shots == 0 {
        return Err(Error::domain("shots must be at least 1"));
    }
    let eps = hoeffding_half_width(shots, level)?;
    let p = swap_test_probability(rho, sigma)?.clamp(0.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zeros = Binomial::new(shots, p)
        .map_err(|e| Error::domain(format!("binomial({shots}, {p}): {e}")))?
        .sample(&mut rng);
    let p_hat = zeros as f64 / shots as f64;
    let lo = (2.0 * (p_hat - eps) - 1.0).max(-1.0);
    let hi = (2.0 * (p_hat + eps) - 1.0).min(1.0);
    Ok(ShotResult {
        shots,
        zeros,
        estimate: 2.0 * p_hat - 1.0,
        std_error: 2.0 * (p_hat * (1.0 - p_hat) / shots as f64).sqrt(),
        confidence_interval: (lo, hi),
        level,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConfidenceVerdict {
    Detected,
    NotDetected,
    Inconclusive,
}

/// Estimator section of a detection report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimatorBlock {
    pub seed: u64,
    #[serde(flatten)]
    pub result: ShotResult,
    pub threshold: f64,
    pub verdict: ConfidenceVerdict,
}

/// Detected iff the upper bound on `tr{ρρ_W̃}` is below the threshold,
/// not detected iff the lower bound is at or above it.
pub fn detect_with_confidence(
    rho: &DensityMatrix,
    aew: &ApproxWitness,
    shots: u64,
    seed: u64,
    level: f64,
) -> Result<EstimatorBlock> {
    check_level(level)?;
    let result = sample_overlap_at(rho, &aew.state, shots, seed, level)?;
    let (lo, hi) = result.confidence_interval;
    let verdict = if hi < aew.threshold {
        ConfidenceVerdict::Detected
    } else if lo >= aew.threshold {
        ConfidenceVerdict::NotDetected
    } else {
        ConfidenceVerdict::Inconclusive
    };
    Ok(EstimatorBlock {
        seed,
        result,
        threshold: aew.threshold,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{haar_random_ket, random_mixed_state, Ket};
    use crate::witness::{aew, singlet, transpose_witness, werner_state};
    use proptest::prelude::*;

    fn qubit(i: usize) -> DensityMatrix {
        DensityMatrix::pure(&Ket::basis(2, i))
    }

    #[test]
    fn exact_probabilities() {
        assert_eq!(swap_test_probability(&qubit(0), &qubit(0)).unwrap(), 1.0);
        assert_eq!(swap_test_probability(&qubit(0), &qubit(1)).unwrap(), 0.5);
        let a = aew(&transpose_witness(2).unwrap()).unwrap();
        assert!((swap_test_probability(&singlet(), &a.state).unwrap() - 0.5).abs() < 1e-15);
        let three = DensityMatrix::maximally_mixed(&[3]);
        assert!(swap_test_probability(&qubit(0), &three).is_err());
    }

    #[test]
    fn identical_pure_states_have_no_noise() {
        let r = sample_overlap(&qubit(1), &qubit(1), 1000, 3).unwrap();
        assert_eq!(r.zeros, 1000);
        assert_eq!(r.estimate, 1.0);
        assert_eq!(r.std_error, 0.0);
    }

    #[test]
    fn sampling_is_deterministic() {
        let rho = random_mixed_state(&[2], 4).unwrap();
        let sigma = random_mixed_state(&[2], 5).unwrap();
        let a = sample_overlap(&rho, &sigma, 5000, 77).unwrap();
        let b = sample_overlap(&rho, &sigma, 5000, 77).unwrap();
        assert_eq!(a, b);
        assert!(sample_overlap(&rho, &sigma, 0, 1).is_err());
    }

    #[test]
    fn zero_overlap_concentrates() {
        let mut good = 0;
        for seed in 0..100 {
            let r = sample_overlap(&qubit(0), &qubit(1), 100_000, seed).unwrap();
            if r.estimate.abs() < 4.0 * (0.25f64 / 1e5).sqrt() * 2.0 {
                good += 1;
            }
        }
        assert!(good >= 95, "{good}");
    }

    #[test]
    fn singlet_detected_with_confidence() {
        let a = aew(&transpose_witness(2).unwrap()).unwrap();
        let b = detect_with_confidence(&singlet(), &a, 10_000, 1, 0.99).unwrap();
        assert_eq!(b.verdict, ConfidenceVerdict::Detected);
        let prod = DensityMatrix::pure(&Ket::basis(4, 0))
            .with_dims(&[2, 2])
            .unwrap();
        let b = detect_with_confidence(&prod, &a, 10_000, 1, 0.99).unwrap();
        assert_eq!(b.verdict, ConfidenceVerdict::NotDetected);
        assert!(detect_with_confidence(&singlet(), &a, 100, 1, 1.5).is_err());
        assert!(detect_with_confidence(&singlet(), &a, 100, 1, 0.0).is_err());
    }

    #[test]
    fn boundary_werner_is_inconclusive() {
        let a = aew(&transpose_witness(2).unwrap()).unwrap();
        let w = werner_state(1.0 / 3.0).unwrap();
        let n = (0..100)
            .filter(|&seed| {
                detect_with_confidence(&w, &a, 10_000, seed, 0.99)
                    .unwrap()
                    .verdict
                    == ConfidenceVerdict::Inconclusive
            })
            .count();
        assert!(n >= 90, "{n}");
    }

    #[test]
    fn width_shrinks_with_shots() {
        let mut prev = f64::INFINITY;
        for shots in [1, 10, 100, 1000, 10_000] {
            let w = hoeffding_half_width(shots, 0.95).unwrap();
            assert!(w < prev);
            prev = w;
        }
    }

    proptest! {
        #[test]
        fn interval_contains_estimate(seed in 0u64..1000, shots in 1u64..5000) {
            let psi = haar_random_ket(2, seed).unwrap();
            let rho = DensityMatrix::pure(&psi);
            let r = sample_overlap(&rho, &qubit(0), shots, seed).unwrap();
            prop_assert!(r.zeros <= r.shots);
            prop_assert!((r.estimate - (2.0 * r.zeros as f64 / shots as f64 - 1.0)).abs() < 1e-15);
            let (lo, hi) = r.confidence_interval;
            prop_assert!(lo <= r.estimate && r.estimate <= hi);
            prop_assert!((r.p0() + r.p1() - 1.0).abs() < 1e-15);
        }
    }
}
