use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::seed;

/// `2·exp(−2nδ²)` clipped to `[0, 1]`: the probability that one empirical
/// frequency from `n` samples deviates from its mean by at least `δ`.
pub fn hoeffding_bound(n: u64, delta: f64) -> f64 {
    if n == 0 || delta.is_nan() || delta <= 0.0 {
        return 1.0;
    }
    (2.0 * (-2.0 * n as f64 * delta * delta).exp()).min(1.0)
}

/// Smallest `n ≥ 1` with `2·exp(−2nδ²) ≤ eps_fail`.
pub fn required_n(delta: f64, eps_fail: f64) -> Result<u64> {
    if !delta.is_finite() || delta <= 0.0 || eps_fail.is_nan() || eps_fail <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "need delta > 0 and eps_fail > 0 (got {delta}, {eps_fail})"
        )));
    }
    let n = ((2.0 / eps_fail).ln() / (2.0 * delta * delta)).ceil();
    if n > u64::MAX as f64 {
        return Err(Error::InvalidArgument(format!("required sample size {n:e} overflows")));
    }
    Ok((n as u64).max(1))
}

/// Sample size guaranteeing every one of `outcomes` frequencies lies within
/// `delta` of its mean with probability at least `1 − eps_fail`.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplePlan {
    pub delta: f64,
    pub eps_fail: f64,
    pub outcomes: usize,
    /// Failure budget per coordinate, `eps_fail / outcomes` (union bound).
    pub per_coordinate_eps: f64,
    pub n: u64,
}

pub fn plan_samples(delta: f64, eps_fail: f64, outcomes: usize) -> Result<SamplePlan> {
    if outcomes == 0 {
        return Err(Error::InvalidArgument("no outcomes".into()));
    }
    let per_coordinate_eps = eps_fail / outcomes as f64;
    Ok(SamplePlan {
        delta,
        eps_fail,
        outcomes,
        per_coordinate_eps,
        n: required_n(delta, per_coordinate_eps)?,
    })
}

fn check_distribution(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::Empty);
    }
    if let Some(&bad) = probs.iter().find(|&&p| p < 0.0 || !p.is_finite()) {
        return Err(Error::InvalidArgument(format!("invalid probability {bad}")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("probabilities sum to {total}")));
    }
    Ok(())
}

/// Multinomial counts by sequential conditional binomials; `O(len)` in `n`.
pub fn sample_counts<R: Rng + ?Sized>(probs: &[f64], n: u64, rng: &mut R) -> Result<Vec<u64>> {
    check_distribution(probs)?;
    let mut counts = vec![0u64; probs.len()];
    let mut remaining_n = n;
    let mut remaining_p = 1.0;
    for (k, &p) in probs.iter().enumerate() {
        if remaining_n == 0 {
            break;
        }
        if k + 1 == probs.len() {
            counts[k] = remaining_n;
            break;
        }
        let q = if remaining_p > 0.0 { (p / remaining_p).clamp(0.0, 1.0) } else { 0.0 };
        let c = Binomial::new(remaining_n, q)
            .map_err(|e| Error::Numerical(e.to_string()))?
            .sample(rng);
        counts[k] = c;
        remaining_n -= c;
        remaining_p -= p;
    }
    Ok(counts)
}

/// One multinomial draw of size `n` divided by `n`.
pub fn empirical_frequencies(probs: &[f64], n: u64, seed_value: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be positive".into()));
    }
    let counts = sample_counts(probs, n, &mut seed::rng(seed_value))?;
    Ok(counts.iter().map(|&c| c as f64 / n as f64).collect())
}

/// Index drawn from a discrete distribution.
pub(crate) fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (k, &p) in probs.iter().enumerate() {
        if u < p {
            return k;
        }
        u -= p;
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hoeffding_examples() {
        assert!((hoeffding_bound(1000, 0.05) - 2.0 * (-5.0f64).exp()).abs() < 1e-15);
        assert!((hoeffding_bound(1000, 0.05) - 0.013476).abs() < 1e-6);
        assert_eq!(hoeffding_bound(10, 1e-9), 1.0);
        assert_eq!(hoeffding_bound(10, 0.0), 1.0);
        let (a, b) = (hoeffding_bound(400, 0.1) / 2.0, hoeffding_bound(800, 0.1) / 2.0);
        assert!((b - a * a).abs() < 1e-15);
    }

    #[test]
    fn required_n_examples() {
        assert_eq!(required_n(0.05, 0.01).unwrap(), 1060);
        assert_eq!(required_n(0.05, 2.0).unwrap(), 1);
        assert!(required_n(0.0, 0.1).is_err());
        assert!(required_n(0.1, 0.0).is_err());
        for &(delta, eps) in &[(0.05, 0.01), (0.01, 0.1), (0.2, 1e-6)] {
            let step = (10f64.ln() / (2.0 * delta * delta)).ceil() as i64;
            let diff = required_n(delta, eps / 10.0).unwrap() as i64 - required_n(delta, eps).unwrap() as i64;
            assert!((diff - step).abs() <= 1, "{diff} vs {step}");
        }
    }

    #[test]
    fn required_n_is_minimal() {
        for &(delta, eps) in &[(0.05, 0.01), (0.01, 0.05), (0.3, 0.5)] {
            let n = required_n(delta, eps).unwrap();
            assert!(hoeffding_bound(n, delta) <= eps);
            assert!(n == 1 || 2.0 * (-2.0 * (n - 1) as f64 * delta * delta).exp() > eps);
        }
    }

    #[test]
    fn planner_uses_union_bound() {
        let p = plan_samples(0.05, 0.04, 4).unwrap();
        assert_eq!(p.per_coordinate_eps, 0.01);
        assert_eq!(p.n, 1060);
    }

    #[test]
    fn frequency_examples() {
        assert_eq!(empirical_frequencies(&[1.0, 0.0, 0.0], 17, 3).unwrap(), vec![1.0, 0.0, 0.0]);
        assert_eq!(empirical_frequencies(&[0.0, 0.0, 1.0], 5, 3).unwrap(), vec![0.0, 0.0, 1.0]);
        let f = empirical_frequencies(&[0.1, 0.2, 0.3, 0.4], 12345, 9).unwrap();
        assert!((f.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(f, empirical_frequencies(&[0.1, 0.2, 0.3, 0.4], 12345, 9).unwrap());
        assert!(empirical_frequencies(&[0.5, 0.6], 10, 0).is_err());
        assert!(empirical_frequencies(&[0.5, 0.5], 0, 0).is_err());
    }

    #[test]
    fn counts_have_multinomial_moments() {
        let probs = [0.1, 0.25, 0.65];
        let n = 200;
        let trials = 4000;
        let mut rng = seed::rng(11);
        let mut mean = [0.0; 3];
        for _ in 0..trials {
            let c = sample_counts(&probs, n, &mut rng).unwrap();
            for k in 0..3 {
                mean[k] += c[k] as f64 / trials as f64;
            }
        }
        for k in 0..3 {
            let sd = (n as f64 * probs[k] * (1.0 - probs[k]) / trials as f64).sqrt();
            assert!((mean[k] - n as f64 * probs[k]).abs() < 5.0 * sd);
        }
    }

    #[test]
    fn sample_index_respects_support() {
        let mut rng = seed::rng(2);
        for _ in 0..1000 {
            let k = sample_index(&[0.0, 0.3, 0.0, 0.7], &mut rng);
            assert!(k == 1 || k == 3);
        }
    }
}
