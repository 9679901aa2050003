use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Zero-mean two-component Gaussian mixture for intra-cluster ray angle
/// offsets. Weights are normalized to sum to one when sampling.
///
/// The defaults (`a1 = a2 = 0.5`, `sigma1 = 0.1`, `sigma2 = 0.3` rad) are
/// placeholders, not measured values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GmmParams {
    pub a1: f64,
    pub a2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

impl Default for GmmParams {
    fn default() -> Self {
        Self { a1: 0.5, a2: 0.5, sigma1: 0.1, sigma2: 0.3 }
    }
}

impl GmmParams {
    pub fn validate(&self) -> Result<()> {
        for (name, s) in [("sigma1", self.sigma1), ("sigma2", self.sigma2)] {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::invalid(name, format!("standard deviation must be positive, got {s}")));
            }
        }
        for (name, a) in [("a1", self.a1), ("a2", self.a2)] {
            if !(a >= 0.0 && a.is_finite()) {
                return Err(Error::invalid(name, format!("mixture weight must be non-negative, got {a}")));
            }
        }
        if !(self.a1 + self.a2 > 0.0) {
            return Err(Error::invalid("a1 + a2", "mixture weights sum to zero"));
        }
        Ok(())
    }

    /// Variance of the normalized mixture, `sum_i w_i sigma_i^2`.
    pub fn variance(&self) -> f64 {
        let total = self.a1 + self.a2;
        (self.a1 * self.sigma1 * self.sigma1 + self.a2 * self.sigma2 * self.sigma2) / total
    }
}

/// Draws one angle offset (radians).
pub fn sample_gmm<R: Rng + ?Sized>(params: &GmmParams, rng: &mut R) -> Result<f64> {
    params.validate()?;
    let p1 = params.a1 / (params.a1 + params.a2);
    let pick: f64 = rng.random();
    let sigma = if pick < p1 { params.sigma1 } else { params.sigma2 };
    let z: f64 = StandardNormal.sample(rng);
    Ok(sigma * z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathcore::derive_stream;

    const N: usize = 100_000;

    fn moments(p: GmmParams) -> (f64, f64) {
        let mut rng = derive_stream(2024, 0).rng();
        let xs: Vec<f64> = (0..N).map(|_| sample_gmm(&p, &mut rng).unwrap()).collect();
        let mean = xs.iter().sum::<f64>() / N as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (N as f64 - 1.0);
        (mean, var)
    }

    #[test]
    fn single_component_is_zero_mean() {
        let (mean, _) = moments(GmmParams { a1: 1.0, a2: 0.0, sigma1: 0.1, sigma2: 0.3 });
        assert!(mean.abs() < 0.005, "mean {mean}");
    }

    #[test]
    fn equal_components_collapse() {
        let (_, var) = moments(GmmParams { a1: 0.5, a2: 0.5, sigma1: 0.2, sigma2: 0.2 });
        assert!((var - 0.04).abs() < 0.004, "var {var}");
    }

    #[test]
    fn mixture_variance_is_weighted_sum() {
        let p = GmmParams { a1: 0.5, a2: 0.5, sigma1: 0.1, sigma2: 0.3 };
        assert!((p.variance() - 0.05).abs() < 1e-15);
        let (mean, var) = moments(p);
        assert!((var - 0.05).abs() < 0.005, "var {var}");
        // |mean| < 3 * 5 sigma_max / sqrt(n)
        assert!(mean.abs() < 3.0 * 5.0 * 0.3 / (N as f64).sqrt());
    }

    #[test]
    fn unnormalized_weights_are_normalized() {
        let p = GmmParams { a1: 2.0, a2: 2.0, sigma1: 0.1, sigma2: 0.3 };
        assert!((p.variance() - 0.05).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_sigmas() {
        let mut rng = derive_stream(1, 1).rng();
        for bad in [0.0, -0.1, f64::NAN] {
            let p = GmmParams { sigma2: bad, ..GmmParams::default() };
            assert!(matches!(sample_gmm(&p, &mut rng), Err(Error::InvalidParameter { .. })));
        }
        let p = GmmParams { a1: 0.0, a2: 0.0, ..GmmParams::default() };
        assert!(sample_gmm(&p, &mut rng).is_err());
    }
}
