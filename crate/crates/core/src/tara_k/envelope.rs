//! One-class elliptic envelope over dataset feature vectors.
//!
//! Features are first standardized per coordinate (median / scaled MAD), then a
//! location and scatter are estimated by iterative hard-rejection reweighting:
//! start from the plain mean and covariance, and on each pass keep the samples
//! whose Mahalanobis distance is below the trimming quantile. A ridge of
//! `ridge_factor · trace / d` is added to the scatter before inversion.
//! The anomaly score is the Mahalanobis distance to the fitted center and the
//! threshold is the `(1 − target_fpr)` empirical quantile of training scores.

use crate::error::{Result, TaraError};
use crate::linalg::{quadratic_form, spd_inverse};
use crate::scalar::{sorted, total_cmp, Real};

/// MAD to standard deviation for Gaussian data.
const MAD_SCALE: f64 = 1.482_602_218_505_602;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeConfig {
    pub target_fpr: f64,
    pub iterations: usize,
    /// Fraction of largest distances rejected on each reweighting pass.
    pub trim_fraction: f64,
    pub ridge_factor: f64,
    /// Minimum training samples per feature dimension.
    pub min_samples_per_dim: usize,
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        EnvelopeConfig {
            target_fpr: 0.05,
            iterations: 3,
            trim_fraction: 0.10,
            ridge_factor: 1e-6,
            min_samples_per_dim: 8,
        }
    }
}

/// Per-coordinate affine map applied before the envelope: `z = (x − location) / scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization<F> {
    pub location: Vec<F>,
    pub scale: Vec<F>,
}

impl<F: Real> Standardization<F> {
    fn fit(samples: &[Vec<F>], dim: usize) -> Self {
        let mut location = Vec::with_capacity(dim);
        let mut scale = Vec::with_capacity(dim);
        for j in 0..dim {
            let col: Vec<F> = samples.iter().map(|s| s[j]).collect();
            let med = median(&col);
            let dev: Vec<F> = col.iter().map(|v| (*v - med).abs()).collect();
            let mut sc = median(&dev) * F::lit(MAD_SCALE);
            if !(sc > F::zero()) {
                sc = std_dev(&col);
            }
            if !(sc > F::zero()) {
                sc = F::one();
            }
            location.push(med);
            scale.push(sc);
        }
        Standardization { location, scale }
    }

    pub fn apply(&self, x: &[F]) -> Vec<F> {
        x.iter()
            .zip(self.location.iter().zip(&self.scale))
            .map(|(v, (m, s))| (*v - *m) / *s)
            .collect()
    }
}

fn median<F: Real>(values: &[F]) -> F {
    let v = sorted(values);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / F::lit(2.0)
    }
}

fn std_dev<F: Real>(values: &[F]) -> F {
    let n = F::from_count(values.len());
    let mean = values.iter().fold(F::zero(), |a, v| a + *v) / n;
    let var = values.iter().fold(F::zero(), |a, v| a + (*v - mean) * (*v - mean)) / n;
    var.sqrt()
}

/// Fitted envelope: standardization, robust center, regularized precision and threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeModel<F> {
    pub standardization: Standardization<F>,
    pub center: Vec<F>,
    /// Row-major `d × d` inverse of the ridged scatter.
    pub precision: Vec<F>,
    pub threshold: F,
    pub ridge: F,
    pub target_fpr: F,
}

impl<F: Real> EnvelopeModel<F> {
    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Mahalanobis distance of a raw feature vector from the fitted center.
    pub fn anomaly_score(&self, x: &[F]) -> Result<F> {
        if x.len() != self.dim() {
            return Err(TaraError::invalid(format!(
                "feature dimension {} does not match envelope dimension {}",
                x.len(),
                self.dim()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(TaraError::invalid("feature vector has non-finite entries"));
        }
        let z = self.standardization.apply(x);
        Ok(quadratic_form(&self.precision, &self.center, &z).max(F::zero()).sqrt())
    }

    pub fn is_anomalous(&self, x: &[F]) -> Result<bool> {
        Ok(self.anomaly_score(x)? > self.threshold)
    }

    /// Rebuilds a stored envelope after checking shapes and positive definiteness.
    pub fn from_parts(
        standardization: Standardization<F>,
        center: Vec<F>,
        precision: Vec<F>,
        threshold: F,
        ridge: F,
        target_fpr: F,
    ) -> Result<Self> {
        let d = center.len();
        if d == 0
            || standardization.location.len() != d
            || standardization.scale.len() != d
            || precision.len() != d * d
        {
            return Err(TaraError::invalid("envelope parts have inconsistent dimensions"));
        }
        if crate::linalg::cholesky(&precision, d).is_none() {
            return Err(TaraError::SingularScatter("stored precision is not positive definite".into()));
        }
        Ok(EnvelopeModel { standardization, center, precision, threshold, ridge, target_fpr })
    }
}

fn mean_cov<F: Real>(samples: &[&Vec<F>], dim: usize) -> (Vec<F>, Vec<F>) {
    let n = F::from_count(samples.len());
    let mut mean = vec![F::zero(); dim];
    for s in samples {
        for j in 0..dim {
            mean[j] = mean[j] + s[j];
        }
    }
    for m in &mut mean {
        *m = *m / n;
    }
    let mut cov = vec![F::zero(); dim * dim];
    for s in samples {
        for i in 0..dim {
            let di = s[i] - mean[i];
            for j in 0..=i {
                cov[i * dim + j] = cov[i * dim + j] + di * (s[j] - mean[j]);
            }
        }
    }
    let denom = if samples.len() > 1 { n - F::one() } else { n };
    for i in 0..dim {
        for j in 0..=i {
            let v = cov[i * dim + j] / denom;
            cov[i * dim + j] = v;
            cov[j * dim + i] = v;
        }
    }
    (mean, cov)
}

fn ridged_precision<F: Real>(cov: &[F], dim: usize, ridge_factor: F) -> Result<(Vec<F>, F)> {
    let trace = (0..dim).fold(F::zero(), |a, i| a + cov[i * dim + i]);
    if !(trace > F::zero()) || !trace.is_finite() {
        return Err(TaraError::SingularScatter("all features are identical".into()));
    }
    let ridge = ridge_factor * trace / F::from_count(dim);
    let mut reg = cov.to_vec();
    for i in 0..dim {
        reg[i * dim + i] = reg[i * dim + i] + ridge;
    }
    let precision = spd_inverse(&reg, dim)
        .ok_or_else(|| TaraError::SingularScatter("scatter not positive definite after ridge".into()))?;
    Ok((precision, ridge))
}

/// Empirical `q`-quantile as the `⌈q·n⌉`-th order statistic.
pub fn upper_quantile<F: Real>(values: &[F], q: F) -> F {
    let v = sorted(values);
    let n = v.len();
    let k = (q * F::from_count(n)).ceil().to_usize().unwrap_or(n).clamp(1, n);
    v[k - 1]
}

pub fn fit_envelope<F: Real>(features: &[Vec<F>], config: &EnvelopeConfig) -> Result<EnvelopeModel<F>> {
    let dim = features.first().map(Vec::len).unwrap_or(0);
    if dim == 0 {
        return Err(TaraError::EmptyInput("envelope needs non-empty feature vectors"));
    }
    if features.iter().any(|f| f.len() != dim) {
        return Err(TaraError::invalid("feature vectors have mixed dimensions"));
    }
    if features.iter().flatten().any(|v| !v.is_finite()) {
        return Err(TaraError::invalid("feature vectors have non-finite entries"));
    }
    let needed = config.min_samples_per_dim * dim;
    if features.len() < needed {
        return Err(TaraError::TooFewSamples { needed, got: features.len() });
    }
    if !(config.target_fpr > 0.0 && config.target_fpr < 1.0) {
        return Err(TaraError::invalid(format!("target FPR {} outside (0,1)", config.target_fpr)));
    }
    let ridge_factor = F::lit(config.ridge_factor);
    let standardization = Standardization::fit(features, dim);
    let z: Vec<Vec<F>> = features.iter().map(|f| standardization.apply(f)).collect();

    let all: Vec<&Vec<F>> = z.iter().collect();
    let (mut center, cov) = mean_cov(&all, dim);
    let (mut precision, mut ridge) = ridged_precision(&cov, dim, ridge_factor)?;
    let keep = z.len() - (config.trim_fraction * z.len() as f64).floor() as usize;
    for _ in 0..config.iterations {
        let mut scored: Vec<(F, &Vec<F>)> =
            z.iter().map(|s| (quadratic_form(&precision, &center, s), s)).collect();
        scored.sort_by(|a, b| total_cmp(&a.0, &b.0));
        let kept: Vec<&Vec<F>> = scored.iter().take(keep).map(|(_, s)| *s).collect();
        let (m, c) = mean_cov(&kept, dim);
        let (p, r) = ridged_precision(&c, dim, ridge_factor)?;
        center = m;
        precision = p;
        ridge = r;
    }
    let distances: Vec<F> = z
        .iter()
        .map(|s| quadratic_form(&precision, &center, s).max(F::zero()).sqrt())
        .collect();
    let threshold = upper_quantile(&distances, F::one() - F::lit(config.target_fpr));
    Ok(EnvelopeModel {
        standardization,
        center,
        precision,
        threshold,
        ridge,
        target_fpr: F::lit(config.target_fpr),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn gaussian(n: usize, mean: &[f64], seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, 1.0).unwrap();
        (0..n)
            .map(|_| mean.iter().enumerate().map(|(j, m)| m + (j as f64 + 1.0) * 0.1 * normal.sample(&mut rng)).collect())
            .collect()
    }

    #[test]
    fn identical_features_are_singular() {
        let f = vec![vec![1.0, 2.0, 3.0]; 40];
        assert!(matches!(fit_envelope(&f, &EnvelopeConfig::default()), Err(TaraError::SingularScatter(_))));
    }

    #[test]
    fn too_few_samples() {
        let f = gaussian(20, &[0.0; 7], 1);
        assert!(matches!(
            fit_envelope(&f, &EnvelopeConfig::default()),
            Err(TaraError::TooFewSamples { needed: 56, got: 20 })
        ));
    }

    #[test]
    fn threshold_is_training_quantile() {
        let f = gaussian(200, &[1.0; 7], 2);
        let m = fit_envelope(&f, &EnvelopeConfig::default()).unwrap();
        let scores: Vec<f64> = f.iter().map(|x| m.anomaly_score(x).unwrap()).collect();
        let mut s = scores.clone();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(m.threshold, s[189]); // ⌈0.95·200⌉ = 190th order statistic
        let flagged = scores.iter().filter(|v| **v > m.threshold).count();
        assert_eq!(flagged, 10);
    }

    #[test]
    fn precision_is_symmetric_positive_definite() {
        let m = fit_envelope(&gaussian(100, &[0.0; 7], 3), &EnvelopeConfig::default()).unwrap();
        let d = m.dim();
        for i in 0..d {
            for j in 0..d {
                assert!((m.precision[i * d + j] - m.precision[j * d + i]).abs() < 1e-9);
            }
        }
        assert!(crate::linalg::cholesky(&m.precision, d).is_some());
    }

    #[test]
    fn constant_coordinate_is_tolerated() {
        let mut f = gaussian(80, &[0.0; 3], 4);
        for v in &mut f {
            v.push(9.0);
        }
        let m = fit_envelope(&f, &EnvelopeConfig::default()).unwrap();
        assert!(m.anomaly_score(&[0.0, 0.0, 0.0, 9.0]).unwrap() < m.threshold);
        assert!(m.anomaly_score(&[0.0, 0.0, 0.0, 9.5]).unwrap() > m.threshold);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let m = fit_envelope(&gaussian(40, &[0.0; 2], 5), &EnvelopeConfig::default()).unwrap();
        assert!(m.anomaly_score(&[1.0]).is_err());
    }
}
