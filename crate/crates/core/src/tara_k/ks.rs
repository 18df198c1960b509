//! Exact Kolmogorov–Smirnov distances and asymptotic critical values.

use crate::error::{Result, TaraError};
use crate::scalar::{sorted, Real};

/// One-sample distance `sup_t |F_n(t) − t|` of a sample from Uniform(0, 1),
/// via `max_i max(i/n − p_(i), p_(i) − (i−1)/n)`.
pub fn ks_uniform<F: Real>(pvals: &[F]) -> Result<F> {
    if pvals.is_empty() {
        return Err(TaraError::EmptyInput("ks_uniform needs at least one p-value"));
    }
    let p = sorted(pvals);
    let n = F::from_count(p.len());
    let mut d = F::zero();
    for (i, v) in p.iter().enumerate() {
        let upper = F::from_count(i + 1) / n - *v;
        let lower = *v - F::from_count(i) / n;
        d = d.max(upper).max(lower);
    }
    Ok(d)
}

/// Two-sample distance `sup_t |F_ref(t) − F_test(t)|`, evaluated exactly at every
/// point of the merged support (ties advance both CDFs together).
pub fn ks_two_sample<F: Real>(reference: &[F], test: &[F]) -> Result<F> {
    if reference.is_empty() || test.is_empty() {
        return Err(TaraError::EmptyInput("ks_two_sample needs two non-empty samples"));
    }
    let a = sorted(reference);
    let b = sorted(test);
    let (na, nb) = (F::from_count(a.len()), F::from_count(b.len()));
    let (mut i, mut j) = (0, 0);
    let mut d = F::zero();
    while i < a.len() && j < b.len() {
        let t = a[i].min(b[j]);
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        d = d.max((F::from_count(i) / na - F::from_count(j) / nb).abs());
    }
    // once one sample is exhausted the remaining gap only shrinks towards zero
    Ok(d)
}

/// Asymptotic Kolmogorov critical value `c_α = sqrt(−ln(α/2) / 2)`.
pub fn ks_critical_value<F: Real>(alpha: F) -> Result<F> {
    if !(alpha > F::zero() && alpha < F::one()) {
        return Err(TaraError::invalid(format!("KS level {alpha} outside (0,1)")));
    }
    Ok((-(alpha / F::lit(2.0)).ln() / F::lit(2.0)).sqrt())
}

/// Two-sample rejection threshold `c_α · sqrt((n + m) / (n·m))`.
pub fn ks_threshold<F: Real>(n: usize, m: usize, alpha: F) -> Result<F> {
    if n == 0 || m == 0 {
        return Err(TaraError::invalid("KS threshold needs n, m >= 1"));
    }
    let (n, m) = (F::from_count(n), F::from_count(m));
    Ok(ks_critical_value(alpha)? * ((n + m) / (n * m)).sqrt())
}

/// One-sample rejection threshold `c_α / sqrt(n)` against a fully specified CDF.
pub fn ks_uniform_threshold<F: Real>(n: usize, alpha: F) -> Result<F> {
    if n == 0 {
        return Err(TaraError::invalid("KS threshold needs n >= 1"));
    }
    Ok(ks_critical_value(alpha)? / F::from_count(n).sqrt())
}
