//! Brute-force reference implementations.

use rand::Rng;
use tara_core::GroundTruth;

pub const GRID: u32 = 10_000;

pub fn grid_sample(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| f64::from(rng.random_range(0..=GRID)) / f64::from(GRID)).collect()
}

/// Sup of |F_n(t) − t| over the grid, using both the value and left limit of F_n at each point.
pub fn ks_uniform_grid(sample: &[f64]) -> f64 {
    let n = sample.len() as f64;
    let mut best: f64 = 0.0;
    for k in 0..=GRID {
        let t = f64::from(k) / f64::from(GRID);
        let le = sample.iter().filter(|v| **v <= t).count() as f64 / n;
        let lt = sample.iter().filter(|v| **v < t).count() as f64 / n;
        best = best.max((le - t).abs()).max((lt - t).abs());
    }
    best
}

pub fn ks_two_sample_grid(a: &[f64], b: &[f64]) -> f64 {
    let cdf = |s: &[f64], t: f64| s.iter().filter(|v| **v <= t).count() as f64 / s.len() as f64;
    (0..=GRID)
        .map(|k| {
            let t = f64::from(k) / f64::from(GRID);
            (cdf(a, t) - cdf(b, t)).abs()
        })
        .fold(0.0, f64::max)
}

pub fn pairwise_auc(scores: &[f64], labels: &[GroundTruth]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, li) in labels.iter().enumerate() {
        if *li != GroundTruth::Quantum {
            continue;
        }
        for (j, lj) in labels.iter().enumerate() {
            if *lj == GroundTruth::Classical {
                pairs += 1.0;
                wins += if scores[i] > scores[j] {
                    1.0
                } else if scores[i] == scores[j] {
                    0.5
                } else {
                    0.0
                };
            }
        }
    }
    wins / pairs
}

/// Every multiset of calibration scores from {1,2,3} of size up to 6.
pub fn calibration_multisets() -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for n in 0..=6usize {
        for a in 0..=n {
            for b in 0..=(n - a) {
                let c = n - a - b;
                let mut v = vec![1.0; a];
                v.extend(std::iter::repeat_n(2.0, b));
                v.extend(std::iter::repeat_n(3.0, c));
                out.push(v);
            }
        }
    }
    out
}

/// Test scores placed below, on and between every calibration value.
pub const ORACLE_TEST_SCORES: [f64; 7] = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5];

/// Direct counts `(#>=, #>, #=)` of calibration scores against `s`.
pub fn counts(cal: &[f64], s: f64) -> (usize, usize, usize) {
    let geq = cal.iter().filter(|v| **v >= s).count();
    let gt = cal.iter().filter(|v| **v > s).count();
    (geq, gt, geq - gt)
}
