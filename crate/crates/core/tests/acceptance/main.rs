//! Acceptance suite. Prints one verdict line per criterion and exits non-zero if any fails.

#[path = "../common/mod.rs"]
mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::oracle::*;
use common::{lhv_boundary, records, singlet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tara_core::chsh::{chsh_from_correlators, classical_margin_percent, CLASSICAL_BOUND, TSIRELSON_BOUND};
use tara_core::conformal::{conformal_pvalue, empirical_coverage, smoothed_pvalue, ConformalScorer, TieBreaking};
use tara_core::datagen::{derive_seed, Angles, MixtureWeights};
use tara_core::experiments::{ablation_study, auc_rank, leakage_experiment, roc, AblationConfig, LeakageConfig};
use tara_core::io::{read_config, read_dataset, read_mapped_file, ColumnMapping};
use tara_core::tara_k::{ks_two_sample, ks_uniform, ks_uniform_threshold, FeatureSubset};
use tara_core::tara_m::{detect_stream, BettingStrategy, MartingaleState, StreamConfig};
use tara_core::{chsh_s, summarize, GroundTruth, MeasurementRecord, ModelConfig, Outcome};

type Verdict = Result<(bool, String), String>;
type Criterion = (&'static str, u64, fn() -> Verdict);

fn root(dir: &str, file: &str) -> String {
    format!("{}/../../{dir}/{file}", env!("CARGO_MANIFEST_DIR"))
}

fn se_binomial(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

fn mean_and_se(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn lhv_bound() -> Verdict {
    let mut worst_det: f64 = f64::NEG_INFINITY;
    for bits in 0u8..16 {
        let o = |k: u8| if bits >> k & 1 == 1 { 1.0f64 } else { -1.0 };
        let (a0, a1, b0, b1) = (o(0), o(1), o(2), o(3));
        worst_det = worst_det.max(chsh_from_correlators(&[a0 * b0, a0 * b1, a1 * b0, a1 * b1]).abs());
    }
    let mut pass = worst_det == CLASSICAL_BOUND;
    let mut detail = format!("16 deterministic strategies max |S| = {worst_det}");

    let w = MixtureWeights::Biased { bias: 1.0 };
    let mut models = vec![
        ModelConfig::LhvMixture { weights: w.clone() },
        ModelConfig::LhvMemory { weights: w.clone(), order: 3 },
        ModelConfig::LhvCommunication { kappa: 0.0, weights: w },
    ];
    for eta in [0.7, 0.9, 1.0] {
        models.push(ModelConfig::LhvDetection { eta, angles: Angles::default() });
    }
    for model in models {
        let mut worst: f64 = f64::NEG_INFINITY;
        let mut worst_binned: f64 = f64::NEG_INFINITY;
        for seed in 0..20 {
            let data = records(model.clone(), 10_000, derive_seed(101, 0, seed));
            let s = summarize::<f64>(&data).map_err(|e| e.to_string())?;
            worst = worst.max((chsh_s(&s).abs() - CLASSICAL_BOUND) / s.chsh_standard_error());
            worst_binned = worst_binned.max(binned_s(&data).abs());
        }
        let ok = worst <= 5.0;
        pass &= ok;
        detail.push_str(&format!("; {} max excess {worst:+.1} SE{}", label(&model), if ok { "" } else { " (over 5)" }));
        if let ModelConfig::LhvDetection { .. } = model {
            detail.push_str(&format!(" [no-click as +1: max |S| {worst_binned:.3}]"));
        }
    }
    Ok((pass, detail))
}

fn label(model: &ModelConfig) -> String {
    match model {
        ModelConfig::LhvDetection { eta, .. } => format!("{} eta={eta}", model.name()),
        _ => model.name().to_string(),
    }
}

/// S over all trials with a missing click counted as outcome +1.
fn binned_s(data: &[MeasurementRecord]) -> f64 {
    let mut sum = [0i64; 4];
    let mut n = [0i64; 4];
    let bin = |o: Outcome| if o == Outcome::NoClick { 1 } else { i64::from(o.code()) };
    for r in data {
        let i = r.context.index();
        sum[i] += bin(r.a) * bin(r.b);
        n[i] += 1;
    }
    chsh_from_correlators(&[0, 1, 2, 3].map(|i| sum[i] as f64 / n[i] as f64))
}

fn tsirelson() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (v, target) in [(1.0, TSIRELSON_BOUND), (2.716 / TSIRELSON_BOUND, 2.716)] {
        let s = summarize::<f64>(&records(singlet(v), 10_000, derive_seed(202, 0, 0))).map_err(|e| e.to_string())?;
        let z = (chsh_s(&s) - target) / s.chsh_standard_error();
        pass &= z.abs() <= 3.0;
        parts.push(format!("v={v:.4}: S={:.4} target {target:.4} ({z:+.2} SE)", chsh_s(&s)));
    }
    Ok((pass, parts.join("; ")))
}

fn conformal_validity() -> Verdict {
    let scorer = |seed: u64| -> Result<ConformalScorer<f64>, String> {
        let fit = records(singlet(1.0), 1000, derive_seed(seed, 1, 0));
        let cal = records(singlet(1.0), 25_000, derive_seed(seed, 2, 0));
        ConformalScorer::fit(&fit, &cal, 1.0).map_err(|e| e.to_string())
    };
    let mut passes = 0;
    for i in 0..50 {
        let s = scorer(derive_seed(303, 0, i))?;
        let test = records(singlet(1.0), 250, derive_seed(303, 1, i));
        let p = s.pvalues(&test, TieBreaking::Randomized, &mut ChaCha8Rng::seed_from_u64(i)).map_err(|e| e.to_string())?;
        if ks_uniform(&p).unwrap() <= ks_uniform_threshold(p.len(), 0.05).unwrap() {
            passes += 1;
        }
    }
    let s = scorer(derive_seed(303, 2, 0))?;
    let test = records(singlet(1.0), 2500, derive_seed(303, 3, 0));
    let cov = empirical_coverage(&s.model, &s.calibration, &test, 0.1).map_err(|e| e.to_string())?;
    let floor = 0.9 - 3.0 * se_binomial(0.9, test.len());
    Ok((
        passes >= 45 && cov >= floor,
        format!("KS uniformity passed {passes}/50 (need 45); coverage at alpha 0.1 = {cov:.4} (floor {floor:.4})"),
    ))
}

fn uniform_stream(seed: u64, n: usize) -> impl Iterator<Item = f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(move |_| 1.0 - rng.random::<f64>())
}

fn martingale_validity() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for strategy in [BettingStrategy::SignOfHistory, BettingStrategy::Mixture] {
        let w: Vec<f64> = (0..200)
            .map(|s| {
                let mut m = MartingaleState::new(0.02, 0.05, strategy).unwrap();
                for p in uniform_stream(derive_seed(404, 0, s), 10_000) {
                    m.update(p).unwrap();
                }
                m.wealth()
            })
            .collect();
        let (mean, se) = mean_and_se(&w);
        pass &= (mean - 1.0).abs() <= 3.0 * se;
        parts.push(format!("{strategy} lambda 0.02 mean wealth {mean:.4} (SE {se:.4})"));
    }
    for alpha in [0.05, 0.1] {
        let config = StreamConfig { alpha, lambda: 0.2, strategy: BettingStrategy::SignOfHistory };
        let alarms = (0..200)
            .filter(|s| detect_stream(uniform_stream(derive_seed(404, 1, *s), 10_000), &config).unwrap().detected)
            .count();
        let rate = alarms as f64 / 200.0;
        let cap = alpha + 3.0 * se_binomial(alpha, 200);
        pass &= rate <= cap;
        parts.push(format!("Ville rate at alpha {alpha} = {rate:.3} (cap {cap:.3})"));
    }
    Ok((pass, parts.join("; ")))
}

fn detection_power() -> Verdict {
    let config: AblationConfig = read_config(root("configs", "ablation.toml")).map_err(|e| e.to_string())?;
    let r = ablation_study(&config).map_err(|e| e.to_string())?;
    let get = |s: FeatureSubset| r.row(s).ok_or(format!("missing {s}"));
    let (full, s_only, cp, click) =
        (get(FeatureSubset::Full)?, get(FeatureSubset::SOnly)?, get(FeatureSubset::CpOnly)?, get(FeatureSubset::ClickOnly)?);
    let tol = 0.03;
    let ordered = full.roc.auc >= s_only.roc.auc - tol && s_only.roc.auc >= cp.roc.auc - tol && cp.roc.auc >= click.roc.auc - tol;
    let pass = full.roc.auc >= 0.90 && cp.roc.auc > 0.5 + 3.0 * cp.auc_se && cp.roc.auc >= 0.70 && ordered;
    Ok((
        pass,
        format!(
            "AUC full {:.3} s-only {:.3} cp-only {:.3} (SE {:.3}) click-only {:.3}; ordering {}",
            full.roc.auc,
            s_only.roc.auc,
            cp.roc.auc,
            cp.auc_se,
            click.roc.auc,
            if ordered { "holds" } else { "violated" }
        ),
    ))
}

fn streaming_power() -> Verdict {
    let pvalues = |v: f64, seed: u64| -> Vec<f64> {
        let fit = records(lhv_boundary(), 2500, derive_seed(seed, 1, 0));
        let cal = records(lhv_boundary(), 2500, derive_seed(seed, 2, 0));
        let scorer = ConformalScorer::fit(&fit, &cal, 1.0).unwrap();
        let test = records(singlet(v), 2500, derive_seed(seed, 3, 0));
        scorer.pvalues(&test, TieBreaking::Randomized, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    };
    let config = StreamConfig { alpha: 0.05, lambda: 0.2, strategy: BettingStrategy::SignOfHistory };
    let mut detected = 0;
    let mut stops = Vec::new();
    for s in 0..50 {
        let r = detect_stream(pvalues(1.0, derive_seed(606, 0, s)), &config).unwrap();
        if r.detected {
            detected += 1;
            stops.extend(r.stop_time);
        }
    }
    stops.sort_unstable();
    let median_stop = stops.get(stops.len() / 2).copied().unwrap_or(0);
    let mut logw = Vec::new();
    for s in 0..50 {
        let mut m = MartingaleState::new(0.2, 0.05, BettingStrategy::SignOfHistory).unwrap();
        for p in pvalues(2.7 / TSIRELSON_BOUND, derive_seed(606, 1, s)) {
            m.update(p).unwrap();
        }
        logw.push(m.log_wealth());
    }
    let positive = logw.iter().filter(|w| **w > 0.0).count();
    let mean = logw.iter().sum::<f64>() / logw.len() as f64;
    Ok((
        detected >= 48 && positive >= 48,
        format!(
            "v=1 detected {detected}/50 within 10^4 steps (median stop {median_stop}); \
             S=2.7 terminal log-wealth positive {positive}/50, mean {mean:.2}"
        ),
    ))
}

fn leakage() -> Verdict {
    let config: LeakageConfig = read_config(root("configs", "leakage.toml")).map_err(|e| e.to_string())?;
    let r = leakage_experiment(&config).map_err(|e| e.to_string())?;
    let shuffled = leakage_experiment(&LeakageConfig { shuffle_labels: true, ..config }).map_err(|e| e.to_string())?;
    let near_half = |auc: f64, se: f64| (auc - 0.5).abs() <= 3.0 * se;
    let control = near_half(shuffled.auc_same, shuffled.auc_se_same) && near_half(shuffled.auc_cross, shuffled.auc_se_cross);
    let gap = r.auc_same - r.auc_cross;
    Ok((
        gap >= 0.15 && r.auc_same >= 0.85 && control,
        format!(
            "auc_same {:.3} auc_cross {:.3} gap {gap:.3}; shuffled {:.3} (SE {:.3}) / {:.3} (SE {:.3})",
            r.auc_same, r.auc_cross, shuffled.auc_same, shuffled.auc_se_same, shuffled.auc_cross, shuffled.auc_se_cross
        ),
    ))
}

fn hardware_arithmetic() -> Verdict {
    let direct = read_dataset(root("data", "ionq_equivalent.csv")).map_err(|e| e.to_string())?.records;
    let mapping = ColumnMapping::read(root("data", "ionq_counts.mapping.toml")).map_err(|e| e.to_string())?;
    let mapped = read_mapped_file(root("data", "ionq_counts.csv"), &mapping).map_err(|e| e.to_string())?;
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, data) in [("correlator CSV", direct), ("counts CSV", mapped)] {
        let s = chsh_s(&summarize::<f64>(&data).map_err(|e| e.to_string())?);
        let (s_txt, m_txt) = (format!("{s:.3}"), format!("{:+.1}", classical_margin_percent(s)));
        pass &= s_txt == "2.716" && m_txt == "+35.8";
        parts.push(format!("{name}: S = {s_txt}, margin {m_txt}%"));
    }
    Ok((pass, parts.join("; ")))
}

fn oracle_equivalence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut ks_err: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=50);
        let m = rng.random_range(1..=50);
        let a = grid_sample(&mut rng, n);
        let b = grid_sample(&mut rng, m);
        ks_err = ks_err.max((ks_uniform(&a).unwrap() - ks_uniform_grid(&a)).abs());
        ks_err = ks_err.max((ks_two_sample(&a, &b).unwrap() - ks_two_sample_grid(&a, &b)).abs());
    }
    let mut auc_err: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(2..=80);
        let scores: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(0u8..12)) / 3.0).collect();
        let mut labels: Vec<GroundTruth> =
            (0..n).map(|_| if rng.random_bool(0.5) { GroundTruth::Quantum } else { GroundTruth::Classical }).collect();
        labels[0] = GroundTruth::Quantum;
        labels[1] = GroundTruth::Classical;
        let rank = auc_rank(&scores, &labels).unwrap();
        auc_err = auc_err.max((roc(&scores, &labels).unwrap().trapezoid_auc() - rank).abs());
        auc_err = auc_err.max((pairwise_auc(&scores, &labels) - rank).abs());
    }
    let mut mismatches = 0;
    let mut cases = 0;
    for cal in calibration_multisets() {
        let n = cal.len();
        for s in ORACLE_TEST_SCORES {
            let (geq, gt, eq) = counts(&cal, s);
            cases += 1;
            if conformal_pvalue(&cal, s) != (1 + geq) as f64 / (n + 1) as f64 {
                mismatches += 1;
            }
            for u in [0.0, 0.25, 0.5, 1.0] {
                let direct = ((gt as f64 + u * (eq + 1) as f64) / (n + 1) as f64).max(f64::MIN_POSITIVE);
                if (smoothed_pvalue(&cal, s, u) - direct).abs() >= 1e-15 {
                    mismatches += 1;
                }
            }
        }
    }
    Ok((
        ks_err < 1e-9 && auc_err < 1e-9 && mismatches == 0,
        format!("KS max error {ks_err:.1e}; AUC max error {auc_err:.1e}; conformal {cases} cases, {mismatches} mismatches"),
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("LHV bound", 60, lhv_bound),
        ("Tsirelson reproduction", 60, tsirelson),
        ("conformal validity", 120, conformal_validity),
        ("martingale validity", 60, martingale_validity),
        ("detection power", 600, detection_power),
        ("streaming power", 120, streaming_power),
        ("leakage direction", 600, leakage),
        ("hardware arithmetic", 1, hardware_arithmetic),
        ("oracle equivalence", 10, oracle_equivalence),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(limit);
        let (pass, detail) = match result {
            Ok((pass, detail)) => (pass && in_time, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!(
            "criterion {}: {} {name}: {detail} [{:.2} s, limit {limit} s{}]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            if in_time { "" } else { ", exceeded" }
        );
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
