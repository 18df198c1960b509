//! Split conformal p-values with Mondrian (per-context) conditioning.
//!
//! The "feature" of a trial is its measurement context and the "label" is the
//! outcome pair `(a, b)`. Nonconformity is `−ln P̂(a, b | context)` under a
//! Laplace-smoothed table fitted on LHV data, so pairs the classical model finds
//! unlikely score high.
//!
//! Conservative p-values count ties as `≥`, which makes them super-uniform.
//! Randomized p-values split ties with an independent uniform draw and are
//! exactly uniform under exchangeability.

use rand::Rng;

use crate::chsh::{Context, MeasurementRecord, Outcome};
use crate::error::{Result, TaraError};
use crate::scalar::{sorted, total_cmp, Real};

pub const DEFAULT_PSEUDO_COUNT: f64 = 1.0;

/// Candidate label: the pair of outcomes of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OutcomePair {
    pub a: Outcome,
    pub b: Outcome,
}

impl OutcomePair {
    pub fn new(a: Outcome, b: Outcome) -> Self {
        OutcomePair { a, b }
    }

    pub fn of(record: &MeasurementRecord) -> Self {
        OutcomePair { a: record.a, b: record.b }
    }

    /// All nine pairs, indexed by `3·index(a) + index(b)` with `−1, +1, no-click` order.
    pub fn all() -> [OutcomePair; 9] {
        std::array::from_fn(|i| OutcomePair {
            a: Outcome::ALL[i / 3],
            b: Outcome::ALL[i % 3],
        })
    }

    pub fn index(self) -> usize {
        self.a.index() * 3 + self.b.index()
    }
}

/// How p-values treat calibration scores equal to the test score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreaking {
    /// `(1 + #{s_i ≥ s}) / (1 + n)`.
    #[default]
    Conservative,
    /// `(#{s_i > s} + U·(#{s_i = s} + 1)) / (1 + n)`, `U ~ Unif(0,1)`.
    Randomized,
}

/// Per-context smoothed outcome-pair probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct LhvConditionalModel<F> {
    pub(crate) tables: [[F; 9]; 4],
    pub(crate) pseudo_count: F,
}

impl<F: Real> LhvConditionalModel<F> {
    /// Rebuilds a model from stored tables, checking that each is a strictly positive distribution.
    pub fn from_tables(tables: [[F; 9]; 4], pseudo_count: F) -> Result<Self> {
        if !(pseudo_count > F::zero()) {
            return Err(TaraError::invalid("pseudo_count must be positive"));
        }
        for (c, t) in Context::ALL.iter().zip(tables.iter()) {
            let total = t.iter().fold(F::zero(), |acc, v| acc + *v);
            if t.iter().any(|v| !(*v > F::zero()) || !v.is_finite())
                || (total - F::one()).abs() > F::lit(1e-6)
            {
                return Err(TaraError::invalid(format!("table for context {c} is not a positive distribution")));
            }
        }
        Ok(LhvConditionalModel { tables, pseudo_count })
    }

    pub fn table(&self, context: Context) -> &[F; 9] {
        &self.tables[context.index()]
    }

    pub fn pseudo_count(&self) -> F {
        self.pseudo_count
    }

    pub fn probability(&self, context: Context, pair: OutcomePair) -> F {
        self.tables[context.index()][pair.index()]
    }

    /// `−ln P̂(pair | context)`; finite because every entry is smoothed.
    pub fn score(&self, context: Context, pair: OutcomePair) -> F {
        -self.probability(context, pair).ln()
    }

    pub fn score_record(&self, record: &MeasurementRecord) -> F {
        self.score(record.context, OutcomePair::of(record))
    }
}

/// `table[c][(a,b)] = (count + k) / (n_c + 9k)`.
pub fn fit_lhv_model<F: Real>(
    records: &[MeasurementRecord],
    pseudo_count: F,
) -> Result<LhvConditionalModel<F>> {
    if !(pseudo_count > F::zero()) || !pseudo_count.is_finite() {
        return Err(TaraError::invalid("pseudo_count must be positive"));
    }
    let mut counts = [[0u64; 9]; 4];
    for r in records {
        counts[r.context.index()][OutcomePair::of(r).index()] += 1;
    }
    let missing: Vec<String> = Context::ALL
        .iter()
        .filter(|c| counts[c.index()].iter().sum::<u64>() == 0)
        .map(|c| c.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(TaraError::MissingContexts(missing.join(", ")));
    }
    let tables = counts.map(|row| {
        let n: u64 = row.iter().sum();
        let denom = F::from_u64(n).unwrap() + F::lit(9.0) * pseudo_count;
        row.map(|k| (F::from_u64(k).unwrap() + pseudo_count) / denom)
    });
    Ok(LhvConditionalModel { tables, pseudo_count })
}

/// Sorted nonconformity scores of calibration trials, one list per context.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSet<F> {
    pub(crate) scores: [Vec<F>; 4],
}

impl<F: Real> CalibrationSet<F> {
    pub fn from_scores(scores: [Vec<F>; 4]) -> Result<Self> {
        if scores.iter().flatten().any(|s| !s.is_finite()) {
            return Err(TaraError::invalid("calibration scores must be finite"));
        }
        Ok(CalibrationSet { scores: scores.map(|s| sorted(&s)) })
    }

    pub fn from_records(model: &LhvConditionalModel<F>, records: &[MeasurementRecord]) -> Result<Self> {
        let mut scores: [Vec<F>; 4] = Default::default();
        for r in records {
            scores[r.context.index()].push(model.score_record(r));
        }
        Self::from_scores(scores)
    }

    pub fn scores(&self, context: Context) -> &[F] {
        &self.scores[context.index()]
    }

    pub fn len(&self) -> usize {
        self.scores.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Number of sorted calibration scores strictly greater than and equal to `test`.
fn rank_counts<F: Real>(cal_sorted: &[F], test: F) -> (usize, usize) {
    let lo = cal_sorted.partition_point(|s| *s < test);
    let hi = cal_sorted.partition_point(|s| *s <= test);
    (cal_sorted.len() - hi, hi - lo)
}

/// `(1 + #{s_i ≥ s}) / (1 + n)` over a sorted calibration list; 1 when the list is empty.
pub fn conformal_pvalue<F: Real>(cal_sorted: &[F], test_score: F) -> F {
    let (greater, equal) = rank_counts(cal_sorted, test_score);
    F::from_count(1 + greater + equal) / F::from_count(1 + cal_sorted.len())
}

/// Tie-randomized p-value with tie-breaking draw `u ∈ [0, 1)`.
pub fn smoothed_pvalue<F: Real>(cal_sorted: &[F], test_score: F, u: F) -> F {
    let (greater, equal) = rank_counts(cal_sorted, test_score);
    let p = (F::from_count(greater) + u * F::from_count(equal + 1)) / F::from_count(1 + cal_sorted.len());
    // u = 0 with no strictly larger scores would give 0; keep p inside (0, 1].
    p.max(F::min_positive_value())
}

/// Conformal p-value against the calibration scores of `context` only.
pub fn mondrian_pvalue<F: Real>(cal: &CalibrationSet<F>, context: Context, test_score: F) -> Result<F> {
    let scores = cal.scores(context);
    if scores.is_empty() {
        return Err(TaraError::UncalibratedContext(context));
    }
    Ok(conformal_pvalue(scores, test_score))
}

pub fn mondrian_smoothed_pvalue<F: Real>(
    cal: &CalibrationSet<F>,
    context: Context,
    test_score: F,
    u: F,
) -> Result<F> {
    let scores = cal.scores(context);
    if scores.is_empty() {
        return Err(TaraError::UncalibratedContext(context));
    }
    Ok(smoothed_pvalue(scores, test_score, u))
}

/// Model plus calibration: everything needed to turn trials into p-values.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalScorer<F> {
    pub model: LhvConditionalModel<F>,
    pub calibration: CalibrationSet<F>,
}

impl<F: Real> ConformalScorer<F> {
    pub fn new(model: LhvConditionalModel<F>, calibration: CalibrationSet<F>) -> Self {
        ConformalScorer { model, calibration }
    }

    /// Fits the model on `fit` and calibrates on the disjoint `calibrate` split.
    pub fn fit(fit: &[MeasurementRecord], calibrate: &[MeasurementRecord], pseudo_count: F) -> Result<Self> {
        let model = fit_lhv_model(fit, pseudo_count)?;
        let calibration = CalibrationSet::from_records(&model, calibrate)?;
        Ok(ConformalScorer { model, calibration })
    }

    pub fn pvalue(&self, record: &MeasurementRecord, ties: TieBreaking, rng: &mut impl Rng) -> Result<F> {
        let score = self.model.score_record(record);
        match ties {
            TieBreaking::Conservative => mondrian_pvalue(&self.calibration, record.context, score),
            TieBreaking::Randomized => {
                let u = F::lit(rng.random::<f64>());
                mondrian_smoothed_pvalue(&self.calibration, record.context, score, u)
            }
        }
    }

    pub fn pvalues(&self, records: &[MeasurementRecord], ties: TieBreaking, rng: &mut impl Rng) -> Result<Vec<F>> {
        records.iter().map(|r| self.pvalue(r, ties, rng)).collect()
    }

    /// `C_α(context) = {y : p(context, y) > α}` using conservative p-values.
    pub fn prediction_set(&self, context: Context, alpha: F) -> Result<Vec<OutcomePair>> {
        prediction_set(&self.model, &self.calibration, context, alpha)
    }
}

/// Prediction-set levels live in (0, 1]; α = 1 is accepted and yields the empty set.
fn check_level<F: Real>(alpha: F) -> Result<()> {
    if alpha > F::zero() && alpha <= F::one() {
        Ok(())
    } else {
        Err(TaraError::invalid(format!("level {alpha} outside (0,1]")))
    }
}

pub fn prediction_set<F: Real>(
    model: &LhvConditionalModel<F>,
    cal: &CalibrationSet<F>,
    context: Context,
    alpha: F,
) -> Result<Vec<OutcomePair>> {
    check_level(alpha)?;
    let mut set = Vec::new();
    for pair in OutcomePair::all() {
        if mondrian_pvalue(cal, context, model.score(context, pair))? > alpha {
            set.push(pair);
        }
    }
    Ok(set)
}

/// Mean `|C_α|` over the trials of a dataset.
pub fn expected_set_size<F: Real>(
    model: &LhvConditionalModel<F>,
    cal: &CalibrationSet<F>,
    records: &[MeasurementRecord],
    alpha: F,
) -> Result<F> {
    if records.is_empty() {
        return Err(TaraError::EmptyDataset);
    }
    let mut sizes = [None; 4];
    let mut total = 0usize;
    for r in records {
        let i = r.context.index();
        if sizes[i].is_none() {
            sizes[i] = Some(prediction_set(model, cal, r.context, alpha)?.len());
        }
        total += sizes[i].unwrap();
    }
    Ok(F::from_count(total) / F::from_count(records.len()))
}

/// Fraction of trials whose observed pair lies in its prediction set.
pub fn empirical_coverage<F: Real>(
    model: &LhvConditionalModel<F>,
    cal: &CalibrationSet<F>,
    records: &[MeasurementRecord],
    alpha: F,
) -> Result<F> {
    if records.is_empty() {
        return Err(TaraError::EmptyDataset);
    }
    let sets: Vec<Vec<OutcomePair>> = Context::ALL
        .iter()
        .map(|c| if cal.scores(*c).is_empty() { Ok(Vec::new()) } else { prediction_set(model, cal, *c, alpha) })
        .collect::<Result<_>>()?;
    let covered = records
        .iter()
        .filter(|r| sets[r.context.index()].contains(&OutcomePair::of(r)))
        .count();
    Ok(F::from_count(covered) / F::from_count(records.len()))
}

/// Sorts arbitrary scores into calibration order; exposed for callers building lists by hand.
pub fn sort_scores<F: Real>(scores: &mut [F]) {
    scores.sort_by(total_cmp);
}
