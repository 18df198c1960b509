//! CHSH data model: measurement contexts, outcomes, correlators and the Bell parameter.
//!
//! Correlators use coincidence post-selection: only trials where both sides
//! clicked enter `E_xz = E[ab | x, z]`. Click rates partition all trials into
//! four categories (A only, B only, both, neither) and therefore sum to one.
//!
//! A context with no coincident trials gets correlator 0 and is flagged in
//! [`CorrelationSummary::zero_coincidence`] so downstream features stay finite.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TaraError};
use crate::scalar::Real;

/// Classical (local hidden variable) bound on |S|.
pub const CLASSICAL_BOUND: f64 = 2.0;
/// Tsirelson bound on |S| for quantum correlations.
pub const TSIRELSON_BOUND: f64 = 2.0 * std::f64::consts::SQRT_2;
/// Algebraic bound on |S| for any no-signaling box.
pub const ALGEBRAIC_BOUND: f64 = 4.0;
/// Slack allowed above the algebraic bound before input is rejected.
pub const NON_PHYSICAL_TOLERANCE: f64 = 1e-9;

/// Pair of binary measurement settings `(x, z)` for Alice and Bob.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "(u8, u8)", into = "(u8, u8)")]
pub struct Context {
    x: u8,
    z: u8,
}

impl Context {
    /// The four CHSH contexts in canonical order 00, 01, 10, 11.
    pub const ALL: [Context; 4] = [
        Context { x: 0, z: 0 },
        Context { x: 0, z: 1 },
        Context { x: 1, z: 0 },
        Context { x: 1, z: 1 },
    ];

    pub fn new(x: u8, z: u8) -> Result<Self> {
        if x > 1 || z > 1 {
            return Err(TaraError::invalid(format!("context ({x},{z}) outside {{0,1}}^2")));
        }
        Ok(Context { x, z })
    }

    pub fn from_index(index: usize) -> Self {
        Self::ALL[index]
    }

    pub fn x(self) -> u8 {
        self.x
    }

    pub fn z(self) -> u8 {
        self.z
    }

    /// Position in [`Context::ALL`].
    pub fn index(self) -> usize {
        usize::from(self.x * 2 + self.z)
    }

    /// Coefficient of `E_xz` in `S = E00 + E01 + E10 - E11`.
    pub fn chsh_sign(self) -> i8 {
        if self.x == 1 && self.z == 1 {
            -1
        } else {
            1
        }
    }
}

impl TryFrom<(u8, u8)> for Context {
    type Error = TaraError;

    fn try_from((x, z): (u8, u8)) -> Result<Self> {
        Context::new(x, z)
    }
}

impl From<Context> for (u8, u8) {
    fn from(c: Context) -> Self {
        (c.x, c.z)
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.x, self.z)
    }
}

/// Single-side measurement result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Minus,
    Plus,
    NoClick,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::Minus, Outcome::Plus, Outcome::NoClick];

    /// File encoding: -1, +1, and 0 for no-click.
    pub fn from_code(code: i8) -> Option<Self> {
        match code {
            -1 => Some(Outcome::Minus),
            1 => Some(Outcome::Plus),
            0 => Some(Outcome::NoClick),
            _ => None,
        }
    }

    pub fn code(self) -> i8 {
        match self {
            Outcome::Minus => -1,
            Outcome::Plus => 1,
            Outcome::NoClick => 0,
        }
    }

    pub fn from_sign(sign: i8) -> Self {
        if sign < 0 {
            Outcome::Minus
        } else {
            Outcome::Plus
        }
    }

    pub fn clicked(self) -> bool {
        self != Outcome::NoClick
    }

    pub(crate) fn index(self) -> usize {
        match self {
            Outcome::Minus => 0,
            Outcome::Plus => 1,
            Outcome::NoClick => 2,
        }
    }
}

/// One CHSH trial `(x_t, z_t, a_t, b_t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasurementRecord {
    pub trial_index: u64,
    pub context: Context,
    pub a: Outcome,
    pub b: Outcome,
}

impl MeasurementRecord {
    pub fn new(trial_index: u64, context: Context, a: Outcome, b: Outcome) -> Self {
        MeasurementRecord { trial_index, context, a, b }
    }

    /// `a·b` when both sides clicked.
    pub fn product(&self) -> Option<i8> {
        if self.a.clicked() && self.b.clicked() {
            Some(self.a.code() * self.b.code())
        } else {
            None
        }
    }
}

/// Fractions of trials in the four click categories.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClickRates<F> {
    /// Alice clicked, Bob did not.
    pub p_a: F,
    /// Bob clicked, Alice did not.
    pub p_b: F,
    /// Both clicked.
    pub p_ab: F,
    /// Neither clicked.
    pub p_empty: F,
}

/// Per-context correlators, trial counts and click rates of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSummary<F> {
    pub correlators: [F; 4],
    pub n_coincident: [u64; 4],
    pub n_total: [u64; 4],
    pub click_rates: ClickRates<F>,
}

impl<F: Real> CorrelationSummary<F> {
    pub fn e(&self, context: Context) -> F {
        self.correlators[context.index()]
    }

    /// Context had trials but no coincident clicks; its correlator is reported as 0.
    pub fn zero_coincidence(&self, context: Context) -> bool {
        self.n_coincident[context.index()] == 0
    }

    pub fn flagged_contexts(&self) -> Vec<Context> {
        Context::ALL.into_iter().filter(|c| self.zero_coincidence(*c)).collect()
    }

    pub fn total_trials(&self) -> u64 {
        self.n_total.iter().sum()
    }

    /// Pooled standard error of S, `sqrt(sum_c (1 - E_c^2) / n_c)` over coincident counts.
    pub fn chsh_standard_error(&self) -> F {
        let mut var = F::zero();
        for c in Context::ALL {
            let n = self.n_coincident[c.index()];
            if n > 0 {
                let e = self.e(c);
                var = var + (F::one() - e * e).max(F::zero()) / F::from_u64(n).unwrap();
            }
        }
        var.sqrt()
    }
}

/// Aggregates a dataset into correlators and click rates.
///
/// Sums are accumulated in integers, so the result does not depend on record order.
pub fn summarize<F: Real>(records: &[MeasurementRecord]) -> Result<CorrelationSummary<F>> {
    if records.is_empty() {
        return Err(TaraError::EmptyDataset);
    }
    let mut product_sum = [0i64; 4];
    let mut n_coincident = [0u64; 4];
    let mut n_total = [0u64; 4];
    let mut clicks = [0u64; 4]; // A only, B only, both, neither
    for r in records {
        let i = r.context.index();
        n_total[i] += 1;
        let cat = match (r.a.clicked(), r.b.clicked()) {
            (true, false) => 0,
            (false, true) => 1,
            (true, true) => 2,
            (false, false) => 3,
        };
        clicks[cat] += 1;
        if let Some(p) = r.product() {
            product_sum[i] += i64::from(p);
            n_coincident[i] += 1;
        }
    }
    let missing: Vec<String> = Context::ALL
        .iter()
        .filter(|c| n_total[c.index()] == 0)
        .map(|c| c.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(TaraError::MissingContexts(missing.join(", ")));
    }
    let mut correlators = [F::zero(); 4];
    for i in 0..4 {
        if n_coincident[i] > 0 {
            correlators[i] =
                F::from_i64(product_sum[i]).unwrap() / F::from_u64(n_coincident[i]).unwrap();
        }
    }
    let n = F::from_usize(records.len()).unwrap();
    let rate = |k: u64| F::from_u64(k).unwrap() / n;
    Ok(CorrelationSummary {
        correlators,
        n_coincident,
        n_total,
        click_rates: ClickRates {
            p_a: rate(clicks[0]),
            p_b: rate(clicks[1]),
            p_ab: rate(clicks[2]),
            p_empty: rate(clicks[3]),
        },
    })
}

/// `E00 + E01 + E10 - E11` from correlators in canonical context order.
pub fn chsh_from_correlators<F: Real>(e: &[F; 4]) -> F {
    e[0] + e[1] + e[2] - e[3]
}

pub fn chsh_s<F: Real>(summary: &CorrelationSummary<F>) -> F {
    chsh_from_correlators(&summary.correlators)
}

/// Builds the canonical correlator array from `(context, E)` pairs, requiring all four contexts.
pub fn correlators_from_pairs<F: Real>(
    pairs: impl IntoIterator<Item = (Context, F)>,
) -> Result<[F; 4]> {
    let mut out = [None; 4];
    for (c, e) in pairs {
        out[c.index()] = Some(e);
    }
    let missing: Vec<String> = Context::ALL
        .iter()
        .filter(|c| out[c.index()].is_none())
        .map(|c| c.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(TaraError::MissingContexts(missing.join(", ")));
    }
    Ok(out.map(|e| e.unwrap()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Classical,
    Quantum,
    Superquantum,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Classical => "classical",
            Regime::Quantum => "quantum",
            Regime::Superquantum => "superquantum",
        })
    }
}

/// Places |s| against the classical, Tsirelson and algebraic bounds.
/// Boundary values belong to the lower regime.
pub fn classify_regime<F: Real>(s: F) -> Result<Regime> {
    let a = s.abs();
    if !a.is_finite() || a > F::lit(ALGEBRAIC_BOUND + NON_PHYSICAL_TOLERANCE) {
        return Err(TaraError::NonPhysical(a.as_f64()));
    }
    Ok(if a <= F::lit(CLASSICAL_BOUND) {
        Regime::Classical
    } else if a <= F::lit(TSIRELSON_BOUND) {
        Regime::Quantum
    } else {
        Regime::Superquantum
    })
}

/// Violation of the classical bound as a percentage of it: `(|S| - 2) / 2 · 100`.
pub fn classical_margin_percent<F: Real>(s: F) -> F {
    (s.abs() - F::lit(CLASSICAL_BOUND)) / F::lit(CLASSICAL_BOUND) * F::lit(100.0)
}
