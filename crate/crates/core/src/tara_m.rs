//! Streaming detector: a betting martingale over conformal p-values with
//! Ville-threshold stopping.
//!
//! Wealth is kept in log space. Each step multiplies wealth by
//! `1 + β_t (p_t − 1/2)` where `β_t` is fixed before `p_t` is seen, so under
//! uniform p-values the wealth process has expectation one at every step.

use std::fmt;

use crate::error::{Result, TaraError};
use crate::scalar::Real;

pub const DEFAULT_LAMBDA: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BettingStrategy {
    /// `β_t = λ·sign(mean(p_1..p_{t−1}) − 1/2)`, `β_1 = +λ`, no bet on an exact tie.
    #[default]
    SignOfHistory,
    /// Average of the wealth processes with fixed bets `{−λ, −λ/2, +λ/2, +λ}`.
    Mixture,
    /// `β_t = λ·sign(p_t − 1/2)`. Uses the current p-value, so the factor is
    /// never below one and the result is not a test martingale.
    UnsafePaperKelly,
}

impl BettingStrategy {
    pub fn is_valid(self) -> bool {
        !matches!(self, BettingStrategy::UnsafePaperKelly)
    }

    pub fn name(self) -> &'static str {
        match self {
            BettingStrategy::SignOfHistory => "sign-of-history",
            BettingStrategy::Mixture => "mixture",
            BettingStrategy::UnsafePaperKelly => "unsafe-paper-kelly",
        }
    }
}

impl fmt::Display for BettingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

const MIXTURE_GRID: [f64; 4] = [-1.0, -0.5, 0.5, 1.0];

#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleState<F> {
    t: u64,
    log_wealth: F,
    lambda: F,
    strategy: BettingStrategy,
    /// Sum of past p-values.
    p_sum: F,
    /// Log-wealth of each fixed-bet component (mixture strategy only).
    components: [F; 4],
    log_threshold: F,
}

/// One consumed p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord<F> {
    pub t: u64,
    pub p: F,
    pub beta: F,
    pub log_wealth: F,
}

impl<F: Real> MartingaleState<F> {
    pub fn new(lambda: F, alpha: F, strategy: BettingStrategy) -> Result<Self> {
        if !(lambda > F::zero() && lambda < F::one()) {
            return Err(TaraError::invalid(format!("lambda must lie in (0,1), got {lambda}")));
        }
        if !(alpha > F::zero() && alpha < F::one()) {
            return Err(TaraError::invalid(format!("alpha must lie in (0,1), got {alpha}")));
        }
        Ok(MartingaleState {
            t: 0,
            log_wealth: F::zero(),
            lambda,
            strategy,
            p_sum: F::zero(),
            components: [F::zero(); 4],
            log_threshold: -alpha.ln(),
        })
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn lambda(&self) -> F {
        self.lambda
    }

    pub fn strategy(&self) -> BettingStrategy {
        self.strategy
    }

    pub fn log_wealth(&self) -> F {
        self.log_wealth
    }

    /// `exp(log_wealth)`, saturating at the largest finite value.
    pub fn wealth(&self) -> F {
        let w = self.log_wealth.exp();
        if w.is_finite() {
            w
        } else {
            F::max_value()
        }
    }

    /// `1/α`.
    pub fn threshold(&self) -> F {
        self.log_threshold.exp()
    }

    pub fn log_threshold(&self) -> F {
        self.log_threshold
    }

    pub fn crossed(&self) -> bool {
        self.log_wealth >= self.log_threshold
    }

    /// Bet for the next step, computed from past p-values only.
    /// `None` for [`BettingStrategy::UnsafePaperKelly`], whose bet needs the next p-value.
    pub fn next_bet(&self) -> Option<F> {
        match self.strategy {
            BettingStrategy::SignOfHistory => {
                if self.t == 0 {
                    return Some(self.lambda);
                }
                let mean = self.p_sum / F::lit(self.t as f64);
                let half = F::lit(0.5);
                Some(if mean > half {
                    self.lambda
                } else if mean < half {
                    -self.lambda
                } else {
                    F::zero()
                })
            }
            BettingStrategy::Mixture => {
                let max = self.components.iter().copied().fold(F::neg_infinity(), F::max);
                let mut norm = F::zero();
                let mut beta = F::zero();
                for (lw, g) in self.components.iter().zip(MIXTURE_GRID) {
                    let w = (*lw - max).exp();
                    norm = norm + w;
                    beta = beta + w * F::lit(g) * self.lambda;
                }
                Some(beta / norm)
            }
            BettingStrategy::UnsafePaperKelly => None,
        }
    }

    /// Consumes `p ∈ (0,1]` and returns the step taken.
    pub fn update(&mut self, p: F) -> Result<StepRecord<F>> {
        if !(p > F::zero() && p <= F::one()) {
            return Err(TaraError::invalid(format!("p-value must lie in (0,1], got {p}")));
        }
        let half = F::lit(0.5);
        let beta = match self.next_bet() {
            Some(b) => b,
            None => {
                if p > half {
                    self.lambda
                } else if p < half {
                    -self.lambda
                } else {
                    F::zero()
                }
            }
        };
        self.log_wealth = self.log_wealth + (beta * (p - half)).ln_1p();
        if self.strategy == BettingStrategy::Mixture {
            for (lw, g) in self.components.iter_mut().zip(MIXTURE_GRID) {
                *lw = *lw + (F::lit(g) * self.lambda * (p - half)).ln_1p();
            }
        }
        self.p_sum = self.p_sum + p;
        self.t += 1;
        Ok(StepRecord { t: self.t, p, beta, log_wealth: self.log_wealth })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamConfig<F> {
    pub alpha: F,
    pub lambda: F,
    pub strategy: BettingStrategy,
}

impl<F: Real> Default for StreamConfig<F> {
    fn default() -> Self {
        StreamConfig { alpha: F::lit(0.05), lambda: F::lit(DEFAULT_LAMBDA), strategy: BettingStrategy::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreamReport<F> {
    pub detected: bool,
    pub stop_time: Option<u64>,
    pub final_log_wealth: F,
    pub steps: u64,
    pub trajectory: Vec<StepRecord<F>>,
    /// False when the betting rule does not give a valid test martingale.
    pub valid: bool,
}

/// Runs the martingale until wealth reaches `1/α` or the stream ends.
pub fn detect_stream<F: Real>(
    p_stream: impl IntoIterator<Item = F>,
    config: &StreamConfig<F>,
) -> Result<StreamReport<F>> {
    let mut state = MartingaleState::new(config.lambda, config.alpha, config.strategy)?;
    let mut trajectory = Vec::new();
    let mut stop_time = None;
    for p in p_stream {
        trajectory.push(state.update(p)?);
        if state.crossed() {
            stop_time = Some(state.t());
            break;
        }
    }
    Ok(StreamReport {
        detected: stop_time.is_some(),
        stop_time,
        final_log_wealth: state.log_wealth(),
        steps: state.t(),
        trajectory,
        valid: config.strategy.is_valid(),
    })
}
