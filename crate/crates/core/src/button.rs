//! The button problem and the reduction that turns a ski-rental strategy
//! into a button strategy.
//!
//! The reduction's instance has options `(C^i, i)` for `i = 1..=n`, so day
//! counts are kept symbolically as base-`C` digit vectors and never expanded.

use std::cmp::Ordering;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::harness::{Estimate, Welford};
use crate::rental::{DayCount, OptOracle, Segment};
use crate::strategies::{guarantee_bounds, sample_alpha, Plan, StrategyError, StrategyKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ButtonError {
    #[error("a button instance needs at least one button")]
    Empty,
    #[error("price {index} is {price}; prices must be positive and finite")]
    BadPrice { index: usize, price: f64 },
    #[error("prices must be nondecreasing (button {index} is cheaper than button {})", index - 1)]
    Decreasing { index: usize },
    #[error("button index {index} is outside 1..={m}")]
    IndexOutOfRange { index: usize, m: usize },
    #[error("price {index} is {price}; the reduction needs integer prices")]
    NonIntegerPrice { index: usize, price: f64 },
    #[error("epsilon must lie in (0, 1), got {0}")]
    BadEpsilon(f64),
    #[error("need 1 <= chi <= rho, got chi = {chi}, rho = {rho}")]
    BadGuarantees { chi: f64, rho: f64 },
    #[error("modulus C = {0} does not fit the symbolic day representation")]
    ModulusTooLarge(f64),
    #[error("strategy {0} needs a predicted target button")]
    MissingPrediction(StrategyKind),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

/// Buttons with nondecreasing prices; `first_target` and `prediction` are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct ButtonInstance {
    prices: Vec<f64>,
    first_target: usize,
    prediction: Option<usize>,
}

impl ButtonInstance {
    pub fn new(prices: Vec<f64>, first_target: usize, prediction: Option<usize>) -> Result<Self, ButtonError> {
        if prices.is_empty() {
            return Err(ButtonError::Empty);
        }
        for (i, &p) in prices.iter().enumerate() {
            if !(p > 0.0 && p.is_finite()) {
                return Err(ButtonError::BadPrice { index: i + 1, price: p });
            }
            if i > 0 && p < prices[i - 1] {
                return Err(ButtonError::Decreasing { index: i + 1 });
            }
        }
        let m = prices.len();
        for index in std::iter::once(first_target).chain(prediction) {
            if !(1..=m).contains(&index) {
                return Err(ButtonError::IndexOutOfRange { index, m });
            }
        }
        Ok(ButtonInstance { prices, first_target, prediction })
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn first_target(&self) -> usize {
        self.first_target
    }

    pub fn prediction(&self) -> Option<usize> {
        self.prediction
    }

    /// Price of a 1-based button.
    pub fn price(&self, button: usize) -> f64 {
        self.prices[button - 1]
    }

    pub fn max_price(&self) -> f64 {
        *self.prices.last().unwrap()
    }

    fn integer_prices(&self) -> Result<Vec<u64>, ButtonError> {
        self.prices
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                if p.fract() == 0.0 && p < 2f64.powi(53) {
                    Ok(p as u64)
                } else {
                    Err(ButtonError::NonIntegerPrice { index: i + 1, price: p })
                }
            })
            .collect()
    }
}

/// Last (1-based) button whose price does not exceed `option_cost`.
pub fn map_option_to_click(prices: &[f64], option_cost: f64) -> Option<usize> {
    match prices.partition_point(|&p| p <= option_cost) {
        0 => None,
        j => Some(j),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionConfig {
    pub epsilon: f64,
    pub rho: f64,
    pub chi: f64,
    /// Base of the option durations.
    pub modulus: u64,
    /// Number of options, equal to the largest price.
    pub n: u64,
}

impl ReductionConfig {
    pub fn new(epsilon: f64, rho: f64, chi: f64, max_price: u64) -> Result<Self, ButtonError> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(ButtonError::BadEpsilon(epsilon));
        }
        if !(chi >= 1.0 && chi <= rho && chi.is_finite()) {
            return Err(ButtonError::BadGuarantees { chi, rho });
        }
        let ratio = if rho.is_finite() { rho } else { chi };
        let c = (ratio / epsilon).ceil() * max_price as f64;
        // Digit sums must not overflow: keep C below 2^62.
        if c >= 2f64.powi(62) {
            return Err(ButtonError::ModulusTooLarge(c));
        }
        Ok(ReductionConfig { epsilon, rho, chi, modulus: c as u64, n: max_price })
    }

    /// Configuration from a strategy's proven guarantees.
    pub fn for_strategy(kind: StrategyKind, lambda: Option<f64>, epsilon: f64, max_price: u64) -> Result<Self, ButtonError> {
        let (chi, rho) = guarantee_bounds(kind, lambda)?;
        ReductionConfig::new(epsilon, rho, chi, max_price)
    }
}

/// A day count `sum_e digit_e * C^e`, kept carry-normalized so every digit is
/// below `C`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PowerDays {
    base: u64,
    digits: Vec<u64>,
}

impl PowerDays {
    pub fn zero(base: u64) -> Self {
        assert!(base >= 2, "base must be at least 2");
        PowerDays { base, digits: Vec::new() }
    }

    /// `count * C^exponent`.
    pub fn power(base: u64, exponent: u32, count: u64) -> Self {
        let mut d = PowerDays::zero(base);
        d.add_at(exponent as usize, count);
        d
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    /// Base-`C` digits, least significant first, without trailing zeros.
    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    pub fn is_zero(&self) -> bool {
        self.digits.is_empty()
    }

    /// Exponent of the leading digit.
    pub fn leading_exponent(&self) -> Option<usize> {
        self.digits.len().checked_sub(1)
    }

    fn add_at(&mut self, mut pos: usize, mut amount: u64) {
        while amount > 0 {
            if self.digits.len() <= pos {
                self.digits.resize(pos + 1, 0);
            }
            let total = self.digits[pos] as u128 + amount as u128;
            self.digits[pos] = (total % self.base as u128) as u64;
            amount = (total / self.base as u128) as u64;
            pos += 1;
        }
        while self.digits.last() == Some(&0) {
            self.digits.pop();
        }
    }
}

impl Ord for PowerDays {
    fn cmp(&self, other: &Self) -> Ordering {
        debug_assert_eq!(self.base, other.base);
        self.digits
            .len()
            .cmp(&other.digits.len())
            .then_with(|| self.digits.iter().rev().cmp(other.digits.iter().rev()))
    }
}

impl PartialOrd for PowerDays {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl DayCount for PowerDays {
    fn plus(&self, other: &Self) -> Self {
        debug_assert_eq!(self.base, other.base);
        let mut out = self.clone();
        for (pos, &d) in other.digits.iter().enumerate() {
            out.add_at(pos, d);
        }
        out
    }

    fn is_unbounded(&self) -> bool {
        false
    }
}

impl fmt::Display for PowerDays {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.digits.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (e, &d) in self.digits.iter().enumerate().rev().filter(|(_, &d)| d > 0) {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "{d}*{}^{e}", self.base)?;
        }
        Ok(())
    }
}

/// The symbolic instance `{(C^i, i)}` with its closed-form optimum.
///
/// The best coverage for an integer budget `B` is `floor(B / n)` copies of
/// option `n` plus one copy of option `B mod n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionOracle {
    base: u64,
    n: u64,
}

impl ReductionOracle {
    pub fn new(cfg: &ReductionConfig) -> Self {
        ReductionOracle { base: cfg.modulus, n: cfg.n }
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn option_count(&self) -> u64 {
        self.n
    }

    /// Duration of 0-based option `index`: `C^(index + 1)`.
    pub fn duration(&self, index: usize) -> PowerDays {
        PowerDays::power(self.base, index as u32 + 1, 1)
    }

    fn best_counts(&self, budget: u64) -> Vec<(usize, u64)> {
        let mut counts = Vec::new();
        let r = budget % self.n;
        if r > 0 {
            counts.push((r as usize - 1, 1));
        }
        if budget / self.n > 0 {
            counts.push((self.n as usize - 1, budget / self.n));
        }
        counts
    }

    /// Days covered by the best solution of integer cost at most `budget`.
    pub fn coverage(&self, budget: u64) -> PowerDays {
        self.segment_from(self.best_counts(budget)).total_days
    }

    fn segment_from(&self, purchases: Vec<(usize, u64)>) -> Segment<PowerDays> {
        let total_cost = purchases.iter().map(|&(i, k)| (i as f64 + 1.0) * k as f64).sum();
        let total_days = purchases.iter().fold(PowerDays::zero(self.base), |acc, &(i, k)| {
            acc.plus(&PowerDays::power(self.base, i as u32 + 1, k))
        });
        Segment { purchases, total_cost, total_days }
    }

    /// Smallest integer cost covering `t` days.
    pub fn opt_budget(&self, t: &PowerDays) -> u64 {
        if t.is_zero() {
            return 0;
        }
        let mut hi = 1u64;
        while self.coverage(hi) < *t {
            hi = hi.checked_mul(2).expect("day count out of range");
        }
        let mut lo = hi / 2;
        // Invariant: coverage(lo) < t <= coverage(hi), with coverage(0) = 0.
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.coverage(mid) < *t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

impl OptOracle for ReductionOracle {
    type Days = PowerDays;

    fn zero_days(&self) -> PowerDays {
        PowerDays::zero(self.base)
    }

    fn one_day(&self) -> PowerDays {
        PowerDays::power(self.base, 0, 1)
    }

    fn option_cost(&self, index: usize) -> f64 {
        index as f64 + 1.0
    }

    fn opt_cost(&mut self, t: &PowerDays) -> f64 {
        self.opt_budget(t) as f64
    }

    fn opt_segment(&mut self, t: &PowerDays) -> Segment<PowerDays> {
        let b = self.opt_budget(t);
        self.segment_from(self.best_counts(b))
    }

    fn best_within_budget(&mut self, budget: f64) -> Segment<PowerDays> {
        assert!(budget.is_finite(), "budget must be finite, got {budget}");
        let b = budget.floor().clamp(0.0, 2f64.powi(62)) as u64;
        self.segment_from(self.best_counts(b))
    }
}

/// The ski instance built from a button instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SkiReduction {
    pub config: ReductionConfig,
    pub oracle: ReductionOracle,
    /// `C^(b_prediction)` when a prediction is given.
    pub prediction: Option<PowerDays>,
}

pub fn reduce_to_ski(buttons: &ButtonInstance, cfg: &ReductionConfig) -> Result<SkiReduction, ButtonError> {
    let prices = buttons.integer_prices()?;
    let max = *prices.last().unwrap();
    if max != cfg.n {
        return Err(ButtonError::BadGuarantees { chi: cfg.chi, rho: cfg.rho });
    }
    let prediction = buttons
        .prediction()
        .map(|j| PowerDays::power(cfg.modulus, prices[j - 1] as u32, 1));
    Ok(SkiReduction { config: *cfg, oracle: ReductionOracle::new(cfg), prediction })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    TargetHit,
    Forced,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::TargetHit => "target-hit",
            Termination::Forced => "forced",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ButtonTrace {
    /// `(1-based button, price)` in click order.
    pub clicks: Vec<(usize, f64)>,
    pub total_price: f64,
    pub terminated_by: Termination,
    /// Option choices that mapped to an already-passed button.
    pub suppressed_clicks: usize,
    /// Ski cost of the options chosen one at a time.
    pub lazy_ski_cost: f64,
    /// Ski cost of every segment the strategy emitted.
    pub eager_ski_cost: f64,
    pub alpha: Option<f64>,
}

impl ButtonTrace {
    pub fn forced_surcharge(&self) -> Option<f64> {
        match self.terminated_by {
            Termination::Forced => self.clicks.last().map(|c| c.1),
            Termination::TargetHit => None,
        }
    }
}

/// Clicks buttons for a stream of chosen options.
///
/// Each item is `(0-based option index, eager ski cost so far)`. A choice of
/// option `i` clicks the last button of price at most `i + 1`; once the ski
/// cost reaches `C`, the last button is clicked.
pub fn drive_reduction<I>(buttons: &ButtonInstance, cfg: &ReductionConfig, choices: I) -> ButtonTrace
where
    I: IntoIterator<Item = (usize, f64)>,
{
    let mut trace = ButtonTrace {
        clicks: Vec::new(),
        total_price: 0.0,
        terminated_by: Termination::Forced,
        suppressed_clicks: 0,
        lazy_ski_cost: 0.0,
        eager_ski_cost: 0.0,
        alpha: None,
    };
    let m = buttons.len();
    let mut last_clicked = 0usize;
    for (option, eager) in choices {
        let cost = option as f64 + 1.0;
        trace.lazy_ski_cost += cost;
        trace.eager_ski_cost = eager;
        if let Some(j) = map_option_to_click(buttons.prices(), cost) {
            if j <= last_clicked {
                trace.suppressed_clicks += 1;
            } else {
                last_clicked = j;
                trace.clicks.push((j, buttons.price(j)));
                trace.total_price += buttons.price(j);
                if j >= buttons.first_target() {
                    trace.terminated_by = Termination::TargetHit;
                    return trace;
                }
            }
        }
        if trace.lazy_ski_cost >= cfg.modulus as f64 {
            trace.clicks.push((m, buttons.price(m)));
            trace.total_price += buttons.price(m);
            trace.terminated_by = Termination::Forced;
            return trace;
        }
    }
    panic!("choice stream ended before the button run terminated");
}

/// Runs a ski strategy through the reduction. Randomized strategies without
/// an explicit `alpha` draw it from `seed`.
pub fn run_reduction(
    buttons: &ButtonInstance,
    kind: StrategyKind,
    lambda: Option<f64>,
    alpha: Option<f64>,
    cfg: &ReductionConfig,
    seed: u64,
) -> Result<ButtonTrace, ButtonError> {
    let reduction = reduce_to_ski(buttons, cfg)?;
    if kind.uses_prediction() && reduction.prediction.is_none() {
        return Err(ButtonError::MissingPrediction(kind));
    }
    let alpha = match (kind.is_randomized(), alpha) {
        (false, _) => None,
        (true, Some(a)) => Some(a),
        (true, None) => Some(sample_alpha(ChaCha8Rng::seed_from_u64(seed).random::<f64>())?),
    };
    let mut oracle = reduction.oracle.clone();
    let prediction = if kind.uses_prediction() { reduction.prediction.clone() } else { None };
    let mut plan = Plan::start(kind, prediction, lambda, alpha, &mut oracle)?;
    let choices = std::iter::from_fn(|| {
        let step = plan.next_segment(&mut oracle)?;
        let eager = plan.spent();
        // Longest first: durations grow with the option index.
        Some(step.segment.purchases.into_iter().rev().flat_map(move |(i, k)| {
            std::iter::repeat_n((i, eager), k as usize)
        }))
    })
    .flatten();
    let mut trace = drive_reduction(buttons, cfg, choices);
    trace.alpha = alpha;
    Ok(trace)
}

/// Mean total price over seeds `0..seeds`.
pub fn mean_button_price(
    buttons: &ButtonInstance,
    kind: StrategyKind,
    lambda: Option<f64>,
    cfg: &ReductionConfig,
    seeds: u64,
) -> Result<Estimate, ButtonError> {
    // Surface configuration errors before fanning out.
    run_reduction(buttons, kind, lambda, None, cfg, 0)?;
    let stats = (0..seeds)
        .into_par_iter()
        .fold(Welford::default, |mut acc, seed| {
            let t = run_reduction(buttons, kind, lambda, None, cfg, seed).expect("validated configuration");
            acc.push(t.total_price);
            acc
        })
        .reduce(Welford::default, Welford::merge);
    Ok(Estimate { mean: stats.mean, std_error: stats.std_error(), samples: seeds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::E;

    fn prices() -> Vec<f64> {
        vec![1.0, 2.0, 2.0, 3.0]
    }

    #[test]
    fn configuration() {
        let cfg = ReductionConfig::new(0.5, E, E, 3).unwrap();
        assert_eq!(cfg.modulus, 18);
        assert_eq!(cfg.n, 3);
        let cfg = ReductionConfig::new(0.5, f64::INFINITY, 2.0, 3).unwrap();
        assert_eq!(cfg.modulus, 12);
        let cfg = ReductionConfig::new(0.5, E, E, 1).unwrap();
        assert_eq!(cfg.modulus, 6);
        assert!(ReductionConfig::new(1.0, E, E, 3).is_err());
        assert!(ReductionConfig::new(0.5, 2.0, 3.0, 3).is_err());
    }

    #[test]
    fn reduced_instance() {
        let b = ButtonInstance::new(prices(), 3, Some(3)).unwrap();
        let cfg = ReductionConfig::for_strategy(StrategyKind::RandComp, None, 0.5, 3).unwrap();
        let red = reduce_to_ski(&b, &cfg).unwrap();
        assert_eq!(red.oracle.option_count(), 3);
        assert_eq!(red.oracle.duration(0), PowerDays::power(18, 1, 1));
        assert_eq!(red.oracle.duration(2).digits(), &[0, 0, 0, 1]);
        assert_eq!(red.prediction.unwrap(), PowerDays::power(18, 2, 1));
        let frac = ButtonInstance::new(vec![1.0, 2.5], 1, None).unwrap();
        let cfg = ReductionConfig::new(0.5, E, E, 3).unwrap();
        assert!(matches!(reduce_to_ski(&frac, &cfg), Err(ButtonError::NonIntegerPrice { index: 2, .. })));
    }

    #[test]
    fn click_mapping() {
        assert_eq!(map_option_to_click(&prices(), 2.0), Some(3));
        assert_eq!(map_option_to_click(&[2.0, 3.0], 1.0), None);
        assert_eq!(map_option_to_click(&[1.0], 5.0), Some(1));
    }

    #[test]
    fn instance_validation() {
        assert!(ButtonInstance::new(vec![], 1, None).is_err());
        assert!(ButtonInstance::new(vec![2.0, 1.0], 1, None).is_err());
        assert!(ButtonInstance::new(vec![1.0], 2, None).is_err());
        assert!(ButtonInstance::new(vec![1.0], 1, Some(0)).is_err());
    }

    #[test]
    fn power_days_arithmetic() {
        let a = PowerDays::power(3, 1, 5); // 15
        assert_eq!(a.digits(), &[0, 2, 1]);
        let b = PowerDays::power(3, 2, 1).plus(&PowerDays::power(3, 0, 7)); // 9 + 7 = 16
        assert_eq!(b.digits(), &[1, 2, 1]);
        assert!(a < b);
        assert_eq!(a.plus(&b).digits(), &[1, 1, 0, 1]); // 31 = 27 + 3 + 1
        assert_eq!(PowerDays::zero(3).plus(&PowerDays::zero(3)), PowerDays::zero(3));
        assert_eq!(PowerDays::power(10, 40, 3).to_string(), "3*10^40");
    }

    #[test]
    fn closed_form_optimum() {
        let cfg = ReductionConfig::new(0.5, E, E, 3).unwrap();
        let mut o = ReductionOracle::new(&cfg);
        assert_eq!(o.coverage(0), PowerDays::zero(18));
        assert_eq!(o.coverage(1), PowerDays::power(18, 1, 1));
        assert_eq!(o.coverage(7), PowerDays::power(18, 3, 2).plus(&PowerDays::power(18, 1, 1)));
        let one = o.one_day();
        assert_eq!(o.opt_cost(&one), 1.0);
        assert_eq!(o.opt_cost(&PowerDays::power(18, 2, 1)), 2.0);
        assert_eq!(o.opt_cost(&PowerDays::power(18, 3, 1).plus(&one)), 4.0);
        assert!(o.best_within_budget(0.9).is_empty());
        let s = o.best_within_budget(5.5);
        assert_eq!(s.purchases, vec![(1, 1), (2, 1)]);
        assert_eq!(s.total_cost, 5.0);
    }

    #[test]
    fn immediate_target() {
        let b = ButtonInstance::new(prices(), 1, None).unwrap();
        let cfg = ReductionConfig::for_strategy(StrategyKind::RandComp, None, 0.5, 3).unwrap();
        for seed in 0..50 {
            let t = run_reduction(&b, StrategyKind::RandComp, None, None, &cfg, seed).unwrap();
            assert_eq!(t.terminated_by, Termination::TargetHit);
            assert_eq!(t.clicks.len(), 1);
            assert!(t.total_price <= t.clicks[0].1);
        }
    }

    #[test]
    fn det_comp_trace_replays() {
        let b = ButtonInstance::new(prices(), 3, None).unwrap();
        let cfg = ReductionConfig::for_strategy(StrategyKind::DetComp, None, 0.5, 3).unwrap();
        assert_eq!(cfg.modulus, 24);
        let t = run_reduction(&b, StrategyKind::DetComp, None, None, &cfg, 0).unwrap();
        // Options chosen: 1 (button 1), 1 (suppressed), 2 (button 3, a target).
        assert_eq!(t.clicks, vec![(1, 1.0), (3, 2.0)]);
        assert_eq!(t.suppressed_clicks, 1);
        assert_eq!(t.terminated_by, Termination::TargetHit);
        assert_eq!(t, run_reduction(&b, StrategyKind::DetComp, None, None, &cfg, 9).unwrap());
    }

    #[test]
    fn forced_termination_adds_last_price() {
        let b = ButtonInstance::new(vec![2.0, 3.0, 5.0], 3, None).unwrap();
        let cfg = ReductionConfig::new(0.5, E, E, 5).unwrap();
        // Only the cheapest option, which maps to no button at all.
        let t = drive_reduction(&b, &cfg, (1..).map(|k| (0, k as f64)));
        assert_eq!(t.terminated_by, Termination::Forced);
        assert_eq!(t.clicks, vec![(3, 5.0)]);
        assert_eq!(t.forced_surcharge(), Some(5.0));
        assert_eq!(t.lazy_ski_cost, cfg.modulus as f64);
    }

    #[test]
    fn rand_comp_button_price_bound() {
        let b = ButtonInstance::new(prices(), 3, None).unwrap();
        let cfg = ReductionConfig::for_strategy(StrategyKind::RandComp, None, 0.5, 3).unwrap();
        let est = mean_button_price(&b, StrategyKind::RandComp, None, &cfg, 20_000).unwrap();
        assert!(est.mean <= (E + 0.5) * 2.0, "{est:?}");
    }

    #[test]
    fn learning_augmented_needs_prediction() {
        let b = ButtonInstance::new(prices(), 3, None).unwrap();
        let cfg = ReductionConfig::for_strategy(StrategyKind::DetLa, Some(0.5), 0.5, 3).unwrap();
        assert!(matches!(
            run_reduction(&b, StrategyKind::DetLa, Some(0.5), None, &cfg, 0),
            Err(ButtonError::MissingPrediction(StrategyKind::DetLa))
        ));
        let b = ButtonInstance::new(prices(), 3, Some(3)).unwrap();
        let t = run_reduction(&b, StrategyKind::DetLa, Some(0.5), None, &cfg, 0).unwrap();
        assert_eq!(t.terminated_by, Termination::TargetHit);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn power_days_order_matches_integers(base in 2u64..50, a in prop::collection::vec((0u32..4, 0u64..200), 0..6),
                                             b in prop::collection::vec((0u32..4, 0u64..200), 0..6)) {
            let build = |v: &[(u32, u64)]| {
                v.iter().fold((PowerDays::zero(base), 0u128), |(d, n), &(e, k)| {
                    (d.plus(&PowerDays::power(base, e, k)), n + k as u128 * (base as u128).pow(e))
                })
            };
            let (da, na) = build(&a);
            let (db, nb) = build(&b);
            prop_assert_eq!(da.cmp(&db), na.cmp(&nb));
        }

        #[test]
        fn clicks_strictly_increase_and_bound_holds(
            raw in prop::collection::vec(1u64..6, 1..6),
            target in 0usize..6,
            u in 0.0f64..1.0,
            kind in prop::sample::select(vec![StrategyKind::DetComp, StrategyKind::RandComp, StrategyKind::AnandDoubling]),
        ) {
            let mut p: Vec<f64> = raw.iter().map(|&x| x as f64).collect();
            p.sort_by(f64::total_cmp);
            let j = target % p.len() + 1;
            let b = ButtonInstance::new(p.clone(), j, None).unwrap();
            let cfg = ReductionConfig::for_strategy(kind, None, 0.5, *p.last().unwrap() as u64).unwrap();
            let alpha = kind.is_randomized().then(|| sample_alpha(u).unwrap());
            let t = run_reduction(&b, kind, None, alpha, &cfg, 0).unwrap();
            prop_assert!(t.clicks.windows(2).all(|w| w[0].0 < w[1].0));
            let last = t.clicks.last().unwrap().0;
            prop_assert!(last >= j || t.terminated_by == Termination::Forced);
            match t.terminated_by {
                Termination::TargetHit => prop_assert!(t.total_price <= t.lazy_ski_cost + 1e-9),
                Termination::Forced => {
                    prop_assert_eq!(last, p.len());
                    prop_assert!(t.total_price <= t.lazy_ski_cost + b.max_price() + 1e-9);
                }
            }
            prop_assert!(t.lazy_ski_cost <= t.eager_ski_cost + 1e-9);
        }
    }
}
