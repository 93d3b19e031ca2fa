//! Online strategies as pull-based segment generators.
//!
//! Every strategy is described as if skiing never ends: a [`Plan`] emits the
//! next appended sub-solution only when asked, and the harness stops asking
//! once the true horizon is covered. Plans are generic over [`OptOracle`], so
//! the same state machines drive both concrete instances and the symbolic
//! instance of the button reduction.

use std::f64::consts::E;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::rental::{DayCount, Days, OptOracle, OptTable, Segment};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StrategyError {
    #[error("strategy {0} needs a prediction")]
    MissingPrediction(StrategyKind),
    #[error("strategy {0} needs a trade-off parameter lambda")]
    MissingLambda(StrategyKind),
    #[error("strategy {0} needs alpha (or a seed to sample it)")]
    MissingAlpha(StrategyKind),
    #[error("lambda must lie in {range}, got {value}")]
    LambdaOutOfRange { value: f64, range: &'static str },
    #[error("alpha must lie in [1, e), got {0}")]
    AlphaOutOfRange(f64),
    #[error("prediction must be at least one day")]
    PredictionTooSmall,
    #[error("uniform sample must lie in [0, 1), got {0}")]
    UniformOutOfRange(f64),
    #[error("unknown strategy {0:?} (expected det, det-la, rand, rand-la or anand)")]
    UnknownStrategy(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    /// Deterministic doubling on spent cost (4-competitive).
    DetComp,
    /// Deterministic learning-augmented three-phase strategy.
    DetLa,
    /// Randomized phases with budgets `alpha * e^i` (e-competitive).
    RandComp,
    /// Randomized phases with the prediction window.
    RandLa,
    /// Doubling on the optimum of the covered days.
    AnandDoubling,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 5] = [
        StrategyKind::DetComp,
        StrategyKind::DetLa,
        StrategyKind::RandComp,
        StrategyKind::RandLa,
        StrategyKind::AnandDoubling,
    ];

    pub fn cli_name(self) -> &'static str {
        match self {
            StrategyKind::DetComp => "det",
            StrategyKind::DetLa => "det-la",
            StrategyKind::RandComp => "rand",
            StrategyKind::RandLa => "rand-la",
            StrategyKind::AnandDoubling => "anand",
        }
    }

    pub fn is_randomized(self) -> bool {
        matches!(self, StrategyKind::RandComp | StrategyKind::RandLa)
    }

    pub fn uses_prediction(self) -> bool {
        matches!(self, StrategyKind::DetLa | StrategyKind::RandLa)
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

impl FromStr for StrategyKind {
    type Err = StrategyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.cli_name() == s)
            .ok_or_else(|| StrategyError::UnknownStrategy(s.to_string()))
    }
}

/// Strategy selection for a concrete instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyParams {
    pub kind: StrategyKind,
    pub prediction: Option<u64>,
    pub lambda: Option<f64>,
    pub alpha: Option<f64>,
}

impl StrategyParams {
    pub fn det_comp() -> Self {
        Self { kind: StrategyKind::DetComp, prediction: None, lambda: None, alpha: None }
    }

    pub fn det_la(prediction: u64, lambda: f64) -> Self {
        Self { kind: StrategyKind::DetLa, prediction: Some(prediction), lambda: Some(lambda), alpha: None }
    }

    pub fn rand_comp(alpha: f64) -> Self {
        Self { kind: StrategyKind::RandComp, prediction: None, lambda: None, alpha: Some(alpha) }
    }

    pub fn rand_la(prediction: u64, lambda: f64, alpha: f64) -> Self {
        Self { kind: StrategyKind::RandLa, prediction: Some(prediction), lambda: Some(lambda), alpha: Some(alpha) }
    }

    pub fn anand() -> Self {
        Self { kind: StrategyKind::AnandDoubling, prediction: None, lambda: None, alpha: None }
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        Self { alpha: Some(alpha), ..self }
    }

    pub fn validate(&self) -> Result<(), StrategyError> {
        if self.kind.uses_prediction() && self.prediction == Some(0) {
            return Err(StrategyError::PredictionTooSmall);
        }
        check_params(self.kind, self.prediction.is_some(), self.lambda, self.alpha)
    }
}

fn check_params(
    kind: StrategyKind,
    has_prediction: bool,
    lambda: Option<f64>,
    alpha: Option<f64>,
) -> Result<(), StrategyError> {
    if kind.uses_prediction() {
        if !has_prediction {
            return Err(StrategyError::MissingPrediction(kind));
        }
        let lambda = lambda.ok_or(StrategyError::MissingLambda(kind))?;
        if !(0.0..=1.0).contains(&lambda) {
            return Err(StrategyError::LambdaOutOfRange { value: lambda, range: "[0, 1]" });
        }
    }
    if kind.is_randomized() {
        let alpha = alpha.ok_or(StrategyError::MissingAlpha(kind))?;
        if !(1.0..E).contains(&alpha) {
            return Err(StrategyError::AlphaOutOfRange(alpha));
        }
    }
    Ok(())
}

/// Inverse-CDF sampling of the density `1/alpha` on `[1, e)`.
pub fn sample_alpha(unit_uniform: f64) -> Result<f64, StrategyError> {
    if !(0.0..1.0).contains(&unit_uniform) {
        return Err(StrategyError::UniformOutOfRange(unit_uniform));
    }
    // e^u can round up to e for u just below 1.
    Ok(unit_uniform.exp().min(E.next_down()))
}

/// Writes `lambda = e^{-q-r}` with integer `q >= 0` and `r` in `(0, 1]`.
///
/// When `-ln lambda` is an integer `i` (up to rounding), the result is
/// `(i - 1, 1)`.
pub fn decompose_lambda(lambda: f64) -> Result<(u32, f64), StrategyError> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(StrategyError::LambdaOutOfRange { value: lambda, range: "(0, 1)" });
    }
    let x = -lambda.ln();
    let nearest = x.round();
    if nearest >= 1.0 && (x - nearest).abs() <= 1e-12 * x.max(1.0) {
        return Ok((nearest as u32 - 1, 1.0));
    }
    let q = x.ceil() - 1.0;
    Ok((q as u32, x - q))
}

/// Consistency of the randomized learning-augmented strategy.
pub fn chi(lambda: f64) -> f64 {
    if lambda < 1.0 / E {
        1.0 + lambda
    } else {
        (E + 1.0) * lambda - lambda.ln() - 1.0
    }
}

/// Proven `(consistency, robustness)` pair. Strategies without predictions
/// report their competitive ratio twice.
pub fn guarantee_bounds(kind: StrategyKind, lambda: Option<f64>) -> Result<(f64, f64), StrategyError> {
    let need_lambda = || -> Result<f64, StrategyError> {
        let l = lambda.ok_or(StrategyError::MissingLambda(kind))?;
        if !(0.0..=1.0).contains(&l) {
            return Err(StrategyError::LambdaOutOfRange { value: l, range: "[0, 1]" });
        }
        Ok(l)
    };
    Ok(match kind {
        StrategyKind::DetComp | StrategyKind::AnandDoubling => (4.0, 4.0),
        StrategyKind::RandComp => (E, E),
        StrategyKind::DetLa => {
            let l = need_lambda()?;
            let robust = if l == 0.0 { f64::INFINITY } else { 2.0 + 2.0 / l };
            ((1.0 + 2.0 * l).max(4.0 * l), robust)
        }
        StrategyKind::RandLa => {
            let l = need_lambda()?;
            if l == 0.0 {
                (1.0, f64::INFINITY)
            } else if l == 1.0 {
                (E, E)
            } else {
                (chi(l), l.exp() / l)
            }
        }
    })
}

/// Scaling and window of the randomized learning-augmented strategy.
///
/// Costs are viewed in units where `opt(prediction) = e^k` and
/// `lambda * e^k >= e`; a phase whose budget lands in `[window_lo, window_hi)`
/// appends the predicted optimum instead of its budget-best solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandLaSetup {
    pub k: i64,
    /// `None` for `lambda = 0`, where the window starts at zero.
    pub qr: Option<(u32, f64)>,
    /// Multiplier from instance units to phase-budget units.
    pub scale: f64,
    pub window_lo: f64,
    pub window_hi: f64,
}

impl RandLaSetup {
    /// Returns `None` for `lambda = 1`, which runs the competitive strategy unchanged.
    pub fn new(pred_opt: f64, lambda: f64) -> Result<Option<Self>, StrategyError> {
        if lambda == 1.0 {
            return Ok(None);
        }
        let k_pred = pred_opt.ln().ceil() as i64;
        let (k, qr) = if lambda == 0.0 {
            (k_pred, None)
        } else {
            let qr = decompose_lambda(lambda)?;
            (k_pred.max((1.0 - lambda.ln()).ceil() as i64), Some(qr))
        };
        let window_hi = (k as f64).exp();
        let window_lo = match qr {
            Some((q, r)) => (k as f64 - q as f64 - r).exp(),
            None => 0.0,
        };
        Ok(Some(RandLaSetup { k, qr, scale: window_hi / pred_opt, window_lo, window_hi }))
    }

    pub fn in_window(&self, scaled_budget: f64) -> bool {
        self.window_lo <= scaled_budget && scaled_budget < self.window_hi
    }
}

/// Where in its automaton a plan was when it emitted a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// Doubling iteration (1-based) of the deterministic plans.
    Iteration(u32),
    FirstIgnore(u32),
    Respect,
    SecondIgnore(u32),
    /// Randomized phase `i`, appending its budget-best solution.
    Phase(u32),
    /// Randomized phase `i`, appending the predicted optimum instead.
    PredictionPhase(u32),
    /// The predicted optimum appended up front (`lambda = 0`).
    PredictionFirst,
}

/// One emitted segment with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Step<D = Days> {
    pub segment: Segment<D>,
    pub stage: Stage,
    /// Budget handed to `b(.)`, in instance cost units.
    pub budget: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetLaPhase {
    FirstIgnore,
    Respect,
    SecondIgnore,
}

#[derive(Debug, Clone)]
struct DetLaState<D> {
    prediction: D,
    pred_opt: f64,
    threshold: f64,
    phase: DetLaPhase,
    iteration: u32,
    stop_iteration: Option<u32>,
}

#[derive(Debug, Clone)]
struct RandLaState<D> {
    alpha: f64,
    phase: u32,
    setup: RandLaSetup,
    prediction: D,
    appended: bool,
}

#[derive(Debug, Clone)]
enum State<D> {
    DetComp { iteration: u32 },
    DetLa(DetLaState<D>),
    RandComp { alpha: f64, phase: u32 },
    RandLa(RandLaState<D>),
    Anand { iteration: u32 },
}

const MAX_PHASES: u32 = 100_000;

/// Progress of one strategy run: cumulative cost and coverage plus the
/// strategy-specific automaton state.
#[derive(Debug, Clone)]
pub struct Plan<D = Days> {
    state: State<D>,
    spent: f64,
    covered: D,
    emitted: usize,
    exhausted: bool,
}

impl Plan<Days> {
    /// Starts a plan for a concrete (normalized) instance.
    pub fn new(params: &StrategyParams, table: &mut OptTable) -> Result<Self, StrategyError> {
        params.validate()?;
        Plan::start(
            params.kind,
            params.prediction.map(Days::Finite),
            params.lambda,
            params.alpha,
            table,
        )
    }
}

impl<D: DayCount> Plan<D> {
    pub fn start<O>(
        kind: StrategyKind,
        prediction: Option<D>,
        lambda: Option<f64>,
        alpha: Option<f64>,
        oracle: &mut O,
    ) -> Result<Self, StrategyError>
    where
        O: OptOracle<Days = D>,
    {
        check_params(kind, prediction.is_some(), lambda, alpha)?;
        let state = match kind {
            StrategyKind::DetComp => State::DetComp { iteration: 0 },
            StrategyKind::AnandDoubling => State::Anand { iteration: 0 },
            StrategyKind::RandComp => State::RandComp { alpha: alpha.unwrap(), phase: 0 },
            StrategyKind::DetLa => {
                let prediction = prediction.unwrap();
                let lambda = lambda.unwrap();
                let pred_opt = oracle.opt_cost(&prediction);
                let threshold = lambda * pred_opt;
                let one = oracle.one_day();
                let phase = if oracle.opt_cost(&one) <= threshold {
                    DetLaPhase::FirstIgnore
                } else {
                    DetLaPhase::Respect
                };
                State::DetLa(DetLaState { prediction, pred_opt, threshold, phase, iteration: 0, stop_iteration: None })
            }
            StrategyKind::RandLa => {
                let prediction = prediction.unwrap();
                let alpha = alpha.unwrap();
                let pred_opt = oracle.opt_cost(&prediction);
                match RandLaSetup::new(pred_opt, lambda.unwrap())? {
                    None => State::RandComp { alpha, phase: 0 },
                    Some(setup) => State::RandLa(RandLaState { alpha, phase: 0, setup, prediction, appended: false }),
                }
            }
        };
        Ok(Plan { state, spent: 0.0, covered: oracle.zero_days(), emitted: 0, exhausted: false })
    }

    /// Total cost of all emitted segments.
    pub fn spent(&self) -> f64 {
        self.spent
    }

    /// Total days covered by all emitted segments.
    pub fn covered(&self) -> &D {
        &self.covered
    }

    pub fn emitted(&self) -> usize {
        self.emitted
    }

    pub fn is_exhausted(&self) -> bool {
        self.exhausted
    }

    /// Current phase of the deterministic learning-augmented automaton.
    pub fn det_la_phase(&self) -> Option<DetLaPhase> {
        match &self.state {
            State::DetLa(s) => Some(s.phase),
            _ => None,
        }
    }

    /// Iteration at which the first ignore phase stopped, once known.
    pub fn det_la_stop_iteration(&self) -> Option<u32> {
        match &self.state {
            State::DetLa(s) => s.stop_iteration,
            _ => None,
        }
    }

    pub fn rand_la_setup(&self) -> Option<&RandLaSetup> {
        match &self.state {
            State::RandLa(s) => Some(&s.setup),
            _ => None,
        }
    }

    /// Emits the next segment, or `None` once a segment with unbounded
    /// coverage has been emitted.
    pub fn next_segment<O>(&mut self, oracle: &mut O) -> Option<Step<D>>
    where
        O: OptOracle<Days = D>,
    {
        if self.exhausted {
            return None;
        }
        let spent = self.spent;
        let covered = self.covered.clone();
        let step = match &mut self.state {
            State::DetComp { iteration } => {
                *iteration += 1;
                doubling_step(oracle, *iteration, spent, Stage::Iteration(*iteration))
            }
            State::Anand { iteration } => {
                *iteration += 1;
                if *iteration == 1 {
                    let one = oracle.one_day();
                    Step { segment: oracle.opt_segment(&one), stage: Stage::Iteration(1), budget: None }
                } else {
                    let budget = 2.0 * oracle.opt_cost(&covered);
                    Step {
                        segment: oracle.best_within_budget(budget),
                        stage: Stage::Iteration(*iteration),
                        budget: Some(budget),
                    }
                }
            }
            State::DetLa(s) => det_la_step(s, oracle, spent),
            State::RandComp { alpha, phase } => {
                let alpha = *alpha;
                loop {
                    let i = *phase;
                    *phase += 1;
                    assert!(i < MAX_PHASES, "randomized plan made no progress");
                    let budget = alpha * (i as f64).exp();
                    let segment = oracle.best_within_budget(budget);
                    if !segment.is_empty() {
                        break Step { segment, stage: Stage::Phase(i), budget: Some(budget) };
                    }
                }
            }
            State::RandLa(s) => rand_la_step(s, oracle),
        };
        debug_assert!(!step.segment.is_empty());
        self.spent += step.segment.total_cost;
        self.covered = self.covered.plus(&step.segment.total_days);
        self.emitted += 1;
        if step.segment.total_days.is_unbounded() {
            self.exhausted = true;
        }
        if let State::DetLa(s) = &mut self.state {
            det_la_after(s, self.spent);
        }
        Some(step)
    }

    /// Iterator over the remaining segments.
    pub fn steps<'a, O>(&'a mut self, oracle: &'a mut O) -> Steps<'a, D, O>
    where
        O: OptOracle<Days = D>,
    {
        Steps { plan: self, oracle }
    }
}

fn doubling_step<O: OptOracle>(oracle: &mut O, iteration: u32, spent: f64, stage: Stage) -> Step<O::Days> {
    if iteration == 1 {
        let one = oracle.one_day();
        Step { segment: oracle.opt_segment(&one), stage, budget: None }
    } else {
        Step { segment: oracle.best_within_budget(spent), stage, budget: Some(spent) }
    }
}

fn det_la_step<O: OptOracle>(s: &mut DetLaState<O::Days>, oracle: &mut O, spent: f64) -> Step<O::Days> {
    match s.phase {
        DetLaPhase::FirstIgnore => {
            s.iteration += 1;
            doubling_step(oracle, s.iteration, spent, Stage::FirstIgnore(s.iteration))
        }
        DetLaPhase::Respect => Step { segment: oracle.opt_segment(&s.prediction), stage: Stage::Respect, budget: None },
        DetLaPhase::SecondIgnore => {
            s.iteration += 1;
            Step {
                segment: oracle.best_within_budget(spent),
                stage: Stage::SecondIgnore(s.iteration),
                budget: Some(spent),
            }
        }
    }
}

/// Phase transitions once the cumulative cost of the emitted segment is known.
fn det_la_after<D>(s: &mut DetLaState<D>, spent: f64) {
    match s.phase {
        DetLaPhase::FirstIgnore => {
            if spent > s.threshold {
                s.stop_iteration = Some(s.iteration);
                s.iteration = 0;
                s.phase = if spent <= s.pred_opt { DetLaPhase::Respect } else { DetLaPhase::SecondIgnore };
            }
        }
        DetLaPhase::Respect => {
            s.iteration = 0;
            s.phase = DetLaPhase::SecondIgnore;
        }
        DetLaPhase::SecondIgnore => {}
    }
}

fn rand_la_step<O: OptOracle>(s: &mut RandLaState<O::Days>, oracle: &mut O) -> Step<O::Days> {
    if s.setup.qr.is_none() && !s.appended {
        s.appended = true;
        return Step { segment: oracle.opt_segment(&s.prediction), stage: Stage::PredictionFirst, budget: None };
    }
    loop {
        let i = s.phase;
        s.phase += 1;
        assert!(i < MAX_PHASES, "randomized plan made no progress");
        let scaled = s.alpha * (i as f64).exp();
        if s.setup.in_window(scaled) {
            if !s.appended {
                s.appended = true;
                return Step {
                    segment: oracle.opt_segment(&s.prediction),
                    stage: Stage::PredictionPhase(i),
                    budget: None,
                };
            }
            continue;
        }
        let budget = scaled / s.setup.scale;
        let segment = oracle.best_within_budget(budget);
        if !segment.is_empty() {
            return Step { segment, stage: Stage::Phase(i), budget: Some(budget) };
        }
    }
}

pub struct Steps<'a, D, O> {
    plan: &'a mut Plan<D>,
    oracle: &'a mut O,
}

impl<D: DayCount, O: OptOracle<Days = D>> Iterator for Steps<'_, D, O> {
    type Item = Step<D>;

    fn next(&mut self) -> Option<Step<D>> {
        self.plan.next_segment(self.oracle)
    }
}
