//! Running strategies against a horizon.
//!
//! Purchases are made lazily: a segment's options are bought one at a time,
//! longest first, and only when the next skiing day is not yet covered. The
//! sequence of purchases never depends on the horizon, so one pass over a
//! plan yields the cost for every horizon up to some maximum.

use std::f64::consts::E;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::rental::{Days, OptTable, RentalInstance, RentalOption, Segment};
use crate::strategies::{sample_alpha, Plan, RandLaSetup, StrategyError, StrategyKind, StrategyParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurchaseEvent {
    pub day: u64,
    pub option: usize,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub horizon: u64,
    pub events: Vec<PurchaseEvent>,
    pub total_cost: f64,
    /// Full cost of every segment the plan had to emit.
    pub eager_cost: f64,
    pub opt_cost: f64,
    pub ratio: f64,
}

impl RunTrace {
    pub fn covered_days(&self, options: &[RentalOption]) -> Days {
        self.events
            .iter()
            .fold(Days::ZERO, |acc, e| acc.saturating_add(options[e.option].duration))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    /// `ratios[t - 1]` is the ratio at horizon `t`.
    pub ratios: Vec<f64>,
    pub worst_ratio: f64,
    pub argmax_t: u64,
}

impl SweepReport {
    fn from_ratios(ratios: Vec<f64>) -> Self {
        let mut worst_ratio = f64::NEG_INFINITY;
        let mut argmax_t = 1;
        for (i, &r) in ratios.iter().enumerate() {
            if r > worst_ratio {
                worst_ratio = r;
                argmax_t = i as u64 + 1;
            }
        }
        SweepReport { ratios, worst_ratio, argmax_t }
    }
}

/// Lazy and eager cost for every horizon `1..=t_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostCurve {
    pub lazy: Vec<f64>,
    pub eager: Vec<f64>,
}

/// Mean and standard error of a sampled expectation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
}

/// Options of a segment in purchase order: longest first, ties by index.
pub fn purchase_order(options: &[RentalOption], segment: &Segment) -> Vec<(usize, u64)> {
    let mut order = segment.purchases.clone();
    order.sort_by(|a, b| options[b.0].duration.cmp(&options[a.0].duration).then(a.0.cmp(&b.0)));
    order
}

/// A strategy runner over the working copy of an instance.
///
/// Instances with `opt(1) < 1` are normalized first; reported costs are
/// converted back to the units of the instance that was passed in.
#[derive(Debug, Clone)]
pub struct Evaluator {
    instance: RentalInstance,
    table: OptTable,
    unit: f64,
}

impl Evaluator {
    pub fn new(instance: &RentalInstance) -> Self {
        let (working, unit) = if instance.is_normalized() {
            (instance.clone(), 1.0)
        } else {
            (instance.normalize(), instance.opt_one())
        };
        let table = OptTable::new(&working);
        Evaluator { instance: working, table, unit }
    }

    /// The instance the strategies actually see.
    pub fn working_instance(&self) -> &RentalInstance {
        &self.instance
    }

    pub fn table(&mut self) -> &mut OptTable {
        &mut self.table
    }

    /// Offline optimum in caller units.
    pub fn opt(&mut self, t: u64) -> f64 {
        self.table.opt_cost(t) * self.unit
    }

    pub fn run(&mut self, params: &StrategyParams, horizon: u64) -> Result<RunTrace, StrategyError> {
        assert!(horizon >= 1, "horizon must be at least one day");
        let mut plan = Plan::new(params, &mut self.table)?;
        let options = self.table.options().to_vec();
        let mut events = Vec::new();
        let mut covered = 0u64;
        let mut total = 0.0;
        'outer: while covered < horizon {
            let step = plan
                .next_segment(&mut self.table)
                .expect("plan ended before covering the horizon");
            for (option, count) in purchase_order(&options, &step.segment) {
                for _ in 0..count {
                    if covered >= horizon {
                        break 'outer;
                    }
                    let o = options[option];
                    events.push(PurchaseEvent { day: covered + 1, option, cost: o.cost * self.unit });
                    total += o.cost;
                    covered = match o.duration {
                        Days::Finite(d) => covered.saturating_add(d),
                        Days::Infinite => u64::MAX,
                    };
                }
            }
        }
        let opt = self.table.opt_cost(horizon);
        Ok(RunTrace {
            horizon,
            events,
            total_cost: total * self.unit,
            eager_cost: plan.spent() * self.unit,
            opt_cost: opt * self.unit,
            ratio: total / opt,
        })
    }

    /// Lazy and eager cost for all horizons `1..=t_max`, in working units.
    fn working_curve(&mut self, params: &StrategyParams, t_max: u64) -> Result<CostCurve, StrategyError> {
        cost_curve(&mut self.table, params, t_max)
    }

    pub fn cost_curve(&mut self, params: &StrategyParams, t_max: u64) -> Result<CostCurve, StrategyError> {
        let mut curve = self.working_curve(params, t_max)?;
        for v in curve.lazy.iter_mut().chain(curve.eager.iter_mut()) {
            *v *= self.unit;
        }
        Ok(curve)
    }

    pub fn opt_curve(&mut self, t_max: u64) -> Vec<f64> {
        self.table.ensure(t_max);
        self.table.costs()[1..=t_max as usize].to_vec()
    }

    pub fn sweep(&mut self, params: &StrategyParams, t_max: u64) -> Result<SweepReport, StrategyError> {
        let curve = self.working_curve(params, t_max)?;
        let opt = self.opt_curve(t_max);
        Ok(SweepReport::from_ratios(curve.lazy.iter().zip(&opt).map(|(a, o)| a / o).collect()))
    }

    /// Exact expected lazy cost over `alpha` for every horizon `1..=t_max`.
    pub fn exact_expected_curve(&mut self, params: &StrategyParams, t_max: u64) -> Result<Vec<f64>, StrategyError> {
        let intervals = alpha_intervals(&mut self.table, params, t_max)?;
        let mut expected = vec![0.0; t_max as usize];
        for iv in &intervals {
            let curve = cost_curve(&mut self.table, &params.with_alpha(iv.representative()), t_max)?;
            let w = iv.weight();
            for (e, c) in expected.iter_mut().zip(&curve.lazy) {
                *e += w * c;
            }
        }
        for e in expected.iter_mut() {
            *e *= self.unit;
        }
        Ok(expected)
    }

    pub fn exact_expected_cost(&mut self, params: &StrategyParams, horizon: u64) -> Result<f64, StrategyError> {
        Ok(*self.exact_expected_curve(params, horizon)?.last().unwrap())
    }

    /// Constant-cost pieces of the expectation integral at one horizon.
    pub fn alpha_intervals(&mut self, params: &StrategyParams, t_max: u64) -> Result<Vec<AlphaInterval>, StrategyError> {
        alpha_intervals(&mut self.table, params, t_max)
    }

    /// Seeded Monte Carlo estimate of the expected lazy cost.
    ///
    /// Samples are drawn in fixed-size blocks, each with its own ChaCha8
    /// stream, so the result does not depend on the number of threads.
    pub fn monte_carlo(
        &mut self,
        params: &StrategyParams,
        horizon: u64,
        samples: u64,
        seed: u64,
    ) -> Result<Estimate, StrategyError> {
        assert!(samples >= 1, "need at least one sample");
        if !params.kind.is_randomized() {
            return Err(StrategyError::MissingAlpha(params.kind));
        }
        params.with_alpha(1.0).validate()?;
        // Grow the table once so that workers never need to.
        self.table.ensure(horizon.saturating_mul(8).max(64));
        let blocks = samples.div_ceil(MC_BLOCK);
        let stats: Vec<Welford> = (0..blocks)
            .into_par_iter()
            .map_init(
                || self.table.clone(),
                |table, block| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(block);
                    let n = MC_BLOCK.min(samples - block * MC_BLOCK);
                    let mut acc = Welford::default();
                    for _ in 0..n {
                        let alpha = sample_alpha(rng.random::<f64>()).unwrap();
                        let cost = lazy_cost(table, &params.with_alpha(alpha), horizon);
                        acc.push(cost);
                    }
                    acc
                },
            )
            .collect();
        let total = stats.into_iter().fold(Welford::default(), Welford::merge);
        Ok(Estimate { mean: total.mean * self.unit, std_error: total.std_error() * self.unit, samples })
    }
}

const MC_BLOCK: u64 = 4096;

/// Running mean and squared deviation, mergeable across blocks.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(self, other: Welford) -> Welford {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let n = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / n as f64;
        let m2 = self.m2 + other.m2 + delta * delta * (self.count as f64 * other.count as f64) / n as f64;
        Welford { count: n, mean, m2 }
    }

    /// Sample standard deviation (zero for fewer than two values).
    pub fn std_dev(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).sqrt()
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.std_dev() / (self.count as f64).sqrt()
        }
    }
}

fn lazy_cost(table: &mut OptTable, params: &StrategyParams, horizon: u64) -> f64 {
    let mut plan = Plan::new(params, table).expect("validated parameters");
    let options = table.options().to_vec();
    let mut covered = 0u64;
    let mut total = 0.0;
    while covered < horizon {
        let step = plan.next_segment(table).expect("plan ended before covering the horizon");
        for (option, count) in purchase_order(&options, &step.segment) {
            let o = options[option];
            match o.duration {
                Days::Infinite => return total + o.cost,
                Days::Finite(d) => {
                    let needed = (horizon - covered).div_ceil(d);
                    let bought = needed.min(count);
                    total += o.cost * bought as f64;
                    covered = covered.saturating_add(d.saturating_mul(bought));
                    if covered >= horizon {
                        return total;
                    }
                }
            }
        }
    }
    total
}

/// Lazy and eager cost of a plan for every horizon `1..=t_max`.
pub fn cost_curve(table: &mut OptTable, params: &StrategyParams, t_max: u64) -> Result<CostCurve, StrategyError> {
    assert!(t_max >= 1, "horizon must be at least one day");
    let mut plan = Plan::new(params, table)?;
    let options = table.options().to_vec();
    let n = t_max as usize;
    let mut lazy = Vec::with_capacity(n);
    let mut eager = Vec::with_capacity(n);
    let mut total = 0.0;
    while lazy.len() < n {
        let step = plan.next_segment(table).expect("plan ended before covering the horizon");
        let spent = plan.spent();
        for (option, count) in purchase_order(&options, &step.segment) {
            let o = options[option];
            for _ in 0..count {
                if lazy.len() >= n {
                    break;
                }
                total += o.cost;
                let span = match o.duration {
                    Days::Finite(d) => d.min((n - lazy.len()) as u64) as usize,
                    Days::Infinite => n - lazy.len(),
                };
                lazy.extend(std::iter::repeat_n(total, span));
                eager.extend(std::iter::repeat_n(spent, span));
            }
        }
    }
    Ok(CostCurve { lazy, eager })
}

/// A piece `[lo, hi)` of the range of `alpha` on which the whole purchase
/// sequence is fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaInterval {
    pub lo: f64,
    pub hi: f64,
}

impl AlphaInterval {
    /// Probability mass under the density `1/alpha`.
    pub fn weight(&self) -> f64 {
        self.hi.ln() - self.lo.ln()
    }

    /// Geometric midpoint, away from both boundaries.
    pub fn representative(&self) -> f64 {
        (self.lo * self.hi).sqrt()
    }
}

fn alpha_intervals(table: &mut OptTable, params: &StrategyParams, t_max: u64) -> Result<Vec<AlphaInterval>, StrategyError> {
    if !params.kind.is_randomized() {
        return Err(StrategyError::UnknownStrategy(format!(
            "{} has no random choice to integrate over",
            params.kind
        )));
    }
    params.with_alpha(1.0).validate()?;
    // Budgets reach b(.) as alpha * e^i / scale; the window compares alpha * e^i.
    let setup = match (params.kind, params.prediction, params.lambda) {
        (StrategyKind::RandLa, Some(p), Some(l)) => RandLaSetup::new(table.opt_cost(p), l)?,
        _ => None,
    };
    let scale = setup.map_or(1.0, |s| s.scale);
    let window_hi = setup.map_or(0.0, |s| s.window_hi);
    let top = (table.opt_cost(t_max) * scale).max(window_hi).max(1.0);
    let last_phase = top.ln().ceil().max(0.0) as i32;
    let budget_cap = ((last_phase + 1) as f64).exp() / scale;

    let mut thresholds: Vec<f64> = Vec::new();
    // Budgets at or above the cheapest unbounded option never consult opt(t).
    let cap = match table.cheapest_infinite() {
        Some(c) if c <= budget_cap => c.next_down(),
        _ => budget_cap,
    };
    let reach = table.max_days_within(cap);
    table.ensure(reach + 1);
    thresholds.extend_from_slice(&table.costs()[1..=(reach + 1) as usize]);
    if let Some(c) = table.cheapest_infinite() {
        thresholds.push(c);
    }
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();

    let mut points = vec![1.0, E];
    for i in 0..=last_phase {
        let step = (i as f64).exp();
        for &v in &thresholds {
            points.push(v * scale / step);
        }
        if let Some(s) = setup {
            points.push(s.window_lo / step);
            points.push(s.window_hi / step);
        }
    }
    points.retain(|&a| (1.0..=E).contains(&a));
    points.sort_by(f64::total_cmp);
    points.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
    Ok(points
        .windows(2)
        .map(|w| AlphaInterval { lo: w[0], hi: w[1] })
        .filter(|iv| iv.hi > iv.lo)
        .collect())
}

pub fn run_once(instance: &RentalInstance, params: &StrategyParams, horizon: u64) -> Result<RunTrace, StrategyError> {
    Evaluator::new(instance).run(params, horizon)
}

pub fn sweep(instance: &RentalInstance, params: &StrategyParams, t_max: u64) -> Result<SweepReport, StrategyError> {
    Evaluator::new(instance).sweep(params, t_max)
}

pub fn exact_expected_cost(instance: &RentalInstance, params: &StrategyParams, horizon: u64) -> Result<f64, StrategyError> {
    Evaluator::new(instance).exact_expected_cost(params, horizon)
}

pub fn monte_carlo_expected_cost(
    instance: &RentalInstance,
    params: &StrategyParams,
    horizon: u64,
    samples: u64,
    seed: u64,
) -> Result<Estimate, StrategyError> {
    Evaluator::new(instance).monte_carlo(params, horizon, samples, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn rb() -> RentalInstance {
        RentalInstance::rent_or_buy(4.0).unwrap()
    }

    #[test]
    fn det_comp_rent_or_buy_runs() {
        let t = run_once(&rb(), &StrategyParams::det_comp(), 5).unwrap();
        assert_eq!(t.total_cost, 8.0);
        assert_eq!(t.opt_cost, 4.0);
        assert_eq!(t.ratio, 2.0);
        let opts: Vec<usize> = t.events.iter().map(|e| e.option).collect();
        assert_eq!(opts, vec![0, 0, 0, 0, 1]);
        assert_eq!(t.eager_cost, 8.0);

        let t = run_once(&rb(), &StrategyParams::det_comp(), 3).unwrap();
        assert_eq!(t.total_cost, 3.0);
        assert_eq!(t.ratio, 1.0);
        assert_eq!(t.eager_cost, 4.0);
    }

    #[test]
    fn first_day_costs_first_purchase() {
        for params in [
            StrategyParams::det_comp(),
            StrategyParams::anand(),
            StrategyParams::det_la(5, 0.0),
            StrategyParams::rand_comp(2.0),
        ] {
            let t = run_once(&rb(), &params, 1).unwrap();
            assert_eq!(t.events.len(), 1);
            assert_eq!(t.total_cost, t.events[0].cost);
        }
    }

    #[test]
    fn sweep_rent_or_buy() {
        let r = sweep(&rb(), &StrategyParams::det_comp(), 10).unwrap();
        assert_eq!(r.ratios, vec![1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0]);
        assert_eq!(r.worst_ratio, 2.0);
        assert_eq!(r.argmax_t, 5);
    }

    #[test]
    fn sweep_single_rent() {
        let inst = RentalInstance::new(vec![RentalOption::finite(1, 1.0)]).unwrap();
        let r = sweep(&inst, &StrategyParams::det_comp(), 200).unwrap();
        assert_eq!(r.worst_ratio, 1.0);
    }

    #[test]
    fn curve_matches_individual_runs() {
        let inst = RentalInstance::new(vec![
            RentalOption::finite(1, 1.0),
            RentalOption::finite(3, 2.5),
            RentalOption::finite(10, 6.0),
            RentalOption::buy(30.0),
        ])
        .unwrap();
        let params = StrategyParams::rand_la(17, 0.3, 1.7);
        let mut ev = Evaluator::new(&inst);
        let curve = ev.cost_curve(&params, 80).unwrap();
        for t in 1..=80 {
            let trace = ev.run(&params, t).unwrap();
            assert_eq!(curve.lazy[t as usize - 1], trace.total_cost, "T={t}");
            assert_eq!(curve.eager[t as usize - 1], trace.eager_cost, "T={t}");
        }
    }

    #[test]
    fn exact_rent_or_buy_two_days() {
        let mut ev = Evaluator::new(&rb());
        let intervals = ev.alpha_intervals(&StrategyParams::rand_comp(1.0), 2).unwrap();
        // Merge neighbouring pieces with equal cost at T = 2.
        let mut pieces: Vec<(f64, f64, f64)> = Vec::new();
        for iv in &intervals {
            let c = run_once(&rb(), &StrategyParams::rand_comp(iv.representative()), 2).unwrap().total_cost;
            match pieces.last_mut() {
                Some(last) if last.2 == c => last.1 = iv.hi,
                _ => pieces.push((iv.lo, iv.hi, c)),
            }
        }
        assert_eq!(pieces.len(), 3);
        assert!((pieces[0].1 - 4.0 / E).abs() < 1e-15);
        assert!((pieces[1].1 - 2.0).abs() < 1e-15);
        assert_eq!(pieces.iter().map(|p| p.2).collect::<Vec<_>>(), vec![2.0, 5.0, 2.0]);
        let by_hand = 2.0 * (4.0 / E).ln() + 5.0 * (1.0 - 2f64.ln()) + 2.0 * (1.0 - 2f64.ln());
        let e = ev.exact_expected_cost(&StrategyParams::rand_comp(1.0), 2).unwrap();
        assert!((e - by_hand).abs() < 1e-12);
        assert!((e - 2.920559).abs() < 1e-6);
    }

    #[test]
    fn rand_comp_within_e_on_rent_or_buy() {
        let mut ev = Evaluator::new(&rb());
        let params = StrategyParams::rand_comp(1.0);
        let expected = ev.exact_expected_curve(&params, 100).unwrap();
        for (t, e) in expected.iter().enumerate() {
            let opt = ev.opt(t as u64 + 1);
            assert!(*e <= E * opt + 1e-9, "T={} E={e} opt={opt}", t + 1);
        }
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let params = StrategyParams::rand_comp(1.0);
        let a = monte_carlo_expected_cost(&rb(), &params, 2, 10_000, 7).unwrap();
        let b = monte_carlo_expected_cost(&rb(), &params, 2, 10_000, 7).unwrap();
        assert_eq!(a, b);
        let one = monte_carlo_expected_cost(&rb(), &params, 9, 1, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        rng.set_stream(0);
        let alpha = sample_alpha(rng.random::<f64>()).unwrap();
        let run = run_once(&rb(), &params.with_alpha(alpha), 9).unwrap();
        assert_eq!(one.mean, run.total_cost);
        assert_eq!(one.std_error, 0.0);
    }

    #[test]
    fn monte_carlo_agrees_with_exact() {
        let params = StrategyParams::rand_comp(1.0);
        let mc = monte_carlo_expected_cost(&rb(), &params, 2, 200_000, 11).unwrap();
        assert!((mc.mean - 2.920559).abs() <= 3.0 * mc.std_error, "{mc:?}");
    }

    #[test]
    fn welford_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..100).map(|i| ((i * 37) % 11) as f64 * 0.5).collect();
        let mut all = Welford::default();
        xs.iter().for_each(|&x| all.push(x));
        let (left, right) = xs.split_at(37);
        let mut a = Welford::default();
        let mut b = Welford::default();
        left.iter().for_each(|&x| a.push(x));
        right.iter().for_each(|&x| b.push(x));
        let merged = a.merge(b);
        assert_eq!(merged.count, all.count);
        assert!((merged.mean - all.mean).abs() < 1e-12);
        assert!((merged.m2 - all.m2).abs() < 1e-9);
    }

    #[test]
    fn unnormalized_input_reports_original_units() {
        let inst = RentalInstance::new(vec![RentalOption::finite(1, 0.5), RentalOption::buy(2.0)]).unwrap();
        let t = run_once(&inst, &StrategyParams::det_comp(), 5).unwrap();
        assert_eq!(t.total_cost, 4.0);
        assert_eq!(t.opt_cost, 2.0);
        assert_eq!(t.ratio, 2.0);
    }

    fn small_instance() -> impl Strategy<Value = RentalInstance> {
        (prop::collection::vec((1u64..20, 1.0f64..30.0), 1..5), prop::option::of(5.0f64..200.0)).prop_map(
            |(finite, buy)| {
                let mut options: Vec<RentalOption> =
                    finite.into_iter().map(|(d, c)| RentalOption::finite(d, c)).collect();
                if let Some(b) = buy {
                    options.push(RentalOption::buy(b));
                }
                RentalInstance::new(options).unwrap()
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn traces_cover_and_stay_below_eager(inst in small_instance(), t in 1u64..200, u in 0.0f64..1.0) {
            let alpha = sample_alpha(u).unwrap();
            for params in [
                StrategyParams::det_comp(),
                StrategyParams::anand(),
                StrategyParams::det_la(t / 2 + 1, 0.4),
                StrategyParams::rand_comp(alpha),
                StrategyParams::rand_la(t + 3, 0.2, alpha),
            ] {
                let trace = run_once(&inst, &params, t).unwrap();
                prop_assert!(trace.covered_days(inst.options()) >= Days::Finite(t));
                prop_assert!(trace.total_cost <= trace.eager_cost + 1e-9);
                prop_assert!(trace.events.windows(2).all(|w| w[0].day <= w[1].day));
            }
        }

        #[test]
        fn interval_weights_sum_to_one(inst in small_instance(), t in 1u64..120, p in 1u64..120, l in 0.0f64..=1.0) {
            let mut ev = Evaluator::new(&inst);
            for params in [StrategyParams::rand_comp(1.0), StrategyParams::rand_la(p, l, 1.0)] {
                let ivs = ev.alpha_intervals(&params, t).unwrap();
                let total: f64 = ivs.iter().map(AlphaInterval::weight).sum();
                prop_assert!((total - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn det_comp_four_competitive(inst in small_instance()) {
            let r = sweep(&inst, &StrategyParams::det_comp(), 300).unwrap();
            prop_assert!(r.worst_ratio <= 4.0 + 1e-9);
        }
    }
}
