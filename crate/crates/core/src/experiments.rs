//! Synthetic experiment grid: random instances, noisy predictions, and the
//! average ratio of each strategy per `(lambda, sigma)` cell.

use std::fmt;
use std::io::{self, Write};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use thiserror::Error;

use crate::harness::{Evaluator, Welford};
use crate::rental::{RentalInstance, RentalOption};
use crate::strategies::{sample_alpha, StrategyError, StrategyParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no records to summarize")]
    Empty,
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

/// Strategies compared in the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExperimentStrategy {
    DetLa,
    RandLa,
    AnandDoubling,
}

impl ExperimentStrategy {
    pub const ALL: [ExperimentStrategy; 3] =
        [ExperimentStrategy::DetLa, ExperimentStrategy::RandLa, ExperimentStrategy::AnandDoubling];

    pub fn label(self) -> &'static str {
        match self {
            ExperimentStrategy::DetLa => "det-la",
            ExperimentStrategy::RandLa => "rand-la",
            // Not the learning-augmented algorithm of Anand et al.; only its
            // prediction-free doubling scheme.
            ExperimentStrategy::AnandDoubling => "anand-doubling-baseline",
        }
    }
}

impl fmt::Display for ExperimentStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_options: usize,
    pub d_max: u64,
    pub t_max_multiplier: u64,
    pub lambdas: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub trials: u32,
    pub strategies: Vec<ExperimentStrategy>,
    pub master_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_options: 15,
            d_max: 50,
            t_max_multiplier: 10,
            lambdas: vec![0.1, 0.3, 0.5, 0.7],
            sigmas: (0..=50).map(f64::from).collect(),
            trials: 10_000,
            strategies: ExperimentStrategy::ALL.to_vec(),
            master_seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn t_max(&self) -> u64 {
        self.t_max_multiplier * self.d_max
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.n_options == 0 || self.n_options as u64 > self.d_max {
            return bad(format!("need 1 <= n_options <= d_max, got {} and {}", self.n_options, self.d_max));
        }
        if self.t_max_multiplier == 0 {
            return bad("t_max_multiplier must be positive".into());
        }
        if let Some(l) = self.lambdas.iter().find(|l| !(0.0..=1.0).contains(*l)) {
            return bad(format!("lambda {l} outside [0, 1]"));
        }
        if let Some(s) = self.sigmas.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
            return bad(format!("sigma {s} must be nonnegative"));
        }
        if self.lambdas.is_empty() || self.sigmas.is_empty() || self.strategies.is_empty() {
            return bad("lambdas, sigmas and strategies must be nonempty".into());
        }
        if self.lambdas.len() > 1 << 16 || self.sigmas.len() > 1 << 16 {
            return bad("at most 65536 lambdas and sigmas".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub lambda: f64,
    pub sigma: f64,
    pub strategy: ExperimentStrategy,
    pub trial: u32,
    pub horizon: u64,
    pub prediction: u64,
    pub alg_cost: f64,
    pub opt_cost: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub lambda: f64,
    pub sigma: f64,
    pub strategy: ExperimentStrategy,
    pub mean_ratio: f64,
    pub std_error: f64,
    pub trials: u64,
}

/// Makes costs nondecreasing: whenever `r_i d_i` falls below the previous
/// cost, `r_i..r_n` are scaled up to meet it and shifted by `1e-4`.
pub fn repair_costs(durations: &[u64], ratios: &[f64]) -> Vec<f64> {
    repair(durations, ratios).1
}

/// Repaired ratios, costs, and the indices where a repair fired.
fn repair(durations: &[u64], ratios: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<usize>) {
    assert_eq!(durations.len(), ratios.len());
    let mut r = ratios.to_vec();
    let mut costs: Vec<f64> = Vec::with_capacity(r.len());
    let mut fired = Vec::new();
    for i in 0..r.len() {
        let d = durations[i] as f64;
        if let Some(&prev) = costs.last() {
            if r[i] * d < prev {
                let factor = prev / (r[i] * d);
                for x in &mut r[i..] {
                    *x = *x * factor + 1e-4;
                }
                fired.push(i);
            }
        }
        costs.push(r[i] * d);
    }
    (r, costs, fired)
}

/// `n` distinct sorted durations from `1..=d_max` and repaired costs.
pub fn gen_instance<R: Rng + ?Sized>(rng: &mut R, n: usize, d_max: u64) -> RentalInstance {
    let mut durations: Vec<u64> = sample(rng, d_max as usize, n).into_iter().map(|i| i as u64 + 1).collect();
    durations.sort_unstable();
    let mut ratios: Vec<f64> = (0..n)
        .map(|_| loop {
            // Open interval (0, 1).
            let u: f64 = rng.random();
            if u > 0.0 {
                break u;
            }
        })
        .collect();
    ratios.sort_by(f64::total_cmp);
    let costs = repair_costs(&durations, &ratios);
    let options = durations.iter().zip(costs).map(|(&d, c)| RentalOption::finite(d, c)).collect();
    RentalInstance::new(options).expect("generated options are valid")
}

/// `max(round_half_up(t + eta), 1)`.
pub fn noisy_prediction(t: u64, eta: f64) -> u64 {
    let rounded = (t as f64 + eta + 0.5).floor();
    if rounded < 1.0 {
        1
    } else {
        rounded as u64
    }
}

/// Uniform `T` in `1..=t_max` and its noisy prediction.
pub fn gen_t_and_prediction<R: Rng + ?Sized>(rng: &mut R, sigma: f64, t_max: u64) -> (u64, u64) {
    let t = rng.random_range(1..=t_max);
    let eta = if sigma == 0.0 {
        0.0
    } else {
        Normal::new(0.0, sigma).expect("sigma is finite and positive").sample(rng)
    };
    (t, noisy_prediction(t, eta))
}

/// Random stream for one trial: keyed by lambda index, sigma index and trial.
pub fn trial_rng(master_seed: u64, lambda_index: usize, sigma_index: usize, trial: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(((lambda_index as u64) << 48) | ((sigma_index as u64) << 32) | u64::from(trial));
    rng
}

/// One trial of one cell: a fresh instance, horizon and prediction, then every
/// selected strategy. Recomputable in isolation.
pub fn run_trial(
    config: &ExperimentConfig,
    lambda_index: usize,
    sigma_index: usize,
    trial: u32,
) -> Result<Vec<TrialRecord>, ExperimentError> {
    let lambda = config.lambdas[lambda_index];
    let sigma = config.sigmas[sigma_index];
    let mut rng = trial_rng(config.master_seed, lambda_index, sigma_index, trial);
    let instance = gen_instance(&mut rng, config.n_options, config.d_max);
    let (horizon, prediction) = gen_t_and_prediction(&mut rng, sigma, config.t_max());
    let alpha = sample_alpha(rng.random::<f64>())?;
    let mut eval = Evaluator::new(&instance);
    config
        .strategies
        .iter()
        .map(|&strategy| {
            let params = match strategy {
                ExperimentStrategy::DetLa => StrategyParams::det_la(prediction, lambda),
                ExperimentStrategy::RandLa => StrategyParams::rand_la(prediction, lambda, alpha),
                ExperimentStrategy::AnandDoubling => StrategyParams::anand(),
            };
            let run = eval.run(&params, horizon)?;
            Ok(TrialRecord {
                lambda,
                sigma,
                strategy,
                trial,
                horizon,
                prediction,
                alg_cost: run.total_cost,
                opt_cost: run.opt_cost,
                ratio: run.ratio,
            })
        })
        .collect()
}

/// Every trial of every cell, ordered by lambda, sigma, trial, strategy.
/// The output does not depend on the number of worker threads.
pub fn run_grid(config: &ExperimentConfig) -> Result<Vec<TrialRecord>, ExperimentError> {
    config.validate()?;
    let (nl, ns, nt) = (config.lambdas.len(), config.sigmas.len(), config.trials as usize);
    let chunks: Vec<Vec<TrialRecord>> = (0..nl * ns * nt)
        .into_par_iter()
        .map(|k| run_trial(config, k / (ns * nt), (k / nt) % ns, (k % nt) as u32))
        .collect::<Result<_, _>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Mean ratio and standard error per `(lambda, sigma, strategy)`, in order
/// of first appearance.
pub fn summarize(records: &[TrialRecord]) -> Result<Vec<SummaryRow>, ExperimentError> {
    if records.is_empty() {
        return Err(ExperimentError::Empty);
    }
    let mut cells: Vec<((f64, f64, ExperimentStrategy), Welford)> = Vec::new();
    for r in records {
        let key = (r.lambda, r.sigma, r.strategy);
        match cells.iter_mut().find(|(k, _)| *k == key) {
            Some((_, acc)) => acc.push(r.ratio),
            None => {
                let mut acc = Welford::default();
                acc.push(r.ratio);
                cells.push((key, acc));
            }
        }
    }
    Ok(cells
        .into_iter()
        .map(|((lambda, sigma, strategy), acc)| SummaryRow {
            lambda,
            sigma,
            strategy,
            mean_ratio: acc.mean,
            std_error: acc.std_error(),
            trials: acc.count,
        })
        .collect())
}

pub const RECORD_HEADER: &str = "lambda,sigma,strategy,trial,T,That,alg_cost,opt_cost,ratio";
pub const SUMMARY_HEADER: &str = "lambda,sigma,strategy,mean_ratio,stderr,trials";
const COST_NOTE: &str = "# costs are charged lazily: an option is paid when the day it starts is reached";

pub fn write_records_csv<W: Write>(records: &[TrialRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "{COST_NOTE}")?;
    writeln!(out, "{RECORD_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.lambda, r.sigma, r.strategy, r.trial, r.horizon, r.prediction, r.alg_cost, r.opt_cost, r.ratio
        )?;
    }
    Ok(())
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{COST_NOTE}")?;
    writeln!(out, "{SUMMARY_HEADER}")?;
    for r in rows {
        writeln!(out, "{},{},{},{},{},{}", r.lambda, r.sigma, r.strategy, r.mean_ratio, r.std_error, r.trials)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rental::Days;
    use proptest::prelude::*;

    fn small(trials: u32) -> ExperimentConfig {
        ExperimentConfig { lambdas: vec![0.3], sigmas: vec![0.0], trials, ..Default::default() }
    }

    #[test]
    fn repair_example() {
        let costs = repair_costs(&[4, 10], &[0.5, 0.15]);
        assert_eq!(costs[0], 2.0);
        assert!((costs[1] - 2.001).abs() < 1e-12);
        let costs = repair_costs(&[1, 2, 3], &[0.5, 0.6, 0.7]);
        assert_eq!(costs, vec![0.5, 1.2, 0.7 * 3.0]);
    }

    #[test]
    fn generated_instances_are_well_formed() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let inst = gen_instance(&mut rng, 15, 50);
            let opts = inst.options();
            assert_eq!(opts.len(), 15);
            for w in opts.windows(2) {
                assert!(w[0].duration < w[1].duration);
                assert!(w[0].cost <= w[1].cost);
            }
            assert!(opts.iter().all(|o| matches!(o.duration, Days::Finite(d) if (1..=50).contains(&d))));
        }
    }

    #[test]
    fn prediction_rounding() {
        assert_eq!(noisy_prediction(10, -12.4), 1);
        assert_eq!(noisy_prediction(3, 0.5), 4);
        assert_eq!(noisy_prediction(3, -0.5), 3);
        assert_eq!(noisy_prediction(137, 0.0), 137);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let (t, p) = gen_t_and_prediction(&mut rng, 0.0, 500);
            assert_eq!(t, p);
            assert!((1..=500).contains(&t));
        }
    }

    #[test]
    fn grid_counts_and_determinism() {
        let records = run_grid(&small(1)).unwrap();
        assert_eq!(records.len(), 3);
        assert!(records.iter().all(|r| r.horizon == r.prediction));
        let cfg = ExperimentConfig { lambdas: vec![0.1, 0.5], sigmas: vec![0.0, 10.0], trials: 5, ..Default::default() };
        let a = run_grid(&cfg).unwrap();
        assert_eq!(a.len(), 2 * 2 * 5 * 3);
        let mut buf_a = Vec::new();
        write_records_csv(&a, &mut buf_a).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| run_grid(&cfg)).unwrap();
        let mut buf_b = Vec::new();
        write_records_csv(&b, &mut buf_b).unwrap();
        assert_eq!(buf_a, buf_b);
        let text = String::from_utf8(buf_a).unwrap();
        assert_eq!(text.lines().nth(1), Some(RECORD_HEADER));
        // A single cell is recomputable on its own.
        assert_eq!(run_trial(&cfg, 1, 1, 3).unwrap(), a[(3 * 5 + 3) * 3..(3 * 5 + 4) * 3].to_vec());
        for r in &a {
            assert!(r.ratio >= 1.0 - 1e-9);
            if r.strategy == ExperimentStrategy::DetLa {
                assert!(r.ratio <= 2.0 + 2.0 / r.lambda + 1e-9);
            }
        }
    }

    #[test]
    fn summary_statistics() {
        let rec = |ratio| TrialRecord {
            lambda: 0.5,
            sigma: 0.0,
            strategy: ExperimentStrategy::DetLa,
            trial: 0,
            horizon: 1,
            prediction: 1,
            alg_cost: ratio,
            opt_cost: 1.0,
            ratio,
        };
        let one = summarize(&[rec(1.7)]).unwrap();
        assert_eq!((one[0].mean_ratio, one[0].std_error, one[0].trials), (1.7, 0.0, 1));
        let two = summarize(&[rec(1.0), rec(3.0)]).unwrap();
        assert_eq!(two.len(), 1);
        assert!((two[0].mean_ratio - 2.0).abs() < 1e-15 && (two[0].std_error - 1.0).abs() < 1e-15);
        assert_eq!(summarize(&[]), Err(ExperimentError::Empty));
    }

    #[test]
    fn config_validation() {
        assert!(ExperimentConfig::default().validate().is_ok());
        assert!(ExperimentConfig { trials: 0, ..small(1) }.validate().is_err());
        assert!(ExperimentConfig { lambdas: vec![1.5], ..small(1) }.validate().is_err());
        assert!(ExperimentConfig { sigmas: vec![-1.0], ..small(1) }.validate().is_err());
        assert!(ExperimentConfig { n_options: 60, ..small(1) }.validate().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn repair_keeps_costs_monotone(mut r in prop::collection::vec(0.001f64..1.0, 2..15), seed in any::<u64>()) {
            r.sort_by(f64::total_cmp);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut d: Vec<u64> = sample(&mut rng, 50, r.len()).into_iter().map(|i| i as u64 + 1).collect();
            d.sort_unstable();
            let (rr, c, fired) = repair(&d, &r);
            for w in c.windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
            // Ratios stay sorted except where a repair restarts the suffix.
            for j in 1..rr.len() {
                if !fired.contains(&j) {
                    prop_assert!(rr[j - 1] <= rr[j] * (1.0 + 1e-12));
                }
            }
        }
    }
}
