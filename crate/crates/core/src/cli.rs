//! Command-line front end. Exit status 0 on success, 1 on invalid input,
//! 2 when a checked bound or certificate fails.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::button::{mean_button_price, ButtonInstance, ReductionConfig};
use crate::experiments::{run_grid, summarize, write_records_csv, write_summary_csv, ExperimentConfig};
use crate::harness::Evaluator;
use crate::lowerbound::{
    analytic_dual, analytic_dual_unchecked, analytic_value_bound, build_primal_lp, check_dual_feasibility, det_lb_sequence,
    det_tradeoff_bound, export_lp, lb_instance_prices, normalized_dual_value, verify_analysis_claims, PriceLadder, RandLBParams,
};
use crate::rental::RentalInstance;
use crate::strategies::{guarantee_bounds, sample_alpha, StrategyKind, StrategyParams};

const SLACK: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "skirent", version, about = "Multi-option ski rental: strategies, evaluation and lower bounds")]
struct Cli {
    /// Worker threads for parallel subcommands.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Offline optimum for a number of days.
    Opt {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        days: u64,
    },
    /// Run one strategy against a fixed horizon.
    Simulate {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        strategy: StrategyArgs,
        #[arg(long)]
        days: u64,
        #[arg(long)]
        csv: bool,
    },
    /// Ratio for every horizon up to `--tmax`.
    Sweep {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        strategy: StrategyArgs,
        #[arg(long)]
        tmax: u64,
        #[arg(long)]
        csv: bool,
        /// Fail with status 2 if the worst ratio exceeds the proven robustness.
        #[arg(long)]
        check: bool,
    },
    /// Exact expected cost of a randomized strategy, optionally with sampling.
    Expect {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        strategy: StrategyArgs,
        #[arg(long)]
        days: u64,
        /// Monte Carlo sample count.
        #[arg(long)]
        mc: Option<u64>,
        #[arg(long)]
        csv: bool,
        /// Fail with status 2 if the expectation exceeds the proven guarantee.
        #[arg(long)]
        check: bool,
    },
    /// Solve a button instance through the ski-rental reduction.
    ButtonReduce {
        #[arg(long, value_delimiter = ',')]
        prices: Vec<f64>,
        #[arg(long)]
        target: usize,
        #[arg(long)]
        pred: Option<usize>,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value = "rand")]
        strategy: StrategyKind,
        #[arg(long)]
        lambda: Option<f64>,
        /// Runs over seeds `0..N`.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
    },
    /// Write the lower-bound primal LP.
    LbLp {
        #[arg(long, value_delimiter = ',')]
        prices: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form dual for the geometric price family.
    LbDual {
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long = "c-over-delta")]
        c_over_delta: f64,
        #[arg(long)]
        m: usize,
        /// Verify every dual constraint family.
        #[arg(long)]
        check: bool,
        /// Build the dual even when the parameters fall outside its proven range.
        #[arg(long)]
        no_preconditions: bool,
    },
    /// Sequence behind the deterministic lower bound.
    LbDetseq {
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        count: usize,
    },
    /// Robustness forced by `(1 + lambda)`-consistency.
    LbTradeoff {
        #[arg(long)]
        lambda: f64,
    },
    /// Grid check of the analysis inequalities.
    Claims {
        #[arg(long, default_value_t = 10_000)]
        grid: usize,
    },
    /// Synthetic experiment grid as CSV.
    Experiment {
        #[arg(long)]
        trials: u32,
        #[arg(long, default_value = "0.1,0.3,0.5,0.7")]
        lambdas: String,
        #[arg(long, default_value = "0..50")]
        sigmas: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write per-cell means here.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct StrategyArgs {
    #[arg(long)]
    strategy: StrategyKind,
    #[arg(long)]
    pred: Option<u64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

impl StrategyArgs {
    /// Parameters with `alpha` taken from `--alpha` or drawn from `--seed`.
    fn params(&self) -> Result<StrategyParams, CliError> {
        let alpha = if self.strategy.is_randomized() {
            Some(match (self.alpha, self.seed) {
                (Some(a), _) => a,
                (None, Some(seed)) => sample_alpha(ChaCha8Rng::seed_from_u64(seed).random::<f64>()).map_err(usage)?,
                (None, None) => return Err(CliError::Usage("randomized strategies need --alpha or --seed".into())),
            })
        } else {
            None
        };
        self.finish(alpha)
    }

    /// Parameters for averaging over `alpha`; the value is a placeholder.
    fn params_any_alpha(&self) -> Result<StrategyParams, CliError> {
        if !self.strategy.is_randomized() {
            return Err(CliError::Usage(format!("{} is deterministic; use simulate", self.strategy)));
        }
        self.finish(Some(1.0))
    }

    fn finish(&self, alpha: Option<f64>) -> Result<StrategyParams, CliError> {
        let uses = self.strategy.uses_prediction();
        let params = StrategyParams {
            kind: self.strategy,
            prediction: if uses { self.pred } else { None },
            lambda: if uses { self.lambda } else { None },
            alpha,
        };
        params.validate().map_err(usage)?;
        Ok(params)
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Check(String),
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

/// Parses arguments and runs one subcommand, returning the exit status.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    let result = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs.max(1)).build() {
        Ok(pool) => pool.install(|| dispatch(cli.command, out)),
        Err(e) => Err(usage(e)),
    };
    match result {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
        Err(CliError::Check(msg)) => {
            let _ = writeln!(err, "check failed: {msg}");
            2
        }
    }
}

fn load_instance(path: &PathBuf) -> Result<RentalInstance, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    RentalInstance::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn positive(name: &str, v: u64) -> Result<u64, CliError> {
    if v == 0 {
        return Err(CliError::Usage(format!("--{name} must be at least 1")));
    }
    Ok(v)
}

/// Comma-separated numbers; `a..b` expands to the integers `a` through `b`.
fn parse_list(text: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = item.split_once("..") {
            let a: i64 = a.trim().parse().map_err(|_| CliError::Usage(format!("bad range {item}")))?;
            let b: i64 = b.trim().parse().map_err(|_| CliError::Usage(format!("bad range {item}")))?;
            if b < a {
                return Err(CliError::Usage(format!("empty range {item}")));
            }
            out.extend((a..=b).map(|x| x as f64));
        } else {
            out.push(item.parse().map_err(|_| CliError::Usage(format!("bad number {item}")))?);
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage("empty list".into()));
    }
    Ok(out)
}

fn dispatch(command: Command, out: &mut (dyn Write + Send)) -> Result<(), CliError> {
    match command {
        Command::Opt { instance, days } => {
            let inst = load_instance(&instance)?;
            let days = positive("days", days)?;
            writeln!(out, "opt({days}) = {}", Evaluator::new(&inst).opt(days))?;
        }
        Command::Simulate { instance, strategy, days, csv } => {
            let inst = load_instance(&instance)?;
            let days = positive("days", days)?;
            let params = strategy.params()?;
            let trace = Evaluator::new(&inst).run(&params, days).map_err(usage)?;
            if csv {
                writeln!(out, "T,alg_cost,opt_cost,ratio")?;
                writeln!(out, "{},{},{},{}", days, trace.total_cost, trace.opt_cost, trace.ratio)?;
            } else {
                writeln!(out, "strategy: {}", params.kind)?;
                if let Some(a) = params.alpha {
                    writeln!(out, "alpha = {a}")?;
                }
                for e in &trace.events {
                    writeln!(out, "day {}: option {} (cost {})", e.day, e.option + 1, e.cost)?;
                }
                writeln!(out, "T = {days}")?;
                writeln!(out, "alg_cost = {}", trace.total_cost)?;
                writeln!(out, "opt_cost = {}", trace.opt_cost)?;
                writeln!(out, "ratio = {}", trace.ratio)?;
            }
        }
        Command::Sweep { instance, strategy, tmax, csv, check } => {
            let inst = load_instance(&instance)?;
            let tmax = positive("tmax", tmax)?;
            let params = strategy.params()?;
            if check && params.kind.is_randomized() {
                return Err(CliError::Usage("--check bounds an expectation; use expect --check".into()));
            }
            let mut eval = Evaluator::new(&inst);
            let curve = eval.cost_curve(&params, tmax).map_err(usage)?;
            let report = eval.sweep(&params, tmax).map_err(usage)?;
            if csv {
                writeln!(out, "T,alg_cost,opt_cost,ratio")?;
                for t in 1..=tmax {
                    let i = t as usize - 1;
                    writeln!(out, "{},{},{},{}", t, curve.lazy[i], eval.opt(t), report.ratios[i])?;
                }
            } else {
                writeln!(out, "strategy: {}", params.kind)?;
                writeln!(out, "worst ratio = {} at T = {}", report.worst_ratio, report.argmax_t)?;
            }
            if check {
                let (_, robust) = guarantee_bounds(params.kind, params.lambda).map_err(usage)?;
                if report.worst_ratio > robust + SLACK {
                    return Err(CliError::Check(format!(
                        "ratio {} at T = {} exceeds {robust}",
                        report.worst_ratio, report.argmax_t
                    )));
                }
            }
        }
        Command::Expect { instance, strategy, days, mc, csv, check } => {
            let inst = load_instance(&instance)?;
            let days = positive("days", days)?;
            let params = strategy.params_any_alpha()?;
            let mut eval = Evaluator::new(&inst);
            let expected = eval.exact_expected_cost(&params, days).map_err(usage)?;
            let opt = eval.opt(days);
            let estimate = match mc {
                Some(n) => {
                    let seed = strategy.seed.ok_or_else(|| CliError::Usage("--mc needs --seed".into()))?;
                    Some(eval.monte_carlo(&params, days, positive("mc", n)?, seed).map_err(usage)?)
                }
                None => None,
            };
            if csv {
                writeln!(out, "T,alg_cost,opt_cost,ratio")?;
                writeln!(out, "{},{},{},{}", days, expected, opt, expected / opt)?;
            } else {
                writeln!(out, "strategy: {}", params.kind)?;
                writeln!(out, "E[cost] = {expected}")?;
                writeln!(out, "opt_cost = {opt}")?;
                writeln!(out, "ratio = {}", expected / opt)?;
                if let Some(e) = estimate {
                    writeln!(out, "monte carlo = {} +- {} ({} samples)", e.mean, e.std_error, e.samples)?;
                }
            }
            if check {
                let (cons, robust) = guarantee_bounds(params.kind, params.lambda).map_err(usage)?;
                let bound = if params.prediction == Some(days) { cons.min(robust) } else { robust };
                if expected > bound * opt + SLACK {
                    return Err(CliError::Check(format!("E[cost] = {expected} exceeds {bound} * opt = {}", bound * opt)));
                }
            }
        }
        Command::ButtonReduce { prices, target, pred, eps, strategy, lambda, seeds } => {
            let buttons = ButtonInstance::new(prices, target, pred).map_err(usage)?;
            let max_price = buttons.max_price();
            if max_price.fract() != 0.0 {
                return Err(CliError::Usage("prices must be integers".into()));
            }
            let lambda = if strategy.uses_prediction() { lambda } else { None };
            let cfg = ReductionConfig::for_strategy(strategy, lambda, eps, max_price as u64).map_err(usage)?;
            let est = mean_button_price(&buttons, strategy, lambda, &cfg, positive("seeds", seeds)?).map_err(usage)?;
            let b_j = buttons.price(target);
            // Consistency applies when the prediction names the first target.
            let factor = if pred == Some(target) { cfg.chi } else { cfg.rho };
            let bound = (factor + eps) * b_j;
            writeln!(out, "strategy: {strategy}")?;
            writeln!(out, "mean total price = {} +- {} ({} seeds)", est.mean, est.std_error, est.samples)?;
            writeln!(out, "bound = {bound}")?;
            if est.mean > bound + SLACK {
                return Err(CliError::Check(format!("mean price {} exceeds {bound}", est.mean)));
            }
        }
        Command::LbLp { prices, out: path } => {
            let model = build_primal_lp(&prices).map_err(usage)?;
            let text = export_lp(&model);
            match path {
                Some(p) => fs::write(&p, text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?,
                None => out.write_all(text.as_bytes())?,
            }
        }
        Command::LbDual { eps, delta, c_over_delta, m, check, no_preconditions } => {
            let params = RandLBParams { epsilon: eps, delta, c_over_delta, m };
            let (prices, dual) = if no_preconditions {
                if !(delta > 0.0 && delta.is_finite()) || m == 0 {
                    return Err(CliError::Usage("need delta > 0 and m >= 1".into()));
                }
                (PriceLadder::geometric(delta, m), analytic_dual_unchecked(&params))
            } else {
                (lb_instance_prices(&params).map_err(usage)?, analytic_dual(&params).map_err(usage)?)
            };
            let value = normalized_dual_value(&prices, &dual).map_err(usage)?;
            writeln!(out, "w = {}", dual.w)?;
            writeln!(out, "normalized value = {value}")?;
            writeln!(out, "closed-form bound = {}", analytic_value_bound(&params))?;
            if check {
                let report = check_dual_feasibility(&prices, &dual).map_err(usage)?;
                writeln!(out, "{report}")?;
                if !report.feasible() {
                    return Err(CliError::Check("dual constraints violated".into()));
                }
            }
        }
        Command::LbDetseq { gamma, count } => {
            let report = det_lb_sequence(gamma, count).map_err(usage)?;
            for (i, a) in report.sequence.iter().enumerate() {
                writeln!(out, "a_{} = {a}", i + 1)?;
            }
            match report.first_nonpositive {
                Some(i) => writeln!(out, "first nonpositive at i = {i}")?,
                None => writeln!(out, "all {} terms positive", report.sequence.len())?,
            }
            if let Some(l) = report.limit_alpha {
                writeln!(out, "limit = {l}")?;
            }
        }
        Command::LbTradeoff { lambda } => {
            writeln!(out, "{}", det_tradeoff_bound(lambda).map_err(usage)?)?;
        }
        Command::Claims { grid } => {
            let report = verify_analysis_claims(grid).map_err(usage)?;
            for c in &report.claims {
                writeln!(out, "{c}")?;
            }
            let missing_equality = report
                .claims
                .iter()
                .any(|c| c.equality_gap.is_some() && !c.equality_detected());
            if !report.all_hold() || missing_equality {
                return Err(CliError::Check("an inequality failed on the grid".into()));
            }
        }
        Command::Experiment { trials, lambdas, sigmas, seed, out: path, summary } => {
            let seed = seed.ok_or_else(|| CliError::Usage("experiment needs --seed".into()))?;
            let config = ExperimentConfig {
                lambdas: parse_list(&lambdas)?,
                sigmas: parse_list(&sigmas)?,
                trials,
                master_seed: seed,
                ..Default::default()
            };
            let records = run_grid(&config).map_err(usage)?;
            let rows = summarize(&records).map_err(usage)?;
            match path {
                Some(p) => {
                    let file = fs::File::create(&p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
                    write_records_csv(&records, io::BufWriter::new(file))?;
                    write_summary_csv(&rows, &mut *out)?;
                }
                None => write_records_csv(&records, &mut *out)?,
            }
            if let Some(p) = summary {
                let file = fs::File::create(&p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
                write_summary_csv(&rows, io::BufWriter::new(file))?;
            }
        }
    }
    Ok(())
}
