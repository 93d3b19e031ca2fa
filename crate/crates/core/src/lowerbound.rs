//! Lower-bound certificates for the button problem.
//!
//! The randomized bound is an LP over click probabilities. Its dual is
//! checked row by row for a given candidate; for the geometric price family
//! the prices span hundreds of orders of magnitude, so prices and dual
//! weights are stored as logarithms.

use std::f64::consts::E;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LbError {
    #[error("need at least one price")]
    EmptyPrices,
    #[error("price {index} is not positive and finite")]
    BadPrice { index: usize },
    #[error("prices must be nondecreasing (price {index} drops)")]
    DecreasingPrices { index: usize },
    #[error("expected {expected} entries for {what}, got {got}")]
    DimensionMismatch { what: &'static str, expected: usize, got: usize },
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("the normalizer sum of b_j v_j is zero")]
    ZeroNormalizer,
    #[error("LP text line {line}: {message}")]
    Parse { line: usize, message: String },
}

const TOL: f64 = 1e-9;

fn check_prices(prices: &[f64]) -> Result<(), LbError> {
    if prices.is_empty() {
        return Err(LbError::EmptyPrices);
    }
    for (i, &p) in prices.iter().enumerate() {
        if !(p > 0.0 && p.is_finite()) {
            return Err(LbError::BadPrice { index: i + 1 });
        }
        if i > 0 && p < prices[i - 1] {
            return Err(LbError::DecreasingPrices { index: i + 1 });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Eq,
    Le,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub name: String,
    /// `(variable index, coefficient)` pairs.
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// The primal program: minimize `g` over click probabilities `x_j` (first
/// click) and `y_{t,j}` (click `t` followed by `j`), all nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct LPModel {
    pub prices: Vec<f64>,
    pub var_names: Vec<String>,
    pub rows: Vec<LpRow>,
}

impl LPModel {
    pub fn m(&self) -> usize {
        self.prices.len()
    }

    /// Index of `x_j` (1-based `j`).
    pub fn x(&self, j: usize) -> usize {
        j - 1
    }

    /// Index of `y_{t,j}` for `1 <= t < j <= m`.
    pub fn y(&self, t: usize, j: usize) -> usize {
        y_index(self.m(), t, j)
    }

    pub fn gamma(&self) -> usize {
        self.var_names.len() - 1
    }

    pub fn y_count(&self) -> usize {
        self.m() * (self.m() - 1) / 2
    }
}

fn y_index(m: usize, t: usize, j: usize) -> usize {
    debug_assert!(1 <= t && t < j && j <= m);
    m + (t - 1) * m - (t - 1) * t / 2 + (j - t - 1)
}

pub fn build_primal_lp(prices: &[f64]) -> Result<LPModel, LbError> {
    check_prices(prices)?;
    let m = prices.len();
    let mut var_names: Vec<String> = (1..=m).map(|j| format!("x{j}")).collect();
    for t in 1..m {
        for j in t + 1..=m {
            var_names.push(format!("y{t}_{j}"));
        }
    }
    var_names.push("g".to_string());
    let g = var_names.len() - 1;

    let mut rows = vec![LpRow {
        name: "prob".into(),
        terms: (0..m).map(|j| (j, 1.0)).collect(),
        sense: Sense::Eq,
        rhs: 1.0,
    }];
    for t in 1..m {
        let mut terms: Vec<(usize, f64)> = (t + 1..=m).map(|j| (y_index(m, t, j), 1.0)).collect();
        terms.push((t - 1, -1.0));
        terms.extend((1..t).map(|s| (y_index(m, s, t), -1.0)));
        rows.push(LpRow { name: format!("flow{t}"), terms, sense: Sense::Eq, rhs: 0.0 });
    }
    for big_j in 1..=m {
        let mut terms = Vec::new();
        for j in 1..=m {
            terms.push((j - 1, prices[j - 1]));
            for t in 1..big_j.min(j) {
                terms.push((y_index(m, t, j), prices[j - 1]));
            }
        }
        terms.push((g, -prices[big_j - 1]));
        rows.push(LpRow { name: format!("ratio{big_j}"), terms, sense: Sense::Le, rhs: 0.0 });
    }
    Ok(LPModel { prices: prices.to_vec(), var_names, rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimalSolution {
    pub x: Vec<f64>,
    /// `y[t-1][j-t-1]` holds `y_{t,j}`.
    pub y: Vec<Vec<f64>>,
    pub gamma: f64,
}

impl PrimalSolution {
    pub fn zeros(m: usize) -> Self {
        PrimalSolution { x: vec![0.0; m], y: (1..m).map(|t| vec![0.0; m - t]).collect(), gamma: 0.0 }
    }

    pub fn y_at(&self, t: usize, j: usize) -> f64 {
        self.y[t - 1][j - t - 1]
    }

    pub fn set_y(&mut self, t: usize, j: usize, value: f64) {
        self.y[t - 1][j - t - 1] = value;
    }

    /// Variable vector in model order.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = self.x.clone();
        for row in &self.y {
            out.extend_from_slice(row);
        }
        out.push(self.gamma);
        out
    }

    /// Marginals of a randomized strategy given as a distribution over click
    /// sequences for `J = m`. Each sequence is strictly increasing (1-based)
    /// and ends at `m`. `gamma` is the strategy's worst ratio over `J`.
    pub fn from_click_distribution(prices: &[f64], dist: &[(f64, Vec<usize>)]) -> Result<Self, LbError> {
        check_prices(prices)?;
        let m = prices.len();
        let mut sol = PrimalSolution::zeros(m);
        for (p, seq) in dist {
            let ok = !seq.is_empty()
                && seq.windows(2).all(|w| w[0] < w[1])
                && seq[0] >= 1
                && *seq.last().unwrap() == m;
            if !ok || *p < 0.0 {
                return Err(LbError::BadParams(format!("bad click sequence {seq:?} with probability {p}")));
            }
            sol.x[seq[0] - 1] += p;
            for w in seq.windows(2) {
                let v = sol.y_at(w[0], w[1]) + p;
                sol.set_y(w[0], w[1], v);
            }
        }
        sol.gamma = (1..=m)
            .map(|big_j| {
                let expected: f64 = dist
                    .iter()
                    .map(|(p, seq)| {
                        let mut cost = 0.0;
                        for &j in seq {
                            cost += prices[j - 1];
                            if j >= big_j {
                                break;
                            }
                        }
                        p * cost
                    })
                    .sum();
                expected / prices[big_j - 1]
            })
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(sol)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs` for inequalities, `-|rhs - lhs|` for equalities.
    pub slack: f64,
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimalReport {
    pub rows: Vec<RowCheck>,
    pub max_violation: f64,
    /// Inequality rows that hold with equality.
    pub binding: Vec<String>,
    pub feasible: bool,
}

fn evaluate_rows(rows: &[LpRow], values: &[f64]) -> Vec<RowCheck> {
    rows.iter()
        .map(|r| {
            let lhs: f64 = r.terms.iter().map(|&(i, c)| c * values[i]).sum();
            let scale = r.terms.iter().map(|&(i, c)| (c * values[i]).abs()).fold(1.0, f64::max);
            let slack = match r.sense {
                Sense::Eq => -(r.rhs - lhs).abs(),
                Sense::Le => r.rhs - lhs,
            };
            RowCheck { name: r.name.clone(), lhs, rhs: r.rhs, slack, violated: slack < -TOL * scale }
        })
        .collect()
}

fn summarize_rows(mut rows: Vec<RowCheck>, rows_meta: &[LpRow], values: &[f64], var_names: &[String]) -> PrimalReport {
    let binding = rows
        .iter()
        .zip(rows_meta)
        .filter(|(c, r)| r.sense == Sense::Le && c.slack.abs() <= TOL * c.rhs.abs().max(c.lhs.abs()).max(1.0))
        .map(|(c, _)| c.name.clone())
        .collect();
    for (i, &v) in values.iter().enumerate() {
        if var_names[i] != "g" {
            rows.push(RowCheck {
                name: format!("nonneg_{}", var_names[i]),
                lhs: -v,
                rhs: 0.0,
                slack: v,
                violated: v < -TOL,
            });
        }
    }
    let max_violation = rows.iter().map(|r| -r.slack).fold(0.0, f64::max);
    let feasible = rows.iter().all(|r| !r.violated);
    PrimalReport { rows, max_violation, binding, feasible }
}

pub fn check_primal_feasibility(model: &LPModel, sol: &PrimalSolution) -> Result<PrimalReport, LbError> {
    let values = sol.flatten();
    if values.len() != model.var_names.len() || sol.x.len() != model.m() {
        return Err(LbError::DimensionMismatch {
            what: "primal variables",
            expected: model.var_names.len(),
            got: values.len(),
        });
    }
    let rows = evaluate_rows(&model.rows, &values);
    Ok(summarize_rows(rows, &model.rows, &values, &model.var_names))
}

/// Writes the model in LP text format with named rows and a free `g`.
pub fn export_lp(model: &LPModel) -> String {
    let mut out = String::new();
    out.push_str(&format!("\\ button lower-bound primal, m = {}\n", model.m()));
    out.push_str("min: g\nst\n");
    for r in &model.rows {
        out.push_str(&format!(" {}:", r.name));
        for &(i, c) in &r.terms {
            let sign = if c < 0.0 { '-' } else { '+' };
            out.push_str(&format!(" {sign} {} {}", c.abs(), model.var_names[i]));
        }
        let op = match r.sense {
            Sense::Eq => "=",
            Sense::Le => "<=",
        };
        out.push_str(&format!(" {op} {}\n", r.rhs));
    }
    out.push_str("bounds\n g free\nend\n");
    out
}

/// An LP read back from text.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedLp {
    pub objective: String,
    pub var_names: Vec<String>,
    pub rows: Vec<LpRow>,
    pub free: Vec<String>,
}

impl ParsedLp {
    pub fn check(&self, assignment: &dyn Fn(&str) -> f64) -> PrimalReport {
        let values: Vec<f64> = self.var_names.iter().map(|n| assignment(n)).collect();
        let rows = evaluate_rows(&self.rows, &values);
        summarize_rows(rows, &self.rows, &values, &self.var_names)
    }
}

pub fn parse_lp(text: &str) -> Result<ParsedLp, LbError> {
    #[derive(PartialEq)]
    enum Section {
        Head,
        Rows,
        Bounds,
        Done,
    }
    let err = |line: usize, message: &str| LbError::Parse { line, message: message.to_string() };
    let mut section = Section::Head;
    let mut objective = None;
    let mut var_names: Vec<String> = Vec::new();
    let mut rows = Vec::new();
    let mut free = Vec::new();
    let index_of = |name: &str, names: &mut Vec<String>| -> usize {
        match names.iter().position(|n| n == name) {
            Some(i) => i,
            None => {
                names.push(name.to_string());
                names.len() - 1
            }
        }
    };
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('\\') {
            continue;
        }
        match section {
            Section::Head => {
                if let Some(rest) = line.strip_prefix("min:") {
                    objective = Some(rest.trim().to_string());
                } else if line == "st" {
                    section = Section::Rows;
                } else {
                    return Err(err(line_no, "expected objective or 'st'"));
                }
            }
            Section::Rows => {
                if line == "bounds" {
                    section = Section::Bounds;
                    continue;
                }
                let (name, body) = line.split_once(':').ok_or_else(|| err(line_no, "row without a name"))?;
                let tokens: Vec<&str> = body.split_whitespace().collect();
                if tokens.len() < 2 || (tokens.len() - 2) % 3 != 0 {
                    return Err(err(line_no, "malformed row"));
                }
                let mut terms = Vec::new();
                for chunk in tokens[..tokens.len() - 2].chunks(3) {
                    let coef: f64 = chunk[1].parse().map_err(|_| err(line_no, "bad coefficient"))?;
                    let coef = match chunk[0] {
                        "+" => coef,
                        "-" => -coef,
                        _ => return Err(err(line_no, "expected a sign")),
                    };
                    terms.push((index_of(chunk[2], &mut var_names), coef));
                }
                let sense = match tokens[tokens.len() - 2] {
                    "=" => Sense::Eq,
                    "<=" => Sense::Le,
                    _ => return Err(err(line_no, "unknown relation")),
                };
                let rhs = tokens[tokens.len() - 1].parse().map_err(|_| err(line_no, "bad right-hand side"))?;
                rows.push(LpRow { name: name.trim().to_string(), terms, sense, rhs });
            }
            Section::Bounds => {
                if line == "end" {
                    section = Section::Done;
                } else if let Some(v) = line.strip_suffix("free") {
                    free.push(v.trim().to_string());
                } else {
                    return Err(err(line_no, "unsupported bound"));
                }
            }
            Section::Done => return Err(err(line_no, "text after 'end'")),
        }
    }
    if section != Section::Done {
        return Err(err(text.lines().count(), "missing 'end'"));
    }
    let objective = objective.ok_or_else(|| err(1, "missing objective"))?;
    index_of(&objective, &mut var_names);
    Ok(ParsedLp { objective, var_names, rows, free })
}

/// Prices stored as natural logarithms.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceLadder {
    ln_b: Vec<f64>,
}

impl PriceLadder {
    pub fn from_prices(prices: &[f64]) -> Result<Self, LbError> {
        check_prices(prices)?;
        Ok(PriceLadder { ln_b: prices.iter().map(|p| p.ln()).collect() })
    }

    /// `b_j = e^{j/delta}` for `j = 1..=m`.
    pub fn geometric(delta: f64, m: usize) -> Self {
        PriceLadder { ln_b: (1..=m).map(|j| j as f64 / delta).collect() }
    }

    pub fn len(&self) -> usize {
        self.ln_b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ln_b.is_empty()
    }

    pub fn ln_prices(&self) -> &[f64] {
        &self.ln_b
    }

    /// Prices as plain numbers; may overflow to infinity.
    pub fn prices(&self) -> Vec<f64> {
        self.ln_b.iter().map(|l| l.exp()).collect()
    }
}

/// A (D2) candidate: `v` as logarithms (`-inf` for zero), `u`, `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub ln_v: Vec<f64>,
    pub u: Vec<f64>,
    pub w: f64,
}

impl DualSolution {
    pub fn new(v: &[f64], u: Vec<f64>, w: f64) -> Self {
        DualSolution { ln_v: v.iter().map(|x| x.ln()).collect(), u, w }
    }

    pub fn zeros(m: usize) -> Self {
        DualSolution { ln_v: vec![f64::NEG_INFINITY; m], u: vec![0.0; m], w: 0.0 }
    }

    pub fn v(&self) -> Vec<f64> {
        self.ln_v.iter().map(|l| l.exp()).collect()
    }
}

/// Sum of positive terms given by their logarithms, with Kahan compensation
/// at a floating scale.
#[derive(Debug, Clone, Copy)]
struct LogAccumulator {
    scale: f64,
    sum: f64,
    comp: f64,
}

impl LogAccumulator {
    fn new() -> Self {
        LogAccumulator { scale: f64::NEG_INFINITY, sum: 0.0, comp: 0.0 }
    }

    fn push(&mut self, ln_term: f64) {
        if ln_term == f64::NEG_INFINITY {
            return;
        }
        if ln_term == f64::INFINITY {
            self.scale = f64::INFINITY;
            self.sum = 1.0;
            return;
        }
        if self.scale == f64::NEG_INFINITY || ln_term > self.scale + 300.0 {
            let shrink = (self.scale - ln_term).exp();
            self.sum *= shrink;
            self.comp *= shrink;
            self.scale = ln_term;
        }
        let y = (ln_term - self.scale).exp() - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
        if self.sum > 1e150 {
            let f = self.sum;
            self.scale += f.ln();
            self.sum = 1.0;
            self.comp /= f;
        }
    }

    fn ln_value(&self) -> f64 {
        if self.sum > 0.0 {
            self.scale + self.sum.ln()
        } else {
            f64::NEG_INFINITY
        }
    }
}

/// `out[k] = ln sum_{j >= k} v_j` for `k = 1..=m+1` (1-based; `out[0]` unused).
fn log_suffix_sums(ln_v: &[f64]) -> Vec<f64> {
    let m = ln_v.len();
    let mut out = vec![f64::NEG_INFINITY; m + 2];
    let mut acc = LogAccumulator::new();
    for j in (1..=m).rev() {
        acc.push(ln_v[j - 1]);
        out[j] = acc.ln_value();
    }
    out
}

fn ln_normalizer(prices: &PriceLadder, dual: &DualSolution) -> f64 {
    let mut acc = LogAccumulator::new();
    for (lb, lv) in prices.ln_b.iter().zip(&dual.ln_v) {
        acc.push(lb + lv);
    }
    acc.ln_value()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandLBParams {
    pub epsilon: f64,
    pub delta: f64,
    pub c_over_delta: f64,
    pub m: usize,
}

impl RandLBParams {
    /// Smallest `c / delta` for which the analytic dual is feasible.
    pub fn c_threshold(epsilon: f64) -> f64 {
        -(E - epsilon).ln() - (E / (E - epsilon)).ln().ln()
    }

    pub fn c(&self) -> f64 {
        self.c_over_delta * self.delta
    }

    pub fn validate(&self) -> Result<(), LbError> {
        if !(self.epsilon > 0.0 && self.epsilon < E - 1.0) {
            return Err(LbError::BadParams(format!("epsilon must lie in (0, e - 1), got {}", self.epsilon)));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(LbError::BadParams(format!("delta must be positive, got {}", self.delta)));
        }
        let threshold = Self::c_threshold(self.epsilon);
        if self.c_over_delta < threshold {
            return Err(LbError::BadParams(format!(
                "c/delta = {} is below the feasibility threshold {threshold}",
                self.c_over_delta
            )));
        }
        let m_over_delta = self.m as f64 / self.delta;
        if m_over_delta < (E / self.epsilon).ln() {
            return Err(LbError::BadParams(format!(
                "m/delta = {m_over_delta} is below ln(e/epsilon) = {}",
                (E / self.epsilon).ln()
            )));
        }
        if self.m as f64 <= self.c() {
            return Err(LbError::BadParams(format!("m = {} must exceed c = {}", self.m, self.c())));
        }
        Ok(())
    }
}

pub fn lb_instance_prices(params: &RandLBParams) -> Result<PriceLadder, LbError> {
    params.validate()?;
    Ok(PriceLadder::geometric(params.delta, params.m))
}

/// The closed-form (D2) solution for the geometric prices.
pub fn analytic_dual(params: &RandLBParams) -> Result<DualSolution, LbError> {
    params.validate()?;
    Ok(analytic_dual_unchecked(params))
}

/// As [`analytic_dual`] without the parameter preconditions, for probing
/// what happens when they fail.
pub fn analytic_dual_unchecked(params: &RandLBParams) -> DualSolution {
    let RandLBParams { epsilon, delta, m, .. } = *params;
    let c = params.c();
    let ln_width = (-(-1.0 / delta).exp_m1()).ln();
    let ln_v: Vec<f64> = (1..=m).map(|j| -((j - 1) as f64) / delta + ln_width).collect();
    let slope = (E - epsilon) / delta;
    let u: Vec<f64> = (1..=m).map(|j| slope * (m as f64 - c - j as f64).max(0.0)).collect();
    let ln_s1 = log_suffix_sums(&ln_v)[1];
    let w = (1..=m)
        .map(|t| u[t - 1] + (t as f64 / delta + ln_s1).exp())
        .fold(f64::INFINITY, f64::min);
    DualSolution { ln_v, u, w }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    Exhaustive,
    Frontier,
}

impl fmt::Display for CheckMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckMode::Exhaustive => "exhaustive",
            CheckMode::Frontier => "frontier",
        })
    }
}

/// Outcome for one family of rows. `max_excess` is the largest scaled
/// `lhs - rhs`; rows with excess above `1e-9` count as violations.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyReport {
    pub name: &'static str,
    pub rows_checked: u64,
    pub violations: u64,
    pub max_excess: f64,
    /// 1-based row coordinates of the largest excess.
    pub worst: Option<(usize, usize)>,
}

impl FamilyReport {
    fn new(name: &'static str) -> Self {
        FamilyReport { name, rows_checked: 0, violations: 0, max_excess: f64::NEG_INFINITY, worst: None }
    }

    fn record(&mut self, lhs: f64, rhs: f64, scale: f64, at: (usize, usize)) {
        self.rows_checked += 1;
        if rhs == f64::INFINITY {
            return;
        }
        let excess = (lhs - rhs) / scale.max(1.0);
        if excess > TOL {
            self.violations += 1;
        }
        if excess > self.max_excess {
            self.max_excess = excess;
            self.worst = Some(at);
        }
    }

    fn merge(mut self, other: FamilyReport) -> FamilyReport {
        self.rows_checked += other.rows_checked;
        self.violations += other.violations;
        if other.max_excess > self.max_excess {
            self.max_excess = other.max_excess;
            self.worst = other.worst;
        }
        self
    }

    pub fn ok(&self) -> bool {
        self.violations == 0
    }
}

impl fmt::Display for FamilyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<14} rows={:<12} violations={:<6} max_excess={:.3e}",
            self.name, self.rows_checked, self.violations, self.max_excess
        )?;
        if let Some((s, t)) = self.worst {
            write!(f, " at ({s},{t})")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualReport {
    pub mode: CheckMode,
    pub d2: Vec<FamilyReport>,
    pub d1: Vec<FamilyReport>,
    pub ln_normalizer: f64,
}

impl DualReport {
    pub fn d2_feasible(&self) -> bool {
        self.d2.iter().all(FamilyReport::ok)
    }

    pub fn d1_feasible(&self) -> bool {
        self.d1.iter().all(FamilyReport::ok)
    }

    pub fn feasible(&self) -> bool {
        self.d2_feasible() && self.d1_feasible()
    }
}

impl fmt::Display for DualReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mode: {}", self.mode)?;
        for r in &self.d2 {
            writeln!(f, "D2 {r}")?;
        }
        for r in &self.d1 {
            writeln!(f, "D1 {r}")?;
        }
        write!(f, "ln sum b_j v_j = {}", self.ln_normalizer)
    }
}

/// Largest `m` checked pair by pair.
pub const EXHAUSTIVE_LIMIT: usize = 20_000;
const SPOT_CHECKS: usize = 10_000;
const SPOT_SEED: u64 = 0x00d2_c4ec;

/// Pairwise rows `u[s] - u[t] <= exp(ln_b[t] + ln_s[s+1] - shift)` for
/// `1 <= s < t <= t_end`.
struct PairRows<'a> {
    ln_b: &'a [f64],
    ln_s: &'a [f64],
    u: &'a [f64],
    shift: f64,
    t_end: usize,
}

impl PairRows<'_> {
    fn rhs(&self, s: usize, t: usize) -> f64 {
        (self.ln_b[t - 1] + self.ln_s[s + 1] - self.shift).exp()
    }

    fn record(&self, rep: &mut FamilyReport, s: usize, t: usize) {
        let (us, ut) = (self.u[s - 1], self.u[t - 1]);
        let rhs = self.rhs(s, t);
        let scale = us.abs().max(ut.abs()).max(if rhs.is_finite() { rhs } else { 0.0 });
        rep.record(us - ut, rhs, scale, (s, t));
    }

    /// `rhs - lhs` as a function of `t` for fixed `s`.
    fn gap(&self, s: usize, t: usize) -> f64 {
        self.rhs(s, t) + self.u[t - 1] - self.u[s - 1]
    }

    fn exhaustive(&self, name: &'static str) -> FamilyReport {
        (1..self.t_end)
            .into_par_iter()
            .map(|s| {
                let mut rep = FamilyReport::new(name);
                for t in s + 1..=self.t_end {
                    self.record(&mut rep, s, t);
                }
                rep
            })
            .reduce(|| FamilyReport::new(name), FamilyReport::merge)
    }

    /// For each `s` the gap is convex in `t`; find its minimum by bisection on
    /// the forward difference and check a neighbourhood plus fixed landmarks.
    fn frontier(&self, name: &'static str, landmarks: &[usize]) -> FamilyReport {
        let t_end = self.t_end;
        let mut rep = (1..t_end)
            .into_par_iter()
            .map(|s| {
                let mut rep = FamilyReport::new(name);
                let (mut lo, mut hi) = (s + 1, t_end);
                while lo < hi {
                    let mid = lo + (hi - lo) / 2;
                    if self.gap(s, mid + 1) - self.gap(s, mid) >= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid + 1;
                    }
                }
                let mut ts: Vec<usize> = (lo.saturating_sub(3)..=lo + 3).collect();
                ts.extend([s + 1, t_end]);
                ts.extend(landmarks.iter().flat_map(|&k| [k.saturating_sub(1), k, k + 1]));
                ts.sort_unstable();
                ts.dedup();
                for t in ts.into_iter().filter(|&t| t > s && t <= t_end) {
                    self.record(&mut rep, s, t);
                }
                rep
            })
            .reduce(|| FamilyReport::new(name), FamilyReport::merge);
        let mut rng = ChaCha8Rng::seed_from_u64(SPOT_SEED);
        for _ in 0..SPOT_CHECKS {
            let s = rng.random_range(1..t_end);
            let t = rng.random_range(s + 1..=t_end);
            self.record(&mut rep, s, t);
        }
        rep
    }
}

fn is_convex(values: &[f64]) -> bool {
    values.windows(3).all(|w| {
        let d2 = w[2] - 2.0 * w[1] + w[0];
        d2 >= -TOL * w.iter().fold(1.0f64, |a, b| a.max(b.abs()))
    })
}

/// Indices (1-based) where the slope of `u` changes.
fn kinks(u: &[f64]) -> Vec<usize> {
    let mut out: Vec<usize> = u
        .windows(3)
        .enumerate()
        .filter(|(_, w)| (w[2] - 2.0 * w[1] + w[0]).abs() > TOL * w.iter().fold(1.0f64, |a, b| a.max(b.abs())))
        .map(|(i, _)| i + 2)
        .collect();
    out.truncate(64);
    out
}

/// Verifies the (D2) rows and, after dividing by `sum b_j v_j`, the (D1)
/// rows. Pairwise rows are exhaustive up to [`EXHAUSTIVE_LIMIT`] buttons.
pub fn check_dual_feasibility(prices: &PriceLadder, dual: &DualSolution) -> Result<DualReport, LbError> {
    let mode = if prices.len() <= EXHAUSTIVE_LIMIT { CheckMode::Exhaustive } else { CheckMode::Frontier };
    check_dual_feasibility_with(prices, dual, mode)
}

pub fn check_dual_feasibility_with(
    prices: &PriceLadder,
    dual: &DualSolution,
    mode: CheckMode,
) -> Result<DualReport, LbError> {
    let m = prices.len();
    for (what, got) in [("v", dual.ln_v.len()), ("u", dual.u.len())] {
        if got != m {
            return Err(LbError::DimensionMismatch { what, expected: m, got });
        }
    }
    let ln_b = prices.ln_prices();
    let ln_s = log_suffix_sums(&dual.ln_v);
    // Bisection needs convex gaps; log-convex prices are convex.
    let mode = if mode == CheckMode::Frontier && !(is_convex(&dual.u) && is_convex(ln_b)) {
        CheckMode::Exhaustive
    } else {
        mode
    };
    let landmarks = kinks(&dual.u);
    let pairs = |rows: &PairRows, name| match mode {
        CheckMode::Exhaustive => rows.exhaustive(name),
        CheckMode::Frontier => rows.frontier(name, &landmarks),
    };

    let mut d2 = Vec::new();
    let mut w_rows = FamilyReport::new("w-rows");
    for t in 1..=m {
        let rhs = dual.u[t - 1] + (ln_b[t - 1] + ln_s[1]).exp();
        w_rows.record(dual.w, rhs, dual.w.abs().max(dual.u[t - 1].abs()), (t, t));
    }
    d2.push(w_rows);
    d2.push(pairs(&PairRows { ln_b, ln_s: &ln_s, u: &dual.u, shift: 0.0, t_end: m }, "pair-rows"));
    let mut last = FamilyReport::new("u_m = 0");
    last.record(dual.u[m - 1].abs(), 0.0, 1.0, (m, m));
    d2.push(last);
    let mut nonneg = FamilyReport::new("v >= 0");
    for (j, lv) in dual.ln_v.iter().enumerate() {
        // A NaN logarithm means a negative weight.
        nonneg.record(if lv.is_nan() { 1.0 } else { 0.0 }, 0.0, 1.0, (j + 1, j + 1));
    }
    d2.push(nonneg);

    let ln_d = ln_normalizer(prices, dual);
    let mut d1 = Vec::new();
    if ln_d == f64::NEG_INFINITY || ln_d.is_nan() {
        let mut norm = FamilyReport::new("normalization");
        norm.record(1.0, 0.0, 1.0, (0, 0));
        d1.push(norm);
        return Ok(DualReport { mode, d2, d1, ln_normalizer: ln_d });
    }
    let scaled_ln_v: Vec<f64> = dual.ln_v.iter().map(|l| l - ln_d).collect();
    let inv_d = (-ln_d).exp();
    let u1: Vec<f64> = dual.u.iter().map(|x| x * inv_d).collect();
    let w1 = dual.w * inv_d;
    let ln_s1 = log_suffix_sums(&scaled_ln_v);

    let mut norm = FamilyReport::new("normalization");
    let mut total = LogAccumulator::new();
    for (lb, lv) in ln_b.iter().zip(&scaled_ln_v) {
        total.push(lb + lv);
    }
    let sum = total.ln_value().exp();
    norm.record((sum - 1.0).abs(), 0.0, 1.0, (0, 0));
    d1.push(norm);

    let mut w_rows = FamilyReport::new("w-rows");
    for t in 1..m {
        let rhs = u1[t - 1] + (ln_b[t - 1] + ln_s1[1]).exp();
        w_rows.record(w1, rhs, w1.abs().max(u1[t - 1].abs()), (t, t));
    }
    let rhs = (ln_b[m - 1] + ln_s1[1]).exp();
    w_rows.record(w1, rhs, w1.abs(), (m, m));
    d1.push(w_rows);
    if m >= 2 {
        d1.push(pairs(&PairRows { ln_b, ln_s: &ln_s1, u: &u1, shift: 0.0, t_end: m - 1 }, "pair-rows"));
    }
    let mut u_last = FamilyReport::new("u-last");
    for s in 1..m {
        let rhs = (ln_b[m - 1] + ln_s1[s + 1]).exp();
        u_last.record(u1[s - 1], rhs, u1[s - 1].abs(), (s, m));
    }
    d1.push(u_last);
    Ok(DualReport { mode, d2, d1, ln_normalizer: ln_d })
}

/// `w / sum_j b_j v_j`, the lower bound certified by a feasible (D2) solution.
pub fn normalized_dual_value(prices: &PriceLadder, dual: &DualSolution) -> Result<f64, LbError> {
    if dual.ln_v.len() != prices.len() {
        return Err(LbError::DimensionMismatch { what: "v", expected: prices.len(), got: dual.ln_v.len() });
    }
    let ln_d = ln_normalizer(prices, dual);
    if ln_d == f64::NEG_INFINITY {
        return Err(LbError::ZeroNormalizer);
    }
    Ok(dual.w * (-ln_d).exp())
}

/// Closed-form lower bound on the normalized analytic value.
pub fn analytic_value_bound(params: &RandLBParams) -> f64 {
    let m_over_delta = params.m as f64 / params.delta;
    (E - params.epsilon) * (m_over_delta - params.c_over_delta) / (m_over_delta * (1.0 / params.delta).exp())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetLBReport {
    pub gamma: f64,
    pub sequence: Vec<f64>,
    /// 1-based index of the first nonpositive element.
    pub first_nonpositive: Option<usize>,
    /// Fixed point the sequence approaches when `gamma >= 4`.
    pub limit_alpha: Option<f64>,
}

/// `a_1 = gamma - 1`, `a_i = gamma - gamma / a_{i-1}`, stopping at the first
/// nonpositive element or after `count` elements.
pub fn det_lb_sequence(gamma: f64, count: usize) -> Result<DetLBReport, LbError> {
    if !(gamma >= 1.0 && gamma.is_finite()) || count == 0 {
        return Err(LbError::BadParams(format!("need gamma >= 1 and count >= 1, got {gamma} and {count}")));
    }
    let mut sequence = Vec::with_capacity(count.min(1 << 20));
    let mut a = gamma - 1.0;
    let mut first_nonpositive = None;
    for i in 1..=count {
        if i > 1 {
            a = gamma - gamma / a;
        }
        sequence.push(a);
        if a <= 0.0 {
            first_nonpositive = Some(i);
            break;
        }
    }
    let limit_alpha = (gamma >= 4.0).then(|| (gamma + (gamma * gamma - 4.0 * gamma).sqrt()) / 2.0);
    Ok(DetLBReport { gamma, sequence, first_nonpositive, limit_alpha })
}

/// Robustness forced on any deterministic `(1 + lambda)`-consistent strategy.
pub fn det_tradeoff_bound(lambda: f64) -> Result<f64, LbError> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(LbError::BadParams(format!("lambda must lie in (0, 1), got {lambda}")));
    }
    Ok(2.0 + lambda + 1.0 / lambda)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClaimResult {
    pub name: &'static str,
    pub statement: &'static str,
    pub points: u64,
    pub violations: u64,
    /// Smallest scaled `rhs - lhs` seen on the grid.
    pub min_slack: f64,
    /// Largest scaled `|rhs - lhs|` at the stated extremal points, if any.
    pub equality_gap: Option<f64>,
}

impl ClaimResult {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }

    pub fn equality_detected(&self) -> bool {
        self.equality_gap.is_some_and(|g| g <= CLAIM_TOL)
    }
}

impl fmt::Display for ClaimResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<8} points={:<9} violations={} min_slack={:.3e}",
            self.name, self.points, self.violations, self.min_slack
        )?;
        match self.equality_gap {
            Some(g) => write!(f, " equality_gap={g:.1e}  {}", self.statement),
            None => write!(f, "  {}", self.statement),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClaimsReport {
    pub grid: usize,
    pub claims: Vec<ClaimResult>,
}

impl ClaimsReport {
    pub fn all_hold(&self) -> bool {
        self.claims.iter().all(ClaimResult::holds)
    }
}

const CLAIM_TOL: f64 = 1e-12;
const SECONDARY: usize = 20;

struct ClaimAcc {
    points: u64,
    violations: u64,
    min_slack: f64,
}

impl ClaimAcc {
    fn new() -> Self {
        ClaimAcc { points: 0, violations: 0, min_slack: f64::INFINITY }
    }

    fn push(&mut self, lhs: f64, rhs: f64) {
        let slack = (rhs - lhs) / rhs.abs().max(1.0);
        self.points += 1;
        if slack < -CLAIM_TOL {
            self.violations += 1;
        }
        self.min_slack = self.min_slack.min(slack);
    }
}

fn scaled_gap(lhs: f64, rhs: f64) -> f64 {
    (rhs - lhs).abs() / rhs.abs().max(1.0)
}

/// Points `e^{lo}..=e^{hi}` evenly spaced in the logarithm.
fn log_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
}

fn lambda_grid() -> impl Iterator<Item = f64> + Clone {
    (0..SECONDARY).map(|i| (i as f64 + 0.5) / SECONDARY as f64)
}

fn r_grid() -> impl Iterator<Item = f64> + Clone {
    (1..=SECONDARY).map(|i| i as f64 / SECONDARY as f64)
}

/// Evaluates the inequalities used in the robustness analysis of the
/// randomized learning-augmented strategy on logarithmic grids.
pub fn verify_analysis_claims(grid: usize) -> Result<ClaimsReport, LbError> {
    if grid < 10 {
        return Err(LbError::BadParams(format!("grid resolution must be at least 10, got {grid}")));
    }
    let rhs = |x: f64| x.exp() / x;
    let mut claims = Vec::new();

    // Two families in (beta, lambda, r) with maximizer beta = e^{shift - lambda - r}.
    let family = |name, statement, shift: f64, lhs: &dyn Fn(f64, f64, f64) -> f64| {
        let mut acc = ClaimAcc::new();
        let mut gap: f64 = 0.0;
        for lambda in lambda_grid() {
            for r in r_grid() {
                for beta in log_grid(-6.0, 6.0, grid) {
                    acc.push(lhs(beta, lambda, r), rhs(lambda));
                }
                let beta = (shift - lambda - r).exp();
                gap = gap.max(scaled_gap(lhs(beta, lambda, r), rhs(lambda)));
            }
        }
        ClaimResult {
            name,
            statement,
            points: acc.points,
            violations: acc.violations,
            min_slack: acc.min_slack,
            equality_gap: Some(gap),
        }
    };
    claims.push(family(
        "claim-1",
        "e^(2-r)/b + (ln b + r - 1) e^(2-r)/(l b) <= e^l/l, tight at b = e^(2-l-r)",
        2.0,
        &|b, l, r| (2.0 - r).exp() / b + (b.ln() + r - 1.0) * (2.0 - r).exp() / (l * b),
    ));
    claims.push(family(
        "claim-2",
        "e^(1-r)/b + e^(1-r)(ln b + r)/(l b) <= e^l/l, tight at b = e^(1-l-r)",
        1.0,
        &|b, l, r| (1.0 - r).exp() / b + (1.0 - r).exp() * (b.ln() + r) / (l * b),
    ));

    let single = |name, statement, lo: f64, hi: f64, lhs: &dyn Fn(f64) -> f64, tight: Option<f64>| {
        let mut acc = ClaimAcc::new();
        for x in log_grid(lo, hi, grid) {
            acc.push(lhs(x), rhs(x));
        }
        ClaimResult {
            name,
            statement,
            points: acc.points,
            violations: acc.violations,
            min_slack: acc.min_slack,
            equality_gap: tight.map(|x| scaled_gap(lhs(x), rhs(x))),
        }
    };
    claims.push(single("claim-3", "e (x - ln x) <= e^x/x for x > 0, tight at x = 1", -6.0, 6.0, &|x| E * (x - x.ln()), Some(1.0)));
    claims.push(single("claim-4", "x + e <= e^x/x for x in (0, 1/e]", -6.0, -1.0, &|x| x + E, None));
    claims.push(single(
        "claim-5",
        "1 + e - (ln x + 1)/x <= e^x/x for x in [1/e, 1], tight at x = 1",
        -1.0,
        0.0,
        &|x| 1.0 + E - (x.ln() + 1.0) / x,
        Some(1.0),
    ));
    claims.push(single("claim-6", "x - ln x + e - 1 <= e^x/x for x > 0, tight at x = 1", -6.0, 6.0, &|x| x - x.ln() + E - 1.0, Some(1.0)));
    Ok(ClaimsReport { grid, claims })
}
