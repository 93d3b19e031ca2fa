//! Rental instances and the offline optimum.
//!
//! An instance is a list of rental options `(duration, cost)`; a duration may
//! be unbounded (a purchase). [`OptTable`] tabulates the minimum cost to cover
//! at least `t` days with the usual unbounded-knapsack recurrence and grows
//! its horizon on demand. [`OptOracle`] abstracts the three queries that the
//! online strategies need, so the same strategy code can also run over the
//! symbolic instance built by the button reduction.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Errors raised while building, parsing, or rescaling an instance.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstanceError {
    #[error("instance has no rental options")]
    Empty,
    #[error("option {index} has nonpositive cost {cost}")]
    NonPositiveCost { index: usize, cost: f64 },
    #[error("option {index} has zero duration")]
    ZeroDuration { index: usize },
    #[error("scale factor must be positive and finite, got {0}")]
    BadFactor(f64),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Number of days covered by an option or a solution.
///
/// `Infinite` is a distinct variant and never a large integer; it orders
/// after every finite count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Days {
    Finite(u64),
    Infinite,
}

impl Days {
    pub const ZERO: Days = Days::Finite(0);

    pub fn is_infinite(self) -> bool {
        matches!(self, Days::Infinite)
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Days::Finite(d) => Some(d),
            Days::Infinite => None,
        }
    }

    pub fn saturating_add(self, other: Days) -> Days {
        match (self, other) {
            (Days::Finite(a), Days::Finite(b)) => Days::Finite(a.saturating_add(b)),
            _ => Days::Infinite,
        }
    }

    /// `count` copies of this duration.
    pub fn times(self, count: u64) -> Days {
        match self {
            Days::Finite(d) => Days::Finite(d.saturating_mul(count)),
            Days::Infinite if count == 0 => Days::ZERO,
            Days::Infinite => Days::Infinite,
        }
    }
}

impl PartialOrd for Days {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Days {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Days::Finite(a), Days::Finite(b)) => a.cmp(b),
            (Days::Finite(_), Days::Infinite) => Ordering::Less,
            (Days::Infinite, Days::Finite(_)) => Ordering::Greater,
            (Days::Infinite, Days::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Days {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Days::Finite(d) => write!(f, "{d}"),
            Days::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Days {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") {
            return Ok(Days::Infinite);
        }
        s.parse::<u64>()
            .map(Days::Finite)
            .map_err(|e| format!("bad duration {s:?}: {e}"))
    }
}

/// Day-count arithmetic shared by concrete and symbolic instances.
pub trait DayCount: Clone + Ord + fmt::Debug {
    fn plus(&self, other: &Self) -> Self;
    fn is_unbounded(&self) -> bool;
}

impl DayCount for Days {
    fn plus(&self, other: &Self) -> Self {
        self.saturating_add(*other)
    }

    fn is_unbounded(&self) -> bool {
        self.is_infinite()
    }
}

/// One rental contract.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RentalOption {
    pub duration: Days,
    pub cost: f64,
}

impl RentalOption {
    pub fn new(duration: Days, cost: f64) -> Self {
        Self { duration, cost }
    }

    pub fn finite(days: u64, cost: f64) -> Self {
        Self::new(Days::Finite(days), cost)
    }

    pub fn buy(cost: f64) -> Self {
        Self::new(Days::Infinite, cost)
    }
}

/// A validated option set together with the multiplier that has been applied
/// to the original costs (`current cost = original cost * scale`).
#[derive(Debug, Clone, PartialEq)]
pub struct RentalInstance {
    options: Vec<RentalOption>,
    scale: f64,
}

impl RentalInstance {
    pub fn new(options: Vec<RentalOption>) -> Result<Self, InstanceError> {
        validate(Self { options, scale: 1.0 })
    }

    /// The classic two-option problem: rent for `1` per day or buy for `buy_cost`.
    pub fn rent_or_buy(buy_cost: f64) -> Result<Self, InstanceError> {
        Self::new(vec![RentalOption::finite(1, 1.0), RentalOption::buy(buy_cost)])
    }

    pub fn options(&self) -> &[RentalOption] {
        &self.options
    }

    pub fn len(&self) -> usize {
        self.options.len()
    }

    pub fn is_empty(&self) -> bool {
        self.options.is_empty()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Converts a cost in current units back to the units of the original costs.
    pub fn to_original_units(&self, cost: f64) -> f64 {
        cost / self.scale
    }

    /// Cost of covering a single day: every option covers at least one day,
    /// so this is just the cheapest option.
    pub fn opt_one(&self) -> f64 {
        self.options
            .iter()
            .map(|o| o.cost)
            .fold(f64::INFINITY, f64::min)
    }

    /// Divides every cost by the one-day optimum so that the result has
    /// `opt(1) = 1`.
    pub fn normalize(&self) -> RentalInstance {
        let one = self.opt_one();
        self.scaled_by(1.0 / one)
    }

    pub fn is_normalized(&self) -> bool {
        self.opt_one() >= 1.0
    }

    /// Multiplies every cost by `factor`.
    pub fn rescale(&self, factor: f64) -> Result<RentalInstance, InstanceError> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(InstanceError::BadFactor(factor));
        }
        Ok(self.scaled_by(factor))
    }

    fn scaled_by(&self, factor: f64) -> RentalInstance {
        RentalInstance {
            options: self
                .options
                .iter()
                .map(|o| RentalOption::new(o.duration, o.cost * factor))
                .collect(),
            scale: self.scale * factor,
        }
    }

    /// Parses the line-oriented text format: a count line followed by
    /// `<duration> <cost>` lines, where `duration` may be `inf` and `#`
    /// starts a comment.
    pub fn parse(text: &str) -> Result<RentalInstance, InstanceError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let (count_line, count) = lines.next().ok_or(InstanceError::Empty)?;
        let count: usize = count.parse().map_err(|e| InstanceError::Parse {
            line: count_line,
            message: format!("bad option count {count:?}: {e}"),
        })?;

        let mut options = Vec::with_capacity(count);
        for (line, body) in lines {
            let mut fields = body.split_whitespace();
            let (Some(d), Some(c), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(InstanceError::Parse {
                    line,
                    message: format!("expected `<duration> <cost>`, got {body:?}"),
                });
            };
            let duration: Days = d
                .parse()
                .map_err(|message| InstanceError::Parse { line, message })?;
            let cost: f64 = c.parse().map_err(|e| InstanceError::Parse {
                line,
                message: format!("bad cost {c:?}: {e}"),
            })?;
            options.push(RentalOption::new(duration, cost));
        }
        if options.len() != count {
            return Err(InstanceError::Parse {
                line: count_line,
                message: format!("declared {count} options but found {}", options.len()),
            });
        }
        RentalInstance::new(options)
    }
}

impl fmt::Display for RentalInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.options.len())?;
        for o in &self.options {
            writeln!(f, "{} {}", o.duration, o.cost)?;
        }
        Ok(())
    }
}

/// Checks the instance invariants: at least one option, every cost positive
/// and finite, every duration at least one day.
pub fn validate(instance: RentalInstance) -> Result<RentalInstance, InstanceError> {
    if instance.options.is_empty() {
        return Err(InstanceError::Empty);
    }
    for (index, o) in instance.options.iter().enumerate() {
        if !(o.cost > 0.0 && o.cost.is_finite()) {
            return Err(InstanceError::NonPositiveCost { index, cost: o.cost });
        }
        if o.duration == Days::ZERO {
            return Err(InstanceError::ZeroDuration { index });
        }
    }
    Ok(instance)
}

/// An appended sub-solution: option purchases grouped as `(option index,
/// count)` in ascending index order.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment<D = Days> {
    pub purchases: Vec<(usize, u64)>,
    pub total_cost: f64,
    pub total_days: D,
}

impl<D> Segment<D> {
    pub fn is_empty(&self) -> bool {
        self.purchases.is_empty()
    }

    pub fn purchase_count(&self) -> u64 {
        self.purchases.iter().map(|&(_, n)| n).sum()
    }
}

impl Segment<Days> {
    pub fn empty() -> Self {
        Segment { purchases: Vec::new(), total_cost: 0.0, total_days: Days::ZERO }
    }

    /// Builds a segment from per-option counts, recomputing cost and days.
    pub fn from_counts(options: &[RentalOption], counts: &[(usize, u64)]) -> Self {
        let mut purchases: Vec<(usize, u64)> =
            counts.iter().copied().filter(|&(_, n)| n > 0).collect();
        purchases.sort_by_key(|&(i, _)| i);
        let total_cost = purchases
            .iter()
            .map(|&(i, n)| options[i].cost * n as f64)
            .sum();
        let total_days = purchases
            .iter()
            .fold(Days::ZERO, |acc, &(i, n)| acc.saturating_add(options[i].duration.times(n)));
        Segment { purchases, total_cost, total_days }
    }
}

/// The queries an online strategy makes against the offline optimum.
pub trait OptOracle {
    type Days: DayCount;

    fn zero_days(&self) -> Self::Days;
    fn one_day(&self) -> Self::Days;
    fn option_cost(&self, index: usize) -> f64;
    /// `opt(t)`: minimum cost to cover at least `t` days.
    fn opt_cost(&mut self, t: &Self::Days) -> f64;
    /// A minimum-cost solution covering at least `t` days.
    fn opt_segment(&mut self, t: &Self::Days) -> Segment<Self::Days>;
    /// `b(j)`: the optimal solution covering the most days at cost at most `j`
    /// (empty when `j < opt(1)`).
    fn best_within_budget(&mut self, budget: f64) -> Segment<Self::Days>;
}

const INITIAL_HORIZON: usize = 64;

/// Tabulated `opt(t)` with DP back-pointers.
///
/// Ties between options are broken toward the smallest option index. The
/// table doubles its horizon whenever a query goes past it, so a single table
/// must not be shared between threads while queries are in flight; clone it
/// per worker instead.
#[derive(Debug, Clone)]
pub struct OptTable {
    options: Vec<RentalOption>,
    costs: Vec<f64>,
    choice: Vec<u32>,
    cheapest_infinite: Option<(usize, f64)>,
}

impl OptTable {
    pub fn new(instance: &RentalInstance) -> Self {
        let options = instance.options().to_vec();
        let cheapest_infinite = options
            .iter()
            .enumerate()
            .filter(|(_, o)| o.duration.is_infinite())
            .fold(None, |best: Option<(usize, f64)>, (i, o)| match best {
                Some((_, c)) if c <= o.cost => best,
                _ => Some((i, o.cost)),
            });
        let mut table = OptTable {
            options,
            costs: vec![0.0],
            choice: vec![u32::MAX],
            cheapest_infinite,
        };
        table.extend_to(INITIAL_HORIZON);
        table
    }

    pub fn options(&self) -> &[RentalOption] {
        &self.options
    }

    /// Largest day count currently tabulated.
    pub fn horizon(&self) -> u64 {
        (self.costs.len() - 1) as u64
    }

    pub fn cheapest_infinite(&self) -> Option<f64> {
        self.cheapest_infinite.map(|(_, c)| c)
    }

    /// Tabulated costs `opt(0..=horizon)`.
    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn ensure(&mut self, t: u64) {
        let t = usize::try_from(t).expect("day count exceeds address space");
        if t > self.costs.len() - 1 {
            let target = t.max(2 * (self.costs.len() - 1));
            self.extend_to(target);
        }
    }

    fn extend_to(&mut self, horizon: usize) {
        let start = self.costs.len();
        self.costs.reserve(horizon + 1 - start);
        self.choice.reserve(horizon + 1 - start);
        for t in start..=horizon {
            let mut best = f64::INFINITY;
            let mut arg = u32::MAX;
            for (i, o) in self.options.iter().enumerate() {
                let candidate = match o.duration {
                    Days::Infinite => o.cost,
                    Days::Finite(d) => {
                        let rest = (t as u64).saturating_sub(d) as usize;
                        o.cost + self.costs[rest]
                    }
                };
                if candidate < best {
                    best = candidate;
                    arg = i as u32;
                }
            }
            self.costs.push(best);
            self.choice.push(arg);
        }
    }

    pub fn opt_cost(&mut self, t: u64) -> f64 {
        self.ensure(t);
        self.costs[t as usize]
    }

    pub fn opt_segment(&mut self, t: u64) -> Segment {
        self.ensure(t);
        let mut counts = vec![0u64; self.options.len()];
        let mut rest = t as usize;
        while rest > 0 {
            let i = self.choice[rest] as usize;
            counts[i] += 1;
            match self.options[i].duration {
                Days::Infinite => break,
                Days::Finite(d) => rest = rest.saturating_sub(d as usize),
            }
        }
        let counts: Vec<(usize, u64)> = counts.into_iter().enumerate().collect();
        Segment::from_counts(&self.options, &counts)
    }

    /// `b(j)`. Exact IEEE comparisons against the budget.
    pub fn best_within_budget(&mut self, budget: f64) -> Segment {
        assert!(budget.is_finite(), "budget must be finite, got {budget}");
        if let Some((i, c)) = self.cheapest_infinite {
            if c <= budget {
                return Segment::from_counts(&self.options, &[(i, 1)]);
            }
        }
        match self.max_days_within(budget) {
            0 => Segment::empty(),
            t => self.opt_segment(t),
        }
    }

    /// `max { t : opt(t) <= budget }` over finite `t`, assuming no infinite
    /// option fits the budget. Returns 0 when even one day is unaffordable.
    pub fn max_days_within(&mut self, budget: f64) -> u64 {
        if self.opt_cost(1) > budget {
            return 0;
        }
        // opt is nondecreasing and, without an affordable purchase, eventually
        // exceeds any finite budget.
        let mut lo = 1u64;
        let mut hi = 2u64;
        while self.opt_cost(hi) <= budget {
            lo = hi;
            hi = hi.checked_mul(2).expect("budget covers an unbounded number of days");
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.opt_cost(mid) <= budget {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

impl OptOracle for OptTable {
    type Days = Days;

    fn zero_days(&self) -> Days {
        Days::ZERO
    }

    fn one_day(&self) -> Days {
        Days::Finite(1)
    }

    fn option_cost(&self, index: usize) -> f64 {
        self.options[index].cost
    }

    fn opt_cost(&mut self, t: &Days) -> f64 {
        match *t {
            Days::Finite(t) => OptTable::opt_cost(self, t),
            Days::Infinite => self.cheapest_infinite().unwrap_or(f64::INFINITY),
        }
    }

    fn opt_segment(&mut self, t: &Days) -> Segment {
        match *t {
            Days::Finite(t) => OptTable::opt_segment(self, t),
            Days::Infinite => match self.cheapest_infinite {
                Some((i, _)) => Segment::from_counts(&self.options, &[(i, 1)]),
                None => panic!("no option covers an unbounded horizon"),
            },
        }
    }

    fn best_within_budget(&mut self, budget: f64) -> Segment {
        OptTable::best_within_budget(self, budget)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rent_or_buy() -> RentalInstance {
        RentalInstance::rent_or_buy(4.0).unwrap()
    }

    #[test]
    fn validation() {
        assert!(RentalInstance::new(vec![RentalOption::finite(1, 1.0), RentalOption::buy(4.0)]).is_ok());
        assert_eq!(RentalInstance::new(vec![]), Err(InstanceError::Empty));
        assert!(matches!(
            RentalInstance::new(vec![RentalOption::finite(1, -1.0)]),
            Err(InstanceError::NonPositiveCost { index: 0, .. })
        ));
        assert!(matches!(
            RentalInstance::new(vec![RentalOption::finite(0, 1.0)]),
            Err(InstanceError::ZeroDuration { index: 0 })
        ));
        assert!(RentalInstance::new(vec![RentalOption::finite(1, f64::NAN)]).is_err());
    }

    #[test]
    fn normalize_divides_by_opt_one() {
        let inst = RentalInstance::new(vec![RentalOption::finite(1, 0.5), RentalOption::buy(2.0)]).unwrap();
        let n = inst.normalize();
        assert_eq!(n.options(), rent_or_buy().options());
        assert_eq!(n.scale(), 2.0);
        assert_eq!(n.to_original_units(4.0), 2.0);

        assert_eq!(rent_or_buy().normalize(), rent_or_buy());

        let three = RentalInstance::new(vec![RentalOption::finite(3, 0.6)]).unwrap().normalize();
        assert_eq!(three.options(), &[RentalOption::finite(3, 1.0)]);
    }

    #[test]
    fn opt_on_rent_or_buy() {
        let mut table = OptTable::new(&rent_or_buy());
        assert_eq!(table.opt_cost(0), 0.0);
        assert_eq!(table.opt_cost(3), 3.0);
        assert_eq!(table.opt_cost(5), 4.0);
        assert_eq!(table.opt_cost(1000), 4.0);

        let s = table.opt_segment(3);
        assert_eq!(s.purchases, vec![(0, 3)]);
        assert_eq!((s.total_cost, s.total_days), (3.0, Days::Finite(3)));

        let s = table.opt_segment(5);
        assert_eq!(s.purchases, vec![(1, 1)]);
        assert_eq!((s.total_cost, s.total_days), (4.0, Days::Infinite));

        assert!(table.opt_segment(0).is_empty());
    }

    #[test]
    fn ties_prefer_smallest_index() {
        // Options 0 and 1 are identical; 2 covers two days at the price of two.
        let inst = RentalInstance::new(vec![
            RentalOption::finite(1, 1.0),
            RentalOption::finite(1, 1.0),
            RentalOption::finite(2, 2.0),
        ])
        .unwrap();
        let mut table = OptTable::new(&inst);
        assert_eq!(table.opt_segment(4).purchases, vec![(0, 4)]);
    }

    #[test]
    fn budget_best() {
        let mut table = OptTable::new(&rent_or_buy());
        let s = table.best_within_budget(3.5);
        assert_eq!(s.purchases, vec![(0, 3)]);
        assert_eq!((s.total_cost, s.total_days), (3.0, Days::Finite(3)));

        let s = table.best_within_budget(4.0);
        assert_eq!(s.purchases, vec![(1, 1)]);
        assert_eq!(s.total_days, Days::Infinite);

        assert!(table.best_within_budget(0.5).is_empty());
    }

    #[test]
    fn table_grows_on_demand() {
        let inst = RentalInstance::new(vec![RentalOption::finite(7, 3.0)]).unwrap();
        let mut table = OptTable::new(&inst);
        let before = table.horizon();
        assert_eq!(table.opt_cost(before * 5 + 1), 3.0 * ((before * 5 + 1) as f64 / 7.0).ceil());
        assert!(table.horizon() >= before * 5 + 1);
        // b(30) = ten 7-day options = 70 days.
        assert_eq!(table.best_within_budget(30.0).total_days, Days::Finite(70));
    }

    #[test]
    fn rescale() {
        let factor = std::f64::consts::E.powi(2) / 4.0;
        let scaled = rent_or_buy().rescale(factor).unwrap();
        assert_eq!(scaled.options()[0].cost, factor);
        assert_eq!(scaled.options()[1].cost, 4.0 * factor);
        let mut table = OptTable::new(&scaled);
        assert!((table.opt_cost(5) - std::f64::consts::E.powi(2)).abs() < 1e-12);
        assert_eq!(rent_or_buy().rescale(1.0).unwrap(), rent_or_buy());
        assert!(rent_or_buy().rescale(0.0).is_err());
        assert!(rent_or_buy().rescale(-2.0).is_err());
    }

    #[test]
    fn text_format() {
        let text = "# rent or buy\n2\n1 1\ninf 4  # buy\n";
        let inst = RentalInstance::parse(text).unwrap();
        assert_eq!(inst, rent_or_buy());
        assert_eq!(RentalInstance::parse(&inst.to_string()).unwrap(), inst);
        assert!(RentalInstance::parse("2\n1 1\n").is_err());
        assert!(RentalInstance::parse("1\nx 1\n").is_err());
        assert!(RentalInstance::parse("1\n1 0\n").is_err());
        assert_eq!(RentalInstance::parse(""), Err(InstanceError::Empty));
    }
}
