//! The abstract sequential auction: `n` single-unit items sold one after
//! another, each at a price drawn from a known finite distribution, and a
//! utility over the set of items owned.
//!
//! Holdings and purchase plans are bit masks: bit `j` set means item `j` is
//! owned (or bought). Prices use `f64::INFINITY` for "unavailable".

use std::collections::HashMap;

use rand::Rng;

use crate::error::{Result, TacError};

pub const MAX_ITEMS: usize = 20;
/// Default cap on memoized states for [`exact_value`] and on enumerated
/// price combinations for [`Scenarios::exhaustive`].
pub const DEFAULT_CAP: usize = 1 << 22;
const TIE_TOL: f64 = 1e-12;

/// Finite distribution over nonnegative prices.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceDistribution {
    support: Vec<(f64, f64)>,
}

impl PriceDistribution {
    /// `(price, probability)` pairs. Probabilities must be positive and sum
    /// to 1 within 1e-9.
    pub fn new(support: Vec<(f64, f64)>) -> Result<Self> {
        if support.is_empty() {
            return Err(TacError::InvalidInput("empty price distribution".into()));
        }
        let mut total = 0.0;
        for &(y, p) in &support {
            if !(y >= 0.0 && y.is_finite()) {
                return Err(TacError::InvalidInput(format!("bad price {y}")));
            }
            if !(p > 0.0) {
                return Err(TacError::InvalidInput(format!("bad probability {p}")));
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(TacError::InvalidInput(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self { support })
    }

    pub fn point(y: f64) -> Result<Self> {
        Self::new(vec![(y, 1.0)])
    }

    pub fn support(&self) -> &[(f64, f64)] {
        &self.support
    }

    pub fn mean(&self) -> f64 {
        self.support.iter().map(|&(y, p)| y * p).sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for &(y, p) in &self.support {
            acc += p;
            if u < acc {
                return y;
            }
        }
        self.support[self.support.len() - 1].0
    }
}

#[derive(Debug, Clone)]
pub struct AbstractAuctionProblem {
    dists: Vec<PriceDistribution>,
    /// Utility of every holdings mask.
    utility: Vec<f64>,
}

impl AbstractAuctionProblem {
    /// `utility[mask]` for all `2^n` masks.
    pub fn from_table(dists: Vec<PriceDistribution>, utility: Vec<f64>) -> Result<Self> {
        let n = dists.len();
        if n == 0 || n > MAX_ITEMS {
            return Err(TacError::InvalidInput(format!(
                "item count {n} outside 1..={MAX_ITEMS}"
            )));
        }
        if utility.len() != 1 << n {
            return Err(TacError::InvalidInput(format!(
                "utility table has {} entries, expected {}",
                utility.len(),
                1usize << n
            )));
        }
        if utility.iter().any(|u| !u.is_finite()) {
            return Err(TacError::InvalidInput("non-finite utility".into()));
        }
        Ok(Self { dists, utility })
    }

    pub fn from_fn(dists: Vec<PriceDistribution>, v: impl Fn(&[bool]) -> f64) -> Result<Self> {
        let n = dists.len();
        if n == 0 || n > MAX_ITEMS {
            return Err(TacError::InvalidInput(format!(
                "item count {n} outside 1..={MAX_ITEMS}"
            )));
        }
        let table = (0..1usize << n)
            .map(|m| v(&bits(m as u32, n)))
            .collect();
        Self::from_table(dists, table)
    }

    pub fn n(&self) -> usize {
        self.dists.len()
    }

    pub fn distributions(&self) -> &[PriceDistribution] {
        &self.dists
    }

    pub fn utility(&self, mask: u32) -> f64 {
        self.utility[mask as usize]
    }

    fn check_state(&self, i: usize, h: u32) -> Result<()> {
        if i > self.n() {
            return Err(TacError::InvalidInput(format!("item {i} out of range")));
        }
        if (h as usize) >> self.n() != 0 {
            return Err(TacError::InvalidInput("holdings longer than n".into()));
        }
        Ok(())
    }
}

/// Bit mask to bool vector of length `n`.
pub fn bits(mask: u32, n: usize) -> Vec<bool> {
    (0..n).map(|j| mask >> j & 1 == 1).collect()
}

/// Bool vector to bit mask.
pub fn mask(b: &[bool]) -> u32 {
    b.iter()
        .enumerate()
        .fold(0, |m, (j, &x)| if x { m | 1 << j } else { m })
}

/// Optimal bidding value with maximization and expectation alternating
/// item by item.
pub fn exact_value(problem: &AbstractAuctionProblem, i: usize, h: u32) -> Result<f64> {
    exact_value_capped(problem, i, h, DEFAULT_CAP)
}

pub fn exact_value_capped(
    problem: &AbstractAuctionProblem,
    i: usize,
    h: u32,
    cap: usize,
) -> Result<f64> {
    problem.check_state(i, h)?;
    let remaining = problem.n() - i;
    if remaining >= usize::BITS as usize - 1 || (remaining + 1) << remaining > cap {
        return Err(TacError::TooLarge(format!(
            "{remaining} remaining items exceed state cap {cap}"
        )));
    }
    let mut memo = HashMap::new();
    Ok(exact_rec(problem, i, h, &mut memo))
}

fn exact_rec(
    problem: &AbstractAuctionProblem,
    i: usize,
    h: u32,
    memo: &mut HashMap<(usize, u32), f64>,
) -> f64 {
    if i == problem.n() {
        return problem.utility(h);
    }
    if let Some(&v) = memo.get(&(i, h)) {
        return v;
    }
    let lose = exact_rec(problem, i + 1, h, memo);
    let win = if h >> i & 1 == 1 {
        lose
    } else {
        exact_rec(problem, i + 1, h | 1 << i, memo)
    };
    let support = problem.dists[i].support();
    let v = best_threshold(support.iter().map(|&(y, p)| (p, y, win - y, lose)));
    memo.insert((i, h), v);
    v
}

/// `max_r sum_k w_k * (r >= y_k ? win_k : lose_k)` over candidate bids: the
/// distinct prices and one bid below all of them.
fn best_threshold(terms: impl Iterator<Item = (f64, f64, f64, f64)>) -> f64 {
    let terms: Vec<(f64, f64, f64, f64)> = terms.collect();
    let mut candidates: Vec<f64> = terms.iter().map(|t| t.1).collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let below = candidates.first().copied().unwrap_or(0.0) - 1.0;
    std::iter::once(below)
        .chain(candidates)
        .map(|r| {
            terms
                .iter()
                .map(|&(w, y, win, lose)| w * if r >= y { win } else { lose })
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Purchases among items `i..` maximizing `v(G + H) - G . Y`, with ties
/// broken towards the lexicographically smallest plan (item 0 first).
/// Items already held or priced at infinity are never bought.
pub fn opt_purchases(
    problem: &AbstractAuctionProblem,
    h: u32,
    i: usize,
    y: &[f64],
) -> Result<(u32, f64)> {
    problem.check_state(i, h)?;
    if y.len() != problem.n() {
        return Err(TacError::InvalidInput(format!(
            "price vector has {} entries, expected {}",
            y.len(),
            problem.n()
        )));
    }
    if y.iter().any(|&p| p.is_nan() || p < 0.0) {
        return Err(TacError::InvalidInput("prices must be nonnegative".into()));
    }
    Ok(opt_unchecked(problem, h, i, y))
}

fn opt_unchecked(problem: &AbstractAuctionProblem, h: u32, i: usize, y: &[f64]) -> (u32, f64) {
    let free: Vec<usize> = (i..problem.n())
        .filter(|&j| h >> j & 1 == 0 && y[j].is_finite())
        .collect();
    let mut best = (0u32, problem.utility(h));
    for sub in 1..1u32 << free.len() {
        let mut g = 0u32;
        let mut cost = 0.0;
        for (k, &j) in free.iter().enumerate() {
            if sub >> k & 1 == 1 {
                g |= 1 << j;
                cost += y[j];
            }
        }
        let obj = problem.utility(h | g) - cost;
        let scale = 1.0 + obj.abs().max(best.1.abs());
        if obj > best.1 + TIE_TOL * scale
            || (obj >= best.1 - TIE_TOL * scale && lex_less(g, best.0))
        {
            best = (g, obj);
        }
    }
    best
}

/// Lexicographic order on plans read as vectors `(g_0, g_1, ...)`.
fn lex_less(a: u32, b: u32) -> bool {
    a.reverse_bits() < b.reverse_bits()
}

/// Weighted complete price vectors for the items after some item `i`.
#[derive(Debug, Clone)]
pub struct Scenarios {
    /// `(weight, prices)`; weights sum to `total`.
    pub items: Vec<(f64, Vec<f64>)>,
    pub total: f64,
}

impl Scenarios {
    /// `count` independent draws from the product distribution of items
    /// `i..`, each of weight 1. Items before `i` are unavailable.
    pub fn sampled<R: Rng + ?Sized>(
        problem: &AbstractAuctionProblem,
        i: usize,
        count: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if count == 0 {
            return Err(TacError::InvalidInput("sample count must be positive".into()));
        }
        let n = problem.n();
        let w = 1.0;
        let items = (0..count)
            .map(|_| {
                let y = (0..n)
                    .map(|j| {
                        if j < i {
                            f64::INFINITY
                        } else {
                            problem.dists[j].sample(rng)
                        }
                    })
                    .collect();
                (w, y)
            })
            .collect();
        Ok(Self {
            items,
            total: count as f64,
        })
    }

    /// Every support combination of items `i..` with its probability.
    pub fn exhaustive(problem: &AbstractAuctionProblem, i: usize, cap: usize) -> Result<Self> {
        let n = problem.n();
        let mut total: usize = 1;
        for d in &problem.dists[i.min(n)..] {
            total = total.saturating_mul(d.support().len());
        }
        if total > cap {
            return Err(TacError::TooLarge(format!(
                "{total} price combinations exceed cap {cap}"
            )));
        }
        let mut items = vec![(1.0, vec![f64::INFINITY; n])];
        for j in i..n {
            let mut next = Vec::with_capacity(items.len() * problem.dists[j].support().len());
            for (w, y) in &items {
                for &(p, q) in problem.dists[j].support() {
                    let mut y2 = y.clone();
                    y2[j] = p;
                    next.push((w * q, y2));
                }
            }
            items = next;
        }
        Ok(Self { items, total: 1.0 })
    }

    /// A single scenario at the distribution means.
    pub fn expected(problem: &AbstractAuctionProblem, i: usize) -> Self {
        let y = (0..problem.n())
            .map(|j| {
                if j < i {
                    f64::INFINITY
                } else {
                    problem.dists[j].mean()
                }
            })
            .collect();
        Self {
            items: vec![(1.0, y)],
            total: 1.0,
        }
    }
}

/// Win and lose branch objectives for one scenario.
fn branches(problem: &AbstractAuctionProblem, i: usize, h: u32, y: &[f64]) -> (f64, f64) {
    let lose = opt_unchecked(problem, h, i + 1, y).1;
    let win = if h >> i & 1 == 1 {
        lose
    } else {
        opt_unchecked(problem, h | 1 << i, i + 1, y).1
    };
    (win, lose)
}

/// Value with all later bids replaced by perfect-information purchases,
/// averaged over `scenarios`, which must price items `i..`.
pub fn value_est(
    problem: &AbstractAuctionProblem,
    i: usize,
    h: u32,
    scenarios: &Scenarios,
) -> Result<f64> {
    problem.check_state(i, h)?;
    if i == problem.n() {
        return Ok(problem.utility(h));
    }
    let terms: Vec<_> = scenarios
        .items
        .iter()
        .map(|(w, y)| {
            let (win, lose) = branches(problem, i, h, y);
            (*w, y[i], win - y[i], lose)
        })
        .collect();
    Ok(best_threshold(terms.into_iter()) / scenarios.total)
}

pub fn value_est_sampled<R: Rng + ?Sized>(
    problem: &AbstractAuctionProblem,
    i: usize,
    h: u32,
    count: usize,
    rng: &mut R,
) -> Result<f64> {
    problem.check_state(i, h)?;
    if i == problem.n() {
        return Ok(problem.utility(h));
    }
    let s = Scenarios::sampled(problem, i, count, rng)?;
    value_est(problem, i, h, &s)
}

pub fn value_est_exhaustive(problem: &AbstractAuctionProblem, i: usize, h: u32) -> Result<f64> {
    problem.check_state(i, h)?;
    if i == problem.n() {
        return Ok(problem.utility(h));
    }
    let s = Scenarios::exhaustive(problem, i, DEFAULT_CAP)?;
    value_est(problem, i, h, &s)
}

/// Like [`value_est`] but later items are bought at their mean prices;
/// item `i` keeps its full price distribution.
pub fn value_est_ev(problem: &AbstractAuctionProblem, i: usize, h: u32) -> Result<f64> {
    problem.check_state(i, h)?;
    if i == problem.n() {
        return Ok(problem.utility(h));
    }
    let ev = Scenarios::expected(problem, i);
    let (win, lose) = branches(problem, i, h, &ev.items[0].1);
    let support = problem.dists[i].support();
    Ok(best_threshold(
        support.iter().map(|&(y, p)| (p, y, win - y, lose)),
    ))
}

/// Average difference between the best profit with and without one more
/// unit of item `i`, over `scenarios`.
pub fn marginal_bid_with(
    problem: &AbstractAuctionProblem,
    i: usize,
    h: u32,
    scenarios: &Scenarios,
) -> Result<f64> {
    problem.check_state(i, h)?;
    if i >= problem.n() {
        return Err(TacError::InvalidInput(format!("item {i} is not open")));
    }
    let mut total = 0.0;
    for (w, y) in &scenarios.items {
        let mut y = y.clone();
        y[i] = f64::INFINITY;
        let (win, lose) = branches(problem, i, h, &y);
        total += w * (win - lose);
    }
    Ok(total / scenarios.total)
}

pub fn marginal_bid<R: Rng + ?Sized>(
    problem: &AbstractAuctionProblem,
    i: usize,
    h: u32,
    count: usize,
    rng: &mut R,
) -> Result<f64> {
    problem.check_state(i, h)?;
    if i >= problem.n() {
        return Err(TacError::InvalidInput(format!("item {i} is not open")));
    }
    let s = Scenarios::sampled(problem, i, count, rng)?;
    marginal_bid_with(problem, i, h, &s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(support: Vec<(f64, f64)>) -> AbstractAuctionProblem {
        AbstractAuctionProblem::from_table(
            vec![PriceDistribution::new(support).unwrap()],
            vec![0.0, 10.0],
        )
        .unwrap()
    }

    #[test]
    fn single_item_values() {
        assert_eq!(exact_value(&single(vec![(5.0, 1.0)]), 0, 0).unwrap(), 5.0);
        assert_eq!(
            exact_value(&single(vec![(5.0, 0.5), (15.0, 0.5)]), 0, 0).unwrap(),
            2.5
        );
        assert_eq!(exact_value(&single(vec![(5.0, 1.0)]), 1, 1).unwrap(), 10.0);
    }

    #[test]
    fn rejects_bad_distributions() {
        assert!(PriceDistribution::new(vec![(1.0, 0.5)]).is_err());
        assert!(PriceDistribution::new(vec![(1.0, 0.0), (2.0, 1.0)]).is_err());
        assert!(PriceDistribution::new(vec![(-1.0, 1.0)]).is_err());
    }

    #[test]
    fn lexicographic_ties_buy_less() {
        let d = || PriceDistribution::point(1.0).unwrap();
        // either item alone is worth 5 at price 5
        let p = AbstractAuctionProblem::from_table(vec![d(), d()], vec![0.0, 5.0, 5.0, 5.0]).unwrap();
        let (g, obj) = opt_purchases(&p, 0, 0, &[5.0, 5.0]).unwrap();
        assert_eq!((g, obj), (0, 0.0));
        let (g, obj) = opt_purchases(&p, 0, 0, &[4.0, 4.0]).unwrap();
        assert_eq!((g, obj), (0b10, 1.0));
    }

    #[test]
    fn exact_cap_is_enforced() {
        let dists = vec![PriceDistribution::point(1.0).unwrap(); 12];
        let p = AbstractAuctionProblem::from_fn(dists, |_| 0.0).unwrap();
        assert!(matches!(
            exact_value_capped(&p, 0, 0, 1000),
            Err(TacError::TooLarge(_))
        ));
    }
}
