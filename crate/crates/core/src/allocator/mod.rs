//! Client allocation values, purchase optimization and its LP relaxation.
//!
//! Each client picks at most one of the 20 trip shapes (arrival, departure,
//! hotel) and at most one ticket per entertainment type, with tickets only on
//! nights spent in town and never two on the same day. Goods used beyond the
//! holdings must be bought. Hotel rooms are priced with a convex quantity
//! cost, so the relaxation prices hotel units as a stack of increasing
//! marginal costs.

pub mod simplex;

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TacError};
use crate::goods::{
    trip_shapes, ClientPreferences, EntType, Good, GoodVector, HotelType, TravelPackage,
    NUM_GOODS,
};
use simplex::{Column, LpStatus, Simplex};

/// Added to the unit cost of every purchase so that among equally valued
/// plans the one buying fewer goods wins.
pub const PURCHASE_TIE_BREAK: f64 = 1e-6;
const INT_TOL: f64 = 1e-6;
const PRUNE_TOL: f64 = 1e-8;
const REFRESH_PIVOTS: usize = 4000;
pub const DEFAULT_NODE_LIMIT: usize = 20_000;

/// Cost of buying `q` units at base price `p` with impact constant `c`.
pub fn quantity_cost(p: f64, q: u32, c: f64) -> f64 {
    q as f64 * p * c.powi(q.saturating_sub(2) as i32)
}

/// Cost of the `q`-th unit (1-based) under `quantity_cost`.
pub fn marginal_cost(p: f64, q: u32, c: f64) -> f64 {
    quantity_cost(p, q, c) - quantity_cost(p, q - 1, c)
}

/// Estimates the impact constant from per-auction unit bid lists.
///
/// Bids below $1 count as $1. Each auction with at least 18 bids yields the
/// ratio of its 14th to 18th highest bid as an estimate of `c^4`; the
/// geometric mean of the estimates is returned to the power 1/4. Returns
/// `None` when no auction qualifies.
pub fn estimate_c(auctions: &[Vec<f64>]) -> Option<f64> {
    let mut logs = Vec::new();
    for bids in auctions {
        if bids.len() < 18 {
            continue;
        }
        let mut b: Vec<f64> = bids.iter().map(|&x| x.max(1.0)).collect();
        b.sort_by(|x, y| y.total_cmp(x));
        logs.push((b[13] / b[17]).ln());
    }
    if logs.is_empty() {
        return None;
    }
    let mean = logs.iter().sum::<f64>() / logs.len() as f64;
    Some(mean.exp().powf(0.25))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PriceEntry {
    Unavailable,
    /// Unit price and impact constant (1 for linear pricing).
    Price { p: f64, c: f64 },
}

impl PriceEntry {
    pub fn is_available(&self) -> bool {
        matches!(self, PriceEntry::Price { .. })
    }
}

/// Per-good purchase prices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSchedule(pub [PriceEntry; NUM_GOODS]);

impl Default for PriceSchedule {
    fn default() -> Self {
        Self::unavailable()
    }
}

impl PriceSchedule {
    pub fn unavailable() -> Self {
        Self([PriceEntry::Unavailable; NUM_GOODS])
    }

    pub fn get(&self, g: Good) -> PriceEntry {
        self.0[g.index()]
    }

    pub fn set(&mut self, g: Good, p: f64) {
        self.0[g.index()] = PriceEntry::Price { p, c: 1.0 };
    }

    pub fn set_with_impact(&mut self, g: Good, p: f64, c: f64) {
        self.0[g.index()] = PriceEntry::Price { p, c };
    }

    pub fn remove(&mut self, g: Good) {
        self.0[g.index()] = PriceEntry::Unavailable;
    }

    /// Total cost of buying `q` of good `g`; infinite when unavailable.
    pub fn cost(&self, g: Good, q: u32) -> f64 {
        if q == 0 {
            return 0.0;
        }
        match self.get(g) {
            PriceEntry::Unavailable => f64::INFINITY,
            PriceEntry::Price { p, c } => {
                if g.is_hotel() {
                    quantity_cost(p, q, c)
                } else {
                    q as f64 * p
                }
            }
        }
    }
}

/// An allocation of goods to clients together with the required purchases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationResult {
    pub packages: Vec<Option<TravelPackage>>,
    pub purchases: GoodVector,
    pub objective: f64,
    /// False when the node limit stopped the search early.
    pub proven_optimal: bool,
    pub nodes: usize,
}

impl AllocationResult {
    /// Goods the allocation uses.
    pub fn usage(&self) -> GoodVector {
        let mut u = GoodVector::zero();
        for p in self.packages.iter().flatten() {
            for g in p.goods() {
                u.add(g, 1);
            }
        }
        u
    }
}

/// Exact objective of an explicit allocation: utilities minus the cost of
/// goods needed beyond `h`. `None` when a needed good cannot be bought.
pub fn evaluate_allocation(
    clients: &[ClientPreferences],
    packages: &[Option<TravelPackage>],
    h: &GoodVector,
    y: &PriceSchedule,
) -> Option<(f64, GoodVector)> {
    let mut usage = GoodVector::zero();
    let mut utility = 0.0;
    for (prefs, pkg) in clients.iter().zip(packages) {
        if let Some(p) = pkg {
            for g in p.goods() {
                usage.add(g, 1);
            }
            utility += crate::goods::client_utility(prefs, Some(p));
        }
    }
    let mut purchases = GoodVector::zero();
    let mut cost = 0.0;
    for i in 0..NUM_GOODS {
        let need = usage[i].saturating_sub(h[i]);
        if need > 0 {
            let c = y.cost(Good::from_index(i), need);
            if !c.is_finite() {
                return None;
            }
            cost += c;
            purchases[i] = need;
        }
    }
    Some((utility - cost, purchases))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ColKind {
    Trip { client: usize, ad: u8, dd: u8, hotel: HotelType },
    Ticket { client: usize, good: Good },
    /// Purchase of good units; piece 0 covers the first two hotel units or
    /// all units of a linearly priced good, piece `q >= 3` the `q`-th unit.
    Buy { good: usize, piece: u32 },
}

/// A reusable allocation LP for a fixed client set.
///
/// The column set is fixed at construction from the goods that can ever be
/// owned or bought during its lifetime; holdings and prices then change
/// between solves, each solve starting from the previous optimal basis.
#[derive(Debug, Clone)]
pub struct Allocator {
    clients: Vec<ClientPreferences>,
    kinds: Vec<ColKind>,
    buy_cols: Vec<Vec<usize>>,
    goods_row0: usize,
    fresh: Simplex,
    lp: Simplex,
    pivots_at_refresh: usize,
    pub solves: usize,
}

impl Allocator {
    /// `obtainable[g]` must hold for any good that will ever be owned or
    /// bought; `buyable[g]` for any good that will ever have a price.
    pub fn new(
        clients: &[ClientPreferences],
        obtainable: &[bool; NUM_GOODS],
        buyable: &[bool; NUM_GOODS],
    ) -> Self {
        let nc = clients.len();
        let type_row0 = nc;
        let day_row0 = nc + 3 * nc;
        let goods_row0 = nc + 7 * nc;
        let rows = goods_row0 + NUM_GOODS;
        let mut kinds = Vec::new();
        let mut cols = Vec::new();

        for (c, prefs) in clients.iter().enumerate() {
            let mut days_covered = [false; 5];
            for (ad, dd, hotel) in trip_shapes() {
                let mut goods = vec![Good::InFlight(ad), Good::OutFlight(dd)];
                goods.extend((ad..dd).map(|n| Good::Hotel(hotel, n)));
                if !goods.iter().all(|g| obtainable[g.index()]) {
                    continue;
                }
                let mut entries = vec![(c, 1.0)];
                for d in ad..dd {
                    entries.push((day_row0 + 4 * c + d as usize - 1, -1.0));
                    days_covered[d as usize] = true;
                }
                entries.extend(goods.iter().map(|g| (goods_row0 + g.index(), 1.0)));
                cols.push(Column {
                    entries,
                    cost: prefs.base_utility(ad, dd, hotel),
                    lower: 0.0,
                    upper: 1.0,
                });
                kinds.push(ColKind::Trip {
                    client: c,
                    ad,
                    dd,
                    hotel,
                });
            }
            for t in EntType::ALL {
                let ev = prefs.ev[t.index()];
                if ev == 0 {
                    continue;
                }
                for d in 1..=4u8 {
                    let good = Good::Ent(t, d);
                    if !obtainable[good.index()] || !days_covered[d as usize] {
                        continue;
                    }
                    cols.push(Column {
                        entries: vec![
                            (type_row0 + 3 * c + t.index(), 1.0),
                            (day_row0 + 4 * c + d as usize - 1, 1.0),
                            (goods_row0 + good.index(), 1.0),
                        ],
                        cost: ev as f64,
                        lower: 0.0,
                        upper: 1.0,
                    });
                    kinds.push(ColKind::Ticket { client: c, good });
                }
            }
        }

        let mut buy_cols = vec![Vec::new(); NUM_GOODS];
        let max_units = nc as u32;
        for (g, cols_g) in buy_cols.iter_mut().enumerate() {
            if !buyable[g] || max_units == 0 {
                continue;
            }
            let hotel = Good::from_index(g).is_hotel();
            let mut pieces = vec![0u32];
            if hotel {
                pieces.extend(3..=max_units);
            }
            for piece in pieces {
                cols_g.push(cols.len());
                cols.push(Column {
                    entries: vec![(goods_row0 + g, -1.0)],
                    cost: 0.0,
                    lower: 0.0,
                    upper: 0.0,
                });
                kinds.push(ColKind::Buy { good: g, piece });
            }
        }

        let mut b = vec![0.0; rows];
        for c in 0..nc {
            b[c] = 1.0;
            for t in 0..3 {
                b[type_row0 + 3 * c + t] = 1.0;
            }
        }
        let fresh = Simplex::new(rows, &cols, &b);
        Self {
            clients: clients.to_vec(),
            kinds,
            buy_cols,
            goods_row0,
            lp: fresh.clone(),
            fresh,
            pivots_at_refresh: 0,
            solves: 0,
        }
    }

    /// Allocator whose columns cover every good.
    pub fn full(clients: &[ClientPreferences]) -> Self {
        Self::new(clients, &[true; NUM_GOODS], &[true; NUM_GOODS])
    }

    pub fn clients(&self) -> &[ClientPreferences] {
        &self.clients
    }

    fn piece_bounds_and_cost(&self, kind: ColKind, y: &PriceSchedule) -> (f64, f64) {
        let ColKind::Buy { good, piece } = kind else {
            unreachable!()
        };
        let g = Good::from_index(good);
        let max_units = self.clients.len() as u32;
        match y.0[good] {
            PriceEntry::Unavailable => (0.0, 0.0),
            PriceEntry::Price { p, c } => {
                if g.is_hotel() {
                    if piece == 0 {
                        (max_units.min(2) as f64, -(p + PURCHASE_TIE_BREAK))
                    } else {
                        (1.0, -(marginal_cost(p, piece, c) + PURCHASE_TIE_BREAK))
                    }
                } else {
                    (max_units as f64, -(p + PURCHASE_TIE_BREAK))
                }
            }
        }
    }

    fn check_inputs(&self, h: &GoodVector, y: &PriceSchedule) -> Result<()> {
        for i in 0..NUM_GOODS {
            if y.0[i].is_available() && self.buy_cols[i].is_empty() && !self.clients.is_empty() {
                return Err(TacError::InvalidInput(format!(
                    "{} priced but not declared buyable",
                    Good::from_index(i)
                )));
            }
            if let PriceEntry::Price { p, c } = y.0[i] {
                if !(p >= 0.0 && p.is_finite() && c >= 1.0 && c.is_finite()) {
                    return Err(TacError::InvalidInput(format!(
                        "bad price for {}",
                        Good::from_index(i)
                    )));
                }
            }
        }
        let _ = h;
        Ok(())
    }

    /// Loads holdings and prices into the working LP and optimizes.
    fn load_and_solve(&mut self, h: &GoodVector, y: &PriceSchedule) -> Result<()> {
        self.check_inputs(h, y)?;
        if self.lp.iterations - self.pivots_at_refresh > REFRESH_PIVOTS {
            self.lp.clone_from(&self.fresh);
            self.pivots_at_refresh = self.lp.iterations;
        }
        self.solves += 1;
        // Costs first (primal), then bounds and holdings (dual).
        for cols in &self.buy_cols {
            for &j in cols {
                let (_, cost) = self.piece_bounds_and_cost(self.kinds[j], y);
                self.lp.set_cost(j, cost);
            }
        }
        let mut status = self.lp.optimize();
        if status == LpStatus::Optimal {
            for cols in &self.buy_cols {
                for &j in cols {
                    let (ub, _) = self.piece_bounds_and_cost(self.kinds[j], y);
                    self.lp.set_bounds(j, 0.0, ub);
                }
            }
            for i in 0..NUM_GOODS {
                self.lp.set_rhs(self.goods_row0 + i, h[i] as f64);
            }
            status = self.lp.optimize();
        }
        if status != LpStatus::Optimal {
            // Start over from the slack basis.
            self.lp.clone_from(&self.fresh);
            self.pivots_at_refresh = self.lp.iterations;
            for cols in &self.buy_cols {
                for &j in cols {
                    let (ub, cost) = self.piece_bounds_and_cost(self.kinds[j], y);
                    self.lp.set_cost(j, cost);
                    self.lp.set_bounds(j, 0.0, ub);
                }
            }
            for i in 0..NUM_GOODS {
                self.lp.set_rhs(self.goods_row0 + i, h[i] as f64);
            }
            status = self.lp.optimize();
            if status != LpStatus::Optimal {
                return Err(TacError::Lp(format!("{status:?}")));
            }
        }
        Ok(())
    }

    fn tie_break_total(&self, lp: &Simplex) -> f64 {
        let mut units = 0.0;
        for cols in &self.buy_cols {
            for &j in cols {
                units += lp.value(j);
            }
        }
        units * PURCHASE_TIE_BREAK
    }

    /// Value of the LP relaxation of `max v(G + H) - cost(G, Y)`.
    pub fn lp_value(&mut self, h: &GoodVector, y: &PriceSchedule) -> Result<f64> {
        self.load_and_solve(h, y)?;
        Ok(self.lp.objective() + self.tie_break_total(&self.lp))
    }

    fn is_integral(&self, x: &[f64]) -> Option<usize> {
        // most fractional integer-constrained column, lowest index on ties
        let mut best = None;
        let mut best_dist = INT_TOL;
        for (j, kind) in self.kinds.iter().enumerate() {
            if matches!(kind, ColKind::Buy { .. }) {
                continue;
            }
            let f = x[j] - x[j].floor();
            let dist = f.min(1.0 - f);
            if dist > best_dist + 1e-12 {
                best_dist = dist;
                best = Some(j);
            }
        }
        best
    }

    fn packages_from(&self, x: &[f64]) -> Vec<Option<TravelPackage>> {
        let mut trips: Vec<Option<(u8, u8, HotelType)>> = vec![None; self.clients.len()];
        let mut tickets: Vec<Vec<(EntType, u8)>> = vec![Vec::new(); self.clients.len()];
        for (j, kind) in self.kinds.iter().enumerate() {
            if x[j] < 1.0 - INT_TOL {
                continue;
            }
            match *kind {
                ColKind::Trip {
                    client,
                    ad,
                    dd,
                    hotel,
                } => {
                    if trips[client].is_none() {
                        trips[client] = Some((ad, dd, hotel));
                    }
                }
                ColKind::Ticket { client, good } => {
                    if let Good::Ent(t, d) = good {
                        tickets[client].push((t, d));
                    }
                }
                ColKind::Buy { .. } => {}
            }
        }
        trips
            .into_iter()
            .zip(tickets)
            .map(|(trip, mut tk)| {
                let (ad, dd, hotel) = trip?;
                tk.retain(|&(_, d)| d >= ad && d < dd);
                // keep one ticket per day and per type in column order
                let mut kept: Vec<(EntType, u8)> = Vec::new();
                for (t, d) in tk {
                    if !kept.iter().any(|&(t2, d2)| t2 == t || d2 == d) {
                        kept.push((t, d));
                    }
                }
                kept.sort();
                TravelPackage::new(ad, dd, hotel, kept).ok()
            })
            .collect()
    }

    /// Exact `max v(G + H) - cost(G, Y)` by best-bound branch and bound.
    pub fn opt(&mut self, h: &GoodVector, y: &PriceSchedule) -> Result<AllocationResult> {
        self.opt_with_limit(h, y, DEFAULT_NODE_LIMIT)
    }

    pub fn opt_with_limit(
        &mut self,
        h: &GoodVector,
        y: &PriceSchedule,
        node_limit: usize,
    ) -> Result<AllocationResult> {
        if self.clients.is_empty() {
            return Ok(AllocationResult {
                packages: Vec::new(),
                purchases: GoodVector::zero(),
                objective: 0.0,
                proven_optimal: true,
                nodes: 0,
            });
        }
        self.load_and_solve(h, y)?;
        let root = self.lp.clone();
        let root_bound = root.objective();

        // Incumbent from rounding the root solution down.
        let x = root.values();
        let mut best_packages = self.packages_from(&x);
        let (mut best_exact, mut best_purchases) =
            match evaluate_allocation(&self.clients, &best_packages, h, y) {
                Some(v) => v,
                None => {
                    best_packages = vec![None; self.clients.len()];
                    (0.0, GoodVector::zero())
                }
            };
        let mut best_lp = best_exact - PURCHASE_TIE_BREAK * best_purchases.total() as f64;

        #[derive(PartialEq)]
        struct Node {
            bound: f64,
            seq: usize,
            fixes: Vec<(usize, f64)>,
        }
        impl Eq for Node {}
        impl PartialOrd for Node {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }
        impl Ord for Node {
            fn cmp(&self, other: &Self) -> Ordering {
                self.bound
                    .total_cmp(&other.bound)
                    .then(other.seq.cmp(&self.seq))
            }
        }

        let mut heap = BinaryHeap::new();
        heap.push(Node {
            bound: root_bound,
            seq: 0,
            fixes: Vec::new(),
        });
        let mut seq = 1;
        let mut nodes = 0;
        let mut work = root.clone();
        let mut proven = true;
        while let Some(node) = heap.pop() {
            if node.bound <= best_lp + PRUNE_TOL {
                break;
            }
            if nodes >= node_limit {
                proven = false;
                break;
            }
            nodes += 1;
            work.clone_from(&root);
            for &(j, v) in &node.fixes {
                work.set_bounds(j, v, v);
            }
            match work.optimize() {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => continue,
                other => return Err(TacError::Lp(format!("{other:?} in branch and bound"))),
            }
            let z = work.objective();
            if z <= best_lp + PRUNE_TOL {
                continue;
            }
            let x = work.values();
            match self.is_integral(&x) {
                None => {
                    let packages = self.packages_from(&x);
                    if let Some((exact, purchases)) =
                        evaluate_allocation(&self.clients, &packages, h, y)
                    {
                        let lp_equiv = exact - PURCHASE_TIE_BREAK * purchases.total() as f64;
                        if lp_equiv > best_lp + PRUNE_TOL {
                            best_lp = lp_equiv;
                            best_exact = exact;
                            best_packages = packages;
                            best_purchases = purchases;
                        }
                    }
                }
                Some(j) => {
                    for v in [1.0, 0.0] {
                        let mut fixes = node.fixes.clone();
                        fixes.push((j, v));
                        heap.push(Node {
                            bound: z,
                            seq,
                            fixes,
                        });
                        seq += 1;
                    }
                }
            }
        }
        Ok(AllocationResult {
            packages: best_packages,
            purchases: best_purchases,
            objective: best_exact,
            proven_optimal: proven,
            nodes,
        })
    }
}

/// `v(G)`: the best total client utility achievable from owned goods alone.
pub fn value(g: &GoodVector, clients: &[ClientPreferences]) -> Result<f64> {
    Ok(allocate(g, clients)?.objective)
}

/// Best allocation of owned goods alone.
pub fn allocate(g: &GoodVector, clients: &[ClientPreferences]) -> Result<AllocationResult> {
    let held: [bool; NUM_GOODS] = std::array::from_fn(|i| g[i] > 0);
    Allocator::new(clients, &held, &[false; NUM_GOODS]).opt(g, &PriceSchedule::unavailable())
}

/// Integer-optimal purchases for holdings `h` at prices `y`.
pub fn opt(h: &GoodVector, y: &PriceSchedule, clients: &[ClientPreferences]) -> Result<AllocationResult> {
    let (obtainable, buyable) = reach(h, y);
    Allocator::new(clients, &obtainable, &buyable).opt(h, y)
}

/// LP relaxation value for holdings `h` at prices `y`.
pub fn lp_relaxation_value(h: &GoodVector, y: &PriceSchedule, clients: &[ClientPreferences]) -> Result<f64> {
    let (obtainable, buyable) = reach(h, y);
    Allocator::new(clients, &obtainable, &buyable).lp_value(h, y)
}

fn reach(h: &GoodVector, y: &PriceSchedule) -> ([bool; NUM_GOODS], [bool; NUM_GOODS]) {
    let buyable: [bool; NUM_GOODS] = std::array::from_fn(|i| y.0[i].is_available());
    let obtainable = std::array::from_fn(|i| buyable[i] || h[i] > 0);
    (obtainable, buyable)
}
