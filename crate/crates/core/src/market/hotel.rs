use crate::goods::Good;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Unit {
    pub agent: usize,
    pub price: f64,
    pub seq: u64,
}

/// A 16th-price ascending auction over unit bids.
#[derive(Debug, Clone)]
pub(crate) struct HotelAuction {
    pub good: Good,
    pub units: Vec<Unit>,
    pub ask: f64,
    pub closed: bool,
    pub close_price: f64,
    pub close_minute: u32,
}

/// Highest price first, earliest arrival first among equal prices.
fn rank(units: &mut [Unit]) {
    units.sort_by(|a, b| b.price.total_cmp(&a.price).then(a.seq.cmp(&b.seq)));
}

impl HotelAuction {
    pub fn new(good: Good, close_minute: u32) -> Self {
        Self {
            good,
            units: Vec::new(),
            ask: 0.0,
            closed: false,
            close_price: 0.0,
            close_minute,
        }
    }

    pub fn agent_units(&self, agent: usize) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .units
            .iter()
            .filter(|u| u.agent == agent)
            .map(|u| u.price)
            .collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    /// Units `agent` would win if the auction closed with `units` standing.
    pub fn would_win(units: &[Unit], rooms: usize, agent: usize) -> usize {
        let mut u = units.to_vec();
        rank(&mut u);
        u.iter().take(rooms).filter(|x| x.agent == agent).count()
    }

    /// Recomputes the ask as the `rooms`-th highest unit bid, or 0.
    pub fn update_ask(&mut self, rooms: usize) {
        if self.closed {
            return;
        }
        let mut u = self.units.clone();
        rank(&mut u);
        self.ask = if u.len() >= rooms { u[rooms - 1].price } else { 0.0 };
    }

    /// The standing units after replacing `agent`'s bids with `new`. Unchanged
    /// prices keep their arrival order; other units are numbered from `seq`.
    pub fn replaced(&self, agent: usize, new: &[f64], seq: &mut u64) -> (Vec<Unit>, Vec<f64>) {
        let mut old: Vec<Unit> = self.units.iter().filter(|u| u.agent == agent).copied().collect();
        let mut next: Vec<Unit> = self.units.iter().filter(|u| u.agent != agent).copied().collect();
        let mut sorted = new.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let mut added = Vec::new();
        for p in sorted {
            if let Some(k) = old.iter().position(|u| u.price == p) {
                next.push(old.swap_remove(k));
            } else {
                next.push(Unit {
                    agent,
                    price: p,
                    seq: *seq,
                });
                *seq += 1;
                added.push(p);
            }
        }
        (next, added)
    }

    /// Clears the auction: `(price, winners per agent, all unit prices)`.
    pub fn close(&mut self, rooms: usize, floor: f64, agents: usize) -> (f64, Vec<u32>, Vec<f64>) {
        let mut u = self.units.clone();
        rank(&mut u);
        let mut won = vec![0u32; agents];
        let price = if u.is_empty() {
            0.0
        } else if u.len() >= rooms {
            u[rooms - 1].price
        } else {
            u[u.len() - 1].price.max(floor)
        };
        for x in u.iter().take(rooms) {
            won[x.agent] += 1;
        }
        self.closed = true;
        self.close_price = price;
        self.ask = price;
        (price, won, u.iter().map(|x| x.price).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::goods::HotelType;

    fn auction(bids: &[(usize, f64)]) -> HotelAuction {
        let mut a = HotelAuction::new(Good::Hotel(HotelType::Towers, 2), 5);
        for (k, &(agent, price)) in bids.iter().enumerate() {
            a.units.push(Unit {
                agent,
                price,
                seq: k as u64,
            });
        }
        a
    }

    #[test]
    fn earliest_tied_bid_wins_last_room() {
        let mut bids: Vec<(usize, f64)> = (0..15).map(|k| (k % 3, 300.0)).collect();
        bids.push((5, 150.0));
        bids.push((6, 150.0));
        bids.push((7, 100.0));
        let mut a = auction(&bids);
        let (price, won, units) = a.close(16, 1.0, 8);
        assert_eq!(price, 150.0);
        assert_eq!(won, vec![5, 5, 5, 0, 0, 1, 0, 0]);
        assert_eq!(units.len(), 18);
    }

    #[test]
    fn seventeenth_unit_loses() {
        let mut bids: Vec<(usize, f64)> = (0..16).map(|k| (1 + k % 2, 200.0 + k as f64)).collect();
        bids.push((0, 250.0));
        bids.push((0, 100.0));
        let mut a = auction(&bids);
        let (price, won, _) = a.close(16, 1.0, 3);
        assert_eq!(won[0], 1);
        assert_eq!(price, 201.0);
    }

    #[test]
    fn few_bids_pay_lowest_winning() {
        let mut a = auction(&[(0, 80.0), (1, 40.0)]);
        let (price, won, _) = a.close(16, 1.0, 2);
        assert_eq!((price, won), (40.0, vec![1, 1]));
        let mut empty = auction(&[]);
        assert_eq!(empty.close(16, 1.0, 2).0, 0.0);
    }

    #[test]
    fn identical_bids_all_win() {
        let mut a = auction(&(0..16).map(|k| (k % 4, 90.0)).collect::<Vec<_>>());
        let (price, won, _) = a.close(16, 1.0, 4);
        assert_eq!((price, won), (90.0, vec![4, 4, 4, 4]));
    }

    #[test]
    fn unchanged_units_keep_arrival_order() {
        let a = auction(&[(0, 50.0), (0, 60.0), (1, 60.0)]);
        let mut seq = 10;
        let (next, added) = a.replaced(0, &[60.0, 55.0], &mut seq);
        assert_eq!(added, vec![55.0]);
        assert_eq!(seq, 11);
        let kept = next.iter().find(|u| u.agent == 0 && u.price == 60.0).unwrap();
        assert_eq!(kept.seq, 1);
    }
}
