use super::event::Side;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Order {
    pub agent: usize,
    pub price: f64,
    pub qty: u32,
    pub seq: u64,
}

/// `(buyer, seller, price, qty)`.
pub(crate) type Fill = (usize, usize, f64, u32);

/// Continuous double auction for one ticket type and day.
#[derive(Debug, Clone, Default)]
pub(crate) struct Cda {
    pub bids: Vec<Order>,
    pub asks: Vec<Order>,
}

impl Cda {
    fn best(orders: &[Order], side: Side) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (k, o) in orders.iter().enumerate() {
            let better = match best {
                None => true,
                Some(b) => {
                    let (p, q) = (o.price, orders[b].price);
                    let strictly = match side {
                        Side::Buy => p > q,
                        Side::Sell => p < q,
                    };
                    strictly || (p == q && o.seq < orders[b].seq)
                }
            };
            if better {
                best = Some(k);
            }
        }
        best
    }

    pub fn best_bid(&self) -> Option<f64> {
        Self::best(&self.bids, Side::Buy).map(|k| self.bids[k].price)
    }

    pub fn best_ask(&self) -> Option<f64> {
        Self::best(&self.asks, Side::Sell).map(|k| self.asks[k].price)
    }

    pub fn resting_sells(&self, agent: usize) -> u32 {
        self.asks.iter().filter(|o| o.agent == agent).map(|o| o.qty).sum()
    }

    pub fn withdraw(&mut self, agent: usize) {
        self.bids.retain(|o| o.agent != agent);
        self.asks.retain(|o| o.agent != agent);
    }

    /// Crosses an incoming order against the book at resting prices. An
    /// agent's own resting orders on the other side are cancelled rather
    /// than traded against. Any remainder rests.
    pub fn submit(&mut self, side: Side, mut order: Order) -> Vec<Fill> {
        let mut fills = Vec::new();
        loop {
            if order.qty == 0 {
                break;
            }
            let (book, opp) = match side {
                Side::Buy => (&mut self.asks, Side::Sell),
                Side::Sell => (&mut self.bids, Side::Buy),
            };
            let Some(k) = Self::best(book, opp) else { break };
            let resting = book[k];
            let crosses = match side {
                Side::Buy => order.price >= resting.price,
                Side::Sell => order.price <= resting.price,
            };
            if !crosses {
                break;
            }
            if resting.agent == order.agent {
                book.remove(k);
                continue;
            }
            let q = order.qty.min(resting.qty);
            order.qty -= q;
            book[k].qty -= q;
            if book[k].qty == 0 {
                book.remove(k);
            }
            fills.push(match side {
                Side::Buy => (order.agent, resting.agent, resting.price, q),
                Side::Sell => (resting.agent, order.agent, resting.price, q),
            });
        }
        if order.qty > 0 {
            match side {
                Side::Buy => self.bids.push(order),
                Side::Sell => self.asks.push(order),
            }
        }
        fills
    }
}
