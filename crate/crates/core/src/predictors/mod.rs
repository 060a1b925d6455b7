//! Price beliefs: hotel closing-price predictors, the closing-order
//! sampler and the flight price model.

pub mod bank;
pub mod baselines;
pub mod features;
pub mod flight;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use boostcde::{sample_from, BinProbabilities, Breakpoints};
use rand::seq::SliceRandom;
use rand::Rng;

pub use bank::{extract_training_set, HotelModelBank};
pub use baselines::HistoricalPriceTable;
pub use features::{bank_key, canonicalize, features, Snapshot};
pub use flight::FlightPriceModel;

use crate::error::TacError;
use crate::market::GAME_MINUTES;

/// A predicted closing price for one hotel room, never below `floor`.
#[derive(Debug, Clone, PartialEq)]
pub enum PricePrediction {
    Point(f64),
    /// Uniform over past prices.
    Empirical { floor: f64, values: Vec<f64> },
    /// `floor` plus the positive part of a learned price increase.
    Learned {
        floor: f64,
        breakpoints: Breakpoints,
        probs: BinProbabilities,
    },
}

impl PricePrediction {
    pub fn floor(&self) -> f64 {
        match self {
            PricePrediction::Point(p) => *p,
            PricePrediction::Empirical { floor, .. } | PricePrediction::Learned { floor, .. } => *floor,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            PricePrediction::Point(p) => *p,
            PricePrediction::Empirical { floor, values } => match values.choose(rng) {
                Some(&v) => v.max(*floor),
                None => *floor,
            },
            PricePrediction::Learned {
                floor,
                breakpoints,
                probs,
            } => floor + sample_from(breakpoints, probs, rng).max(0.0),
        }
    }

    /// Point estimate: the floored mean of past prices, or the mean of the
    /// floored learned distribution.
    pub fn mean(&self) -> f64 {
        match self {
            PricePrediction::Point(p) => *p,
            PricePrediction::Empirical { floor, values } => {
                if values.is_empty() {
                    *floor
                } else {
                    (values.iter().sum::<f64>() / values.len() as f64).max(*floor)
                }
            }
            PricePrediction::Learned {
                floor,
                breakpoints,
                probs,
            } => floor + positive_part_mean(breakpoints, probs),
        }
    }
}

/// `E[max(0, Y)]` for a piecewise-uniform density.
fn positive_part_mean(bp: &Breakpoints, probs: &BinProbabilities) -> f64 {
    if bp.is_degenerate() {
        return bp.min().max(0.0);
    }
    let mut total = 0.0;
    for j in 0..probs.bins() {
        let (lo, hi) = (bp.get(j), bp.get(j + 1));
        let mass = probs.mass(j);
        if hi <= 0.0 || mass <= 0.0 {
            continue;
        }
        total += if lo >= 0.0 {
            mass * (lo + hi) / 2.0
        } else {
            mass * hi * hi / (2.0 * (hi - lo))
        };
    }
    total.max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PredictorVariant {
    LearnedS,
    LearnedEv,
    CondlS,
    CondlEv,
    SimpleS,
    SimpleEv,
    CurrentBid,
}

impl PredictorVariant {
    pub const ALL: [PredictorVariant; 7] = [
        PredictorVariant::LearnedS,
        PredictorVariant::LearnedEv,
        PredictorVariant::CondlS,
        PredictorVariant::CondlEv,
        PredictorVariant::SimpleS,
        PredictorVariant::SimpleEv,
        PredictorVariant::CurrentBid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PredictorVariant::LearnedS => "learned_s",
            PredictorVariant::LearnedEv => "learned_ev",
            PredictorVariant::CondlS => "condl_s",
            PredictorVariant::CondlEv => "condl_ev",
            PredictorVariant::SimpleS => "simple_s",
            PredictorVariant::SimpleEv => "simple_ev",
            PredictorVariant::CurrentBid => "current_bid",
        }
    }

    /// Whether scenarios use expected prices rather than samples.
    pub fn is_ev(self) -> bool {
        !matches!(
            self,
            PredictorVariant::LearnedS | PredictorVariant::CondlS | PredictorVariant::SimpleS
        )
    }

    pub fn needs_bank(self) -> bool {
        matches!(self, PredictorVariant::LearnedS | PredictorVariant::LearnedEv)
    }

    pub fn needs_table(self) -> bool {
        matches!(
            self,
            PredictorVariant::CondlS
                | PredictorVariant::CondlEv
                | PredictorVariant::SimpleS
                | PredictorVariant::SimpleEv
        )
    }

    /// The point-estimate counterpart.
    pub fn ev(self) -> Self {
        match self {
            PredictorVariant::LearnedS => PredictorVariant::LearnedEv,
            PredictorVariant::CondlS => PredictorVariant::CondlEv,
            PredictorVariant::SimpleS => PredictorVariant::SimpleEv,
            v => v,
        }
    }
}

impl fmt::Display for PredictorVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PredictorVariant {
    type Err = TacError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| TacError::Config(format!("unknown predictor variant {s:?}")))
    }
}

/// Close minutes for every room: actual ones for closed rooms and a
/// uniformly random assignment of the remaining slots to open rooms.
pub fn sample_closing_order<R: Rng + ?Sized>(snap: &Snapshot, rng: &mut R) -> [u32; 8] {
    let open = snap.open_rooms();
    let mut slots: Vec<u32> = (GAME_MINUTES - open.len() as u32..GAME_MINUTES).collect();
    slots.shuffle(rng);
    let mut close = [0; 8];
    for h in 0..8 {
        if let Some(m) = snap.closed_at[h] {
            close[h] = m;
        }
    }
    for (&h, &m) in open.iter().zip(&slots) {
        close[h] = m;
    }
    close
}

/// A hotel price predictor of one variant with the data it needs.
#[derive(Debug, Clone)]
pub struct Predictor {
    pub variant: PredictorVariant,
    bank: Option<Arc<HotelModelBank>>,
    table: Option<Arc<HistoricalPriceTable>>,
}

impl Predictor {
    pub fn new(
        variant: PredictorVariant,
        bank: Option<Arc<HotelModelBank>>,
        table: Option<Arc<HistoricalPriceTable>>,
    ) -> Self {
        if variant.needs_bank() && bank.as_ref().map_or(true, |b| !b.is_complete()) {
            log::warn!("{variant}: incomplete model bank, missing slots predict the current price");
        }
        if variant.needs_table() && table.as_ref().map_or(true, |t| t.is_empty()) {
            log::warn!("{variant}: empty price table, predicting the current price");
        }
        Self { variant, bank, table }
    }

    pub fn current_bid() -> Self {
        Self::new(PredictorVariant::CurrentBid, None, None)
    }

    pub fn bank(&self) -> Option<&Arc<HotelModelBank>> {
        self.bank.as_ref()
    }

    pub fn table(&self) -> Option<&Arc<HistoricalPriceTable>> {
        self.table.as_ref()
    }

    /// Prediction for room `h` given close minutes for every room.
    pub fn predict(&self, snap: &Snapshot, close: &[u32; 8], h: usize) -> PricePrediction {
        let floor = snap.hotel_price[h];
        if !snap.is_open(h) {
            return PricePrediction::Point(floor);
        }
        match self.variant {
            PredictorVariant::CurrentBid => PricePrediction::Point(floor),
            PredictorVariant::SimpleS | PredictorVariant::SimpleEv => match &self.table {
                Some(t) if !t.rooms[h].is_empty() => PricePrediction::Empirical {
                    floor,
                    values: t.prices(h),
                },
                _ => PricePrediction::Point(floor),
            },
            PredictorVariant::CondlS | PredictorVariant::CondlEv => match &self.table {
                Some(t) if !t.rooms[h].is_empty() => PricePrediction::Empirical {
                    floor,
                    values: t.prices_at(h, close[h]),
                },
                _ => PricePrediction::Point(floor),
            },
            PredictorVariant::LearnedS | PredictorVariant::LearnedEv => {
                let Some(bank) = &self.bank else {
                    return PricePrediction::Point(floor);
                };
                match bank.predict_increase(snap, close, h) {
                    Some((breakpoints, probs)) => PricePrediction::Learned {
                        floor,
                        breakpoints,
                        probs,
                    },
                    None => PricePrediction::Point(floor),
                }
            }
        }
    }

    /// One scenario: a closing order and a price per room. Sampling
    /// variants draw prices; point variants use the mean given the order.
    /// Closed rooms keep their clearing price.
    pub fn scenario<R: Rng + ?Sized>(&self, snap: &Snapshot, rng: &mut R) -> ([u32; 8], [f64; 8]) {
        let close = sample_closing_order(snap, rng);
        let mut prices = snap.hotel_price;
        for h in snap.open_rooms() {
            let pred = self.predict(snap, &close, h);
            prices[h] = if self.variant.is_ev() {
                pred.mean()
            } else {
                pred.sample(rng)
            };
        }
        (close, prices)
    }

    /// Mean price per room averaged over `orders` sampled closing orders.
    pub fn expected_prices<R: Rng + ?Sized>(&self, snap: &Snapshot, orders: usize, rng: &mut R) -> [f64; 8] {
        let orders = orders.max(1);
        let mut total = [0.0; 8];
        for _ in 0..orders {
            let close = sample_closing_order(snap, rng);
            for (h, t) in total.iter_mut().enumerate() {
                *t += self.predict(snap, &close, h).mean();
            }
        }
        std::array::from_fn(|h| (total[h] / orders as f64).max(snap.hotel_price[h]))
    }
}
