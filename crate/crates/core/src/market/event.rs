//! Game record events, one JSON object per line.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Result, TacError};
use crate::goods::{ClientPreferences, Good, GoodVector};

use super::MarketConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Buy,
    Sell,
}

/// An order an agent sends to the market.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Action {
    /// Buy `qty` units if `price` is at least the ask.
    BuyFlight { good: Good, price: f64, qty: u32 },
    /// Replace the agent's standing unit bids.
    HotelBid { good: Good, units: Vec<f64> },
    EntOrder { good: Good, side: Side, price: f64, qty: u32 },
    /// Remove the agent's resting orders in one entertainment auction.
    EntWithdraw { good: Good },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HotelQuote {
    /// Current ask, or the clearing price once closed.
    pub ask: f64,
    pub closed: bool,
    pub close_minute: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EntQuote {
    pub bid: Option<f64>,
    pub ask: Option<f64>,
}

/// Public prices at a minute boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quote {
    pub t: u32,
    pub flights: [f64; 8],
    pub hotels: [HotelQuote; 8],
    pub ent: [EntQuote; 12],
}

impl Quote {
    pub fn minute(&self) -> u32 {
        self.t / 60
    }

    /// Ask of a flight or open hotel, or the close price of a closed hotel.
    pub fn price(&self, g: Good) -> f64 {
        let i = g.index();
        match g {
            Good::InFlight(_) | Good::OutFlight(_) => self.flights[i],
            Good::Hotel(..) => self.hotels[i - 8].ask,
            Good::Ent(..) => self.ent[i - 16].ask.unwrap_or(f64::INFINITY),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    Header {
        schema: u32,
        seed: u64,
        agents: Vec<String>,
        /// Free-form model tag per agent.
        models: Vec<String>,
        config: MarketConfig,
    },
    Setup {
        agent: usize,
        clients: Vec<ClientPreferences>,
        endowment: GoodVector,
    },
    /// Hidden flight trend parameters, revealed after the fact.
    Hidden { flight_y: [f64; 8] },
    Quote(Quote),
    Bid { t: u32, agent: usize, action: Action },
    Reject { t: u32, agent: usize, reason: String },
    Trade {
        t: u32,
        good: Good,
        buyer: Option<usize>,
        seller: Option<usize>,
        price: f64,
        qty: u32,
    },
    Close {
        t: u32,
        good: Good,
        price: f64,
        /// All unit bids at close, highest first.
        units: Vec<f64>,
    },
    Score {
        agent: usize,
        utility: f64,
        expenditure: f64,
        score: f64,
    },
}

/// A complete game log.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GameRecord {
    pub events: Vec<Event>,
}

impl GameRecord {
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for e in &self.events {
            serde_json::to_writer(&mut w, e)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self> {
        let mut events = Vec::new();
        for (n, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let e: Event = serde_json::from_str(&line).map_err(|err| {
                TacError::InvalidInput(format!("line {}: {err}", n + 1))
            })?;
            events.push(e);
        }
        let rec = Self { events };
        match rec.events.first() {
            Some(Event::Header { schema, .. }) if *schema == SCHEMA_VERSION => Ok(rec),
            Some(Event::Header { schema, .. }) => Err(TacError::InvalidInput(format!(
                "unsupported schema version {schema}"
            ))),
            _ => Err(TacError::InvalidInput("record has no header".into())),
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self.events.first() {
            Some(Event::Header { seed, .. }) => Some(*seed),
            _ => None,
        }
    }

    pub fn agents(&self) -> Vec<String> {
        match self.events.first() {
            Some(Event::Header { agents, .. }) => agents.clone(),
            _ => Vec::new(),
        }
    }

    pub fn quotes(&self) -> impl Iterator<Item = &Quote> {
        self.events.iter().filter_map(|e| match e {
            Event::Quote(q) => Some(q),
            _ => None,
        })
    }

    /// Clearing price and minute of each hotel, indexed 0..8.
    pub fn hotel_closes(&self) -> [Option<(f64, u32)>; 8] {
        let mut out = [None; 8];
        for e in &self.events {
            if let Event::Close { t, good, price, .. } = e {
                out[good.index() - 8] = Some((*price, t / 60));
            }
        }
        out
    }

    pub fn flight_y(&self) -> Option<[f64; 8]> {
        self.events.iter().find_map(|e| match e {
            Event::Hidden { flight_y } => Some(*flight_y),
            _ => None,
        })
    }

    /// `(utility, expenditure, score)` per agent, if the game finished.
    pub fn scores(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        for e in &self.events {
            if let Event::Score {
                utility,
                expenditure,
                score,
                ..
            } = e
            {
                out.push((*utility, *expenditure, *score));
            }
        }
        out
    }

    pub fn setups(&self) -> Vec<(Vec<ClientPreferences>, GoodVector)> {
        self.events
            .iter()
            .filter_map(|e| match e {
                Event::Setup {
                    clients, endowment, ..
                } => Some((clients.clone(), *endowment)),
                _ => None,
            })
            .collect()
    }
}
