//! Empirical closing-price tables from past games.

use serde::{Deserialize, Serialize};

use crate::market::GameRecord;

/// Closing prices and minutes per hotel room.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HistoricalPriceTable {
    pub rooms: [Vec<(f64, u32)>; 8],
}

impl HistoricalPriceTable {
    pub fn from_records(records: &[GameRecord]) -> Self {
        let mut t = Self::default();
        for r in records {
            t.add_record(r);
        }
        t
    }

    pub fn add_record(&mut self, record: &GameRecord) {
        for (h, c) in record.hotel_closes().iter().enumerate() {
            if let Some((price, minute)) = c {
                self.rooms[h].push((*price, *minute));
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.rooms.iter().all(Vec::is_empty)
    }

    pub fn prices(&self, h: usize) -> Vec<f64> {
        self.rooms[h].iter().map(|e| e.0).collect()
    }

    /// Prices of room `h` that closed at `minute`, or all of its prices when
    /// none did.
    pub fn prices_at(&self, h: usize, minute: u32) -> Vec<f64> {
        let v: Vec<f64> = self.rooms[h]
            .iter()
            .filter(|e| e.1 == minute)
            .map(|e| e.0)
            .collect();
        if v.is_empty() {
            self.prices(h)
        } else {
            v
        }
    }
}
