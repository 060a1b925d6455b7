//! The 28 goods, client preferences and travel packages.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Result, TacError};

pub const NUM_GOODS: usize = 28;
pub const NUM_CLIENTS: usize = 8;
pub const NUM_HOTELS: usize = 8;
pub const NUM_FLIGHTS: usize = 8;
pub const NUM_ENT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HotelType {
    /// The premium hotel.
    Towers,
    Shanties,
}

impl HotelType {
    pub const ALL: [HotelType; 2] = [HotelType::Towers, HotelType::Shanties];

    pub fn code(self) -> &'static str {
        match self {
            HotelType::Towers => "TT",
            HotelType::Shanties => "SS",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EntType {
    AlligatorWrestling,
    AmusementPark,
    Museum,
}

impl EntType {
    pub const ALL: [EntType; 3] = [
        EntType::AlligatorWrestling,
        EntType::AmusementPark,
        EntType::Museum,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn code(self) -> &'static str {
        match self {
            EntType::AlligatorWrestling => "AW",
            EntType::AmusementPark => "AP",
            EntType::Museum => "MU",
        }
    }
}

/// A good, identified by auction. Days are 1-based game days.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Good {
    /// Arrival flight on day 1..=4.
    InFlight(u8),
    /// Departure flight on day 2..=5.
    OutFlight(u8),
    /// Hotel room for the night of day 1..=4.
    Hotel(HotelType, u8),
    /// Entertainment ticket on day 1..=4.
    Ent(EntType, u8),
}

impl Good {
    pub fn index(self) -> usize {
        match self {
            Good::InFlight(d) => d as usize - 1,
            Good::OutFlight(d) => 4 + d as usize - 2,
            Good::Hotel(HotelType::Towers, d) => 8 + d as usize - 1,
            Good::Hotel(HotelType::Shanties, d) => 12 + d as usize - 1,
            Good::Ent(t, d) => 16 + t.index() * 4 + d as usize - 1,
        }
    }

    pub fn from_index(i: usize) -> Good {
        match i {
            0..=3 => Good::InFlight(i as u8 + 1),
            4..=7 => Good::OutFlight(i as u8 - 2),
            8..=11 => Good::Hotel(HotelType::Towers, i as u8 - 7),
            12..=15 => Good::Hotel(HotelType::Shanties, i as u8 - 11),
            16..=27 => {
                let k = i - 16;
                Good::Ent(EntType::ALL[k / 4], (k % 4) as u8 + 1)
            }
            _ => panic!("good index {i} out of range"),
        }
    }

    pub fn all() -> impl Iterator<Item = Good> {
        (0..NUM_GOODS).map(Good::from_index)
    }

    pub fn is_flight(self) -> bool {
        matches!(self, Good::InFlight(_) | Good::OutFlight(_))
    }

    pub fn is_hotel(self) -> bool {
        matches!(self, Good::Hotel(..))
    }

    pub fn is_ent(self) -> bool {
        matches!(self, Good::Ent(..))
    }

    pub fn day(self) -> u8 {
        match self {
            Good::InFlight(d) | Good::OutFlight(d) | Good::Hotel(_, d) | Good::Ent(_, d) => d,
        }
    }
}

impl fmt::Display for Good {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Good::InFlight(d) => write!(f, "IN{d}"),
            Good::OutFlight(d) => write!(f, "OUT{d}"),
            Good::Hotel(h, d) => write!(f, "{}{d}", h.code()),
            Good::Ent(t, d) => write!(f, "{}{d}", t.code()),
        }
    }
}

/// Hotel index 0..8 (Towers days 1-4, then Shanties days 1-4) to good.
pub fn hotel_good(h: usize) -> Good {
    Good::from_index(8 + h)
}

pub fn flight_good(f: usize) -> Good {
    Good::from_index(f)
}

pub fn ent_good(e: usize) -> Good {
    Good::from_index(16 + e)
}

/// Integer quantities over all goods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct GoodVector(pub [u32; NUM_GOODS]);

impl GoodVector {
    pub fn zero() -> Self {
        Self([0; NUM_GOODS])
    }

    pub fn get(&self, g: Good) -> u32 {
        self.0[g.index()]
    }

    pub fn set(&mut self, g: Good, v: u32) {
        self.0[g.index()] = v;
    }

    pub fn add(&mut self, g: Good, v: u32) {
        self.0[g.index()] += v;
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn plus(&self, other: &GoodVector) -> GoodVector {
        let mut out = *self;
        for (a, b) in out.0.iter_mut().zip(other.0.iter()) {
            *a += b;
        }
        out
    }
}

impl Index<usize> for GoodVector {
    type Output = u32;
    fn index(&self, i: usize) -> &u32 {
        &self.0[i]
    }
}

impl IndexMut<usize> for GoodVector {
    fn index_mut(&mut self, i: usize) -> &mut u32 {
        &mut self.0[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClientPreferences {
    /// Ideal arrival day, 1..=4.
    pub iad: u8,
    /// Ideal departure day, 2..=5.
    pub idd: u8,
    /// Hotel premium for the Towers.
    pub hp: u32,
    /// Entertainment values indexed by `EntType`.
    pub ev: [u32; 3],
}

impl ClientPreferences {
    pub fn new(iad: u8, idd: u8, hp: u32, ev: [u32; 3]) -> Result<Self> {
        if !(1..=4).contains(&iad) || !(2..=5).contains(&idd) || idd <= iad {
            return Err(TacError::InvalidInput(format!(
                "bad travel days {iad}..{idd}"
            )));
        }
        Ok(Self { iad, idd, hp, ev })
    }

    /// Package value before entertainment.
    pub fn base_utility(&self, ad: u8, dd: u8, hotel: HotelType) -> f64 {
        let penalty = 100 * (ad.abs_diff(self.iad) as u32 + dd.abs_diff(self.idd) as u32);
        let bonus = if hotel == HotelType::Towers { self.hp } else { 0 };
        1000.0 - penalty as f64 + bonus as f64
    }
}

/// A feasible trip with its entertainment assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TravelPackage {
    pub ad: u8,
    pub dd: u8,
    pub hotel: HotelType,
    pub tickets: Vec<(EntType, u8)>,
}

impl TravelPackage {
    pub fn new(ad: u8, dd: u8, hotel: HotelType, tickets: Vec<(EntType, u8)>) -> Result<Self> {
        if !(1..=4).contains(&ad) || !(2..=5).contains(&dd) || dd <= ad {
            return Err(TacError::InvalidInput(format!("bad trip {ad}..{dd}")));
        }
        for (k, &(t, d)) in tickets.iter().enumerate() {
            if d < ad || d >= dd {
                return Err(TacError::InvalidInput(format!(
                    "ticket {}{} outside stay",
                    t.code(),
                    d
                )));
            }
            if tickets[..k].iter().any(|&(t2, d2)| t2 == t || d2 == d) {
                return Err(TacError::InvalidInput(
                    "at most one ticket per type and per day".into(),
                ));
            }
        }
        Ok(Self {
            ad,
            dd,
            hotel,
            tickets,
        })
    }

    /// Goods this package consumes.
    pub fn goods(&self) -> Vec<Good> {
        let mut out = vec![Good::InFlight(self.ad), Good::OutFlight(self.dd)];
        out.extend((self.ad..self.dd).map(|n| Good::Hotel(self.hotel, n)));
        out.extend(self.tickets.iter().map(|&(t, d)| Good::Ent(t, d)));
        out
    }
}

pub fn client_utility(prefs: &ClientPreferences, pkg: Option<&TravelPackage>) -> f64 {
    match pkg {
        None => 0.0,
        Some(p) => {
            let fun: u32 = p.tickets.iter().map(|&(t, _)| prefs.ev[t.index()]).sum();
            prefs.base_utility(p.ad, p.dd, p.hotel) + fun as f64
        }
    }
}

/// The 20 (arrival, departure, hotel) combinations.
pub fn trip_shapes() -> impl Iterator<Item = (u8, u8, HotelType)> {
    HotelType::ALL.into_iter().flat_map(|h| {
        (1..=4u8).flat_map(move |ad| ((ad + 1)..=5u8).map(move |dd| (ad, dd, h)))
    })
}
