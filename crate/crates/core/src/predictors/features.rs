//! Hotel price features and the day-reversal symmetry.

use boostcde::Feature;

use crate::market::{Quote, GAME_MINUTES};

pub const FEATURE_LAYOUT_VERSION: u32 = 1;
pub const FEATURE_COUNT: usize = 66;

/// What an agent knows about prices at a minute boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub minute: u32,
    pub flights: [f64; 8],
    /// Ask of open rooms, clearing price of closed ones.
    pub hotel_price: [f64; 8],
    /// Close minute of rooms already closed.
    pub closed_at: [Option<u32>; 8],
    pub players: usize,
}

impl Snapshot {
    pub fn from_quote(q: &Quote, players: usize) -> Self {
        let mut hotel_price = [0.0; 8];
        let mut closed_at = [None; 8];
        for (h, hq) in q.hotels.iter().enumerate() {
            hotel_price[h] = hq.ask;
            if hq.closed {
                closed_at[h] = Some(hq.close_minute.unwrap_or(q.minute()));
            }
        }
        Self {
            minute: q.minute(),
            flights: q.flights,
            hotel_price,
            closed_at,
            players,
        }
    }

    pub fn is_open(&self, h: usize) -> bool {
        self.closed_at[h].is_none()
    }

    pub fn open_rooms(&self) -> Vec<usize> {
        (0..8).filter(|&h| self.is_open(h)).collect()
    }
}

/// Room index under the day map 1<->4, 2<->3 (same hotel type).
pub fn mirror_room(h: usize) -> usize {
    4 * (h / 4) + 3 - h % 4
}

/// Flight index under in-day `d` <-> out-day `6 - d`.
pub fn mirror_flight(f: usize) -> usize {
    7 - f
}

/// Maps a day-3 or day-4 target onto the equivalent day-2 or day-1 target
/// by reversing the days of every room and swapping in- and outbound
/// flights. Day-1 and day-2 targets are returned unchanged.
pub fn canonicalize(snap: &Snapshot, close: &[u32; 8], target: usize) -> (Snapshot, [u32; 8], usize) {
    if target % 4 < 2 {
        return (snap.clone(), *close, target);
    }
    let mut s = snap.clone();
    let mut c = *close;
    for h in 0..8 {
        let m = mirror_room(h);
        s.hotel_price[m] = snap.hotel_price[h];
        s.closed_at[m] = snap.closed_at[h];
        c[m] = close[h];
    }
    for f in 0..8 {
        s.flights[mirror_flight(f)] = snap.flights[f];
    }
    (s, c, mirror_room(target))
}

/// Feature vector for predicting `target`'s closing price. `close` gives a
/// close minute for every room: actual for closed rooms, actual or sampled
/// for open ones.
pub fn features(snap: &Snapshot, close: &[u32; 8], target: usize) -> Vec<Feature> {
    let mut x = Vec::with_capacity(FEATURE_COUNT);
    let now = snap.minute as f64;
    x.push(Some((GAME_MINUTES - snap.minute.min(GAME_MINUTES)) as f64));
    x.extend(snap.hotel_price.iter().map(|&p| Some(p)));
    x.extend(close.iter().map(|&c| Some(c as f64)));
    x.extend(snap.flights.iter().map(|&p| Some(p)));
    x.extend((0..8).map(|h| (!snap.is_open(h)).then_some(snap.hotel_price[h])));
    x.extend((0..8).map(|h| snap.is_open(h).then_some(snap.hotel_price[h])));
    x.extend(close.iter().map(|&c| Some(c as f64 - close[target] as f64)));
    x.extend(close.iter().map(|&c| Some(c as f64 - now)));
    x.push(Some(snap.players as f64));
    // roster bits stay zero: opponents are not identified
    x.extend(std::iter::repeat(Some(0.0)).take(8));
    debug_assert_eq!(x.len(), FEATURE_COUNT);
    x
}

pub fn feature_names() -> Vec<String> {
    let mut n = vec!["minutes_remaining".to_string()];
    for prefix in ["price", "close_minute"] {
        n.extend((0..8).map(|h| format!("{prefix}_h{h}")));
    }
    n.extend((0..8).map(|f| format!("flight_{f}")));
    for prefix in ["closed_price", "open_ask", "close_minus_target", "minutes_to_close"] {
        n.extend((0..8).map(|h| format!("{prefix}_h{h}")));
    }
    n.push("players".into());
    n.extend((0..8).map(|p| format!("player_{p}")));
    n
}

pub const BANK_KEYS: usize = 8;

/// Model slot for a canonical target: hotel type, outer (day 1) or inner
/// (day 2), and first minute or later.
pub fn bank_key(canonical_target: usize, minute: u32) -> usize {
    debug_assert!(canonical_target % 4 < 2);
    let hotel = canonical_target / 4;
    let inner = canonical_target % 4;
    hotel * 4 + inner * 2 + usize::from(minute > 0)
}

pub fn bank_key_name(key: usize) -> String {
    let hotel = if key / 4 == 0 { "TT" } else { "SS" };
    let day = if (key / 2) % 2 == 0 { "outer" } else { "inner" };
    let when = if key % 2 == 0 { "first" } else { "later" };
    format!("{hotel}-{day}-{when}")
}
