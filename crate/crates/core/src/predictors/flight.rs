//! Flight price extrapolation: the expected ask increase from time `t` to
//! `T` (fractions of the game) is `m (T^2 - t^2) (y - 10)`.

use serde::{Deserialize, Serialize};

use crate::market::{GameRecord, GAME_SECONDS};

/// Slope for the market's own dynamics: ticks every 28 s on average, each
/// moving by `(x(t) - 10) / 2` in expectation.
pub const THEORETICAL_SLOPE: f64 = GAME_SECONDS as f64 / 112.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlightPriceModel {
    pub m: f64,
}

impl Default for FlightPriceModel {
    fn default() -> Self {
        Self { m: THEORETICAL_SLOPE }
    }
}

fn frac(t: u32) -> f64 {
    t as f64 / GAME_SECONDS as f64
}

impl FlightPriceModel {
    /// Least squares through the origin of observed increases against
    /// `(T^2 - t^2)(y - 10)`; observations are `(t, p_t, T, p_T, y)`.
    pub fn fit_observations(obs: &[(u32, f64, u32, f64, f64)]) -> Self {
        let mut zz = 0.0;
        let mut zd = 0.0;
        for &(t, pt, big_t, p_big, y) in obs {
            let z = (frac(big_t).powi(2) - frac(t).powi(2)) * (y - 10.0);
            zz += z * z;
            zd += z * (p_big - pt);
        }
        let m = if zz > 0.0 { (zd / zz).max(0.0) } else { 0.0 };
        Self { m }
    }

    /// Fits on every record's minute quotes against the hidden trends,
    /// pairing the first quote with each later one.
    pub fn fit(records: &[GameRecord]) -> Self {
        let mut obs = Vec::new();
        for r in records {
            let Some(ys) = r.flight_y() else { continue };
            let quotes: Vec<_> = r.quotes().collect();
            let Some(first) = quotes.first() else { continue };
            for q in &quotes[1..] {
                for f in 0..8 {
                    obs.push((first.t, first.flights[f], q.t, q.flights[f], ys[f]));
                }
            }
        }
        Self::fit_observations(&obs)
    }

    /// Estimates the hidden trend from two observations, clamped to
    /// `[10, 90]`. `None` when no time has elapsed or the slope is zero.
    pub fn estimate_y(&self, first: (u32, f64), latest: (u32, f64)) -> Option<f64> {
        let span = frac(latest.0).powi(2) - frac(first.0).powi(2);
        if latest.0 <= first.0 || self.m <= 0.0 || span <= 0.0 {
            return None;
        }
        Some((10.0 + (latest.1 - first.1) / (self.m * span)).clamp(10.0, 90.0))
    }

    /// Predicted ask at time `target`, never below the latest observation.
    pub fn predict(&self, first: (u32, f64), latest: (u32, f64), target: u32) -> f64 {
        let target = target.min(GAME_SECONDS);
        let Some(y) = self.estimate_y(first, latest) else {
            return latest.1;
        };
        let inc = self.m * (frac(target).powi(2) - frac(latest.0).powi(2)) * (y - 10.0);
        latest.1 + inc.max(0.0)
    }

    /// Mean predicted increase over the next `lookahead` minutes.
    pub fn postpone_cost(&self, first: (u32, f64), latest: (u32, f64), lookahead: u32) -> f64 {
        if lookahead == 0 {
            return 0.0;
        }
        let total: f64 = (1..=lookahead)
            .map(|k| self.predict(first, latest, latest.0 + 60 * k) - latest.1)
            .sum();
        total / lookahead as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_slope_predicts_latest() {
        let m = FlightPriceModel { m: 0.0 };
        assert_eq!(m.predict((0, 300.0), (300, 350.0), 600), 350.0);
    }

    #[test]
    fn flat_trend_predicts_no_increase() {
        let m = FlightPriceModel::default();
        assert_eq!(m.predict((0, 300.0), (300, 290.0), 600), 290.0);
        assert_eq!(m.predict((60, 300.0), (60, 300.0), 600), 300.0);
    }

    #[test]
    fn noiseless_trajectory_is_exact() {
        let (m, y) = (5.0, 70.0);
        let price = |t: u32| 300.0 + m * frac(t).powi(2) * (y - 10.0);
        let model = FlightPriceModel { m };
        for (t1, t2) in [(120, 400), (300, 660), (60, 120)] {
            let got = model.predict((0, price(0)), (t1, price(t1)), t2);
            assert!((got - price(t2)).abs() < 1e-6);
        }
        let obs: Vec<_> = [60, 200, 500]
            .iter()
            .map(|&t| (0, price(0), t, price(t), y))
            .collect();
        assert!((FlightPriceModel::fit_observations(&obs).m - m).abs() < 1e-9);
    }

    #[test]
    fn longer_lookahead_costs_more() {
        let model = FlightPriceModel::default();
        let c2 = model.postpone_cost((0, 300.0), (240, 320.0), 2);
        let c4 = model.postpone_cost((0, 300.0), (240, 320.0), 4);
        assert!(c4 >= c2 && c2 > 0.0);
    }
}
