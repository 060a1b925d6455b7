//! The eight specialised hotel models and their training data.

use std::fs;
use std::path::Path;

use boostcde::{train, BinProbabilities, Breakpoints, CdeModel, LabeledExample, TrainConfig};
use serde::{Deserialize, Serialize};

use super::features::{
    bank_key, bank_key_name, canonicalize, features, Snapshot, BANK_KEYS, FEATURE_COUNT,
    FEATURE_LAYOUT_VERSION,
};
use crate::error::{Result, TacError};
use crate::market::GameRecord;

/// Keys with fewer training rows than this stay untrained.
pub const MIN_TRAINING_ROWS: usize = 20;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HotelModelBank {
    pub tag: String,
    pub models: [Option<CdeModel>; BANK_KEYS],
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    layout_version: u32,
    feature_count: usize,
    tag: String,
    files: Vec<Option<String>>,
}

/// Training rows per bank key: one per game, minute and room still open
/// at that minute, labelled with the room's clearing price minus its ask.
pub fn extract_training_set(records: &[GameRecord]) -> [Vec<LabeledExample>; BANK_KEYS] {
    let mut out: [Vec<LabeledExample>; BANK_KEYS] = Default::default();
    for r in records {
        let closes = r.hotel_closes();
        if closes.iter().any(Option::is_none) {
            continue;
        }
        let final_price = closes.map(|c| c.unwrap().0);
        let close = closes.map(|c| c.unwrap().1);
        let players = r.agents().len();
        for q in r.quotes() {
            let snap = Snapshot::from_quote(q, players);
            for h in snap.open_rooms() {
                if close[h] <= snap.minute {
                    continue;
                }
                let (cs, cc, ct) = canonicalize(&snap, &close, h);
                let label = final_price[h] - snap.hotel_price[h];
                out[bank_key(ct, cs.minute)].push(LabeledExample::new(features(&cs, &cc, ct), label));
            }
        }
    }
    out
}

impl HotelModelBank {
    pub fn train(records: &[GameRecord], config: &TrainConfig, tag: &str) -> Result<Self> {
        Self::train_sets(extract_training_set(records), config, tag)
    }

    pub fn train_sets(
        sets: [Vec<LabeledExample>; BANK_KEYS],
        config: &TrainConfig,
        tag: &str,
    ) -> Result<Self> {
        let mut bank = Self {
            tag: tag.to_string(),
            ..Default::default()
        };
        for (key, data) in sets.iter().enumerate() {
            if data.len() < MIN_TRAINING_ROWS {
                log::warn!("{}: {} rows, left untrained", bank_key_name(key), data.len());
                continue;
            }
            log::debug!("training {} on {} rows", bank_key_name(key), data.len());
            bank.models[key] = Some(train(data, config)?);
        }
        Ok(bank)
    }

    pub fn is_complete(&self) -> bool {
        self.models.iter().all(Option::is_some)
    }

    /// Predicted distribution of the price increase of open room `h`, or
    /// `None` when its slot is untrained.
    pub fn predict_increase(
        &self,
        snap: &Snapshot,
        close: &[u32; 8],
        h: usize,
    ) -> Option<(Breakpoints, BinProbabilities)> {
        let (cs, cc, ct) = canonicalize(snap, close, h);
        let model = self.models[bank_key(ct, cs.minute)].as_ref()?;
        let probs = model.predict_cdf(&features(&cs, &cc, ct)).ok()?;
        Some((model.breakpoints.clone(), probs))
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut files = Vec::new();
        for (key, m) in self.models.iter().enumerate() {
            match m {
                Some(m) => {
                    let name = format!("{}.json", bank_key_name(key));
                    fs::write(dir.join(&name), m.to_json()?)?;
                    files.push(Some(name));
                }
                None => files.push(None),
            }
        }
        let manifest = Manifest {
            layout_version: FEATURE_LAYOUT_VERSION,
            feature_count: FEATURE_COUNT,
            tag: self.tag.clone(),
            files,
        };
        fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let manifest: Manifest = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json"))?)?;
        if manifest.layout_version != FEATURE_LAYOUT_VERSION || manifest.feature_count != FEATURE_COUNT {
            return Err(TacError::InvalidInput(format!(
                "feature layout {} with {} features, expected {} with {}",
                manifest.layout_version, manifest.feature_count, FEATURE_LAYOUT_VERSION, FEATURE_COUNT
            )));
        }
        if manifest.files.len() != BANK_KEYS {
            return Err(TacError::InvalidInput(format!(
                "manifest lists {} models, expected {BANK_KEYS}",
                manifest.files.len()
            )));
        }
        let mut bank = Self {
            tag: manifest.tag,
            ..Default::default()
        };
        for (key, file) in manifest.files.iter().enumerate() {
            if let Some(file) = file {
                let m = CdeModel::from_json(&fs::read_to_string(dir.join(file))?)?;
                if m.num_features != FEATURE_COUNT {
                    return Err(TacError::InvalidInput(format!("{file}: wrong feature count")));
                }
                bank.models[key] = Some(m);
            }
        }
        Ok(bank)
    }
}
