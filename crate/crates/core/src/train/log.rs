use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One generator step. Field order is the serialized order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub epoch: u64,
    pub lr: f64,
    pub l_ae: f64,
    pub l_gan_g: f64,
    pub l_gan_d: f64,
    pub gp: f64,
    pub l_total: f64,
    pub wall_ms: f64,
}

impl StepRecord {
    /// Copy with wall-time zeroed, for run-to-run comparison.
    pub fn timing_masked(&self) -> StepRecord {
        StepRecord {
            wall_ms: 0.0,
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainLog {
    pub records: Vec<StepRecord>,
}

impl TrainLog {
    pub fn push(&mut self, r: StepRecord) {
        debug_assert!(self.records.last().is_none_or(|l| l.step < r.step));
        self.records.push(r);
    }

    pub fn write_jsonl(&self, w: &mut impl Write) -> Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut *w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_jsonl(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut records = Vec::new();
        for line in BufReader::new(File::open(path)?).lines() {
            let line = line?;
            if !line.trim().is_empty() {
                records.push(serde_json::from_str(&line)?);
            }
        }
        Ok(TrainLog { records })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_order_is_fixed() {
        let r = StepRecord {
            step: 1,
            epoch: 0,
            lr: 5e-4,
            l_ae: 0.5,
            l_gan_g: 0.1,
            l_gan_d: -0.2,
            gp: 0.0,
            l_total: 0.42,
            wall_ms: 3.0,
        };
        let mut buf = Vec::new();
        TrainLog { records: vec![r] }.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let keys: Vec<_> = ["step", "epoch", "lr", "l_ae", "l_gan_g", "l_gan_d", "gp", "l_total", "wall_ms"]
            .iter()
            .map(|k| text.find(&format!("\"{k}\"")).unwrap())
            .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
    }
}
