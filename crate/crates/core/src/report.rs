//! Report documents and trajectory tables.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::game::SignallingGame;
use crate::steady::GridPoint;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckVerdict {
    pub name: String,
    pub pass: bool,
    pub detail: Value,
}

impl CheckVerdict {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Serialize) -> Self {
        Self { name: name.into(), pass, detail: serde_json::to_value(detail).unwrap_or(Value::Null) }
    }
}

/// A command's output. Contains no timestamps, so identical inputs and
/// seeds give byte-identical files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub command: String,
    pub tool_version: String,
    /// SHA-256 over the input files and the flags.
    pub inputs_digest: String,
    pub seed: Option<u64>,
    pub verdicts: Vec<CheckVerdict>,
    pub data: Value,
}

impl AnalysisReport {
    pub fn new(command: &str, inputs_digest: String, seed: Option<u64>) -> Self {
        Self {
            command: command.into(),
            tool_version: TOOL_VERSION.into(),
            inputs_digest,
            seed,
            verdicts: Vec::new(),
            data: Value::Object(Default::default()),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn insert(&mut self, key: &str, value: impl Serialize) {
        if let Value::Object(m) = &mut self.data {
            m.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    /// Plain-text summary: one line per verdict.
    pub fn render(&self) -> String {
        let mut out = format!("{} (version {}, inputs {})\n", self.command, self.tool_version, &self.inputs_digest[..12.min(self.inputs_digest.len())]);
        if let Some(seed) = self.seed {
            out.push_str(&format!("seed {seed}\n"));
        }
        for v in &self.verdicts {
            out.push_str(&format!("{:<40} {}\n", v.name, if v.pass { "PASS" } else { "FAIL" }));
        }
        out
    }
}

/// Hex SHA-256 over length-prefixed parts.
pub fn inputs_digest(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Columns: delta, gamma, residual, iterations, converged, then `pi1` and
/// `pi2` entries in declared order (`pi1[type][signal]`, `pi2[signal][action]`).
pub fn trajectory_csv(game: &SignallingGame, points: &[GridPoint]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> =
        ["delta", "gamma", "residual", "iterations", "converged"].iter().map(|s| s.to_string()).collect();
    for t in game.types() {
        for s in game.signals() {
            header.push(format!("pi1[{t}][{s}]"));
        }
    }
    for s in game.signals() {
        for a in game.actions() {
            header.push(format!("pi2[{s}][{a}]"));
        }
    }
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(&header).map_err(csv_err)?;
    for p in points {
        let mut row = vec![
            p.delta.to_string(),
            p.gamma.to_string(),
            p.residual.to_string(),
            p.iterations.to_string(),
            p.converged.to_string(),
        ];
        row.extend(p.profile.pi1.iter().flatten().map(f64::to_string));
        row.extend(p.profile.pi2.iter().flatten().map(f64::to_string));
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::game::StrategyProfile;

    #[test]
    fn digest_is_stable_and_separates_parts() {
        assert_eq!(inputs_digest(&[b"ab", b"c"]), inputs_digest(&[b"ab", b"c"]));
        assert_ne!(inputs_digest(&[b"ab", b"c"]), inputs_digest(&[b"a", b"bc"]));
        assert_eq!(inputs_digest(&[]).len(), 64);
    }

    #[test]
    fn report_json_round_trip() {
        let mut r = AnalysisReport::new("analyze", inputs_digest(&[b"x"]), Some(7));
        r.verdicts.push(CheckVerdict::new("nash", true, ()));
        r.insert("answer", 42);
        let back: AnalysisReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json(), r.to_json());
        assert!(r.render().contains("nash"));
    }

    #[test]
    fn csv_layout() {
        let g = fixtures::beer_quiche();
        let p = GridPoint {
            delta: 0.9,
            gamma: 0.99,
            profile: StrategyProfile::uniform(&g),
            residual: 0.0,
            iterations: 1,
            converged: true,
        };
        let text = trajectory_csv(&g, &[p]).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "delta,gamma,residual,iterations,converged,pi1[strong][B],pi1[strong][Q],pi1[weak][B],pi1[weak][Q],pi2[B][F],pi2[B][NF],pi2[Q][F],pi2[Q][NF]"
        );
        assert_eq!(lines.next().unwrap().split(',').count(), 13);
    }
}
