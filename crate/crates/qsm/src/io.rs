//! File formats: machine definitions, model files, symbol sequences,
//! JSON reports, and sweep CSVs.
//!
//! All formats round-trip losslessly: floats are written in shortest
//! round-trip decimal form.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::process::EpsilonMachine;
use crate::quantum::KrausModel;
use crate::training::TrainConfig;

/// Completeness tolerance when loading model files. Loose enough to admit
/// operators rounded to a few decimals; freshly trained models pass 1e-10.
pub const MODEL_FILE_COMPLETENESS_TOL: f64 = 5e-3;

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn malformed(path: &Path, reason: impl Into<String>) -> Error {
    Error::MalformedFile {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

// ---------------------------------------------------------------------------
// machine definition documents
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MachineFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub alphabet_size: usize,
    /// State names; the machine's state count is this list's length.
    pub states: Vec<String>,
    pub transitions: Vec<TransitionRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub from: usize,
    pub symbol: usize,
    pub to: usize,
    pub prob: f64,
}

impl MachineFile {
    pub fn to_machine(&self) -> Result<EpsilonMachine> {
        let name = self.name.clone().unwrap_or_else(|| "machine".to_string());
        EpsilonMachine::new(
            name,
            self.states.len(),
            self.alphabet_size,
            self.transitions
                .iter()
                .map(|t| (t.from, t.symbol, t.to, t.prob)),
        )
    }

    pub fn from_machine(machine: &EpsilonMachine) -> Self {
        MachineFile {
            name: Some(machine.name().to_string()),
            alphabet_size: machine.alphabet_size(),
            states: (0..machine.num_states()).map(|s| format!("s{s}")).collect(),
            transitions: machine
                .transition_entries()
                .map(|(from, symbol, to, prob)| TransitionRecord {
                    from,
                    symbol,
                    to,
                    prob,
                })
                .collect(),
        }
    }
}

/// Load and validate a machine definition document.
pub fn read_machine(path: impl AsRef<Path>) -> Result<EpsilonMachine> {
    let path = path.as_ref();
    let doc: MachineFile = read_json(path)?;
    doc.to_machine()
}

pub fn write_machine(path: impl AsRef<Path>, machine: &EpsilonMachine) -> Result<()> {
    write_json(path, &MachineFile::from_machine(machine))
}

// ---------------------------------------------------------------------------
// model files
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub dim: usize,
    pub alphabet_size: usize,
    /// `kraus[x][row][col] = [re, im]`
    pub kraus: Vec<Vec<Vec<[f64; 2]>>>,
    #[serde(default)]
    pub anchor: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<ModelMetadata>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ModelMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ModelFile {
    pub fn from_model(model: &KrausModel, metadata: Option<ModelMetadata>) -> Self {
        ModelFile {
            dim: model.dim(),
            alphabet_size: model.alphabet_size(),
            kraus: model
                .kraus()
                .iter()
                .map(|a| {
                    (0..model.dim())
                        .map(|i| {
                            (0..model.dim())
                                .map(|j| [a[(i, j)].re, a[(i, j)].im])
                                .collect()
                        })
                        .collect()
                })
                .collect(),
            anchor: model.anchor(),
            metadata,
        }
    }

    pub fn to_model(&self, completeness_tol: f64) -> Result<KrausModel> {
        if self.kraus.len() != self.alphabet_size {
            return Err(Error::InvalidInput(format!(
                "model file declares alphabet {} but carries {} operators",
                self.alphabet_size,
                self.kraus.len()
            )));
        }
        let mut kraus = Vec::with_capacity(self.alphabet_size);
        for rows in &self.kraus {
            if rows.len() != self.dim || rows.iter().any(|r| r.len() != self.dim) {
                return Err(Error::InvalidInput(format!(
                    "model operators must be {0}x{0}",
                    self.dim
                )));
            }
            let m = CMatrix::from_fn(self.dim, self.dim, |i, j| {
                Complex64::new(rows[i][j][0], rows[i][j][1])
            });
            kraus.push(m);
        }
        KrausModel::from_kraus(kraus, self.anchor, completeness_tol)
    }
}

/// Load a model file at the default (loose) completeness tolerance.
pub fn read_model(path: impl AsRef<Path>) -> Result<KrausModel> {
    let path = path.as_ref();
    let doc: ModelFile = read_json(path)?;
    doc.to_model(MODEL_FILE_COMPLETENESS_TOL)
}

pub fn write_model(
    path: impl AsRef<Path>,
    model: &KrausModel,
    metadata: Option<ModelMetadata>,
) -> Result<()> {
    write_json(path, &ModelFile::from_model(model, metadata))
}

// ---------------------------------------------------------------------------
// symbol sequences: one ASCII integer per line
// ---------------------------------------------------------------------------

pub fn read_sequence(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let symbol: usize = trimmed
            .parse()
            .map_err(|_| malformed(path, format!("line {}: not an integer: {trimmed:?}", lineno + 1)))?;
        out.push(symbol);
    }
    Ok(out)
}

pub fn write_sequence(path: impl AsRef<Path>, symbols: &[usize]) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::with_capacity(symbols.len() * 2);
    for &s in symbols {
        text.push_str(&s.to_string());
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| io_err(path, e))
}

// ---------------------------------------------------------------------------
// JSON documents
// ---------------------------------------------------------------------------

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| malformed(path, format!("serialization failed: {e}")))?;
    fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| malformed(path, e.to_string()))
}

/// Training run report persisted next to a trained model file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainReportFile {
    pub config: TrainConfig,
    pub final_cost: f64,
    /// Per-restart final costs; diverged restarts are recorded as null.
    pub restart_costs: Vec<Option<f64>>,
    pub iterations_used: Vec<usize>,
}

impl TrainReportFile {
    pub fn new(config: &TrainConfig, result: &crate::training::TrainResult) -> Self {
        TrainReportFile {
            config: config.clone(),
            final_cost: result.final_cost,
            restart_costs: result
                .restart_costs
                .iter()
                .map(|&c| c.is_finite().then_some(c))
                .collect(),
            iterations_used: result.iterations_used.clone(),
        }
    }
}

// ---------------------------------------------------------------------------
// sweep results CSV
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub machine: String,
    pub dim: usize,
    pub quantum_distortion: f64,
    pub classical_bound: f64,
    pub clamped_terms: usize,
    pub seed: u64,
}

const SWEEP_HEADER: &str = "machine,dim,quantum_distortion,classical_bound,clamped_terms,seed";

pub fn write_sweep_csv(path: impl AsRef<Path>, records: &[SweepRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::from(SWEEP_HEADER);
    text.push('\n');
    for r in records {
        if r.machine.contains(',') || r.machine.contains('\n') {
            return Err(Error::InvalidInput(format!(
                "machine label {:?} cannot contain commas or newlines",
                r.machine
            )));
        }
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.machine, r.dim, r.quantum_distortion, r.classical_bound, r.clamped_terms, r.seed
        ));
    }
    fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn read_sweep_csv(path: impl AsRef<Path>) -> Result<Vec<SweepRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == SWEEP_HEADER => {}
        other => {
            return Err(malformed(
                path,
                format!("bad header: expected {SWEEP_HEADER:?}, got {other:?}"),
            ))
        }
    }
    let mut out = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(malformed(path, format!("line {}: expected 6 fields", lineno + 2)));
        }
        let parse_f64 = |s: &str, what: &str| -> Result<f64> {
            let v: f64 = s
                .parse()
                .map_err(|_| malformed(path, format!("line {}: bad {what}: {s:?}", lineno + 2)))?;
            if !v.is_finite() {
                return Err(malformed(
                    path,
                    format!("line {}: non-finite {what}: {s:?}", lineno + 2),
                ));
            }
            Ok(v)
        };
        let record = SweepRecord {
            machine: fields[0].to_string(),
            dim: fields[1]
                .parse()
                .map_err(|_| malformed(path, format!("line {}: bad dim", lineno + 2)))?,
            quantum_distortion: parse_f64(fields[2], "quantum distortion")?,
            classical_bound: parse_f64(fields[3], "classical bound")?,
            clamped_terms: fields[4]
                .parse()
                .map_err(|_| malformed(path, format!("line {}: bad clamped_terms", lineno + 2)))?,
            seed: fields[5]
                .parse()
                .map_err(|_| malformed(path, format!("line {}: bad seed", lineno + 2)))?,
        };
        out.push(record);
    }
    Ok(out)
}
