//! Command-line orchestration: subcommands, experiment sweeps, and result
//! persistence. This is the only module that touches the filesystem
//! directly besides `io`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::bound::classical_lower_bound;
use crate::distortion::{distortion, EvalProtocol};
use crate::error::{Error, Result};
use crate::io;
use crate::process::EpsilonMachine;
use crate::quantum::bloch_coordinates;
use crate::training::{train, TrainConfig};

#[derive(Debug, Parser)]
#[command(
    name = "qsm",
    version,
    about = "Learn dimension-constrained quantum memory models of classical stochastic processes, \
             evaluate their predictive distortion, and compute provable classical lower bounds."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Where a ground-truth machine comes from: a definition file or the
/// built-in uniform renewal family.
#[derive(Debug, Args)]
pub struct MachineSource {
    /// Machine definition file (JSON).
    #[arg(long, conflicts_with = "renewal")]
    pub machine: Option<PathBuf>,
    /// Use the built-in N-state uniform renewal process instead of a file.
    #[arg(long, value_name = "N")]
    pub renewal: Option<usize>,
}

impl MachineSource {
    pub fn load(&self) -> Result<EpsilonMachine> {
        match (&self.machine, self.renewal) {
            (Some(path), None) => io::read_machine(path),
            (None, Some(n)) => EpsilonMachine::uniform_renewal(n),
            _ => Err(Error::InvalidInput(
                "exactly one of --machine or --renewal is required".into(),
            )),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a symbol sequence from a machine and write it one symbol per line.
    Gen {
        #[command(flatten)]
        machine: MachineSource,
        /// Number of symbols to sample.
        #[arg(long)]
        length: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output sequence file (stdout if omitted).
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Train a quantum model on a symbol sequence.
    Train {
        /// Training sequence file (one symbol per line).
        #[arg(long)]
        data: PathBuf,
        /// Memory dimension of the learned model.
        #[arg(long)]
        dim: usize,
        /// Alphabet size; inferred from the data when omitted.
        #[arg(long)]
        alphabet_size: Option<usize>,
        #[arg(long, default_value_t = 0.1)]
        learning_rate: f64,
        #[arg(long, default_value_t = 3)]
        restarts: usize,
        #[arg(long, default_value_t = 0.1)]
        delta_c: f64,
        #[arg(long, default_value_t = 10)]
        stall_window: usize,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-6)]
        fd_step: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where to write the learned model file.
        #[arg(long)]
        output_model: PathBuf,
        /// Optional run-report document (JSON).
        #[arg(long)]
        output_report: Option<PathBuf>,
    },
    /// Evaluate a model's predictive distortion against a machine.
    Eval {
        #[command(flatten)]
        machine: MachineSource,
        /// Model file to score.
        #[arg(long)]
        model: PathBuf,
        /// Conditioning past length; defaults to max(5, Markov order).
        #[arg(long)]
        past_length: Option<usize>,
        #[arg(long, default_value_t = 1)]
        future_length: usize,
        /// Probability floor for clamping model probabilities.
        #[arg(long, default_value_t = EvalProtocol::DEFAULT_FLOOR)]
        floor: f64,
        /// Optional JSON report output.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Provable lower bound on the distortion of dimension-limited classical models.
    Bound {
        #[command(flatten)]
        machine: MachineSource,
        /// Classical model dimension.
        #[arg(long)]
        dim: usize,
        /// Morph word length; defaults to the Markov order.
        #[arg(long)]
        k: Option<usize>,
        /// Optional JSON report output.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Train/evaluate/bound across a grid of machines, dimensions, and seeds.
    Sweep {
        /// Renewal process sizes, e.g. --renewal-n 2,3,4.
        #[arg(long, value_delimiter = ',')]
        renewal_n: Vec<usize>,
        /// Machine definition files to include.
        #[arg(long, value_delimiter = ',')]
        machine: Vec<PathBuf>,
        /// Model dimensions, e.g. --dims 2,3.
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        /// Data seeds, one sweep row per (machine, dim, seed).
        #[arg(long, value_delimiter = ',', default_value = "0")]
        seeds: Vec<u64>,
        /// Training sequence length.
        #[arg(long, default_value_t = 5000)]
        length: usize,
        #[arg(long, default_value_t = 3)]
        restarts: usize,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
        /// Bound word length; defaults to N for renewal machines and the
        /// Markov order for machines from files.
        #[arg(long)]
        bound_k: Option<usize>,
        /// Evaluation past length; defaults to max(5, Markov order).
        #[arg(long)]
        past_length: Option<usize>,
        /// Concurrent grid points (defaults to the number of cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Output CSV path.
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Extend a model's Kraus operators to the full step unitary.
    Unitary {
        #[arg(long)]
        model: PathBuf,
        /// Output matrix document (JSON).
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Export Bloch coordinates of the encoded pasts of a qubit model.
    Bloch {
        #[command(flatten)]
        machine: MachineSource,
        #[arg(long)]
        model: PathBuf,
        /// Length of the encoded pasts; defaults to max(5, Markov order).
        #[arg(long)]
        past_length: Option<usize>,
        /// Output CSV path.
        #[arg(long, short)]
        output: PathBuf,
    },
}

/// One machine entry of a sweep grid.
pub struct SweepMachine {
    pub label: String,
    pub machine: EpsilonMachine,
    /// Word length of the classical bound for this machine; `None` uses the
    /// Markov order.
    pub bound_word_len: Option<usize>,
}

/// A full sweep specification: the machine/dimension/seed grid plus the
/// training template applied at every grid point.
pub struct SweepSpec {
    pub machines: Vec<SweepMachine>,
    pub dims: Vec<usize>,
    pub seeds: Vec<u64>,
    pub sequence_length: usize,
    /// Template for per-point training configs; `dim`, `alphabet_size` and
    /// `seed` are overridden per grid point.
    pub train_template: TrainConfig,
    /// Evaluation past length; `None` uses max(5, Markov order) per machine.
    pub past_length: Option<usize>,
    pub future_length: usize,
    pub probability_floor: f64,
}

impl SweepSpec {
    fn validate(&self) -> Result<()> {
        if self.machines.is_empty() {
            return Err(Error::InvalidConfig("sweep needs at least one machine".into()));
        }
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(Error::InvalidConfig("sweep dims must be positive".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("sweep needs at least one seed".into()));
        }
        Ok(())
    }
}

/// Run every grid point of a sweep: sample data, train, evaluate distortion,
/// and attach the classical bound. Rows come back in deterministic grid
/// order (machine-major, then dimension, then seed).
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<io::SweepRecord>> {
    spec.validate()?;
    // per-machine evaluation protocol and per-(machine, dim) bounds
    let mut protocols = Vec::with_capacity(spec.machines.len());
    let mut bounds = Vec::with_capacity(spec.machines.len());
    for entry in &spec.machines {
        let mut protocol = match spec.past_length {
            Some(l) => EvalProtocol::new(l, spec.future_length),
            None => {
                let mut p = EvalProtocol::for_machine(&entry.machine)?;
                p.future_length = spec.future_length;
                p
            }
        };
        protocol.probability_floor = spec.probability_floor;
        protocols.push(protocol);
        let per_dim: Vec<f64> = spec
            .dims
            .iter()
            .map(|&dim| {
                Ok(classical_lower_bound(&entry.machine, dim, entry.bound_word_len)?.bound)
            })
            .collect::<Result<_>>()?;
        bounds.push(per_dim);
    }

    let mut points = Vec::new();
    for (mi, entry) in spec.machines.iter().enumerate() {
        for (di, &dim) in spec.dims.iter().enumerate() {
            for &seed in &spec.seeds {
                points.push((mi, di, dim, seed, entry));
            }
        }
    }
    points
        .par_iter()
        .map(|&(mi, di, dim, seed, entry)| {
            let data = entry.machine.sample_sequence(spec.sequence_length, seed)?;
            let config = TrainConfig {
                dim,
                alphabet_size: entry.machine.alphabet_size(),
                seed,
                ..spec.train_template.clone()
            };
            let result = train(&data, &config)?;
            let report = distortion(&entry.machine, &result.best_model, &protocols[mi])?;
            Ok(io::SweepRecord {
                machine: entry.label.clone(),
                dim,
                quantum_distortion: report.value,
                classical_bound: bounds[mi][di],
                clamped_terms: report.clamped_terms,
                seed,
            })
        })
        .collect()
}

fn eval_protocol_for(
    machine: &EpsilonMachine,
    past_length: Option<usize>,
    future_length: usize,
    floor: f64,
) -> Result<EvalProtocol> {
    let mut protocol = match past_length {
        Some(l) => EvalProtocol::new(l, future_length),
        None => {
            let mut p = EvalProtocol::for_machine(machine)?;
            p.future_length = future_length;
            p
        }
    };
    protocol.probability_floor = floor;
    Ok(protocol)
}

/// Execute a parsed command.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen {
            machine,
            length,
            seed,
            output,
        } => {
            let machine = machine.load()?;
            let sequence = machine.sample_sequence(length, seed)?;
            match output {
                Some(path) => io::write_sequence(path, &sequence)?,
                None => {
                    let mut text = String::new();
                    for s in &sequence {
                        text.push_str(&s.to_string());
                        text.push('\n');
                    }
                    print!("{text}");
                }
            }
            Ok(())
        }
        Command::Train {
            data,
            dim,
            alphabet_size,
            learning_rate,
            restarts,
            delta_c,
            stall_window,
            max_iters,
            fd_step,
            seed,
            output_model,
            output_report,
        } => {
            let sequence = io::read_sequence(&data)?;
            let alphabet_size = match alphabet_size {
                Some(a) => a,
                None => sequence.iter().max().map_or(1, |&m| m + 1),
            };
            let config = TrainConfig {
                dim,
                alphabet_size,
                learning_rate,
                restarts,
                delta_c_threshold: delta_c,
                stall_window,
                max_iters,
                fd_step,
                seed,
                ..TrainConfig::new(dim, alphabet_size)
            };
            let result = train(&sequence, &config)?;
            io::write_model(
                &output_model,
                &result.best_model,
                Some(io::ModelMetadata {
                    seed: Some(seed),
                    final_cost: Some(result.final_cost),
                    note: None,
                }),
            )?;
            if let Some(path) = output_report {
                io::write_json(path, &io::TrainReportFile::new(&config, &result))?;
            }
            println!(
                "trained dim-{dim} model: cost {:.3} bits over {} symbols ({} restarts, iterations {:?})",
                result.final_cost,
                sequence.len(),
                config.restarts,
                result.iterations_used
            );
            println!("model written to {}", output_model.display());
            Ok(())
        }
        Command::Eval {
            machine,
            model,
            past_length,
            future_length,
            floor,
            output,
        } => {
            let machine = machine.load()?;
            let model = io::read_model(&model)?;
            let protocol = eval_protocol_for(&machine, past_length, future_length, floor)?;
            let report = distortion(&machine, &model, &protocol)?;
            println!(
                "distortion: {} bits/symbol (pasts of length {}, futures of length {}, {} clamped terms)",
                report.value, protocol.past_length, protocol.future_length, report.clamped_terms
            );
            if let Some(path) = output {
                io::write_json(path, &report)?;
            }
            Ok(())
        }
        Command::Bound {
            machine,
            dim,
            k,
            output,
        } => {
            let machine = machine.load()?;
            let report = classical_lower_bound(&machine, dim, k)?;
            println!(
                "classical lower bound (dim {dim}, words of length {}): {} bits/symbol{}",
                report.word_len,
                report.bound,
                if report.tight { " (tight)" } else { "" }
            );
            println!(
                "minimizing coarse-graining: {:?}",
                report.best.partition.blocks()
            );
            if let Some(path) = output {
                io::write_json(path, &report)?;
            }
            Ok(())
        }
        Command::Sweep {
            renewal_n,
            machine,
            dims,
            seeds,
            length,
            restarts,
            max_iters,
            bound_k,
            past_length,
            jobs,
            output,
        } => {
            let mut machines = Vec::new();
            for &n in &renewal_n {
                machines.push(SweepMachine {
                    label: format!("uniform_renewal_{n}"),
                    machine: EpsilonMachine::uniform_renewal(n)?,
                    // match the published evaluation of the renewal family:
                    // morphs over N-symbol words
                    bound_word_len: Some(bound_k.unwrap_or(n)),
                });
            }
            for path in &machine {
                let m = io::read_machine(path)?;
                machines.push(SweepMachine {
                    label: m.name().to_string(),
                    machine: m,
                    bound_word_len: bound_k,
                });
            }
            let mut template = TrainConfig::new(1, 1);
            template.restarts = restarts;
            template.max_iters = max_iters;
            let spec = SweepSpec {
                machines,
                dims,
                seeds,
                sequence_length: length,
                train_template: template,
                past_length,
                future_length: 1,
                probability_floor: EvalProtocol::DEFAULT_FLOOR,
            };
            let records = match jobs {
                Some(jobs) => {
                    let pool = rayon::ThreadPoolBuilder::new()
                        .num_threads(jobs.max(1))
                        .build()
                        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
                    pool.install(|| run_sweep(&spec))?
                }
                None => run_sweep(&spec)?,
            };
            io::write_sweep_csv(&output, &records)?;
            println!("{} sweep rows written to {}", records.len(), output.display());
            Ok(())
        }
        Command::Unitary { model, output } => {
            let model = io::read_model(&model)?;
            let u = model.complete_unitary()?;
            let n = u.nrows();
            let matrix: Vec<Vec<[f64; 2]>> = (0..n)
                .map(|i| (0..n).map(|j| [u[(i, j)].re, u[(i, j)].im]).collect())
                .collect();
            io::write_json(
                &output,
                &serde_json::json!({ "dim": n, "matrix": matrix }),
            )?;
            println!("{n}x{n} unitary written to {}", output.display());
            Ok(())
        }
        Command::Bloch {
            machine,
            model,
            past_length,
            output,
        } => {
            let machine = machine.load()?;
            let model = io::read_model(&model)?;
            if model.dim() != 2 {
                return Err(Error::InvalidInput(format!(
                    "Bloch export needs a 2-dimensional model, got dimension {}",
                    model.dim()
                )));
            }
            let protocol = eval_protocol_for(&machine, past_length, 1, EvalProtocol::DEFAULT_FLOOR)?;
            let length = protocol.past_length;
            let dist = machine.word_distribution(length)?;
            let mut text = String::from("past,probability,x,y,z\n");
            let mut skipped = 0usize;
            for (word, prob) in dist.iter() {
                if prob <= 0.0 {
                    continue;
                }
                let state = match model.encode_past(&word) {
                    Ok(s) => s,
                    Err(Error::ZeroProbabilityPast) => {
                        skipped += 1;
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                let (x, y, z) = bloch_coordinates(&state)?;
                let label: String = word.iter().map(|s| s.to_string()).collect();
                text.push_str(&format!("{label},{prob},{x},{y},{z}\n"));
            }
            std::fs::write(&output, text).map_err(|e| Error::Io {
                path: output.display().to_string(),
                source: e,
            })?;
            if skipped > 0 {
                eprintln!("note: {skipped} pasts carry zero amplitude under the model and were skipped");
            }
            println!("Bloch coordinates written to {}", output.display());
            Ok(())
        }
    }
}

/// Parse arguments, run, and map failures to exit codes:
/// 0 success, 1 validation, 2 numerical, 3 guard exceeded.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qsm: error[{}]: {e}", e.category().label());
            ExitCode::from(e.category().exit_code())
        }
    }
}

