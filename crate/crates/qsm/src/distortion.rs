//! Predictive distortion: the past-averaged, per-symbol-normalized KL
//! divergence between a process's true conditional futures and those of any
//! predictor.
//!
//! Evaluation enumerates every positive-probability past of a fixed length,
//! scores the predictor's conditional future distribution against the exact
//! one, and weights by the past's probability. Model probabilities below a
//! floor are clamped (and counted) so reports stay finite.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::pairwise_sum;
use crate::process::{EpsilonMachine, ENUMERATION_GUARD};
use crate::quantum::KrausModel;

/// How a distortion evaluation conditions on the past and scores futures.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EvalProtocol {
    /// Length of the conditioning pasts. Must reach the process's Markov
    /// order for the evaluation to be exact.
    pub past_length: usize,
    /// Length of the scored futures (the KL is divided by this).
    pub future_length: usize,
    /// Model probabilities below this are raised to it and counted.
    pub probability_floor: f64,
}

impl EvalProtocol {
    pub const DEFAULT_FLOOR: f64 = 1e-12;

    pub fn new(past_length: usize, future_length: usize) -> Self {
        EvalProtocol {
            past_length,
            future_length,
            probability_floor: Self::DEFAULT_FLOOR,
        }
    }

    /// Default protocol for a machine: pasts of length `max(5, kappa)`,
    /// single-symbol futures.
    pub fn for_machine(machine: &EpsilonMachine) -> Result<Self> {
        let kappa = machine
            .markov_order(crate::bound::MARKOV_ORDER_CAP)
            .known()
            .ok_or_else(|| {
                Error::InvalidInput(
                    "Markov order exceeds the search cap; choose a past length explicitly".into(),
                )
            })?;
        Ok(EvalProtocol::new(kappa.max(5), 1))
    }

    fn validate(&self) -> Result<()> {
        if self.future_length == 0 {
            return Err(Error::InvalidConfig("future length must be at least 1".into()));
        }
        if !(self.probability_floor > 0.0) {
            return Err(Error::InvalidConfig("probability floor must be positive".into()));
        }
        Ok(())
    }
}

/// A distortion value together with the protocol and clamping diagnostics
/// that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistortionReport {
    /// Bits per symbol; zero iff the predictor matches the process on every
    /// positive-probability past (when nothing was clamped).
    pub value: f64,
    /// Number of model probabilities raised to the floor.
    pub clamped_terms: usize,
    pub protocol: EvalProtocol,
}

/// Anything that supplies conditional future distributions given a past.
pub trait Predictor {
    fn alphabet_size(&self) -> usize;

    /// Distribution over all `alphabet_size^future_length` futures in
    /// lexicographic order, conditioned on `past`.
    fn conditional_future(&self, past: &[usize], future_length: usize) -> Result<Vec<f64>>;
}

impl Predictor for EpsilonMachine {
    fn alphabet_size(&self) -> usize {
        self.alphabet_size()
    }

    fn conditional_future(&self, past: &[usize], future_length: usize) -> Result<Vec<f64>> {
        Ok(EpsilonMachine::conditional_future(self, past, future_length)?.into_probs())
    }
}

impl Predictor for KrausModel {
    fn alphabet_size(&self) -> usize {
        self.alphabet_size()
    }

    fn conditional_future(&self, past: &[usize], future_length: usize) -> Result<Vec<f64>> {
        let state = self.encode_past(past)?;
        self.future_distribution(&state, future_length)
    }
}

/// Memoryless predictor: futures are products of a fixed next-symbol
/// distribution.
#[derive(Debug, Clone)]
pub struct IidPredictor {
    probs: Vec<f64>,
}

impl IidPredictor {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() || probs.iter().any(|&p| !(0.0..=1.0 + 1e-9).contains(&p)) {
            return Err(Error::InvalidInput("next-symbol probabilities must lie in [0, 1]".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "next-symbol probabilities sum to {total}, expected 1"
            )));
        }
        Ok(IidPredictor { probs })
    }
}

impl Predictor for IidPredictor {
    fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    fn conditional_future(&self, _past: &[usize], future_length: usize) -> Result<Vec<f64>> {
        let a = self.probs.len();
        let total = checked_pow(a, future_length)?;
        let mut out = vec![1.0; total];
        for (idx, slot) in out.iter_mut().enumerate() {
            let mut rest = idx;
            for _ in 0..future_length {
                *slot *= self.probs[rest % a];
                rest /= a;
            }
        }
        Ok(out)
    }
}

fn checked_pow(base: usize, exp: usize) -> Result<usize> {
    let mut total: usize = 1;
    for _ in 0..exp {
        total = total
            .checked_mul(base)
            .filter(|&t| t <= ENUMERATION_GUARD)
            .ok_or_else(|| {
                Error::GuardExceeded(format!("{base}^{exp} exceeds {ENUMERATION_GUARD}"))
            })?;
    }
    Ok(total)
}

/// `sum_{i: p_i > 0} p_i log2(p_i / max(q_i, floor))`.
///
/// Non-negative whenever `q` sums to at most one. `p` must be a probability
/// vector (sum within 1e-9 of one).
pub fn kl_divergence(p: &[f64], q: &[f64], floor: f64) -> Result<f64> {
    Ok(kl_divergence_counting(p, q, floor)?.0)
}

/// As `kl_divergence`, also counting how many model probabilities were
/// raised to the floor.
pub fn kl_divergence_counting(p: &[f64], q: &[f64], floor: f64) -> Result<(f64, usize)> {
    if p.len() != q.len() {
        return Err(Error::InvalidInput(format!(
            "distribution lengths differ: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "first argument sums to {total}, expected 1"
        )));
    }
    let mut acc = 0.0;
    let mut clamped = 0;
    for (&pi, &qi) in p.iter().zip(q.iter()) {
        if pi > 0.0 {
            let q_eff = if qi < floor {
                clamped += 1;
                floor
            } else {
                qi
            };
            acc += pi * (pi / q_eff).log2();
        }
    }
    Ok((acc, clamped))
}

/// Eq.-style distortion of `predictor` against `machine`: the probability-
/// weighted mean over all positive-probability pasts of length
/// `protocol.past_length` of the per-symbol KL divergence between true and
/// predicted futures of length `protocol.future_length`.
pub fn distortion<P: Predictor + ?Sized>(
    machine: &EpsilonMachine,
    predictor: &P,
    protocol: &EvalProtocol,
) -> Result<DistortionReport> {
    protocol.validate()?;
    if predictor.alphabet_size() != machine.alphabet_size() {
        return Err(Error::InvalidInput(format!(
            "predictor alphabet {} does not match machine alphabet {}",
            predictor.alphabet_size(),
            machine.alphabet_size()
        )));
    }
    checked_pow(
        machine.alphabet_size(),
        protocol.past_length + protocol.future_length,
    )?;
    let future_cells = checked_pow(machine.alphabet_size(), protocol.future_length)?;

    let pi = machine.stationary_distribution()?;
    let mut walker = PastWalker {
        machine,
        predictor,
        protocol,
        word: vec![0; protocol.past_length],
        levels: vec![vec![0.0; machine.num_states()]; protocol.past_length + 1],
        future_cells,
        terms: Vec::new(),
        clamped: 0,
    };
    walker.levels[0].copy_from_slice(&pi);
    walker.walk(0)?;
    let value = pairwise_sum(&walker.terms);
    let clamped_terms = walker.clamped;
    if value < -1e-9 {
        return Err(Error::NonConvergence(format!(
            "distortion evaluated to {value}, below zero beyond round-off"
        )));
    }
    Ok(DistortionReport {
        value: value.max(0.0),
        clamped_terms,
        protocol: *protocol,
    })
}

struct PastWalker<'a, P: Predictor + ?Sized> {
    machine: &'a EpsilonMachine,
    predictor: &'a P,
    protocol: &'a EvalProtocol,
    word: Vec<usize>,
    levels: Vec<Vec<f64>>,
    future_cells: usize,
    terms: Vec<f64>,
    clamped: usize,
}

impl<P: Predictor + ?Sized> PastWalker<'_, P> {
    fn walk(&mut self, depth: usize) -> Result<()> {
        if depth == self.protocol.past_length {
            return self.score_leaf();
        }
        for x in 0..self.machine.alphabet_size() {
            let (head, tail) = self.levels.split_at_mut(depth + 1);
            let mass = self.machine.propagate_into(&head[depth], x, &mut tail[0]);
            if mass > 0.0 {
                self.word[depth] = x;
                self.walk(depth + 1)?;
            }
        }
        Ok(())
    }

    fn score_leaf(&mut self) -> Result<()> {
        let belief = &self.levels[self.protocol.past_length];
        let p_past: f64 = belief.iter().sum();
        if p_past <= 0.0 {
            return Ok(());
        }
        let normalized: Vec<f64> = belief.iter().map(|b| b / p_past).collect();
        let truth = self
            .machine
            .future_probs_from(&normalized, self.protocol.future_length)?;
        let predicted = match self
            .predictor
            .conditional_future(&self.word, self.protocol.future_length)
        {
            Ok(q) => q,
            // the model assigns this past probability zero: every term of
            // its conditional is clamped to the floor
            Err(Error::ZeroProbabilityPast) => vec![0.0; self.future_cells],
            Err(e) => return Err(e),
        };
        let (kl, clamped) =
            kl_divergence_counting(&truth, &predicted, self.protocol.probability_floor)?;
        self.clamped += clamped;
        self.terms
            .push(p_past * kl / self.protocol.future_length as f64);
        Ok(())
    }
}

/// Distortion at several future lengths under a fixed past length.
///
/// When the predictor is itself a stationary unifilar machine the values
/// coincide for every future length; no such identity is asserted for other
/// predictors.
pub fn distortion_l_sweep<P: Predictor + ?Sized>(
    machine: &EpsilonMachine,
    predictor: &P,
    past_length: usize,
    future_lengths: &[usize],
) -> Result<Vec<DistortionReport>> {
    future_lengths
        .iter()
        .map(|&l| {
            let protocol = EvalProtocol::new(past_length, l);
            distortion(machine, predictor, &protocol)
        })
        .collect()
}
