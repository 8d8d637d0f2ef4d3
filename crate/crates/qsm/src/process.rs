//! Stationary unifilar hidden Markov models (epsilon-machines).
//!
//! These serve both as ground-truth processes for distortion evaluation and
//! as generators of training data. All operations are pure; randomness is
//! injected through explicit seeds.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Guard on exact enumerations: `alphabet_size ^ word_len` may not exceed this.
pub const ENUMERATION_GUARD: usize = 1_000_000;

/// Tolerance for validating human-authored transition probabilities.
pub const INPUT_TOLERANCE: f64 = 1e-9;

/// One labelled transition: emitting a symbol moves the machine to
/// `next_state` with `probability`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub next_state: usize,
    pub probability: f64,
}

/// A finite stationary unifilar hidden Markov model.
///
/// Invariants established at construction: per-state probabilities sum to
/// one, at most one transition per (state, symbol) pair, and every state is
/// reachable from every other (so a unique stationary distribution exists).
#[derive(Debug, Clone)]
pub struct EpsilonMachine {
    name: String,
    num_states: usize,
    alphabet_size: usize,
    /// Indexed `[state][symbol]`; `None` where the symbol cannot be emitted.
    transitions: Vec<Vec<Option<Transition>>>,
}

/// Result of the synchronizing-word search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkovOrder {
    Known(usize),
    ExceedsCap,
}

impl MarkovOrder {
    pub fn known(self) -> Option<usize> {
        match self {
            MarkovOrder::Known(k) => Some(k),
            MarkovOrder::ExceedsCap => None,
        }
    }
}

impl EpsilonMachine {
    /// Build and validate a machine from `(from, symbol, to, probability)`
    /// entries.
    pub fn new(
        name: impl Into<String>,
        num_states: usize,
        alphabet_size: usize,
        entries: impl IntoIterator<Item = (usize, usize, usize, f64)>,
    ) -> Result<Self> {
        if num_states == 0 {
            return Err(Error::InvalidMachine("machine must have at least one state".into()));
        }
        if alphabet_size == 0 {
            return Err(Error::InvalidMachine("alphabet must be nonempty".into()));
        }
        let mut transitions = vec![vec![None; alphabet_size]; num_states];
        for (from, symbol, to, prob) in entries {
            if from >= num_states || to >= num_states {
                return Err(Error::InvalidMachine(format!(
                    "transition ({from}, {symbol}) -> {to} references a state out of range (num_states = {num_states})"
                )));
            }
            if symbol >= alphabet_size {
                return Err(Error::SymbolOutOfRange { symbol, alphabet_size });
            }
            if !(prob > 0.0 && prob <= 1.0 + INPUT_TOLERANCE) {
                return Err(Error::InvalidMachine(format!(
                    "transition ({from}, {symbol}) has probability {prob} outside (0, 1]"
                )));
            }
            let slot = &mut transitions[from][symbol];
            if slot.is_some() {
                return Err(Error::InvalidMachine(format!(
                    "non-unifilar: duplicate entry for state {from}, symbol {symbol}"
                )));
            }
            *slot = Some(Transition { next_state: to, probability: prob.min(1.0) });
        }
        let machine = EpsilonMachine {
            name: name.into(),
            num_states,
            alphabet_size,
            transitions,
        };
        machine.validate()?;
        Ok(machine)
    }

    fn validate(&self) -> Result<()> {
        for s in 0..self.num_states {
            let row_sum: f64 = self.transitions[s]
                .iter()
                .flatten()
                .map(|t| t.probability)
                .sum();
            if (row_sum - 1.0).abs() > INPUT_TOLERANCE {
                return Err(Error::InvalidMachine(format!(
                    "row not normalized: state {s} probabilities sum to {row_sum}"
                )));
            }
        }
        // irreducibility: every state reaches every other state
        for start in 0..self.num_states {
            let mut seen = vec![false; self.num_states];
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(s) = stack.pop() {
                for t in self.transitions[s].iter().flatten() {
                    if !seen[t.next_state] {
                        seen[t.next_state] = true;
                        stack.push(t.next_state);
                    }
                }
            }
            if let Some(unreachable) = seen.iter().position(|&v| !v) {
                return Err(Error::InvalidMachine(format!(
                    "state {unreachable} is unreachable from state {start}"
                )));
            }
        }
        Ok(())
    }

    /// The N-state uniform renewal process: gaps between ticks (symbol 1)
    /// are uniform on `{0, ..., n-1}`. From state `k` the machine ticks with
    /// probability `1/(n-k)` back to state 0, otherwise emits 0 and advances.
    pub fn uniform_renewal(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMachine("uniform renewal requires n >= 1".into()));
        }
        let mut entries = Vec::new();
        for k in 0..n {
            let tick = 1.0 / (n - k) as f64;
            entries.push((k, 1, 0, tick));
            if k + 1 < n {
                entries.push((k, 0, k + 1, 1.0 - tick));
            }
        }
        EpsilonMachine::new(format!("uniform_renewal_{n}"), n, 2, entries)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn transition(&self, state: usize, symbol: usize) -> Option<Transition> {
        self.transitions.get(state)?.get(symbol).copied().flatten()
    }

    /// Iterate over all transitions as `(from, symbol, to, probability)`.
    pub fn transition_entries(&self) -> impl Iterator<Item = (usize, usize, usize, f64)> + '_ {
        self.transitions.iter().enumerate().flat_map(|(s, row)| {
            row.iter().enumerate().filter_map(move |(x, t)| {
                t.map(|t| (s, x, t.next_state, t.probability))
            })
        })
    }

    /// State-to-state transition matrix `T[s][s'] = P(s' | s)`.
    fn state_matrix(&self) -> DMatrix<f64> {
        let mut t = DMatrix::<f64>::zeros(self.num_states, self.num_states);
        for (s, _x, to, p) in self.transition_entries() {
            t[(s, to)] += p;
        }
        t
    }

    /// The unique stationary distribution, solving `pi = pi T`.
    ///
    /// Direct linear solve up to 64 states, power iteration above.
    pub fn stationary_distribution(&self) -> Result<Vec<f64>> {
        let n = self.num_states;
        if n == 1 {
            return Ok(vec![1.0]);
        }
        let t = self.state_matrix();
        let pi = if n <= 64 {
            // (T^t - I) pi = 0 with the last equation replaced by sum = 1
            let mut a = t.transpose() - DMatrix::<f64>::identity(n, n);
            for j in 0..n {
                a[(n - 1, j)] = 1.0;
            }
            let mut b = nalgebra::DVector::<f64>::zeros(n);
            b[n - 1] = 1.0;
            a.lu()
                .solve(&b)
                .ok_or_else(|| Error::NonConvergence("stationary solve is singular".into()))?
                .iter()
                .copied()
                .collect::<Vec<f64>>()
        } else {
            let mut pi = vec![1.0 / n as f64; n];
            let mut next = vec![0.0; n];
            let mut converged = false;
            for _ in 0..1_000_000 {
                next.iter_mut().for_each(|v| *v = 0.0);
                for s in 0..n {
                    for t in self.transitions[s].iter().flatten() {
                        next[t.next_state] += pi[s] * t.probability;
                    }
                }
                let total: f64 = next.iter().sum();
                next.iter_mut().for_each(|v| *v /= total);
                let diff = pi
                    .iter()
                    .zip(next.iter())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                std::mem::swap(&mut pi, &mut next);
                if diff < 1e-15 {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::NonConvergence(
                    "stationary power iteration hit its cap".into(),
                ));
            }
            pi
        };
        let mut pi = pi;
        for v in pi.iter_mut() {
            if *v < 0.0 {
                if *v < -1e-10 {
                    return Err(Error::NonConvergence(format!(
                        "stationary solve produced negative mass {v}"
                    )));
                }
                *v = 0.0;
            }
        }
        let total: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|v| *v /= total);
        Ok(pi)
    }

    /// One belief-propagation step; returns the emitted-symbol mass (the
    /// probability of `symbol` given the incoming belief).
    pub(crate) fn propagate_into(&self, belief: &[f64], symbol: usize, out: &mut [f64]) -> f64 {
        out.iter_mut().for_each(|v| *v = 0.0);
        let mut mass = 0.0;
        for (s, &b) in belief.iter().enumerate() {
            if b > 0.0 {
                if let Some(t) = self.transitions[s][symbol] {
                    out[t.next_state] += b * t.probability;
                    mass += b * t.probability;
                }
            }
        }
        mass
    }

    fn check_word(&self, word: &[usize]) -> Result<()> {
        for &x in word {
            if x >= self.alphabet_size {
                return Err(Error::SymbolOutOfRange {
                    symbol: x,
                    alphabet_size: self.alphabet_size,
                });
            }
        }
        Ok(())
    }

    fn guard(&self, word_len: usize) -> Result<usize> {
        let mut total: usize = 1;
        for _ in 0..word_len {
            total = total
                .checked_mul(self.alphabet_size)
                .filter(|&t| t <= ENUMERATION_GUARD)
                .ok_or_else(|| {
                    Error::GuardExceeded(format!(
                        "alphabet {} ^ word length {} exceeds {}",
                        self.alphabet_size, word_len, ENUMERATION_GUARD
                    ))
                })?;
        }
        Ok(total)
    }

    /// Enumerate probabilities of all length-`word_len` futures starting
    /// from `belief` over states. `belief` need not be normalized; results
    /// scale with its total mass.
    pub(crate) fn future_probs_from(&self, belief: &[f64], word_len: usize) -> Result<Vec<f64>> {
        let total = self.guard(word_len)?;
        let mut out = vec![0.0; total];
        // per-depth scratch beliefs, reused across the DFS
        let mut levels = vec![vec![0.0; self.num_states]; word_len + 1];
        levels[0].copy_from_slice(belief);
        self.fill_futures(&mut levels, 0, word_len, 0, &mut out);
        Ok(out)
    }

    fn fill_futures(
        &self,
        levels: &mut [Vec<f64>],
        depth: usize,
        word_len: usize,
        index: usize,
        out: &mut [f64],
    ) {
        if depth == word_len {
            out[index] = levels[depth].iter().sum();
            return;
        }
        for x in 0..self.alphabet_size {
            let (head, tail) = levels.split_at_mut(depth + 1);
            let mass = self.propagate_into(&head[depth], x, &mut tail[0]);
            let child = index * self.alphabet_size + x;
            if mass > 0.0 {
                self.fill_futures(levels, depth + 1, word_len, child, out);
            }
            // zero-mass subtrees keep their zero entries in `out`
        }
    }

    /// Joint distribution over all words of length `word_len`, starting from
    /// the stationary distribution.
    pub fn word_distribution(&self, word_len: usize) -> Result<WordDistribution> {
        let pi = self.stationary_distribution()?;
        let probs = self.future_probs_from(&pi, word_len)?;
        Ok(WordDistribution {
            alphabet_size: self.alphabet_size,
            word_len,
            probs,
        })
    }

    /// Belief over states after observing `past`, starting from the
    /// stationary mixture. Errors if the past has probability zero.
    pub fn belief_after(&self, past: &[usize]) -> Result<Vec<f64>> {
        self.check_word(past)?;
        let mut belief = self.stationary_distribution()?;
        let mut next = vec![0.0; self.num_states];
        for &x in past {
            let mass = self.propagate_into(&belief, x, &mut next);
            if mass <= 0.0 {
                return Err(Error::ZeroProbabilityPast);
            }
            for v in next.iter_mut() {
                *v /= mass;
            }
            std::mem::swap(&mut belief, &mut next);
        }
        Ok(belief)
    }

    /// `P(X_{0:K} | past)`: conditional distribution over length-`word_len`
    /// futures given an observed past.
    pub fn conditional_future(&self, past: &[usize], word_len: usize) -> Result<WordDistribution> {
        let belief = self.belief_after(past)?;
        let probs = self.future_probs_from(&belief, word_len)?;
        Ok(WordDistribution {
            alphabet_size: self.alphabet_size,
            word_len,
            probs,
        })
    }

    /// The future morph of a single causal state.
    pub fn state_conditional_future(&self, state: usize, word_len: usize) -> Result<WordDistribution> {
        if state >= self.num_states {
            return Err(Error::InvalidInput(format!(
                "state {state} out of range ({} states)",
                self.num_states
            )));
        }
        let mut belief = vec![0.0; self.num_states];
        belief[state] = 1.0;
        let probs = self.future_probs_from(&belief, word_len)?;
        Ok(WordDistribution {
            alphabet_size: self.alphabet_size,
            word_len,
            probs,
        })
    }

    /// Smallest `k <= cap` such that every positive-probability length-`k`
    /// word drives all compatible start states to the same causal state.
    pub fn markov_order(&self, cap: usize) -> MarkovOrder {
        if self.num_states == 1 {
            return MarkovOrder::Known(0);
        }
        // subset automaton walk: each reachable subset is the set of end
        // states compatible with some positive-probability word
        let full: Vec<usize> = (0..self.num_states).collect();
        let mut frontier: BTreeSet<Vec<usize>> = BTreeSet::new();
        frontier.insert(full);
        for k in 1..=cap {
            let mut next: BTreeSet<Vec<usize>> = BTreeSet::new();
            for subset in &frontier {
                for x in 0..self.alphabet_size {
                    let mut image: BTreeSet<usize> = BTreeSet::new();
                    for &s in subset {
                        if let Some(t) = self.transitions[s][x] {
                            image.insert(t.next_state);
                        }
                    }
                    if !image.is_empty() {
                        next.insert(image.into_iter().collect());
                    }
                }
            }
            if next.iter().all(|subset| subset.len() == 1) {
                return MarkovOrder::Known(k);
            }
            frontier = next;
        }
        MarkovOrder::ExceedsCap
    }

    /// Sample a stationary trajectory of `length` symbols. Identical
    /// `(machine, length, seed)` yields identical output.
    pub fn sample_sequence(&self, length: usize, seed: u64) -> Result<Vec<usize>> {
        let pi = self.stationary_distribution()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = sample_index(&pi, rng.gen::<f64>());
        let mut out = Vec::with_capacity(length);
        for _ in 0..length {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut chosen = None;
            for (x, t) in self.transitions[state].iter().enumerate() {
                if let Some(t) = t {
                    acc += t.probability;
                    if u < acc {
                        chosen = Some((x, t.next_state));
                        break;
                    }
                }
            }
            // guard against round-off at acc ~ 1: fall back to the last entry
            let (x, next) = chosen.unwrap_or_else(|| {
                self.transitions[state]
                    .iter()
                    .enumerate()
                    .rev()
                    .find_map(|(x, t)| t.map(|t| (x, t.next_state)))
                    .expect("validated machine has a nonempty row")
            });
            out.push(x);
            state = next;
        }
        Ok(out)
    }
}

fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// A distribution over all words of a fixed length, stored densely in
/// lexicographic order (first symbol most significant).
#[derive(Debug, Clone)]
pub struct WordDistribution {
    alphabet_size: usize,
    word_len: usize,
    probs: Vec<f64>,
}

impl WordDistribution {
    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn word_len(&self) -> usize {
        self.word_len
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    pub fn probability(&self, word: &[usize]) -> f64 {
        self.probs[self.index_of(word)]
    }

    pub fn index_of(&self, word: &[usize]) -> usize {
        assert_eq!(word.len(), self.word_len, "word length mismatch");
        word.iter().fold(0, |acc, &x| {
            assert!(x < self.alphabet_size, "symbol out of range");
            acc * self.alphabet_size + x
        })
    }

    pub fn word_at(&self, mut index: usize) -> Vec<usize> {
        let mut word = vec![0; self.word_len];
        for slot in word.iter_mut().rev() {
            *slot = index % self.alphabet_size;
            index /= self.alphabet_size;
        }
        word
    }

    /// Iterate `(word, probability)` in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        self.probs.iter().enumerate().map(|(i, &p)| (self.word_at(i), p))
    }
}
