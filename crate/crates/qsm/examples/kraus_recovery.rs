//! From unconstrained matrices to a complete quantum model.
//!
//! Run with: cargo run --release --example kraus_recovery
//!
//! Any set of complex square matrices {B_x} parametrizes a valid model: the
//! leading eigenmatrix V = W^dag W of the adjoint transfer map turns it into
//! Kraus operators A_x = W B_x W^{-1} / sqrt(lambda) satisfying
//! sum_x A_x^dag A_x = I. Sequence probabilities can be computed in either
//! parametrization and agree.

use qsm::quantum::{recover_kraus, sequence_likelihood, ParamSet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qsm::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let params = ParamSet::random(2, 2, &mut rng);
    let (model, spectral) = recover_kraus(&params)?;

    println!("random 2x2 parametrization over a binary alphabet");
    println!("leading eigenvalue of the transfer map: {:.6}", spectral.lambda);
    println!(
        "completeness residual of the recovered Kraus set: {:.2e}",
        model.completeness_error()
    );

    // likelihoods over all length-4 words form a distribution
    let mut total = 0.0;
    let mut best = (0.0, 0usize);
    for w in 0..16usize {
        let word: Vec<usize> = (0..4).map(|i| (w >> (3 - i)) & 1).collect();
        let p = sequence_likelihood(&params, &word)?;
        if p > best.0 {
            best = (p, w);
        }
        total += p;
    }
    println!("\nsum of P(word) over all 16 length-4 words: {total:.12}");
    println!(
        "most likely word: {:04b} with probability {:.6}",
        best.1, best.0
    );

    // the parametrization is a gauge: rescaling leaves every probability
    // unchanged
    let scaled = ParamSet::new(
        params
            .matrices()
            .iter()
            .map(|m| m * num_complex::Complex64::new(3.0, -1.5))
            .collect(),
    )?;
    let word = [0, 1, 1, 0];
    println!(
        "\nP(0110) original: {:.12}",
        sequence_likelihood(&params, &word)?
    );
    println!(
        "P(0110) rescaled:  {:.12}",
        sequence_likelihood(&scaled, &word)?
    );

    // encoding pasts and reading out next-symbol statistics
    let past = [1, 0, 0, 1];
    let state = model.encode_past(&past)?;
    let next = model.conditional_next(&state);
    println!("\nmemory state after past 1001: {:?}", state.amplitudes().as_slice());
    println!("next-symbol distribution: [{:.4}, {:.4}]", next[0], next[1]);
    println!("(sums to {:.12} by completeness)", next[0] + next[1]);
    Ok(())
}
