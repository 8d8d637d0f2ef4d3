//! Lower bounds on the distortion of dimension-limited classical models,
//! via exhaustive coarse-graining of causal states with closed-form morphs.
//!
//! Run with: cargo run --release --example classical_bounds

use qsm::bound::{classical_lower_bound, enumerate_partitions, optimal_merged_morph};
use qsm::process::EpsilonMachine;

fn main() -> qsm::Result<()> {
    let machine = EpsilonMachine::uniform_renewal(3)?;

    println!("coarse-grainings of 3 causal states into at most 2 blocks:");
    for p in enumerate_partitions(3, 2)? {
        println!("  {:?}", p.blocks());
    }

    // merging states 0 and 1: the optimal morph is the stationary-weighted
    // mixture of the two state morphs
    let (morph, contribution) = optimal_merged_morph(&machine, &[0, 1], 1)?;
    println!(
        "\nmerged morph of {{s0, s1}} over next symbols: [{:.4}, {:.4}] (cost {:.6} bits)",
        morph[0], morph[1], contribution
    );

    println!("\nbounds for the renewal family (morphs over N-symbol words):");
    println!("{:>4} {:>6} {:>12} {:>7}", "N", "dim", "bound", "tight");
    for n in 2..=5usize {
        let m = EpsilonMachine::uniform_renewal(n)?;
        for dim in 2..=n {
            let report = classical_lower_bound(&m, dim, Some(n))?;
            println!(
                "{n:>4} {dim:>6} {:>12.6} {:>7}",
                report.bound, report.tight
            );
        }
    }

    // for Markov (order-1) processes the bound is exact, not just a bound
    let markov = EpsilonMachine::new(
        "golden_mean",
        2,
        2,
        vec![(0, 0, 1, 0.5), (0, 1, 0, 0.5), (1, 1, 0, 1.0)],
    )?;
    let report = classical_lower_bound(&markov, 1, None)?;
    println!(
        "\ngolden-mean process, 1-state models: minimal distortion {:.6} bits (tight: {})",
        report.bound, report.tight
    );
    Ok(())
}
