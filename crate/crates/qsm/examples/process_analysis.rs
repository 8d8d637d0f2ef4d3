//! Exact analysis of stationary unifilar hidden Markov models.
//!
//! Run with: cargo run --release --example process_analysis
//!
//! Demonstrates:
//! - the built-in uniform renewal family and hand-built machines
//! - stationary distributions and word distributions
//! - conditional futures given observed pasts
//! - Markov order via the synchronizing-word criterion
//! - seeded trajectory sampling

use qsm::process::EpsilonMachine;

fn main() -> qsm::Result<()> {
    let machine = EpsilonMachine::uniform_renewal(3)?;
    println!("machine: {}", machine.name());
    println!(
        "states: {}, alphabet: {}",
        machine.num_states(),
        machine.alphabet_size()
    );
    for (from, symbol, to, prob) in machine.transition_entries() {
        println!("  s{from} --{symbol}|{prob:.4}--> s{to}");
    }

    let pi = machine.stationary_distribution()?;
    println!("\nstationary distribution: {pi:?}");

    let words = machine.word_distribution(3)?;
    println!("\nlength-3 word probabilities:");
    for (word, p) in words.iter() {
        let label: String = word.iter().map(|s| s.to_string()).collect();
        println!("  P({label}) = {p:.6}");
    }

    println!("\nconditional next-symbol distributions:");
    for past in [vec![1], vec![0], vec![0, 0]] {
        let cond = machine.conditional_future(&past, 1)?;
        let label: String = past.iter().map(|s| s.to_string()).collect();
        println!(
            "  P(1 | ...{label}) = {:.4}",
            cond.probability(&[1])
        );
    }
    // three zeros in a row cannot happen under this process
    assert!(machine.conditional_future(&[0, 0, 0], 1).is_err());

    println!("\nMarkov order:");
    for n in 1..=5 {
        let m = EpsilonMachine::uniform_renewal(n)?;
        println!("  uniform_renewal({n}): {:?}", m.markov_order(8));
    }

    let sample = machine.sample_sequence(40, 7)?;
    let rendered: String = sample.iter().map(|s| s.to_string()).collect();
    println!("\n40 sampled symbols (seed 7): {rendered}");
    let long = machine.sample_sequence(100_000, 7)?;
    let freq = long.iter().filter(|&&x| x == 1).count() as f64 / long.len() as f64;
    println!("tick frequency over 100k symbols: {freq:.4} (exact: 0.5)");
    Ok(())
}
