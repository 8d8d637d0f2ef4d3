//! Evaluate the pretrained qubit model shipped with the repository against
//! the 3-state uniform renewal process, and render its encoded pasts as
//! Bloch-sphere coordinates.
//!
//! Run with: cargo run --release --example reference_model

use qsm::bound::classical_lower_bound;
use qsm::distortion::{distortion, EvalProtocol};
use qsm::process::EpsilonMachine;
use qsm::quantum::bloch_coordinates;

fn main() -> qsm::Result<()> {
    let model_path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/models/renewal3_d2.json");
    let model = qsm::io::read_model(model_path)?;
    println!(
        "loaded pretrained model: dimension {}, alphabet {}, completeness residual {:.2e}",
        model.dim(),
        model.alphabet_size(),
        model.completeness_error()
    );

    let machine = EpsilonMachine::uniform_renewal(3)?;
    let protocol = EvalProtocol::new(5, 1);
    let report = distortion(&machine, &model, &protocol)?;
    let bound = classical_lower_bound(&machine, 2, Some(3))?;
    println!(
        "\ndistortion of the pretrained model: {:.6} bits/symbol",
        report.value
    );
    println!(
        "classical lower bound at dimension 2: {:.6} bits/symbol",
        bound.bound
    );
    println!(
        "the qubit model is {:.2}x more accurate than any 2-state classical model",
        bound.bound / report.value
    );

    // where the encoded pasts live on the Bloch sphere, weighted by how
    // often each past occurs
    println!("\nencoded pasts (probability-weighted Bloch coordinates):");
    println!("{:>6} {:>10} {:>8} {:>8} {:>8}", "past", "P(past)", "x", "y", "z");
    let dist = machine.word_distribution(5)?;
    let mut rows: Vec<(Vec<usize>, f64)> = dist.iter().filter(|(_, p)| *p > 0.0).collect();
    rows.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    for (word, prob) in rows.iter().take(8) {
        let state = model.encode_past(word)?;
        let (x, y, z) = bloch_coordinates(&state)?;
        let label: String = word.iter().map(|s| s.to_string()).collect();
        println!("{label:>6} {prob:>10.5} {x:>8.4} {y:>8.4} {z:>8.4}");
    }
    Ok(())
}
