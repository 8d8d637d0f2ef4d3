//! Extend a model's Kraus operators to the unitary that one simulation step
//! applies to memory and output register.
//!
//! Run with: cargo run --release --example unitary_embedding
//!
//! The unitary acts on memory (dimension d) tensor register (dimension
//! |alphabet|, prepared in 0); measuring the register after each step emits
//! the next symbol. The fixed columns U|k,0> carry the Kraus entries, and
//! the remaining columns are filled by Gram-Schmidt.

use num_complex::Complex64;
use qsm::linalg::CMatrix;
use qsm::quantum::{recover_kraus, KrausModel, ParamSet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qsm::Result<()> {
    // scalar biased-coin model: the unitary is the 2x2 rotation whose first
    // column is (sqrt(0.3), sqrt(0.7))
    let coin = KrausModel::from_kraus(
        vec![
            CMatrix::from_element(1, 1, Complex64::new(0.3f64.sqrt(), 0.0)),
            CMatrix::from_element(1, 1, Complex64::new(0.7f64.sqrt(), 0.0)),
        ],
        0,
        1e-12,
    )?;
    let u = coin.complete_unitary()?;
    println!("coin model unitary:");
    for i in 0..2 {
        println!(
            "  [{:+.4}{:+.4}i, {:+.4}{:+.4}i]",
            u[(i, 0)].re,
            u[(i, 0)].im,
            u[(i, 1)].re,
            u[(i, 1)].im
        );
    }

    // a qubit model over a binary alphabet lifts to a 4x4 unitary
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (model, _) = recover_kraus(&ParamSet::random(2, 2, &mut rng))?;
    let u = model.complete_unitary()?;
    let residual = qsm::linalg::identity_deviation(&(u.adjoint() * &u));
    println!("\nrandom qubit model: {}x{} unitary, U^dag U - I residual {residual:.2e}", u.nrows(), u.ncols());

    // the embedded blocks reproduce the Kraus operators exactly
    let a = model.alphabet_size();
    let mut worst = 0.0f64;
    for x in 0..a {
        for j in 0..model.dim() {
            for k in 0..model.dim() {
                let diff = (u[(j * a + x, k * a)] - model.kraus()[x][(j, k)]).norm();
                worst = worst.max(diff);
            }
        }
    }
    println!("largest deviation of <j,x|U|k,0> from the Kraus entries: {worst:.2e}");
    Ok(())
}
