//! Compiling the permutation test to qubit gates and simulating it.
//!
//! Each of the n parallel tests gets ceil(log2 K) ancilla qubits holding a
//! K-level register: block Fourier transform, controlled cyclic copy
//! permutation, inverse transform, measure. The simulated outcome
//! distribution must match the direct path-sum route exactly.

use gce_lab::circuit::{compile_circuit, simulate_gatelist, GateList};
use gce_lab::permtest::exact_probability_table;
use gce_lab::state::haar_random_state;

fn main() -> gce_lab::Result<()> {
    let (n, k) = (2usize, 3u32);
    let list = compile_circuit(n, k)?;
    println!(
        "compiled test for n = {n}, K = {k}: {} gates on {} qubits ({} ancilla + {} data)\n",
        list.gates().len(),
        list.total_qubits(),
        n * list.l(),
        n * k as usize,
    );
    print!("{}", list.to_text());

    // the text form is the interchange format; it parses back losslessly
    let reparsed = GateList::parse(&list.to_text())?;
    assert_eq!(reparsed.to_text(), list.to_text());

    let psi = haar_random_state(n, 2024)?;
    let sim = simulate_gatelist(&list, &psi)?;
    let exact = exact_probability_table(&psi, k)?;

    let mut tvd = 0f64;
    for (digits, p) in exact.iter() {
        tvd += (p - sim.probability(digits)).abs();
    }
    for (digits, p) in sim.iter() {
        if exact.probability(digits) == 0.0 {
            tvd += p.abs();
        }
    }
    println!("\ngate simulation vs direct path sum on a Haar state:");
    println!("  total variation distance = {:.3e}", 0.5 * tvd);
    println!(
        "  probability on padding ancilla values (>= K) = {:.3e}",
        1.0 - sim.total()
    );
    Ok(())
}
