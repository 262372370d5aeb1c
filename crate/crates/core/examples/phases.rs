//! Gravitational phase rates of the three-position superposition and the
//! exact purity of the reduced quantum state.

use wigner_grav::observables::{quantum_purity, PhaseRates};
use wigner_grav::Params;

fn main() {
    let params = Params::standard();
    let rates = PhaseRates::new(&params);
    println!("phi rate  {:.6} rad/s", rates.rate_phi);
    println!("dLR rate  {:.6} rad/s", rates.delta_lr);
    println!("dRL rate  {:.6} rad/s", rates.delta_rl);

    let (lr, rl) = rates.phases(2.5);
    println!("at t = 2.5 s: dLR t = {lr:.4}, dRL t = {rl:.4}");

    println!("\n  t (s)   gamma_qt");
    for i in 0..=10 {
        let t = i as f64;
        println!("{t:7.1}   {:.6}", quantum_purity(t, &params));
    }
}
