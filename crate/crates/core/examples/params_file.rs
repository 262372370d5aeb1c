//! Reading a parameter file and the derived constants.

use wigner_grav::{Params, RawParams};

fn main() -> wigner_grav::Result<()> {
    let text = "\
# heavier masses, same geometry
m_kg = 2e-14
sigma_m = 1e-5
";
    let raw = RawParams::parse(text)?;
    let params = Params::derive(raw)?;
    println!("{}", raw.to_param_file());
    println!("kappa = {:.6e} J m", params.kappa);
    println!("alpha = {:.6e}, beta = {:.6e}", params.alpha, params.beta);
    println!("N = {}", params.norm_n);
    println!("hbar / dx = {:.6e} kg m/s", params.fringe_momentum());

    match RawParams::parse("m_kg = -1").and_then(Params::derive) {
        Ok(_) => println!("unexpectedly accepted"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
