//! Negativity of the momentum marginal under stepwise forces, with and
//! without momentum diffusion at the threshold rate.

use wigner_grav::dynamics::EvolutionKind;
use wigner_grav::observables::{diffusion_rate_for_threshold, negativity};
use wigner_grav::quadrature::QuadratureConfig;
use wigner_grav::Params;

fn main() -> wigner_grav::Result<()> {
    let params = Params::standard();
    let cfg = QuadratureConfig::default();
    let rate = diffusion_rate_for_threshold(1.0, 2.5, &params);
    let diffusion = EvolutionKind::stepwise_diffusion(rate)?;
    println!("threshold diffusion rate D = {rate:.3e} kg^2 m^2 / s^3");
    println!("  t (s)   nu_step     nu_diffusion");
    for t in [0.0, 0.5, 1.0, 1.5, 2.0, 2.5] {
        println!(
            "{t:7.1}   {:.4e}  {:.4e}",
            negativity(EvolutionKind::Stepwise, t, &params, &cfg)?,
            negativity(diffusion, t, &params, &cfg)?
        );
    }
    Ok(())
}
