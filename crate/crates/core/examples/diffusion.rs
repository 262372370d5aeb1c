//! Global and reduced purity of the diffusion model as the diffusion rate
//! is scaled around the threshold.

use wigner_grav::observables::{
    diffusion_rate_for_threshold, gamma_global_diffusion, gamma_reduced_diffusion,
};
use wigner_grav::wigner::BranchSet;
use wigner_grav::Params;

fn main() {
    let params = Params::standard();
    let branches = BranchSet::new(&params);
    println!("D / D_threshold   Gamma_D    gamma_D    witness");
    for scale in [0.0, 0.25, 0.5, 1.0, 2.0, 4.0] {
        let rate = diffusion_rate_for_threshold(scale, 2.5, &params);
        let g = gamma_global_diffusion(2.5, rate, &params, &branches);
        let r = gamma_reduced_diffusion(2.5, rate, &params, &branches);
        println!(
            "{scale:15.2}   {g:.6}   {r:.6}   {}",
            if g > r { "entangled" } else { "fails" }
        );
    }
}
