//! Relative-coordinate trajectories of the closest branch pairs under the
//! exact potential and the three approximate models.

use wigner_grav::experiments::{time_grid, TrajectorySet, TrajectoryStart};
use wigner_grav::Params;

fn main() -> wigner_grav::Result<()> {
    let params = Params::standard();
    let grid = time_grid(10.0, 11)?;
    for start in [TrajectoryStart::Closest, TrajectoryStart::Intermediate] {
        let set = TrajectorySet::compute(start, &grid, &params)?;
        println!(
            "{} start, max |dx| = {:.2e} sigma",
            start.label(),
            set.max_displacement(&params)
        );
        println!("  t (s)   dp_newton  dp_taylor  dp_fit     dp_step   (hbar/dx)");
        let pf = params.fringe_momentum();
        for (i, t) in grid.iter().enumerate() {
            println!(
                "{:7.1}  {:9.4}  {:9.4}  {:9.4}  {:9.4}",
                t,
                set.newton[i].dp_rel / pf,
                set.taylor[i].dp_rel / pf,
                set.fit[i].dp_rel / pf,
                set.step[i].dp_rel / pf
            );
        }
        for (name, model) in [
            ("taylor", &set.taylor),
            ("fit", &set.fit),
            ("step", &set.step),
        ] {
            println!(
                "  max |{name} - newton| = {:.3} hbar/dx",
                set.max_momentum_deviation(model, &params)
            );
        }
    }
    Ok(())
}
