//! The nine-branch initial Wigner function: branch geometry, stepwise
//! forces and a few point values.

use wigner_grav::wigner::{initial_wigner, initial_wigner_branch_sum, BranchSet, PhasePoint};
use wigner_grav::Params;

fn main() {
    let params = Params::standard();
    let branches = BranchSet::new(&params);
    println!(" j   x0 (um)   y0 (um)   xbar (um)   force (N)   fringes");
    for b in branches.iter() {
        println!(
            "{:2}  {:8.1}  {:8.1}  {:10.1}   {:.3e}   {}{}",
            b.index,
            b.x0 * 1e6,
            b.y0 * 1e6,
            b.xbar * 1e6,
            b.force,
            if b.gamma1 != 0.0 { "p1 " } else { "" },
            if b.gamma2 != 0.0 { "p2" } else { "" },
        );
    }

    let pf = params.fringe_momentum();
    let x2 = params.d;
    for (x1, p1, p2) in [
        (0.0, 0.0, 0.0),
        (0.0, 0.5 * pf, 0.0),
        (-params.delta_x, 0.0, 0.3 * pf),
    ] {
        let pt = PhasePoint::new(x1, x2, p1, p2);
        println!(
            "W({:+.2e}, {:.2e}, {:+.2e}, {:+.2e}) = {:.6e} (branch sum {:.6e})",
            x1,
            x2,
            p1,
            p2,
            initial_wigner(&pt, &params),
            initial_wigner_branch_sum(&pt, &params, &branches)
        );
    }
}
