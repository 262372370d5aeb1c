//! Affine Liouville flows of the quadratic potentials: symplecticity,
//! inversion and backward tracing of a phase-space point.

use wigner_grav::dynamics::{backward_point, flow_fit, flow_taylor, EvolutionKind};
use wigner_grav::wigner::PhasePoint;
use wigner_grav::Params;

fn main() -> wigner_grav::Result<()> {
    let params = Params::standard();
    for t in [0.0, 2.5, 10.0, 1e4] {
        for (name, map) in [
            ("taylor", flow_taylor(t, &params)),
            ("fit", flow_fit(t, &params)),
        ] {
            let round_trip = map.compose(&map.inverse().expect("flows are invertible"));
            println!(
                "t = {t:>7}  {name:>6}: |M^T J M - J| = {:.1e}, det = {:.15}, |M M^-1 - 1| = {:.1e}",
                map.symplectic_defect(),
                map.determinant(),
                round_trip.max_abs_diff(&wigner_grav::dynamics::AffineMap4::identity())
            );
        }
    }

    let pt = PhasePoint::new(0.0, params.d, 0.0, 0.0);
    for kind in [EvolutionKind::Taylor, EvolutionKind::Fit] {
        let back = backward_point(kind, &pt, 10.0, &params)?;
        println!(
            "{kind}: (0, d, 0, 0) at 10 s came from p1 = {:+.3e}, p2 = {:+.3e} (hbar/dx units)",
            back.p1 / params.fringe_momentum(),
            back.p2 / params.fringe_momentum()
        );
    }
    Ok(())
}
