//! Closed-form Gaussian algebra: expand a fringed branch, push it through
//! a shear and take its marginal.

use nalgebra::{Matrix4, Vector4};
use wigner_grav::dynamics::AffineMap4;
use wigner_grav::gaussian::{purity_of_sum, SeparableBranch};

fn main() {
    let branch = SeparableBranch {
        amplitude: 1.0 / (std::f64::consts::PI * std::f64::consts::PI),
        centers: [0.0; 4],
        precisions: [1.0; 4],
        wavenumbers: [0.0, 0.0, 0.0, 3.0],
    };
    let terms = branch.terms();
    println!("{} complex terms", terms.len());
    let total: f64 = terms.iter().map(|t| t.integral().re).sum();
    println!("integral {total:.12}");

    // free drift x -> x - p t pulled back onto the phase space
    let t = 0.5;
    let shear = AffineMap4 {
        matrix: Matrix4::new(
            1.0, 0.0, -t, 0.0, //
            0.0, 1.0, 0.0, -t, //
            0.0, 0.0, 1.0, 0.0, //
            0.0, 0.0, 0.0, 1.0,
        ),
        offset: Vector4::zeros(),
    };
    let moved: Vec<_> = terms.iter().map(|g| g.pullback(&shear)).collect();
    let marginal: Vec<_> = moved.iter().map(|g| g.marginal([1, 3])).collect();
    println!(
        "integral after drift {:.12}",
        moved.iter().map(|g| g.integral().re).sum::<f64>()
    );
    println!(
        "purity of the (x2, p2) marginal {:.12}",
        purity_of_sum(&marginal)
    );
}
