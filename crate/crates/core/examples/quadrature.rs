//! Gauss-Legendre tensor quadrature on a fringed integrand.

use wigner_grav::quadrature::{gauss_legendre, integrate_2d, Axis, QuadratureSpec, Rule};

fn main() -> wigner_grav::Result<()> {
    let (x, w) = gauss_legendre(5);
    println!("5-point nodes   {x:.12?}");
    println!("5-point weights {w:.12?}");

    // ∫∫ exp(-x^2 - p^2) cos(k p)^2 = pi (1 + exp(-k^2)) / 2
    let k: f64 = 6.0;
    let exact = std::f64::consts::PI * (1.0 + (-k * k).exp()) / 2.0;
    for (nodes, rule) in [
        (32, Rule::GaussLegendre),
        (64, Rule::GaussLegendre),
        (64, Rule::Trapezoid),
    ] {
        let spec = QuadratureSpec::new(
            vec![
                Axis::generic(0.0, 8.0, nodes),
                Axis::momentum(0.0, 8.0, 8 * nodes, true),
            ],
            rule,
            k,
        );
        let v = integrate_2d(|x, p| (-x * x - p * p).exp() * (k * p).cos().powi(2), &spec)?;
        println!("{rule} with {nodes} nodes: error {:.2e}", (v - exact).abs());
    }
    Ok(())
}
