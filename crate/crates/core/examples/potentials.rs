//! Newtonian pair potential next to its Taylor and three-point fit
//! quadratic approximations.

use wigner_grav::potentials::{
    dv_fit, dv_newton, dv_taylor, v_fit, v_newton, v_taylor, QuadraticPotential,
};
use wigner_grav::Params;

fn main() -> wigner_grav::Result<()> {
    let p = Params::standard();
    for (name, q) in [
        ("taylor", QuadraticPotential::taylor(&p)),
        ("fit", QuadraticPotential::fit(&p)),
    ] {
        println!(
            "{name:>6}: c0 = {:.6e} J, c1 = {:.6e} N, c2 = {:.6e} N/m, stationary at {:.3} mm",
            q.c0,
            q.c1,
            q.c2,
            q.stationary_point() * 1e3
        );
    }

    let (v, f) = (p.kappa / p.delta_x, p.kappa / (p.delta_x * p.delta_x));
    println!("\n x/dx    V_N       V_T       V_F       V'_N      V'_T      V'_F");
    for i in 0..=8 {
        let s = -1.0 + 0.25 * i as f64;
        let x = s * p.delta_x;
        println!(
            "{s:5.2}  {:8.4}  {:8.4}  {:8.4}  {:8.4}  {:8.4}  {:8.4}",
            v_newton(x, &p)? / v,
            v_taylor(x, &p) / v,
            v_fit(x, &p) / v,
            dv_newton(x, &p)? / f,
            dv_taylor(x, &p) / f,
            dv_fit(x, &p) / f,
        );
    }
    Ok(())
}
