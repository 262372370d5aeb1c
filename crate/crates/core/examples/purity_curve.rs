//! Marginal purity of the classical flows against the quantum reference,
//! in closed form, plus one quadrature cross-check.

use wigner_grav::dynamics::EvolutionKind;
use wigner_grav::observables::{marginal_purity, purity_series, PurityMethod};
use wigner_grav::quadrature::QuadratureConfig;
use wigner_grav::trajectory::uniform_grid;
use wigner_grav::Params;

fn main() -> wigner_grav::Result<()> {
    let params = Params::standard();
    let cfg = QuadratureConfig::default();
    let times = uniform_grid(10.0, 21);
    let series: Vec<_> = [
        EvolutionKind::QuantumReference,
        EvolutionKind::Taylor,
        EvolutionKind::Fit,
    ]
    .into_iter()
    .map(|k| purity_series(k, &times, &params, PurityMethod::GaussianAnalytic, &cfg))
    .collect::<Result<_, _>>()?;
    println!("  t (s)   gamma_qt   gamma_taylor  gamma_fit");
    for (i, t) in times.iter().enumerate() {
        println!(
            "{t:7.1}   {:.6}   {:.6}      {:.6}",
            series[0].points[i].1, series[1].points[i].1, series[2].points[i].1
        );
    }
    println!(
        "max |fit - qt| = {:.2e}",
        series[2].max_abs_diff(&series[0])
    );
    println!(
        "max |taylor - qt| = {:.2e}",
        series[1].max_abs_diff(&series[0])
    );

    let q = marginal_purity(
        EvolutionKind::Taylor,
        2.5,
        &params,
        PurityMethod::Quadrature,
        &cfg,
    )?;
    let a = marginal_purity(
        EvolutionKind::Taylor,
        2.5,
        &params,
        PurityMethod::GaussianAnalytic,
        &cfg,
    )?;
    println!("taylor at 2.5 s: quadrature {q:.10}, analytic {a:.10}");
    Ok(())
}
