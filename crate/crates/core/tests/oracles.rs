use wigner_grav::dynamics::EvolutionKind;
use wigner_grav::observables::{
    diffusion_rate_for_threshold, gamma_global_diffusion, gamma_reduced_diffusion, marginal2,
};
use wigner_grav::quadrature::{gauss_legendre, QuadratureConfig};
use wigner_grav::wigner::{branch_term, BranchSet, PhasePoint};
use wigner_grav::Params;

/// Particle-2 marginal under stepwise forces by shifting each branch's
/// momenta and integrating out particle 1 with plain Gauss-Legendre.
fn shifted_marginal(x2: f64, p2: f64, t: f64, p: &Params, branches: &BranchSet) -> f64 {
    let (xn, xw) = gauss_legendre(64);
    let (pn, pw) = gauss_legendre(1024);
    let hx = 8.0 * p.sigma;
    let hp = 10.0 * p.hbar / p.sigma;
    let mut total = 0.0;
    for b in branches.iter() {
        let kick = b.force * t;
        let mut acc = 0.0;
        for (u, wu) in xn.iter().zip(&xw) {
            let x1 = b.x0 + hx * u;
            for (v, wv) in pn.iter().zip(&pw) {
                let p1 = hp * v;
                let pt = PhasePoint::new(x1, x2, p1 - kick, p2 + kick);
                acc += wu * wv * branch_term(b.index, &pt, p, branches).unwrap();
            }
        }
        total += acc * hx * hp;
    }
    total
}

#[test]
fn stepwise_marginal_matches_shifted_branches() {
    let p = Params::standard();
    let branches = BranchSet::new(&p);
    let cfg = QuadratureConfig::default();
    let pf = p.fringe_momentum();
    let t = 2.5;
    for (x2, p2) in [
        (p.d / 2.0, 0.0),
        (p.d / 2.0 - p.delta_x / 2.0, 0.4 * pf),
        (p.d / 2.0 + p.sigma, -1.3 * pf),
    ] {
        let got = marginal2(EvolutionKind::Stepwise, x2, p2, t, &p, &cfg).unwrap();
        let want = shifted_marginal(x2, p2, t, &p, &branches);
        assert!((got - want).abs() <= 1e-9 * want.abs(), "{got} vs {want}");
    }
    // forces actually move the fringes
    let x2 = p.d / 2.0 - p.delta_x / 2.0;
    let moved = marginal2(EvolutionKind::Stepwise, x2, 0.4 * pf, t, &p, &cfg).unwrap();
    let still = marginal2(EvolutionKind::Stepwise, x2, 0.4 * pf, 0.0, &p, &cfg).unwrap();
    assert!((moved - still).abs() > 1e-3 * still.abs());
}

#[test]
fn diffusion_purities_decrease_with_rate() {
    let p = Params::standard();
    let branches = BranchSet::new(&p);
    let mut last = (f64::INFINITY, f64::INFINITY);
    for i in 0..=20 {
        let rate = diffusion_rate_for_threshold(0.25 * i as f64, 2.5, &p);
        let g = gamma_global_diffusion(2.5, rate, &p, &branches);
        let r = gamma_reduced_diffusion(2.5, rate, &p, &branches);
        assert!(g <= last.0 && r <= last.1);
        last = (g, r);
    }
}

#[test]
fn kicks_of_the_closest_branch() {
    // F = G m^2 / (d - dx)^2 and the kick over 2.5 s in units of hbar / dx
    let p = Params::standard();
    let branches = BranchSet::new(&p);
    let f = 6.6743e-11 * 1e-28 / (2.0e-4f64 * 2.0e-4);
    let b4 = branches.get(4).unwrap();
    assert!((b4.force - f).abs() <= 1e-12 * f);
    let kick = f * 2.5 / (1.054571817e-34 / 2.5e-4);
    assert!((kick - 0.99).abs() < 0.01, "{kick}");
}
