//! Closed-form algebra of Gaussian terms `exp(-z^T Q z + l^T z + c)` with
//! real `Q` and complex `l`, `c`.
//!
//! Every branch is a Gaussian times cosines, and a cosine is a sum of two
//! complex exponentials. Affine pullbacks, marginals and overlap integrals
//! of such terms are all closed form.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use num_complex::Complex64 as C;

use crate::dynamics::AffineMap4;
use crate::wigner::Z4;

fn c(x: f64) -> C {
    C::new(x, 0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussTerm4 {
    pub q: Matrix4<f64>,
    pub l: Vector4<C>,
    pub c: C,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussTerm2 {
    pub q: Matrix2<f64>,
    pub l: Vector2<C>,
    pub c: C,
}

/// Separable product of one-dimensional factors
/// `exp(-a (z - mu)^2) cos(k (z - mu))`, expanded into complex Gaussians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparableBranch {
    pub amplitude: f64,
    pub centers: [f64; 4],
    pub precisions: [f64; 4],
    pub wavenumbers: [f64; 4],
}

impl SeparableBranch {
    pub fn terms(&self) -> Vec<GaussTerm4> {
        let mut out = vec![GaussTerm4 {
            q: Matrix4::from_diagonal(&Vector4::from(self.precisions)),
            l: Vector4::zeros(),
            c: c(self.amplitude.ln()),
        }];
        for i in 0..4 {
            let (mu, a, k) = (self.centers[i], self.precisions[i], self.wavenumbers[i]);
            let signs: &[f64] = if k != 0.0 { &[1.0, -1.0] } else { &[0.0] };
            let mut next = Vec::with_capacity(out.len() * signs.len());
            for t in &out {
                for &s in signs {
                    let mut t = t.clone();
                    let ik = C::new(0.0, s * k);
                    t.l[i] += c(2.0 * a * mu) + ik;
                    t.c += c(-a * mu * mu) - ik * mu;
                    if k != 0.0 {
                        t.c += c(0.5f64.ln());
                    }
                    next.push(t);
                }
            }
            out = next;
        }
        out
    }
}

impl GaussTerm4 {
    pub fn eval(&self, z: &Z4) -> C {
        let quad = z.dot(&(self.q * z));
        let lin: C = self.l.iter().zip(z.iter()).map(|(l, x)| l * x).sum();
        (c(-quad) + lin + self.c).exp()
    }

    /// The term as a function of `z` after substituting `map(z)`.
    pub fn pullback(&self, map: &AffineMap4) -> Self {
        let b = map.matrix;
        let e = map.offset;
        let qb = self.q * b;
        let qe = self.q * e;
        let bt = b.transpose().map(c);
        let lin: C = self.l.iter().zip(e.iter()).map(|(l, x)| l * x).sum();
        Self {
            q: b.transpose() * qb,
            l: (b.transpose() * qe).map(|x| c(-2.0 * x)) + bt * self.l,
            c: self.c + c(-e.dot(&qe)) + lin,
        }
    }

    /// Integrates out the two coordinates not listed in `keep`.
    pub fn marginal(&self, keep: [usize; 2]) -> GaussTerm2 {
        let drop: Vec<usize> = (0..4).filter(|i| !keep.contains(i)).collect();
        let u = [drop[0], drop[1]];
        let quu = Matrix2::from_fn(|r, s| self.q[(u[r], u[s])]);
        let quv = Matrix2::from_fn(|r, s| self.q[(u[r], keep[s])]);
        let qvv = Matrix2::from_fn(|r, s| self.q[(keep[r], keep[s])]);
        let lu = Vector2::new(self.l[u[0]], self.l[u[1]]);
        let lv = Vector2::new(self.l[keep[0]], self.l[keep[1]]);
        let inv = quu
            .try_inverse()
            .expect("marginalized block is positive definite");
        let a = quv.transpose() * inv;
        let inv_c = inv.map(c);
        GaussTerm2 {
            q: qvv - a * quv,
            l: lv - a.map(c) * lu,
            c: self.c + c((PI / quu.determinant().sqrt()).ln()) + 0.25 * lu.dot(&(inv_c * lu)),
        }
    }

    pub fn integral(&self) -> C {
        let inv = self.q.try_inverse().expect("positive definite");
        let quad = self.l.dot(&(inv.map(c) * self.l));
        (self.c + 0.25 * quad + c((PI * PI / self.q.determinant().sqrt()).ln())).exp()
    }
}

impl GaussTerm2 {
    pub fn eval(&self, x: f64, y: f64) -> C {
        let v = Vector2::new(x, y);
        let quad = v.dot(&(self.q * v));
        (c(-quad) + self.l[0] * x + self.l[1] * y + self.c).exp()
    }

    pub fn product(&self, other: &GaussTerm2) -> Self {
        Self {
            q: self.q + other.q,
            l: self.l + other.l,
            c: self.c + other.c,
        }
    }

    pub fn integral(&self) -> C {
        let inv = self.q.try_inverse().expect("positive definite");
        let quad = self.l.dot(&(inv.map(c) * self.l));
        (self.c + 0.25 * quad + c((PI / self.q.determinant().sqrt()).ln())).exp()
    }
}

/// `2 pi ∫ (Σ T)^2` for real-valued sums of 2D terms.
pub fn purity_of_sum(terms: &[GaussTerm2]) -> f64 {
    let mut acc = 0.0;
    for (i, a) in terms.iter().enumerate() {
        acc += a.product(a).integral().re;
        for b in &terms[i + 1..] {
            acc += 2.0 * a.product(b).integral().re;
        }
    }
    2.0 * PI * acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_2d, integrate_4d, Axis, QuadratureSpec, Rule};
    use nalgebra::Matrix4;

    fn sample_branch() -> SeparableBranch {
        SeparableBranch {
            amplitude: 0.7,
            centers: [0.3, -0.2, 0.1, 0.0],
            precisions: [0.5, 0.8, 2.0, 1.5],
            wavenumbers: [0.0, 0.0, 3.0, 2.0],
        }
    }

    fn direct(b: &SeparableBranch, z: &Z4) -> f64 {
        (0..4)
            .map(|i| {
                let u = z[i] - b.centers[i];
                (-b.precisions[i] * u * u).exp() * (b.wavenumbers[i] * u).cos()
            })
            .product::<f64>()
            * b.amplitude
    }

    #[test]
    fn expansion_reproduces_cosines() {
        let b = sample_branch();
        let terms = b.terms();
        assert_eq!(terms.len(), 4);
        for z in [Z4::new(0.1, 0.2, -0.3, 0.4), Z4::new(-1.0, 0.5, 0.7, -0.2)] {
            let sum: C = terms.iter().map(|t| t.eval(&z)).sum();
            assert!((sum.re - direct(&b, &z)).abs() < 1e-14);
            assert!(sum.im.abs() < 1e-14);
        }
    }

    #[test]
    fn pullback_composes_with_evaluation() {
        let b = sample_branch();
        let map = AffineMap4 {
            matrix: Matrix4::new(
                1.0, 0.1, 0.2, 0.0, //
                0.0, 1.0, 0.0, 0.3, //
                0.05, 0.0, 1.0, 0.0, //
                0.0, -0.1, 0.0, 1.0,
            ),
            offset: Vector4::new(0.1, -0.2, 0.3, 0.05),
        };
        let z = Z4::new(0.2, -0.1, 0.4, 0.3);
        let want = direct(&b, &map.apply(&z));
        let got: C = b.terms().iter().map(|t| t.pullback(&map).eval(&z)).sum();
        assert!((got.re - want).abs() < 1e-14, "{got} vs {want}");
    }

    #[test]
    fn marginal_and_integral_match_quadrature() {
        let b = sample_branch();
        let terms = b.terms();
        let spec = QuadratureSpec::new(
            vec![Axis::generic(0.0, 8.0, 96); 2],
            Rule::GaussLegendre,
            1.0,
        );
        // integrate out coordinates 0 and 2 at a fixed (z1, z3)
        let (y, q) = (0.15, -0.25);
        let numeric = integrate_2d(|x, p| direct(&b, &Z4::new(x, y, p, q)), &spec).unwrap();
        let closed: C = terms.iter().map(|t| t.marginal([1, 3]).eval(y, q)).sum();
        assert!((closed.re - numeric).abs() < 1e-12, "{closed} vs {numeric}");

        let spec4 = QuadratureSpec::new(
            vec![Axis::generic(0.0, 8.0, 80); 4],
            Rule::GaussLegendre,
            1.0,
        );
        let numeric =
            integrate_4d(|a, b2, c2, d| direct(&b, &Z4::new(a, b2, c2, d)), &spec4).unwrap();
        let closed: C = terms.iter().map(|t| t.integral()).sum();
        assert!((closed.re - numeric).abs() < 1e-12, "{closed} vs {numeric}");
    }

    #[test]
    fn purity_of_a_gaussian() {
        // normalized Gaussian exp(-a x^2 - b p^2): purity sqrt(a b) with hbar = 1
        let a = 0.5;
        let bb = 2.0;
        let t = GaussTerm2 {
            q: Matrix2::new(a, 0.0, 0.0, bb),
            l: Vector2::zeros(),
            c: c(((a * bb).sqrt() / PI).ln()),
        };
        assert!((t.integral().re - 1.0).abs() < 1e-14);
        assert!((purity_of_sum(&[t]) - 1.0).abs() < 1e-14);
    }
}
