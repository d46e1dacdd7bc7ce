//! Manufactured smooth solution and convergence measurement.
//!
//! The discrete right-hand side is `F(v) = a(x*, v)`: the full bilinear
//! form, interface terms included, evaluated with the exact fields and the
//! discrete test functions. The Galerkin solution is then the
//! `a`-projection of the exact solution, so errors measure approximation
//! alone.

use std::f64::consts::PI;

use super::params::Params;
use super::system::{dirichlet_set, Operators, System};
use crate::exec::Execution;
use crate::fem::forms::{self, LOAD_DEGREE};
use crate::fem::{Field, TaylorHood};
use crate::mesh::{FacetTag, Mesh};
use crate::Result;

/// Closed-form solution of the coupled problem for the given material
/// parameters.
#[derive(Debug, Clone, Copy)]
pub struct Exact {
    pub lambda: f64,
    pub alpha: f64,
}

impl Exact {
    pub fn new(p: &Params) -> Self {
        Self {
            lambda: p.lambda,
            alpha: p.alpha,
        }
    }

    pub fn u(&self, x: [f64; 2]) -> [f64; 2] {
        let (cx, sx) = ((PI * x[0]).cos(), (PI * x[0]).sin());
        let (cy, sy) = ((PI * x[1]).cos(), (PI * x[1]).sin());
        [cx * sy, -sx * cy]
    }

    /// `grad[c][dir] = ∂u_c/∂x_dir`.
    pub fn grad_u(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        let (cx, sx) = ((PI * x[0]).cos(), (PI * x[0]).sin());
        let (cy, sy) = ((PI * x[1]).cos(), (PI * x[1]).sin());
        [[-PI * sx * sy, PI * cx * cy], [-PI * cx * cy, PI * sx * sy]]
    }

    pub fn d(&self, x: [f64; 2]) -> [f64; 2] {
        let u = self.u(x);
        [u[0] + x[1] * (x[0] - 0.5) / self.lambda, u[1]]
    }

    pub fn grad_d(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        let mut g = self.grad_u(x);
        g[0][0] += x[1] / self.lambda;
        g[0][1] += (x[0] - 0.5) / self.lambda;
        g
    }

    pub fn pf(&self, x: [f64; 2]) -> f64 {
        (x[0] * x[1]).exp() + (PI * x[0]).cos() * (PI * x[1]).cos()
    }

    pub fn pp(&self, x: [f64; 2]) -> f64 {
        (PI * (x[0] * x[0] + x[1] * x[1])).cos()
    }

    pub fn grad_pp(&self, x: [f64; 2]) -> [f64; 2] {
        let s = -(PI * (x[0] * x[0] + x[1] * x[1])).sin() * 2.0 * PI;
        [s * x[0], s * x[1]]
    }

    /// Total pressure `α p_P − λ div d`.
    pub fn phi(&self, x: [f64; 2]) -> f64 {
        self.alpha * self.pp(x) - x[1]
    }

    pub fn field(&self, f: Field, x: [f64; 2]) -> [f64; 2] {
        match f {
            Field::U => self.u(x),
            Field::D => self.d(x),
            Field::PF => [self.pf(x), 0.0],
            Field::Phi => [self.phi(x), 0.0],
            Field::PP => [self.pp(x), 0.0],
        }
    }

    pub fn interpolate(&self, spaces: &TaylorHood) -> Vec<f64> {
        Field::ALL.iter().flat_map(|&f| spaces.field(f).interpolate(|x| self.field(f, x))).collect()
    }
}

fn div(g: [[f64; 2]; 2]) -> f64 {
    g[0][0] + g[1][1]
}

fn sym(g: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let o = 0.5 * (g[0][1] + g[1][0]);
    [[g[0][0], o], [o, g[1][1]]]
}

/// `a(x*, ·)` assembled against the discrete test functions.
pub fn consistent_load(mesh: &Mesh, spaces: &TaylorHood, p: &Params, exact: &Exact, exec: Execution) -> Vec<f64> {
    let c = p.slip();
    let e = *exact;
    let momentum = |mu: f64, grad: fn(&Exact, [f64; 2]) -> [[f64; 2]; 2], pres: fn(&Exact, [f64; 2]) -> f64| {
        move |b: &forms::Basis, x: [f64; 2], w: f64, loc: &mut [f64]| {
            let eps = sym(grad(&e, x));
            let q = pres(&e, x);
            for i in 0..b.n {
                let g = b.grads[i];
                // ε(N e_a) : ε  =  Σ_b ε_ab ∂_b N
                for a in 0..2 {
                    let ee = eps[a][0] * g[0] + eps[a][1] * g[1];
                    loc[2 * i + a] += w * (2.0 * mu * ee - q * g[a]);
                }
            }
        }
    };
    let mut u = forms::cell_functional(mesh, &spaces.u, LOAD_DEGREE, exec, momentum(p.mu_f, Exact::grad_u, Exact::pf));
    let mut d = forms::cell_functional(mesh, &spaces.d, LOAD_DEGREE, exec, momentum(p.mu_s, Exact::grad_d, Exact::phi));
    // interface terms: ±c ⟨(u − d)·τ, v·τ⟩ and ±⟨p_P, v·n⟩
    let iface = |sign: f64| {
        move |b: &forms::Basis, pt: &forms::FacetPoint, loc: &mut [f64]| {
            let (uu, dd) = (e.u(pt.x), e.d(pt.x));
            let t = pt.tangent;
            let slip = (uu[0] - dd[0]) * t[0] + (uu[1] - dd[1]) * t[1];
            let pp = e.pp(pt.x);
            for i in 0..b.n {
                for a in 0..2 {
                    loc[2 * i + a] += sign * pt.weight * b.values[i] * (c * slip * t[a] + pp * pt.normal[a]);
                }
            }
        }
    };
    let iu = forms::facet_functional(mesh, &spaces.u, &[FacetTag::Interface], 9, iface(1.0));
    let id = forms::facet_functional(mesh, &spaces.d, &[FacetTag::Interface], 9, iface(-1.0));
    u.iter_mut().zip(iu).for_each(|(a, b)| *a += b);
    d.iter_mut().zip(id).for_each(|(a, b)| *a += b);

    let pf = forms::cell_functional(mesh, &spaces.pf, LOAD_DEGREE, exec, |b, x, w, loc| {
        let dv = div(e.grad_u(x));
        for i in 0..b.n {
            loc[i] -= w * dv * b.values[i];
        }
    });
    let phi = forms::cell_functional(mesh, &spaces.phi, LOAD_DEGREE, exec, |b, x, w, loc| {
        let v = -div(e.grad_d(x)) - e.phi(x) / p.lambda + p.alpha / p.lambda * e.pp(x);
        for i in 0..b.n {
            loc[i] += w * v * b.values[i];
        }
    });
    let mut pp = forms::cell_functional(mesh, &spaces.pp, LOAD_DEGREE, exec, |b, x, w, loc| {
        let v = p.alpha / p.lambda * e.phi(x) - (p.c0 + p.alpha * p.alpha / p.lambda) * e.pp(x);
        let g = e.grad_pp(x);
        let k = p.kappa / p.mu_f;
        for i in 0..b.n {
            loc[i] += w * (v * b.values[i] - k * (g[0] * b.grads[i][0] + g[1] * b.grads[i][1]));
        }
    });
    let ipp = forms::facet_functional(mesh, &spaces.pp, &[FacetTag::Interface], 9, |b, pt, loc| {
        let (uu, dd) = (e.u(pt.x), e.d(pt.x));
        let jump = (uu[0] - dd[0]) * pt.normal[0] + (uu[1] - dd[1]) * pt.normal[1];
        for i in 0..b.n {
            loc[i] += pt.weight * jump * b.values[i];
        }
    });
    pp.iter_mut().zip(ipp).for_each(|(a, b)| *a += b);

    [u, d, pf, phi, pp].concat()
}

/// Errors of one discrete solution: `H¹` for `u`, `d`, `p_P` and `L²` for
/// `p_F`, `φ`, in field order.
pub fn errors(mesh: &Mesh, spaces: &TaylorHood, x: &[f64], exact: &Exact, exec: Execution) -> [f64; 5] {
    let off = spaces.offsets();
    let mut out = [0.0; 5];
    for f in Field::ALL {
        let space = spaces.field(f);
        let coeffs = &x[off[f.index()]..off[f.index() + 1]];
        let sd = space.subdomain();
        let h1 = matches!(f, Field::U | Field::D | Field::PP);
        let e2 = forms::integrate(mesh, sd, LOAD_DEGREE, exec, |pt, cell, geom, l| {
            let (v, g) = space.evaluate(coeffs, cell, geom, l);
            let ev = exact.field(f, pt);
            let mut s = 0.0;
            for c in 0..space.components() {
                s += (v[c] - ev[c]).powi(2);
            }
            if h1 {
                let eg = match f {
                    Field::U => exact.grad_u(pt),
                    Field::D => exact.grad_d(pt),
                    _ => [exact.grad_pp(pt), [0.0; 2]],
                };
                for c in 0..space.components() {
                    s += (g[c][0] - eg[c][0]).powi(2) + (g[c][1] - eg[c][1]).powi(2);
                }
            }
            s
        });
        out[f.index()] = e2.sqrt();
    }
    out
}

/// Solves the manufactured problem on `mesh` and returns the field errors.
pub fn solve_and_measure(mesh: &Mesh, p: &Params, exec: Execution) -> Result<[f64; 5]> {
    let ops = Operators::assemble(mesh, exec)?;
    let exact = Exact::new(p);
    let dir = dirichlet_set(mesh, &ops.spaces, |f, x| exact.field(f, x))?;
    let sys = System::new(&ops, p, dir)?;
    let rhs = sys.apply_dirichlet(&consistent_load(mesh, &ops.spaces, p, &exact, exec));
    let x = sys.solve_direct(&rhs)?;
    Ok(errors(mesh, &ops.spaces, &x, &exact, exec))
}

/// Observed orders `log2(e_coarse / e_fine)` between consecutive levels.
pub fn rates(errors: &[[f64; 5]]) -> Vec<[f64; 5]> {
    errors.windows(2).map(|w| std::array::from_fn(|i| (w[0][i] / w[1][i]).log2())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_split_square, BcConfig};

    #[test]
    fn divergences_of_the_exact_fields() {
        let p = Params {
            lambda: 7.0,
            ..Params::default()
        };
        let e = Exact::new(&p);
        for x in [[0.3, 0.7], [0.8, 0.1]] {
            assert!(div(e.grad_u(x)).abs() < 1e-14);
            assert!((div(e.grad_d(x)) - x[1] / 7.0).abs() < 1e-14);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let e = Exact::new(&Params {
            lambda: 3.0,
            ..Params::default()
        });
        let x = [0.37, 0.61];
        let h = 1e-6;
        for dir in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[dir] += h;
            xm[dir] -= h;
            let gd = e.grad_d(x);
            let gp = e.grad_pp(x);
            for c in 0..2 {
                let fd = (e.d(xp)[c] - e.d(xm)[c]) / (2.0 * h);
                assert!((fd - gd[c][dir]).abs() < 1e-8);
            }
            let fd = (e.pp(xp) - e.pp(xm)) / (2.0 * h);
            assert!((fd - gp[dir]).abs() < 1e-8);
        }
    }

    #[test]
    fn consistent_load_matches_interpolant_for_matrix_action() {
        // The consistent load and A·(interpolant) differ only by the interpolation error.
        let mesh = build_split_square(4, BcConfig::StressPressure).unwrap();
        let p = Params::default();
        let ops = Operators::assemble(&mesh, Execution::Sequential).unwrap();
        let exact = Exact::new(&p);
        let load = consistent_load(&mesh, &ops.spaces, &p, &exact, Execution::Sequential);
        let xi = exact.interpolate(&ops.spaces);
        let dir = dirichlet_set(&mesh, &ops.spaces, |f, x| exact.field(f, x)).unwrap();
        let sys = System::new(&ops, &p, dir).unwrap();
        let ax = sys.unconstrained.mul_vec(&xi);
        let diff = load.iter().zip(&ax).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let scale = load.iter().map(|a| a.abs()).fold(0.0, f64::max);
        assert!(diff < 0.2 * scale, "{diff} vs {scale}");
    }

    #[test]
    fn errors_decrease_under_refinement() {
        let p = Params::default();
        let e: Vec<_> = [4, 8]
            .iter()
            .map(|&n| solve_and_measure(&build_split_square(n, BcConfig::StressPressure).unwrap(), &p, Execution::Sequential).unwrap())
            .collect();
        for r in rates(&e)[0] {
            assert!(r > 1.5, "{:?}", rates(&e));
        }
    }
}
