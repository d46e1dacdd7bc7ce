//! Discrete inf-sup constants of the coupled constraint operator.
//!
//! The multiplier space is `(p_F, φ, p_P|Σ)`: only the interface trace of
//! the pore pressure enters the constraint, so it is measured in the
//! weighted fractional norm while `p_F` and `φ` carry the viscosity-scaled
//! L² norms.

use super::Problem;
use crate::assembly::{field_mask, Params};
use crate::fem::Field;
use crate::interface::{FractionalOperator, TraceSpace};
use crate::linalg::infsup::inf_sup_constant;
use crate::linalg::CsrMatrix;
use crate::precond::InterfaceOptions;
use crate::{Error, Result};

fn dense_to_csr(m: &faer::Mat<f64>) -> CsrMatrix {
    let rows: Vec<Vec<f64>> = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect();
    CsrMatrix::from_dense(&rows)
}

/// `β` of `B = [−div 0; 0 −div; T_n −T_n]` with the primal energy norm of
/// the velocity-displacement block.
pub fn coupled_inf_sup(problem: &Problem, params: &Params, opts: &InterfaceOptions) -> Result<f64> {
    let ops = &problem.ops;
    let spaces = &ops.spaces;
    let system = problem.system(params)?;
    let trace = TraceSpace::new(&problem.mesh, &spaces.pp)?;
    let pp_mask = field_mask(spaces, &system.dirichlet, Field::PP);
    if trace.bulk_nodes().iter().any(|&n| pp_mask[n]) {
        return Err(Error::Eigen("interface pressure dofs must be unconstrained".into()));
    }
    let h = FractionalOperator::with_options(&trace, opts.variant, params.interface_weight(), opts.strong, opts.nitsche_beta)?;

    let (nu, nd) = (spaces.u.ndofs(), spaces.d.ndofs());
    let c = params.slip();
    let t = ops.tangential_ud.scaled(-c);
    let tt = t.transpose();
    let fe = ops.fluid_elasticity(params);
    let se = ops.solid_elasticity(params);
    let a = CsrMatrix::from_blocks(&[nu, nd], &[nu, nd], &[vec![Some(&fe), Some(&t)], vec![Some(&tt), Some(&se)]]);
    let mut primal = field_mask(spaces, &system.dirichlet, Field::U);
    primal.extend(field_mask(spaces, &system.dirichlet, Field::D));
    let a = a.constrained(&primal, &primal, true);

    let r = trace.restriction();
    let du = ops.div_u.scaled(-1.0);
    let dd = ops.div_d.scaled(-1.0);
    let tu = CsrMatrix::from_triplets(trace.dim(), nu, &triplets_of(&r, &ops.normal_u, 1.0));
    let td = CsrMatrix::from_triplets(trace.dim(), nd, &triplets_of(&r, &ops.normal_d, -1.0));
    let (npf, nphi, nt) = (spaces.pf.ndofs(), spaces.phi.ndofs(), trace.dim());
    let b = CsrMatrix::from_blocks(
        &[npf, nphi, nt],
        &[nu, nd],
        &[vec![Some(&du), None], vec![None, Some(&dd)], vec![Some(&tu), Some(&td)]],
    );
    let none = vec![false; npf + nphi + nt];
    let b = b.constrained(&none, &primal, false);

    let mpf = ops.mass_pf.scaled(0.5 / params.mu_f);
    let mphi = ops.mass_phi.scaled(0.5 / params.mu_s);
    let hs = dense_to_csr(&h.matrix);
    let n = CsrMatrix::from_blocks(
        &[npf, nphi, nt],
        &[npf, nphi, nt],
        &[vec![Some(&mpf), None, None], vec![None, Some(&mphi), None], vec![None, None, Some(&hs)]],
    );
    Ok(inf_sup_constant(&a, &b, &n)?.0)
}

fn triplets_of(r: &CsrMatrix, m: &CsrMatrix, s: f64) -> Vec<(usize, usize, f64)> {
    let mut t = Vec::new();
    for i in 0..r.nrows() {
        for (k, rv) in r.row(i) {
            t.extend(m.row(k).map(|(j, v)| (i, j, s * rv * v)));
        }
    }
    t
}

/// `β` of the Stokes pair alone: `(q, div v)` against `2μ_f ε:ε` and
/// `(1/2μ_f) M`.
pub fn stokes_inf_sup(problem: &Problem, params: &Params) -> Result<f64> {
    let ops = &problem.ops;
    let spaces = &ops.spaces;
    let system = problem.system(params)?;
    let mask = field_mask(spaces, &system.dirichlet, Field::U);
    let a = ops.strain_u.scaled(2.0 * params.mu_f).constrained(&mask, &mask, true);
    let b = ops.div_u.constrained(&vec![false; spaces.pf.ndofs()], &mask, false);
    let n = ops.mass_pf.scaled(0.5 / params.mu_f);
    Ok(inf_sup_constant(&a, &b, &n)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Execution;
    use crate::interface::FractionalVariant;
    use crate::mesh::{build_split_square, BcConfig};

    fn problem(n: usize) -> Problem {
        Problem::new(build_split_square(n, BcConfig::VelDisp).unwrap(), Execution::Sequential).unwrap()
    }

    #[test]
    fn stokes_constant_is_positive_and_viscosity_free() {
        let p = problem(4);
        let b1 = stokes_inf_sup(&p, &Params::default()).unwrap();
        let b2 = stokes_inf_sup(
            &p,
            &Params {
                mu_f: 1e-3,
                ..Params::default()
            },
        )
        .unwrap();
        assert!(b1 > 0.2, "{b1}");
        assert!((b1 - b2).abs() < 1e-8 * b1);
    }

    #[test]
    fn coupled_constant_is_positive() {
        let opts = InterfaceOptions::with_variant(FractionalVariant::DirichletNitsche);
        let beta = coupled_inf_sup(&problem(4), &Params::default(), &opts).unwrap();
        assert!(beta > 0.05 && beta.is_finite(), "{beta}");
    }
}
