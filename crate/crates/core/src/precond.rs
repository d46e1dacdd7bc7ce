//! Parameter-weighted block preconditioners.
//!
//! Every variant is a block-diagonal SPD matrix `B` (in some grouping of
//! the five fields); applying the preconditioner means solving with `B`
//! blockwise by sparse Cholesky. Essential conditions are eliminated from
//! each block exactly as in the system matrix, so constrained dofs map to
//! themselves.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::assembly::{field_mask, Operators, Params, System};
use crate::fem::Field;
use crate::interface::{FractionalOperator, FractionalVariant, StrongElimination, TraceSpace, NITSCHE_BETA};
use crate::linalg::{CsrMatrix, LinearOperator, SparseCholesky};
use crate::mesh::Mesh;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PreconditionerKind {
    /// Fully block-diagonal preconditioner without interface terms.
    Rd,
    /// As `Rd`, with the velocity-displacement block kept coupled.
    Rc,
    /// Coupled velocity-displacement block, coupled total/pore pressure
    /// block and the fractional interface term.
    Rf,
    /// As `Rf`, without the total/pore pressure coupling.
    RfDiag,
}

impl PreconditionerKind {
    pub const ALL: [PreconditionerKind; 4] = [Self::Rd, Self::Rc, Self::Rf, Self::RfDiag];

    pub fn name(self) -> &'static str {
        match self {
            Self::Rd => "rd",
            Self::Rc => "rc",
            Self::Rf => "rf",
            Self::RfDiag => "rf-diag",
        }
    }

    pub fn uses_interface_operator(self) -> bool {
        matches!(self, Self::Rf | Self::RfDiag)
    }

    /// Field groups that form the diagonal blocks.
    pub fn groups(self) -> Vec<Vec<Field>> {
        use Field::*;
        match self {
            Self::Rd => vec![vec![U], vec![D], vec![PF], vec![Phi], vec![PP]],
            Self::Rc | Self::RfDiag => vec![vec![U, D], vec![PF], vec![Phi], vec![PP]],
            Self::Rf => vec![vec![U, D], vec![PF], vec![Phi, PP]],
        }
    }
}

/// Options of the fractional interface term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterfaceOptions {
    pub variant: FractionalVariant,
    pub strong: StrongElimination,
    pub nitsche_beta: f64,
}

impl Default for InterfaceOptions {
    fn default() -> Self {
        Self {
            variant: FractionalVariant::NeumannPlusI,
            strong: StrongElimination::default(),
            nitsche_beta: NITSCHE_BETA,
        }
    }
}

impl InterfaceOptions {
    pub fn with_variant(variant: FractionalVariant) -> Self {
        Self { variant, ..Self::default() }
    }
}

/// The SPD diagonal blocks of a preconditioner, before elimination.
pub fn field_blocks(ops: &Operators, p: &Params, kind: PreconditionerKind, lifted: Option<&CsrMatrix>) -> [[Option<CsrMatrix>; 5]; 5] {
    use Field::*;
    let mut b: [[Option<CsrMatrix>; 5]; 5] = Default::default();
    let c = p.slip();
    b[U.index()][U.index()] = Some(ops.fluid_elasticity(p));
    b[D.index()][D.index()] = Some(ops.solid_elasticity(p));
    if kind != PreconditionerKind::Rd {
        let t = ops.tangential_ud.scaled(-c);
        b[D.index()][U.index()] = Some(t.transpose());
        b[U.index()][D.index()] = Some(t);
    }
    b[PF.index()][PF.index()] = Some(ops.mass_pf.scaled(0.5 / p.mu_f));
    b[Phi.index()][Phi.index()] = Some(ops.mass_phi.scaled(1.0 / p.lambda + 0.5 / p.mu_s));
    let mut pp = ops.pressure_operator(p);
    if let Some(h) = lifted {
        pp = pp.add_scaled(h, 1.0);
    }
    b[PP.index()][PP.index()] = Some(pp);
    if kind == PreconditionerKind::Rf {
        let m = ops.mass_mixed.scaled(-p.alpha / p.lambda);
        b[PP.index()][Phi.index()] = Some(m.transpose());
        b[Phi.index()][PP.index()] = Some(m);
    }
    b
}

struct GroupFactor {
    ranges: Vec<Range<usize>>,
    factor: SparseCholesky,
}

pub struct Preconditioner {
    pub kind: PreconditionerKind,
    /// The assembled block matrix `B` (constraints eliminated).
    pub matrix: CsrMatrix,
    groups: Vec<GroupFactor>,
    dim: usize,
}

impl Preconditioner {
    pub fn new(mesh: &Mesh, ops: &Operators, system: &System, kind: PreconditionerKind, opts: &InterfaceOptions) -> Result<Self> {
        let p = &system.params;
        let lifted = if kind.uses_interface_operator() {
            let trace = TraceSpace::new(mesh, &ops.spaces.pp)?;
            let h = FractionalOperator::with_options(&trace, opts.variant, p.interface_weight(), opts.strong, opts.nitsche_beta)?;
            Some(h.lifted(&trace))
        } else {
            None
        };
        Self::from_blocks(ops, system, kind, field_blocks(ops, p, kind, lifted.as_ref()))
    }

    fn from_blocks(ops: &Operators, system: &System, kind: PreconditionerKind, blocks: [[Option<CsrMatrix>; 5]; 5]) -> Result<Self> {
        let spaces = &ops.spaces;
        let off = spaces.offsets();
        let sizes = spaces.sizes();
        let mut groups = Vec::new();
        let mut triplets = Vec::new();
        for group in kind.groups() {
            let gsizes: Vec<usize> = group.iter().map(|f| sizes[f.index()]).collect();
            let refs: Vec<Vec<Option<&CsrMatrix>>> = group
                .iter()
                .map(|fi| group.iter().map(|fj| blocks[fi.index()][fj.index()].as_ref()).collect())
                .collect();
            let raw = CsrMatrix::from_blocks(&gsizes, &gsizes, &refs);
            let mask: Vec<bool> = group.iter().flat_map(|f| field_mask(spaces, &system.dirichlet, *f)).collect();
            let m = raw.constrained(&mask, &mask, true);
            let label = format!("{} block ({})", kind.name(), group.iter().map(|f| f.name()).collect::<Vec<_>>().join(", "));
            let factor = SparseCholesky::new(&m, &label)?;
            let ranges: Vec<Range<usize>> = group.iter().map(|f| off[f.index()]..off[f.index() + 1]).collect();
            // local -> global index map for the assembled B
            let map: Vec<usize> = ranges.iter().flat_map(|r| r.clone()).collect();
            triplets.extend(m.triplets().into_iter().map(|(i, j, v)| (map[i], map[j], v)));
            groups.push(GroupFactor { ranges, factor });
        }
        let dim = spaces.total_dofs();
        Ok(Self {
            kind,
            matrix: CsrMatrix::from_triplets(dim, dim, &triplets),
            groups,
            dim,
        })
    }
}

impl LinearOperator for Preconditioner {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for g in &self.groups {
            let local: Vec<f64> = g.ranges.iter().flat_map(|r| x[r.clone()].iter().copied()).collect();
            let sol = g.factor.solve(&local);
            let mut k = 0;
            for r in &g.ranges {
                let n = r.len();
                y[r.clone()].copy_from_slice(&sol[k..k + n]);
                k += n;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::dirichlet_set;
    use crate::exec::Execution;
    use crate::linalg::{spectral_condition_number, LinearOperator};
    use crate::mesh::{build_split_square, BcConfig};

    fn setup(bc: BcConfig, p: &Params) -> (Mesh, Operators, System) {
        let mesh = build_split_square(4, bc).unwrap();
        let ops = Operators::assemble(&mesh, Execution::Sequential).unwrap();
        let dir = dirichlet_set(&mesh, &ops.spaces, |_, _| [0.0, 0.0]).unwrap();
        let sys = System::new(&ops, p, dir).unwrap();
        (mesh, ops, sys)
    }

    #[test]
    fn all_blocks_factorize_across_extreme_parameters() {
        for p in [
            Params::default(),
            Params {
                mu_f: 1e-8,
                kappa: 1e-8,
                lambda: 1e12,
                alpha: 1e-8,
                ..Params::default()
            },
            Params {
                kappa: 1e-8,
                gamma: 1e2,
                ..Params::default()
            },
        ] {
            for bc in [BcConfig::VelDisp, BcConfig::StressPressure, BcConfig::DirichletDagger] {
                let (mesh, ops, sys) = setup(bc, &p);
                for kind in PreconditionerKind::ALL {
                    let pc = Preconditioner::new(&mesh, &ops, &sys, kind, &InterfaceOptions::default()).unwrap();
                    assert!(pc.matrix.asymmetry() <= 1e-12 * pc.matrix.max_abs());
                }
            }
        }
    }

    #[test]
    fn apply_inverts_the_block_matrix() {
        let (mesh, ops, sys) = setup(
            BcConfig::VelDisp,
            &Params {
                kappa: 1e-2,
                ..Params::default()
            },
        );
        for kind in PreconditionerKind::ALL {
            let pc = Preconditioner::new(&mesh, &ops, &sys, kind, &InterfaceOptions::default()).unwrap();
            let x: Vec<f64> = (0..pc.dim()).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
            let bx = pc.matrix.mul_vec(&x);
            let mut y = vec![0.0; pc.dim()];
            pc.apply(&bx, &mut y);
            let err = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-8, "{kind:?}: {err}");
        }
    }

    #[test]
    fn coupled_preconditioner_is_well_conditioned_for_unit_parameters() {
        let (mesh, ops, sys) = setup(BcConfig::StressPressure, &Params::default());
        let pc = Preconditioner::new(&mesh, &ops, &sys, PreconditionerKind::Rf, &InterfaceOptions::default()).unwrap();
        let k = spectral_condition_number(&sys.matrix, &pc.matrix).unwrap();
        assert!(k > 1.0 && k < 100.0, "{k}");
    }
}
