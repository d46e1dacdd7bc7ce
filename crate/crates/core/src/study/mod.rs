//! Experiment drivers. Each study produces a [`Table`] that is written as
//! CSV with a commented metadata header.

mod config;
mod infsup;
mod runs;
mod table;

pub use config::{ExperimentConfig, Grid, SolverSettings};
pub use infsup::{coupled_inf_sup, stokes_inf_sup};
pub use runs::*;
pub use table::{Cell, Table};

use crate::assembly::{dirichlet_set, Operators, Params, System};
use crate::exec::Execution;
use crate::interface::TraceSpace;
use crate::linalg::{minres, random_initial_guess, spectral_condition_number, SolveReport};
use crate::mesh::Mesh;
use crate::precond::{InterfaceOptions, Preconditioner, PreconditionerKind};
use crate::Result;

/// A mesh with its parameter-independent operators and homogeneous
/// essential conditions.
pub struct Problem {
    pub mesh: Mesh,
    pub ops: Operators,
}

impl Problem {
    pub fn new(mesh: Mesh, exec: Execution) -> Result<Self> {
        let ops = Operators::assemble(&mesh, exec)?;
        Ok(Self { mesh, ops })
    }

    pub fn dofs(&self) -> usize {
        self.ops.spaces.total_dofs()
    }

    pub fn trace_dofs(&self) -> Result<usize> {
        Ok(TraceSpace::new(&self.mesh, &self.ops.spaces.pp)?.dim())
    }

    pub fn system(&self, params: &Params) -> Result<System> {
        let dir = dirichlet_set(&self.mesh, &self.ops.spaces, |_, _| [0.0, 0.0])?;
        System::new(&self.ops, params, dir)
    }

    pub fn preconditioner(&self, system: &System, kind: PreconditionerKind, opts: &InterfaceOptions) -> Result<Preconditioner> {
        Preconditioner::new(&self.mesh, &self.ops, system, kind, opts)
    }
}

/// Initial guess of an iteration study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Start {
    /// Uniform random entries from the seeded generator; constrained dofs
    /// are set to zero so that the start is admissible.
    Random(u64),
    Zero,
}

/// Runs preconditioned MinRes on `A x = rhs` (zero right-hand side if
/// `None`) and reports the iteration history.
pub fn iterate(
    problem: &Problem,
    params: &Params,
    kind: PreconditionerKind,
    opts: &InterfaceOptions,
    settings: &SolverSettings,
    start: Start,
    rhs: Option<&[f64]>,
) -> Result<SolveReport> {
    let system = problem.system(params)?;
    let pc = problem.preconditioner(&system, kind, opts)?;
    let n = system.dim();
    let x0 = match start {
        Start::Random(seed) => {
            let mut x = random_initial_guess(n, seed);
            for (d, _) in system.dirichlet.iter() {
                x[d] = 0.0;
            }
            x
        }
        Start::Zero => vec![0.0; n],
    };
    let b = match rhs {
        Some(r) => system.apply_dirichlet(r),
        None => vec![0.0; n],
    };
    let (_, report) = minres(&system.matrix, &pc, &b, &x0, settings.minres());
    Ok(report)
}

/// Spectral condition number of the preconditioned system.
pub fn condition_number(problem: &Problem, params: &Params, kind: PreconditionerKind, opts: &InterfaceOptions) -> Result<f64> {
    let system = problem.system(params)?;
    let pc = problem.preconditioner(&system, kind, opts)?;
    spectral_condition_number(&system.matrix, &pc.matrix)
}
