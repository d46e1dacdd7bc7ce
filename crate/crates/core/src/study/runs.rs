use super::config::{ExperimentConfig, Grid, SolverSettings};
use super::table::{Cell, Table};
use super::{condition_number, iterate, Problem, Start};
use crate::assembly::{mms, Forcing, Params};
use crate::exec::{self, Execution};
use crate::interface::FractionalVariant;
use crate::mesh::{build_enclosed_disk, build_split_square, BcConfig};
use crate::precond::{InterfaceOptions, PreconditionerKind};
use crate::Result;

/// Storage coefficient used by the naive-preconditioner comparison, where
/// every parameter other than `μ_f` and `κ` is held at one.
pub const NAIVE_C0: f64 = 1.0;

/// `(μ_f, κ)` rows of the naive comparison (the all-ones row is shared by
/// both one-parameter families).
pub const NAIVE_CASES: [(f64, f64); 5] = [(1.0, 1e-4), (1.0, 1e-2), (1.0, 1.0), (1e-8, 1.0), (1e-2, 1.0)];

/// Material parameters of the enclosed-disk study.
pub fn enclosed_params() -> Params {
    Params {
        lambda: 1e3,
        kappa: 1e-4,
        ..Params::default()
    }
}

/// Parameters emphasising the interface term: `C0 = 0`, `κ = 1e-10`.
pub fn bc_study_params() -> Params {
    Params {
        c0: 0.0,
        kappa: 1e-10,
        ..Params::default()
    }
}

/// The boundary/fractional-variant cases of the condition-number study.
pub const BC_CASES: [(BcConfig, FractionalVariant); 6] = [
    (BcConfig::StressPressure, FractionalVariant::DirichletStrong),
    (BcConfig::StressPressure, FractionalVariant::NeumannPlusI),
    (BcConfig::VelDisp, FractionalVariant::DirichletStrong),
    (BcConfig::VelDisp, FractionalVariant::NeumannPlusI),
    (BcConfig::VelDisp, FractionalVariant::DirichletNitsche),
    (BcConfig::DirichletDagger, FractionalVariant::DirichletStrong),
];

/// Published condition numbers per case (same order as [`BC_CASES`]) for
/// `h = 2⁻²..2⁻⁷`; `None` where no value is available.
const BC_REFERENCE: [[Option<f64>; 6]; 6] = [
    [Some(10.61), Some(12.17), Some(13.90), Some(15.73), Some(17.63), Some(19.58)],
    [Some(16.67), Some(17.58), Some(18.12), Some(18.53), Some(18.83), Some(19.06)],
    [Some(3369.0), Some(13879.0), Some(56254.0), None, None, None],
    [Some(24.48), Some(30.29), Some(35.91), Some(41.66), Some(47.66), Some(53.96)],
    [Some(7.02), Some(7.43), Some(7.59), Some(7.67), Some(7.71), Some(7.72)],
    [Some(6.77), Some(7.31), Some(7.53), Some(7.64), Some(7.69), Some(7.71)],
];

/// Relative deviation from the reference above which a row is flagged.
pub const BC_FLAG_TOLERANCE: f64 = 0.2;

fn bc_reference(bc: BcConfig, v: FractionalVariant, n: usize) -> Option<f64> {
    let case = BC_CASES.iter().position(|&c| c == (bc, v))?;
    if !n.is_power_of_two() || n < 4 {
        return None;
    }
    BC_REFERENCE[case].get(n.trailing_zeros() as usize - 2).copied().flatten()
}

fn metadata(t: &mut Table, study: &str, s: &SolverSettings) {
    t.meta("study", study);
    t.meta("seed", s.seed);
    t.meta("rtol", format!("{:e}", s.rtol));
    t.meta("maxit", s.maxit);
    t.meta("version", concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION")));
}

fn problems(levels: &[usize], bc: BcConfig, exec: Execution) -> Result<Vec<Problem>> {
    let meshes = levels.iter().map(|&n| build_split_square(n, bc)).collect::<Result<Vec<_>>>()?;
    exec::map(exec, &meshes, |m| Problem::new(m.clone(), Execution::Sequential))
        .into_iter()
        .collect()
}

/// Fixed parameters of the robustness sweep: `μ_s = 1`, `C0 = 0`.
pub fn sweep_base() -> Params {
    Params {
        mu_s: 1.0,
        c0: 0.0,
        ..Params::default()
    }
}

/// Parameter cells of the robustness sweep. Unless the grid sets both
/// axes, the `α` slice (at `γ = 1`) and the `γ` slice (at `α = 1`) are
/// combined with every `(μ_f, κ, λ)`. Grid axes overwrite `base`.
pub fn sweep_cells(grid: Option<&Grid>, base: Params) -> Vec<Params> {
    let g = grid.cloned().unwrap_or_default();
    let mu_f = g.mu_f.unwrap_or(vec![1.0, 1e-4, 1e-8]);
    let kappa = g.kappa.unwrap_or(vec![1.0, 1e-4, 1e-8]);
    let lambda = g.lambda.unwrap_or(vec![1.0, 1e4, 1e12]);
    let ag: Vec<(f64, f64)> = match (g.alpha, g.gamma) {
        (Some(a), Some(gm)) => a.iter().flat_map(|&a| gm.iter().map(move |&g| (a, g))).collect(),
        (a, gm) => {
            let mut v: Vec<(f64, f64)> = a.unwrap_or(vec![1e-8, 1e-4, 1.0]).into_iter().map(|a| (a, 1.0)).collect();
            for gm in gm.unwrap_or(vec![1e-2, 1.0, 1e2]) {
                if !v.contains(&(1.0, gm)) {
                    v.push((1.0, gm));
                }
            }
            v
        }
    };
    let mut cells = Vec::new();
    for &m in &mu_f {
        for &k in &kappa {
            for &l in &lambda {
                for &(a, gm) in &ag {
                    cells.push(Params {
                        mu_f: m,
                        kappa: k,
                        lambda: l,
                        alpha: a,
                        gamma: gm,
                        ..base
                    });
                }
            }
        }
    }
    cells
}

/// Manufactured-solution convergence study.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<Table> {
    let levels = cfg.levels_or(&[4, 8, 16, 32]);
    let bc = cfg.bc.unwrap_or(BcConfig::StressPressure);
    let params = cfg.apply_params(Params::default())?;
    let exec = cfg.execution();
    let errors = levels
        .iter()
        .map(|&n| mms::solve_and_measure(&build_split_square(n, bc)?, &params, exec))
        .collect::<Result<Vec<_>>>()?;
    let rates = mms::rates(&errors);
    // output order: u, p_F, d, phi, p_P
    let order = [0usize, 2, 1, 3, 4];
    let names = ["u_H1", "pF_L2", "d_H1", "phi_L2", "pP_H1"];
    let mut cols = vec!["h".to_string()];
    cols.extend(names.iter().map(|n| format!("e_{n}")));
    cols.extend(names.iter().map(|n| format!("rate_{n}")));
    let mut t = Table::new(&cols.iter().map(String::as_str).collect::<Vec<_>>());
    metadata(&mut t, "convergence", &cfg.settings());
    t.meta("bc", bc.name());
    for (k, &n) in levels.iter().enumerate() {
        let mut row = vec![Cell::from(1.0 / n as f64)];
        row.extend(order.iter().map(|&i| Cell::from(errors[k][i])));
        row.extend(order.iter().map(|&i| if k == 0 { Cell::Empty } else { Cell::from(rates[k - 1][i]) }));
        t.push(row);
    }
    Ok(t)
}

/// Iteration counts of the block-diagonal and tangentially coupled
/// preconditioners.
pub fn run_naive(cfg: &ExperimentConfig) -> Result<Table> {
    let levels = cfg.levels_or(&[4, 8, 16, 32]);
    let bc = cfg.bc.unwrap_or(BcConfig::StressPressure);
    let kinds = cfg.kinds_or(&[PreconditionerKind::Rd, PreconditionerKind::Rc]);
    let base = cfg.apply_params(Params {
        c0: NAIVE_C0,
        ..Params::default()
    })?;
    let settings = cfg.settings();
    let opts = cfg.interface_options(FractionalVariant::NeumannPlusI);
    let exec = cfg.execution();
    let probs = problems(&levels, bc, exec)?;
    let mut tasks = Vec::new();
    let cases: Vec<(f64, f64)> = match cfg.grid.as_ref().and_then(|g| g.mu_f.clone().zip(g.kappa.clone())) {
        Some((m, k)) => m.iter().flat_map(|&m| k.iter().map(move |&k| (m, k))).collect(),
        None => NAIVE_CASES.to_vec(),
    };
    for &(mu_f, kappa) in &cases {
        for (li, _) in levels.iter().enumerate() {
            for &kind in &kinds {
                tasks.push((mu_f, kappa, li, kind));
            }
        }
    }
    let results = exec::map(exec, &tasks, |&(mu_f, kappa, li, kind)| {
        let p = Params { mu_f, kappa, ..base };
        iterate(&probs[li], &p, kind, &opts, &settings, Start::Random(settings.seed), None)
    });
    let mut t = Table::new(&["mu_f", "kappa", "h", "precond", "iterations", "converged"]);
    metadata(&mut t, "naive", &settings);
    t.meta("bc", bc.name());
    t.meta("c0", base.c0);
    for (&(mu_f, kappa, li, kind), r) in tasks.iter().zip(results) {
        let r = r?;
        t.push(vec![
            mu_f.into(),
            kappa.into(),
            (1.0 / levels[li] as f64).into(),
            kind.name().into(),
            r.iterations.into(),
            r.converged.into(),
        ]);
    }
    Ok(t)
}

/// Condition numbers for the boundary configuration / fractional variant
/// combinations.
pub fn run_bc_study(cfg: &ExperimentConfig) -> Result<Table> {
    let levels = cfg.levels_or(&[4, 8, 16]);
    let params = cfg.apply_params(bc_study_params())?;
    let exec = cfg.execution();
    let cases: Vec<(BcConfig, FractionalVariant)> = BC_CASES
        .iter()
        .copied()
        .filter(|(bc, v)| cfg.bc.is_none_or(|b| b == *bc) && cfg.variant.is_none_or(|w| w == *v))
        .collect();
    let kind = cfg.kinds.as_ref().map_or(PreconditionerKind::Rf, |k| k[0]);
    let mut tasks = Vec::new();
    for &(bc, v) in &cases {
        for &n in &levels {
            tasks.push((bc, v, n));
        }
    }
    let results = exec::map(exec, &tasks, |&(bc, v, n)| {
        let problem = Problem::new(build_split_square(n, bc)?, Execution::Sequential)?;
        let opts = InterfaceOptions {
            variant: v,
            ..cfg.interface_options(v)
        };
        condition_number(&problem, &params, kind, &opts)
    });
    let mut t = Table::new(&["bc_config", "fractional_variant", "h", "cond", "reference", "flagged"]);
    metadata(&mut t, "bc-study", &cfg.settings());
    t.meta("precond", kind.name());
    for (&(bc, v, n), r) in tasks.iter().zip(results) {
        let cond = r?;
        let (reference, flagged) = match bc_reference(bc, v, n) {
            Some(x) if kind == PreconditionerKind::Rf => (Cell::from(x), Cell::from((cond - x).abs() > BC_FLAG_TOLERANCE * x)),
            _ => (Cell::Empty, Cell::Empty),
        };
        t.push(vec![
            bc.name().into(),
            v.name().into(),
            (1.0 / n as f64).into(),
            cond.into(),
            reference,
            flagged,
        ]);
    }
    Ok(t)
}

fn grid_study(cfg: &ExperimentConfig, study: &str, bc: BcConfig, variant: FractionalVariant, kinds: &[PreconditionerKind], flag: bool) -> Result<Table> {
    let levels = cfg.levels_or(&[4, 8, 16]);
    let settings = cfg.settings();
    let opts = cfg.interface_options(variant);
    let exec = cfg.execution();
    let probs = problems(&levels, bc, exec)?;
    let base = cfg.apply_params(sweep_base())?;
    let cells = sweep_cells(cfg.grid.as_ref(), base);
    for c in &cells {
        c.validate()?;
    }
    let mut tasks = Vec::new();
    for (ci, _) in cells.iter().enumerate() {
        for (li, _) in levels.iter().enumerate() {
            for &kind in kinds {
                tasks.push((ci, li, kind));
            }
        }
    }
    let results = exec::map(exec, &tasks, |&(ci, li, kind)| {
        iterate(&probs[li], &cells[ci], kind, &opts, &settings, Start::Random(settings.seed), None)
    });
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let mut cols = vec!["mu_f", "kappa", "lambda", "alpha", "gamma", "h", "precond", "iterations", "converged"];
    if flag {
        cols.push("flagged");
    }
    let mut t = Table::new(&cols);
    metadata(&mut t, study, &settings);
    t.meta("bc", bc.name());
    t.meta("variant", opts.variant.name());
    for (k, &(ci, li, kind)) in tasks.iter().enumerate() {
        let p = &cells[ci];
        let r = &results[k];
        let mut row = vec![
            p.mu_f.into(),
            p.kappa.into(),
            p.lambda.into(),
            p.alpha.into(),
            p.gamma.into(),
            (1.0 / levels[li] as f64).into(),
            kind.name().into(),
            r.iterations.into(),
            r.converged.into(),
        ];
        if flag {
            // compare against the first preconditioner of the same cell and level
            let base = k - kinds.iter().position(|&q| q == kind).unwrap();
            row.push(((r.iterations as i64 - results[base].iterations as i64).abs() > 10).into());
        }
        t.push(row);
    }
    Ok(t)
}

/// Robustness sweep of the fractional preconditioner.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Table> {
    let bc = cfg.bc.unwrap_or(BcConfig::VelDisp);
    let variant = match bc {
        BcConfig::StressPressure => FractionalVariant::NeumannPlusI,
        BcConfig::VelDisp => FractionalVariant::DirichletNitsche,
        BcConfig::DirichletDagger => FractionalVariant::DirichletStrong,
    };
    let kinds = cfg.kinds_or(&[PreconditionerKind::Rf]);
    grid_study(cfg, "sweep", bc, variant, &kinds, false)
}

/// Coupled versus diagonal pressure block of the fractional preconditioner.
pub fn run_diag_compare(cfg: &ExperimentConfig) -> Result<Table> {
    let bc = cfg.bc.unwrap_or(BcConfig::StressPressure);
    grid_study(
        cfg,
        "diag-compare",
        bc,
        FractionalVariant::NeumannPlusI,
        &[PreconditionerKind::Rf, PreconditionerKind::RfDiag],
        true,
    )
}

/// Traction load of the enclosed study: unit inflow pressure on the
/// lower-left segments, traction-free outflow on the upper-right ones.
pub fn enclosed_traction(x: [f64; 2], n: [f64; 2]) -> [f64; 2] {
    if x[0] + x[1] < 1.0 {
        [-n[0], -n[1]]
    } else {
        [0.0, 0.0]
    }
}

/// Iterations on the disk enclosed in fluid, starting from zero with a
/// traction-driven load.
pub fn run_enclosed(cfg: &ExperimentConfig) -> Result<Table> {
    let levels = cfg.levels_or(&[4, 8, 16, 32]);
    let params = cfg.apply_params(enclosed_params())?;
    let settings = cfg.settings();
    let opts = cfg.interface_options(FractionalVariant::NeumannPlusI);
    let kinds = [PreconditionerKind::Rf, PreconditionerKind::Rd, PreconditionerKind::Rc];
    let exec = cfg.execution();
    let mut t = Table::new(&["h", "dofs", "trace_dofs", "iters_RF", "iters_RD", "iters_RC"]);
    metadata(&mut t, "enclosed", &settings);
    t.meta("variant", opts.variant.name());
    for &n in &levels {
        let problem = Problem::new(build_enclosed_disk(n)?, exec)?;
        let forcing = Forcing {
            traction: Some(&enclosed_traction),
            ..Forcing::default()
        };
        let rhs = crate::assembly::assemble_load(&problem.mesh, &problem.ops, &params, &forcing, exec);
        let iters = exec::map(exec, &kinds, |&k| iterate(&problem, &params, k, &opts, &settings, Start::Zero, Some(&rhs)));
        let iters = iters.into_iter().collect::<Result<Vec<_>>>()?;
        t.push(vec![
            (1.0 / n as f64).into(),
            problem.dofs().into(),
            problem.trace_dofs()?.into(),
            iters[0].iterations.into(),
            iters[1].iterations.into(),
            iters[2].iterations.into(),
        ]);
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sweep_has_135_cells_on_the_fixed_base() {
        let cells = sweep_cells(None, sweep_base());
        assert_eq!(cells.len(), 135);
        assert!(cells.iter().all(|c| c.mu_s == 1.0 && c.c0 == 0.0));
        assert_eq!(cells.iter().filter(|c| c.alpha == 1.0 && c.gamma == 1.0).count(), 27);
    }

    #[test]
    fn grid_axes_overwrite_base_parameters() {
        let grid = Grid {
            kappa: Some(vec![1e-2]),
            ..Grid::default()
        };
        let base = Params {
            kappa: 0.5,
            c0: 2.0,
            ..sweep_base()
        };
        let cells = sweep_cells(Some(&grid), base);
        assert!(cells.iter().all(|c| c.kappa == 1e-2 && c.c0 == 2.0));
    }

    #[test]
    fn bc_reference_lookup() {
        assert_eq!(bc_reference(BcConfig::StressPressure, FractionalVariant::NeumannPlusI, 4), Some(16.67));
        assert_eq!(bc_reference(BcConfig::VelDisp, FractionalVariant::DirichletStrong, 32), None);
        assert_eq!(bc_reference(BcConfig::VelDisp, FractionalVariant::DirichletNitsche, 6), None);
    }
}
