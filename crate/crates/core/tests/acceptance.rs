//! Acceptance report: one PASS/FAIL line per criterion. The report always
//! runs to completion; with `ACCEPTANCE_STRICT=1` any FAIL also makes the
//! process exit nonzero. Run with `cargo test --release --test acceptance`.

use std::collections::BTreeMap;
use std::time::Instant;

use biot_stokes::assembly::Params;
use biot_stokes::exec::Execution;
use biot_stokes::fem::TaylorHood;
use biot_stokes::interface::{FractionalOperator, FractionalVariant, StrongElimination, TraceSpace, NITSCHE_BETA};
use biot_stokes::mesh::{build_split_square, BcConfig};
use biot_stokes::precond::{InterfaceOptions, PreconditionerKind};
use biot_stokes::study::{self, Cell, ExperimentConfig, Problem, SolverSettings, Start, Table};
use biot_stokes::Result;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

fn text(t: &Table, row: &[Cell], col: &str) -> String {
    row[t.column(col).unwrap()].render()
}

fn num(t: &Table, row: &[Cell], col: &str) -> f64 {
    row[t.column(col).unwrap()].as_f64().unwrap()
}

fn flag(t: &Table, row: &[Cell], col: &str) -> bool {
    matches!(row[t.column(col).unwrap()], Cell::Bool(true))
}

fn mms_rates() -> Result<Outcome> {
    let t = study::run_convergence(&ExperimentConfig::default())?;
    let last = t.rows.last().unwrap();
    let names = ["u_H1", "pF_L2", "d_H1", "phi_L2", "pP_H1"];
    let rates: Vec<f64> = names.iter().map(|n| num(&t, last, &format!("rate_{n}"))).collect();
    let shown: Vec<String> = names.iter().zip(&rates).map(|(n, r)| format!("{n}={r:.2}")).collect();
    outcome(rates.iter().all(|r| *r >= 1.9), shown.join(" "))
}

/// Reference iteration counts per `(μ_f, κ)`, RD then RC, over h = 2⁻²..2⁻⁵.
const NAIVE_REFERENCE: [((f64, f64), [usize; 4], [usize; 4]); 4] = [
    ((1.0, 1e-4), [211, 240, 258, 264], [71, 82, 89, 89]),
    ((1.0, 1e-2), [76, 76, 74, 73], [50, 49, 48, 48]),
    ((1.0, 1.0), [41, 41, 41, 41], [37, 37, 36, 36]),
    ((1e-2, 1.0), [59, 59, 59, 58], [58, 57, 55, 55]),
];

fn naive_table() -> Result<Outcome> {
    let t = study::run_naive(&ExperimentConfig::default())?;
    let mut got: BTreeMap<(String, String, String), Vec<(usize, bool)>> = BTreeMap::new();
    for r in &t.rows {
        got.entry((text(&t, r, "mu_f"), text(&t, r, "kappa"), text(&t, r, "precond")))
            .or_default()
            .push((num(&t, r, "iterations") as usize, flag(&t, r, "converged")));
    }
    let key = |m: f64, k: f64, p: &str| (Cell::from(m).render(), Cell::from(k).render(), p.to_string());
    let mut misses = Vec::new();
    let mut total = 0;
    for ((m, k), rd, rc) in NAIVE_REFERENCE {
        for (p, reference) in [("rd", rd), ("rc", rc)] {
            let ours = &got[&key(m, k, p)];
            for (h, (&want, &(have, _))) in reference.iter().zip(ours).enumerate() {
                total += 1;
                let tol = (0.3 * want as f64).max(5.0);
                if (have as f64 - want as f64).abs() > tol {
                    misses.push(format!("{p}(mu_f={m:e},kappa={k:e},h=2^-{}): {have} vs {want}", h + 2));
                }
            }
        }
    }
    let blow: Vec<&(usize, bool)> = got[&key(1e-8, 1.0, "rd")].iter().collect();
    let blow_ok = blow.iter().all(|(it, conv)| *it >= 180 || !conv);
    let blow_text: Vec<String> = blow.iter().map(|(it, _)| it.to_string()).collect();
    let mut detail = format!("{}/{} cells in band; RD at mu_f=1e-8: [{}]", total - misses.len(), total, blow_text.join(", "));
    if !misses.is_empty() {
        detail.push_str(&format!("; outside band: {}", misses.join(", ")));
    }
    outcome(misses.is_empty() && blow_ok, detail)
}

fn bc_table() -> Result<Outcome> {
    let t = study::run_bc_study(&ExperimentConfig::default())?;
    let series = |bc: &str, v: &str| -> Vec<f64> {
        t.rows
            .iter()
            .filter(|r| text(&t, r, "bc_config") == bc && text(&t, r, "fractional_variant") == v)
            .map(|r| num(&t, r, "cond"))
            .collect()
    };
    let within = |xs: &[f64], refs: &[f64], tol: f64| xs.iter().zip(refs).all(|(x, r)| (x - r).abs() <= tol * r);
    let neumann = series("stress-pressure", "neumann-plus-i");
    let strong = series("vel-disp", "dirichlet-strong");
    let nitsche = series("vel-disp", "dirichlet-nitsche");
    let dagger = series("dirichlet-dagger", "dirichlet-strong");
    let a = within(&neumann, &[16.67, 17.58, 18.12], 0.25) && neumann.windows(2).all(|w| w[1] >= w[0]) && neumann[2] - neumann[1] < neumann[1] - neumann[0];
    let b = strong[0] > 1000.0 && strong.windows(2).all(|w| w[1] >= 3.0 * w[0]);
    let c = within(&nitsche, &[7.02, 7.43, 7.59], 0.3);
    let d = within(&dagger, &[6.77, 7.31, 7.53], 0.3);
    let fmt = |xs: &[f64]| xs.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join("/");
    outcome(
        a && b && c && d,
        format!(
            "(a) N {} {} (b) D {} {} (c) Nitsche {} {} (d) dagger {} {}",
            fmt(&neumann),
            a,
            fmt(&strong),
            b,
            fmt(&nitsche),
            c,
            fmt(&dagger),
            d
        ),
    )
}

type CellKey = (String, String, String, String, String);

fn by_cell(t: &Table, precond: &str) -> BTreeMap<CellKey, Vec<usize>> {
    let mut out: BTreeMap<CellKey, Vec<usize>> = BTreeMap::new();
    for r in t.rows.iter().filter(|r| text(t, r, "precond") == precond) {
        let k = (
            text(t, r, "mu_f"),
            text(t, r, "kappa"),
            text(t, r, "lambda"),
            text(t, r, "alpha"),
            text(t, r, "gamma"),
        );
        out.entry(k).or_default().push(num(t, r, "iterations") as usize);
    }
    out
}

fn sweep_robustness() -> Result<Outcome> {
    let dir = study::run_sweep(&ExperimentConfig::default())?;
    let neumann = study::run_sweep(&ExperimentConfig {
        bc: Some(BcConfig::StressPressure),
        ..ExperimentConfig::default()
    })?;
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, t) in [("vel-disp/nitsche", &dir), ("stress-pressure/neumann", &neumann)] {
        let cells = by_cell(t, "rf");
        let all: Vec<usize> = cells.values().flatten().copied().collect();
        let (lo, hi) = (*all.iter().min().unwrap(), *all.iter().max().unwrap());
        let unstable = cells
            .values()
            .filter(|v| {
                let (a, b) = (*v.iter().min().unwrap() as f64, *v.iter().max().unwrap() as f64);
                (b - a) / a > 0.2
            })
            .count();
        pass &= lo >= 15 && hi <= 80 && unstable == 0;
        parts.push(format!("{name}: range {lo}-{hi}, {unstable}/{} cells vary > 20% over h", cells.len()));
    }
    outcome(pass, parts.join("; "))
}

fn diag_compare() -> Result<Outcome> {
    let t = study::run_diag_compare(&ExperimentConfig::default())?;
    let rf = by_cell(&t, "rf");
    let diag = by_cell(&t, "rf-diag");
    let mut exempt = 0;
    let mut bad = Vec::new();
    for (k, a) in &rf {
        let b = &diag[k];
        let excused = k.2 == Cell::from(1.0).render() && k.3 == Cell::from(1.0).render();
        for (x, y) in a.iter().zip(b) {
            if x.abs_diff(*y) > 10 {
                if excused && y >= x {
                    exempt += 1;
                } else {
                    bad.push(format!("{k:?}: {x} vs {y}"));
                }
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{} cells, {exempt} excused at lambda=alpha=1 with RF_DIAG >= RF, {} violations {}",
            rf.len(),
            bad.len(),
            bad.join(" ")
        ),
    )
}

fn enclosed() -> Result<Outcome> {
    let t = study::run_enclosed(&ExperimentConfig::default())?;
    let rf = t.floats("iters_RF");
    let rd = t.floats("iters_RD");
    let ratio = rf.iter().cloned().fold(0.0, f64::max) / rf.iter().cloned().fold(f64::INFINITY, f64::min);
    let fewer = rf.iter().zip(&rd).all(|(a, b)| a < b);
    outcome(ratio <= 1.5 && rf.len() == 4 && fewer, format!("RF {rf:?}, RD {rd:?}, max/min {ratio:.3}"))
}

fn operator_properties() -> Result<Outcome> {
    let mut checks: Vec<(String, bool)> = Vec::new();

    // symmetry of the assembled system
    let mut asym: f64 = 0.0;
    for bc in [BcConfig::VelDisp, BcConfig::StressPressure, BcConfig::DirichletDagger] {
        let p = Problem::new(build_split_square(4, bc)?, Execution::Parallel)?;
        for params in [
            Params::default(),
            Params {
                mu_f: 1e-6,
                kappa: 1e-8,
                lambda: 1e8,
                ..Params::default()
            },
        ] {
            asym = asym.max(p.system(&params)?.matrix.asymmetry());
        }
    }
    checks.push((format!("symmetry {asym:.1e}"), asym <= 1e-12));

    // every preconditioner block admits a Cholesky factorization
    let mut factored = 0;
    let mut failed = Vec::new();
    for bc in [BcConfig::VelDisp, BcConfig::StressPressure, BcConfig::DirichletDagger] {
        let p = Problem::new(build_split_square(8, bc)?, Execution::Parallel)?;
        for params in [
            Params::default(),
            Params {
                mu_f: 1e-8,
                kappa: 1e-8,
                lambda: 1e12,
                alpha: 1e-8,
                gamma: 1e2,
                ..Params::default()
            },
        ] {
            let system = p.system(&params)?;
            for kind in PreconditionerKind::ALL {
                for variant in [
                    FractionalVariant::NeumannPlusI,
                    FractionalVariant::DirichletNitsche,
                    FractionalVariant::DirichletStrong,
                ] {
                    match p.preconditioner(&system, kind, &InterfaceOptions::with_variant(variant)) {
                        Ok(_) => factored += 1,
                        Err(e) => failed.push(format!("{bc:?}/{kind:?}/{variant:?}: {e}")),
                    }
                }
            }
        }
    }
    checks.push((
        format!("{factored} preconditioners factored, {} failed {}", failed.len(), failed.join(" ")),
        failed.is_empty(),
    ));

    // fractional operator spectral identities
    let mesh = build_split_square(8, BcConfig::VelDisp)?;
    let th = TaylorHood::new(&mesh)?;
    let trace = TraceSpace::new(&mesh, &th.pp)?;
    let mut worst: f64 = 0.0;
    for variant in [FractionalVariant::NeumannPlusI, FractionalVariant::DirichletNitsche] {
        let w = 0.5 / 1e-3 + 0.5;
        let op = FractionalOperator::new(&trace, variant, w)?;
        let wm = trace.mass().to_dense() * w;
        let g = op.vectors.transpose() * &wm * &op.vectors;
        let hu = &op.matrix * &op.vectors;
        for i in 0..g.nrows() {
            let q = op.vectors.col(i).transpose() * hu.col(i);
            worst = worst.max((q - op.eigenvalues[i].powf(-0.5)).abs() * op.eigenvalues[i].sqrt());
            for j in 0..g.ncols() {
                worst = worst.max((g[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
    }
    checks.push((format!("spectral identities {worst:.1e}"), worst <= 1e-10));

    // lowest Dirichlet trace eigenvalue approaches π²
    let pi2 = std::f64::consts::PI.powi(2);
    let mut errs = Vec::new();
    for n in [2, 4, 8, 16] {
        let m = build_split_square(n, BcConfig::VelDisp)?;
        let th = TaylorHood::new(&m)?;
        let t = TraceSpace::new(&m, &th.pp)?;
        let op = FractionalOperator::with_options(&t, FractionalVariant::DirichletStrong, 1.0, StrongElimination::ZeroExtension, NITSCHE_BETA)?;
        errs.push((op.eigenvalues[0] - pi2).abs());
    }
    let rate = (errs[errs.len() - 2] / errs[errs.len() - 1]).log2();
    checks.push((format!("pi^2 rate {rate:.2}"), rate >= 1.9));

    // MinRes residual norms never increase
    let p = Problem::new(build_split_square(8, BcConfig::VelDisp)?, Execution::Parallel)?;
    let settings = SolverSettings::default();
    let nitsche = InterfaceOptions::with_variant(FractionalVariant::DirichletNitsche);
    let mut monotone = true;
    for kind in PreconditionerKind::ALL {
        let r = study::iterate(&p, &Params::default(), kind, &nitsche, &settings, Start::Random(0), None)?;
        monotone &= r.residual_history.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    }
    checks.push(("minres monotone".into(), monotone));

    // discrete inf-sup constant of the coupled constraint
    let levels = [4, 8, 16];
    let base = Params::default();
    let mut betas = Vec::new();
    for n in levels {
        let p = Problem::new(build_split_square(n, BcConfig::VelDisp)?, Execution::Parallel)?;
        betas.push(study::coupled_inf_sup(&p, &base, &nitsche)?);
    }
    let drops_ok = betas.windows(2).all(|w| w[1] >= 0.9 * w[0]);
    let p = Problem::new(build_split_square(8, BcConfig::VelDisp)?, Execution::Parallel)?;
    // fluid viscosity is scaled down, staying inside the studied range μ_f ≤ 1;
    // the upward direction is reported for reference only
    let down = study::coupled_inf_sup(
        &p,
        &Params {
            mu_f: base.mu_f / 100.0,
            ..base
        },
        &nitsche,
    )?;
    let up = study::coupled_inf_sup(
        &p,
        &Params {
            mu_f: base.mu_f * 100.0,
            ..base
        },
        &nitsche,
    )?;
    let change = (down - betas[1]).abs() / betas[1];
    let up_change = (up - betas[1]).abs() / betas[1];
    checks.push((
        format!(
            "inf-sup {betas:.4?}, mu_f/100 change {:.2}% (mu_f*100: {:.2}%)",
            100.0 * change,
            100.0 * up_change
        ),
        drops_ok && change < 0.05,
    ));

    let pass = checks.iter().all(|c| c.1);
    let detail: Vec<String> = checks.into_iter().map(|(s, ok)| if ok { s } else { format!("{s} [failed]") }).collect();
    outcome(pass, detail.join("; "))
}

fn main() {
    let criteria: [(&str, fn() -> Result<Outcome>); 7] = [
        ("MMS convergence rates", mms_rates),
        ("naive preconditioner iteration table", naive_table),
        ("boundary configuration condition numbers", bc_table),
        ("parameter robustness sweep", sweep_robustness),
        ("diagonal pressure comparison", diag_compare),
        ("enclosed interface iterations", enclosed),
        ("operator property suite", operator_properties),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let secs = start.elapsed().as_secs_f64();
        let (pass, detail) = match result {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!("{} criterion {}: {name} ({secs:.1}s): {detail}", if pass { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && failures > 0 {
        std::process::exit(1);
    }
}
