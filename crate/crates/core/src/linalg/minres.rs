//! Preconditioned MinRes for symmetric (indefinite) systems.
//!
//! The recurrence follows Paige and Saunders. The preconditioner is applied as
//! an SPD operator `P ≈ A⁻¹`; convergence is measured on the preconditioned
//! residual norm `sqrt(rᵀ P r)`, which the recurrence tracks as `phibar`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::sparse::{dot, CsrMatrix};

pub const DEFAULT_RTOL: f64 = 1e-8;
pub const DEFAULT_MAXIT: usize = 750;

/// A linear map `y = Op x` on vectors of length `dim()`.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec_into(x, y);
    }
}

/// The identity preconditioner.
pub struct IdentityOperator(pub usize);

impl LinearOperator for IdentityOperator {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StopReason {
    Tolerance,
    MaxIterations,
    Breakdown,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub iterations: usize,
    /// Preconditioned residual norms, starting with the initial one.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub stop_reason: StopReason,
}

impl SolveReport {
    pub fn relative_residual(&self) -> f64 {
        let first = self.residual_history[0];
        let last = *self.residual_history.last().unwrap();
        if first == 0.0 {
            0.0
        } else {
            last / first
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MinresSettings {
    pub rtol: f64,
    pub maxit: usize,
}

impl Default for MinresSettings {
    fn default() -> Self {
        Self {
            rtol: DEFAULT_RTOL,
            maxit: DEFAULT_MAXIT,
        }
    }
}

/// Uniform `[0, 1)` start vector from a seeded ChaCha8 stream.
pub fn random_initial_guess(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random::<f64>()).collect()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Solves `A x = b` starting from `x0`.
pub fn minres<A, P>(a: &A, precond: &P, b: &[f64], x0: &[f64], settings: MinresSettings) -> (Vec<f64>, SolveReport)
where
    A: LinearOperator + ?Sized,
    P: LinearOperator + ?Sized,
{
    let n = a.dim();
    assert_eq!(b.len(), n);
    assert_eq!(x0.len(), n);
    assert_eq!(precond.dim(), n);

    let mut x = x0.to_vec();
    let mut tmp = vec![0.0; n];
    a.apply(&x, &mut tmp);
    let mut r1: Vec<f64> = b.iter().zip(&tmp).map(|(bi, ai)| bi - ai).collect();
    let mut y = vec![0.0; n];
    precond.apply(&r1, &mut y);
    let beta1_sq = dot(&r1, &y);
    let breakdown = |history: Vec<f64>, iterations: usize| SolveReport {
        iterations,
        residual_history: history,
        converged: false,
        stop_reason: StopReason::Breakdown,
    };
    if !(beta1_sq >= 0.0) {
        return (x, breakdown(vec![f64::NAN], 0));
    }
    let beta1 = beta1_sq.sqrt();
    let mut history = vec![beta1];
    if beta1 == 0.0 {
        let report = SolveReport {
            iterations: 0,
            residual_history: history,
            converged: true,
            stop_reason: StopReason::Tolerance,
        };
        return (x, report);
    }

    let mut r2 = r1.clone();
    let mut w = vec![0.0; n];
    let mut w1 = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let mut v = vec![0.0; n];
    let (mut oldb, mut beta) = (0.0, beta1);
    let (mut dbar, mut epsln) = (0.0, 0.0);
    let mut phibar = beta1;
    let (mut cs, mut sn) = (-1.0, 0.0);

    for itn in 1..=settings.maxit {
        let s = 1.0 / beta;
        for (vi, yi) in v.iter_mut().zip(&y) {
            *vi = s * yi;
        }
        a.apply(&v, &mut y);
        if itn >= 2 {
            axpy(&mut y, -beta / oldb, &r1);
        }
        let alfa = dot(&v, &y);
        axpy(&mut y, -alfa / beta, &r2);
        std::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&y);
        precond.apply(&r2, &mut y);
        oldb = beta;
        let beta_sq = dot(&r2, &y);
        if !(beta_sq >= 0.0) {
            return (x, breakdown(history, itn));
        }
        beta = beta_sq.sqrt();

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = (gbar * gbar + beta * beta).sqrt().max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;

        std::mem::swap(&mut w1, &mut w2);
        std::mem::swap(&mut w2, &mut w);
        let denom = 1.0 / gamma;
        for i in 0..n {
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) * denom;
        }
        axpy(&mut x, phi, &w);

        let rnorm = phibar.abs();
        history.push(rnorm);
        if !rnorm.is_finite() {
            return (x, breakdown(history, itn));
        }
        if rnorm <= settings.rtol * beta1 {
            let report = SolveReport {
                iterations: itn,
                residual_history: history,
                converged: true,
                stop_reason: StopReason::Tolerance,
            };
            return (x, report);
        }
        if beta == 0.0 {
            // Invariant Krylov subspace without reaching the tolerance.
            return (x, breakdown(history, itn));
        }
    }
    let report = SolveReport {
        iterations: settings.maxit,
        residual_history: history,
        converged: false,
        stop_reason: StopReason::MaxIterations,
    };
    (x, report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_distinct_eigenvalues_converge_in_three_steps() {
        let a = CsrMatrix::diagonal_matrix(&[1.0, 2.0, 3.0]);
        let (x, rep) = minres(&a, &IdentityOperator(3), &[1.0, 1.0, 1.0], &[0.0; 3], MinresSettings::default());
        assert!(rep.converged);
        assert!(rep.iterations <= 3);
        for (xi, expect) in x.iter().zip([1.0, 0.5, 1.0 / 3.0]) {
            assert!((xi - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_converges_in_one_step() {
        let a = CsrMatrix::identity(5);
        let b = [1.0, -2.0, 3.0, 0.5, 0.0];
        let (x, rep) = minres(&a, &IdentityOperator(5), &b, &[0.0; 5], MinresSettings::default());
        assert_eq!(rep.iterations, 1);
        for i in 0..5 {
            assert!((x[i] - b[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn indefinite_system_residuals_are_monotone() {
        let n = 60;
        let d: Vec<f64> = (0..n).map(|i| if i % 3 == 0 { -(1.0 + i as f64) } else { 1.0 + 0.5 * i as f64 }).collect();
        let mut t: Vec<_> = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        for i in 0..n - 1 {
            t.push((i, i + 1, 0.3));
            t.push((i + 1, i, 0.3));
        }
        let a = CsrMatrix::from_triplets(n, n, &t);
        let b = vec![1.0; n];
        let x0 = random_initial_guess(n, 7);
        let (x, rep) = minres(&a, &IdentityOperator(n), &b, &x0, MinresSettings { rtol: 1e-10, maxit: 500 });
        assert!(rep.converged);
        for pair in rep.residual_history.windows(2) {
            assert!(pair[1] <= pair[0] * (1.0 + 1e-12));
        }
        let r = a.mul_vec(&x);
        assert!(r.iter().zip(&b).all(|(ri, bi)| (ri - bi).abs() < 1e-7));
    }

    #[test]
    fn maxit_is_reported() {
        let n = 50;
        let a = CsrMatrix::diagonal_matrix(&(1..=n).map(|i| i as f64).collect::<Vec<_>>());
        let (_, rep) = minres(&a, &IdentityOperator(n), &vec![1.0; n], &vec![0.0; n], MinresSettings { rtol: 1e-12, maxit: 5 });
        assert!(!rep.converged);
        assert_eq!(rep.stop_reason, StopReason::MaxIterations);
        assert_eq!(rep.iterations, 5);
    }

    #[test]
    fn seeded_start_is_reproducible() {
        assert_eq!(random_initial_guess(10, 3), random_initial_guess(10, 3));
        assert_ne!(random_initial_guess(10, 3), random_initial_guess(10, 4));
    }
}
