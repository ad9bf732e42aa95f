//! Bound-constrained augmented-Lagrangian method for equality-constrained
//! nonlinear programs with banded Gauss-Newton structure.
//!
//! The outer loop updates multipliers (or grows the penalty by 10x when the
//! constraint violation did not shrink enough). Each subproblem is minimized
//! over the box with a projected, Levenberg-damped Gauss-Newton method whose
//! Hessian model `H_f + rho J^T J` is assembled in a band-limiting variable
//! ordering supplied by the problem.

use super::banded::SymBanded;

/// Sparse constraint Jacobian stored row by row as `(column, value)` pairs.
#[derive(Debug, Clone, Default)]
pub struct SparseRows {
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl SparseRows {
    /// `J^T y`.
    pub fn transpose_mul(&self, y: &[f64], out: &mut [f64]) {
        for (row, &yi) in self.rows.iter().zip(y) {
            if yi != 0.0 {
                for &(j, v) in row {
                    out[j] += v * yi;
                }
            }
        }
    }
}

/// Smooth problem `min f(z)  s.t.  c(z) = 0,  lower <= z <= upper`.
pub trait Nlp {
    fn dim(&self) -> usize;
    fn lower(&self) -> &[f64];
    fn upper(&self) -> &[f64];
    fn objective(&self, z: &[f64]) -> f64;
    fn objective_gradient(&self, z: &[f64], grad: &mut [f64]);
    /// Adds the (constant or Gauss-Newton) objective Hessian into `h`, indexed
    /// through `position`.
    fn add_objective_hessian(&self, z: &[f64], position: &[usize], h: &mut SymBanded);
    fn constraint_count(&self) -> usize;
    fn constraints(&self, z: &[f64], c: &mut [f64]);
    fn constraint_jacobian(&self, z: &[f64]) -> SparseRows;
    /// `position[i]` is the slot of variable `i` in an ordering where every
    /// constraint row spans at most `bandwidth() + 1` consecutive slots.
    fn band_position(&self) -> Vec<usize>;
    fn bandwidth(&self) -> usize;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub feasibility_tol: f64,
    pub stationarity_tol: f64,
    pub max_outer_iterations: usize,
    pub max_inner_iterations: usize,
    pub initial_penalty: f64,
    pub penalty_growth: f64,
    pub max_penalty: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-6,
            stationarity_tol: 1e-4,
            max_outer_iterations: 50,
            max_inner_iterations: 200,
            initial_penalty: 10.0,
            penalty_growth: 10.0,
            max_penalty: 1e14,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    /// A non-finite value appeared in the objective, constraints or step.
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveDiagnostics {
    pub status: SolveStatus,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub objective: f64,
    /// Inf-norm of `c(z)`.
    pub constraint_violation: f64,
    /// Inf-norm of the projected gradient of the Lagrangian.
    pub stationarity: f64,
    pub penalty: f64,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub z: Vec<f64>,
    pub multipliers: Vec<f64>,
    pub diagnostics: SolveDiagnostics,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn project(z: &mut [f64], lo: &[f64], hi: &[f64]) {
    for ((zi, &l), &u) in z.iter_mut().zip(lo).zip(hi) {
        *zi = zi.max(l).min(u);
    }
}

/// `|| z - P(z - g) ||_inf`.
pub fn projected_gradient_norm(z: &[f64], g: &[f64], lo: &[f64], hi: &[f64]) -> f64 {
    z.iter()
        .zip(g)
        .zip(lo.iter().zip(hi))
        .map(|((&zi, &gi), (&l, &u))| (zi - (zi - gi).max(l).min(u)).abs())
        .fold(0.0, f64::max)
}

struct Augmented<'a, P: Nlp> {
    nlp: &'a P,
    lambda: &'a [f64],
    rho: f64,
}

impl<P: Nlp> Augmented<'_, P> {
    fn value(&self, z: &[f64], c: &mut [f64]) -> f64 {
        self.nlp.constraints(z, c);
        let mut v = self.nlp.objective(z);
        for (&ci, &li) in c.iter().zip(self.lambda) {
            v += li * ci + 0.5 * self.rho * ci * ci;
        }
        v
    }

    /// Gradient of the augmented Lagrangian, given `c = c(z)` and `J(z)`.
    fn gradient(&self, z: &[f64], c: &[f64], jac: &SparseRows) -> Vec<f64> {
        let mut g = vec![0.0; z.len()];
        self.nlp.objective_gradient(z, &mut g);
        let y: Vec<f64> = c
            .iter()
            .zip(self.lambda)
            .map(|(&ci, &li)| li + self.rho * ci)
            .collect();
        jac.transpose_mul(&y, &mut g);
        g
    }
}

struct InnerOutcome {
    iterations: usize,
    failed: bool,
}

fn minimize_subproblem<P: Nlp>(
    aug: &Augmented<P>,
    z: &mut Vec<f64>,
    tol: f64,
    max_iter: usize,
    position: &[usize],
) -> InnerOutcome {
    let nlp = aug.nlp;
    let (lo, hi) = (nlp.lower(), nlp.upper());
    let n = z.len();
    let m = nlp.constraint_count();
    let mut c = vec![0.0; m];
    let mut c_trial = vec![0.0; m];
    let mut phi = aug.value(z, &mut c);
    let mut damping = 1e-9;
    for it in 0..max_iter {
        if !phi.is_finite() {
            return InnerOutcome {
                iterations: it,
                failed: true,
            };
        }
        let jac = nlp.constraint_jacobian(z);
        let g = aug.gradient(z, &c, &jac);
        let pg = projected_gradient_norm(z, &g, lo, hi);
        if pg <= tol {
            return InnerOutcome {
                iterations: it,
                failed: false,
            };
        }

        // active set: on (or within eps of) a bound with the gradient pushing outward
        let eps = pg.min(1e-2);
        let active: Vec<bool> = (0..n)
            .map(|i| {
                (lo[i] == hi[i])
                    || (z[i] <= lo[i] + eps && g[i] > 0.0)
                    || (z[i] >= hi[i] - eps && g[i] < 0.0)
            })
            .collect();

        let mut h = SymBanded::zeros(n, nlp.bandwidth());
        nlp.add_objective_hessian(z, position, &mut h);
        for row in &jac.rows {
            for (a, &(i, vi)) in row.iter().enumerate() {
                if active[i] {
                    continue;
                }
                for &(j, vj) in &row[..=a] {
                    if !active[j] {
                        h.add(position[i], position[j], aug.rho * vi * vj);
                    }
                }
            }
        }
        let mut diag_scale = 0.0f64;
        for i in 0..n {
            if !active[i] {
                diag_scale = diag_scale.max(h.get(position[i], position[i]));
            }
        }
        let diag_scale = diag_scale.max(1.0);
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            if active[i] {
                h.isolate(position[i]);
            } else {
                rhs[position[i]] = -g[i];
            }
        }

        let mut step = None;
        for _ in 0..12 {
            let mut hd = h.clone();
            for i in 0..n {
                if !active[i] {
                    hd.add_diagonal(position[i], damping * diag_scale);
                }
            }
            if let Some(chol) = hd.cholesky() {
                step = Some(chol.solve(&rhs));
                break;
            }
            damping = (damping * 100.0).max(1e-8);
        }
        let Some(sol) = step else {
            return InnerOutcome {
                iterations: it,
                failed: true,
            };
        };
        let mut d = vec![0.0; n];
        for i in 0..n {
            d[i] = if active[i] {
                if lo[i] == hi[i] {
                    0.0
                } else if g[i] > 0.0 {
                    lo[i] - z[i]
                } else {
                    hi[i] - z[i]
                }
            } else {
                sol[position[i]]
            };
        }
        if d.iter().any(|v| !v.is_finite()) {
            return InnerOutcome {
                iterations: it,
                failed: true,
            };
        }

        // projected Armijo backtracking
        let mut alpha = 1.0;
        let mut accepted = false;
        let mut trial = vec![0.0; n];
        for _ in 0..40 {
            for i in 0..n {
                trial[i] = z[i] + alpha * d[i];
            }
            project(&mut trial, lo, hi);
            let decrease: f64 = trial
                .iter()
                .zip(z.iter())
                .zip(&g)
                .map(|((t, zi), gi)| gi * (t - zi))
                .sum();
            let phi_trial = aug.value(&trial, &mut c_trial);
            if phi_trial.is_finite()
                && phi_trial <= phi + 1e-4 * decrease.min(0.0)
                && (decrease < 0.0 || phi_trial < phi)
            {
                std::mem::swap(z, &mut trial);
                std::mem::swap(&mut c, &mut c_trial);
                phi = phi_trial;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if accepted {
            damping = (damping / 10.0).max(1e-12);
        } else {
            // no progress along this direction; lean towards gradient descent
            damping = (damping * 100.0).max(1e-6);
            if damping > 1e12 {
                return InnerOutcome {
                    iterations: it + 1,
                    failed: false,
                };
            }
        }
    }
    InnerOutcome {
        iterations: max_iter,
        failed: false,
    }
}

/// Solves `nlp` starting from `z0` (projected onto the bounds first).
pub fn solve_augmented_lagrangian<P: Nlp>(
    nlp: &P,
    z0: &[f64],
    opts: &SolverOptions,
) -> SolveResult {
    let m = nlp.constraint_count();
    let position = nlp.band_position();
    let (lo, hi) = (nlp.lower(), nlp.upper());
    let mut z = z0.to_vec();
    project(&mut z, lo, hi);
    let mut lambda = vec![0.0; m];
    let mut rho = opts.initial_penalty;
    let mut c = vec![0.0; m];
    nlp.constraints(&z, &mut c);
    let mut viol = inf_norm(&c);
    let mut inner_total = 0;
    let mut status = SolveStatus::MaxIterations;
    let mut stationarity = f64::INFINITY;
    let mut outer = 0;
    let inner_tol = opts.stationarity_tol * 0.1;

    while outer < opts.max_outer_iterations {
        outer += 1;
        let aug = Augmented {
            nlp,
            lambda: &lambda,
            rho,
        };
        let res = minimize_subproblem(
            &aug,
            &mut z,
            inner_tol,
            opts.max_inner_iterations,
            &position,
        );
        inner_total += res.iterations;
        if res.failed || z.iter().any(|v| !v.is_finite()) {
            status = SolveStatus::NumericalFailure;
            break;
        }
        nlp.constraints(&z, &mut c);
        let previous = viol;
        viol = inf_norm(&c);
        if !viol.is_finite() {
            status = SolveStatus::NumericalFailure;
            break;
        }
        for (l, &ci) in lambda.iter_mut().zip(&c) {
            *l += rho * ci;
        }
        // projected gradient of the Lagrangian with the updated multipliers
        stationarity = lagrangian_stationarity(nlp, &z, &lambda);
        if viol <= opts.feasibility_tol && stationarity <= opts.stationarity_tol {
            status = SolveStatus::Converged;
            break;
        }
        if viol > opts.feasibility_tol && viol > 0.25 * previous {
            rho = (rho * opts.penalty_growth).min(opts.max_penalty);
        }
    }
    SolveResult {
        diagnostics: SolveDiagnostics {
            status,
            outer_iterations: outer,
            inner_iterations: inner_total,
            objective: nlp.objective(&z),
            constraint_violation: viol,
            stationarity,
            penalty: rho,
        },
        z,
        multipliers: lambda,
    }
}

/// `|| z - P(z - (grad f + J^T lambda)) ||_inf`.
pub fn lagrangian_stationarity<P: Nlp>(nlp: &P, z: &[f64], lambda: &[f64]) -> f64 {
    let mut g = vec![0.0; z.len()];
    nlp.objective_gradient(z, &mut g);
    nlp.constraint_jacobian(z).transpose_mul(lambda, &mut g);
    projected_gradient_norm(z, &g, nlp.lower(), nlp.upper())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// min (z0-2)^2 + (z1-1)^2 + z2^2  s.t.  z0 + z1 + z2 = 1,  z0^2 + z1 = 1
    struct Toy {
        lo: Vec<f64>,
        hi: Vec<f64>,
    }

    impl Nlp for Toy {
        fn dim(&self) -> usize {
            3
        }
        fn lower(&self) -> &[f64] {
            &self.lo
        }
        fn upper(&self) -> &[f64] {
            &self.hi
        }
        fn objective(&self, z: &[f64]) -> f64 {
            (z[0] - 2.0).powi(2) + (z[1] - 1.0).powi(2) + z[2] * z[2]
        }
        fn objective_gradient(&self, z: &[f64], g: &mut [f64]) {
            g[0] = 2.0 * (z[0] - 2.0);
            g[1] = 2.0 * (z[1] - 1.0);
            g[2] = 2.0 * z[2];
        }
        fn add_objective_hessian(&self, _z: &[f64], pos: &[usize], h: &mut SymBanded) {
            for i in 0..3 {
                h.add_diagonal(pos[i], 2.0);
            }
        }
        fn constraint_count(&self) -> usize {
            2
        }
        fn constraints(&self, z: &[f64], c: &mut [f64]) {
            c[0] = z[0] + z[1] + z[2] - 1.0;
            c[1] = z[0] * z[0] + z[1] - 1.0;
        }
        fn constraint_jacobian(&self, z: &[f64]) -> SparseRows {
            SparseRows {
                rows: vec![
                    vec![(0, 1.0), (1, 1.0), (2, 1.0)],
                    vec![(0, 2.0 * z[0]), (1, 1.0)],
                ],
            }
        }
        fn band_position(&self) -> Vec<usize> {
            vec![0, 1, 2]
        }
        fn bandwidth(&self) -> usize {
            2
        }
    }

    #[test]
    fn solves_small_nonlinear_program() {
        let toy = Toy {
            lo: vec![-10.0; 3],
            hi: vec![10.0; 3],
        };
        let res = solve_augmented_lagrangian(&toy, &[0.5, 0.5, 0.5], &SolverOptions::default());
        assert_eq!(
            res.diagnostics.status,
            SolveStatus::Converged,
            "{:?}",
            res.diagnostics
        );
        let mut c = [0.0; 2];
        toy.constraints(&res.z, &mut c);
        assert!(inf_norm(&c) <= 1e-6);
        // with z1 = 1 - z0^2 and z2 = z0^2 - z0 the problem is 1-D; check optimality by scanning
        let f1 = |x: f64| toy.objective(&[x, 1.0 - x * x, x * x - x]);
        let best = (0..200_001)
            .map(|k| -2.0 + 4.0 * k as f64 / 200_000.0)
            .map(f1)
            .fold(f64::INFINITY, f64::min);
        assert!((res.diagnostics.objective - best).abs() < 1e-6);
    }

    #[test]
    fn respects_active_bounds() {
        let toy = Toy {
            lo: vec![-10.0, -10.0, 0.2],
            hi: vec![1.5, 10.0, 10.0],
        };
        let res = solve_augmented_lagrangian(&toy, &[1.0, 0.0, 0.5], &SolverOptions::default());
        assert_eq!(
            res.diagnostics.status,
            SolveStatus::Converged,
            "{:?}",
            res.diagnostics
        );
        assert!(res.z[0] <= 1.5 && res.z[2] >= 0.2);
        assert!(res.diagnostics.stationarity <= 1e-4);
        // z2 = z0^2 - z0 >= 0.2 leaves z0 <= (1 - sqrt(1.8)) / 2 or z0 >= (1 + sqrt(1.8)) / 2
        let f1 = |x: f64| toy.objective(&[x, 1.0 - x * x, x * x - x]);
        let (left, right) = ((1.0 - 1.8f64.sqrt()) / 2.0, (1.0 + 1.8f64.sqrt()) / 2.0);
        let scan = |a: f64, b: f64| {
            (0..100_001)
                .map(|k| a + (b - a) * k as f64 / 100_000.0)
                .map(f1)
                .fold(f64::INFINITY, f64::min)
        };
        let best = scan(-3.0, left).min(scan(right, 1.5));
        assert!(
            (res.diagnostics.objective - best).abs() < 1e-5,
            "{} vs {best}",
            res.diagnostics.objective
        );
    }
}
