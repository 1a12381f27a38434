//! Dense two-phase revised simplex.
//!
//! The constraint systems built in [`crate::mlr`] have few unknowns (one
//! per state) and many inequalities (one per consecutive state pair and
//! action). They are solved through their standard-form dual, whose basis
//! has one row per unknown, so the explicit basis inverse stays small.

use thiserror::Error;

use crate::linalg::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("simplex numeric failure: {0}")]
    NumericFailure(String),
    #[error("malformed linear program: {0}")]
    Malformed(String),
}

/// `min cᵀx` subject to `A x = b`, `x ≥ 0`, with `A` stored by columns.
#[derive(Clone, Debug)]
pub struct StandardForm<T> {
    pub columns: Vec<Vec<T>>,
    pub rhs: Vec<T>,
    pub costs: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome<T> {
    Optimal {
        x: Vec<T>,
        /// Simplex multipliers `c_Bᵀ B⁻¹`, one per equality row.
        duals: Vec<T>,
        objective: T,
        iterations: usize,
    },
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct SimplexOptions {
    pub max_iterations: Option<usize>,
    /// Pivots between refactorizations of the basis inverse.
    pub refactor_every: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub degenerate_limit: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_iterations: None,
            refactor_every: 64,
            degenerate_limit: 50,
        }
    }
}

struct Tableau<'a, T> {
    lp: &'a StandardForm<T>,
    m: usize,
    n: usize,
    /// Signs applied to rows so the right-hand side is nonnegative.
    row_sign: Vec<T>,
    basis: Vec<usize>,
    binv: Matrix<T>,
    xb: Vec<T>,
    pivot_tol: T,
    iterations: usize,
}

impl<'a, T: Scalar> Tableau<'a, T> {
    /// Column `j` after row sign normalization; `j ≥ n` are artificials.
    fn column(&self, j: usize) -> Vec<T> {
        if j < self.n {
            self.lp.columns[j]
                .iter()
                .zip(&self.row_sign)
                .map(|(&a, &s)| a * s)
                .collect()
        } else {
            let mut e = vec![T::zero(); self.m];
            e[j - self.n] = T::one();
            e
        }
    }

    fn column_dot(&self, j: usize, pi: &[T]) -> T {
        if j < self.n {
            self.lp.columns[j]
                .iter()
                .zip(&self.row_sign)
                .zip(pi)
                .fold(T::zero(), |acc, ((&a, &s), &p)| acc + a * s * p)
        } else {
            pi[j - self.n]
        }
    }

    fn rhs(&self) -> Vec<T> {
        self.lp.rhs.iter().zip(&self.row_sign).map(|(&b, &s)| b * s).collect()
    }

    fn multipliers(&self, cost: &impl Fn(usize) -> T) -> Vec<T> {
        let cb: Vec<T> = self.basis.iter().map(|&j| cost(j)).collect();
        self.binv.tr_mul_vec(&cb)
    }

    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        let mut b = Matrix::zeros(m, m);
        for (k, &j) in self.basis.iter().enumerate() {
            for (i, v) in self.column(j).into_iter().enumerate() {
                b[(i, k)] = v;
            }
        }
        self.binv = invert(&b).ok_or_else(|| LpError::NumericFailure("singular basis during refactorization".into()))?;
        self.xb = self.binv.mul_vec(&self.rhs());
        // Clamp tiny negatives produced by rounding.
        for x in &mut self.xb {
            if *x < T::zero() && *x > -self.pivot_tol {
                *x = T::zero();
            }
        }
        Ok(())
    }

    fn pivot(&mut self, row: usize, entering: usize, u: &[T]) {
        let theta = self.xb[row] / u[row];
        for i in 0..self.m {
            if i != row {
                self.xb[i] = self.xb[i] - theta * u[i];
            }
        }
        self.xb[row] = theta;
        let pr = u[row];
        for v in self.binv.row_mut(row) {
            *v = *v / pr;
        }
        let pivot_row = self.binv.row(row).to_vec();
        for (i, &ui) in u.iter().enumerate() {
            if i == row || ui == T::zero() {
                continue;
            }
            for (v, &p) in self.binv.row_mut(i).iter_mut().zip(&pivot_row) {
                *v = *v - ui * p;
            }
        }
        self.basis[row] = entering;
        self.iterations += 1;
    }

    /// Runs simplex iterations with the given costs over columns accepted by
    /// `eligible`. Returns `false` if unbounded.
    fn optimize(
        &mut self,
        cost: impl Fn(usize) -> T,
        eligible: impl Fn(usize) -> bool,
        total_columns: usize,
        opts: &SimplexOptions,
        limit: usize,
    ) -> Result<bool, LpError> {
        let cost_scale = (0..total_columns)
            .filter(|&j| eligible(j))
            .fold(T::one(), |acc, j| acc.max(cost(j).abs()));
        let opt_tol = T::tol(1e-10) * cost_scale;
        let mut degenerate_run = 0usize;
        let mut since_refactor = 0usize;
        let mut in_basis = vec![false; total_columns];
        for &j in &self.basis {
            in_basis[j] = true;
        }
        loop {
            if self.iterations >= limit {
                return Err(LpError::NumericFailure(format!("iteration limit {limit} reached")));
            }
            if since_refactor >= opts.refactor_every {
                self.refactor()?;
                since_refactor = 0;
            }
            let pi = self.multipliers(&cost);
            let bland = degenerate_run >= opts.degenerate_limit;
            let mut entering = None;
            let mut best = -opt_tol;
            for j in 0..total_columns {
                if in_basis[j] || !eligible(j) {
                    continue;
                }
                let d = cost(j) - self.column_dot(j, &pi);
                if d < best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(q) = entering else {
                return Ok(true);
            };
            let u = self.binv.mul_vec(&self.column(q));
            let mut leave: Option<(usize, T)> = None;
            for i in 0..self.m {
                if u[i] > self.pivot_tol {
                    let ratio = self.xb[i].max(T::zero()) / u[i];
                    let better = match leave {
                        None => true,
                        Some((r, best_ratio)) => {
                            let tie = (ratio - best_ratio).abs() <= self.pivot_tol;
                            if tie {
                                if bland {
                                    self.basis[i] < self.basis[r]
                                } else {
                                    u[i] > u[r]
                                }
                            } else {
                                ratio < best_ratio
                            }
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, ratio)) = leave else {
                return Ok(false);
            };
            if ratio <= self.pivot_tol {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            in_basis[self.basis[r]] = false;
            in_basis[q] = true;
            self.pivot(r, q, &u);
            since_refactor += 1;
        }
    }
}

/// Gauss–Jordan inverse with partial pivoting.
pub fn invert<T: Scalar>(m: &Matrix<T>) -> Option<Matrix<T>> {
    let n = m.rows();
    let mut a = m.clone();
    let mut inv = Matrix::identity(n);
    for col in 0..n {
        let p = (col..n).max_by(|&i, &k| a[(i, col)].abs().partial_cmp(&a[(k, col)].abs()).unwrap())?;
        if !(a[(p, col)].abs() > T::of(T::PIVOT_TOL) * T::of(1e-3)) {
            return None;
        }
        if p != col {
            for j in 0..n {
                let t = a[(p, j)];
                a[(p, j)] = a[(col, j)];
                a[(col, j)] = t;
                let t = inv[(p, j)];
                inv[(p, j)] = inv[(col, j)];
                inv[(col, j)] = t;
            }
        }
        let d = a[(col, col)];
        for j in 0..n {
            a[(col, j)] = a[(col, j)] / d;
            inv[(col, j)] = inv[(col, j)] / d;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = a[(i, col)];
            if f == T::zero() {
                continue;
            }
            for j in 0..n {
                a[(i, j)] = a[(i, j)] - f * a[(col, j)];
                inv[(i, j)] = inv[(i, j)] - f * inv[(col, j)];
            }
        }
    }
    Some(inv)
}

/// Solves a standard-form LP with the two-phase method.
pub fn solve_standard<T: Scalar>(lp: &StandardForm<T>, opts: &SimplexOptions) -> Result<LpOutcome<T>, LpError> {
    let m = lp.rhs.len();
    let n = lp.columns.len();
    if lp.costs.len() != n {
        return Err(LpError::Malformed(format!("{} costs for {n} columns", lp.costs.len())));
    }
    if let Some(c) = lp.columns.iter().find(|c| c.len() != m) {
        return Err(LpError::Malformed(format!("column of length {} for {m} rows", c.len())));
    }
    let non_finite = lp.rhs.iter().chain(&lp.costs).chain(lp.columns.iter().flatten()).any(|x| !x.is_finite());
    if non_finite {
        return Err(LpError::NumericFailure("non-finite coefficient".into()));
    }
    let row_sign: Vec<T> = lp
        .rhs
        .iter()
        .map(|&b| if b < T::zero() { -T::one() } else { T::one() })
        .collect();
    let mut tab = Tableau {
        lp,
        m,
        n,
        row_sign,
        basis: (n..n + m).collect(),
        binv: Matrix::identity(m),
        xb: Vec::new(),
        pivot_tol: T::tol(T::PIVOT_TOL),
        iterations: 0,
    };
    tab.xb = tab.rhs();
    let limit = opts.max_iterations.unwrap_or(50 * (n + m) + 10_000);

    // Phase 1: minimize the sum of artificials.
    let bounded = tab.optimize(
        |j| if j >= n { T::one() } else { T::zero() },
        |_| true,
        n + m,
        opts,
        limit,
    )?;
    if !bounded {
        return Err(LpError::NumericFailure("phase 1 reported unbounded".into()));
    }
    tab.refactor()?;
    let rhs_scale = tab.rhs().iter().fold(T::one(), |acc, &b| acc.max(b.abs()));
    let infeasibility = tab
        .basis
        .iter()
        .zip(&tab.xb)
        .filter(|(&j, _)| j >= n)
        .fold(T::zero(), |acc, (_, &x)| acc + x);
    if infeasibility > T::tol(1e-9) * rhs_scale {
        return Ok(LpOutcome::Infeasible);
    }

    // Drive zero-level artificials out of the basis where possible.
    for r in 0..m {
        if tab.basis[r] < n {
            continue;
        }
        let binv_row = tab.binv.row(r).to_vec();
        let candidate = (0..n)
            .filter(|j| !tab.basis.contains(j))
            .map(|j| (j, tab.column_dot(j, &binv_row)))
            .filter(|(_, v)| v.abs() > T::of(1e-7))
            .max_by(|p, q| p.1.abs().partial_cmp(&q.1.abs()).unwrap());
        if let Some((j, _)) = candidate {
            let u = tab.binv.mul_vec(&tab.column(j));
            tab.xb[r] = T::zero();
            tab.pivot(r, j, &u);
        }
    }

    // Phase 2.
    let bounded = tab.optimize(
        |j| if j < n { lp.costs[j] } else { T::zero() },
        |j| j < n,
        n + m,
        opts,
        limit,
    )?;
    if !bounded {
        return Ok(LpOutcome::Unbounded);
    }
    tab.refactor()?;
    let mut x = vec![T::zero(); n];
    for (&j, &v) in tab.basis.iter().zip(&tab.xb) {
        if j < n {
            x[j] = v.max(T::zero());
        }
    }
    let pi = tab.multipliers(&|j| if j < n { lp.costs[j] } else { T::zero() });
    let duals = pi.iter().zip(&tab.row_sign).map(|(&p, &s)| p * s).collect();
    let objective = x.iter().zip(&lp.costs).fold(T::zero(), |acc, (&xi, &ci)| acc + xi * ci);
    Ok(LpOutcome::Optimal {
        x,
        duals,
        objective,
        iterations: tab.iterations,
    })
}

/// Inequality `coeffᵀ π ≤ bound` over free variables `π`.
#[derive(Clone, Debug)]
pub struct Inequality<T> {
    pub coeff: Vec<T>,
    pub bound: T,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FreeOutcome<T> {
    Optimal { point: Vec<T>, value: T },
    Infeasible,
    Unbounded,
}

/// `max objectiveᵀ π` subject to `coeffᵀ π ≤ bound` for every inequality,
/// with `π` free, solved through the dual
/// `min Σ bound_k y_k  s.t.  Σ y_k coeff_k = objective, y ≥ 0`.
pub fn maximize_free<T: Scalar>(
    objective: &[T],
    inequalities: &[Inequality<T>],
    opts: &SimplexOptions,
) -> Result<FreeOutcome<T>, LpError> {
    let dim = objective.len();
    if let Some(bad) = inequalities.iter().find(|q| q.coeff.len() != dim) {
        return Err(LpError::Malformed(format!(
            "inequality with {} coefficients for {dim} variables",
            bad.coeff.len()
        )));
    }
    let dual = StandardForm {
        columns: inequalities.iter().map(|q| q.coeff.clone()).collect(),
        rhs: objective.to_vec(),
        costs: inequalities.iter().map(|q| q.bound).collect(),
    };
    Ok(match solve_standard(&dual, opts)? {
        LpOutcome::Optimal { duals, objective, .. } => FreeOutcome::Optimal {
            point: duals,
            value: objective,
        },
        LpOutcome::Infeasible => FreeOutcome::Unbounded,
        LpOutcome::Unbounded => FreeOutcome::Infeasible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ineq(coeff: &[f64], bound: f64) -> Inequality<f64> {
        Inequality {
            coeff: coeff.to_vec(),
            bound,
        }
    }

    /// Enumerates intersections of pairs of constraint lines in the plane
    /// and keeps the best feasible one.
    fn vertex_oracle(obj: [f64; 2], rows: &[Inequality<f64>]) -> Option<f64> {
        let mut best: Option<f64> = None;
        for i in 0..rows.len() {
            for k in i + 1..rows.len() {
                let (a, b) = (&rows[i], &rows[k]);
                let det = a.coeff[0] * b.coeff[1] - a.coeff[1] * b.coeff[0];
                if det.abs() < 1e-12 {
                    continue;
                }
                let x = (a.bound * b.coeff[1] - a.coeff[1] * b.bound) / det;
                let y = (a.coeff[0] * b.bound - a.bound * b.coeff[0]) / det;
                if rows.iter().all(|r| r.coeff[0] * x + r.coeff[1] * y <= r.bound + 1e-9) {
                    let v = obj[0] * x + obj[1] * y;
                    best = Some(best.map_or(v, |b: f64| b.max(v)));
                }
            }
        }
        best
    }

    #[test]
    fn textbook_standard_form() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → 36 at (2, 6).
        let lp: StandardForm<f64> = StandardForm {
            columns: vec![
                vec![1.0, 0.0, 3.0],
                vec![0.0, 2.0, 2.0],
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
            ],
            rhs: vec![4.0, 12.0, 18.0],
            costs: vec![-3.0, -5.0, 0.0, 0.0, 0.0],
        };
        match solve_standard(&lp, &SimplexOptions::default()).unwrap() {
            LpOutcome::Optimal { x, objective, .. } => {
                assert!((objective + 36.0).abs() < 1e-12);
                assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 6.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let infeasible = StandardForm {
            columns: vec![vec![1.0], vec![1.0]],
            rhs: vec![-1.0],
            costs: vec![0.0, 0.0],
        };
        assert_eq!(solve_standard(&infeasible, &SimplexOptions::default()).unwrap(), LpOutcome::Infeasible);
        let unbounded = StandardForm {
            columns: vec![vec![1.0], vec![-1.0]],
            rhs: vec![1.0],
            costs: vec![-1.0, 0.0],
        };
        assert_eq!(solve_standard(&unbounded, &SimplexOptions::default()).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn free_maximization_recovers_point() {
        // max x + y with x ≤ 1, y ≤ 2, -x ≤ 0, -y ≤ 0.
        let rows = [ineq(&[1.0, 0.0], 1.0), ineq(&[0.0, 1.0], 2.0), ineq(&[-1.0, 0.0], 0.0), ineq(&[0.0, -1.0], 0.0)];
        match maximize_free(&[1.0, 1.0], &rows, &SimplexOptions::default()).unwrap() {
            FreeOutcome::Optimal { point, value } => {
                assert!((value - 3.0).abs() < 1e-12);
                assert!((point[0] - 1.0).abs() < 1e-12 && (point[1] - 2.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        let contradictory = [ineq(&[1.0], -1.0), ineq(&[-1.0], -1.0)];
        assert_eq!(maximize_free(&[0.0], &contradictory, &SimplexOptions::default()).unwrap(), FreeOutcome::Infeasible);
        assert_eq!(
            maximize_free(&[1.0], &[ineq(&[-1.0], 0.0)], &SimplexOptions::default()).unwrap(),
            FreeOutcome::Unbounded
        );
    }

    #[test]
    fn agrees_with_vertex_enumeration_on_random_planar_programs() {
        let mut rng = crate::filter::rng(42);
        use rand::Rng;
        for _ in 0..200 {
            let mut rows: Vec<Inequality<f64>> = (0..rng.random_range(1..8))
                .map(|_| ineq(&[rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)], rng.random_range(-1.0..2.0)))
                .collect();
            // Box keeps every program bounded.
            for (c, b) in [([1.0, 0.0], 5.0), ([-1.0, 0.0], 5.0), ([0.0, 1.0], 5.0), ([0.0, -1.0], 5.0)] {
                rows.push(ineq(&c, b));
            }
            let obj = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let oracle = vertex_oracle(obj, &rows);
            match maximize_free(&obj, &rows, &SimplexOptions::default()).unwrap() {
                FreeOutcome::Optimal { point, value } => {
                    let o = oracle.expect("oracle found no vertex");
                    assert!((value - o).abs() < 1e-8, "{value} vs {o}");
                    assert!(rows.iter().all(|r| r.coeff[0] * point[0] + r.coeff[1] * point[1] <= r.bound + 1e-8));
                }
                FreeOutcome::Infeasible => assert!(oracle.is_none()),
                FreeOutcome::Unbounded => panic!("boxed program reported unbounded"),
            }
        }
    }

    #[test]
    fn inverse_of_small_matrix() {
        let m: Matrix<f64> = Matrix::from_rows(vec![vec![2.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let inv = invert(&m).unwrap();
        let id = m.matmul(&inv);
        for i in 0..2 {
            for j in 0..2 {
                assert!((id[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
        assert!(invert(&Matrix::<f64>::zeros(2, 2)).is_none());
    }
}
