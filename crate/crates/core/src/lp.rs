//! Exact rational linear feasibility.
//!
//! Decides whether `{x >= 0 : Ax = b}` is nonempty, and produces an exact
//! witness when it is. The engine behind every coupling-existence question.
//!
//! Algorithm: phase-1 simplex on a dense tableau with one artificial
//! variable per row and Bland's smallest-index pivot rule, entirely in
//! rational arithmetic. Bland's rule never cycles, so termination needs no
//! perturbation or tolerance; redundant and inconsistent rows need no
//! pre-filtering because the artificial variables absorb them. Instances
//! here are tiny (a few hundred columns), so a dense tableau beats any
//! sparsity machinery.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

/// `A x = b` over named nonnegative unknowns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSystem {
    matrix: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    names: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpError {
    DimensionMismatch { detail: String },
}

impl fmt::Display for LpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpError::DimensionMismatch { detail } => write!(f, "DimensionMismatch: {detail}"),
        }
    }
}

impl core::error::Error for LpError {}

impl LinearSystem {
    /// Checks shape only: `m >= 1`, `n >= 1`, rectangular matrix, one rhs
    /// entry per row, one name per column.
    pub fn new(
        matrix: Vec<Vec<Rational>>,
        rhs: Vec<Rational>,
        names: Vec<String>,
    ) -> Result<Self, LpError> {
        let m = matrix.len();
        if m == 0 {
            return Err(LpError::DimensionMismatch {
                detail: String::from("no constraint rows"),
            });
        }
        let n = matrix[0].len();
        if n == 0 {
            return Err(LpError::DimensionMismatch {
                detail: String::from("no variables"),
            });
        }
        if let Some(row) = matrix.iter().find(|r| r.len() != n) {
            return Err(LpError::DimensionMismatch {
                detail: alloc::format!("ragged row of length {} (expected {n})", row.len()),
            });
        }
        if rhs.len() != m {
            return Err(LpError::DimensionMismatch {
                detail: alloc::format!("{} rhs entries for {m} rows", rhs.len()),
            });
        }
        if names.len() != n {
            return Err(LpError::DimensionMismatch {
                detail: alloc::format!("{} variable names for {n} columns", names.len()),
            });
        }
        Ok(LinearSystem { matrix, rhs, names })
    }

    pub fn num_rows(&self) -> usize {
        self.matrix.len()
    }

    pub fn num_vars(&self) -> usize {
        self.matrix[0].len()
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.matrix
    }

    pub fn rhs(&self) -> &[Rational] {
        &self.rhs
    }

    pub fn variable_names(&self) -> &[String] {
        &self.names
    }

    /// True iff `x >= 0` and `Ax = b` exactly.
    pub fn is_solution(&self, x: &[Rational]) -> bool {
        if x.len() != self.num_vars() || x.iter().any(|v| v.is_negative()) {
            return false;
        }
        self.matrix.iter().zip(&self.rhs).all(|(row, b)| {
            let lhs: Rational = row.iter().zip(x).map(|(a, v)| a * v).sum();
            lhs == *b
        })
    }
}

/// Verdict of a feasibility solve. A witness accompanies every `Feasible`
/// verdict; no particular vertex is promised, only exactness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FeasibilityResult {
    Feasible(Vec<Rational>),
    Infeasible,
}

impl FeasibilityResult {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityResult::Feasible(_))
    }

    pub fn witness(&self) -> Option<&[Rational]> {
        match self {
            FeasibilityResult::Feasible(x) => Some(x),
            FeasibilityResult::Infeasible => None,
        }
    }
}

/// Decide `{x >= 0 : Ax = b} != âˆ…` exactly.
///
/// Deterministic: identical inputs take identical pivot sequences. The
/// verdict is invariant under scaling any row (with its rhs entry) by a
/// positive rational.
pub fn solve_feasibility(problem: &LinearSystem) -> FeasibilityResult {
    let m = problem.num_rows();
    let n = problem.num_vars();

    // Tableau rows over columns [original 0..n | artificial n..n+m], with
    // rhs kept separately. Rows are sign-flipped so every rhs is >= 0.
    let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(m);
    let mut rhs: Vec<Rational> = Vec::with_capacity(m);
    for (row, b) in problem.matrix.iter().zip(&problem.rhs) {
        let flip = b.is_negative();
        let mut full = alloc::vec![Rational::zero(); n + m];
        for (j, a) in row.iter().enumerate() {
            full[j] = if flip { -a.clone() } else { a.clone() };
        }
        full[n + rows.len()] = Rational::one();
        rhs.push(if flip { -b.clone() } else { b.clone() });
        rows.push(full);
    }

    // Minimize the sum of artificial variables. With the artificial basis,
    // the reduced cost of original column j is -(column sum); artificial
    // columns start at zero.
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut reduced: Vec<Rational> = alloc::vec![Rational::zero(); n + m];
    for j in 0..n {
        let mut sum = Rational::zero();
        for row in &rows {
            sum += &row[j];
        }
        reduced[j] = -sum;
    }
    let mut objective: Rational = rhs.iter().sum();

    loop {
        // Bland: entering column is the smallest index with negative
        // reduced cost (artificial columns included; indexing them after
        // the originals keeps the rule's termination guarantee intact).
        let Some(entering) = reduced.iter().position(|r| r.is_negative()) else {
            break;
        };

        // Ratio test; ties broken by the smallest basic variable index.
        let mut leaving: Option<(usize, Rational)> = None;
        for i in 0..m {
            if !rows[i][entering].is_positive() {
                continue;
            }
            let ratio = &rhs[i] / &rows[i][entering];
            match &leaving {
                Some((best, best_ratio)) => {
                    if ratio < *best_ratio
                        || (ratio == *best_ratio && basis[i] < basis[*best])
                    {
                        leaving = Some((i, ratio));
                    }
                }
                None => leaving = Some((i, ratio)),
            }
        }
        let (pivot_row, _) = leaving.unwrap_or_else(|| {
            // The objective is a sum of nonnegative variables, bounded
            // below by zero, so an improving column always hits a bound.
            unreachable!("phase-1 objective cannot be unbounded")
        });

        pivot(
            &mut rows,
            &mut rhs,
            &mut reduced,
            &mut objective,
            pivot_row,
            entering,
        );
        basis[pivot_row] = entering;
    }

    if !objective.is_zero() {
        return FeasibilityResult::Infeasible;
    }

    // Any artificial still basic sits at level zero, so reading off the
    // original coordinates yields an exact solution.
    let mut witness = alloc::vec![Rational::zero(); n];
    for (i, &var) in basis.iter().enumerate() {
        if var < n {
            witness[var] = rhs[i].clone();
        }
    }
    debug_assert!(problem.is_solution(&witness));
    FeasibilityResult::Feasible(witness)
}

fn pivot(
    rows: &mut [Vec<Rational>],
    rhs: &mut [Rational],
    reduced: &mut [Rational],
    objective: &mut Rational,
    pivot_row: usize,
    pivot_col: usize,
) {
    let factor = rows[pivot_row][pivot_col].clone();
    if !factor.is_one() {
        for entry in rows[pivot_row].iter_mut() {
            if !entry.is_zero() {
                *entry /= &factor;
            }
        }
        rhs[pivot_row] /= &factor;
    }

    let nonzero_cols: Vec<usize> = rows[pivot_row]
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_zero())
        .map(|(j, _)| j)
        .collect();

    for i in 0..rows.len() {
        if i == pivot_row || rows[i][pivot_col].is_zero() {
            continue;
        }
        let scale = rows[i][pivot_col].clone();
        for &j in &nonzero_cols {
            let delta = &scale * &rows[pivot_row][j];
            rows[i][j] -= delta;
        }
        let delta = &scale * &rhs[pivot_row];
        rhs[i] -= delta;
    }

    if !reduced[pivot_col].is_zero() {
        let scale = reduced[pivot_col].clone();
        for &j in &nonzero_cols {
            let delta = &scale * &rows[pivot_row][j];
            reduced[j] -= delta;
        }
        // Entering variable rises to the (normalized) pivot rhs, moving the
        // objective by its reduced cost times that amount.
        let delta = &scale * &rhs[pivot_row];
        *objective += delta;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use alloc::string::ToString;
    use proptest::prelude::*;

    fn named(n: usize) -> Vec<String> {
        (0..n).map(|i| alloc::format!("x{i}")).collect()
    }

    fn system(matrix: Vec<Vec<Rational>>, rhs: Vec<Rational>) -> LinearSystem {
        let n = matrix[0].len();
        LinearSystem::new(matrix, rhs, named(n)).unwrap()
    }

    #[test]
    fn one_row_two_vars_is_feasible() {
        let problem = system(alloc::vec![alloc::vec![int(1), int(1)]], alloc::vec![int(1)]);
        let result = solve_feasibility(&problem);
        let witness = result.witness().expect("feasible");
        assert!(problem.is_solution(witness));
    }

    #[test]
    fn negative_rhs_with_one_nonnegative_var_is_infeasible() {
        let problem = system(alloc::vec![alloc::vec![int(1)]], alloc::vec![int(-1)]);
        assert_eq!(solve_feasibility(&problem), FeasibilityResult::Infeasible);
    }

    #[test]
    fn coupling_two_fair_coins_with_certain_equality() {
        // Atoms (++, +-, -+, --) of a pair of Bernoulli(1/2) variables,
        // constrained to agree with probability 1. Hand enumeration shows
        // the solution is unique: (1/2, 0, 0, 1/2).
        let problem = system(
            alloc::vec![
                alloc::vec![int(1), int(1), int(0), int(0)], // first = +
                alloc::vec![int(0), int(0), int(1), int(1)], // first = -
                alloc::vec![int(1), int(0), int(1), int(0)], // second = +
                alloc::vec![int(0), int(1), int(0), int(1)], // second = -
                alloc::vec![int(1), int(0), int(0), int(1)], // equal
            ],
            alloc::vec![rat(1, 2), rat(1, 2), rat(1, 2), rat(1, 2), int(1)],
        );
        let result = solve_feasibility(&problem);
        assert_eq!(
            result.witness().expect("feasible"),
            &[rat(1, 2), int(0), int(0), rat(1, 2)]
        );
    }

    #[test]
    fn redundant_and_inconsistent_rows() {
        // Same row three times: feasible, artificials absorb redundancy.
        let problem = system(
            alloc::vec![
                alloc::vec![int(1), int(2)],
                alloc::vec![int(1), int(2)],
                alloc::vec![int(1), int(2)],
            ],
            alloc::vec![int(2), int(2), int(2)],
        );
        assert!(solve_feasibility(&problem).is_feasible());

        // Contradictory copies: infeasible.
        let problem = system(
            alloc::vec![alloc::vec![int(1), int(2)], alloc::vec![int(1), int(2)]],
            alloc::vec![int(2), int(3)],
        );
        assert_eq!(solve_feasibility(&problem), FeasibilityResult::Infeasible);
    }

    #[test]
    fn degenerate_instances_terminate() {
        // Zero rhs everywhere forces degenerate pivots from the start.
        let problem = system(
            alloc::vec![
                alloc::vec![int(1), int(-1), int(0)],
                alloc::vec![int(0), int(1), int(-1)],
                alloc::vec![int(1), int(0), int(-1)],
            ],
            alloc::vec![int(0), int(0), int(0)],
        );
        let result = solve_feasibility(&problem);
        assert!(problem.is_solution(result.witness().unwrap()));

        // Classic cycling-prone shape (degenerate vertex with many ties).
        let problem = system(
            alloc::vec![
                alloc::vec![rat(1, 4), int(-8), int(-1), int(9), int(1), int(0), int(0)],
                alloc::vec![rat(1, 2), int(-12), rat(-1, 2), int(3), int(0), int(1), int(0)],
                alloc::vec![int(0), int(0), int(1), int(0), int(0), int(0), int(1)],
            ],
            alloc::vec![int(0), int(0), int(1)],
        );
        let result = solve_feasibility(&problem);
        assert!(problem.is_solution(result.witness().unwrap()));
    }

    #[test]
    fn zero_row_consistency() {
        let problem = system(
            alloc::vec![alloc::vec![int(0), int(0)]],
            alloc::vec![int(0)],
        );
        assert!(solve_feasibility(&problem).is_feasible());

        let problem = system(
            alloc::vec![alloc::vec![int(0), int(0)]],
            alloc::vec![int(1)],
        );
        assert_eq!(solve_feasibility(&problem), FeasibilityResult::Infeasible);
    }

    #[test]
    fn dimension_checks() {
        assert!(LinearSystem::new(alloc::vec![], alloc::vec![], alloc::vec![]).is_err());
        assert!(LinearSystem::new(
            alloc::vec![alloc::vec![int(1)]],
            alloc::vec![int(1), int(2)],
            alloc::vec!["x".to_string()],
        )
        .is_err());
        assert!(LinearSystem::new(
            alloc::vec![alloc::vec![int(1), int(2)], alloc::vec![int(1)]],
            alloc::vec![int(1), int(2)],
            alloc::vec!["x".to_string(), "y".to_string()],
        )
        .is_err());
    }

    fn small_rational() -> impl Strategy<Value = Rational> {
        (-4i64..=4, 1i64..=4).prop_map(|(n, d)| rat(n, d))
    }

    proptest! {
        // Solving twice yields the same result, and scaling any row by a
        // positive rational never changes the verdict.
        #[test]
        fn deterministic_and_scale_invariant(
            rows in proptest::collection::vec(
                proptest::collection::vec(small_rational(), 3),
                1..4,
            ),
            rhs_vals in proptest::collection::vec(small_rational(), 4),
            scale_num in 1i64..=5,
            scale_den in 1i64..=5,
            scaled_row in 0usize..4,
        ) {
            let m = rows.len();
            let rhs = rhs_vals[..m].to_vec();
            let problem = system(rows.clone(), rhs.clone());
            let first = solve_feasibility(&problem);
            let second = solve_feasibility(&problem);
            prop_assert_eq!(&first, &second);
            if let Some(w) = first.witness() {
                prop_assert!(problem.is_solution(w));
            }

            let k = scaled_row % m;
            let factor = rat(scale_num, scale_den);
            let mut scaled = rows;
            let mut scaled_rhs = rhs;
            for v in scaled[k].iter_mut() {
                *v *= &factor;
            }
            scaled_rhs[k] *= &factor;
            let scaled_problem = system(scaled, scaled_rhs);
            prop_assert_eq!(
                solve_feasibility(&scaled_problem).is_feasible(),
                first.is_feasible()
            );
        }
    }
}
