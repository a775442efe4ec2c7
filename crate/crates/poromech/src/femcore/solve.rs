use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, Lu, SymbolicLu};
use faer::{Mat, Side};

use super::sparse::SparseOperator;
use super::FemError;

/// Relative residual target for symmetric positive definite solves.
pub const SPD_TOL: f64 = 1e-12;
const REFINE_STEPS: usize = 4;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn residual(op: &SparseOperator, x: &[f64], b: &[f64]) -> Vec<f64> {
    let ax = op.matvec(x);
    b.iter().zip(ax).map(|(b, a)| b - a).collect()
}

fn to_col(b: &[f64]) -> Mat<f64> {
    Mat::from_fn(b.len(), 1, |i, _| b[i])
}

// one factor per operator, so the size gap is irrelevant
#[allow(clippy::large_enum_variant)]
enum Factor {
    Llt(Llt<usize, f64>),
    Lu(Lu<usize, f64>),
}

impl Factor {
    fn apply(&self, b: &[f64]) -> Vec<f64> {
        let mut x = to_col(b);
        match self {
            Factor::Llt(f) => f.solve_in_place(x.as_mut()),
            Factor::Lu(f) => f.solve_in_place(x.as_mut()),
        }
        (0..b.len()).map(|i| x[(i, 0)]).collect()
    }
}

/// Factorized square operator with iterative refinement on every solve.
pub struct Factorized {
    op: SparseOperator,
    factor: Factor,
}

impl std::fmt::Debug for Factorized {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Factorized").field("n", &self.op.nrows).finish()
    }
}

impl Factorized {
    /// Cholesky of an SPD operator.
    pub fn cholesky(op: &SparseOperator) -> Result<Self, FemError> {
        check_square(op)?;
        let m = op.to_faer()?;
        let f = m
            .sp_cholesky(Side::Lower)
            .map_err(|e| FemError::Factorization(format!("Cholesky failed: {e:?}")))?;
        Ok(Self {
            op: op.clone(),
            factor: Factor::Llt(f),
        })
    }

    /// LU with partial pivoting for general square operators.
    pub fn lu(op: &SparseOperator) -> Result<Self, FemError> {
        check_square(op)?;
        let m = op.to_faer()?;
        let f = m
            .sp_lu()
            .map_err(|e| FemError::Factorization(format!("LU failed: {e:?}")))?;
        Ok(Self {
            op: op.clone(),
            factor: Factor::Lu(f),
        })
    }

    /// LU reusing the symbolic analysis in `cache` when the sparsity pattern is unchanged.
    pub fn lu_cached(op: &SparseOperator, cache: &mut LuCache) -> Result<Self, FemError> {
        check_square(op)?;
        let m = op.to_faer()?;
        let pattern = op.pattern();
        let symbolic = match &cache.entry {
            Some((p, s)) if *p == pattern => s.clone(),
            _ => {
                let s = SymbolicLu::try_new(m.symbolic())
                    .map_err(|e| FemError::Factorization(format!("symbolic LU failed: {e:?}")))?;
                cache.entry = Some((pattern, s.clone()));
                s
            }
        };
        let f = Lu::try_new_with_symbolic(symbolic, m.as_ref())
            .map_err(|e| FemError::Factorization(format!("LU failed: {e:?}")))?;
        Ok(Self {
            op: op.clone(),
            factor: Factor::Lu(f),
        })
    }

    pub fn dim(&self) -> usize {
        self.op.nrows
    }

    /// Solution and achieved relative residual.
    pub fn solve_with_residual(&self, b: &[f64]) -> Result<(Vec<f64>, f64), FemError> {
        if b.len() != self.op.nrows {
            return Err(FemError::DimensionMismatch {
                expected: self.op.nrows,
                got: b.len(),
            });
        }
        let bn = norm(b);
        if bn == 0.0 {
            return Ok((vec![0.0; b.len()], 0.0));
        }
        let mut x = self.factor.apply(b);
        let mut r = residual(&self.op, &x, b);
        let mut rel = norm(&r) / bn;
        for _ in 0..REFINE_STEPS {
            if rel <= 0.1 * SPD_TOL || !rel.is_finite() {
                break;
            }
            let dx = self.factor.apply(&r);
            let cand: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + d).collect();
            let rc = residual(&self.op, &cand, b);
            let relc = norm(&rc) / bn;
            if !(relc < rel) {
                break;
            }
            x = cand;
            r = rc;
            rel = relc;
        }
        if !rel.is_finite() {
            return Err(FemError::Factorization("solve produced non-finite values".into()));
        }
        Ok((x, rel))
    }

    /// Solve that fails when the relative residual exceeds `tol`.
    pub fn solve_to(&self, b: &[f64], tol: f64) -> Result<Vec<f64>, FemError> {
        let (x, rel) = self.solve_with_residual(b)?;
        if rel > tol {
            return Err(FemError::NotConverged {
                achieved: rel,
                target: tol,
            });
        }
        Ok(x)
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, FemError> {
        self.solve_to(b, SPD_TOL)
    }
}

type Pattern = (Vec<usize>, Vec<usize>);

/// Symbolic LU analysis keyed by sparsity pattern.
#[derive(Default)]
pub struct LuCache {
    entry: Option<(Pattern, SymbolicLu<usize>)>,
}

impl std::fmt::Debug for LuCache {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LuCache")
            .field("cached", &self.entry.is_some())
            .finish()
    }
}

fn check_square(op: &SparseOperator) -> Result<(), FemError> {
    if op.nrows != op.ncols {
        return Err(FemError::DimensionMismatch {
            expected: op.nrows,
            got: op.ncols,
        });
    }
    Ok(())
}

/// Direct SPD solve with relative residual ≤ 1e-12.
pub fn solve_spd(op: &SparseOperator, rhs: &[f64]) -> Result<Vec<f64>, FemError> {
    if op.nrows == 0 {
        return Ok(Vec::new());
    }
    Factorized::cholesky(op)?.solve(rhs)
}
