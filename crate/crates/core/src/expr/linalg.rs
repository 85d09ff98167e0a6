//! Small dense matrices of exact expressions.

use std::ops::{Index, IndexMut};

use super::{Expr, ExprError, Result, VariableSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExprMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Expr>,
}

impl ExprMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ExprMatrix {
            rows,
            cols,
            data: vec![Expr::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = ExprMatrix::zeros(n, n);
        for k in 0..n {
            m[(k, k)] = Expr::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Expr) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        ExprMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[Expr] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        ExprMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn mul(&self, rhs: &ExprMatrix) -> ExprMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        ExprMatrix::from_fn(self.rows, rhs.cols, |r, c| {
            (0..self.cols).map(|k| &self[(r, k)] * &rhs[(k, c)]).sum()
        })
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && *self == ExprMatrix::identity(self.rows)
    }

    /// Row echelon elimination with the first nonzero pivot. Returns the
    /// determinant and, when `rhs` is given, the solution columns.
    fn eliminate(&self, rhs: Option<&ExprMatrix>) -> Result<(Expr, Option<ExprMatrix>)> {
        assert_eq!(self.rows, self.cols, "square matrix required");
        let n = self.rows;
        let extra = rhs.map_or(0, |r| r.cols);
        let width = n + extra;
        let mut a: Vec<Vec<Expr>> = (0..n)
            .map(|r| {
                let mut row = self.row(r).to_vec();
                if let Some(b) = rhs {
                    row.extend_from_slice(b.row(r));
                }
                row
            })
            .collect();
        let mut det = Expr::one();
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| !a[r][col].is_exactly_zero()) else {
                return Ok((Expr::zero(), None));
            };
            if pivot != col {
                a.swap(pivot, col);
                det = -&det;
            }
            let p = a[col][col].clone();
            det = &det * &p;
            let inv = Expr::one().checked_div(&p)?;
            for c in col..width {
                a[col][c] = &a[col][c] * &inv;
            }
            for r in 0..n {
                if r == col || a[r][col].is_exactly_zero() {
                    continue;
                }
                let factor = a[r][col].clone();
                for c in col..width {
                    let delta = &factor * &a[col][c];
                    a[r][c] = &a[r][c] - &delta;
                }
            }
        }
        let solution = rhs.map(|_| ExprMatrix::from_fn(n, extra, |r, c| a[r][n + c].clone()));
        Ok((det, solution))
    }

    pub fn determinant(&self) -> Expr {
        self.eliminate(None).map(|(d, _)| d).unwrap_or_else(|_| Expr::zero())
    }

    /// Solves `self · X = rhs` exactly.
    pub fn solve(&self, rhs: &ExprMatrix, vars: &VariableSet) -> Result<ExprMatrix> {
        let (det, sol) = self.eliminate(Some(rhs))?;
        sol.ok_or_else(|| ExprError::SingularMatrix {
            determinant: det.print(vars),
        })
    }

    pub fn inverse(&self, vars: &VariableSet) -> Result<ExprMatrix> {
        self.solve(&ExprMatrix::identity(self.rows), vars)
    }

    pub fn map(&self, f: impl FnMut(&Expr) -> Expr) -> ExprMatrix {
        ExprMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Expr> {
        self.data.iter()
    }
}

impl Index<(usize, usize)> for ExprMatrix {
    type Output = Expr;
    fn index(&self, (r, c): (usize, usize)) -> &Expr {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ExprMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Expr {
        &mut self.data[r * self.cols + c]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn inverse_of_symbolic_two_by_two() {
        let vars = VariableSet::new(2).unwrap();
        let p = |s: &str| parse(s, &vars).unwrap();
        let m = ExprMatrix::from_fn(2, 2, |r, c| match (r, c) {
            (0, 0) | (0, 1) => Expr::one(),
            (1, 0) => p("x2"),
            _ => p("x1"),
        });
        assert_eq!(m.determinant(), p("x1 - x2"));
        let inv = m.inverse(&vars).unwrap();
        assert!(m.mul(&inv).is_identity());
    }

    #[test]
    fn singular_matrix_reports_determinant() {
        let vars = VariableSet::new(1).unwrap();
        let m = ExprMatrix::from_fn(2, 2, |_, _| Expr::var(vars.position(0)));
        assert!(matches!(
            m.inverse(&vars),
            Err(ExprError::SingularMatrix { .. })
        ));
        assert!(m.determinant().is_exactly_zero());
    }
}
