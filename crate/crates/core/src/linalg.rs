//! Dense linear algebra: exact Gauss-Jordan over rationals and partial-pivot
//! elimination over [`Real`] scalars.

use crate::error::{input, Error, Result};
use crate::exact::{Rational, Real};

/// Reduced row echelon form in place; returns pivot columns.
fn rref(m: &mut [Vec<Rational>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row == m.len() {
            break;
        }
        let Some(p) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for v in m[row].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = m[row].clone();
        for (r, other) in m.iter_mut().enumerate() {
            if r == row || other[col].is_zero() {
                continue;
            }
            let f = other[col].clone();
            for (v, pv) in other.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &(&f * pv);
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

/// Solves `a·x = b` exactly. Fails with `Underdetermined` when the solution is
/// not unique and with an input error when the system is inconsistent.
pub fn solve_rational(a: &[Vec<Rational>], b: &[Rational]) -> Result<Vec<Rational>> {
    if a.len() != b.len() {
        return input("row count mismatch");
    }
    let n = a.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut m, n);
    if m.iter().skip(pivots.len()).any(|r| !r[n].is_zero()) {
        return input("inconsistent linear system");
    }
    if pivots.len() < n {
        return Err(Error::Underdetermined(format!(
            "rank {} for {} unknowns",
            pivots.len(),
            n
        )));
    }
    Ok((0..n).map(|i| m[i][n].clone()).collect())
}

/// A nonzero `v` with `a·v = 0`, or `None` when the columns are independent.
pub fn null_vector(a: &[Vec<Rational>]) -> Option<Vec<Rational>> {
    let n = a.first().map_or(0, |r| r.len());
    let mut m = a.to_vec();
    let pivots = rref(&mut m, n);
    let free = (0..n).find(|c| !pivots.contains(c))?;
    let mut v = vec![Rational::zero(); n];
    v[free] = Rational::one();
    for (r, &pc) in pivots.iter().enumerate() {
        v[pc] = -&m[r][free];
    }
    Some(v)
}

/// Rank of a rational matrix.
pub fn rank(a: &[Vec<Rational>]) -> usize {
    let n = a.first().map_or(0, |r| r.len());
    let mut m = a.to_vec();
    rref(&mut m, n).len()
}

/// Solves the square system `a·x = b` with partial pivoting.
pub fn solve_real<R: Real>(a: &[Vec<R>], b: &[R]) -> Result<Vec<R>> {
    let n = b.len();
    if a.len() != n || a.iter().any(|r| r.len() != n) {
        return input("square system expected");
    }
    let mut m: Vec<Vec<R>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n)
            .max_by(|&i, &j| {
                m[i][col]
                    .abs()
                    .partial_cmp(&m[j][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        if m[p][col].to_f64() == 0.0 {
            return Err(Error::Solver("singular basis matrix".into()));
        }
        m.swap(col, p);
        let pivot_row = m[col].clone();
        for row in m.iter_mut().skip(col + 1) {
            let f = row[col].clone() / pivot_row[col].clone();
            for k in col..=n {
                row[k] = row[k].clone() - f.clone() * &pivot_row[k];
            }
        }
    }
    let mut x: Vec<R> = Vec::with_capacity(n);
    for i in (0..n).rev() {
        let mut acc = m[i][n].clone();
        for (k, xk) in x.iter().rev().enumerate() {
            let j = i + 1 + k;
            acc = acc - m[i][j].clone() * xk;
        }
        x.push(acc / m[i][i].clone());
    }
    x.reverse();
    Ok(x)
}
