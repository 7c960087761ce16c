//! Convex-hull membership by phase-I simplex, with Farkas certificates and
//! Carathéodory reduction.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::exact::{BigReal, Rational, DEFAULT_DIGITS};
use crate::linalg::{null_vector, solve_real};
use crate::moments::MomentBasis;
use crate::region::SymmetricAtom;

/// "Is `target` a convex combination of `columns`?"
#[derive(Clone, Debug, PartialEq)]
pub struct HullProblem {
    pub columns: Vec<Vec<Rational>>,
    pub target: Vec<Rational>,
}

impl HullProblem {
    pub fn new(columns: Vec<Vec<Rational>>, target: Vec<Rational>) -> Result<Self> {
        if columns.is_empty() {
            return input("hull problem needs at least one column");
        }
        if let Some(c) = columns.iter().find(|c| c.len() != target.len()) {
            return input(format!(
                "column of length {} for target of length {}",
                c.len(),
                target.len()
            ));
        }
        Ok(HullProblem { columns, target })
    }

    pub fn dim(&self) -> usize {
        self.target.len()
    }

    /// `‖Σ w_j·col_j − target‖∞`, exactly.
    pub fn residual(&self, weights: &[Rational]) -> Rational {
        (0..self.dim())
            .map(|i| {
                let s: Rational = self
                    .columns
                    .iter()
                    .zip(weights)
                    .filter(|(_, w)| !w.is_zero())
                    .map(|(c, w)| &c[i] * w)
                    .sum();
                (s - &self.target[i]).abs()
            })
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Exact pivoting over rationals.
    Rational,
    /// Scaled `f64` pivoting, re-verified in high precision and exact arithmetic.
    Float,
}

/// `a·col + b ≥ 0` on every column and `a·target + b = −delta < 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FarkasCertificate {
    pub a: Vec<Rational>,
    pub b: Rational,
    pub delta: Rational,
}

impl FarkasCertificate {
    pub fn value_at(&self, col: &[Rational]) -> Rational {
        self.a.iter().zip(col).map(|(a, c)| a * c).sum::<Rational>() + &self.b
    }

    /// Exact re-check: every column value `≥ −tol` and target value `≤ −delta` with `delta > tol`.
    pub fn verify(&self, prob: &HullProblem, tol: &Rational) -> bool {
        let neg_tol = -tol;
        self.delta > *tol
            && self.value_at(&prob.target) <= -&self.delta
            && prob.columns.iter().all(|c| self.value_at(c) >= neg_tol)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Feasibility {
    Feasible { weights: Vec<Rational> },
    Infeasible(FarkasCertificate),
}

trait Field: Clone + PartialOrd + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn over(&self, o: &Self) -> Self;
    /// Treated as strictly positive.
    fn pos(&self) -> bool;
    /// Treated as strictly negative.
    fn neg(&self) -> bool;
    fn magnitude(&self) -> f64;
    /// Equal up to the field's tolerance.
    fn close(&self, o: &Self) -> bool;
}

impl Field for Rational {
    fn zero() -> Self {
        Rational::zero()
    }
    fn one() -> Self {
        Rational::one()
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn over(&self, o: &Self) -> Self {
        self / o
    }
    fn pos(&self) -> bool {
        self.is_positive()
    }
    fn neg(&self) -> bool {
        self.is_negative()
    }
    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }
    fn close(&self, o: &Self) -> bool {
        self == o
    }
}

const FLOAT_EPS: f64 = 1e-11;

/// Consecutive degenerate pivots before switching to Bland's rule.
const BLAND_AFTER: usize = 50;

impl Field for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn over(&self, o: &Self) -> Self {
        self / o
    }
    fn pos(&self) -> bool {
        *self > FLOAT_EPS
    }
    fn neg(&self) -> bool {
        *self < -FLOAT_EPS
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn close(&self, o: &Self) -> bool {
        (self - o).abs() <= FLOAT_EPS
    }
}

/// Phase-I tableau for `A·w + s = b`, `w, s ≥ 0`, minimizing `Σ s`.
struct Tableau<T> {
    rows: Vec<Vec<T>>,
    obj: Vec<T>,
    basis: Vec<usize>,
    n: usize,
}

impl<T: Field> Tableau<T> {
    fn new(a: &[Vec<T>], b: &[T]) -> Self {
        let m = a.len();
        let n = a.first().map_or(0, |r| r.len());
        let width = n + m + 1;
        let mut rows = Vec::with_capacity(m);
        for (i, (ai, bi)) in a.iter().zip(b).enumerate() {
            let mut r = Vec::with_capacity(width);
            r.extend(ai.iter().cloned());
            r.extend((0..m).map(|k| if k == i { T::one() } else { T::zero() }));
            r.push(bi.clone());
            rows.push(r);
        }
        let mut obj = vec![T::zero(); width];
        for r in &rows {
            for j in 0..n {
                obj[j] = obj[j].minus(&r[j]);
            }
            obj[width - 1] = obj[width - 1].minus(&r[width - 1]);
        }
        Tableau {
            rows,
            obj,
            basis: (n..n + m).collect(),
            n,
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let width = self.obj.len();
        let p = self.rows[row][col].clone();
        let pr: Vec<T> = self.rows[row].iter().map(|v| v.over(&p)).collect();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col].clone();
            if f == T::zero() {
                continue;
            }
            for k in 0..width {
                if pr[k] != T::zero() {
                    r[k] = r[k].minus(&f.times(&pr[k]));
                }
            }
        }
        let f = self.obj[col].clone();
        if f != T::zero() {
            for k in 0..width {
                if pr[k] != T::zero() {
                    self.obj[k] = self.obj[k].minus(&f.times(&pr[k]));
                }
            }
        }
        self.rows[row] = pr;
        self.basis[row] = col;
    }

    /// Most negative reduced cost, switching to Bland's rule (lowest-index
    /// improving column, lowest-index leaving variable on ties) while pivots
    /// are degenerate, so the objective cannot cycle.
    fn run(&mut self, max_iter: usize) -> Result<()> {
        let rhs = self.obj.len() - 1;
        let mut streak = 0usize;
        for _ in 0..max_iter {
            // a column without a positive entry cannot decrease the bounded
            // phase-I objective; in float mode it is rounding noise
            let eligible = |j: usize| self.obj[j].neg() && self.rows.iter().any(|r| r[j].pos());
            let col = if streak >= BLAND_AFTER {
                (0..rhs).find(|&j| eligible(j))
            } else {
                (0..rhs).filter(|&j| eligible(j)).min_by(|&a, &b| {
                    self.obj[a]
                        .partial_cmp(&self.obj[b])
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
            };
            let Some(col) = col else {
                return Ok(());
            };
            let mut best: Option<(usize, T)> = None;
            for (i, r) in self.rows.iter().enumerate() {
                if !r[col].pos() {
                    continue;
                }
                let ratio = r[rhs].over(&r[col]);
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        let tie = ratio.close(&br);
                        if (!tie && ratio < br) || (tie && self.basis[i] < self.basis[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let Some((row, ratio)) = best else {
                return Err(Error::Solver("unbounded phase-I direction".into()));
            };
            if ratio.pos() {
                streak = 0;
            } else {
                streak += 1;
            }
            self.pivot(row, col);
        }
        Err(Error::Solver(format!(
            "no convergence within {max_iter} pivots"
        )))
    }

    /// Pivots basic slacks out in favour of structural columns where possible.
    fn drive_out_slacks(&mut self) {
        for i in 0..self.rows.len() {
            if self.basis[i] < self.n {
                continue;
            }
            let best = (0..self.n)
                .filter(|&j| self.rows[i][j].magnitude() > 0.0)
                .max_by(|&a, &b| {
                    let (x, y) = (self.rows[i][a].magnitude(), self.rows[i][b].magnitude());
                    x.partial_cmp(&y).unwrap_or(std::cmp::Ordering::Equal)
                });
            if let Some(j) = best {
                self.pivot(i, j);
            }
        }
    }

    fn value(&self) -> T {
        T::zero().minus(&self.obj[self.obj.len() - 1])
    }

    /// Simplex multipliers of the phase-I optimum.
    fn duals(&self) -> Vec<T> {
        (0..self.rows.len())
            .map(|i| T::one().minus(&self.obj[self.n + i]))
            .collect()
    }

    fn primal(&self) -> Vec<T> {
        let rhs = self.obj.len() - 1;
        let mut w = vec![T::zero(); self.n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n {
                w[b] = self.rows[i][rhs].clone();
            }
        }
        w
    }
}

/// Rows `(features…, 1)` with right-hand side `(target…, 1)`, sign-flipped so
/// that the right-hand side is nonnegative. Returns the flips.
fn standard_form<T: Field>(cols: &[Vec<T>], target: &[T]) -> (Vec<Vec<T>>, Vec<T>, Vec<bool>) {
    let d = target.len();
    let mut a = Vec::with_capacity(d + 1);
    let mut b = Vec::with_capacity(d + 1);
    let mut flips = Vec::with_capacity(d + 1);
    for i in 0..=d {
        let (mut row, mut rhs): (Vec<T>, T) = if i < d {
            (
                cols.iter().map(|c| c[i].clone()).collect(),
                target[i].clone(),
            )
        } else {
            (vec![T::one(); cols.len()], T::one())
        };
        let flip = rhs < T::zero();
        if flip {
            row = row.iter().map(|v| T::zero().minus(v)).collect();
            rhs = T::zero().minus(&rhs);
        }
        a.push(row);
        b.push(rhs);
        flips.push(flip);
    }
    (a, b, flips)
}

fn max_iter(prob: &HullProblem) -> usize {
    50 * (prob.columns.len() + prob.dim() + 1) + 1000
}

/// Decides whether the target lies in the convex hull of the columns.
///
/// `Rational` mode is exact (`tol` unused). `Float` mode pivots in scaled
/// `f64`, re-solves the final basis at 60 digits, and verifies the verdict
/// exactly: feasible weights must reproduce the target within `tol`, a Farkas
/// certificate must separate by more than `tol`.
pub fn solve_feasibility(prob: &HullProblem, mode: Mode, tol: f64) -> Result<Feasibility> {
    match mode {
        Mode::Rational => solve_rational(prob),
        Mode::Float => solve_float(prob, tol),
    }
}

fn solve_rational(prob: &HullProblem) -> Result<Feasibility> {
    let (a, b, flips) = standard_form(&prob.columns, &prob.target);
    let mut t = Tableau::new(&a, &b);
    t.run(max_iter(prob))?;
    let value = t.value();
    if value.is_zero() {
        return Ok(Feasibility::Feasible {
            weights: t.primal(),
        });
    }
    let y = t.duals();
    let mut cert = farkas_from_duals(&y, &flips, &vec![Rational::one(); y.len()]);
    cert.set_delta(&prob.target);
    debug_assert!(cert.verify(prob, &Rational::zero()));
    Ok(Feasibility::Infeasible(cert))
}

/// `a = −σ·s·y` on feature rows, `b` from the normalization row.
fn farkas_from_duals(y: &[Rational], flips: &[bool], scale: &[Rational]) -> FarkasCertificate {
    let d = y.len() - 1;
    let orig: Vec<Rational> = y
        .iter()
        .zip(flips)
        .zip(scale)
        .map(|((v, &f), s)| if f { -(v * s) } else { v * s })
        .collect();
    let a: Vec<Rational> = orig[..d].iter().map(|v| -v).collect();
    let b = -&orig[d];
    FarkasCertificate {
        a,
        b,
        delta: Rational::zero(),
    }
}

impl FarkasCertificate {
    fn set_delta(&mut self, target: &[Rational]) {
        self.delta = -self.value_at(target);
    }
}

fn solve_float(prob: &HullProblem, tol: f64) -> Result<Feasibility> {
    let d = prob.dim();
    let cols: Vec<Vec<f64>> = prob
        .columns
        .iter()
        .map(|c| c.iter().map(|v| v.to_f64()).collect())
        .collect();
    let target: Vec<f64> = prob.target.iter().map(|v| v.to_f64()).collect();
    // scale feature rows to unit max-norm
    let scale: Vec<f64> = (0..d)
        .map(|i| {
            let m = cols
                .iter()
                .map(|c| c[i].abs())
                .fold(target[i].abs(), f64::max);
            if m > 0.0 {
                1.0 / m
            } else {
                1.0
            }
        })
        .chain(std::iter::once(1.0))
        .collect();
    let scols: Vec<Vec<f64>> = cols
        .iter()
        .map(|c| c.iter().zip(&scale).map(|(v, s)| v * s).collect())
        .collect();
    let starget: Vec<f64> = target.iter().zip(&scale).map(|(v, s)| v * s).collect();
    let (a, b, flips) = standard_form(&scols, &starget);
    let mut t = Tableau::new(&a, &b);
    t.run(max_iter(prob))?;
    let value = t.value();
    if value <= 1e-9 {
        t.drive_out_slacks();
        let weights = refine_weights(prob, &t)?;
        let resid = prob.residual(&weights);
        if resid.to_f64() <= tol {
            return Ok(Feasibility::Feasible { weights });
        }
        return Err(Error::Solver(format!(
            "float feasibility not confirmed: residual {:.3e}",
            resid.to_f64()
        )));
    }
    let y: Vec<Rational> = t
        .duals()
        .iter()
        .map(|v| Rational::from_f64(*v))
        .collect::<Result<_>>()?;
    let s: Vec<Rational> = scale
        .iter()
        .map(|v| Rational::from_f64(*v))
        .collect::<Result<_>>()?;
    let mut cert = farkas_from_duals(&y, &flips, &s);
    cert.set_delta(&prob.target);
    let tol_q = Rational::from_f64(tol)?;
    if cert.verify(prob, &tol_q) {
        return Ok(Feasibility::Infeasible(cert));
    }
    Err(Error::Solver(format!(
        "float infeasibility not confirmed (phase-I value {value:.3e})"
    )))
}

/// Re-solves the final basis in high precision, clips and renormalizes exactly.
fn refine_weights(prob: &HullProblem, t: &Tableau<f64>) -> Result<Vec<Rational>> {
    let d = prob.dim();
    let m = d + 1;
    let digits = DEFAULT_DIGITS;
    let big = |q: &Rational| BigReal::from_rational_unchecked(q, digits);
    // basis columns in the unflipped system; slack columns are unit vectors
    let mut mat = vec![vec![BigReal::zero(digits); m]; m];
    for (k, &j) in t.basis.iter().enumerate() {
        for i in 0..m {
            mat[i][k] = if j < t.n {
                if i < d {
                    big(&prob.columns[j][i])
                } else {
                    BigReal::from_rational_unchecked(&Rational::one(), digits)
                }
            } else if j - t.n == i {
                BigReal::from_rational_unchecked(&Rational::one(), digits)
            } else {
                BigReal::zero(digits)
            };
        }
    }
    let mut rhs: Vec<BigReal> = prob.target.iter().map(big).collect();
    rhs.push(BigReal::from_rational_unchecked(&Rational::one(), digits));
    let mut w = vec![Rational::zero(); t.n];
    match solve_real(&mat, &rhs) {
        Ok(sol) => {
            for (k, &j) in t.basis.iter().enumerate() {
                let v = sol[k].to_rational();
                if j < t.n && v.is_positive() {
                    w[j] = v;
                }
            }
        }
        // singular basis (degenerate slack rows): keep the float solution
        Err(_) => {
            for (j, v) in t.primal().iter().enumerate() {
                if *v > 0.0 {
                    w[j] = Rational::from_f64(*v)?;
                }
            }
        }
    }
    let total: Rational = w.iter().sum();
    if !total.is_positive() {
        return Err(Error::Solver("refined weights vanish".into()));
    }
    Ok(w.into_iter().map(|v| v / &total).collect())
}

/// A support point: an explicit pair or a conjugate pair given by `(e1, e2)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Atom {
    Point { x: Rational, y: Rational },
    Pair(SymmetricAtom),
}

impl Atom {
    pub fn point(x: Rational, y: Rational) -> Self {
        Atom::Point { x, y }
    }

    pub fn features(&self, basis: &MomentBasis) -> Result<Vec<Rational>> {
        match self {
            Atom::Point { x, y } => Ok(basis.featurize_rational(x, y)),
            Atom::Pair(a) => basis.featurize_symmetric(a),
        }
    }
}

/// Finitely supported probability measure.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicMeasure {
    pub atoms: Vec<Atom>,
    pub weights: Vec<Rational>,
}

impl AtomicMeasure {
    pub fn new(atoms: Vec<Atom>, weights: Vec<Rational>) -> Result<Self> {
        if atoms.len() != weights.len() {
            return input(format!(
                "{} atoms with {} weights",
                atoms.len(),
                weights.len()
            ));
        }
        if weights.iter().any(|w| w.is_negative()) {
            return input("negative weight");
        }
        if weights.iter().sum::<Rational>() != Rational::one() {
            return input("weights do not sum to 1");
        }
        Ok(AtomicMeasure { atoms, weights })
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Exact feature averages.
    pub fn moments(&self, basis: &MomentBasis) -> Result<Vec<Rational>> {
        let mut acc = vec![Rational::zero(); basis.len()];
        for (a, w) in self.atoms.iter().zip(&self.weights) {
            for (s, f) in acc.iter_mut().zip(a.features(basis)?) {
                *s += &(f * w);
            }
        }
        Ok(acc)
    }

    /// Drops zero-weight atoms.
    pub fn compact(mut self) -> Self {
        let keep: Vec<bool> = self.weights.iter().map(|w| !w.is_zero()).collect();
        let mut it = keep.iter();
        self.atoms.retain(|_| *it.next().unwrap());
        self.weights.retain(|w| !w.is_zero());
        self
    }
}

/// Rewrites the measure on at most `dim + 1` of its atoms with identical
/// feature averages, in exact arithmetic.
pub fn caratheodory_reduce(m: &AtomicMeasure, basis: &MomentBasis) -> Result<AtomicMeasure> {
    let mut cur = m.clone().compact();
    let cap = basis.len() + 1;
    let mut feats: Vec<Vec<Rational>> = cur
        .atoms
        .iter()
        .map(|a| a.features(basis))
        .collect::<Result<_>>()?;
    while cur.len() > cap {
        // a dependency among the first cap + 1 lifted atoms
        let k = cap + 1;
        let rows: Vec<Vec<Rational>> = (0..=basis.len())
            .map(|i| {
                (0..k)
                    .map(|j| {
                        if i < basis.len() {
                            feats[j][i].clone()
                        } else {
                            Rational::one()
                        }
                    })
                    .collect()
            })
            .collect();
        let mut v = null_vector(&rows).expect("more vectors than dimensions");
        if !v.iter().any(|x| x.is_positive()) {
            v = v.iter().map(|x| -x).collect();
        }
        let alpha = (0..k)
            .filter(|&j| v[j].is_positive())
            .map(|j| &cur.weights[j] / &v[j])
            .min()
            .expect("positive entry");
        for j in 0..k {
            let nw = &cur.weights[j] - &(&alpha * &v[j]);
            cur.weights[j] = if nw.is_negative() {
                Rational::zero()
            } else {
                nw
            };
        }
        let keep: Vec<bool> = cur.weights.iter().map(|w| !w.is_zero()).collect();
        let mut it = keep.iter();
        feats.retain(|_| *it.next().unwrap());
        cur = cur.compact();
    }
    Ok(cur)
}
