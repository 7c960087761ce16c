//! Brute-force cross-checks, independent of the solvers they validate.
//!
//! Hull membership by enumerating small column subsets, Monte-Carlo moments
//! from a disk-projection semicircle sampler, and dense-grid minimization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{input, Result};
use crate::exact::Rational;
use crate::linalg::solve_rational;
use crate::poly::{Monomial, Poly2};
use crate::region::{Form, Region};

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub quantity: String,
    pub oracle: f64,
    pub main: f64,
    pub discrepancy: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl OracleReport {
    pub fn new(quantity: impl Into<String>, oracle: f64, main: f64, tolerance: f64) -> Self {
        let discrepancy = (oracle - main).abs();
        OracleReport {
            quantity: quantity.into(),
            oracle,
            main,
            discrepancy,
            tolerance,
            pass: discrepancy <= tolerance,
        }
    }
}

/// Whether `target` is a convex combination of `columns`, by trying every
/// subset of at most `d + 1` columns.
pub fn hull_membership_bruteforce(columns: &[Vec<Rational>], target: &[Rational]) -> Result<bool> {
    let d = target.len();
    if columns.len() > 8 || d > 3 {
        return input("brute force needs at most 8 columns in dimension at most 3");
    }
    if columns.iter().any(|c| c.len() != d) {
        return input("column dimension mismatch");
    }
    let n = columns.len();
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
        if idx.len() > d + 1 {
            continue;
        }
        let a: Vec<Vec<Rational>> = (0..=d)
            .map(|i| {
                idx.iter()
                    .map(|&j| {
                        if i < d {
                            columns[j][i].clone()
                        } else {
                            Rational::one()
                        }
                    })
                    .collect()
            })
            .collect();
        let mut b = target.to_vec();
        b.push(Rational::one());
        if let Ok(w) = solve_rational(&a, &b) {
            if w.iter().all(|v| !v.is_negative()) {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// A pair of independent semicircle samples on `[-2, 2]`: the first
/// coordinate of a uniform point in a disk of radius 2.
fn semicircle(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    2.0 * u.sqrt() * (std::f64::consts::TAU * v).cos()
}

/// Monte-Carlo averages of the given monomials under independent
/// semicircle coordinates.
pub fn mc_moments(monomials: &[Monomial], n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = vec![0.0; monomials.len()];
    for _ in 0..n {
        let x = semicircle(&mut rng);
        let y = semicircle(&mut rng);
        for (a, m) in acc.iter_mut().zip(monomials) {
            *a += x.powi(m.dx as i32) * y.powi(m.dy as i32);
        }
    }
    acc.into_iter().map(|a| a / n as f64).collect()
}

/// Plain minimum over an `n × n` grid of the region plus `4n` samples along
/// each boundary piece. No local refinement.
pub fn dense_min(p: &Poly2, r: &Region, n: usize) -> f64 {
    let (x0, x1) = (r.x_range.0.to_f64(), r.x_range.1.to_f64());
    let (y0, y1) = (r.y_range.0.to_f64(), r.y_range.1.to_f64());
    let at = |lo: f64, hi: f64, i: usize, n: usize| lo + (hi - lo) * i as f64 / (n - 1) as f64;
    let inside = |x: f64, y: f64| {
        x >= x0 - 1e-12
            && x <= x1 + 1e-12
            && y >= y0 - 1e-12
            && y <= y1 + 1e-12
            && r.constraint.as_ref().is_none_or(|c| {
                let v = match c.form {
                    Form::Sum => x + y,
                    Form::Product => x * y,
                };
                let b = c.bound.to_f64();
                match c.dir {
                    crate::region::Direction::Geq => v >= b - 1e-12,
                    crate::region::Direction::Leq => v <= b + 1e-12,
                }
            })
    };
    let grid = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = at(x0, x1, i, n);
            (0..n)
                .map(|j| at(y0, y1, j, n))
                .filter(|&y| inside(x, y))
                .map(|y| p.eval_f64(x, y))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min);
    let m = 4 * n;
    let mut edge = f64::INFINITY;
    for i in 0..m {
        let x = at(x0, x1, i, m);
        let y = at(y0, y1, i, m);
        for (a, b) in [(x, y0), (x, y1), (x0, y), (x1, y)] {
            if inside(a, b) {
                edge = edge.min(p.eval_f64(a, b));
            }
        }
        if let Some(c) = &r.constraint {
            let u = c.bound.to_f64();
            let on = match c.form {
                Form::Sum => Some((x, u - x)),
                Form::Product if x != 0.0 => Some((x, u / x)),
                Form::Product => None,
            };
            if let Some((a, b)) = on {
                if inside(a, b) {
                    edge = edge.min(p.eval_f64(a, b));
                }
            }
        }
    }
    grid.min(edge)
}

/// Runs every oracle against the main code paths; `seed` drives the sampler.
pub fn self_check(seed: u64) -> Result<Vec<OracleReport>> {
    use crate::data;
    use crate::lp::{solve_feasibility, Feasibility, HullProblem, Mode};
    use crate::moments::haar_moment_b;
    use crate::optimize::{global_min, MinOptions};

    let mut out = Vec::new();
    let opts = MinOptions::default();
    let cases = [
        (
            "min Q over x+y >= -2.47",
            data::q(),
            Region::sum_geq(Rational::parse("-2.47")?),
        ),
        (
            "min R over xy >= -1.57",
            data::r(),
            Region::product_geq(Rational::parse("-1.57")?),
        ),
        (
            "min x^2+y^2 over the box",
            Poly2::x().pow(2).add(&Poly2::y().pow(2)),
            Region::full_box(),
        ),
    ];
    for (name, p, r) in cases {
        let main = global_min(&p, &r, &opts)?.value.to_f64();
        out.push(OracleReport::new(name, dense_min(&p, &r, 2049), main, 1e-3));
    }

    let n = 1_000_000;
    let mons = [
        Monomial::new(2, 0),
        Monomial::new(3, 3),
        Monomial::new(4, 4),
    ];
    let est = mc_moments(&mons, n, seed);
    for (m, e) in mons.iter().zip(est) {
        let mean = haar_moment_b(m.dx, m.dy).to_f64();
        let var = haar_moment_b(2 * m.dx, 2 * m.dy).to_f64() - mean * mean;
        let tol = 4.0 * var.sqrt() / (n as f64).sqrt();
        out.push(OracleReport::new(
            format!("semicircle moment {m}"),
            e,
            mean,
            tol,
        ));
    }

    let pts = |v: &[(i64, i64)]| -> Vec<Vec<Rational>> {
        v.iter()
            .map(|&(a, b)| vec![Rational::from(a), Rational::from(b)])
            .collect()
    };
    let hulls = [
        ("hull {(2,2),(-2,-2)} contains 0", pts(&[(2, 2), (-2, -2)])),
        ("hull {(2,2),(1,1)} contains 0", pts(&[(2, 2), (1, 1)])),
        (
            "hull {(1,0),(0,1),(-1,-1)} contains 0",
            pts(&[(1, 0), (0, 1), (-1, -1)]),
        ),
    ];
    let zero = vec![Rational::zero(); 2];
    for (name, cols) in hulls {
        let brute = hull_membership_bruteforce(&cols, &zero)?;
        let prob = HullProblem::new(cols, zero.clone())?;
        let lp = matches!(
            solve_feasibility(&prob, Mode::Rational, 0.0)?,
            Feasibility::Feasible { .. }
        );
        out.push(OracleReport::new(
            name,
            brute as u8 as f64,
            lp as u8 as f64,
            0.0,
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(i64, i64)]) -> Vec<Vec<Rational>> {
        v.iter()
            .map(|&(a, b)| vec![Rational::from(a), Rational::from(b)])
            .collect()
    }

    #[test]
    fn brute_hull() {
        let z = vec![Rational::zero(); 2];
        assert!(hull_membership_bruteforce(&pts(&[(2, 2), (-2, -2)]), &z).unwrap());
        assert!(!hull_membership_bruteforce(&pts(&[(2, 2), (1, 1)]), &z).unwrap());
        assert!(hull_membership_bruteforce(&pts(&[(0, 0); 9]), &z).is_err());
    }

    #[test]
    fn dense_box() {
        let p = Poly2::x().pow(2).add(&Poly2::y().pow(2));
        assert!(dense_min(&p, &Region::full_box(), 2049) <= 1e-5);
    }

    #[test]
    fn sampler_second_moment() {
        let m = mc_moments(&[Monomial::new(2, 0), Monomial::new(0, 2)], 100_000, 1);
        assert!((m[0] - 1.0).abs() < 0.03 && (m[1] - 1.0).abs() < 0.03);
    }
}
