//! Optimal region bounds by column generation and bisection.
//!
//! For a fixed region the question is whether the case target lies in the
//! convex hull of the features over the region. Columns start from a region
//! grid; each Farkas certificate is turned into a polynomial whose minima over
//! the region become new columns, until either the hull contains the target or
//! the polynomial, shifted by its minimum, still separates.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use crate::certify::{verify_hyperplane, verify_measure, Verdict, VerifyOptions};
use crate::error::{input, Error, Result};
use crate::exact::Rational;
use crate::lp::{
    caratheodory_reduce, solve_feasibility, Atom, AtomicMeasure, Feasibility, HullProblem, Mode,
};
use crate::moments::{BasisId, LpBasis, MomentVector};
use crate::optimize::{global_min, local_minima, MinOptions};
use crate::poly::Poly2;
use crate::region::{Direction, Form, Region};

#[derive(Clone, Debug)]
pub struct FeasibilityOptions {
    pub tol_lp: f64,
    /// Defaults to `tol_lp / 100`.
    pub tol_sep: Option<f64>,
    pub max_rounds: usize,
    /// Seed grid per axis.
    pub grid_n: usize,
    /// Grid per axis for the separation search.
    pub search_grid: usize,
    /// Defaults to exact pivoting for case a and float for case b.
    pub mode: Option<Mode>,
}

impl Default for FeasibilityOptions {
    fn default() -> Self {
        FeasibilityOptions {
            tol_lp: 1e-9,
            tol_sep: None,
            max_rounds: 200,
            grid_n: 33,
            search_grid: 129,
            mode: None,
        }
    }
}

impl FeasibilityOptions {
    pub fn tol_sep(&self) -> f64 {
        self.tol_sep.unwrap_or(self.tol_lp / 100.0)
    }

    fn mode_for(&self, id: BasisId) -> Mode {
        self.mode.unwrap_or(match id {
            BasisId::A5 => Mode::Rational,
            BasisId::B32 => Mode::Float,
        })
    }
}

#[derive(Clone, Debug)]
pub enum FeasibilityResult {
    /// Carathéodory-reduced measure on the region matching the target.
    Feasible(AtomicMeasure),
    /// Nonnegative on the region (up to the separation tolerance) with
    /// negative expectation.
    Infeasible(Poly2),
    Indeterminate(String),
}

impl FeasibilityResult {
    pub fn label(&self) -> &'static str {
        match self {
            FeasibilityResult::Feasible(_) => "feasible",
            FeasibilityResult::Infeasible(_) => "infeasible",
            FeasibilityResult::Indeterminate(_) => "indeterminate",
        }
    }
}

/// Decides whether the case target is a moment vector of some measure on `r`.
pub fn feasible_at(
    id: BasisId,
    r: &Region,
    opts: &FeasibilityOptions,
) -> Result<FeasibilityResult> {
    feasible_with_pool(id, r, opts, &mut BTreeSet::new())
}

fn feasible_with_pool(
    id: BasisId,
    r: &Region,
    opts: &FeasibilityOptions,
    pool: &mut BTreeSet<(Rational, Rational)>,
) -> Result<FeasibilityResult> {
    if r.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let target = MomentVector::for_case(id);
    let lp = LpBasis::new(&target)?;
    let basis = &target.basis;
    let mode = opts.mode_for(id);
    let tol_sep = opts.tol_sep();
    let mut points: BTreeSet<(Rational, Rational)> = r.grid(opts.grid_n)?.into_iter().collect();
    points.extend(
        pool.iter()
            .filter(|(x, y)| r.contains_rational(x, y))
            .cloned(),
    );
    let mut cols: Vec<(Rational, Rational)> = points.into_iter().collect();
    let mut feats: Vec<Vec<Rational>> = cols.iter().map(|(x, y)| lp.featurize(x, y)).collect();
    let mut last = String::new();
    for round in 0..opts.max_rounds {
        let prob = HullProblem::new(feats.clone(), lp.target.clone())?;
        let cert = match solve_feasibility(&prob, mode, opts.tol_lp) {
            Ok(Feasibility::Feasible { weights }) => {
                let atoms = cols
                    .iter()
                    .map(|(x, y)| Atom::point(x.clone(), y.clone()))
                    .collect();
                let m = AtomicMeasure::new(atoms, weights)?;
                let reduced = caratheodory_reduce(&m, basis)?;
                for a in &reduced.atoms {
                    if let Atom::Point { x, y } = a {
                        pool.insert((x.clone(), y.clone()));
                    }
                }
                return Ok(FeasibilityResult::Feasible(reduced));
            }
            Ok(Feasibility::Infeasible(c)) => c,
            Err(Error::Solver(msg)) => {
                return Ok(FeasibilityResult::Indeterminate(format!(
                    "round {round}: {msg}"
                )));
            }
            Err(e) => return Err(e),
        };
        // q = a·f + b, scaled to unit max coefficient
        let mut q = Poly2::constant(cert.b.clone());
        for (a, f) in cert.a.iter().zip(&lp.features) {
            q = q.add(&f.scale(a));
        }
        let norm = cert
            .a
            .iter()
            .chain([&cert.b])
            .map(|v| v.abs())
            .max()
            .unwrap_or_else(Rational::zero);
        if norm.is_zero() {
            return Ok(FeasibilityResult::Indeterminate("zero separator".into()));
        }
        let q = q.scale(&norm.recip());
        let mean = target.expectation(&q)?.to_f64();
        let minima = local_minima(&q, r, opts.search_grid)?;
        let vmin = minima.first().map_or(0.0, |m| m.2);
        if mean - vmin < -10.0 * tol_sep {
            // shift by the polished minimum and re-check the margin
            let mopts = MinOptions {
                grid_n: opts.search_grid,
                digits: 40,
                ..MinOptions::default()
            };
            let gm = global_min(&q, r, &mopts)?;
            let sep = q.sub(&Poly2::constant(gm.value.to_rational()));
            let delta = -target.expectation(&sep)?.to_f64();
            if delta > 10.0 * tol_sep {
                return Ok(FeasibilityResult::Infeasible(sep));
            }
        }
        let mut added = 0;
        for &(x, y, v) in minima.iter().filter(|m| m.2 < -tol_sep) {
            if added == 16 {
                break;
            }
            let Some(p) = r.project_rational(&Rational::from_f64(x)?, &Rational::from_f64(y)?)
            else {
                continue;
            };
            if pool.contains(&p) || cols.contains(&p) {
                continue;
            }
            pool.insert(p.clone());
            feats.push(lp.featurize(&p.0, &p.1));
            cols.push(p);
            added += 1;
            last = format!("round {round}: min {v:.3e}, expectation {mean:.3e}");
        }
        if added == 0 {
            return Ok(FeasibilityResult::Indeterminate(format!(
                "round {round}: separation found no new columns (min {vmin:.3e}, expectation {mean:.3e})"
            )));
        }
    }
    Ok(FeasibilityResult::Indeterminate(format!(
        "{} rounds exhausted; {last}",
        opts.max_rounds
    )))
}

/// One evaluated bound along the bisection.
#[derive(Clone, Debug)]
pub struct TraceStep {
    pub bound: Rational,
    pub feasible: bool,
}

#[derive(Clone, Debug)]
pub struct ThresholdOptions {
    pub feasibility: FeasibilityOptions,
    /// `(weak, strong)` starting bounds; defaults to `∓(4 − 1/1000)`.
    pub bracket: Option<(Rational, Rational)>,
    /// Options for re-verifying the final separator.
    pub verify: VerifyOptions,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        ThresholdOptions {
            feasibility: FeasibilityOptions::default(),
            bracket: None,
            verify: VerifyOptions {
                budget: 50_000,
                ..VerifyOptions::default()
            },
        }
    }
}

#[derive(Clone, Debug)]
pub struct ThresholdResult {
    pub case: BasisId,
    pub form: Form,
    pub dir: Direction,
    /// Bound at which the target is realized.
    pub feasible_bound: Rational,
    /// Bound at which a separator exists.
    pub infeasible_bound: Rational,
    pub witness: AtomicMeasure,
    pub separator: Poly2,
    pub witness_verdict: Verdict,
    pub separator_verdict: Verdict,
    pub iterations: usize,
    pub runtime: Duration,
    pub trace: Vec<TraceStep>,
}

impl ThresholdResult {
    pub fn width(&self) -> Rational {
        (&self.infeasible_bound - &self.feasible_bound).abs()
    }

    pub fn midpoint(&self) -> f64 {
        ((&self.infeasible_bound + &self.feasible_bound) / Rational::from(2)).to_f64()
    }

    pub fn feasible_region(&self) -> Region {
        Region::with_constraint(self.form, self.dir, self.feasible_bound.clone())
    }

    pub fn infeasible_region(&self) -> Region {
        Region::with_constraint(self.form, self.dir, self.infeasible_bound.clone())
    }

    /// Every feasible bound lies on the weak side of every infeasible one.
    pub fn trace_is_monotone(&self) -> bool {
        let weaker = |a: &Rational, b: &Rational| match self.dir {
            Direction::Geq => a < b,
            Direction::Leq => a > b,
        };
        self.trace.iter().filter(|s| s.feasible).all(|f| {
            self.trace
                .iter()
                .filter(|s| !s.feasible)
                .all(|i| weaker(&f.bound, &i.bound))
        })
    }
}

fn default_bracket(dir: Direction) -> (Rational, Rational) {
    let edge = Rational::from(4) - Rational::new(1, 1000);
    match dir {
        Direction::Geq => (-&edge, edge),
        Direction::Leq => (edge.clone(), -&edge),
    }
}

/// Bisects the region bound until the feasible and infeasible endpoints are
/// within `tol`, then re-verifies both endpoint certificates.
pub fn threshold(
    id: BasisId,
    form: Form,
    dir: Direction,
    tol: f64,
    opts: &ThresholdOptions,
) -> Result<ThresholdResult> {
    if !(tol > 0.0) {
        return input("tolerance must be positive");
    }
    let start = Instant::now();
    let fopts = &opts.feasibility;
    let (weak, strong) = opts.bracket.clone().unwrap_or_else(|| default_bracket(dir));
    let region = |b: &Rational| Region::with_constraint(form, dir, b.clone());
    let mut pool = BTreeSet::new();
    let mut trace = Vec::new();

    let mut witness = match feasible_with_pool(id, &region(&weak), fopts, &mut pool)? {
        FeasibilityResult::Feasible(m) => m,
        other => {
            return input(format!(
                "weak bound {weak} is {}, not feasible",
                other.label()
            ))
        }
    };
    trace.push(TraceStep {
        bound: weak.clone(),
        feasible: true,
    });
    let mut separator = match feasible_with_pool(id, &region(&strong), fopts, &mut pool)? {
        FeasibilityResult::Infeasible(p) => p,
        other => {
            return input(format!(
                "strong bound {strong} is {}, not infeasible",
                other.label()
            ))
        }
    };
    trace.push(TraceStep {
        bound: strong.clone(),
        feasible: false,
    });

    let (mut lo, mut hi) = (weak, strong);
    let tol_q = Rational::from_f64(tol)?;
    let mut iterations = 0;
    while (&hi - &lo).abs() > tol_q {
        iterations += 1;
        let mid = (&lo + &hi) / Rational::from(2);
        match feasible_with_pool(id, &region(&mid), fopts, &mut pool)? {
            FeasibilityResult::Feasible(m) => {
                witness = m;
                trace.push(TraceStep {
                    bound: mid.clone(),
                    feasible: true,
                });
                lo = mid;
            }
            FeasibilityResult::Infeasible(p) => {
                separator = p;
                trace.push(TraceStep {
                    bound: mid.clone(),
                    feasible: false,
                });
                hi = mid;
            }
            FeasibilityResult::Indeterminate(msg) => {
                return Err(Error::Solver(format!(
                    "indeterminate at bound {mid}: {msg}"
                )));
            }
        }
    }

    let target = MomentVector::for_case(id);
    let witness_verdict = verify_measure(
        &witness.atoms,
        Some(&witness.weights),
        &region(&lo),
        &target,
        fopts.tol_lp,
    )?
    .verdict;
    let separator_verdict =
        verify_hyperplane(&separator, &region(&hi), &target, &opts.verify)?.verdict;
    Ok(ThresholdResult {
        case: id,
        form,
        dir,
        feasible_bound: lo,
        infeasible_bound: hi,
        witness,
        separator,
        witness_verdict,
        separator_verdict,
        iterations,
        runtime: start.elapsed(),
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generic_sum_examples() {
        let opts = FeasibilityOptions::default();
        let r = Region::sum_geq(Rational::from(-1));
        match feasible_at(BasisId::A5, &r, &opts).unwrap() {
            FeasibilityResult::Feasible(m) => {
                let rep = verify_measure(
                    &m.atoms,
                    Some(&m.weights),
                    &r,
                    &MomentVector::for_case(BasisId::A5),
                    0.0,
                )
                .unwrap();
                assert_eq!(rep.verdict, Verdict::Valid);
                assert!(m.len() <= 6);
            }
            other => panic!("{other:?}"),
        }
        let r = Region::sum_geq(Rational::new(-1, 2));
        assert!(matches!(
            feasible_at(BasisId::A5, &r, &opts).unwrap(),
            FeasibilityResult::Infeasible(_)
        ));
    }

    #[test]
    fn split_lp_basis_is_orthonormal() {
        let lp = LpBasis::new(&MomentVector::for_case(BasisId::B32)).unwrap();
        let b = MomentVector::for_case(BasisId::B32);
        for (f, t) in lp.features.iter().zip(&lp.target) {
            let centred = f.sub(&Poly2::constant(t.clone()));
            assert!(!t.is_zero());
            let second: Rational = centred
                .mul(&centred)
                .terms()
                .map(|(m, c)| c * &crate::moments::haar_moment_b(m.dx, m.dy))
                .sum();
            assert_eq!(second, Rational::one());
        }
        assert!(b.expectation(&lp.features[0]).is_ok());
    }

    #[test]
    fn bad_bracket() {
        let opts = ThresholdOptions {
            bracket: Some((Rational::from(0), Rational::from(1))),
            ..ThresholdOptions::default()
        };
        assert!(matches!(
            threshold(BasisId::A5, Form::Sum, Direction::Geq, 1e-3, &opts),
            Err(Error::Input(_))
        ));
    }
}
