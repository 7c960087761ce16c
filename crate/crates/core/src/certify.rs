//! Verification of separating-polynomial and atomic-measure certificates, and
//! of the algebraic identities behind the generic-case bounds.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{input, Result};
use crate::exact::{BigReal, Rational};
use crate::lp::{solve_feasibility, Atom, FarkasCertificate, Feasibility, HullProblem, Mode};
use crate::moments::{LpBasis, MomentVector};
use crate::optimize::{global_min, lower_bound, LowerBound, MinOptions, MinResult};
use crate::poly::{Monomial, Poly2};
use crate::region::{symmetric_atom_in_region, symmetric_atom_slack, Region};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Valid,
    /// Positive margin at the polished minimum, with the certified bound only
    /// excluding other basins at a coarse gap.
    ValidCoarse,
    Invalid,
    Indeterminate,
}

impl Verdict {
    pub fn is_valid(self) -> bool {
        matches!(self, Verdict::Valid | Verdict::ValidCoarse)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Valid => "valid",
            Verdict::ValidCoarse => "valid-coarse",
            Verdict::Invalid => "invalid",
            Verdict::Indeterminate => "indeterminate",
        }
    }

    pub fn parse(s: &str) -> Option<Verdict> {
        Some(match s {
            "valid" => Verdict::Valid,
            "valid-coarse" => Verdict::ValidCoarse,
            "invalid" => Verdict::Invalid,
            "indeterminate" => Verdict::Indeterminate,
            _ => return None,
        })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub min: MinOptions,
    /// Target gap for the certified lower bound.
    pub gap: f64,
    /// Cell budget for the certified lower bound.
    pub budget: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            min: MinOptions::default(),
            gap: 0.01,
            budget: 400_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct HyperplaneReport {
    pub expectation: Rational,
    pub min: MinResult,
    pub certified: LowerBound,
    /// `min − expectation` at working precision.
    pub margin: BigReal,
    pub verdict: Verdict,
    pub conclusion: String,
}

/// Compares the exact expectation of `p` against its minimum over `r`.
pub fn verify_hyperplane(
    p: &Poly2,
    r: &Region,
    m: &MomentVector,
    opts: &VerifyOptions,
) -> Result<HyperplaneReport> {
    let expectation = m.expectation(p)?;
    let min = global_min(p, r, &opts.min)?;
    let mut certified = lower_bound(p, r, opts.gap, opts.budget)?;
    let digits = opts.min.digits;
    let e_big = expectation.to_bigreal(digits)?;
    let margin = &min.value - &e_big;
    let bound = Rational::from_f64(certified.bound)?;
    // measured from the polished minimum; the f64 search value is not an
    // upper bound on the minimum at the ~1e-14 scale
    let slack = &min.value.to_rational() - &bound;
    certified.achieved_gap = slack.to_f64();
    let verdict = if bound > expectation {
        Verdict::Valid
    } else if margin.is_negative() || margin.is_zero() {
        Verdict::Invalid
    } else if certified.converged && bound > &expectation - &slack {
        Verdict::ValidCoarse
    } else {
        Verdict::Indeterminate
    };
    let conclusion = if verdict.is_valid() {
        format!(
            "positive proportion of primes violate {}",
            r.violation_statement()
        )
    } else {
        "no conclusion".into()
    };
    Ok(HyperplaneReport {
        expectation,
        min,
        certified,
        margin,
        verdict,
        conclusion,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightsSource {
    Given,
    Solved,
}

#[derive(Clone, Debug, Serialize)]
pub struct AtomCheck {
    pub inside: bool,
    /// Constraint slack (box slack when the region has no constraint).
    pub slack: Rational,
}

#[derive(Clone, Debug)]
pub struct MeasureReport {
    pub atoms: Vec<AtomCheck>,
    pub weights: Vec<Rational>,
    pub weights_source: WeightsSource,
    /// `Σ w·feature − target`, per feature.
    pub residuals: Vec<Rational>,
    pub max_residual: Rational,
    pub farkas: Option<FarkasCertificate>,
    pub verdict: Verdict,
}

fn atom_check(a: &Atom, r: &Region) -> Result<AtomCheck> {
    match a {
        Atom::Point { x, y } => {
            let inside = r.contains_rational(x, y);
            let slack = match &r.constraint {
                Some(c) => c.slack_rational(x, y),
                None => [
                    x - &r.x_range.0,
                    &r.x_range.1 - x,
                    y - &r.y_range.0,
                    &r.y_range.1 - y,
                ]
                .into_iter()
                .min()
                .unwrap(),
            };
            Ok(AtomCheck { inside, slack })
        }
        Atom::Pair(s) => Ok(AtomCheck {
            inside: symmetric_atom_in_region(s, r)?,
            slack: symmetric_atom_slack(s, r),
        }),
    }
}

/// Checks that the atoms lie in `r` and that the weighted feature averages
/// reproduce `m` within `tol` (exactly when `tol` is 0). Without weights, they
/// are solved for by linear programming over the given atoms.
pub fn verify_measure(
    atoms: &[Atom],
    weights: Option<&[Rational]>,
    r: &Region,
    m: &MomentVector,
    tol: f64,
) -> Result<MeasureReport> {
    if atoms.is_empty() {
        return input("no atoms");
    }
    let checks: Vec<AtomCheck> = atoms
        .iter()
        .map(|a| atom_check(a, r))
        .collect::<Result<_>>()?;
    let feats: Vec<Vec<Rational>> = atoms
        .iter()
        .map(|a| a.features(&m.basis))
        .collect::<Result<_>>()?;
    let (weights, source, farkas) = match weights {
        Some(w) => {
            if w.len() != atoms.len() {
                return input(format!("{} weights for {} atoms", w.len(), atoms.len()));
            }
            (w.to_vec(), WeightsSource::Given, None)
        }
        None => {
            // point atoms are solved in the better-conditioned basis; the
            // residuals below are still taken in the case basis
            let prob = match atoms
                .iter()
                .map(|a| match a {
                    Atom::Point { x, y } => Some((x, y)),
                    Atom::Pair(_) => None,
                })
                .collect::<Option<Vec<_>>>()
            {
                Some(pts) => {
                    let lp = LpBasis::new(m)?;
                    HullProblem::new(
                        pts.iter().map(|(x, y)| lp.featurize(x, y)).collect(),
                        lp.target,
                    )?
                }
                None => HullProblem::new(feats.clone(), m.values.clone())?,
            };
            let mode = if m.dim() <= 8 {
                Mode::Rational
            } else {
                Mode::Float
            };
            match solve_feasibility(&prob, mode, tol.max(1e-12))? {
                Feasibility::Feasible { weights } => (weights, WeightsSource::Solved, None),
                Feasibility::Infeasible(c) => (
                    vec![Rational::zero(); atoms.len()],
                    WeightsSource::Solved,
                    Some(c),
                ),
            }
        }
    };
    let residuals: Vec<Rational> = (0..m.dim())
        .map(|i| {
            feats
                .iter()
                .zip(&weights)
                .map(|(f, w)| &f[i] * w)
                .sum::<Rational>()
                - &m.values[i]
        })
        .collect();
    let max_residual = residuals
        .iter()
        .map(|v| v.abs())
        .max()
        .unwrap_or_else(Rational::zero);
    let probability = weights.iter().all(|w| !w.is_negative())
        && weights.iter().sum::<Rational>() == Rational::one();
    let tol_q = Rational::from_f64(tol)?;
    let verdict = if farkas.is_none()
        && probability
        && checks.iter().all(|c| c.inside)
        && max_residual <= tol_q
    {
        Verdict::Valid
    } else {
        Verdict::Invalid
    };
    Ok(MeasureReport {
        atoms: checks,
        weights,
        weights_source: source,
        residuals,
        max_residual,
        farkas,
        verdict,
    })
}

/// One algebraic identity: product of factors against an expansion.
#[derive(Clone, Debug)]
pub struct Identity {
    pub name: String,
    pub lhs: Vec<Poly2>,
    pub rhs: Poly2,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub passed: bool,
    /// First differing monomial with both coefficients, when the check fails.
    pub mismatch: Option<String>,
}

impl Identity {
    pub fn check(&self) -> IdentityCheck {
        let diff = Poly2::product(&self.lhs).sub(&self.rhs);
        let mismatch = diff.terms().next().map(|(m, _)| {
            let lhs = Poly2::product(&self.lhs).coeff(*m);
            format!(
                "{}: expanded {} vs stated {}",
                show_monomial(*m),
                lhs,
                self.rhs.coeff(*m)
            )
        });
        IdentityCheck {
            name: self.name.clone(),
            passed: mismatch.is_none(),
            mismatch,
        }
    }
}

fn show_monomial(m: Monomial) -> String {
    if m.is_constant() {
        "constant term".into()
    } else {
        format!("coefficient of {m}")
    }
}

fn c(v: i64) -> Poly2 {
    Poly2::constant(Rational::from(v))
}

/// The factored identities (at `eps` ∈ {0, 1}) and the trace reductions, with
/// `s = x`, `t = y`. Both sides are affine in `eps`, so two values suffice.
pub fn identity_suite() -> Vec<Identity> {
    let s = Poly2::x();
    let t = Poly2::y();
    let st = s.mul(&t);
    let sum = s.add(&t);
    let sq = s.pow(2).add(&t.pow(2));
    let mut out = Vec::new();
    for eps in [0i64, 1] {
        let e = c(eps);
        out.push(Identity {
            name: format!("(2-s)(2-t)(3s+3t+2-eps), eps={eps}"),
            lhs: vec![
                c(2).sub(&s),
                c(2).sub(&t),
                sum.scale(&Rational::from(3)).add(&c(2)).sub(&e),
            ],
            rhs: c(8 - 4 * eps)
                .add(&sum.scale(&Rational::from(8 + 2 * eps)))
                .sub(&sq.scale(&Rational::from(6)))
                .sub(&st.scale(&Rational::from(10 + eps)))
                .add(&st.mul(&sum).scale(&Rational::from(3))),
        });
        out.push(Identity {
            name: format!("(3st+2+eps)(st+4), eps={eps}"),
            lhs: vec![st.scale(&Rational::from(3)).add(&c(2 + eps)), st.add(&c(4))],
            rhs: st
                .pow(2)
                .scale(&Rational::from(3))
                .add(&st.scale(&Rational::from(14 + eps)))
                .add(&c(8 + 4 * eps)),
        });
        out.push(Identity {
            name: format!("(5st+6-eps)(4-st), eps={eps}"),
            lhs: vec![st.scale(&Rational::from(5)).add(&c(6 - eps)), c(4).sub(&st)],
            rhs: st
                .pow(2)
                .scale(&Rational::from(-5))
                .add(&st.scale(&Rational::from(14 + eps)))
                .add(&c(24 - 4 * eps)),
        });
    }
    let tr_w = st.add(&c(1));
    out.push(Identity {
        name: "(s+t)^2 - 1 - 2(st+1) = s^2+t^2-3".into(),
        lhs: vec![sum.pow(2).sub(&c(1)).sub(&tr_w.scale(&Rational::from(2)))],
        rhs: sq.sub(&c(3)),
    });
    out.push(Identity {
        name: "(s+t)(st+1) - (s+t) = s^2t+st^2".into(),
        lhs: vec![sum.mul(&tr_w).sub(&sum)],
        rhs: st.mul(&sum),
    });
    out.push(Identity {
        name: "(st+1)^2 - 1 - 2(st+1) = s^2t^2-2".into(),
        lhs: vec![tr_w.pow(2).sub(&c(1)).sub(&tr_w.scale(&Rational::from(2)))],
        rhs: st.pow(2).sub(&c(2)),
    });
    out
}

pub fn verify_identity_suite() -> Vec<IdentityCheck> {
    identity_suite().iter().map(Identity::check).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data;
    use crate::moments::{target_a, target_b};
    use crate::region::SymmetricAtom;

    #[test]
    fn identities_pass() {
        let report = verify_identity_suite();
        assert_eq!(report.len(), 9);
        for c in &report {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn mutated_identity_fails_with_location() {
        let mut ids = identity_suite();
        let first = &mut ids[0];
        // constant 8 → 9
        first.rhs = first.rhs.add(&c(1));
        let r = first.check();
        assert!(!r.passed);
        assert!(r.mismatch.unwrap().starts_with("constant term: expanded 8"));
    }

    #[test]
    fn printed_constant_of_third_expansion_is_a_typo() {
        // As printed, the constant of (5st+6-eps)(4-st) is 24 - eps; the
        // expansion gives 24 - 4 eps, which the next line of the argument uses.
        let st = Poly2::x().mul(&Poly2::y());
        let printed = Identity {
            name: "printed".into(),
            lhs: vec![st.scale(&Rational::from(5)).add(&c(5)), c(4).sub(&st)],
            rhs: st
                .pow(2)
                .scale(&Rational::from(-5))
                .add(&st.scale(&Rational::from(15)))
                .add(&c(23)),
        };
        assert!(!printed.check().passed);
    }

    fn pairs(v: &[((i64, i64), (i64, i64))]) -> Vec<Atom> {
        v.iter()
            .map(|&((a, b), (c, d))| {
                Atom::Pair(SymmetricAtom::new(Rational::new(a, b), Rational::new(c, d)).unwrap())
            })
            .collect()
    }

    #[test]
    fn generic_witnesses_exact() {
        for name in data::WITNESS_NAMES {
            let w = data::symmetric_witness(name).unwrap();
            let atoms: Vec<Atom> = w.atoms.iter().cloned().map(Atom::Pair).collect();
            let rep =
                verify_measure(&atoms, Some(&w.weights), &w.region, &target_a(), 0.0).unwrap();
            assert_eq!(rep.verdict, Verdict::Valid, "{name}");
            assert!(rep.max_residual.is_zero());
            // solved weights reproduce the target as well
            let solved = verify_measure(&atoms, None, &w.region, &target_a(), 0.0).unwrap();
            assert_eq!(solved.verdict, Verdict::Valid, "{name}");
        }
    }

    #[test]
    fn perturbed_weights_fail() {
        let atoms = pairs(&[((2, 1), (0, 1)), ((1, 2), (-3, 1)), ((-2, 3), (-2, 3))]);
        let region = Region::sum_geq(Rational::new(-2, 3));
        let base = [
            Rational::new(1, 6),
            Rational::new(4, 21),
            Rational::new(9, 14),
        ];
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    continue;
                }
                let mut w = base.to_vec();
                w[i] += &Rational::new(1, 1000);
                w[j] -= &Rational::new(1, 1000);
                let rep = verify_measure(&atoms, Some(&w), &region, &target_a(), 0.0).unwrap();
                assert_eq!(rep.verdict, Verdict::Invalid);
            }
        }
    }

    #[test]
    fn atom_outside_region_fails() {
        let atoms = pairs(&[((2, 1), (0, 1)), ((1, 2), (-3, 1)), ((-2, 3), (-2, 3))]);
        let w = [
            Rational::new(1, 6),
            Rational::new(4, 21),
            Rational::new(9, 14),
        ];
        let rep = verify_measure(
            &atoms,
            Some(&w),
            &Region::sum_geq(Rational::new(-1, 2)),
            &target_a(),
            0.0,
        )
        .unwrap();
        assert_eq!(rep.verdict, Verdict::Invalid);
        assert!(!rep.atoms[2].inside);
        assert!(rep.atoms[2].slack.is_negative());
    }

    #[test]
    fn q_certificate() {
        let opts = VerifyOptions {
            gap: 0.02,
            min: MinOptions {
                grid_n: 129,
                ..MinOptions::default()
            },
            ..VerifyOptions::default()
        };
        let r = Region::sum_geq(Rational::parse("-2.47").unwrap());
        let rep = verify_hyperplane(&data::q(), &r, &target_b(), &opts).unwrap();
        assert_eq!(rep.verdict, Verdict::Valid);
        assert!((rep.margin.to_f64() - 0.10344).abs() < 1e-3);
        assert!(
            rep.conclusion.contains("x + y >= -2.47"),
            "{}",
            rep.conclusion
        );
        let wide = Region::sum_geq(Rational::from(-3));
        let rep = verify_hyperplane(&data::q(), &wide, &target_b(), &opts).unwrap();
        assert_eq!(rep.verdict, Verdict::Invalid);
    }
}
