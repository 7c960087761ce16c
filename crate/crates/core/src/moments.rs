//! Moment systems: the feature bases, their target values and exact expectations.

use std::fmt;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::exact::{Rational, Real};
use crate::linalg::solve_rational;
use crate::poly::{Monomial, Poly2};
use crate::region::SymmetricAtom;

/// Which moment system: the generic case (`A5`, symmetric features in the two
/// factor traces) or the split case (`B32`, 32 monomials).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisId {
    A5,
    B32,
}

impl BasisId {
    pub fn parse_case(s: &str) -> Result<BasisId> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(BasisId::A5),
            "b" => Ok(BasisId::B32),
            _ => input(format!("unknown case {s:?} (expected a or b)")),
        }
    }

    pub fn case_letter(self) -> char {
        match self {
            BasisId::A5 => 'a',
            BasisId::B32 => 'b',
        }
    }
}

/// Ordered feature polynomials.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentBasis {
    pub id: BasisId,
    pub features: Vec<Poly2>,
}

impl MomentBasis {
    pub fn new(id: BasisId) -> Self {
        let features = match id {
            BasisId::B32 => known_monomials_b()
                .into_iter()
                .map(|m| Poly2::monomial(m.dx, m.dy))
                .collect(),
            BasisId::A5 => {
                let (x, y) = (Poly2::x(), Poly2::y());
                let xy = x.mul(&y);
                vec![
                    x.add(&y),
                    xy.clone(),
                    x.pow(2).add(&y.pow(2)),
                    xy.mul(&x.add(&y)),
                    xy.pow(2),
                ]
            }
        };
        MomentBasis { id, features }
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// Feature labels for reports: monomials for `B32`, symmetric functions for `A5`.
    pub fn labels(&self) -> Vec<String> {
        match self.id {
            BasisId::B32 => known_monomials_b().iter().map(|m| m.to_string()).collect(),
            BasisId::A5 => ["s+t", "st", "s²+t²", "s²t+st²", "s²t²"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }

    pub fn featurize_rational(&self, x: &Rational, y: &Rational) -> Vec<Rational> {
        match self.id {
            BasisId::B32 => {
                let xp = powers(x, 8);
                let yp = powers(y, 8);
                known_monomials_b()
                    .iter()
                    .map(|m| &xp[m.dx as usize] * &yp[m.dy as usize])
                    .collect()
            }
            BasisId::A5 => self
                .features
                .iter()
                .map(|f| f.eval_rational(x, y))
                .collect(),
        }
    }

    pub fn featurize<R: Real>(&self, x: &R, y: &R) -> Vec<R> {
        let ctx = x.ctx();
        let pw = |v: &R| {
            let mut out = vec![R::lift_i64(1, ctx)];
            for k in 1..=8 {
                let next = out[k - 1].clone() * v;
                out.push(next);
            }
            out
        };
        let (xp, yp) = (pw(x), pw(y));
        match self.id {
            BasisId::B32 => known_monomials_b()
                .iter()
                .map(|m| xp[m.dx as usize].clone() * &yp[m.dy as usize])
                .collect(),
            BasisId::A5 => {
                let s = x.clone() + y;
                let p = x.clone() * y;
                vec![
                    s.clone(),
                    p.clone(),
                    xp[2].clone() + &yp[2],
                    p.clone() * &s,
                    p.clone() * &p,
                ]
            }
        }
    }

    /// `A5` features of a conjugate pair, computed from `(e1, e2)` exactly.
    pub fn featurize_symmetric(&self, a: &SymmetricAtom) -> Result<Vec<Rational>> {
        if self.id != BasisId::A5 {
            return input("symmetric atoms are only defined for case a");
        }
        let (e1, e2) = (&a.e1, &a.e2);
        Ok(vec![
            e1.clone(),
            e2.clone(),
            e1 * e1 - Rational::from(2) * e2,
            e1 * e2,
            e2 * e2,
        ])
    }
}

fn powers(v: &Rational, n: usize) -> Vec<Rational> {
    let mut out = vec![Rational::one()];
    for k in 1..=n {
        let next = &out[k - 1] * v;
        out.push(next);
    }
    out
}

/// A basis together with the limiting averages of its features.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentVector {
    pub basis: MomentBasis,
    pub values: Vec<Rational>,
    reducer: Vec<(Monomial, Poly2, Rational)>,
}

impl MomentVector {
    pub fn new(basis: MomentBasis, values: Vec<Rational>) -> Result<Self> {
        if basis.len() != values.len() {
            return input(format!(
                "{} values for {} features",
                values.len(),
                basis.len()
            ));
        }
        let reducer = build_reducer(&basis.features, &values)?;
        Ok(MomentVector {
            basis,
            values,
            reducer,
        })
    }

    pub fn for_case(id: BasisId) -> Self {
        match id {
            BasisId::A5 => target_a(),
            BasisId::B32 => target_b(),
        }
    }

    pub fn id(&self) -> BasisId {
        self.basis.id
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Decomposes `p = c0 + Σ c_i·feature_i`, returning `(c0, c)`.
    pub fn decompose(&self, p: &Poly2) -> Result<(Rational, Vec<Rational>)> {
        let mut rest = p.clone();
        let mut pivot_coeffs = Vec::with_capacity(self.reducer.len());
        for (pivot, row, _) in &self.reducer {
            let c = rest.coeff(*pivot);
            if !c.is_zero() {
                rest = rest.sub(&row.scale(&c));
            }
            pivot_coeffs.push(c);
        }
        if let Some((m, _)) = rest.terms().find(|(m, _)| !m.is_constant()) {
            return Err(Error::UnknownMoment(*m));
        }
        // Reduced rows are combinations of the features; recover feature
        // coefficients by solving against the feature matrix.
        let target = p.sub(&Poly2::constant(rest.constant_term()));
        let mut monos: Vec<Monomial> = self
            .basis
            .features
            .iter()
            .flat_map(|f| f.terms().map(|(m, _)| *m))
            .filter(|m| !m.is_constant())
            .collect();
        monos.sort();
        monos.dedup();
        let a: Vec<Vec<Rational>> = monos
            .iter()
            .map(|m| self.basis.features.iter().map(|f| f.coeff(*m)).collect())
            .collect();
        let b: Vec<Rational> = monos.iter().map(|m| target.coeff(*m)).collect();
        let c = solve_rational(&a, &b)?;
        let c0 = p.constant_term()
            - self
                .basis
                .features
                .iter()
                .zip(&c)
                .map(|(f, ci)| f.constant_term() * ci)
                .sum::<Rational>();
        Ok((c0, c))
    }

    /// Exact limiting average `⟨p⟩`.
    pub fn expectation(&self, p: &Poly2) -> Result<Rational> {
        let mut rest = p.clone();
        let mut acc = Rational::zero();
        for (pivot, row, value) in &self.reducer {
            let c = rest.coeff(*pivot);
            if c.is_zero() {
                continue;
            }
            rest = rest.sub(&row.scale(&c));
            acc += &(&c * value);
        }
        if let Some((m, _)) = rest.terms().find(|(m, _)| !m.is_constant()) {
            return Err(Error::UnknownMoment(*m));
        }
        Ok(acc + rest.constant_term())
    }
}

impl fmt::Display for MomentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (label, v) in self.basis.labels().iter().zip(&self.values) {
            writeln!(f, "{label} {v}")?;
        }
        Ok(())
    }
}

/// Row-reduces the features so that each reduced row owns one pivot monomial
/// appearing in no other row. Each row carries its expectation.
fn build_reducer(
    features: &[Poly2],
    values: &[Rational],
) -> Result<Vec<(Monomial, Poly2, Rational)>> {
    let mut rows: Vec<(Monomial, Poly2, Rational)> = Vec::new();
    for (f, v) in features.iter().zip(values) {
        let mut p = f.clone();
        let mut val = v.clone();
        for (pivot, row, rv) in &rows {
            let c = p.coeff(*pivot);
            if !c.is_zero() {
                p = p.sub(&row.scale(&c));
                val -= &(&c * rv);
            }
        }
        let Some((&pivot, c)) = p.terms().filter(|(m, _)| !m.is_constant()).last() else {
            return input("moment features are linearly dependent");
        };
        let inv = c.recip();
        let p = p.scale(&inv);
        let val = val * &inv;
        for (_, row, rv) in rows.iter_mut() {
            let c = row.coeff(pivot);
            if !c.is_zero() {
                *row = row.sub(&p.scale(&c));
                *rv -= &(&c * &val);
            }
        }
        rows.push((pivot, p, val));
    }
    Ok(rows)
}

/// Features spanning the same space as the case basis, chosen so that the
/// simplex stays well conditioned. For the split case these are products of
/// Chebyshev polynomials of the second kind in `x/2` and `y/2`, orthonormal
/// for the semicircle law, each shifted by a distinct constant.
pub(crate) struct LpBasis {
    pub(crate) features: Vec<Poly2>,
    pub(crate) target: Vec<Rational>,
}

pub(crate) fn chebyshev_u_half(k: u32, v: &Poly2) -> Poly2 {
    let (mut a, mut b) = (Poly2::constant(Rational::one()), v.clone());
    if k == 0 {
        return a;
    }
    for _ in 1..k {
        let next = v.mul(&b).sub(&a);
        a = b;
        b = next;
    }
    b
}

impl LpBasis {
    pub(crate) fn new(target: &MomentVector) -> Result<LpBasis> {
        let features: Vec<Poly2> = match target.basis.id {
            BasisId::A5 => target.basis.features.clone(),
            BasisId::B32 => known_monomials_b()
                .iter()
                .enumerate()
                .map(|(i, m)| {
                    // distinct offsets keep the right-hand side away from zero
                    let shift = Poly2::constant(Rational::new(64 + i as i64, 64));
                    chebyshev_u_half(m.dx, &Poly2::x())
                        .mul(&chebyshev_u_half(m.dy, &Poly2::y()))
                        .add(&shift)
                })
                .collect(),
        };
        let target = features
            .iter()
            .map(|f| target.expectation(f))
            .collect::<Result<_>>()?;
        Ok(LpBasis { features, target })
    }

    pub(crate) fn featurize(&self, x: &Rational, y: &Rational) -> Vec<Rational> {
        self.features
            .iter()
            .map(|f| f.eval_rational(x, y))
            .collect()
    }
}

/// `C_n = binom(2n, n) / (n + 1)`.
pub fn catalan(n: u32) -> Rational {
    let mut c = BigInt::from(1);
    for k in 0..n {
        // C_{k+1} = C_k · 2(2k+1)/(k+2)
        c = c * BigInt::from(2 * (2 * k + 1)) / BigInt::from(k + 2);
    }
    Rational::from_bigints(c, BigInt::from(1)).expect("nonzero denominator")
}

/// Semicircle-product moment `E[x^k y^l]`.
pub fn haar_moment_b(k: u32, l: u32) -> Rational {
    if k % 2 == 1 || l % 2 == 1 {
        Rational::zero()
    } else {
        catalan(k / 2) * catalan(l / 2)
    }
}

const B32_ORDER: [(u32, u32); 32] = [
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
    (4, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 4),
    (5, 0),
    (4, 1),
    (3, 2),
    (2, 3),
    (1, 4),
    (0, 5),
    (6, 0),
    (4, 2),
    (3, 3),
    (2, 4),
    (0, 6),
    (7, 0),
    (4, 3),
    (3, 4),
    (0, 7),
    (8, 0),
    (4, 4),
    (0, 8),
];

/// Monomials whose averages are known in the split case, in canonical order.
pub fn known_monomials_b() -> Vec<Monomial> {
    B32_ORDER
        .iter()
        .map(|&(dx, dy)| Monomial::new(dx, dy))
        .collect()
}

/// Whether `x^k y^l` has a known average in the split case.
pub fn is_available_b(k: u32, l: u32) -> bool {
    (k <= 4 && l <= 4) || (k == 0 && l <= 8) || (l == 0 && k <= 8)
}

pub fn target_b() -> MomentVector {
    let basis = MomentBasis::new(BasisId::B32);
    let values = B32_ORDER
        .iter()
        .map(|&(k, l)| haar_moment_b(k, l))
        .collect();
    MomentVector::new(basis, values).expect("consistent basis")
}

pub fn target_a() -> MomentVector {
    let basis = MomentBasis::new(BasisId::A5);
    let values = [0, -1, 3, 0, 2]
        .iter()
        .map(|&v| Rational::from(v))
        .collect();
    MomentVector::new(basis, values).expect("consistent basis")
}

/// Trace polynomials with the pole orders of their L-functions at `s = 1`.
#[derive(Clone, Debug, Default)]
pub struct ConstraintSpec {
    pub entries: Vec<(Poly2, u32)>,
}

impl ConstraintSpec {
    /// `tr V = s + t` and `tr W = st + 1` with their products.
    pub fn generic() -> Self {
        let tr_v = Poly2::x().add(&Poly2::y());
        let tr_w = Poly2::x()
            .mul(&Poly2::y())
            .add(&Poly2::constant(Rational::one()));
        ConstraintSpec {
            entries: vec![
                (tr_v.clone(), 0),
                (tr_w.clone(), 0),
                (tr_v.pow(2), 1),
                (tr_v.mul(&tr_w), 0),
                (tr_w.pow(2), 1),
            ],
        }
    }
}

/// Solves `E[trace poly] = pole order` for the averages of the `A5` features.
pub fn constraints_from_poles(spec: &ConstraintSpec) -> Result<MomentVector> {
    let basis = MomentBasis::new(BasisId::A5);
    // Placeholder values: only the decomposition is used here.
    let probe = MomentVector::new(basis.clone(), vec![Rational::zero(); basis.len()])?;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (p, pole) in &spec.entries {
        let (c0, c) = probe.decompose(p).map_err(|e| match e {
            Error::UnknownMoment(m) => Error::Input(format!(
                "trace polynomial has {m}, outside the symmetric feature span"
            )),
            other => other,
        })?;
        a.push(c);
        b.push(Rational::from(*pole as i64) - c0);
    }
    let values = solve_rational(&a, &b).map_err(|e| match e {
        Error::Underdetermined(_) => Error::Underdetermined(format!(
            "{} constraints do not determine the {} feature averages",
            spec.entries.len(),
            basis.len()
        )),
        other => other,
    })?;
    MomentVector::new(basis, values)
}

/// Characteristic-polynomial coefficients `(a1, a2) = (x + y, xy + 2)`.
pub fn a1_a2(x: &Rational, y: &Rational) -> (Rational, Rational) {
    (x + y, x * y + Rational::from(2))
}

/// Seeded sampler for the semicircle density `√(4 − x²) / 2π` on `[-2, 2]`.
pub struct Semicircle {
    rng: ChaCha8Rng,
}

impl Semicircle {
    pub fn new(seed: u64) -> Self {
        Semicircle {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Accept-reject against the uniform envelope of height 1.
    pub fn sample(&mut self) -> f64 {
        loop {
            let x: f64 = self.rng.random_range(-2.0..=2.0);
            let u: f64 = self.rng.random();
            if 2.0 * u <= (4.0 - x * x).sqrt() {
                return x;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data;

    #[test]
    fn catalan_numbers() {
        let expect = [1, 1, 2, 5, 14, 42];
        for (n, c) in expect.iter().enumerate() {
            assert_eq!(catalan(n as u32), Rational::from(*c));
        }
        assert_eq!(haar_moment_b(2, 0), Rational::one());
        assert_eq!(haar_moment_b(3, 3), Rational::zero());
        assert_eq!(haar_moment_b(4, 4), Rational::from(4));
    }

    #[test]
    fn b32_order() {
        let m = known_monomials_b();
        assert_eq!(m.len(), 32);
        assert_eq!(m[0], Monomial::new(1, 0));
        assert_eq!(m[31], Monomial::new(0, 8));
        assert!(!m.contains(&Monomial::new(5, 1)));
        assert!(m.contains(&Monomial::new(5, 0)));
        let mut rule: Vec<Monomial> = (0..=8)
            .flat_map(|k| (0..=8).map(move |l| (k, l)))
            .filter(|&(k, l)| (k, l) != (0, 0) && is_available_b(k, l))
            .map(|(k, l)| Monomial::new(k, l))
            .collect();
        rule.sort();
        let mut sorted = m.clone();
        sorted.sort();
        assert_eq!(sorted, rule);
    }

    #[test]
    fn targets() {
        let vals: Vec<i64> = vec![
            0, 0, 1, 0, 1, 0, 0, 0, 0, 2, 0, 1, 0, 2, 0, 0, 0, 0, 0, 0, 5, 2, 0, 2, 5, 0, 0, 0, 0,
            14, 4, 14,
        ];
        let t = target_b();
        assert_eq!(
            t.values,
            vals.iter().map(|&v| Rational::from(v)).collect::<Vec<_>>()
        );
        let a = target_a();
        assert_eq!(a.values[1], Rational::from(-1));
        assert_eq!(a.values[4], Rational::from(2));
    }

    #[test]
    fn poles_give_generic_target() {
        assert_eq!(
            constraints_from_poles(&ConstraintSpec::generic()).unwrap(),
            target_a()
        );
        let only = ConstraintSpec {
            entries: vec![(Poly2::x().add(&Poly2::y()), 0)],
        };
        assert!(matches!(
            constraints_from_poles(&only),
            Err(Error::Underdetermined(_))
        ));
        let outside = ConstraintSpec {
            entries: vec![(Poly2::x(), 0)],
        };
        assert!(matches!(
            constraints_from_poles(&outside),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn packaged_expectations() {
        let t = target_b();
        assert_eq!(t.expectation(&data::q()).unwrap(), Rational::new(-51, 25));
        assert_eq!(t.expectation(&data::r()).unwrap(), Rational::new(-249, 25));
        assert_eq!(
            t.expectation(&Poly2::constant(Rational::one())).unwrap(),
            Rational::one()
        );
        let p1 = t.expectation(&data::p1()).unwrap();
        assert!(p1.to_decimal_string(13).starts_with("-0.4951778044674"));
        let p2 = t.expectation(&data::p2()).unwrap();
        assert!(p2.to_decimal_string(16).starts_with("-0.5762415364653239"));
        let bad = Poly2::monomial(5, 1);
        assert_eq!(
            t.expectation(&bad),
            Err(Error::UnknownMoment(Monomial::new(5, 1)))
        );
    }

    #[test]
    fn generic_expectations() {
        let a = target_a();
        let s = Poly2::x().add(&Poly2::y());
        let p = Poly2::x().mul(&Poly2::y());
        // (s+t)² has average 3 + 2·(−1) = 1
        assert_eq!(a.expectation(&s.pow(2)).unwrap(), Rational::one());
        assert_eq!(a.expectation(&p.pow(2)).unwrap(), Rational::from(2));
        assert!(matches!(
            a.expectation(&Poly2::x()),
            Err(Error::UnknownMoment(_))
        ));
        let (c0, c) = a
            .decompose(&s.pow(2).add(&Poly2::constant(Rational::from(3))))
            .unwrap();
        assert_eq!(c0, Rational::from(3));
        assert_eq!(
            c,
            vec![0, 2, 1, 0, 0]
                .into_iter()
                .map(Rational::from)
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn reflection_invariance() {
        let t = target_b();
        let r = data::r();
        assert_eq!(
            t.expectation(&r.reflect(-1, 1)).unwrap(),
            t.expectation(&r).unwrap()
        );
        for p in [data::q(), data::p1()] {
            let e = t.expectation(&p).unwrap();
            assert_eq!(t.expectation(&p.reflect(-1, -1)).unwrap(), e);
            assert_eq!(t.expectation(&p.swap_xy()).unwrap(), e);
        }
    }

    #[test]
    fn featurize_examples() {
        let b = MomentBasis::new(BasisId::B32);
        let z = Rational::zero();
        assert!(b.featurize_rational(&z, &z).iter().all(|v| v.is_zero()));
        let two = Rational::from(2);
        let f = b.featurize_rational(&two, &two);
        assert_eq!(f[0], two);
        assert_eq!(f[31], Rational::from(256));
        let a = MomentBasis::new(BasisId::A5);
        let one = Rational::one();
        let f = a.featurize_rational(&one, &one);
        assert_eq!(
            f,
            [2, 1, 2, 2, 1]
                .iter()
                .map(|&v| Rational::from(v))
                .collect::<Vec<_>>()
        );
        let g = a.featurize::<f64>(&1.0, &1.0);
        assert_eq!(g, vec![2.0, 1.0, 2.0, 2.0, 1.0]);
        let pair = SymmetricAtom::from_pair(&Rational::new(-3, 5), &two);
        let fs = a.featurize_symmetric(&pair).unwrap();
        assert_eq!(fs, a.featurize_rational(&Rational::new(-3, 5), &two));
        let fx = b.featurize::<f64>(&0.5, &-1.5);
        let fr = b.featurize_rational(&Rational::new(1, 2), &Rational::new(-3, 2));
        for (u, v) in fx.iter().zip(&fr) {
            assert_eq!(*u, v.to_f64());
        }
    }

    #[test]
    fn a1_a2_examples() {
        let z = Rational::zero();
        assert_eq!(a1_a2(&z, &z), (z.clone(), Rational::from(2)));
        assert_eq!(
            a1_a2(&Rational::new(-3, 5), &Rational::from(2)),
            (Rational::new(7, 5), Rational::new(4, 5))
        );
        assert_eq!(
            a1_a2(&Rational::from(2), &Rational::from(2)),
            (Rational::from(4), Rational::from(6))
        );
    }

    #[test]
    fn sampler_moments() {
        let mut s = Semicircle::new(0);
        let n = 200_000;
        let (mut m1, mut m2, mut m4) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let x = s.sample();
            assert!((-2.0..=2.0).contains(&x));
            m1 += x;
            m2 += x * x;
            m4 += x.powi(4);
        }
        let n = n as f64;
        assert!((m1 / n).abs() < 0.01);
        assert!((m2 / n - 1.0).abs() < 0.02);
        assert!((m4 / n - 2.0).abs() < 0.05);
    }
}
