//! Exact bivariate polynomials in `x` and `y` (equivalently `s` and `t`).

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::exact::{BigReal, Rational, Real};

/// The monomial `x^dx y^dy`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct Monomial {
    pub dx: u32,
    pub dy: u32,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { dx: 0, dy: 0 };

    pub const fn new(dx: u32, dy: u32) -> Self {
        Monomial { dx, dy }
    }

    pub fn degree(&self) -> u32 {
        self.dx + self.dy
    }

    pub fn is_constant(&self) -> bool {
        self.dx == 0 && self.dy == 0
    }
}

fn superscript(n: u32) -> String {
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    n.to_string()
        .bytes()
        .map(|b| DIGITS[(b - b'0') as usize])
        .collect()
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_constant() {
            return write!(f, "1");
        }
        for (var, e) in [("x", self.dx), ("y", self.dy)] {
            match e {
                0 => {}
                1 => write!(f, "{var}")?,
                _ => write!(f, "{var}{}", superscript(e))?,
            }
        }
        Ok(())
    }
}

/// Sparse bivariate polynomial with exact rational coefficients.
///
/// Canonical form: no zero coefficients are stored, so two polynomials are
/// equal exactly when their term maps are equal.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Poly2 {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Poly2::default()
    }

    pub fn constant(c: Rational) -> Self {
        Poly2::term(Monomial::ONE, c)
    }

    pub fn term(m: Monomial, c: Rational) -> Self {
        let mut p = Poly2::zero();
        p.add_term(m, c);
        p
    }

    pub fn x() -> Self {
        Poly2::term(Monomial::new(1, 0), Rational::one())
    }

    pub fn y() -> Self {
        Poly2::term(Monomial::new(0, 1), Rational::one())
    }

    pub fn monomial(dx: u32, dy: u32) -> Self {
        Poly2::term(Monomial::new(dx, dy), Rational::one())
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rational)>>(terms: I) -> Self {
        let mut p = Poly2::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    /// Builds a polynomial from `(dx, dy, decimal)` triples.
    pub fn from_decimal_terms(terms: &[(u32, u32, &str)]) -> Result<Self> {
        let mut p = Poly2::zero();
        for &(dx, dy, c) in terms {
            p.add_term(Monomial::new(dx, dy), Rational::parse(c)?);
        }
        Ok(p)
    }

    /// Adds `c·m`, keeping the canonical form.
    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let remove = match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += &c;
                existing.is_zero()
            }
            None => {
                self.terms.insert(m, c);
                false
            }
        };
        if remove {
            self.terms.remove(&m);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: Monomial) -> Rational {
        self.terms.get(&m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(Monomial::ONE)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn max_dx(&self) -> u32 {
        self.terms.keys().map(|m| m.dx).max().unwrap_or(0)
    }

    pub fn max_dy(&self) -> u32 {
        self.terms.keys().map(|m| m.dy).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Poly2) -> Poly2 {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly2) -> Poly2 {
        self.add(&other.scale(&Rational::from_integer(-1)))
    }

    pub fn scale(&self, c: &Rational) -> Poly2 {
        if c.is_zero() {
            return Poly2::zero();
        }
        Poly2 {
            terms: self.terms.iter().map(|(m, v)| (*m, v * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly2) -> Poly2 {
        let mut out = Poly2::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(Monomial::new(ma.dx + mb.dx, ma.dy + mb.dy), ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Poly2 {
        (0..e).fold(Poly2::constant(Rational::one()), |acc, _| acc.mul(self))
    }

    pub fn product<'a, I: IntoIterator<Item = &'a Poly2>>(factors: I) -> Poly2 {
        factors
            .into_iter()
            .fold(Poly2::constant(Rational::one()), |acc, f| acc.mul(f))
    }

    /// Exact evaluation at a rational point.
    pub fn eval_rational(&self, x: &Rational, y: &Rational) -> Rational {
        let xp = powers(x, self.max_dx());
        let yp = powers(y, self.max_dy());
        self.terms
            .iter()
            .map(|(m, c)| c * &xp[m.dx as usize] * &yp[m.dy as usize])
            .sum()
    }

    /// Evaluation in [`BigReal`] at the larger of the two argument precisions.
    pub fn eval(&self, x: &BigReal, y: &BigReal) -> BigReal {
        let digits = x.digits().max(y.digits());
        self.lift::<BigReal>(digits).eval(x, y)
    }

    pub fn eval_f64(&self, x: f64, y: f64) -> f64 {
        self.lift::<f64>(()).eval(&x, &y)
    }

    /// Coefficients converted once for repeated evaluation.
    pub fn lift<R: Real>(&self, ctx: R::Ctx) -> LiftedPoly<R> {
        LiftedPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.dx as usize, m.dy as usize, R::lift(c, ctx)))
                .collect(),
            max_dx: self.max_dx() as usize,
            max_dy: self.max_dy() as usize,
            ctx,
        }
    }

    pub fn diff_x(&self) -> Poly2 {
        Poly2::from_terms(self.terms.iter().filter(|(m, _)| m.dx > 0).map(|(m, c)| {
            (
                Monomial::new(m.dx - 1, m.dy),
                c * Rational::from(m.dx as i64),
            )
        }))
    }

    pub fn diff_y(&self) -> Poly2 {
        Poly2::from_terms(self.terms.iter().filter(|(m, _)| m.dy > 0).map(|(m, c)| {
            (
                Monomial::new(m.dx, m.dy - 1),
                c * Rational::from(m.dy as i64),
            )
        }))
    }

    pub fn gradient(&self) -> (Poly2, Poly2) {
        (self.diff_x(), self.diff_y())
    }

    /// `p(y, x)`.
    pub fn swap_xy(&self) -> Poly2 {
        Poly2::from_terms(
            self.terms
                .iter()
                .map(|(m, c)| (Monomial::new(m.dy, m.dx), c.clone())),
        )
    }

    /// `p(sign_x·x, sign_y·y)` for signs in {+1, −1}.
    pub fn reflect(&self, sign_x: i8, sign_y: i8) -> Poly2 {
        assert!(sign_x.abs() == 1 && sign_y.abs() == 1, "signs must be ±1");
        Poly2::from_terms(self.terms.iter().map(|(m, c)| {
            let flip = (sign_x < 0 && m.dx % 2 == 1) ^ (sign_y < 0 && m.dy % 2 == 1);
            (*m, if flip { -c } else { c.clone() })
        }))
    }

    /// Largest absolute coefficient, as `f64`.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.to_f64().abs())
            .fold(0.0, f64::max)
    }

    pub fn to_file(&self) -> PolyFile {
        PolyFile {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| PolyTerm {
                    dx: m.dx,
                    dy: m.dy,
                    coeff: c.to_exact_decimal().unwrap_or_else(|| c.to_string()),
                })
                .collect(),
        }
    }

    pub fn from_file(file: &PolyFile) -> Result<Poly2> {
        let mut p = Poly2::zero();
        let mut seen = std::collections::BTreeSet::new();
        for t in &file.terms {
            let m = Monomial::new(t.dx, t.dy);
            if !seen.insert(m) {
                return input(format!("duplicate monomial {m} in polynomial file"));
            }
            p.add_term(m, Rational::parse(&t.coeff)?);
        }
        Ok(p)
    }

    pub fn from_json(s: &str) -> Result<Poly2> {
        let file: PolyFile =
            serde_json::from_str(s).map_err(|e| Error::Input(format!("polynomial file: {e}")))?;
        Poly2::from_file(&file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("serializable")
    }
}

fn powers(v: &Rational, n: u32) -> Vec<Rational> {
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(Rational::one());
    for i in 0..n as usize {
        let next = &out[i] * v;
        out.push(next);
    }
    out
}

/// True iff the expanded product of `lhs_factors` equals `rhs` coefficient-wise.
pub fn check_identity(lhs_factors: &[Poly2], rhs: &Poly2) -> bool {
    Poly2::product(lhs_factors) == *rhs
}

impl fmt::Display for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut ordered: Vec<_> = self.terms.iter().collect();
        ordered.sort_by_key(|(m, _)| (m.degree(), std::cmp::Reverse(m.dx)));
        for (i, (m, c)) in ordered.into_iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            let mag_s = mag.to_exact_decimal().unwrap_or_else(|| mag.to_string());
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if m.is_constant() {
                write!(f, "{mag_s}")?;
            } else if mag == Rational::one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{mag_s}{m}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly2({self})")
    }
}

/// On-disk polynomial: `{"terms":[{"dx":..,"dy":..,"coeff":"decimal"},..]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PolyFile {
    pub terms: Vec<PolyTerm>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PolyTerm {
    pub dx: u32,
    pub dy: u32,
    pub coeff: String,
}

/// A polynomial with coefficients pre-converted to a scalar type.
#[derive(Clone, Debug)]
pub struct LiftedPoly<R: Real> {
    terms: Vec<(usize, usize, R)>,
    max_dx: usize,
    max_dy: usize,
    ctx: R::Ctx,
}

impl<R: Real> LiftedPoly<R> {
    pub fn eval(&self, x: &R, y: &R) -> R {
        let xp = real_powers(x, self.max_dx, self.ctx);
        let yp = real_powers(y, self.max_dy, self.ctx);
        self.eval_with(&xp, &yp)
    }

    pub(crate) fn eval_with(&self, xp: &[R], yp: &[R]) -> R {
        let mut acc = R::lift_i64(0, self.ctx);
        for (i, j, c) in &self.terms {
            acc = acc + c.clone() * &xp[*i] * &yp[*j];
        }
        acc
    }

    pub fn max_dx(&self) -> usize {
        self.max_dx
    }

    pub fn max_dy(&self) -> usize {
        self.max_dy
    }
}

pub(crate) fn real_powers<R: Real>(v: &R, n: usize, ctx: R::Ctx) -> Vec<R> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(R::lift_i64(1, ctx));
    for i in 0..n {
        let next = out[i].clone() * v;
        out.push(next);
    }
    out
}

/// Value, gradient and Hessian of a polynomial at a point.
#[derive(Clone, Debug)]
pub struct Jet<R> {
    pub value: R,
    pub gx: R,
    pub gy: R,
    pub hxx: R,
    pub hxy: R,
    pub hyy: R,
}

/// A polynomial together with its first and second partial derivatives, lifted.
#[derive(Clone, Debug)]
pub struct LiftedJet<R: Real> {
    p: LiftedPoly<R>,
    px: LiftedPoly<R>,
    py: LiftedPoly<R>,
    pxx: LiftedPoly<R>,
    pxy: LiftedPoly<R>,
    pyy: LiftedPoly<R>,
    ctx: R::Ctx,
}

impl<R: Real> LiftedJet<R> {
    pub fn new(p: &Poly2, ctx: R::Ctx) -> Self {
        let (px, py) = p.gradient();
        let (pxx, pxy) = px.gradient();
        let pyy = py.diff_y();
        LiftedJet {
            p: p.lift(ctx),
            px: px.lift(ctx),
            py: py.lift(ctx),
            pxx: pxx.lift(ctx),
            pxy: pxy.lift(ctx),
            pyy: pyy.lift(ctx),
            ctx,
        }
    }

    pub fn ctx(&self) -> R::Ctx {
        self.ctx
    }

    pub fn value(&self, x: &R, y: &R) -> R {
        self.p.eval(x, y)
    }

    pub fn jet(&self, x: &R, y: &R) -> Jet<R> {
        let xp = real_powers(x, self.p.max_dx, self.ctx);
        let yp = real_powers(y, self.p.max_dy, self.ctx);
        Jet {
            value: self.p.eval_with(&xp, &yp),
            gx: self.px.eval_with(&xp, &yp),
            gy: self.py.eval_with(&xp, &yp),
            hxx: self.pxx.eval_with(&xp, &yp),
            hxy: self.pxy.eval_with(&xp, &yp),
            hyy: self.pyy.eval_with(&xp, &yp),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data;
    use proptest::prelude::*;

    fn r(s: &str) -> Rational {
        Rational::parse(s).unwrap()
    }

    fn lin(c0: i64, cx: i64, cy: i64) -> Poly2 {
        Poly2::from_terms([
            (Monomial::ONE, Rational::from(c0)),
            (Monomial::new(1, 0), Rational::from(cx)),
            (Monomial::new(0, 1), Rational::from(cy)),
        ])
    }

    #[test]
    fn eval_examples() {
        let p = Poly2::monomial(2, 0).add(&Poly2::monomial(0, 2));
        let one = BigReal::from_i64(1, 60).unwrap();
        assert_eq!(p.eval(&one, &one).to_rational(), Rational::from(2));

        let q = data::q();
        let v = q.eval(
            &BigReal::from_rational(&r("-1.81913"), 60).unwrap(),
            &BigReal::from_rational(&r("0.644208"), 60).unwrap(),
        );
        assert!((v.to_f64() + 1.93656).abs() < 1e-3, "{v}");

        let p1 = data::p1();
        let t = BigReal::from_rational(&r("1.122946224307864"), 60).unwrap();
        let v = p1.eval(&t, &t);
        assert!((v.to_f64() + 0.495177804465548).abs() < 1e-12, "{v}");
    }

    #[test]
    fn arithmetic_examples() {
        let x = Poly2::x();
        assert!(x.add(&x.scale(&Rational::from(-1))).is_zero());
        let sum = Poly2::x().add(&Poly2::y());
        let diff = Poly2::x().sub(&Poly2::y());
        let expect = Poly2::monomial(2, 0).sub(&Poly2::monomial(0, 2));
        assert_eq!(sum.mul(&diff), expect);
        // (2 - x)(2 - y) = 4 - 2x - 2y + xy
        let prod = lin(2, -1, 0).mul(&lin(2, 0, -1));
        let expect = Poly2::from_terms([
            (Monomial::ONE, Rational::from(4)),
            (Monomial::new(1, 0), Rational::from(-2)),
            (Monomial::new(0, 1), Rational::from(-2)),
            (Monomial::new(1, 1), Rational::from(1)),
        ]);
        assert_eq!(prod, expect);
    }

    #[test]
    fn identity_examples() {
        let s = Poly2::x();
        let t = Poly2::y();
        let sum = s.add(&t);
        assert!(!check_identity(
            &[sum.clone(), sum],
            &Poly2::monomial(2, 0).add(&Poly2::monomial(0, 2))
        ));
    }

    #[test]
    fn gradient_examples() {
        let p = Poly2::monomial(2, 1);
        let (gx, gy) = p.gradient();
        assert_eq!(gx, Poly2::monomial(1, 1).scale(&Rational::from(2)));
        assert_eq!(gy, Poly2::monomial(2, 0));
        let c = Poly2::constant(Rational::from(7));
        let (gx, gy) = c.gradient();
        assert!(gx.is_zero() && gy.is_zero());
    }

    #[test]
    fn symmetry_examples() {
        let p1 = data::p1();
        assert_eq!(p1.swap_xy(), p1);
        let sum = Poly2::x().add(&Poly2::y());
        assert_eq!(sum.reflect(-1, -1), sum.scale(&Rational::from(-1)));
    }

    #[test]
    fn json_roundtrip_and_rejects_unknown_fields() {
        let q = data::q();
        assert_eq!(Poly2::from_json(&q.to_json()).unwrap(), q);
        let bad = r#"{"terms":[{"dx":1,"dy":0,"coeff":"1","extra":2}]}"#;
        assert!(Poly2::from_json(bad).is_err());
        let bad = r#"{"terms":[],"name":"q"}"#;
        assert!(Poly2::from_json(bad).is_err());
        let bad = r#"{"terms":[{"dx":1,"dy":0,"coeff":"1.2.3"}]}"#;
        assert!(Poly2::from_json(bad).is_err());
        let dup = r#"{"terms":[{"dx":1,"dy":0,"coeff":"1"},{"dx":1,"dy":0,"coeff":"2"}]}"#;
        assert!(Poly2::from_json(dup).is_err());
    }

    #[test]
    fn display() {
        let p = lin(2, -1, 0).mul(&lin(2, 0, -1));
        assert_eq!(p.to_string(), "4 - 2x - 2y + xy");
        assert_eq!(Monomial::new(4, 4).to_string(), "x⁴y⁴");
    }

    fn small_poly() -> impl Strategy<Value = Poly2> {
        proptest::collection::vec((0u32..4, 0u32..4, -20i64..20, 1i64..6), 0..6).prop_map(|ts| {
            Poly2::from_terms(
                ts.into_iter()
                    .map(|(dx, dy, n, d)| (Monomial::new(dx, dy), Rational::new(n, d))),
            )
        })
    }

    proptest! {
        #[test]
        fn canonical_cancellation(p in small_poly()) {
            prop_assert!(p.add(&p.scale(&Rational::from(-1))).is_empty());
        }

        #[test]
        fn ring_laws(p in small_poly(), q in small_poly(), s in small_poly()) {
            prop_assert_eq!(p.mul(&q), q.mul(&p));
            prop_assert_eq!(p.mul(&q.add(&s)), p.mul(&q).add(&p.mul(&s)));
        }

        #[test]
        fn swap_evaluates_transposed(p in small_poly(), a in -50i64..50, b in -50i64..50) {
            let x = Rational::new(a, 7);
            let y = Rational::new(b, 3);
            prop_assert_eq!(p.swap_xy().eval_rational(&x, &y), p.eval_rational(&y, &x));
        }
    }
}
