//! Support regions: the box `[lo, hi]²` cut by one sum or product bound.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::exact::{BigReal, Rational, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    Sum,
    Product,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Geq,
    Leq,
}

impl Direction {
    pub fn flip(self) -> Direction {
        match self {
            Direction::Geq => Direction::Leq,
            Direction::Leq => Direction::Geq,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Direction::Geq => ">=",
            Direction::Leq => "<=",
        }
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Form::Sum => "sum",
            Form::Product => "product",
        })
    }
}

/// `x + y` or `x·y` compared against `bound`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub form: Form,
    pub dir: Direction,
    pub bound: Rational,
}

impl Constraint {
    pub fn new(form: Form, dir: Direction, bound: Rational) -> Self {
        Constraint { form, dir, bound }
    }

    pub fn value<R: Real>(&self, x: &R, y: &R) -> R {
        match self.form {
            Form::Sum => x.clone() + y,
            Form::Product => x.clone() * y,
        }
    }

    pub fn value_rational(&self, x: &Rational, y: &Rational) -> Rational {
        match self.form {
            Form::Sum => x + y,
            Form::Product => x * y,
        }
    }

    /// Signed slack: nonnegative exactly when the constraint holds.
    pub fn slack_rational(&self, x: &Rational, y: &Rational) -> Rational {
        let v = self.value_rational(x, y);
        match self.dir {
            Direction::Geq => v - &self.bound,
            Direction::Leq => &self.bound - v,
        }
    }

    pub fn slack<R: Real>(&self, x: &R, y: &R) -> R {
        let v = self.value(x, y);
        let b = R::lift(&self.bound, x.ctx());
        match self.dir {
            Direction::Geq => v - b,
            Direction::Leq => b - v,
        }
    }

    fn describe_violation(&self) -> String {
        let op = match self.dir {
            Direction::Geq => ">=",
            Direction::Leq => "<=",
        };
        let lhs = match self.form {
            Form::Sum => "a1 = x + y",
            Form::Product => "x*y",
        };
        let b = self
            .bound
            .to_exact_decimal()
            .unwrap_or_else(|| self.bound.to_string());
        format!("{lhs} {op} {b}")
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = self
            .bound
            .to_exact_decimal()
            .unwrap_or_else(|| self.bound.to_string());
        write!(f, "{}{}{}", self.form, self.dir.symbol(), b)
    }
}

/// Box `[x_lo, x_hi] × [y_lo, y_hi]` intersected with an optional constraint.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Region {
    pub x_range: (Rational, Rational),
    pub y_range: (Rational, Rational),
    pub constraint: Option<Constraint>,
}

impl Default for Region {
    fn default() -> Self {
        Region::full_box()
    }
}

impl Region {
    /// `[-2, 2]²` without a constraint.
    pub fn full_box() -> Self {
        let two = Rational::from(2);
        Region {
            x_range: (-&two, two.clone()),
            y_range: (-&two, two),
            constraint: None,
        }
    }

    pub fn with_constraint(form: Form, dir: Direction, bound: Rational) -> Self {
        Region {
            constraint: Some(Constraint::new(form, dir, bound)),
            ..Region::full_box()
        }
    }

    pub fn sum_geq(bound: Rational) -> Self {
        Region::with_constraint(Form::Sum, Direction::Geq, bound)
    }

    pub fn sum_leq(bound: Rational) -> Self {
        Region::with_constraint(Form::Sum, Direction::Leq, bound)
    }

    pub fn product_geq(bound: Rational) -> Self {
        Region::with_constraint(Form::Product, Direction::Geq, bound)
    }

    pub fn product_leq(bound: Rational) -> Self {
        Region::with_constraint(Form::Product, Direction::Leq, bound)
    }

    pub fn with_box(
        mut self,
        x_range: (Rational, Rational),
        y_range: (Rational, Rational),
    ) -> Result<Self> {
        if x_range.0 >= x_range.1 || y_range.0 >= y_range.1 {
            return input("box requires lo < hi on both axes");
        }
        self.x_range = x_range;
        self.y_range = y_range;
        Ok(self)
    }

    /// Inline syntax: `sum>=<q>`, `sum<=<q>`, `product>=<q>`, `product<=<q>`, or `box`.
    pub fn parse_inline(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t == "box" || t == "none" || t.is_empty() {
            return Ok(Region::full_box());
        }
        let (form, rest) = if let Some(r) = t.strip_prefix("sum") {
            (Form::Sum, r)
        } else if let Some(r) = t.strip_prefix("product") {
            (Form::Product, r)
        } else {
            return input(format!("unrecognized region {s:?}"));
        };
        let (dir, bound) = if let Some(b) = rest.strip_prefix(">=") {
            (Direction::Geq, b)
        } else if let Some(b) = rest.strip_prefix("<=") {
            (Direction::Leq, b)
        } else {
            return input(format!("unrecognized region {s:?}"));
        };
        Ok(Region::with_constraint(form, dir, Rational::parse(bound)?))
    }

    pub fn bound(&self) -> Option<&Rational> {
        self.constraint.as_ref().map(|c| &c.bound)
    }

    /// Same box and constraint form, new bound.
    pub fn with_bound(&self, bound: Rational) -> Region {
        let mut r = self.clone();
        if let Some(c) = r.constraint.as_mut() {
            c.bound = bound;
        }
        r
    }

    pub fn in_box_rational(&self, x: &Rational, y: &Rational) -> bool {
        &self.x_range.0 <= x && x <= &self.x_range.1 && &self.y_range.0 <= y && y <= &self.y_range.1
    }

    pub fn contains_rational(&self, x: &Rational, y: &Rational) -> bool {
        self.in_box_rational(x, y)
            && self
                .constraint
                .as_ref()
                .is_none_or(|c| !c.slack_rational(x, y).is_negative())
    }

    /// Membership with absolute tolerance `tol` on the box and the constraint.
    pub fn contains<R: Real>(&self, x: &R, y: &R, tol: f64) -> bool {
        let ctx = x.ctx();
        let t = R::lift_f64(tol, ctx);
        let neg_t = -t.clone();
        let inside = |v: &R, (lo, hi): &(Rational, Rational)| {
            v.clone() - R::lift(lo, ctx) >= neg_t && R::lift(hi, ctx) - v >= neg_t
        };
        if !inside(x, &self.x_range) || !inside(y, &self.y_range) {
            return false;
        }
        match &self.constraint {
            None => true,
            Some(c) => c.slack(x, y) >= neg_t,
        }
    }

    pub fn contains_f64(&self, x: f64, y: f64, tol: f64) -> bool {
        self.contains::<f64>(&x, &y, tol)
    }

    fn corners(&self) -> [(Rational, Rational); 4] {
        let (xl, xh) = &self.x_range;
        let (yl, yh) = &self.y_range;
        [
            (xl.clone(), yl.clone()),
            (xl.clone(), yh.clone()),
            (xh.clone(), yl.clone()),
            (xh.clone(), yh.clone()),
        ]
    }

    /// True iff no point of the box satisfies the constraint.
    pub fn is_empty(&self) -> bool {
        let Some(c) = &self.constraint else {
            return false;
        };
        // Both x+y and xy are extremized over a box at its corners.
        let values: Vec<Rational> = self
            .corners()
            .iter()
            .map(|(x, y)| c.value_rational(x, y))
            .collect();
        match c.dir {
            Direction::Geq => values.iter().all(|v| v < &c.bound),
            Direction::Leq => values.iter().all(|v| v > &c.bound),
        }
    }

    fn lattice(range: &(Rational, Rational), n: usize) -> Vec<Rational> {
        let span = &range.1 - &range.0;
        let denom = Rational::from((n - 1) as i64);
        (0..n)
            .map(|k| &range.0 + &span * Rational::from(k as i64) / &denom)
            .collect()
    }

    /// Deterministic seed points: the `n×n` lattice points of the box lying in
    /// the region, the lattice lines' crossings with the constraint boundary,
    /// and the box corners in the region. Sorted and deduplicated.
    pub fn grid(&self, n: usize) -> Result<Vec<(Rational, Rational)>> {
        if n < 2 {
            return input("grid needs n >= 2");
        }
        if self.is_empty() {
            return Err(Error::EmptyRegion);
        }
        let xs = Region::lattice(&self.x_range, n);
        let ys = Region::lattice(&self.y_range, n);
        let mut out: BTreeSet<(Rational, Rational)> = BTreeSet::new();
        for x in &xs {
            for y in &ys {
                if self.contains_rational(x, y) {
                    out.insert((x.clone(), y.clone()));
                }
            }
        }
        for (x, y) in self.corners() {
            if self.contains_rational(&x, &y) {
                out.insert((x, y));
            }
        }
        if let Some(c) = &self.constraint {
            let mut push = |x: Rational, y: Rational| {
                if self.contains_rational(&x, &y) {
                    out.insert((x, y));
                }
            };
            match c.form {
                Form::Sum => {
                    for x in &xs {
                        push(x.clone(), &c.bound - x);
                    }
                    for y in &ys {
                        push(&c.bound - y, y.clone());
                    }
                }
                Form::Product => {
                    if c.bound.is_zero() {
                        for x in &xs {
                            push(x.clone(), Rational::zero());
                        }
                        for y in &ys {
                            push(Rational::zero(), y.clone());
                        }
                    } else {
                        for x in xs.iter().filter(|x| !x.is_zero()) {
                            push(x.clone(), &c.bound / x);
                        }
                        for y in ys.iter().filter(|y| !y.is_zero()) {
                            push(&c.bound / y, y.clone());
                        }
                    }
                }
            }
        }
        if out.is_empty() {
            return Err(Error::EmptyRegion);
        }
        Ok(out.into_iter().collect())
    }

    /// Image of the region under `(x, y) -> (sign_x·x, sign_y·y)`.
    pub fn reflect(&self, sign_x: i8, sign_y: i8) -> Result<Region> {
        let flip = |r: &(Rational, Rational), s: i8| {
            if s < 0 {
                (-&r.1, -&r.0)
            } else {
                r.clone()
            }
        };
        let constraint = match &self.constraint {
            None => None,
            Some(c) => Some(match (c.form, sign_x * sign_y) {
                (Form::Product, 1) => c.clone(),
                (Form::Product, _) => Constraint::new(Form::Product, c.dir.flip(), -&c.bound),
                (Form::Sum, _) if sign_x == 1 && sign_y == 1 => c.clone(),
                (Form::Sum, _) if sign_x == -1 && sign_y == -1 => {
                    Constraint::new(Form::Sum, c.dir.flip(), -&c.bound)
                }
                (Form::Sum, _) => {
                    return input("a sum constraint is not closed under a one-axis reflection")
                }
            }),
        };
        Ok(Region {
            x_range: flip(&self.x_range, sign_x),
            y_range: flip(&self.y_range, sign_y),
            constraint,
        })
    }

    pub fn swap_xy(&self) -> Region {
        Region {
            x_range: self.y_range.clone(),
            y_range: self.x_range.clone(),
            constraint: self.constraint.clone(),
        }
    }

    /// Moves a rational point into the region: clamp to the box, then, if the
    /// constraint fails, slide onto its boundary along one coordinate.
    pub fn project_rational(&self, x: &Rational, y: &Rational) -> Option<(Rational, Rational)> {
        let clamp =
            |v: &Rational, r: &(Rational, Rational)| v.clone().max(r.0.clone()).min(r.1.clone());
        let (x, y) = (clamp(x, &self.x_range), clamp(y, &self.y_range));
        if self.contains_rational(&x, &y) {
            return Some((x, y));
        }
        let c = self.constraint.as_ref()?;
        let candidates: Vec<(Rational, Rational)> = match c.form {
            Form::Sum => vec![(x.clone(), &c.bound - &x), (&c.bound - &y, y.clone())],
            Form::Product => {
                let mut v = Vec::new();
                if !x.is_zero() {
                    v.push((x.clone(), &c.bound / &x));
                }
                if !y.is_zero() {
                    v.push((&c.bound / &y, y.clone()));
                }
                v
            }
        };
        candidates
            .into_iter()
            .filter(|(a, b)| self.contains_rational(a, b))
            .min_by(|(a1, b1), (a2, b2)| {
                let d1 = (a1 - &x).abs() + (b1 - &y).abs();
                let d2 = (a2 - &x).abs() + (b2 - &y).abs();
                d1.cmp(&d2)
            })
    }

    /// Human-readable statement of what a valid certificate shows is violated.
    pub fn violation_statement(&self) -> String {
        match &self.constraint {
            None => "the box [-2,2]^2".into(),
            Some(c) => c.describe_violation(),
        }
    }

    pub fn to_file(&self) -> RegionFile {
        let num = |q: &Rational| {
            serde_json::Value::String(q.to_exact_decimal().unwrap_or_else(|| q.to_string()))
        };
        RegionFile {
            bbox: Some([
                [num(&self.x_range.0), num(&self.x_range.1)],
                [num(&self.y_range.0), num(&self.y_range.1)],
            ]),
            constraint: self.constraint.as_ref().map(|c| ConstraintFile {
                form: c.form,
                dir: c.dir,
                bound: c
                    .bound
                    .to_exact_decimal()
                    .unwrap_or_else(|| c.bound.to_string()),
            }),
        }
    }

    pub fn from_file(f: &RegionFile) -> Result<Region> {
        let mut r = Region::full_box();
        if let Some([bx, by]) = &f.bbox {
            let parse = |v: &serde_json::Value| -> Result<Rational> {
                match v {
                    serde_json::Value::Number(n) => Rational::parse(&n.to_string()),
                    serde_json::Value::String(s) => Rational::parse(s),
                    _ => input("box bounds must be numbers or decimal strings"),
                }
            };
            r = r.with_box(
                (parse(&bx[0])?, parse(&bx[1])?),
                (parse(&by[0])?, parse(&by[1])?),
            )?;
        }
        if let Some(c) = &f.constraint {
            r.constraint = Some(Constraint::new(c.form, c.dir, Rational::parse(&c.bound)?));
        }
        Ok(r)
    }

    pub fn from_json(s: &str) -> Result<Region> {
        let f: RegionFile =
            serde_json::from_str(s).map_err(|e| Error::Input(format!("region file: {e}")))?;
        Region::from_file(&f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("serializable")
    }

    pub(crate) fn box_f64(&self) -> ((f64, f64), (f64, f64)) {
        (
            (self.x_range.0.to_f64(), self.x_range.1.to_f64()),
            (self.y_range.0.to_f64(), self.y_range.1.to_f64()),
        )
    }

    fn is_square_box(&self) -> bool {
        self.x_range == self.y_range
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.constraint {
            Some(c) => write!(f, "{c}"),
            None => write!(f, "box"),
        }
    }
}

/// On-disk region document.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RegionFile {
    #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
    pub bbox: Option<[[serde_json::Value; 2]; 2]>,
    pub constraint: Option<ConstraintFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConstraintFile {
    pub form: Form,
    pub dir: Direction,
    pub bound: String,
}

/// A conjugate pair `{s, t}` stored by its elementary symmetric functions
/// `e1 = s + t`, `e2 = s·t`, so that surd atoms stay exact.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymmetricAtom {
    pub e1: Rational,
    pub e2: Rational,
}

impl SymmetricAtom {
    /// Validates realizability by a real pair in the default box `[-2, 2]²`.
    pub fn new(e1: Rational, e2: Rational) -> Result<Self> {
        let a = SymmetricAtom { e1, e2 };
        a.check_realizable(&Rational::from(-2), &Rational::from(2))?;
        Ok(a)
    }

    pub fn from_pair(s: &Rational, t: &Rational) -> Self {
        SymmetricAtom {
            e1: s + t,
            e2: s * t,
        }
    }

    pub fn discriminant(&self) -> Rational {
        &self.e1 * &self.e1 - Rational::from(4) * &self.e2
    }

    /// Both roots of `z² − e1·z + e2` real and inside `[lo, hi]`.
    pub fn check_realizable(&self, lo: &Rational, hi: &Rational) -> Result<()> {
        let upper = hi * hi - hi * &self.e1 + &self.e2; // (hi - s)(hi - t)
        let lower = lo * lo - lo * &self.e1 + &self.e2; // (s - lo)(t - lo)
        let two = Rational::from(2);
        let ok = !self.discriminant().is_negative()
            && !upper.is_negative()
            && !lower.is_negative()
            && &two * lo <= self.e1
            && self.e1 <= &two * hi;
        if ok {
            Ok(())
        } else {
            input(format!(
                "atom (e1={}, e2={}) is not realizable in [{lo}, {hi}]^2",
                self.e1, self.e2
            ))
        }
    }

    /// The pair `(s, t)` with `s ≤ t`, evaluated at `digits` precision.
    pub fn roots(&self, digits: usize) -> Result<(BigReal, BigReal)> {
        let d = BigReal::from_rational(&self.discriminant(), digits)?.sqrt();
        let e1 = BigReal::from_rational(&self.e1, digits)?;
        let two = BigReal::from_i64(2, digits)?;
        Ok(((&e1 - &d) / &two, (&e1 + &d) / &two))
    }

    /// Exact `(s, t)` when the discriminant is a perfect rational square.
    pub fn rational_roots(&self) -> Option<(Rational, Rational)> {
        let d = self.discriminant();
        let n = d.numer();
        let m = d.denom();
        let rn = n.sqrt();
        let rm = m.sqrt();
        if &(&rn * &rn) != n || &(&rm * &rm) != m {
            return None;
        }
        let root = Rational::from_bigints(rn, rm).ok()?;
        let two = Rational::from(2);
        Some(((&self.e1 - &root) / &two, (&self.e1 + &root) / &two))
    }
}

/// Exact membership for a symmetric atom: sum constraints test `e1`, product
/// constraints test `e2`; the box is checked through the realizability inequalities.
pub fn symmetric_atom_in_region(a: &SymmetricAtom, r: &Region) -> Result<bool> {
    if !r.is_square_box() {
        return input("symmetric atoms need the same range on both axes");
    }
    a.check_realizable(&r.x_range.0, &r.x_range.1)?;
    Ok(match &r.constraint {
        None => true,
        Some(c) => {
            let v = match c.form {
                Form::Sum => &a.e1,
                Form::Product => &a.e2,
            };
            match c.dir {
                Direction::Geq => v >= &c.bound,
                Direction::Leq => v <= &c.bound,
            }
        }
    })
}

/// Exact signed slack of a symmetric atom against the region constraint.
pub fn symmetric_atom_slack(a: &SymmetricAtom, r: &Region) -> Rational {
    match &r.constraint {
        None => Rational::zero(),
        Some(c) => {
            let v = match c.form {
                Form::Sum => a.e1.clone(),
                Form::Product => a.e2.clone(),
            };
            match c.dir {
                Direction::Geq => v - &c.bound,
                Direction::Leq => &c.bound - v,
            }
        }
    }
}
