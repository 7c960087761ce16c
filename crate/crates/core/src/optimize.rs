//! Global minimization of a polynomial over a region.
//!
//! Every region decomposes into strata: the open interior, one-dimensional
//! pieces (box edges clipped by the constraint, the constraint curve clipped by
//! the box) and their endpoints. A fast `f64` pass samples each stratum and
//! runs safeguarded Newton; the best candidates are then re-polished on their
//! stratum in [`BigReal`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{input, Error, Result};
use crate::exact::{BigReal, Rational, Real, DEFAULT_DIGITS};
use crate::poly::{LiftedJet, Poly2};
use crate::region::{Direction, Form, Region};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Active {
    XLo,
    XHi,
    YLo,
    YHi,
    Curve,
}

impl fmt::Display for Active {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Active::XLo => "x=lo",
            Active::XHi => "x=hi",
            Active::YLo => "y=lo",
            Active::YHi => "y=hi",
            Active::Curve => "constraint-curve",
        })
    }
}

#[derive(Clone, Debug)]
pub struct MinOptions {
    pub grid_n: usize,
    pub digits: usize,
    /// Stationarity tolerance on the active stratum; `None` means `10^(-digits/2)`.
    pub tol_kkt: Option<f64>,
    /// Number of interior grid minima that seed Newton.
    pub seeds: usize,
}

impl Default for MinOptions {
    fn default() -> Self {
        MinOptions {
            grid_n: 257,
            digits: DEFAULT_DIGITS,
            tol_kkt: None,
            seeds: 32,
        }
    }
}

impl MinOptions {
    fn tol(&self) -> f64 {
        self.tol_kkt
            .unwrap_or_else(|| 10f64.powi(-(self.digits as i32) / 2))
    }
}

#[derive(Clone, Debug)]
pub struct MinResult {
    pub point: (BigReal, BigReal),
    pub value: BigReal,
    pub kkt_residual: BigReal,
    pub active_set: Vec<Active>,
    pub converged: bool,
}

/// A point found by the `f64` pass.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub x: f64,
    pub y: f64,
    pub value: f64,
    stratum: StratumRef,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum StratumRef {
    Interior,
    Segment(usize),
    Vertex(usize),
}

#[derive(Clone, Debug)]
enum Path {
    /// `(ax + t·dx, ay + t·dy)`
    Line {
        ax: Rational,
        ay: Rational,
        dx: Rational,
        dy: Rational,
    },
    /// `(t, v / t)`
    Hyperbola { v: Rational },
}

impl Path {
    fn point_rational(&self, t: &Rational) -> (Rational, Rational) {
        match self {
            Path::Line { ax, ay, dx, dy } => (ax + t * dx, ay + t * dy),
            Path::Hyperbola { v } => (t.clone(), v / t),
        }
    }

    fn point<R: Real>(&self, t: &R) -> (R, R) {
        let ctx = t.ctx();
        match self {
            Path::Line { ax, ay, dx, dy } => (
                R::lift(ax, ctx) + R::lift(dx, ctx) * t,
                R::lift(ay, ctx) + R::lift(dy, ctx) * t,
            ),
            Path::Hyperbola { v } => (t.clone(), R::lift(v, ctx) / t.clone()),
        }
    }

    /// First and second derivatives of the path.
    fn derivs<R: Real>(&self, t: &R) -> ((R, R), (R, R)) {
        let ctx = t.ctx();
        let zero = R::lift_i64(0, ctx);
        match self {
            Path::Line { dx, dy, .. } => {
                ((R::lift(dx, ctx), R::lift(dy, ctx)), (zero.clone(), zero))
            }
            Path::Hyperbola { v } => {
                let v = R::lift(v, ctx);
                let t2 = t.clone() * t;
                let t3 = t2.clone() * t;
                (
                    (R::lift_i64(1, ctx), -(v.clone() / t2)),
                    (zero, R::lift_i64(2, ctx) * &v / t3),
                )
            }
        }
    }
}

/// A one-dimensional stratum on `t ∈ [t0, t1]`.
#[derive(Clone, Debug)]
struct Segment {
    path: Path,
    t0: Rational,
    t1: Rational,
    active: Vec<Active>,
}

/// `φ(t) = p(γ(t))` with `φ'` and `φ''`.
fn phi<R: Real>(jet: &LiftedJet<R>, path: &Path, t: &R) -> (R, R, R) {
    let (x, y) = path.point(t);
    let j = jet.jet(&x, &y);
    let ((xd, yd), (xdd, ydd)) = path.derivs(t);
    let d1 = j.gx.clone() * &xd + j.gy.clone() * &yd;
    let two = R::lift_i64(2, t.ctx());
    let d2 = j.hxx.clone() * &xd * &xd
        + two * &j.hxy * &xd * &yd
        + j.hyy.clone() * &yd * &yd
        + j.gx * &xdd
        + j.gy * &ydd;
    (j.value, d1, d2)
}

/// Feasible sub-interval of `[t0, t1]` where a linear slack is nonnegative.
fn clip_linear(
    t0: &Rational,
    t1: &Rational,
    s0: &Rational,
    s1: &Rational,
) -> Option<(Rational, Rational)> {
    match (s0.is_negative(), s1.is_negative()) {
        (false, false) => Some((t0.clone(), t1.clone())),
        (true, true) => None,
        _ => {
            let root = t0 + &(t1 - t0) * s0 / &(s0 - s1);
            if s0.is_negative() {
                Some((root, t1.clone()))
            } else {
                Some((t0.clone(), root))
            }
        }
    }
}

fn segments(r: &Region) -> Vec<Segment> {
    let (xlo, xhi) = r.x_range.clone();
    let (ylo, yhi) = r.y_range.clone();
    let zero = Rational::zero();
    let one = Rational::one();
    let mut out = Vec::new();
    let edges = [
        (Active::XLo, xlo.clone(), true),
        (Active::XHi, xhi.clone(), true),
        (Active::YLo, ylo.clone(), false),
        (Active::YHi, yhi.clone(), false),
    ];
    for (label, fixed, vertical) in edges {
        let (path, t0, t1) = if vertical {
            (
                Path::Line {
                    ax: fixed,
                    ay: zero.clone(),
                    dx: zero.clone(),
                    dy: one.clone(),
                },
                ylo.clone(),
                yhi.clone(),
            )
        } else {
            (
                Path::Line {
                    ax: zero.clone(),
                    ay: fixed,
                    dx: one.clone(),
                    dy: zero.clone(),
                },
                xlo.clone(),
                xhi.clone(),
            )
        };
        let range = match &r.constraint {
            None => Some((t0, t1)),
            Some(c) => {
                let (a0, b0) = path.point_rational(&t0);
                let (a1, b1) = path.point_rational(&t1);
                clip_linear(
                    &t0,
                    &t1,
                    &c.slack_rational(&a0, &b0),
                    &c.slack_rational(&a1, &b1),
                )
            }
        };
        if let Some((t0, t1)) = range {
            out.push(Segment {
                path,
                t0,
                t1,
                active: vec![label],
            });
        }
    }
    let Some(c) = &r.constraint else {
        return out;
    };
    match c.form {
        Form::Sum => {
            let t0 = xlo.clone().max(&c.bound - &yhi);
            let t1 = xhi.clone().min(&c.bound - &ylo);
            if t0 <= t1 {
                out.push(Segment {
                    path: Path::Line {
                        ax: zero.clone(),
                        ay: c.bound.clone(),
                        dx: one.clone(),
                        dy: -&one,
                    },
                    t0,
                    t1,
                    active: vec![Active::Curve],
                });
            }
        }
        Form::Product if c.bound.is_zero() => {
            if xlo <= zero && zero <= xhi {
                out.push(Segment {
                    path: Path::Line {
                        ax: zero.clone(),
                        ay: zero.clone(),
                        dx: zero.clone(),
                        dy: one.clone(),
                    },
                    t0: ylo.clone(),
                    t1: yhi.clone(),
                    active: vec![Active::Curve],
                });
            }
            if ylo <= zero && zero <= yhi {
                out.push(Segment {
                    path: Path::Line {
                        ax: zero.clone(),
                        ay: zero.clone(),
                        dx: one.clone(),
                        dy: zero.clone(),
                    },
                    t0: xlo.clone(),
                    t1: xhi.clone(),
                    active: vec![Active::Curve],
                });
            }
        }
        Form::Product => {
            let v = &c.bound;
            let mut cuts: Vec<Rational> = vec![xlo.clone(), xhi.clone(), zero.clone()];
            for yb in [&ylo, &yhi] {
                if !yb.is_zero() {
                    cuts.push(v / yb);
                }
            }
            cuts.retain(|t| &xlo <= t && t <= &xhi);
            cuts.sort();
            cuts.dedup();
            let mut pieces: Vec<(Rational, Rational)> = Vec::new();
            for w in cuts.windows(2) {
                let mid = (&w[0] + &w[1]) / Rational::from(2);
                if mid.is_zero() || w[0].is_zero() && w[1].is_zero() {
                    continue;
                }
                // skip pieces that straddle the pole at 0
                if w[0].is_negative() && w[1].is_positive() {
                    continue;
                }
                let yv = v / &mid;
                if ylo <= yv && yv <= yhi && !w[0].is_zero() && !w[1].is_zero() {
                    match pieces.last_mut() {
                        Some(last) if last.1 == w[0] => last.1 = w[1].clone(),
                        _ => pieces.push((w[0].clone(), w[1].clone())),
                    }
                }
            }
            for (t0, t1) in pieces {
                out.push(Segment {
                    path: Path::Hyperbola { v: v.clone() },
                    t0,
                    t1,
                    active: vec![Active::Curve],
                });
            }
        }
    }
    out
}

/// Endpoints of all one-dimensional strata, deduplicated.
fn vertices(segs: &[Segment], r: &Region) -> Vec<(Rational, Rational)> {
    let mut pts: Vec<(Rational, Rational)> = segs
        .iter()
        .flat_map(|s| [s.path.point_rational(&s.t0), s.path.point_rational(&s.t1)])
        .filter(|(x, y)| r.contains_rational(x, y))
        .collect();
    pts.sort();
    pts.dedup();
    pts
}

fn active_at(r: &Region, x: &Rational, y: &Rational) -> Vec<Active> {
    let mut a = Vec::new();
    if x == &r.x_range.0 {
        a.push(Active::XLo);
    }
    if x == &r.x_range.1 {
        a.push(Active::XHi);
    }
    if y == &r.y_range.0 {
        a.push(Active::YLo);
    }
    if y == &r.y_range.1 {
        a.push(Active::YHi);
    }
    if let Some(c) = &r.constraint {
        if c.slack_rational(x, y).is_zero() {
            a.push(Active::Curve);
        }
    }
    a
}

fn lattice_f64(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

/// Safeguarded Newton for a minimum of `φ` on `[a, b]` started at `t`.
fn newton_1d(jet: &LiftedJet<f64>, path: &Path, mut a: f64, mut b: f64, mut t: f64) -> f64 {
    for _ in 0..100 {
        let (_, d1, d2) = phi(jet, path, &t);
        if d1 == 0.0 {
            break;
        }
        if d1 > 0.0 {
            b = t;
        } else {
            a = t;
        }
        let mut next = if d2 > 0.0 { t - d1 / d2 } else { f64::NAN };
        if !(next > a && next < b) {
            next = 0.5 * (a + b);
        }
        let done = (next - t).abs() <= 1e-15 * (1.0 + t.abs());
        t = next;
        if done || b - a <= 1e-15 * (1.0 + t.abs()) {
            break;
        }
    }
    t
}

fn segment_candidates(jet: &LiftedJet<f64>, seg: &Segment, samples: usize) -> Vec<(f64, f64, f64)> {
    let (t0, t1) = (seg.t0.to_f64(), seg.t1.to_f64());
    if t1 <= t0 {
        return Vec::new();
    }
    let ts = lattice_f64(t0, t1, samples);
    let vals: Vec<f64> = ts.iter().map(|t| phi(jet, &seg.path, t).0).collect();
    let mut out = Vec::new();
    for k in 1..samples - 1 {
        if vals[k] <= vals[k - 1] && vals[k] < vals[k + 1] {
            let t = newton_1d(jet, &seg.path, ts[k - 1], ts[k + 1], ts[k]);
            let (x, y) = seg.path.point(&t);
            out.push((t, x, y));
        }
    }
    out
}

/// Damped Newton on the interior, kept strictly feasible.
fn newton_2d(jet: &LiftedJet<f64>, r: &Region, mut x: f64, mut y: f64) -> (f64, f64) {
    let mut f = jet.value(&x, &y);
    for _ in 0..100 {
        let j = jet.jet(&x, &y);
        let det = j.hxx * j.hyy - j.hxy * j.hxy;
        let (sx, sy) = if j.hxx > 0.0 && det > 0.0 {
            (
                (-j.hyy * j.gx + j.hxy * j.gy) / det,
                (j.hxy * j.gx - j.hxx * j.gy) / det,
            )
        } else {
            (-j.gx, -j.gy)
        };
        let slope = j.gx * sx + j.gy * sy;
        if slope >= 0.0 {
            break;
        }
        let mut alpha = 1.0;
        let mut moved = false;
        while alpha > 1e-14 {
            let (cx, cy) = (x + alpha * sx, y + alpha * sy);
            if r.contains_f64(cx, cy, 0.0) {
                let fc = jet.value(&cx, &cy);
                if fc <= f + 1e-4 * alpha * slope {
                    let step = (alpha * sx).abs().max((alpha * sy).abs());
                    x = cx;
                    y = cy;
                    f = fc;
                    moved = step > 1e-16 * (1.0 + x.abs().max(y.abs()));
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (x, y)
}

struct Search {
    segs: Vec<Segment>,
    verts: Vec<(Rational, Rational)>,
    candidates: Vec<Candidate>,
}

/// The `f64` pass over all strata.
fn search_f64(p: &Poly2, r: &Region, grid_n: usize, seeds: usize) -> Result<Search> {
    if grid_n < 3 {
        return input("grid_n must be at least 3");
    }
    if r.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let jet = LiftedJet::<f64>::new(p, ());
    let ((xlo, xhi), (ylo, yhi)) = r.box_f64();
    let xs = lattice_f64(xlo, xhi, grid_n);
    let ys = lattice_f64(ylo, yhi, grid_n);
    let grid: Vec<Vec<f64>> = xs
        .par_iter()
        .map(|x| {
            ys.iter()
                .map(|y| {
                    if r.contains_f64(*x, *y, 0.0) {
                        jet.value(x, y)
                    } else {
                        f64::INFINITY
                    }
                })
                .collect()
        })
        .collect();
    let mut local: Vec<(f64, usize, usize)> = Vec::new();
    for i in 1..grid_n - 1 {
        for j in 1..grid_n - 1 {
            let v = grid[i][j];
            if !v.is_finite() {
                continue;
            }
            let mut is_min = true;
            'nb: for di in [-1i64, 0, 1] {
                for dj in [-1i64, 0, 1] {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let w = grid[(i as i64 + di) as usize][(j as i64 + dj) as usize];
                    // strict on one half of the neighbourhood to break plateaus
                    let later = di > 0 || (di == 0 && dj > 0);
                    if w < v || (later && w == v) {
                        is_min = false;
                        break 'nb;
                    }
                }
            }
            if is_min {
                local.push((v, i, j));
            }
        }
    }
    local.sort_by(|a, b| a.0.total_cmp(&b.0));
    local.truncate(seeds);
    let mut candidates: Vec<Candidate> = local
        .par_iter()
        .map(|&(_, i, j)| {
            let (x, y) = newton_2d(&jet, r, xs[i], ys[j]);
            Candidate {
                x,
                y,
                value: jet.value(&x, &y),
                stratum: StratumRef::Interior,
            }
        })
        .collect();

    let segs = segments(r);
    let samples = (4 * grid_n).max(1025);
    let seg_cands: Vec<Candidate> = segs
        .par_iter()
        .enumerate()
        .flat_map_iter(|(k, s)| {
            segment_candidates(&jet, s, samples)
                .into_iter()
                .map(move |(_, x, y)| (k, x, y))
        })
        .map(|(k, x, y)| Candidate {
            x,
            y,
            value: jet.value(&x, &y),
            stratum: StratumRef::Segment(k),
        })
        .collect();
    candidates.extend(seg_cands);
    let verts = vertices(&segs, r);
    for (k, (x, y)) in verts.iter().enumerate() {
        let (xf, yf) = (x.to_f64(), y.to_f64());
        candidates.push(Candidate {
            x: xf,
            y: yf,
            value: jet.value(&xf, &yf),
            stratum: StratumRef::Vertex(k),
        });
    }
    candidates.retain(|c| c.value.is_finite());
    candidates.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then(a.x.total_cmp(&b.x))
            .then(a.y.total_cmp(&b.y))
    });
    if candidates.is_empty() {
        return Err(Error::EmptyRegion);
    }
    Ok(Search {
        segs,
        verts,
        candidates,
    })
}

/// Parameter of an `f64` point on a segment path.
fn param_of(seg: &Segment, x: f64, y: f64) -> f64 {
    match &seg.path {
        Path::Line { dx, .. } if !dx.is_zero() => x,
        Path::Line { .. } => y,
        Path::Hyperbola { .. } => x,
    }
}

fn polish(
    p: &Poly2,
    r: &Region,
    s: &Search,
    c: &Candidate,
    opts: &MinOptions,
) -> Option<MinResult> {
    let digits = opts.digits;
    let eps = BigReal::from_f64(10f64.powi(8 - digits as i32), digits).ok()?;
    let jet = LiftedJet::<BigReal>::new(p, digits);
    let lift = |v: f64| BigReal::from_f64(v, digits).ok();
    let tol_region = 10f64.powi(2 - digits as i32);
    match c.stratum {
        StratumRef::Vertex(k) => {
            let (x, y) = &s.verts[k];
            let (bx, by) = (x.to_bigreal(digits).ok()?, y.to_bigreal(digits).ok()?);
            Some(MinResult {
                value: jet.value(&bx, &by),
                point: (bx, by),
                kkt_residual: BigReal::zero(digits),
                active_set: active_at(r, x, y),
                converged: true,
            })
        }
        StratumRef::Segment(k) => {
            let seg = &s.segs[k];
            let mut t = lift(param_of(seg, c.x, c.y))?;
            let mut residual = BigReal::zero(digits);
            let mut converged = false;
            for _ in 0..20 {
                let (_, d1, d2) = phi(&jet, &seg.path, &t);
                residual = d1.abs();
                if d2.is_negative() || d2.is_zero() {
                    break;
                }
                let step = d1 / d2;
                t = &t - &step;
                if step.abs() < eps {
                    let (_, d1, _) = phi(&jet, &seg.path, &t);
                    residual = d1.abs();
                    converged = residual.to_f64() < opts.tol();
                    break;
                }
            }
            let t0 = seg.t0.to_bigreal(digits).ok()?;
            let t1 = seg.t1.to_bigreal(digits).ok()?;
            if t < t0 || t > t1 {
                return None;
            }
            let (x, y) = seg.path.point(&t);
            if !r.contains(&x, &y, tol_region) {
                return None;
            }
            Some(MinResult {
                value: jet.value(&x, &y),
                point: (x, y),
                kkt_residual: residual,
                active_set: seg.active.clone(),
                converged,
            })
        }
        StratumRef::Interior => {
            let (mut x, mut y) = (lift(c.x)?, lift(c.y)?);
            let mut residual = BigReal::zero(digits);
            let mut converged = false;
            for _ in 0..20 {
                let j = jet.jet(&x, &y);
                residual = if j.gx.abs() > j.gy.abs() {
                    j.gx.abs()
                } else {
                    j.gy.abs()
                };
                let det = &j.hxx * &j.hyy - &j.hxy * &j.hxy;
                if det.is_negative() || det.is_zero() || j.hxx.is_negative() {
                    break;
                }
                let sx = (&j.hyy * &j.gx - &j.hxy * &j.gy) / &det;
                let sy = (&j.hxx * &j.gy - &j.hxy * &j.gx) / &det;
                x = &x - &sx;
                y = &y - &sy;
                let step = if sx.abs() > sy.abs() {
                    sx.abs()
                } else {
                    sy.abs()
                };
                if step < eps {
                    let j = jet.jet(&x, &y);
                    residual = if j.gx.abs() > j.gy.abs() {
                        j.gx.abs()
                    } else {
                        j.gy.abs()
                    };
                    converged = residual.to_f64() < opts.tol();
                    break;
                }
            }
            // a non-stationary end point belongs to a boundary stratum
            if !converged || !r.contains(&x, &y, 0.0) {
                return None;
            }
            Some(MinResult {
                value: jet.value(&x, &y),
                point: (x, y),
                kkt_residual: residual,
                active_set: Vec::new(),
                converged,
            })
        }
    }
}

fn cmp_results(a: &MinResult, b: &MinResult) -> Ordering {
    let digits = a.value.digits().min(b.value.digits());
    let scale = 1.0 + a.value.to_f64().abs().max(b.value.to_f64().abs());
    let tie = 10f64.powi(6 - digits as i32) * scale;
    let diff = (&a.value - &b.value).to_f64();
    if diff.abs() > tie {
        return diff.partial_cmp(&0.0).unwrap_or(Ordering::Equal);
    }
    b.converged
        .cmp(&a.converged)
        .then(a.point.0.partial_cmp(&b.point.0).unwrap_or(Ordering::Equal))
        .then(a.point.1.partial_cmp(&b.point.1).unwrap_or(Ordering::Equal))
}

/// Global minimum of `p` over `r`, polished at `opts.digits`.
///
/// When several points attain the minimum (symmetric problems), the one with
/// the lexicographically smallest coordinates is reported.
pub fn global_min(p: &Poly2, r: &Region, opts: &MinOptions) -> Result<MinResult> {
    if opts.digits < crate::exact::MIN_DIGITS {
        return input(format!(
            "precision {} below {}",
            opts.digits,
            crate::exact::MIN_DIGITS
        ));
    }
    let s = search_f64(p, r, opts.grid_n, opts.seeds)?;
    let best = s.candidates[0].value;
    let window = 1e-7 * (1.0 + best.abs());
    let mut chosen: Vec<&Candidate> = s
        .candidates
        .iter()
        .filter(|c| c.value <= best + window)
        .take(16)
        .collect();
    for c in s.candidates.iter().take(4) {
        if !chosen.contains(&c) {
            chosen.push(c);
        }
    }
    let mut results: Vec<MinResult> = chosen
        .par_iter()
        .filter_map(|c| polish(p, r, &s, c, opts))
        .collect();
    if results.is_empty() {
        // fall back to the best raw candidate
        let c = &s.candidates[0];
        let x = BigReal::from_f64(c.x, opts.digits)?;
        let y = BigReal::from_f64(c.y, opts.digits)?;
        results.push(MinResult {
            value: p.eval(&x, &y),
            point: (x, y),
            kkt_residual: BigReal::zero(opts.digits),
            active_set: Vec::new(),
            converged: false,
        });
    }
    results.sort_by(cmp_results);
    Ok(results.swap_remove(0))
}

/// All stratum-local minima found by the `f64` pass, lowest first, with
/// near-duplicates removed. Every returned point lies in the region.
pub fn local_minima(p: &Poly2, r: &Region, grid_n: usize) -> Result<Vec<(f64, f64, f64)>> {
    let s = search_f64(p, r, grid_n, 64)?;
    let mut out: Vec<(f64, f64, f64)> = Vec::new();
    for c in &s.candidates {
        if out
            .iter()
            .any(|(x, y, _)| (x - c.x).abs() < 1e-9 && (y - c.y).abs() < 1e-9)
        {
            continue;
        }
        out.push((c.x, c.y, c.value));
    }
    Ok(out)
}

/// Outcome of [`lower_bound`].
#[derive(Clone, Debug, Serialize)]
pub struct LowerBound {
    /// Guaranteed `bound ≤ min p` on the region.
    pub bound: f64,
    /// `best feasible value found − bound`.
    pub achieved_gap: f64,
    pub converged: bool,
    pub cells: usize,
}

struct Cell {
    bound: f64,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl PartialEq for Cell {
    fn eq(&self, o: &Self) -> bool {
        self.bound == o.bound
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Cell {
    // reversed: BinaryHeap pops the lowest bound first
    fn cmp(&self, o: &Self) -> Ordering {
        o.bound.total_cmp(&self.bound)
    }
}

/// Dense coefficient table for Taylor re-expansion.
struct TaylorModel {
    c: Vec<Vec<f64>>,
    binom: Vec<Vec<f64>>,
    nx: usize,
    ny: usize,
    kappa: f64,
}

impl TaylorModel {
    fn new(p: &Poly2) -> Self {
        let nx = p.max_dx() as usize + 1;
        let ny = p.max_dy() as usize + 1;
        let mut c = vec![vec![0.0; ny]; nx];
        for (m, q) in p.terms() {
            c[m.dx as usize][m.dy as usize] = q.to_f64();
        }
        let n = nx.max(ny);
        let mut binom = vec![vec![0.0; n]; n];
        for k in 0..n {
            binom[k][0] = 1.0;
            for i in 1..=k {
                binom[k][i] = binom[k - 1][i - 1] + if i < k { binom[k - 1][i] } else { 0.0 };
            }
        }
        let deg = p.degree() as f64;
        TaylorModel {
            c,
            binom,
            nx,
            ny,
            kappa: 8.0 * (deg + 4.0) * f64::EPSILON,
        }
    }

    /// Lower bound of `p` on the cell from the expansion about its centre.
    fn cell_bound(&self, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
        let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
        let widen = 1.0 + 4.0 * f64::EPSILON;
        let hx = (0.5 * (x1 - x0)).max((x1 - cx).abs()).max((cx - x0).abs()) * widen;
        let hy = (0.5 * (y1 - y0)).max((y1 - cy).abs()).max((cy - y0).abs()) * widen;
        let pw = |v: f64, n: usize| {
            let mut out = vec![1.0; n];
            for k in 1..n {
                out[k] = out[k - 1] * v;
            }
            out
        };
        let (cxp, cyp) = (pw(cx, self.nx), pw(cy, self.ny));
        let (cxa, cya) = (pw(cx.abs(), self.nx), pw(cy.abs(), self.ny));
        let (hxp, hyp) = (pw(hx, self.nx), pw(hy, self.ny));
        let mut b00 = 0.0;
        let mut spread = 0.0;
        let mut err = 0.0;
        for i in 0..self.nx {
            for j in 0..self.ny {
                let mut b = 0.0;
                let mut s = 0.0;
                for k in i..self.nx {
                    for l in j..self.ny {
                        let c = self.c[k][l];
                        if c == 0.0 {
                            continue;
                        }
                        let w = self.binom[k][i] * self.binom[l][j];
                        b += c * w * cxp[k - i] * cyp[l - j];
                        s += c.abs() * w * cxa[k - i] * cya[l - j];
                    }
                }
                let h = hxp[i] * hyp[j];
                err += s * h;
                if i == 0 && j == 0 {
                    b00 = b;
                } else if i % 2 == 0 && j % 2 == 0 && b >= 0.0 {
                    // nonnegative on the cell
                } else {
                    spread += b.abs() * h;
                }
            }
        }
        b00 - spread - self.kappa * (err + spread + b00.abs())
    }
}

fn cell_outside(r: &Region, x0: f64, x1: f64, y0: f64, y1: f64) -> bool {
    let Some(c) = &r.constraint else {
        return false;
    };
    let u = c.bound.to_f64();
    let margin = 1e-12 * (1.0 + u.abs());
    let vals = match c.form {
        Form::Sum => [x0 + y0, x0 + y1, x1 + y0, x1 + y1],
        Form::Product => [x0 * y0, x0 * y1, x1 * y0, x1 * y1],
    };
    match c.dir {
        Direction::Geq => vals.iter().all(|v| *v < u - margin),
        Direction::Leq => vals.iter().all(|v| *v > u + margin),
    }
}

/// Certified lower bound by adaptive subdivision with a Taylor model on
/// each cell; cells are refined lowest bound first until the bound is within
/// `gap` of the best feasible value or `budget` cells have been split.
pub fn lower_bound(p: &Poly2, r: &Region, gap: f64, budget: usize) -> Result<LowerBound> {
    if !(gap > 0.0) {
        return input("gap must be positive");
    }
    if r.is_empty() {
        return Err(Error::EmptyRegion);
    }
    if p.degree() == 0 {
        let c = p.constant_term().to_f64();
        return Ok(LowerBound {
            bound: c,
            achieved_gap: 0.0,
            converged: true,
            cells: 0,
        });
    }
    let model = TaylorModel::new(p);
    let lp = p.lift::<f64>(());
    let mut upper = search_f64(p, r, 129, 32)?.candidates[0].value;
    let ((xlo, xhi), (ylo, yhi)) = r.box_f64();
    let init = 16;
    let mut heap = BinaryHeap::new();
    let xs = lattice_f64(xlo, xhi, init + 1);
    let ys = lattice_f64(ylo, yhi, init + 1);
    for i in 0..init {
        for j in 0..init {
            let (x0, x1, y0, y1) = (xs[i], xs[i + 1], ys[j], ys[j + 1]);
            if !cell_outside(r, x0, x1, y0, y1) {
                heap.push(Cell {
                    bound: model.cell_bound(x0, x1, y0, y1),
                    x0,
                    x1,
                    y0,
                    y1,
                });
            }
        }
    }
    let mut splits = 0;
    loop {
        let Some(top) = heap.peek() else {
            return Err(Error::EmptyRegion);
        };
        if upper - top.bound <= gap {
            return Ok(LowerBound {
                bound: top.bound,
                achieved_gap: (upper - top.bound).max(0.0),
                converged: true,
                cells: splits,
            });
        }
        if splits >= budget {
            return Ok(LowerBound {
                bound: top.bound,
                achieved_gap: upper - top.bound,
                converged: false,
                cells: splits,
            });
        }
        let cell = heap.pop().unwrap();
        splits += 1;
        let xm = 0.5 * (cell.x0 + cell.x1);
        let ym = 0.5 * (cell.y0 + cell.y1);
        if r.contains_f64(xm, ym, 0.0) {
            upper = upper.min(lp.eval(&xm, &ym));
        }
        for (x0, x1) in [(cell.x0, xm), (xm, cell.x1)] {
            for (y0, y1) in [(cell.y0, ym), (ym, cell.y1)] {
                if !cell_outside(r, x0, x1, y0, y1) {
                    heap.push(Cell {
                        bound: model.cell_bound(x0, x1, y0, y1),
                        x0,
                        x1,
                        y0,
                        y1,
                    });
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data;

    fn q(s: &str) -> Rational {
        Rational::parse(s).unwrap()
    }

    fn fast() -> MinOptions {
        MinOptions {
            grid_n: 129,
            ..MinOptions::default()
        }
    }

    #[test]
    fn segments_cover_boundary() {
        let r = Region::product_geq(q("-1.57"));
        let segs = segments(&r);
        // four clipped edges plus two hyperbola branches
        assert_eq!(
            segs.iter()
                .filter(|s| s.active == vec![Active::Curve])
                .count(),
            2
        );
        for s in &segs {
            for t in [&s.t0, &s.t1] {
                let (x, y) = s.path.point_rational(t);
                assert!(r.contains_rational(&x, &y), "{x} {y}");
            }
        }
        let s = Region::sum_geq(q("-2.47"));
        let segs = segments(&s);
        assert_eq!(segs.len(), 5);
        let v = vertices(&segs, &s);
        assert!(v.contains(&(q("-2"), q("-0.47"))));
        assert!(v.contains(&(q("2"), q("2"))));
        assert!(!v.contains(&(q("-2"), q("-2"))));
    }

    #[test]
    fn trivial_minimum() {
        let p = Poly2::monomial(2, 0).add(&Poly2::monomial(0, 2));
        let m = global_min(&p, &Region::full_box(), &fast()).unwrap();
        assert!(m.value.to_f64().abs() < 1e-40);
        assert!(m.converged);
        assert!(m.active_set.is_empty());
    }

    #[test]
    fn boundary_minimum() {
        // x + y over {x + y >= 1/2} is constant on the constraint line.
        let p = Poly2::x().add(&Poly2::y());
        let r = Region::sum_geq(Rational::new(1, 2));
        let m = global_min(&p, &r, &fast()).unwrap();
        assert!((m.value.to_f64() - 0.5).abs() < 1e-40);
        // x² over xy >= 1: minimum 1/4 at (±1/2, ±2), the corner of the
        // hyperbola with a horizontal edge; ties resolve to (-1/2, -2).
        let r = Region::product_geq(Rational::one());
        let m = global_min(&Poly2::monomial(2, 0), &r, &fast()).unwrap();
        assert!((m.value.to_f64() - 0.25).abs() < 1e-40);
        assert!((m.point.0.to_f64() + 0.5).abs() < 1e-40);
        assert_eq!(m.active_set, vec![Active::YLo, Active::Curve]);
    }

    #[test]
    fn curve_stationary_point() {
        // (x - 1)² + (y - 1)² over x + y <= 0: minimum at the origin, value 2.
        let p = Poly2::x()
            .sub(&Poly2::constant(Rational::one()))
            .pow(2)
            .add(&Poly2::y().sub(&Poly2::constant(Rational::one())).pow(2));
        let r = Region::sum_leq(Rational::zero());
        let m = global_min(&p, &r, &fast()).unwrap();
        assert!((m.value.to_f64() - 2.0).abs() < 1e-40);
        assert_eq!(m.active_set, vec![Active::Curve]);
        assert!(m.converged);
        assert!(m.kkt_residual.to_f64() < 1e-30);
    }

    #[test]
    fn q_minimum_on_rounded_region() {
        let m = global_min(&data::q(), &Region::sum_geq(q("-2.47")), &fast()).unwrap();
        assert!((m.value.to_f64() + 1.93656).abs() < 1e-4, "{}", m.value);
        assert!((m.point.0.to_f64() + 1.81913).abs() < 1e-4);
        assert!((m.point.1.to_f64() - 0.644208).abs() < 1e-4);
        assert!(m.converged);
    }

    #[test]
    fn lower_bound_examples() {
        let five = Poly2::constant(Rational::from(5));
        let lb = lower_bound(&five, &Region::sum_geq(q("-1")), 1e-3, 1000).unwrap();
        assert_eq!((lb.bound, lb.achieved_gap), (5.0, 0.0));
        let p = Poly2::monomial(2, 0).add(&Poly2::monomial(0, 2));
        let lb = lower_bound(&p, &Region::full_box(), 1e-3, 100_000).unwrap();
        assert!(
            lb.converged && lb.bound <= 0.0 && lb.bound >= -1e-3,
            "{lb:?}"
        );
        let lb = lower_bound(&data::q(), &Region::sum_geq(q("-2.47")), 0.02, 200_000).unwrap();
        assert!(lb.converged, "{lb:?}");
        assert!(lb.bound >= -1.96 && lb.bound <= -1.93656, "{lb:?}");
    }

    #[test]
    fn taylor_bound_is_below_samples() {
        let p = data::p1();
        let model = TaylorModel::new(&p);
        let lp = p.lift::<f64>(());
        for (x0, y0, h) in [(-2.0, -2.0, 0.5), (0.9, 1.1, 0.01), (1.5, -0.25, 0.125)] {
            let b = model.cell_bound(x0, x0 + h, y0, y0 + h);
            for i in 0..=10 {
                for j in 0..=10 {
                    let x = x0 + h * i as f64 / 10.0;
                    let y = y0 + h * j as f64 / 10.0;
                    assert!(b <= lp.eval(&x, &y));
                }
            }
        }
    }
}
