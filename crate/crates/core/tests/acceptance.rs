//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines show up in normal `cargo test` output.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use frobound::certify::{
    self, verify_hyperplane, verify_measure, Identity, Verdict, VerifyOptions,
};
use frobound::data;
use frobound::lp::{
    caratheodory_reduce, solve_feasibility, Atom, AtomicMeasure, Feasibility, HullProblem, Mode,
};
use frobound::moments::{haar_moment_b, known_monomials_b, BasisId, MomentBasis, MomentVector};
use frobound::optimize::{global_min, MinOptions, MinResult};
use frobound::oracle::{hull_membership_bruteforce, mc_moments};
use frobound::region::{Direction, Form};
use frobound::threshold::{threshold, ThresholdOptions, ThresholdResult};
use frobound::{Monomial, Poly2, Rational, Region};

type Check = Result<String, String>;

fn q(s: &str) -> Rational {
    Rational::parse(s).unwrap()
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(
        elapsed <= limit,
        format!(
            "took {:.1}s, limit {:.0}s",
            elapsed.as_secs_f64(),
            limit.as_secs_f64()
        ),
    )
}

fn e(err: frobound::Error) -> String {
    err.to_string()
}

fn exact_expectations() -> Check {
    let b = MomentVector::for_case(BasisId::B32);
    let eq = b.expectation(&data::q()).map_err(e)?;
    let er = b.expectation(&data::r()).map_err(e)?;
    ensure(eq == q("-51/25"), format!("<Q> = {eq}"))?;
    ensure(er == q("-249/25"), format!("<R> = {er}"))?;
    Ok(format!("<Q> = {eq}, <R> = {er}"))
}

fn decimal_expectations() -> Check {
    let b = MomentVector::for_case(BasisId::B32);
    let s1 = b.expectation(&data::p1()).map_err(e)?.to_decimal_string(16);
    let s2 = b.expectation(&data::p2()).map_err(e)?.to_decimal_string(16);
    ensure(s1.starts_with("-0.4951778044674"), format!("<P1> = {s1}"))?;
    ensure(
        s2.starts_with("-0.5762415364653239"),
        format!("<P2> = {s2}"),
    )?;
    Ok(format!("<P1> = {s1}, <P2> = {s2}"))
}

/// Distance from `(x, y)` to the nearest image of `target` under the
/// symmetries that fix both `p` and `r`.
fn location_error(m: &MinResult, target: (f64, f64), p: &Poly2, r: &Region) -> f64 {
    let (x, y) = (m.point.0.to_f64(), m.point.1.to_f64());
    let (a, b) = target;
    [(a, b), (b, a), (-a, -b), (-b, -a)]
        .into_iter()
        .filter(|&(u, v)| {
            r.contains_f64(u, v, 1e-9) && (p.eval_f64(u, v) - p.eval_f64(a, b)).abs() < 1e-9
        })
        .map(|(u, v)| (x - u).abs().max((y - v).abs()))
        .fold(f64::INFINITY, f64::min)
}

fn check_min(
    name: &str,
    p: &Poly2,
    r: &Region,
    digits: usize,
    value: &str,
    at: (f64, f64),
    tol_value: f64,
    tol_loc: f64,
) -> Result<String, String> {
    let opts = MinOptions {
        digits,
        ..MinOptions::default()
    };
    let m = global_min(p, r, &opts).map_err(e)?;
    let dv = (&m.value.to_rational() - &q(value)).abs().to_f64();
    let dl = location_error(&m, at, p, r);
    ensure(
        dv <= tol_value,
        format!("{name}: value {} off by {dv:.2e}", m.value.to_sci(20)),
    )?;
    ensure(dl <= tol_loc, format!("{name}: location off by {dl:.2e}"))?;
    Ok(format!(
        "{name} {} (value err {dv:.1e}, location err {dl:.1e})",
        m.value.to_sci(16)
    ))
}

fn constrained_minima() -> Check {
    let mut out = Vec::new();
    for (name, p, r, v, at) in [
        (
            "Q",
            data::q(),
            Region::sum_geq(q("-2.47")),
            "-1.93656",
            (-1.81913, 0.644208),
        ),
        (
            "R",
            data::r(),
            Region::product_geq(q("-1.57")),
            "-8.32369",
            (0.907648, 0.188967),
        ),
    ] {
        let t = Instant::now();
        out.push(check_min(name, &p, &r, 60, v, at, 1e-4, 1e-4)?);
        within(t.elapsed(), Duration::from_secs(30))?;
    }
    Ok(out.join("; "))
}

fn high_precision_minima() -> Check {
    let mut out = Vec::new();
    for (name, p, r, v, at) in [
        (
            "P1",
            data::p1(),
            data::region_preset("sum-certificate").unwrap(),
            "-0.495177804465548",
            (1.122946224307864, 1.122946224307864),
        ),
        (
            "P2",
            data::p2(),
            data::region_preset("product-certificate").unwrap(),
            "-0.576241536465307",
            (-1.647233715535326, -0.553436099672013),
        ),
    ] {
        let t = Instant::now();
        out.push(check_min(name, &p, &r, 60, v, at, 1e-12, 1e-9)?);
        within(t.elapsed(), Duration::from_secs(120))?;
    }
    Ok(out.join("; "))
}

fn certificate_verdicts() -> Check {
    let t = Instant::now();
    let m = MomentVector::for_case(BasisId::B32);
    let opts = VerifyOptions {
        gap: 0.02,
        ..VerifyOptions::default()
    };
    let cases = [
        (
            "Q",
            data::q(),
            data::region_preset("sum-rounded").unwrap(),
            Verdict::Valid,
            (-1, -1),
        ),
        (
            "R",
            data::r(),
            data::region_preset("product-rounded").unwrap(),
            Verdict::Valid,
            (-1, 1),
        ),
        (
            "P1",
            data::p1(),
            data::region_preset("sum-certificate").unwrap(),
            Verdict::ValidCoarse,
            (-1, -1),
        ),
        (
            "P2",
            data::p2(),
            data::region_preset("product-certificate").unwrap(),
            Verdict::ValidCoarse,
            (-1, 1),
        ),
    ];
    let mut out = Vec::new();
    // the mirror flips the constraint direction: sum >= u becomes sum <= -u
    // under (-x, -y), product >= v becomes product <= -v under (-x, y)
    for (name, p, r, want, (sx, sy)) in cases {
        let coarse = VerifyOptions {
            gap: 0.01,
            ..opts.clone()
        };
        let o = if want == Verdict::Valid {
            &opts
        } else {
            &coarse
        };
        for (label, pp, rr) in [
            (name.to_string(), p.clone(), r.clone()),
            (
                format!("{name} mirror"),
                p.reflect(sx, sy),
                r.reflect(sx, sy).map_err(e)?,
            ),
        ] {
            if label != name {
                let flipped = r.constraint.as_ref().unwrap().dir.flip();
                ensure(
                    rr.constraint.as_ref().unwrap().dir == flipped,
                    format!("{label}: same direction"),
                )?;
            }
            let rep = verify_hyperplane(&pp, &rr, &m, o).map_err(e)?;
            ensure(
                rep.verdict == want,
                format!("{label}: {} (margin {})", rep.verdict, rep.margin.to_sci(3)),
            )?;
            ensure(
                rep.margin.to_f64() > 0.0,
                format!("{label}: margin not positive"),
            )?;
            ensure(
                rep.certified.achieved_gap <= opts.gap,
                format!("{label}: gap {}", rep.certified.achieved_gap),
            )?;
            if label == name {
                out.push(format!(
                    "{label} {} margin {}",
                    rep.verdict,
                    rep.margin.to_sci(2)
                ));
            }
        }
    }
    within(t.elapsed(), Duration::from_secs(300))?;
    Ok(format!("{}; mirrors agree", out.join(", ")))
}

fn generic_witnesses() -> Check {
    let t = Instant::now();
    let m = MomentVector::for_case(BasisId::A5);
    for name in data::WITNESS_NAMES {
        let w = data::symmetric_witness(name).unwrap();
        let atoms: Vec<Atom> = w.atoms.into_iter().map(Atom::Pair).collect();
        let rep = verify_measure(&atoms, Some(&w.weights), &w.region, &m, 0.0).map_err(e)?;
        ensure(
            rep.verdict == Verdict::Valid,
            format!("{name}: {}", rep.verdict),
        )?;
        ensure(
            rep.max_residual.is_zero(),
            format!("{name}: residual {}", rep.max_residual),
        )?;
    }
    within(t.elapsed(), Duration::from_secs(1))?;
    Ok("a1-opt, a2max-opt, a2min-opt exact, zero residual".into())
}

fn appendix_witnesses() -> Check {
    let t = Instant::now();
    let m = MomentVector::for_case(BasisId::B32);
    let mut out = Vec::new();
    for (name, preset) in [
        ("appendix-a1", "sum-witness"),
        ("appendix-a2", "product-witness"),
    ] {
        let atoms: Vec<Atom> = data::points(name)
            .unwrap()
            .into_iter()
            .map(|(x, y)| Atom::point(x, y))
            .collect();
        let r = data::region_preset(preset).unwrap();
        let rep = verify_measure(&atoms, None, &r, &m, 1e-9).map_err(e)?;
        let res = rep.max_residual.to_f64();
        ensure(
            rep.verdict == Verdict::Valid,
            format!("{name}: {}", rep.verdict),
        )?;
        ensure(res < 1e-9, format!("{name}: residual {res:.2e}"))?;
        ensure(
            rep.atoms.iter().all(|a| a.inside && !a.slack.is_negative()),
            format!("{name}: atom outside"),
        )?;
        out.push(format!("{name} residual {res:.1e}"));
    }
    within(t.elapsed(), Duration::from_secs(60))?;
    Ok(out.join(", "))
}

fn bracket_check(t: &ThresholdResult, target: &Rational, width: f64) -> Result<String, String> {
    let (lo, hi) = if t.feasible_bound < t.infeasible_bound {
        (&t.feasible_bound, &t.infeasible_bound)
    } else {
        (&t.infeasible_bound, &t.feasible_bound)
    };
    let w = t.width().to_f64();
    ensure(
        lo <= target && target <= hi,
        format!(
            "[{}, {}] misses {}",
            lo.to_f64(),
            hi.to_f64(),
            target.to_f64()
        ),
    )?;
    ensure(w <= width, format!("width {w:.2e}"))?;
    ensure(
        t.witness_verdict.is_valid(),
        format!("witness {}", t.witness_verdict),
    )?;
    ensure(
        t.separator_verdict.is_valid(),
        format!("separator {}", t.separator_verdict),
    )?;
    ensure(t.trace_is_monotone(), "bisection trace not monotone")?;
    Ok(format!(
        "[{:.10}, {:.10}] in {:.1}s",
        lo.to_f64(),
        hi.to_f64(),
        t.runtime.as_secs_f64()
    ))
}

fn thresholds(
    id: BasisId,
    grid_n: usize,
    cases: &[(Form, Direction, &str)],
    tol: f64,
    limit: Duration,
) -> Check {
    let mut opts = ThresholdOptions::default();
    opts.feasibility.grid_n = grid_n;
    let mut out = Vec::new();
    for &(form, dir, target) in cases {
        let started = Instant::now();
        let t = threshold(id, form, dir, tol, &opts).map_err(e)?;
        let label = format!("{form:?}-{dir:?}");
        out.push(format!(
            "{label} {}",
            bracket_check(&t, &q(target), tol).map_err(|m| format!("{label}: {m}"))?
        ));
        within(started.elapsed(), limit)?;
    }
    Ok(out.join("; "))
}

fn thresholds_generic() -> Check {
    thresholds(
        BasisId::A5,
        17,
        &[
            (Form::Sum, Direction::Geq, "-2/3"),
            (Form::Product, Direction::Geq, "-6/5"),
            (Form::Product, Direction::Leq, "-2/3"),
        ],
        1e-6,
        Duration::from_secs(300),
    )
}

fn thresholds_split() -> Check {
    thresholds(
        BasisId::B32,
        33,
        &[
            (Form::Sum, Direction::Geq, "-2.47638279"),
            (Form::Product, Direction::Geq, "-1.57854822"),
        ],
        1e-4,
        Duration::from_secs(1800),
    )
}

fn identity_suite() -> Check {
    let t = Instant::now();
    let suite = certify::identity_suite();
    let checks = certify::verify_identity_suite();
    ensure(checks.len() == 9, format!("{} identities", checks.len()))?;
    if let Some(c) = checks.iter().find(|c| !c.passed) {
        return Err(format!(
            "{}: {}",
            c.name,
            c.mismatch.clone().unwrap_or_default()
        ));
    }
    let mut caught = 0;
    for id in &suite {
        let one = Poly2::constant(Rational::one());
        let mutated = Identity {
            name: id.name.clone(),
            lhs: id.lhs.clone(),
            rhs: id.rhs.add(&one),
        };
        let swapped = Identity {
            name: id.name.clone(),
            lhs: id.lhs.clone(),
            rhs: id.rhs.add(&Poly2::x().mul(&Poly2::y())),
        };
        caught += (!mutated.check().passed) as usize + (!swapped.check().passed) as usize;
    }
    ensure(
        caught == 2 * suite.len(),
        format!("only {caught} of {} mutations caught", 2 * suite.len()),
    )?;
    within(t.elapsed(), Duration::from_secs(1))?;
    Ok(format!(
        "{} identities exact, {caught} mutations rejected",
        checks.len()
    ))
}

fn random_rational(rng: &mut ChaCha8Rng, num: i64, den: i64) -> Rational {
    Rational::new(rng.random_range(-num..=num), rng.random_range(1..=den))
}

fn hull_agreement(rng: &mut ChaCha8Rng, n: usize) -> Result<usize, String> {
    let mut feasible = 0;
    for i in 0..n {
        let d = rng.random_range(1..=3);
        let k = rng.random_range(1..=8);
        let cols: Vec<Vec<Rational>> = (0..k)
            .map(|_| (0..d).map(|_| random_rational(rng, 4, 3)).collect())
            .collect();
        let target: Vec<Rational> = (0..d).map(|_| random_rational(rng, 2, 3)).collect();
        let brute = hull_membership_bruteforce(&cols, &target).map_err(e)?;
        let prob = HullProblem::new(cols, target).map_err(e)?;
        let lp = match solve_feasibility(&prob, Mode::Rational, 0.0).map_err(e)? {
            Feasibility::Feasible { weights } => {
                ensure(
                    prob.residual(&weights).is_zero(),
                    format!("instance {i}: inexact weights"),
                )?;
                true
            }
            Feasibility::Infeasible(f) => {
                ensure(
                    f.verify(&prob, &Rational::zero()),
                    format!("instance {i}: bad Farkas certificate"),
                )?;
                false
            }
        };
        ensure(
            brute == lp,
            format!("instance {i}: brute {brute} vs lp {lp}"),
        )?;
        feasible += lp as usize;
    }
    Ok(feasible)
}

fn random_poly(rng: &mut ChaCha8Rng) -> Poly2 {
    let deg = rng.random_range(1..=8u32);
    Poly2::from_terms((0..rng.random_range(1..=12)).map(|_| {
        let dx = rng.random_range(0..=deg);
        let dy = rng.random_range(0..=deg - dx);
        (Monomial::new(dx, dy), random_rational(rng, 9, 4))
    }))
}

fn gradient_agreement(rng: &mut ChaCha8Rng, n: usize) -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let p = random_poly(rng);
        let (gx, gy) = p.gradient();
        let x: f64 = rng.random_range(-2.0..2.0);
        let y: f64 = rng.random_range(-2.0..2.0);
        let h = 1e-5;
        let fx = (p.eval_f64(x + h, y) - p.eval_f64(x - h, y)) / (2.0 * h);
        let fy = (p.eval_f64(x, y + h) - p.eval_f64(x, y - h)) / (2.0 * h);
        let scale = 1.0 + gx.eval_f64(x, y).abs().max(gy.eval_f64(x, y).abs());
        let err = (fx - gx.eval_f64(x, y))
            .abs()
            .max((fy - gy.eval_f64(x, y)).abs())
            / scale;
        ensure(
            err < 1e-6,
            format!("polynomial {i}: relative error {err:.2e}"),
        )?;
        worst = worst.max(err);
    }
    Ok(worst)
}

/// Returns the number of monomials checked and how many of them also fall
/// within the unscaled `4/sqrt(N)`.
fn monte_carlo(seed: u64) -> Result<(usize, usize), String> {
    let n = 1_000_000;
    let mons = known_monomials_b();
    let est = mc_moments(&mons, n, seed);
    let mut unscaled = 0;
    for (m, v) in mons.iter().zip(&est) {
        let mean = haar_moment_b(m.dx, m.dy).to_f64();
        let sd = (haar_moment_b(2 * m.dx, 2 * m.dy).to_f64() - mean * mean).sqrt();
        let tol = 4.0 * sd / (n as f64).sqrt();
        ensure(
            (v - mean).abs() <= tol,
            format!("{m}: {v} vs {mean} (tol {tol:.2e})"),
        )?;
        unscaled += ((v - mean).abs() <= 4.0 / (n as f64).sqrt()) as usize;
    }
    Ok((mons.len(), unscaled))
}

fn caratheodory(rng: &mut ChaCha8Rng, n: usize) -> Result<usize, String> {
    let basis = MomentBasis::new(BasisId::B32);
    let mut largest = 0;
    for i in 0..n {
        let k = rng.random_range(34..=60);
        let mut seen = BTreeSet::new();
        let mut atoms = Vec::new();
        while atoms.len() < k {
            let x = Rational::new(rng.random_range(-16..=16), 8);
            let y = Rational::new(rng.random_range(-16..=16), 8);
            if seen.insert((x.clone(), y.clone())) {
                atoms.push(Atom::point(x, y));
            }
        }
        let raw: Vec<i64> = (0..k).map(|_| rng.random_range(1..=20)).collect();
        let total: i64 = raw.iter().sum();
        let weights = raw.iter().map(|&w| Rational::new(w, total)).collect();
        let m = AtomicMeasure::new(atoms, weights).map_err(e)?;
        let reduced = caratheodory_reduce(&m, &basis).map_err(e)?;
        ensure(
            reduced.len() <= 33,
            format!("measure {i}: {} atoms", reduced.len()),
        )?;
        ensure(
            reduced.weights.iter().all(|w| !w.is_negative()),
            format!("measure {i}: negative weight"),
        )?;
        ensure(
            reduced.moments(&basis).map_err(e)? == m.moments(&basis).map_err(e)?,
            format!("measure {i}: moments changed"),
        )?;
        largest = largest.max(reduced.len());
    }
    Ok(largest)
}

fn property_suites() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_611);
    let feasible = hull_agreement(&mut rng, 1000)?;
    let grad = gradient_agreement(&mut rng, 100)?;
    let (mc, unscaled) = monte_carlo(7)?;
    let largest = caratheodory(&mut rng, 20)?;
    Ok(format!(
        "hull 1000/1000 agree ({feasible} feasible); gradient max rel err {grad:.1e}; {mc} MC moments within 4 sd/sqrt(N) ({unscaled} also within 4/sqrt(N)); reductions <= {largest} atoms"
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("exact expectations of Q and R", exact_expectations),
        ("decimal expectations of P1 and P2", decimal_expectations),
        ("constrained minima of Q and R", constrained_minima),
        ("60-digit minima of P1 and P2", high_precision_minima),
        ("hyperplane certificate verdicts", certificate_verdicts),
        ("generic-case atomic witnesses", generic_witnesses),
        ("appendix point-set witnesses", appendix_witnesses),
        ("generic-case thresholds", thresholds_generic),
        ("split-case thresholds", thresholds_split),
        ("identity suite", identity_suite),
        ("property suites", property_suites),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let tag = format!("criterion {:>2}", i + 1);
        if !filter.is_empty()
            && !filter
                .iter()
                .any(|f| name.contains(f.as_str()) || tag.ends_with(f.as_str()))
        {
            continue;
        }
        let t = Instant::now();
        match run() {
            Ok(msg) => println!(
                "PASS {tag} {name}: {msg} [{:.1}s]",
                t.elapsed().as_secs_f64()
            ),
            Err(msg) => {
                failed += 1;
                println!(
                    "FAIL {tag} {name}: {msg} [{:.1}s]",
                    t.elapsed().as_secs_f64()
                );
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
