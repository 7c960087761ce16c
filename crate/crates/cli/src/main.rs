//! `frobound`: verify and recompute moment-constraint certificates.
//!
//! Exit codes: 0 success or valid, 1 invalid certificate, 2 input error,
//! 3 indeterminate.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use frobound::certify::{self, Verdict, VerifyOptions};
use frobound::exact::{DEFAULT_DIGITS, MIN_DIGITS};
use frobound::io;
use frobound::lp::Atom;
use frobound::moments::{BasisId, MomentVector};
use frobound::optimize::{global_min, MinOptions};
use frobound::region::{Direction, Form};
use frobound::threshold::{threshold, ThresholdOptions};
use frobound::{data, oracle, plot, Error, Poly2, Rational, Region};

#[derive(Parser, Debug)]
#[command(name = "frobound", version, about = "Moment-constraint certificates for Frobenius trace statistics")]
struct Cli {
    /// Working precision in significant digits (at least 30).
    #[arg(long, global = true, visible_alias = "precision", env = "REPRO_PRECISION", default_value_t = DEFAULT_DIGITS)]
    digits: usize,
    /// Grid points per axis for the minimization search (at least 33).
    #[arg(long, global = true, default_value_t = 257)]
    grid_n: usize,
    /// Seed for all sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print reports as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Run the brute-force oracle battery and exit.
    #[arg(long)]
    self_check: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the feature basis and target moments of a case.
    Moments {
        /// `a` (generic) or `b` (split).
        #[arg(long)]
        case: String,
    },
    /// Verify a certificate.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Bisect for the optimal region bound.
    Threshold {
        /// `a` (generic) or `b` (split).
        #[arg(long)]
        case: String,
        #[arg(long, value_enum)]
        form: FormArg,
        #[arg(long, value_enum)]
        dir: DirArg,
        /// Bracket width to stop at.
        #[arg(long)]
        tol: f64,
        /// Write the witness, separator and regions into this directory.
        #[arg(long)]
        emit_certificates: Option<PathBuf>,
    },
    /// Check the algebraic identities behind the generic-case bounds.
    Identities,
    /// Global minimum of a polynomial over a region.
    Minimize {
        /// `builtin:<q|r|p1|p2>` or a polynomial JSON file.
        #[arg(long)]
        poly: String,
        /// `builtin:<preset>`, a region JSON file, or inline such as `sum>=-2.47`.
        #[arg(long)]
        region: String,
    },
    /// Scatter plot of atoms as SVG.
    Plot {
        /// `builtin:<name>` or an atoms JSON file.
        #[arg(long)]
        atoms: String,
        /// Draw this region's boundary.
        #[arg(long)]
        region: Option<String>,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum VerifyCommand {
    /// A polynomial whose expectation lies below its minimum on the region.
    Hyperplane {
        /// `builtin:<q|r|p1|p2>` or a polynomial JSON file.
        #[arg(long)]
        poly: String,
        /// `builtin:<preset>`, a region JSON file, or inline such as `sum>=-2.47`.
        #[arg(long)]
        region: String,
        /// `a` (generic) or `b` (split).
        #[arg(long)]
        case: String,
        /// Target gap of the certified lower bound.
        #[arg(long, default_value_t = 0.01)]
        gap: f64,
    },
    /// An atomic measure on the region reproducing the target moments.
    Measure(MeasureArgs),
}

#[derive(Args, Debug)]
struct MeasureArgs {
    /// `builtin:<name>` or an atoms JSON file.
    #[arg(long)]
    atoms: String,
    /// Weights JSON file; solved for by LP when neither this nor the atoms file gives them.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// `builtin:<preset>`, a region JSON file, or inline such as `sum>=-2.47`.
    #[arg(long)]
    region: String,
    /// `a` (generic) or `b` (split).
    #[arg(long)]
    case: String,
    /// Residual tolerance; defaults to 0 for case a and 1e-9 for case b.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormArg {
    Sum,
    Product,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DirArg {
    Geq,
    Leq,
}

/// Failure with its exit code.
struct Fail(u8, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Solver(_) => 3,
            _ => 2,
        };
        Fail(code, e.to_string())
    }
}

type Out = std::result::Result<u8, Fail>;

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Valid | Verdict::ValidCoarse => 0,
        Verdict::Invalid => 1,
        Verdict::Indeterminate => 3,
    }
}

fn read_file(path: &Path) -> Result<String, Fail> {
    std::fs::read_to_string(path).map_err(|e| Fail(2, format!("{}: {e}", path.display())))
}

fn load_poly(spec: &str) -> Result<Poly2, Fail> {
    if let Some(name) = spec.strip_prefix("builtin:") {
        return data::polynomial(name).ok_or_else(|| {
            Fail(2, format!("unknown polynomial {name:?} (known: {})", data::POLYNOMIAL_NAMES.join(", ")))
        });
    }
    Ok(Poly2::from_json(&read_file(Path::new(spec))?)?)
}

fn load_region(spec: &str) -> Result<Region, Fail> {
    if let Some(name) = spec.strip_prefix("builtin:") {
        return data::region_preset(name).ok_or_else(|| Fail(2, format!("unknown region preset {name:?}")));
    }
    let path = Path::new(spec);
    if spec.ends_with(".json") || path.is_file() {
        return Ok(Region::from_json(&read_file(path)?)?);
    }
    Ok(Region::parse_inline(spec)?)
}

fn load_atoms(spec: &str) -> Result<(Vec<Atom>, Option<Vec<Rational>>), Fail> {
    if let Some(name) = spec.strip_prefix("builtin:") {
        if let Some(pts) = data::points(name) {
            return Ok((pts.into_iter().map(|(x, y)| Atom::point(x, y)).collect(), None));
        }
        if let Some(w) = data::symmetric_witness(name) {
            return Ok((w.atoms.into_iter().map(Atom::Pair).collect(), Some(w.weights)));
        }
        return Err(Fail(2, format!("unknown atom set {name:?}")));
    }
    let f = io::read_atoms(Path::new(spec))?;
    Ok((f.atoms, f.weights))
}

fn case(s: &str) -> Result<BasisId, Fail> {
    Ok(BasisId::parse_case(s)?)
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn show(q: &Rational) -> String {
    if q.is_integer() {
        q.to_string()
    } else {
        format!("{q} ({})", q.to_decimal_string(15))
    }
}

fn run(cli: &Cli) -> Out {
    if cli.digits < MIN_DIGITS {
        return Err(Fail(2, format!("precision {} below minimum {MIN_DIGITS}", cli.digits)));
    }
    if cli.grid_n < 33 {
        return Err(Fail(2, format!("grid size {} below minimum 33", cli.grid_n)));
    }
    let min_opts = MinOptions { grid_n: cli.grid_n, digits: cli.digits, ..MinOptions::default() };
    if cli.self_check {
        let reports = oracle::self_check(cli.seed)?;
        let ok = reports.iter().all(|r| r.pass);
        if cli.json {
            print_json(&json!({ "reports": reports, "all_passed": ok }));
        } else {
            for r in &reports {
                println!(
                    "{} {}: oracle {:.6e}, main {:.6e}, discrepancy {:.3e} (tolerance {:.3e})",
                    if r.pass { "PASS" } else { "FAIL" },
                    r.quantity,
                    r.oracle,
                    r.main,
                    r.discrepancy,
                    r.tolerance
                );
            }
        }
        return Ok(if ok { 0 } else { 1 });
    }
    let Some(command) = &cli.command else {
        return Err(Fail(2, "no command given (see --help)".into()));
    };
    match command {
        Command::Moments { case: c } => {
            let m = MomentVector::for_case(case(c)?);
            let labels = m.basis.labels();
            if cli.json {
                let rows: Vec<Value> = labels
                    .iter()
                    .zip(&m.values)
                    .map(|(l, v)| json!({ "feature": l, "value": io::number(v) }))
                    .collect();
                print_json(&json!({ "case": c.to_ascii_lowercase(), "moments": rows }));
            } else {
                for (l, v) in labels.iter().zip(&m.values) {
                    println!("{l} {}", show(v));
                }
            }
            Ok(0)
        }
        Command::Verify(VerifyCommand::Hyperplane { poly, region, case: c, gap }) => {
            let p = load_poly(poly)?;
            let r = load_region(region)?;
            let m = MomentVector::for_case(case(c)?);
            let opts = VerifyOptions { min: min_opts, gap: *gap, ..VerifyOptions::default() };
            let rep = certify::verify_hyperplane(&p, &r, &m, &opts)?;
            if cli.json {
                print_json(&io::hyperplane_report_json(&rep));
            } else {
                let (x, y) = &rep.min.point;
                println!("verdict: {}", rep.verdict);
                println!("expectation: {}", show(&rep.expectation));
                println!("minimum: {} at ({}, {})", rep.min.value.to_sci(25), x.to_sci(20), y.to_sci(20));
                println!("active constraints: {:?}", rep.min.active_set);
                println!("margin: {}", rep.margin.to_sci(12));
                println!(
                    "certified lower bound: {:.9} (gap {:.3e})",
                    rep.certified.bound, rep.certified.achieved_gap
                );
                println!("conclusion: {}", rep.conclusion);
            }
            Ok(verdict_code(rep.verdict))
        }
        Command::Verify(VerifyCommand::Measure(a)) => {
            let id = case(&a.case)?;
            let (atoms, packaged) = load_atoms(&a.atoms)?;
            let weights = match &a.weights {
                Some(path) => Some(io::parse_weights(&read_file(path)?)?),
                None => packaged,
            };
            let r = load_region(&a.region)?;
            let m = MomentVector::for_case(id);
            let tol = a.tol.unwrap_or(match id {
                BasisId::A5 => 0.0,
                BasisId::B32 => 1e-9,
            });
            let rep = certify::verify_measure(&atoms, weights.as_deref(), &r, &m, tol)?;
            if cli.json {
                print_json(&io::measure_report_json(&rep));
            } else {
                println!("verdict: {}", rep.verdict);
                println!("weights: {:?}", rep.weights_source);
                for (i, (c, w)) in rep.atoms.iter().zip(&rep.weights).enumerate() {
                    println!(
                        "atom {i}: inside {}, slack {}, weight {}",
                        c.inside,
                        c.slack.to_decimal_string(12),
                        w.to_decimal_string(15)
                    );
                }
                for (l, res) in m.basis.labels().iter().zip(&rep.residuals) {
                    println!("residual {l}: {:.3e}", res.to_f64());
                }
                println!("max residual: {:.3e}", rep.max_residual.to_f64());
                if rep.farkas.is_some() {
                    println!("target outside the hull of the atoms (Farkas certificate attached in JSON output)");
                }
            }
            Ok(verdict_code(rep.verdict))
        }
        Command::Threshold { case: c, form, dir, tol, emit_certificates } => {
            let id = case(c)?;
            let form = match form {
                FormArg::Sum => Form::Sum,
                FormArg::Product => Form::Product,
            };
            let dir = match dir {
                DirArg::Geq => Direction::Geq,
                DirArg::Leq => Direction::Leq,
            };
            let mut opts = ThresholdOptions::default();
            opts.feasibility.grid_n = match id {
                BasisId::A5 => 17,
                BasisId::B32 => 33,
            };
            opts.verify.min.digits = cli.digits;
            let t = threshold(id, form, dir, *tol, &opts)?;
            let mut paths = Vec::new();
            if let Some(dir) = emit_certificates {
                std::fs::create_dir_all(dir).map_err(|e| Fail(2, format!("{}: {e}", dir.display())))?;
                let files = [
                    ("witness.json", io::measure_to_json(&t.witness)),
                    ("separator.json", t.separator.to_json()),
                    ("feasible_region.json", t.feasible_region().to_json()),
                    ("infeasible_region.json", t.infeasible_region().to_json()),
                    ("threshold.json", serde_json::to_string_pretty(&io::threshold_json(&t)).expect("serializable")),
                ];
                for (name, body) in files {
                    let p = dir.join(name);
                    io::write(&p, &body)?;
                    paths.push(p);
                }
            }
            if cli.json {
                let mut v = io::threshold_json(&t);
                v["files"] = json!(paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>());
                print_json(&v);
            } else {
                println!(
                    "bracket: feasible at {}, infeasible at {}",
                    t.feasible_bound.to_decimal_string(10),
                    t.infeasible_bound.to_decimal_string(10)
                );
                println!("width: {:.3e}, bisection steps: {}, runtime {:.1}s", t.width().to_f64(), t.iterations, t.runtime.as_secs_f64());
                println!("witness: {} atoms, {}", t.witness.len(), t.witness_verdict);
                println!("separator: {}", t.separator_verdict);
                for p in &paths {
                    println!("wrote {}", p.display());
                }
            }
            let ok = t.witness_verdict.is_valid() && t.separator_verdict.is_valid();
            Ok(if ok { 0 } else { 3 })
        }
        Command::Identities => {
            let checks = certify::verify_identity_suite();
            let ok = checks.iter().all(|c| c.passed);
            if cli.json {
                print_json(&io::identities_json(&checks));
            } else {
                for c in &checks {
                    match &c.mismatch {
                        None => println!("PASS {}", c.name),
                        Some(m) => println!("FAIL {}: {m}", c.name),
                    }
                }
            }
            Ok(if ok { 0 } else { 1 })
        }
        Command::Minimize { poly, region } => {
            let p = load_poly(poly)?;
            let r = load_region(region)?;
            let m = global_min(&p, &r, &min_opts)?;
            if cli.json {
                print_json(&io::min_result_json(&m));
            } else {
                println!("value: {}", m.value.to_sci(30));
                println!("point: ({}, {})", m.point.0.to_sci(25), m.point.1.to_sci(25));
                println!("active constraints: {:?}", m.active_set);
                println!("kkt residual: {}", m.kkt_residual.to_sci(3));
                println!("converged: {}", m.converged);
            }
            Ok(0)
        }
        Command::Plot { atoms, region, output } => {
            let (atoms, _) = load_atoms(atoms)?;
            let r = region.as_deref().map(load_region).transpose()?;
            let svg = plot::scatter_svg(&atoms, r.as_ref(), &output.display().to_string())?;
            io::write(output, &svg)?;
            if !cli.json {
                println!("wrote {} ({} atoms)", output.display(), atoms.len());
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
