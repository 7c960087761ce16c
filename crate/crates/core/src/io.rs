//! JSON file formats for atoms, weights, measures and reports.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::certify::{HyperplaneReport, IdentityCheck, MeasureReport};
use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::lp::{Atom, AtomicMeasure};
use crate::optimize::MinResult;
use crate::region::SymmetricAtom;
use crate::threshold::ThresholdResult;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomsFile {
    pub atoms: Vec<Atom>,
    /// Accepted so that a whole measure fits one file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<Rational>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsFile {
    pub weights: Vec<Rational>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

pub fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

pub fn parse_atoms(s: &str) -> Result<AtomsFile> {
    let f: AtomsFile =
        serde_json::from_str(s).map_err(|e| Error::Input(format!("atoms file: {e}")))?;
    if f.atoms.is_empty() {
        return Err(Error::Input("atoms file: no atoms".into()));
    }
    for a in &f.atoms {
        if let Atom::Pair(p) = a {
            SymmetricAtom::new(p.e1.clone(), p.e2.clone())?;
        }
    }
    Ok(f)
}

pub fn read_atoms(path: &Path) -> Result<AtomsFile> {
    parse_atoms(&read(path)?)
}

pub fn parse_weights(s: &str) -> Result<Vec<Rational>> {
    let f: WeightsFile =
        serde_json::from_str(s).map_err(|e| Error::Input(format!("weights file: {e}")))?;
    Ok(f.weights)
}

pub fn read_weights(path: &Path) -> Result<Vec<Rational>> {
    parse_weights(&read(path)?)
}

pub fn measure_to_json(m: &AtomicMeasure) -> String {
    let f = AtomsFile {
        atoms: m.atoms.clone(),
        weights: Some(m.weights.clone()),
    };
    serde_json::to_string_pretty(&f).expect("serializable")
}

/// Exact value plus a 20-digit decimal rendering.
pub fn number(q: &Rational) -> Value {
    json!({ "exact": q.to_string(), "decimal": q.to_decimal_string(20) })
}

pub fn min_result_json(m: &MinResult) -> Value {
    json!({
        "point": [m.point.0.to_sci(30), m.point.1.to_sci(30)],
        "value": m.value.to_sci(30),
        "kkt_residual": m.kkt_residual.to_sci(5),
        "active_set": m.active_set.iter().map(|a| format!("{a:?}")).collect::<Vec<_>>(),
        "converged": m.converged,
    })
}

pub fn hyperplane_report_json(r: &HyperplaneReport) -> Value {
    json!({
        "expectation": number(&r.expectation),
        "min": min_result_json(&r.min),
        "certified_bound": r.certified.bound,
        "achieved_gap": r.certified.achieved_gap,
        "lower_bound_converged": r.certified.converged,
        "margin": r.margin.to_sci(20),
        "verdict": r.verdict,
        "conclusion": r.conclusion,
    })
}

pub fn measure_report_json(r: &MeasureReport) -> Value {
    json!({
        "atoms": r.atoms.iter().map(|a| json!({"inside": a.inside, "slack": number(&a.slack)})).collect::<Vec<_>>(),
        "weights": r.weights.iter().map(number).collect::<Vec<_>>(),
        "weights_source": r.weights_source,
        "residuals": r.residuals.iter().map(number).collect::<Vec<_>>(),
        "max_residual": number(&r.max_residual),
        "farkas": r.farkas,
        "verdict": r.verdict,
    })
}

pub fn identities_json(checks: &[IdentityCheck]) -> Value {
    json!({ "identities": checks, "all_passed": checks.iter().all(|c| c.passed) })
}

pub fn threshold_json(t: &ThresholdResult) -> Value {
    json!({
        "case": t.case.case_letter().to_string(),
        "form": t.form,
        "dir": t.dir,
        "feasible_bound": number(&t.feasible_bound),
        "infeasible_bound": number(&t.infeasible_bound),
        "width": t.width().to_f64(),
        "iterations": t.iterations,
        "runtime_s": t.runtime.as_secs_f64(),
        "witness_atoms": t.witness.len(),
        "witness_verdict": t.witness_verdict,
        "separator_verdict": t.separator_verdict,
        "trace": t.trace.iter().map(|s| json!({"bound": s.bound.to_decimal_string(12), "feasible": s.feasible})).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atoms_round_trip() {
        let s = r#"{"atoms":[{"x":"0.5","y":"-1/3"},{"e1":"2","e2":"0"},{"x":1,"y":-2}]}"#;
        let f = parse_atoms(s).unwrap();
        assert_eq!(f.atoms.len(), 3);
        assert_eq!(
            f.atoms[0],
            Atom::point(Rational::new(1, 2), Rational::new(-1, 3))
        );
        assert!(matches!(f.atoms[1], Atom::Pair(_)));
        let back = serde_json::to_string(&f).unwrap();
        assert_eq!(parse_atoms(&back).unwrap().atoms, f.atoms);
    }

    #[test]
    fn bad_atoms() {
        assert!(parse_atoms(r#"{"atoms":[]}"#).is_err());
        assert!(parse_atoms(r#"{"atoms":[{"e1":"0","e2":"1"}]}"#).is_err());
        assert!(parse_atoms(r#"{"atoms":[{"x":"abc","y":"0"}]}"#).is_err());
        assert!(parse_atoms(r#"{"points":[]}"#).is_err());
        assert!(parse_weights(r#"{"weights":["1/2","1/2"]}"#).unwrap().len() == 2);
    }
}
