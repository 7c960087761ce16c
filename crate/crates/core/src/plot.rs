//! Standalone SVG scatter plots of atoms over `[-2.2, 2.2]²`.

use std::fmt::Write;

use crate::error::Result;
use crate::lp::Atom;
use crate::region::{Form, Region};

const SCALE: f64 = 100.0;
const HALF: f64 = 2.2;

fn px(x: f64) -> f64 {
    (x + HALF) * SCALE
}

fn py(y: f64) -> f64 {
    (HALF - y) * SCALE
}

/// Plane coordinates of an atom; a conjugate pair is drawn at `(s, t)`, `s ≤ t`.
pub fn atom_xy(a: &Atom) -> Result<(f64, f64)> {
    Ok(match a {
        Atom::Point { x, y } => (x.to_f64(), y.to_f64()),
        Atom::Pair(p) => {
            let (s, t) = p.roots(30)?;
            (s.to_f64(), t.to_f64())
        }
    })
}

fn boundary(r: &Region) -> Vec<Vec<(f64, f64)>> {
    let Some(c) = &r.constraint else {
        return Vec::new();
    };
    let (x0, x1) = (r.x_range.0.to_f64(), r.x_range.1.to_f64());
    let (y0, y1) = (r.y_range.0.to_f64(), r.y_range.1.to_f64());
    let u = c.bound.to_f64();
    let inside = |y: f64| y >= y0 - 1e-12 && y <= y1 + 1e-12;
    let mut paths = Vec::new();
    let mut cur = Vec::new();
    let n = 400;
    for i in 0..=n {
        let x = x0 + (x1 - x0) * i as f64 / n as f64;
        let y = match c.form {
            Form::Sum => Some(u - x),
            Form::Product if x != 0.0 => Some(u / x),
            Form::Product => None,
        };
        match y {
            Some(y) if inside(y) => cur.push((x, y)),
            _ => {
                if cur.len() > 1 {
                    paths.push(std::mem::take(&mut cur));
                }
                cur.clear();
            }
        }
    }
    if cur.len() > 1 {
        paths.push(cur);
    }
    paths
}

/// Renders the atoms, with the constraint boundary of `region` when given.
pub fn scatter_svg(atoms: &[Atom], region: Option<&Region>, title: &str) -> Result<String> {
    let size = 2.0 * HALF * SCALE;
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    )
    .unwrap();
    writeln!(s, "<title>{}</title>", escape(title)).unwrap();
    writeln!(
        s,
        r##"<rect x="0" y="0" width="{size}" height="{size}" fill="white" stroke="black"/>"##
    )
    .unwrap();
    for k in -2..=2 {
        let k = k as f64;
        let style = if k == 0.0 {
            r##"stroke="#888" stroke-width="1.2""##
        } else {
            r##"stroke="#ccc" stroke-width="1""##
        };
        writeln!(
            s,
            r#"<line x1="{:.2}" y1="0" x2="{:.2}" y2="{size}" {style}/>"#,
            px(k),
            px(k)
        )
        .unwrap();
        writeln!(
            s,
            r#"<line x1="0" y1="{:.2}" x2="{size}" y2="{:.2}" {style}/>"#,
            py(k),
            py(k)
        )
        .unwrap();
    }
    if let Some(r) = region {
        for path in boundary(r) {
            let pts: Vec<String> = path
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
            writeln!(s, r##"<polyline class="boundary" points="{}" fill="none" stroke="#c33" stroke-width="1.5"/>"##, pts.join(" ")).unwrap();
        }
    }
    for a in atoms {
        let (x, y) = atom_xy(a)?;
        writeln!(
            s,
            r#"<circle class="atom" cx="{:.2}" cy="{:.2}" r="4" fill="black"/>"#,
            px(x),
            py(y)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
