//! Line-oriented model files:
//!
//! ```text
//! [model]
//! name = ppour
//! kind = ode2
//! vars = x y
//! [params]
//! r = 3.0
//! [equations]
//! x = r*x*(1-x) - 1.5*x*y
//! y = 0.5*x*y - 0.25*y
//! [domain]
//! x = 0 2
//! y = 0 3
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{Kind, Model, ModelRecord};
use crate::error::{Error, Result};
use crate::expr::{is_identifier, parse, Binding, Expr};
use crate::phase1d::Model1D;
use crate::phase2d::{Domain, Model2D};

const SECTIONS: [&str; 4] = ["model", "params", "equations", "domain"];

type Section = BTreeMap<String, (usize, String)>;

fn format_err(line: usize, message: impl Into<String>) -> Error {
    Error::Format { line, message: message.into() }
}

fn split_sections(text: &str) -> Result<(BTreeMap<&'static str, (usize, Section)>, usize)> {
    let mut sections: BTreeMap<&'static str, (usize, Section)> = BTreeMap::new();
    let mut current: Option<&'static str> = None;
    let mut last = 0;
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        last = n;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(inner) = line.strip_prefix('[') {
            let name = inner
                .strip_suffix(']')
                .map(str::trim)
                .ok_or_else(|| format_err(n, format!("malformed section header '{line}'")))?;
            let Some(&known) = SECTIONS.iter().find(|s| **s == name) else {
                return Err(format_err(n, format!("unknown section [{name}]")));
            };
            if sections.contains_key(known) {
                return Err(format_err(n, format!("section [{known}] appears twice")));
            }
            sections.insert(known, (n, Section::new()));
            current = Some(known);
            continue;
        }
        let Some(section) = current else {
            return Err(format_err(n, "entry before any section header"));
        };
        let (key, value) = line.split_once('=').ok_or_else(|| format_err(n, "expected 'key = value'"))?;
        let (key, value) = (key.trim(), value.trim());
        if !is_identifier(key) {
            return Err(format_err(n, format!("invalid key '{key}'")));
        }
        if value.is_empty() {
            return Err(format_err(n, format!("missing value for '{key}'")));
        }
        let entries = &mut sections.get_mut(section).expect("section was inserted").1;
        if entries.insert(key.to_string(), (n, value.to_string())).is_some() {
            return Err(format_err(n, format!("duplicate key '{key}' in [{section}]")));
        }
    }
    Ok((sections, last))
}

fn number(line: usize, what: &str, s: &str) -> Result<f64> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format_err(line, format!("{what}: '{s}' is not a finite number"))),
    }
}

/// Parses a model file. The result carries no expectations.
pub fn parse_model_file(text: &str) -> Result<ModelRecord> {
    let (mut sections, last) = split_sections(text)?;
    let mut take =
        |name: &'static str| sections.remove(name).ok_or_else(|| format_err(last, format!("missing section [{name}]")));
    let (model_line, mut header) = take("model")?;
    let (eq_line, mut equations) = take("equations")?;
    let (dom_line, mut domain) = take("domain")?;
    let params_section = sections.remove("params").map(|s| s.1).unwrap_or_default();

    let mut field =
        |key: &str| header.remove(key).ok_or_else(|| format_err(model_line, format!("[model] needs a '{key}' entry")));
    let (_, name) = field("name")?;
    let (kind_line, kind) = field("kind")?;
    let (vars_line, vars) = field("vars")?;
    if let Some((key, (n, _))) = header.into_iter().next() {
        return Err(format_err(n, format!("unknown key '{key}' in [model]")));
    }
    let kind = match kind.as_str() {
        "ode1" => Kind::Ode1,
        "ode2" => Kind::Ode2,
        other => return Err(format_err(kind_line, format!("kind must be ode1 or ode2, got '{other}'"))),
    };
    let vars: Vec<&str> = vars.split_whitespace().collect();
    let want = if kind == Kind::Ode1 { 1 } else { 2 };
    if vars.len() != want {
        return Err(format_err(vars_line, format!("{} needs {want} variable(s), got {}", kind.as_str(), vars.len())));
    }
    for v in &vars {
        if !is_identifier(v) {
            return Err(format_err(vars_line, format!("invalid variable name '{v}'")));
        }
    }
    if want == 2 && vars[0] == vars[1] {
        return Err(format_err(vars_line, format!("variable '{}' listed twice", vars[0])));
    }

    let mut params = Binding::new();
    for (key, (n, value)) in &params_section {
        if vars.contains(&key.as_str()) {
            return Err(format_err(*n, format!("parameter '{key}' shadows a variable")));
        }
        params.set(key, number(*n, key, value)?);
    }

    let mut rhs: Vec<Expr> = Vec::new();
    let mut bounds: Vec<(f64, f64)> = Vec::new();
    for v in &vars {
        let (n, text) =
            equations.remove(*v).ok_or_else(|| format_err(eq_line, format!("no equation for '{v}' in [equations]")))?;
        rhs.push(parse(&text).map_err(|e| format_err(n, format!("equation for '{v}': {e}")))?);
        let (n, text) =
            domain.remove(*v).ok_or_else(|| format_err(dom_line, format!("no bounds for '{v}' in [domain]")))?;
        let parts: Vec<&str> = text.split_whitespace().collect();
        let [lo, hi] = parts[..] else {
            return Err(format_err(n, format!("bounds for '{v}' must be two numbers")));
        };
        let (lo, hi) = (number(n, v, lo)?, number(n, v, hi)?);
        if !(lo < hi) {
            return Err(format_err(n, format!("bounds for '{v}' are inverted: {lo} >= {hi}")));
        }
        bounds.push((lo, hi));
    }
    for (section, rest) in [("equations", equations), ("domain", domain)] {
        if let Some((key, (n, _))) = rest.into_iter().next() {
            return Err(format_err(n, format!("'{key}' in [{section}] is not a declared variable")));
        }
    }

    let model = match kind {
        Kind::Ode1 => Model::OneD(Model1D::new(rhs.remove(0), vars[0], params, bounds[0])?),
        Kind::Ode2 => {
            let g = rhs.pop().expect("two equations");
            let f = rhs.pop().expect("two equations");
            Model::TwoD(Model2D::new(f, g, (vars[0], vars[1]), params, Domain::new(bounds[0], bounds[1])?)?)
        }
    };
    Ok(ModelRecord { name, model, expectations: Vec::new() })
}

/// Writes a record back in the file format. Numbers use the shortest
/// representation that parses back to the same value.
pub fn serialize(record: &ModelRecord) -> String {
    let mut out = String::new();
    let params: &Binding;
    let mut rows: Vec<(&str, &Expr, (f64, f64))> = Vec::new();
    match &record.model {
        Model::OneD(m) => {
            params = &m.params;
            rows.push((&m.var, &m.f, (m.lo, m.hi)));
        }
        Model::TwoD(m) => {
            params = &m.params;
            let d = &m.domain;
            rows.push((&m.xname, &m.f, (d.x_lo, d.x_hi)));
            rows.push((&m.yname, &m.g, (d.y_lo, d.y_hi)));
        }
    }
    let vars: Vec<&str> = rows.iter().map(|r| r.0).collect();
    let _ =
        writeln!(out, "[model]\nname = {}\nkind = {}\nvars = {}", record.name, record.kind().as_str(), vars.join(" "));
    if !params.is_empty() {
        out.push_str("[params]\n");
        for (k, v) in params.iter() {
            let _ = writeln!(out, "{k} = {v:?}");
        }
    }
    out.push_str("[equations]\n");
    for (v, e, _) in &rows {
        let _ = writeln!(out, "{v} = {e}");
    }
    out.push_str("[domain]\n");
    for (v, _, (lo, hi)) in &rows {
        let _ = writeln!(out, "{v} = {lo:?} {hi:?}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::builtin_model;
    use super::*;

    const PPOUR: &str = "\
[model]
name = ppour
kind = ode2
vars = x y
[params]
r = 3.0
[equations]
x = r*x*(1-x) - 1.5*x*y   # prey
y = 0.5*x*y - 0.25*y
[domain]
x = 0 2
y = 0 3
";

    #[test]
    fn reads_the_ppour_file() {
        let rec = parse_model_file(PPOUR).unwrap();
        let m = rec.model_2d().unwrap();
        let b = builtin_model("ppour").unwrap();
        let sys = m.compile().unwrap();
        let reference = b.model_2d().unwrap().compile().unwrap();
        for p in [[0.3, 0.7], [1.1, 2.9], [2.0, 0.0]] {
            assert_eq!(sys.rhs(p).unwrap(), reference.rhs(p).unwrap());
        }
        assert_eq!(m.domain, b.model_2d().unwrap().domain);
    }

    #[test]
    fn missing_section_is_named() {
        let text = PPOUR.split("[equations]").next().unwrap().to_string() + "[domain]\nx = 0 2\ny = 0 3\n";
        let e = parse_model_file(&text).unwrap_err();
        assert!(e.to_string().contains("[equations]"), "{e}");
    }

    #[test]
    fn undeclared_identifier() {
        let text = PPOUR.replace("0.25*y", "q*y");
        assert_eq!(parse_model_file(&text).unwrap_err().to_string(), "undeclared identifier q");
    }

    #[test]
    fn format_errors_carry_lines() {
        let cases = [
            (PPOUR.replace("x = 0 2", "x = 2 0"), 11),
            (PPOUR.replace("kind = ode2", "kind = ode3"), 3),
            (PPOUR.replace("r = 3.0", "r = 3.0\nr = 4.0"), 7),
            (PPOUR.replace("y = 0.5", "y 0.5"), 9),
            (PPOUR.replace("[params]", "[parameters]"), 5),
        ];
        for (text, line) in cases {
            match parse_model_file(&text) {
                Err(Error::Format { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("expected a format error, got {other:?}"),
            }
        }
    }

    #[test]
    fn single_variable_files() {
        let text = "[model]\nname = lg\nkind = ode1\nvars = n\n[equations]\nn = 2*n*(1 - n/3)\n[domain]\nn = -1 5\n";
        let rec = parse_model_file(text).unwrap();
        assert_eq!(rec.kind(), Kind::Ode1);
        let bad = text.replace("vars = n", "vars = n m");
        assert!(matches!(parse_model_file(&bad), Err(Error::Format { line: 4, .. })));
    }

    #[test]
    fn builtins_round_trip() {
        for name in super::super::builtin_names() {
            let rec = builtin_model(name).unwrap();
            let back = parse_model_file(&serialize(&rec)).unwrap();
            assert_eq!(back.model, rec.model, "{name}");
        }
    }
}
