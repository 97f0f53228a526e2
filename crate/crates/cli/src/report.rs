//! Report types and their JSON and text renderings.
//!
//! JSON goes through `serde_json::Value`, whose maps are ordered, so keys
//! come out sorted and a parse/print cycle reproduces the same bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use phaseplane::algebra2::{EigenSystem, EigenVectors, RootPair, Vec2};
use phaseplane::corpus::{Model, ModelRecord};
use phaseplane::cycles::{ContinuationPoint, HopfResult};
use phaseplane::linsys::{IvpCoefficients, LinearSolution, SolutionKind};
use phaseplane::phase1d::{Direction, FoldResult, PhaseLine, Stability};
use phaseplane::phase2d::{classify_from_signs, derive_sign_matrix, ClineKind, EquilibriumReport, NullClineSet};
use phaseplane::{Classification, Mat2};
use serde::Serialize;
use serde_json::Value;

pub fn canonical_json(value: &impl Serialize) -> String {
    let mut v = serde_json::to_value(value).expect("reports serialize");
    clear_negative_zero(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
    s.push('\n');
    s
}

// -0.0 and 0.0 compare equal but print differently
fn clear_negative_zero(v: &mut Value) {
    match v {
        Value::Number(n) if n.as_f64() == Some(0.0) && n.is_f64() => *v = Value::from(0.0),
        Value::Array(items) => items.iter_mut().for_each(clear_negative_zero),
        Value::Object(map) => map.values_mut().for_each(clear_negative_zero),
        _ => {}
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ComplexJson {
    re: f64,
    im: f64,
}

fn eigenvalues_json(values: &RootPair) -> Vec<ComplexJson> {
    values.as_complex().iter().map(|z| ComplexJson { re: z.re, im: z.im }).collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct VectorJson {
    re: Vec2,
    im: Vec2,
}

fn eigenvectors_json(vectors: &EigenVectors) -> Vec<VectorJson> {
    match *vectors {
        EigenVectors::Real { v1, v2 } => {
            vec![VectorJson { re: v1, im: [0.0, 0.0] }, VectorJson { re: v2, im: [0.0, 0.0] }]
        }
        EigenVectors::Complex { vr, vi } => {
            vec![VectorJson { re: vr, im: vi }, VectorJson { re: vr, im: [-vi[0], -vi[1]] }]
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct ModelInfo {
    name: String,
    kind: &'static str,
    vars: Vec<String>,
    params: BTreeMap<String, f64>,
    equations: BTreeMap<String, String>,
    domain: BTreeMap<String, [f64; 2]>,
}

impl ModelInfo {
    fn of(r: &ModelRecord) -> Self {
        let mut info = ModelInfo {
            name: r.name.clone(),
            kind: r.kind().as_str(),
            vars: Vec::new(),
            params: BTreeMap::new(),
            equations: BTreeMap::new(),
            domain: BTreeMap::new(),
        };
        let mut add = |var: &str, eq: String, bounds: [f64; 2]| {
            info.vars.push(var.to_string());
            info.equations.insert(var.to_string(), eq);
            info.domain.insert(var.to_string(), bounds);
        };
        let params = match &r.model {
            Model::OneD(m) => {
                add(&m.var, m.f.to_string(), [m.lo, m.hi]);
                &m.params
            }
            Model::TwoD(m) => {
                let d = &m.domain;
                add(&m.xname, m.f.to_string(), [d.x_lo, d.x_hi]);
                add(&m.yname, m.g.to_string(), [d.y_lo, d.y_hi]);
                &m.params
            }
        };
        info.params = params.iter().map(|(k, v)| (k.to_string(), v)).collect();
        info
    }
}

#[derive(Debug, Clone, Serialize)]
struct PlanarEquilibrium {
    x: f64,
    y: f64,
    jacobian: [[f64; 2]; 2],
    det: f64,
    tr: f64,
    discriminant: f64,
    eigenvalues: Vec<ComplexJson>,
    class: Classification,
}

#[derive(Debug, Clone, Serialize)]
struct ScalarEquilibrium {
    x: f64,
    slope: f64,
    class: Stability,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
enum EquilibriumJson {
    Planar(PlanarEquilibrium),
    Scalar(ScalarEquilibrium),
}

#[derive(Debug, Clone, Serialize)]
struct ClineSummary {
    count: usize,
    bboxes: Vec<[f64; 4]>,
}

#[derive(Debug, Clone, Serialize)]
struct NullclineJson {
    grid: usize,
    x: ClineSummary,
    y: ClineSummary,
}

#[derive(Debug, Clone, Serialize)]
struct SegmentJson {
    from: f64,
    to: f64,
    direction: Direction,
}

#[derive(Debug, Clone, Serialize)]
struct BasinJson {
    attractor: f64,
    lo: f64,
    hi: f64,
}

#[derive(Debug, Clone, Serialize)]
struct PhaseLineJson {
    arrows: Vec<SegmentJson>,
    basins: Vec<BasinJson>,
    escapes: Vec<SegmentJson>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    model: ModelInfo,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    equilibria: Vec<EquilibriumJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nullclines: Option<NullclineJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    phase_line: Option<PhaseLineJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scan: Option<ScanReport>,
    version: &'static str,
    input_sha256: String,
}

fn summary(set: &NullClineSet, kind: ClineKind) -> ClineSummary {
    let bboxes: Vec<[f64; 4]> = set.of_kind(kind).map(|p| p.bbox()).collect();
    ClineSummary { count: bboxes.len(), bboxes }
}

impl Report {
    fn base(r: &ModelRecord, digest: &str) -> Self {
        Report {
            model: ModelInfo::of(r),
            equilibria: Vec::new(),
            nullclines: None,
            phase_line: None,
            scan: None,
            version: env!("CARGO_PKG_VERSION"),
            input_sha256: digest.to_string(),
        }
    }

    pub fn planar(
        r: &ModelRecord,
        eqs: &[EquilibriumReport],
        clines: &NullClineSet,
        grid: usize,
        digest: &str,
    ) -> Self {
        let mut rep = Report::base(r, digest);
        rep.equilibria = eqs
            .iter()
            .map(|e| {
                EquilibriumJson::Planar(PlanarEquilibrium {
                    x: e.location[0],
                    y: e.location[1],
                    jacobian: e.jacobian.rows(),
                    det: e.det,
                    tr: e.tr,
                    discriminant: e.discriminant,
                    eigenvalues: eigenvalues_json(&e.eigen.values),
                    class: e.classification,
                })
            })
            .collect();
        rep.nullclines =
            Some(NullclineJson { grid, x: summary(clines, ClineKind::X), y: summary(clines, ClineKind::Y) });
        rep
    }

    pub fn scalar(r: &ModelRecord, line: &PhaseLine, digest: &str) -> Self {
        let mut rep = Report::base(r, digest);
        rep.equilibria = line
            .equilibria
            .iter()
            .map(|e| EquilibriumJson::Scalar(ScalarEquilibrium { x: e.x, slope: e.slope, class: e.stability }))
            .collect();
        let seg = |a: &phaseplane::phase1d::Arrow| SegmentJson { from: a.from, to: a.to, direction: a.direction };
        rep.phase_line = Some(PhaseLineJson {
            arrows: line.arrows.iter().map(seg).collect(),
            basins: line.basins.iter().map(|b| BasinJson { attractor: b.attractor, lo: b.lo, hi: b.hi }).collect(),
            escapes: line.escapes.iter().map(seg).collect(),
        });
        rep
    }

    pub fn scan(r: &ModelRecord, scan: ScanReport, digest: &str) -> Self {
        let mut rep = Report::base(r, digest);
        rep.scan = Some(scan);
        rep
    }

    pub fn text(&self, r: &ModelRecord) -> String {
        let mut out = String::new();
        let m = &self.model;
        let _ = writeln!(out, "model {} ({})", m.name, m.kind);
        for v in &m.vars {
            let [lo, hi] = m.domain[v];
            let _ = writeln!(out, "  d{v}/dt = {}    {v} in [{lo}, {hi}]", m.equations[v]);
        }
        if !m.params.is_empty() {
            let ps: Vec<String> = m.params.iter().map(|(k, v)| format!("{k} = {v}")).collect();
            let _ = writeln!(out, "  {}", ps.join(", "));
        }
        let _ = writeln!(out, "equilibria: {}", self.equilibria.len());
        for e in &self.equilibria {
            match e {
                EquilibriumJson::Planar(e) => {
                    let ev: Vec<String> = e
                        .eigenvalues
                        .iter()
                        .map(|z| if z.im == 0.0 { format!("{}", z.re) } else { format!("{}{:+}i", z.re, z.im) })
                        .collect();
                    let _ = writeln!(
                        out,
                        "  ({}, {})  {}  det = {}  tr = {}  D = {}  eigenvalues {}",
                        e.x,
                        e.y,
                        e.class,
                        e.det,
                        e.tr,
                        e.discriminant,
                        ev.join(", ")
                    );
                    if let Some(m2) = r.model_2d() {
                        let h = 1e-3 * m2.domain.width().min(m2.domain.height());
                        if let Ok(s) = derive_sign_matrix(m2, [e.x, e.y], h) {
                            let _ = writeln!(out, "      signs {s}: {:?}", classify_from_signs(&s));
                        }
                    }
                }
                EquilibriumJson::Scalar(e) => {
                    let _ = writeln!(out, "  {} = {}  {:?}  f' = {}", m.vars[0], e.x, e.class, e.slope);
                }
            }
        }
        if let Some(n) = &self.nullclines {
            let _ = writeln!(
                out,
                "null-clines (grid {}): {} x-cline piece(s), {} y-cline piece(s)",
                n.grid, n.x.count, n.y.count
            );
        }
        if let Some(pl) = &self.phase_line {
            for a in &pl.arrows {
                let _ = writeln!(out, "  ({}, {}) flows {:?}", a.from, a.to, a.direction);
            }
            for b in &pl.basins {
                let _ = writeln!(out, "  basin of {}: ({}, {})", b.attractor, b.lo, b.hi);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
enum ScanRow {
    Hopf { param: f64, x: f64, y: f64, tr: f64, det: f64 },
    Fold { param: f64, equilibria: Vec<f64> },
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    mode: &'static str,
    param: String,
    range: [f64; 2],
    steps: usize,
    rows: Vec<ScanRow>,
    critical: Option<f64>,
    bracket: Option<[f64; 2]>,
}

impl ScanReport {
    pub fn hopf(
        param: &str,
        range: (f64, f64),
        steps: usize,
        path: &[ContinuationPoint],
        r: Option<&HopfResult>,
    ) -> Self {
        ScanReport {
            mode: "hopf",
            param: param.to_string(),
            range: [range.0, range.1],
            steps,
            rows: path
                .iter()
                .map(|p| ScanRow::Hopf { param: p.param, x: p.location[0], y: p.location[1], tr: p.tr, det: p.det })
                .collect(),
            critical: r.map(|r| r.critical),
            bracket: r.map(|r| [r.bracket.0, r.bracket.1]),
        }
    }

    pub fn fold(param: &str, range: (f64, f64), steps: usize, r: Option<&FoldResult>) -> Self {
        ScanReport {
            mode: "fold",
            param: param.to_string(),
            range: [range.0, range.1],
            steps,
            rows: r
                .map(|r| {
                    r.rows
                        .iter()
                        .map(|row| ScanRow::Fold { param: row.param, equilibria: row.equilibria.clone() })
                        .collect()
                })
                .unwrap_or_default(),
            critical: r.map(|r| r.critical),
            bracket: r.map(|r| [r.bracket.0, r.bracket.1]),
        }
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        let p = &self.param;
        let _ = writeln!(
            out,
            "{} scan of {p} over [{}, {}], {} steps",
            self.mode, self.range[0], self.range[1], self.steps
        );
        match self.mode {
            "hopf" => {
                let _ = writeln!(out, "{p}\tx\ty\ttr\tdet");
            }
            _ => {
                let _ = writeln!(out, "{p}\tequilibria");
            }
        }
        for row in &self.rows {
            match row {
                ScanRow::Hopf { param, x, y, tr, det } => {
                    let _ = writeln!(out, "{param}\t{x}\t{y}\t{tr}\t{det}");
                }
                ScanRow::Fold { param, equilibria } => {
                    let xs: Vec<String> = equilibria.iter().map(|x| x.to_string()).collect();
                    let _ = writeln!(out, "{param}\t{}", xs.join(" "));
                }
            }
        }
        match (self.critical, self.bracket) {
            (Some(c), Some([lo, hi])) => {
                let _ = writeln!(out, "critical {p} = {c}  (bracket [{lo}, {hi}])");
            }
            _ => {
                let _ = writeln!(out, "no critical value of {p} in range");
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenReport {
    matrix: [[f64; 2]; 2],
    det: f64,
    tr: f64,
    discriminant: f64,
    eigenvalues: Vec<ComplexJson>,
    eigenvectors: Vec<VectorJson>,
    class: Classification,
}

impl EigenReport {
    pub fn new(a: &Mat2, es: &EigenSystem, class: Classification) -> Self {
        EigenReport {
            matrix: a.rows(),
            det: a.det(),
            tr: a.trace(),
            discriminant: a.discriminant(),
            eigenvalues: eigenvalues_json(&es.values),
            eigenvectors: eigenvectors_json(&es.vectors),
            class,
        }
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "A = {:?}", self.matrix);
        let _ = writeln!(out, "det = {}  tr = {}  D = {}  class {}", self.det, self.tr, self.discriminant, self.class);
        for (z, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            if z.im == 0.0 {
                let _ = writeln!(out, "lambda = {}  v = ({}, {})", z.re, v.re[0], v.re[1]);
            } else {
                let _ = writeln!(
                    out,
                    "lambda = {}{:+}i  v = ({}{:+}i, {}{:+}i)",
                    z.re, z.im, v.re[0], v.im[0], v.re[1], v.im[1]
                );
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
struct Sample {
    t: f64,
    x: f64,
    y: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LinearReport {
    matrix: [[f64; 2]; 2],
    class: Classification,
    eigenvalues: Vec<ComplexJson>,
    eigenvectors: Vec<VectorJson>,
    /// Human-readable general solution.
    solution: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    init: Option<Vec2>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c2: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    values: Vec<Sample>,
}

fn solution_text(s: &LinearSolution) -> String {
    let v = |v: Vec2| format!("({}, {})", v[0], v[1]);
    match s.kind {
        SolutionKind::Real { l1, l2, v1, v2 } => {
            format!("X(t) = C1 {} e^({l1} t) + C2 {} e^({l2} t)", v(v1), v(v2))
        }
        SolutionKind::Complex { alpha, beta, vr, vi } => format!(
            "X(t) = e^({alpha} t) [C1 ({} cos({beta} t) - {} sin({beta} t)) + C2 ({} sin({beta} t) + {} cos({beta} t))]",
            v(vr),
            v(vi),
            v(vr),
            v(vi)
        ),
    }
}

impl LinearReport {
    pub fn new(
        a: &Mat2,
        class: Classification,
        s: &LinearSolution,
        ivp: Option<&IvpCoefficients>,
        values: &[(f64, Vec2)],
    ) -> Self {
        let (values_json, vectors) = match s.kind {
            SolutionKind::Real { l1, l2, v1, v2 } => (
                vec![ComplexJson { re: l1, im: 0.0 }, ComplexJson { re: l2, im: 0.0 }],
                eigenvectors_json(&EigenVectors::Real { v1, v2 }),
            ),
            SolutionKind::Complex { alpha, beta, vr, vi } => (
                vec![ComplexJson { re: alpha, im: beta }, ComplexJson { re: alpha, im: -beta }],
                eigenvectors_json(&EigenVectors::Complex { vr, vi }),
            ),
        };
        LinearReport {
            matrix: a.rows(),
            class,
            eigenvalues: values_json,
            eigenvectors: vectors,
            solution: solution_text(s),
            init: ivp.map(|i| i.initial),
            c1: ivp.map(|i| i.c1),
            c2: ivp.map(|i| i.c2),
            values: values.iter().map(|&(t, v)| Sample { t, x: v[0], y: v[1] }).collect(),
        }
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "A = {:?}  class {}", self.matrix, self.class);
        let _ = writeln!(out, "{}", self.solution);
        if let (Some(x0), Some(c1), Some(c2)) = (self.init, self.c1, self.c2) {
            let _ = writeln!(out, "X(0) = ({}, {}):  C1 = {c1}  C2 = {c2}", x0[0], x0[1]);
        }
        for s in &self.values {
            let _ = writeln!(out, "t = {}  X = ({}, {})", s.t, s.x, s.y);
        }
        out
    }
}
