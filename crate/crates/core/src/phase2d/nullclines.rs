//! Zero level sets of `f` and `g` by marching squares.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Model2D, System};
use crate::algebra2::Vec2;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClineKind {
    /// `f = 0`: the flow is vertical.
    X,
    /// `g = 0`: the flow is horizontal.
    Y,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub kind: ClineKind,
    pub points: Vec<Vec2>,
    /// First and last points coincide.
    pub closed: bool,
}

impl Polyline {
    /// `[x_min, y_min, x_max, y_max]`.
    pub fn bbox(&self) -> [f64; 4] {
        self.points.iter().fold([f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY], |b, p| {
            [b[0].min(p[0]), b[1].min(p[1]), b[2].max(p[0]), b[3].max(p[1])]
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NullClineSet {
    pub polylines: Vec<Polyline>,
}

impl NullClineSet {
    pub fn of_kind(&self, kind: ClineKind) -> impl Iterator<Item = &Polyline> {
        self.polylines.iter().filter(move |p| p.kind == kind)
    }

    /// Distance from `p` to the nearest segment of the given kind.
    pub fn distance(&self, kind: ClineKind, p: Vec2) -> f64 {
        let mut best = f64::INFINITY;
        for line in self.of_kind(kind) {
            if line.points.len() == 1 {
                best = best.min((line.points[0][0] - p[0]).hypot(line.points[0][1] - p[1]));
            }
            for w in line.points.windows(2) {
                best = best.min(segment_distance(w[0], w[1], p));
            }
        }
        best
    }
}

fn segment_distance(a: Vec2, b: Vec2, p: Vec2) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 { 0.0 } else { (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0) };
    (a[0] + t * dx - p[0]).hypot(a[1] + t * dy - p[1])
}

/// Lattice edge: `(vertical, i, j)`; horizontal edges join `(i, j)` to
/// `(i + 1, j)`, vertical ones `(i, j)` to `(i, j + 1)`.
type EdgeId = (bool, usize, usize);

struct Field<'a> {
    sys: &'a System,
    component: usize,
    xs: Vec<f64>,
    ys: Vec<f64>,
    values: Vec<f64>,
    tol: f64,
}

impl Field<'_> {
    fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.xs.len() + i]
    }

    fn eval(&self, p: Vec2) -> f64 {
        self.sys.rhs(p).map(|v| v[self.component]).unwrap_or(f64::NAN)
    }

    fn inside(v: f64) -> bool {
        v > 0.0
    }

    /// Crossing on an edge, refined by bisection.
    fn vertex(&self, e: EdgeId) -> Vec2 {
        let (vertical, i, j) = e;
        let a = [self.xs[i], self.ys[j]];
        let b = if vertical { [self.xs[i], self.ys[j + 1]] } else { [self.xs[i + 1], self.ys[j]] };
        let (va, vb) =
            if vertical { (self.value(i, j), self.value(i, j + 1)) } else { (self.value(i, j), self.value(i + 1, j)) };
        if va == 0.0 {
            return a;
        }
        if vb == 0.0 {
            return b;
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let lerp = |t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
        let mut best = (va.abs().min(vb.abs()), if va.abs() <= vb.abs() { 0.0 } else { 1.0 });
        for _ in 0..60 {
            let t = 0.5 * (lo + hi);
            let v = self.eval(lerp(t));
            if v.is_nan() {
                break;
            }
            if v.abs() < best.0 {
                best = (v.abs(), t);
            }
            if v == 0.0 || best.0 <= 1e-12 * self.tol {
                break;
            }
            if Self::inside(v) == Self::inside(va) {
                lo = t;
            } else {
                hi = t;
            }
        }
        lerp(best.1)
    }
}

/// Segments of one cell as pairs of edge ids.
fn cell_segments(field: &Field, i: usize, j: usize) -> Vec<(EdgeId, EdgeId)> {
    let v = [field.value(i, j), field.value(i + 1, j), field.value(i + 1, j + 1), field.value(i, j + 1)];
    if v.iter().any(|x| x.is_nan()) {
        return Vec::new();
    }
    let bits = v.iter().enumerate().fold(0u8, |acc, (k, &x)| acc | ((Field::inside(x) as u8) << k));
    let bottom = (false, i, j);
    let right = (true, i + 1, j);
    let top = (false, i, j + 1);
    let left = (true, i, j);
    match bits {
        0 | 15 => vec![],
        1 | 14 => vec![(left, bottom)],
        2 | 13 => vec![(bottom, right)],
        3 | 12 => vec![(left, right)],
        4 | 11 => vec![(right, top)],
        6 | 9 => vec![(bottom, top)],
        7 | 8 => vec![(left, top)],
        5 | 10 => {
            let c = field.eval([0.5 * (field.xs[i] + field.xs[i + 1]), 0.5 * (field.ys[j] + field.ys[j + 1])]);
            // corners 0 and 2 are inside for case 5; the centre decides
            // whether they are connected through the cell
            let centre_like_02 = Field::inside(c) == (bits == 5);
            if centre_like_02 {
                vec![(left, top), (bottom, right)]
            } else {
                vec![(left, bottom), (right, top)]
            }
        }
        _ => unreachable!(),
    }
}

fn trace(field: &Field, kind: ClineKind) -> Vec<Polyline> {
    let n = field.xs.len() - 1;
    let mut adj: BTreeMap<EdgeId, Vec<EdgeId>> = BTreeMap::new();
    for j in 0..n {
        for i in 0..n {
            for (a, b) in cell_segments(field, i, j) {
                adj.entry(a).or_default().push(b);
                adj.entry(b).or_default().push(a);
            }
        }
    }
    let mut vertex_cache: BTreeMap<EdgeId, Vec2> = BTreeMap::new();
    let mut point = |e: EdgeId| *vertex_cache.entry(e).or_insert_with(|| field.vertex(e));
    let mut used: BTreeMap<(EdgeId, EdgeId), bool> = BTreeMap::new();
    let key = |a: EdgeId, b: EdgeId| if a <= b { (a, b) } else { (b, a) };
    let mut out = Vec::new();

    // open chains start at degree-one edges; what remains are loops
    let starts: Vec<EdgeId> =
        adj.iter().filter(|(_, v)| v.len() == 1).map(|(k, _)| *k).chain(adj.keys().copied()).collect();
    for start in starts {
        let Some(first_next) = adj[&start].iter().copied().find(|&b| !used.contains_key(&key(start, b))) else {
            continue;
        };
        let mut chain = vec![start];
        let (mut prev, mut cur) = (start, first_next);
        used.insert(key(prev, cur), true);
        chain.push(cur);
        while let Some(next) = adj[&cur].iter().copied().find(|&b| b != prev && !used.contains_key(&key(cur, b))) {
            used.insert(key(cur, next), true);
            chain.push(next);
            prev = cur;
            cur = next;
        }
        let closed = chain.len() > 2 && chain.first() == chain.last();
        out.push(Polyline { kind, points: chain.into_iter().map(&mut point).collect(), closed });
    }
    out.extend(zero_edges(field, kind, &out));
    out
}

/// Lattice edges lying exactly on the zero set where the field does not
/// change sign across them (typically a domain side on an axis), which
/// marching squares cannot see.
fn zero_edges(field: &Field, kind: ClineKind, traced: &[Polyline]) -> Vec<Polyline> {
    let n = field.xs.len() - 1;
    let covered: std::collections::BTreeSet<(u64, u64)> =
        traced.iter().flat_map(|l| l.points.iter().map(|p| (p[0].to_bits(), p[1].to_bits()))).collect();
    let at = |i: usize, j: usize| [field.xs[i], field.ys[j]];
    let is_zero_edge = |a: (usize, usize), b: (usize, usize)| {
        let (pa, pb) = (at(a.0, a.1), at(b.0, b.1));
        field.value(a.0, a.1) == 0.0
            && field.value(b.0, b.1) == 0.0
            && field.eval([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]) == 0.0
            && !(covered.contains(&(pa[0].to_bits(), pa[1].to_bits()))
                && covered.contains(&(pb[0].to_bits(), pb[1].to_bits())))
    };
    let mut out = Vec::new();
    // runs along rows, then along columns
    for horizontal in [true, false] {
        for line in 0..=n {
            let mut run: Vec<Vec2> = Vec::new();
            for k in 0..n {
                let (a, b) = if horizontal { ((k, line), (k + 1, line)) } else { ((line, k), (line, k + 1)) };
                if is_zero_edge(a, b) {
                    if run.is_empty() {
                        run.push(at(a.0, a.1));
                    }
                    run.push(at(b.0, b.1));
                } else if !run.is_empty() {
                    out.push(Polyline { kind, points: std::mem::take(&mut run), closed: false });
                }
            }
            if !run.is_empty() {
                out.push(Polyline { kind, points: run, closed: false });
            }
        }
    }
    out
}

/// Null-clines on a `grid x grid` lattice of cells.
pub fn extract_nullclines(m: &Model2D, grid: usize) -> Result<NullClineSet> {
    if grid < 8 {
        return Err(Error::InvalidArgument(format!("null-cline grid must be at least 8, got {grid}")));
    }
    let sys = m.compile()?;
    let scale = sys.scale();
    let (xs, ys) = m.domain.lattice(grid);
    let mut polylines = Vec::new();
    for (component, kind) in [(0, ClineKind::X), (1, ClineKind::Y)] {
        let mut values = Vec::with_capacity(xs.len() * ys.len());
        for &y in &ys {
            for &x in &xs {
                values.push(sys.rhs([x, y]).map(|v| v[component]).unwrap_or(f64::NAN));
            }
        }
        let field = Field { sys: &sys, component, xs: xs.clone(), ys: ys.clone(), values, tol: scale };
        polylines.extend(trace(&field, kind));
    }
    Ok(NullClineSet { polylines })
}
