//! Phase portraits as SVG. All coordinates are printed with fixed
//! precision so identical inputs give identical bytes.

use std::fmt::Write as _;

use phaseplane::algebra2::Vec2;
use phaseplane::linsys::classify_linear;
use phaseplane::phase2d::{
    extract_nullclines, find_equilibria_2d_with_grid, integrate_trajectory, jacobian_at, ClineKind, Model2D, Sign,
    TrajectoryOptions,
};
use phaseplane::Classification;

use crate::Failure;

const SIZE: f64 = 600.0;
const MARGIN: f64 = 50.0;
const ARROWS: usize = 15;
const ARROW_LEN: f64 = 14.0;

struct Frame {
    x_lo: f64,
    y_lo: f64,
    sx: f64,
    sy: f64,
}

impl Frame {
    fn px(&self, p: Vec2) -> (f64, f64) {
        (MARGIN + (p[0] - self.x_lo) * self.sx, MARGIN + SIZE - (p[1] - self.y_lo) * self.sy)
    }

    fn points(&self, pts: impl Iterator<Item = Vec2>) -> String {
        let mut s = String::new();
        for p in pts {
            let (x, y) = self.px(p);
            if !s.is_empty() {
                s.push(' ');
            }
            let _ = write!(s, "{x:.2},{y:.2}");
        }
        s
    }
}

fn unit(s: Sign) -> f64 {
    match s {
        Sign::Pos => 1.0,
        Sign::Neg => -1.0,
        _ => 0.0,
    }
}

fn case_label(h: Sign, v: Sign) -> String {
    let h = match h {
        Sign::Pos => "right",
        Sign::Neg => "left",
        _ => "",
    };
    let v = match v {
        Sign::Pos => "up",
        Sign::Neg => "down",
        _ => "",
    };
    match (h.is_empty(), v.is_empty()) {
        (true, true) => "none".into(),
        (false, false) => format!("{h}-{v}"),
        _ => format!("{h}{v}"),
    }
}

fn marker(out: &mut String, (x, y): (f64, f64), class: Classification) {
    let r = 6.0;
    let _ = write!(out, "<g class=\"equilibrium\" data-class=\"{class}\">");
    match class {
        Classification::StableNode | Classification::StableSpiral => {
            let _ = write!(out, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{r}\" fill=\"black\" stroke=\"black\"/>");
        }
        Classification::Saddle => {
            let _ = write!(
                out,
                "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{r}\" fill=\"white\" stroke=\"black\"/>\
                 <path d=\"M{:.2},{y:.2} A{r},{r} 0 0,0 {:.2},{y:.2} Z\" fill=\"black\"/>",
                x - r,
                x + r
            );
        }
        _ => {
            let _ = write!(out, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{r}\" fill=\"white\" stroke=\"black\"/>");
        }
    }
    out.push_str("</g>\n");
}

pub fn portrait(name: &str, m: &Model2D, grid: usize, starts: &[Vec2], tmax: f64) -> Result<String, Failure> {
    let d = m.domain;
    let frame = Frame { x_lo: d.x_lo, y_lo: d.y_lo, sx: SIZE / d.width(), sy: SIZE / d.height() };
    let sys = m.compile()?;
    let clines = extract_nullclines(m, grid)?;
    let equilibria = find_equilibria_2d_with_grid(m, grid)?;
    let mut paths = Vec::with_capacity(starts.len());
    for &s in starts {
        paths.push(integrate_trajectory(m, s, tmax, TrajectoryOptions::default())?);
    }

    let full = SIZE + 2.0 * MARGIN;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{full}\" height=\"{full}\" viewBox=\"0 0 {full} {full}\">"
    );
    out.push_str(
        "<defs><marker id=\"head\" markerWidth=\"6\" markerHeight=\"6\" refX=\"5\" refY=\"3\" orient=\"auto\">\
         <path d=\"M0,0 L6,3 L0,6 Z\" fill=\"#777\"/></marker></defs>\n",
    );
    let _ = writeln!(out, "<title>{name}</title>");
    let _ = writeln!(
        out,
        "<rect class=\"frame\" x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{SIZE}\" height=\"{SIZE}\" fill=\"none\" stroke=\"black\"/>"
    );
    let label = |out: &mut String, x: f64, y: f64, anchor: &str, text: &str| {
        let _ =
            writeln!(out, "<text x=\"{x:.2}\" y=\"{y:.2}\" text-anchor=\"{anchor}\" font-size=\"12\">{text}</text>");
    };
    label(&mut out, MARGIN, MARGIN + SIZE + 18.0, "start", &format!("{}", d.x_lo));
    label(&mut out, MARGIN + SIZE, MARGIN + SIZE + 18.0, "end", &format!("{}", d.x_hi));
    label(&mut out, MARGIN + SIZE / 2.0, MARGIN + SIZE + 36.0, "middle", &m.xname);
    label(&mut out, MARGIN - 6.0, MARGIN + SIZE, "end", &format!("{}", d.y_lo));
    label(&mut out, MARGIN - 6.0, MARGIN + 12.0, "end", &format!("{}", d.y_hi));
    label(&mut out, MARGIN - 30.0, MARGIN + SIZE / 2.0, "middle", &m.yname);

    // direction glyphs at cell centres: one per sign case, not scaled
    out.push_str("<g class=\"field\" stroke=\"#777\" stroke-width=\"1\">\n");
    let zero = 1e-12 * sys.scale();
    for j in 0..ARROWS {
        for i in 0..ARROWS {
            let p = [
                d.x_lo + d.width() * (i as f64 + 0.5) / ARROWS as f64,
                d.y_lo + d.height() * (j as f64 + 0.5) / ARROWS as f64,
            ];
            let Ok([f, g]) = sys.rhs(p) else { continue };
            let (h, v) = (Sign::of(f, zero), Sign::of(g, zero));
            let (cx, cy) = frame.px(p);
            let (ux, uy) = (unit(h), -unit(v));
            let case = case_label(h, v);
            if ux == 0.0 && uy == 0.0 {
                let _ = writeln!(
                    out,
                    "<circle class=\"arrow none\" cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"1.5\" fill=\"#777\"/>"
                );
                continue;
            }
            let n = ux.hypot(uy);
            let (dx, dy) = (0.5 * ARROW_LEN * ux / n, 0.5 * ARROW_LEN * uy / n);
            let _ = writeln!(
                out,
                "<line class=\"arrow {case}\" x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" marker-end=\"url(#head)\"/>",
                cx - dx,
                cy - dy,
                cx + dx,
                cy + dy
            );
        }
    }
    out.push_str("</g>\n");

    out.push_str("<g class=\"nullclines\" fill=\"none\" stroke-width=\"2\">\n");
    for kind in [ClineKind::X, ClineKind::Y] {
        let (class, color, dash) = match kind {
            ClineKind::X => ("x-cline", "#c0392b", " stroke-dasharray=\"8 5\""),
            ClineKind::Y => ("y-cline", "#1f618d", ""),
        };
        for line in clines.of_kind(kind) {
            let _ = writeln!(
                out,
                "<polyline class=\"{class}\" stroke=\"{color}\"{dash} points=\"{}\"/>",
                frame.points(line.points.iter().copied())
            );
        }
    }
    out.push_str("</g>\n");

    if !paths.is_empty() {
        out.push_str("<g class=\"trajectories\" fill=\"none\" stroke=\"#117a65\" stroke-width=\"1.5\">\n");
        for tr in &paths {
            let _ = writeln!(
                out,
                "<polyline class=\"trajectory\" points=\"{}\"/>",
                frame.points(tr.samples.iter().map(|s| [s[1], s[2]]))
            );
        }
        out.push_str("</g>\n");
    }

    out.push_str("<g class=\"equilibria\">\n");
    for p in equilibria {
        let class = classify_linear(&jacobian_at(m, p)?);
        marker(&mut out, frame.px(p), class);
    }
    out.push_str("</g>\n");

    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\">x-cline dashed, y-cline solid; filled = stable, open = unstable, half = saddle</text>",
        MARGIN,
        MARGIN - 12.0
    );
    out.push_str("</svg>\n");
    Ok(out)
}
