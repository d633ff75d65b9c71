//! SVG pictures of rank ≤ 2 complexes with a cone, its support and a chain.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::apartment::{CellComplex, Chain};
use crate::error::{Error, Result};
use crate::rational::{QVec, Q};

#[derive(Clone, Debug, Default)]
pub struct Overlay {
    pub base: Option<QVec>,
    pub sigma: Option<usize>,
    /// Points whose convex hull is shaded.
    pub hull: Vec<QVec>,
    pub support: BTreeSet<usize>,
    pub chain: Option<Chain>,
}

const SIZE: f64 = 640.0;
const MARGIN: f64 = 24.0;

struct Frame {
    /// Cholesky factor of the point Gram matrix, so distances look right.
    l: [[f64; 2]; 2],
    min: (f64, f64),
    scale: f64,
}

impl Frame {
    fn raw(&self, x: &[Q]) -> (f64, f64) {
        let a = x[0].to_f64();
        let b = x.get(1).map_or(0.0, Q::to_f64);
        (self.l[0][0] * a + self.l[0][1] * b, self.l[1][1] * b)
    }

    fn screen(&self, x: &[Q]) -> (f64, f64) {
        let (u, v) = self.raw(x);
        (MARGIN + (u - self.min.0) * self.scale, SIZE - MARGIN - (v - self.min.1) * self.scale)
    }
}

fn frame_for(complex: &CellComplex) -> Frame {
    let g = &complex.system.gram;
    let l = if complex.rank() == 1 {
        [[1.0, 0.0], [0.0, 0.0]]
    } else {
        let a = g[0][0].to_f64();
        let b = g[0][1].to_f64();
        let c = g[1][1].to_f64();
        let s = a.sqrt();
        [[s, b / s], [0.0, (c - b * b / a).sqrt()]]
    };
    let mut f = Frame { l, min: (f64::MAX, f64::MAX), scale: 1.0 };
    let mut max = (f64::MIN, f64::MIN);
    for c in complex.cells.iter().filter(|c| c.dim == 0) {
        let (u, v) = f.raw(&c.vertices[0]);
        f.min = (f.min.0.min(u), f.min.1.min(v));
        max = (max.0.max(u), max.1.max(v));
    }
    let span = (max.0 - f.min.0).max(max.1 - f.min.1).max(1e-9);
    f.scale = (SIZE - 2.0 * MARGIN) / span;
    if complex.rank() == 1 {
        f.min.1 -= (SIZE - 2.0 * MARGIN) / 2.0 / f.scale;
    }
    f
}

/// Screen points in counterclockwise order around their centroid.
fn polygon(frame: &Frame, pts: &[QVec]) -> String {
    let mut xy: Vec<(f64, f64)> = pts.iter().map(|p| frame.screen(p)).collect();
    let n = xy.len() as f64;
    let (cx, cy) = xy.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n));
    xy.sort_by(|a, b| (a.1 - cy).atan2(a.0 - cx).total_cmp(&(b.1 - cy).atan2(b.0 - cx)));
    xy.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect::<Vec<_>>().join(" ")
}

pub fn render_svg(complex: &CellComplex, overlay: &Overlay) -> Result<String> {
    if complex.rank() > 2 {
        return Err(Error::Degenerate("SVG output needs rank at most 2".into()));
    }
    let f = frame_for(complex);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);

    let top = complex.rank();
    for c in complex.cells.iter().filter(|c| c.dim == top && top == 2) {
        let fill = if overlay.support.contains(&c.index) { "#ffe2a8" } else { "#f5f5f5" };
        let _ = writeln!(s, r##"<polygon points="{}" fill="{fill}" stroke="none"/>"##, polygon(&f, &c.vertices));
    }
    if overlay.hull.len() >= 3 && top == 2 {
        let _ = writeln!(s, r##"<polygon points="{}" fill="#3a6fd8" fill-opacity="0.25" stroke="#3a6fd8"/>"##, polygon(&f, &overlay.hull));
    }
    for c in complex.cells.iter().filter(|c| c.dim == 1) {
        let (a, b) = (f.screen(&c.vertices[0]), f.screen(&c.vertices[1]));
        let (stroke, w) = if overlay.support.contains(&c.index) { ("#e08a00", 2.5) } else { ("#9a9a9a", 0.8) };
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{stroke}" stroke-width="{w}"/>"#,
            a.0, a.1, b.0, b.1
        );
    }
    if (top == 1 || overlay.hull.len() == 2) && overlay.hull.len() >= 2 {
        let (a, b) = (f.screen(&overlay.hull[0]), f.screen(&overlay.hull[overlay.hull.len() - 1]));
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#3a6fd8" stroke-opacity="0.5" stroke-width="8"/>"##,
            a.0, a.1, b.0, b.1
        );
    }
    for c in complex.cells.iter().filter(|c| c.dim == 0) {
        let (x, y) = f.screen(&c.vertices[0]);
        let (fill, r) = if overlay.support.contains(&c.index) { ("#e08a00", 3.0) } else { ("#6a6a6a", 1.6) };
        let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}" fill="{fill}"/>"#);
    }
    if let Some(sig) = overlay.sigma {
        let c = complex.cell(sig);
        match c.dim {
            0 => {
                let (x, y) = f.screen(&c.vertices[0]);
                let _ = writeln!(s, r##"<circle cx="{x:.2}" cy="{y:.2}" r="5" fill="none" stroke="#c0282d" stroke-width="2"/>"##);
            }
            1 => {
                let (a, b) = (f.screen(&c.vertices[0]), f.screen(&c.vertices[1]));
                let _ = writeln!(
                    s,
                    r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#c0282d" stroke-width="3.5"/>"##,
                    a.0, a.1, b.0, b.1
                );
            }
            _ => {
                let _ = writeln!(s, r##"<polygon points="{}" fill="none" stroke="#c0282d" stroke-width="2.5"/>"##, polygon(&f, &c.vertices));
            }
        }
    }
    if let Some(b) = &overlay.base {
        let (x, y) = f.screen(b);
        let _ = writeln!(s, r##"<circle cx="{x:.2}" cy="{y:.2}" r="4.5" fill="#111111"/>"##);
    }
    if let Some(ch) = &overlay.chain {
        for (&idx, &k) in &ch.terms {
            let (x, y) = f.screen(&complex.cell(idx).barycenter);
            let _ = writeln!(
                s,
                r##"<text x="{x:.2}" y="{y:.2}" font-family="monospace" font-size="11" text-anchor="middle" fill="#1d1d1d">{k}</text>"##
            );
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::{cone_hull, support_subcomplex};
    use crate::config::standard_complex;
    use crate::contraction::{build_contraction, BuildOptions};
    use crate::roots::RootType;

    #[test]
    fn renders_a2_cone_with_labels() {
        let o = vec![Q::ZERO, Q::ZERO];
        let cx = standard_complex(RootType::A2, 1, &o, Q::int(3)).unwrap();
        // a vertex far from the base: c(σ) is a nonzero path of edges
        let sigma = cx.vertex_at(&[Q::int(2), Q::int(-1)]).unwrap();
        let c = build_contraction(&cx, &o, None, BuildOptions::default()).unwrap();
        let overlay = Overlay {
            base: Some(o.clone()),
            sigma: Some(sigma),
            hull: cone_hull(&o, &cx, sigma).vertices,
            support: support_subcomplex(&o, &cx, sigma).unwrap(),
            chain: Some(c.maps[&sigma].clone()),
        };
        let svg = render_svg(&cx, &overlay).unwrap();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(!c.maps[&sigma].terms.is_empty());
        assert_eq!(svg.matches("<text").count(), c.maps[&sigma].terms.len());
        assert_eq!(svg, render_svg(&cx, &overlay).unwrap());
    }

    #[test]
    fn renders_rank_one() {
        let cx = standard_complex(RootType::A1, 2, &[Q::ZERO], Q::int(2)).unwrap();
        let svg = render_svg(&cx, &Overlay::default()).unwrap();
        assert_eq!(svg.matches("<circle").count(), 9);
    }
}
