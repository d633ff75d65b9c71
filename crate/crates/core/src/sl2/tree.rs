//! Ball of radius R around the standard vertex in the Bruhat-Tits tree of
//! `SL₂(ℚ_p)`, with each edge subdivided at its midpoint, and the filtration
//! subgroups `G_{τ,r,+}` reduced mod pᴺ.
//!
//! A vertex at distance k is a line in `(ℤ/pᵏ)²`; the apartment ray in
//! direction `e₁` sits at coordinates 0, 1, 2, … and `e₂` at 0, −1, −2, ….
//! Midpoints and half-edges are labelled by the far vertex of their edge.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use super::group::{congruence_subgroup, sl2_order, Group, Mat2, Modulus};
use crate::error::{Error, Result};
use crate::moy_prasad::index_set;
use crate::rational::Q;
use crate::roots::{build_root_system, RootType};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum TreeCellKind {
    Vertex,
    Midpoint,
    /// Half-edge between the vertex at depth − 1 and the midpoint.
    InnerHalf,
    /// Half-edge between the midpoint and the vertex at depth.
    OuterHalf,
}

impl TreeCellKind {
    pub fn dim(self) -> usize {
        match self {
            TreeCellKind::Vertex | TreeCellKind::Midpoint => 0,
            _ => 1,
        }
    }
}

/// A line in `(ℤ/pᵏ)²`, normalized to `(1, t)` or `(s, 1)` with `p | s`.
pub type Line = (u64, u64);

#[derive(Clone, Debug)]
pub struct TreeCell {
    pub index: usize,
    pub kind: TreeCellKind,
    pub depth: u32,
    pub line: Line,
    /// Extent along the ray through `line`, as distances from the centre.
    pub lo: Q,
    pub hi: Q,
    /// Maps the `e₁` ray onto the ray of this cell.
    pub frame: Mat2,
    /// Thresholds `(t_up, t_low, t_diag)` at the matching apartment point.
    pub thresholds: (u32, u32, u32),
    pub group: Group,
    /// Signed boundary: head +1, tail −1.
    pub faces: Vec<(usize, i8)>,
}

impl TreeCell {
    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn label(&self) -> String {
        let kind = match self.kind {
            TreeCellKind::Vertex => "v",
            TreeCellKind::Midpoint => "m",
            TreeCellKind::InnerHalf => "h-",
            TreeCellKind::OuterHalf => "h+",
        };
        if self.depth == 0 {
            return "x".into();
        }
        format!("{kind}{}({},{})", self.depth, self.line.0, self.line.1)
    }

    /// Apartment coordinate of the barycenter along the `e₁` ray.
    pub fn ray_point(&self) -> Q {
        (self.lo + self.hi) / Q::int(2)
    }
}

impl fmt::Display for TreeCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Clone, Debug)]
pub struct TreeBall {
    pub p: u64,
    pub radius: u32,
    pub r: Q,
    pub modulus: Modulus,
    pub cells: Vec<TreeCell>,
    lookup: HashMap<(TreeCellKind, u32, Line), usize>,
}

fn normalize(p: u64, k: u32, v: (u64, u64)) -> Line {
    if k == 0 {
        return (1, 0);
    }
    let m = Modulus::new(p, k);
    let (a, b) = (v.0 % m.q, v.1 % m.q);
    match m.inv(a) {
        Some(ai) => (1 % m.q, m.mul(b, ai)),
        None => (m.mul(a, m.inv(b).expect("primitive vector")), 1 % m.q),
    }
}

/// All lines of `(ℤ/pᵏ)²`.
pub fn lines(p: u64, k: u32) -> Vec<Line> {
    if k == 0 {
        return vec![(1, 0)];
    }
    let q = p.pow(k);
    let mut out: Vec<Line> = (0..q).map(|t| (1 % q, t)).collect();
    out.extend((0..q / p).map(|s| (p * s, 1 % q)));
    out
}

fn frame_of(line: Line, m: &Modulus, p: u64) -> Mat2 {
    if !line.0.is_multiple_of(p) {
        Mat2::new(m, 1, 0, line.1 as i128, 1)
    } else {
        Mat2::new(m, line.0 as i128, -1, 1, 0)
    }
}

/// `(t_up, t_low, t_diag)` for `G_{y,r,+}` at apartment coordinate y.
pub fn apartment_thresholds(y: Q, r: Q) -> Result<(u32, u32, u32)> {
    let sys = build_root_system(RootType::A1);
    let f = index_set(&sys, &[y], r, true)?;
    let up = sys.index_of(&[Q::ONE]).expect("A1 root");
    let low = sys.negation(up);
    let conv = |t: i128| {
        u32::try_from(t).map_err(|_| Error::TreePrecondition(format!("threshold {t} at {y} is negative")))
    };
    Ok((conv(f.thresholds[up])?, conv(f.thresholds[low])?, conv(f.imaginary)?))
}

/// Distinct apartment coordinates used by a ball of this radius, on the `e₁` ray.
fn ray_points(radius: u32) -> Vec<Q> {
    (0..=2 * radius as i128).map(|k| Q::new(k, 2)).chain((0..2 * radius as i128).map(|k| Q::new(2 * k + 1, 4))).collect()
}

/// Indices `[Γ : K̄]` of the apartment subgroups at level N, used to detect an
/// insufficient level by comparing against N + 1.
fn index_pattern(p: u64, n: u32, radius: u32, r: Q) -> Result<Vec<u64>> {
    let m = Modulus::new(p, n);
    let order = sl2_order(p, n);
    ray_points(radius)
        .into_iter()
        .map(|y| {
            let (u, l, d) = apartment_thresholds(y, r)?;
            Ok(order / congruence_subgroup(&m, u, l, d).order() as u64)
        })
        .collect()
}

/// Smallest level at which the subgroup indices have stabilized.
pub fn minimal_level(p: u64, radius: u32, r: Q) -> Result<u32> {
    for n in 1..=12 {
        if index_pattern(p, n, radius, r)? == index_pattern(p, n + 1, radius, r)? {
            return Ok(n);
        }
    }
    Err(Error::TreePrecondition("no stable congruence level up to 12".into()))
}

pub fn build_tree_ball(p: u64, radius: u32, r: Q, level: Option<u32>) -> Result<TreeBall> {
    if p != 2 && p != 3 {
        return Err(Error::TreePrecondition(format!("p = {p}; only 2 and 3 are supported")));
    }
    if (r - Q::int(radius as i128)).signum() <= 0 {
        return Err(Error::TreePrecondition(format!("need r > R, got r = {r}, R = {radius}")));
    }
    let n = match level {
        Some(n) => {
            if n == 0 || index_pattern(p, n, radius, r)? != index_pattern(p, n + 1, radius, r)? {
                return Err(Error::InsufficientLevel(n));
            }
            n
        }
        None => minimal_level(p, radius, r)?,
    };
    let modulus = Modulus::new(p, n);

    // apartment subgroups by ray coordinate, computed once
    let mut base: HashMap<Q, ((u32, u32, u32), Group)> = HashMap::new();
    for y in ray_points(radius) {
        let t = apartment_thresholds(y, r)?;
        base.insert(y, (t, congruence_subgroup(&modulus, t.0, t.1, t.2)));
    }

    let mut ball = TreeBall { p, radius, r, modulus, cells: Vec::new(), lookup: HashMap::new() };
    let push = |ball: &mut TreeBall, kind: TreeCellKind, depth: u32, line: Line, lo: Q, hi: Q| {
        let frame = frame_of(line, &ball.modulus, p);
        let (thresholds, g) = base[&((lo + hi) / Q::int(2))].clone();
        let group = if frame == Mat2::ID { g } else { g.conjugate(&frame, &ball.modulus) };
        let index = ball.cells.len();
        ball.lookup.insert((kind, depth, line), index);
        ball.cells.push(TreeCell { index, kind, depth, line, lo, hi, frame, thresholds, group, faces: Vec::new() });
        index
    };
    push(&mut ball, TreeCellKind::Vertex, 0, (1, 0), Q::ZERO, Q::ZERO);
    for k in 1..=radius {
        let (near, mid, far) = (Q::int(k as i128 - 1), Q::new(2 * k as i128 - 1, 2), Q::int(k as i128));
        for line in lines(p, k) {
            let parent = ball.lookup[&(TreeCellKind::Vertex, k - 1, normalize(p, k - 1, line))];
            let v = push(&mut ball, TreeCellKind::Vertex, k, line, far, far);
            let c = push(&mut ball, TreeCellKind::Midpoint, k, line, mid, mid);
            let inner = push(&mut ball, TreeCellKind::InnerHalf, k, line, near, mid);
            let outer = push(&mut ball, TreeCellKind::OuterHalf, k, line, mid, far);
            ball.cells[inner].faces = vec![(c, 1), (parent, -1)];
            ball.cells[outer].faces = vec![(v, 1), (c, -1)];
        }
    }
    // every K̄_τ must fix τ; a failure means the group left the centre's stabilizer
    for c in &ball.cells {
        if c.group.elements.iter().any(|g| ball.act(g)[c.index] != c.index) {
            return Err(Error::TreePrecondition(format!("subgroup at {c} does not fix it")));
        }
    }
    Ok(ball)
}

impl TreeBall {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn centre(&self) -> usize {
        0
    }

    pub fn cells_of_dim(&self, d: usize) -> impl Iterator<Item = &TreeCell> + '_ {
        self.cells.iter().filter(move |c| c.dim() == d)
    }

    pub fn find(&self, kind: TreeCellKind, depth: u32, line: Line) -> Option<usize> {
        self.lookup.get(&(kind, depth, normalize(self.p, depth, line))).copied()
    }

    /// Permutation of cells induced by `g ∈ SL₂(ℤ/pᴺ)`, which fixes the centre.
    pub fn act(&self, g: &Mat2) -> Vec<usize> {
        self.cells
            .iter()
            .map(|c| {
                if c.depth == 0 {
                    return c.index;
                }
                let w = g.apply(c.line, &self.modulus);
                self.lookup[&(c.kind, c.depth, normalize(self.p, c.depth, w))]
            })
            .collect()
    }

    /// Cells on the geodesic from the centre to the far end of σ, faces included.
    pub fn support(&self, sigma: usize) -> Vec<usize> {
        let s = &self.cells[sigma];
        self.cells
            .iter()
            .filter(|t| {
                t.depth <= s.depth && t.hi <= s.hi && normalize(self.p, t.depth, s.line) == t.line
            })
            .map(|t| t.index)
            .collect()
    }

    /// `[Γ : K̄_τ]` for each cell.
    pub fn indices(&self) -> Vec<u64> {
        let order = sl2_order(self.p, self.modulus.n);
        self.cells.iter().map(|c| order / c.group.order() as u64).collect()
    }

    /// Cells on the `e₁` or `e₂` ray, with signed apartment coordinate.
    pub fn apartment_cells(&self) -> Vec<(usize, Q)> {
        self.cells
            .iter()
            .filter_map(|c| {
                let y = c.ray_point();
                if c.depth == 0 || c.line == (1, 0) {
                    Some((c.index, y))
                } else if c.line == (0, 1 % self.p.pow(c.depth)) {
                    Some((c.index, -y))
                } else {
                    None
                }
            })
            .collect()
    }
}
