//! Bounded rational polytopes in dimension ≤ 2, in both H- and V-representation.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::rational::{dot, sub, Q, QVec};

/// `normal · x ≤ bound`
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct HalfSpace {
    pub normal: QVec,
    pub bound: Q,
}

impl HalfSpace {
    pub fn new(normal: QVec, bound: Q) -> Self {
        HalfSpace { normal, bound }
    }

    pub fn slack(&self, x: &[Q]) -> Q {
        self.bound - dot(&self.normal, x)
    }

    pub fn contains(&self, x: &[Q]) -> bool {
        self.slack(x).signum() >= 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Polytope {
    pub dim: usize,
    pub halfspaces: Vec<HalfSpace>,
    /// Extreme points, lexicographically sorted.
    pub vertices: Vec<QVec>,
}

impl Polytope {
    /// Build from half-spaces; rejects unbounded regions and regions with empty interior.
    pub fn from_halfspaces(dim: usize, halfspaces: Vec<HalfSpace>) -> Result<Polytope> {
        for h in &halfspaces {
            if h.normal.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: h.normal.len() });
            }
        }
        let vertices = enumerate_vertices(dim, &halfspaces);
        if vertices.is_empty() {
            if has_recession_direction(dim, &halfspaces) {
                return Err(Error::UnboundedWindow);
            }
            return Err(Error::EmptyWindow);
        }
        if has_recession_direction(dim, &halfspaces) {
            return Err(Error::UnboundedWindow);
        }
        let p = Polytope { dim, halfspaces, vertices };
        if p.affine_dim() < dim {
            return Err(Error::EmptyWindow);
        }
        Ok(p)
    }

    /// Axis-aligned box `lo_i ≤ x_i ≤ hi_i`.
    pub fn cube(lo: &[Q], hi: &[Q]) -> Result<Polytope> {
        let dim = lo.len();
        let mut hs = Vec::new();
        for i in 0..dim {
            let mut e = vec![Q::ZERO; dim];
            e[i] = Q::ONE;
            hs.push(HalfSpace::new(e.clone(), hi[i]));
            hs.push(HalfSpace::new(e.iter().map(|&x| -x).collect(), -lo[i]));
        }
        Polytope::from_halfspaces(dim, hs)
    }

    /// Convex hull of a nonempty finite point set (ambient dimension 1 or 2).
    /// Lower-dimensional hulls get equality pairs among their half-spaces.
    pub fn from_points(points: &[QVec]) -> Polytope {
        assert!(!points.is_empty(), "hull of empty set");
        let dim = points[0].len();
        let vertices = extreme_points(points);
        let halfspaces = hull_halfspaces(dim, &vertices);
        let mut vertices = vertices;
        vertices.sort();
        Polytope { dim, halfspaces, vertices }
    }

    pub fn contains(&self, x: &[Q]) -> bool {
        self.halfspaces.iter().all(|h| h.contains(x))
    }

    pub fn contains_polytope(&self, other: &Polytope) -> bool {
        other.vertices.iter().all(|v| self.contains(v))
    }

    pub fn affine_dim(&self) -> usize {
        affine_dim(&self.vertices)
    }

    /// Range of a linear functional over the polytope.
    pub fn range(&self, functional: &[Q]) -> (Q, Q) {
        let vals: Vec<Q> = self.vertices.iter().map(|v| dot(functional, v)).collect();
        (*vals.iter().min().unwrap(), *vals.iter().max().unwrap())
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn enumerate_vertices(dim: usize, hs: &[HalfSpace]) -> Vec<QVec> {
    let mut found = BTreeSet::new();
    for idx in subsets(hs.len(), dim) {
        let rows: Vec<QVec> = idx.iter().map(|&i| hs[i].normal.clone()).collect();
        if linalg::rank(&rows) < dim {
            continue;
        }
        let rhs: Vec<Q> = idx.iter().map(|&i| hs[i].bound).collect();
        let Some(x) = linalg::solve(&rows, &rhs) else { continue };
        if hs.iter().all(|h| h.contains(&x)) {
            found.insert(x);
        }
    }
    found.into_iter().collect()
}

fn nullspace_direction(dim: usize, rows: &[QVec]) -> Option<QVec> {
    let mut m = rows.to_vec();
    let pivots = linalg::echelon(&mut m);
    let free = (0..dim).find(|c| !pivots.contains(c))?;
    let mut y = vec![Q::ZERO; dim];
    y[free] = Q::ONE;
    for (r, &c) in pivots.iter().enumerate() {
        y[c] = -m[r][free];
    }
    Some(y)
}

/// True when `{y : A y ≤ 0}` contains a nonzero vector.
fn has_recession_direction(dim: usize, hs: &[HalfSpace]) -> bool {
    let normals: Vec<QVec> = hs.iter().map(|h| h.normal.clone()).collect();
    if linalg::rank(&normals) < dim {
        return true;
    }
    for idx in subsets(hs.len(), dim - 1) {
        let rows: Vec<QVec> = idx.iter().map(|&i| normals[i].clone()).collect();
        if linalg::rank(&rows) < dim - 1 {
            continue;
        }
        let Some(y) = nullspace_direction(dim, &rows) else { continue };
        for s in [Q::ONE, -Q::ONE] {
            let dir: QVec = y.iter().map(|&v| s * v).collect();
            if normals.iter().all(|n| dot(n, &dir).signum() <= 0) {
                return true;
            }
        }
    }
    false
}

pub fn affine_dim(points: &[QVec]) -> usize {
    if points.len() <= 1 {
        return 0;
    }
    let diffs: Vec<QVec> = points[1..].iter().map(|p| sub(p, &points[0])).collect();
    linalg::rank(&diffs)
}

fn cross(o: &[Q], a: &[Q], b: &[Q]) -> Q {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Extreme points of a finite set in dimension 1 or 2. In 2D a full-dimensional
/// hull is returned in counter-clockwise order starting from the lex-least point.
pub fn extreme_points(points: &[QVec]) -> Vec<QVec> {
    let mut pts: Vec<QVec> = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.len() <= 1 {
        return pts;
    }
    let dim = pts[0].len();
    match dim {
        1 => vec![pts[0].clone(), pts[pts.len() - 1].clone()],
        2 => {
            if affine_dim(&pts) == 1 {
                return vec![pts[0].clone(), pts[pts.len() - 1].clone()];
            }
            let mut lower: Vec<QVec> = Vec::new();
            for p in &pts {
                while lower.len() >= 2
                    && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p).signum() <= 0
                {
                    lower.pop();
                }
                lower.push(p.clone());
            }
            let mut upper: Vec<QVec> = Vec::new();
            for p in pts.iter().rev() {
                while upper.len() >= 2
                    && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p).signum() <= 0
                {
                    upper.pop();
                }
                upper.push(p.clone());
            }
            lower.pop();
            upper.pop();
            lower.extend(upper);
            lower
        }
        _ => panic!("extreme_points supports dimension ≤ 2"),
    }
}

fn hull_halfspaces(dim: usize, verts: &[QVec]) -> Vec<HalfSpace> {
    let neg = |v: &[Q]| -> QVec { v.iter().map(|&x| -x).collect() };
    let mut hs = Vec::new();
    match (dim, verts.len()) {
        (_, 1) => {
            let p = &verts[0];
            for i in 0..dim {
                let mut e = vec![Q::ZERO; dim];
                e[i] = Q::ONE;
                hs.push(HalfSpace::new(e.clone(), p[i]));
                hs.push(HalfSpace::new(neg(&e), -p[i]));
            }
        }
        (1, _) => {
            hs.push(HalfSpace::new(vec![Q::ONE], verts[1][0]));
            hs.push(HalfSpace::new(vec![-Q::ONE], -verts[0][0]));
        }
        (2, 2) => {
            let (a, b) = (&verts[0], &verts[1]);
            let u = sub(b, a);
            let n = vec![-u[1], u[0]];
            hs.push(HalfSpace::new(n.clone(), dot(&n, a)));
            hs.push(HalfSpace::new(neg(&n), -dot(&n, a)));
            hs.push(HalfSpace::new(u.clone(), dot(&u, b)));
            hs.push(HalfSpace::new(neg(&u), -dot(&u, a)));
        }
        (2, k) => {
            for i in 0..k {
                let p = &verts[i];
                let q = &verts[(i + 1) % k];
                let n = vec![q[1] - p[1], p[0] - q[0]];
                hs.push(HalfSpace::new(n.clone(), dot(&n, p)));
            }
        }
        _ => panic!("hull_halfspaces supports dimension ≤ 2"),
    }
    hs
}

/// Clip a point set (whose hull is a convex polytope) by a half-space. The
/// hull of the returned set equals the clipped polytope.
pub fn clip(points: &[QVec], h: &HalfSpace) -> Vec<QVec> {
    let slacks: Vec<Q> = points.iter().map(|p| h.slack(p)).collect();
    let mut out: Vec<QVec> = Vec::new();
    for (p, s) in points.iter().zip(&slacks) {
        if s.signum() >= 0 {
            out.push(p.clone());
        }
    }
    for (i, p) in points.iter().enumerate() {
        if slacks[i].signum() <= 0 {
            continue;
        }
        for (j, q) in points.iter().enumerate() {
            if slacks[j].signum() >= 0 {
                continue;
            }
            // p inside, q outside: the crossing point of [p, q]
            let t = slacks[i] / (slacks[i] - slacks[j]);
            out.push(p.iter().zip(q).map(|(&a, &b)| a + t * (b - a)).collect());
        }
    }
    if out.is_empty() {
        return out;
    }
    extreme_points(&out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qvec;

    #[test]
    fn square_vertices() {
        let p = Polytope::cube(&qvec(&[0, 0]), &qvec(&[2, 2])).unwrap();
        assert_eq!(p.vertices.len(), 4);
        assert!(p.contains(&qvec(&[1, 1])));
        assert!(!p.contains(&qvec(&[3, 1])));
    }

    #[test]
    fn rejects_unbounded_and_empty() {
        let half = vec![HalfSpace::new(qvec(&[1, 0]), Q::ONE)];
        assert!(matches!(Polytope::from_halfspaces(2, half), Err(Error::UnboundedWindow)));
        let strip = vec![
            HalfSpace::new(qvec(&[1, 0]), Q::ONE),
            HalfSpace::new(qvec(&[-1, 0]), Q::ONE),
        ];
        assert!(matches!(Polytope::from_halfspaces(2, strip), Err(Error::UnboundedWindow)));
        let empty = vec![
            HalfSpace::new(qvec(&[1]), Q::ZERO),
            HalfSpace::new(qvec(&[-1]), -Q::ONE),
        ];
        assert!(matches!(Polytope::from_halfspaces(1, empty), Err(Error::EmptyWindow)));
        let point = vec![
            HalfSpace::new(qvec(&[1]), Q::ZERO),
            HalfSpace::new(qvec(&[-1]), Q::ZERO),
        ];
        assert!(matches!(Polytope::from_halfspaces(1, point), Err(Error::EmptyWindow)));
    }

    #[test]
    fn hull_of_triangle_with_interior_point() {
        let pts = vec![qvec(&[0, 0]), qvec(&[4, 0]), qvec(&[0, 4]), qvec(&[1, 1]), qvec(&[2, 0])];
        let p = Polytope::from_points(&pts);
        assert_eq!(p.vertices.len(), 3);
        for q in &pts {
            assert!(p.contains(q));
        }
        assert!(!p.contains(&qvec(&[3, 3])));
    }

    #[test]
    fn degenerate_hulls() {
        let seg = Polytope::from_points(&[qvec(&[0, 0]), qvec(&[2, 1]), qvec(&[4, 2])]);
        assert_eq!(seg.vertices.len(), 2);
        assert!(seg.contains(&qvec(&[2, 1])));
        assert!(!seg.contains(&qvec(&[2, 0])));
        let pt = Polytope::from_points(&[qvec(&[1, 1])]);
        assert!(pt.contains(&qvec(&[1, 1])));
        assert!(!pt.contains(&qvec(&[1, 0])));
    }

    #[test]
    fn clipping_square() {
        let sq = vec![qvec(&[0, 0]), qvec(&[2, 0]), qvec(&[2, 2]), qvec(&[0, 2])];
        let clipped = clip(&sq, &HalfSpace::new(qvec(&[1, 1]), Q::int(2)));
        let p = Polytope::from_points(&clipped);
        assert_eq!(p.vertices, vec![qvec(&[0, 0]), qvec(&[0, 2]), qvec(&[2, 0])]);
        assert!(clip(&sq, &HalfSpace::new(qvec(&[1, 0]), -Q::ONE)).is_empty());
    }
}
