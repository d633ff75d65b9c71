//! Geodesic cones `conv({v0} ∪ σ)` and the smallest subcomplex containing them.

use std::collections::{BTreeSet, HashMap};

use crate::apartment::CellComplex;
use crate::error::{Error, Result};
use crate::linalg::integer::{smith_invariants, IntMatrix};
use crate::par::{self, Exec};
use crate::polytope::{clip, extreme_points, HalfSpace, Polytope};
use crate::rational::{centroid, fmt_qvec, Q, QVec};
use crate::roots::AffineIsometry;

pub fn cone_hull(v0: &[Q], complex: &CellComplex, sigma: usize) -> Polytope {
    let mut pts = complex.cell(sigma).vertices.clone();
    pts.push(v0.to_vec());
    Polytope::from_points(&pts)
}

/// Points whose convex hull is the cone, reduced to extreme points.
fn cone_points(v0: &[Q], complex: &CellComplex, sigma: usize) -> Vec<QVec> {
    let mut pts = complex.cell(sigma).vertices.clone();
    pts.push(v0.to_vec());
    extreme_points(&pts)
}

/// `conv(points) ∩ closure(ρ)` as a point set; empty when disjoint.
pub fn clip_to_cell(points: &[QVec], complex: &CellComplex, rho: usize) -> Vec<QVec> {
    let cell = complex.cell(rho);
    let mut pts = points.to_vec();
    let cut = |h: HalfSpace, pts: &mut Vec<QVec>| {
        if !pts.is_empty() {
            *pts = clip(pts, &h);
        }
    };
    for &i in &cell.hull_planes {
        let hp = &complex.hyperplanes[i];
        cut(HalfSpace::new(hp.coef.clone(), -hp.level), &mut pts);
        cut(HalfSpace::new(hp.coef.iter().map(|&c| -c).collect(), hp.level), &mut pts);
    }
    for &i in &cell.facet_planes {
        let hp = &complex.hyperplanes[i];
        let s = Q::from(cell.signs[i] as i64);
        // s · (coef·x + level) ≥ 0
        cut(HalfSpace::new(hp.coef.iter().map(|&c| -s * c).collect(), s * hp.level), &mut pts);
    }
    pts
}

/// A point of `conv(points) ∩ relint(ρ)`, if the intersection is nonempty.
///
/// The clipped set lies in the closure of ρ, where every facet functional is
/// weakly signed; its vertex centroid is strictly signed on a facet plane
/// unless the whole clipped set lies on that plane.
pub fn relint_witness(points: &[QVec], complex: &CellComplex, rho: usize) -> Option<QVec> {
    let clipped = clip_to_cell(points, complex, rho);
    if clipped.is_empty() {
        return None;
    }
    let c = centroid(&clipped);
    let cell = complex.cell(rho);
    let inside = cell
        .facet_planes
        .iter()
        .all(|&i| complex.hyperplanes[i].value(&c).signum() == cell.signs[i]);
    inside.then_some(c)
}

fn sign_ranges(points: &[QVec], complex: &CellComplex) -> Vec<(i8, i8)> {
    complex
        .hyperplanes
        .iter()
        .map(|h| {
            let signs = points.iter().map(|p| h.value(p).signum());
            signs.fold((1, -1), |(lo, hi), s| (lo.min(s), hi.max(s)))
        })
        .collect()
}

// cheap necessary condition: the hull attains the cell's sign on every plane
fn sign_compatible(complex: &CellComplex, ranges: &[(i8, i8)], rho: usize) -> bool {
    complex.cell(rho).signs.iter().zip(ranges).all(|(&s, &(lo, hi))| lo <= s && s <= hi)
}

/// Cells whose relative interior meets `conv(points)`, by testing every cell.
pub fn cells_meeting_scan(exec: Exec, points: &[QVec], complex: &CellComplex) -> Vec<usize> {
    let ranges = sign_ranges(points, complex);
    let candidates: Vec<usize> =
        (0..complex.len()).filter(|&i| sign_compatible(complex, &ranges, i)).collect();
    let hits = par::map(exec, &candidates, |&i| relint_witness(points, complex, i).is_some());
    candidates.into_iter().zip(hits).filter_map(|(i, h)| h.then_some(i)).collect()
}

/// Cells whose relative interior meets `conv(points)`, in index order.
///
/// Search outward from `start`, a cell known to meet the hull. Along any
/// segment inside the hull consecutive cells are incident, so the met cells
/// are connected through face and coface relations.
pub fn cells_meeting_from(start: usize, points: &[QVec], complex: &CellComplex) -> Vec<usize> {
    let ranges = sign_ranges(points, complex);
    let mut seen = BTreeSet::from([start]);
    let mut met = vec![start];
    let mut queue = vec![start];
    while let Some(c) = queue.pop() {
        for n in star(complex, c) {
            if seen.insert(n)
                && sign_compatible(complex, &ranges, n)
                && relint_witness(points, complex, n).is_some()
            {
                met.push(n);
                queue.push(n);
            }
        }
    }
    met.sort_unstable();
    met
}

/// All proper faces and all cells having `c` as a proper face.
fn star(complex: &CellComplex, c: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut down: Vec<usize> = complex.cell(c).facets.iter().map(|&(f, _)| f).collect();
    while let Some(f) = down.pop() {
        out.push(f);
        down.extend(complex.cell(f).facets.iter().map(|&(g, _)| g));
    }
    let mut up: Vec<usize> = complex.cell(c).cofaces.clone();
    while let Some(f) = up.pop() {
        out.push(f);
        up.extend(complex.cell(f).cofaces.iter().copied());
    }
    out
}

pub fn face_closure(complex: &CellComplex, cells: impl IntoIterator<Item = usize>) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    let mut stack: Vec<usize> = cells.into_iter().collect();
    while let Some(c) = stack.pop() {
        if out.insert(c) {
            stack.extend(complex.cell(c).facets.iter().map(|&(f, _)| f));
        }
    }
    out
}

/// Face closure of the cells whose relative interior meets the cone over σ with apex `v0`.
pub fn support_subcomplex(
    v0: &[Q],
    complex: &CellComplex,
    sigma: usize,
) -> Result<BTreeSet<usize>> {
    if sigma >= complex.len() {
        return Err(Error::UnknownCell(format!("#{sigma}")));
    }
    let pts = cone_points(v0, complex, sigma);
    if let Some(p) = pts.iter().find(|p| !complex.window.contains(p)) {
        return Err(Error::HullEscapesWindow(fmt_qvec(p)));
    }
    let start = complex.locate(v0).ok_or_else(|| Error::NotAVertex(fmt_qvec(v0)))?;
    Ok(face_closure(complex, cells_meeting_from(start, &pts, complex)))
}

/// Reduced integral homology of the augmented chain complex of `cells` vanishes.
///
/// Free faces are collapsed first; the remainder is settled by Smith invariants.
pub fn is_acyclic(cells: &BTreeSet<usize>, complex: &CellComplex) -> Result<bool> {
    for &c in cells {
        if complex.cell(c).facets.iter().any(|(f, _)| !cells.contains(f)) {
            return Err(Error::NotFaceClosed(complex.cell(c).id()));
        }
    }
    let mut alive: BTreeSet<usize> = cells.clone();
    let cofaces_in = |alive: &BTreeSet<usize>, t: usize| -> Vec<usize> {
        complex.cell(t).cofaces.iter().copied().filter(|c| alive.contains(c)).collect()
    };
    loop {
        let free = alive.iter().copied().find_map(|t| match cofaces_in(&alive, t).as_slice() {
            [s] => Some((t, *s)),
            _ => None,
        });
        match free {
            Some((t, s)) => {
                alive.remove(&t);
                alive.remove(&s);
            }
            None => break,
        }
    }

    let rank = complex.rank();
    let mut by_dim: Vec<Vec<usize>> = vec![Vec::new(); rank + 1];
    for &c in &alive {
        by_dim[complex.cell(c).dim].push(c);
    }
    // n_{-1} = 1, boundary matrices ∂_d : C_d → C_{d-1} for d = 0..=rank
    let mut sizes = vec![1usize];
    sizes.extend(by_dim.iter().map(|v| v.len()));
    let mut ranks = Vec::new();
    for d in 0..=rank {
        let cols = &by_dim[d];
        let mat: IntMatrix = if d == 0 {
            vec![vec![1; cols.len()]]
        } else {
            let pos: HashMap<usize, usize> =
                by_dim[d - 1].iter().enumerate().map(|(i, &c)| (c, i)).collect();
            let mut m = vec![vec![0i128; cols.len()]; by_dim[d - 1].len()];
            for (j, &c) in cols.iter().enumerate() {
                for &(f, e) in &complex.cell(c).facets {
                    m[pos[&f]][j] = e as i128;
                }
            }
            m
        };
        let inv = if cols.is_empty() || mat.is_empty() { Vec::new() } else { smith_invariants(&mat)? };
        if inv.iter().any(|&x| x != 1) {
            return Ok(false);
        }
        ranks.push(inv.len());
    }
    // H_{d} = 0 for d = -1..=rank: n_d = rank ∂_d + rank ∂_{d+1}
    // sizes[k] is degree k-1; ranks[k] is ∂_k with image in degree k-1
    for (k, &n) in sizes.iter().enumerate() {
        let outgoing = if k == 0 { 0 } else { ranks[k - 1] };
        let incoming = ranks.get(k).copied().unwrap_or(0);
        if n != outgoing + incoming {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `g` fixes every vertex of every cell in `cells`.
pub fn fixes_pointwise(g: &AffineIsometry, complex: &CellComplex, cells: &BTreeSet<usize>) -> bool {
    cells
        .iter()
        .flat_map(|&c| complex.cell(c).vertices.iter())
        .all(|v| g.apply(v) == *v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apartment::{ball_window, build_complex};
    use crate::rational::qvec;
    use crate::roots::{affine_roots_in_window, build_root_system, RootType};

    fn complex(t: RootType, m: u32, center: &[Q], radius: i64) -> CellComplex {
        let sys = build_root_system(t);
        let w = ball_window(&sys, center, Q::from(radius)).unwrap();
        let roots = affine_roots_in_window(&sys, m, &w).unwrap();
        build_complex(&sys, m, &roots, w).unwrap()
    }

    fn grid() -> CellComplex {
        let sys = build_root_system(RootType::A1xA1);
        let w = Polytope::cube(&qvec(&[0, 0]), &qvec(&[3, 3])).unwrap();
        let roots = affine_roots_in_window(&sys, 1, &w).unwrap();
        build_complex(&sys, 1, &roots, w).unwrap()
    }

    fn ids(c: &CellComplex, s: &BTreeSet<usize>) -> BTreeSet<Vec<QVec>> {
        s.iter().map(|&i| c.cell(i).vertices.clone()).collect()
    }

    #[test]
    fn search_matches_full_scan() {
        for (t, m) in [(RootType::A2, 2), (RootType::G2, 1), (RootType::B2, 3)] {
            let c = complex(t, m, &qvec(&[0, 0]), 2);
            let v0 = qvec(&[0, 0]);
            let start = c.vertex_at(&v0).unwrap();
            for sigma in 0..c.len() {
                let pts = cone_points(&v0, &c, sigma);
                assert_eq!(
                    cells_meeting_from(start, &pts, &c),
                    cells_meeting_scan(Exec::Sequential, &pts, &c),
                    "{t} m={m} cell {}",
                    c.cell(sigma).id()
                );
            }
        }
    }

    #[test]
    fn hull_of_vertex_is_point() {
        let c = complex(RootType::A1, 2, &qvec(&[0]), 2);
        let v = c.vertex_at(&qvec(&[0])).unwrap();
        assert_eq!(cone_hull(&qvec(&[0]), &c, v).vertices, vec![qvec(&[0])]);
        assert_eq!(support_subcomplex(&qvec(&[0]), &c, v).unwrap(), BTreeSet::from([v]));
    }

    #[test]
    fn a1_interval_cover() {
        let c = complex(RootType::A1, 2, &qvec(&[0]), 2);
        let sigma = c.locate(&[Q::new(7, 4)]).unwrap();
        assert_eq!(cone_hull(&qvec(&[0]), &c, sigma).vertices, vec![qvec(&[0]), qvec(&[2])]);
        let s = support_subcomplex(&qvec(&[0]), &c, sigma).unwrap();
        // interval-cover oracle: cells of [0,2] are the points k/2 and the four half-edges
        let mut expect = BTreeSet::new();
        for k in 0..=4 {
            expect.insert(vec![vec![Q::new(k, 2)]]);
        }
        for k in 0..4 {
            expect.insert(vec![vec![Q::new(k, 2)], vec![Q::new(k + 1, 2)]]);
        }
        assert_eq!(ids(&c, &s), expect);
        assert!(is_acyclic(&s, &c).unwrap());
    }

    #[test]
    fn grid_segment_cells() {
        let c = grid();
        let target = c.vertex_at(&qvec(&[2, 1])).unwrap();
        let s = support_subcomplex(&qvec(&[0, 0]), &c, target).unwrap();
        // the segment from (0,0) to (2,1) crosses two open squares and the edge x = 1 at (1, 1/2)
        let squares: Vec<_> = s.iter().filter(|&&i| c.cell(i).dim == 2).collect();
        assert_eq!(squares.len(), 2);
        let mut verts: Vec<QVec> =
            s.iter().filter(|&&i| c.cell(i).dim == 0).map(|&i| c.cell(i).vertices[0].clone()).collect();
        verts.sort();
        let expect: Vec<QVec> =
            [[0, 0], [0, 1], [1, 0], [1, 1], [2, 0], [2, 1]].iter().map(|v| qvec(v)).collect();
        assert_eq!(verts, expect);
        assert_eq!(s.len(), 6 + 7 + 2);
        assert!(is_acyclic(&s, &c).unwrap());
    }

    #[test]
    fn acyclicity_basics() {
        let c = complex(RootType::A1, 1, &qvec(&[0]), 2);
        let a = c.vertex_at(&qvec(&[0])).unwrap();
        let b = c.vertex_at(&qvec(&[2])).unwrap();
        assert!(is_acyclic(&BTreeSet::from([a]), &c).unwrap());
        assert!(!is_acyclic(&BTreeSet::from([a, b]), &c).unwrap());
        assert!(!is_acyclic(&BTreeSet::new(), &c).unwrap());
        let e = c.locate(&[Q::new(1, 2)]).unwrap();
        assert!(matches!(is_acyclic(&BTreeSet::from([e]), &c), Err(Error::NotFaceClosed(_))));
    }

    #[test]
    fn boundary_circle_is_not_acyclic() {
        let c = grid();
        let sq = c.locate(&[Q::new(1, 2), Q::new(1, 2)]).unwrap();
        let mut s = face_closure(&c, [sq]);
        s.remove(&sq);
        assert!(!is_acyclic(&s, &c).unwrap());
        s.insert(sq);
        assert!(is_acyclic(&s, &c).unwrap());
    }

    #[test]
    fn hull_escaping_window_is_an_error() {
        let c = complex(RootType::A1, 1, &qvec(&[0]), 2);
        let v = c.vertex_at(&qvec(&[2])).unwrap();
        assert!(matches!(
            support_subcomplex(&qvec(&[-2]), &c, v).map(|_| ()),
            Ok(())
        ));
        let c2 = complex(RootType::A1, 1, &qvec(&[1]), 1);
        let v = c2.vertex_at(&qvec(&[2])).unwrap();
        assert!(matches!(support_subcomplex(&qvec(&[3]), &c2, v), Err(Error::HullEscapesWindow(_))));
    }

    #[test]
    fn a2_supports_are_acyclic_and_monotone() {
        let c = complex(RootType::A2, 1, &qvec(&[0, 0]), 2);
        let v0 = qvec(&[0, 0]);
        for sigma in 0..c.len() {
            let s = support_subcomplex(&v0, &c, sigma).unwrap();
            assert!(s.contains(&sigma));
            assert!(s.contains(&c.vertex_at(&v0).unwrap()));
            assert!(is_acyclic(&s, &c).unwrap(), "support of {} not acyclic", c.cell(sigma).id());
            for &(f, _) in &c.cell(sigma).facets {
                let sf = support_subcomplex(&v0, &c, f).unwrap();
                assert!(sf.is_subset(&s));
            }
            let hull = cone_hull(&v0, &c, sigma);
            let mut pts = c.cell(sigma).vertices.clone();
            pts.push(v0.clone());
            assert!(hull.vertices.iter().all(|v| pts.contains(v)));
        }
    }
}
