//! Moy-Prasad filtration subgroups of a split group, recorded as integer
//! thresholds per gradient: `G_{x,r}` contains `U_{α+n}` exactly when
//! `n ≥ t(α)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::apartment::CellComplex;
use crate::cone::{relint_witness, support_subcomplex, clip_to_cell};
use crate::error::{Error, Result};
use crate::par::{self, Exec};
use crate::rational::{add, centroid, dot, fmt_qvec, scale, sub, Q, QVec};
use crate::roots::{FiniteRootSystem, RootType};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MPFiltration {
    pub system: RootType,
    /// Indexed like `FiniteRootSystem::roots`.
    pub thresholds: Vec<i128>,
    /// Level of the torus slice `T_{t₀}`.
    pub imaginary: i128,
    pub strict: bool,
}

fn threshold(value: Q, strict: bool) -> i128 {
    // least n with value + n > r (strict) or ≥ r, where value = r − α(x) is passed in
    if strict {
        value.floor() + 1
    } else {
        value.ceil()
    }
}

pub fn index_set(sys: &FiniteRootSystem, x: &[Q], r: Q, strict: bool) -> Result<MPFiltration> {
    if r.signum() < 0 {
        return Err(Error::NegativeDepth(r.to_string()));
    }
    if x.len() != sys.rank {
        return Err(Error::DimensionMismatch { expected: sys.rank, got: x.len() });
    }
    let thresholds = sys.roots.iter().map(|a| threshold(r - dot(a, x), strict)).collect();
    Ok(MPFiltration {
        system: sys.type_label,
        thresholds,
        imaginary: threshold(r, strict).max(0),
        strict,
    })
}

/// Generator-level containment `F_big ⊇ F_small`.
pub fn contains(big: &MPFiltration, small: &MPFiltration) -> Result<bool> {
    if big.system != small.system || big.thresholds.len() != small.thresholds.len() {
        return Err(Error::MismatchedSystems);
    }
    Ok(big.imaginary <= small.imaginary
        && big.thresholds.iter().zip(&small.thresholds).all(|(b, s)| b <= s))
}

/// Point of the relative interior distinct from the barycenter.
fn second_sample(complex: &CellComplex, cell: usize) -> QVec {
    let c = complex.cell(cell);
    centroid(&[c.barycenter.clone(), c.vertices[0].clone()])
}

/// A cell on which `x ↦ G_{x,r,+}` is not constant, with two witnessing points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstancyFailure {
    pub cell: String,
    pub root: QVec,
    pub points: (QVec, QVec),
}

/// Constancy of `G_{x,r,+}` on relative interiors of all cells. `Ok(None)` on
/// success; otherwise a witness.
pub fn facet_constancy(complex: &CellComplex, r: Q) -> Result<Option<ConstancyFailure>> {
    if r.signum() < 0 {
        return Err(Error::NegativeDepth(r.to_string()));
    }
    let sys = &complex.system;
    for cell in &complex.cells {
        if cell.dim == 0 {
            continue;
        }
        for a in &sys.roots {
            // α + n > r flips inside relint iff r − n lies strictly between the extreme values of α
            let vals: Vec<Q> = cell.vertices.iter().map(|v| dot(a, v)).collect();
            let lo = *vals.iter().min().unwrap();
            let hi = *vals.iter().max().unwrap();
            let n = (r - lo).floor();
            let crossing = r - Q::int(n);
            let crossing = if crossing == lo { crossing + Q::ONE } else { crossing };
            if lo < crossing && crossing < hi {
                // two interior points on either side of α = crossing, along a segment through relint
                let (p, q) = split_points(complex, cell.index, a, crossing);
                return Ok(Some(ConstancyFailure { cell: cell.id(), root: a.clone(), points: (p, q) }));
            }
        }
        let b = index_set(sys, &cell.barycenter, r, true)?;
        let s = index_set(sys, &second_sample(complex, cell.index), r, true)?;
        if b != s {
            return Ok(Some(ConstancyFailure {
                cell: cell.id(),
                root: Vec::new(),
                points: (cell.barycenter.clone(), second_sample(complex, cell.index)),
            }));
        }
    }
    Ok(None)
}

/// Relative-interior points with α below and above `level`.
fn split_points(complex: &CellComplex, cell: usize, a: &[Q], level: Q) -> (QVec, QVec) {
    let c = complex.cell(cell);
    let low = c.vertices.iter().min_by_key(|v| dot(a, v)).unwrap();
    let high = c.vertices.iter().max_by_key(|v| dot(a, v)).unwrap();
    let b = &c.barycenter;
    // points slightly pulled toward the barycenter from the two extreme vertices stay interior;
    // pick the pull so each side of the level is reached
    let mut t = Q::new(1, 2);
    loop {
        let p = add(&scale(Q::ONE - t, low), &scale(t, b));
        let q = add(&scale(Q::ONE - t, high), &scale(t, b));
        if dot(a, &p) < level && dot(a, &q) > level {
            return (p, q);
        }
        t = t / Q::int(2);
    }
}

pub fn facet_constancy_check(complex: &CellComplex, r: Q) -> Result<bool> {
    Ok(facet_constancy(complex, r)?.is_none())
}

/// `K_τ ⊆ K_σ` for every cell σ and each of its facets τ, with `K = G_{·,r,+}`
/// evaluated at barycenters.
pub fn face_monotonicity_check(complex: &CellComplex, r: Q) -> Result<bool> {
    if !r.on_grid(complex.m) {
        return Err(Error::OffGrid { r: r.to_string(), m: complex.m });
    }
    let sys = &complex.system;
    let k: Vec<MPFiltration> = complex
        .cells
        .iter()
        .map(|c| index_set(sys, &c.barycenter, r, true))
        .collect::<Result<_>>()?;
    for c in &complex.cells {
        if !contains(&k[c.index], &k[c.index])? {
            return Ok(false);
        }
        for &(f, _) in &c.facets {
            if !contains(&k[c.index], &k[f])? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn generic_direction(rank: usize) -> QVec {
    // no root of a supported type is orthogonal to this direction
    (0..rank).map(|i| Q::new(1, 7i128.pow(i as u32))).collect()
}

/// Φ⁺ with α(x − y) ≥ 0, ties broken by a fixed generic direction.
pub fn positive_system_for(sys: &FiniteRootSystem, x: &[Q], y: &[Q]) -> Vec<usize> {
    let d = sub(x, y);
    let p = generic_direction(sys.rank);
    (0..sys.roots.len())
        .filter(|&i| {
            let a = &sys.roots[i];
            let v = dot(a, &d);
            v.signum() > 0 || (v.is_zero() && dot(a, &p).signum() > 0)
        })
        .collect()
}

/// `λ` with `z = (1 − λ)x + λy`, if z is on the segment.
fn segment_parameter(x: &[Q], y: &[Q], z: &[Q]) -> Option<Q> {
    let d = sub(y, x);
    let w = sub(z, x);
    if d.iter().all(Q::is_zero) {
        return w.iter().all(Q::is_zero).then_some(Q::ZERO);
    }
    let k = d.iter().position(|c| !c.is_zero())?;
    let lambda = w[k] / d[k];
    let on_line = d.iter().zip(&w).all(|(&di, &wi)| lambda * di == wi);
    (on_line && lambda.signum() >= 0 && lambda <= Q::ONE).then_some(lambda)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mp1Outcome {
    pub holds: bool,
    /// Indices of the chosen positive roots.
    pub positive: Vec<usize>,
}

/// Threshold form of `G_{z,r} ⊆ G_{x,r} G_{y,r}`: with Φ⁺ chosen so that
/// α(x) ≥ α(z) ≥ α(y), the upper slices at z come from x and the lower ones from y.
pub fn lemma_mp1_check(
    sys: &FiniteRootSystem,
    x: &[Q],
    y: &[Q],
    z: &[Q],
    r: Q,
    strict: bool,
) -> Result<Mp1Outcome> {
    if segment_parameter(x, y, z).is_none() {
        return Err(Error::NotOnSegment);
    }
    let fx = index_set(sys, x, r, strict)?;
    let fy = index_set(sys, y, r, strict)?;
    let fz = index_set(sys, z, r, strict)?;
    let positive = positive_system_for(sys, x, y);
    let holds = (0..sys.roots.len()).all(|i| {
        let from = if positive.contains(&i) { &fx } else { &fy };
        from.thresholds[i] <= fz.thresholds[i]
    }) && fx.imaginary == fz.imaginary
        && fy.imaginary == fz.imaginary;
    Ok(Mp1Outcome { holds, positive })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Mp1Sample {
    pub x: QVec,
    pub y: QVec,
    pub z: QVec,
    pub r: Q,
}

pub fn random_mp1_samples(rank: usize, count: usize, seed: u64) -> Vec<Mp1Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coord = |rng: &mut ChaCha8Rng| Q::new(rng.gen_range(-36..=36), rng.gen_range(1..=12));
    let depths = [Q::new(1, 2), Q::ONE, Q::new(3, 2)];
    (0..count)
        .map(|_| {
            let x: QVec = (0..rank).map(|_| coord(&mut rng)).collect();
            let y: QVec = (0..rank).map(|_| coord(&mut rng)).collect();
            let den = rng.gen_range(1..=12);
            let lambda = Q::new(rng.gen_range(0..=den), den);
            let z = add(&scale(Q::ONE - lambda, &x), &scale(lambda, &y));
            let r = depths[rng.gen_range(0..depths.len())];
            Mp1Sample { x, y, z, r }
        })
        .collect()
}

/// Number of seeded random instances on which the MP1 check holds.
pub fn mp1_random_sweep(sys: &FiniteRootSystem, count: usize, seed: u64, exec: Exec) -> Result<usize> {
    let samples = random_mp1_samples(sys.rank, count, seed);
    let outcomes = par::map(exec, &samples, |s| lemma_mp1_check(sys, &s.x, &s.y, &s.z, s.r, false));
    let mut ok = 0;
    for o in outcomes {
        if o?.holds {
            ok += 1;
        }
    }
    Ok(ok)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Mp2Witness {
    pub y: QVec,
    pub z: QVec,
    /// Cell whose relative interior contains z; τ is a face of it.
    pub cell: String,
    pub mp1: bool,
    pub monotone: bool,
}

/// Witness for `K_τ ⊆ K_x K_σ`: y ∈ σ and z ∈ [x, y] inside a cell incident to τ.
/// Returns `None` when τ is outside the support of the cone over σ.
pub fn lemma_mp2_witness(
    complex: &CellComplex,
    x: &[Q],
    sigma: usize,
    tau: usize,
    r: Q,
) -> Result<Option<Mp2Witness>> {
    let support = support_subcomplex(x, complex, sigma)?;
    if !support.contains(&tau) {
        return Ok(None);
    }
    let sys = &complex.system;
    let sc = complex.cell(sigma);
    let mut hull = sc.vertices.clone();
    hull.push(x.to_vec());
    let (rho, z) = if tau == sigma {
        (sigma, sc.barycenter.clone())
    } else {
        let mut around = vec![tau];
        around.extend(cofaces_closure(complex, tau));
        around
            .into_iter()
            .find_map(|rho| relint_witness(&hull, complex, rho).map(|z| (rho, z)))
            .ok_or_else(|| Error::OutsideSupport(complex.cell(tau).id()))?
    };
    let y = if z == x {
        sc.barycenter.clone()
    } else if tau == sigma {
        z.clone()
    } else {
        ray_hit(complex, x, &z, sigma)?
    };
    let mp1 = lemma_mp1_check(sys, x, &y, &z, r, true)?.holds;
    let kz = index_set(sys, &z, r, true)?;
    let kt = index_set(sys, &complex.cell(tau).barycenter, r, true)?;
    let monotone = contains(&kz, &kt)?;
    Ok(Some(Mp2Witness { y, z, cell: complex.cell(rho).id(), mp1, monotone }))
}

fn cofaces_closure(complex: &CellComplex, c: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut stack = complex.cell(c).cofaces.clone();
    while let Some(f) = stack.pop() {
        if !out.contains(&f) {
            out.push(f);
            stack.extend(complex.cell(f).cofaces.iter().copied());
        }
    }
    out.sort_unstable();
    out
}

/// A point of closure(σ) on the ray from x through z, beyond z.
fn ray_hit(complex: &CellComplex, x: &[Q], z: &[Q], sigma: usize) -> Result<QVec> {
    let d = sub(z, x);
    let norm = |v: &[Q]| v.iter().map(Q::abs).max().unwrap_or(Q::ZERO);
    let reach = complex
        .cell(sigma)
        .vertices
        .iter()
        .map(|v| norm(&sub(v, x)))
        .max()
        .unwrap_or(Q::ZERO);
    let t = reach / norm(&d) + Q::ONE;
    let far = add(x, &scale(t, &d));
    let hit = clip_to_cell(&[z.to_vec(), far], complex, sigma);
    hit.into_iter().min().ok_or_else(|| Error::Degenerate(format!("ray through {} misses σ", fmt_qvec(z))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apartment::{ball_window, build_complex};
    use crate::rational::qvec;
    use crate::roots::{affine_roots_in_window, build_root_system};
    use proptest::prelude::*;

    fn a1() -> FiniteRootSystem {
        build_root_system(RootType::A1)
    }

    /// Thresholds by direct search over integers, as an oracle.
    fn brute(value_at_x: Q, r: Q, strict: bool) -> i128 {
        (-100..100)
            .find(|&n| {
                let v = value_at_x + Q::int(n);
                if strict {
                    v > r
                } else {
                    v >= r
                }
            })
            .unwrap()
    }

    fn complex(t: RootType, m: u32, radius: i64) -> CellComplex {
        let sys = build_root_system(t);
        let w = ball_window(&sys, &vec![Q::ZERO; sys.rank], Q::from(radius)).unwrap();
        let roots = affine_roots_in_window(&sys, m, &w).unwrap();
        build_complex(&sys, m, &roots, w).unwrap()
    }

    fn root_pos(sys: &FiniteRootSystem, v: i64) -> usize {
        sys.index_of(&qvec(&[v])).unwrap()
    }

    #[test]
    fn sl2_index_sets() {
        let s = a1();
        let (p, n) = (root_pos(&s, 1), root_pos(&s, -1));
        let f = index_set(&s, &qvec(&[0]), Q::ZERO, true).unwrap();
        assert_eq!((f.thresholds[p], f.thresholds[n], f.imaginary), (1, 1, 1));
        let f = index_set(&s, &[Q::new(1, 2)], Q::new(1, 2), false).unwrap();
        assert_eq!((f.thresholds[p], f.thresholds[n], f.imaginary), (0, 1, 1));
        assert!(matches!(index_set(&s, &qvec(&[0]), Q::new(-1, 2), true), Err(Error::NegativeDepth(_))));
    }

    #[test]
    fn containment_examples() {
        let s = a1();
        let f = index_set(&s, &qvec(&[0]), Q::ONE, true).unwrap();
        assert!(contains(&f, &f).unwrap());
        let big = index_set(&s, &qvec(&[0]), Q::ZERO, true).unwrap();
        let small = index_set(&s, &qvec(&[1]), Q::ONE, true).unwrap();
        // at x = 1, r = 1: t(+α) = 1, t(−α) = 3, t₀ = 2; at x = 0, r = 0 all thresholds are 1
        assert!(contains(&big, &small).unwrap());
        assert!(!contains(&small, &big).unwrap());
        let other = index_set(&build_root_system(RootType::A2), &qvec(&[0, 0]), Q::ONE, true).unwrap();
        assert!(matches!(contains(&f, &other), Err(Error::MismatchedSystems)));
    }

    #[test]
    fn constancy_on_refined_complexes() {
        assert!(facet_constancy_check(&complex(RootType::A1, 2, 2), Q::new(1, 2)).unwrap());
        assert!(facet_constancy_check(&complex(RootType::A2, 3, 1), Q::new(1, 3)).unwrap());
        let unrefined = complex(RootType::A1, 1, 2);
        let fail = facet_constancy(&unrefined, Q::new(1, 2)).unwrap().expect("a counterexample");
        let s = a1();
        let (p, q) = fail.points;
        assert_ne!(index_set(&s, &p, Q::new(1, 2), true).unwrap(), index_set(&s, &q, Q::new(1, 2), true).unwrap());
    }

    #[test]
    fn monotonicity() {
        let c = complex(RootType::A1, 2, 2);
        assert!(face_monotonicity_check(&c, Q::new(1, 2)).unwrap());
        assert!(matches!(face_monotonicity_check(&c, Q::new(1, 3)), Err(Error::OffGrid { .. })));
        assert!(face_monotonicity_check(&complex(RootType::B2, 2, 1), Q::new(3, 2)).unwrap());
    }

    #[test]
    fn mp1_sl2_example() {
        let s = a1();
        let out = lemma_mp1_check(&s, &qvec(&[0]), &qvec(&[2]), &qvec(&[1]), Q::ONE, false).unwrap();
        assert!(out.holds);
        assert_eq!(out.positive, vec![root_pos(&s, -1)]);
        assert!(lemma_mp1_check(&s, &qvec(&[0]), &qvec(&[2]), &qvec(&[0]), Q::ONE, false).unwrap().holds);
        assert!(matches!(
            lemma_mp1_check(&s, &qvec(&[0]), &qvec(&[2]), &qvec(&[3]), Q::ONE, false),
            Err(Error::NotOnSegment)
        ));
    }

    #[test]
    fn mp1_reversed_pairing_fails_on_sl2_example() {
        // pairing Φ⁺ with y and Φ⁻ with x breaks already for the +α slice
        let s = a1();
        let (x, y, z, r) = (qvec(&[0]), qvec(&[2]), qvec(&[1]), Q::ONE);
        let pos = positive_system_for(&s, &x, &y);
        let (fx, fy, fz) = (
            index_set(&s, &x, r, false).unwrap(),
            index_set(&s, &y, r, false).unwrap(),
            index_set(&s, &z, r, false).unwrap(),
        );
        let reversed = (0..2).all(|i| {
            let from = if pos.contains(&i) { &fy } else { &fx };
            from.thresholds[i] <= fz.thresholds[i]
        });
        assert!(!reversed);
    }

    #[test]
    fn mp1_sweeps() {
        for t in RootType::ALL {
            let s = build_root_system(t);
            assert_eq!(mp1_random_sweep(&s, 200, 7, Exec::Sequential).unwrap(), 200, "{t}");
        }
    }

    #[test]
    fn mp2_witnesses() {
        let c = complex(RootType::A1, 2, 2);
        let x = qvec(&[0]);
        let sigma = c.locate(&[Q::new(7, 4)]).unwrap();
        let r = Q::new(1, 2);
        let w = lemma_mp2_witness(&c, &x, sigma, sigma, r).unwrap().unwrap();
        assert_eq!(w.y, w.z);
        let v0 = c.vertex_at(&x).unwrap();
        let w = lemma_mp2_witness(&c, &x, sigma, v0, r).unwrap().unwrap();
        assert_eq!(w.z, x);
        let tau = c.vertex_at(&qvec(&[1])).unwrap();
        let w = lemma_mp2_witness(&c, &x, sigma, tau, r).unwrap().unwrap();
        assert!(w.mp1 && w.monotone);
        assert!(c.cell(sigma).vertices[0] <= w.y && w.y <= c.cell(sigma).vertices[1]);
        let outside = c.vertex_at(&qvec(&[-1])).unwrap();
        assert!(lemma_mp2_witness(&c, &x, sigma, outside, r).unwrap().is_none());
    }

    proptest! {
        #[test]
        fn thresholds_match_enumeration(num in -60i128..60, den in 1i128..7, rn in 0i128..12, strict: bool) {
            let s = a1();
            let x = vec![Q::new(num, den)];
            let r = Q::new(rn, 4);
            let f = index_set(&s, &x, r, strict).unwrap();
            for (i, a) in s.roots.iter().enumerate() {
                prop_assert_eq!(f.thresholds[i], brute(dot(a, &x), r, strict));
            }
            let t0 = (0..100).find(|&n| if strict { Q::int(n) > r } else { Q::int(n) >= r }).unwrap();
            prop_assert_eq!(f.imaginary, t0);
            let ns = index_set(&s, &x, r, !strict).unwrap();
            let (st, nst) = if strict { (&f, &ns) } else { (&ns, &f) };
            prop_assert!(contains(nst, st).unwrap());
        }

        #[test]
        fn antitone_and_translation_shift(
            coords in proptest::collection::vec(-24i128..24, 2),
            shift in proptest::collection::vec(-3i64..3, 2),
            r1 in 0i128..8, dr in 0i128..8,
        ) {
            let s = build_root_system(RootType::B2);
            let x: QVec = coords.iter().map(|&c| Q::new(c, 6)).collect();
            let lo = index_set(&s, &x, Q::new(r1, 2), true).unwrap();
            let hi = index_set(&s, &x, Q::new(r1 + dr, 2), true).unwrap();
            prop_assert!(contains(&lo, &hi).unwrap());
            // integer vectors pair integrally with every root of B2
            let lam = qvec(&shift);
            let moved = index_set(&s, &add(&x, &lam), Q::new(r1, 2), true).unwrap();
            for (i, a) in s.roots.iter().enumerate() {
                let k = dot(a, &lam);
                prop_assert!(k.is_integer());
                prop_assert_eq!(moved.thresholds[i], lo.thresholds[i] - k.floor());
            }
        }
    }
}
