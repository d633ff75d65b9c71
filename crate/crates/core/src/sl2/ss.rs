//! The chain complex `C_*(X, V)` of a coefficient system on the tree ball:
//! each cell τ carries the fixed space `V^{K̄_τ}`, augmented by V in degree −1.
//! The K̄_x-invariant part is taken by orbit sums, and its homology is the
//! exactness check.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::group::{enumerate_sl2, iwahori_decomposition_check, Group, Mat2, Modulus};
use super::tree::{build_tree_ball, TreeBall};
use crate::error::{Error, Result};
use crate::linalg::sparse::SparseMatrix;
use crate::par::{self, Exec};
use crate::rational::Q;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Representation {
    Trivial,
    /// `ℚ[Γ/K̄_x]` restricted to the subgroup generated by all `K̄_τ` of the ball.
    Permutation,
    /// `ℚ[Γ/K̄_x]` on all of Γ.
    PermutationFull,
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Representation::Trivial => "trivial",
            Representation::Permutation => "permutation",
            Representation::PermutationFull => "permutation-full",
        })
    }
}

impl FromStr for Representation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trivial" => Ok(Representation::Trivial),
            "permutation" | "perm" => Ok(Representation::Permutation),
            "permutation-full" | "perm-full" => Ok(Representation::PermutationFull),
            _ => Err(Error::Parse(format!("unknown representation {s:?}"))),
        }
    }
}

/// V with a permutation basis, and for each cell the orbits of `K̄_τ` on it.
/// The fixed space `V^{K̄_τ}` has the orbit sums as basis.
#[derive(Clone, Debug)]
pub struct CoefficientSystem {
    pub representation: Representation,
    /// Modulus of the coset space `Γ/K̄_x ≅ SL₂(ℤ/pᵗ)`.
    pub level: Modulus,
    pub basis: Vec<Mat2>,
    index: HashMap<Mat2, usize>,
    pub orbit_of: Vec<Vec<usize>>,
    pub orbits: Vec<Vec<Vec<usize>>>,
}

impl CoefficientSystem {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn fixed_dim(&self, cell: usize) -> usize {
        self.orbits[cell].len()
    }

    /// Permutation of the basis by g.
    pub fn act(&self, g: &Mat2) -> Result<Vec<usize>> {
        if self.representation == Representation::Trivial {
            return Ok(vec![0]);
        }
        let g = g.reduce(&self.level);
        self.basis
            .iter()
            .map(|w| {
                self.index
                    .get(&g.mul(w, &self.level))
                    .copied()
                    .ok_or_else(|| Error::CoefficientSystem(format!("{g:?} does not preserve the basis")))
            })
            .collect()
    }
}

fn orbits_under(group: &Group, basis: &[Mat2], index: &HashMap<Mat2, usize>, level: &Modulus) -> (Vec<usize>, Vec<Vec<usize>>) {
    let reduced = group.reduce(level);
    let mut orbit_of = vec![usize::MAX; basis.len()];
    let mut orbits = Vec::new();
    for (i, w) in basis.iter().enumerate() {
        if orbit_of[i] != usize::MAX {
            continue;
        }
        let id = orbits.len();
        let mut members: Vec<usize> = reduced.elements.iter().map(|k| index[&k.mul(w, level)]).collect();
        members.sort_unstable();
        members.dedup();
        for &j in &members {
            orbit_of[j] = id;
        }
        orbits.push(members);
    }
    (orbit_of, orbits)
}

pub fn coefficient_system(ball: &TreeBall, rep: Representation, exec: Exec) -> Result<CoefficientSystem> {
    let centre = &ball.cells[ball.centre()];
    let (level, basis) = match rep {
        Representation::Trivial => (Modulus::new(ball.p, 0), vec![Mat2::ID]),
        _ => {
            let (u, l, d) = centre.thresholds;
            if u != l || l != d {
                return Err(Error::CoefficientSystem(format!("centre subgroup is not principal: {:?}", centre.thresholds)));
            }
            let level = Modulus::new(ball.p, d.min(ball.modulus.n));
            let basis = if rep == Representation::PermutationFull {
                enumerate_sl2(&level)
            } else {
                let gens: Vec<Mat2> = ball.cells.iter().flat_map(|c| c.group.reduce(&level).elements).collect();
                Group::generated(&gens, &level).elements
            };
            (level, basis)
        }
    };
    let index: HashMap<Mat2, usize> = basis.iter().enumerate().map(|(i, g)| (*g, i)).collect();
    let (orbit_of, orbits): (Vec<_>, Vec<_>) = if rep == Representation::Trivial {
        ball.cells.iter().map(|_| (vec![0], vec![vec![0]])).unzip()
    } else {
        par::map(exec, &ball.cells, |c| orbits_under(&c.group, &basis, &index, &level)).into_iter().unzip()
    };
    let v = CoefficientSystem { representation: rep, level, basis, index, orbit_of, orbits };

    // a face ρ ⊂ σ needs V^{K̄_σ} ⊆ V^{K̄_ρ}: every ρ-orbit inside one σ-orbit
    for c in &ball.cells {
        for &(f, _) in &c.faces {
            for orbit in &v.orbits[f] {
                if orbit.iter().any(|&w| v.orbit_of[c.index][w] != v.orbit_of[c.index][orbit[0]]) {
                    return Err(Error::CoefficientSystem(format!("fixed space of {c} not inside that of {}", ball.cells[f])));
                }
            }
        }
    }
    Ok(v)
}

/// Cell index used for the augmentation term in degree −1.
pub const AUGMENTATION: usize = usize::MAX;

/// The complex `C₁ → C₀ → C₋₁`. Basis vectors are (cell, orbit) pairs; in
/// degree −1 they are (AUGMENTATION, basis vector of V).
#[derive(Clone, Debug, PartialEq)]
pub struct SsComplex {
    /// Degrees 1, 0, −1 in that order.
    pub basis: [Vec<(usize, usize)>; 3],
    /// `∂ : C₁ → C₀`.
    pub d1: SparseMatrix,
    /// `C₀ → C₋₁`.
    pub d0: SparseMatrix,
}

impl SsComplex {
    pub fn dims(&self) -> [usize; 3] {
        [self.basis[0].len(), self.basis[1].len(), self.basis[2].len()]
    }

    pub fn is_complex(&self) -> bool {
        self.d0.mul(&self.d1).is_zero()
    }

    /// `dim H₁, dim H₀, dim H₋₁`.
    pub fn homology(&self) -> [usize; 3] {
        let [n1, n0, nm] = self.dims();
        let (r1, r0) = (self.d1.rank(), self.d0.rank());
        [n1 - r1, n0 - r1 - r0, nm - r0]
    }

    pub fn is_exact(&self) -> bool {
        self.homology() == [0, 0, 0]
    }

    fn lookup(&self) -> [HashMap<(usize, usize), usize>; 3] {
        self.basis.clone().map(|b| b.into_iter().enumerate().map(|(i, k)| (k, i)).collect())
    }
}

/// Build the complex, leaving out the summands of the `dropped` cells.
pub fn build_ss_complex(ball: &TreeBall, v: &CoefficientSystem, dropped: &[usize]) -> SsComplex {
    let keep = |c: usize| !dropped.contains(&c);
    let mut basis: [Vec<(usize, usize)>; 3] = Default::default();
    for c in &ball.cells {
        if keep(c.index) {
            let deg = 1 - c.dim();
            basis[deg].extend((0..v.fixed_dim(c.index)).map(|o| (c.index, o)));
        }
    }
    basis[2] = (0..v.dim()).map(|w| (AUGMENTATION, w)).collect();
    let mut cx = SsComplex {
        d1: SparseMatrix::new(basis[1].len(), basis[0].len()),
        d0: SparseMatrix::new(basis[2].len(), basis[1].len()),
        basis,
    };
    let [_, at0, _] = cx.lookup();
    for (j, &(e, o)) in cx.basis[0].iter().enumerate() {
        let members = &v.orbits[e][o];
        for &(f, sign) in &ball.cells[e].faces {
            if !keep(f) {
                continue;
            }
            // the orbit sum on e is the sum of the f-orbits it contains
            let mut targets: Vec<usize> = members.iter().map(|&w| v.orbit_of[f][w]).collect();
            targets.sort_unstable();
            targets.dedup();
            for t in targets {
                cx.d1.add(at0[&(f, t)], j, Q::from(sign as i64));
            }
        }
    }
    for (j, &(c, o)) in cx.basis[1].iter().enumerate() {
        for &w in &v.orbits[c][o] {
            cx.d0.add(w, j, Q::ONE);
        }
    }
    cx
}

/// The permutation of each degree's basis induced by g.
pub fn basis_permutation(ball: &TreeBall, v: &CoefficientSystem, cx: &SsComplex, g: &Mat2) -> Result<[Vec<usize>; 3]> {
    let cells = ball.act(g);
    let on_v = v.act(g)?;
    let lookup = cx.lookup();
    let mut out: [Vec<usize>; 3] = Default::default();
    for deg in 0..3 {
        for &(c, o) in &cx.basis[deg] {
            let key = if c == AUGMENTATION {
                (c, on_v[o])
            } else {
                let img = cells[c];
                (img, v.orbit_of[img][on_v[v.orbits[c][o][0]]])
            };
            let j = lookup[deg]
                .get(&key)
                .ok_or_else(|| Error::CoefficientSystem(format!("{g:?} does not preserve the complex")))?;
            out[deg].push(*j);
        }
    }
    Ok(out)
}

/// The averaging idempotent `e = |K|⁻¹ Σ_k k` on each degree.
pub fn projector(ball: &TreeBall, v: &CoefficientSystem, cx: &SsComplex, k: &Group) -> Result<[SparseMatrix; 3]> {
    let dims = cx.dims();
    let mut e: [SparseMatrix; 3] = dims.map(|n| SparseMatrix::new(n, n));
    let w = Q::new(1, k.order() as i128);
    for g in &k.elements {
        let perm = basis_permutation(ball, v, cx, g)?;
        for deg in 0..3 {
            for (j, &i) in perm[deg].iter().enumerate() {
                e[deg].add(i, j, w);
            }
        }
    }
    Ok(e)
}

/// Idempotence and commutation with both differentials.
pub fn projector_checks(cx: &SsComplex, e: &[SparseMatrix; 3]) -> (bool, bool) {
    let idem = e.iter().all(|m| m.mul(m) == *m);
    let comm = cx.d1.mul(&e[0]) == e[1].mul(&cx.d1) && cx.d0.mul(&e[1]) == e[2].mul(&cx.d0);
    (idem, comm)
}

/// The K-invariant subcomplex, on the basis of K-orbit sums.
pub fn project_invariants(ball: &TreeBall, v: &CoefficientSystem, cx: &SsComplex, k: &Group) -> Result<SsComplex> {
    let perms: Vec<[Vec<usize>; 3]> =
        k.elements.iter().map(|g| basis_permutation(ball, v, cx, g)).collect::<Result<_>>()?;
    // orbit id of each basis vector, and orbit representatives, per degree
    let mut orbit_of: [Vec<usize>; 3] = Default::default();
    let mut members: [Vec<Vec<usize>>; 3] = Default::default();
    for deg in 0..3 {
        let n = cx.basis[deg].len();
        orbit_of[deg] = vec![usize::MAX; n];
        for i in 0..n {
            if orbit_of[deg][i] != usize::MAX {
                continue;
            }
            let id = members[deg].len();
            let mut m: Vec<usize> = perms.iter().map(|p| p[deg][i]).collect();
            m.sort_unstable();
            m.dedup();
            for &j in &m {
                orbit_of[deg][j] = id;
            }
            members[deg].push(m);
        }
    }
    let restrict = |d: &SparseMatrix, src: usize, dst: usize| {
        let mut out = SparseMatrix::new(members[dst].len(), members[src].len());
        for (j, m) in members[src].iter().enumerate() {
            let mut col: HashMap<usize, Q> = HashMap::new();
            for &b in m {
                for (&row, &val) in &d.cols[b] {
                    *col.entry(row).or_insert(Q::ZERO) += val;
                }
            }
            // the image is invariant, so it is read off at orbit representatives
            for (t, tm) in members[dst].iter().enumerate() {
                if let Some(&val) = col.get(&tm[0]) {
                    if !val.is_zero() {
                        out.add(t, j, val);
                    }
                }
            }
        }
        out
    };
    let d1 = restrict(&cx.d1, 0, 1);
    let d0 = restrict(&cx.d0, 1, 2);
    let basis = [0, 1, 2].map(|deg| members[deg].iter().map(|m| cx.basis[deg][m[0]]).collect());
    Ok(SsComplex { basis, d1, d0 })
}

/// `K̄_τ = (K̄_x ∩ K̄_τ)(K̄_σ ∩ K̄_τ)` as element sets.
pub fn coset_decomposition_check(ball: &TreeBall, sigma: usize, tau: usize) -> bool {
    let m = &ball.modulus;
    let kt = &ball.cells[tau].group;
    let a = ball.cells[ball.centre()].group.intersect(kt);
    let b = ball.cells[sigma].group.intersect(kt);
    let prod = Group::product_set(&a.elements, &b.elements, m);
    prod.len() == kt.order() && kt.elements.iter().all(|g| prod.contains(g))
}

/// The coset check for every σ and every τ in the support of the cone over σ.
pub fn all_coset_checks(ball: &TreeBall, exec: Exec) -> Vec<(usize, usize, bool)> {
    let pairs: Vec<(usize, usize)> =
        ball.cells.iter().flat_map(|s| ball.support(s.index).into_iter().map(move |t| (s.index, t))).collect();
    par::map(exec, &pairs, |&(s, t)| (s, t, coset_decomposition_check(ball, s, t)))
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactnessReport {
    pub p: u64,
    pub radius: u32,
    pub r: String,
    pub level: u32,
    pub representation: Representation,
    pub dim_v: usize,
    /// Dimensions of the full complex in degrees 1, 0, −1.
    pub dims: [usize; 3],
    pub invariant_dims: [usize; 3],
    pub homology: [usize; 3],
    pub projector_idempotent: bool,
    pub projector_commutes: bool,
    pub coset_checks: bool,
    pub iwahori_checks: bool,
}

impl ExactnessReport {
    pub fn passed(&self) -> bool {
        self.homology == [0, 0, 0]
            && self.projector_idempotent
            && self.projector_commutes
            && self.coset_checks
            && self.iwahori_checks
    }
}

pub fn exactness_report(
    p: u64,
    radius: u32,
    r: Q,
    level: Option<u32>,
    rep: Representation,
    exec: Exec,
) -> Result<ExactnessReport> {
    let ball = build_tree_ball(p, radius, r, level)?;
    let v = coefficient_system(&ball, rep, exec)?;
    let cx = build_ss_complex(&ball, &v, &[]);
    let kx = &ball.cells[ball.centre()].group;
    let e = projector(&ball, &v, &cx, kx)?;
    let (projector_idempotent, projector_commutes) = projector_checks(&cx, &e);
    let inv = project_invariants(&ball, &v, &cx, kx)?;
    let m = &ball.modulus;
    Ok(ExactnessReport {
        p,
        radius,
        r: r.to_string(),
        level: m.n,
        representation: rep,
        dim_v: v.dim(),
        dims: cx.dims(),
        invariant_dims: inv.dims(),
        homology: inv.homology(),
        projector_idempotent,
        projector_commutes,
        coset_checks: all_coset_checks(&ball, exec).iter().all(|t| t.2),
        iwahori_checks: ball.cells.iter().all(|c| iwahori_decomposition_check(&c.group, &c.frame, m)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sl2::tree::TreeCellKind;

    fn setup(p: u64, radius: u32, r: Q, rep: Representation) -> (TreeBall, CoefficientSystem, SsComplex) {
        let ball = build_tree_ball(p, radius, r, None).unwrap();
        let v = coefficient_system(&ball, rep, Exec::Sequential).unwrap();
        let cx = build_ss_complex(&ball, &v, &[]);
        (ball, v, cx)
    }

    #[test]
    fn trivial_coefficients_give_augmented_tree_complex() {
        let (ball, _, cx) = setup(2, 2, Q::new(5, 2), Representation::Trivial);
        assert!(cx.is_complex());
        assert_eq!(cx.dims()[1] - cx.dims()[0], 1);
        assert_eq!(cx.dims()[1], ball.cells_of_dim(0).count());
        assert_eq!(cx.homology(), [0, 0, 0]);
    }

    #[test]
    fn fixed_dims_match_burnside() {
        // V^{K̄} has one basis vector per K̄-orbit on Γ/K̄_x; since K̄_x is normal,
        // k fixes a coset iff k ∈ K̄_x, so the count is |Ω|·|K̄ ∩ K̄_x| / |K̄|
        for (p, r) in [(2, Q::new(3, 2)), (3, Q::new(3, 2))] {
            let (ball, v, _) = setup(p, 1, r, Representation::PermutationFull);
            let kx = &ball.cells[0].group;
            for c in &ball.cells {
                let expected = v.dim() * c.group.intersect(kx).order() / c.group.order();
                assert_eq!(v.fixed_dim(c.index), expected, "{c}");
            }
            assert_eq!(v.fixed_dim(0), v.dim());
        }
    }

    #[test]
    fn projector_is_idempotent_and_commutes() {
        for rep in [Representation::Trivial, Representation::Permutation, Representation::PermutationFull] {
            let (ball, v, cx) = setup(2, 1, Q::new(3, 2), rep);
            let e = projector(&ball, &v, &cx, &ball.cells[0].group).unwrap();
            assert_eq!(projector_checks(&cx, &e), (true, true), "{rep}");
        }
    }

    #[test]
    fn trivial_group_projects_to_everything() {
        let (ball, v, cx) = setup(2, 1, Q::new(3, 2), Representation::Permutation);
        let k = Group::trivial();
        let e = projector(&ball, &v, &cx, &k).unwrap();
        for (deg, m) in e.iter().enumerate() {
            let n = cx.dims()[deg];
            let mut id = SparseMatrix::new(n, n);
            (0..n).for_each(|i| id.add(i, i, Q::ONE));
            assert_eq!(*m, id);
        }
        assert_eq!(project_invariants(&ball, &v, &cx, &k).unwrap(), cx);
    }

    #[test]
    fn transitive_group_merges_neighbours() {
        let (ball, v, cx) = setup(2, 1, Q::new(3, 2), Representation::Trivial);
        let m = ball.modulus;
        let gamma = Group::generated(&[Mat2::new(&m, 1, 1, 0, 1), Mat2::new(&m, 0, -1, 1, 0)], &m);
        let inv = project_invariants(&ball, &v, &cx, &gamma).unwrap();
        // centre, neighbours, midpoints; inner and outer half-edges
        assert_eq!(inv.dims(), [2, 3, 1]);
        assert!(inv.is_exact());
    }

    #[test]
    fn exactness_across_small_cases() {
        for (p, radius, r, rep) in [
            (2, 0, Q::new(1, 2), Representation::Trivial),
            (2, 1, Q::new(3, 2), Representation::Trivial),
            (2, 1, Q::new(3, 2), Representation::Permutation),
            (2, 1, Q::new(3, 2), Representation::PermutationFull),
            (2, 1, Q::int(2), Representation::Permutation),
            (3, 1, Q::new(3, 2), Representation::Permutation),
            (3, 1, Q::int(2), Representation::Permutation),
        ] {
            let rep_ = exactness_report(p, radius, r, None, rep, Exec::Sequential).unwrap();
            assert!(rep_.passed(), "{rep_:?}");
        }
    }

    #[test]
    fn reduced_and_full_agree() {
        let a = exactness_report(2, 1, Q::new(3, 2), None, Representation::Permutation, Exec::Sequential).unwrap();
        let b = exactness_report(2, 1, Q::new(3, 2), None, Representation::PermutationFull, Exec::Sequential).unwrap();
        assert_eq!(a.homology, b.homology);
        assert_eq!(b.dim_v, 48);
        assert_eq!(b.dim_v % a.dim_v, 0);
    }

    #[test]
    fn radius_zero_is_the_identity_map() {
        let (ball, v, cx) = setup(3, 0, Q::new(1, 2), Representation::Permutation);
        assert_eq!(ball.len(), 1);
        assert_eq!(cx.dims(), [0, v.dim(), v.dim()]);
        assert!(cx.is_exact());
    }

    #[test]
    fn dropping_an_edge_breaks_exactness() {
        let (ball, v, _) = setup(2, 1, Q::new(3, 2), Representation::Permutation);
        let edge = ball.cells.iter().find(|c| c.kind == TreeCellKind::OuterHalf).unwrap().index;
        let cx = build_ss_complex(&ball, &v, &[edge]);
        let inv = project_invariants(&ball, &v, &cx, &ball.cells[0].group).unwrap();
        assert!(inv.is_complex());
        assert_ne!(inv.homology(), [0, 0, 0]);
    }

    #[test]
    fn coset_decomposition_holds_on_supports() {
        let ball = build_tree_ball(3, 1, Q::int(2), None).unwrap();
        let checks = all_coset_checks(&ball, Exec::Sequential);
        assert!(checks.len() > ball.len());
        assert!(checks.iter().all(|c| c.2));
    }
}
