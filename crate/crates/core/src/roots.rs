//! Finite root systems, affine roots of the refined system `Φ + (1/m)ℤ`,
//! imaginary roots, and affine isometries of the apartment.
//!
//! Roots are linear functionals given by rational coefficient vectors in the
//! apartment coordinates. Rank-2 types use these realizations:
//!
//! * `A2`, `G2`: the sum-zero plane of ℝ³ in coordinates `(x1, x2)`, with
//!   `x3 = -x1 - x2`; point pairing has Gram matrix `[[2, 1], [1, 2]]`.
//! * `A1xA1`, `B2`, `C2`: standard coordinates and pairing.
//!
//! With these choices every true affine root has an integer level.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::polytope::Polytope;
use crate::rational::{dot, Q, QVec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RootType {
    A1,
    A1xA1,
    A2,
    B2,
    C2,
    G2,
}

impl RootType {
    pub const ALL: [RootType; 6] =
        [RootType::A1, RootType::A1xA1, RootType::A2, RootType::B2, RootType::C2, RootType::G2];

    pub fn rank(self) -> usize {
        match self {
            RootType::A1 => 1,
            _ => 2,
        }
    }

    /// Number of roots in the classification.
    pub fn root_count(self) -> usize {
        match self {
            RootType::A1 => 2,
            RootType::A1xA1 => 4,
            RootType::A2 => 6,
            RootType::B2 | RootType::C2 => 8,
            RootType::G2 => 12,
        }
    }
}

impl fmt::Display for RootType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RootType::A1 => "A1",
            RootType::A1xA1 => "A1xA1",
            RootType::A2 => "A2",
            RootType::B2 => "B2",
            RootType::C2 => "C2",
            RootType::G2 => "G2",
        };
        f.write_str(s)
    }
}

impl FromStr for RootType {
    type Err = Error;
    fn from_str(s: &str) -> Result<RootType> {
        match s {
            "A1" => Ok(RootType::A1),
            "A1xA1" | "A1A1" => Ok(RootType::A1xA1),
            "A2" => Ok(RootType::A2),
            "B2" => Ok(RootType::B2),
            "C2" => Ok(RootType::C2),
            "G2" => Ok(RootType::G2),
            other => Err(Error::UnsupportedType(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiniteRootSystem {
    pub type_label: RootType,
    pub rank: usize,
    pub roots: Vec<QVec>,
    /// Indices into `roots`.
    pub simple_roots: Vec<usize>,
    /// Gram matrix of the point pairing on the apartment.
    pub gram: Vec<QVec>,
    /// Inverse Gram matrix: the pairing on functionals.
    pub dual_gram: Vec<QVec>,
    positive: Vec<bool>,
}

fn q2(a: i64, b: i64) -> QVec {
    vec![Q::from(a), Q::from(b)]
}

pub fn build_root_system(type_label: RootType) -> FiniteRootSystem {
    use RootType::*;
    let (simple, gram): (Vec<QVec>, Vec<QVec>) = match type_label {
        A1 => (vec![vec![Q::ONE]], vec![vec![Q::ONE]]),
        A1xA1 => (vec![q2(1, 0), q2(0, 1)], vec![q2(1, 0), q2(0, 1)]),
        A2 => (vec![q2(1, -1), q2(1, 2)], vec![q2(2, 1), q2(1, 2)]),
        B2 => (vec![q2(1, -1), q2(0, 1)], vec![q2(1, 0), q2(0, 1)]),
        C2 => (vec![q2(1, -1), q2(0, 2)], vec![q2(1, 0), q2(0, 1)]),
        G2 => (vec![q2(1, -1), q2(-3, 0)], vec![q2(2, 1), q2(1, 2)]),
    };
    let dual_gram = linalg::inverse(&gram).expect("Gram matrix is nonsingular");
    let pair = |a: &[Q], b: &[Q]| dot(a, &linalg::mat_vec(&dual_gram, b));

    // close the simple roots under their reflections
    let mut roots: Vec<QVec> = simple.clone();
    let mut i = 0;
    while i < roots.len() {
        for s in &simple {
            let beta = roots[i].clone();
            let k = Q::int(2) * pair(&beta, s) / pair(s, s);
            let image: QVec = beta.iter().zip(s).map(|(&b, &a)| b - k * a).collect();
            if !roots.contains(&image) {
                roots.push(image);
            }
        }
        let neg: QVec = roots[i].iter().map(|&x| -x).collect();
        if !roots.contains(&neg) {
            roots.push(neg);
        }
        i += 1;
    }
    roots.sort();

    // positive = nonnegative coordinates in the simple-root basis
    let basis_cols: Vec<QVec> = (0..simple[0].len())
        .map(|r| simple.iter().map(|s| s[r]).collect())
        .collect();
    let positive = roots
        .iter()
        .map(|r| {
            let c = linalg::solve(&basis_cols, r).expect("roots lie in the root lattice span");
            c.iter().all(|x| x.signum() >= 0)
        })
        .collect();
    let simple_roots = simple
        .iter()
        .map(|s| roots.iter().position(|r| r == s).unwrap())
        .collect();
    FiniteRootSystem {
        type_label,
        rank: type_label.rank(),
        roots,
        simple_roots,
        gram,
        dual_gram,
        positive,
    }
}

impl FiniteRootSystem {
    pub fn from_label(label: &str) -> Result<FiniteRootSystem> {
        Ok(build_root_system(label.parse()?))
    }

    /// Pairing of two functionals.
    pub fn pairing(&self, a: &[Q], b: &[Q]) -> Q {
        dot(a, &linalg::mat_vec(&self.dual_gram, b))
    }

    pub fn is_positive(&self, root: usize) -> bool {
        self.positive[root]
    }

    pub fn positive_roots(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.roots.len()).filter(|&i| self.positive[i])
    }

    pub fn negation(&self, root: usize) -> usize {
        let neg: QVec = self.roots[root].iter().map(|&x| -x).collect();
        self.roots.iter().position(|r| *r == neg).expect("closed under negation")
    }

    /// Vector dual to a functional under the point pairing.
    pub fn coroot_direction(&self, a: &[Q]) -> QVec {
        linalg::mat_vec(&self.dual_gram, a)
    }

    /// Image of root `beta` under the reflection in `alpha = 0`.
    pub fn reflect_root(&self, alpha: usize, beta: usize) -> QVec {
        let a = &self.roots[alpha];
        let b = &self.roots[beta];
        let k = Q::int(2) * self.pairing(b, a) / self.pairing(a, a);
        b.iter().zip(a).map(|(&x, &y)| x - k * y).collect()
    }

    pub fn index_of(&self, functional: &[Q]) -> Option<usize> {
        self.roots.iter().position(|r| r.as_slice() == functional)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gradient {
    Real(usize),
    Imaginary,
}

/// `a(x) = ⟨gradient, x⟩ + level`, or the constant `level` for imaginary roots.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AffineRoot {
    pub gradient: Gradient,
    pub level: Q,
}

impl AffineRoot {
    pub fn real(root: usize, level: Q) -> Self {
        AffineRoot { gradient: Gradient::Real(root), level }
    }

    pub fn imaginary(level: i64) -> Self {
        AffineRoot { gradient: Gradient::Imaginary, level: Q::from(level) }
    }

    /// Group-generating roots have integer levels (the true affine root lattice).
    pub fn is_group_generating(&self) -> bool {
        self.level.is_integer()
    }

    pub fn evaluate(&self, sys: &FiniteRootSystem, x: &[Q]) -> Result<Q> {
        if x.len() != sys.rank {
            return Err(Error::DimensionMismatch { expected: sys.rank, got: x.len() });
        }
        Ok(match self.gradient {
            Gradient::Real(i) => dot(&sys.roots[i], x) + self.level,
            Gradient::Imaginary => self.level,
        })
    }

    /// The orthogonal reflection fixing `{a = 0}`.
    pub fn reflection(&self, sys: &FiniteRootSystem) -> Result<AffineIsometry> {
        let Gradient::Real(i) = self.gradient else {
            return Err(Error::ImaginaryReflection);
        };
        Ok(AffineIsometry::reflection(sys, &sys.roots[i], self.level))
    }
}

/// All `a = α + n/m` (α ∈ Φ, n ∈ ℤ) whose zero set meets the window.
pub fn affine_roots_in_window(
    sys: &FiniteRootSystem,
    m: u32,
    window: &Polytope,
) -> Result<Vec<AffineRoot>> {
    if window.dim != sys.rank {
        return Err(Error::DimensionMismatch { expected: sys.rank, got: window.dim });
    }
    if window.affine_dim() < sys.rank {
        return Err(Error::EmptyWindow);
    }
    let mq = Q::int(m as i128);
    let mut out = Vec::new();
    for (i, alpha) in sys.roots.iter().enumerate() {
        let (lo, hi) = window.range(alpha);
        // zero set α(x) = -n/m meets the window iff -max ≤ n/m ≤ -min
        let n_lo = (-hi * mq).ceil();
        let n_hi = (-lo * mq).floor();
        for n in n_lo..=n_hi {
            out.push(AffineRoot::real(i, Q::new(n, m as i128)));
        }
    }
    Ok(out)
}

/// `x ↦ linear · x + translation`
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct AffineIsometry {
    pub linear: Vec<QVec>,
    pub translation: QVec,
}

impl AffineIsometry {
    pub fn identity(rank: usize) -> Self {
        AffineIsometry { linear: linalg::identity(rank), translation: vec![Q::ZERO; rank] }
    }

    pub fn translation(t: QVec) -> Self {
        AffineIsometry { linear: linalg::identity(t.len()), translation: t }
    }

    /// Reflection in `{⟨a, x⟩ + level = 0}`.
    pub fn reflection(sys: &FiniteRootSystem, a: &[Q], level: Q) -> Self {
        let n = sys.coroot_direction(a);
        let an = dot(a, &n);
        let two = Q::int(2);
        let rank = a.len();
        let linear = (0..rank)
            .map(|i| {
                (0..rank)
                    .map(|j| {
                        let id = if i == j { Q::ONE } else { Q::ZERO };
                        id - two * n[i] * a[j] / an
                    })
                    .collect()
            })
            .collect();
        let translation = n.iter().map(|&ni| -two * level * ni / an).collect();
        AffineIsometry { linear, translation }
    }

    pub fn apply(&self, x: &[Q]) -> QVec {
        linalg::mat_vec(&self.linear, x)
            .into_iter()
            .zip(&self.translation)
            .map(|(a, &b)| a + b)
            .collect()
    }

    pub fn apply_linear(&self, v: &[Q]) -> QVec {
        linalg::mat_vec(&self.linear, v)
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &AffineIsometry) -> AffineIsometry {
        AffineIsometry {
            linear: linalg::mat_mul(&self.linear, &other.linear),
            translation: self.apply(&other.translation),
        }
    }

    pub fn inverse(&self) -> AffineIsometry {
        let inv = linalg::inverse(&self.linear).expect("isometries are invertible");
        let t = linalg::mat_vec(&inv, &self.translation);
        AffineIsometry { linear: inv, translation: t.into_iter().map(|x| -x).collect() }
    }

    pub fn is_identity(&self) -> bool {
        *self == AffineIsometry::identity(self.translation.len())
    }

    pub fn is_translation(&self) -> bool {
        self.linear == linalg::identity(self.translation.len())
    }

    /// `Lᵀ G L = G` for the point pairing `G`.
    pub fn preserves_pairing(&self, sys: &FiniteRootSystem) -> bool {
        let lt = linalg::transpose(&self.linear);
        linalg::mat_mul(&linalg::mat_mul(&lt, &sys.gram), &self.linear) == sys.gram
    }

    /// Pull a hyperplane `{⟨a, x⟩ + level = 0}` forward: returns `(a', level')`
    /// with `g({a = 0}) = {a' = 0}`.
    pub fn map_hyperplane(&self, a: &[Q], level: Q) -> (QVec, Q) {
        let inv = self.inverse();
        // a(g⁻¹ y) = a·L⁻¹ y + a·t⁻¹
        let a_new: QVec = (0..a.len())
            .map(|j| (0..a.len()).map(|i| a[i] * inv.linear[i][j]).sum())
            .collect();
        let level_new = dot(a, &inv.translation) + level;
        (a_new, level_new)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qvec;

    /// Independent oracle: count roots by closing the simple roots under simple
    /// reflections in simple-root coordinates, driven only by the Cartan matrix.
    fn cartan_closure_count(cartan: &[[i64; 2]; 2]) -> usize {
        let mut roots: Vec<[i64; 2]> = vec![[1, 0], [0, 1]];
        let mut i = 0;
        while i < roots.len() {
            let beta = roots[i];
            for s in 0..2 {
                // ⟨β, α_s^∨⟩ = Σ_j β_j A[s][j]
                let k = beta[0] * cartan[s][0] + beta[1] * cartan[s][1];
                let mut img = beta;
                img[s] -= k;
                if !roots.contains(&img) {
                    roots.push(img);
                }
            }
            i += 1;
        }
        roots.len()
    }

    #[test]
    fn counts_match_cartan_oracle() {
        assert_eq!(cartan_closure_count(&[[2, -1], [-1, 2]]), 6);
        assert_eq!(cartan_closure_count(&[[2, -2], [-1, 2]]), 8);
        assert_eq!(cartan_closure_count(&[[2, -3], [-1, 2]]), 12);
        assert_eq!(cartan_closure_count(&[[2, 0], [0, 2]]), 4);
        assert_eq!(build_root_system(RootType::A2).roots.len(), 6);
        assert_eq!(build_root_system(RootType::G2).roots.len(), 12);
        assert_eq!(build_root_system(RootType::B2).roots.len(), 8);
        assert_eq!(build_root_system(RootType::C2).roots.len(), 8);
    }

    #[test]
    fn a1_is_plus_minus_alpha() {
        let s = build_root_system(RootType::A1);
        assert_eq!(s.rank, 1);
        assert_eq!(s.roots, vec![vec![-Q::ONE], vec![Q::ONE]]);
        assert!(s.is_positive(1) && !s.is_positive(0));
    }

    #[test]
    fn invariants_hold_for_all_types() {
        for t in RootType::ALL {
            let s = build_root_system(t);
            assert_eq!(s.roots.len(), t.root_count(), "{t}");
            for a in 0..s.roots.len() {
                let _ = s.negation(a);
                for b in 0..s.roots.len() {
                    let img = s.reflect_root(a, b);
                    assert!(s.index_of(&img).is_some(), "{t}: closure fails");
                }
            }
            assert_eq!(s.positive_roots().count() * 2, s.roots.len());
        }
    }

    #[test]
    fn g2_has_two_root_lengths() {
        let s = build_root_system(RootType::G2);
        let mut lengths: Vec<Q> = s.roots.iter().map(|r| s.pairing(r, r)).collect();
        lengths.sort();
        lengths.dedup();
        assert_eq!(lengths.len(), 2);
        assert_eq!(lengths[1] / lengths[0], Q::int(3));
    }

    #[test]
    fn window_roots_a1() {
        let s = build_root_system(RootType::A1);
        let w = Polytope::cube(&qvec(&[-2]), &qvec(&[2])).unwrap();
        let roots = affine_roots_in_window(&s, 1, &w).unwrap();
        let mut zeros: Vec<Q> = roots
            .iter()
            .filter(|a| a.gradient == Gradient::Real(1))
            .map(|a| -a.level)
            .collect();
        zeros.sort();
        assert_eq!(zeros, qvec(&[-2, -1, 0, 1, 2]));

        let w = Polytope::cube(&qvec(&[0]), &qvec(&[1])).unwrap();
        let roots = affine_roots_in_window(&s, 2, &w).unwrap();
        let mut zeros: Vec<Q> = roots
            .iter()
            .filter(|a| a.gradient == Gradient::Real(1))
            .map(|a| -a.level)
            .collect();
        zeros.sort();
        assert_eq!(zeros, vec![Q::ZERO, Q::new(1, 2), Q::ONE]);
    }

    #[test]
    fn tiny_window_inside_chamber_meets_nothing() {
        let s = build_root_system(RootType::A2);
        let w = Polytope::cube(&[Q::new(1, 10), Q::new(1, 5)], &[Q::new(1, 9), Q::new(21, 100)]).unwrap();
        assert!(affine_roots_in_window(&s, 3, &w).unwrap().is_empty());
    }

    #[test]
    fn evaluate_examples() {
        let s = build_root_system(RootType::A1);
        let a = AffineRoot::real(1, Q::ZERO);
        assert_eq!(a.evaluate(&s, &[Q::ZERO]).unwrap(), Q::ZERO);
        let a = AffineRoot::real(1, Q::ONE);
        assert_eq!(a.evaluate(&s, &[Q::new(1, 2)]).unwrap(), Q::new(3, 2));
        let im = AffineRoot::imaginary(2);
        assert_eq!(im.evaluate(&s, &[Q::new(7, 3)]).unwrap(), Q::int(2));
        assert!(matches!(
            a.evaluate(&s, &qvec(&[1, 2])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn reflection_examples() {
        let s = build_root_system(RootType::A1);
        let r0 = AffineRoot::real(1, Q::ZERO).reflection(&s).unwrap();
        assert_eq!(r0.apply(&qvec(&[3])), qvec(&[-3]));
        let r1 = AffineRoot::real(1, Q::ONE).reflection(&s).unwrap();
        assert_eq!(r1.apply(&qvec(&[5])), qvec(&[-7]));
        assert_eq!(r1.apply(&qvec(&[-1])), qvec(&[-1]));
        assert!(r1.compose(&r1).is_identity());
        let t = r1.compose(&r0);
        assert!(t.is_translation());
        assert_eq!(t.translation, qvec(&[-2]));
        assert!(matches!(
            AffineRoot::imaginary(1).reflection(&s),
            Err(Error::ImaginaryReflection)
        ));
    }

    #[test]
    fn reflections_are_isometric_involutions() {
        for t in RootType::ALL {
            let s = build_root_system(t);
            for i in 0..s.roots.len() {
                let g = AffineRoot::real(i, Q::new(2, 3)).reflection(&s).unwrap();
                assert!(g.preserves_pairing(&s));
                assert!(g.compose(&g).is_identity());
                // permutes the Ψ_3 hyperplanes: every root hyperplane maps to one
                for (j, a) in s.roots.iter().enumerate() {
                    let (a2, l2) = g.map_hyperplane(a, Q::new(1, 3));
                    let k = s.index_of(&a2).unwrap_or_else(|| panic!("{t}: root {j} not mapped to root"));
                    let _ = k;
                    assert!(l2.on_grid(3));
                }
            }
        }
    }
}
