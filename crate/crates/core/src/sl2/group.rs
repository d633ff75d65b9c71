//! `SL₂(ℤ/pᴺ)` and explicitly enumerated subgroups.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::Serialize;

/// The ring ℤ/pᴺ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Modulus {
    pub p: u64,
    pub n: u32,
    pub q: u64,
}

impl Modulus {
    pub fn new(p: u64, n: u32) -> Modulus {
        Modulus { p, n, q: p.pow(n) }
    }

    pub fn reduce(&self, x: i128) -> u64 {
        x.rem_euclid(self.q as i128) as u64
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.q as u128) as u64
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.q
    }

    pub fn neg(&self, a: u64) -> u64 {
        (self.q - a) % self.q
    }

    /// p-adic valuation, capped at N (so that v(0) = N).
    pub fn valuation(&self, x: u64) -> u32 {
        let mut x = x % self.q;
        if x == 0 {
            return self.n;
        }
        let mut v = 0;
        while x.is_multiple_of(self.p) {
            x /= self.p;
            v += 1;
        }
        v
    }

    pub fn is_unit(&self, x: u64) -> bool {
        !x.is_multiple_of(self.p)
    }

    pub fn inv(&self, x: u64) -> Option<u64> {
        // extended Euclid over i128
        let (mut a, mut b) = (x as i128 % self.q as i128, self.q as i128);
        let (mut s0, mut s1) = (1i128, 0i128);
        while b != 0 {
            let t = a / b;
            (a, b) = (b, a - t * b);
            (s0, s1) = (s1, s0 - t * s1);
        }
        (a == 1).then(|| self.reduce(s0))
    }

    /// `pᵏ mod q`; zero once k ≥ N.
    pub fn pow_p(&self, k: u32) -> u64 {
        if k >= self.n {
            0
        } else {
            self.p.pow(k)
        }
    }
}

/// `[[a, b], [c, d]]` with entries in ℤ/pᴺ.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Mat2 {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

impl Mat2 {
    pub const ID: Mat2 = Mat2 { a: 1, b: 0, c: 0, d: 1 };

    pub fn new(m: &Modulus, a: i128, b: i128, c: i128, d: i128) -> Mat2 {
        Mat2 { a: m.reduce(a), b: m.reduce(b), c: m.reduce(c), d: m.reduce(d) }
    }

    pub fn mul(&self, o: &Mat2, m: &Modulus) -> Mat2 {
        Mat2 {
            a: m.add(m.mul(self.a, o.a), m.mul(self.b, o.c)),
            b: m.add(m.mul(self.a, o.b), m.mul(self.b, o.d)),
            c: m.add(m.mul(self.c, o.a), m.mul(self.d, o.c)),
            d: m.add(m.mul(self.c, o.b), m.mul(self.d, o.d)),
        }
    }

    /// Inverse of a determinant-one matrix.
    pub fn inv(&self, m: &Modulus) -> Mat2 {
        Mat2 { a: self.d, b: m.neg(self.b), c: m.neg(self.c), d: self.a }
    }

    pub fn det(&self, m: &Modulus) -> u64 {
        m.add(m.mul(self.a, self.d), m.neg(m.mul(self.b, self.c)))
    }

    pub fn conj(&self, g: &Mat2, m: &Modulus) -> Mat2 {
        g.mul(self, m).mul(&g.inv(m), m)
    }

    /// Reduction to a smaller modulus pᵏ, k ≤ N.
    pub fn reduce(&self, to: &Modulus) -> Mat2 {
        Mat2 { a: self.a % to.q, b: self.b % to.q, c: self.c % to.q, d: self.d % to.q }
    }

    pub fn apply(&self, v: (u64, u64), m: &Modulus) -> (u64, u64) {
        (m.add(m.mul(self.a, v.0), m.mul(self.b, v.1)), m.add(m.mul(self.c, v.0), m.mul(self.d, v.1)))
    }
}

/// `|SL₂(ℤ/pᴺ)| = p^{3N−2}(p² − 1)`.
pub fn sl2_order(p: u64, n: u32) -> u64 {
    p.pow(3 * n - 2) * (p * p - 1)
}

/// An explicitly enumerated finite group of matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Group {
    /// Sorted.
    pub elements: Vec<Mat2>,
    members: HashSet<Mat2>,
}

impl Group {
    pub fn from_elements(mut elements: Vec<Mat2>) -> Group {
        elements.sort_unstable();
        elements.dedup();
        let members = elements.iter().copied().collect();
        Group { elements, members }
    }

    pub fn trivial() -> Group {
        Group::from_elements(vec![Mat2::ID])
    }

    /// Closure of the generators under multiplication.
    pub fn generated(gens: &[Mat2], m: &Modulus) -> Group {
        let mut seen: HashSet<Mat2> = HashSet::from([Mat2::ID]);
        let mut queue = VecDeque::from([Mat2::ID]);
        while let Some(g) = queue.pop_front() {
            for s in gens {
                let h = g.mul(s, m);
                if seen.insert(h) {
                    queue.push_back(h);
                }
            }
        }
        Group::from_elements(seen.into_iter().collect())
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, g: &Mat2) -> bool {
        self.members.contains(g)
    }

    pub fn is_subgroup_of(&self, other: &Group) -> bool {
        self.elements.iter().all(|g| other.contains(g))
    }

    pub fn is_closed(&self, m: &Modulus) -> bool {
        self.contains(&Mat2::ID)
            && self.elements.iter().all(|g| self.contains(&g.inv(m)))
            && self.elements.iter().all(|g| self.elements.iter().all(|h| self.contains(&g.mul(h, m))))
    }

    pub fn intersect(&self, other: &Group) -> Group {
        Group::from_elements(self.elements.iter().copied().filter(|g| other.contains(g)).collect())
    }

    pub fn conjugate(&self, g: &Mat2, m: &Modulus) -> Group {
        Group::from_elements(self.elements.iter().map(|k| k.conj(g, m)).collect())
    }

    pub fn reduce(&self, to: &Modulus) -> Group {
        Group::from_elements(self.elements.iter().map(|k| k.reduce(to)).collect())
    }

    /// The set `{ab : a ∈ A, b ∈ B}`.
    pub fn product_set(a: &[Mat2], b: &[Mat2], m: &Modulus) -> HashSet<Mat2> {
        a.iter().flat_map(|x| b.iter().map(move |y| x.mul(y, m))).collect()
    }
}

/// All of `SL₂(ℤ/pᴺ)`, by solving `ad − bc = 1` entrywise.
pub fn enumerate_sl2(m: &Modulus) -> Vec<Mat2> {
    let mut out = Vec::with_capacity(sl2_order(m.p, m.n) as usize);
    for a in 0..m.q {
        for b in 0..m.q {
            for c in 0..m.q {
                let rhs = m.add(1, m.mul(b, c));
                if let Some(ai) = m.inv(a) {
                    out.push(Mat2 { a, b, c, d: m.mul(rhs, ai) });
                } else {
                    // a not a unit: then b, c are units and d is free subject to ad = 1 + bc
                    for d in 0..m.q {
                        if m.mul(a, d) == rhs {
                            out.push(Mat2 { a, b, c, d });
                        }
                    }
                }
            }
        }
    }
    out
}

/// `{g : v(b) ≥ t_up, v(c) ≥ t_low, a ≡ d ≡ 1 mod p^{t_diag}}` inside `SL₂(ℤ/pᴺ)`.
/// Thresholds must be nonnegative.
pub fn congruence_subgroup(m: &Modulus, t_up: u32, t_low: u32, t_diag: u32) -> Group {
    if t_diag == 0 {
        // a may be a non-unit; no shortcut through d = (1 + bc)/a
        let ok = |g: &Mat2| m.valuation(g.b) >= t_up.min(m.n) && m.valuation(g.c) >= t_low.min(m.n);
        return Group::from_elements(enumerate_sl2(m).into_iter().filter(ok).collect());
    }
    let step = |t: u32| if t >= m.n { m.q } else { m.p.pow(t) };
    let (sb, sc) = (step(t_up), step(t_low));
    let sa = step(t_diag);
    let mut out = Vec::new();
    let mut b = 0;
    while b < m.q {
        let mut c = 0;
        while c < m.q {
            let mut a = 1 % m.q;
            loop {
                if let Some(ai) = m.inv(a) {
                    let d = m.mul(m.add(1, m.mul(b, c)), ai);
                    if m.valuation(m.add(d, m.neg(1))) >= t_diag.min(m.n) {
                        out.push(Mat2 { a, b, c, d });
                    }
                }
                a = (a + sa) % m.q;
                if a == 1 % m.q {
                    break;
                }
            }
            c += sc;
        }
        b += sb;
    }
    Group::from_elements(out)
}

/// Generators of the same group read from threshold data: upper and lower
/// root subgroups at their threshold levels and a torus element.
pub fn threshold_generators(m: &Modulus, t_up: u32, t_low: u32, t_diag: u32) -> Vec<Mat2> {
    let u = m.pow_p(t_diag);
    let mut gens = vec![
        Mat2 { a: 1 % m.q, b: m.pow_p(t_up), c: 0, d: 1 % m.q },
        Mat2 { a: 1 % m.q, b: 0, c: m.pow_p(t_low), d: 1 % m.q },
    ];
    let a = m.add(1, u);
    if let Some(ai) = m.inv(a) {
        gens.push(Mat2 { a, b: 0, c: 0, d: ai });
    }
    gens
}

/// Does `(K∩Ū)(K∩T)(K∩U) = K` hold, with Ū, T, U the lower unipotent, diagonal
/// and upper unipotent subgroups conjugated by `frame`?
pub fn iwahori_decomposition_check(k: &Group, frame: &Mat2, m: &Modulus) -> bool {
    let local: Vec<Mat2> = k.elements.iter().map(|g| g.conj(&frame.inv(m), m)).collect();
    let one = 1 % m.q;
    let lower: Vec<Mat2> = local.iter().copied().filter(|g| g.a == one && g.d == one && g.b == 0).collect();
    let torus: Vec<Mat2> = local.iter().copied().filter(|g| g.b == 0 && g.c == 0).collect();
    let upper: Vec<Mat2> = local.iter().copied().filter(|g| g.a == one && g.d == one && g.c == 0).collect();
    let lt: Vec<Mat2> = Group::product_set(&lower, &torus, m).into_iter().collect();
    let all = Group::product_set(&lt, &upper, m);
    all.len() == local.len() && local.iter().all(|g| all.contains(g))
}
