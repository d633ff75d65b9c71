//! The cell complex cut out of a window by the hyperplanes of `Ψ_m`, with
//! oriented cells and the augmented cellular chain complex.
//!
//! Cells are identified by their sign vector with respect to the window's
//! hyperplanes (one of `-`, `0`, `+` per hyperplane). Construction handles
//! rank 1 and rank 2 apartments.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::polytope::{HalfSpace, Polytope};
use crate::rational::{centroid, dot, fmt_qvec, sub, Q, QVec};
use crate::roots::{AffineIsometry, AffineRoot, FiniteRootSystem, Gradient, RootType};

pub type SignVector = Vec<i8>;

pub fn sign_string(signs: &[i8]) -> String {
    signs
        .iter()
        .map(|&s| match s {
            -1 => '-',
            0 => '0',
            _ => '+',
        })
        .collect()
}

pub fn parse_sign_string(s: &str) -> Option<SignVector> {
    s.chars()
        .map(|c| match c {
            '-' => Some(-1),
            '0' => Some(0),
            '+' => Some(1),
            _ => None,
        })
        .collect()
}

/// Zero set of `⟨coef, x⟩ + level`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Hyperplane {
    pub root: AffineRoot,
    pub coef: QVec,
    pub level: Q,
}

impl Hyperplane {
    pub fn value(&self, x: &[Q]) -> Q {
        dot(&self.coef, x) + self.level
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Cell {
    pub index: usize,
    pub signs: SignVector,
    pub dim: usize,
    /// Lexicographically sorted.
    pub vertices: Vec<QVec>,
    pub barycenter: QVec,
    /// Edge vectors from the lex-least vertex, spanning the affine hull.
    pub frame: Vec<QVec>,
    /// Codimension-one faces with incidence signs ε(σ, τ).
    pub facets: Vec<(usize, i8)>,
    pub cofaces: Vec<usize>,
    /// Independent hyperplanes cutting out the affine hull.
    pub hull_planes: Vec<usize>,
    /// Hyperplanes supporting a facet (nonzero on the cell).
    pub facet_planes: Vec<usize>,
}

impl Cell {
    pub fn id(&self) -> String {
        sign_string(&self.signs)
    }
}

/// Finite sparse chain. Degree −1 chains carry only `augmentation`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Chain {
    pub degree: i32,
    pub terms: BTreeMap<usize, i64>,
    pub augmentation: i64,
}

impl Chain {
    pub fn zero(degree: i32) -> Chain {
        Chain { degree, terms: BTreeMap::new(), augmentation: 0 }
    }

    pub fn scalar(n: i64) -> Chain {
        Chain { degree: -1, terms: BTreeMap::new(), augmentation: n }
    }

    pub fn cell(degree: i32, idx: usize) -> Chain {
        let mut c = Chain::zero(degree);
        c.terms.insert(idx, 1);
        c
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.augmentation == 0
    }

    pub fn add_term(&mut self, idx: usize, coeff: i64) {
        if coeff == 0 {
            return;
        }
        let e = self.terms.entry(idx).or_insert(0);
        *e += coeff;
        if *e == 0 {
            self.terms.remove(&idx);
        }
    }

    /// `self += k · other`
    pub fn add_scaled(&mut self, k: i64, other: &Chain) {
        debug_assert_eq!(self.degree, other.degree);
        for (&i, &c) in &other.terms {
            self.add_term(i, k * c);
        }
        self.augmentation += k * other.augmentation;
    }

    pub fn max_abs(&self) -> i64 {
        self.terms.values().map(|c| c.abs()).max().unwrap_or(0).max(self.augmentation.abs())
    }
}

/// A precomputed permutation of cells with orientation signs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellAction {
    pub image: Vec<usize>,
    pub sign: Vec<i8>,
}

impl CellAction {
    pub fn apply(&self, ch: &Chain) -> Chain {
        let mut out = Chain::zero(ch.degree);
        out.augmentation = ch.augmentation;
        for (&i, &c) in &ch.terms {
            out.add_term(self.image[i], c * self.sign[i] as i64);
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct CellComplex {
    pub system: FiniteRootSystem,
    pub m: u32,
    pub window: Polytope,
    pub hyperplanes: Vec<Hyperplane>,
    pub cells: Vec<Cell>,
    pub by_dim: Vec<Vec<usize>>,
    lookup: HashMap<SignVector, usize>,
}

/// `{x : |α(x − center)| ≤ radius for all roots α}`; chamber-aligned when the
/// center is on the `1/m` grid for every root and the radius is on that grid.
pub fn ball_window(sys: &FiniteRootSystem, center: &[Q], radius: Q) -> Result<Polytope> {
    if center.len() != sys.rank {
        return Err(Error::DimensionMismatch { expected: sys.rank, got: center.len() });
    }
    let hs = sys
        .roots
        .iter()
        .map(|a| HalfSpace::new(a.clone(), radius + dot(a, center)))
        .collect();
    Polytope::from_halfspaces(sys.rank, hs)
}

fn normalized(coef: &[Q], level: Q) -> (QVec, Q) {
    // scale so the first nonzero coefficient is 1
    let lead = *coef.iter().find(|c| !c.is_zero()).expect("nonzero functional");
    (coef.iter().map(|&c| c / lead).collect(), level / lead)
}

pub fn build_complex(
    sys: &FiniteRootSystem,
    m: u32,
    roots: &[AffineRoot],
    window: Polytope,
) -> Result<CellComplex> {
    let rank = sys.rank;
    if window.dim != rank {
        return Err(Error::DimensionMismatch { expected: rank, got: window.dim });
    }
    if rank > 2 {
        return Err(Error::Degenerate(format!("rank {rank} apartments are not supported")));
    }
    // one hyperplane per zero set: keep positive gradients, dedupe
    let mut seen = BTreeSet::new();
    let mut hyperplanes = Vec::new();
    let mut sorted_roots: Vec<&AffineRoot> = roots.iter().collect();
    sorted_roots.sort();
    for a in sorted_roots {
        let Gradient::Real(i) = a.gradient else {
            return Err(Error::Degenerate("imaginary roots have no hyperplane".into()));
        };
        let (coef, level) = if sys.is_positive(i) {
            (sys.roots[i].clone(), a.level)
        } else {
            let j = sys.negation(i);
            (sys.roots[j].clone(), -a.level)
        };
        let gi = sys.index_of(&coef).unwrap();
        let (range_lo, range_hi) = window.range(&coef);
        if -level < range_lo || -level > range_hi {
            continue;
        }
        if seen.insert(normalized(&coef, level)) {
            hyperplanes.push(Hyperplane { root: AffineRoot::real(gi, level), coef, level });
        }
    }
    if hyperplanes.is_empty() {
        return Err(Error::Degenerate("no hyperplane meets the window".into()));
    }
    // chamber alignment: every window facet lies on an arrangement hyperplane
    for h in &window.halfspaces {
        // redundant constraints do not bound the window
        let tight = window.vertices.iter().filter(|v| h.slack(v).is_zero()).count();
        if tight < rank {
            continue;
        }
        let key = normalized(&h.normal, -h.bound);
        if !seen.contains(&key) {
            return Err(Error::WindowNotAligned(format!(
                "boundary {}·x = {} is not a hyperplane of the refined arrangement",
                fmt_qvec(&h.normal),
                h.bound
            )));
        }
    }

    let signs_at = |x: &[Q]| -> SignVector { hyperplanes.iter().map(|h| h.value(x).signum()).collect() };

    // vertices
    let mut vertex_points: BTreeSet<QVec> = BTreeSet::new();
    if rank == 1 {
        for h in &hyperplanes {
            vertex_points.insert(vec![-h.level / h.coef[0]]);
        }
    } else {
        for i in 0..hyperplanes.len() {
            for j in i + 1..hyperplanes.len() {
                let (a, b) = (&hyperplanes[i], &hyperplanes[j]);
                let rows = vec![a.coef.clone(), b.coef.clone()];
                if linalg::det(&rows).is_zero() {
                    continue;
                }
                let x = linalg::solve(&rows, &[-a.level, -b.level]).unwrap();
                if window.contains(&x) {
                    vertex_points.insert(x);
                }
            }
        }
    }

    struct Proto {
        signs: SignVector,
        vertices: Vec<QVec>,
    }
    let vertices: Vec<Proto> = vertex_points
        .into_iter()
        .map(|p| Proto { signs: signs_at(&p), vertices: vec![p] })
        .collect();

    // edges: consecutive vertices along each hyperplane (rank 2) or along the line (rank 1)
    let mut edges: Vec<Proto> = Vec::new();
    if rank == 1 {
        for w in vertices.windows(2) {
            let mid = centroid(&[w[0].vertices[0].clone(), w[1].vertices[0].clone()]);
            edges.push(Proto {
                signs: signs_at(&mid),
                vertices: vec![w[0].vertices[0].clone(), w[1].vertices[0].clone()],
            });
        }
    } else {
        for (hi, h) in hyperplanes.iter().enumerate() {
            let dir = vec![-h.coef[1], h.coef[0]];
            let mut on: Vec<(Q, &QVec)> = vertices
                .iter()
                .filter(|v| v.signs[hi] == 0)
                .map(|v| (dot(&dir, &v.vertices[0]), &v.vertices[0]))
                .collect();
            on.sort();
            for w in on.windows(2) {
                let pair = vec![w[0].1.clone(), w[1].1.clone()];
                let mid = centroid(&pair);
                let mut vs = pair;
                vs.sort();
                edges.push(Proto { signs: signs_at(&mid), vertices: vs });
            }
        }
    }

    // chambers (rank 2): the two sides of every edge
    let mut chambers: Vec<Proto> = Vec::new();
    if rank == 2 {
        let mut sides: BTreeMap<SignVector, BTreeSet<QVec>> = BTreeMap::new();
        for e in &edges {
            let plane = e.signs.iter().position(|&s| s == 0).expect("edge lies on a hyperplane");
            for s in [-1i8, 1] {
                let mut key = e.signs.clone();
                key[plane] = s;
                sides.entry(key).or_default().extend(e.vertices.iter().cloned());
            }
        }
        for (key, vs) in sides {
            let vs: Vec<QVec> = vs.into_iter().collect();
            if vs.len() < 3 {
                continue;
            }
            if signs_at(&centroid(&vs)) == key {
                chambers.push(Proto { signs: key, vertices: vs });
            }
        }
    }

    let mut protos: Vec<(usize, Proto)> = Vec::new();
    protos.extend(vertices.into_iter().map(|p| (0, p)));
    protos.extend(edges.into_iter().map(|p| (1, p)));
    protos.extend(chambers.into_iter().map(|p| (2, p)));
    protos.sort_by(|a, b| (a.0, &a.1.signs).cmp(&(b.0, &b.1.signs)));

    let mut lookup = HashMap::new();
    let mut cells = Vec::with_capacity(protos.len());
    let mut by_dim = vec![Vec::new(); rank + 1];
    for (index, (dim, p)) in protos.into_iter().enumerate() {
        if lookup.insert(p.signs.clone(), index).is_some() {
            return Err(Error::Degenerate("duplicate sign vector".into()));
        }
        by_dim[dim].push(index);
        let barycenter = centroid(&p.vertices);
        let frame = orientation_frame(&p.vertices, dim);
        let zero: Vec<usize> = (0..p.signs.len()).filter(|&i| p.signs[i] == 0).collect();
        let mut hull_planes = Vec::new();
        let mut rows: Vec<QVec> = Vec::new();
        for &z in &zero {
            rows.push(hyperplanes[z].coef.clone());
            if linalg::rank(&rows) > hull_planes.len() {
                hull_planes.push(z);
            } else {
                rows.pop();
            }
            if hull_planes.len() == rank - dim {
                break;
            }
        }
        cells.push(Cell {
            index,
            signs: p.signs,
            dim,
            vertices: p.vertices,
            barycenter,
            frame,
            facets: Vec::new(),
            cofaces: Vec::new(),
            hull_planes,
            facet_planes: Vec::new(),
        });
    }

    let mut complex = CellComplex { system: sys.clone(), m, window, hyperplanes, cells, by_dim, lookup };
    complex.link_faces()?;
    Ok(complex)
}

fn orientation_frame(vertices: &[QVec], dim: usize) -> Vec<QVec> {
    let base = &vertices[0];
    let mut frame: Vec<QVec> = Vec::new();
    for v in &vertices[1..] {
        if frame.len() == dim {
            break;
        }
        frame.push(sub(v, base));
        if linalg::rank(&frame) < frame.len() {
            frame.pop();
        }
    }
    frame
}

impl CellComplex {
    fn link_faces(&mut self) -> Result<()> {
        let vertex_of: HashMap<QVec, usize> = self.by_dim[0]
            .iter()
            .map(|&i| (self.cells[i].vertices[0].clone(), i))
            .collect();
        // faces of edges: endpoints; faces of chambers: edges whose endpoints are chamber vertices on a common hyperplane
        let mut facets: Vec<Vec<usize>> = vec![Vec::new(); self.cells.len()];
        if let Some(edges) = self.by_dim.get(1) {
            for &e in edges {
                for v in &self.cells[e].vertices {
                    facets[e].push(vertex_of[v]);
                }
            }
        }
        if let Some(chambers) = self.by_dim.get(2) {
            let mut edge_by_ends: HashMap<(usize, usize), usize> = HashMap::new();
            for &e in &self.by_dim[1] {
                let f = &facets[e];
                edge_by_ends.insert((f[0].min(f[1]), f[0].max(f[1])), e);
            }
            for &c in chambers {
                let vs: Vec<usize> = self.cells[c].vertices.iter().map(|v| vertex_of[v]).collect();
                for a in 0..vs.len() {
                    for b in a + 1..vs.len() {
                        let key = (vs[a].min(vs[b]), vs[a].max(vs[b]));
                        if let Some(&e) = edge_by_ends.get(&key) {
                            // an edge is a face of the chamber iff its sign vector dominates
                            if dominated(&self.cells[e].signs, &self.cells[c].signs) {
                                facets[c].push(e);
                            }
                        }
                    }
                }
            }
        }
        for idx in 0..self.cells.len() {
            let mut with_signs = Vec::new();
            let mut planes = BTreeSet::new();
            for &f in &facets[idx] {
                let eps = self.incidence_sign(idx, f)?;
                with_signs.push((f, eps));
                for (p, (&sf, &sc)) in self.cells[f].signs.iter().zip(&self.cells[idx].signs).enumerate() {
                    if sf == 0 && sc != 0 {
                        planes.insert(p);
                    }
                }
            }
            with_signs.sort();
            self.cells[idx].facets = with_signs;
            self.cells[idx].facet_planes = planes.into_iter().collect();
        }
        for idx in 0..self.cells.len() {
            for k in 0..self.cells[idx].facets.len() {
                let f = self.cells[idx].facets[k].0;
                self.cells[f].cofaces.push(idx);
            }
        }
        let rank = self.system.rank;
        for &c in self.by_dim.iter().skip(1).flatten() {
            let cell = &self.cells[c];
            let expect_min = cell.dim + 1;
            if cell.facets.len() < expect_min {
                return Err(Error::Degenerate(format!("cell {} has too few facets", cell.id())));
            }
        }
        let _ = rank;
        Ok(())
    }

    /// ε(σ, τ): +1 when σ's orientation is τ's frame followed by an outward normal.
    fn incidence_sign(&self, sigma: usize, tau: usize) -> Result<i8> {
        let s = &self.cells[sigma];
        let t = &self.cells[tau];
        let outward = sub(&t.barycenter, &s.barycenter);
        let mut vecs: Vec<QVec> = t.frame.clone();
        vecs.push(outward);
        let coords: Vec<QVec> = vecs
            .iter()
            .map(|v| linalg::coords_in_frame(&s.frame, v))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::Degenerate("face not in the affine hull of its coface".into()))?;
        let d = linalg::det(&coords);
        if d.is_zero() {
            return Err(Error::Degenerate("outward normal parallel to face".into()));
        }
        Ok(d.signum())
    }

    pub fn rank(&self) -> usize {
        self.system.rank
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell(&self, idx: usize) -> &Cell {
        &self.cells[idx]
    }

    pub fn signs_at(&self, x: &[Q]) -> SignVector {
        self.hyperplanes.iter().map(|h| h.value(x).signum()).collect()
    }

    /// Cell whose relative interior contains `x`, if `x` is in the window.
    pub fn locate(&self, x: &[Q]) -> Option<usize> {
        if !self.window.contains(x) {
            return None;
        }
        self.lookup.get(&self.signs_at(x)).copied()
    }

    pub fn find_by_signs(&self, signs: &[i8]) -> Option<usize> {
        self.lookup.get(signs).copied()
    }

    pub fn find_by_id(&self, id: &str) -> Result<usize> {
        if let Some(rest) = id.strip_prefix('#') {
            let i: usize = rest.parse().map_err(|_| Error::UnknownCell(id.into()))?;
            return if i < self.cells.len() { Ok(i) } else { Err(Error::UnknownCell(id.into())) };
        }
        parse_sign_string(id)
            .and_then(|s| self.find_by_signs(&s))
            .ok_or_else(|| Error::UnknownCell(id.into()))
    }

    pub fn vertex_at(&self, x: &[Q]) -> Result<usize> {
        match self.locate(x) {
            Some(i) if self.cells[i].dim == 0 => Ok(i),
            _ => Err(Error::NotAVertex(fmt_qvec(x))),
        }
    }

    /// Counts of cells per dimension.
    pub fn f_vector(&self) -> Vec<usize> {
        self.by_dim.iter().map(|d| d.len()).collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.by_dim
            .iter()
            .enumerate()
            .map(|(d, v)| if d % 2 == 0 { v.len() as i64 } else { -(v.len() as i64) })
            .sum()
    }

    pub fn boundary(&self, sigma: usize) -> Result<Chain> {
        let cell = self.cells.get(sigma).ok_or_else(|| Error::UnknownCell(format!("#{sigma}")))?;
        if cell.dim == 0 {
            return Ok(Chain::scalar(1));
        }
        let mut c = Chain::zero(cell.dim as i32 - 1);
        for &(f, eps) in &cell.facets {
            c.add_term(f, eps as i64);
        }
        Ok(c)
    }

    pub fn boundary_chain(&self, ch: &Chain) -> Chain {
        if ch.degree <= 0 {
            let total: i64 = ch.terms.values().sum();
            return if ch.degree == 0 { Chain::scalar(total) } else { Chain::zero(-2) };
        }
        let mut out = Chain::zero(ch.degree - 1);
        for (&i, &k) in &ch.terms {
            for &(f, eps) in &self.cells[i].facets {
                out.add_term(f, k * eps as i64);
            }
        }
        out
    }

    /// Image of a cell under `g` with the orientation sign of `g` relative to the image frame.
    pub fn image_of_cell(&self, g: &AffineIsometry, idx: usize) -> Result<(usize, i8)> {
        let cell = &self.cells[idx];
        let img = self
            .locate(&g.apply(&cell.barycenter))
            .filter(|&j| self.cells[j].dim == cell.dim)
            .ok_or_else(|| Error::ImageOutsideComplex(cell.id()))?;
        if cell.dim == 0 {
            return Ok((img, 1));
        }
        let target = &self.cells[img];
        let coords: Vec<QVec> = cell
            .frame
            .iter()
            .map(|f| linalg::coords_in_frame(&target.frame, &g.apply_linear(f)))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::ImageOutsideComplex(cell.id()))?;
        Ok((img, linalg::det(&coords).signum()))
    }

    pub fn act(&self, g: &AffineIsometry, ch: &Chain) -> Result<Chain> {
        let mut out = Chain::zero(ch.degree);
        out.augmentation = ch.augmentation;
        for (&i, &k) in &ch.terms {
            let (j, s) = self.image_of_cell(g, i)?;
            out.add_term(j, k * s as i64);
        }
        Ok(out)
    }

    /// Cell permutation table of `g`; cells mapped outside the complex get `usize::MAX`.
    pub fn action_table(&self, g: &AffineIsometry) -> CellAction {
        let mut image = vec![usize::MAX; self.cells.len()];
        let mut sign = vec![0i8; self.cells.len()];
        for i in 0..self.cells.len() {
            if let Ok((j, s)) = self.image_of_cell(g, i) {
                image[i] = j;
                sign[i] = s;
            }
        }
        CellAction { image, sign }
    }

    /// The subgroup of the affine Weyl group of `Ψ_m` fixing `v0`, restricted
    /// to elements mapping the window onto itself. The identity comes first.
    pub fn stabilizer_of(&self, v0: &[Q]) -> Result<Vec<AffineIsometry>> {
        self.vertex_at(v0)?;
        let sys = &self.system;
        let gens: Vec<AffineIsometry> = sys
            .positive_roots()
            .filter_map(|i| {
                let val = dot(&sys.roots[i], v0);
                val.on_grid(self.m).then(|| AffineIsometry::reflection(sys, &sys.roots[i], -val))
            })
            .collect();
        let id = AffineIsometry::identity(sys.rank);
        let mut group = vec![id];
        let mut seen: BTreeSet<String> = BTreeSet::new();
        seen.insert(format!("{:?}", group[0]));
        let mut queue: VecDeque<usize> = VecDeque::from([0]);
        while let Some(i) = queue.pop_front() {
            for g in &gens {
                let h = g.compose(&group[i]);
                if seen.insert(format!("{h:?}")) {
                    group.push(h);
                    queue.push_back(group.len() - 1);
                }
            }
            if group.len() > 10_000 {
                return Err(Error::Degenerate("stabilizer is not finite".into()));
            }
        }
        Ok(group
            .into_iter()
            .filter(|g| self.window.vertices.iter().all(|v| self.window.contains(&g.apply(v))))
            .collect())
    }

    /// Cells all of whose vertices satisfy `|α(x − center)| ≤ radius`.
    pub fn ball_region(&self, center: &[Q], radius: Q) -> Vec<usize> {
        let sys = &self.system;
        (0..self.cells.len())
            .filter(|&i| {
                self.cells[i].vertices.iter().all(|v| {
                    sys.roots.iter().all(|a| dot(a, &sub(v, center)) <= radius)
                })
            })
            .collect()
    }

    /// Squared pairing distance from `x` to the barycenter of a cell.
    pub fn distance2(&self, x: &[Q], idx: usize) -> Q {
        let d = sub(&self.cells[idx].barycenter, x);
        dot(&d, &linalg::mat_vec(&self.system.gram, &d))
    }
}

/// `a ⪯ b`: every nonzero entry of `a` agrees with `b` (a is a face of b).
pub fn dominated(a: &[i8], b: &[i8]) -> bool {
    a.iter().zip(b).all(|(&x, &y)| x == 0 || x == y)
}

/// JSON form of a complex: cells with id, dimension, vertices and signed facets.
#[derive(Clone, Debug, Serialize)]
pub struct ComplexDump {
    #[serde(rename = "type")]
    pub root_type: RootType,
    pub m: u32,
    pub f_vector: Vec<usize>,
    pub cells: Vec<CellDump>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CellDump {
    pub id: String,
    pub dim: usize,
    pub vertices: Vec<QVec>,
    pub faces: Vec<(String, i8)>,
}

impl CellComplex {
    pub fn dump(&self) -> ComplexDump {
        ComplexDump {
            root_type: self.system.type_label,
            m: self.m,
            f_vector: self.f_vector(),
            cells: self
                .cells
                .iter()
                .map(|c| CellDump {
                    id: c.id(),
                    dim: c.dim,
                    vertices: c.vertices.clone(),
                    faces: c.facets.iter().map(|&(f, e)| (self.cells[f].id(), e)).collect(),
                })
                .collect(),
        }
    }
}
