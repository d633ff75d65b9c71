//! Equivariant contractions of the augmented chain complex, based at a vertex,
//! with values supported on cones.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::apartment::{ball_window, build_complex, CellAction, CellComplex, Chain};
use crate::cone::{face_closure, fixes_pointwise, support_subcomplex};
use crate::error::{Error, Result};
use crate::linalg::integer::{minimize_over_kernel, solve_integer, IntMatrix};
use crate::par::{self, Exec};
use crate::rational::{Q, QVec};
use crate::roots::{affine_roots_in_window, build_root_system, AffineIsometry, RootType};

#[derive(Clone, Copy, Debug)]
pub struct BuildOptions {
    pub exec: Exec,
    /// Improving moves allowed while minimizing over the kernel lattice.
    pub kernel_budget: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { exec: Exec::default(), kernel_budget: 200 }
    }
}

#[derive(Clone, Debug)]
pub struct Contraction {
    pub v0: QVec,
    pub v0_cell: usize,
    /// c(σ) for every cell σ of the region; c(σ) has degree dim σ + 1.
    pub maps: BTreeMap<usize, Chain>,
    pub stabilizer: Vec<AffineIsometry>,
}

impl Contraction {
    pub fn region(&self) -> BTreeSet<usize> {
        self.maps.keys().copied().collect()
    }

    /// Linear extension of c; on degree −1 it sends 1 to the base vertex.
    pub fn apply(&self, ch: &Chain) -> Result<Chain> {
        let mut out = Chain::zero(ch.degree + 1);
        if ch.degree == -1 {
            out.add_term(self.v0_cell, ch.augmentation);
            return Ok(out);
        }
        for (&i, &k) in &ch.terms {
            let c = self.maps.get(&i).ok_or_else(|| Error::UnknownCell(format!("#{i} not in region")))?;
            out.add_scaled(k, c);
        }
        Ok(out)
    }

    pub fn max_coefficient(&self) -> i64 {
        self.maps.values().map(Chain::max_abs).max().unwrap_or(0)
    }
}

/// Cells whose closure lies in the ball of the given radius around `v0`.
pub fn ball_region(complex: &CellComplex, v0: &[Q], radius: Q) -> BTreeSet<usize> {
    complex.ball_region(v0, radius).into_iter().collect()
}

fn orbit_closure(tables: &[CellAction], cells: &BTreeSet<usize>) -> Result<BTreeSet<usize>> {
    let mut out = cells.clone();
    for &c in cells {
        for t in tables {
            if t.image[c] == usize::MAX {
                return Err(Error::ImageOutsideComplex(format!("#{c}")));
            }
            out.insert(t.image[c]);
        }
    }
    Ok(out)
}

/// Build a contraction based at the vertex `v0` on `region` (all cells when
/// `None`). The region is closed under faces and under the stabilizer of `v0`.
pub fn build_contraction(
    complex: &CellComplex,
    v0: &[Q],
    region: Option<&BTreeSet<usize>>,
    opts: BuildOptions,
) -> Result<Contraction> {
    let v0_cell = complex.vertex_at(v0)?;
    let stabilizer = complex.stabilizer_of(v0)?;
    let tables: Vec<CellAction> = par::map(opts.exec, &stabilizer, |g| complex.action_table(g));
    let seed: BTreeSet<usize> = match region {
        Some(r) => r.clone(),
        None => (0..complex.len()).collect(),
    };
    let region = orbit_closure(&tables, &face_closure(complex, seed))?;

    let mut maps: HashMap<usize, Chain> = HashMap::new();
    for d in 0..=complex.rank() {
        let layer: Vec<usize> = region.iter().copied().filter(|&c| complex.cell(c).dim == d).collect();
        let mut reps: Vec<usize> = layer
            .iter()
            .copied()
            .filter(|&c| tables.iter().all(|t| t.image[c] >= c))
            .collect();
        reps.sort_by(|&a, &b| {
            (complex.distance2(v0, a), &complex.cell(a).signs)
                .cmp(&(complex.distance2(v0, b), &complex.cell(b).signs))
        });
        let lifts = par::map(opts.exec, &reps, |&s| lift(complex, v0, v0_cell, &maps, s, opts.kernel_budget));
        for (&s, lifted) in reps.iter().zip(lifts) {
            let c = lifted?;
            for (g, t) in stabilizer.iter().zip(&tables) {
                // g·σ = ε·img, so c(img) = ε·g·c(σ)
                let img = t.image[s];
                let mut gc = Chain::zero(c.degree);
                gc.add_scaled(t.sign[s] as i64, &t.apply(&c));
                match maps.get(&img) {
                    Some(prev) if *prev != gc => {
                        return Err(Error::UnsolvableLift {
                            cell: complex.cell(s).id(),
                            reason: format!("equivariant extension is inconsistent under {g:?}"),
                        });
                    }
                    Some(_) => {}
                    None => {
                        maps.insert(img, gc);
                    }
                }
            }
        }
    }
    Ok(Contraction { v0: v0.to_vec(), v0_cell, maps: maps.into_iter().collect(), stabilizer })
}

/// Solve ∂w = σ − c(∂σ) inside the support subcomplex of σ.
fn lift(
    complex: &CellComplex,
    v0: &[Q],
    v0_cell: usize,
    maps: &HashMap<usize, Chain>,
    sigma: usize,
    budget: usize,
) -> Result<Chain> {
    let cell = complex.cell(sigma);
    let d = cell.dim;
    let fail = |reason: String| Error::UnsolvableLift { cell: cell.id(), reason };
    let mut z = Chain::cell(d as i32, sigma);
    if d == 0 {
        z.add_term(v0_cell, -1);
    } else {
        for &(f, e) in &cell.facets {
            let cf = maps.get(&f).ok_or_else(|| fail(format!("face #{f} has no value yet")))?;
            z.add_scaled(-(e as i64), cf);
        }
    }
    if z.is_zero() {
        return Ok(Chain::zero(d as i32 + 1));
    }
    if d == complex.rank() {
        return Err(fail("nonzero cycle in top degree".into()));
    }
    let support = support_subcomplex(v0, complex, sigma)?;
    if let Some(t) = z.terms.keys().find(|t| !support.contains(t)) {
        return Err(fail(format!("cycle term #{t} outside the support")));
    }
    let cols: Vec<usize> = support.iter().copied().filter(|&c| complex.cell(c).dim == d + 1).collect();
    let rows: Vec<usize> = support.iter().copied().filter(|&c| complex.cell(c).dim == d).collect();
    let row_of: HashMap<usize, usize> = rows.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let col_of: HashMap<usize, usize> = cols.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut b: IntMatrix = vec![vec![0; cols.len()]; rows.len()];
    for (j, &c) in cols.iter().enumerate() {
        for &(f, e) in &complex.cell(c).facets {
            b[row_of[&f]][j] = e as i128;
        }
    }
    let rhs: Vec<i128> = rows.iter().map(|r| z.terms.get(r).copied().unwrap_or(0) as i128).collect();
    let mut sol = solve_integer(&b, &rhs)?.ok_or_else(|| fail("no integer solution in the support".into()))?;
    // boundaries of the next layer are sparse kernel generators
    for &c in support.iter().filter(|&&c| complex.cell(c).dim == d + 2) {
        let mut k = vec![0i128; cols.len()];
        for &(f, e) in &complex.cell(c).facets {
            k[col_of[&f]] = e as i128;
        }
        sol.kernel.insert(0, k);
    }
    let w = minimize_over_kernel(&sol, budget);
    let mut out = Chain::zero(d as i32 + 1);
    for (j, &x) in w.iter().enumerate() {
        let x = i64::try_from(x).map_err(|_| Error::Overflow("contraction coefficient"))?;
        out.add_term(cols[j], x);
    }
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Report {
    pub identity: bool,
    pub support: bool,
    pub equivariance: bool,
    pub max_coefficient: i64,
    pub cells_checked: usize,
    pub failures: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.identity && self.support && self.equivariance
    }
}

#[derive(Default)]
struct CellVerdict {
    identity: bool,
    support: bool,
    equivariance: bool,
    notes: Vec<String>,
}

pub fn verify_contraction(
    c: &Contraction,
    complex: &CellComplex,
    region: &BTreeSet<usize>,
    exec: Exec,
) -> Report {
    let tables: Vec<CellAction> = par::map(exec, &c.stabilizer, |g| complex.action_table(g));
    let cells: Vec<usize> = region.iter().copied().collect();
    let verdicts = par::map(exec, &cells, |&s| verify_cell(c, complex, &tables, region, s));
    let mut report = Report {
        identity: true,
        support: true,
        equivariance: true,
        max_coefficient: 0,
        cells_checked: cells.len(),
        failures: Vec::new(),
    };
    for (&s, v) in cells.iter().zip(verdicts) {
        report.identity &= v.identity;
        report.support &= v.support;
        report.equivariance &= v.equivariance;
        report.failures.extend(v.notes);
        if let Some(ch) = c.maps.get(&s) {
            report.max_coefficient = report.max_coefficient.max(ch.max_abs());
        }
    }
    report
}

fn verify_cell(
    c: &Contraction,
    complex: &CellComplex,
    tables: &[CellAction],
    region: &BTreeSet<usize>,
    s: usize,
) -> CellVerdict {
    let id = complex.cell(s).id();
    let mut v = CellVerdict { identity: true, support: true, equivariance: true, notes: Vec::new() };
    let Some(cs) = c.maps.get(&s) else {
        v.identity = false;
        v.notes.push(format!("identity: {id} has no value"));
        return v;
    };
    // ∂c(σ) + c(∂σ) = σ
    let lhs = complex.boundary(s).and_then(|b| c.apply(&b)).map(|mut cb| {
        cb.add_scaled(1, &complex.boundary_chain(cs));
        cb
    });
    match lhs {
        Ok(ch) if ch == Chain::cell(complex.cell(s).dim as i32, s) => {}
        Ok(_) => {
            v.identity = false;
            v.notes.push(format!("identity: fails on {id}"));
        }
        Err(e) => {
            v.identity = false;
            v.notes.push(format!("identity: {id}: {e}"));
        }
    }
    let support = match support_subcomplex(&c.v0, complex, s) {
        Ok(sup) => {
            if let Some(t) = cs.terms.keys().find(|t| !sup.contains(t)) {
                v.support = false;
                v.notes.push(format!("support: c({id}) has term {} outside the cone", complex.cell(*t).id()));
            }
            Some(sup)
        }
        Err(e) => {
            v.support = false;
            v.notes.push(format!("support: {id}: {e}"));
            None
        }
    };
    for (g, t) in c.stabilizer.iter().zip(tables) {
        let img = t.image[s];
        if img == usize::MAX || !region.contains(&img) {
            continue;
        }
        let mut expect = Chain::zero(cs.degree);
        expect.add_scaled(t.sign[s] as i64, &t.apply(cs));
        let ok = c.maps.get(&img).is_some_and(|ci| *ci == expect);
        if !ok {
            v.equivariance = false;
            v.notes.push(format!("equivariance: c(g·{id}) ≠ g·c({id})"));
        }
        if img == s {
            if let Some(sup) = &support {
                if !fixes_pointwise(g, complex, sup) {
                    v.equivariance = false;
                    v.notes.push(format!("equivariance: stabilizer of {id} moves its support"));
                }
            }
        }
    }
    v
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundRow {
    pub radius: i64,
    pub max_coefficient: i64,
    pub cells: usize,
    pub complete: bool,
    pub note: String,
}

/// Maximum |c(σ, τ)| over all cells of the window of each radius around the origin.
pub fn coefficient_bound_sweep(
    root_type: RootType,
    m: u32,
    radii: &[i64],
    opts: BuildOptions,
) -> Vec<BoundRow> {
    let sys = build_root_system(root_type);
    let origin = vec![Q::ZERO; sys.rank];
    radii
        .iter()
        .map(|&radius| {
            let run = || -> Result<(i64, usize)> {
                let w = ball_window(&sys, &origin, Q::from(radius))?;
                let roots = affine_roots_in_window(&sys, m, &w)?;
                let complex = build_complex(&sys, m, &roots, w)?;
                let c = build_contraction(&complex, &origin, None, opts)?;
                Ok((c.max_coefficient(), complex.len()))
            };
            match run() {
                Ok((max, cells)) => BoundRow { radius, max_coefficient: max, cells, complete: true, note: String::new() },
                Err(e) => BoundRow { radius, max_coefficient: 0, cells: 0, complete: false, note: e.to_string() },
            }
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ChainDump {
    pub degree: i32,
    pub terms: Vec<(String, i64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub augmentation: Option<i64>,
}

pub fn dump_chain(complex: &CellComplex, ch: &Chain) -> ChainDump {
    ChainDump {
        degree: ch.degree,
        terms: ch.terms.iter().map(|(&i, &k)| (complex.cell(i).id(), k)).collect(),
        augmentation: (ch.degree == -1).then_some(ch.augmentation),
    }
}

pub fn load_chain(complex: &CellComplex, dump: &ChainDump) -> Result<Chain> {
    let mut ch = Chain::zero(dump.degree);
    for (id, k) in &dump.terms {
        let i = complex.find_by_id(id)?;
        if complex.cell(i).dim as i32 != dump.degree {
            return Err(Error::Parse(format!("cell {id} has the wrong dimension for degree {}", dump.degree)));
        }
        ch.add_term(i, *k);
    }
    ch.augmentation = dump.augmentation.unwrap_or(0);
    Ok(ch)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ContractionDump {
    pub base_vertex: Vec<Q>,
    pub cells: Vec<(String, ChainDump)>,
}

pub fn dump_contraction(complex: &CellComplex, c: &Contraction) -> ContractionDump {
    ContractionDump {
        base_vertex: c.v0.clone(),
        cells: c.maps.iter().map(|(&i, ch)| (complex.cell(i).id(), dump_chain(complex, ch))).collect(),
    }
}

pub fn load_contraction(complex: &CellComplex, dump: &ContractionDump) -> Result<Contraction> {
    let v0_cell = complex.vertex_at(&dump.base_vertex)?;
    let mut maps = BTreeMap::new();
    for (id, ch) in &dump.cells {
        maps.insert(complex.find_by_id(id)?, load_chain(complex, ch)?);
    }
    Ok(Contraction {
        v0: dump.base_vertex.clone(),
        v0_cell,
        maps,
        stabilizer: complex.stabilizer_of(&dump.base_vertex)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::Polytope;
    use crate::rational::qvec;

    fn complex(t: RootType, m: u32, radius: i64) -> CellComplex {
        let sys = build_root_system(t);
        let w = ball_window(&sys, &vec![Q::ZERO; sys.rank], Q::from(radius)).unwrap();
        let roots = affine_roots_in_window(&sys, m, &w).unwrap();
        build_complex(&sys, m, &roots, w).unwrap()
    }

    fn all(c: &CellComplex) -> BTreeSet<usize> {
        (0..c.len()).collect()
    }

    #[test]
    fn a1_values() {
        let cx = complex(RootType::A1, 1, 2);
        let c = build_contraction(&cx, &qvec(&[0]), None, BuildOptions::default()).unwrap();
        let v0 = cx.vertex_at(&qvec(&[0])).unwrap();
        assert!(c.maps[&v0].is_zero());
        assert_eq!(c.apply(&Chain::scalar(1)).unwrap(), Chain::cell(0, v0));
        let v2 = cx.vertex_at(&qvec(&[2])).unwrap();
        let e01 = cx.locate(&[Q::new(1, 2)]).unwrap();
        let e12 = cx.locate(&[Q::new(3, 2)]).unwrap();
        // both edges are framed away from the origin on the positive side
        let mut expect = Chain::zero(1);
        expect.add_term(e01, 1);
        expect.add_term(e12, 1);
        assert_eq!(c.maps[&v2], expect);
        let r = verify_contraction(&c, &cx, &all(&cx), Exec::Sequential);
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.max_coefficient, 1);
    }

    #[test]
    fn grid_edge_is_filled_by_crossed_squares() {
        let sys = build_root_system(RootType::A1xA1);
        let w = Polytope::cube(&qvec(&[-3, -3]), &qvec(&[3, 3])).unwrap();
        let roots = affine_roots_in_window(&sys, 1, &w).unwrap();
        let cx = build_complex(&sys, 1, &roots, w).unwrap();
        let c = build_contraction(&cx, &qvec(&[0, 0]), None, BuildOptions::default()).unwrap();
        let e = cx.locate(&[Q::int(2), Q::new(1, 2)]).unwrap();
        let sq: BTreeSet<usize> = c.maps[&e].terms.keys().copied().collect();
        let crossed = BTreeSet::from([
            cx.locate(&[Q::new(1, 2), Q::new(1, 2)]).unwrap(),
            cx.locate(&[Q::new(3, 2), Q::new(1, 2)]).unwrap(),
        ]);
        assert!(sq.is_subset(&crossed));
        let mut lhs = cx.boundary_chain(&c.maps[&e]);
        lhs.add_scaled(1, &c.apply(&cx.boundary(e).unwrap()).unwrap());
        assert_eq!(lhs, Chain::cell(1, e));
        let r = verify_contraction(&c, &cx, &all(&cx), Exec::Sequential);
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn region_of_base_vertex_is_vacuous() {
        let cx = complex(RootType::A2, 1, 2);
        let v0 = cx.vertex_at(&qvec(&[0, 0])).unwrap();
        let region = BTreeSet::from([v0]);
        let c = build_contraction(&cx, &qvec(&[0, 0]), Some(&region), BuildOptions::default()).unwrap();
        let r = verify_contraction(&c, &cx, &region, Exec::Sequential);
        assert!(r.passed());
        assert_eq!(r.max_coefficient, 0);
    }

    #[test]
    fn corrupted_coefficient_breaks_identity() {
        let cx = complex(RootType::A1, 1, 2);
        let mut c = build_contraction(&cx, &qvec(&[0]), None, BuildOptions::default()).unwrap();
        let v2 = cx.vertex_at(&qvec(&[2])).unwrap();
        let e = *c.maps[&v2].terms.keys().next().unwrap();
        c.maps.get_mut(&v2).unwrap().add_term(e, 1);
        let r = verify_contraction(&c, &cx, &all(&cx), Exec::Sequential);
        assert!(!r.identity);
    }

    #[test]
    fn a1_refined_and_rank_two_types_verify() {
        for (t, m, radius) in [
            (RootType::A1, 2, 3),
            (RootType::A2, 1, 2),
            (RootType::B2, 2, 2),
            (RootType::G2, 1, 3),
        ] {
            let cx = complex(t, m, radius);
            let v0 = vec![Q::ZERO; cx.rank()];
            let c = build_contraction(&cx, &v0, None, BuildOptions::default()).unwrap();
            let r = verify_contraction(&c, &cx, &all(&cx), Exec::Sequential);
            assert!(r.passed(), "{t} m={m}: {:?}", r.failures);
            if t == RootType::A1 {
                assert_eq!(r.max_coefficient, 1);
            }
        }
    }

    #[test]
    fn dump_round_trip() {
        let cx = complex(RootType::A2, 2, 1);
        let c = build_contraction(&cx, &qvec(&[0, 0]), None, BuildOptions::default()).unwrap();
        let dump = dump_contraction(&cx, &c);
        let json = serde_json::to_string(&dump).unwrap();
        let back: ContractionDump = serde_json::from_str(&json).unwrap();
        let c2 = load_contraction(&cx, &back).unwrap();
        assert_eq!(c.maps, c2.maps);
    }

    #[test]
    fn a1_sweep_is_flat() {
        let rows = coefficient_bound_sweep(RootType::A1, 1, &[2, 4, 8], BuildOptions::default());
        assert!(rows.iter().all(|r| r.complete && r.max_coefficient == 1));
    }
}
