//! Integer matrices: Smith invariant factors and lattice solutions of `B w = z`.
//!
//! All arithmetic is checked `i128`; overflow is reported, never wrapped.

use crate::error::{Error, Result};

pub type IntMatrix = Vec<Vec<i128>>;

fn ck_mul(a: i128, b: i128) -> Result<i128> {
    a.checked_mul(b).ok_or(Error::Overflow("integer matrix"))
}

fn ck_sub(a: i128, b: i128) -> Result<i128> {
    a.checked_sub(b).ok_or(Error::Overflow("integer matrix"))
}

/// Nonzero invariant factors (diagonal of the Smith normal form), in order.
pub fn smith_invariants(m: &IntMatrix) -> Result<Vec<i128>> {
    let mut a = m.clone();
    let nrows = a.len();
    let ncols = a.first().map_or(0, |r| r.len());
    let mut diag = Vec::new();
    let mut t = 0;
    while t < nrows.min(ncols) {
        // smallest nonzero entry in the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..nrows {
            for j in t..ncols {
                if a[i][j] != 0 && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let p = a[t][t];
            let mut dirty = false;
            for i in t + 1..nrows {
                if a[i][t] != 0 {
                    let q = a[i][t].div_euclid(p);
                    for j in t..ncols {
                        a[i][j] = ck_sub(a[i][j], ck_mul(q, a[t][j])?)?;
                    }
                    if a[i][t] != 0 {
                        dirty = true;
                    }
                }
            }
            for j in t + 1..ncols {
                if a[t][j] != 0 {
                    let q = a[t][j].div_euclid(p);
                    for row in a.iter_mut().skip(t) {
                        row[j] = ck_sub(row[j], ck_mul(q, row[t])?)?;
                    }
                    if a[t][j] != 0 {
                        dirty = true;
                    }
                }
            }
            if !dirty {
                // divisibility of the rest of the block by the pivot
                let bad = (t + 1..nrows)
                    .flat_map(|i| (t + 1..ncols).map(move |j| (i, j)))
                    .find(|&(i, j)| a[i][j] % p != 0);
                match bad {
                    None => break,
                    Some((i, _)) => {
                        for j in t..ncols {
                            a[t][j] = a[t][j]
                                .checked_add(a[i][j])
                                .ok_or(Error::Overflow("integer matrix"))?;
                        }
                        continue;
                    }
                }
            }
            // move the new smallest entry of row/column t to the pivot
            let mut best = (t, t);
            for i in t..nrows {
                if a[i][t] != 0 && a[i][t].abs() < a[best.0][best.1].abs() {
                    best = (i, t);
                }
            }
            for j in t..ncols {
                if a[t][j] != 0 && a[t][j].abs() < a[best.0][best.1].abs() {
                    best = (t, j);
                }
            }
            a.swap(t, best.0);
            for row in a.iter_mut() {
                row.swap(t, best.1);
            }
        }
        diag.push(a[t][t].abs());
        t += 1;
    }
    Ok(diag)
}

/// General integer solution of `B w = z`: a particular solution plus a kernel lattice basis.
#[derive(Clone, Debug, PartialEq)]
pub struct IntSolution {
    pub particular: Vec<i128>,
    pub kernel: Vec<Vec<i128>>,
}

/// Solve `B w = z` over ℤ by unimodular column reduction. `Ok(None)` when no
/// integer solution exists.
pub fn solve_integer(b: &IntMatrix, z: &[i128]) -> Result<Option<IntSolution>> {
    let nrows = b.len();
    assert_eq!(nrows, z.len());
    let ncols = b.first().map_or(0, |r| r.len());
    let mut a = b.clone();
    let mut u: IntMatrix = (0..ncols)
        .map(|i| (0..ncols).map(|j| i128::from(i == j)).collect())
        .collect();

    // column operation helpers on both `a` and `u` (u stores columns as rows of u^T)
    let swap_cols = |a: &mut IntMatrix, u: &mut IntMatrix, x: usize, y: usize| {
        for row in a.iter_mut() {
            row.swap(x, y);
        }
        u.swap(x, y);
    };
    let sub_col = |a: &mut IntMatrix, u: &mut IntMatrix, dst: usize, src: usize, q: i128| -> Result<()> {
        for row in a.iter_mut() {
            row[dst] = ck_sub(row[dst], ck_mul(q, row[src])?)?;
        }
        for k in 0..u[src].len() {
            let v = u[src][k];
            u[dst][k] = ck_sub(u[dst][k], ck_mul(q, v)?)?;
        }
        Ok(())
    };

    let mut pivots: Vec<usize> = Vec::new(); // pivot row for column k
    let mut next = 0;
    for i in 0..nrows {
        if next == ncols {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for j in next..ncols {
                if a[i][j] != 0 && best.is_none_or(|bj| a[i][j].abs() < a[i][bj].abs()) {
                    best = Some(j);
                }
            }
            let Some(bj) = best else { break };
            if bj != next {
                swap_cols(&mut a, &mut u, next, bj);
            }
            let mut done = true;
            for j in next + 1..ncols {
                if a[i][j] != 0 {
                    let q = a[i][j].div_euclid(a[i][next]);
                    sub_col(&mut a, &mut u, j, next, q)?;
                    if a[i][j] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                pivots.push(i);
                next += 1;
                break;
            }
        }
    }

    let rank = pivots.len();
    let mut y = vec![0i128; ncols];
    for (k, &row) in pivots.iter().enumerate() {
        let mut resid = z[row];
        for (j, &yj) in y.iter().enumerate().take(k) {
            resid = ck_sub(resid, ck_mul(a[row][j], yj)?)?;
        }
        let p = a[row][k];
        if resid % p != 0 {
            return Ok(None);
        }
        y[k] = resid / p;
    }
    for i in 0..nrows {
        let mut lhs = 0i128;
        for (j, &yj) in y.iter().enumerate().take(rank) {
            lhs = lhs
                .checked_add(ck_mul(a[i][j], yj)?)
                .ok_or(Error::Overflow("integer matrix"))?;
        }
        if lhs != z[i] {
            return Ok(None);
        }
    }
    let mut particular = vec![0i128; ncols];
    for (k, &yk) in y.iter().enumerate().take(rank) {
        if yk == 0 {
            continue;
        }
        for (c, p) in particular.iter_mut().enumerate() {
            *p = p
                .checked_add(ck_mul(yk, u[k][c])?)
                .ok_or(Error::Overflow("integer matrix"))?;
        }
    }
    let kernel = u[rank..].to_vec();
    Ok(Some(IntSolution { particular, kernel }))
}

fn score(w: &[i128]) -> (i128, i128) {
    let max = w.iter().map(|x| x.abs()).max().unwrap_or(0);
    let l1 = w.iter().map(|x| x.abs()).sum();
    (max, l1)
}

/// Greedy descent over kernel-lattice shifts, minimizing (max |w_i|, Σ|w_i|).
/// At most `budget` improving moves are taken.
pub fn minimize_over_kernel(sol: &IntSolution, budget: usize) -> Vec<i128> {
    let mut w = sol.particular.clone();
    let mut best = score(&w);
    let mut moves = 0;
    'outer: while moves < budget {
        for k in &sol.kernel {
            for sign in [1i128, -1] {
                let cand: Option<Vec<i128>> = w
                    .iter()
                    .zip(k)
                    .map(|(&a, &b)| b.checked_mul(sign).and_then(|s| a.checked_add(s)))
                    .collect();
                let Some(cand) = cand else { continue };
                let s = score(&cand);
                if s < best {
                    w = cand;
                    best = s;
                    moves += 1;
                    continue 'outer;
                }
            }
        }
        break;
    }
    w
}

/// Rank over ℚ of an integer matrix (number of nonzero invariant factors).
pub fn rank(m: &IntMatrix) -> Result<usize> {
    Ok(smith_invariants(m)?.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mat_vec(b: &IntMatrix, w: &[i128]) -> Vec<i128> {
        b.iter().map(|r| r.iter().zip(w).map(|(x, y)| x * y).sum()).collect()
    }

    #[test]
    fn smith_of_known_matrices() {
        assert_eq!(smith_invariants(&vec![vec![2, 4], vec![6, 8]]).unwrap(), vec![2, 4]);
        assert_eq!(smith_invariants(&vec![vec![2, 0], vec![0, 3]]).unwrap(), vec![1, 6]);
        assert_eq!(smith_invariants(&vec![vec![0, 0]]).unwrap(), Vec::<i128>::new());
        // boundary of a triangle
        let d = vec![vec![-1, 0, 1], vec![1, -1, 0], vec![0, 1, -1]];
        assert_eq!(smith_invariants(&d).unwrap(), vec![1, 1]);
    }

    #[test]
    fn path_lift_is_unique() {
        // vertices 0,1,2 ; edges 0->1, 1->2
        let b = vec![vec![-1, 0], vec![1, -1], vec![0, 1]];
        let sol = solve_integer(&b, &[-1, 0, 1]).unwrap().unwrap();
        assert_eq!(sol.particular, vec![1, 1]);
        assert!(sol.kernel.is_empty());
        assert!(solve_integer(&b, &[1, 0, 0]).unwrap().is_none());
    }

    #[test]
    fn no_integer_solution_detected() {
        let b = vec![vec![2]];
        assert!(solve_integer(&b, &[1]).unwrap().is_none());
        assert_eq!(solve_integer(&b, &[4]).unwrap().unwrap().particular, vec![2]);
    }

    #[test]
    fn minimization_uses_kernel() {
        let sol = IntSolution { particular: vec![5, -5], kernel: vec![vec![1, -1]] };
        assert_eq!(minimize_over_kernel(&sol, 100), vec![0, 0]);
    }

    proptest! {
        #[test]
        fn solutions_satisfy_system(
            entries in proptest::collection::vec(-3i128..=3, 12),
            w in proptest::collection::vec(-4i128..=4, 4),
        ) {
            let b: IntMatrix = entries.chunks(4).map(|c| c.to_vec()).collect();
            let z = mat_vec(&b, &w);
            let sol = solve_integer(&b, &z).unwrap().expect("z is in the image");
            prop_assert_eq!(mat_vec(&b, &sol.particular), z.clone());
            for k in &sol.kernel {
                prop_assert!(mat_vec(&b, k).iter().all(|&x| x == 0));
            }
            prop_assert_eq!(sol.kernel.len() + rank(&b).unwrap(), 4);
            let best = minimize_over_kernel(&sol, 50);
            prop_assert_eq!(mat_vec(&b, &best), z);
        }
    }
}
