//! Exact linear algebra over ℚ and ℤ.

pub mod integer;
pub mod sparse;

use crate::rational::{Q, QVec};

/// Row-reduce a copy of `rows` and return its rank.
pub fn rank(rows: &[QVec]) -> usize {
    let mut m: Vec<QVec> = rows.to_vec();
    echelon(&mut m).len()
}

/// In-place reduced row echelon form; returns pivot columns.
pub fn echelon(m: &mut [QVec]) -> Vec<usize> {
    let nrows = m.len();
    if nrows == 0 {
        return Vec::new();
    }
    let ncols = m[0].len();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row == nrows {
            break;
        }
        let Some(p) = (row..nrows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for x in m[row].iter_mut() {
            *x *= inv;
        }
        for r in 0..nrows {
            if r != row && !m[r][col].is_zero() {
                let f = m[r][col];
                for c in col..ncols {
                    let v = m[row][c];
                    if !v.is_zero() {
                        m[r][c] -= f * v;
                    }
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

/// Some solution of `a x = b`, or `None` when inconsistent.
pub fn solve(a: &[QVec], b: &[Q]) -> Option<QVec> {
    assert_eq!(a.len(), b.len());
    let ncols = a.first().map_or(0, |r| r.len());
    let mut aug: Vec<QVec> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    let pivots = echelon(&mut aug);
    if pivots.last() == Some(&ncols) {
        return None;
    }
    let mut x = vec![Q::ZERO; ncols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = aug[r][ncols];
    }
    Some(x)
}

pub fn det(m: &[QVec]) -> Q {
    let n = m.len();
    let mut a: Vec<QVec> = m.to_vec();
    let mut d = Q::ONE;
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Q::ZERO;
        };
        if p != col {
            a.swap(p, col);
            d = -d;
        }
        let piv = a[col][col];
        d *= piv;
        for r in col + 1..n {
            if !a[r][col].is_zero() {
                let f = a[r][col] / piv;
                for c in col..n {
                    let v = a[col][c];
                    a[r][c] -= f * v;
                }
            }
        }
    }
    d
}

pub fn inverse(m: &[QVec]) -> Option<Vec<QVec>> {
    let n = m.len();
    let mut aug: Vec<QVec> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Q::ONE } else { Q::ZERO }));
            r
        })
        .collect();
    let pivots = echelon(&mut aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn mat_vec(m: &[QVec], v: &[Q]) -> QVec {
    m.iter().map(|row| crate::rational::dot(row, v)).collect()
}

pub fn mat_mul(a: &[QVec], b: &[QVec]) -> Vec<QVec> {
    let inner = b.len();
    let ncols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..ncols)
                .map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn transpose(a: &[QVec]) -> Vec<QVec> {
    let ncols = a.first().map_or(0, |r| r.len());
    (0..ncols).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

pub fn identity(n: usize) -> Vec<QVec> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Q::ONE } else { Q::ZERO }).collect())
        .collect()
}

/// Coordinates of `v` in the basis `frame` (linearly independent vectors), if `v` lies in their span.
pub fn coords_in_frame(frame: &[QVec], v: &[Q]) -> Option<QVec> {
    // columns of the system are the frame vectors
    let rows: Vec<QVec> = (0..v.len())
        .map(|i| frame.iter().map(|f| f[i]).collect())
        .collect();
    let x = solve(&rows, v)?;
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qvec;

    #[test]
    fn det_and_inverse() {
        let m = vec![qvec(&[2, 1]), qvec(&[1, 2])];
        assert_eq!(det(&m), Q::int(3));
        let inv = inverse(&m).unwrap();
        assert_eq!(mat_mul(&m, &inv), identity(2));
        assert!(inverse(&[qvec(&[1, 2]), qvec(&[2, 4])]).is_none());
    }

    #[test]
    fn rank_and_solve() {
        let m = vec![qvec(&[1, 2, 3]), qvec(&[2, 4, 6]), qvec(&[0, 1, 1])];
        assert_eq!(rank(&m), 2);
        let x = solve(&m, &qvec(&[1, 2, 1])).unwrap();
        assert_eq!(mat_vec(&m, &x), qvec(&[1, 2, 1]));
        assert!(solve(&m, &qvec(&[1, 3, 1])).is_none());
    }

    #[test]
    fn frame_coordinates() {
        let frame = vec![qvec(&[1, 1, 0]), qvec(&[0, 1, 1])];
        assert_eq!(coords_in_frame(&frame, &qvec(&[2, 3, 1])).unwrap(), qvec(&[2, 1]));
        assert!(coords_in_frame(&frame, &qvec(&[1, 0, 0])).is_none());
    }
}
