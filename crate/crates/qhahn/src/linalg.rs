//! Exact Gaussian elimination over the rationals.

use num_traits::{One, Zero};

use crate::exactq::Rational;

/// Determinant by elimination with row exchanges.
pub fn det(mut a: Vec<Vec<Rational>>) -> Rational {
    let n = a.len();
    let mut d = Rational::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rational::zero();
        };
        if piv != col {
            a.swap(piv, col);
            d = -d;
        }
        let p = a[col][col].clone();
        d *= &p;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &p;
            for c in col..n {
                let v = &f * &a[col][c];
                a[r][c] -= v;
            }
        }
    }
    d
}

/// Solution set of `a·x = b`: a particular solution (free variables zero)
/// and a basis of the null space, or `None` if inconsistent.
pub struct AffineSolution {
    pub particular: Vec<Rational>,
    pub nullspace: Vec<Vec<Rational>>,
}

pub fn solve_affine(a: &[Vec<Rational>], b: &[Rational], ncols: usize) -> Option<AffineSolution> {
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.resize(ncols, Rational::zero());
            r.push(bi.clone());
            r
        })
        .collect();
    let rows = m.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows {
            break;
        }
        let Some(piv) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(piv, r);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for k in c..=ncols {
                    let v = &f * &m[r][k];
                    m[i][k] -= v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if m[r..].iter().any(|row| !row[ncols].is_zero()) {
        return None;
    }
    let mut particular = vec![Rational::zero(); ncols];
    for (i, &c) in pivots.iter().enumerate() {
        particular[c] = m[i][ncols].clone();
    }
    let mut nullspace = Vec::new();
    for f in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Rational::zero(); ncols];
        v[f] = Rational::one();
        for (i, &c) in pivots.iter().enumerate() {
            v[c] = -m[i][f].clone();
        }
        nullspace.push(v);
    }
    Some(AffineSolution {
        particular,
        nullspace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactq::int;

    fn m(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter()
            .map(|r| r.iter().map(|&v| int(v)).collect())
            .collect()
    }

    #[test]
    fn determinant() {
        assert_eq!(det(m(&[&[1, 0], &[0, 1]])), int(1));
        assert_eq!(det(m(&[&[0, 1], &[1, 0]])), int(-1));
        assert_eq!(det(m(&[&[1, 1], &[1, 1]])), int(0));
        assert_eq!(det(m(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]])), int(18));
    }

    #[test]
    fn affine_solutions() {
        let s = solve_affine(&m(&[&[1, 1]]), &[int(2)], 2).unwrap();
        assert_eq!(s.particular, vec![int(2), int(0)]);
        assert_eq!(s.nullspace, vec![vec![int(-1), int(1)]]);
        assert!(solve_affine(&m(&[&[1, 1], &[1, 1]]), &[int(1), int(2)], 2).is_none());
        let s = solve_affine(&m(&[&[1, 2], &[3, 4]]), &[int(5), int(6)], 2).unwrap();
        assert!(s.nullspace.is_empty());
        assert_eq!(s.particular, vec![int(-4), crate::exactq::rat(9, 2)]);
    }
}
