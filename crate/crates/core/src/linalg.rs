//! Dense linear algebra over a field.

use crate::field::{Field, Ring};

/// Relative pivot tolerance on numeric fields.
pub const NUMERIC_PIVOT_TOL: f64 = 1e-40;

/// Solution set of `A u = b`: `particular + span(nullspace)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSolution<F> {
    pub particular: Vec<F>,
    pub nullspace: Vec<Vec<F>>,
    pub rank: usize,
}

/// Solves `A u = b` by Gauss–Jordan elimination, pivoting on the leftmost
/// available column. Free variables are set to zero in the particular
/// solution, so earlier columns are preferred. Returns `None` if the system
/// is inconsistent.
pub fn solve<F: Field>(a: &[Vec<F>], b: &[F], ncols: usize) -> Option<LinearSolution<F>> {
    let mut rows: Vec<Vec<F>> = a
        .iter()
        .zip(b)
        .map(|(r, bi)| {
            let mut v = r.clone();
            v.resize(ncols, F::zero());
            v.push(bi.clone());
            v
        })
        .collect();
    let scale = rows.iter().flat_map(|r| r.iter().map(|c| c.magnitude())).fold(0.0, f64::max).max(1.0);
    let negligible = |c: &F| c.is_negligible(scale, NUMERIC_PIVOT_TOL);
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == rows.len() {
            break;
        }
        let cand = if F::EXACT {
            (r..rows.len()).find(|&i| !rows[i][col].is_zero())
        } else {
            (r..rows.len())
                .filter(|&i| !negligible(&rows[i][col]))
                .max_by(|&i, &j| rows[i][col].magnitude().total_cmp(&rows[j][col].magnitude()))
        };
        let Some(p) = cand else { continue };
        rows.swap(r, p);
        let inv = rows[r][col].inv();
        for c in rows[r].iter_mut() {
            *c = c.clone() * &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (c, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *c = c.clone() - f.clone() * pv;
                }
            }
            row[col] = F::zero();
        }
        pivots.push(col);
        r += 1;
    }
    for row in &rows[r..] {
        if !negligible(&row[ncols]) {
            return None;
        }
    }
    let mut particular = vec![F::zero(); ncols];
    for (i, &pc) in pivots.iter().enumerate() {
        particular[pc] = rows[i][ncols].clone();
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    let nullspace = free
        .iter()
        .map(|&fc| {
            let mut v = vec![F::zero(); ncols];
            v[fc] = F::one();
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -rows[i][fc].clone();
            }
            v
        })
        .collect();
    Some(LinearSolution { particular, nullspace, rank: pivots.len() })
}

/// Determinant by cofactor expansion along the first column. Suitable for
/// the small matrices over non-field rings used here.
pub fn det<R: Ring>(m: &[Vec<R>]) -> R {
    let n = m.len();
    match n {
        0 => R::one(),
        1 => m[0][0].clone(),
        _ => {
            let mut acc = R::zero();
            for i in 0..n {
                if m[i][0].is_zero() {
                    continue;
                }
                let minor = minor(m, i, 0);
                let t = m[i][0].clone() * det(&minor);
                acc = if i % 2 == 0 { acc + t } else { acc - t };
            }
            acc
        }
    }
}

/// `m` with row `r` and column `c` removed.
pub fn minor<R: Clone>(m: &[Vec<R>], r: usize, c: usize) -> Vec<Vec<R>> {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != r)
        .map(|(_, row)| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, x)| x.clone()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{rat, Rat};

    #[test]
    fn underdetermined_system() {
        // u0 + u1 = 1, u1 + u2 = 2
        let one = Rat::one();
        let zero = Rat::zero();
        let a = vec![vec![one.clone(), one.clone(), zero.clone()], vec![zero, one.clone(), one]];
        let s = solve(&a, &[Rat::from_i64(1), Rat::from_i64(2)], 3).unwrap();
        assert_eq!(s.rank, 2);
        assert_eq!(s.particular, vec![Rat::from_i64(-1), Rat::from_i64(2), Rat::zero()]);
        assert_eq!(s.nullspace, vec![vec![Rat::one(), -Rat::one(), Rat::one()]]);
    }

    #[test]
    fn inconsistent_system() {
        let a = vec![vec![Rat::one()], vec![rat(2, 1)]];
        assert!(solve(&a, &[Rat::one(), Rat::one()], 1).is_none());
    }

    #[test]
    fn determinant() {
        let m: Vec<Vec<Rat>> = vec![
            vec![rat(2, 1), rat(0, 1), rat(1, 1)],
            vec![rat(1, 1), rat(3, 1), rat(2, 1)],
            vec![rat(1, 1), rat(1, 1), rat(1, 1)],
        ];
        assert_eq!(det(&m), rat(0, 1));
    }
}
