//! Smith normal form of `tI - T` over `F_q[t]`.
//!
//! Pivots are always a nonzero entry of least degree in the active block, the
//! first such entry in row-major order.

use alloc::vec::Vec;

use crate::linalg::Matrix;
use crate::poly::Poly;

/// Nonunit invariant factors `f_1 | f_2 | ... | f_r` of `tI - T`, monic.
pub(crate) fn invariant_factors(t_op: &Matrix) -> Vec<Poly> {
    let n = t_op.rows();
    let f = t_op.field();
    let x = Poly::t(f);
    let mut m: Vec<Vec<Poly>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let c = Poly::constant(t_op.get(i, j).neg());
                    if i == j {
                        &x + &c
                    } else {
                        c
                    }
                })
                .collect()
        })
        .collect();

    let mut diag = Vec::with_capacity(n);
    for k in 0..n {
        loop {
            let Some((pi, pj)) = min_entry(&m, k) else {
                break;
            };
            m.swap(k, pi);
            for row in m.iter_mut() {
                row.swap(k, pj);
            }
            let mut clean = true;
            let pivot = m[k][k].clone();
            for i in k + 1..n {
                if m[i][k].is_zero() {
                    continue;
                }
                let (q, r) = m[i][k].divmod(&pivot).unwrap();
                for j in k..n {
                    m[i][j] = &m[i][j] - &(&q * &m[k][j]);
                }
                clean &= r.is_zero();
            }
            for j in k + 1..n {
                if m[k][j].is_zero() {
                    continue;
                }
                let (q, r) = m[k][j].divmod(&pivot).unwrap();
                for row in m.iter_mut().skip(k) {
                    row[j] = &row[j] - &(&q * &row[k]);
                }
                clean &= r.is_zero();
            }
            if !clean {
                continue;
            }
            // the pivot must divide the rest of the block
            let bad = (k + 1..n)
                .flat_map(|i| (k + 1..n).map(move |j| (i, j)))
                .find(|&(i, j)| !pivot.divides(&m[i][j]));
            match bad {
                Some((i, _)) => {
                    for j in k..n {
                        m[k][j] = &m[k][j] + &m[i][j];
                    }
                }
                None => break,
            }
        }
        diag.push(m[k][k].monic());
    }
    diag.into_iter().filter(|d| d.degree().unwrap_or(0) > 0).collect()
}

fn min_entry(m: &[Vec<Poly>], k: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, usize)> = None;
    for (i, row) in m.iter().enumerate().skip(k) {
        for (j, e) in row.iter().enumerate().skip(k) {
            if let Some(d) = e.degree() {
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, i, j));
                }
            }
        }
    }
    best.map(|(_, i, j)| (i, j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::{FieldElem, FiniteField};
    use proptest::prelude::*;

    #[test]
    fn diagonal_example() {
        let f = FiniteField::prime(2).unwrap();
        let one = f.one();
        let zero = f.zero();
        let t = Matrix::from_rows(&f, alloc::vec![alloc::vec![one.clone(), zero.clone()], alloc::vec![zero, one]])
            .unwrap();
        let inv = invariant_factors(&t);
        let tp1 = Poly::parse(&f, "t+1").unwrap();
        assert_eq!(inv, alloc::vec![tp1.clone(), tp1]);
    }

    proptest! {
        #[test]
        fn chain_and_product(entries in proptest::collection::vec(0i64..3, 25)) {
            let f = FiniteField::prime(3).unwrap();
            let rows = entries.chunks(5)
                .map(|r| r.iter().map(|&x| FieldElem::from_int(&f, x)).collect())
                .collect();
            let t = Matrix::from_rows(&f, rows).unwrap();
            let inv = invariant_factors(&t);
            for w in inv.windows(2) {
                prop_assert!(w[0].divides(&w[1]));
            }
            let prod = inv.iter().fold(Poly::one(&f), |a, b| &a * b);
            prop_assert_eq!(prod, t.charpoly().unwrap());
            // the largest factor is the minimal polynomial
            let last = inv.last().cloned().unwrap();
            prop_assert_eq!(t.poly_eval(&last).unwrap(), Matrix::zero(&f, 5, 5));
        }
    }
}
