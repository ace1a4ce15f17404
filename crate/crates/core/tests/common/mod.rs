//! Reference implementations used as oracles. None of them share code with
//! the library's kernels.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::HashMap;

use dualgraph::{DualGraph, Twig, VertexId};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Determinant by Laplace expansion along rows, memoised on the set of used
/// columns. Exponential; meant for matrices up to about 16 x 16.
pub fn det_expansion(m: &[Vec<i64>]) -> BigInt {
    let n = m.len();
    assert!(n < 24);
    let mut memo: HashMap<u32, BigInt> = HashMap::new();
    fn go(m: &[Vec<i64>], mask: u32, memo: &mut HashMap<u32, BigInt>) -> BigInt {
        let n = m.len();
        let row = mask.count_ones() as usize;
        if row == n {
            return BigInt::one();
        }
        if let Some(v) = memo.get(&mask) {
            return v.clone();
        }
        let mut total = BigInt::zero();
        let mut position = 0;
        for j in 0..n {
            if mask & (1 << j) != 0 {
                continue;
            }
            if m[row][j] != 0 {
                let minor = go(m, mask | (1 << j), memo);
                let term = minor * m[row][j];
                if position % 2 == 0 {
                    total += term;
                } else {
                    total -= term;
                }
            }
            position += 1;
        }
        memo.insert(mask, total.clone());
        total
    }
    go(m, 0, &mut memo)
}

/// The tridiagonal matrix of a twig: `a_i` on the diagonal, `-1` beside it.
pub fn twig_matrix(t: &Twig) -> Vec<Vec<i64>> {
    let r = t.len();
    let mut m = vec![vec![0; r]; r];
    for (i, &a) in t.weights().iter().enumerate() {
        m[i][i] = a;
        if i + 1 < r {
            m[i][i + 1] = -1;
            m[i + 1][i] = -1;
        }
    }
    m
}

/// `-I(g)` in sorted id order.
pub fn negated_matrix(g: &DualGraph) -> (Vec<VertexId>, Vec<Vec<i64>>) {
    let ids: Vec<VertexId> = g.ids().collect();
    let idx = |v: VertexId| ids.iter().position(|&w| w == v).unwrap();
    let n = ids.len();
    let mut m = vec![vec![0; n]; n];
    for (i, &v) in ids.iter().enumerate() {
        m[i][i] = -g.weight(v).unwrap();
        for w in g.neighbors(v) {
            m[i][idx(w)] = -1;
        }
    }
    (ids, m)
}

/// Positive definiteness of `-I(g)` by checking that every principal minor
/// (not just the leading ones) is positive.
pub fn negdef_by_all_minors(g: &DualGraph) -> bool {
    let (_, m) = negated_matrix(g);
    let n = m.len();
    // A 1 x 1 failure is the common case, so test small subsets first.
    let mut subsets: Vec<u32> = (1..(1u32 << n)).collect();
    subsets.sort_by_key(|s| s.count_ones());
    subsets.into_iter().all(|s| {
        let rows: Vec<usize> = (0..n).filter(|&i| s & (1 << i) != 0).collect();
        let sub: Vec<Vec<i64>> = rows
            .iter()
            .map(|&i| rows.iter().map(|&j| m[i][j]).collect())
            .collect();
        det_expansion(&sub).is_positive()
    })
}

/// Solves `I(g) x = b` by Gauss-Jordan over the rationals, pivoting from
/// the last row upwards.
pub fn solve_reversed(g: &DualGraph, b: &[i64]) -> Option<Vec<BigRational>> {
    let (_, m) = negated_matrix(g);
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            let mut row: Vec<BigRational> =
                m[i].iter().map(|&x| BigRational::from_integer((-x).into())).collect();
            row.push(BigRational::from_integer(b[i].into()));
            row
        })
        .collect();
    for col in (0..n).rev() {
        let pivot = (0..=col).rev().find(|&r| !a[r][col].is_zero())?;
        a.swap(pivot, col);
        let p = a[col][col].clone();
        for x in a[col].iter_mut() {
            *x /= &p;
        }
        let pivot_row: Vec<(usize, BigRational)> = a[col]
            .iter()
            .enumerate()
            .filter(|(_, y)| !y.is_zero())
            .map(|(j, y)| (j, y.clone()))
            .collect();
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for (j, y) in &pivot_row {
                    a[r][*j] -= &f * y;
                }
            }
        }
    }
    Some(a.into_iter().map(|row| row[n].clone()).collect())
}

/// The correction divisor from its defining equations, by [`solve_reversed`].
pub fn dnatural_oracle(d: &DualGraph) -> Vec<(VertexId, BigRational)> {
    let ids: Vec<VertexId> = d.ids().collect();
    let rhs: Vec<i64> = ids.iter().map(|&v| 2 + d.weight(v).unwrap()).collect();
    let x = solve_reversed(d, &rhs).expect("invertible");
    ids.into_iter().zip(x).collect()
}

/// Continued-fraction value `[a_1, ..., a_r] = a_1 - 1/(a_2 - 1/(...))`.
pub fn hj_value(t: &Twig) -> BigRational {
    let mut it = t.weights().iter().rev();
    let mut v = BigRational::from_integer((*it.next().unwrap()).into());
    for &a in it {
        v = BigRational::from_integer(a.into()) - v.recip();
    }
    v
}

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Sylvester's criterion for `-I(g)` on the trailing principal minors,
/// computed by rational symmetric elimination from the last vertex down.
pub fn negdef_by_reversed_elimination(g: &DualGraph) -> bool {
    let (_, m) = negated_matrix(g);
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .map(|row| row.iter().map(|&x| BigRational::from_integer(x.into())).collect())
        .collect();
    for k in (0..a.len()).rev() {
        let p = a[k][k].clone();
        if !p.is_positive() {
            return false;
        }
        for i in 0..k {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &p;
            for j in 0..k {
                let delta = &f * &a[k][j];
                a[i][j] -= delta;
            }
        }
    }
    true
}

/// `(C · D^♮)` by [`dnatural_oracle`].
pub fn pairing_oracle(g: &DualGraph) -> BigRational {
    let c = g.mark().expect("marked");
    let alpha = dnatural_oracle(&g.without_mark());
    g.neighbors(c)
        .map(|v| alpha.iter().find(|(w, _)| *w == v).unwrap().1.clone())
        .fold(BigRational::zero(), |acc, x| acc + x)
}
