//! Exact integer kernels behind determinants, definiteness tests and the
//! canonical solve.
//!
//! Every kernel is written once against [`Ring`] and runs first on `i128`
//! with checked arithmetic; if any intermediate overflows the whole kernel is
//! rerun on [`BigInt`]. Results are always reported as `BigInt`.
//!
//! Two families of kernels live here:
//!
//! * dense fraction-free (Bareiss) elimination, used for arbitrary graphs and
//!   as an independent reference for the forest kernels;
//! * forest elimination in post-order, which is fraction-free Gaussian
//!   elimination along a perfect elimination ordering of a tree. It never
//!   creates fill-in, so it is linear in the number of vertices.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub(crate) trait Ring: Clone + Ord + Sized {
    fn from_i64(v: i64) -> Self;
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Option<Self>;
    fn sub(&self, other: &Self) -> Option<Self>;
    fn mul(&self, other: &Self) -> Option<Self>;
    /// Division the caller knows to be exact.
    fn div_exact(&self, other: &Self) -> Self;
    fn neg(&self) -> Option<Self>;
    fn is_zero(&self) -> bool;
    fn is_positive(&self) -> bool;
    fn into_big(self) -> BigInt;
}

impl Ring for i128 {
    fn from_i64(v: i64) -> Self {
        v as i128
    }
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn add(&self, other: &Self) -> Option<Self> {
        self.checked_add(*other)
    }
    fn sub(&self, other: &Self) -> Option<Self> {
        self.checked_sub(*other)
    }
    fn mul(&self, other: &Self) -> Option<Self> {
        self.checked_mul(*other)
    }
    fn div_exact(&self, other: &Self) -> Self {
        debug_assert_eq!(self % other, 0, "inexact division {self} / {other}");
        self / other
    }
    fn neg(&self) -> Option<Self> {
        self.checked_neg()
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn is_positive(&self) -> bool {
        *self > 0
    }
    fn into_big(self) -> BigInt {
        BigInt::from(self)
    }
}

impl Ring for BigInt {
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn add(&self, other: &Self) -> Option<Self> {
        Some(self + other)
    }
    fn sub(&self, other: &Self) -> Option<Self> {
        Some(self - other)
    }
    fn mul(&self, other: &Self) -> Option<Self> {
        Some(self * other)
    }
    fn div_exact(&self, other: &Self) -> Self {
        let (q, r) = self.div_rem(other);
        debug_assert!(Zero::is_zero(&r), "inexact division {self} / {other}");
        q
    }
    fn neg(&self) -> Option<Self> {
        Some(-self)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn into_big(self) -> BigInt {
        self
    }
}

/// Runs a kernel on `i128`, falling back to `BigInt` when it overflows.
macro_rules! with_fallback {
    ($kernel:ident ( $($arg:expr),* $(,)? )) => {
        match $kernel::<i128>($($arg),*) {
            Some(v) => v.into_wide(),
            None => $kernel::<BigInt>($($arg),*)
                .expect("arbitrary precision arithmetic cannot overflow")
                .into_wide(),
        }
    };
}

/// Converts a kernel result into its `BigInt` form.
pub(crate) trait Widen {
    type Output;
    fn into_wide(self) -> Self::Output;
}

impl<R: Ring> Widen for R {
    type Output = BigInt;
    fn into_wide(self) -> BigInt {
        self.into_big()
    }
}

// ---------------------------------------------------------------------------
// Dense kernels
// ---------------------------------------------------------------------------

fn to_ring<R: Ring>(m: &[Vec<i64>]) -> Vec<Vec<R>> {
    m.iter()
        .map(|row| row.iter().map(|&x| R::from_i64(x)).collect())
        .collect()
}

/// Outcome of a leading-minor scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct MinorScan(pub bool);

impl Widen for MinorScan {
    type Output = bool;
    fn into_wide(self) -> bool {
        self.0
    }
}

fn leading_minors_positive_in<R: Ring>(m: &[Vec<i64>]) -> Option<MinorScan> {
    let n = m.len();
    let mut a = to_ring::<R>(m);
    let mut prev = R::one();
    for k in 0..n {
        // After k Bareiss steps the (k, k) entry is the leading minor of order k + 1.
        if !a[k][k].is_positive() {
            return Some(MinorScan(false));
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = a[i][j].mul(&a[k][k])?.sub(&a[i][k].mul(&a[k][j])?)?;
                a[i][j] = t.div_exact(&prev);
            }
        }
        prev = a[k][k].clone();
    }
    Some(MinorScan(true))
}

/// Sylvester's criterion on a symmetric integer matrix: every leading
/// principal minor is positive.
pub(crate) fn leading_minors_positive(m: &[Vec<i64>]) -> bool {
    with_fallback!(leading_minors_positive_in(m))
}

fn bareiss_forward<R: Ring>(a: &mut [Vec<R>], cols: usize) -> Option<(bool, bool)> {
    // Returns (singular, odd number of row swaps).
    let n = a.len();
    let mut prev = R::one();
    let mut odd = false;
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    odd = !odd;
                }
                None => return Some((true, odd)),
            }
        }
        for i in k + 1..n {
            for j in k + 1..cols {
                let t = a[i][j].mul(&a[k][k])?.sub(&a[i][k].mul(&a[k][j])?)?;
                a[i][j] = t.div_exact(&prev);
            }
            a[i][k] = R::zero();
        }
        prev = a[k][k].clone();
    }
    Some((false, odd))
}

fn determinant_in<R: Ring>(m: &[Vec<i64>]) -> Option<R> {
    let n = m.len();
    if n == 0 {
        return Some(R::one());
    }
    let mut a = to_ring::<R>(m);
    let (singular, odd) = bareiss_forward(&mut a, n)?;
    if singular {
        return Some(R::zero());
    }
    let d = a[n - 1][n - 1].clone();
    if odd {
        d.neg()
    } else {
        Some(d)
    }
}

/// Determinant of a square integer matrix by fraction-free elimination.
pub(crate) fn determinant(m: &[Vec<i64>]) -> BigInt {
    with_fallback!(determinant_in(m))
}

/// Integer solution of `M x = r` written as `x_i = numerators[i] / denominator`.
#[derive(Debug, Clone)]
pub(crate) struct IntegerSolution<R> {
    pub numerators: Vec<R>,
    pub denominator: R,
}

impl<R: Ring> Widen for IntegerSolution<R> {
    type Output = IntegerSolution<BigInt>;
    fn into_wide(self) -> IntegerSolution<BigInt> {
        IntegerSolution {
            numerators: self.numerators.into_iter().map(Ring::into_big).collect(),
            denominator: self.denominator.into_big(),
        }
    }
}

impl<R: Ring> Widen for Option<IntegerSolution<R>> {
    type Output = Option<IntegerSolution<BigInt>>;
    fn into_wide(self) -> Self::Output {
        self.map(Widen::into_wide)
    }
}

fn dense_solve_in<R: Ring>(m: &[Vec<i64>], rhs: &[i64]) -> Option<Option<IntegerSolution<R>>> {
    let n = m.len();
    let mut a: Vec<Vec<R>> = m
        .iter()
        .zip(rhs)
        .map(|(row, &r)| {
            row.iter()
                .chain(std::iter::once(&r))
                .map(|&x| R::from_i64(x))
                .collect()
        })
        .collect();
    if n == 0 {
        return Some(Some(IntegerSolution {
            numerators: Vec::new(),
            denominator: R::one(),
        }));
    }
    let (singular, _) = bareiss_forward(&mut a, n + 1)?;
    if singular {
        return Some(None);
    }
    // The last Bareiss pivot is the determinant up to sign, so every
    // `det * x_i` is an integer and the back substitution divides exactly.
    let det = a[n - 1][n - 1].clone();
    let mut num = vec![R::zero(); n];
    for i in (0..n).rev() {
        let mut acc = det.mul(&a[i][n])?;
        for j in i + 1..n {
            acc = acc.sub(&a[i][j].mul(&num[j])?)?;
        }
        num[i] = acc.div_exact(&a[i][i]);
    }
    Some(Some(IntegerSolution {
        numerators: num,
        denominator: det,
    }))
}

/// Solves `M x = r` by fraction-free elimination with a final exact division.
/// Returns `None` when `M` is singular.
pub(crate) fn dense_solve(m: &[Vec<i64>], rhs: &[i64]) -> Option<IntegerSolution<BigInt>> {
    with_fallback!(dense_solve_in(m, rhs))
}

// ---------------------------------------------------------------------------
// Forest kernels
// ---------------------------------------------------------------------------

/// Adjacency lists packed into one buffer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl Adjacency {
    pub(crate) fn from_lists<I, L>(lists: I) -> Self
    where
        I: IntoIterator<Item = L>,
        L: IntoIterator<Item = usize>,
    {
        let mut offsets = vec![0];
        let mut targets = Vec::new();
        for list in lists {
            targets.extend(list);
            offsets.push(targets.len());
        }
        Adjacency { offsets, targets }
    }

    pub(crate) fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub(crate) fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }
}

impl std::ops::Index<usize> for Adjacency {
    type Output = [usize];
    fn index(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }
}

/// Traversal data for a forest given by adjacency lists over `0..n`.
#[derive(Debug, Clone)]
pub(crate) struct ForestOrder {
    /// Children before parents; components in order of their smallest vertex.
    pub post_order: Vec<usize>,
    pub parent: Vec<Option<usize>>,
    pub children: Adjacency,
    /// Component root of each vertex.
    pub root: Vec<usize>,
    pub roots: Vec<usize>,
}

impl ForestOrder {
    /// Returns `None` if the graph contains a cycle.
    pub(crate) fn new(adj: &Adjacency) -> Option<Self> {
        let n = adj.len();
        let mut parent = vec![None; n];
        let mut child_count = vec![0usize; n];
        let mut root = vec![usize::MAX; n];
        let mut roots = Vec::new();
        let mut post_order = Vec::with_capacity(n);
        let mut stack: Vec<(usize, usize)> = Vec::new();
        for r in 0..n {
            if root[r] != usize::MAX {
                continue;
            }
            roots.push(r);
            root[r] = r;
            stack.push((r, 0));
            while let Some(&mut (v, ref mut next)) = stack.last_mut() {
                if let Some(&w) = adj[v].get(*next) {
                    *next += 1;
                    if Some(w) == parent[v] {
                        continue;
                    }
                    if root[w] != usize::MAX {
                        return None;
                    }
                    root[w] = r;
                    parent[w] = Some(v);
                    child_count[v] += 1;
                    stack.push((w, 0));
                } else {
                    post_order.push(v);
                    stack.pop();
                }
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for &c in &child_count {
            offsets.push(offsets.last().copied().unwrap_or(0) + c);
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0; offsets[n]];
        for (w, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                targets[fill[p]] = w;
                fill[p] += 1;
            }
        }
        let children = Adjacency { offsets, targets };
        Some(Self {
            post_order,
            parent,
            children,
            root,
            roots,
        })
    }
}

/// Subtree determinants of `-I` on a forest.
///
/// `sub_det[v]` is the determinant of the subtree hanging at `v` and
/// `rest_det[v]` the determinant of that subtree with `v` removed, which is
/// the product of the children's `sub_det`.
#[derive(Debug, Clone)]
pub(crate) struct ForestDets<R> {
    pub sub_det: Vec<R>,
    pub rest_det: Vec<R>,
}

impl<R: Ring> Widen for ForestDets<R> {
    type Output = ForestDets<BigInt>;
    fn into_wide(self) -> ForestDets<BigInt> {
        ForestDets {
            sub_det: self.sub_det.into_iter().map(Ring::into_big).collect(),
            rest_det: self.rest_det.into_iter().map(Ring::into_big).collect(),
        }
    }
}

/// Folds the children of a vertex into its row.
///
/// Returns `(rest, tail, qtail)` with `rest = prod_c sub_det[c]` and
/// `tail = sum_c rest_det[c] * prod_{c' != c} sub_det[c']`, so the subtree
/// determinant is `diag[v] * rest - tail`. When `q` is given it is folded
/// the same way into `qtail`.
fn fold_children<R: Ring>(
    kids: &[usize],
    sub_det: &[R],
    rest_det: &[R],
    q: Option<&[R]>,
) -> Option<(R, R, R)> {
    let mut rest = R::one();
    let mut tail = R::zero();
    let mut qtail = R::zero();
    for &c in kids {
        tail = tail.mul(&sub_det[c])?.add(&rest_det[c].mul(&rest)?)?;
        if let Some(q) = q {
            qtail = qtail.mul(&sub_det[c])?.add(&q[c].mul(&rest)?)?;
        }
        rest = rest.mul(&sub_det[c])?;
    }
    Some((rest, tail, qtail))
}

fn forest_dets_in<R: Ring>(diag: &[i64], order: &ForestOrder) -> Option<ForestDets<R>> {
    let n = diag.len();
    let mut sub_det = vec![R::zero(); n];
    let mut rest_det = vec![R::one(); n];
    for &v in &order.post_order {
        let (rest, tail, _) = fold_children(&order.children[v], &sub_det, &rest_det, None)?;
        sub_det[v] = R::from_i64(diag[v]).mul(&rest)?.sub(&tail)?;
        rest_det[v] = rest;
    }
    Some(ForestDets { sub_det, rest_det })
}

fn forest_determinant_in<R: Ring>(diag: &[i64], order: &ForestOrder) -> Option<R> {
    let dets = forest_dets_in::<R>(diag, order)?;
    let mut d = R::one();
    for &r in &order.roots {
        d = d.mul(&dets.sub_det[r])?;
    }
    Some(d)
}

pub(crate) fn forest_determinant(diag: &[i64], order: &ForestOrder) -> BigInt {
    with_fallback!(forest_determinant_in(diag, order))
}

fn forest_positive_definite_in<R: Ring>(diag: &[i64], order: &ForestOrder) -> Option<MinorScan> {
    // In post-order the leading minors are products of current subtree
    // determinants, so they are all positive iff every sub_det is.
    let n = diag.len();
    let mut sub_det = vec![R::zero(); n];
    let mut rest_det = vec![R::one(); n];
    for &v in &order.post_order {
        let (rest, tail, _) = fold_children(&order.children[v], &sub_det, &rest_det, None)?;
        let d = R::from_i64(diag[v]).mul(&rest)?.sub(&tail)?;
        if !d.is_positive() {
            return Some(MinorScan(false));
        }
        sub_det[v] = d;
        rest_det[v] = rest;
    }
    Some(MinorScan(true))
}

pub(crate) fn forest_positive_definite(diag: &[i64], order: &ForestOrder) -> bool {
    with_fallback!(forest_positive_definite_in(diag, order))
}

/// Per-vertex solution of a forest system: `x_v = numerators[v] / denominators[v]`,
/// where the denominator is the determinant of the component containing `v`.
#[derive(Debug, Clone)]
pub(crate) struct ForestSolution<R> {
    pub numerators: Vec<R>,
    pub denominators: Vec<R>,
}

impl<R: Ring> Widen for ForestSolution<R> {
    type Output = ForestSolution<BigInt>;
    fn into_wide(self) -> ForestSolution<BigInt> {
        ForestSolution {
            numerators: self.numerators.into_iter().map(Ring::into_big).collect(),
            denominators: self.denominators.into_iter().map(Ring::into_big).collect(),
        }
    }
}

impl<R: Ring> Widen for Option<ForestSolution<R>> {
    type Output = Option<ForestSolution<BigInt>>;
    fn into_wide(self) -> Self::Output {
        self.map(Widen::into_wide)
    }
}

fn forest_solve_in<R: Ring>(
    diag: &[i64],
    rhs: &[i64],
    order: &ForestOrder,
) -> Option<Option<ForestSolution<R>>> {
    let n = diag.len();
    let mut sub_det = vec![R::zero(); n];
    let mut rest_det = vec![R::one(); n];
    // q[v]: right-hand side of row v once its subtree is eliminated, scaled by rest_det[v].
    let mut q = vec![R::zero(); n];
    for &v in &order.post_order {
        let (rest, tail, qtail) =
            fold_children(&order.children[v], &sub_det, &rest_det, Some(&q))?;
        let d = R::from_i64(diag[v]).mul(&rest)?.sub(&tail)?;
        if d.is_zero() {
            return Some(None);
        }
        q[v] = R::from_i64(rhs[v]).mul(&rest)?.add(&qtail)?;
        sub_det[v] = d;
        rest_det[v] = rest;
    }
    let mut num = vec![R::zero(); n];
    let mut den = vec![R::zero(); n];
    // Reverse post-order visits parents before children. By Cramer's rule
    // `num[v]` is an integer, so the division below is exact.
    for &v in order.post_order.iter().rev() {
        let r = order.root[v];
        den[v] = sub_det[r].clone();
        num[v] = match order.parent[v] {
            None => q[v].clone(),
            Some(p) => q[v]
                .mul(&sub_det[r])?
                .add(&rest_det[v].mul(&num[p])?)?
                .div_exact(&sub_det[v]),
        };
    }
    Some(Some(ForestSolution {
        numerators: num,
        denominators: den,
    }))
}

/// Solves `M x = r` where `M` has diagonal `diag` and `-1` on forest edges.
/// Returns `None` if some elimination pivot vanishes.
pub(crate) fn forest_solve(
    diag: &[i64],
    rhs: &[i64],
    order: &ForestOrder,
) -> Option<ForestSolution<BigInt>> {
    with_fallback!(forest_solve_in(diag, rhs, order))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_adj(n: usize) -> Adjacency {
        Adjacency::from_lists((0..n).map(|i| {
                let mut v = Vec::new();
                if i > 0 {
                    v.push(i - 1);
                }
                if i + 1 < n {
                    v.push(i + 1);
                }
                v
            }))
    }

    fn dense_from(diag: &[i64], adj: &Adjacency) -> Vec<Vec<i64>> {
        let n = diag.len();
        let mut m = vec![vec![0; n]; n];
        for i in 0..n {
            m[i][i] = diag[i];
            for &j in &adj[i] {
                m[i][j] = -1;
            }
        }
        m
    }

    #[test]
    fn determinant_small() {
        assert_eq!(determinant(&[]), BigInt::from(1));
        assert_eq!(determinant(&[vec![2, -1], vec![-1, 3]]), BigInt::from(5));
        // Zero leading entry forces a row swap.
        assert_eq!(determinant(&[vec![0, 1], vec![1, -2]]), BigInt::from(-1));
        assert_eq!(determinant(&[vec![1, 2], vec![2, 4]]), BigInt::from(0));
    }

    #[test]
    fn sylvester_small() {
        assert!(leading_minors_positive(&[vec![2, -1], vec![-1, 2]]));
        assert!(!leading_minors_positive(&[vec![0]]));
        assert!(!leading_minors_positive(&[vec![1, -1], vec![-1, 1]]));
    }

    #[test]
    fn forest_matches_dense_on_paths() {
        let diag = [2, 3, 1, 5, 2, 2];
        let adj = path_adj(diag.len());
        let order = ForestOrder::new(&adj).unwrap();
        assert_eq!(
            forest_determinant(&diag, &order),
            determinant(&dense_from(&diag, &adj))
        );
    }

    #[test]
    fn forest_order_rejects_cycles() {
        let adj = Adjacency::from_lists(vec![vec![1, 2], vec![0, 2], vec![0, 1]]);
        assert!(ForestOrder::new(&adj).is_none());
    }

    #[test]
    fn forest_solve_matches_dense() {
        // Star with centre 0 and arms of length 1, 2, 1.
        let adj = Adjacency::from_lists(vec![vec![1, 2, 4], vec![0], vec![0, 3], vec![2], vec![0]]);
        let diag = [2, 3, 2, 4, 2];
        let rhs = [0, 1, 0, 2, 0];
        let order = ForestOrder::new(&adj).unwrap();
        let f = forest_solve(&diag, &rhs, &order).unwrap();
        let d = dense_solve(&dense_from(&diag, &adj), &rhs).unwrap();
        for i in 0..diag.len() {
            assert_eq!(
                &f.numerators[i] * &d.denominator,
                &d.numerators[i] * &f.denominators[i]
            );
        }
    }

    #[test]
    fn i128_overflow_falls_back() {
        // A long chain of huge weights overflows i128 quickly.
        let diag = vec![1_000_000_000_000i64; 12];
        let adj = path_adj(diag.len());
        let order = ForestOrder::new(&adj).unwrap();
        let f = forest_determinant(&diag, &order);
        let d = determinant(&dense_from(&diag, &adj));
        assert_eq!(f, d);
        assert!(f > BigInt::from(i128::MAX));
    }
}
