//! The seven boundary configurations `(1)`-`(7)`, the Figure 1 graph, and
//! the closed-form numerical type of `K_X` for each of them.
//!
//! Layout of the star-shaped configurations, read outwards from the branch
//! vertex `z`:
//!
//! * the `A*` arm starts with `a*_1`;
//! * the `A` arm runs `a_r, ..., a_1` and ends in a `(-n)`-curve;
//! * the third arm carries `C`. For (3) it is `ℓ` (-2)-curves then `C` as a
//!   leaf, for (4) `ℓ` (-2)-curves, `b_1..b_s`, `C`, then `underline(B*)`.
//!   In (5) the `b` run ends at `Y = (-(m+2))`, which carries both
//!   `underline(B*)` and `C`, and `C` carries `m` further (-2)-curves.
//!
//! In (6) and (7) the branch vertex itself is `(-b_1)` and the third arm
//! starts at `b_2`. Configuration (2) is the chain `(-n), A, C, A*`.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canonical::KType;
use crate::graph::{DualGraph, VertexId};
use crate::twig::Twig;

/// Largest graph the constructors will build.
pub const MAX_VERTICES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("invalid family parameters: {0}")]
    InvalidFamilyParams(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, FamilyError> {
    Err(FamilyError::InvalidFamilyParams(msg.into()))
}

/// Parameters of one configuration. Serialized as e.g.
/// `{"family":3,"A":[2],"n":3,"l":7}`; absent parameters are omitted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyInstance {
    pub family: u8,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Twig>,
    pub n: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Twig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<i64>,
}

impl FamilyInstance {
    pub fn one(n: i64) -> Self {
        Self::raw(1, None, n, None, None, None)
    }

    pub fn two(a: Twig, n: i64) -> Self {
        Self::raw(2, Some(a), n, None, None, None)
    }

    pub fn three(a: Twig, n: i64, l: i64) -> Self {
        Self::raw(3, Some(a), n, Some(l), None, None)
    }

    pub fn four(a: Twig, n: i64, l: i64, b: Twig) -> Self {
        Self::raw(4, Some(a), n, Some(l), Some(b), None)
    }

    pub fn five(a: Twig, n: i64, l: i64, b: Twig, m: i64) -> Self {
        Self::raw(5, Some(a), n, Some(l), Some(b), Some(m))
    }

    pub fn six(a: Twig, n: i64, b: Twig) -> Self {
        Self::raw(6, Some(a), n, None, Some(b), None)
    }

    pub fn seven(a: Twig, n: i64, b: Twig, m: i64) -> Self {
        Self::raw(7, Some(a), n, None, Some(b), Some(m))
    }

    fn raw(
        family: u8,
        a: Option<Twig>,
        n: i64,
        l: Option<i64>,
        b: Option<Twig>,
        m: Option<i64>,
    ) -> Self {
        FamilyInstance {
            family,
            a,
            n,
            l,
            b,
            m,
        }
    }

    /// `s`, the length of `b`, where present.
    pub fn s(&self) -> Option<usize> {
        self.b.as_ref().map(Twig::len)
    }

    /// Checks which parameters are present and every inequality except the
    /// upper bound on `ℓ`.
    fn validate_shape(&self) -> Result<(), FamilyError> {
        let f = self.family;
        if !(1..=7).contains(&f) {
            return invalid(format!("family must be 1..7, got {f}"));
        }
        let needs_a = f >= 2;
        let needs_l = matches!(f, 3..=5);
        let needs_b = f >= 4;
        let needs_m = matches!(f, 5 | 7);
        for (name, present, needed) in [
            ("A", self.a.is_some(), needs_a),
            ("l", self.l.is_some(), needs_l),
            ("b", self.b.is_some(), needs_b),
            ("m", self.m.is_some(), needs_m),
        ] {
            if present && !needed {
                return invalid(format!("family {f} takes no parameter {name}"));
            }
            if needed && !present {
                return invalid(format!("family {f} requires parameter {name}"));
            }
        }
        if self.n < 2 {
            return invalid(format!("n >= 2 violated (n = {})", self.n));
        }
        if let Some(a) = &self.a {
            if a.is_empty() || !a.is_admissible() {
                return invalid(format!("A = {a} must be a non-empty admissible twig"));
            }
        }
        if let Some(b) = &self.b {
            if b.is_empty() || !b.is_admissible() || b.first().unwrap_or(0) < 3 {
                return invalid(format!(
                    "b = {b} must be a non-empty admissible twig with b_1 >= 3"
                ));
            }
        }
        if let Some(m) = self.m {
            if m < 0 {
                return invalid(format!("m >= 0 violated (m = {m})"));
            }
        }
        if let Some(l) = self.l {
            if l < 0 {
                return invalid(format!("l >= 0 violated (l = {l})"));
            }
        }
        Ok(())
    }

    /// All constraints of the configuration list, including
    /// `ℓ <= d(A)(n d(A) - d(overline A)) - 2`.
    pub fn validate(&self) -> Result<(), FamilyError> {
        self.validate_shape()?;
        if let (Some(a), Some(l)) = (&self.a, self.l) {
            let bound = bound(a, self.n);
            if BigInt::from(l) > bound {
                return invalid(format!(
                    "l <= d(A)(n d(A) - d(overline A)) - 2 = {bound} violated (l = {l})"
                ));
            }
        }
        Ok(())
    }
}

impl std::fmt::Display for FamilyInstance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&serde_json::to_string(self).map_err(|_| std::fmt::Error)?)
    }
}

/// `d(A)(n d(A) - d(overline A)) - 2`, the largest admissible `ℓ`.
pub fn bound(a: &Twig, n: i64) -> BigInt {
    let d = a.determinant();
    &d * (BigInt::from(n) * &d - a.overline().determinant()) - 2
}

/// `(n+1) d(A) - d(overline A)`, the value of `ℓ` where (3) is trivial.
pub fn threshold(a: &Twig, n: i64) -> BigInt {
    BigInt::from(n + 1) * a.determinant() - a.overline().determinant()
}

/// Incremental construction with consecutive ids starting at 1.
struct Builder {
    weights: Vec<i64>,
    edges: Vec<(VertexId, VertexId)>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            weights: Vec::new(),
            edges: Vec::new(),
        }
    }

    fn vertex(&mut self, weight: i64) -> VertexId {
        self.weights.push(weight);
        VertexId::try_from(self.weights.len()).expect("size is capped")
    }

    fn edge(&mut self, u: VertexId, v: VertexId) {
        self.edges.push((u, v));
    }

    /// Appends a path of curves with the given *signed* weights, hanging
    /// its first vertex off `from`. Returns the last vertex, or `from` if
    /// the path is empty.
    fn path(&mut self, from: VertexId, weights: impl IntoIterator<Item = i64>) -> VertexId {
        let mut last = from;
        for w in weights {
            let v = self.vertex(w);
            self.edge(last, v);
            last = v;
        }
        last
    }

    /// Twig `t` as a path from `from`, first entry adjacent to `from`.
    fn twig(&mut self, from: VertexId, t: &Twig) -> VertexId {
        self.path(from, t.weights().iter().map(|a| -a))
    }

    /// The arm `a_r, ..., a_1, (-n)` hanging off `from`.
    fn a_arm(&mut self, from: VertexId, a: &Twig, n: i64) {
        let last = self.twig(from, &a.transposal());
        self.path(last, [-n]);
    }

    fn finish(self, c: VertexId) -> DualGraph {
        let mut g = DualGraph::from_consecutive(&self.weights, &self.edges)
            .expect("builders emit simple graphs");
        g.set_mark(c).expect("single mark");
        g
    }
}

fn adjoint(t: &Twig) -> Twig {
    t.adjoint().expect("validated twig is admissible")
}

/// Vertex count of the configuration, as a guard against huge builds.
fn planned_size(spec: &FamilyInstance) -> Option<usize> {
    let len = |t: &Option<Twig>| t.as_ref().map_or(0, Twig::len);
    let adj_len = |t: &Option<Twig>| {
        t.as_ref().map_or(Some(0), |t| {
            t.weights()
                .iter()
                .try_fold(1usize, |acc, &a| acc.checked_add(usize::try_from(a - 2).ok()?))
        })
    };
    let l = usize::try_from(spec.l.unwrap_or(0)).ok()?;
    let m = usize::try_from(spec.m.unwrap_or(0)).ok()?;
    let total = 2usize
        .checked_add(2 * len(&spec.a))?
        .checked_add(adj_len(&spec.a)?)?
        .checked_add(l)?
        .checked_add(len(&spec.b))?
        .checked_add(adj_len(&spec.b)?)?
        .checked_add(m)?
        .checked_add(2)?;
    Some(total)
}

/// Builds the configuration, checking every parameter constraint.
pub fn build_family(spec: &FamilyInstance) -> Result<DualGraph, FamilyError> {
    spec.validate()?;
    build_family_unbounded(spec)
}

/// Builds the configuration without the upper bound on `ℓ`, so that graphs
/// just past the contractibility threshold can be examined.
pub fn build_family_unbounded(spec: &FamilyInstance) -> Result<DualGraph, FamilyError> {
    spec.validate_shape()?;
    match planned_size(spec) {
        Some(size) if size <= MAX_VERTICES => {}
        _ => return invalid(format!("instance exceeds {MAX_VERTICES} vertices")),
    }
    let n = spec.n;
    let mut bld = Builder::new();
    let c_weight = if spec.family == 1 { 0 } else { -1 };
    let c = bld.vertex(c_weight);
    if spec.family == 1 {
        bld.path(c, [-n]);
        return Ok(bld.finish(c));
    }
    let a = spec.a.as_ref().expect("validated");
    let a_star = adjoint(a);
    let l = spec.l.unwrap_or(0);
    let m = spec.m.unwrap_or(0);
    let b_tail = spec.b.as_ref().map(|b| adjoint(b).underline());

    match spec.family {
        2 => {
            bld.twig(c, &a_star);
            bld.a_arm(c, a, n);
        }
        3..=5 => {
            let z = bld.vertex(-2);
            bld.twig(z, &a_star);
            bld.a_arm(z, a, n);
            let mut last = bld.path(z, (0..l).map(|_| -2));
            if let Some(b) = &spec.b {
                last = bld.twig(last, b);
            }
            attach_c_end(&mut bld, spec.family == 5, c, last, b_tail.as_ref(), m);
        }
        6 | 7 => {
            let b = spec.b.as_ref().expect("validated");
            let z = bld.vertex(-b.weights()[0]);
            bld.twig(z, &a_star);
            bld.a_arm(z, a, n);
            let last = bld.twig(z, &b.overline());
            attach_c_end(&mut bld, spec.family == 7, c, last, b_tail.as_ref(), m);
        }
        _ => unreachable!("validated family id"),
    }
    Ok(bld.finish(c))
}

/// The end of the `C` arm after the run ending at `last`. Without `Y` this is
/// `C` followed by `underline(B*)` (if any); with `Y` it is `Y = (-(m+2))`
/// carrying `underline(B*)` and `C`, and `C` carrying `m` (-2)-curves.
fn attach_c_end(
    bld: &mut Builder,
    with_y: bool,
    c: VertexId,
    last: VertexId,
    b_tail: Option<&Twig>,
    m: i64,
) {
    if with_y {
        let y = bld.path(last, [-(m + 2)]);
        bld.twig(y, b_tail.expect("b present"));
        bld.edge(y, c);
        bld.path(c, (0..m).map(|_| -2));
    } else {
        bld.edge(last, c);
        if let Some(t) = b_tail {
            bld.twig(c, t);
        }
    }
}

/// Parameters of the Figure 1 graph as a configuration: family (3) with
/// `ℓ = T` when `m = 0`, family (4) with `ℓ = T - 1`, `b = [m+2]` otherwise,
/// where `T = (n+1) d(A) - d(overline A)`.
pub fn figure1_spec(a: &Twig, m: i64, n: i64) -> Result<FamilyInstance, FamilyError> {
    check_figure1(a, m, n)?;
    let t = i64::try_from(threshold(a, n))
        .or_else(|_| invalid("threshold does not fit in 64 bits"))?;
    Ok(if m == 0 {
        FamilyInstance::three(a.clone(), n, t)
    } else {
        FamilyInstance::four(a.clone(), n, t - 1, Twig::new(vec![m + 2]))
    })
}

fn check_figure1(a: &Twig, m: i64, n: i64) -> Result<(), FamilyError> {
    if a.is_empty() || !a.is_admissible() {
        return invalid(format!("A = {a} must be a non-empty admissible twig"));
    }
    if m < 0 {
        return invalid(format!("m >= 0 violated (m = {m})"));
    }
    if n < 2 {
        return invalid(format!("n >= 2 violated (n = {n})"));
    }
    if a.weights() == [2] && m == 0 && n == 2 {
        return invalid("A != [2] or (m, n) != (0, 2) violated");
    }
    Ok(())
}

/// The Figure 1 graph, assembled directly: centre (-2) with arms `A*`,
/// `(T-1)` (-2)-curves then `(-(m+2))` then `C` with `m` (-2)-curves, and
/// `A` followed by `(-n)`.
pub fn figure1_graph(a: &Twig, m: i64, n: i64) -> Result<DualGraph, FamilyError> {
    check_figure1(a, m, n)?;
    let t = threshold(a, n);
    let run = usize::try_from(&t - 1).or_else(|_| invalid("threshold too large"))?;
    let m_len = usize::try_from(m).or_else(|_| invalid("m too large"))?;
    if run.saturating_add(m_len) > MAX_VERTICES {
        return invalid(format!("instance exceeds {MAX_VERTICES} vertices"));
    }
    let mut bld = Builder::new();
    let z = bld.vertex(-2);
    bld.twig(z, &adjoint(a));
    bld.a_arm(z, a, n);
    let last = bld.path(z, std::iter::repeat_n(-2, run));
    let y = bld.path(last, [-(m + 2)]);
    let c = bld.vertex(-1);
    bld.edge(y, c);
    bld.path(c, std::iter::repeat_n(-2, m_len));
    Ok(bld.finish(c))
}

/// The numerical type of `K_X` read off the parameters.
pub fn predicted_k_type(spec: &FamilyInstance) -> Result<KType, FamilyError> {
    spec.validate()?;
    let by_cmp = |ord: Ordering, at_equality: KType| match ord {
        Ordering::Less => KType::AntiCanonicalAmple,
        Ordering::Equal => at_equality,
        Ordering::Greater => KType::CanonicalAmple,
    };
    Ok(match spec.family {
        1 | 2 | 6 | 7 => KType::AntiCanonicalAmple,
        f => {
            let a = spec.a.as_ref().expect("validated");
            let l = BigInt::from(spec.l.expect("validated"));
            let t = threshold(a, spec.n);
            match f {
                3 => by_cmp(l.cmp(&t), KType::NumericallyTrivial),
                4 => {
                    let at = if spec.s() == Some(1) {
                        KType::NumericallyTrivial
                    } else {
                        KType::CanonicalAmple
                    };
                    by_cmp(l.cmp(&(t - 1)), at)
                }
                _ => by_cmp(l.cmp(&(t - 1)), KType::CanonicalAmple),
            }
        }
    })
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

/// How far a graph got through the classifier, in increasing order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Shape,
    Admissibility,
    AdjointMismatch,
    ParameterRange,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Error)]
#[error("not in the list ({stage:?}): {message}")]
pub struct NotInList {
    pub stage: Stage,
    pub message: String,
}

fn reject<T>(stage: Stage, message: impl Into<String>) -> Result<T, NotInList> {
    Err(NotInList {
        stage,
        message: message.into(),
    })
}

/// A successful classification. `all` lists every matching parameter set,
/// sorted; `primary` is the first of them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FamilyMatch {
    pub primary: FamilyInstance,
    pub all: Vec<FamilyInstance>,
}

/// The twig read along `path`, i.e. the negated weights.
fn twig_of(g: &DualGraph, path: &[VertexId]) -> Twig {
    Twig::new(path.iter().map(|&v| -g.weight(v).expect("vertex")).collect::<Vec<_>>())
}

/// Walks from `start` (a neighbour of `from`) away from `from` through
/// degree-2 vertices, stopping at a leaf, at a vertex of degree >= 3, or at
/// `stop`. The returned path includes `start` and the stopping vertex.
fn walk(g: &DualGraph, from: VertexId, start: VertexId, stop: &BTreeSet<VertexId>) -> Vec<VertexId> {
    let mut path = vec![start];
    let (mut prev, mut cur) = (from, start);
    while g.degree(cur) == 2 && !stop.contains(&cur) {
        let next = g.neighbors(cur).find(|&w| w != prev).expect("degree 2");
        path.push(next);
        prev = cur;
        cur = next;
    }
    path
}

/// Checks `A*` and `A, (-n)` arms in one orientation.
fn match_a_arms(
    g: &DualGraph,
    star_arm: &[VertexId],
    a_arm: &[VertexId],
) -> Result<(Twig, i64), NotInList> {
    if a_arm.len() < 2 {
        return reject(Stage::Shape, "the A arm needs A and a (-n)-curve");
    }
    let (a_rev, tip) = a_arm.split_at(a_arm.len() - 1);
    let a = twig_of(g, a_rev).transposal();
    if !a.is_admissible() {
        return reject(Stage::Admissibility, format!("A = {a} is not admissible"));
    }
    let star = twig_of(g, star_arm);
    let expected = adjoint(&a);
    if star != expected {
        return reject(
            Stage::AdjointMismatch,
            format!("arm {star} is not the adjoint {expected} of A = {a}"),
        );
    }
    let n = -g.weight(tip[0]).expect("vertex");
    Ok((a, n))
}

/// Tries both assignments of the two non-`C` arms to `A*` and `A`.
fn match_a_arms_either(
    g: &DualGraph,
    x: &[VertexId],
    y: &[VertexId],
) -> Vec<Result<(Twig, i64), NotInList>> {
    vec![match_a_arms(g, x, y), match_a_arms(g, y, x)]
}

fn check_b(b: &Twig) -> Result<(), NotInList> {
    if b.is_empty() {
        return reject(Stage::Shape, "missing b run");
    }
    if !b.is_admissible() || b.weights()[0] < 3 {
        return reject(
            Stage::Admissibility,
            format!("b = {b} must be admissible with b_1 >= 3"),
        );
    }
    Ok(())
}

fn check_tail(b: &Twig, tail: &Twig) -> Result<(), NotInList> {
    let expected = adjoint(b).underline();
    if *tail != expected {
        return reject(
            Stage::AdjointMismatch,
            format!("arm {tail} is not underline(B*) = {expected} for b = {b}"),
        );
    }
    Ok(())
}

/// Final range checks and a rebuild as a guard against parser slips.
fn finish_candidate(g: &DualGraph, spec: FamilyInstance) -> Result<FamilyInstance, NotInList> {
    if let Err(FamilyError::InvalidFamilyParams(msg)) = spec.validate() {
        return reject(Stage::ParameterRange, msg);
    }
    let rebuilt = build_family(&spec).expect("validated");
    if g.is_isomorphic(&rebuilt) != Some(true) {
        return reject(Stage::Shape, format!("graph differs from the configuration of {spec}"));
    }
    Ok(spec)
}

/// Decides whether `g` is one of the configurations `(1)`-`(7)`.
///
/// On failure the reason comes from the candidate parse that got furthest.
pub fn classify_family(g: &DualGraph) -> Result<FamilyMatch, NotInList> {
    let mut found: Vec<FamilyInstance> = Vec::new();
    let mut best: Option<NotInList> = None;
    for cand in candidates(g) {
        match cand {
            Ok(spec) => found.push(spec),
            Err(e) => {
                if best.as_ref().is_none_or(|b| e.stage > b.stage) {
                    best = Some(e);
                }
            }
        }
    }
    found.sort();
    found.dedup();
    match found.first() {
        Some(primary) => Ok(FamilyMatch {
            primary: primary.clone(),
            all: found,
        }),
        None => Err(best.unwrap_or(NotInList {
            stage: Stage::Shape,
            message: "no configuration applies".into(),
        })),
    }
}

fn candidates(g: &DualGraph) -> Vec<Result<FamilyInstance, NotInList>> {
    let Some(c) = g.mark() else {
        return vec![reject(Stage::Shape, "no marked curve C")];
    };
    if !g.is_tree() {
        return vec![reject(Stage::Shape, "the graph is not a tree")];
    }
    let cw = g.weight(c).expect("vertex");
    if cw == 0 {
        return vec![parse_one(g, c)];
    }
    if cw != -1 {
        return vec![reject(Stage::Shape, format!("C has weight {cw}, expected 0 or -1"))];
    }
    let branches: Vec<VertexId> = g.ids().filter(|&v| g.degree(v) >= 3).collect();
    match branches[..] {
        [] => parse_two(g, c),
        [z] => parse_one_branch(g, c, z),
        [u, v] => {
            let (z, y) = if g.has_edge(c, v) { (u, v) } else { (v, u) };
            parse_two_branches(g, c, z, y)
        }
        _ => vec![reject(Stage::Shape, "more than two branch vertices")],
    }
}

fn parse_one(g: &DualGraph, c: VertexId) -> Result<FamilyInstance, NotInList> {
    if g.vertex_count() != 2 {
        return reject(Stage::Shape, "C(0) must have exactly one neighbour and nothing else");
    }
    let v = g.neighbors(c).next().expect("tree on two vertices");
    finish_candidate(g, FamilyInstance::one(-g.weight(v).expect("vertex")))
}

fn parse_two(g: &DualGraph, c: VertexId) -> Vec<Result<FamilyInstance, NotInList>> {
    let nbrs: Vec<VertexId> = g.neighbors(c).collect();
    let [x, y] = nbrs[..] else {
        return vec![reject(Stage::Shape, "in a chain, C must be an interior vertex")];
    };
    let none = BTreeSet::new();
    let (px, py) = (walk(g, c, x, &none), walk(g, c, y, &none));
    match_a_arms_either(g, &px, &py)
        .into_iter()
        .map(|r| r.and_then(|(a, n)| finish_candidate(g, FamilyInstance::two(a, n))))
        .collect()
}

/// The two arms at `z` that do not lead to `target`, plus the path towards it
/// (excluding `z`, ending at `target`).
fn split_arms(
    g: &DualGraph,
    z: VertexId,
    target: VertexId,
    stop: &BTreeSet<VertexId>,
) -> Result<[Vec<VertexId>; 3], NotInList> {
    if g.degree(z) != 3 {
        return reject(Stage::Shape, format!("branch vertex {z} must have degree 3"));
    }
    let mut towards = None;
    let mut others = Vec::new();
    for w in g.neighbors(z) {
        let p = walk(g, z, w, stop);
        if p.last() == Some(&target) {
            towards = Some(p);
        } else {
            others.push(p);
        }
    }
    match (towards, &others[..]) {
        (Some(t), [x, y]) => Ok([x.clone(), y.clone(), t]),
        _ => reject(Stage::Shape, "C is not at the end of an arm of the branch vertex"),
    }
}

fn parse_one_branch(g: &DualGraph, c: VertexId, z: VertexId) -> Vec<Result<FamilyInstance, NotInList>> {
    // Walk towards C; past it the arm continues as underline(B*).
    let stop = BTreeSet::from([c]);
    let [x, y, to_c] = match split_arms(g, z, c, &stop) {
        Ok(v) => v,
        Err(e) => return vec![Err(e)],
    };
    let run = twig_of(g, &to_c[..to_c.len() - 1]);
    let before_c = if to_c.len() >= 2 { to_c[to_c.len() - 2] } else { z };
    let tail = match g.neighbors(c).find(|&w| w != before_c) {
        Some(t) => twig_of(g, &walk(g, c, t, &BTreeSet::new())),
        None => Twig::empty(),
    };
    let zw = -g.weight(z).expect("vertex");
    let run_part = |spec_of: &dyn Fn(Twig, i64) -> Result<FamilyInstance, NotInList>| {
        match_a_arms_either(g, &x, &y)
            .into_iter()
            .map(|r| r.and_then(|(a, n)| spec_of(a, n)).and_then(|s| finish_candidate(g, s)))
            .collect::<Vec<_>>()
    };
    if zw == 2 {
        let l = run.weights().iter().take_while(|&&w| w == 2).count();
        let b = Twig::new(run.weights()[l..].to_vec());
        let l = l as i64;
        if tail.is_empty() {
            if !b.is_empty() {
                return vec![reject(Stage::Shape, "C is a leaf but the arm is not all (-2)-curves")];
            }
            run_part(&|a, n| Ok(FamilyInstance::three(a, n, l)))
        } else {
            run_part(&|a, n| {
                check_b(&b)?;
                check_tail(&b, &tail)?;
                Ok(FamilyInstance::four(a, n, l, b.clone()))
            })
        }
    } else {
        let mut bw = vec![zw];
        bw.extend_from_slice(run.weights());
        let b = Twig::new(bw);
        run_part(&|a, n| {
            check_b(&b)?;
            if tail.is_empty() {
                return reject(Stage::Shape, "missing underline(B*) arm after C");
            }
            check_tail(&b, &tail)?;
            Ok(FamilyInstance::six(a, n, b.clone()))
        })
    }
}

fn parse_two_branches(
    g: &DualGraph,
    c: VertexId,
    z: VertexId,
    y: VertexId,
) -> Vec<Result<FamilyInstance, NotInList>> {
    if !g.has_edge(c, y) || g.has_edge(c, z) {
        return vec![reject(Stage::Shape, "C must be adjacent to exactly one branch vertex")];
    }
    let [x1, x2, spine] = match split_arms(g, z, y, &BTreeSet::from([y])) {
        Ok(v) => v,
        Err(e) => return vec![Err(e)],
    };
    if g.degree(y) != 3 {
        return vec![reject(Stage::Shape, "the second branch vertex must have degree 3")];
    }
    let before_y = if spine.len() >= 2 { spine[spine.len() - 2] } else { z };
    let Some(t) = g.neighbors(y).find(|&w| w != c && w != before_y) else {
        return vec![reject(Stage::Shape, "missing underline(B*) arm")];
    };
    let tail = twig_of(g, &walk(g, y, t, &BTreeSet::new()));
    let m = -g.weight(y).expect("vertex") - 2;
    let c_chain: Vec<VertexId> = match g.neighbors(c).find(|&w| w != y) {
        Some(w) => walk(g, c, w, &BTreeSet::new()),
        None => Vec::new(),
    };
    if m < 0 {
        return vec![reject(Stage::ParameterRange, format!("m >= 0 violated (m = {m})"))];
    }
    if c_chain.len() as i64 != m || c_chain.iter().any(|&v| g.weight(v) != Some(-2)) {
        return vec![reject(
            Stage::Shape,
            format!("C must carry exactly m = {m} (-2)-curves"),
        )];
    }
    let run = twig_of(g, &spine[..spine.len() - 1]);
    let zw = -g.weight(z).expect("vertex");
    let (family, l, b) = if zw == 2 {
        let l = run.weights().iter().take_while(|&&w| w == 2).count();
        (5, Some(l as i64), Twig::new(run.weights()[l..].to_vec()))
    } else {
        let mut bw = vec![zw];
        bw.extend_from_slice(run.weights());
        (7, None, Twig::new(bw))
    };
    match_a_arms_either(g, &x1, &x2)
        .into_iter()
        .map(|r| {
            let (a, n) = r?;
            check_b(&b)?;
            check_tail(&b, &tail)?;
            let spec = match l {
                Some(l) => FamilyInstance::five(a, n, l, b.clone(), m),
                None => FamilyInstance::seven(a, n, b.clone(), m),
            };
            debug_assert_eq!(spec.family, family);
            finish_candidate(g, spec)
        })
        .collect()
}
