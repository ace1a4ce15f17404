//! Exhaustive checks of the twig identities, the contractibility threshold,
//! the K-type trichotomy, the boundary axioms and the contraction lemmas over
//! bounded parameter ranges.
//!
//! Every suite returns a [`Report`] with per-check counts and a sorted list
//! of failures. Each failure names a replayable subject (a twig, a family
//! spec, a Figure 1 triple or a DGN graph). Instances are checked in
//! parallel and merged, so reports are deterministic.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::canonical::{c_pairing, classify_k_type, solve_dnatural, DNatural, KType};
use crate::families::{
    bound, build_family, build_family_unbounded, classify_family, figure1_graph, figure1_spec,
    predicted_k_type, threshold, FamilyInstance,
};
use crate::graph::{ComponentKind, DualGraph, GraphError, VertexId};
use crate::notation::to_dgn;
use crate::twig::{Twig, TwigError};

/// Parameter ranges the suites enumerate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Budget {
    /// Twigs `A` with `d(A) <= max_det`.
    pub max_det: u64,
    /// ... and length at most `max_len`; also the Fujita suite's length.
    pub max_len: usize,
    pub max_n: i64,
    pub max_m: i64,
    pub max_b_len: usize,
    pub max_b_weight: i64,
    pub fujita_max_weight: i64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_det: 12,
            max_len: 6,
            max_n: 5,
            max_m: 2,
            max_b_len: 2,
            max_b_weight: 4,
            fujita_max_weight: 6,
        }
    }
}

/// What a failure is about, in a form the CLI can replay.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Subject {
    Twig { twig: String },
    Rational { q: String },
    Family { spec: FamilyInstance },
    Figure1 { a: String, m: i64, n: i64 },
    Budget,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Failure {
    pub check: String,
    pub subject: Subject,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Report {
    pub suite: String,
    /// How many times each check ran.
    pub checks: BTreeMap<String, u64>,
    /// Tallies that do not gate the suite.
    pub observations: BTreeMap<String, u64>,
    pub failures: Vec<Failure>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn failures_of(&self, check: &str) -> usize {
        self.failures.iter().filter(|f| f.check == check).count()
    }
}

/// Per-instance accumulator; merging is associative and commutative.
#[derive(Default)]
struct Tally {
    checks: BTreeMap<String, u64>,
    observations: BTreeMap<String, u64>,
    failures: Vec<Failure>,
}

impl Tally {
    fn check(
        &mut self,
        name: &str,
        ok: bool,
        subject: impl FnOnce() -> Subject,
        detail: impl FnOnce() -> String,
    ) -> bool {
        *self.checks.entry(name.to_string()).or_default() += 1;
        if !ok {
            self.failures.push(Failure {
                check: name.to_string(),
                subject: subject(),
                detail: detail(),
            });
        }
        ok
    }

    fn observe(&mut self, name: &str) {
        *self.observations.entry(name.to_string()).or_default() += 1;
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (k, v) in other.checks {
            *self.checks.entry(k).or_default() += v;
        }
        for (k, v) in other.observations {
            *self.observations.entry(k).or_default() += v;
        }
        self.failures.extend(other.failures);
        self
    }

    fn into_report(mut self, suite: &str) -> Report {
        self.failures.sort();
        Report {
            suite: suite.to_string(),
            checks: self.checks,
            observations: self.observations,
            failures: self.failures,
        }
    }
}

fn par_tally<T: Sync>(items: &[T], f: impl Fn(&T, &mut Tally) + Sync) -> Tally {
    items
        .par_iter()
        .fold(Tally::default, |mut t, item| {
            f(item, &mut t);
            t
        })
        .reduce(Tally::default, Tally::merge)
}

/// Replaceable operations, so tests can confirm that the suites catch
/// deliberately broken implementations.
#[derive(Clone, Copy)]
pub struct Hooks<'a> {
    pub adjoint: &'a (dyn Fn(&Twig) -> Result<Twig, TwigError> + Sync),
    pub blow_down: &'a (dyn Fn(&DualGraph, VertexId) -> Result<DualGraph, GraphError> + Sync),
}

impl Default for Hooks<'static> {
    fn default() -> Self {
        Hooks {
            adjoint: &Twig::adjoint,
            blow_down: &DualGraph::blow_down,
        }
    }
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

/// Admissible twigs with length in `1..=max_len` and weights in
/// `2..=max_weight`, in lexicographic order.
pub fn enumerate_admissible_twigs(max_len: usize, max_weight: i64) -> impl Iterator<Item = Twig> {
    let mut cur: Vec<i64> = Vec::new();
    let mut done = max_len == 0 || max_weight < 2;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        if cur.len() < max_len {
            cur.push(2);
        } else {
            while cur.last() == Some(&max_weight) {
                cur.pop();
            }
            match cur.last_mut() {
                Some(last) => *last += 1,
                None => {
                    done = true;
                    return None;
                }
            }
        }
        Some(Twig::new(cur.clone()))
    })
}

/// Admissible twigs with `d(A) <= max_det` and length at most `max_len`, in
/// lexicographic order. Determinants grow along prefixes, which bounds the
/// search.
pub fn twigs_by_det(max_det: u64, max_len: usize) -> Vec<Twig> {
    fn go(prefix: &mut Vec<i64>, max_det: &BigInt, max_len: usize, out: &mut Vec<Twig>) {
        if prefix.len() == max_len {
            return;
        }
        for a in 2.. {
            prefix.push(a);
            let t = Twig::new(prefix.clone());
            let within = t.determinant() <= *max_det;
            if within {
                out.push(t);
                go(prefix, max_det, max_len, out);
            }
            prefix.pop();
            if !within {
                break;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &BigInt::from(max_det), max_len, &mut out);
    out
}

/// The `b` twigs of the budget: admissible, `b_1 >= 3`.
pub fn b_twigs(budget: &Budget) -> Vec<Twig> {
    enumerate_admissible_twigs(budget.max_b_len, budget.max_b_weight)
        .filter(|b| b.weights()[0] >= 3)
        .collect()
}

/// Which values of `ℓ` an enumeration visits: every value up to
/// `bound + past_bound` when `full` holds for the instance, otherwise a
/// window around `0`, `T` and the bound.
type FullSweep = dyn Fn(u8, Option<&Twig>, Option<i64>) -> bool + Sync;

struct EllPolicy<'a> {
    full: &'a FullSweep,
    past_bound: i64,
}

/// Family (3) always, (4) with `b = [3]`, (5) with `b = [3]` and `m = 0`.
fn representative(family: u8, b: Option<&Twig>, m: Option<i64>) -> bool {
    let b = b.map(Twig::weights);
    match family {
        3 => true,
        4 => matches!(b, Some([3])),
        5 => matches!(b, Some([3])) && m == Some(0),
        _ => false,
    }
}

fn family3_only(family: u8, _: Option<&Twig>, _: Option<i64>) -> bool {
    family == 3
}

fn windows_only(_: u8, _: Option<&Twig>, _: Option<i64>) -> bool {
    false
}

fn ell_values(bound: i64, t: i64, full: bool, past: i64) -> Vec<i64> {
    let top = bound + past;
    if full {
        return (0..=top).collect();
    }
    let mut set: BTreeSet<i64> = BTreeSet::new();
    set.extend([0, 1]);
    set.extend(t - 3..=t + 1);
    set.extend(bound - 1..=top);
    set.into_iter().filter(|&l| (0..=top).contains(&l)).collect()
}

fn to_i64(x: &BigInt) -> i64 {
    i64::try_from(x).expect("budget keeps parameters small")
}

fn family_instances(budget: &Budget, families: &[u8], policy: &EllPolicy<'_>) -> Vec<FamilyInstance> {
    let twigs = twigs_by_det(budget.max_det, budget.max_len);
    let bs = b_twigs(budget);
    let ns = 2..=budget.max_n;
    let ms = 0..=budget.max_m;
    let mut out = Vec::new();
    for &f in families {
        if f == 1 {
            out.extend(ns.clone().map(FamilyInstance::one));
            continue;
        }
        for a in &twigs {
            for n in ns.clone() {
                let bd = to_i64(&bound(a, n));
                let t = to_i64(&threshold(a, n));
                let ells = |b: Option<&Twig>, m: Option<i64>| {
                    ell_values(bd, t, (policy.full)(f, b, m), policy.past_bound)
                };
                match f {
                    2 => out.push(FamilyInstance::two(a.clone(), n)),
                    3 => out.extend(
                        ells(None, None)
                            .into_iter()
                            .map(|l| FamilyInstance::three(a.clone(), n, l)),
                    ),
                    4 => {
                        for b in &bs {
                            out.extend(
                                ells(Some(b), None)
                                    .into_iter()
                                    .map(|l| FamilyInstance::four(a.clone(), n, l, b.clone())),
                            );
                        }
                    }
                    5 => {
                        for b in &bs {
                            for m in ms.clone() {
                                out.extend(ells(Some(b), Some(m)).into_iter().map(|l| {
                                    FamilyInstance::five(a.clone(), n, l, b.clone(), m)
                                }));
                            }
                        }
                    }
                    6 => out.extend(bs.iter().map(|b| FamilyInstance::six(a.clone(), n, b.clone()))),
                    7 => {
                        for b in &bs {
                            out.extend(
                                ms.clone()
                                    .map(|m| FamilyInstance::seven(a.clone(), n, b.clone(), m)),
                            );
                        }
                    }
                    _ => unreachable!("family ids are 1..7"),
                }
            }
        }
    }
    out
}

fn within_bound(spec: &FamilyInstance) -> bool {
    match (&spec.a, spec.l) {
        (Some(a), Some(l)) => BigInt::from(l) <= bound(a, spec.n),
        _ => true,
    }
}

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

pub fn verify_fujita_suite(max_len: usize, max_weight: i64) -> Report {
    verify_fujita_suite_with(max_len, max_weight, Hooks::default())
}

pub fn verify_fujita_suite_with(max_len: usize, max_weight: i64, hooks: Hooks<'_>) -> Report {
    let twigs: Vec<Twig> = enumerate_admissible_twigs(max_len, max_weight).collect();
    let mut tally = par_tally(&twigs, |a, t| {
        let subj = || Subject::Twig { twig: a.to_string() };
        let d = a.determinant();
        let d_over = a.overline().determinant();
        let d_under = a.underline().determinant();
        t.check(
            "fujita_identity_1",
            &d_over * &d_under - &d * a.inner_determinant() == BigInt::one(),
            subj,
            || "d(overline A) d(underline A) - d(A) d(inner) != 1".into(),
        );
        let star = (hooks.adjoint)(a);
        let star = match star {
            Ok(s) if !s.is_empty() && s.is_admissible() => s,
            other => {
                t.check("adjoint_admissible", false, subj, || format!("{other:?}"));
                return;
            }
        };
        t.check("adjoint_admissible", true, subj, String::new);
        t.check(
            "fujita_identity_2_det",
            star.determinant() == d,
            subj,
            || format!("d(A*) = {} for A* = {star}", star.determinant()),
        );
        t.check(
            "fujita_identity_2_overline",
            star.overline().determinant() == &d - &d_under,
            subj,
            || format!("d(overline A*) = {} for A* = {star}", star.overline().determinant()),
        );
        let e = a.inductance().expect("admissible");
        t.check(
            "twig_round_trip",
            Twig::from_inductance(&e).as_ref() == Ok(a),
            subj,
            || format!("from_inductance({e}) differs"),
        );
        t.check(
            "determinant_transposal",
            a.transposal().determinant() == d,
            subj,
            || "d(A) != d(transposal A)".into(),
        );
        t.check("coprime", d.gcd(&d_over).is_one(), subj, || {
            "d(A) and d(overline A) share a factor".into()
        });
        t.check(
            "determinant_lower_bound",
            d >= BigInt::from(a.len() + 1),
            subj,
            || format!("d(A) = {d} < length + 1"),
        );
    });

    let mut seen: BTreeMap<BigRational, &Twig> = BTreeMap::new();
    for a in &twigs {
        let e = a.inductance().expect("admissible");
        let dup = seen.insert(e.clone(), a);
        tally.check(
            "inductance_injective",
            dup.is_none(),
            || Subject::Twig { twig: a.to_string() },
            || format!("same inductance {e} as {}", dup.map(Twig::to_string).unwrap_or_default()),
        );
    }

    let max_den = max_weight.max(2) * max_weight.max(2);
    let rationals: Vec<BigRational> = (2..=max_den)
        .flat_map(|q| {
            (1..q)
                .filter(move |p| p.gcd(&q) == 1)
                .map(move |p| BigRational::new(p.into(), q.into()))
        })
        .collect();
    let rt = par_tally(&rationals, |q, t| {
        let back = Twig::from_inductance(q).and_then(|tw| {
            if tw.is_admissible() {
                tw.inductance()
            } else {
                Err(TwigError::NotAdmissible(tw))
            }
        });
        t.check(
            "rational_round_trip",
            back.as_ref() == Ok(q),
            || Subject::Rational { q: q.to_string() },
            || format!("{back:?}"),
        );
    });
    tally.merge(rt).into_report("fujita")
}

pub fn verify_threshold_suite(budget: &Budget) -> Report {
    // Every ℓ for every A and n; the b and m ranges are narrowed here since
    // the bound does not involve them.
    let narrow = Budget {
        max_b_len: budget.max_b_len.min(2),
        max_b_weight: budget.max_b_weight.min(4),
        max_m: budget.max_m.min(2),
        ..budget.clone()
    };
    let policy = EllPolicy {
        full: &representative,
        past_bound: 2,
    };
    let specs = family_instances(&narrow, &[3, 4, 5], &policy);
    par_tally(&specs, |spec, t| {
        let g = build_family_unbounded(spec).expect("enumerated specs are well formed");
        let negdef = g.without_mark().is_negative_definite();
        let expected = within_bound(spec);
        t.check(
            &format!("threshold_iff_family_{}", spec.family),
            negdef == expected,
            || Subject::Family { spec: spec.clone() },
            || format!("negative definite = {negdef}, but l <= bound is {expected}"),
        );
    })
    .into_report("threshold")
}

/// `α` at the neighbour of `C` in family (3), by Cramer's rule:
/// `d' / d` with `d = K - (ℓ+1)`, `d' = (d(A)-1)(n d(A) - d(overline A)) - d(A) - 1`
/// and `K = d(A)(n d(A) - d(overline A))`.
pub fn family3_cramer(a: &Twig, n: i64, l: i64) -> BigRational {
    let (k, inner) = cramer_parts(a, n);
    BigRational::new(inner, k - (l + 1))
}

/// `(C · D^♮)` for family (4) with `b = [m+2]`, `m >= 1`:
/// `d = (m+1)K - m(ℓ+1) - (ℓ+2)`, `d' = m(K - (ℓ+1)) + (d(A)-1)(n d(A) - d(overline A)) - d(A) - 1`.
pub fn figure1_cramer(a: &Twig, n: i64, l: i64, m: i64) -> BigRational {
    let (k, inner) = cramer_parts(a, n);
    let num = BigInt::from(m) * (&k - (l + 1)) + inner;
    let den = BigInt::from(m + 1) * &k - BigInt::from(m) * (l + 1) - (l + 2);
    BigRational::new(num, den)
}

fn cramer_parts(a: &Twig, n: i64) -> (BigInt, BigInt) {
    let d = a.determinant();
    let dn = BigInt::from(n) * &d - a.overline().determinant();
    let k = &d * &dn;
    let inner = (&d - 1) * &dn - &d - 1;
    (k, inner)
}

/// The two implications about `α` along ends and degree-2 vertices of `D`.
fn check_alpha_lemmas(d: &DualGraph, dn: &DNatural, t: &mut Tally, subj: &dyn Fn() -> Subject) {
    let one = BigRational::one();
    let two = BigRational::from_integer(2.into());
    let alpha = |v: VertexId| dn.get(v).expect("solved on D");
    for v in d.ids() {
        let nbrs: Vec<VertexId> = d.neighbors(v).collect();
        match nbrs[..] {
            [u] if *alpha(v) >= one => {
                t.check("alpha_lemma_end", *alpha(u) >= two, subj, || {
                    format!("α({v}) >= 1 but α({u}) = {}", alpha(u))
                });
            }
            [x, y] => {
                for (u0, u2) in [(x, y), (y, x)] {
                    let (a0, a1, a2) = (alpha(u0), alpha(v), alpha(u2));
                    if a1 > a0 && a0.is_positive() && *a1 >= one {
                        t.check("alpha_lemma_chain", a2 > a1, subj, || {
                            format!("α({u0}) < α({v}) but α({u2}) = {a2} <= {a1}")
                        });
                    }
                }
            }
            _ => {}
        }
    }
}

pub fn verify_trichotomy_suite(budget: &Budget) -> Report {
    let policy = EllPolicy {
        full: &family3_only,
        past_bound: 0,
    };
    let specs = family_instances(budget, &[2, 3, 4, 5, 6, 7], &policy);
    let tally = par_tally(&specs, |spec, t| {
        let subj = || Subject::Family { spec: spec.clone() };
        let g = build_family(spec).expect("enumerated specs are valid");
        let cls = match classify_k_type(&g) {
            Ok(c) => c,
            Err(e) => {
                t.check("k_type_computable", false, subj, || e.to_string());
                return;
            }
        };
        let predicted = predicted_k_type(spec).expect("valid");
        t.check("prediction_agrees", predicted == cls.ktype, subj, || {
            format!("predicted {predicted}, D^♮ gives {} (pairing {})", cls.ktype, cls.pairing)
        });
        if cls.ktype == KType::NumericallyTrivial {
            t.observe(&format!("trivial_family_{}", spec.family));
            t.check("trivial_integral", cls.dnatural.is_integral(), subj, || {
                "non-integral α at triviality".into()
            });
            let a = spec.a.as_ref().expect("families 2..7 have A");
            let m = match (spec.family, &spec.b) {
                (3, _) => Some(0),
                (4, Some(b)) if b.len() == 1 => Some(b.weights()[0] - 2),
                _ => None,
            };
            let is_fig1 = m.is_some_and(|m| {
                figure1_graph(a, m, spec.n).is_ok_and(|f| g.is_isomorphic(&f) == Some(true))
            });
            t.check("trivial_is_figure1", is_fig1, subj, || {
                "numerically trivial instance is not a Figure 1 graph".into()
            });
        }
        let d = g.without_mark();
        check_alpha_lemmas(&d, &cls.dnatural, t, &subj);

        let c = g.mark().expect("built graphs are marked");
        match (spec.family, &spec.a, spec.l, &spec.b) {
            (3, Some(a), Some(l), _) => {
                let v = g.neighbors(c).next().expect("C has a neighbour");
                let expected = family3_cramer(a, spec.n, l);
                let got = cls.dnatural.get(v).expect("solved on D");
                t.check("cramer_family_3", *got == expected, subj, || {
                    format!("α = {got}, Cramer gives {expected}")
                });
            }
            (4, Some(a), Some(l), Some(b)) if b.len() == 1 => {
                let expected = figure1_cramer(a, spec.n, l, b.weights()[0] - 2);
                t.check("cramer_figure1", cls.pairing == expected, subj, || {
                    format!("pairing = {}, Cramer gives {expected}", cls.pairing)
                });
            }
            _ => {}
        }
    });

    // Figure 1 itself, and the remark on when the two thresholds meet.
    let twigs = twigs_by_det(budget.max_det, budget.max_len);
    let triples: Vec<(Twig, i64, i64)> = twigs
        .iter()
        .flat_map(|a| {
            (0..=budget.max_m).flat_map(move |m| (2..=budget.max_n).map(move |n| (a.clone(), m, n)))
        })
        .collect();
    let fig = par_tally(&triples, |(a, m, n), t| {
        let subj = || Subject::Figure1 {
            a: a.to_string(),
            m: *m,
            n: *n,
        };
        let degenerate = a.weights() == [2] && *m == 0 && *n == 2;
        let built = figure1_graph(a, *m, *n);
        if degenerate {
            t.check("figure1_degenerate_rejected", built.is_err(), subj, || {
                "A = [2], (m, n) = (0, 2) was accepted".into()
            });
            return;
        }
        let g = match built {
            Ok(g) => g,
            Err(e) => {
                t.check("figure1_buildable", false, subj, || e.to_string());
                return;
            }
        };
        let spec = figure1_spec(a, *m, *n).expect("checked above");
        t.check(
            "figure1_matches_family",
            build_family(&spec).is_ok_and(|f| f.is_isomorphic(&g) == Some(true)),
            subj,
            || format!("not isomorphic to {spec}"),
        );
        match classify_k_type(&g) {
            Ok(cls) => {
                t.check("figure1_pairing_one", cls.pairing.is_one(), subj, || {
                    format!("pairing {}", cls.pairing)
                });
                t.check("figure1_integral", cls.dnatural.is_integral(), subj, || {
                    "non-integral α".into()
                });
            }
            Err(e) => {
                t.check("figure1_pairing_one", false, subj, || e.to_string());
            }
        }
    });
    let pairs: Vec<(Twig, i64)> = twigs
        .iter()
        .flat_map(|a| (2..=budget.max_n).map(move |n| (a.clone(), n)))
        .collect();
    let remark = par_tally(&pairs, |(a, n), t| {
        let meet = threshold(a, *n) - 1 == bound(a, *n);
        let special = a.weights() == [2] && *n == 2;
        t.check(
            "thresholds_meet_only_at_a2_n2",
            meet == special && threshold(a, *n) - 1 <= bound(a, *n),
            || Subject::Figure1 {
                a: a.to_string(),
                m: 0,
                n: *n,
            },
            || format!("T - 1 = {}, bound = {}", threshold(a, *n) - 1, bound(a, *n)),
        );
    });
    tally.merge(fig).merge(remark).into_report("trichotomy")
}

/// A chain, and if it has three or more curves, exactly two curves of
/// non-negative self-intersection, meeting each other.
pub fn is_minimal_normal_chain(h: &DualGraph) -> bool {
    if !h.is_tree() || h.ids().any(|v| h.degree(v) > 2) {
        return false;
    }
    if h.vertex_count() < 3 {
        return true;
    }
    let nonneg: Vec<VertexId> = h.ids().filter(|&v| h.weight(v).is_some_and(|w| w >= 0)).collect();
    matches!(nonneg[..], [u, v] if h.has_edge(u, v))
}

pub fn verify_boundary_axioms_suite(budget: &Budget) -> Report {
    let policy = EllPolicy {
        full: &windows_only,
        past_bound: 0,
    };
    let specs = family_instances(budget, &[1, 2, 3, 4, 5, 6, 7], &policy);
    par_tally(&specs, |spec, t| {
        let subj = || Subject::Family { spec: spec.clone() };
        let g = build_family(spec).expect("enumerated specs are valid");
        let det = g.graph_d();
        t.check("boundary_determinant", det == -BigInt::one(), subj, || {
            format!("det(-I) = {det}")
        });
        if g.signed_determinant() == -BigInt::one() {
            t.observe("literal_det_i_is_minus_one");
        } else {
            t.observe("literal_det_i_is_not_minus_one");
        }
        t.check("tree", g.is_tree(), subj, || "not a tree".into());
        let shape = g.shape_report();
        t.check("at_most_two_components", shape.components.len() <= 2, subj, || {
            format!("{} components off C", shape.components.len())
        });
        t.check(
            "star_shaped_components",
            shape
                .components
                .iter()
                .all(|c| matches!(c.kind, ComponentKind::Chain | ComponentKind::Star { .. })),
            subj,
            || "a component has several branch vertices".into(),
        );
        let want = if spec.family == 1 { 0 } else { -1 };
        t.check("c_weight", shape.c_weight == Some(want), subj, || {
            format!("C has weight {:?}", shape.c_weight)
        });
        t.check("contractible", g.without_mark().is_negative_definite(), subj, || {
            "D is not negative definite".into()
        });
        let back = classify_family(&g);
        t.check(
            "classify_round_trip",
            back.as_ref().is_ok_and(|m| m.primary == *spec),
            subj,
            || format!("{back:?}"),
        );
        if back.is_ok_and(|m| m.all.len() > 1) {
            t.observe("multiple_matches");
        }
        let model = g.contract_all();
        t.check(
            "minimal_normal_model",
            model.as_ref().is_ok_and(is_minimal_normal_chain),
            subj,
            || match &model {
                Ok(h) => format!("contracts to {}", to_dgn(h).replace('\n', "; ")),
                Err(e) => e.to_string(),
            },
        );
    })
    .into_report("axioms")
}

pub fn verify_contraction_suite(budget: &Budget) -> Report {
    verify_contraction_suite_with(budget, Hooks::default())
}

pub fn verify_contraction_suite_with(budget: &Budget, hooks: Hooks<'_>) -> Report {
    let policy = EllPolicy {
        full: &windows_only,
        past_bound: 2,
    };
    let specs = family_instances(budget, &[2, 3, 4, 5, 6, 7], &policy);
    par_tally(&specs, |spec, t| {
        let g = build_family_unbounded(spec).expect("enumerated specs are well formed");
        let subj = || Subject::Family { spec: spec.clone() };
        check_two_component_lemmas(&g, hooks, t, &subj);
        if within_bound(spec) {
            check_transition_lemma(&g, hooks, t, &subj);
        }
    })
    .into_report("contraction")
}

/// `C` between a `(-m)`-curve `D_1`, `m >= 3`, and a `(-2)`-curve `D_2` of the
/// other component: contracting `C` (and then `C' = D_2` when the `D_2` side
/// is nothing else and `m = 3`) preserves contractibility in both directions.
fn check_two_component_lemmas(g: &DualGraph, hooks: Hooks<'_>, t: &mut Tally, subj: &dyn Fn() -> Subject) {
    let c = g.mark().expect("marked");
    let d = g.without_mark();
    let nbrs: Vec<VertexId> = g.neighbors(c).collect();
    let [x, y] = nbrs[..] else { return };
    let comps = d.components();
    let comp_of = |v: VertexId| comps.iter().position(|cmp| cmp.contains(&v)).expect("in D");
    if comps.len() != 2 || comp_of(x) == comp_of(y) {
        return;
    }
    let w = |v: VertexId| g.weight(v).expect("vertex");
    let (d1, d2) = match (w(x), w(y)) {
        (a, -2) if a <= -3 => (x, y),
        (-2, b) if b <= -3 => (y, x),
        _ => return,
    };
    let m = -w(d1);
    let a_nonempty = comps[comp_of(d1)].len() > 1;
    let b_nonempty = comps[comp_of(d2)].len() > 1;
    if !a_nonempty {
        return;
    }
    let negdef = d.is_negative_definite();
    let Ok(f) = (hooks.blow_down)(g, c) else {
        t.check("contraction_f_defined", false, subj, || "cannot contract C".into());
        return;
    };
    if b_nonempty {
        let mut d_prime = f.clone();
        d_prime.remove_vertex(d2).expect("D_2 survives f");
        let nd = d_prime.is_negative_definite();
        t.check("two_component_iff", nd == negdef, subj, || {
            format!("D negative definite = {negdef}, D' = {nd}")
        });
    } else if m == 3 {
        let Ok(gg) = (hooks.blow_down)(&f, d2) else {
            t.check("contraction_g_defined", false, subj, || "cannot contract C'".into());
            return;
        };
        let mut d_second = gg;
        d_second.remove_vertex(d1).expect("D_1 survives g");
        let nd = d_second.is_negative_definite();
        t.check("chain_end_iff", nd == negdef, subj, || {
            format!("D negative definite = {negdef}, D'' = {nd}")
        });
    }
}

/// (-1)-curves of degree at most two.
fn contractible_curves(g: &DualGraph) -> Vec<VertexId> {
    g.ids()
        .filter(|&v| g.weight(v) == Some(-1) && g.degree(v) <= 2)
        .collect()
}

fn pairing_at(g: &DualGraph, v: VertexId, dn: &DNatural) -> BigRational {
    g.neighbors(v)
        .map(|w| dn.get(w).cloned().unwrap_or_else(BigRational::zero))
        .sum()
}

/// After contracting `C` and then removing a new contractible curve `C'`
/// (and `C''` after one more step when `D` splits but `D'` does not), the
/// remaining exceptional graph stays contractible and the pairing with 1
/// moves in the stated direction.
fn check_transition_lemma(g: &DualGraph, hooks: Hooks<'_>, t: &mut Tally, subj: &dyn Fn() -> Subject) {
    let c = g.mark().expect("marked");
    let d = g.without_mark();
    let has_branch = d.ids().any(|v| d.degree(v) >= 3);
    if !has_branch || g.weight(c) != Some(-1) {
        return;
    }
    let Ok(dn) = solve_dnatural(&d) else { return };
    let p = c_pairing(g, &dn).expect("C present");
    let one = BigRational::one();
    let Ok(f) = (hooks.blow_down)(g, c) else {
        t.check("transition_f_defined", false, subj, || "cannot contract C".into());
        return;
    };
    let cands = contractible_curves(&f);
    if !t.check("transition_c_prime_exists", !cands.is_empty(), subj, || {
        "no (-1)-curve of degree <= 2 after contracting C".into()
    }) {
        return;
    }
    let d_connected = d.components().len() == 1;
    for cp in cands {
        let mut d1 = f.clone();
        d1.remove_vertex(cp).expect("candidate exists");
        let d1_connected = d1.components().len() == 1;
        if d_connected || !d1_connected {
            let Ok(dn1) = solve_dnatural(&d1) else {
                t.check("transition_negdef", false, subj, || format!("D' after C' = {cp} is not negative definite"));
                continue;
            };
            t.check("transition_negdef", true, subj, String::new);
            let p1 = pairing_at(&f, cp, &dn1);
            let ok = if p > one {
                p1 >= one
            } else if p == one {
                p1 <= one
            } else {
                p1 < one
            };
            t.check("transition_pairing", ok, subj, || {
                format!("(C . D^♮) = {p} but (C' . D'^♮) = {p1} with C' = {cp}")
            });
        } else {
            t.observe("transition_second_step");
            let Ok(g2) = (hooks.blow_down)(&f, cp) else {
                t.check("transition_g_defined", false, subj, || format!("cannot contract C' = {cp}"));
                continue;
            };
            let cands2 = contractible_curves(&g2);
            if !t.check("transition_c_second_exists", !cands2.is_empty(), subj, || {
                format!("no (-1)-curve of degree <= 2 after contracting C' = {cp}")
            }) {
                continue;
            }
            for cpp in cands2 {
                let mut d2 = g2.clone();
                d2.remove_vertex(cpp).expect("candidate exists");
                let Ok(dn2) = solve_dnatural(&d2) else {
                    t.check("transition_negdef", false, subj, || {
                        format!("D'' after C'' = {cpp} is not negative definite")
                    });
                    continue;
                };
                t.check("transition_negdef", true, subj, String::new);
                let p2 = pairing_at(&g2, cpp, &dn2);
                let ok = if p > one { p2 >= one } else { p2 < one };
                t.check("transition_pairing", ok, subj, || {
                    format!("(C . D^♮) = {p} but (C'' . D''^♮) = {p2} with C'' = {cpp}")
                });
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Fujita,
    Threshold,
    Trichotomy,
    Axioms,
    Contraction,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 6] =
        ["fujita", "threshold", "trichotomy", "axioms", "contraction", "all"];
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "fujita" => Suite::Fujita,
            "threshold" => Suite::Threshold,
            "trichotomy" => Suite::Trichotomy,
            "axioms" => Suite::Axioms,
            "contraction" => Suite::Contraction,
            "all" => Suite::All,
            other => return Err(format!("unknown suite '{other}'")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteRun {
    pub budget: Budget,
    pub reports: Vec<Report>,
    pub total_failures: usize,
}

impl SuiteRun {
    pub fn passed(&self) -> bool {
        self.total_failures == 0
    }
}

/// Runs `suite` on a pool of `threads` workers (0 picks the rayon default).
pub fn run_suite(suite: Suite, budget: &Budget, threads: usize) -> SuiteRun {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool");
    pool.install(|| {
        let one = |s: Suite| match s {
            Suite::Fujita => verify_fujita_suite(budget.max_len, budget.fujita_max_weight),
            Suite::Threshold => verify_threshold_suite(budget),
            Suite::Trichotomy => verify_trichotomy_suite(budget),
            Suite::Axioms => verify_boundary_axioms_suite(budget),
            Suite::Contraction => verify_contraction_suite(budget),
            Suite::All => unreachable!("expanded below"),
        };
        let reports: Vec<Report> = match suite {
            Suite::All => [
                Suite::Fujita,
                Suite::Threshold,
                Suite::Trichotomy,
                Suite::Axioms,
                Suite::Contraction,
            ]
            .into_iter()
            .map(one)
            .collect(),
            s => vec![one(s)],
        };
        let total_failures = reports.iter().map(|r| r.failures.len()).sum();
        SuiteRun {
            budget: budget.clone(),
            reports,
            total_failures,
        }
    })
}
