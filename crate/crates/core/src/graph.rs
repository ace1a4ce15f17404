//! Weighted dual graphs with an optional marked curve `C`.
//!
//! Weights here are *signed* self-intersection numbers, unlike [`Twig`],
//! which stores their negatives. [`DualGraph::from_twig`] is the one place
//! where the two conventions meet.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use crate::exact::{self, Adjacency, ForestOrder};
use crate::twig::Twig;

pub type VertexId = u32;

type Interner = HashMap<(i64, bool, Vec<u32>), u32>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {0} already exists")]
    DuplicateVertex(VertexId),
    #[error("vertex {0} does not exist")]
    MissingVertex(VertexId),
    #[error("edge {0}-{1} does not exist")]
    MissingEdge(VertexId, VertexId),
    #[error("edge {0}-{0} would be a loop")]
    Loop(VertexId),
    #[error("edge {0}-{1} already exists")]
    DuplicateEdge(VertexId, VertexId),
    #[error("vertex {existing} is already marked C, cannot mark {requested}")]
    MultipleMarks {
        existing: VertexId,
        requested: VertexId,
    },
    #[error("vertex {id} has weight {weight}, only (-1)-curves can be blown down")]
    NotContractibleCurve { id: VertexId, weight: i64 },
    #[error("vertex {id} has degree {degree}, blowing it down would break SNC")]
    WouldBreakChain { id: VertexId, degree: usize },
    #[error("the neighbours of vertex {0} are adjacent, blowing it down would create a cycle")]
    WouldCreateCycle(VertexId),
    #[error("vertex id space exhausted")]
    IdOverflow,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Node {
    weight: i64,
    nbrs: Nbrs,
}

/// Sorted neighbour list; degrees are tiny, so this beats a set.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
struct Nbrs(Vec<VertexId>);

impl Nbrs {
    fn insert(&mut self, v: VertexId) {
        if let Err(i) = self.0.binary_search(&v) {
            self.0.insert(i, v);
        }
    }

    fn remove(&mut self, v: &VertexId) {
        if let Ok(i) = self.0.binary_search(v) {
            self.0.remove(i);
        }
    }

    fn contains(&self, v: &VertexId) -> bool {
        self.0.binary_search(v).is_ok()
    }

    fn len(&self) -> usize {
        self.0.len()
    }

    fn iter(&self) -> std::slice::Iter<'_, VertexId> {
        self.0.iter()
    }

    fn is_disjoint(&self, other: &BTreeSet<VertexId>) -> bool {
        !self.0.iter().any(|v| other.contains(v))
    }
}

impl<'a> IntoIterator for &'a Nbrs {
    type Item = &'a VertexId;
    type IntoIter = std::slice::Iter<'a, VertexId>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl IntoIterator for Nbrs {
    type Item = VertexId;
    type IntoIter = std::vec::IntoIter<VertexId>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

/// A finite simple graph with integer weights and at most one marked vertex.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct DualGraph {
    nodes: BTreeMap<VertexId, Node>,
    mark: Option<VertexId>,
}

/// `I(g)` under the sorted vertex order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionMatrix {
    pub order: Vec<VertexId>,
    pub entries: Vec<Vec<i64>>,
}

impl DualGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// The chain `(-a_1) - ... - (-a_r)` on ids `first, first + 1, ...`.
    pub fn from_twig(first: VertexId, twig: &Twig) -> Self {
        let mut g = Self::new();
        let weights: Vec<i64> = twig.weights().iter().map(|a| -a).collect();
        g.add_path(first, &weights)
            .expect("fresh ids in an empty graph");
        g
    }

    pub fn add_vertex(&mut self, id: VertexId, weight: i64) -> Result<(), GraphError> {
        if self.nodes.contains_key(&id) {
            return Err(GraphError::DuplicateVertex(id));
        }
        self.nodes.insert(
            id,
            Node {
                weight,
                nbrs: Nbrs::default(),
            },
        );
        Ok(())
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> Result<(), GraphError> {
        if u == v {
            return Err(GraphError::Loop(u));
        }
        if !self.nodes.contains_key(&v) {
            return Err(GraphError::MissingVertex(v));
        }
        let nu = self.nodes.get_mut(&u).ok_or(GraphError::MissingVertex(u))?;
        if nu.nbrs.contains(&v) {
            return Err(GraphError::DuplicateEdge(u.min(v), u.max(v)));
        }
        nu.nbrs.insert(v);
        self.node_mut(v).nbrs.insert(u);
        Ok(())
    }

    /// The graph on ids `1..=weights.len()` with the given signed weights and
    /// edges, built in one pass.
    pub(crate) fn from_consecutive(
        weights: &[i64],
        edges: &[(VertexId, VertexId)],
    ) -> Result<DualGraph, GraphError> {
        let mut nbrs: Vec<Vec<VertexId>> = vec![Vec::new(); weights.len()];
        let slot = |id: VertexId| {
            usize::try_from(id)
                .ok()
                .and_then(|i| i.checked_sub(1))
                .filter(|&i| i < weights.len())
                .ok_or(GraphError::MissingVertex(id))
        };
        for &(u, v) in edges {
            if u == v {
                return Err(GraphError::Loop(u));
            }
            let (iu, iv) = (slot(u)?, slot(v)?);
            nbrs[iu].push(v);
            nbrs[iv].push(u);
        }
        let mut nodes = BTreeMap::new();
        for (i, (&weight, mut list)) in weights.iter().zip(nbrs).enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|p| p[0] == p[1]) {
                let u = VertexId::try_from(i + 1).map_err(|_| GraphError::IdOverflow)?;
                return Err(GraphError::DuplicateEdge(u.min(w[0]), u.max(w[0])));
            }
            let id = VertexId::try_from(i + 1).map_err(|_| GraphError::IdOverflow)?;
            nodes.insert(id, Node { weight, nbrs: Nbrs(list) });
        }
        Ok(DualGraph { nodes, mark: None })
    }

    /// Adds a path of fresh vertices `first, first + 1, ...` with the given
    /// signed weights and returns their ids.
    pub fn add_path(
        &mut self,
        first: VertexId,
        weights: &[i64],
    ) -> Result<Vec<VertexId>, GraphError> {
        let mut ids = Vec::with_capacity(weights.len());
        for (k, &w) in weights.iter().enumerate() {
            let id = VertexId::try_from(k)
                .ok()
                .and_then(|k| first.checked_add(k))
                .ok_or(GraphError::IdOverflow)?;
            self.add_vertex(id, w)?;
            if let Some(&prev) = ids.last() {
                self.add_edge(prev, id)?;
            }
            ids.push(id);
        }
        Ok(ids)
    }

    pub fn set_mark(&mut self, id: VertexId) -> Result<(), GraphError> {
        if !self.nodes.contains_key(&id) {
            return Err(GraphError::MissingVertex(id));
        }
        match self.mark {
            Some(existing) if existing != id => Err(GraphError::MultipleMarks {
                existing,
                requested: id,
            }),
            _ => {
                self.mark = Some(id);
                Ok(())
            }
        }
    }

    pub fn set_weight(&mut self, id: VertexId, weight: i64) -> Result<(), GraphError> {
        self.nodes
            .get_mut(&id)
            .ok_or(GraphError::MissingVertex(id))?
            .weight = weight;
        Ok(())
    }

    pub fn remove_vertex(&mut self, id: VertexId) -> Result<(), GraphError> {
        let node = self.nodes.remove(&id).ok_or(GraphError::MissingVertex(id))?;
        for w in node.nbrs {
            self.node_mut(w).nbrs.remove(&id);
        }
        if self.mark == Some(id) {
            self.mark = None;
        }
        Ok(())
    }

    fn node_mut(&mut self, id: VertexId) -> &mut Node {
        self.nodes.get_mut(&id).expect("vertex exists")
    }

    pub fn vertex_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.values().map(|n| n.nbrs.len()).sum::<usize>() / 2
    }

    pub fn contains(&self, id: VertexId) -> bool {
        self.nodes.contains_key(&id)
    }

    /// Vertex ids in increasing order.
    pub fn ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.nodes.keys().copied()
    }

    pub fn max_id(&self) -> Option<VertexId> {
        self.nodes.keys().next_back().copied()
    }

    pub fn weight(&self, id: VertexId) -> Option<i64> {
        self.nodes.get(&id).map(|n| n.weight)
    }

    /// Neighbours in increasing order; empty for a missing vertex.
    pub fn neighbors(&self, id: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.nodes.get(&id).into_iter().flat_map(|n| n.nbrs.iter().copied())
    }

    pub fn degree(&self, id: VertexId) -> usize {
        self.nodes.get(&id).map_or(0, |n| n.nbrs.len())
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.nodes.get(&u).is_some_and(|n| n.nbrs.contains(&v))
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.nodes.iter().flat_map(|(&u, n)| {
            n.nbrs.iter().filter(move |&&v| v > u).map(move |&v| (u, v))
        })
    }

    pub fn mark(&self) -> Option<VertexId> {
        self.mark
    }

    /// The graph with the marked vertex deleted; `D` for a boundary `C + D`.
    pub fn without_mark(&self) -> DualGraph {
        let mut g = self.clone();
        if let Some(c) = self.mark {
            g.remove_vertex(c).expect("marked vertex exists");
        }
        g
    }

    /// The graph with the same vertices and edges but no mark.
    pub fn unmarked(&self) -> DualGraph {
        DualGraph {
            nodes: self.nodes.clone(),
            mark: None,
        }
    }

    /// Induced subgraph on `keep`; the mark survives if its vertex does.
    pub fn induced(&self, keep: &BTreeSet<VertexId>) -> DualGraph {
        let nodes = self
            .nodes
            .iter()
            .filter(|(id, _)| keep.contains(id))
            .map(|(&id, n)| {
                let nbrs = Nbrs(n.nbrs.iter().copied().filter(|v| keep.contains(v)).collect());
                (id, Node { weight: n.weight, nbrs })
            })
            .collect();
        DualGraph {
            nodes,
            mark: self.mark.filter(|c| keep.contains(c)),
        }
    }

    /// Vertex sets of the connected components, each sorted, ordered by
    /// their smallest vertex.
    pub fn components(&self) -> Vec<Vec<VertexId>> {
        let (order, _, adj) = self.indexed();
        index_components(&adj)
            .into_iter()
            .map(|mut comp| {
                comp.sort_unstable();
                comp.into_iter().map(|i| order[i]).collect()
            })
            .collect()
    }

    pub fn is_forest(&self) -> bool {
        self.edge_count() + self.components().len() == self.vertex_count()
    }

    pub fn is_tree(&self) -> bool {
        !self.is_empty() && self.edge_count() + 1 == self.vertex_count() && self.is_forest()
    }

    pub fn intersection_matrix(&self) -> IntersectionMatrix {
        let order: Vec<VertexId> = self.ids().collect();
        let index = |id: VertexId| order.binary_search(&id).expect("vertex exists");
        let n = order.len();
        let mut entries = vec![vec![0i64; n]; n];
        for (i, node) in self.nodes.values().enumerate() {
            entries[i][i] = node.weight;
            for &w in &node.nbrs {
                entries[i][index(w)] = 1;
            }
        }
        IntersectionMatrix { order, entries }
    }

    /// Sorted ids, the diagonal of `-I`, and adjacency by index.
    fn indexed(&self) -> (Vec<VertexId>, Vec<i64>, Adjacency) {
        let order: Vec<VertexId> = self.ids().collect();
        // Ids are usually consecutive, and then the index is an offset.
        let first = order.first().copied().unwrap_or(0);
        let dense = order.last().is_some_and(|&l| (l - first) as usize + 1 == order.len());
        let index = |id: &VertexId| {
            if dense {
                (id - first) as usize
            } else {
                order.binary_search(id).expect("vertex exists")
            }
        };
        let diag = self.nodes.values().map(|n| -n.weight).collect();
        let adj = Adjacency::from_lists(self.nodes.values().map(|n| n.nbrs.iter().map(index)));
        (order, diag, adj)
    }

    fn negated_dense(&self) -> Vec<Vec<i64>> {
        let mut m = self.intersection_matrix().entries;
        for row in &mut m {
            for x in row.iter_mut() {
                *x = -*x;
            }
        }
        m
    }

    /// `det(I(g))`; 1 for the empty graph.
    pub fn signed_determinant(&self) -> BigInt {
        let d = self.graph_d();
        if self.vertex_count().is_multiple_of(2) {
            d
        } else {
            -d
        }
    }

    /// `d(g) = det(-I(g))`; 1 for the empty graph.
    pub fn graph_d(&self) -> BigInt {
        let (_, diag, adj) = self.indexed();
        match ForestOrder::new(&adj) {
            Some(order) => exact::forest_determinant(&diag, &order),
            None => exact::determinant(&self.negated_dense()),
        }
    }

    /// Whether `I(g)` is negative definite, i.e. `-I(g)` is positive definite.
    /// The empty graph counts as negative definite.
    pub fn is_negative_definite(&self) -> bool {
        let (_, diag, adj) = self.indexed();
        match ForestOrder::new(&adj) {
            Some(order) => exact::forest_positive_definite(&diag, &order),
            None => exact::leading_minors_positive(&self.negated_dense()),
        }
    }

    /// Solves `-I(g) x = rhs` (indexed by sorted id) exactly. `None` if the
    /// matrix is singular.
    pub(crate) fn solve_negated(&self, rhs: &[i64]) -> Option<BTreeMap<VertexId, BigRational>> {
        let (order, diag, adj) = self.indexed();
        let assemble = |nums: Vec<BigInt>, dens: &dyn Fn(usize) -> BigInt| {
            order
                .iter()
                .zip(nums)
                .enumerate()
                .map(|(i, (&id, num))| (id, reduced(num, dens(i))))
                .collect()
        };
        if let Some(forest) = ForestOrder::new(&adj) {
            if let Some(sol) = exact::forest_solve(&diag, rhs, &forest) {
                let dens = sol.denominators;
                return Some(assemble(sol.numerators, &|i| dens[i].clone()));
            }
        }
        let sol = exact::dense_solve(&self.negated_dense(), rhs)?;
        let den = sol.denominator;
        Some(assemble(sol.numerators, &|_| den.clone()))
    }

    /// Whether `id` could be blown down right now.
    pub fn check_blow_down(&self, id: VertexId) -> Result<(), GraphError> {
        let node = self.nodes.get(&id).ok_or(GraphError::MissingVertex(id))?;
        if node.weight != -1 {
            return Err(GraphError::NotContractibleCurve {
                id,
                weight: node.weight,
            });
        }
        if node.nbrs.len() > 2 {
            return Err(GraphError::WouldBreakChain {
                id,
                degree: node.nbrs.len(),
            });
        }
        let mut it = node.nbrs.iter();
        if let (Some(&a), Some(&b)) = (it.next(), it.next()) {
            if self.has_edge(a, b) {
                return Err(GraphError::WouldCreateCycle(id));
            }
        }
        Ok(())
    }

    fn blow_down_in_place(&mut self, id: VertexId) {
        let node = self.nodes.remove(&id).expect("checked");
        for &w in &node.nbrs {
            let n = self.node_mut(w);
            n.nbrs.remove(&id);
            n.weight += 1;
        }
        let mut it = node.nbrs.iter();
        if let (Some(&a), Some(&b)) = (it.next(), it.next()) {
            self.node_mut(a).nbrs.insert(b);
            self.node_mut(b).nbrs.insert(a);
        }
        if self.mark == Some(id) {
            self.mark = None;
        }
    }

    /// Contracts the (-1)-curve `id`. Ids of surviving vertices are kept.
    pub fn blow_down(&self, id: VertexId) -> Result<DualGraph, GraphError> {
        self.check_blow_down(id)?;
        let mut g = self.clone();
        g.blow_down_in_place(id);
        Ok(g)
    }

    /// Blows up the intersection point of `u` and `v`: a new (-1)-vertex
    /// `new_id` is inserted on the edge and both weights drop by one.
    pub fn blow_up_edge(
        &self,
        u: VertexId,
        v: VertexId,
        new_id: VertexId,
    ) -> Result<DualGraph, GraphError> {
        if !self.has_edge(u, v) {
            return Err(GraphError::MissingEdge(u, v));
        }
        let mut g = self.clone();
        g.add_vertex(new_id, -1)?;
        g.node_mut(u).nbrs.remove(&v);
        g.node_mut(v).nbrs.remove(&u);
        for w in [u, v] {
            g.node_mut(w).weight -= 1;
            g.add_edge(w, new_id)?;
        }
        Ok(g)
    }

    /// Blows up a general point of `v`: a new (-1)-leaf `new_id` hangs off `v`.
    pub fn blow_up_vertex(&self, v: VertexId, new_id: VertexId) -> Result<DualGraph, GraphError> {
        if !self.contains(v) {
            return Err(GraphError::MissingVertex(v));
        }
        let mut g = self.clone();
        g.add_vertex(new_id, -1)?;
        g.node_mut(v).weight -= 1;
        g.add_edge(v, new_id)?;
        Ok(g)
    }

    /// Repeatedly blows down the smallest eligible (-1)-vertex.
    ///
    /// Fails with [`GraphError::WouldCreateCycle`] only when some (-1)-vertex of
    /// degree at most two remains and every such vertex is blocked.
    pub fn contract_all(&self) -> Result<DualGraph, GraphError> {
        self.contract_all_fixing(&BTreeSet::new())
    }

    /// Like [`DualGraph::contract_all`], but the curves in `fixed` keep their
    /// self-intersection: neither they nor their neighbours are blown down.
    ///
    /// This is the sense in which `[m, A, 1, B]` "contracts to `[m, 1]`".
    pub fn contract_all_fixing(&self, fixed: &BTreeSet<VertexId>) -> Result<DualGraph, GraphError> {
        let mut g = self.clone();
        let eligible = |g: &DualGraph, v: VertexId| {
            let n = &g.nodes[&v];
            n.weight == -1
                && n.nbrs.len() <= 2
                && !fixed.contains(&v)
                && n.nbrs.is_disjoint(fixed)
        };
        let mut candidates: BTreeSet<VertexId> =
            g.ids().filter(|&v| eligible(&g, v)).collect();
        loop {
            let Some(v) = candidates
                .iter()
                .copied()
                .find(|&v| g.check_blow_down(v).is_ok())
            else {
                return match candidates.first() {
                    Some(&v) => Err(GraphError::WouldCreateCycle(v)),
                    None => Ok(g),
                };
            };
            candidates.remove(&v);
            let nbrs: Vec<VertexId> = g.neighbors(v).collect();
            g.blow_down_in_place(v);
            for w in nbrs {
                if eligible(&g, w) {
                    candidates.insert(w);
                } else {
                    candidates.remove(&w);
                }
            }
        }
    }

    /// Weighted marked-graph isomorphism for forests. `None` if either graph
    /// has a cycle.
    pub fn is_isomorphic(&self, other: &DualGraph) -> Option<bool> {
        // AHU labelling with one interner shared by both graphs, so equal
        // labels mean isomorphic rooted trees.
        let mut interner = HashMap::new();
        let a = self.forest_signature(&mut interner)?;
        let b = other.forest_signature(&mut interner)?;
        Some(
            self.vertex_count() == other.vertex_count()
                && self.mark.is_some() == other.mark.is_some()
                && a == b,
        )
    }

    /// Sorted labels of the components; each component is labelled by the
    /// smallest rooted label over its one or two centres. `None` if the
    /// graph has a cycle.
    fn forest_signature(&self, interner: &mut Interner) -> Option<Vec<u32>> {
        let (order, _, adj) = self.indexed();
        let weights: Vec<i64> = self.nodes.values().map(|n| n.weight).collect();
        let mark = self.mark.and_then(|c| order.binary_search(&c).ok());
        let comps = index_components(&adj);
        if adj.edge_count() + comps.len() != adj.len() {
            return None;
        }
        let mut deg: Vec<usize> = (0..adj.len()).map(|v| adj[v].len()).collect();
        let mut parent = vec![usize::MAX; adj.len()];
        let mut kids: Vec<Vec<u32>> = vec![Vec::new(); adj.len()];
        let mut sig: Vec<u32> = comps
            .iter()
            .map(|comp| {
                centres(comp, &adj, &mut deg)
                    .into_iter()
                    .map(|c| rooted_label(c, &adj, &weights, mark, &mut parent, &mut kids, interner))
                    .min()
                    .expect("non-empty component")
            })
            .collect();
        sig.sort_unstable();
        Some(sig)
    }

    pub fn shape_report(&self) -> ShapeReport {
        let d = self.without_mark();
        let c = self.mark;
        let components = d
            .components()
            .into_iter()
            .map(|vertices| {
                let branch_vertices: Vec<VertexId> =
                    vertices.iter().copied().filter(|&v| d.degree(v) >= 3).collect();
                let edges: usize = vertices.iter().map(|&v| d.degree(v)).sum::<usize>() / 2;
                let kind = if edges + 1 != vertices.len() {
                    ComponentKind::Cyclic
                } else if branch_vertices.is_empty() {
                    ComponentKind::Chain
                } else if let [center] = branch_vertices[..] {
                    ComponentKind::Star {
                        center,
                        branches: d.degree(center),
                    }
                } else {
                    ComponentKind::Tree {
                        branch_vertices: branch_vertices.len(),
                    }
                };
                let c_contacts = match c {
                    Some(c) => vertices
                        .iter()
                        .copied()
                        .filter(|&v| self.has_edge(c, v))
                        .map(|v| Contact {
                            vertex: v,
                            position: match d.degree(v) {
                                0 | 1 => Position::End,
                                2 => Position::Interior,
                                _ => Position::Branch,
                            },
                        })
                        .collect(),
                    None => Vec::new(),
                };
                ComponentShape {
                    vertices,
                    kind,
                    c_contacts,
                }
            })
            .collect();
        ShapeReport {
            is_tree: self.is_tree(),
            c_vertex: c,
            c_weight: c.and_then(|c| self.weight(c)),
            c_degree: c.map(|c| self.degree(c)),
            components,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum ComponentKind {
    Chain,
    /// Exactly one vertex of degree at least three.
    Star { center: VertexId, branches: usize },
    /// A tree with several branch vertices.
    Tree { branch_vertices: usize },
    Cyclic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Position {
    End,
    Interior,
    Branch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Contact {
    pub vertex: VertexId,
    pub position: Position,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentShape {
    pub vertices: Vec<VertexId>,
    pub kind: ComponentKind,
    /// Vertices of this component adjacent to `C`, with their position
    /// inside the component.
    pub c_contacts: Vec<Contact>,
}

/// Structure of `g` as seen from its marked vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShapeReport {
    pub is_tree: bool,
    pub c_vertex: Option<VertexId>,
    pub c_weight: Option<i64>,
    pub c_degree: Option<usize>,
    /// Connected components of `g` minus `C`.
    pub components: Vec<ComponentShape>,
}

/// Connected components of an index graph, each in discovery order.
fn index_components(adj: &Adjacency) -> Vec<Vec<usize>> {
    let mut seen = vec![false; adj.len()];
    let mut comps = Vec::new();
    for s in 0..adj.len() {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut i = 0;
        while i < comp.len() {
            for &w in &adj[comp[i]] {
                if !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                }
            }
            i += 1;
        }
        comps.push(comp);
    }
    comps
}

/// The one or two vertices left after repeatedly peeling leaves. Consumes
/// `deg` on the component.
fn centres(comp: &[usize], adj: &Adjacency, deg: &mut [usize]) -> Vec<usize> {
    let mut layer: Vec<usize> = comp.iter().copied().filter(|&v| deg[v] <= 1).collect();
    let mut remaining = comp.len();
    while remaining > 2 {
        remaining -= layer.len();
        let mut next = Vec::new();
        for &v in &layer {
            for &w in &adj[v] {
                if deg[w] > 1 {
                    deg[w] -= 1;
                    if deg[w] == 1 {
                        next.push(w);
                    }
                }
            }
        }
        layer = next;
    }
    layer
}

/// AHU label of the tree containing `root`, rooted there. `parent` and
/// `kids` are scratch space, left clean for the next call.
fn rooted_label(
    root: usize,
    adj: &Adjacency,
    weights: &[i64],
    mark: Option<usize>,
    parent: &mut [usize],
    kids: &mut [Vec<u32>],
    interner: &mut Interner,
) -> u32 {
    // Iterative so that long chains do not exhaust the stack.
    let mut order = Vec::new();
    let mut stack = vec![root];
    parent[root] = root;
    while let Some(v) = stack.pop() {
        order.push(v);
        for &w in &adj[v] {
            if parent[w] == usize::MAX {
                parent[w] = v;
                stack.push(w);
            }
        }
    }
    let mut label = 0;
    for &v in order.iter().rev() {
        let mut key_kids = std::mem::take(&mut kids[v]);
        key_kids.sort_unstable();
        let key = (weights[v], mark == Some(v), key_kids);
        let next = interner.len() as u32;
        label = *interner.entry(key).or_insert(next);
        if v != root {
            kids[parent[v]].push(label);
        }
    }
    for &v in &order {
        parent[v] = usize::MAX;
    }
    label
}

/// `num / den` in lowest terms, normalising in `i128` when both fit.
fn reduced(num: BigInt, den: BigInt) -> BigRational {
    if let (Some(n), Some(d)) = (num.to_i64(), den.to_i64()) {
        if d != 0 && n != i64::MIN && d != i64::MIN {
            let g = n.gcd(&d);
            let (n, d) = if d < 0 { (-n / g, -d / g) } else { (n / g, d / g) };
            return BigRational::new_raw(n.into(), d.into());
        }
    }
    match (num.to_i128(), den.to_i128()) {
        (Some(n), Some(d)) if d != 0 && n != i128::MIN && d != i128::MIN => {
            let g = n.gcd(&d);
            let (n, d) = if d < 0 { (-n / g, -d / g) } else { (n / g, d / g) };
            BigRational::new_raw(n.into(), d.into())
        }
        _ => BigRational::new(num, den),
    }
}
