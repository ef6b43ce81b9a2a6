//! Plane tropical curves: marked combinatorial trees, balancing, rational
//! plane realizations, the type A/B classification around a central
//! vertex, leaf profiles and exact multiplicities.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactmath::{decimal, det2, rat_from_pair, rat_to_pair, BigRat, Vec2Q, Vec2Z};
use crate::formula::LeafProfile;
use crate::model::{ContactData, End, Ray};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CurveError {
    #[error("edges do not form a tree on {vertices} vertices")]
    NotATree { vertices: usize },
    #[error("leg attached to missing vertex {vertex}")]
    LegOutOfRange { vertex: usize },
    #[error("bounded edge {edge} separates ends but has zero direction")]
    ZeroEdgeDirection { edge: usize },
    #[error("expected {expected} edge lengths, got {got}")]
    LengthCount { expected: usize, got: usize },
    #[error("edge {edge} has non-positive length")]
    NonPositiveLength { edge: usize },
    #[error("balancing fails at vertex {vertex}")]
    Unbalanced { vertex: usize },
    #[error("end legs do not match the degree of the contact data")]
    EndsMismatch,
    #[error("markings must be labelled 1..n exactly once")]
    MarkingsMismatch,
    #[error("the tree does not have a contributing central-vertex shape")]
    NotContributing,
    #[error("leaf with ends along {0} and {1} has parallel directions")]
    DegenerateLeaf(Ray, Ray),
    #[error("the curve has multiplicity zero")]
    ZeroMultiplicity,
    #[error("leaf profile violates the end-count system")]
    ProfileMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LegKind {
    /// Contracted marking leg `p_k` (1-based).
    Marking(usize),
    End(End),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Leg {
    pub vertex: usize,
    pub kind: LegKind,
}

/// A marked tree rooted at vertex 0. Bounded edges are stored as
/// `(parent, child)` pairs in breadth-first order from the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CombTree {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    legs: Vec<Leg>,
    parent_edge: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
}

impl CombTree {
    pub fn new(vertex_count: usize, edges: &[(usize, usize)], legs: Vec<Leg>) -> Result<Self, CurveError> {
        if vertex_count == 0 || edges.len() + 1 != vertex_count {
            return Err(CurveError::NotATree { vertices: vertex_count });
        }
        if let Some(l) = legs.iter().find(|l| l.vertex >= vertex_count) {
            return Err(CurveError::LegOutOfRange { vertex: l.vertex });
        }
        let mut adj = vec![Vec::new(); vertex_count];
        for &(u, v) in edges {
            if u >= vertex_count || v >= vertex_count || u == v {
                return Err(CurveError::NotATree { vertices: vertex_count });
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut seen = vec![false; vertex_count];
        let mut oriented = Vec::with_capacity(edges.len());
        let mut parent_edge = vec![None; vertex_count];
        let mut children = vec![Vec::new(); vertex_count];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent_edge[v] = Some(oriented.len());
                    children[u].push(v);
                    oriented.push((u, v));
                    queue.push_back(v);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(CurveError::NotATree { vertices: vertex_count });
        }
        Ok(CombTree { vertex_count, edges: oriented, legs, parent_edge, children })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn legs(&self) -> &[Leg] {
        &self.legs
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn parent_edge(&self, v: usize) -> Option<usize> {
        self.parent_edge[v]
    }

    pub fn legs_at(&self, v: usize) -> impl Iterator<Item = &Leg> {
        self.legs.iter().filter(move |l| l.vertex == v)
    }

    pub fn markings_at(&self, v: usize) -> Vec<usize> {
        self.legs_at(v)
            .filter_map(|l| match l.kind {
                LegKind::Marking(k) => Some(k),
                LegKind::End(_) => None,
            })
            .collect()
    }

    pub fn ends_at(&self, v: usize) -> Vec<End> {
        self.legs_at(v)
            .filter_map(|l| match l.kind {
                LegKind::End(e) => Some(e),
                LegKind::Marking(_) => None,
            })
            .collect()
    }

    pub fn marking_count(&self) -> usize {
        self.legs.iter().filter(|l| matches!(l.kind, LegKind::Marking(_))).count()
    }

    /// Total valence (bounded edges plus legs) of a vertex.
    pub fn valence(&self, v: usize) -> usize {
        self.children[v].len() + self.parent_edge[v].is_some() as usize + self.legs_at(v).count()
    }

    /// The same tree rooted at `v`.
    pub fn rerooted(&self, v: usize) -> CombTree {
        let mut perm: Vec<usize> = (0..self.vertex_count).collect();
        perm.swap(0, v);
        let edges: Vec<(usize, usize)> = self.edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
        let legs = self.legs.iter().map(|l| Leg { vertex: perm[l.vertex], kind: l.kind }).collect();
        CombTree::new(self.vertex_count, &edges, legs).expect("relabelling preserves the tree")
    }
}

/// Weighted direction of every bounded edge, pointing away from the root:
/// the sum of the end vectors beyond the edge.
pub fn balance_propagate(tree: &CombTree) -> Result<Vec<Vec2Z>, CurveError> {
    let mut dir = vec![Vec2Z::ZERO; tree.edges.len()];
    let mut below = vec![Vec2Z::ZERO; tree.vertex_count];
    let mut has_end = vec![false; tree.vertex_count];
    for l in &tree.legs {
        if let LegKind::End(e) = l.kind {
            below[l.vertex] += e.vector;
            has_end[l.vertex] = true;
        }
    }
    for (i, &(p, c)) in tree.edges.iter().enumerate().rev() {
        dir[i] = below[c];
        if dir[i].is_zero() && has_end[c] {
            return Err(CurveError::ZeroEdgeDirection { edge: i });
        }
        let b = below[c];
        below[p] += b;
        has_end[p] |= has_end[c];
    }
    Ok(dir)
}

/// A balanced realization of a tree in the plane.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlaneMap {
    tree: CombTree,
    root: Vec2Q,
    lengths: Vec<BigRat>,
    directions: Vec<Vec2Z>,
}

impl PlaneMap {
    pub fn new(tree: CombTree, root: Vec2Q, lengths: Vec<BigRat>) -> Result<Self, CurveError> {
        if lengths.len() != tree.edges.len() {
            return Err(CurveError::LengthCount { expected: tree.edges.len(), got: lengths.len() });
        }
        if let Some(edge) = lengths.iter().position(|l| !l.is_positive()) {
            return Err(CurveError::NonPositiveLength { edge });
        }
        let directions = balance_propagate(&tree)?;
        let map = PlaneMap { tree, root, lengths, directions };
        map.check_balancing()?;
        Ok(map)
    }

    pub fn tree(&self) -> &CombTree {
        &self.tree
    }

    pub fn root(&self) -> &Vec2Q {
        &self.root
    }

    pub fn lengths(&self) -> &[BigRat] {
        &self.lengths
    }

    pub fn directions(&self) -> &[Vec2Z] {
        &self.directions
    }

    /// Outgoing weighted directions sum to zero at every vertex.
    pub fn check_balancing(&self) -> Result<(), CurveError> {
        let mut net = vec![Vec2Z::ZERO; self.tree.vertex_count];
        for l in &self.tree.legs {
            if let LegKind::End(e) = l.kind {
                net[l.vertex] += e.vector;
            }
        }
        for (i, &(p, c)) in self.tree.edges.iter().enumerate() {
            net[p] += self.directions[i];
            net[c] += -self.directions[i];
        }
        match net.iter().position(|v| !v.is_zero()) {
            Some(vertex) => Err(CurveError::Unbalanced { vertex }),
            None => Ok(()),
        }
    }

    pub fn vertex_positions(&self) -> Vec<Vec2Q> {
        let mut pos = vec![Vec2Q::zero(); self.tree.vertex_count];
        pos[0] = self.root.clone();
        for (i, &(p, c)) in self.tree.edges.iter().enumerate() {
            pos[c] = pos[p].add_scaled(self.directions[i], &self.lengths[i]);
        }
        pos
    }
}

/// Marking positions `h(p_1), ..., h(p_n)`.
pub fn positions_of(map: &PlaneMap) -> Result<Vec<Vec2Q>, CurveError> {
    let pos = map.vertex_positions();
    let mut out: Vec<Option<Vec2Q>> = vec![None; map.tree.marking_count()];
    for l in &map.tree.legs {
        if let LegKind::Marking(k) = l.kind {
            let slot = out.get_mut(k.wrapping_sub(1)).ok_or(CurveError::MarkingsMismatch)?;
            if slot.replace(pos[l.vertex].clone()).is_some() {
                return Err(CurveError::MarkingsMismatch);
            }
        }
    }
    out.into_iter().map(|p| p.ok_or(CurveError::MarkingsMismatch)).collect()
}

/// One component of the curve minus the central vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LeafSpec {
    /// A single vertex carrying the marking and one end.
    Single { marking: usize, end: End, length: BigRat },
    /// Inner vertex with one end, outer vertex with the marking and one end.
    Double { marking: usize, inner: End, outer: End, stem: BigRat, twig: BigRat },
}

/// Builds the map with central vertex at `v`, an optional marking on the
/// central vertex, and the given leaves.
pub fn central_map(v: Vec2Q, central_marking: Option<usize>, leaves: &[LeafSpec]) -> Result<PlaneMap, CurveError> {
    let mut edges = Vec::new();
    let mut legs = Vec::new();
    let mut lengths = Vec::new();
    let mut next = 1;
    if let Some(k) = central_marking {
        legs.push(Leg { vertex: 0, kind: LegKind::Marking(k) });
    }
    for leaf in leaves {
        match leaf {
            LeafSpec::Single { marking, end, length } => {
                edges.push((0, next));
                lengths.push(length.clone());
                legs.push(Leg { vertex: next, kind: LegKind::Marking(*marking) });
                legs.push(Leg { vertex: next, kind: LegKind::End(*end) });
                next += 1;
            }
            LeafSpec::Double { marking, inner, outer, stem, twig } => {
                edges.push((0, next));
                edges.push((next, next + 1));
                lengths.push(stem.clone());
                lengths.push(twig.clone());
                legs.push(Leg { vertex: next, kind: LegKind::End(*inner) });
                legs.push(Leg { vertex: next + 1, kind: LegKind::Marking(*marking) });
                legs.push(Leg { vertex: next + 1, kind: LegKind::End(*outer) });
                next += 2;
            }
        }
    }
    let tree = CombTree::new(next, &edges, legs)?;
    // breadth-first orientation may reorder edges; map lengths accordingly
    let mut ordered = vec![BigRat::zero(); lengths.len()];
    for (i, &(p, c)) in edges.iter().enumerate() {
        let j = tree.edges().iter().position(|&e| e == (p, c)).expect("edge survives orientation");
        ordered[j] = lengths[i].clone();
    }
    PlaneMap::new(tree, v, ordered)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CurveType {
    A,
    B,
}

impl std::fmt::Display for CurveType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CurveType::A => "A",
            CurveType::B => "B",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    A,
    B,
    NotContributingShape,
}

/// Leaves hanging off the root vertex, split by number of vertices:
/// `(single-vertex leaves, two-vertex leaves)` as child vertices of the
/// root, or `None` when some leaf has another shape.
fn leaf_shapes(tree: &CombTree) -> Option<(Vec<usize>, Vec<usize>)> {
    let mut singles = Vec::new();
    let mut doubles = Vec::new();
    for &u in tree.children(0) {
        let (m, e) = (tree.markings_at(u).len(), tree.ends_at(u).len());
        match tree.children(u) {
            [] if m == 1 && e == 1 => singles.push(u),
            [w] if m == 0 && e == 1 && tree.children(*w).is_empty() => {
                if tree.markings_at(*w).len() == 1 && tree.ends_at(*w).len() == 1 {
                    doubles.push(u);
                } else {
                    return None;
                }
            }
            _ => return None,
        }
    }
    Some((singles, doubles))
}

/// Classifies the tree with vertex 0 as candidate central vertex.
pub fn classify(tree: &CombTree) -> Classification {
    let n = tree.marking_count();
    if n < 3 || !tree.ends_at(0).is_empty() {
        return Classification::NotContributingShape;
    }
    let Some((singles, doubles)) = leaf_shapes(tree) else {
        return Classification::NotContributingShape;
    };
    match (tree.markings_at(0).len(), singles.len(), doubles.len()) {
        (1, 0, d) if d == n - 1 => Classification::A,
        (0, 2, d) if d == n - 2 => Classification::B,
        _ => Classification::NotContributingShape,
    }
}

/// Classifies with every vertex tried as the centre; returns the first
/// contributing shape found and its centre.
pub fn classify_any(tree: &CombTree) -> Option<(Classification, CombTree)> {
    (0..tree.vertex_count()).find_map(|v| {
        let t = tree.rerooted(v);
        match classify(&t) {
            Classification::NotContributingShape => None,
            c => Some((c, t)),
        }
    })
}

/// `(inner end, outer end)` of a two-vertex leaf rooted at `u`.
fn double_leaf_ends(tree: &CombTree, u: usize) -> (End, End) {
    let w = tree.children(u)[0];
    (tree.ends_at(u)[0], tree.ends_at(w)[0])
}

/// Product of the local multiplicities: `|det|` of the two end vectors at
/// every inner leaf vertex and, for type B, of the two single-leaf end
/// vectors at the central vertex.
pub fn curve_multiplicity(tree: &CombTree) -> Result<BigInt, CurveError> {
    let class = classify(tree);
    let Some((singles, doubles)) = leaf_shapes(tree).filter(|_| class != Classification::NotContributingShape) else {
        return Err(CurveError::NotContributing);
    };
    let mut mult = BigInt::one();
    for u in doubles {
        let (p, q) = double_leaf_ends(tree, u);
        mult *= det2(p.vector, q.vector).abs();
    }
    if class == Classification::B {
        let (p, q) = (tree.ends_at(singles[0])[0], tree.ends_at(singles[1])[0]);
        mult *= det2(p.vector, q.vector).abs();
    }
    if mult.is_zero() {
        return Err(CurveError::ZeroMultiplicity);
    }
    Ok(mult)
}

/// Leaf tallies of a classified tree, checked against the end-count system.
pub fn profile_of(tree: &CombTree, gamma: &ContactData) -> Result<LeafProfile, CurveError> {
    let class = classify(tree);
    let Some((singles, doubles)) = leaf_shapes(tree).filter(|_| class != Classification::NotContributingShape) else {
        return Err(CurveError::NotContributing);
    };
    let mut p = LeafProfile { type_b: class == Classification::B, ..LeafProfile::default() };
    for u in doubles {
        let (e, f) = double_leaf_ends(tree, u);
        *p.slot_mut(e.ray, f.ray).ok_or(CurveError::DegenerateLeaf(e.ray, f.ray))? += 1;
    }
    for u in singles {
        p.eps[tree.ends_at(u)[0].ray.index()] += 1;
    }
    if !p.satisfies_system(gamma) {
        return Err(CurveError::ProfileMismatch);
    }
    Ok(p)
}

/// A leaf of a contributing curve: its marking and end labels, inner first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafRecord {
    pub marking: usize,
    pub ends: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContributingCurve {
    pub map: PlaneMap,
    pub curve_type: CurveType,
    pub profile: LeafProfile,
    pub multiplicity: BigInt,
    pub central_marking: Option<usize>,
    pub leaves: Vec<LeafRecord>,
}

impl ContributingCurve {
    /// Checks ends and markings against `gamma`, classifies, and computes
    /// the profile and multiplicity.
    pub fn from_map(map: PlaneMap, gamma: &ContactData) -> Result<Self, CurveError> {
        let tree = map.tree();
        let mut ends: Vec<End> = tree
            .legs()
            .iter()
            .filter_map(|l| match l.kind {
                LegKind::End(e) => Some(e),
                LegKind::Marking(_) => None,
            })
            .collect();
        ends.sort();
        if ends != gamma.degree().ends {
            return Err(CurveError::EndsMismatch);
        }
        if tree.marking_count() != gamma.n() {
            return Err(CurveError::MarkingsMismatch);
        }
        positions_of(&map)?;
        let curve_type = match classify(tree) {
            Classification::A => CurveType::A,
            Classification::B => CurveType::B,
            Classification::NotContributingShape => return Err(CurveError::NotContributing),
        };
        let profile = profile_of(tree, gamma)?;
        let multiplicity = curve_multiplicity(tree)?;
        let leaves = tree
            .children(0)
            .iter()
            .map(|&u| {
                let marking_vertex = tree.children(u).first().copied().unwrap_or(u);
                let mut ends: Vec<usize> = tree.ends_at(u).iter().map(|e| e.label).collect();
                ends.extend(tree.children(u).iter().flat_map(|&w| tree.ends_at(w)).map(|e| e.label));
                LeafRecord { marking: tree.markings_at(marking_vertex)[0], ends }
            })
            .collect();
        let central_marking = tree.markings_at(0).first().copied();
        Ok(ContributingCurve { map, curve_type, profile, multiplicity, central_marking, leaves })
    }

    pub fn record(&self, gamma: &ContactData) -> CurveRecord {
        let pos = self.map.vertex_positions();
        let tree = self.map.tree();
        let mut ends: Vec<EndRecord> = tree
            .legs()
            .iter()
            .filter_map(|l| match l.kind {
                LegKind::End(e) => Some(EndRecord { label: e.label, vertex: l.vertex, ray: e.ray, weight: e.weight, vector: e.vector }),
                LegKind::Marking(_) => None,
            })
            .collect();
        ends.sort_by_key(|e| e.label);
        let mut markings: Vec<MarkingRecord> = tree
            .legs()
            .iter()
            .filter_map(|l| match l.kind {
                LegKind::Marking(k) => Some(MarkingRecord { index: k, vertex: l.vertex }),
                LegKind::End(_) => None,
            })
            .collect();
        markings.sort_by_key(|m| m.index);
        CurveRecord {
            a: gamma.a(),
            n: gamma.n(),
            curve_type: self.curve_type,
            multiplicity: self.multiplicity.clone(),
            profile: self.profile,
            central_marking: self.central_marking,
            leaves: self.leaves.clone(),
            vertices: pos.iter().enumerate().map(|(id, p)| VertexRecord { id, x: rat_to_pair(&p.x), y: rat_to_pair(&p.y) }).collect(),
            edges: tree
                .edges()
                .iter()
                .zip(self.map.directions())
                .zip(self.map.lengths())
                .map(|((&(from, to), &direction), length)| EdgeRecord { from, to, direction, length: rat_to_pair(length) })
                .collect(),
            ends,
            markings,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: usize,
    pub x: [String; 2],
    pub y: [String; 2],
}

impl VertexRecord {
    pub fn position(&self) -> Option<Vec2Q> {
        Some(Vec2Q::new(rat_from_pair(&self.x)?, rat_from_pair(&self.y)?))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub from: usize,
    pub to: usize,
    pub direction: Vec2Z,
    pub length: [String; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndRecord {
    pub label: usize,
    pub vertex: usize,
    pub ray: Ray,
    pub weight: u32,
    pub vector: Vec2Z,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkingRecord {
    pub index: usize,
    pub vertex: usize,
}

/// Canonical serialization of a contributing curve. Rationals are
/// `["num", "den"]` string pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub a: i64,
    pub n: usize,
    pub curve_type: CurveType,
    #[serde(with = "decimal")]
    pub multiplicity: BigInt,
    pub profile: LeafProfile,
    pub central_marking: Option<usize>,
    pub leaves: Vec<LeafRecord>,
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
    pub ends: Vec<EndRecord>,
    pub markings: Vec<MarkingRecord>,
}

impl CurveRecord {
    /// Identifies the curve up to relabelling ends of equal ray and weight.
    pub fn unlabelled_key(&self) -> String {
        let mut ends: Vec<(usize, Ray, u32)> = self.ends.iter().map(|e| (e.vertex, e.ray, e.weight)).collect();
        ends.sort();
        let vertices: Vec<_> = self.vertices.iter().map(|v| (&v.x, &v.y)).collect();
        serde_json::to_string(&(self.curve_type, &vertices, &self.edges, &ends, &self.markings)).expect("serializable")
    }
}
