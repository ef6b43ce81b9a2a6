//! Independent counts: a structured oracle over all central-vertex curves
//! for arbitrary generic points, a from-scratch oracle over every
//! trivalent combinatorial type, and the combinatorial identity checks.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::enumeration::{point_list, BreakdownEntry, CountReport, EnumError};
use crate::exactmath::{binomial_comb, binomial_gen, binomial_rat, decimal, det2, rat, rat_from_pair, rat_to_pair, sign_power, BigRat, Vec2Q, Vec2Z};
use crate::formula::{baseline_profile, is_first_case, trop_tev};
use crate::model::{ContactData, End, Ray};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("configuration is not generic: {0}")]
    NonGeneric(String),
    #[error("target is not generic: a solved length is zero")]
    NonGenericTarget,
    #[error("{leaves} legs exceed the limit of {max} for the trivalent-type oracle")]
    TooLarge { leaves: usize, max: usize },
    #[error("labelled sum {sum} is not divisible by the symmetry factor {symmetry}")]
    NonIntegral { sum: BigInt, symmetry: BigInt },
    #[error(transparent)]
    Config(#[from] EnumError),
}

impl From<OracleError> for String {
    fn from(e: OracleError) -> String {
        e.to_string()
    }
}

fn report(g: &ContactData, sum: BigInt, curves: BigInt, seed: Option<u64>, breakdown: Vec<BreakdownEntry>) -> Result<CountReport, OracleError> {
    CountReport::new(g, sum, curves, seed, breakdown).map_err(|e| match e {
        EnumError::NonIntegral { sum, symmetry } => OracleError::NonIntegral { sum, symmetry },
        other => OracleError::Config(other),
    })
}

/// Distinct end types `(ray, weight)` with multiplicities.
struct EndTypes {
    rays: Vec<Ray>,
    weights: Vec<i64>,
    vectors: Vec<Vec2Z>,
    counts: Vec<u8>,
}

impl EndTypes {
    fn of(g: &ContactData) -> Self {
        let mut t = EndTypes { rays: vec![], weights: vec![], vectors: vec![], counts: vec![] };
        for e in g.degree().ends {
            match (0..t.rays.len()).find(|&i| t.rays[i] == e.ray && t.weights[i] == e.weight as i64) {
                Some(i) => t.counts[i] += 1,
                None => {
                    t.rays.push(e.ray);
                    t.weights.push(e.weight as i64);
                    t.vectors.push(e.vector);
                    t.counts.push(1);
                }
            }
        }
        t
    }

    fn len(&self) -> usize {
        self.rays.len()
    }
}

/// Exact integer arithmetic for the structured oracle: `i128` when the
/// scaled coordinates are small, big integers otherwise.
trait Coord: Clone + Ord + Signed + From<i64> + std::fmt::Display {}
impl Coord for i128 {}
impl Coord for BigInt {}

type Pt<T> = [T; 2];

fn det_t<T: Coord>(u: &Pt<T>, v: &Pt<T>) -> T {
    u[0].clone() * v[1].clone() - u[1].clone() * v[0].clone()
}

fn lift<T: Coord>(v: Vec2Z) -> Pt<T> {
    [T::from(v.x), T::from(v.y)]
}

fn sub_t<T: Coord>(u: &Pt<T>, v: &Pt<T>) -> Pt<T> {
    [u[0].clone() - v[0].clone(), u[1].clone() - v[1].clone()]
}

/// For a fixed centre: which ordered end-type pairs `(inner, outer)` can
/// serve each remaining marking with a two-vertex leaf.
struct LeafTable {
    /// `fits[marking][inner * T + outer]`
    fits: Vec<Vec<bool>>,
    t: usize,
}

impl LeafTable {
    fn build<T: Coord>(g: &ContactData, types: &EndTypes, v: &Pt<T>, points: &[&Pt<T>]) -> Result<Self, OracleError> {
        let fan = g.fan();
        let t = types.len();
        let mut fits = Vec::with_capacity(points.len());
        for x in points {
            let d = sub_t(x, v);
            // per ray pair: x - v = p' u_i + q' u_j with (p', q') scaled by
            // |det(u_i, u_j)| > 0
            let mut coords: [[Option<(T, T)>; 4]; 4] = Default::default();
            for ri in Ray::ALL {
                for rj in Ray::ALL {
                    let (ui, uj) = (fan.ray(ri), fan.ray(rj));
                    let e = det2(ui, uj);
                    if e != 0 {
                        let sign = T::from(e.signum());
                        coords[ri.index()][rj.index()] = Some((det_t(&d, &lift(uj)) * sign.clone(), det_t(&lift(ui), &d) * sign));
                    }
                }
            }
            let mut row = vec![false; t * t];
            for i in 0..t {
                for j in 0..t {
                    let Some((p, q)) = &coords[types.rays[i].index()][types.rays[j].index()] else { continue };
                    // need 0 < p / w_i < q / w_j
                    let lhs = p.clone() * T::from(types.weights[j]);
                    let rhs = q.clone() * T::from(types.weights[i]);
                    if (p.is_zero() && !q.is_negative()) || (lhs == rhs && !p.is_negative()) {
                        return Err(OracleError::NonGeneric(format!("point ({}, {}) on a leaf boundary", x[0], x[1])));
                    }
                    row[i * t + j] = p.is_positive() && lhs < rhs;
                }
            }
            fits.push(row);
        }
        Ok(LeafTable { fits, t })
    }
}

type Memo = HashMap<(usize, Vec<u8>), (BigInt, BigInt)>;

/// Weighted and plain numbers of labelled ways to serve markings
/// `idx..` with the remaining ends.
fn leaf_dp(types: &EndTypes, table: &LeafTable, idx: usize, counts: &mut Vec<u8>, memo: &mut Memo) -> (BigInt, BigInt) {
    if idx == table.fits.len() {
        return (BigInt::one(), BigInt::one());
    }
    if let Some(hit) = memo.get(&(idx, counts.clone())) {
        return hit.clone();
    }
    let t = table.t;
    let (mut sum, mut num) = (BigInt::zero(), BigInt::zero());
    for i in 0..t {
        for j in 0..t {
            if !table.fits[idx][i * t + j] || counts[i] == 0 || counts[j] == 0 || i == j {
                continue;
            }
            let ways = BigInt::from(counts[i]) * counts[j];
            let det = det2(types.vectors[i], types.vectors[j]).abs();
            counts[i] -= 1;
            counts[j] -= 1;
            let (s, c) = leaf_dp(types, table, idx + 1, counts, memo);
            counts[i] += 1;
            counts[j] += 1;
            sum += &ways * det * s;
            num += ways * c;
        }
    }
    memo.insert((idx, counts.clone()), (sum.clone(), num.clone()));
    (sum, num)
}

/// Counts central-vertex curves through arbitrary generic points: every
/// marking as the central marking (type A) and every pair of markings on
/// one-end leaves (type B), with all end assignments.
pub fn structured_oracle(g: &ContactData, points: &[Vec2Q], seed: Option<u64>) -> Result<CountReport, OracleError> {
    assert_eq!(points.len(), g.n(), "one point per marking");
    // A homothety changes nothing; scaling by the common denominator and
    // by `a` makes every point and every type-B centre integral.
    let scale = points.iter().fold(BigInt::from(g.a()), |acc, p| acc.lcm(p.x.denom()).lcm(p.y.denom()));
    let scaled: Vec<Pt<BigInt>> = points.iter().map(|p| [(&p.x * BigRat::from_integer(scale.clone())).to_integer(), (&p.y * BigRat::from_integer(scale.clone())).to_integer()]).collect();
    let small: Option<Vec<Pt<i128>>> = scaled.iter().map(|p| Some([small_coord(&p[0])?, small_coord(&p[1])?])).collect();
    match small {
        Some(pts) => structured_count(g, &pts, seed),
        None => structured_count(g, &scaled, seed),
    }
}

fn small_coord(v: &BigInt) -> Option<i128> {
    v.to_i128().filter(|x| x.abs() < 1i128 << 60)
}

fn structured_count<T: Coord>(g: &ContactData, points: &[Pt<T>], seed: Option<u64>) -> Result<CountReport, OracleError> {
    let types = EndTypes::of(g);
    let fan = g.fan();
    let n = g.n();
    let (mut total, mut curves) = (BigInt::zero(), BigInt::zero());
    let mut breakdown = Vec::new();
    let mut push = |key: String, s: BigInt, c: BigInt| {
        if !c.is_zero() {
            total += &s;
            curves += &c;
            breakdown.push(BreakdownEntry { key, labelled_curves: c, labelled_sum: s });
        }
    };

    for k in 0..n {
        let rest: Vec<&Pt<T>> = (0..n).filter(|&i| i != k).map(|i| &points[i]).collect();
        let table = LeafTable::build(g, &types, &points[k], &rest)?;
        let (s, c) = leaf_dp(&types, &table, 0, &mut types.counts.clone(), &mut Memo::new());
        push(format!("A centre x{}", k + 1), s, c);
    }

    for j in 0..n {
        for k in j + 1..n {
            for rj in Ray::ALL {
                for rk in Ray::ALL {
                    // x_j - x_k = s_j r_j - s_k r_k, centre v = x_j - s_j r_j
                    let (uj, uk) = (fan.ray(rj), fan.ray(rk));
                    let d = det2(uj, -uk);
                    if d == 0 {
                        continue;
                    }
                    let delta = sub_t(&points[j], &points[k]);
                    let num_j = det_t(&delta, &lift(-uk));
                    let num_k = det_t(&lift(uj), &delta);
                    if num_j.is_zero() || num_k.is_zero() {
                        return Err(OracleError::NonGeneric(format!("x{} and x{} share a line", j + 1, k + 1)));
                    }
                    let dt = T::from(d);
                    if (num_j.clone() * dt.clone()).is_negative() || (num_k * dt.clone()).is_negative() {
                        continue;
                    }
                    let sj = num_j / dt;
                    let v = [points[j][0].clone() - sj.clone() * T::from(uj.x), points[j][1].clone() - sj * T::from(uj.y)];
                    let rest: Vec<&Pt<T>> = (0..n).filter(|&i| i != j && i != k).map(|i| &points[i]).collect();
                    let table = LeafTable::build(g, &types, &v, &rest)?;
                    let mut memo = Memo::new();
                    let (mut s_all, mut c_all) = (BigInt::zero(), BigInt::zero());
                    for tj in (0..types.len()).filter(|&t| types.rays[t] == rj) {
                        for tk in (0..types.len()).filter(|&t| types.rays[t] == rk) {
                            let mut counts = types.counts.clone();
                            let ways = BigInt::from(counts[tj]) * counts[tk];
                            let det = det2(types.vectors[tj], types.vectors[tk]).abs();
                            counts[tj] -= 1;
                            counts[tk] -= 1;
                            let (s, c) = leaf_dp(&types, &table, 0, &mut counts, &mut memo);
                            s_all += &ways * det * s;
                            c_all += ways * c;
                        }
                    }
                    push(format!("B centre x{}:{rj} x{}:{rk}", j + 1, k + 1), s_all, c_all);
                }
            }
        }
    }
    report(g, total, curves, seed, breakdown)
}

/// Structured oracle on fresh random integer points drawn from `seed`.
pub fn structured_oracle_seeded(g: &ContactData, seed: u64) -> Result<CountReport, OracleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bound = 1i64 << 20;
    let mut last = String::new();
    for _ in 0..64 {
        let pts: Vec<Vec2Q> = (0..g.n()).map(|_| Vec2Q::from_ints(rng.gen_range(-bound..=bound), rng.gen_range(-bound..=bound))).collect();
        match structured_oracle(g, &pts, Some(seed)) {
            Err(OracleError::NonGeneric(why)) => last = why,
            other => return other,
        }
    }
    Err(OracleError::NonGeneric(last))
}

/// Which pair the marking `p_1` is split with in the quartet
/// `{p_1, p_2, p_3, p_i}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Split {
    /// `12|3i`
    P1P2,
    /// `13|2i`
    P1P3,
    /// `1i|23`
    P1Pi,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::P1P2, Split::P1P3, Split::P1Pi];

    /// The two pairs as leaf indices (0-based) for marking `i` (1-based).
    fn pairs(self, i: usize) -> ([usize; 2], [usize; 2]) {
        let d = i - 1;
        match self {
            Split::P1P2 => ([0, 1], [2, d]),
            Split::P1P3 => ([0, 2], [1, d]),
            Split::P1Pi => ([0, d], [1, 2]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuartetConstraint {
    pub i: usize,
    pub split: Split,
    pub lambda: [String; 2],
}

/// Generic point in the target of the evaluation-times-forgetful map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenericTarget {
    #[serde(with = "point_list")]
    pub points: Vec<Vec2Q>,
    pub quartets: Vec<QuartetConstraint>,
    pub seed: u64,
}

/// Integer points and lengths; every quartet uses `split`, or a random
/// split when `None`.
pub fn generic_target(g: &ContactData, seed: u64, split: Option<Split>) -> GenericTarget {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bound = 1i64 << 16;
    let points = (0..g.n()).map(|_| Vec2Q::from_ints(rng.gen_range(-bound..=bound), rng.gen_range(-bound..=bound))).collect();
    let quartets = (4..=g.n())
        .map(|i| {
            let s = split.unwrap_or_else(|| Split::ALL[rng.gen_range(0..3)]);
            QuartetConstraint { i, split: s, lambda: rat_to_pair(&rat(rng.gen_range(1..=bound))) }
        })
        .collect();
    GenericTarget { points, quartets, seed }
}

#[derive(Debug, Clone, Copy)]
pub struct FullOracleOptions {
    pub max_leaves: usize,
    /// Skip trees with an end attached to another end's leg: the edge
    /// above such a cherry appears in no equation, so the determinant is 0.
    pub prune_end_cherries: bool,
}

impl Default for FullOracleOptions {
    fn default() -> Self {
        FullOracleOptions { max_leaves: 10, prune_end_cherries: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FullReport {
    pub report: CountReport,
    /// `(2N - 5)!!` labelled trivalent trees with `N` legs.
    #[serde(with = "decimal")]
    pub type_space: BigInt,
    pub trees_evaluated: u64,
    pub nonsingular: u64,
    pub accepted: u64,
    /// The same degree with every length scaled towards zero: types whose
    /// lengths stay positive for all small scalings.
    pub limit: CountReport,
    pub limit_accepted: u64,
    /// Limit types that, after contracting the edges whose length tends to
    /// zero, have one n-valent vertex with one marking per branch and every
    /// other vertex trivalent.
    pub central_after_contraction: u64,
}

pub fn double_factorial(k: i64) -> BigInt {
    let mut acc = BigInt::one();
    let mut i = k;
    while i > 1 {
        acc *= i;
        i -= 2;
    }
    acc
}

/// Labelled trivalent tree: leaves `0..N`, internal vertices from `N`.
#[derive(Clone)]
struct Tree {
    edges: Vec<(u8, u8)>,
    next: u8,
}

impl Tree {
    fn insert(&self, e: usize, leaf: u8) -> Tree {
        let (u, v) = self.edges[e];
        let w = self.next;
        let mut edges = self.edges.clone();
        edges[e] = (u, w);
        edges.push((w, v));
        edges.push((w, leaf));
        Tree { edges, next: w + 1 }
    }

    fn adjacency(&self) -> Vec<Vec<u8>> {
        let mut adj = vec![Vec::with_capacity(3); self.next as usize];
        for &(u, v) in &self.edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        adj
    }

    fn distances(adj: &[Vec<u8>], from: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; adj.len()];
        let mut stack = vec![from];
        dist[from] = 0;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if dist[v as usize] == u32::MAX {
                    dist[v as usize] = dist[u] + 1;
                    stack.push(v as usize);
                }
            }
        }
        dist
    }

    /// Split of the quartet `(0, 1, 2, d)` by the four-point condition.
    fn quartet_split(&self, d: usize) -> Split {
        let adj = self.adjacency();
        let (d0, d1, d2) = (Self::distances(&adj, 0), Self::distances(&adj, 1), Self::distances(&adj, 2));
        let s12 = d0[1] + d2[d];
        let s13 = d0[2] + d1[d];
        let s1i = d0[d] + d1[2];
        if s12 < s13 && s12 < s1i {
            Split::P1P2
        } else if s13 < s1i {
            Split::P1P3
        } else {
            Split::P1Pi
        }
    }
}

/// Fraction-free Gaussian elimination on `[A | b]`; returns the last
/// pivot `D = +-det A` and numerators `N` with `x = N / D`, or `None` for
/// singular `A` or on overflow (when `checked`).
trait Ring: Clone + PartialEq {
    fn r_zero() -> Self;
    fn r_one() -> Self;
    fn r_is_zero(&self) -> bool;
    fn r_mul(&self, o: &Self) -> Option<Self>;
    fn r_sub(&self, o: &Self) -> Option<Self>;
    fn r_div_exact(&self, o: &Self) -> Option<Self>;
}

impl Ring for i128 {
    fn r_zero() -> Self {
        0
    }
    fn r_one() -> Self {
        1
    }
    fn r_is_zero(&self) -> bool {
        *self == 0
    }
    fn r_mul(&self, o: &Self) -> Option<Self> {
        self.checked_mul(*o)
    }
    fn r_sub(&self, o: &Self) -> Option<Self> {
        self.checked_sub(*o)
    }
    fn r_div_exact(&self, o: &Self) -> Option<Self> {
        debug_assert_eq!(self % o, 0);
        self.checked_div(*o)
    }
}

impl Ring for BigInt {
    fn r_zero() -> Self {
        Zero::zero()
    }
    fn r_one() -> Self {
        One::one()
    }
    fn r_is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn r_mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn r_sub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn r_div_exact(&self, o: &Self) -> Option<Self> {
        debug_assert!(Zero::is_zero(&(self % o)));
        Some(self / o)
    }
}

enum Solve<T> {
    Singular,
    Overflow,
    Solved { pivot: T, numerators: Vec<T> },
}

fn bareiss<T: Ring>(mut m: Vec<Vec<T>>) -> Solve<T> {
    let n = m.len();
    let mut prev = T::r_one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&r| !m[r][k].r_is_zero()) else {
            return Solve::Singular;
        };
        m.swap(k, p);
        for i in k + 1..n {
            for j in k + 1..=n {
                let v = m[i][j].r_mul(&m[k][k]).and_then(|a| m[i][k].r_mul(&m[k][j]).and_then(|b| a.r_sub(&b))).and_then(|x| x.r_div_exact(&prev));
                match v {
                    Some(v) => m[i][j] = v,
                    None => return Solve::Overflow,
                }
            }
            m[i][k] = T::r_zero();
        }
        prev = m[k][k].clone();
    }
    let pivot = m[n - 1][n - 1].clone();
    let mut numerators = vec![T::r_zero(); n];
    for i in (0..n).rev() {
        let mut acc = match pivot.r_mul(&m[i][n]) {
            Some(v) => v,
            None => return Solve::Overflow,
        };
        for j in i + 1..n {
            match m[i][j].r_mul(&numerators[j]).and_then(|t| acc.r_sub(&t)) {
                Some(v) => acc = v,
                None => return Solve::Overflow,
            }
        }
        match acc.r_div_exact(&m[i][i]) {
            Some(v) => numerators[i] = v,
            None => return Solve::Overflow,
        }
    }
    Solve::Solved { pivot, numerators }
}

/// Exact solve of an integer system: `(|det A|, x * D, D)` as big
/// integers, `None` when singular.
fn solve_exact(a: &[Vec<i64>], b: &[BigInt]) -> Option<(BigInt, Vec<BigInt>, BigInt)> {
    let small: Option<Vec<Vec<i128>>> =
        a.iter().zip(b).map(|(row, bi)| bi.to_i128().map(|bv| row.iter().map(|&x| x as i128).chain([bv]).collect())).collect();
    if let Some(m) = small {
        match bareiss(m) {
            Solve::Singular => return None,
            Solve::Solved { pivot, numerators } => {
                return Some((BigInt::from(pivot).abs(), numerators.into_iter().map(BigInt::from).collect(), BigInt::from(pivot)));
            }
            Solve::Overflow => {}
        }
    }
    let m: Vec<Vec<BigInt>> = a.iter().zip(b).map(|(row, bi)| row.iter().map(|&x| BigInt::from(x)).chain([bi.clone()]).collect()).collect();
    match bareiss(m) {
        Solve::Singular => None,
        Solve::Solved { pivot, numerators } => Some((pivot.abs(), numerators, pivot)),
        Solve::Overflow => unreachable!("big integers do not overflow"),
    }
}

struct FullContext<'a> {
    n: usize,
    ends: Vec<End>,
    quartets: Vec<(usize, Split)>,
    /// Right-hand side scaled to integers: `2n` coordinates then lambdas.
    rhs: Vec<BigInt>,
    /// The same with every lambda set to zero.
    rhs_points: Vec<BigInt>,
    opts: FullOracleOptions,
    g: &'a ContactData,
}

#[derive(Default)]
struct FullTally {
    sum: BigInt,
    evaluated: u64,
    nonsingular: u64,
    accepted: u64,
    limit_sum: BigInt,
    limit_accepted: u64,
    central: u64,
    non_generic: bool,
}

impl FullContext<'_> {
    fn leaves(&self) -> usize {
        self.n + self.ends.len()
    }

    fn grow(&self, tree: &Tree, leaf: usize, tally: &mut FullTally) {
        if tally.non_generic {
            return;
        }
        if leaf == self.leaves() {
            self.evaluate(tree, tally);
            return;
        }
        for e in 0..tree.edges.len() {
            if leaf >= self.n && self.opts.prune_end_cherries {
                let (u, v) = tree.edges[e];
                let is_end = |x: u8| (x as usize) >= self.n && (x as usize) < self.leaves();
                if is_end(u) || is_end(v) {
                    continue;
                }
            }
            let next = tree.insert(e, leaf as u8);
            if leaf < self.n && leaf >= 3 {
                let want = self.quartets.iter().find(|q| q.0 == leaf + 1).map(|q| q.1).expect("quartet for every i >= 4");
                if next.quartet_split(leaf) != want {
                    continue;
                }
            }
            self.grow(&next, leaf + 1, tally);
        }
    }

    fn evaluate(&self, tree: &Tree, tally: &mut FullTally) {
        tally.evaluated += 1;
        let nl = self.leaves();
        let adj = tree.adjacency();
        let nv = adj.len();
        let root = adj[0][0] as usize;
        let mut parent = vec![usize::MAX; nv];
        let mut order = Vec::with_capacity(nv);
        parent[root] = root;
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            order.push(u);
            for &v in &adj[u] {
                if parent[v as usize] == usize::MAX {
                    parent[v as usize] = u;
                    stack.push(v as usize);
                }
            }
        }
        let mut below = vec![Vec2Z::ZERO; nv];
        for (i, e) in self.ends.iter().enumerate() {
            below[self.n + i] = e.vector;
        }
        for &u in order.iter().rev() {
            if u != root {
                let b = below[u];
                below[parent[u]] += b;
            }
        }
        // columns: root x, root y, then one per internal non-root vertex
        let mut col = vec![usize::MAX; nv];
        let mut vertex_of_col = Vec::with_capacity(nv);
        let mut ncols = 2;
        for u in nl..nv {
            if u != root {
                col[u] = ncols;
                vertex_of_col.push(u);
                ncols += 1;
            }
        }
        let size = 3 * self.n - 3;
        debug_assert_eq!(ncols, size);
        let mut a = vec![vec![0i64; size]; size];
        for k in 0..self.n {
            let (rx, ry) = (2 * k, 2 * k + 1);
            a[rx][0] = 1;
            a[ry][1] = 1;
            let mut u = parent[k];
            while u != root {
                let d = below[u];
                a[rx][col[u]] = d.x;
                a[ry][col[u]] = d.y;
                u = parent[u];
            }
        }
        let path_up = |mut u: usize, stop: usize| {
            let mut out = Vec::new();
            while u != stop {
                out.push(u);
                u = parent[u];
            }
            out
        };
        let lca = |x: usize, y: usize| {
            let ax = path_up(x, root);
            let mut u = y;
            loop {
                if u == root || ax.contains(&u) {
                    return u;
                }
                u = parent[u];
            }
        };
        let path_edges = |x: usize, y: usize| {
            let l = lca(x, y);
            let mut p = path_up(x, l);
            p.extend(path_up(y, l));
            p
        };
        for (qi, &(i, split)) in self.quartets.iter().enumerate() {
            let ([x, y], [z, w]) = split.pairs(i);
            let pxz = path_edges(x, z);
            let pyw = path_edges(y, w);
            let row = 2 * self.n + qi;
            for &u in pxz.iter().filter(|u| pyw.contains(u) && **u >= nl) {
                a[row][col[u]] = 1;
            }
        }
        let Some((det, num, pivot)) = solve_exact(&a, &self.rhs) else {
            return;
        };
        tally.nonsingular += 1;
        let mut positive = true;
        for x in &num[2..] {
            if x.is_zero() {
                tally.non_generic = true;
                return;
            }
            positive &= x.sign() == pivot.sign();
        }
        if positive {
            tally.accepted += 1;
            tally.sum += &det;
        }
        // lengths at lambda = t * lambda are N0 + t * N1 over the same pivot;
        // accept for all small t > 0 and contract what vanishes at t = 0
        let Some((_, num0, pivot0)) = solve_exact(&a, &self.rhs_points) else {
            unreachable!("same matrix")
        };
        debug_assert_eq!(pivot0, pivot);
        let mut collapsed = Vec::new();
        for (c, (full, zero)) in num[2..].iter().zip(&num0[2..]).enumerate() {
            let lead = if zero.is_zero() { full - zero } else { zero.clone() };
            if lead.is_zero() {
                tally.non_generic = true;
                return;
            }
            if lead.sign() != pivot.sign() {
                return;
            }
            if zero.is_zero() {
                collapsed.push(vertex_of_col[c]);
            }
        }
        tally.limit_accepted += 1;
        tally.limit_sum += &det;
        if self.contracts_to_central(tree, &parent, root, &collapsed) {
            tally.central += 1;
        }
    }

    fn contracts_to_central(&self, tree: &Tree, parent: &[usize], root: usize, middle: &[usize]) -> bool {
        let nl = self.leaves();
        let nv = tree.next as usize;
        // union-find over internal vertices; `middle` lists collapsed edges by child
        let mut rep: Vec<usize> = (0..nv).collect();
        fn find(rep: &mut Vec<usize>, x: usize) -> usize {
            let mut r = x;
            while rep[r] != r {
                r = rep[r];
            }
            rep[x] = r;
            r
        }
        for &u in middle {
            let (a, b) = (find(&mut rep, u), find(&mut rep, parent[u]));
            rep[a] = b;
        }
        let mut id = HashMap::new();
        let r0 = find(&mut rep, root);
        id.insert(r0, 0usize);
        for u in nl..nv {
            let r = find(&mut rep, u);
            let next = id.len();
            id.entry(r).or_insert(next);
        }
        let k = id.len();
        // adjacency between classes; legs kept separately
        let mut adj = vec![Vec::new(); k];
        for u in nl..nv {
            if u != root && !middle.contains(&u) {
                let (a, b) = (id[&find(&mut rep, u)], id[&find(&mut rep, parent[u])]);
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        let mut markings = vec![0usize; k];
        let mut end_legs = vec![0usize; k];
        for leaf in 0..nl {
            let v = id[&find(&mut rep, parent[leaf])];
            if leaf < self.n {
                markings[v] += 1;
            } else {
                end_legs[v] += 1;
            }
        }
        let valence = |v: usize| adj[v].len() + markings[v] + end_legs[v];
        let branch_markings = |from: usize, start: usize| {
            let mut stack = vec![(start, from)];
            let mut count = 0;
            while let Some((u, p)) = stack.pop() {
                count += markings[u];
                stack.extend(adj[u].iter().filter(|&&w| w != p).map(|&w| (w, u)));
            }
            count
        };
        // one n-valent vertex whose every branch holds exactly one marking,
        // everything else trivalent
        (0..k).any(|v| {
            valence(v) == self.n
                && end_legs[v] == 0
                && adj[v].iter().all(|&w| branch_markings(v, w) == 1)
                && (0..k).all(|u| u == v || valence(u) == 3)
        })
    }
}

/// Degree of the evaluation-times-forgetful map at a generic target,
/// summed over every trivalent combinatorial type.
pub fn full_oracle(g: &ContactData, target: &GenericTarget, opts: FullOracleOptions) -> Result<FullReport, OracleError> {
    let n = g.n();
    let ends = g.degree().ends;
    let leaves = n + ends.len();
    if leaves > opts.max_leaves {
        return Err(OracleError::TooLarge { leaves, max: opts.max_leaves });
    }
    let lambdas: Vec<BigRat> = target.quartets.iter().map(|q| rat_from_pair(&q.lambda).expect("well-formed length")).collect();
    let mut values: Vec<BigRat> = target.points.iter().flat_map(|p| [p.x.clone(), p.y.clone()]).collect();
    values.extend(lambdas);
    let scale = values.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let rhs: Vec<BigInt> = values.iter().map(|v| (v * BigRat::from_integer(scale.clone())).to_integer()).collect();
    let mut rhs_points = rhs.clone();
    rhs_points[2 * n..].iter_mut().for_each(|v| *v = BigInt::zero());
    let ctx = FullContext { n, ends, quartets: target.quartets.iter().map(|q| (q.i, q.split)).collect(), rhs, rhs_points, opts, g };

    let start = Tree { edges: vec![(0, leaves as u8), (1, leaves as u8), (2, leaves as u8)], next: leaves as u8 + 1 };
    let mut tally = FullTally::default();
    ctx.grow(&start, 3, &mut tally);
    if tally.non_generic {
        return Err(OracleError::NonGenericTarget);
    }
    let limit = report(ctx.g, tally.limit_sum, BigInt::from(tally.limit_accepted), Some(target.seed), vec![])?;
    let report = report(ctx.g, tally.sum, BigInt::from(tally.accepted), Some(target.seed), vec![])?;
    Ok(FullReport {
        report,
        limit,
        limit_accepted: tally.limit_accepted,
        type_space: double_factorial(2 * leaves as i64 - 5),
        trees_evaluated: tally.evaluated,
        nonsingular: tally.nonsingular,
        accepted: tally.accepted,
        central_after_contraction: tally.central,
    })
}

/// Full oracle with re-drawn targets until one is generic.
pub fn full_oracle_seeded(g: &ContactData, seed: u64, split: Option<Split>, opts: FullOracleOptions) -> Result<FullReport, OracleError> {
    let mut last = OracleError::NonGenericTarget;
    for attempt in 0..16u64 {
        let target = generic_target(g, seed.wrapping_add(attempt.wrapping_mul(0x9e37_79b9)), split);
        match full_oracle(g, &target, opts) {
            Err(OracleError::NonGenericTarget) => last = OracleError::NonGenericTarget,
            other => return other,
        }
    }
    Err(last)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvarianceReport {
    #[serde(with = "decimal::vec")]
    pub structured: Vec<BigInt>,
    /// Full-oracle totals per split choice, when the instance is small
    /// enough and has at least one quartet.
    pub full: Vec<(Split, String)>,
    pub consistent: bool,
}

/// Structured totals over `trials` seeds and, when affordable, full totals
/// for each uniform split choice.
pub fn invariance_check(g: &ContactData, trials: u64, seed: u64, opts: FullOracleOptions) -> Result<InvarianceReport, OracleError> {
    let structured = (0..trials).map(|t| structured_oracle_seeded(g, seed + t).map(|r| r.trop_tev)).collect::<Result<Vec<_>, _>>()?;
    let mut full = Vec::new();
    if g.n() >= 4 && g.n() + g.m() <= opts.max_leaves {
        for s in Split::ALL {
            full.push((s, full_oracle_seeded(g, seed, Some(s), opts)?.report.trop_tev));
        }
    }
    let reference = structured.first().cloned().or_else(|| full.first().map(|f| f.1.clone()));
    let consistent = structured.iter().chain(full.iter().map(|f| &f.1)).all(|v| Some(v) == reference.as_ref());
    Ok(InvarianceReport { structured, full: full.into_iter().map(|(s, v)| (s, v.to_string())).collect(), consistent })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub reflection_checked: usize,
    pub complement_checked: usize,
    /// Pairs outside the stated domain `x > 0`, not checked.
    pub complement_skipped: usize,
    pub vandermonde_checked: usize,
    pub lemma_checked: usize,
    /// Second-case instances with a negative baseline count; each must
    /// have degree zero.
    pub lemma_skipped: usize,
    pub failures: Vec<String>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn binom_any(x: i64, k: i64) -> BigInt {
    if k < 0 {
        BigInt::zero()
    } else {
        binomial_gen(x, k as u64)
    }
}

/// Checks `C(x,y) = (-1)^y C(y-x-1, y)` on the whole range,
/// `C(x,y) = (-1)^(x-y) C(-y-1, x-y)` for `x > 0`, Vandermonde's identity
/// with rational arguments for `N <= n_max`, and the type-split sum
/// against the closed binomial on every second-case instance in `grid`
/// whose baseline counts are non-negative.
pub fn identity_check(x_range: (i64, i64), y_range: (i64, i64), n_max: u64, grid: &[ContactData], seed: u64) -> IdentityReport {
    let mut r = IdentityReport {
        reflection_checked: 0,
        complement_checked: 0,
        complement_skipped: 0,
        vandermonde_checked: 0,
        lemma_checked: 0,
        lemma_skipped: 0,
        failures: vec![],
    };
    for x in x_range.0..=x_range.1 {
        for y in y_range.0..=y_range.1 {
            let lhs = binom_any(x, y);
            r.reflection_checked += 1;
            if lhs != sign_power(y) * binom_any(y - x - 1, y) {
                r.failures.push(format!("reflection fails at ({x}, {y})"));
            }
            if x > 0 {
                r.complement_checked += 1;
                if lhs != sign_power(x - y) * binom_any(-y - 1, x - y) {
                    r.failures.push(format!("complement fails at ({x}, {y})"));
                }
            } else {
                r.complement_skipped += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for big_n in 0..=n_max {
        for _ in 0..8 {
            let x = BigRat::new(rng.gen_range(-50i64..=50).into(), rng.gen_range(1i64..=12).into());
            let y = BigRat::new(rng.gen_range(-50i64..=50).into(), rng.gen_range(1i64..=12).into());
            let lhs: BigRat = (0..=big_n).map(|k| binomial_rat(&x, k) * binomial_rat(&y, big_n - k)).sum();
            r.vandermonde_checked += 1;
            if lhs != binomial_rat(&(&x + &y), big_n) {
                r.failures.push(format!("Vandermonde fails at N={big_n}, x={x}, y={y}"));
            }
        }
    }
    for g in grid {
        if is_first_case(g) {
            continue;
        }
        let p = baseline_profile(g);
        if p.alpha < 1 || p.beta < 0 || p.gamma < 0 {
            // a negative count forces a vanishing degree
            r.lemma_skipped += 1;
            if !trop_tev(g).value.is_zero() {
                r.failures.push(format!("negative baseline counts but nonzero degree for {g}"));
            }
            continue;
        }
        let sum: BigInt = (0..=p.beta).map(|k| binomial_comb(p.alpha + k - 1, p.alpha - 1) * binomial_comb(p.beta + p.gamma - k, p.beta - k)).sum();
        let closed = binomial_comb(g.n() as i64 - 1 - g.len_of(Ray::N4), g.len_of(Ray::N2));
        r.lemma_checked += 1;
        if sum != closed {
            r.failures.push(format!("type-split sum {sum} != {closed} for {g}"));
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mixed() -> ContactData {
        ContactData::hirzebruch(1, 4, [&[1, 1, 1], &[1], &[3], &[4]]).unwrap()
    }

    #[test]
    fn bareiss_solves_small_systems() {
        let a = vec![vec![2i64, 1], vec![1, 3]];
        let (det, num, pivot) = solve_exact(&a, &[BigInt::from(3), BigInt::from(5)]).unwrap();
        assert_eq!(det, 5.into());
        // x = (4/5, 7/5)
        assert_eq!(BigRat::new(num[0].clone(), pivot.clone()), BigRat::new(4.into(), 5.into()));
        assert_eq!(BigRat::new(num[1].clone(), pivot), BigRat::new(7.into(), 5.into()));
        assert!(solve_exact(&[vec![1, 2], vec![2, 4]], &[BigInt::from(1), BigInt::from(2)]).is_none());
        // needs a row swap
        let (det, _, _) = solve_exact(&[vec![0, 1], vec![1, 0]], &[BigInt::from(1), BigInt::from(1)]).unwrap();
        assert_eq!(det, 1.into());
    }

    #[test]
    fn overflow_falls_back_to_big_integers() {
        let big = 1i64 << 62;
        let a = vec![vec![big, 1, 0], vec![1, big, 1], vec![0, 1, big]];
        let b = [BigInt::from(big), BigInt::from(big), BigInt::from(big)];
        let (det, _, _) = solve_exact(&a, &b).unwrap();
        let bb = BigInt::from(big);
        assert_eq!(det, (&bb * &bb * &bb - &bb - &bb).abs());
    }

    #[test]
    fn structured_matches_formula() {
        for seed in 0..3 {
            assert_eq!(structured_oracle_seeded(&mixed(), seed).unwrap().trop_tev, 24.into());
        }
        let weighted = ContactData::hirzebruch(2, 5, [&[1, 2], &[2], &[1, 1, 1], &[4, 4]]).unwrap();
        assert_eq!(structured_oracle_seeded(&weighted, 7).unwrap().trop_tev, 512.into());
    }

    #[test]
    fn split_pairs() {
        assert_eq!(Split::P1P2.pairs(5), ([0, 1], [2, 4]));
        assert_eq!(Split::P1Pi.pairs(4), ([0, 3], [1, 2]));
        assert_eq!(double_factorial(15), 2_027_025.into());
    }

    #[test]
    fn small_full_oracle_and_pruning() {
        let toy = ContactData::hirzebruch(1, 3, [&[1], &[1], &[1], &[2]]).unwrap();
        let pruned = full_oracle_seeded(&toy, 1, None, FullOracleOptions::default()).unwrap();
        let unpruned = full_oracle_seeded(&toy, 1, None, FullOracleOptions { prune_end_cherries: false, ..Default::default() }).unwrap();
        assert_eq!(pruned.report.labelled_sum, unpruned.report.labelled_sum);
        assert_eq!(unpruned.trees_evaluated, 945);
        assert_eq!(pruned.report.trop_tev, trop_tev(&toy).value);
    }

    #[test]
    fn identities() {
        let r = identity_check((-10, 10), (0, 10), 6, &[mixed()], 0);
        assert!(r.passed(), "{:?}", r.failures);
        assert_eq!(r.lemma_checked, 1);
        assert_eq!(r.complement_skipped, 11 * 11);
    }
}
