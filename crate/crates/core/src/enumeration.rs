//! Constructive enumeration of the contributing curves for the standard
//! point placements, with the exclusion of every other central-vertex
//! placement re-checked as an audit.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curves::{central_map, ContributingCurve, CurveError, CurveRecord, CurveType, LeafSpec};
use crate::exactmath::{decimal, rat, rat_from_pair, rat_to_pair, BigRat, Vec2Q, Vec2Z};
use crate::formula::{baseline_profile, is_first_case, predicted_counts, trop_tev};
use crate::model::{ContactData, End, Ray};

/// Open plane regions used to place the points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Region {
    /// The point `(0, 0)`.
    Origin,
    /// `{x < 0, ax + y > 0}`, between `n1` and `n2`.
    Sigma1,
    /// `{x > 0, y > 0}`, between `n2` and `n3`.
    Sigma2,
    /// `{ax + y > 0, y < 0}`, the part of the cone between `n3` and `n4`
    /// above the line `ax + y = 0`.
    LowerWedge,
    /// `{x < 0, y < 0}`.
    ThirdQuadrant,
    /// No placement constraint.
    Free,
}

impl Region {
    pub fn contains(self, a: i64, p: &Vec2Q) -> bool {
        let s = &(&p.x * rat(a)) + &p.y;
        match self {
            Region::Origin => p.is_zero(),
            Region::Sigma1 => p.x.is_negative() && s.is_positive(),
            Region::Sigma2 => p.x.is_positive() && p.y.is_positive(),
            Region::LowerWedge => s.is_positive() && p.y.is_negative(),
            Region::ThirdQuadrant => p.x.is_negative() && p.y.is_negative(),
            Region::Free => true,
        }
    }

    /// Ray pairs of the two-end leaves that serve a point in this region
    /// when the central vertex sits at the origin.
    pub fn leaf_rays(self) -> &'static [(Ray, Ray)] {
        match self {
            Region::Sigma1 => &[(Ray::N1, Ray::N2)],
            Region::Sigma2 => &[(Ray::N1, Ray::N3), (Ray::N2, Ray::N3)],
            Region::LowerWedge => &[(Ray::N3, Ray::N4)],
            Region::ThirdQuadrant => &[(Ray::N1, Ray::N4)],
            Region::Origin | Region::Free => &[],
        }
    }
}

pub mod point_list {
    use super::*;
    use serde::{Deserializer, Serializer};

    type Pair = [String; 2];

    pub fn serialize<S: Serializer>(v: &[Vec2Q], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[Pair; 2]> = v.iter().map(|p| [rat_to_pair(&p.x), rat_to_pair(&p.y)]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec2Q>, D::Error> {
        let pairs = Vec::<[Pair; 2]>::deserialize(d)?;
        pairs
            .iter()
            .map(|[x, y]| match (rat_from_pair(x), rat_from_pair(y)) {
                (Some(x), Some(y)) => Ok(Vec2Q::new(x, y)),
                _ => Err(serde::de::Error::custom("malformed rational pair")),
            })
            .collect()
    }
}

/// `n` rational points `x_1..x_n` with their prescribed regions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointConfig {
    pub a: i64,
    #[serde(with = "point_list")]
    pub points: Vec<Vec2Q>,
    pub regions: Vec<Region>,
    pub seed: u64,
}

impl PointConfig {
    pub fn tallies(&self) -> BTreeMap<Region, usize> {
        let mut t = BTreeMap::new();
        for r in &self.regions {
            *t.entry(*r).or_default() += 1;
        }
        t
    }

    /// Every point lies in its region and no two points share an `x`,
    /// a `y` or an `ax + y` value.
    pub fn is_pairwise_generic(&self) -> bool {
        if self.points.iter().zip(&self.regions).any(|(p, r)| !r.contains(self.a, p)) {
            return false;
        }
        let a = rat(self.a);
        for (i, p) in self.points.iter().enumerate() {
            for q in &self.points[i + 1..] {
                if p.x == q.x || p.y == q.y || &p.x * &a + &p.y == &q.x * &a + &q.y {
                    return false;
                }
            }
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumError {
    #[error("point configuration is not generic: {0}")]
    NonGeneric(String),
    #[error("no generic configuration found after {attempts} attempts")]
    NonGenericConfiguration { attempts: usize },
    #[error("the degree vanishes, so there is no standard configuration")]
    ZeroDegree,
    #[error("{n} points do not match the standard region tallies")]
    NonConforming { n: usize },
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error("marking {marking} in {region:?} is served by a leaf along {rays:?}")]
    DictionaryViolation { marking: usize, region: Region, rays: (Ray, Ray) },
    #[error("labelled sum {sum} is not divisible by the symmetry factor {symmetry}")]
    NonIntegral { sum: BigInt, symmetry: BigInt },
    #[error("enumeration disagrees with the closed formula: {0}")]
    FormulaMismatch(String),
}

fn random_positive(rng: &mut ChaCha8Rng, max: i64) -> BigRat {
    let den: i64 = rng.gen_range(1..=1 << 16);
    let num: i64 = rng.gen_range(1..=max * den);
    BigRat::new(num.into(), den.into())
}

fn sample_in(rng: &mut ChaCha8Rng, a: i64, region: Region) -> Vec2Q {
    let max = (1i64 << 20) / (a + 2);
    let (u, v) = (random_positive(rng, max), random_positive(rng, max));
    match region {
        Region::Origin => Vec2Q::zero(),
        Region::Sigma1 => Vec2Q::new(-u.clone(), &u * rat(a) + v),
        Region::Sigma2 => Vec2Q::new(u, v),
        Region::LowerWedge => Vec2Q::new(&v / rat(a) + u, -v),
        Region::ThirdQuadrant => Vec2Q::new(-u, -v),
        Region::Free => {
            let sx = if rng.gen_bool(0.5) { 1 } else { -1 };
            let sy = if rng.gen_bool(0.5) { 1 } else { -1 };
            Vec2Q::new(u * rat(sx), v * rat(sy))
        }
    }
}

pub const MAX_RESAMPLES: usize = 64;

/// Standard region tallies for nonvanishing contact data, `x_1` first.
pub fn standard_regions(g: &ContactData) -> Result<Vec<Region>, EnumError> {
    if trop_tev(g).value.is_zero() {
        return Err(EnumError::ZeroDegree);
    }
    let p = baseline_profile(g);
    let mut regions = vec![Region::Origin];
    for (region, count) in [
        (Region::Sigma1, p.alpha),
        (Region::Sigma2, p.beta + p.gamma),
        (Region::LowerWedge, p.delta),
        (Region::ThirdQuadrant, p.chi),
    ] {
        regions.extend(std::iter::repeat(region).take(count as usize));
    }
    assert_eq!(regions.len(), g.n(), "region tallies must place every marking");
    Ok(regions)
}

/// Random points in the standard regions, re-sampled until every leaf and
/// central-vertex system met during enumeration is generic.
pub fn standard_point_config(g: &ContactData, seed: u64) -> Result<PointConfig, EnumError> {
    let regions = standard_regions(g)?;
    sample_config(g, regions, seed)
}

/// Random generic points with no region constraints.
pub fn random_config(g: &ContactData, seed: u64) -> Result<PointConfig, EnumError> {
    sample_config(g, vec![Region::Free; g.n()], seed)
}

fn sample_config(g: &ContactData, regions: Vec<Region>, seed: u64) -> Result<PointConfig, EnumError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_RESAMPLES {
        let points = regions.iter().map(|&r| sample_in(&mut rng, g.a(), r)).collect();
        let config = PointConfig { a: g.a(), points, regions: regions.clone(), seed };
        if config.is_pairwise_generic() && leaf_systems_generic(g, &config) {
            return Ok(config);
        }
    }
    Err(EnumError::NonGenericConfiguration { attempts: MAX_RESAMPLES })
}

/// Outcome of fitting a marking to a leaf from a fixed central vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Fit<T> {
    Fits(T),
    Misses,
    /// The marking lies on the boundary of the realizable region.
    Boundary,
}

/// Two-vertex leaf: `x - v = s * inner + t * outer` with `0 < s < t`;
/// returns `(stem, twig) = (s, t - s)`.
pub fn fit_double(v: &Vec2Q, x: &Vec2Q, inner: Vec2Z, outer: Vec2Z) -> Fit<(BigRat, BigRat)> {
    let Some((s, t)) = (x - v).coordinates_in(inner, outer) else {
        return Fit::Misses;
    };
    if (s.is_zero() && !t.is_negative()) || (s == t && !s.is_negative()) {
        return Fit::Boundary;
    }
    if s.is_positive() && t > s {
        let twig = &t - &s;
        Fit::Fits((s, twig))
    } else {
        Fit::Misses
    }
}

/// One-vertex leaf: `x - v = s * u` with `s > 0`.
pub fn fit_single(v: &Vec2Q, x: &Vec2Q, u: Vec2Z) -> Fit<BigRat> {
    let d = x - v;
    if !d.cross(u).is_zero() {
        return Fit::Misses;
    }
    let s = if u.x != 0 { d.x / rat(u.x) } else { d.y / rat(u.y) };
    if s.is_zero() {
        Fit::Boundary
    } else if s.is_positive() {
        Fit::Fits(s)
    } else {
        Fit::Misses
    }
}

/// Centre `v` with `x_j = v + s_j u_j` and `x_k = v + s_k u_k`; `None` for
/// parallel directions.
pub fn line_meet(xj: &Vec2Q, uj: Vec2Z, xk: &Vec2Q, uk: Vec2Z) -> Option<(Vec2Q, BigRat, BigRat)> {
    let (sj, sk) = (xj - xk).coordinates_in(uj, -uk)?;
    let v = xj.add_scaled(uj, &-sj.clone());
    Some((v, sj, sk))
}

/// Backtracking over the markings still to be served by two-vertex leaves.
struct LeafSearch<'a> {
    points: &'a [Vec2Q],
    v: Vec2Q,
    cache: HashMap<(usize, Vec2Z, Vec2Z), Option<(BigRat, BigRat)>>,
    limit: usize,
}

impl<'a> LeafSearch<'a> {
    fn new(points: &'a [Vec2Q], v: Vec2Q, limit: usize) -> Self {
        LeafSearch { points, v, cache: HashMap::new(), limit }
    }

    fn fit(&mut self, marking: usize, inner: Vec2Z, outer: Vec2Z) -> Result<Option<(BigRat, BigRat)>, EnumError> {
        if let Some(hit) = self.cache.get(&(marking, inner, outer)) {
            return Ok(hit.clone());
        }
        let r = match fit_double(&self.v, &self.points[marking - 1], inner, outer) {
            Fit::Fits(st) => Some(st),
            Fit::Misses => None,
            Fit::Boundary => {
                return Err(EnumError::NonGeneric(format!("marking {marking} on a leaf boundary from {}", self.v)));
            }
        };
        self.cache.insert((marking, inner, outer), r.clone());
        Ok(r)
    }

    fn run(&mut self, markings: &[usize], ends: &[End], acc: &mut Vec<LeafSpec>, out: &mut Vec<Vec<LeafSpec>>) -> Result<(), EnumError> {
        if out.len() >= self.limit {
            return Ok(());
        }
        let Some((&k, rest)) = markings.split_first() else {
            out.push(acc.clone());
            return Ok(());
        };
        for i in 0..ends.len() {
            for j in 0..ends.len() {
                if i == j || ends[i].ray == ends[j].ray {
                    continue;
                }
                let Some((stem, twig)) = self.fit(k, ends[i].vector, ends[j].vector)? else {
                    continue;
                };
                let remaining: Vec<End> = ends.iter().enumerate().filter(|&(t, _)| t != i && t != j).map(|(_, e)| *e).collect();
                acc.push(LeafSpec::Double { marking: k, inner: ends[i], outer: ends[j], stem, twig });
                self.run(rest, &remaining, acc, out)?;
                acc.pop();
            }
        }
        Ok(())
    }
}

fn search_leaves(points: &[Vec2Q], v: &Vec2Q, markings: &[usize], ends: &[End], limit: usize) -> Result<Vec<Vec<LeafSpec>>, EnumError> {
    let mut out = Vec::new();
    LeafSearch::new(points, v.clone(), limit).run(markings, ends, &mut Vec::new(), &mut out)?;
    Ok(out)
}

/// Whether all cone and line tests from every possible centre are strict.
/// Leaf tests are done once per ray pair in primitive coordinates
/// `x - v = p r_a + q r_b`; a leaf with weights `(w_a, w_b)` is on its
/// boundary iff `p = 0 <= q` or `p w_b = q w_a` with `p >= 0`.
fn leaf_systems_generic(g: &ContactData, c: &PointConfig) -> bool {
    let fan = g.fan();
    let weights: Vec<Vec<i64>> = Ray::ALL.iter().map(|&r| g.profile(r).weights().iter().map(|&w| w as i64).collect()).collect();
    // each centre with the markings that define it
    let mut centres: Vec<(Vec2Q, [usize; 2])> = c.points.iter().enumerate().map(|(j, x)| (x.clone(), [j, j])).collect();
    for (j, xj) in c.points.iter().enumerate() {
        for (k, xk) in c.points.iter().enumerate().skip(j + 1) {
            for rj in Ray::ALL {
                for rk in Ray::ALL {
                    if let Some((v, sj, sk)) = line_meet(xj, fan.ray(rj), xk, fan.ray(rk)) {
                        if sj.is_zero() || sk.is_zero() {
                            return false;
                        }
                        centres.push((v, [j, k]));
                    }
                }
            }
        }
    }
    let boundary = |p: &BigRat, q: &BigRat, wa: i64, wb: i64| {
        (p.is_zero() && !q.is_negative()) || (!p.is_negative() && p * rat(wb) == q * rat(wa))
    };
    for (v, defining) in &centres {
        for (_, x) in c.points.iter().enumerate().filter(|(i, _)| !defining.contains(i)) {
            let d = x - v;
            for ra in Ray::ALL {
                for rb in Ray::ALL {
                    let Some((p, q)) = d.coordinates_in(fan.ray(ra), fan.ray(rb)) else { continue };
                    for &wa in &weights[ra.index()] {
                        for &wb in &weights[rb.index()] {
                            if boundary(&p, &q, wa, wb) {
                                return false;
                            }
                        }
                    }
                }
            }
        }
    }
    true
}

fn check_dictionary(curve: &ContributingCurve, c: &PointConfig) -> Result<(), EnumError> {
    for leaf in &curve.leaves {
        let region = c.regions[leaf.marking - 1];
        let tree = curve.map.tree();
        let rays: Vec<Ray> = leaf
            .ends
            .iter()
            .map(|&l| {
                tree.legs()
                    .iter()
                    .find_map(|lg| match lg.kind {
                        crate::curves::LegKind::End(e) if e.label == l => Some(e.ray),
                        _ => None,
                    })
                    .expect("leaf end present")
            })
            .collect();
        let pair = if rays[0] <= rays[1] { (rays[0], rays[1]) } else { (rays[1], rays[0]) };
        if !region.leaf_rays().contains(&pair) {
            return Err(EnumError::DictionaryViolation { marking: leaf.marking, region, rays: pair });
        }
    }
    Ok(())
}

/// Type-B centre placements used constructively: `x_1` on a one-end leaf
/// along `n1`, `x_j` with positive abscissa on one along `n2`.
fn type_b_centres(g: &ContactData, c: &PointConfig) -> Vec<(usize, Vec2Q)> {
    if is_first_case(g) {
        return Vec::new();
    }
    (2..=g.n())
        .filter(|&j| c.points[j - 1].x.is_positive())
        .map(|j| {
            let x = c.points[j - 1].x.clone();
            (j, Vec2Q::new(x.clone(), -x * rat(g.a())))
        })
        .collect()
}

/// Every labelled contributing curve through the standard configuration.
pub fn enumerate_contributing(g: &ContactData, c: &PointConfig) -> Result<Vec<ContributingCurve>, EnumError> {
    if c.points.len() != g.n() || !c.points[0].is_zero() {
        return Err(EnumError::NonConforming { n: c.points.len() });
    }
    let ends = g.degree().ends;
    let mut curves = Vec::new();
    let x1 = c.points[0].clone();

    let others: Vec<usize> = (2..=g.n()).collect();
    for leaves in search_leaves(&c.points, &x1, &others, &ends, usize::MAX)? {
        let curve = ContributingCurve::from_map(central_map(x1.clone(), Some(1), &leaves)?, g)?;
        check_dictionary(&curve, c)?;
        curves.push(curve);
    }

    for (j, v) in type_b_centres(g, c) {
        let rest: Vec<usize> = (2..=g.n()).filter(|&k| k != j).collect();
        for e1 in ends.iter().filter(|e| e.ray == Ray::N1) {
            for e2 in ends.iter().filter(|e| e.ray == Ray::N2) {
                let (s1, s2) = match (fit_single(&v, &x1, e1.vector), fit_single(&v, &c.points[j - 1], e2.vector)) {
                    (Fit::Fits(s1), Fit::Fits(s2)) => (s1, s2),
                    (Fit::Boundary, _) | (_, Fit::Boundary) => {
                        return Err(EnumError::NonGeneric(format!("type-B centre {v} meets a marking")));
                    }
                    _ => continue,
                };
                let remaining: Vec<End> = ends.iter().filter(|e| e.label != e1.label && e.label != e2.label).copied().collect();
                for doubles in search_leaves(&c.points, &v, &rest, &remaining, usize::MAX)? {
                    let mut leaves = vec![
                        LeafSpec::Single { marking: 1, end: *e1, length: s1.clone() },
                        LeafSpec::Single { marking: j, end: *e2, length: s2.clone() },
                    ];
                    leaves.extend(doubles);
                    curves.push(ContributingCurve::from_map(central_map(v.clone(), None, &leaves)?, g)?);
                }
            }
        }
    }

    for curve in &curves {
        let pos = crate::curves::positions_of(&curve.map)?;
        assert_eq!(pos, c.points, "realized curve misses the configuration");
    }
    Ok(curves)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BreakdownEntry {
    pub key: String,
    #[serde(with = "decimal")]
    pub labelled_curves: BigInt,
    #[serde(with = "decimal")]
    pub labelled_sum: BigInt,
}

/// Exact totals of a count: the labelled degree, the symmetry factor and
/// the quotient, with a per-stratum breakdown.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountReport {
    #[serde(with = "decimal")]
    pub labelled_sum: BigInt,
    #[serde(with = "decimal")]
    pub symmetry: BigInt,
    #[serde(with = "decimal")]
    pub trop_tev: BigInt,
    #[serde(with = "decimal")]
    pub labelled_curves: BigInt,
    pub seed: Option<u64>,
    pub breakdown: Vec<BreakdownEntry>,
}

impl CountReport {
    pub fn new(g: &ContactData, labelled_sum: BigInt, labelled_curves: BigInt, seed: Option<u64>, breakdown: Vec<BreakdownEntry>) -> Result<Self, EnumError> {
        let symmetry = g.symmetry();
        let (q, r) = labelled_sum.div_rem(&symmetry);
        if !r.is_zero() {
            return Err(EnumError::NonIntegral { sum: labelled_sum, symmetry });
        }
        Ok(CountReport { labelled_sum, symmetry, trop_tev: q, labelled_curves, seed, breakdown })
    }
}

/// Enumerated curves grouped up to relabelling equal ends.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Enumeration {
    pub config: Option<PointConfig>,
    pub report: CountReport,
    #[serde(with = "decimal")]
    pub type_a_labelled: BigInt,
    #[serde(with = "decimal")]
    pub type_b_labelled: BigInt,
    /// One representative per unlabelled curve, in enumeration order.
    pub curves: Vec<CurveRecord>,
}

/// Sums the enumerated curves and checks them against the closed formula
/// and the predicted counts.
pub fn total(g: &ContactData, c: &PointConfig) -> Result<Enumeration, EnumError> {
    let curves = enumerate_contributing(g, c)?;
    summarize(g, Some(c.clone()), &curves)
}

fn summarize(g: &ContactData, config: Option<PointConfig>, curves: &[ContributingCurve]) -> Result<Enumeration, EnumError> {
    let mut sum = BigInt::zero();
    let (mut ta, mut tb) = (BigInt::zero(), BigInt::zero());
    let mut groups: Vec<(String, CurveRecord, BigInt)> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for curve in curves {
        sum += &curve.multiplicity;
        match curve.curve_type {
            CurveType::A => ta += 1,
            CurveType::B => tb += 1,
        }
        let rec = curve.record(g);
        let key = rec.unlabelled_key();
        match index.get(&key) {
            Some(&i) => groups[i].2 += 1,
            None => {
                index.insert(key.clone(), groups.len());
                groups.push((key, rec, BigInt::one()));
            }
        }
    }
    let breakdown = groups
        .iter()
        .enumerate()
        .map(|(i, (_, rec, orbit))| BreakdownEntry {
            key: format!("curve {} (type {})", i + 1, rec.curve_type),
            labelled_curves: orbit.clone(),
            labelled_sum: orbit * &rec.multiplicity,
        })
        .collect();
    let report = CountReport::new(g, sum, BigInt::from(curves.len()), config.as_ref().map(|c| c.seed), breakdown)?;

    let formula = trop_tev(g).value;
    if report.trop_tev != formula {
        return Err(EnumError::FormulaMismatch(format!("enumerated {} vs formula {formula}", report.trop_tev)));
    }
    let predicted = predicted_counts(g);
    if (&ta, &tb) != (&predicted.type_a_labelled, &predicted.type_b_labelled) {
        return Err(EnumError::FormulaMismatch(format!(
            "labelled split A={ta}, B={tb} vs predicted A={}, B={}",
            predicted.type_a_labelled, predicted.type_b_labelled
        )));
    }
    if BigInt::from(groups.len()) != predicted.total_unlabelled {
        return Err(EnumError::FormulaMismatch(format!("{} unlabelled curves vs predicted {}", groups.len(), predicted.total_unlabelled)));
    }
    Ok(Enumeration {
        config,
        report,
        type_a_labelled: ta,
        type_b_labelled: tb,
        curves: groups.into_iter().map(|(_, rec, _)| rec).collect(),
    })
}

/// Enumeration for a seed: vanishing degrees give the empty list without
/// any configuration.
pub fn enumerate_instance(g: &ContactData, seed: u64) -> Result<Enumeration, EnumError> {
    match standard_point_config(g, seed) {
        Ok(c) => total(g, &c),
        Err(EnumError::ZeroDegree) => summarize(g, None, &[]),
        Err(e) => Err(e),
    }
}

/// Sign pattern of `(x, y, ax + y)` at a central-vertex position.
pub fn sign_triple(a: i64, v: &Vec2Q) -> [i8; 3] {
    let s = &(&v.x * rat(a)) + &v.y;
    [&v.x, &v.y, &s].map(|q| if q.is_positive() { 1 } else if q.is_negative() { -1 } else { 0 })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AuditKey {
    pub curve_type: CurveType,
    pub eps: [u8; 4],
    /// `None` when the two one-end leaves are parallel.
    pub v_region: Option<[i8; 3]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditCase {
    pub key: AuditKey,
    /// Central-vertex placements tried.
    pub placements: usize,
    /// Placements whose one-end leaves have positive lengths.
    pub realizable_centres: usize,
    /// Complete curves found; nonzero means a contribution was missed.
    pub solutions: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditFailure {
    pub key: AuditKey,
    pub counterexample: CurveRecord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub cases: Vec<AuditCase>,
    pub failures: Vec<AuditFailure>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.cases.iter().all(|c| c.solutions == 0)
    }
}

/// Tries every central-vertex placement outside the constructive list and
/// records whether any curve through the configuration arises from it.
pub fn exclusion_audit(g: &ContactData, c: &PointConfig) -> Result<AuditReport, EnumError> {
    let ends = g.degree().ends;
    let fan = g.fan();
    let mut cases: BTreeMap<AuditKey, AuditCase> = BTreeMap::new();
    let mut failures = Vec::new();
    let constructive_b: Vec<usize> = type_b_centres(g, c).into_iter().map(|(j, _)| j).collect();

    let mut note = |key: AuditKey, realizable: bool, found: Option<ContributingCurve>, failures: &mut Vec<AuditFailure>| {
        let case = cases.entry(key.clone()).or_insert(AuditCase { key: key.clone(), placements: 0, realizable_centres: 0, solutions: 0 });
        case.placements += 1;
        case.realizable_centres += realizable as usize;
        if let Some(curve) = found {
            case.solutions += 1;
            failures.push(AuditFailure { key, counterexample: curve.record(g) });
        }
    };

    for k in 2..=g.n() {
        let v = c.points[k - 1].clone();
        let rest: Vec<usize> = (1..=g.n()).filter(|&i| i != k).collect();
        let found = search_leaves(&c.points, &v, &rest, &ends, 1)?
            .into_iter()
            .next()
            .map(|leaves| ContributingCurve::from_map(central_map(v.clone(), Some(k), &leaves)?, g))
            .transpose()?;
        let key = AuditKey { curve_type: CurveType::A, eps: [0; 4], v_region: Some(sign_triple(g.a(), &v)) };
        note(key, true, found, &mut failures);
    }

    for j in 1..=g.n() {
        for k in j + 1..=g.n() {
            for rj in Ray::ALL {
                for rk in Ray::ALL {
                    let mut eps = [0u8; 4];
                    eps[rj.index()] += 1;
                    eps[rk.index()] += 1;
                    let constructive = |a: usize, ra: Ray, b: usize, rb: Ray| a == 1 && ra == Ray::N1 && rb == Ray::N2 && constructive_b.contains(&b);
                    if constructive(j, rj, k, rk) || constructive(k, rk, j, rj) {
                        continue;
                    }
                    let (xj, xk) = (&c.points[j - 1], &c.points[k - 1]);
                    let Some((v, sj, sk)) = line_meet(xj, fan.ray(rj), xk, fan.ray(rk)) else {
                        note(AuditKey { curve_type: CurveType::B, eps, v_region: None }, false, None, &mut failures);
                        continue;
                    };
                    let key = AuditKey { curve_type: CurveType::B, eps, v_region: Some(sign_triple(g.a(), &v)) };
                    if !(sj.is_positive() && sk.is_positive()) {
                        note(key, false, None, &mut failures);
                        continue;
                    }
                    let rest: Vec<usize> = (1..=g.n()).filter(|&i| i != j && i != k).collect();
                    let mut found = None;
                    'outer: for ej in ends.iter().filter(|e| e.ray == rj) {
                        for ek in ends.iter().filter(|e| e.ray == rk && e.label != ej.label) {
                            let remaining: Vec<End> = ends.iter().filter(|e| e.label != ej.label && e.label != ek.label).copied().collect();
                            if let Some(doubles) = search_leaves(&c.points, &v, &rest, &remaining, 1)?.into_iter().next() {
                                let mut leaves = vec![
                                    LeafSpec::Single { marking: j, end: *ej, length: &sj / rat(ej.weight as i64) },
                                    LeafSpec::Single { marking: k, end: *ek, length: &sk / rat(ek.weight as i64) },
                                ];
                                leaves.extend(doubles);
                                found = Some(ContributingCurve::from_map(central_map(v.clone(), None, &leaves)?, g)?);
                                break 'outer;
                            }
                        }
                    }
                    note(key, true, found, &mut failures);
                }
            }
        }
    }
    Ok(AuditReport { cases: cases.into_values().collect(), failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mixed() -> ContactData {
        ContactData::hirzebruch(1, 4, [&[1, 1, 1], &[1], &[3], &[4]]).unwrap()
    }

    fn weighted() -> ContactData {
        ContactData::hirzebruch(2, 5, [&[1, 2], &[2], &[1, 1, 1], &[4, 4]]).unwrap()
    }

    #[test]
    fn region_tallies() {
        let c = standard_point_config(&mixed(), 0).unwrap();
        let t = c.tallies();
        assert_eq!((t[&Region::Origin], t[&Region::Sigma1], t[&Region::Sigma2], t[&Region::ThirdQuadrant]), (1, 1, 1, 1));
        let c = standard_point_config(&weighted(), 0).unwrap();
        let t = c.tallies();
        assert_eq!((t[&Region::Sigma2], t[&Region::LowerWedge], t[&Region::ThirdQuadrant]), (2, 1, 1));
        assert!(c.is_pairwise_generic());
    }

    #[test]
    fn leaf_fits() {
        let v = Vec2Q::zero();
        // x = 1*(-1,1) + 2*(0,1): stem 1, twig 1
        let x = Vec2Q::from_ints(-1, 3);
        assert_eq!(fit_double(&v, &x, Vec2Z::new(-1, 1), Vec2Z::new(0, 1)), Fit::Fits((rat(1), rat(1))));
        assert_eq!(fit_double(&v, &x, Vec2Z::new(0, 1), Vec2Z::new(-1, 1)), Fit::Misses);
        assert_eq!(fit_double(&v, &Vec2Q::from_ints(-1, 2), Vec2Z::new(-1, 1), Vec2Z::new(0, 1)), Fit::Boundary);
        assert_eq!(fit_single(&v, &Vec2Q::from_ints(0, 3), Vec2Z::new(0, 2)), Fit::Fits(BigRat::new(3.into(), 2.into())));
        assert_eq!(fit_single(&v, &Vec2Q::from_ints(0, -3), Vec2Z::new(0, 2)), Fit::Misses);
        let (c, sj, sk) = line_meet(&Vec2Q::from_ints(0, 0), Vec2Z::new(-1, 1), &Vec2Q::from_ints(1, 1), Vec2Z::new(0, 1)).unwrap();
        assert_eq!((c, sj, sk), (Vec2Q::from_ints(1, -1), rat(1), rat(2)));
    }

    #[test]
    fn mixed_instance_curves() {
        let e = enumerate_instance(&mixed(), 0).unwrap();
        assert_eq!(e.report.trop_tev, 24.into());
        assert_eq!(e.report.labelled_sum, 144.into());
        assert_eq!((e.type_a_labelled.clone(), e.type_b_labelled.clone()), (6.into(), 6.into()));
        assert_eq!(e.curves.len(), 2);
        assert!(e.curves.iter().all(|c| c.multiplicity == 12.into()));
        assert_eq!(e.curves.iter().filter(|c| c.curve_type == CurveType::B).count(), 1);
    }

    #[test]
    fn weighted_instance_curves() {
        let e = enumerate_instance(&weighted(), 3).unwrap();
        assert_eq!(e.report.trop_tev, 512.into());
        assert_eq!(e.curves.len(), 4);
        assert!(e.curves.iter().all(|c| c.curve_type == CurveType::A && c.multiplicity == 128.into()));
    }

    #[test]
    fn vanishing_instance_is_empty() {
        let g = ContactData::hirzebruch(1, 4, [&[1, 1, 1, 1], &[], &[4], &[4]]).unwrap();
        let e = enumerate_instance(&g, 0).unwrap();
        assert!(e.curves.is_empty());
        assert_eq!(e.report.trop_tev, 0.into());
        assert_eq!(standard_point_config(&g, 0), Err(EnumError::ZeroDegree));
    }

    #[test]
    fn audit_finds_nothing_extra() {
        for g in [mixed(), weighted()] {
            let c = standard_point_config(&g, 1).unwrap();
            let report = exclusion_audit(&g, &c).unwrap();
            assert!(report.passed(), "{:?}", report.failures);
            assert!(!report.cases.is_empty());
        }
    }
}
