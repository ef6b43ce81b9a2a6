//! Problem instances: the Hirzebruch fan, tangency profiles, validated
//! contact data, the labelled degree and curve-class bookkeeping.

use std::fmt;

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactmath::{symmetry_factor, Vec2Z};

/// One of the four rays of the fan, `n1 = (-1, a)`, `n2 = (0, 1)`,
/// `n3 = (1, 0)`, `n4 = (0, -1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Ray {
    N1,
    N2,
    N3,
    N4,
}

impl Ray {
    pub const ALL: [Ray; 4] = [Ray::N1, Ray::N2, Ray::N3, Ray::N4];

    pub fn index(self) -> usize {
        self as usize
    }

    /// 1-based divisor number.
    pub fn number(self) -> usize {
        self.index() + 1
    }

    pub fn from_index(i: usize) -> Ray {
        Ray::ALL[i]
    }
}

impl fmt::Display for Ray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.number())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    #[default]
    Hirzebruch,
    P2,
}

/// The fan of `H_a`. P2 is the degenerate case `a = 1` with no contact
/// along `D2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FanSpec {
    pub a: u32,
    pub target: Target,
}

impl FanSpec {
    pub fn hirzebruch(a: u32) -> Self {
        FanSpec { a, target: Target::Hirzebruch }
    }

    pub fn p2() -> Self {
        FanSpec { a: 1, target: Target::P2 }
    }

    pub fn ray(&self, r: Ray) -> Vec2Z {
        match r {
            Ray::N1 => Vec2Z::new(-1, self.a as i64),
            Ray::N2 => Vec2Z::new(0, 1),
            Ray::N3 => Vec2Z::new(1, 0),
            Ray::N4 => Vec2Z::new(0, -1),
        }
    }

    pub fn rays(&self) -> [Vec2Z; 4] {
        Ray::ALL.map(|r| self.ray(r))
    }
}

/// Contact orders with one toric divisor, kept sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TangencyProfile(Vec<u32>);

impl TangencyProfile {
    pub fn new(mut weights: Vec<u32>) -> Self {
        weights.sort_unstable();
        TangencyProfile(weights)
    }

    pub fn weights(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> i64 {
        self.0.iter().map(|&w| w as i64).sum()
    }

    pub fn product(&self) -> BigInt {
        self.0.iter().fold(BigInt::one(), |acc, &w| acc * w)
    }

    pub fn symmetry_factor(&self) -> BigInt {
        symmetry_factor(&self.0)
    }
}

/// Instance as read from JSON, before any validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawInstance {
    pub a: i64,
    pub n: i64,
    pub mu: Vec<Vec<i64>>,
    #[serde(default)]
    pub target: Target,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Violation {
    #[error("expected four tangency profiles, got {got}")]
    ProfileCount { got: usize },
    #[error("fan parameter a = {a} must be at least 1")]
    InvalidA { a: i64 },
    #[error("P2 target requires a = 1, got {a}")]
    P2RequiresAOne { a: i64 },
    #[error("P2 target requires an empty profile along D2, got length {len}")]
    P2RequiresEmptyMu2 { len: usize },
    #[error("n = {n} markings; at least 3 are required")]
    TooFewMarkings { n: i64 },
    #[error("mu{divisor}[{position}] = {value} is not a positive contact order")]
    NonPositiveWeight { divisor: usize, position: usize, value: i64 },
    #[error("m = {m} ends but the dimension constraint requires 2(n-1) = {expected}")]
    DimensionViolation { m: i64, expected: i64 },
    #[error("balancing fails along {axis} by {excess:+}")]
    BalanceViolation { axis: Axis, excess: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("invalid contact data: {}", .violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
pub struct ValidationError {
    pub violations: Vec<Violation>,
}

/// Validated discrete data: fan, marking count and the four profiles.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ContactData {
    fan: FanSpec,
    n: usize,
    profiles: [TangencyProfile; 4],
    input_order: [Vec<u32>; 4],
}

impl ContactData {
    /// Checks every invariant and reports all violations at once.
    pub fn validate(raw: &RawInstance) -> Result<ContactData, ValidationError> {
        let mut violations = Vec::new();
        if raw.mu.len() != 4 {
            violations.push(Violation::ProfileCount { got: raw.mu.len() });
            return Err(ValidationError { violations });
        }
        if raw.a < 1 {
            violations.push(Violation::InvalidA { a: raw.a });
        }
        if raw.target == Target::P2 {
            if raw.a != 1 {
                violations.push(Violation::P2RequiresAOne { a: raw.a });
            }
            if !raw.mu[1].is_empty() {
                violations.push(Violation::P2RequiresEmptyMu2 { len: raw.mu[1].len() });
            }
        }
        if raw.n < 3 {
            violations.push(Violation::TooFewMarkings { n: raw.n });
        }
        for (i, mu) in raw.mu.iter().enumerate() {
            for (j, &w) in mu.iter().enumerate() {
                if w <= 0 {
                    violations.push(Violation::NonPositiveWeight { divisor: i + 1, position: j + 1, value: w });
                }
            }
        }
        let m: i64 = raw.mu.iter().map(|mu| mu.len() as i64).sum();
        if m != 2 * (raw.n - 1) {
            violations.push(Violation::DimensionViolation { m, expected: 2 * (raw.n - 1) });
        }
        let s: Vec<i64> = raw.mu.iter().map(|mu| mu.iter().sum()).collect();
        let excess_x = s[2] - s[0];
        let excess_y = raw.a * s[0] + s[1] - s[3];
        if excess_x != 0 {
            violations.push(Violation::BalanceViolation { axis: Axis::X, excess: excess_x });
        }
        if excess_y != 0 {
            violations.push(Violation::BalanceViolation { axis: Axis::Y, excess: excess_y });
        }
        if !violations.is_empty() {
            return Err(ValidationError { violations });
        }
        let input_order: [Vec<u32>; 4] = std::array::from_fn(|i| raw.mu[i].iter().map(|&w| w as u32).collect());
        let profiles = std::array::from_fn(|i| TangencyProfile::new(input_order[i].clone()));
        Ok(ContactData { fan: FanSpec { a: raw.a as u32, target: raw.target }, n: raw.n as usize, profiles, input_order })
    }

    /// Convenience constructor for Hirzebruch data.
    pub fn hirzebruch(a: i64, n: i64, mu: [&[i64]; 4]) -> Result<ContactData, ValidationError> {
        Self::validate(&RawInstance { a, n, mu: mu.iter().map(|m| m.to_vec()).collect(), target: Target::Hirzebruch })
    }

    /// Convenience constructor for P2 data; `mu[1]` must be empty.
    pub fn p2(n: i64, mu: [&[i64]; 4]) -> Result<ContactData, ValidationError> {
        Self::validate(&RawInstance { a: 1, n, mu: mu.iter().map(|m| m.to_vec()).collect(), target: Target::P2 })
    }

    pub fn to_raw(&self) -> RawInstance {
        RawInstance {
            a: self.fan.a as i64,
            n: self.n as i64,
            mu: self.input_order.iter().map(|m| m.iter().map(|&w| w as i64).collect()).collect(),
            target: self.fan.target,
        }
    }

    pub fn fan(&self) -> FanSpec {
        self.fan
    }

    pub fn a(&self) -> i64 {
        self.fan.a as i64
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.profiles.iter().map(|p| p.len()).sum()
    }

    pub fn profile(&self, r: Ray) -> &TangencyProfile {
        &self.profiles[r.index()]
    }

    pub fn profiles(&self) -> &[TangencyProfile; 4] {
        &self.profiles
    }

    /// `|mu_i|` as a signed integer, for the closed formulas.
    pub fn len_of(&self, r: Ray) -> i64 {
        self.profiles[r.index()].len() as i64
    }

    pub fn input_order(&self, r: Ray) -> &[u32] {
        &self.input_order[r.index()]
    }

    /// `prod_i sym(mu_i)`.
    pub fn symmetry(&self) -> BigInt {
        self.profiles.iter().map(|p| p.symmetry_factor()).product()
    }

    /// Same data with `mu1` and `mu3` exchanged.
    pub fn swap_mu1_mu3(&self) -> ContactData {
        let mut out = self.clone();
        out.profiles.swap(0, 2);
        out.input_order.swap(0, 2);
        out
    }

    pub fn degree(&self) -> Degree {
        degree_of(self)
    }
}

impl fmt::Display for ContactData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a={} n={} mu=[", self.fan.a, self.n)?;
        for (i, p) in self.input_order.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{:?}", p)?;
        }
        write!(f, "]")?;
        if self.fan.target == Target::P2 {
            write!(f, " (p2)")?;
        }
        Ok(())
    }
}

/// A labelled end `q_label` of weight `weight` in direction `weight * n_ray`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct End {
    pub label: usize,
    pub ray: Ray,
    pub weight: u32,
    pub vector: Vec2Z,
}

/// Ordered list of the `m` weighted end vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Degree {
    pub ends: Vec<End>,
}

impl Degree {
    pub fn sum(&self) -> Vec2Z {
        self.ends.iter().fold(Vec2Z::ZERO, |acc, e| acc + e.vector)
    }
}

/// Labels run through `mu1, mu2, mu3, mu4` in input order, starting at 1.
pub fn degree_of(gamma: &ContactData) -> Degree {
    let mut ends = Vec::with_capacity(gamma.m());
    for r in Ray::ALL {
        for &w in gamma.input_order(r) {
            ends.push(End { label: ends.len() + 1, ray: r, weight: w, vector: gamma.fan.ray(r) * w as i64 });
        }
    }
    Degree { ends }
}

/// `beta = x D1 + y D2` in the Picard group of `H_a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveClass {
    pub x: i64,
    pub y: i64,
}

impl CurveClass {
    /// Intersection number with the toric divisor `D_ray` on `H_a`.
    pub fn dot(&self, r: Ray, a: i64) -> i64 {
        match r {
            Ray::N1 | Ray::N3 => self.y,
            Ray::N2 => self.x - a * self.y,
            Ray::N4 => self.x,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ClassError {
    #[error("beta.D{divisor} = {value} < 0: no all-ones profile exists")]
    InfeasibleClass { divisor: usize, value: i64 },
    #[error("m = {m} ends is odd, so no integer n satisfies m = 2(n-1)")]
    OddEndCount { m: i64 },
    #[error(transparent)]
    Invalid(#[from] ValidationError),
}

pub fn class_of(gamma: &ContactData) -> CurveClass {
    CurveClass { x: gamma.profile(Ray::N4).sum(), y: gamma.profile(Ray::N1).sum() }
}

/// All-ones contact data with `|mu_i| = beta.D_i`.
pub fn profile_of_class(beta: CurveClass, fan: FanSpec) -> Result<ContactData, ClassError> {
    let a = fan.a as i64;
    let mut lens = [0i64; 4];
    for r in Ray::ALL {
        let v = beta.dot(r, a);
        if v < 0 {
            return Err(ClassError::InfeasibleClass { divisor: r.number(), value: v });
        }
        lens[r.index()] = v;
    }
    let m: i64 = lens.iter().sum();
    if m % 2 != 0 {
        return Err(ClassError::OddEndCount { m });
    }
    let raw = RawInstance {
        a,
        n: m / 2 + 1,
        mu: lens.iter().map(|&l| vec![1; l as usize]).collect(),
        target: fan.target,
    };
    Ok(ContactData::validate(&raw)?)
}

/// Non-increasing sequences of `len` parts in `1..=max_part` summing to
/// `total`.
pub fn partitions(total: i64, len: usize, max_part: i64) -> Vec<Vec<i64>> {
    fn go(total: i64, len: usize, cap: i64, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if len == 0 {
            if total == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        let lo = (total - cap * (len as i64 - 1)).max(1);
        for p in (lo..=cap.min(total - (len as i64 - 1))).rev() {
            prefix.push(p);
            go(total - p, len - 1, p, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(total, len, max_part, &mut Vec::new(), &mut out);
    out
}

/// Every valid Hirzebruch instance with `a` in `a_values`, `|mu1| <= s1_max`
/// total weight, parts at most `max_part` and `3 <= n <= n_max`.
pub fn instance_grid(a_values: &[i64], s1_max: i64, max_part: i64, n_max: i64) -> Vec<ContactData> {
    let mut out = Vec::new();
    for n in 3..=n_max {
        let m = 2 * (n as usize - 1);
        for &a in a_values {
            for s1 in 0..=s1_max {
                for l1 in 0..=m {
                    for mu1 in partitions(s1, l1, max_part) {
                        for l3 in 0..=m - l1 {
                            for mu3 in partitions(s1, l3, max_part) {
                                let rest = m - l1 - l3;
                                for l2 in 0..=rest {
                                    let l4 = rest - l2;
                                    for s2 in l2 as i64..=l2 as i64 * max_part {
                                        for mu2 in partitions(s2, l2, max_part) {
                                            for mu4 in partitions(a * s1 + s2, l4, max_part) {
                                                if let Ok(g) = ContactData::hirzebruch(a, n, [&mu1, &mu2, &mu3, &mu4]) {
                                                    out.push(g);
                                                }
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {

    #[test]
    fn partitions_and_grid() {
        assert_eq!(partitions(4, 2, 4), vec![vec![3, 1], vec![2, 2]]);
        assert_eq!(partitions(0, 0, 4), vec![Vec::<i64>::new()]);
        assert!(partitions(5, 1, 4).is_empty());
        let grid = instance_grid(&[1], 1, 2, 3);
        assert!(grid.iter().all(|g| g.n() == 3));
        assert!(grid.contains(&ContactData::hirzebruch(1, 3, [&[1], &[1], &[1], &[2]]).unwrap()));
    }
    use super::*;

    fn mixed_instance() -> ContactData {
        ContactData::hirzebruch(1, 4, [&[1, 1, 1], &[1], &[3], &[4]]).unwrap()
    }

    #[test]
    fn validates_mixed_instance() {
        let g = mixed_instance();
        assert_eq!(g.m(), 6);
        assert_eq!(g.len_of(Ray::N1), 3);
    }

    #[test]
    fn unbalanced_instance_fails_y_balance() {
        let err = ContactData::hirzebruch(2, 5, [&[1, 2], &[3], &[1, 1, 1], &[4, 4]]).unwrap_err();
        assert_eq!(err.violations, vec![Violation::BalanceViolation { axis: Axis::Y, excess: 1 }]);
        // both candidate repairs balance
        assert!(ContactData::hirzebruch(2, 5, [&[1, 2], &[2], &[1, 1, 1], &[4, 4]]).is_ok());
        assert!(ContactData::hirzebruch(2, 5, [&[1, 2], &[3], &[1, 1, 1], &[4, 5]]).is_ok());
    }

    #[test]
    fn reports_every_violation() {
        let raw = RawInstance { a: 0, n: 2, mu: vec![vec![0], vec![], vec![1], vec![]], target: Target::Hirzebruch };
        let err = ContactData::validate(&raw).unwrap_err();
        assert!(err.violations.contains(&Violation::InvalidA { a: 0 }));
        assert!(err.violations.contains(&Violation::TooFewMarkings { n: 2 }));
        assert!(err.violations.contains(&Violation::NonPositiveWeight { divisor: 1, position: 1, value: 0 }));
        assert!(!err.violations.iter().any(|v| matches!(v, Violation::DimensionViolation { .. })));
        assert!(err.violations.contains(&Violation::BalanceViolation { axis: Axis::X, excess: 1 }));
    }

    #[test]
    fn p2_mode_rules() {
        let raw = RawInstance { a: 2, n: 4, mu: vec![vec![1, 1], vec![1], vec![1, 1], vec![1, 1]], target: Target::P2 };
        let err = ContactData::validate(&raw).unwrap_err();
        assert!(err.violations.contains(&Violation::P2RequiresAOne { a: 2 }));
        assert!(err.violations.contains(&Violation::P2RequiresEmptyMu2 { len: 1 }));
        let ok = RawInstance { a: 1, n: 4, mu: vec![vec![1, 1], vec![], vec![1, 1], vec![1, 1]], target: Target::P2 };
        assert!(ContactData::validate(&ok).is_ok());
    }

    #[test]
    fn degree_vectors() {
        let g = mixed_instance();
        let d = g.degree();
        assert_eq!(d.ends.len(), 6);
        assert_eq!(d.sum(), Vec2Z::ZERO);
        assert_eq!(d.ends[5].vector, Vec2Z::new(0, -4));
        assert_eq!(d.ends.iter().map(|e| e.label).collect::<Vec<_>>(), vec![1, 2, 3, 4, 5, 6]);
        let g2 = ContactData::hirzebruch(2, 3, [&[1], &[], &[1], &[1, 1]]).unwrap();
        assert_eq!(g2.degree().ends[0].vector, Vec2Z::new(-1, 2));
    }

    #[test]
    fn curve_classes() {
        let g = mixed_instance();
        let beta = class_of(&g);
        assert_eq!(beta, CurveClass { x: 4, y: 3 });
        assert_eq!(beta.dot(Ray::N2, 1), g.profile(Ray::N2).sum());

        // d[(j+1) D1 + D2] with a = 2j, j = 2, d = 1
        let err = profile_of_class(CurveClass { x: 3, y: 1 }, FanSpec::hirzebruch(4)).unwrap_err();
        assert_eq!(err, ClassError::InfeasibleClass { divisor: 2, value: -1 });

        let err = profile_of_class(CurveClass { x: 2, y: 1 }, FanSpec::hirzebruch(1)).unwrap_err();
        assert_eq!(err, ClassError::OddEndCount { m: 5 });

        let g = profile_of_class(CurveClass { x: 4, y: 2 }, FanSpec::hirzebruch(1)).unwrap();
        assert_eq!(class_of(&g), CurveClass { x: 4, y: 2 });
        assert_eq!(g.n(), 6);
    }

    #[test]
    fn swap_keeps_validity() {
        let g = ContactData::hirzebruch(2, 5, [&[1, 2], &[2], &[1, 1, 1], &[4, 4]]).unwrap();
        let s = g.swap_mu1_mu3();
        assert!(ContactData::validate(&s.to_raw()).is_ok());
        assert_eq!(s.profile(Ray::N1).weights(), &[1, 1, 1]);
    }

    #[test]
    fn json_shape() {
        let raw: RawInstance =
            serde_json::from_str(r#"{"a": 1, "n": 4, "mu": [[1,1,1],[1],[3],[4]], "target": "hirzebruch"}"#).unwrap();
        assert_eq!(ContactData::validate(&raw).unwrap(), mixed_instance());
        let text = serde_json::to_string(&mixed_instance().to_raw()).unwrap();
        assert_eq!(text, r#"{"a":1,"n":4,"mu":[[1,1,1],[1],[3],[4]],"target":"hirzebruch"}"#);
    }
}
