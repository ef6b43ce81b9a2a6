//! Exact arithmetic substrate: big integers and rationals, 2D lattice
//! vectors, 2x2 determinants and the combinatorial coefficients used by
//! the closed formulas and identity checks.
//!
//! Nothing in this crate touches floating point; decimal conversion only
//! happens at SVG serialization time.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact rational number, always kept in lowest terms with a positive
/// denominator.
pub type BigRat = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MathError {
    #[error("the zero vector has no primitive direction")]
    ZeroVector,
}

/// Integer lattice vector. Used for weighted edge and end directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Vec2Z {
    pub x: i64,
    pub y: i64,
}

impl Vec2Z {
    pub const ZERO: Vec2Z = Vec2Z { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        Vec2Z { x, y }
    }

    pub fn is_zero(&self) -> bool {
        self.x == 0 && self.y == 0
    }

    /// Splits `self` as `length * primitive` with `gcd(|p.x|, |p.y|) = 1`.
    pub fn primitive_and_length(&self) -> Result<(Vec2Z, u64), MathError> {
        primitive_and_length(*self)
    }
}

impl Add for Vec2Z {
    type Output = Vec2Z;
    fn add(self, o: Vec2Z) -> Vec2Z {
        Vec2Z::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2Z {
    fn add_assign(&mut self, o: Vec2Z) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2Z {
    type Output = Vec2Z;
    fn sub(self, o: Vec2Z) -> Vec2Z {
        Vec2Z::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2Z {
    type Output = Vec2Z;
    fn neg(self) -> Vec2Z {
        Vec2Z::new(-self.x, -self.y)
    }
}

impl Mul<i64> for Vec2Z {
    type Output = Vec2Z;
    fn mul(self, k: i64) -> Vec2Z {
        Vec2Z::new(self.x * k, self.y * k)
    }
}

impl fmt::Display for Vec2Z {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// `u.x * v.y - u.y * v.x`.
pub fn det2(u: Vec2Z, v: Vec2Z) -> i64 {
    u.x * v.y - u.y * v.x
}

pub fn primitive_and_length(v: Vec2Z) -> Result<(Vec2Z, u64), MathError> {
    if v.is_zero() {
        return Err(MathError::ZeroVector);
    }
    let g = v.x.unsigned_abs().gcd(&v.y.unsigned_abs());
    let gi = g as i64;
    Ok((Vec2Z::new(v.x / gi, v.y / gi), g))
}

/// Rational plane point.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Vec2Q {
    pub x: BigRat,
    pub y: BigRat,
}

impl Vec2Q {
    pub fn new(x: BigRat, y: BigRat) -> Self {
        Vec2Q { x, y }
    }

    pub fn zero() -> Self {
        Vec2Q::new(BigRat::zero(), BigRat::zero())
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        Vec2Q::new(BigRat::from_integer(x.into()), BigRat::from_integer(y.into()))
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    /// `self + t * v`.
    pub fn add_scaled(&self, v: Vec2Z, t: &BigRat) -> Vec2Q {
        Vec2Q::new(&self.x + t * rat(v.x), &self.y + t * rat(v.y))
    }

    /// Coordinates `(s, t)` with `self = s*u + t*v`; `None` when `u, v`
    /// are parallel.
    pub fn coordinates_in(&self, u: Vec2Z, v: Vec2Z) -> Option<(BigRat, BigRat)> {
        let d = det2(u, v);
        if d == 0 {
            return None;
        }
        let d = rat(d);
        // Cramer on [u v] (s,t)^T = self
        let s = (&self.x * rat(v.y) - &self.y * rat(v.x)) / &d;
        let t = (&self.y * rat(u.x) - &self.x * rat(u.y)) / &d;
        Some((s, t))
    }

    /// Cross product with an integer direction: sign tells on which side of
    /// the line through the origin with direction `v` the point lies.
    pub fn cross(&self, v: Vec2Z) -> BigRat {
        &self.x * rat(v.y) - &self.y * rat(v.x)
    }
}

impl Add<&Vec2Q> for &Vec2Q {
    type Output = Vec2Q;
    fn add(self, o: &Vec2Q) -> Vec2Q {
        Vec2Q::new(&self.x + &o.x, &self.y + &o.y)
    }
}

impl Sub<&Vec2Q> for &Vec2Q {
    type Output = Vec2Q;
    fn sub(self, o: &Vec2Q) -> Vec2Q {
        Vec2Q::new(&self.x - &o.x, &self.y - &o.y)
    }
}

impl fmt::Display for Vec2Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

pub fn rat(v: i64) -> BigRat {
    BigRat::from_integer(BigInt::from(v))
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// Counting binomial: `N!/(K!(N-K)!)` for `0 <= K <= N`, zero otherwise
/// (including every negative `N` or `K`).
pub fn binomial_comb(n: i64, k: i64) -> BigInt {
    if n < 0 || k < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Polynomial binomial `x(x-1)...(x-k+1)/k!`, defined for every integer
/// upper index.
pub fn binomial_gen(x: i64, k: u64) -> BigInt {
    let mut num = BigInt::one();
    for i in 0..k as i64 {
        num *= x - i;
    }
    num / factorial(k)
}

/// Polynomial binomial with a rational upper index.
pub fn binomial_rat(x: &BigRat, k: u64) -> BigRat {
    let mut acc = BigRat::one();
    for i in 0..k {
        acc = acc * (x - rat(i as i64)) / rat(i as i64 + 1);
    }
    acc
}

/// `prod_u (#{v : mu_v = u})!`: the number of orderings of equal entries.
pub fn symmetry_factor(mu: &[u32]) -> BigInt {
    let mut sorted = mu.to_vec();
    sorted.sort_unstable();
    let mut acc = BigInt::one();
    let mut run = 0u64;
    for (i, w) in sorted.iter().enumerate() {
        run = if i > 0 && sorted[i - 1] == *w { run + 1 } else { 1 };
        acc *= run;
    }
    acc
}

/// `(-1)^e` for a possibly negative exponent.
pub fn sign_power(e: i64) -> BigInt {
    if e.rem_euclid(2) == 0 {
        BigInt::one()
    } else {
        -BigInt::one()
    }
}

/// Fixed-point decimal rendering with `places` digits, rounding half away
/// from zero.
pub fn to_decimal(q: &BigRat, places: u32) -> String {
    let scale = BigInt::from(10u32).pow(places);
    let scaled = q.abs() * BigRat::from_integer(scale.clone());
    let rounded = (scaled + BigRat::new(BigInt::one(), BigInt::from(2))).floor().to_integer();
    let (int_part, frac_part) = rounded.div_rem(&scale);
    let neg = q.is_negative() && !rounded.is_zero();
    let sign = if neg { "-" } else { "" };
    if places == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{:0>width$}", frac_part.to_string(), width = places as usize)
    }
}

/// Serializes a rational as a `["num", "den"]` pair of decimal strings.
pub fn rat_to_pair(q: &BigRat) -> [String; 2] {
    [q.numer().to_string(), q.denom().to_string()]
}

pub fn rat_from_pair(pair: &[String; 2]) -> Option<BigRat> {
    let num: BigInt = pair[0].parse().ok()?;
    let den: BigInt = pair[1].parse().ok()?;
    if den.is_zero() {
        return None;
    }
    Some(BigRat::new(num, den))
}

/// Lossy conversion for diagnostics only.
pub fn approx(q: &BigRat) -> f64 {
    q.numer().to_f64().unwrap_or(f64::NAN) / q.denom().to_f64().unwrap_or(f64::NAN)
}

/// Serde helpers that keep big integers as decimal strings on the wire.
pub mod decimal {
    use num_bigint::BigInt;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }

    pub mod vec {
        use num_bigint::BigInt;
        use serde::{de::Error, Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(|x| x.to_string()))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
            let v = Vec::<String>::deserialize(d)?;
            v.iter().map(|s| s.parse().map_err(D::Error::custom)).collect()
        }
    }

    pub mod option {
        use num_bigint::BigInt;
        use serde::{de::Error, Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
            match v {
                Some(x) => s.serialize_some(&x.to_string()),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigInt>, D::Error> {
            let v = Option::<String>::deserialize(d)?;
            v.map(|s| s.parse().map_err(D::Error::custom)).transpose()
        }
    }
}
