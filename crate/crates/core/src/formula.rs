//! Closed-form evaluations: the Hirzebruch and P2 degree formulas, the
//! leaf-profile linear system, predicted curve counts, the conjectural
//! higher-dimensional evaluators and the log-vs-stable comparison report.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactmath::{binomial_comb, decimal, factorial};
use crate::model::{profile_of_class, ClassError, ContactData, CurveClass, FanSpec, RawInstance, Ray, TangencyProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ZeroReason {
    Mu1TooLong,
    Mu3TooLong,
    /// Only reachable through the P2 evaluator.
    Mu4TooLong,
    BinomialZero,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorBreakdown {
    /// `|mu_i|! prod_j mu_ij / sym(mu_i)` for each divisor that enters the
    /// product (all four, or `1, 3, 4` for P2).
    #[serde(with = "decimal::vec")]
    pub divisor_factors: Vec<BigInt>,
    pub a_exponent: i64,
    #[serde(with = "decimal")]
    pub a_power: BigInt,
    #[serde(with = "decimal")]
    pub binomial: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulaResult {
    #[serde(with = "decimal")]
    pub value: BigInt,
    pub zero_reason: Option<ZeroReason>,
    /// Absent when a length gate fired before the product was evaluated.
    pub factors: Option<FactorBreakdown>,
}

impl FormulaResult {
    fn gated(reason: ZeroReason) -> Self {
        FormulaResult { value: BigInt::zero(), zero_reason: Some(reason), factors: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("P2 evaluation needs a = 1 and an empty mu2")]
    NotP2,
}

/// `|mu|! prod(mu) / sym(mu)`, asserting the multinomial is integral.
pub fn divisor_factor(mu: &TangencyProfile) -> BigInt {
    let (q, r) = factorial(mu.len() as u64).div_rem(&mu.symmetry_factor());
    assert!(r.is_zero(), "multinomial |mu|!/sym(mu) is not integral for {:?}", mu.weights());
    q * mu.product()
}

/// Genus-0 tropical Tevelev degree of `H_a`.
pub fn trop_tev(gamma: &ContactData) -> FormulaResult {
    let n1 = gamma.n() as i64 - 1;
    if gamma.len_of(Ray::N1) > n1 {
        return FormulaResult::gated(ZeroReason::Mu1TooLong);
    }
    if gamma.len_of(Ray::N3) > n1 {
        return FormulaResult::gated(ZeroReason::Mu3TooLong);
    }
    let divisor_factors: Vec<BigInt> = Ray::ALL.iter().map(|&r| divisor_factor(gamma.profile(r))).collect();
    let top = n1 - gamma.len_of(Ray::N4);
    let binomial = binomial_comb(top, gamma.len_of(Ray::N2));
    let a_exponent = n1 - gamma.len_of(Ray::N2) - gamma.len_of(Ray::N4);
    if binomial.is_zero() {
        let factors = FactorBreakdown { divisor_factors, a_exponent, a_power: BigInt::zero(), binomial };
        return FormulaResult { value: BigInt::zero(), zero_reason: Some(ZeroReason::BinomialZero), factors: Some(factors) };
    }
    assert!(a_exponent >= 0, "negative a-exponent {a_exponent} with a nonzero binomial for {gamma}");
    let a_power = Pow::pow(BigInt::from(gamma.a()), a_exponent as u64);
    let value = divisor_factors.iter().product::<BigInt>() * &a_power * &binomial;
    FormulaResult { value, zero_reason: None, factors: Some(FactorBreakdown { divisor_factors, a_exponent, a_power, binomial }) }
}

/// The P2 product over the divisors `1, 3, 4`. Every profile longer than
/// `n - 1` forces zero, exactly as in the Hirzebruch case.
pub fn trop_tev_p2(gamma: &ContactData) -> Result<FormulaResult, FormulaError> {
    if gamma.a() != 1 || !gamma.profile(Ray::N2).is_empty() {
        return Err(FormulaError::NotP2);
    }
    let n1 = gamma.n() as i64 - 1;
    for (r, reason) in [(Ray::N1, ZeroReason::Mu1TooLong), (Ray::N3, ZeroReason::Mu3TooLong), (Ray::N4, ZeroReason::Mu4TooLong)] {
        if gamma.len_of(r) > n1 {
            return Ok(FormulaResult::gated(reason));
        }
    }
    let divisor_factors: Vec<BigInt> = [Ray::N1, Ray::N3, Ray::N4].iter().map(|&r| divisor_factor(gamma.profile(r))).collect();
    let value = divisor_factors.iter().product();
    Ok(FormulaResult {
        value,
        zero_reason: None,
        factors: Some(FactorBreakdown { divisor_factors, a_exponent: 0, a_power: BigInt::one(), binomial: BigInt::one() }),
    })
}

/// Degree of the tropical evaluation-times-forgetful map, i.e. before the
/// symmetry factor is divided out.
pub fn labelled_degree(gamma: &ContactData) -> BigInt {
    trop_tev(gamma).value * gamma.symmetry()
}

/// Tallies of leaves from the central vertex by the rays of their ends.
///
/// `alpha..chi` count two-end leaves with rays `{1,2}, {1,3}, {2,3},
/// {3,4}, {4,1}`; `eps[i]` counts one-end leaves along ray `i + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct LeafProfile {
    pub alpha: i64,
    pub beta: i64,
    pub gamma: i64,
    pub delta: i64,
    pub chi: i64,
    pub eps: [u8; 4],
    pub type_b: bool,
}

impl LeafProfile {
    pub fn two_end_total(&self) -> i64 {
        self.alpha + self.beta + self.gamma + self.delta + self.chi
    }

    pub fn is_admissible(&self) -> bool {
        [self.alpha, self.beta, self.gamma, self.delta, self.chi].iter().all(|&c| c >= 0)
    }

    /// The per-divisor end-count equations every contributing curve obeys.
    pub fn satisfies_system(&self, g: &ContactData) -> bool {
        let e = self.eps.map(|x| x as i64);
        self.alpha + self.beta + self.chi == g.len_of(Ray::N1) - e[0]
            && self.alpha + self.gamma == g.len_of(Ray::N2) - e[1]
            && self.beta + self.gamma + self.delta == g.len_of(Ray::N3) - e[2]
            && self.chi + self.delta == g.len_of(Ray::N4) - e[3]
    }

    /// Two-end leaf counter for an unordered pair of distinct rays; `None`
    /// for the parallel pair `{2,4}`.
    pub fn slot_mut(&mut self, r: Ray, s: Ray) -> Option<&mut i64> {
        let (lo, hi) = if r <= s { (r, s) } else { (s, r) };
        match (lo, hi) {
            (Ray::N1, Ray::N2) => Some(&mut self.alpha),
            (Ray::N1, Ray::N3) => Some(&mut self.beta),
            (Ray::N2, Ray::N3) => Some(&mut self.gamma),
            (Ray::N3, Ray::N4) => Some(&mut self.delta),
            (Ray::N1, Ray::N4) => Some(&mut self.chi),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum ProfileError {
    #[error("one-end leaf counts {eps:?} do not match the curve type (type B: {type_b})")]
    InconsistentEps { eps: [u8; 4], type_b: bool },
    #[error("one-end leaves along n2 and n4 together need two points on a vertical line")]
    OppositeVertical,
    #[error("no admissible solution: {component} = {value}")]
    Infeasible { component: &'static str, value: i64 },
}

fn profile_from_alpha(g: &ContactData, eps: [u8; 4], type_b: bool, alpha: i64) -> LeafProfile {
    let n1 = g.n() as i64 - 1 - type_b as i64;
    let e = eps.map(|x| x as i64);
    let (l2, l3, l4) = (g.len_of(Ray::N2), g.len_of(Ray::N3), g.len_of(Ray::N4));
    LeafProfile {
        alpha,
        beta: n1 - l4 - l2 + e[1] + e[3],
        gamma: l2 - e[1] - alpha,
        delta: l3 + l4 - n1 - e[2] - e[3] + alpha,
        chi: n1 - l3 + e[2] - alpha,
        eps,
        type_b,
    }
}

/// Solves the end-count system for `(beta, gamma, delta, chi)` given
/// `alpha` and the one-end leaves.
pub fn solve_profile(g: &ContactData, eps: [u8; 4], type_b: bool, alpha: i64) -> Result<LeafProfile, ProfileError> {
    let total: u32 = eps.iter().map(|&x| x as u32).sum();
    if eps.iter().any(|&x| x > 1) || total != if type_b { 2 } else { 0 } {
        return Err(ProfileError::InconsistentEps { eps, type_b });
    }
    if eps[1] == 1 && eps[3] == 1 {
        return Err(ProfileError::OppositeVertical);
    }
    let p = profile_from_alpha(g, eps, type_b, alpha);
    for (name, v) in [("alpha", p.alpha), ("beta", p.beta), ("gamma", p.gamma), ("delta", p.delta), ("chi", p.chi)] {
        if v < 0 {
            return Err(ProfileError::Infeasible { component: name, value: v });
        }
    }
    assert!(p.satisfies_system(g), "solved profile {p:?} violates the end-count system for {g}");
    Ok(p)
}

/// Whether `|mu3| + |mu4| >= n - 1` (the case without type-B curves).
pub fn is_first_case(g: &ContactData) -> bool {
    g.len_of(Ray::N3) + g.len_of(Ray::N4) >= g.n() as i64 - 1
}

/// Type-A solution with all `eps = 0` and the smallest `alpha`. Components
/// may be negative when the degree vanishes.
pub fn baseline_profile(g: &ContactData) -> LeafProfile {
    let alpha = (g.n() as i64 - 1 - g.len_of(Ray::N3) - g.len_of(Ray::N4)).max(0);
    profile_from_alpha(g, [0; 4], false, alpha)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictedCounts {
    #[serde(with = "decimal")]
    pub type_a_labelled: BigInt,
    #[serde(with = "decimal")]
    pub type_b_labelled: BigInt,
    #[serde(with = "decimal")]
    pub total_labelled: BigInt,
    #[serde(with = "decimal")]
    pub total_unlabelled: BigInt,
}

/// `prod_i |mu_i|!`: the ways of distributing labelled ends.
pub fn end_labellings(g: &ContactData) -> BigInt {
    Ray::ALL.iter().map(|&r| factorial(g.len_of(r) as u64)).product()
}

/// Number of contributing curves for the standard point placements, split
/// by type.
pub fn predicted_counts(g: &ContactData) -> PredictedCounts {
    let zero = PredictedCounts {
        type_a_labelled: BigInt::zero(),
        type_b_labelled: BigInt::zero(),
        total_labelled: BigInt::zero(),
        total_unlabelled: BigInt::zero(),
    };
    let n1 = g.n() as i64 - 1;
    if g.len_of(Ray::N1) > n1 || g.len_of(Ray::N3) > n1 {
        return zero;
    }
    let base = baseline_profile(g);
    if !base.is_admissible() {
        return zero;
    }
    let f = end_labellings(g);
    let type_a = &f * binomial_comb(base.beta + base.gamma, base.beta);
    let type_b = if is_first_case(g) {
        BigInt::zero()
    } else {
        &f * type_b_sum(base.alpha, base.beta, base.gamma)
    };
    let total = &f * binomial_comb(n1 - g.len_of(Ray::N4), g.len_of(Ray::N2));
    assert_eq!(&type_a + &type_b, total, "type split does not add up for {g}");
    let (unlabelled, rem) = total.div_rem(&g.symmetry());
    assert!(rem.is_zero(), "labelled count not divisible by the symmetry factor for {g}");
    PredictedCounts { type_a_labelled: type_a, type_b_labelled: type_b, total_labelled: total, total_unlabelled: unlabelled }
}

/// `sum_{k=1}^{beta} C(alpha+k-1, alpha-1) C(beta+gamma-k, beta-k)`.
pub fn type_b_sum(alpha: i64, beta: i64, gamma: i64) -> BigInt {
    (1..=beta).map(|k| binomial_comb(alpha + k - 1, alpha - 1) * binomial_comb(beta + gamma - k, beta - k)).sum()
}

/// Multiplicity shared by every contributing curve; `None` when the
/// a-exponent is negative (and then no curve contributes).
pub fn per_curve_multiplicity(g: &ContactData) -> Option<BigInt> {
    let e = g.n() as i64 - 1 - g.len_of(Ray::N2) - g.len_of(Ray::N4);
    if e < 0 {
        return None;
    }
    let prod: BigInt = g.profiles().iter().map(|p| p.product()).product();
    Some(prod * Pow::pow(BigInt::from(g.a()), e as u64))
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum ConjectureError {
    #[error("expected {expected} profiles, got {got}")]
    ProfileCount { expected: usize, got: usize },
    #[error("dimension constraint fails: m = {m} but dim(X)(n-1) = {expected}")]
    Dimension { m: i64, expected: i64 },
    #[error("contact orders must be positive")]
    NonPositiveWeight,
    #[error("r and n must be at least 1 and 3")]
    BadParameters,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjectureValue {
    #[serde(with = "decimal")]
    pub value: BigInt,
    pub conjectural: bool,
    pub notes: Vec<String>,
}

/// `dim` is the dimension of the target; the number of ends must be
/// `dim (n - 1)`.
fn conjecture_profiles(r: u32, dim: i64, n: i64, mu: &[Vec<u32>], expected: usize) -> Result<Vec<TangencyProfile>, ConjectureError> {
    if r == 0 || n < 3 {
        return Err(ConjectureError::BadParameters);
    }
    if mu.len() != expected {
        return Err(ConjectureError::ProfileCount { expected, got: mu.len() });
    }
    if mu.iter().flatten().any(|&w| w == 0) {
        return Err(ConjectureError::NonPositiveWeight);
    }
    let m: i64 = mu.iter().map(|p| p.len() as i64).sum();
    if m != dim * (n - 1) {
        return Err(ConjectureError::Dimension { m, expected: dim * (n - 1) });
    }
    Ok(mu.iter().map(|p| TangencyProfile::new(p.clone())).collect())
}

/// Conjectural count for `P(O + O(a))` over `P^r`; profiles ordered as the
/// `r + 1` fibres, then the zero and infinity sections.
pub fn conjecture_pbundle(r: u32, a: u32, mu: &[Vec<u32>], n: i64) -> Result<ConjectureValue, ConjectureError> {
    let ps = conjecture_profiles(r, r as i64 + 1, n, mu, r as usize + 3)?;
    let zero = ps[r as usize + 1].len() as i64;
    let inf = ps[r as usize + 2].len() as i64;
    let binomial = binomial_comb(n - 1 - zero, inf);
    let mut notes = vec!["inner product over mu_ij taken for j = 1..|mu_i|".to_string()];
    let value = if binomial.is_zero() {
        notes.push("binomial factor vanishes".to_string());
        BigInt::zero()
    } else {
        let prod: BigInt = ps.iter().map(divisor_factor).product();
        prod * Pow::pow(BigInt::from(a), (n - 1 - zero - inf) as u64) * binomial
    };
    Ok(ConjectureValue { value, conjectural: true, notes })
}

/// Conjectural count for `P^r` blown up at `r` torus-fixed points; profiles
/// ordered as the `r` exceptional divisors, then the `r + 1` strict
/// transforms of the coordinate hyperplanes.
pub fn conjecture_blowup(r: u32, mu: &[Vec<u32>], n: i64) -> Result<ConjectureValue, ConjectureError> {
    let ps = conjecture_profiles(r, r as i64, n, mu, 2 * r as usize + 1)?;
    let r = r as usize;
    let prod: BigInt = ps.iter().map(divisor_factor).product();
    let binomials: BigInt =
        (0..r).map(|i| binomial_comb(n - 1 - ps[i + r + 1].len() as i64, ps[i].len() as i64)).product();
    Ok(ConjectureValue {
        value: prod * binomials,
        conjectural: true,
        notes: vec![
            "outer product taken over the 2r+1 divisors i = 1..2r+1 (there is no mu_0)".to_string(),
            "inner product over mu_ij taken for j = 1..|mu_i|".to_string(),
        ],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ComparisonVerdict {
    /// Log and stable counts differ.
    Separated,
    /// Both sides agree at these parameters.
    NoSeparation,
    /// The closed formula contradicts the claimed vanishing of the log side.
    PaperDiscrepancy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub parity: Parity,
    pub j: i64,
    pub a: i64,
    pub d: i64,
    pub k: Option<i64>,
    pub n: i64,
    pub class: CurveClass,
    pub constraints_satisfied: bool,
    pub constraint_notes: Vec<String>,
    /// All-ones contact data transported from the class, when feasible.
    pub gamma: Option<RawInstance>,
    pub infeasible: Option<ClassError>,
    /// Log Tevelev degree (0 when the class has no all-ones profile).
    #[serde(with = "decimal")]
    pub lhs: BigInt,
    /// Stable Tevelev degree obtained by deformation to `H_0` or `H_1`.
    #[serde(with = "decimal")]
    pub rhs: BigInt,
    pub distinct: bool,
    pub verdict: ComparisonVerdict,
}

/// Compares the log degree of the all-ones profile of `beta` with the
/// stable degree known for the deformation-equivalent `H_0` or `H_1`.
pub fn comparison_report(parity: Parity, j: i64, d: i64, k: Option<i64>, n: i64) -> ComparisonReport {
    let mut notes = Vec::new();
    let (a, class, rhs) = match parity {
        Parity::Even => {
            if 2 * d != n - 1 {
                notes.push(format!("2d = {} but n - 1 = {}", 2 * d, n - 1));
            }
            if d <= 0 {
                notes.push("d must be positive".to_string());
            }
            if k.is_some() {
                notes.push("k is ignored for even a".to_string());
            }
            (2 * j, CurveClass { x: d * (j + 1), y: d }, BigInt::one())
        }
        Parity::Odd => {
            let k = k.unwrap_or(0);
            if !(0 <= k && k <= d) {
                notes.push(format!("0 <= k <= d fails for k = {k}, d = {d}"));
            }
            if k > n - 1 - d {
                notes.push(format!("k <= n-1-d fails: {k} > {}", n - 1 - d));
            }
            if 3 * d - k != 2 * (n - 1) {
                notes.push(format!("3d - k = {} but 2(n-1) = {}", 3 * d - k, 2 * (n - 1)));
            }
            (2 * j + 1, CurveClass { x: j * (d - k) + d, y: d - k }, binomial_comb(n - 1 - d, k))
        }
    };
    if j < 1 {
        notes.push("j must be at least 1".to_string());
    }
    let fan = FanSpec::hirzebruch(a.max(1) as u32);
    let (gamma, infeasible, lhs) = match profile_of_class(class, fan) {
        Ok(g) => {
            if g.n() as i64 != n {
                notes.push(format!("class forces n = {} instead of {n}", g.n()));
            }
            let v = trop_tev(&g).value;
            (Some(g.to_raw()), None, v)
        }
        Err(e) => (None, Some(e), BigInt::zero()),
    };
    let distinct = lhs != rhs;
    let verdict = if parity == Parity::Even && j == 1 && infeasible.is_none() && !lhs.is_zero() {
        ComparisonVerdict::PaperDiscrepancy
    } else if distinct {
        ComparisonVerdict::Separated
    } else {
        ComparisonVerdict::NoSeparation
    };
    ComparisonReport {
        parity,
        j,
        a,
        d,
        k: if parity == Parity::Odd { Some(k.unwrap_or(0)) } else { None },
        n,
        class,
        constraints_satisfied: notes.is_empty(),
        constraint_notes: notes,
        gamma,
        infeasible,
        lhs,
        rhs,
        distinct,
        verdict,
    }
}

/// Every admissible parameter choice with `d <= d_max`, in increasing `d`.
pub fn comparison_sweep(parity: Parity, j: i64, d_max: i64) -> Vec<ComparisonReport> {
    let mut out = Vec::new();
    for d in 1..=d_max {
        match parity {
            Parity::Even => {
                out.push(comparison_report(parity, j, d, None, 2 * d + 1));
            }
            Parity::Odd => {
                for k in 0..=d {
                    if (3 * d - k) % 2 != 0 {
                        continue;
                    }
                    let n = (3 * d - k) / 2 + 1;
                    if k <= n - 1 - d {
                        out.push(comparison_report(parity, j, d, Some(k), n));
                    }
                }
            }
        }
    }
    out
}
