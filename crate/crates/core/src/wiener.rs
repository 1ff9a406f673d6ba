//! Wiener index of `Cl₂(R)`: closed forms and the exhaustive BFS oracle.
//!
//! Closed forms are evaluated in exact integers. Forms with a final division by
//! two check the numerator's parity first; an odd numerator is reported as a
//! [`Error::FormulaViolation`] instead of being rounded.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{CleanGraph, DistanceProfile};
use crate::ring::{count_self_inverse_closed_form, factorize, FactoredRing};

/// Exact Wiener value, or the sentinel for disconnected graphs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum WienerIndex {
    Finite(BigInt),
    Infinite,
}

impl WienerIndex {
    pub fn finite(&self) -> Option<&BigInt> {
        match self {
            WienerIndex::Finite(v) => Some(v),
            WienerIndex::Infinite => None,
        }
    }
}

impl From<u64> for WienerIndex {
    fn from(v: u64) -> Self {
        WienerIndex::Finite(BigInt::from(v))
    }
}

impl fmt::Display for WienerIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WienerIndex::Finite(v) => write!(f, "{v}"),
            WienerIndex::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for WienerIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" => Ok(WienerIndex::Infinite),
            t => t
                .parse::<BigInt>()
                .map(WienerIndex::Finite)
                .map_err(|_| Error::InvalidInput(format!("bad Wiener value {s:?}"))),
        }
    }
}

/// Which coefficient family to use for rings whose units are all self-inverse
/// (`|U''| = 0`, `|U'| > 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum WienerVariant {
    /// Coefficients obtained by summing the per-block distance terms:
    /// `r²(2·4ⁿ − 5·2ⁿ + 5) − r(4ⁿ − 2·2ⁿ + 3)`.
    #[default]
    Proof,
    /// Coefficients `r²(2·4ⁿ − 17·2ⁿ + 21) − r(2·4ⁿ − 8·2ⁿ + 11)`. Kept only to
    /// document that they disagree with the oracle.
    Statement,
    /// Pair counting over all orthogonal idempotent pairs. Unlike the other two
    /// it does not assume the only orthogonal pairs are complements, so it
    /// stays exact for three or more local factors.
    Corrected,
}

impl WienerVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            WienerVariant::Proof => "proof",
            WienerVariant::Statement => "statement",
            WienerVariant::Corrected => "corrected",
        }
    }
}

impl fmt::Display for WienerVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WienerVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proof" => Ok(WienerVariant::Proof),
            "statement" => Ok(WienerVariant::Statement),
            "corrected" => Ok(WienerVariant::Corrected),
            other => Err(Error::InvalidInput(format!(
                "unknown Wiener variant {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WienerCase {
    /// `|U''| = 0`, `|U'| = 1`: the graph is complete.
    One,
    /// `|U''| = 0`, `|U'| > 1`.
    Two,
    /// `|U''| ≠ 0`.
    Three,
}

impl WienerCase {
    pub fn of(ring: &FactoredRing) -> Self {
        match (ring.paired_unit_count(), ring.self_inverse_count()) {
            (0, 1) => WienerCase::One,
            (0, _) => WienerCase::Two,
            _ => WienerCase::Three,
        }
    }

    pub fn number(&self) -> u8 {
        match self {
            WienerCase::One => 1,
            WienerCase::Two => 2,
            WienerCase::Three => 3,
        }
    }
}

fn halve(numerator: BigInt, what: &str) -> Result<BigInt> {
    let two = BigInt::from(2);
    if !(&numerator % &two).is_zero() {
        return Err(Error::FormulaViolation(format!(
            "{what}: odd numerator {numerator}"
        )));
    }
    Ok(numerator / two)
}

fn pow2(n: usize) -> BigInt {
    BigInt::one() << n
}

/// `½(2ⁿ − 2)(2ⁿ − 1)`: the Wiener index of `K_{2ⁿ−1}`.
pub fn case_one(n: usize) -> Result<BigInt> {
    let p = pow2(n);
    halve((&p - 2) * (&p - 1), "case 1")
}

pub fn case_two_proof(n: usize, r: &BigInt) -> Result<BigInt> {
    let p = pow2(n);
    let pp = &p * &p;
    let a = 2 * &pp - 5 * &p + 5;
    let b = &pp - 2 * &p + 3;
    halve(r * r * a - r * b, "case 2 (proof)")
}

pub fn case_two_statement(n: usize, r: &BigInt) -> Result<BigInt> {
    let p = pow2(n);
    let pp = &p * &p;
    let a = 2 * &pp - 17 * &p + 21;
    let b = 2 * &pp - 8 * &p + 11;
    halve(r * r * a - r * b, "case 2 (statement)")
}

/// `½[|U|²(2·4ⁿ − 5·2ⁿ + 5) − |U|(4ⁿ − 2ⁿ + 3) + r·2ⁿ]`.
pub fn case_three(n: usize, units: &BigInt, r: &BigInt) -> Result<BigInt> {
    let p = pow2(n);
    let pp = &p * &p;
    let a = 2 * &pp - 5 * &p + 5;
    let b = &pp - &p + 3;
    halve(units * units * a - units * b + r * &p, "case 3")
}

/// Exact count from the distance rule: same-cell pairs are at distance 1 when
/// the units are mutually inverse, else 3 in the identity cell and 2 elsewhere;
/// pairs across cells are at 1 when the idempotents are orthogonal or the
/// units are mutually inverse, else 2.
pub fn corrected(n: usize, units: &BigInt, r: &BigInt) -> Result<BigInt> {
    let cells = pow2(n) - 1;
    let unit_pairs = units * (units - 1) / 2;
    let inverse_pairs = halve(units - r, "inverse unit pairs")?;
    // unordered pairs of nonzero idempotents with disjoint supports
    let three_n = num_traits::pow(BigInt::from(3), n);
    let orthogonal = halve(three_n - 2 * pow2(n) + 1, "orthogonal pairs")?;
    let cell_pairs = &cells * (&cells - 1) / 2;
    let non_orthogonal = &cell_pairs - &orthogonal;

    let identity_cell = &inverse_pairs + 3 * (&unit_pairs - &inverse_pairs);
    let other_cells = (&cells - 1) * (&inverse_pairs + 2 * (&unit_pairs - &inverse_pairs));
    let across_orth = &orthogonal * units * units;
    let across_other = non_orthogonal * (2 * units * units - units);
    Ok(identity_cell + other_cells + across_orth + across_other)
}

/// Closed-form Wiener index for a ring with at least two local factors.
pub fn wiener_closed_form(ring: &FactoredRing, variant: WienerVariant) -> Result<BigInt> {
    let n = ring.n();
    if n < 2 {
        return Err(Error::Unsupported(format!(
            "{ring} has one local factor: Cl2 is disconnected and its Wiener index is infinite"
        )));
    }
    let units = BigInt::from(ring.phi());
    let r = BigInt::from(ring.self_inverse_count());
    if variant == WienerVariant::Corrected {
        return corrected(n, &units, &r);
    }
    match WienerCase::of(ring) {
        WienerCase::One => case_one(n),
        WienerCase::Two if variant == WienerVariant::Statement => case_two_statement(n, &r),
        WienerCase::Two => case_two_proof(n, &r),
        WienerCase::Three => case_three(n, &units, &r),
    }
}

/// Wiener index of `Cl₂(Z_n)` from `φ(n)`, the number `k` of distinct primes
/// and the closed-form count of square roots of unity.
pub fn wiener_zn(n: u64) -> Result<WienerIndex> {
    let factors = factorize(n)?;
    let k = factors.len();
    if k == 1 {
        return Ok(WienerIndex::Infinite);
    }
    let phi = factors
        .iter()
        .try_fold(1u64, |acc, &(p, a)| {
            acc.checked_mul(p.pow(a) - p.pow(a - 1))
        })
        .ok_or(Error::Overflow("Euler phi"))?;
    let r = count_self_inverse_closed_form(n)?;
    case_three(k, &BigInt::from(phi), &BigInt::from(r)).map(WienerIndex::Finite)
}

/// Wiener index and unordered pair counts per distance from a BFS profile.
pub fn wiener_from_profile(profile: &DistanceProfile) -> Result<(WienerIndex, Vec<u64>)> {
    let counts = profile.unordered_counts().ok_or_else(|| {
        Error::FormulaViolation("odd ordered pair count: BFS distances are not symmetric".into())
    })?;
    if !profile.is_connected() {
        return Ok((WienerIndex::Infinite, counts));
    }
    let total = counts
        .iter()
        .enumerate()
        .fold(BigInt::zero(), |acc, (d, &c)| {
            acc + BigInt::from(d) * BigInt::from(c)
        });
    Ok((WienerIndex::Finite(total), counts))
}

/// Sum of BFS distances over all unordered vertex pairs.
pub fn wiener_oracle(g: &CleanGraph) -> Result<WienerIndex> {
    wiener_from_profile(&g.distance_profile()).map(|(w, _)| w)
}

/// Closed form against oracle for one ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WienerReport {
    pub ring: String,
    pub case: WienerCase,
    pub variant: WienerVariant,
    pub closed_form: WienerIndex,
    /// `None` when the graph exceeds the vertex budget.
    pub oracle: Option<WienerIndex>,
    /// `pairs_at_distance[d]` = unordered pairs at distance `d` (index 0 unused).
    pub pairs_at_distance: Vec<u64>,
}

impl WienerReport {
    pub fn build(ring: &FactoredRing, variant: WienerVariant, budget: u64) -> Result<Self> {
        let closed_form = match wiener_closed_form(ring, variant) {
            Ok(v) => WienerIndex::Finite(v),
            Err(Error::Unsupported(_)) => WienerIndex::Infinite,
            Err(e) => return Err(e),
        };
        let (oracle, pairs_at_distance) = match CleanGraph::build_with_budget(ring, budget) {
            Ok(g) => {
                let (w, counts) = wiener_from_profile(&g.distance_profile())?;
                (Some(w), counts)
            }
            Err(Error::BudgetExceeded { .. }) => (None, Vec::new()),
            Err(e) => return Err(e),
        };
        Ok(WienerReport {
            ring: ring.to_string(),
            case: WienerCase::of(ring),
            variant,
            closed_form,
            oracle,
            pairs_at_distance,
        })
    }

    /// `None` when the oracle was skipped.
    pub fn matches(&self) -> Option<bool> {
        self.oracle.as_ref().map(|o| *o == self.closed_form)
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Doc<'a> {
            ring: &'a str,
            case: u8,
            variant: &'static str,
            closed_form: String,
            oracle: Option<String>,
            #[serde(rename = "match")]
            matches: Option<bool>,
            pairs_at_distance: serde_json::Map<String, serde_json::Value>,
        }
        let pairs = self
            .pairs_at_distance
            .iter()
            .enumerate()
            .skip(1)
            .map(|(d, &c)| (d.to_string(), serde_json::Value::from(c)))
            .collect();
        let doc = Doc {
            ring: &self.ring,
            case: self.case.number(),
            variant: self.variant.as_str(),
            closed_form: self.closed_form.to_string(),
            oracle: self.oracle.as_ref().map(ToString::to_string),
            matches: self.matches(),
            pairs_at_distance: pairs,
        };
        serde_json::to_value(doc).expect("report serializes")
    }
}

/// True when a closed form is negative, which no Wiener index can be.
pub fn is_impossible(value: &BigInt) -> bool {
    value.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(factors: &[(u64, u32)]) -> FactoredRing {
        FactoredRing::make_ring(factors).unwrap()
    }

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn closed_form_examples() {
        let k7 = ring(&[(2, 1); 3]);
        assert_eq!(WienerCase::of(&k7), WienerCase::One);
        assert_eq!(
            wiener_closed_form(&k7, WienerVariant::Proof).unwrap(),
            big(21)
        );

        let z12 = FactoredRing::from_modulus(12).unwrap();
        assert_eq!(WienerCase::of(&z12), WienerCase::Two);
        assert_eq!(
            wiener_closed_form(&z12, WienerVariant::Proof).unwrap(),
            big(114)
        );
        let stmt = wiener_closed_form(&z12, WienerVariant::Statement).unwrap();
        assert_eq!(stmt, big(-142));
        assert!(is_impossible(&stmt));

        let z15 = FactoredRing::from_modulus(15).unwrap();
        assert_eq!(WienerCase::of(&z15), WienerCase::Three);
        assert_eq!(
            wiener_closed_form(&z15, WienerVariant::Proof).unwrap(),
            big(492)
        );
        assert_eq!(
            wiener_closed_form(&z15, WienerVariant::Statement).unwrap(),
            big(492)
        );
    }

    #[test]
    fn single_factor_is_unsupported() {
        let z8 = FactoredRing::from_modulus(8).unwrap();
        assert!(matches!(
            wiener_closed_form(&z8, WienerVariant::Proof),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn zn_examples() {
        assert_eq!(wiener_zn(8).unwrap(), WienerIndex::Infinite);
        assert_eq!(wiener_zn(15).unwrap(), WienerIndex::from(492));
        assert_eq!(wiener_zn(12).unwrap(), WienerIndex::from(114));
        assert!(wiener_zn(1).is_err());
    }

    #[test]
    fn oracle_examples() {
        let oracle = |r: &FactoredRing| wiener_oracle(&CleanGraph::build(r).unwrap()).unwrap();
        assert_eq!(
            oracle(&FactoredRing::from_modulus(15).unwrap()),
            WienerIndex::from(492)
        );
        assert_eq!(
            oracle(&FactoredRing::from_modulus(12).unwrap()),
            WienerIndex::from(114)
        );
        assert_eq!(
            oracle(&FactoredRing::from_modulus(4).unwrap()),
            WienerIndex::Infinite
        );
        assert_eq!(oracle(&ring(&[(2, 1); 2])), WienerIndex::from(3));
    }

    #[test]
    fn case_three_with_no_paired_units_reduces_to_case_two() {
        for n in 2..=10 {
            for r in 1..=64 {
                let r = big(r);
                assert_eq!(
                    case_three(n, &r, &r).unwrap(),
                    case_two_proof(n, &r).unwrap(),
                    "n={n} r={r}"
                );
            }
        }
    }

    #[test]
    fn corrected_agrees_with_proof_for_two_factors() {
        for (u, r) in [(2, 2), (4, 4), (8, 4), (12, 8), (40, 4)] {
            let (u, r) = (big(u), big(r));
            let expected = if u == r {
                case_two_proof(2, &r)
            } else {
                case_three(2, &u, &r)
            };
            assert_eq!(corrected(2, &u, &r).unwrap(), expected.unwrap());
        }
        assert_eq!(
            corrected(3, &big(1), &big(1)).unwrap(),
            case_one(3).unwrap()
        );
    }

    #[test]
    fn report_z15() {
        let report = WienerReport::build(
            &FactoredRing::from_modulus(15).unwrap(),
            WienerVariant::Proof,
            50_000,
        )
        .unwrap();
        assert_eq!(report.matches(), Some(true));
        assert_eq!(report.pairs_at_distance, vec![0, 86, 164, 26]);
        let json = report.to_json();
        assert_eq!(json["oracle"], "492");
        assert_eq!(json["case"], 3);
        assert_eq!(json["pairs_at_distance"]["3"], 26);
    }

    #[test]
    fn report_without_oracle() {
        let r = FactoredRing::from_modulus(2 * 3 * 5 * 7 * 11).unwrap();
        let report = WienerReport::build(&r, WienerVariant::Proof, 10).unwrap();
        assert_eq!(report.oracle, None);
        assert_eq!(report.matches(), None);
        assert_eq!(report.to_json()["match"], serde_json::Value::Null);
    }

    #[test]
    fn value_text_round_trip() {
        for s in ["0", "492", "-142", "inf"] {
            assert_eq!(s.parse::<WienerIndex>().unwrap().to_string(), s);
        }
    }
}
