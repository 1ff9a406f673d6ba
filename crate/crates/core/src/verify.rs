//! Formula-versus-oracle checks over rings, producing one record per check.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::index::sample;
use rand::{rngs::StdRng, SeedableRng};

use crate::error::{Error, Result};
use crate::graph::{CleanGraph, Distance, DistanceProfile};
use crate::matching::{
    construct_block_matching, matching_number_closed_form, maximum_matching_oracle,
    verify_matching, MATCHING_ORACLE_BUDGET,
};
use crate::ring::{count_self_inverse_closed_form, FactoredRing};
use crate::wiener::{
    wiener_closed_form, wiener_from_profile, WienerCase, WienerIndex, WienerVariant,
};

/// Wiener value for `Z_15` that appeared in print; the oracle gives 492.
pub const Z15_REFUTED_WIENER: u64 = 332;

/// Brute-force residue scans stop above this modulus.
pub const SCAN_LIMIT: u64 = 10_000_000;

pub const CSV_HEADER: &str = "ring,check,formula,oracle,match,erratum,formula_ms,oracle_ms";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Check {
    Wiener,
    Distance,
    Diameter,
    Connectivity,
    SelfInverseCount,
    IdempotentCount,
    Matching,
}

impl Check {
    pub const ALL: [Check; 7] = [
        Check::Wiener,
        Check::Distance,
        Check::Diameter,
        Check::Connectivity,
        Check::SelfInverseCount,
        Check::IdempotentCount,
        Check::Matching,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Check::Wiener => "wiener",
            Check::Distance => "distance",
            Check::Diameter => "diameter",
            Check::Connectivity => "connectivity",
            Check::SelfInverseCount => "self-inverse-count",
            Check::IdempotentCount => "idempotent-count",
            Check::Matching => "matching",
        }
    }

    fn needs_graph(&self) -> bool {
        !matches!(self, Check::SelfInverseCount | Check::IdempotentCount)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown check {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationRecord {
    pub ring: String,
    pub check: Check,
    pub formula: String,
    pub oracle: String,
    /// Known published mistake explaining a mismatch (or noting a refuted value).
    pub erratum: String,
    pub formula_ms: f64,
    pub oracle_ms: f64,
    /// Oracle value came from a cache rather than being recomputed.
    pub cached: bool,
}

impl VerificationRecord {
    pub fn matches(&self) -> bool {
        self.formula == self.oracle
    }

    /// Mismatch not explained by a known erratum.
    pub fn is_failure(&self) -> bool {
        !self.matches() && self.erratum.is_empty()
    }

    pub fn csv_row(&self, timings: bool) -> String {
        let (f, o) = if timings {
            (self.formula_ms, self.oracle_ms)
        } else {
            (0.0, 0.0)
        };
        format!(
            "{},{},{},{},{},{},{:.3},{:.3}",
            self.ring,
            self.check,
            self.formula,
            self.oracle,
            self.matches(),
            self.erratum,
            f,
            o
        )
    }
}

/// Source of previously computed oracle values.
pub trait OracleCache {
    fn get(&self, ring: &str, check: Check) -> Option<String>;
}

pub struct NoCache;

impl OracleCache for NoCache {
    fn get(&self, _: &str, _: Check) -> Option<String> {
        None
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub budget: u64,
    pub variant: WienerVariant,
    pub distance_samples: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            budget: crate::graph::DEFAULT_VERTEX_BUDGET,
            variant: WienerVariant::Proof,
            distance_samples: 1000,
            seed: 0x5eed,
        }
    }
}

/// Outcome of [`verify_ring`]: records plus notes on checks that were skipped.
#[derive(Debug, Clone, Default)]
pub struct RingVerification {
    pub records: Vec<VerificationRecord>,
    pub skipped: Vec<String>,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64() * 1e3)
}

/// `x ∈ [1, n)` with `x² ≡ 1 (mod n)`, by incremental squaring (no division in
/// the loop).
pub fn brute_self_inverse_count(n: u64) -> u64 {
    if n == 1 {
        return 0;
    }
    let mut count = 0;
    let mut sq = 1 % n; // x² mod n for x = 1
    for x in 1..n {
        if sq == 1 % n {
            count += 1;
        }
        // (x+1)² = x² + 2x + 1
        let mut step = 2 * x + 1;
        while step >= n {
            step -= n;
        }
        sq += step;
        if sq >= n {
            sq -= n;
        }
    }
    count
}

/// Nonzero `e ∈ [1, n)` with `e² ≡ e (mod n)`.
pub fn brute_idempotent_count(n: u64) -> u64 {
    (1..n)
        .filter(|&e| (e as u128 * e as u128 % n as u128) as u64 == e)
        .count() as u64
}

/// Nonzero idempotent residue tuples by exhaustive scan, if the ring is small.
fn brute_idempotent_count_tuples(ring: &FactoredRing) -> Option<u64> {
    let size = ring
        .factors()
        .iter()
        .try_fold(1u64, |acc, f| acc.checked_mul(f.modulus))?;
    if size > SCAN_LIMIT {
        return None;
    }
    let mut count = 0;
    let mut coords = vec![0u64; ring.n()];
    for _ in 0..size {
        let e = ring.element(coords.clone()).expect("in range");
        if !ring.is_zero(&e) && ring.is_idempotent(&e) {
            count += 1;
        }
        for (c, f) in coords.iter_mut().zip(ring.factors()) {
            *c += 1;
            if *c < f.modulus {
                break;
            }
            *c = 0;
        }
    }
    Some(count)
}

pub fn expected_diameter(ring: &FactoredRing) -> Distance {
    match (ring.n(), ring.phi()) {
        (1, _) => Distance::Infinite,
        (_, 1) => Distance::Finite(1),
        _ => Distance::Finite(3),
    }
}

/// Closed-form vs BFS distances on up to `samples` distinct unordered pairs.
/// Returns `(pairs checked, pairs agreeing)`.
pub fn sample_distance_agreement(g: &CleanGraph, samples: usize, seed: u64) -> Result<(u64, u64)> {
    let n = g.num_vertices();
    let total = n * (n - 1) / 2;
    let mut pairs: Vec<(usize, usize)> = if total <= samples {
        (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .collect()
    } else {
        let mut rng = StdRng::seed_from_u64(seed);
        sample(&mut rng, total, samples)
            .into_iter()
            .map(|k| unrank_pair(k, n))
            .collect()
    };
    pairs.sort_unstable();
    let mut agree = 0;
    let mut i = 0;
    while i < pairs.len() {
        let source = pairs[i].0;
        let row = g.distances_from(source);
        while i < pairs.len() && pairs[i].0 == source {
            let b = pairs[i].1;
            let closed = g.closed_form_distance(g.vertex(source), g.vertex(b))?;
            if closed == row[b] {
                agree += 1;
            }
            i += 1;
        }
    }
    Ok((pairs.len() as u64, agree))
}

/// k-th unordered pair `(a, b)`, `a < b`, in row-major order.
fn unrank_pair(mut k: usize, n: usize) -> (usize, usize) {
    let mut a = 0;
    while k >= n - 1 - a {
        k -= n - 1 - a;
        a += 1;
    }
    (a, a + 1 + k)
}

/// Runs the selected checks on one ring.
pub fn verify_ring(
    ring: &FactoredRing,
    checks: &[Check],
    opts: &VerifyOptions,
    cache: &dyn OracleCache,
) -> Result<RingVerification> {
    let label = ring.to_string();
    let mut out = RingVerification::default();

    let graph_needed = checks
        .iter()
        .any(|c| c.needs_graph() && cache.get(&label, *c).is_none());
    let graph = if graph_needed {
        match CleanGraph::build_with_budget(ring, opts.budget) {
            Ok(g) => Some(g),
            Err(Error::BudgetExceeded { vertices, budget }) => {
                out.skipped.push(format!(
                    "{label}: graph oracle skipped ({vertices} vertices > budget {budget})"
                ));
                None
            }
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let mut profile: Option<(DistanceProfile, f64)> = None;
    let mut profile_of = |g: &CleanGraph| {
        profile
            .get_or_insert_with(|| timed(|| g.distance_profile()))
            .clone()
    };

    for &check in checks {
        let cached = cache.get(&label, check);
        let mut record = VerificationRecord {
            ring: label.clone(),
            check,
            formula: String::new(),
            oracle: String::new(),
            erratum: String::new(),
            formula_ms: 0.0,
            oracle_ms: 0.0,
            cached: cached.is_some(),
        };
        if check.needs_graph() && cached.is_none() && graph.is_none() {
            continue;
        }
        match check {
            Check::Connectivity => {
                (record.formula, record.formula_ms) = timed(|| (ring.n() >= 2).to_string());
                if cached.is_none() {
                    let g = graph.as_ref().unwrap();
                    (record.oracle, record.oracle_ms) = timed(|| g.is_connected().to_string());
                }
            }
            Check::Diameter => {
                (record.formula, record.formula_ms) = timed(|| expected_diameter(ring).to_string());
                if cached.is_none() {
                    let (p, ms) = profile_of(graph.as_ref().unwrap());
                    (record.oracle, record.oracle_ms) = (p.diameter().to_string(), ms);
                }
            }
            Check::Wiener => {
                let (closed, ms) = timed(|| match wiener_closed_form(ring, opts.variant) {
                    Ok(v) => Ok(WienerIndex::Finite(v)),
                    Err(Error::Unsupported(_)) => Ok(WienerIndex::Infinite),
                    Err(e) => Err(e),
                });
                (record.formula, record.formula_ms) = (closed?.to_string(), ms);
                if cached.is_none() {
                    let (p, ms) = profile_of(graph.as_ref().unwrap());
                    let (w, _) = wiener_from_profile(&p)?;
                    (record.oracle, record.oracle_ms) = (w.to_string(), ms);
                }
            }
            Check::Distance => {
                if ring.n() < 2 {
                    out.skipped.push(format!(
                        "{label}: distance check needs at least two local factors"
                    ));
                    continue;
                }
                if cached.is_none() {
                    let g = graph.as_ref().unwrap();
                    let (res, ms) =
                        timed(|| sample_distance_agreement(g, opts.distance_samples, opts.seed));
                    let (checked, agree) = res?;
                    (record.formula, record.oracle, record.oracle_ms) =
                        (checked.to_string(), agree.to_string(), ms);
                } else {
                    let n = ring.vertex_count()? as usize;
                    record.formula = (n * (n - 1) / 2).min(opts.distance_samples).to_string();
                }
            }
            Check::SelfInverseCount => {
                let (f, ms) = timed(|| match ring.modulus() {
                    Some(n) => count_self_inverse_closed_form(n),
                    None => Ok(ring.self_inverse_count()),
                });
                (record.formula, record.formula_ms) = (f?.to_string(), ms);
                if cached.is_none() {
                    let (o, ms) = timed(|| match ring.modulus() {
                        Some(n) if n <= SCAN_LIMIT => Some(brute_self_inverse_count(n)),
                        _ if ring.phi() <= SCAN_LIMIT => {
                            Some(ring.enumerate_units().self_inverse().len() as u64)
                        }
                        _ => None,
                    });
                    let Some(o) = o else {
                        out.skipped
                            .push(format!("{label}: self-inverse scan too large"));
                        continue;
                    };
                    (record.oracle, record.oracle_ms) = (o.to_string(), ms);
                }
            }
            Check::IdempotentCount => {
                (record.formula, record.formula_ms) =
                    timed(|| ring.nonzero_idempotent_count().to_string());
                if cached.is_none() {
                    let (o, ms) = timed(|| match ring.modulus() {
                        Some(n) if n <= SCAN_LIMIT => Some(brute_idempotent_count(n)),
                        _ => brute_idempotent_count_tuples(ring),
                    });
                    let Some(o) = o else {
                        out.skipped
                            .push(format!("{label}: idempotent scan too large"));
                        continue;
                    };
                    (record.oracle, record.oracle_ms) = (o.to_string(), ms);
                }
            }
            Check::Matching => {
                if ring.n() < 2 {
                    out.skipped.push(format!(
                        "{label}: matching check needs at least two local factors"
                    ));
                    continue;
                }
                let g_opt = graph.as_ref();
                let (formula, ms) = timed(|| -> Result<String> {
                    let mu = matching_number_closed_form(ring)?;
                    // the explicit construction must realise the formula
                    let Some(g) = g_opt else {
                        return Ok(mu.to_string());
                    };
                    let m = construct_block_matching(g)?;
                    Ok(if verify_matching(g, &m) && m.size() as u64 == mu {
                        mu.to_string()
                    } else {
                        format!("construction-{}-invalid", m.size())
                    })
                });
                (record.formula, record.formula_ms) = (formula?, ms);
                if cached.is_none() {
                    let g = graph.as_ref().unwrap();
                    if g.num_vertices() > MATCHING_ORACLE_BUDGET {
                        out.skipped.push(format!(
                            "{label}: matching oracle skipped ({} vertices > {MATCHING_ORACLE_BUDGET})",
                            g.num_vertices()
                        ));
                        continue;
                    }
                    let (m, ms) = timed(|| maximum_matching_oracle(g));
                    (record.oracle, record.oracle_ms) = (m?.size().to_string(), ms);
                }
            }
        }
        if let Some(o) = cached {
            record.oracle = o;
        }
        record.erratum = erratum_for(ring, check, opts.variant, &record);
        out.records.push(record);
    }
    Ok(out)
}

fn erratum_for(
    ring: &FactoredRing,
    check: Check,
    variant: WienerVariant,
    record: &VerificationRecord,
) -> String {
    if check != Check::Wiener {
        return String::new();
    }
    let mut notes = Vec::new();
    if !record.matches()
        && variant == WienerVariant::Statement
        && WienerCase::of(ring) == WienerCase::Two
    {
        notes.push("statement-case2-coefficients");
    }
    // proof-side counting treats complement pairs as the only orthogonal
    // pairs; exact only for two local factors
    if !record.matches()
        && ring.n() >= 3
        && variant != WienerVariant::Corrected
        && wiener_closed_form(ring, WienerVariant::Corrected)
            .is_ok_and(|w| w.to_string() == record.oracle)
    {
        notes.push("multi-factor-orthogonal-pairs");
    }
    if ring.modulus() == Some(15) && record.oracle != Z15_REFUTED_WIENER.to_string() {
        notes.push("z15-value-332-refuted");
    }
    notes.join(";")
}

/// Rings `Z_n` for `n` in `[lo, hi]` with at least `min_primes` distinct primes.
pub fn modulus_range(lo: u64, hi: u64, min_primes: usize) -> Result<Vec<FactoredRing>> {
    (lo.max(2)..=hi)
        .map(FactoredRing::from_modulus)
        .filter(|r| {
            r.as_ref()
                .map_or(true, |r| r.distinct_primes() >= min_primes)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brute_counts() {
        assert_eq!(brute_self_inverse_count(15), 4);
        assert_eq!(brute_self_inverse_count(8), 4);
        assert_eq!(brute_self_inverse_count(12), 4);
        assert_eq!(brute_self_inverse_count(2), 1);
        assert_eq!(brute_idempotent_count(12), 3);
        assert_eq!(brute_idempotent_count(30), 7);
        let r = FactoredRing::make_ring(&[(2, 1), (2, 1), (3, 1)]).unwrap();
        assert_eq!(brute_idempotent_count_tuples(&r), Some(7));
    }

    #[test]
    fn unrank_covers_all_pairs() {
        let n = 7;
        let got: Vec<_> = (0..n * (n - 1) / 2).map(|k| unrank_pair(k, n)).collect();
        let want: Vec<_> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn z15_all_checks_match() {
        let ring = FactoredRing::from_modulus(15).unwrap();
        let v = verify_ring(&ring, &Check::ALL, &VerifyOptions::default(), &NoCache).unwrap();
        assert_eq!(v.records.len(), 7);
        for r in &v.records {
            assert!(r.matches(), "{r:?}");
        }
        let w = v.records.iter().find(|r| r.check == Check::Wiener).unwrap();
        assert_eq!(w.oracle, "492");
        assert_eq!(w.erratum, "z15-value-332-refuted");
    }

    #[test]
    fn statement_variant_is_flagged_as_erratum() {
        let ring = FactoredRing::from_modulus(12).unwrap();
        let opts = VerifyOptions {
            variant: WienerVariant::Statement,
            ..Default::default()
        };
        let v = verify_ring(&ring, &[Check::Wiener], &opts, &NoCache).unwrap();
        let r = &v.records[0];
        assert!(!r.matches());
        assert!(!r.is_failure());
        assert_eq!(r.erratum, "statement-case2-coefficients");
    }

    #[test]
    fn three_factor_mismatch_is_explained() {
        let ring = FactoredRing::from_modulus(30).unwrap();
        let v = verify_ring(&ring, &[Check::Wiener], &VerifyOptions::default(), &NoCache).unwrap();
        let r = &v.records[0];
        assert_eq!((r.formula.as_str(), r.oracle.as_str()), ("2756", "2588"));
        assert_eq!(r.erratum, "multi-factor-orthogonal-pairs");
        let opts = VerifyOptions {
            variant: WienerVariant::Corrected,
            ..Default::default()
        };
        let v = verify_ring(&ring, &[Check::Wiener], &opts, &NoCache).unwrap();
        assert!(v.records[0].matches());
        assert!(v.records[0].erratum.is_empty());
    }

    #[test]
    fn single_factor_ring() {
        let ring = FactoredRing::from_modulus(8).unwrap();
        let v = verify_ring(&ring, &Check::ALL, &VerifyOptions::default(), &NoCache).unwrap();
        for r in &v.records {
            assert!(r.matches(), "{r:?}");
        }
        let w = v.records.iter().find(|r| r.check == Check::Wiener).unwrap();
        assert_eq!((w.formula.as_str(), w.oracle.as_str()), ("inf", "inf"));
        assert_eq!(v.skipped.len(), 2);
    }

    #[test]
    fn cache_hits_skip_the_oracle() {
        struct Fixed;
        impl OracleCache for Fixed {
            fn get(&self, _: &str, _: Check) -> Option<String> {
                Some("492".into())
            }
        }
        let ring = FactoredRing::from_modulus(15).unwrap();
        let v = verify_ring(&ring, &[Check::Wiener], &VerifyOptions::default(), &Fixed).unwrap();
        assert!(v.records[0].cached);
        assert!(v.records[0].matches());
    }

    #[test]
    fn csv_row_format() {
        let ring = FactoredRing::from_modulus(12).unwrap();
        let v = verify_ring(
            &ring,
            &[Check::IdempotentCount],
            &VerifyOptions::default(),
            &NoCache,
        )
        .unwrap();
        assert_eq!(
            v.records[0].csv_row(false),
            "12,idempotent-count,3,3,true,,0.000,0.000"
        );
    }

    #[test]
    fn check_names_round_trip() {
        for c in Check::ALL {
            assert_eq!(c.as_str().parse::<Check>().unwrap(), c);
        }
        assert!("nope".parse::<Check>().is_err());
    }
}
