//! Finite commutative rings presented as products of local factors `Z_{p^α}`.
//!
//! Elements are residue tuples with one coordinate per local factor. Idempotents
//! and units are enumerated per factor and combined by Cartesian product, so the
//! cost depends on the number of idempotents and units, never on the modulus.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of local factors a ring may have; idempotents are tracked as
/// support masks in a `u64`.
pub const MAX_FACTORS: usize = 62;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = 7u64;
    let mut step = [4u64, 2, 4, 2, 4, 6, 2, 6].iter().cycle();
    while d.checked_mul(d).is_some_and(|sq| sq <= n) {
        if n.is_multiple_of(d) {
            return false;
        }
        d += step.next().unwrap();
    }
    true
}

/// Prime-power decomposition of `n` with strictly increasing primes.
pub fn factorize(n: u64) -> Result<Vec<(u64, u32)>> {
    if n <= 1 {
        return Err(Error::InvalidInput(format!(
            "cannot factor {n}: need n >= 2"
        )));
    }
    let mut out = Vec::new();
    let mut rest = n;
    let mut push = |rest: &mut u64, p: u64| {
        let mut e = 0;
        while (*rest).is_multiple_of(p) {
            *rest /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    };
    push(&mut rest, 2);
    push(&mut rest, 3);
    let mut d = 5u64;
    while d.checked_mul(d).is_some_and(|sq| sq <= rest) {
        push(&mut rest, d);
        push(&mut rest, d + 2);
        d += 6;
    }
    if rest > 1 {
        out.push((rest, 1));
    }
    Ok(out)
}

/// Number of solutions of `x² ≡ 1 (mod n)`, from the 2-adic valuation `m` of `n`
/// and the number `h` of distinct odd primes dividing it.
pub fn count_self_inverse_closed_form(n: u64) -> Result<u64> {
    let factors = factorize(n)?;
    let m = factors.iter().find(|(p, _)| *p == 2).map_or(0, |&(_, a)| a);
    let h = factors.iter().filter(|(p, _)| *p != 2).count() as u32;
    let extra = match m {
        0 | 1 => 0,
        2 => 1,
        _ => 2,
    };
    1u64.checked_shl(h + extra)
        .filter(|_| h + extra < 64)
        .ok_or(Error::Overflow("self-inverse count"))
}

fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// Ring description as typed by a user: a bare modulus or an explicit list of
/// prime-power factors (duplicates allowed).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RingSpec {
    Modulus(u64),
    Factors(Vec<(u64, u32)>),
}

impl FromStr for RingSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::InvalidInput("empty ring specification".into()));
        }
        if !s.contains(['*', '^']) {
            let n = s
                .parse::<u64>()
                .map_err(|_| Error::InvalidInput(format!("not a modulus or factor list: {s:?}")))?;
            return Ok(RingSpec::Modulus(n));
        }
        let mut factors = Vec::new();
        for term in s.split('*') {
            let term = term.trim();
            let (p, a) = match term.split_once('^') {
                Some((p, a)) => (p.trim(), a.trim()),
                None => (term, "1"),
            };
            let p = p
                .parse::<u64>()
                .map_err(|_| Error::InvalidInput(format!("bad prime in term {term:?}")))?;
            let a = a
                .parse::<u32>()
                .map_err(|_| Error::InvalidInput(format!("bad exponent in term {term:?}")))?;
            factors.push((p, a));
        }
        Ok(RingSpec::Factors(factors))
    }
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingSpec::Modulus(n) => write!(f, "{n}"),
            RingSpec::Factors(fs) => {
                for (i, (p, a)) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str("*")?;
                    }
                    write!(f, "{p}^{a}")?;
                }
                Ok(())
            }
        }
    }
}

/// One local factor `Z_{p^α}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalFactor {
    pub prime: u64,
    pub exponent: u32,
    pub modulus: u64,
}

impl LocalFactor {
    /// `|U(Z_{p^α})| = p^α − p^{α−1}`.
    pub fn unit_count(&self) -> u64 {
        self.modulus - self.modulus / self.prime
    }

    /// Number of square roots of unity in `Z_{p^α}`: the unit group is cyclic
    /// for odd `p`, and `Z_{2^α}^*` is `C₂ × C_{2^{α−2}}` for `α ≥ 3`.
    pub fn self_inverse_count(&self) -> u64 {
        match (self.prime, self.exponent) {
            (2, 1) => 1,
            (2, 2) => 2,
            (2, _) => 4,
            _ => 2,
        }
    }
}

/// Residue tuple; `coords[i]` lives in `[0, p_i^{α_i})`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RingElement {
    pub coords: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredRing {
    spec: RingSpec,
    factors: Vec<LocalFactor>,
    modulus: Option<u64>,
    phi: u64,
    self_inverse: u64,
}

impl FactoredRing {
    pub fn make_ring(factors: &[(u64, u32)]) -> Result<Self> {
        Self::with_spec(RingSpec::Factors(factors.to_vec()), factors)
    }

    /// Builds `Z_n` through its prime factorization.
    pub fn from_modulus(n: u64) -> Result<Self> {
        let factors = factorize(n)?;
        Self::with_spec(RingSpec::Modulus(n), &factors)
    }

    pub fn from_spec(spec: &RingSpec) -> Result<Self> {
        match spec {
            RingSpec::Modulus(n) => Self::from_modulus(*n),
            RingSpec::Factors(fs) => Self::make_ring(fs),
        }
    }

    fn with_spec(spec: RingSpec, factors: &[(u64, u32)]) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidInput(
                "ring needs at least one local factor".into(),
            ));
        }
        if factors.len() > MAX_FACTORS {
            return Err(Error::InvalidInput(format!(
                "{} local factors exceed the supported maximum of {MAX_FACTORS}",
                factors.len()
            )));
        }
        let mut locals = Vec::with_capacity(factors.len());
        for &(p, a) in factors {
            if !is_prime(p) {
                return Err(Error::InvalidInput(format!("{p} is not prime")));
            }
            if a == 0 {
                return Err(Error::InvalidInput(format!("exponent of {p} must be >= 1")));
            }
            let modulus = p.checked_pow(a).ok_or(Error::Overflow("local modulus"))?;
            // Local products are formed in u128, moduli must fit in u64.
            locals.push(LocalFactor {
                prime: p,
                exponent: a,
                modulus,
            });
        }
        let mut phi = 1u64;
        let mut self_inverse = 1u64;
        for f in &locals {
            phi = phi
                .checked_mul(f.unit_count())
                .ok_or(Error::Overflow("unit count"))?;
            self_inverse = self_inverse
                .checked_mul(f.self_inverse_count())
                .ok_or(Error::Overflow("self-inverse count"))?;
        }
        let distinct = {
            let mut ps: Vec<u64> = locals.iter().map(|f| f.prime).collect();
            ps.sort_unstable();
            ps.windows(2).all(|w| w[0] != w[1])
        };
        let modulus = if distinct {
            locals
                .iter()
                .try_fold(1u64, |acc, f| acc.checked_mul(f.modulus))
        } else {
            None
        };
        Ok(FactoredRing {
            spec,
            factors: locals,
            modulus,
            phi,
            self_inverse,
        })
    }

    pub fn spec(&self) -> &RingSpec {
        &self.spec
    }

    pub fn factors(&self) -> &[LocalFactor] {
        &self.factors
    }

    /// Number of local factors.
    pub fn n(&self) -> usize {
        self.factors.len()
    }

    /// Number of distinct primes among the factors.
    pub fn distinct_primes(&self) -> usize {
        let mut ps: Vec<u64> = self.factors.iter().map(|f| f.prime).collect();
        ps.sort_unstable();
        ps.dedup();
        ps.len()
    }

    /// `Some(n)` when the ring is `Z_n` via CRT (pairwise distinct primes).
    pub fn modulus(&self) -> Option<u64> {
        self.modulus
    }

    pub fn phi(&self) -> u64 {
        self.phi
    }

    /// Factors with an odd prime.
    pub fn h(&self) -> usize {
        self.factors.iter().filter(|f| f.prime != 2).count()
    }

    /// Total exponent of 2 across the factors (the 2-adic valuation of the
    /// modulus in the CRT view).
    pub fn m(&self) -> u32 {
        self.factors
            .iter()
            .filter(|f| f.prime == 2)
            .map(|f| f.exponent)
            .sum()
    }

    /// `|U'(R)|`, the number of units with `u² = 1`.
    pub fn self_inverse_count(&self) -> u64 {
        self.self_inverse
    }

    /// `|U''(R)|`.
    pub fn paired_unit_count(&self) -> u64 {
        self.phi - self.self_inverse
    }

    /// `2ⁿ − 1`, the number of nonzero idempotents.
    pub fn nonzero_idempotent_count(&self) -> u64 {
        (1u64 << self.n()) - 1
    }

    /// `|V(Cl₂(R))| = (2ⁿ − 1)·φ`.
    pub fn vertex_count(&self) -> Result<u64> {
        self.nonzero_idempotent_count()
            .checked_mul(self.phi)
            .ok_or(Error::Overflow("vertex count"))
    }

    pub fn zero(&self) -> RingElement {
        RingElement {
            coords: vec![0; self.n()],
        }
    }

    pub fn one(&self) -> RingElement {
        RingElement {
            coords: self.factors.iter().map(|f| 1 % f.modulus).collect(),
        }
    }

    pub fn element(&self, coords: Vec<u64>) -> Result<RingElement> {
        if coords.len() != self.n() {
            return Err(Error::Domain(format!(
                "element has {} coordinates, ring has {} factors",
                coords.len(),
                self.n()
            )));
        }
        for (c, f) in coords.iter().zip(&self.factors) {
            if *c >= f.modulus {
                return Err(Error::Domain(format!(
                    "coordinate {c} out of range mod {}",
                    f.modulus
                )));
            }
        }
        Ok(RingElement { coords })
    }

    /// Image of the integer `x` under `Z → R`.
    pub fn from_residue(&self, x: u64) -> RingElement {
        RingElement {
            coords: self.factors.iter().map(|f| x % f.modulus).collect(),
        }
    }

    /// CRT reconstruction; `None` without a single-modulus view.
    pub fn to_residue(&self, a: &RingElement) -> Option<u64> {
        let total = self.modulus?;
        let mut x: u128 = 0;
        let mut m: u128 = 1;
        for (c, f) in a.coords.iter().zip(&self.factors) {
            let fm = f.modulus as u128;
            let cur = (x % fm) as u64;
            let diff = (*c as u128 + fm - cur as u128) % fm;
            let m_inv = mod_inverse((m % fm) as u64, f.modulus).expect("coprime moduli") as u128;
            let t = diff * m_inv % fm;
            x += m * t;
            m *= fm;
        }
        debug_assert_eq!(m, total as u128);
        Some(x as u64)
    }

    pub fn add(&self, a: &RingElement, b: &RingElement) -> RingElement {
        self.zip_with(a, b, |x, y, m| ((x as u128 + y as u128) % m as u128) as u64)
    }

    pub fn mul(&self, a: &RingElement, b: &RingElement) -> RingElement {
        self.zip_with(a, b, |x, y, m| ((x as u128 * y as u128) % m as u128) as u64)
    }

    fn zip_with(
        &self,
        a: &RingElement,
        b: &RingElement,
        op: impl Fn(u64, u64, u64) -> u64,
    ) -> RingElement {
        debug_assert_eq!(a.coords.len(), self.n());
        debug_assert_eq!(b.coords.len(), self.n());
        let coords = a
            .coords
            .iter()
            .zip(&b.coords)
            .zip(&self.factors)
            .map(|((&x, &y), f)| op(x, y, f.modulus))
            .collect();
        RingElement { coords }
    }

    pub fn is_zero(&self, a: &RingElement) -> bool {
        a.coords.iter().all(|&c| c == 0)
    }

    pub fn is_one(&self, a: &RingElement) -> bool {
        *a == self.one()
    }

    pub fn is_idempotent(&self, a: &RingElement) -> bool {
        self.mul(a, a) == *a
    }

    pub fn is_unit(&self, a: &RingElement) -> bool {
        a.coords
            .iter()
            .zip(&self.factors)
            .all(|(&c, f)| c % f.prime != 0)
    }

    pub fn inverse(&self, a: &RingElement) -> Result<RingElement> {
        let coords = a
            .coords
            .iter()
            .zip(&self.factors)
            .map(|(&c, f)| mod_inverse(c, f.modulus))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Domain(format!("{} is not a unit", self.format_element(a))))?;
        Ok(RingElement { coords })
    }

    /// `1 − e` for an idempotent `e`.
    pub fn complement_idempotent(&self, e: &RingElement) -> Result<RingElement> {
        if !self.is_idempotent(e) {
            return Err(Error::Domain(format!(
                "{} is not idempotent",
                self.format_element(e)
            )));
        }
        let coords = e
            .coords
            .iter()
            .zip(&self.factors)
            .map(|(&c, f)| (1 + f.modulus - c) % f.modulus)
            .collect();
        Ok(RingElement { coords })
    }

    /// Idempotent whose coordinate `i` is 1 exactly when bit `i` of `mask` is set.
    pub fn idempotent_from_mask(&self, mask: u64) -> RingElement {
        let coords = (0..self.n())
            .map(|i| u64::from(mask >> i & 1 == 1))
            .collect();
        RingElement { coords }
    }

    /// Residue mod `n` in the CRT view, the coordinate tuple otherwise.
    pub fn format_element(&self, a: &RingElement) -> String {
        match self.to_residue(a) {
            Some(x) => x.to_string(),
            None => {
                let parts: Vec<String> = a.coords.iter().map(u64::to_string).collect();
                format!("({})", parts.join(","))
            }
        }
    }

    /// Canonical sort key: the residue in the CRT view, else the tuple.
    fn order_key(&self, a: &RingElement) -> (u64, Vec<u64>) {
        match self.to_residue(a) {
            Some(x) => (x, Vec::new()),
            None => (0, a.coords.clone()),
        }
    }

    pub fn enumerate_idempotents(&self) -> IdempotentTable {
        IdempotentTable::new(self)
    }

    pub fn enumerate_units(&self) -> UnitTable {
        UnitTable::new(self)
    }
}

impl fmt::Display for FactoredRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.spec.fmt(f)
    }
}

/// Nonzero idempotents `e₁ = 1, e₂, …, e_{2ⁿ−1}` with `e_{2m+1} = 1 − e_{2m}`.
///
/// Each idempotent is identified by its support mask. Complement pairs are
/// represented by the mask containing factor 0 and listed in increasing order
/// of that representative, representative first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdempotentTable {
    masks: Vec<u64>,
    elements: Vec<RingElement>,
}

impl IdempotentTable {
    fn new(ring: &FactoredRing) -> Self {
        let full = (1u64 << ring.n()) - 1;
        let mut masks = Vec::with_capacity(full as usize);
        masks.push(full);
        let mut rep = 1u64;
        while rep < full {
            masks.push(rep);
            masks.push(full ^ rep);
            rep += 2;
        }
        let elements = masks
            .iter()
            .map(|&m| ring.idempotent_from_mask(m))
            .collect();
        IdempotentTable { masks, elements }
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn masks(&self) -> &[u64] {
        &self.masks
    }

    pub fn elements(&self) -> &[RingElement] {
        &self.elements
    }

    pub fn get(&self, index: usize) -> &RingElement {
        &self.elements[index]
    }

    pub fn index_of(&self, e: &RingElement) -> Option<usize> {
        self.elements.iter().position(|x| x == e)
    }
}

/// Units in canonical order: self-inverse units ascending, then each pair
/// `(u, u⁻¹)` with the smaller element first, pairs ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitTable {
    all: Vec<RingElement>,
    self_inverse_len: usize,
    inverse_index: Vec<usize>,
    index: HashMap<RingElement, usize>,
}

impl UnitTable {
    fn new(ring: &FactoredRing) -> Self {
        // per-factor units and their inverses
        let local: Vec<Vec<(u64, u64)>> = ring
            .factors()
            .iter()
            .map(|f| {
                (1..f.modulus)
                    .filter(|x| x % f.prime != 0)
                    .map(|x| (x, mod_inverse(x, f.modulus).expect("unit")))
                    .collect()
            })
            .collect();

        let mut units: Vec<(RingElement, RingElement)> = Vec::with_capacity(ring.phi() as usize);
        let mut cursor = vec![0usize; local.len()];
        'outer: loop {
            let u = cursor.iter().zip(&local).map(|(&i, l)| l[i].0).collect();
            let v = cursor.iter().zip(&local).map(|(&i, l)| l[i].1).collect();
            units.push((RingElement { coords: u }, RingElement { coords: v }));
            for pos in (0..cursor.len()).rev() {
                cursor[pos] += 1;
                if cursor[pos] < local[pos].len() {
                    continue 'outer;
                }
                cursor[pos] = 0;
            }
            break;
        }

        let mut keyed: Vec<_> = units
            .into_iter()
            .map(|(u, v)| (ring.order_key(&u), ring.order_key(&v), u, v))
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));

        let mut all = Vec::with_capacity(keyed.len());
        for (_, _, u, v) in &keyed {
            if u == v {
                all.push(u.clone());
            }
        }
        let self_inverse_len = all.len();
        for (ku, kv, u, v) in &keyed {
            if ku < kv {
                all.push(u.clone());
                all.push(v.clone());
            }
        }
        let index: HashMap<RingElement, usize> = all
            .iter()
            .enumerate()
            .map(|(i, u)| (u.clone(), i))
            .collect();
        let inverse_index = (0..all.len())
            .map(|i| {
                if i < self_inverse_len {
                    i
                } else {
                    // pairs are laid out as (u, u⁻¹) at even/odd offsets
                    let off = i - self_inverse_len;
                    self_inverse_len + (off ^ 1)
                }
            })
            .collect();
        UnitTable {
            all,
            self_inverse_len,
            inverse_index,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.all.len()
    }

    pub fn is_empty(&self) -> bool {
        self.all.is_empty()
    }

    pub fn all_units(&self) -> &[RingElement] {
        &self.all
    }

    pub fn self_inverse(&self) -> &[RingElement] {
        &self.all[..self.self_inverse_len]
    }

    pub fn paired(&self) -> impl Iterator<Item = (&RingElement, &RingElement)> {
        self.all[self.self_inverse_len..]
            .chunks_exact(2)
            .map(|c| (&c[0], &c[1]))
    }

    pub fn paired_len(&self) -> usize {
        (self.all.len() - self.self_inverse_len) / 2
    }

    pub fn get(&self, index: usize) -> &RingElement {
        &self.all[index]
    }

    /// Position of `u⁻¹` for the unit at `index`.
    pub fn inverse_index(&self, index: usize) -> usize {
        self.inverse_index[index]
    }

    pub fn index_of(&self, u: &RingElement) -> Option<usize> {
        self.index.get(u).copied()
    }
}
