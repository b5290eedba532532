//! Scale group for dilation gates: positive rationals under multiplication,
//! extended by free formal symbols.
//!
//! An element is `r * s1^k1 * s2^k2 ...` with `r > 0` in lowest terms and
//! only non-zero exponents stored, so structural equality is group equality.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("malformed group literal `{0}`")]
    Malformed(String),
    #[error("scale must be a positive rational, got `{0}`")]
    NotPositive(String),
    #[error("symbol `{0}` has no numeric assignment")]
    SymbolUnassigned(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElem {
    rational: BigRational,
    exponents: BTreeMap<String, i64>,
}

impl GroupElem {
    pub fn identity() -> Self {
        GroupElem {
            rational: BigRational::one(),
            exponents: BTreeMap::new(),
        }
    }

    pub fn rational(r: BigRational) -> Result<Self, GroupError> {
        if !r.is_positive() {
            return Err(GroupError::NotPositive(r.to_string()));
        }
        Ok(GroupElem {
            rational: r,
            exponents: BTreeMap::new(),
        })
    }

    /// `p/q` as a group element. Panics on a non-positive ratio.
    pub fn ratio(p: i64, q: i64) -> Self {
        Self::rational(BigRational::new(BigInt::from(p), BigInt::from(q)))
            .expect("positive ratio")
    }

    pub fn symbol(name: &str) -> Self {
        let mut exponents = BTreeMap::new();
        exponents.insert(name.to_string(), 1);
        GroupElem {
            rational: BigRational::one(),
            exponents,
        }
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.rational
    }

    pub fn exponents(&self) -> &BTreeMap<String, i64> {
        &self.exponents
    }

    pub fn has_symbols(&self) -> bool {
        !self.exponents.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.rational.is_one() && self.exponents.is_empty()
    }

    pub fn mul(&self, other: &GroupElem) -> GroupElem {
        let mut exponents = self.exponents.clone();
        for (s, k) in &other.exponents {
            let e = exponents.entry(s.clone()).or_insert(0);
            *e += k;
            if *e == 0 {
                exponents.remove(s);
            }
        }
        GroupElem {
            rational: &self.rational * &other.rational,
            exponents,
        }
    }

    pub fn inv(&self) -> GroupElem {
        GroupElem {
            rational: self.rational.recip(),
            exponents: self.exponents.iter().map(|(s, k)| (s.clone(), -k)).collect(),
        }
    }

    pub fn pow(&self, k: i64) -> GroupElem {
        let mut out = GroupElem::identity();
        let base = if k < 0 { self.inv() } else { self.clone() };
        for _ in 0..k.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    /// Whether the element lies in the subgroup generated by the rationals
    /// and the given symbols.
    pub fn within_symbols(&self, symbols: &[&str]) -> bool {
        self.exponents.keys().all(|s| symbols.contains(&s.as_str()))
    }

    /// Numeric value under an assignment of positive rationals to symbols.
    pub fn value(&self, assignment: &BTreeMap<String, BigRational>) -> Result<BigRational, GroupError> {
        let mut v = self.rational.clone();
        for (s, k) in &self.exponents {
            let a = assignment
                .get(s)
                .ok_or_else(|| GroupError::SymbolUnassigned(s.clone()))?;
            let mut p = BigRational::one();
            for _ in 0..k.unsigned_abs() {
                p *= a;
            }
            if *k < 0 {
                p = p.recip();
            }
            v *= p;
        }
        Ok(v)
    }
}

impl Default for GroupElem {
    fn default() -> Self {
        Self::identity()
    }
}

impl fmt::Display for GroupElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rational.numer())?;
        if !self.rational.denom().is_one() {
            write!(f, "/{}", self.rational.denom())?;
        }
        for (s, k) in &self.exponents {
            write!(f, "*{}^{}", s, k)?;
        }
        Ok(())
    }
}

fn parse_rational(text: &str) -> Option<BigRational> {
    let (p, q) = match text.split_once('/') {
        Some((p, q)) => (p, q),
        None => (text, "1"),
    };
    let p: BigInt = p.trim().parse().ok()?;
    let q: BigInt = q.trim().parse().ok()?;
    if q.is_zero() {
        return None;
    }
    Some(BigRational::new(p, q))
}

impl FromStr for GroupElem {
    type Err = GroupError;

    /// Literal syntax `p/q[*sym^k]...`; a bare `sym` means `sym^1`, and the
    /// rational prefix may be omitted when at least one symbol is present.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let bad = || GroupError::Malformed(text.to_string());
        let text = text.trim();
        if text.is_empty() {
            return Err(bad());
        }
        let mut out = GroupElem::identity();
        for (i, part) in text.split('*').enumerate() {
            let part = part.trim();
            if part.is_empty() {
                return Err(bad());
            }
            let starts_numeric = part
                .chars()
                .next()
                .map(|c| c.is_ascii_digit() || c == '-' || c == '+')
                .unwrap_or(false);
            if starts_numeric {
                if i != 0 {
                    return Err(bad());
                }
                let r = parse_rational(part).ok_or_else(bad)?;
                if !r.is_positive() {
                    return Err(GroupError::NotPositive(part.to_string()));
                }
                out.rational = r;
            } else {
                let (name, k) = match part.split_once('^') {
                    Some((n, k)) => (n, k.trim().parse::<i64>().map_err(|_| bad())?),
                    None => (part, 1),
                };
                let valid = name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_')
                    && name.chars().next().is_some_and(|c| c.is_ascii_alphabetic());
                if !valid {
                    return Err(bad());
                }
                let mut sym = BTreeMap::new();
                sym.insert(name.to_string(), k);
                let factor = GroupElem {
                    rational: BigRational::one(),
                    exponents: if k == 0 { BTreeMap::new() } else { sym },
                };
                out = out.mul(&factor);
            }
        }
        Ok(out)
    }
}
