//! Positive commutative monoids used as annotation domains.
//!
//! Three monoids are supported: the Booleans under disjunction, the natural
//! numbers and the non-negative rationals under addition. All arithmetic is
//! exact. Every value carries its kind, and mixing kinds is an error.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MonoidKind {
    /// Booleans with disjunction.
    B,
    /// Natural numbers.
    N,
    /// Non-negative rationals.
    Q,
}

impl MonoidKind {
    pub const ALL: [MonoidKind; 3] = [MonoidKind::B, MonoidKind::N, MonoidKind::Q];

    /// `a + b = 0` forces `a = b = 0`. Holds for every supported kind.
    pub fn positive(self) -> bool {
        true
    }

    /// `a + b = a + c` forces `b = c`. Fails for the Booleans: `1 + 1 = 1 + 0`.
    pub fn cancellative(self) -> bool {
        !matches!(self, MonoidKind::B)
    }
}

impl fmt::Display for MonoidKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MonoidKind::B => "B",
            MonoidKind::N => "N",
            MonoidKind::Q => "Q",
        })
    }
}

impl FromStr for MonoidKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "B" | "b" => Ok(MonoidKind::B),
            "N" | "n" => Ok(MonoidKind::N),
            "Q" | "q" => Ok(MonoidKind::Q),
            other => Err(format!("unknown monoid `{other}` (expected B, N or Q)")),
        }
    }
}

/// An element of one of the supported monoids.
///
/// Rational payloads are kept reduced with a positive denominator and are
/// never negative; the constructors enforce this.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum MonoidValue {
    Bool(bool),
    Nat(BigUint),
    Rat(BigRational),
}

impl MonoidValue {
    pub fn zero(kind: MonoidKind) -> Self {
        match kind {
            MonoidKind::B => MonoidValue::Bool(false),
            MonoidKind::N => MonoidValue::Nat(BigUint::zero()),
            MonoidKind::Q => MonoidValue::Rat(BigRational::zero()),
        }
    }

    pub fn one(kind: MonoidKind) -> Self {
        match kind {
            MonoidKind::B => MonoidValue::Bool(true),
            MonoidKind::N => MonoidValue::Nat(BigUint::one()),
            MonoidKind::Q => MonoidValue::Rat(BigRational::one()),
        }
    }

    pub fn nat(n: u64) -> Self {
        MonoidValue::Nat(BigUint::from(n))
    }

    /// The rational `numer / denom`. Panics on a zero denominator.
    pub fn ratio(numer: u64, denom: u64) -> Self {
        MonoidValue::Rat(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn rational(r: BigRational) -> Result<Self> {
        if r.is_negative() {
            return Err(Error::InvalidValue {
                kind: MonoidKind::Q,
                text: r.to_string(),
            });
        }
        Ok(MonoidValue::Rat(r))
    }

    pub fn kind(&self) -> MonoidKind {
        match self {
            MonoidValue::Bool(_) => MonoidKind::B,
            MonoidValue::Nat(_) => MonoidKind::N,
            MonoidValue::Rat(_) => MonoidKind::Q,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            MonoidValue::Bool(b) => !b,
            MonoidValue::Nat(n) => n.is_zero(),
            MonoidValue::Rat(r) => r.is_zero(),
        }
    }

    fn same_kind(&self, other: &Self) -> Result<()> {
        if self.kind() == other.kind() {
            Ok(())
        } else {
            Err(Error::KindMismatch(self.kind(), other.kind()))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_kind(other)?;
        Ok(match (self, other) {
            (MonoidValue::Bool(a), MonoidValue::Bool(b)) => MonoidValue::Bool(*a || *b),
            (MonoidValue::Nat(a), MonoidValue::Nat(b)) => MonoidValue::Nat(a + b),
            (MonoidValue::Rat(a), MonoidValue::Rat(b)) => MonoidValue::Rat(a + b),
            _ => unreachable!(),
        })
    }

    /// The natural preorder: `a <= b` iff `a + c = b` for some `c`.
    pub fn natural_leq(&self, other: &Self) -> Result<bool> {
        self.same_kind(other)?;
        Ok(match (self, other) {
            (MonoidValue::Bool(a), MonoidValue::Bool(b)) => !*a || *b,
            (MonoidValue::Nat(a), MonoidValue::Nat(b)) => a <= b,
            (MonoidValue::Rat(a), MonoidValue::Rat(b)) => a <= b,
            _ => unreachable!(),
        })
    }

    /// The unique `c` with `other + c = self`, if it exists.
    ///
    /// Only defined for the cancellative kinds.
    pub fn checked_sub(&self, other: &Self) -> Result<Option<Self>> {
        self.same_kind(other)?;
        Ok(match (self, other) {
            (MonoidValue::Nat(a), MonoidValue::Nat(b)) => {
                (a >= b).then(|| MonoidValue::Nat(a - b))
            }
            (MonoidValue::Rat(a), MonoidValue::Rat(b)) => {
                (a >= b).then(|| MonoidValue::Rat(a - b))
            }
            _ => {
                return Err(Error::Unsupported(
                    "subtraction in a non-cancellative monoid".into(),
                ))
            }
        })
    }

    /// `self + self + ... + self` with `n` summands.
    pub fn times(&self, n: usize) -> Self {
        match self {
            MonoidValue::Bool(b) => MonoidValue::Bool(*b && n > 0),
            MonoidValue::Nat(a) => MonoidValue::Nat(a * BigUint::from(n)),
            MonoidValue::Rat(a) => MonoidValue::Rat(a * BigRational::from_integer(n.into())),
        }
    }

    /// Exact rational view of an N or Q value.
    pub fn to_rational(&self) -> Option<BigRational> {
        match self {
            MonoidValue::Bool(_) => None,
            MonoidValue::Nat(n) => Some(BigRational::from_integer(BigInt::from_biguint(
                Sign::Plus,
                n.clone(),
            ))),
            MonoidValue::Rat(r) => Some(r.clone()),
        }
    }

    /// Reinterprets a non-negative rational in `kind`. Fails for N when the
    /// rational is not integral; for B any non-zero rational maps to 1.
    pub fn from_rational(kind: MonoidKind, r: &BigRational) -> Result<Self> {
        if r.is_negative() {
            return Err(Error::InvalidValue {
                kind,
                text: r.to_string(),
            });
        }
        match kind {
            MonoidKind::B => Ok(MonoidValue::Bool(!r.is_zero())),
            MonoidKind::Q => Ok(MonoidValue::Rat(r.clone())),
            MonoidKind::N => {
                if !r.is_integer() {
                    return Err(Error::InvalidValue {
                        kind,
                        text: r.to_string(),
                    });
                }
                Ok(MonoidValue::Nat(r.to_integer().magnitude().clone()))
            }
        }
    }

    pub fn parse(kind: MonoidKind, text: &str) -> Result<Self> {
        let bad = || Error::InvalidValue {
            kind,
            text: text.to_string(),
        };
        let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
        match kind {
            MonoidKind::B => match text {
                "0" => Ok(MonoidValue::Bool(false)),
                "1" => Ok(MonoidValue::Bool(true)),
                _ => Err(bad()),
            },
            MonoidKind::N => {
                if !digits(text) {
                    return Err(bad());
                }
                text.parse::<BigUint>().map(MonoidValue::Nat).map_err(|_| bad())
            }
            MonoidKind::Q => {
                let (p, q) = text.split_once('/').unwrap_or((text, "1"));
                if !digits(p) || !digits(q) {
                    return Err(bad());
                }
                let p: BigInt = p.parse().map_err(|_| bad())?;
                let q: BigInt = q.parse().map_err(|_| bad())?;
                if q.is_zero() {
                    return Err(bad());
                }
                Ok(MonoidValue::Rat(BigRational::new(p, q)))
            }
        }
    }
}

impl fmt::Display for MonoidValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MonoidValue::Bool(b) => write!(f, "{}", u8::from(*b)),
            MonoidValue::Nat(n) => write!(f, "{n}"),
            MonoidValue::Rat(r) => write!(f, "{r}"),
        }
    }
}

/// Aggregate sum; the empty sum is the identity of `kind`.
pub fn sum<'a, I>(kind: MonoidKind, values: I) -> Result<MonoidValue>
where
    I: IntoIterator<Item = &'a MonoidValue>,
{
    values
        .into_iter()
        .try_fold(MonoidValue::zero(kind), |acc, v| acc.add(v))
}

/// Least common multiple of the denominators of `values`.
pub fn denominator_lcm<'a, I>(values: I) -> BigInt
where
    I: IntoIterator<Item = &'a BigRational>,
{
    values
        .into_iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}
