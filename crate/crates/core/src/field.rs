//! Exact scalar arithmetic: prime fields F_p and arbitrary-precision rationals.

use crate::error::{Error, Result};
use num::{BigInt, BigRational, One, Zero};
use rand::Rng;
use std::fmt;
use std::str::FromStr;

/// Default prime for F_p arithmetic. Large enough that random instances
/// behave generically, small enough that p^2 fits comfortably in u64.
pub const DEFAULT_PRIME: u64 = 32003;

/// The coefficient field every computation runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    /// Prime field F_p, elements stored as residues in [0, p).
    Fp(u64),
    /// Rational numbers, stored reduced.
    Rational,
}

impl Field {
    pub fn fp(p: u64) -> Result<Field> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p >= 1 << 31 {
            return Err(Error::InvalidInput(format!("prime {p} too large")));
        }
        Ok(Field::Fp(p))
    }

    pub fn default_fp() -> Field {
        Field::Fp(DEFAULT_PRIME)
    }

    pub fn zero(&self) -> Scalar {
        match self {
            Field::Fp(p) => Scalar::Fp { p: *p, val: 0 },
            Field::Rational => Scalar::Rat(BigRational::zero()),
        }
    }

    pub fn one(&self) -> Scalar {
        match self {
            Field::Fp(p) => Scalar::Fp { p: *p, val: 1 % *p },
            Field::Rational => Scalar::Rat(BigRational::one()),
        }
    }

    pub fn from_i64(&self, n: i64) -> Scalar {
        match self {
            Field::Fp(p) => {
                let p = *p;
                let r = n.rem_euclid(p as i64) as u64;
                Scalar::Fp { p, val: r }
            }
            Field::Rational => Scalar::Rat(BigRational::from_integer(BigInt::from(n))),
        }
    }

    /// Parses "r" (residue or integer) or "p/q" for rationals.
    pub fn parse(&self, s: &str) -> Result<Scalar> {
        let s = s.trim();
        match self {
            Field::Fp(_) => {
                let n = i64::from_str(s)
                    .map_err(|_| Error::InvalidInput(format!("bad F_p scalar {s:?}")))?;
                Ok(self.from_i64(n))
            }
            Field::Rational => {
                let r = BigRational::from_str(s)
                    .or_else(|_| BigInt::from_str(s).map(BigRational::from_integer))
                    .map_err(|_| Error::InvalidInput(format!("bad rational scalar {s:?}")))?;
                Ok(Scalar::Rat(r))
            }
        }
    }

    /// Uniform random scalar (uniform residue for F_p, small numerator for Q).
    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Scalar {
        match self {
            Field::Fp(p) => Scalar::Fp {
                p: *p,
                val: rng.random_range(0..*p),
            },
            Field::Rational => self.from_i64(rng.random_range(-9..=9)),
        }
    }

    /// Random nonzero scalar.
    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> Scalar {
        loop {
            let s = self.random(rng);
            if !s.is_zero() {
                return s;
            }
        }
    }

    pub fn size_hint(&self) -> Option<u64> {
        match self {
            Field::Fp(p) => Some(*p),
            Field::Rational => None,
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Fp(p) => write!(f, "fp:{p}"),
            Field::Rational => write!(f, "rational"),
        }
    }
}

impl FromStr for Field {
    type Err = Error;
    fn from_str(s: &str) -> Result<Field> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("rational") || s == "q" {
            return Ok(Field::Rational);
        }
        if let Some(p) = s.strip_prefix("fp:") {
            let p = u64::from_str(p).map_err(|_| Error::InvalidInput(format!("bad field {s:?}")))?;
            return Field::fp(p);
        }
        Err(Error::InvalidInput(format!(
            "bad field {s:?} (expected fp:P or rational)"
        )))
    }
}

/// An element of an exact field. Equality is canonical: residues are reduced
/// mod p and rationals are stored in lowest terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scalar {
    Fp { p: u64, val: u64 },
    Rat(BigRational),
}

impl Scalar {
    pub fn field(&self) -> Field {
        match self {
            Scalar::Fp { p, .. } => Field::Fp(*p),
            Scalar::Rat(_) => Field::Rational,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Fp { val, .. } => *val == 0,
            Scalar::Rat(r) => r.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Fp { p, val } => *val == 1 % *p,
            Scalar::Rat(r) => r.is_one(),
        }
    }

    fn same_field(&self, other: &Scalar) -> Result<()> {
        if self.field() != other.field() {
            return Err(Error::FieldMismatch(format!(
                "{} vs {}",
                self.field(),
                other.field()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        self.same_field(other).expect("scalar field mismatch");
        match (self, other) {
            (Scalar::Fp { p, val: a }, Scalar::Fp { val: b, .. }) => Scalar::Fp {
                p: *p,
                val: (a + b) % p,
            },
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a + b),
            _ => unreachable!(),
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        self.same_field(other).expect("scalar field mismatch");
        match (self, other) {
            (Scalar::Fp { p, val: a }, Scalar::Fp { val: b, .. }) => Scalar::Fp {
                p: *p,
                val: (a * b) % p,
            },
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a * b),
            _ => unreachable!(),
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Fp { p, val } => Scalar::Fp {
                p: *p,
                val: if *val == 0 { 0 } else { p - val },
            },
            Scalar::Rat(r) => Scalar::Rat(-r),
        }
    }

    pub fn inv(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        match self {
            Scalar::Fp { p, val } => Ok(Scalar::Fp {
                p: *p,
                val: mod_inverse(*val, *p),
            }),
            Scalar::Rat(r) => Ok(Scalar::Rat(r.recip())),
        }
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar> {
        Ok(self.mul(&other.inv()?))
    }

    /// Canonical string form: residue for F_p, "n" or "n/d" for rationals.
    pub fn encode(&self) -> String {
        match self {
            Scalar::Fp { val, .. } => val.to_string(),
            Scalar::Rat(r) => {
                if r.denom().is_one() {
                    r.numer().to_string()
                } else {
                    format!("{}/{}", r.numer(), r.denom())
                }
            }
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.encode())
    }
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    // extended Euclid; p prime and a != 0 mod p
    let (mut t, mut new_t): (i128, i128) = (0, 1);
    let (mut r, mut new_r): (i128, i128) = (p as i128, a as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    debug_assert_eq!(r, 1);
    t.rem_euclid(p as i128) as u64
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fp_arithmetic_is_exact() {
        let f = Field::fp(3).unwrap();
        let a = f.from_i64(2);
        let b = f.from_i64(2);
        assert_eq!(a.add(&b), f.from_i64(1));
        assert_eq!(a.mul(&b), f.from_i64(1));
        assert_eq!(a.neg(), f.from_i64(1));
        assert_eq!(a.inv().unwrap(), f.from_i64(2));
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let f = Field::default_fp();
        assert_eq!(f.zero().inv(), Err(Error::DivisionByZero));
        let q = Field::Rational;
        assert_eq!(q.zero().inv(), Err(Error::DivisionByZero));
    }

    #[test]
    fn rationals_stay_reduced() {
        let q = Field::Rational;
        let half = q.parse("2/4").unwrap();
        assert_eq!(half.encode(), "1/2");
        let sum = half.add(&q.parse("1/2").unwrap());
        assert_eq!(sum, q.one());
    }

    #[test]
    fn field_parsing() {
        assert_eq!(Field::from_str("fp:32003").unwrap(), Field::Fp(32003));
        assert_eq!(Field::from_str("rational").unwrap(), Field::Rational);
        assert!(Field::from_str("fp:32004").is_err());
    }

    #[test]
    fn default_prime_is_prime() {
        assert!(is_prime(DEFAULT_PRIME));
    }

    #[test]
    fn mod_inverse_agrees_with_fermat() {
        let p = 32003u64;
        for a in [1u64, 2, 5, 31337, 32002] {
            let inv = mod_inverse(a, p);
            assert_eq!((a * inv) % p, 1);
        }
    }
}
