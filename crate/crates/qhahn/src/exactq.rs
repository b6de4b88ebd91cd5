//! Exact rationals, the q-linear lattice and elementary q-quantities.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

use crate::error::{Error, Result};

/// Arbitrary precision rational, always in lowest terms with positive denominator.
pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n/d`; panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"` or `"p"`; rejects zero denominators.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = n
        .parse()
        .map_err(|_| Error::Parse(format!("malformed rational {s:?}")))?;
    let d: BigInt = d
        .parse()
        .map_err(|_| Error::Parse(format!("malformed rational {s:?}")))?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(n, d))
}

/// `base^e` for a signed exponent. `base` must be nonzero when `e < 0`.
pub fn pow(base: &Rational, e: i64) -> Rational {
    let mut r = Rational::one();
    let b = if e < 0 { base.recip() } else { base.clone() };
    for _ in 0..e.unsigned_abs() {
        r *= &b;
    }
    r
}

/// Serde adapters writing rationals as `"p/q"` strings.
pub mod serde_rat {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(
            v: &[Rational],
            s: S,
        ) -> std::result::Result<S::Ok, S::Error> {
            let strs: Vec<String> = v.iter().map(|r| r.to_string()).collect();
            strs.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<Vec<Rational>, D::Error> {
            let strs = Vec::<String>::deserialize(d)?;
            strs.iter()
                .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
                .collect()
        }
    }
}

/// The lattice x(s+1) = q·x(s) + ω.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lattice {
    #[serde(with = "serde_rat")]
    q: Rational,
    #[serde(with = "serde_rat")]
    omega: Rational,
    uniform: bool,
}

impl Lattice {
    /// A q-linear lattice; rejects q = 0 and |q| = 1.
    pub fn new(q: Rational, omega: Rational) -> Result<Self> {
        if q.is_zero() {
            return Err(Error::InvalidLattice("q = 0".into()));
        }
        if q.abs().is_one() {
            return Err(Error::InvalidLattice(format!(
                "|q| = 1 (q = {q}); use Lattice::uniform() for x(s) = s"
            )));
        }
        Ok(Lattice {
            q,
            omega,
            uniform: false,
        })
    }

    /// The uniform lattice x(s) = s: q = 1, ω = 1.
    pub fn uniform() -> Self {
        Lattice {
            q: Rational::one(),
            omega: Rational::one(),
            uniform: true,
        }
    }

    pub fn q(&self) -> &Rational {
        &self.q
    }

    pub fn omega(&self) -> &Rational {
        &self.omega
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// The lattice (1/q, ω/q) of the operator L_{1/q, ω/q}.
    pub fn dual(&self) -> Self {
        if self.uniform {
            return self.clone();
        }
        Lattice {
            q: self.q.recip(),
            omega: &self.omega / &self.q,
            uniform: false,
        }
    }

    /// Checks the invariants after deserialization.
    pub fn validate(self) -> Result<Self> {
        if self.uniform {
            if self.q.is_one() && self.omega.is_one() {
                Ok(self)
            } else {
                Err(Error::InvalidLattice(
                    "uniform lattice needs q = 1, ω = 1".into(),
                ))
            }
        } else {
            Lattice::new(self.q, self.omega)
        }
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.uniform {
            write!(f, "uniform(q=1, omega={})", self.omega)
        } else {
            write!(f, "(q={}, omega={})", self.q, self.omega)
        }
    }
}

/// [n] = (qⁿ − 1)/(q − 1), or n in uniform mode.
pub fn qbracket(n: usize, lat: &Lattice) -> Rational {
    if lat.uniform {
        return int(n as i64);
    }
    // [n] = 1 + q + ... + q^{n-1}
    let mut s = Rational::zero();
    let mut p = Rational::one();
    for _ in 0..n {
        s += &p;
        p *= &lat.q;
    }
    s
}

/// [n]! = [1][2]⋯[n].
pub fn qfactorial(n: usize, lat: &Lattice) -> Rational {
    (1..=n).fold(Rational::one(), |acc, k| acc * qbracket(k, lat))
}

/// (a; q)_k = ∏_{j<k} (1 − a qʲ).
pub fn qpochhammer(a: &Rational, lat: &Lattice, k: usize) -> Rational {
    let mut r = Rational::one();
    let mut aq = a.clone();
    for _ in 0..k {
        r *= Rational::one() - &aq;
        aq *= &lat.q;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lq(n: i64, d: i64) -> Lattice {
        Lattice::new(rat(n, d), int(0)).unwrap()
    }

    #[test]
    fn bracket_values() {
        assert_eq!(qbracket(0, &lq(2, 1)), int(0));
        assert_eq!(qbracket(3, &lq(2, 1)), int(7));
        assert_eq!(qbracket(4, &lq(1, 2)), rat(15, 8));
        assert_eq!(qbracket(5, &Lattice::uniform()), int(5));
    }

    #[test]
    fn factorial_values() {
        assert_eq!(qfactorial(0, &lq(2, 1)), int(1));
        assert_eq!(qfactorial(3, &lq(2, 1)), int(21));
        assert_eq!(qfactorial(2, &lq(1, 2)), rat(3, 2));
    }

    #[test]
    fn pochhammer_values() {
        assert_eq!(qpochhammer(&rat(7, 3), &lq(1, 2), 0), int(1));
        assert_eq!(qpochhammer(&int(2), &lq(1, 2), 2), int(0));
        assert_eq!(qpochhammer(&int(3), &lq(2, 1), 2), int(10));
    }

    #[test]
    fn lattice_rejects_unit_modulus() {
        assert!(Lattice::new(int(1), int(0)).is_err());
        assert!(Lattice::new(int(-1), int(0)).is_err());
        assert!(Lattice::new(int(0), int(1)).is_err());
        assert!(Lattice::new(rat(1, 2), int(1)).is_ok());
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(parse_rational("-6/4").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("a/b").is_err());
        assert_eq!(rat(-3, 2).to_string(), "-3/2");
        assert_eq!(int(4).to_string(), "4");
    }

    #[test]
    fn lattice_json_round_trip() {
        let lat = Lattice::new(rat(2, 3), int(1)).unwrap();
        let s = serde_json::to_string(&lat).unwrap();
        assert_eq!(s, r#"{"q":"2/3","omega":"1","uniform":false}"#);
        let back: Lattice = serde_json::from_str(&s).unwrap();
        assert_eq!(back.validate().unwrap(), lat);
    }

    #[test]
    fn dual_lattice() {
        let lat = Lattice::new(rat(1, 2), int(1)).unwrap();
        let d = lat.dual();
        assert_eq!(d.q(), &int(2));
        assert_eq!(d.omega(), &int(2));
    }
}
