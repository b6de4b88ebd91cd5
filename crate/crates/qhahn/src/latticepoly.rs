//! Dense polynomials in the lattice variable x and the Hahn operator.
//!
//! `hahn_apply` computes L_{q,ω} f = (f(qx+ω) − f(x)) / ((q−1)x + ω) by
//! expanding the numerator and dividing exactly. On the uniform lattice the
//! denominator is the constant 1 and the operator is the forward difference.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::exactq::{parse_rational, Lattice, Rational};

/// `coeffs[i]` is the coefficient of xⁱ; trailing zeros are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    pub fn x() -> Self {
        Poly::monomial(1)
    }

    pub fn constant(c: Rational) -> Self {
        Poly::new(vec![c])
    }

    pub fn monomial(n: usize) -> Self {
        let mut c = vec![Rational::zero(); n + 1];
        c[n] = Rational::one();
        Poly { coeffs: c }
    }

    /// Builds from ascending coefficients, dropping trailing zeros.
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Poly::new(c.iter().map(|&v| crate::exactq::int(v)).collect())
    }

    /// The linear polynomial a·x + b.
    pub fn linear(a: Rational, b: Rational) -> Self {
        Poly::new(vec![b, a])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Rational> {
        self.coeffs
    }

    /// Coefficient of xⁱ (zero past the degree).
    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with −1 standing in for −∞.
    pub fn deg(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(|c| c.is_one())
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Divides by the leading coefficient. The zero polynomial stays zero.
    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        self.scale(&self.leading().recip())
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut r = Rational::zero();
        for c in self.coeffs.iter().rev() {
            r = r * x + c;
        }
        r
    }

    /// f(a·x + b).
    pub fn affine_substitute(&self, a: &Rational, b: &Rational) -> Poly {
        let lin = Poly::linear(a.clone(), b.clone());
        let mut r = Poly::zero();
        for c in self.coeffs.iter().rev() {
            r = &(&r * &lin) + &Poly::constant(c.clone());
        }
        r
    }

    /// f(s+k) written in x: k = +1 is x ↦ qx+ω, k = −1 is x ↦ (x−ω)/q.
    pub fn lattice_shift(&self, k: i64, lat: &Lattice) -> Poly {
        let (a, b) = if k >= 0 {
            (lat.q().clone(), lat.omega().clone())
        } else {
            let qi = lat.q().recip();
            let b = -(lat.omega() * &qi);
            (qi, b)
        };
        let mut r = self.clone();
        for _ in 0..k.unsigned_abs() {
            r = r.affine_substitute(&a, &b);
        }
        r
    }

    /// Euclidean division: returns (quotient, remainder).
    pub fn div_rem(&self, g: &Poly) -> (Poly, Poly) {
        assert!(!g.is_zero(), "division by the zero polynomial");
        let dg = g.coeffs.len() - 1;
        let lg = g.leading();
        let mut r = self.coeffs.clone();
        if r.len() <= dg {
            return (Poly::zero(), self.clone());
        }
        let mut q = vec![Rational::zero(); r.len() - dg];
        for k in (0..q.len()).rev() {
            let c = &r[k + dg] / &lg;
            if !c.is_zero() {
                for (i, gi) in g.coeffs.iter().enumerate() {
                    r[k + i] -= &c * gi;
                }
            }
            q[k] = c;
        }
        r.truncate(dg);
        (Poly::new(q), Poly::new(r))
    }

    /// h with self = g·h, or `NotDivisible`.
    pub fn exact_divide(&self, g: &Poly) -> Result<Poly> {
        let (q, r) = self.div_rem(g);
        if r.is_zero() {
            Ok(q)
        } else {
            Err(Error::NotDivisible)
        }
    }

    /// L_{q,ω} f.
    pub fn hahn_apply(&self, lat: &Lattice) -> Result<Poly> {
        let den = Poly::linear(lat.q() - Rational::one(), lat.omega().clone());
        if den.is_zero() {
            return Err(Error::DegenerateOperator);
        }
        let num = &self.lattice_shift(1, lat) - self;
        let (q, r) = num.div_rem(&den);
        debug_assert!(r.is_zero(), "Hahn numerator not divisible");
        Ok(q)
    }

    /// L_{1/q, ω/q} f.
    pub fn hahn_apply_dual(&self, lat: &Lattice) -> Result<Poly> {
        self.hahn_apply(&lat.dual())
    }

    /// k-fold L_{q,ω}.
    pub fn iterated_hahn(&self, k: usize, lat: &Lattice) -> Result<Poly> {
        let mut r = self.clone();
        for _ in 0..k {
            r = r.hahn_apply(lat)?;
        }
        Ok(r)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            match (first, neg) {
                (true, true) => write!(f, "-")?,
                (true, false) => {}
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
            }
            first = false;
            let mono = match i {
                0 => String::new(),
                1 => "x".to_string(),
                _ => format!("x^{i}"),
            };
            if i == 0 {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{mono}")?;
            } else if a.is_integer() {
                write!(f, "{a}{mono}")?;
            } else {
                write!(f, "({a}){mono}")?;
            }
        }
        Ok(())
    }
}

impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        crate::exactq::serde_rat::vec::serialize(&self.coeffs, s)
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let strs = Vec::<String>::deserialize(d)?;
        let coeffs = strs
            .iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Poly::new(coeffs))
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut r = vec![Rational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                r[i + j] += a * b;
            }
        }
        Poly::new(r)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, o: Poly) -> Poly {
        &self + &o
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, o: Poly) -> Poly {
        &self - &o
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, o: Poly) -> Poly {
        &self * &o
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactq::{int, qbracket, rat};

    fn lat(q: Rational, w: Rational) -> Lattice {
        Lattice::new(q, w).unwrap()
    }

    #[test]
    fn display() {
        assert_eq!(Poly::zero().to_string(), "0");
        assert_eq!(Poly::from_ints(&[-1, 0, 1]).to_string(), "x^2 - 1");
        assert_eq!(
            Poly::new(vec![rat(1, 2), int(-3), int(1)]).to_string(),
            "x^2 - 3x + 1/2"
        );
        assert_eq!(Poly::new(vec![int(0), rat(-2, 3)]).to_string(), "-(2/3)x");
    }

    #[test]
    fn affine_examples() {
        let x2 = Poly::monomial(2);
        assert_eq!(x2.affine_substitute(&int(1), &int(0)), x2);
        assert_eq!(
            Poly::x().affine_substitute(&int(2), &int(1)),
            Poly::from_ints(&[1, 2])
        );
        let f = Poly::from_ints(&[1, 0, 1]);
        assert_eq!(
            f.affine_substitute(&rat(1, 2), &int(1)),
            Poly::new(vec![int(2), int(1), rat(1, 4)])
        );
    }

    #[test]
    fn shift_examples() {
        let l = lat(int(2), int(1));
        assert_eq!(
            Poly::x().lattice_shift(-1, &l),
            Poly::new(vec![rat(-1, 2), rat(1, 2)])
        );
        let f = Poly::from_ints(&[3, 0, 5]);
        assert_eq!(f.lattice_shift(0, &l), f);
        assert_eq!(Poly::x().lattice_shift(2, &l), Poly::from_ints(&[3, 4]));
    }

    #[test]
    fn hahn_examples() {
        let l = lat(rat(1, 2), int(1));
        assert_eq!(Poly::one().hahn_apply(&l).unwrap(), Poly::zero());
        assert_eq!(Poly::x().hahn_apply(&l).unwrap(), Poly::one());
        assert_eq!(
            Poly::monomial(2).hahn_apply(&l).unwrap(),
            Poly::new(vec![int(1), rat(3, 2)])
        );
    }

    #[test]
    fn hahn_dual_examples() {
        let l = lat(rat(1, 2), int(0));
        assert_eq!(Poly::one().hahn_apply_dual(&l).unwrap(), Poly::zero());
        assert_eq!(Poly::x().hahn_apply_dual(&l).unwrap(), Poly::one());
        assert_eq!(
            Poly::monomial(2).hahn_apply_dual(&l).unwrap(),
            Poly::from_ints(&[0, 3])
        );
    }

    #[test]
    fn divide_examples() {
        let f = Poly::from_ints(&[-1, 0, 1]);
        assert_eq!(
            f.exact_divide(&Poly::from_ints(&[-1, 1])).unwrap(),
            Poly::from_ints(&[1, 1])
        );
        assert_eq!(
            Poly::x().exact_divide(&Poly::from_ints(&[1, 1])),
            Err(Error::NotDivisible)
        );
        assert_eq!(Poly::zero().exact_divide(&Poly::x()).unwrap(), Poly::zero());
    }

    #[test]
    fn iterated_examples() {
        let l2 = lat(int(2), int(0));
        assert_eq!(
            Poly::monomial(3).iterated_hahn(3, &l2).unwrap(),
            Poly::constant(int(21))
        );
        assert_eq!(Poly::x().iterated_hahn(2, &l2).unwrap(), Poly::zero());
        let l = lat(rat(1, 2), int(1));
        assert_eq!(
            Poly::monomial(2).iterated_hahn(2, &l).unwrap(),
            Poly::constant(rat(3, 2))
        );
        assert_eq!(Poly::x().iterated_hahn(0, &l).unwrap(), Poly::x());
    }

    #[test]
    fn uniform_is_forward_difference() {
        let u = Lattice::uniform();
        let f = Poly::from_ints(&[2, -1, 0, 4]);
        let fd = &f.affine_substitute(&int(1), &int(1)) - &f;
        assert_eq!(f.hahn_apply(&u).unwrap(), fd);
        assert_eq!(
            Poly::monomial(5).hahn_apply(&u).unwrap().leading(),
            qbracket(5, &u)
        );
    }

    #[test]
    fn zero_polynomial_conventions() {
        assert_eq!(Poly::zero().degree(), None);
        assert_eq!(Poly::zero().deg(), -1);
        assert_eq!(Poly::new(vec![int(0), int(0)]), Poly::zero());
        assert_eq!(
            serde_json::to_string(&Poly::new(vec![rat(1, 2), int(0), int(-3)])).unwrap(),
            r#"["1/2","0","-3"]"#
        );
    }
}
