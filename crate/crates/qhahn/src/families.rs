//! Concrete polynomial families.
//!
//! The four q-classical families (Big q-Jacobi, q-Laguerre, Al-Salam Carlitz I,
//! q-Charlier) are built from their basic hypergeometric definitions and made
//! monic; their functional comes from ⟨u, Bₙ⟩ = δ_{n0}. Each carries a
//! `Table1Row` whose coefficient evaluators transcribe the closed forms.
//!
//! The two semiclassical examples are the class-one functional solving
//! Δv = Ψv with deg Ψ = 2, and the class-two q-Freud sequence defined by
//! ΔPₙ = [n]P_{n−1} + aₙP_{n−3}.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::exactq::{int, pow, qbracket, qpochhammer, rat, serde_rat, Lattice, Rational};
use crate::functional::{
    check_pearson, pearson_moments, psi_from_phi, smop_from_moments, MomentFunctional,
    OrthoSequence, PearsonPair,
};
use crate::latticepoly::Poly;

/// Extra moments kept beyond 2N so that every verifier has room.
pub const HORIZON_SLACK: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FamilyTag {
    #[serde(rename = "big_q_jacobi")]
    BigQJacobi,
    #[serde(rename = "q_laguerre")]
    QLaguerre,
    #[serde(rename = "al_salam_carlitz_1")]
    AlSalamCarlitzI,
    #[serde(rename = "q_charlier")]
    QCharlier,
}

impl FamilyTag {
    pub const ALL: [FamilyTag; 4] = [
        FamilyTag::BigQJacobi,
        FamilyTag::QLaguerre,
        FamilyTag::AlSalamCarlitzI,
        FamilyTag::QCharlier,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyTag::BigQJacobi => "big_q_jacobi",
            FamilyTag::QLaguerre => "q_laguerre",
            FamilyTag::AlSalamCarlitzI => "al_salam_carlitz_1",
            FamilyTag::QCharlier => "q_charlier",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        FamilyTag::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown family {s:?}")))
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

mod opt_rat {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        v: &Option<Rational>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        match v {
            Some(r) => serde_rat::serialize(r, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<Rational>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        s.map(|s| crate::exactq::parse_rational(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyParams {
    #[serde(default, with = "opt_rat", skip_serializing_if = "Option::is_none")]
    pub a: Option<Rational>,
    #[serde(default, with = "opt_rat", skip_serializing_if = "Option::is_none")]
    pub b: Option<Rational>,
    #[serde(default, with = "opt_rat", skip_serializing_if = "Option::is_none")]
    pub c: Option<Rational>,
}

impl FamilyParams {
    /// The fixed parameters used throughout the tests and the suite.
    pub fn documented(tag: FamilyTag) -> Self {
        match tag {
            FamilyTag::BigQJacobi => FamilyParams {
                a: Some(rat(1, 3)),
                b: Some(rat(1, 5)),
                c: Some(rat(1, 7)),
            },
            FamilyTag::QLaguerre => FamilyParams {
                a: Some(rat(2, 5)),
                ..Default::default()
            },
            FamilyTag::AlSalamCarlitzI => FamilyParams {
                a: Some(int(2)),
                ..Default::default()
            },
            FamilyTag::QCharlier => FamilyParams {
                a: Some(rat(2, 3)),
                ..Default::default()
            },
        }
    }

    fn need(&self, name: &str, v: &Option<Rational>) -> Result<Rational> {
        v.clone()
            .ok_or_else(|| Error::Parse(format!("missing family parameter {name}")))
    }
}

/// Family input as accepted on the command line and in config files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: FamilyTag,
    #[serde(with = "serde_rat")]
    pub q: Rational,
    #[serde(default)]
    pub params: FamilyParams,
    #[serde(rename = "N")]
    pub n: usize,
}

fn checked_div(num: Rational, den: Rational, what: &str) -> Result<Rational> {
    if den.is_zero() {
        Err(Error::DegenerateParameters(format!(
            "{what} has a vanishing denominator"
        )))
    } else {
        Ok(num / den)
    }
}

/// φ, σ and the coefficient evaluators of one q-classical family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table1Row {
    pub tag: FamilyTag,
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub lat: Lattice,
    pub phi: Poly,
    pub sigma_poly: Poly,
}

impl Table1Row {
    pub fn new(tag: FamilyTag, params: &FamilyParams, lat: &Lattice) -> Result<Self> {
        if !lat.omega().is_zero() || lat.is_uniform() {
            return Err(Error::Precondition(
                "q-classical families live on x(s) = q^s (omega = 0)".into(),
            ));
        }
        let q = lat.q().clone();
        let one = Rational::one();
        let zero = Rational::zero();
        let a = params.need("a", &params.a)?;
        if a.is_zero() {
            return Err(Error::DegenerateParameters("a = 0".into()));
        }
        let (b, c) = match tag {
            FamilyTag::BigQJacobi => (params.need("b", &params.b)?, params.need("c", &params.c)?),
            _ => (zero.clone(), zero.clone()),
        };
        let x = Poly::x;
        let (phi, sigma_poly) = match tag {
            FamilyTag::BigQJacobi => (
                // aq(x−1)(bx−c)
                (&Poly::linear(one.clone(), -one.clone()) * &Poly::linear(b.clone(), -c.clone()))
                    .scale(&(&a * &q)),
                // q⁻¹(x−aq)(x−cq)
                (&Poly::linear(one.clone(), -(&a * &q)) * &Poly::linear(one.clone(), -(&c * &q)))
                    .scale(&q.recip()),
            ),
            FamilyTag::QLaguerre => (
                (&x() * &Poly::linear(one.clone(), one.clone())).scale(&a),
                x().scale(&q.recip()),
            ),
            FamilyTag::AlSalamCarlitzI => (
                Poly::constant(a.clone()),
                &Poly::linear(-one.clone(), one.clone()) * &Poly::linear(-one.clone(), a.clone()),
            ),
            FamilyTag::QCharlier => (
                &x() * &Poly::linear(one.clone(), -one.clone()),
                x().scale(&(&a / &q)),
            ),
        };
        Ok(Table1Row {
            tag,
            a,
            b,
            c,
            lat: lat.clone(),
            phi,
            sigma_poly,
        })
    }

    fn q(&self) -> &Rational {
        self.lat.q()
    }

    fn qp(&self, e: i64) -> Rational {
        pow(self.q(), e)
    }

    fn br(&self, n: usize) -> Rational {
        qbracket(n, &self.lat)
    }

    /// Coefficient of P_{n+1} in φ·L_{q,ω}Pₙ.
    pub fn alpha_hat(&self, n: usize) -> Result<Rational> {
        let (a, b, q) = (&self.a, &self.b, self.q());
        Ok(match self.tag {
            FamilyTag::BigQJacobi => a * b * q * self.br(n),
            FamilyTag::QLaguerre => a * self.br(n),
            FamilyTag::AlSalamCarlitzI => Rational::zero(),
            FamilyTag::QCharlier => self.br(n),
        })
    }

    /// Coefficient of Pₙ in φ·L_{q,ω}Pₙ.
    pub fn beta_hat(&self, n: usize) -> Result<Rational> {
        let (a, b, c, q) = (&self.a, &self.b, &self.c, self.q());
        let one = Rational::one();
        let ni = n as i64;
        match self.tag {
            FamilyTag::BigQJacobi => {
                let ab = a * b;
                let inner = &one
                    - c * self.qp(ni)
                    - c * self.qp(ni + 1)
                    - a * self.qp(ni) * (&one + q - c * self.qp(ni + 1));
                let num = -(a * q)
                    * self.br(n)
                    * (&one - &ab * self.qp(ni + 1))
                    * (c + a * b * b * self.qp(2 * ni + 1) + b * inner);
                let den = (&one - &ab * self.qp(2 * ni)) * (&one - &ab * self.qp(2 * ni + 2));
                checked_div(num, den, "beta_hat")
            }
            FamilyTag::QLaguerre => {
                Ok(self.qp(-2 * ni - 1) * self.br(n) * (&one + q - a * self.qp(ni + 1)))
            }
            FamilyTag::AlSalamCarlitzI => Ok(Rational::zero()),
            FamilyTag::QCharlier => {
                Ok(self.qp(-2 * ni - 1) * self.br(n) * (a + a * q + self.qp(ni + 1)))
            }
        }
    }

    /// Coefficient of P_{n−1} in φ·L_{q,ω}Pₙ.
    pub fn gamma_hat(&self, n: usize) -> Result<Rational> {
        let (a, b, c, q) = (&self.a, &self.b, &self.c, self.q());
        let one = Rational::one();
        let ni = n as i64;
        match self.tag {
            FamilyTag::BigQJacobi => {
                let ab = a * b;
                let num = a
                    * q
                    * self.br(n)
                    * (&one - a * self.qp(ni))
                    * (&one - b * self.qp(ni))
                    * (&one - &ab * self.qp(ni))
                    * (c - &ab * self.qp(ni))
                    * (&one - c * self.qp(ni))
                    * (&one - &ab * self.qp(ni + 1));
                let d = &one - &ab * self.qp(2 * ni);
                let den = &d
                    * &d
                    * (&one - &ab * self.qp(2 * ni - 1))
                    * (&one - &ab * self.qp(2 * ni + 1));
                checked_div(num, den, "gamma_hat")
            }
            FamilyTag::QLaguerre => checked_div(
                self.qp(1 - 4 * ni) * self.br(n) * (&one - a * self.qp(ni)),
                a.clone(),
                "gamma_hat",
            ),
            FamilyTag::AlSalamCarlitzI => Ok(a * self.br(n)),
            FamilyTag::QCharlier => Ok(a * self.qp(1 - 4 * ni) * self.br(n) * (a + self.qp(ni))),
        }
    }

    /// Coefficient of P_{n+1} in σ·L_{1/q,ω/q}Pₙ.
    pub fn alpha_tilde(&self, n: usize) -> Result<Rational> {
        let ni = n as i64;
        Ok(match self.tag {
            FamilyTag::BigQJacobi => self.qp(-ni) * self.br(n),
            FamilyTag::QLaguerre | FamilyTag::QCharlier => Rational::zero(),
            FamilyTag::AlSalamCarlitzI => self.qp(1 - ni) * self.br(n),
        })
    }

    /// Coefficient of Pₙ in σ·L_{1/q,ω/q}Pₙ.
    pub fn beta_tilde(&self, n: usize) -> Result<Rational> {
        let (a, b, c, q) = (&self.a, &self.b, &self.c, self.q());
        let one = Rational::one();
        let ni = n as i64;
        match self.tag {
            FamilyTag::BigQJacobi => {
                let ab = a * b;
                let inner = &one
                    - c * self.qp(ni)
                    - c * self.qp(ni + 1)
                    - b * self.qp(ni) * (&one + q - c * self.qp(ni + 1));
                let num = q
                    * self.br(n)
                    * (&one - &ab * self.qp(ni + 1))
                    * (c + a * a * b * self.qp(2 * ni + 1) + a * inner);
                let den = (&one - &ab * self.qp(2 * ni)) * (&one - &ab * self.qp(2 * ni + 2));
                checked_div(num, den, "beta_tilde")
            }
            FamilyTag::QLaguerre => Ok(self.qp(-ni) * self.br(n)),
            FamilyTag::AlSalamCarlitzI => Ok(q * (&one + a) * self.br(n)),
            FamilyTag::QCharlier => Ok(a * self.qp(-ni) * self.br(n)),
        }
    }

    /// Coefficient of P_{n−1} in σ·L_{1/q,ω/q}Pₙ. For q-Laguerre this is the
    /// corrected value qⁿγ̂ₙ; see [`Table1Row::gamma_tilde_bare`].
    pub fn gamma_tilde(&self, n: usize) -> Result<Rational> {
        let ni = n as i64;
        match self.tag {
            FamilyTag::BigQJacobi | FamilyTag::QCharlier => Ok(self.qp(ni) * self.gamma_hat(n)?),
            FamilyTag::QLaguerre => Ok(self.gamma_tilde_bare(n)? * self.br(n)),
            FamilyTag::AlSalamCarlitzI => Ok(&self.a * self.qp(ni) * self.br(n)),
        }
    }

    /// The q-Laguerre entry in its commonly tabulated form a⁻¹q^{1−3n}(1−aqⁿ),
    /// which lacks a factor [n]. Other families return `gamma_tilde`.
    pub fn gamma_tilde_bare(&self, n: usize) -> Result<Rational> {
        let ni = n as i64;
        match self.tag {
            FamilyTag::QLaguerre => checked_div(
                self.qp(1 - 3 * ni) * (Rational::one() - &self.a * self.qp(ni)),
                self.a.clone(),
                "gamma_tilde",
            ),
            _ => self.gamma_tilde(n),
        }
    }

    /// Coefficient of P^{[1]}_{n−1} in Pₙ.
    pub fn delta(&self, n: usize) -> Result<Rational> {
        let (a, b, q) = (&self.a, &self.b, self.q());
        let one = Rational::one();
        let ni = n as i64;
        match self.tag {
            FamilyTag::BigQJacobi => checked_div(
                -(self.qp(ni) * (&one - q)) * self.beta_hat(n)?,
                &one - a * b * self.qp(ni + 1),
                "delta",
            ),
            FamilyTag::QLaguerre => checked_div((&one - q) * self.beta_hat(n)?, a.clone(), "delta"),
            FamilyTag::AlSalamCarlitzI => Ok(Rational::zero()),
            FamilyTag::QCharlier => Ok((&one - q) * self.beta_hat(n)?),
        }
    }

    /// Coefficient of P^{[1]}_{n−2} in Pₙ.
    pub fn epsilon(&self, n: usize) -> Result<Rational> {
        let (a, b, q) = (&self.a, &self.b, self.q());
        let one = Rational::one();
        let ni = n as i64;
        let common = (&one - self.qp(ni - 1)) * (&one - q);
        match self.tag {
            FamilyTag::BigQJacobi => {
                let ab = a * b;
                checked_div(
                    &ab * self.qp(2 * ni) * common * self.gamma_hat(n)?,
                    (&one - &ab * self.qp(ni)) * (&one - &ab * self.qp(ni + 1)),
                    "epsilon",
                )
            }
            FamilyTag::QLaguerre => checked_div(common * self.gamma_hat(n)?, a.clone(), "epsilon"),
            FamilyTag::AlSalamCarlitzI => Ok(Rational::zero()),
            FamilyTag::QCharlier => Ok(common * self.gamma_hat(n)?),
        }
    }

    /// Whether the row states γ̃ₙ = qⁿγ̂ₙ as an identity.
    pub fn states_gamma_ratio(&self) -> bool {
        matches!(self.tag, FamilyTag::BigQJacobi | FamilyTag::QCharlier)
    }
}

/// (x; q)_0 .. (x; q)_m as polynomials.
fn x_pochhammer_basis(q: &Rational, m: usize) -> Vec<Poly> {
    let mut out = vec![Poly::one()];
    let mut qj = Rational::one();
    for _ in 0..m {
        let next = out.last().expect("nonempty") * &Poly::linear(-qj.clone(), Rational::one());
        out.push(next);
        qj *= q;
    }
    out
}

/// Π_{j<k}(x − q^j) for k = 0..m.
fn shifted_monomial_basis(q: &Rational, m: usize) -> Vec<Poly> {
    let mut out = vec![Poly::one()];
    let mut qj = Rational::one();
    for _ in 0..m {
        let next = out.last().expect("nonempty") * &Poly::linear(Rational::one(), -qj.clone());
        out.push(next);
        qj *= q;
    }
    out
}

fn monomial_basis(m: usize) -> Vec<Poly> {
    (0..=m).map(Poly::monomial).collect()
}

fn plain(q: &Rational) -> Lattice {
    Lattice::new(q.clone(), Rational::zero()).expect("caller validated q")
}

/// Σ_k coef(k)·basis[k] for k ≤ n, made monic.
fn monic_sum(
    n: usize,
    mut coef: impl FnMut(usize) -> Result<Rational>,
    basis: &[Poly],
) -> Result<Poly> {
    let mut c = vec![Rational::zero(); n + 1];
    for (k, b) in basis.iter().enumerate().take(n + 1) {
        let s = coef(k)?;
        if s.is_zero() {
            continue;
        }
        for (i, bi) in b.coeffs().iter().enumerate() {
            c[i] += &s * bi;
        }
    }
    let r = Poly::new(c);
    if r.deg() != n as i64 {
        return Err(Error::DegenerateParameters(format!(
            "degree-{n} polynomial collapsed"
        )));
    }
    Ok(r.monic())
}

/// Which series and which parameters; `a`, `b`, `c` as in the row.
#[derive(Clone)]
struct Series {
    tag: FamilyTag,
    a: Rational,
    b: Rational,
    c: Rational,
    q: Rational,
}

impl Series {
    fn basis(&self, m: usize) -> Vec<Poly> {
        match self.tag {
            FamilyTag::BigQJacobi | FamilyTag::QCharlier => x_pochhammer_basis(&self.q, m),
            FamilyTag::QLaguerre => monomial_basis(m),
            FamilyTag::AlSalamCarlitzI => shifted_monomial_basis(&self.q, m),
        }
    }

    fn coef(&self, n: usize, k: usize) -> Result<Rational> {
        let (a, b, c, q) = (&self.a, &self.b, &self.c, &self.q);
        let lat = plain(q);
        let ki = k as i64;
        let ni = n as i64;
        let qn = qpochhammer(&pow(q, -ni), &lat, k);
        let qq = qpochhammer(q, &lat, k);
        match self.tag {
            FamilyTag::BigQJacobi => checked_div(
                qn * qpochhammer(&(a * b * pow(q, ni + 1)), &lat, k) * pow(q, ki),
                qpochhammer(&(a * q), &lat, k) * qpochhammer(&(c * q), &lat, k) * qq,
                "big q-Jacobi series",
            ),
            FamilyTag::QLaguerre => checked_div(
                qn * pow(q, ki * (ki - 1) / 2 + ki * (ni + 1)) * pow(a, ki),
                qpochhammer(&(a * q), &lat, k) * qq,
                "q-Laguerre series",
            ),
            FamilyTag::AlSalamCarlitzI => {
                checked_div(qn * pow(&(q / a), ki), qq, "Al-Salam Carlitz series")
            }
            FamilyTag::QCharlier => checked_div(
                qn * pow(&-(pow(q, ni + 1) / a), ki),
                qq,
                "q-Charlier series",
            ),
        }
    }

    fn poly(&self, n: usize) -> Result<Poly> {
        self.polys_with(n, &self.basis(n))
    }

    fn polys_with(&self, n: usize, basis: &[Poly]) -> Result<Poly> {
        monic_sum(n, |k| self.coef(n, k), basis)
    }

    fn polys(&self, m: usize) -> Result<Vec<Poly>> {
        let basis = self.basis(m);
        (0..=m).map(|n| self.polys_with(n, &basis)).collect()
    }
}

fn series(tag: FamilyTag, a: &Rational, b: &Rational, c: &Rational, q: &Rational) -> Series {
    Series {
        tag,
        a: a.clone(),
        b: b.clone(),
        c: c.clone(),
        q: q.clone(),
    }
}

/// Monic Big q-Jacobi P̂ₙ(x; a, b, c; q) from its ₃φ₂ series.
pub fn big_q_jacobi(
    n: usize,
    a: &Rational,
    b: &Rational,
    c: &Rational,
    q: &Rational,
) -> Result<Poly> {
    series(FamilyTag::BigQJacobi, a, b, c, q).poly(n)
}

/// Monic q-Laguerre with a = q^α.
pub fn q_laguerre(n: usize, a: &Rational, q: &Rational) -> Result<Poly> {
    let z = Rational::zero();
    series(FamilyTag::QLaguerre, a, &z, &z, q).poly(n)
}

/// Monic Al-Salam Carlitz I Uₙ^{(a)}.
pub fn al_salam_carlitz_1(n: usize, a: &Rational, q: &Rational) -> Result<Poly> {
    let z = Rational::zero();
    series(FamilyTag::AlSalamCarlitzI, a, &z, &z, q).poly(n)
}

/// Monic q-Charlier Ĉₙ(x; a; q).
pub fn q_charlier(n: usize, a: &Rational, q: &Rational) -> Result<Poly> {
    let z = Rational::zero();
    series(FamilyTag::QCharlier, a, &z, &z, q).poly(n)
}

fn family_polys(row: &Table1Row, m: usize) -> Result<Vec<Poly>> {
    series(row.tag, &row.a, &row.b, &row.c, row.q()).polys(m)
}

/// Moments of the functional with ⟨u, Pₙ⟩ = δ_{n0} for a graded monic list.
pub fn moments_from_polys(polys: &[Poly], lat: &Lattice) -> Result<MomentFunctional> {
    let mut m: Vec<Rational> = vec![Rational::one()];
    for p in polys.iter().skip(1) {
        let n = m.len();
        let s: Rational = (0..n).map(|k| p.coeff(k) * &m[k]).sum();
        m.push(-s);
    }
    MomentFunctional::new(m, lat.clone())
}

/// A q-classical family with its verified sequence and Pearson pair.
#[derive(Clone, Debug)]
pub struct Family {
    pub row: Table1Row,
    pub seq: OrthoSequence,
    pub pearson: PearsonPair,
}

/// Builds B_0..B_N of a tabulated family on `lat` (ω = 0, family parameter q = lat.q).
/// The constructed polynomials must coincide with the Gram–Schmidt output
/// of their own functional.
pub fn table1_family(
    tag: FamilyTag,
    params: &FamilyParams,
    lat: &Lattice,
    n: usize,
) -> Result<Family> {
    let row = Table1Row::new(tag, params, lat)?;
    let horizon = 2 * n + HORIZON_SLACK;
    let polys = family_polys(&row, horizon)?;
    let u = moments_from_polys(&polys, lat)?;
    let seq = smop_from_moments(&u, n)?;
    for (k, (a, b)) in seq.polys().iter().zip(&polys).enumerate() {
        if a != b {
            return Err(Error::DefiningRelationFailed { n: k });
        }
    }
    for k in 0..=n + 1 {
        row.alpha_hat(k)?;
        row.beta_hat(k)?;
        row.gamma_hat(k)?;
        row.beta_tilde(k)?;
        row.gamma_tilde(k)?;
        row.delta(k)?;
        row.epsilon(k)?;
    }
    let phi = row.phi.monic();
    let psi = psi_from_phi(&seq, &phi, 1)?;
    let pearson = PearsonPair::new(phi, psi)?;
    check_pearson(&pearson, seq.functional())?;
    Ok(Family { row, seq, pearson })
}

/// Monic form of the family's predicted q-difference image B^{[1]}_n under
/// L_{q,0}: Big q-Jacobi P̂ₙ(qx; aq, bq, cq), q-Laguerre with a ↦ aq at qx,
/// Al-Salam Carlitz I itself, q-Charlier Ĉₙ(qx; a/q).
pub fn predicted_image(row: &Table1Row, n: usize) -> Result<Poly> {
    let q = row.q();
    let z = Rational::zero();
    let p = match row.tag {
        FamilyTag::BigQJacobi => big_q_jacobi(n, &(&row.a * q), &(&row.b * q), &(&row.c * q), q)?
            .affine_substitute(q, &z),
        FamilyTag::QLaguerre => q_laguerre(n, &(&row.a * q), q)?.affine_substitute(q, &z),
        FamilyTag::AlSalamCarlitzI => al_salam_carlitz_1(n, &row.a, q)?,
        FamilyTag::QCharlier => q_charlier(n, &(&row.a / q), q)?.affine_substitute(q, &z),
    };
    Ok(p.monic())
}

/// The q-Charlier identification C^{[1]}(x; a) = Ĉ(x; a/q), which holds for
/// the image under L_{1/q,0}.
pub fn charlier_dual_image(row: &Table1Row, n: usize) -> Result<Poly> {
    q_charlier(n, &(&row.a / row.q()), row.q())
}

/// Data of the q-Freud sequence.
#[derive(Clone, Debug)]
pub struct QFreudData {
    /// c_0 = 0, c_1, c_2 given, the rest from the non-linear recurrence.
    pub c: Vec<Rational>,
    /// a_n = K q⁻ⁿ c_n c_{n−1} c_{n−2} (a_0 = a_1 = 0).
    pub a: Vec<Rational>,
    pub k: Rational,
    pub lat: Lattice,
    /// P_0..P_H, H the functional's horizon.
    pub polys: Vec<Poly>,
    pub seq: OrthoSequence,
    pub psi: Poly,
}

impl QFreudData {
    pub fn q(&self) -> &Rational {
        self.lat.q()
    }

    pub fn pearson(&self) -> PearsonPair {
        PearsonPair::new(Poly::one(), self.psi.clone()).expect("deg Psi = 3")
    }

    /// Whether every odd moment vanishes.
    pub fn symmetric(&self) -> bool {
        self.seq
            .functional()
            .moments()
            .iter()
            .skip(1)
            .step_by(2)
            .all(|m| m.is_zero())
    }

    /// Whether [n+1](u)_n = Kq⁻³(u)_{n+4} + (1/c_1 − ([3]c_2 + a_3)/(q(1+q)))(u)_{n+2}
    /// holds on the available moments.
    pub fn moment_relation_holds(&self) -> bool {
        let q = self.q();
        let m = self.seq.functional().moments();
        let one = Rational::one();
        let coef = self.c[1].recip()
            - (qbracket(3, &self.lat) * &self.c[2] + &self.a[3]) / (q * (&one + q));
        let kq = &self.k * pow(q, -3);
        (0..m.len().saturating_sub(4))
            .all(|n| qbracket(n + 1, &self.lat) * &m[n] == &kq * &m[n + 4] + &coef * &m[n + 2])
    }
}

/// Builds the q-Freud data for N and checks ΔPₙ = [n]P_{n−1} + aₙP_{n−3}.
pub fn qfreud(
    c1: &Rational,
    c2: &Rational,
    k: &Rational,
    q: &Rational,
    n: usize,
) -> Result<QFreudData> {
    if c1.is_zero() || c2.is_zero() {
        return Err(Error::DegenerateParameters(
            "c1 and c2 must be nonzero".into(),
        ));
    }
    if k.is_zero() {
        return Err(Error::DegenerateParameters("K = 0".into()));
    }
    let lat = Lattice::new(q.clone(), Rational::zero())?;
    let horizon = 2 * n + HORIZON_SLACK;
    let br = |j: usize| qbracket(j, &lat);
    let mut c = vec![Rational::zero(), c1.clone(), c2.clone()];
    for j in 2..horizon {
        let ji = j as i64;
        let den = k * pow(q, -ji - 1) * &c[j] * &c[j - 1];
        if den.is_zero() {
            return Err(Error::RecurrenceBreakdown { n: j });
        }
        let num = q * br(j) * &c[j - 1] + k * pow(q, -ji + 1) * &c[j] * &c[j - 1] * &c[j - 2]
            - br(j - 1) * &c[j];
        let next = num / den;
        if next.is_zero() {
            return Err(Error::RecurrenceBreakdown { n: j + 1 });
        }
        c.push(next);
    }
    let mut a = vec![Rational::zero(), Rational::zero()];
    for j in 2..=horizon {
        a.push(k * pow(q, -(j as i64)) * &c[j] * &c[j - 1] * &c[j - 2]);
    }
    let mut polys = vec![Poly::one(), Poly::x()];
    for j in 1..horizon {
        let next = &(&Poly::x() * &polys[j]) - &polys[j - 1].scale(&c[j]);
        polys.push(next);
    }
    for j in 1..=horizon {
        let mut rhs = polys[j - 1].scale(&br(j));
        if j >= 3 {
            rhs = &rhs + &polys[j - 3].scale(&a[j]);
        }
        if polys[j].hahn_apply(&lat)? != rhs {
            return Err(Error::DefiningRelationFailed { n: j });
        }
    }
    let u = moments_from_polys(&polys, &lat)?;
    let seq = smop_from_moments(&u, n)?;
    for (j, (p, b)) in polys.iter().zip(seq.polys()).enumerate() {
        if p != b {
            return Err(Error::DefiningRelationFailed { n: j });
        }
    }
    let psi = &polys[3].scale(&-(k * pow(q, -3))) - &polys[1].scale(&c1.recip());
    Ok(QFreudData {
        c,
        a,
        k: k.clone(),
        lat,
        polys,
        seq,
        psi,
    })
}

/// λ_{n,j}: coefficient of x^{n−j} in P_n from the recurrence
/// λ_{n,2k+2} = ([n]c_{n−1}λ_{n−2,2k} + a_nλ_{n−3,2k}) / ([n−2k−2] − [n]),
/// with λ_{n,0} = 1, odd entries zero, and 0 ≤ k, 2k + 2 ≤ n.
pub fn qfreud_monomial_coeffs(data: &QFreudData, n_max: usize) -> Result<Vec<Vec<Rational>>> {
    if n_max >= data.c.len() {
        return Err(Error::Precondition(format!(
            "q-Freud data only reaches n = {}",
            data.c.len() - 1
        )));
    }
    let lat = &data.lat;
    let mut lam: Vec<Vec<Rational>> = Vec::new();
    let get = |lam: &Vec<Vec<Rational>>, m: i64, j: usize| -> Rational {
        if m < 0 || j > m as usize {
            Rational::zero()
        } else {
            lam[m as usize][j].clone()
        }
    };
    for n in 0..=n_max {
        let mut row = vec![Rational::zero(); n + 1];
        row[0] = Rational::one();
        let ni = n as i64;
        let mut kk = 0;
        while 2 * kk + 2 <= n {
            let j = 2 * kk;
            let den = qbracket(n - 2 * kk - 2, lat) - qbracket(n, lat);
            if den.is_zero() {
                return Err(Error::RecurrenceBreakdown { n });
            }
            let num = qbracket(n, lat) * &data.c[n - 1] * get(&lam, ni - 2, j)
                + &data.a[n] * get(&lam, ni - 3, j);
            row[j + 2] = num / den;
            kk += 1;
        }
        lam.push(row);
    }
    Ok(lam)
}

/// The three documented q-Freud inputs (c1, c2, K, q).
pub fn qfreud_documented() -> Vec<(Rational, Rational, Rational, Rational)> {
    vec![
        (rat(1, 2), rat(1, 3), int(4), rat(1, 2)),
        (int(1), int(2), int(4), rat(2, 3)),
        (rat(1, 3), rat(-1, 5), int(3), rat(3, 2)),
    ]
}

/// The class-one example Δv = Ψv with Φ = 1 and deg Ψ = 2.
#[derive(Clone, Debug)]
pub struct Class1Data {
    pub psi: Poly,
    pub m1: Rational,
    /// C = −q·lc(Ψ).
    pub c: Rational,
    pub seq: OrthoSequence,
    /// ρ_n for 0 ≤ n ≤ N − 1.
    pub rho: Vec<Rational>,
    /// v_{n,0} for 0 ≤ n ≤ N − 2.
    pub v0: Vec<Rational>,
    /// λ_{n,n−1} for 0 ≤ n ≤ N − 1, with λ_{0,−1} = 0.
    pub lam: Vec<Rational>,
}

impl Class1Data {
    pub fn pearson(&self) -> PearsonPair {
        PearsonPair::new(Poly::one(), self.psi.clone()).expect("deg Psi = 2")
    }

    pub fn lattice(&self) -> &Lattice {
        self.seq.lattice()
    }
}

pub fn class1_example(psi: &Poly, m1: &Rational, lat: &Lattice, n: usize) -> Result<Class1Data> {
    if psi.deg() != 2 {
        return Err(Error::WrongDegree {
            expected: 2,
            got: psi.deg(),
        });
    }
    let pp = PearsonPair::new(Poly::one(), psi.clone())?;
    let u = pearson_moments(&pp, lat, std::slice::from_ref(m1), 2 * n + HORIZON_SLACK)?;
    let seq = smop_from_moments(&u, n)?;
    let q = lat.q();
    let c = -(q * psi.leading());
    let g = seq.gamma();
    let b = seq.beta();
    let br = |j: usize| qbracket(j, lat);
    let rho: Vec<Rational> = (0..n)
        .map(|j| {
            if j == 0 {
                Rational::zero()
            } else {
                pow(q, j as i64 + 1) * br(j + 1) / (&c * &g[j + 1])
            }
        })
        .collect();
    let v0 = (0..n.saturating_sub(1))
        .map(|j| {
            &g[j + 2] * &g[j + 1] * &c / (pow(q, j as i64) * br(j + 2)) + &rho[j]
                - q * &b[j]
                - lat.omega()
        })
        .collect();
    let lam = (0..n)
        .map(|j| {
            if j == 0 {
                Rational::zero()
            } else {
                &g[j + 1] * &g[j] * &c / (pow(q, j as i64) * br(j + 1))
            }
        })
        .collect();
    Ok(Class1Data {
        psi: psi.clone(),
        m1: m1.clone(),
        c,
        seq,
        rho,
        v0,
        lam,
    })
}

/// Two documented class-one inputs (Ψ, m1, lattice), plus a third on q > 1.
pub fn class1_documented() -> Vec<(Poly, Rational, Lattice)> {
    vec![
        (
            Poly::from_ints(&[1, 2, 3]),
            rat(1, 5),
            Lattice::new(rat(1, 2), int(0)).expect("valid"),
        ),
        (
            Poly::from_ints(&[-1, 1, 2]),
            int(0),
            Lattice::new(rat(1, 2), int(1)).expect("valid"),
        ),
        (
            Poly::new(vec![int(2), int(-1), rat(1, 2)]),
            rat(1, 7),
            Lattice::new(rat(3, 2), rat(1, 3)).expect("valid"),
        ),
    ]
}

/// Discrete analog of the Freud functional on x(s) = s: Δv = Ψv with
/// Φ = 1, Ψ = −4x³ + x, (v)_1 = 0, (v)_2 = 1/2.
pub fn discrete_freud(n: usize) -> Result<(OrthoSequence, PearsonPair)> {
    let pp = PearsonPair::new(Poly::one(), Poly::from_ints(&[0, 1, 0, -4]))?;
    let u = pearson_moments(
        &pp,
        &Lattice::uniform(),
        &[int(0), rat(1, 2)],
        2 * n + HORIZON_SLACK,
    )?;
    Ok((smop_from_moments(&u, n)?, pp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::{expand_in_basis, pair};

    fn lq(n: i64, d: i64) -> Lattice {
        Lattice::new(rat(n, d), int(0)).unwrap()
    }

    #[test]
    fn degree_zero_is_one() {
        for tag in FamilyTag::ALL {
            let f = table1_family(tag, &FamilyParams::documented(tag), &lq(1, 2), 3).unwrap();
            assert_eq!(f.seq.poly(0), &Poly::one());
        }
    }

    #[test]
    fn al_salam_carlitz_tilde_values() {
        let row = Table1Row::new(
            FamilyTag::AlSalamCarlitzI,
            &FamilyParams::documented(FamilyTag::AlSalamCarlitzI),
            &lq(1, 2),
        )
        .unwrap();
        assert_eq!(row.alpha_tilde(2).unwrap(), int(3));
        assert_eq!(row.beta_tilde(2).unwrap(), rat(9, 4));
        assert_eq!(row.gamma_tilde(2).unwrap(), rat(3, 4));
    }

    #[test]
    fn laguerre_alpha_tilde_vanishes() {
        let row = Table1Row::new(
            FamilyTag::QLaguerre,
            &FamilyParams::documented(FamilyTag::QLaguerre),
            &lq(2, 3),
        )
        .unwrap();
        assert!((0..12).all(|n| row.alpha_tilde(n).unwrap().is_zero()));
    }

    #[test]
    fn laguerre_bare_gamma_tilde_lacks_bracket() {
        let lat = lq(1, 2);
        let row = Table1Row::new(
            FamilyTag::QLaguerre,
            &FamilyParams::documented(FamilyTag::QLaguerre),
            &lat,
        )
        .unwrap();
        for n in 1..10 {
            assert_eq!(
                row.gamma_tilde_bare(n).unwrap() * qbracket(n, &lat),
                row.gamma_tilde(n).unwrap()
            );
            if n >= 2 {
                assert_ne!(
                    row.gamma_tilde_bare(n).unwrap(),
                    row.gamma_tilde(n).unwrap()
                );
            }
        }
    }

    #[test]
    fn degenerate_big_q_jacobi_rejected() {
        // ab = 1 makes 1 − abq^{2n} vanish at n = 0
        let p = FamilyParams {
            a: Some(int(1)),
            b: Some(int(1)),
            c: Some(rat(1, 7)),
        };
        assert!(matches!(
            table1_family(FamilyTag::BigQJacobi, &p, &lq(1, 2), 4),
            Err(Error::DegenerateParameters(_))
        ));
    }

    #[test]
    fn qfreud_small_values() {
        let d = qfreud(&rat(1, 2), &rat(1, 3), &int(4), &rat(1, 2), 12).unwrap();
        assert_eq!(d.c[3], rat(1, 128));
        assert_eq!(d.a[2], int(0));
        assert_eq!(d.polys[2].coeff(0), rat(-1, 2));
        assert!(d.symmetric());
        let lam = qfreud_monomial_coeffs(&d, 12).unwrap();
        assert_eq!(lam[2][2], rat(-1, 2));
        for (n, row) in lam.iter().enumerate() {
            assert_eq!(row[0], int(1));
            for j in 0..=n {
                if j % 2 == 1 {
                    assert!(row[j].is_zero());
                }
                assert_eq!(row[j], d.polys[n].coeff(n - j), "lambda {n},{j}");
            }
        }
    }

    #[test]
    fn qfreud_moment_relation_needs_special_k() {
        let d = qfreud(&rat(1, 2), &rat(1, 3), &int(4), &rat(1, 2), 8).unwrap();
        assert!(!d.moment_relation_holds());
        let q = rat(1, 2);
        let k = pow(&q, 3);
        let d = qfreud(&rat(1, 2), &rat(1, 3), &k, &q, 8).unwrap();
        assert!(d.moment_relation_holds());
    }

    #[test]
    fn class1_psi_expansion() {
        for (psi, m1, lat) in class1_documented() {
            let d = class1_example(&psi, &m1, &lat, 10).unwrap();
            assert_eq!(d.rho[0], int(0));
            let co = expand_in_basis(&psi, &d.seq.polys()[..3]).unwrap();
            assert_eq!(co[0], int(0));
            assert_eq!(co[1], -d.seq.gamma()[1].recip());
            assert_eq!(co[2], -(&d.c / lat.q()));
        }
    }

    #[test]
    fn class1_m2_from_first_constraint() {
        let (psi, m1, lat) = class1_documented().remove(0);
        let d = class1_example(&psi, &m1, &lat, 6).unwrap();
        // ⟨v, 1 + 2x + 3x²⟩ = 0 with (v)_1 = 1/5
        assert_eq!(d.seq.functional().moments()[2], rat(-7, 15));
        assert_eq!(pair(d.seq.functional(), &psi).unwrap(), int(0));
    }

    #[test]
    fn class1_wrong_degree() {
        assert!(matches!(
            class1_example(&Poly::from_ints(&[0, 1]), &int(0), &lq(1, 2), 4),
            Err(Error::WrongDegree { .. })
        ));
    }

    #[test]
    fn family_spec_json() {
        let s = r#"{"family": "big_q_jacobi", "q": "1/2", "params": {"a": "1/3", "b": "1/5", "c": "1/7"}, "N": 10}"#;
        let spec: FamilySpec = serde_json::from_str(s).unwrap();
        assert_eq!(spec.family, FamilyTag::BigQJacobi);
        assert_eq!(spec.params, FamilyParams::documented(FamilyTag::BigQJacobi));
        assert_eq!(spec.n, 10);
    }
}
