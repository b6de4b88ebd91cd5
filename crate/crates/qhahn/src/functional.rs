//! Moment functionals and their calculus.
//!
//! A functional is stored as the finite prefix (u)_0..(u)_H of its moments.
//! Operations never extend the prefix: each documents how much of it is
//! consumed and fails with `HorizonExceeded` rather than guessing.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::exactq::{qbracket, qfactorial, serde_rat, Lattice, Rational};
use crate::latticepoly::Poly;
use crate::linalg;

/// How a functional came to be.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    Explicit,
    Pearson {
        phi: Poly,
        psi: Poly,
        free: Vec<Rational>,
    },
    Derived(String),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[Rational]| {
            v.iter()
                .map(|r| r.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        match self {
            Origin::Explicit => write!(f, "explicit"),
            Origin::Pearson { phi, psi, free } => write!(
                f,
                "pearson(phi=[{}];psi=[{}];free=[{}])",
                list(phi.coeffs()),
                list(psi.coeffs()),
                list(free)
            ),
            Origin::Derived(s) => write!(f, "derived({s})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentFunctional {
    moments: Vec<Rational>,
    lat: Lattice,
    origin: Origin,
}

#[derive(Serialize, Deserialize)]
struct FunctionalJson {
    lattice: Lattice,
    #[serde(with = "serde_rat::vec")]
    moments: Vec<Rational>,
    origin: String,
}

impl Serialize for MomentFunctional {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FunctionalJson {
            lattice: self.lat.clone(),
            moments: self.moments.clone(),
            origin: self.origin.to_string(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MomentFunctional {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = FunctionalJson::deserialize(d)?;
        let lat = j.lattice.validate().map_err(serde::de::Error::custom)?;
        let origin = if j.origin == "explicit" {
            Origin::Explicit
        } else {
            Origin::Derived(j.origin)
        };
        Ok(MomentFunctional {
            moments: j.moments,
            lat,
            origin,
        })
    }
}

impl MomentFunctional {
    /// An explicit functional; needs at least (u)_0 and (u)_0 ≠ 0.
    pub fn new(moments: Vec<Rational>, lat: Lattice) -> Result<Self> {
        match moments.first() {
            None => Err(Error::Precondition("empty moment list".into())),
            Some(m0) if m0.is_zero() => Err(Error::Precondition("(u)_0 = 0".into())),
            _ => Ok(MomentFunctional {
                moments,
                lat,
                origin: Origin::Explicit,
            }),
        }
    }

    pub(crate) fn derived(moments: Vec<Rational>, lat: Lattice, what: &str) -> Self {
        MomentFunctional {
            moments,
            lat,
            origin: Origin::Derived(what.to_string()),
        }
    }

    pub fn moments(&self) -> &[Rational] {
        &self.moments
    }

    /// Largest stored index. A derived functional may be empty, in which
    /// case the horizon is reported as 0 and `len()` is 0.
    pub fn horizon(&self) -> usize {
        self.moments.len().saturating_sub(1)
    }

    pub fn len(&self) -> usize {
        self.moments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moments.is_empty()
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lat
    }

    pub fn origin(&self) -> &Origin {
        &self.origin
    }

    pub fn moment(&self, n: usize) -> Result<&Rational> {
        self.moments.get(n).ok_or(Error::HorizonExceeded {
            needed: n,
            horizon: self.horizon(),
        })
    }

    /// Keeps (u)_0..(u)_h.
    pub fn truncate(&self, h: usize) -> Self {
        let mut m = self.clone();
        m.moments.truncate(h + 1);
        m
    }
}

/// ⟨u, f⟩.
pub fn pair(u: &MomentFunctional, f: &Poly) -> Result<Rational> {
    if f.coeffs().len() > u.moments.len() {
        return Err(Error::HorizonExceeded {
            needed: f.coeffs().len() - 1,
            horizon: u.horizon(),
        });
    }
    Ok(f.coeffs()
        .iter()
        .zip(&u.moments)
        .filter(|(c, _)| !c.is_zero())
        .map(|(c, m)| c * m)
        .sum())
}

/// Δu with ⟨Δu, f⟩ = −⟨u, Δf⟩. Keeps the horizon.
pub fn apply_delta(u: &MomentFunctional) -> Result<MomentFunctional> {
    let mut out = Vec::with_capacity(u.len());
    for n in 0..u.len() {
        let d = Poly::monomial(n).hahn_apply(&u.lat)?;
        out.push(-pair(u, &d)?);
    }
    Ok(MomentFunctional::derived(out, u.lat.clone(), "delta"))
}

/// g·u with ⟨gu, f⟩ = ⟨u, gf⟩. The horizon shrinks by deg g.
pub fn multiply(u: &MomentFunctional, g: &Poly) -> Result<MomentFunctional> {
    let dg = g.degree().unwrap_or(0);
    if dg > u.horizon() || u.is_empty() {
        return Err(Error::HorizonExceeded {
            needed: dg,
            horizon: u.horizon(),
        });
    }
    let out = (0..=u.horizon() - dg)
        .map(|n| {
            g.coeffs()
                .iter()
                .enumerate()
                .map(|(i, c)| c * &u.moments[n + i])
                .sum()
        })
        .collect();
    Ok(MomentFunctional::derived(out, u.lat.clone(), "multiply"))
}

/// θ_c(f) = (f(x) − f(c)) / (x − c).
pub fn theta(f: &Poly, c: &Rational) -> Poly {
    let num = f - &Poly::constant(f.eval(c));
    num.exact_divide(&Poly::linear(Rational::one(), -c.clone()))
        .expect("f - f(c) vanishes at c")
}

/// (x − c)⁻¹u with moment n equal to ⟨u, θ_c(xⁿ)⟩. The horizon grows by one
/// because θ_c lowers degrees; multiplying back by x − c recovers u exactly.
pub fn divide_linear(u: &MomentFunctional, c: &Rational) -> Result<MomentFunctional> {
    let out = (0..=u.len())
        .map(|n| pair(u, &theta(&Poly::monomial(n), c)))
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentFunctional::derived(
        out,
        u.lat.clone(),
        "divide_linear",
    ))
}

fn add_functionals(a: &MomentFunctional, b: &MomentFunctional, what: &str) -> MomentFunctional {
    let n = a.len().min(b.len());
    let out = (0..n).map(|i| &a.moments[i] + &b.moments[i]).collect();
    MomentFunctional::derived(out, a.lat.clone(), what)
}

/// Δ(gu) = g(q⁻¹(x−ω))·Δu + Δ(g(q⁻¹(x−ω)))·u.
pub fn delta_of_product(g: &Poly, u: &MomentFunctional) -> Result<MomentFunctional> {
    let h = g.lattice_shift(-1, &u.lat);
    let a = multiply(&apply_delta(u)?, &h)?;
    let b = multiply(u, &h.hahn_apply(&u.lat)?)?;
    Ok(add_functionals(&a, &b, "delta_of_product"))
}

/// A pair (Φ, Ψ) for Δ(Φu) = Ψu.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PearsonPair {
    pub phi: Poly,
    pub psi: Poly,
}

impl PearsonPair {
    /// Φ must be monic and deg Ψ ≥ 1.
    pub fn new(phi: Poly, psi: Poly) -> Result<Self> {
        if !phi.is_monic() {
            return Err(Error::Precondition("Phi must be monic".into()));
        }
        if psi.degree().unwrap_or(0) < 1 {
            return Err(Error::Precondition("deg Psi must be at least 1".into()));
        }
        Ok(PearsonPair { phi, psi })
    }

    pub fn t(&self) -> usize {
        self.phi.degree().unwrap_or(0)
    }

    pub fn p(&self) -> usize {
        self.psi.degree().unwrap_or(0)
    }

    /// max(t − 2, p − 1).
    pub fn sigma(&self) -> usize {
        (self.t() as i64 - 2).max(self.p() as i64 - 1).max(0) as usize
    }
}

/// Top moment index of the n-th Pearson equation ⟨u, ΦΔxⁿ + Ψxⁿ⟩ = 0.
fn pearson_top(pp: &PearsonPair, n: usize) -> usize {
    if n == 0 {
        pp.p()
    } else {
        n + (pp.t() as i64 - 1).max(pp.p() as i64) as usize
    }
}

/// Moment indices left undetermined by the Pearson recurrence, given (u)_0 = 1.
pub fn pearson_free_indices(pp: &PearsonPair) -> Vec<usize> {
    let d0 = pearson_top(pp, 0);
    (1..pearson_top(pp, 1)).filter(|&i| i != d0).collect()
}

/// The polynomial ΦΔxⁿ + Ψxⁿ whose pairing with u vanishes.
fn pearson_row(pp: &PearsonPair, n: usize, lat: &Lattice) -> Result<Poly> {
    let xn = Poly::monomial(n);
    Ok(&(&pp.phi * &xn.hahn_apply(lat)?) + &(&pp.psi * &xn))
}

/// Moments (u)_0..(u)_N of the solution of Δ(Φu) = Ψu with (u)_0 = 1 and
/// the undetermined moments taken from `free` in increasing index order.
pub fn pearson_moments(
    pp: &PearsonPair,
    lat: &Lattice,
    free: &[Rational],
    n_max: usize,
) -> Result<MomentFunctional> {
    let idx = pearson_free_indices(pp);
    if idx.len() != free.len() {
        return Err(Error::WrongFreeCount {
            expected: idx.len(),
            got: free.len(),
        });
    }
    let mut m: Vec<Option<Rational>> = vec![None; n_max + 1];
    m[0] = Some(Rational::one());
    for (&i, v) in idx.iter().zip(free) {
        if i <= n_max {
            m[i] = Some(v.clone());
        }
    }
    for n in 0.. {
        let d = pearson_top(pp, n);
        if d > n_max {
            break;
        }
        let e = pearson_row(pp, n, lat)?;
        let top = e.coeff(d);
        if top.is_zero() || e.deg() != d as i64 {
            return Err(Error::SingularRecurrence { step: n });
        }
        let mut s = Rational::zero();
        for (i, c) in e.coeffs().iter().enumerate().take(d) {
            if !c.is_zero() {
                s += c * m[i].as_ref().expect("lower moments are known");
            }
        }
        m[d] = Some(-s / top);
    }
    let moments: Vec<Rational> = m
        .into_iter()
        .map(|v| v.expect("every moment is free or determined"))
        .collect();
    let u = MomentFunctional {
        moments,
        lat: lat.clone(),
        origin: Origin::Pearson {
            phi: pp.phi.clone(),
            psi: pp.psi.clone(),
            free: free.to_vec(),
        },
    };
    check_pearson(pp, &u)?;
    Ok(u)
}

/// Compares Δ(Φu) with Ψu moment by moment over the common horizon.
pub fn check_pearson(pp: &PearsonPair, u: &MomentFunctional) -> Result<()> {
    let lhs = apply_delta(&multiply(u, &pp.phi)?)?;
    let rhs = multiply(u, &pp.psi)?;
    for (n, (a, b)) in lhs.moments.iter().zip(&rhs.moments).enumerate() {
        if a != b {
            return Err(Error::PearsonViolated { n });
        }
    }
    Ok(())
}

fn hankel(u: &MomentFunctional, n: usize) -> Vec<Vec<Rational>> {
    (0..=n)
        .map(|i| (0..=n).map(|j| u.moments[i + j].clone()).collect())
        .collect()
}

/// det H_0..det H_N of the Hankel matrices (u)_{i+j}.
pub fn hankel_check(u: &MomentFunctional, n: usize) -> Result<Vec<Rational>> {
    if u.is_empty() || 2 * n > u.horizon() {
        return Err(Error::HorizonExceeded {
            needed: 2 * n,
            horizon: u.horizon(),
        });
    }
    Ok((0..=n).map(|k| linalg::det(hankel(u, k))).collect())
}

/// Monic orthogonal polynomials B_0..B_N with their recurrence data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrthoSequence {
    polys: Vec<Poly>,
    beta: Vec<Rational>,
    gamma: Vec<Rational>,
    norms: Vec<Rational>,
    u: MomentFunctional,
}

impl OrthoSequence {
    /// N, the highest degree stored.
    pub fn n(&self) -> usize {
        self.polys.len() - 1
    }

    pub fn polys(&self) -> &[Poly] {
        &self.polys
    }

    pub fn poly(&self, n: usize) -> &Poly {
        &self.polys[n]
    }

    /// β_0..β_{N−1}.
    pub fn beta(&self) -> &[Rational] {
        &self.beta
    }

    /// γ_0..γ_N with γ_0 = 0 as a placeholder.
    pub fn gamma(&self) -> &[Rational] {
        &self.gamma
    }

    /// r_n = ⟨u, B_n²⟩ for n ≤ N.
    pub fn norms(&self) -> &[Rational] {
        &self.norms
    }

    pub fn functional(&self) -> &MomentFunctional {
        &self.u
    }

    pub fn lattice(&self) -> &Lattice {
        &self.u.lat
    }

    /// Polynomials from the recurrence B_{n+1} = (x − β_n)B_n − γ_nB_{n−1};
    /// `gamma[0]` is ignored.
    pub fn from_recurrence(beta: &[Rational], gamma: &[Rational]) -> Vec<Poly> {
        let mut p = vec![Poly::one()];
        for n in 0..beta.len() {
            let mut next = &Poly::linear(Rational::one(), -beta[n].clone()) * &p[n];
            if n > 0 {
                next = &next - &p[n - 1].scale(&gamma[n]);
            }
            p.push(next);
        }
        p
    }
}

/// Gram–Schmidt on the moment matrix: B_n = xⁿ + Σ b_k x^k with
/// ⟨u, B_n x^j⟩ = 0 for j < n.
pub fn smop_from_moments(u: &MomentFunctional, n_max: usize) -> Result<OrthoSequence> {
    if u.is_empty() || 2 * n_max > u.horizon() {
        return Err(Error::HorizonExceeded {
            needed: 2 * n_max,
            horizon: u.horizon(),
        });
    }
    let m = &u.moments;
    if m[0].is_zero() {
        return Err(Error::NotQuasiDefinite { n: 0 });
    }
    let mut polys = vec![Poly::one()];
    let mut norms = vec![m[0].clone()];
    for n in 1..=n_max {
        let a: Vec<Vec<Rational>> = (0..n)
            .map(|j| (0..n).map(|k| m[j + k].clone()).collect())
            .collect();
        let b: Vec<Rational> = (0..n).map(|j| -m[n + j].clone()).collect();
        let sol = linalg::solve_affine(&a, &b, n).ok_or(Error::NotQuasiDefinite { n: n - 1 })?;
        if !sol.nullspace.is_empty() {
            return Err(Error::NotQuasiDefinite { n: n - 1 });
        }
        let mut c = sol.particular;
        c.push(Rational::one());
        let p = Poly::new(c);
        let r: Rational = (0..=n).map(|k| p.coeff(k) * &m[n + k]).sum();
        if r.is_zero() {
            return Err(Error::NotQuasiDefinite { n });
        }
        polys.push(p);
        norms.push(r);
    }
    let beta = (0..n_max)
        .map(|n| {
            let below = if n == 0 {
                Rational::zero()
            } else {
                polys[n].coeff(n - 1)
            };
            below - polys[n + 1].coeff(n)
        })
        .collect();
    let mut gamma = vec![Rational::zero()];
    gamma.extend((1..=n_max).map(|n| &norms[n] / &norms[n - 1]));
    Ok(OrthoSequence {
        polys,
        beta,
        gamma,
        norms,
        u: u.clone(),
    })
}

/// Coefficients c_k with f = Σ c_k basis[k] for a graded monic basis.
pub fn expand_in_basis(f: &Poly, basis: &[Poly]) -> Result<Vec<Rational>> {
    let mut out = vec![Rational::zero(); basis.len()];
    let Some(d) = f.degree() else {
        return Ok(out);
    };
    if d >= basis.len() {
        return Err(Error::Precondition(format!(
            "degree {d} needs {} basis elements, have {}",
            d + 1,
            basis.len()
        )));
    }
    for (k, b) in basis.iter().enumerate().take(d + 1) {
        if b.deg() != k as i64 || !b.is_monic() {
            return Err(Error::BasisNotGradedMonic { index: k });
        }
    }
    let mut rest = f.clone().into_coeffs();
    for k in (0..=d).rev() {
        let c = rest[k].clone();
        if !c.is_zero() {
            for (i, bi) in basis[k].coeffs().iter().enumerate() {
                rest[i] -= &c * bi;
            }
        }
        out[k] = c;
    }
    Ok(out)
}

/// The admissibility screen. When p = t − 1 the value a = (1/[p]!)·(Δᵖ Ψ)(0)
/// is the leading coefficient of Ψ and the n-th Pearson equation has top
/// coefficient [n] + a, so the pair is rejected when a = −[n] for some
/// 1 ≤ n ≤ Nbound. On the uniform lattice this is a ∈ {−1, …, −Nbound}.
pub fn admissible(pp: &PearsonPair, lat: &Lattice, nbound: usize) -> bool {
    if pp.p() + 1 != pp.t() {
        return true;
    }
    let Ok(d) = pp.psi.iterated_hahn(pp.p(), lat) else {
        return false;
    };
    let a = d.eval(&Rational::zero()) / qfactorial(pp.p(), lat);
    if !a.is_negative() {
        return true;
    }
    !(1..=nbound).any(|n| qbracket(n, lat) == -&a)
}

fn divisors(n: &BigInt) -> Result<Vec<BigInt>> {
    let v = n
        .abs()
        .to_u64()
        .ok_or_else(|| Error::Precondition("coefficient too large for root search".into()))?;
    let mut out = Vec::new();
    let mut d = 1u64;
    while d * d <= v {
        if v % d == 0 {
            out.push(BigInt::from(d));
            if d * d != v {
                out.push(BigInt::from(v / d));
            }
        }
        d += 1;
    }
    Ok(out)
}

/// Rational roots of f with multiplicity.
pub fn rational_roots(f: &Poly) -> Result<Vec<Rational>> {
    let mut roots = Vec::new();
    if f.is_zero() {
        return Ok(roots);
    }
    let mut g = f.clone();
    while g.coeff(0).is_zero() && g.deg() > 0 {
        roots.push(Rational::zero());
        g = g.exact_divide(&Poly::x())?;
    }
    loop {
        if g.deg() < 1 {
            return Ok(roots);
        }
        let lcm = g
            .coeffs()
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = g.coeffs().iter().map(|c| (c * &lcm).to_integer()).collect();
        let a0 = &ints[0];
        let an = ints.last().expect("nonzero");
        let mut found = None;
        'search: for p in divisors(a0)? {
            for q in divisors(an)? {
                for s in [1i64, -1] {
                    let r = Rational::new(&p * s, q.clone());
                    if g.eval(&r).is_zero() {
                        found = Some(r);
                        break 'search;
                    }
                }
            }
        }
        match found {
            Some(r) => {
                g = g.exact_divide(&Poly::linear(Rational::one(), -r.clone()))?;
                roots.push(r);
            }
            None => return Ok(roots),
        }
    }
}

/// Solves ⟨Δ(Φ₁u) − Ψ₁u, xⁿ⟩ = 0 (n ≤ ncheck) for Ψ₁ of degree ≤ pmax.
fn solve_psi(
    phi1: &Poly,
    u: &MomentFunctional,
    pmax: usize,
    ncheck: usize,
) -> Result<Option<Poly>> {
    let t1 = phi1.degree().unwrap_or(0);
    let reach = pmax.max(t1.saturating_sub(1));
    if reach > u.horizon() {
        return Err(Error::HorizonExceeded {
            needed: reach,
            horizon: u.horizon(),
        });
    }
    let rows = ncheck.min(u.horizon() - reach);
    let mut a = Vec::new();
    let mut b = Vec::new();
    for n in 0..=rows {
        a.push(
            (0..=pmax)
                .map(|j| u.moments[n + j].clone())
                .collect::<Vec<_>>(),
        );
        let lhs = pair(u, &(phi1 * &Poly::monomial(n).hahn_apply(&u.lat)?))?;
        b.push(-lhs);
    }
    let Some(sol) = linalg::solve_affine(&a, &b, pmax + 1) else {
        return Ok(None);
    };
    if !sol.nullspace.is_empty() {
        return Err(Error::Precondition(
            "Pearson system underdetermined; raise the horizon".into(),
        ));
    }
    Ok(Some(Poly::new(sol.particular)))
}

/// The pair of minimal class among Φ₁ | Φ built from rational linear factors.
pub fn reduce_pair(
    pp: &PearsonPair,
    u: &MomentFunctional,
    ncheck: usize,
) -> Result<(PearsonPair, usize)> {
    let roots = rational_roots(&pp.phi)?;
    let mut distinct: Vec<(Rational, usize)> = Vec::new();
    for r in roots {
        match distinct.iter_mut().find(|(v, _)| *v == r) {
            Some((_, k)) => *k += 1,
            None => distinct.push((r, 1)),
        }
    }
    // every sub-multiset of the linear factors
    let mut divisors = vec![Poly::one()];
    for (r, k) in &distinct {
        let lin = Poly::linear(Rational::one(), -r.clone());
        let mut next = Vec::new();
        for d in &divisors {
            let mut p = d.clone();
            for _ in 0..=*k {
                next.push(p.clone());
                p = &p * &lin;
            }
        }
        divisors = next;
    }
    let mut candidates: BTreeMap<usize, Vec<PearsonPair>> = BTreeMap::new();
    let nbound = 2 * u.len();
    for d in divisors {
        let phi1 = pp.phi.exact_divide(&d)?;
        if let Some(psi1) = solve_psi(&phi1, u, pp.p(), ncheck)? {
            let Ok(cand) = PearsonPair::new(phi1, psi1) else {
                continue;
            };
            if !admissible(&cand, &u.lat, nbound) {
                continue;
            }
            let class = cand.sigma();
            let list = candidates.entry(class).or_default();
            if !list.contains(&cand) {
                list.push(cand);
            }
        }
    }
    let (class, mut best) = candidates.into_iter().next().ok_or(Error::NoPearsonPair)?;
    if best.len() > 1 {
        return Err(Error::NonUniqueMinimalPair { class });
    }
    Ok((best.pop().expect("nonempty"), class))
}

/// Ψ = Σ_{ν=1}^{pmax} (⟨Δ(Φu), B_ν⟩ / r_ν) B_ν, using ⟨Δ(Φu), B_ν⟩ = −⟨u, ΦΔB_ν⟩.
pub fn psi_from_phi(seq: &OrthoSequence, phi: &Poly, pmax: usize) -> Result<Poly> {
    let lat = seq.lattice();
    let mut psi = Poly::zero();
    for nu in 1..=pmax {
        let b = seq.poly(nu);
        let c = -pair(&seq.u, &(phi * &b.hahn_apply(lat)?))? / &seq.norms[nu];
        psi = &psi + &b.scale(&c);
    }
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactq::{int, qbracket, rat};

    fn lq(q: Rational, w: Rational) -> Lattice {
        Lattice::new(q, w).unwrap()
    }

    fn mf(m: &[i64], lat: &Lattice) -> MomentFunctional {
        MomentFunctional::new(m.iter().map(|&v| int(v)).collect(), lat.clone()).unwrap()
    }

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn pair_examples() {
        let l = lq(rat(1, 2), int(0));
        assert_eq!(
            pair(&mf(&[1, 2, 5], &l), &Poly::from_ints(&[1, 0, 1])).unwrap(),
            int(6)
        );
        assert_eq!(pair(&mf(&[1, 2, 5], &l), &Poly::zero()).unwrap(), int(0));
        assert_eq!(
            pair(&mf(&[1, 0, 1, 0], &l), &Poly::monomial(3)).unwrap(),
            int(0)
        );
        assert!(matches!(
            pair(&mf(&[1, 2], &l), &Poly::monomial(2)),
            Err(Error::HorizonExceeded { .. })
        ));
    }

    #[test]
    fn delta_examples() {
        let l = lq(rat(1, 2), int(0));
        let d = apply_delta(&mf(&[1, 2, 5, 7], &l)).unwrap();
        assert_eq!(d.moments()[0], int(0));
        assert_eq!(d.moments()[2], int(-3));
        assert_eq!(d.len(), 4);
        let du = apply_delta(&mf(&[3, 1, 4], &Lattice::uniform())).unwrap();
        assert_eq!(du.moments()[1], int(-3));
    }

    #[test]
    fn multiply_examples() {
        let l = lq(rat(1, 2), int(0));
        let u = mf(&[1, 2, 5], &l);
        assert_eq!(multiply(&u, &Poly::one()).unwrap().moments(), u.moments());
        assert_eq!(
            multiply(&u, &Poly::x()).unwrap().moments(),
            &ints(&[2, 5])[..]
        );
        assert_eq!(
            multiply(&u, &Poly::from_ints(&[1, 1])).unwrap().moments(),
            &ints(&[3, 7])[..]
        );
    }

    #[test]
    fn divide_linear_follows_theta() {
        let l = lq(rat(1, 2), int(0));
        let u = mf(&[1, 2, 5], &l);
        assert_eq!(
            divide_linear(&u, &int(0)).unwrap().moments(),
            &ints(&[0, 1, 2, 5])[..]
        );
        let e = mf(&[1, 0, 0], &l);
        assert_eq!(
            divide_linear(&e, &int(0)).unwrap().moments(),
            &ints(&[0, 1, 0, 0])[..]
        );
        let one = mf(&[1, 1, 1], &l);
        assert_eq!(divide_linear(&one, &int(1)).unwrap().moments()[2], int(2));
        for c in [int(0), int(1), rat(-2, 3)] {
            let w = divide_linear(&u, &c).unwrap();
            let back = multiply(&w, &Poly::linear(int(1), -c.clone())).unwrap();
            assert_eq!(back.moments(), u.moments());
        }
    }

    #[test]
    fn product_rule_examples() {
        let l = lq(rat(2, 3), int(1));
        let u = mf(&[1, 2, -1, 3, 5, 8, 13], &l);
        assert_eq!(delta_of_product(&Poly::one(), &u).unwrap(), {
            let mut d = apply_delta(&u).unwrap();
            d.origin = Origin::Derived("delta_of_product".into());
            d
        });
        let g = Poly::from_ints(&[1, -2, 0, 3]);
        let a = delta_of_product(&g, &u).unwrap();
        let b = apply_delta(&multiply(&u, &g).unwrap()).unwrap();
        assert_eq!(a.moments(), b.moments());
        let l0 = lq(rat(1, 2), int(0));
        let u0 = mf(&[1, 3, 2, 7, 1], &l0);
        let lhs = delta_of_product(&Poly::x(), &u0).unwrap();
        // at ω = 0: ⟨Δ(xu), xⁿ⟩ = −⟨u, x·Δxⁿ⟩ = −[n](u)_n
        for n in 0..lhs.len() {
            assert_eq!(lhs.moments()[n], -qbracket(n, &l0) * &u0.moments()[n]);
        }
    }

    #[test]
    fn pearson_gaussian_analog() {
        let l = lq(rat(1, 2), int(0));
        let pp = PearsonPair::new(Poly::one(), Poly::from_ints(&[0, -1])).unwrap();
        assert!(pearson_free_indices(&pp).is_empty());
        let u = pearson_moments(&pp, &l, &[], 8).unwrap();
        let m = u.moments();
        assert_eq!(m[1], int(0));
        assert_eq!(m[2], int(1));
        assert_eq!(m[3], int(0));
        assert_eq!(m[4], rat(7, 4));
        assert!(m.iter().skip(1).step_by(2).all(|v| v.is_zero()));
        assert_eq!(
            pearson_moments(&pp, &l, &[int(0)], 8),
            Err(Error::WrongFreeCount {
                expected: 0,
                got: 1
            })
        );
    }

    #[test]
    fn pearson_quadratic_psi_determines_m2() {
        let l = lq(rat(1, 2), int(0));
        // Ψ = 3x² + 2x + 1: ⟨u, Ψ⟩ = 0 gives m_2 = −(1 + 2m_1)/3
        let pp = PearsonPair::new(Poly::one(), Poly::from_ints(&[1, 2, 3])).unwrap();
        assert_eq!(pearson_free_indices(&pp), vec![1]);
        let u = pearson_moments(&pp, &l, &[rat(1, 5)], 10).unwrap();
        assert_eq!(u.moments()[2], rat(-7, 15));
    }

    #[test]
    fn pearson_singular_step() {
        let l = lq(int(2), int(0));
        // p = t − 1 and lc Ψ = −[1] kills the n = 1 equation
        let pp = PearsonPair::new(Poly::from_ints(&[0, 0, 1]), Poly::from_ints(&[0, -1])).unwrap();
        assert_eq!(
            pearson_moments(&pp, &l, &[], 6),
            Err(Error::SingularRecurrence { step: 1 })
        );
    }

    #[test]
    fn hankel_examples() {
        let l = lq(rat(1, 2), int(0));
        assert_eq!(hankel_check(&mf(&[1, 0, 1], &l), 1).unwrap(), ints(&[1, 1]));
        assert_eq!(hankel_check(&mf(&[1, 1, 1], &l), 1).unwrap()[1], int(0));
        assert!(hankel_check(&mf(&[1, 1], &l), 1).is_err());
    }

    #[test]
    fn smop_examples() {
        let l = lq(rat(1, 2), int(0));
        let s = smop_from_moments(&mf(&[1, 0, 1, 0, 3], &l), 2).unwrap();
        assert_eq!(s.poly(1), &Poly::x());
        assert_eq!(s.poly(2), &Poly::from_ints(&[-1, 0, 1]));
        assert!(s.beta().iter().all(|b| b.is_zero()));
        assert_eq!(
            smop_from_moments(&mf(&[1, 1, 1, 1, 1], &l), 2),
            Err(Error::NotQuasiDefinite { n: 1 })
        );
        let pp = PearsonPair::new(Poly::one(), Poly::from_ints(&[0, -1])).unwrap();
        let u = pearson_moments(&pp, &l, &[], 12).unwrap();
        let g = smop_from_moments(&u, 6).unwrap();
        assert_eq!(g.gamma()[1], int(1));
    }

    #[test]
    fn expansion_examples() {
        let basis = vec![Poly::one(), Poly::x(), Poly::from_ints(&[-1, 0, 1])];
        assert_eq!(
            expand_in_basis(&basis[2], &basis).unwrap(),
            ints(&[0, 0, 1])
        );
        assert_eq!(
            expand_in_basis(&Poly::monomial(2), &basis).unwrap(),
            ints(&[1, 0, 1])
        );
        assert_eq!(
            expand_in_basis(&Poly::zero(), &basis).unwrap(),
            ints(&[0, 0, 0])
        );
        let bad = vec![Poly::one(), Poly::from_ints(&[0, 2])];
        assert_eq!(
            expand_in_basis(&Poly::x(), &bad),
            Err(Error::BasisNotGradedMonic { index: 1 })
        );
    }

    #[test]
    fn admissibility_examples() {
        let l = lq(int(2), int(0));
        let x2 = Poly::monomial(2);
        assert!(admissible(
            &PearsonPair::new(x2.clone(), Poly::x()).unwrap(),
            &l,
            20
        ));
        assert!(admissible(
            &PearsonPair::new(Poly::one(), Poly::from_ints(&[0, 0, 0, 1])).unwrap(),
            &l,
            20
        ));
        // a = -[2] = -3 at q = 2; a = -2 is never a bracket there
        assert!(!admissible(
            &PearsonPair::new(x2.clone(), Poly::from_ints(&[0, -3])).unwrap(),
            &l,
            20
        ));
        assert!(admissible(
            &PearsonPair::new(x2.clone(), Poly::from_ints(&[0, -2])).unwrap(),
            &l,
            20
        ));
        let u = Lattice::uniform();
        assert!(!admissible(
            &PearsonPair::new(x2.clone(), Poly::from_ints(&[0, -2])).unwrap(),
            &u,
            20
        ));
        assert!(admissible(
            &PearsonPair::new(x2.clone(), Poly::from_ints(&[0, -2])).unwrap(),
            &u,
            1
        ));
        // q = 1/2: a = -2 is only the limit of -[n]
        let half = lq(rat(1, 2), int(0));
        assert!(admissible(
            &PearsonPair::new(x2, Poly::from_ints(&[0, -2])).unwrap(),
            &half,
            50
        ));
    }

    #[test]
    fn roots_of_split_cubic() {
        let f = &(&Poly::linear(int(1), rat(-1, 3)) * &Poly::linear(int(1), int(2)))
            * &Poly::monomial(1);
        let mut r = rational_roots(&f).unwrap();
        r.sort();
        assert_eq!(r, vec![int(-2), int(0), rat(1, 3)]);
        assert!(rational_roots(&Poly::from_ints(&[1, 0, 1]))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn reduce_returns_unchanged_for_constant_phi() {
        let l = lq(rat(1, 2), int(0));
        let pp = PearsonPair::new(Poly::one(), Poly::from_ints(&[1, 2, 3])).unwrap();
        let u = pearson_moments(&pp, &l, &[rat(1, 5)], 24).unwrap();
        let (red, class) = reduce_pair(&pp, &u, 12).unwrap();
        assert_eq!(red, pp);
        assert_eq!(class, 1);
    }

    #[test]
    fn moment_functional_json() {
        let l = lq(rat(1, 2), int(0));
        let u = mf(&[1, 0, 2], &l);
        let s = serde_json::to_string(&u).unwrap();
        assert_eq!(
            s,
            r#"{"lattice":{"q":"1/2","omega":"0","uniform":false},"moments":["1","0","2"],"origin":"explicit"}"#
        );
        let back: MomentFunctional = serde_json::from_str(&s).unwrap();
        assert_eq!(back, u);
    }
}
