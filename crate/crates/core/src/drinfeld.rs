//! Drinfeld modules over `A = F_q[t]` and their reductions at primes.
//!
//! A [`DrinfeldModule`] is given by `phi_t = t + g_1 tau + ... + g_d tau^d`
//! with `g_i` in `A`. Reducing at a good prime `W` yields a
//! [`FiniteDrinfeldModule`] on the residue field `k_W = A/W`, described by a
//! [`Carrier`].

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::gf::{self, Embedding, FieldElem, FiniteField, RelativeBasis};
use crate::linalg::{Echelon, Matrix, Vector};
use crate::poly::{Poly, PrimeIdeal};
use crate::skew::SkewPoly;

/// A Drinfeld module of generic characteristic with coefficients in `A`.
#[derive(Clone, PartialEq, Eq)]
pub struct DrinfeldModule {
    base: FiniteField,
    phi_t: SkewPoly<Poly>,
}

impl DrinfeldModule {
    pub fn new(phi_t: SkewPoly<Poly>) -> Result<Self> {
        let base = phi_t.ring().clone();
        if phi_t.q() != base.order() {
            return Err(Error::InvalidModule(format!(
                "twist q = {} differs from |F_q| = {}",
                phi_t.q(),
                base.order()
            )));
        }
        if phi_t.coeff(0) != Poly::t(&base) {
            return Err(Error::InvalidModule(format!(
                "constant term of phi_t must be t (D(phi_t) = t), got {}",
                phi_t.coeff(0)
            )));
        }
        if phi_t.degree().unwrap_or(0) < 1 {
            return Err(Error::InvalidModule("phi_t must have tau-degree at least 1".into()));
        }
        Ok(DrinfeldModule { base, phi_t })
    }

    /// `phi_t = sum coeffs[i] tau^i`.
    pub fn from_coeffs(base: &FiniteField, coeffs: Vec<Poly>) -> Result<Self> {
        Self::new(SkewPoly::new(base, base.order(), coeffs)?)
    }

    /// Coefficients as polynomial strings, constant term first.
    pub fn parse(base: &FiniteField, coeffs: &[&str]) -> Result<Self> {
        let polys = coeffs
            .iter()
            .map(|s| Poly::parse(base, s))
            .collect::<Result<Vec<_>>>()?;
        Self::from_coeffs(base, polys)
    }

    /// `phi_t = t + tau`.
    pub fn carlitz(base: &FiniteField) -> Self {
        Self::from_coeffs(base, vec![Poly::t(base), Poly::one(base)]).expect("valid")
    }

    pub fn base(&self) -> &FiniteField {
        &self.base
    }

    pub fn q(&self) -> u64 {
        self.base.order()
    }

    pub fn rank(&self) -> usize {
        self.phi_t.degree().unwrap()
    }

    pub fn phi_t(&self) -> &SkewPoly<Poly> {
        &self.phi_t
    }

    pub fn phi_of(&self, a: &Poly) -> SkewPoly<Poly> {
        horner(&self.phi_t, a, |c| Poly::constant(c.clone()))
    }

    /// `phi_t(x)`.
    pub fn apply_t(&self, x: &Poly) -> Poly {
        self.phi_t.additive_eval(x)
    }

    /// `phi_a(x)`, by Horner's rule in `phi_t`.
    pub fn act(&self, a: &Poly, x: &Poly) -> Poly {
        let mut acc = Poly::zero(&self.base);
        for c in a.coeffs().iter().rev() {
            acc = &self.apply_t(&acc) + &x.scale(c);
        }
        acc
    }

    /// The leading coefficient of `phi_t` is a unit mod `W`.
    pub fn is_good_prime(&self, w: &PrimeIdeal) -> bool {
        !self.phi_t.leading().unwrap().rem(w.gen()).unwrap().is_zero()
    }

    pub fn ensure_good(&self, w: &PrimeIdeal) -> Result<()> {
        if self.is_good_prime(w) {
            Ok(())
        } else {
            Err(Error::BadPrime(format!("{w} is a bad prime for {self}")))
        }
    }

    pub fn reduce_at(&self, w: &PrimeIdeal) -> Result<FiniteDrinfeldModule> {
        self.reduce_on(&Carrier::new(w)?)
    }

    /// Reduction with coefficients placed in a prepared residue carrier.
    pub fn reduce_on(&self, carrier: &Carrier) -> Result<FiniteDrinfeldModule> {
        self.ensure_good(carrier.prime())?;
        let phi = self.phi_t.map(carrier.field(), |c| carrier.reduce(c))?;
        FiniteDrinfeldModule::new(carrier.clone(), phi)
    }

    pub fn reduce_point(&self, w: &PrimeIdeal, x: &Poly) -> Result<FieldElem> {
        self.ensure_good(w)?;
        Ok(Carrier::new(w)?.reduce(x))
    }

    /// Least `k` such that every `x` of degree `>= k` has `deg phi_t(x) > deg x`
    /// with the top term of `phi_t(x)` coming from `g_d x^(q^d)`. Torsion
    /// points all have degree `< k`.
    pub fn torsion_degree_bound(&self) -> usize {
        let d = self.rank();
        let q = self.q() as u128;
        let top = self.phi_t.coeff(d).degree().unwrap() as u128;
        let lower: Vec<(u128, u128)> = (0..d)
            .filter_map(|i| {
                let g = self.phi_t.coeff(i);
                g.degree().map(|dg| (dg as u128, q.pow(i as u32)))
            })
            .collect();
        let qd = q.pow(d as u32);
        (0usize..)
            .find(|&k| {
                let k = k as u128;
                let lead = top + qd * k;
                lead > k && lower.iter().all(|&(dg, qi)| lead > dg + qi * k)
            })
            .unwrap()
    }

    /// Exact annihilator of `x`: `Some(order)` if `x` is torsion, else `None`.
    pub fn torsion_order(&self, x: &Poly) -> Option<Poly> {
        let k0 = self.torsion_degree_bound();
        let coords = |y: &Poly| -> Option<Vector> {
            if y.degree().is_some_and(|d| d >= k0) {
                return None;
            }
            Some((0..k0).map(|i| y.coeff(i)).collect())
        };
        let mut ech = Echelon::new(&self.base, k0);
        let mut cur = x.clone();
        loop {
            let v = coords(&cur)?;
            if let Some(combo) = ech.insert(&v) {
                // cur = sum combo[i] phi_t^i(x)
                let mut c: Vec<FieldElem> = combo.iter().map(FieldElem::neg).collect();
                c.push(self.base.one());
                return Some(Poly::from_coeffs(&self.base, c));
            }
            cur = self.apply_t(&cur);
        }
    }

    /// `F_q`-basis of the full torsion submodule `phi(A)_tor`, in row echelon form.
    pub fn torsion_subspace(&self) -> Vec<Poly> {
        let k0 = self.torsion_degree_bound();
        let f = &self.base;
        // current subspace as a basis of polynomials of degree < k0
        let mut basis: Vec<Poly> = (0..k0).map(|i| Poly::monomial(f.one(), i)).collect();
        loop {
            // x = sum c_j b_j with phi_t(x) inside span(basis)
            let n = basis.len();
            if n == 0 {
                return basis;
            }
            let images: Vec<Poly> = basis.iter().map(|b| self.apply_t(b)).collect();
            let top = images
                .iter()
                .filter_map(Poly::degree)
                .max()
                .unwrap_or(0)
                .max(k0);
            // columns: images of basis, then basis itself (negated coefficients free)
            let mut cols: Vec<Vector> = Vec::with_capacity(2 * n);
            for img in &images {
                cols.push((0..=top).map(|i| img.coeff(i)).collect());
            }
            for b in &basis {
                cols.push((0..=top).map(|i| b.coeff(i).neg()).collect());
            }
            let m = Matrix::from_columns(f, top + 1, &cols).unwrap();
            let kernel = m.nullspace();
            let next: Vec<Poly> = kernel
                .iter()
                .map(|v| {
                    let mut acc = Poly::zero(f);
                    for (c, b) in v[..n].iter().zip(&basis) {
                        acc = &acc + &b.scale(c);
                    }
                    acc
                })
                .collect();
            let next = echelon_polys(f, k0, next);
            if next.len() == basis.len() {
                return next;
            }
            basis = next;
        }
    }
}

/// Row-reduced basis of the span of `polys` (all of degree `< width`).
pub(crate) fn echelon_polys(f: &FiniteField, width: usize, polys: Vec<Poly>) -> Vec<Poly> {
    if polys.is_empty() || width == 0 {
        return Vec::new();
    }
    let rows: Vec<Vector> = polys
        .iter()
        .map(|p| (0..width).rev().map(|i| p.coeff(i)).collect())
        .collect();
    let (r, pivots) = Matrix::from_rows(f, rows).unwrap().rref();
    (0..pivots.len())
        .map(|i| {
            let coeffs: Vec<FieldElem> = r.row(i).iter().rev().cloned().collect();
            Poly::from_coeffs(f, coeffs)
        })
        .collect()
}

fn horner<R: crate::skew::TwistCoeff>(
    phi_t: &SkewPoly<R>,
    a: &Poly,
    lift: impl Fn(&FieldElem) -> R,
) -> SkewPoly<R> {
    let ring = phi_t.ring();
    let mut acc = SkewPoly::zero(ring, phi_t.q()).unwrap();
    for c in a.coeffs().iter().rev() {
        acc = &(&acc * phi_t) + &SkewPoly::constant(lift(c), phi_t.q()).unwrap();
    }
    acc
}

impl fmt::Display for DrinfeldModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "phi_t = {} over {}", self.phi_t, self.base)
    }
}

impl fmt::Debug for DrinfeldModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A residue field `k = A/W` (or an extension of it) as an `A`-algebra: the
/// field, the embedding of `F_q`, the image `theta` of `t`, and an
/// `F_q`-basis used for coordinates.
#[derive(Clone, Debug)]
pub struct Carrier {
    prime: PrimeIdeal,
    embedding: Embedding,
    theta: FieldElem,
    basis: RelativeBasis,
    /// Degree of `k` over `A/W`.
    extension: usize,
}

impl Carrier {
    /// Over a prime base field `k_W = F_p[u]/(W)` with `theta = u`; otherwise a
    /// flat field of degree `m deg W` with `theta` the least root of `W`.
    pub fn new(w: &PrimeIdeal) -> Result<Self> {
        let base = w.gen().field().clone();
        let (embedding, theta) = if base.is_prime_field() {
            let digits: Vec<u64> = w.gen().coeffs().iter().map(FieldElem::index).collect();
            let k = FiniteField::with_modulus(base.characteristic(), &digits)?;
            let theta = match k.generator() {
                Some(u) => u,
                None => w.gen().coeff(0).neg(),
            };
            (Embedding::prime_subfield(&k), theta)
        } else {
            let (_, emb) = gf::extend(&base, w.degree())?;
            let theta = w
                .gen()
                .map_coeffs(&emb)
                .roots()
                .into_iter()
                .next()
                .ok_or_else(|| Error::InvariantViolation(format!("{w} has no root in its residue field")))?;
            (emb, theta)
        };
        let basis = RelativeBasis::new(embedding.clone())?;
        Ok(Carrier {
            prime: w.clone(),
            embedding,
            theta,
            basis,
            extension: 1,
        })
    }

    pub fn prime(&self) -> &PrimeIdeal {
        &self.prime
    }

    pub fn base(&self) -> &FiniteField {
        self.embedding.source()
    }

    pub fn field(&self) -> &FiniteField {
        self.embedding.target()
    }

    pub fn embedding(&self) -> &Embedding {
        &self.embedding
    }

    pub fn theta(&self) -> &FieldElem {
        &self.theta
    }

    pub fn basis(&self) -> &RelativeBasis {
        &self.basis
    }

    /// `F_q`-dimension of the field.
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn extension_degree(&self) -> usize {
        self.extension
    }

    /// `x mod W` as an element of the field.
    pub fn reduce(&self, x: &Poly) -> FieldElem {
        x.rem(self.prime.gen())
            .expect("same field")
            .eval_embedded(&self.embedding, &self.theta)
    }

    pub fn coords(&self, x: &FieldElem) -> Vector {
        self.basis.coords(x)
    }

    pub fn element(&self, coords: &[FieldElem]) -> FieldElem {
        self.basis.element(coords)
    }

    /// The degree-`n` extension together with the embedding of this field into it.
    pub fn extend(&self, n: usize) -> Result<(Carrier, Embedding)> {
        let (_, up) = gf::extend(self.field(), n)?;
        let embedding = self.embedding.then(&up);
        let basis = RelativeBasis::new(embedding.clone())?;
        Ok((
            Carrier {
                prime: self.prime.clone(),
                theta: up.apply(&self.theta),
                embedding,
                basis,
                extension: self.extension * n,
            },
            up,
        ))
    }
}

/// A Drinfeld module over a finite `A`-field of characteristic `W`.
#[derive(Clone, Debug)]
pub struct FiniteDrinfeldModule {
    carrier: Carrier,
    phi_t: SkewPoly<FieldElem>,
    height: usize,
}

impl FiniteDrinfeldModule {
    pub fn new(carrier: Carrier, phi_t: SkewPoly<FieldElem>) -> Result<Self> {
        if phi_t.ring() != carrier.field() || phi_t.q() != carrier.base().order() {
            return Err(Error::MixedRings);
        }
        if &phi_t.coeff(0) != carrier.theta() {
            return Err(Error::InvalidModule("constant term of phi_t must be theta".into()));
        }
        let d = phi_t.degree().unwrap_or(0);
        if d < 1 {
            return Err(Error::InvalidModule("rank must be at least 1".into()));
        }
        let mut m = FiniteDrinfeldModule {
            carrier,
            phi_t,
            height: 0,
        };
        let phi_w = m.phi_of(m.carrier.prime.gen());
        let val = phi_w.valuation().unwrap();
        let deg_w = m.carrier.prime.degree();
        if !val.is_multiple_of(deg_w) || val == 0 || val / deg_w > d {
            return Err(Error::InvariantViolation(format!(
                "tau-valuation {val} of phi_W is not a multiple of deg W in [1, d]"
            )));
        }
        m.height = val / deg_w;
        Ok(m)
    }

    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    pub fn field(&self) -> &FiniteField {
        self.carrier.field()
    }

    pub fn base(&self) -> &FiniteField {
        self.carrier.base()
    }

    pub fn theta(&self) -> &FieldElem {
        self.carrier.theta()
    }

    /// The special characteristic.
    pub fn characteristic(&self) -> &PrimeIdeal {
        self.carrier.prime()
    }

    pub fn phi_t(&self) -> &SkewPoly<FieldElem> {
        &self.phi_t
    }

    pub fn rank(&self) -> usize {
        self.phi_t.degree().unwrap()
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn phi_of(&self, a: &Poly) -> SkewPoly<FieldElem> {
        let emb = self.carrier.embedding();
        horner(&self.phi_t, a, |c| emb.apply(c))
    }

    pub fn apply_t(&self, x: &FieldElem) -> FieldElem {
        self.phi_t.additive_eval(x)
    }

    pub fn act(&self, a: &Poly, x: &FieldElem) -> FieldElem {
        let emb = self.carrier.embedding();
        let mut acc = self.field().zero();
        for c in a.coeffs().iter().rev() {
            acc = &self.apply_t(&acc) + &(&emb.apply(c) * x);
        }
        acc
    }

    /// Matrix of `phi_t` over `F_q` in the carrier basis.
    pub fn operator(&self) -> Matrix {
        self.phi_t.operator_matrix(self.carrier.basis()).expect("coefficients in carrier")
    }

    /// The same module over the degree-`n` extension of the carrier.
    pub fn extend(&self, n: usize) -> Result<(FiniteDrinfeldModule, Embedding)> {
        let (carrier, up) = self.carrier.extend(n)?;
        let phi = self.phi_t.map_coeffs(&up)?;
        Ok((FiniteDrinfeldModule::new(carrier, phi)?, up))
    }
}

impl fmt::Display for FiniteDrinfeldModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "phi_t = {} over {}", self.phi_t, self.field())
    }
}
