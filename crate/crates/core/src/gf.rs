//! Finite fields `F_{p^m}` as dense coefficient vectors over `F_p`.
//!
//! A field is either the prime field `F_p` or `F_p[u]/(f)` for a monic
//! irreducible `f`. When no modulus is supplied the lexicographically least
//! monic irreducible of the requested degree is used, where polynomials are
//! ordered by reading the coefficients below the leading one as base-`p`
//! digits, most significant first. This is the same order in which
//! [`crate::poly::PrimeStream`] enumerates primes, so `F_4 = F_2[u]/(u^2+u+1)`,
//! `F_8 = F_2[u]/(u^3+u+1)` and `F_9 = F_3[u]/(u^2+1)`.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::parse;
use crate::poly::Poly;

struct FieldData {
    p: u64,
    degree: usize,
    /// Monic modulus, ascending coefficients, length `degree + 1`. `None` for `F_p`.
    modulus: Option<Vec<u32>>,
    order: u64,
}

/// A finite field `F_{p^m}`. Cheap to clone; equality is structural.
#[derive(Clone)]
pub struct FiniteField(Arc<FieldData>);

impl PartialEq for FiniteField {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p && self.0.modulus == other.0.modulus)
    }
}

impl Eq for FiniteField {}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl FiniteField {
    /// The prime field `F_p`.
    pub fn prime(p: u64) -> Result<Self> {
        if p > u32::MAX as u64 || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(FiniteField(Arc::new(FieldData {
            p,
            degree: 1,
            modulus: None,
            order: p,
        })))
    }

    /// `F_{p^m}` with the default (lexicographically least) modulus.
    pub fn new(p: u64, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidModulus("extension degree must be at least 1".into()));
        }
        let prime = Self::prime(p)?;
        if m == 1 {
            return Ok(prime);
        }
        check_order(p, m)?;
        let modulus = default_modulus(&prime, m);
        Ok(Self::from_parts(p, modulus))
    }

    /// `F_p[u]/(f)` for a user-supplied modulus given by ascending coefficients.
    ///
    /// The modulus must be monic of degree at least 1 and irreducible over `F_p`.
    /// A linear modulus yields the prime field itself.
    pub fn with_modulus(p: u64, modulus: &[u64]) -> Result<Self> {
        let prime = Self::prime(p)?;
        let mut coeffs: Vec<u32> = modulus.iter().map(|&c| (c % p) as u32).collect();
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        if coeffs.len() < 2 {
            return Err(Error::InvalidModulus("modulus must have degree at least 1".into()));
        }
        if *coeffs.last().unwrap() != 1 {
            return Err(Error::InvalidModulus("modulus must be monic".into()));
        }
        let m = coeffs.len() - 1;
        if m == 1 {
            return Ok(prime);
        }
        check_order(p, m)?;
        let as_poly = Poly::from_coeffs(
            &prime,
            coeffs.iter().map(|&c| FieldElem::from_int(&prime, c as i64)).collect(),
        );
        if !as_poly.is_irreducible() {
            return Err(Error::ReducibleModulus(as_poly.to_string().replace('t', "u")));
        }
        Ok(Self::from_parts(p, coeffs))
    }

    fn from_parts(p: u64, modulus: Vec<u32>) -> Self {
        let degree = modulus.len() - 1;
        FiniteField(Arc::new(FieldData {
            p,
            degree,
            modulus: Some(modulus),
            order: p.pow(degree as u32),
        }))
    }

    pub fn characteristic(&self) -> u64 {
        self.0.p
    }

    /// Degree over the prime field.
    pub fn degree(&self) -> usize {
        self.0.degree
    }

    /// Number of elements.
    pub fn order(&self) -> u64 {
        self.0.order
    }

    pub fn is_prime_field(&self) -> bool {
        self.0.modulus.is_none()
    }

    /// Ascending modulus coefficients, `None` for a prime field.
    pub fn modulus(&self) -> Option<&[u32]> {
        self.0.modulus.as_deref()
    }

    /// The modulus as a polynomial over the prime field.
    pub fn modulus_poly(&self) -> Option<Poly> {
        let prime = self.prime_subfield();
        self.modulus().map(|m| {
            Poly::from_coeffs(
                &prime,
                m.iter().map(|&c| FieldElem::from_int(&prime, c as i64)).collect(),
            )
        })
    }

    pub fn prime_subfield(&self) -> FiniteField {
        if self.is_prime_field() {
            self.clone()
        } else {
            FiniteField::prime(self.0.p).expect("characteristic is prime")
        }
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem::zero(self)
    }

    pub fn one(&self) -> FieldElem {
        FieldElem::one(self)
    }

    /// All elements in index order. Only sensible for small fields.
    pub fn elements(&self) -> impl Iterator<Item = FieldElem> + '_ {
        (0..self.order()).map(move |i| FieldElem::from_index(self, i))
    }

    /// Parses an element written as a polynomial in the generator `u`, e.g. `"u^2+1"`.
    pub fn parse_elem(&self, s: &str) -> Result<FieldElem> {
        let s = parse::compact(s);
        let s = s.as_str();
        let terms = parse::parse_sum(s, 'u')?;
        let mut acc = self.zero();
        let p = self.0.p;
        for term in terms {
            if term.exp > 0 && self.is_prime_field() {
                return Err(Error::parse(s, "prime field elements are integers"));
            }
            let c = match term.coeff {
                None => 1,
                Some(text) => {
                    let text = parse::strip_parens(text);
                    text.parse::<u64>()
                        .map_err(|_| Error::parse(s, "coefficient must be an integer"))?
                        % p
                }
            };
            let g = match self.generator() {
                Some(g) => g.pow(term.exp as u64),
                None => self.one(),
            };
            let mut t = g * FieldElem::from_int(self, c as i64);
            if term.negated {
                t = -t;
            }
            acc = acc + t;
        }
        Ok(acc)
    }

    /// The class of `u`, absent for prime fields.
    pub fn generator(&self) -> Option<FieldElem> {
        if self.is_prime_field() {
            return None;
        }
        let mut coords = vec![0u32; self.degree()];
        coords[1] = 1;
        Some(FieldElem {
            field: self.clone(),
            coords,
        })
    }

    fn mul_coords(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        let p = self.0.p;
        let m = self.0.degree;
        if m == 1 {
            return vec![((a[0] as u64 * b[0] as u64) % p) as u32];
        }
        let modulus = self.0.modulus.as_ref().unwrap();
        let mut prod = vec![0u64; 2 * m - 1];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + ai as u64 * bj as u64) % p;
            }
        }
        for k in (m..2 * m - 1).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            for i in 0..m {
                let mi = modulus[i] as u64;
                if mi != 0 {
                    prod[k - m + i] = (prod[k - m + i] + c * (p - mi)) % p;
                }
            }
        }
        prod.truncate(m);
        prod.into_iter().map(|c| c as u32).collect()
    }
}

fn check_order(p: u64, m: usize) -> Result<()> {
    u32::try_from(m)
        .ok()
        .and_then(|m| p.checked_pow(m))
        .map(|_| ())
        .ok_or(Error::FieldTooLarge { p, degree: m })
}

/// Lexicographically least monic irreducible of degree `m` over `prime`.
fn default_modulus(prime: &FiniteField, m: usize) -> Vec<u32> {
    let p = prime.characteristic();
    let count = p.pow(m as u32);
    for idx in 0..count {
        if idx % p == 0 {
            continue;
        }
        let mut coeffs = Vec::with_capacity(m + 1);
        let mut rest = idx;
        for _ in 0..m {
            coeffs.push((rest % p) as u32);
            rest /= p;
        }
        coeffs.push(1);
        let candidate = Poly::from_coeffs(
            prime,
            coeffs.iter().map(|&c| FieldElem::from_int(prime, c as i64)).collect(),
        );
        if candidate.is_irreducible() {
            return coeffs;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl fmt::Debug for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.modulus() {
            None => write!(f, "F_{}", self.0.p),
            Some(m) => {
                write!(f, "F_{}[u]/(", self.0.p)?;
                write_sparse(f, m.iter().map(|&c| c as u64), 'u')?;
                write!(f, ")")
            }
        }
    }
}

/// Writes `sum c_i x^i` highest degree first, e.g. `u^2+u+1`.
fn write_sparse(
    f: &mut fmt::Formatter<'_>,
    coeffs: impl DoubleEndedIterator<Item = u64> + ExactSizeIterator,
    var: char,
) -> fmt::Result {
    let n = coeffs.len();
    let mut first = true;
    for (i, c) in coeffs.rev().enumerate().map(|(k, c)| (n - 1 - k, c)) {
        if c == 0 {
            continue;
        }
        if !first {
            f.write_str("+")?;
        }
        first = false;
        match (i, c) {
            (0, c) => write!(f, "{c}")?,
            (1, 1) => write!(f, "{var}")?,
            (1, c) => write!(f, "{c}{var}")?,
            (i, 1) => write!(f, "{var}^{i}")?,
            (i, c) => write!(f, "{c}{var}^{i}")?,
        }
    }
    if first {
        f.write_str("0")?;
    }
    Ok(())
}

/// An element of a [`FiniteField`].
#[derive(Clone, PartialEq, Eq)]
pub struct FieldElem {
    field: FiniteField,
    coords: Vec<u32>,
}

impl FieldElem {
    pub fn zero(field: &FiniteField) -> Self {
        FieldElem {
            field: field.clone(),
            coords: vec![0; field.degree()],
        }
    }

    pub fn one(field: &FiniteField) -> Self {
        let mut z = Self::zero(field);
        z.coords[0] = 1;
        z
    }

    /// The image of an integer under `Z -> F_p -> F`.
    pub fn from_int(field: &FiniteField, n: i64) -> Self {
        let p = field.characteristic() as i64;
        let mut z = Self::zero(field);
        z.coords[0] = n.rem_euclid(p) as u32;
        z
    }

    /// Builds an element from coordinates over `F_p` in the power basis of `u`.
    pub fn from_coords(field: &FiniteField, coords: &[u64]) -> Result<Self> {
        if coords.len() != field.degree() {
            return Err(Error::Dimension(alloc::format!(
                "expected {} coordinates, got {}",
                field.degree(),
                coords.len()
            )));
        }
        let p = field.characteristic();
        Ok(FieldElem {
            field: field.clone(),
            coords: coords.iter().map(|&c| (c % p) as u32).collect(),
        })
    }

    /// The element whose coordinates are the base-`p` digits of `index`.
    pub fn from_index(field: &FiniteField, index: u64) -> Self {
        let p = field.characteristic();
        let mut rest = index;
        let coords = (0..field.degree())
            .map(|_| {
                let c = (rest % p) as u32;
                rest /= p;
                c
            })
            .collect();
        FieldElem {
            field: field.clone(),
            coords,
        }
    }

    pub fn field(&self) -> &FiniteField {
        &self.field
    }

    pub fn coords(&self) -> &[u32] {
        &self.coords
    }

    /// Inverse of [`FieldElem::from_index`]; orders elements canonically.
    pub fn index(&self) -> u64 {
        let p = self.field.characteristic();
        self.coords.iter().rev().fold(0u64, |acc, &c| acc * p + c as u64)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    pub fn is_one(&self) -> bool {
        self.coords[0] == 1 && self.coords[1..].iter().all(|&c| c == 0)
    }

    pub fn in_prime_subfield(&self) -> bool {
        self.coords[1..].iter().all(|&c| c == 0)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(Error::MixedRings)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let p = self.field.characteristic();
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(&a, &b)| ((a as u64 + b as u64) % p) as u32)
            .collect();
        Ok(FieldElem {
            field: self.field.clone(),
            coords,
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        self.try_add(&other.neg())
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(FieldElem {
            field: self.field.clone(),
            coords: self.field.mul_coords(&self.coords, &other.coords),
        })
    }

    pub fn neg(&self) -> Self {
        let p = self.field.characteristic();
        FieldElem {
            field: self.field.clone(),
            coords: self
                .coords
                .iter()
                .map(|&c| if c == 0 { 0 } else { (p - c as u64) as u32 })
                .collect(),
        }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(&self.field);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(self.field.order() - 2))
    }

    pub fn try_div(&self, other: &Self) -> Result<Self> {
        self.try_mul(&other.inv()?)
    }

    /// `x^q` for `q` a power of the characteristic.
    pub fn frobenius(&self, q: u64) -> Result<Self> {
        let p = self.field.characteristic();
        let k = log_exact(p, q).ok_or(Error::NotCharacteristicPower { p, q })?;
        Ok(self.frobenius_power(k))
    }

    /// `x^(p^k)`.
    pub(crate) fn frobenius_power(&self, k: usize) -> Self {
        let n = self.field.degree();
        let k = k % n;
        if k == 0 {
            return self.clone();
        }
        self.pow(self.field.characteristic().pow(k as u32))
    }
}

/// `k` with `base^k == n`, if any (`k >= 1`).
pub(crate) fn log_exact(base: u64, n: u64) -> Option<usize> {
    let mut k = 0;
    let mut acc = 1u64;
    while acc < n {
        acc = acc.checked_mul(base)?;
        k += 1;
    }
    (acc == n && k >= 1).then_some(k)
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&FieldElem> for &FieldElem {
            type Output = FieldElem;
            fn $method(self, rhs: &FieldElem) -> FieldElem {
                self.$checked(rhs).expect("mixed-field operands")
            }
        }
        impl $tr<FieldElem> for FieldElem {
            type Output = FieldElem;
            fn $method(self, rhs: FieldElem) -> FieldElem {
                (&self).$checked(&rhs).expect("mixed-field operands")
            }
        }
        impl $tr<&FieldElem> for FieldElem {
            type Output = FieldElem;
            fn $method(self, rhs: &FieldElem) -> FieldElem {
                (&self).$checked(rhs).expect("mixed-field operands")
            }
        }
    };
}

forward_binop!(Add, add, try_add);
forward_binop!(Sub, sub, try_sub);
forward_binop!(Mul, mul, try_mul);

impl Neg for FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        FieldElem::neg(&self)
    }
}

impl Neg for &FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        FieldElem::neg(self)
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_sparse(f, self.coords.iter().map(|&c| c as u64), 'u')
    }
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A ring embedding `source -> target`, determined by the image of `u`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Embedding {
    source: FiniteField,
    target: FiniteField,
    /// Images of `u^0, ..., u^(m-1)`.
    images: Vec<FieldElem>,
}

impl Embedding {
    pub fn identity(field: &FiniteField) -> Self {
        let images = match field.generator() {
            None => vec![field.one()],
            Some(g) => {
                let mut out = Vec::with_capacity(field.degree());
                let mut acc = field.one();
                for _ in 0..field.degree() {
                    out.push(acc.clone());
                    acc = &acc * &g;
                }
                out
            }
        };
        Embedding {
            source: field.clone(),
            target: field.clone(),
            images,
        }
    }

    /// The embedding sending `u` to `image`; `image` must be a root of the source modulus.
    pub fn from_generator_image(source: &FiniteField, image: FieldElem) -> Result<Self> {
        let target = image.field().clone();
        if target.characteristic() != source.characteristic()
            || !target.degree().is_multiple_of(source.degree())
        {
            return Err(Error::InvalidInput(alloc::format!(
                "{source} does not embed in {target}"
            )));
        }
        let mut images = Vec::with_capacity(source.degree());
        let mut acc = target.one();
        for _ in 0..source.degree() {
            images.push(acc.clone());
            acc = &acc * &image;
        }
        let emb = Embedding {
            source: source.clone(),
            target,
            images,
        };
        if let Some(m) = source.modulus() {
            // acc = image^m; check the defining relation
            let mut value = acc;
            for (i, &c) in m[..m.len() - 1].iter().enumerate() {
                value = value + &emb.images[i] * &FieldElem::from_int(&emb.target, c as i64);
            }
            if !value.is_zero() {
                return Err(Error::InvalidInput(
                    "generator image is not a root of the modulus".into(),
                ));
            }
        }
        Ok(emb)
    }

    /// The unique embedding of the prime field.
    pub fn prime_subfield(target: &FiniteField) -> Self {
        Embedding {
            source: target.prime_subfield(),
            target: target.clone(),
            images: vec![target.one()],
        }
    }

    pub fn source(&self) -> &FiniteField {
        &self.source
    }

    pub fn target(&self) -> &FiniteField {
        &self.target
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target && *self == Embedding::identity(&self.source)
    }

    pub fn apply(&self, x: &FieldElem) -> FieldElem {
        assert!(x.field() == &self.source, "element outside the embedding source");
        let mut acc = self.target.zero();
        for (c, img) in x.coords.iter().zip(&self.images) {
            if *c != 0 {
                acc = acc + img * &FieldElem::from_int(&self.target, *c as i64);
            }
        }
        acc
    }

    /// `then . self`.
    pub fn then(&self, then: &Embedding) -> Embedding {
        assert!(self.target == then.source, "embeddings do not compose");
        Embedding {
            source: self.source.clone(),
            target: then.target.clone(),
            images: self.images.iter().map(|x| then.apply(x)).collect(),
        }
    }
}

/// `F_{q^n}` for `q = |field|`, together with the embedding of `field`.
///
/// The new field uses the default modulus of degree `n * deg(field)` over
/// `F_p`; the generator of `field` goes to the least root (in index order) of
/// its modulus.
pub fn extend(field: &FiniteField, n: usize) -> Result<(FiniteField, Embedding)> {
    if n == 0 {
        return Err(Error::InvalidInput("extension degree must be at least 1".into()));
    }
    if n == 1 {
        return Ok((field.clone(), Embedding::identity(field)));
    }
    let big = FiniteField::new(field.characteristic(), field.degree() * n)?;
    match field.modulus_poly() {
        None => Ok((big.clone(), Embedding::prime_subfield(&big))),
        Some(m) => {
            let lifted = m.map_coeffs(&Embedding::prime_subfield(&big));
            let root = lifted
                .roots()
                .into_iter()
                .next()
                .ok_or_else(|| Error::InvariantViolation("modulus has no root in extension".into()))?;
            let emb = Embedding::from_generator_image(field, root)?;
            Ok((big, emb))
        }
    }
}

/// A field `K` viewed as a vector space over a subfield `F` (given by an embedding).
///
/// The basis is chosen greedily from the powers `1, x, x^2, ...` of the flat
/// generator of `K`; for `K = F_p[x]/(f)` over `F_p` it is the power basis.
#[derive(Clone, Debug)]
pub struct RelativeBasis {
    embedding: Embedding,
    basis: Vec<FieldElem>,
    /// Inverse of the `F_p`-matrix whose column `j*m + i` is `zeta^i b_j`.
    inverse: Vec<Vec<u64>>,
}

impl RelativeBasis {
    pub fn new(embedding: Embedding) -> Result<Self> {
        let base = embedding.source().clone();
        let field = embedding.target().clone();
        let p = field.characteristic();
        let m = base.degree();
        let big_n = field.degree();
        if !big_n.is_multiple_of(m) {
            return Err(Error::InvalidInput("subfield degree does not divide field degree".into()));
        }
        let mut echelon = ModpEchelon::new(p, big_n);
        let mut basis = Vec::new();
        let mut columns: Vec<Vec<u64>> = Vec::new();
        let gen = field.generator();
        let mut candidate = field.one();
        while basis.len() * m < big_n {
            let flat: Vec<u64> = candidate.coords.iter().map(|&c| c as u64).collect();
            if !echelon.contains(&flat) {
                for zeta in &embedding.images {
                    let v = zeta * &candidate;
                    let col: Vec<u64> = v.coords.iter().map(|&c| c as u64).collect();
                    echelon.insert(&col);
                    columns.push(col);
                }
                basis.push(candidate.clone());
            }
            candidate = match &gen {
                Some(g) => &candidate * g,
                None => break,
            };
        }
        // columns[j*m + i] = zeta^i b_j; build the square matrix with those columns
        let mut mat = vec![vec![0u64; big_n]; big_n];
        for (c, col) in columns.iter().enumerate() {
            for r in 0..big_n {
                mat[r][c] = col[r];
            }
        }
        let inverse = invert_mod_p(mat, p)
            .ok_or_else(|| Error::InvariantViolation("relative basis is singular".into()))?;
        Ok(RelativeBasis {
            embedding,
            basis,
            inverse,
        })
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

    pub fn basis(&self) -> &[FieldElem] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Coordinates of `x` over the subfield.
    pub fn coords(&self, x: &FieldElem) -> Vec<FieldElem> {
        assert!(x.field() == self.field(), "element outside the carrier field");
        let p = self.field().characteristic();
        let m = self.base().degree();
        let flat: Vec<u64> = x.coords.iter().map(|&c| c as u64).collect();
        let y: Vec<u64> = self
            .inverse
            .iter()
            .map(|row| row.iter().zip(&flat).fold(0, |acc, (a, b)| (acc + a * b) % p))
            .collect();
        (0..self.dim())
            .map(|j| FieldElem {
                field: self.base().clone(),
                coords: (0..m).map(|i| y[j * m + i] as u32).collect(),
            })
            .collect()
    }

    /// The element with the given coordinates.
    pub fn element(&self, coords: &[FieldElem]) -> FieldElem {
        assert_eq!(coords.len(), self.dim());
        let mut acc = self.field().zero();
        for (c, b) in coords.iter().zip(&self.basis) {
            if !c.is_zero() {
                acc = acc + &self.embedding.apply(c) * b;
            }
        }
        acc
    }
}

struct ModpEchelon {
    p: u64,
    rows: Vec<(usize, Vec<u64>)>,
}

impl ModpEchelon {
    fn new(p: u64, _dim: usize) -> Self {
        ModpEchelon { p, rows: Vec::new() }
    }

    fn reduce(&self, v: &[u64]) -> Vec<u64> {
        let p = self.p;
        let mut v = v.to_vec();
        for (piv, row) in &self.rows {
            let c = v[*piv];
            if c != 0 {
                for (x, r) in v.iter_mut().zip(row) {
                    *x = (*x + (p - c) * r) % p;
                }
            }
        }
        v
    }

    fn contains(&self, v: &[u64]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    fn insert(&mut self, v: &[u64]) {
        let p = self.p;
        let mut r = self.reduce(v);
        if let Some(piv) = r.iter().position(|&x| x != 0) {
            let inv = mod_pow(r[piv], p - 2, p);
            for x in r.iter_mut() {
                *x = *x * inv % p;
            }
            self.rows.push((piv, r));
        }
    }
}

fn mod_pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

fn invert_mod_p(mut a: Vec<Vec<u64>>, p: u64) -> Option<Vec<Vec<u64>>> {
    let n = a.len();
    let mut inv: Vec<Vec<u64>> = (0..n)
        .map(|i| (0..n).map(|j| u64::from(i == j)).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| a[r][col] != 0)?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let s = mod_pow(a[col][col], p - 2, p);
        for j in 0..n {
            a[col][j] = a[col][j] * s % p;
            inv[col][j] = inv[col][j] * s % p;
        }
        for r in 0..n {
            if r != col && a[r][col] != 0 {
                let c = a[r][col];
                for j in 0..n {
                    a[r][j] = (a[r][j] + (p - c) * a[col][j]) % p;
                    inv[r][j] = (inv[r][j] + (p - c) * inv[col][j]) % p;
                }
            }
        }
    }
    Some(inv)
}

impl FieldElem {
    pub(crate) fn to_string_wrapped(&self) -> String {
        if self.in_prime_subfield() {
            self.coords[0].to_string()
        } else {
            alloc::format!("({self})")
        }
    }
}
