//! The polynomial ring `A = F_q[t]`.
//!
//! Polynomials are dense and trimmed; the zero polynomial has no coefficients
//! and degree `None`. Factorisation runs square-free decomposition,
//! distinct-degree splitting and Cantor-Zassenhaus equal-degree splitting
//! driven by a seeded ChaCha generator. Factors are returned in canonical
//! order, so the output does not depend on the seed.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gf::{Embedding, FieldElem, FiniteField};
use crate::parse;

#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    field: FiniteField,
    coeffs: Vec<FieldElem>,
}

impl Poly {
    pub fn zero(field: &FiniteField) -> Self {
        Poly {
            field: field.clone(),
            coeffs: Vec::new(),
        }
    }

    pub fn one(field: &FiniteField) -> Self {
        Self::constant(field.one())
    }

    /// The variable `t`.
    pub fn t(field: &FiniteField) -> Self {
        Self::monomial(field.one(), 1)
    }

    pub fn constant(c: FieldElem) -> Self {
        let field = c.field().clone();
        Self::from_coeffs(&field, vec![c])
    }

    pub fn monomial(c: FieldElem, k: usize) -> Self {
        let field = c.field().clone();
        let mut coeffs = vec![field.zero(); k];
        coeffs.push(c);
        Self::from_coeffs(&field, coeffs)
    }

    /// Ascending coefficients; trailing zeros are trimmed.
    pub fn from_coeffs(field: &FiniteField, mut coeffs: Vec<FieldElem>) -> Self {
        debug_assert!(coeffs.iter().all(|c| c.field() == field));
        while coeffs.last().is_some_and(FieldElem::is_zero) {
            coeffs.pop();
        }
        Poly {
            field: field.clone(),
            coeffs,
        }
    }

    pub fn from_ints(field: &FiniteField, coeffs: &[i64]) -> Self {
        Self::from_coeffs(
            field,
            coeffs.iter().map(|&c| FieldElem::from_int(field, c)).collect(),
        )
    }

    /// The monic polynomial of degree `degree` whose lower coefficients are the
    /// base-`q` digits of `index` (constant term least significant).
    pub fn monic_from_index(field: &FiniteField, degree: usize, index: u64) -> Self {
        let q = field.order();
        let mut rest = index;
        let mut coeffs = Vec::with_capacity(degree + 1);
        for _ in 0..degree {
            coeffs.push(FieldElem::from_index(field, rest % q));
            rest /= q;
        }
        coeffs.push(field.one());
        Self::from_coeffs(field, coeffs)
    }

    /// Index of the coefficients below the leading one, see [`Poly::monic_from_index`].
    pub fn lower_index(&self) -> u64 {
        let q = self.field.order();
        let n = self.coeffs.len().saturating_sub(1);
        self.coeffs[..n]
            .iter()
            .rev()
            .fold(0u64, |acc, c| acc.saturating_mul(q).saturating_add(c.index()))
    }

    /// All polynomials of degree `<= bound` (including zero) in canonical order.
    pub fn all_up_to_degree(field: &FiniteField, bound: usize) -> impl Iterator<Item = Poly> + '_ {
        let q = field.order();
        let count = q.pow(bound as u32 + 1);
        (0..count).map(move |idx| {
            let mut rest = idx;
            let coeffs = (0..=bound)
                .map(|_| {
                    let c = FieldElem::from_index(field, rest % q);
                    rest /= q;
                    c
                })
                .collect();
            Poly::from_coeffs(field, coeffs)
        })
    }

    pub fn field(&self) -> &FiniteField {
        &self.field
    }

    pub fn coeffs(&self) -> &[FieldElem] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> FieldElem {
        self.coeffs.get(i).cloned().unwrap_or_else(|| self.field.zero())
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn leading(&self) -> Option<&FieldElem> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(FieldElem::is_one)
    }

    pub fn monic(&self) -> Poly {
        match self.leading() {
            None => self.clone(),
            Some(l) if l.is_one() => self.clone(),
            Some(l) => self.scale(&l.inv().expect("nonzero leading coefficient")),
        }
    }

    fn check(&self, other: &Poly) -> Result<()> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(Error::MixedRings)
        }
    }

    pub fn try_add(&self, other: &Poly) -> Result<Poly> {
        self.check(other)?;
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| match (self.coeffs.get(i), other.coeffs.get(i)) {
                (Some(a), Some(b)) => a + b,
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            })
            .collect();
        Ok(Poly::from_coeffs(&self.field, coeffs))
    }

    pub fn try_sub(&self, other: &Poly) -> Result<Poly> {
        self.check(other)?;
        self.try_add(&other.neg())
    }

    pub fn try_mul(&self, other: &Poly) -> Result<Poly> {
        self.check(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Poly::zero(&self.field));
        }
        let mut out = vec![self.field.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        let rhs: Vec<(usize, &FieldElem)> = other.coeffs.iter().enumerate().filter(|(_, b)| !b.is_zero()).collect();
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for &(j, b) in &rhs {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Ok(Poly::from_coeffs(&self.field, out))
    }

    pub fn neg(&self) -> Poly {
        Poly {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(FieldElem::neg).collect(),
        }
    }

    pub fn scale(&self, c: &FieldElem) -> Poly {
        Poly::from_coeffs(&self.field, self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Multiplication by `t^k`.
    pub fn shift(&self, k: usize) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![self.field.zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Poly {
            field: self.field.clone(),
            coeffs,
        }
    }

    /// `(quotient, remainder)` with `self = quotient * b + remainder`, `deg remainder < deg b`.
    pub fn divmod(&self, b: &Poly) -> Result<(Poly, Poly)> {
        self.check(b)?;
        let db = b.degree().ok_or(Error::DivisionByZero)?;
        let inv = b.leading().unwrap().inv()?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= db {
            return Ok((Poly::zero(&self.field), self.clone()));
        }
        let mut quot = vec![self.field.zero(); rem.len() - db];
        for k in (db..rem.len()).rev() {
            if rem[k].is_zero() {
                continue;
            }
            let c = &rem[k] * &inv;
            for (i, bi) in b.coeffs.iter().enumerate() {
                if !bi.is_zero() {
                    rem[k - db + i] = &rem[k - db + i] - &(&c * bi);
                }
            }
            quot[k - db] = c;
        }
        rem.truncate(db);
        Ok((
            Poly::from_coeffs(&self.field, quot),
            Poly::from_coeffs(&self.field, rem),
        ))
    }

    pub fn rem(&self, b: &Poly) -> Result<Poly> {
        Ok(self.divmod(b)?.1)
    }

    /// Exact division; `None` if `b` does not divide `self`.
    pub fn div_exact(&self, b: &Poly) -> Option<Poly> {
        match self.divmod(b) {
            Ok((q, r)) if r.is_zero() => Some(q),
            _ => None,
        }
    }

    pub fn divides(&self, other: &Poly) -> bool {
        other.div_exact(self).is_some()
    }

    /// Monic gcd; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b).expect("same field");
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn lcm(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero(&self.field);
        }
        let g = self.gcd(other);
        (self * &other.div_exact(&g).unwrap()).monic()
    }

    /// `(g, s, u)` with `s*self + u*other = g`, `g` the monic gcd.
    pub fn xgcd(&self, other: &Poly) -> (Poly, Poly, Poly) {
        let f = &self.field;
        let (mut r0, mut r1) = (self.clone(), other.clone());
        let (mut s0, mut s1) = (Poly::one(f), Poly::zero(f));
        let (mut u0, mut u1) = (Poly::zero(f), Poly::one(f));
        while !r1.is_zero() {
            let (q, r) = r0.divmod(&r1).expect("same field");
            r0 = core::mem::replace(&mut r1, r);
            let s = &s0 - &(&q * &s1);
            s0 = core::mem::replace(&mut s1, s);
            let u = &u0 - &(&q * &u1);
            u0 = core::mem::replace(&mut u1, u);
        }
        let (g, s, u) = match r0.leading() {
            None => (r0, s0, u0),
            Some(l) => {
                let inv = l.inv().unwrap();
                (r0.scale(&inv), s0.scale(&inv), u0.scale(&inv))
            }
        };
        debug_assert_eq!(&(&s * self) + &(&u * other), g);
        (g, s, u)
    }

    pub fn pow(&self, mut e: u64) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one(&self.field);
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

    pub fn powmod(&self, mut e: u64, m: &Poly) -> Result<Poly> {
        let mut base = self.rem(m)?;
        let mut acc = Poly::one(&self.field).rem(m)?;
        while e > 0 {
            if e & 1 == 1 {
                acc = (&acc * &base).rem(m)?;
            }
            e >>= 1;
            if e > 0 {
                base = (&base * &base).rem(m)?;
            }
        }
        Ok(acc)
    }

    /// Evaluation at an element of the coefficient field.
    pub fn eval(&self, x: &FieldElem) -> FieldElem {
        self.coeffs
            .iter()
            .rev()
            .fold(x.field().zero(), |acc, c| &(&acc * x) + c)
    }

    /// Evaluation at an element of a larger field, through `emb`.
    pub fn eval_embedded(&self, emb: &Embedding, x: &FieldElem) -> FieldElem {
        self.coeffs
            .iter()
            .rev()
            .fold(x.field().zero(), |acc, c| &(&acc * x) + &emb.apply(c))
    }

    pub fn map_coeffs(&self, emb: &Embedding) -> Poly {
        Poly::from_coeffs(
            emb.target(),
            self.coeffs.iter().map(|c| emb.apply(c)).collect(),
        )
    }

    pub fn derivative(&self) -> Poly {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * &FieldElem::from_int(&self.field, i as i64))
            .collect();
        Poly::from_coeffs(&self.field, coeffs)
    }

    /// `self^(p^k)` computed coefficientwise: `sum c_i^(p^k) t^(i p^k)`.
    pub(crate) fn frobenius_power(&self, k: usize) -> Poly {
        if k == 0 || self.is_zero() {
            return self.clone();
        }
        let step = self.field.characteristic().pow(k as u32) as usize;
        let mut coeffs = vec![self.field.zero(); (self.coeffs.len() - 1) * step + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * step] = c.frobenius_power(k);
        }
        Poly::from_coeffs(&self.field, coeffs)
    }

    /// Ben-Or irreducibility test.
    pub fn is_irreducible(&self) -> bool {
        let n = match self.degree() {
            None | Some(0) => return false,
            Some(1) => return true,
            Some(n) => n,
        };
        let f = self.monic();
        let t = Poly::t(&self.field);
        let q = self.field.order();
        let mut h = t.clone();
        for _ in 0..n / 2 {
            h = h.powmod(q, &f).expect("nonzero modulus");
            if !(&h - &t).gcd(&f).is_one() {
                return false;
            }
        }
        true
    }

    /// Complete factorisation with the default seed.
    pub fn factor(&self) -> Result<Factorization> {
        self.factor_with_seed(0)
    }

    pub fn factor_with_seed(&self, seed: u64) -> Result<Factorization> {
        let unit = self.leading().cloned().ok_or(Error::InvalidInput(
            "cannot factor the zero polynomial".into(),
        ))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut factors: Vec<(PrimeIdeal, usize)> = Vec::new();
        for (part, mult) in self.monic().squarefree() {
            for (chunk, d) in part.distinct_degree() {
                for g in chunk.equal_degree(d, &mut rng) {
                    factors.push((PrimeIdeal { gen: g }, mult));
                }
            }
        }
        factors.sort_by(|a, b| a.0.cmp(&b.0));
        // merge repeated primes (possible across square-free layers only in theory)
        let mut merged: Vec<(PrimeIdeal, usize)> = Vec::new();
        for (p, e) in factors {
            match merged.last_mut() {
                Some((last, le)) if *last == p => *le += e,
                _ => merged.push((p, e)),
            }
        }
        Ok(Factorization {
            unit,
            factors: merged,
        })
    }

    /// Square-free decomposition of a monic polynomial: pairs `(g_i, i)` with
    /// `self = prod g_i^i`, each `g_i` square-free and monic.
    fn squarefree(&self) -> Vec<(Poly, usize)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let p = self.field.characteristic() as usize;
        let d = self.derivative();
        let mut c = self.gcd(&d);
        let mut w = self.div_exact(&c).unwrap();
        let mut i = 1;
        while !w.is_one() {
            let y = w.gcd(&c);
            let z = w.div_exact(&y).unwrap();
            if !z.is_one() {
                out.push((z, i));
            }
            i += 1;
            w = y;
            c = c.div_exact(&w).unwrap();
        }
        if !c.is_one() {
            for (g, j) in c.pth_root().squarefree() {
                out.push((g, j * p));
            }
        }
        out
    }

    /// For `self = g(t^p)` returns `g^(1/p)` coefficientwise, i.e. the `p`-th root.
    fn pth_root(&self) -> Poly {
        let p = self.field.characteristic() as usize;
        let n = self.field.degree();
        let coeffs = self
            .coeffs
            .iter()
            .step_by(p)
            .map(|c| c.frobenius_power(n - 1))
            .collect();
        Poly::from_coeffs(&self.field, coeffs)
    }

    /// Distinct-degree splitting of a monic square-free polynomial.
    fn distinct_degree(&self) -> Vec<(Poly, usize)> {
        let mut out = Vec::new();
        let q = self.field.order();
        let t = Poly::t(&self.field);
        let mut rest = self.clone();
        let mut h = t.clone();
        let mut i = 0;
        while rest.degree().unwrap_or(0) >= 2 * (i + 1) {
            i += 1;
            h = h.powmod(q, &rest).unwrap();
            let g = (&h - &t).gcd(&rest);
            if !g.is_one() {
                rest = rest.div_exact(&g).unwrap();
                h = h.rem(&rest).unwrap();
                out.push((g, i));
            }
        }
        if let Some(d) = rest.degree().filter(|&d| d > 0) {
            out.push((rest, d));
        }
        out
    }

    /// Cantor-Zassenhaus splitting of a product of distinct monic irreducibles of degree `d`.
    fn equal_degree(&self, d: usize, rng: &mut ChaCha8Rng) -> Vec<Poly> {
        let n = self.degree().unwrap();
        if n == d {
            return vec![self.clone()];
        }
        let q = self.field.order();
        let p = self.field.characteristic();
        loop {
            let a = self.random_below(rng);
            if a.degree().unwrap_or(0) == 0 {
                continue;
            }
            let mut g = a.gcd(self);
            if g.is_one() {
                let b = if p == 2 {
                    // absolute trace of a in F_2[t]/(self)
                    let k = self.field.degree() * d;
                    let mut acc = a.clone();
                    let mut cur = a.clone();
                    for _ in 1..k {
                        cur = (&cur * &cur).rem(self).unwrap();
                        acc = &acc + &cur;
                    }
                    acc
                } else {
                    // a^((q^d - 1)/2) = (a^(1 + q + ... + q^(d-1)))^((q - 1)/2)
                    let mut cur = a.clone();
                    let mut norm = a.clone();
                    for _ in 1..d {
                        cur = cur.powmod(q, self).unwrap();
                        norm = (&norm * &cur).rem(self).unwrap();
                    }
                    &norm.powmod((q - 1) / 2, self).unwrap() - &Poly::one(&self.field)
                };
                g = b.gcd(self);
            }
            if let Some(dg) = g.degree() {
                if dg > 0 && dg < n {
                    let h = self.div_exact(&g).unwrap();
                    let mut out = g.equal_degree(d, rng);
                    out.extend(h.equal_degree(d, rng));
                    return out;
                }
            }
        }
    }

    fn random_below(&self, rng: &mut ChaCha8Rng) -> Poly {
        let n = self.degree().unwrap();
        let q = self.field.order();
        let coeffs = (0..n)
            .map(|_| FieldElem::from_index(&self.field, rng.next_u64() % q))
            .collect();
        Poly::from_coeffs(&self.field, coeffs)
    }

    /// Roots in the coefficient field, in index order.
    pub fn roots(&self) -> Vec<FieldElem> {
        if self.degree().unwrap_or(0) == 0 {
            return Vec::new();
        }
        let f = self.monic();
        let t = Poly::t(&self.field);
        let split = (&t.powmod(self.field.order(), &f).unwrap() - &t).gcd(&f);
        if split.degree().unwrap_or(0) == 0 {
            return Vec::new();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut roots: Vec<FieldElem> = split
            .equal_degree(1, &mut rng)
            .into_iter()
            .map(|lin| lin.coeff(0).neg())
            .collect();
        roots.sort_by_key(FieldElem::index);
        roots
    }

    /// Parses sparse text such as `"t^3+t+1"` or `"(u+1)t^2+u"`.
    pub fn parse(field: &FiniteField, s: &str) -> Result<Poly> {
        let compact = parse::compact(s);
        let compact = compact.as_str();
        let terms = parse::parse_sum(compact, 't').map_err(|e| reparent(e, s))?;
        let mut acc = Poly::zero(field);
        for term in terms {
            let c = match term.coeff {
                None => field.one(),
                Some(text) => field
                    .parse_elem(parse::strip_parens(text))
                    .map_err(|e| reparent(e, s))?,
            };
            let mut m = Poly::monomial(c, term.exp);
            if term.negated {
                m = m.neg();
            }
            acc = &acc + &m;
        }
        Ok(acc)
    }
}

fn reparent(e: Error, input: &str) -> Error {
    match e {
        Error::Parse { reason, .. } => Error::parse(input, reason),
        other => other,
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&Poly> for &Poly {
            type Output = Poly;
            fn $method(self, rhs: &Poly) -> Poly {
                self.$checked(rhs).expect("mixed-field operands")
            }
        }
        impl $tr<Poly> for Poly {
            type Output = Poly;
            fn $method(self, rhs: Poly) -> Poly {
                (&self).$checked(&rhs).expect("mixed-field operands")
            }
        }
    };
}

forward_binop!(Add, add, try_add);
forward_binop!(Sub, sub, try_sub);
forward_binop!(Mul, mul, try_mul);

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::neg(self)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str("+")?;
            }
            first = false;
            let coef: String = c.to_string_wrapped();
            match i {
                0 => f.write_str(&coef)?,
                _ => {
                    if !c.is_one() {
                        f.write_str(&coef)?;
                    }
                    f.write_str("t")?;
                    if i > 1 {
                        write!(f, "^{i}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A maximal ideal of `A`, named by its monic irreducible generator.
///
/// Ordered by degree, then by the index of the lower coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct PrimeIdeal {
    gen: Poly,
}

impl PrimeIdeal {
    pub fn new(gen: Poly) -> Result<Self> {
        if gen.is_monic() && gen.is_irreducible() {
            Ok(PrimeIdeal { gen })
        } else {
            Err(Error::NotPrimeIdeal(alloc::format!("{gen}")))
        }
    }

    pub fn parse(field: &FiniteField, s: &str) -> Result<Self> {
        Self::new(Poly::parse(field, s)?)
    }

    pub fn gen(&self) -> &Poly {
        &self.gen
    }

    pub fn degree(&self) -> usize {
        self.gen.degree().unwrap()
    }
}

impl Ord for PrimeIdeal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.gen.lower_index().cmp(&other.gen.lower_index()))
    }
}

impl PartialOrd for PrimeIdeal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PrimeIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.gen, f)
    }
}

impl fmt::Debug for PrimeIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.gen)
    }
}

/// `unit * prod gen^exp`, primes in canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub unit: FieldElem,
    pub factors: Vec<(PrimeIdeal, usize)>,
}

impl Factorization {
    pub fn product(&self) -> Poly {
        let mut acc = Poly::constant(self.unit.clone());
        for (p, e) in &self.factors {
            acc = &acc * &p.gen().pow(*e as u64);
        }
        acc
    }

    pub fn primes(&self) -> impl Iterator<Item = &PrimeIdeal> {
        self.factors.iter().map(|(p, _)| p)
    }

    /// Exponent of `p` (0 if absent).
    pub fn exponent(&self, p: &PrimeIdeal) -> usize {
        self.factors
            .iter()
            .find(|(f, _)| f == p)
            .map_or(0, |(_, e)| *e)
    }
}

/// Every monic irreducible of degree `<= bound`, ordered by degree and then index.
#[derive(Clone, Debug)]
pub struct PrimeStream {
    field: FiniteField,
    bound: usize,
    degree: usize,
    index: u64,
    count: u64,
}

impl PrimeStream {
    pub fn new(field: &FiniteField, bound: usize) -> Self {
        PrimeStream {
            field: field.clone(),
            bound,
            degree: 1,
            index: 0,
            count: field.order(),
        }
    }
}

impl Iterator for PrimeStream {
    type Item = PrimeIdeal;

    fn next(&mut self) -> Option<PrimeIdeal> {
        let q = self.field.order();
        while self.degree <= self.bound {
            while self.index < self.count {
                let idx = self.index;
                self.index += 1;
                // constant term zero only allowed for t itself
                if self.degree > 1 && idx.is_multiple_of(q) {
                    continue;
                }
                let cand = Poly::monic_from_index(&self.field, self.degree, idx);
                if cand.is_irreducible() {
                    return Some(PrimeIdeal { gen: cand });
                }
            }
            self.degree += 1;
            self.index = 0;
            self.count = q.checked_pow(self.degree as u32)?;
        }
        None
    }
}

/// Every monic irreducible of degree `<= bound`.
pub fn primes_of_degree_up_to(field: &FiniteField, bound: usize) -> PrimeStream {
    PrimeStream::new(field, bound)
}

/// The unique `r` with `deg r < sum deg m_i` and `r = r_i mod m_i` for all `i`.
pub fn crt(residues: &[(Poly, Poly)]) -> Result<Poly> {
    let (first_r, first_m) = residues
        .first()
        .ok_or_else(|| Error::InvalidInput("empty congruence system".into()))?;
    let mut x = first_r.rem(first_m)?;
    let mut modulus = first_m.clone();
    for (r, m) in &residues[1..] {
        let (g, s, _) = modulus.xgcd(m);
        if !g.is_one() {
            return Err(Error::NonCoprimeModuli);
        }
        // x' = x + modulus * s * (r - x)  (mod modulus * m)
        let diff = (r - &x).rem(m)?;
        let step = (&s * &diff).rem(m)?;
        let new_mod = &modulus * m;
        x = (&x + &(&modulus * &step)).rem(&new_mod)?;
        modulus = new_mod;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn f2() -> FiniteField {
        FiniteField::prime(2).unwrap()
    }
    fn f3() -> FiniteField {
        FiniteField::prime(3).unwrap()
    }
    fn p(f: &FiniteField, s: &str) -> Poly {
        Poly::parse(f, s).unwrap()
    }

    #[test]
    fn gcd_and_divmod_examples() {
        let f = f2();
        assert_eq!(p(&f, "t^2+t").gcd(&p(&f, "t")), p(&f, "t"));
        let (q, r) = p(&f, "t^3+t+1").divmod(&p(&f, "t^2+1")).unwrap();
        assert_eq!((q, r), (p(&f, "t"), p(&f, "1")));
        assert_eq!(p(&f, "t").divmod(&Poly::zero(&f)), Err(Error::DivisionByZero));
    }

    #[test]
    fn xgcd_example() {
        let f = f3();
        let a = p(&f, "t");
        let b = p(&f, "t+1");
        let (g, s, u) = a.xgcd(&b);
        assert!(g.is_one());
        assert_eq!(&(&s * &a) + &(&u * &b), g);
        assert_eq!((s, u), (p(&f, "-1"), p(&f, "1")));
    }

    #[test]
    fn factor_examples() {
        let f = f2();
        let fac = p(&f, "t^2+t").factor().unwrap();
        assert_eq!(
            fac.factors,
            vec![
                (PrimeIdeal::parse(&f, "t").unwrap(), 1),
                (PrimeIdeal::parse(&f, "t+1").unwrap(), 1)
            ]
        );
        let fac = p(&f, "t^2+t+1").factor().unwrap();
        assert_eq!(fac.factors, vec![(PrimeIdeal::parse(&f, "t^2+t+1").unwrap(), 1)]);
        let fac = p(&f, "t^4+t^2").factor().unwrap();
        assert_eq!(
            fac.factors,
            vec![
                (PrimeIdeal::parse(&f, "t").unwrap(), 2),
                (PrimeIdeal::parse(&f, "t+1").unwrap(), 2)
            ]
        );
        assert!(Poly::zero(&f).factor().is_err());
    }

    #[test]
    fn factor_is_seed_independent() {
        let f = FiniteField::new(3, 2).unwrap();
        let a = p(&f, "t^9+(u)t^4+2t^3+t+(u+1)");
        let fa = a.factor_with_seed(1).unwrap();
        assert_eq!(fa, a.factor_with_seed(99).unwrap());
        assert_eq!(fa.product(), a);
    }

    #[test]
    fn prime_stream_examples() {
        let f = f2();
        let d1: Vec<String> = primes_of_degree_up_to(&f, 1).map(|p| p.to_string()).collect();
        assert_eq!(d1, ["t", "t+1"]);
        let cubics: Vec<String> = primes_of_degree_up_to(&f, 3)
            .filter(|p| p.degree() == 3)
            .map(|p| p.to_string())
            .collect();
        assert_eq!(cubics, ["t^3+t+1", "t^3+t^2+1"]);
        let d1: Vec<String> = primes_of_degree_up_to(&f3(), 1).map(|p| p.to_string()).collect();
        assert_eq!(d1, ["t", "t+1", "t+2"]);
    }

    fn mobius(n: u64) -> i64 {
        let mut n = n;
        let mut result = 1;
        let mut d = 2;
        while d * d <= n {
            if n.is_multiple_of(d) {
                n /= d;
                if n.is_multiple_of(d) {
                    return 0;
                }
                result = -result;
            }
            d += 1;
        }
        if n > 1 {
            result = -result;
        }
        result
    }

    #[test]
    fn necklace_counts() {
        for q in [2u64, 3] {
            let f = FiniteField::prime(q).unwrap();
            let mut counts = [0i64; 7];
            for prime in primes_of_degree_up_to(&f, 6) {
                counts[prime.degree()] += 1;
            }
            for n in 1..=6u64 {
                let sum: i64 = (1..=n)
                    .filter(|d| n % d == 0)
                    .map(|d| mobius(d) * q.pow((n / d) as u32) as i64)
                    .sum();
                assert_eq!(counts[n as usize], sum / n as i64, "q={q} n={n}");
            }
        }
    }

    #[test]
    fn crt_examples() {
        let f = f2();
        let r = crt(&[(p(&f, "1"), p(&f, "t")), (p(&f, "0"), p(&f, "t+1"))]).unwrap();
        assert_eq!(r, p(&f, "t+1"));
        assert_eq!(crt(&[(p(&f, "0"), p(&f, "t"))]).unwrap(), Poly::zero(&f));
        let r = crt(&[(p(&f, "1"), p(&f, "t")), (p(&f, "1"), p(&f, "t+1"))]).unwrap();
        assert_eq!(r, p(&f, "1"));
        assert_eq!(
            crt(&[(p(&f, "1"), p(&f, "t")), (p(&f, "0"), p(&f, "t^2"))]),
            Err(Error::NonCoprimeModuli)
        );
    }

    #[test]
    fn roots_in_extension() {
        let f4 = FiniteField::new(2, 2).unwrap();
        let w = p(&f4, "t^2+t+1");
        let roots = w.roots();
        assert_eq!(roots.len(), 2);
        for r in roots {
            assert!(w.eval(&r).is_zero());
        }
    }

    #[test]
    fn parse_print_roundtrip() {
        let f = FiniteField::new(3, 2).unwrap();
        for s in ["t^3+t+1", "2t^2+(u+1)t+(2u)", "0", "(u)", "t"] {
            let a = p(&f, s);
            assert_eq!(p(&f, &a.to_string()), a);
        }
        assert_eq!(p(&f, "t - 1").to_string(), "t+2");
        assert!(Poly::parse(&f2(), "t^").is_err());
        assert!(Poly::parse(&f2(), "(t").is_err());
    }
}
