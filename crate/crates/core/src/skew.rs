//! The twisted polynomial ring `R{tau}` with `tau u = u^q tau`.
//!
//! Coefficients are either elements of a finite field (`R = F_{q^n}`) or
//! polynomials in `A = F_q[t]`. Both are described by the finite field they
//! live over; [`TwistCoeff`] abstracts the few ring operations needed.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::gf::{log_exact, Embedding, FieldElem, FiniteField, RelativeBasis};
use crate::linalg::Matrix;
use crate::parse;
use crate::poly::Poly;

/// A coefficient ring for [`SkewPoly`] on which the `p`-power Frobenius acts.
pub trait TwistCoeff: Clone + PartialEq + fmt::Display + fmt::Debug {
    /// Whether every nonzero element is invertible.
    const IS_FIELD: bool;

    /// The finite field the ring is built from: the field itself, or `F_q` for `A`.
    fn ring(&self) -> &FiniteField;
    fn zero_in(ring: &FiniteField) -> Self;
    fn one_in(ring: &FiniteField) -> Self;
    fn is_ring_zero(&self) -> bool;
    fn ring_add(&self, other: &Self) -> Self;
    fn ring_sub(&self, other: &Self) -> Self;
    fn ring_mul(&self, other: &Self) -> Self;
    fn ring_neg(&self) -> Self;
    fn unit_inverse(&self) -> Option<Self>;
    /// `x^(p^k)`.
    fn frobenius_power(&self, k: usize) -> Self;
    fn parse_in(ring: &FiniteField, s: &str) -> Result<Self>;
}

impl TwistCoeff for FieldElem {
    const IS_FIELD: bool = true;

    fn ring(&self) -> &FiniteField {
        self.field()
    }
    fn zero_in(ring: &FiniteField) -> Self {
        ring.zero()
    }
    fn one_in(ring: &FiniteField) -> Self {
        ring.one()
    }
    fn is_ring_zero(&self) -> bool {
        self.is_zero()
    }
    fn ring_add(&self, other: &Self) -> Self {
        self + other
    }
    fn ring_sub(&self, other: &Self) -> Self {
        self - other
    }
    fn ring_mul(&self, other: &Self) -> Self {
        self * other
    }
    fn ring_neg(&self) -> Self {
        FieldElem::neg(self)
    }
    fn unit_inverse(&self) -> Option<Self> {
        self.inv().ok()
    }
    fn frobenius_power(&self, k: usize) -> Self {
        FieldElem::frobenius_power(self, k)
    }
    fn parse_in(ring: &FiniteField, s: &str) -> Result<Self> {
        ring.parse_elem(s)
    }
}

impl TwistCoeff for Poly {
    const IS_FIELD: bool = false;

    fn ring(&self) -> &FiniteField {
        self.field()
    }
    fn zero_in(ring: &FiniteField) -> Self {
        Poly::zero(ring)
    }
    fn one_in(ring: &FiniteField) -> Self {
        Poly::one(ring)
    }
    fn is_ring_zero(&self) -> bool {
        self.is_zero()
    }
    fn ring_add(&self, other: &Self) -> Self {
        self + other
    }
    fn ring_sub(&self, other: &Self) -> Self {
        self - other
    }
    fn ring_mul(&self, other: &Self) -> Self {
        self * other
    }
    fn ring_neg(&self) -> Self {
        Poly::neg(self)
    }
    fn unit_inverse(&self) -> Option<Self> {
        match self.degree() {
            Some(0) => Some(Poly::constant(self.coeff(0).inv().ok()?)),
            _ => None,
        }
    }
    fn frobenius_power(&self, k: usize) -> Self {
        Poly::frobenius_power(self, k)
    }
    fn parse_in(ring: &FiniteField, s: &str) -> Result<Self> {
        Poly::parse(ring, s)
    }
}

/// `sum c_i tau^i` with `tau c = c^q tau`.
#[derive(Clone, PartialEq, Eq)]
pub struct SkewPoly<R> {
    ring: FiniteField,
    q: u64,
    /// `q = p^log_q`.
    log_q: usize,
    coeffs: Vec<R>,
}

impl<R: TwistCoeff> SkewPoly<R> {
    /// `q` must be a power of the characteristic of `ring`.
    pub fn new(ring: &FiniteField, q: u64, coeffs: Vec<R>) -> Result<Self> {
        let p = ring.characteristic();
        let log_q = log_exact(p, q).ok_or(Error::NotCharacteristicPower { p, q })?;
        if coeffs.iter().any(|c| c.ring() != ring) {
            return Err(Error::MixedRings);
        }
        Ok(Self::from_parts(ring, q, log_q, coeffs))
    }

    fn from_parts(ring: &FiniteField, q: u64, log_q: usize, mut coeffs: Vec<R>) -> Self {
        while coeffs.last().is_some_and(R::is_ring_zero) {
            coeffs.pop();
        }
        SkewPoly {
            ring: ring.clone(),
            q,
            log_q,
            coeffs,
        }
    }

    fn same_kind(&self, coeffs: Vec<R>) -> Self {
        Self::from_parts(&self.ring, self.q, self.log_q, coeffs)
    }

    pub fn zero(ring: &FiniteField, q: u64) -> Result<Self> {
        Self::new(ring, q, Vec::new())
    }

    pub fn constant(c: R, q: u64) -> Result<Self> {
        let ring = c.ring().clone();
        Self::new(&ring, q, vec![c])
    }

    /// `tau^k`.
    pub fn tau_power(ring: &FiniteField, q: u64, k: usize) -> Result<Self> {
        let mut coeffs = vec![R::zero_in(ring); k];
        coeffs.push(R::one_in(ring));
        Self::new(ring, q, coeffs)
    }

    pub fn ring(&self) -> &FiniteField {
        &self.ring
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn coeffs(&self) -> &[R] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> R {
        self.coeffs
            .get(i)
            .cloned()
            .unwrap_or_else(|| R::zero_in(&self.ring))
    }

    /// The `tau`-degree; `None` for zero.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Option<&R> {
        self.coeffs.last()
    }

    /// Smallest `i` with `c_i != 0`.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_ring_zero())
    }

    /// `c^(q^i)`.
    pub fn twist(&self, c: &R, i: usize) -> R {
        c.frobenius_power(self.log_q * i)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.ring == other.ring && self.q == other.q {
            Ok(())
        } else {
            Err(Error::MixedRings)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let n = self.coeffs.len().max(other.coeffs.len());
        Ok(self.same_kind((0..n).map(|i| self.coeff(i).ring_add(&other.coeff(i))).collect()))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let n = self.coeffs.len().max(other.coeffs.len());
        Ok(self.same_kind((0..n).map(|i| self.coeff(i).ring_sub(&other.coeff(i))).collect()))
    }

    pub fn neg(&self) -> Self {
        self.same_kind(self.coeffs.iter().map(R::ring_neg).collect())
    }

    /// `c * self`.
    pub fn scale_left(&self, c: &R) -> Self {
        self.same_kind(self.coeffs.iter().map(|x| c.ring_mul(x)).collect())
    }

    /// `f g` with `(a tau^i)(b tau^j) = a b^(q^i) tau^(i+j)`.
    pub fn skew_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(self.same_kind(Vec::new()));
        }
        let mut out = vec![R::zero_in(&self.ring); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_ring_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_ring_zero() {
                    continue;
                }
                out[i + j] = out[i + j].ring_add(&a.ring_mul(&self.twist(b, i)));
            }
        }
        Ok(self.same_kind(out))
    }

    /// `(s, r)` with `self = s g + r` and `deg r < deg g`.
    pub fn right_divmod(&self, g: &Self) -> Result<(Self, Self)> {
        self.check(g)?;
        let dg = g.degree().ok_or(Error::DivisionByZero)?;
        let lead = g.leading().unwrap();
        if lead.unit_inverse().is_none() {
            return Err(Error::NotRightDivisible(format!(
                "leading coefficient {lead} of {g} is not a unit"
            )));
        }
        let mut s = vec![R::zero_in(&self.ring); self.coeffs.len().saturating_sub(dg)];
        let mut r = self.clone();
        while let Some(dr) = r.degree().filter(|&d| d >= dg) {
            let k = dr - dg;
            let inv = self.twist(lead, k).unit_inverse().expect("twist of a unit");
            let c = r.leading().unwrap().ring_mul(&inv);
            let mut shift = vec![R::zero_in(&self.ring); k];
            shift.push(c.clone());
            let term = self.same_kind(shift).skew_mul(g)?;
            r = r.try_sub(&term)?;
            // exact cancellation of the top coefficient keeps the loop finite
            debug_assert!(r.degree().is_none_or(|d| d < dr));
            s[k] = c;
        }
        let s = self.same_kind(s);
        debug_assert_eq!(s.skew_mul(g)?.try_add(&r)?, *self);
        Ok((s, r))
    }

    /// Scales to leading coefficient 1 (fields only).
    pub fn monic(&self) -> Result<Self> {
        match self.leading() {
            None => Ok(self.clone()),
            Some(l) => {
                let inv = l.unit_inverse().ok_or_else(|| {
                    Error::Unsupported(format!("cannot normalise {self}: leading coefficient not a unit"))
                })?;
                Ok(self.scale_left(&inv))
            }
        }
    }

    /// Monic right gcd by the Euclidean chain of right divisions.
    pub fn rgcd(&self, other: &Self) -> Result<Self> {
        if !R::IS_FIELD {
            return Err(Error::Unsupported(
                "right gcd needs field coefficients".into(),
            ));
        }
        self.check(other)?;
        if self.is_zero() && other.is_zero() {
            return Err(Error::InvalidInput("right gcd of two zero polynomials".into()));
        }
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.right_divmod(&b)?;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `sum c_i x^(q^i)`.
    pub fn additive_eval(&self, x: &R) -> R {
        let mut acc = R::zero_in(x.ring());
        let mut pow = x.clone();
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                pow = pow.frobenius_power(self.log_q);
            }
            if !c.is_ring_zero() {
                acc = acc.ring_add(&c.ring_mul(&pow));
            }
        }
        acc
    }

    /// Applies `f` to every coefficient, landing in `SkewPoly<S>` over `ring`.
    pub fn map<S: TwistCoeff>(&self, ring: &FiniteField, f: impl Fn(&R) -> S) -> Result<SkewPoly<S>> {
        SkewPoly::new(ring, self.q, self.coeffs.iter().map(f).collect())
    }

    pub fn parse(ring: &FiniteField, q: u64, s: &str) -> Result<Self> {
        let compact = parse::compact(s);
        let compact = compact.as_str();
        let terms = parse::parse_sum(compact, 'T')?;
        let mut coeffs: Vec<R> = Vec::new();
        for term in terms {
            let c = match term.coeff {
                None => R::one_in(ring),
                Some(text) => R::parse_in(ring, parse::strip_parens(text))?,
            };
            let c = if term.negated { c.ring_neg() } else { c };
            if coeffs.len() <= term.exp {
                coeffs.resize(term.exp + 1, R::zero_in(ring));
            }
            coeffs[term.exp] = coeffs[term.exp].ring_add(&c);
        }
        Self::new(ring, q, coeffs)
    }
}

impl SkewPoly<FieldElem> {
    pub fn map_coeffs(&self, emb: &Embedding) -> Result<Self> {
        self.map(emb.target(), |c| emb.apply(c))
    }

    /// Matrix over the base of `basis` of `x -> f(x)` on `basis.field()`;
    /// column `j` holds the coordinates of `f(b_j)`.
    pub fn operator_matrix(&self, basis: &RelativeBasis) -> Result<Matrix> {
        if self.ring != *basis.field() {
            return Err(Error::CoefficientOutsideField);
        }
        let n = basis.dim();
        let cols: Vec<_> = basis
            .basis()
            .iter()
            .map(|b| basis.coords(&self.additive_eval(b)))
            .collect();
        Matrix::from_columns(basis.base(), n, &cols)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl<R: TwistCoeff> $tr<&SkewPoly<R>> for &SkewPoly<R> {
            type Output = SkewPoly<R>;
            fn $method(self, rhs: &SkewPoly<R>) -> SkewPoly<R> {
                self.$checked(rhs).expect("mixed-ring operands")
            }
        }
    };
}

forward_binop!(Add, add, try_add);
forward_binop!(Sub, sub, try_sub);
forward_binop!(Mul, mul, skew_mul);

fn coeff_text<R: fmt::Display>(c: &R) -> String {
    let s = c.to_string();
    if s.contains(['+', '-']) {
        format!("({s})")
    } else {
        s
    }
}

impl<R: TwistCoeff> fmt::Display for SkewPoly<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_ring_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let one = *c == R::one_in(&self.ring);
            match i {
                0 => write!(f, "{c}")?,
                _ => {
                    if !one {
                        write!(f, "{}*", coeff_text(c))?;
                    }
                    f.write_str("T")?;
                    if i > 1 {
                        write!(f, "^{i}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl<R: TwistCoeff> fmt::Debug for SkewPoly<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f4() -> FiniteField {
        FiniteField::new(2, 2).unwrap()
    }

    fn sk(f: &FiniteField, q: u64, s: &str) -> SkewPoly<FieldElem> {
        SkewPoly::parse(f, q, s).unwrap()
    }

    fn ska(f: &FiniteField, s: &str) -> SkewPoly<Poly> {
        SkewPoly::parse(f, f.order(), s).unwrap()
    }

    #[test]
    fn commutation_rule() {
        let f = f4();
        let tau = sk(&f, 2, "T");
        let u = sk(&f, 2, "u");
        assert_eq!(&tau * &u, sk(&f, 2, "(u+1)*T"));
    }

    #[test]
    fn carlitz_square_over_a() {
        let f2 = FiniteField::prime(2).unwrap();
        let phi = ska(&f2, "t + T");
        let sq = &phi * &phi;
        assert_eq!(sq, ska(&f2, "t^2 + (t^2+t)*T + T^2"));
        assert_eq!(sq.to_string(), "t^2 + (t^2+t)*T + T^2");
        let one = SkewPoly::constant(Poly::one(&f2), 2).unwrap();
        assert_eq!(&phi * &one, phi);
    }

    #[test]
    fn right_division_examples() {
        let f = f4();
        let (s, r) = sk(&f, 2, "T^2").right_divmod(&sk(&f, 2, "T + u")).unwrap();
        assert_eq!((s, r), (sk(&f, 2, "T + (u+1)"), sk(&f, 2, "1")));
        let g = sk(&f, 2, "u + T + (u+1)*T^3");
        let (s, r) = g.right_divmod(&sk(&f, 2, "T")).unwrap();
        assert_eq!((s, r), (sk(&f, 2, "1 + (u+1)*T^2"), sk(&f, 2, "u")));
        let (s, r) = g.right_divmod(&g).unwrap();
        assert_eq!((s, r), (sk(&f, 2, "1"), sk(&f, 2, "0")));
    }

    #[test]
    fn right_division_over_a_needs_unit_leading_coefficient() {
        let f2 = FiniteField::prime(2).unwrap();
        let f = ska(&f2, "T^3");
        let err = f.right_divmod(&ska(&f2, "t + t*T")).unwrap_err();
        assert!(matches!(err, Error::NotRightDivisible(_)));
        assert!(f.right_divmod(&ska(&f2, "t + T")).is_ok());
    }

    #[test]
    fn rgcd_examples() {
        let f = f4();
        let g = sk(&f, 2, "T + u");
        assert_eq!(sk(&f, 2, "T^2 + 1").rgcd(&g).unwrap(), g);
        let h = sk(&f, 2, "u*T^2 + 1");
        assert_eq!(h.rgcd(&sk(&f, 2, "0")).unwrap(), h.monic().unwrap());
        let tau = sk(&f, 2, "T");
        assert_eq!(tau.rgcd(&tau).unwrap(), tau);
        let f2 = FiniteField::prime(2).unwrap();
        assert!(matches!(ska(&f2, "T").rgcd(&ska(&f2, "T")), Err(Error::Unsupported(_))));
    }

    #[test]
    fn additive_eval_examples() {
        let f2 = FiniteField::prime(2).unwrap();
        let phi = ska(&f2, "t + T");
        let t = Poly::t(&f2);
        assert!(phi.additive_eval(&t).is_zero());
        assert!(phi.additive_eval(&Poly::zero(&f2)).is_zero());
        let f = f4();
        let u = f.generator().unwrap();
        assert_eq!(sk(&f, 2, "T").additive_eval(&u), f.parse_elem("u+1").unwrap());
    }

    #[test]
    fn operator_matrix_examples() {
        let f = f4();
        let f2 = f.prime_subfield();
        let basis = RelativeBasis::new(Embedding::prime_subfield(&f)).unwrap();
        let m = sk(&f, 2, "T").operator_matrix(&basis).unwrap();
        let e = |x: i64| FieldElem::from_int(&f2, x);
        assert_eq!(
            m,
            Matrix::from_rows(&f2, vec![vec![e(1), e(1)], vec![e(0), e(1)]]).unwrap()
        );
        assert_eq!(sk(&f, 2, "1").operator_matrix(&basis).unwrap(), Matrix::identity(&f2, 2));
        assert_eq!(sk(&f, 2, "0").operator_matrix(&basis).unwrap(), Matrix::zero(&f2, 2, 2));
        let other = FiniteField::new(2, 3).unwrap();
        assert!(sk(&other, 2, "T").operator_matrix(&basis).is_err());
    }

    #[test]
    fn text_round_trip() {
        let f = FiniteField::new(3, 2).unwrap();
        for s in ["0", "u", "T", "2 + (u+1)*T^2", "(2u)*T + T^3"] {
            let a = sk(&f, 3, s);
            assert_eq!(sk(&f, 3, &a.to_string()), a);
        }
        let f3 = FiniteField::prime(3).unwrap();
        let a = ska(&f3, "t^2 + (t^2+2t)*T + 2*T^2");
        assert_eq!(a.to_string(), "t^2 + (t^2+2t)*T + 2*T^2");
        assert_eq!(ska(&f3, &a.to_string()), a);
    }

    fn field_for(q: u64) -> FiniteField {
        match q {
            4 => FiniteField::new(2, 2).unwrap(),
            p => FiniteField::prime(p).unwrap(),
        }
    }

    fn arb_skew(q: u64, deg: usize) -> impl Strategy<Value = SkewPoly<FieldElem>> {
        // coefficients in F_{q^2} so that the twist is nontrivial
        let big = FiniteField::new(field_for(q).characteristic(), field_for(q).degree() * 2).unwrap();
        let order = big.order();
        proptest::collection::vec(0..order, 0..=deg + 1).prop_map(move |idx| {
            let coeffs = idx.iter().map(|&i| FieldElem::from_index(&big, i)).collect();
            SkewPoly::new(&big, q, coeffs).unwrap()
        })
    }

    fn arb_triple() -> impl Strategy<Value = [SkewPoly<FieldElem>; 3]> {
        prop_oneof![Just(2u64), Just(3), Just(4)].prop_flat_map(|q| {
            (arb_skew(q, 6), arb_skew(q, 6), arb_skew(q, 6)).prop_map(|(a, b, c)| [a, b, c])
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn ring_axioms([a, b, c] in arb_triple()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
            if !b.is_zero() {
                let (s, r) = a.right_divmod(&b).unwrap();
                prop_assert_eq!(&(&s * &b) + &r, a.clone());
                prop_assert!(r.degree() < b.degree());
            }
        }
    }

    proptest! {
        #[test]
        fn evaluation_is_linear_and_matches_operator(
            [f, g, _] in arb_triple(),
            xi in 0u64..4096, yi in 0u64..4096, ci in 0u64..4
        ) {
            let k = f.ring().clone();
            let q = f.q();
            let base = field_for(q);
            let x = FieldElem::from_index(&k, xi % k.order());
            let y = FieldElem::from_index(&k, yi % k.order());
            prop_assert_eq!(f.additive_eval(&(&x + &y)), &f.additive_eval(&x) + &f.additive_eval(&y));
            let (big, emb) = crate::gf::extend(&base, 2).unwrap();
            prop_assert_eq!(&big, &k);
            let c = emb.apply(&FieldElem::from_index(&base, ci % base.order()));
            prop_assert_eq!(f.additive_eval(&(&c * &x)), &c * &f.additive_eval(&x));
            let basis = RelativeBasis::new(emb).unwrap();
            let mf = f.operator_matrix(&basis).unwrap();
            let mg = g.operator_matrix(&basis).unwrap();
            prop_assert_eq!((&f * &g).operator_matrix(&basis).unwrap(), mf.mul(&mg).unwrap());
            let v = basis.coords(&x);
            prop_assert_eq!(mf.mul_vec(&v).unwrap(), basis.coords(&f.additive_eval(&x)));
        }
    }
}
