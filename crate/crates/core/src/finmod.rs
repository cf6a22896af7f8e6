//! Finite `A`-modules `phi^W(k)` realised by the `F_q`-linear operator of `phi_t`.
//!
//! A point is its coordinate vector over `F_q`. Product modules are block
//! diagonal: a point of `phi_1 x ... x phi_s` concatenates the coordinates of
//! its components.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::drinfeld::FiniteDrinfeldModule;
use crate::error::{Error, Result};
use crate::gf::{Embedding, FieldElem, FiniteField};
use crate::linalg::{Echelon, Matrix, Vector};
use crate::poly::{Poly, PrimeIdeal};
use crate::snf;

#[derive(Clone, Debug)]
pub struct OperatorModule {
    base: FiniteField,
    components: Vec<FiniteDrinfeldModule>,
    op: Matrix,
}

impl OperatorModule {
    pub fn new(module: &FiniteDrinfeldModule) -> Self {
        OperatorModule {
            base: module.base().clone(),
            op: module.operator(),
            components: vec![module.clone()],
        }
    }

    /// `phi_1 x ... x phi_s` over one residue carrier.
    pub fn product(components: Vec<FiniteDrinfeldModule>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidInput("empty product module".into()))?;
        let same = |m: &FiniteDrinfeldModule| {
            m.field() == first.field()
                && m.characteristic() == first.characteristic()
                && m.theta() == first.theta()
        };
        if !components.iter().all(same) {
            return Err(Error::MixedRings);
        }
        let blocks: Vec<Matrix> = components.iter().map(FiniteDrinfeldModule::operator).collect();
        Ok(OperatorModule {
            base: first.base().clone(),
            op: Matrix::block_diag(first.base(), &blocks),
            components,
        })
    }

    /// A bare operator module without a Drinfeld structure behind it.
    pub fn from_operator(op: Matrix) -> Result<Self> {
        if !op.is_square() || op.rows() == 0 {
            return Err(Error::Dimension("operator must be square and nonempty".into()));
        }
        Ok(OperatorModule {
            base: op.field().clone(),
            components: Vec::new(),
            op,
        })
    }

    pub fn base(&self) -> &FiniteField {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.op.rows()
    }

    pub fn operator(&self) -> &Matrix {
        &self.op
    }

    pub fn components(&self) -> &[FiniteDrinfeldModule] {
        &self.components
    }

    /// Sum of the ranks of the components.
    pub fn rank(&self) -> usize {
        self.components.iter().map(FiniteDrinfeldModule::rank).sum()
    }

    pub fn zero(&self) -> Vector {
        vec![self.base.zero(); self.dim()]
    }

    /// Coordinates of the point with the given component values.
    pub fn point(&self, elems: &[FieldElem]) -> Result<Vector> {
        if elems.len() != self.components.len() {
            return Err(Error::Dimension(format!(
                "expected {} components, got {}",
                self.components.len(),
                elems.len()
            )));
        }
        let mut v = Vec::with_capacity(self.dim());
        for (m, x) in self.components.iter().zip(elems) {
            if x.field() != m.field() {
                return Err(Error::CoefficientOutsideField);
            }
            v.extend(m.carrier().coords(x));
        }
        Ok(v)
    }

    /// Reduction of a global point with one polynomial per component.
    pub fn reduce_point(&self, xs: &[Poly]) -> Result<Vector> {
        let elems: Vec<FieldElem> = self
            .components
            .iter()
            .zip(xs)
            .map(|(m, x)| m.carrier().reduce(x))
            .collect();
        self.point(&elems)
    }

    pub fn component_values(&self, v: &[FieldElem]) -> Vec<FieldElem> {
        let mut out = Vec::with_capacity(self.components.len());
        let mut off = 0;
        for m in &self.components {
            let n = m.carrier().dim();
            out.push(m.carrier().element(&v[off..off + n]));
            off += n;
        }
        out
    }

    pub fn apply_t(&self, v: &[FieldElem]) -> Vector {
        self.op.mul_vec(v).expect("point dimension")
    }

    /// `a(T) v`.
    pub fn act(&self, a: &Poly, v: &[FieldElem]) -> Vector {
        self.op.poly_apply(a, v).expect("point dimension")
    }

    pub fn structure(&self) -> InvariantFactors {
        InvariantFactors {
            factors: snf::invariant_factors(&self.op),
        }
    }

    /// Monic generator of the annihilator of `v`.
    pub fn order(&self, v: &[FieldElem]) -> Poly {
        let mut ech = Echelon::new(&self.base, self.dim());
        let mut cur = v.to_vec();
        loop {
            if let Some(combo) = ech.insert(&cur) {
                let mut c: Vec<FieldElem> = combo.iter().map(FieldElem::neg).collect();
                c.push(self.base.one());
                return Poly::from_coeffs(&self.base, c);
            }
            cur = self.apply_t(&cur);
        }
    }

    pub fn submodule(&self, gens: &[Vector]) -> Submodule {
        Submodule::generate(self, gens)
    }

    /// `x` lies in the `A`-span of `gens`.
    pub fn member(&self, x: &[FieldElem], gens: &[Vector]) -> bool {
        self.submodule(gens).contains(x)
    }

    /// `F_q`-basis of `ker a(T)`.
    pub fn torsion_kernel(&self, a: &Poly) -> Result<Vec<Vector>> {
        if a.is_zero() {
            return Err(Error::InvalidInput("torsion kernel of the zero polynomial".into()));
        }
        Ok(self.op.poly_eval(a)?.nullspace())
    }

    /// The `P`-primary component of `v` and its `pi_P`-order.
    pub fn primary_decomposition(&self, v: &[FieldElem], p: &PrimeIdeal) -> (Vector, usize) {
        let ord = self.order(v);
        let mut k = 0;
        let mut rest = ord.clone();
        while let Some(q) = rest.div_exact(p.gen()) {
            rest = q;
            k += 1;
        }
        if k == 0 {
            return (self.zero(), 0);
        }
        let pk = p.gen().pow(k as u64);
        let (g, s, _) = rest.xgcd(&pk);
        debug_assert!(g.is_one());
        let idem = &s * &rest;
        (self.act(&idem, v), k)
    }

    pub fn primary_part(&self, v: &[FieldElem], p: &PrimeIdeal) -> Vector {
        self.primary_decomposition(v, p).0
    }

    pub fn pi_order(&self, v: &[FieldElem], p: &PrimeIdeal) -> usize {
        self.primary_decomposition(v, p).1
    }

    /// The same product module over the degree-`n` extension of the carrier,
    /// with the embedding of the old carrier field.
    pub fn extend(&self, n: usize) -> Result<(OperatorModule, Embedding)> {
        if self.components.is_empty() {
            return Err(Error::Unsupported("extension of a bare operator module".into()));
        }
        if n == 1 {
            let id = Embedding::identity(self.components[0].field());
            return Ok((self.clone(), id));
        }
        let mut comps = Vec::with_capacity(self.components.len());
        let mut emb = None;
        for m in &self.components {
            let (ext, up) = m.extend(n)?;
            emb.get_or_insert(up);
            comps.push(ext);
        }
        Ok((OperatorModule::product(comps)?, emb.unwrap()))
    }

    /// Image of `v` in an extension produced by [`OperatorModule::extend`].
    pub fn embed_point(&self, ext: &OperatorModule, up: &Embedding, v: &[FieldElem]) -> Result<Vector> {
        let vals: Vec<FieldElem> = self.component_values(v).iter().map(|x| up.apply(x)).collect();
        ext.point(&vals)
    }

    /// Least `n <= cap` such that `phi[B]` over the degree-`n` extension has
    /// full `A/B`-rank.
    pub fn torsion_field_degree(&self, b: &PrimeIdeal, cap: usize) -> Result<TorsionFieldDegree> {
        if self.components.is_empty() {
            return Err(Error::Unsupported("torsion field of a bare operator module".into()));
        }
        if self.components.iter().any(|m| m.characteristic() == b) {
            return Err(Error::InvalidInput(format!(
                "{b} is the characteristic; its torsion never has full rank"
            )));
        }
        if cap == 0 {
            return Err(Error::InvalidInput("cap must be at least 1".into()));
        }
        let target = self.rank() * b.degree();
        for n in 1..=cap {
            let (ext, _) = self.extend(n)?;
            if ext.torsion_kernel(b.gen())?.len() == target {
                return Ok(TorsionFieldDegree::Degree(n));
            }
        }
        Ok(TorsionFieldDegree::CapExceeded(cap))
    }

    /// Every point, in index order. Only for small modules.
    pub fn points(&self) -> impl Iterator<Item = Vector> + '_ {
        let q = self.base.order();
        let n = self.dim();
        (0..q.pow(n as u32)).map(move |mut idx| {
            (0..n)
                .map(|_| {
                    let c = FieldElem::from_index(&self.base, idx % q);
                    idx /= q;
                    c
                })
                .collect()
        })
    }
}

/// Result of [`OperatorModule::torsion_field_degree`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TorsionFieldDegree {
    Degree(usize),
    CapExceeded(usize),
}

/// The chain `f_1 | ... | f_r` with the module `= A/(f_1) + ... + A/(f_r)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantFactors {
    pub factors: Vec<Poly>,
}

impl InvariantFactors {
    /// Largest factor (1 for the zero module).
    pub fn exponent(&self) -> Option<&Poly> {
        self.factors.last()
    }

    pub fn product(&self, field: &FiniteField) -> Poly {
        self.factors.iter().fold(Poly::one(field), |acc, f| &acc * f)
    }

    pub fn is_cyclic(&self) -> bool {
        self.factors.len() <= 1
    }
}

impl fmt::Display for InvariantFactors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, p) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("]")
    }
}

/// The `A`-submodule generated by a list of points.
///
/// Built by running the Krylov chain `g_j, T g_j, T^2 g_j, ...` of each
/// generator in turn until it falls into the span so far. The chain that
/// stops for `g_j` yields a relation `sum_{i<=j} b_i g_i = 0` with `b_j` monic
/// of least degree, i.e. the order of `g_j` modulo the earlier generators.
#[derive(Clone, Debug)]
pub struct Submodule {
    base: FiniteField,
    echelon: Echelon,
    basis: Vec<Vector>,
    /// `(generator, power)` for each basis vector.
    labels: Vec<(usize, usize)>,
    relations: Vec<Vec<Poly>>,
    generators: usize,
}

impl Submodule {
    pub fn generate(module: &OperatorModule, gens: &[Vector]) -> Self {
        let base = module.base().clone();
        let mut s = Submodule {
            echelon: Echelon::new(&base, module.dim()),
            base,
            basis: Vec::new(),
            labels: Vec::new(),
            relations: Vec::new(),
            generators: 0,
        };
        for g in gens {
            s.add_generator(module, g);
        }
        s
    }

    fn add_generator(&mut self, module: &OperatorModule, g: &[FieldElem]) {
        let j = self.generators;
        self.generators += 1;
        let mut cur = g.to_vec();
        let mut k = 0;
        loop {
            match self.echelon.insert(&cur) {
                None => {
                    self.basis.push(cur.clone());
                    self.labels.push((j, k));
                    cur = module.apply_t(&cur);
                    k += 1;
                }
                Some(combo) => {
                    let mut rel = self.combo_to_polys(&combo);
                    rel[j] = &Poly::monomial(self.base.one(), k) - &rel[j];
                    for r in rel.iter_mut().take(j) {
                        *r = r.neg();
                    }
                    self.relations.push(rel);
                    return;
                }
            }
        }
    }

    fn combo_to_polys(&self, combo: &[FieldElem]) -> Vec<Poly> {
        let mut coeffs: Vec<Vec<FieldElem>> = vec![Vec::new(); self.generators];
        for (c, &(j, k)) in combo.iter().zip(&self.labels) {
            let row = &mut coeffs[j];
            if row.len() <= k {
                row.resize(k + 1, self.base.zero());
            }
            row[k] = &row[k] + c;
        }
        coeffs
            .into_iter()
            .map(|c| Poly::from_coeffs(&self.base, c))
            .collect()
    }

    /// `F_q`-dimension.
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// `F_q`-basis: Krylov vectors of the generators.
    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    pub fn contains(&self, v: &[FieldElem]) -> bool {
        self.echelon.contains(v)
    }

    /// `a_j` with `v = sum a_j g_j`, if `v` lies in the submodule.
    pub fn express(&self, v: &[FieldElem]) -> Option<Vec<Poly>> {
        self.echelon.express(v).map(|c| self.combo_to_polys(&c))
    }

    /// For generator `j`: `b_0, ..., b_j` with `sum b_i g_i = 0` and `b_j`
    /// the monic order of `g_j` modulo `g_0, ..., g_(j-1)`.
    pub fn relation(&self, j: usize) -> &[Poly] {
        &self.relations[j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drinfeld::DrinfeldModule;
    use crate::poly::primes_of_degree_up_to;
    use proptest::prelude::*;

    fn f2() -> FiniteField {
        FiniteField::prime(2).unwrap()
    }
    fn p(f: &FiniteField, s: &str) -> Poly {
        Poly::parse(f, s).unwrap()
    }
    fn prime(f: &FiniteField, s: &str) -> PrimeIdeal {
        PrimeIdeal::parse(f, s).unwrap()
    }

    fn carlitz_at(s: &str) -> (OperatorModule, FiniteDrinfeldModule) {
        let f = f2();
        let m = DrinfeldModule::carlitz(&f).reduce_at(&prime(&f, s)).unwrap();
        (OperatorModule::new(&m), m)
    }

    fn pt(om: &OperatorModule, m: &FiniteDrinfeldModule, s: &str) -> Vector {
        om.point(&[m.field().parse_elem(s).unwrap()]).unwrap()
    }

    #[test]
    fn structure_examples() {
        let (om, _) = carlitz_at("t^2+t+1");
        assert_eq!(om.structure().factors, vec![p(&f2(), "t^2+t")]);
        let (om, _) = carlitz_at("t");
        assert_eq!(om.structure().factors, vec![p(&f2(), "t+1")]);
    }

    #[test]
    fn order_examples() {
        let (om, m) = carlitz_at("t^2+t+1");
        let f = f2();
        assert_eq!(om.order(&pt(&om, &m, "1")), p(&f, "t^2+t"));
        assert_eq!(om.order(&om.zero()), p(&f, "1"));
        assert_eq!(om.order(&pt(&om, &m, "u")), p(&f, "t"));
    }

    #[test]
    fn submodule_examples() {
        let (om, m) = carlitz_at("t^2+t+1");
        let u = pt(&om, &m, "u");
        let one = pt(&om, &m, "1");
        let s = om.submodule(core::slice::from_ref(&u));
        assert_eq!(s.basis(), core::slice::from_ref(&u));
        assert_eq!(om.submodule(&[]).rank(), 0);
        let s = om.submodule(core::slice::from_ref(&one));
        assert_eq!(s.basis(), &[one.clone(), pt(&om, &m, "u+1")]);
        assert!(!om.member(&one, core::slice::from_ref(&u)));
        assert!(om.member(&om.zero(), core::slice::from_ref(&u)));
        assert!(om.member(&u, core::slice::from_ref(&one)));
        let coeffs = om.submodule(core::slice::from_ref(&one)).express(&u).unwrap();
        assert_eq!(om.act(&coeffs[0], &one), u);
    }

    #[test]
    fn relations_record_relative_orders() {
        let (om, m) = carlitz_at("t^2+t+1");
        let u = pt(&om, &m, "u");
        let one = pt(&om, &m, "1");
        let s = om.submodule(&[u.clone(), one.clone()]);
        let f = f2();
        assert_eq!(s.relation(0), &[p(&f, "t")]);
        let rel = s.relation(1);
        // order of 1 modulo A u is t + 1: (t+1).1 = u
        assert_eq!(rel[1], p(&f, "t+1"));
        let sum = &om.act(&rel[0], &u);
        let total: Vector = sum.iter().zip(om.act(&rel[1], &one)).map(|(a, b)| a + &b).collect();
        assert_eq!(total, om.zero());
    }

    #[test]
    fn torsion_kernel_examples() {
        let f = f2();
        let (om, m) = carlitz_at("t^2+t+1");
        let ker = om.torsion_kernel(&p(&f, "t")).unwrap();
        assert_eq!(ker, vec![pt(&om, &m, "u")]);
        assert!(om.torsion_kernel(&p(&f, "1")).unwrap().is_empty());
        let (om0, _) = carlitz_at("t");
        assert!(om0.torsion_kernel(&p(&f, "t")).unwrap().is_empty());
        assert!(om.torsion_kernel(&Poly::zero(&f)).is_err());
    }

    #[test]
    fn primary_examples() {
        let f = f2();
        let (om, m) = carlitz_at("t^2+t+1");
        let one = pt(&om, &m, "1");
        assert_eq!(om.pi_order(&one, &prime(&f, "t")), 1);
        assert_eq!(om.pi_order(&om.zero(), &prime(&f, "t")), 0);
        assert_eq!(om.pi_order(&one, &prime(&f, "t^2+t+1")), 0);
        // the t-primary part of 1 is (t+1).1 = u
        assert_eq!(om.primary_part(&one, &prime(&f, "t")), pt(&om, &m, "u"));
    }

    #[test]
    fn extension_examples() {
        let f = f2();
        let (om, _) = carlitz_at("t^2+t+1");
        let (same, emb) = om.extend(1).unwrap();
        assert!(emb.is_identity());
        assert_eq!(same.operator(), om.operator());
        let (big, _) = om.extend(3).unwrap();
        assert_eq!(big.dim(), 6);
        for w in primes_of_degree_up_to(&f, 3) {
            let r = DrinfeldModule::carlitz(&f).reduce_at(&w).unwrap();
            let om = OperatorModule::new(&r);
            let b = prime(&f, "t");
            if *r.characteristic() == b {
                assert!(om.torsion_field_degree(&b, 4).is_err());
                continue;
            }
            let n = om.torsion_field_degree(&b, 4).unwrap();
            assert!(matches!(n, TorsionFieldDegree::Degree(1) | TorsionFieldDegree::Degree(2)));
        }
    }

    /// Brute-force annihilator through direct skew evaluation in the field.
    fn eval_order(m: &FiniteDrinfeldModule, x: &FieldElem) -> Poly {
        let f = m.base();
        for d in 0.. {
            for i in 0..f.order().pow(d as u32) {
                let a = Poly::monic_from_index(f, d, i);
                if m.phi_of(&a).additive_eval(x).is_zero() {
                    return a;
                }
            }
        }
        unreachable!()
    }

    #[test]
    fn operator_orders_match_skew_evaluation() {
        for q in [2u64, 3] {
            let f = FiniteField::prime(q).unwrap();
            let modules = [
                DrinfeldModule::carlitz(&f),
                DrinfeldModule::parse(&f, &["t", "1", "1"]).unwrap(),
            ];
            for dm in &modules {
                for w in primes_of_degree_up_to(&f, if q == 2 { 4 } else { 2 }) {
                    let r = dm.reduce_at(&w).unwrap();
                    let om = OperatorModule::new(&r);
                    for x in r.field().elements() {
                        let v = om.point(core::slice::from_ref(&x)).unwrap();
                        assert_eq!(om.order(&v), eval_order(&r, &x), "{dm} at {w}, x = {x}");
                    }
                }
            }
        }
    }

    #[test]
    fn carlitz_structure_is_p_minus_one() {
        for (q, bound) in [(2u64, 5usize), (3, 4)] {
            let f = FiniteField::prime(q).unwrap();
            let c = DrinfeldModule::carlitz(&f);
            for w in primes_of_degree_up_to(&f, bound) {
                let r = c.reduce_at(&w).unwrap();
                let om = OperatorModule::new(&r);
                let target = w.gen() - &Poly::one(&f);
                assert_eq!(om.structure().factors, vec![target.clone()], "W = {w}");
                let phi = r.phi_of(&target);
                assert!(r.field().elements().all(|x| phi.additive_eval(&x).is_zero()));
                assert!(r.field().elements().any(|x| eval_order(&r, &x) == target));
            }
        }
    }

    #[test]
    fn product_module_is_block_diagonal() {
        let f = f2();
        let w = prime(&f, "t^2+t+1");
        let c = DrinfeldModule::carlitz(&f).reduce_at(&w).unwrap();
        let om = OperatorModule::product(vec![c.clone(), c.clone()]).unwrap();
        assert_eq!(om.dim(), 4);
        let t2t = p(&f, "t^2+t");
        assert_eq!(om.structure().factors, vec![t2t.clone(), t2t]);
        let x = om.reduce_point(&[p(&f, "1"), p(&f, "t")]).unwrap();
        let vals = om.component_values(&x);
        assert_eq!(vals[1], c.carrier().reduce(&p(&f, "t")));
    }

    proptest! {
        #[test]
        fn orders_divide_exponent_and_dimensions_add_up(
            coeffs in proptest::collection::vec(0u64..3, 2..4),
            wi in 0usize..12,
        ) {
            let f = FiniteField::prime(3).unwrap();
            let mut gs: Vec<Poly> = vec![Poly::t(&f)];
            gs.extend(coeffs.iter().map(|&c| Poly::constant(FieldElem::from_index(&f, c))));
            if gs.last().unwrap().is_zero() {
                gs.pop();
                gs.push(Poly::one(&f));
            }
            let dm = DrinfeldModule::from_coeffs(&f, gs).unwrap();
            let primes: Vec<PrimeIdeal> = primes_of_degree_up_to(&f, 3).collect();
            let w = &primes[wi % primes.len()];
            let r = dm.reduce_at(w).unwrap();
            let om = OperatorModule::new(&r);
            let inv = om.structure();
            let total: usize = inv.factors.iter().map(|g| g.degree().unwrap()).sum();
            prop_assert_eq!(total, om.dim());
            let exp = inv.exponent().cloned().unwrap();
            for v in om.points().step_by(7) {
                prop_assert!(om.order(&v).divides(&exp));
            }
            for b in primes_of_degree_up_to(&f, 2) {
                let ker = om.torsion_kernel(b.gen()).unwrap().len();
                let bound = if &b == r.characteristic() { r.rank() - r.height() } else { r.rank() };
                prop_assert!(ker <= bound * b.degree());
            }
        }
    }
}
