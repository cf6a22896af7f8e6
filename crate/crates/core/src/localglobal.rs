//! Local-global experiments for reductions of Drinfeld modules.
//!
//! An [`InstanceSpec`] describes a product `phi_1^(e_1) x ... x phi_s^(e_s)`,
//! a point `P` and generators of a submodule `Lambda`. Scans reduce the
//! instance at every prime of bounded degree and decide the local question
//! exactly inside the finite module. Global questions are decided by exact
//! `F_q`-linear algebra over bounded coefficient degrees, using that
//! `phi_a(x)` is `F_q`-linear in `a`.
//!
//! Prime scans go through a [`PrimeMap`]; results always come back in
//! canonical prime order.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::drinfeld::{echelon_polys, Carrier, DrinfeldModule};
use crate::error::{Error, Result};
use crate::finmod::{OperatorModule, TorsionFieldDegree};
use crate::gf::{FieldElem, FiniteField};
use crate::linalg::{Matrix, Vector};
use crate::poly::{primes_of_degree_up_to, Poly, PrimeIdeal};

/// Largest polynomial degree the global searches are willing to build.
pub const MAX_GLOBAL_DEGREE: usize = 1 << 16;

/// Evaluates a function on each prime; implementations may run in parallel
/// but must return results in input order.
pub trait PrimeMap {
    fn map_primes<T, F>(&self, primes: &[PrimeIdeal], f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&PrimeIdeal) -> T + Sync + Send;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl PrimeMap for Sequential {
    fn map_primes<T, F>(&self, primes: &[PrimeIdeal], f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&PrimeIdeal) -> T + Sync + Send,
    {
        primes.iter().map(f).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanOptions {
    /// Primes of degree `<= degree_bound` are scanned.
    pub degree_bound: usize,
    /// Global coefficients have degree `<= coeff_bound`.
    pub coeff_bound: usize,
    pub seed: u64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            degree_bound: 6,
            coeff_bound: 3,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct InstanceSpec {
    base: FiniteField,
    modules: Vec<(DrinfeldModule, usize)>,
    point: Vec<Poly>,
    lambda_gens: Vec<Vec<Poly>>,
    pub options: ScanOptions,
}

impl InstanceSpec {
    pub fn new(
        modules: Vec<(DrinfeldModule, usize)>,
        point: Vec<Poly>,
        lambda_gens: Vec<Vec<Poly>>,
        options: ScanOptions,
    ) -> Result<Self> {
        let base = modules
            .first()
            .ok_or_else(|| Error::InvalidInput("instance needs at least one module".into()))?
            .0
            .base()
            .clone();
        if modules.iter().any(|(m, _)| m.base() != &base) {
            return Err(Error::MixedRings);
        }
        if modules.iter().any(|&(_, e)| e == 0) {
            return Err(Error::InvalidInput("multiplicities must be positive".into()));
        }
        let width: usize = modules.iter().map(|(_, e)| e).sum();
        if point.len() != width {
            return Err(Error::Dimension(format!(
                "point has {} coordinates, product module has {width}",
                point.len()
            )));
        }
        if let Some(g) = lambda_gens.iter().find(|g| g.len() != width) {
            return Err(Error::Dimension(format!(
                "generator has {} coordinates, product module has {width}",
                g.len()
            )));
        }
        if point.iter().chain(lambda_gens.iter().flatten()).any(|x| x.field() != &base) {
            return Err(Error::MixedRings);
        }
        Ok(InstanceSpec {
            base,
            modules,
            point,
            lambda_gens,
            options,
        })
    }

    pub fn base(&self) -> &FiniteField {
        &self.base
    }

    pub fn modules(&self) -> &[(DrinfeldModule, usize)] {
        &self.modules
    }

    pub fn point(&self) -> &[Poly] {
        &self.point
    }

    pub fn lambda_gens(&self) -> &[Vec<Poly>] {
        &self.lambda_gens
    }

    pub fn with_point(&self, point: Vec<Poly>) -> Result<Self> {
        Self::new(
            self.modules.clone(),
            point,
            self.lambda_gens.clone(),
            self.options.clone(),
        )
    }

    pub fn width(&self) -> usize {
        self.point.len()
    }

    /// The module acting on each coordinate.
    pub fn coordinates(&self) -> Vec<&DrinfeldModule> {
        self.modules
            .iter()
            .flat_map(|(m, e)| core::iter::repeat_n(m, *e))
            .collect()
    }

    /// Modules whose rank is below their multiplicity.
    pub fn warnings(&self) -> Vec<String> {
        self.modules
            .iter()
            .filter(|(m, e)| m.rank() < *e)
            .map(|(m, e)| format!("rank {} < multiplicity {e} for {m}", m.rank()))
            .collect()
    }

    pub fn is_good_prime(&self, w: &PrimeIdeal) -> bool {
        self.modules.iter().all(|(m, _)| m.is_good_prime(w))
    }

    pub fn primes(&self) -> Vec<PrimeIdeal> {
        primes_of_degree_up_to(&self.base, self.options.degree_bound).collect()
    }

    /// Componentwise `phi_a`.
    pub fn act(&self, a: &Poly, x: &[Poly]) -> Vec<Poly> {
        self.coordinates()
            .iter()
            .zip(x)
            .map(|(m, xi)| m.act(a, xi))
            .collect()
    }

    pub fn local_at(&self, w: &PrimeIdeal) -> Result<LocalInstance> {
        let carrier = Carrier::new(w)?;
        let comps = self
            .coordinates()
            .iter()
            .map(|m| m.reduce_on(&carrier))
            .collect::<Result<Vec<_>>>()?;
        let module = OperatorModule::product(comps)?;
        let point = module.reduce_point(&self.point)?;
        let gens = self
            .lambda_gens
            .iter()
            .map(|g| module.reduce_point(g))
            .collect::<Result<Vec<_>>>()?;
        Ok(LocalInstance {
            module,
            point,
            gens,
        })
    }
}

/// An instance reduced at one prime.
#[derive(Clone, Debug)]
pub struct LocalInstance {
    pub module: OperatorModule,
    pub point: Vector,
    pub gens: Vec<Vector>,
}

impl LocalInstance {
    pub fn member(&self) -> bool {
        self.module.member(&self.point, &self.gens)
    }
}

/// Counts over the good primes of a scan.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub scanned: usize,
    pub good: usize,
    pub bad: usize,
    pub hits: usize,
    pub undecided: usize,
}

impl Tally {
    /// `hits / decided`, or 1 when nothing was decided.
    pub fn fraction(&self) -> f64 {
        let decided = self.good - self.undecided;
        if decided == 0 {
            1.0
        } else {
            self.hits as f64 / decided as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MembershipRecord {
    pub prime: PrimeIdeal,
    /// `None` at bad primes.
    pub member: Option<bool>,
    pub module_dim: usize,
    /// `F_q`-dimension of the reduced submodule.
    pub lambda_dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MembershipScan {
    pub records: Vec<MembershipRecord>,
}

impl MembershipScan {
    pub fn tally(&self) -> Tally {
        let mut t = Tally {
            scanned: self.records.len(),
            ..Tally::default()
        };
        for r in &self.records {
            match r.member {
                None => t.bad += 1,
                Some(m) => {
                    t.good += 1;
                    t.hits += m as usize;
                }
            }
        }
        t
    }

    /// First good prime where local membership fails.
    pub fn witness(&self) -> Option<&PrimeIdeal> {
        self.records
            .iter()
            .find(|r| r.member == Some(false))
            .map(|r| &r.prime)
    }
}

fn membership_at(spec: &InstanceSpec, w: &PrimeIdeal) -> Result<MembershipRecord> {
    if !spec.is_good_prime(w) {
        return Ok(MembershipRecord {
            prime: w.clone(),
            member: None,
            module_dim: 0,
            lambda_dim: 0,
        });
    }
    let local = spec.local_at(w)?;
    let sub = local.module.submodule(&local.gens);
    Ok(MembershipRecord {
        prime: w.clone(),
        member: Some(sub.contains(&local.point)),
        module_dim: local.module.dim(),
        lambda_dim: sub.rank(),
    })
}

/// Local membership of `P` in `Lambda` at every prime of degree `<= D`.
pub fn scan_membership(spec: &InstanceSpec, map: &impl PrimeMap) -> Result<MembershipScan> {
    let primes = spec.primes();
    let records = map
        .map_primes(&primes, |w| membership_at(spec, w))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(MembershipScan { records })
}

/// First good prime (canonical order) where local membership fails.
pub fn find_witness(spec: &InstanceSpec, map: &impl PrimeMap) -> Result<Option<PrimeIdeal>> {
    Ok(scan_membership(spec, map)?.witness().cloned())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MembershipCertificate {
    /// `a_j` with `P = sum phi_(a_j)(g_j) + T`.
    pub coeffs: Vec<Poly>,
    pub torsion: Vec<Poly>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GlobalMembership {
    Found(MembershipCertificate),
    /// No representation with coefficients of degree `<= coeff_bound`.
    NotFound { coeff_bound: usize },
}

impl GlobalMembership {
    pub fn is_found(&self) -> bool {
        matches!(self, GlobalMembership::Found(_))
    }
}

/// Coefficient vector of a tuple of polynomials, each padded to `width`.
fn flatten(x: &[Poly], width: usize, zero: &FieldElem) -> Vector {
    x.iter()
        .flat_map(|p| (0..width).map(move |i| if i < p.coeffs().len() { p.coeff(i) } else { zero.clone() }))
        .collect()
}

fn max_width(tuples: &[&[Poly]]) -> usize {
    tuples
        .iter()
        .flat_map(|t| t.iter())
        .filter_map(Poly::degree)
        .max()
        .map_or(1, |d| d + 1)
}

fn guard_degree(x: &[Poly]) -> Result<()> {
    if x.iter().filter_map(Poly::degree).any(|d| d > MAX_GLOBAL_DEGREE) {
        Err(Error::Unsupported(format!(
            "global computation exceeds degree {MAX_GLOBAL_DEGREE}"
        )))
    } else {
        Ok(())
    }
}

/// `phi_(t^k)(g)` for `k = 0..=bound`, componentwise.
fn krylov_tuples(spec_coords: &[&DrinfeldModule], g: &[Poly], bound: usize) -> Result<Vec<Vec<Poly>>> {
    let mut out = Vec::with_capacity(bound + 1);
    let mut cur = g.to_vec();
    for k in 0..=bound {
        guard_degree(&cur)?;
        out.push(cur.clone());
        if k < bound {
            cur = spec_coords.iter().zip(&cur).map(|(m, x)| m.apply_t(x)).collect();
        }
    }
    Ok(out)
}

/// Decides whether `P = sum phi_(a_j)(g_j) + T` with `deg a_j <= B` and `T`
/// torsion, by solving the `F_q`-linear system in the coefficients of the
/// `a_j` and of `T`.
pub fn global_membership_bounded(spec: &InstanceSpec) -> Result<GlobalMembership> {
    let bound = spec.options.coeff_bound;
    let coords = spec.coordinates();
    let f = spec.base();
    let width = spec.width();
    let mut columns: Vec<Vec<Poly>> = Vec::new();
    for g in spec.lambda_gens() {
        columns.extend(krylov_tuples(&coords, g, bound)?);
    }
    let n_coeff = columns.len();
    // torsion translates: torsion basis of each coordinate module
    let mut tor_cache: Vec<(usize, Vec<Poly>)> = Vec::new();
    for (c, m) in coords.iter().enumerate() {
        let basis = match tor_cache.iter().find(|(i, _)| coords[*i] == *m) {
            Some((_, b)) => b.clone(),
            None => m.torsion_subspace(),
        };
        for b in &basis {
            let mut tuple = vec![Poly::zero(f); width];
            tuple[c] = b.clone();
            columns.push(tuple);
        }
        tor_cache.push((c, basis));
    }
    let mut all: Vec<&[Poly]> = columns.iter().map(Vec::as_slice).collect();
    all.push(spec.point());
    let w = max_width(&all);
    let zero = f.zero();
    let cols: Vec<Vector> = columns.iter().map(|c| flatten(c, w, &zero)).collect();
    let rhs = flatten(spec.point(), w, &zero);
    let solution = if cols.is_empty() {
        rhs.iter().all(FieldElem::is_zero).then(Vec::new)
    } else {
        Matrix::from_columns(f, rhs.len(), &cols)?.solve(&rhs)?
    };
    let Some(x) = solution else {
        return Ok(GlobalMembership::NotFound { coeff_bound: bound });
    };
    let coeffs: Vec<Poly> = x[..n_coeff]
        .chunks(bound + 1)
        .map(|c| Poly::from_coeffs(f, c.to_vec()))
        .collect();
    let mut torsion = vec![Poly::zero(f); width];
    for (c, col) in x[n_coeff..].iter().zip(&columns[n_coeff..]) {
        for (t, v) in torsion.iter_mut().zip(col) {
            *t = &*t + &v.scale(c);
        }
    }
    let cert = MembershipCertificate { coeffs, torsion };
    verify_membership(spec, &cert)?;
    Ok(GlobalMembership::Found(cert))
}

fn verify_membership(spec: &InstanceSpec, cert: &MembershipCertificate) -> Result<()> {
    let mut sum = cert.torsion.clone();
    for (a, g) in cert.coeffs.iter().zip(spec.lambda_gens()) {
        for (s, v) in sum.iter_mut().zip(spec.act(a, g)) {
            *s = &*s + &v;
        }
    }
    let tor_ok = spec
        .coordinates()
        .iter()
        .zip(&cert.torsion)
        .all(|(m, t)| m.torsion_order(t).is_some());
    if sum.as_slice() == spec.point() && tor_ok {
        Ok(())
    } else {
        Err(Error::InvariantViolation("membership certificate does not verify".into()))
    }
}

/// Exhaustive search over all `(a_j)` with `deg a_j <= B` and all torsion
/// translates, screening candidates by reduction at three good primes.
/// Exponential; only for small bounds.
pub fn global_membership_search(spec: &InstanceSpec) -> Result<GlobalMembership> {
    let f = spec.base();
    let bound = spec.options.coeff_bound;
    let coords = spec.coordinates();
    let width = spec.width();
    let screens: Vec<LocalInstance> = primes_of_degree_up_to(f, 8)
        .filter(|w| spec.is_good_prime(w))
        .take(3)
        .map(|w| spec.local_at(&w))
        .collect::<Result<_>>()?;
    // every torsion translate
    let mut translates: Vec<Vec<Poly>> = vec![vec![Poly::zero(f); width]];
    for (c, m) in coords.iter().enumerate() {
        let tor = span_elements(f, &m.torsion_subspace());
        translates = translates
            .into_iter()
            .flat_map(|t| {
                tor.iter().map(move |x| {
                    let mut t = t.clone();
                    t[c] = x.clone();
                    t
                })
            })
            .collect();
    }
    let s = spec.lambda_gens().len();
    let polys: Vec<Poly> = Poly::all_up_to_degree(f, bound).collect();
    let total = (polys.len() as u64).pow(s as u32);
    for idx in 0..total {
        let mut rest = idx;
        let coeffs: Vec<Poly> = (0..s)
            .map(|_| {
                let a = polys[(rest % polys.len() as u64) as usize].clone();
                rest /= polys.len() as u64;
                a
            })
            .collect();
        for t in &translates {
            let passes = screens.iter().all(|loc| {
                let mut v = loc.module.reduce_point(t).unwrap();
                for (a, g) in coeffs.iter().zip(&loc.gens) {
                    for (x, y) in v.iter_mut().zip(loc.module.act(a, g)) {
                        *x = &*x + &y;
                    }
                }
                v == loc.point
            });
            if !passes {
                continue;
            }
            let cert = MembershipCertificate {
                coeffs: coeffs.clone(),
                torsion: t.clone(),
            };
            if verify_membership(spec, &cert).is_ok() {
                return Ok(GlobalMembership::Found(cert));
            }
        }
    }
    Ok(GlobalMembership::NotFound { coeff_bound: bound })
}

/// All `F_q`-combinations of `basis`.
fn span_elements(f: &FiniteField, basis: &[Poly]) -> Vec<Poly> {
    let mut out = vec![Poly::zero(f)];
    for b in basis {
        out = out
            .iter()
            .flat_map(|x| f.elements().map(move |c| x + &b.scale(&c)))
            .collect();
    }
    out
}

fn canonical_sort(v: &mut [Poly]) {
    v.sort_by_key(|p| (p.degree().map_or(0, |d| d + 1), p.lower_index(), p.leading().map_or(0, FieldElem::index)));
}

/// Every `x` with `deg x <= deg_bound` and `phi_a(x) = 0`, in canonical order.
pub fn global_torsion(m: &DrinfeldModule, a: &Poly, deg_bound: usize) -> Result<Vec<Poly>> {
    if a.is_zero() {
        return Err(Error::InvalidInput("torsion of the zero polynomial".into()));
    }
    let f = m.base();
    let tor = m.torsion_subspace();
    if tor.is_empty() {
        return Ok(vec![Poly::zero(f)]);
    }
    // kernel of phi_a on the torsion subspace, then clip the degree
    let images: Vec<Poly> = tor.iter().map(|b| m.act(a, b)).collect();
    let mut all: Vec<&[Poly]> = vec![&images, &tor];
    all.retain(|s| !s.is_empty());
    let w = max_width(&all).max(deg_bound + 1);
    let zero = f.zero();
    let mut cols: Vec<Vector> = Vec::new();
    for (img, b) in images.iter().zip(&tor) {
        // rows: image coefficients, then coefficients of degree > deg_bound
        let mut col = flatten(core::slice::from_ref(img), w, &zero);
        col.extend((deg_bound + 1..w).map(|i| b.coeff(i)));
        cols.push(col);
    }
    let mat = Matrix::from_columns(f, cols[0].len(), &cols)?;
    let kernel: Vec<Poly> = mat
        .nullspace()
        .iter()
        .map(|v| {
            v.iter()
                .zip(&tor)
                .fold(Poly::zero(f), |acc, (c, b)| &acc + &b.scale(c))
        })
        .collect();
    let basis = echelon_polys(f, w, kernel);
    let mut out = span_elements(f, &basis);
    canonical_sort(&mut out);
    Ok(out)
}

/// Brute-force torsion search: every `x` with `deg x <= deg_bound` and `phi_a(x) = 0`.
pub fn global_torsion_search(m: &DrinfeldModule, a: &Poly, deg_bound: usize) -> Result<Vec<Poly>> {
    if a.is_zero() {
        return Err(Error::InvalidInput("torsion of the zero polynomial".into()));
    }
    let k0 = m.torsion_degree_bound();
    let mut out: Vec<Poly> = Poly::all_up_to_degree(m.base(), deg_bound.min(k0))
        .filter(|x| x.degree().is_none_or(|d| d < k0) && m.act(a, x).is_zero())
        .collect();
    canonical_sort(&mut out);
    Ok(out)
}

/// The first `count` good primes of `m`.
pub fn sample_good_primes(m: &DrinfeldModule, count: usize) -> Vec<PrimeIdeal> {
    primes_of_degree_up_to(m.base(), 64)
        .filter(|w| m.is_good_prime(w))
        .take(count)
        .collect()
}

/// The exact order of `x` if it is torsion, `None` if it is not.
///
/// The local orders at the sample primes are checked against the global
/// order: each must divide it.
pub fn torsion_order_or_none(m: &DrinfeldModule, x: &Poly, sample: &[PrimeIdeal]) -> Result<Option<Poly>> {
    let goods: Vec<&PrimeIdeal> = sample.iter().filter(|w| m.is_good_prime(w)).collect();
    if goods.len() < 2 {
        return Err(Error::InvalidInput("need at least two good sample primes".into()));
    }
    let order = m.torsion_order(x);
    if let Some(o) = &order {
        for w in goods {
            let r = m.reduce_at(w)?;
            let om = OperatorModule::new(&r);
            let local = om.order(&om.point(&[r.carrier().reduce(x)])?);
            if !local.divides(o) {
                return Err(Error::InvariantViolation(format!(
                    "local order {local} at {w} does not divide global order {o}"
                )));
            }
        }
    }
    Ok(order)
}

/// Normalises a relation so that its first nonzero coefficient is monic.
fn normalise_relation(rel: Vec<Poly>) -> Vec<Poly> {
    let lead = rel.iter().find(|a| !a.is_zero()).and_then(|a| a.leading().cloned());
    match lead {
        Some(l) => {
            let inv = l.inv().unwrap();
            rel.iter().map(|a| a.scale(&inv)).collect()
        }
        None => rel,
    }
}

/// A nonzero `(a_1, ..., a_s)` with `deg a_j <= B` and `sum phi_(a_j)(x_j) = 0`,
/// of least possible coefficient degree.
pub fn detect_relation(m: &DrinfeldModule, points: &[Poly], bound: usize) -> Result<Option<Vec<Poly>>> {
    for b in 0..=bound {
        if let Some(rel) = relation_of_degree(m, points, b)? {
            return Ok(Some(rel));
        }
    }
    Ok(None)
}

fn relation_of_degree(m: &DrinfeldModule, points: &[Poly], bound: usize) -> Result<Option<Vec<Poly>>> {
    let f = m.base();
    if points.is_empty() {
        return Ok(None);
    }
    let coords = vec![m; 1];
    let mut columns: Vec<Poly> = Vec::new();
    for x in points {
        for v in krylov_tuples(&coords, core::slice::from_ref(x), bound)? {
            columns.push(v.into_iter().next().unwrap());
        }
    }
    let w = max_width(&[&columns]);
    let zero = f.zero();
    let cols: Vec<Vector> = columns
        .iter()
        .map(|c| flatten(core::slice::from_ref(c), w, &zero))
        .collect();
    let kernel = Matrix::from_columns(f, w, &cols)?.nullspace();
    let Some(v) = kernel.into_iter().next() else {
        return Ok(None);
    };
    let rel: Vec<Poly> = v
        .chunks(bound + 1)
        .map(|c| Poly::from_coeffs(f, c.to_vec()))
        .collect();
    let rel = normalise_relation(rel);
    let sum = rel
        .iter()
        .zip(points)
        .fold(Poly::zero(f), |acc, (a, x)| &acc + &m.act(a, x));
    if !sum.is_zero() {
        return Err(Error::InvariantViolation("relation does not verify".into()));
    }
    Ok(Some(rel))
}

/// Exhaustive relation search screened at three good primes.
pub fn detect_relation_search(m: &DrinfeldModule, points: &[Poly], bound: usize) -> Result<Option<Vec<Poly>>> {
    let f = m.base();
    let screens: Vec<(OperatorModule, Vec<Vector>)> = sample_good_primes(m, 3)
        .iter()
        .map(|w| {
            let r = m.reduce_at(w)?;
            let om = OperatorModule::new(&r);
            let pts = points
                .iter()
                .map(|x| om.point(&[r.carrier().reduce(x)]))
                .collect::<Result<Vec<_>>>()?;
            Ok((om, pts))
        })
        .collect::<Result<_>>()?;
    let polys: Vec<Poly> = Poly::all_up_to_degree(f, bound).collect();
    let s = points.len();
    let total = (polys.len() as u64).pow(s as u32);
    for idx in 1..total {
        let mut rest = idx;
        let coeffs: Vec<Poly> = (0..s)
            .map(|_| {
                let a = polys[(rest % polys.len() as u64) as usize].clone();
                rest /= polys.len() as u64;
                a
            })
            .collect();
        let local_ok = screens.iter().all(|(om, pts)| {
            let mut v = om.zero();
            for (a, x) in coeffs.iter().zip(pts) {
                for (y, z) in v.iter_mut().zip(om.act(a, x)) {
                    *y = &*y + &z;
                }
            }
            v.iter().all(FieldElem::is_zero)
        });
        if !local_ok {
            continue;
        }
        let sum = coeffs
            .iter()
            .zip(points)
            .fold(Poly::zero(f), |acc, (a, x)| &acc + &m.act(a, x));
        if sum.is_zero() {
            return Ok(Some(normalise_relation(coeffs)));
        }
    }
    Ok(None)
}

/// Bounded independence certificate: no point is torsion and no relation of
/// coefficient degree `<= bound` exists.
pub fn certify_independent(m: &DrinfeldModule, points: &[Poly], bound: usize) -> Result<()> {
    let sample = sample_good_primes(m, 2);
    for x in points {
        if let Some(o) = torsion_order_or_none(m, x, &sample)? {
            return Err(Error::DependentPoints(format!("{x} is torsion of order {o}")));
        }
    }
    if let Some(rel) = detect_relation(m, points, bound)? {
        let text: Vec<String> = rel.iter().map(|a| format!("{a}")).collect();
        return Err(Error::DependentPoints(format!(
            "relation ({}) among the points",
            text.join(", ")
        )));
    }
    Ok(())
}

/// `(i, j, sign)` entries of the standard basis of trace-zero `e x e`
/// matrices: off-diagonal units in row-major order, then `E_ii - E_(i+1,i+1)`.
pub fn trace_zero_basis(e: usize) -> Vec<Vec<(usize, usize, i64)>> {
    let mut out = Vec::new();
    for i in 0..e {
        for j in 0..e {
            if i != j {
                out.push(vec![(i, j, 1)]);
            }
        }
    }
    for i in 0..e.saturating_sub(1) {
        out.push(vec![(i, i, 1), (i + 1, i + 1, -1)]);
    }
    out
}

/// `{B P : B in trace_zero_basis(e)}`.
pub fn trace_zero_generators(points: &[Poly]) -> Vec<Vec<Poly>> {
    let e = points.len();
    let Some(f) = points.first().map(|p| p.field().clone()) else {
        return Vec::new();
    };
    trace_zero_basis(e)
        .into_iter()
        .map(|entries| {
            let mut g = vec![Poly::zero(&f); e];
            for (i, j, s) in entries {
                let term = points[j].scale(&FieldElem::from_int(&f, s));
                g[i] = &g[i] + &term;
            }
            g
        })
        .collect()
}

/// The instance `phi^e`, `P = (P_1, ..., P_e)`, `Lambda = {M P : tr M = 0}`
/// for `e = rank + 1` points certified independent.
pub fn build_counterexample(m: &DrinfeldModule, points: &[Poly], options: ScanOptions) -> Result<InstanceSpec> {
    let e = points.len();
    if e != m.rank() + 1 {
        return Err(Error::InvalidInput(format!(
            "need rank + 1 = {} points, got {e}",
            m.rank() + 1
        )));
    }
    certify_independent(m, points, options.coeff_bound)?;
    InstanceSpec::new(
        vec![(m.clone(), e)],
        points.to_vec(),
        trace_zero_generators(points),
        options,
    )
}

/// Local certificate that `red P` lies in `red Lambda`: a trace-zero
/// matrix `M` over `A` with `M red P = red P`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterexampleCertificate {
    pub prime: PrimeIdeal,
    /// Least monic `alpha_i` with `alpha_i P_i` in the span of the other points.
    pub alphas: Vec<Poly>,
    /// Row `i`: a relation with `alpha_i` on the diagonal.
    pub relations: Vec<Vec<Poly>>,
    /// `a_i` with `sum a_i alpha_i = e`.
    pub bezout: Vec<Poly>,
    pub matrix: Vec<Vec<Poly>>,
    /// `e = 0` in `F_q`, so every `a_i = 0` and `M` is the identity.
    pub degenerate: bool,
    /// Independent check through the submodule generated by the reduced `Lambda`.
    pub local_member: bool,
}

/// Builds and verifies the trace-zero matrix at a good prime of a
/// counterexample instance (single module with multiplicity `e`).
pub fn certify_counterexample_at(spec: &InstanceSpec, w: &PrimeIdeal) -> Result<CounterexampleCertificate> {
    let [(m, e)] = spec.modules() else {
        return Err(Error::InvalidInput("counterexample instances have a single module".into()));
    };
    let e = *e;
    let f = spec.base();
    let r = m.reduce_at(w)?;
    let om = OperatorModule::new(&r);
    let pts: Vec<Vector> = spec
        .point()
        .iter()
        .map(|x| om.point(&[r.carrier().reduce(x)]))
        .collect::<Result<_>>()?;
    let mut alphas = Vec::with_capacity(e);
    let mut relations = Vec::with_capacity(e);
    for i in 0..e {
        let mut order: Vec<usize> = (0..e).filter(|&j| j != i).collect();
        order.push(i);
        let gens: Vec<Vector> = order.iter().map(|&j| pts[j].clone()).collect();
        let sub = om.submodule(&gens);
        let rel = sub.relation(e - 1);
        let mut row = vec![Poly::zero(f); e];
        for (pos, &j) in order.iter().enumerate() {
            row[j] = rel[pos].clone();
        }
        alphas.push(row[i].clone());
        relations.push(row);
    }
    let gcd = alphas.iter().fold(Poly::zero(f), |g, a| g.gcd(a));
    if !gcd.is_one() {
        return Err(Error::InvariantViolation(format!(
            "gcd of the relative orders at {w} is {gcd}, not 1"
        )));
    }
    let e_const = FieldElem::from_int(f, e as i64);
    let degenerate = e_const.is_zero();
    let bezout: Vec<Poly> = if degenerate {
        vec![Poly::zero(f); e]
    } else {
        let (g, coeffs) = bezout_coefficients(&alphas);
        debug_assert!(g.is_one());
        coeffs.iter().map(|c| c.scale(&e_const)).collect()
    };
    let mut matrix = vec![vec![Poly::zero(f); e]; e];
    for i in 0..e {
        for j in 0..e {
            let prod = &bezout[i] * &relations[i][j];
            matrix[i][j] = if i == j { &Poly::one(f) - &prod } else { prod.neg() };
        }
    }
    let trace = (0..e).fold(Poly::zero(f), |acc, i| &acc + &matrix[i][i]);
    if !trace.is_zero() {
        return Err(Error::InvariantViolation(format!("trace {trace} at {w}")));
    }
    for i in 0..e {
        let mut v = om.zero();
        for j in 0..e {
            for (x, y) in v.iter_mut().zip(om.act(&matrix[i][j], &pts[j])) {
                *x = &*x + &y;
            }
        }
        if v != pts[i] {
            return Err(Error::InvariantViolation(format!("M P != P in row {i} at {w}")));
        }
    }
    let local_member = spec.local_at(w)?.member();
    Ok(CounterexampleCertificate {
        prime: w.clone(),
        alphas,
        relations,
        bezout,
        matrix,
        degenerate,
        local_member,
    })
}

/// `(g, c)` with `sum c_i a_i = g = gcd(a_i)`.
fn bezout_coefficients(a: &[Poly]) -> (Poly, Vec<Poly>) {
    let f = a[0].field().clone();
    let mut g = Poly::zero(&f);
    let mut coeffs: Vec<Poly> = Vec::with_capacity(a.len());
    for ai in a {
        let (h, s, u) = g.xgcd(ai);
        for c in coeffs.iter_mut() {
            *c = &*c * &s;
        }
        coeffs.push(u);
        g = h;
    }
    (g, coeffs)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DensityVerdict {
    Bad,
    /// The prime is the one whose primary parts are examined.
    Excluded,
    Hit,
    Miss,
    /// The torsion field degree exceeded the cap.
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityRecord {
    pub prime: PrimeIdeal,
    pub verdict: DensityVerdict,
    /// Extension degree used for the comparison (1 when none was needed).
    pub extension: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityReport {
    pub records: Vec<DensityRecord>,
}

impl DensityReport {
    pub fn tally(&self) -> Tally {
        let mut t = Tally {
            scanned: self.records.len(),
            ..Tally::default()
        };
        for r in &self.records {
            match r.verdict {
                DensityVerdict::Bad | DensityVerdict::Excluded => t.bad += 1,
                DensityVerdict::Hit => {
                    t.good += 1;
                    t.hits += 1;
                }
                DensityVerdict::Miss => t.good += 1,
                DensityVerdict::Undecided => {
                    t.good += 1;
                    t.undecided += 1;
                }
            }
        }
        t
    }
}

/// Fraction of good primes `W != P` of degree `<= D` at which the
/// `P`-primary part of every reduced point vanishes.
pub fn vanishing_density(
    base: &FiniteField,
    families: &[(DrinfeldModule, Vec<Poly>)],
    p: &PrimeIdeal,
    options: &ScanOptions,
    map: &impl PrimeMap,
) -> Result<DensityReport> {
    for (m, xs) in families {
        if m.base() != base {
            return Err(Error::MixedRings);
        }
        certify_independent(m, xs, options.coeff_bound)?;
    }
    let primes: Vec<PrimeIdeal> = primes_of_degree_up_to(base, options.degree_bound).collect();
    let records = map
        .map_primes(&primes, |w| -> Result<DensityRecord> {
            let verdict = if w == p {
                DensityVerdict::Excluded
            } else if !families.iter().all(|(m, _)| m.is_good_prime(w)) {
                DensityVerdict::Bad
            } else {
                let carrier = Carrier::new(w)?;
                let mut all = true;
                for (m, xs) in families {
                    let om = OperatorModule::new(&m.reduce_on(&carrier)?);
                    for x in xs {
                        let v = om.point(&[carrier.reduce(x)])?;
                        if om.pi_order(&v, p) != 0 {
                            all = false;
                        }
                    }
                }
                if all { DensityVerdict::Hit } else { DensityVerdict::Miss }
            };
            Ok(DensityRecord {
                prime: w.clone(),
                verdict,
                extension: 1,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityReport { records })
}

/// Fraction of good primes `W != P` where the `P`-primary part of `red x`
/// equals the `P`-primary part of `red T`, compared in the extension of
/// `k_W` over which `phi[P]` becomes fully rational (at most `cap`).
#[allow(clippy::too_many_arguments)]
pub fn torsion_matching_density(
    m: &DrinfeldModule,
    x: &Poly,
    torsion: &Poly,
    p: &PrimeIdeal,
    level: usize,
    cap: usize,
    options: &ScanOptions,
    map: &impl PrimeMap,
) -> Result<DensityReport> {
    let pm = p.gen().pow(level as u64);
    if !m.act(&pm, torsion).is_zero() {
        return Err(Error::InvalidInput(format!("{torsion} is not killed by ({p})^{level}")));
    }
    certify_independent(m, core::slice::from_ref(x), options.coeff_bound)?;
    let primes: Vec<PrimeIdeal> = primes_of_degree_up_to(m.base(), options.degree_bound).collect();
    let records = map
        .map_primes(&primes, |w| -> Result<DensityRecord> {
            if w == p {
                return Ok(DensityRecord { prime: w.clone(), verdict: DensityVerdict::Excluded, extension: 1 });
            }
            if !m.is_good_prime(w) {
                return Ok(DensityRecord { prime: w.clone(), verdict: DensityVerdict::Bad, extension: 1 });
            }
            let r = m.reduce_at(w)?;
            let om = OperatorModule::new(&r);
            let n = match om.torsion_field_degree(p, cap)? {
                TorsionFieldDegree::Degree(n) => n,
                TorsionFieldDegree::CapExceeded(_) => {
                    return Ok(DensityRecord { prime: w.clone(), verdict: DensityVerdict::Undecided, extension: cap });
                }
            };
            let (ext, up) = om.extend(n)?;
            let xv = om.embed_point(&ext, &up, &om.point(&[r.carrier().reduce(x)])?)?;
            let tv = om.embed_point(&ext, &up, &om.point(&[r.carrier().reduce(torsion)])?)?;
            let hit = ext.primary_part(&xv, p) == ext.primary_part(&tv, p);
            Ok(DensityRecord {
                prime: w.clone(),
                verdict: if hit { DensityVerdict::Hit } else { DensityVerdict::Miss },
                extension: n,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityReport { records })
}

fn state_key(v: &[FieldElem]) -> Vec<u64> {
    v.iter().map(FieldElem::index).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitRecord {
    pub prime: PrimeIdeal,
    pub good: bool,
    /// Least `n >= 0` with `w^n red P` in `red Lambda`.
    pub first_hit: Option<usize>,
    /// Number of distinct orbit points examined.
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GlobalOrbit {
    Hit { n: usize, certificate: MembershipCertificate },
    NotFound { searched: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitReport {
    pub records: Vec<OrbitRecord>,
    pub global: GlobalOrbit,
}

impl OrbitReport {
    pub fn tally(&self) -> Tally {
        let mut t = Tally {
            scanned: self.records.len(),
            ..Tally::default()
        };
        for r in &self.records {
            if r.good {
                t.good += 1;
                t.hits += r.first_hit.is_some() as usize;
            } else {
                t.bad += 1;
            }
        }
        t
    }
}

/// Decides whether `{w^n y : n >= 0}` meets the submodule, following the orbit
/// until it repeats.
pub fn local_orbit_hit(module: &OperatorModule, y: &[FieldElem], gens: &[Vector], w: &Poly) -> (Option<usize>, usize) {
    let sub = module.submodule(gens);
    let mut seen = BTreeMap::new();
    let mut cur = y.to_vec();
    for n in 0.. {
        if sub.contains(&cur) {
            return (Some(n), n + 1);
        }
        if seen.insert(state_key(&cur), n).is_some() {
            return (None, n);
        }
        cur = module.act(w, &cur);
    }
    unreachable!()
}

/// Local orbit decisions at every prime, and a global search for `n <= n_max`
/// with `w^n P` in `Lambda + tor`.
pub fn orbit_scan(spec: &InstanceSpec, w: &Poly, n_max: usize, map: &impl PrimeMap) -> Result<OrbitReport> {
    if w.is_zero() {
        return Err(Error::InvalidInput("orbit polynomial must be nonzero".into()));
    }
    let primes = spec.primes();
    let records = map
        .map_primes(&primes, |p| -> Result<OrbitRecord> {
            if !spec.is_good_prime(p) {
                return Ok(OrbitRecord { prime: p.clone(), good: false, first_hit: None, steps: 0 });
            }
            let local = spec.local_at(p)?;
            let (first_hit, steps) = local_orbit_hit(&local.module, &local.point, &local.gens, w);
            Ok(OrbitRecord { prime: p.clone(), good: true, first_hit, steps })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut global = GlobalOrbit::NotFound { searched: 0 };
    let mut cur = spec.point().to_vec();
    for n in 0..=n_max {
        if guard_degree(&cur).is_err() {
            break;
        }
        let at = spec.with_point(cur.clone())?;
        match global_membership_bounded(&at) {
            Ok(GlobalMembership::Found(certificate)) => {
                global = GlobalOrbit::Hit { n, certificate };
                break;
            }
            Ok(GlobalMembership::NotFound { .. }) => global = GlobalOrbit::NotFound { searched: n + 1 },
            Err(Error::Unsupported(_)) => break,
            Err(e) => return Err(e),
        }
        if n < n_max {
            cur = spec.act(w, &cur);
        }
    }
    Ok(OrbitReport { records, global })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportRecord {
    pub prime: PrimeIdeal,
    pub good: bool,
    /// Least `n >= 1` with `w1^n red P = w2^n red Q`.
    pub first_n: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GlobalSupport {
    /// `w1^n P - w2^n Q = torsion`, whose order divides a power of `gcd(w1, w2)`.
    Found { n: usize, torsion: Poly, order: Poly },
    NotFound { searched: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportReport {
    pub records: Vec<SupportRecord>,
    pub global: GlobalSupport,
}

/// `o` divides some power of `g`.
fn divides_power_of(o: &Poly, g: &Poly) -> bool {
    let mut rest = o.monic();
    loop {
        let h = rest.gcd(g);
        if h.is_one() || h.is_zero() {
            return rest.is_one();
        }
        rest = rest.div_exact(&h).unwrap();
    }
}

pub fn local_support_n(om: &OperatorModule, p: &[FieldElem], q: &[FieldElem], w1: &Poly, w2: &Poly) -> Option<usize> {
    let mut seen = BTreeMap::new();
    let (mut a, mut b) = (om.act(w1, p), om.act(w2, q));
    for n in 1.. {
        if a == b {
            return Some(n);
        }
        let mut key = state_key(&a);
        key.extend(state_key(&b));
        if seen.insert(key, n).is_some() {
            return None;
        }
        a = om.act(w1, &a);
        b = om.act(w2, &b);
    }
    unreachable!()
}

#[allow(clippy::too_many_arguments)]
pub fn support_scan(
    m: &DrinfeldModule,
    p: &Poly,
    q: &Poly,
    w1: &Poly,
    w2: &Poly,
    degree_bound: usize,
    n_max: usize,
    map: &impl PrimeMap,
) -> Result<SupportReport> {
    let primes: Vec<PrimeIdeal> = primes_of_degree_up_to(m.base(), degree_bound).collect();
    let records = map
        .map_primes(&primes, |w| -> Result<SupportRecord> {
            if !m.is_good_prime(w) {
                return Ok(SupportRecord { prime: w.clone(), good: false, first_n: None });
            }
            let r = m.reduce_at(w)?;
            let om = OperatorModule::new(&r);
            let pv = om.point(&[r.carrier().reduce(p)])?;
            let qv = om.point(&[r.carrier().reduce(q)])?;
            Ok(SupportRecord { prime: w.clone(), good: true, first_n: local_support_n(&om, &pv, &qv, w1, w2) })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let g = w1.gcd(w2);
    let mut global = GlobalSupport::NotFound { searched: 0 };
    let (mut a, mut b) = (m.act(w1, p), m.act(w2, q));
    for n in 1..=n_max {
        if guard_degree(&[a.clone(), b.clone()]).is_err() {
            break;
        }
        let diff = &a - &b;
        if let Some(order) = m.torsion_order(&diff) {
            if divides_power_of(&order, &g) {
                global = GlobalSupport::Found { n, torsion: diff, order };
                break;
            }
        }
        global = GlobalSupport::NotFound { searched: n };
        if n < n_max {
            a = m.act(w1, &a);
            b = m.act(w2, &b);
        }
    }
    Ok(SupportReport { records, global })
}
