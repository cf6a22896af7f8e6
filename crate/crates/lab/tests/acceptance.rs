//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Where a criterion as literally stated cannot hold, the literal check is
//! kept (and fails) next to the valid variant that exercises the same code.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command as Process;

use drinfeld_core::localglobal::{
    self, DensityVerdict, GlobalMembership, GlobalSupport, InstanceSpec, ScanOptions, Sequential,
};
use drinfeld_core::poly::primes_of_degree_up_to;
use drinfeld_core::{DrinfeldModule, Error, FieldElem, FiniteField, OperatorModule, Poly, PrimeIdeal, SkewPoly, Vector};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn field(p: u64) -> FiniteField {
    FiniteField::prime(p).unwrap()
}

fn poly(f: &FiniteField, s: &str) -> Poly {
    Poly::parse(f, s).unwrap()
}

fn polys(f: &FiniteField, s: &[&str]) -> Vec<Poly> {
    s.iter().map(|x| poly(f, x)).collect()
}

fn opts(d: usize, b: usize) -> ScanOptions {
    ScanOptions { degree_bound: d, coeff_bound: b, seed: 0 }
}

/// Carlitz, `t + T + T^2` and `t + tT + T^2`.
fn test_modules(f: &FiniteField) -> Vec<DrinfeldModule> {
    vec![
        DrinfeldModule::carlitz(f),
        DrinfeldModule::parse(f, &["t", "1", "1"]).unwrap(),
        DrinfeldModule::parse(f, &["t", "t", "1"]).unwrap(),
    ]
}

fn random_elem(rng: &mut ChaCha8Rng, f: &FiniteField) -> FieldElem {
    FieldElem::from_index(f, rng.next_u64() % f.order())
}

fn random_poly(rng: &mut ChaCha8Rng, f: &FiniteField, max_deg: usize) -> Poly {
    let deg = (rng.next_u64() % (max_deg as u64 + 1)) as usize;
    Poly::from_coeffs(f, (0..=deg).map(|_| random_elem(rng, f)).collect())
}

fn random_skew(rng: &mut ChaCha8Rng, ring: &FiniteField, q: u64) -> SkewPoly<FieldElem> {
    let deg = (rng.next_u64() % 7) as usize;
    SkewPoly::new(ring, q, (0..=deg).map(|_| random_elem(rng, ring)).collect()).unwrap()
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut cases = 0;
    for (p, m, q) in [(2, 2, 2), (3, 2, 3), (2, 4, 4)] {
        let ring = FiniteField::new(p, m).unwrap();
        let one = SkewPoly::tau_power(&ring, q, 0).unwrap();
        for _ in 0..1000 {
            let a = random_skew(&mut rng, &ring, q);
            let b = random_skew(&mut rng, &ring, q);
            let c = random_skew(&mut rng, &ring, q);
            let ab = &a * &b;
            check(&ab * &c == &a * &(&b * &c), || format!("associativity over q = {q}"))?;
            check(&a * &(&b + &c) == &ab + &(&a * &c), || format!("left distributivity, q = {q}"))?;
            check(&(&a + &b) * &c == &(&a * &c) + &(&b * &c), || format!("right distributivity, q = {q}"))?;
            check(&one * &a == a && &a * &one == a, || format!("identity, q = {q}"))?;
            if !b.is_zero() {
                let (quo, r) = a.right_divmod(&b).map_err(|e| e.to_string())?;
                check(&(&quo * &b) + &r == a, || format!("right_divmod reconstruction, q = {q}"))?;
                check(r.degree() < b.degree() || r.is_zero(), || format!("remainder degree, q = {q}"))?;
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} random cases over q = 2, 3, 4 with deg <= 6, every right_divmod reconstructs exactly"))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut cases = 0;
    for p in [2, 3] {
        let f = field(p);
        for m in test_modules(&f) {
            for _ in 0..150 {
                let a = random_poly(&mut rng, &f, 4);
                let b = random_poly(&mut rng, &f, 4);
                let lhs = m.phi_of(&(&a * &b));
                let rhs = m.phi_of(&a).skew_mul(&m.phi_of(&b)).unwrap();
                check(lhs == rhs, || format!("phi_(ab) != phi_a phi_b for {m}, a = {a}, b = {b}"))?;
                let expected = a.degree().map(|d| d * m.rank());
                check(m.phi_of(&a).degree() == expected, || format!("degree law fails for {m}, a = {a}"))?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} random pairs (deg <= 4) over three modules and q = 2, 3, zero failures"))
}

fn prime_factors(p: &Poly) -> Vec<Poly> {
    p.factor().unwrap().primes().map(|w| w.gen().clone()).collect()
}

fn criterion_3() -> Outcome {
    let mut checked = 0;
    for (p, bound) in [(2, 5), (3, 4)] {
        let f = field(p);
        let c = DrinfeldModule::carlitz(&f);
        for w in primes_of_degree_up_to(&f, bound) {
            let pm1 = w.gen() - &Poly::one(&f);
            let r = c.reduce_at(&w).map_err(|e| e.to_string())?;
            let om = OperatorModule::new(&r);
            let inv = om.structure();
            check(inv.factors == vec![pm1.clone()], || format!("structure at {w} over F_{p} is {inv}"))?;
            // independent route: the additive polynomial phi_(P-1) kills k_P and no phi_((P-1)/l) does
            let k = r.field().clone();
            let kills = |a: &Poly| {
                let s = r.phi_of(a);
                k.elements().all(|x| s.additive_eval(&x).is_zero())
            };
            check(kills(&pm1), || format!("phi_(P-1) does not annihilate k_P at {w}"))?;
            for l in prime_factors(&pm1) {
                let d = pm1.div_exact(&l).unwrap();
                check(!kills(&d), || format!("phi_({d}) annihilates k_P at {w}"))?;
            }
            checked += 1;
        }
    }
    Ok(format!("structure = [P - 1] at all {checked} primes (deg <= 5 over F_2, <= 4 over F_3), matching the skew-evaluation annihilator"))
}

fn criterion_4() -> Outcome {
    let mut checks = 0;
    for p in [2, 3] {
        let f = field(p);
        for m in test_modules(&f) {
            let d = m.rank();
            for w in primes_of_degree_up_to(&f, 5).filter(|w| m.is_good_prime(w)) {
                let r = m.reduce_at(&w).map_err(|e| e.to_string())?;
                let h = r.height();
                let om = OperatorModule::new(&r);
                let mut ideals: Vec<PrimeIdeal> = primes_of_degree_up_to(&f, 2).collect();
                if !ideals.contains(&w) {
                    ideals.push(w.clone());
                }
                for b in ideals {
                    let kernel = om.torsion_kernel(b.gen()).map_err(|e| e.to_string())?;
                    let limit = if b == w { d - h } else { d };
                    check(kernel.len() <= limit * b.degree(), || {
                        format!("dim phi^W[B] = {}/{} > {limit} for {m}, W = {w}, B = {b}", kernel.len(), b.degree())
                    })?;
                    checks += 1;
                }
            }
        }
    }
    Ok(format!("{checks} (module, W, B) triples, zero violations of the torsion bounds"))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut triples = 0;
    let families: Vec<(FiniteField, Vec<DrinfeldModule>)> = [2, 3].map(|p| (field(p), test_modules(&field(p)))).into();
    let primes: Vec<Vec<PrimeIdeal>> = families
        .iter()
        .map(|(f, _)| primes_of_degree_up_to(f, 4).collect())
        .collect();
    while triples < 1000 {
        let i = (rng.next_u64() % 2) as usize;
        let (f, mods) = &families[i];
        let m = &mods[(rng.next_u64() % 3) as usize];
        let w = &primes[i][(rng.next_u64() as usize) % primes[i].len()];
        if !m.is_good_prime(w) {
            continue;
        }
        let a = random_poly(&mut rng, f, 3);
        let x = random_poly(&mut rng, f, 4);
        let r = m.reduce_at(w).map_err(|e| e.to_string())?;
        let lhs = r.carrier().reduce(&m.act(&a, &x));
        let rhs = r.act(&a, &r.carrier().reduce(&x));
        check(lhs == rhs, || format!("reduce o act != act o reduce for {m}, W = {w}, a = {a}, x = {x}"))?;
        triples += 1;
    }
    // embedding into an extension is injective on prime-to-characteristic torsion
    let mut sweeps = 0;
    for (f, mods) in &families {
        for m in mods {
            for w in primes_of_degree_up_to(f, 4).filter(|w| m.is_good_prime(w)) {
                let om = OperatorModule::new(&m.reduce_at(&w).map_err(|e| e.to_string())?);
                let (ext, up) = om.extend(2).map_err(|e| e.to_string())?;
                for b in primes_of_degree_up_to(f, 2).filter(|b| *b != w) {
                    let basis = om.torsion_kernel(b.gen()).map_err(|e| e.to_string())?;
                    let pts = span(&om, &basis);
                    let mut images = BTreeSet::new();
                    for v in &pts {
                        let e = om.embed_point(&ext, &up, v).map_err(|e| e.to_string())?;
                        check(ext.act(b.gen(), &e).iter().all(FieldElem::is_zero), || {
                            format!("embedded point is not B-torsion: {m}, W = {w}, B = {b}")
                        })?;
                        images.insert(key(&e));
                    }
                    check(images.len() == pts.len(), || format!("embedding not injective: {m}, W = {w}, B = {b}"))?;
                    sweeps += 1;
                }
            }
            // reduction is injective on global torsion away from the torsion's primes
            for a in Poly::all_up_to_degree(f, 2).filter(|a| !a.is_zero()) {
                let tor = localglobal::global_torsion(m, &a, m.torsion_degree_bound()).map_err(|e| e.to_string())?;
                for w in primes_of_degree_up_to(f, 4).filter(|w| m.is_good_prime(w) && !w.gen().divides(&a)) {
                    let r = m.reduce_at(&w).map_err(|e| e.to_string())?;
                    let images: BTreeSet<u64> = tor.iter().map(|x| r.carrier().reduce(x).index()).collect();
                    check(images.len() == tor.len(), || format!("reduction not injective on {m}[{a}] at {w}"))?;
                }
            }
        }
    }
    Ok(format!(
        "{triples} random reduction triples agree; {sweeps} torsion embedding sweeps (deg W <= 4) injective"
    ))
}

fn key(v: &[FieldElem]) -> Vec<u64> {
    v.iter().map(FieldElem::index).collect()
}

fn span(om: &OperatorModule, basis: &[Vector]) -> Vec<Vector> {
    let f = om.base().clone();
    let mut out = vec![om.zero()];
    for b in basis {
        out = out
            .iter()
            .flat_map(|x| {
                f.elements()
                    .map(|c| x.iter().zip(b).map(|(xi, bi)| xi + &(bi * &c)).collect())
                    .collect::<Vec<Vector>>()
            })
            .collect();
    }
    out
}

/// Certificates at every good prime, the witness search and the global search.
fn counterexample_checks(spec: &InstanceSpec) -> Result<(usize, usize, Option<PrimeIdeal>, GlobalMembership), String> {
    let primes = spec.primes();
    let mut certified = 0;
    let mut degenerate = 0;
    for w in primes.iter().filter(|w| spec.is_good_prime(w)) {
        let c = localglobal::certify_counterexample_at(spec, w).map_err(|e| e.to_string())?;
        check(c.local_member, || format!("certificate at {w} but red P not in red Lambda"))?;
        certified += 1;
        degenerate += c.degenerate as usize;
    }
    let witness = localglobal::find_witness(spec, &Sequential).map_err(|e| e.to_string())?;
    let global = localglobal::global_membership_bounded(spec).map_err(|e| e.to_string())?;
    Ok((certified, degenerate, witness, global))
}

fn criterion_6_literal() -> Outcome {
    let f = field(2);
    let c = DrinfeldModule::carlitz(&f);
    let points = polys(&f, &["1", "t"]);
    let built = localglobal::build_counterexample(&c, &points, opts(7, 3));
    // run everything else on the same instance regardless
    let spec = InstanceSpec::new(
        vec![(c.clone(), 2)],
        points.clone(),
        localglobal::trace_zero_generators(&points),
        opts(7, 3),
    )
    .unwrap();
    let (certified, degenerate, witness, global) = counterexample_checks(&spec)?;
    let detail = format!(
        "{certified}/{} good primes certified ({degenerate} with M = I), witness {}, global {}",
        spec.primes().len(),
        witness.as_ref().map_or("none".into(), |w| w.to_string()),
        if global.is_found() { "found" } else { "not-found" }
    );
    match built {
        Err(Error::DependentPoints(why)) => Err(format!("points (1, t) are dependent ({why}); {detail}")),
        Err(e) => Err(e.to_string()),
        Ok(_) if witness.is_none() && !global.is_found() && certified == spec.primes().len() => Ok(detail),
        Ok(_) => Err(detail),
    }
}

fn criterion_6_variant() -> Outcome {
    let f = field(3);
    let c = DrinfeldModule::carlitz(&f);
    let spec = localglobal::build_counterexample(&c, &polys(&f, &["1", "t^2"]), opts(7, 3)).map_err(|e| e.to_string())?;
    let (certified, degenerate, witness, global) = counterexample_checks(&spec)?;
    let good = spec.primes().iter().filter(|w| spec.is_good_prime(w)).count();
    check(certified == good, || format!("{certified} of {good} certified"))?;
    check(degenerate == 0, || "degenerate branch taken over F_3".into())?;
    check(witness.is_none(), || format!("unexpected witness {witness:?}"))?;
    check(!global.is_found(), || "global membership found".into())?;
    Ok(format!(
        "q = 3, points (1, t^2): {certified}/{good} good primes of degree <= 7 certified via Bezout, witness none, global not-found at B = 3"
    ))
}

/// Product module choices with `e_i <= d_i`.
fn random_components(rng: &mut ChaCha8Rng, f: &FiniteField) -> Vec<(DrinfeldModule, usize)> {
    let m = test_modules(f);
    match rng.next_u64() % 4 {
        0 => vec![(m[0].clone(), 1)],
        1 => vec![(m[1].clone(), 2)],
        2 => vec![(m[0].clone(), 1), (m[2].clone(), 1)],
        _ => vec![(m[1].clone(), 1), (m[2].clone(), 1)],
    }
}

fn random_tuple(rng: &mut ChaCha8Rng, f: &FiniteField, width: usize, deg: usize) -> Vec<Poly> {
    (0..width).map(|_| random_poly(rng, f, deg)).collect()
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut member_instances = 0;
    for i in 0..20 {
        let f = field([2, 3][i % 2]);
        let comps = random_components(&mut rng, &f);
        let width: usize = comps.iter().map(|(_, e)| e).sum();
        let s = 1 + (rng.next_u64() % 2) as usize;
        let gens: Vec<Vec<Poly>> = (0..s).map(|_| random_tuple(&mut rng, &f, width, 3)).collect();
        let probe = InstanceSpec::new(comps.clone(), vec![Poly::zero(&f); width], gens.clone(), opts(5, 2)).unwrap();
        let mut point = vec![Poly::zero(&f); width];
        for g in &gens {
            let a = random_poly(&mut rng, &f, 2);
            for (x, y) in point.iter_mut().zip(probe.act(&a, g)) {
                *x = &*x + &y;
            }
        }
        let spec = probe.with_point(point).unwrap();
        let t = localglobal::scan_membership(&spec, &Sequential).map_err(|e| e.to_string())?.tally();
        check(t.hits == t.good, || format!("instance {i}: local membership {}/{}", t.hits, t.good))?;
        member_instances += 1;
    }
    let mut at6 = 0;
    let mut escalated = Vec::new();
    let mut made = 0;
    let mut attempt = 0;
    while made < 10 {
        attempt += 1;
        let f = field([2, 3][made % 2]);
        let comps = random_components(&mut rng, &f);
        let width: usize = comps.iter().map(|(_, e)| e).sum();
        let gens = vec![random_tuple(&mut rng, &f, width, 3)];
        let point = random_tuple(&mut rng, &f, width, 3);
        let spec = InstanceSpec::new(comps, point, gens, opts(6, 2)).unwrap();
        // bounded certificate that P is not in Lambda + tor
        if localglobal::global_membership_bounded(&spec).map_err(|e| e.to_string())?.is_found() {
            continue;
        }
        made += 1;
        if localglobal::find_witness(&spec, &Sequential).map_err(|e| e.to_string())?.is_some() {
            at6 += 1;
        } else {
            let mut wider = spec.clone();
            wider.options.degree_bound = 8;
            let w = localglobal::find_witness(&wider, &Sequential).map_err(|e| e.to_string())?;
            escalated.push(format!("instance {made} (attempt {attempt}): witness at D = 8: {w:?}"));
        }
    }
    check(at6 >= 8, || format!("only {at6}/10 witnesses at D = 6; {escalated:?}"))?;
    Ok(format!(
        "{member_instances}/20 constructed members hold locally at every good prime of degree <= 5; witnesses at D = 6 in {at6}/10 independent instances{}",
        if escalated.is_empty() { String::new() } else { format!(" ({})", escalated.join("; ")) }
    ))
}

/// Fraction of good primes `W != P` of degree `<= d` at which `red x` has no `P`-part.
fn direct_vanishing(m: &DrinfeldModule, x: &Poly, p: &PrimeIdeal, d: usize) -> (usize, usize) {
    let mut hits = 0;
    let mut good = 0;
    for w in primes_of_degree_up_to(m.base(), d).filter(|w| w != p && m.is_good_prime(w)) {
        let r = m.reduce_at(&w).unwrap();
        let om = OperatorModule::new(&r);
        let v = om.point(&[r.carrier().reduce(x)]).unwrap();
        good += 1;
        hits += (om.pi_order(&v, p) == 0) as usize;
    }
    (hits, good)
}

fn criterion_8_literal() -> Outcome {
    let f = field(2);
    let c = DrinfeldModule::carlitz(&f);
    let t = PrimeIdeal::parse(&f, "t").unwrap();
    let families = vec![(c.clone(), polys(&f, &["1"]))];
    let (hits, good) = direct_vanishing(&c, &poly(&f, "1"), &t, 9);
    let rank2 = rank2_density()?;
    match localglobal::vanishing_density(&f, &families, &t, &opts(9, 3), &Sequential) {
        Err(e) => Err(format!(
            "x = 1: {e}; direct count {hits}/{good} = {:.4}; rank-2 part: {rank2}",
            hits as f64 / good as f64
        )),
        Ok(r) => {
            let frac = r.tally().fraction();
            check(frac > 0.0, || format!("fraction {frac}"))?;
            Ok(format!("fraction {frac:.4}; {rank2}"))
        }
    }
}

fn rank2_density() -> Result<String, String> {
    let f = field(2);
    let m = DrinfeldModule::parse(&f, &["t", "1", "1"]).unwrap();
    let t = PrimeIdeal::parse(&f, "t").unwrap();
    let r = localglobal::vanishing_density(&f, &[(m, polys(&f, &["1", "t^2"]))], &t, &opts(9, 3), &Sequential)
        .map_err(|e| e.to_string())?;
    let frac = r.tally().fraction();
    check(frac > 0.0, || format!("rank-2 fraction {frac}"))?;
    Ok(format!("phi_t = t + T + T^2 with points (1, t^2): fraction {frac:.4}"))
}

fn criterion_8_variant() -> Outcome {
    let f = field(2);
    let c = DrinfeldModule::carlitz(&f);
    let t = PrimeIdeal::parse(&f, "t").unwrap();
    let x = poly(&f, "t^2");
    let r = localglobal::vanishing_density(&f, &[(c.clone(), vec![x.clone()])], &t, &opts(9, 3), &Sequential)
        .map_err(|e| e.to_string())?;
    let tally = r.tally();
    let (hits, good) = direct_vanishing(&c, &x, &t, 9);
    check(tally.hits == hits && tally.good == good, || "harness disagrees with direct count".into())?;
    check(tally.fraction() > 0.0, || "fraction is zero".into())?;
    Ok(format!(
        "Carlitz/F_2, x = t^2, P = (t), D = 9: {}/{} = {:.4}; {}",
        tally.hits,
        tally.good,
        tally.fraction(),
        rank2_density()?
    ))
}

fn direct_matching(m: &DrinfeldModule, x: &Poly, tor: &Poly, p: &PrimeIdeal, d: usize) -> (usize, usize) {
    let mut hits = 0;
    let mut good = 0;
    for w in primes_of_degree_up_to(m.base(), d).filter(|w| w != p && m.is_good_prime(w)) {
        let r = m.reduce_at(&w).unwrap();
        let om = OperatorModule::new(&r);
        let xv = om.point(&[r.carrier().reduce(x)]).unwrap();
        let tv = om.point(&[r.carrier().reduce(tor)]).unwrap();
        good += 1;
        hits += (om.primary_part(&xv, p) == om.primary_part(&tv, p)) as usize;
    }
    (hits, good)
}

fn criterion_9_literal() -> Outcome {
    let f = field(2);
    let c = DrinfeldModule::carlitz(&f);
    let t = PrimeIdeal::parse(&f, "t").unwrap();
    let (x, tor) = (poly(&f, "1"), poly(&f, "t"));
    let (hits, good) = direct_matching(&c, &x, &tor, &t, 8);
    match localglobal::torsion_matching_density(&c, &x, &tor, &t, 1, 8, &opts(8, 3), &Sequential) {
        Err(e) => Err(format!("x = 1: {e}; direct count {hits}/{good} = {:.4}", hits as f64 / good as f64)),
        Ok(r) => {
            let frac = r.tally().fraction();
            check(frac > 0.0, || format!("fraction {frac}"))?;
            Ok(format!("fraction {frac:.4}"))
        }
    }
}

fn criterion_9_variant() -> Outcome {
    let f = field(2);
    let c = DrinfeldModule::carlitz(&f);
    let t = PrimeIdeal::parse(&f, "t").unwrap();
    let (x, tor) = (poly(&f, "t^2"), poly(&f, "t"));
    let r = localglobal::torsion_matching_density(&c, &x, &tor, &t, 1, 8, &opts(8, 3), &Sequential)
        .map_err(|e| e.to_string())?;
    let tally = r.tally();
    check(tally.undecided == 0, || format!("{} undecided primes", tally.undecided))?;
    let (hits, good) = direct_matching(&c, &x, &tor, &t, 8);
    check(tally.hits == hits && tally.good == good, || "harness disagrees with direct count".into())?;
    check(tally.fraction() > 0.0, || "fraction is zero".into())?;
    let within = r.records.iter().filter(|x| x.verdict == DensityVerdict::Hit).count();
    Ok(format!(
        "Carlitz/F_2, x = t^2, T = t, P = (t), m = 1, D = 8: {within}/{} = {:.4}",
        tally.good,
        tally.fraction()
    ))
}

/// First `n` with `w^n y` in `A g`, by listing `A g` and walking the orbit.
fn brute_orbit(om: &OperatorModule, y: &[FieldElem], g: &[FieldElem], w: &Poly) -> Option<usize> {
    let f = om.base().clone();
    let dim = om.dim();
    let sub: BTreeSet<Vec<u64>> = Poly::all_up_to_degree(&f, dim.saturating_sub(1))
        .map(|a| key(&om.act(&a, g)))
        .collect();
    let size = f.order().pow(dim as u32) as usize;
    let mut cur = y.to_vec();
    for n in 0..=size {
        if sub.contains(&key(&cur)) {
            return Some(n);
        }
        cur = om.act(w, &cur);
    }
    None
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut compared = 0;
    for (p, max_deg) in [(2u64, 10usize), (3, 6)] {
        let f = field(p);
        for m in test_modules(&f) {
            let x = random_poly(&mut rng, &f, 3);
            let g = random_poly(&mut rng, &f, 3);
            for w in primes_of_degree_up_to(&f, max_deg).filter(|w| m.is_good_prime(w)) {
                let r = m.reduce_at(&w).map_err(|e| e.to_string())?;
                let om = OperatorModule::new(&r);
                let y = om.point(&[r.carrier().reduce(&x)]).map_err(|e| e.to_string())?;
                let gv = om.point(&[r.carrier().reduce(&g)]).map_err(|e| e.to_string())?;
                for wp in polys(&f, &["t", "t+1", "t^2+1"]) {
                    let (fast, _) = localglobal::local_orbit_hit(&om, &y, std::slice::from_ref(&gv), &wp);
                    let slow = brute_orbit(&om, &y, &gv, &wp);
                    check(fast == slow, || format!("orbit mismatch: {m}, W = {w}, w = {wp}: {fast:?} vs {slow:?}"))?;
                    compared += 1;
                }
            }
        }
    }
    let mut support_runs = 0;
    for p in [2, 3] {
        let f = field(p);
        for m in test_modules(&f) {
            let x = random_poly(&mut rng, &f, 3);
            let w = random_poly(&mut rng, &f, 2);
            let w = if w.is_zero() { Poly::t(&f) } else { w };
            let r = localglobal::support_scan(&m, &x, &x, &w, &w, 5, 3, &Sequential).map_err(|e| e.to_string())?;
            check(r.records.iter().filter(|s| s.good).all(|s| s.first_n == Some(1)), || {
                format!("support n != 1 somewhere for {m}")
            })?;
            check(
                matches!(&r.global, GlobalSupport::Found { n: 1, torsion, .. } if torsion.is_zero()),
                || format!("global support for {m}: {:?}", r.global),
            )?;
            support_runs += 1;
        }
    }
    Ok(format!(
        "{compared} local orbit decisions match brute-force enumeration (modules up to 2^10 elements); support P = Q, w1 = w2 gives n = 1 and T = 0 in {support_runs}/{support_runs} runs"
    ))
}

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn cli_report(config: &str, jobs: usize) -> Result<(Vec<u8>, i32), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let status = Process::new(env!("CARGO_BIN_EXE_drinfeld-lab"))
        .args(["run", "counterexample"])
        .arg(configs_dir().join(config))
        .args(["-D", "7", "-B", "3", "--jobs", &jobs.to_string(), "--out"])
        .arg(dir.path())
        .env_remove("DRINFELD_LAB_OUT")
        .output()
        .map_err(|e| e.to_string())?;
    let bytes = std::fs::read(dir.path().join("report.json")).map_err(|e| e.to_string())?;
    Ok((bytes, status.status.code().unwrap_or(-1)))
}

fn criterion_11() -> Outcome {
    let mut parts = Vec::new();
    for config in ["carlitz-e2.json", "carlitz-f3-e2.json"] {
        let (a, ca) = cli_report(config, 1)?;
        let (b, cb) = cli_report(config, 8)?;
        check(a == b && ca == cb, || format!("{config}: reports differ between --jobs 1 and --jobs 8"))?;
        parts.push(format!("{config} ({} bytes, exit {ca})", a.len()));
    }
    Ok(format!("byte-identical report.json for --jobs 1 and --jobs 8: {}", parts.join(", ")))
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("1", criterion_1),
        ("2", criterion_2),
        ("3", criterion_3),
        ("4", criterion_4),
        ("5", criterion_5),
        ("6", criterion_6_literal),
        ("6 (q = 3 variant)", criterion_6_variant),
        ("7", criterion_7),
        ("8", criterion_8_literal),
        ("8 (independent point variant)", criterion_8_variant),
        ("9", criterion_9_literal),
        ("9 (independent point variant)", criterion_9_variant),
        ("10", criterion_10),
        ("11", criterion_11),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|x| name.starts_with(x.as_str())) {
            continue;
        }
        let started = std::time::Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS criterion {name}: {msg} [{secs:.1}s]"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name}: {msg} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        println!("acceptance: {failed} criterion line(s) failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
