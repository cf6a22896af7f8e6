//! Command implementations. Each command turns a [`Context`] into a JSON
//! result and a list of summary metrics.

use drinfeld_core::localglobal::{
    self, CounterexampleCertificate, DensityReport, DensityVerdict, GlobalMembership, GlobalOrbit,
    GlobalSupport, InstanceSpec, MembershipCertificate, PrimeMap, ScanOptions, Tally,
};
use drinfeld_core::poly::primes_of_degree_up_to;
use drinfeld_core::{OperatorModule, Poly, PrimeIdeal};
use serde_json::{json, Value};

use crate::config::{Config, Context};
use crate::error::LabError;

pub const DEFAULT_DEGREE_BOUND: usize = 6;
pub const DEFAULT_COEFF_BOUND: usize = 3;
pub const DEFAULT_N_MAX: usize = 8;
pub const DEFAULT_CAP: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum)]
pub enum Command {
    Info,
    Reduce,
    Structure,
    Order,
    Scan,
    Witness,
    Global,
    Counterexample,
    Certify,
    Density,
    TorsionDensity,
    Orbit,
    Support,
    Detect,
}

impl Command {
    pub const ALL: [Command; 14] = [
        Command::Info,
        Command::Reduce,
        Command::Structure,
        Command::Order,
        Command::Scan,
        Command::Witness,
        Command::Global,
        Command::Counterexample,
        Command::Certify,
        Command::Density,
        Command::TorsionDensity,
        Command::Orbit,
        Command::Support,
        Command::Detect,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Info => "info",
            Command::Reduce => "reduce",
            Command::Structure => "structure",
            Command::Order => "order",
            Command::Scan => "scan",
            Command::Witness => "witness",
            Command::Global => "global",
            Command::Counterexample => "counterexample",
            Command::Certify => "certify",
            Command::Density => "density",
            Command::TorsionDensity => "torsion-density",
            Command::Orbit => "orbit",
            Command::Support => "support",
            Command::Detect => "detect",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

/// Command-line overrides of `options`.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub prime: Option<String>,
    pub degree_bound: Option<usize>,
    pub coeff_bound: Option<usize>,
    pub n_max: Option<usize>,
    pub seed: Option<u64>,
}

/// Applies overrides and fills defaults, so the embedded config replays exactly.
pub fn effective_config(mut config: Config, ov: &Overrides) -> Config {
    let o = &mut config.options;
    o.degree_bound = Some(ov.degree_bound.or(o.degree_bound).unwrap_or(DEFAULT_DEGREE_BOUND));
    o.coeff_bound = Some(ov.coeff_bound.or(o.coeff_bound).unwrap_or(DEFAULT_COEFF_BOUND));
    o.n_max = Some(ov.n_max.or(o.n_max).unwrap_or(DEFAULT_N_MAX));
    o.seed = Some(ov.seed.or(o.seed).unwrap_or(0));
    o.cap = Some(o.cap.unwrap_or(DEFAULT_CAP));
    if ov.prime.is_some() {
        o.prime = ov.prime.clone();
    }
    config
}

pub type CommandOutput = (Value, Vec<(String, String)>);

fn metric(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

fn strs<T: ToString>(xs: &[T]) -> Vec<String> {
    xs.iter().map(ToString::to_string).collect()
}

fn core_err(context: &str) -> impl Fn(drinfeld_core::Error) -> LabError + '_ {
    move |e| LabError::core(context, e)
}

fn scan_options(ctx: &Context) -> ScanOptions {
    let o = &ctx.config.options;
    ScanOptions {
        degree_bound: o.degree_bound.unwrap_or(DEFAULT_DEGREE_BOUND),
        coeff_bound: o.coeff_bound.unwrap_or(DEFAULT_COEFF_BOUND),
        seed: o.seed.unwrap_or(0),
    }
}

fn n_max(ctx: &Context) -> usize {
    ctx.config.options.n_max.unwrap_or(DEFAULT_N_MAX)
}

fn required_prime(ctx: &Context) -> Result<PrimeIdeal, LabError> {
    let s = ctx
        .config
        .options
        .prime
        .as_deref()
        .ok_or_else(|| LabError::config("options.prime", "this command needs --prime"))?;
    ctx.prime("options.prime", s)
}

fn section<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T, LabError> {
    s.as_ref()
        .ok_or_else(|| LabError::config(name, format!("this command needs a {name:?} section")))
}

/// The instance described by `instance`; `trace_zero` replaces `lambda`
/// by the trace-zero generators of the point.
pub fn build_instance(ctx: &Context, trace_zero: bool) -> Result<InstanceSpec, LabError> {
    let inst = section(&ctx.config.instance, "instance")?;
    let mut modules = Vec::new();
    for (i, c) in inst.components.iter().enumerate() {
        let m = ctx.module(&format!("instance.components[{i}].module"), &c.module)?;
        modules.push((m.clone(), c.multiplicity));
    }
    let point = ctx.polys("instance.point", &inst.point)?;
    let lambda = if trace_zero {
        localglobal::trace_zero_generators(&point)
    } else {
        inst.lambda
            .iter()
            .enumerate()
            .map(|(i, g)| ctx.polys(&format!("instance.lambda[{i}]"), g))
            .collect::<Result<Vec<_>, _>>()?
    };
    InstanceSpec::new(modules, point, lambda, scan_options(ctx)).map_err(|e| LabError::config("instance", e.to_string()))
}

fn prime_json(w: &PrimeIdeal) -> Value {
    json!({"prime": w.to_string(), "degree": w.degree()})
}

fn with_prime(w: &PrimeIdeal, mut extra: Value) -> Value {
    let mut v = prime_json(w);
    v.as_object_mut().unwrap().append(extra.as_object_mut().unwrap());
    v
}

fn tally_json(t: &Tally) -> Value {
    json!({
        "scanned": t.scanned,
        "good": t.good,
        "bad": t.bad,
        "hits": t.hits,
        "undecided": t.undecided,
        "fraction": t.fraction(),
    })
}

fn tally_metrics(t: &Tally) -> Vec<(String, String)> {
    vec![
        metric("primes_scanned", t.scanned),
        metric("good_primes", t.good),
        metric("bad_primes", t.bad),
        metric("hits", t.hits),
        metric("undecided", t.undecided),
        metric("fraction", format!("{:.6}", t.fraction())),
    ]
}

fn membership_json(g: &GlobalMembership) -> Value {
    match g {
        GlobalMembership::Found(c) => json!({"found": true, "certificate": certificate_json(c)}),
        GlobalMembership::NotFound { coeff_bound } => json!({"found": false, "coeff_bound": coeff_bound}),
    }
}

fn certificate_json(c: &MembershipCertificate) -> Value {
    json!({"coeffs": strs(&c.coeffs), "torsion": strs(&c.torsion)})
}

fn matrix_json(m: &[Vec<Poly>]) -> Value {
    m.iter().map(|r| strs(r)).collect::<Vec<_>>().into()
}

fn counterexample_json(c: &CounterexampleCertificate) -> Value {
    with_prime(
        &c.prime,
        json!({
            "alphas": strs(&c.alphas),
            "relations": matrix_json(&c.relations),
            "bezout": strs(&c.bezout),
            "matrix": matrix_json(&c.matrix),
            "degenerate": c.degenerate,
            "local_member": c.local_member,
        }),
    )
}

fn density_json(r: &DensityReport) -> Value {
    let records: Vec<Value> = r
        .records
        .iter()
        .map(|d| {
            let verdict = match d.verdict {
                DensityVerdict::Bad => "bad",
                DensityVerdict::Excluded => "excluded",
                DensityVerdict::Hit => "hit",
                DensityVerdict::Miss => "miss",
                DensityVerdict::Undecided => "undecided",
            };
            with_prime(&d.prime, json!({"verdict": verdict, "extension": d.extension}))
        })
        .collect();
    json!({"tally": tally_json(&r.tally()), "records": records})
}

pub fn dispatch(cmd: Command, ctx: &Context, map: &impl PrimeMap) -> Result<CommandOutput, LabError> {
    match cmd {
        Command::Info => info(ctx),
        Command::Reduce => reduce(ctx),
        Command::Structure => structure(ctx),
        Command::Order => order(ctx),
        Command::Scan => scan(ctx, map),
        Command::Witness => witness(ctx, map),
        Command::Global => global(ctx),
        Command::Counterexample => counterexample(ctx, map),
        Command::Certify => certify(ctx),
        Command::Density => density(ctx, map),
        Command::TorsionDensity => torsion_density(ctx, map),
        Command::Orbit => orbit(ctx, map),
        Command::Support => support(ctx, map),
        Command::Detect => detect(ctx),
    }
}

fn info(ctx: &Context) -> Result<CommandOutput, LabError> {
    let d = scan_options(ctx).degree_bound;
    let primes: Vec<PrimeIdeal> = primes_of_degree_up_to(&ctx.field, d).collect();
    let mut modules = serde_json::Map::new();
    let mut summary = vec![
        metric("field", &ctx.field),
        metric("field_order", ctx.field.order()),
        metric("primes_up_to_degree_bound", primes.len()),
    ];
    for (name, m) in &ctx.modules {
        let bad: Vec<String> = primes.iter().filter(|w| !m.is_good_prime(w)).map(|w| w.to_string()).collect();
        let torsion = m.torsion_subspace();
        summary.push(metric(&format!("{name}.rank"), m.rank()));
        summary.push(metric(&format!("{name}.bad_primes"), bad.len()));
        modules.insert(
            name.clone(),
            json!({
                "phi_t": m.phi_t().to_string(),
                "rank": m.rank(),
                "torsion_degree_bound": m.torsion_degree_bound(),
                "torsion_basis": strs(&torsion),
                "bad_primes": bad,
            }),
        );
    }
    let result = json!({
        "field": {
            "description": ctx.field.to_string(),
            "characteristic": ctx.field.characteristic(),
            "degree": ctx.field.degree(),
            "order": ctx.field.order(),
        },
        "primes_up_to_degree_bound": primes.len(),
        "modules": modules,
    });
    Ok((result, summary))
}

fn reduce(ctx: &Context) -> Result<CommandOutput, LabError> {
    let w = required_prime(ctx)?;
    let mut modules = serde_json::Map::new();
    let mut summary = vec![metric("prime", &w)];
    for (name, m) in &ctx.modules {
        let v = if m.is_good_prime(&w) {
            let r = m.reduce_at(&w).map_err(core_err(name))?;
            summary.push(metric(&format!("{name}.height"), r.height()));
            json!({
                "good": true,
                "phi_t": r.phi_t().to_string(),
                "field": r.field().to_string(),
                "theta": r.theta().to_string(),
                "rank": r.rank(),
                "height": r.height(),
            })
        } else {
            summary.push(metric(&format!("{name}.height"), "bad"));
            json!({"good": false})
        };
        modules.insert(name.clone(), v);
    }
    Ok((with_prime(&w, json!({"modules": modules})), summary))
}

fn structure(ctx: &Context) -> Result<CommandOutput, LabError> {
    let w = required_prime(ctx)?;
    let mut modules = serde_json::Map::new();
    let mut summary = vec![metric("prime", &w)];
    for (name, m) in &ctx.modules {
        let v = if m.is_good_prime(&w) {
            let om = OperatorModule::new(&m.reduce_at(&w).map_err(core_err(name))?);
            let inv = om.structure();
            summary.push(metric(&format!("{name}.invariant_factors"), &inv));
            json!({
                "good": true,
                "dim": om.dim(),
                "invariant_factors": strs(&inv.factors),
                "cyclic": inv.is_cyclic(),
                "exponent": inv.exponent().map(ToString::to_string),
            })
        } else {
            summary.push(metric(&format!("{name}.invariant_factors"), "bad"));
            json!({"good": false})
        };
        modules.insert(name.clone(), v);
    }
    Ok((with_prime(&w, json!({"modules": modules})), summary))
}

fn order(ctx: &Context) -> Result<CommandOutput, LabError> {
    let pc = section(&ctx.config.points, "points")?;
    let m = ctx.module("points.module", &pc.module)?;
    let points = ctx.polys("points.points", &pc.points)?;
    let sample = localglobal::sample_good_primes(m, 3);
    let local = match &ctx.config.options.prime {
        Some(s) => {
            let w = ctx.prime("options.prime", s)?;
            let r = m.reduce_at(&w).map_err(core_err("options.prime"))?;
            Some((w, r))
        }
        None => None,
    };
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for (i, x) in points.iter().enumerate() {
        let global = localglobal::torsion_order_or_none(m, x, &sample).map_err(core_err("order"))?;
        let mut row = json!({"point": x.to_string(), "torsion_order": global.as_ref().map(ToString::to_string)});
        summary.push(metric(
            &format!("point[{i}].torsion_order"),
            global.as_ref().map_or("none".into(), ToString::to_string),
        ));
        if let Some((w, r)) = &local {
            let om = OperatorModule::new(r);
            let v = om.point(&[r.carrier().reduce(x)]).map_err(core_err("order"))?;
            let o = om.order(&v);
            summary.push(metric(&format!("point[{i}].local_order"), &o));
            row["local"] = with_prime(w, json!({"order": o.to_string()}));
        }
        rows.push(row);
    }
    Ok((json!({"module": pc.module, "points": rows}), summary))
}

fn warnings_json(spec: &InstanceSpec) -> Value {
    spec.warnings().into()
}

fn scan(ctx: &Context, map: &impl PrimeMap) -> Result<CommandOutput, LabError> {
    let spec = build_instance(ctx, false)?;
    let scan = localglobal::scan_membership(&spec, map).map_err(core_err("scan"))?;
    let t = scan.tally();
    let records: Vec<Value> = scan
        .records
        .iter()
        .map(|r| {
            with_prime(
                &r.prime,
                json!({"good": r.member.is_some(), "member": r.member, "module_dim": r.module_dim, "lambda_dim": r.lambda_dim}),
            )
        })
        .collect();
    let result = json!({
        "tally": tally_json(&t),
        "witness": scan.witness().map(ToString::to_string),
        "warnings": warnings_json(&spec),
        "records": records,
    });
    Ok((result, tally_metrics(&t)))
}

fn witness(ctx: &Context, map: &impl PrimeMap) -> Result<CommandOutput, LabError> {
    let spec = build_instance(ctx, false)?;
    let scan = localglobal::scan_membership(&spec, map).map_err(core_err("witness"))?;
    let t = scan.tally();
    let w = scan.witness().cloned();
    let mut summary = vec![metric("witness", w.as_ref().map_or("none".into(), ToString::to_string))];
    summary.extend(tally_metrics(&t));
    let result = json!({
        "witness": w.as_ref().map(prime_json),
        "tally": tally_json(&t),
        "warnings": warnings_json(&spec),
    });
    Ok((result, summary))
}

fn global(ctx: &Context) -> Result<CommandOutput, LabError> {
    let spec = build_instance(ctx, false)?;
    let g = localglobal::global_membership_bounded(&spec).map_err(core_err("global"))?;
    let summary = vec![
        metric("coeff_bound", spec.options.coeff_bound),
        metric("global", if g.is_found() { "found" } else { "not-found" }),
    ];
    Ok((json!({"global": membership_json(&g), "warnings": warnings_json(&spec)}), summary))
}

fn counterexample(ctx: &Context, map: &impl PrimeMap) -> Result<CommandOutput, LabError> {
    let inst = section(&ctx.config.instance, "instance")?;
    let [component] = inst.components.as_slice() else {
        return Err(LabError::config("instance.components", "a counterexample uses exactly one module"));
    };
    let m = ctx.module("instance.components[0].module", &component.module)?;
    let points = ctx.polys("instance.point", &inst.point)?;
    let spec = localglobal::build_counterexample(m, &points, scan_options(ctx)).map_err(core_err("counterexample"))?;
    let primes = spec.primes();
    let certs = map
        .map_primes(&primes, |w| {
            spec.is_good_prime(w).then(|| localglobal::certify_counterexample_at(&spec, w))
        })
        .into_iter()
        .flatten()
        .collect::<Result<Vec<_>, _>>()
        .map_err(core_err("counterexample"))?;
    let scan = localglobal::scan_membership(&spec, map).map_err(core_err("counterexample"))?;
    let witness = scan.witness().cloned();
    let g = localglobal::global_membership_bounded(&spec).map_err(core_err("counterexample"))?;
    let t = scan.tally();
    let summary = vec![
        metric("primes_scanned", t.scanned),
        metric("good_primes", t.good),
        metric("certified", certs.len()),
        metric("degenerate", certs.iter().filter(|c| c.degenerate).count()),
        metric("local_members", t.hits),
        metric("witness", witness.as_ref().map_or("none".into(), ToString::to_string)),
        metric("global", if g.is_found() { "found" } else { "not-found" }),
    ];
    let result = json!({
        "lambda": matrix_json(spec.lambda_gens()),
        "warnings": warnings_json(&spec),
        "tally": tally_json(&t),
        "witness": witness.as_ref().map(prime_json),
        "global": membership_json(&g),
        "certificates": certs.iter().map(counterexample_json).collect::<Vec<_>>(),
    });
    Ok((result, summary))
}

fn certify(ctx: &Context) -> Result<CommandOutput, LabError> {
    let w = required_prime(ctx)?;
    let spec = build_instance(ctx, true)?;
    if !spec.is_good_prime(&w) {
        return Err(LabError::config("options.prime", format!("{w} is a bad prime for the instance")));
    }
    let c = localglobal::certify_counterexample_at(&spec, &w).map_err(core_err("certify"))?;
    let summary = vec![
        metric("prime", &w),
        metric("degenerate", c.degenerate),
        metric("local_member", c.local_member),
    ];
    Ok((counterexample_json(&c), summary))
}

fn density(ctx: &Context, map: &impl PrimeMap) -> Result<CommandOutput, LabError> {
    let dc = section(&ctx.config.density, "density")?;
    let p = ctx.prime("density.prime", &dc.prime)?;
    let mut families = Vec::new();
    for (i, f) in dc.families.iter().enumerate() {
        let m = ctx.module(&format!("density.families[{i}].module"), &f.module)?;
        families.push((m.clone(), ctx.polys(&format!("density.families[{i}].points"), &f.points)?));
    }
    let r = localglobal::vanishing_density(&ctx.field, &families, &p, &scan_options(ctx), map)
        .map_err(core_err("density"))?;
    Ok((density_json(&r), tally_metrics(&r.tally())))
}

fn torsion_density(ctx: &Context, map: &impl PrimeMap) -> Result<CommandOutput, LabError> {
    let tc = section(&ctx.config.torsion_density, "torsion_density")?;
    let m = ctx.module("torsion_density.module", &tc.module)?;
    let x = ctx.poly("torsion_density.point", &tc.point)?;
    let t = ctx.poly("torsion_density.torsion", &tc.torsion)?;
    let p = ctx.prime("torsion_density.prime", &tc.prime)?;
    let cap = ctx.config.options.cap.unwrap_or(DEFAULT_CAP);
    let r = localglobal::torsion_matching_density(m, &x, &t, &p, tc.level, cap, &scan_options(ctx), map)
        .map_err(core_err("torsion-density"))?;
    Ok((density_json(&r), tally_metrics(&r.tally())))
}

fn orbit(ctx: &Context, map: &impl PrimeMap) -> Result<CommandOutput, LabError> {
    let oc = section(&ctx.config.orbit, "orbit")?;
    let w = ctx.poly("orbit.w", &oc.w)?;
    let spec = build_instance(ctx, false)?;
    let r = localglobal::orbit_scan(&spec, &w, n_max(ctx), map).map_err(core_err("orbit"))?;
    let records: Vec<Value> = r
        .records
        .iter()
        .map(|x| with_prime(&x.prime, json!({"good": x.good, "first_hit": x.first_hit, "steps": x.steps})))
        .collect();
    let (global, g_metric) = match &r.global {
        GlobalOrbit::Hit { n, certificate } => (
            json!({"found": true, "n": n, "certificate": certificate_json(certificate)}),
            format!("n={n}"),
        ),
        GlobalOrbit::NotFound { searched } => (json!({"found": false, "searched": searched}), "not-found".into()),
    };
    let t = r.tally();
    let mut summary = tally_metrics(&t);
    summary.push(metric("global", g_metric));
    Ok((json!({"tally": tally_json(&t), "global": global, "records": records}), summary))
}

fn support(ctx: &Context, map: &impl PrimeMap) -> Result<CommandOutput, LabError> {
    let sc = section(&ctx.config.support, "support")?;
    let m = ctx.module("support.module", &sc.module)?;
    let p = ctx.poly("support.p", &sc.p)?;
    let q = ctx.poly("support.q", &sc.q)?;
    let w1 = ctx.poly("support.w1", &sc.w1)?;
    let w2 = ctx.poly("support.w2", &sc.w2)?;
    let d = scan_options(ctx).degree_bound;
    let r = localglobal::support_scan(m, &p, &q, &w1, &w2, d, n_max(ctx), map).map_err(core_err("support"))?;
    let records: Vec<Value> = r
        .records
        .iter()
        .map(|x| with_prime(&x.prime, json!({"good": x.good, "first_n": x.first_n})))
        .collect();
    let good = r.records.iter().filter(|x| x.good).count();
    let resolved = r.records.iter().filter(|x| x.first_n.is_some()).count();
    let (global, g_metric) = match &r.global {
        GlobalSupport::Found { n, torsion, order } => (
            json!({"found": true, "n": n, "torsion": torsion.to_string(), "order": order.to_string()}),
            format!("n={n}"),
        ),
        GlobalSupport::NotFound { searched } => (json!({"found": false, "searched": searched}), "not-found".into()),
    };
    let summary = vec![
        metric("primes_scanned", r.records.len()),
        metric("good_primes", good),
        metric("local_hits", resolved),
        metric("global", g_metric),
    ];
    Ok((json!({"global": global, "records": records}), summary))
}

fn detect(ctx: &Context) -> Result<CommandOutput, LabError> {
    let pc = section(&ctx.config.points, "points")?;
    let m = ctx.module("points.module", &pc.module)?;
    let points = ctx.polys("points.points", &pc.points)?;
    let b = scan_options(ctx).coeff_bound;
    let rel = localglobal::detect_relation(m, &points, b).map_err(core_err("detect"))?;
    let summary = vec![
        metric("coeff_bound", b),
        metric("relation", rel.as_ref().map_or("none".into(), |r| format!("({})", strs(r).join(", ")))),
    ];
    Ok((json!({"coeff_bound": b, "relation": rel.as_ref().map(|r| strs(r))}), summary))
}
