use std::path::{Path, PathBuf};
use std::time::Instant;

use drinfeld_core::localglobal::PrimeMap;
use serde_json::{json, Value};

use crate::commands::{self, build_instance, Command, Overrides};
use crate::config::{build_field, Config, Context};
use crate::error::LabError;

pub const TOOL: &str = "drinfeld-lab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const OUT_ENV: &str = "DRINFELD_LAB_OUT";

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub summary: Vec<(String, String)>,
    pub exit_code: i32,
    pub error: Option<String>,
}

/// Runs a command on an already parsed config.
pub fn run(cmd: Command, config: Config, ov: &Overrides, map: &impl PrimeMap) -> Outcome {
    let config = commands::effective_config(config, ov);
    let seed = config.options.seed.unwrap_or(0);
    let embedded = serde_json::to_value(&config).expect("config serialises");
    let outcome = Context::new(config).and_then(|ctx| commands::dispatch(cmd, &ctx, map));
    let (status, result, summary, exit_code, error) = match outcome {
        Ok((result, summary)) => ("ok", result, summary, 0, None),
        Err(e) => ("error", Value::Null, Vec::new(), e.exit_code(), Some(e.to_string())),
    };
    let report = json!({
        "tool": TOOL,
        "version": VERSION,
        "command": cmd.name(),
        "seed": seed,
        "status": status,
        "exit_code": exit_code,
        "error": error,
        "config": embedded,
        "result": result,
    });
    Outcome {
        report,
        summary,
        exit_code,
        error,
    }
}

/// Reads the command and config embedded in an earlier report.
pub fn load_replay(path: &Path) -> Result<(Command, Config), LabError> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| LabError::config("<root>", e.to_string()))?;
    let cmd = v
        .get("command")
        .and_then(Value::as_str)
        .and_then(Command::from_name)
        .ok_or_else(|| LabError::config("command", "missing or unknown command"))?;
    let config = v
        .get("config")
        .ok_or_else(|| LabError::config("config", "report has no embedded config"))?;
    Ok((cmd, Config::from_json(&config.to_string())?))
}

/// `DRINFELD_LAB_OUT` wins over `--out`; the default is the current directory.
pub fn output_dir(flag: Option<PathBuf>) -> PathBuf {
    match std::env::var_os(OUT_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => flag.unwrap_or_else(|| PathBuf::from(".")),
    }
}

pub fn report_text(report: &Value) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serialises");
    s.push('\n');
    s
}

/// Writes `report.json` and `summary.csv`.
pub fn write_outputs(dir: &Path, outcome: &Outcome, started: Instant) -> Result<(), LabError> {
    let io = |e: std::io::Error| LabError::Io(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    std::fs::write(dir.join("report.json"), report_text(&outcome.report)).map_err(io)?;
    let csv_err = |e: csv::Error| LabError::Io(format!("{}: {e}", dir.display()));
    let mut w = csv::Writer::from_path(dir.join("summary.csv")).map_err(csv_err)?;
    w.write_record(["metric", "value"]).map_err(csv_err)?;
    w.write_record(["command", outcome.report["command"].as_str().unwrap_or("")]).map_err(csv_err)?;
    w.write_record(["status", outcome.report["status"].as_str().unwrap_or("")]).map_err(csv_err)?;
    for (k, v) in &outcome.summary {
        w.write_record([k, v]).map_err(csv_err)?;
    }
    w.write_record(["exit_code", &outcome.exit_code.to_string()]).map_err(csv_err)?;
    w.write_record(["wall_ms", &started.elapsed().as_millis().to_string()]).map_err(csv_err)?;
    w.flush().map_err(io)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: &'static str,
    pub path: String,
    pub message: String,
}

impl Diagnostic {
    fn error(e: LabError) -> Self {
        let (path, message) = match e {
            LabError::Config { path, message } => (path, message),
            other => (String::new(), other.to_string()),
        };
        Diagnostic {
            severity: "error",
            path,
            message,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({"severity": self.severity, "path": self.path, "message": self.message})
    }
}

/// Schema, field, module and prime checks plus a good/bad prime pre-flight
/// for the instance. Nothing is computed beyond reductions.
pub fn validate(text: &str) -> Vec<Diagnostic> {
    let config = match Config::from_json(text) {
        Ok(c) => c,
        Err(e) => return vec![Diagnostic::error(e)],
    };
    let config = commands::effective_config(config, &Overrides::default());
    let mut out = Vec::new();
    if let Err(e) = build_field(&config.field) {
        return vec![Diagnostic::error(e)];
    }
    // modules one at a time, so every bad module is reported
    let mut good_modules = std::collections::BTreeMap::new();
    for (name, m) in &config.modules {
        let mut single = config.clone();
        single.modules = [(name.clone(), m.clone())].into_iter().collect();
        match Context::new(single) {
            Ok(_) => {
                good_modules.insert(name.clone(), m.clone());
            }
            Err(e) => out.push(Diagnostic::error(e)),
        }
    }
    if config.modules.is_empty() {
        out.push(Diagnostic::error(LabError::config("modules", "at least one module is required")));
    }
    let mut usable = config.clone();
    usable.modules = good_modules;
    if usable.modules.is_empty() {
        return out;
    }
    let ctx = match Context::new(usable) {
        Ok(c) => c,
        Err(e) => {
            out.push(Diagnostic::error(e));
            return out;
        }
    };
    let mut check = |r: Result<(), LabError>| {
        if let Err(e) = r {
            out.push(Diagnostic::error(e));
        }
    };
    if let Some(p) = &config.options.prime {
        check(ctx.prime("options.prime", p).map(drop));
    }
    if let Some(d) = &config.density {
        check(ctx.prime("density.prime", &d.prime).map(drop));
        for (i, f) in d.families.iter().enumerate() {
            check(ctx.module(&format!("density.families[{i}].module"), &f.module).map(drop));
            check(ctx.polys(&format!("density.families[{i}].points"), &f.points).map(drop));
        }
    }
    if let Some(t) = &config.torsion_density {
        check(ctx.module("torsion_density.module", &t.module).map(drop));
        check(ctx.poly("torsion_density.point", &t.point).map(drop));
        check(ctx.poly("torsion_density.torsion", &t.torsion).map(drop));
        check(ctx.prime("torsion_density.prime", &t.prime).map(drop));
    }
    if let Some(o) = &config.orbit {
        check(ctx.poly("orbit.w", &o.w).map(drop));
    }
    if let Some(s) = &config.support {
        check(ctx.module("support.module", &s.module).map(drop));
        for (k, v) in [("p", &s.p), ("q", &s.q), ("w1", &s.w1), ("w2", &s.w2)] {
            check(ctx.poly(&format!("support.{k}"), v).map(drop));
        }
    }
    if let Some(p) = &config.points {
        check(ctx.module("points.module", &p.module).map(drop));
        check(ctx.polys("points.points", &p.points).map(drop));
    }
    if let Some(inst) = &config.instance {
        let components_known = inst.components.iter().all(|c| ctx.modules.contains_key(&c.module));
        match build_instance(&ctx, inst.lambda.is_empty() && components_known) {
            Ok(spec) => {
                for w in spec.warnings() {
                    out.push(Diagnostic {
                        severity: "warning",
                        path: "instance.components".into(),
                        message: w,
                    });
                }
                let bad: Vec<String> = spec
                    .primes()
                    .iter()
                    .filter(|w| !spec.is_good_prime(w))
                    .map(ToString::to_string)
                    .collect();
                out.push(Diagnostic {
                    severity: "note",
                    path: "instance".into(),
                    message: format!(
                        "{} primes of degree <= {}, bad: [{}]",
                        spec.primes().len(),
                        spec.options.degree_bound,
                        bad.join(", ")
                    ),
                });
            }
            Err(e) => out.push(Diagnostic::error(e)),
        }
    }
    out
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == "error")
}

#[cfg(test)]
mod tests {
    use super::*;
    use drinfeld_core::localglobal::Sequential;

    fn carlitz(extra: &str) -> Config {
        Config::from_json(&format!(
            r#"{{"field": {{"p": 2}}, "modules": {{"carlitz": {{"phi_t": ["t", "1"]}}}}{extra}}}"#
        ))
        .unwrap()
    }

    #[test]
    fn structure_report() {
        let ov = Overrides {
            prime: Some("t^2+t+1".into()),
            ..Overrides::default()
        };
        let out = run(Command::Structure, carlitz(""), &ov, &Sequential);
        assert_eq!(out.exit_code, 0, "{:?}", out.error);
        assert_eq!(
            out.report["result"]["modules"]["carlitz"]["invariant_factors"],
            json!(["t^2+t"])
        );
    }

    #[test]
    fn missing_prime_is_a_config_error() {
        let out = run(Command::Reduce, carlitz(""), &Overrides::default(), &Sequential);
        assert_eq!(out.exit_code, 2);
        assert!(out.error.unwrap().starts_with("options.prime"));
    }

    #[test]
    fn validate_examples() {
        let bad = r#"{"field": {"p": 2, "m": 2, "modulus": "u^2+1"}, "modules": {"c": {"phi_t": ["t", "1"]}}}"#;
        let d = validate(bad);
        assert!(has_errors(&d));
        assert!(d[0].message.contains("modulus not irreducible"));
        let bad = r#"{"field": {"p": 2}, "modules": {"c": {"phi_t": ["1", "1"]}, "ok": {"phi_t": ["t", "1"]}}}"#;
        let d = validate(bad);
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("D(phi_t) = t"), "{}", d[0].message);
        assert_eq!(d[0].path, "modules.c.phi_t");
        let good = r#"{"field": {"p": 2}, "modules": {"carlitz": {"phi_t": ["t", "1"]}}}"#;
        assert!(validate(good).is_empty());
    }

    #[test]
    fn validate_reports_instance_preflight() {
        let text = r#"{"field": {"p": 2}, "modules": {"m": {"phi_t": ["t", "1", "t+1"]}},
            "instance": {"components": [{"module": "m", "multiplicity": 3}], "point": ["1", "t", "0"]}}"#;
        let d = validate(text);
        assert!(!has_errors(&d));
        assert!(d.iter().any(|x| x.severity == "warning"));
        let note = d.iter().find(|x| x.severity == "note").unwrap();
        assert!(note.message.contains("bad: [t+1]"), "{}", note.message);
    }
}
