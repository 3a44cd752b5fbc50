//! Command-line front end: argument grammar, dispatch, canonical reports and the on-disk cache.
//!
//! Exit codes: 0 when every check in the report holds, 1 on a verification failure (the report
//! carries the witness), 2 on a usage error.

use std::fs::{self, File};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::cohomology::{self, cocycle_by_name, cocycle_names, h1_dim, is_coboundary, is_cocycle, relative_h1_dim, H1Report};
use crate::contact::verify_bracket_laws;
use crate::densities::{verify_module_law, weight_samples};
use crate::invariants::{catalog, catalog_names, is_invariant, search_invariant, verify_poisson_laws};
use crate::rat::{self, Rat};

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment override for the cache directory.
pub const CACHE_ENV: &str = "SUPERK_CACHE_DIR";

fn parse_rat_arg(s: &str) -> Result<Rat, String> {
    rat::parse_rat(s)
}

#[derive(Parser, Debug)]
#[command(name = "superk", version, about = "Exact computations in the contact superalgebra K(n)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Emit the canonical JSON report.
    #[arg(long, global = true)]
    json: bool,
    /// Write the output here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Cache directory for search results (overrides the environment).
    #[arg(long, global = true, value_name = "DIR")]
    cache_dir: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Super-antisymmetry, super-Jacobi and [X_F, X_G] = X_{F,G} on generators.
    VerifyBracket {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        dmax: u32,
    },
    /// The density action is a representation, at the given weight or at six samples.
    VerifyAction {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_rat_arg, allow_hyphen_values = true)]
        lambda: Option<Rat>,
        #[arg(long, default_value_t = 3)]
        dmax: u32,
    },
    /// Jacobi and Leibniz identities of the Poisson bracket on densities.
    VerifyPoisson {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        dmax: u32,
    },
    /// Known invariant operators at the given weights, each checked for invariance.
    Catalog {
        #[arg(long)]
        n: usize,
        /// Without weights, only the names and weight conditions are listed.
        #[arg(long, value_parser = parse_rat_arg, allow_hyphen_values = true, requires_all = ["mu", "nu"])]
        lambda: Option<Rat>,
        #[arg(long, value_parser = parse_rat_arg, allow_hyphen_values = true, requires_all = ["lambda", "nu"])]
        mu: Option<Rat>,
        #[arg(long, value_parser = parse_rat_arg, allow_hyphen_values = true, requires_all = ["lambda", "mu"])]
        nu: Option<Rat>,
        #[arg(long, default_value_t = 5)]
        dmax: u32,
    },
    /// Basis of invariant binary operators of bounded order.
    SearchInvariant {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_rat_arg, allow_hyphen_values = true)]
        lambda: Rat,
        #[arg(long, value_parser = parse_rat_arg, allow_hyphen_values = true)]
        mu: Rat,
        #[arg(long, value_parser = parse_rat_arg, allow_hyphen_values = true)]
        nu: Rat,
        /// Total order bound; defaults to the complete bound (nu − lambda − mu) + n/2.
        #[arg(long, value_parser = parse_rat_arg)]
        max_order: Option<Rat>,
    },
    /// Names and weight constraints of the known 1-cocycles.
    ListCocycles,
    /// Check the cocycle condition and nontriviality of a named cocycle.
    VerifyCocycle {
        #[arg(long)]
        name: String,
        #[arg(long, value_parser = parse_rat_arg, allow_hyphen_values = true, default_value = "0")]
        lambda: Rat,
        #[arg(long, default_value_t = 3)]
        dmax: u32,
    },
    /// Bounded-order dimension of H¹(K(n); D_{lambda,mu}).
    H1Dim {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_rat_arg, allow_hyphen_values = true)]
        lambda: Rat,
        #[arg(long, value_parser = parse_rat_arg, allow_hyphen_values = true)]
        mu: Rat,
        #[arg(long, default_value_t = 5)]
        max_order: u32,
        /// Relative to the subalgebra of fields free of theta_i.
        #[arg(long, value_name = "I")]
        relative: Option<usize>,
    },
    /// Bounded-order dimension of H¹(K(n), K(n-1)^i; D_{lambda,mu}).
    RelativeH1 {
        #[arg(long)]
        n: usize,
        #[arg(long, value_name = "I")]
        relative: usize,
        #[arg(long, value_parser = parse_rat_arg, allow_hyphen_values = true)]
        lambda: Rat,
        #[arg(long, value_parser = parse_rat_arg, allow_hyphen_values = true)]
        mu: Rat,
        #[arg(long, default_value_t = 5)]
        max_order: u32,
    },
    /// H¹ dimensions at one lambda over the shifts mu − lambda = −1/2, 0, …, 3.
    Report {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_rat_arg, allow_hyphen_values = true)]
        lambda: Rat,
        #[arg(long, default_value_t = 5)]
        max_order: u32,
    },
}

/// A canonical report. Keys are sorted on output and every number is an exact fraction string.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub command: String,
    pub params: Map<String, Value>,
    pub result: Value,
    pub truncation: Value,
    pub verified: bool,
}

impl Report {
    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "engine_version": ENGINE_VERSION,
            "params": self.params,
            "result": self.result,
            "truncation": self.truncation,
            "verified": self.verified,
        })
    }

    fn from_json(v: &Value) -> Option<Report> {
        Some(Report {
            command: v.get("command")?.as_str()?.to_string(),
            params: v.get("params")?.as_object()?.clone(),
            result: v.get("result")?.clone(),
            truncation: v.get("truncation")?.clone(),
            verified: v.get("verified")?.as_bool()?,
        })
    }

    /// Human-readable rendering: one `key: value` line per result field.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}: {}\n", self.command, if self.verified { "verified" } else { "FAILED" });
        for (k, v) in &self.params {
            s.push_str(&format!("  {k} = {}\n", plain(v)));
        }
        render(&mut s, &self.result, 1);
        if !self.truncation.is_null() {
            s.push_str("truncation:\n");
            render(&mut s, &self.truncation, 1);
        }
        s
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn render(s: &mut String, v: &Value, depth: usize) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                match x {
                    Value::Object(_) | Value::Array(_) => {
                        s.push_str(&format!("{pad}{k}:\n"));
                        render(s, x, depth + 1);
                    }
                    _ => s.push_str(&format!("{pad}{k}: {}\n", plain(x))),
                }
            }
        }
        Value::Array(a) => {
            for x in a {
                match x {
                    Value::Object(_) | Value::Array(_) => {
                        s.push_str(&format!("{pad}-\n"));
                        render(s, x, depth + 1);
                    }
                    _ => s.push_str(&format!("{pad}- {}\n", plain(x))),
                }
            }
        }
        other => s.push_str(&format!("{pad}{}\n", plain(other))),
    }
}

fn r(x: &Rat) -> Value {
    Value::String(rat::fmt_rat(x))
}

fn params(pairs: &[(&str, Value)]) -> Map<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn h1_json(rep: &H1Report) -> (Value, Value) {
    let reps: Vec<Value> = rep.representatives.iter().map(|c| Value::String(c.to_string())).collect();
    let result = json!({
        "z_dim": rep.z_dim,
        "b_dim": rep.b_dim,
        "h1_dim": rep.h1_dim,
        "representatives": reps,
        "matched_cocycles": rep.matched,
        "ansatz_size": rep.ansatz_size,
    });
    let truncation = json!({
        "max_order": rep.max_order,
        "generator_dmax": rep.generator_dmax,
        "note": "classes of order above max_order are not seen; a zero dimension means zero at this truncation",
    });
    (result, truncation)
}

fn h1_report(command: &str, n: usize, lambda: &Rat, mu: &Rat, max_order: u32, relative: Option<usize>) -> Report {
    let rep = match relative {
        Some(i) => relative_h1_dim(n, i, lambda, mu, max_order),
        None => h1_dim(n, lambda, mu, max_order),
    };
    let (result, truncation) = h1_json(&rep);
    let mut p = params(&[("n", json!(n)), ("lambda", r(lambda)), ("mu", r(mu)), ("max_order", json!(max_order))]);
    if let Some(i) = relative {
        p.insert("relative".into(), json!(i));
    }
    Report { command: command.into(), params: p, result, truncation, verified: rep.verified }
}

fn usage(msg: String) -> Result<Report, (i32, String)> {
    Err((2, msg))
}

fn check_n(n: usize) -> Result<(), (i32, String)> {
    if (1..=8).contains(&n) {
        Ok(())
    } else {
        Err((2, format!("error: --n must be between 1 and 8, got {n}\n")))
    }
}

fn check_index(i: usize, n: usize) -> Result<(), (i32, String)> {
    if (1..=n).contains(&i) {
        Ok(())
    } else {
        Err((2, format!("error: --relative must be between 1 and {n}, got {i}\n")))
    }
}

/// Canonical cache key of a command: its name and parameters.
fn cache_key(report_params: &Map<String, Value>, command: &str) -> String {
    format!("{command} {}", Value::Object(report_params.clone()))
}

fn cache_file(dir: &Path, key: &str) -> PathBuf {
    let digest = Sha256::digest(key.as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    dir.join(format!("{hex}.json"))
}

/// Serve `compute()` through the cache directory. An advisory lock on the entry serializes
/// concurrent invocations with the same key. Entries from another engine version are misses.
pub fn cached<F>(dir: Option<&Path>, key: &str, version: &str, err: &mut dyn Write, compute: F) -> Report
where
    F: FnOnce() -> Report,
{
    let Some(dir) = dir else { return compute() };
    let path = cache_file(dir, key);
    let file = fs::create_dir_all(dir).and_then(|_| File::options().read(true).write(true).create(true).truncate(false).open(&path));
    let mut file = match file {
        Ok(f) => f,
        Err(e) => {
            let _ = writeln!(err, "warning: cache directory {} unusable ({e}); continuing uncached", dir.display());
            return compute();
        }
    };
    if let Err(e) = file.lock() {
        let _ = writeln!(err, "warning: cannot lock {} ({e}); continuing uncached", path.display());
        return compute();
    }
    let mut text = String::new();
    let _ = file.read_to_string(&mut text);
    if !text.is_empty() {
        let entry: Option<Value> = serde_json::from_str(&text).ok();
        match entry {
            Some(v) if v.get("key").and_then(Value::as_str).is_some() => {
                let same = v.get("engine_version").and_then(Value::as_str) == Some(version)
                    && v.get("key").and_then(Value::as_str) == Some(key);
                if same {
                    if let Some(rep) = v.get("report").and_then(Report::from_json) {
                        let _ = writeln!(err, "cache hit: {}", path.display());
                        return rep;
                    }
                    let _ = writeln!(err, "warning: ignoring corrupted cache entry {}", path.display());
                }
            }
            _ => {
                let _ = writeln!(err, "warning: ignoring corrupted cache entry {}", path.display());
            }
        }
    }
    let rep = compute();
    let entry = json!({ "engine_version": version, "key": key, "report": rep.to_json() });
    let written = file
        .set_len(0)
        .and_then(|_| file.seek(SeekFrom::Start(0)))
        .and_then(|_| file.write_all(entry.to_string().as_bytes()));
    if let Err(e) = written {
        let _ = writeln!(err, "warning: could not write cache entry {} ({e})", path.display());
    }
    rep
}

fn dispatch(cmd: &Command, cache_dir: Option<&Path>, err: &mut dyn Write) -> Result<Report, (i32, String)> {
    let rep = match cmd {
        Command::VerifyBracket { n, dmax } => {
            check_n(*n)?;
            let law = verify_bracket_laws(*n, *dmax);
            Report {
                command: "verify-bracket".into(),
                params: params(&[("n", json!(n)), ("dmax", json!(dmax))]),
                result: json!({ "checked": law.checked, "failure": law.failure }),
                truncation: json!({ "generator_dmax": dmax }),
                verified: law.ok(),
            }
        }
        Command::VerifyAction { n, lambda, dmax } => {
            check_n(*n)?;
            let weights = lambda.clone().map(|l| vec![l]).unwrap_or_else(weight_samples);
            let law = verify_module_law(*n, &weights, *dmax);
            let ws: Vec<Value> = weights.iter().map(r).collect();
            Report {
                command: "verify-action".into(),
                params: params(&[("n", json!(n)), ("weights", Value::Array(ws)), ("dmax", json!(dmax))]),
                result: json!({ "checked": law.checked, "failure": law.failure }),
                truncation: json!({ "generator_dmax": dmax }),
                verified: law.ok(),
            }
        }
        Command::VerifyPoisson { n, dmax } => {
            check_n(*n)?;
            let rep = verify_poisson_laws(*n, &weight_samples(), *dmax);
            Report {
                command: "verify-poisson".into(),
                params: params(&[("n", json!(n)), ("dmax", json!(dmax))]),
                result: json!({ "triples_checked": rep.triples_checked, "failure": rep.failure }),
                truncation: json!({ "monomial_xdeg": dmax }),
                verified: rep.ok(),
            }
        }
        Command::Catalog { n, lambda: None, .. } => {
            check_n(*n)?;
            let list: Vec<Value> = catalog_names(*n).into_iter().map(|(name, w)| json!({ "name": name, "weights": w })).collect();
            Report {
                command: "catalog".into(),
                params: params(&[("n", json!(n))]),
                result: json!({ "entries": list }),
                truncation: Value::Null,
                verified: true,
            }
        }
        Command::Catalog { n, lambda: Some(lambda), mu: Some(mu), nu: Some(nu), dmax } => {
            check_n(*n)?;
            let mut entries = Vec::new();
            let mut ok = true;
            for e in catalog(*n, lambda, mu, nu) {
                let mut ops = Vec::new();
                for b in &e.basis {
                    let c = is_invariant(b, *dmax).map_err(|e| (2, format!("error: {e}\n")))?;
                    ok &= c.invariant;
                    let witness = c.witness.map(|w| format!("X[{}] on ({}, {}) gives {}", w.field.generator, w.inputs.0, w.inputs.1, w.value));
                    ops.push(json!({ "operator": b.to_string(), "invariant": c.invariant, "witness": witness }));
                }
                entries.push(json!({ "name": e.name, "note": e.note, "operators": ops }));
            }
            Report {
                command: "catalog".into(),
                params: params(&[("n", json!(n)), ("lambda", r(lambda)), ("mu", r(mu)), ("nu", r(nu)), ("dmax", json!(dmax))]),
                result: json!({ "entries": entries }),
                truncation: json!({ "generator_dmax": dmax }),
                verified: ok,
            }
        }
        Command::Catalog { .. } => return usage("error: --lambda, --mu and --nu go together\n".into()),
        Command::SearchInvariant { n, lambda, mu, nu, max_order } => {
            check_n(*n)?;
            let mo = max_order.clone().unwrap_or_else(|| nu - lambda - mu + rat::frac(*n as i64, 2));
            let p = params(&[("n", json!(n)), ("lambda", r(lambda)), ("mu", r(mu)), ("nu", r(nu)), ("max_order", r(&mo))]);
            let key = cache_key(&p, "search-invariant");
            cached(cache_dir, &key, ENGINE_VERSION, err, || {
                let s = search_invariant(*n, lambda, mu, nu, &mo);
                let basis: Vec<Value> = s.basis.iter().map(|b| Value::String(b.to_string())).collect();
                Report {
                    command: "search-invariant".into(),
                    params: p.clone(),
                    result: json!({ "dim": s.dim(), "basis": basis, "ansatz_size": s.ansatz_size }),
                    truncation: json!({ "max_order": r(&mo), "verification_dmax": 5 }),
                    verified: s.verified,
                }
            })
        }
        Command::ListCocycles => {
            let list: Vec<Value> = cocycle_names().into_iter().map(|(name, app)| json!({ "name": name, "applicability": app })).collect();
            Report {
                command: "list-cocycles".into(),
                params: Map::new(),
                result: json!({ "cocycles": list }),
                truncation: Value::Null,
                verified: true,
            }
        }
        Command::VerifyCocycle { name, lambda, dmax } => {
            let Some(entry) = cocycle_by_name(name, lambda) else {
                let names: Vec<String> = cocycle_names().into_iter().map(|(n, _)| n).collect();
                return usage(format!("error: unknown cocycle `{name}`; known: {}\n", names.join(", ")));
            };
            let y = &entry.cochain;
            let w = is_cocycle(y, *dmax).map_err(|e| (2, format!("error: {e}\n")))?;
            let order = y.half_order().div_ceil(2) + 2;
            let nontrivial = w.is_none() && is_coboundary(y, order).map_err(|e| (2, format!("error: {e}\n")))?.is_none();
            Report {
                command: "verify-cocycle".into(),
                params: params(&[("name", json!(name)), ("lambda", r(&y.lambda)), ("dmax", json!(dmax))]),
                result: json!({
                    "n": y.n,
                    "mu": r(&y.mu),
                    "cochain": y.to_string(),
                    "odd": y.parity().unwrap_or(false),
                    "cocycle": w.is_none(),
                    "witness": w.map(|w| w.to_string()),
                    "nontrivial": nontrivial,
                    "applicability": entry.applicability,
                    "note": entry.note,
                }),
                truncation: json!({ "generator_dmax": dmax, "coboundary_max_order": order }),
                verified: nontrivial,
            }
        }
        Command::H1Dim { n, lambda, mu, max_order, relative } => {
            check_n(*n)?;
            if let Some(i) = relative {
                check_index(*i, *n)?;
            }
            let mut p = params(&[("n", json!(n)), ("lambda", r(lambda)), ("mu", r(mu)), ("max_order", json!(max_order))]);
            if let Some(i) = relative {
                p.insert("relative".into(), json!(i));
            }
            let key = cache_key(&p, "h1-dim");
            cached(cache_dir, &key, ENGINE_VERSION, err, || h1_report("h1-dim", *n, lambda, mu, *max_order, *relative))
        }
        Command::RelativeH1 { n, relative, lambda, mu, max_order } => {
            check_n(*n)?;
            check_index(*relative, *n)?;
            let p = params(&[("n", json!(n)), ("lambda", r(lambda)), ("mu", r(mu)), ("max_order", json!(max_order)), ("relative", json!(relative))]);
            let key = cache_key(&p, "relative-h1");
            cached(cache_dir, &key, ENGINE_VERSION, err, || h1_report("relative-h1", *n, lambda, mu, *max_order, Some(*relative)))
        }
        Command::Report { n, lambda, max_order } => {
            check_n(*n)?;
            let p = params(&[("n", json!(n)), ("lambda", r(lambda)), ("max_order", json!(max_order))]);
            let key = cache_key(&p, "report");
            cached(cache_dir, &key, ENGINE_VERSION, err, || {
                let mut rows = Vec::new();
                let mut ok = true;
                for twice in -1..=6 {
                    let mu = lambda + rat::frac(twice, 2);
                    let rep = cohomology::h1_dim(*n, lambda, &mu, *max_order);
                    ok &= rep.verified;
                    rows.push(json!({ "mu": r(&mu), "h1_dim": rep.h1_dim, "matched_cocycles": rep.matched }));
                }
                Report {
                    command: "report".into(),
                    params: p.clone(),
                    result: json!({ "h1": rows }),
                    truncation: json!({ "max_order": max_order, "generator_dmax": cohomology::search::CONSTRAINT_DMAX }),
                    verified: ok,
                }
            })
        }
    };
    Ok(rep)
}

/// Run one invocation. Returns the exit code; report text goes to `out`, diagnostics to `err`.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let cache_dir = cli.cache_dir.clone().or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from));
    let rep = match dispatch(&cli.command, cache_dir.as_deref(), err) {
        Ok(r) => r,
        Err((code, msg)) => {
            let _ = write!(err, "{msg}");
            return code;
        }
    };
    let text = if cli.json {
        let mut s = serde_json::to_string_pretty(&rep.to_json()).expect("serializable");
        s.push('\n');
        s
    } else {
        rep.to_text()
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = fs::write(path, &text) {
                let _ = writeln!(err, "error: cannot write {} ({e})", path.display());
                return 2;
            }
        }
        None => {
            let _ = write!(out, "{text}");
        }
    }
    if rep.verified {
        0
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("superk").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_capture(&["h1-dim", "--n", "3"]).0, 2);
        assert_eq!(run_capture(&["h1-dim", "--n", "3", "--lambda", "x", "--mu", "0"]).0, 2);
        assert_eq!(run_capture(&["frobnicate"]).0, 2);
        assert_eq!(run_capture(&["verify-cocycle", "--name", "nope"]).0, 2);
    }

    #[test]
    fn list_and_verify_cocycle() {
        let (code, out, _) = run_capture(&["list-cocycles", "--json"]);
        assert_eq!(code, 0);
        assert!(out.contains("Y^3_{-1/2,0}"));
        let (code, out, _) = run_capture(&["verify-cocycle", "--name", "Y^2_{l,l}", "--lambda", "1/3", "--json"]);
        assert_eq!(code, 0, "{out}");
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["result"]["cocycle"], json!(true));
    }

    #[test]
    fn h1_json_schema() {
        let (code, out, _) = run_capture(&["h1-dim", "--n", "3", "--lambda", "1/4", "--mu", "1/4", "--max-order", "3", "--json"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["result"]["h1_dim"], json!(1));
        assert_eq!(v["params"]["lambda"], json!("1/4"));
        assert_eq!(v["truncation"]["generator_dmax"], json!(3));
        assert_eq!(v["verified"], json!(true));
    }

    #[test]
    fn cache_hit_miss_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let mk = || Report { command: "x".into(), params: Map::new(), result: json!({"v": "1/2"}), truncation: Value::Null, verified: true };
        let mut err = Vec::new();
        let a = cached(Some(dir.path()), "k", "1", &mut err, mk);
        assert!(err.is_empty());
        let b = cached(Some(dir.path()), "k", "1", &mut err, || panic!("should hit"));
        assert_eq!(a, b);
        assert!(String::from_utf8(err.clone()).unwrap().contains("cache hit"));
        let mut err = Vec::new();
        let mut computed = false;
        cached(Some(dir.path()), "k", "2", &mut err, || {
            computed = true;
            mk()
        });
        assert!(computed, "version bump must miss");
        fs::write(cache_file(dir.path(), "k"), "{not json").unwrap();
        let mut err = Vec::new();
        let c = cached(Some(dir.path()), "k", "2", &mut err, mk);
        assert_eq!(c, a);
        assert!(String::from_utf8(err).unwrap().contains("corrupted"));
    }

    #[test]
    fn failed_verification_exits_1() {
        let dir = tempfile::tempdir().unwrap();
        let p = params(&[("n", json!(2)), ("lambda", json!("0")), ("mu", json!("0")), ("max_order", json!(1))]);
        let key = cache_key(&p, "h1-dim");
        let bad = Report {
            command: "h1-dim".into(),
            params: p,
            result: json!({ "witness": "dY(X[x], X[t1])(1) = 1" }),
            truncation: Value::Null,
            verified: false,
        };
        cached(Some(dir.path()), &key, ENGINE_VERSION, &mut Vec::new(), || bad);
        let d = dir.path().to_str().unwrap();
        let (code, out, err) = run_capture(&["h1-dim", "--n", "2", "--lambda", "0", "--mu", "0", "--max-order", "1", "--cache-dir", d]);
        assert_eq!(code, 1);
        assert!(err.contains("cache hit"));
        assert!(out.contains("FAILED") && out.contains("dY(X[x], X[t1])(1) = 1"));
    }
}
