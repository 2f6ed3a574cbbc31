//! Argument parsing and the subcommand handlers.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Ratio;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use expsum::ff::{self, FieldDescriptor, FqElem};
use expsum::lpoly::{ratio_to_string, LPoly};
use expsum::newton::{self, NPolygon};
use expsum::{deform, dwork, oracle, padic, sympow};

use crate::record::{self, canonical_json, CensusRecord, Provenance, RecordKey};
use crate::store::{self, PutOutcome, Store, StoreError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("verification failed: {0}")]
    Verify(String),
    #[error("{0}")]
    Compute(String),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn compute<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Compute(e.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "expsum", version, about = "L-functions of x^d + λx and symmetric powers of the cubic family")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fibre L-polynomials by character sums and by Dwork cohomology.
    Fibre(FibreArgs),
    /// The symmetric-power L-polynomial M_k.
    Mk(MkArgs),
    /// Predicted fibre slopes.
    Slopes(SlopesArgs),
    /// Newton polygon of a JSON polynomial as CSV.
    Polygon(PolygonArgs),
    /// Verification suites.
    Verify(VerifyArgs),
    /// The census store.
    Census(CensusArgs),
}

#[derive(Args, Debug)]
struct FibreArgs {
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = 3)]
    d: u32,
    /// "all", an integer, or comma-separated coordinates in the basis 1, Y, ..
    #[arg(long, default_value = "all")]
    z: String,
    #[arg(long, default_value_t = 1)]
    s: usize,
    #[arg(long)]
    prec: Option<i64>,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long = "csv-polygon")]
    csv_polygon: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Oracle,
    Cohomology,
    Both,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Oracle => "oracle",
            Method::Cohomology => "cohomology",
            Method::Both => "both",
        }
    }
    fn oracle(self) -> bool {
        self != Method::Cohomology
    }
    fn cohomology(self) -> bool {
        self != Method::Oracle
    }
}

#[derive(Args, Debug)]
struct MkArgs {
    #[arg(long)]
    p: u64,
    #[arg(long)]
    k: u32,
    #[arg(long, value_enum, default_value_t = Method::Both)]
    method: Method,
    #[arg(long)]
    prec: Option<i64>,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SlopesArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    p: Vec<u64>,
    #[arg(long, default_value_t = 3)]
    d: u32,
}

#[derive(Args, Debug)]
struct PolygonArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Entry of a "results" array to use.
    #[arg(long, default_value_t = 0)]
    index: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    Identities,
    Fibres,
    Sympow,
    Deform,
    All,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    #[arg(long, value_delimiter = ',')]
    p: Vec<u64>,
    #[arg(long)]
    kmax: Option<u32>,
    #[arg(long, default_value_t = 20)]
    nmax: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Fibre,
    Sympow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CensusOp {
    Put,
    Get,
    List,
}

#[derive(Args, Debug)]
struct CensusArgs {
    #[arg(value_enum)]
    op: CensusOp,
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long, default_value_t = 3)]
    d: u32,
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    #[arg(long)]
    z: Option<String>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long, default_value_t = 1)]
    s: usize,
    #[arg(long, value_enum, default_value_t = Method::Both)]
    method: Method,
    #[arg(long)]
    prec: Option<i64>,
    #[arg(long)]
    force: bool,
}

/// Parses argv (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match dispatch(cli.cmd, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Fibre(a) => cmd_fibre(a, out),
        Command::Mk(a) => cmd_mk(a, out),
        Command::Slopes(a) => cmd_slopes(a, out),
        Command::Polygon(a) => cmd_polygon(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Census(a) => cmd_census(a, out),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })
}

fn emit<T: Serialize>(v: &T, path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let text = canonical_json(v);
    match path {
        Some(p) => write_file(p, &text),
        None => out.write_all(text.as_bytes()).map_err(|e| CliError::Io {
            path: "stdout".into(),
            msg: e.to_string(),
        }),
    }
}

fn check_prime(p: u64) -> Result<()> {
    if p < 5 || !ff::is_prime(p) {
        return Err(CliError::Usage(format!("--p {p}: need a prime p >= 5")));
    }
    Ok(())
}

fn prec_or_default(p: u64, prec: Option<i64>) -> Result<i64> {
    let prec = prec.unwrap_or_else(|| padic::default_prec(p));
    if prec < 1 {
        return Err(CliError::Usage(format!("--prec {prec}: must be positive")));
    }
    Ok(prec)
}

/// Elements named by a --z spec.
fn parse_elements(fld: &FieldDescriptor, spec: &str) -> Result<Vec<FqElem>> {
    let spec = spec.trim();
    if spec == "all" {
        return Ok(fld.elements().filter(|x| !fld.is_zero(x)).collect());
    }
    let parts: Vec<&str> = spec.split(',').collect();
    let nums = parts
        .iter()
        .map(|s| s.trim().parse::<i64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| CliError::Usage(format!("--z {spec}: expected \"all\", an integer or coordinates")))?;
    if nums.len() == 1 {
        return Ok(vec![fld.from_int(nums[0])]);
    }
    if nums.len() != fld.s {
        return Err(CliError::Usage(format!("--z {spec}: expected {} coordinates", fld.s)));
    }
    let mut x = fld.zero();
    for (c, n) in x.coeffs.iter_mut().zip(&nums) {
        *c = n.rem_euclid(fld.p as i64) as u64;
    }
    Ok(vec![x])
}

/// Minimal polynomial of λ over F_p, low degree first.
pub fn minimal_polynomial(fld: &FieldDescriptor, x: &FqElem) -> Vec<u64> {
    let deg = fld.degree_over_prime(x);
    let mut poly = vec![fld.one()];
    let mut conj = x.clone();
    for _ in 0..deg {
        // poly ← poly·(X − conj)
        let mut next = vec![fld.zero(); poly.len() + 1];
        for (i, c) in poly.iter().enumerate() {
            next[i + 1] = fld.add(&next[i + 1], c);
            next[i] = fld.sub(&next[i], &fld.mul(c, &conj));
        }
        poly = next;
        conj = fld.frobenius(&conj);
    }
    poly.iter().map(|c| c.coeffs[0]).collect()
}

fn val_strings(v: &[Option<Ratio<i64>>]) -> Vec<Option<String>> {
    v.iter().map(|o| o.as_ref().map(ratio_to_string)).collect()
}

fn slope_strings(poly: &NPolygon) -> Vec<String> {
    poly.slope_list().iter().map(ratio_to_string).collect()
}

fn coeffs_agree(exact: &LPoly, padic_l: &LPoly, prec: i64) -> Result<bool> {
    let pc = padic_l.padic_coeffs().expect("p-adic polynomial");
    let ring = pc[0].ring();
    let emb = exact.embedded(ring, prec).map_err(compute)?;
    Ok(emb.len() == pc.len() && emb.iter().zip(pc).all(|(a, b)| a.eq_mod(b)))
}

#[derive(Serialize)]
struct FibreResult {
    z: Vec<String>,
    minpoly: Vec<String>,
    exact: Vec<Vec<String>>,
    padic: Vec<record::PadicNumber>,
    valuations: Vec<Option<String>>,
    slopes: Vec<String>,
    predicted: Option<Vec<String>>,
    #[serde(rename = "match")]
    matches: bool,
}

#[derive(Serialize)]
struct FibreOutput {
    p: String,
    d: String,
    s: String,
    prec: String,
    all_match: bool,
    results: Vec<FibreResult>,
}

fn fibre_one(fld: &FieldDescriptor, z: &FqElem, d: u32, prec: i64) -> Result<(FibreResult, NPolygon)> {
    let exact = oracle::fibre_l_exact(fld, z, d).map_err(compute)?;
    let pl = dwork::fibre_l_padic(fld, z, d, prec).map_err(compute)?;
    let agree = coeffs_agree(&exact, &pl, prec)?;
    let poly = newton::polygon_of(&exact).map_err(compute)?;
    let predicted = if fld.s == 1 && !fld.is_zero(z) {
        newton::predicted_fibre_slopes(d, fld.p).ok()
    } else {
        None
    };
    let slopes_ok = predicted.as_ref().is_none_or(|pr| *pr == poly.slope_list());
    let payload = record::payload_of(Some(&exact), Some(&pl));
    Ok((
        FibreResult {
            z: z.coeffs.iter().map(|c| c.to_string()).collect(),
            minpoly: minimal_polynomial(fld, z).iter().map(|c| c.to_string()).collect(),
            exact: payload.exact.unwrap_or_default(),
            padic: payload.padic.unwrap_or_default(),
            valuations: val_strings(&exact.valuations()),
            slopes: slope_strings(&poly),
            predicted: predicted.map(|v| v.iter().map(ratio_to_string).collect()),
            matches: agree && slopes_ok,
        },
        poly,
    ))
}

fn cmd_fibre(a: FibreArgs, out: &mut dyn Write) -> Result<()> {
    check_prime(a.p)?;
    if a.d < 2 || a.d as u64 % a.p == 0 {
        return Err(CliError::Usage(format!("--d {}: need d >= 2 prime to p", a.d)));
    }
    if a.s == 0 {
        return Err(CliError::Usage("--s 0: need s >= 1".into()));
    }
    let prec = prec_or_default(a.p, a.prec)?;
    let fld = ff::build_field(a.p, a.s).map_err(compute)?;
    let zs = parse_elements(&fld, &a.z)?;
    let mut results = Vec::new();
    let mut polys = Vec::new();
    for z in &zs {
        let (r, poly) = fibre_one(&fld, z, a.d, prec)?;
        results.push(r);
        polys.push(poly);
    }
    let all_match = results.iter().all(|r| r.matches);
    if let Some(path) = &a.csv_polygon {
        if polys.len() == 1 {
            write_file(path, &newton::polygon_csv(&polys[0]))?;
        } else {
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            for (i, poly) in polys.iter().enumerate() {
                let name = format!("{stem}_z{}.csv", fld.index(&zs[i]));
                write_file(&path.with_file_name(name), &newton::polygon_csv(poly))?;
            }
        }
    }
    let output = FibreOutput {
        p: a.p.to_string(),
        d: a.d.to_string(),
        s: a.s.to_string(),
        prec: prec.to_string(),
        all_match,
        results,
    };
    emit(&output, a.json.as_deref(), out)?;
    if !all_match {
        return Err(CliError::Verify("fibre methods or slopes disagree".into()));
    }
    Ok(())
}

struct MkComputed {
    exact: Option<LPoly>,
    padic: Option<LPoly>,
    matches: bool,
}

fn compute_mk(p: u64, k: u32, method: Method, prec: i64) -> Result<MkComputed> {
    if k == 0 {
        return Err(CliError::Usage("--k 0: need k >= 1".into()));
    }
    if method.cohomology() && (k % 2 == 0 || k as u64 >= p) {
        return Err(CliError::Usage(format!("--k {k}: the cohomological method needs odd k < p")));
    }
    let exact = if method.oracle() {
        Some(if k % 2 == 1 {
            oracle::mk_exact_poly(p, k, false).map_err(compute)?
        } else {
            let (m, _) = sympow::trivial_exponents(k, p);
            oracle::mk_exact_even(p, k, (k + m) as usize, false).map_err(compute)?
        })
    } else {
        None
    };
    let padic_l = if method.cohomology() {
        Some(sympow::mk_padic(p, k, prec).map_err(compute)?)
    } else {
        None
    };
    let matches = match (&exact, &padic_l) {
        (Some(e), Some(c)) => coeffs_agree(e, c, prec)?,
        _ => true,
    };
    Ok(MkComputed {
        exact,
        padic: padic_l,
        matches,
    })
}

fn cmd_mk(a: MkArgs, out: &mut dyn Write) -> Result<()> {
    check_prime(a.p)?;
    let prec = prec_or_default(a.p, a.prec)?;
    let c = compute_mk(a.p, a.k, a.method, prec)?;
    let main = c.exact.as_ref().or(c.padic.as_ref()).expect("one method ran");
    let vals = main.valuations();
    let mut ok = c.matches;
    let fe = if a.k % 2 == 1 {
        match (&c.exact, &c.padic) {
            (Some(e), _) => match sympow::check_fe_exact(e.exact_coeffs().unwrap(), a.k, a.p) {
                Ok(f) => json!({"num": record::cyclo_to_json(&f.num), "den": f.den.to_string()}),
                Err(_) => {
                    ok = false;
                    Value::Null
                }
            },
            (None, Some(pl)) => match sympow::check_fe_padic(pl.padic_coeffs().unwrap(), a.k) {
                Ok(f) => json!({"padic": record::padic_to_json(&f)}),
                Err(_) => {
                    ok = false;
                    Value::Null
                }
            },
            _ => Value::Null,
        }
    } else {
        Value::Null
    };
    let bound = if a.k % 2 == 1 {
        let r = newton::check_lower_bound(main, a.k, a.p);
        ok &= r.ok;
        json!({
            "ok": r.ok,
            "rows": r.rows.iter().map(|row| json!({
                "m": row.m.to_string(),
                "ord": row.ord.as_ref().map(ratio_to_string),
                "is_floor": row.is_floor,
                "bound": ratio_to_string(&row.bound),
                "conjectural": ratio_to_string(&row.conjectural),
                "margin": row.margin.as_ref().map(ratio_to_string),
                "conjectural_margin": row.conj_margin.as_ref().map(ratio_to_string),
            })).collect::<Vec<_>>(),
        })
    } else {
        Value::Null
    };
    let payload = record::payload_of(c.exact.as_ref(), c.padic.as_ref());
    let ord_c1 = vals.get(1).cloned().flatten().map(|r| ratio_to_string(&r));
    let output = json!({
        "p": a.p.to_string(),
        "k": a.k.to_string(),
        "method": a.method.name(),
        "prec": prec.to_string(),
        "degree": main.degree().to_string(),
        "exact": payload.exact,
        "padic": payload.padic,
        "valuations": val_strings(&vals),
        "ord_c1": ord_c1,
        "fe_constant": fe,
        "lower_bound": bound,
        "match": c.matches,
    });
    emit(&output, a.json.as_deref(), out)?;
    if !ok {
        return Err(CliError::Verify("M_k checks failed".into()));
    }
    Ok(())
}

fn cmd_slopes(a: SlopesArgs, out: &mut dyn Write) -> Result<()> {
    let mut rows = Vec::new();
    for &p in &a.p {
        check_prime(p)?;
        let sl = newton::predicted_fibre_slopes(a.d, p).map_err(|e| CliError::Usage(e.to_string()))?;
        let tau: Vec<String> = (1..a.d).map(|j| newton::tau(p, a.d, j).to_string()).collect();
        let sum = newton::predicted_slope_sum(a.d, p).map_err(|e| CliError::Usage(e.to_string()))?;
        rows.push(json!({
            "p": p.to_string(),
            "d": a.d.to_string(),
            "tau": tau,
            "slopes": sl.iter().map(ratio_to_string).collect::<Vec<_>>(),
            "sum": ratio_to_string(&sum),
        }));
    }
    emit(&json!({ "table": rows }), None, out)
}

fn parse_ratio(s: &str) -> Option<Ratio<i64>> {
    match s.split_once('/') {
        Some((n, d)) => {
            let d: i64 = d.trim().parse().ok()?;
            if d == 0 {
                return None;
            }
            Some(Ratio::new(n.trim().parse().ok()?, d))
        }
        None => Some(Ratio::from_integer(s.trim().parse().ok()?)),
    }
}

fn cmd_polygon(a: PolygonArgs, out: &mut dyn Write) -> Result<()> {
    let text = fs::read_to_string(&a.input).map_err(|e| CliError::Io {
        path: a.input.display().to_string(),
        msg: e.to_string(),
    })?;
    let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("--in: {e}")))?;
    let obj = match v.get("results") {
        Some(Value::Array(rs)) => rs
            .get(a.index)
            .ok_or_else(|| CliError::Usage(format!("--index {}: out of range", a.index)))?,
        _ => &v,
    };
    let vals = obj
        .get("valuations")
        .and_then(|x| x.as_array())
        .ok_or_else(|| CliError::Usage("--in: no \"valuations\" array".into()))?;
    let mut pts = Vec::new();
    for (i, x) in vals.iter().enumerate() {
        let r = match x {
            Value::Null => None,
            Value::String(s) => Some(parse_ratio(s).ok_or_else(|| CliError::Usage(format!("--in: bad valuation {s:?}")))?),
            _ => return Err(CliError::Usage("--in: valuations must be strings or null".into())),
        };
        pts.push((i, r));
    }
    let poly = newton::newton_polygon(&pts).map_err(|e| CliError::Usage(format!("--in: {e}")))?;
    let csv = newton::polygon_csv(&poly);
    match &a.out {
        Some(p) => write_file(p, &csv),
        None => out.write_all(csv.as_bytes()).map_err(|e| CliError::Io {
            path: "stdout".into(),
            msg: e.to_string(),
        }),
    }
}

struct Report<'a> {
    out: &'a mut dyn Write,
    failures: usize,
}

impl Report<'_> {
    fn line(&mut self, ok: bool, name: &str, detail: &str) {
        if !ok {
            self.failures += 1;
        }
        let _ = writeln!(self.out, "{} {name} {detail}", if ok { "PASS" } else { "FAIL" });
    }

    fn result<T>(&mut self, name: &str, r: std::result::Result<T, String>, f: impl FnOnce(T) -> (bool, String)) {
        match r {
            Ok(v) => {
                let (ok, d) = f(v);
                self.line(ok, name, &d);
            }
            Err(e) => self.line(false, name, &e),
        }
    }
}

fn suite_identities(rep: &mut Report, nmax: u32, kmax: u32) {
    rep.result("identities", sympow::identity_suite(nmax, 6, kmax).map_err(|e| e.to_string()), |r| {
        (
            r.all_ok(),
            format!(
                "combo={} binsum_up_to_sign={} (equal {}, negated {}) det_nk={} h={} kernel_dim={} kappa={}",
                r.combo_ok,
                r.binsum_up_to_sign,
                r.binsum_counts.0,
                r.binsum_counts.1,
                r.det_nk_ok,
                r.h_formula_ok,
                r.kernel_dim_ok,
                r.kappa_ok
            ),
        )
    });
}

fn suite_fibres(rep: &mut Report, ps: &[u64]) {
    for &p in ps {
        let name = format!("fibres p={p} d=3");
        let run = || -> std::result::Result<(bool, String), String> {
            let fld = ff::build_field(p, 1).map_err(|e| e.to_string())?;
            let prec = padic::default_prec(p);
            let mut bad = Vec::new();
            for z in fld.elements().filter(|x| !fld.is_zero(x)) {
                let (r, _) = fibre_one(&fld, &z, 3, prec).map_err(|e| e.to_string())?;
                if !r.matches {
                    bad.push(fld.index(&z));
                }
            }
            Ok((bad.is_empty(), format!("mismatches {bad:?}")))
        };
        rep.result(&name, run(), |x| x);
    }
}

fn suite_sympow(rep: &mut Report, ps: &[u64], kmax: u32) {
    for &p in ps {
        for k in (1..=kmax).step_by(2).filter(|&k| (k as u64) < p) {
            let name = format!("sympow p={p} k={k}");
            let r = compute_mk(p, k, Method::Both, padic::default_prec(p)).map_err(|e| e.to_string());
            rep.result(&name, r, |c| {
                let e = c.exact.unwrap();
                let fe = sympow::check_fe_exact(e.exact_coeffs().unwrap(), k, p).is_ok();
                let lb = newton::check_lower_bound(&e, k, p).ok;
                let deg = e.degree() == (k as usize + 1) / 2;
                (c.matches && fe && lb && deg, format!("match={} fe={fe} bound={lb} degree={}", c.matches, e.degree()))
            });
        }
    }
}

fn suite_deform(rep: &mut Report, ps: &[u64]) {
    for &p in ps {
        let prec = padic::default_prec(p);
        rep.result(
            &format!("det-frobenius p={p} s=1"),
            deform::check_det_frobenius(p, 1, 3, prec).map_err(|e| e.to_string()),
            |(_, dets)| (true, format!("{} points", dets.len())),
        );
        rep.result(
            &format!("intertwine p={p} z=1"),
            deform::check_frob_intertwine(p, 1, 10, 20).map_err(|e| e.to_string()),
            |r| (r.residual_val >= r.prec - 2 && r.constant_val >= r.prec - 2, format!("residual {} of {}", r.residual_val.min(r.constant_val), r.prec)),
        );
        let ring = padic::ring(p, 1).map_err(|e| e.to_string());
        let wr = ring.and_then(|r| {
            let z = dwork::teich_point(r, &r.fld.from_int(1)).map_err(|e| e.to_string())?;
            deform::solve_deformation(&z, 12, prec).map_err(|e| e.to_string())
        });
        rep.result(&format!("wronskian p={p}"), wr, |s| (s.wronskian_vanishes(), format!("residual {}", s.wronskian_residual())));
    }
}

fn cmd_verify(a: VerifyArgs, out: &mut dyn Write) -> Result<()> {
    for &p in &a.p {
        check_prime(p)?;
    }
    let mut rep = Report { out, failures: 0 };
    let ps = |default: &[u64]| if a.p.is_empty() { default.to_vec() } else { a.p.clone() };
    let all = a.suite == Suite::All;
    if all || a.suite == Suite::Identities {
        suite_identities(&mut rep, a.nmax, a.kmax.unwrap_or(40));
    }
    if all || a.suite == Suite::Fibres {
        suite_fibres(&mut rep, &ps(&[5, 7, 11, 13]));
    }
    if all || a.suite == Suite::Sympow {
        suite_sympow(&mut rep, &ps(&[7]), a.kmax.unwrap_or(5));
    }
    if all || a.suite == Suite::Deform {
        suite_deform(&mut rep, &ps(&[5, 7]));
    }
    if rep.failures > 0 {
        return Err(CliError::Verify(format!("{} check(s) failed", rep.failures)));
    }
    Ok(())
}

fn census_key(a: &CensusArgs) -> Result<(RecordKey, Option<FqElem>, Option<FieldDescriptor>)> {
    let p = a.p.ok_or_else(|| CliError::Usage("--p is required".into()))?;
    check_prime(p)?;
    match a.kind.ok_or_else(|| CliError::Usage("--kind is required".into()))? {
        Kind::Sympow => {
            let k = a.k.ok_or_else(|| CliError::Usage("--k is required for --kind sympow".into()))?;
            Ok((RecordKey::sympow(p, k), None, None))
        }
        Kind::Fibre => {
            let zs = a.z.as_deref().ok_or_else(|| CliError::Usage("--z is required for --kind fibre".into()))?;
            if zs == "all" {
                return Err(CliError::Usage("--z all: census records hold one fibre".into()));
            }
            if a.s == 0 {
                return Err(CliError::Usage("--s 0: need s >= 1".into()));
            }
            let fld = ff::build_field(p, a.s).map_err(compute)?;
            let z = parse_elements(&fld, zs)?.remove(0);
            let key = RecordKey::fibre(p, a.d, &minimal_polynomial(&fld, &z), a.s);
            Ok((key, Some(z), Some(fld)))
        }
    }
}

fn timestamp() -> String {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs().to_string())
        .unwrap_or_else(|_| "0".into())
}

fn cmd_census(a: CensusArgs, out: &mut dyn Write) -> Result<()> {
    let st = Store::new(store::resolve_root(a.cache.as_deref()));
    let io = |e: std::io::Error| CliError::Io {
        path: "stdout".into(),
        msg: e.to_string(),
    };
    match a.op {
        CensusOp::List => {
            for k in st.list()? {
                writeln!(out, "{k}").map_err(io)?;
            }
            Ok(())
        }
        CensusOp::Get => {
            let (key, _, _) = census_key(&a)?;
            let text = st.get_text(&key)?;
            out.write_all(text.as_bytes()).map_err(io)
        }
        CensusOp::Put => {
            let (key, z, fld) = census_key(&a)?;
            let p = a.p.unwrap();
            let prec = prec_or_default(p, a.prec)?;
            let (exact, padic_l, matches) = match (z, fld) {
                (Some(z), Some(fld)) => {
                    let ex = if a.method.oracle() {
                        Some(oracle::fibre_l_exact(&fld, &z, a.d).map_err(compute)?)
                    } else {
                        None
                    };
                    let pl = if a.method.cohomology() {
                        Some(dwork::fibre_l_padic(&fld, &z, a.d, prec).map_err(compute)?)
                    } else {
                        None
                    };
                    let m = match (&ex, &pl) {
                        (Some(e), Some(c)) => coeffs_agree(e, c, prec)?,
                        _ => true,
                    };
                    (ex, pl, m)
                }
                _ => {
                    let c = compute_mk(p, a.k.unwrap(), a.method, prec)?;
                    (c.exact, c.padic, c.matches)
                }
            };
            if !matches {
                return Err(CliError::Verify("oracle and cohomology disagree; nothing stored".into()));
            }
            let rec = CensusRecord {
                key,
                payload: record::payload_of(exact.as_ref(), padic_l.as_ref()),
                provenance: Provenance {
                    method: a.method.name().into(),
                    precision: if a.method.cohomology() { prec.to_string() } else { "exact".into() },
                    version: env!("CARGO_PKG_VERSION").into(),
                    timestamp: timestamp(),
                },
            };
            let outcome = st.put(&rec, a.force)?;
            let word = match outcome {
                PutOutcome::Created => "created",
                PutOutcome::Unchanged => "unchanged",
                PutOutcome::Replaced => "replaced",
            };
            writeln!(out, "{word} {}", st.path_for(&rec.key).display()).map_err(io)
        }
    }
}
