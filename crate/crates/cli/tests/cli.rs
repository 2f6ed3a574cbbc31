use std::process::Command;

use expsum_cli::record::parse_record;
use expsum_cli::run;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("expsum").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_expsum"));
    c.env_remove("EXPSUM_CACHE_DIR");
    c
}

#[test]
fn census_round_trip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    let (code, _, _) = call(&["census", "put", "--cache", cache, "--p", "7", "--kind", "sympow", "--k", "3"]);
    assert_eq!(code, 0);
    let (code, text, _) = call(&["census", "get", "--cache", cache, "--p", "7", "--kind", "sympow", "--k", "3"]);
    assert_eq!(code, 0);
    let rec = parse_record(&text).unwrap();
    assert_eq!(expsum_cli::record::canonical_json(&rec), text);
    let on_disk = std::fs::read_to_string(dir.path().join("p7/d3/sympow/k3.json")).unwrap();
    assert_eq!(on_disk, text);
}

#[test]
fn put_is_idempotent_and_conflicts_need_force() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    let put = ["census", "put", "--cache", cache, "--p", "7", "--kind", "fibre", "--z", "3"];
    let (c1, o1, _) = call(&put);
    assert_eq!(c1, 0);
    assert!(o1.starts_with("created"));
    let path = dir.path().join("p7/d3/fibre/s1_m4_1.json");
    let before = std::fs::read_to_string(&path).unwrap();
    let (c2, o2, _) = call(&put);
    assert_eq!(c2, 0);
    assert!(o2.starts_with("unchanged"));
    assert_eq!(std::fs::read_to_string(&path).unwrap(), before);

    let mut rec = parse_record(&before).unwrap();
    rec.payload.exact.as_mut().unwrap()[0][0] = "9".into();
    let tampered = expsum_cli::record::canonical_json(&rec);
    std::fs::write(&path, &tampered).unwrap();
    let (c3, _, e3) = call(&put);
    assert_eq!(c3, 1);
    assert!(e3.contains("--force"));
    assert_eq!(std::fs::read_to_string(&path).unwrap(), tampered);
    let mut forced = put.to_vec();
    forced.push("--force");
    let (c4, o4, _) = call(&forced);
    assert_eq!(c4, 0);
    assert!(o4.starts_with("replaced"));
    let rec = parse_record(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(rec.payload, parse_record(&before).unwrap().payload);
}

#[test]
fn conjugate_fibres_share_a_record() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    // Y and its Frobenius conjugate Y^5 have the same minimal polynomial
    let (c, o, _) = call(&["census", "put", "--cache", cache, "--p", "5", "--s", "2", "--kind", "fibre", "--z", "0,1"]);
    assert_eq!(c, 0, "{o}");
    let fld = expsum::ff::build_field(5, 2).unwrap();
    let conj = fld.frobenius(&fld.gen_y());
    let coords = conj.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
    let (c, o, _) = call(&["census", "put", "--cache", cache, "--p", "5", "--s", "2", "--kind", "fibre", "--z", &coords]);
    assert_eq!(c, 0);
    assert!(o.starts_with("unchanged"), "{o}");
    let (_, list, _) = call(&["census", "list", "--cache", cache]);
    assert_eq!(list.lines().count(), 1);
}

#[test]
fn missing_record_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["census", "get", "--cache", dir.path().to_str().unwrap(), "--p", "7", "--kind", "sympow", "--k", "5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no record"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["bogus"],
        vec!["mk", "--p", "7"],
        vec!["mk", "--p", "8", "--k", "3"],
        vec!["mk", "--p", "7", "--k", "4", "--method", "cohomology"],
        vec!["fibre", "--p", "7", "--z", "x"],
        vec!["census", "get", "--p", "7"],
    ] {
        let out = bin().args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    let out = bin().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn mk_reports_the_expected_first_slope() {
    let (code, text, _) = call(&["mk", "--p", "7", "--k", "3"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["ord_c1"], "5/3");
    assert_eq!(v["degree"], "2");
    assert_eq!(v["match"], true);
    assert_eq!(v["lower_bound"]["ok"], true);
}

#[test]
fn output_is_deterministic() {
    let a = call(&["fibre", "--p", "7", "--z", "all"]);
    let b = call(&["fibre", "--p", "7", "--z", "all"]);
    assert_eq!(a.0, 0);
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a.1).unwrap();
    assert_eq!(v["results"].as_array().unwrap().len(), 6);
    for r in v["results"].as_array().unwrap() {
        assert_eq!(r["slopes"], serde_json::json!(["1/3", "2/3"]));
        assert_eq!(r["match"], true);
    }
}

#[test]
fn polygon_from_json_file() {
    let dir = tempfile::tempdir().unwrap();
    let js = dir.path().join("m.json");
    let csv = dir.path().join("m.csv");
    let (c, _, _) = call(&["mk", "--p", "7", "--k", "3", "--json", js.to_str().unwrap()]);
    assert_eq!(c, 0);
    let (c, _, _) = call(&["polygon", "--in", js.to_str().unwrap(), "--out", csv.to_str().unwrap()]);
    assert_eq!(c, 0);
    assert_eq!(
        std::fs::read_to_string(&csv).unwrap(),
        "index,valuation_num,valuation_den\n0,0,1\n1,5,3\n2,4,1\n"
    );
}
