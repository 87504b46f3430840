use std::path::Path;

use serde_json::Value;

use super::*;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("subdioph").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn lines(text: &str) -> Vec<Value> {
    text.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn height_of_a_basis() {
    let dir = tempfile::tempdir().unwrap();
    let basis = write(dir.path(), "b.json", r#"{"n": 3, "e": 2, "basis": [["2", "0", "0"], [0, 2, 0]]}"#);
    let (code, out, _) = call(&["height", "--basis", &basis, "--no-header"]);
    assert_eq!(code, 0);
    let v = &lines(&out)[0];
    assert_eq!(v["heightSquared"], "1");
    assert_eq!(v["determinantSquared"], "16");
    assert_eq!(v["minorGcd"], "4");
    assert_eq!(v["primitive"], false);
}

#[test]
fn rational_entries_are_read_exactly() {
    assert_eq!(input::parse_rational("-3/4"), Some(BigRational::new((-3).into(), 4.into())));
    assert_eq!(input::parse_rational("1.25"), Some(BigRational::new(5.into(), 4.into())));
    assert_eq!(input::parse_rational("-0.5"), Some(BigRational::new((-1).into(), 2.into())));
    assert_eq!(input::parse_rational("1/0"), None);
    assert_eq!(input::parse_rational("1e3"), None);
}

#[test]
fn pluecker_output_decodes_back() {
    let dir = tempfile::tempdir().unwrap();
    let basis = write(dir.path(), "b.json", r#"{"basis": [["1", "2", "3", "4"], ["0", "1", "1/2", "-1"]]}"#);
    let (code, out, _) = call(&["pluecker", "--basis", &basis, "--no-header"]);
    assert_eq!(code, 0);
    let v = &lines(&out)[0];
    let coords: Vec<String> = v["pluecker"].as_array().unwrap().iter().map(|x| x.as_str().unwrap().into()).collect();
    let (code, back, _) = call(&["decode", "--n", "4", "--e", "2", "--pluecker", &coords.join(","), "--no-header"]);
    assert_eq!(code, 0);
    assert_eq!(lines(&back)[0]["pluecker"], v["pluecker"]);
    assert_eq!(lines(&back)[0]["heightSquared"], v["heightSquared"]);
}

#[test]
fn non_decomposable_decode_is_a_usage_error() {
    let (code, out, err) = call(&["decode", "--n", "4", "--e", "2", "--pluecker", "1,0,0,0,0,1"]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(!err.is_empty());
}

#[test]
fn beta_below_threshold_exits_2() {
    let (code, out, err) = call(&["construct", "--ell", "1", "--beta", "2/1", "--nmax", "2"]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("below the admissible threshold"), "{err}");
}

#[test]
fn unknown_flag_exits_2() {
    let (code, out, _) = call(&["height", "--frobnicate"]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
}

#[test]
fn construct_and_certify() {
    let (code, out, _) = call(&["construct", "--ell", "1", "--beta", "3", "--nmax", "2", "--no-header"]);
    assert_eq!(code, 0);
    let rows = lines(&out);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0]["n"], 0);
    assert!(rows.iter().all(|r| r["primitive"] == true));
    let (code, out, _) = call(&["construct", "--ell", "1", "--beta", "3/1", "--nmax", "2", "--certify"]);
    assert_eq!(code, 0);
    let rows = lines(&out);
    assert!(rows[0].get("header").is_some());
    assert!(rows[1..].iter().all(|r| r["passed"] == true));
}

#[test]
fn instance_file_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "i.json", r#"{"ell": 1, "beta": "3/1", "seed": 2}"#);
    let a = call(&["construct", "--instance", &inst, "--nmax", "2", "--no-header"]);
    let b = call(&["construct", "--ell", "1", "--beta", "3", "--seed", "2", "--nmax", "2", "--no-header"]);
    assert_eq!(a.0, 0);
    assert_eq!(a.1, b.1);
}

#[test]
fn golden_records_are_deterministic_across_modes() {
    let args = ["records", "--golden", "40", "--e", "1", "--j", "1", "--hmax-squared", "5000", "--no-header"];
    let (code, seq, _) = call(&[&args[..], &["--sequential"]].concat());
    assert_eq!(code, 0);
    let (_, par, _) = call(&args);
    assert_eq!(seq, par);
    let rows = lines(&seq);
    assert_eq!(rows[1]["pluecker"], serde_json::json!(["1", "1"]));
    assert!(rows.iter().all(|r| r["source"] == "ENUMERATED"));
}

#[test]
fn csv_records_have_a_stable_header() {
    let (code, out, _) = call(&[
        "estimate",
        "--golden",
        "40",
        "--e",
        "1",
        "--j",
        "1",
        "--hmax-squared",
        "2000",
        "--format",
        "csv",
        "--no-header",
    ]);
    assert_eq!(code, 0);
    let mut it = out.lines();
    let header = it.next().unwrap();
    assert!(header.starts_with("burnIn,heightSquaredMax,heightSquaredMin,method,muHat"), "{header}");
    assert_eq!(it.count(), 1);
}

#[test]
fn enumerate_shards_cover_the_whole_set() {
    let base = ["enumerate", "--n", "3", "--e", "1", "--hmax-squared", "30", "--no-header"];
    let (_, all, _) = call(&base);
    let mut whole: Vec<Value> = lines(&all);
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("ck.json");
    let mut parts = Vec::new();
    for i in 0..3 {
        let idx = i.to_string();
        let extra = ["--shards", "3", "--shard-index", &idx, "--checkpoint", ck.to_str().unwrap()];
        let (code, out, _) = call(&[&base[..], &extra[..]].concat());
        assert_eq!(code, 0);
        parts.extend(lines(&out));
        let state: Value = serde_json::from_str(&std::fs::read_to_string(&ck).unwrap()).unwrap();
        assert_eq!(state["shardIndex"], i);
    }
    let key = |v: &Value| v["pluecker"].to_string();
    whole.sort_by_key(key);
    parts.sort_by_key(key);
    assert_eq!(whole, parts);
}

#[test]
fn checkpoint_cursor_resumes() {
    let base = ["enumerate", "--n", "2", "--e", "1", "--hmax-squared", "400", "--no-header"];
    let (_, all, _) = call(&base);
    let units = EnumSpec::new(2, 1, 400, Strategy::ExactLines).unwrap().units();
    let skip = units.len() / 2;
    let tail_units: Vec<_> = units[skip..].to_vec();
    let expected: usize = tail_units
        .iter()
        .map(|&u| unit_candidates(&EnumSpec::new(2, 1, 400, Strategy::ExactLines).unwrap(), u).len())
        .sum();
    let (code, tail, _) = call(&[&base[..], &["--cursor", &skip.to_string()]].concat());
    assert_eq!(code, 0);
    assert_eq!(lines(&tail).len(), expected);
    assert!(all.ends_with(&tail));
}

#[test]
fn verify_one_suite() {
    let (code, out, _) = call(&["verify", "--suite", "pluecker-round-trip", "--cases", "20", "--no-header"]);
    assert_eq!(code, 0);
    assert_eq!(lines(&out)[0]["failures"], 0);
    let (code, _, _) = call(&["verify", "--suite", "nope"]);
    assert_eq!(code, 2);
}

#[test]
fn angles_between_bases() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.json", r#"{"basis": [["1", "0", "0"]]}"#);
    let b = write(dir.path(), "b.json", r#"{"basis": [["1", "1", "0"]]}"#);
    let (code, out, _) = call(&["angles", "--basis", &a, "--other", &b, "--no-header"]);
    assert_eq!(code, 0);
    let v = &lines(&out)[0];
    // sin 45° = 0.7071067811865475244...
    assert!(v["psi"][0].as_str().unwrap().starts_with("7.071067811865475244"));
    let lo = input::parse_rational(&sci_to_plain(v["psiLo"][0].as_str().unwrap())).unwrap();
    let hi = input::parse_rational(&sci_to_plain(v["psiHi"][0].as_str().unwrap())).unwrap();
    assert!(lo < hi);
    let half = BigRational::new(1.into(), 2.into());
    assert!(&lo * &lo <= half && half <= &hi * &hi);
}

/// "d.ddde-k" as a plain decimal, for k ≥ 1.
fn sci_to_plain(s: &str) -> String {
    let (m, k) = s.split_once("e-").unwrap();
    let k: usize = k.parse().unwrap();
    format!("0.{}{}", "0".repeat(k - 1), m.replace('.', ""))
}

#[test]
fn out_file_receives_the_data() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("o.jsonl");
    let (code, out, _) =
        call(&["verify", "--suite", "angle-ordering", "--cases", "5", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    assert_eq!(std::fs::read_to_string(path).unwrap().lines().count(), 2);
}
