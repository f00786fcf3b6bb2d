use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const TABLE_TWO: &str = "r = 0.05\ndelta = 0.07\nsigma = 0.2\nlambda = 5.0\np = 0.5\nxi = 50.0\nq = 0.5\neta = 25.0\nK = 100.0\nL = 95.0\nrho_L = -26.34\n";
const TABLE_ONE: &str = "r = 0.05\ndelta = 0.07\nsigma = 0.2\nlambda = 1.0\np = [0.7]\nxi = [25.0]\nq = [0.3]\neta = [50.0]\nK = 100.0\nL = 95.0\nrho_L = -26.34\n";

fn geostep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geostep")).args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn csv_rows(text: &[u8]) -> Vec<std::collections::HashMap<String, String>> {
    let mut r = csv::Reader::from_reader(text);
    let head = r.headers().unwrap().clone();
    r.records()
        .map(|rec| head.iter().map(String::from).zip(rec.unwrap().iter().map(String::from)).collect())
        .collect()
}

fn value(doc: &Value, quantity: &str) -> f64 {
    doc["result"]["values"]
        .as_array()
        .unwrap()
        .iter()
        .find(|v| v["quantity"] == quantity)
        .unwrap()["value"]
        .as_f64()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn price_all_reproduces_reference_row() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "m.toml", TABLE_TWO);
    let out = geostep(&["price", "--config", path(&cfg), "--t", "1", "--x", "100", "--quantity", "all", "--format", "json"]);
    assert!(out.status.success());
    let doc = json(&out);
    assert!((value(&doc, "euro") / 4.992 - 1.0).abs() < 5e-3);
    assert!((value(&doc, "eep") / 0.178 - 1.0).abs() < 2e-2);
    assert!((doc["result"]["eep_pct"].as_f64().unwrap() - 3.45).abs() < 0.1);
    assert!((doc["result"]["dc_pct"].as_f64().unwrap() - 94.36).abs() < 0.5);
    assert_eq!(doc["manifest"]["command"], "price");
    assert_eq!(doc["manifest"]["gs_order"], 7);

    let text = geostep(&["price", "--config", path(&cfg), "--t", "1", "--x", "100", "--quantity", "all"]);
    let text = String::from_utf8(text.stdout).unwrap();
    assert!(text.contains("euro           4.993"), "{text}");
    assert!(text.contains("dc%            94.36%"), "{text}");
}

#[test]
fn zero_spot_is_worthless() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "m.toml", TABLE_TWO);
    let out = geostep(&["price", "--config", path(&cfg), "--t", "1", "--x", "0", "--quantity", "all", "--format", "json"]);
    let doc = json(&out);
    for v in doc["result"]["values"].as_array().unwrap() {
        assert_eq!(v["value"].as_f64(), Some(0.0));
    }
}

#[test]
fn premium_at_diffusion_limit_is_american_minus_european() {
    let dir = TempDir::new().unwrap();
    let tiny = write(&dir, "tiny.toml", &TABLE_TWO.replace("lambda = 5.0", "lambda = 1e-12").replace("-26.34", "0.0"));
    let diffusion = write(
        &dir,
        "bs.toml",
        "r = 0.05\ndelta = 0.07\nsigma = 0.2\nK = 100.0\nL = 95.0\nrho_L = 0.0\n",
    );
    let eep = json(&geostep(&["price", "--config", path(&tiny), "--t", "1", "--x", "100", "--quantity", "eep", "--format", "json"]));
    let bs = json(&geostep(&["price", "--config", path(&diffusion), "--t", "1", "--x", "100", "--quantity", "all", "--format", "json"]));
    let expected = value(&bs, "amer") - value(&bs, "euro");
    assert!((value(&eep, "eep") / expected - 1.0).abs() < 5e-3);
}

#[test]
fn tables_match_reference_cells() {
    let one = geostep(&["table", "1", "--format", "csv"]);
    assert!(one.status.success());
    let rows = csv_rows(&one.stdout);
    let step = rows.iter().find(|r| r["lambda"] == "0.0001" && r["contract"] == "step").unwrap();
    assert!((step["euro"].parse::<f64>().unwrap() - 4.510).abs() < 5e-3);

    let four = csv_rows(&geostep(&["table", "4", "--format", "csv"]).stdout);
    let cell = four
        .iter()
        .find(|r| r["block"] == "1" && r["spot"] == "100" && r["contract"] == "barrier")
        .unwrap();
    assert!((cell["euro"].parse::<f64>().unwrap() / 3.748 - 1.0).abs() < 5e-3);

    let two = csv_rows(&geostep(&["table", "2", "--format", "csv"]).stdout);
    let cell = two
        .iter()
        .find(|r| r["block"] == "2" && r["spot"] == "115" && r["contract"] == "step")
        .unwrap();
    assert!((cell["eep_pct"].parse::<f64>().unwrap() - 4.41).abs() < 0.1);
    assert_eq!(cell["ref_eep_pct"], "4.41");
}

#[test]
fn greeks_are_consistent_with_emitted_prices() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "m.toml", TABLE_TWO);
    let out = geostep(&[
        "greeks", "--config", path(&cfg), "--t", "1", "--x-lo", "99.9", "--x-hi", "100.1", "--n", "3", "--format", "csv",
    ]);
    assert!(out.status.success());
    let rows = csv_rows(&out.stdout);
    let v: Vec<f64> = rows.iter().map(|r| r["value"].parse().unwrap()).collect();
    let gamma: f64 = rows[1]["gamma"].parse().unwrap();
    let second = (v[2] - 2.0 * v[1] + v[0]) / 0.01;
    assert!((gamma - second).abs() < 1e-6 * second.abs().max(1.0), "{gamma} vs {second}");

    let wide = csv_rows(
        &geostep(&["greeks", "--config", path(&cfg), "--t", "1", "--x-lo", "85", "--x-hi", "160", "--n", "6", "--format", "csv"])
            .stdout,
    );
    for r in &wide {
        let d: f64 = r["delta"].parse().unwrap();
        assert!((0.0..=1.05).contains(&d), "{r:?}");
    }
}

#[test]
fn surfaces_vanish_against_the_diffusion_model() {
    let dir = TempDir::new().unwrap();
    let tiny = write(&dir, "tiny.toml", &TABLE_TWO.replace("lambda = 5.0", "lambda = 1e-12"));
    let none = write(&dir, "none.toml", &TABLE_TWO.replace("lambda = 5.0", "lambda = 0.0"));
    let out = geostep(&[
        "greeks", "--config", path(&tiny), "--diff-against", path(&none), "--t", "1", "--x-lo", "85", "--x-hi", "115",
        "--n", "7", "--quantity", "eep", "--format", "json",
    ]);
    let doc = json(&out);
    for p in doc["result"].as_array().unwrap() {
        for k in ["value", "delta", "gamma"] {
            assert!(p[k].as_f64().unwrap().abs() <= 1e-3, "{p}");
        }
    }
}

#[test]
fn roots_interlace_with_poles() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "m.toml", TABLE_TWO);
    let rows = csv_rows(&geostep(&["roots", "--config", path(&cfg), "--alpha", "1", "--format", "csv"]).stdout);
    assert_eq!(rows.len(), 4);
    for r in rows {
        let root: f64 = r["root"].parse().unwrap();
        if let Ok(lo) = r["lower"].parse::<f64>() {
            assert!(root > lo);
        }
        if let Ok(hi) = r["upper"].parse::<f64>() {
            assert!(root < hi);
        }
        assert!(r["residual"].parse::<f64>().unwrap() < 1e-10);
    }
}

#[test]
fn csv_and_json_agree_losslessly() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "m.toml", TABLE_ONE);
    let args = ["price", "--config", path(&cfg), "--t", "1", "--x", "103.7", "--quantity", "all"];
    let doc = json(&geostep(&[&args[..], &["--format", "json"]].concat()));
    let rows = csv_rows(&geostep(&[&args[..], &["--format", "csv"]].concat()).stdout);
    for q in ["euro", "amer", "eep", "eep_diffusion", "eep_jump"] {
        assert_eq!(rows[0][q].parse::<f64>().unwrap().to_bits(), value(&doc, q).to_bits());
    }
}

#[test]
fn verify_replays_bit_exactly() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "m.toml", TABLE_ONE);
    let out = dir.path().join("verify.json");
    let run = geostep(&[
        "verify", "--config", path(&cfg), "--t", "1", "--x", "100", "--paths", "20000", "--dt", "0.01", "--seed", "3",
        "--format", "json", "--out", path(&out),
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let manifest = dir.path().join("verify.json.manifest.json");
    assert!(manifest.exists());
    std::fs::remove_file(&cfg).unwrap();
    let again = dir.path().join("again.json");
    assert!(geostep(&["replay", path(&manifest), "--out", path(&again)]).status.success());
    let a: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let b: Value = serde_json::from_str(&std::fs::read_to_string(&again).unwrap()).unwrap();
    assert_eq!(a["result"], b["result"]);
    assert_eq!(a["result"]["seed"], 3);
    assert!(a["result"]["duality_z"].as_f64().unwrap() < 4.0);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.toml", &format!("{TABLE_TWO}bogus = 1\n"));
    let out = geostep(&["price", "--config", path(&bad), "--t", "1", "--x", "100", "--format", "json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "config");
    let out = geostep(&["table", "9"]);
    assert_eq!(out.status.code(), Some(2));
    let cfg = write(&dir, "m.toml", TABLE_TWO);
    let out = geostep(&["price", "--config", path(&cfg), "--t", "-1", "--x", "100"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_errors_exit_with_three() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "m.toml", &TABLE_TWO.replace("delta = 0.07", "delta = 0.0"));
    let out = geostep(&["price", "--config", path(&cfg), "--t", "1", "--x", "100", "--quantity", "amer", "--format", "json"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["error"]["exit_code"], 3);
}
