use std::path::Path;

use breather_floquet::cli::{run, Cli, EXIT_CONFIG, EXIT_OK};
use clap::Parser;
use serde_json::Value;

const SCHEMAS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/schemas");

fn invoke(args: &[&str], out: &Path) -> u8 {
    let mut argv = vec!["breather-floquet"];
    argv.extend_from_slice(args);
    argv.extend_from_slice(&["--out", out.to_str().unwrap()]);
    run(&Cli::try_parse_from(argv).unwrap())
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Top-level `required` keys and primitive `type`s of a schema.
fn conforms(doc: &Value, schema: &str) {
    let schema = read_json(&Path::new(SCHEMAS).join(schema));
    let props = &schema["properties"];
    for key in schema["required"].as_array().unwrap() {
        let key = key.as_str().unwrap();
        let v = doc.get(key).unwrap_or_else(|| panic!("missing {key}"));
        let types: Vec<&str> = match &props[key]["type"] {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().filter_map(Value::as_str).collect(),
            _ => continue,
        };
        let ok = types.iter().any(|t| match *t {
            "object" => v.is_object(),
            "array" => v.is_array(),
            "string" => v.is_string(),
            "number" => v.is_number(),
            "integer" => v.is_u64() || v.is_i64(),
            "boolean" => v.is_boolean(),
            "null" => v.is_null(),
            _ => true,
        });
        assert!(ok, "{key} = {v} is not {types:?}");
    }
}

fn header(path: &Path) -> Vec<String> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines().next().unwrap().split(',').map(str::to_string).collect()
}

fn expected_columns(pattern: &str) -> Vec<String> {
    let map = read_json(&Path::new(SCHEMAS).join("csv_columns.json"));
    map[pattern].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect()
}

#[test]
fn verify_default_passes_and_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(invoke(&["verify"], dir.path()), EXIT_OK);
    let report = read_json(&dir.path().join("verify.json"));
    conforms(&report, "verify.schema.json");
    assert_eq!(report["passed"], true);
    assert_eq!(report["seed"], 0x5EED);
    let manifest = read_json(&dir.path().join("manifest.json"));
    conforms(&manifest, "manifest.schema.json");
    assert_eq!(manifest["exit_code"], 0);
}

#[test]
fn linf_and_map_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(invoke(&["spectrum", "linf", "--config", "km"], dir.path()), EXIT_OK);
    conforms(&read_json(&dir.path().join("linf_summary.json")), "curve_summary.schema.json");
    assert_eq!(header(&dir.path().join("linf_curve.csv")), expected_columns("linf_curve.csv"));

    let dir = tempfile::tempdir().unwrap();
    assert_eq!(invoke(&["spectrum", "map", "--config", "zero-map"], dir.path()), EXIT_OK);
    conforms(&read_json(&dir.path().join("map_summary.json")), "curve_summary.schema.json");
    assert_eq!(header(&dir.path().join("map_curve.csv")), expected_columns("map_curve.csv"));
    assert!(dir.path().join("map.svg").exists());
}

#[test]
fn zero_monodromy_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(invoke(&["spectrum", "monodromy"], dir.path()), EXIT_OK);
    let summary = read_json(&dir.path().join("monodromy_summary.json"));
    conforms(&summary, "monodromy_summary.schema.json");
    assert_eq!(summary["conjectural"], false);
    assert_eq!(header(&dir.path().join("monodromy_eigenvalues.csv")), expected_columns("monodromy_eigenvalues*.csv"));
    assert_eq!(header(&dir.path().join("monodromy_curve.csv")), expected_columns("monodromy_curve*.csv"));
}

#[test]
fn find_breather_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(invoke(&["find-breather", "--config", "decay"], dir.path()), EXIT_OK);
    let d = read_json(&dir.path().join("detection.json"));
    conforms(&d, "detection.schema.json");
    assert_eq!(d["outcome"], "decayed");
    conforms(&read_json(&dir.path().join("detection_details.json")), "detection_details.schema.json");
    assert_eq!(header(&dir.path().join("trace.csv")), expected_columns("trace.csv"));

    let dir = tempfile::tempdir().unwrap();
    assert_eq!(invoke(&["find-breather", "--config", "pulsating"], dir.path()), EXIT_OK);
    let d = read_json(&dir.path().join("detection.json"));
    assert_eq!(d["outcome"], "periodic");
    assert!(dir.path().join("trajectory.bin").exists());
}

#[test]
fn km_outputs() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(invoke(&["km", "residual", "--config", "km"], dir.path()), EXIT_OK);
    let r = read_json(&dir.path().join("km_residual.json"));
    conforms(&r, "km_residual.schema.json");
    assert!(r["residual"].as_f64().unwrap() < 1e-8);

    let dir = tempfile::tempdir().unwrap();
    assert_eq!(invoke(&["km", "field", "--config", "km"], dir.path()), EXIT_OK);
    assert_eq!(header(&dir.path().join("km_field.csv")), expected_columns("km_field.csv"));
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(invoke(&["verify", "--config", "no-such-config"], dir.path()), EXIT_CONFIG);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "name = \"bad\"\n[grid]\nlength = 10.0\nn = 16\nbogus = 1\n").unwrap();
    assert_eq!(invoke(&["verify", "--config", bad.to_str().unwrap()], dir.path()), EXIT_CONFIG);

    let mut km = breather_floquet::cli::RunConfig::load("km").unwrap();
    km.monodromy.acceptance = true;
    let path = breather_floquet::cli::write_config(&km, dir.path(), "km-acceptance.toml").unwrap();
    assert_eq!(invoke(&["spectrum", "monodromy", "--config", path.to_str().unwrap()], dir.path()), EXIT_CONFIG);
}

#[test]
fn matrix_free_levels_are_reported_apart() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = breather_floquet::cli::RunConfig::default_config();
    config.monodromy.refinement = vec![64, 1024];
    config.monodromy.matrix_free = true;
    config.monodromy.arnoldi_wanted = 6;
    let path = breather_floquet::cli::write_config(&config, dir.path(), "matrix-free.toml").unwrap();
    assert_eq!(invoke(&["spectrum", "monodromy", "--config", path.to_str().unwrap()], dir.path()), EXIT_OK);
    let summary = read_json(&dir.path().join("monodromy_summary.json"));
    conforms(&summary, "monodromy_summary.schema.json");
    let levels = summary["matrix_free"].as_array().unwrap();
    assert_eq!(levels.len(), 1);
    assert_eq!(levels[0]["n"], 1024);
    assert!(levels[0]["max_curve_distance"].as_f64().unwrap() < 1e-8);
    assert_eq!(
        header(&dir.path().join("monodromy_arnoldi_n1024.csv")),
        expected_columns("monodromy_arnoldi*.csv")
    );
}
