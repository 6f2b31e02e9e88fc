use std::process::{Command, Output};

fn kropina(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kropina")).args(args).output().expect("binary runs")
}

fn kropina_threads(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kropina"))
        .args(args)
        .env("RAYON_NUM_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("valid json")
}

fn quantity<'a>(v: &'a serde_json::Value, name: &str) -> &'a serde_json::Value {
    v["quantities"].as_array().unwrap().iter().find(|q| q["quantity"] == name).unwrap()
}

#[test]
fn eval_flat_metric_is_curvature_free() {
    let o = kropina(&["eval", "--catalog", "euclidean-constant", "--point", "0,0,0", "--dir", "1,0.3,0", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    for q in ["Ric", "R"] {
        assert_eq!(quantity(&v, q)["closed_form"].as_f64().unwrap().abs(), 0.0);
        assert!(quantity(&v, q)["pipeline"].as_f64().unwrap().abs() < 1e-12);
    }
}

#[test]
fn eval_outside_cone_exits_with_domain_code() {
    let o = kropina(&["eval", "--catalog", "euclidean-constant", "--point", "0,0,0", "--dir", "0,1,0"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("beta > 0"));
}

#[test]
fn eval_conformal_gradient_ricci() {
    let o = kropina(&["eval", "--catalog", "conformal-gradient", "--point", "1,0,0", "--dir", "1,1,0", "--format", "json", "--verbose-terms"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let ric = quantity(&v, "Ric");
    assert!((ric["closed_form"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((ric["pipeline"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    let terms = v["terms"]["ricci"].as_array().unwrap();
    let sum: f64 = terms.iter().map(|t| t["value"].as_f64().unwrap()).sum();
    assert!((sum - 1.0).abs() < 1e-12);
    assert!(!v["terms"]["scalar"].as_array().unwrap().is_empty());
}

#[test]
fn eval_needs_point_and_direction() {
    assert_eq!(code(&kropina(&["eval", "--catalog", "euclidean-constant", "--dir", "1,0,0"])), 2);
    assert_eq!(code(&kropina(&["eval", "--catalog", "euclidean-constant", "--point", "0,0", "--dir", "1,0,0"])), 2);
    assert_eq!(code(&kropina(&["eval", "--catalog", "euclidean-constant", "--point", "5,0,0", "--dir", "1,0,0"])), 3);
}

#[test]
fn verify_flat_metric() {
    let o = kropina(&["verify", "--catalog", "euclidean-constant", "--points", "4", "--dirs", "3", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert!(v["max_residual"].as_f64().unwrap() < 1e-10);
    assert_eq!(v["samples"].as_array().unwrap().len(), 12);
    assert_eq!(v["meta"]["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["meta"]["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn verify_random_poly_agrees() {
    let o = kropina(&["verify", "--catalog", "random-poly", "--seed", "7", "--points", "5", "--dirs", "4"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn verify_below_rounding_floor_fails() {
    let o = kropina(&["verify", "--catalog", "random-poly", "--points", "3", "--dirs", "2", "--tol", "1e-18"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn verify_markdown_has_one_row_per_sample_quantity() {
    let o = kropina(&["verify", "--catalog", "sphere-hopf", "--points", "3", "--dirs", "2"]);
    assert_eq!(code(&o), 0);
    let md = stdout(&o);
    let values = md.split("## Values").nth(1).unwrap();
    let rows = values.lines().filter(|l| l.starts_with("| ")).count() - 1;
    assert_eq!(rows, 3 * 2 * 4);
}

#[test]
fn csv_header_and_shape() {
    let o = kropina(&["verify", "--catalog", "conformal-gradient", "--points", "2", "--dirs", "2", "--format", "csv"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "point_index,x,quantity,closed_form,pipeline,residual");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 16);
    assert!(rows.iter().all(|r| r.split(',').count() == 6));
}

#[test]
fn classify_verdicts_and_exit_codes() {
    let o = kropina(&["classify", "--catalog", "euclidean-constant", "--points", "3", "--dirs", "2", "--format", "json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["kappa_mean"].as_f64().unwrap(), 0.0);

    let o = kropina(&["classify", "--catalog", "conformal-gradient", "--points", "3", "--dirs", "2", "--format", "json"]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert_eq!(v["verdict"], "not-isotropic");
    for p in v["points"].as_array().unwrap() {
        assert!((p["cond1_raw"].as_f64().unwrap().abs() - 0.5).abs() < 1e-9);
    }

    let o = kropina(&["classify", "--catalog", "sphere-hopf", "--points", "4", "--dirs", "2", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert!((v["kappa_mean"].as_f64().unwrap() - 0.25).abs() < 1e-9);
    assert!(v["kappa_spread"].as_f64().unwrap() < 1e-7);
}

#[test]
fn classify_rejects_two_dimensions() {
    let dir = std::env::temp_dir().join(format!("kropina-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("plane.json");
    std::fs::write(&path, r#"{"name":"plane","dimension":2,"metric_upper":[["1","0"],["1"]],"oneform":["1","0"]}"#).unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(code(&kropina(&["classify", "--config", p])), 5);
    assert_eq!(code(&kropina(&["verify", "--config", p, "--points", "2", "--dirs", "2"])), 0);
    let o = kropina(&["eval", "--config", p, "--point", "0.1,0.2", "--dir", "1,0", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let g: Vec<f64> = serde_json::from_value(quantity(&json(&o), "g")["pipeline"].clone()).unwrap();
    assert!(g.iter().zip([1.0, 0.0, 0.0, 2.0]).all(|(a, b)| (a - b).abs() < 1e-12));
}

#[test]
fn config_errors_exit_two() {
    assert_eq!(code(&kropina(&["verify", "--catalog", "no-such-field"])), 2);
    assert_eq!(code(&kropina(&["verify", "--config", "/nonexistent/field.json"])), 2);
    assert_eq!(code(&kropina(&["verify", "--catalog", "sphere-hopf", "--points", "0"])), 2);
    assert_eq!(code(&kropina(&["verify", "--catalog", "sphere-hopf", "--tol", "0"])), 2);
    assert_eq!(code(&kropina(&["verify"])), 2);
    let dir = std::env::temp_dir().join(format!("kropina-cli-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.json");
    std::fs::write(&path, r#"{"name":"bad","dimension":3,"metric_upper":[["1","0","0"],["1","0"],["1"]],"oneform":["x4","0","0"]}"#).unwrap();
    assert_eq!(code(&kropina(&["verify", "--config", path.to_str().unwrap()])), 2);
}

#[test]
fn s0_zero_mode_refuses_nonzero_s() {
    let o = kropina(&["classify", "--catalog", "random-poly", "--points", "2", "--dirs", "1", "--mode", "s0-zero"]);
    assert_eq!(code(&o), 3);
    let o = kropina(&["classify", "--catalog", "sphere-hopf", "--points", "2", "--dirs", "1", "--mode", "s0-zero"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn output_is_independent_of_worker_count() {
    for format in ["csv", "json"] {
        let args = ["classify", "--catalog", "random-poly", "--points", "6", "--dirs", "2", "--seed", "3", "--format", format];
        let one = kropina_threads(&args, "1");
        let many = kropina_threads(&args, "4");
        assert_eq!(one.stdout, many.stdout, "{format}");
        assert_eq!(code(&one), code(&many));
    }
}

#[test]
fn report_combines_verify_and_classify() {
    let o = kropina(&["report", "--catalog", "conformal-gradient", "--points", "2", "--dirs", "2", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["verify"]["passed"], true);
    assert_eq!(v["classify"]["verdict"], "not-isotropic");
    let md = stdout(&kropina(&["report", "--catalog", "conformal-gradient", "--points", "2", "--dirs", "2"]));
    assert!(md.contains("## Verification") && md.contains("## Diagnostics"));
}

#[test]
fn catalog_lists_and_prints_entries() {
    let o = kropina(&["catalog", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let names: Vec<String> = json(&o).as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap().to_string()).collect();
    assert_eq!(names, ["euclidean-constant", "conformal-gradient", "sphere-hopf", "random-poly"]);
    let doc = kropina(&["catalog", "--catalog", "sphere-hopf"]);
    let v = json(&doc);
    assert_eq!(v["dimension"], 3);
    assert_eq!(code(&kropina(&["catalog", "--catalog", "nope"])), 2);
}
