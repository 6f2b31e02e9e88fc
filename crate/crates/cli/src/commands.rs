//! The run commands. Each returns its rendered output and exit code.

use std::fmt;

use kropina_core::fields::{self, FieldError, FieldSpec, CATALOG};
use kropina_core::finsler::{self, FinslerError, Kropina, KropinaBhDensity, Precision};
use kropina_core::kropina::{
    bh_volume, classify, closed_form_at, closed_ricci_terms, sample_directions, sample_points,
    scalar_curvature_terms, ClassificationReport, KropinaError, Mode, PointGeometry, Term, Verdict,
};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::args::{CatalogArgs, Format, RunArgs, Source};
use crate::report::{num, Cell, Document, Meta, Row, Section};

pub const EXIT_VIOLATION: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_DOMAIN: u8 = 3;
pub const EXIT_INCONCLUSIVE: u8 = 4;
pub const EXIT_DIMENSION: u8 = 5;

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Domain(String),
    Dimension(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Domain(_) => EXIT_DOMAIN,
            Failure::Dimension(_) => EXIT_DIMENSION,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Domain(m) => write!(f, "domain error: {m}"),
            Failure::Dimension(m) => write!(f, "unsupported dimension: {m}"),
        }
    }
}

fn field_failure(e: FieldError) -> Failure {
    match e {
        FieldError::OutsideGuard { .. }
        | FieldError::NotPositiveDefinite { .. }
        | FieldError::Singular { .. }
        | FieldError::Degenerate { .. }
        | FieldError::Eval(_) => Failure::Domain(e.to_string()),
        _ => Failure::Config(e.to_string()),
    }
}

impl From<FinslerError> for Failure {
    fn from(e: FinslerError) -> Self {
        match e {
            FinslerError::Field(f) => field_failure(f),
            FinslerError::Dimension(_) => Failure::Dimension(e.to_string()),
            _ => Failure::Domain(e.to_string()),
        }
    }
}

impl From<KropinaError> for Failure {
    fn from(e: KropinaError) -> Self {
        match e {
            KropinaError::Field(f) => field_failure(f),
            KropinaError::Finsler(f) => f.into(),
            KropinaError::Dimension(_) => Failure::Dimension(e.to_string()),
            KropinaError::EmptyPoints => Failure::Config(e.to_string()),
            _ => Failure::Domain(e.to_string()),
        }
    }
}

pub struct Output {
    pub text: String,
    pub code: u8,
}

struct Loaded {
    spec: FieldSpec,
    sha256: String,
}

fn catalog_document(name: &str, seed: u64) -> Result<String, Failure> {
    if name == "random-poly" {
        return Ok(fields::random_poly_document(seed));
    }
    CATALOG
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, doc)| doc.to_string())
        .ok_or_else(|| {
            Failure::Config(format!("unknown catalog entry '{name}' (known: {})", fields::catalog_names().join(", ")))
        })
}

fn load(source: &Source, seed: u64) -> Result<Loaded, Failure> {
    let document = match (&source.config, &source.catalog) {
        (Some(path), _) => std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?,
        (None, Some(name)) => catalog_document(name, seed)?,
        (None, None) => return Err(Failure::Config("either --config or --catalog is required".into())),
    };
    let spec = fields::parse_field_config(&document).map_err(|e| Failure::Config(e.to_string()))?;
    Ok(Loaded { spec, sha256: format!("{:x}", Sha256::digest(document.as_bytes())) })
}

fn meta(command: &'static str, loaded: &Loaded, args: &RunArgs, sampled: bool) -> Meta {
    Meta {
        tool: "kropina",
        version: env!("CARGO_PKG_VERSION"),
        command,
        field: loaded.spec.name.clone(),
        dimension: loaded.spec.n,
        config_sha256: loaded.sha256.clone(),
        seed: args.seed,
        points: sampled.then_some(args.points),
        dirs: sampled.then_some(args.dirs),
        tol: args.tol,
        mode: args.mode.into(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

fn rel_vec(a: &[f64], b: &[f64]) -> f64 {
    let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let diff = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    diff / (1.0 + max_abs(a).max(max_abs(b)))
}

fn emit<T: Serialize>(format: Format, doc: &Document, json: &T) -> String {
    match format {
        Format::Md => doc.markdown(),
        Format::Csv => doc.csv(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(json).expect("report serializes");
            s.push('\n');
            s
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct ScalarTerm {
    power_of_f: i32,
    label: &'static str,
    value: f64,
}

#[derive(Debug, Clone, Serialize)]
struct Terms {
    ricci: Vec<Term>,
    scalar: Vec<ScalarTerm>,
}

fn terms(spec: &FieldSpec, x: &[f64], y: &[f64]) -> Result<Terms, Failure> {
    let scalar = scalar_curvature_terms(spec, x, y)?
        .into_iter()
        .map(|(power_of_f, t)| ScalarTerm { power_of_f, label: t.label, value: t.value })
        .collect();
    Ok(Terms { ricci: closed_ricci_terms(spec, x, y)?, scalar })
}

fn check_len(what: &str, v: &[f64], n: usize) -> Result<(), Failure> {
    if v.len() != n {
        return Err(Failure::Config(format!("{what} has {} coordinates, the field has dimension {n}", v.len())));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
struct Quantity {
    quantity: &'static str,
    description: &'static str,
    closed_form: Cell,
    pipeline: Cell,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual: Option<f64>,
}

fn both(quantity: &'static str, description: &'static str, c: Cell, p: Cell) -> Quantity {
    let residual = match (&c, &p) {
        (Cell::Scalar(a), Cell::Scalar(b)) => Some(rel(*a, *b)),
        (Cell::Vector(a), Cell::Vector(b)) => Some(rel_vec(a, b)),
        _ => None,
    };
    Quantity { quantity, description, closed_form: c, pipeline: p, residual }
}

fn closed(quantity: &'static str, description: &'static str, v: Cell) -> Quantity {
    Quantity { quantity, description, closed_form: v, pipeline: Cell::Empty, residual: None }
}

fn pipeline(quantity: &'static str, description: &'static str, v: Cell) -> Quantity {
    Quantity { quantity, description, closed_form: Cell::Empty, pipeline: v, residual: None }
}

#[derive(Serialize)]
struct EvalReport {
    meta: Meta,
    x: Vec<f64>,
    y: Vec<f64>,
    quantities: Vec<Quantity>,
    geometry: PointGeometry,
    #[serde(skip_serializing_if = "Option::is_none")]
    terms: Option<Terms>,
}

pub fn eval(args: &RunArgs) -> Result<Output, Failure> {
    let loaded = load(&args.source, args.seed)?;
    let spec = &loaded.spec;
    let x = args.point.clone().map(|c| c.0).ok_or_else(|| Failure::Config("eval needs --point".into()))?;
    let y = args.dir.clone().map(|c| c.0).ok_or_else(|| Failure::Config("eval needs --dir".into()))?;
    check_len("--point", &x, spec.n)?;
    check_len("--dir", &y, spec.n)?;

    let geom = PointGeometry::new(spec, &x)?;
    let cf = closed_form_at(&geom, &y)?;
    let e = finsler::finsler_eval_with(&Kropina { spec }, &x, &y, Some(&KropinaBhDensity { spec }), Precision::Adaptive)?;
    let sigma = bh_volume(spec, &x)?;
    let (al, rs) = (&geom.alpha, &geom.rs);
    use Cell::{Scalar as S, Vector as V};
    let quantities = vec![
        both("F", "Kropina norm α²/β", S(cf.f), S(e.f)),
        closed("beta", "β = b_i y^i", S(cf.beta)),
        closed("alpha^2", "α² = a_ij y^i y^j", S(cf.alpha_sq)),
        both("g", "fundamental tensor g_ij", V(cf.g.clone()), V(e.g.clone())),
        both("g^-1", "inverse fundamental tensor g^ij", V(cf.g_inv.clone()), V(e.g_inv.clone())),
        pipeline("G", "spray coefficients G^i", V(e.spray.clone())),
        pipeline("R^i_k", "Riemann curvature R^i_k", V(e.riemann_curvature.clone())),
        closed("T", "difference Ric − αRic(y)", S(cf.t)),
        both("Ric", "Ricci scalar Ric(x, y)", S(cf.ric), S(e.ric)),
        pipeline("Ric_bar", "contracted Riemann tensor R^k_jkl", V(e.ric_bar.clone())),
        both("Ric_kl", "Ricci tensor", V(cf.ric_tensor.clone()), V(e.ric_tensor.clone())),
        both("R", "scalar curvature g^kl Ric_kl", S(cf.scalar), S(e.scalar)),
        closed("sigma", "Busemann-Hausdorff density (2/b)^n √det a", S(sigma)),
        pipeline("S", "S-curvature for the Busemann-Hausdorff density", e.s_curvature.map_or(Cell::Empty, S)),
        closed("f", "coefficient f of the isotropy conditions", S(cf.f_coefficient)),
        closed("kappa", "predicted isotropic constant κ", S(cf.kappa)),
        closed("n(n-1)kappa", "predicted scalar curvature", S(cf.predicted_scalar)),
        closed("alpha-Ric", "Ricci tensor of α", V(al.ricci.clone())),
        closed("alpha-R", "scalar curvature of α", S(al.scalar)),
        closed("b^2", "squared α-norm of β", S(rs.b2)),
        closed("c", "trace coefficient c = r^m_m / n", S(rs.c)),
        closed("s^m s_m", "squared norm of s_i", S(rs.s_sq)),
        closed("s^t_m s^m_t", "trace of s∘s", S(rs.s_trace_sq)),
    ];
    let terms = if args.verbose_terms { Some(terms(spec, &x, &y)?) } else { None };

    let mut sections = Vec::new();
    if let Some(t) = &terms {
        sections.extend(term_sections("", t));
    }
    let rows = quantities
        .iter()
        .map(|q| Row {
            point_index: 0,
            x: x.clone(),
            quantity: q.quantity.to_string(),
            closed_form: q.closed_form.clone(),
            pipeline: q.pipeline.clone(),
            residual: q.residual,
        })
        .collect();
    let m = meta("eval", &loaded, args, false);
    let doc = Document { title: format!("eval at x = ({}), y = ({})", list(&x), list(&y)), meta: m.clone(), sections, rows };
    let report = EvalReport { meta: m, x, y, quantities, geometry: geom, terms };
    Ok(Output { text: emit(args.format, &doc, &report), code: 0 })
}

fn list(v: &[f64]) -> String {
    v.iter().map(|t| num(*t)).collect::<Vec<_>>().join(", ")
}

fn term_sections(suffix: &str, t: &Terms) -> Vec<Section> {
    vec![
        Section::Table(
            format!("Ricci terms{suffix}"),
            vec!["term", "value"],
            t.ricci.iter().map(|r| vec![r.label.to_string(), num(r.value)]).collect(),
        ),
        Section::Table(
            format!("Scalar curvature terms{suffix}"),
            vec!["power of F", "term", "value"],
            t.scalar.iter().map(|r| vec![r.power_of_f.to_string(), r.label.to_string(), num(r.value)]).collect(),
        ),
    ]
}

const VERIFIED: [&str; 4] = ["g", "Ric", "Ric_kl", "R"];

#[derive(Debug, Clone, Serialize)]
struct VerifySample {
    point_index: usize,
    dir_index: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    quantities: Vec<Quantity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    terms: Option<Terms>,
}

#[derive(Debug, Clone, Serialize)]
struct Summary {
    quantity: &'static str,
    max_residual: f64,
    mean_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
struct VerifyReport {
    passed: bool,
    max_residual: f64,
    summary: Vec<Summary>,
    samples: Vec<VerifySample>,
}

fn verify_point(
    spec: &FieldSpec,
    k: usize,
    x: &[f64],
    dirs: usize,
    seed: u64,
    verbose: bool,
) -> Result<Vec<VerifySample>, Failure> {
    let geom = PointGeometry::new(spec, x)?;
    let metric = Kropina { spec };
    let ys = sample_directions(spec, x, dirs, seed, k)?;
    ys.into_iter()
        .enumerate()
        .map(|(j, y)| {
            let cf = closed_form_at(&geom, &y)?;
            let e = finsler::finsler_eval_with::<_, KropinaBhDensity>(&metric, x, &y, None, Precision::Adaptive)?;
            let quantities = vec![
                both("g", "fundamental tensor g_ij", Cell::Vector(cf.g), Cell::Vector(e.g)),
                both("Ric", "Ricci scalar Ric(x, y)", Cell::Scalar(cf.ric), Cell::Scalar(e.ric)),
                both("Ric_kl", "Ricci tensor", Cell::Vector(cf.ric_tensor), Cell::Vector(e.ric_tensor)),
                both("R", "scalar curvature", Cell::Scalar(cf.scalar), Cell::Scalar(e.scalar)),
            ];
            let terms = if verbose { Some(terms(spec, x, &y)?) } else { None };
            Ok(VerifySample { point_index: k, dir_index: j, x: x.to_vec(), y, quantities, terms })
        })
        .collect()
}

fn run_verify(spec: &FieldSpec, args: &RunArgs) -> Result<VerifyReport, Failure> {
    let points = sample_points(spec, args.points as usize, args.seed)?;
    let per_point: Vec<Vec<VerifySample>> = finsler::with_pool(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(k, x)| verify_point(spec, k, x, args.dirs as usize, args.seed, args.verbose_terms))
            .collect::<Result<_, _>>()
    })?;
    let samples: Vec<VerifySample> = per_point.into_iter().flatten().collect();
    let summary: Vec<Summary> = VERIFIED
        .iter()
        .enumerate()
        .map(|(q, &quantity)| {
            let r: Vec<f64> = samples.iter().map(|s| s.quantities[q].residual.unwrap_or(f64::NAN)).collect();
            Summary {
                quantity,
                max_residual: r.iter().cloned().fold(0.0, f64::max),
                mean_residual: r.iter().sum::<f64>() / r.len() as f64,
            }
        })
        .collect();
    let max_residual = summary.iter().map(|s| s.max_residual).fold(0.0, f64::max);
    let passed = summary.iter().all(|s| s.max_residual <= args.tol && s.mean_residual.is_finite());
    Ok(VerifyReport { passed, max_residual, summary, samples })
}

fn verify_sections(r: &VerifyReport, tol: f64) -> Vec<Section> {
    let status = if r.passed { "pass" } else { "FAIL" };
    vec![
        Section::List(
            "Verification".into(),
            vec![
                ("status".into(), format!("{status} (max residual {} against tol {})", num(r.max_residual), num(tol))),
                ("samples".into(), r.samples.len().to_string()),
            ],
        ),
        Section::Table(
            "Residuals by quantity".into(),
            vec!["quantity", "max residual", "mean residual"],
            r.summary
                .iter()
                .map(|s| vec![s.quantity.to_string(), num(s.max_residual), num(s.mean_residual)])
                .collect(),
        ),
    ]
}

fn verify_rows(r: &VerifyReport) -> Vec<Row> {
    r.samples
        .iter()
        .flat_map(|s| {
            s.quantities.iter().map(move |q| Row {
                point_index: s.point_index,
                x: s.x.clone(),
                quantity: format!("{}@y{}", q.quantity, s.dir_index),
                closed_form: q.closed_form.clone(),
                pipeline: q.pipeline.clone(),
                residual: q.residual,
            })
        })
        .collect()
}

#[derive(Serialize)]
struct VerifyDocument<'a> {
    meta: Meta,
    #[serde(flatten)]
    report: &'a VerifyReport,
}

pub fn verify(args: &RunArgs) -> Result<Output, Failure> {
    let loaded = load(&args.source, args.seed)?;
    let report = run_verify(&loaded.spec, args)?;
    let m = meta("verify", &loaded, args, true);
    let mut sections = verify_sections(&report, args.tol);
    if args.verbose_terms {
        for s in &report.samples {
            if let Some(t) = &s.terms {
                sections.extend(term_sections(&format!(" at point {} direction {}", s.point_index, s.dir_index), t));
            }
        }
    }
    let doc = Document {
        title: format!("verify {}", loaded.spec.name),
        meta: m.clone(),
        sections,
        rows: verify_rows(&report),
    };
    let code = if report.passed { 0 } else { EXIT_VIOLATION };
    let text = emit(args.format, &doc, &VerifyDocument { meta: m, report: &report });
    Ok(Output { text, code })
}

fn run_classify(spec: &FieldSpec, args: &RunArgs) -> Result<ClassificationReport, Failure> {
    if spec.n < 3 {
        return Err(KropinaError::Dimension(spec.n).into());
    }
    let points = sample_points(spec, args.points as usize, args.seed)?;
    Ok(classify(spec, &points, args.dirs as usize, args.tol, Mode::from(args.mode), args.seed)?)
}

fn classify_sections(r: &ClassificationReport) -> Vec<Section> {
    vec![
        Section::List(
            "Classification".into(),
            vec![
                ("verdict".into(), r.verdict.to_string()),
                ("max condition residual".into(), num(r.max_residual)),
                ("kappa mean".into(), num(r.kappa_mean)),
                ("kappa spread".into(), num(r.kappa_spread)),
                ("scalar curvature spread over directions".into(), num(r.scalar_direction_spread)),
                ("scalar curvature vs n(n-1)kappa".into(), num(r.scalar_vs_predicted)),
                ("closed form vs pipeline scalar curvature".into(), num(r.closed_vs_pipeline)),
            ],
        ),
        Section::Table(
            "Conditions by point".into(),
            vec!["point", "x", "cond1 raw", "cond1", "cond2", "cond3", "kappa"],
            r.points
                .iter()
                .map(|p| {
                    vec![
                        p.index.to_string(),
                        list(&p.x),
                        num(p.cond1_raw),
                        flag(p.cond1, r.tol),
                        flag(p.cond2, r.tol),
                        flag(p.cond3, r.tol),
                        num(p.kappa),
                    ]
                })
                .collect(),
        ),
        Section::Table(
            "Diagnostics".into(),
            vec!["identity", "description", "max residual", "status"],
            r.diagnostics
                .iter()
                .map(|d| {
                    let status = if d.passed { "pass" } else { "FAIL" };
                    vec![d.name.to_string(), d.description.to_string(), num(d.max_residual), status.to_string()]
                })
                .collect(),
        ),
    ]
}

fn flag(v: f64, tol: f64) -> String {
    if v > tol {
        format!("**{}**", num(v))
    } else {
        num(v)
    }
}

fn classify_rows(r: &ClassificationReport) -> Vec<Row> {
    let mut rows = Vec::new();
    for p in &r.points {
        let row = |quantity: String, closed_form, pipeline, residual| Row {
            point_index: p.index,
            x: p.x.clone(),
            quantity,
            closed_form,
            pipeline,
            residual,
        };
        rows.push(row("cond1".into(), Cell::Scalar(p.cond1_raw), Cell::Empty, Some(p.cond1)));
        rows.push(row("cond2".into(), Cell::Empty, Cell::Empty, Some(p.cond2)));
        rows.push(row("cond3".into(), Cell::Empty, Cell::Empty, Some(p.cond3)));
        rows.push(row("kappa".into(), Cell::Scalar(p.kappa), Cell::Empty, None));
        for (j, s) in p.samples.iter().enumerate() {
            rows.push(row(
                format!("R@y{j}"),
                Cell::Scalar(s.closed_scalar),
                Cell::Scalar(s.pipeline_scalar),
                Some(rel(s.closed_scalar, s.pipeline_scalar)),
            ));
            rows.push(row(format!("S@y{j}"), Cell::Empty, Cell::Scalar(s.s_curvature), Some(s.s_curvature.abs())));
        }
    }
    rows
}

#[derive(Serialize)]
struct ClassifyDocument<'a> {
    meta: Meta,
    #[serde(flatten)]
    report: &'a ClassificationReport,
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Isotropic => 0,
        Verdict::NotIsotropic => EXIT_VIOLATION,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

pub fn classify_cmd(args: &RunArgs) -> Result<Output, Failure> {
    let loaded = load(&args.source, args.seed)?;
    let report = run_classify(&loaded.spec, args)?;
    let m = meta("classify", &loaded, args, true);
    let doc = Document {
        title: format!("classify {}", loaded.spec.name),
        meta: m.clone(),
        sections: classify_sections(&report),
        rows: classify_rows(&report),
    };
    let text = emit(args.format, &doc, &ClassifyDocument { meta: m, report: &report });
    Ok(Output { text, code: verdict_code(report.verdict) })
}

#[derive(Serialize)]
struct FullReport<'a> {
    meta: Meta,
    verify: &'a VerifyReport,
    /// Absent for `n < 3`.
    classify: Option<&'a ClassificationReport>,
}

/// Exit code follows verification only; the verdict is reported, not judged.
pub fn report(args: &RunArgs) -> Result<Output, Failure> {
    let loaded = load(&args.source, args.seed)?;
    let verify = run_verify(&loaded.spec, args)?;
    let classification = if loaded.spec.n >= 3 { Some(run_classify(&loaded.spec, args)?) } else { None };
    let m = meta("report", &loaded, args, true);
    let mut sections = verify_sections(&verify, args.tol);
    let mut rows = verify_rows(&verify);
    match &classification {
        Some(c) => {
            sections.extend(classify_sections(c));
            rows.extend(classify_rows(c));
        }
        None => sections.push(Section::List(
            "Classification".into(),
            vec![("verdict".into(), "skipped (needs n >= 3)".into())],
        )),
    }
    let doc = Document { title: format!("report {}", loaded.spec.name), meta: m.clone(), sections, rows };
    let full = FullReport { meta: m, verify: &verify, classify: classification.as_ref() };
    let code = if verify.passed { 0 } else { EXIT_VIOLATION };
    Ok(Output { text: emit(args.format, &doc, &full), code })
}

#[derive(Serialize)]
struct CatalogEntry {
    name: &'static str,
    dimension: usize,
    config_sha256: String,
}

pub fn catalog(args: &CatalogArgs) -> Result<Output, Failure> {
    if let Some(name) = &args.catalog {
        let document = catalog_document(name, args.seed)?;
        fields::parse_field_config(&document).map_err(|e| Failure::Config(e.to_string()))?;
        let mut text = document.trim_end().to_string();
        text.push('\n');
        return Ok(Output { text, code: 0 });
    }
    let entries = fields::catalog_names()
        .into_iter()
        .map(|name| {
            let document = catalog_document(name, args.seed)?;
            let spec = fields::parse_field_config(&document).map_err(|e| Failure::Config(e.to_string()))?;
            Ok(CatalogEntry {
                name,
                dimension: spec.n,
                config_sha256: format!("{:x}", Sha256::digest(document.as_bytes())),
            })
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&entries).expect("catalog serializes") + "\n",
        Format::Csv => {
            let mut s = String::from("name,dimension,config_sha256\n");
            for e in &entries {
                s += &format!("{},{},{}\n", e.name, e.dimension, e.config_sha256);
            }
            s
        }
        Format::Md => {
            let mut s = String::from("| name | n | config sha256 |\n|---|---|---|\n");
            for e in &entries {
                s += &format!("| {} | {} | {} |\n", e.name, e.dimension, e.config_sha256);
            }
            s
        }
    };
    Ok(Output { text, code: 0 })
}
