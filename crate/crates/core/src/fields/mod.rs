//! Geometric input data: the Riemannian metric `a_ij(x)` and the 1-form
//! `b_i(x)` of a Kropina metric, defined by expressions in a JSON document.

mod catalog;
mod expr;
mod jet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autodiff::{AutodiffError, Scalar};
use crate::linalg;

pub use catalog::{catalog_names, load_catalog, random_poly_document, CATALOG};
pub use expr::{parse_expr, parse_expr_with, BinOp, Expr, Func};
pub use jet::FieldJet;

/// Smallest admissible `b² = a^{ij} b_i b_j`.
pub const B2_FLOOR: f64 = 1e-6;

/// Default sampling box half-width.
pub const DEFAULT_GUARD: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier '{name}' at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("non-integer exponent at byte {offset}")]
    NonIntegerExponent { offset: usize },
    #[error("in {location}: {source}")]
    InExpression { location: String, source: Box<FieldError> },
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("metric is not symmetric: a_{i}{j} differs from a_{j}{i}")]
    Asymmetric { i: usize, j: usize },
    #[error("definition cycle through '{0}'")]
    Cycle(String),
    #[error("point {point:?} outside the guard box")]
    OutsideGuard { point: Vec<f64> },
    #[error("metric not positive definite at {point:?}")]
    NotPositiveDefinite { point: Vec<f64> },
    #[error("singular metric at {point:?}")]
    Singular { point: Vec<f64> },
    #[error("degenerate 1-form at {point:?}: b^2 = {b2:e}")]
    Degenerate { point: Vec<f64>, b2: f64 },
    #[error("unknown catalog entry '{0}'")]
    UnknownCatalog(String),
    #[error("evaluation failed: {0}")]
    Eval(#[from] AutodiffError),
}

/// The on-disk field document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub name: String,
    pub dimension: usize,
    #[serde(default)]
    pub defs: serde_json::Map<String, serde_json::Value>,
    /// Either the upper triangle (row `i` holds `a_ii .. a_in`) or the full
    /// square matrix, which must then be symmetric.
    pub metric_upper: Vec<Vec<String>>,
    pub oneform: Vec<String>,
    #[serde(default)]
    pub guard_box: Option<Vec<[f64; 2]>>,
}

/// A validated field: `a_ij(x)` symmetric positive definite and `b² ≥ 1e-6`
/// at every probe point of the guard box.
#[derive(Debug, Clone)]
pub struct FieldSpec {
    pub name: String,
    pub n: usize,
    /// Definitions in evaluation order.
    pub defs: Vec<(String, Expr)>,
    /// Full `n × n` metric, row-major, lower triangle mirrored from upper.
    pub metric: Vec<Expr>,
    pub oneform: Vec<Expr>,
    pub guard: Vec<(f64, f64)>,
}

/// `a_ij`, `a^{ij}`, `det a`, `b_i`, `b^i` and `b²` at a point.
#[derive(Debug, Clone)]
pub struct FieldValues<S> {
    pub a: Vec<S>,
    pub a_inv: Vec<S>,
    pub det: S,
    pub b: Vec<S>,
    pub b_up: Vec<S>,
    pub b2: S,
}

fn located(location: String) -> impl FnOnce(FieldError) -> FieldError {
    move |e| FieldError::InExpression { location, source: Box::new(e) }
}

/// Parse and validate a field document.
pub fn parse_field_config(document: &str) -> Result<FieldSpec, FieldError> {
    let cfg: FieldConfig =
        serde_json::from_str(document).map_err(|e| FieldError::Schema(e.to_string()))?;
    FieldSpec::from_config(&cfg)
}

impl FieldSpec {
    pub fn from_config(cfg: &FieldConfig) -> Result<Self, FieldError> {
        let n = cfg.dimension;
        if n < 2 {
            return Err(FieldError::Dimension(format!("dimension must be at least 2, got {n}")));
        }

        let mut names = Vec::new();
        let mut texts = Vec::new();
        for (name, value) in &cfg.defs {
            let text = value.as_str().ok_or_else(|| {
                FieldError::Schema(format!("definition '{name}' must be a string"))
            })?;
            if Func::from_str_name(name) || is_coordinate(name) {
                return Err(FieldError::Schema(format!("definition name '{name}' is reserved")));
            }
            names.push(name.clone());
            texts.push(text.to_string());
        }
        let parsed: Vec<Expr> = texts
            .iter()
            .zip(&names)
            .map(|(t, name)| parse_expr_with(t, &names).map_err(located(format!("defs.{name}"))))
            .collect::<Result<_, _>>()?;
        let order = topological_order(&names, &parsed)?;
        let slot_of = |name: &str| order.iter().position(|&k| names[k] == name).unwrap();
        let mut defs = Vec::with_capacity(order.len());
        for &k in &order {
            let mut e = parsed[k].clone();
            e.relink(&slot_of);
            defs.push((names[k].clone(), e));
        }
        let relinked = |text: &str, location: String| -> Result<Expr, FieldError> {
            let mut e = parse_expr_with(text, &names).map_err(located(location))?;
            e.relink(&slot_of);
            Ok(e)
        };

        let rows = &cfg.metric_upper;
        if rows.len() != n {
            return Err(FieldError::Dimension(format!(
                "metric_upper has {} rows, expected {n}",
                rows.len()
            )));
        }
        let square = rows.iter().all(|r| r.len() == n);
        let triangular = rows.iter().enumerate().all(|(i, r)| r.len() == n - i);
        if !square && !triangular {
            return Err(FieldError::Dimension(
                "metric_upper rows must have lengths n, n-1, ..., 1 or all n".into(),
            ));
        }
        let mut metric = vec![Expr::Num(0.0); n * n];
        let mut lower = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            for (c, text) in row.iter().enumerate() {
                let j = if square { c } else { i + c };
                let e = relinked(text, format!("metric_upper[{i}][{c}]"))?;
                if j >= i {
                    metric[i * n + j] = e.clone();
                    metric[j * n + i] = e;
                } else {
                    lower.push((i, j, e));
                }
            }
        }
        let oneform: Vec<Expr> = cfg
            .oneform
            .iter()
            .enumerate()
            .map(|(i, t)| relinked(t, format!("oneform[{i}]")))
            .collect::<Result<_, _>>()?;
        if oneform.len() != n {
            return Err(FieldError::Dimension(format!(
                "oneform has {} entries, expected {n}",
                oneform.len()
            )));
        }
        let arity = defs
            .iter()
            .map(|(_, e)| e)
            .chain(&metric)
            .chain(&oneform)
            .map(Expr::arity)
            .max()
            .unwrap_or(0);
        if arity > n {
            return Err(FieldError::Dimension(format!(
                "coordinate x{arity} used in a {n}-dimensional field"
            )));
        }

        let guard = match &cfg.guard_box {
            None => vec![(-DEFAULT_GUARD, DEFAULT_GUARD); n],
            Some(b) if b.len() == n && b.iter().all(|[lo, hi]| lo < hi) => {
                b.iter().map(|&[lo, hi]| (lo, hi)).collect()
            }
            Some(_) => {
                return Err(FieldError::Schema(format!(
                    "guard_box must hold {n} intervals with lo < hi"
                )))
            }
        };

        let spec = FieldSpec { name: cfg.name.clone(), n, defs, metric, oneform, guard };

        let probes = spec.probe_points();
        for (i, j, e) in &lower {
            for p in &probes {
                let upper = spec.eval_entry(&spec.metric[j * n + i], p)?;
                let low = spec.eval_entry(e, p)?;
                if (upper - low).abs() > 1e-12 * (1.0 + upper.abs()) {
                    return Err(FieldError::Asymmetric { i: i + 1, j: j + 1 });
                }
            }
        }
        for p in &probes {
            spec.check_point(p)?;
        }
        Ok(spec)
    }

    fn eval_entry(&self, e: &Expr, x: &[f64]) -> Result<f64, FieldError> {
        let defs = self.eval_defs(x)?;
        Ok(e.eval(x, &defs)?)
    }

    fn eval_defs<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>, FieldError> {
        let mut vals: Vec<S> = Vec::with_capacity(self.defs.len());
        for (_, e) in &self.defs {
            let v = e.eval(x, &vals)?;
            vals.push(v);
        }
        Ok(vals)
    }

    /// Guard corners, centre and a fixed pseudo-random set inside the box.
    pub fn probe_points(&self) -> Vec<Vec<f64>> {
        let n = self.n;
        let mut pts = Vec::new();
        for mask in 0..(1usize << n) {
            pts.push(
                (0..n)
                    .map(|i| if mask >> i & 1 == 1 { self.guard[i].1 } else { self.guard[i].0 })
                    .collect(),
            );
        }
        pts.push(self.guard.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect());
        let mut rng = ChaCha8Rng::seed_from_u64(0x6b726f70);
        for _ in 0..16 {
            pts.push(self.guard.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect());
        }
        pts
    }

    pub fn in_guard(&self, x: &[f64]) -> bool {
        x.len() == self.n
            && x.iter().zip(&self.guard).all(|(&v, &(lo, hi))| v >= lo - 1e-12 && v <= hi + 1e-12)
    }

    /// Uniform random point in the guard box.
    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.guard.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect()
    }

    /// Raw `a_ij` (full, row-major) and `b_i`, with no validation.
    pub fn eval_raw<S: Scalar>(&self, x: &[S]) -> Result<(Vec<S>, Vec<S>), FieldError> {
        let defs = self.eval_defs(x)?;
        let n = self.n;
        let mut a = vec![S::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let e = &self.metric[i * n + j];
                if e.is_zero_literal() {
                    continue;
                }
                let v = e.eval(x, &defs)?;
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        let b = self.oneform.iter().map(|e| e.eval(x, &defs)).collect::<Result<_, _>>()?;
        Ok((a, b))
    }

    /// Whether `a_ij` is the literal zero, so `α²` may skip it.
    pub fn metric_entry_is_zero(&self, i: usize, j: usize) -> bool {
        self.metric[i * self.n + j].is_zero_literal()
    }

    /// Field values with inverse, determinant, raised `b` and `b²` computed on
    /// the scalar type. The point must lie in the guard box.
    pub fn eval_field<S: Scalar>(&self, x: &[S]) -> Result<FieldValues<S>, FieldError> {
        let xv: Vec<f64> = x.iter().map(Scalar::value).collect();
        if !self.in_guard(&xv) {
            return Err(FieldError::OutsideGuard { point: xv });
        }
        self.eval_field_unguarded(x)
    }

    pub(crate) fn eval_field_unguarded<S: Scalar>(
        &self,
        x: &[S],
    ) -> Result<FieldValues<S>, FieldError> {
        let n = self.n;
        let (a, b) = self.eval_raw(x)?;
        let (a_inv, det) = linalg::invert(&a, n).ok_or_else(|| FieldError::Singular {
            point: x.iter().map(Scalar::value).collect(),
        })?;
        let b_up: Vec<S> = (0..n)
            .map(|i| {
                let mut acc = S::zero();
                for j in 0..n {
                    acc += a_inv[i * n + j] * b[j];
                }
                acc
            })
            .collect();
        let mut b2 = S::zero();
        for i in 0..n {
            b2 += b_up[i] * b[i];
        }
        Ok(FieldValues { a, a_inv, det, b, b_up, b2 })
    }

    /// Check positive definiteness and the `b²` floor at a real point.
    pub fn check_point(&self, x: &[f64]) -> Result<(), FieldError> {
        let fv = self.eval_field_unguarded(x)?;
        if linalg::cholesky_min_pivot(&fv.a, self.n).is_err() {
            return Err(FieldError::NotPositiveDefinite { point: x.to_vec() });
        }
        if fv.b2 < B2_FLOOR {
            return Err(FieldError::Degenerate { point: x.to_vec(), b2: fv.b2 });
        }
        Ok(())
    }
}

impl Func {
    fn from_str_name(s: &str) -> bool {
        matches!(s, "sqrt" | "exp" | "sin" | "cos")
    }
}

fn is_coordinate(name: &str) -> bool {
    name.strip_prefix('x').is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
}

fn topological_order(names: &[String], exprs: &[Expr]) -> Result<Vec<usize>, FieldError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    fn visit(
        k: usize,
        names: &[String],
        exprs: &[Expr],
        marks: &mut [Mark],
        order: &mut Vec<usize>,
    ) -> Result<(), FieldError> {
        match marks[k] {
            Mark::Done => return Ok(()),
            Mark::Active => return Err(FieldError::Cycle(names[k].clone())),
            Mark::New => {}
        }
        marks[k] = Mark::Active;
        let mut deps = Vec::new();
        exprs[k].visit_defs(&mut deps);
        for d in deps {
            let j = names.iter().position(|n| n == d).unwrap();
            visit(j, names, exprs, marks, order)?;
        }
        marks[k] = Mark::Done;
        order.push(k);
        Ok(())
    }
    let mut marks = vec![Mark::New; names.len()];
    let mut order = Vec::with_capacity(names.len());
    for k in 0..names.len() {
        visit(k, names, exprs, &mut marks, &mut order)?;
    }
    Ok(order)
}
