//! The isotropic scalar curvature test and its consistency diagnostics.

use rayon::prelude::*;
use serde::Serialize;

use super::{kappa_of, sampling, scalar_curvature_at, KropinaError, PointGeometry};
use crate::autodiff::{hessian, AutodiffError, Scalar, ScalarFn};
use crate::fields::FieldSpec;
use crate::finsler::{self, Kropina, KropinaBhDensity};
use crate::riemannian::{AlphaCurvature, RsData};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    General,
    S0Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Isotropic,
    NotIsotropic,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Isotropic => "isotropic",
            Verdict::NotIsotropic => "not-isotropic",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleRecord {
    pub y: Vec<f64>,
    pub closed_scalar: f64,
    pub pipeline_scalar: f64,
    pub s_curvature: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointRecord {
    pub index: usize,
    pub x: Vec<f64>,
    /// Unnormalized difference of the two sides of the first condition.
    pub cond1_raw: f64,
    pub cond1: f64,
    pub cond2: f64,
    pub cond3: f64,
    pub kappa: f64,
    pub predicted_scalar: f64,
    pub samples: Vec<SampleRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostic {
    pub name: &'static str,
    pub description: &'static str,
    pub max_residual: f64,
    pub passed: bool,
    /// `(lhs, rhs)` at each point.
    pub values: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub field: String,
    pub n: usize,
    pub mode: Mode,
    pub tol: f64,
    pub verdict: Verdict,
    pub max_residual: f64,
    pub kappa_mean: f64,
    pub kappa_spread: f64,
    /// Largest spread of the closed-form scalar curvature across directions.
    pub scalar_direction_spread: f64,
    /// Largest gap between the closed-form scalar curvature and `n(n−1)κ`.
    pub scalar_vs_predicted: f64,
    /// Largest gap between the closed-form and pipeline scalar curvature.
    pub closed_vs_pipeline: f64,
    pub points: Vec<PointRecord>,
    pub diagnostics: Vec<Diagnostic>,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

/// `|lhs − rhs| / (1 + largest term)`.
fn normalized(diff: f64, terms: &[f64]) -> f64 {
    diff.abs() / (1.0 + terms.iter().fold(0.0f64, |m, t| m.max(t.abs())))
}

/// Returns `(raw, normalized)` for the first condition.
fn condition1(alpha: &AlphaCurvature, rs: &RsData, mode: Mode) -> (f64, f64) {
    let nf = rs.n as f64;
    let b2 = rs.b2;
    let s_sq = if mode == Mode::S0Zero { 0.0 } else { rs.s_sq };
    let terms = [
        b2 / (2.0 * (nf - 1.0)) * alpha.scalar,
        -(nf - 2.0) / (2.0 * (nf - 1.0)) * rs.s_trace_sq,
        -(nf - 2.0) * (nf + 1.0) / (2.0 * (nf - 1.0) * b2) * s_sq,
        -(nf - 2.0) / 2.0 * (2.0 * rs.c_b - rs.c * rs.c),
    ];
    let lhs = alpha.bb_ricci;
    let raw = lhs - terms.iter().sum::<f64>();
    let mut all = terms.to_vec();
    all.push(lhs);
    (raw, normalized(raw, &all))
}

fn condition2(rs: &RsData) -> f64 {
    let dev: f64 = rs.r.iter().zip(&rs.a).map(|(r, a)| (r - rs.c * a).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = rs.r.iter().map(|r| r * r).sum::<f64>().sqrt();
    dev / norm.max(1.0)
}

/// One part of the right side of the third condition, as a function of `y`.
struct Cond3Part<'a> {
    alpha: &'a AlphaCurvature,
    rs: &'a RsData,
    mode: Mode,
    ricci_part: bool,
}

impl ScalarFn for Cond3Part<'_> {
    fn eval<S: Scalar>(&self, y: &[S]) -> Result<S, AutodiffError> {
        let rs = self.rs;
        let b2 = rs.b2;
        if self.ricci_part {
            return Ok(self.alpha.ricci_y(y) * (-b2 * b2));
        }
        let nf = rs.n as f64;
        let beta = rs.beta(y);
        let c = rs.c;
        let mut v = beta * beta * (c * c) - rs.c0(y) * beta * b2;
        if self.mode == Mode::General {
            let s0 = rs.s0(y);
            v += s0 * beta * (2.0 * c) + s0 * s0 - rs.s0_0(y) * b2;
        }
        Ok(v * (nf - 2.0))
    }
}

fn condition3(alpha: &AlphaCurvature, rs: &RsData, mode: Mode) -> Result<f64, KropinaError> {
    let n = rs.n;
    let block: Vec<usize> = (0..n).collect();
    let y0 = vec![0.0; n];
    let ric = hessian(&Cond3Part { alpha, rs, mode, ricci_part: true }, &y0, &block)?;
    let rest = hessian(&Cond3Part { alpha, rs, mode, ricci_part: false }, &y0, &block)?;
    let (mut diff, mut scale) = (0.0f64, 0.0f64);
    for i in 0..n {
        for j in 0..n {
            let lhs = 2.0 * rs.f * rs.a[i * n + j];
            diff = diff.max((lhs - ric[i][j] - rest[i][j]).abs());
            scale = scale.max(lhs.abs()).max(ric[i][j].abs()).max(rest[i][j].abs());
        }
    }
    Ok(diff / (1.0 + scale))
}

fn identity(name: &'static str, description: &'static str, values: Vec<(f64, f64, f64)>, tol: f64) -> Diagnostic {
    let max_residual = values.iter().map(|(l, r, s)| (l - r).abs() / (1.0 + s)).fold(0.0, f64::max);
    Diagnostic {
        name,
        description,
        max_residual,
        passed: max_residual <= tol,
        values: values.into_iter().map(|(l, r, _)| (l, r)).collect(),
    }
}

/// Consistency identities that hold for every metric of isotropic scalar
/// curvature, evaluated at the given points, plus `S = 0` at the samples.
pub fn diagnostics(geoms: &[PointGeometry], s_values: &[Vec<f64>], tol: f64) -> Vec<Diagnostic> {
    let scale = |xs: &[f64]| xs.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let mut f_trace = Vec::new();
    let mut f_full = Vec::new();
    let mut div_s = Vec::new();
    let mut contracted = Vec::new();
    let mut closing = Vec::new();
    for g in geoms {
        let (al, rs) = (&g.alpha, &g.rs);
        let nf = rs.n as f64;
        let (b2, c, cb) = (rs.b2, rs.c, rs.c_b);
        let (bb, ar, ssq, str2, ds) = (al.bb_ricci, al.scalar, rs.s_sq, rs.s_trace_sq, rs.div_s);

        let t1 = b2 / (nf - 1.0) * (bb - b2 * ar);
        let t2 = (nf - 2.0) / (nf - 1.0) * (2.0 * ssq - b2 * ds);
        f_trace.push((rs.f, t1 + t2, scale(&[rs.f, t1, t2])));

        let parts = [
            -b2 * b2 * ar,
            (nf - 2.0) * b2 * c * c,
            -(nf - 2.0) * b2 * cb,
            (nf - 2.0) * (ssq - b2 * ds),
        ];
        f_full.push((nf * rs.f, parts.iter().sum(), scale(&parts)));

        let parts = [
            -(b2 * ar - nf * bb) / (nf - 2.0),
            (nf - 1.0) * (cb - c * c),
            (nf + 1.0) / b2 * ssq,
        ];
        div_s.push((ds, parts.iter().sum(), scale(&parts)));

        let parts = [(nf - 1.0) * cb, bb, ds, str2];
        contracted.push((parts.iter().sum(), 0.0, scale(&parts)));

        let parts = [
            (nf - 1.0) * (2.0 * cb - c * c),
            2.0 * (nf - 1.0) / (nf - 2.0) * bb,
            -b2 / (nf - 2.0) * ar,
            str2,
            (nf + 1.0) * ssq / b2,
        ];
        closing.push((parts.iter().sum(), 0.0, scale(&parts)));
    }
    let s_max = s_values.iter().flatten().fold(0.0f64, |m, s| m.max(s.abs()));
    vec![
        identity("f-trace-form", "f from the b^i b^j contraction equals f from the combined trace form", f_trace, tol),
        identity("f-full-trace", "n f equals the a^{ij} contraction of the Hessian identity", f_full, tol),
        identity("divergence-s", "s^m_|m equals its expression through curvature, c and s^m s_m", div_s, tol),
        identity("contracted-derivative", "(n-1)c_b + b^k b^l aRic_kl + s^m_|m + s^t_m s^m_t = 0", contracted, tol),
        identity("closing-identity", "first condition rewritten after eliminating s^m_|m", closing, tol),
        Diagnostic {
            name: "s-curvature",
            description: "S-curvature with the Busemann-Hausdorff density vanishes",
            max_residual: s_max,
            passed: s_max <= tol,
            values: s_values.iter().map(|v| (v.iter().fold(0.0f64, |m, s| m.max(s.abs())), 0.0)).collect(),
        },
    ]
}

struct PointOutcome {
    geom: PointGeometry,
    record: PointRecord,
    s_values: Vec<f64>,
}

fn classify_point(
    spec: &FieldSpec,
    index: usize,
    x: &[f64],
    dirs: usize,
    seed: u64,
    mode: Mode,
    tol: f64,
) -> Result<PointOutcome, KropinaError> {
    let geom = PointGeometry::new(spec, x)?;
    let (alpha, rs) = (&geom.alpha, &geom.rs);
    if mode == Mode::S0Zero {
        let s_max = rs.s_low.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        if s_max > tol {
            return Err(KropinaError::SNotZero(s_max));
        }
    }
    let (cond1_raw, cond1) = condition1(alpha, rs, mode);
    let cond2 = condition2(rs);
    let cond3 = condition3(alpha, rs, mode)?;
    let (kappa, predicted_scalar) = kappa_of(rs);

    let metric = Kropina { spec };
    let density = KropinaBhDensity { spec };
    let mut samples = Vec::with_capacity(dirs);
    let mut s_values = Vec::with_capacity(dirs);
    for y in sampling::sample_directions(spec, x, dirs, seed, index)? {
        let closed_scalar = scalar_curvature_at(&geom, &y)?;
        let eval = finsler::finsler_eval(&metric, x, &y, Some(&density))?;
        let s = eval.s_curvature.unwrap_or(f64::NAN);
        s_values.push(s);
        samples.push(SampleRecord { y, closed_scalar, pipeline_scalar: eval.scalar, s_curvature: s });
    }
    let record = PointRecord {
        index,
        x: x.to_vec(),
        cond1_raw,
        cond1,
        cond2,
        cond3,
        kappa,
        predicted_scalar,
        samples,
    };
    Ok(PointOutcome { geom, record, s_values })
}

/// Test the three conditions at every point, aggregate a verdict, and run
/// the diagnostics. Directions at point `k` come from stream `k` of `seed`.
pub fn classify(
    spec: &FieldSpec,
    points: &[Vec<f64>],
    dirs: usize,
    tol: f64,
    mode: Mode,
    seed: u64,
) -> Result<ClassificationReport, KropinaError> {
    if spec.n < 3 {
        return Err(KropinaError::Dimension(spec.n));
    }
    if points.is_empty() {
        return Err(KropinaError::EmptyPoints);
    }
    let outcomes: Vec<PointOutcome> = finsler::with_pool(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(k, x)| classify_point(spec, k, x, dirs, seed, mode, tol))
            .collect::<Result<_, _>>()
    })?;

    let max_residual = outcomes
        .iter()
        .map(|o| o.record.cond1.max(o.record.cond2).max(o.record.cond3))
        .fold(0.0, f64::max);
    let kappas: Vec<f64> = outcomes.iter().map(|o| o.record.kappa).collect();
    let kappa_mean = kappas.iter().sum::<f64>() / kappas.len() as f64;
    let kappa_spread = kappas.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - kappas.iter().cloned().fold(f64::INFINITY, f64::min);
    let kappa_scale = kappa_mean.abs().max(1.0);
    let verdict = if max_residual <= tol && kappa_spread <= tol * kappa_scale {
        Verdict::Isotropic
    } else if max_residual <= 10.0 * tol && kappa_spread <= 10.0 * tol * kappa_scale {
        Verdict::Inconclusive
    } else {
        Verdict::NotIsotropic
    };

    let mut scalar_direction_spread = 0.0f64;
    let mut scalar_vs_predicted = 0.0f64;
    let mut closed_vs_pipeline = 0.0f64;
    for o in &outcomes {
        let rs: Vec<f64> = o.record.samples.iter().map(|s| s.closed_scalar).collect();
        if let (Some(lo), Some(hi)) = (
            rs.iter().cloned().reduce(f64::min),
            rs.iter().cloned().reduce(f64::max),
        ) {
            let mean = rs.iter().sum::<f64>() / rs.len() as f64;
            scalar_direction_spread = scalar_direction_spread.max((hi - lo) / (1.0 + mean.abs()));
        }
        for s in &o.record.samples {
            scalar_vs_predicted = scalar_vs_predicted.max(rel(s.closed_scalar, o.record.predicted_scalar));
            closed_vs_pipeline = closed_vs_pipeline.max(rel(s.closed_scalar, s.pipeline_scalar));
        }
    }

    let geoms: Vec<PointGeometry> = outcomes.iter().map(|o| o.geom.clone()).collect();
    let s_values: Vec<Vec<f64>> = outcomes.iter().map(|o| o.s_values.clone()).collect();
    let diagnostics = diagnostics(&geoms, &s_values, tol);

    Ok(ClassificationReport {
        field: spec.name.clone(),
        n: spec.n,
        mode,
        tol,
        verdict,
        max_residual,
        kappa_mean,
        kappa_spread,
        scalar_direction_spread,
        scalar_vs_predicted,
        closed_vs_pipeline,
        points: outcomes.into_iter().map(|o| o.record).collect(),
        diagnostics,
    })
}
