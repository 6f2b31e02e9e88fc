//! Closed-form curvature of Kropina metrics and the isotropy classifier.
//!
//! Every expression is assembled from [`RsData`] and [`AlphaCurvature`] at the
//! point, contracted with `y` once per direction. Long sums are kept as
//! labelled terms so they can be printed one by one.

mod classify;
mod sampling;

pub use classify::{
    classify, diagnostics, ClassificationReport, Diagnostic, Mode, PointRecord, SampleRecord,
    Verdict,
};
pub use sampling::{bh_volume, bh_volume_monte_carlo, sample_directions, sample_points, CONE_MARGIN};

use serde::Serialize;
use thiserror::Error;

use crate::autodiff::AutodiffError;
use crate::fields::{FieldError, FieldSpec, B2_FLOOR};
use crate::finsler::FinslerError;
use crate::linalg::{lin, mat_vec};
use crate::riemannian::{point_data, AlphaCurvature, RsData};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KropinaError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Finsler(#[from] FinslerError),
    #[error("direction outside the cone beta > 0: beta = {beta:e}")]
    OutOfCone { beta: f64 },
    #[error("b^2 = {0:e} is below the floor")]
    Degenerate(f64),
    #[error("the classifier needs n >= 3, got n = {0}")]
    Dimension(usize),
    #[error("no points to classify")]
    EmptyPoints,
    #[error("s0-zero mode requires s_i = 0, found |s_i| up to {0:e}")]
    SNotZero(f64),
}

impl From<AutodiffError> for KropinaError {
    fn from(e: AutodiffError) -> Self {
        KropinaError::Field(FieldError::Eval(e))
    }
}

/// A labelled summand.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Term {
    pub label: &'static str,
    pub value: f64,
}

fn total(terms: &[Term]) -> f64 {
    terms.iter().map(|t| t.value).sum()
}

/// Geometry at one point, shared by every direction.
#[derive(Debug, Clone, Serialize)]
pub struct PointGeometry {
    pub x: Vec<f64>,
    pub alpha: AlphaCurvature,
    pub rs: RsData,
}

impl PointGeometry {
    pub fn new(spec: &FieldSpec, x: &[f64]) -> Result<Self, KropinaError> {
        let (alpha, rs) = point_data(spec, x)?;
        if rs.b2 < B2_FLOOR {
            return Err(KropinaError::Degenerate(rs.b2));
        }
        Ok(PointGeometry { x: x.to_vec(), alpha, rs })
    }
}

/// Every contraction with `y` the closed forms use.
struct Ctx<'a> {
    n: usize,
    nf: f64,
    rs: &'a RsData,
    al: &'a AlphaCurvature,
    y: &'a [f64],
    a2: f64,
    beta: f64,
    f: f64,
    b2: f64,
    b4: f64,
    b6: f64,
    /// `y_i = a_ij y^j`.
    yl: Vec<f64>,
    r00: f64,
    r0: f64,
    s0: f64,
    r00_0: f64,
    r0_0: f64,
    s0_0: f64,
    /// `b^k r_{00|k}`.
    b_r00k: f64,
    /// `r_{i0}`.
    ri0: Vec<f64>,
    /// `s^i_0`.
    s_up0: Vec<f64>,
    /// `r_{k0} s^k_0`.
    rk0_sk0: f64,
    /// `r_{k0} s^k`.
    rk0_sk: f64,
    /// `r_k s^k_0`.
    rk_sk0: f64,
    /// `s^k_0 s_k`.
    sk0_sk: f64,
    /// `s^k_{0|k}`.
    s_up0_div: f64,
    /// `b^k s_{0|k}`.
    b_s0k: f64,
    /// `r^k_0 r_{k0}`.
    rk0_rk0: f64,
    /// `r_{m0} r^m`.
    rm0_rm: f64,
    /// `r^m_0 s_m`.
    rm0_sm: f64,
    /// `r^m_{m|0}`.
    rtrace_0: f64,
    /// `r^m_{0|m}`.
    r_up0_div: f64,
    /// `b^m r_{0|m}`.
    b_r0m: f64,
    ric_y: f64,
    by_ric: f64,
    /// `b² r^m_m − r`.
    brr: f64,
}

impl<'a> Ctx<'a> {
    fn new(g: &'a PointGeometry, y: &'a [f64]) -> Result<Self, KropinaError> {
        let rs = &g.rs;
        let n = rs.n;
        let beta = rs.beta(y);
        if !(beta > 0.0) {
            return Err(KropinaError::OutOfCone { beta });
        }
        let a2 = rs.alpha_sq(y);
        let idx3 = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
        let ri0 = rs.r_i0(y);
        let s_up0 = rs.s_up0(y);
        let r_up0 = mat_vec(&rs.a_inv, &ri0);
        let mut s_up0_div = 0.0;
        let mut r_up0_div = 0.0;
        for k in 0..n {
            for p in 0..n {
                for j in 0..n {
                    s_up0_div += rs.a_inv[k * n + p] * rs.s_cov[idx3(p, j, k)] * y[j];
                    r_up0_div += rs.a_inv[k * n + p] * rs.r_cov[idx3(p, j, k)] * y[j];
                }
            }
        }
        let mut b_s0k = 0.0;
        let mut b_r0m = 0.0;
        for i in 0..n {
            for k in 0..n {
                b_s0k += rs.s_low_cov[i * n + k] * y[i] * rs.b_up[k];
                b_r0m += rs.r_low_cov[i * n + k] * y[i] * rs.b_up[k];
            }
        }
        let b2 = rs.b2;
        Ok(Ctx {
            n,
            nf: n as f64,
            rs,
            al: &g.alpha,
            y,
            a2,
            beta,
            f: a2 / beta,
            b2,
            b4: b2 * b2,
            b6: b2 * b2 * b2,
            yl: mat_vec(&rs.a, y),
            r00: rs.r00(y),
            r0: rs.r0(y),
            s0: rs.s0(y),
            r00_0: rs.r00_0(y),
            r0_0: rs.r0_0(y),
            s0_0: rs.s0_0(y),
            b_r00k: lin(&rs.r00_k(y), &rs.b_up),
            rk0_sk0: lin(&ri0, &s_up0),
            rk0_sk: lin(&ri0, &rs.s_up),
            rk_sk0: lin(&rs.r_low, &s_up0),
            sk0_sk: lin(&s_up0, &rs.s_low),
            s_up0_div,
            b_s0k,
            rk0_rk0: lin(&r_up0, &ri0),
            rm0_rm: lin(&ri0, &rs.r_up),
            rm0_sm: lin(&r_up0, &rs.s_low),
            rtrace_0: lin(&rs.r_trace_cov, y),
            r_up0_div,
            b_r0m,
            ric_y: g.alpha.ricci_y(y),
            by_ric: g.alpha.b_y_ricci(y),
            brr: b2 * rs.r_trace - rs.r_scalar,
            ri0,
            s_up0,
        })
    }

    /// `F_{.k} = (2β y_k − α² b_k)/β²`.
    fn f_dot(&self) -> Vec<f64> {
        let bb = self.beta * self.beta;
        (0..self.n).map(|k| (2.0 * self.beta * self.yl[k] - self.a2 * self.rs.b[k]) / bb).collect()
    }

    /// `F_{.k.l} = 2a_kl/β − 2(y_k b_l + y_l b_k)/β² + 2α² b_k b_l/β³`.
    fn f_dot_dot(&self) -> Vec<f64> {
        let n = self.n;
        let (b, yl, beta) = (&self.rs.b, &self.yl, self.beta);
        let mut m = vec![0.0; n * n];
        for k in 0..n {
            for l in 0..n {
                m[k * n + l] = 2.0 * self.rs.a[k * n + l] / beta
                    - 2.0 * (yl[k] * b[l] + yl[l] * b[k]) / (beta * beta)
                    + 2.0 * self.a2 * b[k] * b[l] / (beta * beta * beta);
            }
        }
        m
    }
}

/// The fundamental tensor and its inverse from the Kropina displays.
pub fn closed_fundamental_at(g: &PointGeometry, y: &[f64]) -> Result<(Vec<f64>, Vec<f64>), KropinaError> {
    let c = Ctx::new(g, y)?;
    let rs = c.rs;
    let n = c.n;
    let (f, beta, a2, b2) = (c.f, c.beta, c.a2, c.b2);
    let mut gm = vec![0.0; n * n];
    let mut gi = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let k = i * n + j;
            gm[k] = f / beta
                * (2.0 * rs.a[k] + 3.0 * f / beta * rs.b[i] * rs.b[j]
                    - 4.0 / beta * (rs.b[i] * c.yl[j] + rs.b[j] * c.yl[i])
                    + 4.0 * c.yl[i] * c.yl[j] / a2);
            gi[k] = beta / (2.0 * f)
                * (rs.a_inv[k] - rs.b_up[i] * rs.b_up[j] / b2
                    + 2.0 / (b2 * f) * (rs.b_up[i] * y[j] + rs.b_up[j] * y[i])
                    + 2.0 * (1.0 - 2.0 * beta / (b2 * f)) * y[i] * y[j] / a2);
        }
    }
    Ok((gm, gi))
}

pub fn closed_fundamental(spec: &FieldSpec, x: &[f64], y: &[f64]) -> Result<(Vec<f64>, Vec<f64>), KropinaError> {
    closed_fundamental_at(&PointGeometry::new(spec, x)?, y)
}

fn t_terms(c: &Ctx) -> Vec<Term> {
    let (nf, b2, b4) = (c.nf, c.b2, c.b4);
    let (a2, beta) = (c.a2, c.beta);
    let a4 = a2 * a2;
    let rs = c.rs;
    vec![
        Term { label: "3(n-1)/(b^4 a^4) r00^2 beta^2", value: 3.0 * (nf - 1.0) / (b4 * a4) * c.r00 * c.r00 * beta * beta },
        Term { label: "(n-1)/(b^2 a^2) r00|0 beta", value: (nf - 1.0) / (b2 * a2) * c.r00_0 * beta },
        Term { label: "-4(n-1)/(b^4 a^2) r00 r0 beta", value: -4.0 * (nf - 1.0) / (b4 * a2) * c.r00 * c.r0 * beta },
        Term { label: "2(n-1)/(b^4 a^2) r00 s0 beta", value: 2.0 * (nf - 1.0) / (b4 * a2) * c.r00 * c.s0 * beta },
        Term { label: "-r/b^4 r00", value: -rs.r_scalar / b4 * c.r00 },
        Term { label: "r^k_k/b^2 r00", value: rs.r_trace / b2 * c.r00 },
        Term { label: "2n/b^2 r_k0 s^k_0", value: 2.0 * nf / b2 * c.rk0_sk0 },
        Term { label: "1/b^2 b^k r00|k", value: c.b_r00k / b2 },
        Term { label: "1/b^4 r0^2", value: c.r0 * c.r0 / b4 },
        Term { label: "-1/b^2 r0|0", value: -c.r0_0 / b2 },
        Term { label: "-2(2n-3)/b^4 r0 s0", value: -2.0 * (2.0 * nf - 3.0) / b4 * c.r0 * c.s0 },
        Term { label: "(n-2)/b^2 s0|0", value: (nf - 2.0) / b2 * c.s0_0 },
        Term { label: "-(n-2)/b^4 s0^2", value: -(nf - 2.0) / b4 * c.s0 * c.s0 },
        Term { label: "-1/(b^2 beta) r_k0 s^k a^2", value: -c.rk0_sk / (b2 * beta) * a2 },
        Term { label: "-1/(b^2 beta) r_k s^k_0 a^2", value: -c.rk_sk0 / (b2 * beta) * a2 },
        Term { label: "-1/(b^4 beta) r s0 a^2", value: -rs.r_scalar * c.s0 / (b4 * beta) * a2 },
        Term { label: "1/(b^2 beta) r^k_k s0 a^2", value: rs.r_trace * c.s0 / (b2 * beta) * a2 },
        Term { label: "(n-1)/(b^2 beta) s^k_0 s_k a^2", value: (nf - 1.0) * c.sk0_sk / (b2 * beta) * a2 },
        Term { label: "-1/beta s^k_0|k a^2", value: -c.s_up0_div / beta * a2 },
        Term { label: "1/(b^2 beta) b^k s0|k a^2", value: c.b_s0k / (b2 * beta) * a2 },
        Term { label: "-1/(4 beta^2) s^j_k s^k_j a^4", value: -rs.s_trace_sq / (4.0 * beta * beta) * a4 },
        Term { label: "-1/(2 b^2 beta^2) s^k s_k a^4", value: -rs.s_sq / (2.0 * b2 * beta * beta) * a4 },
    ]
}

/// The summands of `T` in `Ric = αRic + T`.
pub fn closed_ricci_terms(spec: &FieldSpec, x: &[f64], y: &[f64]) -> Result<Vec<Term>, KropinaError> {
    let g = PointGeometry::new(spec, x)?;
    Ok(t_terms(&Ctx::new(&g, y)?))
}

/// `(Ric, T)` with `Ric = αRic_ij y^i y^j + T`.
pub fn closed_ricci_at(g: &PointGeometry, y: &[f64]) -> Result<(f64, f64), KropinaError> {
    let c = Ctx::new(g, y)?;
    let t = total(&t_terms(&c));
    Ok((c.ric_y + t, t))
}

pub fn closed_ricci(spec: &FieldSpec, x: &[f64], y: &[f64]) -> Result<(f64, f64), KropinaError> {
    closed_ricci_at(&PointGeometry::new(spec, x)?, y)
}

/// Per-index pieces of the Ricci tensor display.
struct IndexData {
    rl0: Vec<f64>,
    rl0_0: Vec<f64>,
    r00_l: Vec<f64>,
    /// `s_m s^m_l`.
    sm_sml: Vec<f64>,
    /// `r_m s^m_l`.
    rm_sml: Vec<f64>,
    /// `r^m_l s_m`.
    rml_sm: Vec<f64>,
    /// `s_{l|m} b^m`.
    sl_m_b: Vec<f64>,
    /// `r_{lm} s^m_0`.
    rlm_sm0: Vec<f64>,
    /// `r_{0m} s^m_l`.
    r0m_sml: Vec<f64>,
}

fn index_data(c: &Ctx) -> IndexData {
    let rs = c.rs;
    let n = c.n;
    let y = c.y;
    let idx3 = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
    let col = |m: &[f64], v: &[f64]| -> Vec<f64> {
        (0..n).map(|l| (0..n).map(|p| v[p] * m[p * n + l]).sum()).collect()
    };
    IndexData {
        rl0: c.ri0.clone(),
        rl0_0: (0..n)
            .map(|l| {
                let mut acc = 0.0;
                for j in 0..n {
                    for k in 0..n {
                        acc += rs.r_cov[idx3(l, j, k)] * y[j] * y[k];
                    }
                }
                acc
            })
            .collect(),
        r00_l: rs.r00_k(y),
        sm_sml: col(&rs.s_mixed, &rs.s_low),
        rm_sml: col(&rs.s_mixed, &rs.r_low),
        rml_sm: mat_vec(&rs.r, &rs.s_up),
        sl_m_b: mat_vec(&rs.s_low_cov, &rs.b_up),
        rlm_sm0: mat_vec(&rs.r, &c.s_up0),
        r0m_sml: col(&rs.s_mixed, &c.ri0),
    }
}

fn ricci_tensor_ctx(c: &Ctx) -> Vec<f64> {
    let rs = c.rs;
    let n = c.n;
    let (nf, b2, b4, f) = (c.nf, c.b2, c.b4, c.f);
    let (f2, f3, f4) = (f * f, f * f * f, f * f * f * f);
    let (r00, r0, s0) = (c.r00, c.r0, c.s0);
    let fk = c.f_dot();
    let fkl = c.f_dot_dot();
    let d = index_data(c);
    let idx3 = |i: usize, j: usize, k: usize| (i * n + j) * n + k;

    let a_block = -(nf - 5.0) / (b4 * f3) * r00 * r00
        + 2.0 / (b4 * f2) * r00 * (s0 - 2.0 * r0)
        + c.r00_0 / (b2 * f2)
        + (nf - 1.0) / (2.0 * b2) * c.sk0_sk
        + c.brr * s0 / (2.0 * b4)
        + (nf + 1.0) / (b2 * f) * c.rk0_sk0
        + (c.b_s0k - c.rk_sk0 - c.rk0_sk) / (2.0 * b2)
        - 0.5 * (c.s_up0_div + f / b2 * rs.s_sq + f / 2.0 * rs.s_trace_sq)
        - (nf + 1.0) / (b4 * f) * s0 * r0;

    let b_block = 3.0 * (nf - 5.0) / (b4 * f4) * r00 * r00
        + 4.0 / (b4 * f3) * r00 * (2.0 * r0 - s0)
        - 2.0 / (b2 * f3) * c.r00_0
        + (nf + 1.0) / (b4 * f2) * s0 * r0
        - (nf + 1.0) / (b2 * f2) * c.rk0_sk0
        - rs.s_sq / (2.0 * b2)
        - rs.s_trace_sq / 4.0;

    let c_block: Vec<f64> = (0..n)
        .map(|l| {
            let (rl0, rl, sl) = (d.rl0[l], rs.r_low[l], rs.s_low[l]);
            -6.0 * (nf - 3.0) / (b4 * f3) * r00 * rl0
                + (nf - 7.0) / (b4 * f2) * rl0 * r0
                - (nf - 3.0) / (b4 * f2) * rl0 * s0
                + (nf - 3.0) / (b4 * f2) * r00 * rl
                + 2.0 / (b4 * f2) * r00 * sl
                + 2.0 / (b2 * f2) * d.rl0_0[l]
                - (nf - 1.0) / (2.0 * b2 * f2) * d.r00_l[l]
                + (nf - 1.0) / (2.0 * b2) * d.sm_sml[l]
                + c.brr * sl / (2.0 * b4)
                - d.rm_sml[l] / (2.0 * b2)
                - d.rml_sm[l] / (2.0 * b2)
                - rs.s_mixed_div[l] / 2.0
                + d.sl_m_b[l] / (2.0 * b2)
                - (nf + 1.0) / (2.0 * b4 * f) * (sl * r0 + s0 * rl)
                + (nf + 1.0) / (2.0 * b2 * f) * (d.rlm_sm0[l] + d.r0m_sml[l])
        })
        .collect();

    let mut out = vec![0.0; n * n];
    for k in 0..n {
        for l in k..n {
            let kl = k * n + l;
            let (rk0, rl0) = (d.rl0[k], d.rl0[l]);
            let (rk, rl, sk, sl) = (rs.r_low[k], rs.r_low[l], rs.s_low[k], rs.s_low[l]);
            let r_kl = rs.r[kl];
            let mut r_kl_0 = 0.0;
            let mut r_k0_l = 0.0;
            let mut r_l0_k = 0.0;
            let mut b_rklm = 0.0;
            let mut rkm_sml = 0.0;
            let mut rlm_smk = 0.0;
            for m in 0..n {
                r_kl_0 += rs.r_cov[idx3(k, l, m)] * c.y[m];
                r_k0_l += rs.r_cov[idx3(k, m, l)] * c.y[m];
                r_l0_k += rs.r_cov[idx3(l, m, k)] * c.y[m];
                b_rklm += rs.r_cov[idx3(k, l, m)] * rs.b_up[m];
                rkm_sml += rs.r[k * n + m] * rs.s_mixed[m * n + l];
                rlm_smk += rs.r[l * n + m] * rs.s_mixed[m * n + k];
            }
            let skl = rs.s_low_cov[kl] + rs.s_low_cov[l * n + k];
            let rkl_cov = rs.r_low_cov[kl] + rs.r_low_cov[l * n + k];
            let rest = 8.0 * (nf - 2.0) / (b4 * f2) * rk0 * rl0
                + 4.0 * (nf - 2.0) / (b4 * f2) * r00 * r_kl
                + 2.0 * (nf - 1.0) / (b4 * f) * r_kl * s0
                - 2.0 * (nf - 3.0) / (b4 * f) * r_kl * r0
                - (3.0 * nf - 5.0) / (b4 * f) * (rl0 * rk + rk0 * rl)
                + (nf - 3.0) / (b4 * f) * (rk0 * sl + rl0 * sk)
                - (3.0 * nf - 7.0) / (2.0 * b4) * (rk * sl + rl * sk)
                - (nf - 2.0) / b4 * sk * sl
                + rk * rl / b4
                - 2.0 * r_kl_0 / (b2 * f)
                + (nf - 1.0) / (b2 * f) * (r_k0_l + r_l0_k)
                + (nf - 2.0) / (2.0 * b2) * skl
                + c.brr * r_kl / b4
                + b_rklm / b2
                - rkl_cov / (2.0 * b2)
                + (nf - 1.0) / (2.0 * b2) * (rkm_sml + rlm_smk);
            let v = c.al.ricci[kl]
                + fkl[kl] * a_block
                + fk[l] * fk[k] * b_block
                + fk[k] * c_block[l]
                + fk[l] * c_block[k]
                + rest;
            out[kl] = v;
            out[l * n + k] = v;
        }
    }
    out
}

/// The Ricci curvature tensor `Ric_kl` of the Kropina metric.
pub fn ricci_tensor_at(g: &PointGeometry, y: &[f64]) -> Result<Vec<f64>, KropinaError> {
    Ok(ricci_tensor_ctx(&Ctx::new(g, y)?))
}

pub fn ricci_tensor(spec: &FieldSpec, x: &[f64], y: &[f64]) -> Result<Vec<f64>, KropinaError> {
    ricci_tensor_at(&PointGeometry::new(spec, x)?, y)
}

/// `F_{.k}` and `F_{.k.l}` in closed form.
pub fn f_derivatives(spec: &FieldSpec, x: &[f64], y: &[f64]) -> Result<(Vec<f64>, Vec<f64>), KropinaError> {
    let g = PointGeometry::new(spec, x)?;
    let c = Ctx::new(&g, y)?;
    Ok((c.f_dot(), c.f_dot_dot()))
}

/// Summands of the scalar curvature, grouped by the power of `1/F` that
/// multiplies them. Each term already includes its power of `F`.
fn scalar_terms(c: &Ctx) -> Vec<(i32, Term)> {
    let rs = c.rs;
    let al = c.al;
    let (nf, b2, b4, b6, beta) = (c.nf, c.b2, c.b4, c.b6, c.beta);
    let (r00, r0, s0) = (c.r00, c.r0, c.s0);
    let (r, brr, rmm) = (rs.r_scalar, c.brr, rs.r_trace);
    let mut out: Vec<(i32, Term)> = Vec::new();
    let mut push = |p: i32, label: &'static str, value: f64| {
        out.push((p, Term { label, value: value / c.f.powi(p) }));
    };

    push(5, "-24(n-2) beta/b^6 r00^2", -24.0 * (nf - 2.0) * beta / b6 * r00 * r00);

    push(4, "-(n-1)(n-8)/b^4 r00^2", -(nf - 1.0) * (nf - 8.0) / b4 * r00 * r00);
    push(4, "40(n-2) beta/b^6 r00 r0", 40.0 * (nf - 2.0) * beta / b6 * r00 * r0);
    push(4, "-8(n-2) beta/b^6 r00 s0", -8.0 * (nf - 2.0) * beta / b6 * r00 * s0);
    push(4, "-4(n-2) beta/b^4 r00|0", -4.0 * (nf - 2.0) * beta / b4 * c.r00_0);

    push(3, "2(n-1)/b^2 r00|0", 2.0 * (nf - 1.0) / b2 * c.r00_0);
    push(3, "4(n-1)/b^4 r00 (s0 - 2 r0)", 4.0 * (nf - 1.0) / b4 * r00 * (s0 - 2.0 * r0));
    push(3, "2(n-2) beta/b^4 r0|0", 2.0 * (nf - 2.0) * beta / b4 * c.r0_0);
    push(3, "-2(n-2) beta/b^4 s0|0", -2.0 * (nf - 2.0) * beta / b4 * c.s0_0);
    push(3, "2(n-2) beta/b^4 b^m r00|m", 2.0 * (nf - 2.0) * beta / b4 * c.b_r00k);
    push(3, "2(n-1) beta/b^4 r^k_0 r_k0", 2.0 * (nf - 1.0) * beta / b4 * c.rk0_rk0);
    push(3, "-4(n-2) beta/b^4 r_k0 s^k_0", -4.0 * (nf - 2.0) * beta / b4 * c.rk0_sk0);
    push(3, "-14(n-2) beta/b^6 r0^2", -14.0 * (nf - 2.0) * beta / b6 * r0 * r0);
    push(3, "2(n-2) beta/b^6 s0^2", 2.0 * (nf - 2.0) * beta / b6 * s0 * s0);
    push(3, "2(n-3)(b^2 r^m_m - r) beta/b^6 r00", 2.0 * (nf - 3.0) * brr * beta / b6 * r00);
    push(3, "12(n-2) beta/b^6 r0 s0", 12.0 * (nf - 2.0) * beta / b6 * r0 * s0);
    push(3, "-2(3n-5) beta/b^6 r00 r", -2.0 * (3.0 * nf - 5.0) * beta / b6 * r00 * r);
    push(3, "-2 beta/b^2 aRic", -2.0 * beta / b2 * c.ric_y);

    push(2, "-(n^2+4n-7)/b^4 s0 r0", -(nf * nf + 4.0 * nf - 7.0) / b4 * s0 * r0);
    push(2, "(n^2+2n-1)/b^2 r_0m s^m_0", (nf * nf + 2.0 * nf - 1.0) / b2 * c.rk0_sk0);
    push(2, "-(n-5)(b^2 r^m_m - r) beta/b^6 r0", -(nf - 5.0) * brr * beta / b6 * r0);
    push(2, "3(n-1) beta/b^6 r r0", 3.0 * (nf - 1.0) * beta / b6 * r * r0);
    push(2, "(n-1)(b^2 r^m_m - r) beta/b^6 s0", (nf - 1.0) * brr * beta / b6 * s0);
    push(2, "-(2n-3) beta/b^4 r^m_0 s_m", -(2.0 * nf - 3.0) * beta / b4 * c.rm0_sm);
    push(2, "-(3n-7) beta/b^6 r s0", -(3.0 * nf - 7.0) * beta / b6 * r * s0);
    push(2, "-(n-2)/b^4 s0^2", -(nf - 2.0) / b4 * s0 * s0);
    push(2, "r0^2/b^4", r0 * r0 / b4);
    push(2, "-beta/b^2 r^m_m|0", -beta / b2 * c.rtrace_0);
    push(2, "(n-1)/b^2 beta r^m_0|m", (nf - 1.0) / b2 * beta * c.r_up0_div);
    push(2, "-(2n-1) beta/b^4 r_m0 r^m", -(2.0 * nf - 1.0) * beta / b4 * c.rm0_rm);
    push(2, "(n-2) beta/b^4 b^m s0|m", (nf - 2.0) * beta / b4 * c.b_s0k);
    push(2, "-(n-2) beta/b^4 s_m s^m_0", -(nf - 2.0) * beta / b4 * c.sk0_sk);
    push(2, "(n-2)/b^2 s0|0", (nf - 2.0) / b2 * c.s0_0);
    push(2, "(b^2 r^m_m - r)/b^4 r00", brr / b4 * r00);
    push(2, "-(n-2) beta/b^4 b^m r0|m", -(nf - 2.0) * beta / b4 * c.b_r0m);
    push(2, "b^m r00|m/b^2", c.b_r00k / b2);
    push(2, "-r0|0/b^2", -c.r0_0 / b2);
    push(2, "(n-2) beta/b^4 r_m s^m_0", (nf - 2.0) * beta / b4 * c.rk_sk0);
    push(2, "aRic", c.ric_y);
    push(2, "beta/b^2 (b^k y^l + b^l y^k) aRic_kl", 2.0 * beta / b2 * c.by_ric);

    push(1, "(n^2-1)/(2b^2) s_m s^m_0", (nf * nf - 1.0) / (2.0 * b2) * c.sk0_sk);
    push(1, "(n+1)(b^2 r^m_m - r)/(2b^4) s0", (nf + 1.0) * brr / (2.0 * b4) * s0);
    push(1, "(n+1) s0|m b^m/(2b^2)", (nf + 1.0) * c.b_s0k / (2.0 * b2));
    push(1, "-(n+1)/(2b^2) r_m s^m_0", -(nf + 1.0) / (2.0 * b2) * c.rk_sk0);
    push(1, "-(n+1)/(2b^2) r_0m s^m", -(nf + 1.0) / (2.0 * b2) * c.rk0_sk);
    push(1, "-(n+1)/2 s^m_0|m", -(nf + 1.0) / 2.0 * c.s_up0_div);
    push(1, "-(n-2) beta/b^4 s_m s^m", -(nf - 2.0) * beta / b4 * rs.s_sq);
    push(1, "beta r^m r_m/b^4", beta * rs.r_sq / b4);
    push(1, "-(n-3) beta/(2b^4) r^k s_k", -(nf - 3.0) * beta / (2.0 * b4) * rs.r_dot_s);
    push(1, "(n-2) beta/(2b^2) s^m_|m", (nf - 2.0) * beta / (2.0 * b2) * rs.div_s);
    push(1, "r^m_m r^t_t beta/(2b^2)", rmm * rmm * beta / (2.0 * b2));
    push(1, "-r r^m_m beta/b^4", -r * rmm * beta / b4);
    push(1, "beta/(2b^2) b^m r^k_k|m", beta / (2.0 * b2) * lin(&rs.r_trace_cov, &rs.b_up));
    push(1, "-beta/(2b^2) r^m_|m", -beta / (2.0 * b2) * rs.div_r);
    push(1, "(n-1) beta/(2b^2) r^k_m s^m_k", (nf - 1.0) * beta / (2.0 * b2) * rs.r_s_trace);
    push(1, "beta/(2b^2) (b^2 aR - b^k b^l aRic_kl)", beta / (2.0 * b2) * (b2 * al.scalar - al.bb_ricci));

    push(0, "-n/(2b^2) s_m s^m", -nf / (2.0 * b2) * rs.s_sq);
    push(0, "-n/4 s^t_m s^m_t", -nf / 4.0 * rs.s_trace_sq);
    out
}

/// Summands of the scalar curvature with their power of `1/F`.
pub fn scalar_curvature_terms(spec: &FieldSpec, x: &[f64], y: &[f64]) -> Result<Vec<(i32, Term)>, KropinaError> {
    let g = PointGeometry::new(spec, x)?;
    Ok(scalar_terms(&Ctx::new(&g, y)?))
}

pub fn scalar_curvature_at(g: &PointGeometry, y: &[f64]) -> Result<f64, KropinaError> {
    Ok(scalar_terms(&Ctx::new(g, y)?).iter().map(|(_, t)| t.value).sum())
}

/// Scalar curvature of the Kropina metric from the grouped display.
pub fn scalar_curvature(spec: &FieldSpec, x: &[f64], y: &[f64]) -> Result<f64, KropinaError> {
    scalar_curvature_at(&PointGeometry::new(spec, x)?, y)
}

/// `f = −b² b^i b^j αRic_ij + (n−2)b²c² − (n−2)b²c_b − (n−2)s^m s_m`.
pub fn compute_f(spec: &FieldSpec, x: &[f64]) -> Result<f64, KropinaError> {
    Ok(PointGeometry::new(spec, x)?.rs.f)
}

fn kappa_of(rs: &RsData) -> (f64, f64) {
    let nf = rs.n as f64;
    let kappa = -(2.0 * rs.s_sq + rs.b2 * rs.s_trace_sq) / (4.0 * (nf - 1.0) * rs.b2);
    (kappa, nf * (nf - 1.0) * kappa)
}

/// `(κ, n(n−1)κ)` with `(n−1)κ = −(2s^m s_m + b² s^t_m s^m_t)/(4b²)`.
pub fn predicted_kappa(spec: &FieldSpec, x: &[f64]) -> Result<(f64, f64), KropinaError> {
    Ok(kappa_of(&PointGeometry::new(spec, x)?.rs))
}

/// Everything the closed forms give at `(x, y)`.
#[derive(Debug, Clone, Serialize)]
pub struct KropinaClosedForm {
    pub f: f64,
    pub beta: f64,
    pub alpha_sq: f64,
    pub g: Vec<f64>,
    pub g_inv: Vec<f64>,
    pub t: f64,
    pub ric: f64,
    pub ric_tensor: Vec<f64>,
    pub scalar: f64,
    pub f_coefficient: f64,
    pub kappa: f64,
    pub predicted_scalar: f64,
}

pub fn closed_form_at(g: &PointGeometry, y: &[f64]) -> Result<KropinaClosedForm, KropinaError> {
    let c = Ctx::new(g, y)?;
    let (gm, gi) = closed_fundamental_at(g, y)?;
    let t = total(&t_terms(&c));
    let (kappa, predicted_scalar) = kappa_of(&g.rs);
    Ok(KropinaClosedForm {
        f: c.f,
        beta: c.beta,
        alpha_sq: c.a2,
        g: gm,
        g_inv: gi,
        t,
        ric: c.ric_y + t,
        ric_tensor: ricci_tensor_ctx(&c),
        scalar: scalar_terms(&c).iter().map(|(_, t)| t.value).sum(),
        f_coefficient: g.rs.f,
        kappa,
        predicted_scalar,
    })
}

pub fn closed_form(spec: &FieldSpec, x: &[f64], y: &[f64]) -> Result<KropinaClosedForm, KropinaError> {
    closed_form_at(&PointGeometry::new(spec, x)?, y)
}
