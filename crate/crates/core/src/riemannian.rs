//! Levi-Civita geometry of `α` and the covariant-derivative data of `β`.
//!
//! All tensors are flat row-major `Vec<f64>`; a rank-3 tensor `T_{ijk}` lives
//! at `i*n*n + j*n + k`, and rank-4 likewise. Partial derivatives come from a
//! first-order dual seeded on the coordinates, evaluated on a second dual so
//! that derivatives of the Christoffel symbols and of `b_{i|j}` are exact.

use serde::Serialize;

use crate::autodiff::{Dual, Scalar};
use crate::fields::{FieldError, FieldSpec, FieldValues};
use crate::linalg::{self, lin, quad};

#[derive(Debug, Clone, Serialize)]
pub struct AlphaCurvature {
    pub n: usize,
    /// `Γ^i_{jk}`.
    pub christoffel: Vec<f64>,
    /// `R^i_{jkl} = ∂_k Γ^i_{jl} − ∂_l Γ^i_{jk} + Γ^i_{km}Γ^m_{jl} − Γ^i_{lm}Γ^m_{jk}`.
    pub riemann: Vec<f64>,
    /// `Ric_{jl} = R^i_{jil}`.
    pub ricci: Vec<f64>,
    pub scalar: f64,
    /// `b^k b^l Ric_{kl}`.
    pub bb_ricci: f64,
    b_up: Vec<f64>,
}

impl AlphaCurvature {
    /// `Ric_{kl} y^k y^l`.
    pub fn ricci_y<S: Scalar>(&self, y: &[S]) -> S {
        quad(&self.ricci, y)
    }

    /// `b^k y^l Ric_{kl}`.
    pub fn b_y_ricci<S: Scalar>(&self, y: &[S]) -> S {
        let n = self.n;
        let w: Vec<f64> =
            (0..n).map(|l| (0..n).map(|k| self.b_up[k] * self.ricci[k * n + l]).sum()).collect();
        lin(&w, y)
    }

    pub fn gamma(&self, i: usize, j: usize, k: usize) -> f64 {
        self.christoffel[(i * self.n + j) * self.n + k]
    }

    pub fn riem(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.n;
        self.riemann[((i * n + j) * n + k) * n + l]
    }
}

/// The r/s symbol family of `β` with respect to `α` at one point.
#[derive(Debug, Clone, Serialize)]
pub struct RsData {
    pub n: usize,
    pub a: Vec<f64>,
    pub a_inv: Vec<f64>,
    pub det_a: f64,
    pub b: Vec<f64>,
    pub b_up: Vec<f64>,
    pub b2: f64,
    /// `b_{i|j}`.
    pub b_cov: Vec<f64>,
    /// `b_{i|j|k}`.
    pub b_cov2: Vec<f64>,
    pub r: Vec<f64>,
    pub s: Vec<f64>,
    /// `r_i = b^j r_{ji}`.
    pub r_low: Vec<f64>,
    /// `s_i = b^j s_{ji}`.
    pub s_low: Vec<f64>,
    pub r_up: Vec<f64>,
    pub s_up: Vec<f64>,
    /// `r = b^i r_i`.
    pub r_scalar: f64,
    /// `r^m_m`.
    pub r_trace: f64,
    /// `r^i_j = a^{ik} r_{kj}`.
    pub r_mixed: Vec<f64>,
    /// `s^i_j = a^{ik} s_{kj}`.
    pub s_mixed: Vec<f64>,
    /// `r_{ij|k}`.
    pub r_cov: Vec<f64>,
    /// `s_{ij|k}`.
    pub s_cov: Vec<f64>,
    /// `r_{i|j}`, covariant derivative of `r_i`.
    pub r_low_cov: Vec<f64>,
    /// `s_{i|j}`, covariant derivative of `s_i`.
    pub s_low_cov: Vec<f64>,
    /// `s^m_{|m}`.
    pub div_s: f64,
    /// `r^m_{|m}`.
    pub div_r: f64,
    /// `r^k_{k|m}`.
    pub r_trace_cov: Vec<f64>,
    /// `s^m_{l|m}`.
    pub s_mixed_div: Vec<f64>,
    /// `c = r^m_m / n`, so that `r_{ij} = c a_{ij}` when `β` is conformal.
    pub c: f64,
    /// `c_i = ∂c/∂x^i`.
    pub c_grad: Vec<f64>,
    /// `c_b = c_i b^i`.
    pub c_b: f64,
    /// `s^m s_m`.
    pub s_sq: f64,
    /// `s^t_m s^m_t`.
    pub s_trace_sq: f64,
    /// `r^m r_m`.
    pub r_sq: f64,
    /// `r^k s_k`.
    pub r_dot_s: f64,
    /// `r^k_m s^m_k`.
    pub r_s_trace: f64,
    /// `f = −b² b^i b^j αRic_ij + (n−2)b²c² − (n−2)b²c_b − (n−2)s^m s_m`.
    pub f: f64,
}

pub(crate) struct Connection<S> {
    pub fv: FieldValues<S>,
    /// `Γ^i_{jk}` at `(i*n + j)*n + k`.
    pub gamma: Vec<S>,
    /// `b_{i|j}` at `i*n + j`.
    pub b_cov: Vec<S>,
}

fn values_from_raw<S: Scalar>(
    a: Vec<S>,
    b: Vec<S>,
    n: usize,
    x: &[f64],
) -> Result<FieldValues<S>, FieldError> {
    let (a_inv, det) =
        linalg::invert(&a, n).ok_or_else(|| FieldError::Singular { point: x.to_vec() })?;
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

/// Christoffel symbols and `b_{i|j}` on any scalar type, using one extra dual
/// level seeded on the coordinates for the partial derivatives.
pub(crate) fn connection<S: Scalar, const N: usize>(
    spec: &FieldSpec,
    x: &[S],
) -> Result<Connection<S>, FieldError> {
    let n = spec.n;
    assert_eq!(n, N, "dual width must equal the field dimension");
    let xd: Vec<Dual<S, N>> = x.iter().enumerate().map(|(i, &v)| Dual::variable(v, i)).collect();
    let (ad, bd) = spec.eval_raw(&xd)?;
    let a: Vec<S> = ad.iter().map(|e| e.v).collect();
    let b: Vec<S> = bd.iter().map(|e| e.v).collect();
    let xv: Vec<f64> = x.iter().map(Scalar::value).collect();
    let fv = values_from_raw(a, b, n, &xv)?;

    // ∂_k a_{ij}
    let da = |i: usize, j: usize, k: usize| ad[i * n + j].d[k];
    let mut first_kind = vec![S::zero(); n * n * n];
    for l in 0..n {
        for j in 0..n {
            for k in j..n {
                let v = (da(l, k, j) + da(l, j, k) - da(j, k, l)) * 0.5;
                first_kind[(l * n + j) * n + k] = v;
                first_kind[(l * n + k) * n + j] = v;
            }
        }
    }
    let mut gamma = vec![S::zero(); n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in j..n {
                let mut acc = S::zero();
                for l in 0..n {
                    acc += fv.a_inv[i * n + l] * first_kind[(l * n + j) * n + k];
                }
                gamma[(i * n + j) * n + k] = acc;
                gamma[(i * n + k) * n + j] = acc;
            }
        }
    }
    let mut b_cov = vec![S::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = bd[i].d[j];
            for m in 0..n {
                acc -= gamma[(m * n + i) * n + j] * fv.b[m];
            }
            b_cov[i * n + j] = acc;
        }
    }
    Ok(Connection { fv, gamma, b_cov })
}

/// Everything the closed forms need at a point, before the r/s algebra.
struct PointGeometry {
    n: usize,
    fv: FieldValues<f64>,
    gamma: Vec<f64>,
    /// `∂_l Γ^i_{jk}` at `((i*n + j)*n + k)*n + l`.
    dgamma: Vec<f64>,
    b_cov: Vec<f64>,
    /// `∂_k b_{i|j}` at `(i*n + j)*n + k`.
    db_cov: Vec<f64>,
    c: f64,
    c_grad: Vec<f64>,
}

fn point_geometry<const N: usize>(spec: &FieldSpec, x: &[f64]) -> Result<PointGeometry, FieldError> {
    let n = N;
    let xs: Vec<Dual<f64, N>> = x.iter().enumerate().map(|(i, &v)| Dual::variable(v, i)).collect();
    let conn = connection::<Dual<f64, N>, N>(spec, &xs)?;
    let fv = FieldValues {
        a: conn.fv.a.iter().map(|v| v.v).collect(),
        a_inv: conn.fv.a_inv.iter().map(|v| v.v).collect(),
        det: conn.fv.det.v,
        b: conn.fv.b.iter().map(|v| v.v).collect(),
        b_up: conn.fv.b_up.iter().map(|v| v.v).collect(),
        b2: conn.fv.b2.v,
    };
    let gamma = conn.gamma.iter().map(|g| g.v).collect();
    let dgamma = conn.gamma.iter().flat_map(|g| g.d).collect();
    let b_cov = conn.b_cov.iter().map(|g| g.v).collect();
    let db_cov = conn.b_cov.iter().flat_map(|g| g.d).collect();

    let mut c = Dual::<f64, N>::zero();
    for i in 0..n {
        for j in 0..n {
            let r_ij = (conn.b_cov[i * n + j] + conn.b_cov[j * n + i]) * 0.5;
            c += conn.fv.a_inv[i * n + j] * r_ij;
        }
    }
    let c = c / n as f64;
    Ok(PointGeometry { n, fv, gamma, dgamma, b_cov, db_cov, c: c.v, c_grad: c.d.to_vec() })
}

macro_rules! with_dim {
    ($n:expr, $f:ident :: <N> ($($arg:expr),*)) => {
        match $n {
            2 => $f::<2>($($arg),*),
            3 => $f::<3>($($arg),*),
            4 => $f::<4>($($arg),*),
            5 => $f::<5>($($arg),*),
            6 => $f::<6>($($arg),*),
            n => Err(FieldError::Dimension(format!("dimension {n} is not supported (2..=6)"))),
        }
    };
}

fn geometry(spec: &FieldSpec, x: &[f64]) -> Result<PointGeometry, FieldError> {
    if !spec.in_guard(x) {
        return Err(FieldError::OutsideGuard { point: x.to_vec() });
    }
    spec.check_point(x)?;
    with_dim!(spec.n, point_geometry::<N>(spec, x))
}

/// `Γ^i_{jk}` at `x`, flat `(i*n + j)*n + k`.
pub fn christoffel(spec: &FieldSpec, x: &[f64]) -> Result<Vec<f64>, FieldError> {
    Ok(geometry(spec, x)?.gamma)
}

fn alpha_from(g: &PointGeometry) -> AlphaCurvature {
    let n = g.n;
    let gm = |i: usize, j: usize, k: usize| g.gamma[(i * n + j) * n + k];
    let dgm = |i: usize, j: usize, k: usize, l: usize| g.dgamma[((i * n + j) * n + k) * n + l];
    let mut riemann = vec![0.0; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut v = dgm(i, j, l, k) - dgm(i, j, k, l);
                    for m in 0..n {
                        v += gm(i, k, m) * gm(m, j, l) - gm(i, l, m) * gm(m, j, k);
                    }
                    riemann[((i * n + j) * n + k) * n + l] = v;
                }
            }
        }
    }
    let mut ricci = vec![0.0; n * n];
    for j in 0..n {
        for l in 0..n {
            ricci[j * n + l] = (0..n).map(|i| riemann[((i * n + j) * n + i) * n + l]).sum();
        }
    }
    // symmetric in exact arithmetic; remove rounding asymmetry
    for j in 0..n {
        for l in j + 1..n {
            let v = 0.5 * (ricci[j * n + l] + ricci[l * n + j]);
            ricci[j * n + l] = v;
            ricci[l * n + j] = v;
        }
    }
    let scalar = (0..n * n).map(|k| g.fv.a_inv[k] * ricci[k]).sum();
    let bb_ricci = quad(&ricci, &g.fv.b_up);
    AlphaCurvature {
        n,
        christoffel: g.gamma.clone(),
        riemann,
        ricci,
        scalar,
        bb_ricci,
        b_up: g.fv.b_up.clone(),
    }
}

/// Curvature of `α` at `x`.
pub fn alpha_curvature(spec: &FieldSpec, x: &[f64]) -> Result<AlphaCurvature, FieldError> {
    Ok(alpha_from(&geometry(spec, x)?))
}

fn second_covariant(g: &PointGeometry) -> Vec<f64> {
    let n = g.n;
    let gm = |i: usize, j: usize, k: usize| g.gamma[(i * n + j) * n + k];
    let mut out = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut v = g.db_cov[(i * n + j) * n + k];
                for m in 0..n {
                    v -= gm(m, i, k) * g.b_cov[m * n + j] + gm(m, j, k) * g.b_cov[i * n + m];
                }
                out[(i * n + j) * n + k] = v;
            }
        }
    }
    out
}

/// `(b_{i|j}, b_{i|j|k})` at `x`.
pub fn beta_derivatives(spec: &FieldSpec, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>), FieldError> {
    let g = geometry(spec, x)?;
    let second = second_covariant(&g);
    Ok((g.b_cov, second))
}

fn rs_from(g: &PointGeometry, alpha: &AlphaCurvature) -> RsData {
    let n = g.n;
    let fv = &g.fv;
    let (a, a_inv) = (&fv.a, &fv.a_inv);
    let b_cov2 = second_covariant(g);

    let mut r = vec![0.0; n * n];
    let mut s = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            r[i * n + j] = 0.5 * (g.b_cov[i * n + j] + g.b_cov[j * n + i]);
            s[i * n + j] = 0.5 * (g.b_cov[i * n + j] - g.b_cov[j * n + i]);
        }
    }
    let contract_b = |m: &[f64]| -> Vec<f64> {
        (0..n).map(|i| (0..n).map(|j| fv.b_up[j] * m[j * n + i]).sum()).collect()
    };
    let r_low = contract_b(&r);
    let s_low = contract_b(&s);
    let r_up = linalg::mat_vec(a_inv, &r_low);
    let s_up = linalg::mat_vec(a_inv, &s_low);
    let r_scalar = lin(&fv.b_up, &r_low);
    let r_mixed = linalg::mat_mul(a_inv, &r, n);
    let s_mixed = linalg::mat_mul(a_inv, &s, n);
    let r_trace = (0..n).map(|i| r_mixed[i * n + i]).sum();

    let idx3 = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
    let mut r_cov = vec![0.0; n * n * n];
    let mut s_cov = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                r_cov[idx3(i, j, k)] = 0.5 * (b_cov2[idx3(i, j, k)] + b_cov2[idx3(j, i, k)]);
                s_cov[idx3(i, j, k)] = 0.5 * (b_cov2[idx3(i, j, k)] - b_cov2[idx3(j, i, k)]);
            }
        }
    }
    // b^m_{|j} = a^{mp} b_{p|j}
    let b_up_cov = linalg::mat_mul(a_inv, &g.b_cov, n);
    let mut r_low_cov = vec![0.0; n * n];
    let mut s_low_cov = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let (mut rv, mut sv) = (0.0, 0.0);
            for m in 0..n {
                rv += b_up_cov[m * n + j] * r[m * n + i] + fv.b_up[m] * r_cov[idx3(m, i, j)];
                sv += b_up_cov[m * n + j] * s[m * n + i] + fv.b_up[m] * s_cov[idx3(m, i, j)];
            }
            r_low_cov[i * n + j] = rv;
            s_low_cov[i * n + j] = sv;
        }
    }
    let div_s = (0..n * n).map(|k| a_inv[k] * s_low_cov[k]).sum();
    let div_r = (0..n * n).map(|k| a_inv[k] * r_low_cov[k]).sum();
    let r_trace_cov: Vec<f64> = (0..n)
        .map(|m| {
            (0..n).flat_map(|k| (0..n).map(move |l| (k, l)))
                .map(|(k, l)| a_inv[k * n + l] * r_cov[idx3(k, l, m)])
                .sum()
        })
        .collect();
    let s_mixed_div: Vec<f64> = (0..n)
        .map(|l| {
            (0..n).flat_map(|m| (0..n).map(move |j| (m, j)))
                .map(|(m, j)| a_inv[m * n + j] * s_cov[idx3(j, l, m)])
                .sum()
        })
        .collect();

    let c_b = lin(&g.c_grad, &fv.b_up);
    let s_sq = lin(&s_up, &s_low);
    let s_trace_sq = (0..n)
        .flat_map(|t| (0..n).map(move |m| (t, m)))
        .map(|(t, m)| s_mixed[t * n + m] * s_mixed[m * n + t])
        .sum();
    let r_sq = lin(&r_up, &r_low);
    let r_dot_s = lin(&r_up, &s_low);
    let r_s_trace = (0..n)
        .flat_map(|k| (0..n).map(move |m| (k, m)))
        .map(|(k, m)| r_mixed[k * n + m] * s_mixed[m * n + k])
        .sum();

    let nf = n as f64;
    let b2 = fv.b2;
    let f = -b2 * alpha.bb_ricci + (nf - 2.0) * b2 * g.c * g.c
        - (nf - 2.0) * b2 * c_b
        - (nf - 2.0) * s_sq;

    let _ = a;
    RsData {
        n,
        a: fv.a.clone(),
        a_inv: a_inv.clone(),
        det_a: fv.det,
        b: fv.b.clone(),
        b_up: fv.b_up.clone(),
        b2,
        b_cov: g.b_cov.clone(),
        b_cov2,
        r,
        s,
        r_low,
        s_low,
        r_up,
        s_up,
        r_scalar,
        r_trace,
        r_mixed,
        s_mixed,
        r_cov,
        s_cov,
        r_low_cov,
        s_low_cov,
        div_s,
        div_r,
        r_trace_cov,
        s_mixed_div,
        c: g.c,
        c_grad: g.c_grad.clone(),
        c_b,
        s_sq,
        s_trace_sq,
        r_sq,
        r_dot_s,
        r_s_trace,
        f,
    }
}

/// The r/s family at `x`.
pub fn rs_data(spec: &FieldSpec, x: &[f64]) -> Result<RsData, FieldError> {
    Ok(point_data(spec, x)?.1)
}

/// Curvature of `α` and the r/s family at `x`, sharing one differentiation
/// pass.
pub fn point_data(spec: &FieldSpec, x: &[f64]) -> Result<(AlphaCurvature, RsData), FieldError> {
    let g = geometry(spec, x)?;
    let alpha = alpha_from(&g);
    let rs = rs_from(&g, &alpha);
    Ok((alpha, rs))
}

/// Contractions with a direction `y`. Generic so quadratic forms in `y` can be
/// differentiated.
impl RsData {
    pub fn alpha_sq<S: Scalar>(&self, y: &[S]) -> S {
        quad(&self.a, y)
    }
    pub fn beta<S: Scalar>(&self, y: &[S]) -> S {
        lin(&self.b, y)
    }
    /// `r_00 = r_{ij} y^i y^j`.
    pub fn r00<S: Scalar>(&self, y: &[S]) -> S {
        quad(&self.r, y)
    }
    /// `r_0 = r_i y^i`.
    pub fn r0<S: Scalar>(&self, y: &[S]) -> S {
        lin(&self.r_low, y)
    }
    /// `s_0 = s_i y^i`.
    pub fn s0<S: Scalar>(&self, y: &[S]) -> S {
        lin(&self.s_low, y)
    }
    /// `c_0 = c_i y^i`.
    pub fn c0<S: Scalar>(&self, y: &[S]) -> S {
        lin(&self.c_grad, y)
    }
    /// `s_{0|0} = s_{i|j} y^i y^j`.
    pub fn s0_0<S: Scalar>(&self, y: &[S]) -> S {
        quad(&self.s_low_cov, y)
    }
    /// `r_{0|0} = r_{i|j} y^i y^j`.
    pub fn r0_0<S: Scalar>(&self, y: &[S]) -> S {
        quad(&self.r_low_cov, y)
    }
    /// `s^i_0 = a^{ij} s_{jk} y^k`.
    pub fn s_up0(&self, y: &[f64]) -> Vec<f64> {
        linalg::mat_vec(&self.s_mixed, y)
    }
    /// `r_{i0} = r_{ij} y^j`.
    pub fn r_i0(&self, y: &[f64]) -> Vec<f64> {
        linalg::mat_vec(&self.r, y)
    }
    /// `r_{00|0}`.
    pub fn r00_0(&self, y: &[f64]) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    acc += self.r_cov[(i * n + j) * n + k] * y[i] * y[j] * y[k];
                }
            }
        }
        acc
    }
    /// `r_{00|k}`.
    pub fn r00_k(&self, y: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|k| {
                let mut acc = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        acc += self.r_cov[(i * n + j) * n + k] * y[i] * y[j];
                    }
                }
                acc
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::load_catalog;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn flat_fields_have_zero_connection_and_curvature() {
        for name in ["euclidean-constant", "conformal-gradient"] {
            let spec = load_catalog(name, 0).unwrap();
            let x = spec.probe_points()[20].clone();
            let alpha = alpha_curvature(&spec, &x).unwrap();
            assert_eq!(linalg::max_abs(&alpha.christoffel), 0.0);
            assert_eq!(linalg::max_abs(&alpha.ricci), 0.0);
            assert_eq!(alpha.scalar, 0.0);
        }
    }

    #[test]
    fn euclidean_constant_rs_data_vanishes() {
        let spec = load_catalog("euclidean-constant", 0).unwrap();
        let rs = rs_data(&spec, &[0.3, -0.2, 0.5]).unwrap();
        assert_eq!(rs.b2, 1.0);
        for v in [&rs.b_cov, &rs.b_cov2, &rs.r, &rs.s, &rs.r_cov, &rs.s_cov, &rs.c_grad] {
            assert_eq!(linalg::max_abs(v), 0.0);
        }
        assert_eq!((rs.c, rs.f, rs.s_sq, rs.s_trace_sq), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn conformal_gradient_reference_point() {
        let spec = load_catalog("conformal-gradient", 0).unwrap();
        let x = [1.0, 0.0, 0.0];
        let (b1, b2) = beta_derivatives(&spec, &x).unwrap();
        assert_eq!(b1, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(linalg::max_abs(&b2), 0.0);
        let rs = rs_data(&spec, &x).unwrap();
        assert_eq!(rs.r, b1);
        assert_eq!(linalg::max_abs(&rs.s), 0.0);
        assert_eq!((rs.c, rs.r_scalar, rs.b2), (1.0, 1.0, 1.0));
        assert_eq!(rs.c_grad, vec![0.0; 3]);
        assert_eq!((rs.s_sq, rs.s_trace_sq, rs.div_s), (0.0, 0.0, 0.0));
        // f = (n-2) b² c² with c = 1, c_b = 0, s = 0, flat α
        assert_eq!(rs.f, 1.0);
    }

    #[test]
    fn conformal_sphere_christoffel_against_finite_differences() {
        let spec = load_catalog("sphere-hopf", 0).unwrap();
        assert_eq!(linalg::max_abs(&christoffel(&spec, &[0.0; 3]).unwrap()), 0.0);

        let x = [0.1, 0.0, 0.0];
        let g = christoffel(&spec, &x).unwrap();
        let n = 3;
        let h = 1e-5;
        let metric = |p: &[f64]| spec.eval_field(p).unwrap();
        let fv = metric(&x);
        let da = |i: usize, j: usize, k: usize| {
            let mut xp = x;
            let mut xm = x;
            xp[k] += h;
            xm[k] -= h;
            (metric(&xp).a[i * n + j] - metric(&xm).a[i * n + j]) / (2.0 * h)
        };
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let fd: f64 = (0..n)
                        .map(|l| 0.5 * fv.a_inv[i * n + l] * (da(l, k, j) + da(l, j, k) - da(j, k, l)))
                        .sum();
                    let v = g[(i * n + j) * n + k];
                    assert!((v - fd).abs() < 1e-6, "Γ^{i}_{j}{k}: {v} vs {fd}");
                    assert_eq!(v, g[(i * n + k) * n + j]);
                }
            }
        }
    }

    #[test]
    fn round_sphere_has_constant_curvature_one() {
        let spec = load_catalog("sphere-hopf", 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let x = spec.sample_point(&mut rng);
            let alpha = alpha_curvature(&spec, &x).unwrap();
            let fv = spec.eval_field(&x).unwrap();
            for k in 0..9 {
                assert!((alpha.ricci[k] - 2.0 * fv.a[k]).abs() < 1e-10);
            }
            assert!((alpha.scalar - 6.0).abs() < 1e-10);
        }
    }

    /// Ricci from finite differences of the Christoffel symbols.
    #[test]
    fn sphere_ricci_against_finite_difference_curvature() {
        let spec = load_catalog("sphere-hopf", 0).unwrap();
        let x = [0.2, -0.3, 0.1];
        let n = 3;
        let h = 1e-5;
        let g0 = christoffel(&spec, &x).unwrap();
        let dg = |i: usize, j: usize, k: usize, l: usize| {
            let mut xp = x;
            let mut xm = x;
            xp[l] += h;
            xm[l] -= h;
            let gp = christoffel(&spec, &xp).unwrap();
            let gm = christoffel(&spec, &xm).unwrap();
            (gp[(i * n + j) * n + k] - gm[(i * n + j) * n + k]) / (2.0 * h)
        };
        let gm = |i: usize, j: usize, k: usize| g0[(i * n + j) * n + k];
        let alpha = alpha_curvature(&spec, &x).unwrap();
        for j in 0..n {
            for l in 0..n {
                let mut ric = 0.0;
                for i in 0..n {
                    ric += dg(i, j, l, i) - dg(i, j, i, l);
                    for m in 0..n {
                        ric += gm(i, i, m) * gm(m, j, l) - gm(i, l, m) * gm(m, j, i);
                    }
                }
                assert!((ric - alpha.ricci[j * n + l]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn sphere_hopf_is_killing_with_constant_length() {
        let spec = load_catalog("sphere-hopf", 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let x = spec.sample_point(&mut rng);
            let rs = rs_data(&spec, &x).unwrap();
            assert!(linalg::max_abs(&rs.r) < 1e-12);
            assert!(linalg::max_abs(&rs.s) > 0.1);
            assert!(rs.c.abs() < 1e-12);
            assert!((rs.b2 - 1.0).abs() < 1e-12);
            assert!(linalg::max_abs(&rs.s_low) < 1e-12);
        }
    }

    #[test]
    fn rs_invariants_on_catalog() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for name in crate::fields::catalog_names() {
            let spec = load_catalog(name, 17).unwrap();
            let n = spec.n;
            for _ in 0..20 {
                let x = spec.sample_point(&mut rng);
                let (alpha, rs) = point_data(&spec, &x).unwrap();
                for i in 0..n {
                    for j in 0..n {
                        let k = i * n + j;
                        assert!((rs.b_cov[k] - rs.r[k] - rs.s[k]).abs() <= 1e-14);
                        assert!((rs.s[k] + rs.s[j * n + i]).abs() <= 1e-12);
                    }
                }
                let s_i: Vec<f64> = (0..n)
                    .map(|i| (0..n).map(|j| rs.b_up[j] * rs.s[j * n + i]).sum())
                    .collect();
                assert!(max_abs_diff(&s_i, &rs.s_low) < 1e-12);
                let trace: f64 = (0..n * n).map(|k| rs.a_inv[k] * rs.r[k]).sum();
                assert!((rs.c - trace / n as f64).abs() < 1e-12);
                assert!((rs.r_scalar - lin(&rs.b_up, &rs.r_low)).abs() < 1e-12);
                // c_i by autodiff agrees with (1/n) a^{ij} r_{ij|k}
                for k in 0..n {
                    let alt: f64 = (0..n * n).map(|p| rs.a_inv[p] * rs.r_cov[p * n + k]).sum();
                    assert!((rs.c_grad[k] - alt / n as f64).abs() < 1e-10);
                }
                let sc: f64 = (0..n * n).map(|k| rs.a_inv[k] * alpha.ricci[k]).sum();
                assert!((alpha.scalar - sc).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ricci_identity_for_covariant_derivatives() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for name in ["euclidean-constant", "conformal-gradient", "sphere-hopf", "random-poly"] {
            let spec = load_catalog(name, 5).unwrap();
            let n = spec.n;
            for _ in 0..5 {
                let x = spec.sample_point(&mut rng);
                let (alpha, rs) = point_data(&spec, &x).unwrap();
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            let lhs = rs.b_cov2[(i * n + j) * n + k] - rs.b_cov2[(i * n + k) * n + j];
                            let rhs: f64 =
                                (0..n).map(|m| rs.b[m] * alpha.riem(m, i, j, k)).sum();
                            assert!((lhs - rhs).abs() < 1e-8, "{name}: {lhs} vs {rhs}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn conformal_list_holds_when_r_is_proportional_to_a() {
        let spec = load_catalog("conformal-gradient", 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        use rand::Rng;
        for _ in 0..3 {
            let x = spec.sample_point(&mut rng);
            let rs = rs_data(&spec, &x).unwrap();
            let dev: Vec<f64> = (0..9).map(|k| rs.r[k] - rs.c * rs.a[k]).collect();
            assert!(linalg::max_abs(&dev) < 1e-10);
            for _ in 0..10 {
                let y: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let (a2, beta) = (rs.alpha_sq(&y), rs.beta(&y));
                assert!((rs.r0(&y) - rs.c * beta).abs() < 1e-12);
                assert!((rs.r0_0(&y) - (rs.c0(&y) * beta + rs.c * rs.c * a2)).abs() < 1e-12);
            }
            assert!((rs.r_scalar - rs.c * rs.b2).abs() < 1e-12);
            assert!((rs.r_trace - 3.0 * rs.c).abs() < 1e-12);
        }
    }
}
