//! First-principles Finsler curvature from a 2-homogeneous `F²`.
//!
//! Each second-order stage differentiates once in `y` on an outer dual and
//! once in `(x, y)` on an inner dual. The spray consumes two levels, the
//! Riemann curvature two more, and the Riemann tensor a final `y`-Hessian,
//! so a full evaluation runs on six nested levels.

use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

use crate::autodiff::{AutodiffError, Dual, Scalar};
use crate::autodiff::DoubleDouble;
use crate::fields::{FieldError, FieldJet, FieldSpec};
use crate::linalg::{self, lin};

/// Worker stack size for nested evaluations.
const STACK_BYTES: usize = 256 << 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FinslerError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("direction outside the admissible cone: beta = {beta:e}")]
    OutOfCone { beta: f64 },
    #[error("fundamental tensor not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("singular fundamental tensor")]
    Singular,
    #[error("volume density must be positive, got {0:e}")]
    Volume(f64),
    #[error("dimension {0} is not supported by the pipeline (2..=4)")]
    Dimension(usize),
    #[error("zero direction")]
    ZeroDirection,
}

impl From<AutodiffError> for FinslerError {
    fn from(e: AutodiffError) -> Self {
        FinslerError::Field(FieldError::Eval(e))
    }
}

/// A positively 2-homogeneous `F²(x, y)`, evaluable on any scalar type.
pub trait MetricFunction: Sync {
    fn dim(&self) -> usize;
    fn f_sq<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S, FinslerError>;
    /// Reject `(x, y)` outside the domain before any differentiation.
    fn check_domain(&self, _x: &[f64], y: &[f64]) -> Result<(), FinslerError> {
        if y.iter().all(|v| *v == 0.0) {
            return Err(FinslerError::ZeroDirection);
        }
        Ok(())
    }
    fn f(&self, x: &[f64], y: &[f64]) -> Result<f64, FinslerError> {
        Ok(self.f_sq(x, y)?.sqrt())
    }
    /// A metric agreeing with `self` to second order in `x` at `x0` that is
    /// cheaper to evaluate on nested scalars.
    fn localize(&self, _x0: &[f64]) -> Result<Option<LocalMetric>, FinslerError> {
        Ok(None)
    }
}

/// A volume density `σ(x)`.
pub trait VolumeDensity: Sync {
    fn sigma<S: Scalar>(&self, x: &[S]) -> Result<S, FinslerError>;
}

fn alpha_beta<S: Scalar>(spec: &FieldSpec, x: &[S], y: &[S]) -> Result<(S, S), FinslerError> {
    let (a, b) = spec.eval_raw(x)?;
    Ok(contract(spec.n, &a, &b, y, |i, j| spec.metric_entry_is_zero(i, j)))
}

fn contract<S: Scalar>(n: usize, a: &[S], b: &[S], y: &[S], zero: impl Fn(usize, usize) -> bool) -> (S, S) {
    let mut alpha2 = S::zero();
    for i in 0..n {
        if !zero(i, i) {
            alpha2 += a[i * n + i] * y[i] * y[i];
        }
        for j in i + 1..n {
            if !zero(i, j) {
                alpha2 += a[i * n + j] * y[i] * y[j] * 2.0;
            }
        }
    }
    let mut beta = S::zero();
    for i in 0..n {
        beta += b[i] * y[i];
    }
    (alpha2, beta)
}

fn check_field_point(spec: &FieldSpec, x: &[f64]) -> Result<(), FinslerError> {
    if x.len() != spec.n {
        return Err(FieldError::Dimension(format!("point has {} coordinates, expected {}", x.len(), spec.n)).into());
    }
    if !spec.in_guard(x) {
        return Err(FieldError::OutsideGuard { point: x.to_vec() }.into());
    }
    spec.check_point(x)?;
    Ok(())
}

/// The Kropina metric `F = α²/β`, defined where `β > 0`.
#[derive(Debug, Clone, Copy)]
pub struct Kropina<'a> {
    pub spec: &'a FieldSpec,
}

impl MetricFunction for Kropina<'_> {
    fn dim(&self) -> usize {
        self.spec.n
    }
    fn f_sq<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S, FinslerError> {
        let (alpha2, beta) = alpha_beta(self.spec, x, y)?;
        let f = alpha2 / beta;
        Ok(f * f)
    }
    fn check_domain(&self, x: &[f64], y: &[f64]) -> Result<(), FinslerError> {
        check_field_point(self.spec, x)?;
        let beta = lin(&self.spec.eval_field(x)?.b, y);
        if beta <= 0.0 {
            return Err(FinslerError::OutOfCone { beta });
        }
        Ok(())
    }
    fn f(&self, x: &[f64], y: &[f64]) -> Result<f64, FinslerError> {
        let (alpha2, beta) = alpha_beta(self.spec, x, y)?;
        Ok(alpha2 / beta)
    }
    fn localize(&self, x0: &[f64]) -> Result<Option<LocalMetric>, FinslerError> {
        Ok(Some(LocalMetric { jet: self.spec.jet(x0)?, kind: LocalKind::Kropina }))
    }
}

/// The Riemannian metric `F = α` of a field.
#[derive(Debug, Clone, Copy)]
pub struct Riemannian<'a> {
    pub spec: &'a FieldSpec,
}

impl MetricFunction for Riemannian<'_> {
    fn dim(&self) -> usize {
        self.spec.n
    }
    fn f_sq<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S, FinslerError> {
        Ok(alpha_beta(self.spec, x, y)?.0)
    }
    fn check_domain(&self, x: &[f64], y: &[f64]) -> Result<(), FinslerError> {
        check_field_point(self.spec, x)?;
        if y.iter().all(|v| *v == 0.0) {
            return Err(FinslerError::ZeroDirection);
        }
        Ok(())
    }
    fn localize(&self, x0: &[f64]) -> Result<Option<LocalMetric>, FinslerError> {
        Ok(Some(LocalMetric { jet: self.spec.jet(x0)?, kind: LocalKind::Riemannian }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalKind {
    Kropina,
    Riemannian,
}

/// `F²` built from the second-order jet of a field.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalMetric {
    pub jet: FieldJet,
    pub kind: LocalKind,
}

impl MetricFunction for LocalMetric {
    fn dim(&self) -> usize {
        self.jet.n
    }
    fn f_sq<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S, FinslerError> {
        let (a, b) = self.jet.eval_raw(x);
        let (alpha2, beta) = contract(self.jet.n, &a, &b, y, |i, j| self.jet.metric_entry_is_zero(i, j));
        Ok(match self.kind {
            LocalKind::Kropina => {
                let f = alpha2 / beta;
                f * f
            }
            LocalKind::Riemannian => alpha2,
        })
    }
}

/// Busemann-Hausdorff density of the Kropina metric of a field,
/// `σ = (2/b)^n √det a`.
#[derive(Debug, Clone, Copy)]
pub struct KropinaBhDensity<'a> {
    pub spec: &'a FieldSpec,
}

impl VolumeDensity for KropinaBhDensity<'_> {
    fn sigma<S: Scalar>(&self, x: &[S]) -> Result<S, FinslerError> {
        let fv = self.spec.eval_field_unguarded(x)?;
        let n = self.spec.n as i32;
        Ok((fv.det / fv.b2.powi(n)).sqrt() * 2f64.powi(n))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FinslerEval {
    pub n: usize,
    pub f: f64,
    pub g: Vec<f64>,
    pub g_inv: Vec<f64>,
    /// `G^i`.
    pub spray: Vec<f64>,
    /// `R^i_k` at `i*n + k`.
    pub riemann_curvature: Vec<f64>,
    /// `R^i_{jkl}` at `((i*n + j)*n + k)*n + l`.
    pub riemann_tensor: Vec<f64>,
    pub ric: f64,
    /// `overline-Ric_{jl} = R^k_{jkl}`.
    pub ric_bar: Vec<f64>,
    pub ric_tensor: Vec<f64>,
    pub scalar: f64,
    pub s_curvature: Option<f64>,
}

fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        rayon::ThreadPoolBuilder::new()
            .stack_size(STACK_BYTES)
            .thread_name(|i| format!("finsler-{i}"))
            .build()
            .expect("thread pool")
    })
}

/// Run `f` on the evaluation pool, whose workers have stacks large enough
/// for the deepest nested scalars. Parallel iterators inside `f` share it.
pub fn with_pool<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    pool().install(f)
}

/// `y` seeded on the outer level and on slot `N + i` of the inner level;
/// `x` seeded on inner slots `0..N`.
type Stage<T, const N: usize, const N2: usize> = Dual<Dual<T, N2>, N>;

fn seed_stage<T: Scalar, const N: usize, const N2: usize>(
    x: &[T],
    y: &[T],
) -> (Vec<Stage<T, N, N2>>, Vec<Stage<T, N, N2>>) {
    let xs = x.iter().enumerate().map(|(i, &v)| Dual::constant(Dual::variable(v, i))).collect();
    let ys = y.iter().enumerate().map(|(i, &v)| Dual::variable(Dual::variable(v, N + i), i)).collect();
    (xs, ys)
}

fn sym_y<T: Scalar, const N: usize, const N2: usize>(s: &Stage<T, N, N2>, i: usize, k: usize) -> T {
    (s.d[k].d[N + i] + s.d[i].d[N + k]) * 0.5
}

/// `G^i` on any scalar type.
fn spray_generic<S: Scalar, M: MetricFunction, const N: usize, const N2: usize>(
    m: &M,
    x: &[S],
    y: &[S],
) -> Result<Vec<S>, FinslerError> {
    let (xs, ys) = seed_stage::<S, N, N2>(x, y);
    let fsq = m.f_sq(&xs, &ys)?;
    let mut g = vec![S::zero(); N * N];
    for i in 0..N {
        for k in i..N {
            let v = sym_y(&fsq, i, k) * 0.5;
            g[i * N + k] = v;
            g[k * N + i] = v;
        }
    }
    let (g_inv, _) = linalg::invert(&g, N).ok_or(FinslerError::Singular)?;
    let bracket: Vec<S> = (0..N)
        .map(|k| {
            let mut acc = -fsq.v.d[k];
            for j in 0..N {
                acc += fsq.d[k].d[j] * y[j];
            }
            acc
        })
        .collect();
    Ok((0..N)
        .map(|i| {
            let mut acc = S::zero();
            for k in 0..N {
                acc += g_inv[i * N + k] * bracket[k];
            }
            acc * 0.25
        })
        .collect())
}

struct CurvatureStage<T> {
    spray: Vec<T>,
    /// `∂G^m/∂y^m`.
    spray_div: T,
    /// `R^i_k` at `i*n + k`.
    rk: Vec<T>,
}

fn curvature_generic<T: Scalar, M: MetricFunction, const N: usize, const N2: usize>(
    m: &M,
    x: &[T],
    y: &[T],
) -> Result<CurvatureStage<T>, FinslerError> {
    let (xs, ys) = seed_stage::<T, N, N2>(x, y);
    let g = spray_generic::<Stage<T, N, N2>, M, N, N2>(m, &xs, &ys)?;
    let gx = |i: usize, k: usize| g[i].v.d[k];
    let gy = |i: usize, k: usize| g[i].d[k].v;
    let gxy = |i: usize, j: usize, k: usize| g[i].d[k].d[j];
    let gyy = |i: usize, j: usize, k: usize| sym_y(&g[i], j, k);
    let spray: Vec<T> = g.iter().map(|s| s.v.v).collect();
    let mut rk = vec![T::zero(); N * N];
    for i in 0..N {
        for k in 0..N {
            let mut acc = gx(i, k) * 2.0;
            for j in 0..N {
                acc += gyy(i, j, k) * spray[j] * 2.0 - gxy(i, j, k) * y[j] - gy(i, j) * gy(j, k);
            }
            rk[i * N + k] = acc;
        }
    }
    let mut spray_div = T::zero();
    for i in 0..N {
        spray_div += gy(i, i);
    }
    Ok(CurvatureStage { spray, spray_div, rk })
}

type Hess<const N: usize> = Dual<Dual<f64, N>, N>;

/// `y`-Hessian carrier for the curvature stage.
type Deep<B, const N: usize> = Dual<Dual<B, N>, N>;

/// Base arithmetic of the curvature stages.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Precision {
    /// `f64` throughout.
    #[default]
    Double,
    /// Double-double curvature stages. About ten times slower; removes the
    /// cancellation noise in `R^i_{jkl}` near the edge of the cone.
    Extended,
    /// `Double`, repeated as `Extended` when the result fails the
    /// contraction check `Ric_kl y^k y^l = Ric` by more than
    /// [`ADAPTIVE_DEFECT`].
    Adaptive,
}

/// Relative contraction defect above which `Adaptive` switches to
/// double-double.
pub const ADAPTIVE_DEFECT: f64 = 1e-12;

impl FinslerEval {
    /// `|Ric_kl y^k y^l − Ric| / (|y|² (1 + max|Ric_kl|))`.
    pub fn contraction_defect(&self, y: &[f64]) -> f64 {
        let n = self.n;
        let mut q = 0.0;
        for k in 0..n {
            for l in 0..n {
                q += self.ric_tensor[k * n + l] * y[k] * y[l];
            }
        }
        let yy: f64 = y.iter().map(|v| v * v).sum();
        (q - self.ric).abs() / (yy * (1.0 + linalg::max_abs(&self.ric_tensor)))
    }
}

fn seed_hess<const N: usize>(y: &[f64]) -> Vec<Hess<N>> {
    y.iter().enumerate().map(|(i, &v)| Dual::variable(Dual::variable(v, i), i)).collect()
}

fn hess_entry<const N: usize>(h: &Hess<N>, i: usize, j: usize) -> f64 {
    (h.d[i].d[j] + h.d[j].d[i]) * 0.5
}

fn fundamental_n<M: MetricFunction, const N: usize>(
    m: &M,
    x: &[f64],
    y: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), FinslerError> {
    let xs: Vec<Hess<N>> = x.iter().map(|&v| Hess::<N>::from_f64(v)).collect();
    let fsq = m.f_sq(&xs, &seed_hess::<N>(y))?;
    let mut g = vec![0.0; N * N];
    for i in 0..N {
        for j in 0..N {
            g[i * N + j] = 0.5 * hess_entry(&fsq, i, j);
        }
    }
    if linalg::cholesky_min_pivot(&g, N).is_err() {
        let min_eigenvalue =
            linalg::symmetric_eigenvalues(&g, N).into_iter().fold(f64::INFINITY, f64::min);
        return Err(FinslerError::NotPositiveDefinite { min_eigenvalue });
    }
    let (g_inv, _) = linalg::invert(&g, N).ok_or(FinslerError::Singular)?;
    Ok((g, g_inv))
}

fn full_n<M: MetricFunction, V: VolumeDensity, const N: usize, const N2: usize>(
    m: &M,
    x: &[f64],
    y: &[f64],
    sigma: Option<&V>,
    precision: Precision,
) -> Result<FinslerEval, FinslerError> {
    match m.localize(x)? {
        Some(l) => full_precision::<LocalMetric, V, N, N2>(&l, x, y, sigma, precision),
        None => full_precision::<M, V, N, N2>(m, x, y, sigma, precision),
    }
}

fn full_precision<M: MetricFunction, V: VolumeDensity, const N: usize, const N2: usize>(
    m: &M,
    x: &[f64],
    y: &[f64],
    sigma: Option<&V>,
    precision: Precision,
) -> Result<FinslerEval, FinslerError> {
    match precision {
        Precision::Double => full_base::<f64, M, V, N, N2>(m, x, y, sigma),
        Precision::Extended => full_base::<DoubleDouble, M, V, N, N2>(m, x, y, sigma),
        Precision::Adaptive => {
            let e = full_base::<f64, M, V, N, N2>(m, x, y, sigma)?;
            if e.contraction_defect(y) <= ADAPTIVE_DEFECT {
                return Ok(e);
            }
            full_base::<DoubleDouble, M, V, N, N2>(m, x, y, sigma)
        }
    }
}

fn full_base<B: Scalar, M: MetricFunction, V: VolumeDensity, const N: usize, const N2: usize>(
    m: &M,
    x: &[f64],
    y: &[f64],
    sigma: Option<&V>,
) -> Result<FinslerEval, FinslerError> {
    let n = N;
    let (g, g_inv) = fundamental_n::<M, N>(m, x, y)?;
    let xs: Vec<Deep<B, N>> = x.iter().map(|&v| Deep::<B, N>::from_f64(v)).collect();
    let ys: Vec<Deep<B, N>> = y
        .iter()
        .enumerate()
        .map(|(i, &v)| Dual::variable(Dual::variable(B::from_f64(v), i), i))
        .collect();
    let stage = curvature_generic::<Deep<B, N>, M, N, N2>(m, &xs, &ys)?;

    let riemann_curvature: Vec<f64> = stage.rk.iter().map(|r| r.value()).collect();
    let entry = |h: &Deep<B, N>, i: usize, j: usize| (h.d[i].d[j] + h.d[j].d[i]) * 0.5;
    let mut riemann_tensor = vec![0.0; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let a = entry(&stage.rk[i * n + k], l, j);
                    let b = entry(&stage.rk[i * n + l], k, j);
                    riemann_tensor[((i * n + j) * n + k) * n + l] = ((a - b) / 3.0).value();
                }
            }
        }
    }
    let ric: f64 = (0..n).map(|k| riemann_curvature[k * n + k]).sum();
    let mut ric_bar = vec![0.0; n * n];
    for j in 0..n {
        for l in 0..n {
            ric_bar[j * n + l] = (0..n).map(|k| riemann_tensor[((k * n + j) * n + k) * n + l]).sum();
        }
    }
    let mut ric_tensor = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            ric_tensor[i * n + j] = 0.5 * (ric_bar[i * n + j] + ric_bar[j * n + i]);
        }
    }
    let scalar = (0..n * n).map(|k| g_inv[k] * ric_tensor[k]).sum();

    let s_curvature = match sigma {
        Some(v) => {
            let xs: Vec<Dual<f64, N>> =
                x.iter().enumerate().map(|(i, &v)| Dual::variable(v, i)).collect();
            let s = v.sigma(&xs)?;
            if !(s.v > 0.0) {
                return Err(FinslerError::Volume(s.v));
            }
            let dlog: f64 = (0..n).map(|m| y[m] * s.d[m] / s.v).sum();
            Some(stage.spray_div.value() - dlog)
        }
        None => None,
    };

    Ok(FinslerEval {
        n,
        f: m.f(x, y)?,
        g,
        g_inv,
        spray: stage.spray.iter().map(|s| s.value()).collect(),
        riemann_curvature,
        riemann_tensor,
        ric,
        ric_bar,
        ric_tensor,
        scalar,
        s_curvature,
    })
}

macro_rules! dispatch {
    ($m:expr, $body:ident :: <$($pre:ty,)* @> ($($arg:expr),*)) => {
        match $m.dim() {
            2 => $body::<$($pre,)* 2, 4>($($arg),*),
            3 => $body::<$($pre,)* 3, 6>($($arg),*),
            4 => $body::<$($pre,)* 4, 8>($($arg),*),
            n => Err(FinslerError::Dimension(n)),
        }
    };
}

fn check<M: MetricFunction>(m: &M, x: &[f64], y: &[f64]) -> Result<(), FinslerError> {
    let n = m.dim();
    if x.len() != n || y.len() != n {
        return Err(FieldError::Dimension(format!(
            "point/direction lengths {}/{} for dimension {n}",
            x.len(),
            y.len()
        ))
        .into());
    }
    if !(2..=4).contains(&n) {
        return Err(FinslerError::Dimension(n));
    }
    m.check_domain(x, y)
}

/// `(g_ij, g^ij)` with `g = ½ Hess_y F²`.
pub fn fundamental_tensor<M: MetricFunction>(
    m: &M,
    x: &[f64],
    y: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), FinslerError> {
    check(m, x, y)?;
    match m.dim() {
        2 => fundamental_n::<M, 2>(m, x, y),
        3 => fundamental_n::<M, 3>(m, x, y),
        4 => fundamental_n::<M, 4>(m, x, y),
        n => Err(FinslerError::Dimension(n)),
    }
}

/// Spray coefficients `G^i`.
pub fn spray<M: MetricFunction>(m: &M, x: &[f64], y: &[f64]) -> Result<Vec<f64>, FinslerError> {
    check(m, x, y)?;
    fn run<M: MetricFunction, const N: usize, const N2: usize>(
        m: &M,
        x: &[f64],
        y: &[f64],
    ) -> Result<Vec<f64>, FinslerError> {
        spray_generic::<f64, M, N, N2>(m, x, y)
    }
    dispatch!(m, run::<M, @>(m, x, y))
}

/// Riemann curvature `R^i_k`, row-major.
pub fn riemann_curvature<M: MetricFunction>(
    m: &M,
    x: &[f64],
    y: &[f64],
) -> Result<Vec<f64>, FinslerError> {
    check(m, x, y)?;
    fn run<M: MetricFunction, const N: usize, const N2: usize>(
        m: &M,
        x: &[f64],
        y: &[f64],
    ) -> Result<Vec<f64>, FinslerError> {
        with_pool(|| Ok(curvature_generic::<f64, M, N, N2>(m, x, y)?.rk))
    }
    dispatch!(m, run::<M, @>(m, x, y))
}

struct NoDensity;
impl VolumeDensity for NoDensity {
    fn sigma<S: Scalar>(&self, _x: &[S]) -> Result<S, FinslerError> {
        Ok(S::one())
    }
}

/// Every pipeline quantity at `(x, y)`; `S` is filled in when `sigma` is given.
pub fn finsler_eval<M: MetricFunction, V: VolumeDensity>(
    m: &M,
    x: &[f64],
    y: &[f64],
    sigma: Option<&V>,
) -> Result<FinslerEval, FinslerError> {
    finsler_eval_with(m, x, y, sigma, Precision::Double)
}

/// [`finsler_eval`] at a chosen precision.
pub fn finsler_eval_with<M: MetricFunction, V: VolumeDensity>(
    m: &M,
    x: &[f64],
    y: &[f64],
    sigma: Option<&V>,
    precision: Precision,
) -> Result<FinslerEval, FinslerError> {
    check(m, x, y)?;
    with_pool(|| dispatch!(m, full_n::<M, V, @>(m, x, y, sigma, precision)))
}

fn eval_plain<M: MetricFunction>(m: &M, x: &[f64], y: &[f64]) -> Result<FinslerEval, FinslerError> {
    finsler_eval::<M, NoDensity>(m, x, y, None)
}

/// `R^i_{jkl} = ⅓(∂_{y^l}∂_{y^j}R^i_k − ∂_{y^k}∂_{y^j}R^i_l)`.
pub fn riemann_tensor<M: MetricFunction>(m: &M, x: &[f64], y: &[f64]) -> Result<Vec<f64>, FinslerError> {
    Ok(eval_plain(m, x, y)?.riemann_tensor)
}

/// `(Ric, overline-Ric_ij, Ric_ij, R)`.
pub fn ricci_family<M: MetricFunction>(
    m: &M,
    x: &[f64],
    y: &[f64],
) -> Result<(f64, Vec<f64>, Vec<f64>, f64), FinslerError> {
    let e = eval_plain(m, x, y)?;
    Ok((e.ric, e.ric_bar, e.ric_tensor, e.scalar))
}

/// `S = ∂G^m/∂y^m − y^m ∂_m ln σ`. Needs only the spray stage.
pub fn s_curvature<M: MetricFunction, V: VolumeDensity>(
    m: &M,
    x: &[f64],
    y: &[f64],
    sigma: &V,
) -> Result<f64, FinslerError> {
    check(m, x, y)?;
    fn run<M: MetricFunction, V: VolumeDensity, const N: usize, const N2: usize>(
        m: &M,
        x: &[f64],
        y: &[f64],
        sigma: &V,
    ) -> Result<f64, FinslerError> {
        let yd: Vec<Dual<f64, N>> = y.iter().enumerate().map(|(i, &v)| Dual::variable(v, i)).collect();
        let xc: Vec<Dual<f64, N>> = x.iter().map(|&v| Dual::constant(v)).collect();
        let g = spray_generic::<Dual<f64, N>, M, N, N2>(m, &xc, &yd)?;
        let div: f64 = (0..N).map(|i| g[i].d[i]).sum();
        let xs: Vec<Dual<f64, N>> = x.iter().enumerate().map(|(i, &v)| Dual::variable(v, i)).collect();
        let s = sigma.sigma(&xs)?;
        if !(s.v > 0.0) {
            return Err(FinslerError::Volume(s.v));
        }
        Ok(div - (0..N).map(|k| y[k] * s.d[k] / s.v).sum::<f64>())
    }
    dispatch!(m, run::<M, V, @>(m, x, y, sigma))
}
