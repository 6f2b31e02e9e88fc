//! Nested forward-mode differentiation.
//!
//! [`Dual<T, N>`] carries a value and its gradient with respect to `N` seed
//! variables. The component type `T` is itself any [`Scalar`], so duals nest:
//! `Dual<Dual<f64, 3>, 6>` propagates mixed second derivatives, and deeper
//! towers give the higher mixed partials needed by the curvature pipeline.
//! Every derivative is exact up to floating-point rounding.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use thiserror::Error;

/// Deepest nesting supported by [`derive`].
///
/// The Riemann tensor takes two `y`-derivatives of `R^i_k`, which takes two
/// derivatives of the spray, which itself takes two derivatives of `F²`.
pub const MAX_DEPTH: usize = 6;

/// Denominators smaller than this in magnitude are a domain error.
pub const DENOMINATOR_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AutodiffError {
    #[error("seed index {index} out of range for {len} variables")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("requested derivative order {requested} exceeds supported depth {max}")]
    DepthExceeded { requested: usize, max: usize },
    #[error("seed count {got} does not match dual width {expected}")]
    SeedWidth { got: usize, expected: usize },
    #[error("non-finite intermediate value")]
    NonFinite,
    #[error("domain error: {0}")]
    Domain(String),
}

/// A real-like scalar that may carry derivative information.
pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    fn from_f64(v: f64) -> Self;
    /// The innermost real value.
    fn value(&self) -> f64;
    fn recip(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn powi(self, k: i32) -> Self;
    /// True when every component (value and all derivatives) is finite.
    fn all_finite(&self) -> bool;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }
}

impl Scalar for f64 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn recip(self) -> Self {
        1.0 / self
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn powi(self, k: i32) -> Self {
        f64::powi(self, k)
    }
    #[inline]
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

/// Double-double real: an unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`,
/// about 32 significant digits for `+ − × ÷` and `sqrt`.
///
/// `exp`, `ln`, `sin` and `cos` are first-order corrections of the `f64`
/// functions and so carry only `f64` accuracy.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    const SPLITTER: f64 = 134_217_729.0;
    let t = SPLITTER * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

impl DoubleDouble {
    #[inline]
    fn renorm(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        DoubleDouble { hi, lo }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        Self::renorm(s, e + f)
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        DoubleDouble { hi: -self.hi, lo: -self.lo }
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        let (p, e) = two_prod(self.hi, o.hi);
        Self::renorm(p, e + (self.hi * o.lo + self.lo * o.hi))
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let q1 = self.hi / o.hi;
        let r = self - o * q1;
        let q2 = r.hi / o.hi;
        let r = r - o * q2;
        let q3 = r.hi / o.hi;
        Self::renorm(q1, q2) + q3
    }
}

impl Add<f64> for DoubleDouble {
    type Output = Self;
    #[inline]
    fn add(self, o: f64) -> Self {
        let (s, e) = two_sum(self.hi, o);
        Self::renorm(s, e + self.lo)
    }
}

impl Sub<f64> for DoubleDouble {
    type Output = Self;
    #[inline]
    fn sub(self, o: f64) -> Self {
        self + (-o)
    }
}

impl Mul<f64> for DoubleDouble {
    type Output = Self;
    #[inline]
    fn mul(self, o: f64) -> Self {
        let (p, e) = two_prod(self.hi, o);
        Self::renorm(p, e + self.lo * o)
    }
}

impl Div<f64> for DoubleDouble {
    type Output = Self;
    #[inline]
    fn div(self, o: f64) -> Self {
        self / DoubleDouble::from_f64(o)
    }
}

impl AddAssign for DoubleDouble {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl SubAssign for DoubleDouble {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl MulAssign for DoubleDouble {
    #[inline]
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl Scalar for DoubleDouble {
    #[inline]
    fn from_f64(v: f64) -> Self {
        DoubleDouble { hi: v, lo: 0.0 }
    }
    #[inline]
    fn value(&self) -> f64 {
        self.hi
    }
    #[inline]
    fn recip(self) -> Self {
        DoubleDouble::from_f64(1.0) / self
    }
    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return DoubleDouble::from_f64(self.hi.sqrt());
        }
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let r = (self - DoubleDouble::from_f64(ax) * ax).hi * (x * 0.5);
        let (hi, lo) = two_sum(ax, r);
        Self::renorm(hi, lo)
    }
    fn exp(self) -> Self {
        DoubleDouble::from_f64(self.hi.exp()) * (1.0 + self.lo)
    }
    fn ln(self) -> Self {
        DoubleDouble::from_f64(self.hi.ln()) + self.lo / self.hi
    }
    fn sin(self) -> Self {
        DoubleDouble::from_f64(self.hi.sin()) + self.hi.cos() * self.lo
    }
    fn cos(self) -> Self {
        DoubleDouble::from_f64(self.hi.cos()) - self.hi.sin() * self.lo
    }
    fn powi(self, k: i32) -> Self {
        if k < 0 {
            return self.powi(-k).recip();
        }
        let (mut base, mut e, mut acc) = (self, k as u32, DoubleDouble::from_f64(1.0));
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base *= base;
            e >>= 1;
        }
        acc
    }
    fn all_finite(&self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }
}

/// Value plus gradient over `N` seed variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T, const N: usize> {
    pub v: T,
    pub d: [T; N],
}

impl<T: Scalar, const N: usize> Dual<T, N> {
    /// A quantity that does not depend on any seed at this level.
    #[inline]
    pub fn constant(v: T) -> Self {
        Dual { v, d: [T::zero(); N] }
    }

    /// The seed variable `k` at this level, with value `v`.
    #[inline]
    pub fn variable(v: T, k: usize) -> Self {
        let mut d = [T::zero(); N];
        d[k] = T::one();
        Dual { v, d }
    }

    #[inline]
    fn chain(self, fv: T, dfdv: T) -> Self {
        Dual { v: fv, d: self.d.map(|di| di * dfdv) }
    }
}

impl<T: Scalar, const N: usize> Add for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Dual { v: self.v + rhs.v, d: std::array::from_fn(|i| self.d[i] + rhs.d[i]) }
    }
}

impl<T: Scalar, const N: usize> Sub for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Dual { v: self.v - rhs.v, d: std::array::from_fn(|i| self.d[i] - rhs.d[i]) }
    }
}

impl<T: Scalar, const N: usize> Mul for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Dual {
            v: self.v * rhs.v,
            d: std::array::from_fn(|i| self.d[i] * rhs.v + self.v * rhs.d[i]),
        }
    }
}

impl<T: Scalar, const N: usize> Div for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let q = self.v / rhs.v;
        let inv = rhs.v.recip();
        Dual { v: q, d: std::array::from_fn(|i| (self.d[i] - q * rhs.d[i]) * inv) }
    }
}

impl<T: Scalar, const N: usize> Neg for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Dual { v: -self.v, d: self.d.map(|x| -x) }
    }
}

impl<T: Scalar, const N: usize> Add<f64> for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: f64) -> Self {
        Dual { v: self.v + rhs, d: self.d }
    }
}

impl<T: Scalar, const N: usize> Sub<f64> for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: f64) -> Self {
        Dual { v: self.v - rhs, d: self.d }
    }
}

impl<T: Scalar, const N: usize> Mul<f64> for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: f64) -> Self {
        Dual { v: self.v * rhs, d: self.d.map(|x| x * rhs) }
    }
}

impl<T: Scalar, const N: usize> Div<f64> for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: f64) -> Self {
        self * (1.0 / rhs)
    }
}

impl<T: Scalar, const N: usize> AddAssign for Dual<T, N> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<T: Scalar, const N: usize> SubAssign for Dual<T, N> {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<T: Scalar, const N: usize> MulAssign for Dual<T, N> {
    #[inline]
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl<T: Scalar, const N: usize> Scalar for Dual<T, N> {
    #[inline]
    fn from_f64(v: f64) -> Self {
        Dual::constant(T::from_f64(v))
    }
    #[inline]
    fn value(&self) -> f64 {
        self.v.value()
    }
    #[inline]
    fn recip(self) -> Self {
        let r = self.v.recip();
        self.chain(r, -(r * r))
    }
    #[inline]
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, s.recip() * 0.5)
    }
    #[inline]
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e)
    }
    #[inline]
    fn ln(self) -> Self {
        self.chain(self.v.ln(), self.v.recip())
    }
    #[inline]
    fn sin(self) -> Self {
        self.chain(self.v.sin(), self.v.cos())
    }
    #[inline]
    fn cos(self) -> Self {
        self.chain(self.v.cos(), -self.v.sin())
    }
    fn powi(self, k: i32) -> Self {
        match k {
            0 => Self::one(),
            1 => self,
            k if k < 0 => self.recip().powi(-k),
            k => {
                let p = self.v.powi(k - 1);
                self.chain(self.v.powi(k), p * f64::from(k))
            }
        }
    }
    fn all_finite(&self) -> bool {
        self.v.all_finite() && self.d.iter().all(Scalar::all_finite)
    }
}

/// `a / b`, refusing denominators below [`DENOMINATOR_FLOOR`].
pub fn checked_div<S: Scalar>(a: S, b: S) -> Result<S, AutodiffError> {
    if b.value().abs() < DENOMINATOR_FLOOR || !b.value().is_finite() {
        return Err(AutodiffError::Domain(format!("division by {:e}", b.value())));
    }
    Ok(a / b)
}

/// A scalar function that can be evaluated on any [`Scalar`].
///
/// Rust closures cannot be generic over their argument type, so functions to
/// be differentiated implement this trait instead.
pub trait ScalarFn {
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<S, AutodiffError>;
}

/// Lift `values` into duals with unit seeds on the variables in `which`.
///
/// Seed `k` of the returned duals belongs to `values[which[k]]`; every other
/// variable is a constant at this level.
pub fn seed<const N: usize>(
    values: &[f64],
    which: &[usize],
) -> Result<Vec<Dual<f64, N>>, AutodiffError> {
    if which.len() != N {
        return Err(AutodiffError::SeedWidth { got: which.len(), expected: N });
    }
    if let Some(&index) = which.iter().find(|&&i| i >= values.len()) {
        return Err(AutodiffError::IndexOutOfRange { index, len: values.len() });
    }
    Ok(values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut d = [0.0; N];
            for (k, &w) in which.iter().enumerate() {
                if w == i {
                    d[k] = 1.0;
                }
            }
            Dual { v, d }
        })
        .collect())
}

/// A tower of single-seed duals used by [`derive`].
trait Tower: Scalar {
    /// `x` seeded at every level where `levels[k]` is set (outermost first).
    fn seeded(x: f64, levels: &[bool]) -> Self;
    /// Derivative taken once at every level.
    fn leading(&self) -> f64;
}

impl Tower for f64 {
    fn seeded(x: f64, _levels: &[bool]) -> Self {
        x
    }
    fn leading(&self) -> f64 {
        *self
    }
}

impl<T: Tower> Tower for Dual<T, 1> {
    fn seeded(x: f64, levels: &[bool]) -> Self {
        let d = if levels[0] { T::one() } else { T::zero() };
        Dual { v: T::seeded(x, &levels[1..]), d: [d] }
    }
    fn leading(&self) -> f64 {
        self.d[0].leading()
    }
}

fn derive_at<S: Tower, F: ScalarFn>(
    f: &F,
    x: &[f64],
    multi_index: &[usize],
) -> Result<f64, AutodiffError> {
    let lifted: Vec<S> = (0..x.len())
        .map(|i| {
            let levels: Vec<bool> = multi_index.iter().map(|&m| m == i).collect();
            S::seeded(x[i], &levels)
        })
        .collect();
    let out = f.eval(&lifted)?;
    let d = out.leading();
    if d.is_finite() {
        Ok(d)
    } else {
        Err(AutodiffError::NonFinite)
    }
}

type D1 = Dual<f64, 1>;
type D2 = Dual<D1, 1>;
type D3 = Dual<D2, 1>;
type D4 = Dual<D3, 1>;
type D5 = Dual<D4, 1>;
type D6 = Dual<D5, 1>;

/// Mixed partial derivative of `f` at `x`, one derivative per entry of
/// `multi_index`. An empty index returns `f(x)`.
pub fn derive<F: ScalarFn>(f: &F, x: &[f64], multi_index: &[usize]) -> Result<f64, AutodiffError> {
    if let Some(&index) = multi_index.iter().find(|&&i| i >= x.len()) {
        return Err(AutodiffError::IndexOutOfRange { index, len: x.len() });
    }
    match multi_index.len() {
        0 => derive_at::<f64, F>(f, x, multi_index),
        1 => derive_at::<D1, F>(f, x, multi_index),
        2 => derive_at::<D2, F>(f, x, multi_index),
        3 => derive_at::<D3, F>(f, x, multi_index),
        4 => derive_at::<D4, F>(f, x, multi_index),
        5 => derive_at::<D5, F>(f, x, multi_index),
        6 => derive_at::<D6, F>(f, x, multi_index),
        requested => Err(AutodiffError::DepthExceeded { requested, max: MAX_DEPTH }),
    }
}

/// Second partials of `f` over the variables in `block`, symmetrized.
pub fn hessian<F: ScalarFn>(
    f: &F,
    x: &[f64],
    block: &[usize],
) -> Result<Vec<Vec<f64>>, AutodiffError> {
    let m = block.len();
    let mut h = vec![vec![0.0; m]; m];
    for a in 0..m {
        for c in a..m {
            let (i, j) = (block[a], block[c]);
            let hij = derive(f, x, &[i, j])?;
            let v = if i == j { hij } else { 0.5 * (hij + derive(f, x, &[j, i])?) };
            h[a][c] = v;
            h[c][a] = v;
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Pow4;
    impl ScalarFn for Pow4 {
        fn eval<S: Scalar>(&self, x: &[S]) -> Result<S, AutodiffError> {
            Ok(x[0].powi(4))
        }
    }

    struct Norm;
    impl ScalarFn for Norm {
        fn eval<S: Scalar>(&self, x: &[S]) -> Result<S, AutodiffError> {
            Ok((x[0] * x[0] + x[1] * x[1]).sqrt())
        }
    }

    struct SqY1Y2;
    impl ScalarFn for SqY1Y2 {
        fn eval<S: Scalar>(&self, x: &[S]) -> Result<S, AutodiffError> {
            Ok(x[0] * x[0] * x[1])
        }
    }

    struct HalfKropinaSq;
    impl ScalarFn for HalfKropinaSq {
        fn eval<S: Scalar>(&self, y: &[S]) -> Result<S, AutodiffError> {
            let a2 = y[0] * y[0] + y[1] * y[1];
            let f = checked_div(a2, y[0])?;
            Ok(f * f * 0.5)
        }
    }

    struct Product;
    impl ScalarFn for Product {
        fn eval<S: Scalar>(&self, y: &[S]) -> Result<S, AutodiffError> {
            Ok(y[0] * y[1])
        }
    }

    struct Deep;
    impl ScalarFn for Deep {
        fn eval<S: Scalar>(&self, x: &[S]) -> Result<S, AutodiffError> {
            Ok(x[0].powi(7))
        }
    }

    #[test]
    fn seed_power_rule() {
        let x = seed::<1>(&[2.0], &[0]).unwrap();
        let f = x[0] * x[0];
        assert_eq!(f.v, 4.0);
        assert_eq!(f.d[0], 4.0);
    }

    #[test]
    fn seed_product_rule_and_constants() {
        let y = seed::<2>(&[1.0, 1.0], &[0, 1]).unwrap();
        assert_eq!((y[0] * y[1]).d[0], 1.0);

        let c = seed::<0>(&[3.0], &[]).unwrap();
        assert_eq!(c[0].v, 3.0);
        let nested: Dual<Dual<f64, 1>, 1> = Dual::constant(Dual::constant(3.0));
        let sq = nested * nested;
        assert_eq!(sq.d[0].v, 0.0);
        assert_eq!(sq.v.d[0], 0.0);
    }

    #[test]
    fn seed_rejects_bad_indices() {
        assert_eq!(
            seed::<1>(&[1.0], &[3]).unwrap_err(),
            AutodiffError::IndexOutOfRange { index: 3, len: 1 }
        );
        assert!(matches!(seed::<2>(&[1.0], &[0]), Err(AutodiffError::SeedWidth { .. })));
    }

    #[test]
    fn derive_examples() {
        assert_eq!(derive(&Pow4, &[1.0], &[0, 0, 0, 0]).unwrap(), 24.0);
        assert_eq!(derive(&SqY1Y2, &[1.0, 1.0], &[0, 1]).unwrap(), 2.0);
        assert!((derive(&Norm, &[3.0, 4.0], &[0]).unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn derive_depth_limits() {
        // 7 * 6 * 5 * 4 * 3 * 2 * x at x = 1
        assert_eq!(derive(&Deep, &[1.0], &[0; 6]).unwrap(), 5040.0);
        assert_eq!(
            derive(&Deep, &[1.0], &[0; 7]).unwrap_err(),
            AutodiffError::DepthExceeded { requested: 7, max: MAX_DEPTH }
        );
        assert!(matches!(
            derive(&Deep, &[1.0], &[1]),
            Err(AutodiffError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn derive_reports_domain_errors() {
        let err = derive(&HalfKropinaSq, &[0.0, 1.0], &[0]).unwrap_err();
        assert!(matches!(err, AutodiffError::Domain(_)));
    }

    #[test]
    fn hessian_examples() {
        struct HalfNormSq;
        impl ScalarFn for HalfNormSq {
            fn eval<S: Scalar>(&self, y: &[S]) -> Result<S, AutodiffError> {
                Ok((y[0] * y[0] + y[1] * y[1]) * 0.5)
            }
        }
        assert_eq!(
            hessian(&HalfNormSq, &[0.3, -0.7], &[0, 1]).unwrap(),
            vec![vec![1.0, 0.0], vec![0.0, 1.0]]
        );
        let h = hessian(&HalfKropinaSq, &[1.0, 0.0], &[0, 1]).unwrap();
        assert!((h[0][0] - 1.0).abs() < 1e-14 && (h[1][1] - 2.0).abs() < 1e-14);
        assert_eq!(h[0][1], 0.0);
        assert_eq!(
            hessian(&Product, &[0.4, 2.0], &[0, 1]).unwrap(),
            vec![vec![0.0, 1.0], vec![1.0, 0.0]]
        );
    }

    #[test]
    fn transcendental_derivatives() {
        struct Mix;
        impl ScalarFn for Mix {
            fn eval<S: Scalar>(&self, x: &[S]) -> Result<S, AutodiffError> {
                Ok(x[0].sin() * x[0].exp() + x[0].cos().ln().recip())
            }
        }
        let x = 0.4_f64;
        let expected = x.cos() * x.exp() + x.sin() * x.exp()
            + x.tan() / x.cos().ln().powi(2);
        assert!((derive(&Mix, &[x], &[0]).unwrap() - expected).abs() < 1e-13);
    }

    #[test]
    fn double_double_carries_extra_digits() {
        let third = DoubleDouble::from_f64(1.0) / 3.0;
        let back = third * 3.0 - 1.0;
        assert!(back.hi.abs() < 1e-30);
        let r = DoubleDouble::from_f64(2.0).sqrt();
        assert!((r * r - 2.0).hi.abs() < 1e-30);
        let tiny = DoubleDouble::from_f64(1.0) + 1e-20;
        assert_eq!((tiny - 1.0).value(), 1e-20);
        assert_eq!(DoubleDouble::from_f64(3.0).powi(3).value(), 27.0);
        assert!((DoubleDouble::from_f64(0.5).exp().value() - 0.5f64.exp()).abs() < 1e-15);
    }
}
