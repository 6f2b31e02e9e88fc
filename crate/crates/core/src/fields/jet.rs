//! Second-order Taylor models of a field.

use super::{FieldError, FieldSpec};
use crate::autodiff::{Dual, Scalar};

/// One component `c(x) ≈ v + g·d + ½ dᵀHd` with `d = x − x0`, zero
/// coefficients dropped.
#[derive(Debug, Clone, PartialEq)]
struct Component {
    value: f64,
    linear: Vec<(usize, f64)>,
    /// Index into the upper-triangle products of `d`, with the factor ½ or 1
    /// already applied.
    quadratic: Vec<(usize, f64)>,
}

impl Component {
    fn is_zero(&self) -> bool {
        self.value == 0.0 && self.linear.is_empty() && self.quadratic.is_empty()
    }

    fn eval<S: Scalar>(&self, d: &[S], products: &[S]) -> S {
        let mut acc = S::from_f64(self.value);
        for &(i, c) in &self.linear {
            acc += d[i] * c;
        }
        for &(k, c) in &self.quadratic {
            acc += products[k] * c;
        }
        acc
    }
}

/// `a_ij` and `b_i` replaced by their second-order Taylor polynomials at
/// `x0`.
///
/// Any quantity at `x0` that uses at most two `x`-derivatives of the field,
/// which covers the spray, the Riemann curvature and its `y`-derivatives, is
/// reproduced exactly. On deeply nested scalars the polynomial is much
/// cheaper than the defining expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldJet {
    pub n: usize,
    pub x0: Vec<f64>,
    metric: Vec<Component>,
    oneform: Vec<Component>,
}

fn pair_index(n: usize, i: usize, j: usize) -> usize {
    i * n - i * (i + 1) / 2 + j
}

fn component<const N: usize>(c: &Dual<Dual<f64, N>, N>) -> Component {
    let mut linear = Vec::new();
    let mut quadratic = Vec::new();
    for i in 0..N {
        if c.d[i].v != 0.0 {
            linear.push((i, c.d[i].v));
        }
        for j in i..N {
            let h = 0.5 * (c.d[i].d[j] + c.d[j].d[i]);
            let coeff = if i == j { 0.5 * h } else { h };
            if coeff != 0.0 {
                quadratic.push((pair_index(N, i, j), coeff));
            }
        }
    }
    Component { value: c.v.v, linear, quadratic }
}

fn jet_n<const N: usize>(spec: &FieldSpec, x0: &[f64]) -> Result<FieldJet, FieldError> {
    let x: Vec<Dual<Dual<f64, N>, N>> =
        x0.iter().enumerate().map(|(i, &v)| Dual::variable(Dual::variable(v, i), i)).collect();
    let (a, b) = spec.eval_raw(&x)?;
    Ok(FieldJet {
        n: N,
        x0: x0.to_vec(),
        metric: a.iter().map(component).collect(),
        oneform: b.iter().map(component).collect(),
    })
}

impl FieldSpec {
    /// The second-order Taylor model of the field at `x0`.
    pub fn jet(&self, x0: &[f64]) -> Result<FieldJet, FieldError> {
        if x0.len() != self.n {
            return Err(FieldError::Dimension(format!("point has {} coordinates, expected {}", x0.len(), self.n)));
        }
        match self.n {
            1 => jet_n::<1>(self, x0),
            2 => jet_n::<2>(self, x0),
            3 => jet_n::<3>(self, x0),
            4 => jet_n::<4>(self, x0),
            5 => jet_n::<5>(self, x0),
            6 => jet_n::<6>(self, x0),
            n => Err(FieldError::Dimension(format!("jets support n <= 6, got {n}"))),
        }
    }
}

impl FieldJet {
    /// `a_ij` (full, row-major) and `b_i` of the model.
    pub fn eval_raw<S: Scalar>(&self, x: &[S]) -> (Vec<S>, Vec<S>) {
        let n = self.n;
        let d: Vec<S> = x.iter().zip(&self.x0).map(|(&xi, &x0)| xi - x0).collect();
        let mut products = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                products.push(d[i] * d[j]);
            }
        }
        let a = self.metric.iter().map(|c| c.eval(&d, &products)).collect();
        let b = self.oneform.iter().map(|c| c.eval(&d, &products)).collect();
        (a, b)
    }

    /// Whether the model of `a_ij` vanishes identically.
    pub fn metric_entry_is_zero(&self, i: usize, j: usize) -> bool {
        self.metric[i * self.n + j].is_zero()
    }
}
