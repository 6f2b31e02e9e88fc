//! Invariants of the differentiation engine, the Finsler pipeline and the
//! closed forms, checked on generated inputs.

use kropina_core::autodiff::{derive, AutodiffError, Scalar, ScalarFn};
use kropina_core::fields::{load_catalog, FieldSpec};
use kropina_core::finsler::{self, FinslerEval, Kropina, KropinaBhDensity, Precision, Riemannian};
use kropina_core::kropina::{bh_volume, closed_form, sample_directions, sample_points, CONE_MARGIN};
use kropina_core::linalg::{lin, mat_mul, max_abs, quad};
use kropina_core::riemannian::alpha_curvature;
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

fn rel_vec(a: &[f64], b: &[f64]) -> f64 {
    let d = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    d / (1.0 + max_abs(a).max(max_abs(b)))
}

/// `exp(c0 x1 x2) + sin(x3) x1³ + c1 / (2 + x2²)`.
struct Smooth([f64; 2]);

impl ScalarFn for Smooth {
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<S, AutodiffError> {
        let [c0, c1] = self.0;
        Ok((x[0] * x[1] * c0).exp() + x[2].sin() * x[0].powi(3) + (x[1] * x[1] + 2.0).recip() * c1)
    }
}

fn random_poly_sample(seed: u64, point: usize, dir: usize) -> (FieldSpec, Vec<f64>, Vec<f64>) {
    let spec = load_catalog("random-poly", seed).unwrap();
    let x = sample_points(&spec, point + 1, seed).unwrap().pop().unwrap();
    let y = sample_directions(&spec, &x, dir + 1, seed, point).unwrap().pop().unwrap();
    (spec, x, y)
}

fn pipeline(spec: &FieldSpec, x: &[f64], y: &[f64]) -> FinslerEval {
    finsler::finsler_eval_with(&Kropina { spec }, x, y, Some(&KropinaBhDensity { spec }), Precision::Adaptive).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn mixed_partials_commute(
        x in prop::array::uniform3(-1.0f64..1.0),
        c in prop::array::uniform2(-2.0f64..2.0),
        idx in prop::array::uniform3(0usize..3),
    ) {
        let f = Smooth(c);
        let base = derive(&f, &x, &idx).unwrap();
        for perm in [[idx[1], idx[0], idx[2]], [idx[2], idx[1], idx[0]], [idx[0], idx[2], idx[1]]] {
            prop_assert!(rel(base, derive(&f, &x, &perm).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn first_derivative_matches_central_difference(
        x in prop::array::uniform3(-1.0f64..1.0),
        c in prop::array::uniform2(-2.0f64..2.0),
        i in 0usize..3,
    ) {
        let f = Smooth(c);
        let h = 1e-5;
        let (mut xp, mut xm) = (x, x);
        xp[i] += h;
        xm[i] -= h;
        let fd = (f.eval(&xp).unwrap() - f.eval(&xm).unwrap()) / (2.0 * h);
        prop_assert!(rel(derive(&f, &x, &[i]).unwrap(), fd) < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn closed_form_homogeneity(seed in 0u64..1000, point in 0usize..4, dir in 0usize..4, lambda in 0.2f64..5.0) {
        let (spec, x, y) = random_poly_sample(seed, point, dir);
        let ly: Vec<f64> = y.iter().map(|v| lambda * v).collect();
        let a = closed_form(&spec, &x, &y).unwrap();
        let b = closed_form(&spec, &x, &ly).unwrap();
        prop_assert!(rel(b.f, lambda * a.f) < 1e-12);
        prop_assert!(rel_vec(&b.g, &a.g) < 1e-10);
        prop_assert!(rel(b.ric, lambda * lambda * a.ric) < 1e-10);
        prop_assert!(rel_vec(&b.ric_tensor, &a.ric_tensor) < 1e-10);
        prop_assert!(rel(b.scalar, a.scalar) < 1e-10);
        prop_assert!(rel(quad(&a.g, &y), a.f * a.f) < 1e-12);
    }

    #[test]
    fn pipeline_identities(seed in 0u64..1000, point in 0usize..4, dir in 0usize..4) {
        let (spec, x, y) = random_poly_sample(seed, point, dir);
        let n = spec.n;
        let e = pipeline(&spec, &x, &y);
        let id = mat_mul(&e.g, &e.g_inv, n);
        for i in 0..n {
            for j in 0..n {
                let expected = f64::from(u8::from(i == j));
                prop_assert!((id[i * n + j] - expected).abs() < 1e-10);
                prop_assert!(e.g[i * n + j] == e.g[j * n + i]);
            }
        }
        let scale = 1.0 + max_abs(&e.riemann_curvature);
        for i in 0..n {
            let ry: f64 = (0..n).map(|k| e.riemann_curvature[i * n + k] * y[k]).sum();
            prop_assert!(ry.abs() / scale < 1e-10);
        }
        // g_ij R^j_k is symmetric
        let gr = mat_mul(&e.g, &e.riemann_curvature, n);
        for i in 0..n {
            for k in 0..n {
                prop_assert!((gr[i * n + k] - gr[k * n + i]).abs() / (1.0 + max_abs(&gr)) < 1e-9);
            }
        }
        prop_assert!(rel(quad(&e.ric_tensor, &y), e.ric) < 1e-9);
        prop_assert!(rel(quad(&e.g, &y), e.f * e.f) < 1e-12);
        let s = e.s_curvature.unwrap();
        prop_assert!(s.is_finite());
    }

    #[test]
    fn closed_forms_agree_with_pipeline(seed in 0u64..1000, point in 0usize..4, dir in 0usize..4) {
        let (spec, x, y) = random_poly_sample(seed, point, dir);
        let c = closed_form(&spec, &x, &y).unwrap();
        let e = pipeline(&spec, &x, &y);
        prop_assert!(rel_vec(&c.g, &e.g) < 1e-10);
        prop_assert!(rel(c.ric, e.ric) < 1e-8);
        prop_assert!(rel_vec(&c.ric_tensor, &e.ric_tensor) < 1e-8);
        prop_assert!(rel(c.scalar, e.scalar) < 1e-8);
    }

    #[test]
    fn riemannian_specialization(seed in 0u64..1000, point in 0usize..4, dir in 0usize..4) {
        let (spec, x, y) = random_poly_sample(seed, point, dir);
        let e = finsler::finsler_eval::<_, KropinaBhDensity>(&Riemannian { spec: &spec }, &x, &y, None).unwrap();
        let al = alpha_curvature(&spec, &x).unwrap();
        let n = spec.n;
        prop_assert!(rel(e.ric, quad(&al.ricci, &y)) < 1e-9);
        prop_assert!(rel_vec(&e.ric_tensor, &al.ricci) < 1e-9);
        prop_assert!(rel(e.scalar, al.scalar) < 1e-9);
        for i in 0..n {
            let half_gamma: f64 = (0..n).flat_map(|j| (0..n).map(move |k| (j, k)))
                .map(|(j, k)| 0.5 * al.gamma(i, j, k) * y[j] * y[k])
                .sum();
            prop_assert!(rel(e.spray[i], half_gamma) < 1e-10);
        }
    }

    #[test]
    fn spray_is_two_homogeneous(seed in 0u64..1000, point in 0usize..4, lambda in 0.2f64..5.0) {
        let (spec, x, y) = random_poly_sample(seed, point, 0);
        let m = Kropina { spec: &spec };
        let ly: Vec<f64> = y.iter().map(|v| lambda * v).collect();
        let g1 = finsler::spray(&m, &x, &y).unwrap();
        let g2 = finsler::spray(&m, &x, &ly).unwrap();
        let scaled: Vec<f64> = g1.iter().map(|v| lambda * lambda * v).collect();
        prop_assert!(rel_vec(&g2, &scaled) < 1e-10);
    }

    #[test]
    fn sampling_is_deterministic_and_admissible(seed in any::<u64>(), name in 0usize..4, point in 0usize..3) {
        let names = kropina_core::fields::catalog_names();
        let spec = load_catalog(names[name], seed).unwrap();
        let pts = sample_points(&spec, point + 1, seed).unwrap();
        prop_assert_eq!(&pts, &sample_points(&spec, point + 1, seed).unwrap());
        let x = &pts[point];
        prop_assert!(spec.in_guard(x));
        let dirs = sample_directions(&spec, x, 4, seed, point).unwrap();
        prop_assert_eq!(&dirs, &sample_directions(&spec, x, 4, seed, point).unwrap());
        let fv = spec.eval_field(x).unwrap();
        for y in &dirs {
            let alpha = quad(&fv.a, y).sqrt();
            prop_assert!((alpha - 1.0).abs() < 1e-12);
            prop_assert!(lin(&fv.b, y) >= CONE_MARGIN * fv.b2.sqrt() * alpha);
        }
        let sigma = bh_volume(&spec, x).unwrap();
        prop_assert!(rel(sigma, 8.0 * (fv.det / fv.b2.powi(3)).sqrt()) < 1e-12);
    }
}
