//! Built-in field documents.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{parse_field_config, FieldError, FieldSpec};

/// Shipped documents, by catalog name.
pub const CATALOG: &[(&str, &str)] = &[
    ("euclidean-constant", include_str!("../../catalog/euclidean-constant.json")),
    ("conformal-gradient", include_str!("../../catalog/conformal-gradient.json")),
    ("sphere-hopf", include_str!("../../catalog/sphere-hopf.json")),
];

/// All catalog names, including the generated `random-poly`.
pub fn catalog_names() -> Vec<&'static str> {
    CATALOG.iter().map(|(name, _)| *name).chain(["random-poly"]).collect()
}

/// Load a catalog entry; `seed` only affects `random-poly`.
pub fn load_catalog(name: &str, seed: u64) -> Result<FieldSpec, FieldError> {
    if name == "random-poly" {
        return parse_field_config(&random_poly_document(seed));
    }
    CATALOG
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, doc)| parse_field_config(doc))
        .unwrap_or_else(|| Err(FieldError::UnknownCatalog(name.to_string())))
}

fn term(coeff: f64, monomial: &str) -> String {
    let sign = if coeff < 0.0 { '-' } else { '+' };
    format!(" {sign} {:.6}*{monomial}", coeff.abs())
}

/// A generic 3-dimensional instance: identity plus a small quadratic
/// perturbation for `a`, a cubic polynomial for `b`, coefficients drawn from
/// a seeded ChaCha8 stream.
pub fn random_poly_document(seed: u64) -> String {
    const N: usize = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut defs = serde_json::Map::new();
    let mut quadratic = Vec::new();
    let mut cubic = Vec::new();
    for i in 1..=N {
        for j in i..=N {
            let q = format!("q{i}{j}");
            defs.insert(q.clone(), json!(format!("x{i}*x{j}")));
            quadratic.push(q);
        }
    }
    for i in 1..=N {
        for j in i..=N {
            for k in j..=N {
                let c = format!("c{i}{j}{k}");
                defs.insert(c.clone(), json!(format!("q{i}{j}*x{k}")));
                cubic.push(c);
            }
        }
    }

    let mut metric = Vec::new();
    for i in 0..N {
        let mut row = Vec::new();
        for j in i..N {
            let mut e = if i == j { "1".to_string() } else { "0".to_string() };
            for q in &quadratic {
                e += &term(rng.gen_range(-0.05..0.05), q);
            }
            row.push(e);
        }
        metric.push(row);
    }

    let mut oneform = Vec::new();
    for i in 0..N {
        let constant: f64 = if i == 0 { 1.0 } else { rng.gen_range(-0.3..0.3) };
        let mut e = format!("{constant:.6}");
        for k in 1..=N {
            e += &term(rng.gen_range(-0.15..0.15), &format!("x{k}"));
        }
        for q in &quadratic {
            e += &term(rng.gen_range(-0.08..0.08), q);
        }
        for c in &cubic {
            e += &term(rng.gen_range(-0.04..0.04), c);
        }
        oneform.push(e);
    }

    let doc = json!({
        "name": format!("random-poly-{seed}"),
        "dimension": N,
        "defs": defs,
        "metric_upper": metric,
        "oneform": oneform,
        "guard_box": vec![[-0.8, 0.8]; N],
    });
    serde_json::to_string_pretty(&doc).expect("serializable")
}
