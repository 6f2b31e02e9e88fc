//! Deterministic sampling of points and admissible directions, and the
//! Busemann-Hausdorff density.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::KropinaError;
use crate::fields::{FieldError, FieldSpec, B2_FLOOR};
use crate::linalg::{cholesky, lin, quad};

/// Directions satisfy `β ≥ CONE_MARGIN · b · α`.
pub const CONE_MARGIN: f64 = 0.1;

const DIRECTION_SALT: u64 = 0x6469_7265_6374_696f;
const MAX_DRAWS: usize = 10_000;

/// `count` points in the guard box; point `k` comes from stream `k` of a
/// generator seeded with `seed`, so the list does not depend on scheduling.
pub fn sample_points(spec: &FieldSpec, count: usize, seed: u64) -> Result<Vec<Vec<f64>>, KropinaError> {
    (0..count)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            for _ in 0..MAX_DRAWS {
                let x = spec.sample_point(&mut rng);
                if spec.check_point(&x).is_ok() {
                    return Ok(x);
                }
            }
            Err(FieldError::Degenerate { point: vec![], b2: 0.0 }.into())
        })
        .collect()
}

/// `count` directions at `x`, uniform on the `α`-unit sphere and restricted to
/// the cone `β ≥ CONE_MARGIN · b · α`.
pub fn sample_directions(
    spec: &FieldSpec,
    x: &[f64],
    count: usize,
    seed: u64,
    point_index: usize,
) -> Result<Vec<Vec<f64>>, KropinaError> {
    let n = spec.n;
    let fv = spec.eval_field(x)?;
    let l = cholesky(&fv.a, n).ok_or_else(|| FieldError::NotPositiveDefinite { point: x.to_vec() })?;
    let b = fv.b2.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ DIRECTION_SALT);
    rng.set_stream(point_index as u64);
    let mut out = Vec::with_capacity(count);
    let mut draws = 0;
    while out.len() < count {
        draws += 1;
        if draws > MAX_DRAWS * count.max(1) {
            return Err(KropinaError::Degenerate(fv.b2));
        }
        let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        // Lᵀ y = z/|z|
        let mut y = vec![0.0; n];
        for i in (0..n).rev() {
            let mut acc = z[i] / norm;
            for k in i + 1..n {
                acc -= l[k * n + i] * y[k];
            }
            y[i] = acc / l[i * n + i];
        }
        let alpha = quad(&fv.a, &y).sqrt();
        if lin(&fv.b, &y) >= CONE_MARGIN * b * alpha {
            out.push(y);
        }
    }
    Ok(out)
}

/// `σ(x) = (2/b)^n √det a`.
pub fn bh_volume(spec: &FieldSpec, x: &[f64]) -> Result<f64, KropinaError> {
    let fv = spec.eval_field(x)?;
    if fv.b2 < B2_FLOOR {
        return Err(KropinaError::Degenerate(fv.b2));
    }
    let n = spec.n as i32;
    Ok((2.0 / fv.b2.sqrt()).powi(n) * fv.det.sqrt())
}

fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / n as f64 * unit_ball_volume(n - 2),
    }
}

/// `ω_n / vol{y : α² < β}`, with the volume estimated by jittered-grid
/// samples in the bounding box of the indicatrix ball: the box is cut into
/// `m^n` equal cells with `m = ⌊samples^{1/n}⌋` and each cell receives the
/// same number of uniform points, `samples` in total up to rounding down.
pub fn bh_volume_monte_carlo(spec: &FieldSpec, x: &[f64], samples: usize, seed: u64) -> Result<f64, KropinaError> {
    let n = spec.n;
    let fv = spec.eval_field(x)?;
    if fv.b2 < B2_FLOOR {
        return Err(KropinaError::Degenerate(fv.b2));
    }
    let half_b = 0.5 * fv.b2.sqrt();
    let centre: Vec<f64> = fv.b_up.iter().map(|v| 0.5 * v).collect();
    let half: Vec<f64> = (0..n).map(|i| half_b * fv.a_inv[i * n + i].sqrt()).collect();
    let mut m = (samples.max(1) as f64).powf(1.0 / n as f64).floor() as usize;
    while (m + 1).pow(n as u32) <= samples {
        m += 1;
    }
    let m = m.max(1);
    let cells = m.pow(n as u32);
    let per_cell = (samples / cells).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    let mut y = vec![0.0; n];
    for cell in 0..cells {
        for _ in 0..per_cell {
            let mut rest = cell;
            for i in 0..n {
                let k = rest % m;
                rest /= m;
                let u = (k as f64 + rng.gen_range(0.0..1.0)) / m as f64;
                y[i] = centre[i] + half[i] * (2.0 * u - 1.0);
            }
            if quad(&fv.a, &y) < lin(&fv.b, &y) {
                hits += 1;
            }
        }
    }
    let box_volume: f64 = half.iter().map(|h| 2.0 * h).product();
    let volume = box_volume * hits as f64 / (cells * per_cell) as f64;
    Ok(unit_ball_volume(n) / volume)
}
