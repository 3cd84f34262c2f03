//! Monte Carlo amoeba point generation.
//!
//! Draw `|z|` log-uniformly and `arg z` uniformly, collect every root of
//! `P(z, .)`, and keep the log-moduli of residual-verified pairs; then
//! repeat with the variable roles swapped so thin tentacles in either
//! direction still collect points. An optional monomial transform samples
//! an equivalent polynomial whose amoeba covers more evenly and pulls the
//! points back.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::poly::{NewtonPolynomial, UnimodularTransform};
use crate::{Error, Result};

/// Relative residual above which a root pair is discarded rather than
/// repaired.
pub const RESIDUAL_REL_TOL: f64 = 1e-8;

/// Default half-width of the log-modulus sampling range.
pub const DEFAULT_S_RANGE: f64 = 6.0;

/// Draws per worker chunk; fixes the sub-stream layout so results do not
/// depend on thread count.
const CHUNK: u64 = 1024;

/// How a cloud was produced; kept alongside the points so any cloud can
/// be regenerated bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSpec {
    pub count: u64,
    pub s_range: f64,
    pub transform: Option<UnimodularTransform>,
}

/// Log-plane points sampled from an amoeba.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Vec<(f64, f64)>,
    pub seed: u64,
    pub spec: SampleSpec,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Samples `count` draws per variable role from the amoeba of `p`.
///
/// Every returned point is the log-modulus image of a root pair whose
/// residual `|P(z, w)|` is below [`RESIDUAL_REL_TOL`] times the monomial
/// magnitude sum at that point. With a transform, the transformed
/// polynomial is sampled instead and points are pulled back through
/// [`UnimodularTransform::map_log_point`].
pub fn sample_amoeba(
    p: &NewtonPolynomial,
    count: u64,
    s_range: f64,
    seed: u64,
    transform: Option<UnimodularTransform>,
) -> Result<PointCloud> {
    if count < 1 {
        return Err(Error::InvalidInput("sample count must be at least 1".into()));
    }
    if !(s_range > 0.0) {
        return Err(Error::InvalidInput("s_range must be positive".into()));
    }
    let target = match &transform {
        Some(t) => p.transform(t)?,
        None => p.clone(),
    };

    let depends_on_w = target.coeffs_in_w(Complex64::new(1.0, 0.0)).is_some();
    let depends_on_z = target.coeffs_in_z(Complex64::new(1.0, 0.0)).is_some();
    if !depends_on_w && !depends_on_z {
        return Err(Error::Degenerate(
            "polynomial depends on neither variable".into(),
        ));
    }

    let swapped = target.swap_vars();
    let mut points = Vec::new();
    // Role 0 solves for w at fixed z, role 1 the reverse. Each chunk owns
    // a dedicated ChaCha stream so the merge order is deterministic.
    for (role, poly, active) in [(0u64, &target, depends_on_w), (1u64, &swapped, depends_on_z)] {
        if !active {
            continue;
        }
        let chunks: Vec<(u64, u64)> = (0..count.div_ceil(CHUNK))
            .map(|k| (k, (count - k * CHUNK).min(CHUNK)))
            .collect();
        let chunk_points: Vec<Vec<(f64, f64)>> = chunks
            .par_iter()
            .map(|&(chunk_idx, draws)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(role * (1 << 32) + chunk_idx);
                let mut local = Vec::new();
                for _ in 0..draws {
                    let s = rng.gen_range(-s_range..s_range);
                    let theta = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
                    let z = Complex64::from_polar(s.exp(), theta);
                    let Some(coeffs) = poly.coeffs_in_w(z) else {
                        continue;
                    };
                    let Ok(roots) = crate::roots::solve_univariate_roots(&coeffs, 1e-10) else {
                        continue;
                    };
                    for w in roots {
                        if w.norm_sqr() == 0.0 {
                            continue;
                        }
                        if !residual_ok(poly, z, w) {
                            continue;
                        }
                        let pt = (s, w.norm().ln());
                        local.push(if role == 0 { pt } else { (pt.1, pt.0) });
                    }
                }
                local
            })
            .collect();
        for chunk in chunk_points {
            points.extend(chunk);
        }
    }

    if let Some(t) = &transform {
        for pt in &mut points {
            *pt = t.map_log_point(*pt);
        }
    }

    Ok(PointCloud {
        points,
        seed,
        spec: SampleSpec {
            count,
            s_range,
            transform,
        },
    })
}

fn residual_ok(p: &NewtonPolynomial, z: Complex64, w: Complex64) -> bool {
    let value = match p.evaluate(z, w) {
        Ok(v) => v,
        Err(_) => return false,
    };
    let scale: f64 = p
        .terms()
        .map(|(e, c)| c.norm() * z.norm().powi(e.i as i32) * w.norm().powi(e.j as i32))
        .sum();
    value.norm() < RESIDUAL_REL_TOL * scale.max(f64::MIN_POSITIVE)
}

/// Directed Hausdorff distance `sup_a inf_b |a - b|` over point slices.
pub fn directed_hausdorff(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    a.par_iter()
        .map(|&(ax, ay)| {
            b.iter()
                .map(|&(bx, by)| ((ax - bx).powi(2) + (ay - by).powi(2)).sqrt())
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max)
}

/// Symmetric Hausdorff distance between two clouds.
pub fn hausdorff(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}
