//! Simultaneous root finding for dense univariate complex polynomials.
//!
//! The Monte Carlo sampler and the torus membership scan both reduce to
//! "all roots of `P(z0, w)` in `w`". Degrees stay small (the polygon
//! height), so an Aberth-Ehrlich iteration with Newton polishing is
//! plenty.

use num_complex::Complex64;

use crate::{Error, Result};

const MAX_ITERATIONS: usize = 200;

/// Relative threshold below which a leading coefficient is treated as
/// zero when determining the effective degree.
const LEADING_EPS: f64 = 1e-13;

/// All roots of `sum coeffs[k] w^k`, each verified to residual
/// `|p(w)| <= tol * sum |coeffs[k]| |w|^k`.
///
/// Exact-zero trailing coefficients factor out as roots at the origin.
/// Errors if the stripped degree is < 1, or with the best iterate if the
/// iteration fails to converge.
pub fn solve_univariate_roots(coeffs: &[Complex64], tol: f64) -> Result<Vec<Complex64>> {
    let max_mag = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if max_mag == 0.0 {
        return Err(Error::InvalidInput(
            "all-zero polynomial has no defined roots".into(),
        ));
    }
    let mut hi = coeffs.len();
    while hi > 0 && coeffs[hi - 1].norm() <= LEADING_EPS * max_mag {
        hi -= 1;
    }
    let mut lo = 0;
    while lo < hi && coeffs[lo].norm_sqr() == 0.0 {
        lo += 1;
    }
    let body = &coeffs[lo..hi];
    if body.len() < 2 {
        return Err(Error::InvalidInput(
            "degree must be at least 1 after stripping leading zeros".into(),
        ));
    }
    let mut roots = vec![Complex64::new(0.0, 0.0); lo];
    roots.extend(aberth(body, tol)?);
    Ok(roots)
}

/// Horner evaluation returning `(p(x), p'(x), scale)` with
/// `scale = sum |a_k| |x|^k`, the natural magnitude of the summation.
fn eval(coeffs: &[Complex64], x: Complex64) -> (Complex64, Complex64, f64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    let ax = x.norm();
    for &a in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + a;
        scale = scale * ax + a.norm();
    }
    (p, dp, scale)
}

fn aberth(coeffs: &[Complex64], tol: f64) -> Result<Vec<Complex64>> {
    let degree = coeffs.len() - 1;
    match degree {
        1 => return Ok(vec![-coeffs[0] / coeffs[1]]),
        2 => return Ok(quadratic(coeffs[0], coeffs[1], coeffs[2])),
        _ => {}
    }

    // Initial guesses on a Cauchy-bound circle with an irrational angular
    // offset so symmetric polynomials do not trap the iteration.
    let lead = coeffs[degree].norm();
    let radius = 1.0 + coeffs[..degree].iter().map(|c| c.norm() / lead).fold(0.0, f64::max);
    let mut xs: Vec<Complex64> = (0..degree)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / degree as f64 + 0.3572;
            Complex64::from_polar(radius.min(1e6), angle)
        })
        .collect();

    for _ in 0..MAX_ITERATIONS {
        let mut all_converged = true;
        for i in 0..degree {
            let (p, dp, scale) = eval(coeffs, xs[i]);
            if p.norm() <= tol * scale.max(f64::MIN_POSITIVE) {
                continue;
            }
            all_converged = false;
            let newton = if dp.norm_sqr() == 0.0 {
                Complex64::new(1e-8, 1e-8)
            } else {
                p / dp
            };
            let mut repulsion = Complex64::new(0.0, 0.0);
            for j in 0..degree {
                if j != i {
                    let diff = xs[i] - xs[j];
                    if diff.norm_sqr() > 0.0 {
                        repulsion += diff.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * repulsion;
            let step = if denom.norm() > 1e-12 { newton / denom } else { newton };
            xs[i] -= step;
        }
        if all_converged {
            polish(coeffs, &mut xs, tol);
            return Ok(xs);
        }
    }
    // Final residual check: the loop above may exit unconverged even
    // though polishing would fix it, so give Newton a last chance.
    polish(coeffs, &mut xs, tol);
    let ok = xs.iter().all(|&x| {
        let (p, _, scale) = eval(coeffs, x);
        p.norm() <= tol * scale.max(f64::MIN_POSITIVE)
    });
    if ok {
        Ok(xs)
    } else {
        Err(Error::RootsDiverged {
            iterations: MAX_ITERATIONS,
            best: xs,
        })
    }
}

fn polish(coeffs: &[Complex64], xs: &mut [Complex64], tol: f64) {
    for x in xs.iter_mut() {
        for _ in 0..3 {
            let (p, dp, scale) = eval(coeffs, *x);
            if p.norm() <= 0.01 * tol * scale || dp.norm_sqr() == 0.0 {
                break;
            }
            *x -= p / dp;
        }
    }
}

/// Numerically stable quadratic formula for `a0 + a1 w + a2 w^2`.
fn quadratic(a0: Complex64, a1: Complex64, a2: Complex64) -> Vec<Complex64> {
    let disc = (a1 * a1 - 4.0 * a2 * a0).sqrt();
    // Pick the sign that avoids cancellation in -a1 -+ disc.
    let q = if (a1 + disc).norm() >= (a1 - disc).norm() {
        -0.5 * (a1 + disc)
    } else {
        -0.5 * (a1 - disc)
    };
    if q.norm_sqr() == 0.0 {
        return vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
    }
    vec![q / a2, a0 / q]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted_by_re(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn quadratic_real_and_imaginary() {
        let roots = sorted_by_re(
            solve_univariate_roots(&[c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], 1e-10).unwrap(),
        );
        assert!((roots[0] - c(-1.0, 0.0)).norm() < 1e-12);
        assert!((roots[1] - c(1.0, 0.0)).norm() < 1e-12);

        let roots = solve_univariate_roots(&[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], 1e-10).unwrap();
        let mut mags: Vec<f64> = roots.iter().map(|r| (r.norm() - 1.0).abs()).collect();
        mags.sort_by(f64::total_cmp);
        assert!(mags[1] < 1e-12);
        assert!(roots.iter().any(|r| (r - c(0.0, 1.0)).norm() < 1e-12));
        assert!(roots.iter().any(|r| (r - c(0.0, -1.0)).norm() < 1e-12));
    }

    #[test]
    fn trailing_zeros_become_origin_roots() {
        // w^3 - w^2 = w^2 (w - 1)
        let roots = solve_univariate_roots(
            &[c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)],
            1e-10,
        )
        .unwrap();
        assert_eq!(roots.len(), 3);
        assert_eq!(roots.iter().filter(|r| r.norm() == 0.0).count(), 2);
        assert!(roots.iter().any(|r| (r - c(1.0, 0.0)).norm() < 1e-10));
    }

    #[test]
    fn degree_zero_is_an_error() {
        assert!(solve_univariate_roots(&[c(1.0, 0.0)], 1e-10).is_err());
        assert!(solve_univariate_roots(&[c(0.0, 0.0)], 1e-10).is_err());
    }

    /// Reconstruction oracle: multiplying out (w - r_i) must reproduce the
    /// input coefficients.
    #[test]
    fn random_degree_six_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..40 {
            let coeffs: Vec<Complex64> = (0..7)
                .map(|_| c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
                .collect();
            if coeffs[6].norm() < 0.05 {
                continue;
            }
            let roots = solve_univariate_roots(&coeffs, 1e-10).unwrap();
            assert_eq!(roots.len(), 6);
            let mut rebuilt = vec![coeffs[6]];
            for &r in &roots {
                let mut next = vec![Complex64::new(0.0, 0.0); rebuilt.len() + 1];
                for (k, &v) in rebuilt.iter().enumerate() {
                    next[k + 1] += v;
                    next[k] -= r * v;
                }
                rebuilt = next;
            }
            let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
            for (got, want) in rebuilt.iter().zip(&coeffs) {
                assert!(
                    (got - want).norm() <= 1e-7 * scale,
                    "reconstruction drift: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn high_multiplicity_cluster_still_verifies() {
        // (w - 1)^3 stresses the convergence criterion near a triple root.
        let coeffs = [c(-1.0, 0.0), c(3.0, 0.0), c(-3.0, 0.0), c(1.0, 0.0)];
        let roots = solve_univariate_roots(&coeffs, 1e-8).unwrap();
        for r in roots {
            assert!((r - c(1.0, 0.0)).norm() < 1e-2);
        }
    }
}
