//! Lopsidedness tests, cyclic-resultant expansion, and membership in the
//! lopsided amoeba.
//!
//! A list of positive numbers is *lopsided* when one entry strictly
//! exceeds the sum of all the others. At a Log-plane point `x` the
//! monomials of `P` produce such a list `P{x}`; the lopsided amoeba
//! `LA_P` is the set of `x` where `P{x}` is *not* lopsided, and always
//! contains the amoeba itself. Replacing `P` by the phase product
//!
//! ```text
//! P~_n(z, w) = prod_{k1, k2 = 0..n-1} P(e^{2 pi i k1 / n} z, e^{2 pi i k2 / n} w)
//! ```
//!
//! gives a family `LA_{P~_n}` that shrinks onto the amoeba as `n` grows.

use num_complex::Complex64;

use crate::poly::NewtonPolynomial;
use crate::{Error, Result};

/// Monomial magnitudes `|c| e^(i x1 + j x2)` at a Log-plane point, in
/// lexicographic `(i, j)` term order.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnitudeList {
    pub values: Vec<f64>,
}

impl MagnitudeList {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("empty magnitude list".into()));
        }
        if values.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::InvalidInput(
                "magnitude list entries must be positive".into(),
            ));
        }
        Ok(Self { values })
    }

    /// True when the largest entry strictly exceeds the sum of the rest.
    /// A singleton list is lopsided by convention (empty remainder).
    pub fn is_lopsided(&self) -> bool {
        let max = self.values.iter().copied().fold(f64::MIN, f64::max);
        let rest: f64 = self.values.iter().sum::<f64>() - max;
        max > rest
    }
}

/// Magnitude list of `P` at `x = (x1, x2)`: entry `|c| exp(i x1 + j x2)`
/// per term, ordered lexicographically by exponent.
pub fn magnitudes_at(p: &NewtonPolynomial, x: (f64, f64)) -> MagnitudeList {
    let values = p
        .terms()
        .map(|(e, c)| c.norm() * (e.i as f64 * x.0 + e.j as f64 * x.1).exp())
        .collect();
    // Coefficients are nonzero by the polynomial invariant, so every
    // entry is positive and the constructor cannot fail.
    MagnitudeList::new(values).expect("nonzero coefficients")
}

/// One-call lopsidedness test of `P` at `x`.
pub fn is_lopsided_at(p: &NewtonPolynomial, x: (f64, f64)) -> bool {
    magnitudes_at(p, x).is_lopsided()
}

/// Controls for the cyclic-resultant expansion.
#[derive(Debug, Clone, Copy)]
pub struct CyclicOptions {
    /// Largest accepted `n`.
    pub max_n: u32,
    /// Coefficients below `prune_rel` times the largest magnitude are
    /// treated as cancellation residue and removed.
    pub prune_rel: f64,
}

impl Default for CyclicOptions {
    fn default() -> Self {
        Self {
            max_n: 4,
            prune_rel: 1e-9,
        }
    }
}

/// The expanded phase product `P~_n` together with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicResultant {
    pub base: NewtonPolynomial,
    pub n: u32,
    pub expanded: NewtonPolynomial,
}

impl CyclicResultant {
    /// Membership of `x` in `LA_{P~_n}`: true iff the magnitude list of
    /// the expansion is not lopsided there.
    pub fn membership(&self, x: (f64, f64)) -> bool {
        !is_lopsided_at(&self.expanded, x)
    }
}

/// Expands `P~_n` by balanced-tree multiplication of the `n^2` rotated
/// factors, pruning cancellation dust afterwards. `n = 1` returns the
/// polynomial unchanged.
pub fn cyclic_resultant(p: &NewtonPolynomial, n: u32) -> Result<CyclicResultant> {
    cyclic_resultant_with(p, n, CyclicOptions::default())
}

pub fn cyclic_resultant_with(
    p: &NewtonPolynomial,
    n: u32,
    opts: CyclicOptions,
) -> Result<CyclicResultant> {
    if n < 1 || n > opts.max_n {
        return Err(Error::Range {
            what: "cyclic resultant level n",
            detail: format!("n = {n}, allowed 1..={}", opts.max_n),
        });
    }
    if n == 1 {
        return Ok(CyclicResultant {
            base: p.clone(),
            n,
            expanded: p.clone(),
        });
    }
    // Real inputs expand exactly in cyclotomic integer arithmetic, which
    // preserves coefficients across the enormous dynamic range the n^2
    // phase product creates. Complex inputs take the float path below.
    if let Some(expanded) = crate::exact::exact_cyclic_resultant(p, n) {
        return Ok(CyclicResultant {
            base: p.clone(),
            n,
            expanded,
        });
    }
    let mut factors: Vec<NewtonPolynomial> = Vec::with_capacity((n * n) as usize);
    for k1 in 0..n {
        for k2 in 0..n {
            factors.push(phase_rotated(p, n, k1, k2));
        }
    }
    // Balanced pairwise products keep intermediate supports close to
    // their final size instead of growing linearly with factor count.
    while factors.len() > 1 {
        let mut next = Vec::with_capacity(factors.len() / 2 + 1);
        let mut iter = factors.chunks(2);
        for pair in &mut iter {
            match pair {
                [a, b] => next.push(a * b),
                [a] => next.push(a.clone()),
                _ => unreachable!(),
            }
        }
        factors = next;
    }
    let expanded = factors.pop().unwrap().pruned(opts.prune_rel);
    Ok(CyclicResultant {
        base: p.clone(),
        n,
        expanded,
    })
}

/// `P(e^(2 pi i k1/n) z, e^(2 pi i k2/n) w)`: same support, coefficients
/// rotated by `omega^(i k1 + j k2)`.
fn phase_rotated(p: &NewtonPolynomial, n: u32, k1: u32, k2: u32) -> NewtonPolynomial {
    let step = 2.0 * std::f64::consts::PI / n as f64;
    let terms = p.terms().map(|(e, c)| {
        let angle = step * ((e.i * k1 as i64 + e.j * k2 as i64) as f64);
        (e, c * Complex64::from_polar(1.0, angle))
    });
    NewtonPolynomial::new(terms).expect("rotation preserves magnitudes")
}

/// Membership of `x` in `LA_{P~_n}`.
///
/// Grid scans should expand once via [`cyclic_resultant`] and reuse
/// [`CyclicResultant::membership`]; this helper re-expands per call.
pub fn lopsided_membership(p: &NewtonPolynomial, n: u32, x: (f64, f64)) -> Result<bool> {
    Ok(cyclic_resultant(p, n)?.membership(x))
}

/// Guaranteed-lopsidedness radius at level `n`:
/// `eps = (ln n + ln(8 c)) / n` with `c` the larger per-axis vertex
/// extent of the Newton polytope. Points farther than `eps` from the
/// amoeba have a lopsided `P~_n` list.
pub fn approximation_epsilon(p: &NewtonPolynomial, n: u32) -> f64 {
    let (ei, ej) = p.newton_polytope().axis_extents();
    let c = ei.max(ej) as f64;
    ((n as f64).ln() + (8.0 * c).ln()) / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::ExponentPair;
    use crate::presets::Preset;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f0(coeffs: [f64; 5]) -> NewtonPolynomial {
        Preset::F0.polynomial_real(&coeffs).unwrap()
    }

    #[test]
    fn lopsided_examples() {
        assert!(MagnitudeList::new(vec![10.0, 1.0, 2.0, 3.0]).unwrap().is_lopsided());
        // Boundary case is strict: 2 is not greater than 1 + 1.
        assert!(!MagnitudeList::new(vec![2.0, 1.0, 1.0]).unwrap().is_lopsided());
        assert!(MagnitudeList::new(vec![5.0]).unwrap().is_lopsided());
        assert!(MagnitudeList::new(vec![]).is_err());
        assert!(MagnitudeList::new(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn magnitudes_at_origin_and_spine() {
        let p = f0([1.0, 1.0, 1.0, 1.0, 5.0]);
        let m = magnitudes_at(&p, (0.0, 0.0));
        let mut vals = m.values.clone();
        vals.sort_by(f64::total_cmp);
        assert_eq!(vals, vec![1.0, 1.0, 1.0, 1.0, 5.0]);

        let line = NewtonPolynomial::from_real([
            ((1i64, 0i64), 1.0),
            ((0, 1), 1.0),
            ((0, 0), 1.0),
        ])
        .unwrap();
        let m = magnitudes_at(&line, (10.0, 0.0));
        let mut vals = m.values.clone();
        vals.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(vals[2], 10f64.exp(), epsilon = 1e-6);
        assert_eq!(&vals[..2], &[1.0, 1.0]);
    }

    #[test]
    fn magnitudes_match_per_term_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let terms: Vec<_> = (0..6)
                .map(|_| {
                    (
                        (rng.gen_range(-3i64..=3), rng.gen_range(-3i64..=3)),
                        Complex64::new(rng.gen_range(0.1..2.0), rng.gen_range(-1.0..1.0)),
                    )
                })
                .collect();
            let p = NewtonPolynomial::new(terms).unwrap();
            let x = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let m = magnitudes_at(&p, x);
            for ((e, c), &got) in p.terms().zip(&m.values) {
                let single = NewtonPolynomial::new([(e, c)]).unwrap();
                let z = Complex64::new(x.0.exp(), 0.0);
                let w = Complex64::new(x.1.exp(), 0.0);
                let want = single.evaluate(z, w).unwrap().norm();
                assert!((got - want).abs() <= 1e-10 * want.max(1.0));
            }
        }
    }

    #[test]
    fn cyclic_n1_is_identity() {
        let p = f0([1.0, 1.0, 1.0, 1.0, 5.0]);
        let r = cyclic_resultant(&p, 1).unwrap();
        assert_eq!(r.expanded, p);
    }

    #[test]
    fn cyclic_rejects_out_of_range() {
        let p = f0([1.0; 5]);
        assert!(cyclic_resultant(&p, 0).is_err());
        assert!(cyclic_resultant(&p, 5).is_err());
        assert!(cyclic_resultant_with(&p, 6, CyclicOptions { max_n: 8, ..Default::default() }).is_ok());
    }

    /// The n=2 expansion of the cleared-denominator F0 polynomial has the
    /// 13-term support `(2Z)^2` inside the dilated polytope, with e.g.
    /// coefficient `c2^4` on `w^8 z^4` and `-2 c1^2 c2^2` on `w^6 z^6`.
    #[test]
    fn cyclic_f0_shifted_n2_spot_coefficients() {
        let (c1, c2, c3, c4, c5) = (1.3, -0.7, 2.1, 0.9, -1.8);
        let p = NewtonPolynomial::from_real([
            ((2i64, 1i64), c1),
            ((1, 2), c2),
            ((0, 1), c3),
            ((1, 0), c4),
            ((1, 1), c5),
        ])
        .unwrap();
        let r = cyclic_resultant(&p, 2).unwrap();
        assert_eq!(r.expanded.term_count(), 13);
        for (e, _) in r.expanded.terms() {
            assert!(e.i % 2 == 0 && e.j % 2 == 0, "support off the (2Z)^2 lattice: {e:?}");
        }
        let coeff = r.expanded.coefficient(ExponentPair::new(4, 8));
        assert_abs_diff_eq!(coeff.re, c2.powi(4), epsilon = 1e-9 * c2.powi(4).abs());
        let coeff = r.expanded.coefficient(ExponentPair::new(6, 6));
        let want = -2.0 * c1 * c1 * c2 * c2;
        assert!((coeff.re - want).abs() <= 1e-9 * want.abs());
    }

    #[test]
    fn cyclic_matches_direct_phase_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [2u32, 3] {
            for _ in 0..5 {
                let terms: Vec<_> = (0..5)
                    .map(|_| {
                        (
                            (rng.gen_range(-2i64..=2), rng.gen_range(-2i64..=2)),
                            Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
                        )
                    })
                    .collect();
                let p = match NewtonPolynomial::new(terms) {
                    Ok(p) => p,
                    Err(_) => continue,
                };
                let r = cyclic_resultant(&p, n).unwrap();
                for _ in 0..4 {
                    let z = Complex64::from_polar(rng.gen_range(0.5..1.5), rng.gen_range(0.0..6.28));
                    let w = Complex64::from_polar(rng.gen_range(0.5..1.5), rng.gen_range(0.0..6.28));
                    let got = r.expanded.evaluate(z, w).unwrap();
                    let mut want = Complex64::new(1.0, 0.0);
                    for k1 in 0..n {
                        for k2 in 0..n {
                            let step = 2.0 * std::f64::consts::PI / n as f64;
                            let rz = z * Complex64::from_polar(1.0, step * k1 as f64);
                            let rw = w * Complex64::from_polar(1.0, step * k2 as f64);
                            want *= p.evaluate(rz, rw).unwrap();
                        }
                    }
                    assert!(
                        (got - want).norm() <= 1e-8 * want.norm().max(1e-8),
                        "n={n}: {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn membership_examples() {
        // Coefficient 5 exceeds the sum 4 at the centre: hole point.
        let p = f0([1.0, 1.0, 1.0, 1.0, 5.0]);
        assert!(!lopsided_membership(&p, 1, (0.0, 0.0)).unwrap());
        let p = f0([1.0, 1.0, 1.0, 1.0, 3.0]);
        assert!(lopsided_membership(&p, 1, (0.0, 0.0)).unwrap());
        let line = NewtonPolynomial::from_real([
            ((1i64, 0i64), 1.0),
            ((0, 1), 1.0),
            ((0, 0), 1.0),
        ])
        .unwrap();
        assert!(lopsided_membership(&line, 1, (0.0, 0.0)).unwrap());
    }

    #[test]
    fn scaling_leaves_lopsidedness_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = f0([1.0, 2.0, 0.5, 1.5, 4.0]);
        let scaled = NewtonPolynomial::new(
            p.terms().map(|(e, c)| (e, c * Complex64::new(-3.7, 1.2))),
        )
        .unwrap();
        for _ in 0..50 {
            let x = (rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
            assert_eq!(is_lopsided_at(&p, x), is_lopsided_at(&scaled, x));
        }
    }

    #[test]
    fn epsilon_bound_arithmetic() {
        let p = f0([1.0; 5]);
        assert_abs_diff_eq!(
            approximation_epsilon(&p, 16),
            (16f64.ln() + 16f64.ln()) / 16.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(approximation_epsilon(&p, 1), 16f64.ln(), epsilon = 1e-12);
        let line = NewtonPolynomial::from_real([
            ((1i64, 0i64), 1.0),
            ((0, 1), 1.0),
            ((0, 0), 1.0),
        ])
        .unwrap();
        assert_abs_diff_eq!(approximation_epsilon(&line, 1), 8f64.ln(), epsilon = 1e-12);
    }
}
