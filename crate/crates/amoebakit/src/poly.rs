//! Sparse bivariate Laurent polynomials, their Newton polytopes, and
//! amoeba-space transformations.
//!
//! A [`NewtonPolynomial`] is a finite map from exponent pairs `(i, j)` to
//! nonzero complex coefficients, representing `P(z, w) = sum c_ij z^i w^j`
//! on `(C*)^2`. The Newton polytope is the convex hull of the support;
//! its strictly interior lattice points bound the genus of the amoeba.

use std::collections::BTreeMap;
use std::ops::{Add, Mul};

use num_complex::Complex64;

use crate::{Error, Result};

/// A monomial exponent `(i, j)` for `z^i w^j`. Negative entries are
/// ordinary Laurent exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExponentPair {
    pub i: i64,
    pub j: i64,
}

impl ExponentPair {
    pub const fn new(i: i64, j: i64) -> Self {
        Self { i, j }
    }
}

impl From<(i64, i64)> for ExponentPair {
    fn from((i, j): (i64, i64)) -> Self {
        Self { i, j }
    }
}

/// Sparse Laurent polynomial `P(z, w)` with complex coefficients.
///
/// Invariants: at least one term, and no stored coefficient has magnitude
/// exactly zero. Terms iterate in lexicographic `(i, j)` order, which is
/// the canonical ordering used by magnitude lists.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonPolynomial {
    terms: BTreeMap<ExponentPair, Complex64>,
}

impl NewtonPolynomial {
    /// Builds a polynomial from `(exponent, coefficient)` pairs. Repeated
    /// exponents accumulate additively; exact-zero coefficients are
    /// dropped. Errors if nothing survives.
    pub fn new<E, I>(terms: I) -> Result<Self>
    where
        E: Into<ExponentPair>,
        I: IntoIterator<Item = (E, Complex64)>,
    {
        let mut map: BTreeMap<ExponentPair, Complex64> = BTreeMap::new();
        for (e, c) in terms {
            let e = e.into();
            let entry = map.entry(e).or_insert(Complex64::new(0.0, 0.0));
            *entry += c;
        }
        map.retain(|_, c| c.norm_sqr() != 0.0);
        if map.is_empty() {
            return Err(Error::InvalidPolynomial(
                "no terms with nonzero coefficient".into(),
            ));
        }
        Ok(Self { terms: map })
    }

    /// Convenience constructor from real coefficients.
    pub fn from_real<E, I>(terms: I) -> Result<Self>
    where
        E: Into<ExponentPair>,
        I: IntoIterator<Item = (E, f64)>,
    {
        Self::new(terms.into_iter().map(|(e, c)| (e, Complex64::new(c, 0.0))))
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Terms in lexicographic `(i, j)` order.
    pub fn terms(&self) -> impl Iterator<Item = (ExponentPair, Complex64)> + '_ {
        self.terms.iter().map(|(&e, &c)| (e, c))
    }

    pub fn support(&self) -> Vec<ExponentPair> {
        self.terms.keys().copied().collect()
    }

    pub fn coefficient(&self, e: ExponentPair) -> Complex64 {
        self.terms.get(&e).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Largest coefficient magnitude.
    pub fn max_coeff_magnitude(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Drops terms whose magnitude falls below `rel` times the largest
    /// coefficient magnitude. Used to clear numerical dust after products.
    pub fn pruned(&self, rel: f64) -> Self {
        let cutoff = rel * self.max_coeff_magnitude();
        let terms: BTreeMap<_, _> = self
            .terms
            .iter()
            .filter(|(_, c)| c.norm() >= cutoff)
            .map(|(&e, &c)| (e, c))
            .collect();
        // A positive cutoff always keeps the max-magnitude term.
        Self { terms }
    }

    /// Evaluates `P(z, w)` by direct summation over the support.
    ///
    /// `z = 0` or `w = 0` is rejected when a negative exponent needs it.
    pub fn evaluate(&self, z: Complex64, w: Complex64) -> Result<Complex64> {
        let z_zero = z.norm_sqr() == 0.0;
        let w_zero = w.norm_sqr() == 0.0;
        if z_zero && self.terms.keys().any(|e| e.i < 0) {
            return Err(Error::Domain("z = 0 with a negative z-exponent".into()));
        }
        if w_zero && self.terms.keys().any(|e| e.j < 0) {
            return Err(Error::Domain("w = 0 with a negative w-exponent".into()));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (&e, &c) in &self.terms {
            acc += c * powi(z, e.i) * powi(w, e.j);
        }
        Ok(acc)
    }

    /// The Newton polytope of the support.
    pub fn newton_polytope(&self) -> Polytope {
        Polytope::of_points(&self.support())
    }

    /// Number of interior lattice points of the Newton polytope; the
    /// maximal genus any amoeba of this support can exhibit.
    pub fn max_genus(&self) -> usize {
        self.newton_polytope().interior_points.len()
    }

    /// Applies `P(z, w) -> P(a1 z^m11 w^m21, a2 z^m12 w^m22)`. The support
    /// maps by `p -> M p` and each coefficient picks up `a1^i a2^j`.
    pub fn transform(&self, t: &UnimodularTransform) -> Result<Self> {
        t.validate()?;
        let mut terms = BTreeMap::new();
        for (&e, &c) in &self.terms {
            let mapped = t.map_exponent(e);
            let scale = powi(t.alpha.0, e.i) * powi(t.alpha.1, e.j);
            let entry = terms.entry(mapped).or_insert(Complex64::new(0.0, 0.0));
            *entry += c * scale;
        }
        terms.retain(|_, c: &mut Complex64| c.norm_sqr() != 0.0);
        if terms.is_empty() {
            return Err(Error::InvalidPolynomial(
                "transform cancelled every term".into(),
            ));
        }
        Ok(Self { terms })
    }

    /// Extracts the univariate polynomial in `w` obtained by fixing `z`,
    /// as ascending coefficients after clearing the lowest `w`-power.
    /// Returns `None` when `P` does not depend on `w`.
    pub fn coeffs_in_w(&self, z: Complex64) -> Option<Vec<Complex64>> {
        let jmin = self.terms.keys().map(|e| e.j).min().unwrap();
        let jmax = self.terms.keys().map(|e| e.j).max().unwrap();
        if jmin == jmax {
            return None;
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); (jmax - jmin + 1) as usize];
        for (&e, &c) in &self.terms {
            coeffs[(e.j - jmin) as usize] += c * powi(z, e.i);
        }
        Some(coeffs)
    }

    /// Same as [`coeffs_in_w`](Self::coeffs_in_w) with the variable roles swapped.
    pub fn coeffs_in_z(&self, w: Complex64) -> Option<Vec<Complex64>> {
        self.swap_vars().coeffs_in_w(w)
    }

    /// `P(w, z)`: exchanges the two variables.
    pub fn swap_vars(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(&e, &c)| (ExponentPair::new(e.j, e.i), c))
            .collect();
        Self { terms }
    }
}

impl Mul for &NewtonPolynomial {
    type Output = NewtonPolynomial;

    fn mul(self, rhs: &NewtonPolynomial) -> NewtonPolynomial {
        let mut terms: BTreeMap<ExponentPair, Complex64> = BTreeMap::new();
        for (&a, &ca) in &self.terms {
            for (&b, &cb) in &rhs.terms {
                let e = ExponentPair::new(a.i + b.i, a.j + b.j);
                *terms.entry(e).or_insert(Complex64::new(0.0, 0.0)) += ca * cb;
            }
        }
        terms.retain(|_, c| c.norm_sqr() != 0.0);
        NewtonPolynomial { terms }
    }
}

impl Add for &NewtonPolynomial {
    type Output = NewtonPolynomial;

    fn add(self, rhs: &NewtonPolynomial) -> NewtonPolynomial {
        let mut terms = self.terms.clone();
        for (&e, &c) in &rhs.terms {
            *terms.entry(e).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        terms.retain(|_, c| c.norm_sqr() != 0.0);
        NewtonPolynomial { terms }
    }
}

/// Integer power of a complex number, handling negative exponents.
pub(crate) fn powi(base: Complex64, exp: i64) -> Complex64 {
    if exp == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if exp < 0 {
        return powi(base, -exp).inv();
    }
    let mut acc = Complex64::new(1.0, 0.0);
    let mut b = base;
    let mut e = exp as u64;
    while e > 0 {
        if e & 1 == 1 {
            acc *= b;
        }
        b *= b;
        e >>= 1;
    }
    acc
}

/// The coordinate-wise log-modulus map `(z, w) -> (ln|z|, ln|w|)`.
pub fn log_map(z: Complex64, w: Complex64) -> Result<(f64, f64)> {
    if z.norm_sqr() == 0.0 || w.norm_sqr() == 0.0 {
        return Err(Error::Domain("log map undefined at zero".into()));
    }
    Ok((z.norm().ln(), w.norm().ln()))
}

/// Convex lattice polygon data for a polynomial support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polytope {
    /// Hull vertices, counter-clockwise, no collinear points. A single
    /// point or a segment is kept as-is (degenerate hull).
    pub vertices: Vec<ExponentPair>,
    /// All lattice points of the hull, boundary included.
    pub lattice_points: Vec<ExponentPair>,
    /// Lattice points strictly inside the hull.
    pub interior_points: Vec<ExponentPair>,
}

impl Polytope {
    pub fn of_points(points: &[ExponentPair]) -> Self {
        let vertices = convex_hull(points);
        let (lattice_points, interior_points) = lattice_scan(&vertices);
        Self {
            vertices,
            lattice_points,
            interior_points,
        }
    }

    /// Per-axis vertex extents `(max_i - min_i, max_j - min_j)`.
    pub fn axis_extents(&self) -> (i64, i64) {
        let (mut i_min, mut i_max) = (i64::MAX, i64::MIN);
        let (mut j_min, mut j_max) = (i64::MAX, i64::MIN);
        for v in &self.vertices {
            i_min = i_min.min(v.i);
            i_max = i_max.max(v.i);
            j_min = j_min.min(v.j);
            j_max = j_max.max(v.j);
        }
        (i_max - i_min, j_max - j_min)
    }
}

fn cross(o: ExponentPair, a: ExponentPair, b: ExponentPair) -> i64 {
    (a.i - o.i) * (b.j - o.j) - (a.j - o.j) * (b.i - o.i)
}

/// Monotone-chain convex hull. Returns CCW vertices with strictly convex
/// turns; handles the degenerate single-point and collinear cases.
fn convex_hull(points: &[ExponentPair]) -> Vec<ExponentPair> {
    let mut pts: Vec<ExponentPair> = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<ExponentPair> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<ExponentPair> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 3 {
        // All points collinear: keep the two extreme endpoints.
        let mut seg = vec![pts[0], pts[pts.len() - 1]];
        seg.dedup();
        return seg;
    }
    lower
}

/// Classifies `p` against a CCW strictly-convex polygon.
/// Returns `Some(true)` strictly inside, `Some(false)` on the boundary,
/// `None` outside.
fn classify_point(hull: &[ExponentPair], p: ExponentPair) -> Option<bool> {
    match hull.len() {
        0 => None,
        1 => (hull[0] == p).then_some(false),
        2 => {
            let (a, b) = (hull[0], hull[1]);
            if cross(a, b, p) != 0 {
                return None;
            }
            let within = p.i >= a.i.min(b.i)
                && p.i <= a.i.max(b.i)
                && p.j >= a.j.min(b.j)
                && p.j <= a.j.max(b.j);
            within.then_some(false)
        }
        n => {
            let mut on_boundary = false;
            for k in 0..n {
                let c = cross(hull[k], hull[(k + 1) % n], p);
                if c < 0 {
                    return None;
                }
                if c == 0 {
                    on_boundary = true;
                }
            }
            Some(!on_boundary)
        }
    }
}

fn lattice_scan(hull: &[ExponentPair]) -> (Vec<ExponentPair>, Vec<ExponentPair>) {
    if hull.is_empty() {
        return (Vec::new(), Vec::new());
    }
    let (i_min, i_max) = hull
        .iter()
        .fold((i64::MAX, i64::MIN), |(lo, hi), v| (lo.min(v.i), hi.max(v.i)));
    let (j_min, j_max) = hull
        .iter()
        .fold((i64::MAX, i64::MIN), |(lo, hi), v| (lo.min(v.j), hi.max(v.j)));
    let mut lattice = Vec::new();
    let mut interior = Vec::new();
    for i in i_min..=i_max {
        for j in j_min..=j_max {
            let p = ExponentPair::new(i, j);
            match classify_point(hull, p) {
                Some(true) => {
                    lattice.push(p);
                    interior.push(p);
                }
                Some(false) => lattice.push(p),
                None => {}
            }
        }
    }
    (lattice, interior)
}

/// A monomial change of variables `(alpha, M)` acting as
/// `P(z, w) -> P(a1 z^m11 w^m21, a2 z^m12 w^m22)`.
///
/// Supports map by `p -> M p`, and amoeba points of the transformed
/// polynomial pull back to the original amoeba via
/// [`map_log_point`](Self::map_log_point).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnimodularTransform {
    /// Row-major integer matrix `[[m11, m12], [m21, m22]]`.
    pub m: [[i64; 2]; 2],
    /// Nonzero complex scalings for the two variables.
    pub alpha: (Complex64, Complex64),
}

impl UnimodularTransform {
    pub fn new(m: [[i64; 2]; 2], alpha: (Complex64, Complex64)) -> Result<Self> {
        let t = Self { m, alpha };
        t.validate()?;
        Ok(t)
    }

    /// Pure lattice transform with trivial scalings.
    pub fn from_matrix(m: [[i64; 2]; 2]) -> Result<Self> {
        Self::new(m, (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)))
    }

    pub fn det(&self) -> i64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    fn validate(&self) -> Result<()> {
        if self.det() == 0 {
            return Err(Error::InvalidTransform("matrix is singular".into()));
        }
        if self.alpha.0.norm_sqr() == 0.0 || self.alpha.1.norm_sqr() == 0.0 {
            return Err(Error::InvalidTransform("alpha component is zero".into()));
        }
        Ok(())
    }

    pub fn map_exponent(&self, e: ExponentPair) -> ExponentPair {
        ExponentPair::new(
            self.m[0][0] * e.i + self.m[0][1] * e.j,
            self.m[1][0] * e.i + self.m[1][1] * e.j,
        )
    }

    /// Pulls an amoeba point of the transformed polynomial back to the
    /// amoeba of the original: `x -> M^T x + Log|alpha|`.
    ///
    /// If `Psi(P)(z, w) = P(a1 z^m11 w^m21, a2 z^m12 w^m22)` vanishes at
    /// `(z, w)`, then `P` vanishes at the substituted pair, whose
    /// log-moduli are exactly this affine image of `(ln|z|, ln|w|)`.
    pub fn map_log_point(&self, x: (f64, f64)) -> (f64, f64) {
        (
            self.m[0][0] as f64 * x.0 + self.m[1][0] as f64 * x.1 + self.alpha.0.norm().ln(),
            self.m[0][1] as f64 * x.0 + self.m[1][1] as f64 * x.1 + self.alpha.1.norm().ln(),
        )
    }
}
