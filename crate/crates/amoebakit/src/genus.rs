//! Genus deciders: closed forms for the square and `L^{3,3,2}` polygons,
//! exact torus-scan membership for the amoeba itself, and a generic
//! grid-scan counter for everything else.
//!
//! The genus of an amoeba is the number of bounded components of its
//! complement. For the lopsided approximation at `n = 1`, each interior
//! lattice point of the Newton polytope contributes a hole exactly when
//! its coefficient magnitude beats the minimized sum of the others;
//! for the square that condition collapses to a single inequality,
//! for `L^{3,3,2}` it needs a pair of cubics.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::lopsided::cyclic_resultant;
use crate::poly::NewtonPolynomial;
use crate::roots::solve_univariate_roots;
use crate::{Error, Result, Window};

/// Which approximation labels grid cells: the lopsided amoeba of the
/// level-`n` cyclic resultant, or the amoeba itself via torus scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Finite(u32),
    Infinity,
}

impl std::fmt::Display for Level {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Level::Finite(n) => write!(f, "{n}"),
            Level::Infinity => write!(f, "inf"),
        }
    }
}

/// Genus `1` iff `|c5| > 2 sqrt|c1 c3| + 2 sqrt|c2 c4|`, the closed-form
/// hole condition for `c1 z + c2 w + c3/z + c4/w + c5`.
pub fn genus_f0(c: &[Complex64; 5]) -> Result<u8> {
    check_nonzero(&c[..4])?;
    Ok(u8::from(c[4].norm() > f0_threshold(c)))
}

/// The right-hand side of the hole condition.
pub fn f0_threshold(c: &[Complex64; 5]) -> f64 {
    2.0 * (c[0].norm() * c[2].norm()).sqrt() + 2.0 * (c[1].norm() * c[3].norm()).sqrt()
}

/// Hole centre `(ln|c3/c1| / 2, ln|c4/c2| / 2)`: the point where the sum
/// of the four boundary monomial magnitudes is minimal.
pub fn centre_point_f0(c: &[Complex64; 5]) -> Result<(f64, f64)> {
    check_nonzero(&c[..4])?;
    Ok((
        0.5 * (c[2].norm() / c[0].norm()).ln(),
        0.5 * (c[3].norm() / c[1].norm()).ln(),
    ))
}

fn check_nonzero(cs: &[Complex64]) -> Result<()> {
    if cs.iter().any(|c| c.norm_sqr() == 0.0) {
        return Err(Error::Degenerate(
            "boundary coefficients must be nonzero".into(),
        ));
    }
    Ok(())
}

/// A solved depressed cubic alongside the positive root of the original.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicSolution {
    /// Depressed-form linear coefficient.
    pub p: f64,
    /// Depressed-form constant.
    pub q: f64,
    /// `(q/2)^2 + (p/3)^3`.
    pub discriminant: f64,
    /// Smallest positive real root of the original cubic, refined to a
    /// relative residual below 1e-12.
    pub positive_root: f64,
}

/// Solves `a3 t^3 + a2 t^2 + a1 t + a0 = 0` for its smallest positive
/// real root via Cardano with discriminant branching, then a short
/// bisection/Newton refinement.
pub fn solve_cubic_positive_root(a3: f64, a2: f64, a1: f64, a0: f64) -> Result<CubicSolution> {
    if a3 == 0.0 {
        return Err(Error::InvalidInput("leading cubic coefficient is zero".into()));
    }
    let shift = a2 / (3.0 * a3);
    let p = (3.0 * a3 * a1 - a2 * a2) / (3.0 * a3 * a3);
    let q = (2.0 * a2.powi(3) - 9.0 * a3 * a2 * a1 + 27.0 * a3 * a3 * a0) / (27.0 * a3.powi(3));
    let disc = (q / 2.0) * (q / 2.0) + (p / 3.0).powi(3);

    let depressed_roots: Vec<f64> = if disc > 0.0 {
        let s = disc.sqrt();
        vec![(-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt()]
    } else if disc == 0.0 {
        if p == 0.0 {
            vec![0.0]
        } else {
            vec![3.0 * q / p, -3.0 * q / (2.0 * p)]
        }
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt();
        let phi = arg.clamp(-1.0, 1.0).acos() / 3.0;
        (0..3)
            .map(|k| m * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())
            .collect()
    };

    let mut best: Option<f64> = None;
    for t in depressed_roots {
        let root = refine_cubic_root(a3, a2, a1, a0, t - shift);
        if root > 0.0 {
            best = Some(match best {
                Some(b) => b.min(root),
                None => root,
            });
        }
    }
    match best {
        Some(positive_root) => Ok(CubicSolution {
            p,
            q,
            discriminant: disc,
            positive_root,
        }),
        None => Err(Error::NoPositiveRoot),
    }
}

fn cubic_eval(a3: f64, a2: f64, a1: f64, a0: f64, t: f64) -> (f64, f64, f64) {
    let f = ((a3 * t + a2) * t + a1) * t + a0;
    let df = (3.0 * a3 * t + 2.0 * a2) * t + a1;
    let scale = ((a3.abs() * t.abs() + a2.abs()) * t.abs() + a1.abs()) * t.abs() + a0.abs();
    (f, df, scale)
}

fn refine_cubic_root(a3: f64, a2: f64, a1: f64, a0: f64, mut t: f64) -> f64 {
    for _ in 0..60 {
        let (f, df, scale) = cubic_eval(a3, a2, a1, a0, t);
        if f.abs() <= 1e-13 * scale.max(f64::MIN_POSITIVE) || df == 0.0 {
            break;
        }
        let step = f / df;
        if !step.is_finite() {
            break;
        }
        t -= step;
    }
    t
}

/// Ternary genus of `c1 z + c2 w + c3/z + c4/w + c5 z^2 + c6`: counts
/// which of the two interior-point dominance conditions hold, each
/// thresholded at the minimum of the competing monomial sum.
pub fn genus_l332(c: &[Complex64; 6]) -> Result<u8> {
    let mags: Vec<f64> = c.iter().map(|ci| ci.norm()).collect();
    if mags[1] == 0.0 || mags[2] == 0.0 || mags[3] == 0.0 || mags[4] == 0.0 {
        return Err(Error::Degenerate("c2, c3, c4, c5 must be nonzero".into()));
    }
    let (m1, m2, m3, m4, m5, m6) = (mags[0], mags[1], mags[2], mags[3], mags[4], mags[5]);
    let w0 = (m4 / m2).sqrt();
    // Minimize over |z| for the c1-dominance hole: the stationary
    // condition is |c5| z^3 - (2 sqrt|c2 c4| + |c6|) z - 2 |c3| = 0.
    let z0 = solve_cubic_positive_root(m5, 0.0, -(2.0 * (m2 * m4).sqrt() + m6), -2.0 * m3)?
        .positive_root;
    let a1 = m2 * w0 / z0 + m3 / (z0 * z0) + m4 / (z0 * w0) + m5 * z0 + m6 / z0;
    // For the c6-dominance hole: 2 |c5| z^3 + |c1| z^2 - |c3| = 0.
    let z0p = solve_cubic_positive_root(2.0 * m5, m1, 0.0, -m3)?.positive_root;
    let a2 = m1 * z0p + m2 * w0 + m3 / z0p + m4 / w0 + m5 * z0p * z0p;
    Ok(u8::from(m1 > a1) + u8::from(m6 > a2))
}

/// The two thresholds `(a1, a2)` of the `L^{3,3,2}` decider; used by
/// margin filters when generating datasets.
pub fn l332_thresholds(c: &[Complex64; 6]) -> Result<(f64, f64)> {
    let mags: Vec<f64> = c.iter().map(|ci| ci.norm()).collect();
    if mags[1] == 0.0 || mags[2] == 0.0 || mags[3] == 0.0 || mags[4] == 0.0 {
        return Err(Error::Degenerate("c2, c3, c4, c5 must be nonzero".into()));
    }
    let (m1, m2, m3, m4, m5, m6) = (mags[0], mags[1], mags[2], mags[3], mags[4], mags[5]);
    let w0 = (m4 / m2).sqrt();
    let z0 = solve_cubic_positive_root(m5, 0.0, -(2.0 * (m2 * m4).sqrt() + m6), -2.0 * m3)?
        .positive_root;
    let a1 = m2 * w0 / z0 + m3 / (z0 * z0) + m4 / (z0 * w0) + m5 * z0 + m6 / z0;
    let z0p = solve_cubic_positive_root(2.0 * m5, m1, 0.0, -m3)?.positive_root;
    let a2 = m1 * z0p + m2 * w0 + m3 / z0p + m4 / w0 + m5 * z0p * z0p;
    Ok((a1, a2))
}

/// Exact amoeba membership of a Log-plane point by scanning the phase
/// torus: fix `|z| = e^(x1)`, sweep `arg z`, and ask the `w`-roots of
/// `P(z, .)` to land on the circle `|w| = e^(x2)` within `tol` relative;
/// then the same with the roles swapped.
pub fn exact_membership_torus(
    p: &NewtonPolynomial,
    x: (f64, f64),
    theta_steps: usize,
    tol: f64,
) -> Result<bool> {
    if theta_steps < 64 {
        return Err(Error::InvalidInput(format!(
            "theta_steps must be at least 64, got {theta_steps}"
        )));
    }
    if scan_one_role(p, x.0, x.1, theta_steps, tol)? {
        return Ok(true);
    }
    let swapped = p.swap_vars();
    scan_one_role(&swapped, x.1, x.0, theta_steps, tol)
}

fn scan_one_role(
    p: &NewtonPolynomial,
    s_fixed: f64,
    s_target: f64,
    theta_steps: usize,
    tol: f64,
) -> Result<bool> {
    let r_fixed = s_fixed.exp();
    let r_target = s_target.exp();
    if p.coeffs_in_w(Complex64::new(r_fixed, 0.0)).is_none() {
        return Ok(false);
    }
    // Distance of the nearest w-root to the target circle at phase theta.
    let d_at = |theta: f64| -> Result<f64> {
        let z = Complex64::from_polar(r_fixed, theta);
        let Some(coeffs) = p.coeffs_in_w(z) else {
            return Ok(f64::INFINITY);
        };
        match solve_univariate_roots(&coeffs, 1e-10) {
            Ok(roots) => Ok(roots
                .iter()
                .filter(|w| w.norm_sqr() > 0.0)
                .map(|w| (w.norm() - r_target).abs())
                .fold(f64::INFINITY, f64::min)),
            Err(Error::InvalidInput(_)) => Ok(f64::INFINITY), // degree collapsed at this phase
            Err(Error::RootsDiverged { iterations, .. }) => Err(Error::Numeric(format!(
                "root solve failed to converge after {iterations} iterations at theta = {theta:.6}"
            ))),
            Err(e) => Err(e),
        }
    };

    let threshold = tol * r_target;
    let step = 2.0 * std::f64::consts::PI / theta_steps as f64;
    let mut coarse = Vec::with_capacity(theta_steps);
    for k in 0..theta_steps {
        let d = d_at(step * k as f64)?;
        if d < threshold {
            return Ok(true);
        }
        coarse.push(d);
    }

    // Root moduli move by up to O(step) between grid phases, so a true
    // crossing can hide between samples. Refine around the local minima
    // of the coarse profile with a ternary search.
    let mut minima: Vec<usize> = (0..theta_steps)
        .filter(|&k| {
            let prev = coarse[(k + theta_steps - 1) % theta_steps];
            let next = coarse[(k + 1) % theta_steps];
            coarse[k] <= prev && coarse[k] <= next && coarse[k].is_finite()
        })
        .collect();
    minima.sort_by(|&a, &b| coarse[a].total_cmp(&coarse[b]));
    for &k in minima.iter().take(6) {
        let mut lo = step * (k as f64 - 1.0);
        let mut hi = step * (k as f64 + 1.0);
        for _ in 0..40 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            let d1 = d_at(m1)?;
            let d2 = d_at(m2)?;
            if d1.min(d2) < threshold {
                return Ok(true);
            }
            if d1 < d2 {
                hi = m2;
            } else {
                lo = m1;
            }
        }
    }
    Ok(false)
}

/// Per-cell membership of a grid over `window`, row-major with row 0 at
/// the bottom (`y = y_min`).
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipMask {
    pub window: Window,
    pub resolution: usize,
    pub cells: Vec<bool>,
}

impl MembershipMask {
    pub fn member_count(&self) -> usize {
        self.cells.iter().filter(|&&m| m).count()
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.resolution + col]
    }

    /// Member cells with at least one non-member 4-neighbor (cells on
    /// the window edge count their outside as non-member).
    pub fn boundary(&self) -> MembershipMask {
        let res = self.resolution;
        let mut cells = vec![false; res * res];
        for r in 0..res {
            for c in 0..res {
                if !self.get(r, c) {
                    continue;
                }
                let edge = r == 0 || c == 0 || r == res - 1 || c == res - 1;
                let interior_gap = [(0i64, 1i64), (0, -1), (1, 0), (-1, 0)].iter().any(|&(dr, dc)| {
                    let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                    nr >= 0
                        && nc >= 0
                        && (nr as usize) < res
                        && (nc as usize) < res
                        && !self.get(nr as usize, nc as usize)
                });
                cells[r * res + c] = edge || interior_gap;
            }
        }
        MembershipMask {
            window: self.window,
            resolution: res,
            cells,
        }
    }

    fn cell_center(&self, row: usize, col: usize) -> (f64, f64) {
        let dx = self.window.width() / self.resolution as f64;
        let dy = self.window.height() / self.resolution as f64;
        (
            self.window.x.0 + (col as f64 + 0.5) * dx,
            self.window.y.0 + (row as f64 + 0.5) * dy,
        )
    }
}

/// Defaults for the torus labeling used by `Level::Infinity`.
pub const TORUS_THETA_STEPS: usize = 512;
pub const TORUS_TOL: f64 = 1e-3;

/// Classifies every cell center of a `resolution^2` grid.
pub fn membership_mask(
    p: &NewtonPolynomial,
    level: Level,
    window: Window,
    resolution: usize,
) -> Result<MembershipMask> {
    if resolution < 2 {
        return Err(Error::InvalidInput("resolution must be at least 2".into()));
    }
    let res = resolution;
    let dx = window.width() / res as f64;
    let dy = window.height() / res as f64;
    let xs: Vec<f64> = (0..res).map(|c| window.x.0 + (c as f64 + 0.5) * dx).collect();
    let ys: Vec<f64> = (0..res).map(|r| window.y.0 + (r as f64 + 0.5) * dy).collect();

    let cells = match level {
        Level::Finite(n) => {
            let expanded = cyclic_resultant(p, n)?.expanded;
            // Separable magnitudes: |c| e^(i x) e^(j y) lets each term
            // precompute one row and one column factor table.
            let terms: Vec<(f64, i64, i64)> = expanded
                .terms()
                .map(|(e, c)| (c.norm(), e.i, e.j))
                .collect();
            let col_factors: Vec<Vec<f64>> = terms
                .iter()
                .map(|&(_, i, _)| xs.iter().map(|&x| (i as f64 * x).exp()).collect())
                .collect();
            let row_factors: Vec<Vec<f64>> = terms
                .iter()
                .map(|&(_, _, j)| ys.iter().map(|&y| (j as f64 * y).exp()).collect())
                .collect();
            let mut cells = vec![false; res * res];
            cells
                .par_chunks_mut(res)
                .enumerate()
                .for_each(|(r, row_cells)| {
                    for (c, cell) in row_cells.iter_mut().enumerate() {
                        let mut max = f64::MIN;
                        let mut sum = 0.0;
                        for (t, &(mag, _, _)) in terms.iter().enumerate() {
                            let v = mag * col_factors[t][c] * row_factors[t][r];
                            sum += v;
                            if v > max {
                                max = v;
                            }
                        }
                        // Not lopsided <=> member of LA.
                        *cell = !(max > sum - max);
                    }
                });
            cells
        }
        Level::Infinity => {
            let mut cells = vec![false; res * res];
            let results: Result<Vec<Vec<bool>>> = ys
                .par_iter()
                .map(|&y| {
                    xs.iter()
                        .map(|&x| exact_membership_torus(p, (x, y), TORUS_THETA_STEPS, TORUS_TOL))
                        .collect()
                })
                .collect();
            for (r, row) in results?.into_iter().enumerate() {
                cells[r * res..(r + 1) * res].copy_from_slice(&row);
            }
            cells
        }
    };

    Ok(MembershipMask {
        window,
        resolution: res,
        cells,
    })
}

/// A bounded complement component found by the grid scan.
#[derive(Debug, Clone, PartialEq)]
pub struct HoleComponent {
    /// Bounding box in Log-plane coordinates.
    pub bbox: Window,
    pub pixel_count: usize,
}

/// Grid-scan result: genus, per-hole geometry, and the scan parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GenusReport {
    pub genus: usize,
    pub components: Vec<HoleComponent>,
    pub window: Window,
    pub resolution: usize,
    pub level: Level,
    /// Set when the amoeba reaches into a window corner, which makes the
    /// bounded/unbounded split of border-adjacent regions ambiguous.
    pub window_warning: bool,
}

/// Counts bounded complement components: flood-fills the non-member
/// cells 4-connectedly and discards components touching the border.
pub fn genus_grid_scan(
    p: &NewtonPolynomial,
    level: Level,
    window: Window,
    resolution: usize,
) -> Result<GenusReport> {
    let mask = membership_mask(p, level, window, resolution)?;
    Ok(report_from_mask(&mask, level))
}

/// Component analysis of an existing membership mask.
pub fn report_from_mask(mask: &MembershipMask, level: Level) -> GenusReport {
    let res = mask.resolution;
    let mut visited = vec![false; res * res];
    let mut components = Vec::new();
    let mut stack = Vec::new();

    for start in 0..res * res {
        if visited[start] || mask.cells[start] {
            continue;
        }
        let mut touches_border = false;
        let mut pixel_count = 0usize;
        let (mut rmin, mut rmax, mut cmin, mut cmax) = (usize::MAX, 0usize, usize::MAX, 0usize);
        stack.push(start);
        visited[start] = true;
        while let Some(idx) = stack.pop() {
            let (r, c) = (idx / res, idx % res);
            pixel_count += 1;
            rmin = rmin.min(r);
            rmax = rmax.max(r);
            cmin = cmin.min(c);
            cmax = cmax.max(c);
            if r == 0 || c == 0 || r == res - 1 || c == res - 1 {
                touches_border = true;
            }
            for (dr, dc) in [(0i64, 1i64), (0, -1), (1, 0), (-1, 0)] {
                let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                if nr < 0 || nc < 0 || nr as usize >= res || nc as usize >= res {
                    continue;
                }
                let nidx = nr as usize * res + nc as usize;
                if !visited[nidx] && !mask.cells[nidx] {
                    visited[nidx] = true;
                    stack.push(nidx);
                }
            }
        }
        if !touches_border {
            let lo = mask.cell_center(rmin, cmin);
            let hi = mask.cell_center(rmax, cmax);
            components.push(HoleComponent {
                bbox: Window {
                    x: (lo.0, hi.0),
                    y: (lo.1, hi.1),
                },
                pixel_count,
            });
        }
    }

    // Spine-through-corner heuristic: member cells in a 2x2 corner block.
    let mut window_warning = false;
    for (r0, c0) in [(0, 0), (0, res - 2), (res - 2, 0), (res - 2, res - 2)] {
        for dr in 0..2 {
            for dc in 0..2 {
                if mask.get(r0 + dr, c0 + dc) {
                    window_warning = true;
                }
            }
        }
    }

    GenusReport {
        genus: components.len(),
        components,
        window: mask.window,
        resolution: res,
        level,
        window_warning,
    }
}

/// One step of a coefficient sweep.
#[derive(Debug, Clone)]
pub struct CrawlFrame {
    pub value: f64,
    /// Set when this value removes the swept term from the support (or
    /// empties the polynomial entirely, in which case `report` is None).
    pub degenerate: bool,
    pub report: Option<GenusReport>,
    pub boundary: Option<MembershipMask>,
}

/// Re-scans a polynomial while a single coefficient (addressed by its
/// canonical lexicographic term index) sweeps through `values`, emitting
/// per-value reports and boundary masks for stacked crawl plots.
pub fn crawl_sweep(
    template: &NewtonPolynomial,
    coeff_index: usize,
    values: &[f64],
    level: Level,
    window: Window,
    resolution: usize,
) -> Result<Vec<CrawlFrame>> {
    if values.is_empty() {
        return Err(Error::InvalidInput("empty sweep value list".into()));
    }
    let terms: Vec<_> = template.terms().collect();
    if coeff_index >= terms.len() {
        return Err(Error::InvalidInput(format!(
            "coefficient index {coeff_index} out of range (term count {})",
            terms.len()
        )));
    }
    let swept_exponent = terms[coeff_index].0;
    let mut frames = Vec::with_capacity(values.len());
    for &value in values {
        let rebuilt = NewtonPolynomial::new(terms.iter().map(|&(e, c)| {
            if e == swept_exponent {
                (e, Complex64::new(value, 0.0))
            } else {
                (e, c)
            }
        }));
        let degenerate = value == 0.0;
        match rebuilt {
            Ok(p) => {
                let mask = membership_mask(&p, level, window, resolution)?;
                let report = report_from_mask(&mask, level);
                frames.push(CrawlFrame {
                    value,
                    degenerate,
                    report: Some(report),
                    boundary: Some(mask.boundary()),
                });
            }
            Err(_) => frames.push(CrawlFrame {
                value,
                degenerate: true,
                report: None,
                boundary: None,
            }),
        }
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::Preset;
    use approx::assert_abs_diff_eq;

    fn cr(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn c5(vals: [f64; 5]) -> [Complex64; 5] {
        vals.map(cr)
    }

    fn c6(vals: [f64; 6]) -> [Complex64; 6] {
        vals.map(cr)
    }

    #[test]
    fn genus_f0_examples() {
        assert_eq!(genus_f0(&c5([1.0, 1.0, 1.0, 1.0, 5.0])).unwrap(), 1);
        // Boundary is non-strict genus 0: 4 is not greater than 4.
        assert_eq!(genus_f0(&c5([1.0, 1.0, 1.0, 1.0, 4.0])).unwrap(), 0);
        assert_eq!(genus_f0(&c5([1.0, 1.0, 1.0, 1.0, 0.0])).unwrap(), 0);
        assert!(genus_f0(&c5([0.0, 1.0, 1.0, 1.0, 5.0])).is_err());
    }

    #[test]
    fn centre_point_examples() {
        assert_eq!(centre_point_f0(&c5([1.0, 1.0, 1.0, 1.0, 5.0])).unwrap(), (0.0, 0.0));
        let e2 = std::f64::consts::E.powi(2);
        let (x, y) = centre_point_f0(&c5([1.0, 1.0, e2, 1.0, 5.0])).unwrap();
        assert_abs_diff_eq!(x, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(y, 0.0, epsilon = 1e-12);
        let (x, y) = centre_point_f0(&c5([2.0, 3.0, 2.0, 3.0, 7.0])).unwrap();
        assert_abs_diff_eq!(x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(y, 0.0, epsilon = 1e-12);
    }

    /// Bisection oracle for the cubics below, independent of the Cardano
    /// path under test.
    fn bisect_positive_root(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        assert!(f(lo) < 0.0 && f(hi) > 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn cubic_against_bisection_oracle() {
        // t^3 - t - 2 = 0
        let want = bisect_positive_root(|t| t * t * t - t - 2.0, 0.0, 3.0);
        let got = solve_cubic_positive_root(1.0, 0.0, -1.0, -2.0).unwrap();
        assert_abs_diff_eq!(got.positive_root, want, epsilon = 1e-10);
        assert_abs_diff_eq!(got.positive_root, 1.5213797068045676, epsilon = 1e-9);

        // 2 t^3 + t^2 - 1 = 0
        let want = bisect_positive_root(|t| 2.0 * t * t * t + t * t - 1.0, 0.0, 3.0);
        let got = solve_cubic_positive_root(2.0, 1.0, 0.0, -1.0).unwrap();
        assert_abs_diff_eq!(got.positive_root, want, epsilon = 1e-10);

        // 2 t^3 + t - 1 = 0
        let want = bisect_positive_root(|t| 2.0 * t * t * t + t - 1.0, 0.0, 3.0);
        let got = solve_cubic_positive_root(2.0, 0.0, 1.0, -1.0).unwrap();
        assert_abs_diff_eq!(got.positive_root, want, epsilon = 1e-10);
        assert_abs_diff_eq!(got.positive_root, 0.5897545123014584, epsilon = 1e-9);
    }

    #[test]
    fn cubic_zero_discriminant_double_root() {
        // t^3 - 3t - 2 = (t - 2)(t + 1)^2
        let got = solve_cubic_positive_root(1.0, 0.0, -3.0, -2.0).unwrap();
        assert_eq!(got.discriminant, 0.0);
        assert_abs_diff_eq!(got.positive_root, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn cubic_residual_meets_tolerance() {
        for (a3, a2, a1, a0) in [
            (1.0, 0.0, -1.0, -2.0),
            (2.0, 1.0, 0.0, -1.0),
            (0.3, 0.0, -17.2, -4.4),
            (5.0, 2.5, -0.1, -9.0),
        ] {
            let sol = solve_cubic_positive_root(a3, a2, a1, a0).unwrap();
            let t = sol.positive_root;
            let (f, _, scale) = cubic_eval(a3, a2, a1, a0, t);
            assert!(f.abs() <= 1e-10 * scale.max(1.0), "residual too large: {f}");
        }
    }

    #[test]
    fn cubic_without_positive_root_errors() {
        // t^3 + t + 1 has its only real root negative.
        assert!(matches!(
            solve_cubic_positive_root(1.0, 0.0, 1.0, 1.0),
            Err(Error::NoPositiveRoot)
        ));
    }

    #[test]
    fn genus_l332_examples() {
        assert_eq!(genus_l332(&c6([100.0, 1.0, 1.0, 1.0, 1.0, 100.0])).unwrap(), 2);
        assert_eq!(genus_l332(&c6([1.0, 1.0, 1.0, 1.0, 1.0, 1.0])).unwrap(), 0);
        // Thresholds exceed 1 for the all-ones vector.
        let (a1, a2) = l332_thresholds(&c6([1.0; 6])).unwrap();
        assert!(a1 > 1.0 && a2 > 1.0);
        // A unit phase on c1 changes nothing.
        let mut phased = c6([100.0, 1.0, 1.0, 1.0, 1.0, 100.0]);
        phased[0] = Complex64::from_polar(100.0, 1.234);
        assert_eq!(genus_l332(&phased).unwrap(), 2);
        assert!(genus_l332(&c6([1.0, 0.0, 1.0, 1.0, 1.0, 1.0])).is_err());
    }

    #[test]
    fn torus_membership_examples() {
        let line = Preset::F0
            .polynomial_real(&[1.0, 1.0, 1.0, 1.0, 5.0])
            .unwrap();
        assert!(!exact_membership_torus(&line, (0.0, 0.0), 256, 1e-3).unwrap());

        let simple = NewtonPolynomial::from_real([
            ((1i64, 0i64), 1.0),
            ((0, 1), 1.0),
            ((0, 0), 1.0),
        ])
        .unwrap();
        assert!(exact_membership_torus(&simple, (0.0, 0.0), 256, 1e-3).unwrap());
        assert!(!exact_membership_torus(&simple, (10.0, 0.0), 256, 1e-3).unwrap());
        assert!(exact_membership_torus(&simple, (0.0, 0.0), 32, 1e-3).is_err());
    }

    #[test]
    fn grid_scan_f0_hole_thresholds() {
        let p6 = Preset::F0.polynomial_real(&[1.0, 1.0, 1.0, 1.0, 6.0]).unwrap();
        let w = Window::square(5.0).unwrap();
        let report = genus_grid_scan(&p6, Level::Finite(1), w, 256).unwrap();
        assert_eq!(report.genus, 1);
        assert_eq!(report.components.len(), 1);
        assert!(report.components[0].pixel_count > 4);
        // The hole sits at the origin.
        let bbox = &report.components[0].bbox;
        assert!(bbox.contains((0.0, 0.0)));

        let p3 = Preset::F0.polynomial_real(&[1.0, 1.0, 1.0, 1.0, 3.0]).unwrap();
        let report = genus_grid_scan(&p3, Level::Finite(1), w, 256).unwrap();
        assert_eq!(report.genus, 0);
    }

    #[test]
    fn grid_scan_never_exceeds_max_genus() {
        let p = Preset::L332
            .polynomial_real(&[30.0, 1.0, 2.0, 1.5, 0.5, 25.0])
            .unwrap();
        let report =
            genus_grid_scan(&p, Level::Finite(1), Window::default_for(&p), 192).unwrap();
        assert!(report.genus <= p.max_genus());
        assert_eq!(report.genus, genus_l332(&[
            cr(30.0), cr(1.0), cr(2.0), cr(1.5), cr(0.5), cr(25.0)
        ]).unwrap() as usize);
    }

    /// The pentagon `z + w - 1/z - 1/w + 1` has a true hole that the n=1
    /// lopsided approximation fills in.
    #[test]
    fn grid_scan_level_matters_for_small_holes() {
        let p = Preset::F0
            .polynomial(&[cr(1.0), cr(1.0), cr(-1.0), cr(-1.0), cr(1.0)])
            .unwrap();
        let w = Window::square(4.0).unwrap();
        let n1 = genus_grid_scan(&p, Level::Finite(1), w, 128).unwrap();
        assert_eq!(n1.genus, 0);
        let exact = genus_grid_scan(&p, Level::Infinity, w, 96).unwrap();
        assert_eq!(exact.genus, 1);
    }

    #[test]
    fn crawl_examples() {
        let p = Preset::F0.polynomial_real(&[1.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        let w = Window::square(4.0).unwrap();
        // Constant term is the last in lexicographic order... locate it.
        let idx = p
            .terms()
            .position(|(e, _)| e.i == 0 && e.j == 0)
            .unwrap();
        let values: Vec<f64> = (0..=5).map(|k| k as f64 * 0.2).collect();
        let frames = crawl_sweep(&p, idx, &values, Level::Finite(1), w, 128).unwrap();
        assert_eq!(frames.len(), 6);
        for f in &frames {
            assert_eq!(f.report.as_ref().unwrap().genus, 0);
        }
        assert!(frames[0].degenerate && !frames[1].degenerate);

        // Sweep through the genus transition at 4.
        let values: Vec<f64> = (0..=25).map(|k| k as f64 * 0.2).collect();
        let frames = crawl_sweep(&p, idx, &values, Level::Finite(1), w, 128).unwrap();
        let first_hole = frames
            .iter()
            .position(|f| f.report.as_ref().unwrap().genus == 1)
            .unwrap();
        assert_abs_diff_eq!(frames[first_hole].value, 4.2, epsilon = 1e-9);

        // Sweeping c1 through zero flags degeneracy.
        let idx1 = p.terms().position(|(e, _)| e.i == 1 && e.j == 0).unwrap();
        let frames =
            crawl_sweep(&p, idx1, &[-0.2, 0.0, 0.2], Level::Finite(1), w, 64).unwrap();
        assert!(!frames[0].degenerate && frames[1].degenerate && !frames[2].degenerate);
        assert!(frames[1].report.is_some());
    }

    #[test]
    fn boundary_mask_rings_the_hole() {
        let p = Preset::F0.polynomial_real(&[1.0, 1.0, 1.0, 1.0, 8.0]).unwrap();
        let mask = membership_mask(&p, Level::Finite(1), Window::square(5.0).unwrap(), 128)
            .unwrap();
        let boundary = mask.boundary();
        assert!(boundary.member_count() > 0);
        assert!(boundary.member_count() < mask.member_count());
    }
}
