//! Exact cyclic-resultant expansion for real-coefficient polynomials.
//!
//! The phase product multiplies `n^2` rotated copies, so coefficients of
//! the result span a dynamic range like `(c_max / c_min)^(n^2)`. Plain
//! f64 accumulation then leaves small coefficients buried under
//! cancellation dust, which poisons lopsidedness decisions near window
//! edges. Real f64 inputs are dyadic rationals, and the rotation phases
//! live in Gaussian integers for n in {1, 2, 4} and Eisenstein integers
//! for n = 3, so the whole expansion can run in exact scaled-integer
//! arithmetic and convert to f64 only at the end (one rounding per
//! coefficient).

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;

use crate::poly::{ExponentPair, NewtonPolynomial};

/// Largest tolerated spread between input coefficient exponents; beyond
/// this the scaled integers get unreasonably wide and the caller should
/// fall back to floating point.
const MAX_EXP_SPREAD: i64 = 4096;

trait Ring: Clone {
    /// Order of the root of unity this ring hosts.
    const ORDER: u32;
    fn from_int(v: BigInt) -> Self;
    fn is_zero(&self) -> bool;
    fn add_assign(&mut self, o: &Self);
    fn mul(&self, o: &Self) -> Self;
    /// Multiplies by the primitive `ORDER`-th root of unity raised to `k`.
    fn rotate(&self, k: u32) -> Self;
    /// Converts `self * 2^exp` to a complex double, or `None` when the
    /// value is irrational-complex in a way the ring cannot express
    /// exactly (used as an internal consistency check for n = 3).
    fn to_complex(&self, exp: i64) -> Option<Complex64>;
}

/// `re + im * i`.
#[derive(Clone, PartialEq)]
struct Gauss {
    re: BigInt,
    im: BigInt,
}

impl Ring for Gauss {
    const ORDER: u32 = 4;

    fn from_int(v: BigInt) -> Self {
        Self {
            re: v,
            im: BigInt::from(0),
        }
    }

    fn is_zero(&self) -> bool {
        self.re.sign() == num_bigint::Sign::NoSign && self.im.sign() == num_bigint::Sign::NoSign
    }

    fn add_assign(&mut self, o: &Self) {
        self.re += &o.re;
        self.im += &o.im;
    }

    fn mul(&self, o: &Self) -> Self {
        Self {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    fn rotate(&self, k: u32) -> Self {
        match k % 4 {
            0 => self.clone(),
            1 => Self {
                re: -self.im.clone(),
                im: self.re.clone(),
            },
            2 => Self {
                re: -self.re.clone(),
                im: -self.im.clone(),
            },
            _ => Self {
                re: self.im.clone(),
                im: -self.re.clone(),
            },
        }
    }

    fn to_complex(&self, exp: i64) -> Option<Complex64> {
        Some(Complex64::new(
            big_times_pow2(&self.re, exp),
            big_times_pow2(&self.im, exp),
        ))
    }
}

/// `a + b * omega` with `omega = e^(2 pi i / 3)`, so `omega^2 = -1 - omega`.
#[derive(Clone, PartialEq)]
struct Eisen {
    a: BigInt,
    b: BigInt,
}

impl Ring for Eisen {
    const ORDER: u32 = 3;

    fn from_int(v: BigInt) -> Self {
        Self {
            a: v,
            b: BigInt::from(0),
        }
    }

    fn is_zero(&self) -> bool {
        self.a.sign() == num_bigint::Sign::NoSign && self.b.sign() == num_bigint::Sign::NoSign
    }

    fn add_assign(&mut self, o: &Self) {
        self.a += &o.a;
        self.b += &o.b;
    }

    fn mul(&self, o: &Self) -> Self {
        // (a + b w)(c + d w) = ac + (ad + bc) w + bd w^2,  w^2 = -1 - w
        let bd = &self.b * &o.b;
        Self {
            a: &self.a * &o.a - &bd,
            b: &self.a * &o.b + &self.b * &o.a - &bd,
        }
    }

    fn rotate(&self, k: u32) -> Self {
        match k % 3 {
            0 => self.clone(),
            1 => {
                // (a + b w) w = a w + b w^2 = -b + (a - b) w
                Self {
                    a: -self.b.clone(),
                    b: &self.a - &self.b,
                }
            }
            _ => {
                // (a + b w) w^2 = (b - a) - a w
                Self {
                    a: &self.b - &self.a,
                    b: -self.a.clone(),
                }
            }
        }
    }

    fn to_complex(&self, exp: i64) -> Option<Complex64> {
        // The full phase product of a real polynomial is conjugation
        // invariant, so the omega component must cancel exactly.
        if self.b.sign() != num_bigint::Sign::NoSign {
            return None;
        }
        Some(Complex64::new(big_times_pow2(&self.a, exp), 0.0))
    }
}

/// `v * 2^exp` as f64, correct to one rounding even when `v` has far
/// more bits than a double.
fn big_times_pow2(v: &BigInt, exp: i64) -> f64 {
    if v.sign() == num_bigint::Sign::NoSign {
        return 0.0;
    }
    let bits = v.bits() as i64;
    let shift = (bits - 63).max(0);
    let top: BigInt = v >> shift;
    let top_f64 = i64::try_from(&top).map(|t| t as f64).unwrap_or(f64::NAN);
    ldexp(top_f64, shift + exp)
}

/// `x * 2^e` with overflow/underflow saturating the way hardware does.
fn ldexp(x: f64, e: i64) -> f64 {
    let mut out = x;
    let mut rem = e;
    while rem != 0 {
        let step = rem.clamp(-1000, 1000);
        out *= f64::powi(2.0, step as i32);
        rem -= step;
        if out == 0.0 || out.is_infinite() {
            break;
        }
    }
    out
}

/// Exact f64 decomposition `x = mant * 2^exp`.
fn decompose(x: f64) -> (BigInt, i64) {
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1 } else { 1 };
    let exponent = ((bits >> 52) & 0x7ff) as i64;
    let fraction = bits & 0x000f_ffff_ffff_ffff;
    let (mant, exp) = if exponent == 0 {
        (fraction, -1074)
    } else {
        (fraction | (1 << 52), exponent - 1075)
    };
    (BigInt::from(sign) * BigInt::from(mant), exp)
}

fn expand_in<R: Ring>(
    terms: &[(ExponentPair, BigInt)],
    n: u32,
    scale_exp: i64,
) -> Option<Vec<(ExponentPair, Complex64)>> {
    let unit_exponent = |e: ExponentPair, k1: u32, k2: u32| -> u32 {
        let raw = e.i * k1 as i64 + e.j * k2 as i64;
        raw.rem_euclid(R::ORDER as i64) as u32
    };
    let mut factors: Vec<BTreeMap<ExponentPair, R>> = Vec::with_capacity((n * n) as usize);
    for k1 in 0..n {
        for k2 in 0..n {
            // For n = 2 inside the order-4 Gaussian ring, the phase step
            // is the square of the primitive root.
            let step = R::ORDER / n;
            let factor: BTreeMap<ExponentPair, R> = terms
                .iter()
                .map(|(e, m)| {
                    let k = unit_exponent(*e, k1, k2) * step;
                    (*e, R::from_int(m.clone()).rotate(k))
                })
                .collect();
            factors.push(factor);
        }
    }
    while factors.len() > 1 {
        let mut next = Vec::with_capacity(factors.len() / 2 + 1);
        let mut iter = factors.chunks(2);
        for pair in &mut iter {
            match pair {
                [a, b] => next.push(ring_mul(a, b)),
                [a] => next.push(a.clone()),
                _ => unreachable!(),
            }
        }
        factors = next;
    }
    let product = factors.pop().unwrap();
    let mut out = Vec::with_capacity(product.len());
    for (e, coeff) in product {
        if coeff.is_zero() {
            continue;
        }
        let value = coeff.to_complex(scale_exp)?;
        if value.norm_sqr() != 0.0 {
            out.push((e, value));
        }
    }
    Some(out)
}

fn ring_mul<R: Ring>(
    a: &BTreeMap<ExponentPair, R>,
    b: &BTreeMap<ExponentPair, R>,
) -> BTreeMap<ExponentPair, R> {
    let mut out: BTreeMap<ExponentPair, R> = BTreeMap::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e = ExponentPair::new(ea.i + eb.i, ea.j + eb.j);
            let prod = ca.mul(cb);
            match out.get_mut(&e) {
                Some(acc) => acc.add_assign(&prod),
                None => {
                    out.insert(e, prod);
                }
            }
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// Exact phase-product expansion. Returns `None` when the inputs are not
/// purely real, the exponent spread is pathological, or `n` has no exact
/// ring here; callers then fall back to the floating-point product.
pub(crate) fn exact_cyclic_resultant(p: &NewtonPolynomial, n: u32) -> Option<NewtonPolynomial> {
    if !matches!(n, 2..=4) {
        return None;
    }
    let mut decomposed = Vec::with_capacity(p.term_count());
    for (e, c) in p.terms() {
        if c.im != 0.0 || !c.re.is_finite() {
            return None;
        }
        decomposed.push((e, decompose(c.re)));
    }
    let min_exp = decomposed.iter().map(|&(_, (_, e))| e).min()?;
    let max_exp = decomposed.iter().map(|&(_, (_, e))| e).max()?;
    if max_exp - min_exp > MAX_EXP_SPREAD {
        return None;
    }
    let terms: Vec<(ExponentPair, BigInt)> = decomposed
        .into_iter()
        .map(|(e, (m, exp))| (e, m << (exp - min_exp)))
        .collect();
    let scale_exp = min_exp * (n * n) as i64;
    let expanded = match n {
        2 | 4 => expand_in::<Gauss>(&terms, n, scale_exp)?,
        3 => expand_in::<Eisen>(&terms, n, scale_exp)?,
        _ => unreachable!(),
    };
    NewtonPolynomial::new(expanded).ok()
}
