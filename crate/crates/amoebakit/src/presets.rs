//! Named polynomial families and the plain-text polynomial format.
//!
//! The text format is one term per line, `i j re im`, whitespace
//! separated, with `#` starting a comment. Presets bind a coefficient
//! vector `c_1..c_n` (or `c_0..c_n`) to a fixed exponent layout.

use num_complex::Complex64;

use crate::poly::{ExponentPair, NewtonPolynomial};
use crate::{Error, Result};

/// The four polynomial families used throughout: `f0`, `l332`, `cz2z4`
/// and `k4532`. Each fixes an ordered exponent layout; the coefficient
/// vector plugs into that order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// `c1 z + c2 w + c3/z + c4/w + c5` (square with one interior point).
    F0,
    /// `c1 z + c2 w + c3/z + c4/w + c5 z^2 + c6` (two interior points).
    L332,
    /// Full 5x3 rectangle of exponents `z^i w^j`, `i<=4`, `j<=2`,
    /// coefficients `c0..c14` (three interior points).
    Cz2z4,
    /// Eleven-term polygon with four interior points, coefficients
    /// `c0..c10`.
    K4532,
}

impl Preset {
    pub fn parse(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "f0" => Some(Self::F0),
            "l332" => Some(Self::L332),
            "cz2z4" => Some(Self::Cz2z4),
            "k4532" => Some(Self::K4532),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::F0 => "f0",
            Self::L332 => "l332",
            Self::Cz2z4 => "cz2z4",
            Self::K4532 => "k4532",
        }
    }

    /// Exponent layout in coefficient order.
    pub fn exponents(&self) -> Vec<ExponentPair> {
        match self {
            Self::F0 => vec![
                ExponentPair::new(1, 0),
                ExponentPair::new(0, 1),
                ExponentPair::new(-1, 0),
                ExponentPair::new(0, -1),
                ExponentPair::new(0, 0),
            ],
            Self::L332 => vec![
                ExponentPair::new(1, 0),
                ExponentPair::new(0, 1),
                ExponentPair::new(-1, 0),
                ExponentPair::new(0, -1),
                ExponentPair::new(2, 0),
                ExponentPair::new(0, 0),
            ],
            Self::Cz2z4 => (0..=2)
                .flat_map(|j| (0..=4).map(move |i| ExponentPair::new(i, j)))
                .collect(),
            Self::K4532 => vec![
                ExponentPair::new(0, 0),
                ExponentPair::new(1, 0),
                ExponentPair::new(2, 0),
                ExponentPair::new(0, 1),
                ExponentPair::new(1, 1),
                ExponentPair::new(2, 1),
                ExponentPair::new(0, 2),
                ExponentPair::new(1, 2),
                ExponentPair::new(2, 2),
                ExponentPair::new(3, 2),
                ExponentPair::new(2, 3),
            ],
        }
    }

    pub fn coeff_count(&self) -> usize {
        self.exponents().len()
    }

    /// Maximal genus for this polytope (interior lattice point count).
    pub fn max_genus(&self) -> usize {
        self.polynomial(&vec![Complex64::new(1.0, 0.0); self.coeff_count()])
            .unwrap()
            .max_genus()
    }

    pub fn polynomial(&self, coeffs: &[Complex64]) -> Result<NewtonPolynomial> {
        let exps = self.exponents();
        if coeffs.len() != exps.len() {
            return Err(Error::InvalidInput(format!(
                "preset {} takes {} coefficients, got {}",
                self.name(),
                exps.len(),
                coeffs.len()
            )));
        }
        NewtonPolynomial::new(exps.into_iter().zip(coeffs.iter().copied()))
    }

    pub fn polynomial_real(&self, coeffs: &[f64]) -> Result<NewtonPolynomial> {
        let cs: Vec<Complex64> = coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect();
        self.polynomial(&cs)
    }
}

/// Parses the `i j re im` text format. Blank lines and `#` comments are
/// skipped; errors carry the one-based line number.
pub fn parse_polynomial_text(text: &str) -> Result<NewtonPolynomial> {
    let mut terms = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(k) => &raw[..k],
            None => raw,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 4 {
            return Err(Error::InvalidInput(format!(
                "line {}: expected `i j re im`, got {} fields",
                lineno + 1,
                fields.len()
            )));
        }
        let i: i64 = fields[0].parse().map_err(|_| bad_field(lineno, "i"))?;
        let j: i64 = fields[1].parse().map_err(|_| bad_field(lineno, "j"))?;
        let re: f64 = fields[2].parse().map_err(|_| bad_field(lineno, "re"))?;
        let im: f64 = fields[3].parse().map_err(|_| bad_field(lineno, "im"))?;
        terms.push((ExponentPair::new(i, j), Complex64::new(re, im)));
    }
    NewtonPolynomial::new(terms)
}

fn bad_field(lineno: usize, field: &str) -> Error {
    Error::InvalidInput(format!("line {}: cannot parse field `{field}`", lineno + 1))
}

/// Writes the text format, one term per line in canonical order.
pub fn polynomial_to_text(p: &NewtonPolynomial) -> String {
    let mut out = String::new();
    for (e, c) in p.terms() {
        out.push_str(&format!("{} {} {:.17e} {:.17e}\n", e.i, e.j, c.re, c.im));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_shapes() {
        assert_eq!(Preset::F0.coeff_count(), 5);
        assert_eq!(Preset::L332.coeff_count(), 6);
        assert_eq!(Preset::Cz2z4.coeff_count(), 15);
        assert_eq!(Preset::K4532.coeff_count(), 11);
        assert_eq!(Preset::F0.max_genus(), 1);
        assert_eq!(Preset::L332.max_genus(), 2);
        assert_eq!(Preset::Cz2z4.max_genus(), 3);
        assert_eq!(Preset::K4532.max_genus(), 4);
    }

    #[test]
    fn text_roundtrip() {
        let p = Preset::L332
            .polynomial_real(&[1.0, -2.0, 0.5, 3.0, 1.25, -0.75])
            .unwrap();
        let text = polynomial_to_text(&p);
        let q = parse_polynomial_text(&text).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn text_parse_with_comments() {
        let text = "# the F0 square\n1 0 1 0\n0 1 1 0 # w term\n-1 0 1 0\n0 -1 1 0\n\n0 0 5 0\n";
        let p = parse_polynomial_text(text).unwrap();
        assert_eq!(p.term_count(), 5);
        assert_eq!(p.max_genus(), 1);
    }

    #[test]
    fn text_parse_errors_name_line() {
        let err = parse_polynomial_text("1 0 1\n").unwrap_err();
        assert!(err.to_string().contains("line 1"));
        let err = parse_polynomial_text("1 0 1 0\nx 0 1 0\n").unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }
}
