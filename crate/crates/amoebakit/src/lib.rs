//! Amoebae of bivariate Newton polynomials.
//!
//! An amoeba is the image of the zero set of a Laurent polynomial
//! `P(z, w)` on `(C*)^2` under the coordinate-wise log-modulus map
//! `(z, w) -> (ln|z|, ln|w|)`. This crate computes with amoebae at desk
//! scale: lopsided approximations and their cyclic-resultant refinements,
//! genus counting (closed forms, torus scans, grid scans), Monte Carlo
//! point clouds and grayscale rasterizations, small from-scratch neural
//! classifiers over coefficient vectors and images, manifold projections,
//! and Vietoris-Rips persistent homology of sampled clouds.
//!
//! The library is organized around [`poly::NewtonPolynomial`], a sparse
//! map from integer exponent pairs to complex coefficients. Everything
//! else consumes it. See the `book/` directory for a guided tour; every
//! code block there doubles as a doc-test of this crate.

mod exact;
pub mod genus;
pub mod lopsided;
pub mod ml;
pub mod persist;
pub mod poly;
pub mod presets;
pub mod project;
pub mod raster;
pub mod roots;
pub mod sample;

#[cfg(doctest)]
mod book;

use num_complex::Complex64;

/// An axis-aligned rectangle in the Log plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    /// `(min, max)` along the first Log coordinate.
    pub x: (f64, f64),
    /// `(min, max)` along the second Log coordinate.
    pub y: (f64, f64),
}

impl Window {
    pub fn new(x: (f64, f64), y: (f64, f64)) -> Result<Self> {
        if !(x.0 < x.1) || !(y.0 < y.1) {
            return Err(Error::InvalidInput(format!(
                "empty window: x = {x:?}, y = {y:?}"
            )));
        }
        Ok(Self { x, y })
    }

    /// The square `[-r, r]^2`.
    pub fn square(r: f64) -> Result<Self> {
        Self::new((-r, r), (-r, r))
    }

    /// Default scan window `[-R, R]^2` with `R = ln(sum |c_i|) + 3`,
    /// wide enough that spines clear all hole-bearing structure for
    /// bounded coefficient ranges.
    pub fn default_for(p: &poly::NewtonPolynomial) -> Self {
        let total: f64 = p.terms().map(|(_, c)| c.norm()).sum();
        let r = total.max(1.0).ln() + 3.0;
        Self::square(r).expect("positive radius")
    }

    pub fn width(&self) -> f64 {
        self.x.1 - self.x.0
    }

    pub fn height(&self) -> f64 {
        self.y.1 - self.y.0
    }

    pub fn contains(&self, p: (f64, f64)) -> bool {
        p.0 >= self.x.0 && p.0 <= self.x.1 && p.1 >= self.y.0 && p.1 <= self.y.1
    }
}

/// Errors shared across the crate. Variants map onto the distinct failure
/// classes the CLI reports with separate exit codes.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid transform: {0}")]
    InvalidTransform(String),
    #[error("{what} out of range: {detail}")]
    Range { what: &'static str, detail: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("no positive real root")]
    NoPositiveRoot,
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("root solver did not converge after {iterations} iterations")]
    RootsDiverged {
        iterations: usize,
        /// Best iterate reached before giving up.
        best: Vec<Complex64>,
    },
    #[error("training diverged (non-finite loss) at step {step}")]
    TrainDiverged { step: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("generation failed: {0}")]
    Generation(String),
    #[error("neighbor graph disconnected: component sizes {0:?}")]
    Disconnected(Vec<usize>),
    #[error("parse error at byte {offset}: {msg}")]
    Parse { offset: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
