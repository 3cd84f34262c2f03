//! From-scratch neural classifiers over amoeba data: dense and
//! convolutional layers, Adam training, stratified k-fold evaluation
//! with accuracy and Matthews correlation, dataset generation, and the
//! weight-derived Heaviside genus formula.

pub mod arch;
mod data;
mod metrics;
mod net;
mod train;
mod weights;

pub use data::*;
pub use metrics::*;
pub use net::*;
pub use train::*;
pub use weights::*;
