//! Structural analysis of finite-dimensional quantum Markov semigroups in
//! GKSL form: irreducibility, primitivity, positivity improvement, invariant
//! states, distinguished subalgebras and peripheral spectra.

// `!(x > 0.0)` deliberately rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod gksl;
pub mod io;
pub mod linalg;
pub mod models;
pub mod operator;
pub mod perron;
pub mod report;
pub mod scan;
pub mod tolerance;

pub use algebra::OperatorSpace;
pub use analysis::{Property, SpectralReport, Verdict, Witness};
pub use dynamics::RelaxationProfile;
pub use error::{QmsError, Result};
pub use gksl::{build_model, GaugeTransform, GkslModel, Side, Superoperator};
pub use linalg::{ComplexMatrix, ComplexVector};
pub use models::{standard_fixture, Fixture};
pub use operator::{Density, OrthProjection, Subspace};
pub use perron::PfReport;
pub use report::AnalysisReport;
pub use tolerance::{ToleranceOverrides, Tolerances};
