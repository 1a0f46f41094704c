//! The full analysis battery collected into one serializable report.

use serde::Serialize;

use crate::analysis::{self, ExtractionMethod, SpectralReport, Verdict};
use crate::error::QmsError;
use crate::gksl::GkslModel;
use crate::linalg::max_abs;
use crate::models::{classical_restriction, ClassicalRestriction};
use crate::operator::Density;
use crate::tolerance::Tolerances;

/// Faithfulness floor used for the fixed-point cross-check.
pub const FAITHFUL_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct ModelInfo {
    pub name: Option<String>,
    pub dim: usize,
    pub jumps: usize,
    pub hamiltonian_max_abs: f64,
    pub unitality_residual: f64,
    pub generator_scale: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Verdicts {
    pub irreducible: Option<Verdict>,
    pub primitive: Option<Verdict>,
    pub positivity_improving: Option<Verdict>,
    pub peripheral_trivial: Option<Verdict>,
}

impl Verdicts {
    fn values(&self) -> Vec<bool> {
        [
            &self.irreducible,
            &self.primitive,
            &self.positivity_improving,
            &self.peripheral_trivial,
        ]
        .iter()
        .filter_map(|v| v.as_ref().map(|v| v.value))
        .collect()
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Dimensions {
    pub fixed_points: Option<usize>,
    pub decoherence_free: Option<usize>,
    pub reversible: Option<usize>,
    pub invariant_kernel: Option<usize>,
    pub generated_algebra: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantDensityReport {
    #[serde(serialize_with = "crate::io::serialize_density")]
    pub density: Density,
    pub method: ExtractionMethod,
    pub min_eigenvalue: f64,
    pub stationarity: f64,
}

/// A stage that failed or two criteria that disagreed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportError {
    pub stage: String,
    pub kind: String,
    pub message: String,
    /// Raised by the numerics rather than by the input.
    pub numerical: bool,
}

impl ReportError {
    fn from_error(stage: &str, e: &QmsError) -> Self {
        let kind = match e {
            QmsError::Dimension(_) => "dimension",
            QmsError::Validation { .. } => "validation",
            QmsError::Precondition(_) => "precondition",
            QmsError::InvalidDensity(_) => "invalid_density",
            QmsError::InvalidChannel(_) => "invalid_channel",
            QmsError::Parse(_) => "parse",
            QmsError::Inconsistency(_) => "inconsistency",
            QmsError::NumericalFailure(_) => "numerical_failure",
        };
        ReportError {
            stage: stage.to_string(),
            kind: kind.to_string(),
            message: e.to_string(),
            numerical: e.is_numerical(),
        }
    }

    fn inconsistency(stage: &str, message: String) -> Self {
        ReportError {
            stage: stage.to_string(),
            kind: "inconsistency".to_string(),
            message,
            numerical: true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub model: ModelInfo,
    pub verdicts: Verdicts,
    pub invariant_density: Option<InvariantDensityReport>,
    pub dimensions: Dimensions,
    pub self_adjoint_span: Option<bool>,
    pub reversible_defective: Option<bool>,
    pub spectrum: Option<SpectralReport>,
    pub classical_restriction: ClassicalRestriction,
    pub tolerances: Tolerances,
    pub distance_convention: &'static str,
    pub consistent: bool,
    pub errors: Vec<ReportError>,
}

impl AnalysisReport {
    pub fn has_numerical_errors(&self) -> bool {
        self.errors.iter().any(|e| e.numerical)
    }
}

fn record<T>(errors: &mut Vec<ReportError>, stage: &str, r: crate::error::Result<T>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            errors.push(ReportError::from_error(stage, &e));
            None
        }
    }
}

/// Runs every decision procedure. Failures and disagreements are recorded
/// in `errors`; nothing is reconciled.
pub fn analyze(m: &GkslModel, tol: &Tolerances, name: Option<&str>, seed: u64) -> AnalysisReport {
    let mut errors = Vec::new();
    let model = ModelInfo {
        name: name.map(str::to_string),
        dim: m.dim(),
        jumps: m.jumps().len(),
        hamiltonian_max_abs: max_abs(m.hamiltonian()),
        unitality_residual: m.unitality_residual(),
        generator_scale: m.generator_scale(),
    };

    let verdicts = Verdicts {
        irreducible: record(&mut errors, "irreducible", analysis::check_irreducibility(m, tol)),
        primitive: record(&mut errors, "primitive", analysis::primitivity_criterion(m, tol)),
        positivity_improving: record(
            &mut errors,
            "positivity_improving",
            analysis::positivity_improving_criterion(m, tol, seed),
        ),
        peripheral_trivial: record(
            &mut errors,
            "peripheral_trivial",
            analysis::peripheral_trivial_criterion(m, tol),
        ),
    };
    let values = verdicts.values();
    let mut consistent = values.windows(2).all(|w| w[0] == w[1]);
    if !consistent {
        errors.push(ReportError::inconsistency(
            "equivalence",
            format!("irreducible/primitive/positivity-improving/peripheral-trivial = {values:?}"),
        ));
    }

    let inv = record(&mut errors, "invariant_density", analysis::invariant_densities(m, tol));
    let fixed = record(&mut errors, "fixed_points", analysis::fixed_point_space(m, tol));
    let nt = record(
        &mut errors,
        "decoherence_free",
        analysis::decoherence_free_subalgebra(m, tol),
    );
    let mr = record(&mut errors, "reversible", analysis::reversible_subalgebra(m, tol));
    let algebra_dim = record(&mut errors, "generated_algebra", analysis::algebra_dimension(m, tol));
    let spectrum = record(&mut errors, "spectrum", analysis::peripheral_spectrum(m, tol));
    let self_adjoint_span = record(
        &mut errors,
        "self_adjoint_span",
        analysis::self_adjoint_span_criterion(m, tol),
    )
    .flatten();

    if let (Some(inv), Some(fixed), Some(irr)) = (&inv, &fixed, &verdicts.irreducible) {
        if inv.density.min_eigenvalue() > FAITHFUL_FLOOR && (fixed.dim() == 1) != irr.value {
            consistent = false;
            errors.push(ReportError::inconsistency(
                "fixed_points",
                format!(
                    "faithful invariant density but dim F = {} while irreducible = {}",
                    fixed.dim(),
                    irr.value
                ),
            ));
        }
    }
    if let (Some(mr), Some(prim)) = (&mr, &verdicts.primitive) {
        if prim.value && mr.space.dim() != 1 {
            consistent = false;
            errors.push(ReportError::inconsistency(
                "reversible",
                format!("primitive but dim M_r = {}", mr.space.dim()),
            ));
        }
    }

    AnalysisReport {
        model,
        dimensions: Dimensions {
            fixed_points: fixed.as_ref().map(|f| f.dim()),
            decoherence_free: nt.as_ref().map(|s| s.dim()),
            reversible: mr.as_ref().map(|r| r.space.dim()),
            invariant_kernel: inv.as_ref().map(|i| i.kernel.dim()),
            generated_algebra: algebra_dim,
        },
        reversible_defective: mr.as_ref().map(|r| r.defective),
        invariant_density: inv.map(|i| InvariantDensityReport {
            min_eigenvalue: i.density.min_eigenvalue(),
            density: i.density,
            method: i.method,
            stationarity: i.stationarity,
        }),
        verdicts,
        self_adjoint_span,
        spectrum,
        classical_restriction: classical_restriction(m, tol),
        tolerances: *tol,
        distance_convention: "trace norm of the difference (no 1/2 factor)",
        consistent: consistent && errors.is_empty(),
        errors,
    }
}
