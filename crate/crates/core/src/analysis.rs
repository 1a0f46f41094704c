//! Decision procedures for subharmonicity, irreducibility, invariant
//! densities, primitivity, spectra, distinguished subalgebras and support
//! reachability.
//!
//! Each property has a raw single-criterion routine (`*_criterion`) and a
//! public `check_*` entry point. The entry points cross-check criteria that
//! must coincide in finite dimension and report a disagreement as
//! [`QmsError::Inconsistency`]; the raw routines never do, so independent
//! routes can be compared against each other.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::algebra::{self, OperatorSpace};
use crate::dynamics::Evolution;
use crate::error::{QmsError, Result};
use crate::gksl::{apply_generator, apply_predual, vectorize, GkslModel, Side};
use crate::linalg::{
    self, basis_vector, hermitian_eigen, hermitian_part, identity, max_abs, op_norm, real, unvec,
    vec_of, ComplexMatrix, ComplexVector, OrthoBasis, I,
};
use crate::models::{random_unit_vector, rng_from_seed};
use crate::operator::{self, Density, OrthProjection, Subspace};
use crate::tolerance::Tolerances;

/// Seed of the random certificate vectors used by default.
pub const DEFAULT_CERTIFICATE_SEED: u64 = 0x5eed;
/// Number of random certificate vectors in the positivity-improving test.
pub const RANDOM_CERTIFICATES: usize = 20;
/// Random combinations of support generators whose eigenvectors are tried.
pub const RANDOM_COMBINATIONS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Irreducible,
    Primitive,
    PositivityImproving,
    PeripheralTrivial,
    Subharmonic,
}

impl Property {
    pub fn name(self) -> &'static str {
        match self {
            Property::Irreducible => "irreducible",
            Property::Primitive => "primitive",
            Property::PositivityImproving => "positivity_improving",
            Property::PeripheralTrivial => "peripheral_trivial",
            Property::Subharmonic => "subharmonic",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Property {
    type Err = QmsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "irreducible" => Ok(Property::Irreducible),
            "primitive" => Ok(Property::Primitive),
            "positivity_improving" => Ok(Property::PositivityImproving),
            "peripheral" | "peripheral_trivial" => Ok(Property::PeripheralTrivial),
            "subharmonic" => Ok(Property::Subharmonic),
            _ => Err(QmsError::Parse(format!(
                "unknown property '{s}' (expected irreducible, primitive, \
                 positivity-improving, peripheral or subharmonic)"
            ))),
        }
    }
}

/// Certificate attached to a verdict.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    Subspace(Subspace),
    Projection(OrthProjection),
    Density(Density),
}

impl Serialize for Witness {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(2))?;
        match self {
            Witness::Subspace(sub) => {
                map.serialize_entry("kind", "subspace")?;
                map.serialize_entry("subspace", &SubspaceRef(sub))?;
            }
            Witness::Projection(p) => {
                map.serialize_entry("kind", "projection")?;
                map.serialize_entry("matrix", &crate::io::MatrixRef(p.matrix()))?;
            }
            Witness::Density(d) => {
                map.serialize_entry("kind", "density")?;
                map.serialize_entry("matrix", &crate::io::MatrixRef(d.matrix()))?;
            }
        }
        map.end()
    }
}

struct SubspaceRef<'a>(&'a Subspace);

impl Serialize for SubspaceRef<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        crate::io::serialize_subspace(self.0, s)
    }
}

/// Boolean outcome of a decision procedure with its diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub property: Property,
    pub value: bool,
    pub criterion: String,
    pub witness: Option<Witness>,
    pub residuals: BTreeMap<String, f64>,
}

impl Verdict {
    fn new(property: Property, value: bool, criterion: &str) -> Self {
        Verdict {
            property,
            value,
            criterion: criterion.to_string(),
            witness: None,
            residuals: BTreeMap::new(),
        }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.residuals.insert(key.to_string(), value);
        self
    }

    pub fn witness_subspace(&self) -> Option<&Subspace> {
        match &self.witness {
            Some(Witness::Subspace(s)) => Some(s),
            _ => None,
        }
    }

    pub fn witness_density(&self) -> Option<&Density> {
        match &self.witness {
            Some(Witness::Density(d)) => Some(d),
            _ => None,
        }
    }
}

/// Eigenvalues of the Heisenberg generator (units of inverse time).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    #[serde(serialize_with = "crate::io::serialize_complex_list")]
    pub eigenvalues: Vec<Complex64>,
    #[serde(serialize_with = "crate::io::serialize_complex_list")]
    pub peripheral: Vec<Complex64>,
    pub zero_multiplicity: usize,
    /// Smallest `|Re λ|` among non-peripheral eigenvalues.
    pub gap: Option<f64>,
    /// Cutoff actually applied to `Re λ`.
    pub cutoff: f64,
}

impl SpectralReport {
    /// Peripheral spectrum is exactly `{0}` with multiplicity one.
    pub fn is_trivial(&self) -> bool {
        self.peripheral.len() == 1 && self.zero_multiplicity == 1
    }
}

fn check_model_dim(m: &GkslModel, n: usize, what: &str) -> Result<()> {
    if m.dim() != n {
        return Err(QmsError::Dimension(format!(
            "{what} of size {n} for a model of dimension {}",
            m.dim()
        )));
    }
    Ok(())
}

/// Spectral cutoff scaled by the generator norm.
fn spectral_cutoff(m: &GkslModel, tol: &Tolerances) -> f64 {
    tol.spec * m.generator_scale().max(1.0)
}

fn kernel_space(matrix: &ComplexMatrix, n: usize, tol: &Tolerances) -> Result<OperatorSpace> {
    let k = linalg::null_space(matrix, tol.rank, 0.0)?;
    let mut ortho = OrthoBasis::new();
    for j in 0..k.ncols() {
        ortho.try_push(&k.column(j).into_owned(), 0.5);
    }
    Ok(OperatorSpace::from_ortho(n, ortho, tol))
}

// ---------------------------------------------------------------------------
// Subharmonic projections

pub fn is_subharmonic(m: &GkslModel, p: &OrthProjection, tol: &Tolerances) -> Result<Verdict> {
    check_model_dim(m, p.dim(), "projection")?;
    let n = m.dim();
    let pm = p.matrix();
    let q = identity(n) - pm;

    let lp = apply_generator(m, pm)?;
    let scale = m.generator_scale();
    let by_generator = operator::is_psd_scaled(&lp, scale, tol)?;
    let (w, _) = hermitian_eigen(&lp);
    let lp_norm = w.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let min_eig = w.first().copied().unwrap_or(0.0) / lp_norm.max(scale).max(f64::MIN_POSITIVE);

    let block = m
        .drift_and_jumps()
        .iter()
        .map(|a| op_norm(&(&q * a * pm)) / op_norm(a).max(1.0))
        .fold(0.0, f64::max);
    let by_blocks = block <= tol.eq;

    // The generator test sees a leak of size ε only at order ε², so a
    // disagreement is decisive only when the failing side fails clearly.
    let decisive = (by_generator && !by_blocks && block > tol.eq.sqrt())
        || (by_blocks && !by_generator && min_eig < -tol.psd.sqrt());
    if decisive {
        return Err(QmsError::Inconsistency(format!(
            "L(p) ≥ 0 is {by_generator} but block invariance is {by_blocks} \
             (min eigenvalue {min_eig:.3e}, block residual {block:.3e})"
        )));
    }
    Ok(Verdict::new(
        Property::Subharmonic,
        by_generator && by_blocks,
        "L(p) ≥ 0 and p⊥Gp = p⊥L_ℓp = 0",
    )
    .with("generator_min_eigenvalue", min_eig)
    .with("block_residual", block)
    .with("generator_criterion", f64::from(u8::from(by_generator)))
    .with("block_criterion", f64::from(u8::from(by_blocks))))
}

// ---------------------------------------------------------------------------
// Irreducibility

/// `dim A({G, L_ℓ, 1})`.
pub fn algebra_dimension(m: &GkslModel, tol: &Tolerances) -> Result<usize> {
    Ok(algebra::generated_algebra(m.dim(), &m.drift_and_jumps(), true, tol)?.dim())
}

/// Burnside rank test only, with no witness search.
pub fn irreducibility_criterion(m: &GkslModel, tol: &Tolerances) -> Result<Verdict> {
    let n = m.dim();
    let d = algebra_dimension(m, tol)?;
    Ok(
        Verdict::new(Property::Irreducible, d == n * n, "dim A({G, L_ℓ, 1}) = n²")
            .with("algebra_dimension", d as f64),
    )
}

fn eigenvectors_of(a: &ComplexMatrix) -> Vec<ComplexVector> {
    let Ok(values) = linalg::eigenvalues(a) else {
        return Vec::new();
    };
    let mut out: Vec<ComplexVector> = Vec::new();
    let mut seen: Vec<Complex64> = Vec::new();
    let scale = max_abs(a).max(1.0);
    for lambda in values {
        if seen.iter().any(|s| (s - lambda).norm() <= 1e-9 * scale) {
            continue;
        }
        seen.push(lambda);
        if let Ok(v) = linalg::eigenvector(a, lambda) {
            out.push(v);
        }
    }
    out
}

fn hermitian_eigenvectors(k: &ComplexMatrix) -> Vec<ComplexVector> {
    let mut out = Vec::new();
    for h in [hermitian_part(k), hermitian_part(&(k * (-I)))] {
        if max_abs(&h) == 0.0 {
            continue;
        }
        let (_, v) = hermitian_eigen(&h);
        out.extend((0..v.ncols()).map(|j| v.column(j).into_owned()));
    }
    out
}

/// Proper common invariant subspace of `{G, L_ℓ}`, searched over a fixed list
/// of candidate vectors.
pub fn find_invariant_subspace(m: &GkslModel, tol: &Tolerances) -> Result<Option<Subspace>> {
    let n = m.dim();
    let ops = m.drift_and_jumps();
    let mut candidates: Vec<ComplexVector> = (0..n).map(|k| basis_vector(n, k)).collect();
    for a in &ops {
        candidates.extend(eigenvectors_of(a));
    }
    let heis = vectorize(m, Side::Heisenberg);
    let schr = heis.dual();
    for sup in [heis.matrix(), schr.matrix()] {
        let kernel = kernel_space(sup, n, tol)?;
        for b in kernel.basis() {
            candidates.extend(hermitian_eigenvectors(b));
        }
    }
    for v in candidates {
        if !(v.norm() > 0.0) {
            continue;
        }
        let orbit = algebra::orbit_subspace(&ops, &v, tol)?;
        if orbit.dim() > 0 && orbit.dim() < n && orbit.invariance_residual(&ops) <= 10.0 * tol.eq.sqrt() {
            return Ok(Some(orbit));
        }
    }
    Ok(None)
}

/// Burnside verdict plus a best-effort invariant subspace when reducible.
pub fn check_irreducibility(m: &GkslModel, tol: &Tolerances) -> Result<Verdict> {
    let mut v = irreducibility_criterion(m, tol)?;
    if !v.value {
        if let Some(sub) = find_invariant_subspace(m, tol)? {
            let res = sub.invariance_residual(&m.drift_and_jumps());
            v = v.with("witness_invariance", res).with("witness_dim", sub.dim() as f64);
            v.witness = Some(Witness::Subspace(sub));
        }
    }
    Ok(v)
}

/// `Some(dim {L_ℓ}′ = 1)` when `span{L_ℓ}` is closed under adjoints, else
/// `None`. A `false` value is inconclusive.
pub fn self_adjoint_span_criterion(m: &GkslModel, tol: &Tolerances) -> Result<Option<bool>> {
    let n = m.dim();
    let span = OperatorSpace::span_of(n, m.jumps(), tol)?;
    let adjoints: Vec<ComplexMatrix> = m.jumps().iter().map(|l| l.adjoint()).collect();
    let adj_span = OperatorSpace::span_of(n, &adjoints, tol)?;
    if !span.same_span(&adj_span, tol) {
        return Ok(None);
    }
    Ok(Some(algebra::commutant(n, m.jumps(), tol)?.dim() == 1))
}

// ---------------------------------------------------------------------------
// Fixed points and invariant densities

/// `ker L`.
pub fn fixed_point_space(m: &GkslModel, tol: &Tolerances) -> Result<OperatorSpace> {
    kernel_space(vectorize(m, Side::Heisenberg).matrix(), m.dim(), tol)
}

/// `ker L_*`.
pub fn invariant_kernel(m: &GkslModel, tol: &Tolerances) -> Result<OperatorSpace> {
    kernel_space(vectorize(m, Side::Schrodinger).matrix(), m.dim(), tol)
}

fn stationarity(m: &GkslModel, rho: &ComplexMatrix) -> Result<f64> {
    operator::trace_norm(&apply_predual(m, rho)?)
}

/// Accepts `h` as an invariant density if it normalizes to a valid,
/// stationary state.
fn accept_candidate(m: &GkslModel, h: &ComplexMatrix, tol: &Tolerances) -> Option<Density> {
    let h = hermitian_part(h);
    let tr = h.trace().re;
    let size = max_abs(&h);
    if !(tr.abs() > tol.rank * size.max(f64::MIN_POSITIVE) * h.nrows() as f64) {
        return None;
    }
    let rho = &h / real(tr);
    let (w, _) = hermitian_eigen(&rho);
    let top = w.last().copied().unwrap_or(0.0);
    if w.first().copied().unwrap_or(0.0) < -tol.psd * top.max(1.0) {
        return None;
    }
    let density = Density::normalized(rho, tol).ok()?;
    let res = stationarity(m, density.matrix()).ok()?;
    (res <= tol.eq * m.generator_scale().max(1.0)).then_some(density)
}

/// Hermitian spanning set of a `*`-closed kernel.
fn hermitian_basis(kernel: &OperatorSpace, tol: &Tolerances) -> Vec<ComplexMatrix> {
    let n = kernel.dim_ambient();
    let mut ortho = OrthoBasis::new();
    for k in kernel.basis() {
        for h in [hermitian_part(k), hermitian_part(&(k * (-I)))] {
            let nh = linalg::hs_norm(&h);
            if nh > 0.0 {
                ortho.try_push(&(vec_of(&h) / real(nh)), tol.rank.sqrt());
            }
        }
    }
    ortho.vectors().iter().map(|v| hermitian_part(&unvec(v, n))).collect()
}

/// How the invariant density was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractionMethod {
    KernelElement,
    KernelProjection,
    CesaroMean,
}

/// Invariant kernel together with one extracted invariant density.
#[derive(Debug, Clone)]
pub struct InvariantDensities {
    pub kernel: OperatorSpace,
    pub density: Density,
    pub method: ExtractionMethod,
    pub stationarity: f64,
}

/// Kernel of the predual generator and one invariant density from it.
pub fn invariant_densities(m: &GkslModel, tol: &Tolerances) -> Result<InvariantDensities> {
    let n = m.dim();
    let kernel = invariant_kernel(m, tol)?;
    let herm = hermitian_basis(&kernel, tol);
    let found = |density: Density, method| -> Result<InvariantDensities> {
        let stationarity = stationarity(m, density.matrix())?;
        Ok(InvariantDensities {
            kernel: kernel.clone(),
            density,
            method,
            stationarity,
        })
    };

    if herm.len() == 1 {
        if let Some(d) = accept_candidate(m, &herm[0], tol) {
            return found(d, ExtractionMethod::KernelElement);
        }
    }
    if !herm.is_empty() {
        let projected = kernel.project(&(identity(n) / real(n as f64)));
        if let Some(d) = accept_candidate(m, &projected, tol) {
            return found(d, ExtractionMethod::KernelProjection);
        }
        for h in &herm {
            if let Some(d) = accept_candidate(m, h, tol) {
                return found(d, ExtractionMethod::KernelElement);
            }
        }
    }

    let report = peripheral_spectrum(m, tol)?;
    let gap = report.gap.unwrap_or(1.0).max(1e-6);
    let horizon = 100.0 / gap;
    let evo = Evolution::new(m);
    let steps = evo.default_steps(horizon).min(4096);
    let mean = evo.cesaro_state(&Density::maximally_mixed(n), horizon, Some(steps), tol)?;
    let candidate = if kernel.dim() > 0 {
        kernel.project(mean.matrix())
    } else {
        mean.matrix().clone()
    };
    if let Some(d) = accept_candidate(m, &candidate, tol) {
        return found(d, ExtractionMethod::CesaroMean);
    }
    Err(QmsError::NumericalFailure(format!(
        "no invariant density could be extracted (kernel dimension {})",
        kernel.dim()
    )))
}

/// `(ker L_*, ρ)`.
pub fn invariant_density_space(m: &GkslModel, tol: &Tolerances) -> Result<(OperatorSpace, Density)> {
    let inv = invariant_densities(m, tol)?;
    Ok((inv.kernel, inv.density))
}

// ---------------------------------------------------------------------------
// Primitivity

/// Unique and faithful invariant density, without cross-checks.
pub fn primitivity_criterion(m: &GkslModel, tol: &Tolerances) -> Result<Verdict> {
    let inv = invariant_densities(m, tol)?;
    let min_eig = inv.density.min_eigenvalue();
    let value = inv.kernel.dim() == 1 && min_eig > tol.psd;
    let mut v = Verdict::new(
        Property::Primitive,
        value,
        "dim ker L_* = 1 and the invariant density is faithful",
    )
    .with("kernel_dimension", inv.kernel.dim() as f64)
    .with("density_min_eigenvalue", min_eig)
    .with("stationarity", inv.stationarity);
    v.witness = Some(Witness::Density(inv.density));
    Ok(v)
}

fn cross_check(primary: &Verdict, reference: &Verdict) -> Result<()> {
    if primary.value != reference.value {
        return Err(QmsError::Inconsistency(format!(
            "{} = {} but {} = {}",
            primary.property, primary.value, reference.property, reference.value
        )));
    }
    Ok(())
}

pub fn check_primitivity(m: &GkslModel, tol: &Tolerances) -> Result<Verdict> {
    let v = primitivity_criterion(m, tol)?;
    cross_check(&v, &irreducibility_criterion(m, tol)?)?;
    Ok(v)
}

// ---------------------------------------------------------------------------
// Spectra and distinguished subalgebras

pub fn peripheral_spectrum(m: &GkslModel, tol: &Tolerances) -> Result<SpectralReport> {
    let mut eigenvalues = vectorize(m, Side::Heisenberg).eigenvalues()?;
    eigenvalues.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    let cutoff = spectral_cutoff(m, tol);
    let peripheral: Vec<Complex64> = eigenvalues.iter().copied().filter(|z| z.re >= -cutoff).collect();
    let zero_multiplicity = eigenvalues.iter().filter(|z| z.norm() <= cutoff).count();
    let gap = eigenvalues
        .iter()
        .filter(|z| z.re < -cutoff)
        .map(|z| -z.re)
        .fold(None, |acc: Option<f64>, g| Some(acc.map_or(g, |a| a.min(g))));
    Ok(SpectralReport {
        eigenvalues,
        peripheral,
        zero_multiplicity,
        gap,
        cutoff,
    })
}

/// Primitive with `σ(L) ∩ iℝ = {0}`, without cross-checks.
pub fn peripheral_trivial_criterion(m: &GkslModel, tol: &Tolerances) -> Result<Verdict> {
    let spectrum = peripheral_spectrum(m, tol)?;
    let primitive = primitivity_criterion(m, tol)?;
    Ok(Verdict::new(
        Property::PeripheralTrivial,
        primitive.value && spectrum.is_trivial(),
        "primitive and σ(L) ∩ iℝ = {0}",
    )
    .with("peripheral_count", spectrum.peripheral.len() as f64)
    .with("zero_multiplicity", spectrum.zero_multiplicity as f64)
    .with("gap", spectrum.gap.unwrap_or(f64::NAN)))
}

pub fn check_peripheral_trivial(m: &GkslModel, tol: &Tolerances) -> Result<Verdict> {
    let v = peripheral_trivial_criterion(m, tol)?;
    cross_check(&v, &irreducibility_criterion(m, tol)?)?;
    Ok(v)
}

/// One group of numerically coincident peripheral eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeripheralCluster {
    #[serde(serialize_with = "serialize_complex")]
    pub eigenvalue: Complex64,
    pub algebraic: usize,
    pub geometric: usize,
}

fn serialize_complex<S: Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    crate::io::complex_to_json(*z).serialize(s)
}

#[derive(Debug, Clone)]
pub struct ReversibleSubalgebra {
    pub space: OperatorSpace,
    pub clusters: Vec<PeripheralCluster>,
    /// Some peripheral eigenvalue has fewer eigenvectors than its multiplicity.
    pub defective: bool,
}

/// Span of the eigenvectors of `L` for eigenvalues on the imaginary axis.
pub fn reversible_subalgebra(m: &GkslModel, tol: &Tolerances) -> Result<ReversibleSubalgebra> {
    let n = m.dim();
    let spectrum = peripheral_spectrum(m, tol)?;
    let lmat = vectorize(m, Side::Heisenberg).matrix().clone();
    let radius = 1e3 * spectrum.cutoff;
    let mut sorted = spectrum.peripheral.clone();
    sorted.sort_by(|a, b| a.im.total_cmp(&b.im));
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    for z in sorted {
        match groups.last_mut() {
            Some(g) if (z - g[g.len() - 1]).norm() <= radius => g.push(z),
            _ => groups.push(vec![z]),
        }
    }
    let nn = n * n;
    let mut clusters = Vec::new();
    let mut vectors: Vec<ComplexMatrix> = Vec::new();
    for g in groups {
        let mu = g.iter().sum::<Complex64>() / real(g.len() as f64);
        let spread = g.iter().map(|z| (z - mu).norm()).fold(0.0, f64::max);
        let shifted = &lmat - ComplexMatrix::identity(nn, nn) * mu;
        let kernel = linalg::null_space(&shifted, tol.rank, 2.0 * spread)?;
        clusters.push(PeripheralCluster {
            eigenvalue: mu,
            algebraic: g.len(),
            geometric: kernel.ncols(),
        });
        vectors.extend((0..kernel.ncols()).map(|j| unvec(&kernel.column(j).into_owned(), n)));
    }
    let defective = clusters.iter().any(|c| c.geometric < c.algebraic);
    Ok(ReversibleSubalgebra {
        space: OperatorSpace::span_of(n, &vectors, tol)?,
        clusters,
        defective,
    })
}

/// `{δ_H^k(L_ℓ), δ_H^k(L_ℓ*) : k ≥ 0}′`.
pub fn decoherence_free_subalgebra(m: &GkslModel, tol: &Tolerances) -> Result<OperatorSpace> {
    let mut seeds = m.jumps().to_vec();
    seeds.extend(m.jumps().iter().map(|l| l.adjoint()));
    let span = algebra::iterated_commutator_span(m.hamiltonian(), &seeds, tol)?;
    algebra::commutant(m.dim(), &span, tol)
}

// ---------------------------------------------------------------------------
// Support reachability and positivity improvement

/// `span{δ_G^m(L_ℓ)}`, the operators whose products move supports.
pub fn support_generators(m: &GkslModel, tol: &Tolerances) -> Result<Vec<ComplexMatrix>> {
    algebra::iterated_commutator_span(m.drift(), m.jumps(), tol)
}

/// Smallest subspace containing `ψ` and invariant under the support
/// generators.
pub fn support_reachable_space(m: &GkslModel, psi: &ComplexVector, tol: &Tolerances) -> Result<Subspace> {
    check_model_dim(m, psi.len(), "vector")?;
    algebra::orbit_subspace(&support_generators(m, tol)?, psi, tol)
}

/// Orbit test over canonical basis vectors, seeded random vectors and the
/// eigenvectors of random combinations of the support generators, without
/// cross-checks. A proper invariant subspace of the generators contains an
/// eigenvector of every combination.
pub fn positivity_improving_criterion(m: &GkslModel, tol: &Tolerances, seed: u64) -> Result<Verdict> {
    let n = m.dim();
    let gens = support_generators(m, tol)?;
    let mut rng = rng_from_seed(seed);
    let mut certificates: Vec<ComplexVector> = (0..n).map(|k| basis_vector(n, k)).collect();
    certificates.extend((0..RANDOM_CERTIFICATES).map(|_| random_unit_vector(n, &mut rng)));
    for _ in 0..RANDOM_COMBINATIONS {
        let weights = random_unit_vector(gens.len().max(1), &mut rng);
        let combo = gens
            .iter()
            .zip(weights.iter())
            .fold(ComplexMatrix::zeros(n, n), |acc, (g, w)| acc + g * *w);
        certificates.extend(eigenvectors_of(&combo));
    }
    let mut min_dim = n;
    let mut witness = None;
    for psi in &certificates {
        let orbit = algebra::orbit_subspace(&gens, psi, tol)?;
        if orbit.dim() < min_dim {
            min_dim = orbit.dim();
            witness = Some(orbit);
        }
    }
    let mut v = Verdict::new(
        Property::PositivityImproving,
        min_dim == n,
        "S(ψ) = h for all certificate vectors",
    )
    .with("certificates", certificates.len() as f64)
    .with("min_support_dimension", min_dim as f64)
    .with("support_generators", gens.len() as f64);
    v.witness = witness.map(Witness::Subspace);
    Ok(v)
}

pub fn check_positivity_improving(m: &GkslModel, tol: &Tolerances, seed: u64) -> Result<Verdict> {
    let v = positivity_improving_criterion(m, tol, seed)?;
    cross_check(&v, &irreducibility_criterion(m, tol)?)?;
    Ok(v)
}

/// The four verdicts that coincide in finite dimension, each computed by its
/// own route.
#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceWeb {
    pub irreducible: Verdict,
    pub primitive: Verdict,
    pub positivity_improving: Verdict,
    pub peripheral_trivial: Verdict,
}

impl EquivalenceWeb {
    pub fn values(&self) -> [bool; 4] {
        [
            self.irreducible.value,
            self.primitive.value,
            self.positivity_improving.value,
            self.peripheral_trivial.value,
        ]
    }

    pub fn consistent(&self) -> bool {
        let v = self.values();
        v.iter().all(|&b| b == v[0])
    }
}

pub fn equivalence_web(m: &GkslModel, tol: &Tolerances, seed: u64) -> Result<EquivalenceWeb> {
    Ok(EquivalenceWeb {
        irreducible: check_irreducibility(m, tol)?,
        primitive: primitivity_criterion(m, tol)?,
        positivity_improving: positivity_improving_criterion(m, tol, seed)?,
        peripheral_trivial: peripheral_trivial_criterion(m, tol)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gksl::build_model;
    use crate::linalg::{c64, matrix_unit, zeros};
    use crate::models::{plus_state, random_gksl, standard_fixture};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn fixture(name: &str) -> GkslModel {
        standard_fixture(name).unwrap()
    }

    fn rank_one(n: usize, k: usize) -> OrthProjection {
        OrthProjection::new(matrix_unit(n, k, k), &tol()).unwrap()
    }

    fn close(a: &[Complex64], b: &[Complex64], eps: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() < eps)
    }

    #[test]
    fn subharmonic_examples() {
        let t = tol();
        for name in ["AD2", "DP2", "U2", "BD3"] {
            let m = fixture(name);
            assert!(is_subharmonic(&m, &OrthProjection::identity(m.dim()), &t).unwrap().value);
        }
        let ad = is_subharmonic(&fixture("AD2"), &rank_one(2, 0), &t).unwrap();
        assert!(ad.value);
        let bd = is_subharmonic(&fixture("BD3"), &rank_one(3, 0), &t).unwrap();
        assert!(!bd.value);
        assert!((bd.residuals["block_residual"] - 1.0).abs() < 1e-15);
        assert!(is_subharmonic(&fixture("AD2"), &rank_one(3, 0), &t).is_err());
    }

    #[test]
    fn irreducibility_examples() {
        let t = tol();
        for name in ["DP2", "AD2"] {
            let v = check_irreducibility(&fixture(name), &t).unwrap();
            assert!(!v.value, "{name}");
            let w = v.witness_subspace().expect("witness");
            assert_eq!(w.dim(), 1);
            assert!(w.relative_distance(&basis_vector(2, 0)) < 1e-12);
        }
        let v = check_irreducibility(&fixture("AD2"), &t).unwrap();
        assert_eq!(v.residuals["algebra_dimension"], 3.0);
        assert!(check_irreducibility(&fixture("BD3"), &t).unwrap().value);
        assert!(check_irreducibility(&fixture("BD2"), &t).unwrap().value);
        assert!(!check_irreducibility(&fixture("U2"), &t).unwrap().value);
    }

    #[test]
    fn self_adjoint_span_examples() {
        let t = tol();
        assert_eq!(self_adjoint_span_criterion(&fixture("BD3"), &t).unwrap(), Some(true));
        assert_eq!(self_adjoint_span_criterion(&fixture("AD2"), &t).unwrap(), None);
        assert_eq!(self_adjoint_span_criterion(&fixture("DP2"), &t).unwrap(), Some(false));
    }

    #[test]
    fn fixed_point_examples() {
        let t = tol();
        let zero = build_model(zeros(3), Vec::new(), &t).unwrap();
        assert!(fixed_point_space(&zero, &t).unwrap().is_full());
        let dp = fixed_point_space(&fixture("DP2"), &t).unwrap();
        assert_eq!(dp.dim(), 2);
        assert!(dp.is_algebra());
        assert!(dp.contains(&matrix_unit(2, 0, 0), &t));
        assert!(fixed_point_space(&fixture("BD3"), &t).unwrap().is_scalars());
    }

    #[test]
    fn invariant_density_examples() {
        let t = tol();
        let (k, rho) = invariant_density_space(&fixture("AD2"), &t).unwrap();
        assert_eq!(k.dim(), 1);
        assert!(max_abs(&(rho.matrix() - matrix_unit(2, 0, 0))) < 1e-12);
        let (k, rho) = invariant_density_space(&fixture("BD3"), &t).unwrap();
        assert_eq!(k.dim(), 1);
        assert!(max_abs(&(rho.matrix() - identity(3) / real(3.0))) < 1e-12);
        let inv = invariant_densities(&fixture("DP2"), &t).unwrap();
        assert_eq!(inv.kernel.dim(), 2);
        assert_eq!(inv.method, ExtractionMethod::KernelProjection);
        assert!(max_abs(&(inv.density.matrix() - identity(2) / real(2.0))) < 1e-12);
        assert!(inv.stationarity <= t.eq);
    }

    #[test]
    fn primitivity_examples() {
        let t = tol();
        let bd = check_primitivity(&fixture("BD3"), &t).unwrap();
        assert!(bd.value);
        assert!(bd.witness_density().is_some());
        assert!(!check_primitivity(&fixture("AD2"), &t).unwrap().value);
        let dp = check_primitivity(&fixture("DP2"), &t).unwrap();
        assert!(!dp.value);
        assert_eq!(dp.residuals["kernel_dimension"], 2.0);
    }

    #[test]
    fn spectrum_examples() {
        let t = tol();
        let dp = peripheral_spectrum(&fixture("DP2"), &t).unwrap();
        let expected = [c64(0.0, 0.0), c64(0.0, 0.0), c64(-2.0, 0.0), c64(-2.0, 0.0)];
        assert!(close(&dp.eigenvalues, &expected, 1e-12));
        assert_eq!(dp.peripheral.len(), 2);
        assert_eq!(dp.zero_multiplicity, 2);
        assert!((dp.gap.unwrap() - 2.0).abs() < 1e-12);

        let u = peripheral_spectrum(&fixture("U2"), &t).unwrap();
        let expected = [c64(0.0, -2.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 2.0)];
        let mut p = u.peripheral.clone();
        p.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!(close(&p, &expected, 1e-12));
        assert!(u.gap.is_none());

        let bd = peripheral_spectrum(&fixture("BD3"), &t).unwrap();
        assert_eq!(bd.peripheral.len(), 1);
        assert_eq!(bd.zero_multiplicity, 1);
        assert!(bd.is_trivial());
        assert!(bd.eigenvalues.iter().all(|z| z.re <= bd.cutoff));
    }

    #[test]
    fn peripheral_trivial_examples() {
        let t = tol();
        assert!(check_peripheral_trivial(&fixture("BD3"), &t).unwrap().value);
        // AD2 has σ(L) ∩ iℝ = {0} but is not primitive.
        assert!(peripheral_spectrum(&fixture("AD2"), &t).unwrap().is_trivial());
        assert!(!check_peripheral_trivial(&fixture("AD2"), &t).unwrap().value);
    }

    #[test]
    fn reversible_examples() {
        let t = tol();
        let u = reversible_subalgebra(&fixture("U2"), &t).unwrap();
        assert!(u.space.is_full());
        assert!(!u.defective);
        assert!(reversible_subalgebra(&fixture("BD3"), &t).unwrap().space.is_scalars());
        let dp = reversible_subalgebra(&fixture("DP2"), &t).unwrap();
        assert_eq!(dp.space.dim(), 2);
        assert!(dp.space.contains(&matrix_unit(2, 1, 1), &t));
    }

    #[test]
    fn decoherence_free_examples() {
        let t = tol();
        let dp = decoherence_free_subalgebra(&fixture("DP2"), &t).unwrap();
        assert_eq!(dp.dim(), 2);
        assert!(decoherence_free_subalgebra(&fixture("BD3"), &t).unwrap().is_scalars());
        let zero = build_model(zeros(3), Vec::new(), &t).unwrap();
        assert!(decoherence_free_subalgebra(&zero, &t).unwrap().is_full());
    }

    #[test]
    fn support_examples() {
        let t = tol();
        let ad = fixture("AD2");
        let s = support_reachable_space(&ad, &basis_vector(2, 0), &t).unwrap();
        assert_eq!(s.dim(), 1);
        assert!(support_reachable_space(&ad, &plus_state(), &t).unwrap().is_full());
        assert!(support_reachable_space(&fixture("BD3"), &basis_vector(3, 0), &t).unwrap().is_full());
        assert!(matches!(
            support_reachable_space(&ad, &ComplexVector::zeros(2), &t),
            Err(QmsError::Precondition(_))
        ));
    }

    #[test]
    fn positivity_improving_examples() {
        let t = tol();
        let seed = DEFAULT_CERTIFICATE_SEED;
        assert!(check_positivity_improving(&fixture("BD3"), &t, seed).unwrap().value);
        let ad = check_positivity_improving(&fixture("AD2"), &t, seed).unwrap();
        assert!(!ad.value);
        assert!(ad.witness_subspace().unwrap().relative_distance(&basis_vector(2, 0)) < 1e-12);
        assert!(!check_positivity_improving(&fixture("DP2"), &t, seed).unwrap().value);
    }

    #[test]
    fn random_models_form_consistent_web() {
        let t = tol();
        for seed in 0..10 {
            let m = random_gksl(3, 2, seed).unwrap();
            let web = equivalence_web(&m, &t, seed).unwrap();
            assert!(web.consistent(), "seed {seed}: {:?}", web.values());
        }
    }

    #[test]
    fn property_names() {
        assert_eq!("positivity-improving".parse::<Property>().unwrap(), Property::PositivityImproving);
        assert_eq!("peripheral".parse::<Property>().unwrap(), Property::PeripheralTrivial);
        assert!("ergodic".parse::<Property>().is_err());
        let json = serde_json::to_value(
            Verdict::new(Property::Irreducible, true, "x").with("a", 1.0),
        )
        .unwrap();
        assert_eq!(json["property"], "irreducible");
        assert_eq!(json["witness"], serde_json::Value::Null);
    }
}
