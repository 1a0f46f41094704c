//! Matrix primitives with quantum semantics: positivity, trace norm,
//! support projections and subspaces of the underlying Hilbert space.

use num_complex::Complex64;

use crate::error::{QmsError, Result};
use crate::linalg::{
    self, hermitian_eigen, max_abs, ComplexMatrix, ComplexVector, OrthoBasis,
};
use crate::tolerance::Tolerances;

pub use crate::linalg::ComplexMatrix as Matrix;

fn ensure_square(x: &ComplexMatrix, what: &str) -> Result<usize> {
    if x.nrows() != x.ncols() {
        return Err(QmsError::Dimension(format!(
            "{what} must be square, got {}×{}",
            x.nrows(),
            x.ncols()
        )));
    }
    Ok(x.nrows())
}

fn ensure_same_dim(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(QmsError::Dimension(format!(
            "shapes {:?} and {:?} differ",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

/// `‖x − x*‖` (max entry) relative to `max(1, ‖x‖)`.
pub(crate) fn hermiticity_residual(x: &ComplexMatrix) -> f64 {
    max_abs(&(x - x.adjoint())) / max_abs(x).max(1.0)
}

/// Positivity test with an explicit reference scale for the eigenvalue floor.
pub(crate) fn is_psd_scaled(x: &ComplexMatrix, scale: f64, tol: &Tolerances) -> Result<bool> {
    ensure_square(x, "operator")?;
    if hermiticity_residual(x) > tol.eq {
        return Ok(false);
    }
    let (w, _) = hermitian_eigen(x);
    let min = w.first().copied().unwrap_or(0.0);
    let norm = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(min >= -tol.psd * norm.max(scale))
}

/// True iff `x` is Hermitian within `τ_eq` and its smallest eigenvalue is at
/// least `−τ_psd·‖x‖`.
pub fn is_psd(x: &ComplexMatrix, tol: &Tolerances) -> Result<bool> {
    is_psd_scaled(x, 0.0, tol)
}

/// Sum of singular values.
pub fn trace_norm(x: &ComplexMatrix) -> Result<f64> {
    ensure_square(x, "operator")?;
    Ok(linalg::singular_values(x).iter().sum())
}

/// Hilbert–Schmidt inner product `tr(a* b)`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    ensure_same_dim(a, b)?;
    Ok(linalg::hs_dot(a, b))
}

pub fn trace(x: &ComplexMatrix) -> Complex64 {
    x.trace()
}

/// Positive unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Density(ComplexMatrix);

impl Density {
    pub fn new(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let n = ensure_square(&matrix, "density")?;
        if n == 0 {
            return Err(QmsError::InvalidDensity("empty matrix".into()));
        }
        if !linalg::all_finite(&matrix) {
            return Err(QmsError::InvalidDensity("non-finite entries".into()));
        }
        let herm = hermiticity_residual(&matrix);
        if herm > tol.eq {
            return Err(QmsError::InvalidDensity(format!(
                "not Hermitian (residual {herm:.3e})"
            )));
        }
        let m = linalg::hermitian_part(&matrix);
        let tr = m.trace().re;
        if (tr - 1.0).abs() > tol.trace {
            return Err(QmsError::InvalidDensity(format!("trace {tr} differs from 1")));
        }
        let (w, _) = hermitian_eigen(&m);
        if w[0] < -tol.psd {
            return Err(QmsError::InvalidDensity(format!(
                "negative eigenvalue {:.3e}",
                w[0]
            )));
        }
        Ok(Density(m))
    }

    /// Normalizes a nonzero positive matrix to unit trace.
    pub fn normalized(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        ensure_square(&matrix, "density")?;
        let tr = matrix.trace().re;
        if !(tr > 0.0) || !tr.is_finite() {
            return Err(QmsError::InvalidDensity(format!(
                "cannot normalize matrix with trace {tr}"
            )));
        }
        Density::new(matrix / linalg::real(tr), tol)
    }

    /// `|ψ⟩⟨ψ|/‖ψ‖²`.
    pub fn pure(psi: &ComplexVector) -> Result<Self> {
        let n2 = psi.norm_squared();
        if !(n2 > 0.0) {
            return Err(QmsError::Precondition("zero state vector".into()));
        }
        Ok(Density(linalg::outer(psi, psi) / linalg::real(n2)))
    }

    /// `1/n`.
    pub fn maximally_mixed(n: usize) -> Self {
        Density(linalg::identity(n) / linalg::real(n as f64))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.0).0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Strictly positive, i.e. with full support.
    pub fn is_faithful(&self, tol: &Tolerances) -> bool {
        self.min_eigenvalue() > tol.psd
    }

    pub fn trace_distance(&self, other: &Density) -> f64 {
        linalg::singular_values(&(&self.0 - &other.0)).iter().sum()
    }
}

/// Orthogonal projection `p = p* = p²`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthProjection(ComplexMatrix);

impl OrthProjection {
    pub fn new(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        ensure_square(&matrix, "projection")?;
        let herm = max_abs(&(&matrix - matrix.adjoint()));
        let idem = max_abs(&(&matrix * &matrix - &matrix));
        let res = herm.max(idem);
        if res > tol.eq.max(1e-12) * 10.0 {
            return Err(QmsError::Validation {
                what: "matrix is not an orthogonal projection".into(),
                residual: res,
            });
        }
        Ok(OrthProjection(linalg::hermitian_part(&matrix)))
    }

    pub fn identity(n: usize) -> Self {
        OrthProjection(linalg::identity(n))
    }

    pub fn zero(n: usize) -> Self {
        OrthProjection(linalg::zeros(n))
    }

    pub fn onto(subspace: &Subspace) -> Self {
        OrthProjection(subspace.projection_matrix())
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn complement(&self) -> OrthProjection {
        OrthProjection(linalg::identity(self.dim()) - &self.0)
    }

    pub fn rank(&self) -> usize {
        self.0.trace().re.round().max(0.0) as usize
    }

    /// The range of `p` as a subspace.
    pub fn range(&self, tol: &Tolerances) -> Subspace {
        let n = self.dim();
        let (w, v) = hermitian_eigen(&self.0);
        let mut basis = OrthoBasis::new();
        for k in (0..n).rev() {
            if w[k] > 0.5 {
                basis.try_push(&v.column(k).into_owned(), tol.rank);
            }
        }
        Subspace::from_basis(n, basis)
    }
}

/// Subspace of `Cⁿ` held as an orthonormal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    dim_ambient: usize,
    frame: ComplexMatrix,
}

impl Subspace {
    /// Wraps a frame whose columns must be orthonormal within `τ_eq`.
    pub fn new(frame: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let n = frame.nrows();
        let k = frame.ncols();
        let gram = frame.adjoint() * &frame;
        let res = max_abs(&(gram - ComplexMatrix::identity(k, k)));
        if res > tol.eq * 10.0 {
            return Err(QmsError::Validation {
                what: "frame columns are not orthonormal".into(),
                residual: res,
            });
        }
        Ok(Subspace {
            dim_ambient: n,
            frame,
        })
    }

    pub(crate) fn from_basis(n: usize, basis: OrthoBasis) -> Self {
        Subspace {
            dim_ambient: n,
            frame: basis.to_matrix(n),
        }
    }

    pub fn zero(n: usize) -> Self {
        Subspace {
            dim_ambient: n,
            frame: ComplexMatrix::zeros(n, 0),
        }
    }

    pub fn full(n: usize) -> Self {
        Subspace {
            dim_ambient: n,
            frame: ComplexMatrix::identity(n, n),
        }
    }

    /// Span of arbitrary vectors; directions whose Gram–Schmidt residual is
    /// below `τ_rank` times the largest input norm are dropped.
    pub fn span(n: usize, vectors: &[ComplexVector], tol: &Tolerances) -> Result<Self> {
        let scale = vectors.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        let mut basis = OrthoBasis::new();
        for v in vectors {
            if v.len() != n {
                return Err(QmsError::Dimension(format!(
                    "vector of length {} in C^{n}",
                    v.len()
                )));
            }
            basis.try_push(v, tol.rank * scale);
        }
        Ok(Subspace::from_basis(n, basis))
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn dim_ambient(&self) -> usize {
        self.dim_ambient
    }

    pub fn frame(&self) -> &ComplexMatrix {
        &self.frame
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.dim_ambient
    }

    pub fn is_trivial(&self) -> bool {
        self.dim() == 0 || self.is_full()
    }

    pub fn projection_matrix(&self) -> ComplexMatrix {
        &self.frame * self.frame.adjoint()
    }

    pub fn projection(&self) -> OrthProjection {
        OrthProjection::onto(self)
    }

    /// Distance of `v` from the subspace relative to `‖v‖`.
    pub fn relative_distance(&self, v: &ComplexVector) -> f64 {
        let nv = v.norm();
        if nv == 0.0 {
            return 0.0;
        }
        let r = v - &self.frame * (self.frame.adjoint() * v);
        r.norm() / nv
    }

    /// Largest relative leakage `‖(1−p) A p‖ / ‖A‖` over the operators.
    pub fn invariance_residual(&self, ops: &[ComplexMatrix]) -> f64 {
        let p = self.projection_matrix();
        let q = linalg::identity(self.dim_ambient) - &p;
        ops.iter()
            .map(|a| {
                let na = max_abs(a);
                if na == 0.0 {
                    0.0
                } else {
                    max_abs(&(&q * a * &p)) / na
                }
            })
            .fold(0.0, f64::max)
    }

    /// Same span, compared through the projections.
    pub fn same_as(&self, other: &Subspace, tol: f64) -> bool {
        self.dim_ambient == other.dim_ambient
            && self.dim() == other.dim()
            && max_abs(&(self.projection_matrix() - other.projection_matrix())) <= tol
    }
}

/// Support projection of a density: eigenvectors with eigenvalue above
/// `τ_rank·λ_max`.
pub fn support_projection(rho: &Density, tol: &Tolerances) -> Result<OrthProjection> {
    Ok(support_subspace(rho.matrix(), tol)?.projection())
}

/// Support of a positive matrix as a subspace.
pub fn support_subspace(x: &ComplexMatrix, tol: &Tolerances) -> Result<Subspace> {
    let n = ensure_square(x, "operator")?;
    let (w, v) = hermitian_eigen(x);
    let lmax = w.last().copied().unwrap_or(0.0);
    if !(lmax > 0.0) {
        return Err(QmsError::InvalidDensity(
            "support of a matrix without positive eigenvalues".into(),
        ));
    }
    let cutoff = tol.rank * lmax;
    let mut frame = Vec::new();
    for k in (0..n).rev() {
        if w[k] > cutoff {
            frame.push(v.column(k).into_owned());
        }
    }
    let mut basis = OrthoBasis::new();
    for f in &frame {
        basis.try_push(f, 0.5);
    }
    Ok(Subspace::from_basis(n, basis))
}

/// Checks `pxp = 0` for a positive `x`.
///
/// When the corner vanishes, the off-diagonal blocks must vanish as well
/// (`x = p⊥xp⊥`); a violation of that conclusion is reported as an
/// inconsistency because it can only come from numerical breakdown.
pub fn corner_vanishing(x: &ComplexMatrix, p: &OrthProjection, tol: &Tolerances) -> Result<bool> {
    ensure_square(x, "operator")?;
    if x.shape() != p.matrix().shape() {
        return Err(QmsError::Dimension("operator and projection differ in size".into()));
    }
    if !is_psd(x, tol)? {
        return Err(QmsError::Precondition("operator is not positive".into()));
    }
    let scale = max_abs(x).max(f64::MIN_POSITIVE);
    let pm = p.matrix();
    let corner = max_abs(&(pm * x * pm)) / scale;
    if corner > tol.eq {
        return Ok(false);
    }
    let q = p.complement();
    let reduced = q.matrix() * x * q.matrix();
    let lemma = max_abs(&(x - reduced)) / scale;
    if lemma > 10.0 * tol.eq.max(corner.sqrt()) {
        return Err(QmsError::Inconsistency(format!(
            "pxp = 0 but x differs from p⊥xp⊥ by {lemma:.3e}"
        )));
    }
    Ok(true)
}

/// `v/‖v‖`.
pub fn normalize(v: &ComplexVector) -> Result<ComplexVector> {
    let n = v.norm();
    if !(n > 0.0) {
        return Err(QmsError::Precondition("zero vector".into()));
    }
    Ok(v / linalg::real(n))
}
