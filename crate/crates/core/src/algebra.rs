//! Linear spans of operators: generated algebras, commutants, cyclic
//! subspaces and iterated-commutator spans.
//!
//! Every span is grown by Gram–Schmidt against an orthonormal basis. A
//! candidate is accepted when its residual exceeds `τ_rank` times an upper
//! bound on its norm (the bound follows from the orthonormality of what
//! produced it), which keeps the rank decision scale-invariant and rejects
//! round-off products of exactly dependent words.

use crate::error::{QmsError, Result};
use crate::linalg::{
    self, hs_norm, identity, kron, max_abs, real, unvec, vec_of, ComplexMatrix, ComplexVector,
    OrthoBasis,
};
use crate::operator::Subspace;
use crate::tolerance::Tolerances;

/// Hilbert–Schmidt orthonormal basis of a subspace of `B(Cⁿ)` with verified
/// structural flags.
#[derive(Debug, Clone)]
pub struct OperatorSpace {
    dim_ambient: usize,
    basis: Vec<ComplexMatrix>,
    ortho: OrthoBasis,
    contains_identity: bool,
    self_adjoint: bool,
    multiplicatively_closed: bool,
}

impl OperatorSpace {
    /// Builds the space from orthonormal vectorized operators and computes
    /// the flags.
    pub(crate) fn from_ortho(n: usize, ortho: OrthoBasis, tol: &Tolerances) -> Self {
        let basis: Vec<ComplexMatrix> = ortho.vectors().iter().map(|v| unvec(v, n)).collect();
        let mut space = OperatorSpace {
            dim_ambient: n,
            basis,
            ortho,
            contains_identity: false,
            self_adjoint: false,
            multiplicatively_closed: false,
        };
        space.compute_flags(tol);
        space
    }

    /// Span of arbitrary operators (dependent directions dropped).
    pub fn span_of(n: usize, ops: &[ComplexMatrix], tol: &Tolerances) -> Result<Self> {
        let mut ortho = OrthoBasis::new();
        for a in ops {
            if a.nrows() != n || a.ncols() != n {
                return Err(QmsError::Dimension(format!(
                    "operator is {}×{}, expected {n}×{n}",
                    a.nrows(),
                    a.ncols()
                )));
            }
            let na = hs_norm(a);
            if na > 0.0 {
                ortho.try_push(&(vec_of(a) / real(na)), tol.rank);
            }
        }
        Ok(Self::from_ortho(n, ortho, tol))
    }

    pub fn zero(n: usize) -> Self {
        Self::from_ortho(n, OrthoBasis::new(), &Tolerances::default())
    }

    pub fn scalars(n: usize) -> Self {
        let mut ortho = OrthoBasis::new();
        ortho.try_push(&vec_of(&(identity(n) / real((n as f64).sqrt()))), 0.5);
        Self::from_ortho(n, ortho, &Tolerances::default())
    }

    pub fn full(n: usize) -> Self {
        let mut ortho = OrthoBasis::new();
        for j in 0..n {
            for i in 0..n {
                ortho.try_push(&vec_of(&linalg::matrix_unit(n, i, j)), 0.5);
            }
        }
        Self::from_ortho(n, ortho, &Tolerances::default())
    }

    fn compute_flags(&mut self, tol: &Tolerances) {
        let n = self.dim_ambient;
        let d = self.dim();
        if d == n * n {
            self.contains_identity = true;
            self.self_adjoint = true;
            self.multiplicatively_closed = true;
            return;
        }
        if d == 0 {
            self.self_adjoint = true;
            self.multiplicatively_closed = true;
            return;
        }
        let thr = 10.0 * tol.eq;
        self.contains_identity = self.membership_residual(&identity(n)) <= thr;
        self.self_adjoint = self
            .basis
            .iter()
            .all(|b| self.membership_residual(&b.adjoint()) <= thr);
        self.multiplicatively_closed = self.basis.iter().all(|a| {
            self.basis
                .iter()
                .all(|b| self.membership_residual(&(a * b)) <= thr)
        });
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn dim_ambient(&self) -> usize {
        self.dim_ambient
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    pub fn contains_identity(&self) -> bool {
        self.contains_identity
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.self_adjoint
    }

    pub fn is_multiplicatively_closed(&self) -> bool {
        self.multiplicatively_closed
    }

    /// Unital and closed under products.
    pub fn is_algebra(&self) -> bool {
        self.contains_identity && self.multiplicatively_closed
    }

    /// `C·1`.
    pub fn is_scalars(&self) -> bool {
        self.dim() == 1 && self.contains_identity
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.dim_ambient * self.dim_ambient
    }

    /// Orthogonal projection of `x` onto the span.
    pub fn project(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let v = vec_of(x);
        let r = self.ortho.residual(&v);
        unvec(&(v - r), self.dim_ambient)
    }

    /// `‖x − Px‖ / ‖x‖` in Hilbert–Schmidt norm (zero for `x = 0`).
    pub fn membership_residual(&self, x: &ComplexMatrix) -> f64 {
        let v = vec_of(x);
        let nv = v.norm();
        if nv == 0.0 {
            return 0.0;
        }
        self.ortho.residual(&v).norm() / nv
    }

    pub fn contains(&self, x: &ComplexMatrix, tol: &Tolerances) -> bool {
        self.membership_residual(x) <= 10.0 * tol.eq
    }

    /// Equal spans (mutual containment).
    pub fn same_span(&self, other: &OperatorSpace, tol: &Tolerances) -> bool {
        self.dim_ambient == other.dim_ambient
            && self.dim() == other.dim()
            && other.basis.iter().all(|b| self.contains(b, tol))
    }
}

fn check_ops(n: usize, ops: &[ComplexMatrix]) -> Result<()> {
    for a in ops {
        if a.nrows() != n || a.ncols() != n {
            return Err(QmsError::Dimension(format!(
                "operator is {}×{}, expected {n}×{n}",
                a.nrows(),
                a.ncols()
            )));
        }
    }
    Ok(())
}

/// Unit-norm copies of the nonzero generators.
fn normalized_generators(ops: &[ComplexMatrix], tol: &Tolerances) -> Vec<ComplexMatrix> {
    let scale = ops.iter().map(hs_norm).fold(0.0, f64::max);
    ops.iter()
        .filter_map(|a| {
            let na = hs_norm(a);
            (na > tol.rank * scale && na > 0.0).then(|| a / real(na))
        })
        .collect()
}

/// Smallest algebra containing `ops` (and the identity when requested).
///
/// Every word `A₁A₂⋯A_k` equals `A₁·(A₂⋯A_k)`, so the span of generators is
/// closed under left multiplication by the generators until the dimension
/// stops growing; at most `n²` rounds are needed.
pub fn generated_algebra(
    n: usize,
    ops: &[ComplexMatrix],
    include_identity: bool,
    tol: &Tolerances,
) -> Result<OperatorSpace> {
    check_ops(n, ops)?;
    let gens = normalized_generators(ops, tol);
    let full = n * n;
    let mut ortho = OrthoBasis::new();
    if include_identity {
        ortho.try_push(&vec_of(&(identity(n) / real((n as f64).sqrt()))), tol.rank);
    }
    for g in &gens {
        ortho.try_push(&vec_of(g), tol.rank);
    }
    // The frontier holds raw unit-norm words, not orthonormalized residuals,
    // so rounding from the Gram-Schmidt step is never multiplied again.
    let mut frontier: Vec<ComplexMatrix> = gens.clone();
    let mut rounds = 0;
    while !frontier.is_empty() && ortho.len() < full {
        rounds += 1;
        debug_assert!(rounds <= full + 1);
        let mut next = Vec::new();
        'outer: for b in &frontier {
            for g in &gens {
                let word = g * b;
                if ortho.try_push(&vec_of(&word), tol.rank) {
                    next.push(unit(word));
                    if ortho.len() == full {
                        break 'outer;
                    }
                }
            }
        }
        frontier = next;
    }
    Ok(OperatorSpace::from_ortho(n, ortho, tol))
}

fn unit(m: ComplexMatrix) -> ComplexMatrix {
    let norm = hs_norm(&m);
    m / real(norm)
}

/// `{x : [x, A] = 0 for all A}` as the kernel of the stacked commutator map.
pub fn commutant(n: usize, ops: &[ComplexMatrix], tol: &Tolerances) -> Result<OperatorSpace> {
    check_ops(n, ops)?;
    let nn = n * n;
    let id = identity(n);
    let active: Vec<&ComplexMatrix> = ops.iter().filter(|a| max_abs(a) > 0.0).collect();
    if active.is_empty() {
        return Ok(OperatorSpace::full(n));
    }
    let mut stacked = ComplexMatrix::zeros(active.len() * nn, nn);
    for (k, a) in active.iter().enumerate() {
        let scale = real(1.0 / hs_norm(a));
        // vec(xA − Ax) = (Aᵀ ⊗ 1 − 1 ⊗ A) vec(x)
        let block = (kron(&a.transpose(), &id) - kron(&id, a)) * scale;
        stacked.view_mut((k * nn, 0), (nn, nn)).copy_from(&block);
    }
    let kernel = linalg::null_space(&stacked, tol.rank, 0.0)?;
    let mut ortho = OrthoBasis::new();
    for j in 0..kernel.ncols() {
        ortho.try_push(&kernel.column(j).into_owned(), 0.5);
    }
    Ok(OperatorSpace::from_ortho(n, ortho, tol))
}

/// Smallest subspace containing `v` and invariant under every operator.
pub fn orbit_subspace(ops: &[ComplexMatrix], v: &ComplexVector, tol: &Tolerances) -> Result<Subspace> {
    let n = v.len();
    check_ops(n, ops)?;
    let nv = v.norm();
    if !(nv > 0.0) {
        return Err(QmsError::Precondition("orbit of the zero vector".into()));
    }
    let bounds: Vec<f64> = ops.iter().map(hs_norm).collect();
    let mut basis = OrthoBasis::new();
    basis.try_push(&(v / real(nv)), 0.5);
    let mut frontier = vec![v / real(nv)];
    while !frontier.is_empty() && basis.len() < n {
        let mut next = Vec::new();
        for w in &frontier {
            for (a, &bound) in ops.iter().zip(&bounds) {
                if bound == 0.0 {
                    continue;
                }
                let image = a * w;
                if basis.try_push(&image, tol.rank * bound) {
                    let norm = image.norm();
                    next.push(image / real(norm));
                }
            }
        }
        frontier = next;
    }
    Ok(Subspace::from_basis(n, basis))
}

/// Orthonormal spanning set of `span{ad_A^m(X) : X ∈ seeds, m ≥ 0}`.
pub fn iterated_commutator_span(
    a: &ComplexMatrix,
    seeds: &[ComplexMatrix],
    tol: &Tolerances,
) -> Result<Vec<ComplexMatrix>> {
    let n = a.nrows();
    check_ops(n, std::slice::from_ref(a))?;
    check_ops(n, seeds)?;
    let mut ortho = OrthoBasis::new();
    let mut frontier = Vec::new();
    for s in normalized_generators(seeds, tol) {
        if ortho.try_push(&vec_of(&s), tol.rank) {
            frontier.push(s);
        }
    }
    let bound = 2.0 * hs_norm(a);
    if bound > 0.0 {
        while !frontier.is_empty() && ortho.len() < n * n {
            let mut next = Vec::new();
            for b in &frontier {
                let c = a * b - b * a;
                if ortho.try_push(&vec_of(&c), tol.rank * bound) {
                    next.push(unit(c));
                }
            }
            frontier = next;
        }
    }
    Ok(ortho.vectors().iter().map(|v| unvec(v, n)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis_vector, c64, from_real_rows, matrix_unit, ONE};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn sx() -> ComplexMatrix {
        from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }
    fn sz() -> ComplexMatrix {
        from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
    }
    fn shift3() -> ComplexMatrix {
        from_real_rows(&[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]])
    }

    #[test]
    fn generated_algebra_examples() {
        let t = tol();
        let nil = generated_algebra(2, &[matrix_unit(2, 0, 1)], false, &t).unwrap();
        assert_eq!(nil.dim(), 1);
        assert!(nil.is_multiplicatively_closed());
        assert!(!nil.contains_identity());

        let z = generated_algebra(2, &[sz()], false, &t).unwrap();
        assert_eq!(z.dim(), 2);
        assert!(z.contains_identity());

        let s = shift3();
        let bd = generated_algebra(3, &[s.clone(), s.adjoint()], true, &t).unwrap();
        assert_eq!(bd.dim(), 9);
        assert!(bd.is_full());

        let empty = generated_algebra(3, &[], false, &t).unwrap();
        assert_eq!(empty.dim(), 0);
        assert_eq!(generated_algebra(3, &[], true, &t).unwrap().dim(), 1);
    }

    #[test]
    fn commutant_examples() {
        let t = tol();
        assert_eq!(commutant(3, &[identity(3)], &t).unwrap().dim(), 9);
        let c = commutant(2, &[sz()], &t).unwrap();
        assert_eq!(c.dim(), 2);
        assert!(c.contains(&sz(), &t) && c.contains(&identity(2), &t));
        assert!(!c.contains(&sx(), &t));
        let c = commutant(2, &[sx(), sz()], &t).unwrap();
        assert!(c.is_scalars());
        assert!(commutant(2, &[], &t).unwrap().is_full());
    }

    #[test]
    fn orbit_examples() {
        let t = tol();
        // AD2: G = −½|e₁⟩⟨e₁|, σ₋ = |e₀⟩⟨e₁|.
        let g = matrix_unit(2, 1, 1) * real(-0.5);
        let sm = matrix_unit(2, 0, 1);
        let ops = [g, sm];
        let o = orbit_subspace(&ops, &basis_vector(2, 0), &t).unwrap();
        assert_eq!(o.dim(), 1);
        assert!(o.relative_distance(&basis_vector(2, 0)) < 1e-15);
        assert!(orbit_subspace(&ops, &basis_vector(2, 1), &t).unwrap().is_full());
        let v = ComplexVector::from_vec(vec![c64(0.3, 0.1), c64(-1.0, 2.0), ONE]);
        let o = orbit_subspace(&[], &v, &t).unwrap();
        assert_eq!(o.dim(), 1);
        assert!(o.relative_distance(&v) < 1e-15);
        assert!(matches!(
            orbit_subspace(&[], &ComplexVector::zeros(2), &t),
            Err(QmsError::Precondition(_))
        ));
    }

    #[test]
    fn commutator_span_examples() {
        let t = tol();
        assert_eq!(iterated_commutator_span(&linalg::zeros(2), &[sx()], &t).unwrap().len(), 1);
        let sm = matrix_unit(2, 0, 1);
        assert_eq!(iterated_commutator_span(&sz(), &[sm], &t).unwrap().len(), 1);
        assert_eq!(iterated_commutator_span(&sx(), &[sz()], &t).unwrap().len(), 2);
    }

    #[test]
    fn projection_onto_space() {
        let t = tol();
        let c = commutant(2, &[sz()], &t).unwrap();
        let x = from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let px = c.project(&x);
        assert!(max_abs(&(px - from_real_rows(&[&[1.0, 0.0], &[0.0, 4.0]]))) < 1e-14);
    }
}
