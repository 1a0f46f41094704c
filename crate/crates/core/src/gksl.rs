//! GKSL generators: construction, application in both pictures,
//! vectorization and representation changes.
//!
//! A model is the data `(H, {L_ℓ})` together with the derived drift
//! `G = −iH − ½ Σ L_ℓ* L_ℓ`. The Heisenberg generator is
//!
//! ```text
//! L(x)  = G* x + x G + Σ L_ℓ* x L_ℓ
//! ```
//!
//! and the Schrödinger (predual) generator is
//!
//! ```text
//! L*(η) = G η + η G* + Σ L_ℓ η L_ℓ*
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QmsError, Result};
use crate::linalg::{self, identity, kron, max_abs, op_norm, real, unvec, vec_of, ComplexMatrix, I};
use crate::tolerance::Tolerances;

/// Hamiltonian, jump operators and derived drift of a GKSL generator.
#[derive(Debug, Clone, PartialEq)]
pub struct GkslModel {
    dim: usize,
    hamiltonian: ComplexMatrix,
    jumps: Vec<ComplexMatrix>,
    drift: ComplexMatrix,
}

/// Which picture a superoperator acts in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Heisenberg,
    Schrodinger,
}

/// An `n² × n²` matrix acting on column-stacked `n × n` operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: ComplexMatrix,
    side: Side,
}

impl Superoperator {
    pub fn new(dim: usize, matrix: ComplexMatrix, side: Side) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(QmsError::Dimension(format!(
                "superoperator on {dim}×{dim} operators must be {0}×{0}",
                dim * dim
            )));
        }
        Ok(Superoperator { dim, matrix, side })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.nrows() != self.dim || x.ncols() != self.dim {
            return Err(QmsError::Dimension(format!(
                "operator is {}×{}, superoperator acts on {}×{}",
                x.nrows(),
                x.ncols(),
                self.dim,
                self.dim
            )));
        }
        Ok(unvec(&(&self.matrix * vec_of(x)), self.dim))
    }

    /// The other picture: the Hilbert–Schmidt adjoint.
    pub fn dual(&self) -> Superoperator {
        Superoperator {
            dim: self.dim,
            matrix: self.matrix.adjoint(),
            side: match self.side {
                Side::Heisenberg => Side::Schrodinger,
                Side::Schrodinger => Side::Heisenberg,
            },
        }
    }

    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        linalg::eigenvalues(&self.matrix)
    }
}

fn check_dim(x: &ComplexMatrix, n: usize, what: &str) -> Result<()> {
    if x.nrows() != n || x.ncols() != n {
        return Err(QmsError::Dimension(format!(
            "{what} is {}×{}, expected {n}×{n}",
            x.nrows(),
            x.ncols()
        )));
    }
    Ok(())
}

/// Builds and validates a model from `H` and the jump operators.
pub fn build_model(
    hamiltonian: ComplexMatrix,
    jumps: Vec<ComplexMatrix>,
    tol: &Tolerances,
) -> Result<GkslModel> {
    let n = hamiltonian.nrows();
    if n == 0 {
        return Err(QmsError::Dimension("empty Hamiltonian".into()));
    }
    check_dim(&hamiltonian, n, "H")?;
    for (k, l) in jumps.iter().enumerate() {
        check_dim(l, n, &format!("L[{k}]"))?;
    }
    if !linalg::all_finite(&hamiltonian) || !jumps.iter().all(linalg::all_finite) {
        return Err(QmsError::Validation {
            what: "non-finite matrix entries".into(),
            residual: f64::NAN,
        });
    }
    let herm = max_abs(&(&hamiltonian - hamiltonian.adjoint()));
    if herm > tol.eq * max_abs(&hamiltonian).max(1.0) {
        return Err(QmsError::Validation {
            what: "H is not Hermitian".into(),
            residual: herm,
        });
    }
    let hamiltonian = linalg::hermitian_part(&hamiltonian);
    let mut dissipation = ComplexMatrix::zeros(n, n);
    for l in &jumps {
        dissipation += l.adjoint() * l;
    }
    let drift = &hamiltonian * (-I) - dissipation * real(0.5);
    let model = GkslModel {
        dim: n,
        hamiltonian,
        jumps,
        drift,
    };
    let res = model.unitality_residual();
    if res > tol.eq * (1.0 + max_abs(&model.drift)) {
        return Err(QmsError::Validation {
            what: "G* + G + Σ L*L ≠ 0".into(),
            residual: res,
        });
    }
    Ok(model)
}

impl GkslModel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[ComplexMatrix] {
        &self.jumps
    }

    /// `G = −iH − ½ Σ L*L`.
    pub fn drift(&self) -> &ComplexMatrix {
        &self.drift
    }

    /// `‖G* + G + Σ L*L‖` (max entry).
    pub fn unitality_residual(&self) -> f64 {
        let mut r = self.drift.adjoint() + &self.drift;
        for l in &self.jumps {
            r += l.adjoint() * l;
        }
        max_abs(&r)
    }

    /// `{G} ∪ {L_ℓ}`, the operators whose common invariant subspaces decide
    /// reducibility.
    pub fn drift_and_jumps(&self) -> Vec<ComplexMatrix> {
        std::iter::once(self.drift.clone())
            .chain(self.jumps.iter().cloned())
            .collect()
    }

    /// Upper bound on the operator norm of the generator,
    /// `2‖G‖ + Σ ‖L_ℓ‖²`.
    pub fn generator_scale(&self) -> f64 {
        2.0 * op_norm(&self.drift) + self.jumps.iter().map(|l| op_norm(l).powi(2)).sum::<f64>()
    }
}

/// Heisenberg generator `L(x)`.
pub fn apply_generator(m: &GkslModel, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_dim(x, m.dim, "x")?;
    let g = &m.drift;
    let mut out = g.adjoint() * x + x * g;
    for l in &m.jumps {
        out += l.adjoint() * x * l;
    }
    Ok(out)
}

/// Schrödinger generator `L*(η)`.
pub fn apply_predual(m: &GkslModel, eta: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_dim(eta, m.dim, "η")?;
    let g = &m.drift;
    let mut out = g * eta + eta * g.adjoint();
    for l in &m.jumps {
        out += l * eta * l.adjoint();
    }
    Ok(out)
}

/// Matrix of the generator in the column-stacking convention
/// `vec(AXB) = (Bᵀ ⊗ A) vec(X)`.
pub fn vectorize(m: &GkslModel, side: Side) -> Superoperator {
    let n = m.dim;
    let id = identity(n);
    let g = &m.drift;
    let matrix = match side {
        Side::Heisenberg => {
            let mut s = kron(&id, &g.adjoint()) + kron(&g.transpose(), &id);
            for l in &m.jumps {
                s += kron(&l.transpose(), &l.adjoint());
            }
            s
        }
        Side::Schrodinger => {
            let mut s = kron(&id, g) + kron(&g.conjugate(), &id);
            for l in &m.jumps {
                s += kron(&l.conjugate(), l);
            }
            s
        }
    };
    Superoperator {
        dim: n,
        matrix,
        side,
    }
}

/// A change of representation that leaves the generator unchanged.
#[derive(Debug, Clone, PartialEq)]
pub enum GaugeTransform {
    /// `L_ℓ' = Σ_j u_{ℓj} L_j` with `u` unitary.
    Mixing(ComplexMatrix),
    /// `L_ℓ' = L_ℓ + c_ℓ`, `H' = H − (i/2) Σ (c̄_ℓ L_ℓ − c_ℓ L_ℓ*) + r`.
    Shift { shifts: Vec<Complex64>, energy: f64 },
}

pub fn gauge_transform(m: &GkslModel, gauge: &GaugeTransform, tol: &Tolerances) -> Result<GkslModel> {
    let n = m.dim;
    let k = m.jumps.len();
    match gauge {
        GaugeTransform::Mixing(u) => {
            if u.nrows() != k || u.ncols() != k {
                return Err(QmsError::Dimension(format!(
                    "mixing matrix must be {k}×{k} for {k} jump operators"
                )));
            }
            let res = max_abs(&(u.adjoint() * u - identity(k)));
            if res > tol.eq * 10.0 {
                return Err(QmsError::Validation {
                    what: "mixing matrix is not unitary".into(),
                    residual: res,
                });
            }
            let jumps = (0..k)
                .map(|row| {
                    let mut acc = ComplexMatrix::zeros(n, n);
                    for (j, l) in m.jumps.iter().enumerate() {
                        acc += l * u[(row, j)];
                    }
                    acc
                })
                .collect();
            build_model(m.hamiltonian.clone(), jumps, tol)
        }
        GaugeTransform::Shift { shifts, energy } => {
            if shifts.len() != k {
                return Err(QmsError::Dimension(format!(
                    "{} shifts supplied for {k} jump operators",
                    shifts.len()
                )));
            }
            let id = identity(n);
            let mut h = m.hamiltonian.clone() + &id * real(*energy);
            let mut jumps = Vec::with_capacity(k);
            for (l, &c) in m.jumps.iter().zip(shifts) {
                let correction = l * c.conj() - l.adjoint() * c;
                h -= correction * (I * 0.5);
                jumps.push(l + &id * c);
            }
            build_model(h, jumps, tol)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, from_real_rows, matrix_unit, zeros, ONE, ZERO};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn sigma_minus() -> ComplexMatrix {
        matrix_unit(2, 0, 1)
    }

    fn sigma_z() -> ComplexMatrix {
        from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
    }

    fn shift3() -> ComplexMatrix {
        // S e_k = e_{k+1}, S e_2 = 0
        from_real_rows(&[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]])
    }

    fn bd3() -> GkslModel {
        build_model(zeros(3), vec![shift3(), shift3().adjoint()], &tol()).unwrap()
    }

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn zero_model_has_zero_drift_and_generator() {
        let m = build_model(zeros(2), vec![], &tol()).unwrap();
        assert_eq!(m.drift(), &zeros(2));
        assert_eq!(vectorize(&m, Side::Heisenberg).matrix(), &zeros(4));
        assert_eq!(vectorize(&m, Side::Schrodinger).matrix(), &zeros(4));
    }

    #[test]
    fn amplitude_damping_drift() {
        let m = build_model(zeros(2), vec![sigma_minus()], &tol()).unwrap();
        let want = matrix_unit(2, 1, 1) * real(-0.5);
        assert!(max_abs(&(m.drift() - want)) < 1e-15);
    }

    #[test]
    fn birth_death_drift_matches_truncated_chain() {
        // Interior entry −1 as on the infinite chain; boundaries −½.
        let m = bd3();
        let want = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            real(-0.5),
            real(-1.0),
            real(-0.5),
        ]));
        assert!(max_abs(&(m.drift() - want)) < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian_hamiltonian() {
        let h = matrix_unit(2, 0, 1);
        match build_model(h, vec![], &tol()) {
            Err(QmsError::Validation { residual, .. }) => assert_eq!(residual, 1.0),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            build_model(zeros(2), vec![zeros(3)], &tol()),
            Err(QmsError::Dimension(_))
        ));
    }

    #[test]
    fn generator_examples() {
        let dp2 = build_model(zeros(2), vec![sigma_z()], &tol()).unwrap();
        let u2 = build_model(sigma_z(), vec![], &tol()).unwrap();
        let e01 = matrix_unit(2, 0, 1);
        assert!(max_abs(&apply_generator(&dp2, &identity(2)).unwrap()) < 1e-15);
        assert!(max_abs(&(apply_generator(&dp2, &e01).unwrap() - &e01 * real(-2.0))) < 1e-15);
        assert!(max_abs(&(apply_generator(&u2, &e01).unwrap() - &e01 * c64(0.0, 2.0))) < 1e-15);
        assert!(apply_generator(&dp2, &identity(3)).is_err());
    }

    #[test]
    fn predual_examples() {
        let ad2 = build_model(zeros(2), vec![sigma_minus()], &tol()).unwrap();
        let ground = matrix_unit(2, 0, 0);
        assert!(max_abs(&apply_predual(&ad2, &ground).unwrap()) < 1e-15);
        let mixed = identity(3) / real(3.0);
        assert!(max_abs(&apply_predual(&bd3(), &mixed).unwrap()) < 1e-15);
        assert_eq!(apply_predual(&bd3(), &zeros(3)).unwrap(), zeros(3));
    }

    #[test]
    fn vectorized_spectra() {
        let dp2 = build_model(zeros(2), vec![sigma_z()], &tol()).unwrap();
        let u2 = build_model(sigma_z(), vec![], &tol()).unwrap();
        for side in [Side::Heisenberg, Side::Schrodinger] {
            let ev = sorted(vectorize(&dp2, side).eigenvalues().unwrap());
            let want = [real(-2.0), real(-2.0), ZERO, ZERO];
            for (a, b) in ev.iter().zip(want.iter()) {
                assert!((a - b).norm() < 1e-12, "{ev:?}");
            }
            let ev = sorted(vectorize(&u2, side).eigenvalues().unwrap());
            let want = sorted(vec![ZERO, ZERO, c64(0.0, 2.0), c64(0.0, -2.0)]);
            for (a, b) in ev.iter().zip(want.iter()) {
                assert!((a - b).norm() < 1e-12, "{ev:?}");
            }
        }
    }

    #[test]
    fn vectorization_agrees_with_direct_application() {
        let m = bd3();
        let x = ComplexMatrix::from_fn(3, 3, |i, j| c64(i as f64 - 0.3 * j as f64, (i * j) as f64));
        let heis = vectorize(&m, Side::Heisenberg);
        let schr = vectorize(&m, Side::Schrodinger);
        assert!(max_abs(&(heis.apply(&x).unwrap() - apply_generator(&m, &x).unwrap())) < 1e-13);
        assert!(max_abs(&(schr.apply(&x).unwrap() - apply_predual(&m, &x).unwrap())) < 1e-13);
        assert!(max_abs(&(schr.matrix() - heis.dual().matrix())) < 1e-15);
    }

    #[test]
    fn gauge_identity_mixing_is_noop() {
        let m = bd3();
        let same = gauge_transform(&m, &GaugeTransform::Mixing(identity(2)), &tol()).unwrap();
        assert_eq!(same, m);
    }

    #[test]
    fn gauge_hadamard_mixing_and_shift_preserve_generator() {
        let m = bd3();
        let s = 1.0 / 2f64.sqrt();
        let had = from_real_rows(&[&[s, s], &[s, -s]]);
        let mixed = gauge_transform(&m, &GaugeTransform::Mixing(had), &tol()).unwrap();
        let diff = vectorize(&m, Side::Heisenberg).matrix() - vectorize(&mixed, Side::Heisenberg).matrix();
        assert!(max_abs(&diff) < 1e-10);

        let ad2 = build_model(zeros(2), vec![sigma_minus()], &tol()).unwrap();
        let shifted = gauge_transform(
            &ad2,
            &GaugeTransform::Shift {
                shifts: vec![ONE],
                energy: 0.0,
            },
            &tol(),
        )
        .unwrap();
        for side in [Side::Heisenberg, Side::Schrodinger] {
            let diff = vectorize(&ad2, side).matrix() - vectorize(&shifted, side).matrix();
            assert!(max_abs(&diff) < 1e-10);
        }
        assert!(max_abs(&(&shifted.jumps()[0] - (sigma_minus() + identity(2)))) < 1e-15);
    }

    #[test]
    fn gauge_rejects_non_unitary_mixing() {
        let m = bd3();
        let bad = from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!(matches!(
            gauge_transform(&m, &GaugeTransform::Mixing(bad), &tol()),
            Err(QmsError::Validation { .. })
        ));
    }
}
