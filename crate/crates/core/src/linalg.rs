//! Dense complex linear algebra shared by every module.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. Storage is column-major, so
//! `vec(X)` is the column-stacked view of `X` and the superoperator identity
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)` holds with [`kron`].

use nalgebra::{DMatrix, DVector, Hessenberg, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{QmsError, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn zeros(n: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(n, n)
}

/// Builds a complex matrix from real row-major entries.
pub fn from_real_rows(rows: &[&[f64]]) -> ComplexMatrix {
    let nr = rows.len();
    let nc = rows.first().map_or(0, |r| r.len());
    ComplexMatrix::from_fn(nr, nc, |i, j| real(rows[i][j]))
}

/// `|e_i⟩⟨e_j|` in dimension `n`.
pub fn matrix_unit(n: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut m = zeros(n);
    m[(i, j)] = ONE;
    m
}

pub fn basis_vector(n: usize, k: usize) -> ComplexVector {
    let mut v = ComplexVector::zeros(n);
    v[k] = ONE;
    v
}

/// `|v⟩⟨w|`.
pub fn outer(v: &ComplexVector, w: &ComplexVector) -> ComplexMatrix {
    v * w.adjoint()
}

/// Largest entry modulus.
pub fn max_abs(a: &ComplexMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn max_abs_vec(a: &ComplexVector) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Spectral (operator) norm.
pub fn op_norm(a: &ComplexMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let sv = SVD::new(a.clone(), false, false).singular_values;
    sv.iter().fold(0.0, |m: f64, &s| m.max(s))
}

pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    SVD::new(a.clone(), false, false)
        .singular_values
        .iter()
        .copied()
        .collect()
}

pub fn all_finite(a: &ComplexMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn hermitian_part(a: &ComplexMatrix) -> ComplexMatrix {
    (a + a.adjoint()) * real(0.5)
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Column-stacking vectorization.
pub fn vec_of(x: &ComplexMatrix) -> ComplexVector {
    ComplexVector::from_column_slice(x.as_slice())
}

/// Inverse of [`vec_of`] for square `n × n` matrices.
pub fn unvec(v: &ComplexVector, n: usize) -> ComplexMatrix {
    debug_assert_eq!(v.len(), n * n);
    ComplexMatrix::from_column_slice(n, n, v.as_slice())
}

/// Hilbert–Schmidt inner product `tr(a* b)` without shape checks.
pub fn hs_dot(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn hs_norm(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthonormal basis (as columns) of the kernel of `a`.
///
/// A right singular vector belongs to the kernel when its singular value is
/// at most `max(rel_tol · σ_max, abs_floor)`. Wide inputs are padded with
/// zero rows so the full right-singular basis is available.
pub fn null_space(a: &ComplexMatrix, rel_tol: f64, abs_floor: f64) -> Result<ComplexMatrix> {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    let padded;
    let m = if rows < cols {
        padded = a.clone().resize_vertically(cols, ZERO);
        &padded
    } else {
        a
    };
    let svd = SVD::try_new(m.clone(), false, true, f64::EPSILON, 0)
        .ok_or_else(|| QmsError::NumericalFailure("SVD did not converge".into()))?;
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| QmsError::NumericalFailure("SVD returned no right vectors".into()))?;
    let sigma_max = svd.singular_values.iter().fold(0.0f64, |m, &s| m.max(s));
    let cutoff = (rel_tol * sigma_max).max(abs_floor);
    let idx: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= cutoff)
        .collect();
    let mut out = ComplexMatrix::zeros(cols, idx.len());
    for (k, &i) in idx.iter().enumerate() {
        for j in 0..cols {
            out[(j, k)] = v_t[(i, j)].conj();
        }
    }
    Ok(out)
}

/// Right singular vector belonging to the smallest singular value.
pub fn smallest_singular_vector(a: &ComplexMatrix) -> Result<(f64, ComplexVector)> {
    let cols = a.ncols();
    let m = if a.nrows() < cols {
        a.clone().resize_vertically(cols, ZERO)
    } else {
        a.clone()
    };
    let svd = SVD::try_new(m, false, true, f64::EPSILON, 0)
        .ok_or_else(|| QmsError::NumericalFailure("SVD did not converge".into()))?;
    let v_t = svd.v_t.as_ref().expect("requested");
    let (i, s) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bs), (i, &s)| if s < bs { (i, s) } else { (bi, bs) });
    let v = ComplexVector::from_fn(cols, |j, _| v_t[(i, j)].conj());
    Ok((s, v))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
///
/// The input is symmetrized first, so tiny round-off asymmetry is harmless.
pub fn hermitian_eigen(a: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), ComplexMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitian_part(a));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

fn abs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// All eigenvalues of a general complex matrix.
///
/// Hessenberg reduction followed by single-shift QR sweeps with Wilkinson
/// shifts and an exceptional shift every tenth stalled iteration. Only the
/// active diagonal window is updated, which is enough for eigenvalues.
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(QmsError::Dimension("eigenvalues of a non-square matrix".into()));
    }
    if !all_finite(a) {
        return Err(QmsError::NumericalFailure("non-finite matrix entries".into()));
    }
    match n {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![a[(0, 0)]]),
        _ => {}
    }
    let mut h = Hessenberg::new(a.clone()).unpack_h();
    let hnorm = hs_norm(&h);
    if hnorm == 0.0 {
        return Ok(vec![ZERO; n]);
    }
    let eps = f64::EPSILON;
    let mut eig = vec![ZERO; n];
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let max_total = 100 * n;

    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            break;
        }
        // Locate the top of the unreduced block ending at `hi`.
        let mut lo = hi;
        while lo > 0 {
            let sub = abs1(h[(lo, lo - 1)]);
            let diag = abs1(h[(lo - 1, lo - 1)]) + abs1(h[(lo, lo)]);
            if sub <= eps * diag || sub <= eps * hnorm {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > max_total {
            return Err(QmsError::NumericalFailure(format!(
                "QR eigenvalue iteration did not converge (n = {n})"
            )));
        }

        let shift = if iter.is_multiple_of(10) {
            h[(hi, hi)] + real(0.75 * abs1(h[(hi, hi - 1)]))
        } else {
            let (p, q, r, s) = (
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            );
            let half_tr = (p + s) * 0.5;
            let disc = ((p - s) * 0.5).powu(2) + q * r;
            let root = disc.sqrt();
            let (m1, m2) = (half_tr + root, half_tr - root);
            if (m1 - s).norm() <= (m2 - s).norm() {
                m1
            } else {
                m2
            }
        };

        for k in lo..=hi {
            h[(k, k)] -= shift;
        }
        let mut rotations = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let x = h[(k, k)];
            let y = h[(k + 1, k)];
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (c, s) = if r == 0.0 { (ONE, ZERO) } else { (x / r, y / r) };
            for j in k..=hi {
                let a1 = h[(k, j)];
                let a2 = h[(k + 1, j)];
                h[(k, j)] = c.conj() * a1 + s.conj() * a2;
                h[(k + 1, j)] = -s * a1 + c * a2;
            }
            rotations.push((c, s));
        }
        for (off, &(c, s)) in rotations.iter().enumerate() {
            let k = lo + off;
            let top = (k + 2).min(hi);
            for i in lo..=top {
                let b1 = h[(i, k)];
                let b2 = h[(i, k + 1)];
                h[(i, k)] = c * b1 + s * b2;
                h[(i, k + 1)] = -s.conj() * b1 + c.conj() * b2;
            }
        }
        for k in lo..=hi {
            h[(k, k)] += shift;
        }
    }
    Ok(eig)
}

/// Unit eigenvector estimate for an eigenvalue `lambda` of `a`.
pub fn eigenvector(a: &ComplexMatrix, lambda: Complex64) -> Result<ComplexVector> {
    let n = a.nrows();
    let shifted = a - ComplexMatrix::identity(n, n) * lambda;
    Ok(smallest_singular_vector(&shifted)?.1)
}

/// Matrix exponential (nalgebra's scaling-and-squaring Padé routine) with
/// shape and finiteness checks.
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.nrows() != a.ncols() {
        return Err(QmsError::Dimension("expm of a non-square matrix".into()));
    }
    if !all_finite(a) {
        return Err(QmsError::NumericalFailure("expm of non-finite matrix".into()));
    }
    if a.nrows() == 0 {
        return Ok(a.clone());
    }
    let r = a.exp();
    if !all_finite(&r) {
        return Err(QmsError::NumericalFailure("expm overflow".into()));
    }
    Ok(r)
}

/// Incrementally built orthonormal basis (classical Gram–Schmidt with one
/// re-orthogonalization pass).
#[derive(Debug, Clone, Default)]
pub struct OrthoBasis {
    vectors: Vec<ComplexVector>,
    // Largest ‖c‖/‖r‖ seen on acceptance; rounding in later residuals scales with it.
    amplification: f64,
}

const NOISE_GUARD: f64 = 100.0;

impl OrthoBasis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[ComplexVector] {
        &self.vectors
    }

    pub fn into_vectors(self) -> Vec<ComplexVector> {
        self.vectors
    }

    /// Component of `c` orthogonal to the current span.
    pub fn residual(&self, c: &ComplexVector) -> ComplexVector {
        let mut r = c.clone();
        for _ in 0..2 {
            for b in &self.vectors {
                let coef = b.dotc(&r);
                r.axpy(-coef, b, ONE);
            }
        }
        r
    }

    /// Adds the normalized residual of `c` when its norm exceeds `threshold`
    /// and the rounding floor implied by earlier acceptances.
    pub fn try_push(&mut self, c: &ComplexVector, threshold: f64) -> bool {
        let r = self.residual(c);
        let nr = r.norm();
        let nc = c.norm();
        let floor = NOISE_GUARD * f64::EPSILON * c.len() as f64 * self.amplification.max(1.0) * nc;
        if nr > threshold && nr > floor && nr.is_finite() {
            self.amplification = self.amplification.max(nc / nr);
            self.vectors.push(r / real(nr));
            true
        } else {
            false
        }
    }

    /// Columns as a matrix (`dim × len`).
    pub fn to_matrix(&self, dim: usize) -> ComplexMatrix {
        if self.vectors.is_empty() {
            return ComplexMatrix::zeros(dim, 0);
        }
        ComplexMatrix::from_columns(&self.vectors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sort_c(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    fn assert_spectrum(got: Vec<Complex64>, want: Vec<Complex64>, tol: f64) {
        let got = sort_c(got);
        let want = sort_c(want);
        assert_eq!(got.len(), want.len());
        // Greedy matching is robust to sort ties between nearby values.
        let mut used = vec![false; want.len()];
        for g in &got {
            let (k, d) = want
                .iter()
                .enumerate()
                .filter(|(k, _)| !used[*k])
                .map(|(k, w)| (k, (g - w).norm()))
                .fold((usize::MAX, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
            assert!(d < tol, "eigenvalue {g} unmatched (closest distance {d}); want {want:?}");
            used[k] = true;
        }
    }

    #[test]
    fn dotc_conjugates_left_argument() {
        let a = ComplexVector::from_vec(vec![I]);
        let b = ComplexVector::from_vec(vec![ONE]);
        assert_eq!(a.dotc(&b), -I);
    }

    #[test]
    fn vec_matches_kronecker_convention() {
        let a = ComplexMatrix::from_fn(3, 3, |i, j| c64(i as f64 + 1.0, j as f64 - 0.5));
        let x = ComplexMatrix::from_fn(3, 3, |i, j| c64((i * j) as f64, 1.0 - i as f64));
        let b = ComplexMatrix::from_fn(3, 3, |i, j| c64(j as f64, (i + j) as f64 * 0.3));
        let lhs = vec_of(&(&a * &x * &b));
        let rhs = kron(&b.transpose(), &a) * vec_of(&x);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn eigenvalues_of_diagonalizable_matrix() {
        // A = V D V⁻¹ with a fixed, well-conditioned V.
        let d = [c64(1.0, 2.0), c64(-3.0, 0.5), c64(0.0, 0.0), c64(0.0, -1.0), c64(2.0, 0.0)];
        let v = ComplexMatrix::from_fn(5, 5, |i, j| {
            if i == j {
                real(2.0)
            } else {
                c64(0.1 * (i as f64 - j as f64), 0.05 * (i + j) as f64)
            }
        });
        let dm = ComplexMatrix::from_diagonal(&ComplexVector::from_row_slice(&d));
        let a = &v * dm * v.clone().try_inverse().unwrap();
        assert_spectrum(eigenvalues(&a).unwrap(), d.to_vec(), 1e-10);
    }

    #[test]
    fn eigenvalues_of_rotation_and_nilpotent() {
        let rot = from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        assert_spectrum(eigenvalues(&rot).unwrap(), vec![I, -I], 1e-12);
        let nil = from_real_rows(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0]]);
        assert_spectrum(eigenvalues(&nil).unwrap(), vec![ZERO; 3], 1e-5);
        assert_eq!(eigenvalues(&zeros(4)).unwrap(), vec![ZERO; 4]);
    }

    #[test]
    fn eigenvalues_agree_with_hermitian_solver() {
        let a = ComplexMatrix::from_fn(6, 6, |i, j| {
            c64(((i * 7 + j * 3) % 5) as f64 - 2.0, ((i + 2 * j) % 3) as f64 - 1.0)
        });
        let h = hermitian_part(&a);
        let (w, _) = hermitian_eigen(&h);
        let want: Vec<Complex64> = w.into_iter().map(real).collect();
        assert_spectrum(eigenvalues(&h).unwrap(), want, 1e-10);
    }

    #[test]
    fn expm_matches_taylor_series_for_small_norm() {
        let a = ComplexMatrix::from_fn(4, 4, |i, j| c64(0.1 * (i as f64 - j as f64), 0.07 * (i * j) as f64));
        let mut term = identity(4);
        let mut sum = identity(4);
        for k in 1..40 {
            term = &term * &a / real(k as f64);
            sum += &term;
        }
        assert!(max_abs(&(expm(&a).unwrap() - sum)) < 1e-14);
    }

    #[test]
    fn expm_of_diagonal_and_semigroup_law() {
        let d = ComplexMatrix::from_diagonal(&ComplexVector::from_row_slice(&[
            c64(-30.0, 4.0),
            c64(0.0, 12.0),
            c64(-0.5, 0.0),
        ]));
        let e = expm(&d).unwrap();
        for k in 0..3 {
            assert!((e[(k, k)] - d[(k, k)].exp()).norm() < 1e-12 * d[(k, k)].exp().norm().max(1e-300));
        }
        let a = ComplexMatrix::from_fn(5, 5, |i, j| c64((i as f64 - j as f64) * 1.7, (i + j) as f64 * 0.9));
        let lhs = expm(&(&a * real(2.0))).unwrap();
        let half = expm(&a).unwrap();
        let rhs = &half * &half;
        assert!(max_abs(&(lhs - &rhs)) < 1e-10 * max_abs(&rhs).max(1.0));
    }

    #[test]
    fn null_space_of_rank_deficient_matrix() {
        let a = from_real_rows(&[&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]]);
        let k = null_space(&a, 1e-10, 0.0).unwrap();
        assert_eq!(k.ncols(), 2);
        assert!(max_abs(&(&a * &k)) < 1e-12);
        let z = null_space(&zeros(3), 1e-10, 0.0).unwrap();
        assert_eq!(z.ncols(), 3);
    }

    #[test]
    fn ortho_basis_rejects_dependent_vectors() {
        let mut b = OrthoBasis::new();
        let v1 = ComplexVector::from_vec(vec![ONE, I, ZERO]);
        let v2 = ComplexVector::from_vec(vec![real(2.0), real(0.0), ONE]);
        assert!(b.try_push(&v1, 1e-10));
        assert!(b.try_push(&v2, 1e-10));
        assert!(!b.try_push(&(&v1 * I + &v2 * real(3.0)), 1e-10));
        assert_eq!(b.len(), 2);
    }
}
