//! Peripheral structure of unital channels `Φ = e^{t₀L}`.

use num_complex::Complex64;
use serde::Serialize;

use crate::analysis;
use crate::dynamics::Evolution;
use crate::error::{QmsError, Result};
use crate::gksl::{GkslModel, Side, Superoperator};
use crate::linalg::{self, identity, max_abs, real, unvec, vec_of, ComplexMatrix};
use crate::operator;
use crate::tolerance::Tolerances;

/// Eigenvalues closer than this are one peripheral eigenvalue.
const CLUSTER_RADIUS: f64 = 1e-6;
/// Phase snapping tolerance, in turns.
const PHASE_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Serialize)]
pub struct PfReport {
    #[serde(serialize_with = "crate::io::serialize_complex_list")]
    pub peripheral_eigenvalues: Vec<Complex64>,
    pub eigenspace_dims: Vec<usize>,
    /// `‖a*a − 1‖∞` for the first eigenvector `a` of each peripheral
    /// eigenvalue, scaled so that `tr(a*a) = n`.
    pub unitary_residuals: Vec<f64>,
    pub group_closure: bool,
    /// Phases as reduced fractions `p/q` of a full turn, when all snap.
    pub phases: Option<Vec<(i64, i64)>>,
    /// Distance of the eigenvalue-1 eigenvector from the scalars (relative).
    pub identity_residual: f64,
    pub unital_residual: f64,
    /// Choi matrix positive semidefinite (diagnostic only).
    pub choi_psd: bool,
    pub irreducible_certified: bool,
    /// Whether the theorem's conclusions hold; only evaluated when
    /// irreducibility is certified.
    pub conclusions_hold: Option<bool>,
}

impl PfReport {
    /// Peripheral set is exactly `{1}` with a one-dimensional eigenspace.
    pub fn is_trivial(&self) -> bool {
        self.peripheral_eigenvalues.len() == 1
            && self.eigenspace_dims == [1]
            && (self.peripheral_eigenvalues[0] - real(1.0)).norm() <= CLUSTER_RADIUS
    }
}

/// Heisenberg map of `T_{t₀}`.
pub fn channel_at(m: &GkslModel, t0: f64) -> Result<Superoperator> {
    if !(t0 > 0.0) || !t0.is_finite() {
        return Err(QmsError::Precondition(format!("t0 must be positive, got {t0}")));
    }
    let p = Evolution::new(m).propagator(Side::Heisenberg, t0)?;
    Superoperator::new(m.dim(), p, Side::Heisenberg)
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Nearest fraction `p/q ∈ [0, 1)` with `q ≤ max_den`.
fn snap_phase(turns: f64, max_den: i64) -> Option<(i64, i64)> {
    let x = turns.rem_euclid(1.0);
    for q in 1..=max_den {
        let p = (x * q as f64).round() as i64;
        if (x - p as f64 / q as f64).abs() <= PHASE_TOL {
            let p = p.rem_euclid(q);
            let g = gcd(p, q).max(1);
            return Some((p / g, q / g));
        }
    }
    None
}

fn closed_under_group_ops(phases: &[(i64, i64)]) -> bool {
    let contains = |(p, q): (i64, i64)| {
        let g = gcd(p, q).max(1);
        phases.contains(&(p / g, q / g))
    };
    phases.iter().all(|&(p1, q1)| {
        contains(((q1 - p1).rem_euclid(q1), q1))
            && phases.iter().all(|&(p2, q2)| {
                let q = q1 * q2;
                contains(((p1 * q2 + p2 * q1).rem_euclid(q), q))
            })
    })
}

fn choi_matrix(phi: &ComplexMatrix, n: usize) -> ComplexMatrix {
    let mut c = ComplexMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            let image = unvec(&(phi * vec_of(&linalg::matrix_unit(n, i, j))), n);
            for a in 0..n {
                for b in 0..n {
                    c[(i * n + a, j * n + b)] = image[(a, b)];
                }
            }
        }
    }
    c
}

/// Peripheral eigenvalues, eigenspaces and their unitary structure.
///
/// With `irreducible_certified` the conclusions (peripheral set a finite
/// group, simple eigenvalues, unitary eigenvectors) are checked and a
/// failure is reported as an inconsistency.
pub fn pf_structure(phi: &Superoperator, tol: &Tolerances, irreducible_certified: bool) -> Result<PfReport> {
    let heis = match phi.side() {
        Side::Heisenberg => phi.clone(),
        Side::Schrodinger => phi.dual(),
    };
    let n = heis.dim();
    let nn = n * n;
    let mat = heis.matrix();
    let id = identity(n);
    let unital_residual = max_abs(&(heis.apply(&id)? - &id));
    if unital_residual > 10.0 * tol.eq {
        return Err(QmsError::InvalidChannel(format!(
            "map is not unital (residual {unital_residual:.3e})"
        )));
    }

    let eigenvalues = linalg::eigenvalues(mat)?;
    let mut peripheral: Vec<Complex64> = eigenvalues
        .into_iter()
        .filter(|z| z.norm() >= 1.0 - tol.spec)
        .collect();
    peripheral.sort_by(|a, b| {
        let key = |z: &Complex64| z.arg().rem_euclid(std::f64::consts::TAU);
        key(a).total_cmp(&key(b))
    });
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    for z in peripheral {
        match groups.iter_mut().find(|g| (g[0] - z).norm() <= CLUSTER_RADIUS) {
            Some(g) => g.push(z),
            None => groups.push(vec![z]),
        }
    }
    if !groups.iter().any(|g| (g[0] - real(1.0)).norm() <= CLUSTER_RADIUS) {
        return Err(QmsError::InvalidChannel("no eigenvalue near 1".into()));
    }

    let mut values = Vec::new();
    let mut dims = Vec::new();
    let mut residuals = Vec::new();
    let mut identity_residual = f64::NAN;
    for g in &groups {
        let mu = g.iter().sum::<Complex64>() / real(g.len() as f64);
        let spread = g.iter().map(|z| (z - mu).norm()).fold(0.0, f64::max);
        let shifted = mat - ComplexMatrix::identity(nn, nn) * mu;
        let kernel = linalg::null_space(&shifted, tol.rank, 2.0 * spread)?;
        dims.push(kernel.ncols());
        values.push(mu);
        if kernel.ncols() == 0 {
            residuals.push(f64::NAN);
            continue;
        }
        let a = unvec(&kernel.column(0).into_owned(), n);
        let norm2 = (a.adjoint() * &a).trace().re;
        let a = &a * real((n as f64 / norm2).sqrt());
        residuals.push(max_abs(&(a.adjoint() * &a - &id)));
        if (mu - real(1.0)).norm() <= CLUSTER_RADIUS {
            let scalar = a.trace() / real(n as f64);
            identity_residual = max_abs(&(&a - &id * scalar)) / max_abs(&a);
        }
    }

    let max_den = (n * n) as i64;
    let phases: Option<Vec<(i64, i64)>> = values
        .iter()
        .map(|z| snap_phase(z.arg() / std::f64::consts::TAU, max_den))
        .collect();
    let group_closure = phases.as_deref().is_some_and(closed_under_group_ops);
    let choi_psd = operator::is_psd(&choi_matrix(mat, n), tol)?;

    let conclusions_hold = irreducible_certified.then(|| {
        group_closure && dims.iter().all(|&d| d == 1) && residuals.iter().all(|&r| r <= 1e-8)
    });
    if conclusions_hold == Some(false) {
        return Err(QmsError::Inconsistency(format!(
            "irreducible channel violates the peripheral structure theorem \
             (dims {dims:?}, residuals {residuals:?}, closure {group_closure})"
        )));
    }
    Ok(PfReport {
        peripheral_eigenvalues: values,
        eigenspace_dims: dims,
        unitary_residuals: residuals,
        group_closure,
        phases,
        identity_residual,
        unital_residual,
        choi_psd,
        irreducible_certified,
        conclusions_hold,
    })
}

/// `pf_structure(channel_at(m, t0))`, certified by the Burnside test.
pub fn pf_report_for_model(m: &GkslModel, t0: f64, tol: &Tolerances) -> Result<PfReport> {
    let irreducible = analysis::irreducibility_criterion(m, tol)?.value;
    pf_structure(&channel_at(m, t0)?, tol, irreducible)
}
