//! Semigroup evolution through exact matrix exponentials of the vectorized
//! generator, Cesàro means and relaxation profiles.

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis;
use crate::error::{QmsError, Result};
use crate::gksl::{vectorize, GkslModel, Side};
use crate::linalg::{expm, hermitian_part, real, unvec, vec_of, ComplexMatrix, ComplexVector};
use crate::operator::{self, Density, Subspace};
use crate::tolerance::Tolerances;

/// Trace distances `‖T_{*t}(η) − target‖₁` (raw trace norm, no ½) on a grid.
#[derive(Debug, Clone, Serialize)]
pub struct RelaxationProfile {
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
    #[serde(serialize_with = "crate::io::serialize_density")]
    pub target: Density,
}

fn check_time(t: f64, strict: bool) -> Result<()> {
    let ok = if strict { t > 0.0 } else { t >= 0.0 };
    if !ok || !t.is_finite() {
        let bound = if strict { "t > 0" } else { "t ≥ 0" };
        return Err(QmsError::Precondition(format!("time must satisfy {bound}, got {t}")));
    }
    Ok(())
}

fn check_dim(m: &GkslModel, n: usize) -> Result<()> {
    if m.dim() != n {
        return Err(QmsError::Dimension(format!(
            "operator of size {n} for a model of dimension {}",
            m.dim()
        )));
    }
    Ok(())
}

/// Validates an evolved state, turning tolerance violations into
/// numerical failures.
fn as_density(x: ComplexMatrix, tol: &Tolerances) -> Result<Density> {
    Density::new(hermitian_part(&x), tol)
        .map_err(|e| QmsError::NumericalFailure(format!("evolved state left the state space: {e}")))
}

/// Vectorized generators of a model, cached for repeated evolution.
#[derive(Debug, Clone)]
pub struct Evolution {
    dim: usize,
    heisenberg: ComplexMatrix,
    schrodinger: ComplexMatrix,
    scale: f64,
}

impl Evolution {
    pub fn new(m: &GkslModel) -> Self {
        Evolution {
            dim: m.dim(),
            heisenberg: vectorize(m, Side::Heisenberg).matrix().clone(),
            schrodinger: vectorize(m, Side::Schrodinger).matrix().clone(),
            scale: m.generator_scale(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `e^{t M}` for the chosen picture.
    pub fn propagator(&self, side: Side, t: f64) -> Result<ComplexMatrix> {
        check_time(t, false)?;
        let m = match side {
            Side::Heisenberg => &self.heisenberg,
            Side::Schrodinger => &self.schrodinger,
        };
        expm(&(m * real(t)))
    }

    pub fn state(&self, eta: &Density, t: f64, tol: &Tolerances) -> Result<Density> {
        if eta.dim() != self.dim {
            return Err(QmsError::Dimension("state and model differ in size".into()));
        }
        check_time(t, false)?;
        if t == 0.0 {
            return Ok(eta.clone());
        }
        let v = self.propagator(Side::Schrodinger, t)? * vec_of(eta.matrix());
        as_density(unvec(&v, self.dim), tol)
    }

    pub fn observable(&self, x: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
        if x.nrows() != self.dim || x.ncols() != self.dim {
            return Err(QmsError::Dimension("observable and model differ in size".into()));
        }
        check_time(t, false)?;
        if t == 0.0 {
            return Ok(x.clone());
        }
        let v = self.propagator(Side::Heisenberg, t)? * vec_of(x);
        Ok(unvec(&v, self.dim))
    }

    /// `max(64, 8·t·‖L‖)` grid intervals.
    pub fn default_steps(&self, t: f64) -> usize {
        let s = (8.0 * t * self.scale).ceil();
        if s.is_finite() {
            (s as usize).max(64)
        } else {
            64
        }
    }

    /// Trapezoidal `t⁻¹∫₀ᵗ e^{sM} v ds` with `steps` intervals.
    fn trapezoid(&self, side: Side, v0: ComplexVector, t: f64, steps: usize) -> Result<ComplexVector> {
        check_time(t, true)?;
        if steps < 2 {
            return Err(QmsError::Precondition(format!("need at least 2 steps, got {steps}")));
        }
        let h = t / steps as f64;
        let step = self.propagator(side, h)?;
        let mut acc = &v0 * real(0.5);
        let mut v = v0;
        for k in 1..=steps {
            v = &step * v;
            let w = if k == steps { 0.5 } else { 1.0 };
            acc.axpy(real(w), &v, real(1.0));
        }
        Ok(acc / real(steps as f64))
    }

    pub fn cesaro_state(
        &self,
        eta: &Density,
        t: f64,
        steps: Option<usize>,
        tol: &Tolerances,
    ) -> Result<Density> {
        if eta.dim() != self.dim {
            return Err(QmsError::Dimension("state and model differ in size".into()));
        }
        let steps = steps.unwrap_or_else(|| self.default_steps(t));
        let v = self.trapezoid(Side::Schrodinger, vec_of(eta.matrix()), t, steps)?;
        as_density(unvec(&v, self.dim), tol)
    }

    pub fn cesaro_observable(&self, x: &ComplexMatrix, t: f64, steps: Option<usize>) -> Result<ComplexMatrix> {
        if x.nrows() != self.dim || x.ncols() != self.dim {
            return Err(QmsError::Dimension("observable and model differ in size".into()));
        }
        let steps = steps.unwrap_or_else(|| self.default_steps(t));
        let v = self.trapezoid(Side::Heisenberg, vec_of(x), t, steps)?;
        Ok(unvec(&v, self.dim))
    }
}

pub fn evolve_state(m: &GkslModel, eta: &Density, t: f64, tol: &Tolerances) -> Result<Density> {
    check_dim(m, eta.dim())?;
    Evolution::new(m).state(eta, t, tol)
}

pub fn evolve_observable(m: &GkslModel, x: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    check_dim(m, x.nrows())?;
    Evolution::new(m).observable(x, t)
}

/// Time average of the evolved state; `steps = None` picks the default grid.
pub fn cesaro_mean(
    m: &GkslModel,
    eta: &Density,
    t: f64,
    steps: Option<usize>,
    tol: &Tolerances,
) -> Result<Density> {
    check_dim(m, eta.dim())?;
    Evolution::new(m).cesaro_state(eta, t, steps, tol)
}

/// Time average of the evolved observable.
pub fn cesaro_mean_observable(
    m: &GkslModel,
    x: &ComplexMatrix,
    t: f64,
    steps: Option<usize>,
) -> Result<ComplexMatrix> {
    check_dim(m, x.nrows())?;
    Evolution::new(m).cesaro_observable(x, t, steps)
}

/// Distances to `target` (default: the extracted invariant density).
pub fn relaxation_profile(
    m: &GkslModel,
    eta: &Density,
    times: &[f64],
    target: Option<&Density>,
    tol: &Tolerances,
) -> Result<RelaxationProfile> {
    check_dim(m, eta.dim())?;
    for &t in times {
        check_time(t, false)?;
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(QmsError::Precondition("time grid must be sorted".into()));
    }
    let target = match target {
        Some(t) => {
            check_dim(m, t.dim())?;
            t.clone()
        }
        None => analysis::invariant_density_space(m, tol)
            .map_err(|e| QmsError::Precondition(format!("no target given and none extractable: {e}")))?
            .1,
    };
    let evo = Evolution::new(m);
    let distances = times
        .par_iter()
        .map(|&t| evo.state(eta, t, tol).map(|s| s.trace_distance(&target)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(RelaxationProfile {
        times: times.to_vec(),
        distances,
        target,
    })
}

/// Support of `T_{*t}(|ψ⟩⟨ψ|)` read off the evolved matrix.
pub fn numerical_support_oracle(
    m: &GkslModel,
    psi: &ComplexVector,
    t: f64,
    tol: &Tolerances,
) -> Result<Subspace> {
    check_time(t, true)?;
    check_dim(m, psi.len())?;
    let rho = Density::pure(psi)?;
    let evolved = evolve_state(m, &rho, t, tol)?;
    operator::support_subspace(evolved.matrix(), tol)
}

/// `P_t = e^{tG}`.
pub fn contraction_semigroup(m: &GkslModel, t: f64) -> Result<ComplexMatrix> {
    check_time(t, false)?;
    expm(&(m.drift() * real(t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis_vector, c64, from_real_rows, identity, max_abs, op_norm, outer};
    use crate::models::{plus_state, random_density, random_gksl, rng_from_seed, standard_fixture};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn sx() -> ComplexMatrix {
        from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    fn sy() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(0.0, -1.0), c64(0.0, 1.0), c64(0.0, 0.0)])
    }

    #[test]
    fn state_evolution_examples() {
        let t = tol();
        let dp2 = standard_fixture("DP2").unwrap();
        let plus = Density::pure(&plus_state()).unwrap();
        assert_eq!(evolve_state(&dp2, &plus, 0.0, &t).unwrap(), plus);
        for &time in &[0.3, 1.0, 2.5] {
            let s = evolve_state(&dp2, &plus, time, &t).unwrap();
            let m = s.matrix();
            assert!((m[(0, 1)].re - 0.5 * (-2.0 * time).exp()).abs() < 1e-14);
            assert!((m[(0, 0)].re - 0.5).abs() < 1e-14);
        }
        let ad2 = standard_fixture("AD2").unwrap();
        let excited = Density::pure(&basis_vector(2, 1)).unwrap();
        let ground = Density::pure(&basis_vector(2, 0)).unwrap();
        let s = evolve_state(&ad2, &excited, 20.0, &t).unwrap();
        assert!(s.trace_distance(&ground) < 1e-8);
        assert!(matches!(evolve_state(&ad2, &ground, -1.0, &t), Err(QmsError::Precondition(_))));
    }

    #[test]
    fn semigroup_law_and_contraction() {
        let t = tol();
        let mut rng = rng_from_seed(1);
        for seed in 0..5 {
            let m = random_gksl(3, 2, seed).unwrap();
            let a = random_density(3, &mut rng);
            let b = random_density(3, &mut rng);
            let two = evolve_state(&m, &evolve_state(&m, &a, 0.4, &t).unwrap(), 0.9, &t).unwrap();
            let one = evolve_state(&m, &a, 1.3, &t).unwrap();
            assert!(max_abs(&(two.matrix() - one.matrix())) < 10.0 * t.eq);
            let before = a.trace_distance(&b);
            let after = evolve_state(&m, &a, 0.7, &t)
                .unwrap()
                .trace_distance(&evolve_state(&m, &b, 0.7, &t).unwrap());
            assert!(after <= before + 10.0 * t.eq);
            assert!(one.min_eigenvalue() >= -t.psd);
        }
    }

    #[test]
    fn observable_examples() {
        let dp2 = standard_fixture("DP2").unwrap();
        let x = evolve_observable(&dp2, &sx(), 1.0).unwrap();
        assert!(max_abs(&(x - sx() * real((-2.0f64).exp()))) < 1e-14);
        let u2 = standard_fixture("U2").unwrap();
        for &time in &[0.2, 1.0, 3.0] {
            let x = evolve_observable(&u2, &sx(), time).unwrap();
            assert!(max_abs(&(&x - x.adjoint())) < 1e-14);
            assert!((op_norm(&x) - 1.0).abs() < 1e-12);
            // e^{iσ_z t} σ_x e^{−iσ_z t} = cos(2t) σ_x − sin(2t) σ_y
            let expected = sx() * real((2.0 * time).cos()) - sy() * real((2.0 * time).sin());
            assert!(max_abs(&(x - expected)) < 1e-13);
        }
        let m = random_gksl(3, 2, 4).unwrap();
        let one = evolve_observable(&m, &identity(3), 2.0).unwrap();
        assert!(max_abs(&(one - identity(3))) < 1e-12);
    }

    #[test]
    fn duality_and_schwarz() {
        let t = tol();
        let m = random_gksl(3, 2, 9).unwrap();
        let mut rng = rng_from_seed(2);
        let rho = random_density(3, &mut rng);
        let x = crate::models::ginibre(3, 3, &mut rng);
        let time = 0.8;
        let lhs = (evolve_state(&m, &rho, time, &t).unwrap().matrix() * &x).trace();
        let rhs = (rho.matrix() * evolve_observable(&m, &x, time).unwrap()).trace();
        assert!((lhs - rhs).norm() < 1e-12);
        let tx = evolve_observable(&m, &x, time).unwrap();
        let txx = evolve_observable(&m, &(x.adjoint() * &x), time).unwrap();
        let gap = txx - tx.adjoint() * &tx;
        assert!(operator::is_psd(&gap, &t).unwrap());
    }

    #[test]
    fn cesaro_examples() {
        let t = tol();
        let ad2 = standard_fixture("AD2").unwrap();
        let ground = Density::pure(&basis_vector(2, 0)).unwrap();
        let c = cesaro_mean(&ad2, &ground, 7.0, Some(10), &t).unwrap();
        assert!(c.trace_distance(&ground) < 1e-14);

        let u2 = standard_fixture("U2").unwrap();
        let plus = Density::pure(&plus_state()).unwrap();
        let c = cesaro_mean(&u2, &plus, 100.0, None, &t).unwrap();
        // Off-diagonal average ½(e^{−200i} − 1)/(−200i) has modulus |sin 100|/200.
        let expected = (100.0f64).sin().abs() / 100.0;
        let d = c.trace_distance(&Density::maximally_mixed(2));
        assert!((d - expected).abs() < 1e-4, "{d} vs {expected}");
        assert!(d < 1e-2);

        let bd3 = standard_fixture("BD3").unwrap();
        let e0 = Density::pure(&basis_vector(3, 0)).unwrap();
        // Populations relax through modes −1 and −3 with weights ½(1,0,−1) and
        // ⅙(1,−2,1); the averaged deviation is (10, −2, −8)/18 divided by t.
        let c = cesaro_mean(&bd3, &e0, 50.0, None, &t).unwrap();
        let d = c.trace_distance(&Density::maximally_mixed(3));
        assert!((d - 1.0 / 45.0).abs() < 1e-5, "{d}");
        let c = cesaro_mean(&bd3, &e0, 2000.0, None, &t).unwrap();
        assert!(c.trace_distance(&Density::maximally_mixed(3)) < 1e-3);
        assert!(cesaro_mean(&bd3, &e0, 0.0, None, &t).is_err());
        assert!(cesaro_mean(&bd3, &e0, 1.0, Some(1), &t).is_err());
    }

    #[test]
    fn relaxation_examples() {
        let t = tol();
        let bd3 = standard_fixture("BD3").unwrap();
        let e0 = Density::pure(&basis_vector(3, 0)).unwrap();
        let times: Vec<f64> = (0..=8).map(|k| 5.0 * k as f64).collect();
        let p = relaxation_profile(&bd3, &e0, &times, None, &t).unwrap();
        assert_eq!(p.times, times);
        assert!(*p.distances.last().unwrap() < 1e-6);
        assert!(p.distances.iter().all(|&d| d >= 0.0));

        let same = relaxation_profile(&bd3, &Density::maximally_mixed(3), &times, None, &t).unwrap();
        assert!(same.distances.iter().all(|&d| d < 1e-12));

        let dp2 = standard_fixture("DP2").unwrap();
        let plus = Density::pure(&plus_state()).unwrap();
        let half = Density::maximally_mixed(2);
        let p = relaxation_profile(&dp2, &plus, &[0.0, 0.5, 1.0], Some(&half), &t).unwrap();
        for (time, d) in p.times.iter().zip(&p.distances) {
            assert!((d - (-2.0 * time).exp()).abs() < 1e-13);
        }
        assert!(relaxation_profile(&dp2, &plus, &[1.0, 0.5], Some(&half), &t).is_err());
    }

    #[test]
    fn support_oracle_examples() {
        let t = tol();
        let ad2 = standard_fixture("AD2").unwrap();
        let s = numerical_support_oracle(&ad2, &basis_vector(2, 0), 1.0, &t).unwrap();
        assert_eq!(s.dim(), 1);
        assert!(s.relative_distance(&basis_vector(2, 0)) < 1e-12);
        assert_eq!(numerical_support_oracle(&ad2, &plus_state(), 0.1, &t).unwrap().dim(), 2);
        let bd3 = standard_fixture("BD3").unwrap();
        assert_eq!(numerical_support_oracle(&bd3, &basis_vector(3, 0), 0.1, &t).unwrap().dim(), 3);
        assert!(numerical_support_oracle(&bd3, &basis_vector(3, 0), 0.0, &t).is_err());
    }

    #[test]
    fn contraction_examples() {
        let ad2 = standard_fixture("AD2").unwrap();
        assert_eq!(contraction_semigroup(&ad2, 0.0).unwrap(), identity(2));
        let p = contraction_semigroup(&ad2, 2.0).unwrap();
        let expected = outer(&basis_vector(2, 0), &basis_vector(2, 0))
            + outer(&basis_vector(2, 1), &basis_vector(2, 1)) * real((-1.0f64).exp());
        assert!(max_abs(&(p - expected)) < 1e-15);
        let bd3 = standard_fixture("BD3").unwrap();
        let p = contraction_semigroup(&bd3, 1.0).unwrap();
        assert!((op_norm(&p) - (-0.5f64).exp()).abs() < 1e-14);
    }
}
