//! Named fixtures and seeded random models.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{QmsError, Result};
use crate::gksl::{build_model, vectorize, GaugeTransform, GkslModel, Side};
use crate::linalg::{
    c64, from_real_rows, hermitian_part, matrix_unit, max_abs, op_norm, real, zeros,
    ComplexMatrix, ComplexVector,
};
use crate::operator::{Density, OrthProjection, Subspace};
use crate::tolerance::Tolerances;

/// Truncated right shift on `Cⁿ`: `S e_k = e_{k+1}`, `S e_{n−1} = 0`.
pub fn truncated_shift(n: usize) -> ComplexMatrix {
    let mut s = zeros(n);
    for k in 0..n.saturating_sub(1) {
        s[(k + 1, k)] = real(1.0);
    }
    s
}

/// Birth–death chain on `n` levels: `H = 0`, jumps `S` and `S*`.
pub fn truncated_birth_death(n: usize) -> Result<GkslModel> {
    if n < 2 {
        return Err(QmsError::Precondition(format!(
            "birth-death truncation needs n ≥ 2, got {n}"
        )));
    }
    let s = truncated_shift(n);
    let sd = s.adjoint();
    build_model(zeros(n), vec![s, sd], &Tolerances::default())
}

/// Outcome of restricting a generator to the diagonal subalgebra.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum ClassicalRestriction {
    /// `A[k][j] = ⟨e_k, L(|e_j⟩⟨e_j|) e_k⟩`, so `(Af)(k) = Σ_j A[k][j] f(j)`.
    Applicable { generator: Vec<Vec<f64>>, residual: f64 },
    Inapplicable { residual: f64 },
}

impl ClassicalRestriction {
    pub fn matrix(&self) -> Option<DMatrix<f64>> {
        match self {
            ClassicalRestriction::Applicable { generator, .. } => {
                let n = generator.len();
                Some(DMatrix::from_fn(n, n, |i, j| generator[i][j]))
            }
            ClassicalRestriction::Inapplicable { .. } => None,
        }
    }

    pub fn residual(&self) -> f64 {
        match self {
            ClassicalRestriction::Applicable { residual, .. }
            | ClassicalRestriction::Inapplicable { residual } => *residual,
        }
    }
}

/// Restriction of the generator to diagonal matrices, returned only when
/// the diagonal conditional expectation `E` commutes with `L`.
pub fn classical_restriction(m: &GkslModel, tol: &Tolerances) -> ClassicalRestriction {
    let n = m.dim();
    let sup = vectorize(m, Side::Heisenberg);
    let l = sup.matrix();
    let nn = n * n;
    let on_diag = |idx: usize| idx % n == idx / n;
    // E is the coordinate projection onto the entries i + i·n of vec(x).
    let mut residual = 0.0f64;
    for r in 0..nn {
        for c in 0..nn {
            let el = if on_diag(r) { l[(r, c)] } else { real(0.0) };
            let le = if on_diag(c) { l[(r, c)] } else { real(0.0) };
            residual = residual.max((el - le).norm());
        }
    }
    let residual = residual / max_abs(l).max(1.0);
    if residual > tol.eq {
        return ClassicalRestriction::Inapplicable { residual };
    }
    let generator = (0..n)
        .map(|k| (0..n).map(|j| l[(k + k * n, j + j * n)].re).collect())
        .collect();
    ClassicalRestriction::Applicable {
        generator,
        residual,
    }
}

/// The shipped example models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fixture {
    /// Amplitude damping: `H = 0`, `L = σ₋`.
    Ad2,
    /// Dephasing: `H = 0`, `L = σ_z`.
    Dp2,
    /// Pure rotation: `H = σ_z`, no jumps.
    U2,
    /// Truncated birth–death chain on `n` levels.
    BirthDeath(usize),
}

impl Fixture {
    pub const NAMES: [&'static str; 5] = ["AD2", "DP2", "U2", "BD3", "BD<n>"];

    pub fn build(self) -> Result<GkslModel> {
        let tol = Tolerances::default();
        let sz = from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]);
        match self {
            Fixture::Ad2 => build_model(zeros(2), vec![matrix_unit(2, 0, 1)], &tol),
            Fixture::Dp2 => build_model(zeros(2), vec![sz], &tol),
            Fixture::U2 => build_model(sz, Vec::new(), &tol),
            Fixture::BirthDeath(n) => truncated_birth_death(n),
        }
    }
}

impl fmt::Display for Fixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fixture::Ad2 => f.write_str("AD2"),
            Fixture::Dp2 => f.write_str("DP2"),
            Fixture::U2 => f.write_str("U2"),
            Fixture::BirthDeath(n) => write!(f, "BD{n}"),
        }
    }
}

impl FromStr for Fixture {
    type Err = QmsError;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        match upper.as_str() {
            "AD2" => Ok(Fixture::Ad2),
            "DP2" => Ok(Fixture::Dp2),
            "U2" => Ok(Fixture::U2),
            _ => upper
                .strip_prefix("BD")
                .and_then(|d| d.parse::<usize>().ok())
                .filter(|&n| n >= 2)
                .map(Fixture::BirthDeath)
                .ok_or_else(|| {
                    QmsError::Parse(format!(
                        "unknown fixture '{s}' (expected one of {})",
                        Fixture::NAMES.join(", ")
                    ))
                }),
        }
    }
}

pub fn standard_fixture(name: &str) -> Result<GkslModel> {
    name.parse::<Fixture>()?.build()
}

/// Deterministic description of a model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ModelSpec {
    Fixture { fixture: Fixture },
    Random { n: usize, k: usize, seed: u64 },
    Planted { n: usize, k: usize, sub_dim: usize, seed: u64 },
}

impl ModelSpec {
    pub fn build(&self) -> Result<GkslModel> {
        match *self {
            ModelSpec::Fixture { fixture } => fixture.build(),
            ModelSpec::Random { n, k, seed } => random_gksl(n, k, seed),
            ModelSpec::Planted { n, k, sub_dim, seed } => {
                planted_reducible(n, k, sub_dim, seed).map(|(m, _)| m)
            }
        }
    }
}

/// Seeded generator used by every random constructor.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent child seed for instance `index` of a run (SplitMix64 mix).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Complex Ginibre matrix with independent `N(0, ½)` real and imaginary parts.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let normal = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("valid σ");
    ComplexMatrix::from_fn(rows, cols, |_, _| c64(normal.sample(rng), normal.sample(rng)))
}

/// Haar-distributed unitary from the phase-corrected QR of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let qr = ginibre(n, n, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { real(1.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn random_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexVector {
    let g = ginibre(n, 1, rng);
    let v = ComplexVector::from_iterator(n, g.iter().copied());
    let nv = v.norm();
    v / real(nv)
}

/// Full-rank random density `WW*/tr(WW*)`.
pub fn random_density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Density {
    let w = ginibre(n, n, rng);
    let rho = hermitian_part(&(&w * w.adjoint()));
    Density::normalized(rho, &Tolerances::default()).expect("Wishart matrices are positive")
}

/// Projection onto a uniformly random `rank`-dimensional subspace.
pub fn random_projection<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> OrthProjection {
    let u = random_unitary(n, rng);
    let frame = u.columns(0, rank.min(n)).into_owned();
    let sub = Subspace::new(frame, &Tolerances::default()).expect("unitary columns");
    OrthProjection::onto(&sub)
}

/// `H` the Hermitian part of a Ginibre matrix, `k` Ginibre jumps each
/// divided by its operator norm.
pub fn random_gksl(n: usize, k: usize, seed: u64) -> Result<GkslModel> {
    if n < 2 || k < 1 {
        return Err(QmsError::Precondition(format!(
            "random models need n ≥ 2 and k ≥ 1, got n = {n}, k = {k}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let h = hermitian_part(&ginibre(n, n, &mut rng));
    let jumps = (0..k)
        .map(|_| {
            let l = ginibre(n, n, &mut rng);
            let nl = op_norm(&l);
            l / real(nl)
        })
        .collect();
    build_model(h, jumps, &Tolerances::default())
}

/// Random model with a planted invariant subspace of dimension `sub_dim`.
///
/// In a rotated basis the jumps are block upper triangular and the
/// off-diagonal block of `H` is chosen so that the drift is block upper
/// triangular too; the returned subspace is the rotated leading block.
pub fn planted_reducible(
    n: usize,
    k: usize,
    sub_dim: usize,
    seed: u64,
) -> Result<(GkslModel, Subspace)> {
    if n < 2 || k < 1 || sub_dim == 0 || sub_dim >= n {
        return Err(QmsError::Precondition(format!(
            "planted models need n ≥ 2, k ≥ 1 and 0 < sub_dim < n (got {n}, {k}, {sub_dim})"
        )));
    }
    let d = sub_dim;
    let mut rng = rng_from_seed(seed);
    let w = random_unitary(n, &mut rng);
    let mut jumps = Vec::with_capacity(k);
    let mut dissipation = zeros(n);
    for _ in 0..k {
        let mut l = ginibre(n, n, &mut rng);
        for i in d..n {
            for j in 0..d {
                l[(i, j)] = real(0.0);
            }
        }
        let nl = op_norm(&l);
        let l = l / real(nl);
        dissipation += l.adjoint() * &l;
        jumps.push(l);
    }
    let mut h = hermitian_part(&ginibre(n, n, &mut rng));
    let half_i = c64(0.0, 0.5);
    for i in d..n {
        for j in 0..d {
            let v = dissipation[(i, j)] * half_i;
            h[(i, j)] = v;
            h[(j, i)] = v.conj();
        }
    }
    let rotate = |x: &ComplexMatrix| &w * x * w.adjoint();
    let h = hermitian_part(&rotate(&h));
    let jumps = jumps.iter().map(rotate).collect();
    let model = build_model(h, jumps, &Tolerances::default())?;
    let frame = w.columns(0, d).into_owned();
    let sub = Subspace::new(frame, &Tolerances::default())?;
    Ok((model, sub))
}

/// A random unitary mixing of the jumps together with random scalar shifts.
pub fn random_gauges(k: usize, seed: u64) -> (GaugeTransform, GaugeTransform) {
    let mut rng = rng_from_seed(seed);
    let u = random_unitary(k, &mut rng);
    let normal = Normal::new(0.0, 1.0).expect("valid σ");
    let shifts = (0..k)
        .map(|_| c64(normal.sample(&mut rng), normal.sample(&mut rng)))
        .collect();
    let energy = normal.sample(&mut rng);
    (
        GaugeTransform::Mixing(u),
        GaugeTransform::Shift { shifts, energy },
    )
}

/// `|+⟩ = (e₀ + e₁)/√2`.
pub fn plus_state() -> ComplexVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexVector::from_vec(vec![real(s), real(s)])
}
