//! Column-stacked superoperators.
//!
//! `vec(ρ)` concatenates the columns of `ρ`, so `vec(ρ)[i + N·j] = ρ[i, j]`
//! and `A ρ B† ↦ (B̄ ⊗ A) vec(ρ)`. With `σ_ij = |g_i⟩⟨e_j|`:
//!
//! * `L ρ = −i[H, ρ] + Σ γ_ij (σ ρ σ† − ½{σ†σ, ρ})`
//! * `L_H̃ ρ = −i(H̃ρ − ρH̃†)`, `H̃ = H − iΓ`, `Γ = Σ γ_ij σ†σ`
//! * `J ρ = Σ γ_ij σ ρ σ†`
//!
//! so that `L = L_H̃ + J`.

use serde::Serialize;

use crate::linalg::kron;
use crate::model::LevelSystem;
use crate::rwa::RwaHamiltonian;
use crate::{CMatrix, CVector, Error, Result, C64, MAX_LEVELS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuperoperatorKind {
    Lindblad,
    NonHermitian,
    Jump,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stacking {
    Column,
}

/// Level ordering and vectorization convention of a superoperator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasisOrder {
    pub labels: Vec<String>,
    pub n_ground: usize,
    pub stacking: Stacking,
}

impl BasisOrder {
    pub fn of(system: &LevelSystem) -> Self {
        Self { labels: system.labels(), n_ground: system.n_ground(), stacking: Stacking::Column }
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    pub matrix: CMatrix,
    pub kind: SuperoperatorKind,
    pub basis: BasisOrder,
}

impl Superoperator {
    /// Hilbert-space dimension `N` (the matrix is `N² × N²`).
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// `L(ρ)` as an `N × N` matrix.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        unvectorize(&(&self.matrix * vectorize(rho)), self.dim())
    }
}

/// Total decay rate `Γ_j = Σ_i γ_ij` of each excited level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaOperator {
    pub rates: Vec<f64>,
    pub n_ground: usize,
}

impl GammaOperator {
    /// Diagonal `N × N` operator, zero on the ground block.
    pub fn matrix(&self) -> CMatrix {
        let n = self.n_ground + self.rates.len();
        let mut m = CMatrix::zeros(n, n);
        for (j, &r) in self.rates.iter().enumerate() {
            m[(self.n_ground + j, self.n_ground + j)] = C64::new(r, 0.0);
        }
        m
    }
}

pub fn gamma_operator(system: &LevelSystem) -> GammaOperator {
    let mut rates = vec![0.0; system.n_excited()];
    for d in system.decays() {
        rates[d.excited] += d.rate;
    }
    GammaOperator { rates, n_ground: system.n_ground() }
}

/// Column-stack an `N × N` matrix.
pub fn vectorize(rho: &CMatrix) -> CVector {
    CVector::from_column_slice(rho.as_slice())
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &CVector, n: usize) -> CMatrix {
    CMatrix::from_column_slice(n, n, v.as_slice())
}

/// Row vector `vec(1)†`; `vec(1)† · vec(ρ) = Tr ρ`.
pub fn identity_dual(n: usize) -> CVector {
    vectorize(&CMatrix::identity(n, n))
}

fn check_dims(system: &LevelSystem, h: &RwaHamiltonian) -> Result<usize> {
    let n = system.n_levels();
    if n > MAX_LEVELS {
        return Err(Error::TooManyLevels(n));
    }
    if h.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: h.dim() });
    }
    Ok(n)
}

fn sigma(system: &LevelSystem, ground: usize, excited: usize) -> CMatrix {
    let n = system.n_levels();
    let mut s = CMatrix::zeros(n, n);
    s[(ground, system.excited_index(excited))] = C64::new(1.0, 0.0);
    s
}

fn minus_i() -> C64 {
    C64::new(0.0, -1.0)
}

/// Full Lindblad generator, assembled term by term (not as `L_H̃ + J`).
pub fn build_lindblad(system: &LevelSystem, h: &RwaHamiltonian) -> Result<Superoperator> {
    let n = check_dims(system, h)?;
    let id = CMatrix::identity(n, n);
    let mut l = (kron(&id, &h.matrix) - kron(&h.matrix.transpose(), &id)) * minus_i();
    for d in system.decays() {
        if d.rate == 0.0 {
            continue;
        }
        let s = sigma(system, d.ground, d.excited);
        let sds = s.adjoint() * &s;
        let rate = C64::new(d.rate, 0.0);
        l += (kron(&s.map(|z| z.conj()), &s) - (kron(&id, &sds) + kron(&sds.transpose(), &id)) * C64::new(0.5, 0.0))
            * rate;
    }
    Ok(Superoperator { matrix: l, kind: SuperoperatorKind::Lindblad, basis: BasisOrder::of(system) })
}

/// `H̃ = H − iΓ`.
pub fn effective_hamiltonian(system: &LevelSystem, h: &RwaHamiltonian) -> CMatrix {
    &h.matrix - gamma_operator(system).matrix() * C64::new(0.0, 1.0)
}

/// Non-Hermitian part `L_H̃ = −i(1 ⊗ H̃ − conj(H̃) ⊗ 1)`.
pub fn build_nonhermitian(system: &LevelSystem, h: &RwaHamiltonian) -> Result<Superoperator> {
    let n = check_dims(system, h)?;
    let id = CMatrix::identity(n, n);
    let ht = effective_hamiltonian(system, h);
    let m = (kron(&id, &ht) - kron(&ht.map(|z| z.conj()), &id)) * minus_i();
    Ok(Superoperator { matrix: m, kind: SuperoperatorKind::NonHermitian, basis: BasisOrder::of(system) })
}

/// Quantum-jump part `J = Σ γ σ̄ ⊗ σ`.
pub fn build_jump(system: &LevelSystem) -> Result<Superoperator> {
    let n = system.n_levels();
    if n > MAX_LEVELS {
        return Err(Error::TooManyLevels(n));
    }
    let mut m = CMatrix::zeros(n * n, n * n);
    for d in system.decays() {
        let s = sigma(system, d.ground, d.excited);
        m += kron(&s.map(|z| z.conj()), &s) * C64::new(d.rate, 0.0);
    }
    Ok(Superoperator { matrix: m, kind: SuperoperatorKind::Jump, basis: BasisOrder::of(system) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expm, max_abs};
    use crate::rwa::{build_hamiltonian, solve_frame};

    fn two_level(gamma: f64) -> (LevelSystem, RwaHamiltonian) {
        let sys = LevelSystem::builder().ground("g", 0.0).excited("e", 3.0).decay(0, 0, gamma).build();
        let h = build_hamiltonian(&sys, &solve_frame(&sys)).unwrap();
        (sys, h)
    }

    #[test]
    fn amplitude_damping_rates() {
        let gamma = 0.3;
        let (sys, h) = two_level(gamma);
        let l = build_lindblad(&sys, &h).unwrap();
        let mut rho = CMatrix::zeros(2, 2);
        rho[(0, 0)] = C64::new(0.4, 0.0);
        rho[(1, 1)] = C64::new(0.6, 0.0);
        rho[(0, 1)] = C64::new(0.2, 0.1);
        rho[(1, 0)] = C64::new(0.2, -0.1);
        let t = 2.0;
        let out = unvectorize(&(expm(&(&l.matrix * C64::new(t, 0.0))) * vectorize(&rho)), 2);
        assert!((out[(1, 1)].re - 0.6 * (-gamma * t).exp()).abs() < 1e-12);
        // the frame removes the bare splitting; coherence decays at γ/2
        let expect = rho[(0, 1)] * C64::from_polar((-gamma * t / 2.0).exp(), 3.0 * t);
        assert!((out[(0, 1)] - expect).norm() < 1e-12, "{} vs {}", out[(0, 1)], expect);
    }

    #[test]
    fn decay_free_nonhermitian_is_commutator() {
        let sys =
            LevelSystem::builder().ground("g", 0.0).excited("e", 1.0).drive(0, 0, C64::new(0.5, 0.2), 0.1).build();
        let h = build_hamiltonian(&sys, &solve_frame(&sys)).unwrap();
        let lh = build_nonhermitian(&sys, &h).unwrap();
        let id = CMatrix::identity(2, 2);
        let expect = (kron(&id, &h.matrix) - kron(&h.matrix.transpose(), &id)) * minus_i();
        assert!(max_abs(&(lh.matrix - expect)) < 1e-15);
        assert!(max_abs(&build_jump(&sys).unwrap().matrix) == 0.0);
    }

    #[test]
    fn gamma_sums_channels() {
        let sys = LevelSystem::builder()
            .ground("g1", 0.0)
            .ground("g2", 0.0)
            .excited("e1", 1.0)
            .excited("e2", 1.0)
            .decay(0, 0, 0.04)
            .decay(0, 1, 0.01)
            .decay(1, 0, 0.14)
            .build();
        let g = gamma_operator(&sys);
        assert!((g.rates[0] - 0.05).abs() < 1e-15);
        assert!((g.rates[1] - 0.14).abs() < 1e-15);
        let empty = LevelSystem::builder().ground("g", 0.0).excited("e", 1.0).build();
        assert_eq!(gamma_operator(&empty).rates, vec![0.0]);
    }

    #[test]
    fn vectorization_is_column_major() {
        let m = CMatrix::from_fn(3, 3, |i, j| C64::new((i + 10 * j) as f64, 0.0));
        let v = vectorize(&m);
        assert_eq!(v[1 + 3 * 2], C64::new(21.0, 0.0));
        assert_eq!(unvectorize(&v, 3), m);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let (sys, _) = two_level(0.1);
        let (_, h) = {
            let other = LevelSystem::builder().ground("a", 0.0).ground("b", 0.0).excited("c", 1.0).build();
            let h = build_hamiltonian(&other, &solve_frame(&other)).unwrap();
            (other, h)
        };
        assert!(matches!(build_lindblad(&sys, &h), Err(Error::DimensionMismatch { expected: 2, found: 3 })));
    }
}
