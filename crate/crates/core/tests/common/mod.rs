//! Shared helpers for the integration and acceptance suites.
#![allow(dead_code)]

use std::f64::consts::TAU;

use darkstate_core::classify::{dark_subspaces, DarkClassification, Tolerances};
use darkstate_core::dynamics::KERNEL_TOLERANCE;
use darkstate_core::linalg::null_space;
use darkstate_core::liouville::{
    build_lindblad, build_nonhermitian, effective_hamiltonian, unvectorize, Superoperator,
};
use darkstate_core::model::LevelSystem;
use darkstate_core::rwa::{build_hamiltonian, solve_frame, RwaHamiltonian};
use darkstate_core::{CMatrix, C64};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const SUITE_SEED: u64 = 0x5eed_da4c;

/// Random system with `N_g ≤ 5`, `N_e ≤ 3`. Ground levels are assigned to a
/// few shared rotating-frame energies so degenerate groups occur often;
/// laser frequencies are chosen consistent with that frame, so every loop is
/// feasible. Every excited level decays to every ground level.
pub fn random_system(rng: &mut impl Rng) -> LevelSystem {
    let ng = rng.gen_range(1..=5);
    let ne = rng.gen_range(1..=3);
    let n_groups = rng.gen_range(1..=ng);
    let group_energies = [0.0, 0.7, 1.9, -1.3, 2.6];
    let delta_g: Vec<f64> = (0..ng).map(|_| group_energies[rng.gen_range(0..n_groups)]).collect();
    let delta_e: Vec<f64> = (0..ne).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let e_g: Vec<f64> = (0..ng).map(|_| rng.gen_range(0.0..2.0)).collect();
    let e_e: Vec<f64> = (0..ne).map(|_| rng.gen_range(10.0..12.0)).collect();

    let mut b = LevelSystem::builder();
    for (i, &e) in e_g.iter().enumerate() {
        b = b.ground(format!("g{}", i + 1), e);
    }
    for (j, &e) in e_e.iter().enumerate() {
        b = b.excited(format!("e{}", j + 1), e);
    }
    for i in 0..ng {
        for j in 0..ne {
            if rng.gen_bool(0.6) {
                let rabi = C64::from_polar(rng.gen_range(0.3..1.5), rng.gen_range(0.0..TAU));
                let omega = (e_e[j] - delta_e[j]) - (e_g[i] - delta_g[i]);
                b = b.couple(i, j, rabi, omega);
            }
            b = b.decay(j, i, rng.gen_range(0.1..1.0));
        }
    }
    b.build()
}

pub fn random_suite(count: usize) -> Vec<LevelSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED);
    (0..count).map(|_| random_system(&mut rng)).collect()
}

pub struct Analysis {
    pub system: LevelSystem,
    pub h: RwaHamiltonian,
    pub lindblad: Superoperator,
    pub nonhermitian: Superoperator,
    pub classification: DarkClassification,
}

pub fn analyse(system: &LevelSystem) -> Analysis {
    let h = build_hamiltonian(system, &solve_frame(system)).expect("feasible frame");
    Analysis {
        lindblad: build_lindblad(system, &h).unwrap(),
        nonhermitian: build_nonhermitian(system, &h).unwrap(),
        classification: dark_subspaces(&h, Tolerances::default()),
        system: system.clone(),
        h,
    }
}

/// Frobenius norm of all entries touching an excited level.
pub fn excited_part(x: &CMatrix, n_ground: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            if i >= n_ground || j >= n_ground {
                s += x[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Null-space operators of a superoperator.
pub fn kernel(op: &Superoperator) -> Vec<CMatrix> {
    null_space(&op.matrix, KERNEL_TOLERANCE).basis.iter().map(|v| unvectorize(v, op.dim())).collect()
}

/// Brute-force count of dark pure states: `Σ_s dim ker(H̃ − 𝓔_s)`.
pub fn pure_dark_oracle(a: &Analysis) -> usize {
    let ht = effective_hamiltonian(&a.system, &a.h);
    let n = ht.nrows();
    a.classification
        .groups
        .iter()
        .map(|g| {
            let shifted = &ht - CMatrix::identity(n, n) * C64::new(g.energy, 0.0);
            null_space(&shifted, KERNEL_TOLERANCE).dim()
        })
        .sum()
}
