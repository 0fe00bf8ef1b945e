//! Level systems: ground and excited manifolds, laser couplings, decay channels.
//!
//! Indices are zero-based in the API. Ground levels come first in every
//! downstream basis (`0..n_ground`), followed by the excited levels
//! (`n_ground..n_levels`). System files use one-based indices; see
//! [`load_system`] / [`save_system`].

mod file;

use std::collections::{HashMap, HashSet};
use std::f64::consts::TAU;

use serde::Serialize;

use crate::{CMatrix, C64, MAX_LEVELS};

pub use file::{load_system, save_system, SystemFileError};

#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub label: String,
    /// Bare energy in reference-Rabi units (ħ = 1).
    pub energy: f64,
}

/// A laser driving the transition between one ground and one excited level.
#[derive(Debug, Clone, PartialEq)]
pub struct LaserCoupling {
    pub ground: usize,
    pub excited: usize,
    /// Rabi magnitude `F ≥ 0`.
    pub magnitude: f64,
    /// Phase in radians, normalized to `[0, 2π)`.
    pub phase: f64,
    /// Laser angular frequency `ω > 0`.
    pub frequency: f64,
}

impl LaserCoupling {
    /// Complex Rabi frequency `F·e^{iφ}`.
    pub fn rabi(&self) -> C64 {
        C64::from_polar(self.magnitude, self.phase)
    }
}

/// Spontaneous decay `excited → ground` at `rate`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayChannel {
    pub ground: usize,
    pub excited: usize,
    pub rate: f64,
}

/// Immutable declaration of a driven, dissipative N-level system.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSystem {
    ground: Vec<Level>,
    excited: Vec<Level>,
    couplings: Vec<LaserCoupling>,
    decays: Vec<DecayChannel>,
}

pub(crate) fn normalize_phase(phase: f64) -> f64 {
    let p = phase.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if p >= TAU {
        0.0
    } else {
        p
    }
}

impl LevelSystem {
    pub fn new(
        ground: Vec<Level>,
        excited: Vec<Level>,
        mut couplings: Vec<LaserCoupling>,
        decays: Vec<DecayChannel>,
    ) -> Self {
        for c in &mut couplings {
            c.phase = normalize_phase(c.phase);
        }
        Self { ground, excited, couplings, decays }
    }

    pub fn builder() -> LevelSystemBuilder {
        LevelSystemBuilder::default()
    }

    pub fn ground(&self) -> &[Level] {
        &self.ground
    }

    pub fn excited(&self) -> &[Level] {
        &self.excited
    }

    pub fn couplings(&self) -> &[LaserCoupling] {
        &self.couplings
    }

    pub fn decays(&self) -> &[DecayChannel] {
        &self.decays
    }

    pub fn n_ground(&self) -> usize {
        self.ground.len()
    }

    pub fn n_excited(&self) -> usize {
        self.excited.len()
    }

    pub fn n_levels(&self) -> usize {
        self.ground.len() + self.excited.len()
    }

    /// Basis index of excited level `j`.
    pub fn excited_index(&self, j: usize) -> usize {
        self.ground.len() + j
    }

    /// Labels in basis order (ground first).
    pub fn labels(&self) -> Vec<String> {
        self.ground.iter().chain(&self.excited).map(|l| l.label.clone()).collect()
    }

    /// Bare energies in basis order.
    pub fn energies(&self) -> Vec<f64> {
        self.ground.iter().chain(&self.excited).map(|l| l.energy).collect()
    }

    pub fn coupling(&self, ground: usize, excited: usize) -> Option<&LaserCoupling> {
        self.couplings.iter().find(|c| c.ground == ground && c.excited == excited)
    }

    /// Detuning `Δ = E_e − E_g − ω` of a coupling.
    pub fn detuning(&self, c: &LaserCoupling) -> f64 {
        self.excited[c.excited].energy - self.ground[c.ground].energy - c.frequency
    }

    /// Basis index of the level labelled `label`.
    pub fn level_index(&self, label: &str) -> Option<usize> {
        self.labels().iter().position(|l| l == label)
    }

    pub(crate) fn couplings_mut(&mut self) -> &mut Vec<LaserCoupling> {
        &mut self.couplings
    }

    pub(crate) fn decays_mut(&mut self) -> &mut Vec<DecayChannel> {
        &mut self.decays
    }

    pub(crate) fn level_mut(&mut self, index: usize) -> Option<&mut Level> {
        let ng = self.ground.len();
        if index < ng {
            self.ground.get_mut(index)
        } else {
            self.excited.get_mut(index - ng)
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum FrequencySpec {
    Absolute(f64),
    Detuning(f64),
}

/// Incremental constructor; laser frequencies may be given as detunings and
/// are resolved against the level energies in [`build`](Self::build).
#[derive(Debug, Default, Clone)]
pub struct LevelSystemBuilder {
    ground: Vec<Level>,
    excited: Vec<Level>,
    couplings: Vec<(usize, usize, C64, FrequencySpec)>,
    decays: Vec<DecayChannel>,
}

impl LevelSystemBuilder {
    pub fn ground(mut self, label: impl Into<String>, energy: f64) -> Self {
        self.ground.push(Level { label: label.into(), energy });
        self
    }

    pub fn excited(mut self, label: impl Into<String>, energy: f64) -> Self {
        self.excited.push(Level { label: label.into(), energy });
        self
    }

    /// Laser with explicit frequency.
    pub fn couple(mut self, ground: usize, excited: usize, rabi: C64, frequency: f64) -> Self {
        self.couplings.push((ground, excited, rabi, FrequencySpec::Absolute(frequency)));
        self
    }

    /// Laser whose frequency is set from the detuning `Δ = E_e − E_g − ω`.
    pub fn drive(mut self, ground: usize, excited: usize, rabi: C64, detuning: f64) -> Self {
        self.couplings.push((ground, excited, rabi, FrequencySpec::Detuning(detuning)));
        self
    }

    pub fn decay(mut self, excited: usize, ground: usize, rate: f64) -> Self {
        self.decays.push(DecayChannel { ground, excited, rate });
        self
    }

    pub fn build(self) -> LevelSystem {
        let couplings = self
            .couplings
            .iter()
            .map(|&(g, e, rabi, spec)| {
                let frequency = match spec {
                    FrequencySpec::Absolute(w) => w,
                    FrequencySpec::Detuning(d) => {
                        let eg = self.ground.get(g).map_or(f64::NAN, |l| l.energy);
                        let ee = self.excited.get(e).map_or(f64::NAN, |l| l.energy);
                        ee - eg - d
                    }
                };
                LaserCoupling { ground: g, excited: e, magnitude: rabi.norm(), phase: rabi.arg(), frequency }
            })
            .collect();
        LevelSystem::new(self.ground, self.excited, couplings, self.decays)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FindingKind {
    EmptyManifold,
    TooManyLevels,
    DuplicateLabel,
    DuplicateCoupling,
    DanglingIndex,
    NegativeRate,
    NegativeMagnitude,
    NonPositiveFrequency,
    NonFiniteValue,
    NonDecayingExcited,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Finding {
    pub kind: FindingKind,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<Finding>,
    pub warnings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.errors.is_empty() && self.warnings.is_empty()
    }

    fn error(&mut self, kind: FindingKind, message: String) {
        self.errors.push(Finding { kind, message });
    }

    fn warn(&mut self, kind: FindingKind, message: String) {
        self.warnings.push(Finding { kind, message });
    }
}

/// Structural checks. Never fails; findings are returned as data.
pub fn validate_system(system: &LevelSystem) -> ValidationReport {
    let mut report = ValidationReport::default();
    let (ng, ne) = (system.n_ground(), system.n_excited());
    if ng == 0 {
        report.error(FindingKind::EmptyManifold, "no ground levels".into());
    }
    if ne == 0 {
        report.error(FindingKind::EmptyManifold, "no excited levels".into());
    }
    if system.n_levels() > MAX_LEVELS {
        report.error(
            FindingKind::TooManyLevels,
            format!("{} levels exceed the supported maximum of {MAX_LEVELS}", system.n_levels()),
        );
    }

    let mut seen = HashSet::new();
    for level in system.ground().iter().chain(system.excited()) {
        if !seen.insert(level.label.as_str()) {
            report.error(FindingKind::DuplicateLabel, format!("duplicate label `{}`", level.label));
        }
        if !level.energy.is_finite() {
            report.error(FindingKind::NonFiniteValue, format!("level `{}` has non-finite energy", level.label));
        }
    }

    let mut pairs: HashMap<(usize, usize), usize> = HashMap::new();
    for (k, c) in system.couplings().iter().enumerate() {
        let pos = k + 1;
        if c.ground >= ng || c.excited >= ne {
            report.error(
                FindingKind::DanglingIndex,
                format!(
                    "coupling #{pos} references g{} / e{} outside the declared levels",
                    c.ground + 1,
                    c.excited + 1
                ),
            );
            continue;
        }
        if let Some(first) = pairs.insert((c.ground, c.excited), pos) {
            report.error(
                FindingKind::DuplicateCoupling,
                format!(
                    "duplicate coupling on g{} <-> e{} (couplings #{first} and #{pos}); each transition takes at most one laser",
                    c.ground + 1,
                    c.excited + 1
                ),
            );
        }
        if !(c.magnitude.is_finite() && c.phase.is_finite() && c.frequency.is_finite()) {
            report.error(FindingKind::NonFiniteValue, format!("coupling #{pos} has a non-finite parameter"));
            continue;
        }
        if c.magnitude < 0.0 {
            report.error(FindingKind::NegativeMagnitude, format!("coupling #{pos} has negative magnitude"));
        }
        if c.frequency <= 0.0 {
            report
                .error(FindingKind::NonPositiveFrequency, format!("coupling #{pos} has non-positive laser frequency"));
        }
    }

    let mut total = vec![0.0; ne];
    for (k, d) in system.decays().iter().enumerate() {
        let pos = k + 1;
        if d.ground >= ng || d.excited >= ne {
            report.error(
                FindingKind::DanglingIndex,
                format!("decay #{pos} references g{} / e{} outside the declared levels", d.ground + 1, d.excited + 1),
            );
            continue;
        }
        if !d.rate.is_finite() {
            report.error(FindingKind::NonFiniteValue, format!("decay #{pos} has a non-finite rate"));
        } else if d.rate < 0.0 {
            report.error(FindingKind::NegativeRate, format!("decay #{pos} has negative rate {}", d.rate));
        } else {
            total[d.excited] += d.rate;
        }
    }
    for (j, &gamma) in total.iter().enumerate() {
        if gamma == 0.0 {
            report.warn(
                FindingKind::NonDecayingExcited,
                format!(
                    "non-decaying excited level `{}` (total decay rate 0); dark-state theorem assumptions violated",
                    system.excited()[j].label
                ),
            );
        }
    }
    report
}

/// `N_g × N_e` matrix of complex Rabi frequencies; zero where no laser is declared.
pub fn coupling_matrix(system: &LevelSystem) -> CMatrix {
    let mut v = CMatrix::zeros(system.n_ground(), system.n_excited());
    for c in system.couplings() {
        v[(c.ground, c.excited)] = c.rabi();
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lambda() -> LevelSystem {
        LevelSystem::builder()
            .ground("g1", 0.0)
            .ground("g2", 0.3)
            .excited("e1", 10.0)
            .drive(0, 0, C64::new(1.0, 0.0), 0.0)
            .drive(1, 0, C64::new(1.0, 0.0), 0.0)
            .decay(0, 0, 0.2)
            .decay(0, 1, 0.5)
            .build()
    }

    #[test]
    fn lambda_is_clean() {
        assert!(validate_system(&lambda()).is_empty());
    }

    #[test]
    fn duplicate_coupling_is_an_error() {
        let mut sys = lambda();
        let dup = sys.couplings()[0].clone();
        sys.couplings_mut().push(dup);
        let report = validate_system(&sys);
        assert_eq!(report.errors.len(), 1);
        assert_eq!(report.errors[0].kind, FindingKind::DuplicateCoupling);
        assert!(report.errors[0].message.contains("duplicate coupling"));
    }

    #[test]
    fn non_decaying_excited_level_warns() {
        let sys = LevelSystem::builder()
            .ground("g1", 0.0)
            .excited("e1", 1.0)
            .drive(0, 0, C64::new(1.0, 0.0), 0.0)
            .decay(0, 0, 0.0)
            .build();
        let report = validate_system(&sys);
        assert!(report.is_ok());
        assert_eq!(report.warnings.len(), 1);
        assert_eq!(report.warnings[0].kind, FindingKind::NonDecayingExcited);
        assert!(report.warnings[0].message.contains("non-decaying excited level"));
    }

    #[test]
    fn dangling_and_negative_are_errors() {
        let sys = LevelSystem::builder()
            .ground("g1", 0.0)
            .excited("e1", 1.0)
            .couple(0, 3, C64::new(1.0, 0.0), 1.0)
            .decay(0, 0, -0.1)
            .build();
        let kinds: Vec<_> = validate_system(&sys).errors.iter().map(|f| f.kind).collect();
        assert!(kinds.contains(&FindingKind::DanglingIndex));
        assert!(kinds.contains(&FindingKind::NegativeRate));
    }

    #[test]
    fn coupling_matrix_lambda() {
        let v = coupling_matrix(&lambda());
        assert_eq!(v.shape(), (2, 1));
        assert!((v[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((v[(1, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn coupling_matrix_without_lasers_is_zero() {
        let sys = LevelSystem::builder().ground("g", 0.0).excited("e", 1.0).decay(0, 0, 1.0).build();
        assert!(coupling_matrix(&sys).iter().all(|z| *z == C64::new(0.0, 0.0)));
    }

    #[test]
    fn phases_are_normalized() {
        let sys = LevelSystem::builder()
            .ground("g", 0.0)
            .excited("e", 1.0)
            .drive(0, 0, C64::from_polar(1.0, -std::f64::consts::FRAC_PI_2), 0.0)
            .build();
        let phase = sys.couplings()[0].phase;
        assert!((phase - 1.5 * std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(normalize_phase(-1e-300), 0.0);
    }

    #[test]
    fn drive_sets_frequency_from_detuning() {
        let sys = lambda();
        let c = &sys.couplings()[1];
        assert!((c.frequency - 9.7).abs() < 1e-12);
        assert!(sys.detuning(c).abs() < 1e-12);
    }
}
