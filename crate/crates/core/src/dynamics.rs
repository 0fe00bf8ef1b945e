//! Time evolution, steady states and parameter scans.
//!
//! Propagation uses the dense exponential `exp(L Δt)` (Padé scaling and
//! squaring), cached per distinct step, so long-time limits are free of
//! integrator error. Stationary states come from the null spaces of `L`:
//! right null vectors are steady states, left null vectors are conserved
//! quantities, and pairing the two gives the asymptotic state reached from
//! any initial condition.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::linalg::{expm, hermitian_eigenvalues, null_space, vector_norm, NullSpace};
use crate::liouville::{build_lindblad, unvectorize, vectorize, Superoperator};
use crate::model::{normalize_phase, LevelSystem};
use crate::parallel::{map_indexed, Execution};
use crate::rwa::{build_hamiltonian, solve_frame, RwaHamiltonian};
use crate::{CMatrix, CVector, Error, Result, C64};

/// Relative singular-value threshold used for the null spaces of `L`.
pub const KERNEL_TOLERANCE: f64 = 1e-10;
/// Tolerance of [`check_density`] in propagation and verification.
pub const DENSITY_TOLERANCE: f64 = 1e-8;
/// Default relaxation horizon, in units of the reference Rabi frequency.
pub const RELAX_T_END: f64 = 1e3;
/// Stationarity threshold `‖L vec ρ‖` for relaxation.
pub const RELAX_RESIDUAL: f64 = 1e-6;

/// Check Hermiticity, unit trace and positivity within `tol`.
pub fn check_density(rho: &CMatrix, tol: f64) -> Result<()> {
    if !rho.is_square() {
        return Err(Error::NotDensityMatrix(format!("{}x{} is not square", rho.nrows(), rho.ncols())));
    }
    if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NotDensityMatrix("non-finite entry".into()));
    }
    let herm = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if herm > tol {
        return Err(Error::NotDensityMatrix(format!("not Hermitian (deviation {herm:.3e})")));
    }
    let trace = rho.trace();
    if (trace - C64::new(1.0, 0.0)).norm() > tol {
        return Err(Error::NotDensityMatrix(format!("trace {} differs from 1", trace.re)));
    }
    let sym = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let min = hermitian_eigenvalues(&sym).first().copied().unwrap_or(0.0);
    if min < -tol {
        return Err(Error::NotDensityMatrix(format!("negative eigenvalue {min:.3e}")));
    }
    Ok(())
}

/// `Tr ρ²`.
pub fn purity(rho: &CMatrix) -> f64 {
    rho.iter().map(|z| z.norm_sqr()).sum()
}

/// `Tr Qρ`: total population of the excited manifold.
pub fn excited_population(rho: &CMatrix, n_ground: usize) -> f64 {
    (n_ground..rho.nrows()).map(|i| rho[(i, i)].re).sum()
}

/// `½ ‖a − b‖₁` for Hermitian arguments.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let d = a - b;
    let sym = (&d + d.adjoint()) * C64::new(0.5, 0.0);
    0.5 * hermitian_eigenvalues(&sym).iter().map(|x| x.abs()).sum::<f64>()
}

/// RWA Hamiltonian and Lindblad generator of a system in its solved frame.
pub fn generator(system: &LevelSystem) -> Result<(RwaHamiltonian, Superoperator)> {
    let h = build_hamiltonian(system, &solve_frame(system))?;
    let l = build_lindblad(system, &h)?;
    Ok((h, l))
}

/// Initial condition, either named or explicit.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    /// `|e_k⟩⟨e_k|` (zero-based excited index).
    Excited(usize),
    /// `|g_k⟩⟨g_k|` (zero-based ground index).
    Ground(usize),
    /// Level given by its label.
    Label(String),
    /// Identity on the ground manifold, normalized.
    MixedGround,
    Matrix(CMatrix),
}

impl Default for InitialState {
    fn default() -> Self {
        Self::Excited(0)
    }
}

impl FromStr for InitialState {
    type Err = Error;

    /// `e1`, `g2` (one-based), `mixed-ground`, or any level label.
    fn from_str(s: &str) -> Result<Self> {
        if s == "mixed-ground" {
            return Ok(Self::MixedGround);
        }
        let indexed = |prefix: char| {
            s.strip_prefix(prefix).and_then(|rest| rest.parse::<usize>().ok()).filter(|&k| k >= 1).map(|k| k - 1)
        };
        if let Some(k) = indexed('e') {
            return Ok(Self::Excited(k));
        }
        if let Some(k) = indexed('g') {
            return Ok(Self::Ground(k));
        }
        if s.is_empty() {
            return Err(Error::InvalidInitialState(s.into()));
        }
        Ok(Self::Label(s.into()))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixDoc {
    re: Vec<Vec<f64>>,
    #[serde(default)]
    im: Option<Vec<Vec<f64>>>,
}

impl InitialState {
    /// Parse `{"re": [[..], ..], "im": [[..], ..]}` (`im` optional).
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let doc: MatrixDoc =
            serde_json::from_slice(bytes).map_err(|e| Error::InvalidInitialState(format!("matrix file: {e}")))?;
        let n = doc.re.len();
        let im = doc.im.unwrap_or_else(|| vec![vec![0.0; n]; n]);
        if im.len() != n || doc.re.iter().chain(im.iter()).any(|row| row.len() != n) {
            return Err(Error::InvalidInitialState("matrix file: rows must form a square matrix".into()));
        }
        Ok(Self::Matrix(CMatrix::from_fn(n, n, |i, j| C64::new(doc.re[i][j], im[i][j]))))
    }

    /// Density matrix in the level ordering of `system`.
    pub fn density(&self, system: &LevelSystem) -> Result<CMatrix> {
        let n = system.n_levels();
        let projector = |k: usize| {
            let mut m = CMatrix::zeros(n, n);
            m[(k, k)] = C64::new(1.0, 0.0);
            m
        };
        let rho = match self {
            Self::Excited(k) if *k < system.n_excited() => projector(system.excited_index(*k)),
            Self::Ground(k) if *k < system.n_ground() => projector(*k),
            Self::Label(label) => match system.level_index(label) {
                Some(k) => projector(k),
                None => return Err(Error::InvalidInitialState(label.clone())),
            },
            Self::MixedGround => {
                let ng = system.n_ground();
                CMatrix::from_fn(n, n, |i, j| {
                    if i == j && i < ng {
                        C64::new(1.0 / ng as f64, 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
            }
            Self::Matrix(m) => {
                if m.nrows() != n {
                    return Err(Error::DimensionMismatch { expected: n, found: m.nrows() });
                }
                m.clone()
            }
            Self::Excited(k) => return Err(Error::InvalidInitialState(format!("e{}", k + 1))),
            Self::Ground(k) => return Err(Error::InvalidInitialState(format!("g{}", k + 1))),
        };
        check_density(&rho, DENSITY_TOLERANCE)?;
        Ok(rho)
    }
}

/// `steps + 1` equally spaced times on `[0, t_end]`.
pub fn uniform_times(t_end: f64, steps: usize) -> Vec<f64> {
    let steps = steps.max(1);
    (0..=steps).map(|k| t_end * k as f64 / steps as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryResult {
    pub times: Vec<f64>,
    pub states: Vec<CMatrix>,
    /// `populations[k][i] = ρ_ii(t_k)`.
    pub populations: Vec<Vec<f64>>,
    pub purity: Vec<f64>,
    pub excited_population: Vec<f64>,
    pub n_ground: usize,
}

impl TrajectoryResult {
    /// `⟨v_i|ρ(t_k)|v_i⟩` for the columns `v_i` of `basis`.
    pub fn populations_in_basis(&self, basis: &CMatrix) -> Vec<Vec<f64>> {
        self.states
            .iter()
            .map(|rho| basis.column_iter().map(|v| (v.adjoint() * rho * v)[(0, 0)].re).collect())
            .collect()
    }

    pub fn last(&self) -> &CMatrix {
        self.states.last().expect("trajectory has at least one state")
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    match times.first() {
        None => return Err(Error::InvalidTimes("empty time grid".into())),
        Some(&t0) if t0 != 0.0 => return Err(Error::InvalidTimes(format!("first time is {t0}, expected 0"))),
        _ => {}
    }
    if let Some(w) = times.windows(2).find(|w| w[1].partial_cmp(&w[0]) != Some(Ordering::Greater) || !w[1].is_finite())
    {
        return Err(Error::InvalidTimes(format!("times not strictly ascending at {} -> {}", w[0], w[1])));
    }
    Ok(())
}

/// `ρ(t_k) = exp(L t_k) ρ₀`, chained over the step increments.
pub fn propagate(l: &Superoperator, rho0: &CMatrix, times: &[f64]) -> Result<TrajectoryResult> {
    let n = l.dim();
    if rho0.nrows() != n || rho0.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: rho0.nrows() });
    }
    check_density(rho0, DENSITY_TOLERANCE)?;
    check_times(times)?;

    let mut cache: HashMap<u64, CMatrix> = HashMap::new();
    let mut states = Vec::with_capacity(times.len());
    states.push(rho0.clone());
    let mut v = vectorize(rho0);
    for w in times.windows(2) {
        let dt = w[1] - w[0];
        let step = cache.entry(dt.to_bits()).or_insert_with(|| expm(&(&l.matrix * C64::new(dt, 0.0))));
        v = &*step * v;
        states.push(unvectorize(&v, n));
    }

    let ng = l.basis.n_ground;
    Ok(TrajectoryResult {
        times: times.to_vec(),
        populations: states.iter().map(|r| (0..n).map(|i| r[(i, i)].re).collect()).collect(),
        purity: states.iter().map(purity).collect(),
        excited_population: states.iter().map(|r| excited_population(r, ng)).collect(),
        states,
        n_ground: ng,
    })
}

/// Orthonormal right null space of `L` (threshold [`KERNEL_TOLERANCE`]).
pub fn steady_state_basis(l: &Superoperator) -> NullSpace {
    null_space(&l.matrix, KERNEL_TOLERANCE)
}

/// Paired left and right null spaces of `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservedQuantitySet {
    /// `J_k`, with `Tr(J_k† L(ρ)) = 0` for every `ρ`.
    pub left: Vec<CMatrix>,
    /// `ρ_l` with `L(ρ_l) = 0`, normalized so `Tr(J_k† ρ_l) = δ_kl`.
    pub right: Vec<CMatrix>,
    /// Condition number of the raw pairing matrix `Tr(J_k† ρ_l)`.
    pub pairing_condition: f64,
}

impl ConservedQuantitySet {
    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }

    /// `Tr(J_k† ρ)` for every `k`.
    pub fn values(&self, rho: &CMatrix) -> Vec<C64> {
        let v = vectorize(rho);
        self.left.iter().map(|j| vectorize(j).dotc(&v)).collect()
    }
}

/// Biorthogonal left/right kernel bases of `L`. A left/right dimension
/// mismatch or a singular pairing signals a defective zero eigenvalue.
pub fn conserved_quantities(l: &Superoperator) -> Result<ConservedQuantitySet> {
    let n = l.dim();
    let right = null_space(&l.matrix, KERNEL_TOLERANCE);
    let left = null_space(&l.matrix.adjoint(), KERNEL_TOLERANCE);
    if left.dim() != right.dim() {
        return Err(Error::DefectiveKernel { left: left.dim(), right: right.dim() });
    }
    let k = right.dim();
    let r = CMatrix::from_columns(&right.basis);
    let j = CMatrix::from_columns(&left.basis);
    let pairing = j.adjoint() * &r;
    let sv = pairing.singular_values();
    let (smax, smin) = sv.iter().fold((0.0f64, f64::INFINITY), |(a, b), &s| (a.max(s), b.min(s)));
    let pairing_condition = if k == 0 { 1.0 } else { smax / smin };
    if k > 0 && smin.partial_cmp(&(1e-12 * smax)) != Some(Ordering::Greater) {
        return Err(Error::DefectiveKernel { left: left.dim(), right: right.rank.min(left.dim()) });
    }
    let normalized = if k == 0 {
        r
    } else {
        let inv = pairing.try_inverse().ok_or(Error::DefectiveKernel { left: k, right: k })?;
        r * inv
    };
    Ok(ConservedQuantitySet {
        left: left.basis.iter().map(|v| unvectorize(v, n)).collect(),
        right: normalized.column_iter().map(|c| unvectorize(&c.into_owned(), n)).collect(),
        pairing_condition,
    })
}

/// `ρ∞ = Σ_k Tr(J_k† ρ₀) ρ_k`.
pub fn asymptotic_state(set: &ConservedQuantitySet, rho0: &CMatrix) -> CMatrix {
    let n = rho0.nrows();
    let mut out = CMatrix::zeros(n, n);
    for (c, rho_k) in set.values(rho0).into_iter().zip(&set.right) {
        out += rho_k * c;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Relaxation {
    pub state: CMatrix,
    pub t_end: f64,
    /// `‖L vec ρ(t_end)‖`.
    pub residual: f64,
    pub converged: bool,
}

/// Propagate to [`RELAX_T_END`] (doubled once if not yet stationary).
pub fn relax(l: &Superoperator, rho0: &CMatrix) -> Result<Relaxation> {
    relax_from(l, rho0, RELAX_T_END)
}

pub fn relax_from(l: &Superoperator, rho0: &CMatrix, t_end: f64) -> Result<Relaxation> {
    check_density(rho0, DENSITY_TOLERANCE)?;
    let n = l.dim();
    let v0 = vectorize(rho0);
    let mut t = t_end;
    loop {
        let v = expm(&(&l.matrix * C64::new(t, 0.0))) * &v0;
        let residual = vector_norm(&(&l.matrix * &v));
        let converged = residual < RELAX_RESIDUAL;
        if converged || t >= 2.0 * t_end {
            return Ok(Relaxation { state: unvectorize(&v, n), t_end: t, residual, converged });
        }
        t *= 2.0;
    }
}

/// Asymptotic state from the kernel pairing, falling back to relaxation when
/// the zero eigenvalue is defective.
pub fn long_time_state(l: &Superoperator, rho0: &CMatrix) -> Result<CMatrix> {
    match conserved_quantities(l) {
        Ok(set) => Ok(asymptotic_state(&set, rho0)),
        Err(Error::DefectiveKernel { .. }) => relax(l, rho0).map(|r| r.state),
        Err(e) => Err(e),
    }
}

/// A scalar parameter of a level system addressed by a textual path.
///
/// Paths: `energy:<label>`, `rabi:i-j` (signed magnitude, negative adds π
/// to the phase), `magnitude:i-j`, `phase:i-j`, `frequency:i-j`,
/// `detuning:i-j` and `decay-scale`. Indices are one-based ground-excited.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParameterPath {
    Energy(String),
    Rabi(usize, usize),
    Magnitude(usize, usize),
    Phase(usize, usize),
    Frequency(usize, usize),
    Detuning(usize, usize),
    DecayScale,
}

impl fmt::Display for ParameterPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pair = |f: &mut fmt::Formatter<'_>, name: &str, g: usize, e: usize| write!(f, "{name}:{}-{}", g + 1, e + 1);
        match self {
            Self::Energy(label) => write!(f, "energy:{label}"),
            Self::Rabi(g, e) => pair(f, "rabi", *g, *e),
            Self::Magnitude(g, e) => pair(f, "magnitude", *g, *e),
            Self::Phase(g, e) => pair(f, "phase", *g, *e),
            Self::Frequency(g, e) => pair(f, "frequency", *g, *e),
            Self::Detuning(g, e) => pair(f, "detuning", *g, *e),
            Self::DecayScale => f.write_str("decay-scale"),
        }
    }
}

impl FromStr for ParameterPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameterPath(s.into());
        if s == "decay-scale" {
            return Ok(Self::DecayScale);
        }
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        if kind == "energy" {
            return if arg.is_empty() { Err(bad()) } else { Ok(Self::Energy(arg.into())) };
        }
        let (g, e) = arg.split_once('-').ok_or_else(bad)?;
        let index = |x: &str| x.parse::<usize>().ok().filter(|&k| k >= 1).map(|k| k - 1).ok_or_else(bad);
        let (g, e) = (index(g)?, index(e)?);
        match kind {
            "rabi" => Ok(Self::Rabi(g, e)),
            "magnitude" => Ok(Self::Magnitude(g, e)),
            "phase" => Ok(Self::Phase(g, e)),
            "frequency" => Ok(Self::Frequency(g, e)),
            "detuning" => Ok(Self::Detuning(g, e)),
            _ => Err(bad()),
        }
    }
}

impl ParameterPath {
    /// Set the addressed parameter on `system`.
    pub fn apply(&self, system: &mut LevelSystem, value: f64) -> Result<()> {
        let missing = || Error::InvalidParameterPath(format!("{self}: no such coupling or level"));
        match self {
            Self::Energy(label) => {
                let k = system.level_index(label).ok_or_else(missing)?;
                system.level_mut(k).ok_or_else(missing)?.energy = value;
            }
            Self::DecayScale => {
                for d in system.decays_mut() {
                    d.rate *= value;
                }
            }
            Self::Detuning(g, e) => {
                let (eg, ee) = match (system.ground().get(*g), system.excited().get(*e)) {
                    (Some(a), Some(b)) => (a.energy, b.energy),
                    _ => return Err(missing()),
                };
                let c = find_coupling(system, *g, *e).ok_or_else(missing)?;
                c.frequency = ee - eg - value;
            }
            Self::Rabi(g, e) | Self::Magnitude(g, e) | Self::Phase(g, e) | Self::Frequency(g, e) => {
                let c = find_coupling(system, *g, *e).ok_or_else(missing)?;
                match self {
                    Self::Rabi(..) => {
                        if value < 0.0 && c.magnitude >= 0.0 {
                            c.phase = normalize_phase(c.phase + std::f64::consts::PI);
                        }
                        c.magnitude = value.abs();
                    }
                    Self::Magnitude(..) => c.magnitude = value,
                    Self::Phase(..) => c.phase = normalize_phase(value),
                    _ => c.frequency = value,
                }
            }
        }
        Ok(())
    }
}

fn find_coupling(system: &mut LevelSystem, g: usize, e: usize) -> Option<&mut crate::model::LaserCoupling> {
    system.couplings_mut().iter_mut().find(|c| c.ground == g && c.excited == e)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanAxis {
    pub path: ParameterPath,
    pub values: Vec<f64>,
}

impl ScanAxis {
    /// `n` equally spaced values on `[min, max]`.
    pub fn linspace(path: ParameterPath, min: f64, max: f64, n: usize) -> Self {
        let values = match n {
            0 => vec![],
            1 => vec![min],
            _ => (0..n).map(|k| min + (max - min) * k as f64 / (n - 1) as f64).collect(),
        };
        Self { path, values }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Observable {
    ExcitedPopulation,
    Purity,
}

impl Observable {
    pub fn name(self) -> &'static str {
        match self {
            Self::ExcitedPopulation => "excited_population",
            Self::Purity => "purity",
        }
    }

    pub fn evaluate(self, rho: &CMatrix, n_ground: usize) -> f64 {
        match self {
            Self::ExcitedPopulation => excited_population(rho, n_ground),
            Self::Purity => purity(rho),
        }
    }
}

/// Row-major scan result: `values[i * b.len() + j]` belongs to `(a[i], b[j])`.
/// `None` marks grid points without a time-independent frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanGrid {
    pub axis_a: ScanAxis,
    pub axis_b: ScanAxis,
    pub observable: Observable,
    pub values: Vec<Option<f64>>,
}

impl ScanGrid {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values[i * self.axis_b.values.len() + j]
    }

    pub fn masked_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// Grid indices and value of the smallest unmasked cell.
    pub fn argmin(&self) -> Option<(usize, usize, f64)> {
        let nb = self.axis_b.values.len();
        self.values
            .iter()
            .enumerate()
            .filter_map(|(k, v)| v.map(|x| (k / nb, k % nb, x)))
            .min_by(|a, b| a.2.total_cmp(&b.2))
    }
}

/// Long-time observable on a two-parameter grid. Each cell rebuilds the
/// frame, Hamiltonian and generator from `template`.
pub fn parameter_scan(
    template: &LevelSystem,
    axis_a: &ScanAxis,
    axis_b: &ScanAxis,
    observable: Observable,
    initial: &InitialState,
    execution: Execution,
) -> Result<ScanGrid> {
    // surface bad paths and initial states before fanning out
    let mut probe = template.clone();
    axis_a.path.apply(&mut probe, axis_a.values.first().copied().unwrap_or(0.0))?;
    axis_b.path.apply(&mut probe, axis_b.values.first().copied().unwrap_or(0.0))?;
    initial.density(template)?;

    let nb = axis_b.values.len();
    let cells = map_indexed(axis_a.values.len() * nb, execution, |k| {
        scan_cell(template, axis_a, axis_b, k / nb, k % nb, observable, initial)
    });
    let values = cells.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ScanGrid { axis_a: axis_a.clone(), axis_b: axis_b.clone(), observable, values })
}

fn scan_cell(
    template: &LevelSystem,
    axis_a: &ScanAxis,
    axis_b: &ScanAxis,
    i: usize,
    j: usize,
    observable: Observable,
    initial: &InitialState,
) -> Result<Option<f64>> {
    let mut system = template.clone();
    axis_a.path.apply(&mut system, axis_a.values[i])?;
    axis_b.path.apply(&mut system, axis_b.values[j])?;
    let (_, l) = match generator(&system) {
        Ok(pair) => pair,
        Err(Error::InfeasibleFrame { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let rho0 = initial.density(&system)?;
    let rho = long_time_state(&l, &rho0)?;
    Ok(Some(observable.evaluate(&rho, system.n_ground())))
}

/// Right null vectors as `N × N` operators.
pub fn kernel_operators(basis: &NullSpace, n: usize) -> Vec<CMatrix> {
    basis.basis.iter().map(|v: &CVector| unvectorize(v, n)).collect()
}
