//! Dark-state classification.
//!
//! A stationary dark state lives on the ground manifold, commutes with the
//! ground block `PHP` and is annihilated by the coupling block `QHP`. The
//! ground levels are therefore partitioned into groups of equal diagonal
//! energy `𝓔_s`; inside each group the dark pure states span
//! `ker(QHP_s)`, of dimension `N_s = d_s − rank(QHP_s)`. Any density matrix
//! that is block diagonal over the groups with blocks supported on these
//! kernels is a dark steady state, so
//!
//! * `M = Σ N_s` pure dark states,
//! * `Σ N_s²` independent stationary dark operators,
//! * uniqueness iff `Σ N_s² = 1`, in which case the dark state is pure.
//!
//! A group is *case 1* when it couples to at most `d_s − 1` excited levels
//! (a kernel exists for any Rabi frequencies) and *case 2* otherwise, where a
//! kernel needs the Rabi frequencies to satisfy a determinant-type condition.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::dynamics::check_density;
use crate::linalg::{frobenius, null_space, vector_norm};
use crate::liouville::{vectorize, Superoperator};
use crate::model::LevelSystem;
use crate::rwa::{CouplingGraph, RwaHamiltonian};
use crate::{CMatrix, CVector, Error, Result, C64};

/// Numerical thresholds of the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Absolute gap that separates two ground-diagonal energies.
    pub degeneracy: f64,
    /// Relative singular-value threshold: `σ ≤ max(m, n) · σ_max · rank`.
    pub rank: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { degeneracy: 1e-8, rank: 1e-12 }
    }
}

/// Ground levels sharing one diagonal energy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyGroup {
    pub energy: f64,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseLabel {
    /// `N_e ≤ d_s − 1`: dark states exist for any Rabi frequencies.
    Case1,
    /// `N_e ≥ d_s`: dark states need a condition on the Rabi frequencies.
    Case2,
}

/// Residual of the Rabi-frequency condition of a case-2 group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RabiResidual {
    /// `det(QHP_s)` for a square block; zero iff a dark state exists.
    Determinant(C64),
    /// Smallest singular value of a tall block; zero iff a dark state exists.
    SmallestSingularValue(f64),
}

impl RabiResidual {
    pub fn magnitude(&self) -> f64 {
        match self {
            Self::Determinant(z) => z.norm(),
            Self::SmallestSingularValue(s) => *s,
        }
    }

    pub fn note(&self) -> &'static str {
        match self {
            Self::Determinant(_) => "determinant of the square coupling block; dark state iff zero",
            Self::SmallestSingularValue(_) => "smallest singular value of the coupling block; dark state iff zero",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegenerateGroup {
    pub energy: f64,
    /// Ground indices (`d_s = members.len()`).
    pub members: Vec<usize>,
    /// Excited levels coupled to at least one member.
    pub coupled_excited: Vec<usize>,
    /// Orthonormal dark pure states, as `N_g`-component vectors.
    pub kernel_basis: Vec<CVector>,
    pub rank: usize,
    pub case: CaseLabel,
    pub rabi_residual: Option<RabiResidual>,
}

impl DegenerateGroup {
    pub fn dimension(&self) -> usize {
        self.members.len()
    }

    pub fn kernel_dim(&self) -> usize {
        self.kernel_basis.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DarkClassification {
    pub groups: Vec<DegenerateGroup>,
    /// `M = Σ N_s`.
    pub total_dark_dim: usize,
    /// `Σ N_s²`.
    pub liouvillian_kernel_dim: usize,
    pub unique: bool,
    pub pure_guaranteed: bool,
    pub tolerances: Tolerances,
}

impl DarkClassification {
    pub fn has_dark_state(&self) -> bool {
        self.total_dark_dim > 0
    }

    /// All dark pure states embedded in the full `N`-level space.
    pub fn dark_vectors(&self, n_levels: usize) -> Vec<CVector> {
        self.groups
            .iter()
            .flat_map(|g| g.kernel_basis.iter())
            .map(|v| {
                let mut full = CVector::zeros(n_levels);
                full.rows_mut(0, v.len()).copy_from(v);
                full
            })
            .collect()
    }
}

/// Partition ground levels by diagonal energy (sorted-gap clustering).
pub fn degenerate_groups(h: &RwaHamiltonian, tol: f64) -> Vec<EnergyGroup> {
    let diag = &h.ground_diagonal;
    let mut order: Vec<usize> = (0..diag.len()).collect();
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]).then(a.cmp(&b)));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for i in order {
        match groups.last_mut() {
            Some(g) if diag[i] - last <= tol => g.push(i),
            _ => groups.push(vec![i]),
        }
        last = diag[i];
    }
    groups
        .into_iter()
        .map(|mut members| {
            members.sort_unstable();
            let energy = members.iter().map(|&i| diag[i]).sum::<f64>() / members.len() as f64;
            EnergyGroup { energy, members }
        })
        .collect()
}

/// `QHP_s` restricted to excited levels coupled to `members`: entry
/// `(row, col) = ⟨e|H|g_col⟩ = conj(V)`.
fn coupling_block(h: &RwaHamiltonian, members: &[usize]) -> (CMatrix, Vec<usize>) {
    let ng = h.n_ground;
    let coupled: Vec<usize> =
        (0..h.n_excited()).filter(|&j| members.iter().any(|&i| h.matrix[(ng + j, i)] != C64::new(0.0, 0.0))).collect();
    let block = CMatrix::from_fn(coupled.len(), members.len(), |r, c| h.matrix[(ng + coupled[r], members[c])]);
    (block, coupled)
}

fn case_of(coupled: usize, d: usize) -> CaseLabel {
    if coupled < d {
        CaseLabel::Case1
    } else {
        CaseLabel::Case2
    }
}

fn residual_of(block: &CMatrix) -> RabiResidual {
    if block.is_square() {
        RabiResidual::Determinant(block.determinant())
    } else {
        let sv = block.singular_values();
        RabiResidual::SmallestSingularValue(sv.iter().copied().fold(f64::INFINITY, f64::min))
    }
}

/// Rabi-condition residual of a group; rejects case-1 groups, where the
/// condition is vacuous.
pub fn rabi_condition_residual(h: &RwaHamiltonian, members: &[usize]) -> Result<RabiResidual> {
    let (block, coupled) = coupling_block(h, members);
    match case_of(coupled.len(), members.len()) {
        CaseLabel::Case1 => Err(Error::VacuousCondition),
        CaseLabel::Case2 => Ok(residual_of(&block)),
    }
}

struct BlockAnalysis {
    coupled: Vec<usize>,
    kernel: Vec<CVector>,
    rank: usize,
    case: CaseLabel,
    residual: Option<RabiResidual>,
}

fn analyse_block(h: &RwaHamiltonian, members: &[usize], rank_tol: f64) -> BlockAnalysis {
    let (block, coupled) = coupling_block(h, members);
    let ns = null_space(&block, rank_tol);
    let kernel = ns
        .basis
        .iter()
        .map(|v| {
            let mut full = CVector::zeros(h.n_ground);
            for (k, &i) in members.iter().enumerate() {
                full[i] = v[k];
            }
            full
        })
        .collect();
    let case = case_of(coupled.len(), members.len());
    let residual = (case == CaseLabel::Case2 && members.len() > 1).then(|| residual_of(&block));
    BlockAnalysis { coupled, kernel, rank: ns.rank, case, residual }
}

/// Classify every stationary dark state of the system.
pub fn dark_subspaces(h: &RwaHamiltonian, tol: Tolerances) -> DarkClassification {
    let groups: Vec<DegenerateGroup> = degenerate_groups(h, tol.degeneracy)
        .into_iter()
        .map(|g| {
            let a = analyse_block(h, &g.members, tol.rank);
            DegenerateGroup {
                energy: g.energy,
                members: g.members,
                coupled_excited: a.coupled,
                kernel_basis: a.kernel,
                rank: a.rank,
                case: a.case,
                rabi_residual: a.residual,
            }
        })
        .collect();
    let total_dark_dim = groups.iter().map(DegenerateGroup::kernel_dim).sum();
    let liouvillian_kernel_dim = groups.iter().map(|g| g.kernel_dim() * g.kernel_dim()).sum::<usize>();
    let unique = liouvillian_kernel_dim == 1;
    DarkClassification {
        groups,
        total_dark_dim,
        liouvillian_kernel_dim,
        unique,
        pure_guaranteed: unique,
        tolerances: tol,
    }
}

/// Dark manifold of one degenerate group inside one connected component of
/// the coupling graph. Disconnected subsystems that happen to share a
/// diagonal energy are reported separately here.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentManifold {
    /// Index into [`DarkClassification::groups`].
    pub group: usize,
    pub ground: Vec<usize>,
    pub excited: Vec<usize>,
    pub kernel_basis: Vec<CVector>,
    pub rank: usize,
    /// Independent loops of the component.
    pub cycles: usize,
    pub case: CaseLabel,
    pub rabi_residual: Option<RabiResidual>,
}

impl ComponentManifold {
    pub fn kernel_dim(&self) -> usize {
        self.kernel_basis.len()
    }

    /// Dimension reached if the Rabi frequencies satisfy the (minimal)
    /// condition of a case-2 block: the rank drops by one.
    pub fn conditional_dim(&self) -> usize {
        if self.kernel_dim() > 0 {
            self.kernel_dim()
        } else {
            self.ground.len() + 1 - self.rank
        }
    }
}

/// Split each degenerate group along the connected components of the coupling
/// graph. Components without couplings (sink levels) are skipped.
pub fn component_manifolds(
    system: &LevelSystem,
    h: &RwaHamiltonian,
    classification: &DarkClassification,
) -> Vec<ComponentManifold> {
    let ng = system.n_ground();
    let mut out = Vec::new();
    for comp in CouplingGraph::from_system(system).components() {
        let cycles = comp.cycle_count();
        let ground: Vec<usize> = comp.vertices.iter().copied().filter(|&v| v < ng).collect();
        for (gi, group) in classification.groups.iter().enumerate() {
            let members: Vec<usize> = ground.iter().copied().filter(|i| group.members.contains(i)).collect();
            if members.is_empty() {
                continue;
            }
            let a = analyse_block(h, &members, classification.tolerances.rank);
            out.push(ComponentManifold {
                group: gi,
                ground: members,
                excited: a.coupled,
                kernel_basis: a.kernel,
                rank: a.rank,
                cycles,
                case: a.case,
                rabi_residual: a.residual,
            });
        }
    }
    out.sort_by_key(|m| m.ground[0]);
    out
}

/// Whether `det = 0` can be met when couplings share amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TiedSolvability {
    /// The determinant vanishes identically.
    AlwaysSatisfied,
    /// A single monomial survives: no nonzero amplitudes make it vanish.
    Unsatisfiable,
    /// Several monomials: some nonzero amplitude choice satisfies it.
    AmplitudeDependent,
}

/// One entry of a coupling block whose value is `coefficient · a[tie]`.
pub type TiedEntry = Option<(usize, C64)>;

/// Expand the determinant of a square block whose entries are tied to shared
/// amplitudes (e.g. one amplitude per laser polarization) and decide whether
/// it can vanish for nonzero amplitudes. Returns `None` for non-square or
/// oversized (> 10) blocks.
pub fn tied_determinant_solvability(block: &[Vec<TiedEntry>]) -> Option<TiedSolvability> {
    let n = block.len();
    if n == 0 || n > 10 || block.iter().any(|row| row.len() != n) {
        return None;
    }
    let mut monomials: BTreeMap<Vec<usize>, C64> = BTreeMap::new();
    let mut perm = Vec::with_capacity(n);
    expand(block, 0, 0, &mut perm, &mut monomials);
    let scale = monomials.values().map(|c| c.norm()).fold(0.0, f64::max);
    let surviving = monomials.values().filter(|c| c.norm() > 1e-12 * scale.max(1e-300)).count();
    Some(match surviving {
        0 => TiedSolvability::AlwaysSatisfied,
        1 => TiedSolvability::Unsatisfiable,
        _ => TiedSolvability::AmplitudeDependent,
    })
}

fn expand(block: &[Vec<TiedEntry>], row: usize, used: u32, perm: &mut Vec<usize>, out: &mut BTreeMap<Vec<usize>, C64>) {
    let n = block.len();
    if row == n {
        let mut coeff = C64::new(permutation_sign(perm), 0.0);
        let mut ties = Vec::with_capacity(n);
        for (r, &c) in perm.iter().enumerate() {
            let (tie, k) = block[r][c].expect("only nonzero entries are expanded");
            coeff *= k;
            ties.push(tie);
        }
        ties.sort_unstable();
        *out.entry(ties).or_insert(C64::new(0.0, 0.0)) += coeff;
        return;
    }
    for c in 0..n {
        if used & (1 << c) == 0 && block[row][c].is_some() {
            perm.push(c);
            expand(block, row + 1, used | (1 << c), perm, out);
            perm.pop();
        }
    }
}

fn permutation_sign(perm: &[usize]) -> f64 {
    let mut inversions = 0;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Thresholds of [`verify_dark`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DarkThresholds {
    pub excited: f64,
    pub generator: f64,
    pub block: f64,
}

impl Default for DarkThresholds {
    fn default() -> Self {
        Self { excited: 1e-8, generator: 1e-8, block: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DarkVerdict {
    /// `‖Qρ‖_F`.
    pub excited_norm: f64,
    /// `‖L_H̃ vec ρ‖`.
    pub nonhermitian_residual: f64,
    /// `‖L vec ρ‖`.
    pub lindblad_residual: f64,
    /// Frobenius norm of the coherences between different degenerate groups.
    pub block_defect: f64,
    pub dark: bool,
}

/// Check a density matrix against the dark-state conditions.
pub fn verify_dark(
    rho: &CMatrix,
    lindblad: &Superoperator,
    nonhermitian: &Superoperator,
    classification: &DarkClassification,
    thresholds: DarkThresholds,
) -> Result<DarkVerdict> {
    let n = lindblad.dim();
    if rho.nrows() != n || rho.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: rho.nrows() });
    }
    check_density(rho, 1e-8)?;
    let ng = lindblad.basis.n_ground;
    let excited_norm = frobenius(&rho.rows(ng, n - ng).into_owned());
    let v = vectorize(rho);
    let nonhermitian_residual = vector_norm(&(&nonhermitian.matrix * &v));
    let lindblad_residual = vector_norm(&(&lindblad.matrix * &v));

    let mut owner = vec![usize::MAX; ng];
    for (s, g) in classification.groups.iter().enumerate() {
        for &i in &g.members {
            owner[i] = s;
        }
    }
    let mut defect = 0.0;
    for i in 0..ng {
        for j in 0..ng {
            if owner[i] != owner[j] {
                defect += rho[(i, j)].norm_sqr();
            }
        }
    }
    let block_defect = defect.sqrt();
    let dark = excited_norm <= thresholds.excited
        && nonhermitian_residual <= thresholds.generator
        && lindblad_residual <= thresholds.generator
        && block_defect <= thresholds.block;
    Ok(DarkVerdict { excited_norm, nonhermitian_residual, lindblad_residual, block_defect, dark })
}
