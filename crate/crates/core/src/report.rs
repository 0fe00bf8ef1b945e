//! Serializable summaries of frames, classifications and the 87Rb scheme table.

use std::fmt::Write as _;

use serde::Serialize;

use crate::classify::{
    component_manifolds, dark_subspaces, tied_determinant_solvability, CaseLabel, DarkClassification, RabiResidual,
    TiedSolvability, Tolerances,
};
use crate::model::LevelSystem;
use crate::parallel::{map_indexed, Execution};
use crate::presets::{rb87_ground_sublevels, Polarization, Rb87Scheme};
use crate::rwa::{build_hamiltonian, solve_frame, RotatingFrame};
use crate::{CVector, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledValue {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleEdge {
    pub from: String,
    pub to: String,
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleReport {
    pub edges: Vec<CycleEdge>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameReport {
    pub feasible: bool,
    pub tolerance: f64,
    pub epsilons: Vec<LabeledValue>,
    pub independent_cycles: usize,
    pub cycles: Vec<CycleReport>,
    pub cycle_space_residual: f64,
}

pub fn frame_report(system: &LevelSystem, frame: &RotatingFrame) -> FrameReport {
    let labels = system.labels();
    let edges = crate::rwa::CouplingGraph::from_system(system);
    let edges = edges.edges();
    FrameReport {
        feasible: frame.feasible,
        tolerance: frame.tolerance,
        epsilons: labels
            .iter()
            .zip(&frame.epsilons)
            .map(|(l, &v)| LabeledValue { label: l.clone(), value: v })
            .collect(),
        independent_cycles: frame.independent_cycle_count,
        cycles: frame
            .cycles
            .iter()
            .map(|c| CycleReport {
                edges: c
                    .edges
                    .iter()
                    .map(|&(k, sign)| CycleEdge {
                        from: labels[edges[k].from].clone(),
                        to: labels[edges[k].to].clone(),
                        sign,
                    })
                    .collect(),
                residual: c.residual,
            })
            .collect(),
        cycle_space_residual: frame.cycle_space_residual,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub kind: &'static str,
    pub re: f64,
    pub im: f64,
    pub magnitude: f64,
    pub note: &'static str,
}

impl From<RabiResidual> for ResidualReport {
    fn from(r: RabiResidual) -> Self {
        let (kind, re, im) = match r {
            RabiResidual::Determinant(z) => ("determinant", z.re, z.im),
            RabiResidual::SmallestSingularValue(s) => ("smallest-singular-value", s, 0.0),
        };
        Self { kind, re, im, magnitude: r.magnitude(), note: r.note() }
    }
}

fn complex_pairs(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupReport {
    pub energy: f64,
    pub members: Vec<String>,
    pub dimension: usize,
    pub coupled_excited: Vec<String>,
    pub kernel_dim: usize,
    pub rank: usize,
    pub case: CaseLabel,
    pub rabi_residual: Option<ResidualReport>,
    /// Dark pure states over the ground levels, as `[re, im]` pairs.
    pub kernel_basis: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub groups: Vec<GroupReport>,
    pub total_dark_dim: usize,
    pub liouvillian_kernel_dim: usize,
    pub unique: bool,
    pub pure_guaranteed: bool,
    pub tolerances: Tolerances,
    pub verdict: String,
}

pub fn verdict(cls: &DarkClassification) -> String {
    if !cls.has_dark_state() {
        "no dark state".into()
    } else if cls.unique {
        "unique dark state (pure)".into()
    } else {
        format!("{} dark pure states, {} stationary dark operators", cls.total_dark_dim, cls.liouvillian_kernel_dim)
    }
}

pub fn classification_report(system: &LevelSystem, cls: &DarkClassification) -> ClassificationReport {
    let labels = system.labels();
    let ng = system.n_ground();
    ClassificationReport {
        groups: cls
            .groups
            .iter()
            .map(|g| GroupReport {
                energy: g.energy,
                members: g.members.iter().map(|&i| labels[i].clone()).collect(),
                dimension: g.dimension(),
                coupled_excited: g.coupled_excited.iter().map(|&j| labels[ng + j].clone()).collect(),
                kernel_dim: g.kernel_dim(),
                rank: g.rank,
                case: g.case,
                rabi_residual: g.rabi_residual.map(Into::into),
                kernel_basis: g.kernel_basis.iter().map(complex_pairs).collect(),
            })
            .collect(),
        total_dark_dim: cls.total_dark_dim,
        liouvillian_kernel_dim: cls.liouvillian_kernel_dim,
        unique: cls.unique,
        pure_guaranteed: cls.pure_guaranteed,
        tolerances: cls.tolerances,
        verdict: verdict(cls),
    }
}

/// Plain-text group table.
pub fn render_classification(report: &ClassificationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<8} {:<28} {:>3} {:>3} {:>4}  {:<6} rabi residual",
        "energy", "members", "d", "N", "rank", "case"
    );
    for g in &report.groups {
        let residual =
            g.rabi_residual.as_ref().map_or("-".to_string(), |r| format!("{:.3e} ({})", r.magnitude, r.kind));
        let case = match g.case {
            CaseLabel::Case1 => "1",
            CaseLabel::Case2 => "2",
        };
        let _ = writeln!(
            out,
            "{:<8.4} {:<28} {:>3} {:>3} {:>4}  {:<6} {}",
            if g.energy.abs() < 5e-5 { 0.0 } else { g.energy },
            g.members.join(" "),
            g.dimension,
            g.kernel_dim,
            g.rank,
            case,
            residual
        );
    }
    let _ = writeln!(out, "dark pure states M = {}", report.total_dark_dim);
    let _ = writeln!(out, "stationary dark operators = {}", report.liouvillian_kernel_dim);
    let _ = writeln!(out, "verdict: {}", report.verdict);
    out
}

/// One dark manifold of an 87Rb scheme.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rb87Manifold {
    pub states: String,
    pub ground: Vec<String>,
    pub excited: Vec<String>,
    pub dim: usize,
    pub pure: bool,
    pub cycles: usize,
    /// Dark only if the Rabi frequencies satisfy a condition.
    pub rabi_conditioned: bool,
    /// Whether that condition can be met with one amplitude per polarization.
    pub condition: Option<TiedSolvability>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rb87Row {
    pub scheme: u8,
    pub upper: Vec<Polarization>,
    pub lower: Vec<Polarization>,
    /// Ground sublevels driven by at least one laser.
    pub coupled_ground: usize,
    pub manifolds: Vec<Rb87Manifold>,
}

/// `F=2, M=-2,0,+2 / F=1, M=0` style listing.
pub fn rb87_states(ground: &[usize]) -> String {
    let sub = rb87_ground_sublevels();
    let mut parts = Vec::new();
    for f in [2u8, 1] {
        let ms: Vec<String> = ground
            .iter()
            .map(|&g| sub[g])
            .filter(|&(ff, _)| ff == f)
            .map(|(_, m)| if m > 0 { format!("+{m}") } else { m.to_string() })
            .collect();
        if !ms.is_empty() {
            parts.push(format!("F={f}, M={}", ms.join(",")));
        }
    }
    parts.join(" / ")
}

pub fn rb87_row(id: u8, tol: Tolerances) -> Result<Rb87Row> {
    let scheme = Rb87Scheme::new(id)?;
    let system = scheme.system();
    let h = build_hamiltonian(&system, &solve_frame(&system))?;
    let cls = dark_subspaces(&h, tol);
    let labels = system.labels();
    let ng = system.n_ground();
    let mut coupled: Vec<usize> = system.couplings().iter().map(|c| c.ground).collect();
    coupled.sort_unstable();
    coupled.dedup();

    let manifolds = component_manifolds(&system, &h, &cls)
        .into_iter()
        .filter_map(|m| {
            let conditioned = m.kernel_dim() == 0 && m.rabi_residual.is_some();
            if m.kernel_dim() == 0 && !conditioned {
                return None;
            }
            let dim = m.conditional_dim();
            let condition =
                conditioned.then(|| tied_determinant_solvability(&scheme.tied_block(&m.ground, &m.excited))).flatten();
            Some(Rb87Manifold {
                states: rb87_states(&m.ground),
                ground: m.ground.iter().map(|&g| labels[g].clone()).collect(),
                excited: m.excited.iter().map(|&e| labels[ng + e].clone()).collect(),
                dim,
                pure: dim == 1,
                cycles: m.cycles,
                rabi_conditioned: conditioned,
                condition,
            })
        })
        .collect();
    Ok(Rb87Row { scheme: id, upper: scheme.upper, lower: scheme.lower, coupled_ground: coupled.len(), manifolds })
}

/// All ten schemes, evaluated independently.
pub fn rb87_table(tol: Tolerances, execution: Execution) -> Result<Vec<Rb87Row>> {
    let ids: Vec<u8> = Rb87Scheme::IDS.collect();
    map_indexed(ids.len(), execution, |k| rb87_row(ids[k], tol)).into_iter().collect()
}

/// Text rendering in the layout of the usual scheme table: polarization
/// marks for both lasers, then up to two manifolds.
pub fn render_rb87_table(rows: &[Rb87Row]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>2} | {:^8} | {:^8} | {:<44} {:>3} {:>4} {:>3} | {:<44} {:>3} {:>4} {:>3}",
        "#", "F2-F'1", "F1-F'1", "d1 states", "dim", "pure", "cyc", "d2 states", "dim", "pure", "cyc"
    );
    let marks = |pols: &[Polarization]| {
        Polarization::ALL.iter().map(|p| if pols.contains(p) { p.symbol() } else { "." }).collect::<Vec<_>>().join(" ")
    };
    for row in rows {
        let _ = write!(out, "{:>2} | {:^8} | {:^8}", row.scheme, marks(&row.upper), marks(&row.lower));
        for m in row.manifolds.iter().take(2) {
            let mut states = m.states.clone();
            if m.rabi_conditioned {
                states.push_str(" *");
            }
            let pure = if m.pure { "yes" } else { "no" };
            let _ = write!(out, " | {:<44} {:>3} {:>4} {:>3}", states, m.dim, pure, m.cycles);
        }
        out.push('\n');
        for m in &row.manifolds {
            if m.rabi_conditioned {
                let note = match m.condition {
                    Some(TiedSolvability::Unsatisfiable) => "condition unsatisfiable under polarization equality",
                    Some(TiedSolvability::AmplitudeDependent) => "condition satisfiable by tuning intensities",
                    Some(TiedSolvability::AlwaysSatisfied) => "condition always satisfied",
                    None => "condition not analysed",
                };
                let _ = writeln!(out, "   * Rabi-conditioned; {note}");
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn states_listing() {
        assert_eq!(rb87_states(&[0, 2, 4, 6]), "F=2, M=-2,0,+2 / F=1, M=0");
        assert_eq!(rb87_states(&[5, 7]), "F=1, M=-1,+1");
    }

    #[test]
    fn scheme_one_has_two_pure_manifolds() {
        let row = rb87_row(1, Tolerances::default()).unwrap();
        assert_eq!(row.coupled_ground, 5);
        let dims: Vec<_> = row.manifolds.iter().map(|m| (m.dim, m.pure, m.cycles)).collect();
        assert_eq!(dims, vec![(1, true, 0), (1, true, 0)]);
        assert_eq!(row.manifolds[0].states, "F=2, M=-2,0,+2");
        assert_eq!(row.manifolds[1].states, "F=2, M=-1,+1");
    }
}
