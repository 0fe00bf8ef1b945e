//! Rotating-frame feasibility and the time-independent RWA Hamiltonian.
//!
//! Each laser edge imposes `ε_to − ε_from = ω` on the frame energies. A
//! spanning forest of the coupling graph fixes `ε` (component roots at zero);
//! every non-tree edge closes a cycle whose signed frequency sum must vanish.
//! For a ground/excited coupling the edge runs ground → excited, so the frame
//! Hamiltonian diagonal reproduces `Δ = E_e − E_g − ω`.

use std::collections::VecDeque;

use nalgebra::DMatrix;

use crate::model::LevelSystem;
use crate::{CMatrix, Error, Result, C64};

/// Relative tolerance for cycle residuals: `tol · max(1, max|ω|)`.
pub const DEFAULT_FRAME_TOLERANCE: f64 = 1e-9;

/// Oriented frequency constraint `ε[to] − ε[from] = frequency`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameEdge {
    pub from: usize,
    pub to: usize,
    pub frequency: f64,
}

/// A fundamental cycle closed by one non-tree edge.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleConstraint {
    /// Edge indices with traversal sign; `Σ sign·ω` over the list is the residual.
    pub edges: Vec<(usize, i8)>,
    /// Signed frequency sum around the cycle (zero when consistent).
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RotatingFrame {
    pub epsilons: Vec<f64>,
    pub feasible: bool,
    pub cycles: Vec<CycleConstraint>,
    pub independent_cycle_count: usize,
    /// Absolute residual tolerance used for the verdict.
    pub tolerance: f64,
    /// Basis-independent mismatch: norm of the projection of `ω` onto the
    /// cycle space (equivalently the least-squares residual over all `ε`).
    pub cycle_space_residual: f64,
}

impl RotatingFrame {
    pub fn violated(&self) -> usize {
        self.cycles.iter().filter(|c| c.residual.abs() > self.tolerance).count()
    }
}

/// Undirected view of a set of oriented edges over `n` vertices.
#[derive(Debug, Clone)]
pub struct CouplingGraph {
    n: usize,
    edges: Vec<FrameEdge>,
    adjacency: Vec<Vec<usize>>,
}

/// A connected component that contains at least one edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

impl Component {
    pub fn cycle_count(&self) -> usize {
        self.edges.len() + 1 - self.vertices.len()
    }
}

impl CouplingGraph {
    pub fn new(n: usize, edges: Vec<FrameEdge>) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for (k, e) in edges.iter().enumerate() {
            adjacency[e.from].push(k);
            if e.to != e.from {
                adjacency[e.to].push(k);
            }
        }
        Self { n, edges, adjacency }
    }

    /// Laser edges of a level system, ground → excited, in basis indices.
    pub fn from_system(system: &LevelSystem) -> Self {
        let edges = system
            .couplings()
            .iter()
            .map(|c| FrameEdge { from: c.ground, to: system.excited_index(c.excited), frequency: c.frequency })
            .collect();
        Self::new(system.n_levels(), edges)
    }

    pub fn edges(&self) -> &[FrameEdge] {
        &self.edges
    }

    /// Components with at least one edge, ordered by their smallest vertex.
    pub fn components(&self) -> Vec<Component> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for root in 0..self.n {
            if seen[root] || self.adjacency[root].is_empty() {
                continue;
            }
            let mut vertices = vec![root];
            let mut edges = Vec::new();
            let mut edge_seen = vec![false; self.edges.len()];
            seen[root] = true;
            let mut queue = VecDeque::from([root]);
            while let Some(v) = queue.pop_front() {
                for &k in &self.adjacency[v] {
                    if !edge_seen[k] {
                        edge_seen[k] = true;
                        edges.push(k);
                    }
                    let w = self.other(k, v);
                    if !seen[w] {
                        seen[w] = true;
                        vertices.push(w);
                        queue.push_back(w);
                    }
                }
            }
            vertices.sort_unstable();
            edges.sort_unstable();
            out.push(Component { vertices, edges });
        }
        out
    }

    /// `#edges − #touched vertices + #components`.
    pub fn cycle_count(&self) -> usize {
        self.components().iter().map(Component::cycle_count).sum()
    }

    fn other(&self, edge: usize, v: usize) -> usize {
        let e = &self.edges[edge];
        if e.from == v {
            e.to
        } else {
            e.from
        }
    }

    /// Solve the frame constraints over a BFS spanning forest.
    pub fn solve(&self, rel_tol: f64) -> RotatingFrame {
        let max_w = self.edges.iter().map(|e| e.frequency.abs()).fold(0.0, f64::max);
        let tolerance = rel_tol * max_w.max(1.0);
        let mut eps = vec![0.0; self.n];
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; self.n];
        let mut depth = vec![0usize; self.n];
        let mut seen = vec![false; self.n];
        let mut tree_edge = vec![false; self.edges.len()];

        for root in 0..self.n {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let mut queue = VecDeque::from([root]);
            while let Some(v) = queue.pop_front() {
                for &k in &self.adjacency[v] {
                    let w = self.other(k, v);
                    if seen[w] {
                        continue;
                    }
                    let e = &self.edges[k];
                    eps[w] = if e.from == v { eps[v] + e.frequency } else { eps[v] - e.frequency };
                    seen[w] = true;
                    parent[w] = Some((v, k));
                    depth[w] = depth[v] + 1;
                    tree_edge[k] = true;
                    queue.push_back(w);
                }
            }
        }

        let mut cycles = Vec::new();
        for (k, e) in self.edges.iter().enumerate() {
            if tree_edge[k] {
                continue;
            }
            // tree path from -> to, then back along the closing edge
            let (mut a, mut b) = (e.from, e.to);
            let mut up = Vec::new();
            let mut down = Vec::new();
            while a != b {
                if depth[a] >= depth[b] {
                    let (p, pk) = parent[a].expect("non-root has a parent");
                    // moving a -> p against/along the edge orientation
                    let sign = if self.edges[pk].from == a { 1 } else { -1 };
                    up.push((pk, sign));
                    a = p;
                } else {
                    let (p, pk) = parent[b].expect("non-root has a parent");
                    // recorded later in the p -> b direction
                    let sign = if self.edges[pk].from == p { 1 } else { -1 };
                    down.push((pk, sign));
                    b = p;
                }
            }
            let mut path = up;
            path.extend(down.into_iter().rev());
            path.push((k, -1));
            let residual = path.iter().map(|&(j, s)| f64::from(s) * self.edges[j].frequency).sum();
            cycles.push(CycleConstraint { edges: path, residual });
        }

        let cycle_space_residual = self.cycle_space_norm(&cycles);
        let feasible = cycles.iter().all(|c| c.residual.abs() <= tolerance);
        RotatingFrame {
            epsilons: eps,
            feasible,
            independent_cycle_count: cycles.len(),
            cycles,
            tolerance,
            cycle_space_residual,
        }
    }

    // ‖P_cycle ω‖ = sqrt(rᵀ (C Cᵀ)⁻¹ r), with C the signed cycle-edge matrix
    fn cycle_space_norm(&self, cycles: &[CycleConstraint]) -> f64 {
        if cycles.is_empty() {
            return 0.0;
        }
        let k = cycles.len();
        let m = self.edges.len();
        let mut c = DMatrix::<f64>::zeros(k, m);
        for (row, cyc) in cycles.iter().enumerate() {
            for &(j, s) in &cyc.edges {
                c[(row, j)] += f64::from(s);
            }
        }
        let r = nalgebra::DVector::from_iterator(k, cycles.iter().map(|c| c.residual));
        let gram = &c * c.transpose();
        match gram.cholesky() {
            Some(ch) => r.dot(&ch.solve(&r)).max(0.0).sqrt(),
            None => f64::NAN,
        }
    }
}

/// Solve the rotating frame of a level system with the default tolerance.
pub fn solve_frame(system: &LevelSystem) -> RotatingFrame {
    solve_frame_with_tolerance(system, DEFAULT_FRAME_TOLERANCE)
}

pub fn solve_frame_with_tolerance(system: &LevelSystem, rel_tol: f64) -> RotatingFrame {
    CouplingGraph::from_system(system).solve(rel_tol)
}

/// Generic constraint solver for arbitrary (not necessarily bipartite) edges.
pub fn solve_constraints(n_levels: usize, edges: &[FrameEdge], rel_tol: f64) -> RotatingFrame {
    CouplingGraph::new(n_levels, edges.to_vec()).solve(rel_tol)
}

/// Independent loops of the laser coupling graph.
pub fn count_cycles(system: &LevelSystem) -> usize {
    CouplingGraph::from_system(system).cycle_count()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detuning {
    pub ground: usize,
    pub excited: usize,
    pub value: f64,
}

/// Time-independent Hamiltonian in the rotating frame.
#[derive(Debug, Clone, PartialEq)]
pub struct RwaHamiltonian {
    pub matrix: CMatrix,
    pub detunings: Vec<Detuning>,
    /// `E_i − ε_i` for ground levels after the global shift.
    pub ground_diagonal: Vec<f64>,
    pub n_ground: usize,
}

impl RwaHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_excited(&self) -> usize {
        self.dim() - self.n_ground
    }
}

/// Build `H = Σ (E_k − ε_k)|k⟩⟨k| + Σ (V_ij |g_i⟩⟨e_j| + h.c.)`, shifted so the
/// first ground level sits at zero. Counter-rotating terms are dropped.
pub fn build_hamiltonian(system: &LevelSystem, frame: &RotatingFrame) -> Result<RwaHamiltonian> {
    let n = system.n_levels();
    if frame.epsilons.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: frame.epsilons.len() });
    }
    if !frame.feasible {
        return Err(Error::InfeasibleFrame { violated: frame.violated() });
    }
    let energies = system.energies();
    let diag: Vec<f64> = energies.iter().zip(&frame.epsilons).map(|(e, eps)| e - eps).collect();
    let shift = diag.first().copied().unwrap_or(0.0);
    let mut h = CMatrix::zeros(n, n);
    for (k, d) in diag.iter().enumerate() {
        h[(k, k)] = C64::new(d - shift, 0.0);
    }
    let mut detunings = Vec::with_capacity(system.couplings().len());
    for c in system.couplings() {
        let (i, j) = (c.ground, system.excited_index(c.excited));
        let v = c.rabi();
        h[(i, j)] = v;
        h[(j, i)] = v.conj();
        detunings.push(Detuning { ground: c.ground, excited: c.excited, value: system.detuning(c) });
    }
    let ground_diagonal = (0..system.n_ground()).map(|i| h[(i, i)].re).collect();
    Ok(RwaHamiltonian { matrix: h, detunings, ground_diagonal, n_ground: system.n_ground() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LevelSystem;

    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }

    fn pairs(omega21_shift: f64) -> LevelSystem {
        let (w11, w12, w22) = (10.0, 12.5, 11.0);
        LevelSystem::builder()
            .ground("g1", 0.0)
            .ground("g2", 1.5)
            .excited("e1", 10.0)
            .excited("e2", 12.5)
            .couple(0, 0, one(), w11)
            .couple(0, 1, one(), w12)
            .couple(1, 1, one(), w22)
            .couple(1, 0, one(), w11 + w22 - w12 + omega21_shift)
            .build()
    }

    #[test]
    fn lambda_is_a_tree() {
        let sys = LevelSystem::builder()
            .ground("g1", 0.0)
            .ground("g2", 0.3)
            .excited("e1", 10.0)
            .couple(0, 0, one(), 3.0)
            .couple(1, 0, one(), 17.0)
            .build();
        let frame = solve_frame(&sys);
        assert!(frame.feasible);
        assert_eq!(frame.independent_cycle_count, 0);
        assert_eq!(count_cycles(&sys), 0);
    }

    #[test]
    fn pairs_loop_consistent() {
        let frame = solve_frame(&pairs(0.0));
        assert!(frame.feasible);
        assert_eq!(frame.independent_cycle_count, 1);
        assert!(frame.cycles[0].residual.abs() < 1e-12);
        assert_eq!(frame.cycles[0].edges.len(), 4);
    }

    #[test]
    fn pairs_loop_perturbed() {
        let frame = solve_frame(&pairs(0.1));
        assert!(!frame.feasible);
        assert!((frame.cycles[0].residual.abs() - 0.1).abs() < 1e-12);
        assert!(matches!(build_hamiltonian(&pairs(0.1), &frame), Err(Error::InfeasibleFrame { violated: 1 })));
    }

    #[test]
    fn frame_reproduces_frequencies() {
        let sys = pairs(0.0);
        let frame = solve_frame(&sys);
        for c in sys.couplings() {
            let d = frame.epsilons[sys.excited_index(c.excited)] - frame.epsilons[c.ground];
            assert!((d - c.frequency).abs() <= 1e-10 * c.frequency);
        }
    }

    #[test]
    fn lambda_equal_detuning_hamiltonian() {
        let delta = 0.7;
        let sys = LevelSystem::builder()
            .ground("g1", 0.0)
            .ground("g2", 0.3)
            .excited("e1", 10.0)
            .drive(0, 0, one(), delta)
            .drive(1, 0, one(), delta)
            .build();
        let h = build_hamiltonian(&sys, &solve_frame(&sys)).unwrap();
        assert!(h.ground_diagonal.iter().all(|d| d.abs() < 1e-12));
        assert!((h.matrix[(2, 2)].re - delta).abs() < 1e-12);
        assert!(h.detunings.iter().all(|d| (d.value - delta).abs() < 1e-12));
    }

    #[test]
    fn no_couplings_gives_diagonal() {
        let sys = LevelSystem::builder().ground("g1", 0.0).ground("g2", 1.0).excited("e1", 5.0).build();
        let h = build_hamiltonian(&sys, &solve_frame(&sys)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(h.matrix[(i, j)], C64::new(0.0, 0.0));
                }
            }
        }
        assert_eq!(h.ground_diagonal, vec![0.0, 1.0]);
    }

    #[test]
    fn triangle_with_cyclic_orientation() {
        // ε1 − ε2 = ω12, ε2 − ε3 = ω23, ε3 − ε1 = ω13: consistent iff the sum vanishes
        let edges = |w13: f64| {
            [
                FrameEdge { from: 1, to: 0, frequency: 2.0 },
                FrameEdge { from: 2, to: 1, frequency: 3.0 },
                FrameEdge { from: 0, to: 2, frequency: w13 },
            ]
        };
        assert!(solve_constraints(3, &edges(-5.0), 1e-9).feasible);
        let bad = solve_constraints(3, &edges(-4.0), 1e-9);
        assert!(!bad.feasible);
        assert!((bad.cycles[0].residual.abs() - 1.0).abs() < 1e-12);
    }
}
