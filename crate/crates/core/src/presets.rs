//! Ready-made level systems.
//!
//! Rabi frequencies and rates are in units of a reference Rabi frequency.
//! Decay rates are listed as `γ_{excited, ground}`. Unless stated otherwise
//! lasers are resonant, so all ground levels of a connected system are
//! degenerate in the rotating frame.

use serde::Serialize;

use crate::classify::TiedEntry;
use crate::model::LevelSystem;
use crate::{Error, Result, C64};

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Two ground levels coupled to one excited level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaParams {
    pub v11: C64,
    pub v21: C64,
    /// `e1 → g1`, `e1 → g2`.
    pub gammas: [f64; 2],
    /// Laser detunings `E_e − E_g − ω`.
    pub detunings: [f64; 2],
}

impl Default for LambdaParams {
    fn default() -> Self {
        Self { v11: real(1.0), v21: real(1.0), gammas: [0.2, 0.5], detunings: [0.0, 0.0] }
    }
}

pub fn lambda_system(p: &LambdaParams) -> LevelSystem {
    LevelSystem::builder()
        .ground("g1", 0.0)
        .ground("g2", 0.0)
        .excited("e1", 10.0)
        .drive(0, 0, p.v11, p.detunings[0])
        .drive(1, 0, p.v21, p.detunings[1])
        .decay(0, 0, p.gammas[0])
        .decay(0, 1, p.gammas[1])
        .build()
}

/// Zigzag of three ground and two excited levels
/// (`g1–e1–g2–e2–g3`), optionally closed into a loop by `g3–e1`.
pub fn m_system(with_loop: bool) -> LevelSystem {
    let (eg, ee) = ([0.0, 0.3, 0.7], [10.0, 12.0]);
    let resonant = |g: usize, e: usize| ee[e] - eg[g];
    let mut b = LevelSystem::builder()
        .ground("g1", eg[0])
        .ground("g2", eg[1])
        .ground("g3", eg[2])
        .excited("e1", ee[0])
        .excited("e2", ee[1])
        .couple(0, 0, real(1.0), resonant(0, 0))
        .couple(1, 0, real(0.56), resonant(1, 0))
        .couple(1, 1, real(0.23), resonant(1, 1))
        .couple(2, 1, real(0.45), resonant(2, 1));
    if with_loop {
        // ω31 = ω21 + ω32 − ω22 keeps the frame time independent
        let w31 = resonant(1, 0) + resonant(2, 1) - resonant(1, 1);
        b = b.couple(2, 0, real(0.57), w31);
    }
    b.decay(0, 0, 0.04)
        .decay(0, 1, 0.01)
        .decay(0, 2, 0.09)
        .decay(1, 0, 0.14)
        .decay(1, 1, 0.02)
        .decay(1, 2, 0.04)
        .build()
}

/// Detuning pattern of the four-ground-level fan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FanCase {
    /// All four ground levels degenerate.
    A,
    /// `g1` detuned, `g2..g4` degenerate.
    B,
    /// Two degenerate pairs `{g1, g2}`, `{g3, g4}`.
    C,
    /// `g1`, `g2` at distinct energies, `{g3, g4}` degenerate.
    D,
}

impl FanCase {
    pub const ALL: [FanCase; 4] = [FanCase::A, FanCase::B, FanCase::C, FanCase::D];

    fn detunings(self) -> [f64; 4] {
        match self {
            Self::A => [0.0; 4],
            Self::B => [1.0, 0.0, 0.0, 0.0],
            Self::C => [1.0, 1.0, 0.0, 0.0],
            Self::D => [1.0, 2.0, 0.0, 0.0],
        }
    }
}

/// Four ground levels coupled to a single excited level with equal Rabi
/// frequencies and decay rates `0.1, 0.2, 0.3, 0.4`.
pub fn fan_system(case: FanCase) -> LevelSystem {
    let mut b = LevelSystem::builder();
    for i in 0..4 {
        b = b.ground(format!("g{}", i + 1), 0.0);
    }
    b = b.excited("e1", 10.0);
    for (i, &d) in case.detunings().iter().enumerate() {
        b = b.drive(i, 0, real(1.0), d).decay(0, i, 0.1 * (i + 1) as f64);
    }
    b.build()
}

/// Two ground and two excited levels driven by four lasers forming one loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairParams {
    pub v11: C64,
    pub v12: C64,
    pub v21: C64,
    pub v22: C64,
    /// Rotating-frame energy of `g2` relative to `g1`.
    pub ground_shift: f64,
    /// `[e1 → g1, e1 → g2, e2 → g1, e2 → g2]`.
    pub gammas: [f64; 4],
}

impl Default for PairParams {
    /// All four couplings equal: the dark-state condition holds.
    fn default() -> Self {
        Self {
            v11: real(1.0),
            v12: real(1.0),
            v21: real(1.0),
            v22: real(1.0),
            ground_shift: 0.0,
            gammas: [0.2, 0.5, 0.44, 0.7],
        }
    }
}

impl PairParams {
    /// Only `e1` driven: a Λ system with a spectator excited level.
    pub fn single_excited() -> Self {
        Self { v12: real(0.0), v22: real(0.0), ..Self::default() }
    }

    /// `V22 = 2`: the dark-state condition is violated.
    pub fn unbalanced() -> Self {
        Self { v22: real(2.0), ..Self::default() }
    }

    /// Scan template with `V12 = 2`, `V21 = V22 = 1`; dark at `V11 = 2`.
    pub fn scan_template() -> Self {
        Self { v12: real(2.0), ..Self::default() }
    }
}

/// Pair of two-level systems sharing their ground levels. Zero couplings are
/// omitted. Both `g2` lasers are detuned by `−𝓔₂`, which satisfies the loop
/// condition `ω21 = ω11 + ω22 − ω12` for any shift.
pub fn pair_two_level(p: &PairParams) -> LevelSystem {
    let mut b = LevelSystem::builder().ground("g1", 0.0).ground("g2", 0.0).excited("e1", 10.0).excited("e2", 11.0);
    for (g, e, v) in [(0, 0, p.v11), (0, 1, p.v12), (1, 0, p.v21), (1, 1, p.v22)] {
        if v.norm() > 0.0 {
            let detuning = if g == 1 { -p.ground_shift } else { 0.0 };
            b = b.drive(g, e, v, detuning);
        }
    }
    b.decay(0, 0, p.gammas[0]).decay(0, 1, p.gammas[1]).decay(1, 0, p.gammas[2]).decay(1, 1, p.gammas[3]).build()
}

/// Light polarization; `Pi` is the linear (Δm = 0) component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarization {
    Pi,
    SigmaPlus,
    SigmaMinus,
}

impl Polarization {
    pub const ALL: [Polarization; 3] = [Polarization::Pi, Polarization::SigmaPlus, Polarization::SigmaMinus];

    pub fn delta_m(self) -> i32 {
        match self {
            Self::Pi => 0,
            Self::SigmaPlus => 1,
            Self::SigmaMinus => -1,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Self::Pi => "s",
            Self::SigmaPlus => "σ+",
            Self::SigmaMinus => "σ-",
        }
    }
}

/// The two hyperfine lasers, both addressing `F' = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HyperfineLaser {
    /// `F = 2 ↔ F' = 1`.
    Upper,
    /// `F = 1 ↔ F' = 1`.
    Lower,
}

/// `F = 1, m = 0 ↔ F' = 1, m' = 0` has a vanishing transition strength and
/// is never driven nor decays.
pub const FORBIDDEN_LINE: (u8, i32, i32) = (1, 0, 0);

/// Decay rate of every dipole-allowed `F' = 1 → F` channel.
pub const RB87_DECAY_RATE: f64 = 0.1;

/// Schematic energies: `F = 1` at 0, `F = 2` at the hyperfine splitting,
/// `F' = 1` well above.
const RB87_F1: f64 = 0.0;
const RB87_F2: f64 = 6.834682;
const RB87_EXCITED: f64 = 100.0;

/// Ground sublevels in level order: `F = 2, m = −2..2`, then `F = 1, m = −1..1`.
pub fn rb87_ground_sublevels() -> Vec<(u8, i32)> {
    (-2..=2).map(|m| (2, m)).chain((-1..=1).map(|m| (1, m))).collect()
}

fn sublevel_label(f: &str, m: i32) -> String {
    let m = if m > 0 { format!("+{m}") } else { m.to_string() };
    format!("{f},m={m}")
}

/// One hyperfine excitation scheme: the polarizations carried by each laser.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rb87Scheme {
    pub id: u8,
    pub upper: Vec<Polarization>,
    pub lower: Vec<Polarization>,
}

impl Rb87Scheme {
    pub const IDS: std::ops::RangeInclusive<u8> = 1..=10;

    pub fn new(id: u8) -> Result<Self> {
        use Polarization::*;
        let pm = vec![SigmaPlus, SigmaMinus];
        let all = vec![Pi, SigmaPlus, SigmaMinus];
        let (upper, lower) = match id {
            1 => (pm, vec![]),
            2 => (vec![], pm),
            3 => (pm.clone(), pm),
            4 => (all, vec![]),
            5 => (vec![], all),
            6 => (vec![Pi], pm),
            7 => (pm, vec![Pi]),
            8 => (all, pm),
            9 => (pm, all),
            10 => (all.clone(), all),
            _ => return Err(Error::UnknownPreset(format!("rb87-{id}"))),
        };
        Ok(Self { id, upper, lower })
    }

    pub fn polarizations(&self, laser: HyperfineLaser) -> &[Polarization] {
        match laser {
            HyperfineLaser::Upper => &self.upper,
            HyperfineLaser::Lower => &self.lower,
        }
    }

    /// Driven transitions as `(ground, excited, laser, polarization)`.
    pub fn transitions(&self) -> Vec<(usize, usize, HyperfineLaser, Polarization)> {
        let mut out = Vec::new();
        for (g, (f, m)) in rb87_ground_sublevels().into_iter().enumerate() {
            let laser = if f == 2 { HyperfineLaser::Upper } else { HyperfineLaser::Lower };
            for &pol in self.polarizations(laser) {
                let mp = m + pol.delta_m();
                if !(-1..=1).contains(&mp) || (f, m, mp) == FORBIDDEN_LINE {
                    continue;
                }
                out.push((g, (mp + 1) as usize, laser, pol));
            }
        }
        out
    }

    /// Shared amplitude index of a (laser, polarization) pair.
    pub fn tie(laser: HyperfineLaser, pol: Polarization) -> usize {
        let l = match laser {
            HyperfineLaser::Upper => 0,
            HyperfineLaser::Lower => 1,
        };
        3 * l + pol as usize
    }

    /// Coupling block over `ground × excited` with entries tied to their
    /// laser polarization (unit coefficients, equal strengths).
    pub fn tied_block(&self, ground: &[usize], excited: &[usize]) -> Vec<Vec<TiedEntry>> {
        let transitions = self.transitions();
        excited
            .iter()
            .map(|&e| {
                ground
                    .iter()
                    .map(|&g| {
                        transitions.iter().find(|t| t.0 == g && t.1 == e).map(|t| (Self::tie(t.2, t.3), real(1.0)))
                    })
                    .collect()
            })
            .collect()
    }

    pub fn system(&self) -> LevelSystem {
        let ground = rb87_ground_sublevels();
        let mut b = LevelSystem::builder();
        for &(f, m) in &ground {
            let energy = if f == 2 { RB87_F2 } else { RB87_F1 };
            b = b.ground(sublevel_label(&format!("F={f}"), m), energy);
        }
        for m in -1..=1 {
            b = b.excited(sublevel_label("F'=1", m), RB87_EXCITED);
        }
        for (g, e, _, _) in self.transitions() {
            b = b.drive(g, e, real(1.0), 0.0);
        }
        for (g, &(f, m)) in ground.iter().enumerate() {
            for mp in -1..=1 {
                if (m - mp).abs() <= 1 && (f, m, mp) != FORBIDDEN_LINE {
                    b = b.decay((mp + 1) as usize, g, RB87_DECAY_RATE);
                }
            }
        }
        b.build()
    }
}

pub fn rb87_scheme(id: u8) -> Result<LevelSystem> {
    Ok(Rb87Scheme::new(id)?.system())
}

/// A named preset.
#[derive(Debug, Clone, Copy)]
pub struct PresetDescriptor {
    pub name: &'static str,
    pub description: &'static str,
    pub build: fn() -> LevelSystem,
}

impl PresetDescriptor {
    /// Rabi magnitudes (`V_ij`, ground-excited) and decay rates
    /// (`gamma_ji`, excited-ground) of the default build.
    pub fn parameters(&self) -> Vec<(String, f64)> {
        let sys = (self.build)();
        let couplings = sys.couplings().iter().map(|c| (format!("V_{}{}", c.ground + 1, c.excited + 1), c.magnitude));
        let decays = sys.decays().iter().map(|d| (format!("gamma_{}{}", d.excited + 1, d.ground + 1), d.rate));
        couplings.chain(decays).collect()
    }
}

macro_rules! rb87 {
    ($($id:literal),*) => {
        [$(PresetDescriptor {
            name: concat!("rb87-", $id),
            description: concat!("87Rb hyperfine scheme ", $id),
            build: || rb87_scheme($id).expect("valid scheme id"),
        }),*]
    };
}

/// All named presets, in CLI listing order.
pub fn catalog() -> Vec<PresetDescriptor> {
    let mut out = vec![
        PresetDescriptor {
            name: "lambda",
            description: "Λ system, equal detunings",
            build: || lambda_system(&LambdaParams::default()),
        },
        PresetDescriptor { name: "m", description: "M (zigzag) system", build: || m_system(false) },
        PresetDescriptor { name: "m-loop", description: "M system closed by a g3-e1 laser", build: || m_system(true) },
        PresetDescriptor {
            name: "fan-a",
            description: "four-level fan, all degenerate",
            build: || fan_system(FanCase::A),
        },
        PresetDescriptor { name: "fan-b", description: "four-level fan, g1 detuned", build: || fan_system(FanCase::B) },
        PresetDescriptor { name: "fan-c", description: "four-level fan, two pairs", build: || fan_system(FanCase::C) },
        PresetDescriptor {
            name: "fan-d",
            description: "four-level fan, one degenerate pair",
            build: || fan_system(FanCase::D),
        },
        PresetDescriptor {
            name: "pair",
            description: "pair of two-level systems at the dark-state condition",
            build: || pair_two_level(&PairParams::default()),
        },
    ];
    out.extend(rb87!(1, 2, 3, 4, 5, 6, 7, 8, 9, 10));
    out
}

/// Build a preset by name.
pub fn preset(name: &str) -> Result<LevelSystem> {
    catalog().into_iter().find(|p| p.name == name).map(|p| (p.build)()).ok_or_else(|| Error::UnknownPreset(name.into()))
}
