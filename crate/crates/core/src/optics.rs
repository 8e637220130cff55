//! Linear-optics realization of the approximate transpose on polarization qubits.
//!
//! Mode space is `path ⊗ polarization` with polarization `|0⟩ = v`, `|1⟩ = h`.
//! The photon enters on path 0. The PPBS sends the transmitted arm (k = 0) to
//! path 0 and the reflected arm (k = 1) to path 2; the PBS of arm `k` then
//! splits it into paths `2k + l`, with `l` the polarization after the HWP.

use std::f64::consts::PI;

use serde::Serialize;

use crate::channels::Channel;
use crate::designs::Fiducial;
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, phase_free_distance, Ket, Operator, C64, ONE};
use crate::sic_measurement::{build_two_step, TwoStepMeasurement};

pub const N_PATHS: usize = 4;
/// Nominal phase-shifter setting `e^{−iπ/4}` quoted for this layout.
pub const NOMINAL_PS_PHASE: f64 = -PI / 4.0;
pub const PS_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ElementKind {
    /// Partially-polarizing beam splitter; `t_h = r_v`, `r_h = t_v`.
    Ppbs { t_v: C64Pair, r_v: C64Pair },
    /// Half-wave plate with fast axis at `theta` radians.
    Hwp { theta: f64 },
    /// Polarizing beam splitter: v reflected onto path `2k`, h transmitted onto `2k + 1`.
    Pbs,
    /// Phase `e^{iφ}` on one polarization component.
    Ps { phi: f64, component: usize },
    /// Incoherent 4-to-1 combination.
    Coupler,
}

/// Complex amplitude as `[re, im]`.
pub type C64Pair = [f64; 2];

fn c(p: C64Pair) -> C64 {
    C64::new(p[0], p[1])
}

fn pair(z: C64) -> C64Pair {
    [z.re, z.im]
}

#[derive(Clone, Debug)]
pub struct OpticalElement {
    pub kind: ElementKind,
    /// Paths the element acts on, in the order used by its matrix.
    pub paths: Vec<usize>,
    pub matrix: Option<Operator>,
}

impl OpticalElement {
    pub fn new(kind: ElementKind, paths: Vec<usize>) -> Result<Self> {
        let matrix = match kind {
            ElementKind::Coupler => None,
            _ => Some(element_matrix(&kind)?),
        };
        if let Some(m) = &matrix {
            if m.dim() != 2 * paths.len() {
                return Err(Error::domain(format!(
                    "{:?} acts on {} modes but {} paths were given",
                    kind,
                    m.dim(),
                    paths.len()
                )));
            }
        }
        Ok(OpticalElement {
            kind,
            paths,
            matrix,
        })
    }

    /// Embeds the element into the full `N_PATHS × 2` mode space.
    fn full_matrix(&self) -> Option<Operator> {
        let m = self.matrix.as_ref()?;
        let mut full = Operator::identity(&[N_PATHS, 2]);
        let local = |i: usize| self.paths[i / 2] * 2 + i % 2;
        for i in 0..2 * self.paths.len() {
            for j in 0..2 * self.paths.len() {
                full[(local(i), local(j))] = m[(i, j)];
            }
        }
        Some(full)
    }
}

/// Matrix of an element on its own mode subspace (local path index ⊗ polarization).
pub fn element_matrix(kind: &ElementKind) -> Result<Operator> {
    match *kind {
        ElementKind::Ppbs { t_v, r_v } => {
            let (tv, rv) = (c(t_v), c(r_v));
            let norm = tv.norm_sqr() + rv.norm_sqr();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(Error::domain(format!(
                    "PPBS amplitudes have |t_v|²+|r_v|² = {norm}"
                )));
            }
            // Per polarization: [[t, −r*], [r, t*]] on (transmit, reflect).
            let amps = [(tv, rv), (rv, tv)];
            let mut m = Operator::zeros(&[2, 2]);
            for (pol, (t, r)) in amps.into_iter().enumerate() {
                m[(pol, pol)] = t;
                m[(pol, 2 + pol)] = -r.conj();
                m[(2 + pol, pol)] = r;
                m[(2 + pol, 2 + pol)] = t.conj();
            }
            Ok(m)
        }
        ElementKind::Hwp { theta } => {
            let (s, co) = (2.0 * theta).sin_cos();
            Ok(Operator::from_fn(&[2], |i, j| {
                C64::new(
                    match (i, j) {
                        (0, 0) => co,
                        (1, 1) => -co,
                        _ => s,
                    },
                    0.0,
                )
            }))
        }
        ElementKind::Pbs => {
            // v stays on the reflected port, h swaps onto the transmitted one.
            let mut m = Operator::zeros(&[2, 2]);
            m[(0, 0)] = ONE;
            m[(2, 2)] = ONE;
            m[(1, 3)] = ONE;
            m[(3, 1)] = ONE;
            Ok(m)
        }
        ElementKind::Ps { phi, component } => {
            if component > 1 {
                return Err(Error::domain(format!(
                    "polarization component {component} out of range"
                )));
            }
            let mut diag = [ONE, ONE];
            diag[component] = C64::from_polar(1.0, phi);
            Ok(Operator::diag(&diag))
        }
        ElementKind::Coupler => Err(Error::domain(
            "the coupler is an incoherent combination, not a mode transformation",
        )),
    }
}

/// Photon state on `path ⊗ polarization`.
#[derive(Clone, Debug)]
pub struct ModeState {
    pub n_paths: usize,
    pub op: Operator,
}

impl ModeState {
    pub fn path_probability(&self, path: usize) -> f64 {
        (0..2)
            .map(|c| self.op[(2 * path + c, 2 * path + c)].re)
            .sum()
    }

    /// Unnormalized polarization block of one path.
    pub fn path_block(&self, path: usize) -> Operator {
        Operator::from_fn(&[2], |i, j| self.op[(2 * path + i, 2 * path + j)])
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseReport {
    pub path: usize,
    pub k: usize,
    pub l: usize,
    pub component: usize,
    /// Solved relative phase in `(−π, π]`.
    pub solved: f64,
    pub nominal: f64,
    /// Phase-free distance between the corrected state and `|s*⟩`.
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PathRow {
    pub path: usize,
    pub k: usize,
    pub l: usize,
    pub probability: f64,
    /// `tr{ρ|s_{k,l}⟩⟨s_{k,l}|}/2`.
    pub expected: f64,
}

#[derive(Clone, Debug)]
pub struct Pipeline {
    pub fiducial: Fiducial,
    pub measurement: TwoStepMeasurement,
    /// In order: PPBS, HWPs, PBSs, PSs, coupler.
    pub elements: Vec<OpticalElement>,
    /// Mode transfer of the stages before the phase shifters.
    pub transfer: Operator,
    /// Per-path Kraus map from input polarization to path polarization.
    pub path_kraus: Vec<Operator>,
    /// Per-path conditional state before the phase shifter.
    pub path_states: Vec<Ket>,
    pub phases: Vec<PhaseReport>,
    pub ps_unitaries: Vec<Operator>,
    /// `√(K_p†K_p)`.
    sqrt_effects: Vec<Operator>,
}

fn principal(phi: f64) -> f64 {
    let mut p = phi % (2.0 * PI);
    if p <= -PI {
        p += 2.0 * PI
    } else if p > PI {
        p -= 2.0 * PI
    }
    p
}

fn solve_phase(path: usize, s: &Ket) -> Result<(f64, f64)> {
    let (a, b) = (s.amps()[0], s.amps()[1]);
    let phi = if a.norm() < 1e-14 || b.norm() < 1e-14 {
        0.0
    } else {
        principal(-2.0 * (b.arg() - a.arg()))
    };
    let corrected = Ket::new(vec![a, b * C64::from_polar(1.0, phi)]);
    let residual = phase_free_distance(&corrected, &s.conj());
    if residual > PS_TOL {
        return Err(Error::Calibration {
            path,
            reason: format!("best single phase leaves residual {residual:e}"),
        });
    }
    Ok((phi, residual))
}

/// Assembles PPBS → HWP(22.5°) per arm → PBS per arm → PS per path → coupler.
pub fn build_optical_pipeline(f: &Fiducial) -> Result<Pipeline> {
    if f.d != 2 {
        return Err(Error::domain(
            "the optical pipeline is for polarization qubits",
        ));
    }
    let measurement = build_two_step(f)?;
    let a = &measurement.first_kraus;
    let (t_v, t_h) = (a[0][(0, 0)], a[0][(1, 1)]);
    let (r_v, r_h) = (a[1][(0, 0)], a[1][(1, 1)]);
    if (t_h - r_v).norm() > 1e-12 || (r_h - t_v).norm() > 1e-12 {
        return Err(Error::domain(
            "first-step Kraus operators do not fit a PPBS with t_h = r_v, r_h = t_v",
        ));
    }

    let hwp = ElementKind::Hwp { theta: PI / 8.0 };
    let mut elements = vec![
        OpticalElement::new(
            ElementKind::Ppbs {
                t_v: pair(t_v),
                r_v: pair(r_v),
            },
            vec![0, 2],
        )?,
        OpticalElement::new(hwp, vec![0])?,
        OpticalElement::new(hwp, vec![2])?,
        OpticalElement::new(ElementKind::Pbs, vec![0, 1])?,
        OpticalElement::new(ElementKind::Pbs, vec![2, 3])?,
    ];
    let transfer = elements
        .iter()
        .filter_map(OpticalElement::full_matrix)
        .fold(Operator::identity(&[N_PATHS, 2]), |acc, m| &m * &acc);

    let mut path_kraus = Vec::with_capacity(N_PATHS);
    let mut path_states = Vec::with_capacity(N_PATHS);
    let mut phases = Vec::with_capacity(N_PATHS);
    let mut ps_unitaries = Vec::with_capacity(N_PATHS);
    let mut sqrt_effects = Vec::with_capacity(N_PATHS);
    for path in 0..N_PATHS {
        let k = Operator::from_fn(&[2], |i, j| transfer[(2 * path + i, j)]);
        let effect = &k.adjoint() * &k;
        let eig = eig_hermitian(&effect)?;
        if eig.values[0].abs() > 1e-10 || eig.values[1] < 1e-12 {
            return Err(Error::Calibration {
                path,
                reason: format!("path effect is not rank one: eigenvalues {:?}", eig.values),
            });
        }
        let s = eig.vectors[1].clone();
        sqrt_effects.push(s.projector().scale_re(eig.values[1].sqrt()));
        let (phi, residual) = solve_phase(path, &s)?;
        let ps = ElementKind::Ps { phi, component: 1 };
        ps_unitaries.push(element_matrix(&ps)?);
        elements.push(OpticalElement::new(ps, vec![path])?);
        phases.push(PhaseReport {
            path,
            k: path / 2,
            l: path % 2,
            component: 1,
            solved: phi,
            nominal: NOMINAL_PS_PHASE,
            residual,
        });
        path_kraus.push(k);
        path_states.push(s);
    }
    elements.push(OpticalElement::new(
        ElementKind::Coupler,
        (0..N_PATHS).collect(),
    )?);

    Ok(Pipeline {
        fiducial: f.clone(),
        measurement,
        elements,
        transfer,
        path_kraus,
        path_states,
        phases,
        ps_unitaries,
        sqrt_effects,
    })
}

impl Pipeline {
    /// Photon state on all paths after the PBSs, for polarization input `rho`.
    pub fn propagate(&self, rho: &Operator) -> ModeState {
        let mut inject = Operator::zeros(&[N_PATHS, 2]);
        for i in 0..2 {
            for j in 0..2 {
                inject[(i, j)] = rho[(i, j)];
            }
        }
        ModeState {
            n_paths: N_PATHS,
            op: inject.conjugate_by(&self.transfer),
        }
    }

    pub fn path_probabilities(&self, rho: &Operator) -> Vec<f64> {
        let state = self.propagate(rho);
        (0..N_PATHS).map(|p| state.path_probability(p)).collect()
    }

    /// Path probabilities next to `tr{ρ|s_{k,l}⟩⟨s_{k,l}|}/2`.
    pub fn path_table(&self, rho: &Operator) -> Vec<PathRow> {
        let orbit = self.fiducial.orbit();
        self.path_probabilities(rho)
            .into_iter()
            .enumerate()
            .map(|(path, probability)| PathRow {
                path,
                k: path / 2,
                l: path % 2,
                probability,
                expected: orbit[path].projector().trace_product(rho).re / 2.0,
            })
            .collect()
    }

    /// Polarization state after the coupler.
    ///
    /// Each path leaves the Lüders state `√E ρ √E` of its effect `E = K†K`.
    pub fn output(&self, rho: &Operator) -> Operator {
        let mut out = Operator::zeros(&[2]);
        for (root, u) in self.sqrt_effects.iter().zip(&self.ps_unitaries) {
            let post = rho.conjugate_by(root);
            out = &out + &post.conjugate_by(u);
        }
        out
    }

    pub fn output_channel(&self) -> Channel {
        Channel::from_action(2, 2, |rho| self.output(rho))
    }

    /// `max_p` phase-free distance between the conditional state of path `p` and `|s_p⟩`.
    pub fn path_state_residual(&self) -> f64 {
        self.fiducial
            .orbit()
            .iter()
            .zip(&self.path_states)
            .map(|(s, m)| phase_free_distance(s, m))
            .fold(0.0, f64::max)
    }

    /// `max_p ‖K_p†K_p − |s_p⟩⟨s_p|/2‖`.
    pub fn effect_residual(&self) -> f64 {
        self.fiducial
            .orbit()
            .iter()
            .zip(&self.path_kraus)
            .map(|(s, k)| (&k.adjoint() * k).distance(&s.projector().scale_re(0.5)))
            .fold(0.0, f64::max)
    }

    /// `‖T†T − 𝟙‖` for the pre-PS mode transfer.
    pub fn unitarity_residual(&self) -> f64 {
        (&self.transfer.adjoint() * &self.transfer).distance(&Operator::identity(&[N_PATHS, 2]))
    }
}
