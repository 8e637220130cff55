//! Two-step realization of a Heisenberg–Weyl SIC measurement followed by an
//! outcome-controlled correction that prepares the conjugate SIC state.
//!
//! The first step has diagonal Kraus operators built from the fiducial
//! amplitudes, `A_k = Σ_m |m⊕k⟩ α_m ⟨m⊕k|`, and the second step measures the
//! Fourier basis, `𝔅_l = (1/d) Σ_{m,n} ω^{(m−n)l} |m⟩⟨n|`. Their composition
//! `𝔐_{k,l} = A_k† 𝔅_l A_k` must equal `|s_{k,l}⟩⟨s_{k,l}|/d`. Index and
//! conjugation conventions vary between sources, so the builder tries a fixed
//! list of variants and keeps the first one for which that equality holds.
//!
//! After outcome `(k,l)` the system is left in `|s_{k,l}⟩` and the unitary
//! `U_{k,l} = X^k Φ Z^{−2l} X^{−k}`, with `Φ = diag(α_m*/α_m)`, maps it to
//! `|s*_{k,l}⟩`.

use std::fmt;

use crate::channels::Channel;
use crate::designs::{root_of_unity, sic_from_fiducial, weyl_pair, Fiducial};
use crate::error::{Error, Result};
use crate::linalg::{phase_free_distance, DensityMatrix, Ket, Operator, C64, ZERO};

/// Assembly and correction checks pass below this residual.
pub const CONVENTION_TOL: f64 = 1e-10;

/// An index/conjugation convention for assembling the two-step measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Convention {
    /// Build `A_k` from `α_m*` instead of `α_m`.
    pub conjugate_amplitudes: bool,
    /// Use `𝔅_{−l}` in place of `𝔅_l`.
    pub negate_l: bool,
    /// Shift by `m ⊖ k` instead of `m ⊕ k`.
    pub subtract_shift: bool,
}

impl Convention {
    pub const AS_WRITTEN: Convention = Convention {
        conjugate_amplitudes: false,
        negate_l: false,
        subtract_shift: false,
    };

    /// Search order; the as-written convention comes first.
    pub fn candidates() -> Vec<Convention> {
        let mut out = Vec::new();
        for conjugate_amplitudes in [false, true] {
            for subtract_shift in [false, true] {
                for negate_l in [false, true] {
                    out.push(Convention {
                        conjugate_amplitudes,
                        negate_l,
                        subtract_shift,
                    });
                }
            }
        }
        out
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.conjugate_amplitudes {
            parts.push("conjugate amplitudes");
        }
        if self.negate_l {
            parts.push("l -> -l");
        }
        if self.subtract_shift {
            parts.push("m ⊖ k");
        }
        if parts.is_empty() {
            write!(f, "as written")
        } else {
            write!(f, "{}", parts.join(", "))
        }
    }
}

#[derive(Clone, Debug)]
pub struct TwoStepMeasurement {
    pub d: usize,
    pub fiducial: Fiducial,
    pub convention: Convention,
    /// `A_k`, k = 0..d.
    pub first_kraus: Vec<Operator>,
    /// `𝔅_l`, l = 0..d.
    pub second_effects: Vec<Operator>,
    /// `𝔐_{k,l}` at index `k·d + l`.
    pub assembled: Vec<Operator>,
    /// Residual `max_{k,l} ‖𝔐_{k,l} − |s_{k,l}⟩⟨s_{k,l}|/d‖` for every convention tried.
    pub residual_table: Vec<(Convention, f64)>,
}

fn first_step(f: &Fiducial, c: Convention) -> Vec<Operator> {
    let d = f.d;
    (0..d)
        .map(|k| {
            let mut a = Operator::zeros(&[d]);
            for (m, alpha) in f.alphas().iter().enumerate() {
                let n = if c.subtract_shift {
                    (m + d - k) % d
                } else {
                    (m + k) % d
                };
                a[(n, n)] = if c.conjugate_amplitudes {
                    alpha.conj()
                } else {
                    *alpha
                };
            }
            a
        })
        .collect()
}

fn second_step(d: usize, c: Convention) -> Vec<Operator> {
    (0..d as i64)
        .map(|l| {
            let l = if c.negate_l { -l } else { l };
            Operator::from_fn(&[d], |m, n| {
                root_of_unity(d, (m as i64 - n as i64) * l) / d as f64
            })
        })
        .collect()
}

fn assemble(first: &[Operator], second: &[Operator]) -> Vec<Operator> {
    first
        .iter()
        .flat_map(|a| second.iter().map(move |b| &(&a.adjoint() * b) * a))
        .collect()
}

/// Builds `A_k`, `𝔅_l`, `𝔐_{k,l}` under the first convention that reproduces the SIC effects.
pub fn build_two_step(f: &Fiducial) -> Result<TwoStepMeasurement> {
    let sic = sic_from_fiducial(f)?;
    let d = f.d;
    let targets: Vec<Operator> = sic
        .vectors
        .iter()
        .map(|s| s.projector().scale_re(1.0 / d as f64))
        .collect();
    let mut table = Vec::new();
    let mut chosen = None;
    for c in Convention::candidates() {
        let first = first_step(f, c);
        let second = second_step(d, c);
        let assembled = assemble(&first, &second);
        let residual = assembled
            .iter()
            .zip(&targets)
            .map(|(m, t)| m.distance(t))
            .fold(0.0, f64::max);
        table.push((c, residual));
        if chosen.is_none() && residual < CONVENTION_TOL {
            chosen = Some((c, first, second, assembled));
        }
    }
    match chosen {
        Some((convention, first_kraus, second_effects, assembled)) => Ok(TwoStepMeasurement {
            d,
            fiducial: f.clone(),
            convention,
            first_kraus,
            second_effects,
            assembled,
            residual_table: table,
        }),
        None => Err(Error::ConventionMismatch {
            best: table.iter().map(|t| t.1).fold(f64::INFINITY, f64::min),
            table: table.into_iter().map(|(c, r)| (c.to_string(), r)).collect(),
        }),
    }
}

impl TwoStepMeasurement {
    /// `|s_{k,l}⟩` at index `k·d + l`.
    pub fn sic_states(&self) -> Vec<Ket> {
        self.fiducial.orbit()
    }

    /// `max_{k,l} ‖𝔐_{k,l} − A_k†𝔅_lA_k‖`, recomputed from the stored factors.
    pub fn decomposition_residual(&self) -> f64 {
        let d = self.d;
        let mut worst = 0.0f64;
        for k in 0..d {
            let a = &self.first_kraus[k];
            for l in 0..d {
                let m = &(&a.adjoint() * &self.second_effects[l]) * a;
                worst = worst.max(m.distance(&self.assembled[k * d + l]));
            }
        }
        worst
    }

    /// `‖Σ_{k,l} 𝔐_{k,l} − 𝟙‖`.
    pub fn completeness_residual(&self) -> f64 {
        let sum = self
            .assembled
            .iter()
            .fold(Operator::zeros(&[self.d]), |acc, m| &acc + m);
        sum.distance(&Operator::identity(&[self.d]))
    }

    /// `‖Σ_k A_k†A_k − 𝟙‖`.
    pub fn first_step_residual(&self) -> f64 {
        let sum = self
            .first_kraus
            .iter()
            .fold(Operator::zeros(&[self.d]), |acc, a| {
                &acc + &(&a.adjoint() * a)
            });
        sum.distance(&Operator::identity(&[self.d]))
    }

    /// `p_{k,l} = tr(𝔅_l A_k ρ A_k†)`, evaluated step by step.
    pub fn outcome_probabilities(&self, rho: &Operator) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.d * self.d);
        for a in &self.first_kraus {
            let after_first = rho.conjugate_by(a);
            for b in &self.second_effects {
                out.push(b.trace_product(&after_first).re);
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct CorrectionSet {
    /// `Φ = diag(α_m*/α_m)`, zero where `α_m = 0`.
    pub phi: Operator,
    /// `U_{k,l}` at index `k·d + l`.
    pub unitaries: Vec<Operator>,
    /// Set when some `α_m = 0`, making `Φ` (and the `U_{k,l}`) only partial isometries.
    pub partial_isometry: bool,
}

/// `U_{k,l} = X^k Φ Z^{−2l} X^{−k}`.
pub fn correction_set(f: &Fiducial) -> Result<CorrectionSet> {
    let d = f.d;
    let w = weyl_pair(d)?;
    let mut partial_isometry = false;
    let phi_diag: Vec<C64> = f
        .alphas()
        .iter()
        .map(|a| {
            if a.norm() < 1e-14 {
                partial_isometry = true;
                ZERO
            } else {
                a.conj() / a
            }
        })
        .collect();
    let phi = Operator::diag(&phi_diag);
    let mut unitaries = Vec::with_capacity(d * d);
    for k in 0..d as i64 {
        let xk = w.displacement(k, 0);
        let xk_inv = w.displacement(-k, 0);
        for l in 0..d as i64 {
            let z = w.displacement(0, -2 * l);
            unitaries.push(&(&(&xk * &phi) * &z) * &xk_inv);
        }
    }
    Ok(CorrectionSet {
        phi,
        unitaries,
        partial_isometry,
    })
}

impl CorrectionSet {
    /// `max_{k,l}` phase-free distance between `U_{k,l}|s_{k,l}⟩` and `|s*_{k,l}⟩`.
    pub fn conjugation_residual(&self, sic_states: &[Ket]) -> f64 {
        self.unitaries
            .iter()
            .zip(sic_states)
            .map(|(u, s)| phase_free_distance(&u.apply(s), &s.conj()))
            .fold(0.0, f64::max)
    }

    /// `max_{k,l} ‖U†U − 𝟙‖`.
    pub fn unitarity_residual(&self) -> f64 {
        self.unitaries
            .iter()
            .map(|u| (&u.adjoint() * u).distance(&Operator::identity(u.dims())))
            .fold(0.0, f64::max)
    }
}

/// Two-step measurement followed by the outcome-controlled correction.
#[derive(Clone, Debug)]
pub struct TwoStepCircuit {
    pub measurement: TwoStepMeasurement,
    pub corrections: CorrectionSet,
}

#[derive(Clone, Debug)]
pub struct CircuitRun {
    /// `p_{k,l}` at index `k·d + l`.
    pub outcome_probs: Vec<f64>,
    pub output: DensityMatrix,
}

impl TwoStepCircuit {
    pub fn new(f: &Fiducial) -> Result<Self> {
        Ok(TwoStepCircuit {
            measurement: build_two_step(f)?,
            corrections: correction_set(f)?,
        })
    }

    pub fn d(&self) -> usize {
        self.measurement.d
    }

    /// Linear action on an arbitrary operator.
    ///
    /// Outcome `(k,l)` leaves the Lüders state `√𝔐 ρ √𝔐`, where `√𝔐 = √d·𝔐`
    /// for the rank-one effect `𝔐 = |s⟩⟨s|/d`, and `U_{k,l}` is applied to it.
    pub fn apply(&self, rho: &Operator) -> Operator {
        let d = self.d();
        let root_d = (d as f64).sqrt();
        let mut out = Operator::zeros(&[d]);
        for (m, u) in self
            .measurement
            .assembled
            .iter()
            .zip(&self.corrections.unitaries)
        {
            let sqrt_m = m.scale_re(root_d);
            let post = rho.conjugate_by(&sqrt_m);
            out = &out + &post.conjugate_by(u);
        }
        out
    }

    pub fn channel(&self) -> Channel {
        let d = self.d();
        Channel::from_action(d, d, |rho| self.apply(rho))
    }
}

/// Runs the circuit on `rho`, returning outcome probabilities and the output state.
pub fn simulate_circuit(f: &Fiducial, rho: &DensityMatrix) -> Result<CircuitRun> {
    if rho.dim() != f.d {
        return Err(Error::domain(format!(
            "state has dimension {}, fiducial has {}",
            rho.dim(),
            f.d
        )));
    }
    let circuit = TwoStepCircuit::new(f)?;
    let outcome_probs = circuit.measurement.outcome_probabilities(rho.op());
    let output = DensityMatrix::new(circuit.apply(rho.op()))?;
    Ok(CircuitRun {
        outcome_probs,
        output,
    })
}
