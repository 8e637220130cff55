//! Quantum operations stored by their Choi–Jamiołkowski matrix.
//!
//! For an operation `E` on `d_in`-dimensional inputs the CJ matrix is
//! `χ = (I ⊗ E)[|φ+⟩⟨φ+|]` with `|φ+⟩ = Σ_i |ii⟩/√d_in`, input factor first.
//! The action is recovered as `E[ρ] = d_in · tr_A{χ (ρᵀ ⊗ 𝟙)}`.

use crate::designs::Design;
use crate::error::{Error, Result};
use crate::linalg::{
    digits, eig_hermitian, from_digits, partial_trace, DensityMatrix, Ket, Operator, C64, ONE,
    PSD_TOL, ZERO,
};

/// CJ matrices closer than this (Frobenius) are the same channel.
pub const CHANNEL_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct Channel {
    pub d_in: usize,
    pub d_out: usize,
    cj: Operator,
    kraus: Option<Vec<Operator>>,
}

/// Outcome of the complete-positivity and trace-preservation checks.
#[derive(Clone, Copy, Debug)]
pub struct CptpReport {
    pub min_cj_eigenvalue: f64,
    pub marginal_residual: f64,
    pub completely_positive: bool,
    pub trace_preserving: bool,
}

impl CptpReport {
    pub fn is_cptp(&self) -> bool {
        self.completely_positive && self.trace_preserving
    }
}

impl Channel {
    pub fn from_cj(d_in: usize, d_out: usize, cj: Operator) -> Result<Self> {
        if cj.dim() != d_in * d_out {
            return Err(Error::domain(format!(
                "CJ matrix of dimension {} does not match {d_in}·{d_out}",
                cj.dim()
            )));
        }
        let cj = cj.with_dims(&[d_in, d_out])?;
        Ok(Channel {
            d_in,
            d_out,
            cj,
            kraus: None,
        })
    }

    /// Builds the CJ matrix by applying `action` to every matrix unit `|i⟩⟨j|`.
    pub fn from_action(d_in: usize, d_out: usize, action: impl Fn(&Operator) -> Operator) -> Self {
        let mut cj = Operator::zeros(&[d_in, d_out]);
        let w = 1.0 / d_in as f64;
        for i in 0..d_in {
            for j in 0..d_in {
                let mut unit = Operator::zeros(&[d_in]);
                unit[(i, j)] = ONE;
                let out = action(&unit);
                for a in 0..d_out {
                    for b in 0..d_out {
                        cj[(i * d_out + a, j * d_out + b)] += out[(a, b)] * w;
                    }
                }
            }
        }
        Channel {
            d_in,
            d_out,
            cj,
            kraus: None,
        }
    }

    /// Channel `ρ ↦ Σ_k K_k ρ K_k†`; the Kraus list is kept alongside the CJ matrix.
    pub fn from_kraus(kraus: Vec<Operator>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::domain("empty Kraus list"))?;
        let d = first.dim();
        if kraus.iter().any(|k| k.dim() != d) {
            return Err(Error::domain("Kraus operators must share one dimension"));
        }
        let ks = kraus.clone();
        let mut ch = Channel::from_action(d, d, move |rho| {
            ks.iter()
                .fold(Operator::zeros(&[d]), |acc, k| &acc + &rho.conjugate_by(k))
        });
        ch.kraus = Some(kraus);
        Ok(ch)
    }

    pub fn identity(d: usize) -> Self {
        Channel::from_action(d, d, |rho| rho.clone())
    }

    pub fn cj(&self) -> &Operator {
        &self.cj
    }

    pub fn stored_kraus(&self) -> Option<&[Operator]> {
        self.kraus.as_deref()
    }

    /// Kraus operators from the eigendecomposition of the CJ matrix.
    pub fn kraus(&self) -> Result<Vec<Operator>> {
        if self.d_in != self.d_out {
            return Err(Error::domain("Kraus view supports square channels only"));
        }
        let eig = eig_hermitian(&self.cj)?;
        let largest = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut out = Vec::new();
        for (lambda, v) in eig.values.iter().zip(&eig.vectors) {
            if *lambda < -PSD_TOL * largest {
                return Err(Error::domain("map is not completely positive"));
            }
            if *lambda <= PSD_TOL * largest {
                continue;
            }
            let s = (self.d_in as f64 * lambda).sqrt();
            // K[a, i] = √(d λ) v[(i, a)]
            let mut k = Operator::zeros(&[self.d_out]);
            for a in 0..self.d_out {
                for i in 0..self.d_in {
                    k[(a, i)] = v.amps()[i * self.d_out + a] * s;
                }
            }
            out.push(k);
        }
        Ok(out)
    }

    pub fn cptp_report(&self) -> CptpReport {
        let eig = eig_hermitian(&self.cj).expect("CJ matrices are Hermitian");
        let largest = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let min = eig.values[0];
        let marginal = partial_trace(&self.cj, &[0]).expect("two factors");
        let marginal_residual =
            marginal.distance(&Operator::identity(&[self.d_in]).scale_re(1.0 / self.d_in as f64));
        CptpReport {
            min_cj_eigenvalue: min,
            marginal_residual,
            completely_positive: min >= -PSD_TOL * largest,
            trace_preserving: marginal_residual < CHANNEL_TOL,
        }
    }

    pub fn is_cptp(&self) -> bool {
        self.cj.hermitian_residual() < crate::linalg::HERMITIAN_TOL && self.cptp_report().is_cptp()
    }

    /// `E[ρ]_{ab} = d_in Σ_{ij} ρ_{ij} χ_{(i,a),(j,b)}`.
    pub fn apply(&self, rho: &Operator) -> Result<Operator> {
        if rho.dim() != self.d_in {
            return Err(Error::domain(format!(
                "channel expects dimension {}, got {}",
                self.d_in,
                rho.dim()
            )));
        }
        let mut out = Operator::zeros(&[self.d_out]);
        let w = self.d_in as f64;
        for i in 0..self.d_in {
            for j in 0..self.d_in {
                let r = rho[(i, j)];
                if r == ZERO {
                    continue;
                }
                for a in 0..self.d_out {
                    for b in 0..self.d_out {
                        out[(a, b)] += r * self.cj[(i * self.d_out + a, j * self.d_out + b)] * w;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn apply_state(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::new(self.apply(rho.op())?)
    }

    /// Applies the channel to tensor factor `factor` of `op`, identity elsewhere.
    pub fn apply_on_factor(&self, op: &Operator, factor: usize) -> Result<Operator> {
        let dims = op.dims().to_vec();
        if factor >= dims.len() {
            return Err(Error::Index {
                index: factor,
                factors: dims.len(),
            });
        }
        if dims[factor] != self.d_in {
            return Err(Error::domain(format!(
                "factor {factor} has dimension {}, channel expects {}",
                dims[factor], self.d_in
            )));
        }
        let mut out_dims = dims.clone();
        out_dims[factor] = self.d_out;
        let mut out = Operator::zeros(&out_dims);
        let w = self.d_in as f64;
        for r in 0..op.dim() {
            let rd = digits(r, &dims);
            for c in 0..op.dim() {
                let x = op[(r, c)];
                if x == ZERO {
                    continue;
                }
                let cd = digits(c, &dims);
                let (i, j) = (rd[factor], cd[factor]);
                let mut ro = rd.clone();
                let mut co = cd.clone();
                for a in 0..self.d_out {
                    for b in 0..self.d_out {
                        let e = self.cj[(i * self.d_out + a, j * self.d_out + b)];
                        if e == ZERO {
                            continue;
                        }
                        ro[factor] = a;
                        co[factor] = b;
                        out[(from_digits(&ro, &out_dims), from_digits(&co, &out_dims))] +=
                            x * e * w;
                    }
                }
            }
        }
        Ok(out)
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &Channel) -> Result<Channel> {
        if next.d_in != self.d_out {
            return Err(Error::domain("composition dimension mismatch"));
        }
        Ok(Channel::from_action(self.d_in, next.d_out, |rho| {
            next.apply(&self.apply(rho).expect("dims checked"))
                .expect("dims checked")
        }))
    }

    /// Frobenius distance between CJ matrices.
    pub fn distance(&self, other: &Channel) -> f64 {
        self.cj.distance(&other.cj)
    }

    /// Mixture `p·self + (1−p)·other` at the CJ level.
    pub fn mix(&self, p: f64, other: &Channel) -> Result<Channel> {
        if self.d_in != other.d_in || self.d_out != other.d_out {
            return Err(Error::domain("mixture of channels with different shapes"));
        }
        Channel::from_cj(
            self.d_in,
            self.d_out,
            &self.cj.scale_re(p) + &other.cj.scale_re(1.0 - p),
        )
    }
}

/// `𝒯[|i⟩⟨j|] = |j⟩⟨i|`; CJ matrix `V/d`, which is not positive.
pub fn transpose_map(d: usize) -> Result<Channel> {
    check_dim(d)?;
    Channel::from_cj(d, d, Operator::swap(d).scale_re(1.0 / d as f64))
}

/// `𝒟[ρ] = tr(ρ) 𝟙/d`; CJ matrix `𝟙/d²`.
pub fn depolarize_to_identity(d: usize) -> Result<Channel> {
    check_dim(d)?;
    Channel::from_cj(
        d,
        d,
        Operator::identity(&[d, d]).scale_re(1.0 / (d * d) as f64),
    )
}

/// `𝒯̃ = 𝒯/(d+1) + d𝒟/(d+1)`.
pub fn approx_transpose(d: usize) -> Result<Channel> {
    let t = transpose_map(d)?;
    t.mix(1.0 / (d as f64 + 1.0), &depolarize_to_identity(d)?)
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::domain(format!(
            "channel dimension must be >= 2, got {d}"
        )));
    }
    Ok(())
}

/// `(I ⊗ E)[|φ+⟩⟨φ+|]` for a CPTP channel.
pub fn cj_state(e: &Channel) -> Result<DensityMatrix> {
    if !e.is_cptp() {
        return Err(Error::domain(
            "CJ state requested for a map that is not CPTP",
        ));
    }
    DensityMatrix::new(e.cj.clone())
}

/// Inverse CJ map for a bipartite `d ⊗ d` state whose output marginal is `𝟙/d`.
pub fn channel_from_cj(chi: &DensityMatrix) -> Result<Channel> {
    let dims = chi.dims();
    if dims.len() != 2 {
        return Err(Error::domain(format!(
            "CJ state needs two tensor factors, got {dims:?}"
        )));
    }
    let (d_in, d_out) = (dims[0], dims[1]);
    let ch = Channel::from_cj(d_in, d_out, chi.op().clone())?;
    let residual = ch.cptp_report().marginal_residual;
    if residual >= CHANNEL_TOL {
        return Err(Error::NotTracePreserving(residual));
    }
    Ok(ch)
}

/// A measure-and-prepare scheme: outcome `k` of the POM prepares `preparations[k]`.
#[derive(Clone, Debug)]
pub struct MeasurePrepare {
    pub effects: Vec<Operator>,
    pub preparations: Vec<Ket>,
}

impl MeasurePrepare {
    pub fn new(effects: Vec<Operator>, preparations: Vec<Ket>) -> Result<Self> {
        if effects.is_empty() || effects.len() != preparations.len() {
            return Err(Error::domain("need one preparation per POM effect"));
        }
        let d = effects[0].dim();
        let mut total = Operator::zeros(&[d]);
        for e in &effects {
            let min = crate::linalg::min_eigenvalue(e)?;
            if min < -PSD_TOL {
                return Err(Error::Validation {
                    check: "effect psd",
                    residual: -min,
                });
            }
            total = &total + e;
        }
        let residual = total.distance(&Operator::identity(&[d]));
        if residual > CHANNEL_TOL {
            return Err(Error::Validation {
                check: "pom completeness",
                residual,
            });
        }
        Ok(MeasurePrepare {
            effects,
            preparations,
        })
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    /// `CJ = (1/d) Σ_k E_kᵀ ⊗ |p_k⟩⟨p_k|`.
    pub fn channel(&self) -> Channel {
        let d = self.dim();
        let mut cj = Operator::zeros(&[d, d]);
        for (e, p) in self.effects.iter().zip(&self.preparations) {
            cj = &cj + &crate::linalg::kron(&e.transpose(), &p.projector());
        }
        Channel::from_cj(d, d, cj.scale_re(1.0 / d as f64)).expect("square by construction")
    }
}

/// Measure-and-prepare realization from a coherent two-design.
#[derive(Clone, Debug)]
pub struct DesignRealization {
    pub scheme: MeasurePrepare,
    pub channel: Channel,
    /// POM weight `d/N` applied to each projector.
    pub weight: f64,
    /// Output trace for a unit-trace input when the weight is `1/N` instead.
    pub unit_weight_output_trace: f64,
}

/// Effects `(d/N)|x_k⟩⟨x_k|`, preparations `|x_k*⟩`.
pub fn measure_prepare_from_design(g: &Design) -> Result<DesignRealization> {
    if !g.is_two_design() {
        return Err(Error::domain(format!(
            "not a two-design (residual {:e})",
            g.two_design_residual
        )));
    }
    if !g.is_coherent() {
        return Err(Error::domain(format!(
            "design is not coherent (residual {:e}); its projectors cannot form a POM",
            g.coherence_residual
        )));
    }
    let n = g.len() as f64;
    let weight = g.d as f64 / n;
    let effects = g
        .vectors
        .iter()
        .map(|x| x.projector().scale_re(weight))
        .collect();
    let preparations = g.vectors.iter().map(Ket::conj).collect();
    let scheme = MeasurePrepare::new(effects, preparations)?;
    let channel = scheme.channel();
    let probe = Operator::identity(&[g.d]).scale_re(1.0 / g.d as f64);
    let unit_weight_output_trace = channel.apply(&probe)?.trace().re / weight * (1.0 / n);
    Ok(DesignRealization {
        scheme,
        channel,
        weight,
        unit_weight_output_trace,
    })
}

/// `⟨ψ*| E[|ψ⟩⟨ψ|] |ψ*⟩`.
pub fn pointwise_transpose_fidelity(e: &Channel, psi: &Ket) -> Result<f64> {
    let out = e.apply(&psi.projector())?;
    Ok(out.expectation(&psi.conj()).re)
}

/// Single-qubit Pauli basis `{𝟙, σx, σy, σz}`.
pub fn pauli_basis() -> [Operator; 4] {
    let i = C64::new(0.0, 1.0);
    [
        Operator::identity(&[2]),
        Operator::new(vec![2], vec![ZERO, ONE, ONE, ZERO]).expect("2x2"),
        Operator::new(vec![2], vec![ZERO, -i, i, ZERO]).expect("2x2"),
        Operator::diag(&[ONE, -ONE]),
    ]
}
