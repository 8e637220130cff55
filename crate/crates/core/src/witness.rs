//! Entanglement witnesses and their structural physical approximations.

use serde::Serialize;

use crate::channels::{approx_transpose, measure_prepare_from_design, Channel};
use crate::designs::{sic_from_fiducial, Design, Fiducial};
use crate::error::{Error, Result};
use crate::estimator::EstimatorBlock;
use crate::linalg::{
    eig_hermitian, kron, min_eigenvalue, partial_transpose, DensityMatrix, Ket, Operator, C64,
    HERMITIAN_TOL, TRACE_TOL,
};

/// Half-width of the band around the threshold reported as `boundary`.
pub const BOUNDARY_TOL: f64 = 1e-9;
/// Partial-transpose eigenvalues below `−PPT_TOL` count as negative.
pub const PPT_TOL: f64 = 1e-9;
/// Commonly quoted value for the tripartite example at the cut `A|BC`.
pub const NOMINAL_TRIPARTITE_VALUE: f64 = 1.0 / 18.0;

/// Hermitian, unit-trace operator; `dims` carries the party structure.
#[derive(Clone, Debug)]
pub struct Witness {
    op: Operator,
}

impl Witness {
    pub fn new(op: Operator) -> Result<Self> {
        let herm = op.hermitian_residual();
        if herm > HERMITIAN_TOL {
            return Err(Error::Validation {
                check: "hermitian",
                residual: herm,
            });
        }
        let tr = (op.trace() - C64::new(1.0, 0.0)).norm();
        if tr > TRACE_TOL {
            return Err(Error::Validation {
                check: "trace",
                residual: tr,
            });
        }
        Ok(Witness { op })
    }

    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn dims(&self) -> &[usize] {
        self.op.dims()
    }

    /// `tr{Wρ}`.
    pub fn expectation(&self, rho: &DensityMatrix) -> Result<f64> {
        check_dims(rho.op(), &self.op)?;
        Ok(self.op.trace_product(rho.op()).re)
    }
}

fn check_dims(rho: &Operator, w: &Operator) -> Result<()> {
    if rho.dim() != w.dim() {
        return Err(Error::domain(format!(
            "state has dimension {}, witness has {}",
            rho.dim(),
            w.dim()
        )));
    }
    Ok(())
}

/// `W = V/d`, the normalized CJ operator of the transpose.
pub fn transpose_witness(d: usize) -> Result<Witness> {
    if d < 2 {
        return Err(Error::domain("transpose witness needs d ≥ 2"));
    }
    Witness::new(
        Operator::swap(d)
            .scale_re(1.0 / d as f64)
            .with_dims(&[d, d])?,
    )
}

fn spa_state(w: &Operator, p: f64) -> Operator {
    let big_d = w.dim() as f64;
    &w.scale_re(1.0 - p) + &Operator::identity(w.dims()).scale_re(p / big_d)
}

/// `p_min = |λ|D/(1 + |λ|D)` for the most negative eigenvalue `λ` of `W`.
pub fn spa_pmin(w: &Witness) -> Result<f64> {
    let lambda = min_eigenvalue(w.op())?.min(0.0);
    let x = lambda.abs() * w.op().dim() as f64;
    Ok(x / (1.0 + x))
}

#[derive(Clone, Debug, Serialize)]
pub struct PminCertificate {
    pub p_min: f64,
    /// `λ_min(ρ_W̃)` at `p_min`.
    pub min_eigenvalue_at: f64,
    /// `λ_min(ρ_W̃)` at `p_min·(1 − 1e-6)`; `None` when `W` is already PSD.
    pub min_eigenvalue_below: Option<f64>,
}

impl PminCertificate {
    pub fn holds(&self) -> bool {
        self.min_eigenvalue_at >= -1e-12 && self.min_eigenvalue_below.is_none_or(|v| v < 0.0)
    }
}

pub fn pmin_certificate(w: &Witness) -> Result<PminCertificate> {
    let p_min = spa_pmin(w)?;
    let min_eigenvalue_at = min_eigenvalue(&spa_state(w.op(), p_min))?;
    let min_eigenvalue_below = if p_min > 0.0 {
        Some(min_eigenvalue(&spa_state(w.op(), p_min * (1.0 - 1e-6)))?)
    } else {
        None
    };
    Ok(PminCertificate {
        p_min,
        min_eigenvalue_at,
        min_eigenvalue_below,
    })
}

/// `Σ_k q_k τ_k ⊗ σ_k`.
#[derive(Clone, Debug)]
pub struct SeparableDecomposition {
    pub weights: Vec<f64>,
    pub left: Vec<DensityMatrix>,
    pub right: Vec<DensityMatrix>,
}

impl SeparableDecomposition {
    pub fn new(
        weights: Vec<f64>,
        left: Vec<DensityMatrix>,
        right: Vec<DensityMatrix>,
    ) -> Result<Self> {
        if weights.len() != left.len() || weights.len() != right.len() || weights.is_empty() {
            return Err(Error::domain("decomposition terms have mismatched lengths"));
        }
        if weights.iter().any(|&q| q < 0.0) {
            return Err(Error::domain("decomposition weights must be nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Validation {
                check: "weights",
                residual: (total - 1.0).abs(),
            });
        }
        let (dl, dr) = (left[0].dim(), right[0].dim());
        if left.iter().any(|t| t.dim() != dl) || right.iter().any(|s| s.dim() != dr) {
            return Err(Error::domain("decomposition factors have mixed dimensions"));
        }
        Ok(SeparableDecomposition {
            weights,
            left,
            right,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dims(&self) -> [usize; 2] {
        [self.left[0].dim(), self.right[0].dim()]
    }

    pub fn reconstruct(&self) -> Operator {
        let dims = self.dims();
        self.weights
            .iter()
            .zip(self.left.iter().zip(&self.right))
            .fold(Operator::zeros(&dims), |acc, (q, (t, s))| {
                &acc + &kron(t.op(), s.op()).scale_re(*q)
            })
    }
}

#[derive(Clone, Debug)]
pub struct ApproxWitness {
    pub state: DensityMatrix,
    pub p_min: f64,
    pub threshold: f64,
    pub source: Option<Witness>,
    pub decomposition: Option<SeparableDecomposition>,
}

impl ApproxWitness {
    /// Largest violation of the stored invariants (threshold, mixture form, decomposition).
    pub fn invariant_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        if let Some(w) = &self.source {
            let big_d = w.op().dim() as f64;
            worst = worst.max((self.threshold - self.p_min / big_d).abs());
            worst = worst.max(self.state.op().distance(&spa_state(w.op(), self.p_min)));
        }
        if let Some(dec) = &self.decomposition {
            worst = worst.max(dec.reconstruct().distance(self.state.op()));
        }
        worst
    }
}

/// `ρ_W̃ = (1 − p_min)W + p_min 𝟙/D`, threshold `p_min/D`.
pub fn aew(w: &Witness) -> Result<ApproxWitness> {
    let p_min = spa_pmin(w)?;
    let state = DensityMatrix::new(spa_state(w.op(), p_min))?;
    Ok(ApproxWitness {
        state,
        p_min,
        threshold: p_min / w.op().dim() as f64,
        source: Some(w.clone()),
        decomposition: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Detected,
    NotDetected,
    Boundary,
}

impl Verdict {
    pub fn classify(value: f64, threshold: f64) -> Verdict {
        if (value - threshold).abs() <= BOUNDARY_TOL {
            Verdict::Boundary
        } else if value < threshold {
            Verdict::Detected
        } else {
            Verdict::NotDetected
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Detection {
    pub value: f64,
    pub threshold: f64,
    pub verdict: Verdict,
}

/// `tr{ρ ρ_W̃}` against the witness threshold.
pub fn detect(rho: &DensityMatrix, a: &ApproxWitness) -> Result<Detection> {
    check_dims(rho.op(), a.state.op())?;
    let value = a.state.op().trace_product(rho.op()).re;
    Ok(Detection {
        value,
        threshold: a.threshold,
        verdict: Verdict::classify(value, a.threshold),
    })
}

/// Product decomposition `(1/N) Σ |x_k⟩⟨x_k| ⊗ |x_k⟩⟨x_k|` of the transpose AEW.
pub fn separable_decomposition_of_transpose_aew(g: &Design) -> Result<SeparableDecomposition> {
    if !g.is_two_design() || !g.is_coherent() {
        return Err(Error::domain(format!(
            "design checks failed (two-design {:e}, coherence {:e})",
            g.two_design_residual, g.coherence_residual
        )));
    }
    let n = g.len();
    let proj: Vec<DensityMatrix> = g.vectors.iter().map(DensityMatrix::pure).collect();
    SeparableDecomposition::new(vec![1.0 / n as f64; n], proj.clone(), proj)
}

/// Transpose AEW carrying a design decomposition.
pub fn transpose_aew_with_decomposition(g: &Design) -> Result<ApproxWitness> {
    let mut a = aew(&transpose_witness(g.d)?)?;
    a.decomposition = Some(separable_decomposition_of_transpose_aew(g)?);
    Ok(a)
}

/// `Σ_k q_k tr{ρ(τ_k ⊗ σ_k)}`, evaluated term by term.
pub fn locc_expectation(rho: &DensityMatrix, dec: &SeparableDecomposition) -> Result<f64> {
    let [dl, dr] = dec.dims();
    if rho.dim() != dl * dr {
        return Err(Error::domain(format!(
            "state has dimension {}, decomposition acts on {dl}×{dr}",
            rho.dim()
        )));
    }
    let r = rho.op().clone().with_dims(&[dl, dr])?;
    let mut total = 0.0;
    for (q, (t, s)) in dec.weights.iter().zip(dec.left.iter().zip(&dec.right)) {
        total += q * kron(t.op(), s.op()).trace_product(&r).re;
    }
    Ok(total)
}

/// Bipartition of `n_parties` parties; the witness map acts on `side`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cut {
    pub n_parties: usize,
    pub side: Vec<usize>,
}

fn party_label(i: usize) -> char {
    (b'A' + i as u8) as char
}

impl Cut {
    /// Single party `party` against the rest, labelled cyclically (`B|CA`).
    pub fn single(n_parties: usize, party: usize) -> Result<Self> {
        if party >= n_parties {
            return Err(Error::Index {
                index: party,
                factors: n_parties,
            });
        }
        Ok(Cut {
            n_parties,
            side: vec![party],
        })
    }

    /// Parses `"A|BC"`-style specs; parties are `A..` in dims order.
    pub fn parse(spec: &str, n_parties: usize) -> Result<Self> {
        if n_parties > 26 {
            return Err(Error::domain("at most 26 parties can be labelled"));
        }
        let groups: Vec<&str> = spec.split('|').map(str::trim).collect();
        if groups.len() != 2 || groups.iter().any(|g| g.is_empty()) {
            return Err(Error::Parse(format!(
                "cut spec {spec:?} must look like \"A|BC\""
            )));
        }
        let mut seen = vec![false; n_parties];
        let mut sides = [Vec::new(), Vec::new()];
        for (g, side) in groups.iter().zip(sides.iter_mut()) {
            for ch in g.chars() {
                let i = (ch as u32).wrapping_sub('A' as u32) as usize;
                if !ch.is_ascii_uppercase() || i >= n_parties {
                    return Err(Error::Parse(format!(
                        "unknown party {ch:?} in cut {spec:?} ({n_parties} parties)"
                    )));
                }
                if seen[i] {
                    return Err(Error::Parse(format!("party {ch} repeated in cut {spec:?}")));
                }
                seen[i] = true;
                side.push(i);
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Parse(format!(
                "cut {spec:?} does not name every party"
            )));
        }
        let [left, right] = sides;
        let mut side = if left.len() == 1 || right.len() != 1 {
            left
        } else {
            right
        };
        side.sort_unstable();
        Ok(Cut { n_parties, side })
    }

    pub fn label(&self) -> String {
        let mut s: String = self.side.iter().map(|&i| party_label(i)).collect();
        s.push('|');
        let start = self.side[0];
        for off in 1..=self.n_parties {
            let i = (start + off) % self.n_parties;
            if !self.side.contains(&i) {
                s.push(party_label(i));
            }
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PptVerdict {
    Npt,
    Ppt,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PptResult {
    pub verdict: PptVerdict,
    pub min_eigenvalue: f64,
}

/// Eigensolve of the partial transpose over the parties in `side`.
pub fn ppt_check(rho: &DensityMatrix, side: &[usize]) -> Result<PptResult> {
    let n = rho.dims().len();
    if side.is_empty() || side.len() >= n {
        return Err(Error::domain(format!(
            "cut side {side:?} is not a proper subset of {n} parties"
        )));
    }
    let mut pt = rho.op().clone();
    for &s in side {
        pt = partial_transpose(&pt, s)?;
    }
    let min = min_eigenvalue(&pt)?;
    Ok(PptResult {
        verdict: if min < -PPT_TOL {
            PptVerdict::Npt
        } else {
            PptVerdict::Ppt
        },
        min_eigenvalue: min,
    })
}

/// `Σ_j |j⟩^{⊗n}/√d`.
pub fn ghz_ket(n: usize, d: usize) -> Ket {
    let total = d.pow(n as u32);
    let stride: usize = (0..n).map(|p| d.pow(p as u32)).sum();
    let mut amps = vec![C64::new(0.0, 0.0); total];
    for j in 0..d {
        amps[j * stride] = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    }
    Ket::new(amps)
}

fn uniform_dims(rho: &Operator) -> Result<(usize, usize)> {
    let dims = rho.dims();
    let d = dims[0];
    if dims.iter().any(|&x| x != d) || dims.len() < 2 {
        return Err(Error::domain(format!(
            "GHZ witnesses need at least two parties of equal dimension, got {dims:?}"
        )));
    }
    Ok((dims.len(), d))
}

/// `(I ⊗ 𝒯̃_{cut})[|GHZ⟩⟨GHZ|]` with `𝒯̃` supplied by `channel`.
fn ghz_oracle(n: usize, d: usize, cut: usize, channel: &Channel) -> Result<Operator> {
    let ghz = ghz_ket(n, d).projector().with_dims(&vec![d; n])?;
    channel.apply_on_factor(&ghz, cut)
}

/// GHZ-based AEW across `cut`, threshold `1/(d(d+1))`.
///
/// `p_min` is the weight `d/(d+1)` of the underlying transpose SPA; the
/// threshold is not `p_min/D` once there are more than two parties.
pub fn ghz_aew(n: usize, d: usize, cut: usize) -> Result<ApproxWitness> {
    if n < 2 {
        return Err(Error::domain("need at least two parties"));
    }
    if cut >= n {
        return Err(Error::Index {
            index: cut,
            factors: n,
        });
    }
    if n == 2 {
        return aew(&transpose_witness(d)?);
    }
    let op = ghz_oracle(n, d, cut, &approx_transpose(d)?)?;
    Ok(ApproxWitness {
        state: DensityMatrix::new(op)?,
        p_min: d as f64 / (d as f64 + 1.0),
        threshold: 1.0 / (d * (d + 1)) as f64,
        source: None,
        decomposition: None,
    })
}

/// Closed form `(1/N) Σ_k |x_k⟩⟨x_k|_{cut} ⊗ |ψ_k⟩⟨ψ_k|`, `|ψ_k⟩ = Σ_j ⟨s_k|j⟩|j⟩^{⊗(n−1)}`,
/// with `x_k = s_k` or `x_k = s_k*`.
pub fn ghz_closed_form(n: usize, cut: usize, g: &Design, conjugate: bool) -> Result<Operator> {
    let d = g.d;
    if cut >= n {
        return Err(Error::Index {
            index: cut,
            factors: n,
        });
    }
    let dims = vec![d; n];
    let total = d.pow(n as u32);
    let weight = 1.0 / g.len() as f64;
    let mut out = Operator::zeros(&dims);
    for s in &g.vectors {
        let mut amps = vec![C64::new(0.0, 0.0); total];
        for (idx, amp) in amps.iter_mut().enumerate() {
            let digits: Vec<usize> = (0..n).rev().map(|p| idx / d.pow(p as u32) % d).collect();
            let rest: Vec<usize> = (0..n).filter(|&p| p != cut).map(|p| digits[p]).collect();
            if rest.iter().any(|&x| x != rest[0]) {
                continue;
            }
            let x = s.amps()[digits[cut]];
            let x = if conjugate { x.conj() } else { x };
            *amp = x * s.amps()[rest[0]].conj();
        }
        out = &out + &Ket::new(amps).projector().scale_re(weight);
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct MultipartiteAew {
    pub aew: ApproxWitness,
    pub n: usize,
    pub d: usize,
    pub cut: usize,
    /// `‖oracle − closed form‖` with `|s_k⟩` on the cut factor.
    pub closed_form_residual: f64,
    /// Same with `|s_k*⟩` on the cut factor.
    pub closed_form_conj_residual: f64,
    /// `‖oracle(closed-form 𝒯̃) − oracle(design channel)‖`.
    pub design_oracle_residual: f64,
}

pub fn multipartite_aew(n: usize, d: usize, cut: usize, g: &Design) -> Result<MultipartiteAew> {
    if g.d != d {
        return Err(Error::domain(format!(
            "design has dimension {}, expected {d}",
            g.d
        )));
    }
    if n < 2 {
        return Err(Error::domain("need at least two parties"));
    }
    if cut >= n {
        return Err(Error::Index {
            index: cut,
            factors: n,
        });
    }
    let oracle = ghz_oracle(n, d, cut, &approx_transpose(d)?)?;
    let via_design = ghz_oracle(n, d, cut, &measure_prepare_from_design(g)?.channel)?;
    let plain = ghz_closed_form(n, cut, g, false)?;
    let conj = ghz_closed_form(n, cut, g, true)?;
    Ok(MultipartiteAew {
        aew: ghz_aew(n, d, cut)?,
        n,
        d,
        cut,
        closed_form_residual: oracle.distance(&plain),
        closed_form_conj_residual: oracle.distance(&conj),
        design_oracle_residual: oracle.distance(&via_design),
    })
}

/// `(1/3)|GHZ⟩⟨GHZ| + (1/6)(P_001 + P_010 + P_101 + P_110)`.
pub fn tripartite_example_state() -> DensityMatrix {
    let mut op = ghz_ket(3, 2).projector().scale_re(1.0 / 3.0);
    for idx in [0b001, 0b010, 0b101, 0b110] {
        op[(idx, idx)] += C64::new(1.0 / 6.0, 0.0);
    }
    DensityMatrix::new(op.with_dims(&[2, 2, 2]).expect("8 = 2·2·2")).expect("valid by construction")
}

/// Singlet `(|01⟩ − |10⟩)/√2`.
pub fn singlet() -> DensityMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let psi = Ket::from_real(&[0.0, s, -s, 0.0]);
    DensityMatrix::pure(&psi)
        .with_dims(&[2, 2])
        .expect("4 = 2·2")
}

/// Two-qubit Werner state `v|ψ⁻⟩⟨ψ⁻| + (1 − v)𝟙/4`.
pub fn werner_state(visibility: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&visibility) {
        return Err(Error::domain(format!(
            "visibility {visibility} outside [0, 1]"
        )));
    }
    let op = &singlet().op().scale_re(visibility)
        + &Operator::identity(&[2, 2]).scale_re((1.0 - visibility) / 4.0);
    DensityMatrix::new(op)
}

#[derive(Clone, Debug, Serialize)]
pub struct CutEntry {
    pub cut: String,
    pub value: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    pub ppt: PptVerdict,
    pub ppt_min_eigenvalue: f64,
}

/// Oracle value at `A|BC` for the tripartite example next to the nominal and closed-form ones.
#[derive(Clone, Debug, Serialize)]
pub struct ReferenceValues {
    pub cut: String,
    pub oracle: f64,
    pub nominal: f64,
    pub closed_form: f64,
    pub closed_form_conj: f64,
    pub oracle_matches_nominal: bool,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct DetectionReport {
    pub cuts: Vec<CutEntry>,
    pub caveats: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceValues>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimator: Option<EstimatorBlock>,
}

/// AEW used for a cut of `rho`: the transpose AEW for two parties, the GHZ AEW otherwise.
pub fn aew_for_cut(rho: &DensityMatrix, cut: &Cut) -> Result<ApproxWitness> {
    let (n, d) = uniform_dims(rho.op())?;
    if cut.n_parties != n {
        return Err(Error::domain(format!(
            "cut names {} parties, state has {n}",
            cut.n_parties
        )));
    }
    if cut.side.len() != 1 {
        return Err(Error::domain(format!(
            "cut {} must isolate a single party",
            cut.label()
        )));
    }
    ghz_aew(n, d, cut.side[0])
}

pub fn detect_cut(rho: &DensityMatrix, cut: &Cut) -> Result<CutEntry> {
    let a = aew_for_cut(rho, cut)?;
    let det = detect(rho, &a)?;
    let ppt = ppt_check(rho, &cut.side)?;
    Ok(CutEntry {
        cut: cut.label(),
        value: det.value,
        threshold: det.threshold,
        verdict: det.verdict,
        ppt: ppt.verdict,
        ppt_min_eigenvalue: ppt.min_eigenvalue,
    })
}

fn caveat_for(entry: &CutEntry) -> Option<String> {
    (entry.verdict == Verdict::Detected && entry.ppt == PptVerdict::Ppt).then(|| {
        format!(
            "{}: threshold fired (value {:.6} < {:.6}) but the partial transpose is positive; \
             the GHZ threshold is not a separability bound for this state",
            entry.cut, entry.value, entry.threshold
        )
    })
}

pub fn detection_report(rho: &DensityMatrix, cuts: &[Cut]) -> Result<DetectionReport> {
    let mut report = DetectionReport::default();
    for cut in cuts {
        let entry = detect_cut(rho, cut)?;
        report.caveats.extend(caveat_for(&entry));
        report.cuts.push(entry);
    }
    Ok(report)
}

/// All single-party cuts of the tripartite example, with the `A|BC` reference values.
pub fn evaluate_tripartite_example() -> Result<DetectionReport> {
    let rho = tripartite_example_state();
    let cuts: Vec<Cut> = (0..3).map(|p| Cut::single(3, p)).collect::<Result<_>>()?;
    let mut report = detection_report(&rho, &cuts)?;
    let sic = sic_from_fiducial(&Fiducial::qubit_tetrahedral())?;
    let value = |op: Operator| op.trace_product(rho.op()).re;
    let oracle = report.cuts[0].value;
    report.reference = Some(ReferenceValues {
        cut: report.cuts[0].cut.clone(),
        oracle,
        nominal: NOMINAL_TRIPARTITE_VALUE,
        closed_form: value(ghz_closed_form(3, 0, &sic, false)?),
        closed_form_conj: value(ghz_closed_form(3, 0, &sic, true)?),
        oracle_matches_nominal: (oracle - NOMINAL_TRIPARTITE_VALUE).abs() < 1e-10,
    });
    if (oracle - NOMINAL_TRIPARTITE_VALUE).abs() >= 1e-10 {
        report.caveats.push(format!(
            "{}: oracle value {oracle:.12} differs from the nominal {:.12}",
            report.cuts[0].cut, NOMINAL_TRIPARTITE_VALUE
        ));
    }
    Ok(report)
}

/// Eigenvalues of `rho`, ascending.
pub fn spectrum(rho: &DensityMatrix) -> Result<Vec<f64>> {
    Ok(eig_hermitian(rho.op())?.values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::mub_prime;
    use crate::linalg::{kron_kets, random_mixed_state};
    use proptest::prelude::*;

    fn product(bits: &[usize]) -> DensityMatrix {
        let kets: Vec<Ket> = bits.iter().map(|&b| Ket::basis(2, b)).collect();
        DensityMatrix::pure(&kron_kets(&kets))
            .with_dims(&vec![2; bits.len()])
            .unwrap()
    }

    #[test]
    fn transpose_witness_values() {
        let w = transpose_witness(2).unwrap();
        assert!((w.expectation(&singlet()).unwrap() + 0.5).abs() < 1e-14);
        assert!((w.expectation(&product(&[0, 0])).unwrap() - 0.5).abs() < 1e-14);
        for d in 2..=5 {
            let w = transpose_witness(d).unwrap();
            assert!((w.op().trace().re - 1.0).abs() < 1e-14);
            assert!((min_eigenvalue(w.op()).unwrap() + 1.0 / d as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn pmin_is_d_over_d_plus_one() {
        for d in 2..=5 {
            let w = transpose_witness(d).unwrap();
            let cert = pmin_certificate(&w).unwrap();
            assert!((cert.p_min - d as f64 / (d as f64 + 1.0)).abs() < 1e-12);
            assert!(cert.holds(), "{cert:?}");
        }
        let psd = Witness::new(Operator::identity(&[2, 2]).scale_re(0.25)).unwrap();
        assert_eq!(spa_pmin(&psd).unwrap(), 0.0);
        assert!(pmin_certificate(&psd).unwrap().holds());
    }

    #[test]
    fn transpose_aew_qubit() {
        let a = aew(&transpose_witness(2).unwrap()).unwrap();
        let want = (&Operator::identity(&[2, 2]) + &Operator::swap(2)).scale_re(1.0 / 6.0);
        assert!(a.state.op().distance(&want) < 1e-14);
        assert!((a.threshold - 1.0 / 6.0).abs() < 1e-15);
        assert!(a.invariant_residual() < 1e-12);

        let det = detect(&singlet(), &a).unwrap();
        assert!(det.value.abs() < 1e-14);
        assert_eq!(det.verdict, Verdict::Detected);
        let det = detect(&product(&[0, 0]), &a).unwrap();
        assert!((det.value - 1.0 / 3.0).abs() < 1e-14);
        assert_eq!(det.verdict, Verdict::NotDetected);
        let det = detect(&DensityMatrix::maximally_mixed(&[2, 2]), &a).unwrap();
        assert!((det.value - 0.25).abs() < 1e-14);
        assert_eq!(det.verdict, Verdict::NotDetected);
        let det = detect(&werner_state(1.0 / 3.0).unwrap(), &a).unwrap();
        assert!((det.value - 1.0 / 6.0).abs() < 1e-14);
        assert_eq!(det.verdict, Verdict::Boundary);
        assert!(detect(&product(&[0]), &a).is_err());
    }

    #[test]
    fn decompositions_reconstruct_transpose_aew() {
        let sic = sic_from_fiducial(&Fiducial::qubit_tetrahedral()).unwrap();
        let dec = separable_decomposition_of_transpose_aew(&sic).unwrap();
        assert_eq!(dec.len(), 4);
        let a = transpose_aew_with_decomposition(&sic).unwrap();
        assert!(a.invariant_residual() < 1e-10);

        let mub = mub_prime(3).unwrap();
        let dec3 = separable_decomposition_of_transpose_aew(&mub).unwrap();
        assert_eq!(dec3.len(), 12);
        let want = (&Operator::identity(&[3, 3]) + &Operator::swap(3)).scale_re(1.0 / 12.0);
        assert!(dec3.reconstruct().distance(&want) < 1e-10);
        assert!(dec.len() < mub_prime(2).unwrap().len());
    }

    #[test]
    fn locc_matches_direct_trace() {
        let sic = sic_from_fiducial(&Fiducial::qubit_tetrahedral()).unwrap();
        let a = transpose_aew_with_decomposition(&sic).unwrap();
        let dec = a.decomposition.as_ref().unwrap();
        assert!(locc_expectation(&singlet(), dec).unwrap().abs() < 1e-14);
        let mixed = DensityMatrix::maximally_mixed(&[2, 2]);
        assert!((locc_expectation(&mixed, dec).unwrap() - 0.25).abs() < 1e-14);
        for seed in 0..50 {
            let rho = random_mixed_state(&[2, 2], seed).unwrap();
            let direct = detect(&rho, &a).unwrap().value;
            assert!((locc_expectation(&rho, dec).unwrap() - direct).abs() < 1e-12);
        }
        assert!(locc_expectation(&product(&[0, 0, 0]), dec).is_err());
    }

    #[test]
    fn detection_is_sound_on_random_states() {
        let a = aew(&transpose_witness(2).unwrap()).unwrap();
        let w = transpose_witness(2).unwrap();
        for seed in 0..300 {
            let rho = random_mixed_state(&[2, 2], 1000 + seed).unwrap();
            let det = detect(&rho, &a).unwrap();
            let ppt = ppt_check(&rho, &[0]).unwrap();
            if det.verdict == Verdict::Detected {
                assert_eq!(ppt.verdict, PptVerdict::Npt);
            }
            let affine = (1.0 - a.p_min) * w.expectation(&rho).unwrap() + a.p_min / 4.0;
            assert!((det.value - affine).abs() < 1e-12);
        }
    }

    #[test]
    fn ppt_examples() {
        let s = ppt_check(&singlet(), &[0]).unwrap();
        assert_eq!(s.verdict, PptVerdict::Npt);
        assert!((s.min_eigenvalue + 0.5).abs() < 1e-12);
        assert_eq!(
            ppt_check(&product(&[0, 0]), &[1]).unwrap().verdict,
            PptVerdict::Ppt
        );
        let t = tripartite_example_state();
        assert_eq!(ppt_check(&t, &[0]).unwrap().verdict, PptVerdict::Npt);
        assert_eq!(ppt_check(&t, &[1]).unwrap().verdict, PptVerdict::Ppt);
        assert_eq!(ppt_check(&t, &[2]).unwrap().verdict, PptVerdict::Ppt);
        assert!(ppt_check(&t, &[0, 1, 2]).is_err());
        assert!(ppt_check(&t, &[5]).is_err());
    }

    #[test]
    fn tripartite_state_properties() {
        let t = tripartite_example_state();
        assert!((t.op().trace().re - 1.0).abs() < 1e-14);
        let mut want = vec![
            0.0,
            0.0,
            0.0,
            1.0 / 6.0,
            1.0 / 6.0,
            1.0 / 6.0,
            1.0 / 6.0,
            1.0 / 3.0,
        ];
        want.sort_by(f64::total_cmp);
        let got = spectrum(&t).unwrap();
        assert!(got.iter().zip(&want).all(|(a, b)| (a - b).abs() < 1e-12));
        // Swap parties B and C.
        let swapped = Operator::from_fn(&[2, 2, 2], |r, c| {
            let p = |x: usize| (x & 0b100) | ((x & 0b010) >> 1) | ((x & 0b001) << 1);
            t.op()[(p(r), p(c))]
        });
        assert!(swapped.distance(t.op()) < 1e-12);
    }

    #[test]
    fn tripartite_report() {
        let r = evaluate_tripartite_example().unwrap();
        let labels: Vec<&str> = r.cuts.iter().map(|c| c.cut.as_str()).collect();
        assert_eq!(labels, ["A|BC", "B|CA", "C|AB"]);
        assert!((r.cuts[0].value - 1.0 / 9.0).abs() < 1e-10);
        assert_eq!(r.cuts[0].verdict, Verdict::Detected);
        for c in &r.cuts[1..] {
            assert!((c.value - 1.0 / 6.0).abs() < 1e-10);
            assert_eq!(c.verdict, Verdict::Boundary);
        }
        let reference = r.reference.as_ref().unwrap();
        assert!(!reference.oracle_matches_nominal);
        assert!((reference.closed_form_conj - 1.0 / 9.0).abs() < 1e-10);
        assert!((reference.closed_form - 1.0 / 6.0).abs() < 1e-10);
        assert_eq!(r.caveats.len(), 1);
    }

    #[test]
    fn product_state_caveat() {
        let rho = product(&[0, 1, 0]);
        let r = detection_report(&rho, &[Cut::single(3, 0).unwrap()]).unwrap();
        assert!(r.cuts[0].value.abs() < 1e-14);
        assert_eq!(r.cuts[0].verdict, Verdict::Detected);
        assert_eq!(r.cuts[0].ppt, PptVerdict::Ppt);
        assert_eq!(r.caveats.len(), 1);
    }

    #[test]
    fn multipartite_oracle_and_closed_forms() {
        let sic = sic_from_fiducial(&Fiducial::qubit_tetrahedral()).unwrap();
        let m = multipartite_aew(2, 2, 1, &sic).unwrap();
        assert!(m.closed_form_conj_residual < 1e-10);
        assert!(m.design_oracle_residual < 1e-10);
        let t = aew(&transpose_witness(2).unwrap()).unwrap();
        assert!(m.aew.state.op().distance(t.state.op()) < 1e-12);

        for n in 2..=4 {
            for cut in 0..n {
                let m = multipartite_aew(n, 2, cut, &sic).unwrap();
                assert!((m.aew.state.op().trace().re - 1.0).abs() < 1e-10);
                assert!(m.closed_form_conj_residual < 1e-10);
                assert!(m.design_oracle_residual < 1e-10);
            }
        }
        let m3 = multipartite_aew(3, 2, 0, &sic).unwrap();
        assert!(m3.closed_form_residual > 1e-3);
        assert!((m3.aew.threshold - 1.0 / 6.0).abs() < 1e-15);

        let q = sic_from_fiducial(&Fiducial::qutrit()).unwrap();
        let m = multipartite_aew(3, 3, 2, &q).unwrap();
        assert!(m.design_oracle_residual < 1e-10);
        assert!((m.aew.threshold - 1.0 / 12.0).abs() < 1e-15);
        assert!(multipartite_aew(3, 2, 3, &sic).is_err());
        assert!(multipartite_aew(3, 3, 0, &sic).is_err());
    }

    #[test]
    fn cut_parsing() {
        let c = Cut::parse("A|BC", 3).unwrap();
        assert_eq!(c.side, vec![0]);
        assert_eq!(c.label(), "A|BC");
        assert_eq!(Cut::parse("CA|B", 3).unwrap().label(), "B|CA");
        assert_eq!(Cut::parse("A|B", 2).unwrap().label(), "A|B");
        for bad in ["A|B", "AB", "A|BD", "A|AB", "|ABC", "a|bc"] {
            assert!(Cut::parse(bad, 3).is_err(), "{bad}");
        }
    }

    proptest! {
        #[test]
        fn detection_equivalence(seed in 0u64..10_000) {
            let w = transpose_witness(2).unwrap();
            let a = aew(&w).unwrap();
            let rho = random_mixed_state(&[2, 2], seed).unwrap();
            let tw = w.expectation(&rho).unwrap();
            let det = detect(&rho, &a).unwrap();
            prop_assert!((det.value - ((1.0 - a.p_min) * tw + a.p_min / 4.0)).abs() < 1e-12);
            if tw.abs() > 1e-9 {
                prop_assert_eq!(tw < 0.0, det.value < a.threshold);
            }
        }
    }
}
