//! Coherent spherical two-designs: Heisenberg–Weyl orbits (SIC states) and
//! complete sets of mutually unbiased bases in prime dimension.
//!
//! A family `{|x_k⟩}` of `N` unit vectors is a two-design when
//! `(1/N) Σ_k |x_k⟩⟨x_k| ⊗ |x_k⟩⟨x_k| = 2 P_sym / (d(d+1))`, and coherent when
//! `Σ_k |x_k⟩⟨x_k| = (N/d) 𝟙`. Both checks are phase invariant.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron, Ket, Operator, C64, ONE, ZERO};

/// Residual below which a design check passes.
pub const DESIGN_TOL: f64 = 1e-10;
/// Tolerance on pairwise SIC overlaps when building from a fiducial.
pub const SIC_OVERLAP_TOL: f64 = 1e-9;

/// Generalized Pauli shift `X|n⟩ = |n⊕1⟩` and clock `Z|n⟩ = ωⁿ|n⟩`.
#[derive(Clone, Debug)]
pub struct WeylPair {
    pub d: usize,
    pub x: Operator,
    pub z: Operator,
    pub omega: C64,
}

pub fn weyl_pair(d: usize) -> Result<WeylPair> {
    if d < 2 {
        return Err(Error::domain(format!(
            "Weyl operators need d >= 2, got {d}"
        )));
    }
    let omega = root_of_unity(d, 1);
    let mut x = Operator::zeros(&[d]);
    for n in 0..d {
        x[((n + 1) % d, n)] = ONE;
    }
    let z = Operator::diag(
        &(0..d)
            .map(|n| root_of_unity(d, n as i64))
            .collect::<Vec<_>>(),
    );
    Ok(WeylPair { d, x, z, omega })
}

/// `e^{2πi k/d}`.
pub fn root_of_unity(d: usize, k: i64) -> C64 {
    let k = k.rem_euclid(d as i64);
    C64::from_polar(1.0, 2.0 * PI * k as f64 / d as f64)
}

impl WeylPair {
    /// `X^k Z^l` with exponents taken mod d.
    pub fn displacement(&self, k: i64, l: i64) -> Operator {
        let d = self.d as i64;
        &self.x.pow(k.rem_euclid(d) as usize) * &self.z.pow(l.rem_euclid(d) as usize)
    }

    /// `X^k Z^l |ψ⟩` computed directly on amplitudes.
    pub fn displace(&self, k: i64, l: i64, psi: &Ket) -> Ket {
        let d = self.d;
        let mut out = vec![ZERO; d];
        for (m, a) in psi.amps().iter().enumerate() {
            let target = (m as i64 + k).rem_euclid(d as i64) as usize;
            out[target] = a * root_of_unity(d, l * m as i64);
        }
        Ket::new(out)
    }
}

/// Fiducial vector generating a Heisenberg–Weyl orbit.
#[derive(Clone, Debug, PartialEq)]
pub struct Fiducial {
    pub d: usize,
    pub ket: Ket,
}

impl Fiducial {
    pub fn new(ket: Ket) -> Result<Self> {
        let dev = (ket.norm() - 1.0).abs();
        if dev > 1e-10 {
            return Err(Error::Validation {
                check: "norm",
                residual: dev,
            });
        }
        if ket.dim() < 2 {
            return Err(Error::domain("fiducial needs d >= 2"));
        }
        Ok(Fiducial { d: ket.dim(), ket })
    }

    /// The amplitudes `α_n` in the computational basis.
    pub fn alphas(&self) -> &[C64] {
        self.ket.amps()
    }

    /// Qubit fiducial `t_v|0⟩ + r_v|1⟩` with `t_v = √(3+√3)/√6`, `r_v = e^{iπ/4}√(3−√3)/√6`.
    pub fn qubit_tetrahedral() -> Self {
        let s3 = 3f64.sqrt();
        let t_v = ((3.0 + s3) / 6.0).sqrt();
        let r_v = C64::from_polar(((3.0 - s3) / 6.0).sqrt(), PI / 4.0);
        Fiducial::new(Ket::new(vec![C64::new(t_v, 0.0), r_v])).expect("unit norm")
    }

    /// Qutrit fiducial `(0, 1, −1)/√2`.
    pub fn qutrit() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Fiducial::new(Ket::from_real(&[0.0, s, -s])).expect("unit norm")
    }

    /// Built-in fiducial for `d ∈ {2, 3}`.
    pub fn builtin(d: usize) -> Option<Self> {
        match d {
            2 => Some(Fiducial::qubit_tetrahedral()),
            3 => Some(Fiducial::qutrit()),
            _ => None,
        }
    }

    /// The orbit `|s_{k,l}⟩ = X^k Z^l |ψ⟩`, index `k·d + l`.
    pub fn orbit(&self) -> Vec<Ket> {
        let w = weyl_pair(self.d).expect("d >= 2 by construction");
        let d = self.d as i64;
        (0..d)
            .flat_map(|k| (0..d).map(move |l| (k, l)))
            .map(|(k, l)| w.displace(k, l, &self.ket))
            .collect()
    }

    /// Largest deviation of an off-diagonal orbit overlap from `1/(d+1)`, with its pair.
    pub fn overlap_deviation(&self) -> ((usize, usize), f64) {
        worst_overlap(&self.orbit(), 1.0 / (self.d as f64 + 1.0))
    }
}

fn worst_overlap(vectors: &[Ket], target: f64) -> ((usize, usize), f64) {
    let mut worst = ((0, 0), 0.0);
    for j in 0..vectors.len() {
        for k in (j + 1)..vectors.len() {
            let dev = (vectors[j].inner(&vectors[k]).norm_sqr() - target).abs();
            if dev > worst.1 {
                worst = ((j, k), dev);
            }
        }
    }
    worst
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignKind {
    Mub,
    Sic,
    Custom,
}

/// A finite family of unit vectors with its two-design and coherence residuals.
#[derive(Clone, Debug)]
pub struct Design {
    pub d: usize,
    pub vectors: Vec<Ket>,
    pub kind: DesignKind,
    pub two_design_residual: f64,
    pub coherence_residual: f64,
}

impl Design {
    /// Wraps a family of vectors and computes both residuals.
    pub fn new(kind: DesignKind, vectors: Vec<Ket>) -> Result<Self> {
        let d = vectors
            .first()
            .ok_or_else(|| Error::domain("design needs at least one vector"))?
            .dim();
        for (i, v) in vectors.iter().enumerate() {
            if v.dim() != d {
                return Err(Error::domain(format!(
                    "vector {i} has dimension {}",
                    v.dim()
                )));
            }
            let dev = (v.norm() - 1.0).abs();
            if dev > 1e-10 {
                return Err(Error::Validation {
                    check: "norm",
                    residual: dev,
                });
            }
        }
        let two_design_residual = two_design_residual(d, &vectors);
        let coherence_residual = coherence_residual(d, &vectors);
        Ok(Design {
            d,
            vectors,
            kind,
            two_design_residual,
            coherence_residual,
        })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn is_two_design(&self) -> bool {
        self.two_design_residual < DESIGN_TOL
    }

    pub fn is_coherent(&self) -> bool {
        self.coherence_residual < DESIGN_TOL
    }

    /// Elementwise complex conjugate of every vector.
    pub fn conj(&self) -> Design {
        Design::new(self.kind, self.vectors.iter().map(Ket::conj).collect())
            .expect("conjugation preserves norms")
    }
}

/// Heisenberg–Weyl SIC generated by `f`; fails unless every cross overlap is `1/(d+1)`.
pub fn sic_from_fiducial(f: &Fiducial) -> Result<Design> {
    let orbit = f.orbit();
    let (worst, deviation) = worst_overlap(&orbit, 1.0 / (f.d as f64 + 1.0));
    if deviation > SIC_OVERLAP_TOL {
        return Err(Error::NotSic { worst, deviation });
    }
    Design::new(DesignKind::Sic, orbit)
}

pub fn is_prime(n: usize) -> bool {
    n >= 2
        && (2..)
            .take_while(|k| k * k <= n)
            .all(|k| !n.is_multiple_of(k))
}

/// Complete set of `d+1` mutually unbiased bases for prime `d`, basis by basis.
///
/// `d = 2` uses the eigenbases of σ_z, σ_x, σ_y in that order. Odd primes use
/// the computational basis followed by the bases `ω^{a m² + b m}/√d`, `a = 0..d`.
pub fn mub_prime(d: usize) -> Result<Design> {
    if !is_prime(d) {
        return Err(Error::NotPrime(d));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let vectors = if d == 2 {
        let i = C64::new(0.0, s);
        let r = C64::new(s, 0.0);
        vec![
            Ket::basis(2, 0),
            Ket::basis(2, 1),
            Ket::new(vec![r, r]),
            Ket::new(vec![r, -r]),
            Ket::new(vec![r, i]),
            Ket::new(vec![r, -i]),
        ]
    } else {
        let norm = 1.0 / (d as f64).sqrt();
        let mut v: Vec<Ket> = (0..d).map(|n| Ket::basis(d, n)).collect();
        for a in 0..d as i64 {
            for b in 0..d as i64 {
                v.push(Ket::new(
                    (0..d as i64)
                        .map(|m| root_of_unity(d, a * m * m + b * m) * norm)
                        .collect(),
                ));
            }
        }
        v
    };
    Design::new(DesignKind::Mub, vectors)
}

/// Frobenius norm of `(1/N)Σ |x⟩⟨x|⊗|x⟩⟨x| − 2P_sym/(d(d+1))`.
pub fn verify_two_design(g: &Design) -> f64 {
    two_design_residual(g.d, &g.vectors)
}

/// Frobenius norm of `Σ |x⟩⟨x| − (N/d)𝟙`.
pub fn verify_coherent(g: &Design) -> f64 {
    coherence_residual(g.d, &g.vectors)
}

fn two_design_residual(d: usize, vectors: &[Ket]) -> f64 {
    let mut avg = Operator::zeros(&[d, d]);
    for v in vectors {
        let p = v.projector();
        avg = &avg + &kron(&p, &p);
    }
    let avg = avg.scale_re(1.0 / vectors.len() as f64);
    avg.distance(&symmetric_target(d))
}

/// `2 P_sym / (d(d+1)) = (𝟙 + V)/(d(d+1))`.
pub fn symmetric_target(d: usize) -> Operator {
    (&Operator::identity(&[d, d]) + &Operator::swap(d)).scale_re(1.0 / (d * (d + 1)) as f64)
}

fn coherence_residual(d: usize, vectors: &[Ket]) -> f64 {
    let mut sum = Operator::zeros(&[d]);
    for v in vectors {
        sum = &sum + &v.projector();
    }
    sum.distance(&Operator::identity(&[d]).scale_re(vectors.len() as f64 / d as f64))
}

/// `Σ_{j,k} |⟨x_j|x_k⟩|⁴`.
pub fn frame_potential(g: &Design) -> f64 {
    frame_potential_of(&g.vectors)
}

pub(crate) fn frame_potential_of(vectors: &[Ket]) -> f64 {
    let mut total = 0.0;
    for a in vectors {
        for b in vectors {
            total += a.inner(b).norm_sqr().powi(2);
        }
    }
    total
}

/// Minimum frame potential `2N²/(d(d+1))` over `N` unit vectors in dimension `d`.
pub fn frame_potential_bound(n: usize, d: usize) -> f64 {
    2.0 * (n * n) as f64 / (d * (d + 1)) as f64
}
