//! Numerical search for Heisenberg–Weyl SIC fiducials.
//!
//! The orbit frame potential of a fiducial `ψ` is `d² Σ_{a,b} |⟨ψ|X^a Z^b|ψ⟩|⁴`,
//! and it reaches `2d³/(d+1)` exactly when the orbit is a SIC. Each restart
//! draws a Haar-random start and runs BFGS on the real and imaginary parts of
//! an unnormalized vector, with the objective evaluated on its normalization.

use crate::designs::{frame_potential_bound, root_of_unity, Fiducial};
use crate::error::{Error, Result};
use crate::linalg::{haar_random_ket, Ket, C64, ZERO};

/// A fiducial is accepted once the orbit frame potential is this close to the minimum.
pub const FRAME_POTENTIAL_TOL: f64 = 1e-10;
/// ... and every cross overlap is this close to `1/(d+1)`.
pub const OVERLAP_TOL: f64 = 1e-6;

const MAX_ITERS_PER_RESTART: usize = 400;

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub fiducial: Fiducial,
    /// Index of the restart that produced the fiducial (0-based).
    pub restart: usize,
    /// BFGS iterations spent by that restart.
    pub iterations: usize,
    /// Total iterations across all restarts.
    pub total_iterations: usize,
    pub frame_potential: f64,
    pub frame_potential_excess: f64,
    pub max_overlap_deviation: f64,
}

/// Multi-restart search with a total budget of `max_iters` BFGS iterations.
pub fn fiducial_search(d: usize, seed: u64, max_iters: usize) -> Result<SearchOutcome> {
    if d < 2 {
        return Err(Error::domain(format!(
            "fiducial search needs d >= 2, got {d}"
        )));
    }
    let objective = OrbitPotential::new(d);
    let mut remaining = max_iters;
    let mut total = 0;
    let mut best_residual = f64::INFINITY;
    let mut restart = 0;
    while remaining > 0 {
        let start = haar_random_ket(d, restart_seed(seed, restart))?;
        let budget = remaining.min(MAX_ITERS_PER_RESTART);
        let (ket, iterations) = objective.minimize(&start, budget);
        remaining -= iterations.max(1).min(remaining);
        total += iterations;
        let outcome = certify(ket, restart, iterations, total)?;
        if outcome.accepted() {
            return Ok(outcome);
        }
        best_residual = best_residual.min(outcome.frame_potential_excess);
        restart += 1;
    }
    Err(Error::SearchFailed {
        restarts: restart,
        best_residual,
    })
}

/// Local refinement from a given starting vector; returns immediately when it already certifies.
pub fn refine_fiducial(start: &Ket, max_iters: usize) -> Result<SearchOutcome> {
    let d = start.dim();
    if d < 2 {
        return Err(Error::domain("fiducial search needs d >= 2"));
    }
    let start = start.normalized();
    let initial = certify(start.clone(), 0, 0, 0)?;
    if initial.accepted() {
        return Ok(initial);
    }
    let (ket, iterations) = OrbitPotential::new(d).minimize(&start, max_iters);
    let outcome = certify(ket, 0, iterations, iterations)?;
    if outcome.accepted() {
        Ok(outcome)
    } else {
        Err(Error::SearchFailed {
            restarts: 1,
            best_residual: outcome.frame_potential_excess,
        })
    }
}

impl SearchOutcome {
    pub fn accepted(&self) -> bool {
        self.frame_potential_excess.abs() < FRAME_POTENTIAL_TOL
            && self.max_overlap_deviation < OVERLAP_TOL
    }
}

fn restart_seed(seed: u64, restart: usize) -> u64 {
    seed ^ (restart as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn certify(ket: Ket, restart: usize, iterations: usize, total: usize) -> Result<SearchOutcome> {
    let fiducial = Fiducial::new(ket.normalized())?;
    let d = fiducial.d;
    let orbit = fiducial.orbit();
    let fp = crate::designs::frame_potential_of(&orbit);
    let (_, dev) = fiducial.overlap_deviation();
    Ok(SearchOutcome {
        fiducial,
        restart,
        iterations,
        total_iterations: total,
        frame_potential: fp,
        frame_potential_excess: fp - frame_potential_bound(d * d, d),
        max_overlap_deviation: dev,
    })
}

/// `f(u) = Σ_{(a,b) ≠ (0,0)} |⟨u|D_ab|u⟩|⁴ / ‖u‖⁸`, minimized at `(d−1)/(d+1)`.
pub(crate) struct OrbitPotential {
    d: usize,
}

impl OrbitPotential {
    pub(crate) fn new(d: usize) -> Self {
        OrbitPotential { d }
    }

    /// `D_ab u = X^a Z^b u`.
    fn displace(&self, a: usize, b: usize, u: &[C64]) -> Vec<C64> {
        let d = self.d;
        let mut out = vec![ZERO; d];
        for (m, x) in u.iter().enumerate() {
            out[(m + a) % d] = x * root_of_unity(d, (b * m) as i64);
        }
        out
    }

    /// `D_ab† u`.
    fn displace_adj(&self, a: usize, b: usize, u: &[C64]) -> Vec<C64> {
        let d = self.d;
        let mut out = vec![ZERO; d];
        for (n, x) in u.iter().enumerate() {
            let m = (n + d - a) % d;
            out[m] = x * root_of_unity(d, -((b * m) as i64));
        }
        out
    }

    fn to_complex(&self, x: &[f64]) -> Vec<C64> {
        (0..self.d)
            .map(|i| C64::new(x[2 * i], x[2 * i + 1]))
            .collect()
    }

    #[cfg(test)]
    fn value(&self, x: &[f64]) -> f64 {
        self.value_grad(x).0
    }

    /// Value and gradient with respect to `(Re u_0, Im u_0, Re u_1, ...)`.
    pub(crate) fn value_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let u = self.to_complex(x);
        let n: f64 = u.iter().map(|z| z.norm_sqr()).sum();
        let mut sum4 = 0.0;
        // ∂/∂u* of Σ|h|⁴ with h = u†Du is Σ 2|h|²(h* Du + h D†u).
        let mut dsum = vec![ZERO; self.d];
        for a in 0..self.d {
            for b in 0..self.d {
                if a == 0 && b == 0 {
                    continue;
                }
                let du = self.displace(a, b, &u);
                let h: C64 = u.iter().zip(&du).map(|(p, q)| p.conj() * q).sum();
                let h2 = h.norm_sqr();
                sum4 += h2 * h2;
                let dadj = self.displace_adj(a, b, &u);
                for i in 0..self.d {
                    dsum[i] += (h.conj() * du[i] + h * dadj[i]) * (2.0 * h2);
                }
            }
        }
        let n4 = n.powi(4);
        let value = sum4 / n4;
        let mut grad = vec![0.0; 2 * self.d];
        for i in 0..self.d {
            // Real gradient = 2 ∂f/∂u*.
            let g = (dsum[i] / n4 - u[i] * (4.0 * sum4 / (n4 * n))) * 2.0;
            grad[2 * i] = g.re;
            grad[2 * i + 1] = g.im;
        }
        (value, grad)
    }

    /// BFGS with Armijo backtracking; returns the final normalized vector and iteration count.
    pub(crate) fn minimize(&self, start: &Ket, max_iters: usize) -> (Ket, usize) {
        let dim = 2 * self.d;
        let mut x: Vec<f64> = start.amps().iter().flat_map(|z| [z.re, z.im]).collect();
        let (mut f, mut g) = self.value_grad(&x);
        let mut h = identity(dim);
        let mut iters = 0;
        while iters < max_iters {
            let gnorm = norm(&g);
            if gnorm < 1e-13 {
                break;
            }
            let mut p: Vec<f64> = mat_vec(&h, &g).iter().map(|v| -v).collect();
            let mut slope = dot(&g, &p);
            if slope >= 0.0 {
                h = identity(dim);
                p = g.iter().map(|v| -v).collect();
                slope = dot(&g, &p);
            }
            // Near the minimum f changes below roundoff; a step that shrinks the
            // gradient inside that noise band is still progress.
            let noise = 8.0 * f64::EPSILON * f.abs().max(1.0);
            let mut step = 1.0;
            let accepted = loop {
                let cand: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + step * b).collect();
                let (fc, gc) = self.value_grad(&cand);
                let armijo = fc <= f + 1e-4 * step * slope;
                let flat = (fc - f).abs() <= noise && norm(&gc) < gnorm;
                if armijo || flat {
                    break Some((cand, fc, gc));
                }
                if step < 1e-12 {
                    break None;
                }
                step *= 0.5;
            };
            iters += 1;
            let Some((x_new, f_new, g_new)) = accepted else {
                break;
            };
            let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &y);
            if sy > 1e-300 {
                bfgs_update(&mut h, &s, &y, sy);
            }
            // The objective is scale invariant; keep the iterate on the unit sphere.
            let scale = norm(&x_new);
            x = x_new.iter().map(|v| v / scale).collect();
            g = g_new.iter().map(|v| v * scale).collect();
            f = f_new;
        }
        (Ket::new(self.to_complex(&x)).normalized(), iters)
    }
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

/// Inverse-Hessian update `H ← (I − ρsyᵀ)H(I − ρysᵀ) + ρssᵀ`.
fn bfgs_update(h: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy = mat_vec(h, y);
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i][j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}
