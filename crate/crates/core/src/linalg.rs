//! Dense complex linear algebra for small composite Hilbert spaces.
//!
//! Operators carry the list of their tensor-factor dimensions. Tensor products
//! order factors with the first one most significant, so a basis index of a
//! composite space is the mixed-radix number formed by the factor indices.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Hermiticity tolerance used by every validation in the crate.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-10;
/// Relative PSD tolerance: eigenvalues may dip to `-PSD_TOL * max|λ|`.
pub const PSD_TOL: f64 = 1e-9;

/// A state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    amps: Vec<C64>,
}

impl Ket {
    pub fn new(amps: Vec<C64>) -> Self {
        assert!(!amps.is_empty(), "ket must have at least one amplitude");
        Ket { amps }
    }

    pub fn from_real(amps: &[f64]) -> Self {
        Ket::new(amps.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Computational basis vector `|index⟩` in dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ket { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Ket::new(self.amps.iter().map(|a| a / n).collect())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Ket) -> C64 {
        assert_eq!(self.dim(), other.dim(), "inner product dimension mismatch");
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Elementwise complex conjugate in the computational basis.
    pub fn conj(&self) -> Self {
        Ket::new(self.amps.iter().map(|a| a.conj()).collect())
    }

    pub fn scale(&self, s: C64) -> Self {
        Ket::new(self.amps.iter().map(|a| a * s).collect())
    }

    pub fn kron(&self, other: &Ket) -> Self {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ket::new(amps)
    }

    /// `|self⟩⟨self|` as a single-factor operator.
    pub fn projector(&self) -> Operator {
        Operator::outer(self, self)
    }
}

/// Distance between rays: `sqrt(2 - 2|⟨u|v⟩|)`, zero iff `u = e^{iθ} v` for unit vectors.
///
/// Evaluated as `min_θ ‖u − e^{iθ}v‖`, which equals the closed form for unit
/// vectors but does not lose precision to cancellation near zero.
pub fn phase_free_distance(u: &Ket, v: &Ket) -> f64 {
    let overlap = v.inner(u);
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        ONE
    };
    u.amps
        .iter()
        .zip(&v.amps)
        .map(|(a, b)| (a - b * phase).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Dense square operator with tensor-factor structure.
#[derive(Clone, PartialEq)]
pub struct Operator {
    dims: Vec<usize>,
    n: usize,
    data: Vec<C64>,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Operator(dims = {:?})", self.dims)?;
        for r in 0..self.n {
            let row: Vec<String> = (0..self.n)
                .map(|c| {
                    let z = self[(r, c)];
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for Operator {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.n + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Operator {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.n + c]
    }
}

impl Operator {
    /// Builds an operator from row-major entries; `dims` must multiply to the side length.
    pub fn new(dims: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::domain(format!("invalid factor dimensions {dims:?}")));
        }
        let n: usize = dims.iter().product();
        if data.len() != n * n {
            return Err(Error::domain(format!(
                "dims {dims:?} need {} entries, got {}",
                n * n,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::domain("non-finite operator entry"));
        }
        Ok(Operator { dims, n, data })
    }

    pub fn zeros(dims: &[usize]) -> Self {
        let n: usize = dims.iter().product();
        Operator {
            dims: dims.to_vec(),
            n,
            data: vec![ZERO; n * n],
        }
    }

    pub fn identity(dims: &[usize]) -> Self {
        let mut m = Operator::zeros(dims);
        for i in 0..m.n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(dims: &[usize], f: impl Fn(usize, usize) -> C64) -> Self {
        let mut m = Operator::zeros(dims);
        for r in 0..m.n {
            for c in 0..m.n {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    pub fn diag(entries: &[C64]) -> Self {
        let mut m = Operator::zeros(&[entries.len()]);
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    /// `|u⟩⟨v|`.
    pub fn outer(u: &Ket, v: &Ket) -> Self {
        assert_eq!(u.dim(), v.dim(), "outer product of unequal dimensions");
        Operator::from_fn(&[u.dim()], |r, c| u.amps[r] * v.amps[c].conj())
    }

    /// The swap operator `V|i⟩|j⟩ = |j⟩|i⟩` on `d ⊗ d`.
    pub fn swap(d: usize) -> Self {
        let mut m = Operator::zeros(&[d, d]);
        for i in 0..d {
            for j in 0..d {
                m[(i * d + j, j * d + i)] = ONE;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    /// Replaces the factor structure; the total dimension must be unchanged.
    pub fn with_dims(mut self, dims: &[usize]) -> Result<Self> {
        let n: usize = dims.iter().product();
        if n != self.n || dims.contains(&0) {
            return Err(Error::domain(format!(
                "cannot view a {}-dimensional operator with dims {dims:?}",
                self.n
            )));
        }
        self.dims = dims.to_vec();
        Ok(self)
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn adjoint(&self) -> Self {
        Operator::from_fn(&self.dims, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Operator::from_fn(&self.dims, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        let mut m = self.clone();
        m.data.iter_mut().for_each(|z| *z = z.conj());
        m
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut m = self.clone();
        m.data.iter_mut().for_each(|z| *z *= s);
        m
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Frobenius norm of `self - other`.
    pub fn distance(&self, other: &Operator) -> f64 {
        assert_eq!(self.n, other.n, "distance between unequal dimensions");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermitian_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.n {
            for c in r..self.n {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// `tr(self · other)`.
    pub fn trace_product(&self, other: &Operator) -> C64 {
        assert_eq!(self.n, other.n, "trace product of unequal dimensions");
        let mut acc = ZERO;
        for r in 0..self.n {
            for c in 0..self.n {
                acc += self[(r, c)] * other[(c, r)];
            }
        }
        acc
    }

    pub fn apply(&self, v: &Ket) -> Ket {
        assert_eq!(self.n, v.dim(), "operator/ket dimension mismatch");
        Ket::new(
            (0..self.n)
                .map(|r| (0..self.n).map(|c| self[(r, c)] * v.amps[c]).sum())
                .collect(),
        )
    }

    /// `⟨v|self|v⟩`.
    pub fn expectation(&self, v: &Ket) -> C64 {
        v.inner(&self.apply(v))
    }

    /// `A ρ A†`.
    pub fn conjugate_by(&self, a: &Operator) -> Operator {
        &(a * self) * &a.adjoint()
    }

    pub fn pow(&self, k: usize) -> Operator {
        let mut out = Operator::identity(&self.dims);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.n, self.n, &self.data)
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.n, rhs.n, "sum of unequal dimensions");
        let mut m = self.clone();
        m.data.iter_mut().zip(&rhs.data).for_each(|(a, b)| *a += b);
        m
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.n, rhs.n, "difference of unequal dimensions");
        let mut m = self.clone();
        m.data.iter_mut().zip(&rhs.data).for_each(|(a, b)| *a -= b);
        m
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.n, rhs.n, "product of unequal dimensions");
        let n = self.n;
        let mut out = Operator::zeros(&self.dims);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * rhs.data[k * n + c];
                }
            }
        }
        out
    }
}

/// Tensor product; the result's dims are `a.dims ++ b.dims`.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    let mut dims = a.dims.clone();
    dims.extend_from_slice(&b.dims);
    let (na, nb) = (a.n, b.n);
    let mut out = Operator::zeros(&dims);
    for ar in 0..na {
        for ac in 0..na {
            let x = a[(ar, ac)];
            if x == ZERO {
                continue;
            }
            for br in 0..nb {
                for bc in 0..nb {
                    out[(ar * nb + br, ac * nb + bc)] = x * b[(br, bc)];
                }
            }
        }
    }
    out
}

/// Mixed-radix digits of `index` (first factor most significant).
pub(crate) fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

pub(crate) fn from_digits(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

fn check_factor(m: &Operator, index: usize) -> Result<()> {
    if index >= m.dims.len() {
        return Err(Error::Index {
            index,
            factors: m.dims.len(),
        });
    }
    Ok(())
}

/// Traces out every factor not listed in `keep`.
pub fn partial_trace(m: &Operator, keep: &[usize]) -> Result<Operator> {
    if m.dims.len() < 2 {
        return Err(Error::domain(
            "partial trace needs at least two tensor factors",
        ));
    }
    if keep.is_empty() {
        return Err(Error::domain("partial trace must keep at least one factor"));
    }
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    for &k in &keep {
        check_factor(m, k)?;
    }
    let kept_dims: Vec<usize> = keep.iter().map(|&k| m.dims[k]).collect();
    let mut out = Operator::zeros(&kept_dims);
    for r in 0..m.n {
        let rd = digits(r, &m.dims);
        for c in 0..m.n {
            let cd = digits(c, &m.dims);
            let traced_equal = (0..m.dims.len())
                .filter(|i| !keep.contains(i))
                .all(|i| rd[i] == cd[i]);
            if !traced_equal {
                continue;
            }
            let kr: Vec<usize> = keep.iter().map(|&k| rd[k]).collect();
            let kc: Vec<usize> = keep.iter().map(|&k| cd[k]).collect();
            let (i, j) = (from_digits(&kr, &kept_dims), from_digits(&kc, &kept_dims));
            out[(i, j)] += m[(r, c)];
        }
    }
    Ok(out)
}

/// Transposes the tensor factor `sub` in place of its row/column indices.
pub fn partial_transpose(m: &Operator, sub: usize) -> Result<Operator> {
    check_factor(m, sub)?;
    let mut out = Operator::zeros(&m.dims);
    for r in 0..m.n {
        let mut rd = digits(r, &m.dims);
        for c in 0..m.n {
            let mut cd = digits(c, &m.dims);
            std::mem::swap(&mut rd[sub], &mut cd[sub]);
            out[(from_digits(&rd, &m.dims), from_digits(&cd, &m.dims))] = m[(r, c)];
            std::mem::swap(&mut rd[sub], &mut cd[sub]);
        }
    }
    Ok(out)
}

/// Eigen-decomposition of a Hermitian operator.
#[derive(Clone, Debug)]
pub struct Eigen {
    /// Ascending.
    pub values: Vec<f64>,
    pub vectors: Vec<Ket>,
}

/// Hermitian eigensolve with ascending eigenvalues.
///
/// Each eigenvector's phase is fixed so that its largest-magnitude component
/// (lowest index on ties) is real and positive.
pub fn eig_hermitian(m: &Operator) -> Result<Eigen> {
    let scale = m.data.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    let residual = m.hermitian_residual();
    if residual > HERMITIAN_TOL * scale {
        return Err(Error::domain(format!(
            "eigensolve needs a Hermitian matrix (residual {residual:e})"
        )));
    }
    let sym = Operator::from_fn(&m.dims, |r, c| (m[(r, c)] + m[(c, r)].conj()) * 0.5);
    let eig = nalgebra::SymmetricEigen::new(sym.to_nalgebra());
    let mut order: Vec<usize> = (0..m.n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let col: Vec<C64> = eig.eigenvectors.column(i).iter().copied().collect();
            let pivot = col
                .iter()
                .enumerate()
                .fold((0, -1.0), |best, (k, z)| {
                    if z.norm() > best.1 + 1e-12 {
                        (k, z.norm())
                    } else {
                        best
                    }
                })
                .0;
            let phase = col[pivot].conj() / col[pivot].norm();
            Ket::new(col.iter().map(|z| z * phase).collect())
        })
        .collect();
    Ok(Eigen { values, vectors })
}

/// Smallest eigenvalue of a Hermitian operator.
pub fn min_eigenvalue(m: &Operator) -> Result<f64> {
    Ok(eig_hermitian(m)?.values[0])
}

/// Haar-random pure state from a seeded Gaussian vector.
pub fn haar_random_ket(d: usize, seed: u64) -> Result<Ket> {
    if d == 0 {
        return Err(Error::domain("Haar-random ket needs d >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps: Vec<C64> = (0..d)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            C64::new(re, im)
        })
        .collect();
    Ok(Ket::new(amps).normalized())
}

/// Random mixed state on `dims`: a Haar-random purification on the doubled space, traced down.
pub fn random_mixed_state(dims: &[usize], seed: u64) -> Result<DensityMatrix> {
    let n: usize = dims.iter().product();
    let psi = haar_random_ket(n * n, seed)?;
    let pure = psi.projector().with_dims(&[n, n])?;
    let reduced = partial_trace(&pure, &[0])?.with_dims(dims)?;
    DensityMatrix::new(reduced)
}

/// A validated density matrix: Hermitian, unit trace, PSD within tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    op: Operator,
}

impl DensityMatrix {
    pub fn new(op: Operator) -> Result<Self> {
        let herm = op.hermitian_residual();
        if herm > HERMITIAN_TOL {
            return Err(Error::Validation {
                check: "hermitian",
                residual: herm,
            });
        }
        let tr = op.trace();
        let tr_dev = (tr - ONE).norm();
        if tr_dev > TRACE_TOL {
            return Err(Error::Validation {
                check: "trace",
                residual: tr_dev,
            });
        }
        let eig = eig_hermitian(&op)?;
        let largest = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if eig.values[0] < -PSD_TOL * largest {
            return Err(Error::Validation {
                check: "psd",
                residual: -eig.values[0],
            });
        }
        Ok(DensityMatrix { op })
    }

    pub fn pure(psi: &Ket) -> Self {
        DensityMatrix {
            op: psi.normalized().projector(),
        }
    }

    pub fn maximally_mixed(dims: &[usize]) -> Self {
        let n: usize = dims.iter().product();
        DensityMatrix {
            op: Operator::identity(dims).scale_re(1.0 / n as f64),
        }
    }

    pub fn with_dims(self, dims: &[usize]) -> Result<Self> {
        Ok(DensityMatrix {
            op: self.op.with_dims(dims)?,
        })
    }

    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn into_op(self) -> Operator {
        self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn dims(&self) -> &[usize] {
        self.op.dims()
    }
}

/// Tensor product of a list of kets, first factor most significant.
pub fn kron_kets(kets: &[Ket]) -> Ket {
    let mut iter = kets.iter();
    let first = iter.next().expect("at least one ket").clone();
    iter.fold(first, |acc, k| acc.kron(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_op(dims: &[usize], seed: u64) -> Operator {
        let n: usize = dims.iter().product();
        let v = haar_random_ket(n * n, seed).unwrap();
        Operator::new(dims.to_vec(), v.amps().to_vec()).unwrap()
    }

    fn random_hermitian(dims: &[usize], seed: u64) -> Operator {
        let a = random_op(dims, seed);
        &a + &a.adjoint()
    }

    fn bell_phi_plus(d: usize) -> Ket {
        let mut amps = vec![ZERO; d * d];
        for i in 0..d {
            amps[i * d + i] = C64::new(1.0 / (d as f64).sqrt(), 0.0);
        }
        Ket::new(amps)
    }

    #[test]
    fn kron_identities_and_shapes() {
        let i2 = Operator::identity(&[2]);
        assert_eq!(kron(&i2, &i2).distance(&Operator::identity(&[2, 2])), 0.0);

        let p = kron(&Ket::basis(2, 0).projector(), &Ket::basis(2, 1).projector());
        let want = Operator::diag(&[ZERO, ONE, ZERO, ZERO]);
        assert_eq!(p.distance(&want), 0.0);

        let k = kron(&Operator::identity(&[2]), &Operator::identity(&[3]));
        assert_eq!(k.dims(), &[2, 3]);
        assert_eq!(k.dim(), 6);
    }

    #[test]
    fn partial_trace_examples() {
        let phi = bell_phi_plus(2).projector().with_dims(&[2, 2]).unwrap();
        let marginal = partial_trace(&phi, &[0]).unwrap();
        assert!(marginal.distance(&Operator::identity(&[2]).scale_re(0.5)) < 1e-15);

        let a = random_op(&[2], 1);
        let b = random_op(&[3], 2);
        let got = partial_trace(&kron(&a, &b), &[1]).unwrap();
        assert!(got.distance(&b.scale(a.trace())) < 1e-12);

        // (𝟙+V)/6 on 2⊗2 has marginal I/2: rows (1+1, 0, 0, 1)/6 style arithmetic.
        let rho = (&Operator::identity(&[2, 2]) + &Operator::swap(2)).scale_re(1.0 / 6.0);
        let m = partial_trace(&rho, &[0]).unwrap();
        assert!(m.distance(&Operator::identity(&[2]).scale_re(0.5)) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_indices() {
        let m = Operator::identity(&[2, 2]);
        assert!(matches!(partial_trace(&m, &[2]), Err(Error::Index { .. })));
        assert!(partial_trace(&Operator::identity(&[4]), &[0]).is_err());
        assert!(partial_trace(&m, &[]).is_err());
    }

    #[test]
    fn partial_transpose_examples() {
        let k01 = kron_kets(&[Ket::basis(2, 0), Ket::basis(2, 1)]);
        let k10 = kron_kets(&[Ket::basis(2, 1), Ket::basis(2, 0)]);
        let k11 = kron_kets(&[Ket::basis(2, 1), Ket::basis(2, 1)]);
        let k00 = kron_kets(&[Ket::basis(2, 0), Ket::basis(2, 0)]);
        let m = Operator::outer(&k01, &k10).with_dims(&[2, 2]).unwrap();
        let want = Operator::outer(&k11, &k00);
        assert_eq!(partial_transpose(&m, 0).unwrap().distance(&want), 0.0);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = Ket::from_real(&[0.0, s, -s, 0.0]);
        let pt = partial_transpose(&singlet.projector().with_dims(&[2, 2]).unwrap(), 0).unwrap();
        assert!((min_eigenvalue(&pt).unwrap() + 0.5).abs() < 1e-12);

        assert!(matches!(partial_transpose(&m, 5), Err(Error::Index { .. })));
    }

    #[test]
    fn eig_examples() {
        let e = eig_hermitian(&Operator::identity(&[4])).unwrap();
        assert!(e.values.iter().all(|v| (v - 1.0).abs() < 1e-12));

        let e = eig_hermitian(&Operator::swap(2)).unwrap();
        let want = [-1.0, 1.0, 1.0, 1.0];
        for (v, w) in e.values.iter().zip(want) {
            assert!((v - w).abs() < 1e-12);
        }

        let sx = Operator::new(vec![2], vec![ZERO, ONE, ONE, ZERO]).unwrap();
        let e = eig_hermitian(&sx).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-12 && (e.values[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = Operator::new(vec![2], vec![ZERO, ONE, ZERO, ZERO]).unwrap();
        assert!(matches!(eig_hermitian(&m), Err(Error::Domain(_))));
    }

    #[test]
    fn haar_ket_basics() {
        assert!(matches!(haar_random_ket(0, 1), Err(Error::Domain(_))));
        let a = haar_random_ket(5, 42).unwrap();
        assert!((a.norm() - 1.0).abs() < 1e-12);
        assert_eq!(a, haar_random_ket(5, 42).unwrap());
        assert_ne!(a, haar_random_ket(5, 43).unwrap());
    }

    #[test]
    fn haar_first_moment_monte_carlo() {
        // E|⟨0|ψ⟩|² = 1/d; the variance of |ψ_0|² under Haar is (d-1)/(d²(d+1)).
        let d = 4usize;
        let samples = 10_000u64;
        let mean = (0..samples)
            .map(|s| haar_random_ket(d, s).unwrap().amps()[0].norm_sqr())
            .sum::<f64>()
            / samples as f64;
        let var = (d as f64 - 1.0) / ((d * d) as f64 * (d as f64 + 1.0));
        let se = (var / samples as f64).sqrt();
        assert!((mean - 0.25).abs() < 5.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn density_matrix_validation() {
        let half = DensityMatrix::maximally_mixed(&[2]);
        assert!(DensityMatrix::new(half.op().clone()).is_ok());
        let bad_trace = half.op().scale_re(0.9);
        assert!(matches!(
            DensityMatrix::new(bad_trace),
            Err(Error::Validation { check: "trace", .. })
        ));
        let neg = Operator::diag(&[C64::new(1.5, 0.0), C64::new(-0.5, 0.0)]);
        assert!(matches!(
            DensityMatrix::new(neg),
            Err(Error::Validation { check: "psd", .. })
        ));
        let rho = random_mixed_state(&[2, 2], 7).unwrap();
        assert_eq!(rho.dims(), &[2, 2]);
    }

    #[test]
    fn phase_free_distance_ignores_global_phase() {
        let v = haar_random_ket(3, 9).unwrap();
        let w = v.scale(C64::from_polar(1.0, 0.7));
        assert!(phase_free_distance(&v, &w) < 1e-14);
        let u = haar_random_ket(3, 10).unwrap();
        assert!(phase_free_distance(&v, &u) > 1e-3);
        let closed = (2.0 - 2.0 * v.inner(&u).norm()).sqrt();
        assert!((phase_free_distance(&v, &u) - closed).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn kron_is_associative(s in 0u64..1000) {
            let (a, b, c) = (random_op(&[2], s), random_op(&[3], s + 1), random_op(&[2], s + 2));
            let left = kron(&kron(&a, &b), &c);
            let right = kron(&a, &kron(&b, &c));
            prop_assert!(left.distance(&right) < 1e-15);
            prop_assert_eq!(left.dims(), right.dims());
        }

        #[test]
        fn partial_trace_of_product(s in 0u64..1000) {
            let (a, b) = (random_op(&[3], s), random_op(&[2], s + 7));
            let got = partial_trace(&kron(&a, &b), &[0]).unwrap();
            prop_assert!(got.distance(&a.scale(b.trace())) < 1e-12);
            let full = kron(&a, &b);
            let tr = partial_trace(&full, &[1]).unwrap().trace();
            prop_assert!((tr - full.trace()).norm() < 1e-12);
        }

        #[test]
        fn partial_transpose_is_involution(s in 0u64..1000, sub in 0usize..3) {
            let m = random_hermitian(&[2, 3, 2], s);
            let back = partial_transpose(&partial_transpose(&m, sub).unwrap(), sub).unwrap();
            prop_assert_eq!(back, m);
        }

        #[test]
        fn eig_reconstructs(s in 0u64..500) {
            let m = random_hermitian(&[2, 3], s);
            let e = eig_hermitian(&m).unwrap();
            let mut rebuilt = Operator::zeros(&[6]);
            for (v, k) in e.values.iter().zip(&e.vectors) {
                rebuilt = &rebuilt + &k.projector().scale_re(*v);
                let r = m.apply(k);
                let resid = r.amps().iter().zip(k.amps()).map(|(a, b)| (a - b * v).norm()).fold(0.0, f64::max);
                prop_assert!(resid < 1e-9 * m.frobenius_norm());
            }
            prop_assert!(rebuilt.distance(&m) < 1e-9 * m.frobenius_norm());
            for i in 0..6 {
                for j in 0..6 {
                    let g = e.vectors[i].inner(&e.vectors[j]);
                    let want = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((g - C64::new(want, 0.0)).norm() < 1e-9);
                }
            }
            prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
