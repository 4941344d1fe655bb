//! Dense complex Hermitian eigensolver (cyclic Jacobi).

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest dimension accepted by the eigensolver.
pub const MAX_DIM: usize = 256;

/// Tolerance on `max |A - A^dagger|` for accepting an input as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

const MAX_SWEEPS: usize = 100;

/// Square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl HermitianMatrix {
    /// Checks shape and Hermiticity.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch(dim * dim, entries.len()));
        }
        let m = HermitianMatrix { dim, entries };
        let deviation = m.hermitian_deviation();
        if !(deviation < HERMITIAN_TOL) {
            return Err(Error::NonHermitianInput { deviation });
        }
        Ok(m)
    }

    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::new(
            dim,
            entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let dim = values.len();
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (i, &v) in values.iter().enumerate() {
            entries[i * dim + i] = Complex64::new(v, 0.0);
        }
        HermitianMatrix { dim, entries }
    }

    /// `(A + A^dagger) / 2` of an arbitrary square matrix.
    pub fn hermitian_part(dim: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch(dim * dim, entries.len()));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                out[i * dim + j] = 0.5 * (entries[i * dim + j] + entries[j * dim + i].conj());
            }
        }
        Ok(HermitianMatrix { dim, entries: out })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// True when every off-diagonal entry is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        let n = self.dim;
        (0..n).all(|i| (0..n).all(|j| i == j || self.get(i, j) == Complex64::new(0.0, 0.0)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        Ok(HermitianMatrix {
            dim: self.dim,
            entries,
        })
    }

    pub(crate) fn from_parts_unchecked(dim: usize, entries: Vec<Complex64>) -> Self {
        HermitianMatrix { dim, entries }
    }
}

/// Eigen-decomposition `A = V diag(values) V^dagger`.
#[derive(Debug, Clone)]
pub struct Eigh {
    /// Non-increasing.
    pub values: Vec<f64>,
    /// Column `k` (row-major storage) is the eigenvector of `values[k]`.
    pub vectors: Vec<Complex64>,
    /// Frobenius norm of `V^dagger A V - diag(values)`.
    pub residual: f64,
    pub sweeps: usize,
}

fn off_diagonal_norm(a: &[Complex64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi with unitary 2x2 rotations. Each rotation first removes
/// the phase of the pivot, then applies a real Givens rotation.
pub fn jacobi_eigh(m: &HermitianMatrix) -> Result<Eigh> {
    let n = m.dim;
    if n > MAX_DIM {
        return Err(Error::DimensionTooLarge {
            dim: n,
            max: MAX_DIM,
        });
    }
    let deviation = m.hermitian_deviation();
    if !(deviation < HERMITIAN_TOL) {
        return Err(Error::NonHermitianInput { deviation });
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut a = m.entries.clone();
    let mut v = vec![zero; n * n];
    for i in 0..n {
        v[i * n + i] = Complex64::new(1.0, 0.0);
    }
    let target = 1e-13 * m.frobenius_norm();
    let mut sweeps = 0;
    while off_diagonal_norm(&a, n) > target {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NonConvergence(format!(
                "Jacobi did not converge in {MAX_SWEEPS} sweeps"
            )));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let phase = apq / r;
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // U = [[c, s], [-s e^{-i phi}, c e^{-i phi}]] on rows/cols (p, q)
                let u_qp = -s * phase.conj();
                let u_qq = c * phase.conj();
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp + u_qp * akq;
                    a[k * n + q] = s * akp + u_qq * akq;
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp + u_qp * vkq;
                    v[k * n + q] = s * vkp + u_qq * vkq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk + u_qp.conj() * aqk;
                    a[q * n + k] = s * apk + u_qq.conj() * aqk;
                }
                a[p * n + q] = zero;
                a[q * n + p] = zero;
                a[p * n + p] = Complex64::new(a[p * n + p].re, 0.0);
                a[q * n + q] = Complex64::new(a[q * n + q].re, 0.0);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].re.total_cmp(&a[i * n + i].re));
    let values: Vec<f64> = order.iter().map(|&i| a[i * n + i].re).collect();
    let mut vectors = vec![zero; n * n];
    for (col, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[k * n + col] = v[k * n + src];
        }
    }
    let residual = similarity_residual(m, &values, &vectors);
    Ok(Eigh {
        values,
        vectors,
        residual,
        sweeps,
    })
}

/// Eigenvalues in non-increasing order.
pub fn jacobi_eigenvalues(m: &HermitianMatrix) -> Result<Vec<f64>> {
    Ok(jacobi_eigh(m)?.values)
}

/// `|| V^dagger A V - diag(values) ||_F`.
pub fn similarity_residual(m: &HermitianMatrix, values: &[f64], vectors: &[Complex64]) -> f64 {
    let n = m.dim;
    let zero = Complex64::new(0.0, 0.0);
    let mut av = vec![zero; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = m.entries[i * n + k];
            if aik == zero {
                continue;
            }
            for j in 0..n {
                av[i * n + j] += aik * vectors[k * n + j];
            }
        }
    }
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut x = zero;
            for k in 0..n {
                x += vectors[k * n + i].conj() * av[k * n + j];
            }
            if i == j {
                x -= values[i];
            }
            sum += x.norm_sqr();
        }
    }
    sum.sqrt()
}

/// `V diag(values) V^dagger`.
pub fn reconstruct(values: &[f64], vectors: &[Complex64]) -> HermitianMatrix {
    let n = values.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut x = Complex64::new(0.0, 0.0);
            for k in 0..n {
                x += vectors[i * n + k] * values[k] * vectors[j * n + k].conj();
            }
            out[i * n + j] = x;
        }
    }
    // symmetrize away rounding
    HermitianMatrix::hermitian_part(n, &out).expect("square by construction")
}
