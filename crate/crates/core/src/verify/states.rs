//! Density matrices and the quantities the bound is stated in.

use num_complex::Complex64;
use serde::Serialize;

use super::linalg::{jacobi_eigenvalues, jacobi_eigh, reconstruct, HermitianMatrix};
use crate::bounds::eta;
use crate::error::{Error, Result};

/// Eigenvalues above `-NEGATIVE_TOL` are accepted and clamped to zero.
pub const NEGATIVE_TOL: f64 = 1e-10;

/// Accepted deviation of the trace from one.
pub const TRACE_TOL: f64 = 1e-12;

/// Unit-trace positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: HermitianMatrix,
    is_diagonal: bool,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        Self::from_hermitian(HermitianMatrix::new(dim, entries)?)
    }

    pub fn from_hermitian(matrix: HermitianMatrix) -> Result<Self> {
        let trace = matrix.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "trace {trace} differs from one"
            )));
        }
        let is_diagonal = matrix.is_diagonal();
        let min = if is_diagonal {
            (0..matrix.dim())
                .map(|i| matrix.get(i, i).re)
                .fold(f64::INFINITY, f64::min)
        } else {
            jacobi_eigenvalues(&matrix)?.last().copied().unwrap_or(0.0)
        };
        if min < -NEGATIVE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min}")));
        }
        Ok(DensityMatrix {
            matrix,
            is_diagonal,
        })
    }

    /// Diagonal state with the given probabilities.
    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        Self::from_hermitian(HermitianMatrix::diagonal(probs))
    }

    /// Clamps the negative eigenvalues of a Hermitian matrix to zero and
    /// renormalizes. Fails for matrices without positive eigenvalues.
    pub fn psd_projection(m: &HermitianMatrix) -> Result<Self> {
        let e = jacobi_eigh(m)?;
        let clamped: Vec<f64> = e.values.iter().map(|&x| x.max(0.0)).collect();
        let total: f64 = clamped.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidState(
                "matrix has no positive eigenvalue".into(),
            ));
        }
        let normalized: Vec<f64> = clamped.iter().map(|x| x / total).collect();
        let matrix = reconstruct(&normalized, &e.vectors);
        let trace = matrix.trace();
        let entries = matrix.entries().iter().map(|z| z / trace).collect();
        Self::from_hermitian(HermitianMatrix::from_parts_unchecked(m.dim(), entries))
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn is_diagonal(&self) -> bool {
        self.is_diagonal
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn diagonal_entries(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix.get(i, i).re).collect()
    }

    /// Eigenvalues in non-increasing order, negatives clamped to zero.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut values = if self.is_diagonal {
            let mut d = self.diagonal_entries();
            d.sort_by(|a, b| b.total_cmp(a));
            d
        } else {
            jacobi_eigenvalues(&self.matrix)?
        };
        values.iter_mut().for_each(|x| *x = x.max(0.0));
        Ok(values)
    }

    /// `Tr H rho` for `H = diag(levels)` in the computational basis.
    pub fn energy(&self, levels: &[f64]) -> Result<f64> {
        if levels.len() != self.dim() {
            return Err(Error::DimensionMismatch(self.dim(), levels.len()));
        }
        Ok(self
            .diagonal_entries()
            .iter()
            .zip(levels)
            .map(|(p, h)| p * h)
            .sum())
    }

    /// `(1 - t) rho + t |0><0|`.
    pub fn mix_with_ground(&self, t: f64) -> Result<Self> {
        let n = self.dim();
        let mut entries: Vec<Complex64> = self
            .matrix
            .entries()
            .iter()
            .map(|z| z * (1.0 - t))
            .collect();
        entries[0] += t;
        let matrix = HermitianMatrix::from_parts_unchecked(n, entries);
        Ok(DensityMatrix {
            is_diagonal: self.is_diagonal,
            matrix,
        })
    }

    /// `(1 - t) self + t other`.
    pub fn mix(&self, other: &Self, t: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        let entries = self
            .matrix
            .entries()
            .iter()
            .zip(other.matrix.entries())
            .map(|(a, b)| a * (1.0 - t) + b * t)
            .collect();
        Ok(DensityMatrix {
            is_diagonal: self.is_diagonal && other.is_diagonal,
            matrix: HermitianMatrix::from_parts_unchecked(self.dim(), entries),
        })
    }

    /// `U rho U^dagger` for a unitary given row-major.
    pub fn conjugate(&self, unitary: &[Complex64]) -> Result<Self> {
        let n = self.dim();
        if unitary.len() != n * n {
            return Err(Error::DimensionMismatch(n * n, unitary.len()));
        }
        let zero = Complex64::new(0.0, 0.0);
        let mut ur = vec![zero; n * n];
        for i in 0..n {
            for k in 0..n {
                let u = unitary[i * n + k];
                for j in 0..n {
                    ur[i * n + j] += u * self.matrix.get(k, j);
                }
            }
        }
        let mut out = vec![zero; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut x = zero;
                for k in 0..n {
                    x += ur[i * n + k] * unitary[j * n + k].conj();
                }
                out[i * n + j] = x;
            }
        }
        let matrix = HermitianMatrix::hermitian_part(n, &out)?;
        Ok(DensityMatrix {
            is_diagonal: matrix.is_diagonal(),
            matrix,
        })
    }
}

/// `S(rho) = sum eta(lambda_i)` in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(rho.eigenvalues()?.into_iter().map(eta).sum())
}

/// `(1/2) || rho - sigma ||_1`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    let diff = rho.matrix.sub(&sigma.matrix)?;
    let abs_sum: f64 = if rho.is_diagonal && sigma.is_diagonal {
        (0..diff.dim()).map(|i| diff.get(i, i).re.abs()).sum()
    } else {
        jacobi_eigenvalues(&diff)?.iter().map(|x| x.abs()).sum()
    };
    Ok((0.5 * abs_sum).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MirskyCheck {
    /// Total variation between the sorted spectra.
    pub tv_sorted: f64,
    pub trace_distance: f64,
}

impl MirskyCheck {
    pub fn holds(&self) -> bool {
        self.tv_sorted <= self.trace_distance + 1e-10
    }
}

/// Compares the distance of the sorted spectra with the trace distance.
pub fn mirsky_passive_check(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<MirskyCheck> {
    let td = trace_distance(rho, sigma)?;
    let a = rho.eigenvalues()?;
    let b = sigma.eigenvalues()?;
    let tv_sorted = 0.5 * a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>();
    Ok(MirskyCheck {
        tv_sorted,
        trace_distance: td,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PassiveEnergy {
    /// `Tr H rho_down`, eigenvalues sorted against increasing levels.
    pub passive: f64,
    pub actual: f64,
}

impl PassiveEnergy {
    pub fn holds(&self) -> bool {
        self.passive <= self.actual + 1e-10 * self.actual.abs().max(1.0)
    }
}

/// Energy of the passive state `rho_down` against that of `rho`, for
/// `H = diag(levels)` with non-decreasing levels.
pub fn passive_energy(rho: &DensityMatrix, levels: &[f64]) -> Result<PassiveEnergy> {
    let actual = rho.energy(levels)?;
    let passive = rho
        .eigenvalues()?
        .iter()
        .zip(levels)
        .map(|(p, h)| p * h)
        .sum();
    Ok(PassiveEnergy { passive, actual })
}
