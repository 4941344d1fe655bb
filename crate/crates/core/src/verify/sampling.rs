//! Randomized no-violation checks.
//!
//! Every trial draws from its own ChaCha stream keyed by `(seed, trial)`,
//! so reports do not depend on scheduling.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::linalg::HermitianMatrix;
use super::states::{trace_distance, von_neumann_entropy, DensityMatrix};
use super::{Outcome, VerificationReport};
use crate::bounds::Bound;
use crate::error::{Error, Result};
use crate::extremal::{
    conditional_entropy, extremal_pair, shannon_entropy, tv_distance, Distribution,
    JointDistribution,
};
use crate::spectrum::Spectrum;

/// Largest support drawn by the classical samplers.
const MAX_SUPPORT: usize = 48;

/// Largest dimension accepted by the quantum sampler.
pub const MAX_QUANTUM_DIM: usize = 64;

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Random point of the simplex with a random amount of sparsity.
fn random_probs(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let sharpness: f64 = rng.random_range(0.2..6.0);
    let mut p: Vec<f64> = (0..n)
        .map(|_| (-rng.random::<f64>().max(1e-300).ln()).powf(sharpness))
        .collect();
    if rng.random_bool(0.3) {
        let keep = rng.random_range(1..=n);
        for x in p.iter_mut().skip(keep) {
            *x = 0.0;
        }
    }
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    p
}

/// Mixes `p` with the point mass on level 0 so that its mean is at most `E`.
fn condition_energy(p: &mut [f64], levels: &[f64], energy: f64) {
    let mean: f64 = p.iter().zip(levels).map(|(a, b)| a * b).sum();
    if mean > energy {
        let t = 1.0 - energy / mean;
        p.iter_mut().for_each(|x| *x *= 1.0 - t);
        p[0] += t;
    }
}

fn mean(p: &[f64], levels: &[f64]) -> f64 {
    p.iter().zip(levels).map(|(a, b)| a * b).sum()
}

fn support_levels(s: &Spectrum, cap: usize) -> Vec<f64> {
    s.levels(cap).collect()
}

/// Draws pairs `(p, q)` with `E f(p) <= E` and checks
/// `H(p) - H(q) <= kappa(TV(p, q))`, and the two-sided form whenever `q`
/// also meets the constraint.
pub fn sample_verify_classical(
    s: &Spectrum,
    energy: f64,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<VerificationReport> {
    let bound = Bound::new(s, energy, tol)?;
    let levels = support_levels(s, MAX_SUPPORT);
    let outcomes: Vec<Result<Outcome>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let n = rng.random_range(2..=levels.len().max(2)).min(levels.len());
            let lv = &levels[..n];
            let mut p = random_probs(&mut rng, n);
            condition_energy(&mut p, lv, energy);
            let q = match t % 3 {
                0 => random_probs(&mut rng, n),
                1 => {
                    // small perturbation of p
                    let r = random_probs(&mut rng, n);
                    let w: f64 = rng.random::<f64>().powi(3);
                    p.iter()
                        .zip(&r)
                        .map(|(a, b)| (1.0 - w) * a + w * b)
                        .collect()
                }
                _ => {
                    let mut q = random_probs(&mut rng, n);
                    condition_energy(&mut q, lv, energy);
                    q
                }
            };
            let dp = Distribution {
                support_offset: 0,
                probs: p.clone(),
                certified_tail: 0.0,
            };
            let dq = Distribution {
                support_offset: 0,
                probs: q.clone(),
                certified_tail: 0.0,
            };
            let eps = tv_distance(&dp, &dq);
            let k = bound.kappa(eps)?.value;
            let gap = shannon_entropy(&dp) - shannon_entropy(&dq);
            let achieved = if mean(&q, lv) <= energy {
                gap.abs()
            } else {
                gap
            };
            Ok(Outcome { bound: k, achieved })
        })
        .collect();
    VerificationReport::collect("classical", seed, outcomes)
}

fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Random state: PSD projection of a Gaussian Hermitian matrix, a
/// rank-limited Wishart state, or a diagonal state.
fn random_state(rng: &mut ChaCha8Rng, dim: usize, kind: usize) -> Result<DensityMatrix> {
    match kind % 3 {
        0 => {
            let raw: Vec<Complex64> = (0..dim * dim).map(|_| complex_gaussian(rng)).collect();
            let shift: f64 = rng.random_range(-1.0..2.0);
            let mut h = HermitianMatrix::hermitian_part(dim, &raw)?
                .entries()
                .to_vec();
            for i in 0..dim {
                h[i * dim + i] += shift;
            }
            let h = HermitianMatrix::hermitian_part(dim, &h)?;
            DensityMatrix::psd_projection(&h).or_else(|_| DensityMatrix::diagonal(&unit(dim)))
        }
        1 => {
            let rank = rng.random_range(1..=dim);
            let g: Vec<Complex64> = (0..dim * rank).map(|_| complex_gaussian(rng)).collect();
            let mut w = vec![Complex64::new(0.0, 0.0); dim * dim];
            for i in 0..dim {
                for j in 0..dim {
                    for k in 0..rank {
                        w[i * dim + j] += g[i * rank + k] * g[j * rank + k].conj();
                    }
                }
            }
            let tr: f64 = (0..dim).map(|i| w[i * dim + i].re).sum();
            w.iter_mut().for_each(|z| *z /= tr);
            DensityMatrix::from_hermitian(HermitianMatrix::hermitian_part(dim, &w)?)
        }
        _ => DensityMatrix::diagonal(&random_probs(rng, dim)),
    }
}

fn unit(dim: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[0] = 1.0;
    v
}

/// Haar-like unitary from Gram-Schmidt on a Gaussian matrix (rows).
fn random_unitary(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Complex64> {
    let mut u: Vec<Complex64> = (0..dim * dim).map(|_| complex_gaussian(rng)).collect();
    for i in 0..dim {
        for j in 0..i {
            let mut dot = Complex64::new(0.0, 0.0);
            for k in 0..dim {
                dot += u[j * dim + k].conj() * u[i * dim + k];
            }
            for k in 0..dim {
                let ujk = u[j * dim + k];
                u[i * dim + k] -= dot * ujk;
            }
        }
        let norm: f64 = (0..dim)
            .map(|k| u[i * dim + k].norm_sqr())
            .sum::<f64>()
            .sqrt();
        for k in 0..dim {
            u[i * dim + k] /= norm;
        }
    }
    u
}

fn condition_state(rho: DensityMatrix, levels: &[f64], energy: f64) -> Result<DensityMatrix> {
    let e = rho.energy(levels)?;
    if e > energy {
        rho.mix_with_ground(1.0 - energy / e)
    } else {
        Ok(rho)
    }
}

/// Quantum version on the first `dim` levels. The bound is evaluated for
/// the truncated Hamiltonian, which is the tightest valid comparison for
/// states supported there. Trial 0 is the extremal diagonal pair rotated
/// by a common random unitary; its slack is reported separately.
pub fn sample_verify_quantum(
    s: &Spectrum,
    energy: f64,
    dim: usize,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<VerificationReport> {
    if dim > MAX_QUANTUM_DIM {
        return Err(Error::DimensionTooLarge {
            dim,
            max: MAX_QUANTUM_DIM,
        });
    }
    let levels = support_levels(s, dim);
    if levels.len() < 2 {
        return Err(Error::TooFewLevels {
            needed: 2,
            found: levels.len(),
        });
    }
    let dim = levels.len();
    let truncated = Spectrum::finite(&levels)?;
    let bound = Bound::new(&truncated, energy, tol)?;

    let extremal = |rng: &mut ChaCha8Rng| -> Result<Outcome> {
        let eps = 0.5 * bound.threshold_a();
        let pair = extremal_pair(&truncated, energy, eps, tol)?;
        let mut px = pair.x.probs.clone();
        px.resize(dim, 0.0);
        let u = random_unitary(rng, dim);
        let rho = DensityMatrix::diagonal(&px)?.conjugate(&u)?;
        let sigma = DensityMatrix::diagonal(&unit(dim))?.conjugate(&u)?;
        let td = trace_distance(&rho, &sigma)?;
        let achieved = von_neumann_entropy(&rho)? - von_neumann_entropy(&sigma)?;
        Ok(Outcome {
            bound: bound.kappa(td.min(1.0))?.value,
            achieved,
        })
    };

    let outcomes: Vec<Result<Outcome>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            if t == 0 {
                return extremal(&mut rng);
            }
            let rho = condition_state(random_state(&mut rng, dim, t)?, &levels, energy)?;
            let sigma = match t % 4 {
                0 => rho.clone(),
                1 => {
                    let other = random_state(&mut rng, dim, t / 4)?;
                    rho.mix(&other, rng.random::<f64>().powi(3))?
                }
                _ => random_state(&mut rng, dim, t / 3 + 1)?,
            };
            let td = trace_distance(&rho, &sigma)?;
            let gap = von_neumann_entropy(&rho)? - von_neumann_entropy(&sigma)?;
            let achieved = if sigma.energy(&levels)? <= energy {
                gap.abs()
            } else {
                gap
            };
            Ok(Outcome {
                bound: bound.kappa(td.min(1.0))?.value,
                achieved,
            })
        })
        .collect();
    let mut report = VerificationReport::collect("quantum", seed, outcomes)?;
    if trials > 0 {
        report.tightness_slack = Some(report.first_slack);
    }
    Ok(report)
}

/// Random joint laws with `E f(X) <= E`; checks `H(X|Y) <= kappa(P(X != Y))`.
pub fn sample_verify_fano(
    s: &Spectrum,
    energy: f64,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<VerificationReport> {
    let bound = Bound::new(s, energy, tol)?;
    let levels = support_levels(s, MAX_SUPPORT);
    let outcomes: Vec<Result<Outcome>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let n = rng.random_range(2..=levels.len().max(2)).min(levels.len());
            let mut px = random_probs(&mut rng, n);
            condition_energy(&mut px, &levels[..n], energy);
            // channel: Y = X with probability 1 - e_x, otherwise a random symbol
            let noise: f64 = rng.random::<f64>().powi(2);
            let mut probs = vec![0.0; n * n];
            for x in 0..n {
                let ex = noise * rng.random::<f64>();
                let row = random_probs(&mut rng, n);
                for y in 0..n {
                    let stay = if x == y { 1.0 - ex } else { 0.0 };
                    probs[x * n + y] = px[x] * (stay + ex * row[y]);
                }
            }
            let j = JointDistribution {
                rows: n,
                cols: n,
                probs,
                certified_tail: 0.0,
            };
            let eps = j.mismatch_probability().clamp(0.0, 1.0);
            Ok(Outcome {
                bound: bound.kappa(eps)?.value,
                achieved: conditional_entropy(&j),
            })
        })
        .collect();
    VerificationReport::collect("fano", seed, outcomes)
}
