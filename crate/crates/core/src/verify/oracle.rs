//! Brute-force maximizer of `H(X)` subject to `E f(X) <= E` and
//! `P(X = 0) >= 1 - eps` on the first `N` levels.
//!
//! The search is a scaled projected-gradient ascent on the truncated
//! simplex. It never evaluates a partition function, so agreement with
//! [`crate::bounds::kappa`] is an independent check of optimality.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::eta;
use crate::error::{Error, Result};
use crate::gibbs::CompensatedSum;
use crate::spectrum::Spectrum;

/// Coordinates below this are scaled as if they were this large.
const SCALE_FLOOR: f64 = 1e-15;
const ARMIJO: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            restarts: 10,
            max_iterations: 20_000,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub value: f64,
    /// Maximizer over the first `N` levels.
    pub distribution: Vec<f64>,
    /// Iterations used by the best restart.
    pub iterations: usize,
    /// Largest spread between the values reached by different restarts.
    pub restart_spread: f64,
}

/// Maximal entropy over the truncated feasible set, in nats.
pub fn delta_oracle(s: &Spectrum, energy: f64, eps: f64, cutoff: usize, tol: f64) -> Result<f64> {
    Ok(delta_oracle_with(s, energy, eps, cutoff, tol, &OracleConfig::default())?.value)
}

pub fn delta_oracle_with(
    s: &Spectrum,
    energy: f64,
    eps: f64,
    cutoff: usize,
    tol: f64,
    config: &OracleConfig,
) -> Result<OracleResult> {
    if !(energy > 0.0 && energy.is_finite()) {
        return Err(Error::DomainError(format!(
            "energy must be positive, got {energy}"
        )));
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::DomainError(format!(
            "eps must lie in [0, 1], got {eps}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::DomainError(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if s.min_level() != 0.0 {
        return Err(Error::DomainError(
            "oracle needs a grounded spectrum".into(),
        ));
    }
    let levels: Vec<f64> = s.levels(cutoff).collect();
    let n = levels.len();
    if n == 0 {
        return Err(Error::DomainError(
            "cutoff must keep at least one level".into(),
        ));
    }
    let point = |iterations| {
        let mut distribution = vec![0.0; n];
        distribution[0] = 1.0;
        OracleResult {
            value: 0.0,
            distribution,
            iterations,
            restart_spread: 0.0,
        }
    };
    if eps == 0.0 || n == 1 {
        return Ok(point(0));
    }

    let problem = Problem {
        levels,
        energy,
        floor: 1.0 - eps,
    };
    let runs: Vec<Result<(f64, Vec<f64>, usize)>> = (0..config.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(r as u64);
            problem.ascend(&mut rng, tol, config.max_iterations)
        })
        .collect();
    let mut best: Option<(f64, Vec<f64>, usize)> = None;
    let mut lo = f64::INFINITY;
    for run in runs {
        let run = run?;
        lo = lo.min(run.0);
        if best.as_ref().is_none_or(|b| run.0 > b.0) {
            best = Some(run);
        }
    }
    let (value, distribution, iterations) = best.expect("at least one restart");
    Ok(OracleResult {
        value,
        distribution,
        iterations,
        restart_spread: value - lo,
    })
}

struct Problem {
    levels: Vec<f64>,
    energy: f64,
    /// Lower bound on the weight of level 0.
    floor: f64,
}

fn entropy(p: &[f64]) -> f64 {
    p.iter()
        .map(|&x| eta(x))
        .collect::<CompensatedSum>()
        .value()
}

impl Problem {
    fn ascend(
        &self,
        rng: &mut ChaCha8Rng,
        tol: f64,
        max_iterations: usize,
    ) -> Result<(f64, Vec<f64>, usize)> {
        let n = self.levels.len();
        // random interior start, Euclidean projection onto the feasible set
        let sharpness = rng.random_range(0.5..4.0);
        let start: Vec<f64> = (0..n)
            .map(|_| (-rng.random::<f64>().max(1e-300).ln()).powf(sharpness))
            .collect();
        let total: f64 = start.iter().sum();
        let start: Vec<f64> = start.iter().map(|x| x / total).collect();
        let mut p = self.project(&start, &vec![1.0; n]);
        let mut value = entropy(&p);
        let mut quiet = 0;

        for it in 1..=max_iterations {
            let scale: Vec<f64> = p.iter().map(|&x| x.max(SCALE_FLOOR)).collect();
            let grad: Vec<f64> = scale.iter().map(|&x| -x.ln() - 1.0).collect();
            let weights: Vec<f64> = scale.iter().map(|x| 1.0 / x).collect();
            let mut alpha = 1.0;
            let (next, next_value) = loop {
                let y: Vec<f64> = (0..n).map(|i| p[i] + alpha * scale[i] * grad[i]).collect();
                let q = self.project(&y, &weights);
                let gain: f64 = (0..n).map(|i| grad[i] * (q[i] - p[i])).sum();
                let hq = entropy(&q);
                if hq >= value + ARMIJO * gain || alpha < 1e-12 {
                    break (q, hq);
                }
                alpha *= 0.5;
            };
            let improvement = next_value - value;
            if next_value > value {
                p = next;
                value = next_value;
            }
            if improvement < 1e-2 * tol {
                quiet += 1;
                if quiet >= 3 {
                    return Ok((value, p, it));
                }
            } else {
                quiet = 0;
            }
        }
        Err(Error::NonConvergence(format!(
            "oracle ascent did not settle within {max_iterations} iterations"
        )))
    }

    /// Projection in the metric `sum w_i (p_i - y_i)^2` onto
    /// `{sum p = 1, p >= 0, p_0 >= floor, sum h p <= E}`.
    ///
    /// For a multiplier `lambda` on the energy constraint the minimizer is a
    /// weighted projection of `y - lambda h / w` onto the simplex with lower
    /// bounds, solved exactly by sorting breakpoints. The energy of that
    /// minimizer does not increase with `lambda`, which is then bisected.
    fn project(&self, y: &[f64], w: &[f64]) -> Vec<f64> {
        let lower = |i: usize| if i == 0 { self.floor.max(0.0) } else { 0.0 };
        let inner = |lambda: f64| -> Vec<f64> {
            let z: Vec<f64> = (0..y.len())
                .map(|i| y[i] - lambda * self.levels[i] / w[i])
                .collect();
            project_box_simplex(&z, w, lower)
        };
        let energy = |p: &[f64]| -> f64 { p.iter().zip(&self.levels).map(|(a, b)| a * b).sum() };

        let p0 = inner(0.0);
        if energy(&p0) <= self.energy {
            return p0;
        }
        let mut hi = 1.0;
        let mut p_hi = inner(hi);
        while energy(&p_hi) > self.energy {
            hi *= 4.0;
            p_hi = inner(hi);
            assert!(hi < 1e300, "energy constraint infeasible");
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let p = inner(mid);
            if energy(&p) > self.energy {
                lo = mid;
            } else {
                hi = mid;
                p_hi = p;
            }
        }
        p_hi
    }
}

/// Minimizes `sum w_i (p_i - z_i)^2` over `{sum p = 1, p_i >= lower(i)}`.
/// The solution is `p_i = max(lower_i, z_i - nu / w_i)` for a scalar `nu`.
fn project_box_simplex(z: &[f64], w: &[f64], lower: impl Fn(usize) -> f64) -> Vec<f64> {
    let n = z.len();
    let lo: Vec<f64> = (0..n).map(&lower).collect();
    let slack = 1.0 - lo.iter().sum::<f64>();
    // coordinate i is above its bound iff nu < (z_i - lo_i) w_i
    let mut order: Vec<usize> = (0..n).collect();
    let bp: Vec<f64> = (0..n).map(|i| (z[i] - lo[i]) * w[i]).collect();
    order.sort_by(|&a, &b| bp[b].total_cmp(&bp[a]));
    let mut sum_excess = 0.0;
    let mut sum_inv_w = 0.0;
    let mut nu = f64::NAN;
    for (k, &i) in order.iter().enumerate() {
        sum_excess += z[i] - lo[i];
        sum_inv_w += 1.0 / w[i];
        let candidate = (sum_excess - slack) / sum_inv_w;
        let next = order.get(k + 1).map_or(f64::NEG_INFINITY, |&j| bp[j]);
        if candidate <= bp[i] && candidate >= next {
            nu = candidate;
            break;
        }
    }
    if nu.is_nan() {
        nu = (sum_excess - slack) / sum_inv_w;
    }
    (0..n)
        .map(|i| lo[i] + (z[i] - lo[i] - nu / w[i]).max(0.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn h(e: f64) -> f64 {
        crate::bounds::binary_entropy(e).unwrap()
    }

    #[test]
    fn box_simplex_projection() {
        let p = project_box_simplex(&[0.5, 0.5], &[1.0, 1.0], |_| 0.0);
        assert_eq!(p, vec![0.5, 0.5]);
        let p = project_box_simplex(&[2.0, 0.0, 0.0], &[1.0; 3], |_| 0.0);
        assert!((p[0] - 1.0).abs() < 1e-15 && p[1] == 0.0);
        let p = project_box_simplex(
            &[0.0, 1.0],
            &[1.0, 1.0],
            |i| if i == 0 { 0.75 } else { 0.0 },
        );
        assert!((p[0] - 0.75).abs() < 1e-15 && (p[1] - 0.25).abs() < 1e-15);
        // weighted: the heavy coordinate barely moves
        let p = project_box_simplex(&[0.5, 0.7], &[1e6, 1.0], |_| 0.0);
        assert!((p[0] - 0.5).abs() < 1e-6 && (p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn oscillator_sub_threshold() {
        let v = delta_oracle(&Spectrum::oscillator(), 1.0, 0.25, 200, 1e-10).unwrap();
        assert!((v - 2.0 * h(0.25)).abs() < 1e-5, "{v}");
    }

    #[test]
    fn oscillator_saturated() {
        let v = delta_oracle(&Spectrum::oscillator(), 1.0, 0.9, 200, 1e-10).unwrap();
        assert!((v - 2.0 * LN_2).abs() < 1e-5, "{v}");
    }

    #[test]
    fn zero_distance_forces_point_mass() {
        let r = delta_oracle_with(
            &Spectrum::oscillator(),
            1.0,
            0.0,
            50,
            1e-10,
            &OracleConfig::default(),
        )
        .unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.distribution[0], 1.0);
    }

    #[test]
    fn two_level_is_binary_entropy() {
        let s = Spectrum::finite(&[0.0, 1.0]).unwrap();
        let v = delta_oracle(&s, 0.3, 0.2, 200, 1e-10).unwrap();
        assert!((v - h(0.2)).abs() < 1e-8);
        let v = delta_oracle(&s, 0.3, 0.6, 200, 1e-10).unwrap();
        assert!((v - h(0.3)).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_input() {
        let s = Spectrum::oscillator();
        assert!(delta_oracle(&s, 0.0, 0.2, 10, 1e-10).is_err());
        assert!(delta_oracle(&s, 1.0, 1.2, 10, 1e-10).is_err());
        assert!(delta_oracle(&s, 1.0, 0.2, 0, 1e-10).is_err());
    }

    #[test]
    fn iteration_cap_is_reported() {
        let config = OracleConfig {
            restarts: 1,
            max_iterations: 1,
            seed: 1,
        };
        let r = delta_oracle_with(&Spectrum::oscillator(), 1.0, 0.5, 100, 1e-10, &config);
        assert!(matches!(r, Err(Error::NonConvergence(_))));
    }
}
