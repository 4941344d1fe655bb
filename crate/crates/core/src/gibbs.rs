//! Partition functions and maximum-entropy (Gibbs) states.
//!
//! All sums are taken relative to a reference level (the lowest level for
//! `beta >= 0`, the highest for `beta < 0` on finite spectra) so that every
//! term is at most one and nothing overflows. Affine tails are closed
//! analytically; other tails are cut where [`plan_truncation`] certifies the
//! remainder is below the requested tolerance.

use crate::error::{Error, Result};
use crate::spectrum::{plan_truncation, Spectrum, BETA_FLOOR};

/// Maximum number of bracket expansions before giving up.
const MAX_EXPANSIONS: usize = 200;
const MAX_BISECTIONS: usize = 4000;

/// Compensated (Neumaier) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Partition sums at a fixed inverse temperature.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PartitionSums {
    /// Level the exponents are measured from.
    pub reference: f64,
    /// `ln sum_i exp(-beta (h_i - reference))`
    pub log_z_rel: f64,
    /// `sum_i (h_i - reference) w_i` with Gibbs weights `w_i`.
    pub mean_rel: f64,
}

impl PartitionSums {
    pub fn log_z(&self, beta: f64) -> f64 {
        self.log_z_rel - beta * self.reference
    }

    pub fn mean(&self) -> f64 {
        self.reference + self.mean_rel
    }
}

pub(crate) fn partition_sums(s: &Spectrum, beta: f64, tol: f64) -> Result<PartitionSums> {
    if !beta.is_finite() {
        return Err(Error::DomainError(format!(
            "inverse temperature must be finite, got {beta}"
        )));
    }
    // closed-form affine tails need no truncation and hold for any beta > 0
    let floor = if s.exact_affine_tail().is_some() {
        f64::MIN_POSITIVE
    } else {
        BETA_FLOOR
    };
    if !s.is_finite() && beta < floor {
        return Err(Error::BetaTooSmall { beta, floor });
    }
    let reference = if beta >= 0.0 {
        s.min_level()
    } else {
        s.max_level().expect("negative beta only on finite spectra")
    };
    let mut z = CompensatedSum::default();
    let mut e = CompensatedSum::default();
    let mut add = |h: f64| {
        let d = h - reference;
        let t = (-beta * d).exp();
        z.add(t);
        e.add(d * t);
    };

    if let Some(tail) = s.exact_affine_tail() {
        s.head().iter().copied().for_each(&mut add);
        let n = s.head().len();
        let u = tail.at(n) - reference;
        let c = tail.slope;
        let x = (-beta * c).exp();
        let one_minus_x = -(-beta * c).exp_m1();
        let lead = (-beta * u).exp();
        z.add(lead / one_minus_x);
        e.add(lead * (u / one_minus_x + c * x / (one_minus_x * one_minus_x)));
    } else {
        let plan = plan_truncation(s, beta, tol)?;
        s.levels(plan.cutoff_index).for_each(&mut add);
    }

    // the reference term contributes exactly 1, so Z - 1 keeps full precision
    z.add(-1.0);
    let excess = z.value();
    Ok(PartitionSums {
        reference,
        log_z_rel: excess.ln_1p(),
        mean_rel: e.value() / (1.0 + excess),
    })
}

/// `ln sum_i exp(-beta h_i)`.
pub fn log_partition(s: &Spectrum, beta: f64, tol: f64) -> Result<f64> {
    Ok(partition_sums(s, beta, tol)?.log_z(beta))
}

/// Gibbs mean energy `sum_i h_i e^{-beta h_i} / sum_i e^{-beta h_i}`.
pub fn mean_energy(s: &Spectrum, beta: f64, tol: f64) -> Result<f64> {
    Ok(partition_sums(s, beta, tol)?.mean())
}

/// Solved Gibbs state at a target mean energy.
///
/// Classically the same object is the entropy-maximizing law
/// `w(x) = exp(lambda0 + lambda f(x))` with `lambda = -beta` and
/// `lambda0 = -log_z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsSolution {
    /// Inverse temperature. `+inf` marks the zero-temperature limit where
    /// the state is uniform on the lowest level.
    pub beta: f64,
    /// Natural-log partition value `ln sum_i exp(-beta h_i)`.
    pub log_z: f64,
    /// Mean energy of the returned state.
    pub mean_energy: f64,
    /// Entropy in nats, `beta E + ln Z`.
    pub entropy: f64,
    /// `|mean_energy - target|`. On capped solutions (see
    /// [`max_entropy_state`]) this is the unused energy budget.
    pub residual: f64,
    pub target_energy: f64,
    reference: f64,
    log_z_rel: f64,
}

impl GibbsSolution {
    pub fn lambda(&self) -> f64 {
        -self.beta
    }

    pub fn lambda0(&self) -> f64 {
        -self.log_z
    }

    /// `Z = exp(log_z)`, may overflow for strongly negative `beta`.
    pub fn partition(&self) -> f64 {
        self.log_z.exp()
    }

    /// True when the solution sits at non-positive inverse temperature.
    pub fn is_non_positive_beta(&self) -> bool {
        self.beta <= 0.0
    }

    /// Gibbs weight `exp(-beta h - ln Z)` of a level.
    pub fn weight(&self, h: f64) -> f64 {
        if self.beta == f64::INFINITY {
            return if h == self.reference {
                (-self.log_z_rel).exp()
            } else {
                0.0
            };
        }
        (-self.beta * (h - self.reference) - self.log_z_rel).exp()
    }

    /// Probability of the lowest level, `1/Z` on grounded spectra.
    pub fn lowest_weight(&self) -> f64 {
        (-self.log_z_rel).exp()
    }

    /// `1 - 1/Z` computed without cancellation.
    pub(crate) fn excited_weight(&self) -> f64 {
        -(-self.log_z_rel).exp_m1()
    }

    fn from_sums(beta: f64, sums: PartitionSums, target: f64) -> Self {
        let mean = sums.mean();
        GibbsSolution {
            beta,
            log_z: sums.log_z(beta),
            mean_energy: mean,
            // first-order exact in the energy mismatch
            entropy: beta * (target - sums.reference) + sums.log_z_rel,
            residual: (mean - target).abs(),
            target_energy: target,
            reference: sums.reference,
            log_z_rel: sums.log_z_rel,
        }
    }

    fn lowest_level_limit(s: &Spectrum, target: f64) -> Self {
        let h0 = s.min_level();
        let log_k = (s.lowest_multiplicity() as f64).ln();
        let log_z = match h0.partial_cmp(&0.0) {
            Some(std::cmp::Ordering::Equal) => log_k,
            Some(std::cmp::Ordering::Greater) => f64::NEG_INFINITY,
            _ => f64::INFINITY,
        };
        GibbsSolution {
            beta: f64::INFINITY,
            log_z,
            mean_energy: h0,
            entropy: log_k,
            residual: (target - h0).abs(),
            target_energy: target,
            reference: h0,
            log_z_rel: log_k,
        }
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::DomainError(format!(
            "tolerance must be positive, got {tol}"
        )))
    }
}

/// Solves `Tr H e^{-beta H} = E Tr e^{-beta H}` for `beta`.
///
/// Infinite spectra admit every `E` above the lowest level and always give
/// `beta > 0`. On finite spectra the equation is solved over all real
/// `beta`, so energies above the uniform average give `beta < 0`; energies
/// at or above the top level are unattainable.
///
/// The root is bracketed starting from `beta = 1/(E - h_0)`, expanding by a
/// factor of four, then bisected until the energy residual is below
/// `tol * max(1, E)` or the bracket can no longer shrink.
pub fn solve_beta(s: &Spectrum, energy: f64, tol: f64) -> Result<GibbsSolution> {
    check_tol(tol)?;
    let h0 = s.min_level();
    if !(energy.is_finite() && energy > h0) {
        return Err(Error::DomainError(format!(
            "target energy {energy} must exceed the lowest level {h0}"
        )));
    }
    let sum_tol = tol / 10.0;
    let stop = tol * energy.abs().max(1.0);

    if let Some(top) = s.max_level() {
        if energy >= top {
            return Err(Error::TargetEnergyUnattainable {
                energy,
                supremum: top,
            });
        }
        let at_zero = partition_sums(s, 0.0, sum_tol)?;
        if (at_zero.mean() - energy).abs() <= stop {
            return Ok(GibbsSolution::from_sums(0.0, at_zero, energy));
        }
        if energy > at_zero.mean() {
            // mean energy grows as gamma = -beta grows
            let root = bisect_decreasing(
                |gamma| Ok(-partition_sums(s, -gamma, sum_tol)?.mean()),
                -energy,
                1.0 / (top - energy),
                stop,
            )?;
            let beta = -root;
            return Ok(GibbsSolution::from_sums(
                beta,
                partition_sums(s, beta, sum_tol)?,
                energy,
            ));
        }
    }

    let beta = bisect_decreasing(
        |beta| Ok(partition_sums(s, beta, sum_tol)?.mean()),
        energy,
        1.0 / (energy - h0),
        stop,
    )?;
    Ok(GibbsSolution::from_sums(
        beta,
        partition_sums(s, beta, sum_tol)?,
        energy,
    ))
}

/// Root of `g(x) = target` for `g` strictly decreasing on `(0, inf)`.
fn bisect_decreasing<G>(g: G, target: f64, start: f64, stop: f64) -> Result<f64>
where
    G: Fn(f64) -> Result<f64>,
{
    let mut lo;
    let mut hi;
    let first = g(start)?;
    if (first - target).abs() <= stop {
        return Ok(start);
    }
    if first > target {
        lo = start;
        hi = start * 4.0;
        let mut expansions = 0;
        loop {
            let v = g(hi)?;
            if (v - target).abs() <= stop {
                return Ok(hi);
            }
            if v < target {
                break;
            }
            lo = hi;
            hi *= 4.0;
            expansions += 1;
            if expansions > MAX_EXPANSIONS || !hi.is_finite() {
                return Err(Error::NonConvergence(
                    "bracket expansion towards large beta".into(),
                ));
            }
        }
    } else {
        hi = start;
        lo = start / 4.0;
        let mut expansions = 0;
        loop {
            let v = g(lo)?;
            if (v - target).abs() <= stop {
                return Ok(lo);
            }
            if v > target {
                break;
            }
            hi = lo;
            lo /= 4.0;
            expansions += 1;
            if expansions > MAX_EXPANSIONS || lo == 0.0 {
                return Err(Error::NonConvergence(
                    "bracket expansion towards small beta".into(),
                ));
            }
        }
    }

    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let v = g(mid)?;
        if (v - target).abs() <= stop {
            return Ok(mid);
        }
        if v > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NonConvergence(
        "bisection iteration cap reached".into(),
    ))
}

/// Maximum-entropy state under the inequality constraint `Tr H rho <= E`.
///
/// Agrees with [`solve_beta`] whenever the Gibbs multiplier is positive.
/// On finite spectra, budgets at or above the uniform average are not
/// binding and the uniform state (`beta = 0`) is returned. A budget equal
/// to the lowest level gives the uniform state on that level.
pub fn max_entropy_state(s: &Spectrum, energy: f64, tol: f64) -> Result<GibbsSolution> {
    check_tol(tol)?;
    let h0 = s.min_level();
    if !energy.is_finite() || energy < h0 {
        return Err(Error::DomainError(format!(
            "energy budget {energy} is below the lowest level {h0}"
        )));
    }
    if energy == h0 {
        return Ok(GibbsSolution::lowest_level_limit(s, energy));
    }
    if s.is_finite() {
        let at_zero = partition_sums(s, 0.0, tol / 10.0)?;
        if energy >= at_zero.mean() {
            return Ok(GibbsSolution::from_sums(0.0, at_zero, at_zero.mean()).with_target(energy));
        }
    }
    solve_beta(s, energy, tol)
}

impl GibbsSolution {
    fn with_target(mut self, target: f64) -> Self {
        self.residual = (self.mean_energy - target).abs();
        self.target_energy = target;
        self
    }
}

/// `F_H(E)`: the largest entropy (nats) of a state with mean energy at most `E`.
pub fn gibbs_entropy(s: &Spectrum, energy: f64, tol: f64) -> Result<f64> {
    if !(energy > 0.0) {
        return Err(Error::DomainError(format!(
            "energy must be positive, got {energy}"
        )));
    }
    Ok(max_entropy_state(s, energy, tol)?.entropy)
}
