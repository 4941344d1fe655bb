//! Distributions that attain the bound, and the information measures used to
//! check them.
//!
//! A [`Distribution`] stores a finite window of probabilities starting at
//! symbol `support_offset`. Symbols index levels of a spectrum, so the
//! maximum-entropy law of the shifted spectrum `H+` has offset 1. Mass
//! beyond the window is recorded in `certified_tail`, bounded by the
//! truncation plan that produced it.

use std::fmt::Write as _;

use serde::Serialize;

use crate::bounds::{binary_entropy_unchecked, eta, Bound, Branch};
use crate::error::{Error, Result};
use crate::gibbs::{max_entropy_state, CompensatedSum, GibbsSolution};
use crate::spectrum::{plan_truncation, Spectrum};

/// Truncation tolerance used when materializing a Gibbs law.
const WITNESS_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution {
    pub support_offset: usize,
    pub probs: Vec<f64>,
    pub certified_tail: f64,
}

impl Distribution {
    pub fn point_mass(symbol: usize) -> Self {
        Distribution {
            support_offset: symbol,
            probs: vec![1.0],
            certified_tail: 0.0,
        }
    }

    /// Finite law on symbols `0..probs.len()`. Entries must be nonnegative
    /// and sum to one within `1e-12`.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        let d = Distribution {
            support_offset: 0,
            probs,
            certified_tail: 0.0,
        };
        d.check()?;
        Ok(d)
    }

    pub fn check(&self) -> Result<()> {
        if let Some(p) = self.probs.iter().find(|p| !(**p >= 0.0 && p.is_finite())) {
            return Err(Error::InvalidState(format!(
                "probability {p} is not a nonnegative number"
            )));
        }
        let total = self.total_mass();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!(
                "total mass {total} differs from one"
            )));
        }
        Ok(())
    }

    /// Represented mass plus the certified tail.
    pub fn total_mass(&self) -> f64 {
        self.probs
            .iter()
            .copied()
            .collect::<CompensatedSum>()
            .value()
            + self.certified_tail
    }

    /// Probability of `symbol`; zero outside the represented window.
    pub fn prob(&self, symbol: usize) -> f64 {
        symbol
            .checked_sub(self.support_offset)
            .and_then(|k| self.probs.get(k).copied())
            .unwrap_or(0.0)
    }

    /// One past the last represented symbol.
    pub fn support_end(&self) -> usize {
        self.support_offset + self.probs.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(k, &p)| (k + self.support_offset, p))
    }

    /// `index,probability` rows for every represented symbol.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,probability\n");
        for (i, p) in self.iter() {
            let _ = writeln!(out, "{i},{p:e}");
        }
        out
    }
}

/// Joint law of `(X, Y)` on `rows x cols`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointDistribution {
    pub rows: usize,
    pub cols: usize,
    pub probs: Vec<f64>,
    pub certified_tail: f64,
}

impl JointDistribution {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i < self.rows && j < self.cols {
            self.probs[i * self.cols + j]
        } else {
            0.0
        }
    }

    /// Law of `X`. The certified tail lies in column 0 for the witnesses built here.
    pub fn row_marginal(&self) -> Distribution {
        let probs = (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| self.get(i, j))
                    .collect::<CompensatedSum>()
                    .value()
            })
            .collect();
        Distribution {
            support_offset: 0,
            probs,
            certified_tail: self.certified_tail,
        }
    }

    /// Law of `Y`, with the tail mass assigned to column 0.
    pub fn col_marginal(&self) -> Distribution {
        let mut probs: Vec<f64> = (0..self.cols)
            .map(|j| {
                (0..self.rows)
                    .map(|i| self.get(i, j))
                    .collect::<CompensatedSum>()
                    .value()
            })
            .collect();
        if let Some(p) = probs.first_mut() {
            *p += self.certified_tail;
        }
        Distribution {
            support_offset: 0,
            probs,
            certified_tail: 0.0,
        }
    }

    /// `P(X != Y)` over the represented window plus the tail.
    pub fn mismatch_probability(&self) -> f64 {
        let mut s = CompensatedSum::default();
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j {
                    s.add(self.get(i, j));
                }
            }
        }
        s.add(self.certified_tail);
        s.value()
    }
}

/// Materializes the Gibbs law of `s` from a solved state.
fn gibbs_distribution(s: &Spectrum, state: &GibbsSolution, offset: usize) -> Result<Distribution> {
    let n = if state.beta == f64::INFINITY {
        s.lowest_multiplicity()
    } else if let Some(len) = s.len() {
        len
    } else {
        plan_truncation(s, state.beta, WITNESS_TOL)?.cutoff_index
    };
    let probs: Vec<f64> = s.levels(n).map(|h| state.weight(h)).collect();
    let mass = probs.iter().copied().collect::<CompensatedSum>().value();
    let certified_tail = (1.0 - mass).max(0.0);
    Ok(Distribution {
        support_offset: offset,
        probs,
        certified_tail,
    })
}

/// `w_E`: the maximum-entropy law on the levels of `s` at mean at most `E`.
pub fn max_entropy_distribution(s: &Spectrum, energy: f64, tol: f64) -> Result<Distribution> {
    let state = max_entropy_state(s, energy, tol)?;
    gibbs_distribution(s, &state, 0)
}

/// `w~_x`: the maximum-entropy law on the levels of `H+` at mean at most
/// `x`, indexed by the original symbols (offset 1).
pub fn shifted_max_entropy_distribution(s: &Spectrum, x: f64, tol: f64) -> Result<Distribution> {
    let shifted = s.shift_plus()?;
    let gap = shifted.min_level();
    if !(x >= gap * (1.0 - 1e-9)) {
        return Err(Error::ArgumentBelowGap { argument: x, gap });
    }
    let state = max_entropy_state(&shifted, x.max(gap), tol)?;
    gibbs_distribution(&shifted, &state, 1)
}

/// The extremal pair `(X_eps, Y_eps)` with the bound data it realizes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremalPair {
    pub x: Distribution,
    pub y: Distribution,
    pub branch: Branch,
    pub threshold_a: f64,
    /// `min(eps, a)`, the distance actually realized.
    pub eps_effective: f64,
}

fn mix_with_ground(eps: f64, tilde: Distribution) -> Distribution {
    let mut probs = Vec::with_capacity(tilde.probs.len() + 1);
    probs.push(1.0 - eps);
    probs.extend(tilde.probs.iter().map(|p| eps * p));
    Distribution {
        support_offset: 0,
        probs,
        certified_tail: eps * tilde.certified_tail,
    }
}

/// Below the threshold `X` puts `1 - eps` on level 0 and spreads `eps` as
/// `w~_{E/eps}` over the excited levels; above it `X = w_E`. In both cases
/// `Y` is the point mass on level 0.
pub fn extremal_pair(s: &Spectrum, energy: f64, eps: f64, tol: f64) -> Result<ExtremalPair> {
    let bound = Bound::new(s, energy, tol)?;
    let r = bound.kappa(eps)?;
    let y = Distribution::point_mass(0);
    let (x, eps_effective) = match (r.branch, r.f_plus_argument) {
        (Branch::SubThreshold, None) => (Distribution::point_mass(0), 0.0),
        (Branch::SubThreshold, Some(ratio)) => {
            let state = bound.shifted_state(ratio)?;
            let tilde = gibbs_distribution(bound.shifted_spectrum(), &state, 1)?;
            (mix_with_ground(eps, tilde), eps)
        }
        (Branch::Saturated, _) => (
            gibbs_distribution(s, bound.gibbs(), 0)?,
            bound.threshold_a(),
        ),
    };
    Ok(ExtremalPair {
        x,
        y,
        branch: r.branch,
        threshold_a: r.threshold_a,
        eps_effective,
    })
}

/// Joint law with `p(0,0) = 1 - eps'` and `p(n,0) = eps' w~_{E/eps'}(n-1)`,
/// where `eps' = min(eps, a)`.
pub fn extremal_joint(s: &Spectrum, energy: f64, eps: f64, tol: f64) -> Result<JointDistribution> {
    let bound = Bound::new(s, energy, tol)?;
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::DomainError(format!(
            "eps must lie in [0, 1], got {eps}"
        )));
    }
    let eps = eps.min(bound.threshold_a());
    if eps == 0.0 {
        return Ok(JointDistribution {
            rows: 1,
            cols: 1,
            probs: vec![1.0],
            certified_tail: 0.0,
        });
    }
    let state = bound.shifted_state(energy / eps)?;
    let tilde = gibbs_distribution(bound.shifted_spectrum(), &state, 1)?;
    let x = mix_with_ground(eps, tilde);
    Ok(JointDistribution {
        rows: x.probs.len(),
        cols: 1,
        probs: x.probs,
        certified_tail: x.certified_tail,
    })
}

/// Shannon entropy in nats of the represented window.
pub fn shannon_entropy(d: &Distribution) -> f64 {
    d.probs
        .iter()
        .map(|&p| eta(p))
        .collect::<CompensatedSum>()
        .value()
}

/// Entropy with an error bar `eta(certified_tail)` for the omitted mass.
pub fn shannon_entropy_with_error(d: &Distribution) -> (f64, f64) {
    (shannon_entropy(d), eta(d.certified_tail))
}

/// `H(X|Y) = -sum p(i,j) ln(p(i,j) / p_Y(j))`.
pub fn conditional_entropy(j: &JointDistribution) -> f64 {
    let py = j.col_marginal();
    let mut s = CompensatedSum::default();
    for r in 0..j.rows {
        for c in 0..j.cols {
            let p = j.get(r, c);
            if p > 0.0 {
                s.add(-p * (p / py.prob(c)).ln());
            }
        }
    }
    s.value()
}

/// Total variation `(1/2) sum |p - q|` over the union of represented symbols.
pub fn tv_distance(p: &Distribution, q: &Distribution) -> f64 {
    tv_distance_with_error(p, q).0
}

/// Total variation with an error bar of half the combined tails.
pub fn tv_distance_with_error(p: &Distribution, q: &Distribution) -> (f64, f64) {
    let lo = p.support_offset.min(q.support_offset);
    let hi = p.support_end().max(q.support_end());
    let s: CompensatedSum = (lo..hi).map(|i| (p.prob(i) - q.prob(i)).abs()).collect();
    (
        (0.5 * s.value()).min(1.0),
        0.5 * (p.certified_tail + q.certified_tail),
    )
}

/// `sum_x h_x p(x)` over the represented window.
pub fn expected_f(d: &Distribution, s: &Spectrum) -> Result<f64> {
    Ok(expected_f_with_error(d, s)?.0)
}

/// Expected level with an error bar for the tail. The omitted mass lies on
/// levels at or above the first unrepresented one; the bar uses that level
/// times the tail mass, which is exact to first order for the geometric
/// tails produced by the truncation plans.
pub fn expected_f_with_error(d: &Distribution, s: &Spectrum) -> Result<(f64, f64)> {
    if let Some(len) = s.len() {
        if d.support_end() > len {
            return Err(Error::IncompatibleSupport {
                support: d.support_end(),
                levels: len,
            });
        }
    }
    let mut sum = CompensatedSum::default();
    for (i, p) in d.iter() {
        if p > 0.0 {
            sum.add(p * s.level(i).expect("support checked"));
        }
    }
    let next = s.level(d.support_end()).unwrap_or(0.0);
    Ok((sum.value(), d.certified_tail * next.max(0.0)))
}

/// Entropy of `X` minus entropy of `Y` for an extremal pair.
pub fn entropy_gap(pair: &ExtremalPair) -> f64 {
    shannon_entropy(&pair.x) - shannon_entropy(&pair.y)
}

/// `h(eps) + eps H(w~)` evaluated directly, for cross-checking joint witnesses.
pub fn fano_value(eps: f64, tilde: &Distribution) -> f64 {
    binary_entropy_unchecked(eps) + eps * shannon_entropy(tilde)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::kappa;
    use std::f64::consts::LN_2;

    const TOL: f64 = 1e-12;

    fn h(e: f64) -> f64 {
        crate::bounds::binary_entropy(e).unwrap()
    }

    fn osc() -> Spectrum {
        Spectrum::oscillator()
    }

    #[test]
    fn geometric_law_on_oscillator() {
        let d = max_entropy_distribution(&osc(), 1.0, TOL).unwrap();
        for k in 0..20 {
            assert!((d.prob(k) / 0.5f64.powi(k as i32 + 1) - 1.0).abs() < 1e-10);
        }
        assert!((shannon_entropy(&d) - 2.0 * LN_2).abs() < 1e-12);
        assert!((expected_f(&d, &osc()).unwrap() - 1.0).abs() < 1e-12);
        assert!((d.total_mass() - 1.0).abs() < 1e-12);
        assert!(d.certified_tail < 1e-13);
    }

    #[test]
    fn two_level_law() {
        let s = Spectrum::finite(&[0.0, 1.0]).unwrap();
        let d = max_entropy_distribution(&s, 0.25, TOL).unwrap();
        assert_eq!(d.probs.len(), 2);
        assert!((d.probs[0] - 0.75).abs() < 1e-12);
        assert!((d.probs[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn low_energy_ground_weight() {
        let d = max_entropy_distribution(&osc(), 0.01, TOL).unwrap();
        assert!((d.prob(0) - 1.0 / 1.01).abs() < 1e-12);
    }

    #[test]
    fn shifted_law_has_offset_one() {
        let d = shifted_max_entropy_distribution(&osc(), 4.0, TOL).unwrap();
        assert_eq!(d.support_offset, 1);
        assert_eq!(d.prob(0), 0.0);
        // geometric on {1, 2, ...} with mean 4: p(n) = (1/4)(3/4)^(n-1)
        assert!((d.prob(1) - 0.25).abs() < 1e-12);
        assert!((d.prob(3) - 0.25 * 0.5625).abs() < 1e-12);
        assert!((expected_f(&d, &osc()).unwrap() - 4.0).abs() < 1e-10);
    }

    #[test]
    fn pair_below_threshold() {
        let p = extremal_pair(&osc(), 1.0, 0.25, TOL).unwrap();
        assert_eq!(p.branch, Branch::SubThreshold);
        assert!((entropy_gap(&p) - 2.0 * h(0.25)).abs() < 1e-10);
        assert!((tv_distance(&p.x, &p.y) - 0.25).abs() < 1e-12);
        assert!((expected_f(&p.x, &osc()).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn pair_above_threshold() {
        let p = extremal_pair(&osc(), 1.0, 0.9, TOL).unwrap();
        assert_eq!(p.branch, Branch::Saturated);
        assert!((shannon_entropy(&p.x) - 2.0 * LN_2).abs() < 1e-12);
        assert!((tv_distance(&p.x, &p.y) - 0.5).abs() < 1e-12);
        assert_eq!(p.eps_effective, p.threshold_a);
    }

    #[test]
    fn pair_at_zero_distance() {
        let p = extremal_pair(&osc(), 1.0, 0.0, TOL).unwrap();
        assert_eq!(p.x, Distribution::point_mass(0));
        assert_eq!(p.y, Distribution::point_mass(0));
        assert_eq!(entropy_gap(&p), 0.0);
    }

    #[test]
    fn pair_energy_example() {
        let p = extremal_pair(&osc(), 2.0, 0.5, TOL).unwrap();
        assert!((expected_f(&p.x, &osc()).unwrap() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn joint_examples() {
        let j = extremal_joint(&osc(), 1.0, 0.25, TOL).unwrap();
        assert!((conditional_entropy(&j) - 1.1246702892376166).abs() < 1e-10);
        assert!((j.mismatch_probability() - 0.25).abs() < 1e-15);

        let j = extremal_joint(&osc(), 1.0, 1.0, TOL).unwrap();
        assert!((conditional_entropy(&j) - 2.0 * LN_2).abs() < 1e-10);
        assert!((j.mismatch_probability() - 0.5).abs() < 1e-12);

        let j = extremal_joint(&osc(), 1.0, 0.0, TOL).unwrap();
        assert_eq!(j.probs, vec![1.0]);
        assert_eq!(conditional_entropy(&j), 0.0);
    }

    #[test]
    fn joint_marginals_match_pair() {
        let s = Spectrum::finite(&[0.0, 1.0, 5.0]).unwrap();
        for &(e, eps) in &[(0.5, 0.2), (1.0, 0.1), (0.7, 0.9)] {
            let j = extremal_joint(&s, e, eps, TOL).unwrap();
            let p = extremal_pair(&s, e, eps, TOL).unwrap();
            if p.branch == Branch::SubThreshold {
                assert_eq!(j.row_marginal(), p.x);
                assert_eq!(j.col_marginal(), p.y);
            }
            let k = kappa(&s, e, eps, TOL).unwrap().value;
            assert!((conditional_entropy(&j) - k).abs() < 1e-9);
        }
    }

    #[test]
    fn information_measures_trivial_cases() {
        assert_eq!(shannon_entropy(&Distribution::point_mass(3)), 0.0);
        let u = Distribution::from_probs(vec![0.5, 0.5]).unwrap();
        assert!((shannon_entropy(&u) - LN_2).abs() < 1e-16);
        assert_eq!(tv_distance(&u, &u), 0.0);
        assert_eq!(
            tv_distance(&Distribution::point_mass(0), &Distribution::point_mass(1)),
            1.0
        );

        let indep = JointDistribution {
            rows: 2,
            cols: 2,
            probs: vec![0.25; 4],
            certified_tail: 0.0,
        };
        assert!((conditional_entropy(&indep) - LN_2).abs() < 1e-16);
        let point = JointDistribution {
            rows: 1,
            cols: 1,
            probs: vec![1.0],
            certified_tail: 0.0,
        };
        assert_eq!(conditional_entropy(&point), 0.0);
    }

    #[test]
    fn expected_f_rejects_support_past_finite_spectrum() {
        let s = Spectrum::finite(&[0.0, 1.0]).unwrap();
        let d = Distribution::point_mass(2);
        assert!(matches!(
            expected_f(&d, &s),
            Err(Error::IncompatibleSupport { .. })
        ));
        assert_eq!(expected_f(&Distribution::point_mass(0), &s).unwrap(), 0.0);
    }

    #[test]
    fn from_probs_validates() {
        assert!(Distribution::from_probs(vec![0.5, 0.6]).is_err());
        assert!(Distribution::from_probs(vec![-0.1, 1.1]).is_err());
    }

    #[test]
    fn csv_output() {
        let d = Distribution::from_probs(vec![0.75, 0.25]).unwrap();
        assert_eq!(d.to_csv(), "index,probability\n0,7.5e-1\n1,2.5e-1\n");
    }
}
