//! The optimal energy-constrained entropy bound.
//!
//! For a grounded spectrum `H`, an energy budget `E > 0` and a distance
//! `eps` (trace distance for states, total variation for distributions),
//!
//! ```text
//! kappa_E(eps) = eps * F+(E / eps) + h(eps)    if eps <= a(E)
//!              = F(E)                          if eps >= a(E)
//! ```
//!
//! where `F` is the maximum entropy at mean energy at most `E`, `F+` is the
//! same quantity for the spectrum with its lowest level removed, `h` is the
//! binary entropy and `a(E) = 1 - 1/Z(E)` is one minus the ground-level
//! weight of the Gibbs state. The same expression bounds `S(rho) - S(sigma)`
//! when only `rho` is energy constrained, `|S(rho) - S(sigma)|` when both
//! are, and the conditional entropy `H(X|Y)` given `P(X != Y) <= eps`.
//!
//! The two branches meet continuously at `a(E)`:
//! `a F+(E/a) + h(a) = F(E)` (see [`identity_residual`]).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gibbs::{max_entropy_state, GibbsSolution};
use crate::spectrum::Spectrum;

/// Relative slack when comparing an argument of `F+` with `h_1`.
const GAP_SLACK: f64 = 1e-9;

/// Absolute width at which the golden-section search stops.
const ARGMAX_WIDTH: f64 = 1e-9;

/// Binary entropy in nats, with `h(0) = h(1) = 0`.
pub fn binary_entropy(eps: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::DomainError(format!(
            "binary entropy needs eps in [0, 1], got {eps}"
        )));
    }
    Ok(binary_entropy_unchecked(eps))
}

pub(crate) fn binary_entropy_unchecked(eps: f64) -> f64 {
    eta(eps) + eta(1.0 - eps)
}

/// `-x ln x` with `eta(0) = 0`.
pub(crate) fn eta(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    SubThreshold,
    Saturated,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::SubThreshold => "SubThreshold",
            Branch::Saturated => "Saturated",
        }
    }
}

/// Value of `kappa_E(eps)` with the data that produced it. Entropies in nats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundResult {
    pub value: f64,
    pub branch: Branch,
    pub threshold_a: f64,
    pub epsilon: f64,
    pub energy: f64,
    /// `F(E)`, the saturation level.
    pub capacity: f64,
    /// `E / eps` when the sub-threshold branch was used with `eps > 0`.
    pub f_plus_argument: Option<f64>,
}

/// Precomputed pieces of the bound for one spectrum and energy budget.
///
/// Evaluating `kappa` for many distances at fixed `(H, E)` reuses the Gibbs
/// solution, which is the common case in sweeps and sampling.
#[derive(Debug, Clone)]
pub struct Bound {
    shifted: Spectrum,
    energy: f64,
    tol: f64,
    gap: f64,
    gibbs: GibbsSolution,
    threshold: f64,
}

impl Bound {
    pub fn new(s: &Spectrum, energy: f64, tol: f64) -> Result<Self> {
        if !(energy > 0.0 && energy.is_finite()) {
            return Err(Error::DomainError(format!(
                "energy must be positive, got {energy}"
            )));
        }
        if s.min_level() != 0.0 {
            return Err(Error::DomainError("bound needs a grounded spectrum".into()));
        }
        let shifted = s.shift_plus()?;
        let gibbs = max_entropy_state(s, energy, tol)?;
        Ok(Bound {
            gap: shifted.min_level(),
            shifted,
            energy,
            tol,
            threshold: gibbs.excited_weight(),
            gibbs,
        })
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// `a(E) = 1 - 1/Z(E)`.
    pub fn threshold_a(&self) -> f64 {
        self.threshold
    }

    /// `F(E)` in nats.
    pub fn capacity(&self) -> f64 {
        self.gibbs.entropy
    }

    pub fn gibbs(&self) -> &GibbsSolution {
        &self.gibbs
    }

    /// `h_1`, the lowest level of the shifted spectrum.
    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn shifted_spectrum(&self) -> &Spectrum {
        &self.shifted
    }

    /// Upper end `min(1, E/h_1)` of the profile's domain.
    pub fn delta_max(&self) -> f64 {
        if self.gap > 0.0 {
            (self.energy / self.gap).min(1.0)
        } else {
            1.0
        }
    }

    /// Maximum-entropy state of the shifted spectrum at budget `x`.
    pub fn shifted_state(&self, x: f64) -> Result<GibbsSolution> {
        if !(x >= self.gap * (1.0 - GAP_SLACK)) {
            return Err(Error::ArgumentBelowGap {
                argument: x,
                gap: self.gap,
            });
        }
        max_entropy_state(&self.shifted, x.max(self.gap), self.tol)
    }

    /// `F+(x)`: maximum entropy of the shifted spectrum at mean energy at most `x`.
    pub fn f_plus(&self, x: f64) -> Result<f64> {
        Ok(self.shifted_state(x)?.entropy)
    }

    pub fn kappa(&self, eps: f64) -> Result<BoundResult> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::DomainError(format!(
                "eps must lie in [0, 1], got {eps}"
            )));
        }
        let mut out = BoundResult {
            value: 0.0,
            branch: Branch::SubThreshold,
            threshold_a: self.threshold,
            epsilon: eps,
            energy: self.energy,
            capacity: self.capacity(),
            f_plus_argument: None,
        };
        if eps == 0.0 {
            return Ok(out);
        }
        if eps <= self.threshold {
            let ratio = self.energy / eps;
            if ratio < self.gap * (1.0 - GAP_SLACK) {
                return Err(Error::InternalGapViolation {
                    ratio,
                    gap: self.gap,
                });
            }
            out.value = eps * self.f_plus(ratio)? + binary_entropy_unchecked(eps);
            out.f_plus_argument = Some(ratio);
        } else {
            out.value = self.capacity();
            out.branch = Branch::Saturated;
        }
        Ok(out)
    }

    /// `G(delta) = delta F+(E/delta) + h(delta)` on `0 < delta <= min(1, E/h_1)`.
    pub fn g_profile(&self, delta: f64) -> Result<f64> {
        let hi = self.delta_max();
        if !(delta > 0.0 && delta <= hi * (1.0 + GAP_SLACK)) {
            return Err(Error::DomainError(format!(
                "profile argument {delta} outside (0, {hi}]"
            )));
        }
        Ok(delta * self.f_plus(self.energy / delta)? + binary_entropy_unchecked(delta))
    }

    /// Location of the maximum of [`Bound::g_profile`] by golden-section
    /// search on `[margin, min(1, E/h_1) - margin]`. Uses only concavity of
    /// the profile, never the threshold formula.
    pub fn argmax_g(&self, margin: f64) -> Result<f64> {
        let mut lo = margin;
        let mut hi = self.delta_max() - margin;
        if !(hi > lo) {
            return Err(Error::DomainError(format!(
                "empty search bracket [{lo}, {hi}]"
            )));
        }
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = hi - inv_phi * (hi - lo);
        let mut x2 = lo + inv_phi * (hi - lo);
        let mut f1 = self.g_profile(x1)?;
        let mut f2 = self.g_profile(x2)?;
        while hi - lo > ARGMAX_WIDTH {
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = self.g_profile(x2)?;
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = self.g_profile(x1)?;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// `|a F+(E/a) + h(a) - F(E)|`.
    pub fn identity_residual(&self) -> Result<f64> {
        let a = self.threshold;
        let lhs = a * self.f_plus(self.energy / a)? + binary_entropy_unchecked(a);
        Ok((lhs - self.capacity()).abs())
    }
}

/// `a(E) = 1 - 1/Z(E)`, strictly inside `(0, 1)`.
pub fn threshold_a(s: &Spectrum, energy: f64, tol: f64) -> Result<f64> {
    Ok(Bound::new(s, energy, tol)?.threshold_a())
}

/// `F(E)`; see [`crate::gibbs::gibbs_entropy`].
pub fn capacity_f(s: &Spectrum, energy: f64, tol: f64) -> Result<f64> {
    crate::gibbs::gibbs_entropy(s, energy, tol)
}

/// `F+(x)`, the maximum entropy of the spectrum with its lowest level
/// removed (not re-grounded), for `x >= h_1`. At `x = h_1` the state is
/// uniform on the levels equal to `h_1`.
pub fn capacity_f_plus(s: &Spectrum, x: f64, tol: f64) -> Result<f64> {
    let shifted = s.shift_plus()?;
    let gap = shifted.min_level();
    if !(x >= gap * (1.0 - GAP_SLACK)) {
        return Err(Error::ArgumentBelowGap { argument: x, gap });
    }
    Ok(max_entropy_state(&shifted, x.max(gap), tol)?.entropy)
}

pub fn kappa(s: &Spectrum, energy: f64, eps: f64, tol: f64) -> Result<BoundResult> {
    Bound::new(s, energy, tol)?.kappa(eps)
}

pub fn g_profile(s: &Spectrum, energy: f64, delta: f64, tol: f64) -> Result<f64> {
    Bound::new(s, energy, tol)?.g_profile(delta)
}

/// Maximizer of the profile, searched on `[tol, min(1, E/h_1) - tol]`.
pub fn argmax_g(s: &Spectrum, energy: f64, tol: f64) -> Result<f64> {
    Bound::new(s, energy, tol)?.argmax_g(tol)
}

pub fn identity_residual(s: &Spectrum, energy: f64, tol: f64) -> Result<f64> {
    Bound::new(s, energy, tol)?.identity_residual()
}

/// Closed forms for the oscillator `h_i = i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscillatorReference {
    /// `g(E) = (E+1) ln(E+1) - E ln E`
    pub g: f64,
    /// `Z = 1 + E`
    pub z: f64,
    /// `a = E / (1 + E)`
    pub a: f64,
    /// `F+(E/eps) = E h(eps/E)` / eps, present when `0 < eps <= a`.
    pub f_plus: Option<f64>,
    pub kappa: f64,
}

/// `F+(x) = x h(1/x)` for the oscillator, defined for `x >= 1`.
pub fn oscillator_f_plus(x: f64) -> Option<f64> {
    (x >= 1.0).then(|| x * binary_entropy_unchecked(1.0 / x))
}

pub fn oscillator_reference(energy: f64, eps: f64) -> Result<OscillatorReference> {
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
    let g = (energy + 1.0) * energy.ln_1p() - energy * energy.ln();
    let a = energy / (1.0 + energy);
    let (f_plus, kappa) = if eps == 0.0 {
        (None, 0.0)
    } else if eps <= a {
        let f_plus = oscillator_f_plus(energy / eps);
        (
            f_plus,
            energy * binary_entropy_unchecked(eps / energy) + binary_entropy_unchecked(eps),
        )
    } else {
        (None, g)
    };
    Ok(OscillatorReference {
        g,
        z: 1.0 + energy,
        a,
        f_plus,
        kappa,
    })
}
