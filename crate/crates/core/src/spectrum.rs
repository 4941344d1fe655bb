//! Constraint spectra.
//!
//! A [`Spectrum`] is the non-decreasing level sequence `h_0 <= h_1 <= ...`
//! of a Hamiltonian, or equivalently the values `f(0), f(1), ...` of a
//! classical constraint function. Spectra are either finite or an explicit
//! head followed by a closed-form tail rule. Every tail rule carries an
//! affine lower bound with positive slope, which is what makes the partition
//! sums certifiably finite for every positive inverse temperature.
//!
//! Ingestion subtracts the minimum level so that `h_0 = 0`; the subtracted
//! amount is kept in [`Spectrum::shift`].

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest inverse temperature accepted on infinite spectra.
pub const BETA_FLOOR: f64 = 1e-12;

/// Upper limit on the number of explicitly summed terms of a tail.
pub const MAX_TERMS: u64 = 50_000_000;

/// Number of positions past the head on which a user-supplied tail rule is
/// checked against its declared affine bound.
const USER_RULE_CHECK_WINDOW: usize = 4096;

/// Closed-form rule for the levels beyond the explicit head.
///
/// Rules are evaluated at the absolute index `j` of the level in the
/// spectrum as originally supplied (before re-grounding).
#[derive(Clone)]
pub enum Generator {
    /// `h_j = slope * j + offset`
    Linear { slope: f64, offset: f64 },
    /// `h_j = scale * j^exponent`, `exponent >= 1`
    Power { exponent: f64, scale: f64 },
    /// Arbitrary non-decreasing rule with a declared lower bound
    /// `rule(j) >= slope * j + offset`, `slope > 0`.
    UserAffineBound {
        rule: Arc<dyn Fn(usize) -> f64 + Send + Sync>,
        slope: f64,
        offset: f64,
    },
}

impl Generator {
    fn raw(&self, j: usize) -> f64 {
        let x = j as f64;
        match self {
            Generator::Linear { slope, offset } => slope * x + offset,
            Generator::Power { exponent, scale } => scale * x.powf(*exponent),
            Generator::UserAffineBound { rule, .. } => rule(j),
        }
    }

    /// `(slope, offset)` of an affine function below `raw` for all `j >= 0`.
    fn raw_affine_bound(&self) -> (f64, f64) {
        match self {
            Generator::Linear { slope, offset } => (*slope, *offset),
            // j^p >= j on the non-negative integers when p >= 1
            Generator::Power { scale, .. } => (*scale, 0.0),
            Generator::UserAffineBound { slope, offset, .. } => (*slope, *offset),
        }
    }

    fn is_affine(&self) -> bool {
        match self {
            Generator::Linear { .. } => true,
            Generator::Power { exponent, .. } => *exponent == 1.0,
            Generator::UserAffineBound { .. } => false,
        }
    }

    fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::NonMonotoneGenerator(msg));
        match self {
            Generator::Linear { slope, offset } => {
                if !(slope.is_finite() && *slope > 0.0 && offset.is_finite()) {
                    return bad(format!("linear rule needs finite slope > 0, got {slope}"));
                }
            }
            Generator::Power { exponent, scale } => {
                if !(exponent.is_finite() && *exponent >= 1.0) {
                    return bad(format!("power rule needs exponent >= 1, got {exponent}"));
                }
                if !(scale.is_finite() && *scale > 0.0) {
                    return bad(format!("power rule needs scale > 0, got {scale}"));
                }
            }
            Generator::UserAffineBound { slope, offset, .. } => {
                if !(slope.is_finite() && *slope > 0.0 && offset.is_finite()) {
                    return bad(format!("affine bound needs finite slope > 0, got {slope}"));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Linear { slope, offset } => f
                .debug_struct("Linear")
                .field("slope", slope)
                .field("offset", offset)
                .finish(),
            Generator::Power { exponent, scale } => f
                .debug_struct("Power")
                .field("exponent", exponent)
                .field("scale", scale)
                .finish(),
            Generator::UserAffineBound { slope, offset, .. } => f
                .debug_struct("UserAffineBound")
                .field("slope", slope)
                .field("offset", offset)
                .finish_non_exhaustive(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    ExplicitFinite,
    ExplicitHeadWithGenerator,
}

#[derive(Debug, Clone)]
struct Tail {
    generator: Generator,
    /// Added to a position to obtain the generator's absolute index.
    index_offset: usize,
}

/// Validated level sequence. Immutable; cheap to clone.
#[derive(Debug, Clone)]
pub struct Spectrum {
    head: Vec<f64>,
    tail: Option<Tail>,
    shift: f64,
    ground_multiplicity: usize,
    name: Option<String>,
}

/// Affine function `slope * i + intercept` of the position `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineBound {
    pub slope: f64,
    pub intercept: f64,
}

impl AffineBound {
    pub fn at(&self, i: usize) -> f64 {
        self.slope * i as f64 + self.intercept
    }
}

impl Spectrum {
    /// Validates raw levels (plus an optional tail rule) and re-grounds them.
    pub fn validate(raw_levels: &[f64], generator: Option<Generator>) -> Result<Self> {
        if raw_levels.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        if let Some((index, &value)) = raw_levels.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteLevel { index, value });
        }
        let mut head = raw_levels.to_vec();
        head.sort_by(f64::total_cmp);

        if let Some(generator) = &generator {
            generator.check()?;
            let n = head.len();
            let last = head[n - 1];
            let first_tail = generator.raw(n);
            if !(first_tail.is_finite() && first_tail >= last) {
                return Err(Error::NonMonotoneGenerator(format!(
                    "tail starts at {first_tail} below the last explicit level {last}"
                )));
            }
            if let Generator::UserAffineBound { slope, offset, .. } = generator {
                let mut prev = first_tail;
                for j in n..n + USER_RULE_CHECK_WINDOW {
                    let v = generator.raw(j);
                    if !v.is_finite() || v < prev || v < slope * j as f64 + offset {
                        return Err(Error::NonMonotoneGenerator(format!(
                            "rule value {v} at index {j} is decreasing or below its affine bound"
                        )));
                    }
                    prev = v;
                }
            }
        }

        let shift = head[0];
        for h in &mut head {
            *h -= shift;
        }
        let ground_multiplicity = head.iter().take_while(|&&h| h == 0.0).count();
        Ok(Spectrum {
            head,
            tail: generator.map(|generator| Tail {
                generator,
                index_offset: 0,
            }),
            shift,
            ground_multiplicity,
            name: None,
        })
    }

    pub fn finite(levels: &[f64]) -> Result<Self> {
        Self::validate(levels, None)
    }

    /// The number operator of a single oscillator mode, `h_i = i`.
    pub fn oscillator() -> Self {
        Self::validate(
            &[0.0, 1.0, 2.0, 3.0],
            Some(Generator::Linear {
                slope: 1.0,
                offset: 0.0,
            }),
        )
        .expect("oscillator spectrum is valid")
        .with_name("oscillator")
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn kind(&self) -> SpectrumKind {
        if self.tail.is_some() {
            SpectrumKind::ExplicitHeadWithGenerator
        } else {
            SpectrumKind::ExplicitFinite
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tail.is_none()
    }

    /// Number of levels, `None` for infinite spectra.
    pub fn len(&self) -> Option<usize> {
        if self.tail.is_some() {
            None
        } else {
            Some(self.head.len())
        }
    }

    pub fn is_empty(&self) -> bool {
        self.head.is_empty() && self.tail.is_none()
    }

    /// Explicitly stored levels.
    pub fn head(&self) -> &[f64] {
        &self.head
    }

    /// Amount subtracted from the raw levels at ingestion.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Number of levels equal to zero (`dim ker H`).
    pub fn ground_multiplicity(&self) -> usize {
        self.ground_multiplicity
    }

    /// Level at position `i`; `None` past the end of a finite spectrum.
    pub fn level(&self, i: usize) -> Option<f64> {
        if let Some(&h) = self.head.get(i) {
            return Some(h);
        }
        self.tail
            .as_ref()
            .map(|t| t.generator.raw(i + t.index_offset) - self.shift)
    }

    /// Iterator over the first `n` levels (fewer for short finite spectra).
    pub fn levels(&self, n: usize) -> impl Iterator<Item = f64> + '_ {
        (0..n).map_while(move |i| self.level(i))
    }

    pub fn min_level(&self) -> f64 {
        self.level(0).expect("validated spectra are nonempty")
    }

    /// Largest level of a finite spectrum.
    pub fn max_level(&self) -> Option<f64> {
        if self.tail.is_some() {
            None
        } else {
            self.head.last().copied()
        }
    }

    /// `h_1`, the first excited level; `None` for one-level spectra.
    pub fn h1(&self) -> Option<f64> {
        self.level(1)
    }

    /// Number of levels equal to the lowest one.
    pub fn lowest_multiplicity(&self) -> usize {
        let h0 = self.min_level();
        let explicit = self.head.iter().take_while(|&&h| h == h0).count();
        if explicit == self.head.len() && self.tail.is_some() {
            // An empty or constant head is followed by a strictly increasing rule.
            explicit + usize::from(self.level(self.head.len()) == Some(h0))
        } else {
            explicit.max(1)
        }
    }

    /// Affine lower bound `level(i) >= slope * i + intercept` valid for all
    /// positions `i >= head().len()`. `None` for finite spectra.
    pub fn affine_lower_bound(&self) -> Option<AffineBound> {
        let tail = self.tail.as_ref()?;
        let (c, d) = tail.generator.raw_affine_bound();
        Some(AffineBound {
            slope: c,
            intercept: c * tail.index_offset as f64 + d - self.shift,
        })
    }

    /// When the tail is exactly affine in the position, returns it so that
    /// partition sums can be closed analytically.
    pub fn exact_affine_tail(&self) -> Option<AffineBound> {
        let tail = self.tail.as_ref()?;
        if !tail.generator.is_affine() {
            return None;
        }
        let slope = match tail.generator {
            Generator::Linear { slope, .. } => slope,
            Generator::Power { scale, .. } => scale,
            Generator::UserAffineBound { .. } => unreachable!(),
        };
        let intercept = tail.generator.raw(tail.index_offset) - self.shift;
        Some(AffineBound { slope, intercept })
    }

    /// Affine lower bound valid from position `n` on, as tight as the rule allows.
    /// Convex power rules use the secant through positions `n - 1` and `n`.
    fn local_affine_bound(&self, n: usize) -> Option<AffineBound> {
        let tail = self.tail.as_ref()?;
        match tail.generator {
            Generator::Power { .. } if n >= 1 => {
                let g = |i: usize| tail.generator.raw(i + tail.index_offset) - self.shift;
                let slope = g(n) - g(n - 1);
                Some(AffineBound {
                    slope,
                    intercept: g(n) - slope * n as f64,
                })
            }
            _ => self.affine_lower_bound(),
        }
    }

    /// Drops the lowest level: `h'_i = h_{i+1}`. The result is not re-grounded.
    pub fn shift_plus(&self) -> Result<Spectrum> {
        if let Some(n) = self.len() {
            if n < 2 {
                return Err(Error::TooFewLevels {
                    needed: 2,
                    found: n,
                });
            }
        }
        let head = if self.head.is_empty() {
            Vec::new()
        } else {
            self.head[1..].to_vec()
        };
        let ground_multiplicity = head.iter().take_while(|&&h| h == 0.0).count();
        Ok(Spectrum {
            head,
            tail: self.tail.as_ref().map(|t| Tail {
                generator: t.generator.clone(),
                index_offset: t.index_offset + 1,
            }),
            shift: self.shift,
            ground_multiplicity,
            name: self.name.as_ref().map(|n| format!("{n}+")),
        })
    }

    /// Parses the JSON spectrum schema.
    pub fn from_json_str(text: &str) -> Result<Spectrum> {
        let file: SpectrumFile = serde_json::from_str(text)?;
        file.into_spectrum()
    }
}

/// Certified truncation of the partition sums at a given inverse temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPlan {
    /// Number of retained levels; positions `>= cutoff_index` are omitted.
    pub cutoff_index: usize,
    /// Larger of the two tail bounds below.
    pub tail_bound: f64,
    /// Bound on `sum_{i >= cutoff} exp(-beta (h_i - h_0))`.
    pub mass_tail_bound: f64,
    /// Bound on `sum_{i >= cutoff} h_i exp(-beta (h_i - h_0))`.
    pub energy_tail_bound: f64,
    /// The bounds hold for every inverse temperature at or above this one.
    pub beta_floor: f64,
}

/// Geometric tail sums of the affine function `ell` from position `n` on,
/// relative to the reference level `h0`: `(mass, energy)`.
fn affine_tail_sums(ell: AffineBound, n: usize, beta: f64, h0: f64) -> (f64, f64) {
    let u = ell.at(n);
    let x = (-beta * ell.slope).exp();
    let one_minus_x = -(-beta * ell.slope).exp_m1();
    let lead = (-beta * (u - h0)).exp();
    let mass = lead / one_minus_x;
    let energy = lead * (u / one_minus_x + ell.slope * x / (one_minus_x * one_minus_x));
    (mass, energy)
}

/// Chooses how many levels to sum so that both omitted tails are below `tol`.
///
/// Terms are measured relative to the lowest level, `exp(-beta (h_i - h_0))`,
/// so the retained sum is at least one and `tol` bounds the error of the
/// log-partition function directly.
pub fn plan_truncation(s: &Spectrum, beta: f64, tol: f64) -> Result<TruncationPlan> {
    if !(tol > 0.0) {
        return Err(Error::DomainError(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if let Some(n) = s.len() {
        return Ok(TruncationPlan {
            cutoff_index: n,
            tail_bound: 0.0,
            mass_tail_bound: 0.0,
            energy_tail_bound: 0.0,
            beta_floor: f64::NEG_INFINITY,
        });
    }
    if !(beta >= BETA_FLOOR) {
        return Err(Error::BetaTooSmall {
            beta,
            floor: BETA_FLOOR,
        });
    }
    let h0 = s.min_level();
    let bounds_at = |n: usize| -> Option<(f64, f64)> {
        let ell = s.local_affine_bound(n)?;
        let u = ell.at(n);
        // h e^{-beta h} is decreasing only past 1/beta
        if u < 1.0 / beta || u < 0.0 {
            return None;
        }
        let (mass, energy) = affine_tail_sums(ell, n, beta, h0);
        (mass < tol && energy < tol).then_some((mass, energy))
    };

    let start = s.head.len().max(1);
    let mut lo = start;
    let mut hi = start;
    let found = loop {
        if let Some(b) = bounds_at(hi) {
            break b;
        }
        if hi as u64 > MAX_TERMS {
            return Err(Error::TruncationTooLarge {
                required: hi as u64,
                limit: MAX_TERMS,
            });
        }
        lo = hi;
        hi *= 2;
    };
    let (mut mass, mut energy) = found;
    // smallest acceptable cutoff in (lo, hi]
    if hi > start {
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            match bounds_at(mid) {
                Some(b) => {
                    hi = mid;
                    (mass, energy) = b;
                }
                None => lo = mid,
            }
        }
    }
    Ok(TruncationPlan {
        cutoff_index: hi,
        tail_bound: mass.max(energy),
        mass_tail_bound: mass,
        energy_tail_bound: energy,
        beta_floor: beta,
    })
}

/// JSON schema for spectrum files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumFile {
    pub levels: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GeneratorSpec {
    Linear { slope: f64, offset: f64 },
    Power { exponent: f64, scale: f64 },
}

impl From<GeneratorSpec> for Generator {
    fn from(spec: GeneratorSpec) -> Self {
        match spec {
            GeneratorSpec::Linear { slope, offset } => Generator::Linear { slope, offset },
            GeneratorSpec::Power { exponent, scale } => Generator::Power { exponent, scale },
        }
    }
}

impl SpectrumFile {
    pub fn into_spectrum(self) -> Result<Spectrum> {
        let s = Spectrum::validate(&self.levels, self.generator.map(Generator::from))?;
        Ok(match self.name {
            Some(name) => s.with_name(name),
            None => s,
        })
    }
}
