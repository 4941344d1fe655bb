#![allow(dead_code)]

use entropy_bounds::{Generator, Spectrum};

pub fn oscillator() -> Spectrum {
    Spectrum::oscillator()
}

pub fn two_level() -> Spectrum {
    Spectrum::finite(&[0.0, 1.0])
        .unwrap()
        .with_name("two-level")
}

pub fn three_level() -> Spectrum {
    Spectrum::finite(&[0.0, 1.0, 5.0])
        .unwrap()
        .with_name("three-level")
}

/// `h_i = i^2`.
pub fn power_law() -> Spectrum {
    Spectrum::validate(
        &[0.0, 1.0, 4.0],
        Some(Generator::Power {
            exponent: 2.0,
            scale: 1.0,
        }),
    )
    .unwrap()
    .with_name("power-law")
}

/// `0, 0, 1, 2, 3, ...`
pub fn degenerate_ground() -> Spectrum {
    Spectrum::validate(
        &[0.0, 0.0, 1.0, 2.0],
        Some(Generator::Linear {
            slope: 1.0,
            offset: -1.0,
        }),
    )
    .unwrap()
    .with_name("degenerate-ground")
}

pub fn all_spectra() -> Vec<(&'static str, Spectrum)> {
    vec![
        ("oscillator", oscillator()),
        ("two-level", two_level()),
        ("three-level", three_level()),
        ("power-law", power_law()),
        ("degenerate-ground", degenerate_ground()),
    ]
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

pub fn lin_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

pub fn binary_entropy(e: f64) -> f64 {
    let t = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.ln() };
    t(e) + t(1.0 - e)
}

/// `(E + 1) ln(E + 1) - E ln E`
pub fn oscillator_g(e: f64) -> f64 {
    (e + 1.0) * (e + 1.0).ln() - e * e.ln()
}
