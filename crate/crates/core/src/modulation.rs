//! The ac amplitude f(t) as a finite sum of complex exponential tones.
//!
//! Spectral sign convention: F(ω) = (1/2π) ∫ f(t) e^{iωt} dt, so a tone
//! e^{+iνt} sits at spectral point ω = -ν. A modulation made only of
//! positive-frequency tones therefore has F(ω) = 0 for ω > -Ω₀.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative amplitude below which a tone is treated as absent.
pub const DEFAULT_SIDEDNESS_TOL: f64 = 1e-12;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// One tone `amplitude * exp(i * frequency * t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    pub amplitude: Complex64,
    pub frequency: f64,
}

/// f(t) = Σ_j a_j exp(i ν_j t), zero mean, one tone per frequency.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<Tone>", into = "Vec<Tone>")]
pub struct ModulationSpec {
    tones: Vec<Tone>,
}

impl TryFrom<Vec<Tone>> for ModulationSpec {
    type Error = Error;
    fn try_from(tones: Vec<Tone>) -> Result<Self> {
        ModulationSpec::new(tones)
    }
}

impl From<ModulationSpec> for Vec<Tone> {
    fn from(spec: ModulationSpec) -> Self {
        spec.tones
    }
}

fn same_frequency(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

impl ModulationSpec {
    /// Builds the canonical form: tones sorted by frequency, duplicates merged.
    pub fn new(tones: Vec<Tone>) -> Result<Self> {
        let mut sorted = tones;
        for t in &sorted {
            if !t.frequency.is_finite()
                || !t.amplitude.re.is_finite()
                || !t.amplitude.im.is_finite()
            {
                return Err(Error::InvalidModulation(
                    "tone fields must be finite".into(),
                ));
            }
            if t.frequency == 0.0 {
                return Err(Error::InvalidModulation(
                    "zero-frequency tone: f(t) must have zero time average".into(),
                ));
            }
        }
        sorted.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
        let mut merged: Vec<Tone> = Vec::with_capacity(sorted.len());
        for t in sorted {
            match merged.last_mut() {
                Some(last) if same_frequency(last.frequency, t.frequency) => {
                    last.amplitude += t.amplitude
                }
                _ => merged.push(t),
            }
        }
        Ok(Self { tones: merged })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    fn from_pairs(pairs: &[(Complex64, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(amplitude, frequency)| Tone {
                    amplitude,
                    frequency,
                })
                .collect(),
        )
    }

    /// `amplitude * cos(omega t)`.
    pub fn cosine(omega: f64, amplitude: f64) -> Result<Self> {
        let a = Complex64::new(amplitude / 2.0, 0.0);
        Self::from_pairs(&[(a, omega), (a, -omega)])
    }

    /// `amplitude * exp(i omega t)`.
    pub fn one_sided(omega: f64, amplitude: f64) -> Result<Self> {
        Self::from_pairs(&[(Complex64::new(amplitude, 0.0), omega)])
    }

    /// `amplitude * exp(-i omega t)`.
    pub fn one_sided_negative(omega: f64, amplitude: f64) -> Result<Self> {
        Self::from_pairs(&[(Complex64::new(amplitude, 0.0), -omega)])
    }

    /// `amplitude * [exp(i omega t) + exp(i sqrt(2) omega t)]` (quasi-periodic).
    pub fn two_tone(omega: f64, amplitude: f64) -> Result<Self> {
        let a = Complex64::new(amplitude, 0.0);
        Self::from_pairs(&[(a, omega), (a, SQRT_2 * omega)])
    }

    pub fn tones(&self) -> &[Tone] {
        &self.tones
    }

    pub fn is_empty(&self) -> bool {
        self.tones.is_empty()
    }

    /// Largest |ν| over all tones, or 0 for the empty modulation.
    pub fn max_frequency(&self) -> f64 {
        self.tones
            .iter()
            .map(|t| t.frequency.abs())
            .fold(0.0, f64::max)
    }

    /// True when every tone is real-symmetric: (a, ν) present iff (ā, -ν) is.
    pub fn is_real(&self) -> bool {
        self.tones.iter().all(|t| {
            self.tones.iter().any(|u| {
                same_frequency(u.frequency, -t.frequency)
                    && (u.amplitude - t.amplitude.conj()).norm()
                        <= 1e-14 * t.amplitude.norm().max(1.0)
            })
        })
    }

    /// Spec with (ā, -ν) for each tone (a, ν), i.e. the modulation conj(f(t)).
    pub fn conjugate_reflected(&self) -> Self {
        let tones = self
            .tones
            .iter()
            .map(|t| Tone {
                amplitude: t.amplitude.conj(),
                frequency: -t.frequency,
            })
            .collect();
        Self::new(tones).expect("reflection preserves validity")
    }

    /// Every tone multiplied by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            tones: self
                .tones
                .iter()
                .map(|t| Tone {
                    amplitude: t.amplitude * factor,
                    frequency: t.frequency,
                })
                .collect(),
        }
    }

    /// Largest ω such that every tone frequency is an integer multiple of ω,
    /// searched among |ν_min| / q for q = 1..=64. `None` for incommensurate
    /// (quasi-periodic) or empty specs.
    pub fn base_frequency(&self) -> Option<f64> {
        let smallest = self
            .tones
            .iter()
            .map(|t| t.frequency.abs())
            .fold(f64::INFINITY, f64::min);
        if !smallest.is_finite() {
            return None;
        }
        (1..=64u32).map(|q| smallest / q as f64).find(|&base| {
            self.tones.iter().all(|t| {
                let ratio = t.frequency / base;
                (ratio - ratio.round()).abs() <= 1e-9 * ratio.abs().max(1.0)
            })
        })
    }

    /// Fourier coefficient on the harmonic `n * base` (zero when absent).
    pub fn harmonic(&self, base: f64, n: i32) -> Complex64 {
        let nu = n as f64 * base;
        self.tones
            .iter()
            .find(|t| same_frequency(t.frequency, nu))
            .map_or(Complex64::new(0.0, 0.0), |t| t.amplitude)
    }
}

/// Σ_j a_j exp(i ν_j t).
pub fn eval_modulation(spec: &ModulationSpec, t: f64) -> Complex64 {
    spec.tones
        .iter()
        .map(|tone| tone.amplitude * Complex64::from_polar(1.0, tone.frequency * t))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sidedness {
    PositiveOneSided,
    NegativeOneSided,
    TwoSided,
    Zero,
}

/// Spectral-side classification of a modulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidednessReport {
    pub classification: Sidedness,
    /// Spectral gap Ω₀: smallest |ν| among surviving tones (0 for `Zero`).
    pub omega0: f64,
    pub tolerance_used: f64,
}

/// Classifies which side of zero frequency the tones occupy.
///
/// Tones with |a| < `rel_tol * max|a|` are ignored. Panics if `rel_tol` is
/// outside (0, 1).
pub fn classify_sidedness(spec: &ModulationSpec, rel_tol: f64) -> SidednessReport {
    assert!(
        rel_tol > 0.0 && rel_tol < 1.0,
        "rel_tol must lie in (0, 1), got {rel_tol}"
    );
    let peak = spec
        .tones
        .iter()
        .map(|t| t.amplitude.norm())
        .fold(0.0, f64::max);
    let surviving: Vec<f64> = spec
        .tones
        .iter()
        .filter(|t| peak > 0.0 && t.amplitude.norm() >= rel_tol * peak)
        .map(|t| t.frequency)
        .collect();
    let has_pos = surviving.iter().any(|&f| f > 0.0);
    let has_neg = surviving.iter().any(|&f| f < 0.0);
    let gap = surviving
        .iter()
        .map(|f| f.abs())
        .fold(f64::INFINITY, f64::min);
    let (classification, omega0) = match (has_pos, has_neg) {
        (true, false) => (Sidedness::PositiveOneSided, gap),
        (false, true) => (Sidedness::NegativeOneSided, gap),
        (true, true) => (Sidedness::TwoSided, gap),
        (false, false) => (Sidedness::Zero, 0.0),
    };
    SidednessReport {
        classification,
        omega0,
        tolerance_used: rel_tol,
    }
}

/// The zero-mean antiderivative g(t) with g' = f: tones (a / (iν), ν).
pub fn antiderivative_zero_mean(spec: &ModulationSpec) -> ModulationSpec {
    ModulationSpec {
        tones: spec
            .tones
            .iter()
            .map(|t| Tone {
                amplitude: t.amplitude / (I * t.frequency),
                frequency: t.frequency,
            })
            .collect(),
    }
}

/// Long-time average ⟨g(t)²⟩ of the zero-mean antiderivative.
///
/// Only ordered tone pairs whose frequencies cancel survive the average. For
/// a periodic f this is (1/ω²) Σ_{n≠0} f_{-n} f_n / n². It is exactly zero
/// whenever no two tones have opposite frequencies (one-sided spectra).
pub fn mean_square_antiderivative(spec: &ModulationSpec) -> Complex64 {
    let g = antiderivative_zero_mean(spec);
    let mut acc = Complex64::new(0.0, 0.0);
    for a in &g.tones {
        for b in &g.tones {
            if same_frequency(a.frequency, -b.frequency) {
                acc += a.amplitude * b.amplitude;
            }
        }
    }
    acc
}

/// Exact ∫_{t0}^{t1} f(ξ) dξ.
pub fn integrate_modulation(spec: &ModulationSpec, t0: f64, t1: f64) -> Complex64 {
    spec.tones
        .iter()
        .map(|tone| {
            let nu = tone.frequency;
            // e^{iνt1} - e^{iνt0} = 2i e^{iν(t0+t1)/2} sin(ν(t1-t0)/2); avoids
            // cancellation for short steps.
            let half = 0.5 * nu * (t1 - t0);
            let mid = Complex64::from_polar(1.0, 0.5 * nu * (t0 + t1));
            tone.amplitude * mid * (2.0 * half.sin() / nu)
        })
        .sum()
}
