//! Frequency-domain coupled-channel scattering off V(x) f(t) for periodic f.
//!
//! With ψ = e^{i k₀ x - i ω₀ t} + Σ_m Θ_m(x) e^{-i ω_m t}, ω_m = ω₀ + m ω and
//! f(t) = Σ_n f_n e^{i n ω t}, each sideband obeys
//!
//! ```text
//! Θ_m'' + ω_m Θ_m - V Σ_n f_n Θ_{m+n} = V e^{i k₀ x} f_{-m},
//! ```
//!
//! so the tone e^{i n ω t} moves amplitude from channel m + n down to m. The
//! system is discretised with Numerov's scheme (block tridiagonal in x),
//! closed with discrete outgoing-wave conditions, and solved by a block LU
//! sweep along x.

#[cfg(test)]
mod banded;
mod block;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use block::{block_tridiagonal_apply, solve_block_tridiagonal};

use crate::error::{Error, Result};
use crate::modulation::ModulationSpec;
use crate::potential::PotentialSpec;

/// Default sideband range.
pub const DEFAULT_M_RANGE: (i32, i32) = (-28, 28);
/// Default number of Numerov nodes.
pub const DEFAULT_NX: usize = 6001;
/// Amplitude (relative to the unit incident wave) above which the outermost
/// channels trigger a truncation warning.
pub const TRUNCATION_LEVEL: f64 = 1e-8;
/// Relative residual above which a solve is reported as not converged.
const MAX_RESIDUAL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Channel {
    pub m: i32,
    pub omega: f64,
    /// √ω for ω > 0, i√|ω| for ω < 0.
    pub k: Complex64,
}

impl Channel {
    pub fn is_propagating(&self) -> bool {
        self.omega > 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelSet {
    pub omega0: f64,
    pub base_frequency: f64,
    pub m_min: i32,
    pub m_max: i32,
    pub channels: Vec<Channel>,
}

impl ChannelSet {
    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn index_of(&self, m: i32) -> Option<usize> {
        (m >= self.m_min && m <= self.m_max).then(|| (m - self.m_min) as usize)
    }

    /// Channels ω₀ + m·`base` for m in [m_min, m_max].
    pub fn with_base(omega0: f64, base: f64, m_min: i32, m_max: i32) -> Result<Self> {
        if !(omega0 > 0.0 && omega0.is_finite()) {
            return Err(Error::InvalidChannels(format!(
                "omega0 must be positive, got {omega0}"
            )));
        }
        if m_min > 0 || m_max < 0 {
            return Err(Error::InvalidChannels(format!(
                "range [{m_min}, {m_max}] must contain the incident channel 0"
            )));
        }
        let channels = (m_min..=m_max)
            .map(|m| {
                let omega = omega0 + m as f64 * base;
                if omega.abs() <= 1e-12 * omega0.max(base.abs()) {
                    return Err(Error::ThresholdChannel { m });
                }
                let k = if omega > 0.0 {
                    Complex64::new(omega.sqrt(), 0.0)
                } else {
                    Complex64::new(0.0, (-omega).sqrt())
                };
                Ok(Channel { m, omega, k })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            omega0,
            base_frequency: base,
            m_min,
            m_max,
            channels,
        })
    }
}

/// Sideband lattice for a commensurate modulation.
///
/// The empty modulation cannot couple anything and yields the single incident
/// channel.
pub fn build_channels(
    omega0: f64,
    modulation: &ModulationSpec,
    m_min: i32,
    m_max: i32,
) -> Result<ChannelSet> {
    if modulation.is_empty() {
        return ChannelSet::with_base(omega0, 0.0, 0, 0);
    }
    let base = modulation.base_frequency().ok_or(Error::Incommensurate)?;
    ChannelSet::with_base(omega0, base, m_min, m_max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Incidence {
    /// k₀ = +√ω₀, wave arrives from x = -∞.
    FromLeft,
    /// k₀ = -√ω₀, wave arrives from x = +∞.
    FromRight,
}

/// Numerov node set spanning `[x_min, x_max]` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
}

impl Window {
    pub fn new(x_min: f64, x_max: f64, n_x: usize) -> Result<Self> {
        if !(x_max > x_min) || n_x < 16 {
            return Err(Error::InvalidChannels(format!(
                "window [{x_min}, {x_max}] with {n_x} nodes is degenerate"
            )));
        }
        Ok(Self { x_min, x_max, n_x })
    }

    /// [-L, L] with the potential decayed to round-off at ±L.
    pub fn default_for(pot: &PotentialSpec) -> Result<Self> {
        match pot {
            PotentialSpec::Sampled { grid, .. } => {
                Self::new(grid.x_min(), grid.x(grid.n() - 1), grid.n())
            }
            PotentialSpec::Gaussian { .. } => {
                let l = pot.support_half_width();
                Self::new(-l, l, DEFAULT_NX)
            }
        }
    }

    pub fn h(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_x - 1) as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.h()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n_x).map(|j| self.x(j)).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FloquetScatteringResult {
    pub channels: ChannelSet,
    pub incidence: Incidence,
    /// Reflection amplitude per channel. Propagating channels are phase
    /// referenced to x = 0; evanescent channels hold the raw field at the
    /// reflection-side window edge.
    pub r: Vec<Complex64>,
    /// Transmission amplitude per channel, including the unit incident wave
    /// in channel 0. Evanescent channels hold the raw field at the
    /// transmission-side window edge.
    pub t: Vec<Complex64>,
    /// Max |A Θ - b| / max |b| over the assembled system, boundary rows included.
    pub residual: f64,
    /// Σ_propagating (|r_m|² + |t_m|²) k_m / k₀.
    pub flux: f64,
    /// max_x |Θ| over the outermost channels, relative to the incident amplitude.
    pub edge_channel_amplitude: f64,
    pub truncation_warning: bool,
    #[serde(skip)]
    pub window: Window,
    /// Scattered field Θ_m(x_j), indexed `[channel][node]`.
    #[serde(skip)]
    pub field: Vec<Vec<Complex64>>,
}

impl FloquetScatteringResult {
    pub fn channel(&self, m: i32) -> Option<(Channel, Complex64, Complex64)> {
        let i = self.channels.index_of(m)?;
        Some((self.channels.channels[i], self.r[i], self.t[i]))
    }
}

/// Root μ of a μ² - 2 c μ + 1 = 0 describing an outgoing (or decaying) wave
/// for the free Numerov recurrence: Θ_{j+1} = μ Θ_j moving right.
fn outgoing_ratio(omega: f64, h: f64) -> Result<Complex64> {
    let a = 1.0 + h * h * omega / 12.0;
    let c = (1.0 - 5.0 * h * h * omega / 12.0) / a;
    if c <= -1.0 {
        return Err(Error::InvalidChannels(format!(
            "node spacing {h} too coarse for channel frequency {omega}"
        )));
    }
    Ok(if c < 1.0 {
        Complex64::new(c, (1.0 - c * c).sqrt())
    } else {
        Complex64::new(c - (c * c - 1.0).sqrt(), 0.0)
    })
}

/// Solves the stationary coupled-channel problem for a unit plane wave
/// incident in channel 0.
pub fn solve_floquet_scattering(
    pot: &PotentialSpec,
    modulation: &ModulationSpec,
    channels: &ChannelSet,
    window: Window,
    incidence: Incidence,
) -> Result<FloquetScatteringResult> {
    let omega0 = channels.omega0;
    if !modulation.is_empty() {
        let base = modulation.base_frequency().ok_or(Error::Incommensurate)?;
        // every tone must sit on the channel lattice
        for tone in modulation.tones() {
            let n = tone.frequency / channels.base_frequency;
            if channels.base_frequency == 0.0 || (n - n.round()).abs() > 1e-9 * n.abs().max(1.0) {
                return Err(Error::InvalidChannels(format!(
                    "tone at {} is not a multiple of the channel spacing {} (modulation base {base})",
                    tone.frequency, channels.base_frequency
                )));
            }
        }
    }
    let k0 = match incidence {
        Incidence::FromLeft => omega0.sqrt(),
        Incidence::FromRight => -omega0.sqrt(),
    };

    let nc = channels.len();
    let nx = window.n_x;
    let h = window.h();
    let h2 = h * h / 12.0;
    let xs = window.xs();
    let v = pot.values_at(&xs)?;

    // coupling[m][m'] = f_{m' - m}
    let coupling: Vec<Vec<Complex64>> = channels
        .channels
        .iter()
        .map(|a| {
            channels
                .channels
                .iter()
                .map(|b| {
                    if modulation.is_empty() {
                        Complex64::new(0.0, 0.0)
                    } else {
                        modulation.harmonic(channels.base_frequency, b.m - a.m)
                    }
                })
                .collect()
        })
        .collect();
    let source_weight: Vec<Complex64> = channels
        .channels
        .iter()
        .map(|ch| {
            if modulation.is_empty() {
                Complex64::new(0.0, 0.0)
            } else {
                modulation.harmonic(channels.base_frequency, -ch.m)
            }
        })
        .collect();
    let mu = channels
        .channels
        .iter()
        .map(|ch| outgoing_ratio(ch.omega, h))
        .collect::<Result<Vec<_>>>()?;

    // A_j = -diag(ω) + V_j C ; Θ'' = A Θ + s
    let a_entry = |j: usize, p: usize, q: usize| -> Complex64 {
        let diag = if p == q {
            -channels.channels[p].omega
        } else {
            0.0
        };
        Complex64::new(diag, 0.0) + coupling[p][q] * v[j]
    };
    let source = |j: usize, p: usize| -> Complex64 {
        source_weight[p] * v[j] * Complex64::from_polar(1.0, k0 * xs[j])
    };

    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    // Numerov: (I - h²/12 A_{j-1}) Θ_{j-1} - 2 (I + 5h²/12 A_j) Θ_j
    //          + (I - h²/12 A_{j+1}) Θ_{j+1} = h²/12 (s_{j-1} + 10 s_j + s_{j+1})
    let neighbour = |j: usize| -> Vec<Complex64> {
        (0..nc * nc)
            .map(|e| {
                let (p, q) = (e / nc, e % nc);
                let id = if p == q { one } else { zero };
                id - a_entry(j, p, q) * h2
            })
            .collect()
    };
    let row = |j: usize| {
        let mut diag: Vec<Complex64> = (0..nc * nc)
            .map(|e| {
                let (p, q) = (e / nc, e % nc);
                let id = if p == q { one } else { zero };
                -(id + a_entry(j, p, q) * (5.0 * h2)) * 2.0
            })
            .collect();
        // ghost nodes outside the window are free space: Θ_{-1} = μ Θ_0,
        // Θ_{nx} = μ Θ_{nx-1}, with the free coefficient 1 + h²ω/12
        for p in 0..nc {
            let free = one * (1.0 + h2 * channels.channels[p].omega) * mu[p];
            if j == 0 {
                diag[p * nc + p] += free;
            }
            if j + 1 == nx {
                diag[p * nc + p] += free;
            }
        }
        let lower = if j > 0 {
            neighbour(j - 1)
        } else {
            vec![zero; nc * nc]
        };
        let upper = if j + 1 < nx {
            neighbour(j + 1)
        } else {
            vec![zero; nc * nc]
        };
        (lower, diag, upper)
    };
    let mut rhs = vec![zero; nx * nc];
    for j in 0..nx {
        for p in 0..nc {
            let mut s = source(j, p) * 10.0;
            if j > 0 {
                s += source(j - 1, p);
            }
            if j + 1 < nx {
                s += source(j + 1, p);
            }
            rhs[j * nc + p] = s * h2;
        }
    }

    let theta = solve_block_tridiagonal(nx, nc, row, &rhs)?;
    let applied = block_tridiagonal_apply(nx, nc, row, &theta);
    let scale = rhs.iter().map(|b| b.norm()).fold(0.0, f64::max);
    let defect = applied
        .iter()
        .zip(&rhs)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let residual = if scale > 0.0 { defect / scale } else { defect };
    if !(residual <= MAX_RESIDUAL) {
        return Err(Error::NotConverged { residual });
    }

    let field: Vec<Vec<Complex64>> = (0..nc)
        .map(|p| (0..nx).map(|j| theta[j * nc + p]).collect())
        .collect();

    let (x_l, x_r) = (window.x_min, window.x_max);
    let mut r = Vec::with_capacity(nc);
    let mut t = Vec::with_capacity(nc);
    for (p, ch) in channels.channels.iter().enumerate() {
        let (left, right) = (field[p][0], field[p][nx - 1]);
        let (left_amp, right_amp) = if ch.is_propagating() {
            // Θ ~ a_L e^{-ikx} on the left, a_R e^{ikx} on the right
            (
                left * Complex64::from_polar(1.0, ch.k.re * x_l),
                right * Complex64::from_polar(1.0, -ch.k.re * x_r),
            )
        } else {
            (left, right)
        };
        let delta = if ch.m == 0 {
            one
        } else {
            Complex64::new(0.0, 0.0)
        };
        match incidence {
            Incidence::FromLeft => {
                r.push(left_amp);
                t.push(right_amp + delta);
            }
            Incidence::FromRight => {
                r.push(right_amp);
                t.push(left_amp + delta);
            }
        }
    }

    let flux = channels
        .channels
        .iter()
        .enumerate()
        .filter(|(_, ch)| ch.is_propagating())
        .map(|(p, ch)| (r[p].norm_sqr() + t[p].norm_sqr()) * ch.k.re / k0.abs())
        .sum();

    let edge_channel_amplitude = [0, nc - 1]
        .iter()
        .map(|&p| field[p].iter().map(|v| v.norm()).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    let truncation_warning = nc > 1 && edge_channel_amplitude > TRUNCATION_LEVEL;

    Ok(FloquetScatteringResult {
        channels: channels.clone(),
        incidence,
        r,
        t,
        residual,
        flux,
        edge_channel_amplitude,
        truncation_warning,
        window,
        field,
    })
}

/// Decay data for one evanescent channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvanescentProfile {
    pub m: i32,
    pub peak: f64,
    pub peak_x: f64,
    /// |k_m| = √|ω_m|, the expected decay rate.
    pub kappa: f64,
    /// Least-squares slope of ln|Θ_m| over the outer 10% of the window on
    /// each side; `None` when the tail has underflowed or vanished.
    pub fitted_rate_left: Option<f64>,
    pub fitted_rate_right: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvisibilityReport {
    pub tolerance: f64,
    pub reflectionless: bool,
    pub transmission_unit: bool,
    pub no_sideband_transmission: bool,
    pub max_reflection: f64,
    pub transmission_error: f64,
    pub max_sideband_transmission: f64,
    pub evanescent: Vec<EvanescentProfile>,
}

impl InvisibilityReport {
    pub fn invisible(&self) -> bool {
        self.reflectionless && self.transmission_unit && self.no_sideband_transmission
    }
}

fn fitted_decay(xs: &[f64], values: &[Complex64]) -> Option<f64> {
    let points: Vec<(f64, f64)> = xs
        .iter()
        .zip(values)
        .filter(|(_, v)| v.norm() > 1e-290)
        .map(|(x, v)| (*x, v.norm().ln()))
        .collect();
    if points.len() < 3 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some((sxy / sxx).abs())
}

/// Checks the invisibility conditions at tolerance `tol`.
pub fn verify_invisibility(result: &FloquetScatteringResult, tol: f64) -> InvisibilityReport {
    let channels = &result.channels.channels;
    let mut max_reflection: f64 = 0.0;
    let mut max_sideband: f64 = 0.0;
    let mut transmission_error = 0.0;
    for (p, ch) in channels.iter().enumerate() {
        if !ch.is_propagating() {
            continue;
        }
        max_reflection = max_reflection.max(result.r[p].norm());
        if ch.m == 0 {
            transmission_error = (result.t[p] - 1.0).norm();
        } else {
            max_sideband = max_sideband.max(result.t[p].norm());
        }
    }
    let xs = result.window.xs();
    let tail = (xs.len() / 10).max(3);
    let evanescent = channels
        .iter()
        .enumerate()
        .filter(|(_, ch)| !ch.is_propagating())
        .map(|(p, ch)| {
            let f = &result.field[p];
            let (peak_j, peak) = f
                .iter()
                .enumerate()
                .map(|(j, v)| (j, v.norm()))
                .fold((0, 0.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
            let n = f.len();
            EvanescentProfile {
                m: ch.m,
                peak,
                peak_x: xs[peak_j],
                kappa: ch.k.im,
                fitted_rate_left: fitted_decay(&xs[..tail], &f[..tail]),
                fitted_rate_right: fitted_decay(&xs[n - tail..], &f[n - tail..]),
            }
        })
        .collect();
    InvisibilityReport {
        tolerance: tol,
        reflectionless: max_reflection < tol,
        transmission_unit: transmission_error < tol,
        no_sideband_transmission: max_sideband < tol,
        max_reflection,
        transmission_error,
        max_sideband_transmission: max_sideband,
        evanescent,
    }
}
