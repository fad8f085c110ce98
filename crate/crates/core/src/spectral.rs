//! Bath-induced decay rates and energy shifts, the emission densities built
//! from them, self-consistent renormalized frequencies and the overlap
//! efficiency of donor and acceptor densities.

mod density;
mod renormalize;
mod resonance;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{BathSpectrum, SystemPartition};

pub use density::{normalize_density, overlap_efficiency, Density, Lorentzian, NormalizedDensity, OVERLAP_CLAMP};
pub use renormalize::{solve_self_consistent, RootMethod, RootReport};
pub use resonance::{resonance_summary, summarize_densities, ResonanceSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Site {
    Donor,
    Acceptor,
}

/// Everything needed to evaluate `γ_j(ω)`, `δ_j(ω)` and `f_j(ω)` for one site.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralProfile {
    owner: Site,
    weights: Vec<f64>,
    energies: Vec<f64>,
    rates: Vec<f64>,
    bare_frequency: f64,
}

/// Dressed Lorentzian approximation of one emission density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzianParameters {
    pub frequency: f64,
    pub width: f64,
}

impl SpectralProfile {
    pub fn new(owner: Site, weights: Vec<f64>, energies: Vec<f64>, rates: Vec<f64>, bare_frequency: f64) -> Result<Self> {
        if weights.len() != energies.len() || rates.len() != energies.len() {
            return Err(Error::Parameter(format!(
                "profile arrays disagree in length: {} weights, {} energies, {} rates",
                weights.len(),
                energies.len(),
                rates.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Parameter("coupling weights must be finite and nonnegative".into()));
        }
        if rates.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::Parameter("decoherence rates must be positive".into()));
        }
        if energies.iter().any(|e| !e.is_finite()) || !bare_frequency.is_finite() {
            return Err(Error::Parameter("energies must be finite".into()));
        }
        Ok(Self { owner, weights, energies, rates, bare_frequency })
    }

    pub fn from_bath(spectrum: &BathSpectrum, part: &SystemPartition, site: Site) -> Self {
        let (weights, bare) = match site {
            Site::Donor => (spectrum.weights_donor.clone(), part.donor_energy),
            Site::Acceptor => (spectrum.weights_acceptor.clone(), part.acceptor_energy),
        };
        Self { owner: site, weights, energies: spectrum.eigenvalues.clone(), rates: spectrum.rates.clone(), bare_frequency: bare }
    }

    pub fn owner(&self) -> Site {
        self.owner
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn bare_frequency(&self) -> f64 {
        self.bare_frequency
    }

    /// `Σ_α w_α`, the squared norm of the coupling vector.
    pub fn coupling_strength(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn terms(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.weights.iter().zip(&self.energies).zip(&self.rates).map(|((&w, &e), &r)| (w, e, r))
    }

    /// `γ_j(ω) = Σ_α w_α Γ_α / ((ω − ε_α)² + Γ_α²)`.
    pub fn decay_rate(&self, omega: f64) -> f64 {
        self.terms()
            .map(|(w, e, r)| {
                let d = omega - e;
                w * r / (d * d + r * r)
            })
            .sum()
    }

    /// `δ_j(ω) = Σ_α w_α (ω − ε_α) / ((ω − ε_α)² + Γ_α²)`.
    pub fn energy_shift(&self, omega: f64) -> f64 {
        self.terms()
            .map(|(w, e, r)| {
                let d = omega - e;
                w * d / (d * d + r * r)
            })
            .sum()
    }

    /// Both spectral functions in one pass.
    pub fn rate_and_shift(&self, omega: f64) -> (f64, f64) {
        self.terms().fold((0.0, 0.0), |(g, s), (w, e, r)| {
            let d = omega - e;
            let den = d * d + r * r;
            (g + w * r / den, s + w * d / den)
        })
    }

    /// Bath correlation function `G_jj(t) = Σ_α w_α e^{−iε_α t} e^{−Γ_α t}`, `t ≥ 0`.
    pub fn correlation(&self, t: f64) -> Result<Complex64> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("correlation function is defined for t >= 0, got {t}")));
        }
        Ok(self.terms().map(|(w, e, r)| Complex64::new(-r * t, -e * t).exp() * w).sum())
    }

    /// Raw emission density `f_j(ω)`; not normalized.
    pub fn spectral_density(&self, omega: f64) -> f64 {
        let (gamma, delta) = self.rate_and_shift(omega);
        emission_density(gamma, delta, self.bare_frequency, omega)
    }

    /// Root of `ω = ω_j + δ_j(ω)` nearest the bare frequency, searched inside `window`.
    pub fn renormalized_frequency(&self, window: &QuadratureWindow) -> Result<RootReport> {
        let min_rate = self.rates.iter().copied().fold(f64::INFINITY, f64::min);
        let lower = window.lower.min(self.bare_frequency);
        let upper = window.upper.max(self.bare_frequency);
        solve_self_consistent(self.bare_frequency, |w| self.energy_shift(w), lower, upper, min_rate / 4.0)
    }

    pub fn lorentzian_parameters(&self, window: &QuadratureWindow) -> Result<LorentzianParameters> {
        let root = self.renormalized_frequency(window)?;
        let width = self.decay_rate(root.root);
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::Degenerate(format!(
                "decay rate at the renormalized frequency {} is {width}; the site is uncoupled",
                root.root
            )));
        }
        Ok(LorentzianParameters { frequency: root.root, width })
    }
}

/// `(1/π) γ / ((ω − ω_j − δ)² + γ²)` for given values of `γ_j(ω)` and `δ_j(ω)`.
pub fn emission_density(gamma: f64, delta: f64, bare_frequency: f64, omega: f64) -> f64 {
    let x = omega - bare_frequency - delta;
    if gamma == 0.0 {
        return 0.0;
    }
    gamma / (PI * (x * x + gamma * gamma))
}

/// Frequency interval and absolute tolerance for the spectral integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureWindow {
    pub lower: f64,
    pub upper: f64,
    pub tolerance: f64,
}

impl QuadratureWindow {
    pub const DEFAULT_TOLERANCE: f64 = 1e-9;

    /// Half-widths (in units of the largest rate) added beyond the bath spectrum.
    pub const DEFAULT_MARGIN: f64 = 20.0;

    pub fn new(lower: f64, upper: f64, tolerance: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(Error::Parameter(format!("window [{lower}, {upper}] is empty")));
        }
        if !(tolerance > 0.0 && tolerance <= 1e-4) {
            return Err(Error::Parameter(format!("quadrature tolerance {tolerance} outside (0, 1e-4]")));
        }
        Ok(Self { lower, upper, tolerance })
    }

    /// `[min ε − 20 max Γ, max ε + 20 max Γ]`.
    pub fn covering(spectrum: &BathSpectrum) -> Self {
        let lo = spectrum.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = spectrum.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let rate = spectrum.rates.iter().copied().fold(0.0, f64::max);
        Self {
            lower: lo - Self::DEFAULT_MARGIN * rate,
            upper: hi + Self::DEFAULT_MARGIN * rate,
            tolerance: Self::DEFAULT_TOLERANCE,
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, omega: f64) -> bool {
        omega >= self.lower && omega <= self.upper
    }
}

impl Density for SpectralProfile {
    fn value(&self, omega: f64) -> f64 {
        self.spectral_density(omega)
    }

    fn features(&self) -> Vec<f64> {
        let mut f = self.energies.clone();
        f.push(self.bare_frequency);
        f
    }
}
