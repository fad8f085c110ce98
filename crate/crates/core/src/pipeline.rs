//! The full evaluation chain from a network and a parameter vector to the
//! donor/acceptor spectral profiles and the overlap efficiency.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{diagonalize_bath, partition, BathSpectrum, ExcitonNetwork, RateOrdering, SinkParameters, SystemPartition};
use crate::spectral::{
    normalize_density, overlap_efficiency, summarize_densities, LorentzianParameters, NormalizedDensity, QuadratureWindow,
    ResonanceSummary, Site, SpectralProfile,
};

/// Free parameters of the model: one decoherence rate per bath eigenstate
/// (pigment states first, the sink rate last), the sink energy and the
/// acceptor-sink coupling. All in cm⁻¹.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector {
    pub rates: Vec<f64>,
    pub sink_energy: f64,
    pub sink_coupling: f64,
}

impl ParameterVector {
    pub fn new(rates: Vec<f64>, sink_energy: f64, sink_coupling: f64) -> Self {
        Self { rates, sink_energy, sink_coupling }
    }

    pub fn pigment_rates(&self) -> &[f64] {
        &self.rates[..self.rates.len().saturating_sub(1)]
    }

    pub fn sink_rate(&self) -> f64 {
        *self.rates.last().unwrap_or(&f64::NAN)
    }

    pub fn sink(&self) -> Result<SinkParameters> {
        SinkParameters::new(self.sink_energy, self.sink_coupling, self.sink_rate())
    }

    /// Flat layout `[rates…, sink_energy, sink_coupling]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.rates.clone();
        v.push(self.sink_energy);
        v.push(self.sink_coupling);
        v
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::Parameter(format!("parameter vector needs at least 3 entries, got {}", values.len())));
        }
        let n = values.len() - 2;
        Ok(Self { rates: values[..n].to_vec(), sink_energy: values[n], sink_coupling: values[n + 1] })
    }

    /// Copy with every rate, the sink's included, multiplied by `factor`.
    pub fn with_scaled_rates(&self, factor: f64) -> Self {
        Self { rates: self.rates.iter().map(|r| r * factor).collect(), ..self.clone() }
    }

    pub fn with_sink(&self, sink_energy: f64, sink_coupling: f64) -> Self {
        Self { sink_energy, sink_coupling, ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelOptions {
    pub ordering: RateOrdering,
    /// Overrides the window derived from the bath spectrum.
    pub window: Option<QuadratureWindow>,
}

/// Donor and acceptor profiles for one parameter vector.
#[derive(Debug, Clone)]
pub struct ProfilePair {
    pub partition: SystemPartition,
    pub spectrum: BathSpectrum,
    pub donor: SpectralProfile,
    pub acceptor: SpectralProfile,
    pub window: QuadratureWindow,
}

/// Normalized donor and acceptor densities with their Lorentzian parameters.
pub struct NormalizedPair<'a> {
    pub donor: NormalizedDensity<&'a SpectralProfile>,
    pub acceptor: NormalizedDensity<&'a SpectralProfile>,
    pub donor_lorentzian: LorentzianParameters,
    pub acceptor_lorentzian: LorentzianParameters,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Analysis {
    pub overlap: f64,
    pub summary: ResonanceSummary,
}

impl ProfilePair {
    pub fn build(net: &ExcitonNetwork, params: &ParameterVector, options: &ModelOptions) -> Result<Self> {
        if params.rates.len() != net.n_bath() {
            return Err(Error::Parameter(format!("{} rates given for {} bath eigenstates", params.rates.len(), net.n_bath())));
        }
        let part = partition(net, &params.sink()?)?;
        let spectrum = diagonalize_bath(&part, params.pigment_rates(), options.ordering)?;
        let donor = SpectralProfile::from_bath(&spectrum, &part, Site::Donor);
        let acceptor = SpectralProfile::from_bath(&spectrum, &part, Site::Acceptor);
        let window = options.window.unwrap_or_else(|| QuadratureWindow::covering(&spectrum));
        Ok(Self { partition: part, spectrum, donor, acceptor, window })
    }

    pub fn normalized(&self) -> Result<NormalizedPair<'_>> {
        let donor_lorentzian = self.donor.lorentzian_parameters(&self.window)?;
        let acceptor_lorentzian = self.acceptor.lorentzian_parameters(&self.window)?;
        let donor = normalize_density(&self.donor, &self.window)?.with_features([donor_lorentzian.frequency]);
        let acceptor = normalize_density(&self.acceptor, &self.window)?.with_features([acceptor_lorentzian.frequency]);
        Ok(NormalizedPair { donor, acceptor, donor_lorentzian, acceptor_lorentzian })
    }

    pub fn overlap(&self) -> Result<f64> {
        let n = self.normalized()?;
        overlap_efficiency(&n.donor, &n.acceptor, &self.window)
    }

    pub fn analyze(&self) -> Result<Analysis> {
        let n = self.normalized()?;
        let overlap = overlap_efficiency(&n.donor, &n.acceptor, &self.window)?;
        let summary = summarize_densities(&n.donor, &n.acceptor, n.donor_lorentzian, n.acceptor_lorentzian, &self.window)?;
        Ok(Analysis { overlap, summary })
    }
}

/// `𝓕` for one parameter vector: partition, diagonalize, build profiles,
/// normalize and integrate the overlap.
pub fn evaluate_objective(net: &ExcitonNetwork, params: &ParameterVector, options: &ModelOptions) -> Result<f64> {
    ProfilePair::build(net, params, options)?.overlap()
}
