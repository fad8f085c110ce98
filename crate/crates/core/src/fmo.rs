//! Bundled Fenna–Matthews–Olson monomer and the reference parameter set.

use crate::error::Result;
use crate::network::{load_network, ExcitonNetwork, NetworkFile};
use crate::pipeline::ParameterVector;

/// Raw JSON of the bundled network file.
pub const BUNDLED_NETWORK_JSON: &str = include_str!("../data/fmo_adolphs_renger.json");

/// Reference decoherence rates (cm⁻¹), pigment eigenstates first, sink last.
pub const REFERENCE_RATES: [f64; 6] = [59.6, 90.0, 50.3, 59.7, 89.7, 50.1];
pub const REFERENCE_SINK_ENERGY: f64 = -500.0;
pub const REFERENCE_SINK_COUPLING: f64 = 327.0;

pub fn bundled_network() -> ExcitonNetwork {
    load_network(BUNDLED_NETWORK_JSON).expect("bundled network is well formed")
}

pub fn bundled_network_file() -> Result<NetworkFile> {
    Ok(serde_json::from_str(BUNDLED_NETWORK_JSON)?)
}

pub fn reference_parameters() -> ParameterVector {
    ParameterVector::new(REFERENCE_RATES.to_vec(), REFERENCE_SINK_ENERGY, REFERENCE_SINK_COUPLING)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_network_is_valid() {
        let net = bundled_network();
        assert_eq!(net.n_pigments(), 7);
        assert_eq!(net.n_bath(), REFERENCE_RATES.len());
        assert!(net.validate_constraints().is_valid());
        assert_eq!(bundled_network_file().unwrap().energy_offset, Some(12210.0));
    }
}
