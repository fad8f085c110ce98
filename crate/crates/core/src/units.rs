//! Unit conventions.
//!
//! Energies, couplings and rates are wavenumbers (cm⁻¹) with ħ = 1, so the
//! natural time unit is the reciprocal angular wavenumber 1/(2πc · 1 cm⁻¹).
//! Conversion to picoseconds happens only at the I/O boundary.
//!
//! | quantity                      | internal name      | unit          |
//! |-------------------------------|--------------------|---------------|
//! | exciton recombination time    | `tau_recombination`| ps (I/O only) |
//! | donor-acceptor flight time    | `flight_time`      | ps (I/O only) |
//! | wave-packet propagation time  | `tau_propagation`  | 1/cm⁻¹        |
//! | detection (arrival) time      | `arrival_time`     | 1/cm⁻¹        |

use std::f64::consts::PI;

/// Speed of light in cm/s.
pub const SPEED_OF_LIGHT_CM_PER_S: f64 = 2.997_924_58e10;

/// One internal time unit expressed in picoseconds (≈ 5.3088 ps).
pub const PS_PER_TIME_UNIT: f64 = 1.0e12 / (2.0 * PI * SPEED_OF_LIGHT_CM_PER_S);

pub fn ps_to_internal(ps: f64) -> f64 {
    ps / PS_PER_TIME_UNIT
}

pub fn internal_to_ps(t: f64) -> f64 {
    t * PS_PER_TIME_UNIT
}

/// Curvature of a quadratic propagation-time model, ps/(cm⁻¹)² → 1/(cm⁻¹)³.
pub fn kappa_ps_to_internal(kappa_ps: f64) -> f64 {
    kappa_ps / PS_PER_TIME_UNIT
}

pub fn kappa_internal_to_ps(kappa: f64) -> f64 {
    kappa * PS_PER_TIME_UNIT
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn picosecond_scale() {
        assert!((PS_PER_TIME_UNIT - 5.3088).abs() < 1e-4);
        assert!((internal_to_ps(ps_to_internal(1.7)) - 1.7).abs() < 1e-14);
    }
}
