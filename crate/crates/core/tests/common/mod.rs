//! Generators shared by the property and acceptance suites.
#![allow(dead_code)]

use apet::{ExcitonNetwork, ParameterVector, QuadratureWindow, Site, SpectralProfile};
use nalgebra::DMatrix;
use proptest::prelude::*;

pub fn profile_strategy() -> impl Strategy<Value = SpectralProfile> {
    (1usize..5)
        .prop_flat_map(|m| {
            (
                prop::collection::vec(0.0f64..400.0, m),
                prop::collection::vec(-300.0f64..300.0, m),
                prop::collection::vec(5.0f64..90.0, m),
                -100.0f64..100.0,
            )
        })
        .prop_map(|(w, e, r, bare)| SpectralProfile::new(Site::Donor, w, e, r, bare).unwrap())
}

/// Five pigments (donor, acceptor, three bath sites) plus the sink slot.
pub fn network_strategy() -> impl Strategy<Value = ExcitonNetwork> {
    (prop::collection::vec(-400.0f64..400.0, 5), prop::collection::vec(-100.0f64..100.0, 10)).prop_map(|(diag, off)| {
        let mut h = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag));
        let mut k = 0;
        for i in 0..5 {
            for j in (i + 1)..5 {
                let v = if (i, j) == (0, 1) { 0.0 } else { off[k] };
                h[(i, j)] = v;
                h[(j, i)] = v;
                k += 1;
            }
        }
        ExcitonNetwork::from_pigments("random", &h).unwrap()
    })
}

pub fn params_strategy() -> impl Strategy<Value = ParameterVector> {
    (prop::collection::vec(20.0f64..120.0, 4), -500.0f64..0.0, 0.0f64..600.0)
        .prop_map(|(r, w8, h28)| ParameterVector::new(r, w8, h28))
}

pub fn synthetic_window() -> QuadratureWindow {
    QuadratureWindow::new(-2500.0, 2500.0, 1e-9).unwrap()
}
