use serde::Serialize;

use crate::error::{Error, Result};

use super::density::{normalize_density, Density};
use super::{LorentzianParameters, QuadratureWindow, SpectralProfile};

const GRID_POINTS: usize = 4001;

/// Where and how sharply the donor and acceptor densities overlap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResonanceSummary {
    pub renorm_donor: f64,
    pub renorm_acceptor: f64,
    pub width_donor: f64,
    pub width_acceptor: f64,
    /// Location of the maximum of `√(f₁f₂)`.
    pub resonance_frequency: f64,
    /// Half of the full width at half maximum of `√(f₁f₂)`.
    pub effective_width: f64,
    pub detuning: f64,
}

/// Summary for the donor and acceptor profiles; densities are normalized over `window`.
pub fn resonance_summary(
    donor: &SpectralProfile,
    acceptor: &SpectralProfile,
    window: &QuadratureWindow,
) -> Result<ResonanceSummary> {
    let p1 = donor.lorentzian_parameters(window)?;
    let p2 = acceptor.lorentzian_parameters(window)?;
    let f1 = normalize_density(donor, window)?.with_features([p1.frequency]);
    let f2 = normalize_density(acceptor, window)?.with_features([p2.frequency]);
    summarize_densities(&f1, &f2, p1, p2, window)
}

/// Summary for arbitrary (already normalized) densities with known Lorentzian parameters.
pub fn summarize_densities<A: Density, B: Density>(
    f1: &A,
    f2: &B,
    donor: LorentzianParameters,
    acceptor: LorentzianParameters,
    window: &QuadratureWindow,
) -> Result<ResonanceSummary> {
    let product = |w: f64| (f1.value(w) * f2.value(w)).sqrt();
    let grid: Vec<f64> = (0..GRID_POINTS).map(|k| window.lower + window.width() * k as f64 / (GRID_POINTS - 1) as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&w| product(w)).collect();
    let (imax, &vmax) =
        values.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0))).expect("grid is nonempty");
    if !(vmax > 0.0) {
        return Err(Error::Degenerate("product density vanishes on the whole window".into()));
    }

    let lo = grid[imax.saturating_sub(1)];
    let hi = grid[(imax + 1).min(GRID_POINTS - 1)];
    let peak = golden_max(&product, lo, hi, 1e-10 * window.width());
    let peak_value = product(peak).max(vmax);
    let half = 0.5 * peak_value;

    // Crossings are searched outward from the refined peak, which may lie
    // between grid points when the product is narrower than the grid spacing.
    let ip = grid.partition_point(|&x| x <= peak);
    let left = (0..ip).rev().find(|&k| values[k] < half);
    let right = (ip..GRID_POINTS).find(|&k| values[k] < half);
    let (Some(left), Some(right)) = (left, right) else {
        return Err(Error::Degenerate("product density does not fall to half maximum inside the window".into()));
    };
    let inner_left = if left + 1 < ip { grid[left + 1] } else { peak };
    let inner_right = if right > ip { grid[right - 1] } else { peak };
    let w_left = bisect_level(&product, half, grid[left], inner_left);
    let w_right = bisect_level(&product, half, grid[right], inner_right);

    Ok(ResonanceSummary {
        renorm_donor: donor.frequency,
        renorm_acceptor: acceptor.frequency,
        width_donor: donor.width,
        width_acceptor: acceptor.width,
        resonance_frequency: peak,
        effective_width: 0.5 * (w_right - w_left),
        detuning: (donor.frequency - acceptor.frequency).abs(),
    })
}

/// Golden-section search for a maximum of a unimodal function on `[a, b]`.
pub(crate) fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        if b - a <= f64::EPSILON * a.abs().max(b.abs()) {
            break;
        }
    }
    0.5 * (a + b)
}

/// Point between `below` (f < level) and `above` (f ≥ level) where f crosses `level`.
fn bisect_level<F: Fn(f64) -> f64>(f: &F, level: f64, mut below: f64, mut above: f64) -> f64 {
    for _ in 0..100 {
        let m = 0.5 * (below + above);
        if f(m) < level {
            below = m;
        } else {
            above = m;
        }
    }
    0.5 * (below + above)
}
