use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureOptions};

use super::QuadratureWindow;

/// Overlaps in `(1, 1 + OVERLAP_CLAMP]` are reported as 1.
pub const OVERLAP_CLAMP: f64 = 1e-6;

/// A nonnegative spectral density on the real frequency axis.
pub trait Density: Sync {
    fn value(&self, omega: f64) -> f64;

    /// Frequencies near which the density has structure; used to seed quadrature.
    fn features(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl<D: Density + ?Sized> Density for &D {
    fn value(&self, omega: f64) -> f64 {
        (**self).value(omega)
    }

    fn features(&self) -> Vec<f64> {
        (**self).features()
    }
}

/// Lorentzian of unit area on the real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lorentzian {
    pub center: f64,
    pub width: f64,
}

impl Lorentzian {
    pub fn new(center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite() && center.is_finite()) {
            return Err(Error::Parameter(format!(
                "Lorentzian needs a finite centre and positive width, got ({center}, {width})"
            )));
        }
        Ok(Self { center, width })
    }
}

impl Density for Lorentzian {
    fn value(&self, omega: f64) -> f64 {
        let x = omega - self.center;
        self.width / (PI * (x * x + self.width * self.width))
    }

    fn features(&self) -> Vec<f64> {
        vec![self.center - self.width, self.center, self.center + self.width]
    }
}

/// A density rescaled to unit mass over a window.
#[derive(Debug, Clone)]
pub struct NormalizedDensity<D> {
    inner: D,
    scale: f64,
    mass: f64,
    extra_features: Vec<f64>,
}

impl<D: Density> NormalizedDensity<D> {
    /// Wraps a density that is already normalized (e.g. an analytic Lorentzian).
    pub fn assume_normalized(inner: D) -> Self {
        Self { inner, scale: 1.0, mass: 1.0, extra_features: Vec::new() }
    }

    /// Mass of the raw density over the window it was normalized on.
    pub fn raw_mass(&self) -> f64 {
        self.mass
    }

    pub fn inner(&self) -> &D {
        &self.inner
    }

    pub fn with_features(mut self, features: impl IntoIterator<Item = f64>) -> Self {
        self.extra_features.extend(features);
        self
    }
}

impl<D: Density> Density for NormalizedDensity<D> {
    fn value(&self, omega: f64) -> f64 {
        self.scale * self.inner.value(omega)
    }

    fn features(&self) -> Vec<f64> {
        let mut f = self.inner.features();
        f.extend_from_slice(&self.extra_features);
        f
    }
}

pub(crate) fn window_options(window: &QuadratureWindow) -> QuadratureOptions {
    QuadratureOptions::default().with_absolute_tolerance(window.tolerance).with_initial_pieces(32)
}

/// Rescales `density` so that it integrates to one over `window`.
pub fn normalize_density<D: Density>(density: D, window: &QuadratureWindow) -> Result<NormalizedDensity<D>> {
    let features = density.features();
    let mass = integrate(|w| density.value(w), window.lower, window.upper, &features, &window_options(window))?.value;
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::Degenerate(format!("density integrates to {mass} over [{}, {}]", window.lower, window.upper)));
    }
    Ok(NormalizedDensity { inner: density, scale: 1.0 / mass, mass, extra_features: Vec::new() })
}

/// `[∫ √(f₁ f₂) dω]²` over the window.
pub fn overlap_efficiency<A: Density, B: Density>(f1: &A, f2: &B, window: &QuadratureWindow) -> Result<f64> {
    let mut features = f1.features();
    features.extend(f2.features());
    // The integrand is symmetric in f₁, f₂; sorting keeps the subdivision symmetric too.
    features.sort_by(f64::total_cmp);
    let amplitude =
        integrate(|w| (f1.value(w) * f2.value(w)).sqrt(), window.lower, window.upper, &features, &window_options(window))?.value;
    let overlap = amplitude * amplitude;
    if overlap > 1.0 + OVERLAP_CLAMP {
        return Err(Error::Overshoot { value: overlap });
    }
    Ok(overlap.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    struct Scaled(Lorentzian, f64);

    impl Density for Scaled {
        fn value(&self, w: f64) -> f64 {
            self.1 * self.0.value(w)
        }
    }

    #[test]
    fn normalized_lorentzian_inside_window() {
        let l = Lorentzian::new(0.0, 1.0).unwrap();
        let window = QuadratureWindow::new(-1e6, 1e6, 1e-9).unwrap();
        let n = normalize_density(l, &window).unwrap();
        assert_relative_eq!(n.raw_mass(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn normalization_is_scale_invariant() {
        let l = Lorentzian::new(3.0, 2.0).unwrap();
        let window = QuadratureWindow::new(-60.0, 60.0, 1e-9).unwrap();
        let a = normalize_density(l, &window).unwrap();
        let b = normalize_density(Scaled(l, 7.0), &window).unwrap();
        for w in [-50.0, -1.0, 3.0, 4.5, 30.0] {
            assert_relative_eq!(a.value(w), b.value(w), max_relative = 1e-12);
        }
    }

    #[test]
    fn vanishing_density_is_degenerate() {
        let window = QuadratureWindow::new(-1.0, 1.0, 1e-9).unwrap();
        let zero = Scaled(Lorentzian::new(0.0, 1.0).unwrap(), 0.0);
        assert!(matches!(normalize_density(zero, &window), Err(Error::Degenerate(_))));
    }

    #[test]
    fn identical_densities_overlap_fully() {
        let window = QuadratureWindow::new(-200.0, 200.0, 1e-9).unwrap();
        let f = normalize_density(Lorentzian::new(5.0, 4.0).unwrap(), &window).unwrap();
        let overlap = overlap_efficiency(&f, &f, &window).unwrap();
        assert!((overlap - 1.0).abs() < 1e-6);
    }

    #[test]
    fn overshoot_is_an_error() {
        let window = QuadratureWindow::new(-200.0, 200.0, 1e-9).unwrap();
        let f = Scaled(Lorentzian::new(0.0, 1.0).unwrap(), 1.5);
        assert!(matches!(overlap_efficiency(&f, &f, &window), Err(Error::Overshoot { .. })));
    }
}
