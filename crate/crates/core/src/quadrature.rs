//! Globally adaptive Gauss–Kronrod (7/15) quadrature on a finite interval.
//!
//! The interval is first split at caller-supplied breakpoints (peak locations)
//! and into a number of equal pieces, then the piece with the largest error
//! estimate is bisected until the summed estimate meets the tolerance. The
//! final value is a pairwise sum over pieces in ascending position, so the
//! result does not depend on the order in which pieces were refined.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

// Gauss–Kronrod 7/15 nodes and weights as tabulated, to more digits than f64 holds.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5] and the centre.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Values that can be integrated: real or complex.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub absolute_tolerance: f64,
    pub relative_tolerance: f64,
    pub max_intervals: usize,
    /// Equal pieces the window is cut into before adaptive refinement.
    pub initial_pieces: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { absolute_tolerance: 1e-9, relative_tolerance: 0.0, max_intervals: 20_000, initial_pieces: 16 }
    }
}

impl QuadratureOptions {
    pub fn with_absolute_tolerance(mut self, tol: f64) -> Self {
        self.absolute_tolerance = tol;
        self
    }

    pub fn with_max_intervals(mut self, n: usize) -> Self {
        self.max_intervals = n;
        self
    }

    pub fn with_initial_pieces(mut self, n: usize) -> Self {
        self.initial_pieces = n.max(1);
        self
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Integral<T> {
    pub value: T,
    pub error: f64,
    pub intervals: usize,
}

struct Piece<T> {
    lower: f64,
    upper: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Piece<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T> Eq for Piece<T> {}

impl<T> PartialOrd for Piece<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T> Ord for Piece<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then_with(|| other.lower.total_cmp(&self.lower))
    }
}

fn kronrod<T: QuadValue, F: Fn(f64) -> T>(f: &F, lower: f64, upper: f64) -> (T, f64) {
    let centre = 0.5 * (lower + upper);
    let half = 0.5 * (upper - lower);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (i, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(centre - dx) + f(centre + dx);
        kronrod = kronrod + pair * w;
        if i % 2 == 1 {
            gauss = gauss + pair * WG[i / 2];
        }
    }
    let value = kronrod * half;
    let error = (kronrod - gauss).magnitude() * half.abs();
    (value, error)
}

fn pairwise_sum<T: QuadValue>(values: &[T]) -> T {
    match values.len() {
        0 => T::zero(),
        1 => values[0],
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Integrates `f` over `[lower, upper]`.
///
/// `breakpoints` outside the open interval are ignored.
pub fn integrate<T, F>(f: F, lower: f64, upper: f64, breakpoints: &[f64], options: &QuadratureOptions) -> Result<Integral<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    if !(lower.is_finite() && upper.is_finite()) || lower >= upper {
        return Err(Error::Parameter(format!("integration bounds [{lower}, {upper}] are not a finite interval")));
    }

    let mut cuts: Vec<f64> = Vec::with_capacity(breakpoints.len() + options.initial_pieces + 1);
    let pieces = options.initial_pieces.max(1);
    let width = upper - lower;
    for k in 0..=pieces {
        cuts.push(lower + width * k as f64 / pieces as f64);
    }
    cuts.extend(breakpoints.iter().copied().filter(|&b| b.is_finite() && b > lower && b < upper));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * width);
    *cuts.last_mut().expect("at least two cuts") = upper;
    cuts[0] = lower;

    let mut heap = BinaryHeap::with_capacity(cuts.len() * 4);
    let mut total_error = 0.0;
    let mut total_value = T::zero();
    for w in cuts.windows(2) {
        let (value, error) = kronrod(&f, w[0], w[1]);
        total_error += error;
        total_value = total_value + value;
        heap.push(Piece { lower: w[0], upper: w[1], value, error });
    }

    let tolerance = |v: &T| options.absolute_tolerance.max(options.relative_tolerance * v.magnitude());
    while total_error > tolerance(&total_value) {
        if heap.len() >= options.max_intervals {
            return Err(Error::Quadrature { achieved: total_error, requested: tolerance(&total_value) });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lower + worst.upper);
        if mid <= worst.lower || mid >= worst.upper {
            // Interval cannot be split further in floating point.
            return Err(Error::Quadrature { achieved: total_error, requested: tolerance(&total_value) });
        }
        let (left, left_err) = kronrod(&f, worst.lower, mid);
        let (right, right_err) = kronrod(&f, mid, worst.upper);
        total_error += left_err + right_err - worst.error;
        total_value = total_value + left + right - worst.value;
        heap.push(Piece { lower: worst.lower, upper: mid, value: left, error: left_err });
        heap.push(Piece { lower: mid, upper: worst.upper, value: right, error: right_err });
    }

    let mut pieces: Vec<Piece<T>> = heap.into_vec();
    pieces.sort_by(|a, b| a.lower.total_cmp(&b.lower));
    let values: Vec<T> = pieces.iter().map(|p| p.value).collect();
    let errors: Vec<f64> = pieces.iter().map(|p| p.error).collect();
    Ok(Integral { value: pairwise_sum(&values), error: pairwise_sum(&errors), intervals: pieces.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x: f64| x.powi(5) - 3.0 * x * x, -1.0, 2.0, &[], &QuadratureOptions::default()).unwrap();
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((r.value - exact).abs() < 1e-13);
    }

    #[test]
    fn narrow_lorentzian_with_breakpoint() {
        let g = 0.01;
        let f = |x: f64| g / PI / (x * x + g * g);
        let r = integrate(f, -50.0, 50.0, &[0.0], &QuadratureOptions::default()).unwrap();
        let exact = 2.0 / PI * (50.0 / g).atan();
        assert!((r.value - exact).abs() < 1e-9, "{} vs {}", r.value, exact);
    }

    #[test]
    fn complex_oscillation() {
        let r: Integral<Complex64> =
            integrate(|x: f64| Complex64::new(0.0, 40.0 * x).exp(), 0.0, 1.0, &[], &QuadratureOptions::default()).unwrap();
        let exact = (Complex64::new(0.0, 40.0).exp() - 1.0) / Complex64::new(0.0, 40.0);
        assert!((r.value - exact).norm() < 1e-10);
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let opts = QuadratureOptions::default().with_max_intervals(20).with_initial_pieces(1);
        let err = integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, &[], &opts).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }

    #[test]
    fn rejects_empty_interval() {
        assert!(integrate(|x: f64| x, 1.0, 1.0, &[], &QuadratureOptions::default()).is_err());
    }
}
