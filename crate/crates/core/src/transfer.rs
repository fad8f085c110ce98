//! Phase-limited transfer probability in the Lorentzian approximation and the
//! bouncing-exciton efficiency model.
//!
//! Phase convention: `θ(ω; t₀) = 2 arctan((ω − ω₀)/γ) + (τ(ω) − t₀)(ω − ω₀)`.
//! With this sign the best detection time for a constant propagation time lies
//! after the propagation time, at `t₀ = τ + 1/γ`, where the probability for
//! matched Lorentzians is `4/e²`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_slice, Execution};
use crate::quadrature::{integrate, QuadratureOptions};
use crate::spectral::{overlap_efficiency, Density, QuadratureWindow};

/// Propagation time `τ(ω)` of a wave packet centred at `ω` (internal time units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PropagationTime {
    Constant {
        tau: f64,
    },
    /// `τ(ω) = τ₀ + κ (ω − ω₀)²`.
    Quadratic {
        tau0: f64,
        kappa: f64,
    },
}

impl PropagationTime {
    pub fn base(&self) -> f64 {
        match *self {
            PropagationTime::Constant { tau } => tau,
            PropagationTime::Quadratic { tau0, .. } => tau0,
        }
    }

    fn at(&self, detuning: f64) -> f64 {
        match *self {
            PropagationTime::Constant { tau } => tau,
            PropagationTime::Quadratic { tau0, kappa } => tau0 + kappa * detuning * detuning,
        }
    }

    fn with_kappa(self, kappa: f64) -> Self {
        PropagationTime::Quadratic { tau0: self.base(), kappa }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseModel {
    pub resonance_frequency: f64,
    pub width: f64,
    pub propagation: PropagationTime,
    pub arrival_time: f64,
}

impl PhaseModel {
    pub fn new(resonance_frequency: f64, width: f64, propagation: PropagationTime, arrival_time: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::Parameter(format!("phase model width must be positive, got {width}")));
        }
        if propagation.base() < 0.0 {
            return Err(Error::Parameter("propagation time must be nonnegative".into()));
        }
        if !(resonance_frequency.is_finite() && arrival_time.is_finite()) {
            return Err(Error::Parameter("phase model parameters must be finite".into()));
        }
        Ok(Self { resonance_frequency, width, propagation, arrival_time })
    }

    /// `θ(ω; t₀)` in radians.
    pub fn phase(&self, omega: f64) -> f64 {
        let x = omega - self.resonance_frequency;
        2.0 * (x / self.width).atan() + (self.propagation.at(x) - self.arrival_time) * x
    }
}

/// Number of initial pieces so that each spans at most about π of phase.
fn oscillation_pieces<P: Fn(f64) -> f64>(phase: &P, window: &QuadratureWindow) -> usize {
    const SAMPLES: usize = 4000;
    let mut total = 0.0;
    let mut prev = phase(window.lower);
    for k in 1..=SAMPLES {
        let w = window.lower + window.width() * k as f64 / SAMPLES as f64;
        let th = phase(w);
        total += (th - prev).abs();
        prev = th;
    }
    ((total / std::f64::consts::PI).ceil() as usize).clamp(32, 1_000_000)
}

/// `|∫ e^{iθ(ω)} √(f₁f₂) dω|²` over the window for an arbitrary phase `θ`.
pub fn phased_overlap<A, B, P>(f1: &A, f2: &B, phase: P, window: &QuadratureWindow, features: &[f64]) -> Result<f64>
where
    A: Density,
    B: Density,
    P: Fn(f64) -> f64,
{
    let pieces = oscillation_pieces(&phase, window);
    let options = QuadratureOptions::default()
        .with_absolute_tolerance(window.tolerance)
        .with_initial_pieces(pieces)
        .with_max_intervals(pieces * 8 + 20_000);
    let mut points = f1.features();
    points.extend(f2.features());
    points.extend_from_slice(features);
    points.sort_by(f64::total_cmp);
    let amplitude: Complex64 = integrate(
        |w| Complex64::from_polar((f1.value(w) * f2.value(w)).sqrt(), phase(w)),
        window.lower,
        window.upper,
        &points,
        &options,
    )?
    .value;
    Ok(amplitude.norm_sqr().min(1.0))
}

/// `|∫ e^{iθ(ω;t₀)} √(f₁f₂) dω|²` over the window.
pub fn transfer_probability<A: Density, B: Density>(
    f1: &A,
    f2: &B,
    model: &PhaseModel,
    window: &QuadratureWindow,
) -> Result<f64> {
    phased_overlap(f1, f2, |w| model.phase(w), window, &[model.resonance_frequency])
}

/// Search settings for the detection-time optimization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrivalSearch {
    pub resonance_frequency: f64,
    pub width: f64,
    /// For the quadratic family the `kappa` stored here is ignored when a
    /// `kappa_range` is given.
    pub propagation: PropagationTime,
    /// Default `[τ₀ − 10/γ, τ₀ + 10/γ]`.
    pub bracket: Option<(f64, f64)>,
    /// Range over which `κ` is optimized jointly with `t₀` (quadratic family only).
    pub kappa_range: Option<(f64, f64)>,
    pub execution: Execution,
}

impl ArrivalSearch {
    pub fn new(resonance_frequency: f64, width: f64, propagation: PropagationTime) -> Self {
        Self { resonance_frequency, width, propagation, bracket: None, kappa_range: None, execution: Execution::default() }
    }

    pub fn with_kappa_range(mut self, lower: f64, upper: f64) -> Self {
        self.kappa_range = Some((lower, upper));
        self
    }

    pub fn with_bracket(mut self, lower: f64, upper: f64) -> Self {
        self.bracket = Some((lower, upper));
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    /// Default κ range, `[−1, 1]/γ³`.
    pub fn default_kappa_range(width: f64) -> (f64, f64) {
        let k = 1.0 / width.powi(3);
        (-k, k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArrivalOptimum {
    pub arrival_time: f64,
    pub probability: f64,
    pub kappa: Option<f64>,
    pub overlap: f64,
    /// `probability / overlap`.
    pub phase_factor: f64,
    /// Whether the probability sampled on the `t₀` grid was unimodal.
    pub unimodal: bool,
}

const T0_GRID: usize = 41;

/// Maximizes the transfer probability over the detection time `t₀` (and over
/// `κ` when a range is given for the quadratic propagation-time family).
pub fn optimize_arrival<A: Density, B: Density>(
    f1: &A,
    f2: &B,
    search: &ArrivalSearch,
    window: &QuadratureWindow,
) -> Result<ArrivalOptimum> {
    let width = search.width;
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::Parameter(format!("width must be positive, got {width}")));
    }
    let base = search.propagation.base();
    let (lo, hi) = search.bracket.unwrap_or((base - 10.0 / width, base + 10.0 / width));
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Parameter(format!("arrival-time bracket [{lo}, {hi}] is degenerate")));
    }
    let overlap = overlap_efficiency(f1, f2, window)?;
    let tolerance = 1e-4 / width;

    let inner = |propagation: PropagationTime| -> Result<(f64, f64, bool)> {
        let probability = |t0: f64| -> Result<f64> {
            let model = PhaseModel::new(search.resonance_frequency, width, propagation, t0)?;
            transfer_probability(f1, f2, &model, window)
        };
        let grid: Vec<f64> = (0..T0_GRID).map(|k| lo + (hi - lo) * k as f64 / (T0_GRID - 1) as f64).collect();
        let values = grid.iter().map(|&t| probability(t)).collect::<Result<Vec<f64>>>()?;
        let unimodal = is_unimodal(&values);
        let best = argmax(&values);
        let a = grid[best.saturating_sub(1)];
        let b = grid[(best + 1).min(T0_GRID - 1)];
        let (t, p) = golden_max_fallible(&probability, a, b, tolerance)?;
        if p >= values[best] {
            Ok((t, p, unimodal))
        } else {
            Ok((grid[best], values[best], unimodal))
        }
    };

    let (arrival_time, probability, kappa, unimodal) = match (search.propagation, search.kappa_range) {
        (PropagationTime::Quadratic { .. }, Some((klo, khi))) => {
            if !(klo.is_finite() && khi.is_finite() && klo < khi) {
                return Err(Error::Parameter(format!("kappa range [{klo}, {khi}] is degenerate")));
            }
            let kappas = kappa_grid(klo, khi);
            let results = map_slice(search.execution, &kappas, |&k| inner(search.propagation.with_kappa(k)));
            let scores: Vec<f64> = results.iter().map(|r| r.as_ref().map_or(f64::NEG_INFINITY, |v| v.1)).collect();
            let best = argmax(&scores);
            if scores[best] == f64::NEG_INFINITY {
                return Err(results.into_iter().next().expect("grid is nonempty").unwrap_err());
            }
            let a = kappas[best.saturating_sub(1)];
            let b = kappas[(best + 1).min(kappas.len() - 1)];
            let score = |k: f64| inner(search.propagation.with_kappa(k)).map(|r| r.1);
            let (k, _) = golden_max_fallible(&score, a, b, 1e-3 * (b - a).max(f64::MIN_POSITIVE))?;
            let refined = inner(search.propagation.with_kappa(k))?;
            let (kk, (t, p, u)) = if refined.1 >= scores[best] {
                (k, refined)
            } else {
                let r = results[best].as_ref().expect("best score is finite");
                (kappas[best], *r)
            };
            (t, p, Some(kk), u)
        }
        (propagation, _) => {
            let (t, p, u) = inner(propagation)?;
            let kappa = match propagation {
                PropagationTime::Quadratic { kappa, .. } => Some(kappa),
                PropagationTime::Constant { .. } => None,
            };
            (t, p, kappa, u)
        }
    };

    let phase_factor = if overlap > 0.0 { (probability / overlap).min(1.0) } else { 0.0 };
    Ok(ArrivalOptimum { arrival_time, probability, kappa, overlap, phase_factor, unimodal })
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Nondecreasing then nonincreasing, up to a small absolute slack.
fn is_unimodal(values: &[f64]) -> bool {
    const SLACK: f64 = 1e-9;
    let peak = argmax(values);
    values[..=peak].windows(2).all(|w| w[1] >= w[0] - SLACK) && values[peak..].windows(2).all(|w| w[1] <= w[0] + SLACK)
}

/// Zero, a uniform grid and a symmetric geometric grid clustered around zero.
fn kappa_grid(lower: f64, upper: f64) -> Vec<f64> {
    let scale = lower.abs().max(upper.abs());
    let mut grid: Vec<f64> = (0..=10).map(|k| lower + (upper - lower) * k as f64 / 10.0).collect();
    if lower <= 0.0 && upper >= 0.0 {
        grid.push(0.0);
        for k in 0..10 {
            let m = scale * 10f64.powf(-4.0 + 4.0 * k as f64 / 10.0);
            grid.push(m);
            grid.push(-m);
        }
    }
    grid.retain(|k| *k >= lower && *k <= upper);
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * scale);
    grid
}

fn golden_max_fallible<F>(f: &F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

/// `p = 𝓕 × phase factor`.
pub fn single_shot_probability(overlap: f64, phase_factor: f64) -> Result<f64> {
    for (name, v) in [("overlap", overlap), ("phase factor", phase_factor)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Parameter(format!("{name} must lie in [0, 1], got {v}")));
        }
    }
    Ok(overlap * phase_factor)
}

/// Per-shot dissipation probability `p` and per-flight recombination probability `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BounceParameters {
    pub p: f64,
    pub q: f64,
}

impl BounceParameters {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        for (name, v) in [("p", p), ("q", q)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Parameter(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(Self { p, q })
    }

    /// Probability of surviving one flight and being reflected by the acceptor.
    fn round_trip(&self) -> f64 {
        (1.0 - self.q).powi(2) * (1.0 - self.p)
    }
}

/// Efficiency after `n` bounces,
/// `η(n) = p(1−q) (1 − [(1−q)²(1−p)]ⁿ) / (1 − (1−q)²(1−p))`.
pub fn bounce_efficiency(bp: &BounceParameters, n: u64) -> f64 {
    let x = bp.round_trip();
    let first = bp.p * (1.0 - bp.q);
    if first == 0.0 || n == 0 {
        return 0.0;
    }
    // 1 − xⁿ computed without cancellation for x close to 1.
    let n = n.min(i32::MAX as u64) as f64;
    let numerator = -(n * x.ln()).exp_m1();
    let denominator = 1.0 - x;
    if denominator == 0.0 {
        return first * n;
    }
    (first * numerator / denominator).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticEfficiency {
    /// `p(1−q) / (1 − (1−q)²(1−p))`.
    pub exact: f64,
    /// `1 − q[1 + 2(1−p)/p]`, first order in `q`.
    pub first_order: f64,
}

pub fn asymptotic_efficiency(bp: &BounceParameters) -> Result<AsymptoticEfficiency> {
    if bp.p == 0.0 {
        return Err(Error::Domain("asymptotic efficiency needs p > 0 (no dissipation channel)".into()));
    }
    let exact = (bp.p * (1.0 - bp.q) / (1.0 - bp.round_trip())).min(1.0);
    let first_order = 1.0 - bp.q * (1.0 + 2.0 * (1.0 - bp.p) / bp.p);
    Ok(AsymptoticEfficiency { exact, first_order })
}

/// Per-flight recombination probability `q ≈ flight time / recombination time`.
pub fn recombination_probability(flight_time: f64, tau_recombination: f64) -> Result<f64> {
    if !(flight_time >= 0.0 && tau_recombination > 0.0) {
        return Err(Error::Parameter("flight time must be nonnegative and recombination time positive".into()));
    }
    Ok((flight_time / tau_recombination).min(1.0))
}
