//! Parameter search for the overlap efficiency: seeded random sampling,
//! simplex refinement, landscape sweeps over the sink parameters and the
//! temperature dependence of the optimum.

mod simplex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, map_slice, Execution};
use crate::network::ExcitonNetwork;
use crate::pipeline::{evaluate_objective, ModelOptions, ParameterVector};

pub use simplex::{minimize_box, SimplexOptions, SimplexResult};

/// Closed interval `[lower, upper]`; `lower == upper` pins a coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub const fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper }
    }

    pub const fn point(value: f64) -> Self {
        Self { lower: value, upper: value }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    fn is_valid(&self) -> bool {
        self.lower.is_finite() && self.upper.is_finite() && self.lower <= self.upper
    }
}

/// Sampling box for the free parameters (cm⁻¹).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterBounds {
    pub omega8_range: Interval,
    /// Applied to every decoherence rate unless `rate_ranges` is given.
    pub gamma_range: Interval,
    pub h28_range: Interval,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_ranges: Option<Vec<Interval>>,
}

impl Default for ParameterBounds {
    fn default() -> Self {
        Self {
            omega8_range: Interval::new(-500.0, 0.0),
            gamma_range: Interval::new(50.0, 90.0),
            h28_range: Interval::new(0.0, 600.0),
            rate_ranges: None,
        }
    }
}

impl ParameterBounds {
    /// Degenerate box containing exactly `params`.
    pub fn pinned_at(params: &ParameterVector) -> Self {
        let lo = params.rates.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = params.rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self {
            omega8_range: Interval::point(params.sink_energy),
            gamma_range: Interval::new(lo, hi),
            h28_range: Interval::point(params.sink_coupling),
            rate_ranges: Some(params.rates.iter().map(|&r| Interval::point(r)).collect()),
        }
    }

    pub fn validate(&self, n_rates: usize) -> Result<()> {
        for (name, iv) in [("omega8", self.omega8_range), ("gamma", self.gamma_range), ("h28", self.h28_range)] {
            if !iv.is_valid() {
                return Err(Error::Parameter(format!("{name} range [{}, {}] is empty", iv.lower, iv.upper)));
            }
        }
        let rates = self.rate_intervals(n_rates);
        if rates.len() != n_rates {
            return Err(Error::Parameter(format!("{} rate ranges given for {n_rates} rates", rates.len())));
        }
        if rates.iter().any(|iv| !iv.is_valid() || iv.lower <= 0.0) {
            return Err(Error::Parameter("rate ranges must be nonempty and strictly positive".into()));
        }
        Ok(())
    }

    fn rate_intervals(&self, n_rates: usize) -> Vec<Interval> {
        match &self.rate_ranges {
            Some(r) => r.clone(),
            None => vec![self.gamma_range; n_rates],
        }
    }

    /// Per-coordinate intervals in the flat layout of [`ParameterVector::to_vec`].
    pub fn coordinates(&self, n_rates: usize) -> Vec<Interval> {
        let mut c = self.rate_intervals(n_rates);
        c.push(self.omega8_range);
        c.push(self.h28_range);
        c
    }

    pub fn contains(&self, params: &ParameterVector) -> bool {
        self.coordinates(params.rates.len()).iter().zip(params.to_vec()).all(|(iv, v)| v >= iv.lower && v <= iv.upper)
    }
}

/// Uniform independent draw of every coordinate.
pub fn sample_parameters<R: Rng + ?Sized>(bounds: &ParameterBounds, n_rates: usize, rng: &mut R) -> ParameterVector {
    let values: Vec<f64> = bounds
        .coordinates(n_rates)
        .iter()
        .map(|iv| {
            let u: f64 = rng.random();
            (iv.lower + iv.width() * u).clamp(iv.lower, iv.upper)
        })
        .collect();
    ParameterVector::from_slice(&values).expect("bounds produce at least three coordinates")
}

/// Generator for sample `index` of a seeded search; independent of evaluation order.
pub fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Sampled,
    Refined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchRecord {
    pub parameters: ParameterVector,
    pub objective: f64,
    pub seed: u64,
    pub evaluations: usize,
    pub failed_evaluations: usize,
    pub provenance: Provenance,
    /// Index of the originating random sample.
    pub sample_index: Option<usize>,
    /// Coordinates sitting on a bound of the search box.
    pub boundary_contacts: Vec<String>,
}

/// One random-search evaluation; `objective` is `None` when it failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRow {
    pub index: usize,
    pub parameters: ParameterVector,
    pub objective: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub best: SearchRecord,
    /// Best samples, highest objective first (ties: lower index first).
    pub top: Vec<SearchRecord>,
    /// Refinements of `top`, in the same order.
    pub refined: Vec<SearchRecord>,
    pub samples: Vec<SampleRow>,
    pub failed_evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub model: ModelOptions,
    pub execution: Execution,
    pub top_k: usize,
    pub refine: bool,
    pub simplex: SimplexOptions,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            model: ModelOptions::default(),
            execution: Execution::default(),
            top_k: 10,
            refine: true,
            simplex: SimplexOptions::default(),
        }
    }
}

fn coordinate_names(n_rates: usize) -> Vec<String> {
    let mut names: Vec<String> = (0..n_rates).map(|k| format!("gamma_{}", k + 3)).collect();
    names.push("sink_energy".into());
    names.push("sink_coupling".into());
    names
}

fn boundary_contacts(bounds: &ParameterBounds, params: &ParameterVector) -> Vec<String> {
    let n = params.rates.len();
    bounds
        .coordinates(n)
        .iter()
        .zip(params.to_vec())
        .zip(coordinate_names(n))
        .filter(|((iv, v), _)| {
            let slack = 1e-6 * iv.width().max(1e-300);
            iv.width() > 0.0 && ((*v - iv.lower).abs() <= slack || (iv.upper - *v).abs() <= slack)
        })
        .map(|(_, name)| name)
        .collect()
}

/// Best of `budget` uniform samples.
///
/// Sample `i` is drawn from [`sample_rng`]`(seed, i)`, so the outcome does
/// not depend on how evaluations are scheduled. Failed evaluations are
/// skipped, not scored.
pub fn random_search(
    net: &ExcitonNetwork,
    bounds: &ParameterBounds,
    budget: usize,
    seed: u64,
    options: &SearchOptions,
) -> Result<SearchOutcome> {
    if budget == 0 {
        return Err(Error::Parameter("search budget must be at least 1".into()));
    }
    let n_rates = net.n_bath();
    bounds.validate(n_rates)?;

    let samples: Vec<SampleRow> = map_indexed(options.execution, budget, |index| {
        let parameters = sample_parameters(bounds, n_rates, &mut sample_rng(seed, index));
        let objective = evaluate_objective(net, &parameters, &options.model).ok();
        SampleRow { index, parameters, objective }
    });
    let failed = samples.iter().filter(|s| s.objective.is_none()).count();

    let mut ranked: Vec<&SampleRow> = samples.iter().filter(|s| s.objective.is_some()).collect();
    if ranked.is_empty() {
        return Err(Error::SearchFailed(budget));
    }
    ranked.sort_by(|a, b| b.objective.unwrap().total_cmp(&a.objective.unwrap()).then(a.index.cmp(&b.index)));
    let record = |s: &SampleRow| SearchRecord {
        parameters: s.parameters.clone(),
        objective: s.objective.unwrap(),
        seed,
        evaluations: budget,
        failed_evaluations: failed,
        provenance: Provenance::Sampled,
        sample_index: Some(s.index),
        boundary_contacts: boundary_contacts(bounds, &s.parameters),
    };
    let top: Vec<SearchRecord> = ranked.iter().take(options.top_k.max(1)).map(|s| record(s)).collect();
    let best = top[0].clone();
    Ok(SearchOutcome { best, top, refined: Vec::new(), samples, failed_evaluations: failed })
}

/// Box-projected simplex ascent of `𝓕` from `start`.
pub fn refine_local(
    net: &ExcitonNetwork,
    start: &ParameterVector,
    bounds: &ParameterBounds,
    model: &ModelOptions,
    simplex: &SimplexOptions,
) -> Result<SearchRecord> {
    let n_rates = start.rates.len();
    bounds.validate(n_rates)?;
    if !bounds.contains(start) {
        return Err(Error::Parameter("refinement start lies outside the bounds".into()));
    }
    let coords = bounds.coordinates(n_rates);
    let origin = start.to_vec();
    let active: Vec<usize> = (0..coords.len()).filter(|&k| coords[k].width() > 0.0).collect();

    let to_params = |u: &[f64]| -> ParameterVector {
        let mut x = origin.clone();
        for (&k, &v) in active.iter().zip(u) {
            x[k] = (coords[k].lower + v * coords[k].width()).clamp(coords[k].lower, coords[k].upper);
        }
        ParameterVector::from_slice(&x).expect("layout preserved")
    };
    let u0: Vec<f64> = active.iter().map(|&k| (origin[k] - coords[k].lower) / coords[k].width()).collect();

    let mut failed = 0usize;
    let result = minimize_box(
        |u| match evaluate_objective(net, &to_params(u), model) {
            Ok(v) => -v,
            Err(_) => {
                failed += 1;
                f64::INFINITY
            }
        },
        &u0,
        simplex,
    );
    if !result.value.is_finite() {
        return Err(Error::SearchFailed(result.evaluations));
    }
    let parameters = to_params(&result.point);
    Ok(SearchRecord {
        boundary_contacts: boundary_contacts(bounds, &parameters),
        parameters,
        objective: -result.value,
        seed: simplex.seed,
        evaluations: result.evaluations,
        failed_evaluations: failed,
        provenance: Provenance::Refined,
        sample_index: None,
    })
}

/// Random search followed (optionally) by simplex refinement of the top candidates.
pub fn optimize(
    net: &ExcitonNetwork,
    bounds: &ParameterBounds,
    budget: usize,
    seed: u64,
    options: &SearchOptions,
) -> Result<SearchOutcome> {
    let mut outcome = random_search(net, bounds, budget, seed, options)?;
    if !options.refine {
        return Ok(outcome);
    }
    let refined = map_slice(options.execution, &outcome.top, |candidate| {
        let simplex = SimplexOptions { seed: seed ^ candidate.sample_index.unwrap_or(0) as u64, ..options.simplex };
        refine_local(net, &candidate.parameters, bounds, &options.model, &simplex).map(|mut r| {
            r.sample_index = candidate.sample_index;
            r
        })
    });
    outcome.refined = refined.into_iter().filter_map(Result::ok).collect();
    if let Some(best) = outcome.refined.iter().fold(None::<&SearchRecord>, |acc, r| match acc {
        Some(a) if a.objective >= r.objective => Some(a),
        _ => Some(r),
    }) {
        if best.objective > outcome.best.objective {
            outcome.best = best.clone();
        }
    }
    Ok(outcome)
}

/// `𝓕` on the `h28 × omega8` grid. Row `i` belongs to `h28[i]`, column `j` to `omega8[j]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepGrid {
    pub h28: Vec<f64>,
    pub omega8: Vec<f64>,
    /// Row-major; `None` marks a failed evaluation.
    pub values: Vec<Option<f64>>,
}

impl SweepGrid {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values[i * self.omega8.len() + j]
    }

    /// `(i, j, 𝓕)` of the largest successful cell; ties go to the first in row-major order.
    pub fn argmax(&self) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (k, v) in self.values.iter().enumerate() {
            if let Some(v) = *v {
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((k, v));
                }
            }
        }
        best.map(|(k, v)| (k / self.omega8.len(), k % self.omega8.len(), v))
    }
}

pub fn grid_sweep(
    net: &ExcitonNetwork,
    h28: &[f64],
    omega8: &[f64],
    rates: &[f64],
    model: &ModelOptions,
    execution: Execution,
) -> Result<SweepGrid> {
    if h28.is_empty() || omega8.is_empty() {
        return Err(Error::Parameter("sweep grids must be nonempty".into()));
    }
    let cols = omega8.len();
    let values = map_indexed(execution, h28.len() * cols, |k| {
        let params = ParameterVector::new(rates.to_vec(), omega8[k % cols], h28[k / cols]);
        evaluate_objective(net, &params, model).ok()
    });
    Ok(SweepGrid { h28: h28.to_vec(), omega8: omega8.to_vec(), values })
}

/// Rates proportional to temperature, `Γ(T) = Γ(T₀) · T/T₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperatureModel {
    pub reference_temperature: f64,
    pub reference: ParameterVector,
}

impl TemperatureModel {
    /// Temperature at which the sampled decoherence rates were calibrated, K.
    pub const DEFAULT_REFERENCE_TEMPERATURE: f64 = 77.0;

    pub fn new(reference_temperature: f64, reference: ParameterVector) -> Result<Self> {
        if !(reference_temperature > 0.0 && reference_temperature.is_finite()) {
            return Err(Error::Domain(format!("reference temperature must be positive, got {reference_temperature}")));
        }
        if reference.rates.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::Parameter("reference rates must be positive".into()));
        }
        Ok(Self { reference_temperature, reference })
    }

    pub fn parameters_at(&self, temperature: f64) -> Result<ParameterVector> {
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::Domain(format!("temperature must be positive, got {temperature}")));
        }
        Ok(self.reference.with_scaled_rates(temperature / self.reference_temperature))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TemperaturePoint {
    pub temperature: f64,
    pub overlap: Option<f64>,
}

pub fn temperature_sweep(
    net: &ExcitonNetwork,
    model: &TemperatureModel,
    temperatures: &[f64],
    options: &ModelOptions,
    execution: Execution,
) -> Result<Vec<TemperaturePoint>> {
    let params = temperatures.iter().map(|&t| model.parameters_at(t)).collect::<Result<Vec<_>>>()?;
    Ok(map_indexed(execution, temperatures.len(), |k| TemperaturePoint {
        temperature: temperatures[k],
        overlap: evaluate_objective(net, &params[k], options).ok(),
    }))
}

/// `n` evenly spaced points from `lower` to `upper` inclusive.
pub fn linear_grid(lower: f64, upper: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lower],
        _ => (0..n).map(|k| lower + (upper - lower) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// `n` geometrically spaced points from `lower` to `upper` inclusive (both > 0).
pub fn geometric_grid(lower: f64, upper: f64, n: usize) -> Vec<f64> {
    linear_grid(lower.ln(), upper.ln(), n).into_iter().map(f64::exp).collect()
}
