use apet::fmo::{bundled_network, reference_parameters};
use apet::optimize::{
    grid_sweep, linear_grid, optimize, random_search, refine_local, sample_parameters, sample_rng, Interval, ParameterBounds,
    SearchOptions,
};
use apet::{Error, Execution, ModelOptions};

fn with_threads<T: Send>(n: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap().install(f)
}

#[test]
fn seeded_search_is_independent_of_worker_count() {
    let net = bundled_network();
    let bounds = ParameterBounds::default();
    let seq = SearchOptions { execution: Execution::Sequential, refine: false, ..Default::default() };
    let par = SearchOptions { execution: Execution::Parallel, refine: false, ..Default::default() };
    let a = random_search(&net, &bounds, 64, 2024, &seq).unwrap();
    let b = with_threads(1, || random_search(&net, &bounds, 64, 2024, &par).unwrap());
    let c = with_threads(4, || random_search(&net, &bounds, 64, 2024, &par).unwrap());
    assert_eq!(a, b);
    assert_eq!(a, c);
    let d = random_search(&net, &bounds, 64, 2025, &seq).unwrap();
    assert_ne!(a.best.parameters, d.best.parameters);
}

#[test]
fn refined_search_is_deterministic_and_in_bounds() {
    let net = bundled_network();
    let bounds = ParameterBounds::default();
    let opts = SearchOptions {
        top_k: 3,
        simplex: apet::optimize::SimplexOptions { max_evaluations: 150, ..Default::default() },
        ..Default::default()
    };
    let a = with_threads(1, || optimize(&net, &bounds, 40, 7, &opts).unwrap());
    let b = with_threads(4, || optimize(&net, &bounds, 40, 7, &opts).unwrap());
    assert_eq!(a, b);
    assert!(a.best.objective >= a.top[0].objective);
    for r in a.top.iter().chain(&a.refined) {
        assert!(bounds.contains(&r.parameters));
    }
    for (start, end) in a.top.iter().zip(&a.refined) {
        assert!(end.objective >= start.objective);
    }
}

#[test]
fn top_records_are_ranked() {
    let net = bundled_network();
    let opts = SearchOptions { execution: Execution::Parallel, refine: false, top_k: 5, ..Default::default() };
    let out = random_search(&net, &ParameterBounds::default(), 50, 1, &opts).unwrap();
    assert_eq!(out.samples.len(), 50);
    assert!(out.samples.iter().enumerate().all(|(i, s)| s.index == i));
    assert!(out.top.windows(2).all(|w| w[0].objective >= w[1].objective));
    let max = out.samples.iter().filter_map(|s| s.objective).fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(out.best.objective, max);
}

#[test]
fn pinned_bounds_reproduce_the_reference_point() {
    let net = bundled_network();
    let bounds = ParameterBounds::pinned_at(&reference_parameters());
    let out = random_search(&net, &bounds, 3, 0, &SearchOptions::default()).unwrap();
    assert_eq!(out.best.parameters, reference_parameters());
    assert!(out.best.boundary_contacts.is_empty());
    assert!((out.best.objective - 0.75).abs() < 0.02, "{}", out.best.objective);
}

#[test]
fn refinement_never_loses_ground() {
    let net = bundled_network();
    let start = reference_parameters().with_sink(-500.0, 300.0);
    let bounds = ParameterBounds { omega8_range: Interval::point(-500.0), ..Default::default() };
    let opts = apet::optimize::SimplexOptions { max_evaluations: 200, ..Default::default() };
    let before = apet::evaluate_objective(&net, &start, &ModelOptions::default()).unwrap();
    let r = refine_local(&net, &start, &bounds, &ModelOptions::default(), &opts).unwrap();
    assert!(r.objective >= before);
    assert_eq!(r.parameters.sink_energy, -500.0);
    assert!(r.evaluations <= 200 + 8);
}

#[test]
fn all_failed_evaluations_is_an_error() {
    let net = bundled_network();
    let window = apet::QuadratureWindow::new(5000.0, 5001.0, 1e-9).unwrap();
    let opts =
        SearchOptions { model: ModelOptions { window: Some(window), ..Default::default() }, refine: false, ..Default::default() };
    let err = random_search(&net, &ParameterBounds::default(), 4, 0, &opts).unwrap_err();
    assert!(matches!(err, Error::SearchFailed(4)), "{err:?}");
}

/// Uniform marginals: each coordinate's mean and extreme order statistics.
#[test]
fn sampling_marginals_are_uniform() {
    let bounds = ParameterBounds::default();
    let n = 20_000;
    let draws: Vec<Vec<f64>> = (0..n).map(|i| sample_parameters(&bounds, 6, &mut sample_rng(99, i)).to_vec()).collect();
    for (k, iv) in bounds.coordinates(6).iter().enumerate() {
        let u: Vec<f64> = draws.iter().map(|d| (d[k] - iv.lower) / iv.width()).collect();
        let mean = u.iter().sum::<f64>() / n as f64;
        // sd of the mean is 1/√(12n) ≈ 0.002
        assert!((mean - 0.5).abs() < 0.01, "coordinate {k}: mean {mean}");
        let min = u.iter().copied().fold(1.0, f64::min);
        let max = u.iter().copied().fold(0.0, f64::max);
        assert!((0.0..1e-3).contains(&min) && max <= 1.0 && max > 1.0 - 1e-3);
        let mut sorted = u.clone();
        sorted.sort_by(f64::total_cmp);
        let ks = sorted
            .iter()
            .enumerate()
            .map(|(i, &x)| ((i + 1) as f64 / n as f64 - x).abs().max((x - i as f64 / n as f64).abs()))
            .fold(0.0, f64::max);
        // 1.63/√n is the 1% critical value
        assert!(ks < 1.63 / (n as f64).sqrt(), "coordinate {k}: KS {ks}");
    }
}

#[test]
fn grid_sweep_layout_and_determinism() {
    let net = bundled_network();
    let rates = reference_parameters().rates;
    let h = linear_grid(100.0, 500.0, 5);
    let w = linear_grid(-500.0, -100.0, 3);
    let a = grid_sweep(&net, &h, &w, &rates, &ModelOptions::default(), Execution::Sequential).unwrap();
    let b = with_threads(4, || grid_sweep(&net, &h, &w, &rates, &ModelOptions::default(), Execution::Parallel).unwrap());
    assert_eq!(a, b);
    let single = apet::evaluate_objective(&net, &reference_parameters().with_sink(w[2], h[3]), &ModelOptions::default()).unwrap();
    assert_eq!(a.get(3, 2), Some(single));
}

#[test]
fn plain_random_search_finds_a_good_basin() {
    let net = bundled_network();
    let opts = SearchOptions { refine: false, ..Default::default() };
    for seed in [1, 2, 3] {
        let out = random_search(&net, &ParameterBounds::default(), 10_000, seed, &opts).unwrap();
        assert!(out.best.objective >= 0.70, "seed {seed}: {}", out.best.objective);
    }
}

#[test]
fn single_sample_budget() {
    let net = bundled_network();
    let bounds = ParameterBounds::default();
    let opts = SearchOptions { refine: false, ..Default::default() };
    let out = random_search(&net, &bounds, 1, 11, &opts).unwrap();
    assert_eq!(out.samples.len(), 1);
    assert_eq!(out.best.parameters, sample_parameters(&bounds, 6, &mut sample_rng(11, 0)));
}

#[test]
fn sink_energy_draws_fill_the_range() {
    let bounds = ParameterBounds::default();
    let w: Vec<f64> = (0..10_000).map(|i| sample_parameters(&bounds, 6, &mut sample_rng(5, i)).sink_energy).collect();
    let min = w.iter().copied().fold(f64::INFINITY, f64::min);
    let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert!((-500.0..=-475.0).contains(&min) && (-25.0..=0.0).contains(&max), "{min} {max}");
}
