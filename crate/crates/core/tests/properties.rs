use std::f64::consts::PI;

use apet::network::{diagonalize_bath, partition};
use apet::quadrature::{integrate, QuadratureOptions};
use apet::spectral::{normalize_density, overlap_efficiency, Lorentzian, NormalizedDensity};
use apet::transfer::{
    asymptotic_efficiency, bounce_efficiency, optimize_arrival, phased_overlap, transfer_probability, ArrivalSearch,
    BounceParameters, PhaseModel, PropagationTime,
};
use apet::{evaluate_objective, ModelOptions, ProfilePair, QuadratureWindow, RateOrdering, Site, SpectralProfile};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

mod common;
use common::{network_strategy, params_strategy, profile_strategy, synthetic_window};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn overlap_bounded_and_probability_below_overlap(
        p1 in profile_strategy(),
        p2 in profile_strategy(),
        t0 in -0.2f64..0.2,
        kappa in -1e-5f64..1e-5,
    ) {
        let window = synthetic_window();
        let (Ok(f1), Ok(f2)) = (normalize_density(&p1, &window), normalize_density(&p2, &window)) else {
            return Ok(());
        };
        let overlap = overlap_efficiency(&f1, &f2, &window).unwrap();
        prop_assert!((0.0..=1.0).contains(&overlap));
        let model = PhaseModel::new(0.0, 30.0, PropagationTime::Quadratic { tau0: 0.0, kappa }, t0).unwrap();
        let p = transfer_probability(&f1, &f2, &model, &window).unwrap();
        prop_assert!(p <= overlap + 1e-7, "P = {p}, F = {overlap}");
    }

    #[test]
    fn bounce_efficiency_is_a_monotone_probability(p in 0.0f64..=1.0, q in 0.0f64..=1.0, n in 1u64..200) {
        let bp = BounceParameters::new(p, q).unwrap();
        let a = bounce_efficiency(&bp, n);
        let b = bounce_efficiency(&bp, n + 1);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b >= a);
    }

    #[test]
    fn gauge_invariance(net in network_strategy(), params in params_strategy(), shift in -1000.0f64..1000.0) {
        let opts = ModelOptions::default();
        let Ok(base) = evaluate_objective(&net, &params, &opts) else { return Ok(()); };
        let moved = evaluate_objective(
            &net.shifted(shift),
            &params.with_sink(params.sink_energy + shift, params.sink_coupling),
            &opts,
        ).unwrap();
        prop_assert!((base - moved).abs() <= 1e-8 * base.abs().max(1e-3), "{base} vs {moved}");
    }

    #[test]
    fn sink_decoupling(net in network_strategy(), params in params_strategy(), w8 in -800.0f64..800.0, h28 in 0.0f64..900.0) {
        let opts = ModelOptions::default();
        let a = ProfilePair::build(&net, &params, &opts).unwrap();
        let b = ProfilePair::build(&net, &params.with_sink(w8, h28), &opts).unwrap();
        for k in 0..=20 {
            let w = -600.0 + 60.0 * k as f64;
            let (x, y) = (a.donor.spectral_density(w), b.donor.spectral_density(w));
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-12));
        }
    }

    #[test]
    fn bath_completeness(net in network_strategy(), params in params_strategy(), descending in any::<bool>()) {
        let ordering = if descending { RateOrdering::Descending } else { RateOrdering::Ascending };
        let part = partition(&net, &params.sink().unwrap()).unwrap();
        let spec = diagonalize_bath(&part, params.pigment_rates(), ordering).unwrap();
        let scale = part.bath_block.amax().max(1.0);
        prop_assert!((spec.reconstruct() - &part.bath_block).amax() <= 1e-10 * scale);
        let identity = spec.eigenvectors.transpose() * &spec.eigenvectors;
        prop_assert!((identity - DMatrix::<f64>::identity(4, 4)).amax() <= 1e-12);
        let g1: f64 = part.coupling_donor.norm_squared();
        let g2: f64 = part.coupling_acceptor.norm_squared();
        prop_assert!((spec.weights_donor.iter().sum::<f64>() - g1).abs() <= 1e-10 * g1.max(1.0));
        prop_assert!((spec.weights_acceptor.iter().sum::<f64>() - g2).abs() <= 1e-10 * g2.max(1.0));
        let mut sorted = spec.rates.clone();
        sorted.sort_by(f64::total_cmp);
        let mut given = params.rates.clone();
        given.sort_by(f64::total_cmp);
        prop_assert_eq!(sorted, given);
    }

    #[test]
    fn objective_is_pure(net in network_strategy(), params in params_strategy()) {
        let opts = ModelOptions::default();
        let a = evaluate_objective(&net, &params, &opts).ok();
        let b = evaluate_objective(&net, &params, &opts).ok();
        prop_assert_eq!(a.map(f64::to_bits), b.map(f64::to_bits));
    }
}

/// `∫₀^∞ G(t) e^{iωt} dt = γ(ω) + i δ(ω)`, with the integral cut at 20/Γmin.
#[test]
fn laplace_identity() {
    let p =
        SpectralProfile::new(Site::Acceptor, vec![120.0, 2500.0, 40.0], vec![-80.0, 210.0, 400.0], vec![35.0, 60.0, 90.0], 0.0)
            .unwrap();
    let t_max = 20.0 / 35.0;
    let opts = QuadratureOptions::default().with_absolute_tolerance(1e-12).with_initial_pieces(256).with_max_intervals(200_000);
    for omega in [-300.0, -50.0, 0.0, 180.0, 650.0] {
        let value = integrate(|t: f64| p.correlation(t).unwrap() * Complex64::new(0.0, omega * t).exp(), 0.0, t_max, &[], &opts)
            .unwrap()
            .value;
        let expected = Complex64::new(p.decay_rate(omega), p.energy_shift(omega));
        assert!((value - expected).norm() <= 1e-6 * expected.norm(), "omega {omega}: {value} vs {expected}");
    }
}

/// `∫ γ(ω) dω = π Σ w`.
#[test]
fn decay_rate_sum_rule() {
    let p = SpectralProfile::new(Site::Donor, vec![30.0, 700.0], vec![-50.0, 120.0], vec![20.0, 75.0], 0.0).unwrap();
    let (lo, hi) = (-50.0 - 1e3 * 75.0, 120.0 + 1e3 * 75.0);
    let opts = QuadratureOptions::default().with_absolute_tolerance(1e-8);
    let total = integrate(|w: f64| p.decay_rate(w), lo, hi, &[-50.0, 120.0], &opts).unwrap().value;
    let expected = PI * 730.0;
    assert!((total - expected).abs() <= 5e-3 * expected, "{total} vs {expected}");
}

fn agm(mut a: f64, mut b: f64) -> f64 {
    while (a - b).abs() > 1e-15 * a {
        (a, b) = (0.5 * (a + b), (a * b).sqrt());
    }
    a
}

/// Co-centred Lorentzians: `∫√(L₁L₂) = √(γ₁γ₂) / AGM(γ₁, γ₂)`.
#[test]
fn lorentzian_overlap_closed_form() {
    let window = QuadratureWindow::new(-1e7, 1e7, 1e-9).unwrap();
    for (g1, g2) in [(10.0, 10.0), (10.0, 25.0), (4.0, 60.0)] {
        let a = normalize_density(Lorentzian::new(50.0, g1).unwrap(), &window).unwrap();
        let b = normalize_density(Lorentzian::new(50.0, g2).unwrap(), &window).unwrap();
        let expected = (g1 * g2).sqrt() / agm(g1, g2);
        let got = overlap_efficiency(&a, &b, &window).unwrap();
        assert!((got - expected * expected).abs() < 1e-5, "({g1}, {g2}): {got} vs {}", expected * expected);
    }
}

fn unit_lorentzian(center: f64, width: f64) -> NormalizedDensity<Lorentzian> {
    NormalizedDensity::assume_normalized(Lorentzian::new(center, width).unwrap())
}

/// `(γ/π) ∫ dx / √((x² + γ²)((x − d)² + γ²))` squared, by the midpoint rule
/// after `x = d/2 + γ tan u`.
fn separated_overlap_oracle(g: f64, d: f64) -> f64 {
    let n = 2_000_000;
    let h = PI / n as f64;
    let mut sum = 0.0;
    for k in 0..n {
        let u = -PI / 2.0 + (k as f64 + 0.5) * h;
        let x = 0.5 * d + g * u.tan();
        let jac = g / u.cos().powi(2);
        sum += jac / ((x * x + g * g) * ((x - d).powi(2) + g * g)).sqrt();
    }
    (g / PI * sum * h).powi(2)
}

#[test]
fn separated_lorentzians_barely_overlap() {
    let g = 10.0;
    let window = QuadratureWindow::new(-1e6, 1e6, 1e-10).unwrap();
    let a = unit_lorentzian(0.0, g);
    for sep in [20.0, 30.0] {
        let b = unit_lorentzian(sep * g, g);
        let f = overlap_efficiency(&a, &b, &window).unwrap();
        let oracle = separated_overlap_oracle(g, sep * g);
        assert!((f - oracle).abs() < 1e-4, "{sep}: {f} vs {oracle}");
        assert!((f - overlap_efficiency(&b, &a, &window).unwrap()).abs() < 1e-12);
        if sep >= 30.0 {
            assert!(f < 0.05, "separation {sep}γ: F = {f}");
        } else {
            assert!((f - 0.0549).abs() < 5e-4, "separation {sep}γ: F = {f}");
        }
    }
}

#[test]
fn overlap_falls_with_separation() {
    let window = QuadratureWindow::new(-5000.0, 5000.0, 1e-10).unwrap();
    let a = unit_lorentzian(0.0, 15.0);
    let values: Vec<f64> = [0.0, 5.0, 15.0, 40.0, 100.0, 300.0]
        .iter()
        .map(|&d| overlap_efficiency(&a, &unit_lorentzian(d, 25.0), &window).unwrap())
        .collect();
    assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
}

#[test]
fn zero_phase_gives_the_overlap() {
    let window = QuadratureWindow::new(-3000.0, 3000.0, 1e-11).unwrap();
    let a = unit_lorentzian(140.0, 20.0);
    let b = unit_lorentzian(165.0, 35.0);
    let p = phased_overlap(&a, &b, |_| 0.0, &window, &[]).unwrap();
    let f = overlap_efficiency(&a, &b, &window).unwrap();
    assert!((p - f).abs() < 1e-8, "{p} vs {f}");
}

/// Rescaling `γ → sγ` with all times divided by `s` leaves `𝒫*` unchanged.
#[test]
fn optimum_is_invariant_under_width_rescaling() {
    let optimum = |g: f64| {
        let window = QuadratureWindow::new(150.0 - 50.0 * g, 150.0 + 50.0 * g, 1e-10).unwrap();
        let f = unit_lorentzian(150.0, g);
        let search = ArrivalSearch::new(150.0, g, PropagationTime::Constant { tau: 1.5 / g });
        optimize_arrival(&f, &f, &search, &window).unwrap()
    };
    let a = optimum(30.0);
    let b = optimum(300.0);
    assert!((a.probability - b.probability).abs() < 1e-4, "{} vs {}", a.probability, b.probability);
    assert!((a.arrival_time * 30.0 - b.arrival_time * 300.0).abs() < 1e-3);
}

#[test]
fn bounce_series_reaches_its_limit() {
    for (p, q) in [(0.5, 1e-3), (0.9, 0.02), (0.2, 0.1)] {
        let bp = BounceParameters::new(p, q).unwrap();
        let limit = asymptotic_efficiency(&bp).unwrap().exact;
        assert!((bounce_efficiency(&bp, 10_000) - limit).abs() < 1e-9);
    }
}
