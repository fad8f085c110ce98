//! Nelder–Mead simplex descent on the unit box with projection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimplexOptions {
    pub max_evaluations: usize,
    /// Stop when every vertex lies within this ∞-norm distance of the best one.
    pub diameter_tolerance: f64,
    pub initial_step: f64,
    /// Seeds the jitter of the single restart.
    pub seed: u64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { max_evaluations: 2000, diameter_tolerance: 1e-3, initial_step: 0.1, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub point: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub restarts: usize,
    pub converged: bool,
}

struct Counted<F> {
    f: F,
    evaluations: usize,
    best: (Vec<f64>, f64),
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evaluations += 1;
        let v = (self.f)(x);
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if v < self.best.1 {
            self.best = (x.to_vec(), v);
        }
        v
    }
}

fn project(x: &mut [f64]) {
    for v in x.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
}

fn initial_simplex(start: &[f64], steps: &[f64]) -> Vec<Vec<f64>> {
    let mut simplex = vec![start.to_vec()];
    for (i, &step) in steps.iter().enumerate() {
        let mut v = start.to_vec();
        v[i] = if v[i] + step <= 1.0 { v[i] + step } else { v[i] - step };
        project(&mut v);
        simplex.push(v);
    }
    simplex
}

/// Minimizes `f` over `[0, 1]^d` starting from `start`.
///
/// The returned point is the best one ever evaluated, so the result is never
/// worse than `f(start)`.
pub fn minimize_box<F>(f: F, start: &[f64], options: &SimplexOptions) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let d = start.len();
    let mut start = start.to_vec();
    project(&mut start);
    let mut counted = Counted { f, evaluations: 0, best: (start.clone(), f64::INFINITY) };
    let v0 = counted.eval(&start);
    if d == 0 {
        return SimplexResult { point: start, value: v0, evaluations: 1, restarts: 0, converged: true };
    }

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut restarts = 0;
    let mut simplex = initial_simplex(&start, &vec![options.initial_step; d]);
    let mut values: Vec<f64> = std::iter::once(v0).chain(simplex[1..].iter().map(|x| counted.eval(x))).collect();
    let mut converged = false;

    while counted.evaluations < options.max_evaluations {
        let mut order: Vec<usize> = (0..=d).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let diameter = simplex[1..]
            .iter()
            .map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if diameter < options.diameter_tolerance {
            converged = true;
            break;
        }
        let collapsed = (0..d).any(|k| {
            let (lo, hi) = simplex.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v[k]), hi.max(v[k])));
            hi - lo < 1e-12
        });
        if collapsed {
            if restarts >= 1 {
                break;
            }
            restarts += 1;
            let best = counted.best.0.clone();
            let steps: Vec<f64> = (0..d).map(|_| options.initial_step * rng.random_range(0.5..1.0)).collect();
            simplex = initial_simplex(&best, &steps);
            values = std::iter::once(counted.best.1).chain(simplex[1..].iter().map(|x| counted.eval(x))).collect();
            continue;
        }

        let centroid: Vec<f64> = (0..d).map(|k| simplex[..d].iter().map(|v| v[k]).sum::<f64>() / d as f64).collect();
        let worst = simplex[d].clone();
        let along = |t: f64| -> Vec<f64> {
            let mut x: Vec<f64> = centroid.iter().zip(&worst).map(|(c, w)| c + t * (c - w)).collect();
            project(&mut x);
            x
        };

        let xr = along(1.0);
        let fr = counted.eval(&xr);
        if fr < values[0] {
            let xe = along(2.0);
            let fe = counted.eval(&xe);
            if fe < fr {
                simplex[d] = xe;
                values[d] = fe;
            } else {
                simplex[d] = xr;
                values[d] = fr;
            }
            continue;
        }
        if fr < values[d - 1] {
            simplex[d] = xr;
            values[d] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[d] {
            let x = along(0.5);
            let v = counted.eval(&x);
            (x, v)
        } else {
            let x = along(-0.5);
            let v = counted.eval(&x);
            (x, v)
        };
        if fc < values[d].min(fr) {
            simplex[d] = xc;
            values[d] = fc;
            continue;
        }
        // shrink towards the best vertex
        for i in 1..=d {
            let x: Vec<f64> = simplex[0].iter().zip(&simplex[i]).map(|(b, v)| b + 0.5 * (v - b)).collect();
            values[i] = counted.eval(&x);
            simplex[i] = x;
        }
    }

    let (point, value) = counted.best;
    SimplexResult { point, value, evaluations: counted.evaluations, restarts, converged }
}
