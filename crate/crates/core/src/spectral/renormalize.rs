use serde::Serialize;

use crate::error::{Error, Result};

const FIXED_POINT_DAMPING: f64 = 0.5;
const FIXED_POINT_ITERATIONS: usize = 500;
const RESIDUAL_LIMIT: f64 = 1e-8;
const MAX_SCAN_POINTS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RootMethod {
    FixedPoint,
    Bisection,
}

/// Chosen root of `ω = ω_j + δ(ω)` plus every root found in the bracket.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootReport {
    pub root: f64,
    pub residual: f64,
    pub method: RootMethod,
    pub roots: Vec<f64>,
}

/// Solves `ω = bare + shift(ω)` on `[lower, upper]`.
///
/// A damped fixed-point iteration is started from `bare`; independently the
/// bracket is scanned with spacing `scan_step` and every sign change of
/// `ω − bare − shift(ω)` is bisected. The root closest to `bare` wins.
pub fn solve_self_consistent<F>(bare: f64, shift: F, lower: f64, upper: f64, scan_step: f64) -> Result<RootReport>
where
    F: Fn(f64) -> f64,
{
    let g = |w: f64| w - bare - shift(w);
    let mut found: Vec<(f64, f64, RootMethod)> = Vec::new();

    let mut w = bare;
    for _ in 0..FIXED_POINT_ITERATIONS {
        let next = w + FIXED_POINT_DAMPING * (bare + shift(w) - w);
        if !next.is_finite() {
            break;
        }
        let done = (next - w).abs() <= 1e-13 * w.abs().max(1.0);
        w = next;
        if done {
            break;
        }
    }
    if w.is_finite() && g(w).abs() < RESIDUAL_LIMIT && w >= lower && w <= upper {
        found.push((w, g(w).abs(), RootMethod::FixedPoint));
    }

    let width = upper - lower;
    let step = if scan_step.is_finite() && scan_step > 0.0 { scan_step } else { width / 1000.0 };
    let n = ((width / step).ceil() as usize).clamp(2, MAX_SCAN_POINTS);
    let mut best_residual = f64::INFINITY;
    let mut x0 = lower;
    let mut g0 = g(x0);
    for k in 1..=n {
        let x1 = if k == n { upper } else { lower + width * k as f64 / n as f64 };
        let g1 = g(x1);
        best_residual = best_residual.min(g1.abs());
        if g0 == 0.0 {
            found.push((x0, 0.0, RootMethod::Bisection));
        } else if g0 * g1 < 0.0 {
            let r = bisect(&g, x0, x1, g0);
            found.push((r, g(r).abs(), RootMethod::Bisection));
        }
        x0 = x1;
        g0 = g1;
    }
    if g0 == 0.0 {
        found.push((x0, 0.0, RootMethod::Bisection));
    }

    let accepted: Vec<(f64, f64, RootMethod)> = found.into_iter().filter(|(_, res, _)| *res < RESIDUAL_LIMIT).collect();
    let Some(&(root, residual, method)) = accepted.iter().min_by(|a, b| (a.0 - bare).abs().total_cmp(&(b.0 - bare).abs())) else {
        return Err(Error::Convergence { lower, upper, residual: best_residual });
    };

    let mut roots: Vec<f64> = accepted.iter().map(|r| r.0).collect();
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * a.abs().max(1.0));
    Ok(RootReport { root, residual, method, roots })
}

fn bisect<G: Fn(f64) -> f64>(g: &G, mut a: f64, mut b: f64, mut ga: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if ga * gm < 0.0 {
            b = m;
        } else {
            a = m;
            ga = gm;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn no_shift() {
        let r = solve_self_consistent(42.0, |_| 0.0, -100.0, 100.0, 1.0).unwrap();
        assert_eq!(r.root, 42.0);
    }

    #[test]
    fn constant_shift() {
        let r = solve_self_consistent(42.0, |_| -7.5, -100.0, 100.0, 1.0).unwrap();
        assert_relative_eq!(r.root, 34.5, epsilon = 1e-9);
    }

    #[test]
    fn linear_shift_closed_form() {
        for a in [-0.8, -0.3, 0.25, 0.6] {
            let r = solve_self_consistent(10.0, |w| a * w, -200.0, 200.0, 0.5).unwrap();
            assert_relative_eq!(r.root, 10.0 / (1.0 - a), epsilon = 1e-9);
            assert!(r.residual < 1e-8);
        }
    }

    #[test]
    fn nearest_root_is_selected() {
        // g(w) = (w-1)(w-5)(w+3) / 10 has roots -3, 1, 5; shift = w - bare - g.
        let bare = 4.0;
        let r = solve_self_consistent(bare, |w| w - bare - (w - 1.0) * (w - 5.0) * (w + 3.0) / 10.0, -10.0, 10.0, 0.01).unwrap();
        assert_relative_eq!(r.root, 5.0, epsilon = 1e-9);
        assert_eq!(r.roots.len(), 3);
    }

    #[test]
    fn missing_root_is_reported() {
        let err = solve_self_consistent(0.0, |w| w + 1.0, -10.0, 10.0, 0.1).unwrap_err();
        assert!(matches!(err, Error::Convergence { .. }));
    }
}
