//! Derivative-free minimization: downhill simplex with deterministic
//! tie-breaking, plus an exhaustive grid oracle used to verify fits.

use crate::error::{Error, Result};
use serde::Serialize;

/// Convergence: simplex diameter below this, or `MAX_ITERATIONS`.
pub const DIAMETER_TOLERANCE: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 2000;

#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub params: Vec<f64>,
    /// Sum of squared normalized residuals at `params`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Downhill simplex (reflection 1, expansion 2, contraction 0.5, shrink 0.5)
/// from a deterministic initial simplex around `init`. Bounds are enforced by
/// the objective's penalty, keeping the search total. Non-convergence is
/// reported through `converged`, not an error.
pub fn fit_simplex<F>(init: &[f64], objective: F) -> FitResult
where
    F: Fn(&[f64]) -> f64,
{
    const ALPHA: f64 = 1.0;
    const GAMMA: f64 = 2.0;
    const RHO: f64 = 0.5;
    const SIGMA: f64 = 0.5;
    let dim = init.len();

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(init.to_vec());
    for i in 0..dim {
        let mut p = init.to_vec();
        let step = if p[i].abs() > 1e-4 { p[i] * 0.05 } else { 0.01 };
        p[i] += step;
        simplex.push(p);
    }
    let mut scores: Vec<f64> = simplex.iter().map(|p| objective(p)).collect();

    let diameter = |simplex: &[Vec<f64>], best: usize| -> f64 {
        simplex
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&simplex[best])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    };

    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim.saturating_sub(1)];

        if diameter(&simplex, best) < DIAMETER_TOLERANCE {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; dim];
        for &idx in order.iter().take(dim) {
            for d in 0..dim {
                centroid[d] += simplex[idx][d];
            }
        }
        for c in &mut centroid {
            *c /= dim as f64;
        }

        let blend = |a: &[f64], b: &[f64], coeff: f64| -> Vec<f64> {
            a.iter().zip(b).map(|(x, y)| x + coeff * (x - y)).collect()
        };

        let reflected = blend(&centroid, &simplex[worst], ALPHA);
        let score_r = objective(&reflected);
        if score_r < scores[second_worst] && score_r >= scores[best] {
            simplex[worst] = reflected;
            scores[worst] = score_r;
            continue;
        }
        if score_r < scores[best] {
            let expanded = blend(&centroid, &simplex[worst], GAMMA);
            let score_e = objective(&expanded);
            if score_e < score_r {
                simplex[worst] = expanded;
                scores[worst] = score_e;
            } else {
                simplex[worst] = reflected;
                scores[worst] = score_r;
            }
            continue;
        }
        let contracted: Vec<f64> = centroid
            .iter()
            .zip(&simplex[worst])
            .map(|(c, w)| c + RHO * (w - c))
            .collect();
        let score_c = objective(&contracted);
        if score_c < scores[worst] {
            simplex[worst] = contracted;
            scores[worst] = score_c;
            continue;
        }
        for &idx in order.iter().skip(1) {
            let shrunk: Vec<f64> = simplex[best]
                .iter()
                .zip(&simplex[idx])
                .map(|(b, p)| b + SIGMA * (p - b))
                .collect();
            simplex[idx] = shrunk;
            scores[idx] = objective(&simplex[idx]);
        }
    }

    let best = (0..scores.len())
        .min_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)))
        .expect("non-empty simplex");
    FitResult {
        params: simplex[best].clone(),
        residual: scores[best],
        iterations,
        converged,
    }
}

/// Exhaustive evaluation over a regular grid inside `bounds`; returns the
/// best grid point. Supports up to 4 dimensions; used for fit verification.
pub fn grid_oracle<F>(bounds: &[(f64, f64)], resolution: usize, objective: F) -> Result<FitResult>
where
    F: Fn(&[f64]) -> f64,
{
    let dim = bounds.len();
    if dim == 0 || dim > 4 {
        return Err(Error::Unsupported(format!(
            "grid oracle supports 1..=4 dimensions, got {dim}"
        )));
    }
    if resolution < 16 {
        return Err(Error::invalid(format!(
            "grid resolution must be >= 16, got {resolution}"
        )));
    }
    let axis = |d: usize, i: usize| -> f64 {
        let (lo, hi) = bounds[d];
        lo + (hi - lo) * (i as f64) / ((resolution - 1) as f64)
    };
    let total = resolution.pow(dim as u32);
    let mut best_score = f64::INFINITY;
    let mut best_point = vec![0.0; dim];
    let mut point = vec![0.0; dim];
    for flat in 0..total {
        let mut rem = flat;
        for (d, slot) in point.iter_mut().enumerate() {
            *slot = axis(d, rem % resolution);
            rem /= resolution;
        }
        let score = objective(&point);
        if score < best_score {
            best_score = score;
            best_point.copy_from_slice(&point);
        }
    }
    Ok(FitResult {
        params: best_point,
        residual: best_score,
        iterations: total,
        converged: true,
    })
}
