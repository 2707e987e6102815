// Copyright 2026 The spinmem Authors
// SPDX-License-Identifier: Apache-2.0

//! Budgeted Nelder-Mead with restarts on simplex collapse.

pub(crate) struct NmOutcome {
    pub x: Vec<f64>,
    pub value: f64,
}

/// Minimizes `f` from `start` with initial edge `step`, spending at most
/// `budget` evaluations.
/// `on_eval` sees every evaluated value.
pub(crate) fn nelder_mead<F, G>(f: F, start: &[f64], step: f64, budget: usize, mut on_eval: G) -> NmOutcome
where
    F: Fn(&[f64]) -> f64,
    G: FnMut(f64),
{
    let n = start.len();
    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        let v = f(x);
        let v = if v.is_finite() { v } else { f64::INFINITY };
        on_eval(v);
        v
    };
    let mut best_x = start.to_vec();
    let mut best = eval(start, &mut evals);
    let mut edge = step;
    while evals + n + 1 <= budget {
        // fresh simplex around the incumbent
        let mut simplex: Vec<(Vec<f64>, f64)> = vec![(best_x.clone(), best)];
        for i in 0..n {
            let mut x = best_x.clone();
            x[i] += edge;
            let v = eval(&x, &mut evals);
            simplex.push((x, v));
        }
        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let spread = simplex[n].1 - simplex[0].1;
            let size = simplex[1..].iter().map(|(x, _)| dist(x, &simplex[0].0)).fold(0.0, f64::max);
            if evals >= budget || size < 1e-10 * (1.0 + norm(&simplex[0].0)) || spread <= 1e-14 * simplex[0].1.abs() {
                break;
            }
            let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64).collect();
            let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&simplex[n].0).map(|(c, w)| c + t * (c - w)).collect() };
            let xr = along(1.0);
            let fr = eval(&xr, &mut evals);
            if fr < simplex[0].1 {
                let xe = along(2.0);
                let fe = if evals < budget { eval(&xe, &mut evals) } else { f64::INFINITY };
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
            } else {
                let (xc, fc) = if evals >= budget {
                    (xr, fr)
                } else if fr < simplex[n].1 {
                    let x = along(0.5);
                    let v = eval(&x, &mut evals);
                    (x, v)
                } else {
                    let x = along(-0.5);
                    let v = eval(&x, &mut evals);
                    (x, v)
                };
                if fc < simplex[n].1.min(fr) {
                    simplex[n] = (xc, fc);
                } else {
                    // shrink toward the best vertex
                    let x0 = simplex[0].0.clone();
                    for k in 1..=n {
                        if evals >= budget {
                            break;
                        }
                        let x: Vec<f64> = x0.iter().zip(&simplex[k].0).map(|(a, b)| a + 0.5 * (b - a)).collect();
                        let v = eval(&x, &mut evals);
                        simplex[k] = (x, v);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[0].1 < best {
            best = simplex[0].1;
            best_x = simplex[0].0.clone();
        }
        edge *= 0.5;
    }
    NmOutcome { x: best_x, value: best }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let mut seen = 0;
        let r = nelder_mead(f, &[-1.2, 1.0], 0.5, 2000, |_| seen += 1);
        assert!(r.value < 1e-8, "{}", r.value);
        assert!(seen <= 2000);
    }

    #[test]
    fn respects_budget_and_reports_each_value() {
        let mut seen = 0;
        let r = nelder_mead(|x: &[f64]| x.iter().map(|v| (v - 3.0).powi(2)).sum(), &[0.0; 5], 1.0, 137, |_| seen += 1);
        assert!(seen <= 137);
        assert!(r.value < 0.5 * 45.0);
    }
}
