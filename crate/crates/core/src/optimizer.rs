//! Derivative-free minimization: Nelder–Mead with restart-at-best polishing,
//! and a deterministic parallel multi-start driver.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GooError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NmOptions {
    /// Iteration budget per restart; `None` means `400 * dim`.
    pub max_iters: Option<usize>,
    /// Stop when the simplex value spread falls below this.
    pub f_tol: f64,
    /// ... and every vertex lies within this distance of the best one.
    pub x_tol: f64,
    /// Edge length of the initial simplex.
    pub init_scale: f64,
    pub restarts: usize,
    /// Standard deviation of the random restart origins.
    pub init_sigma: f64,
    pub seed: u64,
    pub record_trace: bool,
}

impl Default for NmOptions {
    fn default() -> Self {
        NmOptions {
            max_iters: None,
            f_tol: 1e-12,
            x_tol: 1e-10,
            init_scale: 0.25,
            restarts: 32,
            init_sigma: 0.8,
            seed: 0,
            record_trace: false,
        }
    }
}

impl NmOptions {
    pub fn iter_budget(&self, dim: usize) -> usize {
        self.max_iters.unwrap_or(400 * dim.max(1))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub best_params: Vec<f64>,
    pub best_value: f64,
    /// Objective evaluations spent by the winning restart.
    pub evals: usize,
    pub iterations: usize,
    pub restart_index: usize,
    pub converged: bool,
    /// Best value after each iteration, when requested.
    pub trace: Vec<f64>,
}

fn eval(f: &dyn Fn(&[f64]) -> f64, x: &[f64], evals: &mut usize) -> f64 {
    *evals += 1;
    let v = f(x);
    if !v.is_finite() {
        f64::INFINITY
    } else {
        v
    }
}

/// Minimizes `f` from `x0`. On convergence the simplex is rebuilt around the
/// best point; the run stops once a rebuilt simplex no longer improves it.
/// Errors if `f(x0)` is not finite; later non-finite values are rejected as +∞.
pub fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], opts: &NmOptions) -> Result<OptResult> {
    let n = x0.len();
    let mut evals = 1;
    let f0 = f(x0);
    if !f0.is_finite() {
        return Err(GooError::NonFinite);
    }
    if n == 0 {
        return Ok(OptResult {
            best_params: Vec::new(),
            best_value: f0,
            evals,
            iterations: 0,
            restart_index: 0,
            converged: true,
            trace: Vec::new(),
        });
    }
    let budget = opts.iter_budget(n);
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut best_x = x0.to_vec();
    let mut best_f = f0;
    let mut converged = false;

    while iterations < budget {
        let start_f = best_f;
        let (x, fx, done) = run_simplex(f, &best_x, best_f, opts, budget, &mut iterations, &mut evals, &mut trace);
        if fx <= best_f {
            best_x = x;
            best_f = fx;
        }
        if !done {
            break;
        }
        if start_f - best_f <= opts.f_tol {
            converged = true;
            break;
        }
    }
    Ok(OptResult {
        best_params: best_x,
        best_value: best_f,
        evals,
        iterations,
        restart_index: 0,
        converged,
        trace,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_simplex(
    f: &dyn Fn(&[f64]) -> f64,
    x0: &[f64],
    f0: f64,
    opts: &NmOptions,
    budget: usize,
    iterations: &mut usize,
    evals: &mut usize,
    trace: &mut Vec<f64>,
) -> (Vec<f64>, f64, bool) {
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;
    let n = x0.len();
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut vals: Vec<f64> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    vals.push(f0);
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += opts.init_scale;
        vals.push(eval(f, &p, evals));
        pts.push(p);
    }
    let mut order: Vec<usize> = (0..=n).collect();
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];

    loop {
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
        let (best, worst, second) = (order[0], order[n], order[n - 1]);
        if opts.record_trace {
            trace.push(vals[best]);
        }
        let spread = vals[worst] - vals[best];
        let size = pts
            .iter()
            .map(|p| p.iter().zip(&pts[best]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        if spread <= opts.f_tol && size <= opts.x_tol || (spread == 0.0 && vals[best].is_infinite()) {
            return (pts[best].clone(), vals[best], true);
        }
        if size == 0.0 {
            return (pts[best].clone(), vals[best], true);
        }
        if *iterations >= budget {
            return (pts[best].clone(), vals[best], false);
        }
        *iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &k in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&pts[k]) {
                *c += x;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= n as f64);

        for j in 0..n {
            trial[j] = centroid[j] + REFLECT * (centroid[j] - pts[worst][j]);
        }
        let fr = eval(f, &trial, evals);
        if fr < vals[best] {
            for j in 0..n {
                trial2[j] = centroid[j] + EXPAND * (trial[j] - centroid[j]);
            }
            let fe = eval(f, &trial2, evals);
            if fe < fr {
                pts[worst].copy_from_slice(&trial2);
                vals[worst] = fe;
            } else {
                pts[worst].copy_from_slice(&trial);
                vals[worst] = fr;
            }
            continue;
        }
        if fr < vals[second] {
            pts[worst].copy_from_slice(&trial);
            vals[worst] = fr;
            continue;
        }
        let outside = fr < vals[worst];
        for j in 0..n {
            let toward = if outside { trial[j] } else { pts[worst][j] };
            trial2[j] = centroid[j] + CONTRACT * (toward - centroid[j]);
        }
        let fc = eval(f, &trial2, evals);
        if fc < fr.min(vals[worst]) {
            pts[worst].copy_from_slice(&trial2);
            vals[worst] = fc;
            continue;
        }
        let anchor = pts[best].clone();
        for k in 0..=n {
            if k == best {
                continue;
            }
            for j in 0..n {
                pts[k][j] = anchor[j] + SHRINK * (pts[k][j] - anchor[j]);
            }
            vals[k] = eval(f, &pts[k], evals);
        }
    }
}

/// Origin of restart `index`: zero (or `warm`) for restart 0, Gaussian otherwise.
pub fn restart_origin(dim: usize, index: usize, opts: &NmOptions, warm: Option<&[f64]>) -> Vec<f64> {
    if index == 0 {
        return warm.map_or_else(|| vec![0.0; dim], <[f64]>::to_vec);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(index as u64);
    let normal = Normal::new(0.0, opts.init_sigma.max(0.0)).expect("finite sigma");
    (0..dim).map(|_| normal.sample(&mut rng)).collect()
}

/// Runs every restart and returns them in restart order.
pub fn multi_start_all(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    dim: usize,
    opts: &NmOptions,
    warm: Option<&[f64]>,
) -> Result<Vec<OptResult>> {
    let restarts = opts.restarts.max(1);
    (0..restarts)
        .into_par_iter()
        .map(|i| {
            let x0 = restart_origin(dim, i, opts, warm);
            match nelder_mead(f, &x0, opts) {
                Ok(mut r) => {
                    r.restart_index = i;
                    Ok(r)
                }
                // restart 0 is the anchor and must be evaluable; a random
                // origin off the finite domain is just a rejected candidate
                Err(e) if i == 0 => Err(e),
                Err(_) => Ok(OptResult {
                    best_params: x0,
                    best_value: f64::INFINITY,
                    evals: 1,
                    iterations: 0,
                    restart_index: i,
                    converged: false,
                    trace: Vec::new(),
                }),
            }
        })
        .collect()
}

/// Best of all restarts; ties go to the lowest restart index, so the result
/// does not depend on the thread count.
pub fn multi_start(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    dim: usize,
    opts: &NmOptions,
    warm: Option<&[f64]>,
) -> Result<OptResult> {
    Ok(multi_start_all(f, dim, opts, warm)?
        .into_iter()
        .reduce(|a, b| if b.best_value < a.best_value { b } else { a })
        .expect("at least one restart"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(2) + 4.0 * (x[1] + 2.0).powi(2) + 3.0;
        let r = nelder_mead(&f, &[0.0, 0.0], &NmOptions::default()).unwrap();
        assert!(r.converged);
        assert!((r.best_value - 3.0).abs() < 1e-10);
        assert!((r.best_params[0] - 1.0).abs() < 1e-5);
        assert!((r.best_params[1] + 2.0).abs() < 1e-5);
    }

    #[test]
    fn rosenbrock_within_budget() {
        let f = |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
        let opts = NmOptions {
            max_iters: Some(2000),
            ..Default::default()
        };
        let r = nelder_mead(&f, &[-1.2, 1.0], &opts).unwrap();
        assert!(r.iterations <= 2000);
        assert!(r.best_value <= 1e-6, "{}", r.best_value);
    }

    #[test]
    fn constant_objective_stops() {
        let f = |_: &[f64]| 7.0;
        let r = nelder_mead(&f, &[0.3, 0.1, -0.2], &NmOptions::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.best_value, 7.0);
        assert!(r.iterations < 200);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let f = |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
        let opts = NmOptions {
            max_iters: Some(5),
            ..Default::default()
        };
        let r = nelder_mead(&f, &[-1.2, 1.0], &opts).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 5);
    }

    #[test]
    fn nan_treated_as_worst() {
        let f = |x: &[f64]| if x[0] > 0.5 { f64::NAN } else { (x[0] + 1.0).powi(2) };
        let r = nelder_mead(&f, &[0.0], &NmOptions::default()).unwrap();
        assert!((r.best_params[0] + 1.0).abs() < 1e-5);
    }

    #[test]
    fn non_finite_start_is_an_error() {
        let f = |x: &[f64]| if x[0] == 0.0 { f64::INFINITY } else { 1.0 };
        assert_eq!(nelder_mead(&f, &[0.0], &NmOptions::default()).unwrap_err(), GooError::NonFinite);
        assert!(multi_start(&f, 1, &NmOptions::default(), None).is_err());
        // a random origin off the domain is skipped, not fatal
        let g = |x: &[f64]| if x[0] > 1.0 { f64::NAN } else { (x[0] + 0.5).powi(2) };
        let opts = NmOptions {
            restarts: 16,
            init_sigma: 3.0,
            ..Default::default()
        };
        let all = multi_start_all(&g, 1, &opts, None).unwrap();
        assert!(all.iter().any(|r| r.best_value.is_infinite()));
        assert!(multi_start(&g, 1, &opts, None).unwrap().best_value < 1e-10);
    }

    #[test]
    fn multistart_escapes_local_minima() {
        // Sum of cosines has many local minima; the global value is -2 per coordinate.
        let f = |x: &[f64]| x.iter().map(|&t| -(3.0 * t).cos() - (t * 0.9).cos() + 0.02 * t * t).sum::<f64>();
        let opts = NmOptions {
            restarts: 32,
            init_sigma: 3.0,
            seed: 11,
            ..Default::default()
        };
        let r = multi_start(&f, 2, &opts, Some(&[2.0, -2.0])).unwrap();
        let grid_min = (0..100_000)
            .map(|i| {
                let t = -10.0 + 20.0 * i as f64 / 99_999.0;
                -(3.0 * t).cos() - (t * 0.9).cos() + 0.02 * t * t
            })
            .fold(f64::INFINITY, f64::min);
        assert!(r.best_value <= 2.0 * grid_min + 1e-6, "{} vs {}", r.best_value, 2.0 * grid_min);
    }

    #[test]
    fn multistart_is_deterministic_across_pools() {
        let f = |x: &[f64]| x.iter().map(|&t| (t - 0.3).abs().sqrt() + (2.0 * t).sin()).sum::<f64>();
        let opts = NmOptions {
            restarts: 12,
            seed: 5,
            ..Default::default()
        };
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| multi_start(&f, 3, &opts, None).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a, b);
    }

    #[test]
    fn origins_follow_seed_and_stream() {
        let opts = NmOptions::default();
        assert_eq!(restart_origin(3, 0, &opts, None), vec![0.0; 3]);
        assert_eq!(restart_origin(3, 2, &opts, None), restart_origin(3, 2, &opts, None));
        assert_ne!(restart_origin(3, 1, &opts, None), restart_origin(3, 2, &opts, None));
    }
}
