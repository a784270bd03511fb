//! Bounded local minimizers and multi-start post-selection.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Projected BFGS with Armijo backtracking.
    QuasiNewton,
    /// Derivative-free linear-approximation trust region.
    Cobyla,
}

/// Source of gradients for the quasi-Newton method.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMode {
    /// Exact gradients where the objective supplies them, forward
    /// differences elsewhere.
    Adjoint,
    /// Forward differences for every parameter.
    FiniteDifference,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    /// `None` picks quasi-Newton for noiseless and COBYLA for noisy objectives.
    pub method: Option<Method>,
    pub gradient: GradientMode,
    pub restarts: usize,
    pub seed: u64,
    pub fd_step: f64,
    /// Objective evaluations per restart; one exact gradient counts as one.
    pub max_evals: usize,
    /// Stop when the projected gradient's largest entry falls below this.
    pub gtol: f64,
    /// Stop when an iteration improves the value by less than
    /// `ftol * max(1, |f|)` twice in a row.
    pub ftol: f64,
    pub cobyla_rho_begin: f64,
    pub cobyla_rho_end: f64,
    /// Random restarts draw every ansatz angle uniformly from
    /// `[-start_angle_range, start_angle_range]`, within the bounds.
    pub start_angle_range: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            method: None,
            gradient: GradientMode::Adjoint,
            restarts: 10,
            seed: 2024,
            fd_step: 1e-6,
            max_evals: 2000,
            gtol: 1e-6,
            ftol: 1e-12,
            cobyla_rho_begin: 0.5,
            cobyla_rho_end: 1e-4,
            start_angle_range: 1.0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be at least 1".into()));
        }
        if self.max_evals == 0 {
            return Err(Error::Config("max_evals must be at least 1".into()));
        }
        if !(self.start_angle_range > 0.0) {
            return Err(Error::Config("start_angle_range must be positive".into()));
        }
        if !(self.fd_step > 0.0) {
            return Err(Error::Config("fd_step must be positive".into()));
        }
        if !(self.cobyla_rho_begin > 0.0 && self.cobyla_rho_end > 0.0) {
            return Err(Error::Config("COBYLA radii must be positive".into()));
        }
        Ok(())
    }
}

/// A function to minimize. `gradient` may supply exact derivatives for a
/// prefix of the coordinates; the rest are differenced by the optimizer.
pub trait Objective {
    fn value(&mut self, x: &[f64]) -> f64;

    /// Value and partial gradient (its length is the number of covered
    /// leading coordinates), or `None` when unavailable.
    fn value_gradient(&mut self, _x: &[f64]) -> Option<(f64, Vec<f64>)> {
        None
    }
}

/// Adapter for plain closures.
pub struct FnObjective<F>(pub F);

impl<F: FnMut(&[f64]) -> f64> Objective for FnObjective<F> {
    fn value(&mut self, x: &[f64]) -> f64 {
        (self.0)(x)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinimizeOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub n_evals: usize,
    /// The evaluation budget ran out before convergence.
    pub exhausted: bool,
}

/// Tracks the evaluation count and the best point seen.
struct Tracker<'a> {
    objective: &'a mut dyn Objective,
    n_evals: usize,
    best_x: Vec<f64>,
    best_value: f64,
}

impl<'a> Tracker<'a> {
    fn new(objective: &'a mut dyn Objective, dim: usize) -> Self {
        Self {
            objective,
            n_evals: 0,
            best_x: vec![0.0; dim],
            best_value: f64::INFINITY,
        }
    }

    fn record(&mut self, x: &[f64], v: f64) {
        // NaN never replaces a finite best.
        if v < self.best_value || (self.best_value.is_infinite() && !v.is_nan() && self.n_evals == 1) {
            self.best_value = v;
            self.best_x.copy_from_slice(x);
        }
    }

    fn value(&mut self, x: &[f64]) -> f64 {
        self.n_evals += 1;
        let v = self.objective.value(x);
        let v = if v.is_nan() { f64::INFINITY } else { v };
        self.record(x, v);
        v
    }

    fn value_gradient(&mut self, x: &[f64], bounds: &[(f64, f64)], config: &OptimizerConfig) -> (f64, Vec<f64>) {
        let exact = match config.gradient {
            GradientMode::Adjoint => self.objective.value_gradient(x),
            GradientMode::FiniteDifference => None,
        };
        let (value, mut grad) = match exact {
            Some((v, g)) => {
                self.n_evals += 1;
                let v = if v.is_nan() { f64::INFINITY } else { v };
                self.record(x, v);
                (v, g)
            }
            None => (self.value(x), Vec::new()),
        };
        let covered = grad.len();
        grad.resize(x.len(), 0.0);
        let mut probe = x.to_vec();
        for i in covered..x.len() {
            // Step inwards at the upper bound.
            let h = if x[i] + config.fd_step > bounds[i].1 { -config.fd_step } else { config.fd_step };
            probe[i] = x[i] + h;
            let shifted = self.value(&probe);
            probe[i] = x[i];
            grad[i] = (shifted - value) / h;
        }
        (value, grad)
    }

    fn outcome(self, exhausted: bool) -> MinimizeOutcome {
        MinimizeOutcome {
            x: self.best_x,
            value: self.best_value,
            n_evals: self.n_evals,
            exhausted,
        }
    }
}

fn clamp_into(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *v = v.clamp(lo, hi);
    }
}

fn check_inputs(x0: &[f64], bounds: &[(f64, f64)]) -> Result<()> {
    if x0.len() != bounds.len() {
        return Err(Error::DimensionMismatch {
            expected: bounds.len(),
            got: x0.len(),
        });
    }
    if bounds.iter().any(|&(lo, hi)| !(lo <= hi) || !lo.is_finite() || !hi.is_finite()) {
        return Err(Error::Config("bounds must be finite with lower <= upper".into()));
    }
    Ok(())
}

/// Minimizes from `x0` within box bounds. The returned point is the best one
/// evaluated, never a later worse iterate.
pub fn minimize_energy(
    objective: &mut dyn Objective,
    x0: &[f64],
    bounds: &[(f64, f64)],
    method: Method,
    config: &OptimizerConfig,
) -> Result<MinimizeOutcome> {
    check_inputs(x0, bounds)?;
    config.validate()?;
    let mut x = x0.to_vec();
    clamp_into(&mut x, bounds);
    if x.is_empty() {
        let mut tracker = Tracker::new(objective, 0);
        tracker.value(&x);
        return Ok(tracker.outcome(false));
    }
    Ok(match method {
        Method::QuasiNewton => bfgs(objective, x, bounds, config),
        Method::Cobyla => cobyla_run(objective, x, bounds, config),
    })
}

/// Gradient with entries zeroed where a bound blocks descent.
fn projected(x: &[f64], g: &[f64], bounds: &[(f64, f64)]) -> Vec<f64> {
    x.iter()
        .zip(g)
        .zip(bounds)
        .map(|((&xi, &gi), &(lo, hi))| if (xi <= lo && gi > 0.0) || (xi >= hi && gi < 0.0) { 0.0 } else { gi })
        .collect()
}

fn bfgs(objective: &mut dyn Objective, mut x: Vec<f64>, bounds: &[(f64, f64)], config: &OptimizerConfig) -> MinimizeOutcome {
    let n = x.len();
    let mut tracker = Tracker::new(objective, n);
    let identity = |n: usize| {
        let mut m = vec![0.0; n * n];
        (0..n).for_each(|i| m[i * n + i] = 1.0);
        m
    };
    let mut hinv = identity(n);
    let (mut f, mut g) = tracker.value_gradient(&x, bounds, config);
    let mut stalls = 0;
    let mut first_step = true;
    while tracker.n_evals < config.max_evals {
        let pg = projected(&x, &g, bounds);
        if pg.iter().fold(0.0f64, |m, v| m.max(v.abs())) < config.gtol || !f.is_finite() {
            log::debug!("bfgs stop: gradient below tolerance after {} evals, f = {:e}", tracker.n_evals, tracker.best_value);
            return tracker.outcome(false);
        }
        let free: Vec<bool> = pg.iter().zip(&g).map(|(p, gi)| *p != 0.0 || *gi == 0.0).collect();
        let mut d = vec![0.0; n];
        for i in (0..n).filter(|&i| free[i]) {
            d[i] = -(0..n).filter(|&j| free[j]).map(|j| hinv[i * n + j] * g[j]).sum::<f64>();
        }
        let mut slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        if slope >= 0.0 {
            hinv = identity(n);
            d = pg.iter().map(|v| -v).collect();
            slope = -pg.iter().map(|v| v * v).sum::<f64>();
        }
        if first_step {
            // Keep the first trial step modest.
            let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1.0 {
                d.iter_mut().for_each(|v| *v /= norm);
                slope /= norm;
            }
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            if tracker.n_evals >= config.max_evals {
                break;
            }
            let mut trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + alpha * b).collect();
            clamp_into(&mut trial, bounds);
            let ft = tracker.value(&trial);
            if ft <= f + 1e-4 * alpha * slope {
                accepted = Some((trial, ft));
                break;
            }
            alpha *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            if tracker.n_evals >= config.max_evals {
                log::debug!("bfgs stop: budget after {} evals, f = {:e}", tracker.n_evals, tracker.best_value);
                return tracker.outcome(true);
            }
            if hinv != identity(n) {
                // Retry with steepest descent before giving up.
                hinv = identity(n);
                continue;
            }
            log::debug!("bfgs stop: line search failed after {} evals, f = {:e}", tracker.n_evals, tracker.best_value);
            return tracker.outcome(false);
        };
        if tracker.n_evals >= config.max_evals {
            log::debug!("bfgs stop: budget after {} evals, f = {:e}", tracker.n_evals, tracker.best_value);
            return tracker.outcome(true);
        }
        let (_, g_new) = tracker.value_gradient(&x_new, bounds, config);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > 1e-12 {
            if first_step {
                let yy: f64 = y.iter().map(|v| v * v).sum();
                let scale = sy / yy;
                hinv.iter_mut().for_each(|v| *v *= scale);
            }
            // H <- (I - r s y^T) H (I - r y s^T) + r s s^T
            let rho = 1.0 / sy;
            let hy: Vec<f64> = (0..n).map(|i| (0..n).map(|j| hinv[i * n + j] * y[j]).sum()).collect();
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..n {
                for j in 0..n {
                    hinv[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
            first_step = false;
        }
        let gain = f - f_new;
        stalls = if gain < config.ftol * f.abs().max(1.0) { stalls + 1 } else { 0 };
        x = x_new;
        f = f_new;
        g = g_new;
        if stalls >= 2 {
            log::debug!("bfgs stop: stalled after {} evals, f = {:e}, |g| = {:e}", tracker.n_evals, tracker.best_value, projected(&x, &g, bounds).iter().fold(0.0f64, |m, v| m.max(v.abs())));
            return tracker.outcome(false);
        }
    }
    tracker.outcome(true)
}

fn cobyla_run(objective: &mut dyn Objective, x: Vec<f64>, bounds: &[(f64, f64)], config: &OptimizerConfig) -> MinimizeOutcome {
    let n = x.len();
    let tracker = RefCell::new(Tracker::new(objective, n));
    let func = |p: &[f64], t: &mut &RefCell<Tracker>| t.borrow_mut().value(p);
    let no_constraints: Vec<fn(&[f64], &mut &RefCell<Tracker>) -> f64> = Vec::new();
    let tols = cobyla::StopTols {
        ftol_rel: config.ftol,
        ftol_abs: 0.0,
        xtol_rel: 0.0,
        xtol_abs: vec![config.cobyla_rho_end; n],
    };
    let status = cobyla::minimize(
        func,
        &x,
        bounds,
        &no_constraints,
        &tracker,
        config.max_evals,
        cobyla::RhoBeg::All(config.cobyla_rho_begin),
        Some(tols),
    );
    let exhausted = matches!(status, Ok((cobyla::SuccessStatus::MaxEvalReached, ..)));
    tracker.into_inner().outcome(exhausted)
}

/// Outcome of several seeded local minimizations.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiStartOutcome {
    pub best: MinimizeOutcome,
    pub selected_restart: usize,
    pub restart_values: Vec<f64>,
    pub n_evals: usize,
    pub any_exhausted: bool,
}

/// Runs one minimization per start and keeps the lowest value (first one on
/// ties). `make_objective(k)` builds a fresh objective for restart `k` so
/// the restarts can run in parallel.
pub fn multistart_postselect<O, F>(
    make_objective: F,
    starts: &[Vec<f64>],
    bounds: &[(f64, f64)],
    method: Method,
    config: &OptimizerConfig,
) -> Result<MultiStartOutcome>
where
    O: Objective,
    F: Fn(usize) -> Result<O> + Sync,
{
    use rayon::prelude::*;
    if starts.is_empty() {
        return Err(Error::Config("multi-start needs at least one start".into()));
    }
    let runs: Vec<MinimizeOutcome> = starts
        .par_iter()
        .enumerate()
        .map(|(k, x0)| {
            let mut objective = make_objective(k)?;
            minimize_energy(&mut objective, x0, bounds, method, config)
        })
        .collect::<Result<_>>()?;
    let mut selected = 0;
    for (k, r) in runs.iter().enumerate() {
        if r.value < runs[selected].value {
            selected = k;
        }
    }
    Ok(MultiStartOutcome {
        restart_values: runs.iter().map(|r| r.value).collect(),
        n_evals: runs.iter().map(|r| r.n_evals).sum(),
        any_exhausted: runs.iter().any(|r| r.exhausted),
        selected_restart: selected,
        best: runs[selected].clone(),
    })
}

/// Seeded uniform starts in the box.
pub fn uniform_starts(bounds: &[(f64, f64)], count: usize, seed: u64) -> Vec<Vec<f64>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| bounds.iter().map(|&(lo, hi)| if lo < hi { rng.random_range(lo..hi) } else { lo }).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(f: impl FnMut(&[f64]) -> f64, x0: &[f64], bounds: &[(f64, f64)], method: Method, max_evals: usize) -> MinimizeOutcome {
        let config = OptimizerConfig {
            max_evals,
            ..Default::default()
        };
        minimize_energy(&mut FnObjective(f), x0, bounds, method, &config).unwrap()
    }

    #[test]
    fn quadratic_bowl() {
        let bowl = |x: &[f64]| x.iter().map(|v| (v - 1.0).powi(2)).sum::<f64>();
        let b = [(-5.0, 5.0); 3];
        for method in [Method::QuasiNewton, Method::Cobyla] {
            let r = run(bowl, &[0.0, -2.0, 3.0], &b, method, 3000);
            for v in &r.x {
                assert!((v - 1.0).abs() < 1e-3, "{method:?}: {r:?}");
            }
        }
        let r = run(bowl, &[0.0, -2.0, 3.0], &b, Method::QuasiNewton, 3000);
        assert!(r.x.iter().all(|v| (v - 1.0).abs() < 1e-6));
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = run(f, &[-1.2, 1.0], &[(-5.0, 5.0); 2], Method::QuasiNewton, 5000);
        assert!(r.value < 1e-6, "{r:?}");
        assert!(r.n_evals <= 5000);
    }

    #[test]
    fn cobyla_tolerates_a_constant_bias() {
        let f = |x: &[f64]| x.iter().map(|v| (v - 0.3).powi(2)).sum::<f64>() + 7.5;
        let r = run(f, &[1.0, -1.0, 0.0], &[(-2.0, 2.0); 3], Method::Cobyla, 3000);
        assert!(r.x.iter().all(|v| (v - 0.3).abs() < 1e-3), "{r:?}");
    }

    #[test]
    fn bounds_are_respected() {
        let f = |x: &[f64]| (x[0] - 3.0).powi(2);
        let r = run(f, &[0.0], &[(-1.0, 1.0)], Method::QuasiNewton, 500);
        assert!((r.x[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn budget_exhaustion_returns_best_so_far() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let start = f(&[-1.2, 1.0]);
        let r = run(f, &[-1.2, 1.0], &[(-5.0, 5.0); 2], Method::QuasiNewton, 20);
        assert!(r.exhausted);
        assert!(r.value <= start);
        assert_eq!(r.value, f(&r.x));
    }

    #[test]
    fn multistart_finds_the_global_well() {
        // Wells at -2 (depth 1) and +2 (depth 0.5).
        let f = |x: &[f64]| -(-(x[0] + 2.0).powi(2)).exp() - 0.5 * (-(x[0] - 2.0).powi(2)).exp();
        let bounds = [(-4.0, 4.0)];
        let starts = uniform_starts(&bounds, 10, 3);
        let config = OptimizerConfig::default();
        let r = multistart_postselect(|_| Ok(FnObjective(f)), &starts, &bounds, Method::QuasiNewton, &config).unwrap();
        assert!((r.best.x[0] + 2.0).abs() < 1e-3);
        assert!(r.restart_values.iter().all(|&v| r.best.value <= v));
        let single = multistart_postselect(|_| Ok(FnObjective(f)), &starts[..1], &bounds, Method::QuasiNewton, &config).unwrap();
        let direct = minimize_energy(&mut FnObjective(f), &starts[0], &bounds, Method::QuasiNewton, &config).unwrap();
        assert_eq!(single.best, direct);
    }

    #[test]
    fn exact_gradients_are_used() {
        struct Bowl(usize);
        impl Objective for Bowl {
            fn value(&mut self, x: &[f64]) -> f64 {
                self.0 += 1;
                x.iter().map(|v| (v - 0.5).powi(2)).sum()
            }
            fn value_gradient(&mut self, x: &[f64]) -> Option<(f64, Vec<f64>)> {
                let v = x.iter().map(|v| (v - 0.5).powi(2)).sum();
                Some((v, x.iter().map(|v| 2.0 * (v - 0.5)).collect()))
            }
        }
        let mut bowl = Bowl(0);
        let r = minimize_energy(&mut bowl, &[2.0; 6], &[(-3.0, 3.0); 6], Method::QuasiNewton, &OptimizerConfig::default()).unwrap();
        assert!(r.x.iter().all(|v| (v - 0.5).abs() < 1e-8));
        // Line-search values only, no differencing.
        assert!(bowl.0 < 20, "{}", bowl.0);
    }
}
