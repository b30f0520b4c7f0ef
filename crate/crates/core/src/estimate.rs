//! Upper bounds on the best constant, i.e. on the infimum of the ratio
//! functional over truncated sequences.
//!
//! Every value produced here is attained by an explicit sequence, so it is an
//! upper bound on the infimum at that truncation length; nothing here certifies
//! optimality.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inequality::TruncatedSequence;
use crate::params::check_p;
use crate::sum::log_sum_exp;
use crate::weights::{WeightFamily, WeightTable};

/// Default truncation schedule of the estimator.
pub const DEFAULT_SCHEDULE: [usize; 4] = [250, 500, 1000, 2000];

/// Maximum number of step halvings per line search.
pub const MAX_HALVINGS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum StepRule {
    /// Constant step along the search direction; every step is taken.
    Fixed(f64),
    /// Halve from a trial step until the log-ratio decreases.
    Backtracking,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Init {
    Uniform,
    /// `x_n = n^{−1/p−ε}`.
    Extremal(f64),
    /// Log-uniform entries drawn from the configured seed.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "memory")]
pub enum Method {
    SteepestDescent,
    /// Limited-memory BFGS directions with the given history length.
    Lbfgs(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizerConfig {
    #[serde(rename = "N")]
    pub n: usize,
    pub max_iters: usize,
    pub step_rule: StepRule,
    pub init: Init,
    pub method: Method,
    pub tol_stationarity: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            n: 250,
            max_iters: 5000,
            step_rule: StepRule::Backtracking,
            init: Init::Extremal(0.1),
            method: Method::Lbfgs(10),
            tol_stationarity: 1e-9,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::param("truncation length N must be ≥ 1"));
        }
        if !(self.tol_stationarity.is_finite() && self.tol_stationarity > 0.0) {
            return Err(Error::param("stationarity tolerance must be positive"));
        }
        if let StepRule::Fixed(s) = self.step_rule {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::param(format!("fixed step must be positive, got {s}")));
            }
        }
        if let Init::Extremal(eps) = self.init {
            if !(eps.is_finite() && eps > 0.0) {
                return Err(Error::param(format!("extremal init needs ε > 0, got {eps}")));
            }
        }
        if let Method::Lbfgs(0) = self.method {
            return Err(Error::param("L-BFGS memory must be ≥ 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioEstimate {
    /// Best ratio visited: an upper bound on the truncated infimum.
    pub value: f64,
    pub initial_value: f64,
    /// Achieving sequence, normalised to `Σ x_n^p = 1`.
    pub sequence: Vec<f64>,
    pub iterations: usize,
    /// Euclidean norm of the log-coordinate gradient at the returned point.
    pub residual: f64,
    pub converged: bool,
    /// Best ratio after each iteration (index 0 is the starting point).
    pub trace: Vec<f64>,
}

fn extremal_log_sequence(p: f64, eps: f64, n: usize) -> Vec<f64> {
    let rate = -1.0 / p - eps;
    (1..=n).map(|k| rate * (k as f64).ln()).collect()
}

/// Ratio at `x_n = n^{−1/p−ε}`, `n ≤ N`, evaluated in log space.
pub fn extremal_probe(family: &WeightFamily, p: f64, eps: f64, n: usize) -> Result<f64> {
    check_p(p)?;
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::param(format!("ε must be positive, got {eps}")));
    }
    if n == 0 {
        return Err(Error::param("N must be ≥ 1"));
    }
    let table = family.table(n)?;
    Ok(table.log_ratio_from_log(&extremal_log_sequence(p, eps, n), p).exp())
}

/// Shift `t` so that `Σ e^{p t_n} = 1`.
fn normalize(t: &mut [f64], p: f64) {
    let scaled: Vec<f64> = t.iter().map(|v| p * v).collect();
    let shift = log_sum_exp(&scaled) / p;
    for v in t.iter_mut() {
        *v -= shift;
    }
}

/// Removes the component along `(1,…,1)`, the direction of pure rescaling.
fn project_out_scale(g: &mut [f64]) {
    let mean = g.iter().sum::<f64>() / g.len() as f64;
    for v in g.iter_mut() {
        *v -= mean;
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn eval(table: &WeightTable, t: &[f64], p: f64) -> (f64, Vec<f64>) {
    let (f, mut g) = table.log_ratio_and_grad(t, p);
    project_out_scale(&mut g);
    (f, g)
}

struct Lbfgs {
    memory: usize,
    s: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
}

impl Lbfgs {
    fn new(memory: usize) -> Self {
        Lbfgs {
            memory,
            s: Vec::new(),
            y: Vec::new(),
        }
    }

    fn clear(&mut self) {
        self.s.clear();
        self.y.clear();
    }

    fn push(&mut self, s: Vec<f64>, y: Vec<f64>) {
        if dot(&s, &y) <= 1e-300 {
            return;
        }
        if self.s.len() == self.memory {
            self.s.remove(0);
            self.y.remove(0);
        }
        self.s.push(s);
        self.y.push(y);
    }

    /// Two-loop recursion: returns `−H g`.
    fn direction(&self, g: &[f64]) -> Vec<f64> {
        let k = self.s.len();
        let mut q = g.to_vec();
        let mut alpha = vec![0.0; k];
        for i in (0..k).rev() {
            let rho = 1.0 / dot(&self.y[i], &self.s[i]);
            alpha[i] = rho * dot(&self.s[i], &q);
            for (qj, yj) in q.iter_mut().zip(&self.y[i]) {
                *qj -= alpha[i] * yj;
            }
        }
        if k > 0 {
            let gamma = dot(&self.s[k - 1], &self.y[k - 1]) / dot(&self.y[k - 1], &self.y[k - 1]);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for i in 0..k {
            let rho = 1.0 / dot(&self.y[i], &self.s[i]);
            let beta = rho * dot(&self.y[i], &q);
            for (qj, sj) in q.iter_mut().zip(&self.s[i]) {
                *qj += (alpha[i] - beta) * sj;
            }
        }
        q.iter_mut().for_each(|v| *v = -*v);
        q
    }
}

fn initial_point(config: &OptimizerConfig, p: f64) -> Vec<f64> {
    match config.init {
        Init::Uniform => vec![0.0; config.n],
        Init::Extremal(eps) => extremal_log_sequence(p, eps, config.n),
        Init::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            (0..config.n).map(|_| rng.gen_range(-3.0..0.0)).collect()
        }
    }
}

/// Descends the log-ratio in the coordinates `t_n = ln x_n`, renormalising to
/// `Σ x_n^p = 1` after every step, and returns the best point visited.
///
/// Deterministic for a given config (the seed only matters for random init).
pub fn minimize_ratio(family: &WeightFamily, p: f64, config: &OptimizerConfig) -> Result<RatioEstimate> {
    check_p(p)?;
    config.validate()?;
    let table = family.table(config.n)?;
    let mut t = initial_point(config, p);
    normalize(&mut t, p);
    let (mut f, mut g) = eval(&table, &t, p);
    if !f.is_finite() {
        return Err(Error::non_finite("initial point", format!("log ratio = {f}")));
    }
    let initial_value = f.exp();
    let mut best_f = f;
    let mut best_t = t.clone();
    let mut best_res = norm(&g);
    let mut trace = vec![initial_value];
    let mut lbfgs = match config.method {
        Method::Lbfgs(m) => Some(Lbfgs::new(m)),
        Method::SteepestDescent => None,
    };
    let mut steepest_step = 1.0;
    let mut converged = best_res <= config.tol_stationarity;
    let mut iterations = 0;

    while !converged && iterations < config.max_iters {
        iterations += 1;
        let mut d = match &lbfgs {
            Some(h) => h.direction(&g),
            None => g.iter().map(|v| -v).collect(),
        };
        project_out_scale(&mut d);
        if dot(&d, &g) >= 0.0 {
            d = g.iter().map(|v| -v).collect();
            if let Some(h) = lbfgs.as_mut() {
                h.clear();
            }
        }
        let trial_step = match (config.step_rule, &lbfgs) {
            (StepRule::Fixed(s), _) => s,
            (StepRule::Backtracking, Some(h)) if !h.s.is_empty() => 1.0,
            (StepRule::Backtracking, Some(_)) => 1.0 / norm(&g).max(1.0),
            (StepRule::Backtracking, None) => steepest_step,
        };

        let mut accepted = None;
        let mut step = trial_step;
        for _ in 0..=MAX_HALVINGS {
            let candidate: Vec<f64> = t.iter().zip(&d).map(|(a, b)| a + step * b).collect();
            let (fc, gc) = eval(&table, &candidate, p);
            let take = match config.step_rule {
                StepRule::Fixed(_) => fc.is_finite(),
                StepRule::Backtracking => fc.is_finite() && fc < f,
            };
            if take {
                accepted = Some((candidate, fc, gc));
                break;
            }
            if matches!(config.step_rule, StepRule::Fixed(_)) {
                break;
            }
            step *= 0.5;
        }
        let Some((mut candidate, fc, gc)) = accepted else {
            // no decrease within the halving budget
            break;
        };
        if matches!(config.step_rule, StepRule::Backtracking) && lbfgs.is_none() {
            steepest_step = if step == trial_step { step * 2.0 } else { step };
        }
        if let Some(h) = lbfgs.as_mut() {
            let s: Vec<f64> = d.iter().map(|v| step * v).collect();
            let y: Vec<f64> = gc.iter().zip(&g).map(|(a, b)| a - b).collect();
            h.push(s, y);
        }
        normalize(&mut candidate, p);
        t = candidate;
        f = fc;
        g = gc;
        let res = norm(&g);
        if f < best_f {
            best_f = f;
            best_t = t.clone();
            best_res = res;
        }
        trace.push(best_f.exp());
        if res <= config.tol_stationarity {
            converged = true;
        }
    }

    let sequence: Vec<f64> = best_t.iter().map(|v| v.exp()).collect();
    Ok(RatioEstimate {
        value: best_f.exp(),
        initial_value,
        sequence,
        iterations,
        residual: best_res,
        converged,
        trace,
    })
}

/// Runs [`minimize_ratio`] once per truncation length in `schedule`.
pub fn estimate_schedule(
    family: &WeightFamily,
    p: f64,
    base: &OptimizerConfig,
    schedule: &[usize],
) -> Result<Vec<RatioEstimate>> {
    schedule
        .iter()
        .map(|&n| minimize_ratio(family, p, &base.with_n(n)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub value: f64,
    pub sequence: Vec<f64>,
}

/// Exhaustive grid search for `N ≤ 3` over directions `u_n = x_n^p` on the
/// unit simplex with `resolution` cells per axis.
pub fn brute_force_oracle(
    family: &WeightFamily,
    p: f64,
    n: usize,
    resolution: usize,
) -> Result<OracleResult> {
    check_p(p)?;
    if !(1..=3).contains(&n) {
        return Err(Error::param(format!("brute-force oracle supports N ∈ {{1,2,3}}, got {n}")));
    }
    if n >= 2 && resolution < 1000 {
        return Err(Error::param(format!(
            "resolution must be ≥ 1000 per axis, got {resolution}"
        )));
    }
    let table = family.table(n)?;
    if n == 1 {
        return Ok(OracleResult {
            value: table.ratio(&[1.0], p),
            sequence: vec![1.0],
        });
    }
    let inv_p = 1.0 / p;
    let g = resolution as f64;
    let mut best = OracleResult {
        value: f64::INFINITY,
        sequence: Vec::new(),
    };
    let mut x = vec![0.0; n];
    let consider = |x: &[f64], best: &mut OracleResult| {
        let r = table.ratio(x, p);
        if r < best.value {
            best.value = r;
            best.sequence = x.to_vec();
        }
    };
    if n == 2 {
        for i in 0..=resolution {
            let u = i as f64 / g;
            x[0] = u.powf(inv_p);
            x[1] = (1.0 - u).powf(inv_p);
            consider(&x, &mut best);
        }
    } else {
        for i in 0..=resolution {
            for j in 0..=(resolution - i) {
                let (u1, u2) = (i as f64 / g, j as f64 / g);
                let u3 = ((resolution - i - j) as f64 / g).max(0.0);
                x[0] = u1.powf(inv_p);
                x[1] = u2.powf(inv_p);
                x[2] = u3.powf(inv_p);
                consider(&x, &mut best);
            }
        }
    }
    Ok(best)
}

/// Gradient of `ln ratio` with respect to `x` (all entries must be positive).
pub fn log_ratio_gradient(family: &WeightFamily, x: &TruncatedSequence, p: f64) -> Result<Vec<f64>> {
    check_p(p)?;
    if !x.is_strictly_positive() {
        return Err(Error::InvalidSequence("gradient needs every x_n > 0".into()));
    }
    let table = family.table(x.len())?;
    let t: Vec<f64> = x.values().iter().map(|v| v.ln()).collect();
    let (_, g) = table.log_ratio_and_grad(&t, p);
    Ok(g.iter().zip(x.values()).map(|(gt, xv)| gt / xv).collect())
}

/// Norm of the gradient of `ln ratio` in log coordinates, with the pure
/// rescaling direction projected out. Zero at stationary points.
pub fn stationarity_check(family: &WeightFamily, x: &TruncatedSequence, p: f64) -> Result<f64> {
    check_p(p)?;
    if !x.is_strictly_positive() {
        return Err(Error::InvalidSequence(
            "stationarity check needs every x_n > 0".into(),
        ));
    }
    let table = family.table(x.len())?;
    let t: Vec<f64> = x.values().iter().map(|v| v.ln()).collect();
    let (_, mut g) = table.log_ratio_and_grad(&t, p);
    project_out_scale(&mut g);
    Ok(norm(&g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequality::ratio_functional;

    /// Golden-section minimisation of a unimodal function on `[a, b]`.
    fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
        let r = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - r * (b - a);
        let mut d = a + r * (b - a);
        for _ in 0..200 {
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
            c = b - r * (b - a);
            d = a + r * (b - a);
        }
        let x = 0.5 * (a + b);
        (x, f(x))
    }

    #[test]
    fn single_entry_is_one() {
        let est = minimize_ratio(&WeightFamily::Unit, 0.3, &OptimizerConfig::default().with_n(1)).unwrap();
        assert_eq!(est.value, 1.0);
        assert_eq!(est.residual, 0.0);
        assert_eq!(extremal_probe(&WeightFamily::Unit, 0.4, 0.1, 1).unwrap(), 1.0);
        let o = brute_force_oracle(&WeightFamily::Unit, 0.4, 1, 0).unwrap();
        assert_eq!(o.value, 1.0);
    }

    #[test]
    fn two_point_oracle_matches_one_dimensional_minimum() {
        let (s, v) = golden_min(
            |s: f64| ((s + 1.0).sqrt() + 0.5f64.sqrt()) / (s.sqrt() + 1.0),
            1.0,
            100.0,
        );
        assert!((s - 14.0).abs() < 1.0, "argmin {s}");
        let o = brute_force_oracle(&WeightFamily::Unit, 0.5, 2, 2000).unwrap();
        assert!((o.value - v).abs() < 1e-6, "{} vs {v}", o.value);
        assert!((o.value - 0.9659).abs() < 1e-3);
    }

    #[test]
    fn oracle_rejects_bad_inputs() {
        assert!(brute_force_oracle(&WeightFamily::Unit, 0.5, 4, 1000).is_err());
        assert!(brute_force_oracle(&WeightFamily::Unit, 0.5, 2, 999).is_err());
        assert!(brute_force_oracle(&WeightFamily::Unit, 1.5, 2, 1000).is_err());
    }

    #[test]
    fn minimizer_beats_one_at_half() {
        let est = minimize_ratio(&WeightFamily::Unit, 0.5, &OptimizerConfig::default().with_n(2)).unwrap();
        assert!(est.value < 1.0);
        assert!((est.value - 0.9659).abs() < 1e-3, "{}", est.value);
        assert!(est.value <= est.initial_value);
    }

    #[test]
    fn steepest_descent_also_decreases() {
        let cfg = OptimizerConfig {
            method: Method::SteepestDescent,
            max_iters: 2000,
            ..OptimizerConfig::default().with_n(3)
        };
        let est = minimize_ratio(&WeightFamily::Unit, 0.25, &cfg).unwrap();
        let oracle = brute_force_oracle(&WeightFamily::Unit, 0.25, 3, 1000).unwrap();
        assert!(est.value <= est.initial_value);
        assert!((est.value - oracle.value).abs() < 1e-4, "{} vs {}", est.value, oracle.value);
    }

    #[test]
    fn fixed_step_keeps_best_visited() {
        let cfg = OptimizerConfig {
            step_rule: StepRule::Fixed(50.0),
            method: Method::SteepestDescent,
            max_iters: 50,
            ..OptimizerConfig::default().with_n(20)
        };
        let est = minimize_ratio(&WeightFamily::Unit, 0.3, &cfg).unwrap();
        assert!(est.value <= est.initial_value);
        assert!(est.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn deterministic_given_seed() {
        let cfg = OptimizerConfig {
            init: Init::Random,
            seed: 7,
            max_iters: 200,
            ..OptimizerConfig::default().with_n(30)
        };
        let a = minimize_ratio(&WeightFamily::Unit, 0.3, &cfg).unwrap();
        let b = minimize_ratio(&WeightFamily::Unit, 0.3, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn returned_sequence_reproduces_value() {
        let est = minimize_ratio(&WeightFamily::Unit, 0.3, &OptimizerConfig::default().with_n(40)).unwrap();
        let sum_p: f64 = est.sequence.iter().map(|v| v.powf(0.3)).sum();
        assert!((sum_p - 1.0).abs() < 1e-12);
        let x = TruncatedSequence::new(est.sequence.clone()).unwrap();
        let r = ratio_functional(&WeightFamily::Unit, &x, 0.3).unwrap();
        assert!((r - est.value).abs() < 1e-12);
    }

    #[test]
    fn stationarity_examples() {
        let x = TruncatedSequence::new(vec![3.0]).unwrap();
        assert_eq!(stationarity_check(&WeightFamily::Unit, &x, 0.5).unwrap(), 0.0);
        let o = brute_force_oracle(&WeightFamily::Unit, 0.5, 2, 100_000).unwrap();
        let x = TruncatedSequence::new(o.sequence).unwrap();
        assert!(stationarity_check(&WeightFamily::Unit, &x, 0.5).unwrap() <= 1e-3);
        let x = TruncatedSequence::new(vec![1.0, 0.0]).unwrap();
        assert!(stationarity_check(&WeightFamily::Unit, &x, 0.5).is_err());
    }

    #[test]
    fn probe_is_an_upper_bound_for_the_minimizer() {
        let fam = WeightFamily::Unit;
        let est = minimize_ratio(&fam, 0.25, &OptimizerConfig::default().with_n(200)).unwrap();
        for eps in [0.5, 0.1, 0.01, 0.001] {
            let probe = extremal_probe(&fam, 0.25, eps, 200).unwrap();
            assert!(est.value <= probe + 1e-12, "eps={eps}: {} > {probe}", est.value);
        }
    }

    #[test]
    fn probe_survives_underflow() {
        // n^{-1/p} underflows f64 for p = 0.01 long before n = 10^4
        let v = extremal_probe(&WeightFamily::Unit, 0.01, 1e-3, 10_000).unwrap();
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn config_validation() {
        let bad = OptimizerConfig { n: 0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = OptimizerConfig { step_rule: StepRule::Fixed(0.0), ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = OptimizerConfig { init: Init::Extremal(-1.0), ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = OptimizerConfig { method: Method::Lbfgs(0), ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
