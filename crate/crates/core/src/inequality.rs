//! Both sides of the reversed Copson inequality on finite truncations
//!
//! ```text
//!   Σ_{n≤N} ( Λ_n^{-1} Σ_{k=n..N} λ_k x_k )^p  ≥  (p/(L−p))^p Σ_{n≤N} x_n^p
//! ```
//!
//! its scale-invariant ratio, and the dual form with the negative conjugate
//! exponent `q = p/(p−1)`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::params::{check_p, Exponents};
use crate::sum::{log_add_exp, log_sum_exp, NeumaierSum};
use crate::weights::{parse_number_lines, WeightFamily, WeightTable};

/// Finite non-negative sequence `x_1..x_N` with at least one positive entry.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSequence {
    values: Vec<f64>,
}

impl TruncatedSequence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSequence("sequence must be non-empty".into()));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::InvalidSequence(format!(
                "x_{} = {v} is not a finite non-negative number",
                i + 1
            )));
        }
        if !values.iter().any(|&v| v > 0.0) {
            return Err(Error::InvalidSequence(
                "sequence needs at least one positive entry".into(),
            ));
        }
        Ok(TruncatedSequence { values })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::new(parse_number_lines(&text)?)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.values.iter().all(|&v| v > 0.0)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v * c).collect())
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// `x^p` with the continuous extension `0^p = 0`.
#[inline]
fn pow_p(x: f64, p: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.powf(p)
    }
}

impl WeightTable {
    /// Tail sums `S_n = Σ_{k=n..N} λ_k x_k` by one backward pass.
    pub fn tail_sums(&self, x: &[f64]) -> Vec<f64> {
        let mut tails = vec![0.0; x.len()];
        let mut acc = NeumaierSum::new();
        for n in (1..=x.len()).rev() {
            acc += self.lambda(n) * x[n - 1];
            tails[n - 1] = acc.sum();
        }
        tails
    }

    /// Left side of the inequality; `x.len()` must not exceed the table horizon.
    pub fn copson_lhs(&self, x: &[f64], p: f64) -> f64 {
        let tails = self.tail_sums(x);
        tails
            .iter()
            .enumerate()
            .map(|(i, s)| pow_p(s / self.big_lambda(i + 1), p))
            .collect::<NeumaierSum>()
            .sum()
    }

    pub fn ratio(&self, x: &[f64], p: f64) -> f64 {
        let den = x.iter().map(|&v| pow_p(v, p)).collect::<NeumaierSum>().sum();
        self.copson_lhs(x, p) / den
    }

    /// `ln` of the ratio at `x = exp(t)`, evaluated entirely in log space so
    /// that rapidly decaying sequences neither underflow nor overflow.
    pub fn log_ratio_from_log(&self, t: &[f64], p: f64) -> f64 {
        let n_len = t.len();
        let mut log_tail = f64::NEG_INFINITY;
        let mut num_terms = vec![0.0; n_len];
        for n in (1..=n_len).rev() {
            log_tail = log_add_exp(log_tail, self.lambda(n).ln() + t[n - 1]);
            num_terms[n - 1] = p * (log_tail - self.big_lambda(n).ln());
        }
        let den_terms: Vec<f64> = t.iter().map(|v| p * v).collect();
        log_sum_exp(&num_terms) - log_sum_exp(&den_terms)
    }

    /// `ln` ratio at `x = exp(t)` together with its gradient with respect to `t`.
    ///
    /// The gradient sums to zero (the ratio is invariant under `t ↦ t + c`).
    pub fn log_ratio_and_grad(&self, t: &[f64], p: f64) -> (f64, Vec<f64>) {
        let n_len = t.len();
        // log S_n and log of (S_n/Λ_n)
        let mut log_tail = vec![0.0; n_len];
        let mut acc = f64::NEG_INFINITY;
        for n in (1..=n_len).rev() {
            acc = log_add_exp(acc, self.lambda(n).ln() + t[n - 1]);
            log_tail[n - 1] = acc;
        }
        let log_avg: Vec<f64> = (1..=n_len)
            .map(|n| log_tail[n - 1] - self.big_lambda(n).ln())
            .collect();
        let num_terms: Vec<f64> = log_avg.iter().map(|a| p * a).collect();
        let den_terms: Vec<f64> = t.iter().map(|v| p * v).collect();
        let log_num = log_sum_exp(&num_terms);
        let log_den = log_sum_exp(&den_terms);

        // ∂num/∂x_j = λ_j Σ_{n≤j} p (S_n/Λ_n)^{p−1} / Λ_n, accumulated as a log prefix.
        let mut grad = vec![0.0; n_len];
        let mut log_prefix = f64::NEG_INFINITY;
        let ln_p = p.ln();
        for j in 1..=n_len {
            let ln_big = self.big_lambda(j).ln();
            log_prefix = log_add_exp(log_prefix, (p - 1.0) * log_avg[j - 1] - ln_big);
            let from_num = (ln_p + t[j - 1] + self.lambda(j).ln() + log_prefix - log_num).exp();
            let from_den = (ln_p + p * t[j - 1] - log_den).exp();
            grad[j - 1] = from_num - from_den;
        }
        (log_num - log_den, grad)
    }
}

/// `Σ_{n≤N} (Λ_n^{-1} Σ_{k=n..N} λ_k x_k)^p`.
pub fn copson_lhs(family: &WeightFamily, x: &TruncatedSequence, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(family.table(x.len())?.copson_lhs(x.values(), p))
}

/// `copson_lhs / Σ x_n^p`; homogeneous of degree zero.
pub fn ratio_functional(family: &WeightFamily, x: &TruncatedSequence, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(family.table(x.len())?.ratio(x.values(), p))
}

/// `ratio − (p/(L−p))^p`; non-negative iff `x` satisfies the inequality.
pub fn verify_inequality(
    family: &WeightFamily,
    x: &TruncatedSequence,
    exps: &Exponents,
) -> Result<f64> {
    Ok(ratio_functional(family, x, exps.p())? - exps.target_constant())
}

/// The two sides of the dual inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualSides {
    pub lhs: f64,
    pub rhs: f64,
}

impl DualSides {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs + tol
    }
}

/// `lhs = Σ_n (λ_n Σ_{k≤n} x_k/Λ_k)^q` and `rhs = (p/(L−p))^q Σ x_n^q`.
///
/// Requires every `x_n > 0`, since `q < 0`.
pub fn dual_sides(
    family: &WeightFamily,
    x: &TruncatedSequence,
    exps: &Exponents,
) -> Result<DualSides> {
    if let Some((i, v)) = x.values().iter().enumerate().find(|(_, v)| **v <= 0.0) {
        return Err(Error::InvalidSequence(format!(
            "dual form needs x_n > 0; x_{} = {v}",
            i + 1
        )));
    }
    let q = exps.q();
    let table = family.table(x.len())?;
    let mut head = NeumaierSum::new();
    let mut lhs = NeumaierSum::new();
    for (i, &v) in x.values().iter().enumerate() {
        let n = i + 1;
        head += v / table.big_lambda(n);
        lhs += (table.lambda(n) * head.sum()).powf(q);
    }
    let rhs_sum = x.values().iter().map(|v| v.powf(q)).collect::<NeumaierSum>().sum();
    Ok(DualSides {
        lhs: lhs.sum(),
        rhs: exps.constant_base().powf(q) * rhs_sum,
    })
}
