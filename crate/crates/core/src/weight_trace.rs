//! The auxiliary weight sequence `w` with `w_1 = 1` and
//! `w_{n+1} = (1 + (L/p − 2) λ_n/Λ_n) w_n`, and checks of the two identities
//! it is built to satisfy.
//!
//! `w` grows like a power of `n`, so the trace keeps `ln w_n` (a compensated
//! prefix sum of the per-step log factors) rather than `w_n` itself.

use std::collections::BTreeMap;

use serde_json::Value;

use crate::certify::{
    index_condition_on_table, Certificate, CertParams, ConditionId, MarginTracker,
};
use crate::error::{Error, Result};
use crate::params::Exponents;
use crate::sum::NeumaierSum;
use crate::weights::{WeightFamily, WeightTable};

#[derive(Debug, Clone)]
pub struct WeightTrace {
    family: WeightFamily,
    exps: Exponents,
    /// `ln(w_{n+1}/w_n)` for `n = 1..=N`.
    log_factor: Vec<f64>,
    /// `ln w_n` for `n = 1..=N+1`.
    log_w: Vec<f64>,
}

impl WeightTrace {
    pub fn family(&self) -> &WeightFamily {
        &self.family
    }

    pub fn exponents(&self) -> &Exponents {
        &self.exps
    }

    /// `N`: the trace holds `w_1..w_{N+1}`.
    pub fn horizon(&self) -> usize {
        self.log_factor.len()
    }

    pub fn log_w(&self, n: usize) -> f64 {
        self.log_w[n - 1]
    }

    /// `w_n`; may overflow to infinity for long traces, see [`WeightTrace::log_w`].
    pub fn w(&self, n: usize) -> f64 {
        self.log_w[n - 1].exp()
    }

    /// `w_{n+1}/w_n`.
    pub fn factor(&self, n: usize) -> f64 {
        self.log_factor[n - 1].exp()
    }

    pub fn log_factor(&self, n: usize) -> f64 {
        self.log_factor[n - 1]
    }

    fn check_matches(&self, family: &WeightFamily, exps: &Exponents) -> Result<()> {
        if &self.family != family || &self.exps != exps {
            return Err(Error::param(
                "weight trace was built for a different family or exponents",
            ));
        }
        Ok(())
    }
}

/// Builds `w_1..w_{N+1}`.
pub fn build_weights(family: &WeightFamily, exps: &Exponents, horizon: usize) -> Result<WeightTrace> {
    if horizon == 0 {
        return Err(Error::param("horizon N must be ≥ 1"));
    }
    let table = family.table(horizon)?;
    let c = exps.l() / exps.p() - 2.0;
    let mut log_factor = Vec::with_capacity(horizon);
    let mut log_w = Vec::with_capacity(horizon + 1);
    let mut acc = NeumaierSum::new();
    log_w.push(0.0);
    for n in 1..=horizon {
        let step = c * table.density(n);
        if !(step > -1.0) {
            return Err(Error::param(format!(
                "non-positive weight factor 1 + (L/p−2)λ_n/Λ_n = {} at n={n}",
                1.0 + step
            )));
        }
        let lf = step.ln_1p();
        acc += lf;
        log_factor.push(lf);
        log_w.push(acc.sum());
    }
    Ok(WeightTrace {
        family: family.clone(),
        exps: *exps,
        log_factor,
        log_w,
    })
}

/// Largest relative residual of `Λ_n^{-1} Σ_{i≤n} λ_i w_i = (p/(L−p)) w_{n+1}`
/// over `n ≤ N`.
///
/// The running sum is kept as `Σ_{i≤n} λ_i w_i / w_n`, rescaled by the stored
/// step factors, so it never overflows.
pub fn verify_mean_identity(
    family: &WeightFamily,
    exps: &Exponents,
    trace: &WeightTrace,
) -> Result<f64> {
    trace.check_matches(family, exps)?;
    let table = family.table(trace.horizon())?;
    let c = exps.constant_base();
    let mut scaled = 0.0;
    let mut worst: f64 = 0.0;
    for n in 1..=trace.horizon() {
        if n > 1 {
            scaled *= (-trace.log_factor(n - 1)).exp();
        }
        scaled += table.lambda(n);
        // lhs / rhs − 1 with both sides divided by w_n
        let lhs = scaled / table.big_lambda(n);
        let rhs = c * trace.factor(n);
        worst = worst.max(((lhs - rhs) / rhs).abs());
    }
    Ok(worst)
}

/// Per-index margins of the weighted condition
///
/// ```text
///   (Σ_{i≤n} λ_i w_i)^{1/(p−1)} ≤ (p/(L−p))^{p/(p−1)} λ_n^{p/(1−p)}
///       · ( λ_n^{1/(p−1)} w_n^{1/(p−1)} Λ_n^{−p/(1−p)} − λ_{n+1}^{1/(p−1)} w_{n+1}^{1/(p−1)} Λ_{n+1}^{−p/(1−p)} )
/// ```
///
/// evaluated with the trace's `w`. Each margin is `(RHS/LHS − 1)` rescaled by
/// `(λ_n/Λ_n)·(L−p)/p`, which puts it on the same scale as the unweighted
/// index condition so the two verdicts can be compared with one tolerance.
pub fn weighted_condition_margins(
    table: &WeightTable,
    exps: &Exponents,
    trace: &WeightTrace,
    horizon: usize,
) -> Vec<f64> {
    let p = exps.p();
    let b = 1.0 / (1.0 - p);
    let c = exps.constant_base();
    let ln_c = c.ln();
    // Σ_{i≤n} λ_i w_i / w_n
    let mut scaled = 0.0;
    let mut out = Vec::with_capacity(horizon);
    for n in 1..=horizon {
        if n > 1 {
            scaled *= (-trace.log_factor(n - 1)).exp();
        }
        scaled += table.lambda(n);
        let (l0, l1) = (table.lambda(n), table.lambda(n + 1));
        let b0 = table.big_lambda(n);
        let e1 = -p * b * ln_c + b * scaled.ln() - l0.ln() - p * b * b0.ln();
        // second exponent minus the first; each piece is a small log ratio
        let d = b * ((l0 - l1) / l1).ln_1p()
            - b * trace.log_factor(n)
            - p * b * (l1 / b0).ln_1p();
        let ratio_minus_one = -e1.exp() * d.exp_m1() - 1.0;
        out.push(table.density(n) / c * ratio_minus_one);
    }
    out
}

/// Certificate for the weighted condition over `n ≤ N`, using `trace`.
pub fn verify_weighted_condition(
    family: &WeightFamily,
    exps: &Exponents,
    trace: &WeightTrace,
    horizon: usize,
    tol: f64,
) -> Result<Certificate> {
    trace.check_matches(family, exps)?;
    if horizon == 0 || horizon > trace.horizon() {
        return Err(Error::param(format!(
            "horizon must lie in 1..={}, got {horizon}",
            trace.horizon()
        )));
    }
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::param(format!("tolerance must be finite and ≥ 0, got {tol}")));
    }
    let table = family.table(horizon + 1)?;
    let mut tracker = MarginTracker::new();
    for (i, m) in weighted_condition_margins(&table, exps, trace, horizon)
        .into_iter()
        .enumerate()
    {
        tracker.push(i + 1, m);
    }
    let mut info = BTreeMap::new();
    if let Some(n) = tracker.non_finite_at {
        info.insert("non_finite_at".into(), Value::from(n));
    }
    Ok(Certificate {
        condition_id: ConditionId::WeightedIndexCondition,
        params: CertParams {
            p: Some(exps.p()),
            l: exps.l(),
            m: None,
        },
        horizon,
        tol,
        passed: tracker.passed(tol),
        min_margin: tracker.min,
        argmin_n: tracker.argmin,
        info,
    })
}

/// Both certificates side by side, sharing one weight table.
pub fn weighted_and_direct(
    family: &WeightFamily,
    exps: &Exponents,
    horizon: usize,
    tol: f64,
) -> Result<(Certificate, Certificate)> {
    let trace = build_weights(family, exps, horizon)?;
    let weighted = verify_weighted_condition(family, exps, &trace, horizon, tol)?;
    let table = family.table(horizon + 1)?;
    let direct = index_condition_on_table(&table, exps, horizon, tol);
    Ok((weighted, direct))
}
