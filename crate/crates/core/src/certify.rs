//! Finite-horizon certificates for the sufficient conditions.
//!
//! A passing certificate asserts its condition for `n ≤ N` only. Margins are
//! oriented so that non-negative means "condition holds"; a certificate passes
//! iff its worst margin is strictly greater than `−tol` (a margin of exactly
//! `−tol` fails).

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::params::{rational_to_f64, Exponents, Param};
use crate::polynomials::{
    relaxed_threshold, relaxed_threshold_exact, small_gap_threshold, small_gap_threshold_exact,
    theorem1_applicable_exact, Branch,
};
use crate::weights::{WeightFamily, WeightTable};

/// Default absolute tolerance on margins.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ConditionId {
    /// Per-index inequality between consecutive densities `λ_n/Λ_n`.
    #[serde(rename = "COND_1_6")]
    IndexCondition,
    /// `sup_n gap(n) ≤ L`.
    #[serde(rename = "COND_1_7")]
    GapBound,
    /// `gap(n) ≤ L + M λ_n/Λ_n` for every `n`.
    #[serde(rename = "COND_1_15")]
    RelaxedGapBound,
    /// Polynomial criterion (`a1 ≥ 0` or `a2 ≥ 0` with its `p` range).
    #[serde(rename = "THM1_POLY")]
    PolynomialCriterion,
    /// Explicit threshold on `p` (`L²/4`, or the relaxed minimum when `M` is given).
    #[serde(rename = "THM1PRIME")]
    ThresholdCriterion,
    /// The weighted form of the index condition, evaluated with the constructed weights.
    #[serde(rename = "COND_2_1")]
    WeightedIndexCondition,
}

impl ConditionId {
    pub fn as_str(self) -> &'static str {
        match self {
            ConditionId::IndexCondition => "COND_1_6",
            ConditionId::GapBound => "COND_1_7",
            ConditionId::RelaxedGapBound => "COND_1_15",
            ConditionId::PolynomialCriterion => "THM1_POLY",
            ConditionId::ThresholdCriterion => "THM1PRIME",
            ConditionId::WeightedIndexCondition => "COND_2_1",
        }
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ConditionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "COND_1_6" => ConditionId::IndexCondition,
            "COND_1_7" => ConditionId::GapBound,
            "COND_1_15" => ConditionId::RelaxedGapBound,
            "THM1_POLY" => ConditionId::PolynomialCriterion,
            "THM1PRIME" => ConditionId::ThresholdCriterion,
            "COND_2_1" => ConditionId::WeightedIndexCondition,
            _ => return Err(Error::Parse(format!("unknown condition id {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertParams {
    pub p: Option<f64>,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "M")]
    pub m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub condition_id: ConditionId,
    pub params: CertParams,
    /// Horizon; `0` for criteria that are not indexed by `n`.
    #[serde(rename = "N")]
    pub horizon: usize,
    pub tol: f64,
    pub passed: bool,
    /// Worst margin; serialised as `null` when a non-finite value was met.
    pub min_margin: f64,
    pub argmin_n: usize,
    /// Informational extras (never part of the verdict).
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub info: BTreeMap<String, Value>,
}

impl Certificate {
    /// JSON object with keys in sorted order.
    pub fn to_json_value(&self) -> Value {
        // serde_json's default map is a BTreeMap, so a round trip sorts keys.
        serde_json::to_value(self).expect("certificate serialises")
    }
}

/// Running minimum over per-index margins; the first index attaining the
/// minimum wins, and a non-finite margin is an immediate worst case.
#[derive(Debug, Clone, Copy)]
pub(crate) struct MarginTracker {
    pub min: f64,
    pub argmin: usize,
    pub non_finite_at: Option<usize>,
}

impl MarginTracker {
    pub fn new() -> Self {
        MarginTracker {
            min: f64::INFINITY,
            argmin: 0,
            non_finite_at: None,
        }
    }

    pub fn push(&mut self, n: usize, margin: f64) {
        if self.non_finite_at.is_some() {
            return;
        }
        if !margin.is_finite() {
            self.non_finite_at = Some(n);
            self.min = f64::NEG_INFINITY;
            self.argmin = n;
        } else if margin < self.min {
            self.min = margin;
            self.argmin = n;
        }
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.non_finite_at.is_none() && self.min > -tol
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::param(format!("tolerance must be finite and ≥ 0, got {tol}")));
    }
    Ok(())
}

/// Margin (right side minus left side) of the per-index condition with
/// `x = λ_n/Λ_n`, `y = λ_{n+1}/Λ_{n+1}`:
///
/// ```text
///   (1 + (L/p−2)x)^{1/(1−p)} − (1−y)^{(1+p)/(1−p)} x^{1/(1−p)} y^{−1/(1−p)} − ((L−p)/p)·x
/// ```
///
/// Both powers are near one for small `x`, so they are taken through `expm1`.
pub fn index_condition_margin(exps: &Exponents, x: f64, y: f64) -> f64 {
    let p = exps.p();
    let l = exps.l();
    let b = 1.0 / (1.0 - p);
    let a = (1.0 + p) / (1.0 - p);
    let first = b * ((l / p - 2.0) * x).ln_1p();
    let second = a * (-y).ln_1p() + b * ((x - y) / y).ln_1p();
    first.exp_m1() - second.exp_m1() - (l - p) / p * x
}

/// Checks the per-index condition for `n = 1..=horizon`.
pub fn check_index_condition(
    family: &WeightFamily,
    exps: &Exponents,
    horizon: usize,
    tol: f64,
) -> Result<Certificate> {
    if horizon == 0 {
        return Err(Error::param("horizon N must be ≥ 1"));
    }
    check_tol(tol)?;
    let table = family.table(horizon + 1)?;
    Ok(index_condition_on_table(&table, exps, horizon, tol))
}

pub(crate) fn index_condition_margins(table: &WeightTable, exps: &Exponents, horizon: usize) -> Vec<f64> {
    (1..=horizon)
        .map(|n| index_condition_margin(exps, table.density(n), table.density(n + 1)))
        .collect()
}

pub(crate) fn index_condition_on_table(
    table: &WeightTable,
    exps: &Exponents,
    horizon: usize,
    tol: f64,
) -> Certificate {
    let mut tracker = MarginTracker::new();
    for (i, m) in index_condition_margins(table, exps, horizon).into_iter().enumerate() {
        tracker.push(i + 1, m);
    }
    let mut info = BTreeMap::new();
    // The margin tends to 0 as λ_n/Λ_n → 0; reported for orientation only.
    info.insert("asymptotic_margin".into(), Value::from(0.0));
    info.insert(
        "tail_margin".into(),
        Value::from(index_condition_margin(exps, table.density(horizon), table.density(horizon + 1))),
    );
    if let Some(n) = tracker.non_finite_at {
        info.insert("non_finite_at".into(), Value::from(n));
    }
    Certificate {
        condition_id: ConditionId::IndexCondition,
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
    }
}

/// Checks `sup_{n≤N} gap(n) ≤ L`.
pub fn check_gap_bound(family: &WeightFamily, l: f64, horizon: usize, tol: f64) -> Result<Certificate> {
    check_tol(tol)?;
    if !l.is_finite() {
        return Err(Error::param(format!("L must be finite, got {l}")));
    }
    let scan = family.sup_l_gap(horizon)?;
    let margin = l - scan.sup;
    let mut info = BTreeMap::new();
    info.insert("sup_gap".into(), Value::from(scan.sup));
    info.insert("monotone".into(), Value::from(scan.monotone));
    Ok(Certificate {
        condition_id: ConditionId::GapBound,
        params: CertParams { p: None, l, m: None },
        horizon,
        tol,
        passed: margin > -tol,
        min_margin: margin,
        argmin_n: scan.argmax,
        info,
    })
}

/// Checks `gap(n) ≤ L + M λ_n/Λ_n` for `n = 1..=horizon`.
pub fn check_relaxed_gap_bound(
    family: &WeightFamily,
    l: f64,
    m: f64,
    horizon: usize,
    tol: f64,
) -> Result<Certificate> {
    check_tol(tol)?;
    if !(l > 0.5 && l < 1.0 && m > 0.0 && m < 1.0 && l + 2.0 * m < 1.0) {
        return Err(Error::param(format!(
            "relaxed gap bound needs 1/2 < L < 1, 0 < M < 1, L + 2M < 1; got L={l}, M={m}"
        )));
    }
    if horizon == 0 {
        return Err(Error::param("horizon N must be ≥ 1"));
    }
    let table = family.table(horizon + 1)?;
    let mut tracker = MarginTracker::new();
    for n in 1..=horizon {
        tracker.push(n, l + m * table.density(n) - table.l_gap(n));
    }
    Ok(Certificate {
        condition_id: ConditionId::RelaxedGapBound,
        params: CertParams { p: None, l, m: Some(m) },
        horizon,
        tol,
        passed: tracker.passed(tol),
        min_margin: tracker.min,
        argmin_n: tracker.argmin,
        info: BTreeMap::new(),
    })
}

fn criterion_certificate(
    id: ConditionId,
    p: f64,
    l: f64,
    m: Option<f64>,
    tol: f64,
    margin: f64,
    passed: bool,
    info: BTreeMap<String, Value>,
) -> Certificate {
    Certificate {
        condition_id: id,
        params: CertParams { p: Some(p), l, m },
        horizon: 0,
        tol,
        passed,
        min_margin: margin,
        argmin_n: 0,
        info,
    }
}

/// Polynomial criterion as a certificate, decided exactly over the rationals.
///
/// The margin is the relevant polynomial value when the `p` range holds, and
/// the (negative) slack of the `p` range otherwise.
pub fn check_polynomial_criterion(l: &Param, p: &Param, tol: f64) -> Result<Certificate> {
    check_tol(tol)?;
    let app = theorem1_applicable_exact(&l.exact, &p.exact);
    let (lf, pf) = (l.value, p.value);
    let margin = match app.branch {
        Some(Branch::LargeGap) => app.a1,
        Some(Branch::SmallGap) => app.a2,
        None if lf >= 1.0 && pf > 1.0 / 3.0 => 1.0 / 3.0 - pf,
        None if lf >= 1.0 => app.a1,
        None if lf > 0.0 && pf > lf / 4.0 => lf / 4.0 - pf,
        None => app.a2,
    };
    let mut info = BTreeMap::new();
    info.insert("a1".into(), Value::from(app.a1));
    info.insert("a2".into(), Value::from(app.a2));
    info.insert("branch".into(), Value::from(app.branch_label()));
    info.insert("reason".into(), Value::from(app.reason.clone()));
    let passed = app.applicable();
    Ok(criterion_certificate(
        ConditionId::PolynomialCriterion,
        pf,
        lf,
        None,
        tol,
        margin,
        passed,
        info,
    ))
}

/// Float version of [`check_polynomial_criterion`].
pub fn check_polynomial_criterion_f64(l: f64, p: f64, tol: f64) -> Result<Certificate> {
    check_polynomial_criterion(&Param::from_f64(l)?, &Param::from_f64(p)?, tol)
}

/// Explicit `p` threshold: `p ≤ L²/4` for `0 < L < 1`, or, when `M` is given,
/// `p ≤ min{L(2L−1)/(4(2L+M)), L(1−L−2M)/(2(1−L−M))}`. Decided exactly.
pub fn check_threshold_criterion(
    l: &Param,
    m: Option<&Param>,
    p: &Param,
    tol: f64,
) -> Result<Certificate> {
    check_tol(tol)?;
    let mut info = BTreeMap::new();
    let (threshold_exact, threshold) = match m {
        None => {
            small_gap_threshold(l.value)?;
            let t = small_gap_threshold_exact(&l.exact)?;
            let tf = rational_to_f64(&t);
            info.insert("threshold".into(), Value::from("p_L"));
            (t, tf)
        }
        Some(m) => {
            relaxed_threshold(l.value, m.value)?;
            let (t, branch) = relaxed_threshold_exact(&l.exact, &m.exact)?;
            let tf = rational_to_f64(&t);
            info.insert("threshold".into(), Value::from("relaxed"));
            info.insert("threshold_branch".into(), serde_json::to_value(branch).unwrap_or(Value::Null));
            (t, tf)
        }
    };
    info.insert("p_max".into(), Value::from(threshold));
    let passed = p.exact <= threshold_exact;
    let margin = rational_to_f64(&(&threshold_exact - &p.exact));
    Ok(criterion_certificate(
        ConditionId::ThresholdCriterion,
        p.value,
        l.value,
        m.map(|m| m.value),
        tol,
        margin,
        passed,
        info,
    ))
}
