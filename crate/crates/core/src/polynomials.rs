//! The two polynomial criteria in `(L, p)`, the explicit `p` thresholds, and
//! the decision of which sufficient criterion applies.
//!
//! Every closed form comes in two flavours: `f64`, and exact over `BigRational`
//! for parameters the user wrote down as decimals or fractions.

use std::fmt;

use num_rational::BigRational;
use num_traits::Signed;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{rat, rat_one, rational_to_f64};

/// Criterion polynomial for the `L ≥ 1` branch (column `a1`).
pub fn a1(l: f64, p: f64) -> f64 {
    let c = l / p - 2.0;
    let bracket = l * l * (l - 1.0).powi(2) + 2.0 * l * (l - 1.0) * (l - p - 1.0) + l * l
        - 2.0 * (l - 1.0) * (p + 1.0);
    c * c * (1.0 + l * (2.0 - p) / (1.0 - p)) - (1.0 + c * (1.0 - 2.0 * p) / (1.0 - p)) * bracket
}

/// Criterion polynomial for the `0 < L < 1` branch (column `a2`).
pub fn a2(l: f64, p: f64) -> f64 {
    let l2 = l * l;
    (1.0 / p - 1.0) * l2 * l2 + (1.0 - p) * (1.0 - 2.0 * p) / p * l2 * l
        - (3.0 - p) * (1.0 - p) * l2
        - (p * p - p + 2.0) * l
        + 2.0 * p * (1.0 + p)
}

pub fn a1_exact(l: &BigRational, p: &BigRational) -> BigRational {
    let one = rat_one();
    let two = rat(2, 1);
    let c = l / p - &two;
    let lm1 = l - &one;
    let bracket = l * l * &lm1 * &lm1 + &two * l * &lm1 * (l - p - &one) + l * l
        - &two * &lm1 * (p + &one);
    &c * &c * (&one + l * (&two - p) / (&one - p))
        - (&one + &c * (&one - &two * p) / (&one - p)) * bracket
}

pub fn a2_exact(l: &BigRational, p: &BigRational) -> BigRational {
    let one = rat_one();
    let two = rat(2, 1);
    let three = rat(3, 1);
    let l2 = l * l;
    (&one / p - &one) * &l2 * &l2 + (&one - p) * (&one - &two * p) / p * &l2 * l
        - (&three - p) * (&one - p) * &l2
        - (p * p - p + &two) * l
        + &two * p * (&one + p)
}

/// `p_L = L²/4`, the threshold below which the `0 < L < 1` branch is certified.
pub fn small_gap_threshold(l: f64) -> Result<f64> {
    if !(l > 0.0 && l < 1.0) {
        return Err(Error::param(format!("p_L needs 0 < L < 1, got L={l}")));
    }
    Ok(l * l / 4.0)
}

pub fn small_gap_threshold_exact(l: &BigRational) -> Result<BigRational> {
    if !(l.is_positive() && *l < rat_one()) {
        return Err(Error::param(format!("p_L needs 0 < L < 1, got L={l}")));
    }
    Ok(l * l / rat(4, 1))
}

/// Which expression attains the minimum in the relaxed-gap threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdBranch {
    /// `L(2L−1) / (4(2L+M))`
    Growth,
    /// `L(1−L−2M) / (2(1−L−M))`
    Concavity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelaxedThreshold {
    pub value: f64,
    pub growth: f64,
    pub concavity: f64,
    pub branch: ThresholdBranch,
}

fn check_relaxed_domain(l: f64, m: f64) -> Result<()> {
    if !(l > 0.5 && l < 1.0 && m > 0.0 && m < 1.0 && l + 2.0 * m < 1.0) {
        return Err(Error::param(format!(
            "relaxed gap bound needs 1/2 < L < 1, 0 < M < 1, L + 2M < 1; got L={l}, M={m}"
        )));
    }
    Ok(())
}

/// `min{ L(2L−1)/(4(2L+M)), L(1−L−2M)/(2(1−L−M)) }`.
pub fn relaxed_threshold(l: f64, m: f64) -> Result<RelaxedThreshold> {
    check_relaxed_domain(l, m)?;
    let growth = l * (2.0 * l - 1.0) / (4.0 * (2.0 * l + m));
    let concavity = l * (1.0 - l - 2.0 * m) / (2.0 * (1.0 - l - m));
    let branch = if growth <= concavity {
        ThresholdBranch::Growth
    } else {
        ThresholdBranch::Concavity
    };
    Ok(RelaxedThreshold {
        value: growth.min(concavity),
        growth,
        concavity,
        branch,
    })
}

pub fn relaxed_threshold_exact(
    l: &BigRational,
    m: &BigRational,
) -> Result<(BigRational, ThresholdBranch)> {
    let one = rat_one();
    let two = rat(2, 1);
    let half = rat(1, 2);
    if !(*l > half && *l < one && m.is_positive() && *m < one && l + &two * m < one) {
        return Err(Error::param(format!(
            "relaxed gap bound needs 1/2 < L < 1, 0 < M < 1, L + 2M < 1; got L={l}, M={m}"
        )));
    }
    let growth = l * (&two * l - &one) / (rat(4, 1) * (&two * l + m));
    let concavity = l * (&one - l - &two * m) / (&two * (&one - l - m));
    Ok(if growth <= concavity {
        (growth, ThresholdBranch::Growth)
    } else {
        (concavity, ThresholdBranch::Concavity)
    })
}

/// `(p_L, relaxed threshold)`; the second is `None` outside its domain or
/// when `M` is not given.
pub fn thresholds(l: f64, m: Option<f64>) -> (Option<f64>, Option<RelaxedThreshold>) {
    let p_l = small_gap_threshold(l).ok();
    let relaxed = m.and_then(|m| relaxed_threshold(l, m).ok());
    (p_l, relaxed)
}

/// Branch of the main sufficient criterion that applies to `(L, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// `L ≥ 1`, `0 < p ≤ 1/3`, `a1(L,p) ≥ 0`.
    LargeGap,
    /// `0 < L < 1`, `0 < p ≤ L/4`, `a2(L,p) ≥ 0`.
    SmallGap,
}

impl Branch {
    /// Label used in the `applicable_branch` CSV column.
    pub fn label(self) -> &'static str {
        match self {
            Branch::LargeGap => "1",
            Branch::SmallGap => "2",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Applicability {
    pub branch: Option<Branch>,
    pub a1: f64,
    pub a2: f64,
    pub reason: String,
}

impl Applicability {
    pub fn applicable(&self) -> bool {
        self.branch.is_some()
    }

    pub fn branch_label(&self) -> &'static str {
        self.branch.map_or("none", Branch::label)
    }
}

pub fn theorem1_applicable(l: f64, p: f64) -> Applicability {
    let (v1, v2) = (a1(l, p), a2(l, p));
    let valid_p = p > 0.0 && p < 1.0;
    let (branch, reason) = if !valid_p {
        (None, format!("p={p} outside (0,1)"))
    } else if l >= 1.0 {
        if p > 1.0 / 3.0 {
            (None, format!("L={l} ≥ 1 but p={p} > 1/3"))
        } else if v1 < 0.0 {
            (None, format!("L={l} ≥ 1, p ≤ 1/3 but a1={v1} < 0"))
        } else {
            (Some(Branch::LargeGap), format!("L ≥ 1, p ≤ 1/3, a1={v1} ≥ 0"))
        }
    } else if l > 0.0 {
        if p > l / 4.0 {
            (None, format!("0 < L={l} < 1 but p={p} > L/4"))
        } else if v2 < 0.0 {
            (None, format!("0 < L < 1, p ≤ L/4 but a2={v2} < 0"))
        } else {
            (Some(Branch::SmallGap), format!("0 < L < 1, p ≤ L/4, a2={v2} ≥ 0"))
        }
    } else {
        (None, format!("L={l} ≤ 0"))
    };
    Applicability {
        branch,
        a1: v1,
        a2: v2,
        reason,
    }
}

/// Same decision with every comparison done exactly.
pub fn theorem1_applicable_exact(l: &BigRational, p: &BigRational) -> Applicability {
    let one = rat_one();
    if !(p.is_positive() && *p < one) {
        let (lf, pf) = (rational_to_f64(l), rational_to_f64(p));
        return Applicability {
            branch: None,
            a1: f64::NAN,
            a2: f64::NAN,
            reason: format!("p={pf} outside (0,1) (L={lf})"),
        };
    }
    let e1 = a1_exact(l, p);
    let e2 = a2_exact(l, p);
    let (v1, v2) = (rational_to_f64(&e1), rational_to_f64(&e2));
    let (branch, reason) = if *l >= one {
        if *p > rat(1, 3) {
            (None, format!("L ≥ 1 but p={p} > 1/3"))
        } else if e1.is_negative() {
            (None, format!("L ≥ 1, p ≤ 1/3 but a1={v1} < 0"))
        } else {
            (Some(Branch::LargeGap), format!("L ≥ 1, p ≤ 1/3, a1={e1} ≥ 0"))
        }
    } else if l.is_positive() {
        if *p > l / rat(4, 1) {
            (None, format!("0 < L < 1 but p={p} > L/4"))
        } else if e2.is_negative() {
            (None, format!("0 < L < 1, p ≤ L/4 but a2={v2} < 0"))
        } else {
            (Some(Branch::SmallGap), format!("0 < L < 1, p ≤ L/4, a2={v2} ≥ 0"))
        }
    } else {
        (None, format!("L={l} ≤ 0"))
    };
    Applicability {
        branch,
        a1: v1,
        a2: v2,
        reason,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_examples() {
        assert!((a1(1.0, 1.0 / 3.0) - 2.0).abs() < 1e-12);
        assert_eq!(a1_exact(&rat(1, 1), &rat(1, 3)), rat(2, 1));
        assert!(a1(100.0, 0.3) < 0.0);
        assert!((a2(0.5, 0.0625) - 1.05176).abs() < 1e-5);
        assert_eq!(a2_exact(&rat(1, 2), &rat(1, 16)), rat(1077, 1024));
    }

    #[test]
    fn exact_and_float_agree_on_grid() {
        for i in 1..=50 {
            for j in 1..=50 {
                let l = rat(i, 20); // 0.05 .. 2.5
                let p = rat(j, 51); // (0, 1)
                let (lf, pf) = (rational_to_f64(&l), rational_to_f64(&p));
                let e1 = rational_to_f64(&a1_exact(&l, &p));
                let e2 = rational_to_f64(&a2_exact(&l, &p));
                assert!((a1(lf, pf) - e1).abs() <= 1e-9 * e1.abs().max(1.0), "a1 at {lf},{pf}");
                assert!((a2(lf, pf) - e2).abs() <= 1e-9 * e2.abs().max(1.0), "a2 at {lf},{pf}");
            }
        }
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(small_gap_threshold(0.5).unwrap(), 0.0625);
        let t = relaxed_threshold(0.8, 0.05).unwrap();
        assert!((t.value - 0.072_727_272_727).abs() < 1e-10);
        assert!((t.concavity - 0.266_666_666_666).abs() < 1e-10);
        assert_eq!(t.branch, ThresholdBranch::Growth);
        let t = relaxed_threshold(0.6, 0.19).unwrap();
        assert!((t.growth - 0.021_582_733_8).abs() < 1e-9);
        assert!((t.concavity - 0.028_571_428_57).abs() < 1e-9);
        assert_eq!(t.branch, ThresholdBranch::Growth);
        assert!((t.value - t.growth).abs() == 0.0);
        // the concavity expression wins near L + 2M = 1
        let t = relaxed_threshold(0.9, 0.049).unwrap();
        assert_eq!(t.branch, ThresholdBranch::Concavity);
        let (exact, branch) = relaxed_threshold_exact(&rat(4, 5), &rat(1, 20)).unwrap();
        assert_eq!(exact, rat(4, 55));
        assert_eq!(branch, ThresholdBranch::Growth);
    }

    #[test]
    fn threshold_domains() {
        assert!(small_gap_threshold(1.0).is_err());
        assert!(small_gap_threshold(0.0).is_err());
        assert!(relaxed_threshold(0.4, 0.1).is_err());
        assert!(relaxed_threshold(0.8, 0.1).is_err());
        assert!(relaxed_threshold(0.8, 0.0).is_err());
        assert!(relaxed_threshold_exact(&rat(1, 2), &rat(1, 10)).is_err());
        let (pl, rt) = thresholds(0.8, Some(0.05));
        assert_eq!(pl, Some(0.16000000000000003));
        assert!(rt.is_some());
        assert_eq!(thresholds(1.5, None), (None, None));
    }

    #[test]
    fn applicability_examples() {
        let a = theorem1_applicable(1.0, 1.0 / 3.0);
        assert_eq!(a.branch, Some(Branch::LargeGap));
        let a = theorem1_applicable_exact(&rat(1, 1), &rat(1, 3));
        assert_eq!(a.branch, Some(Branch::LargeGap));
        assert_eq!(a.a1, 2.0);
        let a = theorem1_applicable(0.5, 0.0625);
        assert_eq!(a.branch, Some(Branch::SmallGap));
        assert!((a.a2 - 1.0518).abs() < 1e-4);
        let a = theorem1_applicable(1.0, 0.5);
        assert_eq!(a.branch, None);
        assert_eq!(a.branch_label(), "none");
        assert_eq!(theorem1_applicable(100.0, 0.3).branch, None);
        assert_eq!(theorem1_applicable_exact(&rat(1, 1), &rat(1, 2)).branch, None);
    }

    #[test]
    fn a2_nonnegative_on_small_gap_threshold_curve() {
        for i in 1..=99 {
            let l = i as f64 / 100.0;
            assert!(a2(l, l * l / 4.0) >= 0.0, "L={l}");
        }
    }
}
