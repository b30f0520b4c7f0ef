//! Auxiliary one-variable functions on `x ∈ (0,1]` that the sufficiency
//! argument reduces the per-index condition to, plus grid sign scans.
//!
//! `x` plays the role of `λ_n/Λ_n`. Each function is a direct transcription of
//! its closed form; the scans only ever sample, they prove nothing.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::polynomials::{a1, a2, relaxed_threshold};

/// Default number of grid points for sign scans.
pub const DEFAULT_GRID: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum AuxFunction {
    /// Reduced form of the per-index condition with `1/y = 1/x + L + Mx` (`f_LMp`).
    Reduced,
    /// Sign factor of the second derivative of the reduced form at `M = 0` (`g_Lp`).
    Curvature,
    /// Linearised lower bound of the curvature factor (`u_Lp`).
    CurvatureBound,
    /// Sign factor of the derivative of the mean product at `M = 0` (`v_Lp`).
    SlopeFactor,
    /// Weighted geometric-mean product at `M = 0`, certified `≥ 1` (`h_Lp`).
    MeanProduct,
    /// Relaxed mean product with `M > 0`, certified `≥ 1` (`h_LMp`).
    RelaxedMeanProduct,
    /// Sign factor of the derivative of the relaxed mean product (`u_LMp`).
    RelaxedSlopeFactor,
    /// Lower bound of the relaxed slope factor (`v_LMp`).
    RelaxedSlopeBound,
    /// Full relaxed product before simplification, certified `≥ 1` (`ineq_3_1`).
    RelaxedProduct,
}

impl AuxFunction {
    pub const ALL: [AuxFunction; 9] = [
        AuxFunction::Reduced,
        AuxFunction::Curvature,
        AuxFunction::CurvatureBound,
        AuxFunction::SlopeFactor,
        AuxFunction::MeanProduct,
        AuxFunction::RelaxedMeanProduct,
        AuxFunction::RelaxedSlopeFactor,
        AuxFunction::RelaxedSlopeBound,
        AuxFunction::RelaxedProduct,
    ];

    /// Identifier used in reports and accepted on the command line.
    pub fn id(self) -> &'static str {
        match self {
            AuxFunction::Reduced => "f_LMp",
            AuxFunction::Curvature => "g_Lp",
            AuxFunction::CurvatureBound => "u_Lp",
            AuxFunction::SlopeFactor => "v_Lp",
            AuxFunction::MeanProduct => "h_Lp",
            AuxFunction::RelaxedMeanProduct => "h_LMp",
            AuxFunction::RelaxedSlopeFactor => "u_LMp",
            AuxFunction::RelaxedSlopeBound => "v_LMp",
            AuxFunction::RelaxedProduct => "ineq_3_1",
        }
    }

    /// Value the function is claimed to stay above.
    pub fn floor(self) -> f64 {
        match self {
            AuxFunction::MeanProduct
            | AuxFunction::RelaxedMeanProduct
            | AuxFunction::RelaxedProduct => 1.0,
            _ => 0.0,
        }
    }

    fn uses_m(self) -> bool {
        matches!(
            self,
            AuxFunction::Reduced
                | AuxFunction::RelaxedMeanProduct
                | AuxFunction::RelaxedSlopeFactor
                | AuxFunction::RelaxedSlopeBound
                | AuxFunction::RelaxedProduct
        )
    }

    fn needs_small_l(self) -> bool {
        matches!(
            self,
            AuxFunction::RelaxedMeanProduct
                | AuxFunction::RelaxedSlopeFactor
                | AuxFunction::RelaxedSlopeBound
                | AuxFunction::RelaxedProduct
        )
    }
}

impl fmt::Display for AuxFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for AuxFunction {
    type Err = Error;

    /// Accepts the full id (`g_Lp`) or its leading letter(s) (`g`, `hM`, `ineq31`).
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| *c != '_').collect::<String>().to_lowercase();
        let f = match key.as_str() {
            "f" | "flmp" => AuxFunction::Reduced,
            "g" | "glp" => AuxFunction::Curvature,
            "u" | "ulp" => AuxFunction::CurvatureBound,
            "v" | "vlp" => AuxFunction::SlopeFactor,
            "h" | "hlp" => AuxFunction::MeanProduct,
            "hm" | "hlmp" => AuxFunction::RelaxedMeanProduct,
            "um" | "ulmp" => AuxFunction::RelaxedSlopeFactor,
            "vm" | "vlmp" => AuxFunction::RelaxedSlopeBound,
            "ineq31" | "31" => AuxFunction::RelaxedProduct,
            _ => return Err(Error::Parse(format!("unknown auxiliary function {s:?}"))),
        };
        Ok(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuxParams {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub p: f64,
}

impl AuxParams {
    pub fn new(l: f64, m: f64, p: f64) -> Self {
        AuxParams { l, m, p }
    }

    fn c(&self) -> f64 {
        self.l / self.p - 2.0
    }

    /// `L − 2p − (1−p²)(1−L)`, the exponent of the first factor in the relaxed product.
    fn relaxed_exponent(&self) -> f64 {
        let AuxParams { l, p, .. } = *self;
        l - 2.0 * p - (1.0 - p * p) * (1.0 - l)
    }
}

/// Rejects parameters outside the domain where `fun` is real-valued on `(0,1]`.
pub fn check_domain(fun: AuxFunction, params: &AuxParams) -> Result<()> {
    let AuxParams { l, m, p } = *params;
    if !(p.is_finite() && p > 0.0 && p < 1.0) {
        return Err(Error::param(format!("{fun}: p must lie in (0,1), got {p}")));
    }
    if !(l.is_finite() && l > p) {
        return Err(Error::param(format!("{fun}: need L > p, got L={l}, p={p}")));
    }
    if !(m.is_finite() && m >= 0.0) {
        return Err(Error::param(format!("{fun}: need M ≥ 0, got {m}")));
    }
    if !fun.uses_m() && m != 0.0 {
        return Err(Error::param(format!("{fun} is defined for M = 0 only")));
    }
    if fun.needs_small_l() && !(l < 1.0 && l + 2.0 * m < 1.0) {
        return Err(Error::param(format!(
            "{fun}: need L < 1 and L + 2M < 1, got L={l}, M={m}"
        )));
    }
    Ok(())
}

/// Whether the proof certifies `fun ≥ floor` on `(0,1]` at these parameters.
pub fn certified_regime(fun: AuxFunction, params: &AuxParams) -> bool {
    let AuxParams { l, m, p } = *params;
    let large_gap = m == 0.0 && l >= 1.0 && p <= 1.0 / 3.0 && a1(l, p) >= 0.0;
    let small_gap = m == 0.0 && l > 0.0 && l < 1.0 && p <= l / 4.0 && a2(l, p) >= 0.0;
    let relaxed = relaxed_threshold(l, m).is_ok_and(|t| p <= t.value);
    match fun {
        AuxFunction::Reduced => large_gap || small_gap || relaxed,
        AuxFunction::Curvature | AuxFunction::CurvatureBound => large_gap,
        AuxFunction::SlopeFactor | AuxFunction::MeanProduct => small_gap,
        AuxFunction::RelaxedMeanProduct
        | AuxFunction::RelaxedSlopeFactor
        | AuxFunction::RelaxedSlopeBound
        | AuxFunction::RelaxedProduct => relaxed,
    }
}

/// Evaluates `fun` at `x`, checking the domain first.
pub fn aux_eval(fun: AuxFunction, params: &AuxParams, x: f64) -> Result<f64> {
    check_domain(fun, params)?;
    if !(x.is_finite() && x >= 0.0 && x <= 1.0) {
        return Err(Error::param(format!("{fun}: x must lie in [0,1], got {x}")));
    }
    let v = eval_unchecked(fun, params, x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::non_finite(format!("x={x}"), format!("{fun} = {v}")))
    }
}

pub(crate) fn eval_unchecked(fun: AuxFunction, params: &AuxParams, x: f64) -> f64 {
    let AuxParams { l, m, p } = *params;
    let c = params.c();
    let lin = 1.0 + c * x;
    let shifted = 1.0 + (l - 1.0) * x + m * x * x;
    let full = 1.0 + l * x + m * x * x;
    let bracket_sq = l * l * (l - 1.0).powi(2) * x * x
        + 2.0 * l * (l - 1.0) * (l - p - 1.0) * x
        + l * l
        - 2.0 * (l - 1.0) * (p + 1.0);
    let bracket_lin = l * l * (l - 1.0).powi(2) * x
        + 2.0 * l * (l - 1.0) * (l - p - 1.0) * x
        + l * l
        - 2.0 * (l - 1.0) * (p + 1.0);
    let k1 = p * (1.0 + p) * (2.0 - l);
    let k2 = p * (1.0 + p - p * l);
    match fun {
        AuxFunction::Reduced => {
            lin.powf(1.0 / (1.0 - p))
                - shifted.powf((1.0 + p) / (1.0 - p)) * full.powf(-p / (1.0 - p))
                - (l - p) / p * x
        }
        AuxFunction::Curvature => {
            c * c
                * (1.0 + (l - 1.0) * x).powf((1.0 - 3.0 * p) / (1.0 - p))
                * (1.0 + l * x).powf((2.0 - p) / (1.0 - p))
                - lin.powf((1.0 - 2.0 * p) / (1.0 - p)) * bracket_sq
        }
        AuxFunction::CurvatureBound => {
            c * c * (1.0 + l * (2.0 - p) / (1.0 - p) * x)
                - (1.0 + c * (1.0 - 2.0 * p) / (1.0 - p) * x) * bracket_lin
        }
        AuxFunction::SlopeFactor => {
            (l - 2.0 * p) * c * (1.0 + (l - 1.0) * x) * (1.0 + l * x)
                - k1 * (1.0 - l) * lin * (1.0 + l * x)
                - k2 * l * lin * (1.0 + (l - 1.0) * x)
        }
        AuxFunction::MeanProduct => {
            lin.powf(l - 2.0 * p) * (1.0 + (l - 1.0) * x).powf(k1) * (1.0 + l * x).powf(-k2)
        }
        AuxFunction::RelaxedMeanProduct => {
            lin.powf(params.relaxed_exponent()) * shifted.powf(k1) * full.powf(-k2)
        }
        AuxFunction::RelaxedSlopeFactor => {
            params.relaxed_exponent() * c * shifted * full
                - k1 * (1.0 - l) * lin * (1.0 - 2.0 * m * x / (1.0 - l)) * full
                - k2 * l * lin * (1.0 + 2.0 * m * x / l) * shifted
        }
        AuxFunction::RelaxedSlopeBound => {
            params.relaxed_exponent() * c * (1.0 + (l - 1.0) * x) * (1.0 + l * x)
                - k1 * (1.0 - l) * lin * (1.0 + (l + m) * x)
                - k2 * l * lin * (1.0 + 2.0 * m / l) * (1.0 + (l + m - 1.0) * x)
        }
        AuxFunction::RelaxedProduct => {
            lin.powf(l - 2.0 * p)
                * (1.0 - 2.0 * m * x / (1.0 - l)).powf((1.0 - p * p) * (1.0 - l))
                * (1.0 + 2.0 * m * x / l).powf(p * (1.0 - p) * l)
                * shifted.powf(k1)
                * full.powf(-k2)
        }
    }
}

/// The curvature bound at `x = 0` in closed form: `(L/p − 2)² − L² + 2(L−1)(p+1)`.
pub fn curvature_bound_at_zero(l: f64, p: f64) -> f64 {
    (l / p - 2.0).powi(2) - l * l + 2.0 * (l - 1.0) * (p + 1.0)
}

/// Weighted geometric mean of the three terms making up
/// `(p/(L−p))·f′_{L,M,p}(x) + 1`; the weights sum to one, so this is a lower
/// bound of that expression.
pub fn mean_lower_bound(params: &AuxParams, x: f64) -> f64 {
    let AuxParams { l, m, p } = *params;
    let c = params.c();
    let denom = (1.0 - p) * (l - p);
    let w1 = c * p / denom;
    let w2 = p * (1.0 + p) * (1.0 - l) / denom;
    let w3 = l * p * p / denom;
    let shifted = 1.0 + (l - 1.0) * x + m * x * x;
    let full = 1.0 + l * x + m * x * x;
    let t1 = (1.0 + c * x).powf(p / (1.0 - p));
    let t2 = (1.0 - 2.0 * m * x / (1.0 - l))
        * shifted.powf(2.0 * p / (1.0 - p))
        * full.powf(-p / (1.0 - p));
    let t3 = (1.0 + 2.0 * m * x / l) * shifted.powf((1.0 + p) / (1.0 - p)) * full.powf(-1.0 / (1.0 - p));
    t1.powf(w1) * t2.powf(w2) * t3.powf(w3)
}

/// Grid sign scan of one auxiliary function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignReport {
    pub function_id: &'static str,
    pub params: AuxParams,
    /// Number of grid points; the grid is `x_i = i/grid`, `i = 1..=grid`.
    pub grid: usize,
    pub min_value: f64,
    pub argmin_x: f64,
    pub floor: f64,
    /// `min_value − floor`.
    pub min_margin: f64,
    pub certified_regime: bool,
    /// A negative margin inside the certified regime.
    pub anomaly: bool,
}

/// Samples `fun` on `[1/grid, 1]` and reports its minimum.
pub fn aux_sign_scan(fun: AuxFunction, params: &AuxParams, grid: usize, tol: f64) -> Result<SignReport> {
    check_domain(fun, params)?;
    if grid == 0 {
        return Err(Error::param("grid must have at least one point"));
    }
    let values: Vec<f64> = (1..=grid)
        .into_par_iter()
        .map(|i| eval_unchecked(fun, params, i as f64 / grid as f64))
        .collect();
    let mut min_value = f64::INFINITY;
    let mut argmin = 1;
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::non_finite(
                format!("x={}", (i + 1) as f64 / grid as f64),
                format!("{fun} = {v}"),
            ));
        }
        if v < min_value {
            min_value = v;
            argmin = i + 1;
        }
    }
    let floor = fun.floor();
    let min_margin = min_value - floor;
    let certified = certified_regime(fun, params);
    Ok(SignReport {
        function_id: fun.id(),
        params: *params,
        grid,
        min_value,
        argmin_x: argmin as f64 / grid as f64,
        floor,
        min_margin,
        certified_regime: certified,
        anomaly: certified && min_margin <= -tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(l: f64, m: f64, p: f64) -> AuxParams {
        AuxParams::new(l, m, p)
    }

    #[test]
    fn reduced_vanishes_at_zero() {
        for &(l, p) in &[(1.0, 0.25), (0.5, 0.0625), (2.0, 0.1), (0.9, 0.6)] {
            let v = aux_eval(AuxFunction::Reduced, &params(l, 0.0, p), 0.0).unwrap();
            assert!(v.abs() < 1e-15, "L={l} p={p}: {v}");
        }
    }

    #[test]
    fn curvature_bound_at_zero_matches_closed_form() {
        let v = aux_eval(AuxFunction::CurvatureBound, &params(1.0, 0.0, 1.0 / 3.0), 0.0).unwrap();
        assert!(v.abs() < 1e-12);
        assert!(curvature_bound_at_zero(1.0, 1.0 / 3.0).abs() < 1e-12);
        for &(l, p) in &[(1.5, 0.2), (0.7, 0.1), (3.0, 0.05)] {
            let v = aux_eval(AuxFunction::CurvatureBound, &params(l, 0.0, p), 0.0).unwrap();
            assert!((v - curvature_bound_at_zero(l, p)).abs() < 1e-10);
        }
    }

    #[test]
    fn curvature_scan_nonnegative_at_quarter() {
        let r = aux_sign_scan(AuxFunction::Curvature, &params(1.0, 0.0, 0.25), DEFAULT_GRID, 1e-9)
            .unwrap();
        assert!(r.min_value >= 0.0, "{r:?}");
        assert!(r.certified_regime && !r.anomaly);
        assert!(r.argmin_x > 0.0 && r.argmin_x <= 1.0);
    }

    #[test]
    fn endpoint_identities() {
        for &(l, p) in &[(1.0, 0.3), (2.0, 0.2), (0.5, 0.0625), (0.8, 0.1)] {
            let u1 = aux_eval(AuxFunction::CurvatureBound, &params(l, 0.0, p), 1.0).unwrap();
            assert!((u1 - a1(l, p)).abs() <= 1e-9 * a1(l, p).abs().max(1.0));
            let v1 = aux_eval(AuxFunction::SlopeFactor, &params(l, 0.0, p), 1.0).unwrap();
            assert!((v1 - a2(l, p)).abs() <= 1e-9 * a2(l, p).abs().max(1.0));
            let v0 = aux_eval(AuxFunction::SlopeFactor, &params(l, 0.0, p), 0.0).unwrap();
            assert!((v0 - p * curvature_bound_at_zero(l, p)).abs() < 1e-10);
        }
    }

    #[test]
    fn mean_products_start_at_one() {
        let ps = params(0.8, 0.05, 0.05);
        for f in [AuxFunction::MeanProduct, AuxFunction::RelaxedMeanProduct, AuxFunction::RelaxedProduct] {
            let pr = if f == AuxFunction::MeanProduct { params(0.8, 0.0, 0.05) } else { ps };
            assert_eq!(aux_eval(f, &pr, 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(aux_eval(AuxFunction::Curvature, &params(1.0, 0.1, 0.25), 0.5).is_err());
        assert!(aux_eval(AuxFunction::RelaxedProduct, &params(1.2, 0.1, 0.25), 0.5).is_err());
        assert!(aux_eval(AuxFunction::RelaxedProduct, &params(0.8, 0.2, 0.05), 0.5).is_err());
        assert!(aux_eval(AuxFunction::Reduced, &params(0.2, 0.0, 0.25), 0.5).is_err());
        assert!(aux_eval(AuxFunction::Reduced, &params(1.0, 0.0, 0.25), 1.5).is_err());
        assert!(aux_sign_scan(AuxFunction::Reduced, &params(1.0, 0.0, 0.25), 0, 1e-9).is_err());
    }

    #[test]
    fn parse_ids() {
        for f in AuxFunction::ALL {
            assert_eq!(f.id().parse::<AuxFunction>().unwrap(), f);
        }
        assert_eq!("g".parse::<AuxFunction>().unwrap(), AuxFunction::Curvature);
        assert!("zeta".parse::<AuxFunction>().is_err());
    }

    #[test]
    fn outside_certified_regime_is_not_an_anomaly() {
        // p > 1/3 with L = 1: the reduced condition genuinely fails.
        let r = aux_sign_scan(AuxFunction::Reduced, &params(1.0, 0.0, 0.9), 1000, 1e-9).unwrap();
        assert!(r.min_value < 0.0);
        assert!(!r.certified_regime);
        assert!(!r.anomaly);
    }
}
