//! Weight sequences `λ_n`, their partial sums `Λ_n`, and the gap
//! `Λ_{n+1}/λ_{n+1} − Λ_n/λ_n` consumed by every condition check.
//!
//! Indices are 1-based throughout, matching the way the sequences are written
//! down mathematically.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sum::NeumaierSum;

/// Slack used when deciding whether a scanned gap sequence is non-decreasing.
pub const MONOTONE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum WeightFamily {
    /// `λ_n = 1`, `Λ_n = n`.
    Unit,
    /// `λ_n = n^α − (n−1)^α`, `Λ_n = n^α`.
    PowerDiff(f64),
    /// `λ_n = n^{α−1}`; `Λ_n` has no closed form and is summed.
    PowerKernel(f64),
    /// Explicit finite list of strictly positive weights.
    Custom(Arc<[f64]>),
}

impl WeightFamily {
    pub fn unit() -> Self {
        WeightFamily::Unit
    }

    pub fn power_diff(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(WeightFamily::PowerDiff(alpha))
    }

    pub fn power_kernel(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(WeightFamily::PowerKernel(alpha))
    }

    pub fn custom(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::param("custom weights must be non-empty"));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::param(format!(
                "custom weight λ_{} = {v} is not a finite positive number",
                i + 1
            )));
        }
        Ok(WeightFamily::Custom(values.into()))
    }

    /// Reads one positive decimal per line; blank lines and `#` comments are skipped.
    pub fn custom_from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        let values = parse_number_lines(&text)?;
        Self::custom(values)
    }

    /// Parses `unit`, `powerdiff:ALPHA`, `powerkernel:ALPHA` or `custom:PATH`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        Self::from_spec_with_alpha(spec, None)
    }

    /// Like [`WeightFamily::from_spec`], but `powerdiff` / `powerkernel` without
    /// an inline exponent take it from `alpha`.
    pub fn from_spec_with_alpha(spec: &str, alpha: Option<f64>) -> Result<Self> {
        let spec = spec.trim();
        let (kind, arg) = match spec.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (spec, None),
        };
        let exponent = || -> Result<f64> {
            match (arg, alpha) {
                (Some(a), _) => a
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad exponent {a:?}: {e}"))),
                (None, Some(a)) => Ok(a),
                (None, None) => Err(Error::param(format!(
                    "family {kind:?} needs an exponent (`{kind}:ALPHA` or --alpha)"
                ))),
            }
        };
        match kind.to_ascii_lowercase().as_str() {
            "unit" if arg.is_none() => Ok(WeightFamily::Unit),
            "powerdiff" => Self::power_diff(exponent()?),
            "powerkernel" => Self::power_kernel(exponent()?),
            "custom" => match arg {
                Some(path) if !path.is_empty() => Self::custom_from_file(path),
                _ => Err(Error::param("custom family needs a path: custom:PATH")),
            },
            _ => Err(Error::Parse(format!("unknown family spec {spec:?}"))),
        }
    }

    /// Number of available weights, `None` for the infinite families.
    pub fn len(&self) -> Option<usize> {
        match self {
            WeightFamily::Custom(v) => Some(v.len()),
            _ => None,
        }
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::IndexOutOfRange { index: 0, len: self.len().unwrap_or(usize::MAX) });
        }
        match self.len() {
            Some(len) if n > len => Err(Error::IndexOutOfRange { index: n, len }),
            _ => Ok(()),
        }
    }

    /// `λ_n`.
    pub fn lambda(&self, n: usize) -> Result<f64> {
        self.check_index(n)?;
        let v = match self {
            WeightFamily::Unit => 1.0,
            WeightFamily::PowerDiff(alpha) => power_diff_lambda(*alpha, n),
            WeightFamily::PowerKernel(alpha) => (n as f64).powf(alpha - 1.0),
            WeightFamily::Custom(v) => v[n - 1],
        };
        finite(v, n, "λ")
    }

    /// `Λ_n = Σ_{i≤n} λ_i`. Closed form where one exists, otherwise an O(n)
    /// compensated sum; use [`WeightFamily::table`] for repeated access.
    pub fn big_lambda(&self, n: usize) -> Result<f64> {
        self.check_index(n)?;
        let v = match self {
            WeightFamily::Unit => n as f64,
            WeightFamily::PowerDiff(alpha) => (n as f64).powf(*alpha),
            WeightFamily::PowerKernel(alpha) => {
                let mut acc = NeumaierSum::new();
                for i in 1..=n {
                    acc += (i as f64).powf(alpha - 1.0);
                }
                acc.sum()
            }
            WeightFamily::Custom(v) => v[..n].iter().copied().collect::<NeumaierSum>().sum(),
        };
        finite(v, n, "Λ")
    }

    /// `Λ_{n+1}/λ_{n+1} − Λ_n/λ_n`.
    pub fn l_gap(&self, n: usize) -> Result<f64> {
        self.check_index(n)?;
        self.check_index(n + 1)?;
        let table = self.table(n + 1)?;
        Ok(table.l_gap(n))
    }

    /// Scans the gap for `n = 1..=horizon`.
    pub fn sup_l_gap(&self, horizon: usize) -> Result<GapScan> {
        if horizon < 2 {
            return Err(Error::param("gap scan needs horizon N ≥ 2"));
        }
        self.table(horizon + 1)?.sup_l_gap(horizon)
    }

    /// Precomputes `λ_n` and `Λ_n` for `n = 1..=n_max`.
    pub fn table(&self, n_max: usize) -> Result<WeightTable> {
        WeightTable::new(self.clone(), n_max)
    }

    /// Spec string understood by [`WeightFamily::from_spec`] (custom families
    /// render their length instead of a path).
    pub fn spec_string(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for WeightFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightFamily::Unit => write!(f, "unit"),
            WeightFamily::PowerDiff(a) => write!(f, "powerdiff:{a}"),
            WeightFamily::PowerKernel(a) => write!(f, "powerkernel:{a}"),
            WeightFamily::Custom(v) => write!(f, "custom[{}]", v.len()),
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha >= 1.0) {
        return Err(Error::param(format!("exponent α must satisfy α ≥ 1, got {alpha}")));
    }
    Ok(())
}

fn finite(v: f64, n: usize, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::non_finite(format!("n={n}"), format!("{what} = {v}")))
    }
}

/// `n^α − (n−1)^α` without cancellation: `n^α · (1 − (1 − 1/n)^α)`.
fn power_diff_lambda(alpha: f64, n: usize) -> f64 {
    if n == 1 {
        return 1.0;
    }
    let nf = n as f64;
    nf.powf(alpha) * -(alpha * (-1.0 / nf).ln_1p()).exp_m1()
}

pub(crate) fn parse_number_lines(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|e| Error::Parse(format!("line {}: {line:?}: {e}", lineno + 1)))?;
        out.push(v);
    }
    Ok(out)
}

/// Result of scanning the gap over a finite horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapScan {
    pub sup: f64,
    pub argmax: usize,
    /// Whether the scanned gaps were non-decreasing (up to [`MONOTONE_SLACK`]),
    /// which makes the running maximum a lower estimate of the true supremum.
    pub monotone: bool,
}

/// Precomputed `λ_n` and `Λ_n` for a fixed horizon. Immutable once built.
#[derive(Debug, Clone)]
pub struct WeightTable {
    family: WeightFamily,
    lambda: Vec<f64>,
    big_lambda: Vec<f64>,
}

impl WeightTable {
    pub fn new(family: WeightFamily, n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::param("weight table needs at least one entry"));
        }
        if let Some(len) = family.len() {
            if n_max > len {
                return Err(Error::IndexOutOfRange { index: n_max, len });
            }
        }
        let mut lambda = Vec::with_capacity(n_max);
        let mut big_lambda = Vec::with_capacity(n_max);
        match &family {
            WeightFamily::Unit => {
                for n in 1..=n_max {
                    lambda.push(1.0);
                    big_lambda.push(n as f64);
                }
            }
            WeightFamily::PowerDiff(alpha) => {
                for n in 1..=n_max {
                    lambda.push(power_diff_lambda(*alpha, n));
                    big_lambda.push((n as f64).powf(*alpha));
                }
            }
            WeightFamily::PowerKernel(alpha) => {
                let mut acc = NeumaierSum::new();
                for n in 1..=n_max {
                    let l = (n as f64).powf(alpha - 1.0);
                    acc += l;
                    lambda.push(l);
                    big_lambda.push(acc.sum());
                }
            }
            WeightFamily::Custom(values) => {
                let mut acc = NeumaierSum::new();
                for &l in &values[..n_max] {
                    acc += l;
                    lambda.push(l);
                    big_lambda.push(acc.sum());
                }
            }
        }
        for n in 1..=n_max {
            finite(lambda[n - 1], n, "λ")?;
            finite(big_lambda[n - 1], n, "Λ")?;
        }
        Ok(WeightTable {
            family,
            lambda,
            big_lambda,
        })
    }

    pub fn family(&self) -> &WeightFamily {
        &self.family
    }

    pub fn horizon(&self) -> usize {
        self.lambda.len()
    }

    /// `λ_n`; panics when `n` is outside `1..=horizon`.
    #[inline]
    pub fn lambda(&self, n: usize) -> f64 {
        self.lambda[n - 1]
    }

    /// `Λ_n`; panics when `n` is outside `1..=horizon`.
    #[inline]
    pub fn big_lambda(&self, n: usize) -> f64 {
        self.big_lambda[n - 1]
    }

    /// `λ_n / Λ_n`, always in `(0, 1]`.
    #[inline]
    pub fn density(&self, n: usize) -> f64 {
        self.lambda(n) / self.big_lambda(n)
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambda
    }

    pub fn big_lambdas(&self) -> &[f64] {
        &self.big_lambda
    }

    /// Gap at `n`, written as `1 − (Λ_n/λ_n)·(λ_{n+1} − λ_n)/λ_{n+1}` so that
    /// families with exactly representable weight increments (unit, integer
    /// powers) lose nothing to cancellation. Requires `n + 1 ≤ horizon`.
    #[inline]
    pub fn l_gap(&self, n: usize) -> f64 {
        let (l0, l1) = (self.lambda(n), self.lambda(n + 1));
        1.0 - (self.big_lambda(n) / l0) * ((l1 - l0) / l1)
    }

    pub fn sup_l_gap(&self, horizon: usize) -> Result<GapScan> {
        if horizon < 2 {
            return Err(Error::param("gap scan needs horizon N ≥ 2"));
        }
        if horizon + 1 > self.horizon() {
            return Err(Error::IndexOutOfRange {
                index: horizon + 1,
                len: self.horizon(),
            });
        }
        let mut sup = f64::NEG_INFINITY;
        let mut argmax = 1;
        let mut monotone = true;
        let mut prev = f64::NEG_INFINITY;
        for n in 1..=horizon {
            let g = self.l_gap(n);
            if !g.is_finite() {
                return Err(Error::non_finite(format!("n={n}"), format!("gap = {g}")));
            }
            if g > sup {
                sup = g;
                argmax = n;
            }
            if g < prev - MONOTONE_SLACK {
                monotone = false;
            }
            prev = g;
        }
        Ok(GapScan {
            sup,
            argmax,
            monotone,
        })
    }
}
