//! Bucket-limit formulas and binomial tail probabilities.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};

/// Which approximation guarantee the bucket limit is sized for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizingVariant {
    DonD,
    DonDPrime,
    Cvm1,
    Cvm2,
    Cvm2Refuse,
    Tracking,
}

impl fmt::Display for SizingVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SizingVariant::DonD => "dond",
            SizingVariant::DonDPrime => "dond-prime",
            SizingVariant::Cvm1 => "cvm1",
            SizingVariant::Cvm2 => "cvm2",
            SizingVariant::Cvm2Refuse => "cvm2-refuse",
            SizingVariant::Tracking => "tracking",
        })
    }
}

impl FromStr for SizingVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "dond" => SizingVariant::DonD,
            "dond-prime" => SizingVariant::DonDPrime,
            "cvm1" => SizingVariant::Cvm1,
            "cvm2" => SizingVariant::Cvm2,
            "cvm2-refuse" => SizingVariant::Cvm2Refuse,
            "tracking" => SizingVariant::Tracking,
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "unknown sizing variant {s:?}"
                )))
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizingParams {
    pub epsilon: f64,
    /// Failure probability. Values above 1 are accepted so the formulas can
    /// be evaluated at degenerate points; they carry no guarantee.
    pub delta: f64,
    pub m: u64,
    pub n: u64,
    pub variant: SizingVariant,
}

impl SizingParams {
    pub fn new(variant: SizingVariant, epsilon: f64, delta: f64, m: u64, n: u64) -> Result<Self> {
        let params = SizingParams {
            epsilon,
            delta,
            m,
            n,
            variant,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1], got {}",
                self.epsilon
            )));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if self.m == 0 || self.n == 0 {
            return Err(Error::InvalidParameter("m and n must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizingResult {
    pub s: usize,
    /// The unrounded formula value.
    pub raw: f64,
    pub formula: &'static str,
}

impl SizingResult {
    /// The `k` of the diagnostic threshold `p_0 = 2^-k` for a stream with
    /// `f0` distinct elements.
    pub fn p0_exponent(&self, f0: u64) -> u32 {
        p0_exponent(self.s, f0)
    }
}

/// Smallest `x >= 0` rounded up, ignoring floating-point noise around
/// integers so that formulas that are mathematically integral stay put.
fn tolerant_ceil(x: f64) -> f64 {
    let nearest = x.round();
    if (x - nearest).abs() <= 1e-9 * x.abs().max(1.0) {
        nearest
    } else {
        x.ceil()
    }
}

fn tolerant_floor(x: f64) -> f64 {
    let nearest = x.round();
    if (x - nearest).abs() <= 1e-9 * x.abs().max(1.0) {
        nearest
    } else {
        x.floor()
    }
}

/// The bucket limit `s` for the variant's guarantee.
pub fn bucket_limit(params: &SizingParams) -> Result<SizingResult> {
    params.validate()?;
    let SizingParams {
        epsilon: e,
        delta: d,
        m,
        n,
        variant,
    } = *params;
    let m = m as f64;
    let e2 = e * e;
    let (raw, formula) = match variant {
        SizingVariant::DonD => (
            (24.0 * (4.0 * m / d).ln()).max(24.0 / e2 * (96.0 / (e2 * d)).ln()),
            "max{24 ln(4m/delta), (24/eps^2) ln(96/(eps^2 delta))}",
        ),
        SizingVariant::DonDPrime | SizingVariant::Cvm1 | SizingVariant::Cvm2 => (
            (24.0 * (4.0 * m / d).ln()).max(6.0 / e2 * (8.0 / d).ln()),
            "max{24 ln(4m/delta), (6/eps^2) ln(8/delta)}",
        ),
        SizingVariant::Cvm2Refuse => {
            let n_prime = (n as f64).min(m);
            (
                12.0 * (4.0 * n_prime / d).ln() + 6.0 / e2 * (8.0 / d).ln(),
                "12 ln(4 min(n,m)/delta) + (6/eps^2) ln(8/delta)",
            )
        }
        SizingVariant::Tracking => (12.0 / e2 * (8.0 * m / d).ln(), "(12/eps^2) ln(8m/delta)"),
    };
    let rounded = tolerant_ceil(raw).max(1.0);
    if !rounded.is_finite() || rounded > usize::MAX as f64 / 2.0 {
        return Err(Error::InvalidParameter(format!(
            "bucket limit {raw} is not representable"
        )));
    }
    Ok(SizingResult {
        s: rounded as usize,
        raw,
        formula,
    })
}

/// `ceil(log2(2 f0 / s))` clamped at 0, computed exactly: the smallest
/// `k >= 0` with `2^k s >= 2 f0`.
pub fn p0_exponent(s: usize, f0: u64) -> u32 {
    let s = s.max(1) as u128;
    let target = 2 * f0 as u128;
    let mut k = 0;
    while (s << k) < target {
        k += 1;
    }
    k
}

/// `p_0 = 2^-k` for [`p0_exponent`].
pub fn p0(s: usize, f0: u64) -> f64 {
    crate::score::pow2(-(p0_exponent(s, f0) as i32))
}

/// An exact binomial tail next to its closed-form exponential bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailProbability {
    pub exact: f64,
    pub bound: f64,
}

fn check_tail_params(n: u64, p: f64, eps: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "p must lie in (0, 1], got {p}"
        )));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in (0, 1], got {eps}"
        )));
    }
    Ok(())
}

/// `Pr(X = x)` summed over `lo..=hi` for `X ~ Bin(n, p)`, in log space.
fn binomial_mass(n: u64, p: f64, lo: u64, hi: u64) -> f64 {
    if lo > hi {
        return 0.0;
    }
    if p >= 1.0 {
        return if (lo..=hi).contains(&n) { 1.0 } else { 0.0 };
    }
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let log_terms: Vec<f64> = (lo..=hi)
        .map(|x| ln_binomial(n, x) + x as f64 * ln_p + (n - x) as f64 * ln_q)
        .collect();
    let top = log_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return 0.0;
    }
    let sum: f64 = log_terms.iter().map(|t| (t - top).exp()).sum();
    (top + sum.ln()).exp().min(1.0)
}

/// `EP+(N, p, eps) = Pr(X >= Np(1 + eps))` and its bound `exp(-Np eps^2 / 3)`.
pub fn binomial_tail_upper(n: u64, p: f64, eps: f64) -> Result<TailProbability> {
    check_tail_params(n, p, eps)?;
    let mean = n as f64 * p;
    let start = tolerant_ceil(mean * (1.0 + eps));
    let exact = if start > n as f64 {
        0.0
    } else {
        binomial_mass(n, p, start as u64, n)
    };
    Ok(TailProbability {
        exact,
        bound: (-mean * eps * eps / 3.0).exp(),
    })
}

/// `EP-(N, p, eps) = Pr(X <= Np(1 - eps))` and its bound `exp(-Np eps^2 / 2)`.
pub fn binomial_tail_lower(n: u64, p: f64, eps: f64) -> Result<TailProbability> {
    check_tail_params(n, p, eps)?;
    let mean = n as f64 * p;
    let end = tolerant_floor(mean * (1.0 - eps)).max(0.0);
    Ok(TailProbability {
        exact: binomial_mass(n, p, 0, end as u64),
        bound: (-mean * eps * eps / 2.0).exp(),
    })
}

/// Whether `Np >= 3 eps^-2 ln(1/beta)`, under which both tails are at most
/// `beta`.
pub fn implication_check(n: u64, p: f64, eps: f64, beta: f64) -> Result<bool> {
    check_tail_params(n, p, eps)?;
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "beta must lie in (0, 1], got {beta}"
        )));
    }
    Ok(n as f64 * p >= 3.0 / (eps * eps) * (1.0 / beta).ln())
}
