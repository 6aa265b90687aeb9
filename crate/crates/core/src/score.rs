//! Score distributions over `[0, 1]`.
//!
//! Four distributions are supported: the continuous uniform `U`, the discrete
//! uniform `U_N` on `{0, 1/N, ..., (N-1)/N}`, and the geometric-like `G_N'`
//! and `G_inf` whose supports are negative powers of two. The geometric-like
//! samplers draw the matching uniform and push it through [`map_g`], so two
//! sketches fed by the same random stream see coupled scores.
//!
//! Every score produced here is a dyadic rational and is stored exactly in an
//! `f64`. The continuous uniform is realised on the 53-bit grid.

use std::cmp::Ordering;
use std::fmt;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{dyadic_uniform, unit_uniform};

/// Largest resolution (in bits) for the discrete distributions. Keeps every
/// support point exactly representable.
pub const MAX_BITS: u32 = 53;

/// A value in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Score(f64);

impl Score {
    pub const ZERO: Score = Score(0.0);
    pub const ONE: Score = Score(1.0);
    pub const HALF: Score = Score(0.5);

    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Score(value))
        } else {
            Err(Error::ScoreOutOfRange(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Exact halving (dyadic values stay dyadic).
    pub fn half(self) -> Score {
        Score(self.0 / 2.0)
    }
}

impl Eq for Score {}

impl PartialOrd for Score {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Score {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl TryFrom<f64> for Score {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Score::new(value)
    }
}

impl From<Score> for f64 {
    fn from(s: Score) -> f64 {
        s.0
    }
}

/// Truncation level of the dyadic bucket map.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truncation {
    Finite(u32),
    Infinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScoreDistribution {
    /// `U` on `[0, 1]`.
    ContinuousUniform,
    /// `U_N` with `N = 2^bits`.
    DiscreteUniform { bits: u32 },
    /// `G_N'` on `{2^-N'-1, ..., 2^-1}`.
    GeoLikeFinite { truncation: u32 },
    /// `G_inf` on `{2^-k : k >= 1}`.
    GeoLikeInfinite,
}

impl ScoreDistribution {
    /// `U_N`; `n` must be a power of two no larger than `2^53`.
    pub fn discrete_uniform(n: u64) -> Result<Self> {
        if !n.is_power_of_two() || n.trailing_zeros() > MAX_BITS {
            return Err(Error::InvalidDistribution(format!(
                "discrete uniform size must be a power of two at most 2^{MAX_BITS}, got {n}"
            )));
        }
        Ok(ScoreDistribution::DiscreteUniform {
            bits: n.trailing_zeros(),
        })
    }

    /// `G_N'`; `truncation` must lie in `1..=53`.
    pub fn geo_like_finite(truncation: u32) -> Result<Self> {
        if truncation == 0 || truncation > MAX_BITS {
            return Err(Error::InvalidDistribution(format!(
                "truncation must lie in 1..={MAX_BITS}, got {truncation}"
            )));
        }
        Ok(ScoreDistribution::GeoLikeFinite { truncation })
    }

    pub fn validate(self) -> Result<Self> {
        match self {
            ScoreDistribution::DiscreteUniform { bits } if bits > MAX_BITS => Err(
                Error::InvalidDistribution(format!("resolution 2^{bits} exceeds 2^{MAX_BITS}")),
            ),
            ScoreDistribution::GeoLikeFinite { truncation } => Self::geo_like_finite(truncation),
            other => Ok(other),
        }
    }

    /// Whether `D([0, x)) = x` on the support.
    pub fn is_linear(self) -> bool {
        !matches!(self, ScoreDistribution::GeoLikeFinite { .. })
    }

    pub fn sample<R: RngCore + ?Sized>(self, rng: &mut R) -> Score {
        sample_score(self, rng)
    }

    pub fn cdf_below(self, p: Score) -> f64 {
        cdf_below(self, p)
    }
}

impl fmt::Display for ScoreDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoreDistribution::ContinuousUniform => write!(f, "U"),
            ScoreDistribution::DiscreteUniform { bits } => write!(f, "U_2^{bits}"),
            ScoreDistribution::GeoLikeFinite { truncation } => write!(f, "G_{truncation}"),
            ScoreDistribution::GeoLikeInfinite => write!(f, "G_inf"),
        }
    }
}

/// `e` such that `2^e <= x < 2^(e+1)`, for finite `x > 0`.
fn floor_log2(x: f64) -> i32 {
    debug_assert!(x > 0.0 && x.is_finite());
    let bits = x.to_bits();
    let exponent = ((bits >> 52) & 0x7ff) as i32;
    if exponent == 0 {
        let mantissa = bits & ((1u64 << 52) - 1);
        -1074 + (63 - mantissa.leading_zeros() as i32)
    } else {
        exponent - 1023
    }
}

/// Exact `2^e`, flushing to zero below the subnormal range.
pub(crate) fn pow2(e: i32) -> f64 {
    if e >= -1022 {
        f64::from_bits(((e + 1023) as u64) << 52)
    } else if e >= -1074 {
        f64::from_bits(1u64 << (e + 1074))
    } else {
        0.0
    }
}

/// The dyadic bucket map `g_N'` / `g_inf`.
///
/// Returns `2^-k` for `2^-k <= x < 2^(-k+1)`. With a finite truncation every
/// `x < 2^-N'` lands in the bottom bucket `2^-N'-1`, which makes
/// `g_N'(U_{2^N'})` distributed exactly as `G_N'`.
pub fn map_g(x: f64, truncation: Truncation) -> Result<Score> {
    match truncation {
        Truncation::Finite(n) => {
            if !(0.0..1.0).contains(&x) {
                return Err(Error::NoBucket {
                    value: x,
                    domain: "0 <= x < 1",
                });
            }
            if n == 0 || n > 1073 {
                return Err(Error::InvalidDistribution(format!(
                    "truncation {n} out of range"
                )));
            }
            let floor = pow2(-(n as i32));
            if x < floor {
                Ok(Score(pow2(-(n as i32) - 1)))
            } else {
                Ok(Score(pow2(floor_log2(x))))
            }
        }
        Truncation::Infinite => {
            if !(x > 0.0 && x < 1.0) {
                return Err(Error::NoBucket {
                    value: x,
                    domain: "0 < x < 1",
                });
            }
            Ok(Score(pow2(floor_log2(x))))
        }
    }
}

/// Draws one score. Identical rng state gives an identical score.
pub fn sample_score<R: RngCore + ?Sized>(dist: ScoreDistribution, rng: &mut R) -> Score {
    match dist {
        ScoreDistribution::ContinuousUniform => Score(unit_uniform(rng)),
        ScoreDistribution::DiscreteUniform { bits } => Score(dyadic_uniform(rng, bits)),
        ScoreDistribution::GeoLikeFinite { truncation } => {
            let u = dyadic_uniform(rng, truncation);
            map_g(u, Truncation::Finite(truncation)).expect("grid point lies in [0, 1)")
        }
        ScoreDistribution::GeoLikeInfinite => loop {
            // Zero has probability 2^-53 and no bucket; redraw.
            let u = unit_uniform(rng);
            if u > 0.0 {
                break map_g(u, Truncation::Infinite).expect("u lies in (0, 1)");
            }
        },
    }
}

/// Exact probability mass of `[0, p)`.
pub fn cdf_below(dist: ScoreDistribution, p: Score) -> f64 {
    let p = p.value();
    match dist {
        ScoreDistribution::ContinuousUniform => p,
        ScoreDistribution::DiscreteUniform { bits } => {
            let n = (1u64 << bits) as f64;
            (p * n).ceil().min(n) / n
        }
        ScoreDistribution::GeoLikeFinite { truncation } => {
            let n = truncation as i32;
            if p <= pow2(-n - 1) {
                return 0.0;
            }
            // Bottom point carries mass 2^-N', each 2^-k above it carries 2^-k.
            let mut mass = pow2(-n);
            for k in 1..=n {
                if pow2(-k) < p {
                    mass += pow2(-k);
                }
            }
            mass
        }
        ScoreDistribution::GeoLikeInfinite => {
            if p <= 0.0 {
                return 0.0;
            }
            if p >= 1.0 {
                return 1.0;
            }
            let e = floor_log2(p);
            if pow2(e) == p {
                p
            } else {
                pow2(e + 1)
            }
        }
    }
}
