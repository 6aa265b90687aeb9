//! Synthetic streams with a known number of distinct elements.

use std::collections::{HashMap, HashSet};
use std::hash::Hash;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Zipf};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// A recipe for a stream over the tokens `0..f0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StreamSpec {
    /// `0, 1, ..., f0 - 1`.
    AllDistinct { f0: u64 },
    /// `reps` round-robin passes over `0..f0`.
    Repeated { f0: u64, reps: u64 },
    /// `m` Zipf draws over `0..f0`, patched so every token occurs.
    Zipf { f0: u64, exponent: f64, m: u64 },
    /// `base` shuffled with its own seed.
    Permuted { base: Box<StreamSpec>, seed: u64 },
}

impl StreamSpec {
    pub fn f0(&self) -> u64 {
        match self {
            StreamSpec::AllDistinct { f0 }
            | StreamSpec::Repeated { f0, .. }
            | StreamSpec::Zipf { f0, .. } => *f0,
            StreamSpec::Permuted { base, .. } => base.f0(),
        }
    }

    pub fn len(&self) -> u64 {
        match self {
            StreamSpec::AllDistinct { f0 } => *f0,
            StreamSpec::Repeated { f0, reps } => f0 * reps,
            StreamSpec::Zipf { m, .. } => *m,
            StreamSpec::Permuted { base, .. } => base.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            StreamSpec::AllDistinct { .. } => Ok(()),
            StreamSpec::Repeated { f0, reps } => {
                if *reps == 0 && *f0 > 0 {
                    return Err(Error::InvalidStream("reps must be at least 1".into()));
                }
                f0.checked_mul(*reps)
                    .map(|_| ())
                    .ok_or_else(|| Error::InvalidStream("stream length overflows".into()))
            }
            StreamSpec::Zipf { f0, exponent, m } => {
                if f0 > m {
                    return Err(Error::InvalidStream(format!(
                        "cannot fit {f0} distinct tokens into a stream of length {m}"
                    )));
                }
                if !(*exponent > 0.0 && exponent.is_finite()) {
                    return Err(Error::InvalidStream(format!(
                        "Zipf exponent must be positive, got {exponent}"
                    )));
                }
                Ok(())
            }
            StreamSpec::Permuted { base, .. } => base.validate(),
        }
    }
}

/// Materialises `spec`. Only Zipf streams draw from `rng`.
pub fn generate_stream<R: Rng + ?Sized>(spec: &StreamSpec, rng: &mut R) -> Result<Vec<u64>> {
    spec.validate()?;
    Ok(match spec {
        StreamSpec::AllDistinct { f0 } => (0..*f0).collect(),
        StreamSpec::Repeated { f0, reps } => (0..*reps).flat_map(|_| 0..*f0).collect(),
        StreamSpec::Zipf { f0, exponent, m } => zipf_stream(*f0, *exponent, *m, rng)?,
        StreamSpec::Permuted { base, seed } => {
            let mut stream = generate_stream(base, rng)?;
            stream.shuffle(&mut stream_rng(*seed, 0));
            stream
        }
    })
}

fn zipf_stream<R: Rng + ?Sized>(f0: u64, exponent: f64, m: u64, rng: &mut R) -> Result<Vec<u64>> {
    if f0 == 0 {
        return Ok(Vec::new());
    }
    let zipf = Zipf::new(f0 as f64, exponent)
        .map_err(|e| Error::InvalidStream(format!("Zipf parameters: {e}")))?;
    let mut stream: Vec<u64> = (0..m).map(|_| zipf.sample(rng) as u64 - 1).collect();

    let mut counts = vec![0u64; f0 as usize];
    for &a in &stream {
        counts[a as usize] += 1;
    }
    let missing: Vec<u64> = (0..f0).filter(|&a| counts[a as usize] == 0).collect();
    let mut missing = missing.into_iter();
    // Overwrite surplus occurrences from the back so the length stays m.
    for slot in stream.iter_mut().rev() {
        if counts[*slot as usize] < 2 {
            continue;
        }
        let Some(a) = missing.next() else { break };
        counts[*slot as usize] -= 1;
        counts[a as usize] = 1;
        *slot = a;
    }
    Ok(stream)
}

/// `F0`: the number of distinct elements.
pub fn exact_f0<T: Hash + Eq>(stream: &[T]) -> u64 {
    stream.iter().collect::<HashSet<_>>().len() as u64
}

/// Last-occurrence times over a whole stream, 1-indexed.
#[derive(Clone, Debug)]
pub struct LastOccurrence<T> {
    /// `F_m`, ascending.
    pub times: Vec<u64>,
    pub last: HashMap<T, u64>,
}

pub fn last_occurrences<T: Hash + Eq + Clone>(stream: &[T]) -> LastOccurrence<T> {
    let mut last = HashMap::new();
    for (i, a) in stream.iter().enumerate() {
        last.insert(a.clone(), i as u64 + 1);
    }
    let mut times: Vec<u64> = last.values().copied().collect();
    times.sort_unstable();
    LastOccurrence { times, last }
}
