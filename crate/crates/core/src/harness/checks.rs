//! Structural checks on recorded sketch runs.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::streams::{exact_f0, last_occurrences};
use crate::rng::{dyadic_uniform, stream_rng, unit_uniform};
use crate::score::{map_g, Score, Truncation};
use crate::sketch::{Sketch, Transcript, Variant};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FairCheck {
    pub fair: bool,
    /// The first `(t, j)`, 1-indexed, where `a_j` was in `L_t` without
    /// `q_j < p_t` or the other way round.
    pub first_violation: Option<(u64, u64)>,
}

/// Checks `a_j in L_t <=> q_j < p_t` for every step `t` and every `j` that is
/// the latest occurrence of its element up to `t`. Steps past the end of the
/// transcript (after an abort) are not checked.
pub fn check_fair(transcript: &Transcript<u64>, stream: &[u64]) -> Result<FairCheck> {
    let scores = transcript.scores()?;
    if scores.len() > stream.len() {
        return Err(Error::InvalidParameter(
            "transcript is longer than the stream".into(),
        ));
    }
    let mut latest: HashMap<u64, usize> = HashMap::new();
    for (t, record) in transcript.records.iter().enumerate() {
        latest.insert(stream[t], t);
        let violation = latest
            .iter()
            .filter(|(a, &j)| {
                let listed = record.entries.binary_search_by_key(*a, |(k, _)| *k).is_ok();
                listed != (scores[j] < record.cutoff)
            })
            .map(|(_, &j)| j)
            .min();
        if let Some(j) = violation {
            return Ok(FairCheck {
                fair: false,
                first_violation: Some((t as u64 + 1, j as u64 + 1)),
            });
        }
    }
    Ok(FairCheck {
        fair: true,
        first_violation: None,
    })
}

/// Whether `p_t <= p_{t-1}` at every step, starting from `p_0 = 1`.
pub fn check_monotone<K>(transcript: &Transcript<K>) -> bool {
    is_non_increasing(
        std::iter::once(Score::ONE).chain(transcript.records.iter().map(|r| r.cutoff)),
    )
}

pub fn is_non_increasing(cutoffs: impl IntoIterator<Item = Score>) -> bool {
    let mut previous: Option<Score> = None;
    for p in cutoffs {
        if previous.is_some_and(|prev| p > prev) {
            return false;
        }
        previous = Some(p);
    }
    true
}

/// A discrete-uniform run and a `G_N'` run driven by the same uniform draws.
#[derive(Clone, Debug)]
pub struct CoupledPair {
    pub uniform: Transcript<u64>,
    pub geometric: Transcript<u64>,
    /// `p'_t <= p_t <= 2 p'_t` at every step.
    pub sandwich: bool,
    /// The first step `t`, 1-indexed, where the sandwich fails.
    pub first_violation: Option<u64>,
}

/// Runs the max-score sketch on `u_t ~ U_{2^N'}` and on `g(u_t)`, using one
/// draw per step for both.
///
/// The sandwich can fail only through `u = 0`, which maps to `2^-N'-1`: once
/// the uniform run's list overflows with all scores 0, its cutoff drops to 0
/// while the other run's stops at `2^-N'-1`. This needs the cutoff to reach
/// the bottom of the grid, so it is confined to `2^N'` not much above `F0 / s`.
pub fn coupled_dond_pair(
    stream: &[u64],
    truncation: u32,
    s: usize,
    seed: u64,
) -> Result<CoupledPair> {
    let mut uniform: Sketch = Sketch::new(
        Variant::DonDDiscrete { bits: truncation }.config(s)?,
        seed,
        0,
    )
    .with_trace();
    let mut geometric: Sketch = Sketch::new(
        Variant::DonDPrimeDiscrete { truncation }.config(s)?,
        seed,
        0,
    )
    .with_trace();
    let mut rng = stream_rng(seed, 0);
    let mut first_violation = None;
    for (t, &a) in stream.iter().enumerate() {
        let u = dyadic_uniform(&mut rng, truncation);
        uniform.step_with_score(a, Score::new(u)?)?;
        geometric.step_with_score(a, map_g(u, Truncation::Finite(truncation))?)?;
        let (p, p_prime) = (uniform.cutoff().value(), geometric.cutoff().value());
        if first_violation.is_none() && !(p_prime <= p && p <= 2.0 * p_prime) {
            first_violation = Some(t as u64 + 1);
        }
    }
    Ok(CoupledPair {
        uniform: uniform.take_transcript().unwrap_or_default(),
        geometric: geometric.take_transcript().unwrap_or_default(),
        sandwich: first_violation.is_none(),
        first_violation,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `p_m = p'_m <= c_{x+1}`.
    CutoffKept,
    /// `p_m = c_{x+1} < p'_m`.
    CreditCutoff,
    Neither,
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CreditSubstitutionReport {
    /// `set(L_m)`, ascending.
    pub final_set: Vec<u64>,
    pub x: usize,
    /// `c_{x+1}`: the `(x+1)`-th smallest score among last occurrences.
    pub c_next: Score,
    pub p_m: Score,
    pub p_m_sub: Score,
    pub branch: Branch,
}

impl CreditSubstitutionReport {
    pub fn exactly_one_branch(&self) -> bool {
        matches!(self.branch, Branch::CutoffKept | Branch::CreditCutoff)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum CreditCheck {
    /// `F0 <= s`: the cutoff never drops below 1.
    Skipped,
    Checked(CreditSubstitutionReport),
}

/// Runs the max-score sketch with continuous uniform scores, then re-runs it
/// with the last-occurrence scores replaced by 0 for elements of the final
/// list and by 1 for the rest, and compares the two final cutoffs with
/// `c_{x+1}`.
pub fn credit_substitution_check(stream: &[u64], seed: u64, s: usize) -> Result<CreditCheck> {
    if exact_f0(stream) <= s as u64 {
        return Ok(CreditCheck::Skipped);
    }
    let config = Variant::DonD.config(s)?;
    let mut rng = stream_rng(seed, 0);
    let scores: Vec<Score> = stream
        .iter()
        .map(|_| Score::new(unit_uniform(&mut rng)))
        .collect::<Result<_>>()?;

    let mut original: Sketch = Sketch::new(config, seed, 0);
    for (&a, &q) in stream.iter().zip(&scores) {
        original.step_with_score(a, q)?;
    }
    let final_set: Vec<u64> = original.list().elements().copied().collect();
    let x = final_set.len();

    let last = last_occurrences(stream);
    let mut credits: Vec<Score> = last.times.iter().map(|&t| scores[t as usize - 1]).collect();
    credits.sort_unstable();
    let c_next = credits[x];

    let mut substituted = scores.clone();
    for &t in &last.times {
        let i = t as usize - 1;
        substituted[i] = if original.list().contains(&stream[i]) {
            Score::ZERO
        } else {
            Score::ONE
        };
    }
    let mut rerun: Sketch = Sketch::new(config, seed, 0);
    for (&a, &q) in stream.iter().zip(&substituted) {
        rerun.step_with_score(a, q)?;
    }

    let p_m = original.cutoff();
    let p_m_sub = rerun.cutoff();
    let kept = p_m == p_m_sub && p_m_sub <= c_next;
    let credit = p_m == c_next && c_next < p_m_sub;
    let branch = match (kept, credit) {
        (true, false) => Branch::CutoffKept,
        (false, true) => Branch::CreditCutoff,
        (false, false) => Branch::Neither,
        (true, true) => Branch::Both,
    };
    Ok(CreditCheck::Checked(CreditSubstitutionReport {
        final_set,
        x,
        c_next,
        p_m,
        p_m_sub,
        branch,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::{run, StepRecord};

    fn transcript_with_cutoffs(cutoffs: &[f64]) -> Transcript<u64> {
        Transcript {
            records: cutoffs
                .iter()
                .enumerate()
                .map(|(t, &p)| StepRecord {
                    t: t as u64 + 1,
                    draw: crate::sketch::Draw::Score(Score::ZERO),
                    cutoff: Score::new(p).unwrap(),
                    entries: Vec::new(),
                    refused: false,
                })
                .collect(),
        }
    }

    #[test]
    fn monotone_examples() {
        assert!(check_monotone(&transcript_with_cutoffs(&[1.0, 1.0, 1.0])));
        assert!(check_monotone(&transcript_with_cutoffs(&[
            0.8, 0.5, 0.5, 0.1
        ])));
        assert!(!check_monotone(&transcript_with_cutoffs(&[0.8, 0.5, 0.6])));
        assert!(check_monotone(&Transcript::<u64>::default()));
    }

    #[test]
    fn empty_stream_is_fair() {
        let check = check_fair(&Transcript::default(), &[]).unwrap();
        assert!(check.fair);
    }

    #[test]
    fn real_runs_are_fair() {
        let stream: Vec<u64> = (0..400).map(|i| (i * 37) % 90).collect();
        for v in [Variant::DonD, Variant::DonDPrime, Variant::Cvm2] {
            let out = run(v.config(10).unwrap(), 5, true, stream.clone(), 1000, 400);
            let t = out.transcript.unwrap();
            assert!(check_fair(&t, &stream).unwrap().fair, "{v}");
            assert!(check_monotone(&t));
        }
    }

    #[test]
    fn raised_cutoff_is_caught() {
        let stream: Vec<u64> = (0..200).map(|i| i % 40).collect();
        let out = run(
            Variant::DonD.config(8).unwrap(),
            2,
            true,
            stream.clone(),
            1000,
            200,
        );
        let mut t = out.transcript.unwrap();
        let scores = t.scores().unwrap();
        // Raise the final cutoff above a last-occurrence score that is not listed.
        let last = t.records.len() - 1;
        let m = stream.len();
        let (_, q) = (m - 40..m)
            .map(|j| (j, scores[j]))
            .filter(|(j, _)| {
                t.records[last]
                    .entries
                    .binary_search_by_key(&stream[*j], |e| e.0)
                    .is_err()
            })
            .min_by_key(|(_, q)| *q)
            .unwrap();
        t.records[last].cutoff = Score::new((q.value() + 1.0) / 2.0).unwrap();
        let check = check_fair(&t, &stream).unwrap();
        assert!(!check.fair);
        assert_eq!(check.first_violation.unwrap().0, m as u64);
        assert!(check.first_violation.unwrap().1 <= m as u64);
    }

    #[test]
    fn bernoulli_transcripts_have_no_scores() {
        let out = run(
            Variant::Cvm2Refuse.config(4).unwrap(),
            1,
            true,
            [1, 2, 3],
            10,
            3,
        );
        assert_eq!(
            check_fair(&out.transcript.unwrap(), &[1, 2, 3]),
            Err(Error::MissingScores)
        );
    }

    #[test]
    fn coupled_pair_with_room_keeps_both_cutoffs_at_one() {
        let stream: Vec<u64> = (0..30).map(|i| i % 5).collect();
        let pair = coupled_dond_pair(&stream, 8, 5, 3).unwrap();
        assert!(pair.sandwich);
        assert!(pair.uniform.cutoffs().iter().all(|&p| p == Score::ONE));
        assert!(pair.geometric.cutoffs().iter().all(|&p| p == Score::ONE));
    }

    #[test]
    fn coupled_pairs_respect_the_sandwich() {
        for seed in 0..100 {
            let stream: Vec<u64> = (0..300).map(|i| (i * 7 + seed) % 120).collect();
            let pair = coupled_dond_pair(&stream, 6 + (seed % 5) as u32, 10, seed).unwrap();
            assert!(pair.sandwich, "seed {seed}");
        }
    }

    #[test]
    fn coarse_grids_break_the_sandwich_only_at_zero() {
        let stream: Vec<u64> = (0..3000).map(|i| i % 1000).collect();
        let mut broken = 0;
        for seed in 0..20 {
            let pair = coupled_dond_pair(&stream, 3, 4, seed).unwrap();
            if let Some(t) = pair.first_violation {
                let i = t as usize - 1;
                assert_eq!(pair.uniform.records[i].cutoff, Score::ZERO);
                broken += 1;
            }
        }
        assert!(broken > 0);
    }

    #[test]
    fn credit_check_skips_small_streams() {
        assert_eq!(
            credit_substitution_check(&[1, 2, 3, 1], 1, 5).unwrap(),
            CreditCheck::Skipped
        );
    }

    #[test]
    fn credit_check_finds_exactly_one_branch() {
        let mut seen = [false; 2];
        for seed in 0..200 {
            let stream: Vec<u64> = (0..400).map(|i| (i * 13 + seed) % 200).collect();
            let CreditCheck::Checked(report) =
                credit_substitution_check(&stream, seed, 20).unwrap()
            else {
                panic!("F0 > s");
            };
            assert!(report.exactly_one_branch(), "seed {seed}: {report:?}");
            match report.branch {
                Branch::CutoffKept => seen[0] = true,
                Branch::CreditCutoff => {
                    assert!(report.p_m_sub > report.c_next);
                    seen[1] = true;
                }
                _ => unreachable!(),
            }
        }
        assert!(seen[0] || seen[1]);
    }
}
