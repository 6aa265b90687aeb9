//! The cutoff sketch: a bounded list of sampled elements and a
//! non-increasing cutoff.
//!
//! Each arriving element `a` draws a fresh score `q`. Any stale copy of `a`
//! is dropped and `a` re-enters with score `q` iff `q` is below the current
//! cutoff. When the list outgrows the bucket limit `s`, the update rule picks
//! a smaller cutoff and the list is filtered down to scores strictly below
//! it. The estimate is `|L| / D([0, p))`.
//!
//! Two forms are implemented:
//!
//! * the **scored** form, parameterised by a score distribution and one of
//!   three update rules ([`UpdateRule`]), optionally with the refuse step
//!   that drops the newest element whenever filtering freed no space;
//! * the **Bernoulli** form, which stores insertion cutoffs instead of
//!   scores, admits an element with probability `p` and, on overflow, keeps
//!   every entry independently with probability 1/2 while halving `p`.
//!
//! With `G_inf` scores the two forms induce the same distribution over the
//! final list, since `Pr(q < p/2 | q < p) = 1/2` for every dyadic `p`.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::list::CutoffList;
use crate::rng::{bernoulli, stream_rng, SketchRng};
use crate::score::{cdf_below, sample_score, Score, ScoreDistribution};
use crate::sizing::SizingVariant;

/// How the cutoff shrinks when the list exceeds the bucket limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateRule {
    /// New cutoff is the largest score in the list.
    MaxScore,
    /// Halve the cutoff if some entry sits exactly at half of it, else abort.
    Cvm1Halve,
    /// Halve the cutoff, repeating until the list fits.
    Cvm2Halve,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Form {
    Scored {
        dist: ScoreDistribution,
        rule: UpdateRule,
        refuse: bool,
    },
    Bernoulli {
        refuse: bool,
    },
}

/// The named members of the family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// Max-score rule with continuous uniform scores.
    DonD,
    /// Max-score rule with scores from `U_{2^bits}`.
    DonDDiscrete {
        bits: u32,
    },
    /// Max-score rule with `G_inf` scores.
    DonDPrime,
    /// Max-score rule with `G_N'` scores.
    DonDPrimeDiscrete {
        truncation: u32,
    },
    Cvm1,
    Cvm2,
    /// Scored CVM2 with a single halving followed by the refuse step.
    Cvm2RefuseAdjoined,
    /// Bernoulli-form CVM2 with the refuse step.
    Cvm2Refuse,
}

pub const DEFAULT_RESOLUTION_BITS: u32 = 32;

impl Variant {
    pub const ALL_NAMES: &'static [&'static str] = &[
        "dond",
        "dond-disc[:bits]",
        "dond-prime",
        "dond-prime-disc[:truncation]",
        "cvm1",
        "cvm2",
        "cvm2-refuse-adjoined",
        "cvm2-refuse",
    ];

    pub fn form(self) -> Form {
        use ScoreDistribution::*;
        let scored = |dist, rule, refuse| Form::Scored { dist, rule, refuse };
        match self {
            Variant::DonD => scored(ContinuousUniform, UpdateRule::MaxScore, false),
            Variant::DonDDiscrete { bits } => {
                scored(DiscreteUniform { bits }, UpdateRule::MaxScore, false)
            }
            Variant::DonDPrime => scored(GeoLikeInfinite, UpdateRule::MaxScore, false),
            Variant::DonDPrimeDiscrete { truncation } => {
                scored(GeoLikeFinite { truncation }, UpdateRule::MaxScore, false)
            }
            Variant::Cvm1 => scored(GeoLikeInfinite, UpdateRule::Cvm1Halve, false),
            Variant::Cvm2 => scored(GeoLikeInfinite, UpdateRule::Cvm2Halve, false),
            Variant::Cvm2RefuseAdjoined => scored(GeoLikeInfinite, UpdateRule::Cvm2Halve, true),
            Variant::Cvm2Refuse => Form::Bernoulli { refuse: true },
        }
    }

    /// Which bucket-limit formula sizes this variant.
    pub fn sizing_variant(self) -> SizingVariant {
        match self {
            Variant::DonD | Variant::DonDDiscrete { .. } => SizingVariant::DonD,
            Variant::DonDPrime | Variant::DonDPrimeDiscrete { .. } => SizingVariant::DonDPrime,
            Variant::Cvm1 => SizingVariant::Cvm1,
            Variant::Cvm2 => SizingVariant::Cvm2,
            Variant::Cvm2RefuseAdjoined | Variant::Cvm2Refuse => SizingVariant::Cvm2Refuse,
        }
    }

    pub fn config(self, bucket_limit: usize) -> Result<SketchConfig> {
        SketchConfig::new(self.form(), bucket_limit)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::DonD => write!(f, "dond"),
            Variant::DonDDiscrete { bits } => write!(f, "dond-disc:{bits}"),
            Variant::DonDPrime => write!(f, "dond-prime"),
            Variant::DonDPrimeDiscrete { truncation } => write!(f, "dond-prime-disc:{truncation}"),
            Variant::Cvm1 => write!(f, "cvm1"),
            Variant::Cvm2 => write!(f, "cvm2"),
            Variant::Cvm2RefuseAdjoined => write!(f, "cvm2-refuse-adjoined"),
            Variant::Cvm2Refuse => write!(f, "cvm2-refuse"),
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, param) = match s.split_once(':') {
            Some((name, param)) => {
                let value = param.parse::<u32>().map_err(|_| {
                    Error::InvalidParameter(format!("bad resolution in variant {s:?}"))
                })?;
                (name, Some(value))
            }
            None => (s, None),
        };
        let bits = param.unwrap_or(DEFAULT_RESOLUTION_BITS);
        let variant = match name.to_ascii_lowercase().as_str() {
            "dond" => Variant::DonD,
            "dond-disc" => Variant::DonDDiscrete { bits },
            "dond-prime" => Variant::DonDPrime,
            "dond-prime-disc" => Variant::DonDPrimeDiscrete { truncation: bits },
            "cvm1" => Variant::Cvm1,
            "cvm2" => Variant::Cvm2,
            "cvm2-refuse-adjoined" => Variant::Cvm2RefuseAdjoined,
            "cvm2-refuse" => Variant::Cvm2Refuse,
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "unknown variant {s:?}; expected one of {}",
                    Variant::ALL_NAMES.join(", ")
                )))
            }
        };
        if param.is_some()
            && !matches!(
                variant,
                Variant::DonDDiscrete { .. } | Variant::DonDPrimeDiscrete { .. }
            )
        {
            return Err(Error::InvalidParameter(format!(
                "variant {name} takes no resolution"
            )));
        }
        variant.form().validate()?;
        Ok(variant)
    }
}

impl Serialize for Variant {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Variant {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl Form {
    pub fn validate(self) -> Result<Self> {
        if let Form::Scored { dist, rule, refuse } = self {
            dist.validate()?;
            if refuse && rule == UpdateRule::Cvm1Halve {
                return Err(Error::Unsupported(
                    "the refuse step replaces the abort of the CVM1 rule",
                ));
            }
        }
        Ok(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SketchConfig {
    pub form: Form,
    pub bucket_limit: usize,
}

impl SketchConfig {
    pub fn new(form: Form, bucket_limit: usize) -> Result<Self> {
        if bucket_limit == 0 {
            return Err(Error::InvalidParameter(
                "bucket limit must be at least 1".into(),
            ));
        }
        Ok(SketchConfig {
            form: form.validate()?,
            bucket_limit,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Running,
    Aborted,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Running => "running",
            Status::Aborted => "aborted",
        })
    }
}

/// The randomness consumed by one step.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Draw {
    Score(Score),
    /// The admission coin of the Bernoulli form.
    Bernoulli(bool),
    /// Indices of a set visited by the geometric walk.
    Visits(Vec<u64>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepRecord<K> {
    pub t: u64,
    pub draw: Draw,
    pub cutoff: Score,
    pub entries: Vec<(K, Score)>,
    pub refused: bool,
}

/// The per-step sequence `(L_t, p_t)`, recorded only when tracing.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Transcript<K> {
    pub records: Vec<StepRecord<K>>,
}

impl<K> Default for Transcript<K> {
    fn default() -> Self {
        Transcript {
            records: Vec::new(),
        }
    }
}

impl<K> Transcript<K> {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn cutoffs(&self) -> Vec<Score> {
        self.records.iter().map(|r| r.cutoff).collect()
    }

    /// Per-step scores; errors for transcripts of the Bernoulli form.
    pub fn scores(&self) -> Result<Vec<Score>> {
        self.records
            .iter()
            .map(|r| match r.draw {
                Draw::Score(q) => Ok(q),
                _ => Err(Error::MissingScores),
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EstimateReport {
    /// `None` when the sketch aborted.
    pub estimate: Option<f64>,
    pub final_cutoff: Score,
    pub final_list_size: usize,
    pub status: Status,
    pub steps_processed: u64,
}

#[derive(Clone, Debug)]
pub struct Sketch<K = u64> {
    pub(crate) config: SketchConfig,
    pub(crate) list: CutoffList<K>,
    pub(crate) cutoff: Score,
    pub(crate) steps: u64,
    pub(crate) status: Status,
    pub(crate) rng: SketchRng,
    pub(crate) transcript: Option<Transcript<K>>,
    pub(crate) refusals: u64,
}

impl<K: Ord + Clone> Sketch<K> {
    /// A fresh sketch drawing from the random stream `(seed, instance)`.
    pub fn new(config: SketchConfig, seed: u64, instance: u64) -> Self {
        Sketch {
            config,
            list: CutoffList::new(),
            cutoff: Score::ONE,
            steps: 0,
            status: Status::Running,
            rng: stream_rng(seed, instance),
            transcript: None,
            refusals: 0,
        }
    }

    pub fn with_trace(mut self) -> Self {
        self.transcript = Some(Transcript::default());
        self
    }

    pub fn config(&self) -> &SketchConfig {
        &self.config
    }

    pub fn list(&self) -> &CutoffList<K> {
        &self.list
    }

    pub fn cutoff(&self) -> Score {
        self.cutoff
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// How many times the refuse step dropped the newest element.
    pub fn refusals(&self) -> u64 {
        self.refusals
    }

    pub fn transcript(&self) -> Option<&Transcript<K>> {
        self.transcript.as_ref()
    }

    pub fn take_transcript(&mut self) -> Option<Transcript<K>> {
        self.transcript.take()
    }

    /// Processes one element with whichever step the configuration selects.
    pub fn process(&mut self, a: K) -> Result<Status> {
        match self.config.form {
            Form::Scored { refuse: false, .. } => self.step(a),
            Form::Scored { refuse: true, .. } => self.step_refuse(a),
            Form::Bernoulli { .. } => self.cvm2_refuse_step(a),
        }
    }

    /// One step of the plain scored sketch.
    pub fn step(&mut self, a: K) -> Result<Status> {
        let dist = match self.config.form {
            Form::Scored {
                dist,
                refuse: false,
                ..
            } => dist,
            _ => {
                return Err(Error::Unsupported(
                    "step needs a scored sketch without refuse",
                ))
            }
        };
        self.ensure_running()?;
        let q = sample_score(dist, &mut self.rng);
        self.apply_score(a, q)
    }

    /// One step of the refuse-adjoined scored sketch.
    pub fn step_refuse(&mut self, a: K) -> Result<Status> {
        let dist = match self.config.form {
            Form::Scored {
                dist, refuse: true, ..
            } => dist,
            _ => {
                return Err(Error::Unsupported(
                    "step_refuse needs a refuse-adjoined scored sketch",
                ))
            }
        };
        self.ensure_running()?;
        let q = sample_score(dist, &mut self.rng);
        self.apply_score(a, q)
    }

    /// A scored step with a caller-supplied score instead of a fresh draw.
    pub fn step_with_score(&mut self, a: K, q: Score) -> Result<Status> {
        if !matches!(self.config.form, Form::Scored { .. }) {
            return Err(Error::Unsupported("step_with_score needs a scored sketch"));
        }
        self.ensure_running()?;
        self.apply_score(a, q)
    }

    /// One step of the Bernoulli form.
    pub fn cvm2_refuse_step(&mut self, a: K) -> Result<Status> {
        if !matches!(self.config.form, Form::Bernoulli { .. }) {
            return Err(Error::Unsupported(
                "cvm2_refuse_step needs a Bernoulli-form sketch",
            ));
        }
        self.ensure_running()?;
        let admit = bernoulli(&mut self.rng, self.cutoff.value());
        self.apply_bernoulli(a, admit, None)
    }

    fn ensure_running(&self) -> Result<()> {
        match self.status {
            Status::Running => Ok(()),
            Status::Aborted => Err(Error::Aborted),
        }
    }

    fn apply_score(&mut self, a: K, q: Score) -> Result<Status> {
        let Form::Scored { rule, refuse, .. } = self.config.form else {
            unreachable!("checked by callers");
        };
        let s = self.config.bucket_limit;

        self.list.clear_mark();
        self.list.remove(&a);
        if q < self.cutoff {
            self.list.insert(a, q);
        }

        let mut refused = false;
        if self.list.len() > s {
            match rule {
                UpdateRule::MaxScore => {
                    let max = self.list.max_score()?;
                    self.cutoff = max;
                    self.list.filter(max);
                }
                UpdateRule::Cvm1Halve => {
                    let half = self.cutoff.half();
                    if self.list.max_score()? != half {
                        self.status = Status::Aborted;
                        return Ok(Status::Aborted);
                    }
                    self.cutoff = half;
                    self.list.filter(half);
                }
                UpdateRule::Cvm2Halve => loop {
                    self.cutoff = self.cutoff.half();
                    self.list.filter(self.cutoff);
                    if refuse || self.list.len() <= s {
                        break;
                    }
                },
            }
            if refuse && self.list.len() > s {
                refused = self.refuse_marked();
            }
        }

        self.steps += 1;
        self.record(Draw::Score(q), refused);
        Ok(Status::Running)
    }

    /// The Bernoulli-form step given the admission coin. Subsampling coins
    /// come from `coin`, or from the sketch's own stream when `None`.
    pub(crate) fn apply_bernoulli(
        &mut self,
        a: K,
        admit: bool,
        coin: Option<&mut dyn FnMut() -> bool>,
    ) -> Result<Status> {
        self.list.clear_mark();
        self.list.remove(&a);
        if admit {
            self.list.insert(a, self.cutoff);
        }
        let refused = self.shrink_by_halving(coin);
        self.steps += 1;
        self.record(Draw::Bernoulli(admit), refused);
        Ok(Status::Running)
    }

    /// On overflow, keeps each entry with probability 1/2 and halves the
    /// cutoff. If nothing was dropped, the refuse form drops the marked entry
    /// while the plain form tries again. Returns whether a refusal happened.
    pub(crate) fn shrink_by_halving(&mut self, coin: Option<&mut dyn FnMut() -> bool>) -> bool {
        let Form::Bernoulli { refuse } = self.config.form else {
            unreachable!("Bernoulli form only");
        };
        let s = self.config.bucket_limit;
        let rng = &mut self.rng;
        let mut fair = || bernoulli(rng, 0.5);
        let coin: &mut dyn FnMut() -> bool = match coin {
            Some(c) => c,
            None => &mut fair,
        };
        let mut stuck = false;
        while self.list.len() > s {
            let half = self.cutoff.half();
            let dropped = self.list.resample(half, |_| coin());
            self.cutoff = half;
            if dropped == 0 && refuse {
                stuck = true;
                break;
            }
        }
        stuck && self.refuse_marked()
    }

    fn refuse_marked(&mut self) -> bool {
        match self.list.marked().cloned() {
            Some(marked) => {
                self.list.remove(&marked);
                self.refusals += 1;
                true
            }
            None => false,
        }
    }

    pub(crate) fn record(&mut self, draw: Draw, refused: bool) {
        if let Some(transcript) = self.transcript.as_mut() {
            transcript.records.push(StepRecord {
                t: self.steps,
                draw,
                cutoff: self.cutoff,
                entries: self.list.entries(),
                refused,
            });
        }
    }

    /// The estimate `|L| / D([0, p))`; callable mid-stream.
    ///
    /// When `D([0, p)) = 0` with a non-empty list the estimate falls back to
    /// `min(n_cap, m_cap)`. The Bernoulli form divides by `p` directly.
    pub fn estimate(&self, n_cap: u64, m_cap: u64) -> Result<EstimateReport> {
        self.ensure_running()?;
        Ok(self.report(n_cap, m_cap))
    }

    /// Like [`Sketch::estimate`] but reports an abort instead of failing.
    pub fn report(&self, n_cap: u64, m_cap: u64) -> EstimateReport {
        let estimate = match self.status {
            Status::Aborted => None,
            Status::Running => Some(self.point_estimate(n_cap, m_cap)),
        };
        EstimateReport {
            estimate,
            final_cutoff: self.cutoff,
            final_list_size: self.list.len(),
            status: self.status,
            steps_processed: self.steps,
        }
    }

    fn point_estimate(&self, n_cap: u64, m_cap: u64) -> f64 {
        if self.list.is_empty() {
            return 0.0;
        }
        let size = self.list.len() as f64;
        let mass = match self.config.form {
            Form::Scored { dist, .. } => cdf_below(dist, self.cutoff),
            Form::Bernoulli { .. } => self.cutoff.value(),
        };
        if mass > 0.0 {
            size / mass
        } else {
            n_cap.min(m_cap) as f64
        }
    }
}

/// The report of a whole run plus, when tracing, its transcript.
#[derive(Clone, Debug)]
pub struct RunOutcome<K = u64> {
    pub report: EstimateReport,
    pub transcript: Option<Transcript<K>>,
}

/// Feeds `stream` through a fresh sketch and reports the final estimate.
/// An abort stops the run and is reported through the status.
pub fn run<I>(
    config: SketchConfig,
    seed: u64,
    trace: bool,
    stream: I,
    n_cap: u64,
    m_cap: u64,
) -> RunOutcome<u64>
where
    I: IntoIterator<Item = u64>,
{
    let mut sketch = Sketch::new(config, seed, 0);
    if trace {
        sketch = sketch.with_trace();
    }
    for a in stream {
        match sketch.process(a) {
            Ok(Status::Running) => {}
            Ok(Status::Aborted) | Err(_) => break,
        }
    }
    RunOutcome {
        report: sketch.report(n_cap, m_cap),
        transcript: sketch.take_transcript(),
    }
}

/// Draws scores for a whole stream up front, as the sketch would.
pub fn draw_scores<R: RngCore + ?Sized>(
    dist: ScoreDistribution,
    m: usize,
    rng: &mut R,
) -> Vec<Score> {
    (0..m).map(|_| sample_score(dist, rng)).collect()
}
