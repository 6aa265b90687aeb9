//! Streams of sets: ranges and cuboids fed to a Bernoulli-form sketch by
//! walking each set with geometric jumps.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{bernoulli, unit_uniform};
use crate::sketch::{Draw, EstimateReport, Form, Sketch, SketchConfig, Status};

/// An element of a set stream: one coordinate per dimension.
pub type Point = Vec<u64>;

/// A set answering membership, size and "the i-th element" queries.
pub trait DelphicSet {
    fn contains(&self, x: &[u64]) -> bool;

    fn cardinality(&self) -> u64;

    /// The `i`-th element in canonical order, `1 <= i <= cardinality`.
    fn pick(&self, i: u64) -> Result<Point>;
}

fn check_pick(i: u64, cardinality: u64) -> Result<()> {
    if i == 0 || i > cardinality {
        return Err(Error::PickOutOfRange {
            index: i,
            cardinality,
        });
    }
    Ok(())
}

/// The integers `lo..=hi`, in ascending order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "(u64, u64)", into = "(u64, u64)")]
pub struct RangeSet {
    lo: u64,
    hi: u64,
}

impl RangeSet {
    pub fn new(lo: u64, hi: u64) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidSet(format!("range {lo}..{hi} is empty")));
        }
        if hi - lo == u64::MAX {
            return Err(Error::InvalidSet("range size overflows u64".into()));
        }
        Ok(RangeSet { lo, hi })
    }

    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }
}

impl TryFrom<(u64, u64)> for RangeSet {
    type Error = Error;

    fn try_from((lo, hi): (u64, u64)) -> Result<Self> {
        RangeSet::new(lo, hi)
    }
}

impl From<RangeSet> for (u64, u64) {
    fn from(r: RangeSet) -> Self {
        (r.lo, r.hi)
    }
}

impl DelphicSet for RangeSet {
    fn contains(&self, x: &[u64]) -> bool {
        matches!(x, [v] if (self.lo..=self.hi).contains(v))
    }

    fn cardinality(&self) -> u64 {
        self.hi - self.lo + 1
    }

    fn pick(&self, i: u64) -> Result<Point> {
        check_pick(i, self.cardinality())?;
        Ok(vec![self.lo + (i - 1)])
    }
}

/// `[a_1..b_1] x ... x [a_d..b_d]`, ordered mixed-radix with the last
/// coordinate varying fastest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(u64, u64)>", into = "Vec<(u64, u64)>")]
pub struct CuboidSet {
    sides: Vec<(u64, u64)>,
    cardinality: u64,
}

impl CuboidSet {
    pub fn new(sides: Vec<(u64, u64)>) -> Result<Self> {
        if sides.is_empty() {
            return Err(Error::InvalidSet(
                "a cuboid needs at least one dimension".into(),
            ));
        }
        let mut cardinality: u64 = 1;
        for &(a, b) in &sides {
            if a == 0 || a > b {
                return Err(Error::InvalidSet(format!(
                    "cuboid side [{a}..{b}] must satisfy 1 <= a <= b"
                )));
            }
            cardinality = (b - a)
                .checked_add(1)
                .and_then(|len| cardinality.checked_mul(len))
                .ok_or_else(|| Error::InvalidSet("cuboid size overflows u64".into()))?;
        }
        Ok(CuboidSet { sides, cardinality })
    }

    pub fn dimension(&self) -> usize {
        self.sides.len()
    }

    pub fn sides(&self) -> &[(u64, u64)] {
        &self.sides
    }
}

impl TryFrom<Vec<(u64, u64)>> for CuboidSet {
    type Error = Error;

    fn try_from(sides: Vec<(u64, u64)>) -> Result<Self> {
        CuboidSet::new(sides)
    }
}

impl From<CuboidSet> for Vec<(u64, u64)> {
    fn from(c: CuboidSet) -> Self {
        c.sides
    }
}

impl DelphicSet for CuboidSet {
    fn contains(&self, x: &[u64]) -> bool {
        x.len() == self.sides.len()
            && x.iter()
                .zip(&self.sides)
                .all(|(v, &(a, b))| (a..=b).contains(v))
    }

    fn cardinality(&self) -> u64 {
        self.cardinality
    }

    fn pick(&self, i: u64) -> Result<Point> {
        check_pick(i, self.cardinality)?;
        let mut rest = i - 1;
        let mut point = vec![0; self.sides.len()];
        for (slot, &(a, b)) in point.iter_mut().zip(&self.sides).rev() {
            let len = b - a + 1;
            *slot = a + rest % len;
            rest /= len;
        }
        Ok(point)
    }
}

/// A set as it appears in a set stream.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "bounds", rename_all = "snake_case")]
pub enum SetDescriptor {
    Range(RangeSet),
    Cuboid(CuboidSet),
}

impl DelphicSet for SetDescriptor {
    fn contains(&self, x: &[u64]) -> bool {
        match self {
            SetDescriptor::Range(r) => r.contains(x),
            SetDescriptor::Cuboid(c) => c.contains(x),
        }
    }

    fn cardinality(&self) -> u64 {
        match self {
            SetDescriptor::Range(r) => r.cardinality(),
            SetDescriptor::Cuboid(c) => c.cardinality(),
        }
    }

    fn pick(&self, i: u64) -> Result<Point> {
        match self {
            SetDescriptor::Range(r) => r.pick(i),
            SetDescriptor::Cuboid(c) => c.pick(i),
        }
    }
}

impl FromStr for SetDescriptor {
    type Err = Error;

    /// `range LO HI` or `cuboid A1 B1 A2 B2 ...`.
    fn from_str(line: &str) -> Result<Self> {
        let mut words = line.split_whitespace();
        let kind = words
            .next()
            .ok_or_else(|| Error::InvalidSet("empty set description".into()))?;
        let numbers = words
            .map(|w| {
                w.parse::<u64>()
                    .map_err(|_| Error::InvalidSet(format!("{w:?} is not a non-negative integer")))
            })
            .collect::<Result<Vec<u64>>>()?;
        match kind {
            "range" => match numbers[..] {
                [lo, hi] => Ok(SetDescriptor::Range(RangeSet::new(lo, hi)?)),
                _ => Err(Error::InvalidSet("range takes exactly two bounds".into())),
            },
            "cuboid" => {
                if numbers.is_empty() || numbers.len() % 2 != 0 {
                    return Err(Error::InvalidSet(
                        "cuboid takes a non-empty list of bound pairs".into(),
                    ));
                }
                let sides = numbers.chunks(2).map(|c| (c[0], c[1])).collect();
                Ok(SetDescriptor::Cuboid(CuboidSet::new(sides)?))
            }
            other => Err(Error::InvalidSet(format!(
                "unknown set kind {other:?}; expected range or cuboid"
            ))),
        }
    }
}

impl fmt::Display for SetDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetDescriptor::Range(r) => write!(f, "range {} {}", r.lo, r.hi),
            SetDescriptor::Cuboid(c) => {
                f.write_str("cuboid")?;
                for (a, b) in &c.sides {
                    write!(f, " {a} {b}")?;
                }
                Ok(())
            }
        }
    }
}

/// How geometric jumps are drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometricMode {
    /// Inversion: one uniform draw per jump.
    #[default]
    Fast,
    /// A scan of Bernoulli(p) draws, one per skipped index. Visits exactly
    /// the indices a per-element coin scan would.
    Debug,
}

/// A Geo(p) draw: the trial index of the first success.
pub fn sample_geometric<R: RngCore + ?Sized>(rng: &mut R, p: f64, mode: GeometricMode) -> u64 {
    debug_assert!(p > 0.0 && p <= 1.0);
    match mode {
        GeometricMode::Debug => {
            let mut k = 1;
            while !bernoulli(rng, p) {
                k += 1;
            }
            k
        }
        GeometricMode::Fast => inverse_geometric(rng, p),
    }
}

fn inverse_geometric<R: RngCore + ?Sized>(rng: &mut R, p: f64) -> u64 {
    if p >= 1.0 {
        return 1;
    }
    let u = 1.0 - unit_uniform(rng);
    let jumps = (u.ln() / (-p).ln_1p()).floor() + 1.0;
    if jumps >= u64::MAX as f64 {
        u64::MAX
    } else {
        jumps as u64
    }
}

/// The next jump if it lands within `remaining` indices. Debug mode draws at
/// most `remaining` coins.
fn next_jump<R: RngCore + ?Sized>(
    rng: &mut R,
    p: f64,
    remaining: u64,
    mode: GeometricMode,
) -> Option<u64> {
    if remaining == 0 {
        return None;
    }
    match mode {
        GeometricMode::Debug => (1..=remaining).find(|_| bernoulli(rng, p)),
        GeometricMode::Fast => Some(inverse_geometric(rng, p)).filter(|&j| j <= remaining),
    }
}

impl Sketch<Point> {
    /// Processes one set: removes its members from the list, then walks it
    /// with Geo(p) jumps under the current cutoff, inserting each visited
    /// element and shrinking on overflow.
    pub fn process_set<S: DelphicSet + ?Sized>(
        &mut self,
        set: &S,
        mode: GeometricMode,
    ) -> Result<Status> {
        if !matches!(self.config.form, Form::Bernoulli { .. }) {
            return Err(Error::Unsupported(
                "set streams need a Bernoulli-form sketch",
            ));
        }
        if self.status == Status::Aborted {
            return Err(Error::Aborted);
        }
        self.list.clear_mark();
        self.list.remove_where(|x| set.contains(x));

        let size = set.cardinality();
        let tracing = self.transcript.is_some();
        let mut visits = Vec::new();
        let mut refused = false;
        let mut c = 0u64;
        while let Some(jump) = next_jump(&mut self.rng, self.cutoff.value(), size - c, mode) {
            c += jump;
            if tracing {
                visits.push(c);
            }
            let x = set.pick(c)?;
            self.list.insert(x, self.cutoff);
            refused |= self.shrink_by_halving(None);
        }
        self.steps += 1;
        self.record(Draw::Visits(visits), refused);
        Ok(Status::Running)
    }
}

/// Folds [`Sketch::process_set`] over `sets` and reports `|L| / p`.
pub fn run_set_stream<'a, I, S>(
    config: SketchConfig,
    seed: u64,
    instance: u64,
    mode: GeometricMode,
    sets: I,
    n_cap: u64,
    m_cap: u64,
) -> Result<EstimateReport>
where
    I: IntoIterator<Item = &'a S>,
    S: DelphicSet + 'a,
{
    let mut sketch: Sketch<Point> = Sketch::new(config, seed, instance);
    for set in sets {
        sketch.process_set(set, mode)?;
    }
    Ok(sketch.report(n_cap, m_cap))
}
