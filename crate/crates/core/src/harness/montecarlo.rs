//! Repeated independent runs over a fixed stream, summarised against the
//! true distinct count.

use serde::{Deserialize, Serialize};

use crate::delphic::{GeometricMode, Point, SetDescriptor};
use crate::error::{Error, Result};
use crate::harness::streams::{exact_f0, generate_stream, StreamSpec};
use crate::rng::stream_rng;
use crate::sizing::{bucket_limit, p0, SizingParams};
use crate::sketch::{EstimateReport, Sketch, SketchConfig, Status, Variant};

/// One Monte Carlo experiment. When `s` is absent the bucket limit is sized
/// from `epsilon`, `delta`, the stream length and `n` (default: the stream
/// length).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    pub variant: Variant,
    pub stream: StreamSpec,
    #[serde(default)]
    pub stream_seed: u64,
    #[serde(default)]
    pub s: Option<usize>,
    pub epsilon: f64,
    pub delta: f64,
    #[serde(default)]
    pub n: Option<u64>,
    pub trials: u64,
    #[serde(default)]
    pub base_seed: u64,
}

impl Experiment {
    pub fn bucket_limit(&self, m: u64) -> Result<usize> {
        match self.s {
            Some(0) => Err(Error::InvalidParameter("s must be at least 1".into())),
            Some(s) => Ok(s),
            None => {
                let m = m.max(1);
                let params = SizingParams::new(
                    self.variant.sizing_variant(),
                    self.epsilon,
                    self.delta,
                    m,
                    self.n.unwrap_or(m),
                )?;
                Ok(bucket_limit(&params)?.s)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub trials: u64,
    /// Trials that did not abort.
    pub completed: u64,
    pub s: usize,
    pub f0: u64,
    pub epsilon: f64,
    /// Mean over completed trials.
    pub mean_estimate: f64,
    pub standard_error: f64,
    pub empirical_bias: f64,
    /// Fraction of trials whose estimate misses `[(1-eps) F0, (1+eps) F0]`;
    /// aborted trials count as misses.
    pub failure_rate: f64,
    pub abort_rate: f64,
    /// Fraction of trials ending with `p_m < p_0`.
    pub p_small_rate: f64,
    pub p0: f64,
}

/// Order-insensitive accumulator over per-trial reports.
#[derive(Clone, Debug)]
pub struct Aggregate {
    f0: u64,
    epsilon: f64,
    p0: f64,
    trials: u64,
    completed: u64,
    sum: f64,
    sum_sq: f64,
    failures: u64,
    aborts: u64,
    p_small: u64,
}

impl Aggregate {
    pub fn new(f0: u64, s: usize, epsilon: f64) -> Self {
        Aggregate {
            f0,
            epsilon,
            p0: p0(s, f0),
            trials: 0,
            completed: 0,
            sum: 0.0,
            sum_sq: 0.0,
            failures: 0,
            aborts: 0,
            p_small: 0,
        }
    }

    pub fn push(&mut self, report: &EstimateReport) {
        self.trials += 1;
        if report.final_cutoff.value() < self.p0 {
            self.p_small += 1;
        }
        match (report.status, report.estimate) {
            (Status::Running, Some(est)) => {
                self.completed += 1;
                self.sum += est;
                self.sum_sq += est * est;
                if (est - self.f0 as f64).abs() > self.epsilon * self.f0 as f64 {
                    self.failures += 1;
                }
            }
            _ => {
                self.aborts += 1;
                self.failures += 1;
            }
        }
    }

    pub fn finish(&self, s: usize) -> MonteCarloReport {
        let n = self.completed as f64;
        let mean = if self.completed > 0 {
            self.sum / n
        } else {
            f64::NAN
        };
        let standard_error = if self.completed > 1 {
            let var = ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        let rate = |k: u64| k as f64 / self.trials.max(1) as f64;
        MonteCarloReport {
            trials: self.trials,
            completed: self.completed,
            s,
            f0: self.f0,
            epsilon: self.epsilon,
            mean_estimate: mean,
            standard_error,
            empirical_bias: mean - self.f0 as f64,
            failure_rate: rate(self.failures),
            abort_rate: rate(self.aborts),
            p_small_rate: rate(self.p_small),
            p0: self.p0,
        }
    }
}

/// Runs `trials` independent sketches over one generated stream. Trial `i`
/// draws from random stream `i` under `base_seed`.
pub fn monte_carlo(experiment: &Experiment) -> Result<MonteCarloReport> {
    if experiment.trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let stream = generate_stream(
        &experiment.stream,
        &mut stream_rng(experiment.stream_seed, 0),
    )?;
    let m = stream.len() as u64;
    let s = experiment.bucket_limit(m)?;
    let config = experiment.variant.config(s)?;
    let n_cap = experiment.n.unwrap_or(m).max(1);
    let f0 = exact_f0(&stream);
    monte_carlo_stream(
        config,
        &stream,
        f0,
        experiment.epsilon,
        experiment.trials,
        experiment.base_seed,
        n_cap,
    )
}

/// [`monte_carlo`] over an explicit element stream.
pub fn monte_carlo_stream(
    config: SketchConfig,
    stream: &[u64],
    f0: u64,
    epsilon: f64,
    trials: u64,
    base_seed: u64,
    n_cap: u64,
) -> Result<MonteCarloReport> {
    let m = stream.len() as u64;
    let mut agg = Aggregate::new(f0, config.bucket_limit, epsilon);
    for i in 0..trials {
        let mut sketch: Sketch = Sketch::new(config, base_seed, i);
        for &a in stream {
            if sketch.process(a)? == Status::Aborted {
                break;
            }
        }
        agg.push(&sketch.report(n_cap, m));
    }
    Ok(agg.finish(config.bucket_limit))
}

/// Monte Carlo over a stream of sets; `f0` is the size of their union.
pub fn monte_carlo_sets(
    config: SketchConfig,
    sets: &[SetDescriptor],
    f0: u64,
    epsilon: f64,
    trials: u64,
    base_seed: u64,
    mode: GeometricMode,
) -> Result<MonteCarloReport> {
    let m = sets.len() as u64;
    let mut agg = Aggregate::new(f0, config.bucket_limit, epsilon);
    for i in 0..trials {
        let mut sketch: Sketch<Point> = Sketch::new(config, base_seed, i);
        for set in sets {
            sketch.process_set(set, mode)?;
        }
        agg.push(&sketch.report(u64::MAX, m.max(f0)));
    }
    Ok(agg.finish(config.bucket_limit))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn experiment(variant: Variant, trials: u64) -> Experiment {
        Experiment {
            variant,
            stream: StreamSpec::Repeated { f0: 300, reps: 2 },
            stream_seed: 0,
            s: Some(30),
            epsilon: 0.5,
            delta: 0.1,
            n: None,
            trials,
            base_seed: 17,
        }
    }

    #[test]
    fn single_trials_are_deterministic() {
        for v in [Variant::DonD, Variant::Cvm1, Variant::Cvm2Refuse] {
            let a = monte_carlo(&experiment(v, 1)).unwrap();
            let b = monte_carlo(&experiment(v, 1)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn rates_are_fractions() {
        for v in [
            Variant::DonD,
            Variant::Cvm1,
            Variant::Cvm2,
            Variant::Cvm2Refuse,
        ] {
            let r = monte_carlo(&experiment(v, 200)).unwrap();
            for rate in [r.failure_rate, r.abort_rate, r.p_small_rate] {
                assert!((0.0..=1.0).contains(&rate));
            }
            assert_eq!(r.trials, 200);
            assert_eq!(r.f0, 300);
        }
    }

    #[test]
    fn exact_when_everything_fits() {
        let mut e = experiment(Variant::Cvm2, 20);
        e.s = Some(400);
        let r = monte_carlo(&e).unwrap();
        assert_eq!(r.mean_estimate, 300.0);
        assert_eq!(r.standard_error, 0.0);
        assert_eq!(r.failure_rate, 0.0);
    }

    #[test]
    fn sized_experiments_use_the_formula() {
        let mut e = experiment(Variant::Cvm2, 1);
        e.s = None;
        let params = SizingParams::new(e.variant.sizing_variant(), 0.5, 0.1, 600, 600).unwrap();
        assert_eq!(monte_carlo(&e).unwrap().s, bucket_limit(&params).unwrap().s);
    }

    #[test]
    fn zero_trials_is_an_error() {
        assert!(monte_carlo(&experiment(Variant::DonD, 0)).is_err());
    }

    #[test]
    fn experiments_load_from_toml() {
        let e: Experiment = toml::from_str(
            r#"
variant = "cvm2"
epsilon = 0.5
delta = 0.1
trials = 10
base_seed = 3
[stream]
kind = "all_distinct"
f0 = 50
"#,
        )
        .unwrap();
        assert_eq!(e.variant, Variant::Cvm2);
        assert_eq!(e.s, None);
    }
}
