use std::collections::BTreeMap;

use cutoff_core::harness::{generate_stream, monte_carlo_stream, StreamSpec};
use cutoff_core::rng::stream_rng;
use cutoff_core::{Form, Sketch, SketchConfig, Status, Variant};

fn cutoff_histogram(
    config: SketchConfig,
    stream: &[u64],
    trials: u64,
    seed: u64,
) -> BTreeMap<u64, u64> {
    let mut hist = BTreeMap::new();
    for i in 0..trials {
        let mut sk: Sketch = Sketch::new(config, seed, i);
        for &a in stream {
            assert_eq!(sk.process(a).unwrap(), Status::Running);
        }
        let exponent = (-sk.cutoff().value().log2()).round() as u64;
        *hist.entry(exponent).or_insert(0) += 1;
    }
    hist
}

#[test]
fn halving_scored_and_bernoulli_forms_agree_in_distribution() {
    let spec = StreamSpec::Permuted {
        base: Box::new(StreamSpec::Repeated { f0: 400, reps: 3 }),
        seed: 4,
    };
    let stream = generate_stream(&spec, &mut stream_rng(4, 0)).unwrap();
    let scored = Variant::Cvm2.config(24).unwrap();
    let bernoulli = SketchConfig::new(Form::Bernoulli { refuse: false }, 24).unwrap();
    let trials = 4000;

    let a = monte_carlo_stream(scored, &stream, 400, 0.5, trials, 1, 1200).unwrap();
    let b = monte_carlo_stream(bernoulli, &stream, 400, 0.5, trials, 2, 1200).unwrap();
    let se = (a.standard_error.powi(2) + b.standard_error.powi(2)).sqrt();
    assert!(
        (a.mean_estimate - b.mean_estimate).abs() <= 3.5 * se,
        "{a:?} vs {b:?}"
    );

    let ha = cutoff_histogram(scored, &stream, trials, 3);
    let hb = cutoff_histogram(bernoulli, &stream, trials, 5);
    for k in ha.keys().chain(hb.keys()) {
        let pa = *ha.get(k).unwrap_or(&0) as f64 / trials as f64;
        let pb = *hb.get(k).unwrap_or(&0) as f64 / trials as f64;
        let pooled = (pa + pb) / 2.0;
        let sigma = (2.0 * pooled * (1.0 - pooled) / trials as f64).sqrt();
        assert!(
            (pa - pb).abs() <= 3.5 * sigma + 1e-9,
            "cutoff 2^-{k}: {pa} vs {pb}"
        );
    }
}

#[test]
fn refuse_changes_nothing_when_the_list_never_sticks() {
    // With distinct scores halving always frees space unless every entry
    // sits below half the cutoff; compare step by step and stop at the
    // first refusal.
    let stream: Vec<u64> = (0..2000).map(|i| (i * 7) % 300).collect();
    for seed in 0..200 {
        let mut plain: Sketch =
            Sketch::new(Variant::Cvm2.config(16).unwrap(), seed, 0).with_trace();
        let mut refuse: Sketch =
            Sketch::new(Variant::Cvm2RefuseAdjoined.config(16).unwrap(), seed, 0).with_trace();
        for &a in &stream {
            plain.process(a).unwrap();
            refuse.process(a).unwrap();
            if refuse.refusals() > 0 {
                break;
            }
            let (p, r) = (plain.transcript().unwrap(), refuse.transcript().unwrap());
            assert_eq!(p.records.last(), r.records.last(), "seed {seed}");
        }
    }
}
