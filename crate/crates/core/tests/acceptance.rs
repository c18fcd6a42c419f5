//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero when any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use statrs::distribution::{ContinuousCDF, StudentsT};

use spreadprof::classifier::{self, EmbeddingTable, ExperimentConfig, Network, TrainConfig};
use spreadprof::cli::{self, PipelineConfig};
use spreadprof::corpus::{self, SpreaderClass};
use spreadprof::demo;
use spreadprof::features::{self, Feature, FeatureVector, LabeledFeatureRow};
use spreadprof::lexicon::{self, CategoryLexicon, Pattern};
use spreadprof::stats::{self, Marker};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

const CATEGORIES: [&str; 5] = ["tentat", "discrep", "certain", "anx", "futurefocus"];

const VOCAB: &[&str] = &[
    "should",
    "Would",
    "could,",
    "maybe",
    "PERHAPS",
    "guess?",
    "always",
    "never!",
    "nervous",
    "afraid",
    "tense",
    "may",
    "will",
    "soon",
    "the",
    "vote",
    "people",
    "government",
    "we",
    "#maybe",
    "@should",
    "http://t.co/x",
    "soon.https://t.co/y",
    "www.never.com",
    "it's",
    "\"always\"",
    "café",
    "naïve",
    "🙂",
    "$100",
    "...",
    "so-so",
    "shouldn't",
    "willing",
];

fn random_tweet(rng: &mut impl Rng) -> String {
    let n = rng.random_range(0..30);
    (0..n)
        .map(|_| *VOCAB.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

fn naive_rate(tokens: &[String], patterns: &[Pattern]) -> f64 {
    if tokens.is_empty() {
        return 0.0;
    }
    let mut count = 0usize;
    for t in tokens {
        for p in patterns {
            let hit = match p {
                Pattern::Literal(w) => t == w,
                Pattern::Stem(s) => t.starts_with(s.as_str()),
            };
            if hit {
                count += 1;
                break;
            }
        }
    }
    100.0 * count as f64 / tokens.len() as f64
}

fn c1_lexicon_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let starter = CategoryLexicon::starter();
    let stems = CategoryLexicon::parse(
        "[tentat]\nmaybe\nperhap*\nguess*\n[discrep]\nshould*\nwould\n[certain]\nalways\nnever*\n[anx]\nnerv*\nafraid\n[futurefocus]\nwill*\nsoon\nmay\n",
    )
    .map_err(|e| e.to_string())?;
    let mut compared = 0;
    for _ in 0..1000 {
        let tokens = lexicon::tokenize(&random_tweet(&mut rng)).into_inner();
        for lex in [&starter, &stems] {
            for cat in CATEGORIES {
                let fast: f64 =
                    lexicon::category_rate(&tokens, lex, cat).map_err(|e| e.to_string())?;
                let slow = naive_rate(&tokens, lex.patterns(cat).unwrap());
                check(fast == slow, || {
                    format!("{cat}: {fast} vs naive {slow} on {tokens:?}")
                })?;
                compared += 1;
            }
        }
    }

    let corpus: Vec<String> = (0..100_000).map(|_| random_tweet(&mut rng)).collect();
    let start = Instant::now();
    let mut sink = 0.0f64;
    for text in &corpus {
        let tokens = lexicon::tokenize(text);
        for cat in CATEGORIES {
            sink += lexicon::category_rate::<f64>(&tokens, &starter, cat).unwrap();
        }
    }
    let elapsed = start.elapsed();
    std::hint::black_box(sink);
    check(elapsed < Duration::from_secs(1), || {
        format!("10^5 tweets took {elapsed:?}")
    })?;
    Ok(format!(
        "{compared} rates identical; 10^5 tweets in {elapsed:.2?}"
    ))
}

struct Reference {
    t: f64,
    df: f64,
    p: f64,
}

fn reference_welch(a: &[f64], b: &[f64]) -> Reference {
    let moments = |x: &[f64]| {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
        (n, m, v)
    };
    let (na, ma, va) = moments(a);
    let (nb, mb, vb) = moments(b);
    let (qa, qb) = (va / na, vb / nb);
    let t = (ma - mb) / (qa + qb).sqrt();
    let df = (qa + qb).powi(2) / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
    let p = 2.0 * StudentsT::new(0.0, 1.0, df).unwrap().cdf(-t.abs());
    Reference { t, df, p }
}

fn c2_statistics_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut max_dt, mut max_dp) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let na = rng.random_range(2..80);
        let nb = rng.random_range(2..80);
        let scale_a = 10f64.powf(rng.random_range(-2.0..3.0));
        let scale_b = scale_a * rng.random_range(0.2..5.0);
        let shift = rng.random_range(-2.0..2.0) * scale_a;
        let a: Vec<f64> = (0..na)
            .map(|_| scale_a * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let b: Vec<f64> = (0..nb)
            .map(|_| shift + scale_b * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let w = stats::welch_t(&a, &b).map_err(|e| e.to_string())?;
        let p = stats::p_two_tailed(w.t, w.df).map_err(|e| e.to_string())?;
        let r = reference_welch(&a, &b);
        max_dt = max_dt.max((w.t - r.t).abs());
        max_dp = max_dp.max((p - r.p).abs());
        check((w.df - r.df).abs() <= 1e-9 * r.df, || {
            format!("df {} vs {}", w.df, r.df)
        })?;
    }
    check(max_dt <= 1e-9, || format!("max |dt| = {max_dt:e}"))?;
    check(max_dp <= 1e-8, || format!("max |dp| = {max_dp:e}"))?;

    let hand = stats::welch_t(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 3.0, 4.0, 5.0, 6.0])
        .map_err(|e| e.to_string())?;
    check(hand.t == -1.0 && hand.df == 8.0, || {
        format!("hand case t={} df={}", hand.t, hand.df)
    })?;
    Ok(format!(
        "100 pairs, max |dt| {max_dt:.1e}, max |dp| {max_dp:.1e}; hand case t=-1 df=8"
    ))
}

fn label(fake: bool) -> SpreaderClass {
    if fake {
        SpreaderClass::FakeSpreader
    } else {
        SpreaderClass::RealSpreader
    }
}

/// Plausible location and spread for each feature, in fixed order.
const FEATURE_SCALE: [(f64, f64); 10] = [
    (3.0, 1.5),
    (2.5, 1.2),
    (1.5, 0.8),
    (0.8, 0.5),
    (4.0, 2.0),
    (20.0, 10.0),
    (500.0, 300.0),
    (1500.0, 900.0),
    (5.0, 4.0),
    (10.0, 8.0),
];

fn c3_group_comparison() -> Outcome {
    let start = Instant::now();
    let shifted = [
        Feature::Tentativeness,
        Feature::Certainty,
        Feature::LackOfControl,
        Feature::Influence,
        Feature::BoostLikes,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut rows = Vec::new();
    for i in 0..1000 {
        let fake = i % 2 == 0;
        let mut fv = FeatureVector::default();
        for f in Feature::ALL {
            let (loc, sd) = FEATURE_SCALE[f.index()];
            let shift = if fake && shifted.contains(&f) {
                sd
            } else {
                0.0
            };
            let z: f64 = rng.sample(StandardNormal);
            fv.set(f, Some(loc + shift + sd * z));
        }
        rows.push(LabeledFeatureRow {
            user_id: format!("s{i:04}"),
            label: label(fake),
            features: fv,
        });
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("features.csv");
    let mut body = Vec::new();
    features::write_feature_csv(&rows, &mut body).map_err(|e| e.to_string())?;
    fs::write(&path, body).map_err(|e| e.to_string())?;
    let cfg = PipelineConfig {
        features: Some(path),
        out: dir.path().join("out"),
        ..PipelineConfig::default()
    };
    let results = cli::cmd_stats(&cfg).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();

    for r in &results {
        let want = if shifted.contains(&r.feature) {
            Marker::DoubleStar
        } else {
            Marker::None
        };
        check(r.marker() == Some(want), || {
            format!(
                "{} marked {:?}, planted {want:?}",
                r.feature_name(),
                r.marker()
            )
        })?;
        check(r.n_fake == 500 && r.n_real == 500, || {
            format!("{} group sizes", r.feature_name())
        })?;
    }
    check(dir.path().join("out/stats.csv").exists(), || {
        "stats.csv missing".into()
    })?;
    check(elapsed < Duration::from_secs(10), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "5 planted features **, 5 null features unmarked, {elapsed:.2?}"
    ))
}

fn c4_gradient_check() -> Outcome {
    let eps = 1e-5;
    let mut worst = 0.0f64;
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let (input_dim, hidden, n) = (12, 16, 24);
        let net = Network::<f64>::init(input_dim, hidden, &mut rng);
        let xs: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..input_dim).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        let ys: Vec<f64> = (0..n).map(|i| (i % 3 == 0) as u8 as f64).collect();
        let weights: Vec<f64> = ys
            .iter()
            .map(|&y| if y == 1.0 { 1.5 } else { 0.75 })
            .collect();
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let loss = |m: &Network<f64>| m.loss_and_gradient(&refs, &ys, &weights).0;
        let (_, grad) = net.loss_and_gradient(&refs, &ys, &weights);

        let first_layer = input_dim * hidden + hidden;
        let mut coords: Vec<usize> = (0..first_layer)
            .collect::<Vec<_>>()
            .choose_multiple(&mut rng, 10)
            .copied()
            .collect();
        coords.extend(
            (first_layer..net.param_count())
                .collect::<Vec<_>>()
                .choose_multiple(&mut rng, 10)
                .copied(),
        );
        for i in coords {
            let mut plus = net.clone();
            *plus.param_mut(i) += eps;
            let mut minus = net.clone();
            *minus.param_mut(i) -= eps;
            let fd = (loss(&plus) - loss(&minus)) / (2.0 * eps);
            let scale = grad[i].abs().max(fd.abs());
            let rel = if scale == 0.0 {
                0.0
            } else {
                (grad[i] - fd).abs() / scale
            };
            worst = worst.max(rel);
            check(rel < 1e-5, || {
                format!(
                    "seed {seed} param {i}: analytic {} vs numeric {fd} (rel {rel:e})",
                    grad[i]
                )
            })?;
        }
    }
    Ok(format!(
        "5 seeds x 20 coordinates, worst relative error {worst:.1e}"
    ))
}

fn c5_fusion_gain() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let noise = Normal::new(0.0, 0.3).unwrap();
    let coef = [1.0, -0.8, 0.6, 0.9, -0.7, 0.5, 0.0, 0.4, 0.0, -0.6];
    let norm = coef.iter().map(|c| c * c).sum::<f64>().sqrt();
    let dim = 64;
    let mut rows = Vec::new();
    let mut emb = EmbeddingTable::new(dim);
    for i in 0..2000 {
        let z: Vec<f64> = (0..10).map(|_| rng.sample(StandardNormal)).collect();
        let score =
            z.iter().zip(&coef).map(|(a, b)| a * b).sum::<f64>() / norm + noise.sample(&mut rng);
        let mut fv = FeatureVector::default();
        for f in Feature::ALL {
            let (loc, sd) = FEATURE_SCALE[f.index()];
            fv.set(f, Some(loc + sd * z[f.index()]));
        }
        let id = format!("p{i:04}");
        rows.push(LabeledFeatureRow {
            user_id: id.clone(),
            label: label(score > 0.0),
            features: fv,
        });
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        emb.insert(id, v).map_err(|e| e.to_string())?;
    }
    let config = ExperimentConfig {
        train: TrainConfig {
            seed: 5,
            ..TrainConfig::default()
        },
        ..ExperimentConfig::default()
    };
    let out = classifier::run_experiment(&rows, &emb, &config).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let (b, f) = (out.baseline.f1, out.fusion.f1);
    check(f >= b + 0.05, || {
        format!("fusion F1 {f:.4} vs baseline {b:.4}")
    })?;
    check(f >= 0.85, || format!("fusion F1 {f:.4} below 0.85"))?;
    check(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "baseline F1 {b:.4} (acc {:.4}), fusion F1 {f:.4} (acc {:.4}), {elapsed:.2?}",
        out.baseline.accuracy, out.fusion.accuracy
    ))
}

fn read_outputs(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut files = BTreeMap::new();
    for entry in fs::read_dir(dir).map_err(|e| e.to_string())? {
        let entry = entry.map_err(|e| e.to_string())?;
        let bytes = fs::read(entry.path()).map_err(|e| e.to_string())?;
        files.insert(entry.file_name().to_string_lossy().into_owned(), bytes);
    }
    Ok(files)
}

fn c6_determinism() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let none = cli::Overrides::default();
    let cfg_a = cli::cmd_demo(a.path(), &none).map_err(|e| e.to_string())?;
    let cfg_b = cli::cmd_demo(b.path(), &none).map_err(|e| e.to_string())?;
    let (fa, fb) = (read_outputs(&cfg_a.out)?, read_outputs(&cfg_b.out)?);
    let expected = [
        "labels.csv",
        "features.csv",
        "stats.csv",
        "stats.txt",
        "model_baseline.txt",
        "model_fusion.txt",
        "eval.csv",
        "vectors.csv",
    ];
    for name in expected {
        check(fa.contains_key(name), || format!("{name} not written"))?;
    }
    check(fa.keys().eq(fb.keys()), || "different file sets".into())?;
    for (name, bytes) in &fa {
        check(fb[name] == *bytes, || {
            format!("{name} differs between runs")
        })?;
    }

    // Rerunning a single stage in place must not change its output either.
    cli::cmd_train(&cfg_a).map_err(|e| e.to_string())?;
    cli::cmd_export(&cfg_a).map_err(|e| e.to_string())?;
    let again = read_outputs(&cfg_a.out)?;
    check(again == fa, || "in-place rerun changed outputs".into())?;
    Ok(format!(
        "{} output files byte-identical across runs",
        fa.len()
    ))
}

fn c7_labeling_rule() -> Outcome {
    let hand: Vec<usize> = [(10, 0), (10, 1), (5, 2), (10, 3), (7, 4), (5, 5), (3, 6)]
        .iter()
        .flat_map(|&(n, k)| std::iter::repeat_n(k, n))
        .collect();
    let tweets = corpus::parse_tweets(demo::TWEETS);
    let labels = corpus::parse_news_labels(demo::LABELS, Path::new("labels.csv"))
        .map_err(|e| e.to_string())?;
    check(
        tweets.warnings.is_empty() && labels.warnings.is_empty(),
        || "demo corpus has warnings".into(),
    )?;
    let mut summary = Vec::new();
    for k in [1, 3, 5] {
        let got = corpus::label_spreaders(&tweets.records, &labels.records, k)
            .map_err(|e| e.to_string())?;
        check(got.labels.len() == 50, || {
            format!("{} users labeled", got.labels.len())
        })?;
        for (i, &count) in hand.iter().enumerate() {
            let uid = format!("u{:02}", i + 1);
            let l = got.get(&uid).ok_or_else(|| format!("{uid} unlabeled"))?;
            check(l.fake_share_count == count, || {
                format!("{uid}: count {} vs {count}", l.fake_share_count)
            })?;
            check(l.label == label(count >= k), || {
                format!("{uid} at threshold {k}: {}", l.label)
            })?;
        }
        summary.push(format!(
            "k={k}: {} fake",
            got.labels.iter().filter(|l| l.label.is_fake()).count()
        ));
    }
    Ok(summary.join(", "))
}

fn c8_metric_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for case in 0..25 {
        let mut counts: [usize; 4] = std::array::from_fn(|_| rng.random_range(0..40));
        if case % 5 == 0 {
            counts[0] = 0;
        }
        if counts.iter().sum::<usize>() == 0 {
            counts[2] = 1;
        }
        let [tp, fp, tn, fn_] = counts;
        let mut pairs = Vec::new();
        pairs.extend(std::iter::repeat_n((true, true), tp));
        pairs.extend(std::iter::repeat_n((true, false), fp));
        pairs.extend(std::iter::repeat_n((false, false), tn));
        pairs.extend(std::iter::repeat_n((false, true), fn_));
        pairs.shuffle(&mut rng);
        let preds: Vec<SpreaderClass> = pairs.iter().map(|p| label(p.0)).collect();
        let truth: Vec<SpreaderClass> = pairs.iter().map(|p| label(p.1)).collect();
        let r = classifier::evaluate(&preds, &truth).map_err(|e| e.to_string())?;

        let total = (tp + fp + tn + fn_) as f64;
        let accuracy = (tp + tn) as f64 / total;
        let p = if tp + fp > 0 {
            tp as f64 / (tp + fp) as f64
        } else {
            0.0
        };
        let rc = if tp + fn_ > 0 {
            tp as f64 / (tp + fn_) as f64
        } else {
            0.0
        };
        let f1 = if p + rc > 0.0 {
            2.0 * p * rc / (p + rc)
        } else {
            0.0
        };
        check((r.tp, r.fp, r.tn, r.fn_) == (tp, fp, tn, fn_), || {
            format!("case {case}: counts")
        })?;
        check(r.accuracy == accuracy && r.f1 == f1, || {
            format!(
                "case {case}: got acc {} f1 {}, want {accuracy} {f1}",
                r.accuracy, r.f1
            )
        })?;
    }
    Ok("25 confusion matrices exact".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 lexicon oracle equivalence", c1_lexicon_oracle),
        ("2 statistics oracle", c2_statistics_oracle),
        ("3 group comparison mirror", c3_group_comparison),
        ("4 gradient correctness", c4_gradient_check),
        ("5 fusion vs embedding mirror", c5_fusion_gain),
        ("6 determinism", c6_determinism),
        ("7 labeling rule", c7_labeling_rule),
        ("8 metric identities", c8_metric_identities),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            Err(format!(
                "panicked: {:?}",
                e.downcast_ref::<String>()
                    .map(String::as_str)
                    .or(e.downcast_ref::<&str>().copied())
            ))
        });
        match outcome {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  criterion {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
