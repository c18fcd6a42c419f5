use std::fs;
use std::path::Path;

use spreadprof::cli::{self, PipelineConfig};
use spreadprof::demo;
use spreadprof::features::{self, Feature};

fn demo_config(dir: &Path) -> PipelineConfig {
    PipelineConfig::load(&demo::write_demo(dir).unwrap()).unwrap()
}

#[test]
fn demo_features_match_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = demo_config(dir.path());
    let got = cli::compute_feature_rows(&cfg).unwrap();
    let golden_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/demo/golden_features.csv");
    let golden: Vec<features::LabeledFeatureRow<f64>> =
        features::read_feature_csv(fs::File::open(&golden_path).unwrap(), &golden_path).unwrap();
    assert_eq!(got.len(), golden.len());
    for (g, w) in got.iter().zip(&golden) {
        assert_eq!(g.user_id, w.user_id);
        assert_eq!(g.label, w.label, "{}", g.user_id);
        assert_eq!(g.features.missing, w.features.missing, "{}", g.user_id);
        for f in Feature::ALL {
            let (a, b) = (g.features.values[f.index()], w.features.values[f.index()]);
            assert!(
                (a - b).abs() <= 1e-9 * (1.0 + b.abs()),
                "{} {}: {a} vs {b}",
                g.user_id,
                f.key()
            );
        }
    }
}

#[test]
fn stats_reads_precomputed_features() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = demo_config(dir.path());
    let path = cli::cmd_features(&cfg).unwrap();
    let from_corpus = cli::cmd_stats(&cfg).unwrap();
    cfg.features = Some(path);
    cfg.tweets = None;
    let from_file = cli::cmd_stats(&cfg).unwrap();
    assert_eq!(from_corpus, from_file);
}

#[test]
fn eval_reproduces_training_scores() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = demo_config(dir.path());
    let trained = cli::cmd_train(&cfg).unwrap();
    let evaluated = cli::cmd_eval(&cfg).unwrap();
    assert_eq!(trained, evaluated);
}

#[test]
fn eval_rejects_a_different_seed() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = demo_config(dir.path());
    cli::cmd_train(&cfg).unwrap();
    cfg.seed = Some(7);
    assert_eq!(cli::cmd_eval(&cfg).unwrap_err().exit_code(), 2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let config = demo::write_demo(dir.path()).unwrap();
    let config = config.to_str().unwrap();
    assert_eq!(cli::run(["spreadprof", "label", "--config", config]), 0);
    assert_eq!(cli::run(["spreadprof", "label"]), 2);
    assert_eq!(cli::run(["spreadprof", "bogus"]), 2);
    assert_eq!(
        cli::run([
            "spreadprof",
            "label",
            "--config",
            config,
            "--threshold",
            "0"
        ]),
        2
    );

    let unknown_key = dir.path().join("bad.txt");
    fs::write(&unknown_key, "tweets = tweets.jsonl\nflavour = mint\n").unwrap();
    assert_eq!(
        cli::run([
            "spreadprof",
            "label",
            "--config",
            unknown_key.to_str().unwrap()
        ]),
        2
    );

    let missing_input = dir.path().join("missing.txt");
    fs::write(
        &missing_input,
        "tweets = nowhere.jsonl\nlabels = labels.csv\n",
    )
    .unwrap();
    assert_eq!(
        cli::run([
            "spreadprof",
            "label",
            "--config",
            missing_input.to_str().unwrap()
        ]),
        1
    );

    let broken_labels = dir.path().join("broken.csv");
    fs::write(&broken_labels, "a,b\n").unwrap();
    let cfg = dir.path().join("broken.txt");
    fs::write(&cfg, "tweets = tweets.jsonl\nlabels = broken.csv\n").unwrap();
    assert_eq!(
        cli::run(["spreadprof", "label", "--config", cfg.to_str().unwrap()]),
        1
    );

    let no_embeddings = dir.path().join("noemb.txt");
    fs::write(
        &no_embeddings,
        fs::read_to_string(config)
            .unwrap()
            .replace("baseline_embed = true", "baseline_embed = false"),
    )
    .unwrap();
    assert_eq!(
        cli::run([
            "spreadprof",
            "train",
            "--config",
            no_embeddings.to_str().unwrap()
        ]),
        1
    );
    assert_eq!(
        cli::run([
            "spreadprof",
            "train",
            "--config",
            no_embeddings.to_str().unwrap(),
            "--baseline-embed"
        ]),
        0
    );
}

#[test]
fn malformed_lines_are_skipped_with_warnings() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = demo_config(dir.path());
    let tweets = dir.path().join("tweets.jsonl");
    let mut body = fs::read_to_string(&tweets).unwrap();
    body.push_str("{not json\n{\"tweet_id\":\"z\",\"user_id\":\"u01\",\"text\":\"x\",\"created_at\":\"2020-01-01T00:00:00Z\",\"retweet_count\":-1,\"like_count\":0}\n");
    fs::write(&tweets, body).unwrap();
    cfg.out = dir.path().join("o2");
    let path = cli::cmd_label(&cfg).unwrap();
    let labels = cli::read_label_csv(&path).unwrap();
    assert_eq!(labels.len(), 50);
    assert_eq!(labels.values().filter(|(l, _)| l.is_fake()).count(), 25);
}
