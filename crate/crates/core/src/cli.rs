//! Command line pipeline: configuration, subcommands and CSV handoffs.
//!
//! Exit codes: 0 success, 1 fatal input error, 2 invalid configuration.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand};

use crate::classifier::{
    self, join_embeddings, split, write_vectors_csv, EmbeddingTable, EvalReport, ExperimentConfig,
    ExportRow, FusionModel, NormParams, TrainConfig,
};
use crate::corpus::{self, Loaded, SpreaderClass};
use crate::error::Error;
use crate::features::{self, LabeledFeatureRow, UserInputs};
use crate::lexicon::CategoryLexicon;
use crate::stats;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(#[from] Error),
    #[error("configuration: {0}")]
    Config(String),
    #[error("{0}")]
    MissingInput(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(Error::InvalidArgument(_)) | CliError::Config(_) => 2,
            CliError::Input(_) | CliError::MissingInput(_) => 1,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub tweets: Option<PathBuf>,
    pub users: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    /// Precomputed feature matrix; when set, stats and training read it
    /// instead of recomputing features from the corpus.
    pub features: Option<PathBuf>,
    pub out: PathBuf,
    pub spreader_threshold: usize,
    pub target_words: usize,
    pub reference_now: Option<DateTime<Utc>>,
    pub split_ratio: f64,
    pub seed: Option<u64>,
    pub hidden: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub class_weighting: bool,
    pub baseline_embed: bool,
    pub embedding_dim: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            tweets: None,
            users: None,
            labels: None,
            lexicon: None,
            embeddings: None,
            features: None,
            out: PathBuf::from("out"),
            spreader_threshold: corpus::DEFAULT_SPREADER_THRESHOLD,
            target_words: corpus::DEFAULT_TARGET_WORDS,
            reference_now: None,
            split_ratio: 0.8,
            seed: None,
            hidden: classifier::DEFAULT_HIDDEN,
            learning_rate: 0.01,
            epochs: 100,
            batch_size: 32,
            class_weighting: false,
            baseline_embed: false,
            embedding_dim: classifier::DEFAULT_EMBED_DIM,
        }
    }
}

fn parse_bool(v: &str) -> Option<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Some(true),
        "false" | "0" | "no" | "off" => Some(false),
        _ => None,
    }
}

impl PipelineConfig {
    /// Parses flat `key = value` text. Relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> CliResult<Self> {
        let mut cfg = PipelineConfig::default();
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {}: expected key=value", i + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(config_err(format!("line {}: duplicate key `{key}`", i + 1)));
            }
            let bad = || config_err(format!("line {}: bad value `{value}` for `{key}`", i + 1));
            let path = || Some(base.join(value));
            let num = |v: &str| v.parse::<usize>().map_err(|_| bad());
            match key {
                "tweets" => cfg.tweets = path(),
                "users" => cfg.users = path(),
                "labels" => cfg.labels = path(),
                "lexicon" => cfg.lexicon = path(),
                "embeddings" => cfg.embeddings = path(),
                "features" => cfg.features = path(),
                "out" => cfg.out = base.join(value),
                "spreader_threshold" => cfg.spreader_threshold = num(value)?,
                "target_words" => cfg.target_words = num(value)?,
                "reference_now" => {
                    cfg.reference_now = Some(
                        DateTime::parse_from_rfc3339(value)
                            .map_err(|_| bad())?
                            .with_timezone(&Utc),
                    )
                }
                "split_ratio" => cfg.split_ratio = value.parse().map_err(|_| bad())?,
                "seed" => cfg.seed = Some(value.parse().map_err(|_| bad())?),
                "hidden" => cfg.hidden = num(value)?,
                "learning_rate" => cfg.learning_rate = value.parse().map_err(|_| bad())?,
                "epochs" => cfg.epochs = num(value)?,
                "batch_size" => cfg.batch_size = num(value)?,
                "class_weighting" => cfg.class_weighting = parse_bool(value).ok_or_else(bad)?,
                "baseline_embed" => cfg.baseline_embed = parse_bool(value).ok_or_else(bad)?,
                "embedding_dim" => cfg.embedding_dim = num(value)?,
                other => return Err(config_err(format!("line {}: unknown key `{other}`", i + 1))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    fn validate(&self) -> CliResult<()> {
        if self.spreader_threshold == 0 {
            return Err(config_err("spreader_threshold must be >= 1"));
        }
        if self.target_words == 0 {
            return Err(config_err("target_words must be >= 1"));
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(config_err("split_ratio must lie in (0,1)"));
        }
        if self.hidden == 0 || self.batch_size == 0 || self.embedding_dim == 0 {
            return Err(config_err(
                "hidden, batch_size and embedding_dim must be positive",
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(config_err("learning_rate must be positive"));
        }
        Ok(())
    }

    fn require<'a>(&self, value: &'a Option<PathBuf>, key: &str) -> CliResult<&'a Path> {
        value
            .as_deref()
            .ok_or_else(|| config_err(format!("`{key}` path is not configured")))
    }

    fn seed(&self) -> CliResult<u64> {
        self.seed
            .ok_or_else(|| config_err("`seed` is required (config key or --seed)"))
    }

    fn now(&self) -> CliResult<DateTime<Utc>> {
        self.reference_now
            .ok_or_else(|| config_err("`reference_now` is required"))
    }

    pub fn experiment(&self) -> CliResult<ExperimentConfig> {
        Ok(ExperimentConfig {
            split_ratio: self.split_ratio,
            train: TrainConfig {
                epochs: self.epochs,
                batch_size: self.batch_size,
                learning_rate: self.learning_rate,
                seed: self.seed()?,
                class_weighting: self.class_weighting,
                hidden: self.hidden,
            },
        })
    }

    fn out_file(&self, name: &str) -> CliResult<PathBuf> {
        fs::create_dir_all(&self.out).map_err(|e| Error::io(&self.out, e))?;
        Ok(self.out.join(name))
    }
}

fn report_warnings<T>(what: &Path, loaded: &Loaded<T>) {
    for w in &loaded.warnings {
        eprintln!("warning: {}:{}: {}", what.display(), w.line, w.message);
    }
}

fn write_file(path: &Path, body: &[u8]) -> CliResult<()> {
    fs::write(path, body).map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn load_lexicon(path: &Path) -> CliResult<CategoryLexicon> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    CategoryLexicon::parse(&text).map_err(|e| Error::bad_input(path, e.to_string()).into())
}

struct Corpus {
    tweets: Vec<corpus::TweetRecord>,
    labels: Vec<corpus::NewsLabel>,
}

fn load_corpus(cfg: &PipelineConfig) -> CliResult<Corpus> {
    let tweets_path = cfg.require(&cfg.tweets, "tweets")?;
    let labels_path = cfg.require(&cfg.labels, "labels")?;
    let tweets = corpus::load_tweets(tweets_path)?;
    report_warnings(tweets_path, &tweets);
    let labels = corpus::load_news_labels(labels_path)?;
    report_warnings(labels_path, &labels);
    Ok(Corpus {
        tweets: tweets.records,
        labels: labels.records,
    })
}

fn labeling(cfg: &PipelineConfig, corpus: &Corpus) -> CliResult<corpus::Labeling> {
    let labeling = corpus::label_spreaders(&corpus.tweets, &corpus.labels, cfg.spreader_threshold)?;
    if labeling.unknown_news_refs > 0 {
        eprintln!(
            "warning: {} tweet(s) reference a story without a veracity label",
            labeling.unknown_news_refs
        );
    }
    Ok(labeling)
}

/// `label`: writes `labels.csv` with `user_id,label,fake_share_count`.
pub fn cmd_label(cfg: &PipelineConfig) -> CliResult<PathBuf> {
    let corpus = load_corpus(cfg)?;
    let labeling = labeling(cfg, &corpus)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["user_id", "label", "fake_share_count"])
        .map_err(Error::from)?;
    for l in &labeling.labels {
        w.write_record([
            l.user_id.as_str(),
            l.label.as_str(),
            &l.fake_share_count.to_string(),
        ])
        .map_err(Error::from)?;
    }
    let body = w.into_inner().map_err(|e| config_err(e.to_string()))?;
    let path = cfg.out_file("labels.csv")?;
    write_file(&path, &body)?;
    let fakes = labeling.labels.iter().filter(|l| l.label.is_fake()).count();
    println!(
        "labeled {} users: {} fake-news spreaders, {} real-news spreaders",
        labeling.labels.len(),
        fakes,
        labeling.labels.len() - fakes
    );
    Ok(path)
}

/// Features for every labeled user, sorted by `user_id`.
pub fn compute_feature_rows(cfg: &PipelineConfig) -> CliResult<Vec<LabeledFeatureRow<f64>>> {
    let now = cfg.now()?;
    let lexicon = load_lexicon(cfg.require(&cfg.lexicon, "lexicon")?)?;
    let corpus = load_corpus(cfg)?;
    let users_path = cfg.require(&cfg.users, "users")?;
    let users = corpus::load_users(users_path)?;
    report_warnings(users_path, &users);

    let labeling = labeling(cfg, &corpus)?;
    let docs = corpus::build_documents(&corpus.tweets, cfg.target_words)?;
    let docs: HashMap<&str, &corpus::UserDocument> =
        docs.iter().map(|d| (d.user_id.as_str(), d)).collect();
    let users: HashMap<&str, &corpus::UserRecord> = users
        .records
        .iter()
        .map(|u| (u.user_id.as_str(), u))
        .collect();
    let by_user = corpus::tweets_by_user(&corpus.tweets);
    let known_news: HashSet<&str> = corpus.labels.iter().map(|l| l.news_id.as_str()).collect();

    let mut rows = Vec::with_capacity(labeling.labels.len());
    for label in &labeling.labels {
        let uid = label.user_id.as_str();
        let tweets = by_user.get(uid).map(Vec::as_slice).unwrap_or(&[]);
        let input = UserInputs {
            user_id: uid,
            label: label.label,
            user: users.get(uid).copied(),
            doc: docs.get(uid).copied(),
            tweets,
        };
        rows.push(features::assemble(input, &lexicon, &known_news, now)?);
    }
    Ok(rows)
}

/// Reads the configured feature matrix, or computes it from the corpus.
pub fn feature_rows(cfg: &PipelineConfig) -> CliResult<Vec<LabeledFeatureRow<f64>>> {
    match &cfg.features {
        Some(path) => {
            let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
            Ok(features::read_feature_csv(file, path)?)
        }
        None => compute_feature_rows(cfg),
    }
}

/// `features`: writes `features.csv`.
pub fn cmd_features(cfg: &PipelineConfig) -> CliResult<PathBuf> {
    let rows = compute_feature_rows(cfg)?;
    let mut body = Vec::new();
    features::write_feature_csv(&rows, &mut body)?;
    let path = cfg.out_file("features.csv")?;
    write_file(&path, &body)?;
    println!(
        "wrote features for {} users to {}",
        rows.len(),
        path.display()
    );
    Ok(path)
}

/// `stats`: writes `stats.csv` and the aligned `stats.txt`.
pub fn cmd_stats(cfg: &PipelineConfig) -> CliResult<Vec<stats::TTestResult<f64>>> {
    let rows = feature_rows(cfg)?;
    let results = stats::significance_table(&rows);
    let mut body = Vec::new();
    stats::write_report_csv(&results, &mut body)?;
    write_file(&cfg.out_file("stats.csv")?, &body)?;
    let table = stats::render_report_table(&results);
    write_file(&cfg.out_file("stats.txt")?, table.as_bytes())?;
    print!("{table}");
    for r in &results {
        if let Err(reason) = &r.outcome {
            eprintln!("warning: {} untestable: {reason}", r.feature_name());
        }
    }
    Ok(results)
}

fn embeddings(cfg: &PipelineConfig) -> CliResult<EmbeddingTable<f64>> {
    if let Some(path) = &cfg.embeddings {
        if !cfg.baseline_embed {
            return Ok(classifier::load_embeddings(path)?);
        }
    }
    if !cfg.baseline_embed {
        return Err(CliError::MissingInput(
            "no `embeddings` file configured; pass --baseline-embed to use hashed term-frequency vectors".into(),
        ));
    }
    let corpus = load_corpus(cfg)?;
    let docs = corpus::build_documents(&corpus.tweets, cfg.target_words)?;
    Ok(classifier::baseline_embeddings(&docs, cfg.embedding_dim))
}

pub const FUSION_MODEL_FILE: &str = "model_fusion.txt";
pub const BASELINE_MODEL_FILE: &str = "model_baseline.txt";

fn print_report(name: &str, r: &EvalReport) {
    println!(
        "{name:<20} accuracy {:.4}  f1 {:.4}  (tp {} fp {} tn {} fn {})",
        r.accuracy, r.f1, r.tp, r.fp, r.tn, r.fn_
    );
}

/// `train`: trains both models and writes their model files.
pub fn cmd_train(cfg: &PipelineConfig) -> CliResult<(EvalReport, EvalReport)> {
    let experiment = cfg.experiment()?;
    let rows = feature_rows(cfg)?;
    let emb = embeddings(cfg)?;
    let outcome = classifier::run_experiment(&rows, &emb, &experiment)?;
    for user in &outcome.dropped {
        eprintln!("warning: user {user} has no embedding and was dropped");
    }
    write_file(
        &cfg.out_file(BASELINE_MODEL_FILE)?,
        outcome.baseline_model.to_text().as_bytes(),
    )?;
    write_file(
        &cfg.out_file(FUSION_MODEL_FILE)?,
        outcome.fusion_model.to_text().as_bytes(),
    )?;
    print_report("embedding", &outcome.baseline);
    print_report("embedding+features", &outcome.fusion);
    Ok((outcome.baseline, outcome.fusion))
}

struct Prepared<'a> {
    kept: Vec<classifier::Joined<'a, f64>>,
    split: classifier::Split,
}

fn prepare<'a>(
    cfg: &PipelineConfig,
    rows: &'a [LabeledFeatureRow<f64>],
    emb: &'a EmbeddingTable<f64>,
) -> CliResult<Prepared<'a>> {
    let (kept, _) = join_embeddings(rows, emb);
    let labels: Vec<SpreaderClass> = kept.iter().map(|(r, _)| r.label).collect();
    let split = split(&labels, cfg.split_ratio, cfg.seed()?)?;
    Ok(Prepared { kept, split })
}

fn load_model(path: &Path) -> CliResult<FusionModel<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(FusionModel::from_text(&text, path)?)
}

/// `eval`: scores the saved models on the held-out split; writes `eval.csv`.
pub fn cmd_eval(cfg: &PipelineConfig) -> CliResult<(EvalReport, EvalReport)> {
    let seed = cfg.seed()?;
    let baseline = load_model(&cfg.out.join(BASELINE_MODEL_FILE))?;
    let fusion = load_model(&cfg.out.join(FUSION_MODEL_FILE))?;
    for m in [&baseline, &fusion] {
        if m.seed != seed {
            return Err(config_err(format!(
                "model was trained with seed {} but the configured seed is {seed}",
                m.seed
            )));
        }
    }
    let rows = feature_rows(cfg)?;
    let emb = embeddings(cfg)?;
    if emb.dim != baseline.embedding_dim || emb.dim != fusion.embedding_dim {
        return Err(config_err(
            "embedding width differs from the trained models",
        ));
    }
    let prep = prepare(cfg, &rows, &emb)?;
    let truth: Vec<SpreaderClass> = prep
        .split
        .test
        .iter()
        .map(|&i| prep.kept[i].0.label)
        .collect();
    let score = |model: &FusionModel<f64>| -> CliResult<EvalReport> {
        let preds = prep
            .split
            .test
            .iter()
            .map(|&i| {
                let (row, e) = prep.kept[i];
                model.classify(&model.input_for(e, &row.features))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(classifier::evaluate(&preds, &truth)?)
    };
    let base_report = score(&baseline)?;
    let fusion_report = score(&fusion)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["model", "accuracy", "f1", "tp", "fp", "tn", "fn"])
        .map_err(Error::from)?;
    for (name, r) in [
        ("embedding", &base_report),
        ("embedding+features", &fusion_report),
    ] {
        w.write_record([
            name.to_string(),
            r.accuracy.to_string(),
            r.f1.to_string(),
            r.tp.to_string(),
            r.fp.to_string(),
            r.tn.to_string(),
            r.fn_.to_string(),
        ])
        .map_err(Error::from)?;
    }
    let body = w.into_inner().map_err(|e| config_err(e.to_string()))?;
    write_file(&cfg.out_file("eval.csv")?, &body)?;
    print_report("embedding", &base_report);
    print_report("embedding+features", &fusion_report);
    Ok((base_report, fusion_report))
}

/// `export`: writes `vectors.csv` with the fusion input `h` of every user,
/// features normalized with training-split statistics.
pub fn cmd_export(cfg: &PipelineConfig) -> CliResult<PathBuf> {
    let rows = feature_rows(cfg)?;
    let emb = embeddings(cfg)?;
    let prep = prepare(cfg, &rows, &emb)?;
    let norm = NormParams::fit(prep.split.train.iter().map(|&i| &prep.kept[i].0.features));
    let vectors: Vec<ExportRow<f64>> = prep
        .kept
        .iter()
        .map(|(r, e)| ExportRow {
            user_id: r.user_id.clone(),
            label: r.label,
            h: classifier::FusionInput {
                h_b: e.to_vec(),
                h_f: norm.apply(&r.features),
            }
            .h(),
        })
        .collect();
    let mut body = Vec::new();
    write_vectors_csv(&vectors, &mut body)?;
    let path = cfg.out_file("vectors.csv")?;
    write_file(&path, &body)?;
    println!("wrote {} vectors to {}", vectors.len(), path.display());
    Ok(path)
}

/// `demo`: writes the shipped corpus and runs every stage on it.
pub fn cmd_demo(dir: &Path, overrides: &Overrides) -> CliResult<PipelineConfig> {
    let config_path = crate::demo::write_demo(dir)?;
    let mut cfg = PipelineConfig::load(&config_path)?;
    overrides.apply(&mut cfg)?;
    cmd_label(&cfg)?;
    cmd_features(&cfg)?;
    cmd_stats(&cfg)?;
    cmd_train(&cfg)?;
    cmd_eval(&cfg)?;
    cmd_export(&cfg)?;
    Ok(cfg)
}

#[derive(Debug, Parser)]
#[command(
    name = "spreadprof",
    version,
    about = "Profile fake-news spreaders from motivational features"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tag users as fake- or real-news spreaders.
    Label,
    /// Compute the ten motivational features per user.
    Features,
    /// Welch t-tests between the two spreader groups.
    Stats,
    /// Train the embedding-only and embedding+features models.
    Train,
    /// Evaluate the trained models on the held-out split.
    Eval,
    /// Export per-user fusion vectors for external projection.
    Export,
    /// Write the bundled demo corpus to --out and run every stage.
    Demo,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Pipeline configuration file (flat key = value).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Distinct fake stories needed to count as a fake-news spreader.
    #[arg(long, global = true)]
    pub threshold: Option<usize>,
    /// Use hashed term-frequency document vectors instead of an embeddings file.
    #[arg(long, global = true)]
    pub baseline_embed: bool,
    /// Weight the loss by inverse class frequency.
    #[arg(long, global = true)]
    pub class_weights: bool,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut PipelineConfig) -> CliResult<()> {
        if let Some(seed) = self.seed {
            cfg.seed = Some(seed);
        }
        if let Some(t) = self.threshold {
            cfg.spreader_threshold = t;
        }
        if self.baseline_embed {
            cfg.baseline_embed = true;
        }
        if self.class_weights {
            cfg.class_weighting = true;
        }
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        cfg.validate()
    }
}

pub fn dispatch(cli: &Cli) -> CliResult<()> {
    if let Command::Demo = cli.command {
        let dir = cli
            .overrides
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from("demo"));
        let overrides = Overrides {
            out: None,
            ..cli.overrides.clone()
        };
        cmd_demo(&dir, &overrides)?;
        return Ok(());
    }
    let path = cli
        .overrides
        .config
        .as_deref()
        .ok_or_else(|| config_err("--config <path> is required"))?;
    let mut cfg = PipelineConfig::load(path)?;
    cli.overrides.apply(&mut cfg)?;
    match cli.command {
        Command::Label => cmd_label(&cfg).map(drop),
        Command::Features => cmd_features(&cfg).map(drop),
        Command::Stats => cmd_stats(&cfg).map(drop),
        Command::Train => cmd_train(&cfg).map(drop),
        Command::Eval => cmd_eval(&cfg).map(drop),
        Command::Export => cmd_export(&cfg).map(drop),
        Command::Demo => unreachable!(),
    }
}

/// Parses arguments, runs the subcommand and returns the process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Reads `labels.csv` as written by [`cmd_label`].
pub fn read_label_csv(path: &Path) -> CliResult<BTreeMap<String, (SpreaderClass, usize)>> {
    let mut r = csv::Reader::from_path(path).map_err(Error::from)?;
    let mut out = BTreeMap::new();
    for rec in r.records() {
        let rec = rec.map_err(Error::from)?;
        let label = rec[1]
            .parse::<SpreaderClass>()
            .map_err(|m| Error::bad_input(path, m))?;
        let count = rec[2]
            .parse::<usize>()
            .map_err(|_| Error::bad_input(path, "bad fake_share_count"))?;
        out.insert(rec[0].to_string(), (label, count));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parse_defaults_and_paths() {
        let cfg = PipelineConfig::parse(
            "# c\ntweets = t.jsonl\nreference_now = 2020-06-01T00:00:00Z\nseed=7\nclass_weighting = yes\n",
            Path::new("/data"),
        )
        .unwrap();
        assert_eq!(cfg.tweets.as_deref(), Some(Path::new("/data/t.jsonl")));
        assert_eq!(cfg.seed, Some(7));
        assert!(cfg.class_weighting);
        assert_eq!(cfg.spreader_threshold, 3);
        assert_eq!(cfg.target_words, 150);
        assert_eq!(cfg.hidden, 64);
        assert_eq!(cfg.learning_rate, 0.01);
        assert_eq!(cfg.epochs, 100);
        assert_eq!(cfg.batch_size, 32);
        assert_eq!(cfg.embedding_dim, 256);
        assert_eq!(cfg.split_ratio, 0.8);
    }

    #[test]
    fn config_errors_are_exit_two() {
        for bad in [
            "nonsense",
            "colour = blue",
            "seed = x",
            "seed = 1\nseed = 2",
            "spreader_threshold = 0",
            "split_ratio = 1.5",
            "reference_now = yesterday",
        ] {
            let err = PipelineConfig::parse(bad, Path::new(".")).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{bad}");
        }
    }

    #[test]
    fn missing_seed_is_config_error() {
        let cfg = PipelineConfig::default();
        assert_eq!(cfg.experiment().unwrap_err().exit_code(), 2);
    }
}
