//! Embedding plus feature fusion classifier.
//!
//! Each user is represented by an embedding `h_b` (read from a file or
//! computed by [`baseline_embed`]) and the z-scored feature vector `h_f`.
//! The fusion model sees `h = h_b ++ h_f`; the paired baseline sees `h_b`
//! alone. Both are one-hidden-layer ReLU networks with a sigmoid output,
//! trained by mini-batch gradient descent on (optionally class-weighted)
//! binary cross-entropy.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{SpreaderClass, UserDocument};
use crate::error::{Error, Result};
use crate::features::{FeatureVector, LabeledFeatureRow, FEATURE_COUNT};
use crate::lexicon::tokenize;
use crate::scalar::Scalar;

pub const DEFAULT_EMBED_DIM: usize = 256;
pub const DEFAULT_HIDDEN: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable<T> {
    pub dim: usize,
    pub vectors: BTreeMap<String, Vec<T>>,
}

impl<T: Scalar> EmbeddingTable<T> {
    pub fn new(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            vectors: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, user_id: impl Into<String>, v: Vec<T>) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("embedding entry".into()));
        }
        self.vectors.insert(user_id.into(), v);
        Ok(())
    }

    pub fn get(&self, user_id: &str) -> Option<&[T]> {
        self.vectors.get(user_id).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Parses `user_id,v1,...,vd` rows. A first row whose value columns are all
/// non-numeric is taken as a header.
pub fn parse_embeddings<T: Scalar + FromStr>(
    text: &str,
    origin: &Path,
) -> Result<EmbeddingTable<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut table: Option<EmbeddingTable<T>> = None;
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(i as u64 + 1, |p| p.line());
        let bad = |msg: String| Error::bad_input(origin, format!("line {line}: {msg}"));
        if rec.len() < 2 {
            return Err(bad("expected user_id and at least one value".into()));
        }
        let values: Vec<std::result::Result<T, _>> =
            rec.iter().skip(1).map(str::parse::<T>).collect();
        if i == 0 && values.iter().all(|v| v.is_err()) {
            continue;
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(c, v)| v.map_err(|_| bad(format!("column {} is not a number", c + 2))))
            .collect::<Result<Vec<T>>>()?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(bad("non-finite embedding value".into()));
        }
        let table = table.get_or_insert_with(|| EmbeddingTable::new(values.len()));
        if values.len() != table.dim {
            return Err(bad(format!(
                "row has {} values, expected {}",
                values.len(),
                table.dim
            )));
        }
        if table.vectors.contains_key(&rec[0]) {
            return Err(bad(format!("duplicate user `{}`", &rec[0])));
        }
        table.vectors.insert(rec[0].to_string(), values);
    }
    table.ok_or_else(|| Error::bad_input(origin, "no embedding rows"))
}

pub fn load_embeddings<T: Scalar + FromStr>(path: impl AsRef<Path>) -> Result<EmbeddingTable<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_embeddings(&text, path)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0100_0000_01b3;
    bytes
        .iter()
        .fold(OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(PRIME))
}

/// Signed hashed term-frequency vector of the document tokens, L2
/// normalized. Documents without tokens map to the zero vector.
pub fn baseline_embed<T: Scalar>(doc: &UserDocument, dim: usize) -> Vec<T> {
    assert!(dim >= 1, "embedding dim must be positive");
    let mut v = vec![T::zero(); dim];
    for tweet in &doc.tweets {
        for token in tokenize(&tweet.text).iter() {
            let h = fnv1a(token.as_bytes());
            let bucket = (h % dim as u64) as usize;
            if h >> 63 == 0 {
                v[bucket] = v[bucket] + T::one();
            } else {
                v[bucket] = v[bucket] - T::one();
            }
        }
    }
    let norm = v.iter().map(|&x| x * x).sum::<T>().sqrt();
    if norm > T::zero() {
        for x in &mut v {
            *x = *x / norm;
        }
    }
    v
}

pub fn baseline_embeddings<T: Scalar>(docs: &[UserDocument], dim: usize) -> EmbeddingTable<T> {
    EmbeddingTable {
        dim,
        vectors: docs
            .iter()
            .map(|d| (d.user_id.clone(), baseline_embed(d, dim)))
            .collect(),
    }
}

/// Network input for one user: `h = h_b ++ h_f`.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionInput<T> {
    pub h_b: Vec<T>,
    pub h_f: [T; FEATURE_COUNT],
}

impl<T: Scalar> FusionInput<T> {
    pub fn h(&self) -> Vec<T> {
        let mut h = Vec::with_capacity(self.h_b.len() + FEATURE_COUNT);
        h.extend_from_slice(&self.h_b);
        h.extend_from_slice(&self.h_f);
        h
    }
}

/// Per-feature z-score parameters fitted on the training split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormParams<T> {
    pub mean: [T; FEATURE_COUNT],
    pub std: [T; FEATURE_COUNT],
}

impl<T: Scalar> NormParams<T> {
    /// Population mean and standard deviation over unmasked values. A
    /// feature with no values or zero spread gets std 1.
    pub fn fit<'a>(rows: impl IntoIterator<Item = &'a FeatureVector<T>>) -> Self {
        let rows: Vec<&FeatureVector<T>> = rows.into_iter().collect();
        let mut mean = [T::zero(); FEATURE_COUNT];
        let mut std = [T::one(); FEATURE_COUNT];
        for i in 0..FEATURE_COUNT {
            let xs: Vec<T> = rows
                .iter()
                .filter(|r| !r.missing[i])
                .map(|r| r.values[i])
                .collect();
            if xs.is_empty() {
                continue;
            }
            let n = T::from_count(xs.len());
            let m = xs.iter().copied().sum::<T>() / n;
            let var = xs.iter().map(|&x| (x - m) * (x - m)).sum::<T>() / n;
            let s = var.sqrt();
            mean[i] = m;
            if s > T::zero() && s.is_finite() {
                std[i] = s;
            }
        }
        NormParams { mean, std }
    }

    /// Masked entries take the training mean, hence 0.
    pub fn apply(&self, fv: &FeatureVector<T>) -> [T; FEATURE_COUNT] {
        std::array::from_fn(|i| {
            let v = if fv.missing[i] {
                self.mean[i]
            } else {
                fv.values[i]
            };
            (v - self.mean[i]) / self.std[i]
        })
    }
}

/// Fits z-score parameters on the rows whose `user_id` is in
/// `training_ids` and applies them to every row.
pub fn normalize_features<T: Scalar>(
    rows: &[LabeledFeatureRow<T>],
    training_ids: &HashSet<&str>,
) -> Result<(Vec<[T; FEATURE_COUNT]>, NormParams<T>)> {
    if training_ids.is_empty() {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    let params = NormParams::fit(
        rows.iter()
            .filter(|r| training_ids.contains(r.user_id.as_str()))
            .map(|r| &r.features),
    );
    let normalized = rows.iter().map(|r| params.apply(&r.features)).collect();
    Ok((normalized, params))
}

/// Indices into the labeled collection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified shuffle split. Each class keeps `round(ratio * n)` rows for
/// training, clamped so both sides get at least one.
pub fn split(labels: &[SpreaderClass], ratio: f64, seed: u64) -> Result<Split> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "split ratio {ratio} outside (0,1)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [SpreaderClass::FakeSpreader, SpreaderClass::RealSpreader] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "class `{class}` has {} rows, need at least 2",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        let k = ((ratio * idx.len() as f64).round() as usize).clamp(1, idx.len() - 1);
        train.extend_from_slice(&idx[..k]);
        test.extend_from_slice(&idx[k..]);
    }
    train.shuffle(&mut rng);
    test.shuffle(&mut rng);
    Ok(Split { train, test })
}

/// `input -> hidden (ReLU) -> 1 (sigmoid)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    pub input_dim: usize,
    pub hidden: usize,
    /// Row-major `hidden x input_dim`.
    pub w1: Vec<T>,
    pub b1: Vec<T>,
    pub w2: Vec<T>,
    pub b2: T,
}

fn sigmoid<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus<T: Scalar>(z: T) -> T {
    z.max(T::zero()) + (-z.abs()).exp().ln_1p()
}

impl<T: Scalar> Network<T> {
    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        Network {
            input_dim,
            hidden,
            w1: vec![T::zero(); hidden * input_dim],
            b1: vec![T::zero(); hidden],
            w2: vec![T::zero(); hidden],
            b2: T::zero(),
        }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init(input_dim: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        let mut net = Self::zeros(input_dim, hidden);
        let limit1 = (6.0 / (input_dim + hidden) as f64).sqrt();
        for w in &mut net.w1 {
            *w = T::lit(rng.random_range(-limit1..limit1));
        }
        let limit2 = (6.0 / (hidden + 1) as f64).sqrt();
        for w in &mut net.w2 {
            *w = T::lit(rng.random_range(-limit2..limit2));
        }
        net
    }

    pub fn param_count(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + 1
    }

    /// Parameters flattened as `w1, b1, w2, b2`.
    pub fn params(&self) -> Vec<T> {
        let mut p = Vec::with_capacity(self.param_count());
        p.extend_from_slice(&self.w1);
        p.extend_from_slice(&self.b1);
        p.extend_from_slice(&self.w2);
        p.push(self.b2);
        p
    }

    pub fn param_mut(&mut self, mut i: usize) -> &mut T {
        if i < self.w1.len() {
            return &mut self.w1[i];
        }
        i -= self.w1.len();
        if i < self.b1.len() {
            return &mut self.b1[i];
        }
        i -= self.b1.len();
        if i < self.w2.len() {
            return &mut self.w2[i];
        }
        assert_eq!(i, self.w2.len(), "parameter index out of range");
        &mut self.b2
    }

    fn hidden_pre(&self, x: &[T], z1: &mut [T]) {
        for (j, z) in z1.iter_mut().enumerate() {
            let row = &self.w1[j * self.input_dim..(j + 1) * self.input_dim];
            *z = row
                .iter()
                .zip(x)
                .fold(self.b1[j], |acc, (&w, &xi)| acc + w * xi);
        }
    }

    pub fn logit(&self, x: &[T]) -> Result<T> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        let mut z1 = vec![T::zero(); self.hidden];
        self.hidden_pre(x, &mut z1);
        Ok(z1
            .iter()
            .zip(&self.w2)
            .fold(self.b2, |acc, (&z, &w)| acc + w * z.max(T::zero())))
    }

    /// Output probability, kept inside the open interval (0, 1).
    pub fn predict(&self, x: &[T]) -> Result<T> {
        let p = sigmoid(self.logit(x)?);
        Ok(p.max(T::epsilon()).min(T::one() - T::epsilon()))
    }

    /// Mean weighted cross-entropy over the batch and its gradient, laid out
    /// like [`Network::params`].
    pub fn loss_and_gradient(&self, xs: &[&[T]], ys: &[T], weights: &[T]) -> (T, Vec<T>) {
        let n_w1 = self.w1.len();
        let n_b1 = self.b1.len();
        let n_w2 = self.w2.len();
        let mut grad = vec![T::zero(); self.param_count()];
        let mut loss = T::zero();
        let batch = T::from_count(xs.len());
        let mut z1 = vec![T::zero(); self.hidden];
        for ((x, &y), &w) in xs.iter().zip(ys).zip(weights) {
            self.hidden_pre(x, &mut z1);
            let z2 = z1
                .iter()
                .zip(&self.w2)
                .fold(self.b2, |acc, (&z, &v)| acc + v * z.max(T::zero()));
            loss = loss + w * (softplus(z2) - y * z2);
            let g = w * (sigmoid(z2) - y) / batch;
            grad[n_w1 + n_b1 + n_w2] = grad[n_w1 + n_b1 + n_w2] + g;
            for j in 0..self.hidden {
                if z1[j] <= T::zero() {
                    continue;
                }
                grad[n_w1 + n_b1 + j] = grad[n_w1 + n_b1 + j] + g * z1[j];
                let dz = g * self.w2[j];
                grad[n_w1 + j] = grad[n_w1 + j] + dz;
                let row = &mut grad[j * self.input_dim..(j + 1) * self.input_dim];
                for (gw, &xi) in row.iter_mut().zip(x.iter()) {
                    *gw = *gw + dz * xi;
                }
            }
        }
        (loss / batch, grad)
    }

    fn step(&mut self, grad: &[T], lr: T) {
        for (i, &g) in grad.iter().enumerate() {
            let p = self.param_mut(i);
            *p = *p - lr * g;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub class_weighting: bool,
    pub hidden: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            batch_size: 32,
            learning_rate: 0.01,
            seed: 0,
            class_weighting: false,
            hidden: DEFAULT_HIDDEN,
        }
    }
}

fn target<T: Scalar>(label: SpreaderClass) -> T {
    if label.is_fake() {
        T::one()
    } else {
        T::zero()
    }
}

/// Inverse class frequency weights `n / (2 n_c)`, or all ones.
pub fn class_weights<T: Scalar>(labels: &[SpreaderClass], enabled: bool) -> Vec<T> {
    if !enabled {
        return vec![T::one(); labels.len()];
    }
    let n_fake = labels.iter().filter(|l| l.is_fake()).count();
    let n_real = labels.len() - n_fake;
    let n = T::from_count(labels.len());
    let w_fake = n / (T::lit(2.0) * T::from_count(n_fake.max(1)));
    let w_real = n / (T::lit(2.0) * T::from_count(n_real.max(1)));
    labels
        .iter()
        .map(|l| if l.is_fake() { w_fake } else { w_real })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trained<T> {
    pub network: Network<T>,
    /// Full-set loss at initialization, then after each epoch.
    pub loss_history: Vec<T>,
}

/// Mini-batch gradient descent from a seeded Glorot initialization.
pub fn train<T: Scalar>(
    inputs: &[Vec<T>],
    labels: &[SpreaderClass],
    config: &TrainConfig,
) -> Result<Trained<T>> {
    if inputs.len() != labels.len() {
        return Err(Error::InvalidArgument(
            "inputs and labels differ in length".into(),
        ));
    }
    if !labels.iter().any(|l| l.is_fake()) || labels.iter().all(|l| l.is_fake()) {
        return Err(Error::InvalidArgument("training needs both classes".into()));
    }
    if config.batch_size == 0 || config.hidden == 0 {
        return Err(Error::InvalidArgument(
            "batch size and hidden width must be positive".into(),
        ));
    }
    let input_dim = inputs[0].len();
    if let Some(bad) = inputs.iter().find(|x| x.len() != input_dim) {
        return Err(Error::DimensionMismatch {
            expected: input_dim,
            got: bad.len(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut network = Network::init(input_dim, config.hidden, &mut rng);
    let ys: Vec<T> = labels.iter().map(|&l| target(l)).collect();
    let weights = class_weights::<T>(labels, config.class_weighting);
    let lr = T::lit(config.learning_rate);
    let all: Vec<&[T]> = inputs.iter().map(Vec::as_slice).collect();

    let full_loss = |net: &Network<T>, epoch: usize| -> Result<T> {
        let (loss, _) = net.loss_and_gradient(&all, &ys, &weights);
        if loss.is_finite() {
            Ok(loss)
        } else {
            Err(Error::Diverged {
                epoch,
                loss: loss.to_f64_lossy(),
            })
        }
    };

    let mut loss_history = vec![full_loss(&network, 0)?];
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size) {
            let xs: Vec<&[T]> = chunk.iter().map(|&i| all[i]).collect();
            let by: Vec<T> = chunk.iter().map(|&i| ys[i]).collect();
            let bw: Vec<T> = chunk.iter().map(|&i| weights[i]).collect();
            let (_, grad) = network.loss_and_gradient(&xs, &by, &bw);
            network.step(&grad, lr);
        }
        loss_history.push(full_loss(&network, epoch)?);
    }
    Ok(Trained {
        network,
        loss_history,
    })
}

/// Trained network plus what is needed to rebuild its inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionModel<T> {
    pub embedding_dim: usize,
    /// `None` for the embedding-only baseline.
    pub norm: Option<NormParams<T>>,
    pub seed: u64,
    pub network: Network<T>,
}

pub const MODEL_FORMAT: &str = "spreadprof-model 1";

impl<T: Scalar> FusionModel<T> {
    pub fn with_features(&self) -> bool {
        self.norm.is_some()
    }

    pub fn input_dim(&self) -> usize {
        self.embedding_dim
            + if self.with_features() {
                FEATURE_COUNT
            } else {
                0
            }
    }

    /// Builds the network input for one user.
    pub fn input_for(&self, h_b: &[T], features: &FeatureVector<T>) -> Vec<T> {
        match &self.norm {
            Some(norm) => FusionInput {
                h_b: h_b.to_vec(),
                h_f: norm.apply(features),
            }
            .h(),
            None => h_b.to_vec(),
        }
    }

    pub fn predict(&self, input: &[T]) -> Result<T> {
        self.network.predict(input)
    }

    pub fn classify(&self, input: &[T]) -> Result<SpreaderClass> {
        Ok(classify(self.predict(input)?))
    }

    /// Text dump; floats use shortest round-trip formatting so reading it
    /// back gives identical bits.
    pub fn to_text(&self) -> String {
        fn line<T: Scalar>(out: &mut String, key: &str, vals: &[T]) {
            out.push_str(key);
            for v in vals {
                let _ = write!(out, " {}", v.to_f64_lossy());
            }
            out.push('\n');
        }
        let mut out = String::new();
        let _ = writeln!(out, "{MODEL_FORMAT}");
        let _ = writeln!(out, "embedding_dim {}", self.embedding_dim);
        let _ = writeln!(out, "with_features {}", u8::from(self.with_features()));
        let _ = writeln!(out, "hidden {}", self.network.hidden);
        let _ = writeln!(out, "seed {}", self.seed);
        if let Some(norm) = &self.norm {
            line(&mut out, "norm_mean", &norm.mean);
            line(&mut out, "norm_std", &norm.std);
        }
        line(&mut out, "w1", &self.network.w1);
        line(&mut out, "b1", &self.network.b1);
        line(&mut out, "w2", &self.network.w2);
        line(&mut out, "b2", &[self.network.b2]);
        out
    }

    pub fn from_text(text: &str, origin: &Path) -> Result<Self> {
        let bad = |msg: String| Error::bad_input(origin, msg);
        let mut lines = text.lines();
        if lines.next() != Some(MODEL_FORMAT) {
            return Err(bad(format!("expected `{MODEL_FORMAT}` header")));
        }
        let mut fields: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for l in lines {
            let mut parts = l.split_ascii_whitespace();
            if let Some(key) = parts.next() {
                fields.insert(key, parts.collect());
            }
        }
        let scalar = |key: &str| -> Result<u64> {
            fields
                .get(key)
                .and_then(|v| v.first())
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad(format!("missing or bad `{key}`")))
        };
        let floats = |key: &str, len: usize| -> Result<Vec<T>> {
            let raw = fields
                .get(key)
                .ok_or_else(|| bad(format!("missing `{key}`")))?;
            if raw.len() != len {
                return Err(bad(format!(
                    "`{key}` has {} values, expected {len}",
                    raw.len()
                )));
            }
            raw.iter()
                .map(|s| {
                    s.parse::<f64>()
                        .map(T::lit)
                        .map_err(|_| bad(format!("bad number `{s}` in `{key}`")))
                })
                .collect()
        };
        let embedding_dim = scalar("embedding_dim")? as usize;
        let with_features = scalar("with_features")? == 1;
        let hidden = scalar("hidden")? as usize;
        let seed = scalar("seed")?;
        let norm = if with_features {
            let mean = floats("norm_mean", FEATURE_COUNT)?;
            let std = floats("norm_std", FEATURE_COUNT)?;
            Some(NormParams {
                mean: mean.try_into().expect("length checked"),
                std: std.try_into().expect("length checked"),
            })
        } else {
            None
        };
        let input_dim = embedding_dim + if with_features { FEATURE_COUNT } else { 0 };
        let network = Network {
            input_dim,
            hidden,
            w1: floats("w1", hidden * input_dim)?,
            b1: floats("b1", hidden)?,
            w2: floats("w2", hidden)?,
            b2: floats("b2", 1)?[0],
        };
        Ok(FusionModel {
            embedding_dim,
            norm,
            seed,
            network,
        })
    }
}

pub fn classify<T: Scalar>(p: T) -> SpreaderClass {
    if p >= T::lit(0.5) {
        SpreaderClass::FakeSpreader
    } else {
        SpreaderClass::RealSpreader
    }
}

/// Accuracy and positive-class F1, with fake-news spreaders as positives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub accuracy: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
    pub positive_class: SpreaderClass,
}

impl EvalReport {
    pub fn from_counts(tp: usize, fp: usize, tn: usize, fn_: usize) -> Result<Self> {
        let total = tp + fp + tn + fn_;
        if total == 0 {
            return Err(Error::InvalidArgument(
                "cannot evaluate zero predictions".into(),
            ));
        }
        let accuracy = (tp + tn) as f64 / total as f64;
        let precision = if tp + fp == 0 {
            0.0
        } else {
            tp as f64 / (tp + fp) as f64
        };
        let recall = if tp + fn_ == 0 {
            0.0
        } else {
            tp as f64 / (tp + fn_) as f64
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Ok(EvalReport {
            accuracy,
            f1,
            tp,
            fp,
            tn,
            fn_,
            positive_class: SpreaderClass::FakeSpreader,
        })
    }
}

pub fn evaluate(preds: &[SpreaderClass], labels: &[SpreaderClass]) -> Result<EvalReport> {
    if preds.len() != labels.len() {
        return Err(Error::InvalidArgument(
            "predictions and labels differ in length".into(),
        ));
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (p, l) in preds.iter().zip(labels) {
        match (p.is_fake(), l.is_fake()) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    EvalReport::from_counts(tp, fp, tn, fn_)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub split_ratio: f64,
    pub train: TrainConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            split_ratio: 0.8,
            train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExportRow<T> {
    pub user_id: String,
    pub label: SpreaderClass,
    pub h: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome<T> {
    pub baseline: EvalReport,
    pub fusion: EvalReport,
    pub baseline_model: FusionModel<T>,
    pub fusion_model: FusionModel<T>,
    pub baseline_loss: Vec<T>,
    pub fusion_loss: Vec<T>,
    /// Rows (after dropping users without an embedding) the split indexes.
    pub users: Vec<String>,
    pub split: Split,
    /// Fusion input `h` for every retained user.
    pub vectors: Vec<ExportRow<T>>,
    /// Users without an embedding.
    pub dropped: Vec<String>,
}

/// A feature row with its user's embedding.
pub type Joined<'a, T> = (&'a LabeledFeatureRow<T>, &'a [T]);

/// Training rows paired with their embeddings; users without an embedding
/// are returned separately.
pub fn join_embeddings<'a, T: Scalar>(
    rows: &'a [LabeledFeatureRow<T>],
    embeddings: &'a EmbeddingTable<T>,
) -> (Vec<Joined<'a, T>>, Vec<String>) {
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for r in rows {
        match embeddings.get(&r.user_id) {
            Some(e) => kept.push((r, e)),
            None => dropped.push(r.user_id.clone()),
        }
    }
    (kept, dropped)
}

/// Trains the embedding-only and the embedding+features model on the same
/// split and seed and evaluates both on the held-out users.
pub fn run_experiment<T: Scalar>(
    rows: &[LabeledFeatureRow<T>],
    embeddings: &EmbeddingTable<T>,
    config: &ExperimentConfig,
) -> Result<ExperimentOutcome<T>> {
    let (kept, dropped) = join_embeddings(rows, embeddings);
    let labels: Vec<SpreaderClass> = kept.iter().map(|(r, _)| r.label).collect();
    let split = split(&labels, config.split_ratio, config.train.seed)?;

    let norm = NormParams::fit(split.train.iter().map(|&i| &kept[i].0.features));
    let seed = config.train.seed;
    let mut baseline_model = FusionModel {
        embedding_dim: embeddings.dim,
        norm: None,
        seed,
        network: Network::zeros(embeddings.dim, config.train.hidden),
    };
    let mut fusion_model = FusionModel {
        norm: Some(norm),
        ..baseline_model.clone()
    };

    let inputs = |model: &FusionModel<T>| -> Vec<Vec<T>> {
        kept.iter()
            .map(|(r, e)| model.input_for(e, &r.features))
            .collect()
    };
    let baseline_inputs = inputs(&baseline_model);
    let fusion_inputs = inputs(&fusion_model);

    let pick = |xs: &[Vec<T>], idx: &[usize]| -> Vec<Vec<T>> {
        idx.iter().map(|&i| xs[i].clone()).collect()
    };
    let train_labels: Vec<SpreaderClass> = split.train.iter().map(|&i| labels[i]).collect();
    let test_labels: Vec<SpreaderClass> = split.test.iter().map(|&i| labels[i]).collect();

    let base_trained = train(
        &pick(&baseline_inputs, &split.train),
        &train_labels,
        &config.train,
    )?;
    baseline_model.network = base_trained.network;
    let fusion_trained = train(
        &pick(&fusion_inputs, &split.train),
        &train_labels,
        &config.train,
    )?;
    fusion_model.network = fusion_trained.network;

    let eval = |model: &FusionModel<T>, xs: &[Vec<T>]| -> Result<EvalReport> {
        let preds = split
            .test
            .iter()
            .map(|&i| model.classify(&xs[i]))
            .collect::<Result<Vec<_>>>()?;
        evaluate(&preds, &test_labels)
    };
    let baseline = eval(&baseline_model, &baseline_inputs)?;
    let fusion = eval(&fusion_model, &fusion_inputs)?;

    let vectors = kept
        .iter()
        .zip(fusion_inputs)
        .map(|((r, _), h)| ExportRow {
            user_id: r.user_id.clone(),
            label: r.label,
            h,
        })
        .collect();
    Ok(ExperimentOutcome {
        baseline,
        fusion,
        baseline_model,
        fusion_model,
        baseline_loss: base_trained.loss_history,
        fusion_loss: fusion_trained.loss_history,
        users: kept.iter().map(|(r, _)| r.user_id.clone()).collect(),
        split,
        vectors,
        dropped,
    })
}

pub fn write_vectors_csv<T: Scalar, W: Write>(rows: &[ExportRow<T>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let width = rows.first().map_or(0, |r| r.h.len());
    let mut header = vec!["user_id".to_string(), "label".to_string()];
    header.extend((0..width).map(|i| format!("h{i}")));
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.user_id.clone(), r.label.to_string()];
        rec.extend(r.h.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<vector csv>", e))?;
    Ok(())
}
