//! Small synthetic corpus shipped with the crate.
//!
//! 50 users, 20 fake and 20 real stories. The number of distinct fake
//! stories each user shared is fixed by construction (see
//! `data/demo/generate.py`); `u50` has no user record and `u01`–`u05` never
//! share a labeled story.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const TWEETS: &str = include_str!("../data/demo/tweets.jsonl");
pub const USERS: &str = include_str!("../data/demo/users.jsonl");
pub const LABELS: &str = include_str!("../data/demo/labels.csv");
pub const LEXICON: &str = include_str!("../data/demo/lexicon.txt");

pub const REFERENCE_NOW: &str = "2020-06-01T00:00:00Z";
pub const SEED: u64 = 42;

/// Writes the corpus and a matching `config.txt` into `dir`; returns the
/// config path.
pub fn write_demo(dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = [
        ("tweets.jsonl", TWEETS),
        ("users.jsonl", USERS),
        ("labels.csv", LABELS),
        ("lexicon.txt", LEXICON),
    ];
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    }
    let config = format!(
        "# demo pipeline configuration
tweets = tweets.jsonl
users = users.jsonl
labels = labels.csv
lexicon = lexicon.txt
out = out
reference_now = {REFERENCE_NOW}
seed = {SEED}
spreader_threshold = 3
target_words = 150
split_ratio = 0.8
baseline_embed = true
embedding_dim = 64
hidden = 64
learning_rate = 0.01
epochs = 100
batch_size = 32
class_weighting = false
"
    );
    let path = dir.join("config.txt");
    fs::write(&path, config).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
