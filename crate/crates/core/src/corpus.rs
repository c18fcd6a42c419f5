//! Corpus loading, spreader labeling and per-user documents.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TweetRecord {
    pub tweet_id: String,
    pub user_id: String,
    pub text: String,
    pub created_at: DateTime<Utc>,
    pub retweet_count: u64,
    pub like_count: u64,
    /// Story shared by this post, if any.
    #[serde(default)]
    pub news_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserRecord {
    pub user_id: String,
    pub followers_count: u64,
    pub followees_count: u64,
    pub statuses_count: u64,
    pub account_created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Veracity {
    Fake,
    Real,
}

impl FromStr for Veracity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fake" => Ok(Veracity::Fake),
            "real" => Ok(Veracity::Real),
            other => Err(format!("unknown veracity `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewsLabel {
    pub news_id: String,
    pub veracity: Veracity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpreaderClass {
    FakeSpreader,
    RealSpreader,
}

impl SpreaderClass {
    pub fn as_str(self) -> &'static str {
        match self {
            SpreaderClass::FakeSpreader => "fake",
            SpreaderClass::RealSpreader => "real",
        }
    }

    pub fn is_fake(self) -> bool {
        self == SpreaderClass::FakeSpreader
    }
}

impl fmt::Display for SpreaderClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SpreaderClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fake" | "fakespreader" => Ok(SpreaderClass::FakeSpreader),
            "real" | "realspreader" => Ok(SpreaderClass::RealSpreader),
            other => Err(format!("unknown spreader label `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpreaderLabel {
    pub user_id: String,
    pub label: SpreaderClass,
    /// Number of distinct fake stories the user shared.
    pub fake_share_count: usize,
}

/// Recent posts of one user, most recent first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserDocument {
    pub user_id: String,
    pub tweets: Vec<TweetRecord>,
    pub word_count: usize,
}

impl UserDocument {
    pub fn text(&self) -> String {
        let texts: Vec<&str> = self.tweets.iter().map(|t| t.text.as_str()).collect();
        texts.join("\n")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadWarning {
    /// 1-based line number in the source file.
    pub line: usize,
    pub message: String,
}

/// Records loaded from one file plus the tally of skipped or replaced lines.
#[derive(Debug, Clone)]
pub struct Loaded<T> {
    pub records: Vec<T>,
    pub warnings: Vec<LoadWarning>,
}

impl<T> Loaded<T> {
    pub fn warning_count(&self) -> usize {
        self.warnings.len()
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Parses newline-delimited tweet JSON. Later lines repeating a `tweet_id`
/// are skipped with a warning.
pub fn parse_tweets(text: &str) -> Loaded<TweetRecord> {
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<TweetRecord>(line) {
            Ok(rec) => {
                if seen.insert(rec.tweet_id.clone()) {
                    records.push(rec);
                } else {
                    warnings.push(LoadWarning {
                        line: idx + 1,
                        message: format!("duplicate tweet_id `{}` skipped", rec.tweet_id),
                    });
                }
            }
            Err(e) => warnings.push(LoadWarning {
                line: idx + 1,
                message: format!("malformed tweet: {e}"),
            }),
        }
    }
    Loaded { records, warnings }
}

pub fn load_tweets(path: impl AsRef<Path>) -> Result<Loaded<TweetRecord>> {
    Ok(parse_tweets(&read_text(path.as_ref())?))
}

/// Parses newline-delimited user JSON. A repeated `user_id` replaces the
/// earlier record in place and is counted as a warning.
pub fn parse_users(text: &str) -> Loaded<UserRecord> {
    let mut records: Vec<UserRecord> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut warnings = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<UserRecord>(line) {
            Ok(rec) => match index.get(&rec.user_id) {
                Some(&pos) => {
                    warnings.push(LoadWarning {
                        line: idx + 1,
                        message: format!("duplicate user_id `{}`, later line wins", rec.user_id),
                    });
                    records[pos] = rec;
                }
                None => {
                    index.insert(rec.user_id.clone(), records.len());
                    records.push(rec);
                }
            },
            Err(e) => warnings.push(LoadWarning {
                line: idx + 1,
                message: format!("malformed user: {e}"),
            }),
        }
    }
    Loaded { records, warnings }
}

pub fn load_users(path: impl AsRef<Path>) -> Result<Loaded<UserRecord>> {
    Ok(parse_users(&read_text(path.as_ref())?))
}

/// Parses the `news_id,veracity` CSV. `origin` only labels errors.
pub fn parse_news_labels(text: &str, origin: &Path) -> Result<Loaded<NewsLabel>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = reader.records();

    let header_ok = match rows.next() {
        Some(Ok(h)) => {
            h.len() == 2
                && h[0].eq_ignore_ascii_case("news_id")
                && h[1].eq_ignore_ascii_case("veracity")
        }
        _ => false,
    };
    if !header_ok {
        return Err(Error::bad_input(
            origin,
            "missing header `news_id,veracity`",
        ));
    }

    let mut records: Vec<NewsLabel> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut warnings = Vec::new();
    for row in rows {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        if row.len() != 2 || row[0].is_empty() {
            warnings.push(LoadWarning {
                line,
                message: "expected two fields `news_id,veracity`".into(),
            });
            continue;
        }
        let veracity = match row[1].parse::<Veracity>() {
            Ok(v) => v,
            Err(message) => {
                warnings.push(LoadWarning { line, message });
                continue;
            }
        };
        let label = NewsLabel {
            news_id: row[0].to_string(),
            veracity,
        };
        match index.get(&label.news_id) {
            Some(&pos) => {
                warnings.push(LoadWarning {
                    line,
                    message: format!("duplicate news_id `{}`, later row wins", label.news_id),
                });
                records[pos] = label;
            }
            None => {
                index.insert(label.news_id.clone(), records.len());
                records.push(label);
            }
        }
    }
    Ok(Loaded { records, warnings })
}

pub fn load_news_labels(path: impl AsRef<Path>) -> Result<Loaded<NewsLabel>> {
    let path = path.as_ref();
    parse_news_labels(&read_text(path)?, path)
}

/// Result of [`label_spreaders`].
#[derive(Debug, Clone)]
pub struct Labeling {
    /// One label per user seen in the tweets, sorted by `user_id`.
    pub labels: Vec<SpreaderLabel>,
    /// Tweets whose `news_id` has no veracity label.
    pub unknown_news_refs: usize,
}

impl Labeling {
    pub fn get(&self, user_id: &str) -> Option<&SpreaderLabel> {
        self.labels
            .binary_search_by(|l| l.user_id.as_str().cmp(user_id))
            .ok()
            .map(|i| &self.labels[i])
    }
}

pub const DEFAULT_SPREADER_THRESHOLD: usize = 3;

/// Tags each user as a fake-news spreader when they shared at least
/// `threshold` distinct fake stories, otherwise as a real-news spreader.
pub fn label_spreaders(
    tweets: &[TweetRecord],
    labels: &[NewsLabel],
    threshold: usize,
) -> Result<Labeling> {
    if threshold == 0 {
        return Err(Error::InvalidArgument(
            "spreader threshold must be >= 1".into(),
        ));
    }
    let veracity: HashMap<&str, Veracity> = labels
        .iter()
        .map(|l| (l.news_id.as_str(), l.veracity))
        .collect();

    let mut fake_stories: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut unknown_news_refs = 0;
    for tweet in tweets {
        let stories = fake_stories.entry(tweet.user_id.as_str()).or_default();
        if let Some(news_id) = tweet.news_id.as_deref() {
            match veracity.get(news_id) {
                Some(Veracity::Fake) => {
                    stories.insert(news_id);
                }
                Some(Veracity::Real) => {}
                None => unknown_news_refs += 1,
            }
        }
    }

    let labels = fake_stories
        .into_iter()
        .map(|(user_id, stories)| {
            let fake_share_count = stories.len();
            SpreaderLabel {
                user_id: user_id.to_string(),
                label: if fake_share_count >= threshold {
                    SpreaderClass::FakeSpreader
                } else {
                    SpreaderClass::RealSpreader
                },
                fake_share_count,
            }
        })
        .collect();
    Ok(Labeling {
        labels,
        unknown_news_refs,
    })
}

pub const DEFAULT_TARGET_WORDS: usize = 150;

pub fn whitespace_word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Groups tweets by user, newest first (ties broken by `tweet_id`).
pub fn tweets_by_user(tweets: &[TweetRecord]) -> BTreeMap<&str, Vec<&TweetRecord>> {
    let mut by_user: BTreeMap<&str, Vec<&TweetRecord>> = BTreeMap::new();
    for t in tweets {
        by_user.entry(t.user_id.as_str()).or_default().push(t);
    }
    for list in by_user.values_mut() {
        list.sort_by(|a, b| {
            b.created_at
                .cmp(&a.created_at)
                .then_with(|| a.tweet_id.cmp(&b.tweet_id))
        });
    }
    by_user
}

/// Builds one document per user from their most recent tweets, stopping at
/// the tweet that brings the whitespace word count to `target_words`.
pub fn build_documents(tweets: &[TweetRecord], target_words: usize) -> Result<Vec<UserDocument>> {
    if target_words == 0 {
        return Err(Error::InvalidArgument("target_words must be >= 1".into()));
    }
    let docs = tweets_by_user(tweets)
        .into_iter()
        .map(|(user_id, list)| {
            let mut word_count = 0;
            let mut included = Vec::new();
            for t in list {
                if word_count >= target_words {
                    break;
                }
                word_count += whitespace_word_count(&t.text);
                included.push(t.clone());
            }
            UserDocument {
                user_id: user_id.to_string(),
                tweets: included,
                word_count,
            }
        })
        .collect();
    Ok(docs)
}
