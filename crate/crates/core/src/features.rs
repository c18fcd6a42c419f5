//! The ten per-user motivational features.

use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::{DateTime, Utc};

use crate::corpus::{SpreaderClass, TweetRecord, UserDocument, UserRecord};
use crate::error::{Error, Result};
use crate::lexicon::{category_rate, tokenize, CategoryLexicon};
use crate::scalar::{mean, Scalar};

pub const FEATURE_COUNT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Feature {
    Tentativeness,
    Discrepancy,
    Certainty,
    Anxiety,
    LackOfControl,
    SocialEngagement,
    Influence,
    Popularity,
    BoostRetweets,
    BoostLikes,
}

impl Feature {
    pub const ALL: [Feature; FEATURE_COUNT] = [
        Feature::Tentativeness,
        Feature::Discrepancy,
        Feature::Certainty,
        Feature::Anxiety,
        Feature::LackOfControl,
        Feature::SocialEngagement,
        Feature::Influence,
        Feature::Popularity,
        Feature::BoostRetweets,
        Feature::BoostLikes,
    ];

    /// The five lexicon-backed features.
    pub const LINGUISTIC: [Feature; 5] = [
        Feature::Tentativeness,
        Feature::Discrepancy,
        Feature::Certainty,
        Feature::Anxiety,
        Feature::LackOfControl,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Column key in the feature matrix CSV.
    pub fn key(self) -> &'static str {
        match self {
            Feature::Tentativeness => "tentat",
            Feature::Discrepancy => "discrep",
            Feature::Certainty => "certain",
            Feature::Anxiety => "anx",
            Feature::LackOfControl => "futurefocus",
            Feature::SocialEngagement => "engagement",
            Feature::Influence => "influence",
            Feature::Popularity => "popularity",
            Feature::BoostRetweets => "boost_rt",
            Feature::BoostLikes => "boost_like",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Feature::Tentativeness => "Tentativeness",
            Feature::Discrepancy => "Discrepancy",
            Feature::Certainty => "Certainty",
            Feature::Anxiety => "Anxiety",
            Feature::LackOfControl => "Lack of Control",
            Feature::SocialEngagement => "Social Engagement",
            Feature::Influence => "Influence",
            Feature::Popularity => "Popularity",
            Feature::BoostRetweets => "Boosting #tweets",
            Feature::BoostLikes => "Boosting #likes",
        }
    }

    /// Lexicon category behind a linguistic feature.
    pub fn lexicon_category(self) -> Option<&'static str> {
        Feature::LINGUISTIC.contains(&self).then(|| self.key())
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

/// Feature values in fixed order; masked entries hold 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector<T> {
    pub values: [T; FEATURE_COUNT],
    pub missing: [bool; FEATURE_COUNT],
}

impl<T: Scalar> Default for FeatureVector<T> {
    fn default() -> Self {
        FeatureVector {
            values: [T::zero(); FEATURE_COUNT],
            missing: [false; FEATURE_COUNT],
        }
    }
}

impl<T: Scalar> FeatureVector<T> {
    pub fn get(&self, feature: Feature) -> Option<T> {
        let i = feature.index();
        (!self.missing[i]).then_some(self.values[i])
    }

    pub fn set(&mut self, feature: Feature, value: Option<T>) {
        let i = feature.index();
        match value {
            Some(v) => {
                self.values[i] = v;
                self.missing[i] = false;
            }
            None => {
                self.values[i] = T::zero();
                self.missing[i] = true;
            }
        }
    }

    pub fn mask_string(&self) -> String {
        self.missing
            .iter()
            .map(|&m| if m { '1' } else { '0' })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledFeatureRow<T> {
    pub user_id: String,
    pub label: SpreaderClass,
    pub features: FeatureVector<T>,
}

/// Mean per-tweet category rate over the document for each linguistic
/// feature. A document without tweets yields all `None`.
pub fn linguistic_features<T: Scalar>(
    doc: &UserDocument,
    lexicon: &CategoryLexicon,
) -> Result<[Option<T>; 5]> {
    for f in Feature::LINGUISTIC {
        let cat = f.lexicon_category().expect("linguistic");
        if !lexicon.contains(cat) {
            return Err(Error::UnknownCategory(cat.to_string()));
        }
    }
    if doc.tweets.is_empty() {
        return Ok([None; 5]);
    }
    let token_lists: Vec<_> = doc.tweets.iter().map(|t| tokenize(&t.text)).collect();
    let mut out = [None; 5];
    for (slot, f) in out.iter_mut().zip(Feature::LINGUISTIC) {
        let cat = f.lexicon_category().expect("linguistic");
        let rates = token_lists
            .iter()
            .map(|tokens| category_rate::<T>(tokens, lexicon, cat))
            .collect::<Result<Vec<_>>>()?;
        *slot = mean(&rates);
    }
    Ok(out)
}

/// Statuses per day of account lifetime, with the day count floored at 1.
pub fn social_engagement<T: Scalar>(user: &UserRecord, now: DateTime<Utc>) -> Result<T> {
    if user.account_created_at > now {
        return Err(Error::AccountInFuture {
            user_id: user.user_id.clone(),
        });
    }
    let days = (now - user.account_created_at).num_days().max(1);
    Ok(
        T::from_u64(user.statuses_count).expect("count representable")
            / T::from_i64(days).expect("day count representable"),
    )
}

/// Number of followees.
pub fn influence<T: Scalar>(user: &UserRecord) -> T {
    T::from_u64(user.followees_count).expect("count representable")
}

/// Number of followers.
pub fn popularity<T: Scalar>(user: &UserRecord) -> T {
    T::from_u64(user.followers_count).expect("count representable")
}

/// Mean retweets and likes on news-sharing tweets minus the mean over all of
/// the user's tweets. `None` when the user has no tweets or no news tweets.
pub fn boosting_features<T: Scalar>(
    user_tweets: &[&TweetRecord],
    news_tweet_ids: &HashSet<&str>,
) -> Option<(T, T)> {
    let as_t = |n: u64| T::from_u64(n).expect("count representable");
    let all_rt: Vec<T> = user_tweets.iter().map(|t| as_t(t.retweet_count)).collect();
    let all_like: Vec<T> = user_tweets.iter().map(|t| as_t(t.like_count)).collect();
    let news: Vec<&&TweetRecord> = user_tweets
        .iter()
        .filter(|t| news_tweet_ids.contains(t.tweet_id.as_str()))
        .collect();
    let news_rt: Vec<T> = news.iter().map(|t| as_t(t.retweet_count)).collect();
    let news_like: Vec<T> = news.iter().map(|t| as_t(t.like_count)).collect();
    Some((
        mean(&news_rt)? - mean(&all_rt)?,
        mean(&news_like)? - mean(&all_like)?,
    ))
}

/// Everything [`assemble`] needs about one user.
#[derive(Debug, Clone, Copy)]
pub struct UserInputs<'a> {
    pub user_id: &'a str,
    pub label: SpreaderClass,
    pub user: Option<&'a UserRecord>,
    pub doc: Option<&'a UserDocument>,
    /// All collected tweets of the user.
    pub tweets: &'a [&'a TweetRecord],
}

/// Computes the full feature row for one user. A tweet counts as
/// news-sharing when its `news_id` is one of `known_news`.
pub fn assemble<T: Scalar>(
    input: UserInputs<'_>,
    lexicon: &CategoryLexicon,
    known_news: &HashSet<&str>,
    now: DateTime<Utc>,
) -> Result<LabeledFeatureRow<T>> {
    let mut fv = FeatureVector::default();

    let empty_doc = UserDocument {
        user_id: input.user_id.to_string(),
        tweets: Vec::new(),
        word_count: 0,
    };
    let rates = linguistic_features::<T>(input.doc.unwrap_or(&empty_doc), lexicon)?;
    for (f, r) in Feature::LINGUISTIC.into_iter().zip(rates) {
        fv.set(f, r);
    }

    match input.user {
        Some(user) => {
            fv.set(
                Feature::SocialEngagement,
                Some(social_engagement(user, now)?),
            );
            fv.set(Feature::Influence, Some(influence(user)));
            fv.set(Feature::Popularity, Some(popularity(user)));
        }
        None => {
            fv.set(Feature::SocialEngagement, None);
            fv.set(Feature::Influence, None);
            fv.set(Feature::Popularity, None);
        }
    }

    let news_tweet_ids: HashSet<&str> = input
        .tweets
        .iter()
        .filter(|t| t.news_id.as_deref().is_some_and(|n| known_news.contains(n)))
        .map(|t| t.tweet_id.as_str())
        .collect();
    let boost = boosting_features::<T>(input.tweets, &news_tweet_ids);
    fv.set(Feature::BoostRetweets, boost.map(|b| b.0));
    fv.set(Feature::BoostLikes, boost.map(|b| b.1));

    Ok(LabeledFeatureRow {
        user_id: input.user_id.to_string(),
        label: input.label,
        features: fv,
    })
}

pub fn csv_header() -> Vec<&'static str> {
    let mut h = vec!["user_id", "label"];
    h.extend(Feature::ALL.iter().map(|f| f.key()));
    h.push("mask");
    h
}

pub fn write_feature_csv<T: Scalar, W: Write>(rows: &[LabeledFeatureRow<T>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header())?;
    for row in rows {
        let mut rec = vec![row.user_id.clone(), row.label.to_string()];
        rec.extend(row.features.values.iter().map(|v| v.to_string()));
        rec.push(row.features.mask_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<feature csv>", e))?;
    Ok(())
}

/// Reads a feature matrix written by [`write_feature_csv`].
pub fn read_feature_csv<T: Scalar + FromStr, R: Read>(
    input: R,
    origin: &std::path::Path,
) -> Result<Vec<LabeledFeatureRow<T>>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != csv_header() {
        return Err(Error::bad_input(origin, "feature CSV header mismatch"));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |msg: String| Error::bad_input(origin, format!("line {line}: {msg}"));
        let label = rec[1].parse::<SpreaderClass>().map_err(bad)?;
        let mask = &rec[FEATURE_COUNT + 2];
        if mask.len() != FEATURE_COUNT || !mask.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(bad(format!("bad mask `{mask}`")));
        }
        let mut fv = FeatureVector::<T>::default();
        for (i, f) in Feature::ALL.into_iter().enumerate() {
            let v: T = rec[i + 2]
                .parse()
                .map_err(|_| bad(format!("bad value `{}`", &rec[i + 2])))?;
            let masked = mask.as_bytes()[i] == b'1';
            fv.set(f, (!masked).then_some(v));
        }
        rows.push(LabeledFeatureRow {
            user_id: rec[0].to_string(),
            label,
            features: fv,
        });
    }
    Ok(rows)
}
