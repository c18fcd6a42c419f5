//! Category lexicons, tweet tokenization and category percentages.
//!
//! Lexicon file format: a line `[name]` opens a category; every following
//! nonempty line that does not start with `#` is a pattern. A pattern ending
//! in `*` matches any token with that prefix, otherwise it must match the
//! token exactly. Lines are trimmed and lowercased.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::ops::Deref;
use std::sync::OnceLock;

use regex::Regex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Pattern {
    Literal(String),
    /// Prefix stem, written with a trailing `*`.
    Stem(String),
}

impl Pattern {
    pub fn parse(raw: &str) -> std::result::Result<Self, String> {
        let raw = raw.trim().to_lowercase();
        let (body, stem) = match raw.strip_suffix('*') {
            Some(body) => (body, true),
            None => (raw.as_str(), false),
        };
        if body.is_empty() {
            return Err("empty pattern".into());
        }
        if body.contains('*') {
            return Err(format!("`*` inside pattern `{raw}`"));
        }
        Ok(if stem {
            Pattern::Stem(body.to_string())
        } else {
            Pattern::Literal(body.to_string())
        })
    }

    pub fn matches(&self, token: &str) -> bool {
        match self {
            Pattern::Literal(w) => token == w,
            Pattern::Stem(prefix) => token.starts_with(prefix.as_str()),
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Literal(w) => f.write_str(w),
            Pattern::Stem(p) => write!(f, "{p}*"),
        }
    }
}

pub fn match_pattern(token: &str, pattern: &Pattern) -> bool {
    pattern.matches(token)
}

/// Hash-indexed form of one category: literal lookup plus a prefix probe
/// against the stem set for every char boundary of the token.
#[derive(Debug, Clone, Default)]
struct CategoryIndex {
    literals: HashSet<String>,
    stems: HashSet<String>,
    shortest_stem: usize,
    longest_stem: usize,
}

impl CategoryIndex {
    fn build(patterns: &[Pattern]) -> Self {
        let mut idx = CategoryIndex {
            shortest_stem: usize::MAX,
            ..Default::default()
        };
        for p in patterns {
            match p {
                Pattern::Literal(w) => {
                    idx.literals.insert(w.clone());
                }
                Pattern::Stem(s) => {
                    idx.shortest_stem = idx.shortest_stem.min(s.len());
                    idx.longest_stem = idx.longest_stem.max(s.len());
                    idx.stems.insert(s.clone());
                }
            }
        }
        idx
    }

    fn matches(&self, token: &str) -> bool {
        if self.literals.contains(token) {
            return true;
        }
        if self.stems.is_empty() || token.len() < self.shortest_stem {
            return false;
        }
        token
            .char_indices()
            .map(|(i, c)| i + c.len_utf8())
            .take_while(|&end| end <= self.longest_stem)
            .any(|end| end >= self.shortest_stem && self.stems.contains(&token[..end]))
    }
}

#[derive(Debug, Clone)]
struct Category {
    patterns: Vec<Pattern>,
    index: CategoryIndex,
}

#[derive(Debug, Clone, Default)]
pub struct CategoryLexicon {
    categories: BTreeMap<String, Category>,
}

impl CategoryLexicon {
    pub fn parse(text: &str) -> Result<Self> {
        let mut categories: BTreeMap<String, Vec<Pattern>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim().to_lowercase();
                if name.is_empty() {
                    return Err(Error::LexiconParse {
                        line: line_no,
                        message: "empty category name".into(),
                    });
                }
                if categories.contains_key(&name) {
                    return Err(Error::LexiconParse {
                        line: line_no,
                        message: format!("duplicate category `{name}`"),
                    });
                }
                categories.insert(name.clone(), Vec::new());
                current = Some(name);
                continue;
            }
            let Some(cat) = current.as_ref() else {
                return Err(Error::LexiconParse {
                    line: line_no,
                    message: "pattern before any category header".into(),
                });
            };
            let pattern = Pattern::parse(line).map_err(|message| Error::LexiconParse {
                line: line_no,
                message,
            })?;
            let list = categories.get_mut(cat).expect("current category exists");
            if !list.contains(&pattern) {
                list.push(pattern);
            }
        }
        Ok(Self::from_patterns(categories))
    }

    pub fn from_patterns(categories: BTreeMap<String, Vec<Pattern>>) -> Self {
        let categories = categories
            .into_iter()
            .map(|(name, patterns)| {
                let index = CategoryIndex::build(&patterns);
                (name, Category { patterns, index })
            })
            .collect();
        CategoryLexicon { categories }
    }

    /// Starter lexicon holding the example words of the five motivational
    /// categories.
    pub fn starter() -> Self {
        Self::parse(STARTER_LEXICON).expect("starter lexicon parses")
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn category_names(&self) -> impl Iterator<Item = &str> {
        self.categories.keys().map(String::as_str)
    }

    pub fn contains(&self, category: &str) -> bool {
        self.categories.contains_key(category)
    }

    pub fn patterns(&self, category: &str) -> Option<&[Pattern]> {
        self.categories.get(category).map(|c| c.patterns.as_slice())
    }

    /// Whether `token` matches any pattern of `category`.
    pub fn matches(&self, category: &str, token: &str) -> Result<bool> {
        let cat = self
            .categories
            .get(category)
            .ok_or_else(|| Error::UnknownCategory(category.to_string()))?;
        Ok(cat.index.matches(token))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (name, cat) in &self.categories {
            out.push_str(&format!("[{name}]\n"));
            for p in &cat.patterns {
                out.push_str(&format!("{p}\n"));
            }
        }
        out
    }
}

pub fn parse_lexicon(text: &str) -> Result<CategoryLexicon> {
    CategoryLexicon::parse(text)
}

pub const STARTER_LEXICON: &str = "\
# Example words for the five motivational categories.
[discrep]
should
would
could

[tentat]
maybe
perhaps
guess

[certain]
always
never

[anx]
nervous
afraid
tense

[futurefocus]
may
will
soon
";

/// Lowercase tokens with URLs, hashtags, mentions and punctuation removed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenList(Vec<String>);

impl TokenList {
    pub fn new(tokens: Vec<String>) -> Self {
        TokenList(tokens)
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }

    pub fn join(&self) -> String {
        self.0.join(" ")
    }
}

impl Deref for TokenList {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.0
    }
}

fn punctuation_or_symbol() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[\p{P}\p{S}]+").expect("valid regex"))
}

fn find_ascii_ci(haystack: &str, needle: &str) -> Option<usize> {
    let h = haystack.as_bytes();
    let n = needle.as_bytes();
    if h.len() < n.len() {
        return None;
    }
    (0..=h.len() - n.len()).find(|&i| h[i..i + n.len()].eq_ignore_ascii_case(n))
}

fn starts_with_ascii_ci(s: &str, prefix: &str) -> bool {
    s.len() >= prefix.len() && s.as_bytes()[..prefix.len()].eq_ignore_ascii_case(prefix.as_bytes())
}

/// Drops the URL tail of a raw token, or the whole token for hashtags,
/// mentions and `www.` links.
fn strip_links(raw: &str) -> &str {
    if raw.starts_with('#') || raw.starts_with('@') || starts_with_ascii_ci(raw, "www.") {
        return "";
    }
    let cut = [
        find_ascii_ci(raw, "http://"),
        find_ascii_ci(raw, "https://"),
    ]
    .into_iter()
    .flatten()
    .min();
    match cut {
        Some(pos) => &raw[..pos],
        None => raw,
    }
}

pub fn tokenize(text: &str) -> TokenList {
    let re = punctuation_or_symbol();
    let tokens = text
        .split_whitespace()
        .map(strip_links)
        .filter(|t| !t.is_empty())
        .map(|t| re.replace_all(t, "").to_lowercase())
        .filter(|t| !t.is_empty())
        .collect();
    TokenList(tokens)
}

fn rate_from_count<T: Scalar>(count: usize, total: usize) -> T {
    if total == 0 {
        return T::zero();
    }
    T::lit(100.0) * T::from_count(count) / T::from_count(total)
}

/// Percentage of tokens that match at least one pattern of `category`.
/// Empty token lists give 0.
pub fn category_rate<T: Scalar>(
    tokens: &[String],
    lexicon: &CategoryLexicon,
    category: &str,
) -> Result<T> {
    let cat = lexicon
        .categories
        .get(category)
        .ok_or_else(|| Error::UnknownCategory(category.to_string()))?;
    let count = tokens.iter().filter(|t| cat.index.matches(t)).count();
    Ok(rate_from_count(count, tokens.len()))
}
