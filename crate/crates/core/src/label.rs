//! Target labels ("A", "B", …, "Z", "AA", …) and the keys built from them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// A target item label, stored by its 1-based rank and rendered
/// spreadsheet-style: 1 → "A", 26 → "Z", 27 → "AA".
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(u32);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("label rank must be at least 1")]
    ZeroRank,
    #[error("invalid label {0:?}: expected one or more uppercase letters A-Z")]
    Invalid(String),
    #[error("label {0:?} is too large")]
    Overflow(String),
}

impl Label {
    pub fn from_rank(rank: u32) -> Result<Self, LabelError> {
        if rank == 0 {
            return Err(LabelError::ZeroRank);
        }
        Ok(Label(rank))
    }

    /// Label for a 0-based position in the presented target list.
    pub fn from_index(index: usize) -> Self {
        Label(u32::try_from(index + 1).expect("label index fits in u32"))
    }

    pub fn rank(self) -> u32 {
        self.0
    }

    /// 0-based position in the target list.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

pub fn render_label(rank: u32) -> String {
    assert!(rank >= 1, "label rank must be at least 1");
    let mut n = rank;
    let mut out = Vec::new();
    while n > 0 {
        let rem = (n - 1) % 26;
        out.push(b'A' + rem as u8);
        n = (n - 1) / 26;
    }
    out.reverse();
    String::from_utf8(out).expect("ASCII")
}

pub fn parse_label(text: &str) -> Result<u32, LabelError> {
    if text.is_empty() || !text.bytes().all(|b| b.is_ascii_uppercase()) {
        return Err(LabelError::Invalid(text.to_string()));
    }
    let mut rank: u32 = 0;
    for b in text.bytes() {
        rank = rank
            .checked_mul(26)
            .and_then(|r| r.checked_add(u32::from(b - b'A') + 1))
            .ok_or_else(|| LabelError::Overflow(text.to_string()))?;
    }
    Ok(rank)
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_label(self.0))
    }
}

impl FromStr for Label {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_label(s).map(Label)
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Total mapping from source index (1..=n) to a target label.
///
/// Stored positionally: `labels()[i]` is the label for source index `i + 1`.
/// A gold key must be a bijection onto the first n labels; that is checked by
/// puzzle validation rather than at construction so malformed files can be
/// reported instead of rejected outright.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AnswerKey(Vec<Label>);

impl AnswerKey {
    pub fn new(labels: Vec<Label>) -> Self {
        AnswerKey(labels)
    }

    /// Builds a key from 0-based target positions, one per source item.
    pub fn from_positions(positions: &[usize]) -> Self {
        AnswerKey(positions.iter().map(|&p| Label::from_index(p)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> &[Label] {
        &self.0
    }

    /// Label for a 1-based source index.
    pub fn get(&self, index: usize) -> Option<Label> {
        index.checked_sub(1).and_then(|i| self.0.get(i)).copied()
    }

    /// 0-based target positions, one per source item.
    pub fn positions(&self) -> Vec<usize> {
        self.0.iter().map(|l| l.index()).collect()
    }

    /// True when the key is a permutation of the labels of rank 1..=n.
    pub fn is_bijection(&self) -> bool {
        let n = self.0.len();
        let distinct: BTreeSet<u32> = self.0.iter().map(|l| l.rank()).collect();
        distinct.len() == n && self.0.iter().all(|l| (l.rank() as usize) <= n)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, l)| l.index() == i)
    }

    pub fn identity(n: usize) -> Self {
        AnswerKey((0..n).map(Label::from_index).collect())
    }
}

impl fmt::Display for AnswerKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, label) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}→{}", i + 1, label)?;
        }
        f.write_str("}")
    }
}

/// A possibly partial, possibly non-injective key, typically parsed from a
/// model response or submitted by a human solver.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct PredictedKey(BTreeMap<usize, Label>);

// Keys are read as strings and parsed, so a key nested in a flattened or
// internally tagged structure (where serde buffers map keys as strings)
// still deserializes.
impl<'de> Deserialize<'de> for PredictedKey {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = BTreeMap::<String, Label>::deserialize(deserializer)?;
        raw.into_iter()
            .map(|(k, v)| {
                k.trim()
                    .parse::<usize>()
                    .map(|i| (i, v))
                    .map_err(|_| serde::de::Error::custom(format!("source index {k:?} is not a number")))
            })
            .collect::<Result<BTreeMap<_, _>, _>>()
            .map(PredictedKey)
    }
}

impl PredictedKey {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets the label for a 1-based source index, replacing any earlier one.
    pub fn insert(&mut self, index: usize, label: Label) {
        self.0.insert(index, label);
    }

    pub fn get(&self, index: usize) -> Option<Label> {
        self.0.get(&index).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Label)> + '_ {
        self.0.iter().map(|(&i, &l)| (i, l))
    }

    /// True when every index 1..=n has a prediction.
    pub fn is_complete(&self, n: usize) -> bool {
        (1..=n).all(|i| self.0.contains_key(&i))
    }

    /// Partial, non-injective, or containing indices outside 1..=n.
    pub fn is_irregular(&self, n: usize) -> bool {
        let distinct: BTreeSet<Label> = self.0.values().copied().collect();
        !self.is_complete(n)
            || self.0.len() != n
            || distinct.len() != self.0.len()
            || self.0.keys().any(|&i| i == 0 || i > n)
    }
}

impl From<&AnswerKey> for PredictedKey {
    fn from(key: &AnswerKey) -> Self {
        PredictedKey(
            key.labels()
                .iter()
                .enumerate()
                .map(|(i, &l)| (i + 1, l))
                .collect(),
        )
    }
}

impl FromIterator<(usize, Label)> for PredictedKey {
    fn from_iter<T: IntoIterator<Item = (usize, Label)>>(iter: T) -> Self {
        let mut key = PredictedKey::new();
        for (i, l) in iter {
            key.insert(i, l);
        }
        key
    }
}
