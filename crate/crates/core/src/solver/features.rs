//! The three affinity features: string length rank, proper-name anchors and
//! repeated-token frequency.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::matrix::SimilarityMatrix;

/// Leading and trailing non-alphanumeric characters removed.
pub fn strip_punctuation(token: &str) -> &str {
    token.trim_matches(|c: char| !c.is_alphanumeric())
}

/// Whitespace tokens, punctuation-stripped and lowercased, empties dropped.
pub fn tokens(item: &str) -> Vec<String> {
    item.split_whitespace()
        .map(strip_punctuation)
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// 0-based rank of each item by character count; ties keep original order.
fn length_ranks(items: &[String]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by_key(|&i| (items[i].chars().count(), i));
    let mut ranks = vec![0; items.len()];
    for (rank, &i) in order.iter().enumerate() {
        ranks[i] = rank;
    }
    ranks
}

/// Longer strings tend to translate longer strings: entry (i, j) is
/// `1 - |rank_s(i) - rank_t(j)| / (n - 1)`.
pub fn length_affinity(source_items: &[String], target_items: &[String]) -> SimilarityMatrix {
    let n = source_items.len();
    assert_eq!(n, target_items.len(), "item lists must have equal length");
    assert!(n >= 2, "need at least two items");
    let rs = length_ranks(source_items);
    let rt = length_ranks(target_items);
    let span = (n - 1) as f64;
    SimilarityMatrix::from_fn(n, |i, j| 1.0 - rs[i].abs_diff(rt[j]) as f64 / span)
}

/// Candidate proper names per item, case-folded.
///
/// A capitalized token counts when it is not the first token of its item, or
/// when it is first but its lowercase form never appears in lowercase
/// elsewhere on the same side. Single-character tokens ("I", "A") are never
/// names.
pub fn candidate_names(items: &[String]) -> Vec<Vec<String>> {
    let split: Vec<Vec<&str>> = items
        .iter()
        .map(|item| {
            item.split_whitespace()
                .map(strip_punctuation)
                .filter(|t| !t.is_empty())
                .collect()
        })
        .collect();
    let lowercase_vocab: HashSet<&str> = split
        .iter()
        .flatten()
        .copied()
        .filter(|t| t.chars().next().is_some_and(char::is_lowercase))
        .collect();

    split
        .iter()
        .map(|toks| {
            let mut names = Vec::new();
            for (k, tok) in toks.iter().enumerate() {
                if tok.chars().count() < 2 || !tok.chars().next().is_some_and(char::is_uppercase) {
                    continue;
                }
                let folded = tok.to_lowercase();
                if (k > 0 || !lowercase_vocab.contains(folded.as_str())) && !names.contains(&folded) {
                    names.push(folded);
                }
            }
            names
        })
        .collect()
}

/// Levenshtein distance over Unicode scalar values.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.chars().enumerate() {
        cur[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `1 - distance / max(len)`, in [0, 1].
pub fn name_similarity(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 1.0;
    }
    1.0 - edit_distance(a, b) as f64 / longest as f64
}

/// Proper names as anchors: entry (i, j) is the best name similarity between
/// the candidate names of source i and target j, or 0 if either has none.
pub fn name_anchor_affinity(source_items: &[String], target_items: &[String]) -> SimilarityMatrix {
    let n = source_items.len();
    assert_eq!(n, target_items.len(), "item lists must have equal length");
    assert!(n >= 2, "need at least two items");
    let sn = candidate_names(source_items);
    let tn = candidate_names(target_items);
    SimilarityMatrix::from_fn(n, |i, j| {
        sn[i]
            .iter()
            .flat_map(|a| tn[j].iter().map(move |b| name_similarity(a, b)))
            .fold(0.0, f64::max)
    })
}

/// Token → set of item indices containing it.
pub fn document_frequencies(items: &[String]) -> BTreeMap<String, BTreeSet<usize>> {
    let mut df: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
    for (i, item) in items.iter().enumerate() {
        for tok in tokens(item) {
            df.entry(tok).or_default().insert(i);
        }
    }
    df
}

/// Repeated tokens: a source token in `f >= 2` items and a target token in
/// exactly `f` items add `1/f` to every (source item, target item) pair that
/// contains them. The result is divided by its maximum entry.
pub fn cooccurrence_affinity(source_items: &[String], target_items: &[String]) -> SimilarityMatrix {
    let n = source_items.len();
    assert_eq!(n, target_items.len(), "item lists must have equal length");
    assert!(n >= 2, "need at least two items");
    let sdf = document_frequencies(source_items);
    let tdf = document_frequencies(target_items);

    let mut by_freq: BTreeMap<usize, Vec<&BTreeSet<usize>>> = BTreeMap::new();
    for items in tdf.values().filter(|s| s.len() >= 2) {
        by_freq.entry(items.len()).or_default().push(items);
    }

    let mut raw = vec![0.0; n * n];
    for s_items in sdf.values().filter(|s| s.len() >= 2) {
        let f = s_items.len();
        let Some(targets) = by_freq.get(&f) else { continue };
        let boost = 1.0 / f as f64;
        for t_items in targets {
            for &i in s_items {
                for &j in t_items.iter() {
                    raw[i * n + j] += boost;
                }
            }
        }
    }
    let max = raw.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        raw.iter_mut().for_each(|v| *v /= max);
    }
    SimilarityMatrix::from_fn(n, |i, j| raw[i * n + j])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(items: &[&str]) -> Vec<String> {
        items.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn tokenization() {
        assert_eq!(tokens("Kot zjadł kiełbasę."), ["kot", "zjadł", "kiełbasę"]);
        assert_eq!(tokens(" -- hi, there! "), ["hi", "there"]);
        assert_eq!(strip_punctuation("k’erkulan’"), "k’erkulan");
    }

    #[test]
    fn edit_distances() {
        assert_eq!(edit_distance("meeri", "mary"), 3);
        assert_eq!(edit_distance("", "abc"), 3);
        assert_eq!(edit_distance("alicja", "alice"), 2);
        assert_eq!(edit_distance("ŋkoe", "nkoe"), 1);
        assert!((name_similarity("meeri", "mary") - 0.4).abs() < 1e-15);
    }

    #[test]
    fn length_extremes() {
        let src = s(&["a", "bbb", "cc"]);
        let tgt = s(&["xxxxx", "y", "zzz"]);
        let m = length_affinity(&src, &tgt);
        // longest source (1) vs longest target (0)
        assert_eq!(m.get(1, 0), 1.0);
        // longest source vs shortest target
        assert_eq!(m.get(1, 1), 0.0);
        assert_eq!(m.get(2, 2), 1.0);
    }

    #[test]
    fn names_need_capitals_outside_sentence_start() {
        let names = candidate_names(&s(&[
            "The cat saw Mary",
            "the dog",
            "Alice ran",
            "I ran",
        ]));
        assert_eq!(names, vec![vec!["mary"], vec![], vec!["alice"], vec![]]);
    }

    #[test]
    fn no_names_no_affinity() {
        let m = name_anchor_affinity(&s(&["abc def", "ghi"]), &s(&["one two", "three"]));
        assert!(m.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unique_tokens_contribute_nothing() {
        let m = cooccurrence_affinity(&s(&["a b", "c d"]), &s(&["e f", "g h"]));
        assert!(m.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn shared_frequency_links_items() {
        let m = cooccurrence_affinity(&s(&["x a", "x b", "c"]), &s(&["y", "y q", "r"]));
        assert_eq!(m.get(0, 0), 1.0);
        assert_eq!(m.get(1, 1), 1.0);
        assert_eq!(m.get(2, 2), 0.0);
        assert_eq!(m.get(0, 2), 0.0);
    }
}
