use std::collections::{BTreeMap, BTreeSet};

/// Jaro similarity with Winkler prefix boost (p = 0.1, prefix capped at 4).
pub fn jaro_winkler(s1: &str, s2: &str) -> f64 {
    let a: Vec<char> = s1.chars().collect();
    let b: Vec<char> = s2.chars().collect();
    let j = jaro(&a, &b);
    let prefix = a
        .iter()
        .zip(b.iter())
        .take(4)
        .take_while(|(x, y)| x == y)
        .count();
    j + prefix as f64 * 0.1 * (1.0 - j)
}

fn jaro(a: &[char], b: &[char]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let window = (a.len().max(b.len()) / 2).saturating_sub(1);
    let mut used = vec![false; b.len()];
    let mut matched_a = Vec::new();
    for (i, &c) in a.iter().enumerate() {
        let lo = i.saturating_sub(window);
        let hi = (i + window + 1).min(b.len());
        for j in lo..hi {
            if !used[j] && b[j] == c {
                used[j] = true;
                matched_a.push(c);
                break;
            }
        }
    }
    let m = matched_a.len();
    if m == 0 {
        return 0.0;
    }
    let matched_b = b.iter().zip(&used).filter(|(_, u)| **u).map(|(c, _)| *c);
    let half_transpositions = matched_a
        .iter()
        .zip(matched_b)
        .filter(|(x, y)| **x != *y)
        .count();
    let m = m as f64;
    let t = half_transpositions as f64 / 2.0;
    (m / a.len() as f64 + m / b.len() as f64 + (m - t) / m) / 3.0
}

pub fn levenshtein_distance(s1: &str, s2: &str) -> usize {
    let a: Vec<char> = s1.chars().collect();
    let b: Vec<char> = s2.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for i in 1..=a.len() {
        cur[0] = i;
        for j in 1..=b.len() {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn levenshtein_sim(s1: &str, s2: &str) -> f64 {
    let longest = s1.chars().count().max(s2.chars().count());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein_distance(s1, s2) as f64 / longest as f64
}

/// Lowercase, non-word characters to blanks, split on whitespace.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .chars()
        .map(|c| if c.is_alphanumeric() || c == '_' { c } else { ' ' })
        .collect::<String>()
        .split_whitespace()
        .map(str::to_string)
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusStats {
    pub document_count: usize,
    pub token_document_frequency: BTreeMap<String, usize>,
}

impl CorpusStats {
    pub fn build<'a, I>(docs: I) -> Self
    where
        I: IntoIterator<Item = &'a [String]>,
    {
        let mut stats = CorpusStats::default();
        for doc in docs {
            stats.document_count += 1;
            let distinct: BTreeSet<&String> = doc.iter().collect();
            for tok in distinct {
                *stats.token_document_frequency.entry(tok.clone()).or_default() += 1;
            }
        }
        stats
    }

    pub fn from_texts<'a, I: IntoIterator<Item = &'a str>>(texts: I) -> Self {
        let docs: Vec<Vec<String>> = texts.into_iter().map(tokenize).collect();
        Self::build(docs.iter().map(Vec::as_slice))
    }

    pub fn idf(&self, token: &str) -> f64 {
        match self.token_document_frequency.get(token) {
            Some(&df) if df > 0 => (self.document_count as f64 / df as f64).ln(),
            _ => 0.0,
        }
    }

    fn vector<'a>(&self, doc: &'a [String]) -> BTreeMap<&'a str, f64> {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for t in doc {
            *counts.entry(t.as_str()).or_default() += 1;
        }
        let len = doc.len() as f64;
        counts
            .into_iter()
            .map(|(t, c)| (t, c as f64 / len * self.idf(t)))
            .collect()
    }
}

pub fn tfidf_cosine(doc1: &[String], doc2: &[String], stats: &CorpusStats) -> f64 {
    if doc1.is_empty() || doc2.is_empty() {
        return 0.0;
    }
    let v1 = stats.vector(doc1);
    let v2 = stats.vector(doc2);
    let dot: f64 = v1.iter().filter_map(|(t, x)| v2.get(t).map(|y| x * y)).sum();
    let n1 = v1.values().map(|x| x * x).sum::<f64>().sqrt();
    let n2 = v2.values().map(|x| x * x).sum::<f64>().sqrt();
    if n1 == 0.0 || n2 == 0.0 {
        return 0.0;
    }
    (dot / (n1 * n2)).clamp(0.0, 1.0)
}

pub fn tfidf_text(s1: &str, s2: &str, stats: &CorpusStats) -> f64 {
    tfidf_cosine(&tokenize(s1), &tokenize(s2), stats)
}
