//! Pretrained word vectors, mean-of-tokens document vectors and cosine similarity.
//!
//! The vector file is the usual pretrained text format: one entry per line,
//! the token followed by exactly `dimension` decimal floats, separated by
//! single spaces. UTF-8, LF or CRLF line endings. Lines that do not match are
//! skipped and counted in the [`LoadReport`].

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::{dot, Scalar};

pub const DEFAULT_DIMENSION: usize = 300;

#[derive(Debug, Clone)]
pub struct EmbeddingTable<T> {
    dimension: usize,
    vectors: HashMap<String, Vec<T>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub loaded: usize,
    pub malformed: usize,
    /// Entries whose lowercased token was already present. First one wins.
    pub duplicates: usize,
}

impl<T: Scalar> EmbeddingTable<T> {
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::validation("dimension", "must be positive"));
        }
        Ok(EmbeddingTable { dimension, vectors: HashMap::new() })
    }

    /// Builds a table from in-memory entries. Vectors of the wrong dimension are rejected.
    pub fn from_entries<I, S>(dimension: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<T>)>,
        S: AsRef<str>,
    {
        let mut table = Self::new(dimension)?;
        for (token, v) in entries {
            if v.len() != dimension {
                return Err(Error::validation(
                    "embedding",
                    format!("`{}` has {} components, expected {dimension}", token.as_ref(), v.len()),
                ));
            }
            table.vectors.entry(token.as_ref().to_lowercase()).or_insert(v);
        }
        Ok(table)
    }

    pub fn load(path: impl AsRef<Path>, dimension: usize) -> Result<(Self, LoadReport)> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(BufReader::new(file), dimension).map_err(|e| match e {
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        })
    }

    pub fn from_reader<R: BufRead>(mut reader: R, dimension: usize) -> Result<(Self, LoadReport)> {
        let mut table = Self::new(dimension)?;
        let mut report = LoadReport::default();
        let mut buf = Vec::new();
        loop {
            buf.clear();
            let n = reader.read_until(b'\n', &mut buf).map_err(|e| Error::io("<embeddings>", e))?;
            if n == 0 {
                break;
            }
            let Ok(line) = std::str::from_utf8(&buf) else {
                report.malformed += 1;
                continue;
            };
            let line = line.strip_suffix('\n').unwrap_or(line);
            let line = line.strip_suffix('\r').unwrap_or(line);
            if line.is_empty() {
                continue;
            }
            match parse_line::<T>(line, dimension) {
                Some((token, v)) => {
                    let key = token.to_lowercase();
                    match table.vectors.entry(key) {
                        std::collections::hash_map::Entry::Occupied(_) => report.duplicates += 1,
                        std::collections::hash_map::Entry::Vacant(e) => {
                            e.insert(v);
                            report.loaded += 1;
                        }
                    }
                }
                None => report.malformed += 1,
            }
        }
        Ok((table, report))
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    /// All entries sorted by token.
    pub fn entries(&self) -> Vec<(&str, &[T])> {
        let mut v: Vec<_> = self.vectors.iter().map(|(k, v)| (k.as_str(), v.as_slice())).collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Case-insensitive lookup.
    pub fn get(&self, token: &str) -> Option<&[T]> {
        match self.vectors.get(token) {
            Some(v) => Some(v),
            None => self.vectors.get(&token.to_lowercase()).map(Vec::as_slice),
        }
    }

    /// Mean of the vectors of all in-vocabulary tokens of `text`.
    pub fn embed_document(&self, text: &str) -> DocVector<T> {
        embed_document(text, self)
    }
}

fn parse_line<T: Scalar>(line: &str, dimension: usize) -> Option<(&str, Vec<T>)> {
    let mut parts = line.split(' ');
    let token = parts.next().filter(|t| !t.is_empty())?;
    let mut v = Vec::with_capacity(dimension);
    for p in parts {
        let x: f64 = p.parse().ok()?;
        if !x.is_finite() {
            return None;
        }
        v.push(T::from_f64(x)?);
    }
    (v.len() == dimension).then_some((token, v))
}

/// Lowercased alphanumeric runs. No stemming, no stopword removal.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).map(str::to_lowercase)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DocVector<T> {
    pub values: Vec<T>,
    /// In-vocabulary tokens that contributed to the mean.
    pub token_count: usize,
}

impl<T: Scalar> DocVector<T> {
    pub fn is_zero(&self) -> bool {
        self.token_count == 0
    }
}

pub fn embed_document<T: Scalar>(text: &str, table: &EmbeddingTable<T>) -> DocVector<T> {
    let mut sum = vec![T::zero(); table.dimension];
    let mut count = 0usize;
    for token in tokenize(text) {
        if let Some(v) = table.vectors.get(&token) {
            for (s, &x) in sum.iter_mut().zip(v) {
                *s = *s + x;
            }
            count += 1;
        }
    }
    if count > 0 {
        let n = T::lit(count as f64);
        for s in &mut sum {
            *s = *s / n;
        }
    }
    DocVector { values: sum, token_count: count }
}

/// Cosine of the angle between `a` and `b`; zero when either has zero norm.
pub fn cosine_similarity<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::validation("vector", format!("dimension mismatch: {} vs {}", a.len(), b.len())));
    }
    let na = dot(a, a);
    let nb = dot(b, b);
    if na == T::zero() || nb == T::zero() {
        return Ok(T::zero());
    }
    let c = dot(a, b) / (na.sqrt() * nb.sqrt());
    Ok(c.max(-T::one()).min(T::one()))
}

/// Similarity between an OER transcription and a skill description.
pub fn skill_similarity<T: Scalar>(transcription: &str, skill_description: &str, table: &EmbeddingTable<T>) -> T {
    let a = embed_document(transcription, table);
    let b = embed_document(skill_description, table);
    cosine_similarity(&a.values, &b.values).unwrap_or_else(|_| T::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn toy() -> EmbeddingTable<f64> {
        EmbeddingTable::from_entries(2, [("cat", vec![1.0, 0.0]), ("Dog", vec![0.0, 1.0]), ("fish", vec![3.0, 4.0])])
            .unwrap()
    }

    #[test]
    fn parses_text_format() {
        let data = b"the 0.1 0.2 0.3\r\nBad 1 2\nOf 1e-1 -2.5 3\n\nnan_ok 1 x 2\ncomma 1,2,3\nthe 9 9 9\n";
        let (t, report) = EmbeddingTable::<f64>::from_reader(&data[..], 3).unwrap();
        assert_eq!(report, LoadReport { loaded: 2, malformed: 3, duplicates: 1 });
        assert_eq!(t.get("THE").unwrap(), &[0.1, 0.2, 0.3]);
        assert_eq!(t.get("of").unwrap(), &[0.1, -2.5, 3.0]);
        assert!(t.get("bad").is_none());
    }

    #[test]
    fn rejects_zero_dimension() {
        assert!(EmbeddingTable::<f64>::new(0).is_err());
    }

    #[test]
    fn tokenizer_lowercases_and_splits_on_punctuation() {
        let toks: Vec<_> = tokenize("Hello, World! data-science 101").collect();
        assert_eq!(toks, ["hello", "world", "data", "science", "101"]);
    }

    #[test]
    fn embed_examples() {
        let t = toy();
        let one = t.embed_document("cat");
        assert_eq!(one.values, vec![1.0, 0.0]);
        assert_eq!(one.token_count, 1);
        let two = t.embed_document("CAT dog");
        assert_eq!(two.values, vec![0.5, 0.5]);
        let none = t.embed_document("zebra unicorn");
        assert_eq!(none.values, vec![0.0, 0.0]);
        assert!(none.is_zero());
        assert!(t.embed_document("").is_zero());
    }

    #[test]
    fn cosine_examples() {
        let a = [0.3, -1.2, 2.0];
        assert_abs_diff_eq!(cosine_similarity(&a, &a).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(cosine_similarity(&[1.0, 0.0], &[1.0, 1.0]).unwrap(), 0.5f64.sqrt(), epsilon = 1e-12);
        assert_eq!(cosine_similarity(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 0.0);
        assert!(cosine_similarity(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn skill_similarity_examples() {
        let t = toy();
        assert_abs_diff_eq!(skill_similarity("cat fish", "cat fish", &t), 1.0, epsilon = 1e-12);
        assert_eq!(skill_similarity("", "cat fish", &t), 0.0);
        assert_eq!(skill_similarity("cat", "unknown words", &t), 0.0);
    }

    #[test]
    fn works_in_single_precision() {
        let t: EmbeddingTable<f32> =
            EmbeddingTable::from_entries(2, [("a", vec![1.0f32, 0.0]), ("b", vec![1.0, 1.0])]).unwrap();
        let s = skill_similarity("a", "b", &t);
        assert!((s - std::f32::consts::FRAC_1_SQRT_2).abs() < 1e-6);
    }

    fn nonzero_vec() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, 6).prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-6)
    }

    proptest! {
        #[test]
        fn self_similarity_is_one(a in nonzero_vec()) {
            prop_assert!((cosine_similarity(&a, &a).unwrap() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn symmetric_and_scale_invariant(a in nonzero_vec(), b in nonzero_vec(), k in 0.001f64..1000.0) {
            let ab = cosine_similarity(&a, &b).unwrap();
            prop_assert!((ab - cosine_similarity(&b, &a).unwrap()).abs() < 1e-9);
            let ka: Vec<f64> = a.iter().map(|x| x * k).collect();
            prop_assert!((cosine_similarity(&ka, &b).unwrap() - ab).abs() < 1e-9);
            prop_assert!((-1.0..=1.0).contains(&ab));
        }

        #[test]
        fn embedding_ignores_token_order(mut words in prop::collection::vec(
            prop::sample::select(vec!["cat", "dog", "fish", "zebra"]), 0..12), seed in any::<u64>()) {
            let t = toy();
            let a = t.embed_document(&words.join(" "));
            // deterministic shuffle
            let n = words.len();
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                words.swap(i, (s >> 33) as usize % (i + 1));
            }
            let b = t.embed_document(&words.join(" "));
            prop_assert_eq!(a.token_count, b.token_count);
            for (x, y) in a.values.iter().zip(&b.values) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
