//! Corpus ingestion and preprocessing.
//!
//! Raw texts are lowercased, split on non-alphanumeric characters, filtered
//! against a stop-word list (before stemming) and stemmed. The retained
//! vocabulary keeps every stem whose corpus-wide occurrence count strictly
//! exceeds a threshold; the word-document matrix counts stems per document.

pub mod porter;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub use porter::stem;

/// Bundled default English stop-word list (one word per line, `#` comments).
pub const DEFAULT_STOPWORDS: &str = include_str!("../../assets/stopwords_en.txt");

/// A preprocessed document: its stable id, original identifier, and the
/// stemmed tokens that survived stop-word and exclusion filtering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: usize,
    pub source_key: String,
    pub tokens: Vec<String>,
}

/// The retained stem inventory, lexicographically ordered.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    /// Unique stems, sorted lexicographically.
    pub words: Vec<String>,
    /// Stem -> position in `words`.
    pub index: HashMap<String, usize>,
    /// Corpus-wide token count per stem, parallel to `words`.
    pub total_occurrences: Vec<u64>,
    /// Fraction of all token occurrences covered by the retained stems.
    pub coverage: f64,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn position(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }
}

/// Sparse word-document count matrix. Rows follow document order; only
/// nonzero counts are stored, each row sorted by word index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocTermMatrix {
    pub n_docs: usize,
    pub n_words: usize,
    /// Per-row `(word index, count)` pairs, count > 0, sorted by word index.
    pub rows: Vec<Vec<(u32, u32)>>,
    /// Document id per row.
    pub doc_ids: Vec<usize>,
    /// Rows left without any in-vocabulary token.
    pub zero_rows: Vec<usize>,
}

impl DocTermMatrix {
    pub fn count(&self, row: usize, word: usize) -> u32 {
        let w = word as u32;
        match self.rows[row].binary_search_by_key(&w, |&(i, _)| i) {
            Ok(pos) => self.rows[row][pos].1,
            Err(_) => 0,
        }
    }

    /// Total token count.
    pub fn total_count(&self) -> u64 {
        self.rows
            .iter()
            .flat_map(|r| r.iter())
            .map(|&(_, c)| u64::from(c))
            .sum()
    }

    /// Token count per row.
    pub fn row_total(&self, row: usize) -> u64 {
        self.rows[row].iter().map(|&(_, c)| u64::from(c)).sum()
    }

    /// Stable FNV-1a fingerprint of the matrix shape and triples.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv1a::new();
        h.write_u64(self.n_docs as u64);
        h.write_u64(self.n_words as u64);
        for (row, entries) in self.rows.iter().enumerate() {
            for &(w, c) in entries {
                h.write_u64(row as u64);
                h.write_u64(u64::from(w));
                h.write_u64(u64::from(c));
            }
        }
        h.finish()
    }

    /// Exact column sums, squared sums, and pairwise dot products of the
    /// count columns, accumulated in integers. The Gram matrix is returned
    /// as a dense row-major `n_words x n_words` buffer.
    pub fn column_gram(&self) -> ColumnGram {
        let v = self.n_words;
        let mut sum = vec![0i64; v];
        let mut gram = vec![0i64; v * v];
        for row in &self.rows {
            for (a, &(i, ci)) in row.iter().enumerate() {
                let (i, ci) = (i as usize, i64::from(ci));
                sum[i] += ci;
                for &(j, cj) in &row[a..] {
                    let (j, cj) = (j as usize, i64::from(cj));
                    gram[i * v + j] += ci * cj;
                }
            }
        }
        for i in 0..v {
            for j in 0..i {
                gram[i * v + j] = gram[j * v + i];
            }
        }
        ColumnGram { dim: v, sum, gram }
    }
}

/// Exact integer column statistics of a [`DocTermMatrix`].
#[derive(Debug, Clone)]
pub struct ColumnGram {
    pub dim: usize,
    /// Column sums.
    pub sum: Vec<i64>,
    /// Row-major dot products of column pairs.
    pub gram: Vec<i64>,
}

impl ColumnGram {
    #[inline]
    pub fn dot(&self, i: usize, j: usize) -> i64 {
        self.gram[i * self.dim + j]
    }
}

/// Document frequencies and co-document frequencies over word presence.
#[derive(Debug, Clone)]
pub struct DocumentFrequencyIndex {
    /// Number of documents containing each word, indexed by word index.
    pub df: Vec<u32>,
    /// Unordered pair -> number of documents containing both words.
    /// Keys are canonical `(min, max)` with `min < max`.
    co_df: HashMap<(u32, u32), u32>,
}

impl DocumentFrequencyIndex {
    pub fn doc_frequency(&self, word: usize) -> u32 {
        self.df[word]
    }

    pub fn co_frequency(&self, a: usize, b: usize) -> u32 {
        if a == b {
            return self.df[a];
        }
        let key = (a.min(b) as u32, a.max(b) as u32);
        self.co_df.get(&key).copied().unwrap_or(0)
    }
}

/// Preprocessing settings shared by a corpus and any of its ablations.
#[derive(Debug, Clone)]
pub struct PreprocessOptions {
    /// Raw lowercase words dropped before stemming.
    pub stopwords: HashSet<String>,
    /// Stems dropped after stemming.
    pub exclusions: HashSet<String>,
    /// A stem is retained iff its total occurrences STRICTLY exceed this.
    pub min_occurrences: u64,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        PreprocessOptions {
            stopwords: parse_word_list(DEFAULT_STOPWORDS),
            exclusions: HashSet::new(),
            min_occurrences: 100,
        }
    }
}

impl PreprocessOptions {
    /// No stop words, no exclusions, keep every stem. Handy for toy corpora.
    pub fn keep_everything() -> Self {
        PreprocessOptions {
            stopwords: HashSet::new(),
            exclusions: HashSet::new(),
            min_occurrences: 0,
        }
    }
}

/// An immutable preprocessed corpus: documents, vocabulary, and matrix.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub vocabulary: Vocabulary,
    pub matrix: DocTermMatrix,
    pub options: PreprocessOptions,
}

impl Corpus {
    /// Run the full preprocessing pipeline over raw texts.
    pub fn build(raw_texts: &[String], options: PreprocessOptions) -> Corpus {
        let keys: Vec<String> = (0..raw_texts.len()).map(|i| i.to_string()).collect();
        Corpus::build_with_keys(raw_texts, &keys, options)
    }

    pub fn build_with_keys(
        raw_texts: &[String],
        source_keys: &[String],
        options: PreprocessOptions,
    ) -> Corpus {
        assert_eq!(raw_texts.len(), source_keys.len());
        let documents: Vec<Document> = raw_texts
            .iter()
            .zip(source_keys)
            .enumerate()
            .map(|(id, (text, key))| Document {
                id,
                source_key: key.clone(),
                tokens: preprocess(text, &options),
            })
            .collect();
        Corpus::from_documents(documents, options)
    }

    fn from_documents(documents: Vec<Document>, options: PreprocessOptions) -> Corpus {
        let vocabulary = build_vocabulary(&documents, options.min_occurrences, &options.exclusions);
        let matrix = build_matrix(&documents, &vocabulary);
        Corpus {
            documents,
            vocabulary,
            matrix,
            options,
        }
    }

    pub fn n_docs(&self) -> usize {
        self.documents.len()
    }

    /// New corpus without the given documents. Vocabulary and matrix are
    /// rebuilt from the remaining documents under the same threshold.
    pub fn remove_documents(&self, doc_ids: &[usize]) -> Result<Corpus> {
        let removed = self.removal_set(doc_ids)?;
        let retained: Vec<Document> = self
            .documents
            .iter()
            .filter(|d| !removed.contains(&d.id))
            .cloned()
            .collect();
        Ok(Corpus::from_documents(retained, self.options.clone()))
    }

    /// Ablation variant that keeps the reference vocabulary instead of
    /// rebuilding it from the reduced corpus.
    pub fn remove_documents_fixed_vocabulary(&self, doc_ids: &[usize]) -> Result<Corpus> {
        let removed = self.removal_set(doc_ids)?;
        let retained: Vec<Document> = self
            .documents
            .iter()
            .filter(|d| !removed.contains(&d.id))
            .cloned()
            .collect();
        let matrix = build_matrix(&retained, &self.vocabulary);
        Ok(Corpus {
            documents: retained,
            vocabulary: self.vocabulary.clone(),
            matrix,
            options: self.options.clone(),
        })
    }

    fn removal_set(&self, doc_ids: &[usize]) -> Result<HashSet<usize>> {
        let known: HashSet<usize> = self.documents.iter().map(|d| d.id).collect();
        let mut removed = HashSet::with_capacity(doc_ids.len());
        for &id in doc_ids {
            if !known.contains(&id) {
                return Err(Error::input(format!("unknown document id {id}")));
            }
            removed.insert(id);
        }
        Ok(removed)
    }

    /// Stable fingerprint of the vocabulary plus matrix contents.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv1a::new();
        for word in &self.vocabulary.words {
            h.write_bytes(word.as_bytes());
        }
        h.write_u64(self.matrix.fingerprint());
        h.finish()
    }
}

/// 64-bit FNV-1a, used for corpus fingerprints in run manifests.
struct Fnv1a(u64);

impl Fnv1a {
    fn new() -> Self {
        Fnv1a(0xcbf2_9ce4_8422_2325)
    }

    fn write_bytes(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    fn write_u64(&mut self, v: u64) {
        self.write_bytes(&v.to_le_bytes());
    }

    fn finish(&self) -> u64 {
        self.0
    }
}

/// Read one raw text per data row from the named column of a CSV file.
pub fn ingest_csv(path: &Path, column: &str) -> Result<Vec<String>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::io(
                path,
                std::io::Error::new(std::io::ErrorKind::NotFound, e.to_string()),
            ),
            _ => Error::Csv(e.to_string()),
        })?;
    let headers = reader.headers().map_err(|e| Error::Csv(e.to_string()))?;
    let col = headers
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| Error::input(format!("column {column:?} not found in CSV header")))?;
    let mut texts = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        texts.push(record.get(col).unwrap_or("").to_string());
    }
    Ok(texts)
}

/// Read one document per `.txt` file from a directory, in lexicographic
/// file-name order. Returns `(file name, contents)` pairs.
pub fn ingest_dir(path: &Path) -> Result<Vec<(String, String)>> {
    let entries = fs::read_dir(path).map_err(|e| Error::io(path, e))?;
    let mut files: Vec<_> = entries
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|ext| ext == "txt"))
        .collect();
    files.sort();
    let mut docs = Vec::with_capacity(files.len());
    for file in files {
        let name = file
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let text = fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
        docs.push((name, text));
    }
    Ok(docs)
}

/// Parse a word-list file body: one token per line, `#` comments, blank
/// lines ignored. Tokens are lowercased.
pub fn parse_word_list(body: &str) -> HashSet<String> {
    body.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

/// Load a word list from disk.
pub fn load_word_list(path: &Path) -> Result<HashSet<String>> {
    let body = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_word_list(&body))
}

/// Lowercase, split on non-alphanumeric characters, and drop stop words.
/// Purely numeric fragments are kept.
pub fn tokenize(text: &str, stopwords: &HashSet<String>) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty() && !stopwords.contains(*t))
        .map(str::to_string)
        .collect()
}

/// Tokenize, stem, and apply the post-stemming exclusion list.
pub fn preprocess(text: &str, options: &PreprocessOptions) -> Vec<String> {
    tokenize(text, &options.stopwords)
        .iter()
        .map(|t| porter::stem(t))
        .filter(|s| !options.exclusions.contains(s))
        .collect()
}

/// Retain stems whose corpus-wide occurrences strictly exceed
/// `min_occurrences`, minus the exclusion list; sorted lexicographically.
pub fn build_vocabulary(
    docs: &[Document],
    min_occurrences: u64,
    exclusions: &HashSet<String>,
) -> Vocabulary {
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    let mut total_tokens = 0u64;
    for doc in docs {
        for token in &doc.tokens {
            *counts.entry(token.as_str()).or_insert(0) += 1;
            total_tokens += 1;
        }
    }
    let mut words = Vec::new();
    let mut total_occurrences = Vec::new();
    let mut retained_tokens = 0u64;
    for (word, count) in &counts {
        if *count > min_occurrences && !exclusions.contains(*word) {
            words.push((*word).to_string());
            total_occurrences.push(*count);
            retained_tokens += *count;
        }
    }
    let index = words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.clone(), i))
        .collect();
    let coverage = if total_tokens == 0 {
        0.0
    } else {
        retained_tokens as f64 / total_tokens as f64
    };
    Vocabulary {
        words,
        index,
        total_occurrences,
        coverage,
    }
}

/// Count in-vocabulary stems per document. Documents with no retained token
/// keep an (empty) row and are flagged.
pub fn build_matrix(docs: &[Document], vocab: &Vocabulary) -> DocTermMatrix {
    let mut rows = Vec::with_capacity(docs.len());
    let mut doc_ids = Vec::with_capacity(docs.len());
    let mut zero_rows = Vec::new();
    for (row_idx, doc) in docs.iter().enumerate() {
        let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
        for token in &doc.tokens {
            if let Some(&w) = vocab.index.get(token) {
                *counts.entry(w as u32).or_insert(0) += 1;
            }
        }
        if counts.is_empty() {
            zero_rows.push(row_idx);
        }
        rows.push(counts.into_iter().collect());
        doc_ids.push(doc.id);
    }
    DocTermMatrix {
        n_docs: docs.len(),
        n_words: vocab.len(),
        rows,
        doc_ids,
        zero_rows,
    }
}

/// Document and co-document frequencies over presence (count > 0).
/// When `word_subset` is given, only those words (and their pairs) are
/// indexed.
pub fn doc_frequencies(
    matrix: &DocTermMatrix,
    word_subset: Option<&HashSet<usize>>,
) -> DocumentFrequencyIndex {
    let mut df = vec![0u32; matrix.n_words];
    let mut co_df: HashMap<(u32, u32), u32> = HashMap::new();
    let keep = |w: u32| word_subset.is_none_or(|s| s.contains(&(w as usize)));
    for row in &matrix.rows {
        let present: Vec<u32> = row.iter().map(|&(w, _)| w).filter(|&w| keep(w)).collect();
        for (a, &i) in present.iter().enumerate() {
            df[i as usize] += 1;
            for &j in &present[a + 1..] {
                *co_df.entry((i, j)).or_insert(0) += 1;
            }
        }
    }
    DocumentFrequencyIndex { df, co_df }
}

/// Write the matrix as `doc_id,word,count` triples.
pub fn export_matrix(corpus: &Corpus, path: &Path) -> Result<()> {
    let mut out = String::from("doc_id,word,count\n");
    for (row, entries) in corpus.matrix.rows.iter().enumerate() {
        let doc_id = corpus.matrix.doc_ids[row];
        for &(w, c) in entries {
            out.push_str(&format!(
                "{doc_id},{},{c}\n",
                corpus.vocabulary.words[w as usize]
            ));
        }
    }
    write_file(path, out.as_bytes())
}

/// Write the vocabulary as `word,total_occurrences,document_frequency`.
pub fn export_vocabulary(corpus: &Corpus, path: &Path) -> Result<()> {
    // Plain presence counts; the pairwise table is not needed here.
    let mut df = vec![0u32; corpus.matrix.n_words];
    for row in &corpus.matrix.rows {
        for &(w, _) in row {
            df[w as usize] += 1;
        }
    }
    let mut out = String::from("word,total_occurrences,document_frequency\n");
    for (i, word) in corpus.vocabulary.words.iter().enumerate() {
        out.push_str(&format!(
            "{word},{},{}\n",
            corpus.vocabulary.total_occurrences[i], df[i]
        ));
    }
    write_file(path, out.as_bytes())
}

/// Create (or truncate) `path` and write `bytes`.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(bytes).map_err(|e| Error::io(path, e))
}
