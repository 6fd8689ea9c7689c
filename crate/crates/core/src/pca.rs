//! Factor analysis of the word-document matrix: Pearson correlation over
//! word-count columns, symmetric eigendecomposition, Varimax-rotated
//! loadings, regression factor scores, and word-to-factor classification.

use crate::corpus::DocTermMatrix;
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, SymmetricEigen};
use crate::scalar::{from_f64, from_i64, from_usize, Real};
use crate::topics::{rank_top_indices, TopicTopWords, WordAssignment};

/// Varimax convergence settings pinned by the contract.
const VARIMAX_RELATIVE_TOL: f64 = 1e-6;
const VARIMAX_MAX_SWEEPS: usize = 1000;

/// Pearson correlations between word-count columns. Zero-variance columns
/// are dropped before the matrix is formed; `kept_columns` maps the local
/// indices back to vocabulary indices.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix<T> {
    pub dim: usize,
    /// Row-major symmetric buffer with unit diagonal.
    pub values: Vec<T>,
    /// Vocabulary index of each retained column.
    pub kept_columns: Vec<usize>,
    /// Vocabulary indices dropped for zero variance.
    pub dropped_columns: Vec<usize>,
}

impl<T: Real> CorrelationMatrix<T> {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.dim + j]
    }
}

/// Full spectrum of a correlation matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct EigenDecomposition<T> {
    pub eigenvalues: Vec<T>,
    pub eigen: SymmetricEigen<T>,
}

/// Rotated factor solution over the retained word columns.
#[derive(Debug, Clone)]
pub struct FactorModel<T> {
    /// Retained factor count.
    pub k: usize,
    /// Row-major `n_words x k` rotated loadings (rows follow `kept_columns`).
    pub loadings: Vec<T>,
    /// The k retained eigenvalues.
    pub eigenvalues: Vec<T>,
    /// Fraction of total variance carried by the retained factors.
    pub explained_variance: T,
    /// Final value of the Varimax criterion.
    pub rotation_criterion: T,
    /// Full eigenvalue list (scree data), descending.
    pub scree: Vec<T>,
    /// Number of eigenvalues > 1.0 in the full spectrum.
    pub kaiser_count: usize,
    /// Vocabulary index per loading row.
    pub kept_columns: Vec<usize>,
    /// Vocabulary indices excluded for zero variance.
    pub dropped_columns: Vec<usize>,
}

impl<T: Real> FactorModel<T> {
    #[inline]
    pub fn loading(&self, word_row: usize, factor: usize) -> T {
        self.loadings[word_row * self.k + factor]
    }

    pub fn n_words(&self) -> usize {
        self.kept_columns.len()
    }
}

/// Standardized regression factor scores, one row per document.
#[derive(Debug, Clone)]
pub struct FactorScores<T> {
    pub n_docs: usize,
    pub k: usize,
    /// Row-major `n_docs x k`.
    pub scores: Vec<T>,
}

impl<T: Real> FactorScores<T> {
    #[inline]
    pub fn get(&self, doc: usize, factor: usize) -> T {
        self.scores[doc * self.k + factor]
    }
}

/// How factor top-word lists are ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoadingRank {
    /// Largest signed loading first (table-style presentation).
    #[default]
    Signed,
    /// Largest absolute loading first.
    Absolute,
}

/// Pearson correlation matrix over raw count columns. Requires at least two
/// documents; zero-variance columns are dropped and reported.
pub fn correlation_matrix<T: Real>(matrix: &DocTermMatrix) -> Result<CorrelationMatrix<T>> {
    let n = matrix.n_docs;
    if n < 2 {
        return Err(Error::input(
            "correlation requires at least two documents",
        ));
    }
    let gram = matrix.column_gram();
    let n_i64 = n as i64;

    // Integer numerators: n*Sxx - Sx^2 is exactly zero for constant columns.
    let mut kept_columns = Vec::new();
    let mut dropped_columns = Vec::new();
    let mut scale = Vec::new(); // sqrt(n*Sxx - Sx^2) per kept column
    for j in 0..matrix.n_words {
        let var_num = n_i64 * gram.dot(j, j) - gram.sum[j] * gram.sum[j];
        if var_num == 0 {
            dropped_columns.push(j);
        } else {
            kept_columns.push(j);
            scale.push(from_i64::<T>(var_num).sqrt());
        }
    }

    let dim = kept_columns.len();
    let mut values = vec![T::zero(); dim * dim];
    for a in 0..dim {
        values[a * dim + a] = T::one();
        for b in (a + 1)..dim {
            let (i, j) = (kept_columns[a], kept_columns[b]);
            let cov_num = n_i64 * gram.dot(i, j) - gram.sum[i] * gram.sum[j];
            let mut r = from_i64::<T>(cov_num) / (scale[a] * scale[b]);
            r = r.min(T::one()).max(-T::one());
            values[a * dim + b] = r;
            values[b * dim + a] = r;
        }
    }

    Ok(CorrelationMatrix {
        dim,
        values,
        kept_columns,
        dropped_columns,
    })
}

/// Full eigendecomposition of a correlation matrix, eigenvalues descending,
/// each eigenvector's largest-magnitude entry made positive.
pub fn eigendecompose<T: Real>(corr: &CorrelationMatrix<T>) -> Result<EigenDecomposition<T>> {
    let eigen = symmetric_eigen(corr.dim, &corr.values)?;
    Ok(EigenDecomposition {
        eigenvalues: eigen.eigenvalues.clone(),
        eigen,
    })
}

/// Varimax criterion of a row-major `rows x k` loading matrix: the sum over
/// factors of the variance of the squared loadings.
pub fn varimax_criterion<T: Real>(loadings: &[T], rows: usize, k: usize) -> T {
    if rows == 0 {
        return T::zero();
    }
    let n = from_usize::<T>(rows);
    let mut total = T::zero();
    for f in 0..k {
        let mut sum_sq = T::zero();
        let mut sum_quad = T::zero();
        for r in 0..rows {
            let x = loadings[r * k + f];
            sum_sq = sum_sq + x * x;
            sum_quad = sum_quad + x * x * x * x;
        }
        total = total + (sum_quad / n - (sum_sq / n) * (sum_sq / n));
    }
    total
}

/// Result of a Varimax rotation.
#[derive(Debug, Clone)]
pub struct Varimax<T> {
    /// Denormalized rotated loadings.
    pub loadings: Vec<T>,
    /// Criterion of the rotated (denormalized) loadings.
    pub criterion: T,
    /// Criterion in the Kaiser-normalized space before iteration and after
    /// each sweep; non-decreasing.
    pub sweep_criteria: Vec<T>,
}

/// Varimax rotation with Kaiser row-normalization. Pairwise planar rotations
/// are iterated until the relative criterion change drops below 1e-6 or 1000
/// sweeps have run.
pub fn varimax<T: Real>(loadings: &[T], rows: usize, k: usize) -> Varimax<T> {
    let mut a = loadings.to_vec();
    if k <= 1 || rows == 0 {
        let criterion = varimax_criterion(&a, rows, k);
        return Varimax {
            loadings: a,
            criterion,
            sweep_criteria: vec![criterion],
        };
    }

    // Kaiser normalization: scale each row to unit communality.
    let mut row_norm = vec![T::one(); rows];
    for r in 0..rows {
        let h: T = (0..k).map(|f| a[r * k + f] * a[r * k + f]).sum();
        let h = h.sqrt();
        if h > T::zero() {
            row_norm[r] = h;
            for f in 0..k {
                a[r * k + f] = a[r * k + f] / h;
            }
        }
    }

    let tol = from_f64::<T>(VARIMAX_RELATIVE_TOL);
    let quarter = from_f64::<T>(0.25);
    let tiny = from_f64::<T>(1e-30);
    let n = from_usize::<T>(rows);
    let mut criterion = varimax_criterion(&a, rows, k);
    let mut sweep_criteria = vec![criterion];
    for _sweep in 0..VARIMAX_MAX_SWEEPS {
        for p in 0..k - 1 {
            for q in p + 1..k {
                let mut sum_u = T::zero();
                let mut sum_v = T::zero();
                let mut sum_u2_v2 = T::zero();
                let mut sum_2uv = T::zero();
                for r in 0..rows {
                    let x = a[r * k + p];
                    let y = a[r * k + q];
                    let u = x * x - y * y;
                    let v = (x * y) + (x * y);
                    sum_u = sum_u + u;
                    sum_v = sum_v + v;
                    sum_u2_v2 = sum_u2_v2 + (u * u - v * v);
                    sum_2uv = sum_2uv + (u * v) + (u * v);
                }
                let num = sum_2uv - (sum_u + sum_u) * sum_v / n;
                let den = sum_u2_v2 - (sum_u * sum_u - sum_v * sum_v) / n;
                if num.abs() <= tiny && den.abs() <= tiny {
                    continue;
                }
                let angle = quarter * num.atan2(den);
                if angle.abs() <= from_f64::<T>(1e-15) {
                    continue;
                }
                let (sin, cos) = (angle.sin(), angle.cos());
                for r in 0..rows {
                    let x = a[r * k + p];
                    let y = a[r * k + q];
                    a[r * k + p] = cos * x + sin * y;
                    a[r * k + q] = -sin * x + cos * y;
                }
            }
        }
        let new_criterion = varimax_criterion(&a, rows, k);
        sweep_criteria.push(new_criterion);
        let reference = criterion.abs().max(tiny);
        let done = (new_criterion - criterion).abs() / reference < tol;
        criterion = new_criterion;
        if done {
            break;
        }
    }

    // Undo the Kaiser normalization.
    for r in 0..rows {
        for f in 0..k {
            a[r * k + f] = a[r * k + f] * row_norm[r];
        }
    }
    let criterion = varimax_criterion(&a, rows, k);
    Varimax {
        loadings: a,
        criterion,
        sweep_criteria,
    }
}

/// Fit a rotated factor model. `k = None` applies the Kaiser criterion
/// (eigenvalues > 1.0); an explicit k overrides it.
pub fn fit_pca<T: Real>(matrix: &DocTermMatrix, k: Option<usize>) -> Result<FactorModel<T>> {
    let corr = correlation_matrix::<T>(matrix)?;
    if corr.dim == 0 {
        return Err(Error::input("no word column has nonzero variance"));
    }
    let decomposition = eigendecompose(&corr)?;
    let scree = decomposition.eigenvalues.clone();
    let kaiser_count = scree.iter().filter(|&&v| v > T::one()).count();

    // Components with numerically positive eigenvalues are available.
    let lambda_max = scree[0].max(T::zero());
    let rank_tol = lambda_max * from_f64::<T>(1e-10);
    let available = scree.iter().filter(|&&v| v > rank_tol).count();

    let k = match k {
        Some(0) => return Err(Error::input("factor count must be positive")),
        Some(k) if k > available => {
            return Err(Error::input(format!(
                "requested {k} factors but only {available} components are available"
            )));
        }
        Some(k) => k,
        None => kaiser_count.clamp(1, available),
    };

    // Unrotated loadings: eigenvector columns scaled by sqrt(eigenvalue).
    let dim = corr.dim;
    let mut loadings = vec![T::zero(); dim * k];
    for f in 0..k {
        let scale = scree[f].max(T::zero()).sqrt();
        for r in 0..dim {
            loadings[r * k + f] = decomposition.eigen.vector_entry(f, r) * scale;
        }
    }
    let rotation = varimax(&loadings, dim, k);

    let retained: T = scree.iter().take(k).copied().sum();
    let explained_variance = retained / from_usize::<T>(dim);

    Ok(FactorModel {
        k,
        loadings: rotation.loadings,
        eigenvalues: scree.iter().take(k).copied().collect(),
        explained_variance,
        rotation_criterion: rotation.criterion,
        scree,
        kaiser_count,
        kept_columns: corr.kept_columns,
        dropped_columns: corr.dropped_columns,
    })
}

/// Regression-method factor scores: standardized counts times R^-1 L, with a
/// pseudo-inverse when the correlation matrix is singular. Score columns
/// have zero mean.
#[allow(clippy::needless_range_loop)] // parallel-array indexing
pub fn factor_scores<T: Real>(
    matrix: &DocTermMatrix,
    model: &FactorModel<T>,
) -> Result<FactorScores<T>> {
    let corr = correlation_matrix::<T>(matrix)?;
    if corr.kept_columns != model.kept_columns {
        return Err(Error::input(
            "matrix columns do not match the fitted model",
        ));
    }
    let dim = corr.dim;
    let k = model.k;
    let eigen = symmetric_eigen(dim, &corr.values)?;

    // B = R^+ L via the spectral pseudo-inverse.
    let lambda_max = eigen.eigenvalues[0].max(T::zero());
    let cutoff = lambda_max * from_f64::<T>(1e-10);
    let mut b = vec![T::zero(); dim * k];
    for e in 0..dim {
        let lambda = eigen.eigenvalues[e];
        if lambda <= cutoff {
            continue;
        }
        // Coefficients v_e^T L, one per factor.
        let mut coef = vec![T::zero(); k];
        for r in 0..dim {
            let ve = eigen.vector_entry(e, r);
            for f in 0..k {
                coef[f] = coef[f] + ve * model.loadings[r * k + f];
            }
        }
        for r in 0..dim {
            let ve = eigen.vector_entry(e, r) / lambda;
            for f in 0..k {
                b[r * k + f] = b[r * k + f] + ve * coef[f];
            }
        }
    }

    // Column standardization constants (sample convention, matching Pearson).
    let n = matrix.n_docs;
    let gram = matrix.column_gram();
    let n_t = from_usize::<T>(n);
    let mut mean = vec![T::zero(); dim];
    let mut sd = vec![T::one(); dim];
    for (local, &word) in corr.kept_columns.iter().enumerate() {
        mean[local] = from_i64::<T>(gram.sum[word]) / n_t;
        let var_num = from_i64::<T>((n as i64) * gram.dot(word, word))
            - from_i64::<T>(gram.sum[word] * gram.sum[word]);
        sd[local] = (var_num / (n_t * (n_t - T::one()))).sqrt();
    }

    let word_to_local: std::collections::HashMap<usize, usize> = corr
        .kept_columns
        .iter()
        .enumerate()
        .map(|(local, &word)| (word, local))
        .collect();

    // scores = Z B, using sparsity: Z = (X - mean)/sd, so
    // score[d] = sum_j x_dj/sd_j * B_j - sum_j mean_j/sd_j * B_j.
    let mut base = vec![T::zero(); k];
    for local in 0..dim {
        let m = mean[local] / sd[local];
        for f in 0..k {
            base[f] = base[f] - m * b[local * k + f];
        }
    }
    let mut scores = vec![T::zero(); n * k];
    for (row, entries) in matrix.rows.iter().enumerate() {
        let out = &mut scores[row * k..(row + 1) * k];
        out.copy_from_slice(&base);
        for &(w, c) in entries {
            if let Some(&local) = word_to_local.get(&(w as usize)) {
                let z = from_usize::<T>(c as usize) / sd[local];
                for f in 0..k {
                    out[f] = out[f] + z * b[local * k + f];
                }
            }
        }
    }

    Ok(FactorScores {
        n_docs: n,
        k,
        scores,
    })
}

/// Per-factor top-S words. `Signed` ranks by raw loading, `Absolute` by
/// magnitude; exact ties prefer the lower vocabulary index.
pub fn factor_top_words<T: Real>(
    model: &FactorModel<T>,
    vocabulary: &[String],
    s: usize,
    rank: LoadingRank,
) -> Result<TopicTopWords> {
    let rows = model.n_words();
    if s > rows {
        return Err(Error::input(format!(
            "requested {s} top words but the model covers {rows}"
        )));
    }
    let mut topics = Vec::with_capacity(model.k);
    for f in 0..model.k {
        let scores: Vec<T> = (0..rows)
            .map(|r| match rank {
                LoadingRank::Signed => model.loading(r, f),
                LoadingRank::Absolute => model.loading(r, f).abs(),
            })
            .collect();
        let top = rank_top_indices(&scores, s);
        topics.push(
            top.into_iter()
                .map(|r| vocabulary[model.kept_columns[r]].clone())
                .collect(),
        );
    }
    Ok(TopicTopWords { topics })
}

/// Map each retained word to the factor with the largest absolute loading;
/// ties resolve to the lowest factor index. Dropped columns get no factor.
pub fn word_assignment_pca<T: Real>(
    model: &FactorModel<T>,
    vocabulary: &[String],
) -> WordAssignment {
    let mut assignment = WordAssignment::new();
    for (r, &word) in model.kept_columns.iter().enumerate() {
        let mut best = 0;
        for f in 1..model.k {
            if model.loading(r, f).abs() > model.loading(r, best).abs() {
                best = f;
            }
        }
        assignment.insert(vocabulary[word].clone(), best);
    }
    assignment
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Corpus, PreprocessOptions};

    /// Dense matrix from explicit per-document count rows.
    fn matrix_from_rows(rows: &[Vec<u32>]) -> DocTermMatrix {
        let n_words = rows[0].len();
        DocTermMatrix {
            n_docs: rows.len(),
            n_words,
            rows: rows
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|(_, &c)| c > 0)
                        .map(|(w, &c)| (w as u32, c))
                        .collect()
                })
                .collect(),
            doc_ids: (0..rows.len()).collect(),
            zero_rows: Vec::new(),
        }
    }

    #[test]
    fn correlation_hand_cases() {
        // col0 = (1,2,3), col1 = (2,4,6) perfectly dependent, col2 = (3,2,1) reversed.
        let m = matrix_from_rows(&[vec![1, 2, 3], vec![2, 4, 2], vec![3, 6, 1]]);
        let corr = correlation_matrix::<f64>(&m).unwrap();
        assert!((corr.get(0, 0) - 1.0).abs() < 1e-15);
        assert!((corr.get(0, 1) - 1.0).abs() < 1e-12);
        assert!((corr.get(0, 2) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_variance_column_dropped() {
        let m = matrix_from_rows(&[vec![1, 5, 2], vec![2, 5, 1], vec![3, 5, 3]]);
        let corr = correlation_matrix::<f64>(&m).unwrap();
        assert_eq!(corr.dropped_columns, vec![1]);
        assert_eq!(corr.kept_columns, vec![0, 2]);
        assert_eq!(corr.dim, 2);
    }

    #[test]
    fn correlation_needs_two_documents() {
        let m = matrix_from_rows(&[vec![1, 2]]);
        assert!(correlation_matrix::<f64>(&m).is_err());
    }

    #[test]
    fn eigen_trace_matches_dimension() {
        let texts: Vec<String> = (0..40)
            .map(|i| format!("w{} w{} w{}", i % 5, (i * 2) % 7, (i * 3) % 4))
            .collect();
        let corpus = Corpus::build(&texts, PreprocessOptions::keep_everything());
        let corr = correlation_matrix::<f64>(&corpus.matrix).unwrap();
        let eig = eigendecompose(&corr).unwrap();
        let sum: f64 = eig.eigenvalues.iter().sum();
        assert!((sum - corr.dim as f64).abs() < 1e-6);
    }

    #[test]
    fn varimax_identity_is_a_fixed_point() {
        let loadings: Vec<f64> = vec![1.0, 0.0, 0.0, 1.0];
        let rotated = varimax(&loadings, 2, 2).loadings;
        for (a, b) in rotated.iter().zip(&loadings) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn varimax_recovers_simple_structure_from_45_degrees() {
        let c = std::f64::consts::FRAC_1_SQRT_2;
        let loadings = vec![c, c, c, -c];
        let before = varimax_criterion(&loadings, 2, 2);
        let rotation = varimax(&loadings, 2, 2);
        let (rotated, after) = (rotation.loadings, rotation.criterion);
        assert!(after > before);
        for w in rotation.sweep_criteria.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
        // Up to column permutation and sign: each row hits (1, 0) or (0, 1).
        for r in 0..2 {
            let a = rotated[r * 2].abs();
            let b = rotated[r * 2 + 1].abs();
            let (hi, lo) = if a > b { (a, b) } else { (b, a) };
            assert!((hi - 1.0).abs() < 1e-9, "row {r}: {rotated:?}");
            assert!(lo.abs() < 1e-9);
        }
    }

    #[test]
    fn varimax_preserves_communalities() {
        let loadings: Vec<f64> =
            vec![0.8, 0.1, 0.3, 0.55, 0.2, 0.61, 0.4, 0.4, 0.1, 0.9, 0.05, 0.3];
        let rows = 4;
        let k = 3;
        let rotated = varimax(&loadings, rows, k).loadings;
        for r in 0..rows {
            let h0: f64 = (0..k).map(|f| loadings[r * k + f].powi(2)).sum();
            let h1: f64 = (0..k).map(|f| rotated[r * k + f].powi(2)).sum();
            assert!((h0 - h1).abs() < 1e-8);
        }
    }

    #[test]
    fn varimax_k1_unchanged() {
        let loadings: Vec<f64> = vec![0.3, -0.4, 0.8];
        let rotated = varimax(&loadings, 3, 1).loadings;
        assert_eq!(rotated, loadings);
    }

    #[test]
    fn explained_variance_two_by_two_hand_case() {
        // Correlation [[1, .5], [.5, 1]] -> eigenvalues (1.5, 0.5); k=1 -> 0.75.
        // Build counts whose correlation is exactly 0.5:
        // col0 = (2,1,1,0), col1 = (2,1,0,1): n=4, Sx=Sy=4, Sxx=Syy=6, Sxy=5
        // r = (4*5-16)/sqrt((24-16)(24-16)) = 4/8 = 0.5.
        let m = matrix_from_rows(&[vec![2, 2], vec![1, 1], vec![1, 0], vec![0, 1]]);
        let corr = correlation_matrix::<f64>(&m).unwrap();
        assert!((corr.get(0, 1) - 0.5).abs() < 1e-15);
        let model = fit_pca::<f64>(&m, Some(1)).unwrap();
        assert!((model.explained_variance - 0.75).abs() < 1e-12);
        assert!((model.eigenvalues[0] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn full_rank_fit_explains_everything_and_reconstructs() {
        // Varying document lengths keep the count columns linearly
        // independent after centering.
        let texts: Vec<String> = (0..60)
            .map(|i| {
                let mut doc = format!("w{} w{} w{}", i % 5, (i * 2 + 1) % 7, (i * 3) % 4);
                if i % 3 == 0 {
                    doc.push_str(&format!(" w{} w{}", (i * 5) % 6, i % 7));
                }
                if i % 4 == 1 {
                    doc.push_str(" w0");
                }
                doc
            })
            .collect();
        let corpus = Corpus::build(&texts, PreprocessOptions::keep_everything());
        let corr = correlation_matrix::<f64>(&corpus.matrix).unwrap();
        let model = fit_pca::<f64>(&corpus.matrix, Some(corr.dim)).unwrap();
        assert!((model.explained_variance - 1.0).abs() < 1e-8);

        // loadings * loadings^T reproduces the correlation matrix.
        let k = model.k;
        for i in 0..corr.dim {
            for j in 0..corr.dim {
                let recon: f64 = (0..k).map(|f| model.loading(i, f) * model.loading(j, f)).sum();
                assert!(
                    (recon - corr.get(i, j)).abs() < 1e-6,
                    "entry ({i},{j}): {recon} vs {}",
                    corr.get(i, j)
                );
            }
        }
    }

    #[test]
    fn k_beyond_rank_is_an_error() {
        let m = matrix_from_rows(&[vec![1, 2], vec![2, 4], vec![3, 6]]);
        // Columns are collinear: rank 1.
        assert!(fit_pca::<f64>(&m, Some(2)).is_err());
        assert!(fit_pca::<f64>(&m, Some(1)).is_ok());
    }

    #[test]
    fn communalities_never_exceed_one() {
        let texts: Vec<String> = (0..40)
            .map(|i| {
                let mut doc = format!("w{} w{} w{}", i % 6, (i * 2) % 7, (i * 5) % 9);
                if i % 2 == 0 {
                    doc.push_str(&format!(" w{}", i % 4));
                }
                doc
            })
            .collect();
        let corpus = Corpus::build(&texts, PreprocessOptions::keep_everything());
        for k in [1usize, 2, 4] {
            let model = fit_pca::<f64>(&corpus.matrix, Some(k)).unwrap();
            for r in 0..model.n_words() {
                let h: f64 = (0..model.k).map(|f| model.loading(r, f).powi(2)).sum();
                assert!(h <= 1.0 + 1e-8, "k={k} row {r}: communality {h}");
            }
        }
    }

    #[test]
    fn kaiser_count_matches_brute_force() {
        let texts: Vec<String> = (0..50)
            .map(|i| format!("w{} w{} v{}", i % 6, (i * 3) % 8, (i * 7) % 5))
            .collect();
        let corpus = Corpus::build(&texts, PreprocessOptions::keep_everything());
        let model = fit_pca::<f64>(&corpus.matrix, Some(2)).unwrap();
        let brute = model.scree.iter().filter(|&&v| v > 1.0).count();
        assert_eq!(model.kaiser_count, brute);
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn identity_structure_scores_equal_standardized_counts() {
        // Orthogonal unit-correlation columns: r = 0 exactly.
        let m = matrix_from_rows(&[vec![1, 1], vec![2, 1], vec![1, 3], vec![2, 3]]);
        let corr = correlation_matrix::<f64>(&m).unwrap();
        assert!(corr.get(0, 1).abs() < 1e-15);
        let model = fit_pca::<f64>(&m, Some(2)).unwrap();
        let scores = factor_scores(&m, &model).unwrap();

        // The identity correlation keeps identity loadings, so the scores
        // are exactly the standardized counts (sample sd).
        for f in 0..2 {
            assert!((model.loading(f, f) - 1.0).abs() < 1e-12);
        }
        let cols = [[1.0, 2.0, 1.0, 2.0], [1.0, 1.0, 3.0, 3.0]];
        for (f, col) in cols.iter().enumerate() {
            let mean = col.iter().sum::<f64>() / 4.0;
            let sd = (col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 3.0).sqrt();
            for d in 0..4 {
                let expected = (col[d] - mean) / sd;
                assert!(
                    (scores.get(d, f) - expected).abs() < 1e-8,
                    "doc {d} factor {f}"
                );
            }
        }
    }

    #[test]
    fn score_columns_are_centered() {
        let texts: Vec<String> = (0..30)
            .map(|i| format!("w{} w{} w{}", i % 4, (i * 2) % 5, (i * 3) % 7))
            .collect();
        let corpus = Corpus::build(&texts, PreprocessOptions::keep_everything());
        let model = fit_pca::<f64>(&corpus.matrix, Some(3)).unwrap();
        let scores = factor_scores(&corpus.matrix, &model).unwrap();
        for f in 0..model.k {
            let mean: f64 =
                (0..scores.n_docs).map(|d| scores.get(d, f)).sum::<f64>() / scores.n_docs as f64;
            assert!(mean.abs() < 1e-8, "factor {f} mean {mean}");
        }
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn hand_two_variable_scores() {
        // 2 variables, perfect anticorrelation is avoided; verify Z * R^-1 * L
        // against explicit arithmetic on a correlation 0.5 matrix with k=2.
        let m = matrix_from_rows(&[vec![2, 2], vec![1, 1], vec![1, 0], vec![0, 1]]);
        let model = fit_pca::<f64>(&m, Some(2)).unwrap();
        let scores = factor_scores(&m, &model).unwrap();

        // Explicit: R = [[1,.5],[.5,1]], R^-1 = (1/.75)[[1,-.5],[-.5,1]].
        let r_inv = [
            [1.0 / 0.75, -0.5 / 0.75],
            [-0.5 / 0.75, 1.0 / 0.75],
        ];
        let l = [
            [model.loading(0, 0), model.loading(0, 1)],
            [model.loading(1, 0), model.loading(1, 1)],
        ];
        let mut b = [[0.0; 2]; 2];
        for i in 0..2 {
            for f in 0..2 {
                for j in 0..2 {
                    b[i][f] += r_inv[i][j] * l[j][f];
                }
            }
        }
        let cols = [[2.0, 1.0, 1.0, 0.0], [2.0, 1.0, 0.0, 1.0]];
        let means = [1.0, 1.0];
        let sds = [
            (cols[0].iter().map(|x| (x - 1.0f64).powi(2)).sum::<f64>() / 3.0).sqrt(),
            (cols[1].iter().map(|x| (x - 1.0f64).powi(2)).sum::<f64>() / 3.0).sqrt(),
        ];
        for d in 0..4 {
            for f in 0..2 {
                let mut expected = 0.0;
                for j in 0..2 {
                    expected += (cols[j][d] - means[j]) / sds[j] * b[j][f];
                }
                assert!(
                    (scores.get(d, f) - expected).abs() < 1e-10,
                    "doc {d} factor {f}"
                );
            }
        }
    }

    #[test]
    fn top_words_ranking_and_ties() {
        let vocab: Vec<String> = ["apple", "berry", "citrus"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let model = FactorModel {
            k: 1,
            loadings: vec![0.9, 0.1, 0.5],
            eigenvalues: vec![1.0],
            explained_variance: 0.3,
            rotation_criterion: 0.0,
            scree: vec![1.0],
            kaiser_count: 1,
            kept_columns: vec![0, 1, 2],
            dropped_columns: vec![],
        };
        let top = factor_top_words(&model, &vocab, 2, LoadingRank::Signed).unwrap();
        assert_eq!(top.topics[0], vec!["apple".to_string(), "citrus".to_string()]);
        assert!(factor_top_words(&model, &vocab, 4, LoadingRank::Signed).is_err());
    }

    #[test]
    fn signed_vs_absolute_ranking() {
        let vocab: Vec<String> = ["neg", "pos"].iter().map(|s| s.to_string()).collect();
        let model = FactorModel {
            k: 1,
            loadings: vec![-0.95, 0.9],
            eigenvalues: vec![1.0],
            explained_variance: 0.5,
            rotation_criterion: 0.0,
            scree: vec![1.0],
            kaiser_count: 1,
            kept_columns: vec![0, 1],
            dropped_columns: vec![],
        };
        let signed = factor_top_words(&model, &vocab, 1, LoadingRank::Signed).unwrap();
        assert_eq!(signed.topics[0], vec!["pos".to_string()]);
        let absolute = factor_top_words(&model, &vocab, 1, LoadingRank::Absolute).unwrap();
        assert_eq!(absolute.topics[0], vec!["neg".to_string()]);
    }

    #[test]
    fn assignment_uses_absolute_loading_with_tie_rule() {
        let vocab: Vec<String> = ["alpha", "beta"].iter().map(|s| s.to_string()).collect();
        let model = FactorModel {
            k: 2,
            loadings: vec![0.9, -0.95, 0.0, 0.0],
            eigenvalues: vec![1.0, 1.0],
            explained_variance: 0.5,
            rotation_criterion: 0.0,
            scree: vec![1.0, 1.0],
            kaiser_count: 2,
            kept_columns: vec![0, 1],
            dropped_columns: vec![],
        };
        let assignment = word_assignment_pca(&model, &vocab);
        assert_eq!(assignment["alpha"], 1); // |-0.95| > 0.9
        assert_eq!(assignment["beta"], 0); // degenerate row -> factor 0
    }

    #[test]
    fn assignment_invariant_under_column_sign_flip() {
        let vocab: Vec<String> = (0..4).map(|i| format!("w{i}")).collect();
        let loadings = vec![0.7, 0.2, -0.3, 0.6, 0.5, -0.5, 0.1, 0.8];
        let model = FactorModel {
            k: 2,
            loadings: loadings.clone(),
            eigenvalues: vec![1.0, 1.0],
            explained_variance: 0.5,
            rotation_criterion: 0.0,
            scree: vec![1.0, 1.0],
            kaiser_count: 2,
            kept_columns: vec![0, 1, 2, 3],
            dropped_columns: vec![],
        };
        let flipped = FactorModel {
            loadings: loadings
                .iter()
                .enumerate()
                .map(|(i, &x)| if i % 2 == 1 { -x } else { x })
                .collect(),
            ..model.clone()
        };
        assert_eq!(
            word_assignment_pca(&model, &vocab),
            word_assignment_pca(&flipped, &vocab)
        );
    }
}
