//! Dense symmetric eigendecomposition.
//!
//! Householder reduction to tridiagonal form followed by the implicit-shift
//! QL iteration, the classic EISPACK tred2/tql2 pair. Deterministic for a
//! fixed input; accuracy is far inside the 1e-8 residual contract for the
//! well-conditioned correlation matrices this crate produces.

use crate::error::{Error, Result};
use crate::scalar::{from_usize, Real};

/// Eigenvalues (descending) with matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    pub dim: usize,
    /// Descending eigenvalues.
    pub eigenvalues: Vec<T>,
    /// Column-major eigenvectors: column k pairs with `eigenvalues[k]`.
    vectors: Vec<T>,
}

impl<T: Real> SymmetricEigen<T> {
    /// Entry i of eigenvector k.
    #[inline]
    pub fn vector_entry(&self, k: usize, i: usize) -> T {
        self.vectors[k * self.dim + i]
    }

    pub fn vector(&self, k: usize) -> &[T] {
        &self.vectors[k * self.dim..(k + 1) * self.dim]
    }
}

/// Decompose a dense symmetric matrix given in row-major order.
pub fn symmetric_eigen<T: Real>(dim: usize, matrix: &[T]) -> Result<SymmetricEigen<T>> {
    if dim == 0 {
        return Err(Error::input("cannot decompose an empty matrix"));
    }
    if matrix.len() != dim * dim {
        return Err(Error::input("matrix buffer does not match dimension"));
    }
    for i in 0..dim {
        for j in 0..i {
            if matrix[i * dim + j] != matrix[j * dim + i] {
                return Err(Error::input("matrix is not symmetric"));
            }
        }
    }

    // v holds the matrix, then accumulates the transformations; row-major.
    let mut v = matrix.to_vec();
    let mut d = vec![T::zero(); dim];
    let mut e = vec![T::zero(); dim];
    tred2(dim, &mut v, &mut d, &mut e);
    tql2(dim, &mut v, &mut d, &mut e)?;

    // Ascending from tql2; reorder to descending.
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| d[b].partial_cmp(&d[a]).unwrap_or(std::cmp::Ordering::Equal));

    let mut eigenvalues = Vec::with_capacity(dim);
    let mut vectors = vec![T::zero(); dim * dim];
    for (k, &src) in order.iter().enumerate() {
        eigenvalues.push(d[src]);
        for i in 0..dim {
            vectors[k * dim + i] = v[i * dim + src];
        }
        fix_sign(&mut vectors[k * dim..(k + 1) * dim]);
    }

    Ok(SymmetricEigen {
        dim,
        eigenvalues,
        vectors,
    })
}

/// Make the largest-magnitude entry positive (first such entry on ties).
fn fix_sign<T: Real>(column: &mut [T]) {
    let mut best = 0;
    for (i, x) in column.iter().enumerate() {
        if x.abs() > column[best].abs() {
            best = i;
        }
    }
    if column[best] < T::zero() {
        for x in column.iter_mut() {
            *x = -*x;
        }
    }
}

/// Householder reduction of a real symmetric matrix to tridiagonal form.
#[allow(clippy::needless_range_loop)] // index loops mirror the reference routine
fn tred2<T: Real>(n: usize, v: &mut [T], d: &mut [T], e: &mut [T]) {
    for j in 0..n {
        d[j] = v[(n - 1) * n + j];
    }

    for i in (1..n).rev() {
        // Scale to avoid under/overflow.
        let mut scale = T::zero();
        let mut h = T::zero();
        for k in 0..i {
            scale = scale + d[k].abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1) * n + j];
                v[i * n + j] = T::zero();
                v[j * n + i] = T::zero();
            }
        } else {
            // Generate Householder vector.
            for k in 0..i {
                d[k] = d[k] / scale;
                h = h + d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h = h - f * g;
            d[i - 1] = f - g;
            for j in 0..i {
                e[j] = T::zero();
            }

            // Apply similarity transformation to remaining columns.
            for j in 0..i {
                f = d[j];
                v[j * n + i] = f;
                g = e[j] + v[j * n + j] * f;
                for k in (j + 1)..i {
                    g = g + v[k * n + j] * d[k];
                    e[k] = e[k] + v[k * n + j] * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] = e[j] / h;
                f = f + e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] = e[j] - hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k * n + j] = v[k * n + j] - (f * e[k] + g * d[k]);
                }
                d[j] = v[(i - 1) * n + j];
                v[i * n + j] = T::zero();
            }
        }
        d[i] = h;
    }

    // Accumulate transformations.
    for i in 0..n.saturating_sub(1) {
        v[(n - 1) * n + i] = v[i * n + i];
        v[i * n + i] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v[k * n + i + 1] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g = g + v[k * n + i + 1] * v[k * n + j];
                }
                for k in 0..=i {
                    v[k * n + j] = v[k * n + j] - g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[k * n + i + 1] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1) * n + j];
        v[(n - 1) * n + j] = T::zero();
    }
    v[(n - 1) * n + (n - 1)] = T::one();
    e[0] = T::zero();
}

/// Implicit-shift QL iteration on the tridiagonal form.
#[allow(clippy::needless_range_loop)]
fn tql2<T: Real>(n: usize, v: &mut [T], d: &mut [T], e: &mut [T]) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();

    let mut f = T::zero();
    let mut tst1 = T::zero();
    let eps = T::epsilon();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }

        if m > l {
            let mut iterations = 0;
            loop {
                iterations += 1;
                if iterations > 80 {
                    return Err(Error::numeric("eigenvalue iteration did not converge"));
                }

                // Compute implicit shift.
                let mut g = d[l];
                let two = from_usize::<T>(2);
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for i in (l + 2)..n {
                    d[i] = d[i] - h;
                }
                f = f + h;

                // Implicit QL transformation.
                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    for k in 0..n {
                        h = v[k * n + i + 1];
                        v[k * n + i + 1] = s * v[k * n + i] + c * h;
                        v[k * n + i] = c * v[k * n + i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] = d[l] + f;
        e[l] = T::zero();
    }
    Ok(())
}
