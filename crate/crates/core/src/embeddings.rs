//! Zero-mean tensor embeddings of unit vectors.
//!
//! The first embedding sends a unit vector `x` in R^m to the traceless
//! matrix `Q1(x) = x x^T - I/m`. The second embedding is
//! `Q2(x) = Q1(x) ⊗ Q1(x) - K2 + (I ⊗ I)/m^2`, where `K2` is the Haar
//! average of `(U P U^T)^{⊗2}` over the orthogonal group. `K2` is fully
//! determined by two constants and is stored sparsely.
//!
//! Order-4 tensors `sum T[i,j,k,l] E_ij ⊗ E_kl` are flattened row-major over
//! `(i, j, k, l)`, i.e. position `((i*m + j)*m + k)*m + l`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::frames::{Frame, CLUSTER_TOL, UNIT_TOL};
use crate::linalg::{cluster_values, dot, norm, sorted_symmetric_eigen};
use crate::{Error, Result};

/// Relative eigenvalue threshold for numerical rank.
pub const RANK_TOL: f64 = 1e-8;
/// Relative eigenvalue below which a Gram matrix is rejected by [`embed_coordinates`].
pub const NEGATIVE_EIGEN_TOL: f64 = 1e-6;
/// Default memory guard for dense tensors, in bytes.
pub const MEM_GUARD: u128 = 512 * 1024 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    First,
    Second,
}

impl Level {
    pub fn index(self) -> u32 {
        match self {
            Level::First => 1,
            Level::Second => 2,
        }
    }

    pub fn from_index(t: u32) -> Option<Level> {
        match t {
            1 => Some(Level::First),
            2 => Some(Level::Second),
            _ => None,
        }
    }
}

/// How embedded inner products are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GramMethod {
    /// Polynomial in the original cosine.
    ClosedForm,
    /// Explicit embedding images and Hilbert-Schmidt contractions.
    Tensor,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbedOptions {
    pub cluster_tol: f64,
    pub rank_tol: f64,
    /// Bytes allowed for dense embedding images.
    pub mem_guard: u128,
}

impl Default for EmbedOptions {
    fn default() -> Self {
        EmbedOptions {
            cluster_tol: CLUSTER_TOL,
            rank_tol: RANK_TOL,
            mem_guard: MEM_GUARD,
        }
    }
}

fn check_dimension(m: usize) -> Result<()> {
    if m < 2 {
        Err(Error::DimensionTooSmall(m))
    } else {
        Ok(())
    }
}

fn check_unit(x: &[f64]) -> Result<()> {
    let len = norm(x);
    if (len - 1.0).abs() > UNIT_TOL {
        return Err(Error::NonUnitVector { index: 0, norm: len });
    }
    Ok(())
}

/// `D_1 = (m+2)(m-1)/2`, the dimension of traceless symmetric m x m matrices.
pub fn first_dimension(m: usize) -> u128 {
    let m = m as u128;
    (m + 2) * (m - 1) / 2
}

/// `D_t(m)` via `D_{t+1} = (D_t + 2)(D_t - 1)/2`, with overflow detection.
pub fn embedding_dimension(t: u32, m: usize) -> Result<u128> {
    if t == 0 {
        return Err(Error::InvalidParameter("embedding level must be at least 1".into()));
    }
    check_dimension(m)?;
    let m = u128::try_from(m).map_err(|_| Error::Overflow)?;
    let mut d = (m + 2).checked_mul(m - 1).ok_or(Error::Overflow)? / 2;
    for _ in 1..t {
        d = (d + 2).checked_mul(d - 1).ok_or(Error::Overflow)? / 2;
    }
    Ok(d)
}

/// Image of a unit vector under the first embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct Q1Image {
    pub m: usize,
    pub matrix: DMatrix<f64>,
}

impl Q1Image {
    pub fn inner(&self, other: &Q1Image) -> f64 {
        self.matrix.dot(&other.matrix)
    }

    pub fn norm_sq(&self) -> f64 {
        self.matrix.norm_squared()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }
}

pub fn q1_embed(x: &[f64]) -> Result<Q1Image> {
    let m = x.len();
    check_dimension(m)?;
    check_unit(x)?;
    let inv_m = 1.0 / m as f64;
    let matrix = DMatrix::from_fn(m, m, |i, j| x[i] * x[j] - if i == j { inv_m } else { 0.0 });
    Ok(Q1Image { m, matrix })
}

/// Index quadruple `(i, j, k, l)` of the matrix-unit tensor `E_ij ⊗ E_kl`.
pub type Quad = [usize; 4];

/// The 2-coherence tensor of R^m.
///
/// Coefficient `a` sits on `E_jj ⊗ E_jj`; coefficient `b = a/3` on
/// `E_jj' ⊗ E_j'j`, `E_jj ⊗ E_j'j'` and `E_jj' ⊗ E_jj'` for `j != j'`.
/// Every other entry is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceTensor2 {
    pub m: usize,
    pub a: f64,
    pub b: f64,
    pub support: Vec<(Quad, f64)>,
}

pub fn k2_analytic(m: usize) -> Result<CoherenceTensor2> {
    check_dimension(m)?;
    let d1 = first_dimension(m) as f64;
    let mf = m as f64;
    let a = (d1 + (mf - 1.0) * (mf - 1.0)) / (mf * mf * d1);
    let b = a / 3.0;

    let mut support = Vec::with_capacity(m + 3 * m * (m - 1));
    for j in 0..m {
        support.push(([j, j, j, j], a));
    }
    for j in 0..m {
        for jp in 0..m {
            if j != jp {
                support.push(([j, jp, jp, j], b));
                support.push(([j, j, jp, jp], b));
                support.push(([j, jp, j, jp], b));
            }
        }
    }
    Ok(CoherenceTensor2 { m, a, b, support })
}

impl CoherenceTensor2 {
    pub fn entry(&self, [i, j, k, l]: Quad) -> f64 {
        if i == j && k == l {
            if i == k {
                self.a
            } else {
                self.b
            }
        } else if i != j && ((i == k && j == l) || (i == l && j == k)) {
            self.b
        } else {
            0.0
        }
    }

    /// `sum_{i,k} K[i,i,k,k]`.
    pub fn trace(&self) -> f64 {
        self.support
            .iter()
            .filter(|([i, j, k, l], _)| i == j && k == l)
            .map(|(_, c)| c)
            .sum()
    }

    /// Squared Hilbert-Schmidt norm.
    pub fn norm_sq(&self) -> f64 {
        self.support.iter().map(|(_, c)| c * c).sum()
    }

    /// `<(Q1 ⊗ Q1), K2>` for a given first-embedding image.
    pub fn contract_q1(&self, q1: &Q1Image) -> f64 {
        let q = &q1.matrix;
        self.support
            .iter()
            .map(|([i, j, k, l], c)| c * q[(*i, *j)] * q[(*k, *l)])
            .sum()
    }

    fn guard(&self, mem_guard: u128) -> Result<()> {
        let required = (self.m as u128).pow(4) * 8;
        if required > mem_guard {
            return Err(Error::MemoryGuard { required, limit: mem_guard });
        }
        Ok(())
    }

    /// Dense flattened tensor of length m^4.
    pub fn to_flat(&self, mem_guard: u128) -> Result<Vec<f64>> {
        self.guard(mem_guard)?;
        let m = self.m;
        let mut out = vec![0.0; m * m * m * m];
        for ([i, j, k, l], c) in &self.support {
            out[((i * m + j) * m + k) * m + l] = *c;
        }
        Ok(out)
    }

    /// K2 as an operator on R^m ⊗ R^m: row `i*m + k`, column `j*m + l`.
    pub fn to_operator(&self, mem_guard: u128) -> Result<DMatrix<f64>> {
        self.guard(mem_guard)?;
        let m = self.m;
        let mut out = DMatrix::zeros(m * m, m * m);
        for ([i, j, k, l], c) in &self.support {
            out[(i * m + k, j * m + l)] = *c;
        }
        Ok(out)
    }
}

/// Image of a unit vector under the second embedding, flattened row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Q2Image {
    pub m: usize,
    pub tensor: Vec<f64>,
}

impl Q2Image {
    pub fn at(&self, [i, j, k, l]: Quad) -> f64 {
        let m = self.m;
        self.tensor[((i * m + j) * m + k) * m + l]
    }

    pub fn inner(&self, other: &Q2Image) -> f64 {
        dot(&self.tensor, &other.tensor)
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.tensor, &self.tensor)
    }

    /// `sum_{i,k} T[i,i,k,k]`.
    pub fn total_trace(&self) -> f64 {
        let m = self.m;
        let mut s = 0.0;
        for i in 0..m {
            for k in 0..m {
                s += self.at([i, i, k, k]);
            }
        }
        s
    }

    /// `<Q2(x), K2 - (I ⊗ I)/m^2>`.
    pub fn inner_with_variance(&self, k2: &CoherenceTensor2) -> f64 {
        let with_k: f64 = k2.support.iter().map(|(q, c)| c * self.at(*q)).sum();
        let m2 = (self.m * self.m) as f64;
        with_k - self.total_trace() / m2
    }
}

pub fn q2_embed(x: &[f64], k2: &CoherenceTensor2) -> Result<Q2Image> {
    let m = x.len();
    if m != k2.m {
        return Err(Error::DimensionMismatch {
            index: 0,
            expected: k2.m,
            found: m,
        });
    }
    let q = q1_embed(x)?.matrix;
    let inv_m2 = 1.0 / (m * m) as f64;
    let mut tensor = Vec::with_capacity(m * m * m * m);
    for i in 0..m {
        for j in 0..m {
            let qij = q[(i, j)];
            for k in 0..m {
                for l in 0..m {
                    let id = if i == j && k == l { inv_m2 } else { 0.0 };
                    tensor.push(qij * q[(k, l)] - k2.entry([i, j, k, l]) + id);
                }
            }
        }
    }
    Ok(Q2Image { m, tensor })
}

/// `||Q2(x)||^2 = 1 - 2/m + 2/m^2 - A`, the same for every unit `x`.
pub fn q2_norm_sq(k2: &CoherenceTensor2) -> f64 {
    let m = k2.m as f64;
    1.0 - 2.0 / m + 2.0 / (m * m) - k2.a
}

/// Scale `m^2 (m+2) / (m^3 - 5m + 4)` of the level-2 inner-product polynomial.
pub fn level2_scale(m: usize) -> f64 {
    let m = m as f64;
    let denom = m * m * m - 5.0 * m + 4.0;
    assert!(denom > 0.0, "m^3 - 5m + 4 must be positive for m >= 2");
    m * m * (m + 2.0) / denom
}

/// `p(x)`: normalized level-2 inner product as a function of the squared cosine `x`.
pub fn level2_polynomial(x: f64, m: usize) -> f64 {
    let mf = m as f64;
    let shift = x - 1.0 / mf;
    let offset = 2.0 * (mf - 1.0) / (mf * mf * (mf + 2.0));
    level2_scale(m) * (shift * shift - offset)
}

/// Normalized inner product of two second-embedding images whose source
/// vectors have absolute cosine `c`.
pub fn embedded_inner_closed_form(c: f64, m: usize) -> f64 {
    level2_polynomial(c * c, m)
}

/// Normalized inner product of two first-embedding images: `(c^2 - 1/m) m/(m-1)`.
pub fn level1_inner_closed_form(c: f64, m: usize) -> f64 {
    let mf = m as f64;
    (c * c - 1.0 / mf) * mf / (mf - 1.0)
}

/// Normalized Gram matrix of embedded frame vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedGram {
    pub n: usize,
    pub level: Level,
    pub matrix: DMatrix<f64>,
    /// Distinct off-diagonal values, ascending.
    pub signed_cosine_set: Vec<f64>,
    pub rank: usize,
    /// Largest off-diagonal entry; `-inf` when `n = 1`.
    pub max_offdiag: f64,
    /// Eigenvalues in decreasing order.
    pub eigenvalues: Vec<f64>,
}

impl EmbeddedGram {
    pub fn from_matrix(level: Level, matrix: DMatrix<f64>, cluster_tol: f64, rank_tol: f64) -> Self {
        let n = matrix.nrows();
        let mut off = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for j in 0..n {
            for l in j + 1..n {
                off.push(matrix[(j, l)]);
            }
        }
        let max_offdiag = off.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (eigenvalues, _) = sorted_symmetric_eigen(&matrix);
        let floor = rank_tol * eigenvalues[0].max(0.0);
        let rank = eigenvalues.iter().filter(|&&v| v > floor).count();
        EmbeddedGram {
            n,
            level,
            signed_cosine_set: cluster_values(&off, cluster_tol),
            matrix,
            rank,
            max_offdiag,
            eigenvalues,
        }
    }

    /// Max deviation of off-diagonal entries from the regular-simplex value `-1/(n-1)`.
    pub fn simplex_deviation(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let target = -1.0 / (self.n as f64 - 1.0);
        let mut dev: f64 = 0.0;
        for j in 0..self.n {
            for l in j + 1..self.n {
                dev = dev.max((self.matrix[(j, l)] - target).abs());
            }
        }
        dev
    }

    pub fn smallest_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty Gram")
    }

    /// Positive semidefinite up to `-tol * largest eigenvalue`.
    pub fn is_psd(&self, tol: f64) -> bool {
        self.smallest_eigenvalue() >= -tol * self.eigenvalues[0].abs()
    }
}

fn guard(required: u128, limit: u128) -> Result<()> {
    if required > limit {
        Err(Error::MemoryGuard { required, limit })
    } else {
        Ok(())
    }
}

/// Bytes needed by the tensor method at the given level.
pub fn tensor_method_bytes(level: Level, m: usize, n: usize) -> u128 {
    let per = match level {
        Level::First => (m as u128).pow(2),
        Level::Second => (m as u128).pow(4),
    };
    per * n as u128 * 8
}

pub fn embedded_gram(
    frame: &Frame,
    level: Level,
    method: GramMethod,
    opts: &EmbedOptions,
) -> Result<EmbeddedGram> {
    let m = frame.m();
    let n = frame.n();
    let matrix = match method {
        GramMethod::ClosedForm => {
            let raw = frame.gram();
            let entry = |c: f64| match level {
                Level::First => level1_inner_closed_form(c, m),
                Level::Second => embedded_inner_closed_form(c, m),
            };
            DMatrix::from_fn(n, n, |j, l| if j == l { 1.0 } else { entry(raw[(j, l)].abs()) })
        }
        GramMethod::Tensor => {
            guard(tensor_method_bytes(level, m, n), opts.mem_guard)?;
            match level {
                Level::First => {
                    let images = frame.vectors().map(q1_embed).collect::<Result<Vec<_>>>()?;
                    let norms: Vec<f64> = images.iter().map(|q| libm::sqrt(q.norm_sq())).collect();
                    symmetric_from(n, |j, l| images[j].inner(&images[l]) / (norms[j] * norms[l]))
                }
                Level::Second => {
                    let k2 = k2_analytic(m)?;
                    let scale = q2_norm_sq(&k2);
                    let images = frame
                        .vectors()
                        .map(|v| q2_embed(v, &k2))
                        .collect::<Result<Vec<_>>>()?;
                    symmetric_from(n, |j, l| images[j].inner(&images[l]) / scale)
                }
            }
        }
    };
    Ok(EmbeddedGram::from_matrix(level, matrix, opts.cluster_tol, opts.rank_tol))
}

fn symmetric_from(n: usize, f: impl Fn(usize, usize) -> f64) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(n, n);
    for j in 0..n {
        for l in j..n {
            let v = f(j, l);
            out[(j, l)] = v;
            out[(l, j)] = v;
        }
    }
    out
}

/// Unit vectors in R^{D_level(m)} whose Gram matrix is `eg.matrix`.
///
/// Eigenpairs above `rank_tol` times the largest eigenvalue are kept; the
/// coordinates are zero-padded (or truncated) to `D_level(m)` and each row
/// is rescaled to unit length.
pub fn embed_coordinates(eg: &EmbeddedGram, m: usize, rank_tol: f64) -> Result<Vec<Vec<f64>>> {
    let dim = embedding_dimension(eg.level.index(), m)?;
    let dim = usize::try_from(dim).map_err(|_| Error::Overflow)?;
    let (vals, vecs) = sorted_symmetric_eigen(&eg.matrix);
    let largest = vals[0];
    let smallest = *vals.last().expect("non-empty Gram");
    if largest <= 0.0 || smallest < -NEGATIVE_EIGEN_TOL * largest {
        return Err(Error::InvalidGram {
            eigenvalue: smallest,
            largest,
        });
    }
    let keep = vals.iter().take_while(|&&v| v > rank_tol * largest).count().min(dim);
    let mut rows = Vec::with_capacity(eg.n);
    for j in 0..eg.n {
        let mut row = vec![0.0; dim];
        for (k, slot) in row.iter_mut().enumerate().take(keep) {
            *slot = vecs[(j, k)] * libm::sqrt(vals[k]);
        }
        let len = norm(&row);
        if len > 0.0 {
            row.iter_mut().for_each(|x| *x /= len);
        }
        rows.push(row);
    }
    Ok(rows)
}
