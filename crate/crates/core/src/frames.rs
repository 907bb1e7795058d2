//! Frames of unit vectors and their first-order diagnostics.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::linalg::{cluster_values, dot, norm, sorted_symmetric_eigen};
use crate::{Error, Result};

/// Allowed deviation of a vector norm from 1.
pub const UNIT_TOL: f64 = 1e-10;
/// Gap used to merge floating-point cosines into one value.
pub const CLUSTER_TOL: f64 = 1e-8;
/// Max-entry tolerance for `sum f f^T = (n/m) I`.
pub const TIGHT_TOL: f64 = 1e-9;
/// Coordinate threshold for sign normalization and line equality in [`antipodal_dedup`].
pub const DEDUP_TOL: f64 = 1e-9;
/// Relative eigenvalue floor of the frame operator below which the frame is rank deficient.
pub const SPAN_TOL: f64 = 1e-10;

/// An ordered list of `n` unit vectors in R^m.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    m: usize,
    data: Vec<f64>,
}

impl Frame {
    /// Validates (or, with `renormalize`, rescales) the rows and builds a frame.
    pub fn new(m: usize, vectors: Vec<Vec<f64>>, renormalize: bool) -> Result<Self> {
        if m < 2 {
            return Err(Error::DimensionTooSmall(m));
        }
        if vectors.is_empty() {
            return Err(Error::EmptyFrame);
        }
        let mut data = Vec::with_capacity(vectors.len() * m);
        for (index, v) in vectors.into_iter().enumerate() {
            if v.len() != m {
                return Err(Error::DimensionMismatch {
                    index,
                    expected: m,
                    found: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite { index });
            }
            let len = norm(&v);
            if len == 0.0 {
                return Err(Error::ZeroVector { index });
            }
            if renormalize {
                data.extend(v.iter().map(|x| x / len));
            } else if (len - 1.0).abs() > UNIT_TOL {
                return Err(Error::NonUnitVector { index, norm: len });
            } else {
                data.extend(v);
            }
        }
        Ok(Frame { m, data })
    }

    pub fn from_unit_vectors(m: usize, vectors: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(m, vectors, false)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.data.len() / self.m
    }

    pub fn vector(&self, j: usize) -> &[f64] {
        &self.data[j * self.m..(j + 1) * self.m]
    }

    pub fn vectors(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.m)
    }

    pub fn to_vecs(&self) -> Vec<Vec<f64>> {
        self.vectors().map(<[f64]>::to_vec).collect()
    }

    /// Synthesis matrix with the frame vectors as columns (m x n).
    pub fn synthesis(&self) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.m, self.n(), &self.data)
    }

    /// Frame operator `sum_j f_j f_j^T`.
    pub fn frame_operator(&self) -> DMatrix<f64> {
        let f = self.synthesis();
        &f * f.transpose()
    }

    /// Whether the vectors span R^m.
    pub fn spans(&self) -> bool {
        if self.n() < self.m {
            return false;
        }
        let (vals, _) = sorted_symmetric_eigen(&self.frame_operator());
        let largest = vals[0];
        vals[self.m - 1] > SPAN_TOL * largest
    }

    /// Applies `u` to every vector. `u` should be orthogonal; rows are
    /// renormalized to absorb rounding.
    pub fn transformed(&self, u: &DMatrix<f64>) -> Result<Frame> {
        let image = u * self.synthesis();
        let vectors = image.column_iter().map(|c| c.iter().copied().collect()).collect();
        Frame::new(self.m, vectors, true)
    }

    /// Reorders the vectors: output vector `k` is input vector `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Frame {
        assert_eq!(order.len(), self.n(), "permutation length must equal n");
        let data = order.iter().flat_map(|&j| self.vector(j).iter().copied()).collect();
        Frame { m: self.m, data }
    }

    /// Multiplies vector `j` by `signs[j]` (expected to be +1 or -1).
    pub fn sign_flipped(&self, signs: &[f64]) -> Frame {
        assert_eq!(signs.len(), self.n(), "one sign per vector");
        let data = self
            .vectors()
            .zip(signs)
            .flat_map(|(v, s)| v.iter().map(move |x| x * s))
            .collect();
        Frame { m: self.m, data }
    }

    pub fn gram(&self) -> DMatrix<f64> {
        let f = self.synthesis();
        f.transpose() * f
    }
}

/// Gram matrix and cosine diagnostics of a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct GramProfile {
    pub gram: DMatrix<f64>,
    /// Largest off-diagonal `|<f_j, f_l>|`; 0 for a single vector.
    pub coherence: f64,
    /// Distinct off-diagonal absolute cosines, ascending.
    pub cosine_set: Vec<f64>,
    pub angularity: usize,
    /// `a` with `sum f f^T = a I`, when the frame is tight.
    pub tightness: Option<f64>,
    pub spans: bool,
    /// Set when `n = 1`: no pairs, so coherence is reported as 0.
    pub single_vector: bool,
}

pub fn gram_profile(frame: &Frame, cluster_tol: f64) -> GramProfile {
    gram_profile_with(frame, cluster_tol, TIGHT_TOL)
}

pub fn gram_profile_with(frame: &Frame, cluster_tol: f64, tight_tol: f64) -> GramProfile {
    let n = frame.n();
    let m = frame.m();
    let gram = frame.gram();

    let mut off = Vec::with_capacity(n * (n - 1) / 2);
    for j in 0..n {
        for l in j + 1..n {
            off.push(gram[(j, l)].abs());
        }
    }
    let coherence = off.iter().copied().fold(0.0, f64::max);
    let cosine_set = cluster_values(&off, cluster_tol);

    let s = frame.frame_operator();
    let a = n as f64 / m as f64;
    let deviation = (&s - DMatrix::<f64>::identity(m, m) * a).amax();
    let tightness = (deviation <= tight_tol).then(|| s.trace() / m as f64);

    GramProfile {
        angularity: cosine_set.len(),
        gram,
        coherence,
        cosine_set,
        tightness,
        spans: frame.spans(),
        single_vector: n == 1,
    }
}

/// Flips `v` so that its first coordinate exceeding `tol` in magnitude is positive.
pub fn sign_normalize(v: &mut [f64], tol: f64) {
    if let Some(&lead) = v.iter().find(|x| x.abs() > tol) {
        if lead < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn same_line(a: &[f64], b: &[f64], tol: f64) -> bool {
    let plus = a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol);
    let minus = a.iter().zip(b).all(|(x, y)| (x + y).abs() <= tol);
    plus || minus
}

/// Keeps one sign-normalized representative per line, in order of first
/// occurrence.
pub fn antipodal_dedup(vectors: &[Vec<f64>], dedup_tol: f64) -> Result<Frame> {
    let first = vectors.first().ok_or(Error::EmptyFrame)?;
    let m = first.len();
    // validates dimensions and unit norms
    let input = Frame::from_unit_vectors(m, vectors.to_vec())?;

    let mut kept: Vec<Vec<f64>> = Vec::new();
    for v in input.vectors() {
        if kept.iter().any(|k| same_line(k, v, dedup_tol)) {
            continue;
        }
        let mut rep = v.to_vec();
        sign_normalize(&mut rep, dedup_tol);
        kept.push(rep);
    }
    Frame::from_unit_vectors(m, kept)
}

/// Absolute cosine between two vectors of the same frame.
pub fn abs_cosine(frame: &Frame, j: usize, l: usize) -> f64 {
    dot(frame.vector(j), frame.vector(l)).abs()
}
