//! Independent checks of the analytic machinery: Monte-Carlo estimates of
//! sphere moments, a first-principles second-embedding Gram, and a
//! bisection root-finder for the level-2 bound.
//!
//! Nothing here reuses the sparse K2 support or the closed-form Gram
//! polynomial from [`crate::embeddings`].

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bounds::{invert_level2_polynomial, second_embedding_coherence_bound, orthant_route_live};
use crate::certify::Route;
use crate::embeddings::{first_dimension, k2_analytic, level2_polynomial, EmbedOptions, EmbeddedGram, Level};
use crate::frames::Frame;
use crate::linalg::{dot, random_unit_vector};
use crate::{Error, Result};

/// Independent ChaCha streams per shard; results do not depend on how
/// shards are scheduled, only on `(seed, shards)`.
pub const MC_SHARDS: u64 = 8;
/// Statistical tolerance constant: errors above `MC_CONSTANT / sqrt(N)` indicate a bug.
pub const MC_CONSTANT: f64 = 10.0;
pub const MIN_MC_SAMPLES: usize = 10_000;
/// Size limits of [`brute_force_embedded_gram`].
pub const BRUTE_FORCE_MAX_M: usize = 6;
pub const BRUTE_FORCE_MAX_N: usize = 64;

pub fn shard_rng(seed: u64, shard: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}

/// Samples assigned to each shard; earlier shards take the remainder.
pub fn shard_sizes(samples: usize, shards: u64) -> Vec<usize> {
    let shards = shards.max(1) as usize;
    (0..shards)
        .map(|s| samples / shards + usize::from(s < samples % shards))
        .collect()
}

/// Running sum of `(w w^T)` with `w = ω ⊗ ω`, upper triangle only.
#[derive(Debug, Clone)]
pub struct K2Accumulator {
    m: usize,
    sum: Vec<f64>,
    count: usize,
}

impl K2Accumulator {
    pub fn new(m: usize) -> Self {
        let d = m * m;
        K2Accumulator { m, sum: vec![0.0; d * d], count: 0 }
    }

    pub fn add(&mut self, omega: &[f64]) {
        let m = self.m;
        let d = m * m;
        let mut w = vec![0.0; d];
        for i in 0..m {
            for k in 0..m {
                w[i * m + k] = omega[i] * omega[k];
            }
        }
        for r in 0..d {
            let wr = w[r];
            let row = &mut self.sum[r * d..(r + 1) * d];
            for c in r..d {
                row[c] += wr * w[c];
            }
        }
        self.count += 1;
    }

    /// Draws `count` uniform sphere samples from `rng`.
    pub fn run(&mut self, rng: &mut ChaCha8Rng, count: usize) {
        for _ in 0..count {
            let omega = random_unit_vector(self.m, rng);
            self.add(&omega);
        }
    }

    pub fn merge(&mut self, other: &K2Accumulator) {
        assert_eq!(self.m, other.m, "accumulators of different dimension");
        self.sum.iter_mut().zip(&other.sum).for_each(|(a, b)| *a += b);
        self.count += other.count;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Sample mean as an operator on R^m ⊗ R^m (row `i*m+k`, column `j*m+l`).
    pub fn mean(&self) -> DMatrix<f64> {
        let d = self.m * self.m;
        let scale = 1.0 / self.count.max(1) as f64;
        DMatrix::from_fn(d, d, |r, c| {
            let (lo, hi) = if r <= c { (r, c) } else { (c, r) };
            self.sum[lo * d + hi] * scale
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloEstimate {
    pub m: usize,
    pub samples: usize,
    pub seed: u64,
    pub estimate: DMatrix<f64>,
    /// Max entrywise deviation from the analytic K2.
    pub max_abs_error: f64,
    /// Max |entry| at positions where K2 vanishes.
    pub max_unsupported: f64,
    /// Means over the `E_jj ⊗ E_jj` family and over the three off-diagonal families.
    pub diagonal_family_mean: f64,
    pub off_family_mean: f64,
}

impl MonteCarloEstimate {
    pub fn tolerance(&self) -> f64 {
        MC_CONSTANT / libm::sqrt(self.samples as f64)
    }
}

fn check_mc(m: usize, samples: usize, mem_guard: u128) -> Result<()> {
    if !(2..=5).contains(&m) {
        return Err(Error::InvalidParameter("Monte-Carlo K2 needs 2 <= m <= 5".into()));
    }
    if samples < MIN_MC_SAMPLES {
        return Err(Error::InvalidParameter("Monte-Carlo K2 needs at least 10^4 samples".into()));
    }
    let required = 2 * (m as u128).pow(4) * 8;
    if required > mem_guard {
        return Err(Error::MemoryGuard { required, limit: mem_guard });
    }
    Ok(())
}

/// Estimates K2 by averaging `(ω ω^T)^{⊗2}` over uniform samples.
pub fn mc_k2(m: usize, samples: usize, seed: u64, mem_guard: u128) -> Result<MonteCarloEstimate> {
    check_mc(m, samples, mem_guard)?;
    let mut total = K2Accumulator::new(m);
    for (shard, count) in shard_sizes(samples, MC_SHARDS).into_iter().enumerate() {
        let mut acc = K2Accumulator::new(m);
        acc.run(&mut shard_rng(seed, shard as u64), count);
        total.merge(&acc);
    }
    finish_mc_k2(&total, seed, mem_guard)
}

/// Compares merged shard sums with the analytic K2.
pub fn finish_mc_k2(acc: &K2Accumulator, seed: u64, mem_guard: u128) -> Result<MonteCarloEstimate> {
    let m = acc.m;
    check_mc(m, acc.count, mem_guard)?;
    let estimate = acc.mean();
    let k2 = k2_analytic(m)?;
    let analytic = k2.to_operator(mem_guard)?;
    let max_abs_error = (&estimate - &analytic).amax();

    let (mut unsupported, mut diag, mut diag_n, mut off, mut off_n) = (0.0_f64, 0.0, 0, 0.0, 0);
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    let v = estimate[(i * m + k, j * m + l)];
                    let c = k2.entry([i, j, k, l]);
                    if c == 0.0 {
                        unsupported = unsupported.max(v.abs());
                    } else if i == j && j == k && k == l {
                        diag += v;
                        diag_n += 1;
                    } else {
                        off += v;
                        off_n += 1;
                    }
                }
            }
        }
    }
    Ok(MonteCarloEstimate {
        m,
        samples: acc.count,
        seed,
        estimate,
        max_abs_error,
        max_unsupported: unsupported,
        diagonal_family_mean: diag / diag_n as f64,
        off_family_mean: off / off_n as f64,
    })
}

fn sample_mean_matrix(
    m: usize,
    samples: usize,
    seed: u64,
    f: impl Fn(&[f64], &mut DMatrix<f64>),
) -> DMatrix<f64> {
    let mut total = DMatrix::zeros(m, m);
    for (shard, count) in shard_sizes(samples, MC_SHARDS).into_iter().enumerate() {
        let mut rng = shard_rng(seed, shard as u64);
        for _ in 0..count {
            let omega = random_unit_vector(m, &mut rng);
            f(&omega, &mut total);
        }
    }
    total / samples as f64
}

/// Max |entry| of the sample mean of `Q1(ω) = ω ω^T - I/m`.
pub fn mc_mean_q1(m: usize, samples: usize, seed: u64) -> Result<f64> {
    if m < 2 {
        return Err(Error::DimensionTooSmall(m));
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let mean = sample_mean_matrix(m, samples, seed, |w, acc| {
        let q = crate::embeddings::q1_embed(w).expect("sampled vectors are unit");
        *acc += q.matrix;
    });
    Ok(mean.amax())
}

/// Max deviation of the sample mean of `ω ω^T` from `I/m`.
pub fn mc_second_moment_deviation(m: usize, samples: usize, seed: u64) -> Result<f64> {
    if m < 2 {
        return Err(Error::DimensionTooSmall(m));
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let mean = sample_mean_matrix(m, samples, seed, |w, acc| {
        for i in 0..m {
            for j in 0..m {
                acc[(i, j)] += w[i] * w[j];
            }
        }
    });
    let target = DMatrix::<f64>::identity(m, m) / m as f64;
    Ok((mean - target).amax())
}

/// Fourth sphere moment `E[ω_i ω_j ω_k ω_l] = (δij δkl + δik δjl + δil δjk) / (m(m+2))`.
fn fourth_moment(m: usize, i: usize, j: usize, k: usize, l: usize) -> f64 {
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    (d(i, j) * d(k, l) + d(i, k) * d(j, l) + d(i, l) * d(j, k)) / (m * (m + 2)) as f64
}

/// Second-embedding Gram matrix from dense tensors, normalized by the
/// measured norms of the images.
pub fn brute_force_embedded_gram(frame: &Frame) -> Result<EmbeddedGram> {
    let (m, n) = (frame.m(), frame.n());
    if m > BRUTE_FORCE_MAX_M || n > BRUTE_FORCE_MAX_N {
        let required = (m as u128).pow(4) * n as u128 * 8;
        let limit = (BRUTE_FORCE_MAX_M as u128).pow(4) * BRUTE_FORCE_MAX_N as u128 * 8;
        return Err(Error::MemoryGuard { required, limit });
    }
    let inv_m = 1.0 / m as f64;
    let mut images: Vec<Vec<f64>> = Vec::with_capacity(n);
    for x in frame.vectors() {
        let q1: Vec<f64> = (0..m * m)
            .map(|r| x[r / m] * x[r % m] - if r / m == r % m { inv_m } else { 0.0 })
            .collect();
        let mut t = Vec::with_capacity(m * m * m * m);
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        let identity = if i == j && k == l { inv_m * inv_m } else { 0.0 };
                        t.push(q1[i * m + j] * q1[k * m + l] - fourth_moment(m, i, j, k, l) + identity);
                    }
                }
            }
        }
        images.push(t);
    }
    let norms: Vec<f64> = images.iter().map(|t| libm::sqrt(dot(t, t))).collect();
    let matrix = DMatrix::from_fn(n, n, |j, l| dot(&images[j], &images[l]) / (norms[j] * norms[l]));
    let opts = EmbedOptions::default();
    Ok(EmbeddedGram::from_matrix(Level::Second, matrix, opts.cluster_tol, opts.rank_tol))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionReport {
    pub n: usize,
    pub m: usize,
    pub route: Route,
    /// `-1/(n-1)` for the simplex route, 0 for the orthant route.
    pub target: f64,
    /// Whether the bounds module considers the route applicable to `(n, m)`.
    pub applicable: bool,
    pub closed_form_x: f64,
    pub bisection_x: f64,
    pub abs_diff_x: f64,
    pub bound: f64,
}

/// Solves `p(x) = target` on `[1/m, 1]` by bisection.
pub fn bisect_level2(target: f64, m: usize) -> Result<f64> {
    let (mut lo, mut hi) = (1.0 / m as f64, 1.0);
    let f = |x: f64| level2_polynomial(x, m) - target;
    if f(lo) > 0.0 || f(hi) < 0.0 {
        return Err(Error::NoRootInBracket { target, lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Cross-checks the closed-form level-2 bound against bisection on `p`.
pub fn validate_bound_inversion(n: usize, m: usize, route: Route) -> Result<InversionReport> {
    let (simplex, orthant) = second_embedding_coherence_bound(n, m)?;
    let (target, applicable, value) = match route {
        Route::Simplex => (-1.0 / (n as f64 - 1.0), simplex.applicable, simplex.value),
        Route::Orthant => (0.0, orthant.applicable, orthant.value),
        Route::None => return Err(Error::InvalidParameter("route must be simplex or orthant".into())),
    };
    let bisection_x = bisect_level2(target, m)?;
    let closed_form_x = match value {
        Some(mu) => mu * mu,
        None => invert_level2_polynomial(target, m)
            .ok_or(Error::NoRootInBracket { target, lo: 1.0 / m as f64, hi: 1.0 })?,
    };
    Ok(InversionReport {
        n,
        m,
        route,
        target,
        applicable,
        closed_form_x,
        bisection_x,
        abs_diff_x: (closed_form_x - bisection_x).abs(),
        bound: libm::sqrt(closed_form_x),
    })
}

/// `(m, (m-1)^2 - D1(m), live)` for `m` in `2..=max_m`.
pub fn orthant_route_sweep(max_m: usize) -> Vec<(usize, i128, bool)> {
    (2..=max_m)
        .map(|m| {
            let gap = ((m - 1) * (m - 1)) as i128 - first_dimension(m) as i128;
            (m, gap, orthant_route_live(m))
        })
        .collect()
}
