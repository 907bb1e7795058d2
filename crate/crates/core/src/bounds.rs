//! Closed-form lower bounds on the coherence of n unit vectors in R^m.

use crate::embeddings::{embedding_dimension, first_dimension, k2_analytic, level2_scale};
use crate::{Error, Result};

/// A bound value together with whether its hypotheses hold for `(n, m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    pub value: f64,
    pub applicable: bool,
}

/// Level-2 simplex bound: needs `(n - D1)/(n - 1) >= D1/(m - 1)^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexLevelBound {
    /// `(n - D1)/(n - 1)`
    pub ratio: f64,
    /// `D1/(m - 1)^2`
    pub threshold: f64,
    pub applicable: bool,
    pub value: Option<f64>,
}

/// Level-2 orthant bound: needs `n > D2 + 1` and `(m - 1)^2 >= D1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrthantLevelBound {
    pub exceeds_second_dimension: bool,
    pub square_dominates_first_dimension: bool,
    pub applicable: bool,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub n: usize,
    pub m: usize,
    pub welch: Bound,
    pub orthoplex: Bound,
    /// `-1/(n - 1)`
    pub rankin_simplex_target: f64,
    pub second_simplex: SimplexLevelBound,
    pub second_orthant: OrthantLevelBound,
    /// Largest applicable bound (0 when none applies).
    pub best_applicable: f64,
}

fn check(n: usize, m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::DimensionTooSmall(m));
    }
    if n < 2 {
        return Err(Error::InvalidParameter("bounds need at least two vectors".into()));
    }
    Ok(())
}

/// `sqrt((n - m)/((n - 1) m))`, or 0 (not applicable) when `n <= m`.
pub fn welch_bound(n: usize, m: usize) -> Bound {
    if n <= m {
        return Bound { value: 0.0, applicable: false };
    }
    let (nf, mf) = (n as f64, m as f64);
    Bound {
        value: libm::sqrt((nf - mf) / ((nf - 1.0) * mf)),
        applicable: true,
    }
}

/// `1/sqrt(m)`, applicable when `n > D1(m) + 1`.
pub fn orthoplex_bound(n: usize, m: usize) -> Bound {
    Bound {
        value: 1.0 / libm::sqrt(m as f64),
        applicable: (n as u128) > first_dimension(m) + 1,
    }
}

/// Rankin: the largest pairwise inner product of `n` unit vectors in R^d is
/// at least `-1/(n-1)`, and at least 0 once `n > d + 1`.
pub fn rankin_max_inner_lower(n: usize, d: u128) -> f64 {
    if (n as u128) <= d + 1 {
        -1.0 / (n as f64 - 1.0)
    } else {
        0.0
    }
}

/// Smallest squared cosine `x >= 1/m` with `p(x) = target`, from the
/// quadratic formula. `None` when `target < p(1/m)`.
pub fn invert_level2_polynomial(target: f64, m: usize) -> Option<f64> {
    let mf = m as f64;
    let offset = 2.0 * (mf - 1.0) / (mf * mf * (mf + 2.0));
    let radicand = offset + target / level2_scale(m);
    (radicand >= 0.0).then(|| 1.0 / mf + libm::sqrt(radicand))
}

/// Whether the simplex-route hypothesis `(n - D1)/(n - 1) >= D1/(m - 1)^2`
/// holds, evaluated in exact integer arithmetic.
pub fn simplex_route_condition(n: usize, m: usize) -> bool {
    let d1 = first_dimension(m) as i128;
    let (n, m) = (n as i128, m as i128);
    (n - d1) * (m - 1) * (m - 1) >= d1 * (n - 1)
}

/// Whether `(m - 1)^2 >= D1(m)`; true exactly for `m >= 4`.
pub fn orthant_route_live(m: usize) -> bool {
    let d1 = first_dimension(m);
    let s = (m as u128 - 1).pow(2);
    s >= d1
}

pub fn second_embedding_coherence_bound(
    n: usize,
    m: usize,
) -> Result<(SimplexLevelBound, OrthantLevelBound)> {
    check(n, m)?;
    let d1 = first_dimension(m);
    let d2 = embedding_dimension(2, m)?;
    let (nf, mf, d1f) = (n as f64, m as f64, d1 as f64);

    let simplex_ok = simplex_route_condition(n, m);
    let simplex_value = if simplex_ok {
        // p(x) = -1/(n-1) on the increasing branch
        let k2 = k2_analytic(m)?;
        let radicand = (k2.a - 1.0 / (mf * mf))
            - (d1f - 1.0) * (mf - 1.0) * (mf - 1.0) / (mf * mf * d1f * (nf - 1.0));
        debug_assert!(radicand >= -1e-15, "negative radicand {radicand}");
        Some(libm::sqrt(1.0 / mf + libm::sqrt(radicand.max(0.0))))
    } else {
        None
    };
    let simplex = SimplexLevelBound {
        ratio: (nf - d1f) / (nf - 1.0),
        threshold: d1f / ((mf - 1.0) * (mf - 1.0)),
        applicable: simplex_ok,
        value: simplex_value,
    };

    let exceeds = (n as u128) > d2 + 1;
    let dominates = orthant_route_live(m);
    let orthant_ok = exceeds && dominates;
    let orthant = OrthantLevelBound {
        exceeds_second_dimension: exceeds,
        square_dominates_first_dimension: dominates,
        applicable: orthant_ok,
        value: orthant_ok.then(|| {
            let r = 2.0 * (mf - 1.0) / (mf * mf * (mf + 2.0));
            libm::sqrt(1.0 / mf + libm::sqrt(r))
        }),
    };
    Ok((simplex, orthant))
}

pub fn bound_report(n: usize, m: usize) -> Result<BoundReport> {
    check(n, m)?;
    let welch = welch_bound(n, m);
    let orthoplex = orthoplex_bound(n, m);
    let (second_simplex, second_orthant) = second_embedding_coherence_bound(n, m)?;

    let best_applicable = [
        welch.applicable.then_some(welch.value),
        orthoplex.applicable.then_some(orthoplex.value),
        second_simplex.value,
        second_orthant.value,
    ]
    .into_iter()
    .flatten()
    .fold(0.0, f64::max);

    Ok(BoundReport {
        n,
        m,
        welch,
        orthoplex,
        rankin_simplex_target: -1.0 / (n as f64 - 1.0),
        second_simplex,
        second_orthant,
        best_applicable,
    })
}
