//! Grassmannian certification from embedded Gram matrices.
//!
//! Level 1: if the normalized first-embedding images form a regular simplex,
//! or if `n > D1 + 1` and all their pairwise inner products are non-positive,
//! Rankin's bound is attained and the frame is Grassmannian.
//!
//! Level 2 uses the same two geometries for the second-embedding images but
//! adds side conditions on `(n, m)`. When the image is Rankin-optimal and the
//! side conditions fail, the verdict is [`Verdict::SaturatesBoundUnverified`].

use alloc::vec::Vec;

use crate::bounds::{
    orthant_route_live, orthoplex_bound, second_embedding_coherence_bound,
    simplex_route_condition, welch_bound,
};
use crate::embeddings::{embedded_gram, first_dimension, EmbedOptions, EmbeddedGram, GramMethod, Level};
use crate::frames::{gram_profile, Frame, CLUSTER_TOL};
use crate::{embedding_dimension, Error, Result};

/// Default tolerance on embedded Gram entries.
pub const CERTIFY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    CertifiedGrassmannian,
    /// The embedded image is an optimal cap packing, but the theorem's side
    /// conditions on `(n, m)` fail.
    SaturatesBoundUnverified,
    Undetermined,
}

impl Verdict {
    /// Ordering used when combining levels: certified beats saturated beats undetermined.
    pub fn strength(self) -> u8 {
        match self {
            Verdict::CertifiedGrassmannian => 2,
            Verdict::SaturatesBoundUnverified => 1,
            Verdict::Undetermined => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Route {
    Simplex,
    Orthant,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Condition {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Condition {
    fn at_most(name: &'static str, value: f64, threshold: f64) -> Self {
        Condition { name, value, threshold, pass: value <= threshold }
    }

    fn flag(name: &'static str, value: f64, threshold: f64, pass: bool) -> Self {
        Condition { name, value, threshold, pass }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub level: Level,
    pub route: Route,
    pub conditions: Vec<Condition>,
    pub verdict: Verdict,
    pub coherence: f64,
    /// Grassmannian constant `mu_{n,m}` implied by the fired route.
    pub certified_constant: Option<f64>,
    pub simplex_deviation: f64,
    pub max_offdiag: f64,
}

impl Certificate {
    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

fn all_pass(conditions: &[Condition], prefix: &str) -> bool {
    conditions
        .iter()
        .filter(|c| c.name.starts_with(prefix))
        .all(|c| c.pass)
}

fn prepare(frame: &Frame, level: Level, tol: f64) -> Result<(f64, EmbeddedGram)> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter("certification tolerance must be positive".into()));
    }
    if !frame.spans() {
        return Err(Error::NonSpanning { m: frame.m() });
    }
    let coherence = gram_profile(frame, CLUSTER_TOL).coherence;
    let eg = embedded_gram(frame, level, GramMethod::ClosedForm, &EmbedOptions::default())?;
    Ok((coherence, eg))
}

pub fn certify_level1(frame: &Frame, tol: f64) -> Result<Certificate> {
    let (coherence, eg) = prepare(frame, Level::First, tol)?;
    let (n, m) = (frame.n(), frame.m());
    let d1 = first_dimension(m);
    let deviation = eg.simplex_deviation();

    let conditions = alloc::vec![
        Condition::at_most("simplex.deviation", deviation, tol),
        Condition::flag("orthant.n_exceeds_d1_plus_1", n as f64, (d1 + 1) as f64, n as u128 > d1 + 1),
        Condition::at_most("orthant.max_offdiag", eg.max_offdiag, tol),
    ];

    let (route, verdict, constant) = if all_pass(&conditions, "simplex.") {
        (Route::Simplex, Verdict::CertifiedGrassmannian, Some(welch_bound(n, m).value))
    } else if all_pass(&conditions, "orthant.") {
        (Route::Orthant, Verdict::CertifiedGrassmannian, Some(orthoplex_bound(n, m).value))
    } else {
        (Route::None, Verdict::Undetermined, None)
    };

    Ok(Certificate {
        level: Level::First,
        route,
        conditions,
        verdict,
        coherence,
        certified_constant: constant,
        simplex_deviation: deviation,
        max_offdiag: eg.max_offdiag,
    })
}

pub fn certify_level2(frame: &Frame, tol: f64) -> Result<Certificate> {
    let (coherence, eg) = prepare(frame, Level::Second, tol)?;
    let (n, m) = (frame.n(), frame.m());
    let d1 = first_dimension(m);
    let d2 = embedding_dimension(2, m)?;
    let deviation = eg.simplex_deviation();
    let (simplex_bound, orthant_bound) = second_embedding_coherence_bound(n, m)?;

    let conditions = alloc::vec![
        Condition::flag(
            "simplex.dimension_ratio",
            simplex_bound.ratio,
            simplex_bound.threshold,
            simplex_route_condition(n, m),
        ),
        Condition::at_most("simplex.deviation", deviation, tol),
        Condition::flag("orthant.n_exceeds_d2_plus_1", n as f64, (d2 + 1) as f64, n as u128 > d2 + 1),
        Condition::flag(
            "orthant.square_exceeds_d1",
            ((m - 1) * (m - 1)) as f64,
            d1 as f64,
            orthant_route_live(m),
        ),
        Condition::at_most("orthant.max_offdiag", eg.max_offdiag, tol),
    ];

    let passes = |name: &str| conditions.iter().any(|c| c.name == name && c.pass);
    let simplex_image = passes("simplex.deviation");
    let orthant_image = passes("orthant.n_exceeds_d2_plus_1") && passes("orthant.max_offdiag");

    let (route, verdict, constant) = if all_pass(&conditions, "simplex.") {
        (Route::Simplex, Verdict::CertifiedGrassmannian, simplex_bound.value)
    } else if all_pass(&conditions, "orthant.") {
        (Route::Orthant, Verdict::CertifiedGrassmannian, orthant_bound.value)
    } else if simplex_image {
        (Route::Simplex, Verdict::SaturatesBoundUnverified, None)
    } else if orthant_image {
        (Route::Orthant, Verdict::SaturatesBoundUnverified, None)
    } else {
        (Route::None, Verdict::Undetermined, None)
    };

    Ok(Certificate {
        level: Level::Second,
        route,
        conditions,
        verdict,
        coherence,
        certified_constant: constant,
        simplex_deviation: deviation,
        max_offdiag: eg.max_offdiag,
    })
}

/// Strongest of several certificates; the lowest level wins ties.
pub fn strongest(certificates: &[Certificate]) -> Option<&Certificate> {
    certificates
        .iter()
        .rev()
        .max_by_key(|c| c.verdict.strength())
}
