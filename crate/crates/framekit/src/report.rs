//! Versioned JSON reports.

use framekit_core::bounds::{Bound, BoundReport};
use framekit_core::certify::{self, Certificate, Route, Verdict};
use framekit_core::embeddings::{embedded_gram, embedding_dimension, tensor_method_bytes, EmbedOptions, GramMethod, Level};
use framekit_core::frames::{gram_profile, Frame};
use framekit_core::{bound_report, Error};
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    /// Tolerance on embedded Gram entries used by certification.
    pub tol: f64,
    pub cluster_tol: f64,
    pub mem_guard: u128,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            tol: certify::CERTIFY_TOL,
            cluster_tol: framekit_core::frames::CLUSTER_TOL,
            mem_guard: framekit_core::embeddings::MEM_GUARD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameMeta {
    pub m: usize,
    pub n: usize,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSummary {
    pub coherence: f64,
    pub cosine_set: Vec<f64>,
    pub angularity: usize,
    /// `a` in `sum f f^T = a I`; absent when the frame is not tight.
    pub tightness: Option<f64>,
    pub spans: bool,
    pub single_vector: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub value: f64,
    pub applicable: bool,
}

impl From<Bound> for BoundValue {
    fn from(b: Bound) -> Self {
        BoundValue { value: b.value, applicable: b.applicable }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondSimplex {
    pub ratio: f64,
    pub threshold: f64,
    pub applicable: bool,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondOrthant {
    pub exceeds_second_dimension: bool,
    pub square_dominates_first_dimension: bool,
    pub applicable: bool,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsSummary {
    pub welch: BoundValue,
    pub orthoplex: BoundValue,
    pub rankin_simplex_target: f64,
    pub second_simplex: SecondSimplex,
    pub second_orthant: SecondOrthant,
    pub best_applicable: f64,
}

impl From<&BoundReport> for BoundsSummary {
    fn from(r: &BoundReport) -> Self {
        BoundsSummary {
            welch: r.welch.into(),
            orthoplex: r.orthoplex.into(),
            rankin_simplex_target: r.rankin_simplex_target,
            second_simplex: SecondSimplex {
                ratio: r.second_simplex.ratio,
                threshold: r.second_simplex.threshold,
                applicable: r.second_simplex.applicable,
                value: r.second_simplex.value,
            },
            second_orthant: SecondOrthant {
                exceeds_second_dimension: r.second_orthant.exceeds_second_dimension,
                square_dominates_first_dimension: r.second_orthant.square_dominates_first_dimension,
                applicable: r.second_orthant.applicable,
                value: r.second_orthant.value,
            },
            best_applicable: r.best_applicable,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    ClosedForm,
    Tensor,
}

impl From<GramMethod> for MethodName {
    fn from(m: GramMethod) -> Self {
        match m {
            GramMethod::ClosedForm => MethodName::ClosedForm,
            GramMethod::Tensor => MethodName::Tensor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingSummary {
    pub level: u32,
    pub dimension: u128,
    pub method: MethodName,
    pub signed_cosine_set: Vec<f64>,
    pub simplex_deviation: f64,
    pub max_offdiag: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictName {
    CertifiedGrassmannian,
    SaturatesBoundUnverified,
    Undetermined,
}

impl From<Verdict> for VerdictName {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::CertifiedGrassmannian => VerdictName::CertifiedGrassmannian,
            Verdict::SaturatesBoundUnverified => VerdictName::SaturatesBoundUnverified,
            Verdict::Undetermined => VerdictName::Undetermined,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteName {
    Simplex,
    Orthant,
    None,
}

impl From<Route> for RouteName {
    fn from(r: Route) -> Self {
        match r {
            Route::Simplex => RouteName::Simplex,
            Route::Orthant => RouteName::Orthant,
            Route::None => RouteName::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub level: u32,
    pub route: RouteName,
    pub verdict: VerdictName,
    pub coherence: f64,
    pub certified_constant: Option<f64>,
    pub simplex_deviation: f64,
    pub max_offdiag: f64,
    pub conditions: Vec<ConditionSummary>,
}

impl From<&Certificate> for CertificateSummary {
    fn from(c: &Certificate) -> Self {
        CertificateSummary {
            level: c.level.index(),
            route: c.route.into(),
            verdict: c.verdict.into(),
            coherence: c.coherence,
            certified_constant: c.certified_constant,
            simplex_deviation: c.simplex_deviation,
            max_offdiag: c.max_offdiag,
            conditions: c
                .conditions
                .iter()
                .map(|k| ConditionSummary {
                    name: k.name.to_string(),
                    value: k.value,
                    threshold: k.threshold,
                    pass: k.pass,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub format_version: u32,
    pub frame: FrameMeta,
    pub profile: ProfileSummary,
    /// Absent for single-vector frames.
    pub bounds: Option<BoundsSummary>,
    pub embeddings: Vec<EmbeddingSummary>,
    pub certificates: Vec<CertificateSummary>,
    /// Strongest verdict over both levels.
    pub verdict: VerdictName,
    pub notices: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyReport {
    pub format_version: u32,
    pub frame: FrameMeta,
    pub certificates: Vec<CertificateSummary>,
    pub verdict: VerdictName,
}

/// Fails with [`Error::MemoryGuard`] when `n x n` working matrices do not fit.
pub fn check_gram_guard(n: usize, mem_guard: u128) -> Result<(), Error> {
    // Gram, embedded Gram and eigenvectors
    let required = 3 * (n as u128).pow(2) * 8;
    if required > mem_guard {
        return Err(Error::MemoryGuard { required, limit: mem_guard });
    }
    Ok(())
}

fn strongest_name(certs: &[Certificate]) -> VerdictName {
    certify::strongest(certs).map_or(VerdictName::Undetermined, |c| c.verdict.into())
}

pub fn certify_frame(frame: &Frame, source: &str, levels: &[Level], settings: &Settings) -> Result<CertifyReport, Error> {
    check_gram_guard(frame.n(), settings.mem_guard)?;
    let certs = levels
        .iter()
        .map(|level| match level {
            Level::First => certify::certify_level1(frame, settings.tol),
            Level::Second => certify::certify_level2(frame, settings.tol),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CertifyReport {
        format_version: FORMAT_VERSION,
        frame: meta(frame, source),
        certificates: certs.iter().map(Into::into).collect(),
        verdict: strongest_name(&certs),
    })
}

fn meta(frame: &Frame, source: &str) -> FrameMeta {
    FrameMeta { m: frame.m(), n: frame.n(), source: source.to_string() }
}

/// Profile, bounds, both embedded Grams and both certificates.
///
/// Embedded Grams use the tensor method when it fits under the memory guard
/// and the closed form otherwise; the fallback is recorded in `notices`.
pub fn analyze(frame: &Frame, source: &str, settings: &Settings) -> Result<AnalysisReport, Error> {
    if [settings.tol, settings.cluster_tol].iter().any(|t| t.is_nan() || *t <= 0.0) {
        return Err(Error::InvalidParameter("tolerances must be positive".into()));
    }
    let (m, n) = (frame.m(), frame.n());
    check_gram_guard(n, settings.mem_guard)?;
    let mut notices = Vec::new();

    let profile = gram_profile(frame, settings.cluster_tol);
    if profile.single_vector {
        notices.push("single vector: no pairs, coherence reported as 0".to_string());
    }
    let bounds = if n >= 2 { Some(BoundsSummary::from(&bound_report(n, m)?)) } else { None };

    let opts = EmbedOptions { cluster_tol: settings.cluster_tol, mem_guard: settings.mem_guard, ..EmbedOptions::default() };
    let mut embeddings = Vec::new();
    for level in [Level::First, Level::Second] {
        let needed = tensor_method_bytes(level, m, n);
        let method = if needed <= settings.mem_guard {
            GramMethod::Tensor
        } else {
            notices.push(format!(
                "level-{} tensor method needs {needed} bytes, over the {}-byte memory guard; using the closed form",
                level.index(),
                settings.mem_guard
            ));
            GramMethod::ClosedForm
        };
        let eg = embedded_gram(frame, level, method, &opts)?;
        embeddings.push(EmbeddingSummary {
            level: level.index(),
            dimension: embedding_dimension(level.index(), m)?,
            method: method.into(),
            simplex_deviation: eg.simplex_deviation(),
            max_offdiag: eg.max_offdiag,
            rank: eg.rank,
            signed_cosine_set: eg.signed_cosine_set,
        });
    }

    let certs = if !profile.spans {
        notices.push(format!("frame does not span R^{m}; certification skipped"));
        Vec::new()
    } else {
        vec![
            certify::certify_level1(frame, settings.tol)?,
            certify::certify_level2(frame, settings.tol)?,
        ]
    };

    Ok(AnalysisReport {
        format_version: FORMAT_VERSION,
        frame: meta(frame, source),
        profile: ProfileSummary {
            coherence: profile.coherence,
            angularity: profile.angularity,
            cosine_set: profile.cosine_set,
            tightness: profile.tightness,
            spans: profile.spans,
            single_vector: profile.single_vector,
        },
        bounds,
        embeddings,
        certificates: certs.iter().map(Into::into).collect(),
        verdict: strongest_name(&certs),
        notices,
    })
}
