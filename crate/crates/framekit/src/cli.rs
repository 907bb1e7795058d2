//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use framekit_core::certify::Route;
use framekit_core::embeddings::{embed_coordinates, embedded_gram, embedding_dimension, EmbedOptions, GramMethod, Level, RANK_TOL};
use framekit_core::frames::Frame;
use framekit_core::linalg::dot;
use framekit_core::oracle::{self, K2Accumulator};
use framekit_core::{gallery, Error as CoreError};
use serde::Serialize;

use crate::format::{parse_frame, write_frame, write_rows, LoadError};
use crate::report::{self, AnalysisReport, CertificateSummary, CertifyReport, Settings, FORMAT_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_GUARD: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "framekit", version, about = "Coherence analysis and Grassmannian certification of real frames")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Tolerance on embedded Gram entries used by certification.
    #[arg(long, global = true, default_value = "1e-8", value_parser = positive)]
    tol: f64,
    /// Gap below which cosines are merged into one value.
    #[arg(long, global = true, default_value = "1e-8", value_parser = positive)]
    cluster_tol: f64,
    /// Memory guard in bytes; accepts K, M and G suffixes (powers of 1024).
    #[arg(long, global = true, default_value = "512M", value_parser = byte_size)]
    mem_guard: u128,
}

#[derive(Debug, Args)]
struct Input {
    /// Frame file.
    path: PathBuf,
    /// Divide each row by its norm instead of requiring unit rows.
    #[arg(long)]
    renormalize: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Coherence profile, bounds, embedded Grams and certificates.
    Analyze(Input),
    /// Grassmannian certification at level 1, 2 or both.
    Certify {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=2))]
        level: Option<u32>,
    },
    /// Writes the unit vectors of the level-t embedding as a frame file.
    Embed {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..=2))]
        level: u32,
        /// Output file (stdout when absent).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Writes a gallery frame: mub-r4, pentakis16, e8-120, simplex-<m>, random-<m>-<n>-<seed>.
    Gallery {
        key: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo and brute-force cross-checks, reported as JSON.
    Oracle {
        /// Dimension for the Monte-Carlo checks (2..=5).
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Frame for the brute-force Gram check (gallery entries with m <= 6 when absent).
        #[arg(long)]
        frame: Option<PathBuf>,
    },
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not a positive number")),
    }
}

fn byte_size(s: &str) -> Result<u128, String> {
    let (digits, scale) = match s.trim().to_ascii_uppercase() {
        t if t.ends_with('K') => (t[..t.len() - 1].to_string(), 1u128 << 10),
        t if t.ends_with('M') => (t[..t.len() - 1].to_string(), 1 << 20),
        t if t.ends_with('G') => (t[..t.len() - 1].to_string(), 1 << 30),
        t => (t, 1),
    };
    digits
        .parse::<u128>()
        .ok()
        .and_then(|v| v.checked_mul(scale))
        .ok_or_else(|| format!("`{s}` is not a byte count"))
}

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }

    fn parse(message: impl Into<String>) -> Self {
        Failure { code: EXIT_PARSE, message: message.into() }
    }
}

/// Maps errors raised while processing an input frame.
fn input_failure(e: CoreError) -> Failure {
    match e {
        CoreError::MemoryGuard { .. } => Failure { code: EXIT_GUARD, message: e.to_string() },
        CoreError::InvalidParameter(_) => Failure::usage(e.to_string()),
        other => Failure::parse(other.to_string()),
    }
}

fn load(input: &Input) -> Result<Frame, Failure> {
    let text = fs::read_to_string(&input.path)
        .map_err(|e| Failure::parse(format!("{}: {e}", input.path.display())))?;
    parse_frame(&text, input.renormalize).map_err(|e| match e {
        LoadError::Frame(inner) => input_failure(inner).prefixed(&input.path),
        other => Failure::parse(format!("{}: {other}", input.path.display())),
    })
}

impl Failure {
    fn prefixed(mut self, path: &Path) -> Self {
        self.message = format!("{}: {}", path.display(), self.message);
        self
    }
}

fn emit(out: Option<&PathBuf>, stdout: &mut dyn Write, body: &[u8]) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, body).map_err(|e| Failure::parse(format!("{}: {e}", path.display()))),
        None => stdout.write_all(body).map_err(|e| Failure::parse(e.to_string())),
    }
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut text = serde_json::to_vec_pretty(value).expect("reports serialize");
    text.push(b'\n');
    text
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(&cli, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    let settings = Settings { tol: cli.tol, cluster_tol: cli.cluster_tol, mem_guard: cli.mem_guard };
    match &cli.command {
        Command::Analyze(input) => {
            let frame = load(input)?;
            let report = report::analyze(&frame, &input.path.display().to_string(), &settings).map_err(input_failure)?;
            for notice in &report.notices {
                let _ = writeln!(stderr, "notice: {notice}");
            }
            let body = if cli.json { to_json(&report) } else { render_analysis(&report).into_bytes() };
            emit(None, stdout, &body)
        }
        Command::Certify { input, level } => {
            let frame = load(input)?;
            let levels: Vec<Level> = match level {
                Some(t) => vec![Level::from_index(*t).expect("range-checked level")],
                None => vec![Level::First, Level::Second],
            };
            let report = report::certify_frame(&frame, &input.path.display().to_string(), &levels, &settings)
                .map_err(input_failure)?;
            let body = if cli.json { to_json(&report) } else { render_certify(&report).into_bytes() };
            emit(None, stdout, &body)
        }
        Command::Embed { input, level, out } => {
            let frame = load(input)?;
            let body = embed(&frame, &input.path, Level::from_index(*level).expect("range-checked level"), &settings)?;
            emit(out.as_ref(), stdout, &body)
        }
        Command::Gallery { key, out } => {
            let body = gallery_file(key, settings.mem_guard)?;
            emit(out.as_ref(), stdout, &body)
        }
        Command::Oracle { m, samples, seed, frame } => {
            let frame = match frame {
                Some(path) => Some((path.display().to_string(), load(&Input { path: path.clone(), renormalize: false })?)),
                None => None,
            };
            let report = oracle_report(*m, *samples, *seed, frame, settings.mem_guard)?;
            emit(None, stdout, &to_json(&report))
        }
    }
}

fn gallery_file(key: &str, mem_guard: u128) -> Result<Vec<u8>, Failure> {
    if let Some((m, n)) = random_size(key) {
        let required = m as u128 * n as u128 * 8;
        if required > mem_guard {
            return Err(Failure { code: EXIT_GUARD, message: CoreError::MemoryGuard { required, limit: mem_guard }.to_string() });
        }
    }
    let entry = gallery::by_key(key).map_err(|e| {
        Failure::usage(format!("{e}; available keys: {}", gallery::KEYS.join(", ")))
    })?;
    let mut buf = Vec::new();
    write_frame(&mut buf, &[format!("gallery {}", entry.key)], &entry.frame).expect("writes to memory");
    Ok(buf)
}

fn random_size(key: &str) -> Option<(usize, usize)> {
    let mut parts = key.strip_prefix("random-")?.split('-');
    Some((parts.next()?.parse().ok()?, parts.next()?.parse().ok()?))
}

fn embed(frame: &Frame, path: &Path, level: Level, settings: &Settings) -> Result<Vec<u8>, Failure> {
    let (m, n) = (frame.m(), frame.n());
    let dim = embedding_dimension(level.index(), m).map_err(input_failure)?;
    let required = dim.saturating_mul(n as u128).saturating_mul(8);
    if required > settings.mem_guard {
        return Err(input_failure(CoreError::MemoryGuard { required, limit: settings.mem_guard }));
    }
    report::check_gram_guard(n, settings.mem_guard).map_err(input_failure)?;
    let opts = EmbedOptions { cluster_tol: settings.cluster_tol, mem_guard: settings.mem_guard, ..EmbedOptions::default() };
    let eg = embedded_gram(frame, level, GramMethod::ClosedForm, &opts).map_err(input_failure)?;
    let rows = embed_coordinates(&eg, m, RANK_TOL).map_err(input_failure)?;
    let mut reconstruction = 0.0_f64;
    for j in 0..n {
        for l in j..n {
            reconstruction = reconstruction.max((dot(&rows[j], &rows[l]) - eg.matrix[(j, l)]).abs());
        }
    }
    let comments = vec![
        format!("level {} embedding of {} (m = {m}, n = {n})", level.index(), path.display()),
        format!(
            "rank {}, simplex deviation {:e}, max off-diagonal {:e}, reconstruction error {:e}",
            eg.rank,
            eg.simplex_deviation(),
            eg.max_offdiag,
            reconstruction
        ),
    ];
    let mut buf = Vec::new();
    write_rows(&mut buf, &comments, dim as usize, &rows).expect("writes to memory");
    Ok(buf)
}

fn fmt_set(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.10}")).collect();
    format!("{{{}}}", parts.join(", "))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.10}"))
}

fn render_certificate(out: &mut String, c: &CertificateSummary) {
    use std::fmt::Write as _;
    let _ = writeln!(
        out,
        "level {}      {:?} (route {:?}, constant {})",
        c.level,
        c.verdict,
        c.route,
        fmt_opt(c.certified_constant)
    );
    for k in &c.conditions {
        let mark = if k.pass { "ok  " } else { "fail" };
        let _ = writeln!(out, "  {mark} {:<30} {:.10} vs {:.10}", k.name, k.value, k.threshold);
    }
}

fn render_analysis(r: &AnalysisReport) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(out, "source       {}", r.frame.source);
    let _ = writeln!(out, "m, n         {}, {}", r.frame.m, r.frame.n);
    let _ = writeln!(out, "coherence    {:.10}", r.profile.coherence);
    let _ = writeln!(out, "cosines      {} ({}-angular)", fmt_set(&r.profile.cosine_set), r.profile.angularity);
    let _ = writeln!(out, "tight        {}", r.profile.tightness.map_or("no".into(), |a| format!("a = {a:.10}")));
    if let Some(b) = &r.bounds {
        let flag = |ok: bool| if ok { "" } else { " (not applicable)" };
        let _ = writeln!(out, "welch        {:.10}{}", b.welch.value, flag(b.welch.applicable));
        let _ = writeln!(out, "orthoplex    {:.10}{}", b.orthoplex.value, flag(b.orthoplex.applicable));
        let _ = writeln!(out, "l2 simplex   {}", fmt_opt(b.second_simplex.value));
        let _ = writeln!(out, "l2 orthant   {}", fmt_opt(b.second_orthant.value));
        let _ = writeln!(out, "best bound   {:.10}", b.best_applicable);
    }
    for e in &r.embeddings {
        let _ = writeln!(
            out,
            "embedding {}  D = {}, {:?}, rank {}, simplex deviation {:.3e}, max off-diagonal {:.10}",
            e.level, e.dimension, e.method, e.rank, e.simplex_deviation, e.max_offdiag
        );
        let _ = writeln!(out, "  signed     {}", fmt_set(&e.signed_cosine_set));
    }
    for c in &r.certificates {
        render_certificate(&mut out, c);
    }
    let _ = writeln!(out, "verdict      {:?}", r.verdict);
    out
}

fn render_certify(r: &CertifyReport) -> String {
    let mut out = String::new();
    for c in &r.certificates {
        render_certificate(&mut out, c);
    }
    out.push_str(&format!("verdict      {:?}\n", r.verdict));
    out
}

#[derive(Debug, Serialize)]
struct MonteCarloSection {
    m: usize,
    samples: usize,
    seed: u64,
    shards: u64,
    tolerance: f64,
    k2_max_abs_error: f64,
    k2_max_unsupported: f64,
    diagonal_family_mean: f64,
    diagonal_family_analytic: f64,
    off_family_mean: f64,
    off_family_analytic: f64,
    mean_q1_max_abs: f64,
    second_moment_deviation: f64,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct BruteForceSection {
    source: String,
    max_abs_diff_closed_form: f64,
    max_abs_diff_tensor: f64,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct InversionSection {
    n: usize,
    m: usize,
    route: String,
    target: f64,
    applicable: bool,
    closed_form_x: f64,
    bisection_x: f64,
    abs_diff_x: f64,
    bound: f64,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct SweepRow {
    m: usize,
    square_minus_first_dimension: i128,
    orthant_route_live: bool,
}

#[derive(Debug, Serialize)]
struct OracleReport {
    format_version: u32,
    monte_carlo: MonteCarloSection,
    brute_force: Vec<BruteForceSection>,
    inversion: Vec<InversionSection>,
    orthant_sweep: Vec<SweepRow>,
    pass: bool,
}

/// Runs the Monte-Carlo shards on separate threads; merging in shard
/// order keeps the result identical to the sequential computation.
fn parallel_k2(m: usize, samples: usize, seed: u64) -> K2Accumulator {
    let sizes = oracle::shard_sizes(samples, oracle::MC_SHARDS);
    let parts: Vec<K2Accumulator> = std::thread::scope(|scope| {
        let handles: Vec<_> = sizes
            .iter()
            .enumerate()
            .map(|(shard, &count)| {
                scope.spawn(move || {
                    let mut acc = K2Accumulator::new(m);
                    acc.run(&mut oracle::shard_rng(seed, shard as u64), count);
                    acc
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("shard thread")).collect()
    });
    let mut total = K2Accumulator::new(m);
    for p in &parts {
        total.merge(p);
    }
    total
}

fn oracle_report(
    m: usize,
    samples: usize,
    seed: u64,
    frame: Option<(String, Frame)>,
    mem_guard: u128,
) -> Result<OracleReport, Failure> {
    let guarded = |e: CoreError| match e {
        CoreError::MemoryGuard { .. } => Failure { code: EXIT_GUARD, message: e.to_string() },
        other => Failure::usage(other.to_string()),
    };
    if !(2..=5).contains(&m) || samples < oracle::MIN_MC_SAMPLES {
        return Err(Failure::usage(format!(
            "oracle needs 2 <= m <= 5 and at least {} samples",
            oracle::MIN_MC_SAMPLES
        )));
    }
    let est = oracle::finish_mc_k2(&parallel_k2(m, samples, seed), seed, mem_guard).map_err(guarded)?;
    let mean_q1 = oracle::mc_mean_q1(m, samples, seed).map_err(guarded)?;
    let second = oracle::mc_second_moment_deviation(m, samples, seed).map_err(guarded)?;
    let a = 3.0 / (m * (m + 2)) as f64;
    let tolerance = est.tolerance();
    let monte_carlo = MonteCarloSection {
        m,
        samples,
        seed,
        shards: oracle::MC_SHARDS,
        tolerance,
        k2_max_abs_error: est.max_abs_error,
        k2_max_unsupported: est.max_unsupported,
        diagonal_family_mean: est.diagonal_family_mean,
        diagonal_family_analytic: a,
        off_family_mean: est.off_family_mean,
        off_family_analytic: a / 3.0,
        mean_q1_max_abs: mean_q1,
        second_moment_deviation: second,
        pass: est.max_abs_error <= tolerance && mean_q1 <= tolerance && second <= tolerance,
    };

    let frames: Vec<(String, Frame)> = match frame {
        Some(f) => vec![f],
        None => ["mub-r4", "pentakis16", "simplex-2", "simplex-3", "simplex-4", "simplex-5", "simplex-6"]
            .iter()
            .map(|k| (k.to_string(), gallery::by_key(k).expect("built-in key").frame))
            .collect(),
    };
    let opts = EmbedOptions { mem_guard, ..EmbedOptions::default() };
    let mut brute_force = Vec::new();
    for (source, f) in frames {
        let brute = oracle::brute_force_embedded_gram(&f).map_err(guarded)?;
        let closed = embedded_gram(&f, Level::Second, GramMethod::ClosedForm, &opts).map_err(guarded)?;
        let tensor = embedded_gram(&f, Level::Second, GramMethod::Tensor, &opts).map_err(guarded)?;
        let dc = (&brute.matrix - closed.matrix).amax();
        let dt = (&brute.matrix - tensor.matrix).amax();
        brute_force.push(BruteForceSection {
            source,
            max_abs_diff_closed_form: dc,
            max_abs_diff_tensor: dt,
            pass: dc <= 1e-10 && dt <= 1e-10,
        });
    }

    let mut inversion = Vec::new();
    for (n, m, route) in [(120, 8, Route::Simplex), (631, 8, Route::Simplex), (631, 8, Route::Orthant), (50, 4, Route::Simplex)] {
        let r = oracle::validate_bound_inversion(n, m, route).map_err(guarded)?;
        inversion.push(InversionSection {
            n,
            m,
            route: format!("{route:?}").to_lowercase(),
            target: r.target,
            applicable: r.applicable,
            closed_form_x: r.closed_form_x,
            bisection_x: r.bisection_x,
            abs_diff_x: r.abs_diff_x,
            bound: r.bound,
            pass: r.abs_diff_x <= 1e-12,
        });
    }

    let orthant_sweep = oracle::orthant_route_sweep(50)
        .into_iter()
        .map(|(m, gap, live)| SweepRow { m, square_minus_first_dimension: gap, orthant_route_live: live })
        .collect();

    let pass = monte_carlo.pass && brute_force.iter().all(|b| b.pass) && inversion.iter().all(|i| i.pass);
    Ok(OracleReport { format_version: FORMAT_VERSION, monte_carlo, brute_force, inversion, orthant_sweep, pass })
}
