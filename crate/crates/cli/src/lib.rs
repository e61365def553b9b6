//! Command-line front end: argument parsing, JSON reports and the
//! acceptance suite.
//!
//! Exit codes: 0 when every asserted check passes, 1 when one fails or a
//! computation errors out, 2 for bad arguments or unreadable input.

pub mod report;
pub mod suite;

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use dkmeasure::forms::{
    best_convention, flip_discontinuity, lambda_length, omega_total, top_coefficient, wp_form, Decoration,
};
use dkmeasure::geom::PointConfiguration;
use dkmeasure::kahler::{det_excluding, kahler_matrix, normalized_det, prepotential};
use dkmeasure::mc::{self, conditional_growth_check, growth_chain, random_configuration, McOptions};
use dkmeasure::regions::{self, integral_b, integral_r, refined_integral};
use dkmeasure::tri::{delaunay, TriangulationDoc};
use dkmeasure::voronoi::{dual_graph, LengthKind};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use report::{CheckRecord, ReportDocument, Status};
use suite::SuiteOptions;

/// Environment variable holding the default worker thread count.
pub const THREADS_ENV: &str = "DKMEASURE_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("{0}")]
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Compute(_) => 1,
            _ => 2,
        }
    }
}

fn compute<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Compute(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "dkmeasure", version, about = "Kähler measure on planar Delaunay triangulations")]
pub struct Cli {
    /// Worker threads for Monte Carlo runs (default: all cores).
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
    /// Accepted for compatibility; output is always JSON.
    #[arg(long, global = true, hide = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormsCheck {
    Omega,
    Wp,
    Ptolemy,
    Topcoeff,
    FlipDiscontinuity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegionArg {
    #[value(name = "R")]
    R,
    #[value(name = "B")]
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LengthArg {
    Hyperbolic,
    Flat,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Random configuration with N free points.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Delaunay triangulation with edge angles.
    Delaunay {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// det D, normalized det, spectrum and prepotential.
    Measure {
        #[arg(long)]
        input: PathBuf,
        /// Three vertex ids to exclude (default: the gauge).
        #[arg(long, value_delimiter = ',')]
        exclude: Option<Vec<usize>>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Identities between the symplectic forms.
    Forms {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        check: FormsCheck,
        /// Edge u,v for the flip discontinuity (default: the most cocyclic interior edge).
        #[arg(long, value_delimiter = ',')]
        edge: Option<Vec<usize>>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Monte Carlo integral of the four-point density over a face region.
    Regions {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        face: usize,
        #[arg(long, value_enum, default_value = "B")]
        kind: RegionArg,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Dual graph with hyperbolic or flat edge lengths.
    Voronoi {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "hyperbolic")]
        lengths: LengthArg,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Volumes V_0..V_N and the growth ratios.
    Volume {
        #[arg(long = "N")]
        n: usize,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = mc::DEFAULT_VOLUME_CAP)]
        cap: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Conditional growth bound for one base configuration.
    Growth {
        #[arg(long)]
        base: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also test the refined bound.
        #[arg(long)]
        refined: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// The full acceptance suite.
    VerifyAll {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Monte Carlo sample counts divided by ten.
        #[arg(long)]
        quick: bool,
        /// Run only these check ids.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Parses `argv` (program name first) and runs the command; returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(doc) => i32::from(!doc.passed()),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<ReportDocument, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        // a pool may already exist when called twice in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let (doc, output) = match cli.command {
        Command::Gen { n, seed, output } => {
            let config = random_configuration(n, seed);
            write_json(output.as_deref(), &config)?;
            return Ok(ReportDocument::new("gen", Some(seed)));
        }
        Command::Delaunay { input, output } => {
            let t = delaunay(&read_config(&input)?).map_err(compute)?;
            write_json(output.as_deref(), &TriangulationDoc::from_triangulation(&t).map_err(compute)?)?;
            return Ok(ReportDocument::new("delaunay", None));
        }
        Command::Measure { input, exclude, output } => (measure(&read_config(&input)?, exclude)?, output),
        Command::Forms { input, check, edge, output } => (forms(&read_config(&input)?, check, edge)?, output),
        Command::Regions { input, face, kind, samples, seed, output } => {
            (region(&read_config(&input)?, face, kind, &McOptions::new(samples, seed))?, output)
        }
        Command::Voronoi { input, lengths, output } => (voronoi(&read_config(&input)?, lengths)?, output),
        Command::Volume { n, samples, seed, cap, output } => (volume(n, &McOptions::new(samples, seed), cap)?, output),
        Command::Growth { base, samples, seed, refined, output } => {
            (growth(&read_config(&base)?, &McOptions::new(samples, seed), refined)?, output)
        }
        Command::VerifyAll { seed, quick, only, output } => {
            let opts = SuiteOptions { seed, quick };
            let ids: Vec<u32> = if only.is_empty() { (1..=suite::CHECK_COUNT).collect() } else { only };
            let mut doc = ReportDocument::new("verify-all", Some(seed));
            for id in ids {
                let rec = suite::run_check(id, &opts).ok_or_else(|| CliError::Usage(format!("no check #{id}")))?;
                eprintln!("{}", rec.line());
                doc.checks.push(rec);
            }
            (doc, output)
        }
    };
    write_json(output.as_deref(), &doc)?;
    Ok(doc)
}

fn read_config(path: &Path) -> Result<PointConfiguration, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    serde_json::from_str(&text).map_err(|source| CliError::Parse { path: path.into(), source })
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(compute)?;
    match path {
        Some(p) => fs::write(p, text + "\n").map_err(|source| CliError::Io { path: p.into(), source }),
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{text}").map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}

fn record(name: &str, status: Status, measured: f64, expected: f64, tolerance: f64, detail: String) -> CheckRecord {
    CheckRecord {
        id: 0,
        name: name.into(),
        anchor: name.into(),
        status,
        measured,
        expected,
        tolerance,
        sigma: None,
        detail,
        duration_ms: 0,
    }
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

fn measure(config: &PointConfiguration, exclude: Option<Vec<usize>>) -> Result<ReportDocument, CliError> {
    let t = delaunay(config).map_err(compute)?;
    let d = kahler_matrix(&t).map_err(compute)?;
    let exclude = exclude.unwrap_or_else(|| config.gauge().to_vec());
    let triple: [usize; 3] = exclude.clone().try_into().map_err(|_| CliError::Usage("--exclude takes three ids".into()))?;
    if let Some(&v) = exclude.iter().find(|&&v| v >= config.len()) {
        return Err(CliError::Usage(format!("no vertex {v}")));
    }
    let normalized = if config.infinite_vertex().is_some_and(|i| triple.contains(&i)) {
        Some(normalized_det(&t, triple).map_err(compute)?)
    } else {
        None
    };
    let mut doc = ReportDocument::new("measure", None);
    doc.data = json!({
        "exclude": exclude,
        "det": det_excluding(&d, &exclude),
        "normalized_det": normalized,
        "eigenvalues": d.eigenvalues(),
        "prepotential": prepotential(&t).map_err(compute)?,
    });
    Ok(doc)
}

fn forms(config: &PointConfiguration, check: FormsCheck, edge: Option<Vec<usize>>) -> Result<ReportDocument, CliError> {
    let t = delaunay(config).map_err(compute)?;
    let mut doc = ReportDocument::new("forms", None);
    match check {
        FormsCheck::Omega => {
            let err = suite::omega_consistency(&t).map_err(compute)?;
            doc.checks.push(record("omega", Status::from_bool(err <= 1e-9), err, 0.0, 1e-9, format!("rel {err:.2e}")));
        }
        FormsCheck::Wp => {
            let len = config.len();
            let a = wp_form(&t, &Decoration::uniform(len, 1.0)).map_err(compute)?;
            let radii = (0..len).map(|k| 0.5 + 0.37 * k as f64).collect();
            let b = wp_form(&t, &Decoration { radii, h_inf: 2.3 }).map_err(compute)?;
            let mut two = omega_total(&t).map_err(compute)?;
            two.m *= 2.0;
            let err = a.rel_diff(&two);
            let exact = a.m == b.m;
            doc.checks.push(record(
                "wp",
                Status::from_bool(err <= 1e-9 && exact),
                err,
                0.0,
                1e-9,
                format!("rel |WP - 2 Omega| {err:.2e}; decoration independence exact: {exact}"),
            ));
        }
        FormsCheck::Topcoeff => {
            let n = config.free_ids().len();
            let pf = top_coefficient(&omega_total(&t).map_err(compute)?, n).map_err(compute)?;
            let det = det_excluding(&kahler_matrix(&t).map_err(compute)?, &config.gauge());
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let err = rel(pf, sign * det);
            doc.checks.push(record(
                "topcoeff",
                Status::from_bool(err <= 1e-8),
                err,
                0.0,
                1e-8,
                format!("Pf = {pf:.10e}, (-1)^N det D = {:.10e}", sign * det),
            ));
        }
        FormsCheck::Ptolemy => {
            let mut quads = Vec::new();
            for h in t.edges().into_iter().filter(|&h| t.is_interior(h)) {
                let ids = [t.apex(h), t.origin(h), t.apex(t.twin(h)), t.dest(h)];
                let Some(z) = ids.iter().map(|&v| config.point(v)).collect::<Option<Vec<_>>>() else { continue };
                let l = |i: usize, j: usize| lambda_length(z[i], z[j], 1.0, 1.0).map_err(compute);
                let lhs = l(0, 2)? * l(1, 3)?;
                let rhs = l(0, 1)? * l(2, 3)? + l(0, 3)? * l(1, 2)?;
                let theta = t.theta(h).map_err(compute)?;
                let residual = rel(lhs, rhs);
                // Ptolemy is an identity only on cocyclic quadruples
                if theta.abs() <= 1e-9 {
                    doc.checks.push(record(
                        "ptolemy",
                        Status::from_bool(residual <= 1e-12),
                        residual,
                        0.0,
                        1e-12,
                        format!("quad {ids:?}"),
                    ));
                }
                quads.push(json!({"quad": ids, "theta": theta, "residual": residual}));
            }
            doc.data = json!({ "quads": quads });
        }
        FormsCheck::FlipDiscontinuity => {
            let (u, v) = match edge.as_deref() {
                Some(&[u, v]) => (u, v),
                Some(_) => return Err(CliError::Usage("--edge takes two ids".into())),
                None => {
                    let h = t
                        .edges()
                        .into_iter()
                        .filter(|&h| t.is_interior(h))
                        .min_by(|&a, &b| t.theta(a).unwrap_or(PI).abs().total_cmp(&t.theta(b).unwrap_or(PI).abs()))
                        .ok_or_else(|| compute("no interior edge"))?;
                    (t.origin(h), t.dest(h))
                }
            };
            let fd = flip_discontinuity(config, u, v, &[]).map_err(compute)?;
            let m = best_convention(&fd.lhs, &fd.rhs);
            doc.checks.push(record(
                "flip-discontinuity",
                Status::ReportOnly,
                m.rel_error,
                0.0,
                1e-5,
                format!("edge ({u}, {v}); sign {:+}, scale {:.6e}", m.sign, m.scale),
            ));
            doc.data = json!({ "labels": fd.labels, "lhs": fd.lhs.v.as_slice(), "rhs": fd.rhs.v.as_slice(), "convention": m });
        }
    }
    Ok(doc)
}

fn region(config: &PointConfiguration, face: usize, kind: RegionArg, opts: &McOptions) -> Result<ReportDocument, CliError> {
    let t = delaunay(config).map_err(compute)?;
    if face >= t.num_faces() {
        return Err(CliError::Usage(format!("face {face} out of range (0..{})", t.num_faces())));
    }
    let (e, closed) = match kind {
        RegionArg::B => (integral_b(&t, face, opts).map_err(compute)?, regions::REGION_INTEGRAL),
        RegionArg::R => (integral_r(&t, face, opts).map_err(compute)?, refined_integral(&t, face).map_err(compute)?),
    };
    let sigma = e.sigma_distance(closed);
    let mut doc = ReportDocument::new("regions", Some(opts.seed));
    let mut rec = record(
        if kind == RegionArg::B { "integral over B(f)" } else { "integral over R(f)" },
        Status::from_bool(sigma.abs() <= 3.0),
        e.mean,
        closed,
        3.0 * e.stderr,
        format!("{:.6}±{:.6} vs {closed:.6}", e.mean, e.stderr),
    );
    rec.sigma = Some(sigma);
    doc.checks.push(rec);
    doc.data = json!({ "face": face, "vertices": t.face(face), "estimate": e.mean, "stderr": e.stderr,
        "closed_form": closed, "sigma_distance": sigma, "samples": e.n, "rejected": e.rejected });
    Ok(doc)
}

fn voronoi(config: &PointConfiguration, lengths: LengthArg) -> Result<ReportDocument, CliError> {
    let kind = match lengths {
        LengthArg::Hyperbolic => LengthKind::Hyperbolic,
        LengthArg::Flat => LengthKind::Flat,
    };
    let t = delaunay(config).map_err(compute)?;
    let g = dual_graph(&t).map_err(compute)?;
    let nodes: Vec<_> =
        g.nodes.iter().map(|n| json!({"face": n.face, "vertices": n.vertices, "center": [n.center.re, n.center.im]})).collect();
    let mut edges = Vec::new();
    for e in &g.edges {
        edges.push(json!({
            "v1": e.v1, "v2": e.v2, "north": e.north, "south": e.south,
            "theta_n": e.theta_n, "theta_s": e.theta_s, "theta": e.theta(),
            "length": e.length(kind).map_err(compute)?,
        }));
    }
    let mut doc = ReportDocument::new("voronoi", None);
    doc.data = json!({ "lengths": kind, "nodes": nodes, "edges": edges });
    Ok(doc)
}

fn volume(n: usize, opts: &McOptions, cap: usize) -> Result<ReportDocument, CliError> {
    let rows = growth_chain(n, opts, cap).map_err(compute)?;
    let bound = PI * PI / 8.0;
    let mut doc = ReportDocument::new("volume", Some(opts.seed));
    for r in &rows {
        if let (Some((ratio, se)), Some(pass)) = (r.ratio, r.ratio_pass) {
            let mut rec = record(
                &format!("V_{0} / ({0} V_{1})", r.n_free, r.n_free - 1),
                Status::from_bool(pass),
                ratio,
                bound,
                mc::INEQUALITY_SLACK,
                format!("{ratio:.5}±{se:.5} vs pi^2/8 = {bound:.5}"),
            );
            rec.sigma = Some((ratio - bound) / se);
            doc.checks.push(rec);
        }
    }
    doc.data = serde_json::to_value(&rows).map_err(compute)?;
    Ok(doc)
}

fn growth(base: &PointConfiguration, opts: &McOptions, refined: bool) -> Result<ReportDocument, CliError> {
    let c = conditional_growth_check(base, opts, refined).map_err(compute)?;
    let mut doc = ReportDocument::new("growth", Some(opts.seed));
    let mut rec = record(
        "conditional growth",
        Status::from_bool(c.pass),
        c.lhs.mean,
        c.rhs,
        mc::INEQUALITY_SLACK,
        format!("{:.6e}±{:.2e} vs (N+1) pi^2/8 det = {:.6e}", c.lhs.mean, c.lhs.stderr, c.rhs),
    );
    rec.sigma = Some(c.sigma_distance);
    doc.checks.push(rec);
    if let (Some(rhs), Some(pass)) = (c.rhs_refined, c.pass_refined) {
        let mut rec = record(
            "refined growth",
            Status::from_bool(pass),
            c.lhs.mean,
            rhs,
            mc::INEQUALITY_SLACK,
            format!("refined bound {rhs:.6e}"),
        );
        rec.sigma = Some(c.lhs.sigma_distance(rhs));
        doc.checks.push(rec);
    }
    doc.data = serde_json::to_value(&c).map_err(compute)?;
    Ok(doc)
}
