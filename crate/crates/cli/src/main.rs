mod constexpr;

use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use qcorr::experiments::{self, ExperimentConfig, ExperimentError, GridPoint, PartialConfig, Scenario};
use qcorr::matrix::{operator_norm, trace_norm, Matrix, MatrixError};
use qcorr::norms::{
    bell_certificate, bell_functional_from_svd, classical_lower_bound, classical_upper_bound,
    gamma2_bracket_with, gamma2_oracle_interval, gamma2_star_orthogonal, infty_to_one_exact,
    infty_to_one_heuristic, quantum_classical_gap_with, BellOptions, Certificate, Gamma2Options, NormError,
};
use qcorr::sample::{EnsembleSpec, SampleError, SeedSpec};
use qcorr::spectral::{self, SpectralError};
use qcorr::Error;

const OUT_DIR_ENV: &str = "QCORR_OUT_DIR";

#[derive(Debug, Parser, Serialize)]
#[command(name = "qcorr", version, about = "Quantum and classical correlation norms of random matrices")]
struct Cli {
    /// Master seed for sampling and experiments.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for experiments (default: all logical cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file. Defaults to stdout, or `$QCORR_OUT_DIR/<command>.<format>`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Draw one matrix from an ensemble.
    Sample(SampleArgs),
    /// A single norm of a CSV matrix.
    Norm(NormArgs),
    /// The γ₂ bracket, optionally with the small-n oracle.
    Gamma2(Gamma2Args),
    /// Lower and upper bounds on the classical (projective) norm.
    Classical(ClassicalArgs),
    /// The certified quantum/classical gap.
    Gap(GapArgs),
    /// The limiting singular-value law at ratio alpha.
    Spectral(SpectralArgs),
    /// The ratio below which unit-vector correlations are certified non-local.
    Threshold(ThresholdArgs),
    /// Run a Monte Carlo scenario and emit its report.
    Experiment(ExperimentArgs),
    /// Re-evaluate every certificate in a report or certificate file.
    VerifyCertificate(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Ensemble {
    Gaussian,
    HaarOrthogonal,
    BiInvariant,
    GaussianProduct,
    UnitRowsCorrelation,
}

#[derive(Debug, Args, Serialize)]
struct SampleArgs {
    #[arg(long, value_enum)]
    ensemble: Ensemble,
    #[arg(short, long)]
    n: usize,
    /// Inner dimension for the product and unit-row ensembles.
    #[arg(short, long)]
    m: Option<usize>,
    /// Comma-separated singular values for `bi-invariant`.
    #[arg(long, value_delimiter = ',', value_parser = constexpr::parse_f64)]
    spectrum: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    trial_index: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Which {
    InftyToOne,
    InftyToOneHeuristic,
    Trace,
    Operator,
    Frobenius,
    Gamma2Star,
}

#[derive(Debug, Args, Serialize)]
struct NormArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, value_enum)]
    which: Which,
    /// Random restarts for the heuristic.
    #[arg(long, default_value_t = 50)]
    restarts: usize,
}

#[derive(Debug, Args, Serialize)]
struct Gamma2Args {
    #[arg(long)]
    matrix: PathBuf,
    /// Also run the interior-point oracle (n ≤ 12).
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value = "1e-7", value_parser = constexpr::parse_f64)]
    tol: f64,
    #[arg(long, default_value_t = Gamma2Options::default().rescale_steps)]
    rescale_steps: usize,
}

#[derive(Debug, Args, Serialize)]
struct ClassicalArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, default_value_t = 2000)]
    max_atoms: usize,
    #[arg(long, default_value = "1e-9", value_parser = constexpr::parse_f64)]
    tol: f64,
}

#[derive(Debug, Args, Serialize)]
struct GapArgs {
    /// CSV matrix; without it a Gaussian `G/√n` is drawn.
    #[arg(long, conflicts_with = "n")]
    matrix: Option<PathBuf>,
    #[arg(short, long, required_unless_present = "matrix")]
    n: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
struct SpectralArgs {
    #[arg(long, allow_hyphen_values = true, value_parser = constexpr::parse_f64)]
    alpha: f64,
    #[arg(long, default_value_t = spectral::DEFAULT_GRID_POINTS)]
    grid: usize,
}

#[derive(Debug, Args, Serialize)]
struct ThresholdArgs {
    /// The constant `c` in `c · C_α / √α = 1`, e.g. `sqrt(16/15)`.
    #[arg(long, allow_hyphen_values = true, value_parser = constexpr::parse_f64)]
    gap: f64,
    #[arg(long, default_value_t = spectral::DEFAULT_GRID_POINTS)]
    grid: usize,
    #[arg(long, default_value = "1e-4", value_parser = constexpr::parse_f64)]
    tol: f64,
}

#[derive(Debug, Args, Serialize)]
struct ExperimentArgs {
    #[arg(long, value_parser = parse_scenario)]
    scenario: Option<Scenario>,
    /// JSON file with any subset of the config fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sizes; combined with every `--alpha` or `--m` value when given.
    #[arg(short, long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',', value_parser = constexpr::parse_f64)]
    alpha: Vec<f64>,
    #[arg(short, long, value_delimiter = ',')]
    m: Vec<usize>,
    #[arg(long)]
    trials: Option<usize>,
    /// Override a threshold, `name=value`; repeatable.
    #[arg(long = "threshold", value_parser = parse_threshold)]
    thresholds: Vec<(String, f64)>,
    #[arg(long, value_parser = parse_ensemble_kind)]
    ensemble: Option<experiments::EnsembleKind>,
    #[arg(long)]
    max_certificates: Option<usize>,
    /// Record wall-clock time (makes the report non-reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Args, Serialize)]
struct VerifyArgs {
    /// A report, a command output, or a bare certificate (JSON).
    path: PathBuf,
}

fn parse_scenario(s: &str) -> Result<Scenario, String> {
    Scenario::parse(s).ok_or_else(|| {
        let names: Vec<&str> = Scenario::ALL.iter().map(|s| s.name()).collect();
        format!("unknown scenario {s:?}; expected one of {}", names.join(", "))
    })
}

fn parse_ensemble_kind(s: &str) -> Result<experiments::EnsembleKind, String> {
    serde_json::from_value(Value::String(s.replace('-', "_"))).map_err(|_| {
        format!("unknown ensemble {s:?}; expected gaussian, haar_orthogonal or spiky")
    })
}

fn parse_threshold(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected name=value")?;
    Ok((k.trim().to_string(), constexpr::eval(v)?))
}

/// A failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            kind: "validation",
            message: message.into(),
        }
    }
}

fn matrix_is_validation(e: &MatrixError) -> bool {
    !matches!(e, MatrixError::SvdNotConverged { .. } | MatrixError::ZeroMatrix)
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let validation = match &e {
            Error::Matrix(m) => matrix_is_validation(m),
            Error::Sample(SampleError::InvalidSpec(_) | SampleError::NegativeSpectrum { .. }) => true,
            Error::Sample(SampleError::Matrix(m)) => matrix_is_validation(m),
            Error::Norm(
                NormError::ExceedsExactCap { .. }
                | NormError::NotOrthogonal { .. }
                | NormError::OracleTooLarge { .. }
                | NormError::InvalidArgument(_),
            ) => true,
            Error::Norm(NormError::Matrix(m)) => matrix_is_validation(m),
            Error::Spectral(
                SpectralError::InvalidAlpha(_) | SpectralError::InvalidGap(_) | SpectralError::GridTooSmall(_),
            ) => true,
            Error::Experiment(ExperimentError::Config(_)) => true,
            _ => false,
        };
        Self {
            code: if validation { 2 } else { 1 },
            kind: if validation { "validation" } else { "numerical" },
            message: e.to_string(),
        }
    }
}

macro_rules! impl_from_lib {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Error::from(e).into()
            }
        }
    )*};
}
impl_from_lib!(MatrixError, SampleError, NormError, SpectralError, ExperimentError);

/// What a command produced: the JSON value, an optional CSV rendering, and
/// the exit code to use after writing it.
struct Emitted {
    json: Value,
    csv: Option<Vec<u8>>,
    code: u8,
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema: &'static str,
    command: &'a Command,
    seed: u64,
    result: Value,
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("library types serialize")
}

fn read_matrix(path: &Path) -> Result<Matrix, Failure> {
    let file = File::open(path).map_err(|e| Failure::validation(format!("{}: {e}", path.display())))?;
    Ok(Matrix::read_csv(BufReader::new(file))?)
}

fn csv_pairs(pairs: &[(&str, f64)]) -> Vec<u8> {
    let mut out = b"key,value\n".to_vec();
    for (k, v) in pairs {
        out.extend(format!("{k},{v:e}\n").into_bytes());
    }
    out
}

fn cmd_sample(a: &SampleArgs, seed: u64) -> Result<Emitted, Failure> {
    let need_m = || a.m.ok_or_else(|| Failure::validation("--m is required for this ensemble"));
    let spec = match a.ensemble {
        Ensemble::Gaussian => EnsembleSpec::Gaussian { n: a.n },
        Ensemble::HaarOrthogonal => EnsembleSpec::HaarOrthogonal { n: a.n },
        Ensemble::BiInvariant => EnsembleSpec::BiInvariant {
            n: a.n,
            spectrum: a
                .spectrum
                .clone()
                .ok_or_else(|| Failure::validation("--spectrum is required for bi-invariant"))?,
        },
        Ensemble::GaussianProduct => EnsembleSpec::GaussianProduct { n: a.n, m: need_m()? },
        Ensemble::UnitRowsCorrelation => EnsembleSpec::UnitRowsCorrelation { n: a.n, m: need_m()? },
    };
    let m = spec.sample(SeedSpec::new(seed, a.trial_index))?;
    let mut csv = Vec::new();
    m.write_csv(&mut csv)?;
    Ok(Emitted {
        json: serde_json::json!({ "ensemble": spec, "matrix": m }),
        csv: Some(csv),
        code: 0,
    })
}

fn cmd_norm(a: &NormArgs, seed: u64) -> Result<Emitted, Failure> {
    let m = read_matrix(&a.matrix)?;
    let (value, certificate) = match a.which {
        Which::InftyToOne => {
            let (v, pair) = infty_to_one_exact(&m)?;
            (
                v,
                Some(Certificate::SignPairValue {
                    matrix: m.clone(),
                    pair,
                    value: v,
                }),
            )
        }
        Which::InftyToOneHeuristic => {
            let (v, pair) = infty_to_one_heuristic(&m, a.restarts, SeedSpec::new(seed, 0));
            let cert = Certificate::SignPairValue {
                matrix: m.clone(),
                pair,
                value: v,
            };
            (v, Some(cert))
        }
        Which::Trace => (trace_norm(&m)?, None),
        Which::Operator => (operator_norm(&m)?, None),
        Which::Frobenius => (m.frobenius(), None),
        Which::Gamma2Star => (gamma2_star_orthogonal(&m)?, None),
    };
    Ok(Emitted {
        json: serde_json::json!({ "value": value, "certificate": certificate }),
        csv: Some(csv_pairs(&[("value", value)])),
        code: 0,
    })
}

fn cmd_gamma2(a: &Gamma2Args) -> Result<Emitted, Failure> {
    let m = read_matrix(&a.matrix)?;
    let b = gamma2_bracket_with(
        &m,
        Gamma2Options {
            rescale_steps: a.rescale_steps,
            ..Gamma2Options::default()
        },
    )?;
    let mut pairs = vec![
        ("lower", b.bracket.lower),
        ("upper", b.bracket.upper),
        ("svd_upper", b.svd_upper),
    ];
    let oracle = if a.oracle {
        let (lo, hi) = gamma2_oracle_interval(&m, a.tol)?;
        pairs.push(("oracle_lower", lo));
        pairs.push(("oracle_upper", hi));
        Some(serde_json::json!({ "lower": lo, "upper": hi, "value": 0.5 * (lo + hi) }))
    } else {
        None
    };
    Ok(Emitted {
        json: serde_json::json!({ "bracket": b, "oracle": oracle }),
        csv: Some(csv_pairs(&pairs)),
        code: 0,
    })
}

fn cmd_classical(a: &ClassicalArgs) -> Result<Emitted, Failure> {
    let m = read_matrix(&a.matrix)?;
    let bell = bell_functional_from_svd(&m)?;
    let lower = classical_lower_bound(&m, &bell)?;
    let upper = classical_upper_bound(&m, a.max_atoms, a.tol)?;
    let weight = upper.decomposition.weight_sum();
    Ok(Emitted {
        json: serde_json::json!({
            "lower": lower,
            "lower_certificate": bell_certificate(&m, &bell),
            "upper": weight,
            "upper_certificate": upper.decomposition.certificate(&m),
            "dual_lower": upper.dual_lower,
            "certified": upper.certified,
            "atoms": upper.decomposition.atoms.len(),
        }),
        csv: Some(csv_pairs(&[("lower", lower), ("upper", weight), ("dual_lower", upper.dual_lower)])),
        code: 0,
    })
}

fn cmd_gap(a: &GapArgs, seed: u64) -> Result<Emitted, Failure> {
    let t = match (&a.matrix, a.n) {
        (Some(p), _) => read_matrix(p)?,
        (None, Some(n)) => qcorr::sample::gaussian(n, n, SeedSpec::new(seed, 0)).scale(1.0 / (n as f64).sqrt()),
        (None, None) => return Err(Failure::validation("either --matrix or --n is required")),
    };
    let bell = BellOptions {
        heuristic_seed: seed,
        ..BellOptions::default()
    };
    let (est, upper) = quantum_classical_gap_with(&t, bell, Gamma2Options::default())?;
    let certificate = est.certificate(&t, upper);
    let csv = csv_pairs(&[
        ("gap", est.value),
        ("classical_lower", est.classical_lower),
        ("gamma2_lower", est.gamma2_lower),
        ("gamma2_upper", est.gamma2_upper),
    ]);
    Ok(Emitted {
        json: serde_json::json!({ "gap": est.value, "estimate": est, "certificate": certificate }),
        csv: Some(csv),
        code: 0,
    })
}

fn cmd_spectral(a: &SpectralArgs) -> Result<Emitted, Failure> {
    let law = spectral::density(a.alpha, a.grid)?;
    let mut csv = Vec::new();
    law.write_csv(&mut csv)?;
    Ok(Emitted {
        json: to_value(&law),
        csv: Some(csv),
        code: 0,
    })
}

fn cmd_threshold(a: &ThresholdArgs) -> Result<Emitted, Failure> {
    let alpha0 = spectral::alpha_threshold_with(a.gap, a.grid, a.tol)?;
    let c = spectral::density(alpha0, a.grid)?.c_alpha;
    Ok(Emitted {
        json: serde_json::json!({ "alpha0": alpha0, "c_alpha": c, "gap_constant": a.gap }),
        csv: Some(csv_pairs(&[("alpha0", alpha0), ("c_alpha", c)])),
        code: 0,
    })
}

fn resolve_experiment(a: &ExperimentArgs, seed: Option<u64>) -> Result<ExperimentConfig, Failure> {
    let mut partial: PartialConfig = match &a.config {
        Some(p) => {
            let file = File::open(p).map_err(|e| Failure::validation(format!("{}: {e}", p.display())))?;
            serde_json::from_reader(BufReader::new(file))
                .map_err(|e| Failure::validation(format!("{}: {e}", p.display())))?
        }
        None => PartialConfig::default(),
    };
    if a.scenario.is_some() {
        partial.scenario = a.scenario;
    }
    if partial.scenario.is_none() {
        return Err(Failure::validation("--scenario is required (flag or config file)"));
    }
    if !a.n.is_empty() {
        let mut sizes = Vec::new();
        for &n in &a.n {
            let base = GridPoint::n(n);
            if !a.alpha.is_empty() {
                sizes.extend(a.alpha.iter().map(|&al| GridPoint { alpha: Some(al), ..base }));
            } else if !a.m.is_empty() {
                sizes.extend(a.m.iter().map(|&m| GridPoint { m: Some(m), ..base }));
            } else {
                sizes.push(base);
            }
        }
        partial.sizes = Some(sizes);
    } else if !a.alpha.is_empty() || !a.m.is_empty() {
        return Err(Failure::validation("--alpha and --m need --n"));
    }
    if a.trials.is_some() {
        partial.trials = a.trials;
    }
    if seed.is_some() {
        partial.master_seed = seed;
    }
    for (k, v) in &a.thresholds {
        partial.thresholds.insert(k.clone(), *v);
    }
    if a.ensemble.is_some() {
        partial.ensemble = a.ensemble;
    }
    if a.max_certificates.is_some() {
        partial.max_certificates = a.max_certificates;
    }
    if a.timing {
        partial.timing = Some(true);
    }
    Ok(ExperimentConfig::resolve(partial)?)
}

fn cmd_experiment(a: &ExperimentArgs, seed: Option<u64>) -> Result<Emitted, Failure> {
    let cfg = resolve_experiment(a, seed)?;
    let report = experiments::run(&cfg)?;
    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    Ok(Emitted {
        code: if report.passed() { 0 } else { 3 },
        json: to_value(&report),
        csv: Some(csv),
    })
}

/// Every certificate in a JSON document, with a path for error messages.
fn collect_certificates(v: &Value, path: &str, out: &mut Vec<(String, Result<Certificate, String>)>) {
    match v {
        Value::Object(map) if map.contains_key("type") => {
            out.push((
                path.to_string(),
                serde_json::from_value(v.clone()).map_err(|e| e.to_string()),
            ));
        }
        Value::Object(map) => {
            let label = map.get("label").and_then(Value::as_str);
            for (k, child) in map {
                let p = match label {
                    Some(l) if k == "certificate" => format!("{path}/{l}"),
                    _ => format!("{path}/{k}"),
                };
                collect_certificates(child, &p, out);
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                collect_certificates(child, &format!("{path}/{i}"), out);
            }
        }
        _ => {}
    }
}

fn cmd_verify(a: &VerifyArgs) -> Result<Emitted, Failure> {
    let file = File::open(&a.path).map_err(|e| Failure::validation(format!("{}: {e}", a.path.display())))?;
    let doc: Value = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| Failure::validation(format!("{}: {e}", a.path.display())))?;
    let mut found = Vec::new();
    collect_certificates(&doc, "", &mut found);
    if found.is_empty() {
        return Err(Failure::validation("no certificates found"));
    }
    let mut results = Vec::new();
    let mut failures = Vec::new();
    for (path, cert) in found {
        let cert = cert.map_err(|e| Failure::validation(format!("{path}: malformed certificate: {e}")))?;
        match cert.verify() {
            Ok(v) => results.push(serde_json::json!({ "path": path, "kind": cert.kind(), "value": v, "ok": true })),
            Err(e) => {
                failures.push(format!("{path}: {e}"));
                results.push(serde_json::json!({ "path": path, "kind": cert.kind(), "ok": false, "error": e.to_string() }));
            }
        }
    }
    if !failures.is_empty() {
        return Err(Failure {
            code: 4,
            kind: "certificate_mismatch",
            message: failures.join("; "),
        });
    }
    Ok(Emitted {
        json: serde_json::json!({ "verified": results.len(), "certificates": results }),
        csv: None,
        code: 0,
    })
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::validation(format!("--threads: {e}")))?;
    }
    let seed = cli.seed.unwrap_or(0);
    let emitted = match &cli.command {
        Command::Sample(a) => cmd_sample(a, seed),
        Command::Norm(a) => cmd_norm(a, seed),
        Command::Gamma2(a) => cmd_gamma2(a),
        Command::Classical(a) => cmd_classical(a),
        Command::Gap(a) => cmd_gap(a, seed),
        Command::Spectral(a) => cmd_spectral(a),
        Command::Threshold(a) => cmd_threshold(a),
        Command::Experiment(a) => cmd_experiment(a, cli.seed),
        Command::VerifyCertificate(a) => cmd_verify(a),
    }?;
    let bytes = match cli.format {
        Format::Csv => emitted
            .csv
            .ok_or_else(|| Failure::validation("this command has no CSV output"))?,
        Format::Json => {
            // an experiment report already echoes its resolved config
            let doc = match &cli.command {
                Command::Experiment(_) => emitted.json,
                command => to_value(Envelope {
                    schema: experiments::SCHEMA_VERSION,
                    command,
                    seed,
                    result: emitted.json,
                }),
            };
            let mut s = serde_json::to_string_pretty(&doc).expect("json values serialize");
            s.push('\n');
            s.into_bytes()
        }
    };
    write_output(cli, &bytes)?;
    Ok(emitted.code)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Sample(_) => "sample",
        Command::Norm(_) => "norm",
        Command::Gamma2(_) => "gamma2",
        Command::Classical(_) => "classical",
        Command::Gap(_) => "gap",
        Command::Spectral(_) => "spectral",
        Command::Threshold(_) => "threshold",
        Command::Experiment(_) => "experiment",
        Command::VerifyCertificate(_) => "verify-certificate",
    }
}

fn write_output(cli: &Cli, bytes: &[u8]) -> Result<(), Failure> {
    let ext = match cli.format {
        Format::Json => "json",
        Format::Csv => "csv",
    };
    let target = cli.out.clone().or_else(|| {
        std::env::var_os(OUT_DIR_ENV).map(|d| PathBuf::from(d).join(format!("{}.{ext}", command_name(&cli.command))))
    });
    let io_err = |p: &Path, e: io::Error| Failure::validation(format!("{}: {e}", p.display()));
    match target {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
            }
            std::fs::write(&p, bytes).map_err(|e| io_err(&p, e))
        }
        None => io::stdout()
            .write_all(bytes)
            .map_err(|e| Failure::validation(format!("stdout: {e}"))),
    }
}

fn report_failure(f: &Failure) {
    let line = serde_json::json!({ "error": f.kind, "exit_code": f.code, "message": f.message });
    eprintln!("{line}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = write!(io::stdout(), "{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.render().to_string();
            report_failure(&Failure::validation(message.trim().replace('\n', " ")));
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            report_failure(&f);
            ExitCode::from(f.code)
        }
    }
}
