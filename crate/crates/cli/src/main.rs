//! `qthermo` — run the detection schemes, the parameter sweep, the TMP
//! reference, or re-analyze a stored G(χ) table.
//!
//! Exit codes: 0 success, 2 configuration error, 3 i/o or parse error,
//! 4 analysis error.

use clap::{Args, Parser, Subcommand};
use qthermo_core::error::{Error, Result};
use qthermo_core::io;
use qthermo_core::protocol::{sweep, ExperimentConfig, QcgfTable, RunMode, SchemeKind};
use qthermo_core::spectral::{
    average_from_derivative, average_from_slope, conservation_check, default_f_grid,
    exact_first_moment, peak_weights, qpdf, renormalize_peaks, ConservationReport, MomentReport,
    PeakTable,
};
use qthermo_core::tmp::{tmp_averages, tmp_distribution, tmp_distribution_sampled, TmpAverages};
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "qthermo",
    version,
    about = "Detector-phase simulation of work, heat and internal-energy statistics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scheme (or all three) and write tables and summaries.
    Run(RunArgs),
    /// Averages of all three observables against the TMP reference for a
    /// list of relaxation strengths.
    SweepP(SweepPArgs),
    /// Two-measurement-protocol reference distribution and averages.
    Tmp(TmpArgs),
    /// Recompute density, peaks and moments from a stored G(χ) table.
    Analyze(AnalyzeArgs),
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Flat key=value config file; CLI flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Initial polar angle θ of the system state (radians).
    #[arg(long)]
    theta: Option<f64>,
    /// Initial azimuthal angle φ of the system state (radians).
    #[arg(long)]
    phi: Option<f64>,
    /// First drive angle α.
    #[arg(long)]
    alpha: Option<f64>,
    /// Second drive angle β.
    #[arg(long)]
    beta: Option<f64>,
    /// Relaxation probability p in [0, 1].
    #[arg(long)]
    p: Option<f64>,
    /// Largest |χ| on the grid.
    #[arg(long = "chi-max")]
    chi_max: Option<f64>,
    /// Grid spacing Δχ.
    #[arg(long)]
    dchi: Option<f64>,
    /// Shots per readout in sampled mode.
    #[arg(long)]
    shots: Option<u64>,
    /// exact | sampled
    #[arg(long)]
    mode: Option<String>,
    /// Master seed for all sampled randomness.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// du | w | q | all
    #[arg(long, default_value = "all")]
    scheme: String,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepPArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Comma-separated relaxation strengths, e.g. 0,0.5,1
    #[arg(long = "p-list", default_value = "0,0.25,0.5,0.75,1")]
    p_list: String,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct TmpArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Stored table in the `chi,re_g,im_g` format.
    input: PathBuf,
    /// Output directory (defaults to the input's directory).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_mode(s: &str) -> Result<RunMode> {
    match s {
        "exact" => Ok(RunMode::Exact),
        "sampled" => Ok(RunMode::Sampled),
        other => Err(Error::config(
            "mode",
            format!("expected `exact` or `sampled`, got `{other}`"),
        )),
    }
}

/// Apply a flat key=value file (with `#` comments) onto a config.
fn apply_config_file(cfg: &mut ExperimentConfig, path: &Path) -> Result<()> {
    let text = std::fs::read_to_string(path)?;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: path.display().to_string(),
            line: idx + 1,
            message: "expected key=value".into(),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let bad_value = |e: String| Error::Parse {
            path: path.display().to_string(),
            line: idx + 1,
            message: format!("key `{key}`: {e}"),
        };
        match key {
            "theta" => cfg.theta = value.parse().map_err(|e: std::num::ParseFloatError| bad_value(e.to_string()))?,
            "phi" => cfg.phi = value.parse().map_err(|e: std::num::ParseFloatError| bad_value(e.to_string()))?,
            "alpha" => cfg.alpha = value.parse().map_err(|e: std::num::ParseFloatError| bad_value(e.to_string()))?,
            "beta" => cfg.beta = value.parse().map_err(|e: std::num::ParseFloatError| bad_value(e.to_string()))?,
            "p" => cfg.p = value.parse().map_err(|e: std::num::ParseFloatError| bad_value(e.to_string()))?,
            "chi_max" => cfg.chi_max = value.parse().map_err(|e: std::num::ParseFloatError| bad_value(e.to_string()))?,
            "dchi" => cfg.dchi = value.parse().map_err(|e: std::num::ParseFloatError| bad_value(e.to_string()))?,
            "shots" => cfg.shots = value.parse().map_err(|e: std::num::ParseIntError| bad_value(e.to_string()))?,
            "mode" => cfg.mode = parse_mode(value)?,
            "seed" => cfg.seed = value.parse().map_err(|e: std::num::ParseIntError| bad_value(e.to_string()))?,
            other => {
                return Err(Error::config(
                    other,
                    "unknown configuration key".to_string(),
                ))
            }
        }
    }
    Ok(())
}

fn resolve_config(args: &ConfigArgs) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &args.config {
        apply_config_file(&mut cfg, path)?;
    }
    if let Some(v) = args.theta {
        cfg.theta = v;
    }
    if let Some(v) = args.phi {
        cfg.phi = v;
    }
    if let Some(v) = args.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = args.beta {
        cfg.beta = v;
    }
    if let Some(v) = args.p {
        cfg.p = v;
    }
    if let Some(v) = args.chi_max {
        cfg.chi_max = v;
    }
    if let Some(v) = args.dchi {
        cfg.dchi = v;
    }
    if let Some(v) = args.shots {
        cfg.shots = v;
    }
    if let Some(m) = &args.mode {
        cfg.mode = parse_mode(m)?;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn init_thread_pool() {
    if let Ok(raw) = std::env::var("QTHERMO_THREADS") {
        if let Ok(n) = raw.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

#[derive(Serialize)]
struct PeaksDoc<'a> {
    scheme: &'a str,
    raw: &'a PeakTable,
    renormalized: &'a PeakTable,
}

#[derive(Serialize)]
struct MomentsDoc<'a> {
    scheme: &'a str,
    /// Im G(χ̄)/χ̄ at the first positive grid point.
    slope: &'a MomentReport,
    /// Central difference on the stored grid.
    derivative: &'a MomentReport,
    /// Fine-step reference derivative (exact mode only).
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<&'a MomentReport>,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    tool_version: &'a str,
    created_utc: String,
    config: &'a ExperimentConfig,
    schemes: Vec<&'a str>,
    outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    conservation: Option<ConservationReport>,
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::internal(format!("json serialization failed: {e}")))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn ensure_out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

/// Analysis artifacts for one table: density CSV, peaks JSON, moments JSON.
fn write_analysis(
    table: &QcgfTable,
    label: &str,
    out: &Path,
    exact_reference: Option<&MomentReport>,
    outputs: &mut Vec<String>,
) -> Result<MomentReport> {
    let density = qpdf(table, &default_f_grid())?;
    let qpdf_path = out.join(format!("qpdf_{label}.csv"));
    io::write_qpdf_csv(&density, &qpdf_path)?;
    outputs.push(qpdf_path.display().to_string());

    let raw_peaks = peak_weights(table)?;
    let renormalized = renormalize_peaks(&raw_peaks)?;
    let peaks_path = out.join(format!("peaks_{label}.json"));
    write_json(
        &PeaksDoc {
            scheme: label,
            raw: &raw_peaks,
            renormalized: &renormalized,
        },
        &peaks_path,
    )?;
    outputs.push(peaks_path.display().to_string());

    let slope = average_from_slope(table, table.dchi())?;
    let derivative = average_from_derivative(table)?;
    let moments_path = out.join(format!("moments_{label}.json"));
    write_json(
        &MomentsDoc {
            scheme: label,
            slope: &slope,
            derivative: &derivative,
            exact: exact_reference,
        },
        &moments_path,
    )?;
    outputs.push(moments_path.display().to_string());

    Ok(if let Some(exact) = exact_reference {
        *exact
    } else {
        slope
    })
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let cfg = resolve_config(&args.config)?;
    let schemes: Vec<SchemeKind> = match args.scheme.as_str() {
        "all" => SchemeKind::ALL.to_vec(),
        other => vec![SchemeKind::parse(other).ok_or_else(|| {
            Error::config("scheme", format!("expected du, w, q or all, got `{other}`"))
        })?],
    };
    ensure_out_dir(&args.out)?;

    let mut outputs = Vec::new();
    let mut best_moments = Vec::new();
    for &scheme in &schemes {
        let label = scheme.label();
        let table = sweep(scheme, &cfg)?;
        let qcgf_path = args.out.join(format!("qcgf_{label}.csv"));
        io::write_qcgf_csv(&table, &qcgf_path)?;
        outputs.push(qcgf_path.display().to_string());

        let exact_reference = match cfg.mode {
            RunMode::Exact => Some(exact_first_moment(scheme, &cfg)?),
            RunMode::Sampled => None,
        };
        let best = write_analysis(
            &table,
            label,
            &args.out,
            exact_reference.as_ref(),
            &mut outputs,
        )?;
        best_moments.push(best);
    }

    let conservation = if schemes.len() == 3 {
        Some(conservation_check(
            &best_moments[0],
            &best_moments[1],
            &best_moments[2],
        )?)
    } else {
        None
    };

    let manifest_path = args.out.join("run_manifest.json");
    let mut outputs_with_manifest = outputs.clone();
    outputs_with_manifest.push(manifest_path.display().to_string());
    write_json(
        &RunManifest {
            tool_version: env!("CARGO_PKG_VERSION"),
            created_utc: chrono::Utc::now().to_rfc3339(),
            config: &cfg,
            schemes: schemes.iter().map(|s| s.label()).collect(),
            outputs: outputs_with_manifest,
            conservation,
        },
        &manifest_path,
    )?;
    println!("wrote {} files to {}", outputs.len() + 1, args.out.display());
    Ok(())
}

fn parse_p_list(raw: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for piece in raw.split(',') {
        let p: f64 = piece
            .trim()
            .parse()
            .map_err(|e| Error::config("p-list", format!("bad entry `{piece}`: {e}")))?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::config(
                "p-list",
                format!("p = {p} outside [0, 1]"),
            ));
        }
        out.push(p);
    }
    if out.is_empty() {
        return Err(Error::config("p-list", "no values given"));
    }
    Ok(out)
}

fn cmd_sweep_p(args: &SweepPArgs) -> Result<()> {
    let base = resolve_config(&args.config)?;
    let p_values = parse_p_list(&args.p_list)?;
    ensure_out_dir(&args.out)?;

    let mut body = String::from("p,du,du_err,w,w_err,q,q_err,tmp_du,tmp_w,tmp_q\n");
    for &p in &p_values {
        let cfg = ExperimentConfig { p, ..base };
        let moments: Vec<MomentReport> = match cfg.mode {
            RunMode::Exact => SchemeKind::ALL
                .iter()
                .map(|&s| exact_first_moment(s, &cfg))
                .collect::<Result<_>>()?,
            RunMode::Sampled => {
                // Only the first positive grid point feeds the slope; a
                // minimal grid keeps sampled sweeps cheap.
                let mini = ExperimentConfig {
                    chi_max: cfg.dchi,
                    ..cfg
                };
                SchemeKind::ALL
                    .iter()
                    .map(|&s| average_from_slope(&sweep(s, &mini)?, mini.dchi))
                    .collect::<Result<_>>()?
            }
        };
        let tmp = tmp_averages(&tmp_distribution(&cfg)?);
        let row = [
            p,
            moments[0].mean,
            moments[0].stderr,
            moments[1].mean,
            moments[1].stderr,
            moments[2].mean,
            moments[2].stderr,
            tmp.du,
            tmp.w,
            tmp.q,
        ];
        let formatted: Vec<String> = row.iter().map(|v| io::fmt_f64(*v)).collect();
        body.push_str(&formatted.join(","));
        body.push('\n');
    }
    let path = args.out.join("averages_vs_p.csv");
    std::fs::write(&path, body)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_tmp(args: &TmpArgs) -> Result<()> {
    let cfg = resolve_config(&args.config)?;
    ensure_out_dir(&args.out)?;
    let dist = match cfg.mode {
        RunMode::Exact => tmp_distribution(&cfg)?,
        RunMode::Sampled => tmp_distribution_sampled(&cfg)?,
    };
    let csv_path = args.out.join("tmp_dist.csv");
    io::write_tmp_csv(&dist, &csv_path)?;
    let averages: TmpAverages = tmp_averages(&dist);
    let json_path = args.out.join("tmp_averages.json");
    write_json(&averages, &json_path)?;
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(())
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<()> {
    let table = io::read_qcgf_csv(&args.input)?;
    let out = match &args.out {
        Some(dir) => dir.clone(),
        None => args
            .input
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    ensure_out_dir(&out)?;
    let stem = args
        .input
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("table");
    let label = stem.strip_prefix("qcgf_").unwrap_or(stem);
    let mut outputs = Vec::new();
    write_analysis(&table, label, &out, None, &mut outputs)?;
    println!("wrote {} files to {}", outputs.len(), out.display());
    Ok(())
}

fn real_main() -> Result<()> {
    init_thread_pool();
    let cli = Cli::parse();
    match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::SweepP(args) => cmd_sweep_p(args),
        Command::Tmp(args) => cmd_tmp(args),
        Command::Analyze(args) => cmd_analyze(args),
    }
}

fn main() {
    if let Err(e) = real_main() {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
