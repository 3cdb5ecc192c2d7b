//! Command implementations behind the binary: each run reads one config
//! file, produces plot-ready artifacts under the output directory and
//! reports through the exit code (0 ok, 2 config, 3 numerical, 4 i/o).

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::config::{self, BasisRequest, Command, ResolvedConfig, Severity};
use crate::error::CliError;
use crate::fit::{self, FitResult};
use crate::grid::SpectralGrid;
use crate::hom::{self, Verdict};
use crate::io::{self, FileHeader};
use crate::modes;
use crate::spectra::{self, PhasematchShape, ProcessModel};
use crate::units::Delay;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub config_path: PathBuf,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub verbose: bool,
}

fn numerical(module: &'static str, e: impl std::fmt::Display) -> CliError {
    CliError::Numerical { module, message: e.to_string() }
}

fn io_error(e: io::IoError) -> CliError {
    match e {
        io::IoError::Io { path, source } => CliError::Io { path, source },
        other => CliError::Io {
            path: String::new(),
            source: std::io::Error::new(std::io::ErrorKind::InvalidData, other.to_string()),
        },
    }
}

fn read_config(path: &Path) -> Result<(String, String), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let digest = Sha256::digest(text.as_bytes());
    let hash: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    Ok((text, hash))
}

fn header_for(cfg_hash: &str, opts: &RunOptions, command: &str) -> FileHeader {
    let mut header = FileHeader::new(cfg_hash);
    header.seed = Some(opts.seed);
    header.extra.insert("command".into(), command.into());
    header
}

fn out_path(opts: &RunOptions, prefix: &str, suffix: &str) -> PathBuf {
    opts.out_dir.join(format!("{prefix}_{suffix}"))
}

fn build_grid(cfg: &ResolvedConfig, model: &ProcessModel) -> Result<SpectralGrid, CliError> {
    spectra::build_jsa(model, &cfg.grid).map_err(|e| numerical("core-spectra", e))
}

/// Run one command against a config file. Returns the artifact paths.
pub fn run(command: Command, opts: &RunOptions) -> Result<Vec<PathBuf>, CliError> {
    let (text, hash) = read_config(&opts.config_path)?;
    let cfg = config::load(&text, command)?;
    std::fs::create_dir_all(&opts.out_dir).map_err(|e| CliError::Io {
        path: opts.out_dir.display().to_string(),
        source: e,
    })?;
    match command {
        Command::Simulate => simulate(&cfg, &hash, opts),
        Command::Decompose => decompose(&cfg, &hash, opts),
        Command::Witness => witness(&cfg, &hash, opts),
        Command::Fit => fit_command(&cfg, &hash, opts),
        Command::Discriminate => discriminate(&cfg, &hash, opts),
    }
}

fn simulate(cfg: &ResolvedConfig, hash: &str, opts: &RunOptions) -> Result<Vec<PathBuf>, CliError> {
    let model = cfg.model.as_ref().expect("validated");
    let delays = cfg.delays.as_ref().expect("validated");
    let header = header_for(hash, opts, "simulate");
    let mut artifacts = Vec::new();

    let jsa = build_grid(cfg, model)?;
    let numeric = hom::sweep_numeric(&jsa, delays).map_err(|e| numerical("homi", e))?;
    let path = out_path(opts, &cfg.out_prefix, "trace_numeric.csv");
    io::write_trace_csv(&path, &numeric, &header).map_err(io_error)?;
    artifacts.push(path);

    if model.phasematch.shape == PhasematchShape::GaussianApprox {
        let analytic = hom::sweep_analytic(model, delays).map_err(|e| numerical("homi", e))?;
        let path = out_path(opts, &cfg.out_prefix, "trace_analytic.csv");
        io::write_trace_csv(&path, &analytic, &header).map_err(io_error)?;
        artifacts.push(path);
        if opts.verbose {
            let worst = numeric
                .probabilities()
                .iter()
                .zip(analytic.probabilities())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            println!("engines agree to {worst:.3e} over {} delays", delays.len());
        }
    }

    if cfg.export_jsa {
        let csv = out_path(opts, &cfg.out_prefix, "jsa.csv");
        io::write_jsa_csv(&csv, &jsa, &header).map_err(io_error)?;
        artifacts.push(csv);
        let bin = out_path(opts, &cfg.out_prefix, "jsa.bin");
        io::write_jsa_binary(&bin, &jsa).map_err(io_error)?;
        artifacts.push(bin);
    }

    if let (Some((at_min, p_min)), Some((at_max, p_max))) =
        (numeric.min_probability(), numeric.max_probability())
    {
        println!(
            "simulate: p_min = {p_min:.6} at {:.4} ps, p_max = {p_max:.6} at {:.4} ps",
            at_min.ps(),
            at_max.ps()
        );
    }
    Ok(artifacts)
}

fn decompose(cfg: &ResolvedConfig, hash: &str, opts: &RunOptions) -> Result<Vec<PathBuf>, CliError> {
    let model = cfg.model.as_ref().expect("validated");
    let jsa = build_grid(cfg, model)?;

    let request = cfg.basis.clone().unwrap_or_else(|| BasisRequest {
        basis: modes::HermiteBasis {
            center: model.pump.omega_c,
            scale: model.pump.sigma / 2.0,
            max_order: 5,
        },
        optimize_scale: true,
    });
    let basis = if request.optimize_scale {
        modes::optimize_basis(&jsa, &request.basis).map_err(|e| numerical("modes", e))?
    } else {
        request.basis
    };

    let dec = modes::project(&jsa, &basis).map_err(|e| numerical("modes", e))?;
    let overlap = modes::singlet_overlap(&jsa, &basis).map_err(|e| numerical("modes", e))?;
    let grid_schmidt = modes::schmidt_decompose(&jsa);

    let mut header = header_for(hash, opts, "decompose");
    header.extra.insert("basis_center_rad_per_ps".into(), format!("{:.9}", basis.center.rad_per_ps()));
    header.extra.insert("basis_scale_rad_per_ps".into(), format!("{:.9}", basis.scale));
    header.extra.insert("basis_max_order".into(), basis.max_order.to_string());
    header.extra.insert("singlet_overlap".into(), format!("{overlap:.9}"));
    header.extra.insert(
        "grid_schmidt_values".into(),
        grid_schmidt
            .schmidt_values
            .iter()
            .take(8)
            .map(|s| format!("{s:.9e}"))
            .collect::<Vec<_>>()
            .join(" "),
    );

    let path = out_path(opts, &cfg.out_prefix, "modes.csv");
    io::write_modes_csv(&path, &dec, &header).map_err(io_error)?;
    println!(
        "decompose: captured_weight = {:.6}, singlet_overlap = {overlap:.6}, schmidt l0^2 = {:.6}",
        dec.captured_weight,
        grid_schmidt.schmidt_values.first().map(|s| s * s).unwrap_or(0.0)
    );
    Ok(vec![path])
}

fn witness(cfg: &ResolvedConfig, hash: &str, opts: &RunOptions) -> Result<Vec<PathBuf>, CliError> {
    let trace = match &cfg.witness_input {
        Some(path) => io::read_trace_csv(path).map_err(io_error)?,
        None => {
            let model = cfg.model.as_ref().expect("validated");
            let delays = cfg.delays.as_ref().expect("validated");
            let jsa = build_grid(cfg, model)?;
            hom::sweep_numeric(&jsa, delays).map_err(|e| numerical("homi", e))?
        }
    };
    let report = hom::witness(&trace, cfg.witness_epsilon).map_err(|e| numerical("homi", e))?;

    let verdict = match report.verdict {
        Verdict::Entangled => "Entangled",
        Verdict::Inconclusive => "Inconclusive",
    };
    let path = out_path(opts, &cfg.out_prefix, "witness.txt");
    let header = header_for(hash, opts, "witness");
    let mut body = String::new();
    body.push_str(&format!("verdict = {verdict}\n"));
    body.push_str(&format!("guard_band = {:.9e}\n", report.epsilon));
    body.push_str(&format!("max_probability = {:.9}\n", report.max_probability));
    body.push_str(&format!("max_at_ps = {:.6}\n", report.max_at.ps()));
    write_text(&path, &header, &body)?;
    println!("witness: {verdict} (max p = {:.6}, guard band = {:.2e})", report.max_probability, report.epsilon);
    Ok(vec![path])
}

fn fit_command(cfg: &ResolvedConfig, hash: &str, opts: &RunOptions) -> Result<Vec<PathBuf>, CliError> {
    let resolved = cfg.fit.as_ref().expect("validated");
    let input = if resolved.input.is_relative() {
        opts.config_path
            .parent()
            .map(|dir| dir.join(&resolved.input))
            .unwrap_or_else(|| resolved.input.clone())
    } else {
        resolved.input.clone()
    };
    let trace = io::read_trace_csv(&input).map_err(io_error)?;
    if resolved.counts && trace.meta.counts.is_none() {
        return Err(CliError::Config(format!(
            "fit.data_kind = \"counts\" but {} has no counts column",
            input.display()
        )));
    }

    let mut spec = resolved.spec.clone();
    spec.seed = opts.seed;
    let result = fit::fit_trace(&trace, &spec).map_err(|e| numerical("fitting", e))?;

    let header = header_for(hash, opts, "fit");
    let mut artifacts = Vec::new();

    let txt = out_path(opts, &cfg.out_prefix, "fit.txt");
    write_text(&txt, &header, &fit_report_text(&result))?;
    artifacts.push(txt);

    let json = out_path(opts, &cfg.out_prefix, "fit.json");
    std::fs::write(&json, fit_report_json(&result)).map_err(|e| CliError::Io {
        path: json.display().to_string(),
        source: e,
    })?;
    artifacts.push(json.clone());

    let model_curve: Vec<f64> = trace
        .delays()
        .iter()
        .map(|t| result.params.evaluate(spec.gamma, *t))
        .collect::<Result<_, _>>()
        .map_err(|e| numerical("fitting", e))?;
    let overlay = out_path(opts, &cfg.out_prefix, "overlay.csv");
    io::write_overlay_csv(&overlay, trace.delays(), trace.probabilities(), &model_curve, &header)
        .map_err(io_error)?;
    artifacts.push(overlay);

    println!(
        "fit: converged = {}, residual_rms = {:.4e}, iterations = {}",
        result.converged, result.residual_rms, result.iterations
    );
    for p in &result.free {
        let stderr = result.param_stderr.get(p).copied().unwrap_or(f64::NAN);
        let unit = p.unit();
        let unit = if unit.is_empty() { String::new() } else { format!(" {unit}") };
        println!("  {} = {:.6}{unit} ± {:.2e}", p.name(), result.params.get(*p), stderr);
    }
    Ok(artifacts)
}

fn discriminate(cfg: &ResolvedConfig, hash: &str, opts: &RunOptions) -> Result<Vec<PathBuf>, CliError> {
    let model = cfg.model.as_ref().expect("validated");
    let delays: Vec<Delay> = match &cfg.delays {
        Some(d) => d.clone(),
        None => fit::default_discrimination_delays(model, 401),
    };
    let report = fit::discriminate_sinc(model, &delays).map_err(|e| numerical("fitting", e))?;

    let header = header_for(hash, opts, "discriminate");
    let mut artifacts = Vec::new();
    let sinc_path = out_path(opts, &cfg.out_prefix, "trace_sinc.csv");
    io::write_trace_csv(&sinc_path, &report.sinc_trace, &header).map_err(io_error)?;
    artifacts.push(sinc_path);
    let standin_path = out_path(opts, &cfg.out_prefix, "trace_standin.csv");
    io::write_trace_csv(&standin_path, &report.standin_trace, &header).map_err(io_error)?;
    artifacts.push(standin_path);

    let mut body = String::new();
    body.push_str(&format!("max_p_sinc = {:.9}\n", report.max_p_sinc));
    body.push_str(&format!("max_p_standin = {:.9}\n", report.max_p_standin));
    body.push_str(&format!("sinc_exceeds_half = {}\n", report.sinc_exceeds_half));
    body.push_str(&format!("standin_exceeds_half = {}\n", report.standin_exceeds_half));
    body.push_str(&format!("l2_distance = {:.9e}\n", report.l2_distance));
    let path = out_path(opts, &cfg.out_prefix, "discriminate.txt");
    write_text(&path, &header, &body)?;
    artifacts.push(path);

    println!(
        "discriminate: max p (sinc) = {:.6}, max p (stand-in) = {:.6}, exceeds 1/2: {} / {}",
        report.max_p_sinc, report.max_p_standin, report.sinc_exceeds_half, report.standin_exceeds_half
    );
    Ok(artifacts)
}

fn fit_report_text(result: &FitResult) -> String {
    let mut s = String::new();
    s.push_str(&format!("converged = {}\n", result.converged));
    s.push_str(&format!("residual_rms = {:.9e}\n", result.residual_rms));
    s.push_str(&format!("iterations = {}\n", result.iterations));
    for p in &result.free {
        let stderr = result.param_stderr.get(p).copied().unwrap_or(f64::NAN);
        let unit = p.unit();
        let unit = if unit.is_empty() { String::new() } else { format!(" [{unit}]") };
        s.push_str(&format!(
            "{}{unit} = {:.9e} stderr = {:.3e}\n",
            p.name(),
            result.params.get(*p),
            stderr
        ));
    }
    s
}

fn fit_report_json(result: &FitResult) -> String {
    let mut map = serde_json::Map::new();
    map.insert("converged".into(), serde_json::Value::Bool(result.converged));
    map.insert("residual_rms".into(), json_number(result.residual_rms));
    map.insert("iterations".into(), serde_json::Value::from(result.iterations));
    let mut params = serde_json::Map::new();
    for p in &result.free {
        let mut entry = serde_json::Map::new();
        entry.insert("value".into(), json_number(result.params.get(*p)));
        entry.insert("unit".into(), serde_json::Value::String(p.unit().to_string()));
        entry.insert(
            "stderr".into(),
            json_number(result.param_stderr.get(p).copied().unwrap_or(f64::NAN)),
        );
        params.insert(p.name().to_string(), serde_json::Value::Object(entry));
    }
    map.insert("params".into(), serde_json::Value::Object(params));
    serde_json::to_string_pretty(&serde_json::Value::Object(map)).expect("static structure")
}

fn json_number(v: f64) -> serde_json::Value {
    serde_json::Number::from_f64(v)
        .map(serde_json::Value::Number)
        .unwrap_or(serde_json::Value::Null)
}

fn write_text(path: &Path, header: &FileHeader, body: &str) -> Result<(), CliError> {
    let mut text = String::new();
    text.push_str(&format!("# biphoton {}\n", header.tool_version));
    if !header.config_sha256.is_empty() {
        text.push_str(&format!("# config_sha256 = {}\n", header.config_sha256));
    }
    if let Some(seed) = header.seed {
        text.push_str(&format!("# seed = {seed}\n"));
    }
    text.push_str(
        "# units: angular frequency in rad/ps; THz inputs are ordinary frequency times 2*pi; delays in ps\n",
    );
    for (k, v) in &header.extra {
        text.push_str(&format!("# {k} = {v}\n"));
    }
    text.push_str(body);
    std::fs::write(path, text).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Validate a config file, print every diagnostic, and return the exit code
/// (0 clean, 2 otherwise).
pub fn validate_config(path: &Path) -> Result<i32, CliError> {
    let (text, _) = read_config(path)?;
    let (diags, _) = config::validate(&text, None);
    for d in &diags {
        println!("{d}");
    }
    let errors = diags.iter().filter(|d| d.severity == Severity::Error).count();
    if errors == 0 {
        println!("ok: no errors");
        Ok(0)
    } else {
        println!("{errors} error(s)");
        Ok(2)
    }
}
