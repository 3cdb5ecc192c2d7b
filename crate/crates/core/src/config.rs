//! Run configuration: a TOML file with nested sections and mandatory unit
//! tags on every frequency-like quantity. One config file describes one run;
//! command-line flags carry only paths, seed and verbosity.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Deserialize;

use crate::error::CliError;
use crate::fit::{FitParam, FitSpec, ParamValues};
use crate::modes::HermiteBasis;
use crate::spectra::{
    GridSpec, PhasematchModel, PhasematchShape, ProcessModel, PumpModel, SuperpositionModel,
    DEFAULT_GAMMA,
};
use crate::units::{sigma_from_fwhm_nm, AngularFrequency, Quantity, C_NM_PER_PS};

/// The capability a config drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Simulate,
    Decompose,
    Witness,
    Fit,
    Discriminate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Decompose => "decompose",
            Command::Witness => "witness",
            Command::Fit => "fit",
            Command::Discriminate => "discriminate",
        }
    }
}

/// A field that should carry a unit tag; a bare number is diagnosed.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum NumberOrQuantity {
    Quantity(Quantity),
    Number(f64),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub command: Option<Command>,
    pub model: Option<ModelSection>,
    pub grid: Option<GridSection>,
    pub delays: Option<DelaysSection>,
    pub basis: Option<BasisSection>,
    pub witness: Option<WitnessSection>,
    pub fit: Option<FitSection>,
    pub io: Option<IoSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub pump: Option<PumpSection>,
    pub phasematch: Option<PhasematchSection>,
    pub superposition: Option<SuperpositionSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSection {
    /// Degenerate photon center (half the pump frequency).
    pub center: Option<NumberOrQuantity>,
    /// Pump amplitude standard deviation.
    pub sigma: Option<NumberOrQuantity>,
    /// Alternative to sigma: pump intensity FWHM in wavelength, nm tag.
    pub fwhm: Option<NumberOrQuantity>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhasematchSection {
    pub length_mm: Option<f64>,
    pub dk_s_ps_per_mm: Option<f64>,
    pub dk_i_ps_per_mm: Option<f64>,
    pub gamma: Option<f64>,
    pub shape: Option<PhasematchShape>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuperpositionSection {
    pub delta_omega: Option<NumberOrQuantity>,
    pub r: Option<f64>,
    pub phi_rad: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub samples: Option<usize>,
    pub half_span: Option<NumberOrQuantity>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelaysSection {
    pub start_ps: Option<f64>,
    pub stop_ps: Option<f64>,
    pub count: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSection {
    pub center: Option<NumberOrQuantity>,
    pub scale: Option<NumberOrQuantity>,
    pub max_order: Option<usize>,
    /// Optimize the scale for singlet overlap even when a scale is given.
    pub optimize_scale: Option<bool>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessSection {
    /// Trace CSV to test; when absent the model is simulated first.
    pub input: Option<PathBuf>,
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    pub input: Option<PathBuf>,
    /// "probability" (default) or "counts".
    pub data_kind: Option<String>,
    pub free: Option<Vec<FitParam>>,
    pub gamma: Option<f64>,
    pub max_iterations: Option<usize>,
    pub params: Option<BTreeMap<String, ParamEntry>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamEntry {
    pub initial: Option<NumberOrQuantity>,
    pub min: Option<NumberOrQuantity>,
    pub max: Option<NumberOrQuantity>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IoSection {
    /// Output file name prefix.
    pub prefix: Option<String>,
    /// Export the sampled joint spectrum alongside simulate traces.
    pub export_jsa: Option<bool>,
}

/// Severity of a configuration diagnostic. Notes do not fail validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Note,
}

#[derive(Debug, Clone)]
pub struct Diagnostic {
    pub severity: Severity,
    pub field: String,
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Note => "note",
        };
        match self.line {
            Some(line) => write!(f, "{tag}: line {line}: {}: {}", self.field, self.message),
            None => write!(f, "{tag}: {}: {}", self.field, self.message),
        }
    }
}

/// Best-effort line lookup for a dotted field path in the raw TOML text.
fn find_line(raw: &str, dotted: &str) -> Option<usize> {
    let (section, key) = match dotted.rfind('.') {
        Some(pos) => (&dotted[..pos], &dotted[pos + 1..]),
        None => ("", dotted),
    };
    let mut in_section = section.is_empty();
    for (idx, line) in raw.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.starts_with('[') {
            let header = trimmed.trim_start_matches('[').trim_end_matches(']').trim();
            in_section = header == section;
            if in_section && key.is_empty() {
                return Some(idx + 1);
            }
            continue;
        }
        if in_section {
            if let Some((lhs, _)) = trimmed.split_once('=') {
                if lhs.trim() == key {
                    return Some(idx + 1);
                }
            }
        }
    }
    // fall back to the section header itself
    if !section.is_empty() {
        for (idx, line) in raw.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed == format!("[{section}]") {
                return Some(idx + 1);
            }
        }
    }
    None
}

struct Checker<'a> {
    raw: &'a str,
    diags: Vec<Diagnostic>,
}

impl<'a> Checker<'a> {
    fn error(&mut self, field: &str, message: impl Into<String>) {
        self.diags.push(Diagnostic {
            severity: Severity::Error,
            field: field.to_string(),
            line: find_line(self.raw, field),
            message: message.into(),
        });
    }

    fn note(&mut self, field: &str, message: impl Into<String>) {
        self.diags.push(Diagnostic {
            severity: Severity::Note,
            field: field.to_string(),
            line: find_line(self.raw, field),
            message: message.into(),
        });
    }

    /// Frequency-like field: requires a unit tag, notes the THz convention.
    fn frequency(&mut self, field: &str, v: &Option<NumberOrQuantity>, required: bool) -> Option<f64> {
        match v {
            None => {
                if required {
                    self.error(field, "missing required field");
                }
                None
            }
            Some(NumberOrQuantity::Number(_)) => {
                self.error(
                    field,
                    "missing unit tag: write { value = ..., unit = \"rad_per_ps\" | \"THz\" | \"nm\" }",
                );
                None
            }
            Some(NumberOrQuantity::Quantity(q)) => {
                if q.unit == "THz" {
                    self.note(
                        field,
                        format!(
                            "THz is read as ordinary frequency: {} THz becomes {:.6} rad/ps (multiplied by 2*pi)",
                            q.value,
                            2.0 * std::f64::consts::PI * q.value
                        ),
                    );
                }
                match q.as_angular_frequency() {
                    Ok(w) => Some(w.rad_per_ps()),
                    Err(e) => {
                        self.error(field, e.to_string());
                        None
                    }
                }
            }
        }
    }

    /// Width-like field (σ, Δω, basis scale): rad_per_ps or THz only.
    fn width(&mut self, field: &str, v: &Option<NumberOrQuantity>, required: bool) -> Option<f64> {
        match v {
            None => {
                if required {
                    self.error(field, "missing required field");
                }
                None
            }
            Some(NumberOrQuantity::Number(_)) => {
                self.error(
                    field,
                    "missing unit tag: write { value = ..., unit = \"rad_per_ps\" | \"THz\" }",
                );
                None
            }
            Some(NumberOrQuantity::Quantity(q)) => {
                if q.unit == "THz" {
                    self.note(
                        field,
                        format!(
                            "THz is read as ordinary frequency: {} THz becomes {:.6} rad/ps (multiplied by 2*pi)",
                            q.value,
                            2.0 * std::f64::consts::PI * q.value
                        ),
                    );
                }
                match q.as_frequency_width() {
                    Ok(w) => Some(w),
                    Err(e) => {
                        self.error(field, e.to_string());
                        None
                    }
                }
            }
        }
    }
}

/// Everything a run needs, resolved to internal units.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub command: Option<Command>,
    pub model: Option<ProcessModel>,
    pub grid: GridSpec,
    pub delays: Option<Vec<crate::units::Delay>>,
    pub basis: Option<BasisRequest>,
    pub witness_input: Option<PathBuf>,
    pub witness_epsilon: Option<f64>,
    pub fit: Option<ResolvedFit>,
    pub out_prefix: String,
    pub export_jsa: bool,
}

#[derive(Debug, Clone)]
pub struct BasisRequest {
    pub basis: HermiteBasis,
    pub optimize_scale: bool,
}

#[derive(Debug, Clone)]
pub struct ResolvedFit {
    pub input: PathBuf,
    pub counts: bool,
    pub spec: FitSpec,
}

/// Validate a config against the schema and, where possible, resolve it.
/// All diagnostics are collected rather than failing fast.
pub fn validate(raw_text: &str, command: Option<Command>) -> (Vec<Diagnostic>, Option<ResolvedConfig>) {
    let mut checker = Checker { raw: raw_text, diags: Vec::new() };

    let parsed: RawConfig = match toml::from_str(raw_text) {
        Ok(p) => p,
        Err(e) => {
            let line = e.span().map(|span| {
                raw_text[..span.start.min(raw_text.len())]
                    .bytes()
                    .filter(|&b| b == b'\n')
                    .count()
                    + 1
            });
            checker.diags.push(Diagnostic {
                severity: Severity::Error,
                field: "(file)".into(),
                line,
                message: e.message().to_string(),
            });
            return (checker.diags, None);
        }
    };

    let effective_command = match (command, parsed.command) {
        (Some(cli), Some(cfg)) if cli != cfg => {
            checker.error(
                "command",
                format!("config says `{}` but the `{}` command was invoked", cfg.name(), cli.name()),
            );
            Some(cli)
        }
        (Some(cli), _) => Some(cli),
        (None, cfg) => cfg,
    };

    // ---- model ----
    let model = parsed.model.as_ref().and_then(|m| resolve_model(m, &mut checker));

    // ---- grid ----
    let mut grid = GridSpec::default();
    if let Some(g) = &parsed.grid {
        grid.samples = g.samples;
        grid.half_span = checker.width("grid.half_span", &g.half_span, false);
    }

    // ---- delays ----
    let delays = parsed.delays.as_ref().and_then(|d| {
        let start = d.start_ps;
        let stop = d.stop_ps;
        let count = d.count;
        match (start, stop, count) {
            (Some(a), Some(b), Some(n)) => {
                if n == 0 {
                    checker.error("delays.count", "count must be at least 1");
                    return None;
                }
                if n > 1 && !(b > a) {
                    checker.error("delays.stop_ps", "stop_ps must exceed start_ps");
                    return None;
                }
                let taus = if n == 1 {
                    vec![crate::units::Delay::from_ps(a)]
                } else {
                    crate::grid::linspace(a, b, n)
                        .into_iter()
                        .map(crate::units::Delay::from_ps)
                        .collect()
                };
                Some(taus)
            }
            _ => {
                for (name, present) in [
                    ("delays.start_ps", start.is_some()),
                    ("delays.stop_ps", stop.is_some()),
                    ("delays.count", count.is_some()),
                ] {
                    if !present {
                        checker.error(name, "missing required field");
                    }
                }
                None
            }
        }
    });

    // ---- basis ----
    let basis = parsed.basis.as_ref().and_then(|b| {
        let center = checker
            .frequency("basis.center", &b.center, false)
            .or_else(|| model.as_ref().map(|m| m.pump.omega_c.rad_per_ps()));
        let scale = checker.width("basis.scale", &b.scale, false);
        let max_order = b.max_order.unwrap_or(5);
        let center = center?;
        let scale_given = scale.is_some();
        let scale = scale.unwrap_or_else(|| {
            model.as_ref().map(|m| m.pump.sigma / 2.0).unwrap_or(1.0)
        });
        match HermiteBasis::new(AngularFrequency::from_rad_per_ps(center), scale, max_order) {
            Ok(basis) => Some(BasisRequest {
                basis,
                optimize_scale: b.optimize_scale.unwrap_or(!scale_given),
            }),
            Err(e) => {
                checker.error("basis", e.to_string());
                None
            }
        }
    });

    // ---- witness ----
    let witness_input = parsed.witness.as_ref().and_then(|w| w.input.clone());
    let witness_epsilon = parsed.witness.as_ref().and_then(|w| w.epsilon);
    if let Some(eps) = witness_epsilon {
        if eps < 0.0 {
            checker.error("witness.epsilon", "guard band must be non-negative");
        }
    }

    // ---- fit ----
    let fit = parsed.fit.as_ref().and_then(|f| resolve_fit(f, &mut checker));

    // ---- per-command requirements ----
    if let Some(cmd) = effective_command {
        match cmd {
            Command::Simulate => {
                if parsed.model.is_none() {
                    checker.error("model", "simulate requires a [model] section");
                }
                if parsed.delays.is_none() {
                    checker.error("delays", "simulate requires a [delays] section");
                }
            }
            Command::Decompose => {
                if parsed.model.is_none() {
                    checker.error("model", "decompose requires a [model] section");
                }
            }
            Command::Witness => {
                if witness_input.is_none() && (parsed.model.is_none() || parsed.delays.is_none()) {
                    checker.error(
                        "witness",
                        "witness needs either witness.input or a [model] plus [delays] to simulate",
                    );
                }
            }
            Command::Fit => {
                if parsed.fit.is_none() {
                    checker.error("fit", "fit requires a [fit] section");
                }
            }
            Command::Discriminate => {
                if parsed.model.is_none() {
                    checker.error("model", "discriminate requires a [model] section");
                } else if parsed.model.as_ref().is_some_and(|m| m.superposition.is_none()) {
                    checker.error(
                        "model.superposition",
                        "discriminate requires the stand-in superposition parameters",
                    );
                }
            }
        }
    }

    let clean = checker.diags.iter().all(|d| d.severity != Severity::Error);
    let resolved = clean.then(|| ResolvedConfig {
        command: effective_command,
        model,
        grid,
        delays,
        basis,
        witness_input,
        witness_epsilon,
        fit,
        out_prefix: parsed
            .io
            .as_ref()
            .and_then(|io| io.prefix.clone())
            .unwrap_or_else(|| "run".into()),
        export_jsa: parsed.io.as_ref().and_then(|io| io.export_jsa).unwrap_or(true),
    });
    (checker.diags, resolved)
}

fn resolve_model(m: &ModelSection, checker: &mut Checker<'_>) -> Option<ProcessModel> {
    let pump = match &m.pump {
        None => {
            checker.error("model.pump", "missing required section");
            None
        }
        Some(p) => {
            let center = checker.frequency("model.pump.center", &p.center, true);
            let sigma = match (&p.sigma, &p.fwhm) {
                (Some(_), Some(_)) => {
                    checker.error("model.pump.sigma", "give either sigma or fwhm, not both");
                    None
                }
                (Some(s), None) => checker.width("model.pump.sigma", &Some(s.clone()), true),
                (None, Some(f)) => match f {
                    NumberOrQuantity::Quantity(q) if q.unit == "nm" => center.map(|c| {
                        // fwhm is quoted on the pump; its wavelength is half
                        // the degenerate photon's
                        let lambda_pump = 2.0 * std::f64::consts::PI * C_NM_PER_PS / (2.0 * c);
                        sigma_from_fwhm_nm(lambda_pump, q.value)
                    }),
                    NumberOrQuantity::Quantity(q) => {
                        checker.error(
                            "model.pump.fwhm",
                            format!("fwhm must be tagged nm, got `{}`", q.unit),
                        );
                        None
                    }
                    NumberOrQuantity::Number(_) => {
                        checker.error("model.pump.fwhm", "missing unit tag: write { value = ..., unit = \"nm\" }");
                        None
                    }
                },
                (None, None) => {
                    checker.error("model.pump.sigma", "missing required field (or give fwhm)");
                    None
                }
            };
            match (center, sigma) {
                (Some(c), Some(s)) => Some(PumpModel {
                    omega_c: AngularFrequency::from_rad_per_ps(c),
                    sigma: s,
                }),
                _ => None,
            }
        }
    };

    let phasematch = match &m.phasematch {
        None => {
            checker.error("model.phasematch", "missing required section");
            None
        }
        Some(pm) => {
            let mut ok = true;
            for (name, v) in [
                ("model.phasematch.length_mm", pm.length_mm),
                ("model.phasematch.dk_s_ps_per_mm", pm.dk_s_ps_per_mm),
                ("model.phasematch.dk_i_ps_per_mm", pm.dk_i_ps_per_mm),
            ] {
                if v.is_none() {
                    checker.error(name, "missing required field");
                    ok = false;
                }
            }
            ok.then(|| PhasematchModel {
                length_mm: pm.length_mm.unwrap(),
                dk_s: pm.dk_s_ps_per_mm.unwrap(),
                dk_i: pm.dk_i_ps_per_mm.unwrap(),
                gamma: pm.gamma.unwrap_or(DEFAULT_GAMMA),
                shape: pm.shape.unwrap_or(PhasematchShape::GaussianApprox),
            })
        }
    };

    let superposition = m.superposition.as_ref().and_then(|sp| {
        let delta_omega = checker.width("model.superposition.delta_omega", &sp.delta_omega, true);
        let r = sp.r;
        if r.is_none() {
            checker.error("model.superposition.r", "missing required field");
        }
        Some(SuperpositionModel {
            delta_omega: delta_omega?,
            r: r?,
            phi: sp.phi_rad.unwrap_or(0.0),
        })
    });

    let model = ProcessModel { pump: pump?, phasematch: phasematch?, superposition };
    if let Err(e) = model.validate() {
        checker.error("model", e.to_string());
        return None;
    }
    Some(model)
}

fn resolve_fit(f: &FitSection, checker: &mut Checker<'_>) -> Option<ResolvedFit> {
    let input = match &f.input {
        Some(p) => Some(p.clone()),
        None => {
            checker.error("fit.input", "missing required field");
            None
        }
    };
    let counts = match f.data_kind.as_deref() {
        None | Some("probability") => false,
        Some("counts") => true,
        Some(other) => {
            checker.error("fit.data_kind", format!("expected probability or counts, got `{other}`"));
            false
        }
    };
    let free = match &f.free {
        Some(v) if !v.is_empty() => v.clone(),
        _ => {
            checker.error("fit.free", "list at least one free parameter");
            return None;
        }
    };

    let entries = f.params.clone().unwrap_or_default();
    let known: Vec<&str> = FitParam::ALL.iter().map(|p| p.name()).collect();
    for name in entries.keys() {
        if !known.contains(&name.as_str()) {
            checker.error(&format!("fit.params.{name}"), "unknown parameter");
        }
    }

    // start from neutral defaults; every free parameter must give an initial
    let mut initial = ParamValues::baseline_defaults(5.0, 1.0, 2.0);
    let mut bounds: BTreeMap<FitParam, (f64, f64)> = BTreeMap::new();
    for p in FitParam::ALL {
        let field = format!("fit.params.{}", p.name());
        let entry = entries.get(p.name());
        let value = |checker: &mut Checker<'_>, v: &Option<NumberOrQuantity>, what: &str| -> Option<f64> {
            match p {
                FitParam::DeltaOmega | FitParam::Sigma => {
                    checker.width(&format!("{field}.{what}"), v, false)
                }
                _ => match v {
                    None => None,
                    Some(NumberOrQuantity::Number(x)) => Some(*x),
                    Some(NumberOrQuantity::Quantity(_)) => {
                        checker.error(
                            &format!("{field}.{what}"),
                            "this parameter is dimensionless or in ps; write a plain number",
                        );
                        None
                    }
                },
            }
        };
        if let Some(e) = entry {
            if let Some(v) = value(checker, &e.initial, "initial") {
                initial.set(p, v);
            }
            let lo = value(checker, &e.min, "min");
            let hi = value(checker, &e.max, "max");
            if let (Some(lo), Some(hi)) = (lo, hi) {
                bounds.insert(p, (lo, hi));
            } else if lo.is_some() != hi.is_some() {
                checker.error(&field, "give both min and max or neither");
            }
        }
        if free.contains(&p) && entry.and_then(|e| e.initial.as_ref()).is_none() {
            checker.error(&field, "free parameter needs an initial value");
        }
    }

    let spec = match FitSpec::new(free, initial) {
        Ok(s) => s,
        Err(e) => {
            checker.error("fit", e.to_string());
            return None;
        }
    };
    let mut spec = match spec.with_bounds(bounds) {
        Ok(s) => s,
        Err(e) => {
            checker.error("fit", e.to_string());
            return None;
        }
    };
    if let Some(g) = f.gamma {
        spec.gamma = g;
    }
    if let Some(it) = f.max_iterations {
        spec.max_iterations = it;
    }
    Some(ResolvedFit { input: input?, counts, spec })
}

/// Load and fully resolve a config file for a command, mapping diagnostics
/// to a config error.
pub fn load(raw_text: &str, command: Command) -> Result<ResolvedConfig, CliError> {
    let (diags, resolved) = validate(raw_text, Some(command));
    match resolved {
        Some(cfg) => Ok(cfg),
        None => {
            let text = diags
                .iter()
                .filter(|d| d.severity == Severity::Error)
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join("\n");
            Err(CliError::Config(text))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"
command = "simulate"

[model.pump]
center = { value = 808.0, unit = "nm" }
sigma = { value = 6.861327555, unit = "rad_per_ps" }

[model.phasematch]
length_mm = 12.0
dk_s_ps_per_mm = 0.3
dk_i_ps_per_mm = 0.1

[model.superposition]
delta_omega = { value = 1.35, unit = "THz" }
r = 1.0
phi_rad = 0.0

[delays]
start_ps = -10.0
stop_ps = 10.0
count = 401
"#;

    #[test]
    fn good_config_is_clean() {
        let (diags, resolved) = validate(GOOD, Some(Command::Simulate));
        assert!(diags.iter().all(|d| d.severity != Severity::Error), "{diags:?}");
        let cfg = resolved.unwrap();
        let model = cfg.model.unwrap();
        approx::assert_relative_eq!(model.pump.omega_c.rad_per_ps(), 2331.251939739, max_relative = 1e-9);
        approx::assert_relative_eq!(
            model.superposition.unwrap().delta_omega,
            8.482300,
            max_relative = 1e-6
        );
        assert_eq!(cfg.delays.unwrap().len(), 401);
    }

    #[test]
    fn thz_tag_notes_the_convention() {
        let (diags, _) = validate(GOOD, Some(Command::Simulate));
        let note = diags
            .iter()
            .find(|d| d.severity == Severity::Note && d.field == "model.superposition.delta_omega")
            .expect("expected a THz ingestion note");
        assert!(note.message.contains("2*pi"), "{}", note.message);
    }

    #[test]
    fn missing_unit_tag_is_diagnosed_with_line() {
        let bad = GOOD.replace(
            "sigma = { value = 6.861327555, unit = \"rad_per_ps\" }",
            "sigma = 6.861327555",
        );
        let (diags, resolved) = validate(&bad, Some(Command::Simulate));
        assert!(resolved.is_none());
        let d = diags
            .iter()
            .find(|d| d.field == "model.pump.sigma" && d.severity == Severity::Error)
            .expect("sigma diagnostic");
        assert!(d.message.contains("unit tag"));
        assert_eq!(d.line, Some(6));
    }

    #[test]
    fn command_mismatch_is_diagnosed() {
        let (diags, _) = validate(GOOD, Some(Command::Fit));
        assert!(diags
            .iter()
            .any(|d| d.field == "command" && d.severity == Severity::Error));
    }

    #[test]
    fn fwhm_conversion_matches_reference() {
        let cfg = GOOD.replace(
            "sigma = { value = 6.861327555, unit = \"rad_per_ps\" }",
            "fwhm = { value = 1.4, unit = \"nm\" }",
        );
        let (diags, resolved) = validate(&cfg, Some(Command::Simulate));
        assert!(diags.iter().all(|d| d.severity != Severity::Error), "{diags:?}");
        let model = resolved.unwrap().model.unwrap();
        approx::assert_relative_eq!(model.pump.sigma, 6.861327555, max_relative = 1e-9);
    }

    #[test]
    fn unknown_key_is_a_syntax_error() {
        let bad = GOOD.replace("[delays]", "[delays]\nstep = 2.0");
        let (diags, resolved) = validate(&bad, Some(Command::Simulate));
        assert!(resolved.is_none());
        assert!(diags.iter().any(|d| d.severity == Severity::Error));
    }

    #[test]
    fn fit_config_resolves_bounds_and_units() {
        let text = r#"
command = "fit"

[fit]
input = "trace.csv"
free = ["delta_omega", "rho"]

[fit.params.delta_omega]
initial = { value = 1.3, unit = "THz" }
min = { value = 0.5, unit = "THz" }
max = { value = 2.5, unit = "THz" }

[fit.params.rho]
initial = 0.9

[fit.params.sigma]
initial = { value = 6.86, unit = "rad_per_ps" }

[fit.params.tau_minus]
initial = 1.2

[fit.params.tau_plus]
initial = 2.4
"#;
        let (diags, resolved) = validate(text, Some(Command::Fit));
        assert!(diags.iter().all(|d| d.severity != Severity::Error), "{diags:?}");
        let fit = resolved.unwrap().fit.unwrap();
        approx::assert_relative_eq!(fit.spec.initial.delta_omega, 8.1681, max_relative = 1e-4);
        assert_eq!(fit.spec.free.len(), 2);
    }

    #[test]
    fn fit_free_param_without_initial_is_diagnosed() {
        let text = r#"
[fit]
input = "trace.csv"
free = ["delta_omega"]
"#;
        let (diags, _) = validate(text, Some(Command::Fit));
        assert!(diags
            .iter()
            .any(|d| d.field == "fit.params.delta_omega" && d.severity == Severity::Error));
    }

    #[test]
    fn discriminate_needs_superposition() {
        let text = GOOD
            .replace("command = \"simulate\"", "command = \"discriminate\"")
            .replace(
                "[model.superposition]\ndelta_omega = { value = 1.35, unit = \"THz\" }\nr = 1.0\nphi_rad = 0.0\n\n",
                "",
            );
        let (diags, _) = validate(&text, Some(Command::Discriminate));
        assert!(diags
            .iter()
            .any(|d| d.field == "model.superposition" && d.severity == Severity::Error));
    }
}
