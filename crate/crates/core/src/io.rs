//! File formats: trace CSV, mode-coefficient CSV, joint-spectrum CSV and
//! the compact `JSA1` binary grid.
//!
//! Every text artifact starts with `#` comment lines recording the tool
//! version, the configuration hash and the unit conventions, so a file can
//! be traced back to the run that produced it.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::grid::SpectralGrid;
use crate::hom::{HomTrace, TraceMeta};
use crate::modes::ModeDecomposition;
use crate::units::Delay;

/// Magic bytes of the binary grid format.
pub const JSA_MAGIC: &[u8; 4] = b"JSA1";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("{path}: not a JSA1 file (bad magic)")]
    BadMagic { path: String },
    #[error("{path}: {message}")]
    Malformed { path: String, message: String },
}

fn io_err(path: &Path, source: std::io::Error) -> IoError {
    IoError::Io { path: path.display().to_string(), source }
}

/// Provenance block written at the top of every text artifact.
#[derive(Debug, Clone, Default)]
pub struct FileHeader {
    pub tool_version: String,
    pub config_sha256: String,
    pub seed: Option<u64>,
    pub extra: BTreeMap<String, String>,
}

impl FileHeader {
    pub fn new(config_sha256: impl Into<String>) -> Self {
        FileHeader {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256: config_sha256.into(),
            seed: None,
            extra: BTreeMap::new(),
        }
    }

    fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# biphoton {}", self.tool_version)?;
        if !self.config_sha256.is_empty() {
            writeln!(w, "# config_sha256 = {}", self.config_sha256)?;
        }
        if let Some(seed) = self.seed {
            writeln!(w, "# seed = {seed}")?;
        }
        writeln!(
            w,
            "# units: angular frequency in rad/ps; THz inputs are ordinary frequency times 2*pi; delays in ps"
        )?;
        for (k, v) in &self.extra {
            writeln!(w, "# {k} = {v}")?;
        }
        Ok(())
    }
}

/// Write a coincidence trace: provenance comments, engine metadata, then
/// `tau_ps,p_coincidence` rows (plus a counts column when present).
pub fn write_trace_csv(path: &Path, trace: &HomTrace, header: &FileHeader) -> Result<(), IoError> {
    let file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let mut go = || -> std::io::Result<()> {
        header.write_to(&mut w)?;
        writeln!(w, "# engine = {}", trace.meta.engine)?;
        for (k, v) in &trace.meta.params {
            writeln!(w, "# {k} = {v}")?;
        }
        match &trace.meta.counts {
            Some(counts) => {
                writeln!(w, "tau_ps,p_coincidence,counts")?;
                for ((d, p), c) in trace.delays().iter().zip(trace.probabilities()).zip(counts) {
                    writeln!(w, "{:.12e},{:.12e},{:.12e}", d.ps(), p, c)?;
                }
            }
            None => {
                writeln!(w, "tau_ps,p_coincidence")?;
                for (d, p) in trace.delays().iter().zip(trace.probabilities()) {
                    writeln!(w, "{:.12e},{:.12e}", d.ps(), p)?;
                }
            }
        }
        w.flush()
    };
    go().map_err(|e| io_err(path, e))
}

/// Read a trace written by [`write_trace_csv`], or any CSV with a
/// `tau_ps,p_coincidence` or `tau_ps,counts` header. Count data is
/// normalized by the plateau rule.
pub fn read_trace_csv(path: &Path) -> Result<HomTrace, IoError> {
    let file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let mut meta = TraceMeta::default();
    let mut columns: Option<Vec<String>> = None;
    let mut taus: Vec<Delay> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let mut counts: Vec<f64> = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some((k, v)) = comment.split_once('=') {
                let key = k.trim().to_string();
                let value = v.trim().to_string();
                if key == "engine" {
                    meta.engine = value;
                } else {
                    meta.params.insert(key, value);
                }
            }
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        match &columns {
            None => {
                let names: Vec<String> = fields.iter().map(|s| s.to_string()).collect();
                if names.first().map(String::as_str) != Some("tau_ps") {
                    return Err(IoError::Parse {
                        path: path.display().to_string(),
                        line: lineno,
                        message: format!("expected header starting with tau_ps, got `{trimmed}`"),
                    });
                }
                columns = Some(names);
            }
            Some(names) => {
                if fields.len() != names.len() {
                    return Err(IoError::Parse {
                        path: path.display().to_string(),
                        line: lineno,
                        message: format!("expected {} fields, got {}", names.len(), fields.len()),
                    });
                }
                let parse = |s: &str| -> Result<f64, IoError> {
                    s.parse::<f64>().map_err(|_| IoError::Parse {
                        path: path.display().to_string(),
                        line: lineno,
                        message: format!("not a number: `{s}`"),
                    })
                };
                taus.push(Delay::from_ps(parse(fields[0])?));
                for (name, field) in names.iter().zip(&fields).skip(1) {
                    match name.as_str() {
                        "p_coincidence" => values.push(parse(field)?),
                        "counts" => counts.push(parse(field)?),
                        other => {
                            return Err(IoError::Parse {
                                path: path.display().to_string(),
                                line: lineno,
                                message: format!("unknown column `{other}`"),
                            });
                        }
                    }
                }
            }
        }
    }

    if columns.is_none() {
        return Err(IoError::Malformed {
            path: path.display().to_string(),
            message: "no header row found".into(),
        });
    }
    if values.is_empty() && !counts.is_empty() {
        // counts-only file: normalize by the plateau rule
        return crate::fit::trace_from_counts(taus, counts).map_err(|e| IoError::Malformed {
            path: path.display().to_string(),
            message: e.to_string(),
        });
    }
    if !counts.is_empty() {
        meta.counts = Some(counts);
    }
    HomTrace::new(taus, values, meta).map_err(|e| IoError::Malformed {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Write the sampled joint spectrum as CSV rows
/// `omega_s_rad_per_ps,omega_i_rad_per_ps,re,im`.
pub fn write_jsa_csv(path: &Path, grid: &SpectralGrid, header: &FileHeader) -> Result<(), IoError> {
    let file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let mut go = || -> std::io::Result<()> {
        header.write_to(&mut w)?;
        writeln!(w, "omega_s_rad_per_ps,omega_i_rad_per_ps,re,im")?;
        let amp = grid.amplitude();
        for (i, &ws) in grid.omega_s_axis().iter().enumerate() {
            for (j, &wi) in grid.omega_i_axis().iter().enumerate() {
                let z = amp[[i, j]];
                writeln!(w, "{ws:.12e},{wi:.12e},{:.12e},{:.12e}", z.re, z.im)?;
            }
        }
        w.flush()
    };
    go().map_err(|e| io_err(path, e))
}

/// Write the compact binary grid: magic `JSA1`, then little-endian u64
/// axis lengths, the two axes as f64, and the amplitude row-major as
/// interleaved re/im f64 pairs.
pub fn write_jsa_binary(path: &Path, grid: &SpectralGrid) -> Result<(), IoError> {
    let file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let mut go = || -> std::io::Result<()> {
        w.write_all(JSA_MAGIC)?;
        w.write_all(&(grid.omega_s_axis().len() as u64).to_le_bytes())?;
        w.write_all(&(grid.omega_i_axis().len() as u64).to_le_bytes())?;
        for &v in grid.omega_s_axis() {
            w.write_all(&v.to_le_bytes())?;
        }
        for &v in grid.omega_i_axis() {
            w.write_all(&v.to_le_bytes())?;
        }
        for z in grid.amplitude().iter() {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        w.flush()
    };
    go().map_err(|e| io_err(path, e))
}

/// Read a grid written by [`write_jsa_binary`].
pub fn read_jsa_binary(path: &Path) -> Result<SpectralGrid, IoError> {
    let file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut r = BufReader::new(file);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|e| io_err(path, e))?;
    if &magic != JSA_MAGIC {
        return Err(IoError::BadMagic { path: path.display().to_string() });
    }
    let mut u64buf = [0u8; 8];
    let mut read_u64 = |r: &mut BufReader<std::fs::File>| -> Result<u64, IoError> {
        r.read_exact(&mut u64buf).map_err(|e| io_err(path, e))?;
        Ok(u64::from_le_bytes(u64buf))
    };
    let n_s = read_u64(&mut r)? as usize;
    let n_i = read_u64(&mut r)? as usize;
    const MAX_ELEMENTS: usize = 1 << 28;
    if n_s == 0 || n_i == 0 || n_s.saturating_mul(n_i) > MAX_ELEMENTS {
        return Err(IoError::Malformed {
            path: path.display().to_string(),
            message: format!("unreasonable grid dimensions {n_s} x {n_i}"),
        });
    }
    let mut f64buf = [0u8; 8];
    let mut read_f64 = |r: &mut BufReader<std::fs::File>| -> Result<f64, IoError> {
        r.read_exact(&mut f64buf).map_err(|e| io_err(path, e))?;
        Ok(f64::from_le_bytes(f64buf))
    };
    let mut omega_s = Vec::with_capacity(n_s);
    for _ in 0..n_s {
        omega_s.push(read_f64(&mut r)?);
    }
    let mut omega_i = Vec::with_capacity(n_i);
    for _ in 0..n_i {
        omega_i.push(read_f64(&mut r)?);
    }
    let mut amp = Array2::<C64>::zeros((n_s, n_i));
    for i in 0..n_s {
        for j in 0..n_i {
            let re = read_f64(&mut r)?;
            let im = read_f64(&mut r)?;
            amp[[i, j]] = C64::new(re, im);
        }
    }
    SpectralGrid::new(omega_s, omega_i, amp).map_err(|e| IoError::Malformed {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Write mode coefficients as `i,j,re_c,im_c` rows, preceded by a summary
/// of the captured weight and the Schmidt values.
pub fn write_modes_csv(
    path: &Path,
    dec: &ModeDecomposition,
    header: &FileHeader,
) -> Result<(), IoError> {
    let file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let mut go = || -> std::io::Result<()> {
        header.write_to(&mut w)?;
        writeln!(w, "# captured_weight = {:.12e}", dec.captured_weight)?;
        let shown: Vec<String> = dec
            .schmidt_values
            .iter()
            .take(8)
            .map(|s| format!("{s:.9e}"))
            .collect();
        writeln!(w, "# schmidt_values = {}", shown.join(" "))?;
        writeln!(w, "i,j,re_c,im_c")?;
        let (rows, cols) = dec.coefficients.dim();
        for i in 0..rows {
            for j in 0..cols {
                let c = dec.coefficients[[i, j]];
                writeln!(w, "{i},{j},{:.12e},{:.12e}", c.re, c.im)?;
            }
        }
        w.flush()
    };
    go().map_err(|e| io_err(path, e))
}

/// Overlay of measured data and fitted model, `tau_ps,p_data,p_model`.
pub fn write_overlay_csv(
    path: &Path,
    delays: &[Delay],
    data: &[f64],
    model: &[f64],
    header: &FileHeader,
) -> Result<(), IoError> {
    let file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let mut go = || -> std::io::Result<()> {
        header.write_to(&mut w)?;
        writeln!(w, "tau_ps,p_data,p_model")?;
        for k in 0..delays.len() {
            writeln!(w, "{:.12e},{:.12e},{:.12e}", delays[k].ps(), data[k], model[k])?;
        }
        w.flush()
    };
    go().map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::linspace;
    use crate::spectra::{build_jsa, GridSpec, PhasematchModel, PhasematchShape, ProcessModel, PumpModel};
    use crate::units::AngularFrequency;

    fn sample_grid() -> SpectralGrid {
        let model = ProcessModel {
            pump: PumpModel {
                omega_c: AngularFrequency::from_wavelength_nm(808.0),
                sigma: 6.861327555,
            },
            phasematch: PhasematchModel {
                length_mm: 12.0,
                dk_s: 0.3,
                dk_i: 0.1,
                gamma: 0.193,
                shape: PhasematchShape::GaussianApprox,
            },
            superposition: None,
        };
        build_jsa(&model, &GridSpec { samples: Some(64), half_span: Some(52.0), center: None }).unwrap()
    }

    #[test]
    fn jsa_binary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.jsa");
        let grid = sample_grid();
        write_jsa_binary(&path, &grid).unwrap();
        let back = read_jsa_binary(&path).unwrap();
        assert_eq!(back.omega_s_axis().len(), grid.omega_s_axis().len());
        for (a, b) in grid.amplitude().iter().zip(back.amplitude().iter()) {
            assert_eq!(a, b, "binary format must be bit-exact");
        }
    }

    #[test]
    fn bad_magic_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("not.jsa");
        std::fs::write(&path, b"NOPE12345678").unwrap();
        assert!(matches!(read_jsa_binary(&path), Err(IoError::BadMagic { .. })));
    }

    #[test]
    fn trace_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let delays: Vec<Delay> = linspace(-2.0, 2.0, 21).into_iter().map(Delay::from_ps).collect();
        let probs: Vec<f64> = delays.iter().map(|d| 0.5 - 0.3 * (-d.ps() * d.ps()).exp()).collect();
        let mut meta = TraceMeta { engine: "analytic".into(), ..Default::default() };
        meta.params.insert("sigma_rad_per_ps".into(), "6.861".into());
        let trace = HomTrace::new(delays, probs, meta).unwrap();
        write_trace_csv(&path, &trace, &FileHeader::new("abc123")).unwrap();
        let back = read_trace_csv(&path).unwrap();
        assert_eq!(back.len(), trace.len());
        assert_eq!(back.meta.engine, "analytic");
        assert_eq!(back.meta.params["sigma_rad_per_ps"], "6.861");
        for (a, b) in trace.probabilities().iter().zip(back.probabilities()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn counts_csv_is_normalized_on_read() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("counts.csv");
        let mut text = String::from("tau_ps,counts\n");
        for k in 0..40 {
            let tau = -4.0 + 8.0 * k as f64 / 39.0;
            let c = 800.0 - 400.0 * (-tau * tau / 0.3).exp();
            text.push_str(&format!("{tau},{c}\n"));
        }
        std::fs::write(&path, text).unwrap();
        let trace = read_trace_csv(&path).unwrap();
        assert!(trace.meta.counts.is_some());
        assert!((trace.probabilities()[0] - 0.5).abs() < 0.01);
    }

    #[test]
    fn malformed_rows_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "tau_ps,p_coincidence\n0.0,0.4\nnot,a_number\n").unwrap();
        match read_trace_csv(&path) {
            Err(IoError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_file_reports_path() {
        let err = read_trace_csv(Path::new("/nonexistent/trace.csv")).unwrap_err();
        assert!(matches!(err, IoError::Io { .. }));
    }

    #[test]
    fn header_block_leads_every_artifact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("jsa.csv");
        write_jsa_csv(&path, &sample_grid(), &FileHeader::new("deadbeef")).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# biphoton "));
        assert!(text.contains("# config_sha256 = deadbeef"));
        assert!(text.contains("# units: angular frequency in rad/ps"));
    }
}
