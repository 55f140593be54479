//! On-disk formats: channel JSON/CSV, estimate JSON, phase-config CSV and
//! packed bitmap, sensing-matrix CSV, and the iterative power trace.

use std::fs;
use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::channel::RisChannel;
use crate::configure::PhaseConfig;
use crate::error::{Result, RisError};
use crate::estimate::EstimateResult;
use crate::scalar::Scalar;
use crate::sensing::SensingMatrix;

pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| RisError::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| RisError::io(path, e))
}

fn schema_err(path: &Path, message: impl ToString) -> RisError {
    RisError::Schema {
        path: path.display().to_string(),
        message: message.to_string(),
    }
}

// ── channel JSON ────────────────────────────────────────────────────────────

#[derive(Serialize, Deserialize)]
struct ChannelFile<T> {
    rows: usize,
    cols: usize,
    /// Complex gains as [re, im] pairs, flat order.
    gains: Vec<[T; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    los: Option<[T; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mask: Option<Vec<bool>>,
}

pub fn write_channel_json<T: Scalar>(channel: &RisChannel<T>, path: &Path) -> Result<()> {
    let file = ChannelFile {
        rows: channel.rows,
        cols: channel.cols,
        gains: channel.gains.iter().map(|g| [g.re, g.im]).collect(),
        los: channel.los.map(|l| [l.re, l.im]),
        mask: channel.mask.clone(),
    };
    let mut text = serde_json::to_string_pretty(&file).map_err(|e| schema_err(path, e))?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

pub fn read_channel_json<T: Scalar>(path: &Path) -> Result<RisChannel<T>> {
    let text = read_text(path)?;
    let file: ChannelFile<T> =
        serde_json::from_str(&text).map_err(|e| schema_err(path, e))?;
    let channel = RisChannel {
        gains: file.gains.iter().map(|&[re, im]| Complex::new(re, im)).collect(),
        los: file.los.map(|[re, im]| Complex::new(re, im)),
        rows: file.rows,
        cols: file.cols,
        mask: file.mask,
    };
    channel.validate().map_err(|e| schema_err(path, e))?;
    Ok(channel)
}

// ── channel CSV ─────────────────────────────────────────────────────────────

/// CSV with 17 significant digits per component: enough for exact f64 round
/// trips.  The LOS gain and mask are JSON-only.
pub fn write_channel_csv<T: Scalar>(channel: &RisChannel<T>, path: &Path) -> Result<()> {
    let mut out = String::from("flat_index,re,im\n");
    for (i, g) in channel.gains.iter().enumerate() {
        out.push_str(&format!("{i},{:.16e},{:.16e}\n", g.re, g.im));
    }
    write_bytes(path, out.as_bytes())
}

/// Reads a gain CSV; the lattice shape is external to the format.
pub fn read_channel_csv<T: Scalar>(path: &Path, rows: usize, cols: usize) -> Result<RisChannel<T>> {
    let text = read_text(path)?;
    let n = rows * cols;
    let mut gains: Vec<Option<Complex<T>>> = vec![None; n];
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if idx == 0 {
            if line.trim() != "flat_index,re,im" {
                return Err(RisError::Parse {
                    line: lineno,
                    message: format!("expected header 'flat_index,re,im', got '{line}'"),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(RisError::Parse {
                line: lineno,
                message: format!("expected 3 fields, got {}", fields.len()),
            });
        }
        let flat: usize = fields[0].trim().parse().map_err(|e| RisError::Parse {
            line: lineno,
            message: format!("bad flat index: {e}"),
        })?;
        if flat >= n {
            return Err(RisError::Parse {
                line: lineno,
                message: format!("flat index {flat} outside 0..{n}"),
            });
        }
        if gains[flat].is_some() {
            return Err(RisError::Parse {
                line: lineno,
                message: format!("duplicate flat index {flat}"),
            });
        }
        let re = parse_float::<T>(fields[1], lineno)?;
        let im = parse_float::<T>(fields[2], lineno)?;
        gains[flat] = Some(Complex::new(re, im));
    }
    let gains = gains
        .into_iter()
        .enumerate()
        .map(|(i, g)| {
            g.ok_or_else(|| RisError::Parse {
                line: text.lines().count(),
                message: format!("missing entry for flat index {i}"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    RisChannel::new(gains, rows, cols)
}

fn parse_float<T: Scalar>(field: &str, line: usize) -> Result<T> {
    let v: f64 = field.trim().parse().map_err(|e| RisError::Parse {
        line,
        message: format!("bad number '{}': {e}", field.trim()),
    })?;
    Ok(T::real(v))
}

// ── estimate JSON ───────────────────────────────────────────────────────────

#[derive(Serialize, Deserialize)]
pub struct EstimateFile<T> {
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sparsity: Option<usize>,
    pub rho_hat: Vec<[T; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_hat: Option<Vec<[T; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<Vec<usize>>,
    pub residual_norms: Vec<T>,
}

pub fn write_estimate_json<T: Scalar>(
    result: &EstimateResult<T>,
    method: &str,
    sparsity: Option<usize>,
    path: &Path,
) -> Result<()> {
    let pairs = |v: &[Complex<T>]| v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>();
    let file = EstimateFile {
        method: method.to_string(),
        sparsity,
        rho_hat: pairs(&result.rho_hat),
        gamma_hat: result.gamma_hat.as_deref().map(pairs),
        support: result.support.clone(),
        residual_norms: result.residual_norms.clone(),
    };
    let mut text = serde_json::to_string_pretty(&file).map_err(|e| schema_err(path, e))?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

pub fn read_estimate_json<T: Scalar>(path: &Path) -> Result<EstimateFile<T>> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| schema_err(path, e))
}

// ── phase config ────────────────────────────────────────────────────────────

pub fn write_config_csv<T: Scalar>(config: &PhaseConfig<T>, path: &Path) -> Result<()> {
    let mut out = String::from("flat_index,phase_radians\n");
    for (i, p) in config.phases().iter().enumerate() {
        out.push_str(&format!("{i},{p}\n"));
    }
    write_bytes(path, out.as_bytes())
}

/// Reads a phase CSV; the quantized flag is re-derived (all entries exactly
/// 0 or π), which survives the shortest-round-trip decimal text.
pub fn read_config_csv<T: Scalar>(path: &Path) -> Result<PhaseConfig<T>> {
    let text = read_text(path)?;
    let mut phases: Vec<(usize, T)> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if idx == 0 {
            if line.trim() != "flat_index,phase_radians" {
                return Err(RisError::Parse {
                    line: lineno,
                    message: format!("expected header 'flat_index,phase_radians', got '{line}'"),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 {
            return Err(RisError::Parse {
                line: lineno,
                message: format!("expected 2 fields, got {}", fields.len()),
            });
        }
        let flat: usize = fields[0].trim().parse().map_err(|e| RisError::Parse {
            line: lineno,
            message: format!("bad flat index: {e}"),
        })?;
        phases.push((flat, parse_float::<T>(fields[1], lineno)?));
    }
    let n = phases.len();
    let mut ordered = vec![None; n];
    for (flat, p) in phases {
        if flat >= n || ordered[flat].is_some() {
            return Err(RisError::Parse {
                line: 0,
                message: format!("flat index {flat} duplicated or outside 0..{n}"),
            });
        }
        ordered[flat] = Some(p);
    }
    let psi: Vec<T> = ordered.into_iter().map(|p| p.unwrap()).collect();
    if psi.iter().all(|&p| p == T::zero() || p == T::PI()) {
        let flips: Vec<bool> = psi.iter().map(|&p| p == T::PI()).collect();
        Ok(PhaseConfig::from_flips(&flips))
    } else {
        PhaseConfig::from_phases(psi)
    }
}

/// Packed hardware-style bitmap: one bit per element in flat order, 1 = π,
/// little-endian bit order within each byte.  Quantized configs only.
pub fn write_config_bits<T: Scalar>(config: &PhaseConfig<T>, path: &Path) -> Result<()> {
    if !config.is_quantized() {
        return Err(RisError::Domain(
            "bitmap export requires a quantized config".into(),
        ));
    }
    let n = config.len();
    let mut bytes = vec![0u8; n.div_ceil(8)];
    for (j, &p) in config.phases().iter().enumerate() {
        if p != T::zero() {
            bytes[j / 8] |= 1 << (j % 8);
        }
    }
    write_bytes(path, &bytes)
}

// ── sensing matrix CSV ──────────────────────────────────────────────────────

/// One row per probe configuration, entries ±1.
pub fn write_sensing_csv(w: &SensingMatrix, path: &Path) -> Result<()> {
    let mut out = String::new();
    for m in 0..w.rows() {
        let row: Vec<String> = w.row(m).iter().map(|e| e.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    write_bytes(path, out.as_bytes())
}

// ── iterative power trace ───────────────────────────────────────────────────

pub fn write_trace_csv<T: Scalar>(trace: &[T], path: &Path) -> Result<()> {
    let mut out = String::from("step,power_watts\n");
    for (i, p) in trace.iter().enumerate() {
        out.push_str(&format!("{},{p}\n", i + 1));
    }
    write_bytes(path, out.as_bytes())
}

pub fn read_trace_csv<T: Scalar>(path: &Path) -> Result<Vec<T>> {
    let text = read_text(path)?;
    let mut trace = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if idx == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 {
            return Err(RisError::Parse {
                line: idx + 1,
                message: format!("expected 2 fields, got {}", fields.len()),
            });
        }
        trace.push(parse_float::<T>(fields[1], idx + 1)?);
    }
    Ok(trace)
}
