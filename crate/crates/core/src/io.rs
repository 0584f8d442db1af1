//! State files, config loading, report CSVs and graymaps.
//!
//! State file layout: 8 magic bytes `WIGSTAT1`, a little-endian `u32`
//! header length, a UTF-8 JSON header, then the row-major little-endian
//! `f64` payload (interleaved re/im for density matrices).

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::analysis::{NegativityReport, SqueezingReport};
use crate::error::{Result, SimError};
use crate::grid::{make_grid, GridSpec};
use crate::states::WignerState;
use crate::transforms::PositionDensityMatrix;

pub const MAGIC: [u8; 8] = *b"WIGSTAT1";
pub const CONVENTION: &str = "var_vac=1";

/// Norm defect above which a loaded state is flagged (but still returned).
const LOAD_NORM_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub enum StoredState {
    Wigner(WignerState),
    Density(PositionDensityMatrix),
}

impl StoredState {
    pub fn grid(&self) -> &GridSpec {
        match self {
            StoredState::Wigner(w) => w.grid(),
            StoredState::Density(r) => r.grid(),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            StoredState::Wigner(_) => "wigner",
            StoredState::Density(_) => "density",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateFile {
    pub provenance: String,
    pub state: StoredState,
}

impl StateFile {
    /// Wigner state with its metadata as provenance.
    pub fn wigner(state: WignerState) -> Self {
        StateFile {
            provenance: state.metadata.clone(),
            state: StoredState::Wigner(state),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct HeaderGrid {
    n_points: usize,
    half_extent: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    grid: HeaderGrid,
    kind: String,
    convention: String,
    provenance: String,
}

pub fn encode_state(file: &StateFile) -> Result<Vec<u8>> {
    let grid = file.state.grid();
    let header = Header {
        grid: HeaderGrid {
            n_points: grid.n_points(),
            half_extent: grid.half_extent(),
        },
        kind: file.state.kind().to_string(),
        convention: CONVENTION.to_string(),
        provenance: file.provenance.clone(),
    };
    let json = serde_json::to_vec(&header).map_err(SimError::Header)?;
    let mut out = Vec::with_capacity(12 + json.len() + grid.len() * 16);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    match &file.state {
        StoredState::Wigner(w) => w.values().iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes())),
        StoredState::Density(r) => r.values().iter().for_each(|c| {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }),
    }
    Ok(out)
}

/// Measured defects of a loaded state; reported, not fatal.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadReport {
    pub norm_defect: f64,
    pub hermiticity_defect: Option<f64>,
    pub warnings: Vec<String>,
}

pub fn decode_state(bytes: &[u8]) -> Result<(StateFile, LoadReport)> {
    if bytes.len() < 8 || bytes[..8] != MAGIC {
        let mut found = [0u8; 8];
        let k = bytes.len().min(8);
        found[..k].copy_from_slice(&bytes[..k]);
        return Err(SimError::BadMagic { found });
    }
    if bytes.len() < 12 {
        return Err(SimError::Truncated { expected: 12, actual: bytes.len() });
    }
    let header_len = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    if bytes.len() < 12 + header_len {
        return Err(SimError::Truncated {
            expected: 12 + header_len,
            actual: bytes.len(),
        });
    }
    let header: Header = serde_json::from_slice(&bytes[12..12 + header_len]).map_err(SimError::Header)?;
    if header.convention != CONVENTION {
        return Err(SimError::InvalidParameter(format!(
            "unsupported quadrature convention `{}`",
            header.convention
        )));
    }
    let grid = make_grid(header.grid.n_points, header.grid.half_extent)?;
    let width = match header.kind.as_str() {
        "wigner" => 8,
        "density" => 16,
        other => return Err(SimError::InvalidParameter(format!("unknown state kind `{other}`"))),
    };
    let expected = 12 + header_len + grid.len() * width;
    if bytes.len() != expected {
        return Err(SimError::Truncated {
            expected,
            actual: bytes.len(),
        });
    }
    let floats: Vec<f64> = bytes[12 + header_len..]
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
        .collect();
    let mut report = LoadReport::default();
    let state = if width == 8 {
        let w = WignerState::from_values(grid, floats)?.with_metadata(header.provenance.clone());
        report.norm_defect = (w.norm() - 1.0).abs();
        StoredState::Wigner(w)
    } else {
        let values = floats.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
        let r = PositionDensityMatrix::from_values(grid, values)?;
        report.norm_defect = (r.trace() - 1.0).norm();
        let defect = r.hermiticity_defect();
        if defect > 1e-10 {
            report.warnings.push(format!("hermiticity defect {defect:.3e}"));
        }
        report.hermiticity_defect = Some(defect);
        StoredState::Density(r)
    };
    if report.norm_defect > LOAD_NORM_TOLERANCE {
        report.warnings.push(format!("normalization defect {:.3e}", report.norm_defect));
    }
    for w in &report.warnings {
        log::warn!("loaded state: {w}");
    }
    Ok((
        StateFile {
            provenance: header.provenance,
            state,
        },
        report,
    ))
}

pub fn save_state(path: &Path, file: &StateFile) -> Result<()> {
    write_atomic(path, &encode_state(file)?)
}

pub fn load_state(path: &Path) -> Result<(StateFile, LoadReport)> {
    decode_state(&fs::read(path)?)
}

/// Writes to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| SimError::InvalidParameter(format!("`{}` is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

/// Parses a JSON config file into any of the config types.
pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(SimError::Config)
}

pub const REPORT_HEADER: &str = "# strobosim report v1";

/// One row of a report CSV.
#[derive(Debug, Clone)]
pub struct ReportRow {
    pub label: String,
    pub squeezing: SqueezingReport,
    pub negativity: NegativityReport,
    pub norm: f64,
}

pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut out = format!(
        "{REPORT_HEADER}\nlabel,lambda_star,sigma3_min,vacuum_threshold,beats_vacuum,beats_shot_noise,min_wigner,negativity_volume,norm\n"
    );
    for r in rows {
        out.push_str(&format!(
            "{},{:?},{:?},{:?},{},{},{:?},{:?},{:?}\n",
            csv_field(&r.label),
            r.squeezing.lambda_star,
            r.squeezing.sigma3_min,
            r.squeezing.vacuum_threshold_at_star,
            r.squeezing.beats_vacuum,
            r.squeezing.beats_shot_noise,
            r.negativity.min_value,
            r.negativity.negativity_volume,
            r.norm
        ));
    }
    out
}

/// `lambda,<label>...` table of sigma3 curves sharing one lambda axis.
pub fn curves_csv(labels: &[String], reports: &[&SqueezingReport]) -> String {
    let mut out = format!("# strobosim curves v1\nlambda,{}\n", labels.iter().map(|l| csv_field(l)).collect::<Vec<_>>().join(","));
    if let Some(first) = reports.first() {
        for (k, (lambda, _)) in first.lambda_samples.iter().enumerate() {
            out.push_str(&format!("{lambda:?}"));
            for r in reports {
                out.push(',');
                out.push_str(&format!("{:?}", r.lambda_samples[k].1));
            }
            out.push('\n');
        }
    }
    out
}

/// Replaces characters that would break a bare CSV field.
pub fn csv_field(s: &str) -> String {
    s.replace([',', '\n', '\r'], ";")
}

/// 16-bit binary graymap of `values` (row-major, `rows x cols`). Missing
/// cells map to 0; finite values map linearly onto `1..=65535`.
pub fn pgm16(rows: usize, cols: usize, values: &[Option<f64>]) -> Vec<u8> {
    let finite: Vec<f64> = values.iter().flatten().copied().filter(|v| v.is_finite()).collect();
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if finite.is_empty() { (0.0, 0.0) } else { (lo, hi) };
    let span = hi - lo;
    let mut out = format!(
        "P5\n# linear map: value = {lo} + ({span}) * (g - 1) / 65534; g = 0 marks a missing cell\n{cols} {rows}\n65535\n"
    )
    .into_bytes();
    for v in values {
        let g: u16 = match v {
            Some(v) if v.is_finite() => {
                let t = if span > 0.0 { (v - lo) / span } else { 0.0 };
                1 + (t * 65534.0).round() as u16
            }
            _ => 0,
        };
        out.extend_from_slice(&g.to_be_bytes());
    }
    out
}
