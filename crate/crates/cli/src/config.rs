//! Effective run configuration: defaults, then command-line flags, then the
//! optional JSON config file, which overrides flags field by field. The
//! effective configuration (minus the worker count, which never affects
//! results) is echoed into every output file.

use serde::{Deserialize, Serialize};
use sphgof::alternatives::{AlternativeSpec, SegmentParams};
use sphgof::{Error, Result};

/// JSON override file. Unknown keys are rejected.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub workers: Option<usize>,
    pub lmax: Option<u32>,
    pub n_reps: Option<usize>,
    pub levels: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub spectrum: Option<String>,
    pub alternative: Option<AlternativeSpec>,
    pub grid_alpha: Option<usize>,
    pub grid_r: Option<usize>,
    pub limit: Option<bool>,
    pub input: Option<String>,
    pub calibration: Option<String>,
    pub out: Option<String>,
    pub field_out: Option<String>,
    pub png_list: Option<Vec<f64>>,
    pub quick: Option<bool>,
}

impl ConfigFile {
    pub fn load(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::invalid("config file", e.to_string()))
    }
}

/// Parse a comma-separated list of levels.
pub fn parse_levels(s: &str) -> Result<Vec<f64>> {
    let levels: Vec<f64> = s
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|e| Error::invalid("levels", format!("{tok:?}: {e}")))
        })
        .collect::<Result<_>>()?;
    for &l in &levels {
        if !(0.0 < l && l < 1.0) {
            return Err(Error::invalid("levels", format!("level {l} outside (0,1)")));
        }
    }
    Ok(levels)
}

/// Parse a comma-separated list of mixture weights.
pub fn parse_png_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|e| Error::invalid("png list", format!("{tok:?}: {e}")))
        })
        .collect()
}

/// Build an [`AlternativeSpec`] from flag values.
pub fn alternative_from_flags(
    kind: &str,
    png: f64,
    nu: f64,
    segments: SegmentParams,
) -> Result<AlternativeSpec> {
    let spec = match kind {
        "gaussian" => AlternativeSpec::Gaussian,
        "mixture" => AlternativeSpec::Mixture { png, segments },
        "segments" => AlternativeSpec::Segments { segments },
        "heavy-tail" => AlternativeSpec::HeavyTail { nu },
        other => {
            return Err(Error::invalid(
                "alternative",
                format!("unknown kind {other:?} (gaussian|mixture|segments|heavy-tail)"),
            ))
        }
    };
    spec.validate()?;
    Ok(spec)
}

/// The provenance record embedded in outputs. Field order is fixed so the
/// serialization is byte-stable; the worker count is deliberately absent.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance<'a> {
    pub command: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lmax: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_reps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<&'a [f64]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alternative: Option<&'a AlternativeSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibration: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub png_list: Option<&'a [f64]>,
}

impl Provenance<'_> {
    pub fn line(&self) -> String {
        format!(
            "sphgof v{} {}",
            env!("CARGO_PKG_VERSION"),
            serde_json::to_string(self).expect("provenance serializes")
        )
    }
}

impl<'a> Provenance<'a> {
    pub fn new(command: &'a str) -> Self {
        Provenance {
            command,
            lmax: None,
            n_reps: None,
            levels: None,
            seed: None,
            spectrum: None,
            alternative: None,
            grid: None,
            input: None,
            calibration: None,
            png_list: None,
        }
    }
}
