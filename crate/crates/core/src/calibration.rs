//! Monte Carlo calibration tables and their versioned plain-text format.
//!
//! A table stores the full sorted statistic sample, not just the extracted
//! quantiles, so p-values remain computable long after calibration; the
//! files stay small (a few tens of kilobytes for 2000 replications).

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What population a table calibrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CalibrationKind {
    /// Finite-degree null replications at `lmax`.
    Finite { lmax: u32 },
    /// Direct draws of the limiting field on an `n_alpha x n_r` grid.
    Limit { n_alpha: usize, n_r: usize },
}

/// Upper-quantile thresholds with full provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTable {
    kind: CalibrationKind,
    levels: Vec<f64>,
    thresholds: Vec<f64>,
    n_reps: usize,
    seed: u64,
    /// Sorted ascending.
    samples: Vec<f64>,
    warnings: Vec<String>,
    code_version: String,
}

impl CalibrationTable {
    /// Build a table from an already-sorted statistic sample. Thresholds are
    /// the order statistics at `ceil(n (1 - level))`.
    pub fn from_sorted_samples(
        kind: CalibrationKind,
        levels: Vec<f64>,
        samples: Vec<f64>,
        n_reps: usize,
        seed: u64,
    ) -> Result<Self> {
        if samples.len() != n_reps || samples.is_empty() {
            return Err(Error::invalid("calibration", "sample count mismatch"));
        }
        if samples.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("calibration", "samples must be sorted"));
        }
        if levels.is_empty() {
            return Err(Error::invalid("levels", "need at least one level"));
        }
        let mut warnings = Vec::new();
        if n_reps < 100 {
            warnings.push(format!(
                "n_reps = {n_reps} is below the recommended minimum of 100"
            ));
        }
        let n = samples.len();
        let mut thresholds = Vec::with_capacity(levels.len());
        for &level in &levels {
            if !(0.0 < level && level < 1.0) {
                return Err(Error::invalid(
                    "levels",
                    format!("level {level} outside (0,1)"),
                ));
            }
            if level < 1.0 / (n as f64 + 1.0) {
                warnings.push(format!(
                    "quantile outside resolvable range: level {level} needs more than \
                     {n} replications"
                ));
            }
            let idx = ((n as f64) * (1.0 - level)).ceil() as usize;
            thresholds.push(samples[idx.clamp(1, n) - 1]);
        }
        Ok(Self {
            kind,
            levels,
            thresholds,
            n_reps,
            seed,
            samples,
            warnings,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
        })
    }

    pub fn kind(&self) -> CalibrationKind {
        self.kind
    }

    pub fn kind_label(&self) -> String {
        match self.kind {
            CalibrationKind::Finite { lmax } => format!("finite lmax={lmax}"),
            CalibrationKind::Limit { n_alpha, n_r } => format!("limit grid={n_alpha}x{n_r}"),
        }
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// Threshold for one level, if present in the table.
    pub fn threshold(&self, level: f64) -> Option<f64> {
        self.levels
            .iter()
            .position(|&l| l == level)
            .map(|i| self.thresholds[i])
    }

    pub fn n_reps(&self) -> usize {
        self.n_reps
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Monte Carlo p-value with the add-one smoothing `(1 + r) / (1 + n)`,
    /// never zero.
    pub fn p_value(&self, observed: f64) -> f64 {
        let below = self.samples.partition_point(|&s| s < observed);
        let ge = self.samples.len() - below;
        (1.0 + ge as f64) / (1.0 + self.samples.len() as f64)
    }

    /// Serialize as the versioned key-value text format.
    pub fn write_text<W: Write>(&self, w: &mut W) -> Result<()> {
        let mut out = String::new();
        out.push_str("sphgof-calibration v1\n");
        match self.kind {
            CalibrationKind::Finite { lmax } => {
                out.push_str("kind=finite\n");
                let _ = writeln!(out, "lmax={lmax}");
            }
            CalibrationKind::Limit { n_alpha, n_r } => {
                out.push_str("kind=limit\n");
                let _ = writeln!(out, "grid_alpha={n_alpha}");
                let _ = writeln!(out, "grid_r={n_r}");
            }
        }
        let _ = writeln!(out, "levels={}", join_floats(&self.levels));
        let _ = writeln!(out, "thresholds={}", join_floats(&self.thresholds));
        let _ = writeln!(out, "n_reps={}", self.n_reps);
        let _ = writeln!(out, "seed={}", self.seed);
        let _ = writeln!(out, "code_version={}", self.code_version);
        for warning in &self.warnings {
            let _ = writeln!(out, "warning={warning}");
        }
        let _ = writeln!(out, "samples={}", join_floats(&self.samples));
        w.write_all(out.as_bytes())?;
        Ok(())
    }

    /// Parse the text format produced by [`CalibrationTable::write_text`].
    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .transpose()?
            .ok_or_else(|| Error::invalid("calibration file", "empty file"))?;
        if header.trim() != "sphgof-calibration v1" {
            return Err(Error::invalid(
                "calibration file",
                format!("unrecognized header {header:?}"),
            ));
        }
        let mut kind_str = None;
        let mut lmax = None;
        let mut grid_alpha = None;
        let mut grid_r = None;
        let mut levels = None;
        let mut thresholds = None;
        let mut n_reps = None;
        let mut seed = None;
        let mut code_version = None;
        let mut warnings = Vec::new();
        let mut samples = None;
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::invalid("calibration file", format!("bad line {line:?}")))?;
            match key {
                "kind" => kind_str = Some(value.to_string()),
                "lmax" => lmax = Some(parse_num::<u32>("lmax", value)?),
                "grid_alpha" => grid_alpha = Some(parse_num::<usize>("grid_alpha", value)?),
                "grid_r" => grid_r = Some(parse_num::<usize>("grid_r", value)?),
                "levels" => levels = Some(parse_floats("levels", value)?),
                "thresholds" => thresholds = Some(parse_floats("thresholds", value)?),
                "n_reps" => n_reps = Some(parse_num::<usize>("n_reps", value)?),
                "seed" => seed = Some(parse_num::<u64>("seed", value)?),
                "code_version" => code_version = Some(value.to_string()),
                "warning" => warnings.push(value.to_string()),
                "samples" => samples = Some(parse_floats("samples", value)?),
                other => {
                    return Err(Error::invalid(
                        "calibration file",
                        format!("unknown key {other:?}"),
                    ))
                }
            }
        }
        let kind = match kind_str.as_deref() {
            Some("finite") => CalibrationKind::Finite {
                lmax: lmax.ok_or_else(|| Error::invalid("calibration file", "missing lmax"))?,
            },
            Some("limit") => CalibrationKind::Limit {
                n_alpha: grid_alpha
                    .ok_or_else(|| Error::invalid("calibration file", "missing grid_alpha"))?,
                n_r: grid_r.ok_or_else(|| Error::invalid("calibration file", "missing grid_r"))?,
            },
            other => {
                return Err(Error::invalid(
                    "calibration file",
                    format!("missing or unknown kind {other:?}"),
                ))
            }
        };
        let missing = |what: &str| Error::invalid("calibration file", format!("missing {what}"));
        let table = Self {
            kind,
            levels: levels.ok_or_else(|| missing("levels"))?,
            thresholds: thresholds.ok_or_else(|| missing("thresholds"))?,
            n_reps: n_reps.ok_or_else(|| missing("n_reps"))?,
            seed: seed.ok_or_else(|| missing("seed"))?,
            samples: samples.ok_or_else(|| missing("samples"))?,
            warnings,
            code_version: code_version.ok_or_else(|| missing("code_version"))?,
        };
        if table.samples.len() != table.n_reps {
            return Err(Error::invalid("calibration file", "sample count mismatch"));
        }
        if table.levels.len() != table.thresholds.len() {
            return Err(Error::invalid(
                "calibration file",
                "levels/thresholds mismatch",
            ));
        }
        Ok(table)
    }
}

fn join_floats(vs: &[f64]) -> String {
    let mut s = String::new();
    for (i, v) in vs.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{v}");
    }
    s
}

fn parse_floats(what: &str, s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|e| Error::invalid(what, format!("{tok:?}: {e}")))
        })
        .collect()
}

fn parse_num<T: std::str::FromStr>(what: &str, s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.trim()
        .parse::<T>()
        .map_err(|e| Error::invalid(what, format!("{s:?}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> CalibrationTable {
        let samples: Vec<f64> = (1..=200).map(|i| i as f64 / 100.0).collect();
        CalibrationTable::from_sorted_samples(
            CalibrationKind::Finite { lmax: 50 },
            vec![0.10, 0.05, 0.01],
            samples,
            200,
            99,
        )
        .unwrap()
    }

    #[test]
    fn thresholds_are_upper_order_statistics() {
        let t = table();
        // ceil(200 * 0.90) = 180 -> 1.80, etc.
        assert_eq!(t.thresholds(), &[1.80, 1.90, 1.98]);
        assert!(t.threshold(0.05).unwrap() == 1.90);
        assert!(t.threshold(0.20).is_none());
    }

    #[test]
    fn p_value_smoothing() {
        let t = table();
        assert!((t.p_value(5.0) - 1.0 / 201.0).abs() < 1e-15);
        assert!((t.p_value(0.0) - 1.0).abs() < 1e-15);
        // observed equal to a sample counts as >=
        assert!((t.p_value(2.0) - 2.0 / 201.0).abs() < 1e-15);
    }

    #[test]
    fn unresolvable_level_is_flagged() {
        let samples: Vec<f64> = (1..=10).map(f64::from).collect();
        let t = CalibrationTable::from_sorted_samples(
            CalibrationKind::Finite { lmax: 5 },
            vec![0.01],
            samples,
            10,
            1,
        )
        .unwrap();
        assert!(t
            .warnings()
            .iter()
            .any(|w| w.contains("outside resolvable range")));
    }

    #[test]
    fn text_roundtrip_is_exact() {
        let t = table();
        let mut buf = Vec::new();
        t.write_text(&mut buf).unwrap();
        let back = CalibrationTable::read_text(&buf[..]).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = "sphgof-calibration v1\nkind=finite\nlmax=3\nbogus=1\n";
        assert!(CalibrationTable::read_text(text.as_bytes()).is_err());
    }
}
