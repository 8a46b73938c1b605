//! File formats: coefficient and spectrum CSV, process-field CSV, power
//! tables, and JSON reports.
//!
//! Floats are written with Rust's shortest-roundtrip formatting, so files
//! are byte-identical across runs and parse back to the exact values.
//! Lines starting with `#` are provenance comments and are skipped by every
//! reader here.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::empirical::ProcessField;
use crate::error::{Error, Result};
use crate::harmonics::{AngularPowerSpectrum, HarmonicCoefficients};
use crate::testing::PowerTable;

fn content_lines<R: BufRead>(r: R) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        out.push(line);
    }
    Ok(out)
}

/// Write coefficients as `l,m,re,im`, one row per stored entry.
pub fn write_coefficients_csv<W: Write>(
    w: &mut W,
    coeffs: &HarmonicCoefficients,
    provenance: Option<&str>,
) -> Result<()> {
    let mut out = String::new();
    if let Some(p) = provenance {
        let _ = writeln!(out, "# {p}");
    }
    out.push_str("l,m,re,im\n");
    for l in 1..=coeffs.lmax() {
        for (m, a) in coeffs.row(l).iter().enumerate() {
            let _ = writeln!(out, "{l},{m},{},{}", a.re, a.im);
        }
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}

/// Read a coefficient CSV, rejecting duplicates, gaps, out-of-range orders,
/// and reality violations at `m = 0`.
pub fn read_coefficients_csv<R: BufRead>(r: R) -> Result<HarmonicCoefficients> {
    let lines = content_lines(r)?;
    let mut it = lines.iter();
    match it.next().map(String::as_str) {
        Some("l,m,re,im") => {}
        other => {
            return Err(Error::invalid(
                "coefficient csv",
                format!("missing header, found {other:?}"),
            ))
        }
    }
    let mut entries: Vec<(u32, u32, Complex64)> = Vec::new();
    let mut lmax = 0u32;
    for line in it {
        let mut parts = line.split(',');
        let mut field = |name: &str| {
            parts
                .next()
                .ok_or_else(|| Error::invalid("coefficient csv", format!("missing {name}")))
        };
        let l: u32 = parse(field("l")?, "l")?;
        let m: u32 = parse(field("m")?, "m")?;
        let re: f64 = parse(field("re")?, "re")?;
        let im: f64 = parse(field("im")?, "im")?;
        if l == 0 {
            return Err(Error::invalid(
                "coefficient csv",
                "degree l = 0 is not modeled",
            ));
        }
        if m > l {
            return Err(Error::invalid(
                "coefficient csv",
                format!("order m = {m} exceeds degree l = {l}"),
            ));
        }
        if m == 0 && im != 0.0 {
            return Err(Error::invalid(
                "coefficient csv",
                format!("a_(l=={l},m==0) must be real, got im = {im}"),
            ));
        }
        lmax = lmax.max(l);
        entries.push((l, m, Complex64::new(re, im)));
    }
    if lmax == 0 {
        return Err(Error::invalid("coefficient csv", "no coefficient rows"));
    }
    let mut rows: Vec<Vec<Option<Complex64>>> =
        (1..=lmax).map(|l| vec![None; l as usize + 1]).collect();
    for (l, m, a) in entries {
        let slot = &mut rows[l as usize - 1][m as usize];
        if slot.is_some() {
            return Err(Error::invalid(
                "coefficient csv",
                format!("duplicate entry for (l, m) = ({l}, {m})"),
            ));
        }
        *slot = Some(a);
    }
    let mut full = Vec::with_capacity(lmax as usize);
    for (i, row) in rows.into_iter().enumerate() {
        let l = i + 1;
        let mut out = Vec::with_capacity(l + 1);
        for (m, slot) in row.into_iter().enumerate() {
            out.push(slot.ok_or_else(|| {
                Error::invalid(
                    "coefficient csv",
                    format!("missing entry (l, m) = ({l}, {m})"),
                )
            })?);
        }
        full.push(out);
    }
    HarmonicCoefficients::new(full)
}

/// Write a spectrum as `l,C`.
pub fn write_spectrum_csv<W: Write>(
    w: &mut W,
    spectrum: &AngularPowerSpectrum,
    provenance: Option<&str>,
) -> Result<()> {
    let mut out = String::new();
    if let Some(p) = provenance {
        let _ = writeln!(out, "# {p}");
    }
    out.push_str("l,C\n");
    for l in 1..=spectrum.lmax() {
        let _ = writeln!(out, "{l},{}", spectrum.value(l));
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}

/// Read a spectrum CSV: complete degrees `1..=L`, positive values.
pub fn read_spectrum_csv<R: BufRead>(r: R) -> Result<AngularPowerSpectrum> {
    let lines = content_lines(r)?;
    let mut it = lines.iter();
    match it.next().map(String::as_str) {
        Some("l,C") => {}
        other => {
            return Err(Error::invalid(
                "spectrum csv",
                format!("missing header, found {other:?}"),
            ))
        }
    }
    let mut entries: Vec<(u32, f64)> = Vec::new();
    for line in it {
        let (ls, cs) = line
            .split_once(',')
            .ok_or_else(|| Error::invalid("spectrum csv", format!("bad line {line:?}")))?;
        entries.push((parse(ls, "l")?, parse(cs, "C")?));
    }
    entries.sort_unstable_by_key(|e| e.0);
    let mut values = Vec::with_capacity(entries.len());
    for (i, (l, c)) in entries.iter().enumerate() {
        if *l != i as u32 + 1 {
            return Err(Error::invalid(
                "spectrum csv",
                format!("degrees must cover 1..=L exactly; problem near l = {l}"),
            ));
        }
        values.push(*c);
    }
    AngularPowerSpectrum::new(values)
}

/// Write a process field as `r,alpha,value`, row-major over the grid.
pub fn write_field_csv<W: Write>(
    w: &mut W,
    field: &ProcessField,
    provenance: Option<&str>,
) -> Result<()> {
    let mut out = String::new();
    if let Some(p) = provenance {
        let _ = writeln!(out, "# {p}");
    }
    out.push_str("r,alpha,value\n");
    let grid = field.grid();
    for (ir, &r) in grid.rs().iter().enumerate() {
        for (ia, &alpha) in grid.alphas().iter().enumerate() {
            let _ = writeln!(out, "{r},{alpha},{}", field.value(ia, ir));
        }
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}

/// Write a power table as `png,level,rejection_rate`.
pub fn write_power_csv<W: Write>(
    w: &mut W,
    table: &PowerTable,
    provenance: Option<&str>,
) -> Result<()> {
    let mut out = String::new();
    if let Some(p) = provenance {
        let _ = writeln!(out, "# {p}");
    }
    out.push_str("png,level,rejection_rate\n");
    for (i, &png) in table.png_values.iter().enumerate() {
        for (j, &level) in table.levels.iter().enumerate() {
            let _ = writeln!(out, "{png},{level},{}", table.rates[i][j]);
        }
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}

fn parse<T: std::str::FromStr>(s: &str, what: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.trim()
        .parse::<T>()
        .map_err(|e| Error::invalid(what, format!("{s:?}: {e}")))
}
