use std::fs::File;
use std::io::{BufReader, BufWriter, Write};

use serde_json::json;

use sphgof::alternatives::{generate_alternative, AlternativeSpec};
use sphgof::empirical::{corrected_process, spacings_transform, ProcessGrid};
use sphgof::harmonics::simulate_gaussian_coeffs_seeded;
use sphgof::io as fio;
use sphgof::testing;
use sphgof::{AngularPowerSpectrum, CalibrationTable, Error, Result};

use crate::config::{alternative_from_flags, parse_levels, parse_png_list, ConfigFile, Provenance};
use crate::{CalibrateArgs, LimitCalibrateArgs, PowerArgs, SimulateArgs, TestArgs, VerifyArgs};

pub fn simulate(args: SimulateArgs, over: &ConfigFile) -> Result<()> {
    let lmax = over.lmax.unwrap_or(args.lmax);
    let seed = over.seed.unwrap_or(args.seed);
    let spectrum_src = over.spectrum.clone().unwrap_or(args.spectrum);
    if lmax == 0 {
        return Err(Error::invalid("lmax", "must be at least 1"));
    }
    let spec = match &over.alternative {
        Some(s) => {
            s.validate()?;
            *s
        }
        None => alternative_from_flags(&args.alt.alternative, args.alt.png, args.alt.nu, {
            args.alt.segments()
        })?,
    };
    let out_path = over.out.clone().unwrap_or(args.out);

    let coeffs = if matches!(spec, AlternativeSpec::Gaussian) {
        // the null honors a user-supplied spectrum; alternatives are defined
        // against the flat one (the test is spectrum-free either way)
        let spectrum = load_spectrum(&spectrum_src, lmax)?;
        simulate_gaussian_coeffs_seeded(&spectrum, seed)
    } else {
        if spectrum_src != "flat" {
            return Err(Error::invalid(
                "spectrum",
                "alternatives are generated against the flat spectrum",
            ));
        }
        generate_alternative(&spec, lmax, seed)?
    };

    let mut prov = Provenance::new("simulate");
    prov.lmax = Some(lmax);
    prov.seed = Some(seed);
    prov.spectrum = Some(&spectrum_src);
    prov.alternative = Some(&spec);
    let mut w = BufWriter::new(File::create(&out_path)?);
    fio::write_coefficients_csv(&mut w, &coeffs, Some(&prov.line()))?;
    println!("wrote {} coefficients rows to {}", coeffs.lmax(), out_path);
    Ok(())
}

fn load_spectrum(src: &str, lmax: u32) -> Result<AngularPowerSpectrum> {
    if src == "flat" {
        return Ok(AngularPowerSpectrum::flat(lmax));
    }
    let spectrum = fio::read_spectrum_csv(BufReader::new(File::open(src)?))?;
    if spectrum.lmax() != lmax {
        return Err(Error::invalid(
            "spectrum",
            format!("file has lmax {}, requested {}", spectrum.lmax(), lmax),
        ));
    }
    Ok(spectrum)
}

pub fn calibrate(args: CalibrateArgs, over: &ConfigFile) -> Result<()> {
    if over.limit.unwrap_or(args.limit) {
        return limit_calibrate(
            LimitCalibrateArgs {
                reps: args.reps,
                levels: args.levels,
                seed: args.seed,
                grid_alpha: args.grid_alpha,
                grid_r: args.grid_r,
                out: args.out,
            },
            over,
        );
    }
    let lmax = over.lmax.unwrap_or(args.lmax);
    let reps = over.n_reps.unwrap_or(args.reps);
    let levels = match &over.levels {
        Some(ls) => ls.clone(),
        None => parse_levels(&args.levels)?,
    };
    let seed = over.seed.unwrap_or(args.seed);
    let out_path = over.out.clone().unwrap_or(args.out);

    let table = testing::calibrate_null(lmax, reps, &levels, seed)?;
    write_calibration(&table, &out_path)?;
    print_calibration("finite-L calibration", &table);
    Ok(())
}

pub fn limit_calibrate(args: LimitCalibrateArgs, over: &ConfigFile) -> Result<()> {
    let reps = over.n_reps.unwrap_or(args.reps);
    let levels = match &over.levels {
        Some(ls) => ls.clone(),
        None => parse_levels(&args.levels)?,
    };
    let seed = over.seed.unwrap_or(args.seed);
    let n_alpha = over.grid_alpha.unwrap_or(args.grid_alpha);
    let n_r = over.grid_r.unwrap_or(args.grid_r);
    let out_path = over.out.clone().unwrap_or(args.out);

    let grid = ProcessGrid::regular(n_alpha, n_r)?;
    let table = sphgof::limitproc::limit_quantiles(&grid, reps, &levels, seed)?;
    write_calibration(&table, &out_path)?;
    print_calibration("limit-law calibration", &table);
    Ok(())
}

fn write_calibration(table: &CalibrationTable, path: &str) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    table.write_text(&mut w)?;
    Ok(())
}

fn print_calibration(label: &str, table: &CalibrationTable) {
    println!("{label} ({})", table.kind_label());
    println!("  n_reps = {}, seed = {}", table.n_reps(), table.seed());
    for (l, t) in table.levels().iter().zip(table.thresholds()) {
        println!("  level {:>6}  threshold {:.6}", format!("{l}"), t);
    }
    for warning in table.warnings() {
        println!("  warning: {warning}");
    }
}

pub fn test(args: TestArgs, over: &ConfigFile) -> Result<()> {
    let input = over.input.clone().unwrap_or(args.input);
    let cal_path = over.calibration.clone().unwrap_or(args.calibration);
    let out = over.out.clone().or(args.out);
    let field_out = over.field_out.clone().or(args.field_out);

    let coeffs = fio::read_coefficients_csv(BufReader::new(File::open(&input)?))?;
    let table = CalibrationTable::read_text(BufReader::new(File::open(&cal_path)?))?;
    let report = testing::gaussianity_test(&coeffs, &table)?;

    println!(
        "statistic {:>10}  value {:.6}",
        report.statistic_name, report.value
    );
    println!(
        "lmax      {:>10}  p-value {:.6}",
        report.lmax, report.p_value
    );
    println!("calibration: {}", report.calibration_kind);
    println!("{:>8} {:>12} {:>8}", "level", "threshold", "reject");
    for ((l, t), r) in report
        .levels
        .iter()
        .zip(&report.thresholds)
        .zip(&report.reject)
    {
        println!("{l:>8} {t:>12.6} {:>8}", if *r { "yes" } else { "no" });
    }

    if let Some(path) = out {
        let mut prov = Provenance::new("test");
        prov.input = Some(&input);
        prov.calibration = Some(&cal_path);
        let doc = json!({
            "config": serde_json::to_value(&prov).expect("provenance"),
            "report": report,
        });
        let mut w = BufWriter::new(File::create(&path)?);
        serde_json::to_writer_pretty(&mut w, &doc)
            .map_err(|e| Error::invalid("report json", e.to_string()))?;
        w.write_all(b"\n")?;
    }
    if let Some(path) = field_out {
        let (_, y) = spacings_transform(&coeffs)?;
        let grid = ProcessGrid::regular(args.field_alphas, args.field_rs)?;
        let field = corrected_process(&y, &grid);
        let mut prov = Provenance::new("test");
        prov.input = Some(&input);
        prov.grid = Some((args.field_alphas, args.field_rs));
        let mut w = BufWriter::new(File::create(&path)?);
        fio::write_field_csv(&mut w, &field, Some(&prov.line()))?;
    }
    Ok(())
}

pub fn power(args: PowerArgs, over: &ConfigFile) -> Result<()> {
    let lmax = over.lmax.unwrap_or(args.lmax);
    let reps = over.n_reps.unwrap_or(args.reps);
    let seed = over.seed.unwrap_or(args.seed);
    let cal_path = over.calibration.clone().unwrap_or(args.calibration);
    let out_path = over.out.clone().unwrap_or(args.out);
    let png_values = match &over.png_list {
        Some(p) => p.clone(),
        None => parse_png_list(&args.png_list)?,
    };
    let spec = match &over.alternative {
        Some(s) => {
            s.validate()?;
            *s
        }
        None => {
            let kind = if args.alt.alternative == "gaussian" {
                // the sweep needs a mixture; default the kind accordingly
                "mixture"
            } else {
                &args.alt.alternative
            };
            alternative_from_flags(kind, args.alt.png, args.alt.nu, args.alt.segments())?
        }
    };
    let table = CalibrationTable::read_text(BufReader::new(File::open(&cal_path)?))?;
    let power = testing::power_study(&spec, &png_values, lmax, reps, &table, seed)?;

    println!("power study at lmax = {lmax}, {reps} replications per point");
    print!("{:>8}", "png");
    for l in &power.levels {
        print!("{:>10}", format!("{l}"));
    }
    println!();
    for (i, &png) in power.png_values.iter().enumerate() {
        print!("{png:>8}");
        for rate in &power.rates[i] {
            print!("{rate:>10.3}");
        }
        println!();
    }

    let mut prov = Provenance::new("power");
    prov.lmax = Some(lmax);
    prov.n_reps = Some(reps);
    prov.seed = Some(seed);
    prov.alternative = Some(&spec);
    prov.calibration = Some(&cal_path);
    prov.png_list = Some(&png_values);
    let mut w = BufWriter::new(File::create(&out_path)?);
    fio::write_power_csv(&mut w, &power, Some(&prov.line()))?;
    Ok(())
}

pub fn verify(args: VerifyArgs, over: &ConfigFile) -> Result<()> {
    let quick = over.quick.unwrap_or(args.quick);
    let seed = over.seed.unwrap_or(args.seed);
    let results = sphgof::oracles::run_suite(quick, seed);
    let mut all_ok = true;
    for r in &results {
        println!(
            "{:>4}  {:<36} {}",
            if r.passed { "ok" } else { "FAIL" },
            r.name,
            r.detail
        );
        all_ok &= r.passed;
    }
    if all_ok {
        println!("all {} checks passed", results.len());
        Ok(())
    } else {
        Err(Error::invalid("verify", "one or more oracle checks failed"))
    }
}
