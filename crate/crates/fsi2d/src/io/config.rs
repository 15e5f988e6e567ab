//! Plain-text configuration files.
//!
//! Sectioned `key = value` documents. Parsing is total: the whole file is
//! read, every error is collected, and either a fully validated
//! configuration or the complete error list comes back. Unknown sections
//! and keys are rejected.
//!
//! ```text
//! [geometry]
//! nz = 8
//! nr_fluid = 8
//! [time]
//! t_final = 0.5
//! steps = 100
//! [pressure]
//! inlet = cosine 2.0 0.25
//! ```

use crate::ale::ValidityMonitor;
use crate::driver::RunConfig;
use crate::error::{Error, Result};
use crate::fluid::PressureData;
use sha2::{Digest, Sha256};

/// What the snapshot writer should emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotFormat {
    Csv,
    VtkLegacyAscii,
    Both,
}

/// Output options that do not affect the simulation itself.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputOptions {
    pub format: SnapshotFormat,
    /// Emit per-snapshot field files (the ledger is always written).
    pub write_fields: bool,
}

impl Default for OutputOptions {
    fn default() -> Self {
        OutputOptions {
            format: SnapshotFormat::Csv,
            write_fields: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConfig {
    pub run: RunConfig,
    pub output: OutputOptions,
}

struct Raw {
    section: String,
    key: String,
    value: String,
    line: usize,
}

fn parse_f64(raw: &Raw, errs: &mut Vec<String>) -> Option<f64> {
    match raw.value.parse::<f64>() {
        Ok(v) if v.is_finite() => Some(v),
        _ => {
            errs.push(format!(
                "line {}: {}.{} expects a finite number, got {:?}",
                raw.line, raw.section, raw.key, raw.value
            ));
            None
        }
    }
}

fn parse_usize(raw: &Raw, errs: &mut Vec<String>) -> Option<usize> {
    match raw.value.parse::<usize>() {
        Ok(v) => Some(v),
        _ => {
            errs.push(format!(
                "line {}: {}.{} expects a nonnegative integer, got {:?}",
                raw.line, raw.section, raw.key, raw.value
            ));
            None
        }
    }
}

fn parse_pressure(raw: &Raw, errs: &mut Vec<String>) -> Option<PressureData> {
    let mut parts = raw.value.split_whitespace();
    let kind = parts.next().unwrap_or("");
    let bad = |errs: &mut Vec<String>, msg: &str| {
        errs.push(format!(
            "line {}: {}.{}: {msg} (got {:?})",
            raw.line, raw.section, raw.key, raw.value
        ));
        None
    };
    match kind {
        "constant" => {
            let v: f64 = match parts.next().map(str::parse) {
                Some(Ok(v)) => v,
                _ => return bad(errs, "expected `constant <value>`"),
            };
            Some(PressureData::Constant(v))
        }
        "cosine" => {
            let amp: f64 = match parts.next().map(str::parse) {
                Some(Ok(v)) => v,
                _ => return bad(errs, "expected `cosine <amplitude> <duration>`"),
            };
            let dur: f64 = match parts.next().map(str::parse) {
                Some(Ok(v)) => v,
                _ => return bad(errs, "expected `cosine <amplitude> <duration>`"),
            };
            Some(PressureData::CosinePulse {
                amplitude: amp,
                duration: dur,
            })
        }
        "table" => {
            let rest: String = parts.collect::<Vec<_>>().join("");
            let mut samples = Vec::new();
            for item in rest.split(',').filter(|s| !s.is_empty()) {
                let Some((t, v)) = item.split_once(':') else {
                    return bad(errs, "table entries look like t:value, comma separated");
                };
                match (t.parse::<f64>(), v.parse::<f64>()) {
                    (Ok(t), Ok(v)) => samples.push((t, v)),
                    _ => return bad(errs, "table entries look like t:value, comma separated"),
                }
            }
            Some(PressureData::Table(samples))
        }
        _ => bad(errs, "expected constant, cosine or table"),
    }
}

/// Parses and validates a configuration document. Every problem in the file
/// is reported, not just the first.
pub fn parse_config(text: &str) -> Result<ParsedConfig> {
    let mut errs: Vec<String> = Vec::new();
    let mut raws: Vec<Raw> = Vec::new();
    let mut section = String::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(name) = trimmed.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = name.trim().to_string();
            const SECTIONS: [&str; 7] = [
                "geometry", "physics", "time", "pressure", "initial", "output", "guards",
            ];
            if !SECTIONS.contains(&section.as_str()) {
                errs.push(format!("line {line_no}: unknown section [{section}]"));
            }
            continue;
        }
        let Some((key, value)) = trimmed.split_once('=') else {
            errs.push(format!("line {line_no}: expected `key = value`, got {trimmed:?}"));
            continue;
        };
        if section.is_empty() {
            errs.push(format!(
                "line {line_no}: key {:?} appears before any section header",
                key.trim()
            ));
            continue;
        }
        raws.push(Raw {
            section: section.clone(),
            key: key.trim().to_string(),
            value: value.trim().to_string(),
            line: line_no,
        });
    }

    let mut run = RunConfig::default();
    let mut output = OutputOptions::default();
    let mut t_final: Option<f64> = None;
    let mut steps: Option<usize> = None;
    let mut dt: Option<f64> = None;
    let mut r_min: Option<f64> = None;
    let mut r_max: Option<f64> = None;

    for raw in &raws {
        match (raw.section.as_str(), raw.key.as_str()) {
            ("geometry", "length") => {
                if let Some(v) = parse_f64(raw, &mut errs) {
                    run.geometry.length = v;
                }
            }
            ("geometry", "radius") => {
                if let Some(v) = parse_f64(raw, &mut errs) {
                    run.geometry.radius = v;
                }
            }
            ("geometry", "thickness") => {
                if let Some(v) = parse_f64(raw, &mut errs) {
                    run.geometry.thickness = v;
                }
            }
            ("geometry", "nz") => {
                if let Some(v) = parse_usize(raw, &mut errs) {
                    run.geometry.nz = v;
                }
            }
            ("geometry", "nr_fluid") => {
                if let Some(v) = parse_usize(raw, &mut errs) {
                    run.geometry.nr_fluid = v;
                }
            }
            ("geometry", "nr_solid") => {
                if let Some(v) = parse_usize(raw, &mut errs) {
                    run.geometry.nr_solid = v;
                }
            }
            ("physics", "rho_f") => {
                if let Some(v) = parse_f64(raw, &mut errs) {
                    run.weights.rho_f = v;
                }
            }
            ("physics", "mu") => {
                if let Some(v) = parse_f64(raw, &mut errs) {
                    run.weights.mu = v;
                }
            }
            ("physics", "rho_s1_h") => {
                if let Some(v) = parse_f64(raw, &mut errs) {
                    run.weights.rho_s1_h = v;
                }
            }
            ("physics", "c2") => {
                if let Some(v) = parse_f64(raw, &mut errs) {
                    run.weights.c2 = v;
                }
            }
            ("physics", "thin_c0") => {
                if let Some(v) = parse_f64(raw, &mut errs) {
                    run.weights.thin_c0 = v;
                }
            }
            ("physics", "thin_c2") => {
                if let Some(v) = parse_f64(raw, &mut errs) {
                    run.weights.thin_c2 = v;
                }
            }
            ("physics", "thin_d0") => {
                if let Some(v) = parse_f64(raw, &mut errs) {
                    run.weights.thin_d0 = v;
                }
            }
            ("physics", "thin_d1") => {
                if let Some(v) = parse_f64(raw, &mut errs) {
                    run.weights.thin_d1 = v;
                }
            }
            ("physics", "thin_d2") => {
                if let Some(v) = parse_f64(raw, &mut errs) {
                    run.weights.thin_d2 = v;
                }
            }
            ("physics", "lambda") => {
                if let Some(v) = parse_f64(raw, &mut errs) {
                    run.weights.lambda = v;
                }
            }
            ("physics", "mu_s") => {
                if let Some(v) = parse_f64(raw, &mut errs) {
                    run.weights.mu_s = v;
                }
            }
            ("physics", "rho_s2") => {
                if let Some(v) = parse_f64(raw, &mut errs) {
                    run.weights.rho_s2 = v;
                }
            }
            ("time", "t_final") => t_final = parse_f64(raw, &mut errs),
            ("time", "steps") => steps = parse_usize(raw, &mut errs),
            ("time", "dt") => dt = parse_f64(raw, &mut errs),
            ("pressure", "inlet") => {
                if let Some(p) = parse_pressure(raw, &mut errs) {
                    run.pressure_in = p;
                }
            }
            ("pressure", "outlet") => {
                if let Some(p) = parse_pressure(raw, &mut errs) {
                    run.pressure_out = p;
                }
            }
            ("initial", "eta_amplitude") => {
                if let Some(v) = parse_f64(raw, &mut errs) {
                    run.initial.eta_amplitude = v;
                }
            }
            ("initial", "eta_mode") => {
                if let Some(v) = parse_usize(raw, &mut errs) {
                    run.initial.eta_mode = v as u32;
                }
            }
            ("initial", "v_amplitude") => {
                if let Some(v) = parse_f64(raw, &mut errs) {
                    run.initial.v_amplitude = v;
                }
            }
            ("initial", "v_mode") => {
                if let Some(v) = parse_usize(raw, &mut errs) {
                    run.initial.v_mode = v as u32;
                }
            }
            ("output", "cadence") => {
                if let Some(v) = parse_usize(raw, &mut errs) {
                    run.snapshot_every = v;
                }
            }
            ("output", "format") => match raw.value.as_str() {
                "csv" => output.format = SnapshotFormat::Csv,
                "vtk" => output.format = SnapshotFormat::VtkLegacyAscii,
                "both" => output.format = SnapshotFormat::Both,
                other => errs.push(format!(
                    "line {}: output.format expects csv, vtk or both, got {other:?}",
                    raw.line
                )),
            },
            ("output", "fields") => match raw.value.as_str() {
                "true" => output.write_fields = true,
                "false" => output.write_fields = false,
                other => errs.push(format!(
                    "line {}: output.fields expects true or false, got {other:?}",
                    raw.line
                )),
            },
            ("guards", "r_min") => r_min = parse_f64(raw, &mut errs),
            ("guards", "r_max") => r_max = parse_f64(raw, &mut errs),
            (section, key) => {
                errs.push(format!(
                    "line {}: unknown key {key:?} in section [{section}]",
                    raw.line
                ));
            }
        }
    }

    match t_final {
        Some(t) => run.t_final = t,
        None => errs.push("time.t_final is required".to_string()),
    }
    match (steps, dt) {
        (Some(_), Some(_)) => {
            errs.push("time.steps and time.dt are mutually exclusive".to_string())
        }
        (Some(n), None) => run.n_steps = n,
        (None, Some(d)) => {
            if d > 0.0 && run.t_final > 0.0 {
                run.n_steps = (run.t_final / d).round().max(1.0) as usize;
            } else {
                errs.push(format!("time.dt must be > 0, got {d}"));
            }
        }
        (None, None) => errs.push("one of time.steps or time.dt is required".to_string()),
    }
    let mut monitor = ValidityMonitor::for_radius(run.geometry.radius);
    if let Some(v) = r_min {
        monitor.r_min = v;
    }
    if let Some(v) = r_max {
        monitor.r_max = v;
    }
    run.monitor = monitor;

    if let Err(Error::Config(mut more)) = run.validate() {
        errs.append(&mut more);
    }

    if errs.is_empty() {
        Ok(ParsedConfig { run, output })
    } else {
        Err(Error::Config(errs))
    }
}

/// Canonical plain-text rendering of a configuration; hashing this ties
/// output artifacts to the exact settings that produced them.
pub fn canonical_string(cfg: &ParsedConfig) -> String {
    let r = &cfg.run;
    let g = &r.geometry;
    let w = &r.weights;
    let pressure = |p: &PressureData| match p {
        PressureData::Constant(c) => format!("constant {c:.17e}"),
        PressureData::CosinePulse {
            amplitude,
            duration,
        } => format!("cosine {amplitude:.17e} {duration:.17e}"),
        PressureData::Table(samples) => {
            let items: Vec<String> = samples
                .iter()
                .map(|(t, v)| format!("{t:.17e}:{v:.17e}"))
                .collect();
            format!("table {}", items.join(","))
        }
    };
    format!(
        "[geometry]\nlength = {:.17e}\nradius = {:.17e}\nthickness = {:.17e}\nnz = {}\nnr_fluid = {}\nnr_solid = {}\n\
         [physics]\nrho_f = {:.17e}\nmu = {:.17e}\nrho_s1_h = {:.17e}\nc2 = {:.17e}\nthin_c0 = {:.17e}\nthin_c2 = {:.17e}\nthin_d0 = {:.17e}\nthin_d1 = {:.17e}\nthin_d2 = {:.17e}\nlambda = {:.17e}\nmu_s = {:.17e}\nrho_s2 = {:.17e}\n\
         [time]\nt_final = {:.17e}\nsteps = {}\n\
         [pressure]\ninlet = {}\noutlet = {}\n\
         [initial]\neta_amplitude = {:.17e}\neta_mode = {}\nv_amplitude = {:.17e}\nv_mode = {}\n\
         [output]\ncadence = {}\nformat = {:?}\nfields = {}\n\
         [guards]\nr_min = {:.17e}\nr_max = {:.17e}\n",
        g.length, g.radius, g.thickness, g.nz, g.nr_fluid, g.nr_solid,
        w.rho_f, w.mu, w.rho_s1_h, w.c2, w.thin_c0, w.thin_c2, w.thin_d0, w.thin_d1, w.thin_d2,
        w.lambda, w.mu_s, w.rho_s2,
        r.t_final, r.n_steps,
        pressure(&r.pressure_in), pressure(&r.pressure_out),
        r.initial.eta_amplitude, r.initial.eta_mode, r.initial.v_amplitude, r.initial.v_mode,
        r.snapshot_every, cfg.output.format, cfg.output.write_fields,
        r.monitor.r_min, r.monitor.r_max,
    )
}

/// Hex SHA-256 of the canonical configuration rendering.
pub fn config_hash(cfg: &ParsedConfig) -> String {
    let digest = Sha256::digest(canonical_string(cfg).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
