//! Artifact writers. Every file is written to a temporary sibling and renamed
//! into place, so a failed run never leaves a half-written artifact behind.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use gradkit::optim::TrainTrace;
use gradkit::Vector;
use serde::Serialize;

use crate::Failure;

pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Failure::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| Failure::io(path, e))?;
    tmp.persist(path).map_err(|e| Failure::io(path, e.error))?;
    Ok(())
}

/// `iter,loss,theta_0,...`, one row per recorded iteration.
pub fn trace_csv(trace: &TrainTrace) -> String {
    let width = trace.final_theta.len();
    let mut out = String::from("iter,loss");
    for j in 0..width {
        let _ = write!(out, ",theta_{j}");
    }
    out.push('\n');
    for p in &trace.iterations {
        let _ = write!(out, "{},{}", p.iter, p.loss);
        for v in p.theta.iter() {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

pub fn toml_string<T: Serialize>(value: &T) -> Result<String, Failure> {
    toml::to_string(value).map_err(|e| Failure::Data(format!("cannot encode params: {e}")))
}

/// Four significant digits.
pub fn sig4(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (3 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn format_coefficients(names: &[String], theta: &Vector) -> String {
    names
        .iter()
        .zip(theta.iter())
        .map(|(n, v)| format!("{n} = {}", sig4(*v)))
        .collect::<Vec<_>>()
        .join(", ")
}
