//! Verdicts, the measurement report and its serialized forms.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::apparatus::ErrorReport;
use crate::error::{Error, Result};
use crate::grid::GridSpec1D;
use crate::measurement::{ChiSquareResult, MeasurementOutcomeSample};
use crate::phase_space::PhaseSpaceDist;

/// Slack allowed on inequality verdicts.
pub const INEQUALITY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    /// `value ≥ target`.
    LowerBound,
    /// `value ≤ target`.
    UpperBound,
    /// `|value - target| ≤ tolerance`.
    Equality,
}

/// Outcome of one numeric check. `margin` is signed: non-negative means the
/// check holds strictly, and `passed` is `margin ≥ -tolerance` for bounds and
/// `margin ≥ 0` for equalities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub kind: VerdictKind,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub margin: f64,
    pub passed: bool,
}

impl Verdict {
    pub fn lower_bound(name: impl Into<String>, value: f64, target: f64) -> Self {
        let margin = value - target;
        Verdict {
            name: name.into(),
            kind: VerdictKind::LowerBound,
            value,
            target,
            tolerance: INEQUALITY_TOL,
            margin,
            passed: margin >= -INEQUALITY_TOL,
        }
    }

    pub fn upper_bound(name: impl Into<String>, value: f64, target: f64) -> Self {
        let margin = target - value;
        Verdict {
            name: name.into(),
            kind: VerdictKind::UpperBound,
            value,
            target,
            tolerance: INEQUALITY_TOL,
            margin,
            passed: margin >= -INEQUALITY_TOL,
        }
    }

    pub fn equality(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        let margin = tolerance - (value - target).abs();
        Verdict {
            name: name.into(),
            kind: VerdictKind::Equality,
            value,
            target,
            tolerance,
            margin,
            passed: margin >= 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementReport {
    pub scenario: String,
    pub hbar: f64,
    pub system: String,
    pub apparatus: String,
    pub errors: ErrorReport,
    /// `ΔμXf`, `ΔμPf`.
    pub pointer_dx: f64,
    pub pointer_dp: f64,
    pub rho_mass: f64,
    /// L¹ distance between the direct and convolution outcome distributions.
    pub route_gap_l1: f64,
    pub verdicts: Vec<Verdict>,
    pub chi_square: Option<ChiSquareResult>,
}

impl MeasurementReport {
    pub fn all_passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed) && self.chi_square.as_ref().is_none_or(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Verdict> {
        self.verdicts.iter().filter(|v| !v.passed).collect()
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::invalid(format!("unknown format `{other}`"))),
        }
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `mu_x,mu_p,density` rows, `μP` varying fastest.
pub fn write_distribution_csv<W: Write>(dist: &PhaseSpaceDist, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["mu_x", "mu_p", "density"])?;
    for ((a, l), v) in dist.values.indexed_iter() {
        w.write_record([fmt(dist.x_axis.coord(a)), fmt(dist.p_axis.coord(l)), fmt(*v)])?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a distribution written by [`write_distribution_csv`] on the given axes.
pub fn read_distribution_csv<R: std::io::Read>(x_axis: GridSpec1D, p_axis: GridSpec1D, input: R) -> Result<PhaseSpaceDist> {
    let mut r = csv::Reader::from_reader(input);
    let (nx, np) = (x_axis.n(), p_axis.n());
    let mut values = Vec::with_capacity(nx * np);
    for rec in r.deserialize::<(f64, f64, f64)>() {
        values.push(rec?.2);
    }
    if values.len() != nx * np {
        return Err(Error::mismatch(format!("expected {} rows, found {}", nx * np, values.len())));
    }
    let values = ndarray::Array2::from_shape_vec((nx, np), values).map_err(|e| Error::mismatch(e.to_string()))?;
    PhaseSpaceDist::new(x_axis, p_axis, values)
}

pub fn write_samples_csv<W: Write>(samples: &[MeasurementOutcomeSample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["mu_x", "mu_p"])?;
    for s in samples {
        w.write_record([fmt(s.mu_x), fmt(s.mu_p)])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a distribution to `path` in the requested format.
pub fn emit_distribution(dist: &PhaseSpaceDist, format: Format, path: &Path) -> Result<()> {
    let out = BufWriter::new(File::create(path)?);
    match format {
        Format::Csv => write_distribution_csv(dist, out),
        Format::Json => {
            let mut out = out;
            serde_json::to_writer(&mut out, dist)?;
            out.flush()?;
            Ok(())
        }
    }
}

/// Writes the report: pretty JSON, or one CSV row per verdict.
pub fn emit(report: &MeasurementReport, format: Format, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    match format {
        Format::Json => out.write_all(report.to_json()?.as_bytes())?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(["name", "kind", "value", "target", "tolerance", "margin", "passed"])?;
            for v in &report.verdicts {
                let kind = match v.kind {
                    VerdictKind::LowerBound => "lower_bound",
                    VerdictKind::UpperBound => "upper_bound",
                    VerdictKind::Equality => "equality",
                };
                w.write_record([
                    v.name.clone(),
                    kind.to_string(),
                    fmt(v.value),
                    fmt(v.target),
                    fmt(v.tolerance),
                    fmt(v.margin),
                    v.passed.to_string(),
                ])?;
            }
            w.flush()?;
        }
    }
    out.flush()?;
    Ok(())
}
