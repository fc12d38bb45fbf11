//! CSV emitters. Values are written with 17 significant digits so they
//! parse back to the same `f64`; `#` lines carry provenance.

use std::fmt::Write as _;
use std::path::Path;

use compass_core::experiments::{NegativitySurface, Provenance, ScanTable, SweepResult};
use compass_core::observables::YieldMethod;
use compass_core::Trajectory;

use crate::{CliError, Result};

pub const SWEEP_HEADER: &str = "theta_rad,phi_s,phi_t,method,residual";
pub const TRAJECTORY_HEADER: &str = "time_s,shelf_s,shelf_t,singlet_probability";
pub const SCAN_HEADER: &str = "value_per_second,contrast,rf_disruption";
pub const NEGATIVITY_HEADER: &str = "gamma_per_second,time_s,negativity_standard,negativity_half_trace_norm";

/// Full-precision float: 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn provenance_line(p: &Provenance) -> String {
    format!("# config_sha256={} solver: {}\n", p.config_hash, p.solver)
}

fn method_name(m: YieldMethod) -> &'static str {
    match m {
        YieldMethod::Direct => "direct",
        YieldMethod::Periodic => "periodic",
        YieldMethod::Integrated => "integrated",
    }
}

/// One row per grid angle; failed angles keep their θ and leave the yield
/// columns empty.
pub fn sweep_csv(r: &SweepResult) -> String {
    let mut s = provenance_line(&r.provenance);
    let _ = writeln!(s, "# scenario={}", r.name);
    s.push_str(SWEEP_HEADER);
    s.push('\n');
    for p in &r.points {
        match &p.outcome {
            Ok(y) => {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    num(p.theta),
                    num(y.phi_s),
                    num(y.phi_t),
                    method_name(y.meta.method),
                    num(y.meta.residual)
                );
            }
            Err(e) => {
                let _ = writeln!(s, "{},,,failed: {},", num(p.theta), e.to_string().replace(',', ";"));
            }
        }
    }
    s
}

/// A row read back from [`sweep_csv`] output; `None` marks a gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub theta: f64,
    pub yields: Option<(f64, f64)>,
}

fn parse_f64(field: &str, line: usize) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| CliError::Csv {
        line,
        reason: format!("not a number: {field:?}"),
    })
}

pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    let mut seen_header = false;
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if !seen_header {
            if line != SWEEP_HEADER {
                return Err(CliError::Csv {
                    line: ln,
                    reason: "unexpected header".into(),
                });
            }
            seen_header = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(CliError::Csv {
                line: ln,
                reason: format!("expected 5 fields, got {}", f.len()),
            });
        }
        let theta = parse_f64(f[0], ln)?;
        let yields = if f[1].is_empty() {
            None
        } else {
            Some((parse_f64(f[1], ln)?, parse_f64(f[2], ln)?))
        };
        rows.push(SweepRow { theta, yields });
    }
    Ok(rows)
}

/// Recorded samples of a trajectory; an empty trajectory gives the header
/// alone.
pub fn trajectory_csv(t: &Trajectory, provenance: Option<&Provenance>) -> String {
    let mut s = provenance.map(provenance_line).unwrap_or_default();
    s.push_str(TRAJECTORY_HEADER);
    s.push('\n');
    for i in 0..t.times.len() {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            num(t.times[i]),
            num(t.shelf_s[i]),
            num(t.shelf_t[i]),
            num(t.singlet[i])
        );
    }
    s
}

pub fn parse_numeric_csv(text: &str, header: &str) -> Result<Vec<Vec<Option<f64>>>> {
    let mut rows = Vec::new();
    let mut seen_header = false;
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if !seen_header {
            if line != header {
                return Err(CliError::Csv {
                    line: ln,
                    reason: "unexpected header".into(),
                });
            }
            seen_header = true;
            continue;
        }
        rows.push(
            line.split(',')
                .map(|f| if f.is_empty() { Ok(None) } else { parse_f64(f, ln).map(Some) })
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok(rows)
}

pub fn scan_csv(t: &ScanTable, provenance: &Provenance) -> String {
    let mut s = provenance_line(provenance);
    let _ = writeln!(s, "# axis={}", t.axis);
    let _ = writeln!(
        s,
        "# k_threshold={} k_threshold_interpolated={} baseline_contrast={} gamma_halving={} gamma_halving_interpolated={}",
        opt(t.k_threshold),
        opt(t.k_threshold_interpolated),
        opt(t.baseline_contrast),
        opt(t.gamma_halving),
        opt(t.gamma_halving_interpolated)
    );
    s.push_str(SCAN_HEADER);
    s.push('\n');
    for r in &t.rows {
        let _ = writeln!(s, "{},{},{}", num(r.value), opt(r.contrast), opt(r.rf_disruption));
    }
    s
}

pub fn negativity_csv(n: &NegativitySurface, provenance: &Provenance) -> String {
    let mut s = provenance_line(provenance);
    let _ = writeln!(s, "# theta_rad={} k_per_second={}", num(n.theta), num(n.k));
    for (g, d) in n.gammas.iter().zip(&n.death_times) {
        let _ = writeln!(s, "# gamma_per_second={} death_time_s={}", num(*g), opt(*d));
    }
    s.push_str(NEGATIVITY_HEADER);
    s.push('\n');
    for (i, g) in n.gammas.iter().enumerate() {
        for (j, t) in n.times.iter().enumerate() {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                num(*g),
                num(*t),
                num(n.standard[i][j]),
                num(n.half_trace_norm[i][j])
            );
        }
    }
    s
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}
