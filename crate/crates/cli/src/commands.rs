//! Subcommand drivers. Each writes only inside `out` and returns the list
//! of files plus a short text summary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use compass_core::experiments::{
    angular_sweep, negativity_surface, reproduce as run_preset, threshold_scan, Figure, FigureData, NegativitySurface,
    PresetOptions, Provenance, ScanAxis, ScenarioConfig, SweepResult,
};
use compass_core::RfGeometry;

use crate::csv::{negativity_csv, num, scan_csv, sweep_csv, write_file};
use crate::plot::{render_plot, PlotSeries, PlotStyle};
use crate::{CliError, Config, Result};

#[derive(Debug, Default)]
pub struct Written {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

impl Written {
    fn file(&mut self, dir: &Path, name: &str, contents: &str) -> Result<()> {
        let path = dir.join(name);
        write_file(&path, contents)?;
        self.files.push(path);
        Ok(())
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

/// File-name friendly form of a label.
pub fn slug(label: &str) -> String {
    let mut s = String::new();
    for c in label.replace('Γ', "gamma").chars() {
        if c.is_ascii_alphanumeric() {
            s.push(c.to_ascii_lowercase());
        } else if !s.ends_with('-') {
            s.push('-');
        }
    }
    s.trim_matches('-').to_string()
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6e}"))
}

/// Φ_S against ϑ/π, with `offset` added for display.
pub fn yield_series(label: &str, sweep: &SweepResult, offset: f64) -> PlotSeries {
    PlotSeries {
        label: label.to_string(),
        points: sweep
            .points
            .iter()
            .map(|p| {
                (
                    p.theta / std::f64::consts::PI,
                    p.outcome.as_ref().ok().map(|y| y.phi_s + offset),
                )
            })
            .collect(),
    }
}

pub fn sweep(cfg: &Config, out: &Path) -> Result<Written> {
    let sc = &cfg.scenario;
    let result = angular_sweep(sc)?;
    let mut w = Written::default();
    ensure_dir(out)?;
    let stem = slug(&sc.name);
    if sc.outputs.csv {
        w.file(out, &format!("{stem}.csv"), &sweep_csv(&result))?;
        if let Some(r) = &result.reference {
            w.file(out, &format!("{stem}-reference.csv"), &sweep_csv(r))?;
        }
    }
    if sc.outputs.plot {
        let mut series = Vec::new();
        if let Some(r) = &result.reference {
            series.push(yield_series("no rf", r, 0.0));
        }
        series.push(yield_series(&sc.name, &result, 0.0));
        // a sweep where every point failed has nothing to draw
        if result.contrast.is_some() {
            w.file(out, &format!("{stem}.svg"), &render_plot(&series, &PlotStyle::yield_vs_angle(&sc.name))?)?;
        }
    }
    let _ = writeln!(
        w.summary,
        "{}: {} angles, {} failed, contrast {}, rf disruption {}",
        sc.name,
        result.points.len(),
        result.failures(),
        opt(result.contrast),
        opt(result.rf_disruption)
    );
    Ok(w)
}

fn negativity_series(n: &NegativitySurface, half: bool) -> Vec<PlotSeries> {
    n.gammas
        .iter()
        .enumerate()
        .map(|(i, g)| PlotSeries {
            label: format!("Γ={g:.0e} s⁻¹"),
            points: n
                .times
                .iter()
                .zip(if half { &n.half_trace_norm[i] } else { &n.standard[i] })
                .map(|(t, v)| (t * 1e6, Some(*v)))
                .collect(),
        })
        .collect()
}

fn write_negativity(w: &mut Written, out: &Path, stem: &str, n: &NegativitySurface, prov: &Provenance) -> Result<()> {
    w.file(out, &format!("{stem}.csv"), &negativity_csv(n, prov))?;
    for (half, suffix, name) in [(false, "standard", "standard"), (true, "half-trace-norm", "‖ρ^Γ‖₁/2")] {
        let style = PlotStyle {
            title: format!("negativity at ϑ = {:.3}π, k = {:.0e} s⁻¹ ({name})", n.theta / std::f64::consts::PI, n.k),
            x_label: "t / μs".into(),
            y_label: "negativity".into(),
        };
        w.file(out, &format!("{stem}-{suffix}.svg"), &render_plot(&negativity_series(n, half), &style)?)?;
    }
    for (g, d) in n.gammas.iter().zip(&n.death_times) {
        let _ = writeln!(w.summary, "Γ = {g:.3e} s⁻¹: entanglement death at {}", opt(*d));
    }
    Ok(())
}

pub fn negativity(cfg: &Config, out: &Path) -> Result<Written> {
    let run = &cfg.negativity;
    let n = negativity_surface(&cfg.scenario, run.theta, &run.gammas, run.t_end, run.renormalize)?;
    let mut w = Written::default();
    ensure_dir(out)?;
    let stem = format!("{}-negativity", slug(&cfg.scenario.name));
    write_negativity(&mut w, out, &stem, &n, &Provenance::of(&cfg.scenario))?;
    Ok(w)
}

pub fn scan(axis: ScanAxis, grid: &[f64], cfg: &ScenarioConfig, out: &Path) -> Result<Written> {
    let table = threshold_scan(axis, grid, cfg)?;
    let mut w = Written::default();
    ensure_dir(out)?;
    w.file(
        out,
        &format!("{}-scan-{}.csv", slug(&cfg.name), axis),
        &scan_csv(&table, &Provenance::of(cfg)),
    )?;
    for r in &table.rows {
        let _ = writeln!(
            w.summary,
            "{axis} = {:.4e}: contrast {}, rf disruption {}",
            r.value,
            opt(r.contrast),
            opt(r.rf_disruption)
        );
    }
    match axis {
        ScanAxis::K => {
            let _ = writeln!(
                w.summary,
                "k threshold (D ≥ max/2): grid {}, interpolated {}",
                opt(table.k_threshold),
                opt(table.k_threshold_interpolated)
            );
        }
        _ => {
            let _ = writeln!(
                w.summary,
                "contrast halving: grid {}, interpolated {} (baseline contrast {})",
                opt(table.gamma_halving),
                opt(table.gamma_halving_interpolated),
                opt(table.baseline_contrast)
            );
        }
    }
    Ok(w)
}

/// Default scan base: the reference scenario, with perpendicular rf for a
/// `k` scan so the disruption is defined.
pub fn default_scan_config(axis: ScanAxis) -> ScenarioConfig {
    let mut c = ScenarioConfig::default();
    if axis == ScanAxis::K {
        c.rf = RfGeometry::Perpendicular;
    }
    c
}

pub fn write_figure(data: &FigureData, out: &Path) -> Result<Written> {
    let mut w = Written::default();
    ensure_dir(out)?;
    let mut summary = String::from("panel,series,contrast,rf_disruption,failed_points\n");
    for panel in &data.panels {
        let mut series = Vec::new();
        for s in &panel.series {
            w.file(out, &format!("{}__{}.csv", panel.name, slug(&s.label)), &sweep_csv(&s.sweep))?;
            let label = if s.plot_offset != 0.0 {
                format!("{} (+{})", s.label, s.plot_offset)
            } else {
                s.label.clone()
            };
            series.push(yield_series(&label, &s.sweep, s.plot_offset));
            let _ = writeln!(
                summary,
                "{},{},{},{},{}",
                panel.name,
                s.label,
                s.sweep.contrast.map(num).unwrap_or_default(),
                s.sweep.rf_disruption.map(num).unwrap_or_default(),
                s.sweep.failures()
            );
            let _ = writeln!(
                w.summary,
                "{} / {}: contrast {}, rf disruption {}, failed points {}",
                panel.name,
                s.label,
                opt(s.sweep.contrast),
                opt(s.sweep.rf_disruption),
                s.sweep.failures()
            );
        }
        w.file(
            out,
            &format!("{}.svg", panel.name),
            &render_plot(&series, &PlotStyle::yield_vs_angle(&panel.name))?,
        )?;
    }
    if !data.panels.is_empty() {
        w.file(out, &format!("{}-summary.csv", data.figure), &summary)?;
    }
    if let Some(n) = &data.negativity {
        let prov = Provenance::of(&ScenarioConfig {
            name: data.figure.to_string(),
            ..ScenarioConfig::default()
        });
        write_negativity(&mut w, out, &format!("{}-negativity", data.figure), n, &prov)?;
    }
    Ok(w)
}

pub fn reproduce(figure: Figure, out: &Path, opts: &PresetOptions) -> Result<Written> {
    let data = run_preset(figure, opts)?;
    write_figure(&data, out)
}

pub fn validate(cfg: &Config) -> String {
    let s = &cfg.scenario;
    format!(
        "ok: {} ({} nuclei, k = {:.3e} s⁻¹, Γ = {:.3e} s⁻¹, Γz = {:.3e} s⁻¹, rf {:?}, {} angles), config sha256 {}",
        s.name,
        s.model.n_nuclei(),
        s.model.k,
        s.effective_model().gamma_noise,
        s.model.gamma_z,
        s.rf,
        s.angle_grid.len(),
        s.hash()
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs() {
        assert_eq!(slug("Γ=0.01k"), "gamma-0-01k");
        assert_eq!(slug("k=1e4 rf"), "k-1e4-rf");
        assert_eq!(slug("reference (no rf)"), "reference-no-rf");
    }
}
