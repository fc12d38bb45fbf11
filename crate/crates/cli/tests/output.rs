use compass_cli::commands::{write_figure, yield_series};
use compass_cli::csv::{
    parse_numeric_csv, parse_sweep_csv, scan_csv, sweep_csv, trajectory_csv, SWEEP_HEADER, TRAJECTORY_HEADER,
};
use compass_cli::plot::{data_range, render_plot, PlotSeries, PlotStyle};
use compass_core::experiments::{
    angular_sweep, Figure, FigureData, Panel, Provenance, ScanAxis, ScanRow, ScanTable, ScenarioConfig, Series,
    SweepPoint, SweepResult,
};
use compass_core::observables::{PointMeta, YieldMethod, YieldPoint};
use compass_core::{initial_state, CompassError, InitialKind, ModelSpec, Trajectory};

fn synthetic_sweep(values: &[(f64, Option<(f64, f64)>)]) -> SweepResult {
    let cfg = ScenarioConfig::default();
    SweepResult {
        name: "synthetic".into(),
        points: values
            .iter()
            .map(|&(theta, y)| SweepPoint {
                theta,
                outcome: match y {
                    Some((phi_s, phi_t)) => Ok(YieldPoint {
                        theta,
                        phi_s,
                        phi_t,
                        meta: PointMeta {
                            method: YieldMethod::Integrated,
                            residual: 1e-7 / 3.0,
                        },
                    }),
                    None => Err(CompassError::NonConvergence {
                        residual: 0.5,
                        t_max: 1e-3,
                    }),
                },
            })
            .collect(),
        contrast: None,
        reference: None,
        rf_disruption: None,
        provenance: Provenance::of(&cfg),
    }
}

#[test]
fn sweep_csv_round_trip_is_bit_exact() {
    let awkward = [
        (0.0, Some((0.1 + 0.2, 1.0 - (0.1 + 0.2)))),
        (1e-300, Some((f64::MIN_POSITIVE / 3.0, 1.0))),
        (0.7853981633974483, None),
        (std::f64::consts::FRAC_PI_2, Some((0.333_333_333_333_333_3, 2.0f64.sqrt() / 3.0))),
    ];
    let text = sweep_csv(&synthetic_sweep(&awkward));
    let rows = parse_sweep_csv(&text).unwrap();
    assert_eq!(rows.len(), awkward.len());
    for (row, (theta, y)) in rows.iter().zip(awkward) {
        assert_eq!(row.theta.to_bits(), theta.to_bits());
        match (row.yields, y) {
            (Some((s, t)), Some((s0, t0))) => {
                assert_eq!(s.to_bits(), s0.to_bits());
                assert_eq!(t.to_bits(), t0.to_bits());
            }
            (None, None) => {}
            other => panic!("gap mismatch: {other:?}"),
        }
    }
}

#[test]
fn computed_sweep_has_one_row_per_angle() {
    let result = angular_sweep(&ScenarioConfig::default()).unwrap();
    let text = sweep_csv(&result);
    let lines: Vec<&str> = text.lines().collect();
    let comments = lines.iter().filter(|l| l.starts_with('#')).count();
    assert!(lines[0].starts_with("# config_sha256="));
    assert!(lines[0].contains("solver: method="));
    assert_eq!(lines[comments], SWEEP_HEADER);
    assert_eq!(lines.len() - comments - 1, 91);

    let rows = parse_sweep_csv(&text).unwrap();
    for (row, p) in rows.iter().zip(&result.points) {
        let y = p.outcome.as_ref().unwrap();
        assert_eq!(row.theta, p.theta);
        assert_eq!(row.yields, Some((y.phi_s, y.phi_t)));
    }
}

#[test]
fn failed_points_keep_their_angle() {
    let text = sweep_csv(&synthetic_sweep(&[(0.5, None)]));
    let row = text.lines().last().unwrap();
    assert!(row.starts_with("5.0000000000000000e-1,,,failed: evolution did not converge"), "{row}");
    assert_eq!(row.split(',').count(), 5);
}

#[test]
fn empty_trajectory_is_header_only() {
    let model = ModelSpec::cigar(1e4);
    let t = Trajectory {
        times: vec![],
        states: vec![],
        shelf_s: vec![],
        shelf_t: vec![],
        singlet: vec![],
        final_state: initial_state(&model, InitialKind::Singlet).unwrap(),
        max_trace_error: 0.0,
        min_eigenvalue: 0.0,
        residual: 1.0,
        steps: 0,
    };
    assert_eq!(trajectory_csv(&t, None), format!("{TRAJECTORY_HEADER}\n"));
    let with_prov = trajectory_csv(&t, Some(&Provenance::of(&ScenarioConfig::default())));
    assert_eq!(with_prov.lines().count(), 2);
    assert!(parse_numeric_csv(&with_prov, TRAJECTORY_HEADER).unwrap().is_empty());
}

#[test]
fn scan_csv_round_trip() {
    let table = ScanTable {
        axis: ScanAxis::K,
        rows: vec![
            ScanRow {
                value: 1e3,
                contrast: Some(0.1 / 3.0),
                rf_disruption: Some(std::f64::consts::E * 1e-2),
            },
            ScanRow {
                value: 3.1622776601683795e3,
                contrast: None,
                rf_disruption: None,
            },
        ],
        baseline_contrast: None,
        k_threshold: Some(1e3),
        k_threshold_interpolated: None,
        gamma_halving: None,
        gamma_halving_interpolated: None,
    };
    let text = scan_csv(&table, &Provenance::of(&ScenarioConfig::default()));
    let rows = parse_numeric_csv(&text, compass_cli::csv::SCAN_HEADER).unwrap();
    assert_eq!(rows[0], vec![Some(1e3), Some(0.1 / 3.0), Some(std::f64::consts::E * 1e-2)]);
    assert_eq!(rows[1], vec![Some(3.1622776601683795e3), None, None]);
}

fn count(svg: &str, needle: &str) -> usize {
    svg.matches(needle).count()
}

#[test]
fn single_point_is_a_marker() {
    let s = vec![PlotSeries {
        label: "one".into(),
        points: vec![(0.25, Some(0.4))],
    }];
    let svg = render_plot(&s, &PlotStyle::yield_vs_angle("single")).unwrap();
    assert_eq!(count(&svg, "<circle"), 1);
    assert_eq!(count(&svg, "<polyline"), 0);
}

#[test]
fn axis_range_contains_every_point() {
    let pts: Vec<(f64, Option<f64>)> = (0..20).map(|i| (i as f64 / 40.0, Some((i as f64).sin() * 0.3))).collect();
    let s = vec![PlotSeries {
        label: "sin".into(),
        points: pts.clone(),
    }];
    let ((xlo, xhi), (ylo, yhi)) = data_range(&s).unwrap();
    for (x, y) in pts {
        let y = y.unwrap();
        assert!(xlo <= x && x <= xhi && ylo <= y && y <= yhi);
    }

    // every plotted coordinate lies inside the plot frame
    let svg = render_plot(&s, &PlotStyle::yield_vs_angle("range")).unwrap();
    let frame = svg.lines().find(|l| l.contains("fill=\"none\" stroke=\"black\"")).unwrap();
    let attr = |name: &str| -> f64 {
        let start = frame.find(&format!("{name}=\"")).unwrap() + name.len() + 2;
        frame[start..].split('"').next().unwrap().parse().unwrap()
    };
    let (fx, fy, fw, fh) = (attr("x"), attr("y"), attr("width"), attr("height"));
    let poly = svg.lines().find(|l| l.contains("<polyline")).unwrap();
    let pts = poly.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
    for p in pts.split(' ') {
        let (x, y) = p.split_once(',').unwrap();
        let (x, y): (f64, f64) = (x.parse().unwrap(), y.parse().unwrap());
        assert!(fx <= x && x <= fx + fw && fy <= y && y <= fy + fh, "({x}, {y})");
    }
}

#[test]
fn gaps_split_the_polyline() {
    let s = vec![PlotSeries {
        label: "gappy".into(),
        points: vec![(0.0, Some(0.1)), (0.1, Some(0.2)), (0.2, None), (0.3, Some(0.3)), (0.4, Some(0.2))],
    }];
    let svg = render_plot(&s, &PlotStyle::yield_vs_angle("gaps")).unwrap();
    assert_eq!(count(&svg, "<polyline"), 2);
}

#[test]
fn empty_input_is_an_error() {
    let s = vec![PlotSeries {
        label: "nothing".into(),
        points: vec![(0.0, None)],
    }];
    assert!(render_plot(&s, &PlotStyle::yield_vs_angle("empty")).is_err());
    assert!(render_plot(&[], &PlotStyle::yield_vs_angle("empty")).is_err());
}

#[test]
fn figure_layout_has_reference_plus_one_series_per_k() {
    // fig2-shaped data without the rf cost: a reference and five k values
    let ks = [1e3, 1e4, 1e5, 1e6, 1e7];
    let mut series = vec![Series {
        label: "reference (no rf)".into(),
        sweep: angular_sweep(&ScenarioConfig {
            angle_grid: compass_core::experiments::angle_grid(5),
            ..ScenarioConfig::default()
        })
        .unwrap(),
        plot_offset: 0.001,
    }];
    for k in ks {
        series.push(Series {
            label: format!("k={k:e} rf"),
            sweep: angular_sweep(&ScenarioConfig {
                angle_grid: compass_core::experiments::angle_grid(5),
                ..ScenarioConfig::default().with_k(k)
            })
            .unwrap(),
            plot_offset: 0.0,
        });
    }
    let data = FigureData {
        figure: Figure::Fig2,
        panels: vec![Panel {
            name: "fig2".into(),
            series,
        }],
        negativity: None,
    };
    let dir = tempfile::tempdir().unwrap();
    let w = write_figure(&data, dir.path()).unwrap();
    let svg = std::fs::read_to_string(dir.path().join("fig2.svg")).unwrap();
    assert_eq!(count(&svg, "class=\"series\""), 6);
    assert_eq!(count(&svg, "<polyline"), 6);
    assert!(svg.contains("ϑ / π") && svg.contains("singlet yield"));
    assert!(svg.contains("reference (no rf) (+0.001)"));
    // 6 series CSVs, the plot and the summary
    assert_eq!(w.files.len(), 8);
    assert!(w.files.iter().all(|f| f.starts_with(dir.path())));

    let offset = yield_series("x", &data.panels[0].series[0].sweep, 0.001);
    let plain = yield_series("x", &data.panels[0].series[0].sweep, 0.0);
    assert!((offset.points[2].1.unwrap() - plain.points[2].1.unwrap() - 0.001).abs() < 1e-15);
}
