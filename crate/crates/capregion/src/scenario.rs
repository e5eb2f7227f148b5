//! Scenario execution: turns a validated configuration into artifacts on
//! disk, and hosts the figure presets and the fast self-check suite.

use std::f64::consts::FRAC_PI_4;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::config::{default_tau_grid, RunMode, ScenarioConfig};
use crate::error::CapResult;
use crate::output::{
    points_csv, write_atomic, write_convergence_csv, write_region_csv, write_svg,
    write_sweep_csv, PlotOptions, SvgCurve,
};
use crate::pulse::PulseSpec;
use crate::quad::QuadRule;
use crate::rate_time::{
    covariance_from_modes, iid_successive_baseline, rate_triple_from_modes, sum_rate_logdet,
};
use crate::region::{
    convergence_study, tau_sweep, trace_boundary, RateRegion, RegionMode, RegionRequest,
};
use crate::toeplitz::{
    build_interference, dft_eigen_residual, generating_function, ChannelSpec,
};

/// What a run produced: the one-line summaries to print and the files
/// written.
#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub lines: Vec<String>,
    pub artifacts: Vec<PathBuf>,
}

fn resolve_path(configured: &Option<String>, out_dir: &Path, default_name: &str) -> PathBuf {
    match configured {
        Some(p) => {
            let p = PathBuf::from(p);
            if p.is_absolute() {
                p
            } else {
                out_dir.join(p)
            }
        }
        None => out_dir.join(default_name),
    }
}

fn curve_kind(delay_diff: f64) -> &'static str {
    if delay_diff.abs() > 1e-15 {
        "aMAC"
    } else {
        "MAC"
    }
}

fn region_summary(label: &str, region: &RateRegion) -> String {
    format!(
        "{label}: max_sum {:.6} bits/T, endpoints ({:.6}, {:.6}), max_turn {:.4} rad",
        region.max_sum_rate(),
        region.endpoint_r1(),
        region.endpoint_r2(),
        region.max_turning_angle,
    )
}

/// Boundary polyline including the drops to both axes (for plotting).
fn region_polyline(region: &RateRegion) -> Vec<(f64, f64)> {
    let mut pts = Vec::with_capacity(region.points.len() + 2);
    pts.push((0.0, region.endpoint_r2()));
    pts.extend(region.points.iter().map(|p| (p.r1, p.r2)));
    pts.push((region.endpoint_r1(), 0.0));
    pts
}

/// Executes one scenario. With `dry_run`, validates only and writes nothing.
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: &Path, dry_run: bool) -> CapResult<RunSummary> {
    let mut summary = RunSummary::default();
    if dry_run {
        summary.lines.push(format!(
            "dry-run ok: mode {:?}, delta {}, beta {}, no artifacts written",
            cfg.mode, cfg.pulse.delta, cfg.pulse.beta
        ));
        return Ok(summary);
    }
    // Semicolon, not comma: the label lands in the first CSV column.
    let label = format!(
        "{}({};{})",
        curve_kind(cfg.chan.delay_diff()),
        cfg.pulse.delta,
        cfg.pulse.beta
    );
    match cfg.mode {
        RunMode::Time | RunMode::Frequency => {
            let region = trace_boundary(&cfg.to_request())?;
            let csv = resolve_path(&cfg.csv_path, out_dir, "region.csv");
            write_region_csv(&csv, &label, &region, cfg.precision)?;
            summary.lines.push(region_summary(&label, &region));
            summary.artifacts.push(csv);
            if cfg.svg_path.is_some() {
                let svg = resolve_path(&cfg.svg_path, out_dir, "region.svg");
                write_svg(
                    &svg,
                    &[SvgCurve {
                        label: label.clone(),
                        points: region_polyline(&region),
                    }],
                    &PlotOptions {
                        title: format!("Capacity region, {label}"),
                        x_label: "R1 (bits per T)".into(),
                        y_label: "R2 (bits per T)".into(),
                        from_zero: true,
                    },
                )?;
                summary.artifacts.push(svg);
            }
        }
        RunMode::Convergence => {
            let mut ref_req = cfg.to_request();
            ref_req.mode = RegionMode::Frequency {
                grid_nodes: cfg.grid_nodes,
            };
            let reference = trace_boundary(&ref_req)?;
            let rows = convergence_study(
                &cfg.pulse,
                &cfg.chan,
                &cfg.n_list,
                &reference,
                cfg.weight_count,
                cfg.seed,
            )?;
            let csv = resolve_path(&cfg.csv_path, out_dir, "convergence.csv");
            write_convergence_csv(&csv, &rows, cfg.precision)?;
            let ref_csv = csv.with_file_name(match csv.file_stem() {
                Some(stem) => format!("{}_reference.csv", stem.to_string_lossy()),
                None => "convergence_reference.csv".to_string(),
            });
            write_region_csv(&ref_csv, &label, &reference, cfg.precision)?;
            let devs: Vec<String> = rows
                .iter()
                .map(|(n, d)| format!("N={n} dev {d:.3e}"))
                .collect();
            summary
                .lines
                .push(format!("convergence {label}: {}", devs.join(", ")));
            summary.lines.push(region_summary(&label, &reference));
            summary.artifacts.push(csv);
            summary.artifacts.push(ref_csv);
        }
        RunMode::TauSweep => {
            let rows = tau_sweep(
                &cfg.pulse,
                &cfg.chan,
                &cfg.tau_list,
                cfg.chan.n_symbols,
                cfg.seed,
            )?;
            let csv = resolve_path(&cfg.csv_path, out_dir, "tau_sweep.csv");
            write_sweep_csv(&csv, &rows, cfg.precision)?;
            let best = rows
                .iter()
                .copied()
                .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .expect("nonempty sweep");
            summary.lines.push(format!(
                "tau-sweep ({};{}) N={}: argmax tau {:.6}, sum {:.6} bits/T over {} delays",
                cfg.pulse.delta,
                cfg.pulse.beta,
                cfg.chan.n_symbols,
                best.0,
                best.1,
                rows.len()
            ));
            summary.artifacts.push(csv);
            if cfg.svg_path.is_some() {
                let svg = resolve_path(&cfg.svg_path, out_dir, "tau_sweep.svg");
                write_svg(
                    &svg,
                    &[SvgCurve {
                        label: format!(
                            "sum capacity ({};{})",
                            cfg.pulse.delta, cfg.pulse.beta
                        ),
                        points: rows.clone(),
                    }],
                    &PlotOptions {
                        title: "Sum capacity vs delay difference".into(),
                        x_label: "tau".into(),
                        y_label: "sum rate (bits per T)".into(),
                        from_zero: false,
                    },
                )?;
                summary.artifacts.push(svg);
            }
        }
    }
    Ok(summary)
}

const FIG_POWER: f64 = 100.0; // 20 dB with unit noise
const FIG_N: usize = 20;

struct Fig1Curve {
    slug: &'static str,
    label: String,
    points: Vec<(f64, f64)>,
    summary: String,
    csv: String,
}

/// Reproduces the capacity-region comparison artifacts: one CSV per curve
/// plus an overlay SVG. Curves cover asynchronous and synchronous regions
/// over the acceleration/roll-off grid, the Nyquist reference, and the
/// white-input successive-decoding baseline.
pub fn fig1(out_dir: &Path, seed: u64, precision: usize) -> CapResult<RunSummary> {
    let mut curves: Vec<Fig1Curve> = Vec::new();

    let mut region_curve = |slug: &'static str,
                            delta: f64,
                            beta: f64,
                            async_users: bool,
                            mode_time: bool|
     -> CapResult<()> {
        let pulse = PulseSpec::new(beta, 1.0, delta)?;
        let tau = if async_users {
            pulse.accelerated_period() / 2.0
        } else {
            0.0
        };
        let chan = ChannelSpec::new(0.0, tau, 1.0, (FIG_POWER, FIG_POWER), FIG_N)?;
        let mode = if mode_time {
            RegionMode::Time
        } else {
            RegionMode::Frequency {
                grid_nodes: crate::region::DEFAULT_GRID_NODES,
            }
        };
        let req = {
            let mut r = RegionRequest::new(pulse, chan, mode);
            r.seed = seed;
            r
        };
        let region = trace_boundary(&req)?;
        let kind = curve_kind(chan.delay_diff());
        let label = if mode_time {
            format!("{kind}({delta};{beta}) N={FIG_N}")
        } else {
            format!("{kind}({delta};{beta})")
        };
        curves.push(Fig1Curve {
            slug,
            label: label.clone(),
            points: region_polyline(&region),
            summary: region_summary(&label, &region),
            csv: crate::output::region_csv(&label, &region, precision),
        });
        Ok(())
    };

    region_curve("amac_d100_b025", 1.0, 0.25, true, false)?;
    region_curve("mac_d100_b025", 1.0, 0.25, false, false)?;
    region_curve("amac_d090_b025", 0.9, 0.25, true, false)?;
    region_curve("mac_d090_b025", 0.9, 0.25, false, false)?;
    region_curve("amac_d080_b025_n20", 0.8, 0.25, true, true)?;
    region_curve("mac_d080_b025", 0.8, 0.25, false, false)?;
    region_curve("mac_d100_b000", 1.0, 0.0, false, false)?;

    // White-input successive-decoding baseline at the critical acceleration.
    {
        let pulse = PulseSpec::new(0.25, 1.0, 0.8)?;
        let tau = pulse.accelerated_period() / 2.0;
        let chan = ChannelSpec::new(0.0, tau, 1.0, (FIG_POWER, FIG_POWER), FIG_N)?;
        let m = build_interference(&pulse, &chan)?;
        let corner = iid_successive_baseline(&m)?.scaled(1.0 / pulse.delta);
        let label = format!("iid(0.8;0.25) N={FIG_N}");
        curves.push(Fig1Curve {
            slug: "iid_d080_b025_n20",
            label: label.clone(),
            points: vec![
                (0.0, corner.r2),
                (corner.r1, corner.r2),
                (corner.r1, 0.0),
            ],
            summary: format!(
                "{label}: corner ({:.6}, {:.6}), sum {:.6} bits/T",
                corner.r1,
                corner.r2,
                corner.r1 + corner.r2
            ),
            csv: points_csv(&label, &[(corner.r1, corner.r2, FRAC_PI_4)], precision),
        });
    }

    let mut summary = RunSummary::default();
    for c in &curves {
        let path = out_dir.join(format!("fig1_{}.csv", c.slug));
        write_atomic(&path, c.csv.as_bytes())?;
        summary.lines.push(c.summary.clone());
        summary.artifacts.push(path);
    }
    let svg_curves: Vec<SvgCurve> = curves
        .iter()
        .map(|c| SvgCurve {
            label: c.label.clone(),
            points: c.points.clone(),
        })
        .collect();
    let svg = out_dir.join("fig1.svg");
    write_svg(
        &svg,
        &svg_curves,
        &PlotOptions {
            title: "Two-user capacity regions, 20 dB SNR".into(),
            x_label: "R1 (bits per T)".into(),
            y_label: "R2 (bits per T)".into(),
            from_zero: true,
        },
    )?;
    summary.artifacts.push(svg);
    Ok(summary)
}

/// Reproduces the delay-sweep artifacts: sum capacity over the default
/// delay grid at (0.9, 0.25), block length 20, with the argmax row flagged.
pub fn fig2(out_dir: &Path, seed: u64, precision: usize) -> CapResult<RunSummary> {
    let pulse = PulseSpec::new(0.25, 1.0, 0.9)?;
    let chan = ChannelSpec::new(0.0, 0.0, 1.0, (FIG_POWER, FIG_POWER), FIG_N)?;
    let taus = default_tau_grid(pulse.accelerated_period());
    let rows = tau_sweep(&pulse, &chan, &taus, FIG_N, seed)?;
    let csv = out_dir.join("fig2_tau_sweep.csv");
    write_sweep_csv(&csv, &rows, precision)?;
    let svg = out_dir.join("fig2.svg");
    write_svg(
        &svg,
        &[SvgCurve {
            label: "sum capacity (0.9;0.25) N=20".into(),
            points: rows.clone(),
        }],
        &PlotOptions {
            title: "Sum capacity vs delay difference".into(),
            x_label: "tau".into(),
            y_label: "sum rate (bits per T)".into(),
            from_zero: false,
        },
    )?;
    let best = rows
        .iter()
        .copied()
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .expect("nonempty sweep");
    let mut summary = RunSummary::default();
    summary.lines.push(format!(
        "tau-sweep (0.9;0.25) N={FIG_N}: argmax tau {:.6}, sum {:.6} bits/T over {} delays",
        best.0,
        best.1,
        rows.len()
    ));
    summary.artifacts.push(csv);
    summary.artifacts.push(svg);
    Ok(summary)
}

// ---------------------------------------------------------------------------
// Self-check suite

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Warn,
    Fail,
}

#[derive(Debug, Clone)]
pub struct CheckLine {
    pub name: &'static str,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct SelfCheckReport {
    pub checks: Vec<CheckLine>,
}

impl SelfCheckReport {
    /// Warnings count as passing; only `Fail` lines block.
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn render(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                let tag = match c.status {
                    CheckStatus::Pass => "ok  ",
                    CheckStatus::Warn => "warn",
                    CheckStatus::Fail => "FAIL",
                };
                format!("{tag} {} - {}", c.name, c.detail)
            })
            .collect()
    }
}

/// Knobs for the self-check suite. `pulse_scale` multiplies the pulse
/// autocorrelation samples before the sample-based checks run; it exists as
/// a fault-injection hook (any value other than 1 must trip the suite).
#[derive(Debug, Clone, Copy)]
pub struct SelfCheckOptions {
    pub pulse_scale: f64,
}

impl Default for SelfCheckOptions {
    fn default() -> Self {
        SelfCheckOptions { pulse_scale: 1.0 }
    }
}

/// Runs the fast invariant suite (sub-second checks, no artifacts).
pub fn selfcheck(opts: &SelfCheckOptions) -> SelfCheckReport {
    let mut checks = Vec::new();
    let scale = opts.pulse_scale;
    let mut push = |name: &'static str, result: CapResult<(CheckStatus, String)>| {
        let (status, detail) = match result {
            Ok(v) => v,
            Err(e) => (CheckStatus::Fail, format!("error: {e}")),
        };
        checks.push(CheckLine {
            name,
            status,
            detail,
        });
    };

    push("pulse-normalization", (|| {
        let pulse = PulseSpec::new(0.25, 1.0, 0.9)?;
        let v = scale * pulse.autocorrelation(0.0);
        let ok = (v - 1.0).abs() < 1e-12;
        Ok((
            if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            format!("g(0) = {v:.12}"),
        ))
    })());

    push("spectrum-unit-area", (|| {
        let pulse = PulseSpec::new(0.25, 1.0, 0.9)?;
        let edge = (1.0 + pulse.beta) / (2.0 * pulse.symbol_period);
        let taper = (1.0 - pulse.beta) / (2.0 * pulse.symbol_period);
        let rule = QuadRule::composite(&[-edge, -taper, taper, edge], 256, 16);
        let area = rule.integrate(|f| pulse.spectrum(f));
        let ok = (area - 1.0).abs() < 1e-10;
        Ok((
            if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            format!("integral G = {area:.12}"),
        ))
    })());

    push("sample-spectrum-consistency", (|| {
        let pulse = PulseSpec::new(0.25, 1.0, 0.9)?;
        let dt = pulse.accelerated_period();
        let mut worst = 0.0f64;
        for lambda in [0.1, 0.37] {
            let gen = generating_function(
                |k| Complex64::new(scale * pulse.autocorrelation(k as f64 * dt), 0.0),
                lambda,
            );
            let gap = (gen.value.re - pulse.folded_spectrum(lambda)).abs();
            worst = worst.max(gap);
        }
        let ok = worst < 1e-7;
        Ok((
            if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            format!("max sample/spectrum gap {worst:.3e}"),
        ))
    })());

    push("tiny-block-baseline-identity", (|| {
        let pulse = PulseSpec::new(0.25, 1.0, 1.0)?;
        let chan = ChannelSpec::new(0.0, 0.0, 1.0, (FIG_POWER, FIG_POWER), 1)?;
        let m = build_interference(&pulse, &chan)?;
        let triple = iid_successive_baseline(&m)?;
        let expected = 0.5 * (1.0 + 2.0 * FIG_POWER).log2();
        let gap = (triple.r_sum - expected).abs();
        let ok = gap < 1e-12;
        Ok((
            if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            format!("joint rate gap {gap:.3e}"),
        ))
    })());

    push("mode-vs-determinant-rates", (|| {
        use rand::Rng;
        use rand::SeedableRng;
        let pulse = PulseSpec::new(0.25, 1.0, 0.9)?;
        let chan = ChannelSpec::new(0.0, 0.37, 1.0, (FIG_POWER, FIG_POWER), 4)?;
        let m = build_interference(&pulse, &chan)?;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let mut worst = 0.0f64;
        for _ in 0..3 {
            let draw = |rng: &mut rand_chacha::ChaCha8Rng, budget: f64| -> Vec<f64> {
                let raw: Vec<f64> = (0..4).map(|_| rng.random_range(0.01..1.0)).collect();
                let total: f64 = raw.iter().sum();
                raw.iter().map(|x| x / total * budget).collect()
            };
            let psi1 = draw(&mut rng, m.mode_budget(1));
            let psi2 = draw(&mut rng, m.mode_budget(2));
            let closed = rate_triple_from_modes(&m, &psi1, &psi2);
            let r1 = covariance_from_modes(&m, 1, &psi1)?;
            let r2 = covariance_from_modes(&m, 2, &psi2)?;
            let block = sum_rate_logdet(&m, &r1, &r2)?;
            worst = worst.max((closed.r_sum - block).abs());
        }
        let ok = worst < 1e-9;
        Ok((
            if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            format!("max closed/determinant gap {worst:.3e}"),
        ))
    })());

    push("spectral-residual-decay", (|| {
        let pulse = PulseSpec::new(0.25, 1.0, 0.9)?;
        let residual = |n: usize| -> CapResult<f64> {
            let chan = ChannelSpec::new(0.0, 0.0, 1.0, (FIG_POWER, FIG_POWER), n)?;
            let m = build_interference(&pulse, &chan)?;
            Ok(dft_eigen_residual(
                &m.g,
                |lam| Complex64::new(pulse.folded_spectrum(lam), 0.0),
                n / 4,
            ))
        };
        let r16 = residual(16)?;
        let r64 = residual(64)?;
        let ok = r64 < r16;
        Ok((
            if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            format!("residual N=16: {r16:.3e}, N=64: {r64:.3e}"),
        ))
    })());

    push("stability-floor-probe", (|| {
        // delta (1 + beta) = 0.9: the folded spectrum has a dead band, so
        // the Gram matrix degenerates as the block grows. Reported as a
        // warning, never a failure.
        let pulse = PulseSpec::new(0.125, 1.0, 0.8)?;
        let chan = ChannelSpec::new(0.0, 0.0, 1.0, (FIG_POWER, FIG_POWER), 64)?;
        let m = build_interference(&pulse, &chan)?;
        let s = m.stability;
        let detail = if s.floored_modes > 0 {
            format!(
                "floor active: {} modes at {:.3e} (min eigenvalue {:.3e})",
                s.floored_modes, s.floor, s.min_eigenvalue
            )
        } else {
            format!(
                "floor not reached at N=64 (min eigenvalue {:.3e}, floor {:.3e})",
                s.min_eigenvalue, s.floor
            )
        };
        Ok((CheckStatus::Warn, detail))
    })());

    SelfCheckReport { checks }
}

// ---------------------------------------------------------------------------
