//! Subcommand execution: evaluate, write CSV (and SVG) files and a
//! `summary.json` listing every file with its detected features.

use std::path::PathBuf;

use serde::Serialize;

use collres::oracle::{compare_signal, comparison_points, worst_relative};
use collres::phase::PhaseKind;
use collres::scan::{arange, distance_sweep, linspace, scan_1d_with, scan_2d_with};
use collres::setups::{self, Species};
use collres::{
    find_extrema, ridge_detect_matrix, Config, ExtremaOptions, Extremum, Include, PairSystem, PhaseProfile,
    PulseConfig, QuadratureSpec, Ridge, RidgeKind, RidgeOptions, RowAxis, Sample, ScanGrid, SignalMatrix, SignalModel,
    SignalOptions,
};

use crate::args::{
    Cli, Command, OracleArgs, Part, Preset, PresetArgs, ResidueArgs, Rows, Scan1dArgs, Scan2dArgs, SweepArgs,
};
use crate::csv;
use crate::error::{CliError, Result};
use crate::svg;

pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Serialize)]
pub struct Summary {
    pub command: String,
    pub normalize: bool,
    pub grid_step: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map_points: Option<usize>,
    /// Model of non-preset runs; presets describe their models per file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system: Option<PairSystem<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pulse: Option<PulseConfig<f64>>,
    pub artifacts: Vec<Artifact>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSummary>,
}

#[derive(Debug, Serialize)]
pub struct Artifact {
    pub file: String,
    pub label: String,
    /// Factor applied to every written signal value.
    pub scale: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub plots: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extrema: Option<LineFeatures>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ridges: Option<MapFeatures>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct LineFeatures {
    pub s_total: Vec<Extremum<f64>>,
    pub s_i: Vec<Extremum<f64>>,
}

#[derive(Debug, Serialize)]
pub struct MapFeatures {
    pub file: String,
    pub ridges: Vec<Ridge<f64>>,
}

#[derive(Debug, Serialize)]
pub struct OracleSummary {
    pub points: usize,
    pub worst_relative: f64,
    pub tolerance: f64,
    pub passed: bool,
}

pub struct Outcome {
    pub summary: Summary,
    /// False when a requested check exceeded its tolerance.
    pub passed: bool,
}

struct Ctx<'a> {
    cli: &'a Cli,
    out: PathBuf,
}

impl Ctx<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write(&self, name: &str, text: &str) -> Result<()> {
        csv::write(&self.path(name), text)
    }

    /// `1 / max|v|` when normalizing, else 1.
    fn scale(&self, values: impl Iterator<Item = f64>) -> f64 {
        if !self.cli.normalize {
            return 1.0;
        }
        let m = values.filter(|v| v.is_finite()).fold(0.0f64, |m, v| m.max(v.abs()));
        if m > 0.0 {
            1.0 / m
        } else {
            1.0
        }
    }
}

fn include(part: Part) -> Include {
    match part {
        Part::Total => Include::Both,
        Part::SI => Include::SI,
        Part::SII => Include::SII,
    }
}

fn field(part: Part) -> fn(&Sample) -> f64 {
    match part {
        Part::Total => |s| s.s_total,
        Part::SI => |s| s.s_i,
        Part::SII => |s| s.s_ii,
    }
}

fn part_name(part: Part) -> &'static str {
    match part {
        Part::Total => "total",
        Part::SI => "s_i",
        Part::SII => "s_ii",
    }
}

fn options(part: Part) -> SignalOptions {
    SignalOptions { include: include(part), ..SignalOptions::default() }
}

fn linewidths(sys: &PairSystem<f64>) -> (f64, f64) {
    let (ga, gb) = (sys.atoms[0].gamma, sys.atoms[1].gamma);
    (ga.min(gb), ga + gb)
}

fn extrema(sys: &PairSystem<f64>, samples: &[Sample], f: fn(&Sample) -> f64) -> Result<Vec<Extremum<f64>>> {
    let (gmin, gsum) = linewidths(sys);
    let opts = ExtremaOptions { pair_window: 3.0 * gsum, ..ExtremaOptions::for_gamma(gmin) };
    let w: Vec<f64> = samples.iter().map(|s| s.omega).collect();
    let v: Vec<f64> = samples.iter().map(f).collect();
    Ok(find_extrema(&w, &v, &opts)?)
}

/// 1D scan written as `name`.csv with its extrema.
fn line(
    ctx: &Ctx,
    name: &str,
    label: String,
    sys: &PairSystem<f64>,
    pulse: &PulseConfig<f64>,
    grid: &ScanGrid<f64>,
    part: Part,
) -> Result<Artifact> {
    let samples = scan_1d_with(grid, sys, pulse, options(part))?;
    line_artifact(ctx, name, label, sys, &samples)
}

fn line_artifact(ctx: &Ctx, name: &str, label: String, sys: &PairSystem<f64>, samples: &[Sample]) -> Result<Artifact> {
    let scale = ctx.scale(samples.iter().flat_map(|s| [s.s_i, s.s_ii, s.s_total]));
    let file = format!("{name}.csv");
    ctx.write(&file, &csv::line_scan(samples, scale))?;
    let (features, note) = match (extrema(sys, samples, |s| s.s_total), extrema(sys, samples, |s| s.s_i)) {
        (Ok(s_total), Ok(s_i)) => (Some(LineFeatures { s_total, s_i }), None),
        (Err(e), _) | (_, Err(e)) => (None, Some(format!("no extrema: {e}"))),
    };
    let mut plots = Vec::new();
    if ctx.cli.svg {
        let w: Vec<f64> = samples.iter().map(|s| s.omega).collect();
        let total: Vec<f64> = samples.iter().map(|s| s.s_total * scale).collect();
        let s_i: Vec<f64> = samples.iter().map(|s| s.s_i * scale).collect();
        let series =
            [svg::Series { label: "S_I + S_II", x: &w, y: &total }, svg::Series { label: "S_I", x: &w, y: &s_i }];
        let plot = format!("{name}.svg");
        ctx.write(&plot, &svg::line_plot(&series, "w (cm^-1)", "S (arb. units)")?)?;
        plots.push(plot);
    }
    Ok(Artifact { file, label, scale, plots, extrema: features, ridges: None, note })
}

/// 2D map written as `name`.csv, its ridges as `name`_ridges.csv.
fn map(
    ctx: &Ctx,
    name: &str,
    label: String,
    sys: &PairSystem<f64>,
    pulse: &PulseConfig<f64>,
    grid: &ScanGrid<f64>,
    part: Part,
) -> Result<Artifact> {
    let m: SignalMatrix<f64> = scan_2d_with(grid, sys, pulse, options(part))?;
    let f = field(part);
    let values = m.values(f);
    let scale = ctx.scale(values.iter().copied());
    let file = format!("{name}.csv");
    ctx.write(&file, &csv::map(&m, &values, scale))?;
    let report = ridge_detect_matrix(&m, f, &RidgeOptions::for_linewidth(linewidths(sys).1))?;
    let ridge_file = format!("{name}_ridges.csv");
    ctx.write(&ridge_file, &csv::ridges(&report))?;
    let mut plots = Vec::new();
    if ctx.cli.svg {
        let scaled: Vec<f64> = values.iter().map(|v| v * scale).collect();
        let y_label = match m.rows {
            RowAxis::Pump => "w_p (cm^-1)",
            RowAxis::Sum => "w + w_p (cm^-1)",
            RowAxis::Difference => "w - w_p (cm^-1)",
        };
        let plot = format!("{name}.svg");
        ctx.write(&plot, &svg::heatmap(&m.omega_axis, &m.row_axis, &scaled, "w (cm^-1)", y_label)?)?;
        plots.push(plot);
    }
    let ridges = Some(MapFeatures { file: ridge_file, ridges: report.ridges });
    Ok(Artifact { file, label, scale, plots, extrema: None, ridges, note: None })
}

fn model(cli: &Cli) -> Result<(PairSystem<f64>, PulseConfig<f64>)> {
    match &cli.config {
        Some(path) => Ok(Config::load(path)?.build()?),
        None => Ok((setups::reference_pair(), setups::pulse(PhaseProfile::constant(0.0)))),
    }
}

fn span_grid(cli: &Cli, from: f64, to: f64, omega_p: f64) -> Result<ScanGrid<f64>> {
    let valid = cli.grid_step > 0.0 && to > from;
    if !valid {
        return Err(CliError::Usage(format!(
            "need --from < --to and --grid-step > 0, got {from}, {to}, {}",
            cli.grid_step
        )));
    }
    Ok(ScanGrid::one_d(arange(from, to, cli.grid_step), omega_p))
}

fn residue_pulse(pulse: &PulseConfig<f64>, c2: Option<f64>) -> (PulseConfig<f64>, f64) {
    let configured = (pulse.phase.kind == PhaseKind::Chirp && pulse.phase.c2() != 0.0).then(|| pulse.phase.c2());
    let c2 = c2.or(configured).unwrap_or(setups::RESIDUE_C2);
    let reference = if pulse.phase.kind == PhaseKind::Chirp { pulse.phase.reference } else { setups::CHIRP_REFERENCE };
    let mut p = pulse.clone();
    p.phase = PhaseProfile::chirp(c2, reference);
    (p, c2)
}

fn row_axis(rows: Rows) -> RowAxis {
    match rows {
        Rows::Sum => RowAxis::Sum,
        Rows::Difference => RowAxis::Difference,
    }
}

fn rows_name(rows: RowAxis) -> &'static str {
    match rows {
        RowAxis::Pump => "pump",
        RowAxis::Sum => "sum",
        RowAxis::Difference => "difference",
    }
}

/// Runs `cli`, writing every file and `summary.json` into `cli.out`.
pub fn run(cli: &Cli) -> Result<Outcome> {
    std::fs::create_dir_all(&cli.out).map_err(|e| CliError::io(&cli.out, e))?;
    let ctx = Ctx { cli, out: cli.out.clone() };
    let mut summary = Summary {
        command: String::new(),
        normalize: cli.normalize,
        grid_step: cli.grid_step,
        map_points: None,
        system: None,
        pulse: None,
        artifacts: Vec::new(),
        oracle: None,
    };
    let mut passed = true;
    match &cli.command {
        Command::Presets(args) => {
            summary.command = format!("presets {}", preset_name(args.name));
            summary.artifacts = preset(&ctx, args, &mut summary.map_points)?;
        }
        other => {
            let (sys, pulse) = model(cli)?;
            match other {
                Command::Scan1d(a) => {
                    summary.command = "scan1d".into();
                    summary.artifacts = vec![scan1d(&ctx, a, &sys, &pulse)?];
                }
                Command::Scan2d(a) => {
                    summary.command = "scan2d".into();
                    summary.map_points = Some(a.points);
                    summary.artifacts = vec![scan2d(&ctx, a, &sys, &pulse)?];
                }
                Command::ResidueMap(a) => {
                    summary.command = "residue-map".into();
                    summary.map_points = Some(a.points);
                    summary.artifacts = vec![residue(&ctx, a, &sys, &pulse)?];
                }
                Command::DistanceSweep(a) => {
                    summary.command = "distance-sweep".into();
                    summary.artifacts = sweep(&ctx, a, &sys, &pulse)?;
                }
                Command::OracleCheck(a) => {
                    summary.command = "oracle-check".into();
                    let (artifact, oracle) = oracle(&ctx, a, &sys, &pulse)?;
                    passed = oracle.passed;
                    summary.artifacts = vec![artifact];
                    summary.oracle = Some(oracle);
                }
                Command::Presets(_) => unreachable!("handled above"),
            }
            summary.system = Some(sys);
            summary.pulse = Some(pulse);
        }
    }
    let text = serde_json::to_string_pretty(&summary)? + "\n";
    ctx.write(SUMMARY_FILE, &text)?;
    Ok(Outcome { summary, passed })
}

fn scan1d(ctx: &Ctx, a: &Scan1dArgs, sys: &PairSystem<f64>, pulse: &PulseConfig<f64>) -> Result<Artifact> {
    let pulse = match a.omega_p {
        Some(wp) => pulse.clone().with_omega_p(wp),
        None => pulse.clone(),
    };
    let grid = span_grid(ctx.cli, a.span.from, a.span.to, pulse.omega_p)?;
    let label = format!("{} at w_p = {}", part_name(a.part), pulse.omega_p);
    line(ctx, "scan1d", label, sys, &pulse, &grid, a.part)
}

fn scan2d(ctx: &Ctx, a: &Scan2dArgs, sys: &PairSystem<f64>, pulse: &PulseConfig<f64>) -> Result<Artifact> {
    let grid = ScanGrid::two_d(linspace(a.span.from, a.span.to, a.points), linspace(a.pump_from, a.pump_to, a.points));
    map(ctx, "scan2d", part_name(a.part).to_string(), sys, pulse, &grid, a.part)
}

fn residue(ctx: &Ctx, a: &ResidueArgs, sys: &PairSystem<f64>, pulse: &PulseConfig<f64>) -> Result<Artifact> {
    let (pulse, c2) = residue_pulse(pulse, a.c2);
    let rows = row_axis(a.rows);
    let grid = setups::residue_grid(rows, a.points).residue(c2);
    let name = format!("residue_{}_{}", rows_name(rows), part_name(a.part));
    let label = format!("{} residue, C2 = {c2:e}", part_name(a.part));
    map(ctx, &name, label, sys, &pulse, &grid, a.part)
}

fn sweep(ctx: &Ctx, a: &SweepArgs, sys: &PairSystem<f64>, pulse: &PulseConfig<f64>) -> Result<Vec<Artifact>> {
    let grid = span_grid(ctx.cli, a.span.from, a.span.to, pulse.omega_p)?;
    distance_sweep(&grid, sys, pulse, &a.r_over_lambda, SignalOptions::default())?
        .into_iter()
        .map(|(x, samples)| line_artifact(ctx, &format!("distance_{x}"), format!("r / lambda_a = {x}"), sys, &samples))
        .collect()
}

fn oracle(
    ctx: &Ctx,
    a: &OracleArgs,
    sys: &PairSystem<f64>,
    pulse: &PulseConfig<f64>,
) -> Result<(Artifact, OracleSummary)> {
    let clearance = linewidths(sys).0;
    let points = comparison_points(sys, a.points, (1000.0, 27000.0), (2000.0, 16000.0), clearance, a.seed)?;
    let model = SignalModel::with_options(sys.clone(), pulse.clone(), options(a.part))?;
    let rows = compare_signal(&model, &QuadratureSpec::default(), &points, include(a.part))?;
    let worst = worst_relative(&rows);
    let file = "oracle_report.csv".to_string();
    ctx.write(&file, &csv::oracle_report(&rows))?;
    let summary = OracleSummary {
        points: rows.len(),
        worst_relative: worst,
        tolerance: ctx.cli.tolerance,
        passed: worst <= ctx.cli.tolerance,
    };
    let label = format!("{} closed form against quadrature, seed {}", part_name(a.part), a.seed);
    Ok((Artifact { file, label, scale: 1.0, plots: vec![], extrema: None, ridges: None, note: None }, summary))
}

fn preset_name(p: Preset) -> &'static str {
    match p {
        Preset::Fig4Row1 => "fig4-row1",
        Preset::Fig4Row2 => "fig4-row2",
        Preset::Fig4Row3 => "fig4-row3",
        Preset::Fig5 => "fig5",
        Preset::Fig6 => "fig6",
    }
}

fn species_slug(s: Species) -> &'static str {
    match s {
        Species::AB => "ab",
        Species::AA => "aa",
        Species::BB => "bb",
    }
}

fn preset(ctx: &Ctx, a: &PresetArgs, map_points: &mut Option<usize>) -> Result<Vec<Artifact>> {
    let sys = setups::reference_pair();
    let grid = setups::line_grid(ctx.cli.grid_step);
    let phases: Vec<(String, String, PhaseProfile<f64>)> = match a.name {
        Preset::Fig4Row1 => setups::CONSTANT_PHASES
            .iter()
            .map(|&p| (format!("fig4_row1_dphi_{p:.4}"), format!("constant phase {p}"), PhaseProfile::constant(p)))
            .collect(),
        Preset::Fig4Row2 => setups::DELAYS_FS
            .iter()
            .map(|&t| (format!("fig4_row2_delay_{t}fs"), format!("delay {t} fs"), PhaseProfile::delay_fs(t)))
            .collect(),
        Preset::Fig4Row3 => setups::CHIRP_RATES
            .iter()
            .map(|&c| {
                let label = format!("chirp C2 = {c:e} about {}", setups::CHIRP_REFERENCE);
                (format!("fig4_row3_c2_{c:e}"), label, PhaseProfile::chirp(c, setups::CHIRP_REFERENCE))
            })
            .collect(),
        Preset::Fig5 => {
            *map_points = Some(a.points);
            return fig5(ctx, a.points);
        }
        Preset::Fig6 => {
            let flat = setups::pulse(PhaseProfile::constant(0.0));
            return setups::DISTANCES
                .iter()
                .map(|&x| {
                    let label = format!("r / lambda_a = {x}");
                    line(ctx, &format!("fig6_r_{x}"), label, &setups::pair(Species::AB, x), &flat, &grid, Part::Total)
                })
                .collect();
        }
    };
    phases
        .into_iter()
        .map(|(name, label, phase)| line(ctx, &name, label, &sys, &setups::pulse(phase), &grid, Part::Total))
        .collect()
}

fn fig5(ctx: &Ctx, n: usize) -> Result<Vec<Artifact>> {
    let pulse = setups::chirped_pulse(setups::RESIDUE_C2);
    let mut out = Vec::new();
    for species in Species::ALL {
        let sys = setups::pair(species, setups::DEFAULT_R_OVER_LAMBDA);
        let mut parts = vec![(RowAxis::Sum, Part::Total), (RowAxis::Difference, Part::Total)];
        if species == Species::AB {
            parts.push((RowAxis::Sum, Part::SI));
        }
        for (rows, part) in parts {
            let name = format!("fig5_{}_{}_{}", species_slug(species), rows_name(rows), part_name(part));
            let label = format!("{} {} residue, C2 = {:e}", species.label(), part_name(part), setups::RESIDUE_C2);
            out.push(map(ctx, &name, label, &sys, &pulse, &setups::residue_grid(rows, n), part)?);
        }
    }
    Ok(out)
}

/// Names of the files a run wrote, relative to its output directory.
pub fn files(summary: &Summary) -> Vec<String> {
    let mut v = vec![SUMMARY_FILE.to_string()];
    for a in &summary.artifacts {
        v.push(a.file.clone());
        v.extend(a.plots.iter().cloned());
        if let Some(r) = &a.ridges {
            v.push(r.file.clone());
        }
    }
    v
}

/// Ridges of one family in an artifact, for callers inspecting a summary.
pub fn intercepts(artifact: &Artifact, kind: RidgeKind) -> Vec<f64> {
    artifact.ridges.iter().flat_map(|m| m.ridges.iter()).filter(|r| r.kind == kind).map(|r| r.intercept).collect()
}
