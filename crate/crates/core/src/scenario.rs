//! Parameter sweeps over simulated experiments.
//!
//! A sweep point is one `(source kind, swept value)` pair. Each point draws its
//! frames from a seed derived from the master seed, the source kind and the
//! bit pattern of the swept value, so points are independent jobs and the
//! output does not depend on scheduling or on which other points are present.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{self, BackgroundSpec, Scenario, SourceKind};
use crate::error::{Error, Result};
use crate::estimator::{self, CovarianceRecord, MIN_BATCHES};
use crate::sampler::{self, Frame, Hypothesis, SeedSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweptParameter {
    /// Mean detected background photons per pixel, `<N_b>`.
    BackgroundMean,
    /// Frames averaged per decision in the error probability.
    ImagesPerDecision,
    /// Mean photons per mode of the source.
    Mu,
}

impl SweptParameter {
    pub fn label(self) -> &'static str {
        match self {
            SweptParameter::BackgroundMean => "background_mean",
            SweptParameter::ImagesPerDecision => "images_per_decision",
            SweptParameter::Mu => "mu",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    Epsilon,
    /// Covariance SNR per pixel pair.
    Snr,
    /// Mean per-frame covariance with and without target (two rows).
    Covariance,
    /// Minimum error probability.
    Perr,
}

impl Output {
    fn tag(self) -> u64 {
        match self {
            Output::Epsilon => 1,
            Output::Snr => 2,
            Output::Covariance => 3,
            Output::Perr => 4,
        }
    }

    fn needs_target_out(self) -> bool {
        !matches!(self, Output::Epsilon)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub name: String,
    pub base: Scenario,
    pub swept_parameter: SweptParameter,
    pub values: Vec<f64>,
    pub sources: Vec<SourceKind>,
    pub outputs: Vec<Output>,
    pub seed: SeedSpec,
    pub emit_analytic: bool,
    pub images_per_decision: usize,
    pub bootstrap_resamples: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::invalid("sweep.values", "must not be empty"));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("sweep.values", "must be finite"));
        }
        if self.values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("sweep.values", "must be strictly increasing"));
        }
        if self.sources.is_empty() {
            return Err(Error::invalid("sweep.sources", "must not be empty"));
        }
        if self.outputs.is_empty() {
            return Err(Error::invalid("sweep.outputs", "must not be empty"));
        }
        if self.images_per_decision == 0 {
            return Err(Error::invalid("scenario.images_per_decision", "must be >= 1"));
        }
        self.base.validate()?;
        for &kind in &self.sources {
            for &value in &self.values {
                self.point_scenario(kind, value)?.0.validate()?;
            }
        }
        Ok(())
    }

    /// Scenario and images-per-decision of one sweep point.
    pub fn point_scenario(&self, kind: SourceKind, value: f64) -> Result<(Scenario, usize)> {
        let mut scenario = self.base.with_source_kind(kind);
        let mut per_decision = self.images_per_decision;
        match self.swept_parameter {
            SweptParameter::BackgroundMean => scenario.background.mean_total = value,
            SweptParameter::Mu => scenario.source.mu = value,
            SweptParameter::ImagesPerDecision => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(Error::invalid("sweep.values", format!("images per decision must be a positive integer, got {value}")));
                }
                per_decision = value as usize;
            }
        }
        Ok((scenario, per_decision))
    }
}

/// Seed of the frames of one sweep point.
pub fn point_seed(master: &SeedSpec, kind: SourceKind, value: f64) -> SeedSpec {
    let kind_tag = match kind {
        SourceKind::TwinBeam => 1,
        SourceKind::SplitThermal => 2,
    };
    master.derive(&[kind_tag, value.to_bits()])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub source: SourceKind,
    pub param: SweptParameter,
    pub value: f64,
    pub metric: &'static str,
    pub estimate: Option<f64>,
    pub uncertainty: Option<f64>,
    pub analytic: Option<f64>,
    pub flag: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

pub const CSV_HEADER: [&str; 8] = ["source", "param", "value", "metric", "estimate", "uncertainty", "analytic", "flag"];

/// Shortest round-trip decimal, switching to exponent form for very small or
/// very large magnitudes.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_default()
}

impl SweepResult {
    pub fn rows_for<'a>(&'a self, source: SourceKind, metric: &'a str) -> impl Iterator<Item = &'a SweepRow> + 'a {
        self.rows.iter().filter(move |r| r.source == source && r.metric == metric)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(CSV_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.source.label().to_string(),
                r.param.label().to_string(),
                format_number(r.value),
                r.metric.to_string(),
                fmt_opt(r.estimate),
                fmt_opt(r.uncertainty),
                fmt_opt(r.analytic),
                r.flag.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

struct PointData {
    /// Kept only when epsilon is requested; it needs the pixel counts.
    frames_in: Option<Vec<Frame>>,
    records_in: Vec<CovarianceRecord>,
    records_out: Option<Vec<CovarianceRecord>>,
}

fn simulate_point(scenario: &Scenario, seed: &SeedSpec, need_frames: bool, need_out: bool) -> Result<PointData> {
    let (frames_in, records_in) = if need_frames {
        let frames = sampler::generate_frames(scenario, Hypothesis::In, seed, scenario.images)?;
        let records = estimator::covariance_records(&frames, Hypothesis::In)?;
        (Some(frames), records)
    } else {
        (None, estimator::simulate_records(scenario, Hypothesis::In, seed, scenario.images)?)
    };
    let records_out = if need_out {
        Some(estimator::simulate_records(scenario, Hypothesis::Out, seed, scenario.images)?)
    } else {
        None
    };
    Ok(PointData {
        frames_in,
        records_in,
        records_out,
    })
}

struct Measured {
    estimate: Option<f64>,
    uncertainty: Option<f64>,
    flag: String,
}

/// Applies `f` to the point data, turning any failure into a flag.
fn measure<F>(data: &std::result::Result<PointData, &'static str>, f: F) -> Measured
where
    F: FnOnce(&PointData) -> Result<(f64, Option<f64>)>,
{
    let failed = |flag: &str| Measured {
        estimate: None,
        uncertainty: None,
        flag: flag.to_string(),
    };
    match data {
        Err(code) => failed(code),
        Ok(d) => match f(d) {
            Ok((estimate, uncertainty)) => Measured {
                estimate: Some(estimate),
                uncertainty,
                flag: String::new(),
            },
            Err(e) => failed(e.code()),
        },
    }
}

fn run_point(spec: &SweepSpec, kind: SourceKind, value: f64) -> Vec<SweepRow> {
    let need_out = spec.outputs.iter().any(|o| o.needs_target_out());
    let need_frames = spec.outputs.contains(&Output::Epsilon);
    let seed = point_seed(&spec.seed, kind, value);
    let (scenario, per_decision, data) = match spec.point_scenario(kind, value) {
        Ok((scenario, per_decision)) => {
            let data = simulate_point(&scenario, &seed, need_frames, need_out).map_err(|e| e.code());
            (scenario, per_decision, data)
        }
        Err(e) => (spec.base, spec.images_per_decision, Err(e.code())),
    };
    let k_sqrt = (scenario.pixel_pairs as f64).sqrt();
    let resamples = spec.bootstrap_resamples;

    let mut rows = Vec::new();
    let mut push = |metric: &'static str, m: Measured, analytic: Option<f64>| {
        rows.push(SweepRow {
            source: kind,
            param: spec.swept_parameter,
            value,
            metric,
            estimate: m.estimate,
            uncertainty: m.uncertainty,
            analytic: if spec.emit_analytic { analytic } else { None },
            flag: m.flag,
        });
    };

    for &output in &spec.outputs {
        let boot = seed.derive(&[0xB007, output.tag()]);
        match output {
            Output::Epsilon => {
                let m = measure(&data, |d| {
                    let frames = d.frames_in.as_deref().expect("frames kept for epsilon");
                    let e = estimator::epsilon_hat(frames)?;
                    Ok((e.epsilon, estimator::bootstrap_epsilon(frames, resamples, &boot)))
                });
                push("epsilon", m, analytic::epsilon(&scenario).ok());
            }
            Output::Covariance => {
                let cov_in = analytic::covariance_hat_mean(&scenario).ok();
                let cov_out = analytic::covariance_hat_mean(&scenario.with_target(false)).ok();
                for (metric, hypothesis, analytic_value) in [
                    ("covariance_in", Hypothesis::In, cov_in),
                    ("covariance_out", Hypothesis::Out, cov_out),
                ] {
                    let m = measure(&data, |d| {
                        let records = match hypothesis {
                            Hypothesis::In => &d.records_in,
                            Hypothesis::Out => d.records_out.as_ref().expect("out records generated"),
                        };
                        let values: Vec<f64> = records.iter().map(|r| r.delta12).collect();
                        let mean = estimator::mean_and_variance(&values).0;
                        let tagged = boot.derive(&[hypothesis as u64]);
                        Ok((mean, estimator::bootstrap_mean(&values, resamples, &tagged)))
                    });
                    push(metric, m, analytic_value);
                }
            }
            Output::Snr => {
                let m = measure(&data, |d| {
                    let out = d.records_out.as_ref().expect("out records generated");
                    let f = estimator::snr_hat(&d.records_in, out)?;
                    let sd = estimator::bootstrap_snr(&d.records_in, out, resamples, &boot);
                    Ok((f / k_sqrt, sd.map(|s| s / k_sqrt)))
                });
                push("snr", m, analytic::snr(&scenario).ok());
            }
            Output::Perr => {
                let m = measure(&data, |d| {
                    let out = d.records_out.as_ref().expect("out records generated");
                    let p = estimator::perr_hat(&d.records_in, out, per_decision)?;
                    let sd = estimator::bootstrap_perr(&d.records_in, out, per_decision, resamples, &boot);
                    Ok((p.perr, sd))
                });
                let a = analytic::error_probability(&scenario, per_decision).ok().map(|p| p.perr);
                push("perr", m, a);
            }
        }
    }
    rows
}

/// Runs every point of the sweep. Estimator failures at a point are reported in
/// the `flag` column; only an invalid spec aborts.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let jobs: Vec<(SourceKind, f64)> = spec
        .sources
        .iter()
        .flat_map(|&kind| spec.values.iter().map(move |&v| (kind, v)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(kind, value)| run_point(spec, kind, value))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    Ok(SweepResult { rows })
}

/// `n` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| {
                    let v = (a + (b - a) * i as f64 / (n - 1) as f64).exp();
                    // Keep four significant digits so values print compactly.
                    let scale = 10f64.powi(3 - v.log10().floor() as i32);
                    (v * scale).round() / scale
                })
                .collect()
        }
    }
}

#[derive(Debug, Serialize)]
struct SidecarSweep<'a> {
    name: &'a str,
    seed: String,
    parameter: &'static str,
    values: &'a [f64],
    sources: Vec<&'static str>,
    outputs: &'a [Output],
    images_per_decision: usize,
    frames_per_hypothesis: usize,
    decision_batches: usize,
    bootstrap_resamples: usize,
    emit_analytic: bool,
}

#[derive(Debug, Serialize)]
struct Sidecar<'a> {
    sweep: SidecarSweep<'a>,
    scenario: &'a Scenario,
    notes: BTreeMap<&'static str, &'static str>,
}

/// Structured key-value description of the resolved sweep configuration.
pub fn metadata_toml(spec: &SweepSpec) -> Result<String> {
    let mut notes = BTreeMap::new();
    notes.insert(
        "background_mean",
        "mean detected background photons per pixel, <N_b>; not a per-mode value",
    );
    notes.insert("snr", "covariance SNR per pixel pair, f_SNR / sqrt(K)");
    notes.insert(
        "covariance",
        "mean over frames of the per-frame covariance E[N1 N2] - E[N1] E[N2] (divisor K), photons^2; analytic value includes the (K-1)/K factor of that divisor",
    );
    notes.insert("epsilon", "generalized Cauchy-Schwarz parameter pooled over all pixels and frames");
    notes.insert(
        "perr",
        "minimum equal-prior error probability; decision on the average of images_per_decision frames",
    );
    notes.insert("uncertainty", "bootstrap standard deviation over resampled frames or decision batches");
    notes.insert("analytic", "closed-form value; independent of the seed");
    notes.insert(
        "seed",
        "master seed; each point draws from a stream keyed by source kind and swept value, so sweeps sharing a seed share source draws",
    );
    let sidecar = Sidecar {
        sweep: SidecarSweep {
            name: &spec.name,
            seed: spec.seed.master_seed.to_string(),
            parameter: spec.swept_parameter.label(),
            values: &spec.values,
            sources: spec.sources.iter().map(|s| s.label()).collect(),
            outputs: &spec.outputs,
            images_per_decision: spec.images_per_decision,
            frames_per_hypothesis: spec.base.images,
            decision_batches: spec.base.images / spec.images_per_decision.max(1),
            bootstrap_resamples: spec.bootstrap_resamples,
            emit_analytic: spec.emit_analytic,
        },
        scenario: &spec.base,
        notes,
    };
    toml::to_string(&sidecar).map_err(|e| Error::Config(e.to_string()))
}

/// Figures whose sweeps have presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Figure {
    /// Cauchy-Schwarz parameter versus background.
    Fig2,
    /// Covariance SNR versus background.
    Fig3,
    /// Covariance with and without target versus background.
    Fig4,
    /// Error probability versus background.
    Fig5,
}

impl Figure {
    pub fn label(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
        }
    }
}

/// One preset sweep: name, source kinds, background modes, frames per hypothesis,
/// images per decision.
struct PresetRun {
    name: String,
    sources: Vec<SourceKind>,
    background_modes: u64,
    frames: usize,
    images_per_decision: usize,
}

fn preset_run(name: &str, sources: &[SourceKind], background_modes: u64, frames: usize, per_decision: usize) -> PresetRun {
    PresetRun {
        name: name.to_string(),
        sources: sources.to_vec(),
        background_modes,
        frames,
        images_per_decision: per_decision,
    }
}

pub fn figure_background_values(figure: Figure) -> Vec<f64> {
    match figure {
        Figure::Fig2 => {
            let mut v = vec![0.0];
            v.extend(log_spaced(10.0, 1e5, 9));
            v
        }
        Figure::Fig3 => log_spaced(100.0, 1e5, 7),
        Figure::Fig4 => log_spaced(300.0, 3e4, 5),
        Figure::Fig5 => log_spaced(10.0, 1e5, 9),
    }
}

/// Preset sweeps for a figure, built on `base` (source and channel settings,
/// pixel pairs, read noise). `frames` replaces the per-sweep frame budgets.
pub fn figure_presets(
    figure: Figure,
    base: &Scenario,
    seed: SeedSpec,
    frames: Option<usize>,
    bootstrap_resamples: usize,
) -> Vec<SweepSpec> {
    use SourceKind::{SplitThermal as Th, TwinBeam as Tw};
    let (outputs, runs) = match figure {
        Figure::Fig2 => (
            vec![Output::Epsilon],
            vec![
                preset_run("mb57", &[Tw, Th], 57, 2000, 10),
                preset_run("mb1300", &[Tw, Th], 1300, 2000, 10),
            ],
        ),
        Figure::Fig3 => (
            vec![Output::Snr],
            vec![
                preset_run("tw_mb1300", &[Tw], 1300, 2000, 10),
                preset_run("tw_mb57", &[Tw], 57, 4000, 10),
                preset_run("th_mb1300", &[Th], 1300, 6000, 10),
            ],
        ),
        Figure::Fig4 => (
            vec![Output::Covariance],
            vec![
                preset_run("tw_mb1300", &[Tw], 1300, 2000, 10),
                preset_run("th_mb1300", &[Th], 1300, 6000, 10),
                preset_run("tw_mb57", &[Tw], 57, 4000, 10),
            ],
        ),
        Figure::Fig5 => (
            vec![Output::Perr],
            vec![
                preset_run("nimg10_tw_mb57", &[Tw], 57, 5000, 10),
                preset_run("nimg10_tw_mb1300", &[Tw], 1300, 5000, 10),
                preset_run("nimg10_th_mb1300", &[Th], 1300, 5000, 10),
                preset_run("nimg100_tw_mb57", &[Tw], 57, 10_000, 100),
                preset_run("nimg100_tw_mb1300", &[Tw], 1300, 10_000, 100),
                preset_run("nimg100_th_mb1300", &[Th], 1300, 10_000, 100),
            ],
        ),
    };
    runs.into_iter()
        .map(|run| {
            let mut scenario = *base;
            scenario.background = BackgroundSpec {
                modes: run.background_modes,
                mean_total: 0.0,
            };
            scenario.images = frames.unwrap_or(run.frames).max(1);
            if figure == Figure::Fig5 {
                scenario.images = scenario.images.max(MIN_BATCHES * run.images_per_decision);
            }
            SweepSpec {
                name: format!("{}_{}", figure.label(), run.name),
                base: scenario,
                swept_parameter: SweptParameter::BackgroundMean,
                values: figure_background_values(figure),
                sources: run.sources,
                outputs: outputs.clone(),
                seed,
                emit_analytic: true,
                images_per_decision: run.images_per_decision,
                bootstrap_resamples,
            }
        })
        .collect()
}
