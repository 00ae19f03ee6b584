//! Command-line front end.
//!
//! Settings come from built-in defaults (the experimental setup), then an
//! optional TOML file given with `--config`, then individual flags. Every flag
//! has a dotted name matching the TOML key (`--channel.eta1`) and most have a
//! short alias (`--eta1`).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analytic::{self, Scenario, SourceKind};
use crate::error::{Error, Result};
use crate::estimator::{self, DEFAULT_BOOTSTRAP};
use crate::sampler::{self, Hypothesis, SeedSpec};
use crate::scenario::{self, format_number, Figure};

#[derive(Debug, Parser)]
#[command(name = "qillum", version, about = "Photon-counting quantum illumination simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print closed-form moments, epsilon, SNR and error probability.
    Analytic {
        #[command(flatten)]
        settings: Settings,
        /// Also write the values as a two-column CSV.
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
    },
    /// Simulate one scenario and estimate every quantity from the frames.
    Simulate {
        #[command(flatten)]
        settings: Settings,
        /// Skip writing frames.csv (it holds every photon count).
        #[arg(long)]
        no_frames: bool,
    },
    /// Run the preset sweeps behind one figure.
    Reproduce {
        #[arg(value_enum)]
        figure: FigureArg,
        #[command(flatten)]
        settings: Settings,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureArg {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl From<FigureArg> for Figure {
    fn from(f: FigureArg) -> Self {
        match f {
            FigureArg::Fig2 => Figure::Fig2,
            FigureArg::Fig3 => Figure::Fig3,
            FigureArg::Fig4 => Figure::Fig4,
            FigureArg::Fig5 => Figure::Fig5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetState {
    Present,
    Absent,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Settings {
    /// TOML file with [source], [channel], [background], [scenario], [sweep] and [run] tables.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Source kind: twin-beam (quantum) or split-thermal (classical).
    #[arg(long = "source.kind", visible_alias = "source", value_name = "KIND")]
    pub source_kind: Option<SourceKind>,
    /// Mean photons per mode, mu.
    #[arg(long = "source.mu", visible_alias = "mu", value_name = "MU")]
    pub mu: Option<f64>,
    /// Modes per pixel, M.
    #[arg(long = "source.modes", visible_alias = "modes", value_name = "M")]
    pub modes: Option<u64>,
    /// Beam-splitter transmissivity t of the split thermal source.
    #[arg(long = "source.split_ratio", visible_alias = "split-ratio", value_name = "T")]
    pub split_ratio: Option<f64>,

    /// Detection efficiency of the reference arm, eta1 in [0, 1].
    #[arg(long = "channel.eta1", visible_alias = "eta1", value_name = "ETA1")]
    pub eta1: Option<f64>,
    /// Detection efficiency of the probe arm, eta2 in [0, 1].
    #[arg(long = "channel.eta2", visible_alias = "eta2", value_name = "ETA2")]
    pub eta2: Option<f64>,
    /// Target reflectivity r in [0, 1].
    #[arg(long = "channel.reflectivity", visible_alias = "reflectivity", value_name = "R")]
    pub reflectivity: Option<f64>,
    /// Target present or absent.
    #[arg(long = "channel.target", visible_alias = "target", value_name = "STATE")]
    pub target: Option<TargetState>,
    /// Spatial mode-matching factor in [0, 1].
    #[arg(long = "channel.mode_match", visible_alias = "mode-match", value_name = "F")]
    pub mode_match: Option<f64>,

    /// Background modes per pixel, M_b.
    #[arg(long = "background.modes", visible_alias = "background-modes", value_name = "M_B")]
    pub background_modes: Option<u64>,
    /// Mean detected background photons per pixel, <N_b> (not per mode).
    #[arg(long = "background.mean", visible_alias = "background", value_name = "N_B")]
    pub background_mean: Option<f64>,

    /// Pixel pairs per frame, K.
    #[arg(long = "scenario.pixel_pairs", visible_alias = "pixel-pairs", value_name = "K")]
    pub pixel_pairs: Option<usize>,
    /// Frames per hypothesis. Overrides the preset budgets of `reproduce`.
    #[arg(long = "scenario.images", visible_alias = "frames", value_name = "N")]
    pub images: Option<usize>,
    /// Frames averaged per decision, N_img.
    #[arg(long = "scenario.images_per_decision", visible_alias = "nimg", value_name = "N_IMG")]
    pub images_per_decision: Option<usize>,
    /// Gaussian read noise standard deviation, in photons.
    #[arg(long = "scenario.read_noise", visible_alias = "read-noise", value_name = "SIGMA")]
    pub read_noise: Option<f64>,

    /// Bootstrap resamples for uncertainties.
    #[arg(long = "sweep.bootstrap", visible_alias = "bootstrap", value_name = "B")]
    pub bootstrap: Option<usize>,

    /// Master seed. A fresh seed is drawn and reported when omitted.
    #[arg(long = "run.seed", visible_alias = "seed", value_name = "SEED")]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long = "run.threads", visible_alias = "threads", value_name = "N")]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long = "run.out", visible_alias = "out", value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceTable {
    pub kind: Option<SourceKind>,
    pub mu: Option<f64>,
    pub modes: Option<u64>,
    pub split_ratio: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelTable {
    pub eta1: Option<f64>,
    pub eta2: Option<f64>,
    pub reflectivity: Option<f64>,
    pub target: Option<TargetState>,
    pub mode_match: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackgroundTable {
    pub modes: Option<u64>,
    pub mean: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioTable {
    pub pixel_pairs: Option<usize>,
    pub images: Option<usize>,
    pub images_per_decision: Option<usize>,
    pub read_noise: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepTable {
    pub bootstrap: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunTable {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

/// Contents of a `--config` file. Every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub source: SourceTable,
    pub channel: ChannelTable,
    pub background: BackgroundTable,
    pub scenario: ScenarioTable,
    pub sweep: SweepTable,
    pub run: RunTable,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    fn from_flags(s: &Settings) -> Self {
        ConfigFile {
            source: SourceTable {
                kind: s.source_kind,
                mu: s.mu,
                modes: s.modes,
                split_ratio: s.split_ratio,
            },
            channel: ChannelTable {
                eta1: s.eta1,
                eta2: s.eta2,
                reflectivity: s.reflectivity,
                target: s.target,
                mode_match: s.mode_match,
            },
            background: BackgroundTable {
                modes: s.background_modes,
                mean: s.background_mean,
            },
            scenario: ScenarioTable {
                pixel_pairs: s.pixel_pairs,
                images: s.images,
                images_per_decision: s.images_per_decision,
                read_noise: s.read_noise,
            },
            sweep: SweepTable { bootstrap: s.bootstrap },
            run: RunTable {
                seed: s.seed,
                threads: s.threads,
                out: s.out.clone(),
            },
        }
    }

    /// Keys set in `other` replace those in `self`.
    fn overlay(self, other: ConfigFile) -> Self {
        fn pick<T>(base: Option<T>, over: Option<T>) -> Option<T> {
            over.or(base)
        }
        ConfigFile {
            source: SourceTable {
                kind: pick(self.source.kind, other.source.kind),
                mu: pick(self.source.mu, other.source.mu),
                modes: pick(self.source.modes, other.source.modes),
                split_ratio: pick(self.source.split_ratio, other.source.split_ratio),
            },
            channel: ChannelTable {
                eta1: pick(self.channel.eta1, other.channel.eta1),
                eta2: pick(self.channel.eta2, other.channel.eta2),
                reflectivity: pick(self.channel.reflectivity, other.channel.reflectivity),
                target: pick(self.channel.target, other.channel.target),
                mode_match: pick(self.channel.mode_match, other.channel.mode_match),
            },
            background: BackgroundTable {
                modes: pick(self.background.modes, other.background.modes),
                mean: pick(self.background.mean, other.background.mean),
            },
            scenario: ScenarioTable {
                pixel_pairs: pick(self.scenario.pixel_pairs, other.scenario.pixel_pairs),
                images: pick(self.scenario.images, other.scenario.images),
                images_per_decision: pick(self.scenario.images_per_decision, other.scenario.images_per_decision),
                read_noise: pick(self.scenario.read_noise, other.scenario.read_noise),
            },
            sweep: SweepTable {
                bootstrap: pick(self.sweep.bootstrap, other.sweep.bootstrap),
            },
            run: RunTable {
                seed: pick(self.run.seed, other.run.seed),
                threads: pick(self.run.threads, other.run.threads),
                out: pick(self.run.out, other.run.out),
            },
        }
    }
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub scenario: Scenario,
    /// Whether the frame count was given explicitly (it then overrides preset budgets).
    pub images_explicit: bool,
    pub images_per_decision: usize,
    pub bootstrap: usize,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: PathBuf,
}

pub const DEFAULT_IMAGES_PER_DECISION: usize = 10;

impl Resolved {
    /// The resolved settings as a config file; loading it reproduces the run.
    pub fn to_config(&self, seed: u64) -> ConfigFile {
        let s = &self.scenario;
        ConfigFile {
            source: SourceTable {
                kind: Some(s.source.kind),
                mu: Some(s.source.mu),
                modes: Some(s.source.modes),
                split_ratio: Some(s.source.split_ratio),
            },
            channel: ChannelTable {
                eta1: Some(s.channel.eta1),
                eta2: Some(s.channel.eta2),
                reflectivity: Some(s.channel.reflectivity),
                target: Some(if s.channel.target_present {
                    TargetState::Present
                } else {
                    TargetState::Absent
                }),
                mode_match: Some(s.channel.mode_match),
            },
            background: BackgroundTable {
                modes: Some(s.background.modes),
                mean: Some(s.background.mean_total),
            },
            scenario: ScenarioTable {
                pixel_pairs: Some(s.pixel_pairs),
                images: Some(s.images),
                images_per_decision: Some(self.images_per_decision),
                read_noise: Some(s.read_noise),
            },
            sweep: SweepTable {
                bootstrap: Some(self.bootstrap),
            },
            run: RunTable {
                seed: Some(seed),
                threads: None,
                out: None,
            },
        }
    }
}

/// Applies defaults, the config file and the flags, in that order, and validates.
pub fn resolve(settings: &Settings) -> Result<Resolved> {
    let file = match &settings.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let cfg = file.overlay(ConfigFile::from_flags(settings));
    let mut s = Scenario::experimental_setup();
    let src = &cfg.source;
    if let Some(kind) = src.kind {
        s.source.kind = kind;
    }
    s.source.mu = src.mu.unwrap_or(s.source.mu);
    s.source.modes = src.modes.unwrap_or(s.source.modes);
    s.source.split_ratio = src.split_ratio.unwrap_or(s.source.split_ratio);
    let ch = &cfg.channel;
    s.channel.eta1 = ch.eta1.unwrap_or(s.channel.eta1);
    s.channel.eta2 = ch.eta2.unwrap_or(s.channel.eta2);
    s.channel.reflectivity = ch.reflectivity.unwrap_or(s.channel.reflectivity);
    s.channel.mode_match = ch.mode_match.unwrap_or(s.channel.mode_match);
    if let Some(t) = ch.target {
        s.channel.target_present = t == TargetState::Present;
    }
    s.background.modes = cfg.background.modes.unwrap_or(s.background.modes);
    s.background.mean_total = cfg.background.mean.unwrap_or(s.background.mean_total);
    let sc = &cfg.scenario;
    s.pixel_pairs = sc.pixel_pairs.unwrap_or(s.pixel_pairs);
    s.images = sc.images.unwrap_or(s.images);
    s.read_noise = sc.read_noise.unwrap_or(s.read_noise);
    s.validate()?;

    let images_per_decision = sc.images_per_decision.unwrap_or(DEFAULT_IMAGES_PER_DECISION);
    if images_per_decision == 0 {
        return Err(Error::invalid("scenario.images_per_decision", "must be >= 1"));
    }
    if cfg.run.threads == Some(0) {
        return Err(Error::invalid("run.threads", "must be >= 1"));
    }
    Ok(Resolved {
        scenario: s,
        images_explicit: sc.images.is_some(),
        images_per_decision,
        bootstrap: cfg.sweep.bootstrap.unwrap_or(DEFAULT_BOOTSTRAP),
        seed: cfg.run.seed,
        threads: cfg.run.threads,
        out: cfg.run.out.unwrap_or_else(|| PathBuf::from("qillum-out")),
    })
}

/// Fresh seeds stay below 2^63 so they fit a TOML integer.
fn fresh_seed() -> u64 {
    rand::random::<u64>() >> 1
}

fn fmt_result(out: &mut String, key: &str, value: Result<f64>) {
    match value {
        Ok(v) => writeln!(out, "{key}={}", format_number(v)).unwrap(),
        Err(e) => writeln!(out, "{key}=undefined ({e})").unwrap(),
    }
}

fn analytic_report(r: &Resolved) -> Result<Vec<(String, String)>> {
    let s = &r.scenario;
    let mut text = String::new();
    writeln!(text, "source={}", s.source.kind).unwrap();
    writeln!(text, "mu={}", s.source.mu).unwrap();
    writeln!(text, "modes={}", s.source.modes).unwrap();
    writeln!(text, "eta1={}", s.channel.eta1).unwrap();
    writeln!(text, "eta2={}", s.channel.eta2).unwrap();
    writeln!(text, "reflectivity={}", s.channel.reflectivity).unwrap();
    writeln!(text, "target={}", if s.channel.target_present { "present" } else { "absent" }).unwrap();
    writeln!(text, "background_modes={}", s.background.modes).unwrap();
    writeln!(text, "background_mean={}", s.background.mean_total).unwrap();
    writeln!(text, "pixel_pairs={}", s.pixel_pairs).unwrap();
    writeln!(text, "images={}", s.images).unwrap();
    writeln!(text, "images_per_decision={}", r.images_per_decision).unwrap();
    let m = analytic::moments(s)?;
    for (k, v) in m.fields() {
        writeln!(text, "{k}={}", format_number(v)).unwrap();
    }
    fmt_result(&mut text, "epsilon", analytic::epsilon(s));
    fmt_result(&mut text, "epsilon_ideal", analytic::epsilon(&s.with_background_mean(0.0).with_target(true)));
    fmt_result(&mut text, "R", analytic::enhancement(s.source.mu));
    let snr = analytic::snr(s);
    fmt_result(&mut text, "snr_pair", analytic::snr(s));
    fmt_result(
        &mut text,
        "snr_total",
        snr.map(|v| v * ((s.pixel_pairs * s.images) as f64).sqrt()),
    );
    fmt_result(&mut text, "images_for_unit_snr", analytic::images_for_snr(s, 1.0));
    match analytic::error_probability(s, r.images_per_decision) {
        Ok(p) => {
            writeln!(text, "perr={}", format_number(p.perr)).unwrap();
            writeln!(text, "perr_threshold={}", format_number(p.threshold)).unwrap();
        }
        Err(e) => writeln!(text, "perr=undefined ({e})").unwrap(),
    }
    Ok(text
        .lines()
        .map(|l| {
            let (k, v) = l.split_once('=').expect("key=value line");
            (k.to_string(), v.to_string())
        })
        .collect())
}

fn join_lines(pairs: &[(String, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

fn create_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn write_analytic(r: &Resolved, csv_path: Option<&Path>) -> Result<String> {
    let pairs = analytic_report(r)?;
    if let Some(path) = csv_path {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["quantity", "value"])?;
        for (k, v) in &pairs {
            w.write_record([k, v])?;
        }
        w.flush()?;
    }
    Ok(join_lines(&pairs))
}

fn fmt_pm(value: f64, sd: Option<f64>) -> String {
    match sd {
        Some(sd) => format!("{} +- {}", format_number(value), format_number(sd)),
        None => format_number(value),
    }
}

fn simulate(r: &Resolved, seed: u64, write_frames: bool) -> Result<String> {
    let s = &r.scenario;
    let spec = SeedSpec::new(seed);
    let set = sampler::generate_image_set(s, &spec)?;
    let rec_in = estimator::covariance_records(&set.target_in, Hypothesis::In)?;
    let rec_out = estimator::covariance_records(&set.target_out, Hypothesis::Out)?;
    let k_sqrt = (s.pixel_pairs as f64).sqrt();

    let mut text = String::new();
    writeln!(text, "seed={seed}").unwrap();
    writeln!(text, "source={}", s.source.kind).unwrap();
    writeln!(text, "frames_per_hypothesis={}", s.images).unwrap();
    for (key, records, hypothesis, analytic_cov) in [
        ("covariance_in", &rec_in, Hypothesis::In, analytic::covariance_hat_mean(s)),
        ("covariance_out", &rec_out, Hypothesis::Out, analytic::covariance_hat_mean(&s.with_target(false))),
    ] {
        let values: Vec<f64> = records.iter().map(|x| x.delta12).collect();
        let mean = estimator::mean_and_variance(&values).0;
        let sd = estimator::bootstrap_mean(&values, r.bootstrap, &spec.derive(&[0xC0, hypothesis as u64]));
        writeln!(text, "{key}={}", fmt_pm(mean, sd)).unwrap();
        fmt_result(&mut text, &format!("{key}_analytic"), analytic_cov);
    }
    match estimator::epsilon_hat(&set.target_in) {
        Ok(e) => {
            let sd = estimator::bootstrap_epsilon(&set.target_in, r.bootstrap, &spec.derive(&[0xE0]));
            writeln!(text, "epsilon={}", fmt_pm(e.epsilon, sd)).unwrap();
        }
        Err(e) => writeln!(text, "epsilon=undefined ({e})").unwrap(),
    }
    fmt_result(&mut text, "epsilon_analytic", analytic::epsilon(s));
    match estimator::snr_hat(&rec_in, &rec_out) {
        Ok(f) => {
            let sd = estimator::bootstrap_snr(&rec_in, &rec_out, r.bootstrap, &spec.derive(&[0x50]));
            writeln!(text, "snr_pair={}", fmt_pm(f / k_sqrt, sd.map(|v| v / k_sqrt))).unwrap();
        }
        Err(e) => writeln!(text, "snr_pair=undefined ({e})").unwrap(),
    }
    fmt_result(&mut text, "snr_pair_analytic", analytic::snr(s));
    match estimator::perr_hat(&rec_in, &rec_out, r.images_per_decision) {
        Ok(p) => {
            let sd = estimator::bootstrap_perr(&rec_in, &rec_out, r.images_per_decision, r.bootstrap, &spec.derive(&[0xA0]));
            writeln!(text, "perr={}", fmt_pm(p.perr, sd)).unwrap();
            writeln!(text, "perr_threshold={}", p.threshold).unwrap();
            writeln!(text, "perr_batches={}", p.batches_in).unwrap();
        }
        Err(e) => writeln!(text, "perr=undefined ({e})").unwrap(),
    }
    fmt_result(
        &mut text,
        "perr_analytic",
        analytic::error_probability(s, r.images_per_decision).map(|p| p.perr),
    );

    create_out_dir(&r.out)?;
    if write_frames {
        sampler::write_frames_csv(fs::File::create(r.out.join("frames.csv"))?, &set)?;
    }
    let mut records = rec_in;
    records.extend(rec_out);
    estimator::write_records_csv(fs::File::create(r.out.join("records.csv"))?, &records)?;
    fs::write(r.out.join("summary.txt"), &text)?;
    let meta = toml::to_string(&r.to_config(seed)).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(r.out.join("config.toml"), meta)?;
    writeln!(text, "out={}", r.out.display()).unwrap();
    Ok(text)
}

fn reproduce(r: &Resolved, figure: Figure, seed: u64) -> Result<String> {
    let frames = r.images_explicit.then_some(r.scenario.images);
    let specs = scenario::figure_presets(figure, &r.scenario, SeedSpec::new(seed), frames, r.bootstrap);
    create_out_dir(&r.out)?;
    let mut text = String::new();
    writeln!(text, "seed={seed}").unwrap();
    for spec in &specs {
        let result = scenario::run_sweep(spec)?;
        let csv_path = r.out.join(format!("{}.csv", spec.name));
        result.write_csv(fs::File::create(&csv_path)?)?;
        fs::write(r.out.join(format!("{}.meta.toml", spec.name)), scenario::metadata_toml(spec)?)?;
        let flagged = result.rows.iter().filter(|row| !row.flag.is_empty()).count();
        writeln!(text, "wrote {} ({} rows, {} flagged)", csv_path.display(), result.rows.len(), flagged).unwrap();
    }
    Ok(text)
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs a parsed command and returns the text to print.
pub fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Analytic { settings, csv } => {
            let r = resolve(&settings)?;
            write_analytic(&r, csv.as_deref())
        }
        Command::Simulate { settings, no_frames } => {
            let r = resolve(&settings)?;
            let seed = r.seed.unwrap_or_else(fresh_seed);
            with_threads(r.threads, || simulate(&r, seed, !no_frames))?
        }
        Command::Reproduce { figure, settings } => {
            let r = resolve(&settings)?;
            let seed = r.seed.unwrap_or_else(fresh_seed);
            with_threads(r.threads, || reproduce(&r, figure.into(), seed))?
        }
    }
}
