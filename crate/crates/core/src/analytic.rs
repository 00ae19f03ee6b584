//! Closed-form photon-number statistics for the covariance receiver.
//!
//! Every figure of merit is derived from the joint central moments of the
//! detected counts `(N1, N2)` of one pixel pair. The correlated part of a pixel
//! pair is a sum of `M` i.i.d. modes, so its bivariate cumulants are `M` times
//! the per-mode cumulants; the background only adds cumulants to arm 2.
//!
//! Per-mode moments come from enumerating the Bose-Einstein photon-number
//! distribution of one mode until the fourth-moment tail is below double
//! precision, combined with the exact conditional factorial moments of the
//! binomial (twin beam) or multinomial (split thermal) detection process.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Largest per-mode thermal mean accepted by the enumeration.
pub const MAX_MODE_MEAN: f64 = 1.0e5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceKind {
    /// Parametric down-conversion twin beams: perfectly correlated photon numbers per mode pair.
    TwinBeam,
    /// One multithermal beam divided on a beam splitter.
    SplitThermal,
}

impl SourceKind {
    pub fn label(self) -> &'static str {
        match self {
            SourceKind::TwinBeam => "twin-beam",
            SourceKind::SplitThermal => "split-thermal",
        }
    }
}

impl std::fmt::Display for SourceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for SourceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "twin-beam" | "twinbeam" | "twb" | "qi" => Ok(SourceKind::TwinBeam),
            "split-thermal" | "splitthermal" | "thb" | "ci" => Ok(SourceKind::SplitThermal),
            other => Err(Error::invalid("source.kind", format!("unknown source kind `{other}`"))),
        }
    }
}

/// Illumination source.
///
/// `mu` is the mean photon number per mode seen locally by each arm. For a
/// split thermal source the field before the splitter carries `mu / split_ratio`
/// photons per mode, so arm 1 sees `mu` (and so does arm 2 at a 50:50 split).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub kind: SourceKind,
    pub mu: f64,
    pub modes: u64,
    pub split_ratio: f64,
}

impl SourceSpec {
    pub fn twin_beam(mu: f64, modes: u64) -> Self {
        SourceSpec {
            kind: SourceKind::TwinBeam,
            mu,
            modes,
            split_ratio: 0.5,
        }
    }

    pub fn split_thermal(mu: f64, modes: u64) -> Self {
        SourceSpec {
            kind: SourceKind::SplitThermal,
            mu,
            modes,
            split_ratio: 0.5,
        }
    }

    pub fn with_kind(self, kind: SourceKind) -> Self {
        SourceSpec { kind, ..self }
    }

    /// `mu = 0` is accepted and describes the vacuum.
    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() || self.mu < 0.0 {
            return Err(Error::invalid("source.mu", format!("must be finite and >= 0, got {}", self.mu)));
        }
        if self.modes == 0 {
            return Err(Error::invalid("source.modes", "must be >= 1"));
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::invalid(
                "source.split_ratio",
                format!("must lie in (0, 1), got {}", self.split_ratio),
            ));
        }
        if self.thermal_mean() > MAX_MODE_MEAN {
            return Err(Error::invalid(
                "source.mu",
                format!("per-mode mean {} exceeds {MAX_MODE_MEAN}", self.thermal_mean()),
            ));
        }
        Ok(())
    }

    /// Per-mode mean of the thermal field that feeds the detectors.
    pub fn thermal_mean(&self) -> f64 {
        match self.kind {
            SourceKind::TwinBeam => self.mu,
            SourceKind::SplitThermal => self.mu / self.split_ratio,
        }
    }

    /// Probability that one photon of the thermal field is detected in arm 1
    /// and arm 2 respectively.
    pub(crate) fn detection_probabilities(&self, channel: &ChannelSpec) -> (f64, f64) {
        let eta2 = channel.effective_eta2();
        match self.kind {
            SourceKind::TwinBeam => (channel.eta1, eta2),
            SourceKind::SplitThermal => (
                self.split_ratio * channel.eta1,
                (1.0 - self.split_ratio) * eta2,
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub eta1: f64,
    pub eta2: f64,
    pub reflectivity: f64,
    pub target_present: bool,
    pub mode_match: f64,
}

impl Default for ChannelSpec {
    fn default() -> Self {
        ChannelSpec {
            eta1: 0.62,
            eta2: 0.62,
            reflectivity: 0.5,
            target_present: true,
            mode_match: 1.0,
        }
    }
}

impl ChannelSpec {
    pub fn validate(&self) -> Result<()> {
        for (field, value) in [
            ("channel.eta1", self.eta1),
            ("channel.eta2", self.eta2),
            ("channel.reflectivity", self.reflectivity),
            ("channel.mode_match", self.mode_match),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::invalid(field, format!("must lie in [0, 1], got {value}")));
            }
        }
        Ok(())
    }

    /// Efficiency of the correlated light in arm 2; zero without a target.
    pub fn effective_eta2(&self) -> f64 {
        if self.target_present {
            self.eta2 * self.reflectivity * self.mode_match
        } else {
            0.0
        }
    }
}

/// Multithermal background added to arm 2, in detected photons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackgroundSpec {
    pub modes: u64,
    pub mean_total: f64,
}

impl BackgroundSpec {
    pub fn none() -> Self {
        BackgroundSpec {
            modes: 1,
            mean_total: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes == 0 {
            return Err(Error::invalid("background.modes", "must be >= 1"));
        }
        if !self.mean_total.is_finite() || self.mean_total < 0.0 {
            return Err(Error::invalid(
                "background.mean",
                format!("must be finite and >= 0, got {}", self.mean_total),
            ));
        }
        Ok(())
    }

    pub fn per_mode_mean(&self) -> f64 {
        self.mean_total / self.modes as f64
    }

    pub fn variance(&self) -> f64 {
        multithermal_variance(self.mean_total, self.modes as f64)
    }
}

/// Joint central moments of the detected counts of one pixel pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub mean1: f64,
    pub mean2: f64,
    pub var1: f64,
    pub var2: f64,
    pub cov: f64,
    /// `<dN1^2 dN2^2>`
    pub m22: f64,
}

impl MomentSet {
    /// Variance of the product `dN1 dN2`, i.e. `K` times the variance of the
    /// covariance estimated over `K` pixel pairs.
    pub fn product_variance(&self) -> f64 {
        (self.m22 - self.cov * self.cov).max(0.0)
    }

    pub fn fields(&self) -> [(&'static str, f64); 6] {
        [
            ("mean1", self.mean1),
            ("mean2", self.mean2),
            ("var1", self.var1),
            ("var2", self.var2),
            ("cov", self.cov),
            ("m22", self.m22),
        ]
    }
}

/// Normally ordered second moments `<:dN1^2:>`, `<:dN2^2:>`, `<:dN1 dN2:>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormallyOrdered {
    pub var1: f64,
    pub var2: f64,
    pub cov: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub source: SourceSpec,
    pub channel: ChannelSpec,
    pub background: BackgroundSpec,
    /// Number `K` of correlated pixel pairs per frame.
    pub pixel_pairs: usize,
    /// Number of acquired frames per hypothesis.
    pub images: usize,
    /// Gaussian detector read noise in electrons; only used by the sampler.
    #[serde(default)]
    pub read_noise: f64,
}

impl Scenario {
    /// The experimental operating point: `mu = 0.075`, `M = 9e4`, `eta = 0.62`,
    /// a 50:50 target, `M_b = 1300`, 80 pixel pairs and 2000 frames.
    pub fn experimental_setup() -> Self {
        Scenario {
            source: SourceSpec::twin_beam(0.075, 90_000),
            channel: ChannelSpec::default(),
            background: BackgroundSpec {
                modes: 1300,
                mean_total: 0.0,
            },
            pixel_pairs: 80,
            images: 2000,
            read_noise: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.source.validate()?;
        self.channel.validate()?;
        self.background.validate()?;
        if self.pixel_pairs == 0 {
            return Err(Error::invalid("scenario.pixel_pairs", "must be >= 1"));
        }
        if self.images == 0 {
            return Err(Error::invalid("scenario.images", "must be >= 1"));
        }
        if !self.read_noise.is_finite() || self.read_noise < 0.0 {
            return Err(Error::invalid(
                "scenario.read_noise",
                format!("must be finite and >= 0, got {}", self.read_noise),
            ));
        }
        Ok(())
    }

    pub fn with_target(mut self, present: bool) -> Self {
        self.channel.target_present = present;
        self
    }

    pub fn with_background_mean(mut self, mean_total: f64) -> Self {
        self.background.mean_total = mean_total;
        self
    }

    pub fn with_source_kind(mut self, kind: SourceKind) -> Self {
        self.source.kind = kind;
        self
    }
}

/// Variance of a multithermal count with `modes` modes and mean `mean_total`.
pub fn variance_law(mean_total: f64, modes: u64) -> Result<f64> {
    if !mean_total.is_finite() || mean_total < 0.0 {
        return Err(Error::invalid("mean_total", format!("must be finite and >= 0, got {mean_total}")));
    }
    if modes == 0 {
        return Err(Error::invalid("modes", "must be >= 1"));
    }
    Ok(multithermal_variance(mean_total, modes as f64))
}

fn multithermal_variance(mean_total: f64, modes: f64) -> f64 {
    mean_total * (1.0 + mean_total / modes)
}

/// Factorial moments `E[n (n-1) ... (n-k+1)]`, `k = 1..=4`, of a single
/// Bose-Einstein mode with mean `mean`, summed term by term.
fn thermal_factorial_moments(mean: f64) -> [f64; 4] {
    if mean <= 0.0 {
        return [0.0; 4];
    }
    let q = mean / (1.0 + mean);
    let mut p = 1.0 / (1.0 + mean);
    let mut acc = [0.0f64; 4];
    let mut n = 0u64;
    loop {
        let x = n as f64;
        let f1 = x;
        let f2 = f1 * (x - 1.0);
        let f3 = f2 * (x - 2.0);
        let f4 = f3 * (x - 3.0);
        acc[0] += p * f1;
        acc[1] += p * f2;
        acc[2] += p * f3;
        acc[3] += p * f4;
        // From n = 4 on, successive terms of every factorial moment shrink by at
        // most r = q (n + 1) / (n - 3); once r < 1 the tail is a geometric series.
        if n >= 4 {
            let r = q * (x + 1.0) / (x - 3.0);
            if r < 1.0 {
                let lead = p * q / (1.0 - r);
                let converged = (0..4).all(|k| lead * (x + 1.0).powi(k as i32 + 1) <= 1e-18 * acc[k]);
                if converged && p * q / (1.0 - q) <= 1e-18 {
                    break;
                }
            }
        }
        p *= q;
        n += 1;
    }
    acc
}

/// Per-mode factorial moments `F[i][j] = E[a^(i) b^(j)]`, `i, j <= 2`, of the
/// detected counts `(a, b)` produced by one mode.
fn mode_factorial_moments(source: &SourceSpec, channel: &ChannelSpec) -> [[f64; 3]; 3] {
    let g = thermal_factorial_moments(source.thermal_mean());
    let (p1, p2) = source.detection_probabilities(channel);
    // Photon-number part E[...] of each F[i][j] before the efficiency factors.
    let photon = match source.kind {
        // Independent binomial thinnings of the same n: E[n^(i) n^(j)].
        SourceKind::TwinBeam => [
            [1.0, g[0], g[1]],
            [g[0], g[1] + g[0], g[2] + 2.0 * g[1]],
            [g[1], g[2] + 2.0 * g[1], g[3] + 4.0 * g[2] + 2.0 * g[1]],
        ],
        // Multinomial split of n: E[n^(i+j)].
        SourceKind::SplitThermal => [
            [1.0, g[0], g[1]],
            [g[0], g[1], g[2]],
            [g[1], g[2], g[3]],
        ],
    };
    let mut f = [[0.0; 3]; 3];
    for (i, row) in f.iter_mut().enumerate() {
        for (j, value) in row.iter_mut().enumerate() {
            *value = p1.powi(i as i32) * p2.powi(j as i32) * photon[i][j];
        }
    }
    f
}

/// Per-mode cumulants needed for the pixel-pair moments.
#[derive(Debug, Clone, Copy)]
struct ModeCumulants {
    mean1: f64,
    mean2: f64,
    k20: f64,
    k02: f64,
    k11: f64,
    k22: f64,
    normal20: f64,
    normal02: f64,
}

fn mode_cumulants(source: &SourceSpec, channel: &ChannelSpec) -> ModeCumulants {
    let f = mode_factorial_moments(source, channel);
    let a = f[1][0];
    let b = f[0][1];
    let e_a2 = f[2][0] + f[1][0];
    let e_b2 = f[0][2] + f[0][1];
    let e_ab = f[1][1];
    let e_a2b = f[2][1] + f[1][1];
    let e_ab2 = f[1][2] + f[1][1];
    let e_a2b2 = f[2][2] + f[2][1] + f[1][2] + f[1][1];

    let k20 = e_a2 - a * a;
    let k02 = e_b2 - b * b;
    let k11 = e_ab - a * b;
    let c22 = e_a2b2 - 2.0 * b * e_a2b - 2.0 * a * e_ab2 + b * b * e_a2 + 4.0 * a * b * e_ab + a * a * e_b2
        - 3.0 * a * a * b * b;
    ModeCumulants {
        mean1: a,
        mean2: b,
        k20,
        k02,
        k11,
        k22: c22 - k20 * k02 - 2.0 * k11 * k11,
        normal20: f[2][0] - a * a,
        normal02: f[0][2] - b * b,
    }
}

fn validate_parts(source: &SourceSpec, channel: &ChannelSpec, background: &BackgroundSpec) -> Result<()> {
    source.validate()?;
    channel.validate()?;
    background.validate()
}

/// Moments of one pixel pair built from its parts.
pub fn pair_moments(source: &SourceSpec, channel: &ChannelSpec, background: &BackgroundSpec) -> Result<MomentSet> {
    validate_parts(source, channel, background)?;
    let c = mode_cumulants(source, channel);
    let m = source.modes as f64;
    let var1 = m * c.k20;
    let var2 = m * c.k02 + background.variance();
    let cov = m * c.k11;
    Ok(MomentSet {
        mean1: m * c.mean1,
        mean2: m * c.mean2 + background.mean_total,
        var1,
        var2,
        cov,
        m22: m * c.k22 + var1 * var2 + 2.0 * cov * cov,
    })
}

/// Exact detected-count moments of one pixel pair.
pub fn moments(scenario: &Scenario) -> Result<MomentSet> {
    scenario.validate()?;
    pair_moments(&scenario.source, &scenario.channel, &scenario.background)
}

pub fn normally_ordered(scenario: &Scenario) -> Result<NormallyOrdered> {
    scenario.validate()?;
    let c = mode_cumulants(&scenario.source, &scenario.channel);
    let m = scenario.source.modes as f64;
    let bg = &scenario.background;
    Ok(NormallyOrdered {
        var1: m * c.normal20,
        // Multithermal background: variance minus mean is N_b^2 / M_b.
        var2: m * c.normal02 + bg.mean_total * bg.mean_total / bg.modes as f64,
        cov: m * c.k11,
    })
}

/// Generalized Cauchy-Schwarz parameter `<:dN1 dN2:> / sqrt(<:dN1^2:> <:dN2^2:>)`.
pub fn epsilon(scenario: &Scenario) -> Result<f64> {
    let no = normally_ordered(scenario)?;
    if no.var1.is_nan() || no.var2.is_nan() || no.var1 <= 0.0 || no.var2 <= 0.0 {
        return Err(Error::DegenerateDenominator(format!(
            "normally ordered variances must be positive (arm 1: {}, arm 2: {})",
            no.var1, no.var2
        )));
    }
    Ok(no.cov / (no.var1 * no.var2).sqrt())
}

/// Covariance signal-to-noise ratio of a single pixel pair.
///
/// Multiply by `sqrt(K)` for a frame of `K` pairs and by `sqrt(N_img)` for an
/// average over `N_img` frames.
pub fn snr(scenario: &Scenario) -> Result<f64> {
    let target_in = moments(scenario)?;
    let target_out = moments(&scenario.with_target(false))?;
    let contrast = (target_in.cov - target_out.cov).abs();
    if contrast == 0.0 {
        return Ok(0.0);
    }
    let noise = (target_in.product_variance() + target_out.product_variance()).sqrt();
    if noise == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(contrast / noise)
}

/// Pixel-pair SNR when the background dominates every other noise term:
/// `cov / sqrt(2 var1 var_b)`.
pub fn snr_dominant_background(scenario: &Scenario) -> Result<f64> {
    let m = moments(scenario)?;
    let var_b = scenario.background.variance();
    let noise = (2.0 * m.var1 * var_b).sqrt();
    if noise == 0.0 {
        return Err(Error::DegenerateDenominator("no background or arm 1 fluctuations".into()));
    }
    Ok(m.cov.abs() / noise)
}

/// Quantum enhancement of twin beams over split thermal beams, `(1 + mu) / mu`.
pub fn enhancement(mu: f64) -> Result<f64> {
    if !mu.is_finite() || mu <= 0.0 {
        return Err(Error::invalid("mu", format!("must be finite and > 0, got {mu}")));
    }
    Ok((1.0 + mu) / mu)
}

/// Number of averaged frames needed for the covariance SNR to reach `target`.
pub fn images_for_snr(scenario: &Scenario, target: f64) -> Result<f64> {
    let per_pair = snr(scenario)?;
    let per_frame = per_pair * (scenario.pixel_pairs as f64).sqrt();
    if per_frame == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((target / per_frame).powi(2))
}

/// Expectation of the plug-in covariance over `K` pairs: `cov (K - 1) / K`.
pub fn covariance_hat_mean(scenario: &Scenario) -> Result<f64> {
    let m = moments(scenario)?;
    let k = scenario.pixel_pairs as f64;
    Ok(m.cov * (k - 1.0) / k)
}

/// Exact variance of the plug-in covariance over `K` i.i.d. pairs.
pub fn covariance_hat_variance(scenario: &Scenario) -> Result<f64> {
    let m = moments(scenario)?;
    Ok(plug_in_covariance_variance(&m, scenario.pixel_pairs))
}

pub(crate) fn plug_in_covariance_variance(m: &MomentSet, pairs: usize) -> f64 {
    let k = pairs as f64;
    if pairs < 2 {
        return 0.0;
    }
    // Variance of the unbiased (K - 1) estimator, rescaled by ((K - 1) / K)^2.
    let unbiased = m.m22 / k + m.var1 * m.var2 / (k * (k - 1.0)) - m.cov * m.cov * (k - 2.0) / (k * (k - 1.0));
    unbiased * ((k - 1.0) / k).powi(2)
}

/// Minimum equal-prior error probability of the covariance threshold test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorProbability {
    pub perr: f64,
    pub threshold: f64,
    pub sigma_in: f64,
    pub sigma_out: f64,
}

/// Gaussian model of the covariance averaged over `images_per_decision` frames
/// of `K` pairs: `Normal(cov_in, sigma_in^2)` with the target and
/// `Normal(0, sigma_out^2)` without it.
pub fn error_probability(scenario: &Scenario, images_per_decision: usize) -> Result<ErrorProbability> {
    if images_per_decision == 0 {
        return Err(Error::invalid("images_per_decision", "must be >= 1"));
    }
    let target_in = moments(scenario)?;
    let target_out = moments(&scenario.with_target(false))?;
    let samples = (scenario.pixel_pairs * images_per_decision) as f64;
    let sigma_in = (target_in.product_variance() / samples).sqrt();
    let sigma_out = (target_out.product_variance() / samples).sqrt();
    let (perr, threshold) = min_error_two_gaussians(target_in.cov - target_out.cov, sigma_in, sigma_out);
    Ok(ErrorProbability {
        perr,
        threshold: threshold + target_out.cov,
        sigma_in,
        sigma_out,
    })
}

/// Standard normal cumulative distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Risk of "decide target if x > tau" between `Normal(0, sd_out)` and
/// `Normal(mean_in, sd_in)` with equal priors.
fn threshold_risk(tau: f64, mean_in: f64, sd_in: f64, sd_out: f64) -> f64 {
    let false_alarm = normal_cdf(-tau / sd_out);
    let miss = normal_cdf((tau - mean_in) / sd_in);
    0.5 * (false_alarm + miss)
}

/// Returns `(perr, threshold)` for a target class centred at `mean_in >= 0`.
pub(crate) fn min_error_two_gaussians(mean_in: f64, sd_in: f64, sd_out: f64) -> (f64, f64) {
    if mean_in == 0.0 {
        return (0.5, 0.0);
    }
    match (sd_in > 0.0, sd_out > 0.0) {
        (false, false) => return (0.0, 0.5 * mean_in),
        // Point mass at 0 without target: any threshold just above 0.
        (true, false) => return (0.5 * normal_cdf(-mean_in / sd_in), 0.0),
        (false, true) => return (0.5 * normal_cdf(-mean_in / sd_out), mean_in),
        (true, true) => {}
    }
    // Stationary points of the risk are the crossings of the two densities:
    // x^2 (a^2 - b^2) + 2 c b^2 x - c^2 b^2 + 2 a^2 b^2 ln(b / a) = 0.
    let (a2, b2) = (sd_in * sd_in, sd_out * sd_out);
    let qa = a2 - b2;
    let qb = 2.0 * mean_in * b2;
    let qc = -mean_in * mean_in * b2 + 2.0 * a2 * b2 * (sd_out / sd_in).ln();
    let mut candidates = Vec::with_capacity(2);
    if qa.abs() <= 1e-12 * a2.max(b2) {
        candidates.push(-qc / qb);
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let q = -0.5 * (qb + qb.signum() * disc.sqrt());
            candidates.push(q / qa);
            if q != 0.0 {
                candidates.push(qc / q);
            }
        }
    }
    let mut best = (0.5, if mean_in > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY });
    for tau in candidates.into_iter().filter(|t| t.is_finite()) {
        let risk = threshold_risk(tau, mean_in, sd_in, sd_out);
        if risk < best.0 {
            best = (risk, tau);
        }
    }
    best
}
