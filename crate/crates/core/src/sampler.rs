//! Seeded Monte Carlo generation of photon-count frames.
//!
//! Every pixel pair draws from its own ChaCha stream whose seed is a hash of
//! `(master seed, hypothesis, frame, pixel)`, so a frame sequence does not
//! depend on how frames are scheduled across threads.
//!
//! A multithermal count over `M` modes is negative binomial; it is drawn in one
//! shot as a gamma-mixed Poisson instead of summing `M` geometric variates.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Gamma, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{BackgroundSpec, ChannelSpec, Scenario, SourceKind, SourceSpec};
use crate::error::{Error, Result};

/// Largest mean photon number per draw accepted by the sampler.
pub const MAX_DRAW_MEAN: f64 = 1.0e15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hypothesis {
    /// Target present (as configured by the channel).
    In,
    /// Target absent: only background reaches arm 2.
    Out,
}

impl Hypothesis {
    pub fn label(self) -> &'static str {
        match self {
            Hypothesis::In => "in",
            Hypothesis::Out => "out",
        }
    }

    fn stream(self) -> u64 {
        match self {
            Hypothesis::In => 0x1,
            Hypothesis::Out => 0x2,
        }
    }
}

impl std::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64) -> Self {
        SeedSpec { master_seed }
    }

    /// Seed of the stream owned by one pixel pair of one frame.
    pub fn child_seed(&self, hypothesis: Hypothesis, frame_index: u64, pixel_index: u64) -> u64 {
        let h = mix64(self.master_seed);
        let h = mix64(h ^ hypothesis.stream());
        let h = mix64(h ^ frame_index);
        mix64(h ^ pixel_index.rotate_left(32))
    }

    /// Independent master seed for a labelled sub-task (sweep point, bootstrap, ...).
    pub fn derive(&self, tag: &[u64]) -> SeedSpec {
        let mut h = mix64(self.master_seed ^ 0xA076_1D64_78BD_642F);
        for &t in tag {
            h = mix64(h ^ t);
        }
        SeedSpec { master_seed: h }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.master_seed)
    }
}

/// One acquired image: `K` pixel-pair counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub n1: Vec<u64>,
    pub n2: Vec<u64>,
    pub target_present: bool,
    pub frame_index: u64,
}

impl Frame {
    pub fn len(&self) -> usize {
        self.n1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n1.is_empty()
    }
}

/// Negative binomial count: `modes` i.i.d. Bose-Einstein modes of mean `mean_per_mode`.
pub fn sample_multithermal<R: Rng + ?Sized>(rng: &mut R, modes: u64, mean_per_mode: f64) -> Result<u64> {
    if mean_per_mode <= 0.0 || modes == 0 {
        return Ok(0);
    }
    let total = modes as f64 * mean_per_mode;
    if !total.is_finite() || total > MAX_DRAW_MEAN {
        return Err(Error::Overflow(format!(
            "mean photon number {total} per draw exceeds {MAX_DRAW_MEAN}"
        )));
    }
    let rate = Gamma::new(modes as f64, mean_per_mode)
        .map_err(|e| Error::invalid("mean_per_mode", e.to_string()))?
        .sample(rng);
    if rate <= 0.0 {
        return Ok(0);
    }
    let n: f64 = Poisson::new(rate)
        .map_err(|e| Error::Overflow(e.to_string()))?
        .sample(rng);
    Ok(n as u64)
}

/// Binomial thinning: each of `n` photons survives with probability `p`.
pub fn thin<R: Rng + ?Sized>(rng: &mut R, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        0
    } else if p >= 1.0 {
        n
    } else {
        Binomial::new(n, p).expect("p in (0, 1)").sample(rng)
    }
}

/// Detected counts `(n1, n2_correlated)` of one pixel pair, without background.
pub fn sample_pixel_pair<R: Rng + ?Sized>(
    source: &SourceSpec,
    channel: &ChannelSpec,
    rng: &mut R,
) -> Result<(u64, u64)> {
    let eta2 = channel.effective_eta2();
    let n = sample_multithermal(rng, source.modes, source.thermal_mean())?;
    match source.kind {
        SourceKind::TwinBeam => {
            let n1 = thin(rng, n, channel.eta1);
            let n2 = thin(rng, n, eta2);
            Ok((n1, n2))
        }
        SourceKind::SplitThermal => {
            let arm1 = thin(rng, n, source.split_ratio);
            let arm2 = n - arm1;
            Ok((thin(rng, arm1, channel.eta1), thin(rng, arm2, eta2)))
        }
    }
}

/// Background count in detected units.
pub fn sample_background<R: Rng + ?Sized>(background: &BackgroundSpec, rng: &mut R) -> Result<u64> {
    sample_multithermal(rng, background.modes, background.per_mode_mean())
}

fn add_read_noise<R: Rng + ?Sized>(rng: &mut R, count: u64, noise: Option<&Normal<f64>>) -> u64 {
    match noise {
        Some(dist) => (count as f64 + dist.sample(rng).round()).max(0.0) as u64,
        None => count,
    }
}

fn frame_unchecked(scenario: &Scenario, hypothesis: Hypothesis, seed: &SeedSpec, frame_index: u64) -> Result<Frame> {
    let mut channel = scenario.channel;
    if hypothesis == Hypothesis::Out {
        channel.target_present = false;
    }
    let noise = if scenario.read_noise > 0.0 {
        Some(Normal::new(0.0, scenario.read_noise).map_err(|e| Error::invalid("scenario.read_noise", e.to_string()))?)
    } else {
        None
    };
    let k = scenario.pixel_pairs;
    let mut n1 = Vec::with_capacity(k);
    let mut n2 = Vec::with_capacity(k);
    for pixel in 0..k {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.child_seed(hypothesis, frame_index, pixel as u64));
        let (a, b) = sample_pixel_pair(&scenario.source, &channel, &mut rng)?;
        let nb = sample_background(&scenario.background, &mut rng)?;
        let b = b.checked_add(nb).ok_or_else(|| Error::Overflow("arm 2 count".into()))?;
        n1.push(add_read_noise(&mut rng, a, noise.as_ref()));
        n2.push(add_read_noise(&mut rng, b, noise.as_ref()));
    }
    Ok(Frame {
        n1,
        n2,
        target_present: channel.target_present,
        frame_index,
    })
}

/// One frame of `K` independent pixel pairs under the given hypothesis.
pub fn generate_frame(scenario: &Scenario, hypothesis: Hypothesis, seed: &SeedSpec, frame_index: u64) -> Result<Frame> {
    scenario.validate()?;
    frame_unchecked(scenario, hypothesis, seed, frame_index)
}

/// Frames `0..count` of one hypothesis, generated in parallel.
pub fn generate_frames(scenario: &Scenario, hypothesis: Hypothesis, seed: &SeedSpec, count: usize) -> Result<Vec<Frame>> {
    scenario.validate()?;
    (0..count as u64)
        .into_par_iter()
        .map(|i| frame_unchecked(scenario, hypothesis, seed, i))
        .collect()
}

/// `scenario.images` frames for each hypothesis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageSet {
    pub target_in: Vec<Frame>,
    pub target_out: Vec<Frame>,
}

impl ImageSet {
    pub fn frames(&self, hypothesis: Hypothesis) -> &[Frame] {
        match hypothesis {
            Hypothesis::In => &self.target_in,
            Hypothesis::Out => &self.target_out,
        }
    }
}

pub fn generate_image_set(scenario: &Scenario, seed: &SeedSpec) -> Result<ImageSet> {
    Ok(ImageSet {
        target_in: generate_frames(scenario, Hypothesis::In, seed, scenario.images)?,
        target_out: generate_frames(scenario, Hypothesis::Out, seed, scenario.images)?,
    })
}

/// Frame dump with columns `frame,pixel,n1,n2,hypothesis`.
pub fn write_frames_csv<W: Write>(writer: W, set: &ImageSet) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["frame", "pixel", "n1", "n2", "hypothesis"])?;
    for hypothesis in [Hypothesis::In, Hypothesis::Out] {
        for frame in set.frames(hypothesis) {
            for (pixel, (a, b)) in frame.n1.iter().zip(&frame.n2).enumerate() {
                w.write_record([
                    frame.frame_index.to_string(),
                    pixel.to_string(),
                    a.to_string(),
                    b.to_string(),
                    hypothesis.label().to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn scenario() -> Scenario {
        let mut s = Scenario::experimental_setup();
        s.pixel_pairs = 16;
        s.images = 6;
        s.background.mean_total = 50.0;
        s
    }

    #[test]
    fn vacuum_gives_zero_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for kind in [SourceKind::TwinBeam, SourceKind::SplitThermal] {
            let source = SourceSpec::twin_beam(0.0, 1000).with_kind(kind);
            for _ in 0..100 {
                assert_eq!(sample_pixel_pair(&source, &ChannelSpec::default(), &mut rng).unwrap(), (0, 0));
            }
        }
    }

    #[test]
    fn opaque_detector_counts_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let channel = ChannelSpec {
            eta1: 0.0,
            ..ChannelSpec::default()
        };
        for kind in [SourceKind::TwinBeam, SourceKind::SplitThermal] {
            let source = SourceSpec::twin_beam(0.5, 1000).with_kind(kind);
            for _ in 0..100 {
                let (n1, n2) = sample_pixel_pair(&source, &channel, &mut rng).unwrap();
                assert_eq!(n1, 0);
                assert!(n2 > 0);
            }
        }
    }

    #[test]
    fn empty_background_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let bg = BackgroundSpec {
            modes: 57,
            mean_total: 0.0,
        };
        assert!((0..1000).all(|_| sample_background(&bg, &mut rng).unwrap() == 0));
    }

    #[test]
    fn overflow_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(matches!(
            sample_multithermal(&mut rng, u64::MAX, 1e5),
            Err(Error::Overflow(_))
        ));
    }

    #[test]
    fn frames_are_deterministic() {
        let s = scenario();
        let seed = SeedSpec::new(99);
        let a = generate_frame(&s, Hypothesis::In, &seed, 3).unwrap();
        let b = generate_frame(&s, Hypothesis::In, &seed, 3).unwrap();
        assert_eq!(a, b);
        let set = generate_frames(&s, Hypothesis::In, &seed, 6).unwrap();
        assert_eq!(set[3], a);
    }

    #[test]
    fn determinism_holds_across_thread_pools() {
        let s = scenario();
        let seed = SeedSpec::new(5);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| generate_image_set(&s, &seed).unwrap())
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn absent_target_without_background_leaves_arm_two_dark() {
        let mut s = scenario();
        s.background.mean_total = 0.0;
        let frame = generate_frame(&s, Hypothesis::Out, &SeedSpec::new(8), 0).unwrap();
        assert!(frame.n2.iter().all(|&n| n == 0));
        assert!(!frame.target_present);
        let s = s.with_target(false);
        let frame = generate_frame(&s, Hypothesis::In, &SeedSpec::new(8), 0).unwrap();
        assert!(frame.n2.iter().all(|&n| n == 0));
    }

    #[test]
    fn hypotheses_use_disjoint_streams() {
        let mut s = scenario();
        s.images = 50;
        let set = generate_image_set(&s, &SeedSpec::new(11)).unwrap();
        let rows: HashSet<_> = set.target_in.iter().map(|f| f.n1.clone()).collect();
        assert!(set.target_out.iter().all(|f| !rows.contains(&f.n1)));
    }

    #[test]
    fn child_seeds_do_not_collide() {
        let seed = SeedSpec::new(0);
        let mut seen = HashSet::new();
        for h in [Hypothesis::In, Hypothesis::Out] {
            for frame in 0..200 {
                for pixel in 0..80 {
                    assert!(seen.insert(seed.child_seed(h, frame, pixel)));
                }
            }
        }
    }

    #[test]
    fn read_noise_keeps_counts_non_negative() {
        let mut s = scenario();
        s.source.mu = 1e-6;
        s.read_noise = 4.0;
        let frame = generate_frame(&s, Hypothesis::Out, &SeedSpec::new(1), 0).unwrap();
        assert_eq!(frame.len(), 16);
        assert!(frame.n1.iter().any(|&n| n > 0));
    }

    #[test]
    fn single_image_set() {
        let mut s = scenario();
        s.images = 1;
        let set = generate_image_set(&s, &SeedSpec::new(2)).unwrap();
        assert_eq!(set.target_in.len(), 1);
        assert_eq!(set.target_out.len(), 1);
    }
}
