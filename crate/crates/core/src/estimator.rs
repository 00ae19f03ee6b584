//! The covariance receiver applied to simulated or measured frames.
//!
//! Counts are integers, so every pooled sum is kept exactly in 128-bit
//! integers and only the final ratios are rounded. Reductions are therefore
//! independent of summation order.

use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::Scenario;
use crate::error::{Error, Result};
use crate::sampler::{self, Frame, Hypothesis, SeedSpec};

/// Bootstrap resamples used for uncertainty bars unless configured otherwise.
pub const DEFAULT_BOOTSTRAP: usize = 200;

/// Minimum number of decision batches per hypothesis for `perr_hat`.
pub const MIN_BATCHES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceRecord {
    pub delta12: f64,
    pub frame_index: u64,
    pub hypothesis: Hypothesis,
}

/// Exact power sums of a set of pixel pairs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PairSums {
    pub n: u128,
    pub s1: u128,
    pub s2: u128,
    pub s11: u128,
    pub s22: u128,
    pub s12: u128,
}

impl PairSums {
    pub fn from_counts(n1: &[u64], n2: &[u64]) -> Self {
        let mut sums = PairSums::default();
        for (&a, &b) in n1.iter().zip(n2) {
            let (a, b) = (a as u128, b as u128);
            sums.n += 1;
            sums.s1 += a;
            sums.s2 += b;
            sums.s11 += a * a;
            sums.s22 += b * b;
            sums.s12 += a * b;
        }
        sums
    }

    pub fn from_frame(frame: &Frame) -> Self {
        PairSums::from_counts(&frame.n1, &frame.n2)
    }

    pub fn merge(&mut self, other: &PairSums) {
        self.n += other.n;
        self.s1 += other.s1;
        self.s2 += other.s2;
        self.s11 += other.s11;
        self.s22 += other.s22;
        self.s12 += other.s12;
    }

    /// `n * s_xy - s_x * s_y`, exact.
    fn comoment(n: u128, sxy: u128, sx: u128, sy: u128) -> i128 {
        (n as i128) * (sxy as i128) - (sx as i128) * (sy as i128)
    }

    /// Plug-in covariance with divisor `n`.
    pub fn plug_in_covariance(&self) -> f64 {
        let n = self.n as f64;
        Self::comoment(self.n, self.s12, self.s1, self.s2) as f64 / (n * n)
    }

    /// Sample moments with divisor `n - 1`.
    pub fn sample_moments(&self) -> SampleMoments {
        let n = self.n as f64;
        let d = n * (n - 1.0);
        SampleMoments {
            mean1: self.s1 as f64 / n,
            mean2: self.s2 as f64 / n,
            var1: Self::comoment(self.n, self.s11, self.s1, self.s1) as f64 / d,
            var2: Self::comoment(self.n, self.s22, self.s2, self.s2) as f64 / d,
            cov: Self::comoment(self.n, self.s12, self.s1, self.s2) as f64 / d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleMoments {
    pub mean1: f64,
    pub mean2: f64,
    pub var1: f64,
    pub var2: f64,
    pub cov: f64,
}

/// `E[N1 N2] - E[N1] E[N2]` averaged over the pixel pairs of one frame.
pub fn covariance_hat(frame: &Frame) -> Result<f64> {
    if frame.n1.len() != frame.n2.len() {
        return Err(Error::invalid(
            "frame",
            format!("arm lengths differ ({} vs {})", frame.n1.len(), frame.n2.len()),
        ));
    }
    if frame.n1.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: frame.n1.len(),
        });
    }
    Ok(PairSums::from_frame(frame).plug_in_covariance())
}

pub fn covariance_records(frames: &[Frame], hypothesis: Hypothesis) -> Result<Vec<CovarianceRecord>> {
    frames
        .iter()
        .map(|f| {
            Ok(CovarianceRecord {
                delta12: covariance_hat(f)?,
                frame_index: f.frame_index,
                hypothesis,
            })
        })
        .collect()
}

/// Records of frames `0..count` drawn as by `sampler::generate_frames`, without
/// keeping the frames in memory.
pub fn simulate_records(
    scenario: &Scenario,
    hypothesis: Hypothesis,
    seed: &SeedSpec,
    count: usize,
) -> Result<Vec<CovarianceRecord>> {
    scenario.validate()?;
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let frame = sampler::generate_frame(scenario, hypothesis, seed, i)?;
            Ok(CovarianceRecord {
                delta12: covariance_hat(&frame)?,
                frame_index: i,
                hypothesis,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonEstimate {
    pub epsilon: f64,
    pub normal_var1: f64,
    pub normal_var2: f64,
    pub cov: f64,
}

fn epsilon_from_sums(sums: &PairSums) -> Result<EpsilonEstimate> {
    let m = sums.sample_moments();
    let normal_var1 = m.var1 - m.mean1;
    let normal_var2 = m.var2 - m.mean2;
    if !(normal_var1 > 0.0 && normal_var2 > 0.0) {
        return Err(Error::DegenerateDenominator(format!(
            "estimated normally ordered variances must be positive (arm 1: {normal_var1}, arm 2: {normal_var2})"
        )));
    }
    Ok(EpsilonEstimate {
        epsilon: m.cov / (normal_var1 * normal_var2).sqrt(),
        normal_var1,
        normal_var2,
        cov: m.cov,
    })
}

/// Cauchy-Schwarz parameter from moments pooled over all pixels and frames;
/// the normally ordered variance of a count is its variance minus its mean.
pub fn epsilon_hat(frames: &[Frame]) -> Result<EpsilonEstimate> {
    if frames.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: frames.len(),
        });
    }
    let mut sums = PairSums::default();
    for f in frames {
        sums.merge(&PairSums::from_frame(f));
    }
    epsilon_from_sums(&sums)
}

/// Standard deviation of a statistic over bootstrap replicates. Replicates for
/// which the statistic is undefined are skipped; `None` if fewer than two remain.
pub fn bootstrap_sd<F>(resamples: usize, seed: &SeedSpec, mut statistic: F) -> Option<f64>
where
    F: FnMut(&mut ChaCha8Rng) -> Option<f64>,
{
    let mut rng = seed.rng();
    let values: Vec<f64> = (0..resamples).filter_map(|_| statistic(&mut rng)).collect();
    if values.len() < 2 {
        return None;
    }
    Some(mean_and_variance(&values).1.sqrt())
}

fn resample<T: Copy, R: Rng>(rng: &mut R, items: &[T]) -> Vec<T> {
    let n = items.len();
    (0..n).map(|_| items[rng.random_range(0..n)]).collect()
}

/// Bootstrap standard deviation of `epsilon_hat`, resampling whole frames.
pub fn bootstrap_epsilon(frames: &[Frame], resamples: usize, seed: &SeedSpec) -> Option<f64> {
    let per_frame: Vec<PairSums> = frames.iter().map(PairSums::from_frame).collect();
    bootstrap_sd(resamples, seed, |rng| {
        let mut sums = PairSums::default();
        for s in resample(rng, &per_frame) {
            sums.merge(&s);
        }
        epsilon_from_sums(&sums).ok().map(|e| e.epsilon)
    })
}

/// Bootstrap standard error of the mean of `values`.
pub fn bootstrap_mean(values: &[f64], resamples: usize, seed: &SeedSpec) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    bootstrap_sd(resamples, seed, |rng| {
        let v = resample(rng, values);
        Some(mean_and_variance(&v).0)
    })
}

/// Mean and `n - 1` variance (two-pass).
pub fn mean_and_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, if values.len() > 1 { ss / (n - 1.0) } else { 0.0 })
}

fn deltas(records: &[CovarianceRecord]) -> Vec<f64> {
    records.iter().map(|r| r.delta12).collect()
}

fn snr_from_values(target_in: &[f64], target_out: &[f64]) -> Result<f64> {
    for len in [target_in.len(), target_out.len()] {
        if len < 2 {
            return Err(Error::TooFewSamples { needed: 2, got: len });
        }
    }
    let (mean_in, var_in) = mean_and_variance(target_in);
    let (mean_out, var_out) = mean_and_variance(target_out);
    let noise = (var_in + var_out).sqrt();
    if noise == 0.0 {
        return Err(Error::DegenerateDenominator("covariance records have zero spread".into()));
    }
    Ok((mean_in - mean_out).abs() / noise)
}

/// Contrast of the per-frame covariances over their combined spread.
pub fn snr_hat(target_in: &[CovarianceRecord], target_out: &[CovarianceRecord]) -> Result<f64> {
    snr_from_values(&deltas(target_in), &deltas(target_out))
}

pub fn bootstrap_snr(
    target_in: &[CovarianceRecord],
    target_out: &[CovarianceRecord],
    resamples: usize,
    seed: &SeedSpec,
) -> Option<f64> {
    let (a, b) = (deltas(target_in), deltas(target_out));
    bootstrap_sd(resamples, seed, |rng| {
        let ra = resample(rng, &a);
        let rb = resample(rng, &b);
        snr_from_values(&ra, &rb).ok()
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerrEstimate {
    pub perr: f64,
    pub threshold: f64,
    pub batches_in: usize,
    pub batches_out: usize,
}

/// Means of consecutive groups of `size` records; a trailing partial group is dropped.
pub fn batch_means(records: &[CovarianceRecord], size: usize) -> Vec<f64> {
    records
        .chunks_exact(size.max(1))
        .map(|chunk| chunk.iter().map(|r| r.delta12).sum::<f64>() / chunk.len() as f64)
        .collect()
}

/// Empirical minimum-error threshold between two samples of the decision
/// statistic. The target is declared when the statistic exceeds the threshold.
///
/// Candidates are every midpoint between adjacent distinct pooled values plus
/// one threshold below and one above all of them; ties go to the smallest
/// threshold. Returns `(perr, threshold)`.
pub fn min_error_threshold(target_in: &[f64], target_out: &[f64]) -> (f64, f64) {
    let (n_in, n_out) = (target_in.len() as u128, target_out.len() as u128);
    let mut pooled: Vec<(f64, bool)> = target_in
        .iter()
        .map(|&v| (v, true))
        .chain(target_out.iter().map(|&v| (v, false)))
        .collect();
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pooled.is_empty() {
        return (0.5, 0.0);
    }
    // Risk scaled by 2 n_in n_out: false alarms * n_in + misses * n_out.
    let (mut in_below, mut out_below) = (0u128, 0u128);
    let mut best_score = n_out * n_in;
    let mut best_tau = pooled[0].0 - 1.0;
    for i in 1..=pooled.len() {
        if pooled[i - 1].1 {
            in_below += 1;
        } else {
            out_below += 1;
        }
        let tau = if i == pooled.len() {
            pooled[i - 1].0 + 1.0
        } else if pooled[i - 1].0 < pooled[i].0 {
            0.5 * (pooled[i - 1].0 + pooled[i].0)
        } else {
            continue;
        };
        let score = (n_out - out_below) * n_in + in_below * n_out;
        if score < best_score {
            best_score = score;
            best_tau = tau;
        }
    }
    (best_score as f64 / (2 * n_in * n_out) as f64, best_tau)
}

/// Empirical error probability of decisions taken on averages of
/// `images_per_decision` frames.
pub fn perr_hat(
    target_in: &[CovarianceRecord],
    target_out: &[CovarianceRecord],
    images_per_decision: usize,
) -> Result<PerrEstimate> {
    if images_per_decision == 0 {
        return Err(Error::invalid("images_per_decision", "must be >= 1"));
    }
    let means_in = batch_means(target_in, images_per_decision);
    let means_out = batch_means(target_out, images_per_decision);
    for got in [means_in.len(), means_out.len()] {
        if got < MIN_BATCHES {
            return Err(Error::InsufficientBatches {
                needed: MIN_BATCHES,
                got,
            });
        }
    }
    let (perr, threshold) = min_error_threshold(&means_in, &means_out);
    Ok(PerrEstimate {
        perr,
        threshold,
        batches_in: means_in.len(),
        batches_out: means_out.len(),
    })
}

/// Bootstrap standard deviation of `perr_hat`, resampling decision batches.
pub fn bootstrap_perr(
    target_in: &[CovarianceRecord],
    target_out: &[CovarianceRecord],
    images_per_decision: usize,
    resamples: usize,
    seed: &SeedSpec,
) -> Option<f64> {
    let a = batch_means(target_in, images_per_decision);
    let b = batch_means(target_out, images_per_decision);
    bootstrap_sd(resamples, seed, |rng| {
        let ra = resample(rng, &a);
        let rb = resample(rng, &b);
        Some(min_error_threshold(&ra, &rb).0)
    })
}

/// Record dump with columns `frame,hypothesis,delta12`.
pub fn write_records_csv<W: Write>(writer: W, records: &[CovarianceRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["frame", "hypothesis", "delta12"])?;
    for r in records {
        w.write_record([r.frame_index.to_string(), r.hypothesis.label().to_string(), r.delta12.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn streamed_records_match_stored_frames() {
        let mut s = Scenario::experimental_setup().with_background_mean(200.0);
        s.pixel_pairs = 10;
        let seed = SeedSpec::new(3);
        let frames = sampler::generate_frames(&s, Hypothesis::Out, &seed, 25).unwrap();
        let stored = covariance_records(&frames, Hypothesis::Out).unwrap();
        assert_eq!(simulate_records(&s, Hypothesis::Out, &seed, 25).unwrap(), stored);
    }

    fn frame(n1: Vec<u64>, n2: Vec<u64>) -> Frame {
        Frame {
            n1,
            n2,
            target_present: true,
            frame_index: 0,
        }
    }

    fn records(values: &[f64], hypothesis: Hypothesis) -> Vec<CovarianceRecord> {
        values
            .iter()
            .enumerate()
            .map(|(i, &delta12)| CovarianceRecord {
                delta12,
                frame_index: i as u64,
                hypothesis,
            })
            .collect()
    }

    #[test]
    fn covariance_hand_example() {
        assert_eq!(covariance_hat(&frame(vec![1, 3], vec![2, 4])).unwrap(), 1.0);
        assert_eq!(covariance_hat(&frame(vec![1, 5, 9, 2], vec![7, 7, 7, 7])).unwrap(), 0.0);
    }

    #[test]
    fn covariance_needs_two_pairs() {
        assert!(matches!(
            covariance_hat(&frame(vec![1], vec![2])),
            Err(Error::TooFewSamples { needed: 2, got: 1 })
        ));
        assert!(covariance_hat(&frame(vec![1, 2], vec![2])).is_err());
    }

    #[test]
    fn constant_records_have_degenerate_snr() {
        let a = records(&[3.0, 3.0, 3.0], Hypothesis::In);
        let b = records(&[1.0, 1.0, 1.0], Hypothesis::Out);
        assert!(matches!(snr_hat(&a, &b), Err(Error::DegenerateDenominator(_))));
        assert!(matches!(snr_hat(&a[..1], &b), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn snr_hand_example() {
        let a = records(&[1.0, 3.0], Hypothesis::In);
        let b = records(&[-1.0, 1.0], Hypothesis::Out);
        // |2 - 0| / sqrt(2 + 2)
        assert_eq!(snr_hat(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn separated_batches_have_zero_error() {
        let a = records(&(0..100).map(|i| 10.0 + i as f64 * 0.01).collect::<Vec<_>>(), Hypothesis::In);
        let b = records(&(0..100).map(|i| -(i as f64) * 0.01).collect::<Vec<_>>(), Hypothesis::Out);
        let p = perr_hat(&a, &b, 10).unwrap();
        assert_eq!(p.perr, 0.0);
        assert!(p.threshold > 0.0 && p.threshold < 10.0);
        assert_eq!((p.batches_in, p.batches_out), (10, 10));
    }

    #[test]
    fn identical_samples_give_one_half() {
        let v: Vec<f64> = (0..200).map(|i| (i % 17) as f64).collect();
        let p = perr_hat(&records(&v, Hypothesis::In), &records(&v, Hypothesis::Out), 1).unwrap();
        assert!(p.perr >= 0.45 && p.perr <= 0.5, "{}", p.perr);
    }

    #[test]
    fn too_few_batches() {
        let v = vec![1.0; 95];
        let r = perr_hat(&records(&v, Hypothesis::In), &records(&v, Hypothesis::Out), 10);
        assert!(matches!(r, Err(Error::InsufficientBatches { needed: 10, got: 9 })));
    }

    #[test]
    fn epsilon_hat_needs_two_frames() {
        let f = frame(vec![1, 2, 3], vec![3, 2, 1]);
        assert!(matches!(epsilon_hat(std::slice::from_ref(&f)), Err(Error::TooFewSamples { .. })));
        // Constant counts: normally ordered variances are negative.
        let c = frame(vec![4, 4], vec![4, 4]);
        assert!(matches!(epsilon_hat(&[c.clone(), c]), Err(Error::DegenerateDenominator(_))));
    }

    #[test]
    fn record_csv_layout() {
        let mut out = Vec::new();
        write_records_csv(&mut out, &records(&[1.5, -2.0], Hypothesis::Out)).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "frame,hypothesis,delta12\n0,out,1.5\n1,out,-2\n");
    }

    fn pairs() -> impl Strategy<Value = Vec<(u64, u64)>> {
        prop::collection::vec((0u64..5000, 0u64..5000), 2..60)
    }

    proptest! {
        #[test]
        fn covariance_is_permutation_invariant(p in pairs(), rot in 0usize..60) {
            let (a, b): (Vec<u64>, Vec<u64>) = p.iter().copied().unzip();
            let mut q = p.clone();
            q.rotate_left(rot % p.len());
            q.reverse();
            let (c, d): (Vec<u64>, Vec<u64>) = q.into_iter().unzip();
            prop_assert_eq!(covariance_hat(&frame(a, b)).unwrap(), covariance_hat(&frame(c, d)).unwrap());
        }

        #[test]
        fn covariance_is_shift_invariant(p in pairs(), s1 in 0u64..100_000, s2 in 0u64..100_000) {
            let (a, b): (Vec<u64>, Vec<u64>) = p.iter().copied().unzip();
            let base = covariance_hat(&frame(a.clone(), b.clone())).unwrap();
            let shifted1 = covariance_hat(&frame(a.iter().map(|x| x + s1).collect(), b.clone())).unwrap();
            let shifted2 = covariance_hat(&frame(a, b.iter().map(|x| x + s2).collect())).unwrap();
            prop_assert_eq!(base, shifted1);
            prop_assert_eq!(base, shifted2);
        }

        #[test]
        fn threshold_scan_is_exhaustive(
            a in prop::collection::vec(-50i32..50, 1..40),
            b in prop::collection::vec(-50i32..50, 1..40),
        ) {
            let a: Vec<f64> = a.into_iter().map(f64::from).collect();
            let b: Vec<f64> = b.into_iter().map(f64::from).collect();
            let (perr, tau) = min_error_threshold(&a, &b);
            let risk = |t: f64| {
                let fa = b.iter().filter(|&&x| x > t).count() as f64 / b.len() as f64;
                let miss = a.iter().filter(|&&x| x <= t).count() as f64 / a.len() as f64;
                0.5 * (fa + miss)
            };
            prop_assert!((risk(tau) - perr).abs() < 1e-12);
            for i in -110..=110 {
                let t = i as f64 * 0.5;
                prop_assert!(perr <= risk(t) + 1e-12);
            }
        }
    }
}
