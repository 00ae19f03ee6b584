//! Brute-force reference for small instances.
//!
//! Builds the full joint distribution of the detected counts `(N1, N2)` by
//! enumerating one mode (thermal photon number, then the detection chain
//! exactly as the sampler draws it), convolving `M` copies and convolving the
//! background into arm 2. Moments are then plain weighted sums over the table.

use crate::analytic::{BackgroundSpec, ChannelSpec, MomentSet, SourceKind, SourceSpec};
use crate::error::{Error, Result};

/// Largest number of table cells the oracle will allocate.
pub const MAX_SUPPORT: u128 = 10_000_000;

pub const DEFAULT_CUTOFF: f64 = 1e-12;

/// Probability table of `(n1, n2)` on `0..width1 x 0..width2`.
#[derive(Debug, Clone)]
pub struct JointDistribution {
    probs: Vec<f64>,
    width1: usize,
    width2: usize,
    tail_bound: f64,
}

impl JointDistribution {
    fn zeros(width1: usize, width2: usize) -> Self {
        JointDistribution {
            probs: vec![0.0; width1 * width2],
            width1,
            width2,
            tail_bound: 0.0,
        }
    }

    pub fn prob(&self, n1: usize, n2: usize) -> f64 {
        if n1 < self.width1 && n2 < self.width2 {
            self.probs[n1 * self.width2 + n2]
        } else {
            0.0
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width1, self.width2)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Upper bound on the probability mass outside the table.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn marginal1(&self) -> Vec<f64> {
        (0..self.width1)
            .map(|i| self.probs[i * self.width2..(i + 1) * self.width2].iter().sum())
            .collect()
    }

    pub fn marginal2(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.width2];
        for row in self.probs.chunks_exact(self.width2) {
            for (acc, p) in m.iter_mut().zip(row) {
                *acc += p;
            }
        }
        m
    }

    fn cells(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != 0.0)
            .map(move |(idx, &p)| ((idx / self.width2) as f64, (idx % self.width2) as f64, p))
    }

    /// Moments by direct summation over the table.
    pub fn moments(&self) -> MomentSet {
        let (mut mean1, mut mean2) = (0.0, 0.0);
        for (a, b, p) in self.cells() {
            mean1 += p * a;
            mean2 += p * b;
        }
        let (mut var1, mut var2, mut cov, mut m22) = (0.0, 0.0, 0.0, 0.0);
        for (a, b, p) in self.cells() {
            let (d1, d2) = (a - mean1, b - mean2);
            var1 += p * d1 * d1;
            var2 += p * d2 * d2;
            cov += p * d1 * d2;
            m22 += p * d1 * d1 * d2 * d2;
        }
        MomentSet {
            mean1,
            mean2,
            var1,
            var2,
            cov,
            m22,
        }
    }

    fn convolve(&self, other: &JointDistribution) -> Result<JointDistribution> {
        let (w1, w2) = (self.width1 + other.width1 - 1, self.width2 + other.width2 - 1);
        check_support(w1, w2)?;
        let mut out = JointDistribution::zeros(w1, w2);
        for (i, row) in self.probs.chunks_exact(self.width2).enumerate() {
            for (j, &p) in row.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                for (k, orow) in other.probs.chunks_exact(other.width2).enumerate() {
                    let base = (i + k) * w2 + j;
                    for (l, &q) in orow.iter().enumerate() {
                        out.probs[base + l] += p * q;
                    }
                }
            }
        }
        out.tail_bound = self.tail_bound + other.tail_bound;
        Ok(out)
    }
}

fn check_support(w1: usize, w2: usize) -> Result<()> {
    let support = w1 as u128 * w2 as u128;
    if support > MAX_SUPPORT {
        return Err(Error::Infeasible {
            support,
            limit: MAX_SUPPORT,
        });
    }
    Ok(())
}

fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    let mut pmf = vec![0.0; n + 1];
    if p <= 0.0 {
        pmf[0] = 1.0;
        return pmf;
    }
    if p >= 1.0 {
        pmf[n] = 1.0;
        return pmf;
    }
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let mut log_choose = 0.0;
    for (k, slot) in pmf.iter_mut().enumerate() {
        if k > 0 {
            log_choose += ((n - k + 1) as f64).ln() - (k as f64).ln();
        }
        *slot = (log_choose + k as f64 * lp + (n - k) as f64 * lq).exp();
    }
    pmf
}

/// Negative binomial pmf (sum of `modes` Bose-Einstein modes of mean `mean`)
/// truncated once the `(n + 1)^4`-weighted tail is below `cutoff`.
/// Returns the table and the discarded probability mass bound.
pub fn multithermal_pmf(modes: u64, mean: f64, cutoff: f64) -> Result<(Vec<f64>, f64)> {
    if mean <= 0.0 {
        return Ok((vec![1.0], 0.0));
    }
    let q = mean / (1.0 + mean);
    let r = modes as f64;
    let mut p = (-r * (1.0 + mean).ln()).exp();
    let mut pmf = Vec::new();
    let mut k = 0usize;
    loop {
        pmf.push(p);
        if pmf.len() as u128 > MAX_SUPPORT {
            return Err(Error::Infeasible {
                support: pmf.len() as u128,
                limit: MAX_SUPPORT,
            });
        }
        let kf = k as f64;
        // Weighted terms p_j (j + 1)^4 shrink by at most `ratio` beyond k.
        let ratio = q * (kf + r) / (kf + 1.0) * ((kf + 3.0) / (kf + 2.0)).powi(4);
        let next = p * q * (kf + r) / (kf + 1.0);
        if ratio < 1.0 {
            let weighted_tail = next * (kf + 2.0).powi(4) / (1.0 - ratio);
            if weighted_tail <= cutoff {
                return Ok((pmf, weighted_tail));
            }
        }
        p = next;
        k += 1;
    }
}

/// Joint pmf of the counts produced by one correlated mode.
fn single_mode(source: &SourceSpec, channel: &ChannelSpec, cutoff: f64) -> Result<JointDistribution> {
    let (photons, tail) = multithermal_pmf(1, source.thermal_mean(), cutoff)?;
    let width = photons.len();
    check_support(width, width)?;
    let mut table = JointDistribution::zeros(width, width);
    table.tail_bound = tail;
    let eta2 = channel.effective_eta2();
    for (n, &pn) in photons.iter().enumerate() {
        match source.kind {
            SourceKind::TwinBeam => {
                let b1 = binomial_pmf(n, channel.eta1);
                let b2 = binomial_pmf(n, eta2);
                for (a, &pa) in b1.iter().enumerate() {
                    for (b, &pb) in b2.iter().enumerate() {
                        table.probs[a * width + b] += pn * pa * pb;
                    }
                }
            }
            SourceKind::SplitThermal => {
                let split = binomial_pmf(n, source.split_ratio);
                for (first, &ps) in split.iter().enumerate() {
                    let b1 = binomial_pmf(first, channel.eta1);
                    let b2 = binomial_pmf(n - first, eta2);
                    for (a, &pa) in b1.iter().enumerate() {
                        for (b, &pb) in b2.iter().enumerate() {
                            table.probs[a * width + b] += pn * ps * pa * pb;
                        }
                    }
                }
            }
        }
    }
    Ok(table)
}

/// Full joint distribution of `(N1, N2)` for a pixel pair.
pub fn joint_distribution(
    source: &SourceSpec,
    channel: &ChannelSpec,
    background: &BackgroundSpec,
    cutoff_tail: f64,
) -> Result<JointDistribution> {
    source.validate()?;
    channel.validate()?;
    background.validate()?;
    if !(cutoff_tail > 0.0 && cutoff_tail < 1.0) {
        return Err(Error::invalid("cutoff_tail", format!("must lie in (0, 1), got {cutoff_tail}")));
    }
    // Enough room for the truncation bounds of all modes plus the background.
    let per_part = cutoff_tail / (source.modes as f64 + 1.0);
    let mode = single_mode(source, channel, per_part)?;
    let m = source.modes as usize;
    let w = (mode.width1 - 1).saturating_mul(m).saturating_add(1);
    check_support(w, w)?;

    let mut total = mode.clone();
    for _ in 1..m {
        total = total.convolve(&mode)?;
    }

    let (bg, bg_tail) = multithermal_pmf(background.modes, background.per_mode_mean(), per_part)?;
    if bg.len() > 1 {
        let mut bg_table = JointDistribution::zeros(1, bg.len());
        bg_table.probs.copy_from_slice(&bg);
        bg_table.tail_bound = bg_tail;
        total = total.convolve(&bg_table)?;
    }
    Ok(total)
}

/// Exact moments of a small instance by summation over the enumerated table.
pub fn enumerate_moments(
    source: &SourceSpec,
    channel: &ChannelSpec,
    background: &BackgroundSpec,
    cutoff_tail: f64,
) -> Result<MomentSet> {
    Ok(joint_distribution(source, channel, background, cutoff_tail)?.moments())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn channel(eta1: f64, eta2: f64) -> ChannelSpec {
        ChannelSpec {
            eta1,
            eta2,
            reflectivity: 1.0,
            target_present: true,
            mode_match: 1.0,
        }
    }

    #[test]
    fn vacuum_has_no_moments() {
        let m = enumerate_moments(
            &SourceSpec::twin_beam(0.0, 3),
            &channel(0.5, 0.5),
            &BackgroundSpec::none(),
            DEFAULT_CUTOFF,
        )
        .unwrap();
        for (_, v) in m.fields() {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn single_mode_thermal_variance() {
        let m = enumerate_moments(
            &SourceSpec::twin_beam(0.2, 1),
            &channel(1.0, 1.0),
            &BackgroundSpec::none(),
            DEFAULT_CUTOFF,
        )
        .unwrap();
        assert!((m.cov - 0.24).abs() < 1e-13);
        assert!((m.var1 - 0.24).abs() < 1e-13);
        assert!((m.var2 - 0.24).abs() < 1e-13);
    }

    #[test]
    fn probability_mass_is_accounted_for() {
        let bg = BackgroundSpec {
            modes: 2,
            mean_total: 1.5,
        };
        for kind in [SourceKind::TwinBeam, SourceKind::SplitThermal] {
            let d = joint_distribution(
                &SourceSpec::twin_beam(0.4, 3).with_kind(kind),
                &channel(0.7, 0.3),
                &bg,
                DEFAULT_CUTOFF,
            )
            .unwrap();
            let total = d.total();
            assert!(d.tail_bound() <= DEFAULT_CUTOFF);
            assert!(total <= 1.0 + 1e-13 && total + d.tail_bound() >= 1.0 - 1e-12, "{total}");
        }
    }

    #[test]
    fn arm_one_marginal_is_negative_binomial() {
        for kind in [SourceKind::TwinBeam, SourceKind::SplitThermal] {
            let source = SourceSpec::twin_beam(0.5, 4).with_kind(kind);
            let d = joint_distribution(&source, &channel(0.7, 0.3), &BackgroundSpec::none(), DEFAULT_CUTOFF).unwrap();
            let marginal = d.marginal1();
            let (reference, _) = multithermal_pmf(4, 0.7 * 0.5, 1e-20).unwrap();
            for (n, p) in marginal.iter().enumerate() {
                let want = reference.get(n).copied().unwrap_or(0.0);
                assert!((p - want).abs() < 1e-12, "{kind:?} n={n}: {p} vs {want}");
            }
        }
    }

    #[test]
    fn swapping_efficiencies_swaps_arms() {
        let source = SourceSpec::twin_beam(0.3, 3);
        let bg = BackgroundSpec {
            modes: 2,
            mean_total: 0.8,
        };
        let a = enumerate_moments(&source, &channel(0.7, 0.3), &bg, DEFAULT_CUTOFF).unwrap();
        let b = enumerate_moments(&source, &channel(0.3, 0.7), &bg, DEFAULT_CUTOFF).unwrap();
        let var_b = bg.variance();
        assert!((a.mean1 - (b.mean2 - bg.mean_total)).abs() < 1e-12);
        assert!((a.var1 - (b.var2 - var_b)).abs() < 1e-12);
        assert!((a.cov - b.cov).abs() < 1e-13);
    }

    #[test]
    fn oversized_instances_are_refused() {
        let r = enumerate_moments(
            &SourceSpec::twin_beam(0.075, 90_000),
            &channel(0.62, 0.62),
            &BackgroundSpec::none(),
            DEFAULT_CUTOFF,
        );
        assert!(matches!(r, Err(Error::Infeasible { .. })));
    }
}
