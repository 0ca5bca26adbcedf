//! Noise-free beampattern analysis and the threshold-region MSE model.
//!
//! For a source at `u0` the beampattern `V(u0, u) = |a(u)^H a(u0)|^2` is
//! sampled on a uniform grid over `(-1, 1)`. Sidelobe peaks found on that
//! grid feed the outlier probabilities, and the threshold-region
//! approximation mixes the CRLB with the squared distance to each sidelobe:
//!
//! ```text
//! TRA = (1 - sum P_k) * CRLB + sum P_k * (u_k - u0)^2
//! P_k = 1/2 * exp(-S/2) * I0(S * |a(u0)^H a(u_k)| / (2M))
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::layout::Subarray;
use crate::signal::{check_direction, diversity};
use crate::special::i0_scaled_unchecked;

pub const DEFAULT_GRID_POINTS: usize = 2048;
pub const MIN_GRID_POINTS: usize = 64;
/// Anchors are kept inside `[-ANCHOR_LIMIT, ANCHOR_LIMIT]`.
pub const ANCHOR_LIMIT: f64 = 0.995;

/// `j`-th of `n` grid points: `(2j + 1 - n) / n`. Symmetric about zero.
pub fn grid_point(j: usize, n: usize) -> f64 {
    (2.0 * j as f64 + 1.0 - n as f64) / n as f64
}

/// `|a(u)^H a(u0)|^2`.
pub fn beampattern(sub: &Subarray, u0: f64, u: f64) -> f64 {
    pattern_value(sub.positions(), u - u0)
}

pub(crate) fn pattern_value(positions: &[f64], delta: f64) -> f64 {
    positions
        .iter()
        .map(|d| Complex64::from_polar(1.0, PI * d * delta))
        .sum::<Complex64>()
        .norm_sqr()
}

/// Beampattern at every grid point, by phase recurrence along the grid.
pub fn pattern_samples(positions: &[f64], u0: f64, n_grid: usize) -> Vec<f64> {
    let step = 2.0 / n_grid as f64;
    let start = grid_point(0, n_grid) - u0;
    let mut acc = vec![Complex64::new(0.0, 0.0); n_grid];
    for d in positions {
        let rot = Complex64::from_polar(1.0, PI * d * step);
        let mut z = Complex64::from_polar(1.0, PI * d * start);
        for (j, a) in acc.iter_mut().enumerate() {
            // re-anchor periodically to bound drift
            if j % 256 == 0 {
                z = Complex64::from_polar(1.0, PI * d * (grid_point(j, n_grid) - u0));
            }
            *a += z;
            z *= rot;
        }
    }
    acc.into_iter().map(|z| z.norm_sqr()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sidelobe {
    pub location: f64,
    pub value: f64,
    pub correlation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeampatternProfile {
    pub source: f64,
    pub peak_main: f64,
    pub sidelobes: Vec<Sidelobe>,
    pub grid_points: usize,
    /// Subarray size the profile was computed for.
    pub elements: usize,
}

impl BeampatternProfile {
    pub fn count(&self) -> usize {
        self.sidelobes.len()
    }
}

/// Extracts sidelobe peaks from grid samples of `V(u0, .)`.
///
/// The mainlobe is the run of samples around `u0` bounded by the first
/// local minimum on either side. Every strict interior local maximum
/// outside it is a sidelobe; its location gets one parabolic refinement
/// and its value is re-evaluated there with `exact`.
pub fn profile_from_samples(
    u0: f64,
    samples: &[f64],
    elements: usize,
    exact: impl Fn(f64) -> f64,
) -> BeampatternProfile {
    let n = samples.len();
    let peak_main = (elements * elements) as f64;
    let step = 2.0 / n as f64;
    let mut top = (((u0 + 1.0) / step).floor() as usize).min(n - 1);
    loop {
        if top > 0 && samples[top - 1] > samples[top] {
            top -= 1;
        } else if top + 1 < n && samples[top + 1] > samples[top] {
            top += 1;
        } else {
            break;
        }
    }
    let mut lo = top;
    while lo > 0 && samples[lo - 1] < samples[lo] {
        lo -= 1;
    }
    let mut hi = top;
    while hi + 1 < n && samples[hi + 1] < samples[hi] {
        hi += 1;
    }

    let max_corr = elements as f64;
    let sidelobes = (1..n.saturating_sub(1))
        .filter(|&j| j < lo || j > hi)
        .filter(|&j| samples[j] > samples[j - 1] && samples[j] > samples[j + 1])
        .map(|j| {
            let (l, c, r) = (samples[j - 1], samples[j], samples[j + 1]);
            let curvature = l - 2.0 * c + r;
            let offset = if curvature < 0.0 { 0.5 * (l - r) / curvature } else { 0.0 };
            let location = grid_point(j, n) + offset * step;
            let value = exact(location).min(peak_main);
            Sidelobe { location, value, correlation: value.sqrt().min(max_corr) }
        })
        .collect();
    BeampatternProfile { source: u0, peak_main, sidelobes, grid_points: n, elements }
}

pub fn sidelobe_profile(sub: &Subarray, u0: f64, n_grid: usize) -> Result<BeampatternProfile> {
    check_direction(u0)?;
    if n_grid < MIN_GRID_POINTS {
        return Err(Error::invalid(format!("grid needs at least {MIN_GRID_POINTS} points")));
    }
    let pos = sub.positions();
    let samples = pattern_samples(pos, u0, n_grid);
    Ok(profile_from_samples(u0, &samples, pos.len(), |u| pattern_value(pos, u - u0)))
}

/// Peak sidelobe level relative to the mainlobe; zero without sidelobes.
pub fn psl(profile: &BeampatternProfile) -> f64 {
    profile.sidelobes.iter().map(|s| s.value).fold(0.0, f64::max) / profile.peak_main
}

/// `1 / (2 pi^2 S U)` in `u^2` units.
pub fn crlb(snr: f64, sub: &Subarray) -> Result<f64> {
    crlb_from_diversity(snr, diversity(sub))
}

pub fn crlb_from_diversity(snr: f64, diversity: f64) -> Result<f64> {
    if !(snr > 0.0) {
        return Err(Error::invalid(format!("CRLB requires positive SNR, got {snr}")));
    }
    if !(diversity > 0.0) {
        return Err(Error::ZeroDiversity);
    }
    Ok(1.0 / (2.0 * PI * PI * snr * diversity))
}

/// Probability that noise lifts the sidelobe with steering correlation
/// `corr` above the mainlobe.
pub fn outlier_probability(snr: f64, corr: f64, elements: usize) -> Result<f64> {
    let m = elements as f64;
    if !(snr >= 0.0) {
        return Err(Error::invalid(format!("SNR must be non-negative, got {snr}")));
    }
    if !(corr >= 0.0) || corr > m {
        return Err(Error::invalid(format!("correlation {corr} outside [0, {m}]")));
    }
    Ok(outlier_probability_unchecked(snr, corr, m))
}

fn outlier_probability_unchecked(snr: f64, corr: f64, m: f64) -> f64 {
    let x = snr * corr / (2.0 * m);
    0.5 * (x - 0.5 * snr).exp() * i0_scaled_unchecked(x)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TraOptions {
    /// Clamp the mainlobe weight `1 - sum P_k` at zero.
    pub clamp_mainlobe_weight: bool,
}

/// Threshold-region MSE from a precomputed profile and CRLB.
pub fn tra_from_profile(profile: &BeampatternProfile, snr: f64, crlb: f64, opts: TraOptions) -> f64 {
    let m = profile.elements as f64;
    let mut p_sum = 0.0;
    let mut outlier = 0.0;
    for s in &profile.sidelobes {
        let p = outlier_probability_unchecked(snr, s.correlation, m);
        p_sum += p;
        outlier += p * (s.location - profile.source).powi(2);
    }
    let mut weight = 1.0 - p_sum;
    if opts.clamp_mainlobe_weight {
        weight = weight.max(0.0);
    }
    weight * crlb + outlier
}

pub fn tra_mse(u0: f64, snr: f64, sub: &Subarray, n_grid: usize) -> Result<f64> {
    tra_mse_with(u0, snr, sub, n_grid, TraOptions::default())
}

pub fn tra_mse_with(u0: f64, snr: f64, sub: &Subarray, n_grid: usize, opts: TraOptions) -> Result<f64> {
    let bound = crlb(snr, sub)?;
    let profile = sidelobe_profile(sub, u0, n_grid)?;
    Ok(tra_from_profile(&profile, snr, bound, opts))
}

/// Directions around a DOA prior over which the worst-case TRA is taken.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSet {
    anchors: Vec<f64>,
}

impl AnchorSet {
    pub fn new(anchors: Vec<f64>) -> Result<Self> {
        if anchors.is_empty() {
            return Err(Error::invalid("anchor set is empty"));
        }
        for &u in &anchors {
            check_direction(u)?;
        }
        Ok(Self { anchors })
    }

    pub fn anchors(&self) -> &[f64] {
        &self.anchors
    }

    pub fn count(&self) -> usize {
        self.anchors.len()
    }

    /// The mirrored set `{-u}` in the same order.
    pub fn mirrored(&self) -> AnchorSet {
        AnchorSet { anchors: self.anchors.iter().map(|u| -u).collect() }
    }
}

/// `n_anchors` evenly spaced points on `[u_hat - delta_u, u_hat + delta_u]`,
/// clamped to `[-0.995, 0.995]`. A single anchor sits at `u_hat`.
pub fn anchor_set(u_hat: f64, delta_u: f64, n_anchors: usize) -> Result<AnchorSet> {
    if !(delta_u >= 0.0) {
        return Err(Error::invalid(format!("delta_u must be non-negative, got {delta_u}")));
    }
    if n_anchors.is_multiple_of(2) {
        return Err(Error::invalid(format!("anchor count must be odd, got {n_anchors}")));
    }
    if !u_hat.is_finite() {
        return Err(Error::invalid("prior direction must be finite"));
    }
    let half = (n_anchors / 2) as f64;
    let anchors = (0..n_anchors)
        .map(|a| {
            let offset = if n_anchors == 1 { 0.0 } else { (a as f64 - half) / half };
            (u_hat + offset * delta_u).clamp(-ANCHOR_LIMIT, ANCHOR_LIMIT)
        })
        .collect();
    AnchorSet::new(anchors)
}

pub fn worst_case_tra(anchors: &AnchorSet, snr: f64, sub: &Subarray, n_grid: usize) -> Result<f64> {
    let bound = crlb(snr, sub)?;
    let mut worst = f64::NEG_INFINITY;
    for &u0 in anchors.anchors() {
        let profile = sidelobe_profile(sub, u0, n_grid)?;
        worst = worst.max(tra_from_profile(&profile, snr, bound, TraOptions::default()));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::bessel_i0_scaled;
    use approx::assert_relative_eq;

    fn sub(p: &[f64]) -> Subarray {
        Subarray::new(p.to_vec()).unwrap()
    }

    fn ula6() -> Subarray {
        sub(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0])
    }

    #[test]
    fn beampattern_examples() {
        let s = sub(&[0.0, 1.0, 3.0, 7.5]);
        assert_relative_eq!(beampattern(&s, 0.3, 0.3), 16.0, epsilon = 1e-12);

        let pair = sub(&[0.0, 1.0]);
        for u in [-0.9, -0.2, 0.4, 0.99] {
            let closed = 2.0 + 2.0 * (PI * u).cos();
            assert_relative_eq!(beampattern(&pair, 0.0, u), closed, epsilon = 1e-12);
        }
        assert!(beampattern(&pair, 0.0, 1.0) < 1e-24);
        assert_relative_eq!(beampattern(&s, 0.1, -0.6), beampattern(&s, -0.6, 0.1), epsilon = 1e-12);
    }

    #[test]
    fn grid_samples_match_direct_evaluation() {
        let s = sub(&[0.0, 0.5, 1.0, 9.0, 9.5, 10.0]);
        let samples = pattern_samples(s.positions(), 0.2, 2048);
        for (j, v) in samples.iter().enumerate() {
            let direct = beampattern(&s, 0.2, grid_point(j, 2048));
            assert!((v - direct).abs() < 1e-10, "j={j}: {v} vs {direct}");
        }
    }

    #[test]
    fn two_element_pattern_has_no_sidelobes() {
        let p = sidelobe_profile(&sub(&[0.0, 1.0]), 0.0, 1024).unwrap();
        assert_eq!(p.count(), 0);
        assert_eq!(psl(&p), 0.0);
    }

    #[test]
    fn single_element_profile_is_flat() {
        let p = sidelobe_profile(&sub(&[0.0]), 0.4, 256).unwrap();
        assert_eq!(p.count(), 0);
        assert_eq!(p.peak_main, 1.0);
    }

    #[test]
    fn ula_profile_matches_dense_scan() {
        let s = ula6();
        let n = 100_000;
        let p = sidelobe_profile(&s, 0.0, n).unwrap();
        // independent scan: strict local maxima of direct evaluations,
        // dropping the global peak at u0 = 0
        let v: Vec<f64> = (0..n).map(|j| beampattern(&s, 0.0, -1.0 + (2.0 * j as f64 + 1.0) / n as f64)).collect();
        let peaks: Vec<(usize, f64)> = (1..n - 1)
            .filter(|&j| v[j] > v[j - 1] && v[j] > v[j + 1])
            .map(|j| (j, v[j]))
            .filter(|&(_, val)| val < 35.0)
            .collect();
        assert_eq!(p.count(), peaks.len());
        for (lobe, (j, val)) in p.sidelobes.iter().zip(&peaks) {
            assert!((lobe.location - grid_point(*j, n)).abs() < 2.0 / n as f64);
            assert!((lobe.value - val).abs() < 1e-6 * val, "{} vs {}", lobe.value, val);
        }
        let level = psl(&p);
        assert!(level > 0.04 && level < 0.08, "psl {level}");
    }

    #[test]
    fn sidelobe_profile_rejects_small_grid() {
        assert!(sidelobe_profile(&ula6(), 0.0, 32).is_err());
        assert!(sidelobe_profile(&ula6(), 1.0, 128).is_err());
    }

    #[test]
    fn crlb_examples() {
        assert_relative_eq!(crlb(100.0, &ula6()).unwrap(), 1.0 / (2.0 * PI * PI * 100.0 * 35.0 / 12.0));
        assert!((crlb(100.0, &ula6()).unwrap() - 1.737e-4).abs() < 1e-7);
        assert_relative_eq!(crlb(200.0, &ula6()).unwrap() * 2.0, crlb(100.0, &ula6()).unwrap());
        assert!(crlb(1.0, &sub(&[0.0, 1e6])).unwrap() < 1e-12);
        assert!(matches!(crlb(1.0, &sub(&[3.0])), Err(Error::ZeroDiversity)));
    }

    #[test]
    fn outlier_probability_examples() {
        assert_eq!(outlier_probability(0.0, 2.0, 4).unwrap(), 0.5);
        assert!((outlier_probability(2.0, 0.0, 4).unwrap() - 0.5 * (-1f64).exp()).abs() < 1e-15);
        let v = outlier_probability(2.0, 4.0, 4).unwrap();
        assert!((v - 0.5 * (-1f64).exp() * 1.2660658777520082).abs() < 1e-15);
        assert!((v - 0.23290).abs() < 5e-5);
        assert!(outlier_probability(2.0, 4.5, 4).is_err());
        // naive exp(-S/2) I0(.) would overflow here
        let far = outlier_probability(5000.0, 3.9, 4).unwrap();
        assert!(far.is_finite() && far >= 0.0);
    }

    #[test]
    fn outlier_probability_decreasing_in_snr() {
        let mut prev = 0.5;
        for i in 1..500 {
            let p = outlier_probability(i as f64 * 0.5, 0.0, 6).unwrap();
            assert!(p <= prev && p <= 0.5);
            prev = p;
        }
    }

    #[test]
    fn tra_without_sidelobes_is_crlb() {
        let pair = sub(&[0.0, 1.0]);
        assert_eq!(tra_mse(0.0, 3.0, &pair, 1024).unwrap(), crlb(3.0, &pair).unwrap());
    }

    #[test]
    fn tra_reduces_to_crlb_at_high_snr() {
        let s = sub(&[0.0, 0.5, 1.0, 9.0, 9.5, 10.0]);
        let t = tra_mse(0.2, 1e6, &s, 2048).unwrap();
        let c = crlb(1e6, &s).unwrap();
        assert!((t / c - 1.0).abs() < 1e-3);
    }

    #[test]
    fn tra_matches_standalone_evaluation() {
        let s = sub(&[0.0, 0.5, 1.0, 9.0, 9.5, 10.0]);
        let (u0, snr) = (0.2, 10.0);
        let profile = sidelobe_profile(&s, u0, 2048).unwrap();
        let c = 1.0 / (2.0 * PI * PI * snr * diversity(&s));
        let mut p_sum = 0.0;
        let mut out = 0.0;
        for lobe in &profile.sidelobes {
            let corr = beampattern(&s, u0, lobe.location).sqrt();
            let x = snr * corr / 12.0;
            let p = 0.5 * (-snr / 2.0).exp() * bessel_i0_scaled(x).unwrap() * x.exp();
            p_sum += p;
            out += p * (lobe.location - u0).powi(2);
        }
        let expected = (1.0 - p_sum) * c + out;
        let got = tra_mse(u0, snr, &s, 2048).unwrap();
        assert!((got - expected).abs() < 1e-9 * expected.abs().max(1.0));
        assert!(profile.count() > 0);
    }

    #[test]
    fn clamp_option_bounds_weight() {
        let s = sub(&[0.0, 3.0, 7.0, 8.0]);
        let raw = tra_mse(0.1, 0.01, &s, 2048).unwrap();
        let clamped = tra_mse_with(0.1, 0.01, &s, 2048, TraOptions { clamp_mainlobe_weight: true }).unwrap();
        assert!(clamped >= raw);
    }

    #[test]
    fn anchor_examples() {
        let a = anchor_set(0.2, 0.1, 5).unwrap();
        let expected = [0.1, 0.15, 0.2, 0.25, 0.3];
        for (x, y) in a.anchors().iter().zip(expected) {
            assert!((x - y).abs() < 1e-15);
        }
        assert_eq!(anchor_set(0.2, 0.4, 1).unwrap().anchors(), &[0.2]);
        let edge = anchor_set(0.95, 0.1, 5).unwrap();
        assert_eq!(edge.anchors()[4], 0.995);
        assert!(anchor_set(0.0, -0.1, 5).is_err());
        assert!(anchor_set(0.0, 0.1, 4).is_err());
    }

    #[test]
    fn worst_case_examples() {
        let s = sub(&[0.0, 0.5, 2.0, 4.5, 5.0]);
        let single = anchor_set(0.3, 0.1, 1).unwrap();
        assert_eq!(worst_case_tra(&single, 8.0, &s, 1024).unwrap(), tra_mse(0.3, 8.0, &s, 1024).unwrap());

        let five = anchor_set(0.2, 0.1, 5).unwrap();
        let each: Vec<f64> = five.anchors().iter().map(|&u| tra_mse(u, 10.0, &s, 2048).unwrap()).collect();
        let worst = worst_case_tra(&five, 10.0, &s, 2048).unwrap();
        assert_eq!(worst, each.iter().cloned().fold(f64::NEG_INFINITY, f64::max));

        let three = AnchorSet::new(five.anchors()[1..4].to_vec()).unwrap();
        assert!(worst_case_tra(&three, 10.0, &s, 2048).unwrap() <= worst);
    }

    #[test]
    fn mirrored_layout_metrics_agree() {
        let s = sub(&[0.0, 1.0, 1.5, 6.0, 7.5]);
        let m = s.mirrored();
        for u0 in [-0.7, -0.1, 0.0, 0.33, 0.8] {
            let a = sidelobe_profile(&s, u0, 2048).unwrap();
            let b = sidelobe_profile(&m, -u0, 2048).unwrap();
            assert!((psl(&a) - psl(&b)).abs() < 1e-9);
            let ta = tra_mse(u0, 12.0, &s, 2048).unwrap();
            let tb = tra_mse(-u0, 12.0, &m, 2048).unwrap();
            assert!((ta - tb).abs() < 1e-9 * ta.max(1e-3));
        }
    }
}
