//! Single-source maximum-likelihood DOA estimation by two-level grid search.
//!
//! The objective `a(u)^H R a(u)` is scanned over an angle grid in degrees
//! (`u = sin(theta)`), then refined on a finer grid within one coarse step
//! of the coarse winner. Scans run in ascending angle and only a strictly
//! larger objective replaces the incumbent, so ties go to the smaller `u`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::layout::Subarray;
use crate::signal::{steering, CMatrix};

// Objective values closer than this (relative) count as ties.
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub coarse_step_deg: f64,
    pub fine_step_deg: f64,
    /// Open search interval in `u`.
    pub domain: (f64, f64),
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { coarse_step_deg: 0.2, fine_step_deg: 0.01, domain: (-1.0, 1.0) }
    }
}

impl GridSpec {
    pub fn new(coarse_step_deg: f64, fine_step_deg: f64) -> Result<Self> {
        let g = Self { coarse_step_deg, fine_step_deg, ..Self::default() };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<()> {
        if !(self.fine_step_deg > 0.0) || !(self.fine_step_deg < self.coarse_step_deg) {
            return Err(Error::invalid("grid steps must satisfy 0 < fine < coarse"));
        }
        let (lo, hi) = self.domain;
        if !(lo >= -1.0 && hi <= 1.0 && lo < hi) {
            return Err(Error::invalid("search domain must be a sub-interval of (-1, 1)"));
        }
        Ok(())
    }

    fn contains(&self, theta_deg: f64) -> bool {
        let u = theta_deg.to_radians().sin();
        u > self.domain.0 && u < self.domain.1
    }
}

/// `argmax_u a(u)^H R a(u)`.
pub fn mle_estimate(r_hat: &CMatrix, sub: &Subarray, grid: &GridSpec) -> Result<f64> {
    if r_hat.dim() != sub.len() {
        return Err(Error::LengthMismatch { expected: sub.len(), found: r_hat.dim() });
    }
    let pos = sub.positions();
    search(grid, |u| r_hat.quadratic_form(&steering(pos, u)))
}

/// Same estimate from the snapshot directly, using `a^H y y^H a = |a^H y|^2`.
pub fn mle_estimate_snapshot(y: &[Complex64], sub: &Subarray, grid: &GridSpec) -> Result<f64> {
    if y.len() != sub.len() {
        return Err(Error::LengthMismatch { expected: sub.len(), found: y.len() });
    }
    let pos = sub.positions();
    search(grid, |u| {
        pos.iter()
            .zip(y)
            .map(|(d, yi)| Complex64::from_polar(1.0, PI * d * u) * yi)
            .sum::<Complex64>()
            .norm_sqr()
    })
}

fn search(grid: &GridSpec, objective: impl Fn(f64) -> f64) -> Result<f64> {
    grid.validate()?;
    let coarse = grid.coarse_step_deg;
    let limit = index_limit(coarse);
    let coarse_points = (-limit + 1..limit).map(|k| k as f64 * coarse);
    let (theta_c, _) = scan(coarse_points.filter(|&t| grid.contains(t)), &objective)
        .ok_or_else(|| Error::invalid("search domain contains no grid points"))?;

    // fine points are integer multiples of the fine step
    let fine = grid.fine_step_deg;
    let limit = index_limit(fine);
    let centre = (theta_c / fine).round() as i64;
    let half = (coarse / fine).round() as i64;
    let fine_points = (centre - half..=centre + half)
        .filter(|k| k.abs() < limit)
        .map(|k| k as f64 * fine);
    let (theta, _) = scan(fine_points.filter(|&t| grid.contains(t)), &objective)
        .expect("fine grid contains the coarse winner");
    Ok(theta.to_radians().sin())
}

/// Smallest index `k` with `k * step >= 90` degrees.
fn index_limit(step: f64) -> i64 {
    let ratio = 90.0 / step;
    let nearest = ratio.round();
    if (ratio - nearest).abs() < 1e-9 {
        nearest as i64
    } else {
        ratio.ceil() as i64
    }
}

fn scan(thetas: impl Iterator<Item = f64>, objective: &impl Fn(f64) -> f64) -> Option<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for theta in thetas {
        let value = objective(theta.to_radians().sin());
        match best {
            Some((_, b)) if value <= b + TIE_TOLERANCE * b.abs() => {}
            _ => best = Some((theta, value)),
        }
    }
    best
}
