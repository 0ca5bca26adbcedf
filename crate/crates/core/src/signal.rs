//! Narrowband single-source observation model for a selected subarray.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::layout::Subarray;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalParams {
    pub channel_gain: Complex64,
    pub symbol: Complex64,
    pub noise_variance: f64,
    pub n_snapshots: usize,
}

impl SignalParams {
    pub fn new(channel_gain: Complex64, noise_variance: f64) -> Result<Self> {
        if !(noise_variance > 0.0) {
            return Err(Error::invalid("noise variance must be positive"));
        }
        Ok(Self { channel_gain, symbol: Complex64::new(1.0, 0.0), noise_variance, n_snapshots: 1 })
    }

    /// Unit-variance noise with the gain chosen so that the aggregate SNR of
    /// an `m`-element subarray equals `snr`.
    pub fn for_aggregate_snr(snr: f64, m: usize) -> Result<Self> {
        if !(snr >= 0.0) || m == 0 {
            return Err(Error::invalid("SNR must be non-negative and M positive"));
        }
        let gain = (snr / m as f64).sqrt();
        Self::new(Complex64::new(gain, 0.0), 1.0)
    }

    pub fn with_symbol(mut self, symbol: Complex64) -> Result<Self> {
        if (symbol.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("symbol must have unit modulus"));
        }
        self.symbol = symbol;
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub observation: Vec<Complex64>,
    pub true_direction: f64,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub(crate) fn check_direction(u: f64) -> Result<()> {
    if u > -1.0 && u < 1.0 {
        Ok(())
    } else {
        Err(Error::DirectionOutOfRange(u))
    }
}

/// `a(u)_m = exp(-i pi d_m u)`.
pub fn steering_vector(sub: &Subarray, u: f64) -> Result<Vec<Complex64>> {
    check_direction(u)?;
    Ok(steering(sub.positions(), u))
}

pub(crate) fn steering(positions: &[f64], u: f64) -> Vec<Complex64> {
    positions.iter().map(|d| Complex64::from_polar(1.0, -PI * d * u)).collect()
}

/// Aggregate SNR and the positional variance (array diversity) of `sub`.
pub fn snr_and_diversity(p: &SignalParams, sub: &Subarray) -> (f64, f64) {
    let m = sub.len() as f64;
    let snr = m * p.n_snapshots as f64 * p.channel_gain.norm_sqr() / p.noise_variance;
    (snr, diversity(sub))
}

pub fn diversity(sub: &Subarray) -> f64 {
    let pos = sub.positions();
    let m = pos.len() as f64;
    let mean = pos.iter().sum::<f64>() / m;
    pos.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / m
}

/// One noisy observation `y = alpha a(u) s + n`, with circular complex
/// Gaussian noise of total variance `noise_variance`.
pub fn generate_snapshot<R: Rng + ?Sized>(
    p: &SignalParams,
    sub: &Subarray,
    u: f64,
    rng: &mut R,
) -> Result<Snapshot> {
    let a = steering_vector(sub, u)?;
    let sd = (p.noise_variance / 2.0).sqrt();
    let amp = p.channel_gain * p.symbol;
    let observation = a
        .into_iter()
        .map(|am| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            amp * am + Complex64::new(sd * re, sd * im)
        })
        .collect();
    Ok(Snapshot { observation, true_direction: u })
}

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        Self { dim, data }
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid("matrix must be square"));
        }
        Ok(Self { dim, data: rows.into_iter().flatten().collect() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn conj_transpose(&self) -> Self {
        let n = self.dim;
        let data = (0..n * n).map(|k| self.data[(k % n) * n + k / n].conj()).collect();
        Self { dim: n, data }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * factor).collect() }
    }

    /// Real part of `v^H R v`.
    pub fn quadratic_form(&self, v: &[Complex64]) -> f64 {
        let n = self.dim;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let rv: Complex64 = row.iter().zip(v).map(|(r, x)| r * x).sum();
            acc += v[i].conj() * rv;
        }
        acc.re
    }
}

/// Single-snapshot covariance estimate `y y^H`.
pub fn sample_covariance(y: &[Complex64]) -> Result<CMatrix> {
    if y.is_empty() {
        return Err(Error::invalid("observation vector is empty"));
    }
    let n = y.len();
    let data = (0..n * n).map(|k| y[k / n] * y[k % n].conj()).collect();
    Ok(CMatrix { dim: n, data })
}
