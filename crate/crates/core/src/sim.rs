//! Monte Carlo harness: MSE against SNR per selection method, sequential
//! re-selection, and CSV export.
//!
//! Every trial owns a ChaCha8 stream keyed by `(seed, snr index, method
//! index, trial)`. In coupled mode (the default) the method index is left
//! out of the key, so all methods see the same source direction, prior and
//! noise draws.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::beam::{anchor_set, crlb, ANCHOR_LIMIT, DEFAULT_GRID_POINTS};
use crate::error::{Error, Result};
use crate::estimator::{mle_estimate, GridSpec};
use crate::layout::{positions_from_selection, ArrayGeometry, SelectionVector};
use crate::neural::{load_model, select_tra_dl, MlpModel};
use crate::selector::{select_ula, SelectionQuery, Selector, SelectorConfig};
use crate::signal::{db_to_linear, generate_snapshot, sample_covariance, SignalParams};

/// A selection method as written in configs and on the command line:
/// `ula`, `tra-g[:anchors]`, `tra-exh[:anchors]`, `psl-c[:delta]`, `tra-dl`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Ula,
    TraG { anchors: Option<usize> },
    TraExh { anchors: Option<usize> },
    PslC { delta: f64 },
    TraDl,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let anchors = |a: Option<&str>| -> Result<Option<usize>> {
            a.map(|v| v.parse().map_err(|_| Error::Parse(format!("bad anchor count in method '{s}'"))))
                .transpose()
        };
        match name {
            "ula" if arg.is_none() => Ok(Method::Ula),
            "tra-dl" if arg.is_none() => Ok(Method::TraDl),
            "tra-g" => Ok(Method::TraG { anchors: anchors(arg)? }),
            "tra-exh" => Ok(Method::TraExh { anchors: anchors(arg)? }),
            "psl-c" => {
                let delta = match arg {
                    Some(a) => a.parse().map_err(|_| Error::Parse(format!("bad delta in method '{s}'")))?,
                    None => 1.0,
                };
                if !(delta >= 0.0) {
                    return Err(Error::invalid("PSL-C delta must be non-negative"));
                }
                Ok(Method::PslC { delta })
            }
            _ => Err(Error::Parse(format!("unknown method '{s}'"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Ula => write!(f, "ula"),
            Method::TraDl => write!(f, "tra-dl"),
            Method::TraG { anchors: None } => write!(f, "tra-g"),
            Method::TraG { anchors: Some(a) } => write!(f, "tra-g:{a}"),
            Method::TraExh { anchors: None } => write!(f, "tra-exh"),
            Method::TraExh { anchors: Some(a) } => write!(f, "tra-exh:{a}"),
            Method::PslC { delta } if *delta == 1.0 => write!(f, "psl-c"),
            Method::PslC { delta } => write!(f, "psl-c:{delta}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub geometry: ArrayGeometry,
    pub m_target: usize,
    pub methods: Vec<Method>,
    pub snr_db_points: Vec<f64>,
    pub trials: usize,
    pub delta_u: f64,
    pub n_anchors: usize,
    pub u_source_range: (f64, f64),
    pub master_seed: u64,
    pub n_grid: usize,
    pub model: Option<PathBuf>,
    /// Share random draws across methods.
    pub coupled: bool,
    pub measurements: usize,
    pub threads: Option<usize>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            geometry: ArrayGeometry::new(21, 0.5).expect("valid default geometry"),
            m_target: 4,
            methods: vec![Method::Ula, Method::PslC { delta: 1.0 }, Method::TraG { anchors: None }],
            snr_db_points: vec![-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0],
            trials: 500,
            delta_u: 0.1,
            n_anchors: 5,
            u_source_range: (-0.9, 0.9),
            master_seed: 1,
            n_grid: DEFAULT_GRID_POINTS,
            model: None,
            coupled: true,
            measurements: 5,
            threads: None,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::Parse(format!("bad value for '{key}': '{value}'")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value.split(',').filter(|v| !v.trim().is_empty()).map(|v| parse_num(key, v)).collect()
}

impl SimConfig {
    /// Parses `key = value` lines; `#` starts a comment. Keys not listed in
    /// [`SimConfig::set`] are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected 'key = value'", lineno + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// Sets one field from its text form. Keys: `n`, `d`, `m`, `methods`,
    /// `snr_db`, `trials`, `delta_u`, `n_anchors`, `u_min`, `u_max`, `seed`,
    /// `n_grid`, `model`, `coupled`, `measurements`, `threads`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "n" => self.geometry = ArrayGeometry::new(parse_num(key, value)?, self.geometry.spacing())?,
            "d" => self.geometry = ArrayGeometry::new(self.geometry.n_antennas(), parse_num(key, value)?)?,
            "m" => self.m_target = parse_num(key, value)?,
            "methods" => {
                self.methods = value.split(',').filter(|v| !v.trim().is_empty()).map(str::parse).collect::<Result<_>>()?
            }
            "snr_db" => self.snr_db_points = parse_list(key, value)?,
            "trials" => self.trials = parse_num(key, value)?,
            "delta_u" => self.delta_u = parse_num(key, value)?,
            "n_anchors" => self.n_anchors = parse_num(key, value)?,
            "u_min" => self.u_source_range.0 = parse_num(key, value)?,
            "u_max" => self.u_source_range.1 = parse_num(key, value)?,
            "seed" => self.master_seed = parse_num(key, value)?,
            "n_grid" => self.n_grid = parse_num(key, value)?,
            "model" => self.model = Some(PathBuf::from(value)),
            "coupled" => self.coupled = parse_num(key, value)?,
            "measurements" => self.measurements = parse_num(key, value)?,
            "threads" => self.threads = Some(parse_num(key, value)?),
            _ => return Err(Error::Parse(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.methods.is_empty() || self.snr_db_points.is_empty() {
            return Err(Error::invalid("need at least one method and one SNR point"));
        }
        if self.snr_db_points.iter().any(|s| !s.is_finite()) {
            return Err(Error::invalid("SNR points must be finite"));
        }
        let (lo, hi) = self.u_source_range;
        if !(lo > -1.0 && hi < 1.0 && lo <= hi) {
            return Err(Error::invalid("source range must lie inside (-1, 1)"));
        }
        if !(self.delta_u >= 0.0) {
            return Err(Error::invalid("delta_u must be non-negative"));
        }
        if self.measurements == 0 {
            return Err(Error::invalid("need at least one measurement"));
        }
        if self.threads == Some(0) {
            return Err(Error::invalid("threads must be at least 1"));
        }
        // checks M, grid size and anchor count
        SelectionQuery::new(anchor_set(0.0, self.delta_u, self.n_anchors)?, 1.0, self.geometry, self.m_target, self.n_grid)?;
        Ok(())
    }
}

/// `u_true + delta_u * r` with `r` uniform in `[-1, 1)`, clamped to
/// `±0.995`. Always consumes one draw.
pub fn sample_prior<R: Rng + ?Sized>(u_true: f64, delta_u: f64, rng: &mut R) -> f64 {
    let r: f64 = rng.random_range(-1.0..1.0);
    (u_true + delta_u * r).clamp(-ANCHOR_LIMIT, ANCHOR_LIMIT)
}

fn trial_rng(seed: u64, snr_index: usize, method_index: Option<usize>, trial: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(snr_index as u64).to_le_bytes());
    key[16..24].copy_from_slice(&method_index.map_or(u64::MAX, |m| m as u64).to_le_bytes());
    key[24..].copy_from_slice(&(trial as u64).to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRecord {
    pub snr_index: usize,
    pub method_index: usize,
    pub trial: usize,
    pub u_true: f64,
    pub u_prior: f64,
    pub estimate: f64,
    pub squared_error: f64,
    /// CRLB of the subarray used in this trial.
    pub crlb: f64,
    /// PSL-C found no feasible candidate and fell back.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub snr_db: f64,
    pub method: String,
    pub mse: f64,
    pub trials_used: usize,
    /// CRLB of the max-diversity subarray at this SNR.
    pub crlb_ref: f64,
    pub crlb_mean: f64,
    pub flagged: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub points: Vec<CurvePoint>,
    pub trials: Vec<TrialRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequentialPoint {
    pub measurement: usize,
    pub snr_db: f64,
    pub method: String,
    pub mse: f64,
    pub trials_used: usize,
    pub crlb_mean: f64,
}

struct Harness<'a> {
    cfg: &'a SimConfig,
    selector: Selector,
    grid: GridSpec,
    ula: SelectionVector,
    best_crlb: SelectionVector,
    model: Option<MlpModel>,
}

impl<'a> Harness<'a> {
    fn new(cfg: &'a SimConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.geometry.n_antennas();
        let selector = Selector::new(SelectorConfig::default());
        let ula = select_ula(&cfg.geometry, cfg.m_target)?;
        let best_crlb = if cfg.m_target == n {
            SelectionVector::full(n)?
        } else {
            selector.psl_c(&query(cfg, 0.0, 1, 1.0)?, 1.0)?.chosen
        };
        let model = if cfg.methods.contains(&Method::TraDl) {
            let path = cfg.model.as_ref().ok_or_else(|| Error::invalid("tra-dl needs a model file"))?;
            let model = load_model(path)?;
            if model.output_dim() != n {
                return Err(Error::Model(format!("model has {} outputs, array has {n}", model.output_dim())));
            }
            Some(model)
        } else {
            None
        };
        Ok(Self { cfg, selector, grid: GridSpec::default(), ula, best_crlb, model })
    }

    fn select(&self, method: Method, u_hat: f64, snr_db: f64) -> Result<(SelectionVector, bool)> {
        let snr = db_to_linear(snr_db);
        let anchors = |a: Option<usize>| a.unwrap_or(self.cfg.n_anchors);
        Ok(match method {
            Method::Ula => (self.ula, false),
            Method::PslC { delta } if delta >= 1.0 => (self.best_crlb, false),
            Method::PslC { delta } => {
                let r = self.selector.psl_c(&query(self.cfg, u_hat, 1, snr)?, delta)?;
                (r.chosen, r.infeasible_fallback)
            }
            Method::TraG { anchors: a } => {
                (self.selector.greedy_tra(&query(self.cfg, u_hat, anchors(a), snr)?)?.chosen, false)
            }
            Method::TraExh { anchors: a } => {
                (self.selector.exhaustive_tra(&query(self.cfg, u_hat, anchors(a), snr)?)?.chosen, false)
            }
            Method::TraDl => {
                let model = self.model.as_ref().expect("model loaded when tra-dl is configured");
                (select_tra_dl(model, u_hat, snr_db, self.cfg.m_target)?, false)
            }
        })
    }

    /// One snapshot at `u_true` through subarray `b`; returns the estimate
    /// and the subarray CRLB.
    fn measure<R: Rng>(&self, b: &SelectionVector, u_true: f64, snr_db: f64, rng: &mut R) -> Result<(f64, f64)> {
        let snr = db_to_linear(snr_db);
        let sub = positions_from_selection(b, &self.cfg.geometry)?;
        let params = SignalParams::for_aggregate_snr(snr, sub.len())?;
        let y = generate_snapshot(&params, &sub, u_true, rng)?;
        let estimate = mle_estimate(&sample_covariance(&y.observation)?, &sub, &self.grid)?;
        Ok((estimate, crlb(snr, &sub)?))
    }

    fn rng(&self, snr_index: usize, method_index: usize, trial: usize) -> ChaCha8Rng {
        let m = if self.cfg.coupled { None } else { Some(method_index) };
        trial_rng(self.cfg.master_seed, snr_index, m, trial)
    }

    fn draw_source<R: Rng>(&self, rng: &mut R) -> f64 {
        let (lo, hi) = self.cfg.u_source_range;
        if lo == hi {
            lo
        } else {
            rng.random_range(lo..hi)
        }
    }

    fn sweep_trial(&self, snr_index: usize, method_index: usize, trial: usize) -> Result<TrialRecord> {
        let snr_db = self.cfg.snr_db_points[snr_index];
        let mut rng = self.rng(snr_index, method_index, trial);
        let u_true = self.draw_source(&mut rng);
        let u_prior = sample_prior(u_true, self.cfg.delta_u, &mut rng);
        let (b, flagged) = self.select(self.cfg.methods[method_index], u_prior, snr_db)?;
        let (estimate, bound) = self.measure(&b, u_true, snr_db, &mut rng)?;
        Ok(TrialRecord {
            snr_index,
            method_index,
            trial,
            u_true,
            u_prior,
            estimate,
            squared_error: (estimate - u_true).powi(2),
            crlb: bound,
            flagged,
        })
    }

    /// Squared error and CRLB for each measurement of one sequential run.
    fn sequential_trial(&self, snr_index: usize, method_index: usize, trial: usize) -> Result<Vec<(f64, f64)>> {
        let snr_db = self.cfg.snr_db_points[snr_index];
        let mut rng = self.rng(snr_index, method_index, trial);
        let u_true = self.draw_source(&mut rng);
        // unused, but keeps the stream aligned with sweep trials
        sample_prior(u_true, self.cfg.delta_u, &mut rng);
        let mut out = Vec::with_capacity(self.cfg.measurements);
        let (mut u_hat, bound) = self.measure(&self.ula, u_true, snr_db, &mut rng)?;
        out.push(((u_hat - u_true).powi(2), bound));
        for _ in 1..self.cfg.measurements {
            let prior = u_hat.clamp(-ANCHOR_LIMIT, ANCHOR_LIMIT);
            let (b, _) = self.select(self.cfg.methods[method_index], prior, snr_db)?;
            let (estimate, bound) = self.measure(&b, u_true, snr_db, &mut rng)?;
            out.push(((estimate - u_true).powi(2), bound));
            u_hat = estimate;
        }
        Ok(out)
    }
}

fn query(cfg: &SimConfig, u_hat: f64, n_anchors: usize, snr: f64) -> Result<SelectionQuery> {
    SelectionQuery::new(anchor_set(u_hat, cfg.delta_u, n_anchors)?, snr, cfg.geometry, cfg.m_target, cfg.n_grid)
}

fn in_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
        None => Ok(job()),
    }
}

fn jobs(cfg: &SimConfig) -> Vec<(usize, usize, usize)> {
    let mut v = Vec::with_capacity(cfg.snr_db_points.len() * cfg.methods.len() * cfg.trials);
    for s in 0..cfg.snr_db_points.len() {
        for m in 0..cfg.methods.len() {
            for t in 0..cfg.trials {
                v.push((s, m, t));
            }
        }
    }
    v
}

pub fn run_mse_sweep(cfg: &SimConfig) -> Result<Vec<CurvePoint>> {
    Ok(run_mse_sweep_detailed(cfg)?.points)
}

/// Sweep that also returns every trial record, in `(snr, method, trial)` order.
pub fn run_mse_sweep_detailed(cfg: &SimConfig) -> Result<SweepOutput> {
    let h = Harness::new(cfg)?;
    let jobs = jobs(cfg);
    let trials: Vec<TrialRecord> =
        in_pool(cfg.threads, || jobs.par_iter().map(|&(s, m, t)| h.sweep_trial(s, m, t)).collect::<Result<_>>())??;

    let ref_sub = positions_from_selection(&h.best_crlb, &cfg.geometry)?;
    let mut points = Vec::new();
    for (chunk, &(s, m, _)) in trials.chunks(cfg.trials).zip(jobs.iter().step_by(cfg.trials)) {
        let snr_db = cfg.snr_db_points[s];
        let count = chunk.len() as f64;
        points.push(CurvePoint {
            snr_db,
            method: cfg.methods[m].to_string(),
            mse: chunk.iter().map(|r| r.squared_error).sum::<f64>() / count,
            trials_used: chunk.len(),
            crlb_ref: crlb(db_to_linear(snr_db), &ref_sub)?,
            crlb_mean: chunk.iter().map(|r| r.crlb).sum::<f64>() / count,
            flagged: chunk.iter().filter(|r| r.flagged).count(),
        });
    }
    Ok(SweepOutput { points, trials })
}

/// Measurement 1 uses the ULA; later measurements re-select around the
/// previous estimate with each configured method.
pub fn run_sequential(cfg: &SimConfig) -> Result<Vec<SequentialPoint>> {
    Ok(run_sequential_detailed(cfg)?.0)
}

/// Sequential run that also returns each run's squared errors by
/// measurement, in `(snr, method, trial)` order.
pub fn run_sequential_detailed(cfg: &SimConfig) -> Result<(Vec<SequentialPoint>, Vec<Vec<f64>>)> {
    let h = Harness::new(cfg)?;
    let jobs = jobs(cfg);
    let runs: Vec<Vec<(f64, f64)>> = in_pool(cfg.threads, || {
        jobs.par_iter().map(|&(s, m, t)| h.sequential_trial(s, m, t)).collect::<Result<_>>()
    })??;

    let mut points = Vec::new();
    for (chunk, &(s, m, _)) in runs.chunks(cfg.trials).zip(jobs.iter().step_by(cfg.trials)) {
        let count = chunk.len() as f64;
        for k in 0..cfg.measurements {
            points.push(SequentialPoint {
                measurement: k + 1,
                snr_db: cfg.snr_db_points[s],
                method: cfg.methods[m].to_string(),
                mse: chunk.iter().map(|r| r[k].0).sum::<f64>() / count,
                trials_used: chunk.len(),
                crlb_mean: chunk.iter().map(|r| r[k].1).sum::<f64>() / count,
            });
        }
    }
    let errors = runs.into_iter().map(|r| r.into_iter().map(|(e, _)| e).collect()).collect();
    Ok((points, errors))
}

/// Ten significant digits, exponent form, independent of locale.
pub fn format_sig10(v: f64) -> String {
    format!("{v:.9e}")
}

pub const SWEEP_HEADER: &str = "snr_db,method,mse,trials,crlb_ref";
pub const SEQUENTIAL_HEADER: &str = "measurement,snr_db,method,mse,trials";

pub fn sweep_csv(points: &[CurvePoint]) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for p in points {
        out += &format!(
            "{},{},{},{},{}\n",
            format_sig10(p.snr_db),
            p.method,
            format_sig10(p.mse),
            p.trials_used,
            format_sig10(p.crlb_ref)
        );
    }
    out
}

pub fn sequential_csv(points: &[SequentialPoint]) -> String {
    let mut out = format!("{SEQUENTIAL_HEADER}\n");
    for p in points {
        out += &format!(
            "{},{},{},{},{}\n",
            p.measurement,
            format_sig10(p.snr_db),
            p.method,
            format_sig10(p.mse),
            p.trials_used
        );
    }
    out
}

pub fn export_csv(points: &[CurvePoint], path: &Path) -> Result<()> {
    if points.is_empty() {
        return Err(Error::invalid("no records to export"));
    }
    fs::write(path, sweep_csv(points))?;
    Ok(())
}

pub fn export_sequential_csv(points: &[SequentialPoint], path: &Path) -> Result<()> {
    if points.is_empty() {
        return Err(Error::invalid("no records to export"));
    }
    fs::write(path, sequential_csv(points))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapSummary {
    pub mean: f64,
    pub std_error: f64,
    /// Percentile interval at the requested level.
    pub lower: f64,
    pub upper: f64,
}

/// Nonparametric bootstrap of the mean.
pub fn bootstrap_mean(values: &[f64], resamples: usize, level: f64, seed: u64) -> Result<BootstrapSummary> {
    if values.is_empty() || resamples < 2 {
        return Err(Error::invalid("bootstrap needs data and at least two resamples"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid("confidence level must be in (0, 1)"));
    }
    let n = values.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| values[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let grand = means.iter().sum::<f64>() / resamples as f64;
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (resamples - 1) as f64;
    let tail = (1.0 - level) / 2.0;
    let at = |q: f64| means[((q * (resamples - 1) as f64).round() as usize).min(resamples - 1)];
    Ok(BootstrapSummary {
        mean: values.iter().sum::<f64>() / n as f64,
        std_error: var.sqrt(),
        lower: at(tail),
        upper: at(1.0 - tail),
    })
}
