//! Command-line front end.
//!
//! [`dispatch`] parses arguments and runs one subcommand, writing results to
//! stdout. Values from a `--config` file are overridden by explicit flags.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::beam::{anchor_set, pattern_samples, grid_point, psl, sidelobe_profile, DEFAULT_GRID_POINTS};
use crate::error::{Error, Result};
use crate::estimator::{mle_estimate, GridSpec};
use crate::layout::{
    enumerate_subarrays, greedy_evaluation_count, positions_from_selection, unique_subarray_set, ArrayGeometry,
    SelectionVector, Subarray, UniqueSetStats,
};
use crate::neural::{
    generate_dataset, load_model, save_model, select_tra_dl, train, AdamConfig, MlpModel, DEFAULT_HIDDEN,
};
use crate::selector::{
    binomial, multiplication_count, select_ula, CountMethod, SelectionQuery, SelectionResult, Selector,
    SelectorConfig, DEFAULT_BESSEL_MULTIPLICATIONS,
};
use crate::signal::{db_to_linear, generate_snapshot, sample_covariance, SignalParams};
use crate::sim::{
    export_csv, export_sequential_csv, run_mse_sweep, run_sequential, sequential_csv, sweep_csv, Method, SimConfig,
};

/// Environment variable holding the default worker thread count.
pub const THREADS_ENV: &str = "ANTSEL_THREADS";

/// Table I parameter pairs.
pub const TABLE1_ROWS: [(usize, usize); 6] = [(11, 2), (11, 4), (11, 6), (21, 4), (21, 6), (21, 8)];

#[derive(Parser, Debug)]
#[command(name = "antsel", version, about = "Antenna subarray selection for single-source DOA estimation")]
struct Cli {
    /// Worker threads for parallel sections.
    #[arg(long, global = true, env = THREADS_ENV)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct ArrayArgs {
    /// Number of antennas.
    #[arg(long, default_value_t = 21)]
    n: usize,
    /// Antenna spacing in half-wavelength units.
    #[arg(long, default_value_t = 0.5)]
    d: f64,
}

impl ArrayArgs {
    fn geometry(&self) -> Result<ArrayGeometry> {
        ArrayGeometry::new(self.n, self.d)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List all (or only the unique) selection vectors with M of N antennas.
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// One representative per translation/reflection class.
        #[arg(long)]
        unique: bool,
    },
    /// Candidate-set and switch statistics for one (N, M) pair.
    Stats {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
    },
    /// Beampattern samples, or the sidelobe list with `--sidelobes`.
    Beampattern {
        /// Comma-separated antenna positions.
        #[arg(long)]
        positions: String,
        /// Source direction.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        u0: f64,
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        grid: usize,
        #[arg(long)]
        sidelobes: bool,
    },
    /// Simulate one snapshot and estimate its direction.
    Estimate {
        #[arg(long)]
        positions: String,
        #[arg(long, allow_negative_numbers = true)]
        u: f64,
        #[arg(long, allow_negative_numbers = true)]
        snr_db: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Choose a subarray.
    Select {
        /// ula, tra-g, tra-exh, psl-c[:delta] or tra-dl.
        #[arg(long)]
        method: String,
        #[command(flatten)]
        array: ArrayArgs,
        #[arg(long, default_value_t = 6)]
        m: usize,
        /// Prior direction estimate.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        u_hat: f64,
        #[arg(long, default_value_t = 0.1)]
        delta_u: f64,
        #[arg(long, default_value_t = 5)]
        anchors: usize,
        #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
        snr_db: f64,
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        grid: usize,
        /// Model file for tra-dl.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Generate greedy labels and train the selection network.
    Train {
        #[command(flatten)]
        array: ArrayArgs,
        #[arg(long, default_value_t = 6)]
        m: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 200)]
        iters: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Hidden layer widths.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_HIDDEN)]
        hidden: Vec<usize>,
        #[arg(long, default_value_t = 1e-3)]
        lr: f64,
        #[arg(long, default_value_t = 0.1)]
        batch_fraction: f64,
        #[arg(long, default_value_t = -0.9, allow_negative_numbers = true)]
        u_min: f64,
        #[arg(long, default_value_t = 0.9, allow_negative_numbers = true)]
        u_max: f64,
        #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
        snr_min: f64,
        #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
        snr_max: f64,
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo MSE against SNR.
    Simulate {
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Sequential measurements starting from the ULA.
    Sequential {
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        measurements: Option<usize>,
    },
    /// Candidate-set sizes for the reference (N, M) pairs.
    Table1,
    /// Multiplication counts of the three selectors.
    Table2 {
        #[command(flatten)]
        params: ComplexityParams,
    },
}

#[derive(Args, Debug, Clone)]
struct SimArgs {
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated method tokens.
    #[arg(long)]
    methods: Option<String>,
    /// Comma-separated SNR points in dB.
    #[arg(long, allow_negative_numbers = true)]
    snr_db: Option<String>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    model: Option<PathBuf>,
    /// Draw independent random numbers per method.
    #[arg(long)]
    independent: bool,
}

impl SimArgs {
    fn config(&self, threads: Option<usize>) -> Result<SimConfig> {
        let mut cfg = match &self.config {
            Some(path) => SimConfig::load(path)?,
            None => SimConfig::default(),
        };
        let mut set = |key: &str, value: Option<String>| match value {
            Some(v) => cfg.set(key, &v),
            None => Ok(()),
        };
        set("n", self.n.map(|v| v.to_string()))?;
        set("d", self.d.map(|v| v.to_string()))?;
        set("m", self.m.map(|v| v.to_string()))?;
        set("seed", self.seed.map(|v| v.to_string()))?;
        set("trials", self.trials.map(|v| v.to_string()))?;
        set("methods", self.methods.clone())?;
        set("snr_db", self.snr_db.clone())?;
        set("model", self.model.as_ref().map(|p| p.display().to_string()))?;
        if self.independent {
            cfg.coupled = false;
        }
        if threads.is_some() {
            cfg.threads = threads;
        }
        Ok(cfg)
    }
}

/// Table II inputs; defaults describe the reference setup.
#[derive(Args, Debug, Clone)]
pub struct ComplexityParams {
    #[arg(long, default_value_t = 21)]
    pub n: usize,
    #[arg(long, default_value_t = 6)]
    pub m: usize,
    /// Direction grid size used for sidelobe search.
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    pub grid: usize,
    /// Sidelobes per TRA evaluation.
    #[arg(long, default_value_t = 0)]
    pub sidelobes: u64,
    /// Multiplications per Bessel evaluation.
    #[arg(long, default_value_t = DEFAULT_BESSEL_MULTIPLICATIONS)]
    pub bessel: u64,
    /// Candidates satisfying the PSL constraint.
    #[arg(long, default_value_t = 0)]
    pub feasible: u64,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_HIDDEN)]
    pub hidden: Vec<usize>,
}

impl Default for ComplexityParams {
    fn default() -> Self {
        Self {
            n: 21,
            m: 6,
            grid: DEFAULT_GRID_POINTS,
            sidelobes: 0,
            bessel: DEFAULT_BESSEL_MULTIPLICATIONS,
            feasible: 0,
            hidden: DEFAULT_HIDDEN.to_vec(),
        }
    }
}

/// `N,M,F,F_unique,ratio,G,S,S_unique` for the six reference pairs.
pub fn reproduce_table1() -> Result<String> {
    let mut out = format!("{}\n", UniqueSetStats::CSV_HEADER);
    for (n, m) in TABLE1_ROWS {
        let (_, stats) = unique_subarray_set(n, m)?;
        out += &stats.csv_row();
        out.push('\n');
    }
    Ok(out)
}

/// `method,multiplications` for PSL-C, TRA-G and TRA-DL.
pub fn reproduce_table2(p: &ComplexityParams) -> Result<String> {
    if p.m < 1 || p.m > p.n {
        return Err(Error::invalid(format!("M must be in 1..={}, got {}", p.n, p.m)));
    }
    let total = binomial(p.n, p.m);
    if p.feasible > total {
        return Err(Error::invalid("feasible count exceeds the candidate count"));
    }
    let psl_c = CountMethod::PslC { n: p.n, m: p.m, total, feasible: p.feasible };
    let tra_g = CountMethod::TraG {
        evaluations: greedy_evaluation_count(p.n, p.m),
        n: p.n,
        n_grid: p.grid,
        sidelobes: p.sidelobes,
        bessel: p.bessel,
    };
    let tra_dl = CountMethod::TraDl { layer_dims: MlpModel::dims_for(&p.hidden, p.n) };
    Ok(format!(
        "method,multiplications\npsl-c,{}\ntra-g,{}\ntra-dl,{}\n",
        multiplication_count(&psl_c),
        multiplication_count(&tra_g),
        multiplication_count(&tra_dl)
    ))
}

fn parse_positions(text: &str) -> Result<Subarray> {
    let positions = text
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad position '{v}'"))))
        .collect::<Result<Vec<_>>>()?;
    Subarray::new(positions)
}

fn join_positions(sub: &Subarray) -> String {
    sub.positions().iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",")
}

/// Runs `argv` (program name first) and writes results to `out`.
pub fn run<I, T>(argv: I, out: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| Error::invalid(e.to_string()))?;
    execute(cli, out)
}

/// Entry point for the binary. Returns the process exit status.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            1
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let threads = cli.threads;
    if threads == Some(0) {
        return Err(Error::invalid("threads must be at least 1"));
    }
    match cli.command {
        Command::Enumerate { n, m, unique } => {
            let list = if unique { unique_subarray_set(n, m)?.0 } else { enumerate_subarrays(n, m)? };
            for b in list {
                writeln!(out, "{b}")?;
            }
        }
        Command::Stats { n, m } => {
            let (_, stats) = unique_subarray_set(n, m)?;
            writeln!(out, "{}\n{}", UniqueSetStats::CSV_HEADER, stats.csv_row())?;
        }
        Command::Beampattern { positions, u0, grid, sidelobes } => {
            let sub = parse_positions(&positions)?;
            let profile = sidelobe_profile(&sub, u0, grid)?;
            if sidelobes {
                writeln!(out, "location,value,correlation")?;
                for s in &profile.sidelobes {
                    writeln!(out, "{},{},{}", s.location, s.value, s.correlation)?;
                }
                writeln!(out, "# psl={}", psl(&profile))?;
            } else {
                writeln!(out, "u,value")?;
                for (j, v) in pattern_samples(sub.positions(), u0, grid).iter().enumerate() {
                    writeln!(out, "{},{}", grid_point(j, grid), v)?;
                }
            }
        }
        Command::Estimate { positions, u, snr_db, seed } => {
            let sub = parse_positions(&positions)?;
            let params = SignalParams::for_aggregate_snr(db_to_linear(snr_db), sub.len())?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let y = generate_snapshot(&params, &sub, u, &mut rng)?;
            let estimate = mle_estimate(&sample_covariance(&y.observation)?, &sub, &GridSpec::default())?;
            writeln!(out, "u_true,estimate,squared_error\n{u},{estimate},{}", (estimate - u).powi(2))?;
        }
        Command::Select { method, array, m, u_hat, delta_u, anchors, snr_db, grid, model } => {
            let g = array.geometry()?;
            let method: Method = method.parse()?;
            let query = || {
                let n_a = match method {
                    Method::TraG { anchors: Some(a) } | Method::TraExh { anchors: Some(a) } => a,
                    _ => anchors,
                };
                SelectionQuery::new(anchor_set(u_hat, delta_u, n_a)?, db_to_linear(snr_db), g, m, grid)
            };
            let selector = Selector::new(SelectorConfig::default());
            let result = match method {
                Method::Ula => plain_result(select_ula(&g, m)?),
                Method::TraG { .. } => selector.greedy_tra(&query()?)?,
                Method::TraExh { .. } => selector.exhaustive_tra(&query()?)?,
                Method::PslC { delta } => selector.psl_c(&query()?, delta)?,
                Method::TraDl => {
                    let path = model.ok_or_else(|| Error::invalid("tra-dl needs --model"))?;
                    let net = load_model(&path)?;
                    if net.output_dim() != g.n_antennas() {
                        return Err(Error::Model(format!(
                            "model has {} outputs, array has {}",
                            net.output_dim(),
                            g.n_antennas()
                        )));
                    }
                    let chosen = select_tra_dl(&net, u_hat, snr_db, m)?;
                    SelectionResult { mult_count: net.weight_multiplications(), ..plain_result(chosen) }
                }
            };
            let sub = positions_from_selection(&result.chosen, &g)?;
            writeln!(out, "method,selection,positions,objective,evaluations,multiplications")?;
            writeln!(
                out,
                "{method},{},\"{}\",{},{},{}",
                result.chosen,
                join_positions(&sub),
                result.objective,
                result.evaluations,
                result.mult_count
            )?;
        }
        Command::Train {
            array,
            m,
            samples,
            iters,
            seed,
            hidden,
            lr,
            batch_fraction,
            u_min,
            u_max,
            snr_min,
            snr_max,
            grid,
            out: path,
        } => {
            let g = array.geometry()?;
            let adam = AdamConfig { learning_rate: lr, iterations: iters, batch_fraction, ..AdamConfig::default() };
            let template = SelectionQuery::new(anchor_set(0.0, 0.0, 1)?, 1.0, g, m, grid)?;
            let selector = Selector::new(SelectorConfig::default());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let data = in_threads(threads, || {
                generate_dataset(samples, (u_min, u_max), (snr_min, snr_max), &template, &selector, &mut rng)
            })??;
            let mut model = MlpModel::init(MlpModel::dims_for(&hidden, g.n_antennas()), &mut rng)?;
            let report = train(&mut model, &data, &adam, &mut rng)?;
            model.metadata.seed = seed;
            model.metadata.u_range = (u_min, u_max);
            model.metadata.snr_db_range = (snr_min, snr_max);
            model.metadata.dataset_size = samples;
            model.metadata.n_antennas = g.n_antennas();
            model.metadata.m_target = m;
            model.metadata.spacing = g.spacing();
            save_model(&model, &path)?;
            writeln!(out, "iteration,loss")?;
            for (i, l) in report.loss_history.iter().enumerate() {
                writeln!(out, "{},{l}", i + 1)?;
            }
        }
        Command::Simulate { sim } => {
            let cfg = sim.config(threads)?;
            let points = run_mse_sweep(&cfg)?;
            match &sim.out {
                Some(path) => export_csv(&points, path)?,
                None => out.write_all(sweep_csv(&points).as_bytes())?,
            }
        }
        Command::Sequential { sim, measurements } => {
            let mut cfg = sim.config(threads)?;
            if let Some(k) = measurements {
                cfg.measurements = k;
            }
            let points = run_sequential(&cfg)?;
            match &sim.out {
                Some(path) => export_sequential_csv(&points, path)?,
                None => out.write_all(sequential_csv(&points).as_bytes())?,
            }
        }
        Command::Table1 => out.write_all(reproduce_table1()?.as_bytes())?,
        Command::Table2 { params } => out.write_all(reproduce_table2(&params)?.as_bytes())?,
    }
    Ok(())
}

fn plain_result(chosen: SelectionVector) -> SelectionResult {
    SelectionResult { chosen, objective: f64::NAN, evaluations: 0, mult_count: 0, infeasible_fallback: false }
}

fn in_threads<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))
            .map(|pool| pool.install(job)),
        None => Ok(job()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_text(args: &[&str]) -> Result<String> {
        let mut buf = Vec::new();
        run(std::iter::once("antsel").chain(args.iter().copied()), &mut buf)?;
        Ok(String::from_utf8(buf).unwrap())
    }

    #[test]
    fn table2_defaults() {
        let text = reproduce_table2(&ComplexityParams::default()).unwrap();
        assert!(text.contains(&format!("psl-c,{}\n", 6 * 21 + 6 * 54264)));
        assert!(text.contains(&format!("tra-g,{}\n", 210 * (2 * 21 * 2048 + 21))));
        assert!(text.ends_with("tra-dl,5488\n"));
        let bad = ComplexityParams { m: 30, ..ComplexityParams::default() };
        assert!(reproduce_table2(&bad).is_err());
    }

    #[test]
    fn stats_and_select_rows() {
        assert!(run_text(&["stats", "--n", "11", "--m", "2"]).unwrap().contains("55,10"));
        let out = run_text(&["select", "--method", "ula", "--n", "21", "--m", "6", "--d", "0.5"]).unwrap();
        assert!(out.contains("\"0,1,2,3,4,5\""), "{out}");
    }

    #[test]
    fn unknown_inputs_are_errors() {
        assert!(run_text(&[]).is_err());
        assert!(run_text(&["frobnicate"]).is_err());
        assert!(run_text(&["stats", "--n", "11", "--m", "2", "--colour", "red"]).is_err());
        assert!(run_text(&["select", "--method", "best", "--m", "4"]).is_err());
        assert!(run_text(&["select", "--method", "tra-dl", "--m", "4"]).is_err());
    }
}
