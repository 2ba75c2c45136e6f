//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage or configuration errors, 2 when a
//! command fails at run time.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::bench::write_bench_csv;
use super::{reconstruct, resolve_solver, run_bench, run_sweep, Experiment, Method, Observation};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::imaging::{extract_scatterers, form_image, write_scatterers_csv};
use crate::io::{load_data, load_mask, save_data, save_mask};
use crate::model::{observed_power, ApertureMask, DataMatrix};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "isar-frand", version, about = "Sparse-aperture ISAR simulation and reconstruction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// TOML experiment file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides experiment.base_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the SNR grid (dB); `inf` means noiseless.
    #[arg(long, allow_hyphen_values = true)]
    snr: Option<f64>,
    /// Overrides the sample-count grid.
    #[arg(long)]
    samples: Option<usize>,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Synthesise the scene and write truth, observation and mask files.
    Simulate(Common),
    /// Reconstruct a data file and write the estimate, image and scatterers.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        /// Observed-index file; all non-zero entries when omitted.
        #[arg(long)]
        mask: Option<PathBuf>,
        #[arg(long, default_value = "frand", value_parser = parse_method)]
        method: Method,
    },
    /// Monte-Carlo sweep, written to sweep.csv.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Overrides the method list; repeatable.
        #[arg(long, value_parser = parse_method)]
        method: Vec<Method>,
    },
    /// Timing benchmark, written to bench.csv.
    Bench {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_method)]
        method: Vec<Method>,
    },
    /// Render a data file as a PGM image.
    Render {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
    },
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse()
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => EXIT_USAGE,
                _ => EXIT_FAILURE,
            }
        }
    }
}

fn load_config(common: &Common, methods: &[Method]) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let e = &mut cfg.experiment;
    if let Some(s) = common.seed {
        e.base_seed = s;
    }
    if let Some(s) = common.snr {
        e.snr_db = vec![s];
    }
    if let Some(k) = common.samples {
        e.samples = vec![k];
    }
    if !methods.is_empty() {
        e.methods = methods.to_vec();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(common: &Common) -> Result<&Path> {
    fs::create_dir_all(&common.out)?;
    Ok(&common.out)
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate(common) => simulate(&common),
        Command::Solve { common, data, mask, method } => solve_file(&common, &data, mask.as_deref(), method),
        Command::Sweep { common, method } => {
            let exp = Experiment::from_config(&load_config(&common, &method)?)?;
            let report = run_sweep(&exp)?;
            let path = out_dir(&common)?.join("sweep.csv");
            report.write_csv(BufWriter::new(File::create(&path)?))?;
            println!("{}", path.display());
            Ok(())
        }
        Command::Bench { common, method } => {
            let exp = Experiment::from_config(&load_config(&common, &method)?)?;
            let rows = run_bench(&exp)?;
            let path = out_dir(&common)?.join("bench.csv");
            write_bench_csv(&rows, BufWriter::new(File::create(&path)?))?;
            println!("{}", path.display());
            Ok(())
        }
        Command::Render { common, data } => {
            let cfg = load_config(&common, &[])?;
            let z = load_data(&data)?;
            let params = cfg.radar.params()?;
            if !z.matches(&params) {
                return Err(Error::Dimension(format!(
                    "data is {}x{} but the config describes {}x{}",
                    z.n_angles(),
                    z.n_freqs(),
                    params.n_angles,
                    params.n_freqs
                )));
            }
            write_image(out_dir(&common)?, "image", &z, &cfg)
        }
    }
}

fn write_image(dir: &Path, stem: &str, z: &DataMatrix, cfg: &ExperimentConfig) -> Result<()> {
    let img = form_image(z.as_vec(), &cfg.radar.params()?, cfg.experiment.zero_pad)?;
    img.write_pgm(BufWriter::new(File::create(dir.join(format!("{stem}.pgm")))?))?;
    img.write_sidecar(File::create(dir.join(format!("{stem}.txt")))?)?;
    Ok(())
}

/// Writes `truth.isar` (clean, full aperture), `data.isar` (noisy, zero off
/// the mask), `mask.txt` and the resolved `config.toml`, for trial 0 at the
/// first SNR and sample count.
fn simulate(common: &Common) -> Result<()> {
    let cfg = load_config(common, &[])?;
    let exp = Experiment::from_config(&cfg)?;
    let dir = out_dir(common)?;
    let truth = exp.truth();
    let obs = exp.observe(&truth, exp.sample_grid[0], exp.snr_grid[0], 0)?;
    save_data(&truth, &dir.join("truth.isar"))?;
    save_data(&obs.z, &dir.join("data.isar"))?;
    save_mask(&obs.mask, &dir.join("mask.txt"))?;
    fs::write(dir.join("config.toml"), cfg.to_toml())?;
    write_image(dir, "truth", &truth, &cfg)?;
    Ok(())
}

/// Noise standard deviation implied by `snr_db` when the observed power
/// includes the noise: `σ² = P_obs / (1 + 10^(snr/10))`.
fn implied_noise_std(z: &DataMatrix, mask: &ApertureMask, snr_db: f64) -> Result<f64> {
    if snr_db == f64::INFINITY {
        return Ok(0.0);
    }
    Ok((observed_power(z, mask)? / (1.0 + 10f64.powf(snr_db / 10.0))).sqrt())
}

fn solve_file(common: &Common, data: &Path, mask: Option<&Path>, method: Method) -> Result<()> {
    let cfg = load_config(common, &[method])?;
    let params = cfg.radar.params()?;
    let z = load_data(data)?;
    if !z.matches(&params) {
        return Err(Error::Dimension("data dimensions differ from the configured radar".into()));
    }
    let mask = match mask {
        Some(p) => load_mask(p)?,
        None => {
            let nz: Vec<usize> = (0..z.nm()).filter(|&i| z.as_vec()[i].norm() > 0.0).collect();
            ApertureMask::new(nz, z.nm())?
        }
    };
    let noise_std = match common.snr {
        Some(s) => implied_noise_std(&z, &mask, s)?,
        None => 0.0,
    };
    let obs = Observation { z, mask, noise_std };
    let solver = resolve_solver(&cfg.solver, &cfg.lambda, &obs)?;
    let dir = out_dir(common)?;

    let k = cfg.baselines.model_order;
    let (r_hat, scatterers) = match method {
        Method::Frand => {
            let res = crate::frand::solve(&obs.z, &obs.mask, &solver)?;
            let est = extract_scatterers(&res.u_hat, k, &params, Some((&obs.z, &obs.mask)))?;
            res.write_diagnostics(BufWriter::new(File::create(dir.join("diagnostics.csv"))?))?;
            (res.r_hat, est)
        }
        other => {
            let r = reconstruct(other, &obs, &params, &solver, &cfg.baselines)?;
            (r, Vec::new())
        }
    };
    let r_hat = DataMatrix::from_vec(params.n_angles, params.n_freqs, r_hat)?;
    save_data(&r_hat, &dir.join("r_hat.isar"))?;
    write_image(dir, "image", &r_hat, &cfg)?;
    if method == Method::Frand {
        write_scatterers_csv(&scatterers, File::create(dir.join("scatterers.csv"))?)?;
    }
    Ok(())
}
