//! Subcommand dispatch. `run` never exits the process; it returns the exit
//! code so the binary and the integration tests share one code path.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::PathBuf;

use agv_outage::analysis::{montecarlo_instability, sweep_sampling_time, sweep_trace_time, MonteCarloOptions};
use agv_outage::channel::{db_to_linear, sample_fading_sequence, OutageModel, PhiConvention};
use agv_outage::control::simulate_closed_loop;
use agv_outage::stability::{outage_tolerance_with, StabilityTest};
use agv_outage::Error;
use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{emit_config, parse_config, validate, CliConfig, ConfigError};

const PRECEDENCE: &str = "\
Precedence: command-line flags override values from --config, which override the built-in defaults.
Exit codes: 0 success (including sweeps with flagged rows), 2 usage or configuration error, 3 internal invariant violation.";

#[derive(Debug, Parser)]
#[command(name = "agv-outage", version, about = "Outage tolerance and instability probability of a cloud-controlled AGV", after_help = PRECEDENCE)]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Write CSV output here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Sampling time in milliseconds.
    #[arg(long, global = true, value_name = "MS", allow_negative_numbers = true)]
    ts_ms: Option<f64>,
    /// Trace time in seconds.
    #[arg(long, global = true, value_name = "S", allow_negative_numbers = true)]
    trace_time_s: Option<f64>,
    /// Average SNR in dB.
    #[arg(long, global = true, value_name = "DB", allow_negative_numbers = true)]
    snr_db: Option<f64>,
    /// Stability margin: a step counts as stable when its spectral radius is below 1 - margin.
    #[arg(long, global = true, allow_negative_numbers = true)]
    margin: Option<f64>,
    /// Spectral stability test.
    #[arg(long, global = true, value_enum)]
    test: Option<TestArg>,
    /// Convention for the bivariate Rayleigh outage argument.
    #[arg(long, global = true, value_enum)]
    phi_convention: Option<PhiArg>,
    /// Base PRNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TestArg {
    DelayLifted,
    PerStep,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PhiArg {
    #[value(name = "zorzi_sqrt")]
    ZorziSqrt,
    #[value(name = "paper_literal")]
    PaperLiteral,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the outage tolerance n_max; --out writes the per-candidate scan.
    Nmax,
    /// Tabulate the channel quantities R, gamma_th, rho, phi, P1, Pbb and Pe(n).
    Channel {
        /// Outage counts n to tabulate.
        #[arg(long = "n", value_delimiter = ',', value_name = "N,...")]
        n_list: Option<Vec<usize>>,
        /// Vehicle speed for the Doppler model in m/s; defaults to the track's maximum speed.
        #[arg(long, value_name = "MPS", allow_negative_numbers = true)]
        velocity_mps: Option<f64>,
    },
    /// Sweep the sampling time at fixed trace time.
    SweepTs {
        /// Sampling-time grid in milliseconds.
        #[arg(long, value_delimiter = ',', value_name = "MS,...")]
        grid_ms: Option<Vec<f64>>,
    },
    /// Sweep the trace time at fixed sampling time.
    SweepTrace {
        /// Trace-time grid in seconds.
        #[arg(long, value_delimiter = ',', value_name = "S,...")]
        grid_s: Option<Vec<f64>>,
    },
    /// Simulate the closed loop and write the trajectory.
    Simulate {
        /// Outage burst covering steps START..START+LEN; repeatable.
        #[arg(long = "burst", value_name = "START:LEN", value_parser = parse_burst)]
        bursts: Vec<(usize, usize)>,
        /// Draw the outage schedule from the fading channel.
        #[arg(long, conflicts_with = "bursts")]
        fading: bool,
    },
    /// Monte-Carlo estimate of the instability probability over full traces.
    Montecarlo {
        #[arg(long)]
        runs: Option<usize>,
        /// Also drive the closed loop with every sampled outage sequence.
        #[arg(long)]
        cosimulate: bool,
    },
    /// Print the effective configuration as TOML.
    ShowConfig,
}

fn parse_burst(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected START:LEN, got {s:?}"))?;
    let start = a.trim().parse().map_err(|e| format!("bad burst start {a:?}: {e}"))?;
    let len = b.trim().parse().map_err(|e| format!("bad burst length {b:?}: {e}"))?;
    Ok((start, len))
}

enum Failure {
    Config(String),
    Internal(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. } => Failure::Config(e.to_string()),
            _ => Failure::Internal(e.to_string()),
        }
    }
}

fn io_failure(e: io::Error) -> Failure {
    Failure::Config(format!("cannot write output: {e}"))
}

fn positive_flag(flag: &str, v: f64) -> Result<f64, Failure> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Failure::Config(format!(
            "--{flag} must be a finite number > 0, got {v}"
        )))
    }
}

impl Cli {
    fn resolve(&self) -> Result<CliConfig, Failure> {
        let mut cfg = match &self.config {
            Some(p) => parse_config(p)?,
            None => CliConfig::default(),
        };
        let s = &mut cfg.scenario;
        if let Some(v) = self.ts_ms {
            s.ts = positive_flag("ts-ms", v)? * 1e-3;
        }
        if let Some(v) = self.trace_time_s {
            s.trace_time = positive_flag("trace-time-s", v)?;
        }
        if let Some(v) = self.snr_db {
            if !v.is_finite() {
                return Err(Failure::Config(format!("--snr-db must be finite, got {v}")));
            }
            s.link.avg_snr = db_to_linear(v);
        }
        if let Some(m) = self.margin {
            if !(0.0..1.0).contains(&m) {
                return Err(Failure::Config(format!("--margin must lie in [0, 1), got {m}")));
            }
            s.margin = m;
        }
        if let Some(t) = self.test {
            s.stability_test = match t {
                TestArg::DelayLifted => StabilityTest::DelayLifted,
                TestArg::PerStep => StabilityTest::PerStep,
            };
        }
        if let Some(p) = self.phi_convention {
            s.phi_convention = match p {
                PhiArg::ZorziSqrt => PhiConvention::ZorziSqrt,
                PhiArg::PaperLiteral => PhiConvention::PaperLiteral,
            };
        }
        if let Some(v) = self.seed {
            s.seed = v;
        }
        validate(&cfg)?;
        Ok(cfg)
    }
}

/// Sends CSV output to `--out` or to standard output.
fn emit(out: &Option<PathBuf>, stdout: &mut dyn Write, body: &[u8]) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, body).map_err(|e| Failure::Config(format!("cannot write {}: {e}", p.display()))),
        None => stdout.write_all(body).map_err(io_failure),
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    let mut cfg = cli.resolve()?;
    let mut buf = Vec::new();
    match &cli.command {
        Command::Nmax => {
            let sc = &cfg.scenario;
            let track = sc.reference_track()?;
            let report = outage_tolerance_with(&track, &sc.gains, &sc.tolerance_options())?;
            if let Some(p) = &cli.out {
                for line in sc.metadata_lines(&[("n_max", report.n_max.to_string())]) {
                    writeln!(buf, "{line}").map_err(io_failure)?;
                }
                report.write_candidates_csv(&mut buf).map_err(io_failure)?;
                emit(&Some(p.clone()), stdout, &buf)?;
            }
            if report.search_capped {
                writeln!(
                    stderr,
                    "warning: search reached the trace length; n_max is a lower bound"
                )
                .map_err(io_failure)?;
            }
            writeln!(stdout, "{}", report.n_max).map_err(io_failure)?;
        }
        Command::Channel { n_list, velocity_mps } => {
            if let Some(n) = n_list {
                if n.is_empty() || n.contains(&0) {
                    return Err(Failure::Config("--n must list counts >= 1".into()));
                }
                cfg.sweep.n_list = n.clone();
            }
            let sc = &cfg.scenario;
            let velocity = match velocity_mps {
                Some(v) => positive_flag("velocity-mps", *v)?,
                None => sc.reference_track()?.max_nu(),
            };
            let r = sc.link.spectral_efficiency(sc.ts)?;
            let m = OutageModel::from_link(&sc.link, sc.ts, velocity, sc.phi_convention)?;
            for line in sc.metadata_lines(&[("velocity_mps", velocity.to_string())]) {
                writeln!(buf, "{line}").map_err(io_failure)?;
            }
            writeln!(buf, "R,gamma_th,rho,phi,P1,Pbb,n,Pe(n)").map_err(io_failure)?;
            for &n in &cfg.sweep.n_list {
                writeln!(
                    buf,
                    "{r},{},{},{},{},{},{n},{}",
                    m.gamma_th,
                    m.rho,
                    m.phi,
                    m.p1,
                    m.p_bb,
                    m.consecutive(n)
                )
                .map_err(io_failure)?;
            }
            emit(&cli.out, stdout, &buf)?;
        }
        Command::SweepTs { grid_ms } => {
            let grid: Vec<f64> = match grid_ms {
                Some(g) => g.iter().map(|ms| ms * 1e-3).collect(),
                None => cfg.sweep.ts_grid.clone(),
            };
            let result = sweep_sampling_time(&cfg.scenario, &grid)?;
            result.write_csv(&mut buf).map_err(io_failure)?;
            emit(&cli.out, stdout, &buf)?;
        }
        Command::SweepTrace { grid_s } => {
            let grid = grid_s.clone().unwrap_or_else(|| cfg.sweep.trace_grid.clone());
            let result = sweep_trace_time(&cfg.scenario, &grid)?;
            result.write_csv(&mut buf).map_err(io_failure)?;
            emit(&cli.out, stdout, &buf)?;
        }
        Command::Simulate { bursts, fading } => {
            let sc = &cfg.scenario;
            let track = sc.reference_track()?;
            let steps = track.steps();
            let mut schedule = vec![false; steps];
            let source = if *fading {
                let m = OutageModel::from_link(&sc.link, sc.ts, track.max_nu(), sc.phi_convention)?;
                schedule = sample_fading_sequence(m.rho, m.gamma_th, steps, sc.seed)?;
                "fading".to_string()
            } else {
                for &(start, len) in bursts {
                    if start + len > steps {
                        return Err(Failure::Config(format!(
                            "--burst {start}:{len} extends past the trace ({steps} steps)"
                        )));
                    }
                    schedule[start..start + len].iter_mut().for_each(|f| *f = true);
                }
                let list: Vec<String> = bursts.iter().map(|(s, l)| format!("{s}:{l}")).collect();
                if list.is_empty() {
                    "none".to_string()
                } else {
                    list.join(" ")
                }
            };
            let traj = simulate_closed_loop(&track, &sc.gains, &schedule)?;
            for line in sc.metadata_lines(&[("outages", source)]) {
                writeln!(buf, "{line}").map_err(io_failure)?;
            }
            traj.write_csv(&mut buf).map_err(io_failure)?;
            emit(&cli.out, stdout, &buf)?;
            writeln!(stderr, "max_position_error_m = {}", traj.max_position_error()).map_err(io_failure)?;
        }
        Command::Montecarlo { runs, cosimulate } => {
            let opts = MonteCarloOptions {
                runs: match runs {
                    Some(0) => return Err(Failure::Config("--runs must be at least 1".into())),
                    Some(r) => *r,
                    None => cfg.sweep.runs,
                },
                cosimulate: *cosimulate || cfg.sweep.cosimulate,
                ..MonteCarloOptions::default()
            };
            let result = montecarlo_instability(&cfg.scenario, &opts)?;
            result.write_csv(&mut buf).map_err(io_failure)?;
            emit(&cli.out, stdout, &buf)?;
            writeln!(
                stderr,
                "n_max = {}  unstable runs = {}/{}  estimate = {:.6e}  95% CI = [{:.6e}, {:.6e}]  analytic = {:.6e}  p_us = {:.6e}",
                result.n_max,
                result.unstable_runs,
                result.runs.len(),
                result.estimate,
                result.ci.0,
                result.ci.1,
                result.analytic_run_probability,
                result.p_us
            )
            .map_err(io_failure)?;
        }
        Command::ShowConfig => {
            emit(&cli.out, stdout, emit_config(&cfg).as_bytes())?;
        }
    }
    Ok(())
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(()) => 0,
        Err(Failure::Config(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
        Err(Failure::Internal(msg)) => {
            let _ = writeln!(stderr, "internal error: {msg}");
            3
        }
    }
}
