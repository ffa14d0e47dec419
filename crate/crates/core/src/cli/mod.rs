//! Command-line front end.

pub mod figures;
pub mod output;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use crate::dynamics::{linspace, swap_time, ProtocolConfig};
use crate::error::{Error, Result};
use figures::OmegaGrid;
use output::Table;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Qfi,
    Ng,
    Protocol,
    Measure,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Fock-state metrology data generator.
#[derive(Clone, Debug, Parser)]
#[command(name = "fockmetric", version, about)]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,

    /// Single frequency; overrides the sweep options.
    #[arg(long, conflicts_with_all = ["omega_start", "omega_stop", "omega_count"])]
    pub omega: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub omega_start: f64,
    #[arg(long, default_value_t = 1.0)]
    pub omega_stop: f64,
    #[arg(long, default_value_t = 200)]
    pub omega_count: usize,
    /// Log-spaced frequency grid (the default).
    #[arg(long, conflicts_with = "linear")]
    pub log: bool,
    /// Linearly spaced frequency grid.
    #[arg(long)]
    pub linear: bool,

    /// Comma-separated Fock levels.
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<usize>>,
    /// Treat `--levels` as one equal-weight superposition (qfi command).
    #[arg(long)]
    pub superposition: bool,
    /// Largest superposition size for fig6.
    #[arg(long, default_value_t = figures::FIG6_MAX_N)]
    pub n_max: usize,
    /// Repetitions for the Cramér-Rao bound.
    #[arg(long, default_value_t = 1)]
    pub n_meas: u64,

    #[arg(long, default_value_t = figures::FIG5_GAMMA)]
    pub gamma: f64,
    /// Ancilla Fock level.
    #[arg(long, default_value_t = figures::FIG5_ANCILLA)]
    pub m: usize,
    /// Ancilla minus system frequency (protocol command).
    #[arg(long, default_value_t = 0.0)]
    pub detuning: f64,
    /// Number of time samples.
    #[arg(long, default_value_t = 201)]
    pub t_count: usize,
    /// Last time sample; defaults to the swap time.
    #[arg(long)]
    pub t_stop: Option<f64>,

    /// Measurement strength; omit for a sweep over [0, 1].
    #[arg(long)]
    pub p: Option<f64>,

    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

impl RunConfig {
    fn grid(&self) -> OmegaGrid {
        match self.omega {
            Some(w) => OmegaGrid::single(w),
            None => OmegaGrid {
                start: self.omega_start,
                stop: self.omega_stop,
                count: self.omega_count,
                log: !self.linear,
            },
        }
    }

    fn levels_or(&self, default: &[usize]) -> Vec<usize> {
        self.levels.clone().unwrap_or_else(|| default.to_vec())
    }
}

/// Build the table for a parsed configuration.
pub fn build_table(cfg: &RunConfig) -> Result<Table> {
    match cfg.command {
        Command::Fig1 => figures::fig1(),
        Command::Fig2 => figures::fig2(&cfg.grid(), &cfg.levels_or(&figures::FIG2_LEVELS)),
        Command::Fig3 => figures::fig3(&cfg.grid(), &cfg.levels_or(&figures::FIG3_LEVELS)),
        Command::Fig4 => {
            let omegas = cfg
                .omega
                .map(|w| vec![w])
                .unwrap_or_else(|| figures::FIG4_OMEGAS.to_vec());
            figures::fig4(&omegas, &cfg.levels_or(&figures::FIG4_LEVELS))
        }
        Command::Fig5 => figures::fig5(cfg.gamma, cfg.m, cfg.t_count),
        Command::Fig6 => figures::fig6(&cfg.grid(), cfg.n_max),
        Command::Qfi if cfg.superposition => {
            figures::superposition_table(&cfg.grid(), &cfg.levels_or(&[0, 1]))
        }
        Command::Qfi => figures::qfi_table(
            &cfg.grid(),
            &cfg.levels_or(&figures::FIG2_LEVELS),
            cfg.n_meas,
        ),
        Command::Ng => {
            let levels = cfg.levels_or(&(0..=figures::FIG1_MAX_LEVEL).collect::<Vec<_>>());
            figures::ng_table(cfg.omega.unwrap_or(1.0), &levels)
        }
        Command::Protocol => {
            let omega_s = cfg.omega.unwrap_or(1.0);
            if cfg.gamma <= 0.0 && cfg.t_stop.is_none() {
                return Err(Error::InvalidArgument(
                    "--t-stop is required when gamma = 0".into(),
                ));
            }
            let t_stop = cfg.t_stop.unwrap_or_else(|| swap_time(cfg.gamma));
            let grid = linspace(0.0, t_stop, cfg.t_count)?;
            let pc = ProtocolConfig::new(
                omega_s,
                omega_s + cfg.detuning,
                cfg.gamma,
                cfg.m,
                cfg.m + 4,
                grid,
            )?;
            figures::protocol(&pc, "protocol")
        }
        Command::Measure => {
            let strengths = match cfg.p {
                Some(p) => vec![p],
                None => linspace(0.0, 1.0, 101)?,
            };
            figures::measure_table(
                &strengths,
                cfg.omega.unwrap_or(1.0),
                crate::measurement::PREPARATION_DIM,
            )
        }
    }
}

pub fn write_table<W: Write>(table: &Table, format: Format, out: W) -> Result<()> {
    match format {
        Format::Csv => table.write_csv(out),
        Format::Json => table.write_json(out),
    }
}

/// Build and emit the table; the caller maps errors to exit codes.
pub fn run(cfg: &RunConfig) -> Result<()> {
    let table = build_table(cfg)?;
    match &cfg.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| {
                Error::Io(std::io::Error::new(
                    e.kind(),
                    format!("{}: {e}", path.display()),
                ))
            })?;
            let mut w = BufWriter::new(file);
            write_table(&table, cfg.format, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            write_table(&table, cfg.format, &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

/// Parse `args` and run, returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cfg) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
