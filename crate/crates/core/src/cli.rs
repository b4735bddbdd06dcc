//! Batch command line: `evolve`, `check` and `norms`.
//!
//! Exit codes: 0 success, 1 configuration or input error, 2 blow-up during
//! `evolve`, 3 a failed hard assertion in `check`.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::analysis::{norm_report, xsb_weight_norm, Flavor, NormReport, SpaceTimeBlock, Window};
use crate::config::{DataSpec, RunConfig, SnapshotPolicy};
use crate::error::{Error, Result};
use crate::evolve::{run_with, RunRow, RunStatus, System};
use crate::field::SpectralField;
use crate::grid::Grid;
use crate::random::SpectrumProfile;
use crate::snapshot::{read_fields, write_record};
use crate::suites::{
    bounds_suite, crossval_suite, gauge_suite, identity_suite, weights_suite, SuiteReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_BLOWUP: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

pub const SUITES: [&str; 5] = ["identities", "gauge", "bounds", "weights", "crossval"];

/// Environment variable capping the worker pool size.
pub const THREADS_ENV: &str = "GAUGEWAVE_THREADS";

#[derive(Parser, Debug)]
#[command(name = "gaugewave", version, about = "Pseudospectral gauge field evolution and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolve the configured initial data and write diagnostics.
    Evolve { config: PathBuf },
    /// Run an invariant suite: identities, gauge, bounds, weights or crossval.
    Check { suite: String, config: PathBuf },
    /// Sobolev and space-time norms of the fields in a snapshot file.
    Norms {
        snapshot: PathBuf,
        #[arg(long = "s", value_delimiter = ',', allow_negative_numbers = true)]
        s: Vec<f64>,
        #[arg(long = "b", value_delimiter = ',', allow_negative_numbers = true)]
        b: Vec<f64>,
        /// Time between consecutive records of one field.
        #[arg(long, default_value_t = 1.0)]
        dt: f64,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    init_threads();
    match cli.command {
        Command::Evolve { config } => cmd_evolve(&config),
        Command::Check { suite, config } => cmd_check(&suite, &config),
        Command::Norms { snapshot, s, b, dt } => cmd_norms(&snapshot, &s, &b, dt),
    }
}

fn init_threads() {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                // Fails only when a pool already exists, e.g. a second call in one process.
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("warning: ignoring {THREADS_ENV}={v:?}"),
        }
    }
}

fn fail(code: i32, e: &dyn std::fmt::Display) -> i32 {
    eprintln!("error: {e}");
    code
}

fn write_snapshot_record(w: &mut impl Write, system: &System) -> Result<()> {
    for (name, f) in system.named_fields() {
        write_record(w, name, f)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct RunDocument<'a> {
    schema: u32,
    system: &'static str,
    grid: &'a Grid,
    integrator: &'a crate::evolve::IntegratorConfig,
    #[serde(flatten)]
    status: &'a RunStatus,
    regauge_defect: Option<f64>,
    rows: &'a [RunRow],
}

pub fn cmd_evolve(path: &Path) -> i32 {
    let cfg = match RunConfig::load(path) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_CONFIG, &e),
    };
    match evolve_to_disk(&cfg) {
        Ok(RunStatus::Completed) => EXIT_OK,
        Ok(RunStatus::BlowUp { time, reason }) => {
            eprintln!("blow-up at t = {time}: {reason}");
            EXIT_BLOWUP
        }
        Err(e) => fail(EXIT_CONFIG, &e),
    }
}

/// Runs the configured evolution and writes `run.csv`, `run.json` and
/// snapshots into the output directory.
pub fn evolve_to_disk(cfg: &RunConfig) -> Result<RunStatus> {
    let initial = cfg.initial_state()?;
    let dir = &cfg.output.directory;
    fs::create_dir_all(dir)?;
    let mut rows_snap = match cfg.output.snapshots {
        SnapshotPolicy::Rows => Some(BufWriter::new(File::create(dir.join("snapshots.gw"))?)),
        _ => None,
    };
    let record = run_with(&initial, &cfg.integrator, |_, s| {
        if let Some(w) = rows_snap.as_mut() {
            write_snapshot_record(w, s)?;
        }
        Ok(())
    })?;
    if let Some(mut w) = rows_snap {
        w.flush()?;
    }
    if cfg.output.snapshots == SnapshotPolicy::Final {
        let mut w = BufWriter::new(File::create(dir.join("final.gw"))?);
        write_snapshot_record(&mut w, &record.final_state)?;
        w.flush()?;
    }
    if cfg.output.csv {
        let mut w = BufWriter::new(File::create(dir.join("run.csv"))?);
        writeln!(w, "# schema=1")?;
        writeln!(w, "{}", RunRow::CSV_HEADER)?;
        for r in &record.rows {
            writeln!(w, "{}", r.csv_line())?;
        }
        w.flush()?;
    }
    if cfg.output.json {
        let doc = RunDocument {
            schema: 1,
            system: match initial {
                System::Mkg(_) => "mkg",
                System::Mcsh(..) => "mcsh",
            },
            grid: &cfg.grid,
            integrator: &cfg.integrator,
            status: &record.status,
            regauge_defect: record.regauge_defect,
            rows: &record.rows,
        };
        let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::InvalidField(e.to_string()))?;
        fs::write(dir.join("run.json"), text + "\n")?;
    }
    Ok(record.status)
}

/// Runs a named suite against a configuration.
pub fn run_suite(suite: &str, cfg: &RunConfig) -> Result<SuiteReport> {
    let grid = cfg.grid;
    match suite {
        "identities" => {
            // Two resolutions of one box; the coarse one fixes the profile.
            let (coarse, fine) = if grid.dim() == 3 && grid.n() >= 16 {
                (Grid::new(3, grid.n() / 2, grid.box_length())?, grid)
            } else {
                (grid, Grid::new(grid.dim(), 2 * grid.n(), grid.box_length())?)
            };
            let (seeds, profile) = match cfg.data {
                DataSpec::Random { seed, xi0, .. } => (seed..seed + 5, SpectrumProfile::new(xi0)),
                _ => (0..5, SpectrumProfile::new(0.1 * coarse.nyquist_wavenumber())),
            };
            identity_suite(&[coarse, fine], seeds, &profile, 1e-10)
        }
        "gauge" => gauge_suite(&cfg.initial_state()?, &cfg.integrator, 1e-8),
        "bounds" => bounds_suite(&cfg.initial_state()?, &cfg.integrator),
        "weights" => Ok(weights_suite(&grid, 64)),
        "crossval" => crossval_suite(&cfg.initial_state()?, &cfg.integrator, 1e-10, 1.8),
        other => Err(Error::precondition(format!(
            "unknown suite {other:?} (expected one of {})",
            SUITES.join(", ")
        ))),
    }
}

pub fn cmd_check(suite: &str, path: &Path) -> i32 {
    if !SUITES.contains(&suite) {
        return fail(
            EXIT_CONFIG,
            &format!("unknown suite {suite:?} (expected one of {})", SUITES.join(", ")),
        );
    }
    let cfg = match RunConfig::load(path) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_CONFIG, &e),
    };
    let report = match run_suite(suite, &cfg) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_CONFIG, &e),
    };
    let text = match serde_json::to_string_pretty(&report) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_CONFIG, &e),
    };
    println!("{text}");
    let out = cfg.output.directory.join(format!("check_{suite}.json"));
    if let Err(e) = fs::create_dir_all(&cfg.output.directory).and_then(|_| fs::write(&out, text + "\n")) {
        return fail(EXIT_CONFIG, &e);
    }
    for c in report.checks.iter().filter(|c| !c.passed) {
        eprintln!("failed: {} = {:.3e} (limit {:.3e})", c.name, c.value, c.limit);
    }
    if report.passed {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FieldNorms {
    pub name: String,
    pub record: usize,
    #[serde(flatten)]
    pub norms: NormReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct XsbEntry {
    pub name: String,
    pub s: f64,
    pub b: f64,
    pub flavor: Flavor,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormsOutput {
    pub fields: Vec<FieldNorms>,
    pub xsb: Vec<XsbEntry>,
}

/// Norms of every record, plus `X^{s,b}` norms for field names that occur
/// in at least eight consecutive records spaced `dt` apart.
pub fn snapshot_norms(path: &Path, s: &[f64], b: &[f64], dt: f64) -> Result<NormsOutput> {
    let records = read_fields(path)?;
    let mut fields = Vec::new();
    let mut series: BTreeMap<String, Vec<SpectralField>> = BTreeMap::new();
    for (name, f) in records {
        let list = series.entry(name.clone()).or_default();
        fields.push(FieldNorms {
            name,
            record: list.len(),
            norms: norm_report(&f, s),
        });
        list.push(f);
    }
    let mut xsb = Vec::new();
    for (name, samples) in series {
        if samples.len() < 8 || b.is_empty() {
            continue;
        }
        let block = SpaceTimeBlock::new(samples, dt, Window::CosineTaper)?;
        let s_list: &[f64] = if s.is_empty() { &[0.0] } else { s };
        for &sv in s_list {
            for &bv in b {
                xsb.push(XsbEntry {
                    name: name.clone(),
                    s: sv,
                    b: bv,
                    flavor: Flavor::Wave,
                    value: xsb_weight_norm(&block, sv, bv, Flavor::Wave),
                });
            }
        }
    }
    Ok(NormsOutput { fields, xsb })
}

pub fn cmd_norms(path: &Path, s: &[f64], b: &[f64], dt: f64) -> i32 {
    if !(dt > 0.0 && dt.is_finite()) {
        return fail(EXIT_CONFIG, &"--dt must be positive");
    }
    match snapshot_norms(path, s, b, dt).and_then(|o| {
        serde_json::to_string_pretty(&o).map_err(|e| Error::InvalidField(e.to_string()))
    }) {
        Ok(text) => {
            println!("{text}");
            EXIT_OK
        }
        Err(e) => fail(EXIT_CONFIG, &e),
    }
}
