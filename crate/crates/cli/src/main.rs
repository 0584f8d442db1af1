//! Command-line front end. Every subcommand is a thin wrapper over library
//! calls; exit codes are 0 on success, 1 for usage or validation errors and
//! 2 when a numerical invariant breaks.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use strobosim::experiments::{
    compare_golden, figure2_experiment, figure_s1_experiment, run_sweep, Figure2Settings, SweepSpec,
    FIGURE2_SPLITS, FIGURE_S1_N0, FIGURE_S1_S, FIGURE_S1_SPLIT,
};
use strobosim::io::{self, ReportRow, StateFile, StoredState};
use strobosim::states::airy_reference_grid;
use strobosim::*;

/// Golden CSVs must agree with a fresh run to this absolute tolerance.
const GOLDEN_TOLERANCE: f64 = 1e-9;

#[derive(Parser)]
#[command(name = "strobosim", version, about = "Stroboscopic nonlinear-kick phase-space simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the protocol from a JSON config and report on the final state.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Also save (and report on) the state after every period; needs --out.
        #[arg(long)]
        snapshots: bool,
        /// Final state file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report CSV with rows for the initial and final states.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Evaluate an observable over a one- or two-parameter grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker count.
        #[arg(long, env = "STROBOSIM_JOBS")]
        jobs: Option<usize>,
        /// 16-bit graymap of a two-axis sweep.
        #[arg(long)]
        heatmap: Option<PathBuf>,
    },
    /// Report on a saved state.
    Analyze {
        #[arg(long)]
        state: PathBuf,
        /// lo:hi:count
        #[arg(long, default_value = "-0.12:0.35:200")]
        lambda_range: LambdaRange,
        #[arg(long)]
        report: PathBuf,
        /// sigma3 curve over the lambda range.
        #[arg(long)]
        curves: Option<PathBuf>,
    },
    /// Write a reference state.
    Reference {
        #[arg(long, value_enum)]
        kind: ReferenceKind,
        /// Comma-separated key=value pairs, e.g. gamma=0.05,s=1.6,n0=0.05.
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Squeezing experiment over the shipped (periods, kicks) splits.
    Fig2 {
        /// Summary CSV (writing it into the golden directory regenerates the golden).
        #[arg(long)]
        out: Option<PathBuf>,
        /// sigma3 curves for every split and the reference.
        #[arg(long)]
        curves: Option<PathBuf>,
        /// W(0, p) cuts.
        #[arg(long)]
        cuts: Option<PathBuf>,
        /// Compare the summary against a committed golden CSV.
        #[arg(long)]
        golden: Option<PathBuf>,
    },
    /// Initial-state (s, n0) scan at the best shipped split.
    #[command(name = "figS1", alias = "figs1")]
    FigS1 {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        heatmap: Option<PathBuf>,
        #[arg(long)]
        golden: Option<PathBuf>,
        #[arg(long, env = "STROBOSIM_JOBS")]
        jobs: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ReferenceKind {
    Airy,
    ExactCubic,
    SqueezedThermal,
}

/// Error type of the CLI: library errors keep their classification.
enum CliError {
    Sim(SimError),
    Usage(String),
    Mismatch(String),
    /// Already reported; exit with the numerical code.
    Numerical,
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Sim(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Sim(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Mismatch(msg)) => {
            eprintln!("golden mismatch: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical) => ExitCode::from(2),
    }
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Simulate { config, snapshots, out, report } => simulate(&config, snapshots, out, report),
        Command::Sweep { config, out, jobs, heatmap } => sweep(&config, &out, jobs, heatmap),
        Command::Analyze { state, lambda_range, report, curves } => analyze(&state, lambda_range, &report, curves),
        Command::Reference { kind, params, out } => reference(kind, &params, &out),
        Command::Fig2 { out, curves, cuts, golden } => fig2(out, curves, cuts, golden),
        Command::FigS1 { out, heatmap, golden, jobs } => fig_s1(out, heatmap, golden, jobs),
    }
}

fn jobs_or_default(jobs: Option<usize>) -> CliResult<usize> {
    match jobs {
        Some(0) => Err(CliError::Usage("--jobs must be at least 1".into())),
        Some(j) => Ok(j),
        None => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    Ok(io::write_atomic(path, text.as_bytes())?)
}

fn report_row(label: &str, state: &WignerState, range: LambdaRange) -> CliResult<ReportRow> {
    Ok(ReportRow {
        label: label.to_string(),
        squeezing: squeezing_report(state, range)?,
        negativity: negativity_report(state),
        norm: state.norm(),
    })
}

fn simulate(config: &Path, snapshots: bool, out: Option<PathBuf>, report: Option<PathBuf>) -> CliResult<()> {
    let config: ProtocolConfig = io::load_json(config)?;
    config.validate()?;
    if snapshots && out.is_none() {
        return Err(CliError::Usage("--snapshots needs --out".into()));
    }
    let initial = squeezed_thermal(&config.grid, config.initial)?;
    let trace = run_protocol(&config, snapshots)?;
    let range = LambdaRange::default();
    let mut rows = vec![report_row("initial", &initial, range)?];
    if let (Some(out), Some(snaps)) = (&out, &trace.snapshots) {
        for (k, snap) in snaps.iter().enumerate() {
            let path = PathBuf::from(format!("{}.period{}", out.display(), k + 1));
            io::save_state(&path, &StateFile::wigner(snap.clone()))?;
            rows.push(report_row(&format!("period {}", k + 1), snap, range)?);
        }
    }
    rows.push(report_row("final", &trace.final_state, range)?);
    if let Some(out) = &out {
        io::save_state(out, &StateFile::wigner(trace.final_state.clone()))?;
    }
    let csv = io::report_csv(&rows);
    match report {
        Some(path) => write_text(&path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn sweep(config: &Path, out: &Path, jobs: Option<usize>, heatmap: Option<PathBuf>) -> CliResult<()> {
    let spec: SweepSpec = io::load_json(config)?;
    let table = run_sweep(&spec, jobs_or_default(jobs)?)?;
    write_text(out, &table.to_csv())?;
    if let Some(path) = heatmap {
        let (rows, cols, values) = table
            .as_matrix()
            .ok_or_else(|| CliError::Usage("--heatmap needs a two-axis sweep".into()))?;
        io::write_atomic(&path, &io::pgm16(rows, cols, &values))?;
    }
    let failed = table.cells.iter().filter(|c| c.value.is_none()).count();
    if failed > 0 {
        log::warn!("{failed} of {} sweep cells failed; see the error column", table.cells.len());
    }
    Ok(())
}

fn analyze(state: &Path, range: LambdaRange, report: &Path, curves: Option<PathBuf>) -> CliResult<()> {
    let (file, load) = io::load_state(state)?;
    let w = match file.state {
        StoredState::Wigner(w) => w,
        StoredState::Density(rho) => {
            if let Some(d) = load.hermiticity_defect {
                log::info!("density matrix hermiticity defect {d:.3e}");
            }
            density_to_wigner(&rho)?
        }
    };
    let label = if file.provenance.is_empty() { state.display().to_string() } else { file.provenance };
    let row = report_row(&label, &w, range)?;
    if let Some(path) = curves {
        write_text(&path, &io::curves_csv(std::slice::from_ref(&label), &[&row.squeezing]))?;
    }
    write_text(report, &io::report_csv(&[row]))
}

fn parse_params(text: &str) -> CliResult<BTreeMap<String, f64>> {
    let mut map = BTreeMap::new();
    for pair in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("parameter `{pair}` is not key=value")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("parameter `{k}` has non-numeric value `{v}`")))?;
        map.insert(k.trim().to_string(), v);
    }
    Ok(map)
}

fn reference(kind: ReferenceKind, params: &str, out: &Path) -> CliResult<()> {
    let mut p = parse_params(params)?;
    let mut take = |key: &str, default: f64| p.remove(key).unwrap_or(default);
    let default_grid = match kind {
        ReferenceKind::Airy => airy_reference_grid(),
        _ => GridSpec::default(),
    };
    let n_points = take("n_points", default_grid.n_points() as f64);
    let half_extent = take("half_extent", default_grid.half_extent());
    if n_points.fract() != 0.0 || n_points < 0.0 {
        return Err(CliError::Usage(format!("n_points = {n_points} must be a whole number")));
    }
    let grid = make_grid(n_points as usize, half_extent)?;
    let state = match kind {
        ReferenceKind::Airy => ideal_cubic_wigner(&grid, take("gamma", 0.05))?,
        ReferenceKind::SqueezedThermal => {
            squeezed_thermal(&grid, SqueezedThermalParams::new(take("n0", 0.0), take("s", 1.0))?)?
        }
        ReferenceKind::ExactCubic => {
            let params = SqueezedThermalParams::new(take("n0", 0.0), take("s", 1.0))?;
            let order = take("order", 3.0);
            if order.fract() != 0.0 || order < 3.0 {
                return Err(CliError::Usage(format!("order = {order} must be a whole number >= 3")));
            }
            exact_nonlinear_gaussian(&grid, params, take("gamma", 0.05), order as u32)?
        }
    };
    if let Some(unused) = p.keys().next() {
        return Err(CliError::Usage(format!("unknown parameter `{unused}` for this reference kind")));
    }
    Ok(io::save_state(out, &StateFile::wigner(state))?)
}

fn check_golden(path: &Path, csv: &str) -> CliResult<()> {
    let expected = std::fs::read_to_string(path).map_err(SimError::from)?;
    let worst = compare_golden(&expected, csv).map_err(|e| CliError::Mismatch(e.to_string()))?;
    if worst > GOLDEN_TOLERANCE {
        return Err(CliError::Mismatch(format!(
            "largest deviation {worst:.3e} exceeds {GOLDEN_TOLERANCE:e}"
        )));
    }
    eprintln!("golden {} matches (largest deviation {worst:.3e})", path.display());
    Ok(())
}

fn emit(out: Option<PathBuf>, csv: &str) -> CliResult<()> {
    match out {
        Some(path) => {
            write_text(&path, csv)?;
            log::info!("wrote {}", path.display());
            if path.components().any(|c| c.as_os_str() == "golden") {
                eprintln!("regenerated golden file {}", path.display());
            }
            Ok(())
        }
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn fig2(out: Option<PathBuf>, curves: Option<PathBuf>, cuts: Option<PathBuf>, golden: Option<PathBuf>) -> CliResult<()> {
    let result = figure2_experiment(&FIGURE2_SPLITS, &Figure2Settings::default())?;
    let csv = result.to_csv();
    if let Some(path) = curves {
        write_text(&path, &result.curves_csv())?;
    }
    if let Some(path) = cuts {
        write_text(&path, &result.cuts_csv())?;
    }
    if let Some(best) = result.best_split() {
        eprintln!("best split: {} periods x {} kicks", best.periods, best.kicks_per_period);
    }
    if let Some(closest) = result.closest_cut() {
        eprintln!(
            "cut closest to the reference: {} periods x {} kicks",
            closest.periods, closest.kicks_per_period
        );
    }
    emit(out, &csv)?;
    if let Some(msg) = &result.aborted {
        eprintln!("error: experiment aborted: {msg}");
        return Err(CliError::Numerical);
    }
    if let Some(path) = golden {
        check_golden(&path, &csv)?;
    }
    Ok(())
}

fn fig_s1(out: Option<PathBuf>, heatmap: Option<PathBuf>, golden: Option<PathBuf>, jobs: Option<usize>) -> CliResult<()> {
    let result = figure_s1_experiment(
        &FIGURE_S1_S,
        &FIGURE_S1_N0,
        FIGURE_S1_SPLIT,
        &ProtocolConfig::figure2(FIGURE_S1_SPLIT.0, FIGURE_S1_SPLIT.1),
        jobs_or_default(jobs)?,
    )?;
    let csv = result.to_csv();
    if let Some(path) = heatmap {
        let values: Vec<Option<f64>> = result.sigma3_min.iter().flatten().copied().collect();
        io::write_atomic(&path, &io::pgm16(FIGURE_S1_S.len(), FIGURE_S1_N0.len(), &values))?;
    }
    emit(out, &csv)?;
    if let Some(path) = golden {
        check_golden(&path, &csv)?;
    }
    Ok(())
}
