//! Flag parsing and config-file merging.
//!
//! Every flag can also come from a JSON config file (`--config`);
//! command-line values win. `resolve` folds both into a fully defaulted
//! [`RunConfig`] and enforces mode-specific requirements.

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Search the full sizing lattice for the cheapest feasible system.
    Plan,
    /// Plan with the battery string count pinned (autonomy study).
    Autonomy,
    /// Audit one fixed sizing without searching.
    Evaluate,
    /// Write the sizing problem as an LP-format model file.
    ExportMilp,
    /// Generate a rectangular daily load profile CSV.
    SynthLoad,
}

#[derive(Parser, Debug, Default)]
#[command(
    name = "mgplan",
    version,
    about = "Size PV, wind, and battery storage for an islanded site by net present cost"
)]
pub struct Cli {
    /// Run mode.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Weather CSV with timestamp, ghi_wm2, wind_ms columns.
    #[arg(long)]
    pub weather: Option<PathBuf>,
    /// Load CSV with timestamp, load_kw columns.
    #[arg(long)]
    pub load: Option<PathBuf>,
    /// Turbine power curve CSV (speed_ms, power_kw); bundled 2 kW curve by default.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    /// Component catalog JSON; bundled lead-acid set by default.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Second catalog to plan side by side (plan mode).
    #[arg(long)]
    pub compare: Option<PathBuf>,
    /// Project parameters JSON.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// JSON file supplying any of these flags; explicit flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Allowed unserved-load fraction of total load, in [0, 1].
    #[arg(long)]
    pub unmet_cap: Option<f64>,
    /// Allowed unmet-reserve fraction of total load, in [0, 1].
    #[arg(long)]
    pub reserve_cap: Option<f64>,
    /// Pin the PV unit count.
    #[arg(long)]
    pub fix_pv: Option<u32>,
    /// Pin the wind turbine count.
    #[arg(long)]
    pub fix_wt: Option<u32>,
    /// Pin the battery string count.
    #[arg(long)]
    pub fix_bess: Option<u32>,
    /// Exclude wind turbines from the search.
    #[arg(long)]
    pub no_wt: bool,
    /// Scan the whole lattice instead of best-first search.
    #[arg(long)]
    pub brute_force: bool,
    /// Worker threads; 0 uses one per CPU.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Seed for the bundled synthetic scenario.
    #[arg(long)]
    pub seed: Option<u64>,
    /// PV performance derate applied to normalized irradiance, in (0, 1.2].
    #[arg(long)]
    pub pv_derate: Option<f64>,
    /// Solution file (JSON object or "name value" lines) to validate
    /// against the exported model (export-milp mode).
    #[arg(long)]
    pub check_solution: Option<PathBuf>,
    /// Require end-of-horizon stored energy to return to its initial
    /// level (export-milp mode).
    #[arg(long)]
    pub terminal_soc: bool,
    /// Overnight base load, kW (synth-load mode).
    #[arg(long)]
    pub base_kw: Option<f64>,
    /// Peak-window load, kW (synth-load mode).
    #[arg(long)]
    pub peak_kw: Option<f64>,
    /// Peak window start, hour of day (synth-load mode).
    #[arg(long)]
    pub window_start: Option<f64>,
    /// Peak window end, hour of day; overrides --daily-kwh (synth-load mode).
    #[arg(long)]
    pub window_end: Option<f64>,
    /// Daily energy target used to solve the window length (synth-load mode).
    #[arg(long)]
    pub daily_kwh: Option<f64>,
    /// Days of load to generate (synth-load mode).
    #[arg(long)]
    pub days: Option<u32>,
}

/// Config-file twin of [`Cli`]; unknown keys are rejected so typos fail
/// loudly instead of silently using defaults.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    mode: Option<Mode>,
    weather: Option<PathBuf>,
    load: Option<PathBuf>,
    curve: Option<PathBuf>,
    catalog: Option<PathBuf>,
    compare: Option<PathBuf>,
    params: Option<PathBuf>,
    out: Option<PathBuf>,
    unmet_cap: Option<f64>,
    reserve_cap: Option<f64>,
    fix_pv: Option<u32>,
    fix_wt: Option<u32>,
    fix_bess: Option<u32>,
    no_wt: Option<bool>,
    brute_force: Option<bool>,
    jobs: Option<usize>,
    seed: Option<u64>,
    pv_derate: Option<f64>,
    check_solution: Option<PathBuf>,
    terminal_soc: Option<bool>,
    base_kw: Option<f64>,
    peak_kw: Option<f64>,
    window_start: Option<f64>,
    window_end: Option<f64>,
    daily_kwh: Option<f64>,
    days: Option<u32>,
}

/// Fully resolved run description.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    pub weather: Option<PathBuf>,
    pub load: Option<PathBuf>,
    pub curve: Option<PathBuf>,
    pub catalog: Option<PathBuf>,
    pub compare: Option<PathBuf>,
    pub params: Option<PathBuf>,
    pub out: PathBuf,
    pub unmet_cap: Option<f64>,
    pub reserve_cap: Option<f64>,
    pub fix_pv: Option<u32>,
    pub fix_wt: Option<u32>,
    pub fix_bess: Option<u32>,
    pub no_wt: bool,
    pub brute_force: bool,
    pub jobs: usize,
    pub seed: u64,
    pub pv_derate: f64,
    pub check_solution: Option<PathBuf>,
    pub terminal_soc: bool,
    pub base_kw: f64,
    pub peak_kw: f64,
    pub window_start: f64,
    pub window_end: Option<f64>,
    pub daily_kwh: f64,
    pub days: u32,
}

/// How a resolution failure should exit: bad invocation vs bad input data.
#[derive(Debug)]
pub enum ResolveError {
    Usage(String),
    Input(String),
}

impl std::fmt::Display for ResolveError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ResolveError::Usage(m) | ResolveError::Input(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for ResolveError {}

fn load_file_config(path: &Path) -> Result<FileConfig, ResolveError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ResolveError::Input(format!("config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| ResolveError::Input(format!("config {}: {e}", path.display())))
}

pub fn resolve(cli: Cli) -> Result<RunConfig, ResolveError> {
    let file = match &cli.config {
        Some(path) => load_file_config(path)?,
        None => FileConfig::default(),
    };

    let mode = cli.mode.or(file.mode).ok_or_else(|| {
        ResolveError::Usage(
            "--mode is required (plan, autonomy, evaluate, export-milp, synth-load)".into(),
        )
    })?;

    let cfg = RunConfig {
        mode,
        weather: cli.weather.or(file.weather),
        load: cli.load.or(file.load),
        curve: cli.curve.or(file.curve),
        catalog: cli.catalog.or(file.catalog),
        compare: cli.compare.or(file.compare),
        params: cli.params.or(file.params),
        out: cli.out.or(file.out).unwrap_or_else(|| PathBuf::from("out")),
        unmet_cap: cli.unmet_cap.or(file.unmet_cap),
        reserve_cap: cli.reserve_cap.or(file.reserve_cap),
        fix_pv: cli.fix_pv.or(file.fix_pv),
        fix_wt: cli.fix_wt.or(file.fix_wt),
        fix_bess: cli.fix_bess.or(file.fix_bess),
        no_wt: cli.no_wt || file.no_wt.unwrap_or(false),
        brute_force: cli.brute_force || file.brute_force.unwrap_or(false),
        jobs: cli.jobs.or(file.jobs).unwrap_or(0),
        seed: cli.seed.or(file.seed).unwrap_or(2018),
        pv_derate: cli.pv_derate.or(file.pv_derate).unwrap_or(0.8),
        check_solution: cli.check_solution.or(file.check_solution),
        terminal_soc: cli.terminal_soc || file.terminal_soc.unwrap_or(false),
        base_kw: cli.base_kw.or(file.base_kw).unwrap_or(0.43),
        peak_kw: cli.peak_kw.or(file.peak_kw).unwrap_or(1.33),
        window_start: cli.window_start.or(file.window_start).unwrap_or(9.0),
        window_end: cli.window_end.or(file.window_end),
        daily_kwh: cli.daily_kwh.or(file.daily_kwh).unwrap_or(19.01),
        days: cli.days.or(file.days).unwrap_or(365),
    };

    for (name, value) in [("--unmet-cap", cfg.unmet_cap), ("--reserve-cap", cfg.reserve_cap)] {
        if let Some(v) = value {
            if !(0.0..=1.0).contains(&v) {
                return Err(ResolveError::Usage(format!("{name} must be in [0, 1], got {v}")));
            }
        }
    }
    if !(cfg.pv_derate > 0.0 && cfg.pv_derate <= 1.2) {
        return Err(ResolveError::Usage(format!(
            "--pv-derate must be in (0, 1.2], got {}",
            cfg.pv_derate
        )));
    }
    if cfg.weather.is_some() != cfg.load.is_some() {
        return Err(ResolveError::Usage(
            "provide both --weather and --load, or neither (bundled synthetic scenario)".into(),
        ));
    }
    match cfg.mode {
        Mode::Autonomy if cfg.fix_bess.is_none() => {
            return Err(ResolveError::Usage("autonomy mode requires --fix-bess".into()))
        }
        Mode::Evaluate
            if cfg.fix_pv.is_none() || cfg.fix_wt.is_none() || cfg.fix_bess.is_none() =>
        {
            return Err(ResolveError::Usage(
                "evaluate mode requires --fix-pv, --fix-wt, and --fix-bess".into(),
            ))
        }
        _ => {}
    }
    if cfg.compare.is_some() && cfg.mode != Mode::Plan {
        return Err(ResolveError::Usage("--compare is only valid in plan mode".into()));
    }
    if cfg.check_solution.is_some() && cfg.mode != Mode::ExportMilp {
        return Err(ResolveError::Usage(
            "--check-solution is only valid in export-milp mode".into(),
        ));
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn base_cli(mode: Option<Mode>) -> Cli {
        Cli {
            mode,
            ..Cli::default()
        }
    }

    #[test]
    fn defaults_fill_in() {
        let cfg = resolve(base_cli(Some(Mode::Plan))).unwrap();
        assert_eq!(cfg.out, PathBuf::from("out"));
        assert_eq!(cfg.seed, 2018);
        assert_eq!(cfg.days, 365);
        assert!(!cfg.no_wt);
    }

    #[test]
    fn missing_mode_is_usage() {
        assert!(matches!(resolve(base_cli(None)), Err(ResolveError::Usage(_))));
    }

    #[test]
    fn mode_requirements_enforced() {
        let err = resolve(base_cli(Some(Mode::Autonomy))).unwrap_err();
        assert!(matches!(err, ResolveError::Usage(m) if m.contains("--fix-bess")));
        let mut cli = base_cli(Some(Mode::Evaluate));
        cli.fix_pv = Some(10);
        let err = resolve(cli).unwrap_err();
        assert!(matches!(err, ResolveError::Usage(_)));
    }

    #[test]
    fn cap_ranges_enforced() {
        let mut cli = base_cli(Some(Mode::Plan));
        cli.unmet_cap = Some(1.5);
        assert!(matches!(resolve(cli), Err(ResolveError::Usage(_))));
    }

    #[test]
    fn weather_and_load_must_pair() {
        let mut cli = base_cli(Some(Mode::Plan));
        cli.weather = Some(PathBuf::from("w.csv"));
        assert!(matches!(resolve(cli), Err(ResolveError::Usage(_))));
    }

    #[test]
    fn config_file_supplies_flags_and_cli_overrides() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(br#"{"mode": "synth-load", "seed": 7, "days": 10, "no_wt": true}"#)
            .unwrap();
        let mut cli = base_cli(None);
        cli.config = Some(f.path().to_path_buf());
        cli.seed = Some(99);
        let cfg = resolve(cli).unwrap();
        assert_eq!(cfg.mode, Mode::SynthLoad);
        assert_eq!(cfg.seed, 99, "explicit flag wins over config");
        assert_eq!(cfg.days, 10);
        assert!(cfg.no_wt);
    }

    #[test]
    fn unknown_config_keys_rejected() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(br#"{"mode": "plan", "sede": 7}"#).unwrap();
        let mut cli = base_cli(None);
        cli.config = Some(f.path().to_path_buf());
        let err = resolve(cli).unwrap_err();
        assert!(matches!(err, ResolveError::Input(m) if m.contains("sede")));
    }

    #[test]
    fn compare_restricted_to_plan() {
        let mut cli = base_cli(Some(Mode::SynthLoad));
        cli.compare = Some(PathBuf::from("c.json"));
        assert!(matches!(resolve(cli), Err(ResolveError::Usage(_))));
    }
}
