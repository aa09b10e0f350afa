//! Parameter sweeps, the analytic-versus-simulation validation suite and
//! diversity fits, as driven by the command line.

use std::path::PathBuf;

use serde::Serialize;

use crate::asymptotics::{self, DiversityFit, Side};
use crate::closed_form;
use crate::error::{Error, Result};
use crate::monte_carlo::{estimate_with_breakdown, Execution, StreamRole};
use crate::rates::Scheme;
use crate::system::{derive, validate, SystemConfig};

/// Minimum trial count accepted whenever simulation is requested.
pub const MIN_TRIALS: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    MerDb,
    SnrDb,
    NumPairs,
    NE,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::MerDb => "mer_db",
            Axis::SnrDb => "snr_db",
            Axis::NumPairs => "num_pairs",
            Axis::NE => "n_e",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "mer_db" => Some(Axis::MerDb),
            "snr_db" => Some(Axis::SnrDb),
            "num_pairs" => Some(Axis::NumPairs),
            "n_e" => Some(Axis::NE),
            _ => None,
        }
    }

    fn is_integer(self) -> bool {
        matches!(self, Axis::NumPairs | Axis::NE)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Evaluator {
    Mc,
    Analytic,
    Lower,
    Upper,
}

impl Evaluator {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "mc" => Some(Evaluator::Mc),
            "analytic" => Some(Evaluator::Analytic),
            "lower" => Some(Evaluator::Lower),
            "upper" => Some(Evaluator::Upper),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub from: f64,
    pub to: f64,
    pub step: f64,
    pub schemes: Vec<Scheme>,
    pub evaluators: Vec<Evaluator>,
    pub trials: u64,
    pub seed: u64,
    pub output: Option<PathBuf>,
    /// SNR sweeps move `p_s` together with `p_t` when set.
    pub tie_source_power: bool,
}

impl SweepSpec {
    pub fn new(axis: Axis, from: f64, to: f64, step: f64) -> Self {
        Self {
            axis,
            from,
            to,
            step,
            schemes: vec![Scheme::NonCoop, Scheme::Rsdps, Scheme::Tas],
            evaluators: vec![Evaluator::Analytic],
            trials: 1_000_000,
            seed: 1,
            output: None,
            tie_source_power: true,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.step.is_nan() || self.step <= 0.0 {
            return Err(Error::InvalidSweep("step must be > 0".into()));
        }
        if self.from.is_nan() || self.to.is_nan() || self.from > self.to {
            return Err(Error::InvalidSweep("from must be ≤ to".into()));
        }
        if self.schemes.is_empty() || self.evaluators.is_empty() {
            return Err(Error::InvalidSweep(
                "at least one scheme and one evaluator are required".into(),
            ));
        }
        if self.evaluators.contains(&Evaluator::Mc) && self.trials < MIN_TRIALS {
            return Err(Error::TrialsBelowMinimum {
                got: self.trials,
                min: MIN_TRIALS,
            });
        }
        Ok(())
    }

    pub fn axis_values(&self) -> Vec<f64> {
        let n = ((self.to - self.from) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.from + self.step * i as f64).collect()
    }

    /// Config at one axis value, built from `base` and revalidated.
    pub fn config_at(&self, base: &SystemConfig, x: f64) -> Result<SystemConfig> {
        let cfg = match self.axis {
            Axis::MerDb => base.with_mer_db(x),
            Axis::SnrDb => base.with_snr_db(x, self.tie_source_power),
            Axis::NumPairs | Axis::NE => {
                if x < 1.0 || (x - x.round()).abs() > 1e-9 {
                    return Err(Error::InvalidSweep(format!(
                        "{} must be a positive integer, got {x}",
                        self.axis.name()
                    )));
                }
                let v = x.round() as usize;
                if self.axis == Axis::NumPairs {
                    SystemConfig { m: v, ..base.clone() }
                } else {
                    SystemConfig { n_e: v, ..base.clone() }
                }
            }
        };
        validate(cfg)
    }
}

/// One result cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Empty,
    Value(f64),
    Error(String),
}

impl Cell {
    fn from_result(r: Result<f64>) -> Self {
        match r {
            Ok(v) => Cell::Value(v),
            Err(e) => Cell::Error(e.to_string()),
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Cell::Value(v) => Some(*v),
            _ => None,
        }
    }

    fn text(&self) -> String {
        match self {
            Cell::Empty => String::new(),
            Cell::Value(v) => format_float(*v),
            Cell::Error(e) => format!("ERR: {e}"),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Empty => serde_json::Value::Null,
            Cell::Value(v) => serde_json::json!(v),
            Cell::Error(e) => serde_json::Value::String(format!("ERR: {e}")),
        }
    }
}

/// Shortest round-trip representation, in exponent form for tiny or huge
/// magnitudes.
pub fn format_float(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-4 || v.abs() >= 1e15) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_name: &'static str,
    pub axis_value: f64,
    pub scheme: Scheme,
    pub sop_mc: Cell,
    pub mc_stderr: Cell,
    pub sop_analytic: Cell,
    pub sop_lower: Cell,
    pub sop_upper: Cell,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
}

pub const CSV_HEADER: [&str; 10] = [
    "axis_name",
    "axis_value",
    "scheme",
    "sop_mc",
    "mc_stderr",
    "sop_analytic",
    "sop_lower",
    "sop_upper",
    "trials",
    "seed",
];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(CSV_HEADER).map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.axis_name.to_string(),
                format_float(r.axis_value),
                r.scheme.name().to_string(),
                r.sop_mc.text(),
                r.mc_stderr.text(),
                r.sop_analytic.text(),
                r.sop_lower.text(),
                r.sop_upper.text(),
                r.trials.map(|t| t.to_string()).unwrap_or_default(),
                r.seed.map(|s| s.to_string()).unwrap_or_default(),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                serde_json::json!({
                    "axis_name": r.axis_name,
                    "axis_value": r.axis_value,
                    "scheme": r.scheme.name(),
                    "sop_mc": r.sop_mc.json(),
                    "mc_stderr": r.mc_stderr.json(),
                    "sop_analytic": r.sop_analytic.json(),
                    "sop_lower": r.sop_lower.json(),
                    "sop_upper": r.sop_upper.json(),
                    "trials": r.trials,
                    "seed": r.seed,
                })
            })
            .collect();
        serde_json::to_string_pretty(&rows).expect("rows serialize")
    }

    /// Column of analytic values for one scheme, in axis order.
    pub fn analytic_column(&self, scheme: Scheme) -> Vec<Cell> {
        self.rows
            .iter()
            .filter(|r| r.scheme == scheme)
            .map(|r| r.sop_analytic.clone())
            .collect()
    }
}

fn row_for(spec: &SweepSpec, base: &SystemConfig, x: f64, scheme: Scheme) -> Result<SweepRow> {
    let cfg = spec.config_at(base, x)?;
    let d = derive(&cfg);
    let wants = |e: Evaluator| spec.evaluators.contains(&e);
    let mut row = SweepRow {
        axis_name: spec.axis.name(),
        axis_value: x,
        scheme,
        sop_mc: Cell::Empty,
        mc_stderr: Cell::Empty,
        sop_analytic: Cell::Empty,
        sop_lower: Cell::Empty,
        sop_upper: Cell::Empty,
        trials: None,
        seed: None,
    };
    if wants(Evaluator::Mc) {
        let est = crate::monte_carlo::estimate_sop(&cfg, scheme, spec.trials, spec.seed);
        row.sop_mc = Cell::Value(est.p_hat);
        row.mc_stderr = Cell::Value(est.stderr);
        row.trials = Some(spec.trials);
        row.seed = Some(spec.seed);
    }
    if wants(Evaluator::Analytic) {
        row.sop_analytic = Cell::from_result(closed_form::sop(scheme, &cfg, &d));
    }
    if wants(Evaluator::Lower) {
        row.sop_lower = Cell::from_result(asymptotics::sop_bound(scheme, Side::Lower, &cfg, &d));
    }
    if wants(Evaluator::Upper) {
        row.sop_upper = Cell::from_result(asymptotics::sop_bound(scheme, Side::Upper, &cfg, &d));
    }
    Ok(row)
}

/// Evaluates every (axis value, scheme) point; rows come back in axis order,
/// then scheme order, regardless of which worker finished first.
pub fn run_sweep(spec: &SweepSpec, base: &SystemConfig) -> Result<SweepTable> {
    spec.check()?;
    let base = validate(base.clone())?;
    let mut schemes = spec.schemes.clone();
    schemes.sort();
    schemes.dedup();
    let points: Vec<(f64, Scheme)> = spec
        .axis_values()
        .into_iter()
        .flat_map(|x| schemes.iter().map(move |&s| (x, s)))
        .collect();
    if spec.axis.is_integer() {
        for &(x, _) in &points {
            spec.config_at(&base, x)?;
        }
    }
    #[cfg(feature = "parallel")]
    let rows: Result<Vec<SweepRow>> = {
        use rayon::prelude::*;
        points
            .par_iter()
            .map(|&(x, s)| row_for(spec, &base, x, s))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Result<Vec<SweepRow>> = points
        .iter()
        .map(|&(x, s)| row_for(spec, &base, x, s))
        .collect();
    Ok(SweepTable { rows: rows? })
}

/// Writes the table to `spec.output` (or returns the text) in the format.
pub fn render(table: &SweepTable, json: bool) -> Result<String> {
    if json {
        Ok(table.to_json())
    } else {
        table.to_csv()
    }
}

/// Which configurations the validation suite covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidateGrid {
    /// The given config only.
    Point,
    /// `M in {1,2,4}`, every antenna count in `{1,2}`, MER in `{0,5,10}` dB.
    Acceptance,
}

pub fn acceptance_grid(base: &SystemConfig) -> Vec<SystemConfig> {
    let mut out = Vec::new();
    for m in [1usize, 2, 4] {
        for n_t in [1usize, 2] {
            for n_r in [1usize, 2] {
                for n_e in [1usize, 2] {
                    for mer in [0.0, 5.0, 10.0] {
                        out.push(
                            SystemConfig {
                                m,
                                n_t,
                                n_r,
                                n_e,
                                ..base.clone()
                            }
                            .with_mer_db(mer),
                        );
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationCell {
    pub config: String,
    pub evaluator: &'static str,
    pub analytic: f64,
    pub mc: f64,
    pub stderr: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidateReport {
    pub cells: Vec<ValidationCell>,
    /// Largest `|z|` per evaluator, in evaluation order.
    pub max_abs_z: Vec<(&'static str, f64)>,
    pub z_limit: f64,
    pub passed: bool,
}

pub const EVALUATOR_NAMES: [&str; 7] = [
    "sop_noncoop",
    "sop_rsdps_own",
    "sop_rsdps_relayed",
    "sop_rsdps",
    "sop_tas_selected",
    "sop_tas_relayed",
    "sop_tas",
];

/// Every closed form against the simulation of the event it describes, for
/// one config.
pub fn validate_config(
    cfg: &SystemConfig,
    trials: u64,
    seed: u64,
    exec: Execution,
) -> Result<Vec<ValidationCell>> {
    let cfg = validate(cfg.clone())?;
    let d = derive(&cfg);
    let label = cfg.summary();
    let mut cells = Vec::new();
    let mut push = |evaluator: &'static str, analytic: f64, mc: f64, stderr: f64| {
        cells.push(ValidationCell {
            config: label.clone(),
            evaluator,
            analytic,
            mc,
            stderr,
            z: (analytic - mc) / stderr,
        });
    };
    let (nc, _) = estimate_with_breakdown(&cfg, Scheme::NonCoop, trials, seed, exec);
    push("sop_noncoop", closed_form::sop_noncoop(&cfg, &d)?, nc.p_hat, nc.stderr);

    for scheme in [Scheme::Rsdps, Scheme::Tas] {
        let (total, parts) = estimate_with_breakdown(&cfg, scheme, trials, seed, exec);
        let names = match scheme {
            Scheme::Rsdps => ["sop_rsdps_own", "sop_rsdps_relayed", "sop_rsdps"],
            _ => ["sop_tas_selected", "sop_tas_relayed", "sop_tas"],
        };
        for part in &parts {
            let (name, v) = match (scheme, part.role) {
                (Scheme::Rsdps, StreamRole::Own) => (names[0], closed_form::sop_rsdps_own(&cfg, &d)?),
                (Scheme::Rsdps, StreamRole::Relayed) => (names[1], closed_form::sop_rsdps_relayed(&cfg, &d)?),
                (_, StreamRole::Own) => (names[0], closed_form::sop_tas_selected(&cfg, &d)?),
                (_, StreamRole::Relayed) => (names[1], closed_form::sop_tas_relayed(&cfg, &d)?),
                _ => continue,
            };
            push(name, v, part.estimate.p_hat, part.estimate.stderr);
        }
        push(names[2], closed_form::sop(scheme, &cfg, &d)?, total.p_hat, total.stderr);
    }
    Ok(cells)
}

pub fn validate_command(
    config: &SystemConfig,
    grid: ValidateGrid,
    trials: u64,
    seed: u64,
) -> Result<ValidateReport> {
    if trials < MIN_TRIALS {
        return Err(Error::TrialsBelowMinimum {
            got: trials,
            min: MIN_TRIALS,
        });
    }
    let configs = match grid {
        ValidateGrid::Point => vec![config.clone()],
        ValidateGrid::Acceptance => acceptance_grid(config),
    };
    let mut cells = Vec::new();
    for cfg in &configs {
        cells.extend(validate_config(cfg, trials, seed, Execution::default())?);
    }
    Ok(summarize_cells(cells, 4.0))
}

pub fn summarize_cells(cells: Vec<ValidationCell>, z_limit: f64) -> ValidateReport {
    let max_abs_z: Vec<(&'static str, f64)> = EVALUATOR_NAMES
        .iter()
        .filter_map(|&name| {
            cells
                .iter()
                .filter(|c| c.evaluator == name)
                .map(|c| c.z.abs())
                .reduce(f64::max)
                .map(|z| (name, z))
        })
        .collect();
    let passed = cells.iter().all(|c| c.z.abs() <= z_limit);
    ValidateReport {
        cells,
        max_abs_z,
        z_limit,
        passed,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiversityReport {
    pub scheme: Scheme,
    pub fit: DiversityFit,
    pub expected_order: u32,
    pub tolerance: f64,
    pub passed: bool,
    pub curve: Vec<(f64, f64)>,
}

/// Fits the exact curve over the window and compares the slope with the
/// predicted diversity order.
///
/// Unless `as_is` is set the config is first moved to
/// [`asymptotics::high_snr_regime`].
pub fn diversity_command(
    config: &SystemConfig,
    scheme: Scheme,
    window_db: (f64, f64),
    points: usize,
    as_is: bool,
) -> Result<DiversityReport> {
    let cfg = validate(config.clone())?;
    let cfg = if as_is { cfg } else { asymptotics::high_snr_regime(&cfg) };
    let grid = asymptotics::mer_grid_db(window_db, points)?;
    let curve = asymptotics::exact_curve(scheme, &cfg, &grid)?;
    let fit = asymptotics::fit_diversity(&curve, window_db)?;
    let expected_order = asymptotics::diversity_order(scheme, &cfg);
    let tolerance = asymptotics::slope_tolerance(scheme, &cfg);
    Ok(DiversityReport {
        scheme,
        passed: (fit.slope + expected_order as f64).abs() <= tolerance,
        fit,
        expected_order,
        tolerance,
        curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_value_count() {
        let spec = SweepSpec::new(Axis::MerDb, -10.0, 15.0, 5.0);
        assert_eq!(spec.axis_values().len(), 6);
    }

    #[test]
    fn rejects_bad_specs() {
        let mut spec = SweepSpec::new(Axis::MerDb, 5.0, 0.0, 1.0);
        assert!(spec.check().is_err());
        spec = SweepSpec::new(Axis::MerDb, 0.0, 5.0, 0.0);
        assert!(spec.check().is_err());
        spec = SweepSpec::new(Axis::MerDb, 0.0, 5.0, 1.0);
        spec.evaluators = vec![Evaluator::Mc];
        spec.trials = 10;
        assert!(matches!(spec.check(), Err(Error::TrialsBelowMinimum { .. })));
        let spec = SweepSpec::new(Axis::NumPairs, 0.0, 2.0, 1.0);
        assert!(run_sweep(&spec, &SystemConfig::default()).is_err());
    }

    #[test]
    fn unrequested_columns_are_empty() {
        let mut spec = SweepSpec::new(Axis::MerDb, 0.0, 0.0, 1.0);
        spec.schemes = vec![Scheme::Tas];
        let table = run_sweep(&spec, &SystemConfig::default()).unwrap();
        let csv = table.to_csv().unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0], "mer_db");
        assert_eq!(row[2], "tas");
        assert_eq!(row[3], "");
        assert!(row[5].parse::<f64>().is_ok());
        assert_eq!(row[8], "");
    }

    #[test]
    fn validate_rejects_few_trials() {
        let r = validate_command(&SystemConfig::default(), ValidateGrid::Point, 10, 1);
        assert_eq!(r.unwrap_err().to_string(), "trials below minimum: 10 < 1000");
    }

    #[test]
    fn float_format() {
        assert_eq!(format_float(0.5), "0.5");
        assert_eq!(format_float(1e-20), "1e-20");
        assert_eq!(format_float(-10.0), "-10");
    }
}
