//! Batch diagnostics report: defect grids, oracle residuals, the ordering gap
//! and optional coupling sweeps, written as JSON and CSV.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::builder::{default_tmax, time_grid, truncated_sum, BuildConfig, BuildError, EffectiveBuilder, MAX_ORDER, MIN_ORDER};
use crate::diagnostics::{hermiticity_defect, unitarity_defect, Eq6Evaluator};
use crate::dsl::{load_model_str, DslError};
use crate::model::{FrequencyReport, ModelError, MultiToneHamiltonian, DEFAULT_GAP_MIN, DEFAULT_TOL_ZERO};
use crate::operator::Operator;
use crate::oracle::{quad_oracle, OracleError};
use crate::zoo::{UnknownModel, ZooModel};

pub const SCHEMA_VERSION: u32 = 1;
pub const ORACLE_POINTS: usize = 8;
pub const ORACLE_MAX_ORDER: usize = 4;
const ORACLE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSource {
    Builtin(ZooModel),
    File(PathBuf),
}

impl FromStr for ModelSource {
    type Err = UnknownModel;

    /// `builtin:NAME`, a bare built-in name, or a file path.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(name) = s.strip_prefix("builtin:") {
            return Ok(ModelSource::Builtin(name.parse()?));
        }
        if let Ok(m) = s.parse::<ZooModel>() {
            return Ok(ModelSource::Builtin(m));
        }
        Ok(ModelSource::File(PathBuf::from(s)))
    }
}

impl std::fmt::Display for ModelSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelSource::Builtin(m) => write!(f, "builtin:{m}"),
            ModelSource::File(p) => write!(f, "{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportOptions {
    pub orders: Vec<usize>,
    /// Grid end; `10 / min ω` when unset.
    pub tmax: Option<f64>,
    pub grid: usize,
    pub sweep: Vec<f64>,
    /// Time at which the sweep evaluates the truncated Dyson series.
    pub sweep_time: f64,
    pub tol_zero: f64,
    pub gap_min: f64,
    pub max_terms: Option<usize>,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            orders: vec![2, 3],
            tmax: None,
            grid: 64,
            sweep: Vec::new(),
            sweep_time: 1.0,
            tol_zero: DEFAULT_TOL_ZERO,
            gap_min: DEFAULT_GAP_MIN,
            max_terms: None,
            out: None,
            csv: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Dsl { path: PathBuf, source: DslError },
    #[error(transparent)]
    UnknownModel(#[from] UnknownModel),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid options: {0}")]
    Options(String),
    #[error("numerical guard: {0}")]
    Build(BuildError),
    #[error("numerical guard: {0}")]
    Oracle(OracleError),
    #[error("numerical guard: non-finite value in {0}")]
    NonFinite(&'static str),
}

impl ReportError {
    /// 2 for model errors, 3 for numerical guards, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            ReportError::Dsl { .. } | ReportError::UnknownModel(_) | ReportError::Model(_) => 2,
            ReportError::Build(_) | ReportError::Oracle(_) | ReportError::NonFinite(_) => 3,
            ReportError::Read { .. } | ReportError::Write { .. } | ReportError::Options(_) => 1,
        }
    }
}

impl From<BuildError> for ReportError {
    fn from(e: BuildError) -> Self {
        match e {
            BuildError::OrderRange { .. } => ReportError::Options(e.to_string()),
            other => ReportError::Build(other),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&Operator> for MatrixJson {
    fn from(op: &Operator) -> Self {
        let n = op.dim();
        let rows = |f: fn(num_complex::Complex64) -> f64| (0..n).map(|i| (0..n).map(|j| f(op.get(i, j))).collect()).collect();
        MatrixJson { re: rows(|c| c.re), im: rows(|c| c.im) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResidual {
    pub t: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderRecord {
    pub order: usize,
    pub secular: MatrixJson,
    pub secular_hermiticity_defect: f64,
    pub secular_growth_flag: bool,
    pub hermiticity_defect: Vec<f64>,
    pub max_hermiticity_defect: f64,
    pub dyson_unitarity_defect: Vec<f64>,
    /// Present for orders up to 4.
    pub oracle_residuals: Option<Vec<OracleResidual>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub lambda: f64,
    /// `(N, unitarity defect of the order-N truncated Dyson series at sweep_time)`.
    pub dyson_unitarity_defect: Vec<(usize, f64)>,
    /// `(n, max over the grid of the hermiticity defect of H_eff^(n))`.
    pub hermiticity_defect: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub time: f64,
    pub rows: Vec<SweepRow>,
    /// Log-log slopes against λ; `None` where a defect vanishes.
    pub dyson_slopes: Vec<(usize, Option<f64>)>,
    pub hermiticity_slopes: Vec<(usize, Option<f64>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: u32,
    pub generated_at: String,
    pub source: String,
    pub model_digest: String,
    pub dim: usize,
    pub omegas: Vec<f64>,
    pub frequency_report: FrequencyReport,
    pub grid: Vec<f64>,
    pub orders: Vec<OrderRecord>,
    pub eq6_gap: Vec<f64>,
    pub sweep: Option<SweepTable>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Columns: `t`, per-order hermiticity and Dyson-unitarity defects, `eq6_gap`.
    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["t".to_string()];
        for r in &self.orders {
            header.push(format!("hermiticity_defect_{}", r.order));
            header.push(format!("dyson_unitarity_defect_{}", r.order));
        }
        header.push("eq6_gap".to_string());
        w.write_record(&header)?;
        for (k, t) in self.grid.iter().enumerate() {
            let mut row = vec![t.to_string()];
            for r in &self.orders {
                row.push(r.hermiticity_defect[k].to_string());
                row.push(r.dyson_unitarity_defect[k].to_string());
            }
            row.push(self.eq6_gap[k].to_string());
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }

    fn check_finite(&self) -> Result<(), ReportError> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        if !finite(&self.grid) || !finite(&self.eq6_gap) {
            return Err(ReportError::NonFinite("time grid"));
        }
        for r in &self.orders {
            let m = r.secular.re.iter().chain(&r.secular.im).flatten().copied().collect::<Vec<_>>();
            let residuals: Vec<f64> = r.oracle_residuals.iter().flatten().map(|o| o.residual).collect();
            if !finite(&m) || !finite(&r.hermiticity_defect) || !finite(&r.dyson_unitarity_defect) || !finite(&residuals) {
                return Err(ReportError::NonFinite("order records"));
            }
        }
        if let Some(s) = &self.sweep {
            let vals: Vec<f64> = s.rows.iter().flat_map(|r| r.dyson_unitarity_defect.iter().chain(&r.hermiticity_defect).map(|p| p.1)).collect();
            if !finite(&vals) {
                return Err(ReportError::NonFinite("sweep table"));
            }
        }
        Ok(())
    }
}

/// SHA-256 over the dimension, tone frequencies and matrix entries.
pub fn model_digest(model: &MultiToneHamiltonian) -> String {
    let mut hasher = Sha256::new();
    hasher.update((model.dim() as u64).to_le_bytes());
    hasher.update((model.tones().len() as u64).to_le_bytes());
    for tone in model.tones() {
        hasher.update(tone.omega().to_bits().to_le_bytes());
        for c in tone.h().as_slice() {
            hasher.update(c.re.to_bits().to_le_bytes());
            hasher.update(c.im.to_bits().to_le_bytes());
        }
    }
    hex::encode(hasher.finalize())
}

pub fn load_model(source: &ModelSource) -> Result<MultiToneHamiltonian, ReportError> {
    match source {
        ModelSource::Builtin(m) => Ok(m.build()),
        ModelSource::File(path) => {
            let text = fs::read_to_string(path).map_err(|source| ReportError::Read { path: path.clone(), source })?;
            load_model_str(&text).map_err(|source| ReportError::Dsl { path: path.clone(), source })
        }
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

fn validate(opts: &ReportOptions) -> Result<(), ReportError> {
    if opts.orders.is_empty() {
        return Err(ReportError::Options("at least one order is required".into()));
    }
    if let Some(&n) = opts.orders.iter().find(|&&n| !(MIN_ORDER..=MAX_ORDER).contains(&n)) {
        return Err(ReportError::Options(format!("order {n} outside {MIN_ORDER}..={MAX_ORDER}")));
    }
    if opts.grid < 2 {
        return Err(ReportError::Options("the time grid needs at least 2 points".into()));
    }
    if let Some(t) = opts.tmax {
        if !(t.is_finite() && t > 0.0) {
            return Err(ReportError::Options(format!("tmax must be positive, got {t}")));
        }
    }
    if opts.sweep.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(ReportError::Options("sweep values must be positive".into()));
    }
    if !(opts.tol_zero > 0.0 && opts.tol_zero < opts.gap_min) {
        return Err(ReportError::Options(format!("need 0 < tol_zero ({}) < gap_min ({})", opts.tol_zero, opts.gap_min)));
    }
    Ok(())
}

fn oracle_points(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let k = ORACLE_POINTS.min(n);
    (0..k).map(|i| grid[if k == 1 { 0 } else { i * (n - 1) / (k - 1) }]).collect()
}

fn order_record(builder: &EffectiveBuilder<'_>, order: usize, grid: &[f64], points: &[f64]) -> Result<OrderRecord, ReportError> {
    let result = builder.heff_secular_on(order, grid)?;
    let hermiticity: Vec<f64> = grid.par_iter().map(|&t| hermiticity_defect(&result.series.eval(t))).collect();
    let dyson_terms = builder.dyson_terms(order)?;
    let dim = builder.model().dim();
    let dyson: Vec<f64> = grid.par_iter().map(|&t| unitarity_defect(&truncated_sum(dim, &dyson_terms, t))).collect();
    let oracle_residuals = if order <= ORACLE_MAX_ORDER {
        let residuals: Result<Vec<OracleResidual>, OracleError> = points
            .par_iter()
            .map(|&t| {
                let reference = quad_oracle(builder.model(), order, t, ORACLE_TOL)?;
                Ok(OracleResidual { t, residual: result.series.eval(t).distance(&reference) })
            })
            .collect();
        Some(residuals.map_err(ReportError::Oracle)?)
    } else {
        None
    };
    Ok(OrderRecord {
        order,
        secular: MatrixJson::from(&result.secular),
        secular_hermiticity_defect: hermiticity_defect(&result.secular),
        secular_growth_flag: result.secular_growth_flag,
        max_hermiticity_defect: hermiticity.iter().copied().fold(0.0, f64::max),
        hermiticity_defect: hermiticity,
        dyson_unitarity_defect: dyson,
        oracle_residuals,
    })
}

fn sweep_table(model: &MultiToneHamiltonian, cfg: BuildConfig, opts: &ReportOptions, grid: &[f64]) -> Result<SweepTable, ReportError> {
    let max_order = opts.orders.iter().copied().max().unwrap_or(MIN_ORDER);
    let rows: Result<Vec<SweepRow>, ReportError> = opts
        .sweep
        .par_iter()
        .map(|&lambda| {
            let scaled = model.scaled(lambda);
            let b = EffectiveBuilder::with_config(&scaled, cfg);
            let terms = b.dyson_terms(max_order)?;
            let dyson = (1..=max_order).map(|n| (n, unitarity_defect(&truncated_sum(scaled.dim(), &terms[..n], opts.sweep_time)))).collect();
            let mut herm = Vec::with_capacity(opts.orders.len());
            for &n in &opts.orders {
                let s = b.heff_n_timedep(n)?;
                herm.push((n, grid.iter().map(|&t| hermiticity_defect(&s.eval(t))).fold(0.0, f64::max)));
            }
            Ok(SweepRow { lambda, dyson_unitarity_defect: dyson, hermiticity_defect: herm })
        })
        .collect();
    let rows = rows?;
    let slope = |pick: &dyn Fn(&SweepRow) -> f64| log_log_slope(&rows.iter().map(|r| (r.lambda, pick(r))).collect::<Vec<_>>());
    let dyson_slopes = (1..=max_order).map(|n| (n, slope(&|r: &SweepRow| r.dyson_unitarity_defect[n - 1].1))).collect();
    let hermiticity_slopes = opts.orders.iter().enumerate().map(|(k, &n)| (n, slope(&|r: &SweepRow| r.hermiticity_defect[k].1))).collect();
    Ok(SweepTable { time: opts.sweep_time, rows, dyson_slopes, hermiticity_slopes })
}

/// Computes the report for an already-loaded model (no file output).
pub fn build_report(model: &MultiToneHamiltonian, source: &str, opts: &ReportOptions) -> Result<Report, ReportError> {
    validate(opts)?;
    let frequency_report = model.frequency_report(opts.tol_zero, opts.gap_min)?;
    let mut cfg = BuildConfig::from_env().with_tol_zero(opts.tol_zero);
    if let Some(n) = opts.max_terms {
        cfg = cfg.with_max_terms(n);
    }
    cfg.grid_points = opts.grid;
    let tmax = opts.tmax.unwrap_or_else(|| default_tmax(model));
    let grid = time_grid(tmax, opts.grid);
    let points = oracle_points(&grid);
    let builder = EffectiveBuilder::with_config(model, cfg);

    let mut orders = Vec::with_capacity(opts.orders.len());
    for &n in &opts.orders {
        orders.push(order_record(&builder, n, &grid, &points)?);
    }
    let eq6 = Eq6Evaluator::with_config(model, &cfg.series)?;
    let eq6_gap = grid.par_iter().map(|&t| eq6.gap(t)).collect();
    let sweep = if opts.sweep.is_empty() { None } else { Some(sweep_table(model, cfg, opts, &grid)?) };

    let report = Report {
        schema: SCHEMA_VERSION,
        generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        source: source.to_string(),
        model_digest: model_digest(model),
        dim: model.dim(),
        omegas: model.omegas(),
        frequency_report,
        grid,
        orders,
        eq6_gap,
        sweep,
    };
    report.check_finite()?;
    Ok(report)
}

/// Loads the model, builds the report and writes the requested files.
pub fn run_report(source: &ModelSource, opts: &ReportOptions) -> Result<Report, ReportError> {
    let model = load_model(source)?;
    let report = build_report(&model, &source.to_string(), opts)?;
    if let Some(path) = &opts.out {
        write_file(path, &report.to_json())?;
    }
    if let Some(path) = &opts.csv {
        let text = report.to_csv().map_err(|e| ReportError::Write { path: path.clone(), source: std::io::Error::other(e) })?;
        write_file(path, &text)?;
    }
    Ok(report)
}

fn write_file(path: &Path, text: &str) -> Result<(), ReportError> {
    fs::write(path, text).map_err(|source| ReportError::Write { path: path.to_path_buf(), source })
}

/// One-paragraph human summary for terminals.
pub fn summary(report: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "model {} (dim {}, digest {})", report.source, report.dim, &report.model_digest[..12]);
    let fr = &report.frequency_report;
    let _ = writeln!(
        s,
        "frequencies: pairwise distinct = {}, resonant three-sums = {}, ambiguous = {}",
        fr.pairwise_distinct,
        fr.resonant_count(),
        fr.ambiguous_count
    );
    for r in &report.orders {
        let oracle = r
            .oracle_residuals
            .as_ref()
            .map(|v| format!("{:.2e}", v.iter().map(|o| o.residual).fold(0.0, f64::max)))
            .unwrap_or_else(|| "n/a".into());
        let _ = writeln!(
            s,
            "order {}: secular hermiticity defect {:.2e}, max time-dependent defect {:.2e}, secular growth {}, oracle residual {}",
            r.order, r.secular_hermiticity_defect, r.max_hermiticity_defect, r.secular_growth_flag, oracle
        );
    }
    let _ = writeln!(s, "max eq6 gap {:.2e}", report.eq6_gap.iter().copied().fold(0.0, f64::max));
    if let Some(sw) = &report.sweep {
        for (n, slope) in &sw.dyson_slopes {
            let _ = writeln!(s, "sweep: Dyson N={n} unitarity slope {}", slope.map_or("n/a".into(), |v| format!("{v:.3}")));
        }
    }
    s
}
