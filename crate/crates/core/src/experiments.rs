//! Error metrics and study drivers comparing the PIELM against the
//! finite-difference benchmark.
//!
//! Every study evaluates the trained network at the benchmark nodes, so the
//! reference needs no interpolation.

use std::io::Write;
use std::path::Path;

use toml::{Table, Value};

use crate::config::{self, parse_quantity, parse_solver, ProblemConfig, Section, Unit};
use crate::error::{Error, Result};
use crate::fdm::{sample_pseudo_observations, solve_fdm, FdmConfig, FdmSolution};
use crate::physics::{BoundaryCondition, PileSoilProblem};
use crate::pielm::{solve, MonitoredDataset, SolverConfig};
use crate::profile::{format_number, ResponseProfile};

/// `‖reference − candidate‖₂ / ‖reference‖₂`.
pub fn relative_l2(reference: &[f64], candidate: &[f64]) -> Result<f64> {
    if reference.len() != candidate.len() {
        return Err(Error::DimensionMismatch(format!(
            "reference has {} samples, candidate has {}",
            reference.len(),
            candidate.len()
        )));
    }
    if reference.is_empty() {
        return Err(Error::InvalidData("relative error needs at least one sample".into()));
    }
    let norm = reference.iter().map(|r| r * r).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::UndefinedReference);
    }
    let diff = reference
        .iter()
        .zip(candidate)
        .map(|(r, c)| (r - c) * (r - c))
        .sum::<f64>()
        .sqrt();
    Ok(diff / norm)
}

/// Relative L2 errors of the three reported fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldErrors {
    pub w: f64,
    pub moment: f64,
    pub shear: f64,
}

/// Field-wise relative L2 errors of `candidate` against `reference`, which
/// must be sampled on the same depths.
pub fn compare_profiles(reference: &ResponseProfile, candidate: &ResponseProfile) -> Result<FieldErrors> {
    if reference.z.len() != candidate.z.len() {
        return Err(Error::DimensionMismatch(format!(
            "profiles have {} and {} depths",
            reference.z.len(),
            candidate.z.len()
        )));
    }
    let scale = reference.z.iter().fold(1.0f64, |m, z| m.max(z.abs()));
    if let Some((i, (a, b))) = reference
        .z
        .iter()
        .zip(&candidate.z)
        .enumerate()
        .find(|(_, (a, b))| (*a - *b).abs() > 1e-12 * scale)
    {
        return Err(Error::DimensionMismatch(format!(
            "depth grids differ at row {}: {a} vs {b}",
            i + 1
        )));
    }
    Ok(FieldErrors {
        w: relative_l2(&reference.w, &candidate.w)?,
        moment: relative_l2(&reference.moment, &candidate.moment)?,
        shear: relative_l2(&reference.shear, &candidate.shear)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Validation,
    Neurons,
    Collocation,
    Repeatability,
    DataLocations,
    DataCounts,
}

impl SweepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepKind::Validation => "validation",
            SweepKind::Neurons => "neurons",
            SweepKind::Collocation => "collocation",
            SweepKind::Repeatability => "repeatability",
            SweepKind::DataLocations => "data_locations",
            SweepKind::DataCounts => "data_counts",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            SweepKind::Validation,
            SweepKind::Neurons,
            SweepKind::Collocation,
            SweepKind::Repeatability,
            SweepKind::DataLocations,
            SweepKind::DataCounts,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
    }
}

/// A set of monitored depths fed to one data-assimilation run.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSeries {
    pub name: String,
    pub depths: Vec<f64>,
    /// Overrides the study's collocation count for this series.
    pub collocation_points: Option<usize>,
}

impl DataSeries {
    pub fn new(name: impl Into<String>, depths: &[f64]) -> Self {
        Self {
            name: name.into(),
            depths: depths.to_vec(),
            collocation_points: None,
        }
    }

    pub fn with_collocation_points(mut self, n: usize) -> Self {
        self.collocation_points = Some(n);
        self
    }
}

/// Parsed study definition.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub name: String,
    pub kind: SweepKind,
    /// Base scenario; validation studies override its bc and volume loss.
    pub problem: PileSoilProblem,
    /// Fixed solver settings; sweeps override Mc, Nc or the seed.
    pub solver: SolverConfig,
    pub fdm: FdmConfig,
    /// Mc values for a neuron sweep, Nc values for a collocation sweep.
    pub values: Vec<usize>,
    pub boundary_conditions: Vec<BoundaryCondition>,
    pub volume_losses: Vec<f64>,
    pub series: Vec<DataSeries>,
    /// Runs per sweep point, with seeds `seed, seed + 1, …`.
    pub repeats: usize,
}

impl StudyConfig {
    pub fn new(name: impl Into<String>, kind: SweepKind, problem: PileSoilProblem) -> Self {
        Self {
            name: name.into(),
            kind,
            problem,
            solver: SolverConfig::default(),
            fdm: FdmConfig::default(),
            values: Vec::new(),
            boundary_conditions: BoundaryCondition::ALL.to_vec(),
            volume_losses: vec![problem.tunnel.volume_loss()],
            series: Vec::new(),
            repeats: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        self.fdm.validate()?;
        if self.repeats == 0 {
            return Err(Error::config("repeats", "must be at least 1"));
        }
        match self.kind {
            SweepKind::Neurons | SweepKind::Collocation if self.values.is_empty() => {
                Err(Error::config("values", "sweep values must not be empty"))
            }
            SweepKind::Validation if self.boundary_conditions.is_empty() || self.volume_losses.is_empty() => Err(
                Error::config("boundary_conditions", "validation needs at least one bc and one volume loss"),
            ),
            SweepKind::DataLocations | SweepKind::DataCounts => {
                if self.series.is_empty() {
                    return Err(Error::config("series", "data studies need at least one series"));
                }
                let length = self.problem.length();
                for s in &self.series {
                    if let Some(z) = s.depths.iter().find(|z| !(0.0..=length).contains(*z)) {
                        return Err(Error::config(
                            format!("series.{}", s.name),
                            format!("depth {z} lies outside [0, {length}]"),
                        ));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Reads a study file. `problem` is either `"reference"` or a problem file
    /// path relative to the study file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), format!("cannot read: {e}")))?;
        Self::from_toml_str(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config("<study>", format!("TOML syntax: {}", e.message())))?;
        Self::from_table(&table, base_dir)
    }

    /// Parses an already-read study table. `problem` may also be an inline
    /// problem table, as written by [`StudyConfig::to_table`].
    pub fn from_table(table: &Table, base_dir: &Path) -> Result<Self> {
        let root = Section::new(
            "",
            table,
            &[
                "name",
                "kind",
                "problem",
                "values",
                "boundary_conditions",
                "volume_losses",
                "repeats",
                "solver",
                "fdm",
                "series",
            ],
        )?;
        let kind_name = root.string("kind")?.ok_or_else(|| Error::config("kind", "missing"))?;
        let kind = SweepKind::parse(kind_name).ok_or_else(|| {
            Error::config(
                "kind",
                format!(
                    "unknown sweep kind `{kind_name}` (expected validation, neurons, collocation, repeatability, data_locations or data_counts)"
                ),
            )
        })?;
        let base = match table.get("problem") {
            Some(Value::Table(t)) => ProblemConfig::from_table(t).map_err(|e| Error::config("problem", e.to_string()))?,
            None => reference_problem(),
            Some(Value::String(s)) if s == "reference" => reference_problem(),
            Some(Value::String(file)) => ProblemConfig::load(base_dir.join(file))
                .map_err(|e| Error::config("problem", e.to_string()))?,
            Some(_) => return Err(Error::config("problem", "expected \"reference\", a file path or a table")),
        };
        let mut study = StudyConfig::new(root.string("name")?.unwrap_or(kind.as_str()), kind, base.problem);
        study.solver = match root.subsection("solver", config::SOLVER_KEYS)? {
            Some(s) => parse_solver(&s, base.solver)?,
            None => base.solver,
        };
        study.fdm = base.fdm;
        if let Some(s) = root.subsection("fdm", &["segments"])? {
            if let Some(n) = s.count("segments")? {
                study.fdm.segments = n as usize;
            }
        }
        study.fdm.validate().map_err(config::at("fdm.segments".into()))?;
        if let Some(n) = root.count("repeats")? {
            study.repeats = n as usize;
        } else if kind == SweepKind::Repeatability {
            study.repeats = 5;
        }
        if let Some(v) = table.get("values") {
            study.values = counts("values", v)?;
        }
        if let Some(v) = table.get("boundary_conditions") {
            let items = v
                .as_array()
                .ok_or_else(|| Error::config("boundary_conditions", "expected an array of strings"))?;
            study.boundary_conditions = items
                .iter()
                .map(|i| {
                    i.as_str()
                        .ok_or_else(|| Error::config("boundary_conditions", "expected an array of strings"))?
                        .parse()
                        .map_err(config::at("boundary_conditions".into()))
                })
                .collect::<Result<_>>()?;
        }
        if let Some(v) = table.get("volume_losses") {
            let items = v
                .as_array()
                .ok_or_else(|| Error::config("volume_losses", "expected an array"))?;
            study.volume_losses = items
                .iter()
                .enumerate()
                .map(|(i, item)| parse_quantity(&format!("volume_losses[{i}]"), item, Unit::Fraction))
                .collect::<Result<_>>()?;
        }
        if let Some(v) = table.get("series") {
            let rows = v
                .as_array()
                .ok_or_else(|| Error::config("series", "expected an array of tables ([[series]])"))?;
            for (i, row) in rows.iter().enumerate() {
                let path = format!("series[{i}]");
                let t = row.as_table().ok_or_else(|| Error::config(&path, "expected a table"))?;
                let s = Section::new(&path, t, &["name", "depths", "collocation_points"])?;
                let depths = match t.get("depths") {
                    None => Vec::new(),
                    Some(Value::Array(items)) => items
                        .iter()
                        .enumerate()
                        .map(|(k, item)| parse_quantity(&format!("{path}.depths[{k}]"), item, Unit::Length))
                        .collect::<Result<_>>()?,
                    Some(_) => return Err(Error::config(format!("{path}.depths"), "expected an array")),
                };
                study.series.push(DataSeries {
                    name: s.string("name")?.map_or_else(|| format!("S{}", i + 1), String::from),
                    depths,
                    collocation_points: s.count("collocation_points")?.map(|n| n as usize),
                });
            }
        }
        study.validate()?;
        Ok(study)
    }

    /// Resolved snapshot with the problem inlined; parsing it gives back `self`.
    pub fn to_table(&self) -> Table {
        let mut root = Table::new();
        root.insert("name".into(), self.name.clone().into());
        root.insert("kind".into(), self.kind.as_str().into());
        let problem = ProblemConfig {
            problem: self.problem,
            solver: self.solver,
            fdm: self.fdm,
            data: MonitoredDataset::empty(),
        };
        let mut p = problem.to_table();
        p.remove("solver");
        p.remove("fdm");
        root.insert("problem".into(), p.into());
        root.insert("solver".into(), config::solver_table(&self.solver).into());
        let mut fdm = Table::new();
        fdm.insert("segments".into(), (self.fdm.segments as i64).into());
        root.insert("fdm".into(), fdm.into());
        root.insert("repeats".into(), (self.repeats as i64).into());
        if !self.values.is_empty() {
            root.insert(
                "values".into(),
                Value::Array(self.values.iter().map(|&v| (v as i64).into()).collect()),
            );
        }
        root.insert(
            "boundary_conditions".into(),
            Value::Array(self.boundary_conditions.iter().map(|b| b.as_str().into()).collect()),
        );
        root.insert(
            "volume_losses".into(),
            Value::Array(self.volume_losses.iter().map(|&v| v.into()).collect()),
        );
        if !self.series.is_empty() {
            let rows = self
                .series
                .iter()
                .map(|s| {
                    let mut t = Table::new();
                    t.insert("name".into(), s.name.clone().into());
                    t.insert("depths".into(), Value::Array(s.depths.iter().map(|&d| d.into()).collect()));
                    if let Some(n) = s.collocation_points {
                        t.insert("collocation_points".into(), (n as i64).into());
                    }
                    Value::Table(t)
                })
                .collect();
            root.insert("series".into(), Value::Array(rows));
        }
        root
    }
}

fn reference_problem() -> ProblemConfig {
    ProblemConfig {
        problem: PileSoilProblem::reference(BoundaryCondition::FreeFree, 0.01),
        solver: SolverConfig::default(),
        fdm: FdmConfig::default(),
        data: MonitoredDataset::empty(),
    }
}

fn counts(field: &str, value: &Value) -> Result<Vec<usize>> {
    value
        .as_array()
        .ok_or_else(|| Error::config(field, "expected an array of integers"))?
        .iter()
        .map(|v| match v {
            Value::Integer(i) if *i > 0 => Ok(*i as usize),
            other => Err(Error::config(field, format!("expected positive integers, found {other}"))),
        })
        .collect()
}

/// One trained network compared against the benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub label: String,
    pub bc: BoundaryCondition,
    pub volume_loss: f64,
    pub neurons: usize,
    pub collocation_points: usize,
    pub data_count: usize,
    pub seed: u64,
    pub errors: FieldErrors,
    pub training_seconds: f64,
    pub residual_norm: f64,
    pub rank: usize,
}

/// Absolute errors along the pile for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorProfile {
    pub label: String,
    pub z: Vec<f64>,
    pub abs_w: Vec<f64>,
    pub abs_moment: Vec<f64>,
    /// True at depths carrying a monitored deflection.
    pub monitored: Vec<bool>,
}

impl ErrorProfile {
    /// Largest deflection error at monitored and at unmonitored depths.
    pub fn max_errors(&self) -> (Option<f64>, Option<f64>) {
        let mut monitored: Option<f64> = None;
        let mut free: Option<f64> = None;
        for (e, &m) in self.abs_w.iter().zip(&self.monitored) {
            let slot = if m { &mut monitored } else { &mut free };
            *slot = Some(slot.map_or(*e, |s: f64| s.max(*e)));
        }
        (monitored, free)
    }
}

pub const REPORT_HEADER: [&str; 13] = [
    "label",
    "boundary_condition",
    "volume_loss",
    "neurons",
    "collocation_points",
    "data_count",
    "seed",
    "l2_w",
    "l2_M",
    "l2_Q",
    "training_s",
    "residual_norm",
    "rank",
];

pub const ERROR_PROFILE_HEADER: [&str; 5] = ["label", "z_m", "abs_error_w_m", "abs_error_M_Nm", "monitored"];

#[derive(Debug, Clone, PartialEq)]
pub struct StudyReport {
    pub name: String,
    pub kind: SweepKind,
    pub records: Vec<RunRecord>,
    pub profiles: Vec<ErrorProfile>,
}

impl StudyReport {
    fn new(name: &str, kind: SweepKind) -> Self {
        Self {
            name: name.to_string(),
            kind,
            records: Vec::new(),
            profiles: Vec::new(),
        }
    }

    pub fn record(&self, label: &str) -> Option<&RunRecord> {
        self.records.iter().find(|r| r.label == label)
    }

    pub fn profile(&self, label: &str) -> Option<&ErrorProfile> {
        self.profiles.iter().find(|p| p.label == label)
    }

    pub fn write_records_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidData(format!("writing report: {e}"));
        w.write_record(REPORT_HEADER).map_err(io)?;
        for r in &self.records {
            w.write_record([
                r.label.clone(),
                r.bc.as_str().to_string(),
                format_number(r.volume_loss),
                r.neurons.to_string(),
                r.collocation_points.to_string(),
                r.data_count.to_string(),
                r.seed.to_string(),
                format_number(r.errors.w),
                format_number(r.errors.moment),
                format_number(r.errors.shear),
                format_number(r.training_seconds),
                format_number(r.residual_norm),
                r.rank.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::InvalidData(format!("writing report: {e}")))
    }

    pub fn write_profiles_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidData(format!("writing error profiles: {e}"));
        w.write_record(ERROR_PROFILE_HEADER).map_err(io)?;
        for p in &self.profiles {
            for i in 0..p.z.len() {
                w.write_record([
                    p.label.clone(),
                    format_number(p.z[i]),
                    format_number(p.abs_w[i]),
                    format_number(p.abs_moment[i]),
                    u8::from(p.monitored[i]).to_string(),
                ])
                .map_err(io)?;
            }
        }
        w.flush().map_err(|e| Error::InvalidData(format!("writing error profiles: {e}")))
    }
}

/// Trains one network and compares it with the benchmark at its nodes.
fn run_one(
    label: String,
    problem: &PileSoilProblem,
    solver: &SolverConfig,
    reference: &FdmSolution,
    data: &MonitoredDataset,
) -> Result<(RunRecord, ResponseProfile)> {
    let trained = solve(problem, solver, data)?;
    let candidate = trained.evaluate(&reference.z)?;
    let errors = compare_profiles(&reference.to_profile(), &candidate)?;
    let meta = trained.metadata();
    let record = RunRecord {
        label,
        bc: problem.bc,
        volume_loss: problem.tunnel.volume_loss(),
        neurons: solver.elm.neurons,
        collocation_points: solver.collocation_points,
        data_count: data.len(),
        seed: solver.elm.seed,
        errors,
        training_seconds: meta.training_seconds,
        residual_norm: meta.residual_norm,
        rank: meta.rank,
    };
    Ok((record, candidate))
}

fn seeded_label(label: String, repeats: usize, seed: u64) -> String {
    if repeats > 1 {
        format!("{label}/seed={seed}")
    } else {
        label
    }
}

/// Every (bc, volume loss) pair with the given network settings.
pub fn run_validation(
    problem: &PileSoilProblem,
    boundary_conditions: &[BoundaryCondition],
    volume_losses: &[f64],
    solver: &SolverConfig,
    fdm: &FdmConfig,
) -> Result<StudyReport> {
    let mut report = StudyReport::new("validation", SweepKind::Validation);
    for &bc in boundary_conditions {
        for &eps in volume_losses {
            let p = problem.with_bc(bc).with_volume_loss(eps)?;
            let reference = solve_fdm(&p, fdm)?;
            let label = format!("{}/{}%", bc.as_str(), eps * 100.0);
            let (record, _) = run_one(label, &p, solver, &reference, &MonitoredDataset::empty())?;
            report.records.push(record);
        }
    }
    Ok(report)
}

/// Which network size a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Neurons,
    CollocationPoints,
}

/// Varies Mc or Nc with everything else fixed.
pub fn run_architecture_sweep(
    problem: &PileSoilProblem,
    solver: &SolverConfig,
    fdm: &FdmConfig,
    axis: SweepAxis,
    values: &[usize],
    repeats: usize,
) -> Result<StudyReport> {
    let kind = match axis {
        SweepAxis::Neurons => SweepKind::Neurons,
        SweepAxis::CollocationPoints => SweepKind::Collocation,
    };
    let mut report = StudyReport::new(kind.as_str(), kind);
    let reference = solve_fdm(problem, fdm)?;
    for &v in values {
        let mut cfg = *solver;
        let label = match axis {
            SweepAxis::Neurons => {
                cfg.elm.neurons = v;
                format!("Mc={v}")
            }
            SweepAxis::CollocationPoints => {
                cfg.collocation_points = v;
                format!("Nc={v}")
            }
        };
        for r in 0..repeats {
            let cfg = cfg.with_seed(solver.elm.seed + r as u64);
            let label = seeded_label(label.clone(), repeats, cfg.elm.seed);
            let (record, _) = run_one(label, problem, &cfg, &reference, &MonitoredDataset::empty())?;
            report.records.push(record);
        }
    }
    Ok(report)
}

/// Assimilates benchmark pseudo-observations at each series' depths.
pub fn run_data_study(
    problem: &PileSoilProblem,
    solver: &SolverConfig,
    fdm: &FdmConfig,
    series: &[DataSeries],
    repeats: usize,
) -> Result<StudyReport> {
    let mut report = StudyReport::new("data", SweepKind::DataLocations);
    let reference = solve_fdm(problem, fdm)?;
    let length = problem.length();
    for s in series {
        let data = sample_pseudo_observations(&reference, &s.depths)?;
        let mut cfg = *solver;
        if let Some(nc) = s.collocation_points {
            cfg.collocation_points = nc;
        }
        let monitored: Vec<bool> = reference
            .z
            .iter()
            .map(|z| s.depths.iter().any(|d| (d - z).abs() <= 1e-9 * length))
            .collect();
        for r in 0..repeats {
            let cfg = cfg.with_seed(solver.elm.seed + r as u64);
            let label = seeded_label(s.name.clone(), repeats, cfg.elm.seed);
            let (record, candidate) = run_one(label.clone(), problem, &cfg, &reference, &data)?;
            report.profiles.push(ErrorProfile {
                label,
                z: reference.z.clone(),
                abs_w: reference.w.iter().zip(&candidate.w).map(|(a, b)| (a - b).abs()).collect(),
                abs_moment: reference
                    .moment
                    .iter()
                    .zip(&candidate.moment)
                    .map(|(a, b)| (a - b).abs())
                    .collect(),
                monitored: monitored.clone(),
            });
            report.records.push(record);
        }
    }
    Ok(report)
}

/// The same settings under `repeats` consecutive seeds.
pub fn run_repeatability(
    problem: &PileSoilProblem,
    solver: &SolverConfig,
    fdm: &FdmConfig,
    repeats: usize,
) -> Result<StudyReport> {
    let mut report = StudyReport::new("repeatability", SweepKind::Repeatability);
    let reference = solve_fdm(problem, fdm)?;
    for r in 0..repeats {
        let cfg = solver.with_seed(solver.elm.seed + r as u64);
        let label = format!("run{}", r + 1);
        let (record, _) = run_one(label, problem, &cfg, &reference, &MonitoredDataset::empty())?;
        report.records.push(record);
    }
    Ok(report)
}

/// Runs the sweep a study file describes.
pub fn run_study(study: &StudyConfig) -> Result<StudyReport> {
    study.validate()?;
    let mut report = match study.kind {
        SweepKind::Validation => run_validation(
            &study.problem,
            &study.boundary_conditions,
            &study.volume_losses,
            &study.solver,
            &study.fdm,
        )?,
        SweepKind::Neurons => run_architecture_sweep(
            &study.problem,
            &study.solver,
            &study.fdm,
            SweepAxis::Neurons,
            &study.values,
            study.repeats,
        )?,
        SweepKind::Collocation => run_architecture_sweep(
            &study.problem,
            &study.solver,
            &study.fdm,
            SweepAxis::CollocationPoints,
            &study.values,
            study.repeats,
        )?,
        SweepKind::Repeatability => run_repeatability(&study.problem, &study.solver, &study.fdm, study.repeats)?,
        SweepKind::DataLocations | SweepKind::DataCounts => {
            run_data_study(&study.problem, &study.solver, &study.fdm, &study.series, study.repeats)?
        }
    };
    report.name = study.name.clone();
    report.kind = study.kind;
    Ok(report)
}
