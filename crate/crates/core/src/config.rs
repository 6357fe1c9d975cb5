//! TOML problem definitions.
//!
//! ```toml
//! boundary_condition = "free_free"
//!
//! [pile]
//! elastic_modulus = "30 GPa"
//! diameter = "0.5 m"
//! length = "25 m"
//!
//! [soil]
//! elastic_modulus = "24 MPa"
//! poisson_ratio = 0.5
//! # shear_layer_thickness defaults to 11 D
//!
//! [tunnel]
//! axis_depth = "20 m"
//! radius = "3 m"
//! offset = "4.5 m"
//! volume_loss = "1%"
//!
//! [solver]          # optional
//! neurons = 500
//! collocation_points = 1000
//!
//! [fdm]             # optional
//! segments = 2000
//!
//! [[data]]          # optional monitored deflections
//! depth = 17.0
//! deflection = -8.65e-3
//! ```
//!
//! Quantities are plain numbers in SI units or strings with a unit suffix.

use std::path::Path;

use toml::{Table, Value};

use crate::elm::Activation;
use crate::error::{Error, Result};
use crate::fdm::FdmConfig;
use crate::physics::{BoundaryCondition, PileProperties, PileSoilProblem, SoilProperties, TunnelGeometry};
use crate::pielm::{EquilibriumScaling, MonitoredDataset, Observation, SolverConfig};

/// Fully resolved contents of a problem file.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    pub problem: PileSoilProblem,
    pub solver: SolverConfig,
    pub fdm: FdmConfig,
    pub data: MonitoredDataset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Unit {
    Pressure,
    Length,
    /// Dimensionless fraction; accepts a `%` suffix.
    Fraction,
}

impl Unit {
    fn scale(self, suffix: &str) -> Option<f64> {
        match (self, suffix) {
            (Unit::Pressure, "Pa") => Some(1.0),
            (Unit::Pressure, "kPa") => Some(1e3),
            (Unit::Pressure, "MPa") => Some(1e6),
            (Unit::Pressure, "GPa") => Some(1e9),
            (Unit::Length, "m") => Some(1.0),
            (Unit::Length, "cm") => Some(1e-2),
            (Unit::Length, "mm") => Some(1e-3),
            (Unit::Fraction, "%") => Some(1e-2),
            (_, "") => Some(1.0),
            _ => None,
        }
    }

    fn accepted(self) -> &'static str {
        match self {
            Unit::Pressure => "Pa, kPa, MPa or GPa",
            Unit::Length => "m, cm or mm",
            Unit::Fraction => "%",
        }
    }
}

/// Typed access to one TOML table that reports full key paths.
pub(crate) struct Section<'a> {
    path: String,
    table: &'a Table,
}

impl<'a> Section<'a> {
    pub(crate) fn new(path: &str, table: &'a Table, allowed: &[&str]) -> Result<Self> {
        let section = Self {
            path: path.to_string(),
            table,
        };
        if let Some(key) = table.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::config(section.key(key), "unknown key"));
        }
        Ok(section)
    }

    pub(crate) fn key(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    pub(crate) fn required(&self, key: &str) -> Result<&'a Value> {
        self.table.get(key).ok_or_else(|| Error::config(self.key(key), "missing"))
    }

    pub(crate) fn subsection(&self, key: &str, allowed: &[&str]) -> Result<Option<Section<'a>>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Table(t)) => Section::new(&self.key(key), t, allowed).map(Some),
            Some(other) => Err(Error::config(self.key(key), format!("expected a table, found {}", other.type_str()))),
        }
    }

    pub(crate) fn quantity(&self, key: &str, unit: Unit) -> Result<f64> {
        parse_quantity(&self.key(key), self.required(key)?, unit)
    }

    pub(crate) fn optional_quantity(&self, key: &str, unit: Unit) -> Result<Option<f64>> {
        self.table
            .get(key)
            .map(|v| parse_quantity(&self.key(key), v, unit))
            .transpose()
    }

    pub(crate) fn number(&self, key: &str) -> Result<Option<f64>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Float(f)) => Ok(Some(*f)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(other) => Err(Error::config(self.key(key), format!("expected a number, found {}", other.type_str()))),
        }
    }

    pub(crate) fn count(&self, key: &str) -> Result<Option<u64>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(other) => Err(Error::config(
                self.key(key),
                format!("expected a non-negative integer, found {other}"),
            )),
        }
    }

    pub(crate) fn string(&self, key: &str) -> Result<Option<&'a str>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(other) => Err(Error::config(self.key(key), format!("expected a string, found {}", other.type_str()))),
        }
    }
}

pub(crate) fn parse_quantity(field: &str, value: &Value, unit: Unit) -> Result<f64> {
    let parsed = match value {
        Value::Float(f) => *f,
        Value::Integer(i) => *i as f64,
        Value::String(s) => {
            let s = s.trim();
            let split = s
                .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E')))
                .unwrap_or(s.len());
            let (number, suffix) = s.split_at(split);
            let number: f64 = number
                .trim()
                .parse()
                .map_err(|_| Error::config(field, format!("cannot read a number from `{s}`")))?;
            let scale = unit.scale(suffix.trim()).ok_or_else(|| {
                Error::config(field, format!("unknown unit `{}` (expected {})", suffix.trim(), unit.accepted()))
            })?;
            number * scale
        }
        other => return Err(Error::config(field, format!("expected a number or a string, found {}", other.type_str()))),
    };
    if !parsed.is_finite() {
        return Err(Error::config(field, "must be finite"));
    }
    Ok(parsed)
}

/// File key of a physical parameter named in an invariant violation.
fn file_key(parameter: &str) -> Option<&'static str> {
    Some(match parameter {
        "pile.E" => "pile.elastic_modulus",
        "pile.D" => "pile.diameter",
        "pile.L" => "pile.length",
        "soil.Es" => "soil.elastic_modulus",
        "soil.nu_s" => "soil.poisson_ratio",
        "soil.t" => "soil.shear_layer_thickness",
        "tunnel.H" => "tunnel.axis_depth",
        "tunnel.R" => "tunnel.radius",
        "tunnel.x0" => "tunnel.offset",
        "tunnel.epsilon" => "tunnel.volume_loss",
        _ => return None,
    })
}

/// Re-labels an invariant violation with the file key it came from.
pub(crate) fn at(field: String) -> impl FnOnce(Error) -> Error {
    move |e| match e {
        Error::InvalidParameter { field: p, reason } => Error::config(file_key(p).map_or(field, String::from), reason),
        Error::InvalidData(reason) => Error::config(field, reason),
        Error::Domain { value, min, max, .. } => {
            Error::config(field, format!("{value} lies outside [{min}, {max}]"))
        }
        other => other,
    }
}

impl ProblemConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), format!("cannot read: {e}")))?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config("<file>", format!("TOML syntax: {}", e.message())))?;
        Self::from_table(&table)
    }

    pub fn from_table(table: &Table) -> Result<Self> {
        let root = Section::new("", table, &["boundary_condition", "pile", "soil", "tunnel", "solver", "fdm", "data"])?;

        let bc: BoundaryCondition = root
            .string("boundary_condition")?
            .ok_or_else(|| Error::config("boundary_condition", "missing"))?
            .parse()
            .map_err(at("boundary_condition".into()))?;

        let pile_s = root
            .subsection("pile", &["elastic_modulus", "diameter", "length"])?
            .ok_or_else(|| Error::config("pile", "missing table"))?;
        let pile = PileProperties::new(
            pile_s.quantity("elastic_modulus", Unit::Pressure)?,
            pile_s.quantity("diameter", Unit::Length)?,
            pile_s.quantity("length", Unit::Length)?,
        )
        .map_err(at("pile".into()))?;

        let soil_s = root
            .subsection("soil", &["elastic_modulus", "poisson_ratio", "shear_layer_thickness"])?
            .ok_or_else(|| Error::config("soil", "missing table"))?;
        let es = soil_s.quantity("elastic_modulus", Unit::Pressure)?;
        let nu = soil_s.quantity("poisson_ratio", Unit::Fraction)?;
        let soil = match soil_s.optional_quantity("shear_layer_thickness", Unit::Length)? {
            Some(t) => SoilProperties::new(es, nu, t),
            None => SoilProperties::with_default_thickness(es, nu, pile.diameter()),
        }
        .map_err(at("soil".into()))?;

        let tunnel_s = root
            .subsection("tunnel", &["axis_depth", "radius", "offset", "volume_loss"])?
            .ok_or_else(|| Error::config("tunnel", "missing table"))?;
        let tunnel = TunnelGeometry::new(
            tunnel_s.quantity("axis_depth", Unit::Length)?,
            tunnel_s.quantity("radius", Unit::Length)?,
            tunnel_s.quantity("offset", Unit::Length)?,
            tunnel_s.quantity("volume_loss", Unit::Fraction)?,
        )
        .map_err(at("tunnel".into()))?;

        let problem = PileSoilProblem::new(pile, soil, tunnel, bc);
        let solver = match root.subsection("solver", SOLVER_KEYS)? {
            Some(s) => parse_solver(&s, SolverConfig::default())?,
            None => SolverConfig::default(),
        };
        let fdm = match root.subsection("fdm", &["segments"])? {
            Some(s) => FdmConfig {
                segments: s.count("segments")?.map_or(FdmConfig::default().segments, |n| n as usize),
            },
            None => FdmConfig::default(),
        };
        fdm.validate().map_err(at("fdm.segments".into()))?;

        let data = parse_data(table.get("data"))?;
        data.check_within(problem.length()).map_err(at("data".into()))?;

        Ok(Self {
            problem,
            solver,
            fdm,
            data,
        })
    }

    /// Resolved snapshot in SI units; parsing it gives back `self`.
    pub fn to_table(&self) -> Table {
        let p = &self.problem;
        let mut root = Table::new();
        root.insert("boundary_condition".into(), p.bc.as_str().into());

        let mut pile = Table::new();
        pile.insert("elastic_modulus".into(), p.pile.elastic_modulus().into());
        pile.insert("diameter".into(), p.pile.diameter().into());
        pile.insert("length".into(), p.pile.length().into());
        root.insert("pile".into(), pile.into());

        let mut soil = Table::new();
        soil.insert("elastic_modulus".into(), p.soil.elastic_modulus().into());
        soil.insert("poisson_ratio".into(), p.soil.poisson_ratio().into());
        soil.insert("shear_layer_thickness".into(), p.soil.shear_layer_thickness().into());
        root.insert("soil".into(), soil.into());

        let mut tunnel = Table::new();
        tunnel.insert("axis_depth".into(), p.tunnel.axis_depth().into());
        tunnel.insert("radius".into(), p.tunnel.radius().into());
        tunnel.insert("offset".into(), p.tunnel.offset().into());
        tunnel.insert("volume_loss".into(), p.tunnel.volume_loss().into());
        root.insert("tunnel".into(), tunnel.into());

        root.insert("solver".into(), solver_table(&self.solver).into());
        let mut fdm = Table::new();
        fdm.insert("segments".into(), (self.fdm.segments as i64).into());
        root.insert("fdm".into(), fdm.into());

        if !self.data.is_empty() {
            let rows: Vec<Value> = self
                .data
                .entries()
                .iter()
                .map(|o| {
                    let mut t = Table::new();
                    t.insert("depth".into(), o.depth.into());
                    t.insert("deflection".into(), o.deflection.into());
                    Value::Table(t)
                })
                .collect();
            root.insert("data".into(), rows.into());
        }
        root
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&self.to_table()).expect("plain tables always serialize")
    }
}

pub(crate) const SOLVER_KEYS: &[&str] = &[
    "neurons",
    "collocation_points",
    "seed",
    "rcond",
    "weight_range",
    "bias_range",
    "activation",
    "residual_weights",
    "data_weight",
    "equilibrium_scaling",
];

pub(crate) fn solver_table(s: &SolverConfig) -> Table {
    let mut t = Table::new();
    t.insert("neurons".into(), (s.elm.neurons as i64).into());
    t.insert("collocation_points".into(), (s.collocation_points as i64).into());
    t.insert("seed".into(), (s.elm.seed as i64).into());
    t.insert("rcond".into(), s.rcond.into());
    t.insert("weight_range".into(), s.elm.weight_range.into());
    t.insert("bias_range".into(), s.elm.bias_range.into());
    t.insert("activation".into(), "tanh".into());
    t.insert(
        "residual_weights".into(),
        Value::Array(s.residual_weights.iter().map(|&w| w.into()).collect()),
    );
    t.insert("data_weight".into(), s.data_weight.into());
    let scaling = match s.equilibrium_scaling {
        EquilibriumScaling::Unit => "unit",
        EquilibriumScaling::BendingStiffness => "bending_stiffness",
    };
    t.insert("equilibrium_scaling".into(), scaling.into());
    t
}

pub(crate) fn parse_solver(s: &Section<'_>, mut cfg: SolverConfig) -> Result<SolverConfig> {
    if let Some(n) = s.count("neurons")? {
        cfg.elm.neurons = n as usize;
    }
    if let Some(n) = s.count("collocation_points")? {
        cfg.collocation_points = n as usize;
    }
    if let Some(n) = s.count("seed")? {
        cfg.elm.seed = n;
    }
    if let Some(x) = s.number("rcond")? {
        cfg.rcond = x;
    }
    if let Some(x) = s.number("weight_range")? {
        cfg.elm.weight_range = x;
    }
    if let Some(x) = s.number("bias_range")? {
        cfg.elm.bias_range = x;
    }
    if let Some(x) = s.number("data_weight")? {
        cfg.data_weight = x;
    }
    if let Some(a) = s.string("activation")? {
        cfg.elm.activation = match a {
            "tanh" => Activation::Tanh,
            other => return Err(Error::config(s.key("activation"), format!("unknown activation `{other}`"))),
        };
    }
    if let Some(e) = s.string("equilibrium_scaling")? {
        cfg.equilibrium_scaling = match e {
            "unit" => EquilibriumScaling::Unit,
            "bending_stiffness" => EquilibriumScaling::BendingStiffness,
            other => {
                return Err(Error::config(
                    s.key("equilibrium_scaling"),
                    format!("unknown scaling `{other}` (expected unit or bending_stiffness)"),
                ))
            }
        };
    }
    if let Some(v) = s.table.get("residual_weights") {
        let field = s.key("residual_weights");
        let items = v
            .as_array()
            .filter(|a| a.len() == 4)
            .ok_or_else(|| Error::config(&field, "expected an array of four numbers"))?;
        for (slot, item) in cfg.residual_weights.iter_mut().zip(items) {
            *slot = match item {
                Value::Float(f) => *f,
                Value::Integer(i) => *i as f64,
                _ => return Err(Error::config(&field, "expected an array of four numbers")),
            };
        }
    }
    cfg.validate().map_err(|e| match e {
        Error::InvalidParameter { field, reason } => Error::config(solver_key(s, field), reason),
        other => other,
    })?;
    Ok(cfg)
}

/// Maps an internal parameter name to the file key it is read from.
fn solver_key(s: &Section<'_>, field: &str) -> String {
    let key = match field {
        "elm.neurons" => "neurons",
        "solver.nc" => "collocation_points",
        "solver.rcond" => "rcond",
        "elm.weight_range" => "weight_range",
        "elm.bias_range" => "bias_range",
        "solver.residual_weights" => "residual_weights",
        other => other,
    };
    s.key(key)
}

fn parse_data(value: Option<&Value>) -> Result<MonitoredDataset> {
    let Some(value) = value else {
        return Ok(MonitoredDataset::empty());
    };
    let rows = value
        .as_array()
        .ok_or_else(|| Error::config("data", "expected an array of tables ([[data]])"))?;
    let mut entries = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let path = format!("data[{i}]");
        let table = row
            .as_table()
            .ok_or_else(|| Error::config(&path, "expected a table with depth and deflection"))?;
        let s = Section::new(&path, table, &["depth", "deflection"])?;
        entries.push(Observation {
            depth: s.quantity("depth", Unit::Length)?,
            deflection: s.quantity("deflection", Unit::Length)?,
        });
    }
    MonitoredDataset::new(entries).map_err(at("data".into()))
}
