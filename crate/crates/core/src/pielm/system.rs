//! Affine loss system `ℒ(β) = A·β − c` and its least-squares training.

use std::ops::Range;
use std::time::Instant;

use faer::Mat;
use serde::{Deserialize, Serialize};

use super::constraints::{Embedding, Field};
use super::data::MonitoredDataset;
use crate::elm::{ElmBasis, ElmConfig};
use crate::error::{Error, Result};
use crate::linalg;
use crate::physics::PileSoilProblem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Number of uniformly spaced collocation points on [0, 1], ends included.
    pub collocation_points: usize,
    pub elm: ElmConfig,
    /// Weights of the four first-order residual blocks.
    pub residual_weights: [f64; 4],
    pub data_weight: f64,
    pub equilibrium_scaling: EquilibriumScaling,
    /// Singular values at or below `rcond · σ_max` are dropped.
    pub rcond: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            collocation_points: 1000,
            elm: ElmConfig::default(),
            residual_weights: [1.0; 4],
            data_weight: 1.0,
            equilibrium_scaling: EquilibriumScaling::default(),
            rcond: 1e-12,
        }
    }
}

impl SolverConfig {
    /// Network of `neurons` hidden units trained on `points` collocation points.
    pub fn sized(neurons: usize, points: usize) -> Self {
        Self {
            collocation_points: points,
            elm: ElmConfig::default().with_neurons(neurons),
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.elm.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.elm.validate()?;
        if self.collocation_points < 5 {
            return Err(Error::param(
                "solver.nc",
                format!("{} collocation points given, at least 5 required", self.collocation_points),
            ));
        }
        if !(self.rcond > 0.0 && self.rcond < 1.0) {
            return Err(Error::param("solver.rcond", format!("{} must lie in (0, 1)", self.rcond)));
        }
        if self
            .residual_weights
            .iter()
            .chain(std::iter::once(&self.data_weight))
            .any(|w| !(*w >= 0.0) || !w.is_finite())
        {
            return Err(Error::param("solver.residual_weights", "weights must be finite and non-negative"));
        }
        Ok(())
    }

    /// Normalised collocation grid `i / (Nc − 1)`.
    pub fn collocation_grid(&self) -> Vec<f64> {
        let n = self.collocation_points;
        (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
    }
}

/// Extra factor on the equilibrium rows, applied on top of the residual weight.
///
/// The equilibrium residual is a force per unit length (order 1e7 for
/// concrete piles) while the three kinematic residuals are of the order of the
/// fields themselves. Left unscaled, the relative singular-value cutoff
/// discards most of the kinematic information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumScaling {
    /// Rows used as written.
    Unit,
    /// Rows divided by EI, giving every physics block the units of a
    /// curvature derivative.
    #[default]
    BendingStiffness,
}

impl EquilibriumScaling {
    pub fn factor(self, bending_stiffness: f64) -> f64 {
        match self {
            EquilibriumScaling::Unit => 1.0,
            EquilibriumScaling::BendingStiffness => 1.0 / bending_stiffness,
        }
    }
}

/// Which residual a row of the loss system encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowBlock {
    /// (1/L)·dw/dz̃ − θ
    Slope,
    /// (1/L)·dθ/dz̃ − M̄
    Curvature,
    /// (1/L)·dM̄/dz̃ − Q̄
    ShearBalance,
    /// (EI/L)·dQ̄/dz̃ − G·D·M̄ + k·D·w − D·f
    Equilibrium,
    /// w − w_data
    Data,
}

impl RowBlock {
    pub const PHYSICS: [RowBlock; 4] = [
        RowBlock::Slope,
        RowBlock::Curvature,
        RowBlock::ShearBalance,
        RowBlock::Equilibrium,
    ];
}

/// Linear least-squares system in the output weights β = [β1; β2; β3; β4].
#[derive(Debug, Clone)]
pub struct LossSystem {
    pub matrix: Mat<f64>,
    pub rhs: Vec<f64>,
    pub row_labels: Vec<RowBlock>,
    neurons: usize,
}

impl LossSystem {
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn neurons(&self) -> usize {
        self.neurons
    }

    /// Column range of each field's output weights.
    pub fn column_blocks(&self) -> [Range<usize>; 4] {
        let m = self.neurons;
        [0..m, m..2 * m, 2 * m..3 * m, 3 * m..4 * m]
    }

    /// ℒ(β) = A·β − c.
    pub fn loss(&self, beta: &[f64]) -> Result<Vec<f64>> {
        if beta.len() != self.matrix.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "β has {} entries, system has {} columns",
                beta.len(),
                self.matrix.ncols()
            )));
        }
        let b = faer::Col::<f64>::from_fn(beta.len(), |i| beta[i]);
        let ab = &self.matrix * &b;
        Ok(ab.iter().zip(&self.rhs).map(|(p, q)| p - q).collect())
    }
}

/// Result of the least-squares solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Training {
    pub beta: Vec<f64>,
    pub residual_norm: f64,
    pub rank: usize,
}

/// Loss system for the pile problem with the load f(z) of its tunnel.
pub fn assemble_system(
    problem: &PileSoilProblem,
    basis: &ElmBasis,
    config: &SolverConfig,
    data: &MonitoredDataset,
) -> Result<LossSystem> {
    assemble_system_with_load(problem, basis, config, data, |z| problem.external_load_unchecked(z))
}

/// Loss system with a caller-supplied load `f(z)` in place of the tunnelling
/// load; stiffness terms still come from `problem`.
pub fn assemble_system_with_load(
    problem: &PileSoilProblem,
    basis: &ElmBasis,
    config: &SolverConfig,
    data: &MonitoredDataset,
    load: impl Fn(f64) -> f64,
) -> Result<LossSystem> {
    config.validate()?;
    if basis.neurons() != config.elm.neurons {
        return Err(Error::DimensionMismatch(format!(
            "basis has {} neurons but the solver is configured for {}",
            basis.neurons(),
            config.elm.neurons
        )));
    }
    let length = problem.length();
    data.check_within(length)?;

    let mc = basis.neurons();
    let nc = config.collocation_points;
    let rows = 4 * nc + data.len();
    let mut a = Mat::<f64>::zeros(rows, 4 * mc);
    let mut c = vec![0.0; rows];
    let mut labels = Vec::with_capacity(rows);
    for block in RowBlock::PHYSICS {
        labels.extend(std::iter::repeat_n(block, nc));
    }
    labels.extend(std::iter::repeat_n(RowBlock::Data, data.len()));

    let ei = problem.pile.bending_stiffness();
    let d = problem.pile.diameter();
    let g = problem.shear_layer_modulus();
    let [w1, w2, w3, w4] = config.residual_weights;
    let w4 = w4 * config.equilibrium_scaling.factor(ei);
    let embeddings = Field::ALL.map(|f| Embedding::for_field(problem.bc, f));
    let top = basis.feature_row(0.0);
    let tip = basis.feature_row(1.0);

    let mut raw = vec![0.0; mc];
    let mut raw_d = vec![0.0; mc];
    let mut values = vec![vec![0.0; mc]; 4];
    let mut slopes = vec![vec![0.0; mc]; 4];
    let add = |a: &mut Mat<f64>, row: usize, field: Field, scale: f64, coeffs: &[f64]| {
        if scale == 0.0 {
            return;
        }
        let offset = field.index() * mc;
        for (k, &v) in coeffs.iter().enumerate() {
            a[(row, offset + k)] += scale * v;
        }
    };

    for (i, zt) in config.collocation_grid().into_iter().enumerate() {
        basis.feature_row_into(zt, &mut raw);
        basis.derivative_row_into(zt, &mut raw_d);
        for (f, emb) in embeddings.iter().enumerate() {
            emb.value_row_into(&raw, &top, &tip, zt, &mut values[f]);
            emb.derivative_row_into(&raw_d, &top, &tip, &mut slopes[f]);
        }
        let [vw, vt, vm, vq] = [&values[0], &values[1], &values[2], &values[3]];
        let [sw, st, sm, sq] = [&slopes[0], &slopes[1], &slopes[2], &slopes[3]];

        let row = i;
        add(&mut a, row, Field::Deflection, w1 / length, sw);
        add(&mut a, row, Field::Rotation, -w1, vt);

        let row = nc + i;
        add(&mut a, row, Field::Rotation, w2 / length, st);
        add(&mut a, row, Field::Moment, -w2, vm);

        let row = 2 * nc + i;
        add(&mut a, row, Field::Moment, w3 / length, sm);
        add(&mut a, row, Field::Shear, -w3, vq);

        let row = 3 * nc + i;
        let z = length * zt;
        add(&mut a, row, Field::Shear, w4 * ei / length, sq);
        add(&mut a, row, Field::Moment, -w4 * g * d, vm);
        add(&mut a, row, Field::Deflection, w4 * problem.subgrade_modulus_unchecked(z) * d, vw);
        c[row] = w4 * d * load(z);
    }

    let wd = config.data_weight;
    for (j, obs) in data.entries().iter().enumerate() {
        let zt = obs.depth / length;
        basis.feature_row_into(zt, &mut raw);
        embeddings[0].value_row_into(&raw, &top, &tip, zt, &mut values[0]);
        let row = 4 * nc + j;
        add(&mut a, row, Field::Deflection, wd, &values[0]);
        c[row] = wd * obs.deflection;
    }

    if a.col_iter().any(|col| col.iter().any(|v| !v.is_finite())) || c.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("loss system contains non-finite entries".into()));
    }

    Ok(LossSystem {
        matrix: a,
        rhs: c,
        row_labels: labels,
        neurons: mc,
    })
}

/// β = pinv(A)·c with the cutoff `config.rcond`.
pub fn train(system: &LossSystem, config: &SolverConfig) -> Result<Training> {
    let blocks = system.column_blocks();
    let ls = linalg::min_norm_lstsq_blocked(system.matrix.as_ref(), &system.rhs, &blocks, config.rcond)?;
    let residual_norm = linalg::residual_norm(system.matrix.as_ref(), &ls.solution, &system.rhs);
    Ok(Training {
        beta: ls.solution,
        residual_norm,
        rank: ls.rank,
    })
}

/// Assembles and trains, returning the training and its wall time in seconds.
pub(crate) fn assemble_and_train(
    problem: &PileSoilProblem,
    basis: &ElmBasis,
    config: &SolverConfig,
    data: &MonitoredDataset,
) -> Result<(LossSystem, Training, f64)> {
    let start = Instant::now();
    let system = assemble_system(problem, basis, config, data)?;
    let training = train(&system, config)?;
    Ok((system, training, start.elapsed().as_secs_f64()))
}
