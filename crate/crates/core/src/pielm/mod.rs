//! Physics-informed extreme learning machine for the pile equation.
//!
//! The fourth-order equation is split into four first-order ones in
//! w, θ = w', M̄ = θ', Q̄ = M̄' on the normalised depth z̃ = z/L. Each field is a
//! hard-constrained combination of the same random features with its own
//! output weights, so every residual is affine in β = [β1; β2; β3; β4] and
//! training is a single minimum-norm least-squares solve.

mod constraints;
mod data;
mod system;

pub use constraints::{constrained_derivative, constrained_value, Embedding, Field};
pub use data::{MonitoredDataset, Observation, DATA_HEADER};
pub use system::{
    assemble_system, assemble_system_with_load, train, EquilibriumScaling, LossSystem, RowBlock, SolverConfig, Training,
};

use crate::elm::ElmBasis;
use crate::error::{Error, Result};
use crate::physics::PileSoilProblem;
use crate::profile::ResponseProfile;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingMetadata {
    pub residual_norm: f64,
    pub rank: usize,
    /// Wall time of system assembly plus the least-squares solve.
    pub training_seconds: f64,
    pub rows: usize,
    pub columns: usize,
}

/// Trained network: the frozen basis plus the fitted output weights.
#[derive(Debug, Clone)]
pub struct TrainedSolution {
    problem: PileSoilProblem,
    basis: ElmBasis,
    beta: Vec<f64>,
    metadata: TrainingMetadata,
}

impl TrainedSolution {
    pub fn new(problem: PileSoilProblem, basis: ElmBasis, beta: Vec<f64>, metadata: TrainingMetadata) -> Result<Self> {
        if beta.len() != 4 * basis.neurons() {
            return Err(Error::DimensionMismatch(format!(
                "β has {} entries, expected 4 × {}",
                beta.len(),
                basis.neurons()
            )));
        }
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::Training {
                rows: metadata.rows,
                cols: metadata.columns,
                reason: "output weights are not finite".into(),
            });
        }
        Ok(Self {
            problem,
            basis,
            beta,
            metadata,
        })
    }

    pub fn problem(&self) -> &PileSoilProblem {
        &self.problem
    }

    pub fn basis(&self) -> &ElmBasis {
        &self.basis
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// Output weights of one field.
    pub fn beta_block(&self, field: Field) -> &[f64] {
        let m = self.basis.neurons();
        &self.beta[field.index() * m..(field.index() + 1) * m]
    }

    pub fn metadata(&self) -> &TrainingMetadata {
        &self.metadata
    }

    /// Constrained field at the normalised depth, in its own units
    /// (w in m, θ in rad, M̄ and Q̄ per EI).
    pub fn field_at(&self, field: Field, zt: f64) -> f64 {
        let top = self.basis.feature_row(0.0);
        let tip = self.basis.feature_row(1.0);
        let row = constrained_value(field, self.problem.bc, &self.basis.feature_row(zt), &top, &tip, zt);
        dot(&row, self.beta_block(field))
    }

    /// d/dz̃ of [`Self::field_at`].
    pub fn field_slope_at(&self, field: Field, zt: f64) -> f64 {
        let top = self.basis.feature_row(0.0);
        let tip = self.basis.feature_row(1.0);
        let row = constrained_derivative(field, self.problem.bc, &self.basis.derivative_row(zt), &top, &tip);
        dot(&row, self.beta_block(field))
    }

    /// w, θ, M = EI·M̄ and Q = EI·Q̄ at physical depths.
    pub fn evaluate(&self, depths: &[f64]) -> Result<ResponseProfile> {
        let length = self.problem.length();
        if let Some(&bad) = depths.iter().find(|z| !(0.0..=length).contains(*z)) {
            return Err(Error::Domain {
                what: "depth z",
                value: bad,
                min: 0.0,
                max: length,
            });
        }
        let ei = self.problem.pile.bending_stiffness();
        let mc = self.basis.neurons();
        let top = self.basis.feature_row(0.0);
        let tip = self.basis.feature_row(1.0);
        let embeddings = Field::ALL.map(|f| Embedding::for_field(self.problem.bc, f));
        let mut raw = vec![0.0; mc];
        let mut row = vec![0.0; mc];
        let mut profile = ResponseProfile::with_capacity(depths.len());
        for &z in depths {
            let zt = z / length;
            self.basis.feature_row_into(zt, &mut raw);
            let mut field = [0.0; 4];
            for (f, emb) in embeddings.iter().enumerate() {
                emb.value_row_into(&raw, &top, &tip, zt, &mut row);
                field[f] = dot(&row, self.beta_block(Field::ALL[f]));
            }
            profile.push(z, field[0], field[1], ei * field[2], ei * field[3]);
        }
        Ok(profile)
    }

    /// Evaluates on `segments + 1` evenly spaced depths from 0 to L.
    pub fn evaluate_uniform(&self, segments: usize) -> Result<ResponseProfile> {
        let length = self.problem.length();
        let depths: Vec<f64> = (0..=segments)
            .map(|j| length * j as f64 / segments as f64)
            .collect();
        self.evaluate(&depths)
    }
}

/// init basis → assemble → train.
pub fn solve(problem: &PileSoilProblem, config: &SolverConfig, data: &MonitoredDataset) -> Result<TrainedSolution> {
    config.validate()?;
    let basis = ElmBasis::init(&config.elm)?;
    solve_with_basis(problem, basis, config, data)
}

/// Trains on an existing basis.
pub fn solve_with_basis(
    problem: &PileSoilProblem,
    basis: ElmBasis,
    config: &SolverConfig,
    data: &MonitoredDataset,
) -> Result<TrainedSolution> {
    let (system, training, seconds) = system::assemble_and_train(problem, &basis, config, data)?;
    let metadata = TrainingMetadata {
        residual_norm: training.residual_norm,
        rank: training.rank,
        training_seconds: seconds,
        rows: system.rows(),
        columns: system.matrix.ncols(),
    };
    TrainedSolution::new(*problem, basis, training.beta, metadata)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
