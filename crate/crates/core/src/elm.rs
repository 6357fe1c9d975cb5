//! Single-hidden-layer random-feature basis with frozen input weights.
//!
//! A feature is `σ(W_k·z̃ + b_k)` on the normalised depth `z̃ ∈ [0, 1]`.
//! Input weights and biases are drawn once from a seeded ChaCha8 stream and
//! never trained; only the output layer is fitted downstream.

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Name of the generator recorded in run metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.9, uniform f64 via rand 0.9)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Tanh,
}

impl Activation {
    pub fn eval(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => a.tanh(),
        }
    }

    pub fn derivative(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => {
                let t = a.tanh();
                1.0 - t * t
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElmConfig {
    pub neurons: usize,
    pub activation: Activation,
    /// Input weights are drawn from `[-weight_range, weight_range]`.
    pub weight_range: f64,
    /// Biases are drawn from `[-bias_range, bias_range]`.
    pub bias_range: f64,
    pub seed: u64,
}

impl Default for ElmConfig {
    fn default() -> Self {
        Self {
            neurons: 500,
            activation: Activation::Tanh,
            weight_range: 5.0,
            bias_range: 5.0,
            seed: 0,
        }
    }
}

impl ElmConfig {
    pub fn with_neurons(mut self, neurons: usize) -> Self {
        self.neurons = neurons;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.neurons == 0 {
            return Err(Error::param("elm.neurons", "at least one neuron is required"));
        }
        if !(self.weight_range > 0.0) || !self.weight_range.is_finite() {
            return Err(Error::param(
                "elm.weight_range",
                format!("{} must be positive and finite", self.weight_range),
            ));
        }
        if !(self.bias_range >= 0.0) || !self.bias_range.is_finite() {
            return Err(Error::param(
                "elm.bias_range",
                format!("{} must be non-negative and finite", self.bias_range),
            ));
        }
        Ok(())
    }
}

/// Frozen input layer of the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElmBasis {
    weights: Vec<f64>,
    biases: Vec<f64>,
    activation: Activation,
}

impl ElmBasis {
    /// Draws the input layer from the seeded stream: all weights first, then all biases.
    pub fn init(config: &ElmConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let weights = (0..config.neurons)
            .map(|_| rng.random_range(-config.weight_range..=config.weight_range))
            .collect();
        let biases = (0..config.neurons)
            .map(|_| {
                if config.bias_range == 0.0 {
                    0.0
                } else {
                    rng.random_range(-config.bias_range..=config.bias_range)
                }
            })
            .collect();
        Ok(Self {
            weights,
            biases,
            activation: config.activation,
        })
    }

    /// Basis from explicit weights and biases.
    pub fn from_parts(weights: Vec<f64>, biases: Vec<f64>, activation: Activation) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::param("elm.neurons", "at least one neuron is required"));
        }
        if weights.len() != biases.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights but {} biases",
                weights.len(),
                biases.len()
            )));
        }
        if weights.iter().chain(&biases).any(|v| !v.is_finite()) {
            return Err(Error::param("elm.weights", "weights and biases must be finite"));
        }
        Ok(Self {
            weights,
            biases,
            activation,
        })
    }

    pub fn neurons(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    /// Feature row `σ(W z̃ + b)` at one point, written into `out`.
    pub(crate) fn feature_row_into(&self, zt: f64, out: &mut [f64]) {
        for ((o, &w), &b) in out.iter_mut().zip(&self.weights).zip(&self.biases) {
            *o = self.activation.eval(w * zt + b);
        }
    }

    /// Derivative row `W σ'(W z̃ + b)` at one point, written into `out`.
    pub(crate) fn derivative_row_into(&self, zt: f64, out: &mut [f64]) {
        for ((o, &w), &b) in out.iter_mut().zip(&self.weights).zip(&self.biases) {
            *o = w * self.activation.derivative(w * zt + b);
        }
    }

    pub fn feature_row(&self, zt: f64) -> Vec<f64> {
        let mut row = vec![0.0; self.neurons()];
        self.feature_row_into(zt, &mut row);
        row
    }

    pub fn derivative_row(&self, zt: f64) -> Vec<f64> {
        let mut row = vec![0.0; self.neurons()];
        self.derivative_row_into(zt, &mut row);
        row
    }

    /// n × Mc matrix of feature values at the normalised points.
    pub fn features(&self, points: &[f64]) -> Result<Mat<f64>> {
        check_normalised(points)?;
        Ok(self.tabulate(points, Self::feature_row_into))
    }

    /// n × Mc matrix of d/dz̃ of every feature at the normalised points.
    pub fn feature_derivatives(&self, points: &[f64]) -> Result<Mat<f64>> {
        check_normalised(points)?;
        Ok(self.tabulate(points, Self::derivative_row_into))
    }

    fn tabulate(&self, points: &[f64], row_fn: fn(&Self, f64, &mut [f64])) -> Mat<f64> {
        let mc = self.neurons();
        let mut out = Mat::<f64>::zeros(points.len(), mc);
        let mut row = vec![0.0; mc];
        for (i, &zt) in points.iter().enumerate() {
            row_fn(self, zt, &mut row);
            for (k, &v) in row.iter().enumerate() {
                out[(i, k)] = v;
            }
        }
        out
    }
}

pub(crate) fn check_normalised(points: &[f64]) -> Result<()> {
    match points.iter().find(|z| !(0.0..=1.0).contains(*z)) {
        Some(&bad) => Err(Error::Domain {
            what: "normalised depth",
            value: bad,
            min: 0.0,
            max: 1.0,
        }),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn same_seed_same_basis() {
        let cfg = ElmConfig::default().with_neurons(64).with_seed(42);
        let a = ElmBasis::init(&cfg).unwrap();
        let b = ElmBasis::init(&cfg).unwrap();
        assert_eq!(a, b);
        let c = ElmBasis::init(&cfg.with_seed(43)).unwrap();
        assert_ne!(a.weights(), c.weights());
    }

    #[test]
    fn single_neuron_within_ranges() {
        let cfg = ElmConfig {
            neurons: 1,
            weight_range: 2.0,
            bias_range: 0.5,
            ..ElmConfig::default()
        };
        let basis = ElmBasis::init(&cfg).unwrap();
        assert_eq!(basis.neurons(), 1);
        assert!(basis.weights()[0].abs() <= 2.0);
        assert!(basis.biases()[0].abs() <= 0.5);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(ElmBasis::init(&ElmConfig::default().with_neurons(0)).is_err());
        let cfg = ElmConfig {
            weight_range: 0.0,
            ..ElmConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = ElmConfig {
            bias_range: -1.0,
            ..ElmConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn feature_values() {
        let basis = ElmBasis::from_parts(vec![1.0, 2.0, 0.0], vec![0.0, -1.0, 0.3], Activation::Tanh).unwrap();
        let f = basis.features(&[0.5, 1.0, 0.5]).unwrap();
        // W·z̃ + b = 0 → 0
        assert_eq!(f[(0, 1)], 0.0);
        assert!((f[(1, 0)] - 0.761_594_155_955_764_9).abs() < 1e-15);
        for k in 0..3 {
            assert_eq!(f[(0, k)], f[(2, k)]);
        }
        let d = basis.feature_derivatives(&[0.2]).unwrap();
        assert_eq!(d[(0, 2)], 0.0);
        assert!(basis.features(&[1.2]).is_err());
        assert!(basis.feature_derivatives(&[-0.1]).is_err());
    }

    #[test]
    fn bias_is_a_shift() {
        let (w, b, zt) = (3.0, 0.7, 0.4);
        let shifted = ElmBasis::from_parts(vec![w], vec![b], Activation::Tanh).unwrap();
        let plain = ElmBasis::from_parts(vec![w], vec![0.0], Activation::Tanh).unwrap();
        let lhs = shifted.derivative_row(zt)[0];
        let rhs = plain.derivative_row(zt + b / w)[0];
        assert!((lhs - rhs).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_central_differences() {
        let basis = ElmBasis::init(&ElmConfig::default().with_neurons(100).with_seed(7)).unwrap();
        let h = 1e-6;
        let mut checked = 0;
        for i in 0..100 {
            let zt = 1e-5 + (1.0 - 2e-5) * ((i as f64 * 0.754_877_666) % 1.0);
            let k = (i * 37) % basis.neurons();
            let fd = (basis.feature_row(zt + h)[k] - basis.feature_row(zt - h)[k]) / (2.0 * h);
            let exact = basis.derivative_row(zt)[k];
            assert!((fd - exact).abs() <= 1e-7, "zt={zt} k={k}: {fd} vs {exact}");
            checked += 1;
        }
        assert_eq!(checked, 100);
    }

    proptest! {
        #[test]
        fn features_bounded_and_consistent(seed in 0u64..1000, zt in 1e-5f64..0.99999) {
            let basis = ElmBasis::init(&ElmConfig::default().with_neurons(16).with_seed(seed)).unwrap();
            let f = basis.feature_row(zt);
            prop_assert!(f.iter().all(|v| v.abs() <= 1.0));
            let h = 1e-6;
            let up = basis.feature_row(zt + h);
            let down = basis.feature_row(zt - h);
            let d = basis.derivative_row(zt);
            for k in 0..16 {
                prop_assert!(((up[k] - down[k]) / (2.0 * h) - d[k]).abs() <= 1e-7);
            }
        }
    }
}
