use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Activation {
    Relu,
    Tanh,
    Logistic,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::Logistic => "logistic",
        }
    }

    #[inline]
    pub(crate) fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Logistic => logistic(z),
        }
    }

    /// Derivative expressed through the activation value `a = f(z)` (and `z`
    /// for the rectifier).
    #[inline]
    pub(crate) fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
            Activation::Logistic => a * (1.0 - a),
        }
    }
}

#[inline]
pub(crate) fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            "logistic" | "sigmoid" => Ok(Activation::Logistic),
            other => Err(Error::Config(format!("unknown activation '{other}'"))),
        }
    }
}

/// Architecture of the map `T`: `input_dim -> hidden... -> output_dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct NetConfig {
    pub input_dim: usize,
    pub output_dim: usize,
    pub hidden: Vec<usize>,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
}

impl NetConfig {
    /// Two hidden layers of 300 rectified-linear units and a logistic output.
    pub fn new(input_dim: usize, output_dim: usize) -> Self {
        NetConfig {
            input_dim,
            output_dim,
            hidden: vec![300, 300],
            hidden_activation: Activation::Relu,
            output_activation: Activation::Logistic,
        }
    }

    pub fn with_hidden(mut self, hidden: Vec<usize>, activation: Activation) -> Self {
        self.hidden = hidden;
        self.hidden_activation = activation;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.output_dim < 2 || self.input_dim < self.output_dim {
            return Err(Error::Config(format!(
                "need input dimension >= output dimension >= 2, got {} -> {}",
                self.input_dim, self.output_dim
            )));
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(Error::Config("need at least one non-empty hidden layer".into()));
        }
        if self.output_activation != Activation::Logistic {
            return Err(Error::Config(format!(
                "output activation must map into (0,1); '{}' does not",
                self.output_activation
            )));
        }
        Ok(())
    }

    /// `(fan_in, fan_out)` for every layer, bottom to top.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut sizes = vec![self.input_dim];
        sizes.extend(&self.hidden);
        sizes.push(self.output_dim);
        sizes.windows(2).map(|w| (w[0], w[1])).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub alpha: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            beta1: 0.9,
            beta2: 0.999,
            alpha: 0.001,
            epsilon: 1e-8,
        }
    }
}

pub const DEFAULT_BANDWIDTHS: [f64; 5] = [0.05, 0.1, 0.5, 1.0, 5.0];

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub n_epo: usize,
    pub n_bat: usize,
    pub bandwidths: Vec<f64>,
    pub adam: AdamConfig,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            n_epo: 100,
            n_bat: 1000,
            bandwidths: DEFAULT_BANDWIDTHS.to_vec(),
            adam: AdamConfig::default(),
            seed: 0,
        }
    }
}

pub(crate) fn check_bandwidths(bandwidths: &[f64]) -> Result<()> {
    if bandwidths.is_empty() {
        return Err(Error::Config("bandwidth list is empty".into()));
    }
    if let Some(s) = bandwidths.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
        return Err(Error::Config(format!("bandwidth {s} is not a positive real")));
    }
    Ok(())
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        check_bandwidths(&self.bandwidths)?;
        if self.n_epo == 0 || self.n_bat == 0 {
            return Err(Error::Config("epochs and batch size must be positive".into()));
        }
        let a = &self.adam;
        if !(a.beta1 > 0.0 && a.beta1 < 1.0 && a.beta2 > 0.0 && a.beta2 < 1.0) {
            return Err(Error::Config("Adam decay rates must lie in (0,1)".into()));
        }
        if !(a.alpha > 0.0 && a.epsilon > 0.0) {
            return Err(Error::Config("Adam step size and smoothing constant must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_architecture_validates() {
        NetConfig::new(3, 2).validate().unwrap();
        assert!(NetConfig::new(2, 3).validate().is_err());
        assert!(NetConfig::new(3, 1).validate().is_err());
        let mut c = NetConfig::new(3, 2);
        c.output_activation = Activation::Tanh;
        assert!(c.validate().is_err());
        assert_eq!(NetConfig::new(3, 2).layer_shapes(), vec![(3, 300), (300, 300), (300, 2)]);
    }

    #[test]
    fn logistic_is_stable() {
        assert_eq!(logistic(0.0), 0.5);
        assert!(logistic(-800.0) >= 0.0);
        assert_eq!(logistic(800.0), 1.0);
        assert!((logistic(-3.0) + logistic(3.0) - 1.0).abs() < 1e-15);
    }
}
