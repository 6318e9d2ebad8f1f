use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Element-wise activation applied after a dense layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Sigmoid,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the activation output `y = f(z)` (and `z`
    /// for relu).
    #[inline]
    pub fn derivative(self, z: f64, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Identity => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::Sigmoid => "sigmoid",
            Activation::Identity => "identity",
        }
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
        match s {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            "sigmoid" => Ok(Activation::Sigmoid),
            "identity" => Ok(Activation::Identity),
            other => Err(Error::Config(format!("unknown activation `{other}`"))),
        }
    }
}

/// Shape of one dense layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layer {
    pub fan_in: usize,
    pub fan_out: usize,
    pub activation: Activation,
}

impl Layer {
    pub fn weight_count(&self) -> usize {
        self.fan_in * self.fan_out
    }

    pub fn param_count(&self) -> usize {
        self.fan_in * self.fan_out + self.fan_out
    }
}

/// Architecture of a multilayer perceptron.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub input_dim: usize,
    pub hidden_layers: Vec<(usize, Activation)>,
    pub output_dim: usize,
    pub output_activation: Activation,
}

impl MlpSpec {
    pub fn new(
        input_dim: usize,
        hidden_layers: Vec<(usize, Activation)>,
        output_dim: usize,
        output_activation: Activation,
    ) -> Result<Self> {
        let spec = MlpSpec {
            input_dim,
            hidden_layers,
            output_dim,
            output_activation,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// 7 inputs, two hidden layers of 64 relu units, one linear output.
    pub fn regression_default() -> Self {
        MlpSpec {
            input_dim: 7,
            hidden_layers: vec![(64, Activation::Relu), (64, Activation::Relu)],
            output_dim: 1,
            output_activation: Activation::Identity,
        }
    }

    /// 30 inputs, two hidden layers of 32 relu units, one sigmoid output.
    pub fn classification_default() -> Self {
        MlpSpec {
            input_dim: 30,
            hidden_layers: vec![(32, Activation::Relu), (32, Activation::Relu)],
            output_dim: 1,
            output_activation: Activation::Sigmoid,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::Config("input_dim must be >= 1".into()));
        }
        if self.output_dim == 0 {
            return Err(Error::Config("output_dim must be >= 1".into()));
        }
        if let Some(i) = self.hidden_layers.iter().position(|&(w, _)| w == 0) {
            return Err(Error::Config(format!("hidden layer {i} has width 0")));
        }
        if !matches!(
            self.output_activation,
            Activation::Identity | Activation::Sigmoid
        ) {
            return Err(Error::Config(format!(
                "output activation must be identity or sigmoid, got {}",
                self.output_activation
            )));
        }
        Ok(())
    }

    /// Same architecture with a different input width.
    pub fn with_input_dim(&self, input_dim: usize) -> Self {
        MlpSpec {
            input_dim,
            ..self.clone()
        }
    }

    pub fn layers(&self) -> Vec<Layer> {
        let mut layers = Vec::with_capacity(self.hidden_layers.len() + 1);
        let mut fan_in = self.input_dim;
        for &(width, activation) in &self.hidden_layers {
            layers.push(Layer {
                fan_in,
                fan_out: width,
                activation,
            });
            fan_in = width;
        }
        layers.push(Layer {
            fan_in,
            fan_out: self.output_dim,
            activation: self.output_activation,
        });
        layers
    }

    /// Σ over layers of `fan_in·fan_out + fan_out`.
    pub fn param_count(&self) -> usize {
        self.layers().iter().map(Layer::param_count).sum()
    }

    /// Compact text form, e.g. `7-64:relu-64:relu-1:identity`.
    pub fn to_text(&self) -> String {
        let mut s = self.input_dim.to_string();
        for (w, a) in &self.hidden_layers {
            s.push_str(&format!("-{w}:{a}"));
        }
        s.push_str(&format!("-{}:{}", self.output_dim, self.output_activation));
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.trim().split('-').collect();
        if parts.len() < 2 {
            return Err(Error::Config(format!("malformed architecture `{text}`")));
        }
        let input_dim = parts[0]
            .parse()
            .map_err(|_| Error::Config(format!("bad input width in `{text}`")))?;
        let mut layers = Vec::with_capacity(parts.len() - 1);
        for part in &parts[1..] {
            let (w, a) = part
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("layer `{part}` lacks `:activation`")))?;
            let w: usize = w
                .parse()
                .map_err(|_| Error::Config(format!("bad layer width `{w}`")))?;
            layers.push((w, a.parse::<Activation>()?));
        }
        let (output_dim, output_activation) = layers.pop().expect("at least one layer");
        MlpSpec::new(input_dim, layers, output_dim, output_activation)
    }
}
