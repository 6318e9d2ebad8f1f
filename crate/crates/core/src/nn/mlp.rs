use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::distr::{Distribution, Uniform};

use super::loss::{loss_grad, LossKind, BCE_CLAMP};
use super::spec::{Activation, Layer, MlpSpec};
use crate::{seed, Error, Result};

/// Which half of a layer's parameters an index addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamKind {
    Weight,
    Bias,
}

/// A multilayer perceptron with a flat parameter vector.
///
/// Layout is layer-major: for each layer, its `fan_out × fan_in` weight
/// matrix (row-major, row = output unit) followed by its `fan_out` biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    spec: MlpSpec,
    layers: Vec<Layer>,
    offsets: Vec<usize>,
    params: Vec<f64>,
}

struct Cache {
    // inputs[l] feeds layer l; inputs[L] is the network output
    inputs: Vec<Array2<f64>>,
    pre: Vec<Array2<f64>>,
}

impl Mlp {
    /// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero biases.
    pub fn init(spec: &MlpSpec, seed: u64) -> Result<Self> {
        let mut mlp = Mlp::zeros(spec)?;
        let mut rng = seed::rng(seed);
        for (l, layer) in mlp.layers.clone().iter().enumerate() {
            let limit = (6.0 / (layer.fan_in + layer.fan_out) as f64).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit).expect("finite limit");
            let off = mlp.offsets[l];
            for w in &mut mlp.params[off..off + layer.weight_count()] {
                *w = dist.sample(&mut rng);
            }
        }
        Ok(mlp)
    }

    pub fn zeros(spec: &MlpSpec) -> Result<Self> {
        spec.validate()?;
        let layers = spec.layers();
        let mut offsets = Vec::with_capacity(layers.len());
        let mut n = 0;
        for layer in &layers {
            offsets.push(n);
            n += layer.param_count();
        }
        Ok(Mlp {
            spec: spec.clone(),
            layers,
            offsets,
            params: vec![0.0; n],
        })
    }

    pub fn from_params(spec: &MlpSpec, params: Vec<f64>) -> Result<Self> {
        let mut mlp = Mlp::zeros(spec)?;
        if params.len() != mlp.params.len() {
            return Err(Error::Shape(format!(
                "architecture {} needs {} parameters, got {}",
                spec.to_text(),
                mlp.params.len(),
                params.len()
            )));
        }
        mlp.params = params;
        Ok(mlp)
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn into_params(self) -> Vec<f64> {
        self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    /// Flat index of a weight `(row = output unit, col = input unit)` or a
    /// bias `(row = output unit, col = 0)`.
    pub fn param_index(&self, layer: usize, kind: ParamKind, row: usize, col: usize) -> Option<usize> {
        let shape = self.layers.get(layer)?;
        let off = self.offsets[layer];
        match kind {
            ParamKind::Weight if row < shape.fan_out && col < shape.fan_in => {
                Some(off + row * shape.fan_in + col)
            }
            ParamKind::Bias if row < shape.fan_out && col == 0 => {
                Some(off + shape.weight_count() + row)
            }
            _ => None,
        }
    }

    /// Inverse of [`Mlp::param_index`].
    pub fn param_location(&self, index: usize) -> Option<(usize, ParamKind, usize, usize)> {
        if index >= self.params.len() {
            return None;
        }
        let layer = self.offsets.partition_point(|&o| o <= index) - 1;
        let shape = self.layers[layer];
        let local = index - self.offsets[layer];
        if local < shape.weight_count() {
            Some((layer, ParamKind::Weight, local / shape.fan_in, local % shape.fan_in))
        } else {
            Some((layer, ParamKind::Bias, local - shape.weight_count(), 0))
        }
    }

    pub fn weights(&self, layer: usize) -> ArrayView2<'_, f64> {
        let shape = self.layers[layer];
        let off = self.offsets[layer];
        ArrayView2::from_shape(
            (shape.fan_out, shape.fan_in),
            &self.params[off..off + shape.weight_count()],
        )
        .expect("layout matches spec")
    }

    pub fn biases(&self, layer: usize) -> ArrayView1<'_, f64> {
        let shape = self.layers[layer];
        let off = self.offsets[layer] + shape.weight_count();
        ArrayView1::from(&self.params[off..off + shape.fan_out])
    }

    fn check_input(&self, inputs: &ArrayView2<f64>) -> Result<()> {
        if inputs.ncols() != self.spec.input_dim {
            return Err(Error::Shape(format!(
                "network expects {} inputs, batch has {}",
                self.spec.input_dim,
                inputs.ncols()
            )));
        }
        Ok(())
    }

    /// Evaluates a batch (one row per example).
    pub fn forward(&self, inputs: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(&inputs)?;
        let mut a = inputs.to_owned();
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = a.dot(&self.weights(l).t());
            z += &self.biases(l);
            z.mapv_inplace(|v| layer.activation.apply(v));
            a = z;
        }
        Ok(a)
    }

    pub fn predict_one(&self, x: &[f64]) -> Result<Vec<f64>> {
        let view = ArrayView2::from_shape((1, x.len()), x)
            .map_err(|e| Error::Shape(e.to_string()))?;
        Ok(self.forward(view)?.into_raw_vec_and_offset().0)
    }

    fn forward_cached(&self, inputs: ArrayView2<f64>) -> Cache {
        let mut cache = Cache {
            inputs: Vec::with_capacity(self.layers.len() + 1),
            pre: Vec::with_capacity(self.layers.len()),
        };
        cache.inputs.push(inputs.to_owned());
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = cache.inputs[l].dot(&self.weights(l).t());
            z += &self.biases(l);
            let y = z.mapv(|v| layer.activation.apply(v));
            cache.pre.push(z);
            cache.inputs.push(y);
        }
        cache
    }

    /// Mean batch loss and its gradient in flat parameter order.
    pub fn loss_and_gradients(
        &self,
        inputs: ArrayView2<f64>,
        targets: ArrayView2<f64>,
        kind: LossKind,
    ) -> Result<(f64, Vec<f64>)> {
        self.check_input(&inputs)?;
        if inputs.nrows() == 0 {
            return Err(Error::Shape("empty batch".into()));
        }
        if targets.dim() != (inputs.nrows(), self.spec.output_dim) {
            return Err(Error::Shape(format!(
                "targets {:?} do not match batch {} x outputs {}",
                targets.dim(),
                inputs.nrows(),
                self.spec.output_dim
            )));
        }
        let cache = self.forward_cached(inputs);
        let out = cache.inputs.last().expect("output layer");
        let value = super::loss::loss(out.view(), targets, kind)?;

        let last = self.layers.len() - 1;
        let out_act = self.layers[last].activation;
        let mut delta = if kind == LossKind::Bce && out_act == Activation::Sigmoid {
            // fused sigmoid + cross-entropy: dL/dz = (p - t) / count
            let scale = 1.0 / out.len() as f64;
            let mut d = out - &targets;
            ndarray::Zip::from(&mut d).and(out).for_each(|d, &p| {
                *d = if p < BCE_CLAMP || p > 1.0 - BCE_CLAMP {
                    0.0
                } else {
                    *d * scale
                };
            });
            d
        } else {
            let mut d = loss_grad(out.view(), targets, kind)?;
            ndarray::Zip::from(&mut d)
                .and(&cache.pre[last])
                .and(out)
                .for_each(|d, &z, &y| *d *= out_act.derivative(z, y));
            d
        };

        let mut grad = vec![0.0; self.params.len()];
        for l in (0..self.layers.len()).rev() {
            let shape = self.layers[l];
            let off = self.offsets[l];
            let dw = delta.t().dot(&cache.inputs[l]);
            let db: Array1<f64> = delta.sum_axis(Axis(0));
            grad[off..off + shape.weight_count()]
                .copy_from_slice(dw.as_standard_layout().as_slice().expect("contiguous"));
            grad[off + shape.weight_count()..off + shape.param_count()]
                .copy_from_slice(db.as_slice().expect("contiguous"));
            if l > 0 {
                let prev_act = self.layers[l - 1].activation;
                let mut next = delta.dot(&self.weights(l));
                ndarray::Zip::from(&mut next)
                    .and(&cache.pre[l - 1])
                    .and(&cache.inputs[l])
                    .for_each(|d, &z, &y| *d *= prev_act.derivative(z, y));
                delta = next;
            }
        }
        Ok((value, grad))
    }

    /// `dLoss/dParams` in flat parameter order.
    pub fn gradients(
        &self,
        inputs: ArrayView2<f64>,
        targets: ArrayView2<f64>,
        kind: LossKind,
    ) -> Result<Vec<f64>> {
        self.loss_and_gradients(inputs, targets, kind).map(|(_, g)| g)
    }
}
