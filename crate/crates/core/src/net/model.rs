use ndarray::{Array1, Array2, ArrayView2, Axis};

use super::config::NetConfig;
use super::mmd::{mmd_gradient, mmd_loss, KernelDerivative};
use crate::copula::Sample;
use crate::error::{Error, Result};
use crate::numeric::{std_normal_quantile, Rng};

/// One affine layer; `w` is `fan_out x fan_in`.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

/// Parameters of the map `T` together with its architecture.
#[derive(Clone, Debug, PartialEq)]
pub struct NetWeights {
    config: NetConfig,
    layers: Vec<Layer>,
}

impl NetWeights {
    /// Assembles weights from explicit layers, checking shapes and finiteness.
    pub fn from_layers(config: NetConfig, layers: Vec<Layer>) -> Result<Self> {
        config.validate()?;
        let shapes = config.layer_shapes();
        if shapes.len() != layers.len() {
            return Err(Error::Shape(format!(
                "architecture has {} layers, got {}",
                shapes.len(),
                layers.len()
            )));
        }
        for (k, ((fan_in, fan_out), layer)) in shapes.iter().zip(&layers).enumerate() {
            if layer.w.dim() != (*fan_out, *fan_in) || layer.b.len() != *fan_out {
                return Err(Error::Shape(format!(
                    "layer {}: expected {}x{} weights and {} biases",
                    k + 1,
                    fan_out,
                    fan_in,
                    fan_out
                )));
            }
            if layer.w.iter().chain(layer.b.iter()).any(|v| !v.is_finite()) {
                return Err(Error::Numeric(format!("layer {} has non-finite parameters", k + 1)));
            }
        }
        Ok(NetWeights { config, layers })
    }

    pub fn zeros(config: &NetConfig) -> Result<Self> {
        config.validate()?;
        let layers = config
            .layer_shapes()
            .into_iter()
            .map(|(fan_in, fan_out)| Layer {
                w: Array2::zeros((fan_out, fan_in)),
                b: Array1::zeros(fan_out),
            })
            .collect();
        Ok(NetWeights {
            config: config.clone(),
            layers,
        })
    }

    pub fn config(&self) -> &NetConfig {
        &self.config
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Parameters in layer order, each layer's weights (row-major) before
    /// its biases.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for l in &self.layers {
            out.extend(l.w.iter());
            out.extend(l.b.iter());
        }
        out
    }

    pub fn set_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::Shape(format!(
                "expected {} parameters, got {}",
                self.num_params(),
                flat.len()
            )));
        }
        let mut it = flat.iter();
        for l in &mut self.layers {
            for v in l.w.iter_mut().chain(l.b.iter_mut()) {
                *v = *it.next().unwrap();
            }
        }
        Ok(())
    }

    pub(crate) fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.w.iter_mut().chain(l.b.iter_mut()))
    }

    pub(crate) fn params(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(|l| l.w.iter().chain(l.b.iter()))
    }
}

/// Uniform weights on `±sqrt(6/(fan_in+fan_out))`, zero biases.
pub fn glorot_init(config: &NetConfig, rng: &mut Rng) -> Result<NetWeights> {
    let mut net = NetWeights::zeros(config)?;
    for l in &mut net.layers {
        let (fan_out, fan_in) = l.w.dim();
        let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
        for v in l.w.iter_mut() {
            *v = a * (2.0 * rng.uniform() - 1.0);
        }
    }
    Ok(net)
}

const OUTPUT_FLOOR: f64 = f64::MIN_POSITIVE;
const OUTPUT_CEIL: f64 = 1.0 - f64::EPSILON / 2.0;

struct Trace {
    /// Pre-activations per layer.
    z: Vec<Array2<f64>>,
    /// Activations per layer (index 0 is the input).
    a: Vec<Array2<f64>>,
}

fn run(net: &NetWeights, x: ArrayView2<'_, f64>, keep: bool) -> Result<Trace> {
    let cfg = &net.config;
    if x.ncols() != cfg.input_dim {
        return Err(Error::Shape(format!(
            "input has {} columns, network expects {}",
            x.ncols(),
            cfg.input_dim
        )));
    }
    let last = net.layers.len() - 1;
    let mut trace = Trace {
        z: Vec::new(),
        a: vec![x.to_owned()],
    };
    for (k, layer) in net.layers.iter().enumerate() {
        let act = if k == last { cfg.output_activation } else { cfg.hidden_activation };
        let prev = trace.a.last().unwrap();
        let mut z = prev.dot(&layer.w.t());
        z += &layer.b;
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite pre-activation in layer {} of {}",
                k + 1,
                last + 1
            )));
        }
        let a = z.mapv(|v| act.apply(v));
        if keep {
            trace.z.push(z);
        } else if trace.a.len() > 1 {
            trace.a.remove(0);
        }
        trace.a.push(a);
    }
    Ok(trace)
}

/// Applies `T` row by row; outputs lie strictly inside the unit cube.
pub fn forward(net: &NetWeights, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let mut y = run(net, x, false)?.a.pop().unwrap();
    y.mapv_inplace(|v| v.clamp(OUTPUT_FLOOR, OUTPUT_CEIL));
    Ok(y)
}

/// Reverse-mode gradient of a scalar function of the output given its
/// gradient `dy` with respect to the (unclamped) outputs.
fn backward(net: &NetWeights, trace: &Trace, dy: Array2<f64>) -> NetWeights {
    let cfg = &net.config;
    let last = net.layers.len() - 1;
    let mut grad = net.clone();
    let mut delta = dy;
    for k in (0..=last).rev() {
        let act = if k == last { cfg.output_activation } else { cfg.hidden_activation };
        let z = &trace.z[k];
        let a = &trace.a[k + 1];
        ndarray::Zip::from(&mut delta)
            .and(z)
            .and(a)
            .for_each(|dl, &zv, &av| *dl *= act.derivative(zv, av));
        let g = &mut grad.layers[k];
        g.w = delta.t().dot(&trace.a[k]);
        g.b = delta.sum_axis(Axis(0));
        if k > 0 {
            delta = delta.dot(&net.layers[k].w);
        }
    }
    grad
}

fn check_target(net: &NetWeights, x: ArrayView2<'_, f64>, target: ArrayView2<'_, f64>) -> Result<()> {
    if target.dim() != (x.nrows(), net.config.output_dim) {
        return Err(Error::Shape(format!(
            "target batch is {:?}, expected ({}, {})",
            target.dim(),
            x.nrows(),
            net.config.output_dim
        )));
    }
    Ok(())
}

/// Gradient of the MMD between `T(x)` and `target` with respect to every
/// parameter (same layout as the weights).
pub(crate) fn mmd_weight_gradient(
    net: &NetWeights,
    x: ArrayView2<'_, f64>,
    target: ArrayView2<'_, f64>,
    kd: &KernelDerivative,
) -> Result<NetWeights> {
    check_target(net, x, target)?;
    let trace = run(net, x, true)?;
    let y = trace.a.last().unwrap();
    let dy = mmd_gradient(y.view(), target, kd);
    Ok(backward(net, &trace, dy))
}

/// MMD loss of `T(x)` against `target` together with its gradient.
pub fn loss_and_gradient(
    net: &NetWeights,
    x: ArrayView2<'_, f64>,
    target: ArrayView2<'_, f64>,
    bandwidths: &[f64],
) -> Result<(f64, NetWeights)> {
    check_target(net, x, target)?;
    let trace = run(net, x, true)?;
    let y = trace.a.last().unwrap();
    let loss = mmd_loss(y.view(), target, bandwidths)?;
    let dy = mmd_gradient(y.view(), target, &KernelDerivative::new(bandwidths));
    Ok((loss, backward(net, &trace, dy)))
}

pub const INPUT_CLAMP: f64 = 1e-12;

/// Componentwise standard normal quantiles of clamped inputs.
pub fn normal_scores(u: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let mut out = u.to_owned();
    for v in out.iter_mut() {
        if !v.is_finite() {
            return Err(Error::Input(format!("non-finite input {v}")));
        }
        *v = std_normal_quantile(v.clamp(INPUT_CLAMP, 1.0 - INPUT_CLAMP))?;
    }
    Ok(out)
}

/// The composed map `D = T ∘ Φ⁻¹`.
pub fn transform(net: &NetWeights, u: &Sample) -> Result<Sample> {
    if u.d() != net.config.input_dim {
        return Err(Error::Shape(format!(
            "sample has {} columns, network expects {}",
            u.d(),
            net.config.input_dim
        )));
    }
    let x = normal_scores(u.view())?;
    Ok(Sample::from_unit_values(forward(net, x.view())?))
}
