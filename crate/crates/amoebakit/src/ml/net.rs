//! Layer specifications, parameter storage, and the forward/backward
//! passes. Everything is plain `f64` loops over flat buffers; the
//! networks involved are small enough that clarity wins.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Flat(usize),
    Spatial {
        channels: usize,
        height: usize,
        width: usize,
    },
}

impl Shape {
    pub fn len(&self) -> usize {
        match *self {
            Shape::Flat(n) => n,
            Shape::Spatial {
                channels,
                height,
                width,
            } => channels * height * width,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Padding {
    Same,
    Valid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    Relu,
    LeakyRelu(f64),
    Sigmoid,
    None,
}

impl Activation {
    fn apply(&self, v: f64) -> f64 {
        match *self {
            Activation::Relu => v.max(0.0),
            Activation::LeakyRelu(slope) => {
                if v >= 0.0 {
                    v
                } else {
                    slope * v
                }
            }
            Activation::Sigmoid => 1.0 / (1.0 + (-v).exp()),
            Activation::None => v,
        }
    }

    /// Derivative expressed through the post-activation value, which is
    /// available without storing pre-activations separately.
    fn derivative_from_output(&self, out: f64) -> f64 {
        match *self {
            Activation::Relu => f64::from(out > 0.0),
            Activation::LeakyRelu(slope) => {
                if out > 0.0 {
                    1.0
                } else {
                    slope
                }
            }
            Activation::Sigmoid => out * (1.0 - out),
            Activation::None => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LayerKind {
    Dense {
        units: usize,
    },
    Conv2d {
        filters: usize,
        kernel: (usize, usize),
        padding: Padding,
    },
    MaxPool2d {
        pool: (usize, usize),
    },
    Flatten,
    Dropout {
        rate: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerSpec {
    pub kind: LayerKind,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn dense(units: usize, activation: Activation) -> Self {
        Self {
            kind: LayerKind::Dense { units },
            activation,
        }
    }

    pub fn conv2d(
        filters: usize,
        kernel: (usize, usize),
        padding: Padding,
        activation: Activation,
    ) -> Self {
        Self {
            kind: LayerKind::Conv2d {
                filters,
                kernel,
                padding,
            },
            activation,
        }
    }

    pub fn maxpool2d(pool: (usize, usize)) -> Self {
        Self {
            kind: LayerKind::MaxPool2d { pool },
            activation: Activation::None,
        }
    }

    pub fn flatten() -> Self {
        Self {
            kind: LayerKind::Flatten,
            activation: Activation::None,
        }
    }

    pub fn dropout(rate: f64) -> Self {
        Self {
            kind: LayerKind::Dropout { rate },
            activation: Activation::None,
        }
    }
}

/// One layer with its parameters. Dense weights are `units x in` row
/// major; conv weights are `[filter][in_channel][kr][kc]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub spec: LayerSpec,
    pub in_shape: Shape,
    pub out_shape: Shape,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }
}

/// A feed-forward network: a chain of layers with consistent shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub layers: Vec<Layer>,
    pub input_shape: Shape,
    pub seed: u64,
}

fn out_shape_for(kind: &LayerKind, in_shape: Shape) -> Result<Shape> {
    match *kind {
        LayerKind::Dense { units } => Ok(Shape::Flat(units)),
        LayerKind::Conv2d {
            filters,
            kernel,
            padding,
        } => {
            let Shape::Spatial { height, width, .. } = in_shape else {
                return Err(Error::Shape("conv2d needs a spatial input".into()));
            };
            let (oh, ow) = match padding {
                Padding::Same => (height, width),
                Padding::Valid => {
                    if height < kernel.0 || width < kernel.1 {
                        return Err(Error::Shape(format!(
                            "valid conv kernel {kernel:?} larger than input {height}x{width}"
                        )));
                    }
                    (height - kernel.0 + 1, width - kernel.1 + 1)
                }
            };
            Ok(Shape::Spatial {
                channels: filters,
                height: oh,
                width: ow,
            })
        }
        LayerKind::MaxPool2d { pool } => {
            let Shape::Spatial {
                channels,
                height,
                width,
            } = in_shape
            else {
                return Err(Error::Shape("maxpool2d needs a spatial input".into()));
            };
            Ok(Shape::Spatial {
                channels,
                height: height.div_ceil(pool.0),
                width: width.div_ceil(pool.1),
            })
        }
        LayerKind::Flatten => Ok(Shape::Flat(in_shape.len())),
        LayerKind::Dropout { rate } => {
            if !(0.0..1.0).contains(&rate) {
                return Err(Error::Shape(format!("dropout rate {rate} outside [0, 1)")));
            }
            Ok(in_shape)
        }
    }
}

impl Network {
    /// Initializes parameters with symmetric uniform noise scaled by
    /// `1/sqrt(fan_in)`, biases zero, drawn from a ChaCha stream seeded
    /// by `seed` so initialization is reproducible.
    pub fn init(specs: &[LayerSpec], input_shape: Shape, seed: u64) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::Shape("network needs at least one layer".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(specs.len());
        let mut shape = input_shape;
        for spec in specs {
            let out_shape = out_shape_for(&spec.kind, shape)?;
            let (w_len, b_len, fan_in) = match spec.kind {
                LayerKind::Dense { units } => {
                    let Shape::Flat(n) = shape else {
                        return Err(Error::Shape(
                            "dense layer needs a flat input (insert a flatten layer)".into(),
                        ));
                    };
                    (units * n, units, n)
                }
                LayerKind::Conv2d {
                    filters, kernel, ..
                } => {
                    let Shape::Spatial { channels, .. } = shape else {
                        unreachable!("checked in out_shape_for")
                    };
                    let fan = channels * kernel.0 * kernel.1;
                    (filters * fan, filters, fan)
                }
                _ => (0, 0, 1),
            };
            let bound = (1.0 / fan_in as f64).sqrt();
            let weights = (0..w_len).map(|_| rng.gen_range(-bound..bound)).collect();
            let bias = vec![0.0; b_len];
            layers.push(Layer {
                spec: *spec,
                in_shape: shape,
                out_shape,
                weights,
                bias,
            });
            shape = out_shape;
        }
        Ok(Self {
            layers,
            input_shape,
            seed,
        })
    }

    pub fn output_len(&self) -> usize {
        self.layers.last().map_or(0, |l| l.out_shape.len())
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    /// Inference-mode forward pass: dropout is the identity.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_shape.len() {
            return Err(Error::Shape(format!(
                "input length {} does not match network input {}",
                input.len(),
                self.input_shape.len()
            )));
        }
        let mut x = input.to_vec();
        for layer in &self.layers {
            x = layer_forward(layer, &x, None).output;
        }
        Ok(x)
    }

    /// Forward pass skipping the final layer's activation: the raw logit
    /// vector feeding the output nonlinearity.
    pub fn forward_logits(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_shape.len() {
            return Err(Error::Shape("input length mismatch".into()));
        }
        let mut x = input.to_vec();
        let last = self.layers.len() - 1;
        for layer in &self.layers[..last] {
            x = layer_forward(layer, &x, None).output;
        }
        Ok(layer_forward_linear(&self.layers[last], &x))
    }
}

/// Per-layer forward cache used by backprop.
pub(crate) struct LayerTrace {
    pub output: Vec<f64>,
    /// Argmax source index per pooled output (maxpool only).
    pub pool_src: Vec<usize>,
    /// Multiplicative mask (dropout only).
    pub mask: Vec<f64>,
}

/// Runs one layer. `dropout` carries the keep-mask RNG when training;
/// `None` means inference (dropout = identity).
pub(crate) fn layer_forward(
    layer: &Layer,
    input: &[f64],
    dropout: Option<&mut ChaCha8Rng>,
) -> LayerTrace {
    let act = layer.spec.activation;
    match layer.spec.kind {
        LayerKind::Dense { units } => {
            let n = input.len();
            let mut out = Vec::with_capacity(units);
            for u in 0..units {
                let row = &layer.weights[u * n..(u + 1) * n];
                let mut acc = layer.bias[u];
                for (w, x) in row.iter().zip(input) {
                    acc += w * x;
                }
                out.push(act.apply(acc));
            }
            LayerTrace {
                output: out,
                pool_src: Vec::new(),
                mask: Vec::new(),
            }
        }
        LayerKind::Conv2d { .. } => {
            let mut out = conv_linear(layer, input);
            for v in &mut out {
                *v = act.apply(*v);
            }
            LayerTrace {
                output: out,
                pool_src: Vec::new(),
                mask: Vec::new(),
            }
        }
        LayerKind::MaxPool2d { pool } => {
            let Shape::Spatial {
                channels,
                height,
                width,
            } = layer.in_shape
            else {
                unreachable!()
            };
            let (oh, ow) = (height.div_ceil(pool.0), width.div_ceil(pool.1));
            let mut out = vec![0.0; channels * oh * ow];
            let mut src = vec![0usize; channels * oh * ow];
            for ch in 0..channels {
                for orow in 0..oh {
                    for ocol in 0..ow {
                        let mut best = f64::NEG_INFINITY;
                        let mut best_idx = 0;
                        for dr in 0..pool.0 {
                            let r = orow * pool.0 + dr;
                            if r >= height {
                                break;
                            }
                            for dc in 0..pool.1 {
                                let c = ocol * pool.1 + dc;
                                if c >= width {
                                    break;
                                }
                                let idx = ch * height * width + r * width + c;
                                if input[idx] > best {
                                    best = input[idx];
                                    best_idx = idx;
                                }
                            }
                        }
                        let oidx = ch * oh * ow + orow * ow + ocol;
                        out[oidx] = best;
                        src[oidx] = best_idx;
                    }
                }
            }
            LayerTrace {
                output: out,
                pool_src: src,
                mask: Vec::new(),
            }
        }
        LayerKind::Flatten => LayerTrace {
            output: input.to_vec(),
            pool_src: Vec::new(),
            mask: Vec::new(),
        },
        LayerKind::Dropout { rate } => match dropout {
            Some(rng) => {
                let keep = 1.0 - rate;
                let mask: Vec<f64> = (0..input.len())
                    .map(|_| {
                        if rng.gen::<f64>() < keep {
                            1.0 / keep
                        } else {
                            0.0
                        }
                    })
                    .collect();
                let output = input.iter().zip(&mask).map(|(x, m)| x * m).collect();
                LayerTrace {
                    output,
                    pool_src: Vec::new(),
                    mask,
                }
            }
            None => LayerTrace {
                output: input.to_vec(),
                pool_src: Vec::new(),
                mask: Vec::new(),
            },
        },
    }
}

/// Linear part of a layer without the final activation (dense/conv only;
/// other layer kinds are activation-free already).
fn layer_forward_linear(layer: &Layer, input: &[f64]) -> Vec<f64> {
    match layer.spec.kind {
        LayerKind::Dense { units } => {
            let n = input.len();
            (0..units)
                .map(|u| {
                    let row = &layer.weights[u * n..(u + 1) * n];
                    row.iter()
                        .zip(input)
                        .fold(layer.bias[u], |acc, (w, x)| acc + w * x)
                })
                .collect()
        }
        LayerKind::Conv2d { .. } => conv_linear(layer, input),
        _ => layer_forward(layer, input, None).output,
    }
}

fn conv_padding(layer: &Layer) -> (usize, usize) {
    let LayerKind::Conv2d {
        kernel, padding, ..
    } = layer.spec.kind
    else {
        unreachable!()
    };
    match padding {
        Padding::Same => ((kernel.0 - 1) / 2, (kernel.1 - 1) / 2),
        Padding::Valid => (0, 0),
    }
}

fn conv_linear(layer: &Layer, input: &[f64]) -> Vec<f64> {
    let LayerKind::Conv2d {
        filters, kernel, ..
    } = layer.spec.kind
    else {
        unreachable!()
    };
    let Shape::Spatial {
        channels,
        height,
        width,
    } = layer.in_shape
    else {
        unreachable!()
    };
    let Shape::Spatial {
        height: oh,
        width: ow,
        ..
    } = layer.out_shape
    else {
        unreachable!()
    };
    let (pad_r, pad_c) = conv_padding(layer);
    let ksize = channels * kernel.0 * kernel.1;
    let mut out = vec![0.0; filters * oh * ow];
    for f in 0..filters {
        let wbase = f * ksize;
        for orow in 0..oh {
            for ocol in 0..ow {
                let mut acc = layer.bias[f];
                for ci in 0..channels {
                    for kr in 0..kernel.0 {
                        let ir = orow + kr;
                        if ir < pad_r || ir - pad_r >= height {
                            continue;
                        }
                        let ir = ir - pad_r;
                        for kc in 0..kernel.1 {
                            let ic = ocol + kc;
                            if ic < pad_c || ic - pad_c >= width {
                                continue;
                            }
                            let ic = ic - pad_c;
                            acc += layer.weights
                                [wbase + ci * kernel.0 * kernel.1 + kr * kernel.1 + kc]
                                * input[ci * height * width + ir * width + ic];
                        }
                    }
                }
                out[f * oh * ow + orow * ow + ocol] = acc;
            }
        }
    }
    out
}

/// Gradient buffers mirroring the network's parameter layout.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &Network) -> Self {
        Self {
            weights: net
                .layers
                .iter()
                .map(|l| vec![0.0; l.weights.len()])
                .collect(),
            bias: net.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &Gradients, scale: f64) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += scale * y;
            }
        }
        for (a, b) in self.bias.iter_mut().zip(&other.bias) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += scale * y;
            }
        }
    }
}

/// Backpropagates `delta` (gradient w.r.t. the final layer's
/// pre-activation) through the cached traces, filling `grads`.
pub(crate) fn backward(
    net: &Network,
    input: &[f64],
    traces: &[LayerTrace],
    mut delta: Vec<f64>,
    grads: &mut Gradients,
) {
    for li in (0..net.layers.len()).rev() {
        let layer = &net.layers[li];
        let layer_input: &[f64] = if li == 0 {
            input
        } else {
            &traces[li - 1].output
        };
        // The incoming delta for the last layer is already w.r.t. the
        // pre-activation (fused with the loss); other layers convert
        // from post- to pre-activation here.
        if li != net.layers.len() - 1 {
            for (d, &out) in delta.iter_mut().zip(&traces[li].output) {
                *d *= layer.spec.activation.derivative_from_output(out);
            }
        }
        match layer.spec.kind {
            LayerKind::Dense { units } => {
                let n = layer_input.len();
                let gw = &mut grads.weights[li];
                let gb = &mut grads.bias[li];
                let mut next_delta = vec![0.0; n];
                for u in 0..units {
                    let d = delta[u];
                    gb[u] += d;
                    let row = &layer.weights[u * n..(u + 1) * n];
                    let grow = &mut gw[u * n..(u + 1) * n];
                    for k in 0..n {
                        grow[k] += d * layer_input[k];
                        next_delta[k] += d * row[k];
                    }
                }
                delta = next_delta;
            }
            LayerKind::Conv2d {
                filters, kernel, ..
            } => {
                let Shape::Spatial {
                    channels,
                    height,
                    width,
                } = layer.in_shape
                else {
                    unreachable!()
                };
                let Shape::Spatial {
                    height: oh,
                    width: ow,
                    ..
                } = layer.out_shape
                else {
                    unreachable!()
                };
                let (pad_r, pad_c) = conv_padding(layer);
                let ksize = channels * kernel.0 * kernel.1;
                let mut next_delta = vec![0.0; layer_input.len()];
                let gw = &mut grads.weights[li];
                let gb = &mut grads.bias[li];
                for f in 0..filters {
                    let wbase = f * ksize;
                    for orow in 0..oh {
                        for ocol in 0..ow {
                            let d = delta[f * oh * ow + orow * ow + ocol];
                            if d == 0.0 {
                                continue;
                            }
                            gb[f] += d;
                            for ci in 0..channels {
                                for kr in 0..kernel.0 {
                                    let ir = orow + kr;
                                    if ir < pad_r || ir - pad_r >= height {
                                        continue;
                                    }
                                    let ir = ir - pad_r;
                                    for kc in 0..kernel.1 {
                                        let ic = ocol + kc;
                                        if ic < pad_c || ic - pad_c >= width {
                                            continue;
                                        }
                                        let ic = ic - pad_c;
                                        let widx =
                                            wbase + ci * kernel.0 * kernel.1 + kr * kernel.1 + kc;
                                        let iidx = ci * height * width + ir * width + ic;
                                        gw[widx] += d * layer_input[iidx];
                                        next_delta[iidx] += d * layer.weights[widx];
                                    }
                                }
                            }
                        }
                    }
                }
                delta = next_delta;
            }
            LayerKind::MaxPool2d { .. } => {
                let mut next_delta = vec![0.0; layer_input.len()];
                for (o, &src) in traces[li].pool_src.iter().enumerate() {
                    next_delta[src] += delta[o];
                }
                delta = next_delta;
            }
            LayerKind::Flatten => {}
            LayerKind::Dropout { .. } => {
                if !traces[li].mask.is_empty() {
                    for (d, m) in delta.iter_mut().zip(&traces[li].mask) {
                        *d *= m;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_forward_hand_arithmetic() {
        let mut net = Network::init(&[LayerSpec::dense(1, Activation::Relu)], Shape::Flat(2), 0)
            .unwrap();
        net.layers[0].weights = vec![1.0, 1.0];
        net.layers[0].bias = vec![0.0];
        assert_eq!(net.forward(&[1.0, -3.0]).unwrap(), vec![0.0]);
        assert_eq!(net.forward(&[1.0, 2.0]).unwrap(), vec![3.0]);
    }

    #[test]
    fn sigmoid_at_zero_logit() {
        let mut net = Network::init(
            &[LayerSpec::dense(1, Activation::Sigmoid)],
            Shape::Flat(1),
            0,
        )
        .unwrap();
        net.layers[0].weights = vec![0.0];
        net.layers[0].bias = vec![0.0];
        assert_eq!(net.forward(&[123.0]).unwrap(), vec![0.5]);
        assert_eq!(net.forward_logits(&[123.0]).unwrap(), vec![0.0]);
    }

    /// A 2-4-1 ReLU net with fixed signs computes |x| - 2|y| exactly,
    /// since |q| = relu(q) + relu(-q).
    #[test]
    fn minimal_f0_network_is_exact() {
        let mut net = Network::init(
            &[
                LayerSpec::dense(4, Activation::Relu),
                LayerSpec::dense(1, Activation::Sigmoid),
            ],
            Shape::Flat(2),
            0,
        )
        .unwrap();
        // Hidden rows map (x, y) -> (-y, x, y, -x).
        net.layers[0].weights = vec![0.0, -1.0, 1.0, 0.0, 0.0, 1.0, -1.0, 0.0];
        net.layers[0].bias = vec![0.0; 4];
        net.layers[1].weights = vec![-2.0, 1.0, -2.0, 1.0];
        net.layers[1].bias = vec![0.0];
        for k in 0..200 {
            let x = -5.0 + 0.05 * k as f64;
            let y = 3.0 - 0.03 * k as f64;
            let logit = net.forward_logits(&[x, y]).unwrap()[0];
            assert_eq!(logit, x.abs() - 2.0 * y.abs());
        }
    }

    #[test]
    fn shapes_chain_and_reject_mismatch() {
        let specs = [
            LayerSpec::conv2d(4, (3, 3), Padding::Same, Activation::LeakyRelu(0.01)),
            LayerSpec::maxpool2d((2, 2)),
            LayerSpec::dropout(0.01),
            LayerSpec::flatten(),
            LayerSpec::dense(8, Activation::Relu),
            LayerSpec::dense(1, Activation::Sigmoid),
        ];
        let net = Network::init(
            &specs,
            Shape::Spatial {
                channels: 1,
                height: 8,
                width: 8,
            },
            1,
        )
        .unwrap();
        assert_eq!(net.layers[1].out_shape.len(), 4 * 4 * 4);
        assert_eq!(net.output_len(), 1);
        assert!(net.forward(&vec![0.0; 64]).unwrap()[0].is_finite());
        assert!(net.forward(&vec![0.0; 63]).is_err());
        // Dense directly on a spatial shape is rejected.
        assert!(Network::init(
            &[LayerSpec::dense(3, Activation::Relu)],
            Shape::Spatial {
                channels: 1,
                height: 2,
                width: 2
            },
            0
        )
        .is_err());
    }

    #[test]
    fn maxpool_ceil_handles_odd_sizes() {
        let net = Network::init(
            &[LayerSpec::maxpool2d((2, 2))],
            Shape::Spatial {
                channels: 1,
                height: 1,
                width: 1,
            },
            0,
        )
        .unwrap();
        assert_eq!(net.output_len(), 1);
        assert_eq!(net.forward(&[3.5]).unwrap(), vec![3.5]);

        let net = Network::init(
            &[LayerSpec::maxpool2d((2, 2))],
            Shape::Spatial {
                channels: 1,
                height: 3,
                width: 3,
            },
            0,
        )
        .unwrap();
        let out = net
            .forward(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0])
            .unwrap();
        assert_eq!(out, vec![5.0, 6.0, 8.0, 9.0]);
    }

    #[test]
    fn init_is_deterministic_per_seed() {
        let specs = [
            LayerSpec::dense(5, Activation::Relu),
            LayerSpec::dense(1, Activation::Sigmoid),
        ];
        let a = Network::init(&specs, Shape::Flat(3), 9).unwrap();
        let b = Network::init(&specs, Shape::Flat(3), 9).unwrap();
        let c = Network::init(&specs, Shape::Flat(3), 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
