//! Exportable weight records and the Heaviside genus formula.
//!
//! A trained binary classifier ends in a single logit `p`; thresholding
//! the sigmoid at its midpoint is the Heaviside step `g = theta(p)`,
//! which turns the network into a closed-form approximate genus decider
//! built only from its weight matrices and biases.

use std::path::Path;

use super::net::{Activation, Layer, LayerKind, LayerSpec, Network, Padding, Shape};
use crate::{Error, Result};

/// Per-layer weights and biases in canonical (layer, row-major) order.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightRecord {
    pub input_shape: Shape,
    pub layers: Vec<LayerRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerRecord {
    pub spec: LayerSpec,
    pub in_shape: Shape,
    pub out_shape: Shape,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Snapshots a network's parameters.
pub fn export_weights(net: &Network) -> WeightRecord {
    WeightRecord {
        input_shape: net.input_shape,
        layers: net
            .layers
            .iter()
            .map(|l| LayerRecord {
                spec: l.spec,
                in_shape: l.in_shape,
                out_shape: l.out_shape,
                weights: l.weights.clone(),
                bias: l.bias.clone(),
            })
            .collect(),
    }
}

impl WeightRecord {
    /// Rebuilds a network with identical forward behavior.
    pub fn to_network(&self) -> Network {
        Network {
            layers: self
                .layers
                .iter()
                .map(|r| Layer {
                    spec: r.spec,
                    in_shape: r.in_shape,
                    out_shape: r.out_shape,
                    weights: r.weights.clone(),
                    bias: r.bias.clone(),
                })
                .collect(),
            input_shape: self.input_shape,
            seed: 0,
        }
    }

    /// Text format: one `layer` block per layer carrying the spec line,
    /// the dims, then row-major weights and biases at 17 significant
    /// digits (exact f64 round-trip).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("amoebakit-weights 1\ninput {}\n", shape_str(self.input_shape)));
        for r in &self.layers {
            out.push_str(&format!(
                "layer {} in {} out {}\n",
                spec_str(&r.spec),
                shape_str(r.in_shape),
                shape_str(r.out_shape)
            ));
            out.push_str(&format!("weights {}\n", r.weights.len()));
            for w in &r.weights {
                out.push_str(&format!("{w:.17e}\n"));
            }
            out.push_str(&format!("bias {}\n", r.bias.len()));
            for b in &r.bias {
                out.push_str(&format!("{b:.17e}\n"));
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<WeightRecord> {
        let mut lines = text.lines().peekable();
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidInput("empty weight file".into()))?;
        if header.trim() != "amoebakit-weights 1" {
            return Err(Error::InvalidInput(format!(
                "unrecognized weight file header: {header}"
            )));
        }
        let input_line = lines
            .next()
            .ok_or_else(|| Error::InvalidInput("missing input shape".into()))?;
        let input_shape = parse_shape(
            input_line
                .strip_prefix("input ")
                .ok_or_else(|| Error::InvalidInput("missing input shape".into()))?,
        )?;
        let mut layers = Vec::new();
        while let Some(line) = lines.next() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let rest = line
                .strip_prefix("layer ")
                .ok_or_else(|| Error::InvalidInput(format!("expected layer line, got {line}")))?;
            let (spec_part, shapes_part) = rest
                .split_once(" in ")
                .ok_or_else(|| Error::InvalidInput("malformed layer line".into()))?;
            let (in_part, out_part) = shapes_part
                .split_once(" out ")
                .ok_or_else(|| Error::InvalidInput("malformed layer line".into()))?;
            let spec = parse_spec(spec_part)?;
            let in_shape = parse_shape(in_part)?;
            let out_shape = parse_shape(out_part)?;
            let weights = parse_block(&mut lines, "weights")?;
            let bias = parse_block(&mut lines, "bias")?;
            layers.push(LayerRecord {
                spec,
                in_shape,
                out_shape,
                weights,
                bias,
            });
        }
        if layers.is_empty() {
            return Err(Error::InvalidInput("weight file has no layers".into()));
        }
        Ok(WeightRecord {
            input_shape,
            layers,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<WeightRecord> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

fn parse_block<'a>(
    lines: &mut std::iter::Peekable<impl Iterator<Item = &'a str>>,
    tag: &str,
) -> Result<Vec<f64>> {
    let head = lines
        .next()
        .ok_or_else(|| Error::InvalidInput(format!("missing {tag} block")))?;
    let count: usize = head
        .strip_prefix(tag)
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::InvalidInput(format!("bad {tag} header: {head}")))?;
    let mut values = Vec::with_capacity(count);
    for _ in 0..count {
        let line = lines
            .next()
            .ok_or_else(|| Error::InvalidInput(format!("truncated {tag} block")))?;
        values.push(
            line.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("bad value in {tag}: {line}")))?,
        );
    }
    Ok(values)
}

fn shape_str(s: Shape) -> String {
    match s {
        Shape::Flat(n) => format!("flat:{n}"),
        Shape::Spatial {
            channels,
            height,
            width,
        } => format!("spatial:{channels}x{height}x{width}"),
    }
}

fn parse_shape(s: &str) -> Result<Shape> {
    let s = s.trim();
    if let Some(n) = s.strip_prefix("flat:") {
        return Ok(Shape::Flat(n.parse().map_err(|_| {
            Error::InvalidInput(format!("bad flat shape: {s}"))
        })?));
    }
    if let Some(dims) = s.strip_prefix("spatial:") {
        let parts: Vec<&str> = dims.split('x').collect();
        if parts.len() == 3 {
            let vals: std::result::Result<Vec<usize>, _> =
                parts.iter().map(|p| p.parse()).collect();
            if let Ok(v) = vals {
                return Ok(Shape::Spatial {
                    channels: v[0],
                    height: v[1],
                    width: v[2],
                });
            }
        }
    }
    Err(Error::InvalidInput(format!("bad shape: {s}")))
}

fn spec_str(spec: &LayerSpec) -> String {
    let kind = match spec.kind {
        LayerKind::Dense { units } => format!("dense:{units}"),
        LayerKind::Conv2d {
            filters,
            kernel,
            padding,
        } => format!(
            "conv2d:{filters}:{}x{}:{}",
            kernel.0,
            kernel.1,
            match padding {
                Padding::Same => "same",
                Padding::Valid => "valid",
            }
        ),
        LayerKind::MaxPool2d { pool } => format!("maxpool2d:{}x{}", pool.0, pool.1),
        LayerKind::Flatten => "flatten".into(),
        LayerKind::Dropout { rate } => format!("dropout:{rate:.17e}"),
    };
    let act = match spec.activation {
        Activation::Relu => "relu".into(),
        Activation::LeakyRelu(slope) => format!("leaky:{slope:.17e}"),
        Activation::Sigmoid => "sigmoid".into(),
        Activation::None => "none".into(),
    };
    format!("{kind} act {act}")
}

fn parse_spec(s: &str) -> Result<LayerSpec> {
    let (kind_part, act_part) = s
        .split_once(" act ")
        .ok_or_else(|| Error::InvalidInput(format!("bad layer spec: {s}")))?;
    let bad = || Error::InvalidInput(format!("bad layer spec: {s}"));
    let kind = if let Some(units) = kind_part.strip_prefix("dense:") {
        LayerKind::Dense {
            units: units.parse().map_err(|_| bad())?,
        }
    } else if let Some(rest) = kind_part.strip_prefix("conv2d:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let filters = parts[0].parse().map_err(|_| bad())?;
        let (kh, kw) = parts[1].split_once('x').ok_or_else(bad)?;
        let padding = match parts[2] {
            "same" => Padding::Same,
            "valid" => Padding::Valid,
            _ => return Err(bad()),
        };
        LayerKind::Conv2d {
            filters,
            kernel: (kh.parse().map_err(|_| bad())?, kw.parse().map_err(|_| bad())?),
            padding,
        }
    } else if let Some(rest) = kind_part.strip_prefix("maxpool2d:") {
        let (ph, pw) = rest.split_once('x').ok_or_else(bad)?;
        LayerKind::MaxPool2d {
            pool: (ph.parse().map_err(|_| bad())?, pw.parse().map_err(|_| bad())?),
        }
    } else if kind_part == "flatten" {
        LayerKind::Flatten
    } else if let Some(rate) = kind_part.strip_prefix("dropout:") {
        LayerKind::Dropout {
            rate: rate.parse().map_err(|_| bad())?,
        }
    } else {
        return Err(bad());
    };
    let activation = if act_part == "relu" {
        Activation::Relu
    } else if let Some(slope) = act_part.strip_prefix("leaky:") {
        Activation::LeakyRelu(slope.parse().map_err(|_| bad())?)
    } else if act_part == "sigmoid" {
        Activation::Sigmoid
    } else if act_part == "none" {
        Activation::None
    } else {
        return Err(bad());
    };
    Ok(LayerSpec { kind, activation })
}

/// The Heaviside genus formula: runs the record's layers up to the final
/// logit `p` and returns `theta(p)` with `theta(0) = 1`, the sigmoid
/// midpoint convention. By construction this agrees exactly with
/// thresholding the network's forward output at 0.5.
pub fn heaviside_genus(record: &WeightRecord, input: &[f64]) -> Result<u8> {
    let last = record
        .layers
        .last()
        .ok_or_else(|| Error::InvalidInput("empty weight record".into()))?;
    if last.out_shape.len() != 1 {
        return Err(Error::InvalidInput(
            "heaviside genus needs a single-logit network".into(),
        ));
    }
    let net = record.to_network();
    let logit = net.forward_logits(input)?[0];
    Ok(u8::from(logit >= 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ml::net::Network;

    fn minimal_f0_net() -> Network {
        let mut net = Network::init(
            &[
                LayerSpec::dense(4, Activation::Relu),
                LayerSpec::dense(1, Activation::Sigmoid),
            ],
            Shape::Flat(2),
            0,
        )
        .unwrap();
        net.layers[0].weights = vec![0.0, -1.0, 1.0, 0.0, 0.0, 1.0, -1.0, 0.0];
        net.layers[0].bias = vec![0.0; 4];
        net.layers[1].weights = vec![-2.0, 1.0, -2.0, 1.0];
        net.layers[1].bias = vec![0.0];
        net
    }

    #[test]
    fn text_roundtrip_reproduces_forward_exactly() {
        let net = minimal_f0_net();
        let record = export_weights(&net);
        let text = record.to_text();
        let back = WeightRecord::parse(&text).unwrap();
        assert_eq!(back, record);
        let rebuilt = back.to_network();
        for k in 0..50 {
            let x = vec![-3.0 + 0.13 * k as f64, 2.0 - 0.09 * k as f64];
            assert_eq!(net.forward(&x).unwrap(), rebuilt.forward(&x).unwrap());
        }
    }

    #[test]
    fn heaviside_matches_absolute_value_formula_on_grid() {
        let record = export_weights(&minimal_f0_net());
        for i in 0..=100 {
            for j in 0..=100 {
                let x = (i as f64 - 50.0) / 10.0;
                let y = (j as f64 - 50.0) / 10.0;
                let want = u8::from(x.abs() - 2.0 * y.abs() >= 0.0);
                assert_eq!(heaviside_genus(&record, &[x, y]).unwrap(), want);
            }
        }
    }

    #[test]
    fn heaviside_agrees_with_thresholded_forward() {
        let net = Network::init(
            &[
                LayerSpec::dense(6, Activation::Relu),
                LayerSpec::dense(1, Activation::Sigmoid),
            ],
            Shape::Flat(3),
            42,
        )
        .unwrap();
        let record = export_weights(&net);
        for k in 0..300 {
            let x = vec![
                (k % 17) as f64 - 8.0,
                (k % 13) as f64 - 6.0,
                (k % 7) as f64 - 3.0,
            ];
            let forward = u8::from(net.forward(&x).unwrap()[0] >= 0.5);
            assert_eq!(heaviside_genus(&record, &x).unwrap(), forward);
        }
    }

    #[test]
    fn multi_logit_network_is_unsupported() {
        let net = Network::init(
            &[LayerSpec::dense(3, Activation::None)],
            Shape::Flat(2),
            0,
        )
        .unwrap();
        let record = export_weights(&net);
        assert!(heaviside_genus(&record, &[0.0, 0.0]).is_err());
    }
}
