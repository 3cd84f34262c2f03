//! Architecture presets mirroring the experiments: wide coefficient
//! MLPs, the minimal interpretable nets, and the image/coefficient CNN
//! stacks.

use super::net::{Activation, LayerSpec, Padding, Shape};

/// Output head: one sigmoid unit for binary problems, `classes` linear
/// logits otherwise.
pub fn head(classes: usize) -> LayerSpec {
    if classes <= 2 {
        LayerSpec::dense(1, Activation::Sigmoid)
    } else {
        LayerSpec::dense(classes, Activation::None)
    }
}

/// The default coefficient classifier: one hidden ReLU layer of 100
/// units.
pub fn coeff_mlp(classes: usize) -> Vec<LayerSpec> {
    vec![LayerSpec::dense(100, Activation::Relu), head(classes)]
}

/// Generic single-hidden-layer MLP.
pub fn mlp(hidden: usize, classes: usize) -> Vec<LayerSpec> {
    vec![LayerSpec::dense(hidden, Activation::Relu), head(classes)]
}

/// The minimal 2-4-1 net that can represent `|x| - 2|y|` exactly.
pub fn minimal_f0() -> Vec<LayerSpec> {
    vec![
        LayerSpec::dense(4, Activation::Relu),
        LayerSpec::dense(1, Activation::Sigmoid),
    ]
}

/// The 5-20-1 net used for true-amoeba (torus-labeled) genus data.
pub fn f0_infinity_mlp() -> Vec<LayerSpec> {
    mlp(20, 2)
}

/// The 7-8-1 membership net over `(c1..c5, x1, x2)` inputs.
pub fn membership_mlp() -> Vec<LayerSpec> {
    mlp(8, 2)
}

/// Image classifier: three 3x3 'same' convolutions with leaky
/// activations, each followed by pooling and light dropout, then a dense
/// layer as wide as the image side and a sigmoid head.
pub fn image_cnn(side: usize) -> Vec<LayerSpec> {
    let leak = Activation::LeakyRelu(0.01);
    vec![
        LayerSpec::conv2d(8, (3, 3), Padding::Same, leak),
        LayerSpec::maxpool2d((2, 2)),
        LayerSpec::dropout(0.01),
        LayerSpec::conv2d(8, (3, 3), Padding::Same, leak),
        LayerSpec::maxpool2d((2, 2)),
        LayerSpec::dropout(0.01),
        LayerSpec::conv2d(8, (3, 3), Padding::Same, leak),
        LayerSpec::maxpool2d((2, 2)),
        LayerSpec::dropout(0.01),
        LayerSpec::flatten(),
        LayerSpec::dense(side, leak),
        LayerSpec::dense(1, Activation::Sigmoid),
    ]
}

/// Spatial input shape for a square grayscale image.
pub fn image_shape(side: usize) -> Shape {
    Shape::Spatial {
        channels: 1,
        height: side,
        width: side,
    }
}

/// Coefficient-vector CNN: four 1-D convolutions (width-3 kernels on a
/// `1 x n` image) with leaky slope 0.1 and halving pools.
pub fn coeff_cnn(classes: usize) -> Vec<LayerSpec> {
    let leak = Activation::LeakyRelu(0.1);
    let mut specs = Vec::new();
    for _ in 0..4 {
        specs.push(LayerSpec::conv2d(16, (1, 3), Padding::Same, leak));
        specs.push(LayerSpec::maxpool2d((1, 2)));
    }
    specs.push(LayerSpec::flatten());
    specs.push(head(classes));
    specs
}

/// Spatial input shape treating a coefficient vector as a `1 x n` image.
pub fn coeff_cnn_shape(len: usize) -> Shape {
    Shape::Spatial {
        channels: 1,
        height: 1,
        width: len,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ml::net::Network;

    #[test]
    fn presets_build_and_chain() {
        Network::init(&coeff_mlp(2), Shape::Flat(5), 0).unwrap();
        Network::init(&coeff_mlp(3), Shape::Flat(6), 0).unwrap();
        Network::init(&minimal_f0(), Shape::Flat(2), 0).unwrap();
        Network::init(&membership_mlp(), Shape::Flat(7), 0).unwrap();
        for side in [2usize, 8, 32] {
            let net = Network::init(&image_cnn(side), image_shape(side), 0).unwrap();
            assert_eq!(net.output_len(), 1);
        }
        let net = Network::init(&coeff_cnn(4), coeff_cnn_shape(15), 0).unwrap();
        assert_eq!(net.output_len(), 4);
        let net = Network::init(&coeff_cnn(5), coeff_cnn_shape(11), 0).unwrap();
        assert_eq!(net.output_len(), 5);
    }
}
