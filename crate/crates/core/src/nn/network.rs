use std::fmt;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::activation::Activation;
use super::layer::{DenseLayer, LayerGradient};
use super::loss::LossKind;
use super::matrix::Matrix;
use super::rng::Rng;
use super::spec::{HeadKind, NetworkSpec};
use crate::error::{Error, Result};

/// Position of a layer inside a [`Network`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayerId {
    Trunk(usize),
    Head { head: usize, layer: usize },
}

impl fmt::Display for LayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LayerId::Trunk(i) => write!(f, "trunk layer {i}"),
            LayerId::Head { head, layer } => write!(f, "head {head} layer {layer}"),
        }
    }
}

pub enum Mode<'a> {
    Eval,
    /// Training mode draws inverted-dropout masks from the given generator.
    Train(&'a mut Rng),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNetwork")]
pub struct Network {
    spec: NetworkSpec,
    trunk: Vec<DenseLayer>,
    heads: Vec<Vec<DenseLayer>>,
}

#[derive(Deserialize)]
struct RawNetwork {
    spec: NetworkSpec,
    trunk: Vec<DenseLayer>,
    heads: Vec<Vec<DenseLayer>>,
}

impl TryFrom<RawNetwork> for Network {
    type Error = Error;

    fn try_from(raw: RawNetwork) -> Result<Self> {
        Network::from_parts(raw.spec, raw.trunk, raw.heads)
    }
}

struct LayerTrace {
    input: Matrix,
    pre: Matrix,
    activated: Matrix,
    /// Scaled keep-mask (`0` or `1/(1-p)`), present only when dropout fired.
    mask: Option<Matrix>,
    output: Matrix,
}

/// Everything backpropagation needs from one forward pass.
pub struct ForwardPass {
    trunk: Vec<LayerTrace>,
    heads: Vec<Vec<LayerTrace>>,
    batch: usize,
}

impl ForwardPass {
    pub fn outputs(&self) -> Vec<&Matrix> {
        self.heads
            .iter()
            .map(|layers| &layers.last().expect("heads are never empty").output)
            .collect()
    }

    pub fn output(&self, head: usize) -> &Matrix {
        &self.heads[head]
            .last()
            .expect("heads are never empty")
            .output
    }

    pub fn batch_size(&self) -> usize {
        self.batch
    }
}

/// Gradients laid out exactly like the network's parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub trunk: Vec<LayerGradient>,
    pub heads: Vec<Vec<LayerGradient>>,
}

impl Gradients {
    pub fn zeros_like(network: &Network) -> Self {
        Self {
            trunk: network
                .trunk
                .iter()
                .map(LayerGradient::zeros_like)
                .collect(),
            heads: network
                .heads
                .iter()
                .map(|h| h.iter().map(LayerGradient::zeros_like).collect())
                .collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (LayerId, &LayerGradient)> {
        let trunk = self
            .trunk
            .iter()
            .enumerate()
            .map(|(i, g)| (LayerId::Trunk(i), g));
        let heads = self.heads.iter().enumerate().flat_map(|(h, layers)| {
            layers
                .iter()
                .enumerate()
                .map(move |(i, g)| (LayerId::Head { head: h, layer: i }, g))
        });
        trunk.chain(heads)
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (LayerId, &mut LayerGradient)> {
        let trunk = self
            .trunk
            .iter_mut()
            .enumerate()
            .map(|(i, g)| (LayerId::Trunk(i), g));
        let heads = self.heads.iter_mut().enumerate().flat_map(|(h, layers)| {
            layers
                .iter_mut()
                .enumerate()
                .map(move |(i, g)| (LayerId::Head { head: h, layer: i }, g))
        });
        trunk.chain(heads)
    }
}

impl Network {
    /// Glorot-initialized network. Layers are drawn in order: trunk first,
    /// then each head in declaration order.
    pub fn new(spec: NetworkSpec, rng: &mut Rng) -> Result<Self> {
        spec.validate()?;
        let mut trunk = Vec::with_capacity(spec.hidden.len());
        let mut prev = spec.input_dim;
        for layer in &spec.hidden {
            trunk.push(DenseLayer::new(
                prev,
                layer.size,
                layer.activation,
                layer.dropout,
                rng,
            )?);
            prev = layer.size;
        }
        let trunk_out = prev;
        let mut heads = Vec::with_capacity(spec.heads.len());
        for head in &spec.heads {
            let mut layers = Vec::with_capacity(head.hidden.len() + 1);
            let mut prev = trunk_out;
            for layer in &head.hidden {
                layers.push(DenseLayer::new(
                    prev,
                    layer.size,
                    layer.activation,
                    layer.dropout,
                    rng,
                )?);
                prev = layer.size;
            }
            layers.push(DenseLayer::new(
                prev,
                head.out_dim,
                head.activation,
                0.0,
                rng,
            )?);
            heads.push(layers);
        }
        Ok(Self { spec, trunk, heads })
    }

    /// Reassembles a network from stored layers, checking every shape against `spec`.
    pub fn from_parts(
        spec: NetworkSpec,
        trunk: Vec<DenseLayer>,
        heads: Vec<Vec<DenseLayer>>,
    ) -> Result<Self> {
        spec.validate()?;
        if trunk.len() != spec.hidden.len() || heads.len() != spec.heads.len() {
            return Err(Error::Shape(
                "layer count does not match network spec".into(),
            ));
        }
        let mut prev = spec.input_dim;
        for (layer, ls) in trunk.iter().zip(&spec.hidden) {
            layer.check_consistent()?;
            if layer.input_dim() != prev || layer.output_dim() != ls.size {
                return Err(Error::Shape(format!(
                    "trunk layer {}x{} where spec expects {prev}x{}",
                    layer.input_dim(),
                    layer.output_dim(),
                    ls.size
                )));
            }
            prev = layer.output_dim();
        }
        let trunk_out = prev;
        for (h, (layers, hs)) in heads.iter().zip(&spec.heads).enumerate() {
            if layers.len() != hs.hidden.len() + 1 {
                return Err(Error::Shape(format!("head {h} layer count mismatch")));
            }
            let mut prev = trunk_out;
            let sizes = hs.hidden.iter().map(|l| l.size).chain([hs.out_dim]);
            for (layer, size) in layers.iter().zip(sizes) {
                layer.check_consistent()?;
                if layer.input_dim() != prev || layer.output_dim() != size {
                    return Err(Error::Shape(format!(
                        "head {h} layer {}x{} where spec expects {prev}x{size}",
                        layer.input_dim(),
                        layer.output_dim()
                    )));
                }
                prev = size;
            }
        }
        Ok(Self { spec, trunk, heads })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn input_dim(&self) -> usize {
        self.spec.input_dim
    }

    pub fn head_count(&self) -> usize {
        self.heads.len()
    }

    pub fn trunk(&self) -> &[DenseLayer] {
        &self.trunk
    }

    pub fn head_layers(&self, head: usize) -> &[DenseLayer] {
        &self.heads[head]
    }

    pub fn parameter_count(&self) -> usize {
        self.layers().map(|(_, l)| l.parameter_count()).sum()
    }

    pub fn layers(&self) -> impl Iterator<Item = (LayerId, &DenseLayer)> {
        let trunk = self
            .trunk
            .iter()
            .enumerate()
            .map(|(i, l)| (LayerId::Trunk(i), l));
        let heads = self.heads.iter().enumerate().flat_map(|(h, layers)| {
            layers
                .iter()
                .enumerate()
                .map(move |(i, l)| (LayerId::Head { head: h, layer: i }, l))
        });
        trunk.chain(heads)
    }

    pub fn layers_mut(&mut self) -> impl Iterator<Item = (LayerId, &mut DenseLayer)> {
        let trunk = self
            .trunk
            .iter_mut()
            .enumerate()
            .map(|(i, l)| (LayerId::Trunk(i), l));
        let heads = self.heads.iter_mut().enumerate().flat_map(|(h, layers)| {
            layers
                .iter_mut()
                .enumerate()
                .map(move |(i, l)| (LayerId::Head { head: h, layer: i }, l))
        });
        trunk.chain(heads)
    }

    pub fn layer_mut(&mut self, id: LayerId) -> &mut DenseLayer {
        match id {
            LayerId::Trunk(i) => &mut self.trunk[i],
            LayerId::Head { head, layer } => &mut self.heads[head][layer],
        }
    }

    pub fn forward(&self, input: &Matrix, mut mode: Mode<'_>) -> Result<ForwardPass> {
        if input.cols() != self.spec.input_dim {
            return Err(Error::Shape(format!(
                "input has {} features, network expects {}",
                input.cols(),
                self.spec.input_dim
            )));
        }
        let mut trunk = Vec::with_capacity(self.trunk.len());
        let mut current = input.clone();
        for layer in &self.trunk {
            let trace = layer_forward(layer, current, &mut mode)?;
            current = trace.output.clone();
            trunk.push(trace);
        }
        let mut heads = Vec::with_capacity(self.heads.len());
        for layers in &self.heads {
            let mut traces = Vec::with_capacity(layers.len());
            let mut h = current.clone();
            for layer in layers {
                let trace = layer_forward(layer, h, &mut mode)?;
                h = trace.output.clone();
                traces.push(trace);
            }
            heads.push(traces);
        }
        Ok(ForwardPass {
            trunk,
            heads,
            batch: input.rows(),
        })
    }

    /// Eval-mode outputs of every head.
    pub fn predict(&self, input: &Matrix) -> Result<Vec<Matrix>> {
        let pass = self.forward(input, Mode::Eval)?;
        Ok(pass
            .heads
            .into_iter()
            .map(|mut layers| layers.pop().expect("heads are never empty").output)
            .collect())
    }

    /// Eval-mode trunk output; for an autoencoder this is the latent code.
    pub fn encode(&self, input: &Matrix) -> Result<Matrix> {
        if input.cols() != self.spec.input_dim {
            return Err(Error::Shape(format!(
                "input has {} features, network expects {}",
                input.cols(),
                self.spec.input_dim
            )));
        }
        let mut current = input.clone();
        for layer in &self.trunk {
            let pre = layer.pre_activation(&current)?;
            current = pre.map(|x| layer.activation.apply(x));
        }
        Ok(current)
    }

    /// Weighted sum of per-head mean losses. Heads with zero weight are skipped.
    pub fn loss<M: std::borrow::Borrow<Matrix>>(
        &self,
        outputs: &[M],
        targets: &[Matrix],
    ) -> Result<f64> {
        self.check_targets(outputs.len(), targets)?;
        let mut total = 0.0;
        for (h, head) in self.spec.heads.iter().enumerate() {
            if head.loss_weight == 0.0 {
                continue;
            }
            let out = outputs[h].borrow();
            if out.shape() != targets[h].shape() {
                return Err(Error::Shape(format!(
                    "head {h} output {:?} vs target {:?}",
                    out.shape(),
                    targets[h].shape()
                )));
            }
            total += head.loss_weight * mean_loss(head.loss, out, &targets[h]);
        }
        Ok(total)
    }

    fn check_targets(&self, outputs: usize, targets: &[Matrix]) -> Result<()> {
        if outputs != self.heads.len() || targets.len() != self.heads.len() {
            return Err(Error::Shape(format!(
                "{} heads, {} outputs, {} targets",
                self.heads.len(),
                outputs,
                targets.len()
            )));
        }
        Ok(())
    }

    /// Exact gradients of [`Network::loss`] at the state captured by `pass`.
    pub fn backward(&self, pass: &ForwardPass, targets: &[Matrix]) -> Result<Gradients> {
        if pass.trunk.len() != self.trunk.len() || pass.heads.len() != self.heads.len() {
            return Err(Error::Shape(
                "forward pass was produced by a different network".into(),
            ));
        }
        self.check_targets(pass.heads.len(), targets)?;
        let mut grads = Gradients::zeros_like(self);
        let mut trunk_grad = Matrix::zeros(pass.batch, self.spec.trunk_output_dim());

        for (h, head) in self.spec.heads.iter().enumerate() {
            if head.loss_weight == 0.0 {
                continue;
            }
            let traces = &pass.heads[h];
            let layers = &self.heads[h];
            let last = traces.last().expect("heads are never empty");
            if last.output.shape() != targets[h].shape() {
                return Err(Error::Shape(format!(
                    "head {h} output {:?} vs target {:?}",
                    last.output.shape(),
                    targets[h].shape()
                )));
            }
            let n = (last.output.rows() * last.output.cols()) as f64;
            let scale = head.loss_weight / n;
            let fused =
                head.loss == LossKind::BinaryCrossEntropy && head.activation == Activation::Sigmoid;
            let mut d_pre = Matrix::zeros(last.output.rows(), last.output.cols());
            for (i, d) in d_pre.data_mut().iter_mut().enumerate() {
                let p = last.activated.data()[i];
                let t = targets[h].data()[i];
                *d = if fused {
                    (p - t) * scale
                } else {
                    head.loss.pointwise_grad(p, t)
                        * head.activation.derivative(last.pre.data()[i], p)
                        * scale
                };
            }
            let mut upstream = None;
            for (i, (layer, trace)) in layers.iter().zip(traces).enumerate().rev() {
                let d_pre = match upstream.take() {
                    None => std::mem::replace(&mut d_pre, Matrix::zeros(0, 0)),
                    Some(d_out) => pre_activation_grad(layer, trace, d_out)?,
                };
                grads.heads[h][i] = param_grad(trace, &d_pre)?;
                upstream = Some(d_pre.matmul_transpose(&layer.weights)?);
            }
            trunk_grad.add_assign(&upstream.expect("heads are never empty"))?;
        }

        let mut upstream = trunk_grad;
        for (i, (layer, trace)) in self.trunk.iter().zip(&pass.trunk).enumerate().rev() {
            let d_pre = pre_activation_grad(layer, trace, upstream)?;
            grads.trunk[i] = param_grad(trace, &d_pre)?;
            upstream = if i > 0 {
                d_pre.matmul_transpose(&layer.weights)?
            } else {
                Matrix::zeros(0, 0)
            };
        }
        Ok(grads)
    }

    /// Forward in training mode, then backward. Returns the batch loss too.
    pub fn loss_and_gradients(
        &self,
        input: &Matrix,
        targets: &[Matrix],
        mode: Mode<'_>,
    ) -> Result<(f64, Gradients)> {
        let pass = self.forward(input, mode)?;
        let loss = self.loss(&pass.outputs(), targets)?;
        let grads = self.backward(&pass, targets)?;
        Ok((loss, grads))
    }

    pub fn head_kind(&self, head: usize) -> HeadKind {
        self.spec.heads[head].kind
    }
}

fn mean_loss(kind: LossKind, out: &Matrix, target: &Matrix) -> f64 {
    let n = out.data().len();
    if n == 0 {
        return 0.0;
    }
    let sum: f64 = out
        .data()
        .iter()
        .zip(target.data())
        .map(|(&p, &t)| kind.pointwise(p, t))
        .sum();
    sum / n as f64
}

fn layer_forward(layer: &DenseLayer, input: Matrix, mode: &mut Mode<'_>) -> Result<LayerTrace> {
    let pre = layer.pre_activation(&input)?;
    let activated = pre.map(|x| layer.activation.apply(x));
    let (mask, output) = match mode {
        Mode::Train(rng) if layer.dropout > 0.0 => {
            let keep_scale = 1.0 / (1.0 - layer.dropout);
            let mut mask = Matrix::zeros(activated.rows(), activated.cols());
            for m in mask.data_mut() {
                *m = if rng.gen::<f64>() < layer.dropout {
                    0.0
                } else {
                    keep_scale
                };
            }
            let mut output = activated.clone();
            output.hadamard_assign(&mask)?;
            (Some(mask), output)
        }
        _ => (None, activated.clone()),
    };
    Ok(LayerTrace {
        input,
        pre,
        activated,
        mask,
        output,
    })
}

fn pre_activation_grad(
    layer: &DenseLayer,
    trace: &LayerTrace,
    mut d_out: Matrix,
) -> Result<Matrix> {
    if let Some(mask) = &trace.mask {
        d_out.hadamard_assign(mask)?;
    }
    for (i, d) in d_out.data_mut().iter_mut().enumerate() {
        *d *= layer
            .activation
            .derivative(trace.pre.data()[i], trace.activated.data()[i]);
    }
    Ok(d_out)
}

fn param_grad(trace: &LayerTrace, d_pre: &Matrix) -> Result<LayerGradient> {
    Ok(LayerGradient {
        weights: trace.input.transpose_matmul(d_pre)?,
        bias: d_pre.column_sums(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::rng::seeded;
    use crate::nn::spec::{HeadSpec, LayerSpec};

    fn single_layer(weights: Matrix, bias: Vec<f64>, activation: Activation) -> Network {
        let out = weights.cols();
        let spec = NetworkSpec {
            input_dim: weights.rows(),
            hidden: vec![],
            heads: vec![HeadSpec {
                activation,
                ..HeadSpec::regression(out)
            }],
        };
        let layer = DenseLayer {
            weights,
            bias,
            activation,
            dropout: 0.0,
        };
        Network::from_parts(spec, vec![], vec![vec![layer]]).unwrap()
    }

    #[test]
    fn identity_network_passes_input_through() {
        let net = single_layer(Matrix::identity(2), vec![0.0, 0.0], Activation::Linear);
        let x = Matrix::from_rows(&[[0.3, -1.7]]).unwrap();
        assert_eq!(net.predict(&x).unwrap()[0], x);
    }

    #[test]
    fn zero_weights_output_bias() {
        let net = single_layer(Matrix::zeros(3, 2), vec![1.5, -2.0], Activation::Linear);
        let x = Matrix::from_rows(&[[4.0, 5.0, 6.0]]).unwrap();
        assert_eq!(net.predict(&x).unwrap()[0].row(0), &[1.5, -2.0]);
    }

    #[test]
    fn hand_computed_two_by_two() {
        // z0 = 1·1 + 3·(−1) + 0.5 = −1.5, z1 = 2·1 + 4·(−1) − 0.5 = −2.5
        let w = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let relu_net = single_layer(w.clone(), vec![0.5, -0.5], Activation::Relu);
        let lin_net = single_layer(w, vec![0.5, -0.5], Activation::Linear);
        let x = Matrix::from_rows(&[[1.0, -1.0]]).unwrap();
        assert_eq!(relu_net.predict(&x).unwrap()[0].row(0), &[0.0, 0.0]);
        assert_eq!(lin_net.predict(&x).unwrap()[0].row(0), &[-1.5, -2.5]);
    }

    #[test]
    fn input_width_is_checked() {
        let net = single_layer(Matrix::identity(2), vec![0.0; 2], Activation::Linear);
        assert!(net.predict(&Matrix::zeros(1, 3)).is_err());
    }

    #[test]
    fn zero_loss_gives_zero_gradients() {
        let spec = NetworkSpec {
            input_dim: 3,
            hidden: vec![LayerSpec::new(4, Activation::Relu)],
            heads: vec![HeadSpec {
                activation: Activation::Linear,
                ..HeadSpec::regression(1)
            }],
        };
        let net = Network::new(spec, &mut seeded(5)).unwrap();
        let x = Matrix::from_rows(&[[0.1, 0.2, 0.3], [0.9, 0.4, 0.2]]).unwrap();
        let target = net.predict(&x).unwrap().remove(0);
        let (loss, grads) = net.loss_and_gradients(&x, &[target], Mode::Eval).unwrap();
        assert_eq!(loss, 0.0);
        for (_, g) in grads.iter() {
            assert!(g.weights.data().iter().all(|&v| v == 0.0));
            assert!(g.bias.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn eval_forward_is_deterministic() {
        let spec = NetworkSpec {
            input_dim: 3,
            hidden: vec![LayerSpec::new(8, Activation::Relu).with_dropout(0.5)],
            heads: vec![HeadSpec::classification(1)],
        };
        let net = Network::new(spec, &mut seeded(1)).unwrap();
        let x = Matrix::from_rows(&[[0.1, 0.7, 0.3]]).unwrap();
        let a = net.predict(&x).unwrap();
        let b = net.predict(&x).unwrap();
        assert_eq!(a[0].data()[0].to_bits(), b[0].data()[0].to_bits());
    }

    #[test]
    fn dropped_units_block_gradient() {
        let spec = NetworkSpec {
            input_dim: 2,
            hidden: vec![LayerSpec::new(64, Activation::Linear).with_dropout(0.5)],
            heads: vec![HeadSpec {
                activation: Activation::Linear,
                ..HeadSpec::regression(1)
            }],
        };
        let net = Network::new(spec, &mut seeded(2)).unwrap();
        let x = Matrix::from_rows(&[[1.0, 1.0]]).unwrap();
        let target = Matrix::from_rows(&[[10.0]]).unwrap();
        let mut rng = seeded(3);
        let pass = net.forward(&x, Mode::Train(&mut rng)).unwrap();
        let grads = net.backward(&pass, &[target]).unwrap();
        let mask = pass.trunk[0].mask.as_ref().unwrap();
        for (j, &m) in mask.row(0).iter().enumerate() {
            if m == 0.0 {
                assert_eq!(grads.trunk[0].bias[j], 0.0);
            }
        }
        assert!(mask.data().contains(&0.0));
        assert!(mask.data().contains(&2.0));
    }
}
