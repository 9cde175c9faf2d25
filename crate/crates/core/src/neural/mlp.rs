//! Layer stacks evaluated on a [`Graph`].

use ndarray::Array1;
use rand::Rng;
use rand_distr::{Bernoulli, Distribution, Uniform};
use serde::{Deserialize, Serialize};

use super::{Graph, NeuralError, ParamStore, Tensor2, Var};
use crate::transform::ActivationSpan;

pub const LEAKY_SLOPE: f64 = 0.2;
const BN_MOMENTUM: f64 = 0.1;
const BN_EPS: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Batch statistics for batch-norm, dropout active.
    Train,
    /// Running statistics for batch-norm, dropout off.
    Eval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Layer {
    /// `x W + b` with `W` stored as `inputs x outputs`.
    Affine { weight: String, bias: String },
    LeakyRelu { slope: f64 },
    Relu,
    Tanh,
    BatchNorm { gamma: String, beta: String, running_mean: Vec<f64>, running_var: Vec<f64> },
    Dropout { p: f64 },
    /// `concat(inner(x), x)`.
    Residual { layers: Vec<Layer> },
    /// Tanh or softmax per span of the output row.
    SpanHead { spans: Vec<ActivationSpan> },
}

impl Layer {
    pub fn kind(&self) -> &'static str {
        match self {
            Layer::Affine { .. } => "affine",
            Layer::LeakyRelu { .. } => "leaky_relu",
            Layer::Relu => "relu",
            Layer::Tanh => "tanh",
            Layer::BatchNorm { .. } => "batch_norm",
            Layer::Dropout { .. } => "dropout",
            Layer::Residual { .. } => "residual",
            Layer::SpanHead { .. } => "span_head",
        }
    }
}

/// Result of a recorded forward pass.
#[derive(Debug, Clone, Copy)]
pub struct Forward {
    pub output: Var,
    /// Input of the final span head, or the output when there is none.
    pub logits: Var,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub input_dim: usize,
    pub output_dim: usize,
    pub layers: Vec<Layer>,
    pub params: ParamStore,
}

struct BatchStats {
    gamma: String,
    mean: Array1<f64>,
    var: Array1<f64>,
    n: usize,
}

enum Back {
    Affine(Var),
    Mask(Tensor2),
}

impl Mlp {
    /// Records the network on `graph` and returns its output. In
    /// [`Mode::Train`] batch-norm running statistics are updated.
    pub fn forward<R: Rng + ?Sized>(
        &mut self,
        graph: &mut Graph,
        x: Var,
        mode: Mode,
        rng: &mut R,
    ) -> Result<Forward, NeuralError> {
        let mut stats = Vec::new();
        let out = self.apply(graph, x, mode, rng, &mut stats)?;
        for s in stats {
            update_running(&mut self.layers, &s);
        }
        Ok(out)
    }

    /// Evaluation-mode output as a plain tensor.
    pub fn predict(&self, x: &Tensor2) -> Result<Tensor2, NeuralError> {
        let mut graph = Graph::new();
        let xv = graph.constant(x.clone());
        let mut stats = Vec::new();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
        let out = self.apply(&mut graph, xv, Mode::Eval, &mut rng, &mut stats)?;
        Ok(graph.value(out.output).clone())
    }

    fn apply<R: Rng + ?Sized>(
        &self,
        graph: &mut Graph,
        x: Var,
        mode: Mode,
        rng: &mut R,
        stats: &mut Vec<BatchStats>,
    ) -> Result<Forward, NeuralError> {
        let cols = graph.value(x).ncols();
        if cols != self.input_dim {
            return Err(NeuralError::DimensionMismatch { context: "mlp input".into(), expected: self.input_dim, found: cols });
        }
        self.apply_layers(&self.layers, graph, x, mode, rng, stats)
    }

    fn apply_layers<R: Rng + ?Sized>(
        &self,
        layers: &[Layer],
        graph: &mut Graph,
        x: Var,
        mode: Mode,
        rng: &mut R,
        stats: &mut Vec<BatchStats>,
    ) -> Result<Forward, NeuralError> {
        let mut h = x;
        let mut logits = x;
        for layer in layers {
            logits = h;
            h = match layer {
                Layer::Affine { weight, bias } => {
                    let w = graph.param(&self.params, weight)?;
                    let b = graph.param(&self.params, bias)?;
                    let xw = graph.matmul(h, w)?;
                    graph.add_row(xw, b)?
                }
                Layer::LeakyRelu { slope } => graph.leaky_relu(h, *slope),
                Layer::Relu => graph.relu(h),
                Layer::Tanh => graph.tanh(h),
                Layer::BatchNorm { gamma, beta, running_mean, running_var } => {
                    let g = graph.param(&self.params, gamma)?;
                    let b = graph.param(&self.params, beta)?;
                    match mode {
                        Mode::Train => {
                            let n = graph.value(h).nrows();
                            let (out, mean, var) = graph.batch_norm(h, g, b, BN_EPS, None)?;
                            stats.push(BatchStats { gamma: gamma.clone(), mean, var, n });
                            out
                        }
                        Mode::Eval => graph.batch_norm(h, g, b, BN_EPS, Some((running_mean, running_var)))?.0,
                    }
                }
                Layer::Dropout { p } => match mode {
                    Mode::Eval => h,
                    Mode::Train if *p <= 0.0 => h,
                    Mode::Train => {
                        let keep = Bernoulli::new(1.0 - p).expect("dropout probability in [0, 1)");
                        let scale = 1.0 / (1.0 - p);
                        let mask = graph.value(h).mapv(|_| if keep.sample(rng) { scale } else { 0.0 });
                        graph.mul_const(h, mask)?
                    }
                },
                Layer::Residual { layers } => {
                    let inner = self.apply_layers(layers, graph, h, mode, rng, stats)?.output;
                    graph.concat_cols(inner, h)?
                }
                Layer::SpanHead { spans } => graph.span_head(h, spans)?,
            };
        }
        if !matches!(layers.last(), Some(Layer::SpanHead { .. })) {
            logits = h;
        }
        Ok(Forward { output: h, logits })
    }

    /// Records the network output together with the gradient of the summed
    /// output with respect to `x`, built from tape operations so that a
    /// second backward pass can differentiate it with respect to the
    /// parameters. Only affine, leaky-relu and relu layers are allowed; their
    /// second derivatives vanish almost everywhere, so the assembled gradient
    /// is exact.
    pub fn input_gradient(&self, graph: &mut Graph, x: Var) -> Result<(Var, Var), NeuralError> {
        let cols = graph.value(x).ncols();
        if cols != self.input_dim {
            return Err(NeuralError::DimensionMismatch { context: "mlp input".into(), expected: self.input_dim, found: cols });
        }
        let mut h = x;
        let mut trace = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            h = match layer {
                Layer::Affine { weight, bias } => {
                    let w = graph.param(&self.params, weight)?;
                    let b = graph.param(&self.params, bias)?;
                    trace.push(Back::Affine(w));
                    let xw = graph.matmul(h, w)?;
                    graph.add_row(xw, b)?
                }
                Layer::LeakyRelu { slope } => {
                    trace.push(Back::Mask(graph.value(h).mapv(|v| if v > 0.0 { 1.0 } else { *slope })));
                    graph.leaky_relu(h, *slope)
                }
                Layer::Relu => {
                    trace.push(Back::Mask(graph.value(h).mapv(|v| if v > 0.0 { 1.0 } else { 0.0 })));
                    graph.relu(h)
                }
                other => return Err(NeuralError::UnsupportedLayer(other.kind().to_string())),
            };
        }
        let mut grad = graph.constant(Tensor2::ones(graph.value(h).dim()));
        for step in trace.into_iter().rev() {
            grad = match step {
                Back::Affine(w) => graph.matmul_bt(grad, w)?,
                Back::Mask(m) => graph.mul_const(grad, m)?,
            };
        }
        Ok((h, grad))
    }
}

fn update_running(layers: &mut [Layer], s: &BatchStats) -> bool {
    for layer in layers {
        match layer {
            Layer::BatchNorm { gamma, running_mean, running_var, .. } if *gamma == s.gamma => {
                // Running variance tracks the unbiased estimate.
                let unbias = if s.n > 1 { s.n as f64 / (s.n - 1) as f64 } else { 1.0 };
                for (r, m) in running_mean.iter_mut().zip(s.mean.iter()) {
                    *r = (1.0 - BN_MOMENTUM) * *r + BN_MOMENTUM * m;
                }
                for (r, v) in running_var.iter_mut().zip(s.var.iter()) {
                    *r = (1.0 - BN_MOMENTUM) * *r + BN_MOMENTUM * v * unbias;
                }
                return true;
            }
            Layer::Residual { layers } => {
                if update_running(layers, s) {
                    return true;
                }
            }
            _ => {}
        }
    }
    false
}

/// Builds an [`Mlp`] layer by layer, tracking the running width.
/// Affine weights get Kaiming-uniform initialisation with bound
/// `1 / sqrt(fan_in)`; biases use the same bound.
pub struct MlpBuilder<'a, R: Rng + ?Sized> {
    input_dim: usize,
    width: usize,
    layers: Vec<Layer>,
    params: ParamStore,
    rng: &'a mut R,
    counter: usize,
    prefix: String,
}

impl<'a, R: Rng + ?Sized> MlpBuilder<'a, R> {
    pub fn new(input_dim: usize, rng: &'a mut R) -> Self {
        Self {
            input_dim,
            width: input_dim,
            layers: Vec::new(),
            params: ParamStore::new(),
            rng,
            counter: 0,
            prefix: String::new(),
        }
    }

    /// Prefixes parameter names, so that two networks recorded on one graph
    /// keep separate gradients.
    pub fn prefix(mut self, prefix: &str) -> Self {
        self.prefix = format!("{prefix}.");
        self
    }

    /// Names for the next layer's two tensors.
    fn next_names(&mut self, a: &str, b: &str) -> (String, String) {
        self.counter += 1;
        (format!("{}{}.{a}", self.prefix, self.counter), format!("{}{}.{b}", self.prefix, self.counter))
    }

    fn affine_layer(&mut self, outputs: usize) -> Layer {
        let fan_in = self.width.max(1);
        let bound = 1.0 / (fan_in as f64).sqrt();
        let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
        let w = Tensor2::from_shape_fn((self.width, outputs), |_| dist.sample(self.rng));
        let b = Tensor2::from_shape_fn((1, outputs), |_| dist.sample(self.rng));
        let (weight, bias) = self.next_names("weight", "bias");
        self.params.insert(weight.clone(), w);
        self.params.insert(bias.clone(), b);
        self.width = outputs;
        Layer::Affine { weight, bias }
    }

    fn batch_norm_layer(&mut self) -> Layer {
        let (gamma, beta) = self.next_names("gamma", "beta");
        self.params.insert(gamma.clone(), Tensor2::ones((1, self.width)));
        self.params.insert(beta.clone(), Tensor2::zeros((1, self.width)));
        Layer::BatchNorm { gamma, beta, running_mean: vec![0.0; self.width], running_var: vec![1.0; self.width] }
    }

    pub fn affine(mut self, outputs: usize) -> Self {
        let l = self.affine_layer(outputs);
        self.layers.push(l);
        self
    }

    pub fn leaky_relu(mut self, slope: f64) -> Self {
        self.layers.push(Layer::LeakyRelu { slope });
        self
    }

    pub fn relu(mut self) -> Self {
        self.layers.push(Layer::Relu);
        self
    }

    pub fn tanh(mut self) -> Self {
        self.layers.push(Layer::Tanh);
        self
    }

    pub fn batch_norm(mut self) -> Self {
        let l = self.batch_norm_layer();
        self.layers.push(l);
        self
    }

    pub fn dropout(mut self, p: f64) -> Self {
        self.layers.push(Layer::Dropout { p });
        self
    }

    /// `concat(relu(bn(fc(x))), x)`; widens the running width by `outputs`.
    pub fn residual(mut self, outputs: usize) -> Self {
        let inputs = self.width;
        let fc = self.affine_layer(outputs);
        let bn = self.batch_norm_layer();
        self.layers.push(Layer::Residual { layers: vec![fc, bn, Layer::Relu] });
        self.width = outputs + inputs;
        self
    }

    pub fn span_head(mut self, spans: Vec<ActivationSpan>) -> Self {
        self.layers.push(Layer::SpanHead { spans });
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn build(self) -> Mlp {
        Mlp { input_dim: self.input_dim, output_dim: self.width, layers: self.layers, params: self.params }
    }
}
