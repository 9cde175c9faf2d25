#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rctgan::neural::{Graph, Mlp, MlpBuilder, Mode, SpanTarget, Tensor2, Var, LEAKY_SLOPE};
use rctgan::transform::{Activation, ActivationSpan};

pub mod fixtures;

pub const FD_STEP: f64 = 1e-5;

pub fn random_tensor(rows: usize, cols: usize, rng: &mut impl Rng) -> Tensor2 {
    Tensor2::from_shape_fn((rows, cols), |_| rng.random_range(-1.0..1.0))
}

/// Relative error with an absolute floor of `1e-6` on the denominator. Central
/// differences at `h = 1e-5` carry about `1e-11` of rounding noise, which would
/// otherwise dominate the ratio for gradients that are exactly zero (a bias
/// feeding batch-norm, for instance).
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

/// Worst relative error between the tape gradient of `loss` and central
/// finite differences, over up to `per_param` random entries of every
/// parameter tensor. `loss` must be deterministic in the network.
pub fn param_gradcheck<F>(net: &Mlp, per_param: usize, rng: &mut impl Rng, loss: F) -> f64
where
    F: Fn(&mut Mlp, &mut Graph) -> Var,
{
    let mut m = net.clone();
    let mut g = Graph::new();
    let l = loss(&mut m, &mut g);
    let grads = g.param_grads(&g.backward(l).expect("scalar loss"));
    let eval = |m: &Mlp| {
        let mut m = m.clone();
        let mut g = Graph::new();
        let l = loss(&mut m, &mut g);
        g.scalar(l)
    };
    let mut worst: f64 = 0.0;
    for (name, t) in net.params.iter() {
        let picks = per_param.min(t.len());
        for _ in 0..picks {
            let idx = (rng.random_range(0..t.nrows()), rng.random_range(0..t.ncols()));
            let mut plus = net.clone();
            plus.params.get_mut(name).unwrap()[idx] += FD_STEP;
            let mut minus = net.clone();
            minus.params.get_mut(name).unwrap()[idx] -= FD_STEP;
            let numeric = (eval(&plus) - eval(&minus)) / (2.0 * FD_STEP);
            let analytic = grads.get(name).map_or(0.0, |t| t[idx]);
            worst = worst.max(relative_error(analytic, numeric));
        }
    }
    worst
}

/// Spans for a random head of total width `width`: one tanh unit, then
/// softmax blocks.
pub fn random_spans(width: usize, rng: &mut impl Rng) -> Vec<ActivationSpan> {
    let mut spans = vec![ActivationSpan { offset: 0, width: 1, activation: Activation::Tanh }];
    let mut offset = 1;
    while offset < width {
        let w = rng.random_range(1..=3).min(width - offset);
        let activation = if w == 1 { Activation::Tanh } else { Activation::Softmax };
        spans.push(ActivationSpan { offset, width: w, activation });
        offset += w;
    }
    spans
}

/// A small generator-style network mixing every layer kind.
pub fn random_generator(seed: u64) -> (Mlp, Vec<ActivationSpan>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs = rng.random_range(2..5);
    let hidden = rng.random_range(2..5);
    let outputs = rng.random_range(3..7);
    let spans = random_spans(outputs, &mut rng);
    let mlp = MlpBuilder::new(inputs, &mut rng)
        .residual(hidden)
        .affine(hidden)
        .leaky_relu(LEAKY_SLOPE)
        .dropout(0.3)
        .affine(hidden)
        .tanh()
        .batch_norm()
        .relu()
        .affine(outputs)
        .span_head(spans.clone())
        .build();
    (mlp, spans)
}

/// A critic-style network of affine and leaky-relu layers with scalar output.
pub fn random_critic(seed: u64, inputs: usize) -> Mlp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hidden = rng.random_range(2..6);
    MlpBuilder::new(inputs, &mut rng)
        .affine(hidden)
        .leaky_relu(LEAKY_SLOPE)
        .affine(hidden)
        .leaky_relu(LEAKY_SLOPE)
        .affine(1)
        .build()
}

/// Finite-difference check of a generator-style network under a weighted-sum
/// plus span cross-entropy loss.
pub fn generator_case(seed: u64) -> f64 {
    let (net, spans) = random_generator(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let batch = 5;
    let x = random_tensor(batch, net.input_dim, &mut rng);
    let weights = random_tensor(batch, net.output_dim, &mut rng);
    let targets: Vec<Option<SpanTarget>> = (0..batch)
        .map(|_| {
            let s = spans.iter().find(|s| s.activation == Activation::Softmax)?;
            Some(SpanTarget { offset: s.offset, width: s.width, index: rng.random_range(0..s.width) })
        })
        .collect();
    let dropout_seed = rng.random();
    param_gradcheck(&net, 4, &mut rng, |m, g| {
        let xv = g.constant(x.clone());
        let mut drop_rng = ChaCha8Rng::seed_from_u64(dropout_seed);
        let f = m.forward(g, xv, Mode::Train, &mut drop_rng).unwrap();
        let weighted = g.mul_const(f.output, weights.clone()).unwrap();
        let s = g.sum(weighted);
        let ce = g.span_cross_entropy(f.logits, targets.clone()).unwrap();
        g.add(s, ce).unwrap()
    })
}

/// Gradient-penalty loss `mean((|grad_x C(x)| - 1)^2)` over pac groups.
pub fn penalty(critic: &Mlp, g: &mut Graph, x: &Tensor2, pac: usize) -> Var {
    let packed = x.clone().into_shape_with_order((x.nrows() / pac, x.ncols() * pac)).unwrap();
    let xv = g.constant(packed);
    let (_, grad) = critic.input_gradient(g, xv).unwrap();
    let norm = g.row_norm(grad);
    let shifted = g.add_scalar(norm, -1.0);
    let sq = g.square(shifted);
    g.mean(sq)
}

/// Finite-difference check of the parameter gradient of the penalty, which
/// needs a backward pass through the input gradient.
pub fn penalty_case(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc0ffee);
    let pac = rng.random_range(1..=3);
    let width = rng.random_range(1..4);
    let critic = random_critic(seed, width * pac);
    let x = random_tensor(pac * 4, width, &mut rng);
    param_gradcheck(&critic, 4, &mut rng, |m, g| penalty(m, g, &x, pac))
}

/// Finite-difference check of the generator objective path: generator
/// output joined with a constant condition, pac-packed by reshape, scored by
/// a critic. Both networks' parameters are checked.
pub fn packed_critic_case(seed: u64) -> f64 {
    let (gen, _) = random_generator(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xfeed);
    let pac = 2;
    let batch = 6;
    let cond_width = 2;
    let critic = MlpBuilder::new((gen.output_dim + cond_width) * pac, &mut rng)
        .prefix("critic")
        .affine(4)
        .leaky_relu(LEAKY_SLOPE)
        .affine(1)
        .build();
    let mut net = gen.clone();
    for (name, t) in critic.params.iter() {
        net.params.insert(name.clone(), t.clone());
    }
    let x = random_tensor(batch, gen.input_dim, &mut rng);
    let cond = random_tensor(batch, cond_width, &mut rng);
    let dropout_seed = rng.random();
    param_gradcheck(&net, 3, &mut rng, |m, g| {
        let mut c = Mlp { params: m.params.clone(), ..critic.clone() };
        let xv = g.constant(x.clone());
        let mut drop_rng = ChaCha8Rng::seed_from_u64(dropout_seed);
        let out = m.forward(g, xv, Mode::Train, &mut drop_rng).unwrap().output;
        let cv = g.constant(cond.clone());
        let joined = g.concat_cols(out, cv).unwrap();
        let w = g.value(joined).ncols();
        let packed = g.reshape(joined, batch / pac, w * pac).unwrap();
        let score = c.forward(g, packed, Mode::Train, &mut drop_rng).unwrap().output;
        g.mean(score)
    })
}
