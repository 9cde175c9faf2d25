//! Row-conditional tabular GAN for a single table.
//!
//! The generator maps noise, the encoded feature rows of the table's
//! ancestors (the condition vector `c`) and a discrete-category indicator `v`
//! to an encoded row. The critic scores `(row, c, v)` triples in groups of
//! `pac` and is trained as a Wasserstein critic with a gradient penalty.
//! Root tables have `c` of width zero and reduce to an unconditional model.

mod config;

use ndarray::{concatenate, s, Axis};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{weighted::WeightedIndex, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Table;
use crate::neural::{Adam, AdamConfig, Graph, Mlp, MlpBuilder, Mode, NeuralError, SpanTarget, Tensor2, Var, LEAKY_SLOPE};
use crate::transform::{argmax, ConditionLayout, TableTransformer, TransformError};

pub use config::TrainConfig;

/// Upper bound on stored (condition, category) reference pairs.
const MAX_REFERENCES: usize = 2000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GanError {
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("table `{0}` has no rows to train on")]
    EmptyTable(String),
    #[error(
        "table `{table}`: non-finite loss at epoch {epoch}, step {step} \
         (critic {critic_loss}, generator {gen_loss}, penalty {penalty})"
    )]
    NonFiniteLoss { table: String, epoch: usize, step: usize, critic_loss: f64, gen_loss: f64, penalty: f64 },
    #[error("expected width {expected}, found {found}")]
    WidthMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// Losses averaged over the steps of one epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Critic objective including the weighted penalty.
    pub critic_loss: f64,
    pub gen_loss: f64,
    /// Unweighted gradient penalty.
    pub penalty: f64,
}

/// A discrete column as seen by training-by-sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteCondition {
    pub column: String,
    /// Offset of the column's one-hot block in the encoded row.
    pub row_offset: usize,
    /// Offset of the column's block in `v`.
    pub cond_offset: usize,
    pub width: usize,
    /// Empirical category frequencies, used when sampling without ancestors.
    pub frequencies: Vec<f64>,
    /// `log(1 + count)` normalised, used during training.
    pub log_frequencies: Vec<f64>,
}

/// A training row's condition vector and its category in every discrete column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub condition: Vec<f64>,
    pub categories: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableGanModel {
    pub table: String,
    pub transformer: TableTransformer,
    pub condition: ConditionLayout,
    pub generator: Mlp,
    pub critic: Mlp,
    pub discrete: Vec<DiscreteCondition>,
    /// Sample of training pairs used to choose `v` consistently with the
    /// ancestors at sampling time. Empty for unconditioned tables.
    pub references: Vec<Reference>,
    pub config: TrainConfig,
    pub seed: u64,
    pub history: Vec<EpochStats>,
}

/// Encoded rows of one table and the aligned condition vectors.
#[derive(Debug, Clone)]
pub struct TrainingData {
    pub rows: Tensor2,
    /// `rows.nrows() x c`; zero columns for root tables.
    pub conditions: Tensor2,
}

/// Packs consecutive groups of `pac` rows into single rows.
pub fn pack(x: &Tensor2, pac: usize) -> Result<Tensor2, NeuralError> {
    if pac == 0 || x.nrows() % pac != 0 {
        return Err(NeuralError::DimensionMismatch { context: "pac grouping".into(), expected: pac, found: x.nrows() });
    }
    Ok(x.as_standard_layout().into_owned().into_shape_with_order((x.nrows() / pac, x.ncols() * pac)).expect("size checked"))
}

fn join(parts: &[&Tensor2]) -> Tensor2 {
    let views: Vec<_> = parts.iter().map(|p| p.view()).collect();
    concatenate(Axis(1), &views).expect("equal row counts")
}

/// `E[C(fake)] - E[C(real)]`, with `conditions` appended to both batches
/// before pac grouping.
pub fn critic_loss<R: Rng + ?Sized>(
    critic: &mut Mlp,
    graph: &mut Graph,
    real: &Tensor2,
    fake: &Tensor2,
    conditions: &Tensor2,
    pac: usize,
    rng: &mut R,
) -> Result<Var, GanError> {
    if real.dim() != fake.dim() {
        return Err(GanError::WidthMismatch { expected: real.nrows(), found: fake.nrows() });
    }
    let r = graph.constant(pack(&join(&[real, conditions]), pac)?);
    let f = graph.constant(pack(&join(&[fake, conditions]), pac)?);
    let cr = critic.forward(graph, r, Mode::Train, rng)?.output;
    let cf = critic.forward(graph, f, Mode::Train, rng)?.output;
    let mr = graph.mean(cr);
    let mf = graph.mean(cf);
    Ok(graph.sub(mf, mr)?)
}

/// `mean((|grad C(x_hat)| - 1)^2)` over pac groups, where
/// `x_hat = e x_real + (1 - e) x_fake` with one `e ~ U(0, 1)` per group and
/// the gradient is taken over the whole packed `(row, condition)` input.
pub fn gradient_penalty<R: Rng + ?Sized>(
    critic: &Mlp,
    graph: &mut Graph,
    real: &Tensor2,
    fake: &Tensor2,
    conditions: &Tensor2,
    pac: usize,
    rng: &mut R,
) -> Result<Var, GanError> {
    if real.dim() != fake.dim() {
        return Err(GanError::WidthMismatch { expected: real.nrows(), found: fake.nrows() });
    }
    let real = pack(&join(&[real, conditions]), pac)?;
    let fake = pack(&join(&[fake, conditions]), pac)?;
    let mut mix = fake;
    for (mut m, r) in mix.rows_mut().into_iter().zip(real.rows()) {
        let e: f64 = rng.random();
        m.zip_mut_with(&r, |f, &r| *f = e * r + (1.0 - e) * *f);
    }
    let x = graph.constant(mix);
    let (_, grad) = critic.input_gradient(graph, x)?;
    let norm = graph.row_norm(grad);
    let shifted = graph.add_scalar(norm, -1.0);
    let sq = graph.square(shifted);
    Ok(graph.mean(sq))
}

struct Batch {
    rows: Vec<usize>,
    v: Tensor2,
    targets: Vec<Option<SpanTarget>>,
}

struct Sampler {
    discrete: Vec<DiscreteCondition>,
    /// Row indices per column per category.
    by_category: Vec<Vec<Vec<usize>>>,
    pickers: Vec<WeightedIndex<f64>>,
    v_width: usize,
    n: usize,
}

impl Sampler {
    fn new(discrete: Vec<DiscreteCondition>, rows: &Tensor2) -> Self {
        let by_category = discrete
            .iter()
            .map(|d| {
                let mut lists = vec![Vec::new(); d.width];
                for (r, row) in rows.rows().into_iter().enumerate() {
                    let span = row.slice(s![d.row_offset..d.row_offset + d.width]).to_vec();
                    lists[argmax(&span)].push(r);
                }
                lists
            })
            .collect();
        let pickers = discrete.iter().map(|d| WeightedIndex::new(&d.log_frequencies).expect("some category observed")).collect();
        let v_width = discrete.iter().map(|d| d.width).sum();
        Self { discrete, by_category, pickers, v_width, n: rows.nrows() }
    }

    /// Per row: a discrete column uniformly, a category by log-frequency, and
    /// a real row holding that category (drawn with replacement).
    fn sample(&self, size: usize, rng: &mut impl Rng) -> Batch {
        let mut v = Tensor2::zeros((size, self.v_width));
        let mut rows = Vec::with_capacity(size);
        let mut targets = Vec::with_capacity(size);
        for i in 0..size {
            if self.discrete.is_empty() {
                rows.push(rng.random_range(0..self.n));
                targets.push(None);
                continue;
            }
            let j = rng.random_range(0..self.discrete.len());
            let d = &self.discrete[j];
            let k = self.pickers[j].sample(rng);
            rows.push(*self.by_category[j][k].choose(rng).expect("category with positive weight has rows"));
            v[[i, d.cond_offset + k]] = 1.0;
            targets.push(Some(SpanTarget { offset: d.row_offset, width: d.width, index: k }));
        }
        Batch { rows, v, targets }
    }
}

fn discrete_conditions(transformer: &TableTransformer, rows: &Tensor2) -> Vec<DiscreteCondition> {
    let mut out = Vec::new();
    let mut cond_offset = 0;
    for span in transformer.layout.discrete_spans() {
        let mut counts = vec![0.0; span.width];
        for row in rows.rows() {
            let block = row.slice(s![span.offset..span.offset + span.width]).to_vec();
            counts[argmax(&block)] += 1.0;
        }
        let total: f64 = counts.iter().sum();
        let logs: Vec<f64> = counts.iter().map(|c| (c + 1.0f64).ln() * if *c > 0.0 { 1.0 } else { 0.0 }).collect();
        let log_total: f64 = logs.iter().sum();
        out.push(DiscreteCondition {
            column: span.column.clone(),
            row_offset: span.offset,
            cond_offset,
            width: span.width,
            frequencies: counts.iter().map(|c| c / total).collect(),
            log_frequencies: logs.iter().map(|l| l / log_total).collect(),
        });
        cond_offset += span.width;
    }
    out
}

fn build_networks(
    transformer: &TableTransformer,
    c_width: usize,
    v_width: usize,
    config: &TrainConfig,
    rng: &mut impl Rng,
) -> (Mlp, Mlp) {
    let d = transformer.width();
    let mut g = MlpBuilder::new(config.z_dim + c_width + v_width, rng).prefix("generator");
    for &h in &config.generator_hidden {
        g = g.residual(h);
    }
    let generator = g.affine(d).span_head(transformer.layout.activation_spans()).build();

    let mut c = MlpBuilder::new((d + c_width + v_width) * config.pac, rng).prefix("critic");
    for &h in &config.critic_hidden {
        c = c.affine(h).leaky_relu(LEAKY_SLOPE);
        if config.critic_dropout > 0.0 {
            c = c.dropout(config.critic_dropout);
        }
    }
    let critic = c.affine(1).build();
    (generator, critic)
}

fn noise(rows: usize, cols: usize, rng: &mut impl Rng) -> Tensor2 {
    Tensor2::from_shape_simple_fn((rows, cols), || StandardNormal.sample(rng))
}

fn select_rows(x: &Tensor2, rows: &[usize]) -> Tensor2 {
    x.select(Axis(0), rows)
}

/// Trains the model for one table.
///
/// Every step samples a batch by training-by-sampling, takes
/// `config.critic_steps` critic updates on
/// `E[C(fake)] - E[C(real)] + lambda * penalty` and one generator update on
/// `-E[C(fake)]` plus the cross-entropy between the generated block of the
/// conditioned column and the conditioned category.
pub fn fit_table(
    transformer: TableTransformer,
    condition: ConditionLayout,
    data: &TrainingData,
    config: &TrainConfig,
    seed: u64,
) -> Result<TableGanModel, GanError> {
    config.validate().map_err(GanError::InvalidConfig)?;
    let table = transformer.table.clone();
    let n = data.rows.nrows();
    if n == 0 {
        return Err(GanError::EmptyTable(table));
    }
    if data.rows.ncols() != transformer.width() {
        return Err(GanError::WidthMismatch { expected: transformer.width(), found: data.rows.ncols() });
    }
    if data.conditions.dim() != (n, condition.width()) {
        return Err(GanError::WidthMismatch { expected: condition.width(), found: data.conditions.ncols() });
    }
    let c_width = condition.width();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let discrete = discrete_conditions(&transformer, &data.rows);
    let sampler = Sampler::new(discrete.clone(), &data.rows);
    let (mut generator, mut critic) = build_networks(&transformer, c_width, sampler.v_width, config, &mut rng);

    let references = if c_width > 0 && !discrete.is_empty() {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        idx.truncate(MAX_REFERENCES);
        idx.sort_unstable();
        idx.iter()
            .map(|&r| Reference {
                condition: data.conditions.row(r).to_vec(),
                categories: sampler.by_category.iter().map(|lists| lists.iter().position(|l| l.binary_search(&r).is_ok()).expect("row listed")).collect(),
            })
            .collect()
    } else {
        Vec::new()
    };

    let adam = AdamConfig { lr: config.learning_rate, beta1: config.beta1, beta2: config.beta2, eps: 1e-8 };
    let mut opt_g = Adam::new(adam);
    let mut opt_c = Adam::new(adam);
    let batch = config.batch_size;
    // A table without feature columns has nothing to learn.
    let steps = if transformer.width() > 0 { (n / batch).max(1) } else { 0 };
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        let (mut sum_c, mut sum_g, mut sum_p) = (0.0, 0.0, 0.0);
        for step in 0..steps {
            let (mut closs, mut pen) = (0.0, 0.0);
            for _ in 0..config.critic_steps {
                let b = sampler.sample(batch, &mut rng);
                let cond = join(&[&select_rows(&data.conditions, &b.rows), &b.v]);
                let z = noise(batch, config.z_dim, &mut rng);
                let mut gg = Graph::new();
                let input = gg.constant(join(&[&z, &cond]));
                let fake_out = generator.forward(&mut gg, input, Mode::Train, &mut rng)?.output;
                let fake = gg.value(fake_out).clone();
                let real = select_rows(&data.rows, &b.rows);

                let mut g = Graph::new();
                let wloss = critic_loss(&mut critic, &mut g, &real, &fake, &cond, config.pac, &mut rng)?;
                let total = if config.penalty_weight > 0.0 {
                    let gp = gradient_penalty(&critic, &mut g, &real, &fake, &cond, config.pac, &mut rng)?;
                    pen = g.scalar(gp);
                    let weighted = g.scale(gp, config.penalty_weight);
                    g.add(wloss, weighted)?
                } else {
                    wloss
                };
                closs = g.scalar(total);
                if !closs.is_finite() {
                    return Err(GanError::NonFiniteLoss { table, epoch, step, critic_loss: closs, gen_loss: f64::NAN, penalty: pen });
                }
                let grads = g.param_grads(&g.backward(total)?);
                opt_c.step(&mut critic.params, &grads);
                if let Some(clip) = config.weight_clip {
                    critic.params.clip(clip);
                }
            }

            let b = sampler.sample(batch, &mut rng);
            let cond = join(&[&select_rows(&data.conditions, &b.rows), &b.v]);
            let z = noise(batch, config.z_dim, &mut rng);
            let mut g = Graph::new();
            let input = g.constant(join(&[&z, &cond]));
            let f = generator.forward(&mut g, input, Mode::Train, &mut rng)?;
            let critic_in = if cond.ncols() > 0 {
                let cv = g.constant(cond);
                g.concat_cols(f.output, cv)?
            } else {
                f.output
            };
            let width = g.value(critic_in).ncols();
            let packed = g.reshape(critic_in, batch / config.pac, width * config.pac)?;
            let score = critic.forward(&mut g, packed, Mode::Train, &mut rng)?.output;
            let mean_score = g.mean(score);
            let mut gloss = g.scale(mean_score, -1.0);
            if !sampler.discrete.is_empty() {
                let ce = g.span_cross_entropy(f.logits, b.targets)?;
                gloss = g.add(gloss, ce)?;
            }
            let gl = g.scalar(gloss);
            if !gl.is_finite() {
                return Err(GanError::NonFiniteLoss { table, epoch, step, critic_loss: closs, gen_loss: gl, penalty: pen });
            }
            let grads = g.param_grads(&g.backward(gloss)?);
            opt_g.step(&mut generator.params, &grads);

            sum_c += closs;
            sum_g += gl;
            sum_p += pen;
        }
        let k = steps.max(1) as f64;
        let stats = EpochStats { epoch, critic_loss: sum_c / k, gen_loss: sum_g / k, penalty: sum_p / k };
        log::debug!(
            "table {table} epoch {epoch}: critic {:.4} generator {:.4} penalty {:.4}",
            stats.critic_loss,
            stats.gen_loss,
            stats.penalty
        );
        history.push(stats);
    }

    Ok(TableGanModel {
        table,
        transformer,
        condition,
        generator,
        critic,
        discrete,
        references,
        config: config.clone(),
        seed,
        history,
    })
}

impl TableGanModel {
    pub fn condition_width(&self) -> usize {
        self.condition.width()
    }

    fn v_width(&self) -> usize {
        self.discrete.iter().map(|d| d.width).sum()
    }

    /// Discrete-condition vectors for generation. Without ancestors a column
    /// is drawn uniformly and a category from its empirical frequencies;
    /// with ancestors the category of the nearest stored training condition
    /// is used, ties broken at random.
    fn condition_categories(&self, conditions: &Tensor2, rng: &mut impl Rng) -> Tensor2 {
        let mut v = Tensor2::zeros((conditions.nrows(), self.v_width()));
        if self.discrete.is_empty() {
            return v;
        }
        let pickers: Vec<WeightedIndex<f64>> =
            self.discrete.iter().map(|d| WeightedIndex::new(&d.frequencies).expect("observed category")).collect();
        let mut ties = Vec::new();
        for (i, c) in conditions.rows().into_iter().enumerate() {
            let j = rng.random_range(0..self.discrete.len());
            let k = if self.references.is_empty() {
                pickers[j].sample(rng)
            } else {
                let mut best = f64::INFINITY;
                ties.clear();
                for (r, reference) in self.references.iter().enumerate() {
                    let d2: f64 = reference.condition.iter().zip(c.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
                    if d2 < best - 1e-12 {
                        best = d2;
                        ties.clear();
                        ties.push(r);
                    } else if (d2 - best).abs() <= 1e-12 {
                        ties.push(r);
                    }
                }
                self.references[*ties.choose(rng).expect("references non-empty")].categories[j]
            };
            v[[i, self.discrete[j].cond_offset + k]] = 1.0;
        }
        v
    }

    /// Generates one encoded row per condition row, running the generator in
    /// evaluation mode.
    pub fn generate(&self, conditions: &Tensor2, rng: &mut impl Rng) -> Result<Tensor2, GanError> {
        if conditions.ncols() != self.condition_width() {
            return Err(GanError::WidthMismatch { expected: self.condition_width(), found: conditions.ncols() });
        }
        let n = conditions.nrows();
        if n == 0 || self.transformer.width() == 0 {
            return Ok(Tensor2::zeros((n, self.transformer.width())));
        }
        let v = self.condition_categories(conditions, rng);
        let z = noise(n, self.config.z_dim, rng);
        Ok(self.generator.predict(&join(&[&z, conditions, &v]))?)
    }

    /// Decoded feature rows: `n_per_condition` rows for every condition, in
    /// condition order.
    pub fn sample_rows(&self, conditions: &[Vec<f64>], n_per_condition: usize, seed: u64) -> Result<Table, GanError> {
        let c = self.condition_width();
        let mut m = Tensor2::zeros((conditions.len() * n_per_condition, c));
        for (i, cond) in conditions.iter().enumerate() {
            if cond.len() != c {
                return Err(GanError::WidthMismatch { expected: c, found: cond.len() });
            }
            for k in 0..n_per_condition {
                m.row_mut(i * n_per_condition + k).assign(&ndarray::ArrayView1::from(cond));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let encoded = self.generate(&m, &mut rng)?;
        Ok(self.transformer.decode_table(&encoded)?)
    }

    /// `n` rows from a table without ancestors.
    pub fn sample_unconditional(&self, n: usize, seed: u64) -> Result<Table, GanError> {
        self.sample_rows(&[Vec::new()], n, seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{ColumnData, Value};
    use crate::neural::{Layer, ParamStore};
    use crate::schema::{ColumnKind, ColumnSpec, TableSpec};
    use ndarray::array;

    fn linear_critic(w: &[f64]) -> Mlp {
        let mut params = ParamStore::new();
        params.insert("w", Tensor2::from_shape_vec((w.len(), 1), w.to_vec()).unwrap());
        params.insert("b", array![[-0.4]]);
        Mlp { input_dim: w.len(), output_dim: 1, layers: vec![Layer::Affine { weight: "w".into(), bias: "b".into() }], params }
    }

    #[test]
    fn identical_batches_have_zero_critic_loss() {
        let mut critic = linear_critic(&[1.0, -2.0, 0.5]);
        let x = array![[1.0, 2.0], [0.5, -1.0], [3.0, 0.0], [0.2, 0.2]];
        let cond = array![[1.0], [0.0], [1.0], [0.0]];
        let mut g = Graph::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let l = critic_loss(&mut critic, &mut g, &x, &x, &cond, 1, &mut rng).unwrap();
        assert_eq!(g.scalar(l), 0.0);
    }

    #[test]
    fn linear_critic_penalty_is_batch_independent() {
        let w = [0.6, -0.3, 1.1, 0.4];
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        let critic = linear_critic(&w);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..5 {
            let real = Tensor2::from_shape_simple_fn((6, 1), || rng.random_range(-5.0..5.0));
            let fake = Tensor2::from_shape_simple_fn((6, 1), || rng.random_range(-5.0..5.0));
            let cond = Tensor2::zeros((6, 1));
            let mut g = Graph::new();
            let p = gradient_penalty(&critic, &mut g, &real, &fake, &cond, 2, &mut rng).unwrap();
            assert!((g.scalar(p) - (norm - 1.0).powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_norm_linear_critic_has_no_penalty() {
        let critic = linear_critic(&[0.6, 0.8]);
        let mut g = Graph::new();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = array![[1.0, 2.0], [3.0, 4.0]];
        let p = gradient_penalty(&critic, &mut g, &x, &(&x * 2.0), &Tensor2::zeros((2, 0)), 1, &mut rng).unwrap();
        assert!(g.scalar(p).abs() < 1e-15);
    }

    fn small_table() -> Table {
        let spec = TableSpec {
            name: "t".into(),
            columns: vec![ColumnSpec::new("c", ColumnKind::Categorical), ColumnSpec::new("x", ColumnKind::Numerical)],
            primary_key: None,
        };
        let mut t = Table::with_spec(&spec);
        for i in 0..40 {
            let c = ["a", "b", "c"][i % 3];
            t.push_row(vec![Value::Text(c.into()), Value::Float(i as f64 * 0.5)]);
        }
        t
    }

    fn tiny_config() -> TrainConfig {
        TrainConfig {
            epochs: 2,
            batch_size: 10,
            pac: 2,
            z_dim: 4,
            generator_hidden: vec![8],
            critic_hidden: vec![8],
            ..TrainConfig::default()
        }
    }

    fn fit_small(seed: u64, config: &TrainConfig) -> TableGanModel {
        let t = small_table();
        let tr = TableTransformer::fit(&t, 3, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let rows = tr.encode_table(&t, &mut rng).unwrap();
        let data = TrainingData { conditions: Tensor2::zeros((rows.nrows(), 0)), rows };
        fit_table(tr, ConditionLayout::default(), &data, config, seed).unwrap()
    }

    #[test]
    fn training_is_reproducible() {
        let a = fit_small(7, &tiny_config());
        let b = fit_small(7, &tiny_config());
        assert_eq!(a, b);
        assert_eq!(a.history.len(), 2);
        assert_eq!(a.sample_unconditional(25, 3).unwrap(), b.sample_unconditional(25, 3).unwrap());
    }

    #[test]
    fn widths_include_condition() {
        let m = fit_small(1, &tiny_config());
        let d = m.transformer.width();
        let v = 3;
        assert_eq!(m.generator.input_dim, 4 + v);
        assert_eq!(m.generator.output_dim, d);
        assert_eq!(m.critic.input_dim, (d + v) * 2);
    }

    #[test]
    fn untrained_generator_emits_valid_rows() {
        let m = fit_small(3, &TrainConfig { epochs: 1, ..tiny_config() });
        let t = m.sample_unconditional(200, 11).unwrap();
        assert_eq!(t.n_rows(), 200);
        let ColumnData::Categorical(c) = &t.column("c").unwrap().data else { panic!() };
        assert!(c.iter().all(|v| matches!(v.as_deref(), Some("a" | "b" | "c"))));
        let ColumnData::Numerical(x) = &t.column("x").unwrap().data else { panic!() };
        assert!(x.iter().all(|v| v.unwrap().is_finite()));
    }

    #[test]
    fn zero_rows_requested() {
        let m = fit_small(3, &TrainConfig { epochs: 1, ..tiny_config() });
        assert_eq!(m.sample_unconditional(0, 1).unwrap().n_rows(), 0);
    }

    #[test]
    fn wrong_condition_width() {
        let m = fit_small(3, &TrainConfig { epochs: 1, ..tiny_config() });
        assert!(matches!(m.sample_rows(&[vec![1.0]], 1, 0), Err(GanError::WidthMismatch { .. })));
    }

    #[test]
    fn empty_table_rejected() {
        let t = small_table();
        let tr = TableTransformer::fit(&t, 3, 0).unwrap();
        let data = TrainingData { rows: Tensor2::zeros((0, tr.width())), conditions: Tensor2::zeros((0, 0)) };
        let err = fit_table(tr, ConditionLayout::default(), &data, &tiny_config(), 0).unwrap_err();
        assert_eq!(err, GanError::EmptyTable("t".into()));
    }

    #[test]
    fn weight_clipping_fallback_bounds_critic() {
        let cfg = TrainConfig { penalty_weight: 0.0, weight_clip: Some(0.01), critic_dropout: 0.5, ..tiny_config() };
        let m = fit_small(5, &cfg);
        assert!(m.critic.params.iter().all(|(_, t)| t.iter().all(|v| v.abs() <= 0.01)));
        assert!(m.history.iter().all(|h| h.penalty == 0.0));
    }
}
