//! Reverse-mode automatic differentiation over a flat tape of 2-D tensors.
//!
//! Nodes are appended in evaluation order, so the tape is already a
//! topological order and [`Graph::backward`] is a single reverse sweep.
//! Backward rules are written in terms of tensor algebra on recorded values;
//! an input gradient that is itself assembled from tape operations (see
//! [`Mlp::input_gradient`](super::Mlp::input_gradient)) can therefore be
//! differentiated again by a second sweep.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use ndarray::{s, Array1, Array2, Axis, Zip};

use super::{NeuralError, ParamStore};
use crate::transform::{Activation, ActivationSpan};

/// Dense row-major matrix of 64-bit floats.
pub type Tensor2 = Array2<f64>;

static NEXT_GRAPH: AtomicU64 = AtomicU64::new(1);

/// Handle to a node of a particular [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var {
    graph: u64,
    index: usize,
}

/// One cross-entropy target: the softmax block `[offset, offset + width)` of
/// a row and the index inside it that should be hot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpanTarget {
    pub offset: usize,
    pub width: usize,
    pub index: usize,
}

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul(usize, usize),
    /// `a · bᵀ`
    MatMulBt(usize, usize),
    /// `a + b` with `b` a `1 x m` row broadcast over rows.
    AddRow(usize, usize),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Scale(usize, f64),
    AddScalar(usize),
    MulConst(usize, Tensor2),
    LeakyRelu(usize, f64),
    Relu(usize),
    Tanh(usize),
    Square(usize),
    BatchNorm { x: usize, gamma: usize, beta: usize, xhat: Tensor2, inv_std: Array1<f64>, batch_stats: bool },
    SpanHead(usize, Vec<ActivationSpan>),
    SpanCrossEntropy { logits: usize, probs: Tensor2, targets: Vec<Option<SpanTarget>> },
    ConcatCols(usize, usize),
    Reshape(usize),
    RowNorm(usize),
    Sum(usize),
    Mean(usize),
}

#[derive(Debug)]
struct Node {
    value: Tensor2,
    op: Op,
    requires_grad: bool,
}

/// Gradients of one scalar with respect to every node of the graph that
/// participates in it.
#[derive(Debug)]
pub struct Gradients {
    graph: u64,
    grads: Vec<Option<Tensor2>>,
}

impl Gradients {
    pub fn get(&self, var: Var) -> Option<&Tensor2> {
        if var.graph != self.graph {
            return None;
        }
        self.grads.get(var.index).and_then(Option::as_ref)
    }
}

/// A recording of tensor operations.
#[derive(Debug)]
pub struct Graph {
    id: u64,
    nodes: Vec<Node>,
    params: Vec<(String, usize)>,
}

impl Default for Graph {
    fn default() -> Self {
        Self::new()
    }
}

fn accumulate(grads: &mut [Option<Tensor2>], index: usize, g: Tensor2) {
    match &mut grads[index] {
        Some(existing) => *existing += &g,
        slot @ None => *slot = Some(g),
    }
}

fn softmax_into(src: ndarray::ArrayView1<f64>, mut dst: ndarray::ArrayViewMut1<f64>) {
    let max = src.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let mut sum = 0.0;
    for (d, &s) in dst.iter_mut().zip(src.iter()) {
        *d = (s - max).exp();
        sum += *d;
    }
    dst.mapv_inplace(|v| v / sum);
}

impl Graph {
    pub fn new() -> Self {
        Self { id: NEXT_GRAPH.fetch_add(1, Ordering::Relaxed), nodes: Vec::new(), params: Vec::new() }
    }

    fn push(&mut self, value: Tensor2, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node { value, op, requires_grad });
        Var { graph: self.id, index: self.nodes.len() - 1 }
    }

    fn idx(&self, v: Var) -> usize {
        assert_eq!(v.graph, self.id, "variable belongs to a different graph");
        v.index
    }

    fn rg(&self, i: usize) -> bool {
        self.nodes[i].requires_grad
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// A leaf that gradients do not flow into.
    pub fn constant(&mut self, value: Tensor2) -> Var {
        self.push(value, Op::Leaf, false)
    }

    /// A leaf whose gradient is wanted.
    pub fn variable(&mut self, value: Tensor2) -> Var {
        self.push(value, Op::Leaf, true)
    }

    /// Binds the named parameter of `store` as a differentiable leaf.
    pub fn param(&mut self, store: &ParamStore, name: &str) -> Result<Var, NeuralError> {
        let value = store.get(name).ok_or_else(|| NeuralError::UnknownParameter(name.to_string()))?.clone();
        let v = self.push(value, Op::Leaf, true);
        self.params.push((name.to_string(), v.index));
        Ok(v)
    }

    pub fn value(&self, v: Var) -> &Tensor2 {
        &self.nodes[self.idx(v)].value
    }

    pub fn scalar(&self, v: Var) -> f64 {
        self.value(v)[[0, 0]]
    }

    fn binary_shape_check(&self, a: usize, b: usize, what: &str) -> Result<(), NeuralError> {
        let (sa, sb) = (self.nodes[a].value.dim(), self.nodes[b].value.dim());
        if sa != sb {
            return Err(NeuralError::DimensionMismatch { context: what.to_string(), expected: sa.1, found: sb.1 });
        }
        Ok(())
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, NeuralError> {
        let (ia, ib) = (self.idx(a), self.idx(b));
        let (va, vb) = (&self.nodes[ia].value, &self.nodes[ib].value);
        if va.ncols() != vb.nrows() {
            return Err(NeuralError::DimensionMismatch { context: "matmul".into(), expected: vb.nrows(), found: va.ncols() });
        }
        let out = va.dot(vb);
        let rg = self.rg(ia) || self.rg(ib);
        Ok(self.push(out, Op::MatMul(ia, ib), rg))
    }

    pub fn matmul_bt(&mut self, a: Var, b: Var) -> Result<Var, NeuralError> {
        let (ia, ib) = (self.idx(a), self.idx(b));
        let (va, vb) = (&self.nodes[ia].value, &self.nodes[ib].value);
        if va.ncols() != vb.ncols() {
            return Err(NeuralError::DimensionMismatch { context: "matmul_bt".into(), expected: vb.ncols(), found: va.ncols() });
        }
        let out = va.dot(&vb.t());
        let rg = self.rg(ia) || self.rg(ib);
        Ok(self.push(out, Op::MatMulBt(ia, ib), rg))
    }

    pub fn add_row(&mut self, a: Var, row: Var) -> Result<Var, NeuralError> {
        let (ia, ib) = (self.idx(a), self.idx(row));
        let (va, vb) = (&self.nodes[ia].value, &self.nodes[ib].value);
        if vb.nrows() != 1 || vb.ncols() != va.ncols() {
            return Err(NeuralError::DimensionMismatch { context: "add_row".into(), expected: va.ncols(), found: vb.ncols() });
        }
        let out = va + vb;
        let rg = self.rg(ia) || self.rg(ib);
        Ok(self.push(out, Op::AddRow(ia, ib), rg))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, NeuralError> {
        let (ia, ib) = (self.idx(a), self.idx(b));
        self.binary_shape_check(ia, ib, "add")?;
        let out = &self.nodes[ia].value + &self.nodes[ib].value;
        let rg = self.rg(ia) || self.rg(ib);
        Ok(self.push(out, Op::Add(ia, ib), rg))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var, NeuralError> {
        let (ia, ib) = (self.idx(a), self.idx(b));
        self.binary_shape_check(ia, ib, "sub")?;
        let out = &self.nodes[ia].value - &self.nodes[ib].value;
        let rg = self.rg(ia) || self.rg(ib);
        Ok(self.push(out, Op::Sub(ia, ib), rg))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, NeuralError> {
        let (ia, ib) = (self.idx(a), self.idx(b));
        self.binary_shape_check(ia, ib, "mul")?;
        let out = &self.nodes[ia].value * &self.nodes[ib].value;
        let rg = self.rg(ia) || self.rg(ib);
        Ok(self.push(out, Op::Mul(ia, ib), rg))
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let ia = self.idx(a);
        let out = &self.nodes[ia].value * c;
        let rg = self.rg(ia);
        self.push(out, Op::Scale(ia, c), rg)
    }

    pub fn add_scalar(&mut self, a: Var, c: f64) -> Var {
        let ia = self.idx(a);
        let out = &self.nodes[ia].value + c;
        let rg = self.rg(ia);
        self.push(out, Op::AddScalar(ia), rg)
    }

    /// Elementwise product with a constant tensor (no gradient flows into it).
    pub fn mul_const(&mut self, a: Var, c: Tensor2) -> Result<Var, NeuralError> {
        let ia = self.idx(a);
        if self.nodes[ia].value.dim() != c.dim() {
            return Err(NeuralError::DimensionMismatch {
                context: "mul_const".into(),
                expected: self.nodes[ia].value.ncols(),
                found: c.ncols(),
            });
        }
        let out = &self.nodes[ia].value * &c;
        let rg = self.rg(ia);
        Ok(self.push(out, Op::MulConst(ia, c), rg))
    }

    pub fn leaky_relu(&mut self, a: Var, slope: f64) -> Var {
        let ia = self.idx(a);
        let out = self.nodes[ia].value.mapv(|v| if v > 0.0 { v } else { slope * v });
        let rg = self.rg(ia);
        self.push(out, Op::LeakyRelu(ia, slope), rg)
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let ia = self.idx(a);
        let out = self.nodes[ia].value.mapv(|v| v.max(0.0));
        let rg = self.rg(ia);
        self.push(out, Op::Relu(ia), rg)
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let ia = self.idx(a);
        let out = self.nodes[ia].value.mapv(f64::tanh);
        let rg = self.rg(ia);
        self.push(out, Op::Tanh(ia), rg)
    }

    pub fn square(&mut self, a: Var) -> Var {
        let ia = self.idx(a);
        let out = self.nodes[ia].value.mapv(|v| v * v);
        let rg = self.rg(ia);
        self.push(out, Op::Square(ia), rg)
    }

    /// Batch normalisation. With `batch_stats` the statistics of `x` are used
    /// (biased variance); otherwise the given running statistics are treated
    /// as constants. Returns the output and the batch mean/variance.
    pub fn batch_norm(
        &mut self,
        x: Var,
        gamma: Var,
        beta: Var,
        eps: f64,
        running: Option<(&[f64], &[f64])>,
    ) -> Result<(Var, Array1<f64>, Array1<f64>), NeuralError> {
        let (ix, ig, ib) = (self.idx(x), self.idx(gamma), self.idx(beta));
        let xv = &self.nodes[ix].value;
        let d = xv.ncols();
        for (i, what) in [(ig, "batch_norm gamma"), (ib, "batch_norm beta")] {
            let v = &self.nodes[i].value;
            if v.nrows() != 1 || v.ncols() != d {
                return Err(NeuralError::DimensionMismatch { context: what.into(), expected: d, found: v.ncols() });
            }
        }
        let (mean, var) = match running {
            None => {
                let n = xv.nrows().max(1) as f64;
                let mean = xv.sum_axis(Axis(0)) / n;
                let var = Zip::from(xv.columns())
                    .and(&mean)
                    .map_collect(|c, &m| c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n);
                (mean, var)
            }
            Some((m, v)) => (Array1::from(m.to_vec()), Array1::from(v.to_vec())),
        };
        let inv_std = var.mapv(|v| 1.0 / (v + eps).sqrt());
        let xhat = (xv - &mean.view().insert_axis(Axis(0))) * &inv_std.view().insert_axis(Axis(0));
        let out = &xhat * &self.nodes[ig].value + &self.nodes[ib].value;
        let rg = self.rg(ix) || self.rg(ig) || self.rg(ib);
        let v = self.push(out, Op::BatchNorm { x: ix, gamma: ig, beta: ib, xhat, inv_std, batch_stats: running.is_none() }, rg);
        Ok((v, mean, var))
    }

    /// Applies tanh or softmax independently on each activation span.
    pub fn span_head(&mut self, a: Var, spans: &[ActivationSpan]) -> Result<Var, NeuralError> {
        let ia = self.idx(a);
        let x = &self.nodes[ia].value;
        let covered: usize = spans.iter().map(|s| s.width).sum();
        if covered != x.ncols() {
            return Err(NeuralError::DimensionMismatch { context: "span_head".into(), expected: covered, found: x.ncols() });
        }
        let mut out = x.clone();
        for span in spans {
            let range = s![.., span.offset..span.offset + span.width];
            match span.activation {
                Activation::Tanh => out.slice_mut(range).mapv_inplace(f64::tanh),
                Activation::Softmax => {
                    for (src, dst) in x.slice(range).rows().into_iter().zip(out.slice_mut(range).rows_mut()) {
                        softmax_into(src, dst);
                    }
                }
            }
        }
        let rg = self.rg(ia);
        Ok(self.push(out, Op::SpanHead(ia, spans.to_vec()), rg))
    }

    /// Mean over all rows of `-log softmax(logits[row, span])[index]`, where
    /// rows without a target contribute zero.
    pub fn span_cross_entropy(&mut self, logits: Var, targets: Vec<Option<SpanTarget>>) -> Result<Var, NeuralError> {
        let il = self.idx(logits);
        let x = &self.nodes[il].value;
        if targets.len() != x.nrows() {
            return Err(NeuralError::DimensionMismatch { context: "span_cross_entropy".into(), expected: x.nrows(), found: targets.len() });
        }
        let mut probs = Tensor2::zeros(x.dim());
        let mut total = 0.0;
        for (r, t) in targets.iter().enumerate() {
            if let Some(t) = t {
                let src = x.slice(s![r, t.offset..t.offset + t.width]);
                softmax_into(src, probs.slice_mut(s![r, t.offset..t.offset + t.width]));
                total -= probs[[r, t.offset + t.index]].max(f64::MIN_POSITIVE).ln();
            }
        }
        let n = x.nrows().max(1) as f64;
        let rg = self.rg(il);
        Ok(self.push(Tensor2::from_elem((1, 1), total / n), Op::SpanCrossEntropy { logits: il, probs, targets }, rg))
    }

    pub fn concat_cols(&mut self, a: Var, b: Var) -> Result<Var, NeuralError> {
        let (ia, ib) = (self.idx(a), self.idx(b));
        let (va, vb) = (&self.nodes[ia].value, &self.nodes[ib].value);
        if va.nrows() != vb.nrows() {
            return Err(NeuralError::DimensionMismatch { context: "concat_cols".into(), expected: va.nrows(), found: vb.nrows() });
        }
        let out = ndarray::concatenate(Axis(1), &[va.view(), vb.view()]).expect("row counts checked");
        let rg = self.rg(ia) || self.rg(ib);
        Ok(self.push(out, Op::ConcatCols(ia, ib), rg))
    }

    /// Row-major reshape.
    pub fn reshape(&mut self, a: Var, rows: usize, cols: usize) -> Result<Var, NeuralError> {
        let ia = self.idx(a);
        let v = &self.nodes[ia].value;
        if v.len() != rows * cols {
            return Err(NeuralError::DimensionMismatch { context: "reshape".into(), expected: v.len(), found: rows * cols });
        }
        let out = v.as_standard_layout().into_owned().into_shape_with_order((rows, cols)).expect("size checked");
        let rg = self.rg(ia);
        Ok(self.push(out, Op::Reshape(ia), rg))
    }

    /// Euclidean norm of each row, as an `n x 1` column.
    pub fn row_norm(&mut self, a: Var) -> Var {
        let ia = self.idx(a);
        let out = self.nodes[ia].value.map_axis(Axis(1), |r| r.dot(&r).sqrt()).insert_axis(Axis(1));
        let rg = self.rg(ia);
        self.push(out, Op::RowNorm(ia), rg)
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let ia = self.idx(a);
        let out = Tensor2::from_elem((1, 1), self.nodes[ia].value.sum());
        let rg = self.rg(ia);
        self.push(out, Op::Sum(ia), rg)
    }

    pub fn mean(&mut self, a: Var) -> Var {
        let ia = self.idx(a);
        let v = &self.nodes[ia].value;
        let out = Tensor2::from_elem((1, 1), v.sum() / v.len().max(1) as f64);
        let rg = self.rg(ia);
        self.push(out, Op::Mean(ia), rg)
    }

    /// Differentiates the `1 x 1` node `loss` with respect to every node it
    /// depends on.
    pub fn backward(&self, loss: Var) -> Result<Gradients, NeuralError> {
        if loss.graph != self.id || loss.index >= self.nodes.len() {
            return Err(NeuralError::GraphNotRecorded);
        }
        if self.nodes[loss.index].value.dim() != (1, 1) {
            return Err(NeuralError::NotScalar(self.nodes[loss.index].value.dim()));
        }
        let mut grads: Vec<Option<Tensor2>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.index] = Some(Tensor2::ones((1, 1)));
        for i in (0..=loss.index).rev() {
            let Some(g) = grads[i].take() else { continue };
            let node = &self.nodes[i];
            if !node.requires_grad {
                continue;
            }
            let val = |j: usize| &self.nodes[j].value;
            let want = |j: usize| self.nodes[j].requires_grad;
            match &node.op {
                Op::Leaf => {
                    grads[i] = Some(g);
                    continue;
                }
                Op::MatMul(a, b) => {
                    if want(*a) {
                        accumulate(&mut grads, *a, g.dot(&val(*b).t()));
                    }
                    if want(*b) {
                        accumulate(&mut grads, *b, val(*a).t().dot(&g));
                    }
                }
                Op::MatMulBt(a, b) => {
                    if want(*a) {
                        accumulate(&mut grads, *a, g.dot(val(*b)));
                    }
                    if want(*b) {
                        accumulate(&mut grads, *b, g.t().dot(val(*a)));
                    }
                }
                Op::AddRow(a, b) => {
                    if want(*b) {
                        accumulate(&mut grads, *b, g.sum_axis(Axis(0)).insert_axis(Axis(0)));
                    }
                    if want(*a) {
                        accumulate(&mut grads, *a, g);
                    }
                }
                Op::Add(a, b) => {
                    if want(*b) {
                        accumulate(&mut grads, *b, g.clone());
                    }
                    if want(*a) {
                        accumulate(&mut grads, *a, g);
                    }
                }
                Op::Sub(a, b) => {
                    if want(*b) {
                        accumulate(&mut grads, *b, -&g);
                    }
                    if want(*a) {
                        accumulate(&mut grads, *a, g);
                    }
                }
                Op::Mul(a, b) => {
                    if want(*a) {
                        accumulate(&mut grads, *a, &g * val(*b));
                    }
                    if want(*b) {
                        accumulate(&mut grads, *b, &g * val(*a));
                    }
                }
                Op::Scale(a, c) => accumulate(&mut grads, *a, g * *c),
                Op::AddScalar(a) => accumulate(&mut grads, *a, g),
                Op::MulConst(a, c) => accumulate(&mut grads, *a, g * c),
                Op::LeakyRelu(a, slope) => {
                    let mut ga = g;
                    Zip::from(&mut ga).and(val(*a)).for_each(|d, &x| {
                        if x <= 0.0 {
                            *d *= slope
                        }
                    });
                    accumulate(&mut grads, *a, ga);
                }
                Op::Relu(a) => {
                    let mut ga = g;
                    Zip::from(&mut ga).and(val(*a)).for_each(|d, &x| {
                        if x <= 0.0 {
                            *d = 0.0
                        }
                    });
                    accumulate(&mut grads, *a, ga);
                }
                Op::Tanh(a) => {
                    let mut ga = g;
                    Zip::from(&mut ga).and(&node.value).for_each(|d, &y| *d *= 1.0 - y * y);
                    accumulate(&mut grads, *a, ga);
                }
                Op::Square(a) => accumulate(&mut grads, *a, g * val(*a) * 2.0),
                Op::BatchNorm { x, gamma, beta, xhat, inv_std, batch_stats } => {
                    if want(*gamma) {
                        accumulate(&mut grads, *gamma, (&g * xhat).sum_axis(Axis(0)).insert_axis(Axis(0)));
                    }
                    if want(*beta) {
                        accumulate(&mut grads, *beta, g.sum_axis(Axis(0)).insert_axis(Axis(0)));
                    }
                    if want(*x) {
                        let gxhat = &g * val(*gamma);
                        let inv = inv_std.view().insert_axis(Axis(0));
                        let gx = if *batch_stats {
                            let n = g.nrows() as f64;
                            let sum_g = gxhat.sum_axis(Axis(0)).insert_axis(Axis(0));
                            let sum_gx = (&gxhat * xhat).sum_axis(Axis(0)).insert_axis(Axis(0));
                            ((&gxhat * n) - &sum_g - xhat * &sum_gx) * &inv / n
                        } else {
                            gxhat * &inv
                        };
                        accumulate(&mut grads, *x, gx);
                    }
                }
                Op::SpanHead(a, spans) => {
                    let y = &node.value;
                    let mut ga = g;
                    for span in spans {
                        let range = s![.., span.offset..span.offset + span.width];
                        match span.activation {
                            Activation::Tanh => {
                                Zip::from(ga.slice_mut(range)).and(y.slice(range)).for_each(|d, &y| *d *= 1.0 - y * y)
                            }
                            Activation::Softmax => {
                                for (mut gr, yr) in ga.slice_mut(range).rows_mut().into_iter().zip(y.slice(range).rows()) {
                                    let dot = gr.dot(&yr);
                                    Zip::from(&mut gr).and(&yr).for_each(|d, &p| *d = p * (*d - dot));
                                }
                            }
                        }
                    }
                    accumulate(&mut grads, *a, ga);
                }
                Op::SpanCrossEntropy { logits, probs, targets } => {
                    let up = g[[0, 0]] / targets.len().max(1) as f64;
                    let mut gl = probs.clone();
                    for (r, t) in targets.iter().enumerate() {
                        if let Some(t) = t {
                            gl[[r, t.offset + t.index]] -= 1.0;
                        }
                    }
                    accumulate(&mut grads, *logits, gl * up);
                }
                Op::ConcatCols(a, b) => {
                    let ca = val(*a).ncols();
                    if want(*a) {
                        accumulate(&mut grads, *a, g.slice(s![.., ..ca]).to_owned());
                    }
                    if want(*b) {
                        accumulate(&mut grads, *b, g.slice(s![.., ca..]).to_owned());
                    }
                }
                Op::Reshape(a) => {
                    let dim = val(*a).dim();
                    accumulate(&mut grads, *a, g.as_standard_layout().into_owned().into_shape_with_order(dim).expect("same size"));
                }
                Op::RowNorm(a) => {
                    let x = val(*a);
                    let mut ga = x.clone();
                    for ((mut row, &norm), &up) in ga.rows_mut().into_iter().zip(node.value.iter()).zip(g.iter()) {
                        let k = if norm > 0.0 { up / norm } else { 0.0 };
                        row.mapv_inplace(|v| v * k);
                    }
                    accumulate(&mut grads, *a, ga);
                }
                Op::Sum(a) => accumulate(&mut grads, *a, Tensor2::from_elem(val(*a).dim(), g[[0, 0]])),
                Op::Mean(a) => {
                    let v = val(*a);
                    accumulate(&mut grads, *a, Tensor2::from_elem(v.dim(), g[[0, 0]] / v.len().max(1) as f64));
                }
            }
        }
        Ok(Gradients { graph: self.id, grads })
    }

    /// Gradients of every bound parameter, summed over repeated bindings.
    pub fn param_grads(&self, grads: &Gradients) -> BTreeMap<String, Tensor2> {
        let mut out: BTreeMap<String, Tensor2> = BTreeMap::new();
        for (name, index) in &self.params {
            let Some(g) = grads.grads.get(*index).and_then(Option::as_ref) else { continue };
            match out.get_mut(name) {
                Some(acc) => *acc += g,
                None => {
                    out.insert(name.clone(), g.clone());
                }
            }
        }
        out
    }
}
