use ndarray::{Array1, Array2, ArrayView2, Axis};

use super::DetectionError;

/// Area under the ROC curve: the probability that a random positive scores
/// above a random negative, counting ties as one half.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64, DetectionError> {
    assert_eq!(scores.len(), labels.len(), "one label per score");
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(DetectionError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Mann-Whitney U with mid-ranks for tied groups.
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += order[i..=j].iter().filter(|&&k| labels[k]).count() as f64 * mid;
        i = j + 1;
    }
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub weights: Array1<f64>,
    pub intercept: f64,
}

impl LogisticModel {
    /// Linear scores `x w + b` (monotone in the predicted probability).
    pub fn decision(&self, x: ArrayView2<f64>) -> Array1<f64> {
        x.dot(&self.weights) + self.intercept
    }

    pub fn predict_proba(&self, x: ArrayView2<f64>) -> Array1<f64> {
        self.decision(x).mapv(sigmoid)
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Largest eigenvalue of `A^T A / n` for `A = [x | 1]`, by power iteration.
fn curvature_bound(x: ArrayView2<f64>) -> f64 {
    let n = x.nrows().max(1) as f64;
    let d = x.ncols();
    let mut v = Array1::from_elem(d + 1, 1.0 / ((d + 1) as f64).sqrt());
    let mut lambda = 0.0;
    for _ in 0..50 {
        let av = x.dot(&v.slice(ndarray::s![..d])) + v[d];
        let mut w = Array1::zeros(d + 1);
        w.slice_mut(ndarray::s![..d]).assign(&x.t().dot(&av));
        w[d] = av.sum();
        w /= n;
        let norm = w.dot(&w).sqrt();
        if norm == 0.0 {
            break;
        }
        lambda = norm;
        v = w / norm;
    }
    lambda
}

/// Minimises the mean logistic loss plus `l2/2 |w|^2` (intercept not
/// penalised) by full-batch gradient descent from zero, with step size one
/// over the curvature bound of the loss.
pub fn train_logistic(x: ArrayView2<f64>, labels: &[bool], l2: f64, epochs: usize) -> Result<LogisticModel, DetectionError> {
    assert_eq!(x.nrows(), labels.len(), "one label per row");
    let pos = labels.iter().filter(|&&l| l).count();
    if x.nrows() < 2 || pos == 0 || pos == labels.len() {
        return Err(DetectionError::SingleClass);
    }
    let n = x.nrows() as f64;
    let y = Array1::from_iter(labels.iter().map(|&l| if l { 1.0 } else { 0.0 }));
    let step = 1.0 / (0.25 * curvature_bound(x) * 1.01 + l2).max(1e-12);
    let mut w = Array1::zeros(x.ncols());
    let mut b = 0.0;
    for _ in 0..epochs {
        let residual = (x.dot(&w) + b).mapv(sigmoid) - &y;
        let gw = x.t().dot(&residual) / n + &w * l2;
        let gb = residual.sum() / n;
        w.scaled_add(-step, &gw);
        b -= step * gb;
    }
    Ok(LogisticModel { weights: w, intercept: b })
}

/// Column means and standard deviations; constant columns get std 1.
pub fn standardizer(x: ArrayView2<f64>) -> (Array1<f64>, Array1<f64>) {
    let mean = x.mean_axis(Axis(0)).unwrap_or_else(|| Array1::zeros(x.ncols()));
    let std = x.var_axis(Axis(0), 0.0).mapv(|v| if v > 1e-24 { v.sqrt() } else { 1.0 });
    (mean, std)
}

pub fn standardize(x: ArrayView2<f64>, mean: &Array1<f64>, std: &Array1<f64>) -> Array2<f64> {
    (&x - &mean.view().insert_axis(Axis(0))) / &std.view().insert_axis(Axis(0))
}
