//! One-dimensional Gaussian mixtures fitted by expectation maximisation.
//!
//! For each candidate component count the mixture is initialised with
//! k-means++ and refined by EM until the mean log-likelihood changes by less
//! than `1e-6` or 100 iterations pass. The candidate with the lowest BIC is
//! kept, then components lighter than [`PRUNE_WEIGHT`] are dropped and the
//! remaining weights renormalised.

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub const PRUNE_WEIGHT: f64 = 0.005;
const MAX_ITERATIONS: usize = 100;
const TOLERANCE: f64 = 1e-6;
/// Upper bound on the number of values the mixture is fitted on.
const MAX_FIT_VALUES: usize = 10_000;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub weight: f64,
    pub mean: f64,
    pub std: f64,
}

impl Mode {
    pub fn log_density(&self, x: f64) -> f64 {
        let z = (x - self.mean) / self.std;
        -0.5 * z * z - self.std.ln() - LN_SQRT_2PI
    }
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn kmeans_pp<R: Rng>(values: &[f64], k: usize, rng: &mut R) -> Vec<f64> {
    let mut centers = vec![*values.choose(rng).expect("non-empty")];
    let mut d2: Vec<f64> = values.iter().map(|v| (v - centers[0]).powi(2)).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        if total <= 0.0 {
            break;
        }
        let mut target = rng.random::<f64>() * total;
        let mut pick = values.len() - 1;
        for (i, d) in d2.iter().enumerate() {
            if target < *d {
                pick = i;
                break;
            }
            target -= d;
        }
        let c = values[pick];
        centers.push(c);
        for (d, v) in d2.iter_mut().zip(values) {
            *d = d.min((v - c).powi(2));
        }
    }
    centers
}

struct Fit {
    modes: Vec<Mode>,
    log_likelihood: f64,
}

fn em(values: &[f64], k: usize, var_floor: f64, rng: &mut impl Rng) -> Fit {
    let n = values.len() as f64;
    let centers = kmeans_pp(values, k, rng);
    let k = centers.len();

    // Hard assignment to the nearest centre seeds weights and variances.
    let global_var = {
        let m = values.iter().sum::<f64>() / n;
        values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n
    };
    let mut sums = vec![(0.0f64, 0.0f64, 0.0f64); k];
    for &v in values {
        let (j, _) = centers
            .iter()
            .enumerate()
            .map(|(j, c)| (j, (v - c).abs()))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
        sums[j].0 += 1.0;
        sums[j].1 += v;
        sums[j].2 += v * v;
    }
    let mut modes: Vec<Mode> = sums
        .iter()
        .zip(&centers)
        .map(|(&(cnt, s, s2), &c)| {
            let (mean, var) = if cnt >= 2.0 {
                let m = s / cnt;
                (m, (s2 / cnt - m * m).max(0.0))
            } else {
                (c, global_var)
            };
            Mode { weight: cnt.max(1.0) / n, mean, std: (var + var_floor).sqrt() }
        })
        .collect();
    let wsum: f64 = modes.iter().map(|m| m.weight).sum();
    modes.iter_mut().for_each(|m| m.weight /= wsum);

    let mut resp = vec![0.0; values.len() * k];
    let mut scratch = vec![0.0; k];
    let mut prev = f64::NEG_INFINITY;
    let mut ll = prev;
    for _ in 0..MAX_ITERATIONS {
        // E step
        let mut total = 0.0;
        for (i, &v) in values.iter().enumerate() {
            for (j, m) in modes.iter().enumerate() {
                scratch[j] = m.weight.ln() + m.log_density(v);
            }
            let lse = log_sum_exp(&scratch);
            total += lse;
            for j in 0..k {
                resp[i * k + j] = (scratch[j] - lse).exp();
            }
        }
        ll = total / n;
        if (ll - prev).abs() < TOLERANCE {
            break;
        }
        prev = ll;

        // M step
        for (j, mode) in modes.iter_mut().enumerate() {
            let nk: f64 = (0..values.len()).map(|i| resp[i * k + j]).sum();
            if nk < 1e-10 {
                mode.weight = 0.0;
                continue;
            }
            let mean = values.iter().enumerate().map(|(i, v)| resp[i * k + j] * v).sum::<f64>() / nk;
            let var = values.iter().enumerate().map(|(i, v)| resp[i * k + j] * (v - mean).powi(2)).sum::<f64>() / nk;
            *mode = Mode { weight: nk / n, mean, std: (var + var_floor).sqrt() };
        }
        // Dead components keep their parameters but carry no weight.
        modes.iter_mut().filter(|m| m.weight == 0.0).for_each(|m| m.weight = f64::MIN_POSITIVE);
    }
    Fit { modes, log_likelihood: ll * n }
}

/// Fits mixtures with 1..=`max_modes` components and returns the pruned,
/// renormalised mixture with the lowest BIC. `values` must hold at least two
/// distinct finite numbers.
pub fn fit_mixture<R: Rng>(values: &[f64], max_modes: usize, rng: &mut R) -> Vec<Mode> {
    let sample: Vec<f64> = if values.len() > MAX_FIT_VALUES {
        values.choose_multiple(rng, MAX_FIT_VALUES).copied().collect()
    } else {
        values.to_vec()
    };
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let var = sample.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let var_floor = 1e-6 * var.max(f64::MIN_POSITIVE);

    let mut distinct = sample.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let max_k = max_modes.max(1).min(distinct.len());

    let mut best: Option<(f64, Vec<Mode>)> = None;
    for k in 1..=max_k {
        let fit = em(&sample, k, var_floor, rng);
        let params = (3 * fit.modes.len() - 1) as f64;
        let bic = -2.0 * fit.log_likelihood + params * n.ln();
        if best.as_ref().is_none_or(|(b, _)| bic < *b) {
            best = Some((bic, fit.modes));
        }
    }
    let mut modes = best.expect("at least one candidate").1;
    modes.retain(|m| m.weight >= PRUNE_WEIGHT);
    let total: f64 = modes.iter().map(|m| m.weight).sum();
    modes.iter_mut().for_each(|m| m.weight /= total);
    modes.sort_by(|a, b| a.mean.total_cmp(&b.mean));
    modes
}
