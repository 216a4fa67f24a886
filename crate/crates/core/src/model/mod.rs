//! The cut classifier: a 6-12-12-6-1 dense network with rectifier hidden
//! layers and a logistic output, plus metrics and feature normalisation.

mod io;
mod train;

pub use io::{load_model, save_model};
pub use train::{train, EpochRecord, TrainConfig};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::features::N_FEATURES;
use crate::{Error, Result};

/// Layer widths, input first.
pub const LAYER_DIMS: [usize; 5] = [N_FEATURES, 12, 12, 6, 1];

/// Added to the variance before taking the square root.
pub const NORM_EPS: f64 = 1e-8;

/// A normalised feature row.
pub type Row = [f64; N_FEATURES];

/// Dense layer; `weights` is `n_out x n_in`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub n_in: usize,
    pub n_out: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn zeros(n_in: usize, n_out: usize) -> Layer {
        Layer { n_in, n_out, weights: vec![0.0; n_in * n_out], biases: vec![0.0; n_out] }
    }

    fn apply(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.n_out {
            let row = &self.weights[o * self.n_in..(o + 1) * self.n_in];
            out.push(self.biases[o] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>());
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    layers: Vec<Layer>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Binary cross-entropy of a logit against a soft target, computed stably.
fn bce_with_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

impl Mlp {
    /// All weights and biases zero.
    pub fn zeros() -> Mlp {
        let layers = LAYER_DIMS.windows(2).map(|d| Layer::zeros(d[0], d[1])).collect();
        Mlp { layers }
    }

    /// Weights uniform in `±sqrt(6 / (fan_in + fan_out))`, biases zero.
    pub fn init_xavier(seed: u64) -> Mlp {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = Mlp::zeros();
        for l in &mut m.layers {
            let bound = (6.0 / (l.n_in + l.n_out) as f64).sqrt();
            l.weights.iter_mut().for_each(|w| *w = rng.random_range(-bound..=bound));
        }
        m
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub(crate) fn from_layers(layers: Vec<Layer>) -> Mlp {
        Mlp { layers }
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// Parameters flattened layer by layer, weights before biases.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            p.extend_from_slice(&l.weights);
            p.extend_from_slice(&l.biases);
        }
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.param_count());
        let mut k = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&p[k..k + nw]);
            k += nw;
            let nb = l.biases.len();
            l.biases.copy_from_slice(&p[k..k + nb]);
            k += nb;
        }
    }

    fn logit(&self, x: &Row, a: &mut Vec<f64>, b: &mut Vec<f64>) -> f64 {
        a.clear();
        a.extend_from_slice(x);
        let last = self.layers.len() - 1;
        for (i, l) in self.layers.iter().enumerate() {
            l.apply(a, b);
            if i < last {
                b.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            std::mem::swap(a, b);
        }
        a[0]
    }

    /// Output probability per normalised row.
    pub fn predict(&self, rows: &[Row]) -> Vec<f64> {
        let (mut a, mut b) = (Vec::with_capacity(16), Vec::with_capacity(16));
        rows.iter().map(|x| sigmoid(self.logit(x, &mut a, &mut b))).collect()
    }

    /// Like [`Mlp::predict`], for rows of unchecked width.
    pub fn forward<R: AsRef<[f64]>>(&self, rows: &[R]) -> Result<Vec<f64>> {
        let fixed = rows
            .iter()
            .map(|r| {
                <Row>::try_from(r.as_ref())
                    .map_err(|_| Error::WidthMismatch { expected: N_FEATURES, got: r.as_ref().len() })
            })
            .collect::<Result<Vec<Row>>>()?;
        Ok(self.predict(&fixed))
    }

    /// Weighted mean cross-entropy over the rows and its gradient with
    /// respect to [`Mlp::params`]. Targets may be soft.
    pub fn loss_and_grad(&self, rows: &[Row], targets: &[f64], weights: Option<&[f64]>) -> (f64, Vec<f64>) {
        let n_layers = self.layers.len();
        let mut grads: Vec<Layer> = self.layers.iter().map(|l| Layer::zeros(l.n_in, l.n_out)).collect();
        let total_w: f64 = weights.map_or(rows.len() as f64, |w| w.iter().sum());
        let mut loss = 0.0;
        let mut acts: Vec<Vec<f64>> = vec![Vec::new(); n_layers + 1];
        let mut delta = Vec::new();
        let mut prev = Vec::new();
        for (r, x) in rows.iter().enumerate() {
            let w = weights.map_or(1.0, |w| w[r]) / total_w;
            acts[0].clear();
            acts[0].extend_from_slice(x);
            for i in 0..n_layers {
                let (lo, hi) = acts.split_at_mut(i + 1);
                self.layers[i].apply(&lo[i], &mut hi[0]);
                if i + 1 < n_layers {
                    hi[0].iter_mut().for_each(|v| *v = v.max(0.0));
                }
            }
            let z = acts[n_layers][0];
            loss += w * bce_with_logit(z, targets[r]);
            delta.clear();
            delta.push(w * (sigmoid(z) - targets[r]));
            for i in (0..n_layers).rev() {
                let l = &self.layers[i];
                let g = &mut grads[i];
                let input = &acts[i];
                for o in 0..l.n_out {
                    g.biases[o] += delta[o];
                    for (gw, &v) in g.weights[o * l.n_in..(o + 1) * l.n_in].iter_mut().zip(input) {
                        *gw += delta[o] * v;
                    }
                }
                if i == 0 {
                    break;
                }
                prev.clear();
                for j in 0..l.n_in {
                    let s: f64 = (0..l.n_out).map(|o| l.weights[o * l.n_in + j] * delta[o]).sum();
                    // Rectifier derivative, taken from the stored activation.
                    prev.push(if input[j] > 0.0 { s } else { 0.0 });
                }
                std::mem::swap(&mut delta, &mut prev);
            }
        }
        (loss, Mlp::from_layers(grads).params())
    }
}

/// Per-column `(x - mean) / sqrt(var + eps)` with statistics of this batch.
pub fn normalize_batch(rows: &[Row]) -> Vec<Row> {
    if rows.is_empty() {
        return Vec::new();
    }
    let n = rows.len() as f64;
    let mut mean = [0.0; N_FEATURES];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v / n;
        }
    }
    let mut var = [0.0; N_FEATURES];
    for r in rows {
        for c in 0..N_FEATURES {
            var[c] += (r[c] - mean[c]).powi(2) / n;
        }
    }
    let scale = var.map(|v| 1.0 / (v + NORM_EPS).sqrt());
    rows.iter()
        .map(|r| std::array::from_fn(|c| (r[c] - mean[c]) * scale[c]))
        .collect()
}

/// Confusion counts of a binary classifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Metrics {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl Metrics {
    pub fn from_counts(tp: u64, tn: u64, fp: u64, fn_: u64) -> Metrics {
        Metrics { tp, tn, fp, fn_ }
    }

    /// A row is predicted positive when its probability reaches the
    /// threshold.
    pub fn from_predictions(probs: &[f64], labels: &[bool], threshold: f64) -> Metrics {
        let mut m = Metrics::default();
        for (&p, &y) in probs.iter().zip(labels) {
            match (p >= threshold, y) {
                (true, true) => m.tp += 1,
                (true, false) => m.fp += 1,
                (false, true) => m.fn_ += 1,
                (false, false) => m.tn += 1,
            }
        }
        m
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    /// Recall in percent; 0 when there are no positives.
    pub fn recall(&self) -> f64 {
        let p = self.tp + self.fn_;
        if p == 0 {
            0.0
        } else {
            100.0 * self.tp as f64 / p as f64
        }
    }

    /// Accuracy in percent; 0 for an empty set.
    pub fn accuracy(&self) -> f64 {
        let t = self.total();
        if t == 0 {
            0.0
        } else {
            100.0 * (self.tp + self.tn) as f64 / t as f64
        }
    }
}

/// Normalises `raw` as one batch, classifies it and counts outcomes.
pub fn evaluate(model: &Mlp, raw: &[Row], labels: &[bool], threshold: f64) -> Metrics {
    let probs = model.predict(&normalize_batch(raw));
    Metrics::from_predictions(&probs, labels, threshold)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_rows(n: usize, seed: u64) -> Vec<Row> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| std::array::from_fn(|_| rng.random_range(-3.0..3.0))).collect()
    }

    /// Straightforward matrix arithmetic, written independently of the
    /// layer code.
    fn naive_forward(m: &Mlp, x: &Row) -> f64 {
        let mut v: Vec<f64> = x.to_vec();
        for (i, l) in m.layers().iter().enumerate() {
            let mut out = vec![0.0; l.n_out];
            for (o, slot) in out.iter_mut().enumerate() {
                let mut s = l.biases[o];
                for j in 0..l.n_in {
                    s += l.weights[o * l.n_in + j] * v[j];
                }
                *slot = if i + 1 < m.layers().len() { s.max(0.0) } else { s };
            }
            v = out;
        }
        1.0 / (1.0 + (-v[0]).exp())
    }

    #[test]
    fn parameter_count() {
        assert_eq!(Mlp::init_xavier(1).param_count(), 325);
        assert_eq!(Mlp::zeros().param_count(), 325);
    }

    #[test]
    fn xavier_is_deterministic_with_zero_biases() {
        let a = Mlp::init_xavier(9);
        assert_eq!(a, Mlp::init_xavier(9));
        assert_ne!(a, Mlp::init_xavier(10));
        for l in a.layers() {
            assert!(l.biases.iter().all(|&b| b == 0.0));
            let bound = (6.0 / (l.n_in + l.n_out) as f64).sqrt();
            assert!(l.weights.iter().all(|w| w.abs() <= bound));
        }
    }

    #[test]
    fn zero_model_outputs_half() {
        let out = Mlp::zeros().predict(&random_rows(5, 1));
        assert!(out.iter().all(|&p| p == 0.5));
    }

    #[test]
    fn matches_naive_oracle() {
        let m = Mlp::init_xavier(3);
        let rows = random_rows(100, 4);
        for (p, x) in m.predict(&rows).iter().zip(&rows) {
            assert!((p - naive_forward(&m, x)).abs() < 1e-6);
        }
    }

    #[test]
    fn width_is_checked() {
        let m = Mlp::zeros();
        assert!(m.forward(&[vec![0.0; 5]]).is_err());
        assert_eq!(m.forward(&vec![vec![0.0; 6]; 3]).unwrap().len(), 3);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut m = Mlp::init_xavier(5);
        let rows = random_rows(8, 6);
        let targets: Vec<f64> = (0..8).map(|i| (i % 3) as f64 / 2.0).collect();
        let (_, grad) = m.loss_and_grad(&rows, &targets, None);
        let p0 = m.params();
        let h = 1e-4;
        for k in 0..p0.len() {
            let mut p = p0.clone();
            p[k] += h;
            m.set_params(&p);
            let up = m.loss_and_grad(&rows, &targets, None).0;
            p[k] -= 2.0 * h;
            m.set_params(&p);
            let down = m.loss_and_grad(&rows, &targets, None).0;
            let numeric = (up - down) / (2.0 * h);
            let err = (numeric - grad[k]).abs() / numeric.abs().max(grad[k].abs()).max(1e-3);
            assert!(err < 1e-4, "param {k}: analytic {} numeric {numeric}", grad[k]);
        }
    }

    #[test]
    fn normalisation() {
        let rows = random_rows(1000, 8);
        let n = normalize_batch(&rows);
        for c in 0..N_FEATURES {
            let mean: f64 = n.iter().map(|r| r[c]).sum::<f64>() / 1000.0;
            let var: f64 = n.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / 1000.0;
            assert!(mean.abs() < 1e-6);
            assert!((var - 1.0).abs() < 1e-3);
        }
        let constant = vec![[2.0; N_FEATURES]; 4];
        assert!(normalize_batch(&constant).iter().flatten().all(|&v| v == 0.0));
        assert!(normalize_batch(&rows[..1]).iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn table_row_metrics() {
        let m = Metrics::from_counts(217, 48045, 8905, 68);
        assert_eq!(m.recall().round(), 76.0);
        assert_eq!(m.accuracy().round(), 84.0);
    }

    #[test]
    fn degenerate_predictors() {
        let labels = [true, false, true, false];
        let perfect = Metrics::from_predictions(&[0.9, 0.1, 0.8, 0.2], &labels, 0.5);
        assert_eq!((perfect.recall(), perfect.accuracy()), (100.0, 100.0));
        let never = Metrics::from_predictions(&[0.1; 4], &labels, 0.5);
        assert_eq!((never.recall(), never.accuracy()), (0.0, 50.0));
        let all = Metrics::from_predictions(&[0.1; 4], &labels, 0.0);
        assert_eq!(all.fn_, 0);
    }
}
