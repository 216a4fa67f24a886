//! Training loop: Adam, cosine annealing with warm restarts, class-balanced
//! sampling, MixUp, and early stopping on a stratified validation split.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};

use super::{Mlp, Row};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    pub learning_rate: f64,
    /// Beta(alpha, alpha) mixing; 0 disables MixUp.
    pub mixup_alpha: f64,
    /// First restart period, in epochs.
    pub restart_period: f64,
    pub restart_mult: f64,
    pub min_lr: f64,
    pub val_fraction: f64,
    /// Samples drawn per epoch; `None` means the training-set size.
    pub samples_per_epoch: Option<usize>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 64,
            max_epochs: 30,
            patience: 10,
            learning_rate: 0.1,
            mixup_alpha: 0.2,
            restart_period: 10.0,
            restart_mult: 2.0,
            min_lr: 0.0,
            val_fraction: 0.1,
            samples_per_epoch: None,
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// Learning rate at a fractional epoch.
    pub fn lr_at(&self, epoch: f64) -> f64 {
        let (mut t, mut period) = (epoch, self.restart_period);
        if self.restart_mult == 1.0 {
            t %= period;
        } else {
            while t >= period {
                t -= period;
                period *= self.restart_mult;
            }
        }
        let cos = (std::f64::consts::PI * t / period).cos();
        self.min_lr + (self.learning_rate - self.min_lr) * (1.0 + cos) / 2.0
    }
}

/// Per-epoch training record.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Adam {
        Adam { m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::B1.powi(self.t);
        let c2 = 1.0 - Self::B2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = Self::B1 * self.m[i] + (1.0 - Self::B1) * grad[i];
            self.v[i] = Self::B2 * self.v[i] + (1.0 - Self::B2) * grad[i] * grad[i];
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            params[i] -= lr * mh / (vh.sqrt() + Self::EPS);
        }
    }
}

/// Splits indices per class, holding out `fraction` of each class.
fn stratified_split(labels: &[bool], fraction: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
    let mut train = Vec::new();
    let mut val = Vec::new();
    for class in [false, true] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(rng);
        let mut k = (idx.len() as f64 * fraction).round() as usize;
        if k == 0 && idx.len() >= 2 && fraction > 0.0 {
            k = 1;
        }
        k = k.min(idx.len().saturating_sub(1));
        val.extend_from_slice(&idx[..k]);
        train.extend_from_slice(&idx[k..]);
    }
    (train, val)
}

/// Class weights that make both classes contribute equally.
fn balanced_weights(labels: &[bool], idx: &[usize]) -> Vec<f64> {
    let pos = idx.iter().filter(|&&i| labels[i]).count() as f64;
    let neg = idx.len() as f64 - pos;
    idx.iter()
        .map(|&i| if labels[i] { 1.0 / pos.max(1.0) } else { 1.0 / neg.max(1.0) })
        .collect()
}

/// Trains on normalised rows. Returns the model with the lowest
/// class-weighted validation loss, and the per-epoch history.
pub fn train(rows: &[Row], labels: &[bool], cfg: &TrainConfig) -> Result<(Mlp, Vec<EpochRecord>)> {
    if rows.len() != labels.len() {
        return Err(Error::BadDataset(format!("{} rows but {} labels", rows.len(), labels.len())));
    }
    let n_pos = labels.iter().filter(|&&y| y).count();
    if n_pos == 0 || n_pos == labels.len() {
        return Err(Error::BadDataset("training needs both classes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = Mlp::init_xavier(rng.random());
    let (train_idx, val_idx) = stratified_split(labels, cfg.val_fraction, &mut rng);
    let pos: Vec<usize> = train_idx.iter().copied().filter(|&i| labels[i]).collect();
    let neg: Vec<usize> = train_idx.iter().copied().filter(|&i| !labels[i]).collect();

    let val_rows: Vec<Row> = val_idx.iter().map(|&i| rows[i]).collect();
    let val_targets: Vec<f64> = val_idx.iter().map(|&i| f64::from(u8::from(labels[i]))).collect();
    let val_weights = balanced_weights(labels, &val_idx);
    let val_loss = |m: &Mlp| {
        if val_rows.is_empty() {
            0.0
        } else {
            m.loss_and_grad(&val_rows, &val_targets, Some(&val_weights)).0
        }
    };

    let per_epoch = cfg.samples_per_epoch.unwrap_or(train_idx.len()).max(1);
    let batch = cfg.batch_size.max(1);
    let n_batches = per_epoch.div_ceil(batch);
    let beta = (cfg.mixup_alpha > 0.0)
        .then(|| Beta::new(cfg.mixup_alpha, cfg.mixup_alpha))
        .transpose()
        .map_err(|e| Error::BadDataset(format!("mixup alpha: {e}")))?;

    let mut params = model.params();
    let mut adam = Adam::new(params.len());
    let mut best = (f64::INFINITY, model.clone());
    let mut since_best = 0;
    let mut history = Vec::new();
    let mut xb: Vec<Row> = Vec::with_capacity(batch);
    let mut yb: Vec<f64> = Vec::with_capacity(batch);

    for epoch in 0..cfg.max_epochs {
        let mut train_loss = 0.0;
        for b in 0..n_batches {
            let size = batch.min(per_epoch - b * batch);
            xb.clear();
            yb.clear();
            for _ in 0..size {
                let class = if rng.random_bool(0.5) { &pos } else { &neg };
                let i = class[rng.random_range(0..class.len())];
                xb.push(rows[i]);
                yb.push(f64::from(u8::from(labels[i])));
            }
            if let Some(beta) = &beta {
                let lam = beta.sample(&mut rng);
                let mut perm: Vec<usize> = (0..size).collect();
                perm.shuffle(&mut rng);
                let (x0, y0) = (xb.clone(), yb.clone());
                for k in 0..size {
                    let j = perm[k];
                    xb[k] = std::array::from_fn(|c| lam * x0[k][c] + (1.0 - lam) * x0[j][c]);
                    yb[k] = lam * y0[k] + (1.0 - lam) * y0[j];
                }
            }
            let (loss, grad) = model.loss_and_grad(&xb, &yb, None);
            train_loss += loss / n_batches as f64;
            let lr = cfg.lr_at(epoch as f64 + b as f64 / n_batches as f64);
            adam.step(&mut params, &grad, lr);
            model.set_params(&params);
        }
        let vl = val_loss(&model);
        history.push(EpochRecord { epoch, train_loss, val_loss: vl });
        if vl < best.0 {
            best = (vl, model.clone());
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                break;
            }
        }
    }
    Ok((best.1, history))
}
