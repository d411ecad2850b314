use std::collections::BTreeMap;
use std::f64::consts::PI;

use diffkit::{Tape, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use vesseltok_core::field::{sample_queries, QuerySet, SamplingConfig};
use vesseltok_core::geom::{self, random_rotation, Point3};
use vesseltok_core::SpatialGraph;

use crate::config::{ModelConfig, TrainConfig};
use crate::error::{Error, Result};
use crate::loss::total_loss;
use crate::model::{decode_on_tape, encode_on_tape, ParamVars};
use crate::params::Params;

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Mean loss terms over one pass through the dataset.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub bce: f64,
    pub kl: f64,
    pub total: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub params: Params,
    pub history: Vec<EpochLoss>,
}

/// Dataset-average ratio of raw coordinates to latent size,
/// `(1/M) Σ 3 N_i / (K C)`.
pub fn compression_ratio(node_counts: &[usize], k: usize, c: usize) -> Result<f64> {
    if node_counts.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if k == 0 || c == 0 {
        return Err(Error::Config(format!("K and C must be >= 1, got {k} and {c}")));
    }
    // exact integer numerator and denominator, rounded once
    let coords: u128 = node_counts.iter().map(|&n| 3 * n as u128).sum();
    let denom = (k as u128) * (c as u128) * node_counts.len() as u128;
    Ok(coords as f64 / denom as f64)
}

/// Cosine decay from `peak` at step 0 to `min` at the last step.
pub fn cosine_lr(step: usize, total_steps: usize, peak: f64, min: f64) -> f64 {
    if total_steps <= 1 {
        return peak;
    }
    let progress = step.min(total_steps - 1) as f64 / (total_steps - 1) as f64;
    min + 0.5 * (peak - min) * (1.0 + (PI * progress).cos())
}

/// Loss values and parameter gradients for one graph, query set and noise draw.
pub fn training_loss(
    points: &[Point3],
    queries: &QuerySet,
    eps: &Tensor,
    config: &ModelConfig,
    params: &Params,
) -> Result<(EpochLoss, BTreeMap<String, Tensor>)> {
    let mut t = Tape::new();
    let p = ParamVars::bind(&mut t, params, true);
    let latent = encode_on_tape(&mut t, &p, config, points)?;
    if eps.shape() != t.shape(latent.mu) {
        return Err(Error::Shape(format!(
            "noise {:?} does not match latent {:?}",
            eps.shape(),
            t.shape(latent.mu)
        )));
    }
    let std = t.scale(latent.log_var, 0.5)?;
    let std = t.exp(std)?;
    let e = t.constant(eps.clone());
    let noise = t.mul(std, e)?;
    let z = t.add(latent.mu, noise)?;
    let probs = decode_on_tape(&mut t, &p, config, z, &queries.points)?;
    let parts = total_loss(&mut t, probs, &queries.labels, latent, config.kl_weight)?;
    let mut grads = t.backward(parts.total)?;
    let values = EpochLoss {
        epoch: 0,
        bce: t.scalar(parts.bce)?,
        kl: t.scalar(parts.kl)?,
        total: t.scalar(parts.total)?,
    };
    let named = p
        .iter()
        .map(|(name, &v)| {
            let g = grads
                .take(v)
                .unwrap_or_else(|| Tensor::zeros(params.get(name).shape().to_vec()));
            (name.clone(), g)
        })
        .collect();
    Ok((values, named))
}

struct AdamW {
    moments: BTreeMap<String, (Vec<f64>, Vec<f64>)>,
    step: i32,
}

impl AdamW {
    fn new(params: &Params) -> Self {
        let moments = params
            .iter()
            .map(|(k, t)| (k.clone(), (vec![0.0; t.len()], vec![0.0; t.len()])))
            .collect();
        Self { moments, step: 0 }
    }

    /// Decoupled weight decay is applied to matrices only.
    fn update(&mut self, params: &mut Params, grads: &BTreeMap<String, Tensor>, lr: f64, weight_decay: f64) {
        self.step += 1;
        let c1 = 1.0 - ADAM_BETA1.powi(self.step);
        let c2 = 1.0 - ADAM_BETA2.powi(self.step);
        for (name, tensor) in params.iter_mut() {
            let g = grads[name].data();
            let decay = if tensor.shape().len() == 2 { weight_decay } else { 0.0 };
            let (m, v) = self.moments.get_mut(name).expect("moment per parameter");
            for (i, w) in tensor.data_mut().iter_mut().enumerate() {
                m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * g[i];
                v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * g[i] * g[i];
                let step = (m[i] / c1) / ((v[i] / c2).sqrt() + ADAM_EPS);
                *w -= lr * (step + decay * *w);
            }
        }
    }
}

/// Trains from a fresh initialization; see [`train_with_progress`].
pub fn train(dataset: &[SpatialGraph], model: &ModelConfig, cfg: &TrainConfig) -> Result<TrainOutcome> {
    train_with_progress(dataset, model, cfg, Params::init(model)?, |_| {})
}

/// AdamW with cosine learning-rate decay, one graph per step. Every epoch
/// each graph is optionally rotated, gets a fresh query set and a fresh
/// latent noise draw, all from the `data_seed` stream. Single-threaded and
/// deterministic.
pub fn train_with_progress(
    dataset: &[SpatialGraph],
    model: &ModelConfig,
    cfg: &TrainConfig,
    mut params: Params,
    mut on_epoch: impl FnMut(&EpochLoss),
) -> Result<TrainOutcome> {
    model.validate()?;
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if let Some((i, g)) = dataset.iter().enumerate().find(|(_, g)| g.node_count() < model.token_count) {
        return Err(Error::Config(format!(
            "graph {i} has {} nodes, fewer than K={}",
            g.node_count(),
            model.token_count
        )));
    }
    let sampling = SamplingConfig {
        count: cfg.queries,
        near_fraction: cfg.near_fraction,
        sigma_range: (cfg.sigma_min, cfg.sigma_max),
    };
    let total_steps = cfg.epochs * dataset.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.data_seed);
    let mut opt = AdamW::new(&params);
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut step = 0;
    for epoch in 0..cfg.epochs {
        let mut sums = (0.0, 0.0, 0.0);
        for graph in dataset {
            let graph = if cfg.rotate {
                let r = random_rotation([rng.random(), rng.random(), rng.random()]);
                graph.map_nodes(|p| geom::rotate(&r, p))?
            } else {
                graph.clone()
            };
            let queries = sample_queries(&graph, cfg.pseudo_radius, &sampling, rng.random())?;
            let eps: Vec<f64> = (0..model.latent_len()).map(|_| StandardNormal.sample(&mut rng)).collect();
            let eps = Tensor::new(vec![model.token_count, model.channel_dim], eps)?;
            let (loss, grads) = training_loss(graph.nodes(), &queries, &eps, model, &params)?;
            let lr = cosine_lr(step, total_steps, cfg.lr_peak, cfg.lr_min);
            opt.update(&mut params, &grads, lr, cfg.weight_decay);
            if !params.all_finite() {
                return Err(diffkit::DiffError::NonFinite { op: "optimizer step" }.into());
            }
            sums.0 += loss.bce;
            sums.1 += loss.kl;
            sums.2 += loss.total;
            step += 1;
        }
        let n = dataset.len() as f64;
        let record = EpochLoss {
            epoch,
            bce: sums.0 / n,
            kl: sums.1 / n,
            total: sums.2 / n,
        };
        on_epoch(&record);
        history.push(record);
    }
    Ok(TrainOutcome { params, history })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compression_ratio_examples() {
        assert_eq!(compression_ratio(&[1024, 3072], 512, 4).unwrap(), 3.0);
        assert_eq!(compression_ratio(&[8], 6, 4).unwrap(), 1.0);
        assert!(compression_ratio(&[], 1, 1).is_err());
    }

    #[test]
    fn cosine_endpoints() {
        assert_eq!(cosine_lr(0, 100, 1e-3, 1e-5), 1e-3);
        assert!((cosine_lr(99, 100, 1e-3, 1e-5) - 1e-5).abs() < 1e-18);
        assert_eq!(cosine_lr(0, 1, 2e-3, 0.0), 2e-3);
    }
}
