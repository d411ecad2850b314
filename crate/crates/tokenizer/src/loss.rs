use diffkit::{Tape, Tensor, Var};

use crate::error::{Error, Result};
use crate::model::LatentVars;

/// Probabilities are kept in `[PROB_CLAMP, 1 - PROB_CLAMP]` before the log.
pub const PROB_CLAMP: f64 = 1e-12;

/// Taped loss terms.
#[derive(Clone, Copy, Debug)]
pub struct LossParts {
    pub bce: Var,
    pub kl: Var,
    pub total: Var,
}

/// Mean binary cross-entropy of clamped probabilities.
pub fn bce(probs: &[f64], labels: &[u8]) -> Result<f64> {
    if probs.len() != labels.len() || probs.is_empty() {
        return Err(Error::Shape(format!(
            "{} probabilities for {} labels",
            probs.len(),
            labels.len()
        )));
    }
    let total: f64 = probs
        .iter()
        .zip(labels)
        .map(|(&p, &y)| {
            let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
            if y != 0 {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum();
    Ok(total / probs.len() as f64)
}

/// `½ Σ (μ² + exp(log σ²) − log σ² − 1)`.
pub fn kl_divergence(mu: &[f64], log_var: &[f64]) -> f64 {
    0.5 * mu
        .iter()
        .zip(log_var)
        .map(|(&m, &lv)| m * m + lv.exp() - lv - 1.0)
        .sum::<f64>()
}

pub(crate) fn bce_on_tape(t: &mut Tape, probs: Var, labels: &[u8]) -> Result<Var> {
    if t.value(probs).len() != labels.len() || labels.is_empty() {
        return Err(Error::Shape(format!(
            "{} probabilities for {} labels",
            t.value(probs).len(),
            labels.len()
        )));
    }
    let shape = t.shape(probs).to_vec();
    let y: Vec<f64> = labels.iter().map(|&l| f64::from(u8::from(l != 0))).collect();
    let not_y: Vec<f64> = y.iter().map(|v| 1.0 - v).collect();
    let yv = t.constant(Tensor::new(shape.clone(), y)?);
    let nyv = t.constant(Tensor::new(shape, not_y)?);
    let p = t.clamp(probs, PROB_CLAMP, 1.0 - PROB_CLAMP)?;
    let log_p = t.log(p)?;
    let q = t.scale(p, -1.0)?;
    let q = t.add_scalar(q, 1.0)?;
    let log_q = t.log(q)?;
    let a = t.mul(yv, log_p)?;
    let b = t.mul(nyv, log_q)?;
    let s = t.add(a, b)?;
    let m = t.mean(s)?;
    Ok(t.scale(m, -1.0)?)
}

pub(crate) fn kl_on_tape(t: &mut Tape, latent: LatentVars) -> Result<Var> {
    let mu2 = t.mul(latent.mu, latent.mu)?;
    let var = t.exp(latent.log_var)?;
    let s = t.add(mu2, var)?;
    let s = t.sub(s, latent.log_var)?;
    let s = t.add_scalar(s, -1.0)?;
    let s = t.sum(s)?;
    Ok(t.scale(s, 0.5)?)
}

/// `BCE + λ · KL` on the tape.
pub fn total_loss(t: &mut Tape, probs: Var, labels: &[u8], latent: LatentVars, kl_weight: f64) -> Result<LossParts> {
    let bce = bce_on_tape(t, probs, labels)?;
    let kl = kl_on_tape(t, latent)?;
    let weighted = t.scale(kl, kl_weight)?;
    let total = t.add(bce, weighted)?;
    Ok(LossParts { bce, kl, total })
}
