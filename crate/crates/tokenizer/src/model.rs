use std::collections::BTreeMap;
use std::f64::consts::PI;

use diffkit::{Tape, Tensor, Var};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use vesseltok_core::field::{GridGeometry, GridValues, OccupancyGrid};
use vesseltok_core::geom::Point3;
use vesseltok_core::sampling::farthest_point_sampling;

use crate::config::ModelConfig;
use crate::error::{Error, Result};
use crate::params::Params;

/// Queries decoded per tape at inference.
const DECODE_CHUNK: usize = 4096;

/// Latent Gaussian of one graph, `K×C` each.
#[derive(Clone, Debug, PartialEq)]
pub struct LatentTokens {
    pub mu: Tensor,
    pub log_var: Tensor,
    /// `mu + exp(log_var / 2) ⊙ ε`, once drawn.
    pub sample: Option<Tensor>,
}

impl LatentTokens {
    pub fn token_count(&self) -> usize {
        self.mu.shape()[0]
    }

    pub fn channel_dim(&self) -> usize {
        self.mu.shape()[1]
    }
}

/// Taped latent statistics.
#[derive(Clone, Copy, Debug)]
pub struct LatentVars {
    pub mu: Var,
    pub log_var: Var,
}

/// Parameters recorded on a tape.
pub struct ParamVars {
    vars: BTreeMap<String, Var>,
}

impl ParamVars {
    /// Records every parameter, as leaves when `trainable`, else as constants.
    pub fn bind(tape: &mut Tape, params: &Params, trainable: bool) -> Self {
        let vars = params
            .iter()
            .map(|(name, t)| {
                let v = if trainable {
                    tape.leaf(t.clone())
                } else {
                    tape.constant(t.clone())
                };
                (name.clone(), v)
            })
            .collect();
        Self { vars }
    }

    pub fn get(&self, name: &str) -> Var {
        *self
            .vars
            .get(name)
            .unwrap_or_else(|| panic!("unknown parameter {name}"))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Var)> {
        self.vars.iter()
    }
}

/// Per axis `[x, sin(2⁰πx), cos(2⁰πx), …, sin(2^(F-1)πx), cos(2^(F-1)πx)]`,
/// axes concatenated: `N × 3(1 + 2F)`.
pub fn fourier_encode(points: &[Point3], n_freq: usize) -> Tensor {
    let per_axis = 1 + 2 * n_freq;
    let width = 3 * per_axis;
    let mut data = Vec::with_capacity(points.len() * width);
    for p in points {
        for &x in p {
            data.push(x);
            let mut f = PI;
            for _ in 0..n_freq {
                data.push((f * x).sin());
                data.push((f * x).cos());
                f *= 2.0;
            }
        }
    }
    Tensor::new(vec![points.len(), width], data).expect("fourier shape")
}

fn linear(t: &mut Tape, p: &ParamVars, prefix: &str, x: Var) -> Result<Var> {
    let h = t.matmul(x, p.get(&format!("{prefix}.w")))?;
    Ok(t.add_row(h, p.get(&format!("{prefix}.b")))?)
}

fn norm(t: &mut Tape, p: &ParamVars, prefix: &str, x: Var) -> Result<Var> {
    Ok(t.layer_norm(x, p.get(&format!("{prefix}.g")), p.get(&format!("{prefix}.b")))?)
}

fn attention(t: &mut Tape, p: &ParamVars, c: &ModelConfig, prefix: &str, xq: Var, xkv: Var) -> Result<Var> {
    let q = t.matmul(xq, p.get(&format!("{prefix}.wq")))?;
    let k = t.matmul(xkv, p.get(&format!("{prefix}.wk")))?;
    let v = t.matmul(xkv, p.get(&format!("{prefix}.wv")))?;
    let dh = c.head_dim();
    let scale = 1.0 / (dh as f64).sqrt();
    let mut heads = Vec::with_capacity(c.heads);
    for h in 0..c.heads {
        let qh = t.slice_cols(q, h * dh, dh)?;
        let kh = t.slice_cols(k, h * dh, dh)?;
        let vh = t.slice_cols(v, h * dh, dh)?;
        let kt = t.transpose(kh)?;
        let s = t.matmul(qh, kt)?;
        let s = t.scale(s, scale)?;
        let a = t.softmax(s, 1)?;
        heads.push(t.matmul(a, vh)?);
    }
    let o = if heads.len() == 1 { heads[0] } else { t.concat_cols(&heads)? };
    let o = t.matmul(o, p.get(&format!("{prefix}.wo")))?;
    Ok(t.add_row(o, p.get(&format!("{prefix}.bo")))?)
}

fn feed_forward(t: &mut Tape, p: &ParamVars, prefix: &str, x: Var) -> Result<Var> {
    let h = t.matmul(x, p.get(&format!("{prefix}.w1")))?;
    let h = t.add_row(h, p.get(&format!("{prefix}.b1")))?;
    let h = t.gelu(h)?;
    let h = t.matmul(h, p.get(&format!("{prefix}.w2")))?;
    Ok(t.add_row(h, p.get(&format!("{prefix}.b2")))?)
}

/// Pre-norm self-attention block.
fn self_block(t: &mut Tape, p: &ParamVars, c: &ModelConfig, prefix: &str, x: Var) -> Result<Var> {
    let n = norm(t, p, &format!("{prefix}.ln1"), x)?;
    let a = attention(t, p, c, &format!("{prefix}.attn"), n, n)?;
    let h = t.add(x, a)?;
    let n = norm(t, p, &format!("{prefix}.ln2"), h)?;
    let f = feed_forward(t, p, &format!("{prefix}.ffn"), n)?;
    Ok(t.add(h, f)?)
}

/// Pre-norm block where `q` attends to `kv`.
fn cross_block(t: &mut Tape, p: &ParamVars, c: &ModelConfig, prefix: &str, q: Var, kv: Var) -> Result<Var> {
    let nq = norm(t, p, &format!("{prefix}.ln_q"), q)?;
    let nkv = norm(t, p, &format!("{prefix}.ln_kv"), kv)?;
    let a = attention(t, p, c, &format!("{prefix}.attn"), nq, nkv)?;
    let h = t.add(q, a)?;
    let n = norm(t, p, &format!("{prefix}.ln2"), h)?;
    let f = feed_forward(t, p, &format!("{prefix}.ffn"), n)?;
    Ok(t.add(h, f)?)
}

/// Records the encoder: farthest-point-sampled nodes query all node
/// embeddings through one cross-attention block, self-attention layers
/// follow, and two linear heads give the latent mean and log-variance.
pub fn encode_on_tape(t: &mut Tape, p: &ParamVars, c: &ModelConfig, points: &[Point3]) -> Result<LatentVars> {
    if points.len() < c.token_count {
        return Err(Error::Shape(format!(
            "encoder needs at least K={} points, got {}",
            c.token_count,
            points.len()
        )));
    }
    let picked = farthest_point_sampling(points, c.token_count)?;
    let seeds: Vec<Point3> = picked.iter().map(|&i| points[i]).collect();
    let all = t.constant(fourier_encode(points, c.fourier_frequencies));
    let sel = t.constant(fourier_encode(&seeds, c.fourier_frequencies));
    let e = linear(t, p, "enc.embed", all)?;
    let q = linear(t, p, "enc.embed", sel)?;
    let mut h = cross_block(t, p, c, "enc.cross", q, e)?;
    for i in 0..c.encoder_self_layers {
        h = self_block(t, p, c, &format!("enc.self{i}"), h)?;
    }
    let h = norm(t, p, "enc.ln_out", h)?;
    let mu = linear(t, p, "enc.mu", h)?;
    let log_var = linear(t, p, "enc.logvar", h)?;
    Ok(LatentVars { mu, log_var })
}

/// Records the decoder on tokens `z` (`K×C`) and returns `M×1` occupancy
/// probabilities for `queries`.
pub fn decode_on_tape(t: &mut Tape, p: &ParamVars, c: &ModelConfig, z: Var, queries: &[Point3]) -> Result<Var> {
    let zs = t.shape(z);
    if zs != [c.token_count, c.channel_dim] {
        return Err(Error::Shape(format!(
            "tokens have shape {zs:?}, config expects [{}, {}]",
            c.token_count, c.channel_dim
        )));
    }
    let mut tokens = linear(t, p, "dec.lift", z)?;
    for i in 0..c.decoder_self_layers {
        tokens = self_block(t, p, c, &format!("dec.self{i}"), tokens)?;
    }
    let qf = t.constant(fourier_encode(queries, c.fourier_frequencies));
    let q = linear(t, p, "dec.query", qf)?;
    let o = cross_block(t, p, c, "dec.cross", q, tokens)?;
    let o = norm(t, p, "dec.ln_out", o)?;
    let logits = linear(t, p, "dec.head", o)?;
    Ok(t.sigmoid(logits)?)
}

/// Latent statistics of a node cloud (assumed normalized to `[-1, 1]³`).
pub fn encode(points: &[Point3], config: &ModelConfig, params: &Params) -> Result<LatentTokens> {
    config.validate()?;
    let mut t = Tape::new();
    let p = ParamVars::bind(&mut t, params, false);
    let lv = encode_on_tape(&mut t, &p, config, points)?;
    Ok(LatentTokens {
        mu: t.value(lv.mu).clone(),
        log_var: t.value(lv.log_var).clone(),
        sample: None,
    })
}

/// Draws `ε ~ N(0, I)` from `seed` and fills `sample`.
pub fn reparameterize(latent: &LatentTokens, seed: u64) -> Result<LatentTokens> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps: Vec<f64> = (0..latent.mu.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
    reparameterize_with(latent, &Tensor::new(latent.mu.shape().to_vec(), eps)?)
}

/// `sample = mu + exp(log_var / 2) ⊙ eps` for a given `eps`.
pub fn reparameterize_with(latent: &LatentTokens, eps: &Tensor) -> Result<LatentTokens> {
    if eps.shape() != latent.mu.shape() || latent.log_var.shape() != latent.mu.shape() {
        return Err(Error::Shape(format!(
            "noise {:?} / log-variance {:?} must match mean {:?}",
            eps.shape(),
            latent.log_var.shape(),
            latent.mu.shape()
        )));
    }
    let data = latent
        .mu
        .data()
        .iter()
        .zip(latent.log_var.data())
        .zip(eps.data())
        .map(|((&m, &lv), &e)| m + (0.5 * lv).exp() * e)
        .collect();
    Ok(LatentTokens {
        sample: Some(Tensor::new(latent.mu.shape().to_vec(), data)?),
        ..latent.clone()
    })
}

/// Occupancy probabilities at `queries`, decoded in parallel chunks.
pub fn decode(z: &Tensor, queries: &[Point3], config: &ModelConfig, params: &Params) -> Result<Vec<f64>> {
    config.validate()?;
    if z.shape() != [config.token_count, config.channel_dim] {
        return Err(Error::Shape(format!(
            "tokens have shape {:?}, config expects [{}, {}]",
            z.shape(),
            config.token_count,
            config.channel_dim
        )));
    }
    let chunks: Vec<Vec<f64>> = queries
        .par_chunks(DECODE_CHUNK)
        .map(|chunk| {
            let mut t = Tape::new();
            let p = ParamVars::bind(&mut t, params, false);
            let zv = t.constant(z.clone());
            let probs = decode_on_tape(&mut t, &p, config, zv, chunk)?;
            Ok(t.value(probs).data().to_vec())
        })
        .collect::<Result<_>>()?;
    Ok(chunks.concat())
}

/// Decodes at every voxel center of `geometry` into a probability grid.
pub fn decode_field(
    z: &Tensor,
    geometry: &GridGeometry,
    config: &ModelConfig,
    params: &Params,
) -> Result<OccupancyGrid> {
    let len = geometry.checked_len()?;
    let centers: Vec<Point3> = (0..len).map(|i| geometry.center_of_index(i)).collect();
    let probs = decode(z, &centers, config, params)?;
    let values = probs.into_iter().map(|v| v as f32).collect();
    Ok(OccupancyGrid::new(*geometry, GridValues::Probability(values))?)
}
