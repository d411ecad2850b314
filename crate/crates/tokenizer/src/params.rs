use std::collections::BTreeMap;

use diffkit::Tensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ModelConfig;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Init {
    /// Uniform in `±sqrt(6 / (fan_in + fan_out))`.
    Xavier,
    Zeros,
    Ones,
}

/// Every parameter tensor of the model, in a fixed order.
pub(crate) fn layout(c: &ModelConfig) -> Vec<(String, Vec<usize>, Init)> {
    let d = c.hidden_dim;
    let f = c.fourier_width();
    let mut specs: Vec<(String, Vec<usize>, Init)> = Vec::new();
    let w = |specs: &mut Vec<_>, name: String, rows: usize, cols: usize| specs.push((name, vec![rows, cols], Init::Xavier));
    let b = |specs: &mut Vec<_>, name: String, n: usize| specs.push((name, vec![n], Init::Zeros));
    let ln = |specs: &mut Vec<(String, Vec<usize>, Init)>, p: &str| {
        specs.push((format!("{p}.g"), vec![d], Init::Ones));
        specs.push((format!("{p}.b"), vec![d], Init::Zeros));
    };
    let attn = |specs: &mut Vec<_>, p: &str| {
        for m in ["wq", "wk", "wv", "wo"] {
            w(specs, format!("{p}.{m}"), d, d);
        }
        b(specs, format!("{p}.bo"), d);
    };
    let ffn = |specs: &mut Vec<_>, p: &str| {
        let h = c.ffn_mult * d;
        w(specs, format!("{p}.w1"), d, h);
        b(specs, format!("{p}.b1"), h);
        w(specs, format!("{p}.w2"), h, d);
        b(specs, format!("{p}.b2"), d);
    };
    let self_block = |specs: &mut Vec<_>, p: &str| {
        ln(specs, &format!("{p}.ln1"));
        attn(specs, &format!("{p}.attn"));
        ln(specs, &format!("{p}.ln2"));
        ffn(specs, &format!("{p}.ffn"));
    };
    let cross_block = |specs: &mut Vec<_>, p: &str| {
        ln(specs, &format!("{p}.ln_q"));
        ln(specs, &format!("{p}.ln_kv"));
        attn(specs, &format!("{p}.attn"));
        ln(specs, &format!("{p}.ln2"));
        ffn(specs, &format!("{p}.ffn"));
    };

    w(&mut specs, "enc.embed.w".into(), f, d);
    b(&mut specs, "enc.embed.b".into(), d);
    cross_block(&mut specs, "enc.cross");
    for i in 0..c.encoder_self_layers {
        self_block(&mut specs, &format!("enc.self{i}"));
    }
    ln(&mut specs, "enc.ln_out");
    w(&mut specs, "enc.mu.w".into(), d, c.channel_dim);
    b(&mut specs, "enc.mu.b".into(), c.channel_dim);
    w(&mut specs, "enc.logvar.w".into(), d, c.channel_dim);
    b(&mut specs, "enc.logvar.b".into(), c.channel_dim);

    w(&mut specs, "dec.lift.w".into(), c.channel_dim, d);
    b(&mut specs, "dec.lift.b".into(), d);
    for i in 0..c.decoder_self_layers {
        self_block(&mut specs, &format!("dec.self{i}"));
    }
    w(&mut specs, "dec.query.w".into(), f, d);
    b(&mut specs, "dec.query.b".into(), d);
    cross_block(&mut specs, "dec.cross");
    ln(&mut specs, "dec.ln_out");
    w(&mut specs, "dec.head.w".into(), d, 1);
    b(&mut specs, "dec.head.b".into(), 1);
    specs
}

/// Named parameter tensors.
#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    tensors: BTreeMap<String, Tensor>,
}

impl Params {
    /// Deterministic initialization from `config.seed`.
    pub fn init(config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut tensors = BTreeMap::new();
        for (name, shape, init) in layout(config) {
            let n: usize = shape.iter().product();
            let data = match init {
                Init::Zeros => vec![0.0; n],
                Init::Ones => vec![1.0; n],
                Init::Xavier => {
                    let a = (6.0 / (shape[0] + shape[1]) as f64).sqrt();
                    (0..n).map(|_| rng.random_range(-a..a)).collect()
                }
            };
            tensors.insert(name, Tensor::new(shape, data)?);
        }
        Ok(Self { tensors })
    }

    /// Builds from named tensors, checking that they match `config`'s layout.
    pub fn from_tensors(config: &ModelConfig, tensors: BTreeMap<String, Tensor>) -> Result<Self> {
        let expected = layout(config);
        if expected.len() != tensors.len() {
            return Err(Error::Shape(format!(
                "config expects {} parameter tensors, found {}",
                expected.len(),
                tensors.len()
            )));
        }
        for (name, shape, _) in &expected {
            match tensors.get(name) {
                None => return Err(Error::Shape(format!("missing parameter {name}"))),
                Some(t) if t.shape() != shape.as_slice() => {
                    return Err(Error::Shape(format!(
                        "parameter {name} has shape {:?}, config expects {shape:?}",
                        t.shape()
                    )))
                }
                Some(t) if !t.is_finite() => {
                    return Err(Error::Format(format!("parameter {name} holds non-finite values")))
                }
                _ => {}
            }
        }
        Ok(Self { tensors })
    }

    pub fn get(&self, name: &str) -> &Tensor {
        self.tensors
            .get(name)
            .unwrap_or_else(|| panic!("unknown parameter {name}"))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Tensor)> {
        self.tensors.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&String, &mut Tensor)> {
        self.tensors.iter_mut()
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn scalar_count(&self) -> usize {
        self.tensors.values().map(Tensor::len).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.tensors.values().all(Tensor::is_finite)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_seeded() {
        let c = ModelConfig::micro();
        assert_eq!(Params::init(&c).unwrap(), Params::init(&c).unwrap());
        let other = ModelConfig { seed: 1, ..c };
        assert_ne!(Params::init(&c).unwrap(), Params::init(&other).unwrap());
    }

    #[test]
    fn layout_names_are_unique() {
        let l = layout(&ModelConfig::default());
        let mut names: Vec<_> = l.iter().map(|(n, _, _)| n.clone()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), l.len());
    }

    #[test]
    fn from_tensors_checks_shapes() {
        let c = ModelConfig::micro();
        let p = Params::init(&c).unwrap();
        let mut t: BTreeMap<String, Tensor> = p.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        assert!(Params::from_tensors(&c, t.clone()).is_ok());
        t.insert("enc.mu.w".into(), Tensor::zeros(vec![16, 3]));
        assert!(Params::from_tensors(&c, t).is_err());
    }
}
